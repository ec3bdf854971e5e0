//! HTTP plumbing shared by the model gateway, search, Wikipedia and dataset
//! clients.
//!
//! Everything talks to the network through [`HttpClient`]. Real traffic goes
//! through [`UreqClient`]; [`CachingClient`] wraps any client with an on-disk
//! cache keyed by the normalized request and can run strictly offline, and
//! [`FixtureClient`] serves canned responses in tests.

mod cache;
mod client;
mod fixture;
mod limit;
mod retry;

pub use cache::{CacheMode, CachingClient, DiskCache};
pub use client::{HttpClient, HttpError, HttpRequest, HttpResponse, Method, UreqClient};
pub use fixture::FixtureClient;
pub use limit::{FairLimiter, Permit};
pub use retry::{retry, RetryPolicy};
