use std::time::Duration;

use rand::Rng;

/// Exponential backoff: `base`, `2·base`, `4·base`, ... between attempts,
/// each delay scaled by a random factor in [0.5, 1.5) when jitter is on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
    pub jitter: bool,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { attempts: 3, base_delay: Duration::from_secs(1), jitter: true }
    }
}

impl RetryPolicy {
    /// Same attempt count with no sleeping, for tests and replay.
    pub fn immediate(attempts: u32) -> Self {
        RetryPolicy { attempts, base_delay: Duration::ZERO, jitter: false }
    }

    pub fn delay_before(&self, retry: u32) -> Duration {
        let nominal = self.base_delay.saturating_mul(1u32 << retry.min(16));
        if self.jitter && !nominal.is_zero() {
            nominal.mul_f64(rand::rng().random_range(0.5..1.5))
        } else {
            nominal
        }
    }
}

/// Runs `op` until it succeeds, returns a non-transient error, or the policy
/// runs out of attempts.
pub fn retry<T, E>(policy: &RetryPolicy, mut op: impl FnMut(u32) -> Result<T, E>, is_transient: impl Fn(&E) -> bool) -> Result<T, E> {
    let attempts = policy.attempts.max(1);
    let mut attempt = 0;
    loop {
        match op(attempt) {
            Ok(v) => return Ok(v),
            Err(e) if attempt + 1 < attempts && is_transient(&e) => {
                let delay = policy.delay_before(attempt);
                log::warn!("attempt {} failed, retrying in {:?}", attempt + 1, delay);
                if !delay.is_zero() {
                    std::thread::sleep(delay);
                }
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}
