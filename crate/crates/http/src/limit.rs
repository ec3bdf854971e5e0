use std::sync::{Condvar, Mutex};

/// Counting semaphore that admits waiters in arrival order.
#[derive(Debug)]
pub struct FairLimiter {
    capacity: usize,
    state: Mutex<LimiterState>,
    wake: Condvar,
}

#[derive(Debug, Default)]
struct LimiterState {
    in_flight: usize,
    next_ticket: u64,
    serving: u64,
}

pub struct Permit<'a> {
    limiter: &'a FairLimiter,
}

impl FairLimiter {
    pub fn new(capacity: usize) -> Self {
        FairLimiter { capacity: capacity.max(1), state: Mutex::default(), wake: Condvar::new() }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut st = self.state.lock().expect("limiter poisoned");
        let ticket = st.next_ticket;
        st.next_ticket += 1;
        while st.serving != ticket || st.in_flight >= self.capacity {
            st = self.wake.wait(st).expect("limiter poisoned");
        }
        st.serving += 1;
        st.in_flight += 1;
        drop(st);
        self.wake.notify_all();
        Permit { limiter: self }
    }

    pub fn in_flight(&self) -> usize {
        self.state.lock().expect("limiter poisoned").in_flight
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut st = self.limiter.state.lock().expect("limiter poisoned");
        st.in_flight -= 1;
        drop(st);
        self.limiter.wake.notify_all();
    }
}
