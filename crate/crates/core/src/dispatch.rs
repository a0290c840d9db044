//! Bounded-concurrency, rate-limited batch execution.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DispatchLimits {
    pub max_concurrent: usize,
    /// `None` disables rate limiting.
    pub requests_per_minute: Option<u32>,
}

impl DispatchLimits {
    pub fn new(max_concurrent: usize, requests_per_minute: Option<u32>) -> Self {
        assert!(max_concurrent > 0, "max_concurrent must be positive");
        assert!(requests_per_minute != Some(0), "requests_per_minute must be positive");
        Self {
            max_concurrent,
            requests_per_minute,
        }
    }

    pub fn sequential() -> Self {
        Self::new(1, None)
    }
}

impl Default for DispatchLimits {
    fn default() -> Self {
        Self::new(4, None)
    }
}

/// Start slots spaced `60 / rpm` seconds apart; the first start is immediate.
struct Pacer {
    interval: Option<Duration>,
    next: Mutex<Option<Instant>>,
}

impl Pacer {
    fn new(rpm: Option<u32>) -> Self {
        Self {
            interval: rpm.map(|r| Duration::from_secs_f64(60.0 / f64::from(r))),
            next: Mutex::new(None),
        }
    }

    fn wait(&self) {
        let Some(interval) = self.interval else { return };
        let slot = {
            let mut next = self.next.lock().expect("pacer lock poisoned");
            let now = Instant::now();
            let slot = match *next {
                Some(t) if t > now => t,
                _ => now,
            };
            *next = Some(slot + interval);
            slot
        };
        let now = Instant::now();
        if slot > now {
            thread::sleep(slot - now);
        }
    }
}

/// Runs `f` over `items` with at most `max_concurrent` calls in flight and
/// call starts paced to the rate limit. Results come back in input order;
/// a failing item never aborts the others.
pub fn dispatch<T, R, E, F>(items: Vec<T>, limits: DispatchLimits, f: F) -> Vec<Result<R, E>>
where
    T: Send,
    R: Send,
    E: Send,
    F: Fn(T) -> Result<R, E> + Sync,
{
    let n = items.len();
    if n == 0 {
        return Vec::new();
    }
    let pacer = Pacer::new(limits.requests_per_minute);
    let queue: Vec<Mutex<Option<T>>> = items.into_iter().map(|t| Mutex::new(Some(t))).collect();
    let results: Vec<Mutex<Option<Result<R, E>>>> = (0..n).map(|_| Mutex::new(None)).collect();
    let cursor = AtomicUsize::new(0);
    let workers = limits.max_concurrent.min(n);

    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let item = queue[i].lock().unwrap().take().expect("item taken twice");
                pacer.wait();
                let out = f(item);
                *results[i].lock().unwrap() = Some(out);
            });
        }
    });

    results
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("every item is processed"))
        .collect()
}
