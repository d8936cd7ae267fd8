//! Exclusive leases over a fixed set of oracle sessions, so that several
//! workers can evaluate states concurrently without sharing a session.

use std::ops::{Deref, DerefMut};
use std::sync::{Condvar, Mutex};

pub struct SessionPool<O> {
    idle: Mutex<Vec<O>>,
    available: Condvar,
    size: usize,
}

impl<O> SessionPool<O> {
    /// Panics if `sessions` is empty.
    pub fn new(sessions: Vec<O>) -> Self {
        assert!(!sessions.is_empty(), "session pool needs at least one session");
        let size = sessions.len();
        SessionPool {
            idle: Mutex::new(sessions),
            available: Condvar::new(),
            size,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Blocks until a session is idle.
    pub fn lease(&self) -> Lease<'_, O> {
        let mut idle = self.idle.lock().unwrap_or_else(|e| e.into_inner());
        loop {
            if let Some(session) = idle.pop() {
                return Lease {
                    pool: self,
                    session: Some(session),
                };
            }
            idle = self.available.wait(idle).unwrap_or_else(|e| e.into_inner());
        }
    }

    pub fn into_sessions(self) -> Vec<O> {
        self.idle.into_inner().unwrap_or_else(|e| e.into_inner())
    }
}

pub struct Lease<'a, O> {
    pool: &'a SessionPool<O>,
    session: Option<O>,
}

impl<O> Deref for Lease<'_, O> {
    type Target = O;

    fn deref(&self) -> &O {
        self.session.as_ref().expect("lease holds a session until dropped")
    }
}

impl<O> DerefMut for Lease<'_, O> {
    fn deref_mut(&mut self) -> &mut O {
        self.session.as_mut().expect("lease holds a session until dropped")
    }
}

impl<O> Drop for Lease<'_, O> {
    fn drop(&mut self) {
        if let Some(session) = self.session.take() {
            let mut idle = self.pool.idle.lock().unwrap_or_else(|e| e.into_inner());
            idle.push(session);
            self.pool.available.notify_one();
        }
    }
}

/// Runs `task` for every index in `0..n` on up to `pool.size()` threads, each
/// holding its own lease. Results come back in index order.
pub fn map_with_pool<O, T, F>(pool: &SessionPool<O>, n: usize, task: F) -> Vec<T>
where
    O: Send,
    T: Send,
    F: Fn(&mut O, usize) -> T + Sync,
{
    use std::sync::atomic::{AtomicUsize, Ordering};

    let next = AtomicUsize::new(0);
    let workers = pool.size().min(n).max(1);
    let mut results: Vec<(usize, T)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut lease = pool.lease();
                    let mut out = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= n {
                            break;
                        }
                        out.push((i, task(&mut lease, i)));
                    }
                    out
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("pool worker panicked"))
            .collect()
    });
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().map(|(_, t)| t).collect()
}
