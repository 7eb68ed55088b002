//! Reusable-buffer memory cache.
//!
//! Polynomial buffers dominate the allocation traffic of the evaluation
//! pipeline. Requests are routed through a [`BufferPool`]: an acquire is
//! served by the smallest free buffer whose capacity covers the request
//! (best fit), and a released buffer returns to the free list for reuse.
//! In steady state a fixed evaluation loop performs zero new allocations.

use std::collections::BTreeMap;
use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

/// Counters describing pool behaviour since construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct PoolStats {
    /// Number of acquisitions that had to allocate fresh memory.
    pub allocations: u64,
    /// Number of acquisitions served from the free list.
    pub reuses: u64,
    /// Number of buffers returned to the pool.
    pub releases: u64,
}

#[derive(Debug, Default)]
struct PoolInner {
    // capacity -> buffers of exactly that capacity, FIFO within a class
    free: Mutex<BTreeMap<usize, VecDeque<Vec<u64>>>>,
    allocations: AtomicU64,
    reuses: AtomicU64,
    releases: AtomicU64,
    enabled: bool,
}

/// Shared handle to a reusable-buffer cache. Cloning is cheap and all clones
/// refer to the same pool; acquire/release are safe from multiple threads.
#[derive(Debug, Clone)]
pub struct BufferPool {
    inner: Arc<PoolInner>,
}

impl Default for BufferPool {
    fn default() -> Self {
        Self::new()
    }
}

impl BufferPool {
    /// A pool that caches released buffers for reuse.
    pub fn new() -> Self {
        BufferPool {
            inner: Arc::new(PoolInner {
                enabled: true,
                ..PoolInner::default()
            }),
        }
    }

    /// A pass-through pool: every acquire allocates, every release frees.
    /// Useful for measuring what the cache saves.
    pub fn disabled() -> Self {
        BufferPool {
            inner: Arc::new(PoolInner {
                enabled: false,
                ..PoolInner::default()
            }),
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.inner.enabled
    }

    /// Acquire a buffer holding at least `size` elements.
    ///
    /// Picks the smallest free buffer with `capacity >= size`; if none
    /// exists a new buffer of exactly `size` is allocated. Contents are
    /// whatever the previous user left behind; callers overwrite.
    pub fn acquire(&self, size: usize) -> PooledBuffer {
        assert!(size > 0, "zero-size buffer request");
        if self.inner.enabled {
            let mut free = self.inner.free.lock().unwrap();
            // best fit: first capacity class >= size
            let found = free.range_mut(size..).next().map(|(&cap, _)| cap);
            if let Some(cap) = found {
                let class = free.get_mut(&cap).unwrap();
                let mut data = class.pop_front().unwrap();
                if class.is_empty() {
                    free.remove(&cap);
                }
                drop(free);
                self.inner.reuses.fetch_add(1, Ordering::Relaxed);
                data.resize(size, 0);
                return PooledBuffer {
                    data,
                    capacity: cap,
                    pool: Some(Arc::clone(&self.inner)),
                };
            }
        }
        self.inner.allocations.fetch_add(1, Ordering::Relaxed);
        PooledBuffer {
            data: vec![0u64; size],
            capacity: size,
            pool: if self.inner.enabled {
                Some(Arc::clone(&self.inner))
            } else {
                None
            },
        }
    }

    pub fn stats(&self) -> PoolStats {
        PoolStats {
            allocations: self.inner.allocations.load(Ordering::Relaxed),
            reuses: self.inner.reuses.load(Ordering::Relaxed),
            releases: self.inner.releases.load(Ordering::Relaxed),
        }
    }

    /// Number of buffers currently sitting in the free list.
    pub fn free_buffers(&self) -> usize {
        self.inner.free.lock().unwrap().values().map(VecDeque::len).sum()
    }
}

/// A buffer lent out by a [`BufferPool`]. Dropping it returns the memory to
/// its pool; a buffer can only ever return to the pool it came from.
#[derive(Debug)]
pub struct PooledBuffer {
    data: Vec<u64>,
    capacity: usize,
    pool: Option<Arc<PoolInner>>,
}

impl PooledBuffer {
    /// A plain heap buffer not attached to any pool.
    pub fn unpooled(data: Vec<u64>) -> Self {
        let capacity = data.len();
        PooledBuffer {
            data,
            capacity,
            pool: None,
        }
    }

    /// Element capacity of the underlying allocation.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Explicitly return the buffer to its pool (equivalent to dropping it).
    pub fn release(self) {}
}

impl std::ops::Deref for PooledBuffer {
    type Target = [u64];
    fn deref(&self) -> &[u64] {
        &self.data
    }
}

impl std::ops::DerefMut for PooledBuffer {
    fn deref_mut(&mut self) -> &mut [u64] {
        &mut self.data
    }
}

impl Clone for PooledBuffer {
    // Clones are unpooled: the copy did not come out of the pool, so it
    // must not be counted as a release when dropped.
    fn clone(&self) -> Self {
        PooledBuffer::unpooled(self.data.clone())
    }
}

impl Drop for PooledBuffer {
    fn drop(&mut self) {
        if let Some(pool) = self.pool.take() {
            let mut data = std::mem::take(&mut self.data);
            // restore full capacity footprint for the free-list keying
            data.resize(self.capacity, 0);
            pool.free
                .lock()
                .unwrap()
                .entry(self.capacity)
                .or_default()
                .push_back(data);
            pool.releases.fetch_add(1, Ordering::Relaxed);
        }
    }
}
