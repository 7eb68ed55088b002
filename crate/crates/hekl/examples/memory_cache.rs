//! The reusable-buffer memory cache in action: a fixed evaluation loop
//! allocates only during its first iteration, and a disabled cache shows
//! what that saves.

use hekl::bench::{BenchConfig, MatmulHarness, MatmulSpec};
use hekl::pool::BufferPool;

fn main() -> hekl::Result<()> {
    // direct pool usage
    let pool = BufferPool::new();
    let a = pool.acquire(1024);
    drop(a);
    let b = pool.acquire(512); // reuses the 1024-word buffer (best fit)
    println!(
        "after acquire(1024) -> release -> acquire(512): capacity {}, stats {:?}",
        b.capacity(),
        pool.stats()
    );
    drop(b);

    // steady state across a whole encrypted pipeline
    let spec = MatmulSpec { m: 2, n: 2, k: 2, poly_degree: 1024 };
    for enabled in [true, false] {
        let cfg = BenchConfig {
            rns: 2,
            seed: 3,
            pool: enabled,
            ..BenchConfig::default()
        };
        let harness = MatmulHarness::new(spec, &cfg)?;
        harness.run_once(1)?; // warmup populates the cache
        let warm = harness.pool_stats().allocations;
        for _ in 0..10 {
            harness.run_once(1)?;
        }
        let stats = harness.pool_stats();
        println!(
            "cache {}: {} allocations after warmup, {} new across 10 iterations, {} reuses",
            if enabled { "enabled " } else { "disabled" },
            warm,
            stats.allocations - warm,
            stats.reuses,
        );
    }
    Ok(())
}
