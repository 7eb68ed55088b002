//! Benchmark harness: kernel variant sweeps, evaluation-routine timings,
//! the encrypted polynomial matrix-multiplication application, and the
//! operational-density table.
//!
//! Every timed run is gated on a correctness check; a timing row is never
//! emitted for an incorrect result. Rows share one schema:
//! `command,variant,n,L,instances,threads,median_ns,speedup,alu_ops,mem_bytes,density,check`.
//! For `he-bench` rows the `variant` column carries the routine name, the
//! `speedup` column compares the optimized transform against the naive one,
//! and the `density` column reports the routine's NTT time share.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::ckks::{Ciphertext, CkksContext, CkksParams, KeySet};
use crate::error::{Error, Result};
use crate::ntt::{batch_forward_ntt, KernelProfile, NttTables, NttVariant};
use crate::perf::{operational_density, MachineParams};
use crate::pool::{BufferPool, PoolStats};

pub const CSV_HEADER: &str =
    "command,variant,n,L,instances,threads,median_ns,speedup,alu_ops,mem_bytes,density,check";

/// Output format for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Shared benchmark configuration (one subcommand's worth of knobs).
#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Transform degree; 0 selects the default sweep where applicable.
    pub n: usize,
    /// RNS size L.
    pub rns: usize,
    /// Batched instance count.
    pub instances: usize,
    /// Variant labels; empty selects the default set.
    pub variants: Vec<String>,
    /// Worker threads; 0 resolves HEKL_THREADS, then available parallelism.
    pub threads: usize,
    pub delta_bits: u32,
    pub reps: usize,
    pub warmup: usize,
    pub pool: bool,
    /// Emit memory-cache statistics in the report notes.
    pub pool_stats: bool,
    pub seed: u64,
    pub machine: Option<MachineParams>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n: 0,
            rns: 8,
            instances: 1,
            variants: Vec::new(),
            threads: 0,
            delta_bits: 40,
            reps: 5,
            warmup: 1,
            pool: true,
            pool_stats: false,
            seed: 1,
            machine: None,
        }
    }
}

impl BenchConfig {
    pub fn resolved_threads(&self) -> usize {
        if self.threads > 0 {
            return self.threads;
        }
        if let Ok(value) = std::env::var("HEKL_THREADS") {
            if let Ok(t) = value.parse::<usize>() {
                if t > 0 {
                    return t;
                }
            }
        }
        std::thread::available_parallelism().map_or(1, |p| p.get())
    }

    fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::param("repetitions must be >= 1"));
        }
        if self.instances < 1 {
            return Err(Error::param("instances must be >= 1"));
        }
        Ok(())
    }

    fn parse_variants(&self, n: usize, default: &[&str]) -> Result<Vec<NttVariant>> {
        let labels: Vec<String> = if self.variants.is_empty() {
            default.iter().map(|s| s.to_string()).collect()
        } else {
            self.variants.clone()
        };
        labels.iter().map(|l| parse_variant(l, n)).collect()
    }
}

/// Parse a variant label (`naive`, `staged2`, `radix4/8/16`), clamping the
/// default block gap to the degree.
pub fn parse_variant(label: &str, n: usize) -> Result<NttVariant> {
    match label {
        "naive" => Ok(NttVariant::Naive),
        "staged2" => Ok(NttVariant::staged2_for(n)),
        "radix4" => Ok(NttVariant::high_radix_for(4, n)),
        "radix8" => Ok(NttVariant::high_radix_for(8, n)),
        "radix16" => Ok(NttVariant::high_radix_for(16, n)),
        other => Err(Error::param(format!("unknown variant '{other}'"))),
    }
}

/// One report row in the fixed schema.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub command: String,
    pub variant: String,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub instances: usize,
    pub threads: usize,
    pub median_ns: u64,
    pub speedup: f64,
    pub alu_ops: u64,
    pub mem_bytes: u64,
    pub density: f64,
    pub check: bool,
}

impl BenchRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.4},{},{},{:.4},{}",
            self.command,
            self.variant,
            self.n,
            self.l,
            self.instances,
            self.threads,
            self.median_ns,
            self.speedup,
            self.alu_ops,
            self.mem_bytes,
            self.density,
            self.check
        )
    }
}

/// Result of one harness command.
#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Extra facts that do not fit the row schema (pool stats, verdicts).
    pub notes: Vec<String>,
}

impl BenchReport {
    pub fn all_checks_pass(&self) -> bool {
        self.rows.iter().all(|r| r.check)
    }

    pub fn write(&self, format: OutputFormat, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            OutputFormat::Csv => {
                writeln!(out, "{CSV_HEADER}")?;
                for row in &self.rows {
                    writeln!(out, "{}", row.csv_line())?;
                }
                for note in &self.notes {
                    writeln!(out, "# {note}")?;
                }
            }
            OutputFormat::Json => {
                let json = serde_json::to_string_pretty(self).expect("serializable");
                writeln!(out, "{json}")?;
            }
        }
        Ok(())
    }
}

fn median(samples: &mut [u64]) -> u64 {
    samples.sort_unstable();
    samples[samples.len() / 2]
}

// ---- ntt-bench ---------------------------------------------------------

/// Sweep kernel variants over batched transforms. Each timed variant is
/// checked bit-equal to the naive schedule on a sampled instance before its
/// row is emitted; `speedup` is naive median over variant median.
pub fn run_ntt_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let threads = cfg.resolved_threads();
    let sizes: Vec<usize> = if cfg.n > 0 {
        vec![cfg.n]
    } else {
        (12..=15).map(|lg| 1usize << lg).collect()
    };
    let mut rows = Vec::new();
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);

    for &n in &sizes {
        let variants = cfg.parse_variants(n, &["naive", "staged2", "radix8"])?;
        let primes = crate::rns::generate_primes(n, 55, cfg.rns)?;
        let tables: Vec<NttTables> = primes
            .iter()
            .map(|p| NttTables::build(n, p))
            .collect::<Result<_>>()?;
        let rows_total = cfg.instances * cfg.rns;
        let mut batch = Vec::with_capacity(rows_total * n);
        for r in 0..rows_total {
            let p = primes[r % cfg.rns].value();
            batch.extend((0..n).map(|_| rng.gen_range(0..p)));
        }

        // naive reference output of instance 0, plus the naive timing base
        let mut reference = batch.clone();
        batch_forward_ntt(&mut reference, &tables, NttVariant::Naive, threads)?;
        let reference_head = reference[..cfg.rns * n].to_vec();
        drop(reference);

        let mut work = vec![0u64; batch.len()];
        let mut timed = |variant: NttVariant| -> Result<(u64, KernelProfile, bool)> {
            for _ in 0..cfg.warmup {
                work.copy_from_slice(&batch);
                batch_forward_ntt(&mut work, &tables, variant, threads)?;
            }
            let mut samples = Vec::with_capacity(cfg.reps);
            for _ in 0..cfg.reps {
                work.copy_from_slice(&batch);
                let start = Instant::now();
                batch_forward_ntt(&mut work, &tables, variant, threads)?;
                samples.push(start.elapsed().as_nanos() as u64);
            }
            // correctness gate on a fresh run
            work.copy_from_slice(&batch);
            let profile = batch_forward_ntt(&mut work, &tables, variant, threads)?;
            let check = work[..cfg.rns * n] == reference_head[..];
            Ok((median(&mut samples), profile, check))
        };

        // the naive schedule is always timed first: it is both the speedup
        // base and the correctness reference
        let (naive_ns, naive_profile, naive_check) = timed(NttVariant::Naive)?;
        rows.push(bench_row_from_profile(
            cfg, "ntt-bench", NttVariant::Naive, n, threads, naive_ns, 1.0, &naive_profile,
            naive_check,
        ));
        for variant in variants {
            if variant == NttVariant::Naive {
                continue;
            }
            let (ns, profile, check) = timed(variant)?;
            let speedup = naive_ns as f64 / ns as f64;
            rows.push(bench_row_from_profile(
                cfg, "ntt-bench", variant, n, threads, ns, speedup, &profile, check,
            ));
        }
    }
    Ok(BenchReport { rows, notes: Vec::new() })
}

#[allow(clippy::too_many_arguments)]
fn bench_row_from_profile(
    cfg: &BenchConfig,
    command: &str,
    variant: NttVariant,
    n: usize,
    threads: usize,
    median_ns: u64,
    speedup: f64,
    profile: &KernelProfile,
    check: bool,
) -> BenchRow {
    // per-transform numbers: the profile aggregates instances * L rows
    let transforms = (cfg.instances * cfg.rns) as u64;
    let alu_ops = profile.alu_ops / transforms;
    let mem_bytes = profile.mem_bytes() / transforms;
    BenchRow {
        command: command.to_string(),
        variant: variant.label().to_string(),
        n,
        l: cfg.rns,
        instances: cfg.instances,
        threads,
        median_ns,
        speedup,
        alu_ops,
        mem_bytes,
        density: alu_ops as f64 / mem_bytes as f64,
        check,
    }
}

// ---- he-bench ----------------------------------------------------------

struct RoutineFixture {
    ctx: CkksContext,
    keys: KeySet,
    c1: Ciphertext,
    c2: Ciphertext,
    c3: Ciphertext,
    z1: Vec<Complex64>,
    z2: Vec<Complex64>,
    z3: Vec<Complex64>,
}

fn routine_fixture(cfg: &BenchConfig, variant: NttVariant) -> Result<RoutineFixture> {
    let n = if cfg.n > 0 { cfg.n } else { 1 << 15 };
    let params = CkksParams::default_chain(n, cfg.rns, cfg.delta_bits, cfg.seed)?;
    let pool = if cfg.pool { BufferPool::new() } else { BufferPool::disabled() };
    let mut ctx = CkksContext::with_pool(params, pool)?;
    ctx.set_variant(variant)?;
    let keys = ctx.keygen(&[1])?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let slots = ctx.params().slots();
    let sample = |rng: &mut ChaCha20Rng| -> Vec<Complex64> {
        (0..slots)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    };
    let (z1, z2, z3) = (sample(&mut rng), sample(&mut rng), sample(&mut rng));
    let c1 = ctx.encrypt(&ctx.encode(&z1)?, &keys.public)?;
    let c2 = ctx.encrypt(&ctx.encode(&z2)?, &keys.public)?;
    let delta = ctx.params().delta();
    let dropped = ctx.params().basis().prime(cfg.rns - 1).value() as f64;
    let product_scale = delta * delta / dropped;
    let c3 = ctx.encrypt(&ctx.encode_at(&z3, product_scale)?, &keys.public)?;
    Ok(RoutineFixture {
        ctx,
        keys,
        c1,
        c2,
        c3,
        z1,
        z2,
        z3,
    })
}

fn max_error(got: &[Complex64], want: &[Complex64]) -> f64 {
    got.iter()
        .zip(want)
        .map(|(g, w)| (g - w).norm())
        .fold(0.0, f64::max)
}

const ROUTINES: [&str; 5] = ["MulLin", "MulLinRS", "SqrLinRS", "MulLinRSModSwAdd", "Rotate"];

fn run_routine(fix: &RoutineFixture, name: &str) -> Result<Ciphertext> {
    let ctx = &fix.ctx;
    let evk = &fix.keys.evaluation;
    match name {
        "MulLin" => ctx.mul_lin(&fix.c1, &fix.c2, evk),
        "MulLinRS" => ctx.mul_lin_rs(&fix.c1, &fix.c2, evk),
        "SqrLinRS" => ctx.sqr_lin_rs(&fix.c1, evk),
        "MulLinRSModSwAdd" => ctx.mul_lin_rs_modsw_add(&fix.c1, &fix.c2, &fix.c3, evk),
        "Rotate" => ctx.rotate_routine(&fix.c1, 1, &fix.keys.galois),
        other => Err(Error::param(format!("unknown routine {other}"))),
    }
}

fn routine_reference(fix: &RoutineFixture, name: &str) -> Vec<Complex64> {
    let mul: Vec<Complex64> = fix.z1.iter().zip(&fix.z2).map(|(a, b)| a * b).collect();
    match name {
        "MulLin" | "MulLinRS" => mul,
        "SqrLinRS" => fix.z1.iter().map(|a| a * a).collect(),
        "MulLinRSModSwAdd" => mul.iter().zip(&fix.z3).map(|(p, c)| p + c).collect(),
        "Rotate" => {
            let slots = fix.z1.len();
            (0..slots).map(|j| fix.z1[(j + 1) % slots]).collect()
        }
        _ => unreachable!(),
    }
}

/// Benchmark the five evaluation routines. Each row reports the median
/// time under the optimized transform, the speedup over the same routine
/// running on the naive transform, and (in the density column) the share
/// of routine time spent inside transforms. Rows are gated on
/// decrypt-equivalence against the plaintext oracle.
pub fn run_he_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let threads = cfg.resolved_threads();
    let n = if cfg.n > 0 { cfg.n } else { 1 << 15 };
    let opt_label = cfg.variants.first().map(String::as_str).unwrap_or("radix8");
    let opt_variant = parse_variant(opt_label, n)?;

    let naive_fix = routine_fixture(cfg, NttVariant::Naive)?;
    let opt_fix = routine_fixture(cfg, opt_variant)?;
    let tolerance = 1e-3;

    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for name in ROUTINES {
        let time_it = |fix: &RoutineFixture| -> Result<(u64, f64)> {
            for _ in 0..cfg.warmup {
                run_routine(fix, name)?;
            }
            fix.ctx.enable_ntt_timing();
            let mut samples = Vec::with_capacity(cfg.reps);
            let total_start = Instant::now();
            for _ in 0..cfg.reps {
                let start = Instant::now();
                run_routine(fix, name)?;
                samples.push(start.elapsed().as_nanos() as u64);
            }
            let total = total_start.elapsed().as_nanos() as f64;
            let share = fix.ctx.ntt_nanos() as f64 / total;
            Ok((median(&mut samples), share))
        };
        let (naive_ns, _) = time_it(&naive_fix)?;
        let (opt_ns, ntt_share) = time_it(&opt_fix)?;

        let out = run_routine(&opt_fix, name)?;
        let decrypted = opt_fix.ctx.decrypt(&out, &opt_fix.keys.secret)?;
        let decoded = opt_fix.ctx.decode(&decrypted)?;
        let err = max_error(&decoded, &routine_reference(&opt_fix, name));
        let check = err <= tolerance;
        notes.push(format!(
            "he-bench {name}: max slot error {err:.2e} (tolerance {tolerance:.0e}), ntt share {:.1}%",
            100.0 * ntt_share
        ));
        rows.push(BenchRow {
            command: "he-bench".to_string(),
            variant: name.to_string(),
            n,
            l: cfg.rns,
            instances: cfg.instances,
            threads,
            median_ns: opt_ns,
            speedup: naive_ns as f64 / opt_ns as f64,
            alu_ops: 0,
            mem_bytes: 0,
            density: ntt_share,
            check,
        });
    }
    if cfg.pool_stats {
        let stats = opt_fix.ctx.pool().stats();
        notes.push(format!(
            "pool: {} allocations, {} reuses, {} releases",
            stats.allocations, stats.reuses, stats.releases
        ));
    }
    Ok(BenchReport { rows, notes })
}

// ---- matmul ------------------------------------------------------------

/// Shape of an encrypted polynomial matrix multiplication `C += A * B`:
/// `C` is `m x n`, `A` is `m x k`, `B` is `k x n`; every element is a
/// degree-`poly_degree` polynomial.
#[derive(Debug, Clone, Copy)]
pub struct MatmulSpec {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub poly_degree: usize,
}

impl MatmulSpec {
    pub fn label(&self) -> String {
        format!("{}x{}x{}", self.m, self.n, self.k)
    }
}

/// Outcome of one full matmul pipeline run.
#[derive(Debug, Clone, Serialize)]
pub struct MatmulRun {
    pub elapsed_ns: u64,
    pub max_error: f64,
    pub pass: bool,
}

/// Reusable encrypted-matmul pipeline: context, keys, and input slot
/// matrices survive across runs so pooled buffers can be recycled.
pub struct MatmulHarness {
    spec: MatmulSpec,
    ctx: CkksContext,
    keys: KeySet,
    a_slots: Vec<Vec<Complex64>>,
    b_slots: Vec<Vec<Complex64>>,
    c_slots: Vec<Vec<Complex64>>,
    tolerance: f64,
}

impl MatmulHarness {
    pub fn new(spec: MatmulSpec, cfg: &BenchConfig) -> Result<MatmulHarness> {
        if spec.m < 1 || spec.n < 1 || spec.k < 1 {
            return Err(Error::param("matrix dimensions must be >= 1"));
        }
        // one multiplicative depth without rescaling needs two levels
        let levels = cfg.rns.max(2);
        let params = CkksParams::default_chain(spec.poly_degree, levels, cfg.delta_bits, cfg.seed)?;
        let pool = if cfg.pool { BufferPool::new() } else { BufferPool::disabled() };
        let ctx = CkksContext::with_pool(params, pool)?;
        let keys = ctx.keygen(&[])?;
        let slots = ctx.params().slots();
        let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0xabcd);
        let mut matrix = |rows: usize, cols: usize| -> Vec<Vec<Complex64>> {
            (0..rows * cols)
                .map(|_| {
                    (0..slots)
                        .map(|_| {
                            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                        })
                        .collect()
                })
                .collect()
        };
        let a_slots = matrix(spec.m, spec.k);
        let b_slots = matrix(spec.k, spec.n);
        let c_slots = matrix(spec.m, spec.n);
        Ok(MatmulHarness {
            spec,
            ctx,
            keys,
            a_slots,
            b_slots,
            c_slots,
            tolerance: 1e-2,
        })
    }

    pub fn pool_stats(&self) -> PoolStats {
        self.ctx.pool().stats()
    }

    pub fn context(&self) -> &CkksContext {
        &self.ctx
    }

    /// Run the whole pipeline once (encode, encrypt, C += A*B with
    /// relinearized ciphertext products, decrypt, verify) and report the
    /// end-to-end elapsed time.
    pub fn run_once(&self, threads: usize) -> Result<MatmulRun> {
        use rayon::prelude::*;
        let spec = self.spec;
        let ctx = &self.ctx;
        let delta = ctx.params().delta();
        let product_scale = delta * delta;

        let start = Instant::now();
        let encrypt_all = |slots: &[Vec<Complex64>], scale: f64| -> Result<Vec<Ciphertext>> {
            slots
                .iter()
                .map(|z| ctx.encrypt(&ctx.encode_at(z, scale)?, &self.keys.public))
                .collect()
        };
        let a = encrypt_all(&self.a_slots, delta)?;
        let b = encrypt_all(&self.b_slots, delta)?;
        let c0 = encrypt_all(&self.c_slots, product_scale)?;

        let cell = |i: usize, j: usize| -> Result<Ciphertext> {
            let mut acc = c0[i * spec.n + j].clone();
            for t in 0..spec.k {
                let product =
                    ctx.mul_lin(&a[i * spec.k + t], &b[t * spec.n + j], &self.keys.evaluation)?;
                acc = ctx.add(&acc, &product)?;
            }
            Ok(acc)
        };
        let cells: Vec<(usize, usize)> = (0..spec.m)
            .flat_map(|i| (0..spec.n).map(move |j| (i, j)))
            .collect();
        let c: Vec<Ciphertext> = if threads > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::param(format!("thread pool: {e}")))?;
            pool.install(|| {
                cells
                    .par_iter()
                    .map(|&(i, j)| cell(i, j))
                    .collect::<Result<Vec<_>>>()
            })?
        } else {
            cells
                .iter()
                .map(|&(i, j)| cell(i, j))
                .collect::<Result<Vec<_>>>()?
        };

        let mut worst = 0.0f64;
        for (idx, ct) in c.iter().enumerate() {
            let decoded = ctx.decode(&ctx.decrypt(ct, &self.keys.secret)?)?;
            let (i, j) = (idx / spec.n, idx % spec.n);
            let slots = decoded.len();
            let mut expect = self.c_slots[i * spec.n + j].clone();
            for t in 0..spec.k {
                let za = &self.a_slots[i * spec.k + t];
                let zb = &self.b_slots[t * spec.n + j];
                for s in 0..slots {
                    expect[s] += za[s] * zb[s];
                }
            }
            worst = worst.max(max_error(&decoded, &expect));
        }
        let elapsed_ns = start.elapsed().as_nanos() as u64;
        Ok(MatmulRun {
            elapsed_ns,
            max_error: worst,
            pass: worst <= self.tolerance,
        })
    }
}

/// Run the encrypted matmul benchmark: `reps` full pipelines after warmup,
/// verified against the plaintext matrix-of-polynomials oracle.
pub fn run_matmul(cfg: &BenchConfig, spec: MatmulSpec) -> Result<BenchReport> {
    cfg.validate()?;
    let threads = cfg.resolved_threads();
    let harness = MatmulHarness::new(spec, cfg)?;
    for _ in 0..cfg.warmup {
        harness.run_once(threads)?;
    }
    let warm_stats = harness.pool_stats();
    let mut samples = Vec::with_capacity(cfg.reps);
    let mut pass = true;
    let mut worst = 0.0f64;
    for _ in 0..cfg.reps {
        let run = harness.run_once(threads)?;
        samples.push(run.elapsed_ns);
        pass &= run.pass;
        worst = worst.max(run.max_error);
    }
    let final_stats = harness.pool_stats();
    let row = BenchRow {
        command: "matmul".to_string(),
        variant: spec.label(),
        n: spec.poly_degree,
        l: harness.context().params().levels(),
        instances: cfg.instances,
        threads,
        median_ns: median(&mut samples),
        speedup: 1.0,
        alu_ops: 0,
        mem_bytes: 0,
        density: 0.0,
        check: pass,
    };
    let notes = vec![
        format!("matmul {}: max slot error {worst:.2e} (tolerance 1e-2)", spec.label()),
        format!(
            "pool: {} allocations, {} reuses, {} releases ({} new allocations across {} timed runs)",
            final_stats.allocations,
            final_stats.reuses,
            final_stats.releases,
            final_stats.allocations - warm_stats.allocations,
            cfg.reps
        ),
    ];
    Ok(BenchReport {
        rows: vec![row],
        notes,
    })
}

// ---- density -----------------------------------------------------------

/// Emit the analytic density table for the selected variants and sizes.
/// Requires machine parameters for the roofline classification.
pub fn run_density(cfg: &BenchConfig) -> Result<BenchReport> {
    let machine = cfg
        .machine
        .as_ref()
        .ok_or_else(|| Error::param("density requires --peak-gops and --bandwidth-gbs"))?;
    let sizes: Vec<usize> = if cfg.n > 0 {
        vec![cfg.n]
    } else {
        (10..=15).map(|lg| 1usize << lg).collect()
    };
    let threads = cfg.resolved_threads();
    let mut rows = Vec::new();
    for &n in &sizes {
        for variant in cfg.parse_variants(n, &["naive", "staged2", "radix4", "radix8", "radix16"])? {
            let report = operational_density(variant, n, Some(machine))?;
            rows.push(BenchRow {
                command: "density".to_string(),
                variant: report.variant.clone(),
                n,
                l: cfg.rns,
                instances: cfg.instances,
                threads,
                median_ns: 0,
                speedup: 1.0,
                alu_ops: report.total_alu_ops,
                mem_bytes: report.total_mem_bytes,
                density: report.density,
                check: true,
            });
        }
    }
    let notes = vec![format!(
        "machine knee at {:.3} ops/byte (peak {:.3e} ops/s over {:.3e} bytes/s)",
        machine.knee(),
        machine.peak_int64_ops_per_s,
        machine.mem_bandwidth_bytes_per_s
    )];
    Ok(BenchReport { rows, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cfg() -> BenchConfig {
        BenchConfig {
            n: 256,
            rns: 2,
            instances: 2,
            reps: 2,
            warmup: 1,
            threads: 1,
            delta_bits: 40,
            seed: 3,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn ntt_bench_produces_gated_rows() {
        let cfg = quick_cfg();
        let report = run_ntt_bench(&cfg).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(report.all_checks_pass());
        let naive = &report.rows[0];
        assert_eq!(naive.variant, "naive");
        assert_eq!(naive.speedup, 1.0);
        assert!((naive.density - 1.5).abs() < 1e-12);
        let mut csv = Vec::new();
        report.write(OutputFormat::Csv, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        assert!(text.lines().count() >= 4);
    }

    #[test]
    fn he_bench_runs_all_five_routines() {
        let cfg = BenchConfig {
            n: 512,
            rns: 3,
            reps: 1,
            warmup: 0,
            threads: 1,
            seed: 5,
            ..BenchConfig::default()
        };
        let report = run_he_bench(&cfg).unwrap();
        let names: Vec<&str> = report.rows.iter().map(|r| r.variant.as_str()).collect();
        assert_eq!(names, ROUTINES.to_vec());
        assert!(report.all_checks_pass(), "{:?}", report.notes);
        for row in &report.rows {
            assert!(row.density > 0.0 && row.density < 1.0, "ntt share {}", row.density);
        }
    }

    #[test]
    fn matmul_identity_and_small_random() {
        // 1x1x1 with unit plaintexts decrypts to the plain product
        let mut cfg = quick_cfg();
        cfg.rns = 2;
        let spec = MatmulSpec { m: 1, n: 1, k: 1, poly_degree: 64 };
        let harness = MatmulHarness::new(spec, &cfg).unwrap();
        let run = harness.run_once(1).unwrap();
        assert!(run.pass, "error {}", run.max_error);

        let spec = MatmulSpec { m: 2, n: 3, k: 2, poly_degree: 64 };
        let report = run_matmul(&cfg, spec).unwrap();
        assert!(report.all_checks_pass(), "{:?}", report.notes);
        assert_eq!(report.rows[0].variant, "2x3x2");
    }

    #[test]
    fn matmul_steady_state_pool() {
        let cfg = BenchConfig {
            rns: 2,
            reps: 5,
            warmup: 1,
            threads: 1,
            seed: 9,
            ..BenchConfig::default()
        };
        let spec = MatmulSpec { m: 2, n: 2, k: 2, poly_degree: 64 };
        let harness = MatmulHarness::new(spec, &cfg).unwrap();
        harness.run_once(1).unwrap();
        let warm = harness.pool_stats().allocations;
        for _ in 0..5 {
            harness.run_once(1).unwrap();
        }
        assert_eq!(harness.pool_stats().allocations, warm);
    }

    #[test]
    fn density_requires_machine_params() {
        let cfg = quick_cfg();
        assert!(run_density(&cfg).is_err());
        let cfg = BenchConfig {
            machine: Some(MachineParams {
                peak_int64_ops_per_s: 1e12,
                mem_bandwidth_bytes_per_s: 1e11,
            }),
            ..quick_cfg()
        };
        let report = run_density(&cfg).unwrap();
        assert!(report.all_checks_pass());
        // json mode carries the same values
        let mut json = Vec::new();
        report.write(OutputFormat::Json, &mut json).unwrap();
        let parsed: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(
            parsed["rows"].as_array().unwrap().len(),
            report.rows.len()
        );
    }
}
