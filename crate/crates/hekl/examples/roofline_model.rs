//! Operational-density table: predicted ALU-per-byte ratios for each kernel
//! variant, classified against a machine envelope, and cross-checked
//! against counters measured from a real transform.

use hekl::ntt::{all_variants, KernelProfile, NttTables};
use hekl::perf::{classify, operational_density, MachineParams};
use hekl::rns::generate_primes;

fn main() -> hekl::Result<()> {
    // an illustrative desktop envelope: 200 Gops/s int64, 40 GB/s DRAM
    let machine = MachineParams {
        peak_int64_ops_per_s: 200e9,
        mem_bandwidth_bytes_per_s: 40e9,
    };
    println!("machine knee: {:.2} ops/byte", machine.knee());
    println!(
        "{:<10} {:>7} {:>14} {:>14} {:>9} {:>9}",
        "variant", "n", "alu ops", "mem bytes", "density", "bound"
    );

    let n = 1 << 15;
    let prime = generate_primes(n, 55, 1)?[0];
    let tables = NttTables::build(n, &prime)?;
    for variant in all_variants(n) {
        let model = operational_density(variant, n, Some(&machine))?;
        println!(
            "{:<10} {:>7} {:>14} {:>14} {:>9.2} {:>9}",
            model.variant,
            model.n,
            model.total_alu_ops,
            model.total_mem_bytes,
            model.density,
            match model.bound {
                Some(hekl::perf::Bound::Compute) => "compute",
                Some(hekl::perf::Bound::Memory) => "memory",
                None => "-",
            }
        );

        // measured counters agree with the analytic model exactly
        let mut poly = vec![0u64; n];
        let mut profile = KernelProfile::default();
        tables.forward(&mut poly, variant, &mut profile)?;
        let measured = classify(&profile, n, variant, &machine)?;
        assert_eq!(measured.total_alu_ops, model.total_alu_ops);
        assert_eq!(measured.total_mem_bytes, model.total_mem_bytes);
    }
    println!("measured kernel counters match the model for every variant");
    Ok(())
}
