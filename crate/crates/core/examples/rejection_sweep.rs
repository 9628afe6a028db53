// Sweep epsilon and report the largest rejected-weight fractions next to
// their limits (eps for preemption, 4 eps for the weight gap).
//
// `cargo run --release --example rejection_sweep`

use std::error::Error;

use rejsched::cli::sweep;
use rejsched::instance::WorkloadSpec;
use rejsched::rational::q;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let base = WorkloadSpec {
        n: 30,
        m: 3,
        p_min: 1,
        p_max: 10,
        w_min: 1,
        w_max: 10,
        mean_interarrival: 1,
        seed: 1000,
        epsilon: q(1, 2),
    };
    let specs: Vec<WorkloadSpec> = [q(1, 8), q(1, 4), q(1, 2), q(3, 4)]
        .into_iter()
        .map(|epsilon| WorkloadSpec { epsilon, ..base.clone() })
        .collect();
    let report = sweep(&specs, 20, None);

    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "eps", "preempt", "limit", "gap", "limit");
    for row in &report.rows {
        let eps = &row.epsilon.0;
        let pre = &row.max_rejected_preempt_fraction.0;
        let gap = &row.max_rejected_weight_gap_fraction.0;
        println!(
            "{:>6} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            eps.to_string(),
            pre.approx(),
            eps.approx(),
            gap.approx(),
            4.0 * eps.approx()
        );
        assert!(pre <= eps);
        assert_eq!(row.all_pass, row.count);
    }
    assert!(report.all_pass);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
