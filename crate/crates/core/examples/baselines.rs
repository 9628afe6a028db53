// Compare the rejection algorithm with HDF and FCFS run without rejection.
//
// `cargo run --example baselines`

use std::error::Error;

use rejsched::engine::simulate;
use rejsched::instance::{generate, WorkloadSpec};
use rejsched::oracle::{baseline, lower_bound_trivial, Baseline};
use rejsched::rational::q;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let inst = generate(&WorkloadSpec {
        n: 40,
        m: 2,
        p_min: 1,
        p_max: 20,
        w_min: 1,
        w_max: 10,
        mean_interarrival: 3,
        seed: 11,
        epsilon: q(1, 4),
    })?;
    let lower = lower_bound_trivial(&inst);
    let ours = simulate(&inst).totals;
    println!(
        "rejection: flow {:.1} ({} of {} jobs done, {:.1} weight dropped)",
        ours.alg_weighted_flow.approx(),
        ours.completed,
        ours.jobs,
        (&ours.rejected_preempt_weight + &ours.rejected_weight_gap_weight).approx()
    );
    for b in Baseline::ALL {
        let t = baseline(&inst, b).totals;
        println!("{:<14} flow {:.1}", b.name(), t.alg_weighted_flow.approx());
        // baselines reject nothing, so they pay at least the trivial bound
        assert_eq!(t.completed, t.jobs);
        assert!(t.alg_weighted_flow >= lower);
    }
    println!("lower bound sum w*min p = {lower}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
