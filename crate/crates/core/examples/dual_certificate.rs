// Build the dual certificate of a run and check every inequality on it.
//
// `cargo run --example dual_certificate`

use std::error::Error;

use rejsched::analysis::{build_certificate, objectives, run_checks};
use rejsched::engine::simulate;
use rejsched::instance::{generate, WorkloadSpec};
use rejsched::rational::q;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let inst = generate(&WorkloadSpec {
        n: 25,
        m: 2,
        p_min: 1,
        p_max: 9,
        w_min: 1,
        w_max: 9,
        mean_interarrival: 1,
        seed: 7,
        epsilon: q(1, 2),
    })?;
    let out = simulate(&inst);
    let cert = build_certificate(&out);

    for (i, beta) in cert.beta.iter().enumerate() {
        println!("beta on machine {i}: {} knots, integral {}", beta.knots().len(), beta.integral());
    }
    let obj = objectives(&cert, &out);
    println!("sum alpha {} - integral beta {} = dual {}", obj.alpha_sum, obj.beta_integral, obj.dual_obj);
    println!("sum w(C~ - r) {} | algorithm cost {}", obj.sum_w_ctilde, obj.alg_weighted_flow);

    let checks = run_checks(&out, &cert);
    for c in &checks {
        println!("{:<30} {} margin {} over {} points", c.name, if c.pass { "ok  " } else { "FAIL" }, c.margin, c.points);
    }
    assert!(checks.iter().all(|c| c.pass));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
