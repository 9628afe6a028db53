// Measure the competitive ratio on tiny instances against the exhaustive
// optimum, next to the proven bound.
//
// `cargo run --release --example oracle_ratio`

use std::error::Error;

use rejsched::engine::simulate;
use rejsched::instance::{generate, parse_instance, WorkloadSpec};
use rejsched::oracle::{brute_force_opt, DEFAULT_LIMIT};
use rejsched::rational::q;
use rejsched::report::theorem_bound;
use rejsched::Rational;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // waiting for the dense job beats starting the long one: 112 vs 1010
    let idling = parse_instance(
        "{\"machines\":1,\"epsilon\":\"1/2\"}\n\
         {\"id\":1,\"r\":0,\"w\":1,\"p\":{\"m0\":10}}\n\
         {\"id\":2,\"r\":1,\"w\":100,\"p\":{\"m0\":1}}\n",
    )?;
    let opt = brute_force_opt(&idling, DEFAULT_LIMIT)?;
    println!("idling example: opt {} with order {:?}", opt.cost, opt.machines);
    assert_eq!(opt.cost, q(112, 1));

    let eps = q(1, 2);
    let bound = theorem_bound(&eps);
    let mut worst = Rational::zero();
    for seed in 0..20 {
        let inst = generate(&WorkloadSpec {
            n: 6,
            m: 2,
            p_min: 1,
            p_max: 8,
            w_min: 1,
            w_max: 8,
            mean_interarrival: 1,
            seed,
            epsilon: eps.clone(),
        })?;
        let alg = simulate(&inst).totals.alg_weighted_flow;
        let opt = brute_force_opt(&inst, DEFAULT_LIMIT)?.cost;
        let ratio = &alg / &opt;
        println!("seed {seed:>2}: alg {alg:>4} opt {opt:>4} ratio {:.3}", ratio.approx());
        worst = worst.max(ratio);
    }
    println!("worst ratio {:.3}, bound {bound}", worst.approx());
    assert!(worst <= bound);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
