// Generate a reproducible synthetic workload and write it as JSON Lines.
//
// `cargo run --example generate_workload`

use std::error::Error;

use rejsched::instance::{generate, parse_instance, WorkloadSpec};
use rejsched::rational::q;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let spec = WorkloadSpec {
        n: 8,
        m: 3,
        p_min: 1,
        p_max: 10,
        w_min: 1,
        w_max: 5,
        mean_interarrival: 2,
        seed: 42,
        epsilon: q(1, 4),
    };
    let inst = generate(&spec)?;
    let text = inst.to_jsonl();
    print!("{text}");

    // same seed, same bytes; and the text parses back to the same instance
    assert_eq!(generate(&spec)?.to_jsonl(), text);
    assert_eq!(parse_instance(&text)?, inst);
    println!("{} jobs, total weight {}", inst.len(), inst.total_weight());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
