// Simulate a three-job instance and print what happened to each job.
//
// `cargo run --example quickstart`

use std::error::Error;

use rejsched::engine::simulate;
use rejsched::instance::parse_instance;

const INSTANCE: &str = r#"{"machines":1,"epsilon":"1/2"}
{"id":1,"r":0,"w":2,"p":{"m0":4}}
{"id":2,"r":1,"w":2,"p":{"m0":1}}
{"id":3,"r":2,"w":2,"p":{"m0":1}}
"#;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let inst = parse_instance(INSTANCE)?;
    let out = simulate(&inst);

    for job in &out.jobs {
        println!(
            "job {}: machine {} fate {:?} start {:?} completion {:?} C~ {}",
            job.id, job.machine, job.fate, job.start, job.completion, job.ctilde
        );
    }
    let t = &out.totals;
    println!(
        "weighted flow {} | rejected by preemption {} | by weight gap {} | of {}",
        t.alg_weighted_flow, t.rejected_preempt_weight, t.rejected_weight_gap_weight, t.total_weight
    );
    print!("{}", out.events_jsonl());

    // job 1 is dropped once the weight arriving during its run reaches w/eps = 4
    assert_eq!(out.preemptions.len(), 1);
    assert_eq!(out.totals.completed, 1);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
