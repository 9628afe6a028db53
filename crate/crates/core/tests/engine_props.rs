use proptest::prelude::*;

use rejsched::analysis::{build_certificate, check_dual_feasibility, definitive_completion, run_checks};
use rejsched::engine::{simulate, EventKind, Fate};
use rejsched::instance::{generate, Instance, WorkloadSpec};
use rejsched::oracle::{baseline, brute_force_opt, lower_bound_trivial, Baseline};
use rejsched::rational::q;
use rejsched::Rational;

fn workload(n: usize, m: usize, seed: u64, eps_den: i64) -> Instance {
    generate(&WorkloadSpec {
        n,
        m,
        p_min: 1,
        p_max: 8,
        w_min: 1,
        w_max: 8,
        mean_interarrival: 2,
        seed,
        epsilon: q(1, eps_den),
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deterministic_and_pure(n in 0usize..25, m in 1usize..4, seed: u64, den in 2i64..6) {
        let inst = workload(n, m, seed, den);
        let before = inst.clone();
        let a = simulate(&inst);
        let b = simulate(&inst);
        prop_assert_eq!(&inst, &before);
        prop_assert_eq!(a.events_jsonl(), b.events_jsonl());
        prop_assert_eq!(build_certificate(&a).to_json(), build_certificate(&b).to_json());
    }

    #[test]
    fn every_job_has_one_fate(n in 0usize..25, m in 1usize..4, seed: u64, den in 2i64..6) {
        let out = simulate(&workload(n, m, seed, den));
        for job in &out.jobs {
            let ends = out.events.iter().filter(|e| match &e.kind {
                EventKind::Complete { job: j, .. } | EventKind::RejectPreempt { job: j, .. } => *j == job.id,
                EventKind::RejectWeightGap { jobs, .. } => jobs.contains(&job.id),
                _ => false,
            }).count();
            prop_assert_eq!(ends, 1, "job {}", job.id);
            match job.fate {
                Fate::Completed => prop_assert!(job.completion.is_some()),
                Fate::RejectedPreempt => prop_assert!(job.start.is_some() && job.completion.is_none()),
                Fate::RejectedWeightGap => prop_assert!(job.start.is_none() && job.completion.is_none()),
            }
        }
        let done = out.jobs.iter().filter(|j| j.fate == Fate::Completed).count();
        prop_assert_eq!(done, out.totals.completed);
    }

    #[test]
    fn non_preemptive_and_exclusive(n in 0usize..25, m in 1usize..4, seed: u64, den in 2i64..6) {
        let out = simulate(&workload(n, m, seed, den));
        let mut busy: Vec<Vec<(Rational, Rational)>> = vec![Vec::new(); m];
        for job in &out.jobs {
            let Some(start) = &job.start else { continue };
            prop_assert!(*start >= job.release);
            let end = match &job.completion {
                Some(c) => {
                    // a started job that completes ran for exactly p without a break
                    prop_assert_eq!(c - start, job.proc.clone());
                    c.clone()
                }
                None => job.removal.clone(),
            };
            busy[job.machine].push((start.clone(), end));
        }
        for intervals in &mut busy {
            intervals.sort();
            for w in intervals.windows(2) {
                prop_assert!(w[0].1 <= w[1].0, "overlap {:?}", w);
            }
        }
    }

    #[test]
    fn ctilde_not_before_removal(n in 0usize..25, m in 1usize..4, seed: u64) {
        let out = simulate(&workload(n, m, seed, 2));
        for job in &out.jobs {
            let c = definitive_completion(&out, job.id).unwrap();
            prop_assert_eq!(&c, &job.ctilde);
            prop_assert!(c >= job.removal);
            prop_assert!(c > job.release);
        }
    }

    #[test]
    fn oracle_sandwich(n in 0usize..6, seed: u64) {
        let inst = workload(n, 2, seed, 2);
        let opt = brute_force_opt(&inst, 7).unwrap();
        prop_assert!(opt.cost >= lower_bound_trivial(&inst));
        for b in Baseline::ALL {
            prop_assert!(opt.cost <= baseline(&inst, b).totals.alg_weighted_flow);
        }
        prop_assert_eq!(brute_force_opt(&inst, 7).unwrap(), opt);
    }
}

#[test]
fn corrupted_certificate_is_caught() {
    let out = simulate(&workload(12, 2, 3, 2));
    let mut cert = build_certificate(&out);
    assert!(run_checks(&out, &cert).iter().all(|c| c.pass));
    let victim = out.jobs[5].id;
    *cert.alpha.get_mut(&victim).unwrap() += q(10_000, 1);
    let report = check_dual_feasibility(&cert, &out);
    assert!(!report.pass);
    assert_eq!(report.witness.unwrap().job, Some(victim));
}
