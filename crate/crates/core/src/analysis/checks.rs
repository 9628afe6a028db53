use std::collections::{BTreeMap, BTreeSet};

use super::certificate::{beta_scale, build_certificate, objectives, DualCertificate};
use super::{at, frac_weight, CheckReport, Tracker, Witness};
use crate::engine::{replay_prefix, Fate, JobOutcome, SimOutcome};
use crate::instance::{Instance, MachineId};
use crate::rational::Rational;

fn on_machine(outcome: &SimOutcome, i: MachineId) -> Vec<&JobOutcome> {
    outcome.jobs.iter().filter(|j| j.machine == i).collect()
}

/// Rejected weight per cause against `ε Σw` (preempt) and `4ε Σw` (weight gap).
pub fn check_rejected_weight(outcome: &SimOutcome) -> Vec<CheckReport> {
    let eps = &outcome.instance.epsilon;
    let t = &outcome.totals;
    let mut preempt = Tracker::new("rejected-weight-preempt");
    preempt.observe(&t.rejected_preempt_weight - eps * &t.total_weight, Witness::default);
    let mut gap = Tracker::new("rejected-weight-weight-gap");
    gap.observe(
        &t.rejected_weight_gap_weight - Rational::from_int(4) * eps * &t.total_weight,
        Witness::default,
    );
    vec![preempt.finish(), gap.finish()]
}

/// The four structural properties of the weight-gap rule at every arrival,
/// plus suffix shape of every rejected set. Property 2 is also checked on
/// every end-of-step machine snapshot.
pub fn check_properties(outcome: &SimOutcome) -> Vec<CheckReport> {
    let eps = &outcome.instance.epsilon;
    let mut p1 = Tracker::new("property-1-budget-reset");
    let mut p2 = Tracker::strict("property-2-budget-gap");
    let mut p3 = Tracker::new("property-3-rejected-weight");
    let mut p4 = Tracker::new("property-4-arrival-rejection");
    let mut suffix = Tracker::new("rejection-suffix");

    for a in &outcome.arrivals {
        let Some(d) = &a.decision else { continue };
        let w = || at(a.machine, &a.time, Some(a.job));
        if d.branch.resets_budget() {
            p1.observe(a.budget_after.clone(), w);
        }
        if let Some(last) = a.queue_after.last() {
            p2.observe(eps * &a.budget_after - &last.weight, w);
        }
        let ids: Vec<_> = a.rejected.iter().map(|e| e.id).collect();
        if !ids.is_empty() {
            let tail = &d.merged[d.merged.len() - ids.len()..];
            let bad = usize::from(tail != ids.as_slice());
            suffix.observe(Rational::from(bad), w);
            if a.immediately_rejected() {
                let alone = ids == [a.job];
                let pair = ids.len() == 2 && a.queue_before.last().is_some_and(|nu| ids.contains(&nu.id));
                p4.observe(Rational::from(usize::from(!(alone || pair))), w);
            } else {
                let total: Rational = a.rejected.iter().map(|e| &e.weight).sum();
                let smallest = &a.rejected.last().expect("nonempty").weight;
                p3.observe(total - smallest - Rational::from_int(2) * eps * &a.entry.weight, w);
            }
        }
    }
    if outcome.config.rejection {
        for s in &outcome.snapshots {
            if let Some(last) = s.queue.last() {
                p2.observe(eps * &s.budget - &last.weight, || at(s.machine, &s.time, None));
            }
        }
    }
    vec![p1.finish(), p2.finish(), p3.finish(), p4.finish(), suffix.finish()]
}

/// `(w_κ/p_κ) q_κ(t) + Σ_{V(t)} w^f − W(t) <= (1/ε) Σ_{Q^R(t)} w^f` on every
/// machine, at each snapshot time, each `w^f` breakpoint inside the
/// snapshot's interval, and the left end of the next snapshot.
pub fn check_main_inequality(_cert: &DualCertificate, outcome: &SimOutcome) -> CheckReport {
    let eps = &outcome.instance.epsilon;
    let mut tr = Tracker::new("main-inequality");
    for i in 0..outcome.instance.machines {
        let jobs = on_machine(outcome, i);
        let by_id: BTreeMap<_, _> = jobs.iter().map(|j| (j.id, *j)).collect();
        let snaps: Vec<_> = outcome.snapshots_of(i).collect();
        for (k, s) in snaps.iter().enumerate() {
            let next = snaps.get(k + 1).map(|n| &n.time);
            let pending: Vec<&JobOutcome> = s.queue.iter().map(|e| by_id[&e.id]).collect();
            let rejected: Vec<&JobOutcome> = jobs
                .iter()
                .copied()
                .filter(|j| j.fate == Fate::RejectedWeightGap && j.removal_seq <= s.seq)
                .collect();
            let mut points = BTreeSet::new();
            points.insert(s.time.clone());
            for h in pending.iter().chain(&rejected) {
                for t in [&h.ctilde - &h.proc, h.ctilde.clone()] {
                    if t > s.time && next.is_none_or(|n| t < *n) {
                        points.insert(t);
                    }
                }
            }
            if let Some(n) = next {
                points.insert(n.clone());
            }
            for t in &points {
                let mut lhs = -&s.budget;
                if let Some(run) = &s.running {
                    let q = &run.remaining - (t - &s.time);
                    lhs += &run.entry.weight / &run.entry.proc * q;
                }
                for h in &pending {
                    lhs += frac_weight(t, &h.release, &h.ctilde, &h.proc, &h.weight);
                }
                let rhs: Rational = rejected
                    .iter()
                    .map(|h| frac_weight(t, &h.release, &h.ctilde, &h.proc, &h.weight))
                    .sum::<Rational>()
                    / eps;
                tr.observe(lhs - rhs, || at(i, t, None));
            }
        }
    }
    tr.finish()
}

/// `D¹ − D² <= B¹ + B² + B³` after every event step on every machine, and
/// `ε² Σ W(r_j) p_j <= (5/ε) Σ w_j p_j` at the end of the run.
pub fn check_weight_balance(outcome: &SimOutcome) -> CheckReport {
    let eps = &outcome.instance.epsilon;
    let eps2 = eps * eps;
    let mut tr = Tracker::new("weight-balance");
    for i in 0..outcome.instance.machines {
        let jobs = on_machine(outcome, i);
        let by_id: BTreeMap<_, _> = jobs.iter().map(|j| (j.id, *j)).collect();
        let arrivals: Vec<_> = outcome.arrivals.iter().filter(|a| a.machine == i).collect();
        for s in outcome.snapshots_of(i) {
            let (mut d1, mut d2) = (Rational::zero(), Rational::zero());
            let (mut b1, mut b2, mut b3) = (Rational::zero(), Rational::zero(), Rational::zero());
            for a in arrivals.iter().filter(|a| a.seq <= s.seq) {
                let e = &a.entry;
                let wp = &e.weight * &e.proc;
                b3 += &wp / eps;
                let nu_before = a.queue_before.last();
                if a.immediately_rejected() {
                    if a.rejected.len() == 1 {
                        if let Some(nu) = a.queue_after.last() {
                            d2 += &e.weight * &nu.proc;
                        }
                    } else if let Some(nu) = nu_before {
                        d2 += &nu.weight * &nu.proc;
                    }
                } else {
                    d1 += &eps2 * &a.budget_after * &e.proc;
                    if let Some(nu) = nu_before {
                        let is_last = a.queue_after.last().is_some_and(|l| l.id == a.job);
                        if is_last && e.proc < eps * &nu.proc {
                            d1 -= &e.weight * &nu.proc;
                        }
                    }
                }
                let job = by_id[&a.job];
                if job.removal_seq <= s.seq {
                    if job.fate == Fate::RejectedWeightGap {
                        b1 += wp;
                    } else {
                        b2 += wp;
                    }
                }
            }
            if let Some(nu) = s.queue.last() {
                b2 += eps * &s.budget * &nu.proc;
            }
            tr.observe(d1 - d2 - b1 - b2 - b3, || Witness {
                note: Some("per-step balance".into()),
                ..at(i, &s.time, None)
            });
        }
        let mut lhs = Rational::zero();
        let mut rhs = Rational::zero();
        for a in &arrivals {
            if !a.immediately_rejected() {
                lhs += &eps2 * &a.budget_after * &a.entry.proc;
            }
            rhs += &a.entry.weight * &a.entry.proc;
        }
        rhs = Rational::from_int(5) / eps * rhs;
        tr.observe(lhs - rhs, || Witness {
            machine: Some(i),
            note: Some("end-of-run budget sum".into()),
            ..Witness::default()
        });
    }
    tr.finish()
}

/// `α_j/p_ij − β_i(t) <= w_j((t − r_j)/p_ij + 21)` for all jobs, machines
/// and `t >= r_j`, decided at `r_j` and at both sides of every β knot.
pub fn check_dual_feasibility(cert: &DualCertificate, outcome: &SimOutcome) -> CheckReport {
    let mut tr = Tracker::new("dual-feasibility");
    let c21 = Rational::from_int(21);
    for (job, spec) in outcome.jobs.iter().zip(&outcome.instance.jobs) {
        let Some(alpha) = cert.alpha.get(&job.id) else { continue };
        let r = &spec.release;
        for (i, beta) in cert.beta.iter().enumerate() {
            let p = &spec.proc[i];
            let g = |t: &Rational, b: Rational| alpha / p - b - &spec.weight * ((t - r) / p + &c21);
            tr.observe(g(r, beta.eval(r)), || at(i, r, Some(job.id)));
            for k in beta.knots().iter().filter(|k| k.t > *r) {
                tr.observe(g(&k.t, k.left.clone()), || at(i, &k.t, Some(job.id)));
                tr.observe(g(&k.t, k.right.clone()), || at(i, &k.t, Some(job.id)));
            }
        }
    }
    tr.finish()
}

/// `Σ_j w_j (C̃_j − r_j) <= ((1+ε)/ε) Σ_j α_j`.
pub fn check_alpha_lower_bound(cert: &DualCertificate, outcome: &SimOutcome) -> CheckReport {
    let eps = &cert.epsilon;
    let mut tr = Tracker::new("alpha-lower-bound");
    let obj = objectives(cert, outcome);
    tr.observe(obj.sum_w_ctilde - (Rational::one() + eps) / eps * obj.alpha_sum, Witness::default);
    tr.finish()
}

/// `ε³/((1+ε)(1+ε²)) Σ w(C̃ − r) <= dual_obj` and, on the integer grid,
/// `primal_lp_cost <= 22 Σ w(C̃ − r)`.
pub fn check_theorem_chain(cert: &DualCertificate, outcome: &SimOutcome) -> Vec<CheckReport> {
    let eps = &cert.epsilon;
    let obj = objectives(cert, outcome);
    let mut dual = Tracker::new("dual-objective-bound");
    dual.observe(eps * eps * beta_scale(eps) * &obj.sum_w_ctilde - &obj.dual_obj, Witness::default);
    let mut out = vec![dual.finish()];
    if let Some(primal) = &obj.primal_lp_cost {
        let mut tr = Tracker::new("primal-cost-bound");
        tr.observe(primal - Rational::from_int(22) * &obj.sum_w_ctilde, Witness::default);
        out.push(tr.finish());
    }
    out
}

/// `r_j <= L_j <= C̃_j` for every job and `C_j <= C̃_j` for completed ones.
pub fn check_completion_order(outcome: &SimOutcome) -> CheckReport {
    let mut tr = Tracker::new("completion-order");
    for j in &outcome.jobs {
        let w = || Witness {
            machine: Some(j.machine),
            job: Some(j.id),
            ..Witness::default()
        };
        tr.observe(&j.release - &j.removal, w);
        tr.observe(&j.removal - &j.ctilde, w);
        if let Some(c) = &j.completion {
            tr.observe(c - &j.ctilde, w);
        }
    }
    tr.finish()
}

/// Interpolated β against the direct sum at the midpoint of every knot
/// interval: any difference means a missing breakpoint.
pub fn check_breakpoint_sufficiency(cert: &DualCertificate, outcome: &SimOutcome) -> CheckReport {
    let mut tr = Tracker::new("breakpoint-sufficiency");
    let two = Rational::from_int(2);
    for (i, beta) in cert.beta.iter().enumerate() {
        let jobs = on_machine(outcome, i);
        for w in beta.knots().windows(2) {
            let mid = (&w[0].t + &w[1].t) / &two;
            let direct: Rational = jobs
                .iter()
                .map(|h| frac_weight(&mid, &h.release, &h.ctilde, &h.proc, &h.weight))
                .sum();
            let diff = (beta.eval(&mid) - &cert.beta_scale * direct).abs();
            tr.observe(diff, || at(i, &mid, None));
        }
    }
    tr.finish()
}

/// Prefix replay: `β` built from the first `k` jobs never exceeds `β` built
/// from the first `k + 1`, on any machine at any time.
pub fn check_monotonicity(instance: &Instance) -> CheckReport {
    let mut tr = Tracker::new("monotonicity");
    let mut prev = build_certificate(&replay_prefix(instance, 0).expect("k = 0"));
    for k in 0..instance.len() {
        let next = build_certificate(&replay_prefix(instance, k + 1).expect("k <= n"));
        let new_job = instance.jobs[k].id;
        for (i, (a, b)) in prev.beta.iter().zip(&next.beta).enumerate() {
            let times: BTreeSet<_> = a.knots().iter().chain(b.knots()).map(|k| k.t.clone()).collect();
            for t in &times {
                let w = || Witness {
                    note: Some(format!("prefix {k} vs {}", k + 1)),
                    ..at(i, t, Some(new_job))
                };
                tr.observe(a.eval(t) - b.eval(t), w);
                tr.observe(a.eval_left(t) - b.eval_left(t), w);
            }
        }
        prev = next;
    }
    tr.finish()
}

/// Greedily drops jobs while `fails` keeps holding.
pub fn minimize_witness(instance: &Instance, fails: impl Fn(&Instance) -> bool) -> Instance {
    let mut current = instance.clone();
    loop {
        let mut shrunk = false;
        for k in 0..current.jobs.len() {
            let mut jobs = current.jobs.clone();
            jobs.remove(k);
            let candidate = Instance {
                jobs,
                ..current.clone()
            };
            if fails(&candidate) {
                current = candidate;
                shrunk = true;
                break;
            }
        }
        if !shrunk {
            return current;
        }
    }
}

fn dual_feasibility_fails(instance: &Instance) -> bool {
    let out = crate::engine::simulate(instance);
    !check_dual_feasibility(&build_certificate(&out), &out).pass
}

/// Every per-run check, in report order. Runs without rejection only get
/// the checks that do not involve dual values.
pub fn run_checks(outcome: &SimOutcome, cert: &DualCertificate) -> Vec<CheckReport> {
    if !outcome.config.rejection {
        return vec![check_completion_order(outcome)];
    }
    let mut out = check_rejected_weight(outcome);
    out.extend(check_properties(outcome));
    out.push(check_main_inequality(cert, outcome));
    out.push(check_weight_balance(outcome));
    let mut feasibility = check_dual_feasibility(cert, outcome);
    if !feasibility.pass {
        feasibility.witness_instance = Some(minimize_witness(&outcome.instance, dual_feasibility_fails).to_jsonl());
    }
    out.push(feasibility);
    out.push(check_alpha_lower_bound(cert, outcome));
    out.extend(check_theorem_chain(cert, outcome));
    out.push(check_completion_order(outcome));
    out.push(check_breakpoint_sufficiency(cert, outcome));
    out
}
