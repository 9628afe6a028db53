//! Rejection rules and dispatch, as pure functions over machine snapshots.
//!
//! Nothing here mutates a [`MachineState`]; the engine applies the returned
//! decisions to the real machine, and dispatch evaluates every machine on
//! its untouched snapshot.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{MachineState, QueueEntry};
use crate::instance::{JobId, JobSpec, MachineId};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolicyError {
    #[error("rho undefined: budget {budget} outside [0, {total}) for a queue of {len} jobs")]
    RhoUndefined {
        budget: Rational,
        total: Rational,
        len: usize,
    },
}

/// The line of the weight-gap rejection procedure that produced a decision.
///
/// `s` is the split index of the density-ordered queue `V = V_before ∪ {j}`:
/// the smallest index whose suffix weight fits in `ε(W + w_j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum WeightGapBranch {
    /// No split index; the arrival is not the lowest-density job.
    #[serde(rename = "no-s/not-smallest")]
    NoSplitNotSmallest,
    /// No split index and the queue was empty before the arrival.
    #[serde(rename = "no-s/empty-queue")]
    NoSplitEmptyQueue,
    /// No split index; arrival is lowest density with `p_j >= ε p_(ν-1)`.
    #[serde(rename = "no-s/p-large")]
    NoSplitLargeProc,
    /// Counter of the next-to-last job reached its weight: reject it and the arrival.
    #[serde(rename = "no-s/counter-reject")]
    NoSplitCounterReject,
    /// Counter of the next-to-last job incremented, still below its weight.
    #[serde(rename = "no-s/no-reject")]
    NoSplitCounterBelow,
    /// `w_j >= w_(s-1)/ε`: reject `s-1..ν`.
    #[serde(rename = "s/w-large")]
    SplitHeavyArrival,
    /// Arrival ahead of the suffix: reject `s..ν`.
    #[serde(rename = "s/j-outside")]
    SplitArrivalOutside,
    /// Arrival inside the suffix and the `s-1` counter reached its weight: reject `s-1..ν`.
    #[serde(rename = "s/j-inside-counter-reject")]
    SplitInsideCounterReject,
    /// Arrival inside the suffix: reject `s..ν` only.
    #[serde(rename = "s/j-inside-only-suffix")]
    SplitInsideOnlySuffix,
}

impl WeightGapBranch {
    pub fn label(self) -> &'static str {
        match self {
            WeightGapBranch::NoSplitNotSmallest => "no-s/not-smallest",
            WeightGapBranch::NoSplitEmptyQueue => "no-s/empty-queue",
            WeightGapBranch::NoSplitLargeProc => "no-s/p-large",
            WeightGapBranch::NoSplitCounterReject => "no-s/counter-reject",
            WeightGapBranch::NoSplitCounterBelow => "no-s/no-reject",
            WeightGapBranch::SplitHeavyArrival => "s/w-large",
            WeightGapBranch::SplitArrivalOutside => "s/j-outside",
            WeightGapBranch::SplitInsideCounterReject => "s/j-inside-counter-reject",
            WeightGapBranch::SplitInsideOnlySuffix => "s/j-inside-only-suffix",
        }
    }

    /// Branches whose rejected set reaches one job past the fitting suffix,
    /// after which the budget must be exactly zero.
    pub fn resets_budget(self) -> bool {
        matches!(
            self,
            WeightGapBranch::NoSplitCounterReject
                | WeightGapBranch::SplitHeavyArrival
                | WeightGapBranch::SplitInsideCounterReject
        )
    }
}

impl fmt::Display for WeightGapBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightGapDecision {
    /// Rejected jobs in density order (highest first); always a suffix of `V`.
    pub rejected: Vec<JobId>,
    pub new_budget: Rational,
    /// New values of the counters this arrival touched.
    pub counter_updates: BTreeMap<JobId, Rational>,
    pub branch: WeightGapBranch,
    /// 1-based split index `s` in `V`, when it exists.
    pub split: Option<usize>,
    /// 1-based position of the arrival in `V`.
    pub arrival_position: usize,
    /// `V = V_before ∪ {j}` in density order.
    pub merged: Vec<JobId>,
}

impl WeightGapDecision {
    pub fn rejects_arrival(&self, arrival: JobId) -> bool {
        self.rejected.contains(&arrival)
    }
}

/// Position at which `entry` enters a density-ordered queue.
pub fn insertion_point(queue: &[QueueEntry], entry: &QueueEntry) -> usize {
    queue.partition_point(|e| e.priority_cmp(entry).is_lt())
}

/// The weight-gap rejection procedure for an arrival `j` dispatched to a
/// machine whose pending queue (density order) was `queue_before`.
pub fn weight_gap_reject(
    queue_before: &[QueueEntry],
    budget_before: &Rational,
    counters: &BTreeMap<JobId, Rational>,
    arrival: &QueueEntry,
    eps: &Rational,
) -> WeightGapDecision {
    let pos = insertion_point(queue_before, arrival);
    let mut v: Vec<&QueueEntry> = queue_before.iter().collect();
    v.insert(pos, arrival);
    let nu = v.len();
    let merged: Vec<JobId> = v.iter().map(|e| e.id).collect();

    let fit = eps * &(budget_before + &arrival.weight);
    let mut suffix = vec![Rational::zero(); nu + 1];
    for k in (0..nu).rev() {
        suffix[k] = &suffix[k + 1] + &v[k].weight;
    }

    let mut counter_updates = BTreeMap::new();
    let mut bump = |entry: &QueueEntry| -> bool {
        let c = counters.get(&entry.id).cloned().unwrap_or_default() + &arrival.weight;
        let reached = c >= entry.weight;
        counter_updates.insert(entry.id, c);
        reached
    };

    let (branch, reject_from, split) = if v[nu - 1].weight > fit {
        // no split index
        let branch = if pos != nu - 1 {
            WeightGapBranch::NoSplitNotSmallest
        } else if nu == 1 {
            WeightGapBranch::NoSplitEmptyQueue
        } else {
            let prev = v[nu - 2];
            if arrival.proc >= eps * &prev.proc {
                WeightGapBranch::NoSplitLargeProc
            } else if bump(prev) {
                WeightGapBranch::NoSplitCounterReject
            } else {
                WeightGapBranch::NoSplitCounterBelow
            }
        };
        let from = match branch {
            WeightGapBranch::NoSplitCounterReject => Some(nu - 2),
            _ => None,
        };
        (branch, from, None)
    } else {
        // suffix sums decrease along the queue; s is the first fitting one
        let s0 = (0..nu).find(|&k| suffix[k] <= fit).expect("last job fits");
        // index 0 has no predecessor; it behaves as a job of unbounded weight
        let prev = s0.checked_sub(1).map(|k| v[k]);
        let heavy = prev.is_some_and(|p| arrival.weight >= &p.weight / eps);
        if heavy {
            (WeightGapBranch::SplitHeavyArrival, Some(s0 - 1), Some(s0 + 1))
        } else if pos < s0 {
            (WeightGapBranch::SplitArrivalOutside, Some(s0), Some(s0 + 1))
        } else {
            match prev {
                Some(p) if bump(p) => (WeightGapBranch::SplitInsideCounterReject, Some(s0 - 1), Some(s0 + 1)),
                _ => (WeightGapBranch::SplitInsideOnlySuffix, Some(s0), Some(s0 + 1)),
            }
        }
    };

    let rejected: Vec<JobId> = match reject_from {
        Some(from) => v[from..].iter().map(|e| e.id).collect(),
        None => Vec::new(),
    };
    let rejected_weight: Rational = match reject_from {
        Some(from) => v[from..].iter().map(|e| &e.weight).sum(),
        None => Rational::zero(),
    };
    let new_budget = (budget_before + &arrival.weight - rejected_weight / eps).max(Rational::zero());

    WeightGapDecision {
        rejected,
        new_budget,
        counter_updates,
        branch,
        split,
        arrival_position: pos + 1,
        merged,
    }
}

/// Outcome of the preempt rule for one arrival on one machine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreemptDecision {
    /// Updated counter of the running job, if a job is running.
    pub counter: Option<Rational>,
    /// The running job, when its counter reached `w/ε`.
    pub rejected: Option<JobId>,
}

/// Adds the arrival's weight to the running job's counter and rejects the
/// running job once the counter reaches `w_running / ε`.
pub fn apply_preempt_rule(state: &MachineState, arrival_weight: &Rational, eps: &Rational) -> PreemptDecision {
    match &state.running {
        None => PreemptDecision {
            counter: None,
            rejected: None,
        },
        Some(run) => {
            let counter = &run.preempt_counter + arrival_weight;
            let rejected = (counter >= &run.entry.weight / eps).then_some(run.entry.id);
            PreemptDecision {
                counter: Some(counter),
                rejected,
            }
        }
    }
}

/// 1-based index `ρ` with `Σ_{h>=ρ} w_h <= budget < Σ_{h>=ρ-1} w_h` over a
/// density-ordered list of weights; `ρ = len + 1` is the empty suffix.
pub fn compute_rho(weights: &[Rational], budget: &Rational) -> Result<usize, PolicyError> {
    let total: Rational = weights.iter().sum();
    if weights.is_empty() || budget.is_negative() || *budget >= total {
        return Err(PolicyError::RhoUndefined {
            budget: budget.clone(),
            total,
            len: weights.len(),
        });
    }
    let mut tail = Rational::zero();
    let mut rho = weights.len() + 1;
    for k in (0..weights.len()).rev() {
        let next = &tail + &weights[k];
        if next > *budget {
            break;
        }
        tail = next;
        rho = k + 1;
    }
    Ok(rho)
}

/// Hypothetical evaluation of one machine for an arrival.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaEval {
    pub alpha: Rational,
    /// The weight-gap decision had the job been sent here.
    pub decision: WeightGapDecision,
    /// `ρ` (1-based, over the pre-arrival queue) when the arrival alone would
    /// be rejected; 1 when the remaining budget covers the whole queue.
    pub rho: Option<usize>,
    /// The subtracted term `n_ij`.
    pub reduction: Rational,
}

/// Dispatch score `α_ij` of sending `arrival` to the machine in `state`.
pub fn compute_alpha_ij(state: &MachineState, arrival: &QueueEntry, eps: &Rational) -> Result<AlphaEval, PolicyError> {
    let queue = &state.queue;
    let decision = weight_gap_reject(queue, &state.budget, &state.counters, arrival, eps);
    let budget_after = &decision.new_budget;
    let (w, p) = (&arrival.weight, &arrival.proc);

    let mut ahead_proc = Rational::zero();
    let mut behind_weight = Rational::zero();
    for h in queue {
        if h.density_cmp(arrival).is_ge() {
            ahead_proc += &h.proc;
        } else {
            behind_weight += &h.weight;
        }
    }
    let base = Rational::from_int(20) * w * p / eps + w * &ahead_proc + w * p + p * &behind_weight;

    let mut rho = None;
    let only_arrival = decision.rejected.as_slice() == [arrival.id];
    let with_last = decision.rejected.len() == 2
        && decision.rejected.contains(&arrival.id)
        && queue.last().is_some_and(|last| decision.rejected.contains(&last.id));
    let reduction = if only_arrival {
        let queue_weight: Rational = queue.iter().map(|e| &e.weight).sum();
        if *budget_after >= queue_weight {
            // the budget covers the whole queue: ρ = 1, as if a job of
            // unbounded weight sat in front of it
            rho = Some(1);
            w * queue.iter().map(|e| &e.proc).sum::<Rational>()
        } else {
            let weights: Vec<Rational> = queue.iter().map(|e| e.weight.clone()).collect();
            let r = compute_rho(&weights, budget_after)?;
            rho = Some(r);
            let tail = &queue[r - 1..];
            let tail_proc: Rational = tail.iter().map(|e| &e.proc).sum();
            let tail_weight: Rational = tail.iter().map(|e| &e.weight).sum();
            let pivot = &queue[r - 2];
            w * (tail_proc + (budget_after - tail_weight) * &pivot.proc / &pivot.weight)
        }
    } else if with_last {
        let ids = &decision.rejected;
        let procs: Rational = std::iter::once(arrival)
            .chain(queue.iter())
            .filter(|e| ids.contains(&e.id))
            .map(|e| &e.proc)
            .sum();
        w * procs
    } else {
        let rejected_weight: Rational = queue
            .iter()
            .chain(std::iter::once(arrival))
            .filter(|e| decision.rejected.contains(&e.id))
            .map(|e| &e.weight)
            .sum();
        p * rejected_weight + eps * eps * budget_after * p
    };

    Ok(AlphaEval {
        alpha: base - &reduction,
        decision,
        rho,
        reduction,
    })
}

/// Approximate flow-time increase `Δ_ij`, evaluated on the post-rule state.
///
/// `after` is the machine right after the arrival was processed (the arrival
/// is in its queue unless rejected), `now` the arrival time, and
/// `preempted_remaining` the remaining time of the running job if the
/// arrival preempt-rejected it. Diagnostic only; dispatch uses `α_ij`.
pub fn compute_delta_ij(
    after: &MachineState,
    arrival: &QueueEntry,
    now: &Rational,
    preempted_remaining: Option<&Rational>,
) -> Rational {
    let (w, p) = (&arrival.weight, &arrival.proc);
    let mut delta = Rational::zero();
    for h in after.queue.iter().filter(|h| h.id != arrival.id) {
        if h.density_cmp(arrival).is_ge() {
            delta += w * &h.proc;
        } else {
            delta += p * &h.weight;
        }
    }
    match preempted_remaining {
        None => {
            if let Some(run) = &after.running {
                delta += w * (&run.completes_at - now);
            }
        }
        Some(q) => {
            let others: Rational = after
                .queue
                .iter()
                .filter(|h| h.id != arrival.id)
                .map(|h| &h.weight)
                .sum();
            delta -= q * others;
        }
    }
    delta
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dispatch {
    pub machine: MachineId,
    /// `ε/(1+ε) · min_i α_ij`.
    pub alpha_j: Rational,
    pub alpha_ij: Vec<Rational>,
    pub evals: Vec<AlphaEval>,
}

/// Sends `job` to the machine minimizing `α_ij` (ties to the lowest id).
pub fn dispatch(states: &[MachineState], job: &JobSpec, eps: &Rational) -> Result<Dispatch, PolicyError> {
    assert!(!states.is_empty(), "dispatch needs at least one machine");
    let evals = states
        .iter()
        .map(|s| compute_alpha_ij(s, &QueueEntry::for_machine(job, s.id), eps))
        .collect::<Result<Vec<_>, _>>()?;
    let mut best = 0;
    for (i, e) in evals.iter().enumerate().skip(1) {
        if e.alpha < evals[best].alpha {
            best = i;
        }
    }
    let alpha_j = eps / &(Rational::one() + eps) * &evals[best].alpha;
    Ok(Dispatch {
        machine: states[best].id,
        alpha_j,
        alpha_ij: evals.iter().map(|e| e.alpha.clone()).collect(),
        evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::RunningJob;
    use crate::rational::q;

    fn entry(id: JobId, r: i64, w: i64, p: i64) -> QueueEntry {
        QueueEntry {
            id,
            release: q(r, 1),
            weight: q(w, 1),
            proc: q(p, 1),
        }
    }

    fn machine(queue: Vec<QueueEntry>, budget: Rational) -> MachineState {
        let mut m = MachineState::new(0);
        m.queue = queue;
        m.budget = budget;
        m
    }

    fn running(m: &mut MachineState, e: QueueEntry, start: i64, counter: Rational) {
        let completes_at = q(start, 1) + &e.proc;
        m.running = Some(RunningJob {
            entry: e,
            start: q(start, 1),
            completes_at,
            preempt_counter: counter,
        });
    }

    #[test]
    fn preempt_rule_threshold() {
        let mut m = MachineState::new(0);
        running(&mut m, entry(1, 0, 2, 10), 0, q(3, 1));
        let d = apply_preempt_rule(&m, &q(1, 1), &q(1, 2));
        assert_eq!(d.counter, Some(q(4, 1)));
        assert_eq!(d.rejected, Some(1));

        let idle = MachineState::new(0);
        let d = apply_preempt_rule(&idle, &q(1, 1), &q(1, 2));
        assert_eq!(d, PreemptDecision { counter: None, rejected: None });

        let mut m = MachineState::new(0);
        running(&mut m, entry(1, 0, 2, 10), 0, Rational::zero());
        let d = apply_preempt_rule(&m, &q(1, 1), &q(1, 2));
        assert_eq!(d.counter, Some(q(1, 1)));
        assert_eq!(d.rejected, None);
    }

    #[test]
    fn heavy_arrival_rejects_from_s_minus_one() {
        // densities 5/1 > 1/1 > 1/2; arrival density 10 is highest
        let queue = vec![entry(1, 0, 5, 1), entry(2, 0, 1, 1), entry(3, 0, 1, 2)];
        let arrival = entry(9, 1, 10, 1);
        let d = weight_gap_reject(&queue, &Rational::zero(), &BTreeMap::new(), &arrival, &q(1, 2));
        assert_eq!(d.branch, WeightGapBranch::SplitHeavyArrival);
        assert_eq!(d.split, Some(3));
        assert_eq!(d.rejected, vec![1, 2, 3]);
        assert_eq!(d.new_budget, Rational::zero());
        assert_eq!(d.merged, vec![9, 1, 2, 3]);
    }

    #[test]
    fn empty_queue_never_rejects_without_split() {
        let d = weight_gap_reject(&[], &Rational::zero(), &BTreeMap::new(), &entry(1, 0, 2, 3), &q(1, 2));
        assert_eq!(d.branch, WeightGapBranch::NoSplitEmptyQueue);
        assert!(d.rejected.is_empty());
        assert_eq!(d.new_budget, q(2, 1));
    }

    #[test]
    fn small_arrival_bumps_counter() {
        let queue = vec![entry(1, 0, 8, 8)];
        let arrival = entry(2, 1, 1, 2);
        let d = weight_gap_reject(&queue, &Rational::zero(), &BTreeMap::new(), &arrival, &q(1, 2));
        assert_eq!(d.branch, WeightGapBranch::NoSplitCounterBelow);
        assert!(d.rejected.is_empty());
        assert_eq!(d.counter_updates.get(&1), Some(&q(1, 1)));
        assert_eq!(d.new_budget, q(1, 1));

        // counter one short of the weight: this arrival tips it over
        let mut counters = BTreeMap::new();
        counters.insert(1, q(7, 1));
        let d = weight_gap_reject(&queue, &Rational::zero(), &counters, &arrival, &q(1, 2));
        assert_eq!(d.branch, WeightGapBranch::NoSplitCounterReject);
        assert_eq!(d.rejected, vec![1, 2]);
        assert_eq!(d.new_budget, Rational::zero());
    }

    #[test]
    fn large_proc_arrival_is_kept() {
        let queue = vec![entry(1, 0, 8, 8)];
        let arrival = entry(2, 1, 1, 4);
        let d = weight_gap_reject(&queue, &Rational::zero(), &BTreeMap::new(), &arrival, &q(1, 2));
        assert_eq!(d.branch, WeightGapBranch::NoSplitLargeProc);
        assert!(d.counter_updates.is_empty());
    }

    #[test]
    fn arrival_outside_suffix() {
        // V = [a(w=4,δ=4), j(w=3,δ=3), b(w=1,δ=1/2)], W=2, ε=1/2: fit = 5/2
        let queue = vec![entry(1, 0, 4, 1), entry(2, 0, 1, 2)];
        let arrival = entry(3, 1, 3, 1);
        let d = weight_gap_reject(&queue, &q(2, 1), &BTreeMap::new(), &arrival, &q(1, 2));
        assert_eq!(d.branch, WeightGapBranch::SplitArrivalOutside);
        assert_eq!(d.split, Some(3));
        assert_eq!(d.rejected, vec![2]);
        // 2 + 3 - 1/(1/2) = 3
        assert_eq!(d.new_budget, q(3, 1));
    }

    #[test]
    fn arrival_alone_in_suffix() {
        // V = [a(w=4,p=1), j(w=1,p=4)], W = 3, ε=1/2: fit = 2, suffix {j}=1 fits, {a,j}=5 doesn't
        let queue = vec![entry(1, 0, 4, 1)];
        let arrival = entry(2, 1, 1, 4);
        let d = weight_gap_reject(&queue, &q(3, 1), &BTreeMap::new(), &arrival, &q(1, 2));
        assert_eq!(d.branch, WeightGapBranch::SplitInsideOnlySuffix);
        assert_eq!(d.rejected, vec![2]);
        assert_eq!(d.counter_updates.get(&1), Some(&q(1, 1)));
        assert_eq!(d.new_budget, q(2, 1));
    }

    #[test]
    fn arrival_to_empty_queue_with_large_budget() {
        let d = weight_gap_reject(&[], &q(4, 1), &BTreeMap::new(), &entry(1, 0, 2, 1), &q(1, 2));
        assert_eq!(d.branch, WeightGapBranch::SplitInsideOnlySuffix);
        assert_eq!(d.split, Some(1));
        assert_eq!(d.rejected, vec![1]);
        assert!(d.counter_updates.is_empty());
        assert_eq!(d.new_budget, q(2, 1));
    }

    #[test]
    fn rho_examples() {
        let w = [q(3, 1), q(2, 1), q(1, 1)];
        assert_eq!(compute_rho(&w, &q(2, 1)), Ok(3));
        assert_eq!(compute_rho(&w, &Rational::zero()), Ok(4));
        assert_eq!(compute_rho(&w, &q(5, 1)), Ok(2));
        assert!(compute_rho(&w, &q(6, 1)).is_err());
        assert!(compute_rho(&[], &Rational::zero()).is_err());
    }

    #[test]
    fn alpha_on_empty_machine() {
        let m = MachineState::new(0);
        let e = compute_alpha_ij(&m, &entry(1, 0, 1, 2), &q(1, 2)).unwrap();
        assert!(e.decision.rejected.is_empty());
        assert_eq!(e.decision.new_budget, q(1, 1));
        assert_eq!(e.reduction, q(1, 2));
        assert_eq!(e.alpha, q(163, 2));
    }

    #[test]
    fn alpha_pair_rejection_drops_budget_term() {
        // queue a(w=8,p=8), arrival j(w=1,p=2) tips the counter of a
        let mut m = machine(vec![entry(1, 0, 8, 8)], Rational::zero());
        m.counters.insert(1, q(7, 1));
        let j = entry(2, 1, 1, 2);
        let e = compute_alpha_ij(&m, &j, &q(1, 2)).unwrap();
        assert_eq!(e.decision.rejected, vec![1, 2]);
        // n = w_j (p_j + p_a) = 10
        assert_eq!(e.reduction, q(10, 1));
        // 20*1*2/(1/2) + 1*8 + 2 + 0 - 10 = 80
        assert_eq!(e.alpha, q(80, 1));
        // the real counters are untouched
        assert_eq!(m.counters.get(&1), Some(&q(7, 1)));
    }

    #[test]
    fn alpha_single_rejection_uses_rho() {
        let m = machine(vec![entry(1, 0, 4, 1)], q(3, 1));
        let j = entry(2, 1, 1, 4);
        let e = compute_alpha_ij(&m, &j, &q(1, 2)).unwrap();
        assert_eq!(e.decision.rejected, vec![2]);
        // W' = 2 < 4: rho = 2 (empty tail), n = 1 * (0 + 2 * 1/4) = 1/2
        assert_eq!(e.rho, Some(2));
        assert_eq!(e.reduction, q(1, 2));
        // 20*1*4*2 + 1*1 + 4 + 0 - 1/2
        assert_eq!(e.alpha, q(160 + 1 + 4, 1) - q(1, 2));
    }

    #[test]
    fn purity_and_symmetry() {
        let mut a = machine(vec![entry(1, 0, 3, 2), entry(2, 0, 1, 5)], q(1, 1));
        running(&mut a, entry(3, 0, 2, 4), 0, q(1, 1));
        let mut b = a.clone();
        b.id = 1;
        let snapshot = a.clone();
        let j = entry(4, 1, 2, 3);
        let ea = compute_alpha_ij(&a, &j, &q(1, 3)).unwrap();
        let eb = compute_alpha_ij(&b, &j, &q(1, 3)).unwrap();
        assert_eq!(ea.alpha, eb.alpha);
        assert_eq!(a, snapshot);
    }

    #[test]
    fn delta_examples() {
        let empty = MachineState::new(0);
        let j = entry(5, 0, 2, 1);
        assert_eq!(compute_delta_ij(&empty, &j, &Rational::zero(), None), Rational::zero());

        // one higher-density job with p=3 besides j
        let m = machine(vec![entry(1, 0, 9, 3), j.clone()], Rational::zero());
        assert_eq!(compute_delta_ij(&m, &j, &Rational::zero(), None), q(6, 1));

        // running job just preempt-rejected with q=4, other pending weight 5
        let m = machine(vec![entry(1, 0, 9, 3), j.clone(), entry(2, 0, 1, 9), entry(3, 0, 1, 9)], Rational::zero());
        // higher: 2*3 = 6; lower: 1*(1+1) = 2; preempt correction: -4*(9+1+1)
        let d = compute_delta_ij(&m, &j, &Rational::zero(), Some(&q(4, 1)));
        assert_eq!(d, q(6 + 2 - 44, 1));
    }

    #[test]
    fn dispatch_argmin_and_ties() {
        let job = JobSpec::new(1, q(0, 1), q(1, 1), vec![q(2, 1)]);
        let d = dispatch(&[MachineState::new(0)], &job, &q(1, 2)).unwrap();
        assert_eq!(d.machine, 0);
        assert_eq!(d.alpha_j, q(1, 3) * q(163, 2));

        let job = JobSpec::new(1, q(0, 1), q(1, 1), vec![q(3, 1), q(2, 1), q(3, 1)]);
        let states: Vec<_> = (0..3).map(MachineState::new).collect();
        let d = dispatch(&states, &job, &q(1, 2)).unwrap();
        assert_eq!(d.machine, 1);
        assert_eq!(d.alpha_j, q(1, 3) * &d.alpha_ij[1]);
        assert!(d.alpha_ij[1] < d.alpha_ij[0]);

        let job = JobSpec::new(1, q(0, 1), q(1, 1), vec![q(2, 1), q(2, 1)]);
        let states: Vec<_> = (0..2).map(MachineState::new).collect();
        let d = dispatch(&states, &job, &q(1, 2)).unwrap();
        assert_eq!(d.alpha_ij[0], d.alpha_ij[1]);
        assert_eq!(d.machine, 0);
    }
}
