//! Reference points for measured competitive ratios: the exhaustive
//! non-preemptive optimum of tiny instances, online baselines without
//! rejection, and a trivial lower bound.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{slot_lp_cost, AnalysisError};
use crate::engine::{simulate_with, QueueOrder, SimConfig, SimOutcome};
use crate::instance::{Instance, JobId};
use crate::rational::Rational;

pub const DEFAULT_LIMIT: usize = 7;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance has {n} jobs, above the oracle limit of {limit}")]
    TooLarge { n: usize, limit: usize },
}

/// An optimal schedule: per-machine job order, ASAP start times.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleSchedule {
    pub machines: Vec<Vec<JobId>>,
    pub starts: BTreeMap<JobId, Rational>,
    /// Total weighted flow-time.
    pub cost: Rational,
}

impl OracleSchedule {
    /// Cost of this schedule under the slot LP objective.
    pub fn slot_lp_cost(&self, instance: &Instance) -> Result<Rational, AnalysisError> {
        let mut entries = Vec::new();
        for (i, order) in self.machines.iter().enumerate() {
            for id in order {
                let job = instance.jobs.iter().find(|j| j.id == *id).expect("scheduled job exists");
                entries.push((&job.release, &job.weight, &job.proc[i], &self.starts[id]));
            }
        }
        slot_lp_cost(entries)
    }
}

struct Best {
    cost: Rational,
    order: Vec<JobId>,
}

/// Weighted flow of running `order` (instance indices) back to back on
/// machine `i`, each job starting as soon as it is released.
fn sequence_cost(instance: &Instance, i: usize, order: &[usize]) -> Rational {
    let mut t = Rational::zero();
    let mut cost = Rational::zero();
    for &k in order {
        let job = &instance.jobs[k];
        t = t.max(job.release.clone()) + &job.proc[i];
        cost += &job.weight * (&t - &job.release);
    }
    cost
}

/// Best order of the jobs in `mask` on machine `i`; ties go to the
/// lexicographically smallest id sequence.
fn best_order(instance: &Instance, i: usize, mask: usize) -> Best {
    let mut members: Vec<usize> = (0..instance.len()).filter(|k| mask >> k & 1 == 1).collect();
    members.sort_by_key(|&k| instance.jobs[k].id);
    let mut best: Option<(Rational, Vec<usize>)> = None;
    let mut current = Vec::with_capacity(members.len());
    let mut used = vec![false; members.len()];

    fn walk(
        instance: &Instance,
        i: usize,
        members: &[usize],
        used: &mut [bool],
        current: &mut Vec<usize>,
        best: &mut Option<(Rational, Vec<usize>)>,
    ) {
        if current.len() == members.len() {
            let cost = sequence_cost(instance, i, current);
            // permutations come in lexicographic order, so only strict gains count
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                *best = Some((cost, current.clone()));
            }
            return;
        }
        for (slot, &k) in members.iter().enumerate() {
            if !used[slot] {
                used[slot] = true;
                current.push(k);
                walk(instance, i, members, used, current, best);
                current.pop();
                used[slot] = false;
            }
        }
    }

    walk(instance, i, &members, &mut used, &mut current, &mut best);
    let (cost, order) = best.expect("at least the empty order");
    Best {
        cost,
        order: order.iter().map(|&k| instance.jobs[k].id).collect(),
    }
}

/// Exhaustive optimum over machine assignments and per-machine orders.
pub fn brute_force_opt(instance: &Instance, limit: usize) -> Result<OracleSchedule, OracleError> {
    let n = instance.len();
    if n > limit {
        return Err(OracleError::TooLarge { n, limit });
    }
    let m = instance.machines;
    let table: Vec<Vec<Best>> = (0..m)
        .map(|i| (0..1usize << n).map(|mask| best_order(instance, i, mask)).collect())
        .collect();

    let mut best: Option<(Rational, Vec<Vec<JobId>>)> = None;
    let mut assign = vec![0usize; n];
    loop {
        let mut masks = vec![0usize; m];
        for (k, &i) in assign.iter().enumerate() {
            masks[i] |= 1 << k;
        }
        let cost: Rational = masks.iter().enumerate().map(|(i, &mask)| &table[i][mask].cost).sum();
        if best.as_ref().is_none_or(|(c, _)| cost <= *c) {
            let encoding: Vec<Vec<JobId>> = masks.iter().enumerate().map(|(i, &mask)| table[i][mask].order.clone()).collect();
            let better = match &best {
                None => true,
                Some((c, e)) => cost < *c || encoding < *e,
            };
            if better {
                best = Some((cost, encoding));
            }
        }
        // next assignment in base m
        let mut k = 0;
        while k < n {
            assign[k] += 1;
            if assign[k] < m {
                break;
            }
            assign[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }

    let (cost, machines) = best.expect("at least one assignment");
    let mut starts = BTreeMap::new();
    for (i, order) in machines.iter().enumerate() {
        let mut t = Rational::zero();
        for id in order {
            let job = instance.jobs.iter().find(|j| j.id == *id).expect("scheduled job exists");
            let s = t.max(job.release.clone());
            t = &s + &job.proc[i];
            starts.insert(*id, s);
        }
    }
    Ok(OracleSchedule { machines, starts, cost })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    HdfNoReject,
    Fcfs,
}

impl Baseline {
    pub const ALL: [Baseline; 2] = [Baseline::HdfNoReject, Baseline::Fcfs];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::HdfNoReject => "hdf-no-reject",
            Baseline::Fcfs => "fcfs",
        }
    }
}

/// Runs the engine without rejection, dispatching to the machine with the
/// earliest estimated finish.
pub fn baseline(instance: &Instance, policy: Baseline) -> SimOutcome {
    let order = match policy {
        Baseline::HdfNoReject => QueueOrder::Hdf,
        Baseline::Fcfs => QueueOrder::Fcfs,
    };
    simulate_with(instance, SimConfig::baseline(order))
}

/// `Σ_j w_j min_i p_ij`.
pub fn lower_bound_trivial(instance: &Instance) -> Rational {
    instance
        .jobs
        .iter()
        .map(|j| &j.weight * j.proc.iter().min().expect("at least one machine"))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::JobSpec;
    use crate::rational::q;

    fn job(id: JobId, r: i64, w: i64, p: &[i64]) -> JobSpec {
        JobSpec::new(id, q(r, 1), q(w, 1), p.iter().map(|&v| q(v, 1)).collect())
    }

    #[test]
    fn single_job() {
        let inst = Instance::new(1, q(1, 2), vec![job(0, 0, 2, &[5])]).unwrap();
        let opt = brute_force_opt(&inst, DEFAULT_LIMIT).unwrap();
        assert_eq!(opt.cost, q(10, 1));
        assert_eq!(opt.slot_lp_cost(&inst).unwrap(), q(2 * (105 + 2), 1));
    }

    #[test]
    fn idling_beats_greedy() {
        let inst = Instance::new(1, q(1, 2), vec![job(1, 0, 1, &[10]), job(2, 1, 100, &[1])]).unwrap();
        let opt = brute_force_opt(&inst, DEFAULT_LIMIT).unwrap();
        assert_eq!(opt.cost, q(112, 1));
        assert_eq!(opt.machines, vec![vec![2, 1]]);
        assert_eq!(opt.starts[&2], q(1, 1));
        assert_eq!(sequence_cost(&inst, 0, &[0, 1]), q(1010, 1));
    }

    #[test]
    fn identical_jobs_split() {
        let inst = Instance::new(2, q(1, 2), vec![job(0, 0, 3, &[2, 2]), job(1, 0, 3, &[2, 2])]).unwrap();
        let opt = brute_force_opt(&inst, DEFAULT_LIMIT).unwrap();
        assert_eq!(opt.cost, q(12, 1));
        // lexicographically smallest of the two optimal encodings
        assert_eq!(opt.machines, vec![vec![0], vec![1]]);
    }

    #[test]
    fn too_large() {
        let jobs = (0..8).map(|k| job(k, 0, 1, &[1])).collect();
        let inst = Instance::new(1, q(1, 2), jobs).unwrap();
        assert_eq!(brute_force_opt(&inst, 7), Err(OracleError::TooLarge { n: 8, limit: 7 }));
    }

    #[test]
    fn lower_bound() {
        let inst = Instance::new(2, q(1, 2), vec![job(0, 0, 2, &[3, 5])]).unwrap();
        assert_eq!(lower_bound_trivial(&inst), q(6, 1));
        let empty = Instance::new(2, q(1, 2), vec![]).unwrap();
        assert!(lower_bound_trivial(&empty).is_zero());
    }

    #[test]
    fn baselines_agree_on_one_job() {
        let inst = Instance::new(2, q(1, 2), vec![job(0, 1, 2, &[3, 5])]).unwrap();
        let a = baseline(&inst, Baseline::HdfNoReject);
        let b = baseline(&inst, Baseline::Fcfs);
        assert_eq!(a.totals, b.totals);
        assert_eq!(a.totals.alg_weighted_flow, q(6, 1));
    }

    #[test]
    fn fcfs_ties_by_id() {
        let inst = Instance::new(1, q(1, 2), vec![job(5, 0, 1, &[1]), job(3, 0, 9, &[9]), job(4, 0, 1, &[1])]).unwrap();
        let out = baseline(&inst, Baseline::Fcfs);
        assert_eq!(out.job(3).unwrap().start, Some(q(0, 1)));
        assert_eq!(out.job(4).unwrap().start, Some(q(9, 1)));
    }
}
