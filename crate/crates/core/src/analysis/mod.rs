//! Dual certificate construction and the inequality checks run on it.
//!
//! Every check reports an exact margin `LHS − RHS` maximized over all
//! evaluated points; a check passes iff the margin is `<= 0` (`< 0` for the
//! strict ones). Points are event times and breakpoints of the piecewise
//! linear quantities involved, which decides the inequality for all `t`.

mod certificate;
mod checks;
mod piecewise;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{Fate, SimOutcome};
use crate::instance::{JobId, MachineId};
use crate::rational::Rational;

pub use certificate::{build_certificate, objectives, primal_lp_cost, slot_lp_cost, DualCertificate, Objectives};
pub use checks::{
    check_alpha_lower_bound, check_breakpoint_sufficiency, check_completion_order, check_dual_feasibility,
    check_main_inequality, check_monotonicity, check_properties, check_rejected_weight, check_theorem_chain,
    check_weight_balance, minimize_witness, run_checks,
};
pub use piecewise::{Knot, PiecewiseLinear};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("unknown job {0}")]
    UnknownJob(JobId),
    #[error("time {t} outside the support [{from}, {to}) of job {job}")]
    OutOfSupport {
        job: JobId,
        t: Rational,
        from: Rational,
        to: Rational,
    },
    #[error("slot accounting needs integer release and processing times")]
    GridRequired,
}

/// Where the worst point of a check was found.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub machine: Option<MachineId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub job: Option<JobId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    /// `LHS < RHS` required rather than `<=`.
    pub strict: bool,
    /// Largest `LHS − RHS` seen; zero when nothing was evaluated.
    pub margin: Rational,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Smallest failing sub-instance (JSON Lines), attached on failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_instance: Option<String>,
}

/// Running maximum of `LHS − RHS` over the points of one check.
pub(crate) struct Tracker {
    name: &'static str,
    strict: bool,
    worst: Option<(Rational, Witness)>,
    points: usize,
}

impl Tracker {
    pub(crate) fn new(name: &'static str) -> Self {
        Tracker {
            name,
            strict: false,
            worst: None,
            points: 0,
        }
    }

    pub(crate) fn strict(name: &'static str) -> Self {
        Tracker {
            strict: true,
            ..Tracker::new(name)
        }
    }

    pub(crate) fn observe(&mut self, margin: Rational, witness: impl FnOnce() -> Witness) {
        self.points += 1;
        if self.worst.as_ref().is_none_or(|(m, _)| margin > *m) {
            self.worst = Some((margin, witness()));
        }
    }

    pub(crate) fn finish(self) -> CheckReport {
        let (margin, witness, pass) = match self.worst {
            None => (Rational::zero(), None, true),
            Some((m, w)) => {
                let pass = if self.strict { m.is_negative() } else { !m.is_positive() };
                (m, Some(w), pass)
            }
        };
        CheckReport {
            name: self.name.to_string(),
            pass,
            strict: self.strict,
            margin,
            points: self.points,
            witness: if pass { None } else { witness },
            witness_instance: None,
        }
    }
}

pub(crate) fn at(machine: MachineId, time: &Rational, job: Option<JobId>) -> Witness {
    Witness {
        machine: Some(machine),
        time: Some(time.clone()),
        job,
        note: None,
    }
}

/// `w^f(t)` without the support check: `w · min(1, (C̃ − t)/p)` on
/// `[r, C̃)`, zero elsewhere.
pub(crate) fn frac_weight(t: &Rational, release: &Rational, ctilde: &Rational, proc: &Rational, weight: &Rational) -> Rational {
    if t < release || t >= ctilde {
        return Rational::zero();
    }
    let ramp = weight * &(ctilde - t) / proc;
    if ramp < *weight {
        ramp
    } else {
        weight.clone()
    }
}

/// Left limit of [`frac_weight`] at `t`.
pub(crate) fn frac_weight_left(t: &Rational, release: &Rational, ctilde: &Rational, proc: &Rational, weight: &Rational) -> Rational {
    if t <= release || t > ctilde {
        return Rational::zero();
    }
    let ramp = weight * &(ctilde - t) / proc;
    if ramp < *weight {
        ramp
    } else {
        weight.clone()
    }
}

/// Artificial fractional weight of a job at time `t ∈ [r, C̃)`.
pub fn fractional_weight(
    job: JobId,
    t: &Rational,
    release: &Rational,
    ctilde: &Rational,
    proc: &Rational,
    weight: &Rational,
) -> Result<Rational, AnalysisError> {
    if t < release || t >= ctilde {
        return Err(AnalysisError::OutOfSupport {
            job,
            t: t.clone(),
            from: release.clone(),
            to: ctilde.clone(),
        });
    }
    Ok(frac_weight(t, release, ctilde, proc, weight))
}

/// Definitive completion time `C̃_j`.
///
/// `R¹_i(r_j, L_j)` is read in event order: preempt rejections on `j`'s
/// machine triggered by arrivals after `j`, up to and including the event
/// that removed `j`.
pub fn definitive_completion(outcome: &SimOutcome, id: JobId) -> Result<Rational, AnalysisError> {
    let job = outcome.job(id).ok_or(AnalysisError::UnknownJob(id))?;
    let i = job.machine;
    let preempted: Rational = outcome
        .preemptions
        .iter()
        .filter(|p| p.machine == i && p.trigger_index > job.index && p.seq <= job.removal_seq)
        .map(|p| &p.remaining)
        .sum();
    let l = &job.removal;

    if job.fate != Fate::RejectedWeightGap {
        return Ok(l + &preempted);
    }
    let by = job.rejected_by.expect("weight-gap rejection has a trigger");
    let trigger = outcome.job(by).ok_or(AnalysisError::UnknownJob(by))?;
    let rec = &outcome.arrivals[trigger.index];
    let running_after = rec.running_after.as_ref().map(|r| r.remaining.clone()).unwrap_or_default();

    if by != id {
        let me = job.entry();
        // the running job is ahead of j whatever its density
        let ahead: Rational = rec
            .queue_after
            .iter()
            .filter(|h| h.density_cmp(&me).is_ge())
            .map(|h| &h.proc)
            .sum();
        let peers: Rational = rec
            .rejected
            .iter()
            .filter(|h| h.density_cmp(&me).is_ge())
            .map(|h| &h.proc)
            .sum();
        return Ok(l + &preempted + ahead + running_after + peers);
    }

    if rec.rejected.len() > 1 {
        let pending: Rational = rec.queue_after.iter().map(|h| &h.proc).sum();
        return Ok(l + &job.proc + pending + running_after);
    }

    // j alone: interpolate inside V(r_j^-) at the budget left after j
    let v = &rec.queue_before;
    let mut c = l + &job.proc;
    if let Some(rho) = rec.rho.filter(|&rho| rho >= 2) {
        let pivot = &v[rho - 2];
        let head: Rational = v[..rho - 2].iter().map(|h| &h.proc).sum();
        let tail_weight: Rational = v[rho - 1..].iter().map(|h| &h.weight).sum();
        let frac = Rational::one() - (&rec.budget_after - tail_weight) / &pivot.weight;
        c += head + frac * &pivot.proc;
    }
    if rec.preempted.is_none() {
        c += running_after;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn fractional_weight_examples() {
        let (r, c, p, w) = (q(0, 1), q(10, 1), q(2, 1), q(4, 1));
        assert_eq!(fractional_weight(0, &q(5, 1), &r, &c, &p, &w), Ok(q(4, 1)));
        assert_eq!(fractional_weight(0, &q(9, 1), &r, &c, &p, &w), Ok(q(2, 1)));
        assert_eq!(fractional_weight(0, &q(9999, 1000), &r, &c, &p, &w), Ok(q(2, 1000)));
        assert!(fractional_weight(0, &q(10, 1), &r, &c, &p, &w).is_err());
        assert!(fractional_weight(0, &q(-1, 1), &r, &c, &p, &w).is_err());
        assert_eq!(frac_weight_left(&q(10, 1), &r, &c, &p, &w), Rational::zero());
        assert_eq!(frac_weight_left(&r, &r, &c, &p, &w), Rational::zero());
    }
}
