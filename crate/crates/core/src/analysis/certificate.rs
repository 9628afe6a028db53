use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::piecewise::{Knot, PiecewiseLinear};
use super::{frac_weight, frac_weight_left, AnalysisError};
use crate::engine::{Fate, JobOutcome, SimOutcome};
use crate::instance::JobId;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualCertificate {
    pub epsilon: Rational,
    /// `ε/(1+ε)`.
    pub alpha_scale: Rational,
    /// `ε/((1+ε)(1+ε²))`.
    pub beta_scale: Rational,
    pub alpha: BTreeMap<JobId, Rational>,
    pub ctilde: BTreeMap<JobId, Rational>,
    /// `β_i(t)` per machine.
    pub beta: Vec<PiecewiseLinear>,
}

impl DualCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes") + "\n"
    }
}

pub(crate) fn beta_scale(eps: &Rational) -> Rational {
    let one = Rational::one();
    eps / &((&one + eps) * (&one + eps * eps))
}

/// `c · Σ w^f_h(t)` over `jobs`, as an exact piecewise-linear function.
pub(crate) fn beta_function<'a>(jobs: impl Iterator<Item = &'a JobOutcome> + Clone, scale: &Rational) -> PiecewiseLinear {
    let mut times = BTreeSet::new();
    for h in jobs.clone() {
        times.insert(h.release.clone());
        let plateau_end = &h.ctilde - &h.proc;
        if plateau_end > h.release {
            times.insert(plateau_end);
        }
        times.insert(h.ctilde.clone());
    }
    let knots = times
        .into_iter()
        .map(|t| {
            let mut left = Rational::zero();
            let mut right = Rational::zero();
            for h in jobs.clone() {
                left += frac_weight_left(&t, &h.release, &h.ctilde, &h.proc, &h.weight);
                right += frac_weight(&t, &h.release, &h.ctilde, &h.proc, &h.weight);
            }
            Knot {
                t,
                left: scale * &left,
                right: scale * &right,
            }
        })
        .collect();
    PiecewiseLinear::from_knots(knots)
}

/// Dual variables for a finished run: `α_j` as recorded at dispatch and
/// `β_i(t) = ε/((1+ε)(1+ε²)) Σ_{h ∈ Q_i(t)} w^f_h(t)`.
pub fn build_certificate(outcome: &SimOutcome) -> DualCertificate {
    let eps = &outcome.instance.epsilon;
    let scale = beta_scale(eps);
    let beta = (0..outcome.instance.machines)
        .map(|i| beta_function(outcome.jobs.iter().filter(|h| h.machine == i), &scale))
        .collect();
    DualCertificate {
        epsilon: eps.clone(),
        alpha_scale: eps / &(Rational::one() + eps),
        beta_scale: scale,
        alpha: outcome
            .arrivals
            .iter()
            .filter_map(|a| a.alpha_j.clone().map(|v| (a.job, v)))
            .collect(),
        ctilde: outcome.jobs.iter().map(|j| (j.id, j.ctilde.clone())).collect(),
        beta,
    }
}

/// LP cost of a non-preemptive schedule under unit-slot accounting: job `j`
/// started at `S` occupies slots `S, …, S+p−1`, each costing
/// `w((t − r)/p + 21)`. Entries are `(release, weight, proc, start)`.
pub fn slot_lp_cost<'a>(
    entries: impl IntoIterator<Item = (&'a Rational, &'a Rational, &'a Rational, &'a Rational)>,
) -> Result<Rational, AnalysisError> {
    let mut total = Rational::zero();
    for (r, w, p, s) in entries {
        if !(r.is_integer() && p.is_integer() && s.is_integer()) {
            return Err(AnalysisError::GridRequired);
        }
        // Σ_{k<p} ((s+k−r)/p + 21) = 21p + (s−r) + (p−1)/2
        total += w * (Rational::from_int(21) * p + (s - r) + (p - Rational::one()) / Rational::from_int(2));
    }
    Ok(total)
}

/// Slot LP cost of the jobs the run completed.
pub fn primal_lp_cost(outcome: &SimOutcome) -> Result<Rational, AnalysisError> {
    if !outcome.instance.integer_grid() {
        return Err(AnalysisError::GridRequired);
    }
    slot_lp_cost(
        outcome
            .jobs
            .iter()
            .filter(|j| j.fate == Fate::Completed)
            .map(|j| (&j.release, &j.weight, &j.proc, j.start.as_ref().expect("completed job started"))),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Objectives {
    pub alpha_sum: Rational,
    pub beta_integral: Rational,
    /// `Σ α_j − Σ_i ∫ β_i`.
    pub dual_obj: Rational,
    /// Absent off the integer grid.
    pub primal_lp_cost: Option<Rational>,
    pub alg_weighted_flow: Rational,
    /// `Σ w_j (C̃_j − r_j)` over all jobs.
    pub sum_w_ctilde: Rational,
}

pub fn objectives(cert: &DualCertificate, outcome: &SimOutcome) -> Objectives {
    let alpha_sum: Rational = cert.alpha.values().sum();
    let beta_integral: Rational = cert.beta.iter().map(|b| b.integral()).sum();
    Objectives {
        dual_obj: &alpha_sum - &beta_integral,
        alpha_sum,
        beta_integral,
        primal_lp_cost: primal_lp_cost(outcome).ok(),
        alg_weighted_flow: outcome.totals.alg_weighted_flow.clone(),
        sum_w_ctilde: outcome.jobs.iter().map(|j| &j.weight * (&j.ctilde - &j.release)).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::simulate;
    use crate::instance::{Instance, JobSpec};
    use crate::rational::q;

    fn one_job(r: i64, w: i64, p: i64) -> Instance {
        Instance::new(1, q(1, 2), vec![JobSpec::new(0, q(r, 1), q(w, 1), vec![q(p, 1)])]).unwrap()
    }

    #[test]
    fn plateau_value() {
        // two plateau jobs of weights 2 and 3 at ε = 1/2
        assert_eq!(beta_scale(&q(1, 2)) * q(5, 1), q(4, 3));
    }

    #[test]
    fn slot_cost_single_job() {
        let out = simulate(&one_job(0, 1, 2));
        assert_eq!(primal_lp_cost(&out), Ok(q(85, 2)));
        // direct slot sum
        let direct: Rational = (0..2).map(|t| q(t, 2) + q(21, 1)).sum();
        assert_eq!(direct, q(85, 2));
    }

    #[test]
    fn off_grid() {
        let inst = Instance::new(1, q(1, 2), vec![JobSpec::new(0, q(1, 2), q(1, 1), vec![q(1, 1)])]).unwrap();
        assert_eq!(primal_lp_cost(&simulate(&inst)), Err(AnalysisError::GridRequired));
    }

    #[test]
    fn empty_run() {
        let inst = Instance::new(2, q(1, 2), vec![]).unwrap();
        let out = simulate(&inst);
        let cert = build_certificate(&out);
        assert!(cert.beta.iter().all(|b| b.knots().is_empty()));
        let obj = objectives(&cert, &out);
        assert!(obj.dual_obj.is_zero() && obj.sum_w_ctilde.is_zero());
        assert_eq!(obj.primal_lp_cost, Some(Rational::zero()));
    }

    #[test]
    fn integral_matches_closed_form() {
        let out = simulate(&one_job(3, 2, 5));
        let cert = build_certificate(&out);
        // C̃ = 8: plateau [3, 3], ramp over [3, 8]: c · w · p / 2
        assert_eq!(cert.beta[0].integral(), beta_scale(&q(1, 2)) * q(5, 1));
    }
}
