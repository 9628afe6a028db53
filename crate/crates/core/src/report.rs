//! Machine-readable run and sweep reports.
//!
//! Rationals appear as `{"exact": "num/den", "approx": 0.5}`; `approx` is
//! for reading only and never compared. Reports are deterministic: the same
//! instance and options give byte-identical JSON.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::analysis::{self, build_certificate, objectives, CheckReport, Tracker, Witness};
use crate::engine::simulate;
use crate::instance::Instance;
use crate::oracle::{self, Baseline, OracleError, OracleSchedule};
use crate::rational::Rational;

pub const REPORT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exact rational with a display-only decimal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exact(pub Rational);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Exact", 2)?;
        s.serialize_field("exact", &format!("{}/{}", self.0.numer(), self.0.denom()))?;
        s.serialize_field("approx", &self.0.approx())?;
        s.end()
    }
}

impl From<Rational> for Exact {
    fn from(r: Rational) -> Self {
        Exact(r)
    }
}

impl From<&Rational> for Exact {
    fn from(r: &Rational) -> Self {
        Exact(r.clone())
    }
}

/// Hex SHA-256 of the canonical instance serialization.
pub fn instance_digest(instance: &Instance) -> String {
    hex::encode(Sha256::digest(instance.to_jsonl().as_bytes()))
}

/// `22(1+ε)(1+ε²)/ε³`.
pub fn theorem_bound(eps: &Rational) -> Rational {
    let one = Rational::one();
    Rational::from_int(22) * (&one + eps) * (&one + eps * eps) / (eps * eps * eps)
}

fn fraction(part: &Rational, whole: &Rational) -> Rational {
    if whole.is_zero() {
        Rational::zero()
    } else {
        part / whole
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TotalsSection {
    pub jobs: usize,
    pub completed: usize,
    pub total_weight: Exact,
    pub alg_weighted_flow: Exact,
    pub rejected_preempt_weight: Exact,
    pub rejected_weight_gap_weight: Exact,
    pub rejected_preempt_fraction: Exact,
    pub rejected_weight_gap_fraction: Exact,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObjectivesSection {
    pub dual_obj: Exact,
    pub primal_lp_cost: Option<Exact>,
    pub alg_weighted_flow: Exact,
    pub sum_w_ctilde: Exact,
    pub alpha_sum: Exact,
    pub beta_integral: Exact,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckSection {
    pub name: String,
    pub pass: bool,
    pub strict: bool,
    pub margin: Exact,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_instance: Option<String>,
}

impl From<CheckReport> for CheckSection {
    fn from(c: CheckReport) -> Self {
        CheckSection {
            name: c.name,
            pass: c.pass,
            strict: c.strict,
            margin: Exact(c.margin),
            points: c.points,
            witness: c.witness,
            witness_instance: c.witness_instance,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BaselineSection {
    pub name: &'static str,
    pub weighted_flow: Exact,
    /// Against the oracle optimum.
    pub ratio: Option<Exact>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleSection {
    pub opt_cost: Exact,
    pub schedule: OracleSchedule,
    pub opt_slot_lp_cost: Option<Exact>,
    pub lower_bound: Exact,
    /// `alg_weighted_flow / opt_cost`; absent when the optimum is zero.
    pub empirical_ratio: Option<Exact>,
    pub theorem_bound: Exact,
    pub baselines: Vec<BaselineSection>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub report_version: u32,
    pub tool_version: &'static str,
    pub command: String,
    pub instance_digest: String,
    pub seed: Option<u64>,
    pub machines: usize,
    pub epsilon: Exact,
    pub totals: TotalsSection,
    pub objectives: ObjectivesSection,
    pub checks: Vec<CheckSection>,
    pub all_pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// What a run report should contain beyond simulation and per-run checks.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub command: String,
    pub seed: Option<u64>,
    /// Add the prefix-replay monotonicity check.
    pub monotonicity: bool,
    /// Run the exhaustive oracle and baselines with this job limit.
    pub oracle_limit: Option<usize>,
}

/// Simulates `instance`, builds the certificate, runs every check and
/// assembles the report.
pub fn run_report(instance: &Instance, opts: &RunOptions) -> Result<RunReport, OracleError> {
    let eps = &instance.epsilon;
    let outcome = simulate(instance);
    let cert = build_certificate(&outcome);
    let obj = objectives(&cert, &outcome);
    let mut checks = analysis::run_checks(&outcome, &cert);
    if opts.monotonicity {
        checks.push(analysis::check_monotonicity(instance));
    }

    let oracle = match opts.oracle_limit {
        None => None,
        Some(limit) => {
            let opt = oracle::brute_force_opt(instance, limit)?;
            let bound = theorem_bound(eps);
            let ratio = (!opt.cost.is_zero()).then(|| &obj.alg_weighted_flow / &opt.cost);

            let mut competitive = Tracker::new("oracle-competitive");
            competitive.observe(&obj.alg_weighted_flow - &bound * &opt.cost, Witness::default);
            checks.push(competitive.finish());
            let opt_lp = opt.slot_lp_cost(instance).ok();
            if let Some(lp) = &opt_lp {
                let mut weak = Tracker::new("weak-duality");
                weak.observe(&obj.dual_obj - lp, Witness::default);
                checks.push(weak.finish());
            }

            let baselines = Baseline::ALL
                .iter()
                .map(|&b| {
                    let flow = oracle::baseline(instance, b).totals.alg_weighted_flow;
                    BaselineSection {
                        name: b.name(),
                        ratio: (!opt.cost.is_zero()).then(|| Exact(&flow / &opt.cost)),
                        weighted_flow: Exact(flow),
                    }
                })
                .collect();
            Some(OracleSection {
                opt_cost: Exact(opt.cost.clone()),
                opt_slot_lp_cost: opt_lp.map(Exact),
                lower_bound: Exact(oracle::lower_bound_trivial(instance)),
                empirical_ratio: ratio.map(Exact),
                theorem_bound: Exact(bound),
                schedule: opt,
                baselines,
            })
        }
    };

    let t = &outcome.totals;
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(RunReport {
        report_version: REPORT_VERSION,
        tool_version: TOOL_VERSION,
        command: opts.command.clone(),
        instance_digest: instance_digest(instance),
        seed: opts.seed,
        machines: instance.machines,
        epsilon: Exact(eps.clone()),
        totals: TotalsSection {
            jobs: t.jobs,
            completed: t.completed,
            total_weight: (&t.total_weight).into(),
            alg_weighted_flow: (&t.alg_weighted_flow).into(),
            rejected_preempt_weight: (&t.rejected_preempt_weight).into(),
            rejected_weight_gap_weight: (&t.rejected_weight_gap_weight).into(),
            rejected_preempt_fraction: Exact(fraction(&t.rejected_preempt_weight, &t.total_weight)),
            rejected_weight_gap_fraction: Exact(fraction(&t.rejected_weight_gap_weight, &t.total_weight)),
        },
        objectives: ObjectivesSection {
            dual_obj: Exact(obj.dual_obj),
            primal_lp_cost: obj.primal_lp_cost.map(Exact),
            alg_weighted_flow: Exact(obj.alg_weighted_flow),
            sum_w_ctilde: Exact(obj.sum_w_ctilde),
            alpha_sum: Exact(obj.alpha_sum),
            beta_integral: Exact(obj.beta_integral),
        },
        checks: checks.into_iter().map(CheckSection::from).collect(),
        all_pass,
        oracle,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub epsilon: Exact,
    pub count: usize,
    pub all_pass: usize,
    /// Passing runs per check name.
    pub check_passes: BTreeMap<String, usize>,
    pub max_rejected_preempt_fraction: Exact,
    pub max_rejected_weight_gap_fraction: Exact,
    /// Over runs where the oracle ran.
    pub max_empirical_ratio: Option<Exact>,
    pub oracle_runs: usize,
    pub theorem_bound: Exact,
}

impl SweepRow {
    /// Folds per-instance reports, in index order, into one row.
    pub fn aggregate(eps: &Rational, reports: &[RunReport]) -> SweepRow {
        let mut check_passes = BTreeMap::new();
        let mut max_pre = Rational::zero();
        let mut max_gap = Rational::zero();
        let mut max_ratio: Option<Rational> = None;
        let mut oracle_runs = 0;
        for r in reports {
            for c in &r.checks {
                *check_passes.entry(c.name.clone()).or_insert(0) += usize::from(c.pass);
            }
            max_pre = max_pre.max(r.totals.rejected_preempt_fraction.0.clone());
            max_gap = max_gap.max(r.totals.rejected_weight_gap_fraction.0.clone());
            if let Some(o) = &r.oracle {
                oracle_runs += 1;
                if let Some(ratio) = &o.empirical_ratio {
                    max_ratio = Some(match max_ratio {
                        None => ratio.0.clone(),
                        Some(m) => m.max(ratio.0.clone()),
                    });
                }
            }
        }
        SweepRow {
            epsilon: Exact(eps.clone()),
            count: reports.len(),
            all_pass: reports.iter().filter(|r| r.all_pass).count(),
            check_passes,
            max_rejected_preempt_fraction: Exact(max_pre),
            max_rejected_weight_gap_fraction: Exact(max_gap),
            max_empirical_ratio: max_ratio.map(Exact),
            oracle_runs,
            theorem_bound: Exact(theorem_bound(eps)),
        }
    }
}

/// A sweep run with at least one failing check.
#[derive(Clone, Debug, Serialize)]
pub struct SweepFailure {
    pub epsilon: Exact,
    pub seed: u64,
    pub failed: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub report_version: u32,
    pub tool_version: &'static str,
    pub seed: u64,
    pub count: usize,
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
    pub all_pass: bool,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
