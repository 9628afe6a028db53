//! Scheduling instances: jobs with release times, weights and per-machine
//! processing times; JSON-Lines file format; seeded workload generation.
//!
//! # File format
//!
//! Line 1 is a header object, every further non-empty line is one job:
//!
//! ```text
//! {"machines":2,"epsilon":"1/2"}
//! {"id":0,"r":0,"w":3,"p":{"m0":4,"m1":"5/2"}}
//! ```
//!
//! Rationals are written as integers when integral and as `"num/den"`
//! strings otherwise; the parser accepts either form for any field.
//! [`Instance::to_jsonl`] is canonical: jobs in `(r, id)` order, keys in the
//! order shown, machines `m0..m{m-1}` in numeric order, no spaces.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde_json::Value;
use thiserror::Error;

use crate::rational::Rational;

pub type JobId = u64;
pub type MachineId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("duplicate job id {0}")]
    DuplicateJobId(JobId),
    #[error("job {job} has no processing time for machine m{machine}")]
    MissingProcessingTime { job: JobId, machine: MachineId },
    #[error("job {job}: {field} must be positive")]
    NonPositiveValue { job: JobId, field: String },
    #[error("job {job}: release time must be non-negative")]
    NegativeRelease { job: JobId },
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    BadEpsilon(Rational),
    #[error("instance needs at least one machine")]
    NoMachines,
    #[error("invalid workload spec: {0}")]
    BadWorkload(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobSpec {
    pub id: JobId,
    pub release: Rational,
    pub weight: Rational,
    /// Processing time on machine `i` at index `i`.
    pub proc: Vec<Rational>,
}

impl JobSpec {
    pub fn new(id: JobId, release: Rational, weight: Rational, proc: Vec<Rational>) -> Self {
        JobSpec {
            id,
            release,
            weight,
            proc,
        }
    }

    pub fn proc_on(&self, machine: MachineId) -> Result<&Rational, InstanceError> {
        self.proc
            .get(machine)
            .ok_or(InstanceError::MissingProcessingTime {
                job: self.id,
                machine,
            })
    }
}

/// Density `w_j / p_ij` of `job` on `machine`.
pub fn density(job: &JobSpec, machine: MachineId) -> Result<Rational, InstanceError> {
    Ok(&job.weight / job.proc_on(machine)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub machines: usize,
    pub epsilon: Rational,
    /// Sorted by `(release, id)`.
    pub jobs: Vec<JobSpec>,
}

impl Instance {
    /// Builds an instance, sorting jobs by `(release, id)` and validating.
    pub fn new(machines: usize, epsilon: Rational, mut jobs: Vec<JobSpec>) -> Result<Self, InstanceError> {
        jobs.sort_by(|a, b| a.release.cmp(&b.release).then(a.id.cmp(&b.id)));
        let inst = Instance {
            machines,
            epsilon,
            jobs,
        };
        validate(&inst)?;
        Ok(inst)
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    /// True iff every release time and processing time is an integer.
    pub fn integer_grid(&self) -> bool {
        self.jobs
            .iter()
            .all(|j| j.release.is_integer() && j.proc.iter().all(Rational::is_integer))
    }

    pub fn total_weight(&self) -> Rational {
        self.jobs.iter().map(|j| &j.weight).sum()
    }

    /// The sub-instance made of the first `k` jobs in `(r, id)` order.
    pub fn prefix(&self, k: usize) -> Instance {
        Instance {
            machines: self.machines,
            epsilon: self.epsilon.clone(),
            jobs: self.jobs[..k.min(self.jobs.len())].to_vec(),
        }
    }

    /// Same jobs, different epsilon.
    pub fn with_epsilon(&self, epsilon: Rational) -> Result<Instance, InstanceError> {
        let inst = Instance {
            machines: self.machines,
            epsilon,
            jobs: self.jobs.clone(),
        };
        validate(&inst)?;
        Ok(inst)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{{\"machines\":{},\"epsilon\":\"{}/{}\"}}",
            self.machines,
            self.epsilon.numer(),
            self.epsilon.denom()
        );
        for job in &self.jobs {
            let _ = write!(
                out,
                "{{\"id\":{},\"r\":{},\"w\":{},\"p\":{{",
                job.id,
                json_rational(&job.release),
                json_rational(&job.weight)
            );
            for (i, p) in job.proc.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "\"m{}\":{}", i, json_rational(p));
            }
            out.push_str("}}\n");
        }
        out
    }
}

fn json_rational(r: &Rational) -> String {
    serde_json::to_string(r).expect("rational serializes")
}

/// Checks every instance invariant, reporting the first violation.
pub fn validate(inst: &Instance) -> Result<(), InstanceError> {
    if inst.machines == 0 {
        return Err(InstanceError::NoMachines);
    }
    if !(inst.epsilon.is_positive() && inst.epsilon < Rational::one()) {
        return Err(InstanceError::BadEpsilon(inst.epsilon.clone()));
    }
    let mut seen = BTreeSet::new();
    for job in &inst.jobs {
        if !seen.insert(job.id) {
            return Err(InstanceError::DuplicateJobId(job.id));
        }
        if job.release.is_negative() {
            return Err(InstanceError::NegativeRelease { job: job.id });
        }
        if !job.weight.is_positive() {
            return Err(InstanceError::NonPositiveValue {
                job: job.id,
                field: "w".into(),
            });
        }
        for machine in 0..inst.machines {
            if !job.proc_on(machine)?.is_positive() {
                return Err(InstanceError::NonPositiveValue {
                    job: job.id,
                    field: format!("p.m{machine}"),
                });
            }
        }
        if job.proc.len() > inst.machines {
            return Err(InstanceError::Format {
                line: 0,
                message: format!("job {} lists more machines than the header", job.id),
            });
        }
    }
    let sorted = inst
        .jobs
        .windows(2)
        .all(|w| (&w[0].release, w[0].id) < (&w[1].release, w[1].id));
    if !sorted {
        return Err(InstanceError::Format {
            line: 0,
            message: "jobs are not sorted by (release, id)".into(),
        });
    }
    Ok(())
}

fn value_rational(v: &Value, line: usize, what: &str) -> Result<Rational, InstanceError> {
    let err = |message: String| InstanceError::Format { line, message };
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rational::from_int(i))
            } else if let Some(u) = n.as_u64() {
                Ok(Rational::from(u))
            } else {
                Err(err(format!("{what}: non-integer number {n}; use a \"num/den\" string")))
            }
        }
        Value::String(s) => s.parse().map_err(|e| err(format!("{what}: {e}"))),
        other => Err(err(format!("{what}: expected integer or \"num/den\", got {other}"))),
    }
}

/// Parses and validates an instance in the JSON-Lines format.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(InstanceError::Format {
        line: 1,
        message: "missing header line".into(),
    })?;
    let header: Value = serde_json::from_str(header).map_err(|e| InstanceError::Format {
        line: hline,
        message: e.to_string(),
    })?;
    let machines = header
        .get("machines")
        .and_then(Value::as_u64)
        .ok_or(InstanceError::Format {
            line: hline,
            message: "header needs integer \"machines\"".into(),
        })? as usize;
    let epsilon = value_rational(
        header.get("epsilon").ok_or(InstanceError::Format {
            line: hline,
            message: "header needs \"epsilon\"".into(),
        })?,
        hline,
        "epsilon",
    )?;
    if machines == 0 {
        return Err(InstanceError::NoMachines);
    }
    if !(epsilon.is_positive() && epsilon < Rational::one()) {
        return Err(InstanceError::BadEpsilon(epsilon));
    }

    let mut jobs = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, raw) in lines {
        let fmt_err = |message: String| InstanceError::Format { line, message };
        let obj: Value = serde_json::from_str(raw).map_err(|e| fmt_err(e.to_string()))?;
        let id = obj
            .get("id")
            .and_then(Value::as_u64)
            .ok_or_else(|| fmt_err("job needs a non-negative integer \"id\"".into()))?;
        if !seen.insert(id) {
            return Err(InstanceError::DuplicateJobId(id));
        }
        let release = value_rational(obj.get("r").ok_or_else(|| fmt_err("missing \"r\"".into()))?, line, "r")?;
        let weight = value_rational(obj.get("w").ok_or_else(|| fmt_err("missing \"w\"".into()))?, line, "w")?;
        let pmap = obj
            .get("p")
            .and_then(Value::as_object)
            .ok_or_else(|| fmt_err("missing \"p\" object".into()))?;
        for key in pmap.keys() {
            let idx = key.strip_prefix('m').and_then(|s| s.parse::<usize>().ok());
            match idx {
                Some(i) if i < machines => {}
                _ => return Err(fmt_err(format!("unknown machine key {key:?}"))),
            }
        }
        let mut proc = Vec::with_capacity(machines);
        for machine in 0..machines {
            let v = pmap
                .get(&format!("m{machine}"))
                .ok_or(InstanceError::MissingProcessingTime { job: id, machine })?;
            proc.push(value_rational(v, line, "p")?);
        }
        jobs.push(JobSpec::new(id, release, weight, proc));
    }
    Instance::new(machines, epsilon, jobs)
}

/// Parameters of the synthetic workload generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkloadSpec {
    pub n: usize,
    pub m: usize,
    pub p_min: u64,
    pub p_max: u64,
    pub w_min: u64,
    pub w_max: u64,
    pub mean_interarrival: u64,
    pub seed: u64,
    pub epsilon: Rational,
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), InstanceError> {
        let bad = |m: &str| Err(InstanceError::BadWorkload(m.to_string()));
        if self.m == 0 {
            return bad("m must be at least 1");
        }
        if self.p_min == 0 || self.p_min > self.p_max {
            return bad("need 1 <= p_min <= p_max");
        }
        if self.w_min == 0 || self.w_min > self.w_max {
            return bad("need 1 <= w_min <= w_max");
        }
        if self.mean_interarrival == 0 {
            return bad("mean_interarrival must be positive");
        }
        if !(self.epsilon.is_positive() && self.epsilon < Rational::one()) {
            return Err(InstanceError::BadEpsilon(self.epsilon.clone()));
        }
        Ok(())
    }
}

/// SplitMix64 generator.
///
/// `state += 0x9E3779B97F4A7C15; z = state;`
/// `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;`
/// `z = (z ^ (z >> 27)) * 0x94D049BB133111EB;`
/// `return z ^ (z >> 31)` (all arithmetic wrapping mod 2^64).
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `lo..=hi` as `lo + next % (hi - lo + 1)`.
    pub fn uniform(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        let span = hi - lo;
        if span == u64::MAX {
            return self.next_u64();
        }
        lo + self.next_u64() % (span + 1)
    }
}

/// Deterministic synthetic instance.
///
/// Draw order, per job `k = 0..n`: gap `g ~ U[0, 2*mean_interarrival]`
/// (release `r_k = r_{k-1} + g`, with `r_{-1} = 0`), then `w ~ U[w_min, w_max]`,
/// then `p_{i} ~ U[p_min, p_max]` for `i = 0..m`. Job ids are `0..n`.
pub fn generate(spec: &WorkloadSpec) -> Result<Instance, InstanceError> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let mut release = 0u64;
    let mut jobs = Vec::with_capacity(spec.n);
    for k in 0..spec.n {
        release += rng.uniform(0, 2 * spec.mean_interarrival);
        let w = rng.uniform(spec.w_min, spec.w_max);
        let proc = (0..spec.m)
            .map(|_| Rational::from(rng.uniform(spec.p_min, spec.p_max)))
            .collect();
        jobs.push(JobSpec::new(k as JobId, Rational::from(release), Rational::from(w), proc));
    }
    Instance::new(spec.m, spec.epsilon.clone(), jobs)
}
