//! Event-driven simulator.
//!
//! At each event time the engine processes, in order: completions (machine
//! id order), arrivals one at a time in `(r, id)` order, then starts on every
//! idle machine. Each arrival is dispatched on untouched snapshots of all
//! machines, then the preempt rule and the weight-gap rule run on the chosen
//! machine only.
//!
//! # Event log
//!
//! [`SimOutcome::events_jsonl`] writes one object per line:
//!
//! ```text
//! {"seq":0,"time":0,"kind":"arrival","job":1,"machine":0,"alpha_j":"326/3","alpha_ij":[326]}
//! {"seq":3,"time":1,"kind":"reject_weight_gap","jobs":[2],"machine":0,"trigger":2,"branch":"s/j-inside-only-suffix"}
//! {"seq":5,"time":2,"kind":"reject_preempt","job":1,"machine":0,"remaining":2,"trigger":3}
//! ```
//!
//! `kind` is one of `arrival`, `reject_preempt`, `reject_weight_gap`,
//! `start`, `complete`. Rationals use the instance-file convention. Arrival
//! events of runs without rejection omit the `alpha_*` fields.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::definitive_completion;
use crate::instance::{Instance, JobId, JobSpec, MachineId};
use crate::policy::{self, WeightGapDecision};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("prefix length {k} out of range for {n} jobs")]
    BadPrefix { k: usize, n: usize },
}

/// A job as seen by one machine.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QueueEntry {
    pub id: JobId,
    pub release: Rational,
    pub weight: Rational,
    pub proc: Rational,
}

impl QueueEntry {
    pub fn for_machine(job: &JobSpec, machine: MachineId) -> Self {
        QueueEntry {
            id: job.id,
            release: job.release.clone(),
            weight: job.weight.clone(),
            proc: job.proc[machine].clone(),
        }
    }

    pub fn density(&self) -> Rational {
        &self.weight / &self.proc
    }

    pub fn density_cmp(&self, other: &QueueEntry) -> Ordering {
        Rational::cmp_ratio(&self.weight, &self.proc, &other.weight, &other.proc)
    }

    /// `Less` when `self` goes first: density desc, release asc, id asc.
    pub fn priority_cmp(&self, other: &QueueEntry) -> Ordering {
        other
            .density_cmp(self)
            .then_with(|| self.release.cmp(&other.release))
            .then_with(|| self.id.cmp(&other.id))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunningJob {
    pub entry: QueueEntry,
    pub start: Rational,
    pub completes_at: Rational,
    /// count¹: weight dispatched to the machine since this job started.
    pub preempt_counter: Rational,
}

impl RunningJob {
    pub fn remaining(&self, now: &Rational) -> Rational {
        &self.completes_at - now
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineState {
    pub id: MachineId,
    pub running: Option<RunningJob>,
    /// Pending jobs in density order.
    pub queue: Vec<QueueEntry>,
    /// Weight-gap budget `W`.
    pub budget: Rational,
    /// count² of pending jobs.
    pub counters: BTreeMap<JobId, Rational>,
}

impl MachineState {
    pub fn new(id: MachineId) -> Self {
        MachineState {
            id,
            running: None,
            queue: Vec::new(),
            budget: Rational::zero(),
            counters: BTreeMap::new(),
        }
    }

    fn insert(&mut self, entry: QueueEntry) {
        let at = policy::insertion_point(&self.queue, &entry);
        self.queue.insert(at, entry);
    }
}

/// The pending job HDF would start next, without touching the state.
pub fn next_job_hdf(state: &MachineState) -> Option<JobId> {
    state.queue.iter().min_by(|a, b| a.priority_cmp(b)).map(|e| e.id)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueueOrder {
    Hdf,
    Fcfs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DispatchRule {
    /// Minimize `α_ij`.
    Alpha,
    /// Minimize the estimated finish time of the job on the machine.
    EarliestFinish,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub rejection: bool,
    pub order: QueueOrder,
    pub dispatch: DispatchRule,
}

impl SimConfig {
    pub fn algorithm() -> Self {
        SimConfig {
            rejection: true,
            order: QueueOrder::Hdf,
            dispatch: DispatchRule::Alpha,
        }
    }

    pub fn baseline(order: QueueOrder) -> Self {
        SimConfig {
            rejection: false,
            order,
            dispatch: DispatchRule::EarliestFinish,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Arrival {
        job: JobId,
        machine: MachineId,
        #[serde(skip_serializing_if = "Option::is_none")]
        alpha_j: Option<Rational>,
        #[serde(skip_serializing_if = "Option::is_none")]
        alpha_ij: Option<Vec<Rational>>,
    },
    RejectPreempt {
        job: JobId,
        machine: MachineId,
        remaining: Rational,
        trigger: JobId,
    },
    RejectWeightGap {
        jobs: Vec<JobId>,
        machine: MachineId,
        trigger: JobId,
        branch: policy::WeightGapBranch,
    },
    Start {
        job: JobId,
        machine: MachineId,
    },
    Complete {
        job: JobId,
        machine: MachineId,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EventRecord {
    pub seq: usize,
    pub time: Rational,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fate {
    Completed,
    RejectedPreempt,
    RejectedWeightGap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunningSnapshot {
    pub entry: QueueEntry,
    pub remaining: Rational,
}

/// Everything the analysis needs about one arrival.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrivalRecord {
    pub job: JobId,
    pub machine: MachineId,
    pub time: Rational,
    /// Seq of the arrival event.
    pub seq: usize,
    pub alpha_j: Option<Rational>,
    pub alpha_ij: Option<Vec<Rational>>,
    pub entry: QueueEntry,
    /// `V(r_j^-)` in density order.
    pub queue_before: Vec<QueueEntry>,
    pub running_before: Option<RunningSnapshot>,
    pub budget_before: Rational,
    /// `W(r_j)`.
    pub budget_after: Rational,
    /// Running job rejected by the preempt rule, with its remaining time.
    pub preempted: Option<(JobId, Rational)>,
    pub decision: Option<WeightGapDecision>,
    /// Weight-gap rejected jobs, density order.
    pub rejected: Vec<QueueEntry>,
    pub rho: Option<usize>,
    pub reduction: Option<Rational>,
    /// `V(r_j)` in density order.
    pub queue_after: Vec<QueueEntry>,
    pub running_after: Option<RunningSnapshot>,
    /// Diagnostic `Δ_ij` on the chosen machine.
    pub delta: Rational,
}

impl ArrivalRecord {
    pub fn immediately_rejected(&self) -> bool {
        self.rejected.iter().any(|e| e.id == self.job)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreemptRecord {
    pub job: JobId,
    pub machine: MachineId,
    pub time: Rational,
    pub seq: usize,
    pub remaining: Rational,
    pub trigger: JobId,
    /// Arrival index of the trigger.
    pub trigger_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobOutcome {
    pub id: JobId,
    /// Position in `(r, id)` order.
    pub index: usize,
    pub machine: MachineId,
    pub release: Rational,
    pub weight: Rational,
    /// `p_ij` on the dispatch machine.
    pub proc: Rational,
    pub start: Option<Rational>,
    pub completion: Option<Rational>,
    /// `L_j`.
    pub removal: Rational,
    pub removal_seq: usize,
    pub fate: Fate,
    /// The arrival that rejected the job.
    pub rejected_by: Option<JobId>,
    /// `C̃_j`.
    pub ctilde: Rational,
}

impl JobOutcome {
    pub fn entry(&self) -> QueueEntry {
        QueueEntry {
            id: self.id,
            release: self.release.clone(),
            weight: self.weight.clone(),
            proc: self.proc.clone(),
        }
    }

    pub fn immediately_rejected(&self) -> bool {
        self.fate == Fate::RejectedWeightGap && self.rejected_by == Some(self.id)
    }
}

/// Machine state at the end of the events at one time; valid until the next
/// event time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineSnapshot {
    pub machine: MachineId,
    pub time: Rational,
    /// Last event seq processed.
    pub seq: usize,
    pub running: Option<RunningSnapshot>,
    pub queue: Vec<QueueEntry>,
    pub budget: Rational,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Totals {
    pub jobs: usize,
    pub completed: usize,
    pub total_weight: Rational,
    /// `Σ w_j (C_j − r_j)` over completed jobs.
    pub alg_weighted_flow: Rational,
    pub rejected_preempt_weight: Rational,
    pub rejected_weight_gap_weight: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimOutcome {
    pub instance: Instance,
    pub config: SimConfig,
    pub events: Vec<EventRecord>,
    /// In arrival order (same as `instance.jobs`).
    pub arrivals: Vec<ArrivalRecord>,
    /// In arrival order.
    pub jobs: Vec<JobOutcome>,
    pub preemptions: Vec<PreemptRecord>,
    pub snapshots: Vec<MachineSnapshot>,
    pub totals: Totals,
}

impl SimOutcome {
    pub fn job(&self, id: JobId) -> Option<&JobOutcome> {
        self.jobs.iter().find(|j| j.id == id)
    }

    pub fn events_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    /// `(time, W)` breakpoints of one machine's budget.
    pub fn budget_trajectory(&self, machine: MachineId) -> Vec<(Rational, Rational)> {
        let mut out: Vec<(Rational, Rational)> = vec![(Rational::zero(), Rational::zero())];
        for s in self.snapshots.iter().filter(|s| s.machine == machine) {
            if out.last().map(|(_, w)| w) != Some(&s.budget) {
                out.push((s.time.clone(), s.budget.clone()));
            }
        }
        out
    }

    pub fn snapshots_of(&self, machine: MachineId) -> impl Iterator<Item = &MachineSnapshot> {
        self.snapshots.iter().filter(move |s| s.machine == machine)
    }
}

/// Runs the online algorithm on `instance`.
pub fn simulate(instance: &Instance) -> SimOutcome {
    simulate_with(instance, SimConfig::algorithm())
}

/// Runs the first `k` jobs of `instance` in `(r, id)` order.
pub fn replay_prefix(instance: &Instance, k: usize) -> Result<SimOutcome, EngineError> {
    if k > instance.len() {
        return Err(EngineError::BadPrefix { k, n: instance.len() });
    }
    Ok(simulate(&instance.prefix(k)))
}

pub fn simulate_with(instance: &Instance, config: SimConfig) -> SimOutcome {
    let mut sim = Sim::new(instance, config);
    sim.run();
    let mut outcome = sim.finish();
    let ctilde: Vec<Rational> = outcome
        .jobs
        .iter()
        .map(|j| definitive_completion(&outcome, j.id).expect("job belongs to the outcome"))
        .collect();
    for (job, c) in outcome.jobs.iter_mut().zip(ctilde) {
        job.ctilde = c;
    }
    outcome
}

struct Sim<'a> {
    instance: &'a Instance,
    config: SimConfig,
    machines: Vec<MachineState>,
    events: Vec<EventRecord>,
    arrivals: Vec<ArrivalRecord>,
    jobs: Vec<Option<JobOutcome>>,
    index_of: BTreeMap<JobId, usize>,
    starts: BTreeMap<JobId, Rational>,
    preemptions: Vec<PreemptRecord>,
    snapshots: Vec<MachineSnapshot>,
}

impl<'a> Sim<'a> {
    fn new(instance: &'a Instance, config: SimConfig) -> Self {
        Sim {
            instance,
            config,
            machines: (0..instance.machines).map(MachineState::new).collect(),
            events: Vec::new(),
            arrivals: Vec::new(),
            jobs: vec![None; instance.len()],
            index_of: instance.jobs.iter().enumerate().map(|(k, j)| (j.id, k)).collect(),
            starts: BTreeMap::new(),
            preemptions: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    fn push(&mut self, time: &Rational, kind: EventKind) -> usize {
        let seq = self.events.len();
        self.events.push(EventRecord {
            seq,
            time: time.clone(),
            kind,
        });
        seq
    }

    fn run(&mut self) {
        let jobs = &self.instance.jobs;
        let mut next = 0;
        loop {
            let completion = self
                .machines
                .iter()
                .filter_map(|m| m.running.as_ref().map(|r| r.completes_at.clone()))
                .min();
            let arrival = jobs.get(next).map(|j| j.release.clone());
            let now = match (completion, arrival) {
                (None, None) => break,
                (Some(c), None) => c,
                (None, Some(a)) => a,
                (Some(c), Some(a)) => c.min(a),
            };

            for i in 0..self.machines.len() {
                if self.machines[i].running.as_ref().is_some_and(|r| r.completes_at == now) {
                    self.complete(i, &now);
                }
            }
            while next < jobs.len() && jobs[next].release == now {
                self.arrive(next, &now);
                next += 1;
            }
            for i in 0..self.machines.len() {
                if self.machines[i].running.is_none() && !self.machines[i].queue.is_empty() {
                    self.start(i, &now);
                }
            }
            self.snapshot(&now);
        }
    }

    fn complete(&mut self, i: usize, now: &Rational) {
        let run = self.machines[i].running.take().expect("running job");
        let seq = self.push(
            now,
            EventKind::Complete {
                job: run.entry.id,
                machine: i,
            },
        );
        self.record_removal(&run.entry, i, now, seq, Fate::Completed, None);
    }

    fn start(&mut self, i: usize, now: &Rational) {
        let m = &mut self.machines[i];
        let pick = match self.config.order {
            QueueOrder::Hdf => 0,
            QueueOrder::Fcfs => (0..m.queue.len())
                .min_by(|&a, &b| {
                    let (x, y) = (&m.queue[a], &m.queue[b]);
                    x.release.cmp(&y.release).then(x.id.cmp(&y.id))
                })
                .expect("nonempty queue"),
        };
        let entry = m.queue.remove(pick);
        m.counters.remove(&entry.id);
        let completes_at = now + &entry.proc;
        let id = entry.id;
        m.running = Some(RunningJob {
            entry,
            start: now.clone(),
            completes_at,
            preempt_counter: Rational::zero(),
        });
        self.starts.insert(id, now.clone());
        self.push(now, EventKind::Start { job: id, machine: i });
    }

    fn snapshot(&mut self, now: &Rational) {
        let seq = self.events.len().saturating_sub(1);
        for m in &self.machines {
            if self.config.rejection {
                if let Some(last) = m.queue.last() {
                    assert!(
                        &self.instance.epsilon * &m.budget < last.weight,
                        "budget invariant broken on machine {} at t={now}: W={}, w_nu={} (event seq {seq})",
                        m.id,
                        m.budget,
                        last.weight
                    );
                }
            }
            self.snapshots.push(MachineSnapshot {
                machine: m.id,
                time: now.clone(),
                seq,
                running: running_snapshot(m, now),
                queue: m.queue.clone(),
                budget: m.budget.clone(),
            });
        }
    }

    fn choose_machine(&self, job: &JobSpec, now: &Rational) -> (MachineId, Option<policy::Dispatch>) {
        match self.config.dispatch {
            DispatchRule::Alpha => {
                let d = policy::dispatch(&self.machines, job, &self.instance.epsilon)
                    .unwrap_or_else(|e| panic!("dispatch of job {} at t={now} failed: {e}", job.id));
                (d.machine, Some(d))
            }
            DispatchRule::EarliestFinish => {
                let finish = |m: &MachineState| -> Rational {
                    let running = m.running.as_ref().map(|r| r.remaining(now)).unwrap_or_default();
                    let queued: Rational = m.queue.iter().map(|e| &e.proc).sum();
                    running + queued + &job.proc[m.id]
                };
                let mut best = 0;
                let mut best_finish = finish(&self.machines[0]);
                for m in &self.machines[1..] {
                    let f = finish(m);
                    if f < best_finish {
                        best = m.id;
                        best_finish = f;
                    }
                }
                (best, None)
            }
        }
    }

    fn arrive(&mut self, index: usize, now: &Rational) {
        let instance = self.instance;
        let job = &instance.jobs[index];
        let eps = instance.epsilon.clone();
        let (i, dispatch) = self.choose_machine(job, now);
        let entry = QueueEntry::for_machine(job, i);
        let seq = self.push(
            now,
            EventKind::Arrival {
                job: job.id,
                machine: i,
                alpha_j: dispatch.as_ref().map(|d| d.alpha_j.clone()),
                alpha_ij: dispatch.as_ref().map(|d| d.alpha_ij.clone()),
            },
        );

        let queue_before = self.machines[i].queue.clone();
        let running_before = running_snapshot(&self.machines[i], now);
        let budget_before = self.machines[i].budget.clone();
        let mut preempted = None;
        let mut decision = None;
        let mut rejected = Vec::new();
        let (mut rho, mut reduction) = (None, None);

        if self.config.rejection {
            let pre = policy::apply_preempt_rule(&self.machines[i], &job.weight, &eps);
            if let (Some(c), Some(run)) = (pre.counter, self.machines[i].running.as_mut()) {
                run.preempt_counter = c;
            }
            if pre.rejected.is_some() {
                let run = self.machines[i].running.take().expect("running job");
                let remaining = run.remaining(now);
                let rseq = self.push(
                    now,
                    EventKind::RejectPreempt {
                        job: run.entry.id,
                        machine: i,
                        remaining: remaining.clone(),
                        trigger: job.id,
                    },
                );
                self.preemptions.push(PreemptRecord {
                    job: run.entry.id,
                    machine: i,
                    time: now.clone(),
                    seq: rseq,
                    remaining: remaining.clone(),
                    trigger: job.id,
                    trigger_index: index,
                });
                preempted = Some((run.entry.id, remaining));
                self.record_removal(&run.entry, i, now, rseq, Fate::RejectedPreempt, Some(job.id));
            }

            // the preempt rule leaves V, W and count² alone, so the
            // hypothetical evaluation from dispatch is the real decision
            let mut evals = dispatch.expect("alpha dispatch").evals;
            let eval = evals.swap_remove(i);
            let d = eval.decision;
            rho = eval.rho;
            reduction = Some(eval.reduction);

            let m = &mut self.machines[i];
            for (id, c) in &d.counter_updates {
                m.counters.insert(*id, c.clone());
            }
            m.insert(entry.clone());
            let (gone, kept): (Vec<_>, Vec<_>) = m.queue.drain(..).partition(|e| d.rejected.contains(&e.id));
            m.queue = kept;
            for e in &gone {
                m.counters.remove(&e.id);
            }
            m.budget = d.new_budget.clone();
            if !gone.is_empty() {
                let wseq = self.push(
                    now,
                    EventKind::RejectWeightGap {
                        jobs: d.rejected.clone(),
                        machine: i,
                        trigger: job.id,
                        branch: d.branch,
                    },
                );
                for e in &gone {
                    self.record_removal(e, i, now, wseq, Fate::RejectedWeightGap, Some(job.id));
                }
            }
            rejected = gone;
            decision = Some(d);
        } else {
            self.machines[i].insert(entry.clone());
        }

        let m = &self.machines[i];
        let delta = policy::compute_delta_ij(m, &entry, now, preempted.as_ref().map(|(_, q)| q));
        self.arrivals.push(ArrivalRecord {
            job: job.id,
            machine: i,
            time: now.clone(),
            seq,
            alpha_j: dispatch_alpha(&self.events[seq].kind),
            alpha_ij: dispatch_alpha_ij(&self.events[seq].kind),
            entry,
            queue_before,
            running_before,
            budget_before,
            budget_after: m.budget.clone(),
            preempted,
            decision,
            rejected,
            rho,
            reduction,
            queue_after: m.queue.clone(),
            running_after: running_snapshot(m, now),
            delta,
        });
    }

    fn record_removal(
        &mut self,
        entry: &QueueEntry,
        machine: MachineId,
        now: &Rational,
        seq: usize,
        fate: Fate,
        rejected_by: Option<JobId>,
    ) {
        let index = self.index_of[&entry.id];
        let start = self.starts.get(&entry.id).cloned();
        self.jobs[index] = Some(JobOutcome {
            id: entry.id,
            index,
            machine,
            release: entry.release.clone(),
            weight: entry.weight.clone(),
            proc: entry.proc.clone(),
            completion: (fate == Fate::Completed).then(|| now.clone()),
            start,
            removal: now.clone(),
            removal_seq: seq,
            fate,
            rejected_by,
            ctilde: Rational::zero(),
        });
    }

    fn finish(self) -> SimOutcome {
        let jobs: Vec<JobOutcome> = self
            .jobs
            .into_iter()
            .map(|j| j.expect("every job leaves the system"))
            .collect();
        let mut totals = Totals {
            jobs: jobs.len(),
            total_weight: self.instance.total_weight(),
            ..Totals::default()
        };
        for j in &jobs {
            match j.fate {
                Fate::Completed => {
                    totals.completed += 1;
                    totals.alg_weighted_flow += &j.weight * (j.completion.as_ref().expect("completed") - &j.release);
                }
                Fate::RejectedPreempt => totals.rejected_preempt_weight += &j.weight,
                Fate::RejectedWeightGap => totals.rejected_weight_gap_weight += &j.weight,
            }
        }
        SimOutcome {
            instance: self.instance.clone(),
            config: self.config,
            events: self.events,
            arrivals: self.arrivals,
            jobs,
            preemptions: self.preemptions,
            snapshots: self.snapshots,
            totals,
        }
    }
}

fn running_snapshot(m: &MachineState, now: &Rational) -> Option<RunningSnapshot> {
    m.running.as_ref().map(|r| RunningSnapshot {
        entry: r.entry.clone(),
        remaining: r.remaining(now),
    })
}

fn dispatch_alpha(kind: &EventKind) -> Option<Rational> {
    match kind {
        EventKind::Arrival { alpha_j, .. } => alpha_j.clone(),
        _ => None,
    }
}

fn dispatch_alpha_ij(kind: &EventKind) -> Option<Vec<Rational>> {
    match kind {
        EventKind::Arrival { alpha_ij, .. } => alpha_ij.clone(),
        _ => None,
    }
}
