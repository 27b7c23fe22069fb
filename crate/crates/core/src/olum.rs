//! Online learner for utility maximization (OLUM).
//!
//! Every group `k` carries a virtual queue `Q_k` that grows with the time the
//! controller spends anywhere (scaled by the target rate `γ_k`) and shrinks
//! with the reward group `k` actually collects:
//!
//! ```text
//! Q_k ← max(0, Q_k + γ_k·min(X, T) − R·1{k chosen})
//! γ_k = (U_k')^{-1}(Q_k / V)
//! ```
//!
//! Each task goes to the pair `(k, t)` maximizing `Q_k·θ̂_k(t)/μ̂_k(t)`, where
//! the estimates use the full-information feedback released so far. The
//! feedback for task `n` (one `(X, R̄)` draw per group) becomes visible at
//! stage `n + τ`.
//!
//! Stages are numbered from 1. Before the decision at stage `m` exactly
//! `max(0, m − τ)` samples per group are available.

use std::collections::VecDeque;

use crate::distributions::{DeadlineSet, TaskSample};
use crate::error::{Error, Result};
use crate::utility::UtilitySpec;

/// Cap on the auxiliary rate `γ_k` used before any sample is released.
pub const DEFAULT_GAMMA_FALLBACK: f64 = 1.0;

/// Upper bound applied to the auxiliary variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaCap {
    /// The group's current best empirical reward per processing time, or
    /// `fallback` while no samples exist.
    EmpiricalRate {
        fallback: f64,
    },
    Fixed(f64),
}

impl Default for GammaCap {
    fn default() -> Self {
        GammaCap::EmpiricalRate {
            fallback: DEFAULT_GAMMA_FALLBACK,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlumParams {
    pub v: f64,
    pub tau: usize,
    pub gamma_cap: GammaCap,
}

impl OlumParams {
    pub fn new(v: f64, tau: usize) -> Result<Self> {
        let p = OlumParams {
            v,
            tau,
            gamma_cap: GammaCap::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_gamma_cap(mut self, cap: GammaCap) -> Result<Self> {
        self.gamma_cap = cap;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v.is_finite() && self.v > 0.0) {
            return Err(Error::param(
                "V",
                format!("must be positive and finite, got {}", self.v),
            ));
        }
        if self.tau < 1 {
            return Err(Error::param("tau", "delay must be at least 1"));
        }
        let cap = match self.gamma_cap {
            GammaCap::EmpiricalRate { fallback } => fallback,
            GammaCap::Fixed(c) => c,
        };
        if !(cap.is_finite() && cap >= 0.0) {
            return Err(Error::param(
                "gamma_cap",
                format!("must be finite and >= 0, got {cap}"),
            ));
        }
        Ok(())
    }
}

/// `V = √(B / ln B)`, the budget-matched tradeoff parameter.
pub fn budget_matched_v(budget: f64) -> f64 {
    (budget / budget.ln().max(1.0)).sqrt()
}

/// Mutable learner state for one episode.
#[derive(Debug, Clone)]
pub struct OlumState {
    deadlines: DeadlineSet,
    tau: usize,
    q: Vec<f64>,
    samples: Vec<Vec<TaskSample>>,
    pending: VecDeque<(u64, Vec<TaskSample>)>,
    /// Tasks completed so far.
    completed: u64,
    /// Index of the next feedback vector expected by `ingest_feedback`.
    next_feedback: u64,
    // Running sums of min(t_j, X) and R̄·1{X ≤ t_j} over released samples.
    sum_time: Vec<Vec<f64>>,
    sum_reward: Vec<Vec<f64>>,
}

impl OlumState {
    pub fn new(groups: usize, deadlines: DeadlineSet, tau: usize) -> Result<Self> {
        if groups == 0 {
            return Err(Error::param("groups", "need at least one group"));
        }
        if tau < 1 {
            return Err(Error::param("tau", "delay must be at least 1"));
        }
        let width = deadlines.len();
        Ok(OlumState {
            deadlines,
            tau,
            q: vec![1.0; groups],
            samples: vec![Vec::new(); groups],
            pending: VecDeque::new(),
            completed: 0,
            next_feedback: 1,
            sum_time: vec![vec![0.0; width]; groups],
            sum_reward: vec![vec![0.0; width]; groups],
        })
    }

    pub fn groups(&self) -> usize {
        self.q.len()
    }

    pub fn deadlines(&self) -> &DeadlineSet {
        &self.deadlines
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Overrides the queue vector, e.g. to probe the decision rule.
    pub fn set_q(&mut self, q: Vec<f64>) -> Result<()> {
        if q.len() != self.q.len() || q.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::param("q", "one finite non-negative entry per group"));
        }
        self.q = q;
        Ok(())
    }

    /// Index of the task about to be decided.
    pub fn stage(&self) -> u64 {
        self.completed + 1
    }

    pub fn samples(&self, k: usize) -> &[TaskSample] {
        &self.samples[k]
    }

    /// Empirical `E[min(X, t)]` for group `k`, or `None` without samples.
    pub fn mu_hat(&self, k: usize, t: f64) -> Option<f64> {
        let s = &self.samples[k];
        (!s.is_empty()).then(|| s.iter().map(|x| x.completion.min(t)).sum::<f64>() / s.len() as f64)
    }

    /// Empirical `E[R̄·1{X ≤ t}]` for group `k`, or `None` without samples.
    pub fn theta_hat(&self, k: usize, t: f64) -> Option<f64> {
        let s = &self.samples[k];
        (!s.is_empty()).then(|| s.iter().map(|x| x.censor(t).1).sum::<f64>() / s.len() as f64)
    }

    /// Best empirical reward per processing time of group `k` over the
    /// deadline set.
    pub fn empirical_rate(&self, k: usize) -> Option<f64> {
        if self.samples[k].is_empty() {
            return None;
        }
        Some(
            self.sum_reward[k]
                .iter()
                .zip(&self.sum_time[k])
                .map(|(r, m)| r / m)
                .fold(0.0, f64::max),
        )
    }

    fn cold_start(&self) -> bool {
        let warmup = self.tau.max(self.groups()) as u64;
        self.stage() <= warmup || self.samples.iter().any(Vec::is_empty)
    }

    /// Chooses `(group, deadline)` for the current stage.
    ///
    /// During warm-up groups are visited round-robin with the largest
    /// deadline. Afterwards ties in the score break to the smallest group,
    /// then the smallest deadline.
    pub fn decide(&self) -> (usize, f64) {
        if self.cold_start() {
            let k = ((self.stage() - 1) % self.groups() as u64) as usize;
            return (k, self.deadlines.max());
        }
        let mut best = (0, 0, f64::NEG_INFINITY);
        for k in 0..self.groups() {
            for j in 0..self.deadlines.len() {
                let score = self.q[k] * self.sum_reward[k][j] / self.sum_time[k][j];
                if score > best.2 {
                    best = (k, j, score);
                }
            }
        }
        (best.0, self.deadlines.as_slice()[best.1])
    }

    /// Auxiliary target rate `γ_k`, clipped to the configured cap.
    pub fn auxiliary(&self, utility: &UtilitySpec, params: &OlumParams, k: usize) -> f64 {
        let cap = match params.gamma_cap {
            GammaCap::EmpiricalRate { fallback } => self.empirical_rate(k).unwrap_or(fallback),
            GammaCap::Fixed(c) => c,
        };
        let y = self.q[k] / params.v;
        if utility.is_linear() {
            // U' ≡ w: any γ is optimal at y = w; take the upper end of the cap
            // when the queue is below the marginal, zero otherwise.
            return if y < utility.weight() { cap } else { 0.0 };
        }
        if y <= 0.0 {
            return cap;
        }
        utility.inverse_marginal(y).map(|g| g.min(cap)).unwrap_or(cap)
    }

    pub fn auxiliaries(&self, utilities: &[UtilitySpec], params: &OlumParams) -> Vec<f64> {
        (0..self.groups())
            .map(|k| self.auxiliary(&utilities[k], params, k))
            .collect()
    }

    /// Applies the queue recursion after the chosen task finishes and moves
    /// to the next stage.
    pub fn update_queues(&mut self, chosen: usize, elapsed: f64, reward: f64, gammas: &[f64]) -> Result<()> {
        if !(elapsed.is_finite() && elapsed >= 0.0) {
            return Err(Error::param(
                "elapsed",
                format!("must be finite and >= 0, got {elapsed}"),
            ));
        }
        if !(reward.is_finite() && reward >= 0.0) {
            return Err(Error::param(
                "reward",
                format!("must be finite and >= 0, got {reward}"),
            ));
        }
        if chosen >= self.groups() || gammas.len() != self.groups() {
            return Err(Error::param("chosen", "group index or gamma vector out of range"));
        }
        for (k, q) in self.q.iter_mut().enumerate() {
            let credit = if k == chosen { reward } else { 0.0 };
            *q = (*q + gammas[k] * elapsed - credit).max(0.0);
        }
        self.completed += 1;
        self.release();
        Ok(())
    }

    /// Buffers the full-information vector of task `task` (1-based). It is
    /// folded into the estimates once the stage reaches `task + τ`.
    pub fn ingest_feedback(&mut self, task: u64, vector: Vec<TaskSample>) -> Result<()> {
        if task != self.next_feedback {
            return Err(Error::OutOfOrderFeedback {
                expected: self.next_feedback,
                got: task,
            });
        }
        if vector.len() != self.groups() {
            return Err(Error::param("vector", "one sample per group"));
        }
        self.next_feedback += 1;
        self.pending.push_back((task, vector));
        self.release();
        Ok(())
    }

    fn release(&mut self) {
        let horizon = self.stage().saturating_sub(self.tau as u64);
        while self.pending.front().is_some_and(|(task, _)| *task <= horizon) {
            let (_, vector) = self.pending.pop_front().expect("non-empty");
            for (k, sample) in vector.into_iter().enumerate() {
                for (j, t) in self.deadlines.iter().enumerate() {
                    let (time, reward) = sample.censor(t);
                    self.sum_time[k][j] += time;
                    self.sum_reward[k][j] += reward;
                }
                self.samples[k].push(sample);
            }
        }
    }
}
