//! Group models: completion-time laws, reward laws, sampling and truncated
//! moments.
//!
//! A task from group `k` takes `X` units of time and carries a latent base
//! reward `R̄`. Under a deadline `t` it occupies `min(X, t)` time and pays
//! `R̄·1{X ≤ t}`. The two moments that drive every policy are
//!
//! * `μ(t) = E[min(X, t)]`, the truncated mean processing time, and
//! * `θ(t) = E[R̄·1{X ≤ t}]`, the expected censored reward.
//!
//! Closed forms are used for Pareto, exponential and deterministic laws; the
//! one combination without a closed form (exponential time with a power-law
//! reward) falls back to adaptive quadrature.

use rand::Rng;
use rand_distr::{Distribution, Exp, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Absolute tolerance for quadrature-backed moments.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Law of the task completion time `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CompletionSpec {
    /// Pareto with support `[scale, ∞)` and tail index `shape`.
    Pareto {
        scale: f64,
        shape: f64,
    },
    Exponential {
        rate: f64,
    },
    Deterministic {
        value: f64,
    },
    /// Resamples uniformly from a fixed list of observations.
    Empirical {
        samples: Vec<f64>,
    },
}

/// Law of the latent base reward `R̄` of a task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardSpec {
    /// `R̄ = X^exponent`, coupled to the completion time.
    PowerOfTime {
        exponent: f64,
    },
    Constant {
        value: f64,
    },
    /// `R̄ ~ Uniform[lo, hi]`, independent of the completion time.
    ScaledUniform {
        lo: f64,
        hi: f64,
    },
}

fn positive_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            name,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn check_deadline(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDeadline(t))
    }
}

impl CompletionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            CompletionSpec::Pareto { scale, shape } => {
                positive_finite("scale", *scale)?;
                positive_finite("shape", *shape)
            }
            CompletionSpec::Exponential { rate } => positive_finite("rate", *rate),
            CompletionSpec::Deterministic { value } => positive_finite("value", *value),
            CompletionSpec::Empirical { samples } => {
                if samples.is_empty() {
                    return Err(Error::param("samples", "must be non-empty"));
                }
                samples.iter().try_for_each(|&x| positive_finite("samples", x))
            }
        }
    }

    /// Smallest value in the support; `P(X ≤ t) = 0` for `t` strictly below it.
    pub fn support_min(&self) -> f64 {
        match self {
            CompletionSpec::Pareto { scale, .. } => *scale,
            CompletionSpec::Exponential { .. } => 0.0,
            CompletionSpec::Deterministic { value } => *value,
            CompletionSpec::Empirical { samples } => samples.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// Untruncated mean, `∞` for Pareto tails with `shape ≤ 1`.
    pub fn mean(&self) -> f64 {
        match self {
            CompletionSpec::Pareto { scale, shape } => {
                if *shape <= 1.0 {
                    f64::INFINITY
                } else {
                    scale * shape / (shape - 1.0)
                }
            }
            CompletionSpec::Exponential { rate } => 1.0 / rate,
            CompletionSpec::Deterministic { value } => *value,
            CompletionSpec::Empirical { samples } => samples.iter().sum::<f64>() / samples.len() as f64,
        }
    }

    /// `P(X ≤ t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            CompletionSpec::Pareto { scale, shape } => {
                if t <= *scale {
                    0.0
                } else {
                    1.0 - (scale / t).powf(*shape)
                }
            }
            CompletionSpec::Exponential { rate } => {
                if t <= 0.0 {
                    0.0
                } else {
                    -(-rate * t).exp_m1()
                }
            }
            CompletionSpec::Deterministic { value } => {
                if *value <= t {
                    1.0
                } else {
                    0.0
                }
            }
            CompletionSpec::Empirical { samples } => {
                samples.iter().filter(|&&x| x <= t).count() as f64 / samples.len() as f64
            }
        }
    }

    /// `E[min(X, t)]`, always in `(0, t]`.
    pub fn truncated_mean(&self, t: f64) -> Result<f64> {
        check_deadline(t)?;
        let v = match self {
            CompletionSpec::Pareto { scale, shape } => {
                let (s, g) = (*scale, *shape);
                if t <= s {
                    t
                } else {
                    let log_ratio = (s / t).ln();
                    let tail = if g == 1.0 {
                        -log_ratio
                    } else {
                        -((g - 1.0) * log_ratio).exp_m1() / (g - 1.0)
                    };
                    s + s * tail
                }
            }
            CompletionSpec::Exponential { rate } => -(-rate * t).exp_m1() / rate,
            CompletionSpec::Deterministic { value } => value.min(t),
            CompletionSpec::Empirical { samples } => {
                samples.iter().map(|&x| x.min(t)).sum::<f64>() / samples.len() as f64
            }
        };
        Ok(v)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            CompletionSpec::Pareto { scale, shape } => Pareto::new(*scale, *shape)
                .expect("validated pareto parameters")
                .sample(rng),
            CompletionSpec::Exponential { rate } => {
                let exp = Exp::new(*rate).expect("validated exponential rate");
                loop {
                    let x = exp.sample(rng);
                    if x > 0.0 {
                        break x;
                    }
                }
            }
            CompletionSpec::Deterministic { value } => *value,
            CompletionSpec::Empirical { samples } => samples[rng.random_range(0..samples.len())],
        }
    }
}

impl RewardSpec {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::param(
                    name,
                    format!("must be non-negative and finite, got {v}"),
                ))
            }
        };
        match self {
            RewardSpec::PowerOfTime { exponent } => nonneg("exponent", *exponent),
            RewardSpec::Constant { value } => nonneg("value", *value),
            RewardSpec::ScaledUniform { lo, hi } => {
                nonneg("lo", *lo)?;
                nonneg("hi", *hi)?;
                if lo > hi {
                    return Err(Error::param("lo", format!("lo = {lo} exceeds hi = {hi}")));
                }
                Ok(())
            }
        }
    }

    /// Base reward attached to a task of length `x`, for laws that do not
    /// need randomness of their own.
    fn coupled(&self, x: f64) -> Option<f64> {
        match self {
            RewardSpec::PowerOfTime { exponent } => Some(x.powf(*exponent)),
            RewardSpec::Constant { value } => Some(*value),
            RewardSpec::ScaledUniform { .. } => None,
        }
    }

    /// `E[R̄ | X = x]`.
    fn conditional_mean(&self, x: f64) -> f64 {
        match self {
            RewardSpec::ScaledUniform { lo, hi } => 0.5 * (lo + hi),
            other => other.coupled(x).expect("coupled reward"),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        match self {
            RewardSpec::ScaledUniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            other => other.coupled(x).expect("coupled reward"),
        }
    }
}

/// Statistical model for one group of task servers.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupModel {
    label: String,
    completion: CompletionSpec,
    reward: RewardSpec,
}

/// One latent task draw, before any deadline is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskSample {
    pub completion: f64,
    pub base_reward: f64,
}

impl TaskSample {
    /// Time consumed and reward collected under deadline `t`.
    #[inline]
    pub fn censor(&self, t: f64) -> (f64, f64) {
        if self.completion <= t {
            (self.completion, self.base_reward)
        } else {
            (t, 0.0)
        }
    }
}

impl GroupModel {
    pub fn new(label: impl Into<String>, completion: CompletionSpec, reward: RewardSpec) -> Result<Self> {
        completion.validate()?;
        reward.validate()?;
        if let (CompletionSpec::Pareto { shape, .. }, RewardSpec::PowerOfTime { exponent }) =
            (&completion, &reward)
        {
            if exponent >= shape {
                return Err(Error::param(
                    "exponent",
                    format!("reward exponent {exponent} must be below the pareto shape {shape} (infinite mean reward)"),
                ));
            }
        }
        Ok(GroupModel {
            label: label.into(),
            completion,
            reward,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn completion(&self) -> &CompletionSpec {
        &self.completion
    }

    pub fn reward(&self) -> &RewardSpec {
        &self.reward
    }

    /// Draws a latent `(X, R̄)` pair. The completion time is drawn first.
    pub fn sample_task<R: Rng + ?Sized>(&self, rng: &mut R) -> TaskSample {
        let completion = self.completion.sample(rng);
        let base_reward = self.reward.sample(completion, rng);
        TaskSample {
            completion,
            base_reward,
        }
    }

    /// `μ(t) = E[min(X, t)]`.
    pub fn truncated_mean_time(&self, t: f64) -> Result<f64> {
        self.completion.truncated_mean(t)
    }

    /// `θ(t) = E[R̄·1{X ≤ t}]`.
    pub fn expected_reward(&self, t: f64) -> Result<f64> {
        check_deadline(t)?;
        let v = match (&self.completion, &self.reward) {
            (CompletionSpec::Pareto { scale, shape }, RewardSpec::PowerOfTime { exponent }) => {
                let (s, g, b) = (*scale, *shape, *exponent);
                if t <= s {
                    0.0
                } else {
                    g * s.powf(b) / (g - b) * -((b - g) * (t / s).ln()).exp_m1()
                }
            }
            (CompletionSpec::Exponential { rate }, RewardSpec::PowerOfTime { exponent }) => {
                let (lambda, b) = (*rate, *exponent);
                if b == 0.0 {
                    self.completion.cdf(t)
                } else {
                    quadrature::integrate(
                        |x| x.powf(b) * lambda * (-lambda * x).exp(),
                        0.0,
                        t,
                        QUADRATURE_TOL,
                    )
                    .0
                }
            }
            (CompletionSpec::Empirical { samples }, reward) => {
                samples
                    .iter()
                    .filter(|&&x| x <= t)
                    .map(|&x| reward.conditional_mean(x))
                    .sum::<f64>()
                    / samples.len() as f64
            }
            (CompletionSpec::Deterministic { value }, reward) => {
                if *value <= t {
                    reward.conditional_mean(*value)
                } else {
                    0.0
                }
            }
            // Reward independent of X: E[R̄]·P(X ≤ t).
            (completion, reward) => reward.conditional_mean(f64::NAN) * completion.cdf(t),
        };
        Ok(v)
    }

    /// `θ(t) / μ(t)`.
    pub fn reward_per_processing_time(&self, t: f64) -> Result<f64> {
        Ok(self.expected_reward(t)? / self.truncated_mean_time(t)?)
    }
}

/// Finite, strictly increasing set of admissible deadlines.
#[derive(Debug, Clone, PartialEq)]
pub struct DeadlineSet(Vec<f64>);

impl DeadlineSet {
    /// Sorts the input; rejects empty sets, duplicates and non-positive or
    /// non-finite entries.
    pub fn new(mut deadlines: Vec<f64>) -> Result<Self> {
        if deadlines.is_empty() {
            return Err(Error::param("deadlines", "must be non-empty"));
        }
        if let Some(&bad) = deadlines.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidDeadline(bad));
        }
        deadlines.sort_by(f64::total_cmp);
        if deadlines.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param("deadlines", "must not contain duplicates"));
        }
        Ok(DeadlineSet(deadlines))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> f64 {
        *self.0.last().expect("non-empty deadline set")
    }

    pub fn contains(&self, t: f64) -> bool {
        self.0.contains(&t)
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pareto(scale: f64, shape: f64) -> CompletionSpec {
        CompletionSpec::Pareto { scale, shape }
    }

    fn group(c: CompletionSpec, r: RewardSpec) -> GroupModel {
        GroupModel::new("g", c, r).unwrap()
    }

    fn power(exponent: f64) -> RewardSpec {
        RewardSpec::PowerOfTime { exponent }
    }

    // Independent route: μ(t) = ∫_0^t P(X > x) dx by quadrature of the survival function.
    fn survival_integral(c: &CompletionSpec, t: f64) -> f64 {
        let lo = c.support_min().min(t);
        lo + quadrature::integrate(|x| 1.0 - c.cdf(x), lo, t, 1e-12).0
    }

    #[test]
    fn degenerate_sample() {
        let g = group(
            CompletionSpec::Deterministic { value: 1.0 },
            RewardSpec::Constant { value: 1.0 },
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = g.sample_task(&mut rng);
        assert_eq!((s.completion, s.base_reward), (1.0, 1.0));
    }

    #[test]
    fn pareto_samples_respect_support_and_coupling() {
        let g = group(pareto(1.0, 1.2), power(0.6));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let s = g.sample_task(&mut rng);
            assert!(s.completion >= 1.0);
            assert_eq!(s.base_reward, s.completion.powf(0.6));
        }
    }

    #[test]
    fn pareto_sample_mean_matches_tail_index() {
        let c = pareto(1.0, 1.2);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| c.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 6.0).abs() <= 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn pareto_truncated_mean_examples() {
        let c = pareto(1.0, 1.2);
        assert_eq!(c.truncated_mean(1.0).unwrap(), 1.0);
        let v = c.truncated_mean(5.0).unwrap();
        assert!((v - (6.0 - 5.0 * 5f64.powf(-0.2))).abs() < 1e-12);
        assert!((v - 2.3762).abs() < 1e-4);
        let far = c.truncated_mean(1e12).unwrap();
        assert!((far - 6.0).abs() < 5e-2 && far < 6.0);
        assert!(c.truncated_mean(0.0).is_err());
        assert!(c.truncated_mean(-1.0).is_err());
    }

    #[test]
    fn pareto_unit_shape_uses_log_branch() {
        let c = pareto(2.0, 1.0);
        let v = c.truncated_mean(6.0).unwrap();
        assert!((v - (2.0 + 2.0 * 3f64.ln())).abs() < 1e-12);
        assert!((v - survival_integral(&c, 6.0)).abs() < 1e-9);
    }

    #[test]
    fn pareto_power_reward_examples() {
        let g1 = group(pareto(1.0, 1.2), power(0.6));
        assert_eq!(g1.expected_reward(1.0).unwrap(), 0.0);
        assert!((g1.expected_reward(1e12).unwrap() - 2.0).abs() < 1e-6);
        let g2 = group(pareto(1.0, 1.4), power(0.2));
        let v = g2.expected_reward(4.0).unwrap();
        assert!((v - 7.0 / 6.0 * (1.0 - 4f64.powf(-1.2))).abs() < 1e-12);
        assert!((v - 0.9456).abs() < 1e-4);
    }

    #[test]
    fn reward_rate_examples() {
        let g1 = group(pareto(1.0, 1.2), power(0.6));
        let r = g1.reward_per_processing_time(5.0).unwrap();
        assert!((r - 1.2386 / 2.3762).abs() < 1e-4);
        let det = group(
            CompletionSpec::Deterministic { value: 2.0 },
            RewardSpec::Constant { value: 1.0 },
        );
        assert_eq!(det.reward_per_processing_time(3.0).unwrap(), 0.5);
        let early = group(pareto(2.0, 1.5), power(0.5));
        assert_eq!(early.reward_per_processing_time(1.0).unwrap(), 0.0);
    }

    #[test]
    fn infinite_mean_reward_rejected() {
        assert!(GroupModel::new("g", pareto(1.0, 1.2), power(1.2)).is_err());
        assert!(GroupModel::new("g", pareto(1.0, 1.2), power(2.0)).is_err());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(pareto(1.0, -1.0).validate().is_err());
        assert!(pareto(0.0, 1.0).validate().is_err());
        assert!(CompletionSpec::Exponential { rate: f64::NAN }.validate().is_err());
        assert!(CompletionSpec::Empirical { samples: vec![] }.validate().is_err());
        assert!(CompletionSpec::Empirical {
            samples: vec![1.0, 0.0]
        }
        .validate()
        .is_err());
        assert!(RewardSpec::ScaledUniform { lo: 2.0, hi: 1.0 }.validate().is_err());
        assert!(RewardSpec::Constant { value: -1.0 }.validate().is_err());
    }

    #[test]
    fn exponential_power_reward_matches_gamma_identity() {
        // β = 1: ∫_0^t x λ e^{-λx} dx = (1 - e^{-λt}(1 + λt)) / λ.
        let lambda = 0.7;
        let g = group(CompletionSpec::Exponential { rate: lambda }, power(1.0));
        for t in [0.1, 1.0, 3.0, 20.0] {
            let want = (1.0 - (-lambda * t).exp() * (1.0 + lambda * t)) / lambda;
            assert!((g.expected_reward(t).unwrap() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn empirical_moments() {
        let c = CompletionSpec::Empirical {
            samples: vec![1.0, 2.0, 4.0],
        };
        let g = group(c.clone(), power(0.5));
        assert!((c.truncated_mean(3.0).unwrap() - 2.0).abs() < 1e-15);
        let want = (1.0 + 2f64.sqrt()) / 3.0;
        assert!((g.expected_reward(3.0).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn uniform_reward_is_independent() {
        let g = group(
            CompletionSpec::Exponential { rate: 1.0 },
            RewardSpec::ScaledUniform { lo: 1.0, hi: 3.0 },
        );
        let want = 2.0 * (1.0 - (-2.0f64).exp());
        assert!((g.expected_reward(2.0).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn deadline_set_validation() {
        let d = DeadlineSet::new(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(d.as_slice(), &[1.0, 2.0, 3.0]);
        assert_eq!(d.max(), 3.0);
        assert!(DeadlineSet::new(vec![]).is_err());
        assert!(DeadlineSet::new(vec![1.0, 1.0]).is_err());
        assert!(DeadlineSet::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(DeadlineSet::new(vec![0.0]).is_err());
    }

    fn completion_strategy() -> impl Strategy<Value = CompletionSpec> {
        prop_oneof![
            (0.2f64..3.0, 0.6f64..4.0).prop_map(|(scale, shape)| CompletionSpec::Pareto { scale, shape }),
            (0.1f64..5.0).prop_map(|rate| CompletionSpec::Exponential { rate }),
            (0.1f64..5.0).prop_map(|value| CompletionSpec::Deterministic { value }),
        ]
    }

    proptest! {
        #[test]
        fn truncated_mean_monotone_and_bounded(c in completion_strategy(), t1 in 0.01f64..50.0, dt in 0.0f64..50.0) {
            let t2 = t1 + dt;
            let m1 = c.truncated_mean(t1).unwrap();
            let m2 = c.truncated_mean(t2).unwrap();
            prop_assert!(m1 > 0.0 && m1 <= t1 * (1.0 + 1e-12));
            prop_assert!(m2 + 1e-12 >= m1);
            prop_assert!(m1 <= c.mean() * (1.0 + 1e-12));
        }

        #[test]
        fn truncated_mean_matches_survival_integral(c in completion_strategy(), t in 0.05f64..40.0) {
            let want = survival_integral(&c, t);
            prop_assert!((c.truncated_mean(t).unwrap() - want).abs() < 1e-8);
        }

        #[test]
        fn pareto_power_reward_matches_density_integral(
            scale in 0.2f64..3.0, shape in 0.8f64..4.0, frac in 0.0f64..0.95, t in 0.1f64..40.0,
        ) {
            let beta = frac * shape;
            let g = GroupModel::new("g", pareto(scale, shape), power(beta)).unwrap();
            let density = |x: f64| shape * scale.powf(shape) / x.powf(shape + 1.0);
            let want = if t <= scale {
                0.0
            } else {
                quadrature::integrate(|x| x.powf(beta) * density(x), scale, t, 1e-12).0
            };
            prop_assert!((g.expected_reward(t).unwrap() - want).abs() < 1e-8);
        }

        #[test]
        fn expected_reward_monotone(c in completion_strategy(), beta in 0.0f64..0.5, t1 in 0.05f64..30.0, dt in 0.0f64..30.0) {
            let g = GroupModel::new("g", c, power(beta)).unwrap();
            let a = g.expected_reward(t1).unwrap();
            let b = g.expected_reward(t1 + dt).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!(b + 1e-9 >= a);
        }
    }
}
