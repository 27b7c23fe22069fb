//! Optimal stationary randomized policy with known statistics.
//!
//! Each group is served with a single deterministic deadline `t_k*` that
//! maximizes its reward per processing time `r_k* = θ_k(t)/μ_k(t)`. The time
//! budget is then split into fractions `φ_k = (U_k')^{-1}(λ/r_k*)/r_k*` with
//! the multiplier `λ` chosen so the fractions sum to one. For α-fair
//! utilities the split has a closed form, which [`alpha_fair_closed_form`]
//! evaluates directly; [`solve_fractions`] finds `λ` by bisection and works
//! for any group-specific α > 0.
//!
//! A group whose reward is zero at every deadline cannot enter the KKT system.
//! It is assigned `φ = 0`, listed in [`OfflineSolution::excluded`], and its
//! utility is evaluated at the rate floor.

use crate::distributions::{DeadlineSet, GroupModel};
use crate::error::{Error, Result};
use crate::utility::{total_utility, UtilitySpec};

const LAMBDA_LO: f64 = 1e-12;
const LAMBDA_TOL: f64 = 1e-10;
const MAX_BISECTION_STEPS: usize = 4000;

/// Per-group quantities at the optimal deadline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupStats {
    pub group_index: usize,
    pub t_star: f64,
    pub r_star: f64,
    pub mu_star: f64,
    pub theta_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineSolution {
    pub stats: Vec<GroupStats>,
    /// Fraction of the time budget spent on each group.
    pub phi: Vec<f64>,
    /// Probability of dispatching a task to each group.
    pub selection: Vec<f64>,
    pub lambda: f64,
    /// `Σ_k U_k(r_k*·φ_k)`.
    pub utility_rate: f64,
    pub floored: bool,
    pub excluded: Vec<usize>,
}

impl OfflineSolution {
    /// Asymptotic reward rate of each group, `r_k*·φ_k`.
    pub fn reward_rates(&self) -> Vec<f64> {
        self.stats
            .iter()
            .zip(&self.phi)
            .map(|(s, p)| s.r_star * p)
            .collect()
    }

    pub fn deadlines(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.t_star).collect()
    }
}

/// `θ(k, t)` and `μ(k, t)` tabulated over a deadline set.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    pub deadlines: Vec<f64>,
    /// `theta[k][j] = θ(k, t_j)`.
    pub theta: Vec<Vec<f64>>,
    /// `mu[k][j] = μ(k, t_j)`.
    pub mu: Vec<Vec<f64>>,
}

impl MomentTable {
    pub fn new(groups: &[GroupModel], deadlines: &DeadlineSet) -> Result<Self> {
        let mut theta = Vec::with_capacity(groups.len());
        let mut mu = Vec::with_capacity(groups.len());
        for g in groups {
            theta.push(
                deadlines
                    .iter()
                    .map(|t| g.expected_reward(t))
                    .collect::<Result<Vec<_>>>()?,
            );
            mu.push(
                deadlines
                    .iter()
                    .map(|t| g.truncated_mean_time(t))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(MomentTable {
            deadlines: deadlines.as_slice().to_vec(),
            theta,
            mu,
        })
    }

    pub fn rate(&self, k: usize, j: usize) -> f64 {
        self.theta[k][j] / self.mu[k][j]
    }
}

/// Scans the deadline set for the largest `θ(t)/μ(t)`; ties go to the
/// smallest deadline.
pub fn optimal_deadline(
    group_index: usize,
    group: &GroupModel,
    deadlines: &DeadlineSet,
) -> Result<GroupStats> {
    let mut best: Option<GroupStats> = None;
    for t in deadlines.iter() {
        let theta = group.expected_reward(t)?;
        let mu = group.truncated_mean_time(t)?;
        let r = theta / mu;
        if best.is_none_or(|b| r > b.r_star) {
            best = Some(GroupStats {
                group_index,
                t_star: t,
                r_star: r,
                mu_star: mu,
                theta_star: theta,
            });
        }
    }
    match best {
        Some(b) if b.r_star > 0.0 => Ok(b),
        _ => Err(Error::NoReward { group: group_index }),
    }
}

fn stats_or_zero(group_index: usize, group: &GroupModel, deadlines: &DeadlineSet) -> Result<GroupStats> {
    match optimal_deadline(group_index, group, deadlines) {
        Err(Error::NoReward { .. }) => {
            let t = deadlines.as_slice()[0];
            Ok(GroupStats {
                group_index,
                t_star: t,
                r_star: 0.0,
                mu_star: group.truncated_mean_time(t)?,
                theta_star: 0.0,
            })
        }
        other => other,
    }
}

/// Per-group statistics for an environment; zero-reward groups get
/// `r_star = 0` at the smallest deadline instead of an error.
pub fn group_stats(groups: &[GroupModel], deadlines: &DeadlineSet) -> Result<Vec<GroupStats>> {
    groups
        .iter()
        .enumerate()
        .map(|(k, g)| stats_or_zero(k, g, deadlines))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fractions {
    pub phi: Vec<f64>,
    pub lambda: f64,
    pub excluded: Vec<usize>,
}

fn check_shapes(utilities: &[UtilitySpec], stats: &[GroupStats]) -> Result<()> {
    if utilities.len() != stats.len() || stats.is_empty() {
        return Err(Error::param(
            "utilities",
            format!("{} utilities for {} groups", utilities.len(), stats.len()),
        ));
    }
    Ok(())
}

/// Bisection on the multiplier `λ` for the KKT fractions.
///
/// `Σ_k φ_k(λ)` is strictly decreasing in `λ`. The bracket starts at
/// `[1e-12, 1]` and its upper end doubles until the sum drops below one.
pub fn solve_fractions(utilities: &[UtilitySpec], stats: &[GroupStats]) -> Result<Fractions> {
    check_shapes(utilities, stats)?;
    if let Some(u) = utilities.iter().find(|u| u.is_linear()) {
        return Err(Error::param(
            "alpha",
            format!("bisection needs alpha > 0, got {}", u.alpha()),
        ));
    }
    let active: Vec<usize> = (0..stats.len()).filter(|&k| stats[k].r_star > 0.0).collect();
    let excluded: Vec<usize> = (0..stats.len()).filter(|&k| stats[k].r_star <= 0.0).collect();
    if active.is_empty() {
        return Err(Error::NoReward { group: 0 });
    }

    let fractions = |lambda: f64| -> Vec<f64> {
        let mut phi = vec![0.0; stats.len()];
        for &k in &active {
            let r = stats[k].r_star;
            phi[k] = utilities[k]
                .inverse_marginal(lambda / r)
                .expect("positive argument, alpha > 0")
                / r;
        }
        phi
    };
    let total = |lambda: f64| fractions(lambda).iter().sum::<f64>();

    let mut lo = LAMBDA_LO;
    if total(lo) < 1.0 {
        return Err(Error::Numerical(format!(
            "fractions sum below one already at lambda = {lo}"
        )));
    }
    let mut hi = 1.0;
    while total(hi) >= 1.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numerical("could not bracket the multiplier".into()));
        }
    }

    for _ in 0..MAX_BISECTION_STEPS {
        let mid = (lo * hi).sqrt();
        if !(mid > lo && mid < hi) {
            break;
        }
        let s = total(mid);
        if (s - 1.0).abs() <= LAMBDA_TOL {
            return Ok(Fractions {
                phi: fractions(mid),
                lambda: mid,
                excluded,
            });
        }
        if s > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numerical(format!(
        "bisection on lambda did not converge (bracket [{lo}, {hi}])"
    )))
}

/// Dispatch probabilities that realize the time shares `phi`:
/// `p_k ∝ φ_k/μ_k*`.
pub fn selection_from_fractions(phi: &[f64], stats: &[GroupStats]) -> Vec<f64> {
    let raw: Vec<f64> = phi.iter().zip(stats).map(|(p, s)| p / s.mu_star).collect();
    let norm: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / norm).collect()
}

fn common_alpha(utilities: &[UtilitySpec]) -> Result<f64> {
    let alpha = utilities[0].alpha();
    if utilities.iter().any(|u| u.alpha() != alpha) {
        return Err(Error::param("alpha", "closed form needs a common alpha"));
    }
    Ok(alpha)
}

/// Direct evaluation of the α-fair optimum.
///
/// `φ_k ∝ (r_k*)^{1/α−1}·w_k^{1/α}`; for `α = 0` every unit of time goes to
/// the group with the largest `w_k·r_k*` (ties to the smallest index).
pub fn alpha_fair_closed_form(utilities: &[UtilitySpec], stats: &[GroupStats]) -> Result<OfflineSolution> {
    check_shapes(utilities, stats)?;
    let alpha = common_alpha(utilities)?;
    let k = stats.len();
    let excluded: Vec<usize> = (0..k).filter(|&i| stats[i].r_star <= 0.0).collect();
    if excluded.len() == k {
        return Err(Error::NoReward { group: 0 });
    }

    let (phi, lambda) = if alpha == 0.0 {
        let mut best = 0;
        for i in 1..k {
            if utilities[i].weight() * stats[i].r_star > utilities[best].weight() * stats[best].r_star {
                best = i;
            }
        }
        let mut phi = vec![0.0; k];
        phi[best] = 1.0;
        (phi, utilities[best].weight() * stats[best].r_star)
    } else {
        let inv = 1.0 / alpha;
        let raw: Vec<f64> = (0..k)
            .map(|i| {
                if stats[i].r_star > 0.0 {
                    stats[i].r_star.powf(inv - 1.0) * utilities[i].weight().powf(inv)
                } else {
                    0.0
                }
            })
            .collect();
        let norm: f64 = raw.iter().sum();
        (raw.iter().map(|x| x / norm).collect(), norm.powf(alpha))
    };

    let selection = selection_from_fractions(&phi, stats);
    let rates: Vec<f64> = stats.iter().zip(&phi).map(|(s, p)| s.r_star * p).collect();
    let (utility_rate, floored) = total_utility(utilities, &rates);
    Ok(OfflineSolution {
        stats: stats.to_vec(),
        phi,
        selection,
        lambda,
        utility_rate,
        floored,
        excluded,
    })
}

/// Optimal policy for a general family of utilities (group-specific α).
///
/// Uses the closed form when α is common, otherwise bisection; linear
/// utilities always take the closed-form path.
pub fn solve_general(utilities: &[UtilitySpec], stats: &[GroupStats]) -> Result<OfflineSolution> {
    check_shapes(utilities, stats)?;
    if common_alpha(utilities).is_ok() {
        return alpha_fair_closed_form(utilities, stats);
    }
    let Fractions {
        phi,
        lambda,
        excluded,
    } = solve_fractions(utilities, stats)?;
    let selection = selection_from_fractions(&phi, stats);
    let rates: Vec<f64> = stats.iter().zip(&phi).map(|(s, p)| s.r_star * p).collect();
    let (utility_rate, floored) = total_utility(utilities, &rates);
    Ok(OfflineSolution {
        stats: stats.to_vec(),
        phi,
        selection,
        lambda,
        utility_rate,
        floored,
        excluded,
    })
}

/// Full offline pipeline: optimal deadlines, then the optimal split.
pub fn solve(
    groups: &[GroupModel],
    utilities: &[UtilitySpec],
    deadlines: &DeadlineSet,
) -> Result<OfflineSolution> {
    let stats = group_stats(groups, deadlines)?;
    solve_general(utilities, &stats)
}

/// A probability distribution over `(group, deadline)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SrpDistribution {
    deadlines: Vec<f64>,
    /// `probs[k][j] = P(k, t_j)`.
    probs: Vec<Vec<f64>>,
}

impl SrpDistribution {
    pub fn new(deadlines: &DeadlineSet, probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|row| row.len() != deadlines.len()) {
            return Err(Error::param(
                "probs",
                "must have one row per group and one column per deadline",
            ));
        }
        if probs.iter().flatten().any(|&p| !(p.is_finite() && p >= 0.0)) {
            return Err(Error::param("probs", "entries must be finite and non-negative"));
        }
        let total: f64 = probs.iter().flatten().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param("probs", format!("must sum to 1, got {total}")));
        }
        Ok(SrpDistribution {
            deadlines: deadlines.as_slice().to_vec(),
            probs,
        })
    }

    /// Group `k` is dispatched with probability `selection[k]` and always
    /// served with deadline `per_group[k]`.
    pub fn from_selection(deadlines: &DeadlineSet, selection: &[f64], per_group: &[f64]) -> Result<Self> {
        if selection.len() != per_group.len() {
            return Err(Error::param(
                "selection",
                "length differs from the per-group deadlines",
            ));
        }
        let mut probs = vec![vec![0.0; deadlines.len()]; selection.len()];
        for (k, (&p, &t)) in selection.iter().zip(per_group).enumerate() {
            let j = deadlines
                .as_slice()
                .iter()
                .position(|&d| d == t)
                .ok_or(Error::InvalidDeadline(t))?;
            probs[k][j] = p;
        }
        Self::new(deadlines, probs)
    }

    /// The SRP that realizes an offline solution.
    pub fn from_solution(deadlines: &DeadlineSet, solution: &OfflineSolution) -> Result<Self> {
        Self::from_selection(deadlines, &solution.selection, &solution.deadlines())
    }

    pub fn groups(&self) -> usize {
        self.probs.len()
    }

    pub fn deadlines(&self) -> &[f64] {
        &self.deadlines
    }

    pub fn prob(&self, k: usize, j: usize) -> f64 {
        self.probs[k][j]
    }

    /// Non-zero `(group, deadline, probability)` entries in row-major order.
    pub fn entries(&self) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for (k, row) in self.probs.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    out.push((k, self.deadlines[j], p));
                }
            }
        }
        out
    }

    /// Long-run reward per unit time of each group, `ρ_k(P)`.
    pub fn reward_rates(&self, table: &MomentTable) -> Vec<f64> {
        let mut denom = 0.0;
        let mut numer = vec![0.0; self.probs.len()];
        for (k, row) in self.probs.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                denom += p * table.mu[k][j];
                numer[k] += p * table.theta[k][j];
            }
        }
        numer.into_iter().map(|n| n / denom).collect()
    }
}

/// `Σ_k U_k(ρ_k(P))` with the floor flag.
pub fn utility_rate_of_srp(
    srp: &SrpDistribution,
    groups: &[GroupModel],
    utilities: &[UtilitySpec],
) -> Result<(f64, bool)> {
    if srp.groups() != groups.len() || utilities.len() != groups.len() {
        return Err(Error::param("srp", "group count mismatch"));
    }
    let deadlines = DeadlineSet::new(srp.deadlines.clone())?;
    let table = MomentTable::new(groups, &deadlines)?;
    Ok(total_utility(utilities, &srp.reward_rates(&table)))
}
