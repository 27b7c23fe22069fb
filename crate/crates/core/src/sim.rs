//! Budget-constrained episodes and Monte Carlo aggregation.
//!
//! An episode dispatches tasks until the consumed time first exceeds the
//! budget `B`. The task that crosses `B` runs to `min(X, T)` and its reward is
//! kept, so the number of tasks is the first-passage index
//! `N(B) = inf{n : Σ_{i≤n} min(X_i, T_i) > B}` and the reward rate of group
//! `k` is its total reward divided by `B`.
//!
//! Trial `i` of a Monte Carlo run is seeded with `base_seed + i` and owns its
//! random stream and learner state, so summaries do not depend on how trials
//! are scheduled across threads.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distributions::{DeadlineSet, GroupModel, TaskSample};
use crate::error::{Error, Result};
use crate::offline::{self, OfflineSolution, SrpDistribution};
use crate::olum::{budget_matched_v, OlumParams, OlumState};
use crate::utility::{total_utility, UtilitySpec};

/// Groups, their utilities and the admissible deadlines.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub groups: Vec<GroupModel>,
    pub utilities: Vec<UtilitySpec>,
    pub deadlines: DeadlineSet,
}

impl Environment {
    pub fn new(groups: Vec<GroupModel>, utilities: Vec<UtilitySpec>, deadlines: DeadlineSet) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::param("groups", "need at least one group"));
        }
        if groups.len() != utilities.len() {
            return Err(Error::param(
                "utilities",
                format!("{} utilities for {} groups", utilities.len(), groups.len()),
            ));
        }
        for (i, g) in groups.iter().enumerate() {
            if groups[..i].iter().any(|h| h.label() == g.label()) {
                return Err(Error::param(
                    "label",
                    format!("duplicate group label `{}`", g.label()),
                ));
            }
        }
        Ok(Environment {
            groups,
            utilities,
            deadlines,
        })
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn offline(&self) -> Result<OfflineSolution> {
        offline::solve(&self.groups, &self.utilities, &self.deadlines)
    }

    pub fn oracle_srp(&self) -> Result<SrpDistribution> {
        SrpDistribution::from_solution(&self.deadlines, &self.offline()?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Srp(SrpDistribution),
    /// The stationary policy realizing the offline optimum.
    OracleSrp(SrpDistribution),
    Olum(OlumParams),
}

impl Policy {
    pub fn oracle(env: &Environment) -> Result<Self> {
        Ok(Policy::OracleSrp(env.oracle_srp()?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Policy::Srp(_) => "srp",
            Policy::OracleSrp(_) => "oracle_srp",
            Policy::Olum(_) => "olum",
        }
    }

    pub fn v(&self) -> Option<f64> {
        match self {
            Policy::Olum(p) => Some(p.v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EpisodeOptions {
    /// Cut the budget-crossing task at `B` and forfeit its reward.
    pub truncate_last: bool,
    /// Record a per-task trace (OLUM only).
    pub trace: bool,
}

/// One task of an OLUM trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub task: u64,
    pub group: usize,
    pub deadline: f64,
    pub elapsed: f64,
    pub reward: f64,
    /// Queues after the update.
    pub q: Vec<f64>,
    /// Auxiliary rates used in the update.
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub budget: f64,
    pub n_tasks: u64,
    pub tasks_per_group: Vec<u64>,
    pub per_group_reward: Vec<f64>,
    pub per_group_time: Vec<f64>,
    pub reward_rates: Vec<f64>,
    pub time_shares: Vec<f64>,
    pub utility: f64,
    pub floored: bool,
    /// Time consumed by the final (budget-crossing) task.
    pub last_elapsed: f64,
    /// Time average of `Σ_k Q_k` over tasks started in `[B/2, B]` (OLUM only).
    pub mean_queue_second_half: Option<f64>,
    pub final_q: Option<Vec<f64>>,
    pub trace: Vec<TraceRow>,
}

impl EpisodeResult {
    pub fn total_time(&self) -> f64 {
        self.per_group_time.iter().sum()
    }
}

enum Driver<'a> {
    Srp {
        entries: Vec<(usize, f64)>,
        sampler: WeightedIndex<f64>,
    },
    Olum {
        state: OlumState,
        params: &'a OlumParams,
    },
}

fn trial_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs one episode seeded with `seed`.
pub fn run_episode(env: &Environment, policy: &Policy, budget: f64, seed: u64) -> Result<EpisodeResult> {
    run_episode_with(env, policy, budget, seed, EpisodeOptions::default())
}

pub fn run_episode_with(
    env: &Environment,
    policy: &Policy,
    budget: f64,
    seed: u64,
    options: EpisodeOptions,
) -> Result<EpisodeResult> {
    let mut rng = trial_rng(seed);
    simulate(env, policy, budget, &mut rng, options)
}

fn simulate<R: Rng>(
    env: &Environment,
    policy: &Policy,
    budget: f64,
    rng: &mut R,
    options: EpisodeOptions,
) -> Result<EpisodeResult> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::param(
            "B",
            format!("budget must be positive and finite, got {budget}"),
        ));
    }
    let k = env.k();
    let mut driver = match policy {
        Policy::Srp(p) | Policy::OracleSrp(p) => {
            if p.groups() != k {
                return Err(Error::param("selection", "group count mismatch"));
            }
            let (entries, weights): (Vec<_>, Vec<_>) =
                p.entries().into_iter().map(|(g, t, w)| ((g, t), w)).unzip();
            let sampler =
                WeightedIndex::new(&weights).map_err(|e| Error::param("selection", e.to_string()))?;
            Driver::Srp { entries, sampler }
        }
        Policy::Olum(params) => {
            params.validate()?;
            Driver::Olum {
                state: OlumState::new(k, env.deadlines.clone(), params.tau)?,
                params,
            }
        }
    };

    let mut per_group_reward = vec![0.0; k];
    let mut per_group_time = vec![0.0; k];
    let mut tasks_per_group = vec![0u64; k];
    let mut consumed = 0.0;
    let mut n_tasks = 0u64;
    let mut last_elapsed = 0.0;
    let mut queue_area = 0.0;
    let mut queue_time = 0.0;
    let mut trace = Vec::new();

    while consumed <= budget {
        n_tasks += 1;
        let (group, elapsed, reward) = match &mut driver {
            Driver::Srp { entries, sampler } => {
                let (g, t) = entries[sampler.sample(rng)];
                let (elapsed, reward) = env.groups[g].sample_task(rng).censor(t);
                let (elapsed, reward) = budget_cut(options, consumed, budget, elapsed, reward);
                (g, elapsed, reward)
            }
            Driver::Olum { state, params } => {
                let (g, t) = state.decide();
                let vector: Vec<TaskSample> = env.groups.iter().map(|m| m.sample_task(rng)).collect();
                let (elapsed, reward) = vector[g].censor(t);
                let (elapsed, reward) = budget_cut(options, consumed, budget, elapsed, reward);
                if consumed >= budget / 2.0 {
                    queue_area += state.q().iter().sum::<f64>() * elapsed;
                    queue_time += elapsed;
                }
                let gammas = state.auxiliaries(&env.utilities, params);
                let task = state.stage();
                state.update_queues(g, elapsed, reward, &gammas)?;
                state.ingest_feedback(task, vector)?;
                if options.trace {
                    trace.push(TraceRow {
                        task,
                        group: g,
                        deadline: t,
                        elapsed,
                        reward,
                        q: state.q().to_vec(),
                        gamma: gammas,
                    });
                }
                (g, elapsed, reward)
            }
        };
        per_group_reward[group] += reward;
        per_group_time[group] += elapsed;
        tasks_per_group[group] += 1;
        consumed += elapsed;
        last_elapsed = elapsed;
        if options.truncate_last && consumed >= budget {
            break;
        }
    }

    let reward_rates: Vec<f64> = per_group_reward.iter().map(|r| r / budget).collect();
    let total: f64 = per_group_time.iter().sum();
    let time_shares = per_group_time.iter().map(|t| t / total).collect();
    let (utility, floored) = total_utility(&env.utilities, &reward_rates);
    let (mean_queue_second_half, final_q) = match &driver {
        Driver::Olum { state, .. } => (
            Some(if queue_time > 0.0 {
                queue_area / queue_time
            } else {
                0.0
            }),
            Some(state.q().to_vec()),
        ),
        Driver::Srp { .. } => (None, None),
    };
    Ok(EpisodeResult {
        budget,
        n_tasks,
        tasks_per_group,
        per_group_reward,
        per_group_time,
        reward_rates,
        time_shares,
        utility,
        floored,
        last_elapsed,
        mean_queue_second_half,
        final_q,
        trace,
    })
}

/// With `truncate_last`, the task that crosses the budget is stopped at `B`
/// and earns nothing.
fn budget_cut(options: EpisodeOptions, consumed: f64, budget: f64, elapsed: f64, reward: f64) -> (f64, f64) {
    if options.truncate_last && consumed + elapsed > budget {
        (budget - consumed, 0.0)
    } else {
        (elapsed, reward)
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub policy: &'static str,
    pub budget: f64,
    pub v: Option<f64>,
    pub trials: usize,
    pub mean_reward_rates: Vec<f64>,
    pub se_reward_rates: Vec<f64>,
    pub mean_time_shares: Vec<f64>,
    pub se_time_shares: Vec<f64>,
    /// Mean and standard error of the per-trial utilities.
    pub mean_utility: f64,
    pub se_utility: f64,
    /// `Σ_k U_k(mean reward rate of k)`, the utility of the policy.
    pub utility: f64,
    /// Offline optimum minus `utility`.
    pub regret: f64,
    /// Delta-method standard error of `utility` (and of `regret`).
    pub regret_se: f64,
    pub opt_utility_rate: f64,
    pub floored: bool,
    pub floored_trials: usize,
    pub mean_tasks: f64,
    pub mean_queue_second_half: Option<f64>,
}

/// Runs `trials` episodes and aggregates them.
///
/// The reduction happens in trial order after all episodes finish.
pub fn monte_carlo(
    env: &Environment,
    policy: &Policy,
    budget: f64,
    trials: usize,
    base_seed: u64,
    options: EpisodeOptions,
) -> Result<McSummary> {
    if trials < 2 {
        return Err(Error::param("trials", "need at least two trials"));
    }
    let opt = env.offline()?;
    let episodes: Vec<EpisodeResult> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let opts = EpisodeOptions {
                trace: false,
                ..options
            };
            run_episode_with(env, policy, budget, base_seed.wrapping_add(i), opts)
        })
        .collect::<Result<_>>()?;
    Ok(summarize(env, policy, budget, &episodes, opt.utility_rate))
}

pub fn summarize(
    env: &Environment,
    policy: &Policy,
    budget: f64,
    episodes: &[EpisodeResult],
    opt_utility_rate: f64,
) -> McSummary {
    let k = env.k();
    let column = |f: &dyn Fn(&EpisodeResult) -> f64| episodes.iter().map(f).collect::<Vec<_>>();
    let (mut mean_reward_rates, mut se_reward_rates) = (Vec::new(), Vec::new());
    let (mut mean_time_shares, mut se_time_shares) = (Vec::new(), Vec::new());
    for g in 0..k {
        let (m, s) = mean_se(&column(&|e| e.reward_rates[g]));
        mean_reward_rates.push(m);
        se_reward_rates.push(s);
        let (m, s) = mean_se(&column(&|e| e.time_shares[g]));
        mean_time_shares.push(m);
        se_time_shares.push(s);
    }
    let (mean_utility, se_utility) = mean_se(&column(&|e| e.utility));
    let (utility, floored) = total_utility(&env.utilities, &mean_reward_rates);

    // Linearize Σ U_k(mean r_k) around the means; the per-trial projections
    // give the standard error of the plug-in utility.
    let marginals: Vec<f64> = env
        .utilities
        .iter()
        .zip(&mean_reward_rates)
        .map(|(u, &m)| u.marginal(m).unwrap_or(0.0))
        .collect();
    let projected = column(&|e| e.reward_rates.iter().zip(&marginals).map(|(r, d)| r * d).sum());
    let (_, regret_se) = mean_se(&projected);

    let mean_queue_second_half = episodes
        .iter()
        .map(|e| e.mean_queue_second_half)
        .collect::<Option<Vec<f64>>>()
        .map(|q| q.iter().sum::<f64>() / q.len() as f64);

    McSummary {
        policy: policy.name(),
        budget,
        v: policy.v(),
        trials: episodes.len(),
        mean_reward_rates,
        se_reward_rates,
        mean_time_shares,
        se_time_shares,
        mean_utility,
        se_utility,
        utility,
        regret: opt_utility_rate - utility,
        regret_se,
        opt_utility_rate,
        floored,
        floored_trials: episodes.iter().filter(|e| e.floored).count(),
        mean_tasks: episodes.iter().map(|e| e.n_tasks as f64).sum::<f64>() / episodes.len() as f64,
        mean_queue_second_half,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretPoint {
    pub budget: f64,
    pub v: f64,
    pub regret: f64,
    pub stderr: f64,
    /// Non-positive regret (Monte Carlo noise); left out of the slope fit.
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub points: Vec<RegretPoint>,
    /// Least-squares slope of `ln regret` against `ln B`.
    pub slope: Option<f64>,
}

/// Least-squares slope of `y` on `x`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Regret of OLUM over a grid of budgets.
///
/// Unless `v_override` is set, each budget uses `V = √(B / ln B)`.
pub fn regret_curve(
    env: &Environment,
    template: &OlumParams,
    v_override: Option<f64>,
    budgets: &[f64],
    trials: usize,
    base_seed: u64,
    options: EpisodeOptions,
) -> Result<RegretCurve> {
    if budgets.len() < 4 {
        return Err(Error::param("budgets", "need at least four budgets"));
    }
    if budgets.windows(2).any(|w| !(w[1] > w[0])) || !(budgets[0] > 1.0) {
        return Err(Error::param("budgets", "must be strictly increasing and above 1"));
    }
    if (budgets[budgets.len() - 1] / budgets[0]).log10() < 1.5 - 1e-9 {
        return Err(Error::param("budgets", "must span at least 1.5 decades"));
    }
    let mut points = Vec::with_capacity(budgets.len());
    for &b in budgets {
        let mut params = *template;
        params.v = v_override.unwrap_or_else(|| budget_matched_v(b));
        let s = monte_carlo(env, &Policy::Olum(params), b, trials, base_seed, options)?;
        points.push(RegretPoint {
            budget: b,
            v: params.v,
            regret: s.regret,
            stderr: s.regret_se,
            excluded: !(s.regret > 0.0),
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| !p.excluded)
        .map(|p| (p.budget.ln(), p.regret.ln()))
        .unzip();
    Ok(RegretCurve {
        slope: ols_slope(&xs, &ys),
        points,
    })
}

/// Runs `f` on a dedicated pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{CompletionSpec, RewardSpec};

    fn unit_env() -> Environment {
        let g = GroupModel::new(
            "unit",
            CompletionSpec::Deterministic { value: 1.0 },
            RewardSpec::Constant { value: 1.0 },
        )
        .unwrap();
        Environment::new(
            vec![g],
            vec![UtilitySpec::new(1.0, 1.0).unwrap()],
            DeadlineSet::new(vec![1.0]).unwrap(),
        )
        .unwrap()
    }

    fn pareto_env(alpha: f64) -> Environment {
        let g = |label: &str, shape, beta| {
            GroupModel::new(
                label,
                CompletionSpec::Pareto { scale: 1.0, shape },
                RewardSpec::PowerOfTime { exponent: beta },
            )
            .unwrap()
        };
        Environment::new(
            vec![g("g1", 1.2, 0.6), g("g2", 1.4, 0.2)],
            vec![UtilitySpec::new(alpha, 1.0).unwrap(); 2],
            DeadlineSet::new(vec![1.5, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0, 15.0, 20.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn overshoot_task_is_included() {
        let env = unit_env();
        let p = SrpDistribution::new(&env.deadlines, vec![vec![1.0]]).unwrap();
        let r = run_episode(&env, &Policy::Srp(p.clone()), 10.0, 0).unwrap();
        assert_eq!(r.n_tasks, 11);
        assert_eq!(r.per_group_reward[0], 11.0);
        assert!((r.reward_rates[0] - 1.1).abs() < 1e-15);

        let opts = EpisodeOptions {
            truncate_last: true,
            trace: false,
        };
        let r = run_episode_with(&env, &Policy::Srp(p), 10.5, 0, opts).unwrap();
        assert_eq!(r.n_tasks, 11);
        assert_eq!(r.per_group_reward[0], 10.0);
        assert!((r.total_time() - 10.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_selection_starves_second_group() {
        let env = pareto_env(1.0);
        let p = SrpDistribution::from_selection(&env.deadlines, &[1.0, 0.0], &[7.0, 7.0]).unwrap();
        let r = run_episode(&env, &Policy::Srp(p), 500.0, 3).unwrap();
        assert_eq!(r.per_group_reward[1], 0.0);
        assert_eq!(r.per_group_time[1], 0.0);
        assert_eq!(r.tasks_per_group[1], 0);
        assert!(r.floored);
    }

    #[test]
    fn first_passage_bracketing() {
        let env = pareto_env(1.0);
        let policies = [
            Policy::oracle(&env).unwrap(),
            Policy::Olum(OlumParams::new(20.0, 1).unwrap()),
        ];
        for policy in &policies {
            for seed in 0..20 {
                let r = run_episode(&env, policy, 300.0, seed).unwrap();
                let total = r.total_time();
                assert!(total > 300.0);
                assert!(total - r.last_elapsed <= 300.0);
                for k in 0..2 {
                    assert!((r.reward_rates[k] - r.per_group_reward[k] / 300.0).abs() == 0.0);
                }
            }
        }
    }

    #[test]
    fn interrupted_tasks_earn_nothing() {
        // Every task overruns its deadline.
        let g = GroupModel::new(
            "slow",
            CompletionSpec::Deterministic { value: 5.0 },
            RewardSpec::Constant { value: 1.0 },
        )
        .unwrap();
        let env = Environment::new(
            vec![g],
            vec![UtilitySpec::new(0.0, 1.0).unwrap()],
            DeadlineSet::new(vec![2.0, 6.0]).unwrap(),
        )
        .unwrap();
        let p = SrpDistribution::new(&env.deadlines, vec![vec![1.0, 0.0]]).unwrap();
        let r = run_episode(&env, &Policy::Srp(p), 20.0, 0).unwrap();
        assert_eq!(r.per_group_reward[0], 0.0);
        assert_eq!(r.n_tasks, 11);
    }

    #[test]
    fn olum_trace_is_consistent() {
        let env = pareto_env(1.0);
        let opts = EpisodeOptions {
            truncate_last: false,
            trace: true,
        };
        let r = run_episode_with(
            &env,
            &Policy::Olum(OlumParams::new(20.0, 1).unwrap()),
            200.0,
            1,
            opts,
        )
        .unwrap();
        assert_eq!(r.trace.len() as u64, r.n_tasks);
        let credited: f64 = r.trace.iter().map(|t| t.reward).sum();
        let total: f64 = r.per_group_reward.iter().sum();
        assert!((credited - total).abs() < 1e-9);
        assert!(r.trace.iter().all(|t| t.q.iter().all(|&q| q >= 0.0)));
        assert_eq!(r.trace[0].group, 0);
        assert_eq!(r.trace[0].deadline, 20.0);
        assert_eq!(r.trace[1].group, 1);
    }

    #[test]
    fn single_arm_olum_always_picks_it() {
        let env = unit_env();
        let opts = EpisodeOptions {
            truncate_last: false,
            trace: true,
        };
        let r = run_episode_with(
            &env,
            &Policy::Olum(OlumParams::new(5.0, 1).unwrap()),
            50.0,
            0,
            opts,
        )
        .unwrap();
        assert!(r.trace.iter().all(|t| t.group == 0 && t.deadline == 1.0));
        assert_eq!(r.n_tasks, 51);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let env = pareto_env(1.0);
        let policy = Policy::Olum(OlumParams::new(20.0, 1).unwrap());
        let a = monte_carlo(&env, &policy, 300.0, 16, 42, EpisodeOptions::default()).unwrap();
        let b = with_threads(3, || {
            monte_carlo(&env, &policy, 300.0, 16, 42, EpisodeOptions::default())
        })
        .unwrap()
        .unwrap();
        assert_eq!(a, b);
        assert!(monte_carlo(&env, &policy, 300.0, 1, 42, EpisodeOptions::default()).is_err());
    }

    #[test]
    fn stderr_shrinks_with_trials() {
        let env = pareto_env(1.0);
        let policy = Policy::oracle(&env).unwrap();
        let small = monte_carlo(&env, &policy, 400.0, 200, 1, EpisodeOptions::default()).unwrap();
        let large = monte_carlo(&env, &policy, 400.0, 800, 1, EpisodeOptions::default()).unwrap();
        let ratio = small.se_time_shares[1] / large.se_time_shares[1];
        assert!((1.5..2.7).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn regret_curve_preconditions() {
        let env = pareto_env(1.0);
        let p = OlumParams::new(1.0, 1).unwrap();
        let o = EpisodeOptions::default();
        assert!(regret_curve(&env, &p, None, &[100.0, 200.0, 400.0], 2, 0, o).is_err());
        assert!(regret_curve(&env, &p, None, &[100.0, 200.0, 400.0, 800.0], 2, 0, o).is_err());
        assert!(regret_curve(&env, &p, None, &[100.0, 300.0, 200.0, 4000.0], 2, 0, o).is_err());
    }

    #[test]
    fn single_arm_regret_is_order_one_over_b() {
        // No learning needed: regret only reflects the overshoot term, which
        // is exactly -ln(1 + 1/B) here.
        let env = unit_env();
        let p = OlumParams::new(1.0, 1).unwrap();
        let curve = regret_curve(
            &env,
            &p,
            None,
            &[100.0, 400.0, 1600.0, 3200.0],
            2,
            0,
            EpisodeOptions::default(),
        )
        .unwrap();
        for pt in &curve.points {
            assert!((pt.regret + (1.0 + 1.0 / pt.budget).ln()).abs() < 1e-12);
            assert!(pt.excluded);
        }
        assert_eq!(curve.slope, None);
    }

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = [1.0f64, 2.0, 4.0, 8.0].iter().map(|x| x.ln()).collect();
        let ys: Vec<f64> = [1.0f64, 2.0, 4.0, 8.0]
            .iter()
            .map(|x| (3.0 * x.powf(-0.5)).ln())
            .collect();
        assert!((ols_slope(&xs, &ys).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn environment_validation() {
        let env = pareto_env(1.0);
        assert!(Environment::new(env.groups.clone(), vec![env.utilities[0]], env.deadlines.clone()).is_err());
        let dup = vec![env.groups[0].clone(), env.groups[0].clone()];
        assert!(Environment::new(dup, env.utilities.clone(), env.deadlines.clone()).is_err());
    }
}
