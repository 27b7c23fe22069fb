//! Continuous-time, budget-constrained fair task allocation.
//!
//! A controller dispatches tasks one at a time to `K` groups of servers and
//! picks a deadline for each. Tasks that finish before the deadline pay a
//! reward; tasks that overrun are interrupted and pay nothing. Dispatching
//! continues until a time budget is exhausted, and the goal is to maximize
//! `Σ_k U_k(reward rate of group k)` for concave (typically α-fair)
//! utilities.
//!
//! * [`distributions`]: group models, sampling and truncated moments.
//! * [`utility`]: the α-fair utility family.
//! * [`offline`]: the optimal stationary randomized policy for known
//!   statistics.
//! * [`olum`]: the online learner driven by virtual queues.
//! * [`sim`]: budget-constrained episodes, Monte Carlo and regret curves.
//! * [`config`] and [`report`]: experiment files and CSV output.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod distributions;
pub mod error;
pub mod offline;
pub mod olum;
pub mod quadrature;
pub mod report;
pub mod sim;
pub mod utility;

pub use distributions::{CompletionSpec, DeadlineSet, GroupModel, RewardSpec, TaskSample};
pub use error::{Error, Result};
pub use offline::{GroupStats, OfflineSolution, SrpDistribution};
pub use olum::{GammaCap, OlumParams, OlumState};
pub use sim::{EpisodeResult, McSummary, Policy};
pub use utility::UtilitySpec;
