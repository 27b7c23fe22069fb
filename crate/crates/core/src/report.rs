//! CSV and plain-text renderings of solver and simulation results.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! results always produce byte-identical files.

use std::fmt::Write as _;

use crate::error::Result;
use crate::offline::{MomentTable, OfflineSolution};
use crate::sim::{Environment, McSummary, RegretCurve, TraceRow};

pub const SUMMARY_HEADER: [&str; 12] = [
    "policy",
    "alpha",
    "B",
    "V",
    "trials",
    "group",
    "mean_time_share",
    "se_time_share",
    "mean_reward_rate",
    "se_reward_rate",
    "utility",
    "regret",
];

pub const REGRET_HEADER: [&str; 5] = ["B", "V", "regret", "stderr", "slope_fit"];

pub const OFFLINE_HEADER: [&str; 8] = [
    "group",
    "t_star",
    "r_star",
    "mu_star",
    "phi",
    "selection",
    "lambda",
    "utility_rate",
];

pub const MOMENTS_HEADER: [&str; 5] = ["group", "deadline", "mu", "theta", "rate"];

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory writer");
    String::from_utf8(bytes).expect("utf-8 csv")
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Numerical(format!("csv: {e}"))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per group.
pub fn summary_csv(env: &Environment, alpha: f64, summaries: &[McSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for s in summaries {
        for (k, g) in env.groups.iter().enumerate() {
            w.write_record([
                s.policy.to_string(),
                alpha.to_string(),
                s.budget.to_string(),
                opt(s.v),
                s.trials.to_string(),
                g.label().to_string(),
                s.mean_time_shares[k].to_string(),
                s.se_time_shares[k].to_string(),
                s.mean_reward_rates[k].to_string(),
                s.se_reward_rates[k].to_string(),
                s.utility.to_string(),
                s.regret.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    Ok(finish(w))
}

/// One row per budget followed by a `slope` row.
pub fn regret_csv(curve: &RegretCurve) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REGRET_HEADER).map_err(csv_err)?;
    for p in &curve.points {
        w.write_record([
            p.budget.to_string(),
            p.v.to_string(),
            p.regret.to_string(),
            p.stderr.to_string(),
            String::new(),
        ])
        .map_err(csv_err)?;
    }
    w.write_record(["slope", "", "", "", &opt(curve.slope)])
        .map_err(csv_err)?;
    Ok(finish(w))
}

pub fn offline_csv(env: &Environment, sol: &OfflineSolution) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(OFFLINE_HEADER).map_err(csv_err)?;
    for (k, s) in sol.stats.iter().enumerate() {
        w.write_record([
            env.groups[k].label().to_string(),
            s.t_star.to_string(),
            s.r_star.to_string(),
            s.mu_star.to_string(),
            sol.phi[k].to_string(),
            sol.selection[k].to_string(),
            sol.lambda.to_string(),
            sol.utility_rate.to_string(),
        ])
        .map_err(csv_err)?;
    }
    Ok(finish(w))
}

pub fn moments_csv(env: &Environment, table: &MomentTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MOMENTS_HEADER).map_err(csv_err)?;
    for (k, g) in env.groups.iter().enumerate() {
        for (j, t) in table.deadlines.iter().enumerate() {
            w.write_record([
                g.label().to_string(),
                t.to_string(),
                table.mu[k][j].to_string(),
                table.theta[k][j].to_string(),
                table.rate(k, j).to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    Ok(finish(w))
}

pub fn trace_csv(env: &Environment, rows: &[TraceRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["task", "group", "deadline", "elapsed", "reward"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(env.groups.iter().map(|g| format!("q_{}", g.label())));
    header.extend(env.groups.iter().map(|g| format!("gamma_{}", g.label())));
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![
            r.task.to_string(),
            env.groups[r.group].label().to_string(),
            r.deadline.to_string(),
            r.elapsed.to_string(),
            r.reward.to_string(),
        ];
        rec.extend(r.q.iter().map(f64::to_string));
        rec.extend(r.gamma.iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    Ok(finish(w))
}

pub fn offline_table(env: &Environment, sol: &OfflineSolution) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>8} {:>10} {:>10} {:>10} {:>10}",
        "group", "t*", "r*", "mu*", "phi", "P*"
    );
    for (k, s) in sol.stats.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:<12} {:>8.3} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            env.groups[k].label(),
            s.t_star,
            s.r_star,
            s.mu_star,
            sol.phi[k],
            sol.selection[k]
        );
    }
    let _ = writeln!(
        out,
        "lambda = {:.6}   utility rate = {:.6}",
        sol.lambda, sol.utility_rate
    );
    if sol.floored {
        let _ = writeln!(
            out,
            "warning: groups {:?} earn no reward; utility uses the rate floor",
            sol.excluded
        );
    }
    out
}

pub fn summary_table(env: &Environment, s: &McSummary) -> String {
    let mut out = String::new();
    let v = s.v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
    let _ = writeln!(
        out,
        "policy {}  B = {}  V = {}  trials = {}  mean tasks = {:.1}",
        s.policy, s.budget, v, s.trials, s.mean_tasks
    );
    let _ = writeln!(
        out,
        "{:<12} {:>12} {:>10} {:>12} {:>10}",
        "group", "time share", "se", "reward rate", "se"
    );
    for (k, g) in env.groups.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:<12} {:>12.5} {:>10.5} {:>12.5} {:>10.5}",
            g.label(),
            s.mean_time_shares[k],
            s.se_time_shares[k],
            s.mean_reward_rates[k],
            s.se_reward_rates[k]
        );
    }
    let _ = writeln!(
        out,
        "utility = {:.6}  optimum = {:.6}  regret = {:.6} (se {:.6})",
        s.utility, s.opt_utility_rate, s.regret, s.regret_se
    );
    if let Some(q) = s.mean_queue_second_half {
        let _ = writeln!(out, "time-averaged sum of queues over the second half = {q:.3}");
    }
    if s.floored_trials > 0 {
        let _ = writeln!(
            out,
            "warning: {} trial(s) hit the utility rate floor",
            s.floored_trials
        );
    }
    out
}
