//! CSV output, per-configuration medians and rank tables.

use std::io::Write;

use gls::analysis::ParetoPoint;
use gls::stats::median;

use crate::error::BenchError;
use crate::experiment::{AlgoConfig, BenchRow, ScalingRow};

pub const CSV_HEADER: [&str; 12] = [
    "env",
    "seed",
    "event",
    "selector",
    "alpha",
    "delta",
    "edges_evaluated",
    "vertex_rewires",
    "cost_total",
    "path_cost",
    "feasible",
    "wall_ms",
];

pub const PARETO_HEADER: [&str; 4] = ["delta", "median_evals", "median_rewires", "median_cost"];

pub const SCALING_HEADER: [&str; 10] = [
    "axis",
    "value",
    "delta",
    "sp_median_evals",
    "sp_median_rewires",
    "sp_median_cost",
    "se_median_evals",
    "se_median_rewires",
    "se_median_cost",
    "cost_gap",
];

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_rows<W: Write>(rows: &[BenchRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.env.clone(),
            r.seed.to_string(),
            r.config.event.tag().to_string(),
            r.config.selector.tag().to_string(),
            opt(r.config.event.alpha()),
            opt(r.config.event.delta()),
            r.edges_evaluated.to_string(),
            r.vertex_rewires.to_string(),
            r.cost_total.to_string(),
            opt(r.path_cost),
            u8::from(r.feasible()).to_string(),
            format!("{:.3}", r.wall_ms),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_pareto<W: Write>(points: &[ParetoPoint], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PARETO_HEADER)?;
    for p in points {
        w.write_record([
            p.delta.to_string(),
            p.median_evals.to_string(),
            p.median_rewires.to_string(),
            p.median_cost.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_scaling<W: Write>(rows: &[ScalingRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCALING_HEADER)?;
    for r in rows {
        w.write_record([
            r.axis.to_string(),
            r.value.to_string(),
            r.delta.to_string(),
            r.sp.median_evals.to_string(),
            r.sp.median_rewires.to_string(),
            r.sp.median_cost.to_string(),
            r.se.median_evals.to_string(),
            r.se.median_rewires.to_string(),
            r.se.median_cost.to_string(),
            r.gap().to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Medians over the feasible runs of one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigSummary {
    pub label: String,
    pub runs: usize,
    pub infeasible: usize,
    pub median_evals: f64,
    pub median_rewires: f64,
    pub median_cost: f64,
}

pub fn summarize(rows: &[BenchRow], configs: &[AlgoConfig]) -> Vec<ConfigSummary> {
    configs
        .iter()
        .map(|cfg| {
            let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.config == *cfg).collect();
            let ok: Vec<&&BenchRow> = mine.iter().filter(|r| r.feasible()).collect();
            let med = |f: &dyn Fn(&BenchRow) -> f64| {
                median(&ok.iter().map(|r| f(r)).collect::<Vec<_>>()).unwrap_or(f64::NAN)
            };
            ConfigSummary {
                label: cfg.label(),
                runs: mine.len(),
                infeasible: mine.len() - ok.len(),
                median_evals: med(&|r| r.edges_evaluated as f64),
                median_rewires: med(&|r| r.vertex_rewires as f64),
                median_cost: med(&|r| r.cost_total),
            }
        })
        .collect()
}

/// `percent[c][k]`: share of worlds on which configuration `c` had rank
/// `k + 1` by model cost. Ties go to the configuration listed first. Worlds
/// where any configuration is infeasible are left out.
#[derive(Clone, Debug, PartialEq)]
pub struct RankTable {
    pub labels: Vec<String>,
    pub percent: Vec<Vec<f64>>,
    pub worlds: usize,
}

pub fn rank_table(rows: &[BenchRow], configs: &[AlgoConfig]) -> RankTable {
    let mut seeds: Vec<u64> = Vec::new();
    for r in rows {
        if !seeds.contains(&r.seed) {
            seeds.push(r.seed);
        }
    }
    let k = configs.len();
    let mut counts = vec![vec![0usize; k]; k];
    let mut used = 0;
    for seed in seeds {
        let costs: Option<Vec<f64>> = configs
            .iter()
            .map(|cfg| {
                rows.iter()
                    .find(|r| r.seed == seed && r.config == *cfg && r.feasible())
                    .map(|r| r.cost_total)
            })
            .collect();
        let Some(costs) = costs else { continue };
        used += 1;
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
        for (rank, &c) in order.iter().enumerate() {
            counts[c][rank] += 1;
        }
    }
    let percent = counts
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|n| if used == 0 { 0.0 } else { 100.0 * n as f64 / used as f64 })
                .collect()
        })
        .collect();
    RankTable {
        labels: configs.iter().map(AlgoConfig::label).collect(),
        percent,
        worlds: used,
    }
}

pub fn render_summary(summary: &[ConfigSummary], ranks: &RankTable) -> String {
    let mut out = String::new();
    out.push_str("config            runs  infeasible  med_evals  med_rewires   med_cost_s\n");
    for s in summary {
        out.push_str(&format!(
            "{:<16} {:>5} {:>11} {:>10.1} {:>12.1} {:>12.6}\n",
            s.label, s.runs, s.infeasible, s.median_evals, s.median_rewires, s.median_cost
        ));
    }
    let infeasible: usize = summary.iter().map(|s| s.infeasible).sum();
    out.push_str(&format!("infeasible runs excluded from medians: {infeasible}\n"));
    out.push_str(&format!("rank percentages over {} worlds\n", ranks.worlds));
    out.push_str(&format!("{:<16}", "config"));
    for r in 1..=ranks.labels.len() {
        out.push_str(&format!(" {:>6}", format!("#{r}")));
    }
    out.push('\n');
    for (label, row) in ranks.labels.iter().zip(&ranks.percent) {
        out.push_str(&format!("{label:<16}"));
        for p in row {
            out.push_str(&format!(" {p:>6.1}"));
        }
        out.push('\n');
    }
    out
}
