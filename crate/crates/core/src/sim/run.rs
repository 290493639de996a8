//! Replicated experiments and their coverage / rejection summaries.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::inference::{confidence_interval, estimate_gwp, Scale};
use crate::mixed::fit_reml;
use crate::ranks::dataset_global_win_fractions;
use crate::sim::config::ScenarioConfig;
use crate::sim::design::{generate_trial, prepare, PreparedScenario};
use crate::stream::replicate_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled, and runs
    /// sequentially otherwise.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub theta_hat: f64,
    pub icc_hat: f64,
    /// (lower, upper) per configured scale, in configuration order.
    pub intervals: Vec<(f64, f64)>,
}

pub fn run_replicate(p: &PreparedScenario, index: u64) -> Result<ReplicateOutcome> {
    let cfg = &p.config;
    let mut rng = replicate_rng(cfg.seed, index);
    let d = generate_trial(p, &mut rng)?;
    let (_, global) = dataset_global_win_fractions(&d)?;
    let fit = fit_reml(&global)?;
    let e = estimate_gwp(&fit, &global.weights);
    let intervals = cfg
        .scales
        .iter()
        .map(|&scale| {
            confidence_interval(&e, cfg.level, scale, cfg.critical).map(|ci| (ci.lower, ci.upper))
        })
        .collect::<Result<_>>()?;
    Ok(ReplicateOutcome {
        theta_hat: e.theta_hat,
        icc_hat: e.icc_hat,
        intervals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleMetrics {
    pub scale: Scale,
    pub covered: usize,
    /// Intervals lying entirely above the true θ (lower bound > θ).
    pub left: usize,
    /// Intervals lying entirely below the true θ (upper bound < θ).
    pub right: usize,
    /// Intervals excluding 0.5.
    pub rejected: usize,
    pub used: usize,
}

impl ScaleMetrics {
    fn pct(&self, count: usize) -> f64 {
        100.0 * count as f64 / self.used as f64
    }

    pub fn ecp(&self) -> f64 {
        self.pct(self.covered)
    }

    pub fn left_tail(&self) -> f64 {
        self.pct(self.left)
    }

    pub fn right_tail(&self) -> f64 {
        self.pct(self.right)
    }

    /// Left over right tail error; None when no interval misses on the right.
    pub fn ter(&self) -> Option<f64> {
        (self.right > 0).then(|| self.left as f64 / self.right as f64)
    }

    pub fn err(&self) -> f64 {
        self.pct(self.rejected)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioMetrics {
    pub true_theta: f64,
    pub scales: Vec<ScaleMetrics>,
    pub mean_theta_hat: f64,
    pub mean_icc_hat: f64,
    pub requested: usize,
    pub used: usize,
    pub failed: usize,
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioMetrics> {
    run_scenario_with(cfg, Execution::default())
}

pub fn run_scenario_with(cfg: &ScenarioConfig, exec: Execution) -> Result<ScenarioMetrics> {
    run_prepared(&prepare(cfg)?, exec)
}

pub fn run_prepared(p: &PreparedScenario, exec: Execution) -> Result<ScenarioMetrics> {
    let outcomes = replicate_outcomes(p, exec);
    aggregate(p, &outcomes)
}

#[cfg(feature = "parallel")]
fn replicate_outcomes(p: &PreparedScenario, exec: Execution) -> Vec<Result<ReplicateOutcome>> {
    use rayon::prelude::*;
    let reps = p.config.reps as u64;
    match exec {
        Execution::Parallel => (0..reps)
            .into_par_iter()
            .map(|i| run_replicate(p, i))
            .collect(),
        Execution::Sequential => (0..reps).map(|i| run_replicate(p, i)).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn replicate_outcomes(p: &PreparedScenario, _exec: Execution) -> Vec<Result<ReplicateOutcome>> {
    (0..p.config.reps as u64).map(|i| run_replicate(p, i)).collect()
}

/// Folds outcomes in replicate order so the result does not depend on how
/// they were computed.
fn aggregate(p: &PreparedScenario, outcomes: &[Result<ReplicateOutcome>]) -> Result<ScenarioMetrics> {
    let cfg = &p.config;
    let theta = p.true_theta;
    let mut scales: Vec<ScaleMetrics> = cfg
        .scales
        .iter()
        .map(|&scale| ScaleMetrics {
            scale,
            covered: 0,
            left: 0,
            right: 0,
            rejected: 0,
            used: 0,
        })
        .collect();
    let (mut sum_theta, mut sum_icc, mut used, mut failed) = (0.0, 0.0, 0usize, 0usize);
    for outcome in outcomes {
        let Ok(o) = outcome else {
            failed += 1;
            continue;
        };
        used += 1;
        sum_theta += o.theta_hat;
        sum_icc += o.icc_hat;
        for (m, &(lower, upper)) in scales.iter_mut().zip(&o.intervals) {
            m.used += 1;
            if lower > theta {
                m.left += 1;
            } else if upper < theta {
                m.right += 1;
            } else {
                m.covered += 1;
            }
            if lower > 0.5 || upper < 0.5 {
                m.rejected += 1;
            }
        }
    }
    let total = outcomes.len();
    if failed * 100 > total {
        return Err(Error::TooManyFailures { failed, total });
    }
    Ok(ScenarioMetrics {
        true_theta: theta,
        scales,
        mean_theta_hat: sum_theta / used as f64,
        mean_icc_hat: sum_icc / used as f64,
        requested: total,
        used,
        failed,
    })
}

fn fmt_ter(t: Option<f64>) -> String {
    t.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

impl ScenarioMetrics {
    /// Flat `key = value` report at full precision.
    pub fn to_report(&self, cfg: &ScenarioConfig) -> String {
        let mut s = cfg.to_text();
        let _ = writeln!(s, "true_theta = {}", self.true_theta);
        let _ = writeln!(s, "reps_used = {}", self.used);
        let _ = writeln!(s, "reps_failed = {}", self.failed);
        let _ = writeln!(s, "mean_theta_hat = {}", self.mean_theta_hat);
        let _ = writeln!(s, "mean_icc_hat = {}", self.mean_icc_hat);
        for m in &self.scales {
            let sc = m.scale;
            let _ = writeln!(s, "{sc}.ecp = {}", m.ecp());
            let _ = writeln!(s, "{sc}.left_tail = {}", m.left_tail());
            let _ = writeln!(s, "{sc}.right_tail = {}", m.right_tail());
            let _ = writeln!(s, "{sc}.ter = {}", fmt_ter(m.ter()));
            let _ = writeln!(s, "{sc}.err = {}", m.err());
        }
        s
    }

    pub fn tsv_header(scales: &[Scale]) -> String {
        let mut cols: Vec<String> = [
            "clusters",
            "cluster_size",
            "deletion_prob",
            "theta1",
            "theta2",
            "theta",
            "omega12",
            "phi11",
            "phi22",
            "phi12",
            "level",
            "crit",
            "seed",
            "reps",
            "reps_used",
            "reps_failed",
            "mean_theta_hat",
            "mean_icc_hat",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for sc in scales {
            for m in ["ecp", "left_tail", "right_tail", "ter", "err"] {
                cols.push(format!("{sc}_{m}"));
            }
        }
        cols.join("\t")
    }

    /// One tab-separated row matching [`ScenarioMetrics::tsv_header`].
    pub fn tsv_row(&self, cfg: &ScenarioConfig) -> String {
        let t = cfg.endpoint_targets();
        let c = &cfg.correlations;
        let mut cols: Vec<String> = vec![
            cfg.clusters.to_string(),
            cfg.cluster_size.to_string(),
            cfg.deletion_prob.to_string(),
            t[0].to_string(),
            t[1].to_string(),
            self.true_theta.to_string(),
            c.omega12.to_string(),
            c.phi11.to_string(),
            c.phi22.to_string(),
            c.phi12.to_string(),
            cfg.level.to_string(),
            cfg.critical.to_string(),
            cfg.seed.to_string(),
            self.requested.to_string(),
            self.used.to_string(),
            self.failed.to_string(),
            self.mean_theta_hat.to_string(),
            self.mean_icc_hat.to_string(),
        ];
        for m in &self.scales {
            cols.push(m.ecp().to_string());
            cols.push(m.left_tail().to_string());
            cols.push(m.right_tail().to_string());
            cols.push(fmt_ter(m.ter()));
            cols.push(m.err().to_string());
        }
        cols.join("\t")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScenarioConfig {
        ScenarioConfig {
            clusters: 6,
            cluster_size: 8,
            reps: 40,
            seed: 11,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn tallies_partition_replicates() {
        let m = run_scenario(&small()).unwrap();
        assert_eq!(m.used + m.failed, 40);
        for s in &m.scales {
            assert_eq!(s.covered + s.left + s.right, s.used);
            assert!((s.ecp() + s.left_tail() + s.right_tail() - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_replicate_indicators() {
        let cfg = ScenarioConfig {
            reps: 1,
            ..small()
        };
        let m = run_scenario(&cfg).unwrap();
        for s in &m.scales {
            for v in [s.ecp(), s.left_tail(), s.right_tail(), s.err()] {
                assert!(v == 0.0 || v == 100.0);
            }
            if s.right == 0 {
                assert_eq!(s.ter(), None);
            }
        }
        let row = m.tsv_row(&cfg);
        assert_eq!(
            row.split('\t').count(),
            ScenarioMetrics::tsv_header(&cfg.scales).split('\t').count()
        );
    }

    #[test]
    fn execution_mode_does_not_change_results() {
        let cfg = small();
        let a = run_scenario_with(&cfg, Execution::Sequential).unwrap();
        let b = run_scenario_with(&cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_report(&cfg), b.to_report(&cfg));
    }
}
