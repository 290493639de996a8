//! End-to-end analysis of a trial dataset and its text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::data::{summarize, summarize_columns, Arm, Descriptives, Direction, TrialDataset};
use crate::error::{Error, Result};
use crate::inference::{
    confidence_interval, estimate_gwp, hypothesis_test, rank_sum_equivalence, to_win_difference,
    to_win_odds, Alternative, Critical, GwpEstimate, IntervalEstimate, RankSumDiagnostic,
    Reference, Scale, TestResult, WinDifference, WinOdds,
};
use crate::mixed::{fit_reml, fit_reml_with, FitOptions, LmmFit};
use crate::ranks::{
    global_win_fractions, rank_tables, win_fractions_rank_form, GlobalWinFractionTable, RowKey,
};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub level: f64,
    pub scales: Vec<Scale>,
    pub critical: Critical,
    pub df_override: Option<i64>,
    pub alternative: Alternative,
    /// Critical value for the win difference and win odds intervals.
    pub transform_critical: Critical,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            level: 0.95,
            scales: vec![Scale::Identity, Scale::Logit],
            critical: Critical::StudentT,
            df_override: None,
            alternative: Alternative::TwoSided,
            transform_critical: Critical::NormalZ,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub input: String,
    pub digest: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointEstimate {
    pub name: String,
    pub direction: Direction,
    pub weight: f64,
    /// Mean win fraction per arm, indexed by [`Arm::index`].
    pub mean_win_fraction: [f64; 2],
    /// Single-endpoint mixed-model estimate, or the reason it failed.
    pub estimate: std::result::Result<(GwpEstimate, Vec<IntervalEstimate>), String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalBlock {
    pub fit: LmmFit,
    pub estimate: GwpEstimate,
    pub intervals: Vec<IntervalEstimate>,
    pub tests: Vec<TestResult>,
    pub win_difference: WinDifference,
    pub win_odds: Option<WinOdds>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub options: AnalysisOptions,
    pub provenance: Provenance,
    pub n: usize,
    pub arm_sizes: [usize; 2],
    pub arm_clusters: [usize; 2],
    pub raw: Descriptives,
    pub win_fractions: Descriptives,
    pub endpoints: Vec<EndpointEstimate>,
    pub global: GlobalBlock,
    /// Present when all endpoint weights are equal.
    pub rank_sum: Option<RankSumDiagnostic>,
}

/// Random-intercept ICC of one column with an arm fixed effect.
fn reml_icc(keys: &[RowKey], values: &[f64], arm_sizes: [usize; 2]) -> Option<f64> {
    let table = GlobalWinFractionTable {
        keys: keys.to_vec(),
        values: values.to_vec(),
        weights: vec![1.0],
        arm_sizes,
    };
    fit_reml(&table).ok().map(|f| f.components.rho)
}

fn intervals_for(e: &GwpEstimate, opts: &AnalysisOptions) -> Result<Vec<IntervalEstimate>> {
    opts.scales
        .iter()
        .map(|&s| confidence_interval(e, opts.level, s, opts.critical))
        .collect()
}

/// Runs directions → ranks → win fractions → global win fractions → REML
/// fit → inference on a validated dataset.
pub fn analyze(
    d: &TrialDataset,
    opts: &AnalysisOptions,
    provenance: Provenance,
) -> Result<AnalysisReport> {
    if opts.scales.is_empty() {
        return Err(Error::InvalidArgument("no interval scale selected".into()));
    }
    let mut raw = summarize(d);
    let oriented = d.apply_directions();
    let ranks = (0..oriented.n_endpoints())
        .map(|k| rank_tables(&oriented, k))
        .collect::<Result<Vec<_>>>()?;
    let tables = ranks
        .iter()
        .map(win_fractions_rank_form)
        .collect::<Result<Vec<_>>>()?;
    let weights = d.weights();
    let global = global_win_fractions(&tables, &weights)?;

    let arms: Vec<Arm> = d.rows().iter().map(|r| r.arm).collect();
    let clusters: Vec<usize> = d.rows().iter().map(|r| r.cluster).collect();
    let names: Vec<String> = d.endpoints().iter().map(|e| e.name.clone()).collect();
    let columns: Vec<Vec<f64>> = tables.iter().map(|t| t.fractions.clone()).collect();
    let mut win_fractions = summarize_columns(names, &columns, &arms, &clusters);
    let keys: Vec<RowKey> = d
        .rows()
        .iter()
        .map(|r| RowKey {
            arm: r.arm,
            cluster: r.cluster,
        })
        .collect();
    for k in 0..d.n_endpoints() {
        raw.icc[k] = reml_icc(&keys, &d.column(k), d.arm_sizes());
        win_fractions.icc[k] = reml_icc(&keys, &columns[k], d.arm_sizes());
    }

    let fit_opts = FitOptions {
        df_override: opts.df_override,
        ..FitOptions::default()
    };
    let endpoints = d
        .endpoints()
        .iter()
        .zip(&tables)
        .map(|(spec, t)| {
            let single = GlobalWinFractionTable {
                keys: t.keys.clone(),
                values: t.fractions.clone(),
                weights: vec![1.0],
                arm_sizes: t.arm_sizes,
            };
            let estimate = fit_reml_with(&single, &fit_opts)
                .and_then(|fit| {
                    let e = estimate_gwp(&fit, &[1.0]);
                    let cis = intervals_for(&e, opts)?;
                    Ok((e, cis))
                })
                .map_err(|e| e.to_string());
            EndpointEstimate {
                name: spec.name.clone(),
                direction: spec.direction,
                weight: spec.weight,
                mean_win_fraction: [t.arm_mean(Arm::Control), t.arm_mean(Arm::Treatment)],
                estimate,
            }
        })
        .collect();

    let fit = fit_reml_with(&global, &fit_opts)?;
    let estimate = estimate_gwp(&fit, &weights);
    let intervals = intervals_for(&estimate, opts)?;
    let tests = opts
        .scales
        .iter()
        .map(|&s| hypothesis_test(&estimate, s, opts.critical, opts.alternative))
        .collect::<Result<Vec<_>>>()?;
    let win_difference = to_win_difference(&estimate, opts.level, opts.transform_critical)?;
    let win_odds = to_win_odds(&estimate, opts.level, opts.transform_critical).ok();

    let equal_weights = weights.windows(2).all(|w| w[0] == w[1]);
    let rank_sum = if equal_weights {
        Some(rank_sum_equivalence(
            &global,
            &ranks,
            global.arm_mean(Arm::Treatment),
        )?)
    } else {
        None
    };

    Ok(AnalysisReport {
        options: opts.clone(),
        provenance,
        n: d.len(),
        arm_sizes: d.arm_sizes(),
        arm_clusters: d.arm_cluster_counts(),
        raw,
        win_fractions,
        endpoints,
        global: GlobalBlock {
            fit,
            estimate,
            intervals,
            tests,
            win_difference,
            win_odds,
        },
        rank_sum,
    })
}

fn pct(level: f64) -> String {
    let p = level * 100.0;
    if (p - p.round()).abs() < 1e-9 {
        format!("{}%", p.round())
    } else {
        format!("{p}%")
    }
}

fn crit_label(ci: &IntervalEstimate, df: i64) -> String {
    match ci.critical {
        Critical::NormalZ => "z".to_string(),
        Critical::StudentT => format!("t, df {df}"),
    }
}

fn reference_label(r: Reference) -> String {
    match r {
        Reference::Normal => "N(0,1)".to_string(),
        Reference::StudentT(df) => format!("t({df})"),
    }
}

fn opt4(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4}"))
}

fn full(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

impl AnalysisReport {
    /// Human-readable report: 4 decimals for estimates, 3 for interval
    /// bounds.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let g = &self.global;
        let e = &g.estimate;
        let _ = writeln!(s, "Global win probability analysis");
        let _ = writeln!(s, "input: {}", self.provenance.input);
        if let Some(d) = &self.provenance.digest {
            let _ = writeln!(s, "sha256: {d}");
        }
        let _ = writeln!(
            s,
            "N = {} (control {}, treatment {}); clusters {} control, {} treatment",
            self.n, self.arm_sizes[0], self.arm_sizes[1], self.arm_clusters[0], self.arm_clusters[1]
        );
        let _ = writeln!(s);

        let _ = writeln!(s, "Descriptives: mean (SD) by arm, random-intercept ICC");
        for (label, desc) in [("scores", &self.raw), ("win fractions", &self.win_fractions)] {
            let _ = writeln!(s, "  {label}");
            for (k, name) in desc.names.iter().enumerate() {
                let c = desc.by_arm[0][k];
                let t = desc.by_arm[1][k];
                let _ = writeln!(
                    s,
                    "    {name:<16} control {:.4} ({:.4})  treatment {:.4} ({:.4})  ICC {}",
                    c.mean,
                    c.sd,
                    t.mean,
                    t.sd,
                    opt4(desc.icc[k])
                );
            }
            let corr: Vec<String> = desc
                .correlation
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|r| format!("{r:.4}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            let _ = writeln!(s, "    correlation [{}]", corr.join("; "));
        }
        let _ = writeln!(s);

        let _ = writeln!(s, "Per-endpoint win probability");
        for ep in &self.endpoints {
            let _ = write!(
                s,
                "  {:<16} {}, weight {:.4}, mean treatment win fraction {:.4}",
                ep.name, ep.direction, ep.weight, ep.mean_win_fraction[1]
            );
            match &ep.estimate {
                Ok((est, cis)) => {
                    let _ = write!(
                        s,
                        "\n    θ̂ = {:.4}  SE = {:.4}  ICC = {:.4}",
                        est.theta_hat, est.se, est.icc_hat
                    );
                    for ci in cis {
                        let _ = write!(
                            s,
                            "  {} {} CI ({:.3}, {:.3})",
                            pct(ci.level),
                            ci.scale,
                            ci.lower,
                            ci.upper
                        );
                    }
                    let _ = writeln!(s);
                }
                Err(msg) => {
                    let _ = writeln!(s, "\n    not estimable: {msg}");
                }
            }
        }
        let _ = writeln!(s);

        let fit = &g.fit;
        let _ = writeln!(s, "Global estimate");
        let _ = writeln!(
            s,
            "  θ̂ = {:.4}  SE = {:.4}  df = {}  ICC = {:.4}",
            e.theta_hat, e.se, e.df, e.icc_hat
        );
        let _ = writeln!(
            s,
            "  β̂0 = {:.4}  β̂1 = {:.4}  σ̂²_α = {:.4}  σ̂²_ε = {:.4}{}",
            fit.beta0,
            fit.beta1,
            fit.components.sigma2_alpha,
            fit.components.sigma2_eps,
            if fit.convergence.boundary {
                "  (boundary: σ̂²_α = 0)"
            } else {
                ""
            }
        );
        for ci in &g.intervals {
            let _ = writeln!(
                s,
                "  {} {} CI ({:.3}, {:.3})  [{}]",
                pct(ci.level),
                ci.scale,
                ci.lower,
                ci.upper,
                crit_label(ci, e.df)
            );
        }
        for t in &g.tests {
            let _ = writeln!(
                s,
                "  H0: θ = 0.5, {} scale: T = {:.4}, p = {:.4} vs {}",
                t.scale,
                t.statistic,
                t.p_value,
                reference_label(t.reference)
            );
        }
        let _ = writeln!(s);
        let wd = &g.win_difference;
        let _ = writeln!(s, "Transforms ({} critical values)", self.options.transform_critical);
        let _ = writeln!(
            s,
            "  win difference Δ̂ = {:.4}  SE = {:.4}  {} CI ({:.3}, {:.3})",
            wd.delta_hat,
            wd.se,
            pct(self.options.level),
            wd.lower,
            wd.upper
        );
        match &g.win_odds {
            Some(wo) => {
                let _ = writeln!(
                    s,
                    "  win odds λ̂ = {:.4}  SE(ln λ̂) = {:.4}  {} CI ({:.3}, {:.3})",
                    wo.lambda_hat,
                    wo.se_log_lambda,
                    pct(self.options.level),
                    wo.lower,
                    wo.upper
                );
            }
            None => {
                let _ = writeln!(s, "  win odds undefined at θ̂ = {}", e.theta_hat);
            }
        }
        if let Some(r) = &self.rank_sum {
            let _ = writeln!(
                s,
                "  rank-sum check: R̄1 - R̄0 = {:.4}, NK(θ̂ - 0.5) = {:.4}",
                r.lhs, r.rhs
            );
        }
        s
    }

    /// Line-oriented `key = value` block at full precision.
    pub fn to_machine(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let p = &self.provenance;
        kv("tool.version", env!("CARGO_PKG_VERSION").to_string());
        kv("input", p.input.clone());
        kv("input.sha256", p.digest.clone().unwrap_or_else(|| "NA".into()));
        kv("seed", p.seed.map_or_else(|| "NA".into(), |v| v.to_string()));
        kv("options.level", self.options.level.to_string());
        kv("options.critical", self.options.critical.to_string());
        kv("options.transform_critical", self.options.transform_critical.to_string());
        kv(
            "options.df_override",
            self.options.df_override.map_or_else(|| "NA".into(), |v| v.to_string()),
        );
        kv("n", self.n.to_string());
        kv("n.control", self.arm_sizes[0].to_string());
        kv("n.treatment", self.arm_sizes[1].to_string());
        kv("clusters.control", self.arm_clusters[0].to_string());
        kv("clusters.treatment", self.arm_clusters[1].to_string());

        for (prefix, desc) in [("raw", &self.raw), ("wf", &self.win_fractions)] {
            for (k, name) in desc.names.iter().enumerate() {
                for (arm, label) in [(0, "control"), (1, "treatment")] {
                    kv(&format!("{prefix}.{name}.{label}.mean"), desc.by_arm[arm][k].mean.to_string());
                    kv(&format!("{prefix}.{name}.{label}.sd"), desc.by_arm[arm][k].sd.to_string());
                }
                kv(&format!("{prefix}.{name}.icc"), full(desc.icc[k]));
                for (j, other) in desc.names.iter().enumerate() {
                    if j > k {
                        kv(
                            &format!("{prefix}.corr.{name}.{other}"),
                            desc.correlation[k][j].to_string(),
                        );
                    }
                }
            }
        }

        for ep in &self.endpoints {
            let base = format!("endpoint.{}", ep.name);
            kv(&format!("{base}.direction"), ep.direction.to_string());
            kv(&format!("{base}.weight"), ep.weight.to_string());
            kv(&format!("{base}.mean_wf.control"), ep.mean_win_fraction[0].to_string());
            kv(&format!("{base}.mean_wf.treatment"), ep.mean_win_fraction[1].to_string());
            if let Ok((est, cis)) = &ep.estimate {
                kv(&format!("{base}.theta_hat"), est.theta_hat.to_string());
                kv(&format!("{base}.se"), est.se.to_string());
                kv(&format!("{base}.icc"), est.icc_hat.to_string());
                for ci in cis {
                    kv(&format!("{base}.ci.{}.lower", ci.scale), ci.lower.to_string());
                    kv(&format!("{base}.ci.{}.upper", ci.scale), ci.upper.to_string());
                }
            }
        }

        let g = &self.global;
        let e = &g.estimate;
        let fit = &g.fit;
        kv("global.theta_hat", e.theta_hat.to_string());
        kv("global.se", e.se.to_string());
        kv("global.df", e.df.to_string());
        kv("global.icc", e.icc_hat.to_string());
        kv("global.beta0", fit.beta0.to_string());
        kv("global.beta1", fit.beta1.to_string());
        kv("global.sigma2_alpha", fit.components.sigma2_alpha.to_string());
        kv("global.sigma2_eps", fit.components.sigma2_eps.to_string());
        kv("global.boundary", fit.convergence.boundary.to_string());
        kv("global.iterations", fit.convergence.iterations.to_string());
        kv("global.reml_criterion", fit.convergence.reml_criterion.to_string());
        for ci in &g.intervals {
            kv(&format!("global.ci.{}.lower", ci.scale), ci.lower.to_string());
            kv(&format!("global.ci.{}.upper", ci.scale), ci.upper.to_string());
            kv(&format!("global.ci.{}.critical_value", ci.scale), ci.critical_value.to_string());
        }
        for t in &g.tests {
            kv(&format!("global.test.{}.statistic", t.scale), t.statistic.to_string());
            kv(&format!("global.test.{}.p_value", t.scale), t.p_value.to_string());
            kv(&format!("global.test.{}.reference", t.scale), reference_label(t.reference));
        }
        let wd = &g.win_difference;
        kv("win_difference.estimate", wd.delta_hat.to_string());
        kv("win_difference.se", wd.se.to_string());
        kv("win_difference.lower", wd.lower.to_string());
        kv("win_difference.upper", wd.upper.to_string());
        if let Some(wo) = &g.win_odds {
            kv("win_odds.estimate", wo.lambda_hat.to_string());
            kv("win_odds.se_log", wo.se_log_lambda.to_string());
            kv("win_odds.lower", wo.lower.to_string());
            kv("win_odds.upper", wo.upper.to_string());
        }
        if let Some(r) = &self.rank_sum {
            kv("rank_sum.lhs", r.lhs.to_string());
            kv("rank_sum.rhs", r.rhs.to_string());
        }
        s
    }
}

/// Parses a `key = value` block back into a map.
pub fn parse_machine(text: &str) -> Result<BTreeMap<String, String>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_once(" = ")
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Parse(format!("not a key = value line: `{l}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{EndpointSpec, RawRecord};

    fn dataset(weights: [f64; 2]) -> TrialDataset {
        let mut raw = Vec::new();
        let vals = [
            [3.0, 1.0],
            [4.0, 0.0],
            [2.0, 1.0],
            [5.0, 0.0],
            [3.0, 0.0],
            [4.0, 1.0],
        ];
        for c in 0..6 {
            let arm = if c < 3 { Arm::Control } else { Arm::Treatment };
            for j in 0..4 {
                let v = vals[(c + j) % 6];
                let bump = if arm == Arm::Treatment { (j % 2) as f64 } else { 0.0 };
                raw.push(RawRecord::new(
                    arm,
                    format!("s{c}"),
                    j.to_string(),
                    vec![v[0] + bump, v[1]],
                ));
            }
        }
        let eps = vec![
            EndpointSpec::new("knowledge", Direction::HigherIsBetter, weights[0]),
            EndpointSpec::new("activity", Direction::LowerIsBetter, weights[1]),
        ];
        TrialDataset::new(eps, raw).unwrap()
    }

    #[test]
    fn report_invariants_and_round_trip() {
        let r = analyze(&dataset([0.7, 0.3]), &AnalysisOptions::default(), Provenance::default())
            .unwrap();
        let th = r.global.estimate.theta_hat;
        for ci in &r.global.intervals {
            assert!(ci.lower <= th && th <= ci.upper);
        }
        assert!(r.rank_sum.is_none());
        assert_eq!(r.global.estimate.df, 4);
        let m = parse_machine(&r.to_machine()).unwrap();
        let back: f64 = m["global.theta_hat"].parse().unwrap();
        assert_eq!(back, th);
        let lo: f64 = m["global.ci.logit.lower"].parse().unwrap();
        assert_eq!(lo, r.global.intervals[1].lower);
        let text = r.to_text();
        assert!(text.contains(&format!("θ̂ = {th:.4}")));
    }

    #[test]
    fn equal_weights_add_rank_sum_check() {
        let r = analyze(&dataset([1.0, 1.0]), &AnalysisOptions::default(), Provenance::default())
            .unwrap();
        let rs = r.rank_sum.unwrap();
        assert!(rs.passed(), "{rs:?}");
    }

    #[test]
    fn df_override_propagates() {
        let opts = AnalysisOptions {
            df_override: Some(0),
            ..AnalysisOptions::default()
        };
        assert!(matches!(
            analyze(&dataset([0.5, 0.5]), &opts, Provenance::default()),
            Err(Error::InvalidDf(0))
        ));
    }
}
