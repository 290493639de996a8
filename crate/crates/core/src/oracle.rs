//! Self-checks of the rank, mixed-model and transform code against
//! independent brute-force computations on seeded random fixtures.

use std::fmt;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Arm, EndpointSpec, RawRecord, TrialDataset};
use crate::error::Result;
use crate::inference::{
    estimate_gwp, rank_sum_equivalence, to_win_difference, to_win_odds, Critical,
};
use crate::mixed::{balanced_anova_components, fit_reml};
use crate::ranks::{
    dataset_global_win_fractions, heaviside, rank_tables, win_fractions, win_fractions_bruteforce,
};
use crate::stream::replicate_rng;

pub const DEFAULT_SEED: u64 = 20_240_917;

/// Shape of a random fixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureShape {
    /// Every cluster gets the same size when true.
    pub balanced: bool,
    pub equal_weights: bool,
    /// Spread of the cluster shifts added to every response; larger values
    /// make between-cluster variation (and interior REML solutions) likelier.
    pub cluster_spread: i32,
}

/// Random trial with C ∈ [4, 10] clusters, sizes in [2, 8], K ∈ {1, 2, 3}
/// endpoints and small-integer responses (plenty of ties).
pub fn random_fixture(rng: &mut ChaCha8Rng, shape: FixtureShape) -> TrialDataset {
    let c = rng.random_range(4..=10usize);
    let k = rng.random_range(1..=3usize);
    let common_n = rng.random_range(2..=8usize);
    let n_control = c / 2;
    let mut raw = Vec::new();
    for cl in 0..c {
        let arm = if cl < n_control { Arm::Control } else { Arm::Treatment };
        let n = if shape.balanced {
            common_n
        } else {
            rng.random_range(2..=8usize)
        };
        let shifts: Vec<i32> = (0..k)
            .map(|_| rng.random_range(-shape.cluster_spread..=shape.cluster_spread))
            .collect();
        let arm_shift = i32::from(arm == Arm::Treatment && rng.random_bool(0.5));
        for j in 0..n {
            let values = shifts
                .iter()
                .map(|s| f64::from(rng.random_range(0..=4) + s + arm_shift))
                .collect();
            raw.push(RawRecord::new(arm, format!("c{cl}"), format!("i{j}"), values));
        }
    }
    let endpoints = (0..k)
        .map(|e| {
            let w = if shape.equal_weights {
                1.0
            } else {
                rng.random_range(0.1..1.0)
            };
            EndpointSpec::new(format!("y{e}"), crate::data::Direction::HigherIsBetter, w)
        })
        .collect();
    TrialDataset::new(endpoints, raw).expect("fixture construction is valid by design")
}

/// Reproduces the fixture reported by a failing check.
pub fn fixture(seed: u64, stream: u64, shape: FixtureShape) -> TrialDataset {
    random_fixture(&mut replicate_rng(seed, stream), shape)
}

/// (1/K)·Σ_k (1/(N₁N₀))·Σ_treatment Σ_control H(x₁ - x₀), weighted by the
/// endpoint weights.
pub fn plug_in_theta(d: &TrialDataset) -> f64 {
    let w = d.weights();
    let total: f64 = w.iter().sum();
    let rows = d.rows();
    let [n0, n1] = d.arm_sizes();
    let mut theta = 0.0;
    for (k, wk) in w.iter().enumerate() {
        let mut wins = 0.0;
        for t in rows.iter().filter(|r| r.arm == Arm::Treatment) {
            for c in rows.iter().filter(|r| r.arm == Arm::Control) {
                wins += heaviside(t.values[k] - c.values[k]);
            }
        }
        theta += wk * wins / (n0 * n1) as f64;
    }
    theta / total
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseFailure {
    pub seed: u64,
    pub stream: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub skipped: usize,
    pub failures: Vec<CaseFailure>,
    pub elapsed: Duration,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.cases > 0
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} cases {:>4}  skipped {:>3}  {:.2}s",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.skipped,
            self.elapsed.as_secs_f64()
        )?;
        for fl in &self.failures {
            write!(f, "\n     seed {} stream {}: {}", fl.seed, fl.stream, fl.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub seed: u64,
    /// Perturbs one brute-force value so the rank suite must fail.
    pub inject_fault: bool,
    pub rank_cases: usize,
    pub balanced_cases: usize,
    pub transform_cases: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            inject_fault: false,
            rank_cases: 200,
            balanced_cases: 100,
            transform_cases: 100,
        }
    }
}

/// Streams are partitioned by suite so each suite's fixtures are stable when
/// case counts of other suites change.
const STREAM_BLOCK: u64 = 1 << 32;

struct Suite {
    name: &'static str,
    seed: u64,
    base: u64,
    cases: usize,
    skipped: usize,
    failures: Vec<CaseFailure>,
    start: Instant,
}

impl Suite {
    fn new(name: &'static str, seed: u64, index: u64) -> Self {
        Self {
            name,
            seed,
            base: index * STREAM_BLOCK,
            cases: 0,
            skipped: 0,
            failures: Vec::new(),
            start: Instant::now(),
        }
    }

    fn fail(&mut self, stream: u64, detail: String) {
        self.failures.push(CaseFailure {
            seed: self.seed,
            stream,
            detail,
        });
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name,
            cases: self.cases,
            skipped: self.skipped,
            failures: self.failures,
            elapsed: self.start.elapsed(),
        }
    }
}

/// Rank-form win fractions equal brute-force pairwise averages to 1e-12.
pub fn check_rank_form(opts: &OracleOptions) -> Result<SuiteResult> {
    let mut s = Suite::new("rank form vs brute force", opts.seed, 0);
    let shape = FixtureShape {
        balanced: false,
        equal_weights: false,
        cluster_spread: 1,
    };
    for i in 0..opts.rank_cases as u64 {
        let stream = s.base + i;
        let d = fixture(opts.seed, stream, shape);
        s.cases += 1;
        for k in 0..d.n_endpoints() {
            let fast = win_fractions(&d, k)?;
            let mut slow = win_fractions_bruteforce(&d, k)?;
            if opts.inject_fault && i == 0 && k == 0 {
                slow.fractions[0] += 1e-6;
            }
            let worst = fast
                .fractions
                .iter()
                .zip(&slow.fractions)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if worst >= 1e-12 {
                s.fail(stream, format!("endpoint {k}: max difference {worst:e}"));
            }
        }
    }
    Ok(s.finish())
}

/// Balanced, equal-weight fixtures: θ̂ from the REML pipeline equals the
/// plug-in U-statistic average to 1e-10.
pub fn check_plug_in(opts: &OracleOptions) -> Result<SuiteResult> {
    let mut s = Suite::new("equal-size plug-in identity", opts.seed, 1);
    let shape = FixtureShape {
        balanced: true,
        equal_weights: true,
        cluster_spread: 1,
    };
    for i in 0..opts.balanced_cases as u64 {
        let stream = s.base + i;
        let d = fixture(opts.seed, stream, shape);
        let (_, g) = dataset_global_win_fractions(&d)?;
        let fit = match fit_reml(&g) {
            Ok(f) => f,
            Err(_) => {
                s.skipped += 1;
                continue;
            }
        };
        s.cases += 1;
        let theta = estimate_gwp(&fit, &g.weights).theta_hat;
        let plug = plug_in_theta(&d);
        if (theta - plug).abs() >= 1e-10 {
            s.fail(stream, format!("REML θ̂ {theta} vs plug-in {plug}"));
        }
    }
    Ok(s.finish())
}

/// Mean rank-sum difference equals N·K·(θ̂ - 0.5) to 1e-8·N·K.
pub fn check_rank_sum(opts: &OracleOptions) -> Result<SuiteResult> {
    let mut s = Suite::new("rank-sum identity", opts.seed, 1);
    let shape = FixtureShape {
        balanced: true,
        equal_weights: true,
        cluster_spread: 1,
    };
    for i in 0..opts.balanced_cases as u64 {
        let stream = s.base + i;
        let d = fixture(opts.seed, stream, shape);
        let ranks = (0..d.n_endpoints())
            .map(|k| rank_tables(&d, k))
            .collect::<Result<Vec<_>>>()?;
        let (_, g) = dataset_global_win_fractions(&d)?;
        s.cases += 1;
        let diag = rank_sum_equivalence(&g, &ranks, plug_in_theta(&d))?;
        if !diag.passed() {
            s.fail(
                stream,
                format!("lhs {} rhs {} diff {:e}", diag.lhs, diag.rhs, diag.abs_diff),
            );
        }
    }
    Ok(s.finish())
}

/// Balanced fixtures with interior solutions: REML components equal the
/// ANOVA estimators to 1e-8 relative.
pub fn check_reml_anova(opts: &OracleOptions) -> Result<SuiteResult> {
    let mut s = Suite::new("REML vs ANOVA", opts.seed, 2);
    let shape = FixtureShape {
        balanced: true,
        equal_weights: false,
        cluster_spread: 2,
    };
    let mut i = 0u64;
    // draw until enough interior cases, with a generous cap
    while s.cases < opts.balanced_cases && i < 20 * opts.balanced_cases as u64 {
        let stream = s.base + i;
        i += 1;
        let d = fixture(opts.seed, stream, shape);
        let (_, g) = dataset_global_win_fractions(&d)?;
        let anova = match balanced_anova_components(&g) {
            Ok(a) if a.sigma2_alpha > 0.0 && a.sigma2_eps > 0.0 => a,
            _ => {
                s.skipped += 1;
                continue;
            }
        };
        let fit = match fit_reml(&g) {
            Ok(f) => f,
            Err(e) => {
                s.cases += 1;
                s.fail(stream, format!("fit failed: {e}"));
                continue;
            }
        };
        s.cases += 1;
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        let ra = rel(fit.components.sigma2_alpha, anova.sigma2_alpha);
        let re = rel(fit.components.sigma2_eps, anova.sigma2_eps);
        if ra >= 1e-8 || re >= 1e-8 {
            s.fail(
                stream,
                format!(
                    "σ²_α {} vs {} (rel {ra:e}); σ²_ε {} vs {} (rel {re:e})",
                    fit.components.sigma2_alpha,
                    anova.sigma2_alpha,
                    fit.components.sigma2_eps,
                    anova.sigma2_eps
                ),
            );
        }
    }
    Ok(s.finish())
}

/// Δ̂ = 2θ̂ - 1 and λ̂ = θ̂/(1 - θ̂) to 1e-14, and swapping arms maps θ̂ to
/// 1 - θ̂, Δ̂ to -Δ̂ and λ̂ to 1/λ̂.
pub fn check_transforms(opts: &OracleOptions) -> Result<SuiteResult> {
    let mut s = Suite::new("transform consistency", opts.seed, 3);
    let shape = FixtureShape {
        balanced: false,
        equal_weights: false,
        cluster_spread: 1,
    };
    for i in 0..opts.transform_cases as u64 {
        let stream = s.base + i;
        let d = fixture(opts.seed, stream, shape);
        let fits = [d.clone(), d.mirrored()].map(|x| {
            dataset_global_win_fractions(&x).and_then(|(_, g)| {
                let fit = fit_reml(&g)?;
                Ok(estimate_gwp(&fit, &g.weights))
            })
        });
        let [Ok(a), Ok(b)] = fits else {
            s.skipped += 1;
            continue;
        };
        s.cases += 1;
        let mut problems = Vec::new();
        let wd = to_win_difference(&a, 0.95, Critical::NormalZ)?;
        if (wd.delta_hat - (2.0 * a.theta_hat - 1.0)).abs() > 1e-14 {
            problems.push(format!("Δ̂ {} vs 2θ̂-1", wd.delta_hat));
        }
        if let (Ok(oa), Ok(ob)) = (
            to_win_odds(&a, 0.95, Critical::NormalZ),
            to_win_odds(&b, 0.95, Critical::NormalZ),
        ) {
            let want = a.theta_hat / (1.0 - a.theta_hat);
            if (oa.lambda_hat - want).abs() > 1e-14 * want.max(1.0) {
                problems.push(format!("λ̂ {} vs θ̂/(1-θ̂) {want}", oa.lambda_hat));
            }
            if (oa.lambda_hat * ob.lambda_hat - 1.0).abs() > 1e-9 {
                problems.push(format!("λ̂·λ̂' = {}", oa.lambda_hat * ob.lambda_hat));
            }
        }
        if (a.theta_hat + b.theta_hat - 1.0).abs() > 1e-9 {
            problems.push(format!("θ̂ {} and mirrored {}", a.theta_hat, b.theta_hat));
        }
        let wb = to_win_difference(&b, 0.95, Critical::NormalZ)?;
        if (wd.delta_hat + wb.delta_hat).abs() > 1e-9 {
            problems.push(format!("Δ̂ {} and mirrored {}", wd.delta_hat, wb.delta_hat));
        }
        if !problems.is_empty() {
            s.fail(stream, problems.join("; "));
        }
    }
    Ok(s.finish())
}

pub fn run_all(opts: &OracleOptions) -> Result<Vec<SuiteResult>> {
    Ok(vec![
        check_rank_form(opts)?,
        check_plug_in(opts)?,
        check_rank_sum(opts)?,
        check_reml_anova(opts)?,
        check_transforms(opts)?,
    ])
}
