//! Random-intercept linear mixed model for global win fractions.
//!
//! Model: `y = β0 + β1·arm + α_cluster + ε`, α ~ N(0, σ²_α), ε ~ N(0, σ²_ε).
//! Writing σ² = σ²_α + σ²_ε and ρ = σ²_α / σ², a cluster of size n has
//! covariance σ²[(1-ρ)I + ρJ], so everything the REML criterion needs is a
//! function of per-cluster (n, mean, within-cluster sum of squares). σ² is
//! profiled out in closed form and the criterion is maximised over ρ alone.

use crate::data::Arm;
use crate::error::{Error, Result};
use crate::ranks::GlobalWinFractionTable;

/// Upper end of the ρ search interval.
pub const RHO_MAX: f64 = 1.0 - 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceComponents {
    pub sigma2_alpha: f64,
    pub sigma2_eps: f64,
    pub rho: f64,
}

impl VarianceComponents {
    pub fn new(sigma2_alpha: f64, sigma2_eps: f64) -> Self {
        let total = sigma2_alpha + sigma2_eps;
        let rho = if total > 0.0 { sigma2_alpha / total } else { 0.0 };
        Self {
            sigma2_alpha,
            sigma2_eps,
            rho,
        }
    }

    fn from_total(total: f64, rho: f64) -> Self {
        Self {
            sigma2_alpha: rho * total,
            sigma2_eps: (1.0 - rho) * total,
            rho,
        }
    }

    pub fn total(&self) -> f64 {
        self.sigma2_alpha + self.sigma2_eps
    }

    /// Both components zero.
    pub fn is_degenerate(&self) -> bool {
        self.total() == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSummary {
    pub arm: Arm,
    pub size: usize,
    pub mean: f64,
    /// Within-cluster sum of squared deviations from the cluster mean.
    pub ssw: f64,
}

pub fn cluster_summaries(g: &GlobalWinFractionTable) -> Vec<ClusterSummary> {
    let n_clusters = g.n_clusters();
    let mut arm = vec![None; n_clusters];
    let mut size = vec![0usize; n_clusters];
    let mut sum = vec![0.0; n_clusters];
    for (k, &v) in g.keys.iter().zip(&g.values) {
        arm[k.cluster] = Some(k.arm);
        size[k.cluster] += 1;
        sum[k.cluster] += v;
    }
    let mean: Vec<f64> = sum.iter().zip(&size).map(|(s, &n)| s / n as f64).collect();
    let mut ssw = vec![0.0; n_clusters];
    for (k, &v) in g.keys.iter().zip(&g.values) {
        ssw[k.cluster] += (v - mean[k.cluster]).powi(2);
    }
    (0..n_clusters)
        .filter_map(|c| {
            arm[c].map(|arm| ClusterSummary {
                arm,
                size: size[c],
                mean: mean[c],
                ssw: ssw[c],
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmMeans {
    /// GLS mean per arm, indexed by [`Arm::index`].
    pub mean: [f64; 2],
    pub var: [f64; 2],
}

/// Cluster weights are proportional to n/(1 + (n-1)ρ); Var(mean_i) is the
/// reciprocal of the summed weights n/(σ²(1 + (n-1)ρ)).
pub fn gls_arm_means(g: &GlobalWinFractionTable, vc: &VarianceComponents) -> ArmMeans {
    gls_from_clusters(&cluster_summaries(g), vc.rho, vc.total())
}

fn gls_from_clusters(clusters: &[ClusterSummary], rho: f64, total: f64) -> ArmMeans {
    let mut sw = [0.0; 2];
    let mut swy = [0.0; 2];
    for c in clusters {
        let w = c.size as f64 / (1.0 + (c.size as f64 - 1.0) * rho);
        sw[c.arm.index()] += w;
        swy[c.arm.index()] += w * c.mean;
    }
    ArmMeans {
        mean: [swy[0] / sw[0], swy[1] / sw[1]],
        var: [total / sw[0], total / sw[1]],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Convergence {
    pub iterations: usize,
    /// Profiled REML log-likelihood (up to an additive constant) at the
    /// solution.
    pub reml_criterion: f64,
    /// Best criterion value after each accepted optimizer step.
    pub history: Vec<f64>,
    /// Score dρ of the profiled criterion at the solution.
    pub final_gradient: f64,
    /// ρ̂ sits on the lower bound (σ̂²_α = 0).
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmmFit {
    pub beta0: f64,
    pub beta1: f64,
    pub se_beta1: f64,
    pub components: VarianceComponents,
    pub df: i64,
    pub n_clusters: usize,
    pub arm_clusters: [usize; 2],
    pub arm_means: ArmMeans,
    pub convergence: Convergence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Replaces the default C - 2 degrees of freedom.
    pub df_override: Option<i64>,
    /// Absolute tolerance in ρ for the derivative-free search.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            df_override: None,
            tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

pub fn fit_reml(g: &GlobalWinFractionTable) -> Result<LmmFit> {
    fit_reml_with(g, &FitOptions::default())
}

pub fn fit_reml_with(g: &GlobalWinFractionTable, opts: &FitOptions) -> Result<LmmFit> {
    let clusters = cluster_summaries(g);
    let profile = Profile::new(&clusters)?;
    let (rho, convergence) = profile.maximize(opts)?;
    let eval = profile.eval(rho);
    let total = eval.q / (profile.n - 2.0);
    let components = VarianceComponents::from_total(total, rho);
    let arm_means = gls_from_clusters(&clusters, rho, total);
    let n_clusters = clusters.len();
    Ok(LmmFit {
        beta0: arm_means.mean[0],
        beta1: arm_means.mean[1] - arm_means.mean[0],
        se_beta1: (arm_means.var[0] + arm_means.var[1]).sqrt(),
        components,
        df: opts.df_override.unwrap_or(n_clusters as i64 - 2),
        n_clusters,
        arm_clusters: profile.arm_clusters,
        arm_means,
        convergence,
    })
}

/// Closed-form one-way ANOVA components for equal cluster sizes: σ̂²_ε is the
/// pooled within-cluster mean square and σ̂²_α = max(0, (MSB - MSW)/n) with
/// MSB the between-cluster mean square around the arm means.
pub fn balanced_anova_components(g: &GlobalWinFractionTable) -> Result<VarianceComponents> {
    let clusters = cluster_summaries(g);
    let n = clusters
        .first()
        .map(|c| c.size)
        .ok_or_else(|| Error::InvalidArgument("no clusters".into()))?;
    if clusters.iter().any(|c| c.size != n) {
        return Err(Error::InvalidArgument("cluster sizes are unequal".into()));
    }
    let c = clusters.len();
    if c <= 2 || n < 2 {
        return Err(Error::InvalidArgument(
            "ANOVA components need more than two clusters of size two or more".into(),
        ));
    }
    let mut arm_sum = [0.0; 2];
    let mut arm_count = [0usize; 2];
    for cl in &clusters {
        arm_sum[cl.arm.index()] += cl.mean;
        arm_count[cl.arm.index()] += 1;
    }
    let arm_mean = [
        arm_sum[0] / arm_count[0] as f64,
        arm_sum[1] / arm_count[1] as f64,
    ];
    let nf = n as f64;
    let ssw: f64 = clusters.iter().map(|c| c.ssw).sum();
    let msw = ssw / (c as f64 * (nf - 1.0));
    let msb = nf
        * clusters
            .iter()
            .map(|cl| (cl.mean - arm_mean[cl.arm.index()]).powi(2))
            .sum::<f64>()
        / (c as f64 - 2.0);
    let sigma2_alpha = ((msb - msw) / nf).max(0.0);
    Ok(VarianceComponents::new(sigma2_alpha, msw))
}

struct Eval {
    ell: f64,
    q: f64,
}

struct Profile<'a> {
    clusters: &'a [ClusterSummary],
    n: f64,
    n_clusters: f64,
    ssw: f64,
    arm_clusters: [usize; 2],
}

impl<'a> Profile<'a> {
    fn new(clusters: &'a [ClusterSummary]) -> Result<Self> {
        let mut arm_clusters = [0usize; 2];
        for c in clusters {
            arm_clusters[c.arm.index()] += 1;
        }
        if clusters.len() < 2 || arm_clusters.contains(&0) {
            return Err(Error::InvalidDataset(
                "the mixed model needs at least one cluster per arm".into(),
            ));
        }
        let n: usize = clusters.iter().map(|c| c.size).sum();
        let ssw: f64 = clusters.iter().map(|c| c.ssw).sum();
        let p = Self {
            clusters,
            n: n as f64,
            n_clusters: clusters.len() as f64,
            ssw,
            arm_clusters,
        };
        if n <= 2 {
            return Err(Error::InvalidDataset("too few observations".into()));
        }
        if !(p.eval(0.0).q > 0.0) {
            return Err(Error::Degenerate(
                "all global win fractions are identical within arms".into(),
            ));
        }
        if ssw == 0.0 && n > clusters.len() {
            return Err(Error::Degenerate(
                "zero within-cluster (residual) variance".into(),
            ));
        }
        Ok(p)
    }

    fn means(&self, rho: f64) -> ([f64; 2], [f64; 2]) {
        let m = gls_from_clusters(self.clusters, rho, 1.0);
        (m.mean, [1.0 / m.var[0], 1.0 / m.var[1]])
    }

    /// Profiled restricted log-likelihood, dropping constants:
    /// -½[(N-2) ln Q + (N-C) ln(1-ρ) + Σ ln(1+(n-1)ρ) + ln S_0 + ln S_1]
    fn eval(&self, rho: f64) -> Eval {
        let a = 1.0 - rho;
        let (mean, s) = self.means(rho);
        let mut q = if self.ssw > 0.0 { self.ssw / a } else { 0.0 };
        let mut log_det = 0.0;
        for c in self.clusters {
            let n = c.size as f64;
            let d = 1.0 + (n - 1.0) * rho;
            let delta = c.mean - mean[c.arm.index()];
            q += n * delta * delta / d;
            log_det += d.ln();
        }
        log_det += (self.n - self.n_clusters) * a.ln();
        let ell = -0.5 * ((self.n - 2.0) * q.ln() + log_det + s[0].ln() + s[1].ln());
        Eval { ell, q }
    }

    /// dℓ/dρ. β enters only through Q, where it is optimal, so its
    /// dependence on ρ drops out.
    fn score(&self, rho: f64) -> f64 {
        let a = 1.0 - rho;
        let (mean, s) = self.means(rho);
        let mut q = if self.ssw > 0.0 { self.ssw / a } else { 0.0 };
        let mut dq = if self.ssw > 0.0 { self.ssw / (a * a) } else { 0.0 };
        let mut dlog_det = -(self.n - self.n_clusters) / a;
        let mut ds = [0.0; 2];
        for c in self.clusters {
            let n = c.size as f64;
            let d = 1.0 + (n - 1.0) * rho;
            let delta = c.mean - mean[c.arm.index()];
            q += n * delta * delta / d;
            dq -= n * (n - 1.0) * delta * delta / (d * d);
            dlog_det += (n - 1.0) / d;
            ds[c.arm.index()] -= n * (n - 1.0) / (d * d);
        }
        -0.5 * ((self.n - 2.0) * dq / q + dlog_det + ds[0] / s[0] + ds[1] / s[1])
    }

    fn maximize(&self, opts: &FitOptions) -> Result<(f64, Convergence)> {
        const GRID: [f64; 21] = [
            0.0, 1e-4, 1e-3, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8,
            0.9, 0.95, 0.99, 0.999, 1.0 - 1e-6, RHO_MAX,
        ];
        let values: Vec<f64> = GRID.iter().map(|&r| self.eval(r).ell).collect();
        let best = values
            .iter()
            .enumerate()
            .fold(0, |b, (i, &v)| if v > values[b] { i } else { b });
        let lo = GRID[best.saturating_sub(1)];
        let hi = GRID[(best + 1).min(GRID.len() - 1)];

        let search = brent_minimize(
            |r| -self.eval(r).ell,
            lo,
            hi,
            opts.tolerance,
            opts.max_iterations,
        )
        .ok_or(Error::NonConvergence {
            iterations: opts.max_iterations,
        })?;
        let mut rho = search.x;
        let mut history: Vec<f64> = search.history.iter().map(|v| -v).collect();
        if values[best] > -search.fx {
            rho = GRID[best];
            history.push(values[best]);
        }

        // The derivative-free search stalls at ~sqrt(eps) relative accuracy
        // in ρ; finish interior solutions by bisection on the score.
        if rho > 0.0 && rho < RHO_MAX {
            if let Some(root) = self.score_root(rho, opts.tolerance) {
                if self.eval(root).ell >= self.eval(rho).ell - 1e-12 * self.eval(rho).ell.abs().max(1.0) {
                    rho = root;
                }
            }
        }
        if rho > 0.0 && self.score(0.0) <= 0.0 && self.eval(0.0).ell >= self.eval(rho).ell {
            rho = 0.0;
        }
        let ell = self.eval(rho).ell;
        if history.last().is_none_or(|&h| ell > h) {
            history.push(ell);
        }
        Ok((
            rho,
            Convergence {
                iterations: search.iterations,
                reml_criterion: ell,
                history,
                final_gradient: self.score(rho),
                boundary: rho == 0.0,
            },
        ))
    }

    fn score_root(&self, rho: f64, tol: f64) -> Option<f64> {
        let mut width = tol.max(1e-12) * 10.0;
        let (mut lo, mut hi);
        loop {
            lo = (rho - width).max(0.0);
            hi = (rho + width).min(RHO_MAX);
            if self.score(lo) > 0.0 && self.score(hi) < 0.0 {
                break;
            }
            if lo == 0.0 && hi == RHO_MAX {
                return None;
            }
            width *= 10.0;
            if width > 1e-3 {
                return None;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.score(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

struct BrentResult {
    x: f64,
    fx: f64,
    iterations: usize,
    history: Vec<f64>,
}

/// Brent's derivative-free minimizer on [a, b] (golden section with
/// parabolic interpolation). Returns None when the iteration cap is hit.
fn brent_minimize(
    f: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> Option<BrentResult> {
    let golden = 0.5 * (3.0 - 5f64.sqrt());
    let eps = f64::EPSILON.sqrt();
    let mut x = a + golden * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e): (f64, f64) = (0.0, 0.0);
    let mut history = vec![fx];

    for iter in 0..max_iter {
        let m = 0.5 * (a + b);
        let tol1 = eps * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            return Some(BrentResult {
                x,
                fx,
                iterations: iter,
                history,
            });
        }
        let mut golden_step = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden_step = false;
            }
        }
        if golden_step {
            e = if x < m { b - x } else { a - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
            history.push(fx);
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranks::RowKey;

    /// Builds a table from per-cluster value lists; the first `n_control`
    /// clusters are control.
    pub(crate) fn table(clusters: &[Vec<f64>], n_control: usize) -> GlobalWinFractionTable {
        let mut keys = Vec::new();
        let mut values = Vec::new();
        let mut sizes = [0, 0];
        for (c, vals) in clusters.iter().enumerate() {
            let arm = if c < n_control { Arm::Control } else { Arm::Treatment };
            for &v in vals {
                keys.push(RowKey { arm, cluster: c });
                values.push(v);
                sizes[arm.index()] += 1;
            }
        }
        GlobalWinFractionTable {
            keys,
            values,
            weights: vec![1.0],
            arm_sizes: sizes,
        }
    }

    fn fixture_4x3() -> GlobalWinFractionTable {
        table(
            &[
                vec![0.2, 0.4, 0.3],
                vec![0.5, 0.7, 0.6],
                vec![0.6, 0.8, 0.4],
                vec![0.9, 0.7, 0.8],
            ],
            2,
        )
    }

    #[test]
    fn anova_hand_computation() {
        // cluster means 0.3, 0.6 | 0.6, 0.8; each SSW = 0.02, 0.02, 0.08, 0.02
        // MSW = 0.14 / 8 = 0.0175
        // arm means 0.45, 0.7; MSB = 3 * (0.0225*2 + 0.01*2) / 2 = 0.0975
        // σ²_α = (0.0975 - 0.0175)/3 = 0.08/3
        let vc = balanced_anova_components(&fixture_4x3()).unwrap();
        assert!((vc.sigma2_eps - 0.0175).abs() < 1e-15);
        assert!((vc.sigma2_alpha - 0.08 / 3.0).abs() < 1e-15);
        assert!((vc.rho - vc.sigma2_alpha / (vc.sigma2_alpha + vc.sigma2_eps)).abs() < 1e-12);
    }

    #[test]
    fn reml_matches_anova_on_fixture() {
        let g = fixture_4x3();
        let fit = fit_reml(&g).unwrap();
        let vc = balanced_anova_components(&g).unwrap();
        assert!(!fit.convergence.boundary);
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        assert!(rel(fit.components.sigma2_alpha, vc.sigma2_alpha) < 1e-8);
        assert!(rel(fit.components.sigma2_eps, vc.sigma2_eps) < 1e-8);
        assert_eq!(fit.df, 2);
        assert!((fit.beta1 - 0.25).abs() < 1e-14);
        assert!(fit.convergence.final_gradient.abs() < 1e-6);
    }

    #[test]
    fn anova_degenerate_and_unbalanced() {
        let flat = table(&[vec![0.5; 3], vec![0.5; 3], vec![0.5; 3], vec![0.5; 3]], 2);
        let vc = balanced_anova_components(&flat).unwrap();
        assert!(vc.is_degenerate());
        assert_eq!((vc.sigma2_alpha, vc.sigma2_eps), (0.0, 0.0));
        let uneven = table(&[vec![0.1, 0.2], vec![0.3], vec![0.4, 0.5], vec![0.6, 0.7]], 2);
        assert!(balanced_anova_components(&uneven).is_err());
        // no within-cluster variation: σ̂²_ε = 0
        let between = table(&[vec![0.1; 2], vec![0.3; 2], vec![0.6; 2], vec![0.9; 2]], 2);
        let vc = balanced_anova_components(&between).unwrap();
        assert_eq!(vc.sigma2_eps, 0.0);
        assert!(fit_reml(&between).is_err());
    }

    #[test]
    fn boundary_when_cluster_means_equal() {
        // every cluster has mean 0.5 within arm; only residual variation
        let g = table(
            &[
                vec![0.4, 0.6, 0.5],
                vec![0.6, 0.4, 0.5],
                vec![0.3, 0.7, 0.5],
                vec![0.7, 0.3, 0.5],
            ],
            2,
        );
        let fit = fit_reml(&g).unwrap();
        assert_eq!(fit.components.sigma2_alpha, 0.0);
        assert!(fit.convergence.boundary);
        assert!(fit.components.sigma2_eps > 0.0);
    }

    #[test]
    fn gls_means_special_cases() {
        let g = fixture_4x3();
        // equal sizes: simple arm means whatever ρ is
        for rho in [0.0, 0.3, 0.9] {
            let m = gls_arm_means(&g, &VarianceComponents::from_total(0.04, rho));
            assert!((m.mean[0] - 0.45).abs() < 1e-14);
            assert!((m.mean[1] - 0.7).abs() < 1e-14);
        }
        // ρ = 0: individual-weighted mean
        let uneven = table(&[vec![0.1, 0.2, 0.3], vec![0.9], vec![0.5, 0.5], vec![0.2]], 2);
        let m = gls_arm_means(&uneven, &VarianceComponents::new(0.0, 0.05));
        assert!((m.mean[0] - 1.5 / 4.0).abs() < 1e-14);
        assert!((m.var[0] - 0.05 / 4.0).abs() < 1e-15);
        // one cluster per arm: that cluster's mean
        let single = table(&[vec![0.1, 0.3], vec![0.6, 0.8, 0.7]], 1);
        for rho in [0.0, 0.5] {
            let m = gls_arm_means(&single, &VarianceComponents::from_total(0.02, rho));
            assert!((m.mean[0] - 0.2).abs() < 1e-14);
            assert!((m.mean[1] - 0.7).abs() < 1e-14);
        }
    }

    #[test]
    fn criterion_history_is_monotone() {
        let g = table(
            &[
                vec![0.1, 0.25, 0.3, 0.2],
                vec![0.5, 0.6],
                vec![0.45, 0.4, 0.55],
                vec![0.8, 0.7, 0.9, 0.75, 0.85],
                vec![0.3, 0.5],
                vec![0.65, 0.6, 0.7],
            ],
            3,
        );
        let fit = fit_reml(&g).unwrap();
        let h = &fit.convergence.history;
        assert!(h.windows(2).all(|w| w[1] >= w[0]), "{h:?}");
        if !fit.convergence.boundary {
            assert!(fit.convergence.final_gradient.abs() < 1e-6);
        }
        assert_eq!(fit.df, 4);
    }

    #[test]
    fn scale_equivariance() {
        let g = table(
            &[
                vec![0.1, 0.25, 0.3, 0.2],
                vec![0.5, 0.6],
                vec![0.45, 0.4, 0.55],
                vec![0.8, 0.7, 0.9, 0.75, 0.85],
            ],
            2,
        );
        let a = 3.5;
        let f1 = fit_reml(&g).unwrap();
        let f2 = fit_reml(&g.scaled(a)).unwrap();
        assert!((f2.beta1 - a * f1.beta1).abs() < 1e-10);
        assert!((f2.components.sigma2_alpha - a * a * f1.components.sigma2_alpha).abs() < 1e-9);
        assert!((f2.components.sigma2_eps - a * a * f1.components.sigma2_eps).abs() < 1e-9);
        assert!((f2.components.rho - f1.components.rho).abs() < 1e-9);
    }

    #[test]
    fn identical_values_rejected() {
        let g = table(&[vec![0.5; 3], vec![0.5; 2]], 1);
        assert!(matches!(fit_reml(&g), Err(Error::Degenerate(_))));
    }

    #[test]
    fn df_override() {
        let opts = FitOptions {
            df_override: Some(7),
            ..FitOptions::default()
        };
        assert_eq!(fit_reml_with(&fixture_4x3(), &opts).unwrap().df, 7);
    }
}
