//! Ordinal marginals, exact win probabilities and the latent-to-observed
//! correlation map.

use std::fmt;
use std::str::FromStr;

use crate::dist::{bivariate_normal_cdf, normal_quantile};
use crate::error::{Error, Result};
use crate::ranks::heaviside;

/// A discrete distribution on ordered values, obtained by cutting a standard
/// normal at `thresholds`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrdinalMarginal {
    support: Vec<f64>,
    pmf: Vec<f64>,
    thresholds: Vec<f64>,
}

impl OrdinalMarginal {
    /// Categories with zero probability are dropped so that thresholds stay
    /// strictly increasing.
    pub fn from_pmf(support: Vec<f64>, pmf: Vec<f64>) -> Result<Self> {
        if support.len() != pmf.len() || support.is_empty() {
            return Err(Error::InvalidArgument(
                "support and pmf must be non-empty and of equal length".into(),
            ));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("support must be strictly increasing".into()));
        }
        if pmf.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidArgument("pmf entries must be non-negative".into()));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("pmf sums to {total}, not 1")));
        }
        let (support, pmf): (Vec<f64>, Vec<f64>) =
            support.into_iter().zip(pmf).filter(|&(_, p)| p > 0.0).unzip();
        let mut thresholds = Vec::with_capacity(pmf.len().saturating_sub(1));
        let mut cum = 0.0;
        for &p in &pmf[..pmf.len() - 1] {
            cum += p;
            thresholds.push(normal_quantile(cum.min(1.0)));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "category probabilities too small to separate thresholds".into(),
            ));
        }
        Ok(Self {
            support,
            pmf,
            thresholds,
        })
    }

    pub fn binomial(spec: BinomialSpec) -> Result<Self> {
        spec.validate()?;
        let support = (0..=spec.n).map(f64::from).collect();
        Self::from_pmf(support, binomial_pmf(spec.n, spec.p))
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.pmf).map(|(x, p)| x * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.support
            .iter()
            .zip(&self.pmf)
            .map(|(x, p)| p * (x - m).powi(2))
            .sum()
    }

    /// Category index for a latent standard-normal value.
    pub fn category(&self, z: f64) -> usize {
        self.thresholds.partition_point(|&t| t < z)
    }

    pub fn discretize(&self, z: f64) -> f64 {
        self.support[self.category(z)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialSpec {
    pub n: u32,
    pub p: f64,
}

impl BinomialSpec {
    pub fn new(n: u32, p: f64) -> Self {
        Self { n, p }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidArgument(format!(
                "binomial({}, {}) needs n >= 1 and 0 <= p <= 1",
                self.n, self.p
            )));
        }
        Ok(())
    }
}

impl fmt::Display for BinomialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "binomial({}, {})", self.n, self.p)
    }
}

impl FromStr for BinomialSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("`{s}` is not of the form binomial(n, p)"));
        let inner = s
            .trim()
            .strip_prefix("binomial(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (n, p) = inner.split_once(',').ok_or_else(bad)?;
        let spec = BinomialSpec {
            n: n.trim().parse().map_err(|_| bad())?,
            p: p.trim().parse().map_err(|_| bad())?,
        };
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(spec)
    }
}

pub fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    let mut coef = 1.0;
    (0..=n)
        .map(|x| {
            if x > 0 {
                coef *= f64::from(n - x + 1) / f64::from(x);
            }
            coef * p.powi(x as i32) * (1.0 - p).powi((n - x) as i32)
        })
        .collect()
}

/// P(X > Y) + ½P(X = Y) for independent discrete X ~ (xs, px), Y ~ (ys, py).
pub fn win_probability(xs: &[f64], px: &[f64], ys: &[f64], py: &[f64]) -> f64 {
    let mut theta = 0.0;
    for (x, fx) in xs.iter().zip(px) {
        for (y, fy) in ys.iter().zip(py) {
            theta += fx * fy * heaviside(x - y);
        }
    }
    theta
}

pub fn binomial_win_probability(treatment: BinomialSpec, control: BinomialSpec) -> f64 {
    let support = |n: u32| (0..=n).map(f64::from).collect::<Vec<_>>();
    win_probability(
        &support(treatment.n),
        &binomial_pmf(treatment.n, treatment.p),
        &support(control.n),
        &binomial_pmf(control.n, control.p),
    )
}

/// Treatment success probability giving win probability `target` against
/// `control` with `n` treatment trials.
pub fn solve_treatment_p(n: u32, control: BinomialSpec, target: f64) -> Result<f64> {
    let theta = |p: f64| binomial_win_probability(BinomialSpec::new(n, p), control);
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    let (low, high) = (theta(lo), theta(hi));
    if !(target > low && target < high) {
        return Err(Error::Unattainable { target, low, high });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = theta(mid);
        if (v - target).abs() < 1e-12 {
            return Ok(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Pearson correlation of (a(Z1), b(Z2)) when (Z1, Z2) is standard bivariate
/// normal with correlation `r_latent`, from exact cell probabilities.
pub fn discretized_correlation(a: &OrdinalMarginal, b: &OrdinalMarginal, r_latent: f64) -> f64 {
    let r = r_latent.clamp(-1.0, 1.0);
    let cuts = |m: &OrdinalMarginal| {
        let mut t = Vec::with_capacity(m.thresholds.len() + 2);
        t.push(f64::NEG_INFINITY);
        t.extend_from_slice(&m.thresholds);
        t.push(f64::INFINITY);
        t
    };
    let (ta, tb) = (cuts(a), cuts(b));
    let grid: Vec<Vec<f64>> = ta
        .iter()
        .map(|&h| tb.iter().map(|&k| bivariate_normal_cdf(h, k, r)).collect())
        .collect();
    let mut exy = 0.0;
    for i in 0..a.support.len() {
        for j in 0..b.support.len() {
            let cell = grid[i + 1][j + 1] - grid[i][j + 1] - grid[i + 1][j] + grid[i][j];
            exy += cell * a.support[i] * b.support[j];
        }
    }
    let cov = exy - a.mean() * b.mean();
    let denom = (a.variance() * b.variance()).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        cov / denom
    }
}

/// Latent correlation whose discretization has Pearson correlation `target`.
pub fn solve_intermediate_correlation(
    a: &OrdinalMarginal,
    b: &OrdinalMarginal,
    target: f64,
) -> Result<f64> {
    if target == 0.0 {
        return Ok(0.0);
    }
    const EDGE: f64 = 0.9999;
    let (mut lo, mut hi) = (-EDGE, EDGE);
    let (low, high) = (
        discretized_correlation(a, b, lo),
        discretized_correlation(a, b, hi),
    );
    if !(target >= low && target <= high) {
        return Err(Error::Unattainable { target, low, high });
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let v = discretized_correlation(a, b, mid);
        if (v - target).abs() < 1e-12 {
            return Ok(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(n: u32, p: f64) -> BinomialSpec {
        BinomialSpec::new(n, p)
    }

    #[test]
    fn marginal_invariants() {
        let m = OrdinalMarginal::binomial(b(4, 0.5)).unwrap();
        assert!((m.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(m.thresholds().len(), 4);
        assert!(m.thresholds().windows(2).all(|w| w[0] < w[1]));
        assert!((m.mean() - 2.0).abs() < 1e-14);
        assert!((m.variance() - 1.0).abs() < 1e-14);
        assert_eq!(m.discretize(-10.0), 0.0);
        assert_eq!(m.discretize(10.0), 4.0);
        assert_eq!(m.discretize(0.0), 2.0);
        assert!(OrdinalMarginal::from_pmf(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn binomial_spec_parsing() {
        let s: BinomialSpec = " binomial(6, 0.5) ".parse().unwrap();
        assert_eq!(s, b(6, 0.5));
        assert!("binomial(6)".parse::<BinomialSpec>().is_err());
        assert!("binomial(0, 0.5)".parse::<BinomialSpec>().is_err());
        assert!("binomial(3, 1.5)".parse::<BinomialSpec>().is_err());
        assert_eq!(s.to_string().parse::<BinomialSpec>().unwrap(), s);
    }

    #[test]
    fn win_probability_examples() {
        assert!((binomial_win_probability(b(4, 0.5), b(4, 0.5)) - 0.5).abs() < 1e-15);
        assert_eq!(binomial_win_probability(b(1, 1.0), b(1, 0.0)), 1.0);
        // single trials: P(1 vs 0) + ½[P(1,1) + P(0,0)]
        let want = 0.6 * 0.5 + 0.5 * (0.6 * 0.5 + 0.4 * 0.5);
        assert!((binomial_win_probability(b(1, 0.6), b(1, 0.5)) - want).abs() < 1e-15);
    }

    #[test]
    fn treatment_p_solutions() {
        let ctl = b(4, 0.5);
        assert!((solve_treatment_p(4, ctl, 0.5).unwrap() - 0.5).abs() < 1e-10);
        let p = solve_treatment_p(4, ctl, 0.64).unwrap();
        assert!((binomial_win_probability(b(4, p), ctl) - 0.64).abs() < 1e-10);
        assert!(matches!(
            solve_treatment_p(4, ctl, 0.999),
            Err(Error::Unattainable { .. })
        ));
    }

    #[test]
    fn correlation_map_examples() {
        let a = OrdinalMarginal::binomial(b(4, 0.5)).unwrap();
        let c = OrdinalMarginal::binomial(b(6, 0.5)).unwrap();
        assert!(discretized_correlation(&a, &c, 0.0).abs() < 1e-9);
        assert_eq!(solve_intermediate_correlation(&a, &c, 0.0).unwrap(), 0.0);
        let r = solve_intermediate_correlation(&a, &c, 0.3).unwrap();
        assert!((discretized_correlation(&a, &c, r) - 0.3).abs() < 1e-6);
        assert!(r >= 0.3);
        assert!(solve_intermediate_correlation(&a, &c, 0.9999).is_err());
    }

    #[test]
    fn attenuation_and_monotonicity() {
        let a = OrdinalMarginal::binomial(b(4, 0.5)).unwrap();
        let c = OrdinalMarginal::binomial(b(6, 0.62)).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=200 {
            let r = -0.999 + 1.998 * i as f64 / 200.0;
            let v = discretized_correlation(&a, &c, r);
            assert!(v >= prev - 1e-9, "not monotone at {r}");
            if r > 0.0 {
                assert!(v > 0.0 && v <= r + 1e-9, "r={r} v={v}");
            }
            prev = v;
        }
    }

    proptest! {
        #[test]
        fn solved_targets_round_trip(target in 0.01f64..0.7, p in 0.3f64..0.7) {
            let a = OrdinalMarginal::binomial(b(4, 0.5)).unwrap();
            let c = OrdinalMarginal::binomial(b(6, p)).unwrap();
            let r = solve_intermediate_correlation(&a, &c, target).unwrap();
            prop_assert!((discretized_correlation(&a, &c, r) - target).abs() < 1e-6);
            prop_assert!(r >= target);
        }

        #[test]
        fn win_probability_complement(n1 in 1u32..8, p1 in 0.0f64..1.0, n0 in 1u32..8, p0 in 0.0f64..1.0) {
            let t = binomial_win_probability(b(n1, p1), b(n0, p0));
            let c = binomial_win_probability(b(n0, p0), b(n1, p1));
            prop_assert!((t + c - 1.0).abs() < 1e-12);
        }
    }
}
