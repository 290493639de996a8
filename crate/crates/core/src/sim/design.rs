//! Turning a scenario configuration into sampling parameters, and drawing
//! clustered trials from them.
//!
//! Each cluster draws a latent 2-vector z ~ N(0, Φ̃) shared by its members;
//! each member adds u ~ N(0, Ω̃ - Φ̃). The latent vector of a cluster of size n
//! then has correlation I⊗(Ω̃ - Φ̃) + J⊗Φ̃, and each coordinate is cut at its
//! arm's marginal thresholds.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{Arm, EndpointSpec, RawRecord, TrialDataset};
use crate::error::{Error, Result};
use crate::sim::config::{ClusterSizeMode, CorrelationTargets, ScenarioConfig};
use crate::sim::marginal::{
    binomial_win_probability, solve_intermediate_correlation, solve_treatment_p, BinomialSpec,
    OrdinalMarginal,
};

const PSD_EPS: f64 = 1e-12;

fn is_psd2(a: f64, b: f64, c: f64) -> bool {
    a >= -PSD_EPS && c >= -PSD_EPS && a * c - b * b >= -PSD_EPS
}

impl CorrelationTargets {
    /// I⊗(Ω - Φ) + J⊗Φ has the eigenvalues of Ω - Φ (when n ≥ 2) and of
    /// Ω - Φ + nΦ.
    pub fn check_psd(&self, cluster_size: usize) -> Result<()> {
        let (a, b, c) = (
            1.0 - self.phi11,
            self.omega12 - self.phi12,
            1.0 - self.phi22,
        );
        if cluster_size >= 2 && !is_psd2(a, b, c) {
            return Err(Error::NotPsd(format!(
                "Ω - Φ = [[{a}, {b}], [{b}, {c}]]"
            )));
        }
        let n = cluster_size as f64;
        let (a2, b2, c2) = (a + n * self.phi11, b + n * self.phi12, c + n * self.phi22);
        if !is_psd2(a2, b2, c2) {
            return Err(Error::NotPsd(format!(
                "Ω - Φ + {cluster_size}Φ = [[{a2}, {b2}], [{b2}, {c2}]]"
            )));
        }
        Ok(())
    }
}

/// Lower Cholesky factor of a 2×2 positive semi-definite matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Chol2 {
    l11: f64,
    l21: f64,
    l22: f64,
}

impl Chol2 {
    fn new(a: f64, b: f64, c: f64, what: &str) -> Result<Self> {
        if !is_psd2(a, b, c) {
            return Err(Error::NotPsd(format!(
                "latent {what} [[{a}, {b}], [{b}, {c}]]"
            )));
        }
        let l11 = a.max(0.0).sqrt();
        let l21 = if l11 > 0.0 { b / l11 } else { 0.0 };
        let l22 = (c - l21 * l21).max(0.0).sqrt();
        Ok(Self { l11, l21, l22 })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        [self.l11 * g1, self.l21 * g1 + self.l22 * g2]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmDesign {
    pub marginals: [OrdinalMarginal; 2],
    pub binomials: [BinomialSpec; 2],
    /// Latent counterparts of the configured correlations.
    pub latent: CorrelationTargets,
    between: Chol2,
    within: Chol2,
}

impl ArmDesign {
    fn new(binomials: [BinomialSpec; 2], targets: &CorrelationTargets) -> Result<Self> {
        let marginals = [
            OrdinalMarginal::binomial(binomials[0])?,
            OrdinalMarginal::binomial(binomials[1])?,
        ];
        let [m1, m2] = &marginals;
        let latent = CorrelationTargets {
            omega12: solve_intermediate_correlation(m1, m2, targets.omega12)?,
            phi11: solve_intermediate_correlation(m1, m1, targets.phi11)?,
            phi22: solve_intermediate_correlation(m2, m2, targets.phi22)?,
            phi12: solve_intermediate_correlation(m1, m2, targets.phi12)?,
        };
        let between = Chol2::new(latent.phi11, latent.phi12, latent.phi22, "Φ̃")?;
        let within = Chol2::new(
            1.0 - latent.phi11,
            latent.omega12 - latent.phi12,
            1.0 - latent.phi22,
            "Ω̃ - Φ̃",
        )?;
        Ok(Self {
            marginals,
            binomials,
            latent,
            between,
            within,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedScenario {
    pub config: ScenarioConfig,
    /// Indexed by [`Arm::index`].
    pub arms: [ArmDesign; 2],
    /// Exact per-endpoint win probabilities of the solved design.
    pub endpoint_theta: [f64; 2],
    pub true_theta: f64,
}

/// Validates the configuration, solves the treatment marginals and the
/// latent correlations for each arm, and checks positive semi-definiteness.
pub fn prepare(cfg: &ScenarioConfig) -> Result<PreparedScenario> {
    cfg.validate()?;
    cfg.correlations
        .check_psd(cfg.cluster_size_mode().max_size())?;
    let targets = cfg.endpoint_targets();
    let mut treatment = cfg.control;
    for k in 0..2 {
        let n = cfg.control[k].n;
        treatment[k] = BinomialSpec::new(n, solve_treatment_p(n, cfg.control[k], targets[k])?);
    }
    let control = ArmDesign::new(cfg.control, &cfg.correlations)?;
    let treated = ArmDesign::new(treatment, &cfg.correlations)?;
    let endpoint_theta = [
        binomial_win_probability(treatment[0], cfg.control[0]),
        binomial_win_probability(treatment[1], cfg.control[1]),
    ];
    Ok(PreparedScenario {
        config: cfg.clone(),
        arms: [control, treated],
        endpoint_theta,
        true_theta: cfg.true_theta(),
    })
}

fn draw_cluster_size<R: Rng + ?Sized>(mode: ClusterSizeMode, rng: &mut R) -> usize {
    match mode {
        ClusterSizeMode::Equal(n) => n,
        ClusterSizeMode::Deletion { n_base, p } => loop {
            // an emptied cluster redraws its own deletion indicators
            let kept = (0..n_base).filter(|_| !rng.random_bool(p)).count();
            if kept > 0 {
                break kept;
            }
        },
    }
}

pub fn simulation_endpoints() -> Vec<EndpointSpec> {
    vec![EndpointSpec::higher("k1"), EndpointSpec::higher("k2")]
}

/// Draws one trial: C/2 control clusters followed by C/2 treatment clusters.
pub fn generate_trial<R: Rng + ?Sized>(p: &PreparedScenario, rng: &mut R) -> Result<TrialDataset> {
    let cfg = &p.config;
    let mode = cfg.cluster_size_mode();
    let half = cfg.clusters / 2;
    let mut raw = Vec::with_capacity(cfg.clusters * mode.max_size());
    for c in 0..cfg.clusters {
        let arm = if c < half { Arm::Control } else { Arm::Treatment };
        let design = &p.arms[arm.index()];
        let size = draw_cluster_size(mode, rng);
        let z = design.between.draw(rng);
        for j in 0..size {
            let u = design.within.draw(rng);
            let values = vec![
                design.marginals[0].discretize(z[0] + u[0]),
                design.marginals[1].discretize(z[1] + u[1]),
            ];
            raw.push(RawRecord::new(arm, format!("c{c}"), j.to_string(), values));
        }
    }
    TrialDataset::new(simulation_endpoints(), raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::replicate_rng;

    #[test]
    fn equal_sizes_and_arms() {
        let cfg = ScenarioConfig {
            clusters: 10,
            cluster_size: 30,
            ..ScenarioConfig::default()
        };
        let p = prepare(&cfg).unwrap();
        let d = generate_trial(&p, &mut replicate_rng(1, 0)).unwrap();
        assert!(d.cluster_sizes().iter().all(|&n| n == 30));
        assert_eq!(d.arm_cluster_counts(), [5, 5]);
        assert_eq!(d.len(), 300);
    }

    #[test]
    fn deletion_mean_size() {
        let cfg = ScenarioConfig {
            clusters: 500,
            cluster_size: 40,
            deletion_prob: 0.25,
            ..ScenarioConfig::default()
        };
        let p = prepare(&cfg).unwrap();
        let d = generate_trial(&p, &mut replicate_rng(2, 0)).unwrap();
        let sizes = d.cluster_sizes();
        let mean = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
        let se = (40.0 * 0.25 * 0.75 / 500.0f64).sqrt();
        assert!((mean - 30.0).abs() < 3.0 * se, "mean size {mean}");
        assert!(sizes.iter().all(|&n| n >= 1 && n <= 40));
    }

    #[test]
    fn non_psd_targets_rejected() {
        let cfg = ScenarioConfig {
            correlations: CorrelationTargets {
                omega12: 0.1,
                phi11: 0.9,
                phi22: 0.9,
                phi12: -0.9,
            },
            ..ScenarioConfig::default()
        };
        assert!(matches!(prepare(&cfg), Err(Error::NotPsd(_))));
    }

    #[test]
    fn solved_design_hits_targets() {
        let cfg = ScenarioConfig {
            theta_targets: [0.64, 0.64],
            theta_offset: 0.03,
            ..ScenarioConfig::default()
        };
        let p = prepare(&cfg).unwrap();
        assert!((p.endpoint_theta[0] - 0.61).abs() < 1e-10);
        assert!((p.endpoint_theta[1] - 0.67).abs() < 1e-10);
        for arm in &p.arms {
            assert!(arm.latent.omega12 >= cfg.correlations.omega12);
        }
        // treatment thresholds differ, so its latent solutions differ too
        assert_ne!(p.arms[0].latent, p.arms[1].latent);
    }
}
