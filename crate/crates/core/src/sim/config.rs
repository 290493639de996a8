//! Scenario configuration and its `key = value` text form.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::inference::{Critical, Scale};
use crate::sim::marginal::BinomialSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTargets {
    /// Within-individual correlation between the two endpoints.
    pub omega12: f64,
    /// Intracluster correlation of endpoint 1.
    pub phi11: f64,
    /// Intracluster correlation of endpoint 2.
    pub phi22: f64,
    /// Correlation of endpoint 1 and endpoint 2 across two individuals of
    /// the same cluster.
    pub phi12: f64,
}

impl Default for CorrelationTargets {
    fn default() -> Self {
        Self {
            omega12: 0.3,
            phi11: 0.1,
            phi22: 0.05,
            phi12: 0.025,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClusterSizeMode {
    Equal(usize),
    /// `n_base` individuals each deleted independently with probability `p`.
    Deletion { n_base: usize, p: f64 },
}

impl ClusterSizeMode {
    pub fn max_size(&self) -> usize {
        match *self {
            ClusterSizeMode::Equal(n) => n,
            ClusterSizeMode::Deletion { n_base, .. } => n_base,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Total clusters, split equally between arms.
    pub clusters: usize,
    /// Cluster size, or the pre-deletion size when `deletion_prob > 0`.
    pub cluster_size: usize,
    pub deletion_prob: f64,
    pub control: [BinomialSpec; 2],
    /// Per-endpoint win probability targets before `theta_offset`.
    pub theta_targets: [f64; 2],
    /// Heterogeneity offset: endpoint targets become θ₁ - offset, θ₂ + offset.
    pub theta_offset: f64,
    pub correlations: CorrelationTargets,
    pub level: f64,
    pub scales: Vec<Scale>,
    pub critical: Critical,
    pub reps: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            clusters: 20,
            cluster_size: 30,
            deletion_prob: 0.0,
            control: [BinomialSpec::new(4, 0.5), BinomialSpec::new(6, 0.5)],
            theta_targets: [0.5, 0.5],
            theta_offset: 0.0,
            correlations: CorrelationTargets::default(),
            level: 0.95,
            scales: vec![Scale::Identity, Scale::Logit],
            critical: Critical::StudentT,
            reps: 1000,
            seed: 20_240_917,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|v| parse_num::<f64>(key, v))
        .collect()
}

impl ScenarioConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "clusters" => self.clusters = parse_num(key, value)?,
            "allocation" => {
                if value.replace(' ', "") != "1:1" {
                    return Err(Error::Config(format!(
                        "allocation `{value}` unsupported; only 1:1 is implemented"
                    )));
                }
            }
            "cluster_size" => self.cluster_size = parse_num(key, value)?,
            "deletion_prob" => self.deletion_prob = parse_num(key, value)?,
            "marginals.control.k1" => self.control[0] = value.parse()?,
            "marginals.control.k2" => self.control[1] = value.parse()?,
            "theta_targets" | "theta" => {
                self.theta_targets = match parse_list(key, value)?.as_slice() {
                    [t] => [*t, *t],
                    [t1, t2] => [*t1, *t2],
                    _ => {
                        return Err(Error::Config(
                            "theta_targets takes one value or two comma-separated values".into(),
                        ))
                    }
                }
            }
            "theta_offset" => self.theta_offset = parse_num(key, value)?,
            "omega12" => self.correlations.omega12 = parse_num(key, value)?,
            "phi11" => self.correlations.phi11 = parse_num(key, value)?,
            "phi22" => self.correlations.phi22 = parse_num(key, value)?,
            "phi12" => self.correlations.phi12 = parse_num(key, value)?,
            "level" => self.level = parse_num(key, value)?,
            "scale" => {
                self.scales = match value.to_ascii_lowercase().as_str() {
                    "both" => vec![Scale::Identity, Scale::Logit],
                    other => vec![other.parse()?],
                }
            }
            "crit" => self.critical = value.parse()?,
            "reps" => self.reps = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn endpoint_targets(&self) -> [f64; 2] {
        [
            self.theta_targets[0] - self.theta_offset,
            self.theta_targets[1] + self.theta_offset,
        ]
    }

    /// Global win probability under equal endpoint weights.
    pub fn true_theta(&self) -> f64 {
        let t = self.endpoint_targets();
        0.5 * (t[0] + t[1])
    }

    pub fn cluster_size_mode(&self) -> ClusterSizeMode {
        if self.deletion_prob > 0.0 {
            ClusterSizeMode::Deletion {
                n_base: self.cluster_size,
                p: self.deletion_prob,
            }
        } else {
            ClusterSizeMode::Equal(self.cluster_size)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters < 4 || self.clusters % 2 != 0 {
            return Err(Error::Config(format!(
                "clusters must be even and at least 4 (got {})",
                self.clusters
            )));
        }
        if self.cluster_size == 0 {
            return Err(Error::Config("cluster_size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.deletion_prob) {
            return Err(Error::Config("deletion_prob must lie in [0, 1)".into()));
        }
        for t in self.endpoint_targets() {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::Config(format!("endpoint target {t} outside (0, 1)")));
            }
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config("level must lie in (0, 1)".into()));
        }
        if self.scales.is_empty() {
            return Err(Error::Config("at least one interval scale is required".into()));
        }
        if self.reps == 0 {
            return Err(Error::Config("reps must be positive".into()));
        }
        let c = &self.correlations;
        for (name, v) in [
            ("omega12", c.omega12),
            ("phi11", c.phi11),
            ("phi22", c.phi22),
            ("phi12", c.phi12),
        ] {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} outside [-1, 1]")));
            }
        }
        Ok(())
    }

    /// The configuration in the same `key = value` form it is read from.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let scale = if self.scales.len() == 2 {
            "both".to_string()
        } else {
            self.scales[0].to_string()
        };
        let _ = writeln!(s, "clusters = {}", self.clusters);
        let _ = writeln!(s, "allocation = 1:1");
        let _ = writeln!(s, "cluster_size = {}", self.cluster_size);
        let _ = writeln!(s, "deletion_prob = {}", self.deletion_prob);
        let _ = writeln!(s, "marginals.control.k1 = {}", self.control[0]);
        let _ = writeln!(s, "marginals.control.k2 = {}", self.control[1]);
        let _ = writeln!(
            s,
            "theta_targets = {}, {}",
            self.theta_targets[0], self.theta_targets[1]
        );
        let _ = writeln!(s, "theta_offset = {}", self.theta_offset);
        let _ = writeln!(s, "omega12 = {}", self.correlations.omega12);
        let _ = writeln!(s, "phi11 = {}", self.correlations.phi11);
        let _ = writeln!(s, "phi22 = {}", self.correlations.phi22);
        let _ = writeln!(s, "phi12 = {}", self.correlations.phi12);
        let _ = writeln!(s, "level = {}", self.level);
        let _ = writeln!(s, "scale = {scale}");
        let _ = writeln!(s, "crit = {}", self.critical);
        let _ = writeln!(s, "reps = {}", self.reps);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_round_trip() {
        let text = "\
# C = 10 cell
clusters = 10
cluster_size = 40
deletion_prob = 0.25
marginals.control.k1 = binomial(4, 0.5)
marginals.control.k2 = binomial(6, 0.5)
theta_targets = 0.64
theta_offset = 0.03
omega12 = 0.3   # weak
scale = logit
crit = z
reps = 50
seed = 9
";
        let cfg = ScenarioConfig::from_text(text).unwrap();
        assert_eq!(cfg.clusters, 10);
        assert_eq!(
            cfg.cluster_size_mode(),
            ClusterSizeMode::Deletion { n_base: 40, p: 0.25 }
        );
        let t = cfg.endpoint_targets();
        assert!((t[0] - 0.61).abs() < 1e-12 && (t[1] - 0.67).abs() < 1e-12);
        assert!((cfg.true_theta() - 0.64).abs() < 1e-12);
        assert_eq!(cfg.scales, vec![Scale::Logit]);
        assert_eq!(cfg.critical, Critical::NormalZ);
        cfg.validate().unwrap();
        assert_eq!(ScenarioConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(ScenarioConfig::from_text("clusters 10").is_err());
        assert!(ScenarioConfig::from_text("bogus = 1").is_err());
        assert!(ScenarioConfig::from_text("allocation = 2:1").is_err());
        assert!(ScenarioConfig::from_text("theta_targets = 0.5, 0.6, 0.7").is_err());
        let odd = ScenarioConfig::from_text("clusters = 7").unwrap();
        assert!(odd.validate().is_err());
        let big = ScenarioConfig::from_text("theta = 0.99\ntheta_offset = 0.03").unwrap();
        assert!(big.validate().is_err());
    }
}
