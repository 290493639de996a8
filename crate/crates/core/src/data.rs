//! Trial data model, tab-delimited ingestion and descriptive summaries.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arm {
    Control = 0,
    Treatment = 1,
}

impl Arm {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn other(self) -> Arm {
        match self {
            Arm::Control => Arm::Treatment,
            Arm::Treatment => Arm::Control,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Arm::Control => "control",
            Arm::Treatment => "treatment",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "higher" | "higher_is_better" | "+" => Ok(Direction::HigherIsBetter),
            "lower" | "lower_is_better" | "-" => Ok(Direction::LowerIsBetter),
            other => Err(Error::InvalidArgument(format!(
                "unknown direction `{other}` (expected higher or lower)"
            ))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::HigherIsBetter => "higher_is_better",
            Direction::LowerIsBetter => "lower_is_better",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointSpec {
    pub name: String,
    pub direction: Direction,
    pub weight: f64,
}

impl EndpointSpec {
    pub fn new(name: impl Into<String>, direction: Direction, weight: f64) -> Self {
        Self {
            name: name.into(),
            direction,
            weight,
        }
    }

    pub fn higher(name: impl Into<String>) -> Self {
        Self::new(name, Direction::HigherIsBetter, 1.0)
    }
}

/// Checks that weights are nonnegative, finite, and not all zero.
pub fn validate_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidArgument("at least one endpoint is required".into()));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "endpoint weight {w} must be finite and nonnegative"
        )));
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::InvalidArgument("endpoint weights are all zero".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub label: String,
    pub arm: Arm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub arm: Arm,
    /// Index into [`TrialDataset::clusters`].
    pub cluster: usize,
    pub individual: String,
    pub values: Vec<f64>,
}

/// Clustered individual-level responses on K endpoints. Construction
/// enforces the invariants; the value is immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialDataset {
    endpoints: Vec<EndpointSpec>,
    clusters: Vec<Cluster>,
    rows: Vec<Record>,
}

/// A row given with an opaque cluster label, before cluster indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub arm: Arm,
    pub cluster: String,
    pub individual: String,
    pub values: Vec<f64>,
}

impl RawRecord {
    pub fn new(arm: Arm, cluster: impl Into<String>, individual: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            arm,
            cluster: cluster.into(),
            individual: individual.into(),
            values,
        }
    }
}

impl TrialDataset {
    pub fn new(endpoints: Vec<EndpointSpec>, raw: Vec<RawRecord>) -> Result<Self> {
        let k = endpoints.len();
        validate_weights(&endpoints.iter().map(|e| e.weight).collect::<Vec<_>>())?;

        let mut cluster_index: HashMap<String, usize> = HashMap::new();
        let mut clusters: Vec<Cluster> = Vec::new();
        let mut seen: HashSet<(usize, String)> = HashSet::with_capacity(raw.len());
        let mut rows = Vec::with_capacity(raw.len());
        for (i, r) in raw.into_iter().enumerate() {
            if r.values.len() != k {
                return Err(Error::InvalidDataset(format!(
                    "row {i} has {} values, expected {k}",
                    r.values.len()
                )));
            }
            if let Some(v) = r.values.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!("row {i} has non-finite value {v}")));
            }
            let idx = match cluster_index.get(&r.cluster) {
                Some(&idx) => {
                    if clusters[idx].arm != r.arm {
                        return Err(Error::ClusterInBothArms(r.cluster));
                    }
                    idx
                }
                None => {
                    clusters.push(Cluster {
                        label: r.cluster.clone(),
                        arm: r.arm,
                    });
                    cluster_index.insert(r.cluster, clusters.len() - 1);
                    clusters.len() - 1
                }
            };
            if !seen.insert((idx, r.individual.clone())) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate individual `{}` in cluster `{}`",
                    r.individual, clusters[idx].label
                )));
            }
            rows.push(Record {
                arm: r.arm,
                cluster: idx,
                individual: r.individual,
                values: r.values,
            });
        }
        for arm in [Arm::Control, Arm::Treatment] {
            if !clusters.iter().any(|c| c.arm == arm) {
                return Err(Error::EmptyArm(arm.name()));
            }
        }
        Ok(Self {
            endpoints,
            clusters,
            rows,
        })
    }

    pub fn endpoints(&self) -> &[EndpointSpec] {
        &self.endpoints
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn rows(&self) -> &[Record] {
        &self.rows
    }

    pub fn n_endpoints(&self) -> usize {
        self.endpoints.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.endpoints.iter().map(|e| e.weight).collect()
    }

    /// (N_0, N_1)
    pub fn arm_sizes(&self) -> [usize; 2] {
        let mut n = [0, 0];
        for r in &self.rows {
            n[r.arm.index()] += 1;
        }
        n
    }

    /// (C_0, C_1)
    pub fn arm_cluster_counts(&self) -> [usize; 2] {
        let mut c = [0, 0];
        for cl in &self.clusters {
            c[cl.arm.index()] += 1;
        }
        c
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut n = vec![0; self.clusters.len()];
        for r in &self.rows {
            n[r.cluster] += 1;
        }
        n
    }

    /// Values of endpoint `k` in row order.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.values[k]).collect()
    }

    /// Negates every lower-is-better endpoint and resets its flag, so that
    /// larger values are better everywhere downstream.
    pub fn apply_directions(&self) -> TrialDataset {
        let flip: Vec<bool> = self
            .endpoints
            .iter()
            .map(|e| e.direction == Direction::LowerIsBetter)
            .collect();
        let mut out = self.clone();
        if !flip.iter().any(|&f| f) {
            return out;
        }
        for r in &mut out.rows {
            for (v, &f) in r.values.iter_mut().zip(&flip) {
                if f {
                    *v = -*v;
                }
            }
        }
        for e in &mut out.endpoints {
            e.direction = Direction::HigherIsBetter;
        }
        out
    }

    /// Same data with arms swapped.
    pub fn mirrored(&self) -> TrialDataset {
        let mut out = self.clone();
        for c in &mut out.clusters {
            c.arm = c.arm.other();
        }
        for r in &mut out.rows {
            r.arm = r.arm.other();
        }
        out
    }

    /// Same individuals with endpoint weights replaced.
    pub fn with_weights(&self, weights: &[f64]) -> Result<TrialDataset> {
        if weights.len() != self.endpoints.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights given for {} endpoints",
                weights.len(),
                self.endpoints.len()
            )));
        }
        validate_weights(weights)?;
        let mut out = self.clone();
        for (e, &w) in out.endpoints.iter_mut().zip(weights) {
            e.weight = w;
        }
        Ok(out)
    }
}

/// Column mapping for [`load_trial_tsv`]. Endpoint columns are given in the
/// same order as the endpoint specs.
#[derive(Debug, Clone)]
pub struct Schema {
    pub arm: String,
    pub cluster: String,
    pub id: String,
    pub endpoints: Vec<String>,
    pub control_label: String,
    pub treatment_label: String,
}

impl Schema {
    pub fn new(arm: &str, cluster: &str, id: &str, endpoints: &[&str]) -> Self {
        Self {
            arm: arm.into(),
            cluster: cluster.into(),
            id: id.into(),
            endpoints: endpoints.iter().map(|s| s.to_string()).collect(),
            control_label: "0".into(),
            treatment_label: "1".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    /// 1-based line number in the input file (header is line 1).
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSize {
    pub label: String,
    pub arm: Arm,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub total: usize,
    pub kept: usize,
    pub dropped: usize,
    pub cluster_sizes: Vec<ClusterSize>,
    pub arm_totals: [usize; 2],
    pub issues: Vec<Issue>,
}

fn is_missing(cell: &str) -> bool {
    matches!(cell.trim(), "" | "NA" | "na" | "N/A" | "." | "NaN" | "nan")
}

/// Reads a tab-delimited trial file with a header row. Rows with any missing
/// arm, cluster, id or endpoint cell are dropped and reported.
pub fn load_trial_tsv(
    path: impl AsRef<Path>,
    schema: &Schema,
    endpoints: Vec<EndpointSpec>,
) -> Result<(TrialDataset, ValidationReport)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_trial_tsv(&bytes, schema, endpoints)
}

/// [`load_trial_tsv`] on an in-memory buffer.
pub fn parse_trial_tsv(
    input: &[u8],
    schema: &Schema,
    endpoints: Vec<EndpointSpec>,
) -> Result<(TrialDataset, ValidationReport)> {
    if schema.endpoints.len() != endpoints.len() {
        return Err(Error::InvalidArgument(format!(
            "schema names {} endpoint columns but {} endpoint specs were given",
            schema.endpoints.len(),
            endpoints.len()
        )));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .flexible(false)
        .quoting(true)
        .from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    let col = |name: &str| -> Result<usize> {
        header
            .iter()
            .position(|h| h.trim().trim_matches('"') == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let arm_col = col(&schema.arm)?;
    let cluster_col = col(&schema.cluster)?;
    let id_col = col(&schema.id)?;
    let endpoint_cols = schema
        .endpoints
        .iter()
        .map(|c| col(c))
        .collect::<Result<Vec<_>>>()?;

    let mut raw = Vec::new();
    let mut issues = Vec::new();
    let mut total = 0;
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
        total += 1;
        let cell = |c: usize| rec.get(c).unwrap_or("").trim();

        let mut missing: Vec<&str> = Vec::new();
        for (name, c) in [
            (schema.arm.as_str(), arm_col),
            (schema.cluster.as_str(), cluster_col),
            (schema.id.as_str(), id_col),
        ] {
            if is_missing(cell(c)) {
                missing.push(name);
            }
        }
        let mut values = Vec::with_capacity(endpoint_cols.len());
        for (name, &c) in schema.endpoints.iter().zip(&endpoint_cols) {
            let s = cell(c);
            if is_missing(s) {
                missing.push(name);
                continue;
            }
            let v: f64 = s.parse().map_err(|_| {
                Error::Parse(format!("line {line}: `{s}` in column `{name}` is not a number"))
            })?;
            if !v.is_finite() {
                missing.push(name);
                continue;
            }
            values.push(v);
        }
        if !missing.is_empty() {
            issues.push(Issue {
                line,
                reason: format!("missing {}", missing.join(", ")),
            });
            continue;
        }

        let arm = parse_arm(cell(arm_col), schema).ok_or_else(|| Error::InvalidArm {
            line,
            value: cell(arm_col).to_string(),
        })?;
        raw.push(RawRecord {
            arm,
            cluster: cell(cluster_col).to_string(),
            individual: cell(id_col).to_string(),
            values,
        });
    }

    let dataset = TrialDataset::new(endpoints, raw)?;
    let sizes = dataset.cluster_sizes();
    let report = ValidationReport {
        total,
        kept: dataset.len(),
        dropped: total - dataset.len(),
        cluster_sizes: dataset
            .clusters()
            .iter()
            .zip(sizes)
            .map(|(c, size)| ClusterSize {
                label: c.label.clone(),
                arm: c.arm,
                size,
            })
            .collect(),
        arm_totals: dataset.arm_sizes(),
        issues,
    };
    Ok((dataset, report))
}

fn parse_arm(cell: &str, schema: &Schema) -> Option<Arm> {
    if cell == schema.control_label {
        return Some(Arm::Control);
    }
    if cell == schema.treatment_label {
        return Some(Arm::Treatment);
    }
    // numeric labels may be written as 0.0 / 1.0
    let (c, t, v) = (
        schema.control_label.parse::<f64>().ok()?,
        schema.treatment_label.parse::<f64>().ok()?,
        cell.parse::<f64>().ok()?,
    );
    if v == c {
        Some(Arm::Control)
    } else if v == t {
        Some(Arm::Treatment)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

/// Per-arm moments, pooled correlation and observed ICC for a set of
/// endpoint columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptives {
    pub names: Vec<String>,
    /// `by_arm[arm][k]`
    pub by_arm: [Vec<MeanSd>; 2],
    /// Pearson correlation across all individuals.
    pub correlation: Vec<Vec<f64>>,
    /// One-way ANOVA ICC within arms, `None` when undefined.
    pub icc: Vec<Option<f64>>,
}

pub fn summarize(d: &TrialDataset) -> Descriptives {
    let names = d.endpoints().iter().map(|e| e.name.clone()).collect();
    let columns: Vec<Vec<f64>> = (0..d.n_endpoints()).map(|k| d.column(k)).collect();
    let arms: Vec<Arm> = d.rows().iter().map(|r| r.arm).collect();
    let clusters: Vec<usize> = d.rows().iter().map(|r| r.cluster).collect();
    summarize_columns(names, &columns, &arms, &clusters)
}

/// [`summarize`] on arbitrary columns aligned with `arms`/`clusters` (used
/// for win-fraction descriptives as well as raw scores).
pub fn summarize_columns(
    names: Vec<String>,
    columns: &[Vec<f64>],
    arms: &[Arm],
    clusters: &[usize],
) -> Descriptives {
    let by_arm = [Arm::Control, Arm::Treatment].map(|arm| {
        columns
            .iter()
            .map(|col| {
                let vals: Vec<f64> = col
                    .iter()
                    .zip(arms)
                    .filter(|(_, &a)| a == arm)
                    .map(|(&v, _)| v)
                    .collect();
                mean_sd(&vals)
            })
            .collect()
    });
    let k = columns.len();
    let mut correlation = vec![vec![1.0; k]; k];
    for a in 0..k {
        for b in (a + 1)..k {
            let r = pearson(&columns[a], &columns[b]);
            correlation[a][b] = r;
            correlation[b][a] = r;
        }
    }
    let icc = columns
        .iter()
        .map(|col| anova_icc(col, arms, clusters))
        .collect();
    Descriptives {
        names,
        by_arm,
        correlation,
        icc,
    }
}

fn mean_sd(v: &[f64]) -> MeanSd {
    let n = v.len() as f64;
    if v.is_empty() {
        return MeanSd {
            mean: f64::NAN,
            sd: f64::NAN,
        };
    }
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MeanSd { mean, sd }
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// ANOVA moment estimator of the ICC on residuals after arm means, with the
/// unbalanced-design effective cluster size
/// n0 = (N - Σ_i Σ_c n_ic² / N_i) / (C - 2).
pub fn anova_icc(values: &[f64], arms: &[Arm], clusters: &[usize]) -> Option<f64> {
    let mut per_cluster: BTreeMap<usize, (Arm, usize, f64)> = BTreeMap::new();
    let mut arm_sum = [0.0; 2];
    let mut arm_n = [0usize; 2];
    for ((&v, &a), &c) in values.iter().zip(arms).zip(clusters) {
        let e = per_cluster.entry(c).or_insert((a, 0, 0.0));
        e.1 += 1;
        e.2 += v;
        arm_sum[a.index()] += v;
        arm_n[a.index()] += 1;
    }
    let n_total = values.len() as f64;
    let n_clusters = per_cluster.len();
    if n_clusters <= 2 || values.len() <= n_clusters || arm_n.contains(&0) {
        return None;
    }
    let arm_mean = [arm_sum[0] / arm_n[0] as f64, arm_sum[1] / arm_n[1] as f64];
    let cluster_mean: BTreeMap<usize, f64> = per_cluster
        .iter()
        .map(|(&c, &(_, n, s))| (c, s / n as f64))
        .collect();
    let ssw: f64 = values
        .iter()
        .zip(clusters)
        .map(|(v, c)| (v - cluster_mean[c]).powi(2))
        .sum();
    let ssb: f64 = per_cluster
        .iter()
        .map(|(c, &(a, n, _))| n as f64 * (cluster_mean[c] - arm_mean[a.index()]).powi(2))
        .sum();
    let msw = ssw / (n_total - n_clusters as f64);
    let msb = ssb / (n_clusters as f64 - 2.0);
    let sum_sq_over_arm: f64 = per_cluster
        .values()
        .map(|&(a, n, _)| (n * n) as f64 / arm_n[a.index()] as f64)
        .sum();
    let n0 = (n_total - sum_sq_over_arm) / (n_clusters as f64 - 2.0);
    let denom = msb + (n0 - 1.0) * msw;
    if !(denom > 0.0) {
        return None;
    }
    Some((msb - msw) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "arm\tschool\tidno\tscore\tactive\n\
        0\tA\t1\t3\t0\n\
        0\tA\t2\t5\t1\n\
        0\tB\t3\t4\t\n\
        1\tC\t4\t6\t0\n\
        1\tC\t5\t2\t1\n\
        1\tD\t6\t7\t0\n";

    fn toy_schema() -> Schema {
        Schema::new("arm", "school", "idno", &["score", "active"])
    }

    fn toy_endpoints() -> Vec<EndpointSpec> {
        vec![
            EndpointSpec::higher("score"),
            EndpointSpec::new("active", Direction::LowerIsBetter, 1.0),
        ]
    }

    #[test]
    fn listwise_deletion_on_toy_file() {
        let (d, rep) = parse_trial_tsv(TOY.as_bytes(), &toy_schema(), toy_endpoints()).unwrap();
        assert_eq!(rep.total, 6);
        assert_eq!(rep.kept, 5);
        assert_eq!(rep.dropped, 1);
        assert_eq!(rep.issues.len(), 1);
        assert_eq!(rep.issues[0].line, 4);
        assert!(rep.issues[0].reason.contains("active"));
        assert_eq!(d.len(), 5);
        assert_eq!(rep.arm_totals, [2, 3]);
        // cluster B vanished with its only row
        assert_eq!(d.arm_cluster_counts(), [1, 2]);
        assert_eq!(rep.kept + rep.dropped, rep.total);
    }

    #[test]
    fn complete_file_drops_nothing() {
        let text = TOY.replace("4\t\n", "4\t1\n");
        let (_, rep) = parse_trial_tsv(text.as_bytes(), &toy_schema(), toy_endpoints()).unwrap();
        assert_eq!(rep.dropped, 0);
        assert_eq!(rep.kept, rep.total);
    }

    #[test]
    fn missing_column_is_reported() {
        let mut schema = toy_schema();
        schema.endpoints[1] = "debut".into();
        let err = parse_trial_tsv(TOY.as_bytes(), &schema, toy_endpoints()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "debut"));
    }

    #[test]
    fn bad_arm_value() {
        let text = TOY.replace("1\tD\t6", "2\tD\t6");
        let err = parse_trial_tsv(text.as_bytes(), &toy_schema(), toy_endpoints()).unwrap_err();
        assert!(matches!(err, Error::InvalidArm { line: 7, .. }));
    }

    #[test]
    fn cluster_in_both_arms() {
        let text = TOY.replace("1\tD\t6", "1\tA\t6");
        let err = parse_trial_tsv(text.as_bytes(), &toy_schema(), toy_endpoints()).unwrap_err();
        assert!(matches!(err, Error::ClusterInBothArms(c) if c == "A"));
    }

    #[test]
    fn arm_empty_after_deletion() {
        let text = "arm\tschool\tidno\tscore\tactive\n0\tA\t1\t3\t\n1\tC\t4\t6\t0\n";
        let err = parse_trial_tsv(text.as_bytes(), &toy_schema(), toy_endpoints()).unwrap_err();
        assert!(matches!(err, Error::EmptyArm("control")));
    }

    #[test]
    fn remapped_arm_labels() {
        let text = TOY.replace("\n0\t", "\nctl\t").replace("\n1\t", "\ntrt\t");
        let mut schema = toy_schema();
        schema.control_label = "ctl".into();
        schema.treatment_label = "trt".into();
        let (d, _) = parse_trial_tsv(text.as_bytes(), &schema, toy_endpoints()).unwrap();
        assert_eq!(d.arm_sizes(), [2, 3]);
    }

    #[test]
    fn unreadable_file() {
        let err = load_trial_tsv("/nonexistent/share.tab", &toy_schema(), toy_endpoints()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn directions_negate_lower_is_better() {
        let (d, _) = parse_trial_tsv(TOY.as_bytes(), &toy_schema(), toy_endpoints()).unwrap();
        let f = d.apply_directions();
        assert_eq!(f.column(1), vec![0.0, -1.0, -0.0, -1.0, -0.0]);
        assert_eq!(f.column(0), d.column(0));
        assert!(f.endpoints().iter().all(|e| e.direction == Direction::HigherIsBetter));
        // flags were reset, so a second pass is the identity
        assert_eq!(f.apply_directions(), f);
    }

    #[test]
    fn duplicate_individual_rejected() {
        let text = TOY.replace("0\tA\t2", "0\tA\t1");
        assert!(parse_trial_tsv(text.as_bytes(), &toy_schema(), toy_endpoints()).is_err());
    }

    #[test]
    fn constant_data_summary() {
        let raw = (0..8)
            .map(|i| {
                let arm = if i < 4 { Arm::Control } else { Arm::Treatment };
                RawRecord::new(arm, format!("c{}", i / 2), i.to_string(), vec![2.5])
            })
            .collect();
        let d = TrialDataset::new(vec![EndpointSpec::higher("x")], raw).unwrap();
        let s = summarize(&d);
        for arm in 0..2 {
            assert_eq!(s.by_arm[arm][0].mean, 2.5);
            assert_eq!(s.by_arm[arm][0].sd, 0.0);
        }
        assert_eq!(s.icc[0], None);
    }

    #[test]
    fn anova_icc_balanced_hand_computation() {
        // arm 0: clusters {1,3}, {5,7}; arm 1: clusters {2,2}, {6,4}
        let values = [1.0, 3.0, 5.0, 7.0, 2.0, 2.0, 6.0, 4.0];
        let arms = [0, 0, 0, 0, 1, 1, 1, 1].map(|a| if a == 0 { Arm::Control } else { Arm::Treatment });
        let clusters = [0, 0, 1, 1, 2, 2, 3, 3];
        // SSW = 2+2+0+2 = 6, MSW = 6/4 = 1.5
        // arm means 4 and 3.5; SSB = 2*(4+4) + 2*(2.25+2.25) = 25, MSB = 12.5
        // n0 = 2, icc = (12.5-1.5)/(12.5+1.5) = 11/14
        let icc = anova_icc(&values, &arms, &clusters).unwrap();
        assert!((icc - 11.0 / 14.0).abs() < 1e-14);
    }

    #[test]
    fn deletion_is_order_independent() {
        let lines: Vec<&str> = TOY.lines().collect();
        let mut reversed = vec![lines[0]];
        reversed.extend(lines[1..].iter().rev());
        let text = reversed.join("\n") + "\n";
        let (a, _) = parse_trial_tsv(TOY.as_bytes(), &toy_schema(), toy_endpoints()).unwrap();
        let (b, _) = parse_trial_tsv(text.as_bytes(), &toy_schema(), toy_endpoints()).unwrap();
        let key = |d: &TrialDataset| {
            let mut v: Vec<(String, String)> = d
                .rows()
                .iter()
                .map(|r| (d.clusters()[r.cluster].label.clone(), r.individual.clone()))
                .collect();
            v.sort();
            v
        };
        assert_eq!(key(&a), key(&b));
    }
}
