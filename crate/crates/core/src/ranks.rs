//! Midranks, win fractions and global win fractions.
//!
//! A win fraction is the proportion of opposite-arm responses an individual
//! beats, counting ties as half a win. With overall midrank `R` (among all N
//! responses) and group midrank `G` (within the individual's own arm of
//! size N_i) it equals `(R - G) / (N - N_i)`.

use crate::data::{validate_weights, Arm, TrialDataset};
use crate::error::{Error, Result};

/// Midranks: tied values share the mean of the positions they occupy.
pub fn midranks(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("midranks of an empty sample".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("midranks of NaN".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let v = values[order[start]];
        let mut end = start + 1;
        // exact equality; -0.0 and 0.0 tie
        while end < order.len() && values[order[end]] == v {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = 0.5 * ((start + 1 + end) as f64);
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    Ok(ranks)
}

/// Row identity carried alongside per-row statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowKey {
    pub arm: Arm,
    pub cluster: usize,
}

fn row_keys(d: &TrialDataset) -> Vec<RowKey> {
    d.rows()
        .iter()
        .map(|r| RowKey {
            arm: r.arm,
            cluster: r.cluster,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub endpoint: usize,
    pub keys: Vec<RowKey>,
    /// Midrank among all N responses.
    pub overall: Vec<f64>,
    /// Midrank among the N_i responses of the row's own arm.
    pub group: Vec<f64>,
    pub arm_sizes: [usize; 2],
}

pub fn rank_tables(d: &TrialDataset, k: usize) -> Result<RankTable> {
    if k >= d.n_endpoints() {
        return Err(Error::InvalidArgument(format!("endpoint index {k} out of range")));
    }
    let keys = row_keys(d);
    let values = d.column(k);
    let overall = midranks(&values)?;
    let mut group = vec![0.0; values.len()];
    for arm in [Arm::Control, Arm::Treatment] {
        let idx: Vec<usize> = (0..values.len()).filter(|&i| keys[i].arm == arm).collect();
        let sub: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        for (&i, r) in idx.iter().zip(midranks(&sub)?) {
            group[i] = r;
        }
    }
    Ok(RankTable {
        endpoint: k,
        keys,
        overall,
        group,
        arm_sizes: d.arm_sizes(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WinFractionTable {
    pub endpoint: usize,
    pub keys: Vec<RowKey>,
    pub fractions: Vec<f64>,
    pub arm_sizes: [usize; 2],
}

impl WinFractionTable {
    /// Mean win fraction over the rows of `arm`.
    pub fn arm_mean(&self, arm: Arm) -> f64 {
        arm_mean(&self.keys, &self.fractions, arm)
    }
}

fn arm_mean(keys: &[RowKey], values: &[f64], arm: Arm) -> f64 {
    let (s, n) = keys
        .iter()
        .zip(values)
        .filter(|(k, _)| k.arm == arm)
        .fold((0.0, 0usize), |(s, n), (_, &v)| (s + v, n + 1));
    s / n as f64
}

/// Y = (R - G) / (N - N_i).
pub fn win_fractions_rank_form(rt: &RankTable) -> Result<WinFractionTable> {
    let [n0, n1] = rt.arm_sizes;
    if n0 == 0 || n1 == 0 {
        return Err(Error::EmptyArm(if n0 == 0 { "control" } else { "treatment" }));
    }
    let opposite = |arm: Arm| match arm {
        Arm::Control => n1 as f64,
        Arm::Treatment => n0 as f64,
    };
    let fractions = rt
        .keys
        .iter()
        .zip(rt.overall.iter().zip(&rt.group))
        .map(|(key, (r, g))| (r - g) / opposite(key.arm))
        .collect();
    Ok(WinFractionTable {
        endpoint: rt.endpoint,
        keys: rt.keys.clone(),
        fractions,
        arm_sizes: rt.arm_sizes,
    })
}

/// Rank-form win fractions for endpoint `k`.
pub fn win_fractions(d: &TrialDataset, k: usize) -> Result<WinFractionTable> {
    win_fractions_rank_form(&rank_tables(d, k)?)
}

/// Heaviside comparison: 1 for a win, 1/2 for a tie, 0 for a loss.
pub fn heaviside(diff: f64) -> f64 {
    if diff > 0.0 {
        1.0
    } else if diff == 0.0 {
        0.5
    } else {
        0.0
    }
}

/// Win fractions by direct enumeration of all opposite-arm comparisons.
/// O(N_0 N_1); intended as a check on the rank form.
pub fn win_fractions_bruteforce(d: &TrialDataset, k: usize) -> Result<WinFractionTable> {
    if k >= d.n_endpoints() {
        return Err(Error::InvalidArgument(format!("endpoint index {k} out of range")));
    }
    let keys = row_keys(d);
    let values = d.column(k);
    let fractions = keys
        .iter()
        .zip(&values)
        .map(|(key, &x)| {
            let (mut wins, mut n) = (0.0, 0usize);
            for (other, &y) in keys.iter().zip(&values) {
                if other.arm != key.arm {
                    wins += heaviside(x - y);
                    n += 1;
                }
            }
            wins / n as f64
        })
        .collect();
    Ok(WinFractionTable {
        endpoint: k,
        keys,
        fractions,
        arm_sizes: d.arm_sizes(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalWinFractionTable {
    pub keys: Vec<RowKey>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
    pub arm_sizes: [usize; 2],
}

impl GlobalWinFractionTable {
    pub fn arm_mean(&self, arm: Arm) -> f64 {
        arm_mean(&self.keys, &self.values, arm)
    }

    pub fn n_clusters(&self) -> usize {
        self.keys.iter().map(|k| k.cluster + 1).max().unwrap_or(0)
    }

    /// Same values with every entry multiplied by `a` (used for
    /// scale-equivariance checks).
    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out
    }
}

/// Weighted within-individual mean of the K endpoint win fractions.
pub fn global_win_fractions(
    tables: &[WinFractionTable],
    weights: &[f64],
) -> Result<GlobalWinFractionTable> {
    let first = tables
        .first()
        .ok_or_else(|| Error::InvalidArgument("no win fraction tables".into()))?;
    if tables.len() != weights.len() {
        return Err(Error::InvalidArgument(format!(
            "{} tables but {} weights",
            tables.len(),
            weights.len()
        )));
    }
    validate_weights(weights)?;
    if tables.iter().any(|t| t.keys != first.keys) {
        return Err(Error::InvalidArgument(
            "win fraction tables cover different individuals".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    let values = (0..first.keys.len())
        .map(|i| {
            tables
                .iter()
                .zip(weights)
                .map(|(t, w)| w * t.fractions[i])
                .sum::<f64>()
                / total
        })
        .collect();
    Ok(GlobalWinFractionTable {
        keys: first.keys.clone(),
        values,
        weights: weights.to_vec(),
        arm_sizes: first.arm_sizes,
    })
}

/// Rank-form win fractions for every endpoint, combined with the dataset's
/// endpoint weights. Directions must already be applied.
pub fn dataset_global_win_fractions(
    d: &TrialDataset,
) -> Result<(Vec<WinFractionTable>, GlobalWinFractionTable)> {
    let tables = (0..d.n_endpoints())
        .map(|k| win_fractions(d, k))
        .collect::<Result<Vec<_>>>()?;
    let global = global_win_fractions(&tables, &d.weights())?;
    Ok((tables, global))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WinLossTie {
    pub win: f64,
    pub loss: f64,
    pub tie: f64,
}

/// Treatment win/loss/tie proportions over all N_1 N_0 pairs.
pub fn win_loss_tie_proportions(d: &TrialDataset, k: usize) -> WinLossTie {
    let col = d.column(k);
    let (mut trt, mut ctl) = (Vec::new(), Vec::new());
    for (r, v) in d.rows().iter().zip(col) {
        match r.arm {
            Arm::Treatment => trt.push(v),
            Arm::Control => ctl.push(v),
        }
    }
    let (mut win, mut loss, mut tie) = (0u64, 0u64, 0u64);
    for &x in &trt {
        for &y in &ctl {
            if x > y {
                win += 1;
            } else if x < y {
                loss += 1;
            } else {
                tie += 1;
            }
        }
    }
    let pairs = (trt.len() * ctl.len()) as f64;
    WinLossTie {
        win: win as f64 / pairs,
        loss: loss as f64 / pairs,
        tie: tie as f64 / pairs,
    }
}
