//! Distributional test utilities shared by the verification harnesses.
//!
//! Pass/fail is decided against fixed distance thresholds from the test
//! configuration, not p-values, so reports are reproducible without
//! distribution tables.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// A sorted sample of finite values; infinities are counted separately as an
/// atom at infinity.
#[derive(Debug, Clone)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    inf_count: usize,
}

impl EmpiricalSample {
    pub fn new(mut raw: Vec<f64>) -> Result<Self> {
        let before = raw.len();
        raw.retain(|v| v.is_finite());
        let inf_count = before - raw.len();
        if raw.iter().any(|v| v.is_nan()) {
            return Err(Error::Domain("sample contains NaN".into()));
        }
        raw.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EmpiricalSample {
            values: raw,
            inf_count,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn inf_count(&self) -> usize {
        self.inf_count
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Result of one distributional check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: String,
    pub value: f64,
    pub threshold: Option<f64>,
    pub pass: Option<bool>,
    pub sample_size: usize,
    pub notes: String,
}

impl TestReport {
    pub fn thresholded(statistic: impl Into<String>, value: f64, threshold: f64, n: usize) -> Self {
        TestReport {
            statistic: statistic.into(),
            value,
            threshold: Some(threshold),
            pass: Some(value <= threshold),
            sample_size: n,
            notes: String::new(),
        }
    }

    pub fn unthresholded(statistic: impl Into<String>, value: f64, n: usize, notes: &str) -> Self {
        TestReport {
            statistic: statistic.into(),
            value,
            threshold: None,
            pass: None,
            sample_size: n,
            notes: notes.to_string(),
        }
    }
}

/// Kolmogorov-Smirnov sup distance between the empirical CDF of a sorted
/// sample and a continuous reference CDF, evaluated at the sample points
/// (both sides of each jump).
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    ks_distance_mixed(sorted, &cdf, &cdf)
}

/// KS distance against a reference that may itself have atoms: `cdf_left`
/// must return the left limit (mass strictly below x), which differs from
/// `cdf` exactly at the reference atoms.
pub fn ks_distance_mixed(
    sorted: &[f64],
    cdf: &impl Fn(f64) -> f64,
    cdf_left: &impl Fn(f64) -> f64,
) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (idx, &x) in sorted.iter().enumerate() {
        let hi = (idx as f64 + 1.0) / n - cdf(x);
        let lo = cdf_left(x) - idx as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}

/// KS distance for an `EmpiricalSample`, treating the infinity atom as mass
/// beyond every finite point.
pub fn ks_distance_sample(sample: &EmpiricalSample, cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let total = sample.count() + sample.inf_count();
    if total == 0 {
        return Err(Error::Domain("empty sample".into()));
    }
    let n = total as f64;
    let mut d: f64 = 0.0;
    for (idx, &x) in sample.values().iter().enumerate() {
        let f = cdf(x);
        let hi = (idx as f64 + 1.0) / n - f;
        let lo = f - idx as f64 / n;
        d = d.max(hi).max(lo);
    }
    if sample.inf_count() > 0 {
        // All finite mass accounted for; the reference mass above the largest
        // finite sample point minus the empirical infinity mass.
        let f_top = sample.values().last().map(|&x| cdf(x)).unwrap_or(0.0);
        d = d.max((1.0 - f_top) - sample.inf_count() as f64 / n).max(0.0);
    }
    Ok(d)
}

/// Two-sample KS statistic; sorts both samples in place.
pub fn ks_two_sample(xs: &mut [f64], ys: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (nx, ny) = (xs.len() as f64, ys.len() as f64);
    let mut ix = 0;
    let mut iy = 0;
    let mut d: f64 = 0.0;
    while ix < xs.len() && iy < ys.len() {
        let (x, y) = (xs[ix], ys[iy]);
        if x <= y {
            ix += 1;
        }
        if y <= x {
            iy += 1;
        }
        d = d.max((ix as f64 / nx - iy as f64 / ny).abs());
    }
    d
}

/// Exponential CDF with rate `lambda`; rate 0 encodes a. s. infinity.
pub fn exp_cdf(lambda: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        if lambda == 0.0 || x <= 0.0 {
            0.0
        } else {
            1.0 - (-lambda * x).exp()
        }
    }
}

/// Maximum-likelihood exponential rate 1/mean with standard error
/// rate / sqrt(n).
pub fn exp_rate_fit(sample: &EmpiricalSample) -> Result<(f64, f64)> {
    if sample.count() == 0 {
        return Err(Error::Domain("empty sample".into()));
    }
    if sample.values().first().copied().unwrap_or(1.0) <= 0.0 {
        return Err(Error::Domain("nonpositive value in exponential fit".into()));
    }
    let rate = 1.0 / sample.mean();
    let stderr = rate / (sample.count() as f64).sqrt();
    Ok((rate, stderr))
}

/// Atom key for discrete laws over Z union {infinity}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Atom {
    Finite(i64),
    Infinity,
}

/// Pearson chi-square statistic of observed counts against a discrete pmf.
/// Cells with expected count below 5 are merged into their successor (the
/// last cell absorbs leftovers).
pub fn atom_chisq(observed: &BTreeMap<Atom, u64>, pmf: &BTreeMap<Atom, f64>) -> TestReport {
    let n: u64 = observed.values().sum();
    let total_p: f64 = pmf.values().sum();
    if (total_p - 1.0).abs() > 1e-9 {
        return TestReport {
            statistic: "chi_square".into(),
            value: f64::INFINITY,
            threshold: None,
            pass: Some(false),
            sample_size: n as usize,
            notes: format!("pmf mass {total_p} != 1"),
        };
    }
    for atom in observed.keys() {
        if !pmf.contains_key(atom) && observed[atom] > 0 {
            return TestReport {
                statistic: "chi_square".into(),
                value: f64::INFINITY,
                threshold: None,
                pass: Some(false),
                sample_size: n as usize,
                notes: format!("observed mass on atom {atom:?} absent from pmf"),
            };
        }
    }
    // Merge low-expectation cells left to right.
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (expected, observed)
    let mut acc_e = 0.0;
    let mut acc_o = 0.0;
    for (atom, p) in pmf {
        acc_e += p * n as f64;
        acc_o += observed.get(atom).copied().unwrap_or(0) as f64;
        if acc_e >= 5.0 {
            cells.push((acc_e, acc_o));
            acc_e = 0.0;
            acc_o = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0.0 {
        if let Some(last) = cells.last_mut() {
            last.0 += acc_e;
            last.1 += acc_o;
        } else {
            cells.push((acc_e, acc_o));
        }
    }
    let stat: f64 = cells
        .iter()
        .map(|(e, o)| {
            if *e > 0.0 {
                (o - e) * (o - e) / e
            } else {
                0.0
            }
        })
        .sum();
    let dof = cells.len().saturating_sub(1);
    TestReport {
        statistic: "chi_square".into(),
        value: stat,
        threshold: None,
        pass: None,
        sample_size: n as usize,
        notes: format!("dof={dof}"),
    }
}

/// Pearson correlation matrix of replica-aligned samples.
pub fn pairwise_corr(samples: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let k = samples.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let n = samples[0].len();
    if samples.iter().any(|s| s.len() != n) || n == 0 {
        return Err(Error::Domain("samples must share a positive count".into()));
    }
    let means: Vec<f64> = samples
        .iter()
        .map(|s| s.iter().sum::<f64>() / n as f64)
        .collect();
    let sds: Vec<f64> = samples
        .iter()
        .zip(&means)
        .map(|(s, m)| {
            (s.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64)
                .sqrt()
                .max(f64::MIN_POSITIVE)
        })
        .collect();
    let mut out = vec![vec![0.0; k]; k];
    for p in 0..k {
        out[p][p] = 1.0;
        for q in (p + 1)..k {
            let cov = samples[p]
                .iter()
                .zip(&samples[q])
                .map(|(x, y)| (x - means[p]) * (y - means[q]))
                .sum::<f64>()
                / n as f64;
            let c = cov / (sds[p] * sds[q]);
            out[p][q] = c;
            out[q][p] = c;
        }
    }
    Ok(out)
}

/// Largest off-diagonal correlation magnitude.
pub fn max_abs_offdiag(matrix: &[Vec<f64>]) -> f64 {
    let mut m: f64 = 0.0;
    for (p, row) in matrix.iter().enumerate() {
        for (q, v) in row.iter().enumerate() {
            if p != q {
                m = m.max(v.abs());
            }
        }
    }
    m
}
