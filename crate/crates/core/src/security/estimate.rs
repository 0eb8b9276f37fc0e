//! Sample-based estimators of mutual information and entropy, in bits.
//!
//! Two mutual information estimators are available:
//!
//! * [`EstimatorKind::Ksg`]: the Kraskov–Stögbauer–Grassberger k-nearest-
//!   neighbour estimator (first variant, maximum norm) applied after a
//!   normal-score transform of every real dimension. The transform is
//!   invertible per dimension, so it leaves the mutual information unchanged,
//!   and it tames the heavy tails of products of fading coefficients.
//! * [`EstimatorKind::Histogram`]: plug-in estimate over equal-mass bins per
//!   real dimension, with optional Miller–Madow correction and subtraction of
//!   a shuffled-pairing baseline.
//!
//! The histogram estimator is strongly biased once the joint space has more
//! than a couple of real dimensions at realistic sample sizes, which is why
//! the nearest-neighbour estimator is the default.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::digamma;

use super::kdtree::KdTree;
use crate::error::{Result, SkgError};
use crate::signal::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Ksg,
    Histogram,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Samples drawn by routines that generate their own data.
    pub n_samples: usize,
    /// Histogram bins per real dimension.
    pub bins: usize,
    pub kind: EstimatorKind,
    /// Neighbour order of the nearest-neighbour estimator.
    pub k: usize,
    /// Adds the Miller–Madow correction to each histogram entropy.
    pub miller_madow: bool,
    /// Subtracts the histogram estimate of a randomly re-paired sample.
    pub shuffle_baseline: bool,
    /// Seed of the re-pairing permutation.
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            n_samples: 100_000,
            bins: 16,
            kind: EstimatorKind::Ksg,
            k: 4,
            miller_madow: false,
            shuffle_baseline: false,
            seed: 0,
        }
    }
}

impl EstimatorConfig {
    pub fn histogram(bins: usize) -> Self {
        EstimatorConfig {
            kind: EstimatorKind::Histogram,
            bins,
            ..EstimatorConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1000 {
            return Err(SkgError::InvalidConfig(
                "at least 1000 samples are required".into(),
            ));
        }
        if self.bins < 4 {
            return Err(SkgError::InvalidConfig(
                "at least 4 bins per dimension are required".into(),
            ));
        }
        if self.k == 0 {
            return Err(SkgError::InvalidConfig(
                "neighbour order must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Row-major real samples of fixed dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Samples {
    dim: usize,
    data: Vec<f64>,
}

impl Samples {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(SkgError::Precondition(format!(
                "{} values do not form rows of dimension {dim}",
                data.len()
            )));
        }
        Ok(Samples { dim, data })
    }

    /// Interleaves equal-length complex columns into rows
    /// `(re₀, im₀, re₁, im₁, …)`.
    pub fn from_complex_columns(columns: &[&[Complex64]]) -> Result<Self> {
        let n = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != n) {
            return Err(SkgError::Precondition("columns differ in length".into()));
        }
        let mut data = Vec::with_capacity(n * 2 * columns.len());
        for i in 0..n {
            for c in columns {
                data.push(c[i].re);
                data.push(c[i].im);
            }
        }
        Samples::new(2 * columns.len().max(1), data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn column(&self, d: usize) -> Vec<f64> {
        self.data
            .iter()
            .skip(d)
            .step_by(self.dim)
            .copied()
            .collect()
    }

    fn permuted(&self, order: &[usize]) -> Samples {
        Samples {
            dim: self.dim,
            data: order
                .iter()
                .flat_map(|&i| self.row(i).iter().copied())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MiEstimate {
    pub bits: f64,
    pub kind: EstimatorKind,
    pub n_samples: usize,
    /// The histogram grid holds fewer than 5 samples per joint cell on average.
    pub low_occupancy: bool,
    /// Shuffled-pairing estimate subtracted from the raw value.
    pub baseline: Option<f64>,
}

/// Estimates `I(x; y)` in bits from paired rows.
pub fn estimate_mi(x: &Samples, y: &Samples, cfg: &EstimatorConfig) -> Result<MiEstimate> {
    if x.len() != y.len() {
        return Err(SkgError::LengthMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let n = x.len();
    if n <= cfg.k.max(1) {
        return Err(SkgError::Precondition(format!("{n} samples are too few")));
    }
    match cfg.kind {
        EstimatorKind::Ksg => Ok(MiEstimate {
            bits: ksg(x, y, cfg.k),
            kind: EstimatorKind::Ksg,
            n_samples: n,
            low_occupancy: false,
            baseline: None,
        }),
        EstimatorKind::Histogram => {
            let raw = histogram_mi(x, y, cfg.bins, cfg.miller_madow);
            let baseline = cfg.shuffle_baseline.then(|| {
                let mut order: Vec<usize> = (0..n).collect();
                Rng::seeded(cfg.seed).shuffle(&mut order);
                histogram_mi(x, &y.permuted(&order), cfg.bins, cfg.miller_madow)
            });
            let cells = (cfg.bins as f64).powi((x.dim() + y.dim()) as i32);
            Ok(MiEstimate {
                bits: raw - baseline.unwrap_or(0.0),
                kind: EstimatorKind::Histogram,
                n_samples: n,
                low_occupancy: (n as f64) / cells < 5.0,
                baseline,
            })
        }
    }
}

/// Plug-in entropy in bits of symbols drawn from `0..support`.
pub fn estimate_entropy(symbols: &[u32], support: u32) -> Result<f64> {
    if symbols.is_empty() {
        return Err(SkgError::Precondition("entropy of an empty sample".into()));
    }
    let mut counts = vec![0u64; support as usize];
    for &s in symbols {
        let slot = counts.get_mut(s as usize).ok_or_else(|| {
            SkgError::Precondition(format!("symbol {s} outside support {support}"))
        })?;
        *slot += 1;
    }
    Ok(entropy_of_counts(counts.into_iter(), symbols.len(), false))
}

fn entropy_of_counts(counts: impl Iterator<Item = u64>, n: usize, miller_madow: bool) -> f64 {
    let n = n as f64;
    let mut h = 0.0;
    let mut occupied = 0usize;
    for c in counts.filter(|&c| c > 0) {
        let p = c as f64 / n;
        h -= p * p.log2();
        occupied += 1;
    }
    if miller_madow {
        h += (occupied as f64 - 1.0) / (2.0 * n * std::f64::consts::LN_2);
    }
    h.max(0.0)
}

/// Equal-mass bin index of every value of every dimension.
fn bin_indices(s: &Samples, bins: usize) -> Vec<Vec<u32>> {
    (0..s.dim())
        .map(|d| {
            let col = s.column(d);
            let mut sorted = col.clone();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            let edges: Vec<f64> = (1..bins)
                .map(|j| sorted[(j * n / bins).min(n - 1)])
                .collect();
            col.iter()
                .map(|&x| edges.partition_point(|&e| e <= x) as u32)
                .collect()
        })
        .collect()
}

fn cell_entropy(indices: &[&Vec<u32>], bins: usize, n: usize, miller_madow: bool) -> f64 {
    let mut keys: Vec<u64> = (0..n)
        .map(|i| {
            indices
                .iter()
                .fold(0u64, |acc, col| acc * bins as u64 + col[i] as u64)
        })
        .collect();
    keys.sort_unstable();
    let counts = keys.chunk_by(|a, b| a == b).map(|run| run.len() as u64);
    entropy_of_counts(counts, n, miller_madow)
}

fn histogram_mi(x: &Samples, y: &Samples, bins: usize, miller_madow: bool) -> f64 {
    let n = x.len();
    let bx = bin_indices(x, bins);
    let by = bin_indices(y, bins);
    let xs: Vec<&Vec<u32>> = bx.iter().collect();
    let ys: Vec<&Vec<u32>> = by.iter().collect();
    let joint: Vec<&Vec<u32>> = bx.iter().chain(&by).collect();
    cell_entropy(&xs, bins, n, miller_madow) + cell_entropy(&ys, bins, n, miller_madow)
        - cell_entropy(&joint, bins, n, miller_madow)
}

/// Replaces every dimension by the standard normal quantile of its rank.
fn normal_scores(s: &Samples) -> Samples {
    let n = s.len();
    let normal = Normal::standard();
    let mut out = vec![0.0; s.data.len()];
    for d in 0..s.dim() {
        let col = s.column(d);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
        for (rank, &i) in order.iter().enumerate() {
            out[i * s.dim() + d] = normal.inverse_cdf((rank as f64 + 0.5) / n as f64);
        }
    }
    Samples {
        dim: s.dim(),
        data: out,
    }
}

fn ksg(x: &Samples, y: &Samples, k: usize) -> f64 {
    let n = x.len();
    let x = normal_scores(x);
    let y = normal_scores(y);
    let mut joint = Vec::with_capacity(n * (x.dim() + y.dim()));
    for i in 0..n {
        joint.extend_from_slice(x.row(i));
        joint.extend_from_slice(y.row(i));
    }
    let jd = x.dim() + y.dim();
    let tj = KdTree::build(&joint, jd);
    let tx = KdTree::build(&x.data, x.dim());
    let ty = KdTree::build(&y.data, y.dim());
    let terms: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let eps = tj.kth_distance(&joint[i * jd..(i + 1) * jd], k, i);
            // Counts include the point itself, which supplies the +1.
            let nx = tx.count_within(x.row(i), eps);
            let ny = ty.count_within(y.row(i), eps);
            digamma(nx as f64) + digamma(ny as f64)
        })
        .collect();
    let mean = terms.iter().sum::<f64>() / n as f64;
    (digamma(k as f64) + digamma(n as f64) - mean) / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::security::bounds::mi_gaussian;
    use crate::signal::draw_cscg_vector;

    /// Complex pairs whose real and imaginary parts each have correlation ρ.
    fn gaussian_pair(rho: f64, n: usize, seed: u64) -> (Samples, Samples) {
        let mut rng = Rng::seeded(seed);
        let a = draw_cscg_vector(&mut rng, 0.5, n);
        let w = draw_cscg_vector(&mut rng, 0.5, n);
        let b = a.zip_with(&w, |a, w| a * rho + w * (1.0 - rho * rho).sqrt());
        (
            Samples::from_complex_columns(&[a.as_slice()]).unwrap(),
            Samples::from_complex_columns(&[b.as_slice()]).unwrap(),
        )
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(estimate_entropy(&[3; 100], 16).unwrap(), 0.0);
        let mut rng = Rng::seeded(2);
        let s: Vec<u32> = (0..1_000_000).map(|_| rng.below(16) as u32).collect();
        assert!((estimate_entropy(&s, 16).unwrap() - 4.0).abs() < 0.01);
        assert!(estimate_entropy(&[], 16).is_err());
        assert!(estimate_entropy(&[16], 16).is_err());
    }

    #[test]
    fn ksg_on_gaussians() {
        for rho in [0.3, 0.5, 0.8] {
            let (x, y) = gaussian_pair(rho, 20_000, 7);
            let est = estimate_mi(&x, &y, &EstimatorConfig::default()).unwrap();
            let truth = mi_gaussian(rho).unwrap();
            assert!(
                (est.bits - truth).abs() < 0.03,
                "rho {rho}: {} vs {truth}",
                est.bits
            );
        }
    }

    #[test]
    fn independent_samples_give_near_zero() {
        let (x, y) = gaussian_pair(0.0, 20_000, 9);
        let ksg = estimate_mi(&x, &y, &EstimatorConfig::default()).unwrap();
        assert!((-0.02..0.05).contains(&ksg.bits), "{}", ksg.bits);
        let mut cfg = EstimatorConfig::histogram(8);
        cfg.shuffle_baseline = true;
        let hist = estimate_mi(&x, &y, &cfg).unwrap();
        assert!((-0.02..0.05).contains(&hist.bits), "{}", hist.bits);
        assert!(hist.baseline.is_some());
    }

    #[test]
    fn histogram_flags_sparse_grids() {
        let (x, y) = gaussian_pair(0.5, 5_000, 3);
        let est = estimate_mi(&x, &y, &EstimatorConfig::histogram(16)).unwrap();
        assert!(est.low_occupancy);
        let est = estimate_mi(&x, &y, &EstimatorConfig::histogram(4)).unwrap();
        assert!(!est.low_occupancy);
    }

    #[test]
    fn invariant_under_monotone_maps() {
        let (x, y) = gaussian_pair(0.5, 5_000, 5);
        let cubed = Samples::new(2, x.data.iter().map(|v| v * v * v + 3.0).collect()).unwrap();
        let a = estimate_mi(&x, &y, &EstimatorConfig::default())
            .unwrap()
            .bits;
        let b = estimate_mi(&cubed, &y, &EstimatorConfig::default())
            .unwrap()
            .bits;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn rejects_mismatched_lengths() {
        let (x, _) = gaussian_pair(0.5, 100, 1);
        let (_, y) = gaussian_pair(0.5, 99, 1);
        assert!(estimate_mi(&x, &y, &EstimatorConfig::default()).is_err());
    }
}
