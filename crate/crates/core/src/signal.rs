//! Baseband signal primitives: seeded randomness, per-subcarrier complex
//! vectors, square M-QAM constellations and reflected Gray codes.
//!
//! # Randomness
//!
//! [`Rng`] is xoshiro256++ seeded through SplitMix64 (the reference seeding
//! procedure of the xoshiro authors). Uniform reals use the top 53 bits of a
//! draw, and Gaussian samples come from `rand_distr`'s ziggurat sampler. The
//! generator is not cryptographically strong. Simulation results do not depend
//! on that: the protocol analysis assumes ideal uniform local randomness and the
//! generator stands in for it.

use std::ops::Index;

use num_complex::Complex64;
use rand::{Rng as _, RngCore, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::bits::BitSeq;
use crate::error::{Result, SkgError};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded pseudo-random stream.
#[derive(Clone, Debug)]
pub struct Rng {
    inner: Xoshiro256PlusPlus,
}

impl Rng {
    pub fn seeded(seed: u64) -> Self {
        Rng {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// Independent stream for worker `index` of a run seeded with `seed`.
    ///
    /// The child seed is `splitmix64(seed ^ splitmix64(index))`, so streams
    /// depend only on the pair and not on scheduling.
    pub fn child(seed: u64, index: u64) -> Self {
        Rng::seeded(splitmix64(seed ^ splitmix64(index)))
    }

    /// Derives a new stream from this one, advancing it by one draw.
    pub fn fork(&mut self) -> Self {
        Rng::seeded(self.inner.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer on `[0, n)`.
    pub fn below(&mut self, n: u64) -> u64 {
        self.inner.random_range(0..n)
    }

    pub fn bit(&mut self) -> bool {
        self.inner.next_u64() >> 63 == 1
    }

    pub fn bits(&mut self, len: usize) -> BitSeq {
        (0..len).map(|_| self.bit()).collect()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

/// Length-N vector of complex baseband samples, one entry per subcarrier.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        ComplexVector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        ComplexVector(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn filled(n: usize, value: Complex64) -> Self {
        ComplexVector(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Element-wise (Hadamard) product.
    pub fn hadamard(&self, other: &ComplexVector) -> ComplexVector {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &ComplexVector) -> ComplexVector {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ComplexVector) -> ComplexVector {
        self.zip_with(other, |a, b| a - b)
    }

    /// Element-wise quotient.
    pub fn div(&self, other: &ComplexVector) -> ComplexVector {
        self.zip_with(other, |a, b| a / b)
    }

    pub fn scale(&self, factor: f64) -> ComplexVector {
        self.map(|z| z * factor)
    }

    /// Element-wise square.
    pub fn square(&self) -> ComplexVector {
        self.map(|z| z * z)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> ComplexVector {
        ComplexVector(self.0.iter().map(|&z| f(z)).collect())
    }

    pub fn zip_with(
        &self,
        other: &ComplexVector,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> ComplexVector {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        ComplexVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Mean of |entry|².
    pub fn mean_power(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.0.len() as f64
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, index: usize) -> &Complex64 {
        &self.0[index]
    }
}

impl FromIterator<Complex64> for ComplexVector {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        ComplexVector(iter.into_iter().collect())
    }
}

/// Reflected binary Gray code of `index` as a `width`-bit sequence.
pub fn gray_code(index: u64, width: usize) -> Result<BitSeq> {
    if width == 0 || width > 63 || index >= 1u64 << width {
        return Err(SkgError::Precondition(format!(
            "index {index} out of range for a {width}-bit Gray code"
        )));
    }
    Ok(BitSeq::from_u64(gray_value(index), width))
}

pub(crate) fn gray_value(index: u64) -> u64 {
    index ^ (index >> 1)
}

/// Square M-QAM constellation with unit average power and Gray labels per axis.
///
/// Point `i` sits at in-phase level `i / √M` and quadrature level `i % √M`;
/// levels are evenly spaced and symmetric about zero. Its label is the Gray
/// code of the in-phase level followed by the Gray code of the quadrature level.
#[derive(Clone, Debug, PartialEq)]
pub struct QamConstellation {
    order: usize,
    points: Vec<Complex64>,
}

impl QamConstellation {
    pub const SUPPORTED_ORDERS: [usize; 4] = [4, 16, 64, 256];

    pub fn new(order: usize) -> Result<Self> {
        if !Self::SUPPORTED_ORDERS.contains(&order) {
            return Err(SkgError::InvalidConfig(format!(
                "unsupported QAM order {order}; expected one of 4, 16, 64, 256"
            )));
        }
        let side = order.isqrt();
        let scale = (3.0 / (2.0 * (order as f64 - 1.0))).sqrt();
        let level = |i: usize| (2.0 * i as f64 - (side as f64 - 1.0)) * scale;
        let points = (0..order)
            .map(|i| Complex64::new(level(i / side), level(i % side)))
            .collect();
        Ok(QamConstellation { order, points })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Gray label of point `index`.
    pub fn label(&self, index: usize) -> BitSeq {
        let side = self.order.isqrt();
        let half = self.bits_per_symbol() / 2;
        let code = (gray_value((index / side) as u64) << half) | gray_value((index % side) as u64);
        BitSeq::from_u64(code, self.bits_per_symbol())
    }

    pub fn mean_power(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }

    /// E|c|⁴ over uniformly drawn points.
    pub fn fourth_moment(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.norm_sqr().powi(2))
            .sum::<f64>()
            / self.order as f64
    }
}

/// `n` points drawn independently and uniformly from `constellation`.
pub fn draw_qam_vector(rng: &mut Rng, constellation: &QamConstellation, n: usize) -> ComplexVector {
    (0..n)
        .map(|_| constellation.point(rng.below(constellation.order() as u64) as usize))
        .collect()
}

/// `n` circularly-symmetric Gaussian entries with variance `variance_per_dim`
/// in each of the real and imaginary parts.
pub fn draw_cscg_vector(rng: &mut Rng, variance_per_dim: f64, n: usize) -> ComplexVector {
    let sd = variance_per_dim.sqrt();
    (0..n)
        .map(|_| {
            let re = rng.standard_normal();
            let im = rng.standard_normal();
            Complex64::new(re * sd, im * sd)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_streams_repeat() {
        let c = QamConstellation::new(4).unwrap();
        let a = draw_qam_vector(&mut Rng::seeded(7), &c, 4);
        let b = draw_qam_vector(&mut Rng::seeded(7), &c, 4);
        assert_eq!(a, b);
    }

    #[test]
    fn child_streams_differ_by_index() {
        let a = Rng::child(1, 0).next_u64();
        let b = Rng::child(1, 1).next_u64();
        assert_ne!(a, b);
        assert_eq!(a, Rng::child(1, 0).next_u64());
    }

    #[test]
    fn qam_unit_power() {
        for order in QamConstellation::SUPPORTED_ORDERS {
            let c = QamConstellation::new(order).unwrap();
            assert!((c.mean_power() - 1.0).abs() < 1e-12, "M={order}");
        }
        assert!(QamConstellation::new(8).is_err());
    }

    #[test]
    fn qam_neighbours_differ_in_one_bit() {
        for order in QamConstellation::SUPPORTED_ORDERS {
            let c = QamConstellation::new(order).unwrap();
            let side = order.isqrt();
            for i in 0..order {
                let (row, col) = (i / side, i % side);
                if col + 1 < side {
                    assert_eq!(c.label(i).hamming(&c.label(i + 1)).unwrap(), 1);
                }
                if row + 1 < side {
                    assert_eq!(c.label(i).hamming(&c.label(i + side)).unwrap(), 1);
                }
            }
        }
    }

    #[test]
    fn qam_frequencies_are_uniform() {
        let c = QamConstellation::new(16).unwrap();
        let n = 100_000;
        let v = draw_qam_vector(&mut Rng::seeded(11), &c, n);
        let p = 1.0 / 16.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for point in c.points() {
            let count = v.iter().filter(|z| *z == point).count() as f64;
            assert!((count - n as f64 * p).abs() < 3.0 * sigma, "count {count}");
        }
        let power = v.mean_power();
        assert!((0.95..=1.05).contains(&power), "power {power}");
    }

    #[test]
    fn cscg_moments() {
        assert!(draw_cscg_vector(&mut Rng::seeded(1), 0.0, 8)
            .iter()
            .all(|z| z.norm() == 0.0));
        let n = 100_000;
        let v = draw_cscg_vector(&mut Rng::seeded(3), 0.5, n);
        assert!((v.mean_power() - 1.0).abs() < 0.02);
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for z in v.iter() {
            sxy += z.re * z.im;
            sxx += z.re * z.re;
            syy += z.im * z.im;
        }
        let corr = sxy / (sxx * syy).sqrt();
        assert!(corr.abs() < 0.02, "corr {corr}");
    }

    #[test]
    fn gray_examples() {
        let codes: Vec<String> = (0..4)
            .map(|i| gray_code(i, 2).unwrap().to_string())
            .collect();
        assert_eq!(codes, ["00", "01", "11", "10"]);
        assert!(gray_code(4, 2).is_err());
    }

    #[test]
    fn gray_width_four_exhaustive() {
        let codes: Vec<BitSeq> = (0..16).map(|i| gray_code(i, 4).unwrap()).collect();
        for i in 0..16 {
            let next = &codes[(i + 1) % 16];
            assert_eq!(codes[i].hamming(next).unwrap(), 1);
        }
        let mut values: Vec<u64> = codes.iter().map(|c| c.to_u64().unwrap()).collect();
        values.sort_unstable();
        assert_eq!(values, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn hadamard_is_elementwise() {
        let a = ComplexVector::new(vec![Complex64::new(1.0, 2.0), Complex64::new(0.5, -1.0)]);
        let b = ComplexVector::new(vec![Complex64::new(-1.0, 0.0), Complex64::new(2.0, 3.0)]);
        let ab = a.hadamard(&b);
        assert_eq!(ab, b.hadamard(&a));
        for j in 0..2 {
            assert_eq!(ab[j], a[j] * b[j]);
        }
    }
}
