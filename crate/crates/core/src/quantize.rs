//! Uniform Gray-coded quantization of complex observations.
//!
//! The real and imaginary parts are quantized independently. Each part uses
//! `2^δ` equal intervals spanning the minimum and maximum of that part over
//! the N subcarriers of the session. A sample on an interior boundary goes to
//! the upper interval and the maximum goes to the top interval.

use crate::bits::BitSeq;
use crate::error::{Result, SkgError};
use crate::signal::{gray_code, ComplexVector};

/// Quantizer output for one observation vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantized {
    /// `2δN` bits: for each subcarrier the Gray label of the real part
    /// followed by that of the imaginary part.
    pub bits: BitSeq,
    /// Interval indices `(real, imag)` per subcarrier.
    pub symbols: Vec<(u32, u32)>,
    /// A component had zero range; all its samples were mapped to interval 0.
    pub degenerate: bool,
}

fn component_indices(values: &[f64], delta: u32) -> (Vec<u32>, bool) {
    let levels = 1u32 << delta;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if range <= 0.0 {
        return (vec![0; values.len()], true);
    }
    let width = range / levels as f64;
    let idx = values
        .iter()
        .map(|&x| {
            let t = ((x - min) / width).floor();
            (t.max(0.0) as u32).min(levels - 1)
        })
        .collect();
    (idx, false)
}

/// Quantizes `w` with resolution `delta` bits per real dimension.
pub fn quantize(w: &ComplexVector, delta: u32) -> Result<Quantized> {
    if delta == 0 || delta > 16 {
        return Err(SkgError::Precondition(format!(
            "delta {delta} outside 1..=16"
        )));
    }
    if w.len() < 2 {
        return Err(SkgError::Precondition(
            "quantization needs at least two samples".into(),
        ));
    }
    if !w.is_finite() {
        return Err(SkgError::Domain(
            "observation contains non-finite values".into(),
        ));
    }
    let re: Vec<f64> = w.iter().map(|z| z.re).collect();
    let im: Vec<f64> = w.iter().map(|z| z.im).collect();
    let (ire, dre) = component_indices(&re, delta);
    let (iim, dim) = component_indices(&im, delta);
    let mut bits = BitSeq::zeros(0);
    let mut symbols = Vec::with_capacity(w.len());
    for (&a, &b) in ire.iter().zip(&iim) {
        bits.extend_from(&gray_code(a as u64, delta as usize)?);
        bits.extend_from(&gray_code(b as u64, delta as usize)?);
        symbols.push((a, b));
    }
    Ok(Quantized {
        bits,
        symbols,
        degenerate: dre || dim,
    })
}

/// Fraction of positions where two equal-length bit sequences differ.
pub fn bmr(a: &BitSeq, b: &BitSeq) -> Result<f64> {
    if a.is_empty() {
        return Err(SkgError::Precondition("empty bit sequences".into()));
    }
    Ok(a.hamming(b)? as f64 / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest};

    fn vector(parts: &[(f64, f64)]) -> ComplexVector {
        parts.iter().map(|&(r, i)| Complex64::new(r, i)).collect()
    }

    #[test]
    fn boundaries_and_extremes() {
        // Range [0, 4] in four intervals of width 1.
        let w = vector(&[(0.0, 0.0), (1.0, 1.0), (2.5, 2.0), (4.0, 4.0)]);
        let q = quantize(&w, 2).unwrap();
        assert_eq!(q.symbols, vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
        assert!(!q.degenerate);
        // Gray labels 00, 01, 11, 10.
        assert_eq!(q.bits.to_string(), "0000010111111010");
    }

    #[test]
    fn constant_component_is_degenerate() {
        let w = vector(&[(1.0, 0.0), (1.0, 3.0), (1.0, 1.0)]);
        let q = quantize(&w, 2).unwrap();
        assert!(q.degenerate);
        assert!(q.symbols.iter().all(|s| s.0 == 0));
        assert_eq!(q.symbols[1].1, 3);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(quantize(&vector(&[(0.0, 0.0)]), 2).is_err());
        assert!(quantize(&vector(&[(0.0, 0.0), (1.0, f64::NAN)]), 2).is_err());
        assert!(quantize(&vector(&[(0.0, 0.0), (1.0, 1.0)]), 0).is_err());
    }

    #[test]
    fn bmr_counts_mismatches() {
        let a = BitSeq::parse("1100").unwrap();
        let b = BitSeq::parse("1010").unwrap();
        assert_eq!(bmr(&a, &b).unwrap(), 0.5);
    }

    proptest! {
        #[test]
        fn length_and_range(
            parts in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..40),
            delta in 1u32..=4,
        ) {
            let w = vector(&parts);
            let q = quantize(&w, delta).unwrap();
            prop_assert_eq!(q.bits.len(), 2 * delta as usize * parts.len());
            let levels = 1u32 << delta;
            prop_assert!(q.symbols.iter().all(|&(a, b)| a < levels && b < levels));
        }

        #[test]
        fn invariant_under_positive_affine_maps(
            parts in proptest::collection::vec((-10f64..10.0, -10f64..10.0), 2..32),
            scale in 0.5f64..4.0,
            shift in -5f64..5.0,
        ) {
            let w = vector(&parts);
            let moved = vector(&parts.iter().map(|&(r, i)| (r * scale + shift, i * scale - shift)).collect::<Vec<_>>());
            let a = quantize(&w, 2).unwrap();
            let b = quantize(&moved, 2).unwrap();
            // Rounding can move samples that sit on a boundary; allow one per component.
            let moved_count = a.symbols.iter().zip(&b.symbols).filter(|(x, y)| x != y).count();
            prop_assert!(moved_count <= 2);
        }
    }
}
