//! Eight tests of the NIST SP 800-22 statistical test suite.
//!
//! Implemented: frequency (monobit), frequency within a block, runs, longest
//! run of ones in a block, discrete Fourier transform, serial, approximate
//! entropy and cumulative sums. Not implemented: binary matrix rank,
//! non-overlapping and overlapping template matching, Maurer's universal
//! statistic, linear complexity, random excursions and its variant.
//!
//! A test passes when every p-value it produces exceeds [`ALPHA`].

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::bits::BitSeq;

/// Significance level.
pub const ALPHA: f64 = 0.01;

/// Parameters of the parameterized tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NistParams {
    pub block_frequency_m: usize,
    pub serial_m: usize,
    pub approximate_entropy_m: usize,
}

impl Default for NistParams {
    /// Values recommended for sequences of about 2²⁰ bits.
    fn default() -> Self {
        NistParams {
            block_frequency_m: 128,
            serial_m: 16,
            approximate_entropy_m: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestResult {
    pub name: &'static str,
    /// Empty when skipped.
    pub p_values: Vec<f64>,
    /// Reason the test did not run.
    pub skipped: Option<String>,
}

impl TestResult {
    pub fn passed(&self) -> bool {
        self.skipped.is_none() && self.p_values.iter().all(|&p| p > ALPHA)
    }
}

fn signs(bits: &BitSeq) -> impl Iterator<Item = i64> + '_ {
    bits.bits().iter().map(|&b| if b { 1 } else { -1 })
}

fn igamc(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(a, x)
    }
}

fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn frequency(bits: &BitSeq) -> f64 {
    let n = bits.len() as f64;
    let s: i64 = signs(bits).sum();
    erfc((s.abs() as f64 / n.sqrt()) / std::f64::consts::SQRT_2)
}

pub fn block_frequency(bits: &BitSeq, m: usize) -> f64 {
    let blocks = bits.len() / m;
    let chi2: f64 = bits.bits()[..blocks * m]
        .chunks(m)
        .map(|b| {
            let pi = b.iter().filter(|&&x| x).count() as f64 / m as f64;
            (pi - 0.5) * (pi - 0.5)
        })
        .sum::<f64>()
        * 4.0
        * m as f64;
    igamc(blocks as f64 / 2.0, chi2 / 2.0)
}

pub fn runs(bits: &BitSeq) -> f64 {
    let n = bits.len() as f64;
    let pi = bits.count_ones() as f64 / n;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return 0.0;
    }
    let v = 1 + bits.bits().windows(2).filter(|w| w[0] != w[1]).count();
    let num = (v as f64 - 2.0 * n * pi * (1.0 - pi)).abs();
    erfc(num / (2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi)))
}

pub fn longest_run(bits: &BitSeq) -> Option<f64> {
    let n = bits.len();
    let (m, lo, pis): (usize, usize, &[f64]) = if n >= 750_000 {
        (
            10_000,
            10,
            &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727],
        )
    } else if n >= 6272 {
        (128, 4, &[0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124])
    } else if n >= 128 {
        (8, 1, &[0.2148, 0.3672, 0.2305, 0.1875])
    } else {
        return None;
    };
    let k = pis.len() - 1;
    let blocks = n / m;
    let mut v = vec![0u64; pis.len()];
    for block in bits.bits()[..blocks * m].chunks(m) {
        let (mut run, mut longest) = (0usize, 0usize);
        for &b in block {
            run = if b { run + 1 } else { 0 };
            longest = longest.max(run);
        }
        v[longest.clamp(lo, lo + k) - lo] += 1;
    }
    let nb = blocks as f64;
    let chi2: f64 = v
        .iter()
        .zip(pis)
        .map(|(&c, &p)| (c as f64 - nb * p).powi(2) / (nb * p))
        .sum();
    Some(igamc(k as f64 / 2.0, chi2 / 2.0))
}

pub fn dft(bits: &BitSeq) -> f64 {
    let n = bits.len();
    let mut buf: Vec<Complex64> = signs(bits).map(|s| Complex64::new(s as f64, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let threshold = ((1.0f64 / 0.05).ln() * n as f64).sqrt();
    let n0 = 0.95 * n as f64 / 2.0;
    let n1 = buf[..n / 2].iter().filter(|c| c.norm() < threshold).count() as f64;
    let d = (n1 - n0) / (n as f64 * 0.95 * 0.05 / 4.0).sqrt();
    erfc(d.abs() / std::f64::consts::SQRT_2)
}

/// Counts of every overlapping `m`-bit pattern of the cyclically extended sequence.
fn pattern_counts(bits: &BitSeq, m: usize) -> Vec<u64> {
    let n = bits.len();
    let b = bits.bits();
    let mut counts = vec![0u64; 1 << m];
    if m == 0 {
        return counts;
    }
    let mask = (1usize << m) - 1;
    let mut window = 0usize;
    for &bit in &b[..m - 1] {
        window = (window << 1) | bit as usize;
    }
    for i in 0..n {
        window = ((window << 1) | b[(i + m - 1) % n] as usize) & mask;
        counts[window] += 1;
    }
    counts
}

fn psi2(bits: &BitSeq, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = bits.len() as f64;
    let sum: f64 = pattern_counts(bits, m)
        .iter()
        .map(|&c| (c * c) as f64)
        .sum();
    sum * (1u64 << m) as f64 / n - n
}

/// Returns the two serial p-values.
pub fn serial(bits: &BitSeq, m: usize) -> [f64; 2] {
    let (a, b, c) = (
        psi2(bits, m),
        psi2(bits, m - 1),
        psi2(bits, m.saturating_sub(2)),
    );
    let d1 = a - b;
    let d2 = a - 2.0 * b + c;
    [
        igamc(2f64.powi(m as i32 - 2), d1 / 2.0),
        igamc(2f64.powi(m as i32 - 3), d2 / 2.0),
    ]
}

pub fn approximate_entropy(bits: &BitSeq, m: usize) -> f64 {
    let n = bits.len() as f64;
    let phi = |m: usize| -> f64 {
        pattern_counts(bits, m)
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                p * p.ln()
            })
            .sum()
    };
    let apen = phi(m) - phi(m + 1);
    let chi2 = 2.0 * n * (std::f64::consts::LN_2 - apen);
    igamc(2f64.powi(m as i32 - 1), chi2 / 2.0)
}

fn cusum_p(n: f64, z: f64) -> f64 {
    let sq = n.sqrt();
    let mut total = 1.0;
    let k_lo = ((-n / z + 1.0) / 4.0).trunc() as i64;
    let k_hi = ((n / z - 1.0) / 4.0).trunc() as i64;
    for k in k_lo..=k_hi {
        let k = k as f64;
        total -= phi((4.0 * k + 1.0) * z / sq) - phi((4.0 * k - 1.0) * z / sq);
    }
    let k_lo = ((-n / z - 3.0) / 4.0).trunc() as i64;
    for k in k_lo..=k_hi {
        let k = k as f64;
        total += phi((4.0 * k + 3.0) * z / sq) - phi((4.0 * k + 1.0) * z / sq);
    }
    total
}

/// Returns the forward and backward cumulative sums p-values.
pub fn cumulative_sums(bits: &BitSeq) -> [f64; 2] {
    let n = bits.len() as f64;
    let max_abs = |it: &mut dyn Iterator<Item = i64>| {
        let mut s = 0i64;
        let mut z = 0i64;
        for x in it {
            s += x;
            z = z.max(s.abs());
        }
        z as f64
    };
    let forward: Vec<i64> = signs(bits).collect();
    let zf = max_abs(&mut forward.iter().copied());
    let zb = max_abs(&mut forward.iter().rev().copied());
    [cusum_p(n, zf), cusum_p(n, zb)]
}

fn result(name: &'static str, p_values: Vec<f64>) -> TestResult {
    TestResult {
        name,
        p_values,
        skipped: None,
    }
}

fn skipped(name: &'static str, reason: String) -> TestResult {
    TestResult {
        name,
        p_values: Vec::new(),
        skipped: Some(reason),
    }
}

/// Runs all eight tests, skipping those for which `bits` is too short.
pub fn nist_core_tests(bits: &BitSeq, params: &NistParams) -> Vec<TestResult> {
    let n = bits.len();
    let log2n = if n == 0 { 0 } else { n.ilog2() as usize };
    let short = |min: usize| format!("needs at least {min} bits, got {n}");
    let mut out = Vec::new();
    out.push(if n >= 100 {
        result("frequency", vec![frequency(bits)])
    } else {
        skipped("frequency", short(100))
    });
    let m = params.block_frequency_m;
    out.push(if n >= 100 && n >= m && m >= 2 {
        result("block_frequency", vec![block_frequency(bits, m)])
    } else {
        skipped("block_frequency", short(100.max(m)))
    });
    out.push(if n >= 100 {
        result("runs", vec![runs(bits)])
    } else {
        skipped("runs", short(100))
    });
    out.push(match longest_run(bits) {
        Some(p) => result("longest_run", vec![p]),
        None => skipped("longest_run", short(128)),
    });
    out.push(if n >= 1000 {
        result("dft", vec![dft(bits)])
    } else {
        skipped("dft", short(1000))
    });
    let m = params.serial_m;
    out.push(if m >= 3 && m + 2 < log2n {
        result("serial", serial(bits, m).to_vec())
    } else {
        skipped(
            "serial",
            format!("block length {m} requires 3 <= m < log2(n) - 2"),
        )
    });
    let m = params.approximate_entropy_m;
    out.push(if m >= 1 && m + 5 < log2n {
        result("approximate_entropy", vec![approximate_entropy(bits, m)])
    } else {
        skipped(
            "approximate_entropy",
            format!("block length {m} requires m < log2(n) - 5"),
        )
    });
    out.push(if n >= 100 {
        result("cumulative_sums", cumulative_sums(bits).to_vec())
    } else {
        skipped("cumulative_sums", short(100))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Rng;

    const EPSILON_100: &str = "1100100100001111110110101010001000100001011010001100001000110100110001001100011001100010100010111000";

    fn seq(s: &str) -> BitSeq {
        BitSeq::parse(s).unwrap()
    }

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 5e-6, "{a} vs {b}");
    }

    #[test]
    fn frequency_examples() {
        close(frequency(&seq("1011010101")), 0.527089);
        close(frequency(&seq(EPSILON_100)), 0.109599);
    }

    #[test]
    fn block_frequency_examples() {
        close(block_frequency(&seq("0110011010"), 3), 0.801252);
        close(block_frequency(&seq(EPSILON_100), 10), 0.706438);
    }

    #[test]
    fn runs_examples() {
        close(runs(&seq("1001101011")), 0.147232);
        close(runs(&seq(EPSILON_100)), 0.500798);
        let alternating: BitSeq = (0..10_000).map(|i| i % 2 == 1).collect();
        assert!(runs(&alternating) < ALPHA);
    }

    #[test]
    fn longest_run_example() {
        let s = "11001100000101010110110001001100111000000000001001001101010100010001001111010110100000001101011111001100111001101101100010110010";
        close(longest_run(&seq(s)).unwrap(), 0.180598);
    }

    #[test]
    fn dft_examples() {
        // Reference values from an independent numpy implementation counting
        // the first n/2 moduli below the 95% threshold.
        close(dft(&seq("1001010011")), 0.468160);
        close(dft(&seq(EPSILON_100)), 0.646355);
    }

    #[test]
    fn serial_example() {
        let [p1, p2] = serial(&seq("0011011101"), 3);
        close(p1, 0.808792);
        close(p2, 0.670320);
    }

    #[test]
    fn approximate_entropy_examples() {
        close(approximate_entropy(&seq("0100110101"), 3), 0.261961);
        close(approximate_entropy(&seq(EPSILON_100), 2), 0.235301);
    }

    #[test]
    fn cumulative_sums_examples() {
        close(cumulative_sums(&seq("1011010111"))[0], 0.4116588);
        let [f, b] = cumulative_sums(&seq(EPSILON_100));
        close(f, 0.219194);
        close(b, 0.114866);
    }

    #[test]
    fn all_zeros_fail_frequency() {
        assert!(frequency(&BitSeq::zeros(1000)) < 1e-100);
    }

    #[test]
    fn short_sequences_are_skipped() {
        let results = nist_core_tests(&seq(EPSILON_100), &NistParams::default());
        assert_eq!(results.len(), 8);
        let dft = results.iter().find(|r| r.name == "dft").unwrap();
        assert!(dft.skipped.is_some() && !dft.passed());
    }

    #[test]
    fn prng_stream_passes() {
        let bits = Rng::seeded(2024).bits(1 << 20);
        for r in nist_core_tests(&bits, &NistParams::default()) {
            assert!(r.passed(), "{r:?}");
        }
    }
}
