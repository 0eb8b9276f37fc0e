//! Privacy amplification and consistency checking with the modular-product
//! universal hash family `h_a(x) = Σ a_k·x_k mod p`.
//!
//! A reconciled sequence `q = q₁ ∥ q₂` yields the key `K = h_{q₁}(q₂)`; the
//! key in turn yields the public check `C = h_{K₁}(K₂)` of half its length.

use std::sync::OnceLock;

use crate::bits::BitSeq;
use crate::error::{Result, SkgError};

/// Number of accepted session keys XOR-ed into one final key.
pub const KEYS_PER_FINAL: usize = 4;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin, exact for every 64-bit integer.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Largest prime `p` with `2^{m−1} < p < 2^m`.
pub fn largest_prime_below(m: u32) -> Result<u64> {
    if !(2..=64).contains(&m) {
        return Err(SkgError::Precondition(format!(
            "hash width {m} outside 2..=64"
        )));
    }
    let upper = (1u128 << m) - 1;
    let lower = 1u128 << (m - 1);
    let mut candidate = upper;
    while candidate > lower {
        if is_prime(candidate as u64) {
            return Ok(candidate as u64);
        }
        candidate -= 1;
    }
    unreachable!("Bertrand's postulate guarantees a prime in (2^(m-1), 2^m)")
}

fn prime_for_width(m: u32) -> Result<u64> {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    let table = PRIMES.get_or_init(|| {
        (2..=64)
            .map(|w| largest_prime_below(w).expect("width in range"))
            .collect()
    });
    match m {
        2..=64 => Ok(table[m as usize - 2]),
        _ => largest_prime_below(m),
    }
}

/// One member of the hash family: output width, modulus and part count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashParams {
    pub m: u32,
    pub p: u64,
    pub l: usize,
}

impl HashParams {
    pub fn new(m: u32, l: usize) -> Result<Self> {
        if l == 0 {
            return Err(SkgError::Precondition("at least one part is needed".into()));
        }
        Ok(HashParams {
            m,
            p: prime_for_width(m)?,
            l,
        })
    }
}

fn parts(seq: &BitSeq, params: &HashParams, what: &str) -> Result<Vec<u64>> {
    let pieces = seq.split_equal(params.l).map_err(|_| {
        SkgError::Precondition(format!(
            "{what} of {} bits cannot be split into {} parts",
            seq.len(),
            params.l
        ))
    })?;
    if pieces[0].len() > params.m as usize {
        return Err(SkgError::Precondition(format!(
            "{what} parts have {} bits, more than m = {}",
            pieces[0].len(),
            params.m
        )));
    }
    pieces.iter().map(|p| p.to_u64()).collect()
}

/// `Σ selector_k · input_k mod p` as an m-bit big-endian sequence.
pub fn uhf(selector: &BitSeq, input: &BitSeq, params: &HashParams) -> Result<BitSeq> {
    let a = parts(selector, params, "selector")?;
    let x = parts(input, params, "input")?;
    let p = params.p as u128;
    let sum = a.iter().zip(&x).fold(0u128, |acc, (&a, &x)| {
        (acc + (a as u128 % p) * (x as u128 % p)) % p
    });
    Ok(BitSeq::from_u64(sum as u64, params.m as usize))
}

/// Session key and its public consistency check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyMaterial {
    pub key: BitSeq,
    pub check: BitSeq,
}

/// Splits `q` in halves to hash the second half under the first, then does
/// the same to the key to obtain a check of half the key length.
pub fn derive_key(q: &BitSeq) -> Result<KeyMaterial> {
    if !q.len().is_multiple_of(4) || q.len() < 8 || q.len() > 128 {
        return Err(SkgError::Precondition(format!(
            "sequence of {} bits cannot feed key and check hashing",
            q.len()
        )));
    }
    let halves = q.split_equal(2)?;
    let key_params = HashParams::new((q.len() / 2) as u32, 1)?;
    let key = uhf(&halves[0], &halves[1], &key_params)?;
    let check = check_of(&key)?;
    Ok(KeyMaterial { key, check })
}

/// Check sequence `h_{K₁}(K₂)` of a key.
pub fn check_of(key: &BitSeq) -> Result<BitSeq> {
    let halves = key.split_equal(2)?;
    let params = HashParams::new((key.len() / 2) as u32, 1)?;
    uhf(&halves[0], &halves[1], &params)
}

/// XOR of the keys of [`KEYS_PER_FINAL`] accepted sessions.
pub fn combine_sessions(keys: &[BitSeq]) -> Result<BitSeq> {
    if keys.len() != KEYS_PER_FINAL {
        return Err(SkgError::Precondition(format!(
            "{} session keys given, {KEYS_PER_FINAL} needed",
            keys.len()
        )));
    }
    keys[1..]
        .iter()
        .try_fold(keys[0].clone(), |acc, k| acc.xor(k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Consistency {
    Accept,
    Reject,
}

pub fn consistency_check(c_alice: &BitSeq, c_bob: &BitSeq) -> Result<Consistency> {
    if c_alice.len() != c_bob.len() {
        return Err(SkgError::LengthMismatch {
            expected: c_alice.len(),
            found: c_bob.len(),
        });
    }
    Ok(if c_alice == c_bob {
        Consistency::Accept
    } else {
        Consistency::Reject
    })
}
