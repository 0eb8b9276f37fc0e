//! Code-offset secure sketch over a tail-biting convolutional code.
//!
//! Alice publishes `SS = q_a ⊕ Enc(r)` for a fresh uniform `r`; Bob recovers
//! `q̃_a = SS ⊕ Enc(Dec(SS ⊕ q_b))` with a hard-decision Viterbi decoder.
//!
//! Encoder convention: the shift register is `(u << (K−1)) | state`, each
//! generator emits the parity of `register & g`, and the next state is
//! `register >> 1`. Tail-biting starts the register in the state formed by the
//! last `K−1` information bits, so it also ends there.

use crate::bits::BitSeq;
use crate::error::{Result, SkgError};
use crate::signal::Rng;

/// A rate `1/g` tail-biting convolutional code with `g` generator polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvCode {
    constraint_length: u32,
    generators: Vec<u32>,
    info_len: usize,
}

impl ConvCode {
    pub fn new(constraint_length: u32, generators: Vec<u32>, info_len: usize) -> Result<Self> {
        if !(2..=16).contains(&constraint_length) {
            return Err(SkgError::InvalidConfig(format!(
                "constraint length {constraint_length} outside 2..=16"
            )));
        }
        if generators.is_empty() {
            return Err(SkgError::InvalidConfig(
                "at least one generator is needed".into(),
            ));
        }
        let limit = 1u32 << constraint_length;
        if let Some(g) = generators.iter().find(|&&g| g == 0 || g >= limit) {
            return Err(SkgError::InvalidConfig(format!(
                "generator {g:o} does not fit constraint length {constraint_length}"
            )));
        }
        if info_len < constraint_length as usize - 1 || info_len > 64 {
            return Err(SkgError::InvalidConfig(format!(
                "information length {info_len} outside {}..=64",
                constraint_length - 1
            )));
        }
        Ok(ConvCode {
            constraint_length,
            generators,
            info_len,
        })
    }

    /// Rate 1/2, K = 7, generators (171, 133) octal, k = 32, n = 64.
    pub fn standard() -> Self {
        ConvCode::new(7, vec![0o171, 0o133], 32).expect("valid code")
    }

    /// Rate 1/2, K = 3, generators (7, 5) octal, for exhaustive checks.
    pub fn toy(info_len: usize) -> Result<Self> {
        ConvCode::new(3, vec![0o7, 0o5], info_len)
    }

    pub fn constraint_length(&self) -> u32 {
        self.constraint_length
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    /// Information length k.
    pub fn k(&self) -> usize {
        self.info_len
    }

    /// Coded length n.
    pub fn n(&self) -> usize {
        self.info_len * self.generators.len()
    }

    /// Identifier carried alongside published sketches.
    pub fn id(&self) -> String {
        let gens: Vec<String> = self.generators.iter().map(|g| format!("{g:o}")).collect();
        format!(
            "tb-K{}-{}-k{}",
            self.constraint_length,
            gens.join("-"),
            self.info_len
        )
    }

    fn n_states(&self) -> usize {
        1 << (self.constraint_length - 1)
    }

    /// Output symbol (one bit per generator, first generator in the top bit)
    /// and next state for input `u` from `state`.
    fn step(&self, state: usize, u: bool) -> (u32, usize) {
        let reg = ((u as u32) << (self.constraint_length - 1)) | state as u32;
        let out = self
            .generators
            .iter()
            .fold(0u32, |acc, &g| (acc << 1) | ((reg & g).count_ones() & 1));
        (out, (reg >> 1) as usize)
    }

    fn initial_state(&self, info: &[bool]) -> usize {
        let m = self.constraint_length as usize - 1;
        info[info.len() - m..]
            .iter()
            .fold(0usize, |acc, &b| (acc >> 1) | ((b as usize) << (m - 1)))
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(SkgError::LengthMismatch { expected, found });
    }
    Ok(())
}

/// Tail-biting encoding of `r` (|r| = k) to n bits.
pub fn conv_encode(r: &BitSeq, code: &ConvCode) -> Result<BitSeq> {
    check_len(code.k(), r.len())?;
    let g = code.generators.len();
    let mut state = code.initial_state(r.bits());
    let mut out = BitSeq::zeros(0);
    for &u in r.bits() {
        let (sym, next) = code.step(state, u);
        for j in (0..g).rev() {
            out.push((sym >> j) & 1 == 1);
        }
        state = next;
    }
    Ok(out)
}

/// Branch structure of the trellis.
struct Butterfly {
    n_states: usize,
    shift: u32,
    /// Branch output of `2·state + u`.
    out: Vec<u32>,
}

impl Butterfly {
    fn new(code: &ConvCode) -> Self {
        let n_states = code.n_states();
        let out = (0..2 * n_states)
            .map(|i| code.step(i / 2, i % 2 == 1).0)
            .collect();
        Butterfly {
            n_states,
            shift: code.constraint_length - 2,
            out,
        }
    }

    /// The two predecessors of `to` and the input bit on both branches.
    fn predecessors(&self, to: usize) -> (usize, usize, usize) {
        let p0 = (to << 1) & (self.n_states - 1);
        (p0, p0 | 1, to >> self.shift)
    }
}

const FAR: i16 = i16::MAX / 2;

/// Add-compare-select over all lanes of one state.
fn relax(ma: &[i16], mb: &[i16], ca: i16, cb: i16, dst: &mut [i16], dec: &mut [u8]) {
    for (((d, m), &xa), &xb) in dec.iter_mut().zip(dst.iter_mut()).zip(ma).zip(mb) {
        let (xa, xb) = (xa + ca, xb + cb);
        *d = (xb < xa) as u8;
        *m = xa.min(xb).min(FAR);
    }
}

thread_local! {
    static DECISIONS: std::cell::RefCell<Vec<u8>> = const { std::cell::RefCell::new(Vec::new()) };
}

/// Runs one trellis per start state at once, lane `s` holding the paths
/// that began in state `s`, and returns the metric and word of the best
/// path of each lane that returns to its start. Merges keep the first
/// predecessor on ties.
fn wrapping_trellis(bf: &Butterfly, symbols: &[u32], n_symbols: usize) -> Vec<(i16, u64)> {
    let n = bf.n_states;
    let steps = symbols.len();
    // Branch cost of every branch for every possible received symbol.
    let cost: Vec<i16> = (0..n_symbols as u32)
        .flat_map(|r| bf.out.iter().map(move |&o| (o ^ r).count_ones() as i16))
        .collect();
    let mut metric = vec![FAR; n * n];
    for s in 0..n {
        metric[s * n + s] = 0;
    }
    let mut next = metric.clone();
    DECISIONS.with_borrow_mut(|decisions| {
        // decisions[(t·n + to)·n + lane] = 1: the survivor came from the second predecessor.
        decisions.resize(steps * n * n, 0);
        for (t, &received) in symbols.iter().enumerate() {
            let cost = &cost[received as usize * 2 * n..(received as usize + 1) * 2 * n];
            for to in 0..n {
                let (a, b, u) = bf.predecessors(to);
                let (ca, cb) = (cost[2 * a + u], cost[2 * b + u]);
                let ma = &metric[a * n..(a + 1) * n];
                let mb = &metric[b * n..(b + 1) * n];
                let dst = &mut next[to * n..(to + 1) * n];
                let dec = &mut decisions[(t * n + to) * n..(t * n + to + 1) * n];
                relax(ma, mb, ca, cb, dst, dec);
            }
            std::mem::swap(&mut metric, &mut next);
        }
        (0..n)
            .map(|s| {
                let mut state = s;
                let mut word = 0u64;
                for t in (0..steps).rev() {
                    let (a, b, u) = bf.predecessors(state);
                    word |= (u as u64) << (steps - 1 - t);
                    state = if decisions[(t * n + state) * n + s] == 1 {
                        b
                    } else {
                        a
                    };
                }
                (metric[s * n + s], word)
            })
            .collect()
    })
}

/// Maximum-likelihood tail-biting decoding under Hamming distance. When
/// several information words are equally close, the choice among them is
/// deterministic but unspecified.
pub fn viterbi_decode(y: &BitSeq, code: &ConvCode) -> Result<BitSeq> {
    check_len(code.n(), y.len())?;
    let g = code.generators.len();
    let symbols: Vec<u32> = y
        .bits()
        .chunks(g)
        .map(|c| c.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32))
        .collect();
    let bf = Butterfly::new(code);
    let (_, word) = wrapping_trellis(&bf, &symbols, 1 << g)
        .into_iter()
        .min()
        .expect("at least two states");
    Ok(BitSeq::from_u64(word, code.k()))
}

/// Public helper string of the code-offset construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchRecord {
    pub ss: BitSeq,
    pub code_id: String,
}

/// `SS = q_a ⊕ Enc(r)` for a fresh uniform `r`, which is dropped on return.
pub fn sketch(q_a: &BitSeq, rng: &mut Rng, code: &ConvCode) -> Result<SketchRecord> {
    check_len(code.n(), q_a.len())?;
    let r = rng.bits(code.k());
    Ok(SketchRecord {
        ss: q_a.xor(&conv_encode(&r, code)?)?,
        code_id: code.id(),
    })
}

/// `SS ⊕ Enc(Dec(SS ⊕ q_b))`.
pub fn recover(record: &SketchRecord, q_b: &BitSeq, code: &ConvCode) -> Result<BitSeq> {
    if record.code_id != code.id() {
        return Err(SkgError::Precondition(format!(
            "sketch made with {} cannot be recovered with {}",
            record.code_id,
            code.id()
        )));
    }
    check_len(code.n(), q_b.len())?;
    let noisy = record.ss.xor(q_b)?;
    let decoded = viterbi_decode(&noisy, code)?;
    record.ss.xor(&conv_encode(&decoded, code)?)
}

/// Entropy loss of publishing the sketch, n − k bits.
pub fn leakage(code: &ConvCode) -> usize {
    code.n() - code.k()
}
