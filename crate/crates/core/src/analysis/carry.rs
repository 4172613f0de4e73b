//! Longest carry-propagation chain statistics.
//!
//! A chain starts at a generate position (`a_i = b_i = 1`) and continues
//! through the propagate positions (`a_i != b_i`) right above it; its length
//! counts the generating stage plus those propagating stages. A generate with
//! no propagate above it moves no carry through any stage and counts as 0.
//! With `cin = 0` there is no chain that starts at the carry-in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::adders::{build_handshake_system, build_rca, FullAdderDesign};
use crate::cells::DelayModel;
use crate::error::{Error, Result};
use crate::sim::{run_transactions, Operands, RtPolicy, Trace};

/// Samples drawn from one RNG stream. Streams are keyed by (seed, chunk
/// index), so results do not depend on how chunks are spread over threads.
const CHUNK: u64 = 4096;

fn mask(width: usize) -> u64 {
    if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Longest active chain of `a + b` (with `cin = 0`) over `width` bits.
pub fn longest_active_chain(a: u64, b: u64, width: usize) -> usize {
    let generate = a & b & mask(width);
    let propagate = (a ^ b) & mask(width);
    let mut best = 0;
    let mut i = 0;
    while i < width {
        if generate >> i & 1 == 1 {
            let mut len = 1;
            let mut j = i + 1;
            while j < width && propagate >> j & 1 == 1 {
                len += 1;
                j += 1;
            }
            if len > 1 {
                best = best.max(len);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    best
}

/// Longest run of consecutive propagate positions, regardless of what
/// precedes it.
pub fn longest_propagate_run(a: u64, b: u64, width: usize) -> usize {
    let p = (a ^ b) & mask(width);
    let (mut best, mut run) = (0, 0);
    for i in 0..width {
        run = if p >> i & 1 == 1 { run + 1 } else { 0 };
        best = best.max(run);
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStats {
    pub width: usize,
    pub samples: u64,
    pub seed: Option<u64>,
    /// `histogram[k]`: samples whose longest active chain is `k`.
    pub histogram: Vec<u64>,
    pub mean: f64,
    /// `fraction_le[k]`: share of samples with longest active chain `<= k`.
    pub fraction_le: Vec<f64>,
    /// Same as `histogram` for the plain longest propagate run.
    pub plain_histogram: Vec<u64>,
    pub plain_mean: f64,
}

impl ChainStats {
    fn from_histograms(width: usize, seed: Option<u64>, histogram: Vec<u64>, plain_histogram: Vec<u64>) -> Self {
        let samples: u64 = histogram.iter().sum();
        let mean_of = |h: &[u64]| h.iter().enumerate().map(|(k, &c)| k as f64 * c as f64).sum::<f64>() / samples as f64;
        let mut acc = 0;
        let fraction_le = histogram
            .iter()
            .map(|&c| {
                acc += c;
                acc as f64 / samples as f64
            })
            .collect();
        Self {
            width,
            samples,
            seed,
            mean: mean_of(&histogram),
            plain_mean: mean_of(&plain_histogram),
            histogram,
            fraction_le,
            plain_histogram,
        }
    }

    pub fn fraction_at_most(&self, k: usize) -> f64 {
        self.fraction_le[k.min(self.width)]
    }

    /// `k,count,fraction_le,plain_count` per chain length.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("length,count,fraction_le,plain_count\n");
        for k in 0..=self.width {
            s.push_str(&format!(
                "{k},{},{:.6},{}\n",
                self.histogram[k], self.fraction_le[k], self.plain_histogram[k]
            ));
        }
        s
    }
}

fn check_width(width: usize) -> Result<()> {
    if width == 0 || width > 64 {
        return Err(Error::Domain(format!("width must be in 1..=64, got {width}")));
    }
    Ok(())
}

/// Monte Carlo over uniformly random operands, `cin = 0`.
pub fn carry_chain_stats(width: usize, samples: u64, seed: u64) -> Result<ChainStats> {
    check_width(width)?;
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let chunks = samples.div_ceil(CHUNK);
    let zero = || (vec![0u64; width + 1], vec![0u64; width + 1]);
    let (hist, plain) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let (mut h, mut p) = zero();
            let n = CHUNK.min(samples - c * CHUNK);
            for _ in 0..n {
                let a = rng.gen::<u64>() & mask(width);
                let b = rng.gen::<u64>() & mask(width);
                h[longest_active_chain(a, b, width)] += 1;
                p[longest_propagate_run(a, b, width)] += 1;
            }
            (h, p)
        })
        .reduce(zero, |(mut h1, mut p1), (h2, p2)| {
            h1.iter_mut().zip(h2).for_each(|(x, y)| *x += y);
            p1.iter_mut().zip(p2).for_each(|(x, y)| *x += y);
            (h1, p1)
        });
    Ok(ChainStats::from_histograms(width, Some(seed), hist, plain))
}

/// Every operand pair of a small width, `cin = 0`.
pub fn exhaustive_chain_stats(width: usize) -> Result<ChainStats> {
    check_width(width)?;
    if width > 12 {
        return Err(Error::Domain(format!("exhaustive enumeration limited to 12 bits, got {width}")));
    }
    let mut h = vec![0u64; width + 1];
    let mut p = vec![0u64; width + 1];
    for a in 0..1u64 << width {
        for b in 0..1u64 << width {
            h[longest_active_chain(a, b, width)] += 1;
            p[longest_propagate_run(a, b, width)] += 1;
        }
    }
    Ok(ChainStats::from_histograms(width, None, h, p))
}

/// Longest active chain of one transaction, read from the trace: a stage
/// carries when its carry-out rail 1 rises; it propagates when that rise
/// depends (through cause and support links) on its carry-in rail 1 rising,
/// and generates otherwise.
pub fn chain_from_trace(trace: &Trace, carries_d1: &[String], transaction: usize) -> usize {
    let m = &trace.transactions[transaction];
    let lo = m.valid_seq as usize;
    let hi = m.spacer_seq as usize;
    let wire = |name: &str| trace.wire_index(name);
    let rise_in = |w: Option<u32>| {
        w.and_then(|w| trace.events[lo..hi].iter().find(|e| e.wire == w && e.value).map(|e| e.seq))
    };
    let depends = |from: u32, on: u32| -> bool {
        let mut stack = vec![from];
        let mut seen = std::collections::HashSet::new();
        while let Some(e) = stack.pop() {
            if e == on {
                return true;
            }
            if (e as usize) < lo || !seen.insert(e) {
                continue;
            }
            let ev = trace.event(e);
            stack.extend(ev.cause.iter().chain(ev.support.iter()).copied());
        }
        false
    };
    let width = carries_d1.len() - 1;
    // Per stage: None (no carry out), Some(false) generate, Some(true) propagate.
    let roles: Vec<Option<bool>> = (0..width)
        .map(|q| {
            let out = rise_in(wire(&carries_d1[q + 1]))?;
            let inp = rise_in(wire(&carries_d1[q]));
            Some(inp.is_some_and(|i| depends(out, i)))
        })
        .collect();
    let mut best = 0;
    for g in 0..width {
        if roles[g] == Some(false) {
            let mut len = 1;
            let mut q = g + 1;
            while q < width && roles[q] == Some(true) {
                len += 1;
                q += 1;
            }
            if len > 1 {
                best = best.max(len);
            }
        }
    }
    best
}

/// Exhaustive chain distribution measured on a simulated ripple-carry
/// adder of `design`.
pub fn trace_chain_stats(design: &dyn FullAdderDesign, width: usize, delays: &DelayModel) -> Result<ChainStats> {
    check_width(width)?;
    if width > 8 {
        return Err(Error::Domain(format!("trace-based enumeration limited to 8 bits, got {width}")));
    }
    let sys = build_handshake_system(build_rca(width, design));
    let ops: Vec<Operands> = (0..1u64 << width)
        .flat_map(|a| (0..1u64 << width).map(move |b| Operands::new(a, b, false)))
        .collect();
    let run = run_transactions(&sys, &ops, delays, &RtPolicy::off())?;
    let carries: Vec<String> = sys.adder.carries.iter().map(|c| c.d1.clone()).collect();
    let mut h = vec![0u64; width + 1];
    let mut p = vec![0u64; width + 1];
    for (t, op) in ops.iter().enumerate() {
        h[chain_from_trace(&run.trace, &carries, t)] += 1;
        p[longest_propagate_run(op.a, op.b, width)] += 1;
    }
    Ok(ChainStats::from_histograms(width, None, h, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_examples() {
        // generate at 0, propagate 1..3, kill at 4
        assert_eq!(longest_active_chain(0b0111, 0b0001, 8), 3);
        assert_eq!(longest_active_chain(0, 0, 8), 0);
        // a generate whose carry is absorbed right away
        assert_eq!(longest_active_chain(0b0001, 0b0001, 8), 0);
        assert_eq!(longest_active_chain(0b0011, 0b0001, 8), 2);
        // propagates without a generate below them do not count
        assert_eq!(longest_active_chain(0b1110, 0, 8), 0);
        assert_eq!(longest_propagate_run(0b1110, 0, 8), 3);
        assert_eq!(longest_active_chain(u64::MAX, 1, 64), 64);
        assert_eq!(longest_propagate_run(0b1011, 0, 4), 2);
        assert_eq!(longest_propagate_run(u64::MAX, 0, 64), 64);
    }

    #[test]
    fn width_one_has_no_propagation() {
        let s = carry_chain_stats(1, 1000, 7).unwrap();
        assert_eq!(s.histogram, vec![1000, 0]);
        assert_eq!(s.fraction_at_most(1), 1.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = carry_chain_stats(16, 10_000, 42).unwrap();
        let b = carry_chain_stats(16, 10_000, 42).unwrap();
        let c = carry_chain_stats(16, 10_000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.histogram, c.histogram);
    }

    #[test]
    fn brute_force_reference() {
        // Independent bit-by-bit simulation of the ripple carry.
        fn reference(a: u64, b: u64, w: usize) -> usize {
            let mut best = 0;
            let mut run = 0;
            let mut carry = false;
            for i in 0..w {
                let (x, y) = (a >> i & 1 == 1, b >> i & 1 == 1);
                if x && y {
                    run = 1;
                } else if x != y && carry {
                    run += 1;
                } else {
                    run = 0;
                }
                if run >= 2 {
                    best = best.max(run);
                }
                carry = (x && y) || (x != y && carry);
            }
            best
        }
        for a in 0..64 {
            for b in 0..64 {
                assert_eq!(longest_active_chain(a, b, 6), reference(a, b, 6), "{a} {b}");
            }
        }
    }
}
