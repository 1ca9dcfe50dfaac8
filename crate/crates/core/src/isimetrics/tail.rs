use super::xcorr::CrossCorrTensor;
use crate::error::{invalid, Result};
use crate::numeric::{is_integer, sin_pi, sinc, C64};
use std::f64::consts::PI;

/// Truncation of the infinite tail sums, in multiples of `N`.
pub const DEFAULT_TRUNCATION_FACTOR: usize = 64;

/// A sequence sampled on the integers `first, first + 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSeq {
    pub first: i64,
    pub values: Vec<C64>,
}

impl SampledSeq {
    /// A sequence on `-(len-1)/2 ..= (len-1)/2`; `len` must be odd.
    pub fn centred(values: Vec<C64>) -> Result<Self> {
        if values.len().is_multiple_of(2) {
            return Err(invalid("a centred sequence needs an odd length"));
        }
        Ok(Self {
            first: -((values.len() / 2) as i64),
            values,
        })
    }

    pub fn last(&self) -> i64 {
        self.first + self.values.len() as i64 - 1
    }

    /// Value at `n`, zero outside the stored range.
    pub fn get(&self, n: i64) -> C64 {
        if n < self.first || n > self.last() {
            C64::new(0.0, 0.0)
        } else {
            self.values[(n - self.first) as usize]
        }
    }
}

/// Tail energy with an estimate of what the truncation left out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub energy: f64,
    /// Leading-order estimate of the energy beyond the truncation.
    pub residual: f64,
    pub truncation: i64,
}

/// Band-limit to half-bandwidth `W` (scaled by `1/(2W)`) and shift by `tau`:
/// `out[n] = sum_q C[q] sinc(2W (n + tau - q))`, evaluated on
/// `from..=to`. With `W = 0.5` this is the sinc interpolant of `C` read at
/// `n + tau`, so an integer shift is an exact shift.
pub fn bandlimit_shift(
    corr: &SampledSeq,
    half_bandwidth: f64,
    shift: f64,
    from: i64,
    to: i64,
) -> Result<SampledSeq> {
    if !(half_bandwidth > 0.0 && half_bandwidth <= 0.5) {
        return Err(invalid("half bandwidth must lie in (0, 0.5]"));
    }
    if to < from {
        return Err(invalid("empty evaluation range"));
    }
    let values = if half_bandwidth == 0.5 {
        interpolant(corr, shift, from, to)
    } else {
        let w2 = 2.0 * half_bandwidth;
        (from..=to)
            .map(|n| {
                corr.values
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let q = corr.first + i as i64;
                        c * sinc(w2 * (n as f64 + shift - q as f64))
                    })
                    .sum()
            })
            .collect()
    };
    Ok(SampledSeq { first: from, values })
}

// c(n + tau) for n in from..=to, using
// sinc(x - q) = (-1)^(n - q) sin(pi tau) / (pi (x - q)) with x = n + tau.
fn interpolant(corr: &SampledSeq, tau: f64, from: i64, to: i64) -> Vec<C64> {
    if is_integer(tau, 0.0) {
        let k = tau as i64;
        return (from..=to).map(|n| corr.get(n + k)).collect();
    }
    let alt: Vec<C64> = corr
        .values
        .iter()
        .enumerate()
        .map(|(i, c)| if (corr.first + i as i64) % 2 == 0 { *c } else { -*c })
        .collect();
    let s = sin_pi(tau) / PI;
    (from..=to)
        .map(|n| {
            let x = n as f64 + tau;
            let mut acc = C64::new(0.0, 0.0);
            for (i, a) in alt.iter().enumerate() {
                acc += a / (x - (corr.first + i as i64) as f64);
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc * (sign * s)
        })
        .collect()
}

/// `sum_{l < |n| <= truncation} |seq[n]|^2` over the stored samples.
pub fn tail_energy(seq: &SampledSeq, l: u64, truncation: u64) -> Result<f64> {
    if truncation < l {
        return Err(invalid("truncation must be at least l"));
    }
    let l = l as i64;
    let t = truncation as i64;
    Ok(seq
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| (seq.first + i as i64, v))
        .filter(|(n, _)| n.abs() > l && n.abs() <= t)
        .map(|(_, v)| v.norm_sqr())
        .sum())
}

// Energy of c(j + tau) for j outside [lo, hi], |j| <= truncation.
fn window_tail(corr: &SampledSeq, tau: f64, lo: i64, hi: i64, truncation: i64) -> TailEstimate {
    let mut energy = 0.0;
    let left = interpolant(corr, tau, -truncation, lo - 1);
    let right = interpolant(corr, tau, hi + 1, truncation);
    for v in left.iter().chain(&right) {
        energy += v.norm_sqr();
    }
    // far field: |c(x)| ~ |sin(pi tau)| |sum_q (-1)^q C[q]| / (pi |x|)
    let a: C64 = corr
        .values
        .iter()
        .enumerate()
        .map(|(i, c)| if (corr.first + i as i64) % 2 == 0 { *c } else { -*c })
        .sum();
    let s = sin_pi(tau) / PI;
    let residual = 2.0 * (s * a.norm()).powi(2) / truncation as f64;
    TailEstimate {
        energy,
        residual,
        truncation,
    }
}

fn pair_seq(tensor: &CrossCorrTensor, r: usize, s: usize) -> Result<SampledSeq> {
    if r >= tensor.m() || s >= tensor.m() {
        return Err(invalid(format!("pair ({r}, {s}) outside a {}-column tensor", tensor.m())));
    }
    SampledSeq::centred(tensor.seq(r, s).to_vec())
}

/// Band-limited correlation tail energy of pair `(r, s)`: the energy of the
/// half-sample-shifted interpolant `c(j + 1/2)` at the positions
/// `|j + 1/2| >= N + 1/2`, truncated at `|j| <= truncation`.
pub fn ebct_truncated(
    tensor: &CrossCorrTensor,
    r: usize,
    s: usize,
    truncation: usize,
) -> Result<TailEstimate> {
    let seq = pair_seq(tensor, r, s)?;
    let n = tensor.n_len() as i64;
    let t = truncation as i64;
    if t < n {
        return Err(invalid("truncation must reach past the correlation support"));
    }
    Ok(window_tail(&seq, 0.5, -n, n - 1, t))
}

/// [`ebct_truncated`] at the default truncation `64 N`.
pub fn ebct(tensor: &CrossCorrTensor, r: usize, s: usize) -> Result<f64> {
    Ok(ebct_truncated(tensor, r, s, DEFAULT_TRUNCATION_FACTOR * tensor.n_len())?.energy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfShiftScan {
    pub taus: Vec<f64>,
    pub tails: Vec<f64>,
    pub argmax_tau: f64,
    /// True when the largest tail sits at `tau = 0.5`.
    pub peak_at_half: bool,
}

/// Tail energy of `c(j + tau)` for each `tau` of the grid, measured against
/// the nearest integer alignment of the support: outside `[-(N-1), N-1]` for
/// `tau < 1/2`, outside `[-N, N-2]` for `tau > 1/2`, and the larger of the two
/// at `tau = 1/2` where both alignments are equally near. Reports where the
/// maximum falls rather than assuming it.
pub fn half_shift_worst_case_scan(
    tensor: &CrossCorrTensor,
    r: usize,
    s: usize,
    taus: &[f64],
) -> Result<HalfShiftScan> {
    if taus.is_empty() {
        return Err(invalid("empty shift grid"));
    }
    if taus.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(invalid("shifts must lie in [0, 1]"));
    }
    let seq = pair_seq(tensor, r, s)?;
    let n = tensor.n_len() as i64;
    let t = (DEFAULT_TRUNCATION_FACTOR * tensor.n_len()) as i64;
    let tails: Vec<f64> = taus
        .iter()
        .map(|&tau| {
            let floor = || window_tail(&seq, tau, -(n - 1), n - 1, t).energy;
            let ceil = || window_tail(&seq, tau, -n, n - 2, t).energy;
            if (tau - 0.5).abs() < 1e-12 {
                floor().max(ceil())
            } else if tau < 0.5 {
                floor()
            } else {
                ceil()
            }
        })
        .collect();
    let mut best = 0;
    for (i, v) in tails.iter().enumerate() {
        // relative slack so exact ties on symmetric curves do not flip the answer
        if *v > tails[best] * (1.0 + 1e-12) {
            best = i;
        }
    }
    let argmax_tau = taus[best];
    let half_tail = taus
        .iter()
        .position(|t| (t - 0.5).abs() < 1e-12)
        .map(|i| tails[i]);
    let peak_at_half = match half_tail {
        Some(h) => tails.iter().all(|v| *v <= h * (1.0 + 1e-9)),
        None => false,
    };
    Ok(HalfShiftScan {
        taus: taus.to_vec(),
        tails,
        argmax_tau,
        peak_at_half,
    })
}
