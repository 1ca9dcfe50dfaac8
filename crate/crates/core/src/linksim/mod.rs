//! Multi-user link simulation: three subframes of precoded symbols, the
//! victim user in the middle and louder neighbours on either side.

mod qpsk;

pub use qpsk::{qpsk_decide, qpsk_demap, qpsk_map};

use crate::channel::{
    assemble_channel, cdl_c_spec, prefix_len_for, AssembleOptions, ChannelRealization,
    ChannelSpec, CDL_C_TAPS,
};
use crate::dpss::dpss_limit_half;
use crate::error::{invalid, Error, Result};
use crate::numeric::{db_to_linear, C64};
use crate::waveform::{build_basis, m_for_eta, with_prefix, PrecodingScheme, PrefixKind, PrefixedBasis};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modulation {
    Qpsk,
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Self::Qpsk),
            other => Err(invalid(format!("unsupported modulation '{other}'"))),
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("qpsk")
    }
}

/// Frame layout and transmit parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameConfig {
    pub n_len: usize,
    pub scheme: PrecodingScheme,
    pub eta: f64,
    pub symbols_per_subframe: usize,
    pub n_subframes: usize,
    /// 0-based subframe carrying the victim user; the others are scaled by
    /// `p_delta_db`.
    pub victim_subframe: usize,
    pub prefix_kind: PrefixKind,
    pub prefix_len: usize,
    pub p_delta_db: f64,
    pub modulation: Modulation,
    pub sample_rate_hz: f64,
}

pub const TABLE1_SAMPLE_RATE_HZ: f64 = 1.92e6;
pub const TABLE1_N_LEN: usize = 128;

impl FrameConfig {
    /// 128-sample symbols, 3 subframes of 14, middle subframe as victim,
    /// cyclic prefix of `ceil(1.92 MHz * tau_max)` for a CDL-C profile with
    /// the given delay spread.
    pub fn table1(scheme: PrecodingScheme, eta: f64, delay_spread_s: f64, p_delta_db: f64) -> Self {
        let tau_max = CDL_C_TAPS.iter().map(|t| t.0).fold(0.0, f64::max) * delay_spread_s;
        Self {
            n_len: TABLE1_N_LEN,
            scheme,
            eta,
            symbols_per_subframe: 14,
            n_subframes: 3,
            victim_subframe: 1,
            prefix_kind: PrefixKind::Cyclic,
            prefix_len: prefix_len_for(TABLE1_SAMPLE_RATE_HZ, tau_max),
            p_delta_db,
            modulation: Modulation::Qpsk,
            sample_rate_hz: TABLE1_SAMPLE_RATE_HZ,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(invalid(format!("eta {} outside (0, 1]", self.eta)));
        }
        if self.n_len == 0 || self.symbols_per_subframe == 0 || self.n_subframes == 0 {
            return Err(invalid("frame dimensions must be positive"));
        }
        if self.victim_subframe >= self.n_subframes {
            return Err(invalid("victim subframe outside the frame"));
        }
        if self.prefix_len >= self.n_len {
            return Err(invalid("prefix must be shorter than the symbol"));
        }
        if !(self.p_delta_db >= 0.0) {
            return Err(invalid("p_delta_db must be >= 0"));
        }
        if !(self.sample_rate_hz > 0.0) {
            return Err(invalid("sample rate must be positive"));
        }
        Ok(())
    }

    pub fn m_active(&self) -> usize {
        m_for_eta(self.n_len, self.eta)
    }

    /// Total symbols `L`.
    pub fn n_symbols(&self) -> usize {
        self.symbols_per_subframe * self.n_subframes
    }

    pub fn block_len(&self) -> usize {
        self.n_len + self.prefix_len
    }

    pub fn stream_len(&self) -> usize {
        self.n_symbols() * self.block_len()
    }

    /// Symbol indices of the victim subframe.
    pub fn victim_symbols(&self) -> std::ops::Range<usize> {
        let start = self.victim_subframe * self.symbols_per_subframe;
        start..start + self.symbols_per_subframe
    }

    /// Amplitude applied to symbol `l`.
    pub fn amplitude(&self, l: usize) -> f64 {
        if self.victim_symbols().contains(&l) {
            1.0
        } else {
            db_to_linear(self.p_delta_db).sqrt()
        }
    }

    pub fn build_basis(&self) -> Result<PrefixedBasis> {
        self.validate()?;
        let m = self.m_active();
        let dpss = match self.scheme {
            PrecodingScheme::Dpss => Some(dpss_limit_half(self.n_len, m)?),
            _ => None,
        };
        let base = build_basis(self.scheme, self.n_len, m, dpss.as_ref())?;
        with_prefix(base, self.prefix_len, self.prefix_kind)
    }
}

/// CDL-C channel for a delay spread in seconds at the frame's sample rate.
pub fn table1_channel(delay_spread_s: f64) -> Result<ChannelSpec> {
    cdl_c_spec(delay_spread_s, TABLE1_SAMPLE_RATE_HZ)
}

/// Random unit-energy payloads, one vector of `M` symbols per slot.
pub fn random_payloads<R: Rng + ?Sized>(cfg: &FrameConfig, rng: &mut R) -> Vec<DVector<C64>> {
    let m = cfg.m_active();
    (0..cfg.n_symbols())
        .map(|_| {
            DVector::from_fn(m, |_, _| {
                let bits: u8 = rng.random();
                qpsk::qpsk_symbol(bits & 1, (bits >> 1) & 1)
            })
        })
        .collect()
}

/// Concatenated stream `x_l = a_l O_t i_l`, with `a_l` the subframe
/// amplitude.
pub fn build_frame(
    cfg: &FrameConfig,
    basis: &PrefixedBasis,
    payloads: &[DVector<C64>],
) -> Result<Vec<C64>> {
    cfg.validate()?;
    if payloads.len() != cfg.n_symbols() {
        return Err(Error::DimensionMismatch(format!(
            "{} payloads for {} symbols",
            payloads.len(),
            cfg.n_symbols()
        )));
    }
    if basis.block_len() != cfg.block_len() || basis.base().m_active() != cfg.m_active() {
        return Err(Error::DimensionMismatch("basis does not match the frame".into()));
    }
    let mut out = Vec::with_capacity(cfg.stream_len());
    for (l, i) in payloads.iter().enumerate() {
        if i.len() != cfg.m_active() {
            return Err(Error::DimensionMismatch(format!(
                "payload {l} has {} symbols, expected {}",
                i.len(),
                cfg.m_active()
            )));
        }
        let x = basis.o_t() * i * C64::new(cfg.amplitude(l), 0.0);
        out.extend_from_slice(x.as_slice());
    }
    Ok(out)
}

/// Linear MMSE filter `(A^H A + s I)^-1 A^H`; `s = 0` gives zero forcing.
pub fn mmse_filter(a: &DMatrix<C64>, noise_var: f64) -> Result<DMatrix<C64>> {
    let ah = a.adjoint();
    let mut gram = &ah * a;
    for i in 0..gram.nrows() {
        gram[(i, i)] += C64::new(noise_var, 0.0);
    }
    let chol = gram.cholesky().ok_or(Error::SingularMatrix)?;
    Ok(chol.solve(&ah))
}

/// MMSE equalisation of one received block followed by per-symbol
/// nearest-neighbour decisions.
pub fn equalize_and_detect(z: &DVector<C64>, a: &DMatrix<C64>, noise_var: f64) -> Result<Vec<C64>> {
    if z.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "block of {} samples for a {}-row channel",
            z.len(),
            a.nrows()
        )));
    }
    let w = mmse_filter(a, noise_var)?;
    Ok((w * z).iter().map(|v| qpsk_decide(*v)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub snr_db: f64,
    pub errors: u64,
    pub symbols: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerPoint {
    pub snr_db: f64,
    pub ser: f64,
    pub errors: u64,
    pub trials: usize,
    pub total_symbols: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerCurve {
    pub scheme: PrecodingScheme,
    pub eta: f64,
    pub p_delta_db: f64,
    pub points: Vec<SerPoint>,
    /// Trials dropped because the equaliser matrix was singular.
    pub skipped_trials: usize,
}

/// Per-trial seed.
pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    base_seed.wrapping_add(trial as u64)
}

/// Symbol error rate of the victim user over `n_trials` channel draws.
///
/// Trial `i` uses seed `base_seed + i` for its channel phases and payloads;
/// the noise for SNR point `k` comes from a separate ChaCha stream of the
/// same seed. Noise variance per complex sample is `P / snr`, with `P` the
/// total channel power, so SNR is the victim's received Es/N0.
pub fn run_ser(
    cfg: &FrameConfig,
    spec: &ChannelSpec,
    snr_db: &[f64],
    n_trials: usize,
    base_seed: u64,
) -> Result<SerCurve> {
    cfg.validate()?;
    if n_trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    if snr_db.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("SNR grid must be strictly increasing"));
    }
    if !spec.is_quasi_static() {
        return Err(invalid("link simulation assumes a channel without Doppler"));
    }
    let basis = cfg.build_basis()?;
    let power = spec.total_power();
    let trials: Vec<Result<Vec<TrialResult>>> = (0..n_trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, &basis, spec, power, snr_db, trial_seed(base_seed, i)))
        .collect();
    let mut errors = vec![0u64; snr_db.len()];
    let mut symbols = vec![0u64; snr_db.len()];
    let mut used = 0usize;
    let mut skipped = 0usize;
    for t in trials {
        match t {
            Ok(results) => {
                used += 1;
                for (k, r) in results.iter().enumerate() {
                    errors[k] += r.errors;
                    symbols[k] += r.symbols;
                }
            }
            Err(Error::SingularMatrix) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let points = snr_db
        .iter()
        .enumerate()
        .map(|(k, &s)| SerPoint {
            snr_db: s,
            ser: if symbols[k] == 0 {
                0.0
            } else {
                errors[k] as f64 / symbols[k] as f64
            },
            errors: errors[k],
            trials: used,
            total_symbols: symbols[k],
        })
        .collect();
    Ok(SerCurve {
        scheme: cfg.scheme,
        eta: cfg.eta,
        p_delta_db: cfg.p_delta_db,
        points,
        skipped_trials: skipped,
    })
}

/// Noise variance per complex sample for a received Es/N0 of `snr_db`, with
/// `channel_power` the victim's per-symbol received energy. `+inf` gives 0.
pub fn noise_variance(channel_power: f64, snr_db: f64) -> f64 {
    if snr_db.is_infinite() && snr_db > 0.0 {
        0.0
    } else {
        channel_power / db_to_linear(snr_db)
    }
}

/// Circular complex Gaussian sample with `E|n|^2 = noise_var`.
pub fn awgn<R: Rng + ?Sized>(rng: &mut R, noise_var: f64) -> C64 {
    let sd = (noise_var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(sd * re, sd * im)
}

fn run_trial(
    cfg: &FrameConfig,
    basis: &PrefixedBasis,
    spec: &ChannelSpec,
    power: f64,
    snr_db: &[f64],
    seed: u64,
) -> Result<Vec<TrialResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let real = ChannelRealization::draw_with(spec.clone(), &mut rng, cfg.block_len(), cfg.n_symbols())?;
    let payloads = random_payloads(cfg, &mut rng);
    let tx = build_frame(cfg, basis, &payloads)?;
    let op = assemble_channel(&real, &AssembleOptions::exact_streaming())?;
    let rx = op.apply(&tx)?;

    // Quasi-static channel: every diagonal block is the same Toeplitz matrix.
    let b = cfg.block_len();
    let h_diag = DMatrix::from_fn(b, b, |i, k| real.entry(i, k));
    let a = basis.o_r().adjoint() * h_diag * basis.o_t();
    let o_r_h = basis.o_r().adjoint();

    let victims = cfg.victim_symbols();
    let mut out = Vec::with_capacity(snr_db.len());
    for (k, &snr) in snr_db.iter().enumerate() {
        let noise_var = noise_variance(power, snr);
        let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
        noise_rng.set_stream(k as u64 + 1);
        let w = mmse_filter(&a, noise_var)?;
        let mut errors = 0u64;
        let mut count = 0u64;
        for l in victims.clone() {
            let block = DVector::from_fn(b, |n, _| {
                let x = rx[l * b + n];
                if noise_var > 0.0 {
                    x + awgn(&mut noise_rng, noise_var)
                } else {
                    x
                }
            });
            let z = &o_r_h * block;
            let est = &w * z;
            for (e, s) in est.iter().zip(payloads[l].iter()) {
                if qpsk_decide(*e) != *s {
                    errors += 1;
                }
                count += 1;
            }
        }
        out.push(TrialResult {
            snr_db: snr,
            errors,
            symbols: count,
            seed,
        });
    }
    Ok(out)
}
