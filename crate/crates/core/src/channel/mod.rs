//! Delay-Doppler multipath channels with fractional delays.
//!
//! A path with gain `g`, delay `tau` (samples) and Doppler `nu` (cycles per
//! sample) acts on a band-limited sample stream as
//! `y[r] = g exp(j 2 pi r nu) sum_k sinc(r - k - tau) x[k]`.

mod profile;

pub use profile::{cdl_c_spec, prefix_len_for, ChannelPreset, ChannelProfile, CDL_C_TAPS};

use crate::error::{invalid, Error, Result};
use crate::numeric::{sinc, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathGain {
    /// Deterministic complex gain.
    Fixed(C64),
    /// Average power; each realization draws a uniform random phase.
    Power(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    pub delay: f64,
    pub gain: PathGain,
    pub doppler: f64,
}

impl PathSpec {
    pub fn fixed(delay: f64, gain: C64) -> Self {
        Self {
            delay,
            gain: PathGain::Fixed(gain),
            doppler: 0.0,
        }
    }

    pub fn random_phase(delay: f64, power: f64) -> Self {
        Self {
            delay,
            gain: PathGain::Power(power),
            doppler: 0.0,
        }
    }

    pub fn with_doppler(mut self, doppler: f64) -> Self {
        self.doppler = doppler;
        self
    }

    /// Expected squared magnitude of the gain.
    pub fn power(&self) -> f64 {
        match self.gain {
            PathGain::Fixed(g) => g.norm_sqr(),
            PathGain::Power(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    paths: Vec<PathSpec>,
    max_delay: f64,
}

impl ChannelSpec {
    pub fn new(paths: Vec<PathSpec>, max_delay: f64) -> Result<Self> {
        if paths.is_empty() {
            return Err(invalid("channel needs at least one path"));
        }
        let mut longest = 0.0f64;
        for (i, p) in paths.iter().enumerate() {
            if !(p.delay >= 0.0) || !p.delay.is_finite() {
                return Err(invalid(format!("path {i}: delay must be finite and >= 0")));
            }
            if !p.doppler.is_finite() {
                return Err(invalid(format!("path {i}: doppler must be finite")));
            }
            match p.gain {
                PathGain::Power(s) if !(s > 0.0) || !s.is_finite() => {
                    return Err(invalid(format!("path {i}: power must be positive")))
                }
                PathGain::Fixed(g) if !g.re.is_finite() || !g.im.is_finite() => {
                    return Err(invalid(format!("path {i}: gain must be finite")))
                }
                _ => {}
            }
            longest = longest.max(p.delay);
        }
        if !(max_delay >= longest) {
            return Err(invalid(format!(
                "max_delay {max_delay} is below the longest path delay {longest}"
            )));
        }
        Ok(Self { paths, max_delay })
    }

    /// Spec whose `max_delay` is the longest path delay.
    pub fn from_paths(paths: Vec<PathSpec>) -> Result<Self> {
        let longest = paths.iter().map(|p| p.delay).fold(0.0, f64::max);
        Self::new(paths, longest)
    }

    pub fn paths(&self) -> &[PathSpec] {
        &self.paths
    }

    pub fn max_delay(&self) -> f64 {
        self.max_delay
    }

    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(PathSpec::power).sum()
    }

    pub fn is_quasi_static(&self) -> bool {
        self.paths.iter().all(|p| p.doppler == 0.0)
    }

    /// Copy with every path power divided so the total is one.
    pub fn normalized(&self) -> Self {
        let scale = self.total_power();
        let mut out = self.clone();
        if scale > 0.0 {
            for p in &mut out.paths {
                p.gain = match p.gain {
                    PathGain::Fixed(g) => PathGain::Fixed(g / scale.sqrt()),
                    PathGain::Power(s) => PathGain::Power(s / scale),
                };
            }
        }
        out
    }
}

/// One draw of a channel, laid out over `n_blocks` symbol slots of
/// `block_len` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    spec: ChannelSpec,
    drawn_gains: Vec<C64>,
    block_len: usize,
    n_blocks: usize,
}

impl ChannelRealization {
    /// Draws phases for the random-phase paths from a ChaCha8 stream seeded
    /// with `seed`. One uniform draw per path, in path order.
    pub fn draw(spec: ChannelSpec, seed: u64, block_len: usize, n_blocks: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::draw_with(spec, &mut rng, block_len, n_blocks)
    }

    pub fn draw_with<R: Rng + ?Sized>(
        spec: ChannelSpec,
        rng: &mut R,
        block_len: usize,
        n_blocks: usize,
    ) -> Result<Self> {
        let gains = spec
            .paths
            .iter()
            .map(|p| match p.gain {
                PathGain::Fixed(g) => g,
                PathGain::Power(s) => {
                    let phase = 2.0 * PI * rng.random::<f64>();
                    C64::from_polar(s.sqrt(), phase)
                }
            })
            .collect();
        Self::with_gains(spec, gains, block_len, n_blocks)
    }

    pub fn with_gains(
        spec: ChannelSpec,
        drawn_gains: Vec<C64>,
        block_len: usize,
        n_blocks: usize,
    ) -> Result<Self> {
        if block_len == 0 || n_blocks == 0 {
            return Err(invalid("block_len and n_blocks must be positive"));
        }
        if drawn_gains.len() != spec.paths.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} gains for {} paths",
                drawn_gains.len(),
                spec.paths.len()
            )));
        }
        Ok(Self {
            spec,
            drawn_gains,
            block_len,
            n_blocks,
        })
    }

    pub fn spec(&self) -> &ChannelSpec {
        &self.spec
    }

    pub fn gains(&self) -> &[C64] {
        &self.drawn_gains
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn stream_len(&self) -> usize {
        self.block_len * self.n_blocks
    }

    /// Same gains on a different stream layout.
    pub fn relayout(&self, block_len: usize, n_blocks: usize) -> Result<Self> {
        Self::with_gains(self.spec.clone(), self.drawn_gains.clone(), block_len, n_blocks)
    }

    /// `(gain, delay)` pairs.
    pub fn taps(&self) -> impl Iterator<Item = (C64, f64)> + '_ {
        self.drawn_gains
            .iter()
            .zip(&self.spec.paths)
            .map(|(g, p)| (*g, p.delay))
    }

    /// Entry `(row, col)` of the full stream matrix.
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        let d = row as f64 - col as f64;
        self.taps_with_doppler()
            .map(|(g, tau, nu)| g * doppler_phase(nu, row as i64) * sinc(d - tau))
            .sum()
    }

    fn taps_with_doppler(&self) -> impl Iterator<Item = (C64, f64, f64)> + '_ {
        self.drawn_gains
            .iter()
            .zip(&self.spec.paths)
            .map(|(g, p)| (*g, p.delay, p.doppler))
    }
}

fn doppler_phase(nu: f64, n: i64) -> C64 {
    if nu == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        // reduce the phase before scaling by 2 pi
        let cycles = (n as f64 * nu).rem_euclid(1.0);
        C64::from_polar(1.0, 2.0 * PI * cycles)
    }
}

/// Exponentially decaying random-phase channel: amplitude `exp(-decay tau)`
/// on every delay of the grid.
pub fn exp_profile_channel(
    decay: f64,
    delays: &[f64],
    seed: u64,
    block_len: usize,
    n_blocks: usize,
) -> Result<ChannelRealization> {
    ChannelRealization::draw(exp_profile_spec(decay, delays)?, seed, block_len, n_blocks)
}

pub fn exp_profile_spec(decay: f64, delays: &[f64]) -> Result<ChannelSpec> {
    if !(decay > 0.0) {
        return Err(invalid("decay must be positive"));
    }
    if delays.is_empty() {
        return Err(invalid("delay grid is empty"));
    }
    ChannelSpec::from_paths(
        delays
            .iter()
            .map(|&t| PathSpec::random_phase(t, (-2.0 * decay * t).exp()))
            .collect(),
    )
}

/// Inclusive grid `start:step:stop`, e.g. `0:0.1:15`. Each point is computed
/// as `start + i step` and snapped to 9 decimals, so `0.3` is exactly `0.3`.
pub fn delay_grid(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| start + i as f64 * step).map(clean_decimal).collect()
}

fn clean_decimal(x: f64) -> f64 {
    let r = (x * 1e9).round() / 1e9;
    if (r - x).abs() < 1e-12 {
        r
    } else {
        x
    }
}

/// `T(tau)` with entries `sinc(l + row_offset - k - delay)`.
pub fn sinc_delay_matrix(delay: f64, rows: usize, cols: usize, row_offset: i64) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |l, k| {
        C64::new(sinc(l as f64 + row_offset as f64 - k as f64 - delay), 0.0)
    })
}

/// Diagonal of `D(nu)`: `exp(j 2 pi (l + offset) nu)`.
pub fn doppler_matrix(doppler: f64, n: usize, offset: i64) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |l, k| {
        if l == k {
            doppler_phase(doppler, l as i64 + offset)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Default dense-matrix budget, 256 MiB.
pub const DEFAULT_MEMORY_BUDGET: usize = 256 << 20;
/// Default one-sided length of the truncated sinc filter.
pub const DEFAULT_FIR_HALF_LEN: usize = 64;
/// Filter half-length meaning "keep every lag".
pub const UNTRUNCATED: usize = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorForm {
    /// Dense when it fits the budget, streaming otherwise.
    Auto,
    Dense,
    Streaming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssembleOptions {
    pub form: OperatorForm,
    pub memory_budget: usize,
    pub fir_half_len: usize,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self {
            form: OperatorForm::Auto,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            fir_half_len: DEFAULT_FIR_HALF_LEN,
        }
    }
}

impl AssembleOptions {
    /// Streaming form whose filters cover every lag of the stream, so it
    /// reproduces the dense operator up to rounding.
    pub fn exact_streaming() -> Self {
        Self {
            form: OperatorForm::Streaming,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            fir_half_len: UNTRUNCATED,
        }
    }
}

#[derive(Debug, Clone)]
enum Form {
    Dense(DMatrix<C64>),
    Streaming { half_len: usize },
}

/// Linear map from a length `L (N + g)` stream to a stream of equal length.
#[derive(Debug, Clone)]
pub struct ChannelOperator {
    real: ChannelRealization,
    form: Form,
}

impl ChannelOperator {
    pub fn realization(&self) -> &ChannelRealization {
        &self.real
    }

    pub fn stream_len(&self) -> usize {
        self.real.stream_len()
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.form, Form::Dense(_))
    }

    pub fn dense(&self) -> Option<&DMatrix<C64>> {
        match &self.form {
            Form::Dense(h) => Some(h),
            Form::Streaming { .. } => None,
        }
    }

    /// Entry `(row, col)` of the operator, consistent with `apply`.
    pub fn entry(&self, row: usize, col: usize) -> C64 {
        match &self.form {
            Form::Dense(h) => h[(row, col)],
            Form::Streaming { half_len } => {
                let d = row as i64 - col as i64;
                self.real
                    .taps_with_doppler()
                    .filter(|(_, tau, _)| in_support(d, *tau, *half_len))
                    .map(|(g, tau, nu)| g * doppler_phase(nu, row as i64) * sinc(d as f64 - tau))
                    .sum()
            }
        }
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let n = self.stream_len();
        if x.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "input has {} samples, operator expects {n}",
                x.len()
            )));
        }
        match &self.form {
            Form::Dense(h) => {
                let v = nalgebra::DVector::from_column_slice(x);
                Ok((h * v).as_slice().to_vec())
            }
            Form::Streaming { half_len } => Ok(self.apply_streaming(x, *half_len)),
        }
    }

    fn apply_streaming(&self, x: &[C64], half_len: usize) -> Vec<C64> {
        let n = x.len();
        let mut y = vec![C64::new(0.0, 0.0); n];
        // one convolution per distinct Doppler value
        let mut groups: Vec<(f64, Vec<(C64, f64)>)> = Vec::new();
        for (g, tau, nu) in self.real.taps_with_doppler() {
            match groups.iter_mut().find(|(v, _)| *v == nu) {
                Some((_, taps)) => taps.push((g, tau)),
                None => groups.push((nu, vec![(g, tau)])),
            }
        }
        let max_lag = n as i64 - 1;
        for (nu, taps) in groups {
            let mut lo = i64::MAX;
            let mut hi = i64::MIN;
            for &(_, tau) in &taps {
                let (a, b) = support(tau, half_len);
                lo = lo.min(a.max(-max_lag));
                hi = hi.max(b.min(max_lag));
            }
            if lo > hi {
                continue;
            }
            let mut filter = vec![C64::new(0.0, 0.0); (hi - lo + 1) as usize];
            for &(g, tau) in &taps {
                let (a, b) = support(tau, half_len);
                for d in a.max(lo)..=b.min(hi) {
                    filter[(d - lo) as usize] += g * sinc(d as f64 - tau);
                }
            }
            let conv = convolve(x, &filter);
            for (r, out) in y.iter_mut().enumerate() {
                let k = r as i64 - lo;
                if k >= 0 && (k as usize) < conv.len() {
                    *out += doppler_phase(nu, r as i64) * conv[k as usize];
                }
            }
        }
        y
    }
}

fn support(tau: f64, half_len: usize) -> (i64, i64) {
    let base = tau.floor() as i64;
    let h = half_len as i64;
    if tau == tau.floor() {
        (base, base)
    } else {
        (base - h + 1, base + h)
    }
}

fn in_support(d: i64, tau: f64, half_len: usize) -> bool {
    let (a, b) = support(tau, half_len);
    a <= d && d <= b
}

fn convolve(x: &[C64], f: &[C64]) -> Vec<C64> {
    let out_len = x.len() + f.len() - 1;
    if x.len().min(f.len()) <= 32 {
        let mut out = vec![C64::new(0.0, 0.0); out_len];
        for (i, xi) in x.iter().enumerate() {
            for (j, fj) in f.iter().enumerate() {
                out[i + j] += xi * fj;
            }
        }
        return out;
    }
    let size = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut a = vec![C64::new(0.0, 0.0); size];
    let mut b = vec![C64::new(0.0, 0.0); size];
    a[..x.len()].copy_from_slice(x);
    b[..f.len()].copy_from_slice(f);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (u, v) in a.iter_mut().zip(&b) {
        *u *= v;
    }
    inv.process(&mut a);
    let scale = 1.0 / size as f64;
    a.truncate(out_len);
    for v in &mut a {
        *v *= scale;
    }
    a
}

/// Dense `H = sum_p g_p D(nu_p) T(tau_p)` over the whole stream.
pub fn assemble_dense(real: &ChannelRealization, memory_budget: usize) -> Result<DMatrix<C64>> {
    let n = real.stream_len();
    let required = n
        .checked_mul(n)
        .and_then(|v| v.checked_mul(std::mem::size_of::<C64>()))
        .unwrap_or(usize::MAX);
    if required > memory_budget {
        return Err(Error::MemoryBudget {
            required,
            budget: memory_budget,
        });
    }
    Ok(DMatrix::from_fn(n, n, |r, c| real.entry(r, c)))
}

pub fn assemble_channel(real: &ChannelRealization, opts: &AssembleOptions) -> Result<ChannelOperator> {
    let form = match opts.form {
        OperatorForm::Dense => Form::Dense(assemble_dense(real, opts.memory_budget)?),
        OperatorForm::Streaming => Form::Streaming {
            half_len: opts.fir_half_len,
        },
        OperatorForm::Auto => match assemble_dense(real, opts.memory_budget) {
            Ok(h) => Form::Dense(h),
            Err(Error::MemoryBudget { .. }) => Form::Streaming {
                half_len: opts.fir_half_len,
            },
            Err(e) => return Err(e),
        },
    };
    Ok(ChannelOperator {
        real: real.clone(),
        form,
    })
}

/// Block `(l, l')` of the stream operator, `block x block` samples.
pub fn block_submatrix(
    h: &ChannelOperator,
    l: usize,
    l_prime: usize,
    block: usize,
) -> Result<DMatrix<C64>> {
    let n = h.stream_len();
    if block == 0 {
        return Err(invalid("block size must be positive"));
    }
    let blocks = n / block;
    if l >= blocks || l_prime >= blocks {
        return Err(Error::OutOfRange(format!(
            "block ({l}, {l_prime}) outside a {blocks}-block stream"
        )));
    }
    Ok(DMatrix::from_fn(block, block, |i, k| {
        h.entry(l * block + i, l_prime * block + k)
    }))
}
