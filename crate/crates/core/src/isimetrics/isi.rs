use super::bound::{isi_bound, DpssCache};
use crate::channel::{block_submatrix, ChannelOperator, ChannelRealization, ChannelSpec};
use crate::dpss::dpss_limit_half;
use crate::error::{invalid, Error, Result};
use crate::numeric::{basel_tail, is_integer, linear_to_db, sin_pi, sinc, C64};
use crate::waveform::{build_basis, m_for_eta, with_prefix, PrecodingScheme, PrefixKind, PrefixedBasis};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Delays closer than this to an integer are treated as integers.
const INTEGER_TOL: f64 = 1e-7;
/// Blocks summed explicitly on each side in [`isi_energy_realized`].
const REALIZED_BLOCKS: i64 = 256;

/// `beta_{l,l'} = O_r^H H_{l,l'} O_t`, the map from the symbols of block `l'`
/// to the output of block `l`.
#[derive(Debug, Clone)]
pub struct IsiTransfer {
    pub beta: DMatrix<C64>,
    pub from_block: usize,
    pub to_block: usize,
}

pub fn isi_transfer(
    basis_tx: &PrefixedBasis,
    basis_rx: &PrefixedBasis,
    h: &ChannelOperator,
    l: usize,
    l_prime: usize,
) -> Result<IsiTransfer> {
    let block = basis_tx.block_len();
    if basis_rx.block_len() != block || h.realization().block_len() != block {
        return Err(Error::DimensionMismatch(format!(
            "tx block {block}, rx block {}, channel block {}",
            basis_rx.block_len(),
            h.realization().block_len()
        )));
    }
    let hb = block_submatrix(h, l, l_prime, block)?;
    Ok(IsiTransfer {
        beta: basis_rx.o_r().adjoint() * hb * basis_tx.o_t(),
        from_block: l_prime,
        to_block: l,
    })
}

/// Waveform part of the ISI energy.
///
/// With `P_r = O_r O_r^H`, `P_t = O_t O_t^H` (both `B x B`, `B = N + g`),
/// `K[u, v] = sum_{a, d} P_r[d, a] P_t[a - u, d - v]` for
/// `u, v in -(B-1)..=(B-1)`, and a channel with continuous response `h`
/// produces `E = sum_{l' != 0} sum_{u,v} K[u,v] h(u - l'B) conj(h(v - l'B))`.
#[derive(Debug, Clone)]
pub struct IsiKernel {
    block_len: usize,
    m_active: usize,
    values: DMatrix<C64>,
    alt_quad: f64,
}

impl IsiKernel {
    pub fn new(basis: &PrefixedBasis) -> Self {
        Self::from_matrices(basis.o_t(), basis.o_r())
    }

    pub fn from_matrices(o_t: &DMatrix<C64>, o_r: &DMatrix<C64>) -> Self {
        let b = o_t.nrows();
        assert_eq!(o_r.nrows(), b, "tx and rx blocks differ");
        let first_nonzero = |o: &DMatrix<C64>| {
            (0..b)
                .find(|&i| o.row(i).iter().any(|z| *z != C64::new(0.0, 0.0)))
                .unwrap_or(b)
        };
        let r0 = first_nonzero(o_r);
        let t0 = first_nonzero(o_t);
        let p_r = o_r * o_r.adjoint();
        let p_t_tr = (o_t * o_t.adjoint()).transpose();
        let span = 2 * b - 1;
        let bi = b as i64;
        let rows: Vec<Vec<C64>> = (0..span)
            .into_par_iter()
            .map(|iu| {
                let u = iu as i64 - (bi - 1);
                let mut row = vec![C64::new(0.0, 0.0); span];
                let a_lo = (r0 as i64).max(u + t0 as i64);
                let a_hi = bi.min(u + bi);
                for (iv, out) in row.iter_mut().enumerate() {
                    let v = iv as i64 - (bi - 1);
                    let d_lo = (r0 as i64).max(v + t0 as i64);
                    let d_hi = bi.min(v + bi);
                    if d_lo >= d_hi {
                        continue;
                    }
                    let mut acc = C64::new(0.0, 0.0);
                    for a in a_lo..a_hi {
                        let pr = &p_r.column(a as usize);
                        let pt = &p_t_tr.column((a - u) as usize);
                        let pr = &pr.as_slice()[d_lo as usize..d_hi as usize];
                        let pt = &pt.as_slice()[(d_lo - v) as usize..(d_hi - v) as usize];
                        for (x, y) in pr.iter().zip(pt) {
                            acc += x * y;
                        }
                    }
                    *out = acc;
                }
                row
            })
            .collect();
        let values = DMatrix::from_fn(span, span, |i, j| rows[i][j]);
        let alt: Vec<C64> = (0..span)
            .map(|i| {
                let u = i as i64 - (bi - 1);
                C64::new(if u % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
            })
            .collect();
        let alt_quad = quad(&values, &alt);
        Self {
            block_len: b,
            m_active: o_t.ncols(),
            values,
            alt_quad,
        }
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn m_active(&self) -> usize {
        self.m_active
    }

    /// Entry `K[u, v]`.
    pub fn get(&self, u: i64, v: i64) -> C64 {
        let off = self.block_len as i64 - 1;
        self.values[((u + off) as usize, (v + off) as usize)]
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.values
    }

    fn offset(&self) -> i64 {
        self.block_len as i64 - 1
    }
}

// Re sum_{u,v} K[u,v] t[u] conj(t[v])
fn quad(k: &DMatrix<C64>, t: &[C64]) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for (v, tv) in t.iter().enumerate() {
        if *tv == C64::new(0.0, 0.0) {
            continue;
        }
        let col = k.column(v);
        let mut inner = C64::new(0.0, 0.0);
        for (u, tu) in t.iter().enumerate() {
            inner += col[u] * tu;
        }
        acc += inner * tv.conj();
    }
    acc.re
}

/// Expected ISI energy of a single unit-power path at delay `tau`, summed
/// over every interfering block in closed form.
///
/// With `a = u - tau`, `b = v - tau` the block sum reduces to the lattice
/// sums `sum_{l != 0} 1 / ((a - lB)(b - lB))`, which have cotangent closed
/// forms.
pub fn isi_energy_per_path(kernel: &IsiKernel, tau: f64) -> f64 {
    let off = kernel.offset();
    let b = kernel.block_len as f64;
    if is_integer(tau, INTEGER_TOL) {
        let t = tau.round() as i64;
        let mut e = 0.0;
        let lmax = 2 * (off + t.abs()) / kernel.block_len as i64 + 2;
        for l in -lmax..=lmax {
            if l == 0 {
                continue;
            }
            let u = l * kernel.block_len as i64 + t;
            if u.abs() <= off {
                e += kernel.get(u, u).re;
            }
        }
        return e;
    }
    let span = (2 * off + 1) as usize;
    let a: Vec<f64> = (0..span).map(|i| (i as i64 - off) as f64 - tau).collect();
    let w = PI / b;
    let cot: Vec<f64> = a.iter().map(|x| w / (w * x).tan()).collect();
    let diag: Vec<f64> = a.iter().map(|x| w * w / (w * x).sin().powi(2)).collect();
    let sign = |i: usize| if (i as i64 - off) % 2 == 0 { 1.0 } else { -1.0 };
    let total: f64 = (0..span)
        .into_par_iter()
        .map(|j| {
            let col = kernel.values.column(j);
            let mut acc = 0.0;
            for i in 0..span {
                let s = if i == j {
                    diag[i] - 1.0 / (a[i] * a[i])
                } else {
                    (cot[i] - cot[j]) / (a[j] - a[i]) - 1.0 / (a[i] * a[j])
                };
                acc += col[i].re * s * sign(i) * sign(j);
            }
            acc
        })
        .sum();
    sin_pi(tau).powi(2) / (PI * PI) * total
}

/// Ensemble-average ISI energy `sum_p sigma_p^2 E(tau_p)` for random-phase
/// gains.
pub fn isi_energy_expected(kernel: &IsiKernel, spec: &ChannelSpec) -> Result<f64> {
    require_static(spec)?;
    Ok(spec
        .paths()
        .par_iter()
        .map(|p| p.power() * isi_energy_per_path(kernel, p.delay))
        .sum())
}

fn require_static(spec: &ChannelSpec) -> Result<()> {
    if spec.is_quasi_static() {
        Ok(())
    } else {
        Err(invalid("ISI energy is defined for channels without Doppler"))
    }
}

/// ISI energy of one drawn channel, `sum_{l' != 0} ||beta_{0,l'}||_F^2`.
///
/// Blocks with `|l'| <= 256` are summed exactly; the remainder uses the
/// far-field form `h(x) ~ (-1)^x sum_p g_p sin(pi tau_p) / (pi x)`.
pub fn isi_energy_realized(kernel: &IsiKernel, real: &ChannelRealization) -> Result<f64> {
    require_static(real.spec())?;
    let taps: Vec<(C64, f64)> = real.taps().collect();
    let off = kernel.offset();
    let span = (2 * off + 1) as usize;
    let bl = kernel.block_len as i64;
    let near: f64 = (1..=REALIZED_BLOCKS)
        .into_par_iter()
        .flat_map(|l| [l, -l])
        .map(|l| {
            let t: Vec<C64> = (0..span)
                .map(|i| {
                    let x = (i as i64 - off - l * bl) as f64;
                    taps.iter().map(|(g, tau)| g * sinc(x - tau)).sum()
                })
                .collect();
            quad(&kernel.values, &t)
        })
        .sum();
    let phi: C64 = taps.iter().map(|(g, tau)| g * sin_pi(*tau)).sum();
    let far = phi.norm_sqr() * kernel.alt_quad / (PI * PI * (bl * bl) as f64)
        * 2.0
        * basel_tail(REALIZED_BLOCKS as usize);
    Ok(near + far)
}

/// ISI energy by explicit block matrices on the realization's own stream:
/// the middle block is the victim and every other block interferes.
pub fn isi_energy_blocks(basis: &PrefixedBasis, real: &ChannelRealization) -> Result<f64> {
    require_static(real.spec())?;
    let b = basis.block_len();
    if real.block_len() != b {
        return Err(Error::DimensionMismatch(format!(
            "channel block {} vs basis block {b}",
            real.block_len()
        )));
    }
    let victim = real.n_blocks() / 2;
    let o_r_h = basis.o_r().adjoint();
    let mut e = 0.0;
    for src in 0..real.n_blocks() {
        if src == victim {
            continue;
        }
        let hb = DMatrix::from_fn(b, b, |i, k| real.entry(victim * b + i, src * b + k));
        let beta = &o_r_h * hb * basis.o_t();
        e += beta.norm_squared();
    }
    Ok(e)
}

/// `10 log10(M P / E)`: per-component signal energy over ISI energy, where
/// `P` is the total channel power.
pub fn s2i_db(m_active: usize, channel_power: f64, isi_energy: f64) -> f64 {
    linear_to_db(m_active as f64 * channel_power / isi_energy)
}

#[derive(Debug, Clone, PartialEq)]
pub enum S2iMode {
    /// Closed-form average over random path phases.
    Expected,
    /// Mean ISI energy over channel draws with these seeds.
    Realized { seeds: Vec<u64> },
}

#[derive(Debug, Clone)]
pub struct S2iSweep {
    pub schemes: Vec<PrecodingScheme>,
    pub etas: Vec<f64>,
    pub n_len: usize,
    pub prefix_len: usize,
    pub prefix_kind: PrefixKind,
    pub mode: S2iMode,
    pub with_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct S2iRow {
    pub scheme: PrecodingScheme,
    pub eta: f64,
    pub m_active: usize,
    pub isi_energy: f64,
    pub s2i_db: f64,
    pub s2i_lower_bound_db: Option<f64>,
}

/// S2I for every (scheme, eta) pair, in the order given.
pub fn s2i_sweep(sweep: &S2iSweep, spec: &ChannelSpec, cache: &DpssCache) -> Result<Vec<S2iRow>> {
    require_static(spec)?;
    if let S2iMode::Realized { seeds } = &sweep.mode {
        if seeds.is_empty() {
            return Err(invalid("realized mode needs at least one seed"));
        }
    }
    let n = sweep.n_len;
    let dpss = if sweep.schemes.contains(&PrecodingScheme::Dpss) {
        Some(dpss_limit_half(n, n)?)
    } else {
        None
    };
    let power = spec.total_power();
    let mut rows = Vec::new();
    for &scheme in &sweep.schemes {
        for &eta in &sweep.etas {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(invalid(format!("eta {eta} outside (0, 1]")));
            }
            let m = m_for_eta(n, eta);
            let base = build_basis(scheme, n, m, dpss.as_ref())?;
            let prefixed = with_prefix(base.clone(), sweep.prefix_len, sweep.prefix_kind)?;
            let kernel = IsiKernel::new(&prefixed);
            let energy = match &sweep.mode {
                S2iMode::Expected => isi_energy_expected(&kernel, spec)?,
                S2iMode::Realized { seeds } => {
                    let total = seeds
                        .iter()
                        .map(|&seed| {
                            let real = ChannelRealization::draw(
                                spec.clone(),
                                seed,
                                prefixed.block_len(),
                                1,
                            )?;
                            isi_energy_realized(&kernel, &real)
                        })
                        .sum::<Result<f64>>()?;
                    total / seeds.len() as f64
                }
            };
            let bound = if sweep.with_bound {
                let report = isi_bound(&base, spec, sweep.prefix_len, cache, false)?;
                Some(s2i_db(m, power, report.total_bound))
            } else {
                None
            };
            rows.push(S2iRow {
                scheme,
                eta,
                m_active: m,
                isi_energy: energy,
                s2i_db: s2i_db(m, power, energy),
                s2i_lower_bound_db: bound,
            });
        }
    }
    Ok(rows)
}
