//! Effective signalling bases `O = F S` for the three precoding schemes.
//!
//! Column `m` of `O` is the time-domain waveform carrying data symbol `m`.
//! All bases are built on the symmetric grids
//!
//! * time: `t_k = k - (N - 1) / 2`,
//! * frequency: `f_j = j - (N - 1) / 2` (cycles per `N` samples),
//!
//! which are half-integer for even `N`. The half-bin offset keeps the grid
//! symmetric, so no subcarrier sits on the Nyquist frequency.

use crate::dpss::DpssSet;
use crate::error::{invalid, Result};
use crate::numeric::C64;
use nalgebra::DMatrix;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrecodingScheme {
    /// No precoding: the basis is a block of centred DFT columns.
    Ofdm,
    /// DFT spreading (SC-FDMA): time-shifted Dirichlet pulses.
    Dft,
    /// Discrete prolate spheroidal sequences at `W = 0.5-`.
    Dpss,
}

impl PrecodingScheme {
    pub const ALL: [PrecodingScheme; 3] = [Self::Ofdm, Self::Dft, Self::Dpss];

    pub fn label(self) -> &'static str {
        match self {
            Self::Ofdm => "ofdm",
            Self::Dft => "dft",
            Self::Dpss => "dpss",
        }
    }
}

impl fmt::Display for PrecodingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PrecodingScheme {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ofdm" | "none" | "fd" => Ok(Self::Ofdm),
            "dft" | "scfdma" | "sc-fdma" | "td" => Ok(Self::Dft),
            "dpss" | "ps" | "pd" => Ok(Self::Dpss),
            other => Err(invalid(format!("unknown precoding scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixKind {
    Zero,
    Cyclic,
}

impl FromStr for PrefixKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" | "zp" => Ok(Self::Zero),
            "cyclic" | "cp" => Ok(Self::Cyclic),
            other => Err(invalid(format!("unknown prefix kind '{other}'"))),
        }
    }
}

impl fmt::Display for PrefixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Zero => "zero",
            Self::Cyclic => "cyclic",
        })
    }
}

/// An `N x M` matrix with orthonormal columns.
#[derive(Debug, Clone)]
pub struct WaveformBasis {
    n_len: usize,
    m_active: usize,
    scheme: PrecodingScheme,
    o: DMatrix<C64>,
}

impl WaveformBasis {
    pub fn n_len(&self) -> usize {
        self.n_len
    }

    pub fn m_active(&self) -> usize {
        self.m_active
    }

    pub fn scheme(&self) -> PrecodingScheme {
        self.scheme
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.o
    }

    /// Resource utilisation `M / N`.
    pub fn eta(&self) -> f64 {
        self.m_active as f64 / self.n_len as f64
    }
}

/// Centred coordinate of index `k` on a grid of `len` points.
pub fn centred(k: usize, len: usize) -> f64 {
    k as f64 - (len as f64 - 1.0) / 2.0
}

/// Number of components removed from the lower and the upper edge.
/// An odd surplus goes to the upper edge.
pub fn edge_split(n_len: usize, m_active: usize) -> (usize, usize) {
    let dropped = n_len - m_active;
    let lower = dropped / 2;
    (lower, dropped - lower)
}

/// Number of active components for utilisation `eta`.
pub fn m_for_eta(n_len: usize, eta: f64) -> usize {
    ((eta * n_len as f64).round() as usize).clamp(1, n_len)
}

/// Indices of the components switched off when only `m_active` of `n_len`
/// carry data, in ascending order.
///
/// OFDM and DFT precoding lose their outermost subcarriers (symmetrically,
/// one extra from the top when the count is odd); DPSS precoding loses its
/// highest orders.
pub fn edge_truncation_order(
    scheme: PrecodingScheme,
    n_len: usize,
    m_active: usize,
) -> Vec<usize> {
    let m_active = m_active.min(n_len);
    match scheme {
        PrecodingScheme::Ofdm | PrecodingScheme::Dft => {
            let (lower, upper) = edge_split(n_len, m_active);
            (0..lower).chain(n_len - upper..n_len).collect()
        }
        PrecodingScheme::Dpss => (m_active..n_len).collect(),
    }
}

/// Builds the effective basis for `scheme` with `m_active` of `n_len`
/// components in use. DPSS precoding needs a set of length `n_len` with at
/// least `m_active` sequences (normally [`crate::dpss::dpss_limit_half`]).
pub fn build_basis(
    scheme: PrecodingScheme,
    n_len: usize,
    m_active: usize,
    dpss_source: Option<&DpssSet>,
) -> Result<WaveformBasis> {
    if n_len == 0 || m_active == 0 {
        return Err(invalid("basis dimensions must be positive"));
    }
    if m_active > n_len {
        return Err(invalid(format!(
            "{m_active} active components exceed length {n_len}"
        )));
    }
    let mut o = match scheme {
        PrecodingScheme::Ofdm => subcarrier_block(n_len, m_active),
        PrecodingScheme::Dft => {
            let carriers = subcarrier_block(n_len, m_active);
            let (lower, _) = edge_split(n_len, m_active);
            let scale = 1.0 / (m_active as f64).sqrt();
            let spread = DMatrix::from_fn(m_active, m_active, |j, m| {
                let f = centred(lower + j, n_len);
                let mu = centred(m, m_active);
                C64::from_polar(scale, -2.0 * PI * f * mu / m_active as f64)
            });
            carriers * spread
        }
        PrecodingScheme::Dpss => {
            let set = dpss_source
                .ok_or_else(|| invalid("DPSS precoding needs a DPSS set"))?;
            if set.n_len() != n_len || set.count() < m_active {
                return Err(invalid(format!(
                    "DPSS set is {}x{}, need {n_len}x{m_active} or more columns",
                    set.n_len(),
                    set.count()
                )));
            }
            DMatrix::from_fn(n_len, m_active, |k, m| {
                C64::new(set.sequences()[(k, m)], 0.0)
            })
        }
    };
    for mut col in o.column_iter_mut() {
        let norm = col.norm();
        col /= C64::new(norm, 0.0);
    }
    Ok(WaveformBasis {
        n_len,
        m_active,
        scheme,
        o,
    })
}

fn subcarrier_block(n_len: usize, m_active: usize) -> DMatrix<C64> {
    let (lower, _) = edge_split(n_len, m_active);
    let scale = 1.0 / (n_len as f64).sqrt();
    DMatrix::from_fn(n_len, m_active, |k, m| {
        let t = centred(k, n_len);
        let f = centred(lower + m, n_len);
        C64::from_polar(scale, 2.0 * PI * f * t / n_len as f64)
    })
}

/// Transmit and receive matrices for a symbol with a `g`-sample prefix.
///
/// The receive matrix always carries a zero block: the prefix samples are
/// discarded at the receiver.
#[derive(Debug, Clone)]
pub struct PrefixedBasis {
    base: WaveformBasis,
    prefix_len: usize,
    prefix_kind: PrefixKind,
    o_t: DMatrix<C64>,
    o_r: DMatrix<C64>,
}

impl PrefixedBasis {
    pub fn base(&self) -> &WaveformBasis {
        &self.base
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix_len
    }

    pub fn prefix_kind(&self) -> PrefixKind {
        self.prefix_kind
    }

    /// Samples per symbol slot, `N + g`.
    pub fn block_len(&self) -> usize {
        self.base.n_len + self.prefix_len
    }

    pub fn o_t(&self) -> &DMatrix<C64> {
        &self.o_t
    }

    pub fn o_r(&self) -> &DMatrix<C64> {
        &self.o_r
    }
}

pub fn with_prefix(
    base: WaveformBasis,
    prefix_len: usize,
    prefix_kind: PrefixKind,
) -> Result<PrefixedBasis> {
    let n = base.n_len;
    if prefix_len >= n {
        return Err(invalid(format!(
            "prefix of {prefix_len} samples must be shorter than the symbol ({n})"
        )));
    }
    let m = base.m_active;
    let g = prefix_len;
    let mut o_t = DMatrix::zeros(n + g, m);
    let mut o_r = DMatrix::zeros(n + g, m);
    o_t.rows_mut(g, n).copy_from(&base.o);
    o_r.rows_mut(g, n).copy_from(&base.o);
    if prefix_kind == PrefixKind::Cyclic && g > 0 {
        o_t.rows_mut(0, g).copy_from(&base.o.rows(n - g, g));
    }
    Ok(PrefixedBasis {
        base,
        prefix_len,
        prefix_kind,
        o_t,
        o_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpss::dpss_limit_half;

    fn gram_error(o: &DMatrix<C64>) -> f64 {
        let g = o.adjoint() * o;
        (g - DMatrix::identity(o.ncols(), o.ncols())).map(|z| z.norm()).max()
    }

    #[test]
    fn dft_at_full_utilisation_is_identity() {
        for n in [8, 9] {
            let b = build_basis(PrecodingScheme::Dft, n, n, None).unwrap();
            let err = (b.matrix() - DMatrix::<C64>::identity(n, n))
                .map(|z| z.norm())
                .max();
            assert!(err < 1e-12, "n = {n}: {err}");
        }
    }

    #[test]
    fn ofdm_is_orthonormal() {
        let b = build_basis(PrecodingScheme::Ofdm, 9, 9, None).unwrap();
        assert!(gram_error(b.matrix()) < 1e-12);
        assert_eq!(b.eta(), 1.0);
    }

    #[test]
    fn dft_matches_dirichlet_closed_form() {
        // Oracle: sqrt(eta) sin(M pi x / N) / (M sin(pi x / N)), x = t - mu / eta.
        let (n, m) = (9usize, 7usize);
        let eta = m as f64 / n as f64;
        let b = build_basis(PrecodingScheme::Dft, n, m, None).unwrap();
        for col in 0..m {
            let mu = centred(col, m);
            for k in 0..n {
                let x = centred(k, n) - mu / eta;
                let s = (PI * x / n as f64).sin();
                let expect = if s.abs() < 1e-14 {
                    eta.sqrt()
                } else {
                    eta.sqrt() * (m as f64 * PI * x / n as f64).sin() / (m as f64 * s)
                };
                let got = b.matrix()[(k, col)];
                assert!((got - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn requires_dpss_source() {
        assert!(build_basis(PrecodingScheme::Dpss, 9, 7, None).is_err());
        let set = dpss_limit_half(9, 6).unwrap();
        assert!(build_basis(PrecodingScheme::Dpss, 9, 7, Some(&set)).is_err());
        assert!(build_basis(PrecodingScheme::Ofdm, 9, 10, None).is_err());
    }

    #[test]
    fn dpss_basis_is_real_prefix_of_set() {
        let set = dpss_limit_half(9, 9).unwrap();
        let b = build_basis(PrecodingScheme::Dpss, 9, 7, Some(&set)).unwrap();
        for k in 0..9 {
            for m in 0..7 {
                assert_eq!(b.matrix()[(k, m)].im, 0.0);
                assert!((b.matrix()[(k, m)].re - set.sequences()[(k, m)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn prefix_blocks() {
        let base = build_basis(PrecodingScheme::Ofdm, 9, 7, None).unwrap();
        let none = with_prefix(base.clone(), 0, PrefixKind::Cyclic).unwrap();
        assert_eq!(none.o_t(), base.matrix());
        assert_eq!(none.o_r(), base.matrix());

        let cp = with_prefix(base.clone(), 2, PrefixKind::Cyclic).unwrap();
        assert_eq!(cp.o_t().rows(0, 2), base.matrix().rows(7, 2));
        assert!(cp.o_r().rows(0, 2).iter().all(|z| *z == C64::new(0.0, 0.0)));

        let zp = with_prefix(base.clone(), 2, PrefixKind::Zero).unwrap();
        assert!(zp.o_t().rows(0, 2).iter().all(|z| *z == C64::new(0.0, 0.0)));
        assert_eq!(zp.block_len(), 11);

        assert!(with_prefix(base, 9, PrefixKind::Zero).is_err());
    }

    #[test]
    fn truncation_order() {
        assert_eq!(edge_truncation_order(PrecodingScheme::Ofdm, 9, 7), vec![0, 8]);
        assert_eq!(edge_truncation_order(PrecodingScheme::Dft, 9, 6), vec![0, 7, 8]);
        assert_eq!(edge_truncation_order(PrecodingScheme::Dpss, 9, 7), vec![7, 8]);
        for s in PrecodingScheme::ALL {
            assert!(edge_truncation_order(s, 9, 9).is_empty());
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in PrecodingScheme::ALL {
            assert_eq!(s.label().parse::<PrecodingScheme>().unwrap(), s);
        }
        assert_eq!("SC-FDMA".parse::<PrecodingScheme>().unwrap(), PrecodingScheme::Dft);
        assert!("qam".parse::<PrecodingScheme>().is_err());
    }
}
