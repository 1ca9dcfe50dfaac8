use crate::error::{invalid, Result};
use crate::numeric::{sin_pi, C64};
use crate::waveform::{centred, edge_split, PrecodingScheme, WaveformBasis};
use rayon::prelude::*;
use std::f64::consts::PI;

/// `C_rs[q] = sum_n conj(o_r[n]) o_s[n - q]` for every column pair and every
/// lag `q` in `-(N-1)..=(N-1)`.
#[derive(Debug, Clone)]
pub struct CrossCorrTensor {
    m: usize,
    n_len: usize,
    scheme: PrecodingScheme,
    // [(r * m + s) * (2N - 1) + q + N - 1]
    values: Vec<C64>,
}

impl CrossCorrTensor {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_len(&self) -> usize {
        self.n_len
    }

    pub fn scheme(&self) -> PrecodingScheme {
        self.scheme
    }

    /// Number of lags, `2N - 1`.
    pub fn lag_count(&self) -> usize {
        2 * self.n_len - 1
    }

    pub fn max_lag(&self) -> i64 {
        self.n_len as i64 - 1
    }

    /// `C_rs[q]`, zero outside the lag range.
    pub fn get(&self, r: usize, s: usize, q: i64) -> C64 {
        if q.abs() > self.max_lag() {
            return C64::new(0.0, 0.0);
        }
        self.seq(r, s)[(q + self.max_lag()) as usize]
    }

    /// The lag sequence of pair `(r, s)`, first entry at `q = -(N-1)`.
    pub fn seq(&self, r: usize, s: usize) -> &[C64] {
        let len = self.lag_count();
        let start = (r * self.m + s) * len;
        &self.values[start..start + len]
    }
}

pub fn xcorr_tensor(basis: &WaveformBasis) -> CrossCorrTensor {
    let o = basis.matrix();
    let n = basis.n_len();
    let m = basis.m_active();
    let len = 2 * n - 1;
    let mut values = vec![C64::new(0.0, 0.0); m * m * len];
    values
        .par_chunks_mut(len)
        .enumerate()
        .for_each(|(pair, out)| {
            let (r, s) = (pair / m, pair % m);
            let col_r = o.column(r);
            let col_s = o.column(s);
            for (slot, value) in out.iter_mut().enumerate() {
                let q = slot as i64 - (n as i64 - 1);
                let lo = q.max(0) as usize;
                let hi = (n as i64 + q.min(0)) as usize;
                let mut acc = C64::new(0.0, 0.0);
                for k in lo..hi {
                    acc += col_r[k].conj() * col_s[(k as i64 - q) as usize];
                }
                *value = acc;
            }
        });
    CrossCorrTensor {
        m,
        n_len: n,
        scheme: basis.scheme(),
        values,
    }
}

fn check_lag(q: i64, n_len: usize) -> Result<()> {
    if q.unsigned_abs() as usize >= n_len {
        return Err(invalid(format!("lag {q} outside +-{}", n_len - 1)));
    }
    Ok(())
}

// sin(pi d (N - q) / N) / sin(pi d / N) with its limit N - q at d = 0.
fn dirichlet(d: f64, n: f64, q: f64) -> f64 {
    let den = sin_pi(d / n);
    if den == 0.0 {
        // d is a multiple of N: ratio tends to (N - q) times a sign
        let k = (d / n).round();
        let sign = if ((k * q) as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        sign * (n - q)
    } else {
        sin_pi(d * (n - q) / n) / den
    }
}

/// Closed form of the OFDM correlation between active subcarriers `r` and
/// `s`:
/// `C_rs[q] = exp(-j pi (f_r + f_s) q / N) sin(pi (f_r - f_s)(N - q)/N) / (N sin(pi (f_r - f_s)/N))`
/// for `q >= 0`, and `conj(C_sr[-q])` for negative lags.
pub fn xcorr_ofdm_closed(r: usize, s: usize, q: i64, n_len: usize, m_active: usize) -> Result<C64> {
    check_lag(q, n_len)?;
    if r >= m_active || s >= m_active || m_active > n_len {
        return Err(invalid("subcarrier index outside the active set"));
    }
    if q < 0 {
        return Ok(xcorr_ofdm_closed(s, r, -q, n_len, m_active)?.conj());
    }
    let (lower, _) = edge_split(n_len, m_active);
    let fr = centred(lower + r, n_len);
    let fs = centred(lower + s, n_len);
    let n = n_len as f64;
    let qf = q as f64;
    let phase = C64::from_polar(1.0, -PI * (fr + fs) * qf / n);
    Ok(phase * dirichlet(fr - fs, n, qf) / n)
}

/// Closed form of the DFT-spread (SC-FDMA) correlation, a double sum over
/// the active frequencies `l', k'`:
/// `(1 / (eta N^2)) sum exp(j 2 pi l' mu_r / M) exp(-j 2 pi k' mu_s / M)
///  exp(-j pi q (l' + k') / N) sin(pi (N - q)(l' - k') / N) / sin(pi (l' - k') / N)`
/// for `q >= 0`, with `mu_m = m - (M - 1) / 2`.
pub fn xcorr_scfdma_closed(
    r: usize,
    s: usize,
    q: i64,
    n_len: usize,
    m_active: usize,
) -> Result<C64> {
    check_lag(q, n_len)?;
    if r >= m_active || s >= m_active || m_active > n_len {
        return Err(invalid("symbol index outside the active set"));
    }
    if q < 0 {
        return Ok(xcorr_scfdma_closed(s, r, -q, n_len, m_active)?.conj());
    }
    let (lower, _) = edge_split(n_len, m_active);
    let n = n_len as f64;
    let m = m_active as f64;
    let qf = q as f64;
    let mu_r = centred(r, m_active);
    let mu_s = centred(s, m_active);
    let freqs: Vec<f64> = (0..m_active).map(|j| centred(lower + j, n_len)).collect();
    let mut acc = C64::new(0.0, 0.0);
    for &l in &freqs {
        for &k in &freqs {
            let phase = 2.0 * PI * l * mu_r / m - 2.0 * PI * k * mu_s / m - PI * qf * (l + k) / n;
            acc += C64::from_polar(dirichlet(l - k, n, qf), phase);
        }
    }
    Ok(acc / (m * n))
}
