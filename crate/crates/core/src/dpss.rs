//! Discrete prolate spheroidal sequences.
//!
//! The DPSS of length `N` and half-bandwidth `W` are the eigenvectors of the
//! `N x N` sinc kernel `B[m, n] = sin(2 pi W (m - n)) / (pi (m - n))`. That
//! kernel has eigenvalues packed exponentially close to 0 and 1, so the
//! vectors are taken instead from the symmetric tridiagonal matrix that
//! commutes with it (same eigenvectors, well separated eigenvalues). The
//! concentrations `lambda_l` are then recovered as Rayleigh quotients of the
//! sinc kernel itself.
//!
//! Sequences are stored 0-based; entry `k` corresponds to the centred index
//! `k - (N - 1) / 2`.

use crate::error::{invalid, Result};
use crate::tridiag::symmetric_tridiagonal_eigen;
use crate::numeric::sin_pi;
use nalgebra::DMatrix;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpssParams {
    n_len: usize,
    half_bandwidth: f64,
    count: usize,
}

impl DpssParams {
    pub fn new(n_len: usize, half_bandwidth: f64, count: usize) -> Result<Self> {
        if n_len == 0 {
            return Err(invalid("DPSS length must be positive"));
        }
        if !(half_bandwidth > 0.0 && half_bandwidth <= 0.5) {
            return Err(invalid(format!(
                "half-bandwidth {half_bandwidth} outside (0, 0.5]"
            )));
        }
        if count == 0 || count > n_len {
            return Err(invalid(format!(
                "sequence count {count} outside 1..={n_len}"
            )));
        }
        Ok(Self {
            n_len,
            half_bandwidth,
            count,
        })
    }

    pub fn n_len(&self) -> usize {
        self.n_len
    }

    pub fn half_bandwidth(&self) -> f64 {
        self.half_bandwidth
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// A family of DPSS ordered by decreasing concentration.
#[derive(Debug, Clone)]
pub struct DpssSet {
    params: DpssParams,
    sequences: DMatrix<f64>,
    eigenvalues: Vec<f64>,
}

impl DpssSet {
    pub fn params(&self) -> &DpssParams {
        &self.params
    }

    /// `n_len x count` matrix, column `l` is the order-`l` sequence.
    pub fn sequences(&self) -> &DMatrix<f64> {
        &self.sequences
    }

    /// In-band energy concentrations, one per sequence.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n_len(&self) -> usize {
        self.params.n_len
    }

    pub fn count(&self) -> usize {
        self.params.count
    }

    /// Sample of sequence `order` at centred index `n` (odd lengths only),
    /// zero outside the support.
    pub fn centred(&self, order: usize, n: i64) -> f64 {
        let half = (self.params.n_len as i64 - 1) / 2;
        let k = n + half;
        if k < 0 || k >= self.params.n_len as i64 {
            0.0
        } else {
            self.sequences[(k as usize, order)]
        }
    }
}

/// Dense `n_len x n_len` sinc kernel with half-bandwidth `w`.
pub fn sinc_kernel(n_len: usize, w: f64) -> DMatrix<f64> {
    let taps = kernel_taps(n_len, w);
    DMatrix::from_fn(n_len, n_len, |i, j| taps[i.abs_diff(j)])
}

fn kernel_taps(n_len: usize, w: f64) -> Vec<f64> {
    (0..n_len)
        .map(|d| {
            if d == 0 {
                2.0 * w
            } else {
                sin_pi(2.0 * w * d as f64) / (PI * d as f64)
            }
        })
        .collect()
}

/// Computes the `count` most concentrated DPSS for `(n_len, half_bandwidth)`.
pub fn compute_dpss(params: &DpssParams) -> Result<DpssSet> {
    let n = params.n_len;
    let cos_w = (2.0 * PI * params.half_bandwidth).cos();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let c = (n as f64 - 1.0 - 2.0 * i as f64) / 2.0;
            c * c * cos_w
        })
        .collect();
    let off: Vec<f64> = (1..n)
        .map(|i| i as f64 * (n - i) as f64 / 2.0)
        .collect();
    let (_, vectors) = symmetric_tridiagonal_eigen(&diag, &off)?;

    // Largest tridiagonal eigenvalue pairs with the most concentrated sequence.
    let mut sequences = DMatrix::zeros(n, params.count);
    for l in 0..params.count {
        let mut col = vectors.column(n - 1 - l).into_owned();
        col /= col.norm();
        fix_sign(col.as_mut_slice());
        sequences.set_column(l, &col);
    }

    let taps = kernel_taps(n, params.half_bandwidth);
    let eigenvalues = (0..params.count)
        .map(|l| {
            let p = sequences.column(l);
            let mut q = 0.0;
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += taps[i.abs_diff(j)] * p[j];
                }
                q += p[i] * acc;
            }
            if params.half_bandwidth == 0.5 {
                1.0
            } else {
                q.clamp(0.0, 1.0)
            }
        })
        .collect();

    Ok(DpssSet {
        params: *params,
        sequences,
        eigenvalues,
    })
}

/// The `W -> 0.5` limit of the DPSS family, used as the DPSS precoder.
///
/// The tridiagonal matrix is evaluated exactly at `W = 0.5`; the sinc kernel
/// degenerates to the identity there, so every reported concentration is 1
/// and the ordering comes from the tridiagonal spectrum alone.
pub fn dpss_limit_half(n_len: usize, count: usize) -> Result<DpssSet> {
    compute_dpss(&DpssParams::new(n_len, 0.5, count)?)
}

// Largest-magnitude entry made non-negative; near-ties go to the lowest index.
fn fix_sign(col: &mut [f64]) {
    let peak = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = peak * 1e-9;
    let pivot = col
        .iter()
        .position(|x| x.abs() >= peak - tol)
        .unwrap_or(0);
    if col[pivot] < 0.0 {
        col.iter_mut().for_each(|x| *x = -*x);
    }
}
