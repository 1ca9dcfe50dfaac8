use super::isi::IsiKernel;
use super::xcorr::{xcorr_tensor, CrossCorrTensor};
use crate::channel::ChannelSpec;
use crate::dpss::{compute_dpss, DpssParams, DpssSet};
use crate::error::{invalid, Result};
use crate::numeric::{linear_to_db, C64};
use crate::waveform::WaveformBasis;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

/// Full DPSS sets with half-bandwidth 1/4, keyed by length.
#[derive(Debug, Default)]
pub struct DpssCache {
    sets: Mutex<HashMap<usize, Arc<DpssSet>>>,
}

impl DpssCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, n_len: usize) -> Result<Arc<DpssSet>> {
        if let Some(set) = self.sets.lock().expect("cache lock").get(&n_len) {
            return Ok(set.clone());
        }
        let set = Arc::new(compute_dpss(&DpssParams::new(n_len, 0.25, n_len)?)?);
        Ok(self
            .sets
            .lock()
            .expect("cache lock")
            .entry(n_len)
            .or_insert(set)
            .clone())
    }
}

// 4 sum_l lambda_l (1 - lambda_l) |sum_q C[q] s_l[2q]|^2 for a centred lag
// sequence and a centred DPSS set.
fn dpss_tail_bound(seq: &[C64], set: &DpssSet) -> Result<f64> {
    let max_lag = (seq.len() / 2) as i64;
    let centre = (set.n_len() / 2) as i64;
    if set.n_len().is_multiple_of(2) || 2 * max_lag > centre {
        return Err(invalid(format!(
            "DPSS length {} cannot hold lags up to {max_lag}",
            set.n_len()
        )));
    }
    let seqs = set.sequences();
    let mut total = 0.0;
    for (l, &lam) in set.eigenvalues().iter().enumerate() {
        let weight = lam * (1.0 - lam);
        if weight == 0.0 {
            continue;
        }
        let col = seqs.column(l);
        let c: C64 = seq
            .iter()
            .enumerate()
            .map(|(i, v)| v * col[(centre + 2 * (i as i64 - max_lag)) as usize])
            .sum();
        total += weight * c.norm_sqr();
    }
    Ok(4.0 * total)
}

/// Finite-sum cap on the band-limited correlation tail energy of pair
/// `(r, s)`, using the DPSS set `(1/4, 4N + 1)`.
pub fn ebct_bound(tensor: &CrossCorrTensor, r: usize, s: usize, dpss: &DpssSet) -> Result<f64> {
    if r >= tensor.m() || s >= tensor.m() {
        return Err(invalid(format!("pair ({r}, {s}) outside a {}-column tensor", tensor.m())));
    }
    dpss_tail_bound(tensor.seq(r, s), dpss)
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    /// Power-weighted bound per column pair, when requested.
    pub per_pair: Option<DMatrix<f64>>,
    /// Bound on the unit-power ISI energy of each path.
    pub per_path: Vec<f64>,
    pub total_bound: f64,
    pub empirical: Option<f64>,
    pub s2i_db: Option<f64>,
}

impl BoundReport {
    /// Records a measured ISI energy; returns whether the bound holds.
    pub fn attach_empirical(&mut self, energy: f64, m_active: usize, channel_power: f64) -> bool {
        self.empirical = Some(energy);
        self.s2i_db = Some(linear_to_db(m_active as f64 * channel_power / energy));
        self.total_bound >= energy
    }

    /// S2I implied by the bound.
    pub fn s2i_lower_bound_db(&self, m_active: usize, channel_power: f64) -> f64 {
        linear_to_db(m_active as f64 * channel_power / self.total_bound)
    }
}

/// Upper bound on the phase-averaged ISI energy of `spec` for the basis with a `prefix_len`
/// guard: `sum_p sigma_p^2 4 sum_l lambda_l (1 - lambda_l) sum_{r,s} |c_{rs}(l)|^2`
/// with DPSS sets `(1/4, 4 N_p + 1)`, `N_p = N + g - floor(tau_p)`.
pub fn isi_bound(
    basis: &WaveformBasis,
    spec: &ChannelSpec,
    prefix_len: usize,
    cache: &DpssCache,
    per_pair: bool,
) -> Result<BoundReport> {
    let n = basis.n_len();
    let mut np_of_path = Vec::with_capacity(spec.paths().len());
    for p in spec.paths() {
        let np = (n + prefix_len) as i64 - p.delay.floor() as i64;
        if np < n as i64 - 1 {
            return Err(invalid(format!(
                "path delay {} exceeds the prefix by more than one sample",
                p.delay
            )));
        }
        np_of_path.push(np as usize);
    }
    let mut sizes = np_of_path.clone();
    sizes.sort_unstable();
    sizes.dedup();

    // sum_{r,s} |c_rs(l)|^2 = s~^T Re(K0) s~ with K0 the prefix-free kernel.
    let k0 = IsiKernel::from_matrices(basis.matrix(), basis.matrix());
    let gram = k0.matrix().map(|z| z.re);
    let span = gram.nrows() as i64;
    let max_lag = span / 2;
    let unit: HashMap<usize, f64> = sizes
        .par_iter()
        .map(|&np| {
            let set = cache.get(4 * np + 1)?;
            let centre = (set.n_len() / 2) as i64;
            let seqs = set.sequences();
            let mut total = 0.0;
            for (l, &lam) in set.eigenvalues().iter().enumerate() {
                let weight = lam * (1.0 - lam);
                if weight == 0.0 {
                    continue;
                }
                let col = seqs.column(l);
                let sub = nalgebra::DVector::from_fn(span as usize, |i, _| {
                    col[(centre + 2 * (i as i64 - max_lag)) as usize]
                });
                total += weight * sub.dot(&(&gram * &sub));
            }
            Ok((np, 4.0 * total))
        })
        .collect::<Result<_>>()?;

    let per_path: Vec<f64> = np_of_path.iter().map(|np| unit[np]).collect();
    let total_bound = spec
        .paths()
        .iter()
        .zip(&per_path)
        .map(|(p, b)| p.power() * b)
        .sum::<f64>()
        .max(0.0);

    let per_pair = if per_pair {
        let tensor = xcorr_tensor(basis);
        let m = basis.m_active();
        let sets: HashMap<usize, Arc<DpssSet>> = sizes
            .iter()
            .map(|&np| Ok((np, cache.get(4 * np + 1)?)))
            .collect::<Result<_>>()?;
        let mut weights: BTreeMap<usize, f64> = BTreeMap::new();
        for (p, np) in spec.paths().iter().zip(&np_of_path) {
            *weights.entry(*np).or_default() += p.power();
        }
        let cells: Vec<f64> = (0..m * m)
            .into_par_iter()
            .map(|pair| {
                let seq = tensor.seq(pair / m, pair % m);
                weights
                    .iter()
                    .map(|(np, w)| Ok(w * dpss_tail_bound(seq, &sets[np])?))
                    .sum::<Result<f64>>()
            })
            .collect::<Result<_>>()?;
        Some(DMatrix::from_row_slice(m, m, &cells))
    } else {
        None
    };

    Ok(BoundReport {
        per_pair,
        per_path,
        total_bound,
        empirical: None,
        s2i_db: None,
    })
}
