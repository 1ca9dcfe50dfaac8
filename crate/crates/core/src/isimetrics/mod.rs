//! Inter-symbol interference metrics: correlation tensors, band-limited
//! tail energies, ISI energies and their analytical upper bound.

mod bound;
mod isi;
mod tail;
mod xcorr;

pub use bound::{ebct_bound, isi_bound, BoundReport, DpssCache};
pub use isi::{
    isi_energy_blocks, isi_energy_expected, isi_energy_per_path, isi_energy_realized,
    isi_transfer, s2i_db, s2i_sweep, IsiKernel, IsiTransfer, S2iMode, S2iRow, S2iSweep,
};
pub use tail::{
    bandlimit_shift, ebct, ebct_truncated, half_shift_worst_case_scan, tail_energy,
    HalfShiftScan, SampledSeq, TailEstimate, DEFAULT_TRUNCATION_FACTOR,
};
pub use xcorr::{xcorr_ofdm_closed, xcorr_scfdma_closed, xcorr_tensor, CrossCorrTensor};
