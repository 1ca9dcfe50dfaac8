//! CSV emitters. Numbers use 12 significant digits, `.` as decimal
//! separator and LF line endings.

use crate::dpss::DpssSet;
use crate::error::Result;
use crate::isimetrics::{ebct, ebct_bound, CrossCorrTensor, DpssCache, HalfShiftScan, S2iRow};
use crate::linksim::SerCurve;
use crate::numeric::fmt_sig;
use crate::waveform::WaveformBasis;
use rayon::prelude::*;
use std::io::Write;

pub fn num(x: f64) -> String {
    fmt_sig(x, 12)
}

/// Minimal CSV writer: a mandatory header, then rows of preformatted fields.
pub struct CsvWriter<W: Write> {
    out: W,
    columns: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut out: W, header: &[&str]) -> Result<Self> {
        writeln!(out, "{}", header.join(","))?;
        Ok(Self {
            out,
            columns: header.len(),
        })
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> Result<()> {
        debug_assert_eq!(fields.len(), self.columns);
        let line: Vec<&str> = fields.iter().map(AsRef::as_ref).collect();
        writeln!(self.out, "{}", line.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EbctRow {
    pub r: usize,
    pub s: usize,
    pub ebct: f64,
    pub bound: f64,
}

/// E_BCT and its DPSS cap for every column pair, row-major in `(r, s)`.
pub fn ebct_table(tensor: &CrossCorrTensor, cache: &DpssCache) -> Result<Vec<EbctRow>> {
    let m = tensor.m();
    let set = cache.get(4 * tensor.n_len() + 1)?;
    (0..m * m)
        .into_par_iter()
        .map(|pair| {
            let (r, s) = (pair / m, pair % m);
            Ok(EbctRow {
                r,
                s,
                ebct: ebct(tensor, r, s)?,
                bound: ebct_bound(tensor, r, s, &set)?,
            })
        })
        .collect()
}

pub fn write_ebct_csv<W: Write>(out: W, tensor: &CrossCorrTensor, rows: &[EbctRow]) -> Result<W> {
    let mut w = CsvWriter::new(out, &["scheme", "N", "M", "r", "s", "ebct", "bound"])?;
    for row in rows {
        w.row(&[
            tensor.scheme().label().to_string(),
            tensor.n_len().to_string(),
            tensor.m().to_string(),
            row.r.to_string(),
            row.s.to_string(),
            num(row.ebct),
            num(row.bound),
        ])?;
    }
    w.finish()
}

pub fn write_s2i_csv<W: Write>(out: W, rows: &[S2iRow], tap_model: &str) -> Result<W> {
    let mut w = CsvWriter::new(
        out,
        &["scheme", "eta", "tap_model", "s2i_db", "s2i_lower_bound_db"],
    )?;
    for row in rows {
        w.row(&[
            row.scheme.label().to_string(),
            num(row.eta),
            tap_model.to_string(),
            num(row.s2i_db),
            row.s2i_lower_bound_db.map(num).unwrap_or_default(),
        ])?;
    }
    w.finish()
}

/// One SER curve and the delay spread (ns) it was simulated at.
pub struct SerEntry<'a> {
    pub curve: &'a SerCurve,
    pub delay_spread_ns: f64,
}

pub fn write_ser_csv<W: Write>(out: W, entries: &[SerEntry<'_>]) -> Result<W> {
    let mut w = CsvWriter::new(
        out,
        &[
            "scheme",
            "eta",
            "p_delta_db",
            "delay_spread_ns",
            "snr_db",
            "ser",
            "trials",
            "total_symbols",
        ],
    )?;
    for e in entries {
        for p in &e.curve.points {
            w.row(&[
                e.curve.scheme.label().to_string(),
                num(e.curve.eta),
                num(e.curve.p_delta_db),
                num(e.delay_spread_ns),
                num(p.snr_db),
                num(p.ser),
                p.trials.to_string(),
                p.total_symbols.to_string(),
            ])?;
        }
    }
    w.finish()
}

/// Sequences as columns `n, s0, s1, ...` with the centred index `n`.
pub fn write_dpss_sequences_csv<W: Write>(out: W, set: &DpssSet) -> Result<W> {
    let k = set.count();
    let mut header = vec!["n".to_string()];
    header.extend((0..k).map(|l| format!("s{l}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut w = CsvWriter::new(out, &header)?;
    let half = (set.n_len() as f64 - 1.0) / 2.0;
    for i in 0..set.n_len() {
        let mut fields = vec![num(i as f64 - half)];
        fields.extend((0..k).map(|l| num(set.sequences()[(i, l)])));
        w.row(&fields)?;
    }
    w.finish()
}

pub fn write_dpss_eigenvalues_csv<W: Write>(out: W, set: &DpssSet) -> Result<W> {
    let mut w = CsvWriter::new(out, &["order", "eigenvalue"])?;
    for (l, lam) in set.eigenvalues().iter().enumerate() {
        w.row(&[l.to_string(), num(*lam)])?;
    }
    w.finish()
}

/// Long format `n, m, re, im` of the effective basis.
pub fn write_basis_csv<W: Write>(out: W, basis: &WaveformBasis) -> Result<W> {
    let mut w = CsvWriter::new(out, &["n", "m", "re", "im"])?;
    let o = basis.matrix();
    for m in 0..basis.m_active() {
        for n in 0..basis.n_len() {
            let z = o[(n, m)];
            w.row(&[n.to_string(), m.to_string(), num(z.re), num(z.im)])?;
        }
    }
    w.finish()
}

pub fn write_xcorr_csv<W: Write>(out: W, tensor: &CrossCorrTensor) -> Result<W> {
    let mut w = CsvWriter::new(out, &["r", "s", "q", "re", "im"])?;
    let lag = tensor.max_lag();
    for r in 0..tensor.m() {
        for s in 0..tensor.m() {
            for q in -lag..=lag {
                let z = tensor.get(r, s, q);
                w.row(&[r.to_string(), s.to_string(), q.to_string(), num(z.re), num(z.im)])?;
            }
        }
    }
    w.finish()
}

pub fn write_scan_csv<W: Write>(out: W, scans: &[(usize, usize, HalfShiftScan)]) -> Result<W> {
    let mut w = CsvWriter::new(out, &["r", "s", "tau", "tail_energy", "argmax_tau", "peak_at_half"])?;
    for (r, s, scan) in scans {
        for (tau, tail) in scan.taus.iter().zip(&scan.tails) {
            w.row(&[
                r.to_string(),
                s.to_string(),
                num(*tau),
                num(*tail),
                num(scan.argmax_tau),
                scan.peak_at_half.to_string(),
            ])?;
        }
    }
    w.finish()
}

/// Long-format plot table `figure, series, x, y`.
pub fn write_plot_csv<W: Write>(out: W, points: &[(String, String, f64, f64)]) -> Result<W> {
    let mut w = CsvWriter::new(out, &["figure", "series", "x", "y"])?;
    for (fig, series, x, y) in points {
        w.row(&[fig.clone(), series.clone(), num(*x), num(*y)])?;
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isimetrics::xcorr_tensor;
    use crate::waveform::{build_basis, PrecodingScheme};

    #[test]
    fn ebct_csv_layout() {
        let t = xcorr_tensor(&build_basis(PrecodingScheme::Ofdm, 9, 9, None).unwrap());
        let rows = ebct_table(&t, &DpssCache::new()).unwrap();
        assert_eq!(rows.len(), 81);
        let bytes = write_ebct_csv(Vec::new(), &t, &rows).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "scheme,N,M,r,s,ebct,bound");
        assert_eq!(lines.len(), 82);
        assert!(lines[1].starts_with("ofdm,9,9,0,0,"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn s2i_csv_layout() {
        let rows = vec![S2iRow {
            scheme: PrecodingScheme::Dpss,
            eta: 0.95,
            m_active: 122,
            isi_energy: 1e-7,
            s2i_db: 89.0153,
            s2i_lower_bound_db: None,
        }];
        let text = String::from_utf8(write_s2i_csv(Vec::new(), &rows, "fractional").unwrap()).unwrap();
        assert_eq!(
            text,
            "scheme,eta,tap_model,s2i_db,s2i_lower_bound_db\ndpss,0.95,fractional,89.0153,\n"
        );
    }
}
