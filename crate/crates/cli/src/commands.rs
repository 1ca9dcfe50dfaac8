//! Subcommand implementations.

use crate::config::{DurationValue, GridValue, RunConfig};
use crate::parse::{parse_duration, parse_grid};
use crate::{BasisArgs, ChannelArgs, Cli, Command};
use prolink::channel::{ChannelPreset, ChannelProfile, ChannelRealization, ChannelSpec};
use prolink::dpss::{compute_dpss, dpss_limit_half, sinc_kernel, DpssParams};
use prolink::isimetrics::{
    half_shift_worst_case_scan, isi_bound, isi_energy_expected, isi_energy_realized, s2i_db, s2i_sweep, xcorr_ofdm_closed,
    xcorr_scfdma_closed, xcorr_tensor, DpssCache, IsiKernel, S2iMode, S2iSweep,
};
use prolink::linksim::{run_ser, table1_channel, FrameConfig};
use prolink::report::{self, num, CsvWriter, SerEntry};
use prolink::waveform::{build_basis, m_for_eta, with_prefix, PrecodingScheme, PrefixKind, WaveformBasis};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

type CliResult<T> = Result<T, String>;

pub enum Outcome {
    Ok,
    VerifyFailed(Vec<String>),
}

fn core<T>(r: prolink::Result<T>) -> CliResult<T> {
    r.map_err(|e| e.to_string())
}

fn pick<T>(flag: Option<T>, cfg: Option<T>, default: T) -> T {
    flag.or(cfg).unwrap_or(default)
}

fn require<T>(flag: Option<T>, cfg: Option<T>, name: &str) -> CliResult<T> {
    flag.or(cfg).ok_or_else(|| format!("missing required value `{name}` (flag or config)"))
}

fn grid(flag: Option<&String>, cfg: Option<&GridValue>, default: &str) -> CliResult<Vec<f64>> {
    match (flag, cfg) {
        (Some(f), _) => parse_grid(f),
        (None, Some(c)) => c.values(),
        (None, None) => parse_grid(default),
    }
}

fn scheme_list(flag: Option<&String>, cfg: Option<&Vec<String>>, default: &str) -> CliResult<Vec<PrecodingScheme>> {
    let names: Vec<String> = match (flag, cfg) {
        (Some(f), _) => f.split(',').map(|s| s.trim().to_string()).collect(),
        (None, Some(c)) => c.clone(),
        (None, None) => default.split(',').map(str::to_string).collect(),
    };
    names.iter().map(|s| core(s.parse())).collect()
}

/// Output directory, verification state and the run manifest.
struct Ctx {
    out: PathBuf,
    verify: bool,
    plot: bool,
    failures: Vec<String>,
    params: toml::Table,
    outputs: Vec<String>,
}

impl Ctx {
    fn write<F>(&mut self, name: &str, body: F) -> CliResult<()>
    where
        F: FnOnce(BufWriter<File>) -> prolink::Result<BufWriter<File>>,
    {
        let path = self.out.join(name);
        let file = File::create(&path).map_err(|e| format!("cannot create {}: {e}", path.display()))?;
        let mut w = core(body(BufWriter::new(file)))?;
        w.flush().map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn plot(&mut self, name: &str, points: &[(String, String, f64, f64)]) -> CliResult<()> {
        if self.plot {
            self.write(name, |w| report::write_plot_csv(w, points))?;
        }
        Ok(())
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if self.verify && !ok {
            self.failures.push(what());
        }
    }

    fn param(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    fn finish(mut self, command: &str) -> CliResult<Outcome> {
        let mut run = toml::Table::new();
        run.insert("command".into(), command.into());
        run.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        run.insert("verify".into(), self.verify.into());
        self.outputs.push("manifest.toml".into());
        run.insert(
            "outputs".into(),
            toml::Value::Array(self.outputs.iter().map(|s| s.clone().into()).collect()),
        );
        let mut doc = toml::Table::new();
        doc.insert("run".into(), run.into());
        doc.insert("params".into(), std::mem::take(&mut self.params).into());
        let text = toml::to_string(&doc).map_err(|e| e.to_string())?;
        let path = self.out.join("manifest.toml");
        std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        if self.failures.is_empty() {
            Ok(Outcome::Ok)
        } else {
            Ok(Outcome::VerifyFailed(self.failures))
        }
    }
}

pub fn run(cli: Cli) -> CliResult<Outcome> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(t) = cli.threads.or(cfg.threads) {
        if t == 0 {
            return Err("--threads must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    let out = pick(cli.out.clone(), cfg.out.clone(), PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    let mut ctx = Ctx {
        out,
        verify: cli.verify,
        plot: cli.plot_data,
        failures: Vec::new(),
        params: toml::Table::new(),
        outputs: Vec::new(),
    };
    let name = match &cli.command {
        Command::Dpss(a) => {
            cmd_dpss(&mut ctx, &cfg, a)?;
            "dpss"
        }
        Command::Basis(a) => {
            cmd_basis(&mut ctx, &cfg, a)?;
            "basis"
        }
        Command::Xcorr(a) => {
            cmd_xcorr(&mut ctx, &cfg, a)?;
            "xcorr"
        }
        Command::Ebct(a) => {
            cmd_ebct(&mut ctx, &cfg, a)?;
            "ebct"
        }
        Command::Bound(a) => {
            cmd_bound(&mut ctx, &cfg, a)?;
            "bound"
        }
        Command::S2i(a) => {
            cmd_s2i(&mut ctx, &cfg, a)?;
            "s2i"
        }
        Command::Ser(a) => {
            cmd_ser(&mut ctx, &cfg, a)?;
            "ser"
        }
        Command::ScanHalfshift(a) => {
            cmd_scan(&mut ctx, &cfg, a)?;
            "scan-halfshift"
        }
    };
    ctx.finish(name)
}

fn cmd_dpss(ctx: &mut Ctx, cfg: &RunConfig, a: &crate::DpssArgs) -> CliResult<()> {
    let n = require(a.n, cfg.n, "n")?;
    let w = require(a.w, cfg.w, "w")?;
    let k = pick(a.k, cfg.k, n);
    ctx.param("n", n as i64);
    ctx.param("w", w);
    ctx.param("k", k as i64);
    let set = core(DpssParams::new(n, w, k).and_then(|p| compute_dpss(&p)))?;
    ctx.write("dpss_sequences.csv", |o| report::write_dpss_sequences_csv(o, &set))?;
    ctx.write("dpss_eigenvalues.csv", |o| report::write_dpss_eigenvalues_csv(o, &set))?;

    if ctx.verify {
        let s = set.sequences();
        let gram = s.transpose() * s;
        let ortho = (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| (gram[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        ctx.check(ortho <= 1e-10, || format!("DPSS orthonormality error {ortho:e}"));
        let kern = sinc_kernel(n, w);
        let ks = &kern * s;
        let mut resid: f64 = 0.0;
        for (l, lam) in set.eigenvalues().iter().enumerate() {
            let r = (ks.column(l) - s.column(l) * *lam).amax();
            resid = resid.max(r);
        }
        ctx.check(resid <= 1e-8, || format!("DPSS eigen-residual {resid:e}"));
    }
    if ctx.plot {
        let half = (n as f64 - 1.0) / 2.0;
        let mut pts = Vec::new();
        for l in 0..k {
            for i in 0..n {
                pts.push(("dpss".into(), format!("s{l}"), i as f64 - half, set.sequences()[(i, l)]));
            }
        }
        for (l, lam) in set.eigenvalues().iter().enumerate() {
            pts.push(("dpss_eigenvalues".into(), "lambda".into(), l as f64, *lam));
        }
        ctx.plot("plot_dpss.csv", &pts)?;
    }
    Ok(())
}

fn resolve_basis(ctx: &mut Ctx, cfg: &RunConfig, a: &BasisArgs, default_scheme: &str) -> CliResult<WaveformBasis> {
    let scheme: PrecodingScheme =
        core(pick(a.scheme.clone(), cfg.scheme.clone(), default_scheme.to_string()).parse())?;
    let n = require(a.n, cfg.n, "n")?;
    if n < 2 {
        return Err("n must be at least 2".into());
    }
    let m = match (a.m.or(cfg.m), a.eta.or(cfg.eta)) {
        (Some(m), _) => m,
        (None, Some(eta)) => {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(format!("eta {eta} outside (0, 1]"));
            }
            m_for_eta(n, eta)
        }
        (None, None) => n,
    };
    ctx.param("scheme", scheme.label());
    ctx.param("n", n as i64);
    ctx.param("m", m as i64);
    let dpss = if scheme == PrecodingScheme::Dpss {
        Some(core(dpss_limit_half(n, n))?)
    } else {
        None
    };
    core(build_basis(scheme, n, m, dpss.as_ref()))
}

fn cmd_basis(ctx: &mut Ctx, cfg: &RunConfig, a: &BasisArgs) -> CliResult<()> {
    let basis = resolve_basis(ctx, cfg, a, "ofdm")?;
    ctx.write("basis.csv", |o| report::write_basis_csv(o, &basis))?;
    if ctx.verify {
        let o = basis.matrix();
        let g = o.adjoint() * o;
        let m = basis.m_active();
        let err = (0..m)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .map(|(i, j)| (g[(i, j)].re - if i == j { 1.0 } else { 0.0 }).abs().max(g[(i, j)].im.abs()))
            .fold(0.0, f64::max);
        ctx.check(err <= 1e-10, || format!("basis orthonormality error {err:e}"));
    }
    if ctx.plot {
        let o = basis.matrix();
        let pts: Vec<_> = (0..basis.m_active())
            .flat_map(|m| (0..basis.n_len()).map(move |n| (m, n)))
            .map(|(m, n)| ("basis_magnitude".to_string(), format!("m{m}"), n as f64, o[(n, m)].norm()))
            .collect();
        ctx.plot("plot_basis.csv", &pts)?;
    }
    Ok(())
}

fn cmd_xcorr(ctx: &mut Ctx, cfg: &RunConfig, a: &BasisArgs) -> CliResult<()> {
    let basis = resolve_basis(ctx, cfg, a, "ofdm")?;
    let tensor = xcorr_tensor(&basis);
    ctx.write("xcorr.csv", |o| report::write_xcorr_csv(o, &tensor))?;
    if ctx.verify {
        let (m, n) = (tensor.m(), tensor.n_len());
        let lag = tensor.max_lag();
        let lags = (2 * lag + 1) as usize;
        let total = m * m * lags;
        // Full check for small tensors, an even sample of about 200 entries otherwise.
        let stride = if total <= 50_000 { 1 } else { total / 200 };
        let mut worst: f64 = 0.0;
        for idx in (0..total).step_by(stride) {
            let (r, s, q) = (idx / (m * lags), (idx / lags) % m, (idx % lags) as i64 - lag);
            let direct = tensor.get(r, s, q);
            let reference = match tensor.scheme() {
                PrecodingScheme::Ofdm => core(xcorr_ofdm_closed(r, s, q, n, m))?,
                PrecodingScheme::Dft => core(xcorr_scfdma_closed(r, s, q, n, m))?,
                PrecodingScheme::Dpss => tensor.get(s, r, -q).conj(),
            };
            worst = worst.max((direct - reference).norm());
        }
        ctx.check(worst <= 1e-9, || format!("cross-correlation check error {worst:e}"));
    }
    Ok(())
}

fn cmd_ebct(ctx: &mut Ctx, cfg: &RunConfig, a: &BasisArgs) -> CliResult<()> {
    let basis = resolve_basis(ctx, cfg, a, "ofdm")?;
    let tensor = xcorr_tensor(&basis);
    let rows = core(report::ebct_table(&tensor, &DpssCache::new()))?;
    ctx.write("ebct.csv", |o| report::write_ebct_csv(o, &tensor, &rows))?;
    for row in &rows {
        ctx.check(row.bound >= row.ebct, || {
            format!("pair ({}, {}): bound {:e} below E_BCT {:e}", row.r, row.s, row.bound, row.ebct)
        });
    }
    if ctx.plot {
        let m = tensor.m();
        let mut pts = Vec::new();
        for row in &rows {
            let x = (row.r * m + row.s) as f64;
            pts.push(("ebct".to_string(), "ebct".to_string(), x, row.ebct));
            pts.push(("ebct".to_string(), "bound".to_string(), x, row.bound));
        }
        ctx.plot("plot_ebct.csv", &pts)?;
    }
    Ok(())
}

/// Channel spec, its label and the default prefix length.
fn resolve_channel(ctx: &mut Ctx, cfg: &RunConfig, a: &ChannelArgs) -> CliResult<(ChannelSpec, String, usize)> {
    let (spec, label, default_prefix) = match a.profile.clone().or(cfg.profile.clone()) {
        Some(path) => {
            if !path.exists() {
                return Err(format!("profile {} does not exist", path.display()));
            }
            let spec = core(ChannelProfile::load(&path).and_then(|p| p.to_spec()))?;
            ctx.param("profile", path.display().to_string());
            let longest = spec.paths().iter().map(|p| p.delay).fold(0.0, f64::max);
            (spec, "profile".to_string(), longest.ceil() as usize)
        }
        None => {
            let preset: ChannelPreset = core(pick(a.channel.clone(), cfg.channel.clone(), "mild".into()).parse())?;
            ctx.param("channel", preset.label());
            (preset.spec(), preset.label().to_string(), preset.prefix_len())
        }
    };
    let prefix = pick(a.prefix, cfg.prefix, default_prefix);
    ctx.param("prefix", prefix as i64);
    Ok((spec, label, prefix))
}

fn cmd_bound(ctx: &mut Ctx, cfg: &RunConfig, a: &crate::BoundArgs) -> CliResult<()> {
    let basis = resolve_basis(ctx, cfg, &a.basis, "ofdm")?;
    let (spec, _, prefix) = resolve_channel(ctx, cfg, &a.channel)?;
    let count = pick(a.seeds, cfg.seeds, 100);
    let first = pick(a.seed, cfg.seed, 0);
    let per_pair = a.per_pair || cfg.per_pair.unwrap_or(false);
    ctx.param("seeds", count as i64);
    ctx.param("seed", first as i64);
    if count == 0 {
        return Err("--seeds must be at least 1".into());
    }
    let report = core(isi_bound(&basis, &spec, prefix, &DpssCache::new(), per_pair))?;
    let prefixed = core(with_prefix(basis.clone(), prefix, PrefixKind::Zero))?;
    let kernel = IsiKernel::new(&prefixed);
    let (m, power) = (basis.m_active(), spec.total_power());
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let seed = first.wrapping_add(i as u64);
        let real = core(ChannelRealization::draw(spec.clone(), seed, prefixed.block_len(), 1))?;
        let e = core(isi_energy_realized(&kernel, &real))?;
        rows.push((seed, e));
    }
    let bound = report.total_bound;
    ctx.write("bound.csv", |o| {
        let mut w = CsvWriter::new(
            o,
            &["scheme", "N", "M", "prefix", "seed", "empirical", "bound", "s2i_db", "s2i_lower_bound_db", "holds"],
        )?;
        for (seed, e) in &rows {
            w.row(&[
                basis.scheme().label().to_string(),
                basis.n_len().to_string(),
                m.to_string(),
                prefix.to_string(),
                seed.to_string(),
                num(*e),
                num(bound),
                num(s2i_db(m, power, *e)),
                num(report.s2i_lower_bound_db(m, power)),
                (bound >= *e).to_string(),
            ])?;
        }
        w.finish()
    })?;
    if let Some(pairs) = &report.per_pair {
        ctx.write("bound_pairs.csv", |o| {
            let mut w = CsvWriter::new(o, &["r", "s", "bound"])?;
            for r in 0..m {
                for s in 0..m {
                    w.row(&[r.to_string(), s.to_string(), num(pairs[(r, s)])])?;
                }
            }
            w.finish()
        })?;
    }
    // The bound averages over path phases; single draws may exceed it.
    let expected = core(isi_energy_expected(&kernel, &spec))?;
    ctx.check(bound >= expected, || {
        format!("bound {bound:e} below the phase-averaged ISI energy {expected:e}")
    });
    if ctx.plot {
        let mut pts = Vec::new();
        for (seed, e) in &rows {
            pts.push(("bound".to_string(), "empirical".to_string(), *seed as f64, *e));
            pts.push(("bound".to_string(), "bound".to_string(), *seed as f64, bound));
        }
        ctx.plot("plot_bound.csv", &pts)?;
    }
    Ok(())
}

fn cmd_s2i(ctx: &mut Ctx, cfg: &RunConfig, a: &crate::S2iArgs) -> CliResult<()> {
    let (spec, label, prefix) = resolve_channel(ctx, cfg, &a.channel)?;
    let schemes = scheme_list(a.schemes.as_ref(), cfg.schemes.as_ref(), "ofdm,dft,dpss")?;
    let n = pick(a.n, cfg.n, 128);
    let etas = grid(a.etas.as_ref(), cfg.etas.as_ref(), "0.90:0.01:1.0")?;
    let kind: PrefixKind = core(pick(a.prefix_kind.clone(), cfg.prefix_kind.clone(), "zero".into()).parse())?;
    let mode_name = pick(a.mode.clone(), cfg.mode.clone(), "expected".into());
    let with_bound = a.bound || cfg.bound.unwrap_or(false);
    let mode = match mode_name.as_str() {
        "expected" => S2iMode::Expected,
        "realized" | "realised" => {
            let count = pick(a.seeds, cfg.seeds, 50);
            let first = pick(a.seed, cfg.seed, 0);
            ctx.param("seeds", count as i64);
            ctx.param("seed", first as i64);
            S2iMode::Realized {
                seeds: (0..count as u64).map(|i| first.wrapping_add(i)).collect(),
            }
        }
        other => return Err(format!("unknown mode `{other}` (expected or realized)")),
    };
    ctx.param("schemes", schemes.iter().map(|s| s.label()).collect::<Vec<_>>().join(","));
    ctx.param("n", n as i64);
    ctx.param("etas", toml::Value::Array(etas.iter().map(|e| (*e).into()).collect()));
    ctx.param("prefix_kind", kind.to_string());
    ctx.param("mode", mode_name.clone());
    ctx.param("bound", with_bound);
    let sweep = S2iSweep {
        schemes,
        etas,
        n_len: n,
        prefix_len: prefix,
        prefix_kind: kind,
        mode,
        with_bound,
    };
    let rows = core(s2i_sweep(&sweep, &spec, &DpssCache::new()))?;
    ctx.write("s2i.csv", |o| report::write_s2i_csv(o, &rows, &label))?;
    for row in &rows {
        ctx.check(!row.s2i_db.is_nan(), || format!("{} eta {}: S2I is NaN", row.scheme, row.eta));
        if let Some(lb) = row.s2i_lower_bound_db {
            ctx.check(lb <= row.s2i_db + 1e-9, || {
                format!("{} eta {}: lower bound {lb} above S2I {}", row.scheme, row.eta, row.s2i_db)
            });
        }
    }
    if ctx.plot {
        let mut pts = Vec::new();
        for row in &rows {
            pts.push(("s2i".to_string(), row.scheme.label().to_string(), 100.0 * row.eta, row.s2i_db));
            if let Some(lb) = row.s2i_lower_bound_db {
                pts.push(("s2i".to_string(), format!("{} bound", row.scheme), 100.0 * row.eta, lb));
            }
        }
        ctx.plot("plot_s2i.csv", &pts)?;
    }
    Ok(())
}

fn cmd_ser(ctx: &mut Ctx, cfg: &RunConfig, a: &crate::SerArgs) -> CliResult<()> {
    let preset = pick(a.preset.clone(), cfg.preset.clone(), "table1".into());
    if preset != "table1" {
        return Err(format!("unknown preset `{preset}` (only table1)"));
    }
    let ds = match (&a.delay_spread, &cfg.delay_spread) {
        (Some(f), _) => parse_duration(f)?,
        (None, Some(c)) => c.seconds()?,
        (None, None) => DurationValue::Nanos(1000.0).seconds()?,
    };
    let pdeltas = grid(a.pdelta.as_ref(), cfg.pdelta.as_ref(), "10")?;
    let schemes = scheme_list(a.schemes.as_ref(), cfg.schemes.as_ref(), "ofdm,dft,dpss")?;
    let etas = grid(a.etas.as_ref(), cfg.etas.as_ref(), "1.0,0.95")?;
    let snr = grid(a.snr.as_ref(), cfg.snr.as_ref(), "0:5:35")?;
    let trials = pick(a.trials, cfg.trials, 200);
    let seed = pick(a.seed, cfg.seed, 1);
    let kind: PrefixKind = core(pick(a.prefix_kind.clone(), cfg.prefix_kind.clone(), "cyclic".into()).parse())?;
    let profile = a.profile.clone().or(cfg.profile.clone());
    let spec = match &profile {
        Some(path) => {
            if !path.exists() {
                return Err(format!("profile {} does not exist", path.display()));
            }
            core(ChannelProfile::load(path).and_then(|p| p.to_spec()))?
        }
        None => core(table1_channel(ds))?,
    };
    let ds_ns = ds * 1e9;
    ctx.param("preset", preset);
    ctx.param("delay_spread_ns", ds_ns);
    ctx.param("pdelta", toml::Value::Array(pdeltas.iter().map(|v| (*v).into()).collect()));
    ctx.param("schemes", schemes.iter().map(|s| s.label()).collect::<Vec<_>>().join(","));
    ctx.param("etas", toml::Value::Array(etas.iter().map(|v| (*v).into()).collect()));
    ctx.param("snr_db", toml::Value::Array(snr.iter().map(|v| (*v).into()).collect()));
    ctx.param("trials", trials as i64);
    ctx.param("seed", seed as i64);
    ctx.param("prefix_kind", kind.to_string());
    if let Some(p) = &profile {
        ctx.param("profile", p.display().to_string());
    }

    let mut curves = Vec::new();
    for &pd in &pdeltas {
        for &scheme in &schemes {
            for &eta in &etas {
                let mut frame = FrameConfig::table1(scheme, eta, ds, pd);
                frame.prefix_kind = kind;
                let curve = core(run_ser(&frame, &spec, &snr, trials, seed))?;
                if curve.skipped_trials > 0 {
                    eprintln!(
                        "{scheme} eta {eta} pdelta {pd}: skipped {} singular trials",
                        curve.skipped_trials
                    );
                }
                curves.push(curve);
            }
        }
    }
    let entries: Vec<SerEntry<'_>> = curves
        .iter()
        .map(|curve| SerEntry { curve, delay_spread_ns: ds_ns })
        .collect();
    ctx.write("ser.csv", |o| report::write_ser_csv(o, &entries))?;
    for c in &curves {
        for p in &c.points {
            ctx.check((0.0..=1.0).contains(&p.ser) && p.errors <= p.total_symbols, || {
                format!("{} eta {} snr {}: SER {} out of range", c.scheme, c.eta, p.snr_db, p.ser)
            });
        }
    }
    if ctx.plot {
        let mut pts = Vec::new();
        for c in &curves {
            let fig = format!("ser_{}ns_pdelta{}", num(ds_ns), num(c.p_delta_db));
            for p in &c.points {
                pts.push((fig.clone(), format!("{} eta={}", c.scheme, num(c.eta)), p.snr_db, p.ser));
            }
        }
        ctx.plot("plot_ser.csv", &pts)?;
    }
    Ok(())
}

fn cmd_scan(ctx: &mut Ctx, cfg: &RunConfig, a: &crate::ScanArgs) -> CliResult<()> {
    let basis = resolve_basis(ctx, cfg, &a.basis, "ofdm")?;
    let taus = grid(a.taus.as_ref(), cfg.taus.as_ref(), "0.05:0.05:0.95")?;
    ctx.param("taus", toml::Value::Array(taus.iter().map(|v| (*v).into()).collect()));
    let tensor = xcorr_tensor(&basis);
    let m = tensor.m();
    let mut scans = Vec::with_capacity(m * m);
    for r in 0..m {
        for s in 0..m {
            scans.push((r, s, core(half_shift_worst_case_scan(&tensor, r, s, &taus))?));
        }
    }
    ctx.write("scan.csv", |o| report::write_scan_csv(o, &scans))?;
    let at_half = scans.iter().filter(|(_, _, sc)| sc.peak_at_half).count();
    eprintln!("maximum at tau = 0.5 for {at_half} of {} pairs", scans.len());
    for (r, s, sc) in &scans {
        if !sc.peak_at_half {
            eprintln!("pair ({r}, {s}): maximum at tau = {}", sc.argmax_tau);
        }
        ctx.check(sc.tails.iter().all(|t| t.is_finite() && *t >= 0.0), || {
            format!("pair ({r}, {s}): invalid tail energy")
        });
    }
    if ctx.plot {
        let mut pts = Vec::new();
        for (r, s, sc) in &scans {
            for (t, e) in sc.taus.iter().zip(&sc.tails) {
                pts.push(("halfshift".to_string(), format!("r{r}s{s}"), *t, *e));
            }
        }
        ctx.plot("plot_scan.csv", &pts)?;
    }
    Ok(())
}

