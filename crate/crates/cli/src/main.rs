//! `prolink`: command-line front end for the DPSS precoding toolkit.

mod commands;
mod config;
mod parse;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "prolink", version, about = "DPSS-precoded OFDM: ISI analysis and link simulation")]
pub struct Cli {
    /// Flat TOML file with default values for any flag (flags win).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Check internal invariants and exit with code 3 if any fails.
    #[arg(long, global = true)]
    pub verify: bool,
    /// Also write long-format plot tables.
    #[arg(long, global = true)]
    pub plot_data: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Slepian sequences and concentration eigenvalues.
    Dpss(DpssArgs),
    /// Effective waveform basis O = F S.
    Basis(BasisArgs),
    /// Pairwise cross-correlation tensor of a basis.
    Xcorr(BasisArgs),
    /// Band-limited correlation tail energy per column pair, with its cap.
    Ebct(BasisArgs),
    /// ISI energy bound against realised ISI on seeded channel draws.
    Bound(BoundArgs),
    /// S2I sweep over schemes and resource utilisation.
    S2i(S2iArgs),
    /// Multi-user symbol error rate simulation.
    Ser(SerArgs),
    /// Tail energy of the shifted correlation over a grid of shifts.
    ScanHalfshift(ScanArgs),
}

#[derive(Debug, Args)]
pub struct DpssArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Half-bandwidth in (0, 0.5].
    #[arg(long)]
    pub w: Option<f64>,
    /// Number of sequences.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    /// ofdm, dft or dpss.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Active columns; defaults to round(eta N).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    /// Built-in channel: mild, severe or integer.
    #[arg(long)]
    pub channel: Option<String>,
    /// TOML channel profile; overrides --channel.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Prefix length in samples; defaults to 16 for the built-in channels and
    /// to the longest path delay, rounded up, for a profile.
    #[arg(long)]
    pub prefix: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub basis: BasisArgs,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Number of channel draws.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// First seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the per-pair bound matrix.
    #[arg(long)]
    pub per_pair: bool,
}

#[derive(Debug, Args)]
pub struct S2iArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Comma list of schemes.
    #[arg(long)]
    pub schemes: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// start:step:stop or comma list.
    #[arg(long)]
    pub etas: Option<String>,
    /// zero or cyclic.
    #[arg(long)]
    pub prefix_kind: Option<String>,
    /// expected (phase average) or realized (seeded draws).
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Add the analytic lower bound column.
    #[arg(long)]
    pub bound: bool,
}

#[derive(Debug, Args)]
pub struct SerArgs {
    /// Frame and channel preset; only table1 exists.
    #[arg(long)]
    pub preset: Option<String>,
    /// RMS delay spread, e.g. 200ns or 1us.
    #[arg(long)]
    pub delay_spread: Option<String>,
    /// Power offset of the neighbouring users in dB; grid allowed.
    #[arg(long)]
    pub pdelta: Option<String>,
    #[arg(long)]
    pub schemes: Option<String>,
    #[arg(long)]
    pub etas: Option<String>,
    /// SNR grid in dB.
    #[arg(long)]
    pub snr: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub prefix_kind: Option<String>,
    /// TOML channel profile replacing the preset channel.
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub basis: BasisArgs,
    /// Shift grid in [0, 1].
    #[arg(long)]
    pub taus: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(commands::Outcome::Ok) => ExitCode::SUCCESS,
        Ok(commands::Outcome::VerifyFailed(failures)) => {
            for f in failures {
                eprintln!("verify: {f}");
            }
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
