//! Command-line interface. Exit status: 0 success, 1 invalid input,
//! 2 filesystem error, 64 usage error.

use std::ffi::OsString;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use recapit_core::model::SignalKind;

use crate::error::Error;
use crate::pipeline::{self, SegmentOverrides};
use crate::project::load_project;
use crate::providers::ProviderConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "recapit",
    version,
    about = "Analyze recordings of collaborative design workshops"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Signal {
    Attention,
    Activity,
}

impl From<Signal> for SignalKind {
    fn from(s: Signal) -> Self {
        match s {
            Signal::Attention => SignalKind::Attention,
            Signal::Activity => SignalKind::Activity,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a manifest and the files it references.
    Validate { project: PathBuf },
    /// Parse all sources and write synchronized streams and series.
    Ingest { project: PathBuf },
    /// Detect topic segments and title them.
    Segment {
        project: PathBuf,
        /// Penalty per change point.
        #[arg(long)]
        beta: Option<f64>,
        /// Series to segment.
        #[arg(long, value_enum)]
        signal: Option<Signal>,
    },
    /// Compute card statistics and per-segment heatmaps.
    Stats { project: PathBuf },
    /// Write the HTML report of marked cards.
    Export {
        project: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the project over HTTP.
    Serve {
        project: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// 0 picks a free port; the bound address is printed on startup.
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Validate { project } => {
            let p = load_project(&project)?;
            println!(
                "ok: '{}' with {} participants, {} AOIs, {} sources",
                p.id,
                p.participants.len(),
                p.aois.len(),
                p.sources.len()
            );
        }
        Command::Ingest { project } => {
            let s = pipeline::ingest(&project)?;
            println!(
                "ingested {} utterances, {} fixations from {} participants, {} frames, {} note events",
                s.utterances, s.fixations, s.gaze_participants, s.frames, s.note_events
            );
        }
        Command::Segment { project, beta, signal } => {
            let overrides = SegmentOverrides {
                beta,
                signal: signal.map(Into::into),
            };
            let segments = pipeline::segment(&project, overrides, &ProviderConfig::from_env())?;
            println!("{} segments", segments.len());
            for s in &segments {
                println!("{}  {:>8.1}–{:<8.1} {}", s.id, s.span.start, s.span.end, s.title);
            }
        }
        Command::Stats { project } => {
            let stats = pipeline::stats(&project)?;
            println!("statistics for {} cards", stats.len());
        }
        Command::Export { project, out } => {
            let dest = pipeline::export(&project, out.as_deref())?;
            println!("wrote {}", dest.display());
        }
        Command::Serve { project, host, port } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::io(&project, e))?;
            rt.block_on(crate::service::serve(&project, SocketAddr::new(host, port)))?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
