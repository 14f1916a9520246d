use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use mle_core::game::PackRegistry;
use mle_core::pack::parse_content_pack;
use mle_core::store::{export_dataset, replay_session, EventStore, ExportFormat};

use crate::CliResult;

#[derive(Parser, Debug)]
#[command(name = "mle-store", about = "Offline access to the event log")]
pub struct Args {
    /// Directory holding `events.log`.
    #[arg(long, env = "MLE_DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write the anonymised dataset.
    Export {
        #[arg(long, default_value = "csv")]
        format: String,
        /// Output file; `export.csv` or `export.jsonl` when omitted, `-` for stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay every session and report the ones that do not reproduce.
    Verify {
        /// Extra pack files the sessions may reference.
        #[arg(long = "pack")]
        packs: Vec<PathBuf>,
    },
}

pub fn run(args: &Args, out: &mut dyn Write) -> CliResult {
    let store = EventStore::open(&args.data_dir)?;
    match &args.command {
        Command::Export { format, out: target } => {
            let format: ExportFormat = format.parse()?;
            let bytes = export_dataset(&store, format);
            match target {
                Some(path) if path.as_os_str() == "-" => out.write_all(&bytes)?,
                _ => {
                    let path = target.clone().unwrap_or_else(|| PathBuf::from(format.file_name()));
                    std::fs::write(&path, &bytes).map_err(|e| format!("{}: {e}", path.display()))?;
                    writeln!(out, "{} ({} bytes)", path.display(), bytes.len())?;
                }
            }
        }
        Command::Verify { packs } => {
            let mut registry = PackRegistry::with_default();
            for path in packs {
                let source = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                registry.insert(parse_content_pack(&source)?)?;
            }
            let ids = store.session_ids();
            let mut failed = 0;
            for id in &ids {
                if let Err(e) = replay_session(&store, id, &registry) {
                    failed += 1;
                    writeln!(out, "{id}: {e}")?;
                }
            }
            writeln!(out, "{} events, {} sessions, {failed} failed", store.len(), ids.len())?;
            if failed > 0 {
                return Err(format!("{failed} session(s) do not replay").into());
            }
        }
    }
    Ok(())
}
