use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use mle_core::pack::{default_covid_pack, parse_content_pack, validate_pack, ContentPack};
use mle_core::qr::{decode_payload, encode_payload, render_print_sheets};

use crate::CliResult;

#[derive(Parser, Debug)]
#[command(name = "mle-pack", about = "Content packs, card payloads and print sheets")]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and validate a pack file; exits non-zero on any violation.
    Validate { pack: PathBuf },
    /// Print the shipped default pack as JSON.
    Default,
    /// Render card fronts, card backs, boards and avatar cards as SVG.
    Sheets {
        /// Pack file; the default pack when omitted.
        #[arg(long)]
        pack: Option<PathBuf>,
        out_dir: PathBuf,
    },
    /// The QR payload printed on a card back.
    Encode { deck: String, card: String },
    /// Check a scanned payload and show the card it names.
    Decode { payload: String },
}

fn load(path: &Path) -> Result<ContentPack, Box<dyn std::error::Error>> {
    let source = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(parse_content_pack(&source)?)
}

pub fn run(args: &Args, out: &mut dyn Write) -> CliResult {
    match &args.command {
        Command::Validate { pack } => {
            let content = load(pack)?;
            let report = validate_pack(&content);
            if !report.is_valid() {
                for v in &report.violations {
                    writeln!(out, "{}: {}", v.code, v.message)?;
                }
                return Err(format!("{} violation(s) in {}", report.violations.len(), pack.display()).into());
            }
            let cards = content.cards().count();
            writeln!(
                out,
                "{} {}: valid ({} decks, {cards} cards, {} statements, {} questions)",
                content.pack_id,
                content.version,
                content.decks.len(),
                content.statements.len(),
                content.questions.len()
            )?;
        }
        Command::Default => writeln!(out, "{}", default_covid_pack().to_json_pretty())?,
        Command::Sheets { pack, out_dir } => {
            let content = match pack {
                Some(path) => load(path)?,
                None => default_covid_pack(),
            };
            let set = render_print_sheets(&content)?;
            let files = set.write_to_dir(out_dir).map_err(|e| format!("{}: {e}", out_dir.display()))?;
            for file in &files {
                writeln!(out, "{}", file.display())?;
            }
        }
        Command::Encode { deck, card } => writeln!(out, "{}", encode_payload(deck, card)?)?,
        Command::Decode { payload } => {
            let decoded = decode_payload(payload)?;
            writeln!(out, "deck {} card {}", decoded.deck_id, decoded.card_id)?;
        }
    }
    Ok(())
}
