use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use mle_core::analytics::{
    crosstab, detect_format, distribution, likert_from_dataset, randomize_questionnaire, read_dataset, render_report,
    sus_from_dataset, AnalyticsError, Demographic, InstrumentId, ReportOptions,
};
use mle_core::store::{DatasetRow, ExportFormat, PHASE_QUESTIONNAIRE};

use crate::CliResult;

#[derive(Parser, Debug)]
#[command(name = "mle-analytics", about = "Questionnaire scores and answer distributions from an exported dataset")]
pub struct Args {
    /// `export.csv` or `export.jsonl`.
    pub dataset: PathBuf,
    #[command(subcommand)]
    pub command: Option<Command>,
    /// Count negative items at face value instead of reflecting them.
    #[arg(long, global = true)]
    pub no_reflect: bool,
    /// Seed for the questionnaire order printed by `items`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Mean SUS score and per-participant scores.
    Sus,
    /// Likert percentage of one instrument.
    Likert { instrument: String },
    /// Answer distribution of one prompt.
    Dist { prompt: String },
    /// Answer distribution of one prompt per demographic group.
    Crosstab { prompt: String, demographic: String },
    /// Charts and CSV tables for every prompt.
    Report {
        out_dir: PathBuf,
        /// Extra cross-tabulation as `prompt:demographic`; repeatable. Without
        /// any, every prompt is cross-tabulated by gender and student status.
        #[arg(long = "crosstab", value_name = "PROMPT:DEMOGRAPHIC")]
        crosstabs: Vec<String>,
    },
    /// The questionnaire items in the order a given seed produces.
    Items,
}

fn load(path: &PathBuf) -> Result<Vec<DatasetRow>, Box<dyn std::error::Error>> {
    let format = detect_format(path).unwrap_or(ExportFormat::Csv);
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(read_dataset(&bytes, format)?)
}

fn prompts(data: &[DatasetRow]) -> Vec<&str> {
    let mut ids: Vec<&str> = Vec::new();
    for row in data.iter().filter(|r| r.phase != PHASE_QUESTIONNAIRE) {
        if !ids.contains(&row.prompt_id.as_str()) {
            ids.push(&row.prompt_id);
        }
    }
    ids
}

fn scores(data: &[DatasetRow], reflect: bool, out: &mut dyn Write) -> CliResult {
    match sus_from_dataset(data) {
        Ok(sus) => writeln!(out, "SUS        {:>6}  (n={})", sus.mean.to_string(), sus.participants)?,
        Err(AnalyticsError::NoResponses(_)) => writeln!(out, "SUS        no complete responses")?,
        Err(e) => return Err(e.into()),
    }
    for instrument in [InstrumentId::Approach, InstrumentId::Empathy] {
        match likert_from_dataset(data, instrument, reflect) {
            Ok(pct) => writeln!(out, "{:<10} {:>6}%", instrument.as_str(), pct.to_string())?,
            Err(AnalyticsError::NoResponses(_)) => writeln!(out, "{:<10} no responses", instrument.as_str())?,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

pub fn run(args: &Args, out: &mut dyn Write) -> CliResult {
    if let Some(Command::Items) = args.command {
        for (i, item) in randomize_questionnaire(&InstrumentId::ALL, args.seed).into_iter().enumerate() {
            writeln!(out, "{:>2}. {:<10} {}", i + 1, item.id, item.text)?;
        }
        return Ok(());
    }
    let data = load(&args.dataset)?;
    let reflect = !args.no_reflect;
    match &args.command {
        None => {
            let sessions: std::collections::BTreeSet<&str> = data.iter().map(|r| r.session_id.as_str()).collect();
            writeln!(out, "{} rows from {} sessions", data.len(), sessions.len())?;
            if data.iter().any(|r| r.phase == PHASE_QUESTIONNAIRE) {
                scores(&data, reflect, out)?;
            }
            for prompt in prompts(&data) {
                writeln!(out)?;
                write!(out, "{}", distribution(&data, prompt)?)?;
            }
        }
        Some(Command::Sus) => {
            if data.is_empty() {
                return Err(AnalyticsError::EmptyDataset.into());
            }
            let sus = sus_from_dataset(&data)?;
            for (session, score) in &sus.scores {
                writeln!(out, "{session}  {score}")?;
            }
            writeln!(out, "mean SUS {} (n={})", sus.mean, sus.participants)?;
        }
        Some(Command::Likert { instrument }) => {
            let id =
                InstrumentId::parse(instrument).ok_or_else(|| AnalyticsError::UnknownInstrument(instrument.clone()))?;
            writeln!(out, "{} {}%", id.as_str(), likert_from_dataset(&data, id, reflect)?)?;
        }
        Some(Command::Dist { prompt }) => write!(out, "{}", distribution(&data, prompt)?)?,
        Some(Command::Crosstab { prompt, demographic }) => {
            let demographic = Demographic::parse(demographic)?;
            for (i, table) in crosstab(&data, prompt, demographic)?.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                write!(out, "{table}")?;
            }
        }
        Some(Command::Report { out_dir, crosstabs }) => {
            let mut options = ReportOptions { crosstabs: Vec::new(), reflect_negative: reflect };
            if crosstabs.is_empty() {
                for prompt in prompts(&data) {
                    for demo in [Demographic::Gender, Demographic::StudentStatus] {
                        options.crosstabs.push((prompt.to_owned(), demo));
                    }
                }
            }
            for spec in crosstabs {
                let (prompt, demo) =
                    spec.split_once(':').ok_or_else(|| format!("--crosstab {spec:?} is not prompt:demographic"))?;
                options.crosstabs.push((prompt.to_owned(), Demographic::parse(demo)?));
            }
            let files = render_report(&data, out_dir, &options)?;
            for file in &files {
                writeln!(out, "{}", file.display())?;
            }
            writeln!(out, "{} files written", files.len())?;
        }
        Some(Command::Items) => unreachable!("handled above"),
    }
    Ok(())
}
