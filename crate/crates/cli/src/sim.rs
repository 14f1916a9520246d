use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use mle_core::game::EscapeRule;
use mle_core::sim::{exact_expected_scans, simulate, Policy, SimConfig, SimResult};

use crate::CliResult;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PolicyArg {
    Uniform,
    Leftmost,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RuleArg {
    Greedy,
    Empty,
}

#[derive(Parser, Debug)]
#[command(name = "mle-sim", about = "Monte-Carlo estimate of scans needed to escape")]
pub struct Args {
    /// Object cards in the escape deck, the three core items included.
    #[arg(long, default_value_t = 12)]
    pub objects: usize,
    #[arg(long, value_enum, default_value_t = PolicyArg::Uniform)]
    pub policy: PolicyArg,
    #[arg(long, value_enum, default_value_t = RuleArg::Greedy)]
    pub rule: RuleArg,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also compute the exact expectation (at most 9 objects).
    #[arg(long)]
    pub exact: bool,
    /// Write the scan-count histogram as CSV.
    #[arg(long, value_name = "FILE")]
    pub histogram: Option<PathBuf>,
}

impl Args {
    pub fn config(&self) -> SimConfig {
        SimConfig {
            n_objects: self.objects,
            policy: match self.policy {
                PolicyArg::Uniform => Policy::UniformRandomPile,
                PolicyArg::Leftmost => Policy::LeftmostNonEmpty,
            },
            escape_rule: match self.rule {
                RuleArg::Greedy => EscapeRule::Greedy,
                RuleArg::Empty => EscapeRule::EmptyPiles,
            },
            trials: self.trials,
            seed: self.seed,
        }
    }
}

pub fn histogram_csv(result: &SimResult) -> String {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    writer.write_record(["scans", "count", "fraction"]).expect("writing to memory");
    for (scans, count) in &result.scan_distribution {
        let fraction = *count as f64 / result.trials as f64;
        writer
            .write_record([scans.to_string(), count.to_string(), format!("{fraction:.6}")])
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("ascii output")
}

pub fn run(args: &Args, out: &mut dyn Write) -> CliResult {
    let config = args.config();
    let exact = if args.exact { Some(exact_expected_scans(&config)?) } else { None };
    let result = simulate(&config)?;
    let min = result.scan_distribution.keys().next().copied().unwrap_or(0);
    let max = result.scan_distribution.keys().last().copied().unwrap_or(0);
    writeln!(out, "objects           {}", config.n_objects)?;
    writeln!(out, "policy            {:?}", config.policy)?;
    writeln!(out, "rule              {:?}", config.escape_rule)?;
    writeln!(out, "trials            {}", result.trials)?;
    writeln!(out, "seed              {}", config.seed)?;
    writeln!(out, "mean scans        {:.4}", result.mean_scans)?;
    writeln!(out, "std error         {:.4}", result.std_error)?;
    writeln!(
        out,
        "95% interval      [{:.4}, {:.4}]",
        result.mean_scans - 1.96 * result.std_error,
        result.mean_scans + 1.96 * result.std_error
    )?;
    writeln!(out, "range             {min}..={max}")?;
    writeln!(out, "questions seen    {:.2}%", 100.0 * result.mean_questions_answered_fraction)?;
    if let Some(exact) = exact {
        let value = *exact.numer() as f64 / *exact.denom() as f64;
        writeln!(out, "exact mean        {exact} = {value:.4}")?;
        if result.std_error > 0.0 {
            writeln!(out, "z                 {:+.2}", (result.mean_scans - value) / result.std_error)?;
        }
    }
    if let Some(path) = &args.histogram {
        std::fs::write(path, histogram_csv(&result)).map_err(|e| format!("{}: {e}", path.display()))?;
        writeln!(out, "histogram         {}", path.display())?;
    }
    Ok(())
}
