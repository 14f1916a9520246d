use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{
    crosstab, distribution, likert_from_dataset, sus_from_dataset, AnalyticsError, Demographic, DistributionTable,
    InstrumentId,
};
use crate::store::{DatasetRow, PHASE_QUESTIONNAIRE};

const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#b07aa1"];
const WIDTH: u32 = 760;
const LABEL_W: u32 = 280;
const BAR_MAX: u32 = 380;
const ROW_H: u32 = 26;
const TOP: u32 = 56;

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    /// Extra cross-tabulations to emit, as `(prompt_id, demographic)`.
    pub crosstabs: Vec<(String, Demographic)>,
    pub reflect_negative: bool,
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' }).collect()
}

fn svg_open(out: &mut String, height: u32, title: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" viewBox=\"0 0 {WIDTH} {height}\" font-family=\"sans-serif\" font-size=\"13\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"16\" y=\"28\" font-size=\"15\" font-weight=\"bold\">{}</text>",
        esc(title)
    );
}

/// Horizontal bar chart of one distribution.
pub fn bar_chart_svg(table: &DistributionTable) -> String {
    let height = TOP + ROW_H * table.rows.len() as u32 + 24;
    let mut out = String::new();
    let mut title = table.prompt_text.clone();
    if let Some((demo, value)) = &table.group {
        let _ = write!(title, " ({demo}: {value})");
    }
    svg_open(&mut out, height, &title);
    for (i, row) in table.rows.iter().enumerate() {
        let y = TOP + ROW_H * i as u32;
        let w = (BAR_MAX as u64 * row.percentage.tenths() / 1000) as u32;
        let _ = writeln!(
            out,
            "<g class=\"bar\" data-response=\"{label}\" data-count=\"{count}\" data-percentage=\"{pct}\">\
             <text x=\"{lx}\" y=\"{ty}\" text-anchor=\"end\">{label}</text>\
             <rect x=\"{LABEL_W}\" y=\"{y}\" width=\"{w}\" height=\"{bh}\" fill=\"{fill}\"/>\
             <text x=\"{px}\" y=\"{ty}\">{pct}% ({count})</text></g>",
            label = esc(&row.response_text),
            count = row.count,
            pct = row.percentage,
            lx = LABEL_W - 8,
            ty = y + 15,
            bh = ROW_H - 6,
            fill = PALETTE[0],
            px = LABEL_W + w + 6,
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Grouped bars comparing several distributions over the same responses.
pub fn grouped_bar_chart_svg(title: &str, series: &[(String, &DistributionTable)]) -> String {
    let mut categories: Vec<&str> = Vec::new();
    for (_, table) in series {
        for row in &table.rows {
            if !categories.contains(&row.response_text.as_str()) {
                categories.push(&row.response_text);
            }
        }
    }
    let bar_h = (ROW_H - 6) / series.len().max(1) as u32;
    let group_h = bar_h * series.len() as u32 + 10;
    let legend_h = 20 * series.len() as u32;
    let height = TOP + legend_h + group_h * categories.len() as u32 + 16;
    let mut out = String::new();
    svg_open(&mut out, height, title);
    for (s, (label, _)) in series.iter().enumerate() {
        let y = TOP - 8 + 20 * s as u32;
        let _ = writeln!(
            out,
            "<rect x=\"{LABEL_W}\" y=\"{y}\" width=\"12\" height=\"12\" fill=\"{}\"/><text x=\"{}\" y=\"{}\">{}</text>",
            PALETTE[s % PALETTE.len()],
            LABEL_W + 18,
            y + 11,
            esc(label)
        );
    }
    for (c, category) in categories.iter().enumerate() {
        let gy = TOP + legend_h + group_h * c as u32;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            LABEL_W - 8,
            gy + group_h / 2,
            esc(category)
        );
        for (s, (label, table)) in series.iter().enumerate() {
            let pct = table.percentage(category);
            let w = (BAR_MAX as u64 * pct.tenths() / 1000) as u32;
            let y = gy + bar_h * s as u32;
            let _ = writeln!(
                out,
                "<g class=\"bar\" data-series=\"{}\" data-response=\"{}\" data-percentage=\"{pct}\">\
                 <rect x=\"{LABEL_W}\" y=\"{y}\" width=\"{w}\" height=\"{}\" fill=\"{}\"/>\
                 <text x=\"{}\" y=\"{}\" font-size=\"11\">{pct}%</text></g>",
                esc(label),
                esc(category),
                bar_h.saturating_sub(2),
                PALETTE[s % PALETTE.len()],
                LABEL_W + w + 6,
                y + bar_h - 3,
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// CSV with one line per response and group.
pub fn table_csv(tables: &[DistributionTable]) -> String {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let grouped = tables.iter().any(|t| t.group.is_some());
    let mut header = vec!["prompt_id"];
    if grouped {
        header.extend(["demographic", "group"]);
    }
    header.extend(["response_text", "count", "percentage"]);
    writer.write_record(&header).expect("writing to memory");
    for table in tables {
        for row in &table.rows {
            let mut record = vec![table.prompt_id.clone()];
            if grouped {
                let (demo, value) = table.group.clone().unwrap_or_default();
                record.extend([demo, value]);
            }
            record.extend([row.response_text.clone(), row.count.to_string(), row.percentage.to_string()]);
            writer.write_record(&record).expect("writing to memory");
        }
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("utf-8 input")
}

fn paired_csv(before: &DistributionTable, during: &DistributionTable) -> String {
    let mut responses: Vec<&str> = before.rows.iter().map(|r| r.response_text.as_str()).collect();
    for r in &during.rows {
        if !responses.contains(&r.response_text.as_str()) {
            responses.push(&r.response_text);
        }
    }
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    writer
        .write_record(["response_text", "before_count", "before_percentage", "during_count", "during_percentage"])
        .expect("writing to memory");
    for text in responses {
        let count = |t: &DistributionTable| t.row(text).map_or(0, |r| r.count).to_string();
        writer
            .write_record([
                text.to_owned(),
                count(before),
                before.percentage(text).to_string(),
                count(during),
                during.percentage(text).to_string(),
            ])
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("utf-8 input")
}

fn questionnaire_csv(dataset: &[DatasetRow], reflect: bool) -> Result<Option<String>, AnalyticsError> {
    if !dataset.iter().any(|r| r.phase == PHASE_QUESTIONNAIRE) {
        return Ok(None);
    }
    let mut out = String::from("instrument,measure,value\n");
    if let Ok(sus) = sus_from_dataset(dataset) {
        let _ = writeln!(out, "SUS,mean_score,{}", sus.mean);
        let _ = writeln!(out, "SUS,participants,{}", sus.participants);
    }
    for instrument in [InstrumentId::Approach, InstrumentId::Empathy] {
        match likert_from_dataset(dataset, instrument, reflect) {
            Ok(pct) => {
                let _ = writeln!(out, "{instrument},likert_percentage,{pct}");
            }
            Err(AnalyticsError::NoResponses(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(Some(out))
}

/// Writes charts and tables for every prompt into `out_dir` and returns the
/// files written, in order.
///
/// Per prompt: `dist_<prompt>.svg` and `.csv`. Prompts named `<stem>_before`
/// and `<stem>_during` also get `paired_<stem>.svg` and `.csv`. Requested
/// cross-tabulations become `crosstab_<prompt>_<demographic>.svg` and `.csv`,
/// and questionnaire answers are summarised in `questionnaire.csv`.
pub fn render_report(
    dataset: &[DatasetRow],
    out_dir: &Path,
    options: &ReportOptions,
) -> Result<Vec<PathBuf>, AnalyticsError> {
    if dataset.is_empty() {
        return Err(AnalyticsError::EmptyDataset);
    }
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut emit = |name: String, contents: String| -> Result<(), AnalyticsError> {
        let path = out_dir.join(name);
        std::fs::write(&path, contents)?;
        written.push(path);
        Ok(())
    };

    let prompts: BTreeSet<&str> =
        dataset.iter().filter(|r| r.phase != PHASE_QUESTIONNAIRE).map(|r| r.prompt_id.as_str()).collect();
    for prompt in &prompts {
        let table = distribution(dataset, prompt)?;
        let stem = file_stem(prompt);
        emit(format!("dist_{stem}.svg"), bar_chart_svg(&table))?;
        emit(format!("dist_{stem}.csv"), table_csv(std::slice::from_ref(&table)))?;
    }
    for prompt in &prompts {
        let Some(stem) = prompt.strip_suffix("_before") else { continue };
        let during_id = format!("{stem}_during");
        if !prompts.contains(during_id.as_str()) {
            continue;
        }
        let before = distribution(dataset, prompt)?;
        let during = distribution(dataset, &during_id)?;
        let title = format!("{} / {}", before.prompt_text, during.prompt_text);
        let series = [("before".to_owned(), &before), ("during".to_owned(), &during)];
        let stem = file_stem(stem);
        emit(format!("paired_{stem}.svg"), grouped_bar_chart_svg(&title, &series))?;
        emit(format!("paired_{stem}.csv"), paired_csv(&before, &during))?;
    }
    for (prompt, demographic) in &options.crosstabs {
        let tables = crosstab(dataset, prompt, *demographic)?;
        let series: Vec<(String, &DistributionTable)> =
            tables.iter().map(|t| (t.group.as_ref().map(|g| g.1.clone()).unwrap_or_default(), t)).collect();
        let title = format!("{} by {}", tables[0].prompt_text, demographic.as_str());
        let name = format!("crosstab_{}_{}", file_stem(prompt), demographic.as_str());
        emit(format!("{name}.svg"), grouped_bar_chart_svg(&title, &series))?;
        emit(format!("{name}.csv"), table_csv(&tables))?;
    }
    if let Some(csv) = questionnaire_csv(dataset, options.reflect_negative)? {
        emit("questionnaire.csv".into(), csv)?;
    }
    Ok(written)
}
