//! Questionnaire scoring and answer analytics over exported datasets.
//!
//! All reported figures are fixed-point with one decimal, rounded half-up
//! using integer arithmetic so that results never depend on float rounding.

mod dataset;
mod instruments;
mod report;

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::store::{DatasetRow, PHASE_QUESTIONNAIRE};

pub use dataset::{detect_format, read_dataset};
pub use instruments::{find_item, Instrument, InstrumentId, Item, Polarity, APPROACH, EMPATHY, SUS};
pub use report::{bar_chart_svg, grouped_bar_chart_svg, render_report, table_csv, ReportOptions};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("expected {expected} responses, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("response {value} to {item} is outside 1..=5")]
    Range { item: String, value: i64 },
    #[error("unknown instrument {0}")]
    UnknownInstrument(String),
    #[error("item {item} does not belong to {instrument}")]
    UnknownItem { item: String, instrument: InstrumentId },
    #[error("prompt {0} does not occur in the dataset")]
    UnknownPrompt(String),
    #[error("unknown demographic {0}; use gender, student_status or age_band")]
    UnknownDemographic(String),
    #[error("the dataset is empty")]
    EmptyDataset,
    #[error("no participant answered the {0} questionnaire")]
    NoResponses(InstrumentId),
    #[error("malformed dataset at record {record}: {message}")]
    Parse { record: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A non-negative number with exactly one decimal, stored in tenths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Decimal1(pub u64);

impl Decimal1 {
    /// `num / den` rounded half-up to one decimal.
    pub fn ratio(num: u128, den: u128) -> Self {
        assert!(den > 0, "zero denominator");
        Decimal1(((20 * num + den) / (2 * den)) as u64)
    }

    pub fn tenths(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 10.0
    }
}

impl fmt::Display for Decimal1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.0 / 10, self.0 % 10)
    }
}

impl Serialize for Decimal1 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

fn check_value(item: &str, value: u8) -> Result<(), AnalyticsError> {
    if (1..=5).contains(&value) {
        Ok(())
    } else {
        Err(AnalyticsError::Range { item: item.to_owned(), value: value.into() })
    }
}

/// Raw SUS sum in 0..=40; the score is 2.5 times this.
fn sus_sum(responses: &[u8]) -> Result<u32, AnalyticsError> {
    if responses.len() != SUS.items.len() {
        return Err(AnalyticsError::Arity { expected: SUS.items.len(), got: responses.len() });
    }
    let mut sum = 0;
    for (i, (&v, item)) in responses.iter().zip(SUS.items).enumerate() {
        check_value(item.id, v)?;
        let v = u32::from(v);
        sum += if i % 2 == 0 { v - 1 } else { 5 - v };
    }
    Ok(sum)
}

/// Standard SUS score for ten responses in questionnaire order.
pub fn sus_score(responses: &[u8]) -> Result<Decimal1, AnalyticsError> {
    Ok(Decimal1(u64::from(sus_sum(responses)?) * 25))
}

/// Mean SUS score of a cohort.
pub fn sus_mean<R: AsRef<[u8]>>(cohort: &[R]) -> Result<Decimal1, AnalyticsError> {
    if cohort.is_empty() {
        return Err(AnalyticsError::NoResponses(InstrumentId::Sus));
    }
    let mut total = 0u128;
    for responses in cohort {
        total += u128::from(sus_sum(responses.as_ref())?);
    }
    Ok(Decimal1::ratio(total * 25, 10 * cohort.len() as u128))
}

pub fn reflect(value: u8) -> u8 {
    6 - value
}

/// Grand mean of all item responses mapped onto a percentage,
/// `mean / 5 * 100`. Negative items are reflected when `reflect_negative`.
pub fn likert_percentage<'a>(
    responses: impl IntoIterator<Item = (&'a str, u8)>,
    instrument: InstrumentId,
    reflect_negative: bool,
) -> Result<Decimal1, AnalyticsError> {
    let instrument_def = instrument.instrument();
    let mut sum = 0u128;
    let mut count = 0u128;
    for (item_id, value) in responses {
        let item = instrument_def
            .item(item_id)
            .ok_or_else(|| AnalyticsError::UnknownItem { item: item_id.to_owned(), instrument })?;
        check_value(item_id, value)?;
        let v = if reflect_negative && item.polarity == Polarity::Negative { reflect(value) } else { value };
        sum += u128::from(v);
        count += 1;
    }
    if count == 0 {
        return Err(AnalyticsError::NoResponses(instrument));
    }
    Ok(Decimal1::ratio(sum * 20, count))
}

/// Every questionnaire item once, in a seeded Fisher–Yates order.
pub fn randomize_questionnaire(instruments: &[InstrumentId], seed: u64) -> Vec<&'static Item> {
    let mut items: Vec<&'static Item> = instruments.iter().flat_map(|i| i.instrument().items.iter()).collect();
    items.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    items
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistributionRow {
    pub response_text: String,
    pub count: u64,
    pub percentage: Decimal1,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DistributionTable {
    pub prompt_id: String,
    pub prompt_text: String,
    /// `(demographic, value)` for cross-tabulated tables.
    pub group: Option<(String, String)>,
    pub total: u64,
    /// Sorted by count, most frequent first, ties by response text.
    pub rows: Vec<DistributionRow>,
}

impl DistributionTable {
    fn build(prompt_id: &str, prompt_text: &str, group: Option<(String, String)>, responses: &[&DatasetRow]) -> Self {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for r in responses {
            *counts.entry(r.response_text.as_str()).or_default() += 1;
        }
        let total = responses.len() as u64;
        let mut rows: Vec<DistributionRow> = counts
            .into_iter()
            .map(|(text, count)| DistributionRow {
                response_text: text.to_owned(),
                count,
                percentage: Decimal1::ratio(u128::from(count) * 100, u128::from(total)),
            })
            .collect();
        rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.response_text.cmp(&b.response_text)));
        DistributionTable { prompt_id: prompt_id.to_owned(), prompt_text: prompt_text.to_owned(), group, total, rows }
    }

    pub fn row(&self, response_text: &str) -> Option<&DistributionRow> {
        self.rows.iter().find(|r| r.response_text == response_text)
    }

    pub fn percentage(&self, response_text: &str) -> Decimal1 {
        self.row(response_text).map(|r| r.percentage).unwrap_or_default()
    }
}

impl fmt::Display for DistributionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.prompt_id)?;
        if let Some((demo, value)) = &self.group {
            write!(f, " [{demo}={value}]")?;
        }
        writeln!(f, " (n={})", self.total)?;
        let width = self.rows.iter().map(|r| r.response_text.chars().count()).max().unwrap_or(0);
        for r in &self.rows {
            writeln!(f, "  {:<width$}  {:>6}  {:>5}%", r.response_text, r.count, r.percentage.to_string())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Demographic {
    Gender,
    StudentStatus,
    AgeBand,
}

impl Demographic {
    pub fn parse(s: &str) -> Result<Self, AnalyticsError> {
        match s {
            "gender" => Ok(Demographic::Gender),
            "student_status" => Ok(Demographic::StudentStatus),
            "age_band" => Ok(Demographic::AgeBand),
            _ => Err(AnalyticsError::UnknownDemographic(s.to_owned())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Demographic::Gender => "gender",
            Demographic::StudentStatus => "student_status",
            Demographic::AgeBand => "age_band",
        }
    }

    pub fn value(self, row: &DatasetRow) -> String {
        match self {
            Demographic::Gender => row.gender.clone(),
            Demographic::StudentStatus => row.student_status.clone(),
            Demographic::AgeBand => age_band(row.age).to_owned(),
        }
    }
}

pub fn age_band(age: Option<u32>) -> &'static str {
    match age {
        None => "unknown",
        Some(a) if a < 20 => "<20",
        Some(a) if a < 30 => "20-29",
        Some(a) if a < 40 => "30-39",
        Some(_) => "40+",
    }
}

fn prompt_rows<'a>(dataset: &'a [DatasetRow], prompt_id: &str) -> Result<Vec<&'a DatasetRow>, AnalyticsError> {
    if dataset.is_empty() {
        return Err(AnalyticsError::EmptyDataset);
    }
    let rows: Vec<_> = dataset.iter().filter(|r| r.prompt_id == prompt_id).collect();
    if rows.is_empty() {
        return Err(AnalyticsError::UnknownPrompt(prompt_id.to_owned()));
    }
    Ok(rows)
}

pub fn distribution(dataset: &[DatasetRow], prompt_id: &str) -> Result<DistributionTable, AnalyticsError> {
    let rows = prompt_rows(dataset, prompt_id)?;
    Ok(DistributionTable::build(prompt_id, &rows[0].prompt_text, None, &rows))
}

/// One distribution per value of `demographic`, ordered by value.
pub fn crosstab(
    dataset: &[DatasetRow],
    prompt_id: &str,
    demographic: Demographic,
) -> Result<Vec<DistributionTable>, AnalyticsError> {
    let rows = prompt_rows(dataset, prompt_id)?;
    let mut groups: BTreeMap<String, Vec<&DatasetRow>> = BTreeMap::new();
    for r in &rows {
        groups.entry(demographic.value(r)).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|(value, members)| {
            let group = Some((demographic.as_str().to_owned(), value));
            DistributionTable::build(prompt_id, &rows[0].prompt_text, group, &members)
        })
        .collect())
}

/// `(item_id, value)` pairs keyed by session id.
pub type ResponsesBySession<'a> = BTreeMap<&'a str, Vec<(&'a str, u8)>>;

/// Questionnaire answers per session, in dataset order.
pub fn questionnaire_responses(dataset: &[DatasetRow]) -> Result<ResponsesBySession<'_>, AnalyticsError> {
    let mut out = ResponsesBySession::new();
    for (i, row) in dataset.iter().enumerate().filter(|(_, r)| r.phase == PHASE_QUESTIONNAIRE) {
        let value: u8 = row.response_id.parse().map_err(|_| AnalyticsError::Parse {
            record: i + 1,
            message: format!("questionnaire value {:?} is not a number", row.response_id),
        })?;
        out.entry(row.session_id.as_str()).or_default().push((row.prompt_id.as_str(), value));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SusSummary {
    pub participants: usize,
    pub mean: Decimal1,
    pub scores: Vec<(String, Decimal1)>,
}

/// SUS scores of every session that answered all ten items.
pub fn sus_from_dataset(dataset: &[DatasetRow]) -> Result<SusSummary, AnalyticsError> {
    if dataset.is_empty() {
        return Err(AnalyticsError::EmptyDataset);
    }
    let mut cohort = Vec::new();
    let mut scores = Vec::new();
    for (session, answers) in questionnaire_responses(dataset)? {
        let by_item: BTreeMap<&str, u8> = answers.into_iter().collect();
        let ordered: Option<Vec<u8>> = SUS.items.iter().map(|i| by_item.get(i.id).copied()).collect();
        if let Some(values) = ordered {
            scores.push((session.to_owned(), sus_score(&values)?));
            cohort.push(values);
        }
    }
    Ok(SusSummary { participants: cohort.len(), mean: sus_mean(&cohort)?, scores })
}

pub fn likert_from_dataset(
    dataset: &[DatasetRow],
    instrument: InstrumentId,
    reflect_negative: bool,
) -> Result<Decimal1, AnalyticsError> {
    if dataset.is_empty() {
        return Err(AnalyticsError::EmptyDataset);
    }
    let answers = questionnaire_responses(dataset)?;
    let def = instrument.instrument();
    let items = answers.values().flatten().copied().filter(|(item, _)| def.item(item).is_some());
    likert_percentage(items, instrument, reflect_negative)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_rounding_is_half_up() {
        assert_eq!(Decimal1::ratio(1, 3).to_string(), "0.3");
        assert_eq!(Decimal1::ratio(1, 20).to_string(), "0.1");
        assert_eq!(Decimal1::ratio(1, 40).to_string(), "0.0");
        assert_eq!(Decimal1::ratio(2, 3).to_string(), "0.7");
        assert_eq!(Decimal1::ratio(100, 1).to_string(), "100.0");
    }

    #[test]
    fn sus_examples() {
        assert_eq!(sus_score(&[3; 10]).unwrap(), Decimal1(500));
        assert_eq!(sus_score(&[5, 1, 5, 1, 5, 1, 5, 1, 5, 1]).unwrap(), Decimal1(1000));
        assert_eq!(sus_score(&[1, 5, 1, 5, 1, 5, 1, 5, 1, 5]).unwrap(), Decimal1(0));
        assert!(matches!(sus_score(&[3; 9]), Err(AnalyticsError::Arity { expected: 10, got: 9 })));
        assert!(matches!(sus_score(&[3, 3, 3, 3, 6, 3, 3, 3, 3, 3]), Err(AnalyticsError::Range { .. })));
        assert!(matches!(sus_score(&[0; 10]), Err(AnalyticsError::Range { .. })));
    }

    #[test]
    fn likert_examples() {
        let mut responses = vec![("APPROACH1", 4u8); 9];
        responses.push(("APPROACH1", 3));
        assert_eq!(likert_percentage(responses, InstrumentId::Approach, true).unwrap(), Decimal1(780));
        let all_fives = EMPATHY.items.iter().map(|i| (i.id, 5));
        assert_eq!(likert_percentage(all_fives, InstrumentId::Empathy, true).unwrap(), Decimal1(1000));
        let boring = [("APPROACH5", 1u8)];
        assert_eq!(likert_percentage(boring, InstrumentId::Approach, true).unwrap(), Decimal1(1000));
        assert_eq!(likert_percentage(boring, InstrumentId::Approach, false).unwrap(), Decimal1(200));
        assert!(matches!(
            likert_percentage([("SUS1", 3)], InstrumentId::Empathy, true),
            Err(AnalyticsError::UnknownItem { .. })
        ));
        assert!(matches!(
            likert_percentage(std::iter::empty(), InstrumentId::Empathy, true),
            Err(AnalyticsError::NoResponses(_))
        ));
    }

    #[test]
    fn reflection_is_an_involution() {
        for v in 1..=5 {
            assert_eq!(reflect(reflect(v)), v);
        }
    }

    #[test]
    fn questionnaire_order() {
        let all = [InstrumentId::Sus, InstrumentId::Approach, InstrumentId::Empathy];
        let a = randomize_questionnaire(&all, 1);
        assert_eq!(a.len(), 20);
        let mut ids: Vec<_> = a.iter().map(|i| i.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 20);
        assert_eq!(a, randomize_questionnaire(&all, 1));
        let differing = (0..100u64)
            .filter(|s| randomize_questionnaire(&all, 2 * s) != randomize_questionnaire(&all, 2 * s + 1))
            .count();
        assert_eq!(differing, 100);
    }

    #[test]
    fn age_bands() {
        assert_eq!(age_band(Some(19)), "<20");
        assert_eq!(age_band(Some(20)), "20-29");
        assert_eq!(age_band(Some(39)), "30-39");
        assert_eq!(age_band(Some(40)), "40+");
        assert!(Demographic::parse("shoe_size").is_err());
    }
}
