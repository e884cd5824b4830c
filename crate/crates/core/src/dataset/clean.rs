//! Cleaning rules: turn raw reviews into validated [`CoffeeRecord`]s.
//!
//! A row is dropped when it lacks species, country or moisture, when any
//! subjective score is absent, zero or above 10, or when a defect count is
//! not a non-negative integer. Absent region, variety, color and processing
//! method become the explicit category `unknown`. Moisture above 1 is read
//! as a percentage.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::raw::RawReview;
use crate::subjective::{SubjectiveVector, N_ATTRIBUTES, SCORE_MAX};

pub const UNKNOWN: &str = "unknown";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Arabica,
    Robusta,
}

impl Species {
    pub const ALL: [Species; 2] = [Species::Arabica, Species::Robusta];

    pub fn name(self) -> &'static str {
        match self {
            Species::Arabica => "arabica",
            Species::Robusta => "robusta",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "arabica" => Some(Species::Arabica),
            "robusta" => Some(Species::Robusta),
            _ => None,
        }
    }
}

/// The nine objective bean properties used as regression inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveProperties {
    pub species: Species,
    pub country_of_origin: String,
    pub region: String,
    pub variety: String,
    pub color: String,
    pub category_one_defects: u32,
    pub category_two_defects: u32,
    pub processing_method: String,
    pub moisture: f64,
}

/// A cleaned review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoffeeRecord {
    pub id: usize,
    pub objective: ObjectiveProperties,
    pub subjective: SubjectiveVector,
}

impl CoffeeRecord {
    /// Back-conversion used to check that cleaning is idempotent.
    pub fn to_raw(&self) -> RawReview {
        let o = &self.objective;
        RawReview {
            row_index: self.id,
            species: Some(o.species.name().to_string()),
            country_of_origin: Some(o.country_of_origin.clone()),
            region: Some(o.region.clone()),
            variety: Some(o.variety.clone()),
            color: Some(o.color.clone()),
            category_one_defects: Some(o.category_one_defects as f64),
            category_two_defects: Some(o.category_two_defects as f64),
            processing_method: Some(o.processing_method.clone()),
            moisture: Some(o.moisture),
            scores: self.subjective.to_array().map(Some),
            ..Default::default()
        }
    }
}

/// A catalog bean with objective properties only; its scores must be predicted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnreviewedBean {
    pub id: usize,
    pub objective: ObjectiveProperties,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    MissingSpecies,
    UnknownSpecies,
    MissingCountry,
    MissingMoisture,
    MoistureOutOfRange,
    InvalidDefects,
    MissingScore,
    ZeroScore,
    ScoreOutOfRange,
}

impl DropReason {
    pub fn name(self) -> &'static str {
        match self {
            DropReason::MissingSpecies => "missing_species",
            DropReason::UnknownSpecies => "unknown_species",
            DropReason::MissingCountry => "missing_country",
            DropReason::MissingMoisture => "missing_moisture",
            DropReason::MoistureOutOfRange => "moisture_out_of_range",
            DropReason::InvalidDefects => "invalid_defects",
            DropReason::MissingScore => "missing_score",
            DropReason::ZeroScore => "zero_score",
            DropReason::ScoreOutOfRange => "score_out_of_range",
        }
    }
}

/// Audit trail of one cleaning pass.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CleaningLog {
    pub input_rows: usize,
    pub retained: usize,
    /// Rows dropped, by the first rule they failed.
    pub dropped: BTreeMap<DropReason, usize>,
    /// Source row indices of dropped rows, with the reason.
    pub dropped_rows: Vec<(usize, DropReason)>,
    /// Absent categorical cells replaced by `unknown`, per field.
    pub filled_unknown: BTreeMap<String, usize>,
    /// Moisture values rescaled from percent to fraction.
    pub moisture_rescaled: usize,
}

impl CleaningLog {
    pub fn total_dropped(&self) -> usize {
        self.dropped.values().sum()
    }
}

impl fmt::Display for CleaningLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "input_rows\t{}", self.input_rows)?;
        writeln!(f, "retained\t{}", self.retained)?;
        writeln!(f, "dropped\t{}", self.total_dropped())?;
        for (reason, n) in &self.dropped {
            writeln!(f, "dropped.{}\t{}", reason.name(), n)?;
        }
        for (field, n) in &self.filled_unknown {
            writeln!(f, "filled_unknown.{field}\t{n}")?;
        }
        writeln!(f, "moisture_rescaled\t{}", self.moisture_rescaled)?;
        for (row, reason) in &self.dropped_rows {
            writeln!(f, "drop\trow={row}\t{}", reason.name())?;
        }
        Ok(())
    }
}

/// Lowercases, trims and collapses inner whitespace.
fn normalize_label(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn is_placeholder(label: &str) -> bool {
    matches!(label, "" | "none" | "nan" | "na" | "n/a" | "null" | UNKNOWN)
}

fn defect_count(v: Option<f64>) -> Option<u32> {
    let v = v?;
    (v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64).then_some(v as u32)
}

fn clean_objective(
    raw: &RawReview,
    log: &mut CleaningLog,
) -> Result<ObjectiveProperties, DropReason> {
    let species = match raw.species.as_deref() {
        None => return Err(DropReason::MissingSpecies),
        Some(s) => Species::parse(s).ok_or(DropReason::UnknownSpecies)?,
    };
    let country = raw
        .country_of_origin
        .as_deref()
        .map(normalize_label)
        .filter(|c| !is_placeholder(c))
        .ok_or(DropReason::MissingCountry)?;

    let mut moisture = raw.moisture.ok_or(DropReason::MissingMoisture)?;
    let mut rescaled = false;
    if moisture > 1.0 {
        moisture /= 100.0;
        rescaled = true;
    }
    if !(0.0..=1.0).contains(&moisture) {
        return Err(DropReason::MoistureOutOfRange);
    }

    let cat_one = defect_count(raw.category_one_defects).ok_or(DropReason::InvalidDefects)?;
    let cat_two = defect_count(raw.category_two_defects).ok_or(DropReason::InvalidDefects)?;

    let mut category = |field: &str, v: &Option<String>| -> String {
        let label = v.as_deref().map(normalize_label).unwrap_or_default();
        if is_placeholder(&label) {
            if label != UNKNOWN {
                *log.filled_unknown.entry(field.to_string()).or_default() += 1;
            }
            UNKNOWN.to_string()
        } else {
            label
        }
    };
    let props = ObjectiveProperties {
        species,
        country_of_origin: country,
        region: category("region", &raw.region),
        variety: category("variety", &raw.variety),
        color: category("color", &raw.color),
        category_one_defects: cat_one,
        category_two_defects: cat_two,
        processing_method: category("processing_method", &raw.processing_method),
        moisture,
    };
    if rescaled {
        log.moisture_rescaled += 1;
    }
    Ok(props)
}

fn clean_scores(raw: &RawReview) -> Result<SubjectiveVector, DropReason> {
    let mut scores = [0.0; N_ATTRIBUTES];
    for (dst, src) in scores.iter_mut().zip(raw.scores) {
        *dst = src.ok_or(DropReason::MissingScore)?;
    }
    if scores.contains(&0.0) {
        return Err(DropReason::ZeroScore);
    }
    if scores.iter().any(|&s| !(s > 0.0 && s <= SCORE_MAX)) {
        return Err(DropReason::ScoreOutOfRange);
    }
    Ok(SubjectiveVector::from_array(scores))
}

/// Validates raw reviews; retained records get dense ids in source order.
pub fn clean(reviews: &[RawReview]) -> (Vec<CoffeeRecord>, CleaningLog) {
    let mut log = CleaningLog {
        input_rows: reviews.len(),
        ..Default::default()
    };
    let mut records = Vec::new();
    for raw in reviews {
        // Fill counts are only kept for retained rows.
        let mut row_log = CleaningLog::default();
        let outcome = clean_objective(raw, &mut row_log)
            .and_then(|objective| clean_scores(raw).map(|subjective| (objective, subjective)));
        match outcome {
            Ok((objective, subjective)) => {
                merge_fill_counts(&mut log, row_log);
                records.push(CoffeeRecord {
                    id: records.len(),
                    objective,
                    subjective,
                });
            }
            Err(reason) => {
                *log.dropped.entry(reason).or_default() += 1;
                log.dropped_rows.push((raw.row_index, reason));
            }
        }
    }
    log.retained = records.len();
    (records, log)
}

/// Cleans rows that carry objective properties only. Subjective cells are
/// ignored; ids start at `first_id`.
pub fn clean_unreviewed(reviews: &[RawReview], first_id: usize) -> (Vec<UnreviewedBean>, CleaningLog) {
    let mut log = CleaningLog {
        input_rows: reviews.len(),
        ..Default::default()
    };
    let mut beans = Vec::new();
    for raw in reviews {
        let mut row_log = CleaningLog::default();
        match clean_objective(raw, &mut row_log) {
            Ok(objective) => {
                merge_fill_counts(&mut log, row_log);
                beans.push(UnreviewedBean {
                    id: first_id + beans.len(),
                    objective,
                });
            }
            Err(reason) => {
                *log.dropped.entry(reason).or_default() += 1;
                log.dropped_rows.push((raw.row_index, reason));
            }
        }
    }
    log.retained = beans.len();
    (beans, log)
}

fn merge_fill_counts(log: &mut CleaningLog, row: CleaningLog) {
    for (k, v) in row.filled_unknown {
        *log.filled_unknown.entry(k).or_default() += v;
    }
    log.moisture_rescaled += row.moisture_rescaled;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn valid_raw() -> RawReview {
        RawReview {
            row_index: 0,
            species: Some("Arabica".into()),
            country_of_origin: Some("Ethiopia".into()),
            region: Some("guji-hambela".into()),
            variety: None,
            color: Some("Green".into()),
            category_one_defects: Some(0.0),
            category_two_defects: Some(2.0),
            processing_method: Some("Washed / Wet".into()),
            moisture: Some(0.12),
            scores: [8.67, 8.83, 8.5, 10.0, 8.75, 8.42, 10.0, 8.67].map(Some),
            ..Default::default()
        }
    }

    #[test]
    fn valid_review_is_retained() {
        let (records, log) = clean(&[valid_raw()]);
        assert_eq!(records.len(), 1);
        assert_eq!(log.retained, 1);
        let r = &records[0];
        assert_eq!(r.id, 0);
        assert_eq!(r.objective.species, Species::Arabica);
        assert_eq!(r.objective.country_of_origin, "ethiopia");
        assert_eq!(r.objective.variety, UNKNOWN);
        assert_eq!(r.objective.category_two_defects, 2);
        assert_eq!(r.subjective.flavour, 8.83);
        assert_eq!(log.filled_unknown.get("variety"), Some(&1));
    }

    #[test]
    fn zero_sweetness_is_dropped() {
        let mut raw = valid_raw();
        raw.scores[3] = Some(0.0);
        let (records, log) = clean(&[raw]);
        assert!(records.is_empty());
        assert_eq!(log.dropped.get(&DropReason::ZeroScore), Some(&1));
    }

    #[test]
    fn percent_moisture_is_rescaled() {
        let mut raw = valid_raw();
        raw.moisture = Some(11.0);
        let (records, log) = clean(&[raw]);
        assert!((records[0].objective.moisture - 0.11).abs() < 1e-12);
        assert_eq!(log.moisture_rescaled, 1);
    }

    #[test]
    fn drop_rules() {
        let cases: Vec<(Box<dyn Fn(&mut RawReview)>, DropReason)> = vec![
            (Box::new(|r| r.species = None), DropReason::MissingSpecies),
            (Box::new(|r| r.species = Some("liberica".into())), DropReason::UnknownSpecies),
            (Box::new(|r| r.country_of_origin = None), DropReason::MissingCountry),
            (Box::new(|r| r.moisture = None), DropReason::MissingMoisture),
            (Box::new(|r| r.moisture = Some(-0.1)), DropReason::MoistureOutOfRange),
            (Box::new(|r| r.category_one_defects = Some(-1.0)), DropReason::InvalidDefects),
            (Box::new(|r| r.category_two_defects = Some(1.5)), DropReason::InvalidDefects),
            (Box::new(|r| r.scores[0] = None), DropReason::MissingScore),
            (Box::new(|r| r.scores[7] = Some(10.5)), DropReason::ScoreOutOfRange),
        ];
        for (mutate, reason) in cases {
            let mut raw = valid_raw();
            mutate(&mut raw);
            let (records, log) = clean(&[raw]);
            assert!(records.is_empty(), "{reason:?}");
            assert_eq!(log.dropped_rows, vec![(0, reason)]);
        }
    }

    #[test]
    fn all_dropped_yields_empty_with_log() {
        let mut raw = valid_raw();
        raw.species = None;
        let (records, log) = clean(&[raw.clone(), raw]);
        assert!(records.is_empty());
        assert_eq!(log.input_rows, 2);
        assert_eq!(log.total_dropped(), 2);
        assert!(log.to_string().contains("dropped.missing_species\t2"));
    }

    #[test]
    fn ids_are_dense_in_source_order() {
        let mut bad = valid_raw();
        bad.scores[2] = Some(0.0);
        let (records, _) = clean(&[valid_raw(), bad, valid_raw()]);
        assert_eq!(records.iter().map(|r| r.id).collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn unreviewed_rows_ignore_scores() {
        let mut raw = valid_raw();
        raw.scores = [None; N_ATTRIBUTES];
        let (beans, log) = clean_unreviewed(&[raw], 100);
        assert_eq!(beans.len(), 1);
        assert_eq!(beans[0].id, 100);
        assert_eq!(log.retained, 1);
    }
}
