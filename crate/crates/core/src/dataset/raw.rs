//! Raw CSV ingestion. Column names are matched loosely (case and
//! punctuation are ignored) so both the scraped CQI export
//! (`Country.of.Origin`) and our cleaned files (`country_of_origin`) load.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::subjective::N_ATTRIBUTES;

/// One data row of the source table, before any validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawReview {
    pub row_index: usize,
    pub species: Option<String>,
    pub country_of_origin: Option<String>,
    pub region: Option<String>,
    pub variety: Option<String>,
    pub color: Option<String>,
    pub category_one_defects: Option<f64>,
    pub category_two_defects: Option<f64>,
    pub processing_method: Option<String>,
    pub moisture: Option<f64>,
    /// Subjective scores in canonical attribute order.
    pub scores: [Option<f64>; N_ATTRIBUTES],
    pub altitude_mean_meters: Option<f64>,
    /// Every other non-empty source cell, keyed by its header.
    pub extra: BTreeMap<String, String>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Field {
    Species,
    Country,
    Region,
    Variety,
    Color,
    CatOne,
    CatTwo,
    Processing,
    Moisture,
    Score(usize),
    Altitude,
}

struct ColumnSpec {
    field: Field,
    canonical: &'static str,
    aliases: &'static [&'static str],
    required: bool,
}

const fn col(
    field: Field,
    canonical: &'static str,
    aliases: &'static [&'static str],
    required: bool,
) -> ColumnSpec {
    ColumnSpec {
        field,
        canonical,
        aliases,
        required,
    }
}

const COLUMNS: &[ColumnSpec] = &[
    col(Field::Species, "species", &["species"], true),
    col(Field::Country, "country_of_origin", &["countryoforigin", "country"], true),
    col(Field::Region, "region", &["region"], true),
    col(Field::Variety, "variety", &["variety"], true),
    col(Field::Color, "color", &["color", "colour"], true),
    col(Field::CatOne, "category_one_defects", &["categoryonedefects"], true),
    col(Field::CatTwo, "category_two_defects", &["categorytwodefects"], true),
    col(Field::Processing, "processing_method", &["processingmethod"], true),
    col(Field::Moisture, "moisture", &["moisture"], true),
    col(Field::Score(0), "aroma", &["aroma"], true),
    col(Field::Score(1), "flavour", &["flavour", "flavor"], true),
    col(Field::Score(2), "body", &["body"], true),
    col(Field::Score(3), "sweetness", &["sweetness"], true),
    col(Field::Score(4), "acidity", &["acidity"], true),
    col(Field::Score(5), "balance", &["balance"], true),
    col(Field::Score(6), "uniformity", &["uniformity"], true),
    col(Field::Score(7), "aftertaste", &["aftertaste"], true),
    col(Field::Altitude, "altitude_mean_meters", &["altitudemeanmeters"], false),
];

fn normalize_header(h: &str) -> String {
    h.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

fn is_missing_token(s: &str) -> bool {
    matches!(s.to_ascii_lowercase().as_str(), "" | "na" | "nan" | "n/a" | "null")
}

fn text_cell(s: &str) -> Option<String> {
    let s = s.trim();
    (!is_missing_token(s)).then(|| s.to_string())
}

fn number_cell(s: &str) -> Option<f64> {
    let s = s.trim();
    if is_missing_token(s) {
        return None;
    }
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads every data row of a CQI-style table.
pub fn read_reviews<R: Read>(reader: R) -> Result<Vec<RawReview>> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::None)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let normalized: Vec<String> = headers.iter().map(normalize_header).collect();

    let mut mapping: Vec<Option<Field>> = vec![None; headers.len()];
    for spec in COLUMNS {
        let pos = spec
            .aliases
            .iter()
            .find_map(|alias| normalized.iter().position(|h| h == alias));
        match pos {
            Some(p) => mapping[p] = Some(spec.field),
            None if spec.required => {
                return Err(Error::MissingColumn {
                    column: spec.canonical.to_string(),
                })
            }
            None => {}
        }
    }

    let mut out = Vec::new();
    for (row_index, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut raw = RawReview {
            row_index,
            ..Default::default()
        };
        for (i, cell) in rec.iter().enumerate() {
            match mapping.get(i).copied().flatten() {
                Some(Field::Species) => raw.species = text_cell(cell),
                Some(Field::Country) => raw.country_of_origin = text_cell(cell),
                Some(Field::Region) => raw.region = text_cell(cell),
                Some(Field::Variety) => raw.variety = text_cell(cell),
                Some(Field::Color) => raw.color = text_cell(cell),
                Some(Field::Processing) => raw.processing_method = text_cell(cell),
                Some(Field::CatOne) => raw.category_one_defects = number_cell(cell),
                Some(Field::CatTwo) => raw.category_two_defects = number_cell(cell),
                Some(Field::Moisture) => raw.moisture = number_cell(cell),
                Some(Field::Score(j)) => raw.scores[j] = number_cell(cell),
                Some(Field::Altitude) => raw.altitude_mean_meters = number_cell(cell),
                None => {
                    let key = headers.get(i).unwrap_or_default();
                    if let Some(v) = text_cell(cell) {
                        raw.extra.insert(key.to_string(), v);
                    }
                }
            }
        }
        out.push(raw);
    }
    Ok(out)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<RawReview>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_reviews(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "Species,Country.of.Origin,Region,Variety,Color,Category.One.Defects,Category.Two.Defects,Processing.Method,Moisture,Aroma,Flavor,Body,Sweetness,Acidity,Balance,Uniformity,Aftertaste,Owner";

    #[test]
    fn empty_file_with_header() {
        let rows = read_reviews(format!("{HEADER}\n").as_bytes()).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn blank_moisture_is_absent() {
        let csv = format!(
            "{HEADER}\nArabica,Ethiopia,guji,Heirloom,Green,0,1,Washed / Wet,,8.67,8.83,8.5,10,8.75,8.42,10,8.67,metad plc\n"
        );
        let rows = read_reviews(csv.as_bytes()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].moisture, None);
        assert_eq!(rows[0].scores[1], Some(8.83));
        assert_eq!(rows[0].extra.get("Owner").map(String::as_str), Some("metad plc"));
    }

    #[test]
    fn unparseable_number_is_absent_not_zero() {
        let csv = format!(
            "{HEADER}\nArabica,Ethiopia,guji,Heirloom,Green,abc,1,Washed / Wet,0.12,8.67,8.83,8.5,10,8.75,8.42,10,8.67,x\n"
        );
        let rows = read_reviews(csv.as_bytes()).unwrap();
        assert_eq!(rows[0].category_one_defects, None);
    }

    #[test]
    fn missing_column_is_named() {
        let header = HEADER.replace("Moisture,", "");
        let err = read_reviews(format!("{header}\n").as_bytes()).unwrap_err();
        assert!(err.to_string().contains("moisture"), "{err}");
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_csv("/definitely/not/here.csv").unwrap_err();
        assert!(err.to_string().contains("/definitely/not/here.csv"));
    }
}
