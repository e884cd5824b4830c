//! Synthetic reviews in the 44-column layout of the scraped CQI export.
//!
//! Used for tests, demos and benchmarks when the real export is not at hand.
//! Scores are driven by a latent quality that depends on origin, region,
//! variety, processing and defects, plus per-attribute noise, and are
//! quantized like cupping sheets. A small share of rows is deliberately
//! dirty (missing cells, zero scores, percent moisture).

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use super::clean::{clean, CoffeeRecord};
use super::raw::{read_reviews, RawReview};
use crate::rng;

/// Header of the scraped CQI export (leading unnamed index column included).
pub const CQI_HEADER: [&str; 44] = [
    "",
    "Species",
    "Owner",
    "Country.of.Origin",
    "Farm.Name",
    "Lot.Number",
    "Mill",
    "ICO.Number",
    "Company",
    "Altitude",
    "Region",
    "Producer",
    "Number.of.Bags",
    "Bag.Weight",
    "In.Country.Partner",
    "Harvest.Year",
    "Grading.Date",
    "Owner.1",
    "Variety",
    "Processing.Method",
    "Aroma",
    "Flavor",
    "Aftertaste",
    "Acidity",
    "Body",
    "Balance",
    "Uniformity",
    "Clean.Cup",
    "Sweetness",
    "Cupper.Points",
    "Total.Cup.Points",
    "Moisture",
    "Category.One.Defects",
    "Quakers",
    "Color",
    "Category.Two.Defects",
    "Expiration",
    "Certification.Body",
    "Certification.Address",
    "Certification.Contact",
    "unit_of_measurement",
    "altitude_low_meters",
    "altitude_high_meters",
    "altitude_mean_meters",
];

#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub rows: usize,
    pub seed: u64,
    pub robusta_fraction: f64,
    /// Inject missing cells and invalid rows.
    pub dirty: bool,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            rows: 1340,
            seed: 0,
            robusta_fraction: 28.0 / 1340.0,
            dirty: true,
        }
    }
}

struct Origin {
    country: &'static str,
    weight: f64,
    quality: f64,
    regions: &'static [&'static str],
    varieties: &'static [&'static str],
}

const ORIGINS: &[Origin] = &[
    Origin { country: "Mexico", weight: 236.0, quality: -0.12, regions: &["chiapas", "veracruz", "oaxaca", "puebla", "guerrero"], varieties: &["Typica", "Bourbon", "Caturra", "Mundo Novo"] },
    Origin { country: "Colombia", weight: 183.0, quality: 0.08, regions: &["huila", "antioquia", "cauca", "narino", "tolima", "quindio"], varieties: &["Caturra", "Castillo", "Colombia", "Typica"] },
    Origin { country: "Guatemala", weight: 181.0, quality: -0.02, regions: &["antigua", "huehuetenango", "atitlan", "coban", "acatenango"], varieties: &["Bourbon", "Caturra", "Catuai", "Pache Comun"] },
    Origin { country: "Brazil", weight: 132.0, quality: 0.0, regions: &["sul de minas", "cerrado", "mogiana", "matas de minas"], varieties: &["Yellow Bourbon", "Mundo Novo", "Catuai", "Bourbon"] },
    Origin { country: "Taiwan", weight: 75.0, quality: -0.05, regions: &["alishan", "nantou", "yunlin", "chiayi"], varieties: &["Typica", "Bourbon", "Catimor"] },
    Origin { country: "United States (Hawaii)", weight: 73.0, quality: -0.1, regions: &["kona", "kau", "maui"], varieties: &["Typica", "Other"] },
    Origin { country: "Honduras", weight: 53.0, quality: -0.15, regions: &["marcala", "copan", "santa barbara", "ocotepeque"], varieties: &["Catuai", "Caturra", "Parainema"] },
    Origin { country: "Costa Rica", weight: 51.0, quality: 0.1, regions: &["tarrazu", "west valley", "central valley"], varieties: &["Caturra", "Catuai", "Villa Sarchi"] },
    Origin { country: "Ethiopia", weight: 44.0, quality: 0.45, regions: &["yirgacheffe", "sidamo", "guji", "limu", "jimma"], varieties: &["Ethiopian Heirlooms", "Other"] },
    Origin { country: "Tanzania", weight: 40.0, quality: 0.0, regions: &["kilimanjaro", "arusha", "mbeya"], varieties: &["Bourbon", "Kent", "Other"] },
    Origin { country: "Uganda", weight: 36.0, quality: 0.05, regions: &["mt elgon", "rwenzori", "bugisu"], varieties: &["SL14", "SL28", "Other"] },
    Origin { country: "Thailand", weight: 32.0, quality: -0.05, regions: &["chiang mai", "chiang rai"], varieties: &["Catimor", "Other"] },
    Origin { country: "Nicaragua", weight: 26.0, quality: -0.2, regions: &["jinotega", "matagalpa", "nueva segovia"], varieties: &["Caturra", "Catuai"] },
    Origin { country: "Kenya", weight: 25.0, quality: 0.35, regions: &["nyeri", "kirinyaga", "kiambu"], varieties: &["SL28", "SL34", "Ruiru 11"] },
    Origin { country: "El Salvador", weight: 21.0, quality: 0.02, regions: &["santa ana", "chalatenango"], varieties: &["Bourbon", "Pacas"] },
    Origin { country: "Indonesia", weight: 20.0, quality: 0.0, regions: &["sumatra", "java", "sulawesi"], varieties: &["Typica", "Catimor", "Other"] },
    Origin { country: "China", weight: 16.0, quality: 0.05, regions: &["yunnan", "pu'er"], varieties: &["Catimor"] },
    Origin { country: "Peru", weight: 10.0, quality: 0.03, regions: &["cajamarca", "junin"], varieties: &["Typica", "Caturra"] },
];

const ROBUSTA_ORIGINS: &[(&str, &[&str])] = &[
    ("India", &["chikmagalur", "coorg", "wayanad"]),
    ("Uganda", &["masaka", "bushenyi"]),
    ("Vietnam", &["dak lak", "lam dong"]),
];

const PROCESSING: &[(&str, f64, f64)] = &[
    ("Washed / Wet", 0.67, 0.0),
    ("Natural / Dry", 0.22, 0.06),
    ("Semi-washed / Semi-pulped", 0.05, -0.03),
    ("Pulped natural / honey", 0.02, 0.05),
    ("Other", 0.04, -0.02),
];

const COLORS: &[(&str, f64)] = &[("Green", 0.75), ("Bluish-Green", 0.11), ("Blue-Green", 0.07), ("None", 0.07)];

/// Base, loading on latent quality and noise sd, per canonical attribute.
const ATTRIBUTE_MODEL: [(f64, f64, f64); 8] = [
    (7.57, 0.85, 0.22), // aroma
    (7.52, 1.00, 0.17), // flavour
    (7.52, 0.75, 0.21), // body
    (0.0, 0.0, 0.0),    // sweetness, handled separately
    (7.54, 0.85, 0.20), // acidity
    (7.52, 0.95, 0.21), // balance
    (0.0, 0.0, 0.0),    // uniformity, handled separately
    (7.40, 1.00, 0.19), // aftertaste
];

fn pick_weighted<'a, T>(r: &mut rng::Rng, items: &'a [T], weight: impl Fn(&T) -> f64) -> &'a T {
    let total: f64 = items.iter().map(&weight).sum();
    let mut x = r.random::<f64>() * total;
    for it in items {
        x -= weight(it);
        if x < 0.0 {
            return it;
        }
    }
    items.last().expect("non-empty")
}

fn pick<'a, T>(r: &mut rng::Rng, items: &'a [T]) -> &'a T {
    &items[r.random_range(0..items.len())]
}

/// Cupping sheets use quarter and twelfth point steps; keep two decimals.
fn quantize(v: f64) -> f64 {
    let q = (v * 12.0).round() / 12.0;
    ((q * 100.0).round() / 100.0).clamp(5.0, 10.0)
}

fn cup_score(r: &mut rng::Rng, quality: f64) -> f64 {
    // Cups lost: more likely for lower-quality lots.
    let p = (0.04 - 0.08 * quality).clamp(0.005, 0.25);
    let mut lost = 0;
    for _ in 0..5 {
        if r.random::<f64>() < p {
            lost += 1;
        }
    }
    10.0 - 2.0 * lost as f64 + if lost > 0 && r.random::<f64>() < 0.3 { 0.67 } else { 0.0 }
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

/// Generates the data rows (without header) as CSV cell vectors.
fn synthetic_rows(cfg: &SyntheticConfig) -> Vec<Vec<String>> {
    let mut r = rng::stream(cfg.seed, &[0x5157]);
    let noise = Normal::<f64>::new(0.0, 1.0).expect("valid normal");
    let region_effect = |country: &str, region: &str| -> f64 {
        // Stable pseudo-random effect per (country, region).
        let h = rng::derive_seed(0x4E61, &[country.len() as u64, region.bytes().map(u64::from).sum()]);
        ((h % 1000) as f64 / 1000.0 - 0.5) * 0.3
    };
    let variety_effect = |variety: &str| -> f64 {
        let h = rng::derive_seed(0x7661, &[variety.bytes().map(u64::from).sum()]);
        ((h % 1000) as f64 / 1000.0 - 0.5) * 0.16
    };

    let mut rows = Vec::with_capacity(cfg.rows);
    for i in 0..cfg.rows {
        let robusta = r.random::<f64>() < cfg.robusta_fraction;
        let (country, region, variety, mut quality) = if robusta {
            let (c, regions) = pick(&mut r, ROBUSTA_ORIGINS);
            (c.to_string(), pick(&mut r, regions).to_string(), String::new(), -0.05)
        } else {
            let o = pick_weighted(&mut r, ORIGINS, |o| o.weight);
            (
                o.country.to_string(),
                pick(&mut r, o.regions).to_string(),
                pick(&mut r, o.varieties).to_string(),
                o.quality,
            )
        };
        let (process, _, process_q) = *pick_weighted(&mut r, PROCESSING, |p| p.1);
        let (color, _) = *pick_weighted(&mut r, COLORS, |c| c.1);
        let cat_one = if r.random::<f64>() < 0.7 { 0 } else { r.random_range(1..6) };
        let cat_two = (noise.sample(&mut r).abs() * 4.0).floor() as u32;
        let moisture = if r.random::<f64>() < 0.18 {
            0.0
        } else {
            ((0.10 + 0.015 * noise.sample(&mut r)).clamp(0.0, 0.28) * 100.0).round() / 100.0
        };
        let altitude = (1300.0 + 400.0 * noise.sample(&mut r)).max(10.0).round();

        quality += region_effect(&country, &region) + variety_effect(&variety) + process_q;
        quality -= 0.03 * cat_one as f64 + 0.012 * cat_two as f64;
        if moisture == 0.0 {
            quality -= 0.05;
        }
        quality += 0.22 * noise.sample(&mut r);

        let mut scores = [0.0; 8];
        for (j, &(base, load, sd)) in ATTRIBUTE_MODEL.iter().enumerate() {
            scores[j] = match j {
                3 | 6 => cup_score(&mut r, quality),
                _ => quantize(base + load * quality + sd * noise.sample(&mut r)),
            };
        }

        let mut region_cell = region.clone();
        let mut variety_cell = variety.clone();
        let mut color_cell = color.to_string();
        let mut process_cell = if robusta && r.random::<f64>() < 0.6 {
            String::new()
        } else {
            process.to_string()
        };
        let mut moisture_cell = fmt_num(moisture);
        if cfg.dirty {
            if r.random::<f64>() < 0.04 {
                region_cell.clear();
            }
            if r.random::<f64>() < 0.14 {
                variety_cell.clear();
            }
            if r.random::<f64>() < 0.16 {
                color_cell.clear();
            }
            if r.random::<f64>() < 0.08 {
                process_cell.clear();
            }
            if r.random::<f64>() < 0.004 {
                moisture_cell.clear();
            }
            if r.random::<f64>() < 0.004 {
                moisture_cell = fmt_num((moisture * 100.0).round());
            }
            if r.random::<f64>() < 0.002 {
                scores = [0.0; 8];
            }
            if r.random::<f64>() < 0.002 {
                scores[r.random_range(0..8)] = 0.0;
            }
        }

        // Source column order differs from canonical attribute order.
        let [aroma, flavour, body, sweetness, acidity, balance, uniformity, aftertaste] = scores;
        let clean_cup = cup_score(&mut r, quality);
        let cupper = quantize(7.5 + quality + 0.25 * noise.sample(&mut r));
        let total = aroma + flavour + aftertaste + acidity + body + balance + uniformity + clean_cup + sweetness + cupper;
        let species = if robusta { "Robusta" } else { "Arabica" };
        let row = vec![
            (i + 1).to_string(),
            species.to_string(),
            format!("owner {}", i % 97),
            country.clone(),
            format!("farm {}", i % 211),
            String::new(),
            format!("mill {}", i % 53),
            String::new(),
            format!("exporter {}", i % 31),
            format!("{altitude}"),
            region_cell,
            format!("producer {}", i % 173),
            format!("{}", 1 + i % 300),
            "60 kg".to_string(),
            "Specialty Coffee Association".to_string(),
            format!("{}", 2010 + i % 8),
            "April 4th, 2015".to_string(),
            format!("owner {}", i % 97),
            variety_cell,
            process_cell,
            fmt_num(aroma),
            fmt_num(flavour),
            fmt_num(aftertaste),
            fmt_num(acidity),
            fmt_num(body),
            fmt_num(balance),
            fmt_num(uniformity),
            fmt_num(clean_cup),
            fmt_num(sweetness),
            fmt_num(cupper),
            fmt_num((total * 100.0).round() / 100.0),
            moisture_cell,
            cat_one.to_string(),
            "0".to_string(),
            color_cell,
            cat_two.to_string(),
            "April 3rd, 2016".to_string(),
            "Specialty Coffee Association".to_string(),
            String::new(),
            String::new(),
            "m".to_string(),
            format!("{altitude}"),
            format!("{altitude}"),
            format!("{altitude}"),
        ];
        rows.push(row);
    }
    rows
}

/// The synthetic table as CSV text, header included.
pub fn synthetic_csv(cfg: &SyntheticConfig) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CQI_HEADER).expect("in-memory write");
    for row in synthetic_rows(cfg) {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn synthetic_raw(cfg: &SyntheticConfig) -> Vec<RawReview> {
    read_reviews(synthetic_csv(cfg).as_bytes()).expect("synthetic CSV is well-formed")
}

pub fn synthetic_records(cfg: &SyntheticConfig) -> Vec<CoffeeRecord> {
    clean(&synthetic_raw(cfg)).0
}
