use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::clean::CoffeeRecord;
use crate::error::{Error, Result};
use crate::rng;

/// Split of the catalog into reviewed beans and beans whose scores are hidden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetPartition {
    /// Sorted ascending.
    pub reviewed_ids: Vec<usize>,
    /// Sorted ascending.
    pub hidden_ids: Vec<usize>,
    pub m: f64,
    pub seed: u64,
}

/// Number of hidden records for fraction `m` of `n`.
pub fn hidden_count(m: f64, n: usize) -> usize {
    ((m * n as f64).round() as usize).min(n)
}

/// Hides `round(m * n)` records chosen uniformly without replacement.
///
/// Fractions above one half take the tail of the seeded permutation, so
/// `m` and `1 - m` with one seed give complementary hidden sets whenever
/// `m * n` is not a half-integer.
pub fn partition(records: &[CoffeeRecord], m: f64, seed: u64) -> Result<DatasetPartition> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::invalid("m", format!("{m} is outside [0, 1]")));
    }
    let n = records.len();
    let mut order: Vec<usize> = records.iter().map(|r| r.id).collect();
    order.sort_unstable();
    order.shuffle(&mut rng::stream(seed, &[0x7061_7274]));

    let h = hidden_count(m, n);
    let (mut hidden, mut reviewed) = if m <= 0.5 {
        (order[..h].to_vec(), order[h..].to_vec())
    } else {
        (order[n - h..].to_vec(), order[..n - h].to_vec())
    };
    hidden.sort_unstable();
    reviewed.sort_unstable();
    Ok(DatasetPartition {
        reviewed_ids: reviewed,
        hidden_ids: hidden,
        m,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::{synthetic_records, SyntheticConfig};

    fn recs(n: usize) -> Vec<CoffeeRecord> {
        let mut r = synthetic_records(&SyntheticConfig {
            rows: n + 20,
            seed: 1,
            dirty: false,
            ..Default::default()
        });
        r.truncate(n);
        r
    }

    #[test]
    fn edge_fractions() {
        let r = recs(10);
        assert!(partition(&r, 0.0, 1).unwrap().hidden_ids.is_empty());
        assert_eq!(partition(&r, 0.5, 1).unwrap().hidden_ids.len(), 5);
        assert_eq!(partition(&r, 1.0, 1).unwrap().reviewed_ids.len(), 0);
        assert_eq!(partition(&r, 0.5, 9).unwrap(), partition(&r, 0.5, 9).unwrap());
        assert!(partition(&r, 1.5, 1).is_err());
        assert!(partition(&r, -0.1, 1).is_err());
    }

    #[test]
    fn complementary_fractions() {
        let r = recs(37);
        for m in [0.1, 0.2, 0.33, 0.4] {
            let a = partition(&r, m, 4).unwrap();
            let b = partition(&r, 1.0 - m, 4).unwrap();
            assert_eq!(a.hidden_ids, b.reviewed_ids, "m = {m}");
            assert_eq!(a.hidden_ids.len(), hidden_count(m, 37));
        }
    }
}
