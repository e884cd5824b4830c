//! Exact nearest-neighbour queries and the recommendation-accuracy measure.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::space::{DisplayMeta, Provenance, RecommendationSpace};
use crate::error::{Error, Result};
use crate::subjective::{SubjectiveVector, SCORE_MAX};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    /// 1-based.
    pub rank: usize,
    pub bean_id: usize,
    pub distance: f64,
    /// `1 / (1 + distance)`, for display only.
    pub match_score: f64,
    pub provenance: Provenance,
    pub subjective: SubjectiveVector,
    pub meta: DisplayMeta,
}

/// Ids of the `k` entries nearest to `u`, ordered by (distance, id).
pub fn nearest_ids(space: &RecommendationSpace, u: &SubjectiveVector, k: usize) -> Result<Vec<(usize, f64)>> {
    if space.is_empty() {
        return Err(Error::invalid("space", "recommendation space is empty"));
    }
    if k == 0 || k > space.len() {
        return Err(Error::invalid("k", format!("{k} not in [1, {}]", space.len())));
    }
    if let Some((attr, v)) = u.out_of_range(0.0, SCORE_MAX) {
        return Err(Error::invalid("preferences", format!("{} = {v} outside [0, 10]", attr.name())));
    }
    let mut scored: Vec<(f64, usize)> = space
        .entries
        .iter()
        .map(|e| (e.subjective.distance(u), e.bean_id))
        .collect();
    let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, by_key);
        scored.truncate(k);
    }
    scored.sort_unstable_by(by_key);
    Ok(scored.into_iter().map(|(d, id)| (id, d)).collect())
}

/// The `k` nearest beans to the preference vector `u` (components in [0, 10]).
pub fn recommend(space: &RecommendationSpace, u: &SubjectiveVector, k: usize) -> Result<Vec<Recommendation>> {
    let ids = nearest_ids(space, u, k)?;
    Ok(ids
        .into_iter()
        .enumerate()
        .map(|(i, (id, distance))| {
            let e = space.get(id).expect("id taken from the space");
            Recommendation {
                rank: i + 1,
                bean_id: id,
                distance,
                match_score: 1.0 / (1.0 + distance),
                provenance: e.provenance,
                subjective: e.subjective,
                meta: e.meta.clone(),
            }
        })
        .collect())
}

/// `|ground ∩ pred| / k` over bean ids.
pub fn rec_acc(ground: &[usize], pred: &[usize]) -> Result<f64> {
    if ground.len() != pred.len() {
        return Err(Error::Shape(format!(
            "ground list has {} ids, predicted list has {}",
            ground.len(),
            pred.len()
        )));
    }
    if ground.is_empty() {
        return Err(Error::invalid("k", "lists are empty"));
    }
    let g: BTreeSet<usize> = ground.iter().copied().collect();
    let p: BTreeSet<usize> = pred.iter().copied().collect();
    if g.len() != ground.len() || p.len() != pred.len() {
        return Err(Error::invalid("ids", "duplicate id within a list"));
    }
    Ok(g.intersection(&p).count() as f64 / ground.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::{synthetic_records, SyntheticConfig};
    use crate::recommender::space::build_space;

    fn space(n: usize) -> RecommendationSpace {
        let recs = synthetic_records(&SyntheticConfig {
            rows: n,
            seed: 2,
            ..Default::default()
        });
        build_space(&recs, &[], None).unwrap()
    }

    #[test]
    fn exact_hit_first() {
        let s = space(50);
        let target = &s.entries[7];
        let r = recommend(&s, &target.subjective, 1).unwrap();
        assert_eq!(r[0].bean_id, target.bean_id);
        assert_eq!(r[0].distance, 0.0);
        assert_eq!(r[0].match_score, 1.0);
    }

    #[test]
    fn k_equals_size_returns_all() {
        let s = space(25);
        let r = recommend(&s, &SubjectiveVector::splat(7.5), s.len()).unwrap();
        assert_eq!(r.len(), s.len());
        assert!(r.iter().enumerate().all(|(i, x)| x.rank == i + 1));
        assert!(r.windows(2).all(|w| w[0].distance <= w[1].distance));
    }

    #[test]
    fn k_out_of_range() {
        let s = space(10);
        let u = SubjectiveVector::splat(7.0);
        assert!(recommend(&s, &u, 0).is_err());
        assert!(recommend(&s, &u, s.len() + 1).is_err());
    }

    #[test]
    fn query_bounds() {
        let s = space(10);
        assert!(recommend(&s, &SubjectiveVector::splat(0.0), 1).is_ok());
        assert!(recommend(&s, &SubjectiveVector::splat(10.5), 1).is_err());
        assert!(recommend(&s, &SubjectiveVector::splat(-0.1), 1).is_err());
    }

    #[test]
    fn ties_by_id() {
        let s = space(10);
        let mut dup = s.clone();
        // Give every entry the same vector so only ids separate them.
        for e in &mut dup.entries {
            e.subjective = SubjectiveVector::splat(8.0);
        }
        let r = recommend(&dup, &SubjectiveVector::splat(7.0), 4).unwrap();
        let ids: Vec<usize> = r.iter().map(|x| x.bean_id).collect();
        let expected: Vec<usize> = dup.entries.iter().take(4).map(|e| e.bean_id).collect();
        assert_eq!(ids, expected);
    }

    #[test]
    fn rec_acc_cases() {
        assert_eq!(rec_acc(&[1, 2, 3, 4, 5], &[5, 4, 3, 2, 1]).unwrap(), 1.0);
        assert_eq!(rec_acc(&[1, 2, 3, 4, 5], &[6, 7, 8, 9, 10]).unwrap(), 0.0);
        assert!((rec_acc(&[1, 2, 3, 4, 5], &[1, 2, 3, 9, 10]).unwrap() - 0.6).abs() < 1e-15);
        assert!(rec_acc(&[1, 2], &[1]).is_err());
        assert!(rec_acc(&[1, 1], &[1, 2]).is_err());
    }
}
