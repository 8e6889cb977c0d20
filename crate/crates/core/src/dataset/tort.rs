//! Tort law generators.

use rand::seq::SliceRandom;

use super::{labeled_dataset, Dataset, DatasetError, DatasetKind, GeneratorRequest};
use crate::domain::{build_domain, DomainId};
use crate::seed::{rng, Rng};

/// All 2^10 assignments in lexicographic order, first feature most
/// significant.
pub fn tort_unique_cases() -> Vec<Vec<i64>> {
    (0u32..1024)
        .map(|code| {
            (0..10)
                .map(|bit| i64::from((code >> (9 - bit)) & 1))
                .collect()
        })
        .collect()
}

/// Draws `count` cases from `pool` so that every case appears either
/// `floor(count / len)` or one more time: whole copies of the pool, topped up
/// with a sample taken without replacement.
fn equal_representation(pool: &[Vec<i64>], count: usize, rng: &mut Rng) -> Vec<Vec<i64>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count / pool.len() {
        out.extend_from_slice(pool);
    }
    out.extend(pool.choose_multiple(rng, count % pool.len()).cloned());
    out
}

/// Generates a tort dataset. Only `TortRegular` is stochastic and takes a
/// size.
pub fn gen_tort(
    kind: DatasetKind,
    size: Option<usize>,
    seed: u64,
) -> Result<Dataset, DatasetError> {
    GeneratorRequest::new(DomainId::Tort, kind, size, seed).validate()?;
    let schema = build_domain(DomainId::Tort);
    let unique = tort_unique_cases();
    let rows = match kind {
        DatasetKind::TortUnique => unique,
        DatasetKind::TortRegular => {
            let half = size.expect("validated") / 2;
            let (pos, neg): (Vec<_>, Vec<_>) =
                unique.into_iter().partition(|v| schema.label_unchecked(v));
            let mut rng = rng(seed);
            let mut rows = Vec::with_capacity(2 * half);
            for pool in [&pos, &neg] {
                rows.extend(equal_representation(pool, half, &mut rng));
            }
            rows.shuffle(&mut rng);
            rows
        }
        DatasetKind::Unlawfulness | DatasetKind::Imputability => {
            // the subset of unique cases where every non-target condition holds
            let target = kind
                .target_condition(DomainId::Tort)
                .expect("dedicated kind");
            let others: Vec<_> = schema
                .conditions()
                .iter()
                .filter(|c| c.id() != target)
                .collect();
            unique
                .into_iter()
                .filter(|v| others.iter().all(|c| c.holds(v)))
                .collect()
        }
        _ => unreachable!("validated tort kind"),
    };
    Ok(labeled_dataset(DomainId::Tort, kind, seed, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn unique_is_lexicographic_and_complete() {
        let rows = tort_unique_cases();
        assert_eq!(rows[0], vec![0; 10]);
        assert_eq!(rows[1], vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(rows[1023], vec![1; 10]);
        assert_eq!(rows.iter().collect::<HashSet<_>>().len(), 1024);
    }

    #[test]
    fn published_counts() {
        let unique = gen_tort(DatasetKind::TortUnique, None, 0).unwrap();
        assert_eq!((unique.len(), unique.positives()), (1024, 112));
        let unl = gen_tort(DatasetKind::Unlawfulness, None, 0).unwrap();
        assert_eq!((unl.len(), unl.positives()), (168, 112));
        let imp = gen_tort(DatasetKind::Imputability, None, 0).unwrap();
        assert_eq!((imp.len(), imp.positives()), (128, 112));
    }

    #[test]
    fn dedicated_labels_follow_the_target() {
        let schema = build_domain(DomainId::Tort);
        for (kind, target) in [
            (DatasetKind::Unlawfulness, "c3"),
            (DatasetKind::Imputability, "c2"),
        ] {
            let d = gen_tort(kind, None, 0).unwrap();
            let cond = schema.condition(target).unwrap();
            assert!(d
                .cases
                .iter()
                .all(|c| c.label == Some(cond.holds(&c.values))));
        }
    }

    #[test]
    fn regular_is_balanced_and_seeded() {
        let d = gen_tort(DatasetKind::TortRegular, Some(5000), 11).unwrap();
        assert_eq!((d.len(), d.positives()), (5000, 2500));
        assert_eq!(
            d,
            gen_tort(DatasetKind::TortRegular, Some(5000), 11).unwrap()
        );
        assert_ne!(
            d,
            gen_tort(DatasetKind::TortRegular, Some(5000), 12).unwrap()
        );
    }

    #[test]
    fn regular_sets_represent_cases_equally() {
        use std::collections::HashMap;
        let d = gen_tort(DatasetKind::TortRegular, Some(500), 4).unwrap();
        let mut counts: HashMap<&Vec<i64>, usize> = HashMap::new();
        for c in &d.cases {
            *counts.entry(&c.values).or_default() += 1;
        }
        // all 112 positives plus 250 distinct negatives: 362 of 1024
        assert_eq!(counts.len(), 362);
        let schema = build_domain(DomainId::Tort);
        for (values, n) in counts {
            if schema.label_unchecked(values) {
                assert!(n == 2 || n == 3);
            } else {
                assert_eq!(n, 1);
            }
        }
    }

    #[test]
    fn enumerated_ignore_seed() {
        let a = gen_tort(DatasetKind::Imputability, None, 1).unwrap();
        let b = gen_tort(DatasetKind::Imputability, None, 2).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.meta.seed, 0);
    }
}
