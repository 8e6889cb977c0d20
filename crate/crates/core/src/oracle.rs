//! Independent ground truth and dataset audits.
//!
//! The label formulas here are transcribed directly over raw feature
//! positions and share no code with [`crate::domain`]; the audit compares
//! the two.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetKind};
use crate::domain::{Case, DomainError, DomainId, DomainSchema};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("dataset belongs to the {dataset} domain but the schema is {schema}")]
    SchemaMismatch { dataset: DomainId, schema: DomainId },
    #[error("row {row}: {source}")]
    InvalidCase {
        row: usize,
        #[source]
        source: DomainError,
    },
    #[error("`{kind}` in the {domain} domain is sampled, not enumerated")]
    NotEnumerated { domain: DomainId, kind: DatasetKind },
}

/// Duty to repair over `[cau, ico, ila, ift, vun, vst, vrt, jus, dmg, prp]`.
pub fn tort_dut(x: &[bool; 10]) -> bool {
    let [cau, ico, ila, ift, vun, vst, vrt, jus, dmg, prp] = *x;
    let causation = cau;
    let imputable = ico || ila || ift;
    let unlawful = vun || (vst && !jus) || (vrt && !jus);
    let damaged = dmg;
    let relative = !(vst && !prp);
    causation && imputable && unlawful && damaged && relative
}

fn pensionable(age: i64, female: bool) -> bool {
    if female {
        age >= 60
    } else {
        age >= 65
    }
}

fn distance_ok(out_patient: bool, distance: i64) -> bool {
    if out_patient {
        distance >= 50
    } else {
        distance < 50
    }
}

/// Eligibility over the 64 full-domain values (noise ignored).
pub fn welfare_eligible(v: &[i64]) -> bool {
    let contributions = v[2..7].iter().filter(|&&c| c == 1).count();
    pensionable(v[0], v[1] == 1)
        && contributions >= 4
        && v[7] == 1
        && v[8] == 0
        && v[9] < 3000
        && distance_ok(v[10] == 1, v[11])
}

/// Eligibility over `[age, gender, type, distance]`.
pub fn simplified_eligible(v: &[i64]) -> bool {
    pensionable(v[0], v[1] == 1) && distance_ok(v[2] == 1, v[3])
}

pub fn oracle_label(domain: DomainId, values: &[i64]) -> bool {
    match domain {
        DomainId::Welfare => welfare_eligible(values),
        DomainId::Simplified => simplified_eligible(values),
        DomainId::Tort => {
            let x: [bool; 10] = std::array::from_fn(|i| values[i] == 1);
            tort_dut(&x)
        }
    }
}

fn tort_assignments() -> impl Iterator<Item = [bool; 10]> {
    (0u32..1 << 10).map(|n| std::array::from_fn(|i| n & (1 << (9 - i)) != 0))
}

/// All 1024 tort cases, oracle-labeled, in lexicographic order.
pub fn enumerate_tort() -> Dataset {
    let cases = tort_assignments()
        .map(|x| Case::labeled(x.iter().map(|&b| i64::from(b)).collect(), tort_dut(&x)))
        .collect();
    Dataset::from_cases(DomainId::Tort, DatasetKind::TortUnique, 0, cases)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedStats {
    pub size: usize,
    pub positives: usize,
    pub positive_fraction: f64,
}

impl ExpectedStats {
    fn new(size: usize, positives: usize) -> Self {
        ExpectedStats {
            size,
            positives,
            positive_fraction: positives as f64 / size as f64,
        }
    }
}

/// Size and label balance of an enumerated dataset kind, counted by
/// enumeration over the oracle formulas.
pub fn expected_stats(domain: DomainId, kind: DatasetKind) -> Result<ExpectedStats, OracleError> {
    let not_enumerated = || OracleError::NotEnumerated { domain, kind };
    if !kind.belongs_to(domain) || kind.takes_size() {
        return Err(not_enumerated());
    }
    let count = |cells: &mut dyn Iterator<Item = bool>| {
        cells.fold((0, 0), |(n, p), label| (n + 1, p + usize::from(label)))
    };
    let (size, positives) = match (domain, kind) {
        (DomainId::Tort, DatasetKind::TortUnique) => {
            count(&mut tort_assignments().map(|x| tort_dut(&x)))
        }
        (DomainId::Tort, DatasetKind::Unlawfulness) => count(
            &mut tort_assignments()
                .filter(|&[cau, ico, ila, ift, _, vst, _, _, dmg, prp]| {
                    cau && (ico || ila || ift) && dmg && !(vst && !prp)
                })
                .map(|x| tort_dut(&x)),
        ),
        (DomainId::Tort, DatasetKind::Imputability) => count(
            &mut tort_assignments()
                .filter(|&[cau, _, _, _, vun, vst, vrt, jus, dmg, prp]| {
                    cau && (vun || (vst && !jus) || (vrt && !jus)) && dmg && !(vst && !prp)
                })
                .map(|x| tort_dut(&x)),
        ),
        (DomainId::Welfare, DatasetKind::AgeGender) => {
            let (cells, pos) = count(
                &mut (1..=20)
                    .flat_map(|k| [false, true].map(move |female| pensionable(5 * k, female))),
            );
            (cells * 1000, pos * 1000)
        }
        (DomainId::Welfare, DatasetKind::PatientDistance) => {
            let (cells, pos) = count(
                &mut (1..=20).flat_map(|k| [false, true].map(move |out| distance_ok(out, 5 * k))),
            );
            (cells * 1000, pos * 1000)
        }
        (DomainId::Simplified, DatasetKind::AgeGender) => {
            let mut cells = Vec::new();
            for age in 0..=100 {
                for female in [false, true] {
                    for k in 0..=20 {
                        let d = 5 * k;
                        // the patient type is chosen so that C6 holds
                        let out = d >= 50;
                        cells.push(simplified_eligible(&[
                            age,
                            i64::from(female),
                            i64::from(out),
                            d,
                        ]));
                    }
                }
            }
            count(&mut cells.into_iter())
        }
        (DomainId::Simplified, DatasetKind::PatientDistance) => {
            let mut cells = Vec::new();
            for k in 0..=20 {
                for out in [false, true] {
                    for age in 0..=100 {
                        for female in [false, true] {
                            if pensionable(age, female) {
                                cells.push(distance_ok(out, 5 * k));
                            }
                        }
                    }
                }
            }
            count(&mut cells.into_iter())
        }
        _ => return Err(not_enumerated()),
    };
    Ok(ExpectedStats::new(size, positives))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub domain: DomainId,
    pub dataset_kind: DatasetKind,
    pub size: usize,
    pub size_ok: bool,
    pub label_mismatches: usize,
    pub mismatched_rows: Vec<usize>,
    pub positive_fraction: f64,
    /// Condition id -> number of negatives failing it.
    pub per_condition_failure_counts: BTreeMap<String, usize>,
    /// k -> number of negatives failing exactly k conditions.
    pub failed_condition_histogram: BTreeMap<usize, usize>,
    pub duplicate_count: usize,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.size_ok && self.label_mismatches == 0
    }

    /// Mean number of failed conditions among negatives.
    pub fn mean_failed_conditions(&self) -> Option<f64> {
        let n: usize = self.failed_condition_histogram.values().sum();
        if n == 0 {
            return None;
        }
        let total: usize = self
            .failed_condition_histogram
            .iter()
            .map(|(k, count)| k * count)
            .sum();
        Some(total as f64 / n as f64)
    }
}

/// Audits a dataset: recomputes every label through the schema, counts
/// per-condition failures among negatives and checks the size against the
/// metadata and, for enumerated kinds, the oracle.
pub fn verify_dataset(
    dataset: &Dataset,
    schema: &DomainSchema,
) -> Result<VerificationReport, OracleError> {
    if dataset.domain() != schema.domain() {
        return Err(OracleError::SchemaMismatch {
            dataset: dataset.domain(),
            schema: schema.domain(),
        });
    }
    let mut mismatched_rows = Vec::new();
    let mut per_condition: BTreeMap<String, usize> = schema
        .conditions()
        .iter()
        .map(|c| (c.id().to_string(), 0))
        .collect();
    let mut histogram = BTreeMap::new();
    let mut positives = 0usize;
    let mut seen = HashSet::with_capacity(dataset.len());
    let mut duplicate_count = 0;

    for (row, case) in dataset.cases.iter().enumerate() {
        schema
            .validate(case)
            .map_err(|source| OracleError::InvalidCase { row, source })?;
        let truth = schema.condition_values(&case.values);
        let label = truth.iter().all(|&t| t);
        if case.label != Some(label) {
            mismatched_rows.push(row);
        }
        if case.label == Some(true) {
            positives += 1;
        }
        if !label {
            let mut failed = 0;
            for (cond, holds) in schema.conditions().iter().zip(&truth) {
                if !holds {
                    *per_condition.get_mut(cond.id()).expect("known id") += 1;
                    failed += 1;
                }
            }
            *histogram.entry(failed).or_insert(0) += 1;
        }
        if !seen.insert(&case.values) {
            duplicate_count += 1;
        }
    }

    let n = dataset.len();
    let mut size_ok = dataset.meta.size == n;
    if let Ok(expected) = expected_stats(dataset.domain(), dataset.kind()) {
        size_ok &= expected.size == n;
    }
    Ok(VerificationReport {
        domain: dataset.domain(),
        dataset_kind: dataset.kind(),
        size: n,
        size_ok,
        label_mismatches: mismatched_rows.len(),
        mismatched_rows,
        positive_fraction: if n == 0 {
            0.0
        } else {
            positives as f64 / n as f64
        },
        per_condition_failure_counts: per_condition,
        failed_condition_histogram: histogram,
        duplicate_count,
    })
}
