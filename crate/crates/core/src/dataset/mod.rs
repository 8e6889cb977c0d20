//! Seeded generators for every dataset kind, plus CSV serialization.

mod io;
mod tort;
mod welfare;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{build_domain, Case, DomainError, DomainId, DomainSchema};

pub use io::{meta_path, read_dataset, write_dataset};
pub use tort::{gen_tort, tort_unique_cases};
pub use welfare::gen_welfare;

pub const GENERATOR_VERSION: &str = concat!("ratlab-", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset kind `{kind}` does not belong to the {domain} domain")]
    KindNotInDomain { domain: DomainId, kind: DatasetKind },
    #[error("dataset kind `{0}` requires a size")]
    SizeRequired(DatasetKind),
    #[error("dataset kind `{0}` is fixed by enumeration and takes no size")]
    SizeForbidden(DatasetKind),
    #[error("size {size} for `{kind}` must be even and positive")]
    BadSize { kind: DatasetKind, size: usize },
    #[error("unknown dataset kind `{0}`")]
    UnknownKind(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: bad metadata: {source}")]
    Meta {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("header does not match the {domain} schema: expected `{expected}`, found `{found}`")]
    HeaderMismatch {
        domain: DomainId,
        expected: String,
        found: String,
    },
    #[error("row {row}: column `{column}` holds non-numeric value `{value}`")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: label `{value}` is not 0 or 1")]
    BadLabel { row: usize, value: String },
    #[error("row {row}: {source}")]
    InvalidCase {
        row: usize,
        #[source]
        source: DomainError,
    },
    #[error("metadata describes a {meta} dataset but the schema is {schema}")]
    MetaDomainMismatch { meta: DomainId, schema: DomainId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DatasetKind {
    #[serde(rename = "type-a")]
    TypeA,
    #[serde(rename = "type-b")]
    TypeB,
    #[serde(rename = "age-gender")]
    AgeGender,
    #[serde(rename = "patient-distance")]
    PatientDistance,
    #[serde(rename = "unique")]
    TortUnique,
    #[serde(rename = "regular")]
    TortRegular,
    #[serde(rename = "unlawfulness")]
    Unlawfulness,
    #[serde(rename = "imputability")]
    Imputability,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 8] = [
        DatasetKind::TypeA,
        DatasetKind::TypeB,
        DatasetKind::AgeGender,
        DatasetKind::PatientDistance,
        DatasetKind::TortUnique,
        DatasetKind::TortRegular,
        DatasetKind::Unlawfulness,
        DatasetKind::Imputability,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetKind::TypeA => "type-a",
            DatasetKind::TypeB => "type-b",
            DatasetKind::AgeGender => "age-gender",
            DatasetKind::PatientDistance => "patient-distance",
            DatasetKind::TortUnique => "unique",
            DatasetKind::TortRegular => "regular",
            DatasetKind::Unlawfulness => "unlawfulness",
            DatasetKind::Imputability => "imputability",
        }
    }

    pub fn is_welfare(self) -> bool {
        matches!(
            self,
            DatasetKind::TypeA
                | DatasetKind::TypeB
                | DatasetKind::AgeGender
                | DatasetKind::PatientDistance
        )
    }

    pub fn belongs_to(self, domain: DomainId) -> bool {
        match domain {
            DomainId::Welfare | DomainId::Simplified => self.is_welfare(),
            DomainId::Tort => !self.is_welfare(),
        }
    }

    /// Kinds whose size is a request parameter.
    pub fn takes_size(self) -> bool {
        matches!(
            self,
            DatasetKind::TypeA | DatasetKind::TypeB | DatasetKind::TortRegular
        )
    }

    /// Dedicated test sets: every condition but one is guaranteed to hold.
    pub fn target_condition(self, domain: DomainId) -> Option<&'static str> {
        match (domain, self) {
            (DomainId::Welfare | DomainId::Simplified, DatasetKind::AgeGender) => Some("C1"),
            (DomainId::Welfare | DomainId::Simplified, DatasetKind::PatientDistance) => Some("C6"),
            (DomainId::Tort, DatasetKind::Unlawfulness) => Some("c3"),
            (DomainId::Tort, DatasetKind::Imputability) => Some("c2"),
            _ => None,
        }
    }

    /// Whether the generated cases ignore the seed entirely.
    pub fn seed_independent(self, domain: DomainId) -> bool {
        match domain {
            DomainId::Tort => self != DatasetKind::TortRegular,
            DomainId::Simplified => !self.takes_size(),
            // full-domain dedicated sets still sample noise and the other
            // substantive features
            DomainId::Welfare => false,
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetKind {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DatasetKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| DatasetError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub domain: DomainId,
    pub kind: DatasetKind,
    pub seed: u64,
    pub generator_version: String,
    pub size: usize,
    pub positive_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub cases: Vec<Case>,
}

impl Dataset {
    /// Wraps labeled cases, deriving size and positive fraction.
    pub fn from_cases(domain: DomainId, kind: DatasetKind, seed: u64, cases: Vec<Case>) -> Self {
        let positives = cases.iter().filter(|c| c.label == Some(true)).count();
        let positive_fraction = if cases.is_empty() {
            0.0
        } else {
            positives as f64 / cases.len() as f64
        };
        Dataset {
            meta: DatasetMeta {
                domain,
                kind,
                seed,
                generator_version: GENERATOR_VERSION.to_string(),
                size: cases.len(),
                positive_fraction,
            },
            cases,
        }
    }

    pub fn domain(&self) -> DomainId {
        self.meta.domain
    }

    pub fn kind(&self) -> DatasetKind {
        self.meta.kind
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.cases.iter().filter(|c| c.label == Some(true)).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorRequest {
    pub domain: DomainId,
    pub kind: DatasetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorRequest {
    pub fn new(domain: DomainId, kind: DatasetKind, size: Option<usize>, seed: u64) -> Self {
        GeneratorRequest {
            domain,
            kind,
            size,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if !self.kind.belongs_to(self.domain) {
            return Err(DatasetError::KindNotInDomain {
                domain: self.domain,
                kind: self.kind,
            });
        }
        match (self.kind.takes_size(), self.size) {
            (true, None) => Err(DatasetError::SizeRequired(self.kind)),
            (false, Some(_)) => Err(DatasetError::SizeForbidden(self.kind)),
            (true, Some(size)) if size == 0 || size % 2 != 0 => Err(DatasetError::BadSize {
                kind: self.kind,
                size,
            }),
            _ => Ok(()),
        }
    }

    /// Short human-readable tag, e.g. `type-b-2400`.
    pub fn label(&self) -> String {
        match self.size {
            Some(size) => format!("{}-{size}", self.kind),
            None => self.kind.to_string(),
        }
    }
}

/// Generates the dataset a request describes.
pub fn generate(req: &GeneratorRequest) -> Result<Dataset, DatasetError> {
    req.validate()?;
    match req.domain {
        DomainId::Welfare | DomainId::Simplified => gen_welfare(
            req.kind,
            req.size,
            req.seed,
            req.domain == DomainId::Simplified,
        ),
        DomainId::Tort => gen_tort(req.kind, req.size, req.seed),
    }
}

fn label_all(schema: &DomainSchema, rows: Vec<Vec<i64>>) -> Vec<Case> {
    rows.into_iter()
        .map(|values| {
            let label = schema.label_unchecked(&values);
            Case::labeled(values, label)
        })
        .collect()
}

pub(crate) fn labeled_dataset(
    domain: DomainId,
    kind: DatasetKind,
    seed: u64,
    rows: Vec<Vec<i64>>,
) -> Dataset {
    let schema = build_domain(domain);
    let stored_seed = if kind.seed_independent(domain) {
        0
    } else {
        seed
    };
    Dataset::from_cases(domain, kind, stored_seed, label_all(&schema, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_validation() {
        let ok = GeneratorRequest::new(DomainId::Tort, DatasetKind::TortUnique, None, 1);
        assert!(ok.validate().is_ok());
        let sized = GeneratorRequest::new(DomainId::Tort, DatasetKind::TortUnique, Some(10), 1);
        assert!(matches!(
            sized.validate(),
            Err(DatasetError::SizeForbidden(_))
        ));
        let unsized_ = GeneratorRequest::new(DomainId::Welfare, DatasetKind::TypeA, None, 1);
        assert!(matches!(
            unsized_.validate(),
            Err(DatasetError::SizeRequired(_))
        ));
        let odd = GeneratorRequest::new(DomainId::Welfare, DatasetKind::TypeB, Some(2401), 1);
        assert!(matches!(odd.validate(), Err(DatasetError::BadSize { .. })));
        let wrong = GeneratorRequest::new(DomainId::Tort, DatasetKind::TypeA, Some(10), 1);
        assert!(matches!(
            wrong.validate(),
            Err(DatasetError::KindNotInDomain { .. })
        ));
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in DatasetKind::ALL {
            assert_eq!(kind.as_str().parse::<DatasetKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.as_str()));
        }
        assert!("type-c".parse::<DatasetKind>().is_err());
    }
}
