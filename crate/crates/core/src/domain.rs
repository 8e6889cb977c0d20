//! Executable encodings of the three knowledge structures.
//!
//! Every domain is a [`DomainSchema`]: an ordered list of features, an
//! ordered list of named conditions, and a label that is the conjunction of
//! all conditions. Cases store one integer per feature in schema order;
//! booleans and two-valued categoricals use the project-wide encodings in
//! [`encoding`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Canonical integer encodings for non-numeric feature values.
pub mod encoding {
    pub const FALSE: i64 = 0;
    pub const TRUE: i64 = 1;
    pub const MALE: i64 = 0;
    pub const FEMALE: i64 = 1;
    pub const IN_PATIENT: i64 = 0;
    pub const OUT_PATIENT: i64 = 1;
}

/// Pensionable age for women.
pub const FEMALE_PENSION_AGE: i64 = 60;
/// Pensionable age for men.
pub const MALE_PENSION_AGE: i64 = 65;
/// Minimum number of paid contributions out of five.
pub const MIN_CONTRIBUTIONS: usize = 4;
/// Capital resources at or above this amount fail C5.
pub const RESOURCE_LIMIT: i64 = 3000;
/// Hospital distance splitting in-patient and out-patient eligibility.
pub const DISTANCE_LIMIT: i64 = 50;
/// Number of noise features in the full welfare domain.
pub const NOISE_FEATURES: usize = 52;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("unknown domain `{0}` (expected welfare, simplified or tort)")]
    UnknownDomain(String),
    #[error("unknown condition `{cond}` in the {domain} domain")]
    UnknownCondition { domain: DomainId, cond: String },
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("case has {got} values but the {domain} schema declares {expected} features")]
    WidthMismatch {
        domain: DomainId,
        expected: usize,
        got: usize,
    },
    #[error("feature `{feature}` has value {value}, outside its declared range {lo}..={hi}")]
    OutOfRange {
        feature: String,
        value: i64,
        lo: i64,
        hi: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainId {
    Welfare,
    Simplified,
    Tort,
}

impl DomainId {
    pub const ALL: [DomainId; 3] = [DomainId::Welfare, DomainId::Simplified, DomainId::Tort];

    pub fn as_str(self) -> &'static str {
        match self {
            DomainId::Welfare => "welfare",
            DomainId::Simplified => "simplified",
            DomainId::Tort => "tort",
        }
    }
}

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DomainId {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "welfare" => Ok(DomainId::Welfare),
            "simplified" => Ok(DomainId::Simplified),
            "tort" => Ok(DomainId::Tort),
            other => Err(DomainError::UnknownDomain(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum FeatureKind {
    Boolean,
    IntegerRange {
        lo: i64,
        hi: i64,
    },
    /// Two named values, encoded as 0 (`v0`) and 1 (`v1`).
    BinaryCategorical {
        v0: String,
        v1: String,
    },
}

impl FeatureKind {
    /// Inclusive encoded range.
    pub fn bounds(&self) -> (i64, i64) {
        match self {
            FeatureKind::Boolean | FeatureKind::BinaryCategorical { .. } => (0, 1),
            FeatureKind::IntegerRange { lo, hi } => (*lo, *hi),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureRole {
    Substantive,
    Noise,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    pub role: FeatureRole,
}

impl FeatureSpec {
    fn boolean(name: &str) -> Self {
        FeatureSpec {
            name: name.to_string(),
            kind: FeatureKind::Boolean,
            role: FeatureRole::Substantive,
        }
    }

    fn range(name: &str, lo: i64, hi: i64, role: FeatureRole) -> Self {
        assert!(lo <= hi, "feature `{name}`: empty range {lo}..={hi}");
        FeatureSpec {
            name: name.to_string(),
            kind: FeatureKind::IntegerRange { lo, hi },
            role,
        }
    }

    fn categorical(name: &str, v0: &str, v1: &str) -> Self {
        assert_ne!(v0, v1, "feature `{name}`: categorical values must differ");
        FeatureSpec {
            name: name.to_string(),
            kind: FeatureKind::BinaryCategorical {
                v0: v0.to_string(),
                v1: v1.to_string(),
            },
            role: FeatureRole::Substantive,
        }
    }

    pub fn bounds(&self) -> (i64, i64) {
        self.kind.bounds()
    }
}

/// A condition formula over the values of its involved features, passed in
/// the order the features are listed in [`Condition::involved_features`].
pub type Formula = fn(&[i64]) -> bool;

/// A named boolean condition. Evaluation hands the formula only the values of
/// the involved features, so a condition cannot depend on anything else.
#[derive(Clone)]
pub struct Condition {
    id: &'static str,
    notion: Option<&'static str>,
    involved: Vec<&'static str>,
    indices: Vec<usize>,
    formula: Formula,
}

impl Condition {
    pub fn id(&self) -> &'static str {
        self.id
    }

    /// Legal notion the condition captures, where one is named.
    pub fn notion(&self) -> Option<&'static str> {
        self.notion
    }

    pub fn involved_features(&self) -> &[&'static str] {
        &self.involved
    }

    /// Schema positions of the involved features.
    pub fn feature_indices(&self) -> &[usize] {
        &self.indices
    }

    /// Evaluates on raw values without range validation.
    pub fn holds(&self, values: &[i64]) -> bool {
        let mut buf = [0i64; 8];
        for (slot, &idx) in buf.iter_mut().zip(&self.indices) {
            *slot = values[idx];
        }
        (self.formula)(&buf[..self.indices.len()])
    }
}

impl fmt::Debug for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Condition")
            .field("id", &self.id)
            .field("notion", &self.notion)
            .field("involved", &self.involved)
            .finish()
    }
}

/// One feature assignment in schema order, with an optional label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Case {
    pub values: Vec<i64>,
    pub label: Option<bool>,
}

impl Case {
    pub fn new(values: Vec<i64>) -> Self {
        Case {
            values,
            label: None,
        }
    }

    pub fn labeled(values: Vec<i64>, label: bool) -> Self {
        Case {
            values,
            label: Some(label),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DomainSchema {
    domain: DomainId,
    features: Vec<FeatureSpec>,
    conditions: Vec<Condition>,
    label_name: &'static str,
}

/// Builds the schema for one of the three domains.
pub fn build_domain(domain: DomainId) -> DomainSchema {
    match domain {
        DomainId::Welfare => welfare_schema(),
        DomainId::Simplified => simplified_schema(),
        DomainId::Tort => tort_schema(),
    }
}

/// Parses a domain name and builds its schema.
pub fn build_domain_named(name: &str) -> Result<DomainSchema, DomainError> {
    Ok(build_domain(name.parse()?))
}

fn c1(v: &[i64]) -> bool {
    let (age, gender) = (v[0], v[1]);
    (gender == encoding::FEMALE && age >= FEMALE_PENSION_AGE)
        || (gender == encoding::MALE && age >= MALE_PENSION_AGE)
}

fn c2(v: &[i64]) -> bool {
    v.iter().filter(|&&paid| paid == encoding::TRUE).count() >= MIN_CONTRIBUTIONS
}

fn c3(v: &[i64]) -> bool {
    v[0] == encoding::TRUE
}

fn c4(v: &[i64]) -> bool {
    v[0] != encoding::TRUE
}

fn c5(v: &[i64]) -> bool {
    !(v[0] >= RESOURCE_LIMIT)
}

fn c6(v: &[i64]) -> bool {
    let (kind, distance) = (v[0], v[1]);
    (kind == encoding::IN_PATIENT && distance < DISTANCE_LIMIT)
        || (kind == encoding::OUT_PATIENT && distance >= DISTANCE_LIMIT)
}

fn welfare_substantive() -> Vec<FeatureSpec> {
    let mut features = vec![
        FeatureSpec::range("age", 0, 100, FeatureRole::Substantive),
        FeatureSpec::categorical("gender", "male", "female"),
    ];
    for i in 1..=5 {
        features.push(FeatureSpec::boolean(&format!("con{i}")));
    }
    features.extend([
        FeatureSpec::boolean("spouse"),
        FeatureSpec::boolean("absent"),
        FeatureSpec::range("resources", 0, 10_000, FeatureRole::Substantive),
        FeatureSpec::categorical("type", "in", "out"),
        FeatureSpec::range("distance", 0, 100, FeatureRole::Substantive),
    ]);
    features
}

type ConditionDecl = (
    &'static str,
    Option<&'static str>,
    &'static [&'static str],
    Formula,
);

const WELFARE_CONDITIONS: [ConditionDecl; 6] = [
    ("C1", Some("age-gender"), &["age", "gender"], c1),
    (
        "C2",
        Some("contributions"),
        &["con1", "con2", "con3", "con4", "con5"],
        c2,
    ),
    ("C3", Some("spouse"), &["spouse"], c3),
    ("C4", Some("residence"), &["absent"], c4),
    ("C5", Some("resources"), &["resources"], c5),
    ("C6", Some("patient-distance"), &["type", "distance"], c6),
];

fn welfare_schema() -> DomainSchema {
    let mut features = welfare_substantive();
    for i in 1..=NOISE_FEATURES {
        features.push(FeatureSpec::range(
            &format!("noise_{i}"),
            0,
            100,
            FeatureRole::Noise,
        ));
    }
    DomainSchema::assemble(DomainId::Welfare, features, &WELFARE_CONDITIONS, "eligible")
}

fn simplified_schema() -> DomainSchema {
    let features = vec![
        FeatureSpec::range("age", 0, 100, FeatureRole::Substantive),
        FeatureSpec::categorical("gender", "male", "female"),
        FeatureSpec::categorical("type", "in", "out"),
        FeatureSpec::range("distance", 0, 100, FeatureRole::Substantive),
    ];
    let conditions = [WELFARE_CONDITIONS[0], WELFARE_CONDITIONS[5]];
    DomainSchema::assemble(DomainId::Simplified, features, &conditions, "eligible")
}

/// Canonical tort feature order.
pub const TORT_FEATURES: [&str; 10] = [
    "cau", "ico", "ila", "ift", "vun", "vst", "vrt", "jus", "dmg", "prp",
];

fn t1(v: &[i64]) -> bool {
    v[0] == 1
}

fn t2(v: &[i64]) -> bool {
    v.iter().any(|&x| x == 1)
}

fn t3(v: &[i64]) -> bool {
    let (vun, vst, vrt, jus) = (v[0] == 1, v[1] == 1, v[2] == 1, v[3] == 1);
    vun || (vst && !jus) || (vrt && !jus)
}

fn t4(v: &[i64]) -> bool {
    v[0] == 1
}

fn t5(v: &[i64]) -> bool {
    let (vst, prp) = (v[0] == 1, v[1] == 1);
    !(vst && !prp)
}

// c2 reads the imputation features and c3 the unlawfulness features; the
// dedicated dataset sizes (168 unlawfulness, 128 imputability) pin this
// association.
const TORT_CONDITIONS: [ConditionDecl; 5] = [
    ("c1", Some("causation"), &["cau"], t1),
    ("c2", Some("imputability"), &["ico", "ila", "ift"], t2),
    (
        "c3",
        Some("unlawfulness"),
        &["vun", "vst", "vrt", "jus"],
        t3,
    ),
    ("c4", Some("damages"), &["dmg"], t4),
    ("c5", Some("statutory-relativity"), &["vst", "prp"], t5),
];

fn tort_schema() -> DomainSchema {
    let features = TORT_FEATURES
        .iter()
        .map(|n| FeatureSpec::boolean(n))
        .collect();
    DomainSchema::assemble(DomainId::Tort, features, &TORT_CONDITIONS, "dut")
}

impl DomainSchema {
    fn assemble(
        domain: DomainId,
        features: Vec<FeatureSpec>,
        decls: &[ConditionDecl],
        label_name: &'static str,
    ) -> Self {
        let conditions = decls
            .iter()
            .map(|&(id, notion, involved, formula)| {
                let indices = involved
                    .iter()
                    .map(|name| {
                        features
                            .iter()
                            .position(|f| f.name == *name)
                            .unwrap_or_else(|| panic!("condition {id}: no feature `{name}`"))
                    })
                    .collect();
                Condition {
                    id,
                    notion,
                    involved: involved.to_vec(),
                    indices,
                    formula,
                }
            })
            .collect();
        DomainSchema {
            domain,
            features,
            conditions,
            label_name,
        }
    }

    pub fn domain(&self) -> DomainId {
        self.domain
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn width(&self) -> usize {
        self.features.len()
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn label_name(&self) -> &'static str {
        self.label_name
    }

    pub fn feature_names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }

    pub fn feature_index(&self, name: &str) -> Result<usize, DomainError> {
        self.features
            .iter()
            .position(|f| f.name == name)
            .ok_or_else(|| DomainError::UnknownFeature(name.to_string()))
    }

    pub fn feature(&self, name: &str) -> Result<&FeatureSpec, DomainError> {
        Ok(&self.features[self.feature_index(name)?])
    }

    pub fn condition(&self, id: &str) -> Result<&Condition, DomainError> {
        self.conditions
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| DomainError::UnknownCondition {
                domain: self.domain,
                cond: id.to_string(),
            })
    }

    pub fn condition_index(&self, id: &str) -> Result<usize, DomainError> {
        self.conditions
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| DomainError::UnknownCondition {
                domain: self.domain,
                cond: id.to_string(),
            })
    }

    pub fn validate_values(&self, values: &[i64]) -> Result<(), DomainError> {
        if values.len() != self.features.len() {
            return Err(DomainError::WidthMismatch {
                domain: self.domain,
                expected: self.features.len(),
                got: values.len(),
            });
        }
        for (feature, &value) in self.features.iter().zip(values) {
            let (lo, hi) = feature.bounds();
            if value < lo || value > hi {
                return Err(DomainError::OutOfRange {
                    feature: feature.name.clone(),
                    value,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    pub fn validate(&self, case: &Case) -> Result<(), DomainError> {
        self.validate_values(&case.values)
    }

    pub fn eval_condition(&self, cond_id: &str, case: &Case) -> Result<bool, DomainError> {
        let cond = self.condition(cond_id)?;
        self.validate(case)?;
        Ok(cond.holds(&case.values))
    }

    pub fn eval_label(&self, case: &Case) -> Result<bool, DomainError> {
        self.validate(case)?;
        Ok(self.label_unchecked(&case.values))
    }

    /// Label of already-validated values.
    pub fn label_unchecked(&self, values: &[i64]) -> bool {
        self.conditions.iter().all(|c| c.holds(values))
    }

    /// Truth value of every condition, in schema order.
    pub fn condition_values(&self, values: &[i64]) -> Vec<bool> {
        self.conditions.iter().map(|c| c.holds(values)).collect()
    }

    /// Number of conditions the values fail.
    pub fn failed_conditions(&self, values: &[i64]) -> usize {
        self.conditions.iter().filter(|c| !c.holds(values)).count()
    }

    /// Lowest in-range assignment; a convenient base for hand-built cases.
    pub fn base_values(&self) -> Vec<i64> {
        self.features.iter().map(|f| f.bounds().0).collect()
    }

    /// Builds values from `(name, value)` pairs over [`Self::base_values`].
    pub fn values_with(&self, assignments: &[(&str, i64)]) -> Result<Vec<i64>, DomainError> {
        let mut values = self.base_values();
        for &(name, value) in assignments {
            values[self.feature_index(name)?] = value;
        }
        self.validate_values(&values)?;
        Ok(values)
    }
}

#[cfg(test)]
mod tests {
    use super::encoding::*;
    use super::*;

    fn welfare_case(assign: &[(&str, i64)]) -> Case {
        let schema = build_domain(DomainId::Welfare);
        Case::new(schema.values_with(assign).unwrap())
    }

    #[test]
    fn schema_shapes() {
        let w = build_domain(DomainId::Welfare);
        assert_eq!(w.width(), 64);
        assert_eq!(w.conditions().len(), 6);
        let noise = w.features().iter().filter(|f| f.role == FeatureRole::Noise);
        assert_eq!(noise.clone().count(), 52);
        assert!(noise.clone().all(|f| f.bounds() == (0, 100)));
        assert_eq!(w.features()[12].name, "noise_1");
        assert_eq!(w.features()[63].name, "noise_52");

        let s = build_domain(DomainId::Simplified);
        let names: Vec<_> = s.feature_names().collect();
        assert_eq!(names, ["age", "gender", "type", "distance"]);
        let ids: Vec<_> = s.conditions().iter().map(|c| c.id()).collect();
        assert_eq!(ids, ["C1", "C6"]);

        let t = build_domain(DomainId::Tort);
        assert_eq!(t.width(), 10);
        assert_eq!(t.conditions().len(), 5);
        assert!(t.features().iter().all(|f| f.kind == FeatureKind::Boolean));
        assert_eq!(t.label_name(), "dut");
    }

    #[test]
    fn unknown_domain_is_rejected() {
        let err = build_domain_named("contract").unwrap_err();
        assert_eq!(err, DomainError::UnknownDomain("contract".into()));
        assert!(err.to_string().contains("contract"));
    }

    #[test]
    fn involved_features_match_formulas() {
        let w = build_domain(DomainId::Welfare);
        assert_eq!(
            w.condition("C1").unwrap().involved_features(),
            ["age", "gender"]
        );
        assert_eq!(
            w.condition("C6").unwrap().involved_features(),
            ["type", "distance"]
        );
        let t = build_domain(DomainId::Tort);
        assert_eq!(
            t.condition("c5").unwrap().involved_features(),
            ["vst", "prp"]
        );
        assert_eq!(
            t.condition("c3").unwrap().involved_features(),
            ["vun", "vst", "vrt", "jus"]
        );
    }

    #[test]
    fn only_c3_and_c5_share_a_feature() {
        for domain in DomainId::ALL {
            let schema = build_domain(domain);
            let conds = schema.conditions();
            for (i, a) in conds.iter().enumerate() {
                for b in &conds[i + 1..] {
                    let shared: Vec<_> = a
                        .involved_features()
                        .iter()
                        .filter(|f| b.involved_features().contains(f))
                        .collect();
                    if domain == DomainId::Tort && a.id() == "c3" && b.id() == "c5" {
                        assert_eq!(shared, [&"vst"]);
                    } else {
                        assert!(
                            shared.is_empty(),
                            "{} and {} share {shared:?}",
                            a.id(),
                            b.id()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn c1_thresholds() {
        let w = build_domain(DomainId::Welfare);
        let f60 = welfare_case(&[("gender", FEMALE), ("age", 60)]);
        assert!(w.eval_condition("C1", &f60).unwrap());
        let f59 = welfare_case(&[("gender", FEMALE), ("age", 59)]);
        assert!(!w.eval_condition("C1", &f59).unwrap());
        let m64 = welfare_case(&[("gender", MALE), ("age", 64)]);
        assert!(!w.eval_condition("C1", &m64).unwrap());
        let m65 = welfare_case(&[("gender", MALE), ("age", 65)]);
        assert!(w.eval_condition("C1", &m65).unwrap());
    }

    #[test]
    fn c2_counts_paid_contributions() {
        let w = build_domain(DomainId::Welfare);
        let four = welfare_case(&[("con1", 1), ("con2", 1), ("con3", 1), ("con5", 1)]);
        assert!(w.eval_condition("C2", &four).unwrap());
        let three = welfare_case(&[("con1", 1), ("con2", 1), ("con3", 1)]);
        assert!(!w.eval_condition("C2", &three).unwrap());
    }

    #[test]
    fn c5_and_c6_boundaries() {
        let w = build_domain(DomainId::Welfare);
        let r = |v| welfare_case(&[("resources", v)]);
        assert!(w.eval_condition("C5", &r(2999)).unwrap());
        assert!(!w.eval_condition("C5", &r(3000)).unwrap());

        let d = |t, v| welfare_case(&[("type", t), ("distance", v)]);
        assert!(w.eval_condition("C6", &d(OUT_PATIENT, 50)).unwrap());
        assert!(!w.eval_condition("C6", &d(OUT_PATIENT, 49)).unwrap());
        assert!(w.eval_condition("C6", &d(IN_PATIENT, 49)).unwrap());
        assert!(!w.eval_condition("C6", &d(IN_PATIENT, 50)).unwrap());
    }

    #[test]
    fn tort_formulas() {
        let t = build_domain(DomainId::Tort);
        let case = |assign: &[(&str, i64)]| Case::new(t.values_with(assign).unwrap());
        assert!(!t
            .eval_condition("c5", &case(&[("vst", 1), ("prp", 0)]))
            .unwrap());
        assert!(t
            .eval_condition("c5", &case(&[("vst", 1), ("prp", 1)]))
            .unwrap());

        // c3 holds through vun; vst is false so c5 holds.
        let x = case(&[("cau", 1), ("ift", 1), ("vun", 1), ("dmg", 1)]);
        assert!(t.eval_label(&x).unwrap());
        let no_damage = case(&[("cau", 1), ("ift", 1), ("vun", 1)]);
        assert!(!t.eval_label(&no_damage).unwrap());
        assert!(!t.eval_label(&case(&[])).unwrap());
    }

    #[test]
    fn welfare_label_is_conjunction() {
        let w = build_domain(DomainId::Welfare);
        let eligible = welfare_case(&[
            ("age", 70),
            ("gender", MALE),
            ("con1", 1),
            ("con2", 1),
            ("con3", 1),
            ("con4", 1),
            ("spouse", 1),
            ("absent", 0),
            ("resources", 100),
            ("type", OUT_PATIENT),
            ("distance", 80),
        ]);
        assert!(w.eval_label(&eligible).unwrap());
        assert_eq!(w.failed_conditions(&eligible.values), 0);
    }

    #[test]
    fn validation_names_the_feature() {
        let w = build_domain(DomainId::Welfare);
        let mut values = w.base_values();
        values[w.feature_index("resources").unwrap()] = 10_001;
        let err = w.eval_condition("C5", &Case::new(values)).unwrap_err();
        assert!(matches!(&err, DomainError::OutOfRange { feature, .. } if feature == "resources"));

        let err = w.eval_label(&Case::new(vec![0; 3])).unwrap_err();
        assert!(matches!(
            err,
            DomainError::WidthMismatch {
                expected: 64,
                got: 3,
                ..
            }
        ));

        let t = build_domain(DomainId::Tort);
        let err = t.eval_condition("C1", &Case::new(vec![0; 10])).unwrap_err();
        assert!(matches!(err, DomainError::UnknownCondition { .. }));
    }
}
