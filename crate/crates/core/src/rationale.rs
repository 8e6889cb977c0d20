//! Rationale evaluation: accuracy, mean-output curves on dedicated sets,
//! turning points and condition tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{generate, Dataset, DatasetError, DatasetKind, GeneratorRequest};
use crate::domain::{build_domain, DomainError, DomainId, DomainSchema, FeatureKind};
use crate::nn::{NnError, Scalar, TrainedModel};
use crate::oracle::oracle_label;

#[derive(Debug, thiserror::Error)]
pub enum RationaleError {
    #[error("model is bound to the {model} domain but the dataset belongs to {data}")]
    DomainMismatch { model: DomainId, data: DomainId },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Model(#[from] NnError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("feature `{0}` is not numeric")]
    NonNumeric(String),
    #[error("feature `{0}` is not binary")]
    NotBinary(String),
    #[error("dataset has unlabeled cases")]
    Unlabeled,
    #[error("dataset is empty")]
    Empty,
    #[error("no ideal curve for condition `{0}`")]
    UnsupportedCondition(String),
    #[error("condition `{0}` takes a single truth value throughout the dataset")]
    ConditionConstant(String),
    #[error("dataset targets condition `{target}`, not `{requested}`")]
    WrongTarget { target: String, requested: String },
    #[error("curve grids differ: {0}")]
    GridMismatch(String),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Anything that maps raw case values to an output in `[0, 1]`.
pub trait Classifier: Sync {
    fn domain(&self) -> DomainId;

    fn output(&self, raw: &[i64]) -> Result<f64, RationaleError>;

    fn outputs(&self, rows: &[&[i64]]) -> Result<Vec<f64>, RationaleError> {
        rows.iter().map(|r| self.output(r)).collect()
    }

    fn predict(&self, raw: &[i64]) -> Result<bool, RationaleError> {
        Ok(self.output(raw)? >= 0.5)
    }
}

impl<T: Scalar> Classifier for TrainedModel<T> {
    fn domain(&self) -> DomainId {
        self.domain
    }

    fn output(&self, raw: &[i64]) -> Result<f64, RationaleError> {
        Ok(self.forward(raw)?.to_f64().expect("finite output"))
    }

    fn outputs(&self, rows: &[&[i64]]) -> Result<Vec<f64>, RationaleError> {
        Ok(self.forward_many(rows.iter().copied())?)
    }
}

fn check_width(domain: DomainId, raw: &[i64]) -> Result<(), RationaleError> {
    let expected = build_domain(domain).width();
    if raw.len() != expected {
        return Err(DomainError::WidthMismatch {
            domain,
            expected,
            got: raw.len(),
        }
        .into());
    }
    Ok(())
}

/// Outputs 1 exactly when the independent oracle labels a case positive.
#[derive(Debug, Clone, Copy)]
pub struct OracleStub(pub DomainId);

impl Classifier for OracleStub {
    fn domain(&self) -> DomainId {
        self.0
    }

    fn output(&self, raw: &[i64]) -> Result<f64, RationaleError> {
        check_width(self.0, raw)?;
        Ok(if oracle_label(self.0, raw) { 1.0 } else { 0.0 })
    }
}

/// Outputs the same value for every case.
#[derive(Debug, Clone, Copy)]
pub struct ConstantStub {
    pub domain: DomainId,
    pub value: f64,
}

impl Classifier for ConstantStub {
    fn domain(&self) -> DomainId {
        self.domain
    }

    fn output(&self, raw: &[i64]) -> Result<f64, RationaleError> {
        check_width(self.domain, raw)?;
        Ok(self.value)
    }
}

/// Outputs the truth value of a single condition.
#[derive(Debug, Clone)]
pub struct ConditionStub {
    schema: DomainSchema,
    index: usize,
}

impl ConditionStub {
    pub fn new(domain: DomainId, condition: &str) -> Result<Self, RationaleError> {
        let schema = build_domain(domain);
        let index = schema.condition_index(condition)?;
        Ok(ConditionStub { schema, index })
    }
}

impl Classifier for ConditionStub {
    fn domain(&self) -> DomainId {
        self.schema.domain()
    }

    fn output(&self, raw: &[i64]) -> Result<f64, RationaleError> {
        self.schema.validate_values(raw)?;
        let holds = self.schema.conditions()[self.index].holds(raw);
        Ok(if holds { 1.0 } else { 0.0 })
    }
}

fn dataset_outputs(model: &dyn Classifier, dataset: &Dataset) -> Result<Vec<f64>, RationaleError> {
    if model.domain() != dataset.domain() {
        return Err(RationaleError::DomainMismatch {
            model: model.domain(),
            data: dataset.domain(),
        });
    }
    let rows: Vec<&[i64]> = dataset.cases.iter().map(|c| c.values.as_slice()).collect();
    model.outputs(&rows)
}

/// Fraction of cases whose thresholded output matches the stored label.
pub fn accuracy(model: &dyn Classifier, dataset: &Dataset) -> Result<f64, RationaleError> {
    if dataset.is_empty() {
        return Err(RationaleError::Empty);
    }
    let outputs = dataset_outputs(model, dataset)?;
    let mut correct = 0usize;
    for (o, case) in outputs.iter().zip(&dataset.cases) {
        let label = case.label.ok_or(RationaleError::Unlabeled)?;
        if (*o >= 0.5) == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: i64,
    pub mean_output: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveGroup {
    /// Encoded value of the group feature.
    pub group: i64,
    /// Display name, e.g. `female` or `in`.
    pub label: String,
    /// Ordered by strictly increasing `x`.
    pub points: Vec<CurvePoint>,
}

/// Mean output per `(group, x)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationaleCurve {
    pub x_feature: String,
    pub group_feature: String,
    pub groups: Vec<CurveGroup>,
}

fn group_labels(schema: &DomainSchema, feature: &str) -> Result<[String; 2], RationaleError> {
    match &schema.feature(feature)?.kind {
        FeatureKind::Boolean => Ok(["false".into(), "true".into()]),
        FeatureKind::BinaryCategorical { v0, v1 } => Ok([v0.clone(), v1.clone()]),
        FeatureKind::IntegerRange { .. } => Err(RationaleError::NotBinary(feature.into())),
    }
}

fn curve_axes(
    schema: &DomainSchema,
    x_feature: &str,
    group_feature: &str,
) -> Result<(usize, usize, [String; 2]), RationaleError> {
    let xi = schema.feature_index(x_feature)?;
    if !matches!(schema.features()[xi].kind, FeatureKind::IntegerRange { .. }) {
        return Err(RationaleError::NonNumeric(x_feature.into()));
    }
    let gi = schema.feature_index(group_feature)?;
    Ok((xi, gi, group_labels(schema, group_feature)?))
}

fn build_curve(
    x_feature: &str,
    group_feature: &str,
    labels: [String; 2],
    cells: BTreeMap<(i64, i64), (f64, usize)>,
) -> RationaleCurve {
    let mut groups: Vec<CurveGroup> = Vec::new();
    for ((g, x), (sum, n)) in cells {
        if groups.last().map(|last| last.group) != Some(g) {
            groups.push(CurveGroup {
                group: g,
                label: labels[g as usize].clone(),
                points: Vec::new(),
            });
        }
        let group = groups.last_mut().expect("just pushed");
        group.points.push(CurvePoint {
            x,
            mean_output: sum / n as f64,
            n,
        });
    }
    RationaleCurve {
        x_feature: x_feature.into(),
        group_feature: group_feature.into(),
        groups,
    }
}

/// Averages model outputs over every `(group, x)` cell present in `dataset`.
pub fn output_curve(
    model: &dyn Classifier,
    dataset: &Dataset,
    x_feature: &str,
    group_feature: &str,
) -> Result<RationaleCurve, RationaleError> {
    let schema = build_domain(dataset.domain());
    let (xi, gi, labels) = curve_axes(&schema, x_feature, group_feature)?;
    if dataset.is_empty() {
        return Err(RationaleError::Empty);
    }
    let outputs = dataset_outputs(model, dataset)?;
    let mut cells: BTreeMap<(i64, i64), (f64, usize)> = BTreeMap::new();
    for (o, case) in outputs.iter().zip(&dataset.cases) {
        let cell = cells.entry((case.values[gi], case.values[xi])).or_default();
        cell.0 += o;
        cell.1 += 1;
    }
    Ok(build_curve(x_feature, group_feature, labels, cells))
}

/// Axes and dedicated dataset used to draw a condition's curve.
pub fn curve_setup(
    domain: DomainId,
    condition: &str,
) -> Result<(&'static str, &'static str, DatasetKind), RationaleError> {
    match (domain, condition) {
        (DomainId::Welfare | DomainId::Simplified, "C1") => {
            Ok(("age", "gender", DatasetKind::AgeGender))
        }
        (DomainId::Welfare | DomainId::Simplified, "C6") => {
            Ok(("distance", "type", DatasetKind::PatientDistance))
        }
        _ => Err(RationaleError::UnsupportedCondition(condition.into())),
    }
}

/// The 0/1 curve obtained by evaluating the condition on each grid cell of
/// its dedicated dataset.
pub fn ideal_curve(domain: DomainId, condition: &str) -> Result<RationaleCurve, RationaleError> {
    let (x_feature, group_feature, kind) = curve_setup(domain, condition)?;
    let schema = build_domain(domain);
    let cond = schema.condition(condition)?;
    let (xi, gi, labels) = curve_axes(&schema, x_feature, group_feature)?;
    let data = generate(&GeneratorRequest::new(domain, kind, None, 0))?;
    let mut cells: BTreeMap<(i64, i64), (bool, usize)> = BTreeMap::new();
    for case in &data.cases {
        let holds = cond.holds(&case.values);
        let cell = cells
            .entry((case.values[gi], case.values[xi]))
            .or_insert((holds, 0));
        // the condition only reads the two plotted features
        assert_eq!(cell.0, holds, "condition varies within a grid cell");
        cell.1 += 1;
    }
    let cells = cells
        .into_iter()
        .map(|(k, (holds, n))| (k, (if holds { n as f64 } else { 0.0 }, n)))
        .collect();
    Ok(build_curve(x_feature, group_feature, labels, cells))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Up,
    Down,
}

/// A 0.5 crossing between two adjacent grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Linearly interpolated location.
    pub x: f64,
    pub direction: Direction,
    /// The grid points bracketing the crossing; `grid_after` is the first
    /// point on the new side of 0.5.
    pub grid_before: i64,
    pub grid_after: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTurningPoints {
    pub group: i64,
    pub label: String,
    pub crossings: Vec<Crossing>,
    /// The crossing with the smallest x, or `None` for no crossing.
    pub first: Option<Crossing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurningPointReport {
    pub x_feature: String,
    pub groups: Vec<GroupTurningPoints>,
}

impl TurningPointReport {
    /// The turning point of a group: the first grid point on the new side of
    /// 0.5 at its first crossing. An exact step at 60 reports 60.
    pub fn first_for(&self, label: &str) -> Option<i64> {
        self.first_crossing(label).map(|c| c.grid_after)
    }

    /// Interpolated location of the first crossing.
    pub fn first_interpolated_for(&self, label: &str) -> Option<f64> {
        self.first_crossing(label).map(|c| c.x)
    }

    fn first_crossing(&self, label: &str) -> Option<Crossing> {
        self.groups
            .iter()
            .find(|g| g.label == label)
            .and_then(|g| g.first)
    }
}

/// Lists every 0.5 crossing per group. A point counts as above when its
/// output is at least 0.5, so a curve that touches 0.5 without passing below
/// it, such as a flat 0.5 curve, has no crossing.
pub fn turning_points(curve: &RationaleCurve) -> TurningPointReport {
    let groups = curve
        .groups
        .iter()
        .map(|g| {
            let crossings: Vec<Crossing> = g
                .points
                .windows(2)
                .filter_map(|w| {
                    let (a, b) = (w[0], w[1]);
                    let (above_a, above_b) = (a.mean_output >= 0.5, b.mean_output >= 0.5);
                    if above_a == above_b {
                        return None;
                    }
                    let t = (0.5 - a.mean_output) / (b.mean_output - a.mean_output);
                    Some(Crossing {
                        x: a.x as f64 + t * (b.x - a.x) as f64,
                        direction: if above_b {
                            Direction::Up
                        } else {
                            Direction::Down
                        },
                        grid_before: a.x,
                        grid_after: b.x,
                    })
                })
                .collect();
            GroupTurningPoints {
                group: g.group,
                label: g.label.clone(),
                first: crossings.first().copied(),
                crossings,
            }
        })
        .collect();
    TurningPointReport {
        x_feature: curve.x_feature.clone(),
        groups,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub holds: bool,
    pub mean_output: f64,
    /// Fraction of these cases with output at least 0.5.
    pub predicted_positive: f64,
    pub n: usize,
}

/// Mean output split by the truth value of one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionOutputTable {
    pub condition: String,
    pub notion: Option<String>,
    /// The `false` row first.
    pub rows: Vec<ConditionRow>,
}

impl ConditionOutputTable {
    pub fn mean_when(&self, holds: bool) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.holds == holds)
            .map(|r| r.mean_output)
    }
}

pub fn condition_table(
    model: &dyn Classifier,
    dataset: &Dataset,
    condition: &str,
) -> Result<ConditionOutputTable, RationaleError> {
    let schema = build_domain(dataset.domain());
    let cond = schema.condition(condition)?;
    if let Some(target) = dataset.kind().target_condition(dataset.domain()) {
        if target != condition {
            return Err(RationaleError::WrongTarget {
                target: target.into(),
                requested: condition.into(),
            });
        }
    }
    let outputs = dataset_outputs(model, dataset)?;
    // (sum, predicted positive, n) for false, true
    let mut acc = [(0.0, 0usize, 0usize); 2];
    for (o, case) in outputs.iter().zip(&dataset.cases) {
        let slot = &mut acc[usize::from(cond.holds(&case.values))];
        slot.0 += o;
        slot.1 += usize::from(*o >= 0.5);
        slot.2 += 1;
    }
    if acc.iter().any(|a| a.2 == 0) {
        return Err(RationaleError::ConditionConstant(condition.into()));
    }
    let rows = acc
        .iter()
        .enumerate()
        .map(|(i, &(sum, pos, n))| ConditionRow {
            holds: i == 1,
            mean_output: sum / n as f64,
            predicted_positive: pos as f64 / n as f64,
            n,
        })
        .collect();
    Ok(ConditionOutputTable {
        condition: condition.into(),
        notion: cond.notion().map(str::to_string),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDeviation {
    pub label: String,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDeviation {
    pub groups: Vec<GroupDeviation>,
    pub max_abs: f64,
    /// Mean over all compared points, pooled across groups.
    pub mean_abs: f64,
    pub points: usize,
}

/// Pointwise absolute differences between a curve and its ideal.
pub fn curve_deviation(
    curve: &RationaleCurve,
    ideal: &RationaleCurve,
) -> Result<CurveDeviation, RationaleError> {
    deviation_where(curve, ideal, |_, _| true)
}

/// Like [`curve_deviation`], skipping points closer than `margin` to any step
/// of the ideal curve. A step sits at the first grid point past the crossing.
pub fn curve_deviation_away_from_steps(
    curve: &RationaleCurve,
    ideal: &RationaleCurve,
    margin: i64,
) -> Result<CurveDeviation, RationaleError> {
    let steps = turning_points(ideal);
    deviation_where(curve, ideal, |group, x| {
        steps.groups[group]
            .crossings
            .iter()
            .all(|c| (x - c.grid_after).abs() >= margin)
    })
}

fn deviation_where(
    curve: &RationaleCurve,
    ideal: &RationaleCurve,
    keep: impl Fn(usize, i64) -> bool,
) -> Result<CurveDeviation, RationaleError> {
    if curve.groups.len() != ideal.groups.len() {
        return Err(RationaleError::GridMismatch(format!(
            "{} groups against {}",
            curve.groups.len(),
            ideal.groups.len()
        )));
    }
    let mut groups = Vec::new();
    let (mut max_all, mut sum_all, mut n_all) = (0.0f64, 0.0, 0usize);
    for (gi, (g, h)) in curve.groups.iter().zip(&ideal.groups).enumerate() {
        if g.group != h.group
            || g.points.len() != h.points.len()
            || g.points.iter().zip(&h.points).any(|(p, q)| p.x != q.x)
        {
            return Err(RationaleError::GridMismatch(format!("group `{}`", g.label)));
        }
        let (mut max, mut sum, mut n) = (0.0f64, 0.0, 0usize);
        for (p, q) in g.points.iter().zip(&h.points) {
            if keep(gi, p.x) {
                let d = (p.mean_output - q.mean_output).abs();
                max = max.max(d);
                sum += d;
                n += 1;
            }
        }
        max_all = max_all.max(max);
        sum_all += sum;
        n_all += n;
        groups.push(GroupDeviation {
            label: g.label.clone(),
            max_abs: max,
            mean_abs: if n > 0 { sum / n as f64 } else { 0.0 },
            points: n,
        });
    }
    Ok(CurveDeviation {
        groups,
        max_abs: max_all,
        mean_abs: if n_all > 0 {
            sum_all / n_all as f64
        } else {
            0.0
        },
        points: n_all,
    })
}

/// Tab-separated `group, x, mean_output, n` rows.
pub fn curve_tsv(curve: &RationaleCurve) -> String {
    let mut out = String::from("group\tx\tmean_output\tn\n");
    for g in &curve.groups {
        for p in &g.points {
            writeln!(out, "{}\t{}\t{}\t{}", g.label, p.x, p.mean_output, p.n)
                .expect("string write");
        }
    }
    out
}

pub fn write_curve_tsv(curve: &RationaleCurve, path: &Path) -> Result<(), RationaleError> {
    std::fs::write(path, curve_tsv(curve)).map_err(|source| RationaleError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_tort, labeled_dataset};

    fn tort(kind: DatasetKind) -> Dataset {
        gen_tort(kind, None, 0).unwrap()
    }

    fn curve(points: &[(i64, f64)]) -> RationaleCurve {
        RationaleCurve {
            x_feature: "age".into(),
            group_feature: "gender".into(),
            groups: vec![CurveGroup {
                group: 1,
                label: "female".into(),
                points: points
                    .iter()
                    .map(|&(x, mean_output)| CurvePoint {
                        x,
                        mean_output,
                        n: 1,
                    })
                    .collect(),
            }],
        }
    }

    #[test]
    fn stub_accuracies() {
        let unique = tort(DatasetKind::TortUnique);
        assert_eq!(accuracy(&OracleStub(DomainId::Tort), &unique).unwrap(), 1.0);
        let positive = ConstantStub {
            domain: DomainId::Tort,
            value: 1.0,
        };
        assert_eq!(accuracy(&positive, &unique).unwrap(), 112.0 / 1024.0);
        assert_eq!(
            accuracy(&positive, &tort(DatasetKind::Imputability)).unwrap(),
            0.875
        );
        let wrong = OracleStub(DomainId::Welfare);
        assert!(matches!(
            accuracy(&wrong, &unique),
            Err(RationaleError::DomainMismatch { .. })
        ));
    }

    #[test]
    fn ideal_stub_curves_step_at_thresholds() {
        let data = generate(&GeneratorRequest::new(
            DomainId::Welfare,
            DatasetKind::AgeGender,
            None,
            3,
        ))
        .unwrap();
        let stub = ConditionStub::new(DomainId::Welfare, "C1").unwrap();
        let c = output_curve(&stub, &data, "age", "gender").unwrap();
        let female = c.groups.iter().find(|g| g.label == "female").unwrap();
        let male = c.groups.iter().find(|g| g.label == "male").unwrap();
        for p in &female.points {
            assert_eq!(p.mean_output, if p.x >= 60 { 1.0 } else { 0.0 });
            assert_eq!(p.n, 1000);
        }
        for p in &male.points {
            assert_eq!(p.mean_output, if p.x >= 65 { 1.0 } else { 0.0 });
        }
        assert_eq!(c, ideal_curve(DomainId::Welfare, "C1").unwrap());
    }

    #[test]
    fn ideal_patient_distance() {
        let ideal = ideal_curve(DomainId::Welfare, "C6").unwrap();
        let at = |label: &str, x: i64| {
            let g = ideal.groups.iter().find(|g| g.label == label).unwrap();
            g.points.iter().find(|p| p.x == x).unwrap().mean_output
        };
        assert_eq!(at("in", 45), 1.0);
        assert_eq!(at("in", 50), 0.0);
        assert_eq!(at("out", 50), 1.0);
        assert_eq!(at("out", 45), 0.0);
        let c1 = ideal_curve(DomainId::Welfare, "C1").unwrap();
        let female = &c1.groups[1];
        assert_eq!(female.label, "female");
        assert_eq!(
            female
                .points
                .iter()
                .find(|p| p.x == 60)
                .unwrap()
                .mean_output,
            1.0
        );
        assert_eq!(
            female
                .points
                .iter()
                .find(|p| p.x == 55)
                .unwrap()
                .mean_output,
            0.0
        );
        assert!(ideal_curve(DomainId::Welfare, "C3").is_err());
        assert!(ideal_curve(DomainId::Tort, "c2").is_err());
    }

    #[test]
    fn curves_need_numeric_x_and_binary_group() {
        let data = generate(&GeneratorRequest::new(
            DomainId::Simplified,
            DatasetKind::AgeGender,
            None,
            0,
        ))
        .unwrap();
        let stub = OracleStub(DomainId::Simplified);
        assert!(matches!(
            output_curve(&stub, &data, "gender", "gender"),
            Err(RationaleError::NonNumeric(_))
        ));
        assert!(matches!(
            output_curve(&stub, &data, "age", "distance"),
            Err(RationaleError::NotBinary(_))
        ));
        let flat = output_curve(
            &ConstantStub {
                domain: DomainId::Simplified,
                value: 0.5,
            },
            &data,
            "age",
            "gender",
        )
        .unwrap();
        assert!(flat
            .groups
            .iter()
            .flat_map(|g| &g.points)
            .all(|p| p.mean_output == 0.5));
        assert!(turning_points(&flat)
            .groups
            .iter()
            .all(|g| g.first.is_none()));
    }

    #[test]
    fn interpolated_crossings() {
        let r = turning_points(&curve(&[(40, 0.2), (50, 0.8)]));
        assert_eq!(r.first_interpolated_for("female"), Some(45.0));
        assert_eq!(r.first_for("female"), Some(50));
        // an instant 0 to 1 step on a 5-unit grid is placed midway, with the
        // threshold itself as the first grid point past it
        let step = turning_points(&curve(&[(50, 0.0), (55, 0.0), (60, 1.0), (65, 1.0)]));
        let first = step.groups[0].first.unwrap();
        assert_eq!(
            (first.x, first.grid_after, first.direction),
            (57.5, 60, Direction::Up)
        );
        assert_eq!(step.first_for("female"), Some(60));
        let wiggle = turning_points(&curve(&[(0, 0.0), (10, 1.0), (20, 0.0), (30, 0.5)]));
        let xs: Vec<f64> = wiggle.groups[0].crossings.iter().map(|c| c.x).collect();
        assert_eq!(xs, [5.0, 15.0, 30.0]);
        assert_eq!(wiggle.groups[0].crossings[1].direction, Direction::Down);
        assert_eq!(wiggle.first_for("female"), Some(10));
    }

    #[test]
    fn condition_tables() {
        let unl = tort(DatasetKind::Unlawfulness);
        let t = condition_table(&OracleStub(DomainId::Tort), &unl, "c3").unwrap();
        assert_eq!(
            (t.mean_when(false), t.mean_when(true)),
            (Some(0.0), Some(1.0))
        );
        assert_eq!((t.rows[0].n, t.rows[1].n), (56, 112));
        assert_eq!(t.notion.as_deref(), Some("unlawfulness"));
        let imp = tort(DatasetKind::Imputability);
        let positive = ConstantStub {
            domain: DomainId::Tort,
            value: 1.0,
        };
        let t = condition_table(&positive, &imp, "c2").unwrap();
        assert_eq!(
            (t.mean_when(false), t.mean_when(true)),
            (Some(1.0), Some(1.0))
        );
        assert!(matches!(
            condition_table(&positive, &imp, "c3"),
            Err(RationaleError::WrongTarget { .. })
        ));
        // c1 holds throughout the Unlawfulness set
        let positives: Vec<Vec<i64>> = unl
            .cases
            .iter()
            .filter(|c| c.label == Some(true))
            .map(|c| c.values.clone())
            .collect();
        let only = labeled_dataset(DomainId::Tort, DatasetKind::TortUnique, 0, positives);
        assert!(matches!(
            condition_table(&positive, &only, "c1"),
            Err(RationaleError::ConditionConstant(_))
        ));
    }

    #[test]
    fn deviation_arithmetic() {
        let ideal = curve(&[(0, 0.0), (5, 1.0), (10, 1.0)]);
        assert_eq!(curve_deviation(&ideal, &ideal).unwrap().max_abs, 0.0);
        let c = curve(&[(0, 0.1), (5, 0.6), (10, 0.9)]);
        let d = curve_deviation(&c, &ideal).unwrap();
        // |0.1|, |0.6 - 1|, |0.9 - 1|
        assert!((d.max_abs - 0.4).abs() < 1e-12);
        assert!((d.mean_abs - 0.2).abs() < 1e-12);
        let half = curve(&[(0, 0.5), (5, 0.5), (10, 0.5)]);
        assert_eq!(curve_deviation(&half, &ideal).unwrap().max_abs, 0.5);
        // the step sits at 5; a margin of 5 keeps 0 and 10
        let away = curve_deviation_away_from_steps(&c, &ideal, 5).unwrap();
        assert_eq!(away.points, 2);
        assert!((away.max_abs - 0.1).abs() < 1e-12);
        let other = curve(&[(0, 0.0), (6, 1.0), (10, 1.0)]);
        assert!(matches!(
            curve_deviation(&c, &other),
            Err(RationaleError::GridMismatch(_))
        ));
    }

    #[test]
    fn tsv_layout() {
        let tsv = curve_tsv(&curve(&[(40, 0.25), (45, 1.0)]));
        assert_eq!(
            tsv,
            "group\tx\tmean_output\tn\nfemale\t40\t0.25\t1\nfemale\t45\t1\t1\n"
        );
    }
}
