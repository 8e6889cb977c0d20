//! Experiment plans: every training set crossed with every test set and
//! architecture, repeated with fresh data, then aggregated.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{generate, Dataset, DatasetError, DatasetKind, GeneratorRequest};
use crate::domain::{build_domain, DomainId};
use crate::nn::{shape_label, train, NetworkConfig, NnError, TrainConfig, TrainedModel};
use crate::rationale::{
    accuracy, condition_table, curve_deviation, curve_deviation_away_from_steps, curve_setup,
    curve_tsv, ideal_curve, output_curve, turning_points, CurveDeviation, RationaleCurve,
    RationaleError, TurningPointReport,
};
use crate::seed::child_seed;

/// Points closer than this to an ideal step are left out of the
/// away-from-threshold deviation.
pub const STEP_MARGIN: i64 = 5;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Model(#[from] NnError),
    #[error(transparent)]
    Rationale(#[from] RationaleError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("csv: {0}")]
    Csv(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// A dataset in a plan; the domain comes from the plan and the seed is
/// derived per repetition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSpec {
    pub kind: DatasetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
}

impl DataSpec {
    pub fn new(kind: DatasetKind, size: Option<usize>) -> Self {
        DataSpec { kind, size }
    }

    pub fn request(&self, domain: DomainId, seed: u64) -> GeneratorRequest {
        GeneratorRequest::new(domain, self.kind, self.size, seed)
    }

    pub fn label(&self, domain: DomainId) -> String {
        self.request(domain, 0).label()
    }
}

fn default_repetitions() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    #[serde(default)]
    pub name: String,
    pub domain: DomainId,
    pub train_specs: Vec<DataSpec>,
    pub test_specs: Vec<DataSpec>,
    /// Hidden layer widths per architecture, e.g. `[24, 10, 3]`.
    pub architectures: Vec<Vec<usize>>,
    #[serde(default)]
    pub train_config: TrainConfig,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Worker threads; `None` uses every core. Results do not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::InvalidPlan(msg));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.train_specs.is_empty()
            || self.test_specs.is_empty()
            || self.architectures.is_empty()
        {
            return bad("train_specs, test_specs and architectures must be non-empty".into());
        }
        if self.parallelism == Some(0) {
            return bad("parallelism must be at least 1".into());
        }
        for spec in self.train_specs.iter().chain(&self.test_specs) {
            spec.request(self.domain, 0).validate()?;
        }
        let width = build_domain(self.domain).width();
        for hidden in &self.architectures {
            NetworkConfig::custom(width, hidden, 0)?;
        }
        self.train_config.validate()?;
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.train_specs.len() * self.test_specs.len() * self.architectures.len()
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Reads a plan file, or the plan embedded in an emitted manifest.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let json_err = |source| HarnessError::Json {
            path: path.display().to_string(),
            source,
        };
        let value: serde_json::Value = serde_json::from_str(&text).map_err(json_err)?;
        let plan = match value.get("plan") {
            Some(inner) => serde_json::from_value(inner.clone()),
            None => serde_json::from_value(value),
        };
        plan.map_err(json_err)
    }
}

/// Seeds used in one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionSeeds {
    pub repetition: usize,
    /// Dataset label to generator seed; enumerated sets are absent.
    pub train: BTreeMap<String, u64>,
    pub test: BTreeMap<String, u64>,
    /// `train/arch` to `(init seed, shuffle seed)`.
    pub models: BTreeMap<String, (u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCell {
    pub train: String,
    pub test: String,
    pub arch: String,
    /// Percentages over the completed repetitions.
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub completed: usize,
    pub diverged: usize,
    /// Per repetition; `None` where training diverged.
    pub per_repetition: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveCell {
    pub train: String,
    pub test: String,
    pub arch: String,
    pub condition: String,
    /// Pointwise mean of the per-repetition curves.
    pub curve: RationaleCurve,
    pub turning_points: TurningPointReport,
    pub deviation: CurveDeviation,
    pub deviation_away_from_steps: CurveDeviation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCell {
    pub train: String,
    pub test: String,
    pub arch: String,
    pub condition: String,
    pub notion: Option<String>,
    /// Means over repetitions of the per-repetition mean outputs.
    pub false_mean: f64,
    pub true_mean: f64,
    pub false_predicted_positive: f64,
    pub true_predicted_positive: f64,
    pub false_cases: usize,
    pub true_cases: usize,
    pub per_repetition_false_mean: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub plan: ExperimentPlan,
    pub accuracy: Vec<AccuracyCell>,
    pub curves: Vec<CurveCell>,
    pub condition_tables: Vec<ConditionCell>,
    pub seeds: Vec<RepetitionSeeds>,
}

impl AggregateReport {
    pub fn cell(&self, train: &str, test: &str, arch: &str) -> Option<&AccuracyCell> {
        self.accuracy
            .iter()
            .find(|c| c.train == train && c.test == test && c.arch == arch)
    }

    pub fn curve(&self, train: &str, test: &str, arch: &str) -> Option<&CurveCell> {
        self.curves
            .iter()
            .find(|c| c.train == train && c.test == test && c.arch == arch)
    }

    pub fn condition_table(&self, train: &str, test: &str, arch: &str) -> Option<&ConditionCell> {
        self.condition_tables
            .iter()
            .find(|c| c.train == train && c.test == test && c.arch == arch)
    }
}

/// What one trained model produced on one test set.
#[derive(Debug, Clone)]
struct TestOutcome {
    accuracy: f64,
    curve: Option<RationaleCurve>,
    table: Option<crate::rationale::ConditionOutputTable>,
}

/// `None` when training diverged.
type JobOutcome = Option<Vec<TestOutcome>>;

fn role_seed(plan: &ExperimentPlan, repetition: usize, role: &str) -> u64 {
    child_seed(plan.master_seed, repetition as u64, role)
}

fn evaluate(
    model: &TrainedModel<f64>,
    domain: DomainId,
    test: &Dataset,
) -> Result<TestOutcome, RationaleError> {
    let mut outcome = TestOutcome {
        accuracy: accuracy(model, test)?,
        curve: None,
        table: None,
    };
    if let Some(cond) = test.kind().target_condition(domain) {
        match curve_setup(domain, cond) {
            Ok((x, group, _)) => outcome.curve = Some(output_curve(model, test, x, group)?),
            Err(_) => outcome.table = Some(condition_table(model, test, cond)?),
        }
    }
    Ok(outcome)
}

fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn mean_curve(curves: &[&RationaleCurve]) -> RationaleCurve {
    let mut out = curves[0].clone();
    for (gi, group) in out.groups.iter_mut().enumerate() {
        for (pi, point) in group.points.iter_mut().enumerate() {
            let outputs: Vec<f64> = curves
                .iter()
                .map(|c| c.groups[gi].points[pi].mean_output)
                .collect();
            point.mean_output = mean(&outputs);
            point.n = curves.iter().map(|c| c.groups[gi].points[pi].n).sum();
        }
    }
    out
}

/// Runs every repetition of the plan and aggregates the results.
///
/// Within a repetition the stochastic datasets are generated from child
/// seeds of `(master_seed, repetition, role)`, then each train set and
/// architecture pair is trained and evaluated as an independent job. Jobs
/// are collected in a fixed order, so the report does not depend on the
/// number of threads.
pub fn run_plan(plan: &ExperimentPlan) -> Result<AggregateReport, HarnessError> {
    plan.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = plan.parallelism {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    pool.install(|| run_in_pool(plan))
}

fn run_in_pool(plan: &ExperimentPlan) -> Result<AggregateReport, HarnessError> {
    let domain = plan.domain;
    let width = build_domain(domain).width();
    let train_labels: Vec<String> = plan.train_specs.iter().map(|s| s.label(domain)).collect();
    let test_labels: Vec<String> = plan.test_specs.iter().map(|s| s.label(domain)).collect();
    let arch_labels: Vec<String> = plan.architectures.iter().map(|h| shape_label(h)).collect();

    // enumerated sets are generated once and shared by every repetition
    let mut cache: BTreeMap<String, Arc<Dataset>> = BTreeMap::new();
    for (spec, label) in plan
        .train_specs
        .iter()
        .zip(&train_labels)
        .chain(plan.test_specs.iter().zip(&test_labels))
    {
        if spec.kind.seed_independent(domain) && !cache.contains_key(label) {
            cache.insert(label.clone(), Arc::new(generate(&spec.request(domain, 0))?));
        }
    }
    let dataset_for =
        |spec: &DataSpec, label: &str, seed: u64| -> Result<Arc<Dataset>, DatasetError> {
            match cache.get(label) {
                Some(d) => Ok(Arc::clone(d)),
                None => Ok(Arc::new(generate(&spec.request(domain, seed))?)),
            }
        };

    // outcomes[rep][train * archs + arch]
    let mut outcomes: Vec<Vec<JobOutcome>> = Vec::with_capacity(plan.repetitions);
    let mut seeds = Vec::with_capacity(plan.repetitions);
    for rep in 0..plan.repetitions {
        let mut record = RepetitionSeeds {
            repetition: rep,
            train: BTreeMap::new(),
            test: BTreeMap::new(),
            models: BTreeMap::new(),
        };
        let mut train_sets = Vec::new();
        for (spec, label) in plan.train_specs.iter().zip(&train_labels) {
            let seed = role_seed(plan, rep, &format!("train/{label}"));
            if !spec.kind.seed_independent(domain) {
                record.train.insert(label.clone(), seed);
            }
            train_sets.push(dataset_for(spec, label, seed)?);
        }
        let mut test_sets = Vec::new();
        for (spec, label) in plan.test_specs.iter().zip(&test_labels) {
            let seed = role_seed(plan, rep, &format!("test/{label}"));
            if !spec.kind.seed_independent(domain) {
                record.test.insert(label.clone(), seed);
            }
            test_sets.push(dataset_for(spec, label, seed)?);
        }

        let mut jobs = Vec::new();
        for (ti, train_label) in train_labels.iter().enumerate() {
            for (ai, arch_label) in arch_labels.iter().enumerate() {
                let key = format!("{train_label}/{arch_label}");
                let init = role_seed(plan, rep, &format!("init/{key}"));
                let shuffle = role_seed(plan, rep, &format!("shuffle/{key}"));
                record.models.insert(key, (init, shuffle));
                jobs.push((ti, ai, init, shuffle));
            }
        }
        let results: Vec<Result<JobOutcome, HarnessError>> = jobs
            .par_iter()
            .map(|&(ti, ai, init, shuffle)| {
                let network = NetworkConfig::custom(width, &plan.architectures[ai], init)?;
                let config = plan.train_config.clone().with_shuffle_seed(shuffle);
                let model = match train::<f64>(&train_sets[ti], &network, &config) {
                    Ok((model, _)) => model,
                    Err(NnError::NonFiniteLoss { .. } | NnError::NonFiniteParameter) => {
                        return Ok(None)
                    }
                    Err(e) => return Err(e.into()),
                };
                let per_test = test_sets
                    .iter()
                    .map(|t| evaluate(&model, domain, t))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Some(per_test))
            })
            .collect();
        outcomes.push(results.into_iter().collect::<Result<_, _>>()?);
        seeds.push(record);
    }

    let mut report = AggregateReport {
        plan: ExperimentPlan {
            parallelism: None,
            ..plan.clone()
        },
        accuracy: Vec::new(),
        curves: Vec::new(),
        condition_tables: Vec::new(),
        seeds,
    };
    let n_arch = arch_labels.len();
    for (ti, train_label) in train_labels.iter().enumerate() {
        for (si, test_label) in test_labels.iter().enumerate() {
            for (ai, arch_label) in arch_labels.iter().enumerate() {
                let runs: Vec<Option<&TestOutcome>> = outcomes
                    .iter()
                    .map(|rep| rep[ti * n_arch + ai].as_ref().map(|tests| &tests[si]))
                    .collect();
                aggregate_cell(
                    &mut report,
                    plan,
                    (train_label, test_label, arch_label),
                    &runs,
                )?;
            }
        }
    }
    Ok(report)
}

fn aggregate_cell(
    report: &mut AggregateReport,
    plan: &ExperimentPlan,
    (train, test, arch): (&String, &String, &String),
    runs: &[Option<&TestOutcome>],
) -> Result<(), HarnessError> {
    let done: Vec<&TestOutcome> = runs.iter().flatten().copied().collect();
    let per_repetition: Vec<Option<f64>> =
        runs.iter().map(|r| r.map(|o| 100.0 * o.accuracy)).collect();
    let accs: Vec<f64> = per_repetition.iter().flatten().copied().collect();
    report.accuracy.push(AccuracyCell {
        train: train.clone(),
        test: test.clone(),
        arch: arch.clone(),
        mean: mean(&accs),
        std: population_std(&accs),
        completed: done.len(),
        diverged: runs.len() - done.len(),
        per_repetition,
    });
    if done.is_empty() {
        return Ok(());
    }
    let curves: Vec<&RationaleCurve> = done.iter().filter_map(|o| o.curve.as_ref()).collect();
    if !curves.is_empty() {
        let kind = test_kind(plan, test);
        let cond = kind
            .and_then(|k| k.target_condition(plan.domain))
            .expect("curves come from dedicated sets");
        let curve = mean_curve(&curves);
        let ideal = ideal_curve(plan.domain, cond)?;
        report.curves.push(CurveCell {
            train: train.clone(),
            test: test.clone(),
            arch: arch.clone(),
            condition: cond.to_string(),
            turning_points: turning_points(&curve),
            deviation: curve_deviation(&curve, &ideal)?,
            deviation_away_from_steps: curve_deviation_away_from_steps(
                &curve,
                &ideal,
                STEP_MARGIN,
            )?,
            curve,
        });
    }
    let tables: Vec<_> = done.iter().filter_map(|o| o.table.as_ref()).collect();
    if let Some(first) = tables.first() {
        let pick = |holds: bool, f: fn(&crate::rationale::ConditionRow) -> f64| {
            let values: Vec<f64> = tables
                .iter()
                .map(|t| f(t.rows.iter().find(|r| r.holds == holds).expect("both rows")))
                .collect();
            mean(&values)
        };
        let count = |holds: bool| {
            first
                .rows
                .iter()
                .find(|r| r.holds == holds)
                .map_or(0, |r| r.n)
        };
        report.condition_tables.push(ConditionCell {
            train: train.clone(),
            test: test.clone(),
            arch: arch.clone(),
            condition: first.condition.clone(),
            notion: first.notion.clone(),
            false_mean: pick(false, |r| r.mean_output),
            true_mean: pick(true, |r| r.mean_output),
            false_predicted_positive: pick(false, |r| r.predicted_positive),
            true_predicted_positive: pick(true, |r| r.predicted_positive),
            false_cases: count(false),
            true_cases: count(true),
            per_repetition_false_mean: runs
                .iter()
                .map(|r| {
                    r.and_then(|o| o.table.as_ref())
                        .and_then(|t| t.mean_when(false))
                })
                .collect(),
        });
    }
    Ok(())
}

fn test_kind(plan: &ExperimentPlan, test_label: &str) -> Option<DatasetKind> {
    plan.test_specs
        .iter()
        .find(|s| s.label(plan.domain) == test_label)
        .map(|s| s.kind)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| HarnessError::Json {
        path: path.display().to_string(),
        source,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

/// The accuracy matrix as CSV with columns `train,test,arch,mean,std`.
pub fn accuracy_csv(report: &AggregateReport) -> Result<String, HarnessError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| HarnessError::Csv(e.to_string());
    writer
        .write_record(["train", "test", "arch", "mean", "std"])
        .map_err(csv_err)?;
    for c in &report.accuracy {
        writer
            .write_record([
                c.train.as_str(),
                c.test.as_str(),
                c.arch.as_str(),
                &c.mean.to_string(),
                &c.std.to_string(),
            ])
            .map_err(csv_err)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| HarnessError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Replay information written next to the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub plan: ExperimentPlan,
    pub seeds: Vec<RepetitionSeeds>,
    pub generator_version: String,
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub finished_at: u64,
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// File names of everything [`emit_report`] writes, relative to the output
/// directory.
pub const SUMMARY_FILE: &str = "summary.json";
pub const ACCURACY_FILE: &str = "accuracy.csv";
pub const TABLES_FILE: &str = "condition_tables.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CURVES_DIR: &str = "curves";

/// Writes the summary, accuracy matrix, curves, condition tables and a
/// manifest. Only the manifest carries timestamps.
pub fn emit_report(
    report: &AggregateReport,
    dir: &Path,
    started_at: u64,
) -> Result<(), HarnessError> {
    let curves_dir = dir.join(CURVES_DIR);
    std::fs::create_dir_all(&curves_dir).map_err(io_err(&curves_dir))?;
    write_json(&dir.join(SUMMARY_FILE), report)?;
    let csv_path = dir.join(ACCURACY_FILE);
    std::fs::write(&csv_path, accuracy_csv(report)?).map_err(io_err(&csv_path))?;
    for c in &report.curves {
        let path = curves_dir.join(format!("{}__{}__{}.tsv", c.train, c.test, c.arch));
        std::fs::write(&path, curve_tsv(&c.curve)).map_err(io_err(&path))?;
    }
    write_json(&dir.join(TABLES_FILE), &report.condition_tables)?;
    let manifest = Manifest {
        plan: report.plan.clone(),
        seeds: report.seeds.clone(),
        generator_version: crate::dataset::GENERATOR_VERSION.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at: unix_now(),
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_tort(repetitions: usize) -> ExperimentPlan {
        ExperimentPlan {
            name: "tiny".into(),
            domain: DomainId::Tort,
            train_specs: vec![DataSpec::new(DatasetKind::TortRegular, Some(100))],
            test_specs: vec![
                DataSpec::new(DatasetKind::TortUnique, None),
                DataSpec::new(DatasetKind::Imputability, None),
            ],
            architectures: vec![vec![12], vec![24, 6]],
            train_config: TrainConfig::default().with_iterations(200),
            repetitions,
            master_seed: 5,
            parallelism: Some(1),
        }
    }

    #[test]
    fn cells_cover_the_plan() {
        let plan = tiny_tort(2);
        let report = run_plan(&plan).unwrap();
        assert_eq!(report.accuracy.len(), plan.cell_count());
        assert_eq!(report.condition_tables.len(), 2);
        assert!(report.curves.is_empty());
        for c in &report.accuracy {
            assert_eq!((c.completed, c.diverged), (2, 0));
            let accs: Vec<f64> = c.per_repetition.iter().flatten().copied().collect();
            let lo = accs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = accs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(c.mean >= lo - 1e-9 && c.mean <= hi + 1e-9);
            assert!((0.0..=100.0).contains(&c.mean));
        }
        assert_eq!(report.seeds.len(), 2);
        assert!(report.seeds[0].test.is_empty());
        assert_ne!(report.seeds[0].train, report.seeds[1].train);
    }

    #[test]
    fn single_repetition_has_zero_std() {
        let report = run_plan(&tiny_tort(1)).unwrap();
        assert!(report.accuracy.iter().all(|c| c.std == 0.0));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let one = run_plan(&tiny_tort(2)).unwrap();
        let many = run_plan(&ExperimentPlan {
            parallelism: Some(3),
            ..tiny_tort(2)
        })
        .unwrap();
        assert_eq!(
            serde_json::to_string(&one).unwrap(),
            serde_json::to_string(&many).unwrap()
        );
    }

    #[test]
    fn population_std_by_hand() {
        assert_eq!(
            population_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]),
            2.0
        );
        assert_eq!(population_std(&[3.0]), 0.0);
    }

    #[test]
    fn invalid_plans() {
        let mut plan = tiny_tort(0);
        assert!(plan.validate().is_err());
        plan.repetitions = 1;
        plan.test_specs
            .push(DataSpec::new(DatasetKind::TypeA, Some(10)));
        assert!(matches!(plan.validate(), Err(HarnessError::Dataset(_))));
        let mut plan = tiny_tort(1);
        plan.architectures.push(vec![0]);
        assert!(plan.validate().is_err());
    }

    #[test]
    fn plan_json_defaults() {
        let plan = ExperimentPlan::from_json(
            r#"{"domain":"tort","train_specs":[{"kind":"unique"}],
                "test_specs":[{"kind":"unique"}],"architectures":[[12]]}"#,
        )
        .unwrap();
        assert_eq!(plan.repetitions, 50);
        assert_eq!(plan.train_config, TrainConfig::default());
        assert_eq!(plan.cell_count(), 1);
    }

    #[test]
    fn emitted_files() {
        let mut plan = tiny_tort(1);
        plan.domain = DomainId::Simplified;
        plan.train_specs = vec![DataSpec::new(DatasetKind::TypeB, Some(200))];
        plan.test_specs = vec![DataSpec::new(DatasetKind::PatientDistance, None)];
        plan.architectures = vec![vec![12]];
        let report = run_plan(&plan).unwrap();
        let dir = tempfile::tempdir().unwrap();
        emit_report(&report, dir.path(), 0).unwrap();
        let csv = std::fs::read_to_string(dir.path().join(ACCURACY_FILE)).unwrap();
        assert_eq!(csv.lines().next(), Some("train,test,arch,mean,std"));
        assert_eq!(csv.lines().count(), 2);
        let tsv = dir
            .path()
            .join(CURVES_DIR)
            .join("type-b-200__patient-distance__12.tsv");
        assert!(std::fs::read_to_string(tsv)
            .unwrap()
            .starts_with("group\tx\tmean_output\tn\n"));
        let replay = ExperimentPlan::load(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(replay, report.plan);
        let again = run_plan(&replay).unwrap();
        let summary = std::fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap();
        assert_eq!(
            summary,
            serde_json::to_string_pretty(&again).unwrap() + "\n"
        );
    }
}
