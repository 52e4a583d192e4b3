//! Experiment orchestration: model comparisons, learning curves and one
//! iteration of the residual-driven refinement loop.
//!
//! Every entry point is deterministic given its seed. Replicates run in
//! parallel with derived seeds; results are assembled in input order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::choicemodel::{self, ChoiceModelParams, ChoiceModelSpec, FitConfig, ModelType};
use crate::error::{Error, Result};
use crate::features::PrincipleSpec;
use crate::ingest::{self, Dataset, SplitConfig};
use crate::metrics::{self, EvalReport, MeanSem, RunSummary};
use crate::neuralnet::{self, InputEncoder, MlpArch, NetworkModel, TrainConfig};
use crate::residuals::{self, ResidualCluster};
use crate::rng;

/// Something the harness can fit and score.
#[derive(Debug, Clone)]
pub enum ModelEntry {
    Choice(ChoiceModelSpec),
    Network { arch: MlpArch, extra: Vec<PrincipleSpec> },
}

impl ModelEntry {
    pub fn network(arch: MlpArch) -> Self {
        ModelEntry::Network { arch, extra: vec![] }
    }

    /// `equal`, `animals`, `utilitarian`, `expanded`, `types`, `nn` or
    /// `nn_types` (network with the six type indicators appended).
    pub fn parse(name: &str, arch: &MlpArch) -> Result<Self> {
        match name.trim() {
            "nn" => Ok(Self::network(arch.clone())),
            "nn_types" => Ok(ModelEntry::Network {
                arch: arch.clone(),
                extra: crate::features::type_principles(),
            }),
            other => match ModelType::parse(other) {
                Some(ModelType::Custom) | None => Err(Error::validation(format!("unknown model `{other}`"))),
                Some(t) => Ok(ModelEntry::Choice(ChoiceModelSpec::preset(t))),
            },
        }
    }

    pub fn id(&self) -> String {
        match self {
            ModelEntry::Choice(spec) => spec.name().to_string(),
            ModelEntry::Network { extra, .. } if extra.is_empty() => "neural_network".into(),
            ModelEntry::Network { .. } => "neural_network_plus".into(),
        }
    }
}

/// Knobs shared by all harness runs.
#[derive(Debug, Clone)]
#[derive(Default)]
pub struct HarnessConfig {
    pub seed: u64,
    pub fit: FitConfig,
    /// Overrides applied on top of [`TrainConfig::for_dataset_size`].
    pub nn_epochs: Option<usize>,
    pub nn_learning_rate: Option<f64>,
    pub nn_batch_size: Option<usize>,
}


impl HarnessConfig {
    pub fn train_config(&self, n: usize, seed: u64) -> TrainConfig {
        let mut cfg = TrainConfig::for_dataset_size(n, seed);
        if let Some(e) = self.nn_epochs {
            cfg.epochs = e;
        }
        if let Some(lr) = self.nn_learning_rate {
            cfg.learning_rate = lr;
        }
        if let Some(b) = self.nn_batch_size {
            cfg.batch_size = b;
        }
        cfg
    }
}

pub fn evaluate_choice_model(params: &ChoiceModelParams, test: &Dataset) -> Result<EvalReport> {
    let preds = params.predict_many(&test.scenarios());
    EvalReport::evaluate(params.spec.name(), &preds, &test.left_labels(), params.k())
}

/// A fitted model of either family.
#[derive(Debug, Clone)]
pub enum FittedModel {
    Choice(ChoiceModelParams),
    Network(NetworkModel),
}

impl FittedModel {
    pub fn evaluate(&self, test: &Dataset) -> Result<EvalReport> {
        match self {
            FittedModel::Choice(p) => evaluate_choice_model(p, test),
            FittedModel::Network(m) => m.evaluate(test),
        }
    }
}

pub fn fit_entry(entry: &ModelEntry, train: &Dataset, cfg: &HarnessConfig, seed: u64) -> Result<FittedModel> {
    match entry {
        ModelEntry::Choice(spec) => {
            let fit_cfg = FitConfig { seed, ..cfg.fit.clone() };
            Ok(FittedModel::Choice(choicemodel::fit(spec, train, &fit_cfg)?))
        }
        ModelEntry::Network { arch, extra } => {
            let tc = cfg.train_config(train.len(), seed);
            let mut m = neuralnet::train(arch, train, InputEncoder::with_extra(extra.clone()), &tc)?;
            m.name = entry.id();
            Ok(FittedModel::Network(m))
        }
    }
}

/// Fit every entry on `train` and score it on `test`, one row per entry.
pub fn run_comparison(train: &Dataset, test: &Dataset, entries: &[ModelEntry], cfg: &HarnessConfig) -> Result<Vec<EvalReport>> {
    entries
        .iter()
        .map(|e| fit_entry(e, train, cfg, cfg.seed)?.evaluate(test))
        .collect()
}

/// Comparison repeated over `replicates` 80/20 splits of `data`; returns the
/// per-replicate tables (outer index = replicate).
pub fn run_replicated_comparison(
    data: &Dataset,
    entries: &[ModelEntry],
    replicates: usize,
    cfg: &HarnessConfig,
) -> Result<Vec<Vec<EvalReport>>> {
    let split_cfg = SplitConfig {
        seed: cfg.seed,
        replicates,
        ..SplitConfig::default()
    };
    (0..replicates)
        .into_par_iter()
        .map(|r| {
            let (train, test) = ingest::split(data, &split_cfg, r)?;
            let rep_cfg = HarnessConfig {
                seed: rng::derive_seed(cfg.seed, r as u64),
                ..cfg.clone()
            };
            run_comparison(&train, &test, entries, &rep_cfg)
        })
        .collect()
}

/// Per-model summaries of a replicated comparison, in entry order.
pub fn summarize_replicates(tables: &[Vec<EvalReport>]) -> Result<Vec<RunSummary>> {
    let n_models = tables.first().map_or(0, Vec::len);
    (0..n_models)
        .map(|m| metrics::summarize_runs(&tables.iter().map(|t| t[m].clone()).collect::<Vec<_>>()))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CurvePoint {
    pub dataset_size: usize,
    pub summaries: Vec<RunSummary>,
}

/// Default learning-curve sizes: 10², 3·10², …, 3·10⁵.
pub fn default_curve_sizes() -> Vec<usize> {
    vec![100, 300, 1_000, 3_000, 10_000, 30_000, 100_000, 300_000]
}

/// For each size: subsample `data`, then fit and score every entry on
/// `replicates` 80/20 splits of the subsample.
pub fn run_learning_curve(
    data: &Dataset,
    sizes: &[usize],
    entries: &[ModelEntry],
    replicates: usize,
    cfg: &HarnessConfig,
) -> Result<Vec<CurvePoint>> {
    if replicates < 2 {
        return Err(Error::validation("learning curves need at least 2 replicates"));
    }
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::validation("sizes must be non-empty and strictly increasing"));
    }
    if let Some(&max) = sizes.last() {
        if max > data.len() {
            return Err(Error::validation(format!(
                "size {max} exceeds the {} rows available",
                data.len()
            )));
        }
    }
    sizes
        .iter()
        .map(|&size| {
            let sub = data.subsample(size, rng::derive_seed(cfg.seed, size as u64))?;
            let size_cfg = HarnessConfig {
                seed: rng::derive_seed(cfg.seed ^ 0xC0_4E, size as u64),
                ..cfg.clone()
            };
            let tables = run_replicated_comparison(&sub, entries, replicates, &size_cfg)?;
            Ok(CurvePoint {
                dataset_size: size,
                summaries: summarize_replicates(&tables)?,
            })
        })
        .collect()
}

pub const CURVE_COLUMNS: [&str; 11] = [
    "size",
    "model",
    "replicates",
    "accuracy_mean",
    "accuracy_sem",
    "auc_mean",
    "auc_sem",
    "normalized_aic_mean",
    "normalized_aic_sem",
    "cross_entropy_mean",
    "cross_entropy_sem",
];

/// One row per (size, model).
pub fn curve_to_csv(points: &[CurvePoint]) -> String {
    let mut out = CURVE_COLUMNS.join(",");
    out.push('\n');
    for p in points {
        for s in &p.summaries {
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                p.dataset_size,
                s.model_id,
                s.replicate_count,
                s.accuracy.mean,
                s.accuracy.sem,
                s.auc.mean,
                s.auc.sem,
                s.normalized_aic.mean,
                s.normalized_aic.sem,
                s.cross_entropy.mean,
                s.cross_entropy.sem
            );
        }
    }
    out
}

/// Metric selector for plotting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMetric {
    Accuracy,
    Auc,
    NormalizedAic,
}

impl CurveMetric {
    pub const ALL: [CurveMetric; 3] = [CurveMetric::Accuracy, CurveMetric::Auc, CurveMetric::NormalizedAic];

    pub fn ident(self) -> &'static str {
        match self {
            CurveMetric::Accuracy => "accuracy",
            CurveMetric::Auc => "auc",
            CurveMetric::NormalizedAic => "normalized_aic",
        }
    }

    fn pick(self, s: &RunSummary) -> MeanSem {
        match self {
            CurveMetric::Accuracy => s.accuracy,
            CurveMetric::Auc => s.auc,
            CurveMetric::NormalizedAic => s.normalized_aic,
        }
    }
}

const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// Static SVG line chart of one metric against log dataset size, with ±SEM
/// error bars.
pub fn curve_to_svg(points: &[CurvePoint], metric: CurveMetric) -> String {
    let (w, h, pad) = (640.0, 400.0, 60.0);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    if points.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.dataset_size as f64).log10()).collect();
    let vals: Vec<MeanSem> = points
        .iter()
        .flat_map(|p| p.summaries.iter().map(move |s| metric.pick(s)))
        .collect();
    let y_lo = vals.iter().map(|v| v.mean - v.sem).fold(f64::INFINITY, f64::min);
    let y_hi = vals.iter().map(|v| v.mean + v.sem).fold(f64::NEG_INFINITY, f64::max);
    let (x_lo, x_hi) = (xs[0], *xs.last().expect("non-empty"));
    let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
    let px = |x: f64| pad + (x - x_lo) / span(x_lo, x_hi) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y_lo) / span(y_lo, y_hi) * (h - 2.0 * pad);

    let _ = writeln!(
        out,
        "<line x1=\"{pad}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{b}\" stroke=\"black\"/>",
        b = h - pad,
        r = w - pad
    );
    for (p, &x) in points.iter().zip(&xs) {
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            px(x),
            h - pad + 16.0,
            p.dataset_size
        );
    }
    for y in [y_lo, (y_lo + y_hi) / 2.0, y_hi] {
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{:.3}</text>",
            pad - 6.0,
            py(y) + 4.0,
            y
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\">{} vs dataset size</text>",
        w / 2.0,
        metric.ident()
    );
    for (m, summary) in points[0].summaries.iter().enumerate() {
        let colour = PALETTE[m % PALETTE.len()];
        let pts: Vec<String> = points
            .iter()
            .zip(&xs)
            .map(|(p, &x)| format!("{:.1},{:.1}", px(x), py(metric.pick(&p.summaries[m]).mean)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\" points=\"{}\"/>",
            pts.join(" ")
        );
        for (p, &x) in points.iter().zip(&xs) {
            let v = metric.pick(&p.summaries[m]);
            let _ = writeln!(
                out,
                "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"{colour}\"/>",
                py(v.mean - v.sem),
                py(v.mean + v.sem),
                x = px(x)
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{colour}\">{}</text>",
            w - pad - 140.0,
            pad + 14.0 * m as f64,
            summary.model_id
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Options for [`run_loop_iteration`].
#[derive(Debug, Clone)]
pub struct LoopConfig {
    pub iteration_index: usize,
    /// Minimum absolute test-accuracy gain for a candidate to be accepted.
    pub min_gain: f64,
    pub min_responses: usize,
    /// Clusters kept in the report.
    pub top_clusters: usize,
    /// Also train the network with the accepted principles as extra inputs.
    pub augment_nn: bool,
    pub harness: HarnessConfig,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            iteration_index: 0,
            min_gain: 0.002,
            min_responses: residuals::DEFAULT_MIN_RESPONSES,
            top_clusters: 10,
            augment_nn: false,
            harness: HarnessConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CandidateOutcome {
    pub principle: String,
    pub accuracy: f64,
    pub gain: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClusterSummary {
    pub signature: String,
    pub members: usize,
    pub mean_gap: f64,
}

impl ClusterSummary {
    fn of(c: &ResidualCluster) -> Self {
        Self {
            signature: c.signature.to_string(),
            members: c.members.len(),
            mean_gap: c.mean_gap,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LoopIterationReport {
    pub iteration_index: usize,
    pub spec_before: Vec<String>,
    pub spec_after: Vec<String>,
    pub cm_before: EvalReport,
    pub cm_after: EvalReport,
    pub nn: EvalReport,
    pub nn_augmented: Option<EvalReport>,
    pub candidates: Vec<CandidateOutcome>,
    pub accepted: Vec<String>,
    pub top_clusters: Vec<ClusterSummary>,
    pub train_log_likelihood_before: f64,
    pub train_log_likelihood_after: f64,
}

fn spec_listing(spec: &ChoiceModelSpec) -> Vec<String> {
    let mut v = vec![format!("base: {}", spec.model_type().ident())];
    v.extend(spec.principles().iter().map(|p| p.source()));
    v
}

fn train_ll(p: &ChoiceModelParams) -> f64 {
    p.fit.as_ref().map_or(f64::NAN, |f| f.train_log_likelihood)
}

/// Fit the base choice model and the network, rank and cluster the residuals
/// on `test`, then refit the choice model once per candidate and accept the
/// candidates whose test-accuracy gain over the base reaches `min_gain`.
pub fn run_loop_iteration(
    train: &Dataset,
    test: &Dataset,
    cm_spec: &ChoiceModelSpec,
    nn_arch: &MlpArch,
    candidates: &[PrincipleSpec],
    cfg: &LoopConfig,
) -> Result<LoopIterationReport> {
    if cfg.min_gain.is_nan() || cfg.min_gain < 0.0 {
        return Err(Error::validation("min gain must be non-negative"));
    }
    let h = &cfg.harness;
    let fit_cfg = FitConfig { seed: h.seed, ..h.fit.clone() };
    let base = choicemodel::fit(cm_spec, train, &fit_cfg)?;
    let cm_before = evaluate_choice_model(&base, test)?;

    let nn = neuralnet::train(nn_arch, train, InputEncoder::raw(), &h.train_config(train.len(), h.seed))?;
    let nn_report = nn.evaluate(test)?;

    let records = residuals::attach_predictions(residuals::aggregate(test)?, &base, &nn);
    let ranked = residuals::rank_gaps(&records, cfg.min_responses)?;
    let top_clusters = if ranked.is_empty() {
        vec![]
    } else {
        residuals::cluster_by_template(&ranked)?
            .iter()
            .take(cfg.top_clusters)
            .map(ClusterSummary::of)
            .collect()
    };

    let outcomes = candidates
        .par_iter()
        .map(|c| {
            let spec = cm_spec.clone().with_principles(vec![c.clone()])?;
            let report = evaluate_choice_model(&choicemodel::fit(&spec, train, &fit_cfg)?, test)?;
            let gain = report.accuracy - cm_before.accuracy;
            Ok(CandidateOutcome {
                principle: c.source(),
                accuracy: report.accuracy,
                gain,
                accepted: gain >= cfg.min_gain,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let accepted: Vec<PrincipleSpec> = candidates
        .iter()
        .zip(&outcomes)
        .filter(|(_, o)| o.accepted)
        .map(|(c, _)| c.clone())
        .collect();

    let (after_spec, after) = if accepted.is_empty() {
        (cm_spec.clone(), base.clone())
    } else {
        let spec = cm_spec.clone().with_principles(accepted.clone())?;
        let fitted = choicemodel::fit(&spec, train, &fit_cfg)?;
        (spec, fitted)
    };
    let cm_after = evaluate_choice_model(&after, test)?;

    let nn_augmented = if cfg.augment_nn && !accepted.is_empty() {
        let m = neuralnet::train(
            nn_arch,
            train,
            InputEncoder::with_extra(accepted.clone()),
            &h.train_config(train.len(), h.seed),
        )?;
        Some(m.evaluate(test)?)
    } else {
        None
    };

    Ok(LoopIterationReport {
        iteration_index: cfg.iteration_index,
        spec_before: spec_listing(cm_spec),
        spec_after: spec_listing(&after_spec),
        cm_before,
        cm_after,
        nn: nn_report,
        nn_augmented,
        candidates: outcomes,
        accepted: accepted.iter().map(|p| p.source()).collect(),
        top_clusters,
        train_log_likelihood_before: train_ll(&base),
        train_log_likelihood_after: train_ll(&after),
    })
}

impl FittedModel {
    /// Load a choice-model or network file, dispatching on its `kind` field.
    pub fn load(path: &Path) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Kind {
            kind: String,
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let kind: Kind = serde_json::from_str(&text)?;
        match kind.kind.as_str() {
            choicemodel::CHOICE_MODEL_KIND => Ok(FittedModel::Choice(ChoiceModelParams::from_file(
                &serde_json::from_str(&text)?,
            )?)),
            neuralnet::NETWORK_KIND => Ok(FittedModel::Network(NetworkModel::from_file(&serde_json::from_str(
                &text,
            )?)?)),
            other => Err(Error::Schema(format!("{}: unknown model kind `{other}`", path.display()))),
        }
    }
}

/// Choice-model spec file (TOML): a preset plus extra principle sources.
///
/// ```toml
/// base = "expanded"
/// principles = ["principle z: type(old_vs_young) & pole(young)"]
/// ```
#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmSpecFile {
    pub base: String,
    #[serde(default)]
    pub principles: Vec<String>,
}

impl CmSpecFile {
    pub fn parse(text: &str) -> Result<ChoiceModelSpec> {
        let file: CmSpecFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let base = match ModelType::parse(&file.base) {
            Some(t) => ChoiceModelSpec::preset(t),
            None => return Err(Error::Config(format!("unknown base model `{}`", file.base))),
        };
        let extra = file
            .principles
            .iter()
            .map(|s| PrincipleSpec::parse(s))
            .collect::<Result<Vec<_>>>()?;
        base.with_principles(extra)
    }

    pub fn load(path: &Path) -> Result<ChoiceModelSpec> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Reproducibility record written next to every run's outputs.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub rng: String,
    pub seeds: BTreeMap<String, u64>,
    /// Input path → sha256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub config_hashes: BTreeMap<String, String>,
    pub parameters: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            rng: rng::RNG_ALGORITHM.into(),
            seeds: BTreeMap::new(),
            inputs: BTreeMap::new(),
            config_hashes: BTreeMap::new(),
            parameters: BTreeMap::new(),
        }
    }

    pub fn seed(mut self, name: &str, seed: u64) -> Self {
        self.seeds.insert(name.into(), seed);
        self
    }

    pub fn param(mut self, name: &str, value: impl ToString) -> Self {
        self.parameters.insert(name.into(), value.to_string());
        self
    }

    pub fn config_hash(mut self, name: &str, hash: impl Into<String>) -> Self {
        self.config_hashes.insert(name.into(), hash.into());
        self
    }

    pub fn input(mut self, path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(self)
    }

    /// Writes `manifest.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        self.write_to(&dir.join("manifest.json"))
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_parsing() {
        let arch = MlpArch::default();
        assert_eq!(ModelEntry::parse("expanded", &arch).unwrap().id(), "expanded");
        assert_eq!(ModelEntry::parse("nn", &arch).unwrap().id(), "neural_network");
        assert!(ModelEntry::parse("custom", &arch).is_err());
        assert!(ModelEntry::parse("bogus", &arch).is_err());
    }

    #[test]
    fn cm_spec_files() {
        let spec = CmSpecFile::parse("base = \"expanded\"\nprinciples = [\"principle z: type(old_vs_young) & pole(young)\"]").unwrap();
        assert_eq!(spec.num_params(), 23);
        assert_eq!(CmSpecFile::parse("base = \"equal\"").unwrap().num_params(), 1);
        assert!(CmSpecFile::parse("base = \"nope\"").is_err());
        assert!(CmSpecFile::parse("base = \"expanded\"\nextra = 1").is_err());
    }

    #[test]
    fn curve_sizes_are_increasing() {
        let s = default_curve_sizes();
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn sha_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
