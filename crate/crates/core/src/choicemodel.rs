//! Conditional-logit choice models.
//!
//! A side's value is the sum of its agents' utilities plus the weights of the
//! principles it satisfies:
//!
//! ```text
//! v_side = Σ_class u_class · count_class(side) + Σ_m λ_m · f_m(side)
//! P(save left) = exp(v_left) / (exp(v_left) + exp(v_right)) = σ(v_left - v_right)
//! ```
//!
//! Utilities are tied into classes (one class for Equal Weight, humans/animals
//! for Animals vs. People, one per character otherwise). There is no intercept:
//! only value differences matter and a character's utility does not depend on
//! its side. Parameters are laid out as `[u_0 .. u_{C-1}, λ_0 .. λ_{M-1}]`.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{self, build_cm_features_in, PrincipleSpec, ScenarioView};
use crate::ingest::Dataset;
use crate::scenario::{CharacterType, Scenario, Side, Taxonomy, NUM_CHARACTERS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelType {
    EqualWeight,
    AnimalsVsPeople,
    Utilitarian,
    Expanded,
    ExpandedTypes,
    Custom,
}

impl ModelType {
    pub fn ident(self) -> &'static str {
        match self {
            ModelType::EqualWeight => "equal_weight",
            ModelType::AnimalsVsPeople => "animals_vs_people",
            ModelType::Utilitarian => "utilitarian",
            ModelType::Expanded => "expanded",
            ModelType::ExpandedTypes => "expanded_types",
            ModelType::Custom => "custom",
        }
    }

    /// Accepts the CLI short names (`equal`, `animals`, ...) and the full idents.
    pub fn parse(s: &str) -> Option<ModelType> {
        Some(match s {
            "equal" | "equal_weight" => ModelType::EqualWeight,
            "animals" | "animals_vs_people" => ModelType::AnimalsVsPeople,
            "utilitarian" => ModelType::Utilitarian,
            "expanded" => ModelType::Expanded,
            "expanded_types" | "types" => ModelType::ExpandedTypes,
            "custom" => ModelType::Custom,
            _ => return None,
        })
    }
}

/// Parameter tying plus principle list.
#[derive(Debug, Clone)]
pub struct ChoiceModelSpec {
    model_type: ModelType,
    name: String,
    tying: [usize; NUM_CHARACTERS],
    class_names: Vec<String>,
    principles: Vec<PrincipleSpec>,
    taxonomy: &'static Taxonomy,
}

impl ChoiceModelSpec {
    /// `tying[i]` is the class of `CharacterType::ALL[i]`; class ids must be
    /// contiguous from 0.
    pub fn new(
        model_type: ModelType,
        tying: [usize; NUM_CHARACTERS],
        class_names: Vec<String>,
        principles: Vec<PrincipleSpec>,
    ) -> Result<Self> {
        let num_classes = tying.iter().max().map_or(0, |m| m + 1);
        for c in 0..num_classes {
            if !tying.contains(&c) {
                return Err(Error::validation(format!("tying class ids are not contiguous: {c} unused")));
            }
        }
        if class_names.len() != num_classes {
            return Err(Error::validation(format!(
                "{} class names for {num_classes} classes",
                class_names.len()
            )));
        }
        let mut spec = Self {
            model_type,
            name: model_type.ident().to_string(),
            tying,
            class_names,
            principles: Vec::new(),
            taxonomy: Taxonomy::standard(),
        };
        spec = spec.with_principles(principles)?;
        Ok(spec)
    }

    pub fn equal_weight() -> Self {
        Self::new(ModelType::EqualWeight, [0; NUM_CHARACTERS], vec!["agent".into()], vec![]).expect("valid preset")
    }

    pub fn animals_vs_people() -> Self {
        let tax = Taxonomy::standard();
        let tying = CharacterType::ALL.map(|c| if tax.is_human(c) { 0 } else { 1 });
        Self::new(ModelType::AnimalsVsPeople, tying, vec!["human".into(), "animal".into()], vec![])
            .expect("valid preset")
    }

    pub fn utilitarian() -> Self {
        Self::new(ModelType::Utilitarian, per_character_tying(), per_character_names(), vec![]).expect("valid preset")
    }

    pub fn expanded() -> Self {
        Self::new(
            ModelType::Expanded,
            per_character_tying(),
            per_character_names(),
            vec![features::intervention_principle(), features::unlawful_principle()],
        )
        .expect("valid preset")
    }

    /// Expanded plus the six problem-type pole indicators.
    pub fn expanded_types() -> Self {
        let mut principles = vec![features::intervention_principle(), features::unlawful_principle()];
        principles.extend(features::type_principles());
        Self::new(ModelType::ExpandedTypes, per_character_tying(), per_character_names(), principles)
            .expect("valid preset")
    }

    /// One utility per character plus the given principles.
    pub fn custom(principles: Vec<PrincipleSpec>) -> Result<Self> {
        Self::new(ModelType::Custom, per_character_tying(), per_character_names(), principles)
    }

    pub fn preset(t: ModelType) -> Self {
        match t {
            ModelType::EqualWeight => Self::equal_weight(),
            ModelType::AnimalsVsPeople => Self::animals_vs_people(),
            ModelType::Utilitarian => Self::utilitarian(),
            ModelType::Expanded => Self::expanded(),
            ModelType::ExpandedTypes => Self::expanded_types(),
            ModelType::Custom => Self::utilitarian().renamed_type(ModelType::Custom),
        }
    }

    fn renamed_type(mut self, t: ModelType) -> Self {
        self.model_type = t;
        self.name = t.ident().to_string();
        self
    }

    /// Append principles; names must stay unique.
    pub fn with_principles(mut self, extra: Vec<PrincipleSpec>) -> Result<Self> {
        for p in extra {
            if self.principles.iter().any(|q| q.name == p.name) {
                return Err(Error::validation(format!("duplicate principle `{}`", p.name)));
            }
            self.principles.push(p);
        }
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_taxonomy(mut self, taxonomy: &'static Taxonomy) -> Self {
        self.taxonomy = taxonomy;
        self
    }

    pub fn model_type(&self) -> ModelType {
        self.model_type
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tying(&self) -> &[usize; NUM_CHARACTERS] {
        &self.tying
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn principles(&self) -> &[PrincipleSpec] {
        &self.principles
    }

    pub fn taxonomy(&self) -> &'static Taxonomy {
        self.taxonomy
    }

    /// Free parameters: utilities plus principle weights.
    pub fn num_params(&self) -> usize {
        self.num_classes() + self.principles.len()
    }

    pub fn features(&self, s: &Scenario) -> Vec<f64> {
        build_cm_features_in(&ScenarioView::new(self.taxonomy, s), self).to_vec()
    }
}

fn per_character_tying() -> [usize; NUM_CHARACTERS] {
    std::array::from_fn(|i| i)
}

fn per_character_names() -> Vec<String> {
    CharacterType::ALL.iter().map(|c| c.ident().to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FitMetadata {
    pub seed: u64,
    pub iterations: usize,
    pub tolerance: f64,
    pub ridge: f64,
    pub grad_max_norm: f64,
    pub converged: bool,
    /// Parameter norm exceeded 50: the data are (nearly) separable and the
    /// ridge term is what keeps the estimate finite.
    pub separable: bool,
    pub n_train: usize,
    pub train_log_likelihood: f64,
}

/// Fitted (or hand-set) model parameters.
#[derive(Debug, Clone)]
pub struct ChoiceModelParams {
    pub spec: ChoiceModelSpec,
    pub utilities: Vec<f64>,
    pub principle_weights: Vec<f64>,
    pub fit: Option<FitMetadata>,
}

impl ChoiceModelParams {
    pub fn new(spec: ChoiceModelSpec, utilities: Vec<f64>, principle_weights: Vec<f64>) -> Result<Self> {
        if utilities.len() != spec.num_classes() || principle_weights.len() != spec.principles().len() {
            return Err(Error::validation(format!(
                "expected {} utilities and {} principle weights, got {} and {}",
                spec.num_classes(),
                spec.principles().len(),
                utilities.len(),
                principle_weights.len()
            )));
        }
        if utilities.iter().chain(&principle_weights).any(|x| !x.is_finite()) {
            return Err(Error::validation("parameters must be finite"));
        }
        Ok(Self {
            spec,
            utilities,
            principle_weights,
            fit: None,
        })
    }

    pub fn zeros(spec: ChoiceModelSpec) -> Self {
        let (c, m) = (spec.num_classes(), spec.principles().len());
        Self::new(spec, vec![0.0; c], vec![0.0; m]).expect("zero parameters are valid")
    }

    pub fn from_theta(spec: ChoiceModelSpec, theta: &[f64]) -> Result<Self> {
        let c = spec.num_classes();
        if theta.len() != spec.num_params() {
            return Err(Error::validation("parameter vector has the wrong length"));
        }
        Self::new(spec, theta[..c].to_vec(), theta[c..].to_vec())
    }

    pub fn theta(&self) -> Vec<f64> {
        let mut t = self.utilities.clone();
        t.extend_from_slice(&self.principle_weights);
        t
    }

    pub fn k(&self) -> usize {
        self.utilities.len() + self.principle_weights.len()
    }

    /// Utility of one character type (through its tying class).
    pub fn utility(&self, c: CharacterType) -> f64 {
        self.utilities[self.spec.tying()[c.index()]]
    }

    pub fn side_value(&self, s: &Scenario, side: Side) -> f64 {
        let view = ScenarioView::new(self.spec.taxonomy(), s);
        self.side_value_in(&view, side)
    }

    pub fn side_value_in(&self, view: &ScenarioView<'_>, side: Side) -> f64 {
        let counts = view.scenario.side(side).counts();
        let mut v: f64 = CharacterType::ALL
            .iter()
            .map(|c| self.utility(*c) * f64::from(counts[c.index()]))
            .sum();
        for (p, w) in self.spec.principles().iter().zip(&self.principle_weights) {
            if p.eval(view, side) {
                v += w;
            }
        }
        v
    }

    pub fn predict_left_prob(&self, s: &Scenario) -> f64 {
        let view = ScenarioView::new(self.spec.taxonomy(), s);
        logistic(self.side_value_in(&view, Side::Left) - self.side_value_in(&view, Side::Right))
    }

    pub fn predict_many(&self, scenarios: &[Scenario]) -> Vec<f64> {
        scenarios.iter().map(|s| self.predict_left_prob(s)).collect()
    }

    /// Σ log P(saved side).
    pub fn log_likelihood(&self, d: &Dataset) -> f64 {
        d.rows
            .iter()
            .map(|r| {
                let view = ScenarioView::new(self.spec.taxonomy(), &r.scenario);
                let diff = self.side_value_in(&view, Side::Left) - self.side_value_in(&view, Side::Right);
                match r.saved {
                    Side::Left => log_sigmoid(diff),
                    Side::Right => log_sigmoid(-diff),
                }
            })
            .sum()
    }
}

/// σ(x) without overflow for any finite x.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln σ(x) = -ln(1 + e^{-x}), finite for every finite x. Probabilities are
/// never formed explicitly, so no clamping is needed.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Luce choice rule in its two-option softmax form, shifted by the larger
/// value for stability.
pub fn luce_choice_prob(v_left: f64, v_right: f64) -> f64 {
    let m = v_left.max(v_right);
    let (a, b) = ((v_left - m).exp(), (v_right - m).exp());
    a / (a + b)
}

#[derive(Debug, Clone)]
pub struct FitConfig {
    /// Gradient max-norm threshold; `None` means `1e-8 · N`.
    pub tolerance: Option<f64>,
    pub max_iterations: usize,
    pub ridge: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            tolerance: None,
            max_iterations: 100,
            ridge: 1e-6,
            seed: 0,
        }
    }
}

/// Training rows grouped by identical feature vector.
#[derive(Debug, Clone)]
pub struct ChoiceData {
    pub x: Vec<Vec<f64>>,
    pub n_left: Vec<f64>,
    pub n_total: Vec<f64>,
    pub n_rows: usize,
    pub dim: usize,
}

impl ChoiceData {
    pub fn from_dataset(spec: &ChoiceModelSpec, d: &Dataset) -> Self {
        let mut by_scenario: HashMap<Scenario, (f64, f64)> = HashMap::new();
        let mut order: Vec<Scenario> = Vec::new();
        for r in &d.rows {
            let e = by_scenario.entry(r.scenario).or_insert_with(|| {
                order.push(r.scenario);
                (0.0, 0.0)
            });
            if r.saved == Side::Left {
                e.0 += 1.0;
            }
            e.1 += 1.0;
        }
        let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut data = ChoiceData {
            x: Vec::new(),
            n_left: Vec::new(),
            n_total: Vec::new(),
            n_rows: d.rows.len(),
            dim: spec.num_params(),
        };
        for s in order {
            let (nl, n) = by_scenario[&s];
            let x = spec.features(&s);
            // Features are integer-valued, so exact grouping is safe.
            let key: Vec<i64> = x.iter().map(|v| *v as i64).collect();
            match index.get(&key) {
                Some(&i) => {
                    data.n_left[i] += nl;
                    data.n_total[i] += n;
                }
                None => {
                    index.insert(key, data.x.len());
                    data.x.push(x);
                    data.n_left.push(nl);
                    data.n_total.push(n);
                }
            }
        }
        data
    }

    /// Log-likelihood of parameter vector `theta` (no ridge).
    pub fn log_likelihood(&self, theta: &[f64]) -> f64 {
        self.x
            .iter()
            .zip(self.n_left.iter().zip(&self.n_total))
            .map(|(x, (&nl, &n))| {
                let z = dot(theta, x);
                nl * log_sigmoid(z) + (n - nl) * log_sigmoid(-z)
            })
            .sum()
    }

    /// Negative log-likelihood plus `ridge/2 · |θ|²`, and its gradient.
    pub fn objective_and_gradient(&self, theta: &[f64], ridge: f64) -> (f64, Vec<f64>) {
        let mut grad: Vec<f64> = theta.iter().map(|t| ridge * t).collect();
        let mut f = 0.5 * ridge * dot(theta, theta);
        for (x, (&nl, &n)) in self.x.iter().zip(self.n_left.iter().zip(&self.n_total)) {
            let z = dot(theta, x);
            f -= nl * log_sigmoid(z) + (n - nl) * log_sigmoid(-z);
            // n·σ(z) - nl, written so that neither tail rounds to zero.
            let r = (n - nl) * logistic(z) - nl * logistic(-z);
            for (g, xi) in grad.iter_mut().zip(x) {
                *g += r * xi;
            }
        }
        (f, grad)
    }

    fn hessian(&self, theta: &[f64], ridge: f64) -> Vec<f64> {
        let k = self.dim;
        let mut h = vec![0.0; k * k];
        for (x, &n) in self.x.iter().zip(&self.n_total) {
            let z = dot(theta, x);
            let w = n * logistic(z) * logistic(-z);
            if w == 0.0 {
                continue;
            }
            for i in 0..k {
                if x[i] == 0.0 {
                    continue;
                }
                let wi = w * x[i];
                for j in 0..=i {
                    h[i * k + j] += wi * x[j];
                }
            }
        }
        for i in 0..k {
            for j in 0..i {
                h[j * k + i] = h[i * k + j];
            }
            h[i * k + i] += ridge;
        }
        h
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solve `A x = b` for symmetric positive definite `A` (row-major `k × k`).
fn cholesky_solve(a: &[f64], b: &[f64], k: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = a[i * k + j];
            for p in 0..j {
                s -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * k + i] = s.sqrt();
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    let mut y = vec![0.0; k];
    for i in 0..k {
        let s: f64 = (0..i).map(|p| l[i * k + p] * y[p]).sum();
        y[i] = (b[i] - s) / l[i * k + i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|p| l[p * k + i] * x[p]).sum();
        x[i] = (y[i] - s) / l[i * k + i];
    }
    Some(x)
}

/// Maximum-likelihood fit by damped Newton iterations with backtracking.
///
/// Converged when the max-norm of the (ridge-penalised) gradient drops below
/// the tolerance. Hitting the iteration cap returns [`Error::NotConverged`].
pub fn fit(spec: &ChoiceModelSpec, train: &Dataset, cfg: &FitConfig) -> Result<ChoiceModelParams> {
    if train.rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let data = ChoiceData::from_dataset(spec, train);
    fit_data(spec, &data, cfg)
}

pub fn fit_data(spec: &ChoiceModelSpec, data: &ChoiceData, cfg: &FitConfig) -> Result<ChoiceModelParams> {
    let k = spec.num_params();
    let tolerance = cfg.tolerance.unwrap_or(1e-8 * data.n_rows as f64);
    let mut theta = vec![0.0; k];
    let (mut f, mut g) = data.objective_and_gradient(&theta, cfg.ridge);
    let mut iterations = 0;
    let mut converged = max_abs(&g) < tolerance;
    while !converged && iterations < cfg.max_iterations {
        iterations += 1;
        let h = data.hessian(&theta, cfg.ridge);
        let dir = cholesky_solve(&h, &g, k).unwrap_or_else(|| g.clone());
        let slope = dot(&g, &dir);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(&dir).map(|(t, d)| t - step * d).collect();
            let (fc, gc) = data.objective_and_gradient(&cand, cfg.ridge);
            if fc.is_finite() && fc <= f - 1e-4 * step * slope {
                accepted = Some((cand, fc, gc));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((t, fc, gc)) => {
                theta = t;
                f = fc;
                g = gc;
            }
            // No decrease possible at machine precision.
            None => break,
        }
        converged = max_abs(&g) < tolerance;
    }
    let grad_max_norm = max_abs(&g);
    if !converged {
        return Err(Error::NotConverged {
            iterations,
            grad_norm: grad_max_norm,
        });
    }
    let mut params = ChoiceModelParams::from_theta(spec.clone(), &theta)?;
    params.fit = Some(FitMetadata {
        seed: cfg.seed,
        iterations,
        tolerance,
        ridge: cfg.ridge,
        grad_max_norm,
        converged,
        separable: dot(&theta, &theta).sqrt() > 50.0,
        n_train: data.n_rows,
        train_log_likelihood: data.log_likelihood(&theta),
    });
    Ok(params)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrincipleRecord {
    pub name: String,
    pub source: String,
    pub lambda: f64,
}

/// JSON model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChoiceModelFile {
    pub kind: String,
    pub model_type: ModelType,
    pub name: String,
    pub tying_classes: BTreeMap<String, usize>,
    pub class_names: Vec<String>,
    pub utilities: Vec<f64>,
    pub principles: Vec<PrincipleRecord>,
    pub k: usize,
    pub fit_metadata: Option<FitMetadata>,
}

pub const CHOICE_MODEL_KIND: &str = "choice_model";

impl ChoiceModelParams {
    pub fn to_file(&self) -> ChoiceModelFile {
        ChoiceModelFile {
            kind: CHOICE_MODEL_KIND.to_string(),
            model_type: self.spec.model_type(),
            name: self.spec.name().to_string(),
            tying_classes: CharacterType::ALL
                .iter()
                .map(|c| (c.ident().to_string(), self.spec.tying()[c.index()]))
                .collect(),
            class_names: self.spec.class_names().to_vec(),
            utilities: self.utilities.clone(),
            principles: self
                .spec
                .principles()
                .iter()
                .zip(&self.principle_weights)
                .map(|(p, w)| PrincipleRecord {
                    name: p.name.clone(),
                    source: p.source(),
                    lambda: *w,
                })
                .collect(),
            k: self.k(),
            fit_metadata: self.fit.clone(),
        }
    }

    pub fn from_file(file: &ChoiceModelFile) -> Result<Self> {
        if file.kind != CHOICE_MODEL_KIND {
            return Err(Error::Schema(format!("expected kind `{CHOICE_MODEL_KIND}`, found `{}`", file.kind)));
        }
        let mut tying = [usize::MAX; NUM_CHARACTERS];
        for (name, class) in &file.tying_classes {
            let c = CharacterType::from_ident(name)
                .ok_or_else(|| Error::Schema(format!("unknown character `{name}` in tyingClasses")))?;
            tying[c.index()] = *class;
        }
        if let Some(c) = CharacterType::ALL.iter().find(|c| tying[c.index()] == usize::MAX) {
            return Err(Error::Schema(format!("tyingClasses is missing `{c}`")));
        }
        let principles = file
            .principles
            .iter()
            .map(|p| {
                let spec = PrincipleSpec::parse(&p.source)?;
                if spec.name != p.name {
                    return Err(Error::Schema(format!("principle name `{}` does not match its source", p.name)));
                }
                Ok(spec)
            })
            .collect::<Result<Vec<_>>>()?;
        let weights = file.principles.iter().map(|p| p.lambda).collect();
        let spec = ChoiceModelSpec::new(file.model_type, tying, file.class_names.clone(), principles)?
            .with_name(file.name.clone());
        let mut params = ChoiceModelParams::new(spec, file.utilities.clone(), weights)?;
        if params.k() != file.k {
            return Err(Error::Schema(format!("k = {} does not match {} parameters", file.k, params.k())));
        }
        params.fit = file.fit_metadata.clone();
        Ok(params)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_file())?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_file(&serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{CharacterType::*, Legality, Response, SideComposition};

    fn comp(a: &[CharacterType]) -> SideComposition {
        SideComposition::from_agents(a).unwrap()
    }

    fn row(s: Scenario, saved: Side) -> Response {
        Response {
            id: String::new(),
            scenario: s,
            saved,
        }
    }

    #[test]
    fn side_value_sums_utilities() {
        let mut p = ChoiceModelParams::zeros(ChoiceModelSpec::utilitarian());
        p.utilities[Man.index()] = 1.0;
        let s = Scenario::new(comp(&[Man, Man]), comp(&[Dog]), Side::Left, Legality::None);
        assert_eq!(p.side_value(&s, Side::Left), 2.0);
        assert_eq!(p.side_value(&s, Side::Right), 0.0);
    }

    #[test]
    fn principles_add_weights() {
        let mut p = ChoiceModelParams::zeros(ChoiceModelSpec::expanded());
        p.principle_weights = vec![-0.5, -1.5];
        p.utilities[Dog.index()] = 0.25;
        let s = Scenario::new(comp(&[Dog]), comp(&[Cat]), Side::Left, Legality::RightLegal);
        assert_eq!(p.side_value(&s, Side::Left), 0.25 - 0.5 - 1.5);
        assert_eq!(p.side_value(&s, Side::Right), 0.0);
    }

    #[test]
    fn logit_examples() {
        assert_eq!(logistic(0.0), 0.5);
        assert!((logistic(3f64.ln()) - 0.75).abs() < 1e-15);
        assert!(logistic(-800.0) >= 0.0 && logistic(800.0) <= 1.0);
        assert!(logistic(-700.0) > 0.0);
        assert!((luce_choice_prob(3f64.ln(), 0.0) - 0.75).abs() < 1e-15);
        assert!(log_sigmoid(-800.0).is_finite());
        assert!((log_sigmoid(0.3) - logistic(0.3).ln()).abs() < 1e-15);
    }

    #[test]
    fn zero_params_log_likelihood() {
        let s = Scenario::new(comp(&[Man]), comp(&[Woman]), Side::Left, Legality::None);
        let d = Dataset::new(vec![row(s, Side::Left), row(s, Side::Right), row(s.mirror(), Side::Left)]).unwrap();
        let p = ChoiceModelParams::zeros(ChoiceModelSpec::expanded());
        assert!((p.log_likelihood(&d) - 3.0 * 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn single_row_log_likelihood() {
        let mut p = ChoiceModelParams::zeros(ChoiceModelSpec::equal_weight());
        p.utilities[0] = 3f64.ln();
        let s = Scenario::new(comp(&[Man, Woman]), comp(&[Woman]), Side::Left, Legality::None);
        let d = Dataset::new(vec![row(s, Side::Left)]).unwrap();
        assert!((p.log_likelihood(&d) - 0.75f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn fit_matches_closed_form_on_one_feature() {
        // Two-vs-one dilemmas only: P(left) = σ(u); MLE is the logit of the
        // empirical rate (shifted by the tiny ridge).
        let s = Scenario::new(comp(&[Man, Woman]), comp(&[Woman]), Side::Left, Legality::None);
        let mut rows = vec![row(s, Side::Left); 30];
        rows.extend(vec![row(s, Side::Right); 10]);
        let d = Dataset::new(rows).unwrap();
        let p = fit(&ChoiceModelSpec::equal_weight(), &d, &FitConfig::default()).unwrap();
        assert!((p.utilities[0] - 3f64.ln()).abs() < 1e-6, "{}", p.utilities[0]);
        let meta = p.fit.unwrap();
        assert!(meta.converged && !meta.separable);
    }

    #[test]
    fn separable_data_is_flagged() {
        let s = Scenario::new(comp(&[Man, Woman]), comp(&[Woman]), Side::Left, Legality::None);
        let d = Dataset::new(vec![row(s, Side::Left); 5]).unwrap();
        let cfg = FitConfig { ridge: 0.0, tolerance: Some(1e-25), max_iterations: 200, ..FitConfig::default() };
        let p = fit(&ChoiceModelSpec::equal_weight(), &d, &cfg).unwrap();
        assert!(p.fit.unwrap().separable, "{:?}", p.utilities);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let s = Scenario::new(comp(&[Man, Woman]), comp(&[Woman]), Side::Left, Legality::None);
        let mut rows = vec![row(s, Side::Left); 3];
        rows.push(row(s, Side::Right));
        let d = Dataset::new(rows).unwrap();
        let cfg = FitConfig { max_iterations: 1, tolerance: Some(1e-300), ..FitConfig::default() };
        assert!(matches!(
            fit(&ChoiceModelSpec::equal_weight(), &d, &cfg),
            Err(Error::NotConverged { iterations: 1, .. })
        ));
    }

    #[test]
    fn model_file_round_trip() {
        let mut p = ChoiceModelParams::zeros(ChoiceModelSpec::expanded_types());
        p.utilities[3] = 0.7;
        p.principle_weights[1] = -0.25;
        let back = ChoiceModelParams::from_file(&p.to_file()).unwrap();
        assert_eq!(back.theta(), p.theta());
        assert_eq!(back.spec.principles(), p.spec.principles());
        assert_eq!(back.k(), 28);
        let s = Scenario::new(comp(&[Girl]), comp(&[OldWoman]), Side::Right, Legality::None);
        assert_eq!(back.predict_left_prob(&s), p.predict_left_prob(&s));
    }

    #[test]
    fn spec_rejects_bad_tying_and_duplicates() {
        let mut tying = [0usize; NUM_CHARACTERS];
        tying[0] = 2;
        assert!(ChoiceModelSpec::new(ModelType::Custom, tying, vec!["a".into(); 3], vec![]).is_err());
        assert!(ChoiceModelSpec::expanded()
            .with_principles(vec![features::intervention_principle()])
            .is_err());
    }
}
