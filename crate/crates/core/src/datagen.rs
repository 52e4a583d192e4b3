//! Synthetic Moral-Machine-style datasets.
//!
//! Scenarios are drawn from a [`DesignConfig`] that mixes one stream per
//! problem type with a stream of unconstrained random compositions. The
//! sampling distribution is a stand-in: the original experiment's design
//! distribution is not reproduced here. Responses come from a [`TeacherSpec`],
//! a ground-truth logit model whose values may include principle weights and
//! extra override bonuses written in the principle language.
//!
//! Generation is sharded into blocks of [`SHARD_SIZE`] rows; block `j` uses the
//! random stream `(seed, j)`, so serial and parallel runs produce identical
//! output.

use std::collections::BTreeMap;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::choicemodel::{logistic, ChoiceModelParams, ChoiceModelSpec};
use crate::error::{Error, Result};
use crate::features::{parse_expr, Atom, Expr, PrincipleSpec, ScenarioView};
use crate::ingest::{Dataset, Provenance};
use crate::rng::{self, StreamRng};
use crate::scenario::{
    CharacterType, Legality, ProblemType, Response, Scenario, Side, SideComposition, Taxonomy, MAX_GROUP_SIZE,
};

pub const SHARD_SIZE: usize = 10_000;

/// Sampling weights: one per problem type plus unconstrained compositions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamWeights {
    #[serde(default)]
    pub humans_vs_animals: f64,
    #[serde(default)]
    pub old_vs_young: f64,
    #[serde(default)]
    pub more_vs_less: f64,
    #[serde(default)]
    pub fat_vs_fit: f64,
    #[serde(default)]
    pub male_vs_female: f64,
    #[serde(default)]
    pub high_vs_low_status: f64,
    #[serde(default)]
    pub random: f64,
}

impl StreamWeights {
    fn as_array(&self) -> [f64; 7] {
        [
            self.humans_vs_animals,
            self.old_vs_young,
            self.more_vs_less,
            self.fat_vs_fit,
            self.male_vs_female,
            self.high_vs_low_status,
            self.random,
        ]
    }

    /// Weight on exactly one problem type.
    pub fn only(t: ProblemType) -> Self {
        let mut w = StreamWeights {
            humans_vs_animals: 0.0,
            old_vs_young: 0.0,
            more_vs_less: 0.0,
            fat_vs_fit: 0.0,
            male_vs_female: 0.0,
            high_vs_low_status: 0.0,
            random: 0.0,
        };
        *w.slot_mut(Some(t)) = 1.0;
        w
    }

    fn slot_mut(&mut self, t: Option<ProblemType>) -> &mut f64 {
        match t {
            Some(ProblemType::HumansVsAnimals) => &mut self.humans_vs_animals,
            Some(ProblemType::OldVsYoung) => &mut self.old_vs_young,
            Some(ProblemType::MoreVsLess) => &mut self.more_vs_less,
            Some(ProblemType::FatVsFit) => &mut self.fat_vs_fit,
            Some(ProblemType::MaleVsFemale) => &mut self.male_vs_female,
            Some(ProblemType::HighVsLowStatus) => &mut self.high_vs_low_status,
            None => &mut self.random,
        }
    }
}

impl Default for StreamWeights {
    fn default() -> Self {
        Self {
            humans_vs_animals: 1.0,
            old_vs_young: 1.0,
            more_vs_less: 1.0,
            fat_vs_fit: 1.0,
            male_vs_female: 1.0,
            high_vs_low_status: 1.0,
            random: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegalityRates {
    pub none: f64,
    pub left_legal: f64,
    pub right_legal: f64,
}

impl Default for LegalityRates {
    fn default() -> Self {
        Self {
            none: 1.0 / 3.0,
            left_legal: 1.0 / 3.0,
            right_legal: 1.0 / 3.0,
        }
    }
}

/// Scenario sampling design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    #[serde(default)]
    pub seed: u64,
    /// Inclusive `[min, max]` characters per side.
    #[serde(default = "default_group_size")]
    pub group_size: [u8; 2],
    #[serde(default)]
    pub stream_weights: StreamWeights,
    #[serde(default)]
    pub legality_rates: LegalityRates,
}

fn default_group_size() -> [u8; 2] {
    [1, MAX_GROUP_SIZE]
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            group_size: default_group_size(),
            stream_weights: StreamWeights::default(),
            legality_rates: LegalityRates::default(),
        }
    }
}

impl DesignConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: DesignConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.stream_weights.as_array();
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || !w.iter().any(|x| *x > 0.0) {
            return Err(Error::Config("stream weights must be non-negative with at least one positive".into()));
        }
        let [lo, hi] = self.group_size;
        if lo < 1 || hi > MAX_GROUP_SIZE || lo > hi {
            return Err(Error::Config(format!("group size range [{lo}, {hi}] must lie within [1, {MAX_GROUP_SIZE}]")));
        }
        if self.stream_weights.more_vs_less > 0.0 && lo == hi {
            return Err(Error::Config("more_vs_less needs a group size range wider than one value".into()));
        }
        let r = &self.legality_rates;
        let rates = [r.none, r.left_legal, r.right_legal];
        if rates.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (rates.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("legality rates must be non-negative and sum to 1".into()));
        }
        Ok(())
    }
}

/// Draw one scenario.
pub fn sample_scenario(cfg: &DesignConfig, rng: &mut StreamRng) -> Scenario {
    sample_scenario_traced(cfg, Taxonomy::standard(), rng).0
}

/// Draw one scenario and report which stream produced it (`None` = random
/// composition).
pub fn sample_scenario_traced(
    cfg: &DesignConfig,
    taxonomy: &Taxonomy,
    rng: &mut StreamRng,
) -> (Scenario, Option<ProblemType>) {
    let weights = WeightedIndex::new(cfg.stream_weights.as_array()).expect("validated weights");
    let stream = match weights.sample(rng) {
        6 => None,
        i => Some(ProblemType::ALL[i]),
    };
    let [lo, hi] = cfg.group_size;
    let (left, right) = match stream {
        None => (random_side(rng, lo, hi), random_side(rng, lo, hi)),
        Some(ProblemType::MoreVsLess) => {
            let less = rng.gen_range(lo..hi);
            let extra = rng.gen_range(1..=hi - less);
            let mut small: Vec<CharacterType> = (0..less).map(|_| random_character(rng)).collect();
            let big: Vec<CharacterType> = small
                .iter()
                .copied()
                .chain((0..extra).map(|_| random_character(rng)))
                .collect();
            let more_side = if rng.gen_bool(0.5) { Side::Left } else { Side::Right };
            let (l, r) = match more_side {
                Side::Left => (big, std::mem::take(&mut small)),
                Side::Right => (std::mem::take(&mut small), big),
            };
            (side_of(&l), side_of(&r))
        }
        Some(t) => {
            let k = rng.gen_range(lo..=hi);
            let pairs = taxonomy.counterpart_pairs(t);
            let differing = rng.gen_range(1..=k);
            let mut pole = Vec::new();
            let mut other = Vec::new();
            for _ in 0..differing {
                let (p, o) = pairs[rng.gen_range(0..pairs.len())];
                pole.push(p);
                other.push(o);
            }
            for _ in differing..k {
                let c = random_character(rng);
                pole.push(c);
                other.push(c);
            }
            if rng.gen_bool(0.5) {
                (side_of(&pole), side_of(&other))
            } else {
                (side_of(&other), side_of(&pole))
            }
        }
    };
    let car_heading = if rng.gen_bool(0.5) { Side::Left } else { Side::Right };
    let r = &cfg.legality_rates;
    let legality = Legality::ALL[WeightedIndex::new([r.none, r.left_legal, r.right_legal])
        .expect("validated rates")
        .sample(rng)];
    (Scenario::new(left, right, car_heading, legality), stream)
}

fn random_character(rng: &mut StreamRng) -> CharacterType {
    CharacterType::ALL[rng.gen_range(0..CharacterType::ALL.len())]
}

fn random_side(rng: &mut StreamRng, lo: u8, hi: u8) -> SideComposition {
    let k = rng.gen_range(lo..=hi);
    let agents: Vec<CharacterType> = (0..k).map(|_| random_character(rng)).collect();
    side_of(&agents)
}

fn side_of(agents: &[CharacterType]) -> SideComposition {
    SideComposition::from_agents(agents).expect("generator respects group size limits")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeacherKind {
    /// Utilities plus principles without problem-type atoms.
    Linear,
    /// May use problem-type principles.
    Typed,
    /// Typed plus override bonuses.
    TypedWithOverrides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedPrinciple {
    pub source: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideEntry {
    /// Side-level condition in the principle expression language.
    pub condition: String,
    pub bonus: f64,
}

/// On-disk teacher description (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeacherFile {
    pub kind: TeacherKind,
    #[serde(default = "one")]
    pub noise_scale: f64,
    /// Per-character utility; characters left out get 0.
    #[serde(default)]
    pub utilities: BTreeMap<String, f64>,
    #[serde(default)]
    pub principles: Vec<WeightedPrinciple>,
    #[serde(default)]
    pub overrides: Vec<OverrideEntry>,
}

fn one() -> f64 {
    1.0
}

/// Ground-truth response model.
#[derive(Debug, Clone)]
pub struct TeacherSpec {
    pub kind: TeacherKind,
    pub params: ChoiceModelParams,
    pub overrides: Vec<(Expr, f64)>,
    pub noise_scale: f64,
}

fn uses_type_atoms(e: &Expr) -> bool {
    e.terms
        .iter()
        .any(|t| matches!(t.atom, Atom::Type(_) | Atom::Pole { .. }))
}

impl TeacherSpec {
    pub fn new(kind: TeacherKind, params: ChoiceModelParams, overrides: Vec<(Expr, f64)>, noise_scale: f64) -> Result<Self> {
        if !(noise_scale.is_finite() && noise_scale > 0.0) {
            return Err(Error::Config(format!("noise_scale must be positive, got {noise_scale}")));
        }
        if overrides.iter().any(|(_, b)| !b.is_finite()) {
            return Err(Error::Config("override bonuses must be finite".into()));
        }
        match kind {
            TeacherKind::Linear => {
                if params.spec.principles().iter().any(|p| uses_type_atoms(&p.expr)) {
                    return Err(Error::Config("a linear teacher cannot use type(...) or pole(...)".into()));
                }
                if !overrides.is_empty() {
                    return Err(Error::Config("only typed_with_overrides teachers take overrides".into()));
                }
            }
            TeacherKind::Typed => {
                if !overrides.is_empty() {
                    return Err(Error::Config("only typed_with_overrides teachers take overrides".into()));
                }
            }
            TeacherKind::TypedWithOverrides => {}
        }
        Ok(Self {
            kind,
            params,
            overrides,
            noise_scale,
        })
    }

    /// Teacher with every parameter zero: a fair coin.
    pub fn null() -> Self {
        Self::new(TeacherKind::Linear, ChoiceModelParams::zeros(ChoiceModelSpec::utilitarian()), vec![], 1.0)
            .expect("valid")
    }

    pub fn from_file(file: &TeacherFile) -> Result<Self> {
        let mut utilities = vec![0.0; CharacterType::ALL.len()];
        for (name, u) in &file.utilities {
            let c = CharacterType::from_ident(name)
                .ok_or_else(|| Error::Config(format!("unknown character `{name}` in teacher utilities")))?;
            utilities[c.index()] = *u;
        }
        let principles = file
            .principles
            .iter()
            .map(|p| PrincipleSpec::parse(&p.source))
            .collect::<Result<Vec<_>>>()?;
        let weights = file.principles.iter().map(|p| p.weight).collect();
        let spec = ChoiceModelSpec::custom(principles)?.with_name("teacher");
        let params = ChoiceModelParams::new(spec, utilities, weights)?;
        let overrides = file
            .overrides
            .iter()
            .map(|o| Ok((parse_expr(&o.condition)?, o.bonus)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.kind, params, overrides, file.noise_scale)
    }

    pub fn to_file(&self) -> TeacherFile {
        TeacherFile {
            kind: self.kind,
            noise_scale: self.noise_scale,
            utilities: CharacterType::ALL
                .iter()
                .map(|c| (c.ident().to_string(), self.params.utility(*c)))
                .collect(),
            principles: self
                .params
                .spec
                .principles()
                .iter()
                .zip(&self.params.principle_weights)
                .map(|(p, w)| WeightedPrinciple {
                    source: p.source(),
                    weight: *w,
                })
                .collect(),
            overrides: self
                .overrides
                .iter()
                .map(|(e, b)| OverrideEntry {
                    condition: e.to_string(),
                    bonus: *b,
                })
                .collect(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: TeacherFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Value of one side: choice-model value plus active override bonuses.
    pub fn side_value(&self, view: &ScenarioView<'_>, side: Side) -> f64 {
        let bonus: f64 = self
            .overrides
            .iter()
            .filter(|(e, _)| e.eval(view, side))
            .map(|(_, b)| b)
            .sum();
        self.params.side_value_in(view, side) + bonus
    }

    /// Probability that the simulated respondent saves the left side.
    pub fn left_prob(&self, s: &Scenario) -> f64 {
        let view = ScenarioView::new(self.params.spec.taxonomy(), s);
        logistic((self.side_value(&view, Side::Left) - self.side_value(&view, Side::Right)) / self.noise_scale)
    }
}

pub fn simulate_response(t: &TeacherSpec, s: &Scenario, rng: &mut StreamRng) -> Response {
    let p = t.left_prob(s);
    let saved = if rng.gen::<f64>() < p { Side::Left } else { Side::Right };
    Response {
        id: String::new(),
        scenario: *s,
        saved,
    }
}

/// Hash identifying a generation run; stored in dataset provenance.
pub fn config_hash(cfg: &DesignConfig, t: &TeacherSpec, n: usize) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(cfg).expect("serialisable"));
    h.update(serde_json::to_vec(&t.to_file()).expect("serialisable"));
    h.update(n.to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// `n` i.i.d. responses, a pure function of `(cfg, t, n)` (the seed lives in `cfg`).
pub fn generate_dataset(cfg: &DesignConfig, t: &TeacherSpec, n: usize) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::validation("n must be at least 1"));
    }
    cfg.validate()?;
    let taxonomy = t.params.spec.taxonomy();
    let shards = n.div_ceil(SHARD_SIZE);
    let rows: Vec<Response> = (0..shards)
        .into_par_iter()
        .flat_map_iter(|shard| {
            let mut rng = rng::stream(cfg.seed, shard as u64);
            let start = shard * SHARD_SIZE;
            let end = (start + SHARD_SIZE).min(n);
            (start..end)
                .map(|i| {
                    let (s, _) = sample_scenario_traced(cfg, taxonomy, &mut rng);
                    let mut r = simulate_response(t, &s, &mut rng);
                    r.id = i.to_string();
                    r
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut d = Dataset::new(rows)?;
    d.provenance = Provenance {
        source: Some(format!("generated ({})", rng::RNG_ALGORITHM)),
        seed: Some(cfg.seed),
        config_hash: Some(config_hash(cfg, t, n)),
    };
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_type_design_always_detects_that_type() {
        let tax = Taxonomy::standard();
        for t in ProblemType::ALL {
            let cfg = DesignConfig {
                stream_weights: StreamWeights::only(t),
                ..DesignConfig::default()
            };
            let mut r = rng::stream(1, 0);
            for _ in 0..2_000 {
                let (s, stream) = sample_scenario_traced(&cfg, tax, &mut r);
                assert_eq!(stream, Some(t));
                assert_eq!(tax.detect(&s).map(|d| d.problem_type), Some(t), "{s:?}");
            }
        }
    }

    #[test]
    fn same_seed_same_scenarios() {
        let cfg = DesignConfig {
            seed: 7,
            ..DesignConfig::default()
        };
        let draw = || {
            let mut r = rng::stream(cfg.seed, 0);
            (0..100).map(|_| sample_scenario(&cfg, &mut r)).collect::<Vec<_>>()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn config_validation() {
        let mut cfg = DesignConfig::default();
        cfg.legality_rates.none = 0.5;
        assert!(cfg.validate().is_err());
        let cfg = DesignConfig {
            group_size: [0, 3],
            ..DesignConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = DesignConfig {
            group_size: [2, 2],
            ..DesignConfig::default()
        };
        assert!(cfg.validate().is_err());
        let mut w = StreamWeights::only(ProblemType::OldVsYoung);
        w.old_vs_young = 0.0;
        let cfg = DesignConfig {
            stream_weights: w,
            ..DesignConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn teacher_kind_restrictions() {
        let typed = ChoiceModelParams::zeros(ChoiceModelSpec::expanded_types());
        assert!(TeacherSpec::new(TeacherKind::Linear, typed.clone(), vec![], 1.0).is_err());
        assert!(TeacherSpec::new(TeacherKind::Typed, typed.clone(), vec![], 1.0).is_ok());
        let ov = vec![(parse_expr("pole(humans)").unwrap(), 1.0)];
        assert!(TeacherSpec::new(TeacherKind::Typed, typed.clone(), ov.clone(), 1.0).is_err());
        assert!(TeacherSpec::new(TeacherKind::TypedWithOverrides, typed.clone(), ov, 1.0).is_ok());
        assert!(TeacherSpec::new(TeacherKind::Typed, typed, vec![], 0.0).is_err());
    }

    #[test]
    fn zero_n_is_rejected() {
        assert!(generate_dataset(&DesignConfig::default(), &TeacherSpec::null(), 0).is_err());
    }
}
