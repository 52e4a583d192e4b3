//! Side-level principle features and choice-model feature vectors.
//!
//! A principle `f_m` is a boolean predicate over one side of a scenario. A
//! side's value adds `λ_m` when `f_m` holds; since only value differences
//! enter the choice rule, each principle contributes `f_m(left) - f_m(right)`
//! to the feature vector.

mod dsl;

pub use dsl::{parse_expr, parse_principles, Atom, AttrTest, Cmp, Expr, PrincipleSpec, Term};

use crate::choicemodel::ChoiceModelSpec;
use crate::scenario::{Detection, ProblemType, Scenario, Side, Taxonomy};

/// A scenario with its problem type resolved once, for repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub struct ScenarioView<'a> {
    pub scenario: &'a Scenario,
    pub detection: Option<Detection>,
    pub taxonomy: &'a Taxonomy,
}

impl<'a> ScenarioView<'a> {
    pub fn new(taxonomy: &'a Taxonomy, scenario: &'a Scenario) -> Self {
        Self {
            scenario,
            detection: taxonomy.detect(scenario),
            taxonomy,
        }
    }
}

impl Atom {
    pub fn eval(&self, view: &ScenarioView<'_>, side: Side) -> bool {
        let s = view.scenario;
        let comp = s.side(side);
        let count_matching =
            |t: &AttrTest| -> u32 { comp.agents().filter(|&c| t.matches(view.taxonomy, c)).count() as u32 };
        match self {
            Atom::SwerveRequired => s.car_heading == side,
            Atom::CrossingIllegal => s.legality.legal_side() == Some(side.other()),
            Atom::All(t) => comp.agents().all(|c| t.matches(view.taxonomy, c)),
            Atom::Any(t) => comp.agents().any(|c| t.matches(view.taxonomy, c)),
            Atom::Count(t, cmp, n) => cmp.apply(count_matching(t), *n),
            Atom::Type(t) => view.detection.map(|d| d.problem_type) == Some(*t),
            Atom::Pole { problem_type, positive } => match view.detection {
                Some(d) if d.problem_type == *problem_type => {
                    let pole_side = if *positive { d.pole } else { d.pole.other() };
                    pole_side == side
                }
                _ => false,
            },
        }
    }
}

impl Expr {
    pub fn eval(&self, view: &ScenarioView<'_>, side: Side) -> bool {
        self.terms.iter().all(|t| t.atom.eval(view, side) != t.negated)
    }
}

impl PrincipleSpec {
    pub fn eval(&self, view: &ScenarioView<'_>, side: Side) -> bool {
        self.expr.eval(view, side)
    }

    /// `f(left) - f(right)` as -1, 0 or +1.
    pub fn diff(&self, view: &ScenarioView<'_>) -> f64 {
        f64::from(i8::from(self.eval(view, Side::Left)) - i8::from(self.eval(view, Side::Right)))
    }
}

/// Evaluate a principle on one side of a scenario under the standard taxonomy.
pub fn eval_principle(p: &PrincipleSpec, s: &Scenario, side: Side) -> bool {
    p.eval(&ScenarioView::new(Taxonomy::standard(), s), side)
}

fn principle(src: &str) -> PrincipleSpec {
    PrincipleSpec::parse(src).expect("built-in principle parses")
}

/// Allowing harm over doing harm: saving this side requires a swerve.
pub fn intervention_principle() -> PrincipleSpec {
    principle("principle intervention: swerve_required")
}

/// This side crosses illegally.
pub fn unlawful_principle() -> PrincipleSpec {
    principle("principle unlawful: crossing_illegal")
}

/// Pole indicator for one problem type, e.g.
/// `principle humans_pole: type(humans_vs_animals) & pole(humans)`.
pub fn type_principle(t: ProblemType) -> PrincipleSpec {
    principle(&format!("principle {}_pole: type({}) & pole({})", t.pole_name(), t.ident(), t.pole_name()))
}

/// The six problem-type pole indicators, in [`ProblemType::ALL`] order.
pub fn type_principles() -> Vec<PrincipleSpec> {
    ProblemType::ALL.into_iter().map(type_principle).collect()
}

/// Left-minus-right differences feeding the logit.
#[derive(Debug, Clone, PartialEq)]
pub struct CmFeatureVector {
    /// Per tying class: left count minus right count.
    pub utility_diffs: Vec<f64>,
    /// Per principle: `f(left) - f(right)`.
    pub principle_diffs: Vec<f64>,
}

impl CmFeatureVector {
    /// Utilities first, then principles; matches the parameter layout.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.utility_diffs.clone();
        v.extend_from_slice(&self.principle_diffs);
        v
    }
}

pub fn build_cm_features(s: &Scenario, spec: &ChoiceModelSpec) -> CmFeatureVector {
    build_cm_features_in(&ScenarioView::new(spec.taxonomy(), s), spec)
}

pub fn build_cm_features_in(view: &ScenarioView<'_>, spec: &ChoiceModelSpec) -> CmFeatureVector {
    let mut utility_diffs = vec![0.0; spec.num_classes()];
    let (l, r) = (view.scenario.left.counts(), view.scenario.right.counts());
    for (i, class) in spec.tying().iter().enumerate() {
        utility_diffs[*class] += f64::from(l[i]) - f64::from(r[i]);
    }
    let principle_diffs = spec.principles().iter().map(|p| p.diff(view)).collect();
    CmFeatureVector {
        utility_diffs,
        principle_diffs,
    }
}

/// Per-side indicators `[f_1(left), f_1(right), f_2(left), ...]`, used as
/// extra network inputs.
pub fn side_indicators(view: &ScenarioView<'_>, principles: &[PrincipleSpec]) -> Vec<f64> {
    principles
        .iter()
        .flat_map(|p| [Side::Left, Side::Right].map(|side| if p.eval(view, side) { 1.0 } else { 0.0 }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{CharacterType::*, Legality, SideComposition};

    fn comp(a: &[crate::scenario::CharacterType]) -> SideComposition {
        SideComposition::from_agents(a).unwrap()
    }

    #[test]
    fn swerve_and_legality_atoms() {
        let s = Scenario::new(comp(&[Man]), comp(&[Woman]), Side::Left, Legality::RightLegal);
        assert!(eval_principle(&intervention_principle(), &s, Side::Left));
        assert!(!eval_principle(&intervention_principle(), &s, Side::Right));
        assert!(eval_principle(&unlawful_principle(), &s, Side::Left));
        assert!(!eval_principle(&unlawful_principle(), &s, Side::Right));
        let none = Scenario { legality: Legality::None, ..s };
        assert!(!eval_principle(&unlawful_principle(), &none, Side::Left));
        assert!(!eval_principle(&unlawful_principle(), &none, Side::Right));
    }

    #[test]
    fn quantifier_atoms() {
        let s = Scenario::new(comp(&[Man, Dog]), comp(&[Woman]), Side::Left, Legality::None);
        let all = PrincipleSpec::parse("principle a: all(species=human)").unwrap();
        let any = PrincipleSpec::parse("principle a: any(species=human)").unwrap();
        assert!(!eval_principle(&all, &s, Side::Left));
        assert!(eval_principle(&any, &s, Side::Left));
        assert!(eval_principle(&all, &s, Side::Right));
        let c = PrincipleSpec::parse("principle c: count(gender=male) == 1 & !any(kind=cat)").unwrap();
        assert!(eval_principle(&c, &s, Side::Left));
        assert!(!eval_principle(&c, &s, Side::Right));
    }

    #[test]
    fn pole_atoms_fire_on_exactly_one_side() {
        let s = Scenario::new(comp(&[PregnantWoman]), comp(&[Cat]), Side::Left, Legality::RightLegal);
        let view = ScenarioView::new(Taxonomy::standard(), &s);
        for p in type_principles() {
            let (l, r) = (p.eval(&view, Side::Left), p.eval(&view, Side::Right));
            if p.name == "humans_pole" {
                assert!(l && !r);
            } else {
                assert!(!l && !r, "{}", p.name);
            }
        }
        let animals = PrincipleSpec::parse("principle a: pole(animals)").unwrap();
        assert!(animals.eval(&view, Side::Right));
    }

    #[test]
    fn feature_vector_examples() {
        let equal = ChoiceModelSpec::equal_weight();
        let s = Scenario::new(comp(&[Man, Woman, Dog]), comp(&[Cat]), Side::Left, Legality::None);
        assert_eq!(build_cm_features(&s, &equal).utility_diffs, vec![2.0]);

        let avp = ChoiceModelSpec::animals_vs_people();
        let s = Scenario::new(comp(&[Man]), comp(&[Dog, Cat]), Side::Left, Legality::None);
        assert_eq!(build_cm_features(&s, &avp).utility_diffs, vec![1.0, -2.0]);

        // Three illegal crossers on the left, three legal on the right, car heading left.
        let s = Scenario::new(comp(&[Man, Woman, Boy]), comp(&[Girl, OldMan, Dog]), Side::Left, Legality::RightLegal);
        let f = build_cm_features(&s, &ChoiceModelSpec::expanded());
        assert_eq!(f.principle_diffs, vec![1.0, 1.0]);
        assert_eq!(f.utility_diffs.len(), 20);
    }
}
