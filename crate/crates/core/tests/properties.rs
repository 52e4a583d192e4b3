use dilemma::choicemodel::{ChoiceModelParams, ChoiceModelSpec};
use dilemma::features::{self, build_cm_features, parse_principles, PrincipleSpec};
use dilemma::ingest::{self, Dataset};
use dilemma::metrics;
use dilemma::residuals::{self, AggregateRecord};
use dilemma::scenario::{
    CharacterType, Legality, Response, Scenario, Side, SideComposition, Taxonomy, MAX_GROUP_SIZE,
};
use proptest::prelude::*;

fn side_strategy() -> impl Strategy<Value = SideComposition> {
    prop::collection::vec(0usize..20, 1..=MAX_GROUP_SIZE as usize).prop_map(|idx| {
        let agents: Vec<CharacterType> = idx.into_iter().map(|i| CharacterType::from_index(i).unwrap()).collect();
        SideComposition::from_agents(&agents).unwrap()
    })
}

fn scenario_strategy() -> impl Strategy<Value = Scenario> {
    (
        side_strategy(),
        side_strategy(),
        prop_oneof![Just(Side::Left), Just(Side::Right)],
        prop::sample::select(Legality::ALL.to_vec()),
    )
        .prop_map(|(l, r, h, g)| Scenario::new(l, r, h, g))
}

fn atom_strategy() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "swerve_required",
        "crossing_illegal",
        "any(species=animal)",
        "all(species=human)",
        "any(age=young)",
        "all(body=fit)",
        "any(gender=female)",
        "any(status=high)",
        "any(kind=stroller)",
        "count(species=human) >= 2",
        "count(age=old) == 1",
        "count(kind=dog) < 3",
        "type(old_vs_young)",
        "type(more_vs_less)",
        "pole(young)",
        "pole(old)",
        "pole(humans)",
        "pole(less)",
    ])
    .prop_map(str::to_string)
}

fn principle_strategy() -> impl Strategy<Value = String> {
    prop::collection::vec((any::<bool>(), atom_strategy()), 1..5).prop_map(|terms| {
        let body: Vec<String> = terms
            .into_iter()
            .map(|(neg, a)| if neg { format!("!{a}") } else { a })
            .collect();
        format!("principle p: {}", body.join(" & "))
    })
}

fn dataset_from(scenarios: &[Scenario], saved: &[bool]) -> Dataset {
    let rows = scenarios
        .iter()
        .zip(saved)
        .enumerate()
        .map(|(i, (s, l))| Response {
            id: i.to_string(),
            scenario: *s,
            saved: if *l { Side::Left } else { Side::Right },
        })
        .collect();
    Dataset::new(rows).unwrap()
}

proptest! {
    #[test]
    fn key_round_trip(s in scenario_strategy()) {
        prop_assert_eq!(s.encode().decode().unwrap(), s);
    }

    #[test]
    fn mirror_is_an_involution(s in scenario_strategy()) {
        prop_assert_eq!(s.mirror().mirror(), s);
    }

    #[test]
    fn detection_follows_the_mirror(s in scenario_strategy()) {
        let tax = Taxonomy::standard();
        let a = tax.detect(&s);
        let b = tax.detect(&s.mirror());
        prop_assert_eq!(a.map(|d| d.problem_type), b.map(|d| d.problem_type));
        if let (Some(a), Some(b)) = (a, b) {
            prop_assert_eq!(a.pole, b.pole.other());
        }
    }

    #[test]
    fn features_are_antisymmetric(s in scenario_strategy()) {
        let spec = ChoiceModelSpec::expanded_types();
        let f = build_cm_features(&s, &spec).to_vec();
        let g = build_cm_features(&s.mirror(), &spec).to_vec();
        for (a, b) in f.iter().zip(&g) {
            prop_assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn choice_probability_mirrors(s in scenario_strategy(), theta in prop::collection::vec(-3.0f64..3.0, 28)) {
        let p = ChoiceModelParams::from_theta(ChoiceModelSpec::expanded_types(), &theta).unwrap();
        let a = p.predict_left_prob(&s);
        let b = p.predict_left_prob(&s.mirror());
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn principle_print_parse_round_trip(src in principle_strategy()) {
        let p = PrincipleSpec::parse(&src).unwrap();
        let again = PrincipleSpec::parse(&p.source()).unwrap();
        prop_assert_eq!(&again, &p);
        prop_assert_eq!(again.source(), p.source());
    }

    #[test]
    fn principle_side_values_swap_under_mirror(src in principle_strategy(), s in scenario_strategy()) {
        let p = PrincipleSpec::parse(&src).unwrap();
        let m = s.mirror();
        prop_assert_eq!(features::eval_principle(&p, &s, Side::Left), features::eval_principle(&p, &m, Side::Right));
        prop_assert_eq!(features::eval_principle(&p, &s, Side::Right), features::eval_principle(&p, &m, Side::Left));
    }

    #[test]
    fn auc_is_invariant_under_monotone_maps(
        preds in prop::collection::vec(0.001f64..0.999, 2..200),
        seed in any::<u64>(),
    ) {
        let labels: Vec<bool> = (0..preds.len()).map(|i| (seed.rotate_left(i as u32 % 64) ^ i as u64) & 1 == 1).collect();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let base = metrics::auc(&preds, &labels).unwrap();
        let logit: Vec<f64> = preds.iter().map(|p| (p / (1.0 - p)).ln()).collect();
        let cubed: Vec<f64> = preds.iter().map(|p| p.powi(3)).collect();
        let affine: Vec<f64> = preds.iter().map(|p| 0.25 * p + 0.1).collect();
        for mapped in [logit, cubed, affine] {
            prop_assert!((metrics::auc(&mapped, &labels).unwrap() - base).abs() < 1e-12);
        }
        let flipped: Vec<f64> = preds.iter().map(|p| 1.0 - p).collect();
        prop_assert!((metrics::auc(&flipped, &labels).unwrap() - (1.0 - base)).abs() < 1e-9);
    }

    #[test]
    fn accuracy_is_a_fraction(preds in prop::collection::vec(0.0f64..1.0, 1..100), bits in any::<u128>()) {
        let labels: Vec<bool> = (0..preds.len()).map(|i| bits >> (i % 128) & 1 == 1).collect();
        let a = metrics::accuracy(&preds, &labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        let hits = preds.iter().zip(&labels).filter(|(p, l)| (**p >= 0.5) == **l).count();
        prop_assert!((a - hits as f64 / preds.len() as f64).abs() < 1e-12);
    }

    #[test]
    fn aggregate_partitions_the_rows(
        scenarios in prop::collection::vec(scenario_strategy(), 1..40),
        picks in prop::collection::vec((0usize..40, any::<bool>()), 1..300),
    ) {
        let (s, l): (Vec<Scenario>, Vec<bool>) = picks.iter().map(|(i, b)| (scenarios[i % scenarios.len()], *b)).unzip();
        let records = residuals::aggregate(&dataset_from(&s, &l)).unwrap();
        prop_assert_eq!(records.iter().map(|r| r.n_responses).sum::<usize>(), s.len());
        prop_assert_eq!(records.iter().map(|r| r.n_left).sum::<usize>(), l.iter().filter(|b| **b).count());
        prop_assert!(records.windows(2).all(|w| w[0].key < w[1].key));

        // Aggregating two halves and merging equals aggregating the whole.
        let mid = s.len() / 2;
        if mid > 0 {
            let a = residuals::aggregate(&dataset_from(&s[..mid], &l[..mid])).unwrap();
            let b = residuals::aggregate(&dataset_from(&s[mid..], &l[mid..])).unwrap();
            for r in &records {
                let part = |v: &[AggregateRecord]| v.iter().find(|x| x.key == r.key).map_or((0, 0), |x| (x.n_responses, x.n_left));
                let (na, la) = part(&a);
                let (nb, lb) = part(&b);
                prop_assert_eq!(na + nb, r.n_responses);
                prop_assert_eq!(la + lb, r.n_left);
            }
        }
    }

    #[test]
    fn ranking_ignores_input_order(
        scenarios in prop::collection::vec(scenario_strategy(), 2..30),
        probs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 30),
        min in 1usize..3,
        rot in 0usize..30,
    ) {
        let picks: Vec<(Scenario, bool)> = scenarios.iter().enumerate().flat_map(|(i, s)| (0..=i % 4).map(move |j| (*s, j % 2 == 0))).collect();
        let (s, l): (Vec<Scenario>, Vec<bool>) = picks.into_iter().unzip();
        let records = residuals::aggregate(&dataset_from(&s, &l)).unwrap();
        let cm: Vec<f64> = probs.iter().take(records.len()).map(|p| p.0).collect();
        let nn: Vec<f64> = probs.iter().take(records.len()).map(|p| p.1).collect();
        let records = residuals::attach_probabilities(records, &cm, &nn);

        let mut shuffled = records.clone();
        shuffled.rotate_left(rot % records.len());
        shuffled.reverse();
        let a = residuals::rank_gaps(&records, min).unwrap();
        let b = residuals::rank_gaps(&shuffled, min).unwrap();
        let keys = |v: &[AggregateRecord]| v.iter().map(|r| r.key).collect::<Vec<_>>();
        prop_assert_eq!(keys(&a), keys(&b));
        prop_assert!(a.windows(2).all(|w| w[0].gap >= w[1].gap));
        prop_assert!(a.iter().all(|r| r.n_responses >= min));
        prop_assert_eq!(a.len(), records.iter().filter(|r| r.n_responses >= min).count());
    }

    #[test]
    fn csv_round_trip(
        scenarios in prop::collection::vec(scenario_strategy(), 1..50),
        bits in any::<u64>(),
    ) {
        let labels: Vec<bool> = (0..scenarios.len()).map(|i| bits >> (i % 64) & 1 == 1).collect();
        let d = dataset_from(&scenarios, &labels);
        let mut buf = Vec::new();
        ingest::write_csv_to(&d, &mut buf).unwrap();
        let back = ingest::read_csv_from(buf.as_slice()).unwrap();
        prop_assert_eq!(back.rows, d.rows);
    }
}

#[test]
fn principle_files_parse() {
    let types = parse_principles(include_str!("../../../configs/principles/types.dsl")).unwrap();
    assert_eq!(types.len(), 6);
    let expanded = parse_principles(include_str!("../../../configs/principles/expanded.dsl")).unwrap();
    assert_eq!(expanded, vec![features::intervention_principle(), features::unlawful_principle()]);
}

#[test]
fn duplicate_principle_names_are_rejected() {
    assert!(parse_principles("principle a: swerve_required\nprinciple a: crossing_illegal").is_err());
}

#[test]
fn csv_columns_are_readable_by_a_plain_reader() {
    let s = Scenario::new(
        SideComposition::from_agents(&[CharacterType::Boy, CharacterType::Dog]).unwrap(),
        SideComposition::from_agents(&[CharacterType::OldMan]).unwrap(),
        Side::Right,
        Legality::LeftLegal,
    );
    let d = dataset_from(&[s], &[true]);
    let mut buf = Vec::new();
    ingest::write_csv_to(&d, &mut buf).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let headers = reader.headers().unwrap().clone();
    let row = reader.records().next().unwrap().unwrap();
    let get = |name: &str| &row[headers.iter().position(|h| h == name).unwrap()];
    assert_eq!(get("left_boy"), "1");
    assert_eq!(get("left_dog"), "1");
    assert_eq!(get("right_old_man"), "1");
    assert_eq!(get("car_heading"), "R");
    assert_eq!(get("legality"), "left_legal");
    assert_eq!(get("saved"), "L");
}
