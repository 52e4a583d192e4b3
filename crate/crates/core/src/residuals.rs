//! Per-dilemma residuals: where does the network beat the choice model?
//!
//! Responses are aggregated by dilemma key into empirical left-save rates,
//! both models' predictions are attached, and
//! `gap = |empirical - cm| - |empirical - nn|` ranks the dilemmas. Ranked
//! records are grouped into clusters by detected problem type, or by a
//! structural template for untyped dilemmas.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::choicemodel::ChoiceModelParams;
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::neuralnet::NetworkModel;
use crate::scenario::{CharacterType, DilemmaKey, Legality, ProblemType, Scenario, Side, SideComposition, Taxonomy};

pub const DEFAULT_MIN_RESPONSES: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRecord {
    pub key: DilemmaKey,
    pub scenario: Scenario,
    pub n_responses: usize,
    pub n_left: usize,
    pub empirical_left_rate: f64,
    pub cm_prob: f64,
    pub nn_prob: f64,
    pub cm_abs_err: f64,
    pub nn_abs_err: f64,
    pub gap: f64,
}

impl AggregateRecord {
    fn with_predictions(&mut self, cm_prob: f64, nn_prob: f64) {
        self.cm_prob = cm_prob;
        self.nn_prob = nn_prob;
        self.cm_abs_err = (self.empirical_left_rate - cm_prob).abs();
        self.nn_abs_err = (self.empirical_left_rate - nn_prob).abs();
        self.gap = self.cm_abs_err - self.nn_abs_err;
    }
}

/// One record per distinct dilemma, ordered by key. Predictions are zero
/// until [`attach_predictions`].
pub fn aggregate(d: &Dataset) -> Result<Vec<AggregateRecord>> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut counts: BTreeMap<DilemmaKey, (Scenario, usize, usize)> = BTreeMap::new();
    for r in &d.rows {
        let e = counts.entry(r.scenario.encode()).or_insert((r.scenario, 0, 0));
        e.1 += 1;
        if r.saved == Side::Left {
            e.2 += 1;
        }
    }
    Ok(counts
        .into_iter()
        .map(|(key, (scenario, n, left))| AggregateRecord {
            key,
            scenario,
            n_responses: n,
            n_left: left,
            empirical_left_rate: left as f64 / n as f64,
            cm_prob: 0.0,
            nn_prob: 0.0,
            cm_abs_err: 0.0,
            nn_abs_err: 0.0,
            gap: 0.0,
        })
        .collect())
}

pub fn attach_predictions(
    mut records: Vec<AggregateRecord>,
    cm: &ChoiceModelParams,
    nn: &NetworkModel,
) -> Vec<AggregateRecord> {
    let scenarios: Vec<Scenario> = records.iter().map(|r| r.scenario).collect();
    let cm_probs = cm.predict_many(&scenarios);
    let nn_probs = nn.predict_many(&scenarios);
    for ((r, c), n) in records.iter_mut().zip(cm_probs).zip(nn_probs) {
        r.with_predictions(c, n);
    }
    records
}

/// Attach arbitrary prediction columns, e.g. from a model known in closed form.
pub fn attach_probabilities(mut records: Vec<AggregateRecord>, cm: &[f64], nn: &[f64]) -> Vec<AggregateRecord> {
    assert_eq!(records.len(), cm.len());
    assert_eq!(records.len(), nn.len());
    for ((r, c), n) in records.iter_mut().zip(cm).zip(nn) {
        r.with_predictions(*c, *n);
    }
    records
}

/// Keep records with at least `min_responses`, largest gap first; equal gaps
/// keep key order.
pub fn rank_gaps(records: &[AggregateRecord], min_responses: usize) -> Result<Vec<AggregateRecord>> {
    if min_responses == 0 {
        return Err(Error::validation("min responses must be at least 1"));
    }
    let mut kept: Vec<AggregateRecord> = records
        .iter()
        .filter(|r| r.n_responses >= min_responses)
        .cloned()
        .collect();
    kept.sort_by(|a, b| b.gap.total_cmp(&a.gap).then_with(|| a.key.cmp(&b.key)));
    Ok(kept)
}

/// Shape of an untyped dilemma: what each side has beyond the characters both
/// sides share, plus the legality and car-heading context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StructuralTemplate {
    pub left_extra_humans: u8,
    pub left_extra_animals: u8,
    pub right_extra_humans: u8,
    pub right_extra_animals: u8,
    pub legality: Legality,
    pub car_heading: Side,
}

impl StructuralTemplate {
    pub fn of(tax: &Taxonomy, s: &Scenario) -> Self {
        let extra = |a: &SideComposition, b: &SideComposition| {
            let mut humans = 0;
            let mut animals = 0;
            for c in CharacterType::ALL {
                let surplus = a.count(c).saturating_sub(b.count(c));
                if tax.is_human(c) {
                    humans += surplus;
                } else {
                    animals += surplus;
                }
            }
            (humans, animals)
        };
        let (lh, la) = extra(&s.left, &s.right);
        let (rh, ra) = extra(&s.right, &s.left);
        Self {
            left_extra_humans: lh,
            left_extra_animals: la,
            right_extra_humans: rh,
            right_extra_animals: ra,
            legality: s.legality,
            car_heading: s.car_heading,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClusterSignature {
    Type(ProblemType),
    Template(StructuralTemplate),
}

impl ClusterSignature {
    pub fn of(tax: &Taxonomy, s: &Scenario) -> Self {
        match tax.detect(s) {
            Some(d) => ClusterSignature::Type(d.problem_type),
            None => ClusterSignature::Template(StructuralTemplate::of(tax, s)),
        }
    }
}

impl fmt::Display for ClusterSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClusterSignature::Type(t) => write!(f, "{}", t.ident()),
            ClusterSignature::Template(t) => write!(
                f,
                "template[L+{}h{}a R+{}h{}a {} car={}]",
                t.left_extra_humans,
                t.left_extra_animals,
                t.right_extra_humans,
                t.right_extra_animals,
                t.legality.code(),
                t.car_heading.code()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualCluster {
    pub signature: ClusterSignature,
    /// In the order they were ranked.
    pub members: Vec<AggregateRecord>,
    pub mean_gap: f64,
}

/// Group ranked records by signature; clusters come out by mean gap
/// descending, ties by signature.
pub fn cluster_by_template(ranked: &[AggregateRecord]) -> Result<Vec<ResidualCluster>> {
    cluster_by_template_in(Taxonomy::standard(), ranked)
}

pub fn cluster_by_template_in(tax: &Taxonomy, ranked: &[AggregateRecord]) -> Result<Vec<ResidualCluster>> {
    if ranked.is_empty() {
        return Err(Error::validation("no records to cluster"));
    }
    let mut groups: BTreeMap<ClusterSignature, Vec<AggregateRecord>> = BTreeMap::new();
    for r in ranked {
        groups.entry(ClusterSignature::of(tax, &r.scenario)).or_default().push(r.clone());
    }
    let mut clusters: Vec<ResidualCluster> = groups
        .into_iter()
        .map(|(signature, members)| {
            let mean_gap = members.iter().map(|r| r.gap).sum::<f64>() / members.len() as f64;
            ResidualCluster {
                signature,
                members,
                mean_gap,
            }
        })
        .collect();
    clusters.sort_by(|a, b| b.mean_gap.total_cmp(&a.mean_gap).then_with(|| a.signature.cmp(&b.signature)));
    Ok(clusters)
}

/// "Old Man Crossing Legally", or just the characters when no crossing
/// signal is shown.
pub fn describe_side(s: &Scenario, side: Side) -> String {
    let who = s.side(side).describe();
    match s.legality.legal_side() {
        None => who,
        Some(legal) if legal == side => format!("{who} Crossing Legally"),
        Some(_) => format!("{who} Crossing Illegally"),
    }
}

pub const REPORT_COLUMNS: [&str; 8] = ["left", "right", "car_side", "empirical", "cm", "nn", "gap", "n_responses"];

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub left: String,
    pub right: String,
    pub car_side: String,
    pub empirical: f64,
    pub cm: f64,
    pub nn: f64,
    pub gap: f64,
    pub n_responses: usize,
}

impl ReportRow {
    fn of(r: &AggregateRecord) -> Self {
        Self {
            left: describe_side(&r.scenario, Side::Left),
            right: describe_side(&r.scenario, Side::Right),
            car_side: r.scenario.car_heading.display_name().to_string(),
            empirical: r.empirical_left_rate,
            cm: r.cm_prob,
            nn: r.nn_prob,
            gap: r.gap,
            n_responses: r.n_responses,
        }
    }

    /// `left | right | car | empirical | cm | nn`.
    pub fn text(&self) -> String {
        format!(
            "{} | {} | {} | {:.3} | {:.3} | {:.3}",
            self.left, self.right, self.car_side, self.empirical, self.cm, self.nn
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub signature: String,
    pub mean_gap: f64,
    pub rows: Vec<ReportRow>,
}

/// The first `top_k` members of a cluster.
pub fn report_table(cluster: &ResidualCluster, top_k: usize) -> Result<Report> {
    if top_k == 0 {
        return Err(Error::validation("top must be at least 1"));
    }
    Ok(Report {
        signature: cluster.signature.to_string(),
        mean_gap: cluster.mean_gap,
        rows: cluster.members.iter().take(top_k).map(ReportRow::of).collect(),
    })
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# {} (mean gap {:.3}, {} rows)\nLeft | Right | Car Side | Empirical | CM | NN\n",
            self.signature,
            self.mean_gap,
            self.rows.len()
        );
        for r in &self.rows {
            out.push_str(&r.text());
            out.push('\n');
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut out = REPORT_COLUMNS.join("\t");
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{:.3}\t{:.3}\t{:.3}\t{:.3}\t{}",
                r.left, r.right, r.car_side, r.empirical, r.cm, r.nn, r.gap, r.n_responses
            );
        }
        out
    }
}

/// Per-cluster summary lines: signature, members, mean gap.
pub fn clusters_to_tsv(clusters: &[ResidualCluster]) -> String {
    let mut out = String::from("signature\tmembers\tmean_gap\n");
    for c in clusters {
        let _ = writeln!(out, "{}\t{}\t{:.6}", c.signature, c.members.len(), c.mean_gap);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{CharacterType as C, Response};

    fn scenario(l: &[C], r: &[C], heading: Side, legality: Legality) -> Scenario {
        Scenario::new(
            SideComposition::from_agents(l).unwrap(),
            SideComposition::from_agents(r).unwrap(),
            heading,
            legality,
        )
    }

    fn rows(s: Scenario, left: usize, total: usize) -> Vec<Response> {
        (0..total)
            .map(|i| Response {
                id: i.to_string(),
                scenario: s,
                saved: if i < left { Side::Left } else { Side::Right },
            })
            .collect()
    }

    #[test]
    fn aggregate_rates() {
        let a = scenario(&[C::Man], &[C::Dog], Side::Left, Legality::None);
        let b = scenario(&[C::Woman], &[C::Cat], Side::Right, Legality::None);
        let mut all = rows(a, 90, 100);
        all.extend(rows(b, 60, 100));
        let recs = aggregate(&Dataset::new(all).unwrap()).unwrap();
        assert_eq!(recs.len(), 2);
        let rate = |s: Scenario| recs.iter().find(|r| r.scenario == s).unwrap().empirical_left_rate;
        assert_eq!(rate(a), 0.90);
        assert_eq!(rate(b), 0.60);
        assert_eq!(recs.iter().map(|r| r.n_responses).sum::<usize>(), 200);
    }

    #[test]
    fn gap_arithmetic() {
        let s = scenario(&[C::PregnantWoman], &[C::Cat], Side::Left, Legality::RightLegal);
        let recs = aggregate(&Dataset::new(rows(s, 779, 1000)).unwrap()).unwrap();
        let recs = attach_probabilities(recs, &[0.411], &[0.797]);
        assert!((recs[0].gap - 0.350).abs() < 1e-12, "{}", recs[0].gap);
        let same = attach_probabilities(recs.clone(), &[0.5], &[0.5]);
        assert_eq!(same[0].gap, 0.0);
        let swapped = attach_probabilities(recs.clone(), &[0.797], &[0.411]);
        assert_eq!(swapped[0].gap, -recs[0].gap);
    }

    #[test]
    fn ranking_filters_and_orders() {
        let base = aggregate(
            &Dataset::new(
                [C::Man, C::Woman, C::Boy]
                    .iter()
                    .flat_map(|&c| rows(scenario(&[c], &[C::Dog], Side::Left, Legality::None), 5, 10))
                    .collect(),
            )
            .unwrap(),
        )
        .unwrap();
        let recs = attach_probabilities(base, &[0.85, 0.5, 0.5], &[0.5, 0.5, 0.6]);
        let ranked = rank_gaps(&recs, 1).unwrap();
        let gaps: Vec<f64> = ranked.iter().map(|r| r.gap).collect();
        assert!((gaps[0] - 0.35).abs() < 1e-12 && gaps[1] == 0.0 && (gaps[2] + 0.1).abs() < 1e-12);
        assert!(rank_gaps(&recs, 50).unwrap().is_empty());
        assert!(rank_gaps(&recs, 0).is_err());
    }

    #[test]
    fn table_row_format() {
        let s = scenario(&[C::OldMan], &[C::Boy], Side::Right, Legality::LeftLegal);
        let recs = aggregate(&Dataset::new(rows(s, 35, 100)).unwrap()).unwrap();
        let recs = attach_probabilities(recs, &[0.647], &[0.341]);
        let clusters = cluster_by_template(&recs).unwrap();
        assert_eq!(clusters[0].signature, ClusterSignature::Type(ProblemType::OldVsYoung));
        let report = report_table(&clusters[0], 10).unwrap();
        assert_eq!(
            report.rows[0].text(),
            "Old Man Crossing Legally | Boy Crossing Illegally | Right | 0.350 | 0.647 | 0.341"
        );
        assert!(report_table(&clusters[0], 0).is_err());
    }

    #[test]
    fn humans_vs_animals_rows_share_a_cluster() {
        let mut all = rows(scenario(&[C::PregnantWoman], &[C::Cat], Side::Left, Legality::RightLegal), 3, 4);
        all.extend(rows(scenario(&[C::Dog], &[C::Girl], Side::Right, Legality::None), 1, 4));
        let recs = aggregate(&Dataset::new(all).unwrap()).unwrap();
        let clusters = cluster_by_template(&recs).unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].signature, ClusterSignature::Type(ProblemType::HumansVsAnimals));
        assert_eq!(clusters[0].members.len(), 2);
    }
}
