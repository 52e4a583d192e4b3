//! Dilemma domain model: characters and their attributes, side compositions,
//! scenarios, the canonical 42-component key, mirroring, and problem-type
//! detection.
//!
//! Key layout (fixed, also the CSV column order):
//!
//! | components | meaning                                              |
//! |------------|------------------------------------------------------|
//! | 0..20      | left-side counts in [`CharacterType::ALL`] order     |
//! | 20..40     | right-side counts in the same order                  |
//! | 40         | car heading: +1 left, -1 right                        |
//! | 41         | legality: 0 none, +1 left crosses legally, -1 right  |

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest group allowed on one side.
pub const MAX_GROUP_SIZE: u8 = 5;
pub const NUM_CHARACTERS: usize = 20;
pub const KEY_LEN: usize = 2 * NUM_CHARACTERS + 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharacterType {
    Man,
    Woman,
    Boy,
    Girl,
    OldMan,
    OldWoman,
    PregnantWoman,
    Stroller,
    LargeMan,
    LargeWoman,
    MaleAthlete,
    FemaleAthlete,
    MaleExecutive,
    FemaleExecutive,
    MaleDoctor,
    FemaleDoctor,
    Homeless,
    Criminal,
    Dog,
    Cat,
}

impl CharacterType {
    pub const ALL: [CharacterType; NUM_CHARACTERS] = [
        CharacterType::Man,
        CharacterType::Woman,
        CharacterType::Boy,
        CharacterType::Girl,
        CharacterType::OldMan,
        CharacterType::OldWoman,
        CharacterType::PregnantWoman,
        CharacterType::Stroller,
        CharacterType::LargeMan,
        CharacterType::LargeWoman,
        CharacterType::MaleAthlete,
        CharacterType::FemaleAthlete,
        CharacterType::MaleExecutive,
        CharacterType::FemaleExecutive,
        CharacterType::MaleDoctor,
        CharacterType::FemaleDoctor,
        CharacterType::Homeless,
        CharacterType::Criminal,
        CharacterType::Dog,
        CharacterType::Cat,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Snake-case identifier used in CSV headers, configs and the DSL.
    pub fn ident(self) -> &'static str {
        match self {
            CharacterType::Man => "man",
            CharacterType::Woman => "woman",
            CharacterType::Boy => "boy",
            CharacterType::Girl => "girl",
            CharacterType::OldMan => "old_man",
            CharacterType::OldWoman => "old_woman",
            CharacterType::PregnantWoman => "pregnant_woman",
            CharacterType::Stroller => "stroller",
            CharacterType::LargeMan => "large_man",
            CharacterType::LargeWoman => "large_woman",
            CharacterType::MaleAthlete => "male_athlete",
            CharacterType::FemaleAthlete => "female_athlete",
            CharacterType::MaleExecutive => "male_executive",
            CharacterType::FemaleExecutive => "female_executive",
            CharacterType::MaleDoctor => "male_doctor",
            CharacterType::FemaleDoctor => "female_doctor",
            CharacterType::Homeless => "homeless",
            CharacterType::Criminal => "criminal",
            CharacterType::Dog => "dog",
            CharacterType::Cat => "cat",
        }
    }

    pub fn from_ident(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.ident() == s)
    }

    /// Human-readable name, e.g. "Old Man".
    pub fn display_name(self) -> &'static str {
        match self {
            CharacterType::Man => "Man",
            CharacterType::Woman => "Woman",
            CharacterType::Boy => "Boy",
            CharacterType::Girl => "Girl",
            CharacterType::OldMan => "Old Man",
            CharacterType::OldWoman => "Old Woman",
            CharacterType::PregnantWoman => "Pregnant Woman",
            CharacterType::Stroller => "Stroller",
            CharacterType::LargeMan => "Large Man",
            CharacterType::LargeWoman => "Large Woman",
            CharacterType::MaleAthlete => "Male Athlete",
            CharacterType::FemaleAthlete => "Female Athlete",
            CharacterType::MaleExecutive => "Male Executive",
            CharacterType::FemaleExecutive => "Female Executive",
            CharacterType::MaleDoctor => "Male Doctor",
            CharacterType::FemaleDoctor => "Female Doctor",
            CharacterType::Homeless => "Homeless",
            CharacterType::Criminal => "Criminal",
            CharacterType::Dog => "Dog",
            CharacterType::Cat => "Cat",
        }
    }
}

impl fmt::Display for CharacterType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.ident())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Species {
    Human,
    Animal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgeGroup {
    Young,
    Adult,
    Old,
    Na,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyType {
    Large,
    Fit,
    Neutral,
    Na,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Male,
    Female,
    Na,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    High,
    Low,
    Neutral,
    Na,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Attributes {
    pub species: Species,
    pub age: AgeGroup,
    pub body: BodyType,
    pub gender: Gender,
    pub status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// Single-letter code used in CSV files.
    pub fn code(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }

    pub fn from_code(s: &str) -> Option<Side> {
        match s {
            "L" => Some(Side::Left),
            "R" => Some(Side::Right),
            _ => None,
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Side::Left => "Left",
            Side::Right => "Right",
        }
    }
}

/// Crossing-signal status. When not `None`, the named side crosses legally
/// and the other side crosses illegally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Legality {
    None,
    LeftLegal,
    RightLegal,
}

impl Legality {
    pub const ALL: [Legality; 3] = [Legality::None, Legality::LeftLegal, Legality::RightLegal];

    pub fn code(self) -> &'static str {
        match self {
            Legality::None => "none",
            Legality::LeftLegal => "left_legal",
            Legality::RightLegal => "right_legal",
        }
    }

    pub fn from_code(s: &str) -> Option<Legality> {
        Self::ALL.into_iter().find(|l| l.code() == s)
    }

    pub fn mirrored(self) -> Legality {
        match self {
            Legality::None => Legality::None,
            Legality::LeftLegal => Legality::RightLegal,
            Legality::RightLegal => Legality::LeftLegal,
        }
    }

    /// The side crossing legally, if any.
    pub fn legal_side(self) -> Option<Side> {
        match self {
            Legality::None => None,
            Legality::LeftLegal => Some(Side::Left),
            Legality::RightLegal => Some(Side::Right),
        }
    }

    fn encode(self) -> i8 {
        match self {
            Legality::None => 0,
            Legality::LeftLegal => 1,
            Legality::RightLegal => -1,
        }
    }
}

/// Multiset of characters standing on one side of the road.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SideComposition {
    counts: [u8; NUM_CHARACTERS],
}

impl SideComposition {
    pub fn from_counts(counts: [u8; NUM_CHARACTERS]) -> Result<Self> {
        let total: u32 = counts.iter().map(|&c| u32::from(c)).sum();
        if total == 0 || total > u32::from(MAX_GROUP_SIZE) {
            return Err(Error::validation(format!(
                "side must hold between 1 and {MAX_GROUP_SIZE} characters, got {total}"
            )));
        }
        Ok(Self { counts })
    }

    pub fn from_agents(agents: &[CharacterType]) -> Result<Self> {
        let mut counts = [0u8; NUM_CHARACTERS];
        for a in agents {
            counts[a.index()] = counts[a.index()].saturating_add(1);
        }
        Self::from_counts(counts)
    }

    pub fn counts(&self) -> &[u8; NUM_CHARACTERS] {
        &self.counts
    }

    pub fn count(&self, c: CharacterType) -> u8 {
        self.counts[c.index()]
    }

    pub fn total(&self) -> u8 {
        self.counts.iter().sum()
    }

    /// Characters with multiplicity, in canonical order.
    pub fn agents(&self) -> impl Iterator<Item = CharacterType> + '_ {
        CharacterType::ALL
            .into_iter()
            .flat_map(move |c| std::iter::repeat_n(c, usize::from(self.counts[c.index()])))
    }

    /// True when `self` is a strict sub-multiset of `other`.
    pub fn is_strict_subset_of(&self, other: &SideComposition) -> bool {
        self.counts.iter().zip(&other.counts).all(|(a, b)| a <= b) && self.counts != other.counts
    }

    /// e.g. "Old Man", "2 Dog, Cat".
    pub fn describe(&self) -> String {
        CharacterType::ALL
            .into_iter()
            .filter(|c| self.count(*c) > 0)
            .map(|c| match self.count(c) {
                1 => c.display_name().to_string(),
                n => format!("{n} {}", c.display_name()),
            })
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scenario {
    pub left: SideComposition,
    pub right: SideComposition,
    /// Side the car kills if it does not swerve.
    pub car_heading: Side,
    pub legality: Legality,
}

impl Scenario {
    pub fn new(left: SideComposition, right: SideComposition, car_heading: Side, legality: Legality) -> Self {
        Self {
            left,
            right,
            car_heading,
            legality,
        }
    }

    pub fn side(&self, side: Side) -> &SideComposition {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    /// Swap the two sides, flipping car heading and legality with them.
    pub fn mirror(&self) -> Scenario {
        Scenario {
            left: self.right,
            right: self.left,
            car_heading: self.car_heading.other(),
            legality: self.legality.mirrored(),
        }
    }

    pub fn encode(&self) -> DilemmaKey {
        let mut v = [0i8; KEY_LEN];
        for i in 0..NUM_CHARACTERS {
            v[i] = self.left.counts[i] as i8;
            v[NUM_CHARACTERS + i] = self.right.counts[i] as i8;
        }
        v[2 * NUM_CHARACTERS] = match self.car_heading {
            Side::Left => 1,
            Side::Right => -1,
        };
        v[2 * NUM_CHARACTERS + 1] = self.legality.encode();
        DilemmaKey(v)
    }
}

/// Canonical 42-component encoding of a [`Scenario`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DilemmaKey(pub [i8; KEY_LEN]);

impl DilemmaKey {
    pub fn decode(&self) -> Result<Scenario> {
        let v = &self.0;
        let side = |offset: usize| -> Result<SideComposition> {
            let mut counts = [0u8; NUM_CHARACTERS];
            for (i, c) in counts.iter_mut().enumerate() {
                let x = v[offset + i];
                if !(0..=MAX_GROUP_SIZE as i8).contains(&x) {
                    return Err(Error::validation(format!("count {x} out of range at component {}", offset + i)));
                }
                *c = x as u8;
            }
            SideComposition::from_counts(counts)
        };
        let car_heading = match v[2 * NUM_CHARACTERS] {
            1 => Side::Left,
            -1 => Side::Right,
            x => return Err(Error::validation(format!("car heading code {x}"))),
        };
        let legality = match v[2 * NUM_CHARACTERS + 1] {
            0 => Legality::None,
            1 => Legality::LeftLegal,
            -1 => Legality::RightLegal,
            x => return Err(Error::validation(format!("legality code {x}"))),
        };
        Ok(Scenario::new(side(0)?, side(NUM_CHARACTERS)?, car_heading, legality))
    }

    pub fn to_f64(&self) -> [f64; KEY_LEN] {
        self.0.map(f64::from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemType {
    HumansVsAnimals,
    OldVsYoung,
    MoreVsLess,
    FatVsFit,
    MaleVsFemale,
    HighVsLowStatus,
}

impl ProblemType {
    /// Detection precedence order.
    pub const ALL: [ProblemType; 6] = [
        ProblemType::HumansVsAnimals,
        ProblemType::OldVsYoung,
        ProblemType::MoreVsLess,
        ProblemType::FatVsFit,
        ProblemType::MaleVsFemale,
        ProblemType::HighVsLowStatus,
    ];

    pub fn ident(self) -> &'static str {
        match self {
            ProblemType::HumansVsAnimals => "humans_vs_animals",
            ProblemType::OldVsYoung => "old_vs_young",
            ProblemType::MoreVsLess => "more_vs_less",
            ProblemType::FatVsFit => "fat_vs_fit",
            ProblemType::MaleVsFemale => "male_vs_female",
            ProblemType::HighVsLowStatus => "high_vs_low_status",
        }
    }

    pub fn from_ident(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.ident() == s)
    }

    /// Name of the positive pole (humans, young, more, fit, female, high).
    pub fn pole_name(self) -> &'static str {
        match self {
            ProblemType::HumansVsAnimals => "humans",
            ProblemType::OldVsYoung => "young",
            ProblemType::MoreVsLess => "more",
            ProblemType::FatVsFit => "fit",
            ProblemType::MaleVsFemale => "female",
            ProblemType::HighVsLowStatus => "high",
        }
    }

    /// Name of the opposite pole (animals, old, less, fat, male, low).
    pub fn counter_pole_name(self) -> &'static str {
        match self {
            ProblemType::HumansVsAnimals => "animals",
            ProblemType::OldVsYoung => "old",
            ProblemType::MoreVsLess => "less",
            ProblemType::FatVsFit => "fat",
            ProblemType::MaleVsFemale => "male",
            ProblemType::HighVsLowStatus => "low",
        }
    }

    /// Resolve a pole name to its type and whether it is the positive pole.
    pub fn from_pole_name(s: &str) -> Option<(ProblemType, bool)> {
        Self::ALL.into_iter().find_map(|t| {
            if t.pole_name() == s {
                Some((t, true))
            } else if t.counter_pole_name() == s {
                Some((t, false))
            } else {
                None
            }
        })
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ProblemType::HumansVsAnimals => "Humans vs. Animals",
            ProblemType::OldVsYoung => "Old vs. Young",
            ProblemType::MoreVsLess => "More vs. Less",
            ProblemType::FatVsFit => "Fat vs. Fit",
            ProblemType::MaleVsFemale => "Male vs. Female",
            ProblemType::HighVsLowStatus => "High vs. Low Status",
        }
    }
}

impl fmt::Display for ProblemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.ident())
    }
}

/// A detected problem type together with the side holding its positive pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Detection {
    pub problem_type: ProblemType,
    pub pole: Side,
}

/// One recorded decision: which side of the dilemma was saved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    /// Opaque row identifier (the `scenario_id` CSV column).
    pub id: String,
    pub scenario: Scenario,
    pub saved: Side,
}

/// Attribute-based dimensions with counterpart tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dimension {
    Species,
    Age,
    Body,
    Gender,
    Status,
}

impl Dimension {
    fn of(t: ProblemType) -> Option<Dimension> {
        match t {
            ProblemType::HumansVsAnimals => Some(Dimension::Species),
            ProblemType::OldVsYoung => Some(Dimension::Age),
            ProblemType::MoreVsLess => None,
            ProblemType::FatVsFit => Some(Dimension::Body),
            ProblemType::MaleVsFemale => Some(Dimension::Gender),
            ProblemType::HighVsLowStatus => Some(Dimension::Status),
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Deserialize)]
struct TaxonomyFile {
    characters: BTreeMap<String, Attributes>,
    counterparts: CounterpartFile,
}

#[derive(Debug, Deserialize)]
struct CounterpartFile {
    #[serde(default)]
    age: Vec<[String; 2]>,
    #[serde(default)]
    body: Vec<[String; 2]>,
    #[serde(default)]
    gender: Vec<[String; 2]>,
    #[serde(default)]
    status: Vec<[String; 2]>,
}

const STANDARD_TAXONOMY: &str = include_str!("../data/taxonomy.toml");

/// Character attributes plus the counterpart relations used for problem-type
/// detection.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    attributes: [Attributes; NUM_CHARACTERS],
    /// `pairs[dim]`: counterpart pairs as (pole member, other member).
    pairs: [Vec<(CharacterType, CharacterType)>; 5],
    /// `related[dim][a][b]`: `a` is the pole counterpart of `b`.
    related: [[[bool; NUM_CHARACTERS]; NUM_CHARACTERS]; 5],
}

impl Taxonomy {
    /// The built-in taxonomy shipped in `data/taxonomy.toml`.
    pub fn standard() -> &'static Taxonomy {
        static STANDARD: OnceLock<Taxonomy> = OnceLock::new();
        STANDARD.get_or_init(|| Taxonomy::from_toml_str(STANDARD_TAXONOMY).expect("built-in taxonomy is valid"))
    }

    pub fn from_file(path: &Path) -> Result<Taxonomy> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Taxonomy> {
        let file: TaxonomyFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut attrs: [Option<Attributes>; NUM_CHARACTERS] = [None; NUM_CHARACTERS];
        for (name, a) in &file.characters {
            let c = CharacterType::from_ident(name)
                .ok_or_else(|| Error::Config(format!("unknown character `{name}` in taxonomy")))?;
            attrs[c.index()] = Some(*a);
        }
        let mut attributes = [attrs[0].unwrap_or(DEFAULT_ATTRS); NUM_CHARACTERS];
        for c in CharacterType::ALL {
            attributes[c.index()] = attrs[c.index()]
                .ok_or_else(|| Error::Config(format!("taxonomy has no attributes for `{c}`")))?;
        }

        let mut pairs: [Vec<(CharacterType, CharacterType)>; 5] = Default::default();
        for a in CharacterType::ALL {
            for b in CharacterType::ALL {
                if attributes[a.index()].species == Species::Human && attributes[b.index()].species == Species::Animal {
                    pairs[Dimension::Species.slot()].push((a, b));
                }
            }
        }
        let tables = [
            (Dimension::Age, &file.counterparts.age),
            (Dimension::Body, &file.counterparts.body),
            (Dimension::Gender, &file.counterparts.gender),
            (Dimension::Status, &file.counterparts.status),
        ];
        for (dim, table) in tables {
            for [x, y] in table {
                let lookup = |n: &str| {
                    CharacterType::from_ident(n)
                        .ok_or_else(|| Error::Config(format!("unknown character `{n}` in counterparts")))
                };
                let (x, y) = (lookup(x)?, lookup(y)?);
                let (px, py) = (is_pole(dim, &attributes[x.index()]), is_pole(dim, &attributes[y.index()]));
                let pair = match (px, py) {
                    (true, false) => (x, y),
                    (false, true) => (y, x),
                    _ => {
                        return Err(Error::Config(format!(
                            "counterpart pair {x}/{y} must have exactly one member at the {dim:?} pole"
                        )))
                    }
                };
                if dim_value(dim, &attributes[pair.1.index()]) == DimValue::NotApplicable {
                    return Err(Error::Config(format!("{} has no {dim:?} attribute", pair.1)));
                }
                pairs[dim.slot()].push(pair);
            }
        }

        let mut related = [[[false; NUM_CHARACTERS]; NUM_CHARACTERS]; 5];
        for (slot, list) in pairs.iter().enumerate() {
            for &(p, o) in list {
                related[slot][p.index()][o.index()] = true;
            }
        }
        Ok(Taxonomy {
            attributes,
            pairs,
            related,
        })
    }

    pub fn attributes(&self, c: CharacterType) -> &Attributes {
        &self.attributes[c.index()]
    }

    pub fn is_human(&self, c: CharacterType) -> bool {
        self.attributes(c).species == Species::Human
    }

    /// Counterpart pairs `(pole member, other member)` for a problem type.
    /// Empty for `MoreVsLess`.
    pub fn counterpart_pairs(&self, t: ProblemType) -> &[(CharacterType, CharacterType)] {
        match Dimension::of(t) {
            Some(d) => &self.pairs[d.slot()],
            None => &[],
        }
    }

    /// Counterparts of `c` in the dimension of `t`, in either direction.
    pub fn counterparts_of(&self, t: ProblemType, c: CharacterType) -> Vec<CharacterType> {
        self.counterpart_pairs(t)
            .iter()
            .filter_map(|&(p, o)| {
                if p == c {
                    Some(o)
                } else if o == c {
                    Some(p)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Problem type of a scenario, first match in [`ProblemType::ALL`] order.
    pub fn detect(&self, s: &Scenario) -> Option<Detection> {
        // Agents present on both sides always pair with themselves in any valid
        // matching (a character cannot be both pole and counter-pole), so only
        // the residual multisets need matching.
        let mut rest_left = Vec::new();
        let mut rest_right = Vec::new();
        for c in CharacterType::ALL {
            let (l, r) = (s.left.count(c), s.right.count(c));
            let common = l.min(r);
            rest_left.extend(std::iter::repeat_n(c, usize::from(l - common)));
            rest_right.extend(std::iter::repeat_n(c, usize::from(r - common)));
        }
        for t in ProblemType::ALL {
            let found = match Dimension::of(t) {
                None => {
                    if s.left.is_strict_subset_of(&s.right) {
                        Some(Side::Right)
                    } else if s.right.is_strict_subset_of(&s.left) {
                        Some(Side::Left)
                    } else {
                        None
                    }
                }
                Some(dim) => {
                    if rest_left.is_empty() || rest_left.len() != rest_right.len() {
                        None
                    } else {
                        let rel = &self.related[dim.slot()];
                        if perfect_matching(rel, &rest_left, &rest_right) {
                            Some(Side::Left)
                        } else if perfect_matching(rel, &rest_right, &rest_left) {
                            Some(Side::Right)
                        } else {
                            None
                        }
                    }
                }
            };
            if let Some(pole) = found {
                return Some(Detection { problem_type: t, pole });
            }
        }
        None
    }
}

const DEFAULT_ATTRS: Attributes = Attributes {
    species: Species::Human,
    age: AgeGroup::Na,
    body: BodyType::Na,
    gender: Gender::Na,
    status: Status::Na,
};

#[derive(Debug, PartialEq, Eq)]
enum DimValue {
    Pole,
    Other,
    NotApplicable,
}

fn dim_value(dim: Dimension, a: &Attributes) -> DimValue {
    let (pole, na) = match dim {
        Dimension::Species => (a.species == Species::Human, false),
        Dimension::Age => (a.age == AgeGroup::Young, a.age == AgeGroup::Na),
        Dimension::Body => (a.body == BodyType::Fit, a.body == BodyType::Na),
        Dimension::Gender => (a.gender == Gender::Female, a.gender == Gender::Na),
        Dimension::Status => (a.status == Status::High, a.status == Status::Na),
    };
    if na {
        DimValue::NotApplicable
    } else if pole {
        DimValue::Pole
    } else {
        DimValue::Other
    }
}

fn is_pole(dim: Dimension, a: &Attributes) -> bool {
    dim_value(dim, a) == DimValue::Pole
}

/// Does a bijection pair every `poles[i]` with some `others[j]` such that
/// `rel[pole][other]` holds?
fn perfect_matching(rel: &[[bool; NUM_CHARACTERS]; NUM_CHARACTERS], poles: &[CharacterType], others: &[CharacterType]) -> bool {
    fn go(
        rel: &[[bool; NUM_CHARACTERS]; NUM_CHARACTERS],
        poles: &[CharacterType],
        others: &[CharacterType],
        used: u32,
    ) -> bool {
        let Some((&p, rest)) = poles.split_first() else {
            return true;
        };
        others.iter().enumerate().any(|(j, &o)| {
            used & (1 << j) == 0 && rel[p.index()][o.index()] && go(rel, rest, others, used | (1 << j))
        })
    }
    go(rel, poles, others, 0)
}

/// Problem type of `s` under the standard taxonomy.
pub fn detect_problem_type(s: &Scenario) -> Option<Detection> {
    Taxonomy::standard().detect(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use CharacterType::*;

    fn side(agents: &[CharacterType]) -> SideComposition {
        SideComposition::from_agents(agents).unwrap()
    }

    fn scen(l: &[CharacterType], r: &[CharacterType]) -> Scenario {
        Scenario::new(side(l), side(r), Side::Left, Legality::None)
    }

    #[test]
    fn taxonomy_is_total_and_has_two_animals() {
        let tax = Taxonomy::standard();
        let animals: Vec<_> = CharacterType::ALL.into_iter().filter(|&c| !tax.is_human(c)).collect();
        assert_eq!(animals, vec![Dog, Cat]);
        assert_eq!(CharacterType::ALL.len(), 20);
        for (i, c) in CharacterType::ALL.into_iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(CharacterType::from_ident(c.ident()), Some(c));
        }
    }

    #[test]
    fn counterparts_are_consistent_with_attributes() {
        let tax = Taxonomy::standard();
        assert_eq!(tax.counterparts_of(ProblemType::MaleVsFemale, Man), vec![Woman]);
        assert_eq!(tax.counterparts_of(ProblemType::MaleVsFemale, Woman), vec![Man]);
        for t in [ProblemType::OldVsYoung, ProblemType::FatVsFit, ProblemType::MaleVsFemale, ProblemType::HighVsLowStatus] {
            for &(p, o) in tax.counterpart_pairs(t) {
                let (a, b) = (tax.attributes(p), tax.attributes(o));
                match t {
                    ProblemType::OldVsYoung => assert!(a.age == AgeGroup::Young && b.age == AgeGroup::Old),
                    ProblemType::FatVsFit => assert!(a.body == BodyType::Fit && b.body == BodyType::Large),
                    ProblemType::MaleVsFemale => {
                        assert!(a.gender == Gender::Female && b.gender == Gender::Male);
                        assert_eq!((a.age, a.body, a.status), (b.age, b.body, b.status));
                    }
                    ProblemType::HighVsLowStatus => assert!(a.status == Status::High && b.status == Status::Low),
                    _ => unreachable!(),
                }
            }
        }
        // Stroller has no age counterpart.
        assert!(tax.counterparts_of(ProblemType::OldVsYoung, Stroller).is_empty());
    }

    #[test]
    fn rejects_bad_taxonomy() {
        let bad = STANDARD_TAXONOMY.replace(r#"["boy", "old_man"]"#, r#"["boy", "girl"]"#);
        assert!(matches!(Taxonomy::from_toml_str(&bad), Err(Error::Config(_))));
        let missing = STANDARD_TAXONOMY.replace("cat             =", "#");
        assert!(Taxonomy::from_toml_str(&missing).is_err());
    }

    #[test]
    fn side_size_limits() {
        assert!(SideComposition::from_agents(&[]).is_err());
        assert!(SideComposition::from_agents(&[Man; 6]).is_err());
        assert_eq!(side(&[Man, Man, Dog]).total(), 3);
    }

    #[test]
    fn encode_example() {
        let s = Scenario::new(side(&[Man]), side(&[Dog]), Side::Left, Legality::RightLegal);
        let k = s.encode();
        let mut expected = [0i8; KEY_LEN];
        expected[Man.index()] = 1;
        expected[20 + Dog.index()] = 1;
        expected[40] = 1;
        expected[41] = -1;
        assert_eq!(k.0, expected);
        assert_eq!(k.decode().unwrap(), s);
    }

    #[test]
    fn legality_only_changes_last_component() {
        let a = Scenario::new(side(&[Boy, Cat]), side(&[Girl]), Side::Right, Legality::None);
        let b = Scenario { legality: Legality::LeftLegal, ..a };
        let (ka, kb) = (a.encode(), b.encode());
        let diffs: Vec<usize> = (0..KEY_LEN).filter(|&i| ka.0[i] != kb.0[i]).collect();
        assert_eq!(diffs, vec![41]);
    }

    #[test]
    fn decode_rejects_invalid_keys() {
        let mut k = scen(&[Man], &[Woman]).encode();
        k.0[0] = 6;
        assert!(k.decode().is_err());
        let mut k = scen(&[Man], &[Woman]).encode();
        k.0[40] = 0;
        assert!(k.decode().is_err());
    }

    #[test]
    fn mirror_examples() {
        let s = Scenario::new(side(&[Man]), side(&[Cat]), Side::Left, Legality::None);
        let m = s.mirror();
        assert_eq!(m.left, side(&[Cat]));
        assert_eq!(m.right, side(&[Man]));
        assert_eq!(m.car_heading, Side::Right);
        assert_eq!(m.legality, Legality::None);
        assert_eq!(m.mirror(), s);
        let s = Scenario { legality: Legality::LeftLegal, ..s };
        assert_eq!(s.mirror().legality, Legality::RightLegal);
    }

    #[test]
    fn detection_examples() {
        let d = |l: &[CharacterType], r: &[CharacterType]| detect_problem_type(&scen(l, r));
        assert_eq!(
            d(&[PregnantWoman], &[Cat]),
            Some(Detection { problem_type: ProblemType::HumansVsAnimals, pole: Side::Left })
        );
        assert_eq!(
            d(&[OldMan], &[Boy]),
            Some(Detection { problem_type: ProblemType::OldVsYoung, pole: Side::Right })
        );
        assert_eq!(
            d(&[Man], &[Man, Woman]),
            Some(Detection { problem_type: ProblemType::MoreVsLess, pole: Side::Right })
        );
        assert_eq!(d(&[Man], &[OldWoman]), None);
        assert_eq!(d(&[Man], &[Man]), None);
        assert_eq!(
            d(&[LargeWoman, Dog], &[FemaleAthlete, Dog]),
            Some(Detection { problem_type: ProblemType::FatVsFit, pole: Side::Right })
        );
        assert_eq!(
            d(&[MaleExecutive, FemaleDoctor], &[Homeless, Criminal]),
            Some(Detection { problem_type: ProblemType::HighVsLowStatus, pole: Side::Left })
        );
        // Mixed directions do not form a type.
        assert_eq!(d(&[Man, Girl], &[Woman, Boy]), None);
        // Mixed dimensions do not form a type.
        assert_eq!(d(&[Boy, Man], &[OldMan, Woman]), None);
        assert_eq!(
            d(&[Man, Girl, Dog], &[Cat, Cat, Man]),
            None,
            "unequal animal/human residual is not a humans-vs-animals pair"
        );
        assert_eq!(
            d(&[Man, Boy], &[Dog, Cat]),
            Some(Detection { problem_type: ProblemType::HumansVsAnimals, pole: Side::Left })
        );
    }

    #[test]
    fn side_description() {
        assert_eq!(side(&[OldMan]).describe(), "Old Man");
        assert_eq!(side(&[Cat, Dog, Dog]).describe(), "2 Dog, Cat");
    }
}
