//! Canonical CSV reading/writing and seeded train/test splits.
//!
//! Header (comma separated, LF line endings):
//!
//! ```text
//! scenario_id,left_man,...,left_cat,right_man,...,right_cat,car_heading,legality,saved
//! ```
//!
//! `car_heading` and `saved` are `L`/`R`; `legality` is `none`, `left_legal`
//! or `right_legal`.
//!
//! Splits permute row indices with a seeded generator, so the row order of
//! the file is part of the reproducibility contract. Splitting is i.i.d. over
//! response rows: the same dilemma can appear in both train and test.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;
use crate::scenario::{CharacterType, Legality, Response, Scenario, Side, SideComposition, NUM_CHARACTERS};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    pub source: Option<String>,
    pub seed: Option<u64>,
    pub config_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub rows: Vec<Response>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(rows: Vec<Response>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Self {
            rows,
            provenance: Provenance::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset> {
        let rows = indices.iter().map(|&i| self.rows[i].clone()).collect();
        let mut d = Dataset::new(rows)?;
        d.provenance = self.provenance.clone();
        Ok(d)
    }

    pub fn scenarios(&self) -> Vec<Scenario> {
        self.rows.iter().map(|r| r.scenario).collect()
    }

    /// 1.0 where the left side was saved.
    pub fn left_labels(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.saved == Side::Left).collect()
    }

    /// `n` rows drawn without replacement, in random order.
    pub fn subsample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n > self.len() {
            return Err(Error::validation(format!("requested {n} rows from a dataset of {}", self.len())));
        }
        let mut idx: Vec<usize> = (0..self.len()).collect();
        let mut r = rng::stream(seed, 0x5AB5);
        let (chosen, _) = idx.partial_shuffle(&mut r, n);
        let chosen = chosen.to_vec();
        self.select(&chosen)
    }
}

pub fn csv_header() -> Vec<String> {
    let mut h = vec!["scenario_id".to_string()];
    for side in ["left", "right"] {
        for c in CharacterType::ALL {
            h.push(format!("{side}_{}", c.ident()));
        }
    }
    h.extend(["car_heading", "legality", "saved"].map(String::from));
    h
}

fn row_error(line: u64, message: impl Into<String>) -> Error {
    Error::Row {
        line,
        message: message.into(),
    }
}

pub fn read_csv(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut d = read_csv_from(file).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    d.provenance.source = Some(path.display().to_string());
    Ok(d)
}

pub fn read_csv_from<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let expected = csv_header();
    let mut records = rdr.records();
    let header = match records.next() {
        Some(h) => h.map_err(csv_error)?,
        None => return Err(Error::Schema("file is empty; expected a header row".into())),
    };
    let found: Vec<&str> = header.iter().collect();
    if found != expected {
        let missing: Vec<&str> = expected.iter().map(String::as_str).filter(|c| !found.contains(c)).collect();
        let extra: Vec<&str> = found.iter().copied().filter(|c| !expected.iter().any(|e| e == c)).collect();
        let msg = if missing.is_empty() && extra.is_empty() {
            "columns are out of canonical order".to_string()
        } else {
            format!("missing columns {missing:?}, unexpected columns {extra:?}")
        };
        return Err(Error::Schema(msg));
    }

    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != expected.len() {
            return Err(row_error(line, format!("expected {} fields, found {}", expected.len(), rec.len())));
        }
        let mut sides = [[0u8; NUM_CHARACTERS]; 2];
        for (s, counts) in sides.iter_mut().enumerate() {
            for (i, c) in counts.iter_mut().enumerate() {
                let col = 1 + s * NUM_CHARACTERS + i;
                let cell = &rec[col];
                *c = cell
                    .parse::<u8>()
                    .map_err(|_| row_error(line, format!("{}: `{cell}` is not a non-negative integer", expected[col])))?;
            }
        }
        let left = SideComposition::from_counts(sides[0]).map_err(|e| row_error(line, format!("left side: {e}")))?;
        let right = SideComposition::from_counts(sides[1]).map_err(|e| row_error(line, format!("right side: {e}")))?;
        let n = expected.len();
        let car_heading = Side::from_code(&rec[n - 3])
            .ok_or_else(|| row_error(line, format!("car_heading: `{}` is not L or R", &rec[n - 3])))?;
        let legality = Legality::from_code(&rec[n - 2])
            .ok_or_else(|| row_error(line, format!("legality: `{}` is not none/left_legal/right_legal", &rec[n - 2])))?;
        let saved =
            Side::from_code(&rec[n - 1]).ok_or_else(|| row_error(line, format!("saved: `{}` is not L or R", &rec[n - 1])))?;
        rows.push(Response {
            id: rec[0].to_string(),
            scenario: Scenario::new(left, right, car_heading, legality),
            saved,
        });
    }
    Dataset::new(rows)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io("<csv>", source),
        other => row_error(line, format!("{other:?}")),
    }
}

pub fn write_csv_to<W: Write>(d: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io("<csv>", source),
        other => Error::Schema(format!("{other:?}")),
    };
    w.write_record(csv_header()).map_err(io)?;
    let mut fields: Vec<String> = Vec::with_capacity(2 * NUM_CHARACTERS + 4);
    for r in &d.rows {
        fields.clear();
        fields.push(r.id.clone());
        for side in [&r.scenario.left, &r.scenario.right] {
            fields.extend(side.counts().iter().map(|c| c.to_string()));
        }
        fields.push(r.scenario.car_heading.code().to_string());
        fields.push(r.scenario.legality.code().to_string());
        fields.push(r.saved.code().to_string());
        w.write_record(&fields).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn write_csv(d: &Dataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(d, std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
    pub replicates: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 0,
            replicates: 5,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::validation(format!("train fraction {} not in (0, 1)", self.train_fraction)));
        }
        if self.replicates == 0 {
            return Err(Error::validation("replicates must be at least 1"));
        }
        Ok(())
    }
}

/// Train/test index partition for one replicate.
pub fn split_indices(n: usize, cfg: &SplitConfig, replicate: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    cfg.validate()?;
    if replicate >= cfg.replicates {
        return Err(Error::validation(format!("replicate {replicate} >= {}", cfg.replicates)));
    }
    let n_train = (cfg.train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::validation(format!(
            "{n} rows cannot be split {}/{} into non-empty parts",
            cfg.train_fraction,
            1.0 - cfg.train_fraction
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::stream(cfg.seed, replicate as u64));
    let test = idx.split_off(n_train);
    Ok((idx, test))
}

pub fn split(d: &Dataset, cfg: &SplitConfig, replicate: usize) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(d.len(), cfg, replicate)?;
    Ok((d.select(&train)?, d.select(&test)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::CharacterType::*;

    fn small() -> Dataset {
        let l = SideComposition::from_agents(&[Man, Dog]).unwrap();
        let r = SideComposition::from_agents(&[Girl]).unwrap();
        let rows = (0..10)
            .map(|i| Response {
                id: i.to_string(),
                scenario: Scenario::new(l, r, if i % 2 == 0 { Side::Left } else { Side::Right }, Legality::ALL[i % 3]),
                saved: if i % 3 == 0 { Side::Left } else { Side::Right },
            })
            .collect();
        Dataset::new(rows).unwrap()
    }

    fn to_string(d: &Dataset) -> String {
        let mut buf = Vec::new();
        write_csv_to(d, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn header_is_canonical() {
        let h = csv_header();
        assert_eq!(h.len(), 44);
        assert_eq!(h[1], "left_man");
        assert_eq!(h[20], "left_cat");
        assert_eq!(h[21], "right_man");
        assert_eq!(&h[41..], &["car_heading", "legality", "saved"]);
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let text = to_string(&small());
        assert!(!text.contains('\r'));
        let back = read_csv_from(text.as_bytes()).unwrap();
        assert_eq!(back.rows, small().rows);
        assert_eq!(to_string(&back), text);
    }

    #[test]
    fn header_only_is_empty_dataset() {
        let text = csv_header().join(",") + "\n";
        assert!(matches!(read_csv_from(text.as_bytes()), Err(Error::EmptyDataset)));
    }

    #[test]
    fn bad_header_names_columns() {
        let text = to_string(&small()).replacen("left_dog", "left_wolf", 1);
        let err = read_csv_from(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("left_dog") && err.contains("left_wolf"), "{err}");
    }

    #[test]
    fn count_above_cap_is_rejected_with_line() {
        let text = to_string(&small());
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let mut cells: Vec<&str> = lines[3].split(',').collect();
        cells[1] = "6";
        lines[3] = cells.join(",");
        let err = read_csv_from((lines.join("\n") + "\n").as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Row { line: 4, .. }), "{err:?}");
    }

    #[test]
    fn invalid_cell_is_rejected() {
        let text = to_string(&small()).replacen(",none,", ",maybe,", 1);
        assert!(matches!(read_csv_from(text.as_bytes()), Err(Error::Row { line: 2, .. })));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let d = small();
        let cfg = SplitConfig::default();
        let (tr, te) = split(&d, &cfg, 0).unwrap();
        assert_eq!((tr.len(), te.len()), (8, 2));
        let (tr2, te2) = split(&d, &cfg, 0).unwrap();
        assert_eq!((tr.rows, te.rows), (tr2.rows, te2.rows));
        assert!(split(&d, &cfg, 5).is_err());
        let tiny = d.select(&[0]).unwrap();
        assert!(split(&tiny, &cfg, 0).is_err());
        assert!(SplitConfig { train_fraction: 1.0, ..cfg }.validate().is_err());
    }
}
