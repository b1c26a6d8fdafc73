//! Seeded synthetic instances and dataset files.
//!
//! Instances are drawn with ChaCha8 (`rand_chacha` 0.3, `rand` 0.8 uniform
//! sampling) seeded by `seed_from_u64`. Draw order: `w0`, `w≤_1..p`,
//! `w≥_1..p`, `t_1..p`, then the feature matrix row by row. Features and
//! thresholds are uniform on `[0, 1)`, integer coefficients uniform on
//! `{-5..5}`, and a sample is labeled +1 iff its reference score is `≥ 0`
//! (probability exactly one half counts as positive).
//!
//! Dataset files are comma-separated with a header row. The column named
//! `y` holds labels (`1` → +1, `0` or `-1` → −1); every other column is a
//! feature. Optional leading lines `#lo,...` and `#hi,...` carry the feature
//! bounds; without them the bounds are the column minimum and maximum.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, RiskScoreSolution};

pub const RNG_NAME: &str = "ChaCha8 (rand_chacha 0.3)";
const COEF_RANGE: i64 = 5;

#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub dataset: Dataset,
    /// The generating model (every feature selected).
    pub reference: RiskScoreSolution,
    pub reference_objective: f64,
    /// `None` when every label came out the same.
    pub reference_auc: Option<f64>,
    pub seed: u64,
}

pub fn generate(n: usize, p: usize, seed: u64) -> Result<GeneratedInstance> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidHyperparams(format!(
            "generator needs N ≥ 1 and p ≥ 1 (got N={n}, p={p})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w0 = rng.gen_range(-COEF_RANGE..=COEF_RANGE);
    let w_le: Vec<i64> = (0..p).map(|_| rng.gen_range(-COEF_RANGE..=COEF_RANGE)).collect();
    let w_ge: Vec<i64> = (0..p).map(|_| rng.gen_range(-COEF_RANGE..=COEF_RANGE)).collect();
    let t: Vec<f64> = (0..p).map(|_| rng.gen::<f64>()).collect();
    let reference = RiskScoreSolution {
        w0,
        alpha: vec![true; p],
        t,
        w_le,
        w_ge,
    };
    let features: Vec<f64> = (0..n * p).map(|_| rng.gen::<f64>()).collect();
    let labels = features
        .chunks(p)
        .map(|x| if reference.score(x) >= 0 { 1 } else { -1 })
        .collect();
    let names = (1..=p).map(|j| format!("x{j}")).collect();
    let dataset = Dataset::from_parts(n, p, features, labels, names, vec![0.0; p], vec![1.0; p])?;
    Ok(GeneratedInstance {
        reference_objective: reference.objective(&dataset),
        reference_auc: reference.auc(&dataset).ok(),
        dataset,
        reference,
        seed,
    })
}

fn parse_bounds(path: &Path, line: usize, text: &str, p: usize) -> Result<Vec<f64>> {
    let vals: Vec<&str> = text.split(',').map(str::trim).collect();
    if vals.len() != p {
        return Err(Error::parse(
            path.display(),
            line,
            format!("expected {p} bounds, found {}", vals.len()),
        ));
    }
    vals.iter()
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| Error::parse(path.display(), line, format!("non-numeric bound `{v}`")))
        })
        .collect()
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::parse(path.display(), 1, e.to_string()))?
        .clone();
    let Some(label_col) = header.iter().position(|h| h == "y") else {
        return Err(Error::parse(path.display(), 1, "missing label column `y`"));
    };
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != label_col)
        .map(|(_, h)| h.to_string())
        .collect();
    let p = names.len();

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |pos| pos.line() as usize);
            Error::parse(path.display(), line, e.to_string())
        })?;
        let line = record.position().map_or(0, |pos| pos.line() as usize);
        if record.len() != header.len() {
            return Err(Error::parse(
                path.display(),
                line,
                format!("expected {} cells, found {}", header.len(), record.len()),
            ));
        }
        let mut row = Vec::with_capacity(p);
        for (c, cell) in record.iter().enumerate() {
            if c == label_col {
                labels.push(match cell {
                    "1" | "+1" | "1.0" => 1,
                    "0" | "-1" | "0.0" | "-1.0" => -1,
                    _ => {
                        return Err(Error::parse(
                            path.display(),
                            line,
                            format!("label `{cell}` is not 0/1/±1"),
                        ))
                    }
                });
            } else {
                let v = cell
                    .parse::<f64>()
                    .map_err(|_| Error::parse(path.display(), line, format!("non-numeric cell `{cell}`")))?;
                row.push(v);
            }
        }
        rows.push(row);
    }

    let (mut lo, mut hi) = (None, None);
    for (idx, l) in text.lines().enumerate() {
        if let Some(rest) = l.strip_prefix("#lo,") {
            lo = Some(parse_bounds(path, idx + 1, rest, p)?);
        } else if let Some(rest) = l.strip_prefix("#hi,") {
            hi = Some(parse_bounds(path, idx + 1, rest, p)?);
        }
    }
    match (lo, hi) {
        (Some(lo), Some(hi)) => Dataset::new(rows, labels, names, lo, hi),
        (None, None) => Dataset::with_data_bounds(rows, labels, names),
        _ => Err(Error::parse(path.display(), 1, "`#lo` and `#hi` must appear together")),
    }
}

pub fn write_dataset(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
    out.push_str(&format!("#lo,{}\n#hi,{}\n", join(d.lo()), join(d.hi())));
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = d.names().iter().map(String::as_str).collect();
    header.push("y");
    w.write_record(&header)
        .map_err(|e| Error::Serialization(e.to_string()))?;
    for (row, &y) in d.rows().zip(d.labels()) {
        let mut rec: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
        rec.push(if y == 1 { "1".into() } else { "0".into() });
        w.write_record(&rec).map_err(|e| Error::Serialization(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| Error::Serialization(e.to_string()))?;
    out.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleMeta {
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    pub rng: String,
    pub reference_objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_auc: Option<f64>,
}

pub const DATA_FILE: &str = "data.csv";
pub const REFERENCE_FILE: &str = "reference.toml";
pub const META_FILE: &str = "meta.toml";

/// Writes `data.csv`, `reference.toml` and `meta.toml` into `dir`.
pub fn write_bundle(inst: &GeneratedInstance, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_dataset(&inst.dataset, dir.join(DATA_FILE))?;
    crate::report::write_solution(&inst.reference, dir.join(REFERENCE_FILE))?;
    let meta = BundleMeta {
        n: inst.dataset.n(),
        p: inst.dataset.p(),
        seed: inst.seed,
        rng: RNG_NAME.into(),
        reference_objective: inst.reference_objective,
        reference_auc: inst.reference_auc,
    };
    let text = toml::to_string(&meta).map_err(|e| Error::Serialization(e.to_string()))?;
    let path = dir.join(META_FILE);
    fs::write(&path, text).map_err(|e| Error::io(path, e))
}

/// Accepts either a dataset file or a bundle directory.
pub fn dataset_path(path: impl AsRef<Path>) -> PathBuf {
    let path = path.as_ref();
    if path.is_dir() {
        path.join(DATA_FILE)
    } else {
        path.to_path_buf()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{logistic_loss, MarginVector};

    #[test]
    fn deterministic_and_separable() {
        let a = generate(200, 2, 7).unwrap();
        let b = generate(200, 2, 7).unwrap();
        assert_eq!(a.dataset, b.dataset);
        assert_eq!(a.reference, b.reference);
        for (x, &y) in a.dataset.rows().zip(a.dataset.labels()) {
            assert!(f64::from(y) * a.reference.score(x) as f64 >= 0.0);
        }
        assert_ne!(generate(200, 2, 8).unwrap().dataset, a.dataset);
    }

    #[test]
    fn reference_objective_recomputed_from_margins() {
        let g = generate(200, 1, 3).unwrap();
        let margins: Vec<f64> = g.dataset.rows().map(|x| g.reference.score(x) as f64).collect();
        let direct = logistic_loss(MarginVector::new(&margins, g.dataset.labels()).unwrap());
        assert!((direct - g.reference_objective).abs() <= 1e-10);
    }

    #[test]
    fn reference_auc_is_one() {
        for seed in 0..20 {
            let g = generate(200, 3, seed).unwrap();
            if let Some(auc) = g.reference_auc {
                assert_eq!(auc, 1.0, "seed {seed}");
            } else {
                assert!(!g.dataset.has_both_classes());
            }
        }
    }

    #[test]
    fn feature_means_are_central() {
        let g = generate(2000, 3, 11).unwrap();
        for j in 0..3 {
            let mean = g.dataset.column(j).iter().sum::<f64>() / 2000.0;
            assert!((0.4..=0.6).contains(&mean), "mean {mean}");
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let g = generate(50, 3, 1).unwrap();
        let path = dir.path().join("d.csv");
        write_dataset(&g.dataset, &path).unwrap();
        assert_eq!(read_dataset(&path).unwrap(), g.dataset);
    }

    #[test]
    fn zero_one_labels_and_data_bounds() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, "a,y,b\n0.5,1,2\n0.25,0,3\n").unwrap();
        let d = read_dataset(&path).unwrap();
        assert_eq!(d.labels(), &[1, -1]);
        assert_eq!(d.names(), &["a".to_string(), "b".to_string()]);
        assert_eq!((d.lo(), d.hi()), (&[0.25, 2.0][..], &[0.5, 3.0][..]));
    }

    #[test]
    fn header_only_is_an_empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, "x1,y\n").unwrap();
        let d = read_dataset(&path).unwrap();
        assert_eq!(d.n(), 0);
        assert!(!d.has_both_classes());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        for (text, line) in [
            ("x1,x2\n0.1,0.2\n", 1),
            ("x1,y\n0.1,1\nabc,0\n", 3),
            ("x1,y\n0.1,1\n0.2\n", 3),
            ("x1,y\n0.1,7\n", 2),
        ] {
            fs::write(&path, text).unwrap();
            match read_dataset(&path) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
