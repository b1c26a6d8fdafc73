//! LP-format export (CPLEX dialect) plus a JSON sidecar for the nonlinear
//! objective.
//!
//! Every row is written one-sided. A constraint whose two sides have
//! different left-hand sides, or a ranged row, becomes two rows named
//! `<name>.lo` (`>=`) and `<name>.up` (`<=`); readers recover the constraint
//! count by grouping on the part before the suffix.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MinloModel, VarKind};

const OBJECTIVE_VAR: &str = "loss";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(String, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LpRow {
    /// Constraint name without the `.lo` / `.up` suffix.
    pub fn base_name(&self) -> &str {
        self.name
            .strip_suffix(".lo")
            .or_else(|| self.name.strip_suffix(".up"))
            .unwrap_or(&self.name)
    }
}

/// Text-level model: what an LP file says, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub comments: Vec<String>,
    pub objective_var: String,
    pub rows: Vec<LpRow>,
    /// `(name, lower, upper)`, infinite sides allowed.
    pub bounds: Vec<(String, f64, f64)>,
    pub generals: Vec<String>,
    pub binaries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarSample {
    pub label: i8,
    pub constant: f64,
    pub terms: Vec<(String, f64)>,
}

/// Structured objective: `Σ_i log(1 + exp(-label_i · (constant_i + Σ coef·var)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub objective: String,
    pub samples: Vec<SidecarSample>,
}

impl LpModel {
    pub fn from_model(m: &MinloModel) -> Self {
        let name = |v: usize| m.variables[v].name.clone();
        let mut rows = Vec::new();
        let mut by_group: Vec<Vec<usize>> = vec![Vec::new(); m.groups.len()];
        for (r, row) in m.rows.iter().enumerate() {
            by_group[row.group].push(r);
        }
        for (g, members) in by_group.iter().enumerate() {
            let mut sides = Vec::new();
            for &r in members {
                let row = &m.rows[r];
                let terms: Vec<(String, f64)> = row.terms.iter().map(|&(v, c)| (name(v.0), c)).collect();
                if row.lower == row.upper {
                    sides.push((terms, Sense::Eq, row.lower));
                    continue;
                }
                if row.lower.is_finite() {
                    sides.push((terms.clone(), Sense::Ge, row.lower));
                }
                if row.upper.is_finite() {
                    sides.push((terms, Sense::Le, row.upper));
                }
            }
            let base = &m.groups[g].name;
            let single = sides.len() == 1;
            for (terms, sense, rhs) in sides {
                let name = match (single, sense) {
                    (true, _) => base.clone(),
                    (false, Sense::Le) => format!("{base}.up"),
                    (false, _) => format!("{base}.lo"),
                };
                rows.push(LpRow {
                    name,
                    terms,
                    sense,
                    rhs,
                });
            }
        }
        let mut bounds: Vec<(String, f64, f64)> =
            m.variables.iter().map(|v| (v.name.clone(), v.lower, v.upper)).collect();
        bounds.push((OBJECTIVE_VAR.into(), f64::NEG_INFINITY, f64::INFINITY));
        let of_kind = |k: VarKind| {
            m.variables
                .iter()
                .filter(|v| v.kind == k)
                .map(|v| v.name.clone())
                .collect()
        };
        let layout = m.layout;
        Self {
            comments: vec![
                format!("risk-score model: N = {}, p = {}", layout.n(), layout.p()),
                "objective: minimize sum_i log(1 + exp(-y_i * m_i))".into(),
                "  with margins m_i listed per sample in the JSON sidecar.".into(),
                format!("LP format cannot state it; `{OBJECTIVE_VAR}` is a free placeholder variable."),
                format!(
                    "{} linear constraints ({} rows), {} binary, {} integer, {} continuous variables",
                    m.n_linear_constraints(),
                    m.rows.len(),
                    m.n_binary(),
                    m.n_integer(),
                    m.n_continuous()
                ),
            ],
            objective_var: OBJECTIVE_VAR.into(),
            rows,
            bounds,
            generals: of_kind(VarKind::Integer),
            binaries: of_kind(VarKind::Binary),
        }
    }

    /// Distinct constraint names after removing `.lo` / `.up`.
    pub fn n_constraints(&self) -> usize {
        let mut n = 0;
        let mut prev: Option<&str> = None;
        for r in &self.rows {
            let b = r.base_name();
            if prev != Some(b) {
                n += 1;
            }
            prev = Some(b);
        }
        n
    }

    /// Variables that are neither general integers, binaries nor the objective placeholder.
    pub fn n_continuous(&self) -> usize {
        self.bounds
            .iter()
            .filter(|(n, _, _)| *n != self.objective_var && !self.generals.contains(n) && !self.binaries.contains(n))
            .count()
    }

    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "\\ {c}");
        }
        let _ = writeln!(out, "Minimize\n obj: {}\nSubject To", self.objective_var);
        for r in &self.rows {
            let _ = writeln!(
                out,
                " {}: {} {} {}",
                r.name,
                fmt_terms(&r.terms),
                r.sense.symbol(),
                fmt_num(r.rhs)
            );
        }
        let _ = writeln!(out, "Bounds");
        for (name, lo, up) in &self.bounds {
            if lo.is_infinite() && up.is_infinite() {
                let _ = writeln!(out, " {name} free");
            } else {
                let _ = writeln!(out, " {} <= {name} <= {}", fmt_num(*lo), fmt_num(*up));
            }
        }
        for (title, list) in [("Generals", &self.generals), ("Binaries", &self.binaries)] {
            let _ = writeln!(out, "{title}");
            for chunk in list.chunks(10) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
        out.push_str("End\n");
        out
    }
}

fn fmt_num(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn fmt_terms(terms: &[(String, f64)]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (name, c)) in terms.iter().enumerate() {
        let sign = if *c < 0.0 { "-" } else { "+" };
        let mag = c.abs();
        match (i, sign) {
            (0, "+") => {}
            (0, _) => s.push_str("- "),
            _ => {
                s.push(' ');
                s.push_str(sign);
                s.push(' ');
            }
        }
        if mag != 1.0 {
            let _ = write!(s, "{} ", fmt_num(mag));
        }
        s.push_str(name);
    }
    s
}

fn parse_num(tok: &str, line: usize) -> Result<f64> {
    match tok {
        "+inf" | "inf" | "+infinity" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse()
            .map_err(|_| Error::parse("<lp>", line, format!("expected a number, found `{tok}`"))),
    }
}

fn parse_terms(toks: &[&str], line: usize) -> Result<Vec<(String, f64)>> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for &t in toks {
        match t {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            "0" if toks.len() == 1 => {}
            _ => {
                if let Ok(c) = t.parse::<f64>() {
                    coef = Some(c);
                } else {
                    terms.push((t.to_string(), sign * coef.take().unwrap_or(1.0)));
                    sign = 1.0;
                }
            }
        }
    }
    if coef.is_some() {
        return Err(Error::parse("<lp>", line, "dangling coefficient"));
    }
    Ok(terms)
}

/// Parses the dialect written by [`LpModel::to_lp_string`].
pub fn parse_lp(text: &str) -> Result<LpModel> {
    #[derive(PartialEq)]
    enum Section {
        Head,
        Objective,
        Rows,
        Bounds,
        Generals,
        Binaries,
        End,
    }
    let mut section = Section::Head;
    let mut model = LpModel {
        comments: Vec::new(),
        objective_var: String::new(),
        rows: Vec::new(),
        bounds: Vec::new(),
        generals: Vec::new(),
        binaries: Vec::new(),
    };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if let Some(c) = raw.strip_prefix("\\ ") {
            model.comments.push(c.to_string());
            continue;
        }
        let l = raw.trim();
        if l.is_empty() || l.starts_with('\\') {
            continue;
        }
        match l.to_ascii_lowercase().as_str() {
            "minimize" => {
                section = Section::Objective;
                continue;
            }
            "subject to" => {
                section = Section::Rows;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "generals" => {
                section = Section::Generals;
                continue;
            }
            "binaries" => {
                section = Section::Binaries;
                continue;
            }
            "end" => {
                section = Section::End;
                continue;
            }
            _ => {}
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        match section {
            Section::Objective => {
                let rest = l.split_once(':').map_or(l, |(_, r)| r).trim();
                model.objective_var = rest.to_string();
            }
            Section::Rows => {
                let (name, rest) = l
                    .split_once(':')
                    .ok_or_else(|| Error::parse("<lp>", line, "row without a name"))?;
                let toks: Vec<&str> = rest.split_whitespace().collect();
                let pos = toks
                    .iter()
                    .position(|t| matches!(*t, "<=" | ">=" | "="))
                    .ok_or_else(|| Error::parse("<lp>", line, "row without a sense"))?;
                let sense = match toks[pos] {
                    "<=" => Sense::Le,
                    ">=" => Sense::Ge,
                    _ => Sense::Eq,
                };
                if pos + 2 != toks.len() {
                    return Err(Error::parse("<lp>", line, "expected a single right-hand side"));
                }
                model.rows.push(LpRow {
                    name: name.trim().to_string(),
                    terms: parse_terms(&toks[..pos], line)?,
                    sense,
                    rhs: parse_num(toks[pos + 1], line)?,
                });
            }
            Section::Bounds => match toks.as_slice() {
                [name, "free"] => model.bounds.push((name.to_string(), f64::NEG_INFINITY, f64::INFINITY)),
                [lo, "<=", name, "<=", up] => {
                    model
                        .bounds
                        .push((name.to_string(), parse_num(lo, line)?, parse_num(up, line)?))
                }
                _ => return Err(Error::parse("<lp>", line, format!("unsupported bound `{l}`"))),
            },
            Section::Generals => model.generals.extend(toks.iter().map(|s| s.to_string())),
            Section::Binaries => model.binaries.extend(toks.iter().map(|s| s.to_string())),
            Section::Head | Section::End => {
                return Err(Error::parse(
                    "<lp>",
                    line,
                    format!("unexpected `{l}` outside a section"),
                ));
            }
        }
    }
    if section != Section::End {
        return Err(Error::parse("<lp>", text.lines().count(), "missing `End`"));
    }
    Ok(model)
}

pub fn sidecar(m: &MinloModel) -> Sidecar {
    Sidecar {
        objective: "sum_i log(1 + exp(-label_i * (constant_i + sum_terms coef * var)))".into(),
        samples: m
            .margins
            .iter()
            .zip(&m.labels)
            .map(|(e, &y)| SidecarSample {
                label: y,
                constant: e.constant,
                terms: e
                    .terms
                    .iter()
                    .map(|&(v, c)| (m.variables[v.0].name.clone(), c))
                    .collect(),
            })
            .collect(),
    }
}

/// Writes `path` (LP) and `path` with extension `json` (objective sidecar);
/// returns the sidecar path.
pub fn export_lp(m: &MinloModel, path: impl AsRef<Path>) -> Result<PathBuf> {
    let path = path.as_ref();
    fs::write(path, LpModel::from_model(m).to_lp_string()).map_err(|e| Error::io(path, e))?;
    let side = path.with_extension("json");
    let json = serde_json::to_string_pretty(&sidecar(m)).map_err(|e| Error::Serialization(e.to_string()))?;
    fs::write(&side, json + "\n").map_err(|e| Error::io(&side, e))?;
    Ok(side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::generate;
    use crate::model::{build_binary_model, build_final_model, Dataset, Hyperparams};

    #[test]
    fn round_trip_and_counts() {
        for (n, p) in [(1, 1), (3, 2), (5, 3)] {
            let g = generate(n, p, 1).unwrap();
            let m = build_final_model(&g.dataset, &Hyperparams::new(1)).unwrap();
            let lp = LpModel::from_model(&m);
            let text = lp.to_lp_string();
            let parsed = parse_lp(&text).unwrap();
            assert_eq!(parsed, lp);
            assert_eq!(parsed.to_lp_string(), text);
            assert_eq!(parsed.n_constraints(), 1 + (2 + 9 * n) * p);
            assert_eq!(parsed.binaries.len(), p * (1 + n));
            assert_eq!(parsed.generals.len(), 1 + 2 * p * (1 + n));
            assert_eq!(parsed.n_continuous(), p);
        }
    }

    #[test]
    fn layout_of_small_model() {
        let d = Dataset::new(vec![vec![0.25]], vec![1], vec!["x".into()], vec![0.0], vec![1.0]).unwrap();
        let m = build_final_model(&d, &Hyperparams::new(1)).unwrap();
        let text = LpModel::from_model(&m).to_lp_string();
        assert!(text.contains(" budget: alpha_1 <= 1\n"));
        assert!(text.contains(" link_le_1.up: wle_1 - 5 alpha_1 <= 0\n"));
        assert!(text.contains(" thr_1_1.lo: t_1 - b_1_1 >= -0.75\n"));
        assert!(text.contains(" w0 free\n"));
        assert!(text.contains(" -5 <= ble_1_1 <= 5\n"));
        let side = sidecar(&m);
        assert_eq!(side.samples[0].terms.len(), 3);
    }

    #[test]
    fn binary_model_exports() {
        let d = Dataset::new(
            vec![vec![1.0, 0.0]],
            vec![-1],
            vec!["a".into(), "b".into()],
            vec![0.0; 2],
            vec![1.0; 2],
        )
        .unwrap();
        let m = build_binary_model(&d, &Hyperparams::new(1)).unwrap();
        let lp = LpModel::from_model(&m);
        assert_eq!(lp.n_constraints(), 5);
        assert_eq!(parse_lp(&lp.to_lp_string()).unwrap(), lp);
    }

    #[test]
    fn export_writes_both_files_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let g = generate(4, 2, 3).unwrap();
        let m = build_final_model(&g.dataset, &Hyperparams::new(2)).unwrap();
        let a = dir.path().join("a.lp");
        let b = dir.path().join("b.lp");
        let side = export_lp(&m, &a).unwrap();
        export_lp(&m, &b).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        let s: Sidecar = serde_json::from_str(&fs::read_to_string(side).unwrap()).unwrap();
        assert_eq!(s.samples.len(), 4);
    }

    #[test]
    fn malformed_lp_is_rejected() {
        assert!(parse_lp("Minimize\n obj: loss\nSubject To\n r: x <=\nEnd\n").is_err());
        assert!(parse_lp("Minimize\n obj: loss\n").is_err());
    }
}
