//! Solution files, LP export, score cards and the benchmark harness.

mod bench;
mod card;
mod lp;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::RiskScoreSolution;

pub use bench::{run_bench, write_bench_csv, BenchCell, BenchRow, BenchStatus, Method, SweepSpec, BENCH_COLUMNS};
pub use card::{render_card, CardRow, ScoreCard};
pub use lp::{export_lp, parse_lp, LpModel, LpRow, Sense, Sidecar, SidecarSample};

/// Writes a solution as TOML (`w0`, `alpha`, `t`, `w_le`, `w_ge`).
pub fn write_solution(s: &RiskScoreSolution, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = toml::to_string(s).map_err(|e| Error::Serialization(e.to_string()))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_solution(path: impl AsRef<Path>) -> Result<RiskScoreSolution> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let s: RiskScoreSolution = toml::from_str(&text).map_err(|e| {
        let line = e.span().map_or(0, |sp| text[..sp.start].lines().count().max(1));
        Error::parse(path.display(), line, e.message())
    })?;
    let p = s.alpha.len();
    if s.t.len() != p || s.w_le.len() != p || s.w_ge.len() != p {
        return Err(Error::parse(
            path.display(),
            0,
            "alpha, t, w_le and w_ge must have equal length",
        ));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solution_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.toml");
        let s = RiskScoreSolution {
            w0: -3,
            alpha: vec![true, false],
            t: vec![0.123_456_789_012_345_6, 0.5],
            w_le: vec![4, 0],
            w_ge: vec![-5, 0],
        };
        write_solution(&s, &path).unwrap();
        assert_eq!(read_solution(&path).unwrap(), s);
    }

    #[test]
    fn malformed_solution_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.toml");
        fs::write(
            &path,
            "w0 = 1\nalpha = [true]\nt = [0.5, 0.2]\nw_le = [1]\nw_ge = [1]\n",
        )
        .unwrap();
        assert!(matches!(read_solution(&path), Err(Error::Parse { .. })));
        fs::write(&path, "w0 = \"x\"\n").unwrap();
        assert!(matches!(read_solution(&path), Err(Error::Parse { .. })));
    }
}
