//! Problem files and tabular output.
//!
//! A problem file is a JSON object
//!
//! ```json
//! {"interval": [0, 1], "alpha": 0, "beta": 0,
//!  "pieces": [{"x0": 0, "x1": 1, "w": 1, "q": {"const": 0}}]}
//! ```
//!
//! Every number may also be written as a decimal string. Tables are given as
//! `{"table": [[x, q], ...]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coefficients::{Piece, PiecewiseCoefficient, ProblemSpec, QProfile};
use crate::error::{invalid, Result, SlError};
use crate::spectrum::EigenRecord;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Num {
    Float(f64),
    Text(String),
}

impl Num {
    fn value(&self, what: &str) -> Result<f64> {
        let v = match self {
            Num::Float(v) => *v,
            Num::Text(s) => s.trim().parse::<f64>().map_err(|_| invalid(format!("{what}: {s:?} is not a number")))?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(invalid(format!("{what} is not finite")))
        }
    }
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num::Text(num(v))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum QFile {
    Const(Num),
    Table(Vec<[Num; 2]>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PieceFile {
    x0: Num,
    x1: Num,
    w: Num,
    q: QFile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    interval: [Num; 2],
    #[serde(default = "zero")]
    alpha: Num,
    #[serde(default = "zero")]
    beta: Num,
    pieces: Vec<PieceFile>,
}

fn zero() -> Num {
    Num::Float(0.0)
}

pub fn parse_problem(text: &str) -> Result<ProblemSpec<f64>> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| invalid(format!("problem file: {e}")))?;
    let (a, b) = (file.interval[0].value("interval")?, file.interval[1].value("interval")?);
    let mut pieces = Vec::with_capacity(file.pieces.len());
    for (i, p) in file.pieces.iter().enumerate() {
        let q = match &p.q {
            QFile::Const(v) => QProfile::Const(v.value(&format!("pieces[{i}].q"))?),
            QFile::Table(rows) => QProfile::Table(
                rows.iter()
                    .map(|[x, q]| Ok((x.value(&format!("pieces[{i}].q"))?, q.value(&format!("pieces[{i}].q"))?)))
                    .collect::<Result<_>>()?,
            ),
        };
        pieces.push(Piece {
            x0: p.x0.value(&format!("pieces[{i}].x0"))?,
            x1: p.x1.value(&format!("pieces[{i}].x1"))?,
            w: p.w.value(&format!("pieces[{i}].w"))?,
            q,
        });
    }
    let coeff = PiecewiseCoefficient::new(pieces)?;
    if coeff.start() != a || coeff.end() != b {
        return Err(invalid(format!(
            "pieces cover [{}, {}] but the interval is [{a}, {b}]",
            coeff.start(),
            coeff.end()
        )));
    }
    ProblemSpec::new(file.alpha.value("alpha")?, file.beta.value("beta")?, coeff)
}

pub fn read_problem(path: &Path) -> Result<ProblemSpec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    parse_problem(&text)
}

/// Problem file text for `spec`, with numbers as round-trip decimal strings.
pub fn problem_to_json(spec: &ProblemSpec<f64>) -> String {
    let pieces = spec
        .coeff
        .pieces()
        .iter()
        .map(|p| PieceFile {
            x0: p.x0.into(),
            x1: p.x1.into(),
            w: p.w.into(),
            q: match &p.q {
                QProfile::Const(v) => QFile::Const((*v).into()),
                QProfile::Table(nodes) => QFile::Table(nodes.iter().map(|&(x, q)| [x.into(), q.into()]).collect()),
            },
        })
        .collect();
    let file = ProblemFile {
        interval: [spec.a.into(), spec.b.into()],
        alpha: spec.alpha.into(),
        beta: spec.beta.into(),
        pieces,
    };
    serde_json::to_string_pretty(&file).expect("problem files always serialize")
}

#[derive(Serialize)]
struct RecordRow {
    re: f64,
    im: f64,
    zeros: Option<usize>,
    weighted_norm: Option<f64>,
    residual: f64,
}

#[derive(Serialize)]
struct DriftRow {
    re: f64,
    im: f64,
    zeros: Option<usize>,
    weighted_norm: Option<f64>,
    residual: f64,
    drift: Option<f64>,
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| SlError::NumericalFailure(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> SlError {
    SlError::NumericalFailure(format!("csv: {e}"))
}

/// One row per record: `re, im, zeros, weighted_norm, residual`.
pub fn records_csv(records: &[EigenRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(RecordRow {
            re: r.re,
            im: r.im,
            zeros: r.zeros_in_ab,
            weighted_norm: r.weighted_norm,
            residual: r.residual,
        })
        .map_err(csv_err)?;
    }
    if records.is_empty() {
        w.write_record(["re", "im", "zeros", "weighted_norm", "residual"]).map_err(csv_err)?;
    }
    finish(w)
}

/// As [`records_csv`] with a trailing `drift` column; empty where undefined.
pub fn records_with_drift_csv(records: &[EigenRecord], drift: &[Option<f64>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (r, d) in records.iter().zip(drift) {
        w.serialize(DriftRow {
            re: r.re,
            im: r.im,
            zeros: r.zeros_in_ab,
            weighted_norm: r.weighted_norm,
            residual: r.residual,
            drift: *d,
        })
        .map_err(csv_err)?;
    }
    if records.is_empty() {
        w.write_record(["re", "im", "zeros", "weighted_norm", "residual", "drift"]).map_err(csv_err)?;
    }
    finish(w)
}

/// Shortest decimal that parses back to `x`.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite floats serialize")
    } else {
        x.to_string()
    }
}

/// Header row followed by `rows`, each already formatted.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{build_canonical, CanonicalProblem};

    #[test]
    fn numbers_and_strings() {
        let spec = parse_problem(
            r#"{"interval": ["-1", 1], "pieces": [
                {"x0": -1, "x1": "0", "w": -1, "q": {"const": "10"}},
                {"x0": 0, "x1": 1, "w": "1", "q": {"table": [[0, 10], ["1", 10.0]]}}]}"#,
        )
        .unwrap();
        assert_eq!((spec.a, spec.b, spec.alpha), (-1.0, 1.0, 0.0));
        assert_eq!(spec.coeff.pieces().len(), 2);
        assert_eq!(spec.coeff.pieces()[1].q.at(0.5), 10.0);
    }

    #[test]
    fn round_trip() {
        let spec = build_canonical(&CanonicalProblem::OneTurningPoint { q0: -0.1f64 }).unwrap();
        let back = parse_problem(&problem_to_json(&spec)).unwrap();
        assert_eq!(back, spec);
        let table = ProblemSpec::dirichlet(
            PiecewiseCoefficient::new(vec![Piece {
                x0: 0.0,
                x1: 1.0,
                w: 1.0 / 3.0,
                q: QProfile::Table(vec![(0.0, 0.1), (0.7, -2.0 / 7.0), (1.0, 1e-300)]),
            }])
            .unwrap(),
        )
        .unwrap();
        assert_eq!(parse_problem(&problem_to_json(&table)).unwrap(), table);
    }

    #[test]
    fn rejects_bad_files() {
        for bad in [
            r#"{"interval": [0, 1], "pieces": []}"#,
            r#"{"interval": [0, 2], "pieces": [{"x0": 0, "x1": 1, "w": 1, "q": {"const": 0}}]}"#,
            r#"{"interval": [0, 1], "pieces": [{"x0": 0, "x1": 1, "w": "one", "q": {"const": 0}}]}"#,
            r#"{"interval": [0, 1], "pieces": [{"x0": 0, "x1": 1, "w": 0, "q": {"const": 0}}]}"#,
            r#"{"interval": [0, 1], "beta": 4, "pieces": [{"x0": 0, "x1": 1, "w": 1, "q": {"const": 0}}]}"#,
            r#"{"interval": [0, 1], "pieces": [{"x0": 0, "x1": 1, "w": 1, "q": {"linear": 0}}]}"#,
            "not json",
        ] {
            assert!(matches!(parse_problem(bad), Err(SlError::InvalidInput(_))), "{bad}");
        }
    }

    #[test]
    fn csv_round_trips_floats() {
        let rec = EigenRecord { re: 0.1 + 0.2, im: 0.0, zeros_in_ab: Some(3), weighted_norm: None, residual: 1e-300 };
        let text = records_csv(&[rec]).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("re,im,zeros,weighted_norm,residual"));
        let fields: Vec<_> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields[0].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(fields[2], "3");
        assert_eq!(fields[3], "");
        assert_eq!(fields[4].parse::<f64>().unwrap(), 1e-300);
        assert_eq!(num(3.8981718325193755e-17), "3.8981718325193755e-17");
        assert_eq!(num(-2.0), "-2.0");
        assert_eq!(records_csv(&[]).unwrap(), "re,im,zeros,weighted_norm,residual\n");
    }
}
