//! JSON input and report formats, plus CSV and SVG output of sampled curves.
//!
//! Matrices are written as rows of `[re, im]` pairs. Every top-level document
//! carries a `schema_version`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::coxeter::{CoxeterMatrix, Summand};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::pencil::{MatrixTuple, PencilPoint};

pub const SCHEMA_VERSION: u32 = 1;

/// `{"n": 2, "N": 3, "matrices": [[[[re, im], ...], ...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    pub n: usize,
    #[serde(rename = "N")]
    pub size: usize,
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

pub fn matrix_to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &[Vec<[f64; 2]>], size: usize) -> Result<CMat> {
    if rows.len() != size || rows.iter().any(|r| r.len() != size) {
        return Err(Error::Parse(format!("expected a {size}x{size} matrix")));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Parse("matrix entries must be finite".into()));
    }
    Ok(CMat::from_fn(size, size, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

impl TupleJson {
    pub fn from_tuple(t: &MatrixTuple) -> Self {
        Self {
            schema_version: Some(SCHEMA_VERSION),
            n: t.n(),
            size: t.dim(),
            matrices: t.matrices().iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn to_tuple(&self) -> Result<MatrixTuple> {
        if self.matrices.len() != self.n {
            return Err(Error::Parse(format!(
                "n = {} but {} matrices given",
                self.n,
                self.matrices.len()
            )));
        }
        let mats = self
            .matrices
            .iter()
            .map(|m| rows_to_matrix(m, self.size))
            .collect::<Result<Vec<_>>>()?;
        MatrixTuple::new(mats).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn parse_tuple(text: &str) -> Result<MatrixTuple> {
    let j: TupleJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    j.to_tuple()
}

/// Planted instance `U (rho + B) U*` with random blocks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlantSpec {
    pub extra_dim: usize,
    #[serde(default = "default_block_norm")]
    pub block_norm: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_block_norm() -> f64 {
    0.4
}

/// Input of the rigidity check: a Coxeter matrix (`0` or `null` for
/// infinity), the summands of `rho`, and either an explicit tuple or a
/// planted-instance recipe.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoxeterInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    pub coxeter_matrix: Vec<Vec<Option<u32>>>,
    pub summands: Vec<Summand>,
    #[serde(default)]
    pub conjugation_seed: Option<u64>,
    #[serde(default)]
    pub tuple: Option<TupleJson>,
    #[serde(default)]
    pub planted: Option<PlantSpec>,
}

impl CoxeterInput {
    pub fn matrix(&self) -> Result<CoxeterMatrix> {
        let rows = self
            .coxeter_matrix
            .iter()
            .map(|row| row.iter().map(|e| e.filter(|&k| k != 0)).collect())
            .collect();
        CoxeterMatrix::new(rows).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn parse_coxeter_input(text: &str) -> Result<CoxeterInput> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Real `(x_1, x_2)` curve samples as CSV with a header row. An empty sample
/// set gives the header alone.
pub fn curve_csv(points: &[PencilPoint]) -> String {
    let mut s = String::from("x1_re,x1_im,x2_re,x2_im\n");
    for p in points {
        let c = p.coords();
        let _ = writeln!(s, "{:.12e},{:.12e},{:.12e},{:.12e}", c[0].re, c[0].im, c[1].re, c[1].im);
    }
    s
}

/// Scatter plot of the real parts of curve samples inside the window.
pub fn curve_svg(points: &[PencilPoint], x1: (f64, f64), x2: (f64, f64)) -> String {
    const SIZE: f64 = 400.0;
    let sx = |v: f64| (v - x1.0) / (x1.1 - x1.0) * SIZE;
    let sy = |v: f64| SIZE - (v - x2.0) / (x2.1 - x2.0) * SIZE;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n"
    );
    let _ = writeln!(s, "<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"white\" stroke=\"black\"/>");
    if x1.0 < 0.0 && x1.1 > 0.0 {
        let _ = writeln!(s, "<line x1=\"{0:.2}\" y1=\"0\" x2=\"{0:.2}\" y2=\"{SIZE}\" stroke=\"#bbb\"/>", sx(0.0));
    }
    if x2.0 < 0.0 && x2.1 > 0.0 {
        let _ = writeln!(s, "<line x1=\"0\" y1=\"{0:.2}\" x2=\"{SIZE}\" y2=\"{0:.2}\" stroke=\"#bbb\"/>", sy(0.0));
    }
    for p in points {
        let c = p.coords();
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.2\" fill=\"#1f4e96\"/>",
            sx(c[0].re),
            sy(c[1].re)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn tuple_round_trip() {
        let t = fixtures::random_pair_instance(2, 4, false);
        let text = serde_json::to_string(&TupleJson::from_tuple(&t)).unwrap();
        assert!(text.contains("\"N\":4"));
        assert_eq!(parse_tuple(&text).unwrap(), t);
    }

    #[test]
    fn malformed_tuples_are_parse_errors() {
        for bad in [
            "{",
            r#"{"n":2,"N":1,"matrices":[[[[1,0]]]]}"#,
            r#"{"n":1,"N":2,"matrices":[[[[1,0]]]]}"#,
        ] {
            assert!(matches!(parse_tuple(bad), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn coxeter_input_with_infinity() {
        let text = r#"{"coxeter_matrix":[[1,0],[0,1]],"summands":[{"type":"trivial"}]}"#;
        let inp = parse_coxeter_input(text).unwrap();
        assert_eq!(inp.matrix().unwrap().entry(0, 1), None);
        let text = r#"{"coxeter_matrix":[[1,3],[3,1]],"summands":[{"type":"dihedral","irrep":{"kind":"two_dim","angle":2.0943951023931953}}]}"#;
        assert_eq!(parse_coxeter_input(text).unwrap().summands.len(), 1);
    }

    #[test]
    fn empty_csv_is_header_only() {
        assert_eq!(curve_csv(&[]), "x1_re,x1_im,x2_re,x2_im\n");
        let svg = curve_svg(&[PencilPoint::real(&[0.5, 0.5])], (-1.0, 1.0), (-1.0, 1.0));
        assert!(svg.contains("<circle cx=\"300.00\" cy=\"100.00\""));
    }
}
