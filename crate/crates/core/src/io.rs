//! JSON file formats and serde helpers.
//!
//! * Seed: `{"n": N, "b": [[..], ..], "convention": "paper" | "fz"}`
//! * Loop: `{"path": [k0, ..], "perm": [σ(1), ..]}` with 1-based labels
//! * Triangulation: `{"genus": g, "punctures": h, "triangles": [[e1, e2, e3], ..]}`
//! * Tropical point: JSON array of integers or `"p/q"` strings
//!
//! Cone systems are emitted as rows of rational strings and polynomials as
//! coefficient arrays with the constant term last.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{IntMatrix, Rational};
use crate::seed::{ExchangeMatrix, MutationLoop, MutationPath, Permutation};
use crate::tropical::TropicalPoint;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Paper,
    Fz,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedFile {
    pub n: usize,
    pub b: Vec<Vec<i64>>,
    #[serde(default)]
    pub convention: Convention,
}

impl SeedFile {
    pub fn from_matrix(b: &ExchangeMatrix) -> Result<Self> {
        let rows = b
            .matrix()
            .to_rows()
            .into_iter()
            .map(|r| {
                r.iter()
                    .map(|v| {
                        v.to_i64()
                            .ok_or_else(|| Error::Parse(format!("entry {v} does not fit in i64")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SeedFile {
            n: b.rank(),
            b: rows,
            convention: Convention::Paper,
        })
    }

    /// Parses and validates, transposing FZ-convention input.
    pub fn to_matrix(&self) -> Result<ExchangeMatrix> {
        if self.b.len() != self.n || self.b.iter().any(|r| r.len() != self.n) {
            return Err(Error::Shape(format!(
                "seed declares n = {} but b is not {}x{}",
                self.n, self.n, self.n
            )));
        }
        let m = IntMatrix::from_i64_rows(&self.b)?;
        match self.convention {
            Convention::Paper => ExchangeMatrix::new(m),
            Convention::Fz => ExchangeMatrix::from_fz(m),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoopFile {
    pub path: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perm: Option<Vec<usize>>,
}

impl LoopFile {
    pub fn from_loop(lp: &MutationLoop) -> Self {
        LoopFile {
            path: lp.path().steps().iter().map(|k| k + 1).collect(),
            perm: Some(lp.perm().images().iter().map(|k| k + 1).collect()),
        }
    }

    pub fn path(&self, rank: usize) -> Result<MutationPath> {
        parse_one_based(&self.path, rank).map(MutationPath::new)
    }

    /// Builds the loop on `base`. Without an explicit `perm` the
    /// lexicographically smallest closing permutation is used.
    pub fn to_loop(&self, base: &ExchangeMatrix) -> Result<MutationLoop> {
        let path = self.path(base.rank())?;
        match &self.perm {
            Some(p) => {
                if p.len() != base.rank() {
                    return Err(Error::InvalidPermutation(format!(
                        "perm has {} entries for rank {}",
                        p.len(),
                        base.rank()
                    )));
                }
                let bad = || Error::InvalidPermutation(format!("{p:?} is not a permutation of 1..={}", base.rank()));
                let images = parse_one_based(p, base.rank()).map_err(|_| bad())?;
                let perm = Permutation::new(images).map_err(|_| bad())?;
                MutationLoop::new(base.clone(), path, perm)
            }
            None => MutationLoop::detect(base.clone(), path),
        }
    }
}

/// Converts 1-based labels to 0-based indices.
pub fn parse_one_based(labels: &[usize], rank: usize) -> Result<Vec<usize>> {
    labels
        .iter()
        .map(|&k| {
            if k == 0 || k > rank {
                Err(Error::IndexOutOfRange {
                    index: k.wrapping_sub(1),
                    rank,
                })
            } else {
                Ok(k - 1)
            }
        })
        .collect()
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => BigInt::from_str(s).map(Rational::from_integer).map_err(|_| bad()),
    }
}

pub fn format_rational(v: &Rational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn parse_point(v: &Value) -> Result<TropicalPoint> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Parse("tropical point must be a JSON array".into()))?;
    arr.iter()
        .map(|x| match x {
            Value::Number(n) => n
                .as_i64()
                .map(|i| Rational::from_integer(BigInt::from(i)))
                .ok_or_else(|| Error::Parse(format!("non-integer number {n}; use \"p/q\""))),
            Value::String(s) => parse_rational(s),
            other => Err(Error::Parse(format!("bad coordinate {other}"))),
        })
        .collect::<Result<Vec<_>>>()
        .map(TropicalPoint::new)
}

pub fn point_to_json(w: &TropicalPoint) -> Value {
    Value::Array(w.coords().iter().map(|c| Value::String(format_rational(c))).collect())
}

/// Triangulation file; edge labels are 1-based.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TriangulationFile {
    pub genus: usize,
    pub punctures: usize,
    pub triangles: Vec<[usize; 3]>,
}

// --- serde helpers --------------------------------------------------------

fn big_to_value(v: &BigInt) -> Value {
    match v.to_i64() {
        Some(i) => Value::from(i),
        None => Value::String(v.to_string()),
    }
}

pub fn matrix_to_json(m: &IntMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(big_to_value).collect()))
            .collect(),
    )
}

pub fn ser_matrix<S: Serializer>(m: &IntMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    matrix_to_json(m).serialize(s)
}

pub fn ser_opt_matrix<S: Serializer>(m: &Option<IntMatrix>, s: S) -> std::result::Result<S::Ok, S::Error> {
    m.as_ref().map(matrix_to_json).serialize(s)
}

pub fn rational_rows_to_json(rows: &[Vec<Rational>]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| Value::Array(r.iter().map(|v| Value::String(format_rational(v))).collect()))
            .collect(),
    )
}

pub fn ser_point<S: Serializer>(w: &TropicalPoint, s: S) -> std::result::Result<S::Ok, S::Error> {
    point_to_json(w).serialize(s)
}

pub fn ser_path<S: Serializer>(p: &MutationPath, s: S) -> std::result::Result<S::Ok, S::Error> {
    p.steps().iter().map(|k| k + 1).collect::<Vec<_>>().serialize(s)
}

pub fn ser_perm<S: Serializer>(p: &Permutation, s: S) -> std::result::Result<S::Ok, S::Error> {
    p.images().iter().map(|k| k + 1).collect::<Vec<_>>().serialize(s)
}

/// Renders traces sharing the same `n` column as tab-separated lines under
/// the header `n<TAB>name…`.
pub fn traces_to_tsv(columns: &[(&str, &[(usize, f64)])]) -> String {
    let mut out = String::from("n");
    for (name, _) in columns {
        out.push('\t');
        out.push_str(name);
    }
    out.push('\n');
    let rows = columns.iter().map(|c| c.1.len()).max().unwrap_or(0);
    for r in 0..rows {
        let n = columns.iter().find_map(|c| c.1.get(r).map(|p| p.0)).unwrap_or(r + 1);
        out.push_str(&n.to_string());
        for (_, trace) in columns {
            out.push('\t');
            if let Some((_, v)) = trace.get(r) {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    out
}
