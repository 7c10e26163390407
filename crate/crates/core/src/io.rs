//! JSON input schema for algebras, representations and named ideals.
//!
//! Scalars are an integer, `[num, den]`, or `[re_num, re_den, im_num,
//! im_den]`; integers that do not fit in 64 bits are written as strings.
//! Bracket keys `"i,j"` and component keys `"k"` accept indices or basis names.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::fixtures::Fixture;
use crate::group::{CMat, Rep};
use crate::linalg::{QMatrix, Subspace};
use crate::scalar::{vec_neg, zero_vec, Gq, QVec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumJson {
    Int(i64),
    Str(String),
    Float(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarJson {
    Num(NumJson),
    List(Vec<NumJson>),
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn num_to_rat(n: &NumJson) -> Result<BigRational> {
    match n {
        NumJson::Int(i) => Ok(BigRational::from_integer(BigInt::from(*i))),
        NumJson::Float(x) => BigRational::from_float(*x).ok_or_else(|| parse_err(format!("non-finite number {x}"))),
        NumJson::Str(s) => {
            let s = s.trim();
            let (a, b) = s.split_once('/').unwrap_or((s, "1"));
            let a: BigInt = a.trim().parse().map_err(|_| parse_err(format!("bad integer {s:?}")))?;
            let b: BigInt = b.trim().parse().map_err(|_| parse_err(format!("bad integer {s:?}")))?;
            if b.is_zero() {
                return Err(parse_err(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(a, b))
        }
    }
}

fn ratio(n: &NumJson, d: &NumJson) -> Result<BigRational> {
    let d = num_to_rat(d)?;
    if d.is_zero() {
        return Err(parse_err("zero denominator"));
    }
    Ok(num_to_rat(n)? / d)
}

impl ScalarJson {
    pub fn to_gq(&self) -> Result<Gq> {
        match self {
            ScalarJson::Num(n) => Ok(Gq::real(num_to_rat(n)?)),
            ScalarJson::List(v) => match v.as_slice() {
                [n] => Ok(Gq::real(num_to_rat(n)?)),
                [n, d] => Ok(Gq::real(ratio(n, d)?)),
                [rn, rd, i_n, id] => Ok(Gq::new(ratio(rn, rd)?, ratio(i_n, id)?)),
                _ => Err(parse_err(format!("a scalar has 1, 2 or 4 components, got {}", v.len()))),
            },
        }
    }
}

fn int_json(b: &BigInt) -> NumJson {
    match b.to_i64() {
        Some(i) => NumJson::Int(i),
        None => NumJson::Str(b.to_string()),
    }
}

impl From<&Gq> for ScalarJson {
    fn from(z: &Gq) -> Self {
        if z.is_real() {
            if z.re.is_integer() {
                return ScalarJson::Num(int_json(z.re.numer()));
            }
            return ScalarJson::List(vec![int_json(z.re.numer()), int_json(z.re.denom())]);
        }
        ScalarJson::List(vec![
            int_json(z.re.numer()),
            int_json(z.re.denom()),
            int_json(z.im.numer()),
            int_json(z.im.denom()),
        ])
    }
}

pub fn vec_json(v: &[Gq]) -> Vec<ScalarJson> {
    v.iter().map(ScalarJson::from).collect()
}

/// Row-major `[re, im]` pairs.
pub fn matrix_pairs(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepDoc {
    pub matrices: Vec<Vec<Vec<ScalarJson>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faithful: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemidirectDoc {
    pub b: Vec<Vec<ScalarJson>>,
    pub l: Vec<Vec<ScalarJson>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dim: usize,
    pub basis: Vec<String>,
    #[serde(default)]
    pub brackets: BTreeMap<String, BTreeMap<String, ScalarJson>>,
    #[serde(default)]
    pub levi: Vec<Vec<ScalarJson>>,
    #[serde(default)]
    pub subgroups: BTreeMap<String, Vec<Vec<ScalarJson>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep: Option<RepDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semidirect: Option<SemidirectDoc>,
}

/// Parses a document; errors carry the line and column.
pub fn parse_doc(text: &str) -> Result<AlgebraDoc> {
    serde_json::from_str(text).map_err(|e| parse_err(format!("line {}, column {}: {e}", e.line(), e.column())))
}

fn index(names: &[String], key: &str) -> Result<usize> {
    let key = key.trim();
    if let Ok(i) = key.parse::<usize>() {
        if i < names.len() {
            return Ok(i);
        }
        return Err(parse_err(format!("index {i} out of range")));
    }
    names.iter().position(|n| n == key).ok_or_else(|| parse_err(format!("unknown basis element {key:?}")))
}

fn parse_vec(n: usize, v: &[ScalarJson]) -> Result<QVec> {
    if v.len() != n {
        return Err(parse_err(format!("vector of length {} in a {n}-dimensional algebra", v.len())));
    }
    v.iter().map(ScalarJson::to_gq).collect()
}

fn parse_span(n: usize, vs: &[Vec<ScalarJson>]) -> Result<Subspace> {
    let vs = vs.iter().map(|v| parse_vec(n, v)).collect::<Result<Vec<_>>>()?;
    Ok(Subspace::span(n, &vs))
}

impl AlgebraDoc {
    /// Builds the (unvalidated) fixture. Missing `"j,i"` entries are filled by
    /// antisymmetry; entries given both ways are kept for validation to judge.
    pub fn to_fixture(&self, default_name: &str) -> Result<Fixture> {
        let n = self.dim;
        if self.basis.len() != n {
            return Err(parse_err(format!("dim is {n} but {} basis names are given", self.basis.len())));
        }
        let mut c = vec![vec![zero_vec(n); n]; n];
        let mut given = BTreeSet::new();
        for (key, comps) in &self.brackets {
            let (a, b) = key.split_once(',').ok_or_else(|| parse_err(format!("bracket key {key:?} is not \"i,j\"")))?;
            let (i, j) = (index(&self.basis, a)?, index(&self.basis, b)?);
            if !given.insert((i, j)) {
                return Err(parse_err(format!("bracket [{i},{j}] given twice")));
            }
            for (k, v) in comps {
                c[i][j][index(&self.basis, k)?] = v.to_gq()?;
            }
        }
        for &(i, j) in &given {
            if !given.contains(&(j, i)) {
                c[j][i] = vec_neg(&c[i][j]);
            }
        }
        let algebra = LieAlgebra::new(self.basis.clone(), c)?;
        let rep = match &self.rep {
            None => None,
            Some(r) => {
                if r.matrices.len() != n {
                    return Err(parse_err(format!("{} matrices for a {n}-dimensional algebra", r.matrices.len())));
                }
                let d = r.matrices.first().map_or(0, Vec::len);
                let mats = r
                    .matrices
                    .iter()
                    .map(|m| {
                        if m.len() != d || m.iter().any(|row| row.len() != d) {
                            return Err(parse_err(format!("representation matrices must all be {d}×{d}")));
                        }
                        let rows = m
                            .iter()
                            .map(|row| row.iter().map(ScalarJson::to_gq).collect())
                            .collect::<Result<Vec<QVec>>>()?;
                        Ok(if d == 0 { QMatrix::zeros(0, 0) } else { QMatrix::from_rows(&rows) })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(Rep::new(d, mats)?)
            }
        };
        let subgroups = self
            .subgroups
            .iter()
            .map(|(k, vs)| Ok((k.clone(), parse_span(n, vs)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let semidirect = match &self.semidirect {
            None => None,
            Some(s) => Some((parse_span(n, &s.b)?, parse_span(n, &s.l)?)),
        };
        Ok(Fixture {
            name: self.name.clone().unwrap_or_else(|| default_name.to_string()),
            algebra,
            levi: parse_span(n, &self.levi)?,
            rep,
            faithful: self.rep.as_ref().and_then(|r| r.faithful),
            subgroups,
            semidirect,
        })
    }

    pub fn from_fixture(f: &Fixture) -> Self {
        let a = &f.algebra;
        let n = a.dim();
        let mut brackets = BTreeMap::new();
        for i in 0..n {
            for j in i + 1..n {
                let v = &a.structure_constants()[i][j];
                let comps: BTreeMap<String, ScalarJson> = v
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(k, x)| (k.to_string(), ScalarJson::from(x)))
                    .collect();
                if !comps.is_empty() {
                    brackets.insert(format!("{i},{j}"), comps);
                }
            }
        }
        let basis_json = |s: &Subspace| s.basis().iter().map(|v| vec_json(v)).collect::<Vec<_>>();
        AlgebraDoc {
            name: Some(f.name.clone()),
            dim: n,
            basis: a.names().to_vec(),
            brackets,
            levi: basis_json(&f.levi),
            subgroups: f.subgroups.iter().map(|(k, v)| (k.clone(), basis_json(v))).collect(),
            rep: f.rep.as_ref().map(|r| RepDoc {
                matrices: r.matrices().iter().map(|m| m.to_rows().iter().map(|row| vec_json(row)).collect()).collect(),
                faithful: f.faithful,
            }),
            semidirect: f.semidirect.as_ref().map(|(b, l)| SemidirectDoc { b: basis_json(b), l: basis_json(l) }),
        }
    }
}

pub fn parse_fixture(text: &str, default_name: &str) -> Result<Fixture> {
    parse_doc(text)?.to_fixture(default_name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn scalar_forms() {
        let s: ScalarJson = serde_json::from_str("[1, 2, -3, 4]").unwrap();
        assert_eq!(s.to_gq().unwrap(), &Gq::ratio(1, 2) + &(&Gq::ratio(-3, 4) * &Gq::i()));
        let s: ScalarJson = serde_json::from_str("\"123456789012345678901234567890\"").unwrap();
        assert_eq!(ScalarJson::from(&s.to_gq().unwrap()), s);
        let bad: ScalarJson = serde_json::from_str("[1, 0]").unwrap();
        assert!(bad.to_gq().is_err());
    }

    #[test]
    fn fixtures_round_trip() {
        for f in fixtures::all() {
            let text = serde_json::to_string(&AlgebraDoc::from_fixture(&f)).unwrap();
            let g = parse_fixture(&text, "x").unwrap();
            assert_eq!(g.algebra, f.algebra, "{}", f.name);
            assert_eq!(g.rep, f.rep);
            assert_eq!(g.subgroups, f.subgroups);
            assert_eq!(g.levi, f.levi);
        }
    }

    #[test]
    fn antisymmetry_is_filled_and_conflicts_survive() {
        let text = r#"{"dim": 2, "basis": ["x", "y"], "brackets": {"x,y": {"y": 1}}}"#;
        let f = parse_fixture(text, "t").unwrap();
        assert_eq!(f.algebra.structure_constants()[1][0], vec![Gq::int(0), Gq::int(-1)]);
        let text = r#"{"dim": 2, "basis": ["e1", "e2"], "brackets": {"0,1": {"0": 1}, "1,0": {"0": 1}}}"#;
        let f = parse_fixture(text, "t").unwrap();
        assert!(matches!(f.algebra.validate(), Err(Error::AntisymmetryViolation { .. })));
    }

    #[test]
    fn parse_errors_have_positions() {
        let err = parse_fixture("{\n  \"dim\": 2,\n  oops\n}", "t").unwrap_err();
        assert!(matches!(&err, Error::Parse(m) if m.starts_with("line 3")), "{err}");
    }
}
