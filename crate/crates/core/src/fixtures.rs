//! Built-in algebras with faithful matrix representations.

use std::collections::BTreeMap;

use num_traits::One;

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::group::Rep;
use crate::linalg::{QMatrix, Subspace};
use crate::scalar::{unit_vec, vec_neg, Gq, QVec};

/// An algebra with its Levi complement, a representation and named ideals.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub algebra: LieAlgebra,
    pub levi: Subspace,
    pub rep: Option<Rep>,
    /// Declared faithfulness, checked by validation when present.
    pub faithful: Option<bool>,
    pub subgroups: BTreeMap<String, Subspace>,
    /// Explicit `(𝔟, 𝔩)` split; defaults to `(𝔯, 𝔰)`.
    pub semidirect: Option<(Subspace, Subspace)>,
}

impl Fixture {
    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn rep(&self) -> Result<&Rep> {
        self.rep.as_ref().ok_or_else(|| Error::Config("the input has no representation".into()))
    }

    pub fn subgroup(&self, name: &str) -> Result<&Subspace> {
        self.subgroups.get(name).ok_or_else(|| {
            Error::Config(format!("unknown subgroup {name:?}; known: {:?}", self.subgroups.keys().collect::<Vec<_>>()))
        })
    }

    /// Whether every basis vector acts nilpotently, so the whole group is
    /// realized by unipotent matrices and all arithmetic stays exact.
    pub fn is_unipotent(&self) -> bool {
        let Some(rep) = &self.rep else { return false };
        (0..self.dim()).all(|i| rep.image(&unit_vec(self.dim(), i)).nilpotency_index().is_some())
    }
}

pub const NAMES: &[&str] = &[
    "heisenberg3",
    "filiform4",
    "filiform5",
    "filiform6",
    "filiform7",
    "filiform8",
    "affine2",
    "sl2",
    "asl2",
    "sixdim",
    "cdiag",
];

pub fn by_name(name: &str) -> Option<Fixture> {
    match name {
        "heisenberg3" => Some(heisenberg3()),
        "affine2" => Some(affine2()),
        "sl2" => Some(sl2()),
        "asl2" => Some(asl2()),
        "sixdim" => Some(sixdim()),
        "cdiag" => Some(cdiag()),
        _ => {
            let n: usize = name.strip_prefix("filiform")?.parse().ok()?;
            (4..=8).contains(&n).then(|| filiform(n))
        }
    }
}

pub fn all() -> Vec<Fixture> {
    NAMES.iter().map(|n| by_name(n).expect("listed")).collect()
}

fn names(ns: &[&str]) -> Vec<String> {
    ns.iter().map(|s| s.to_string()).collect()
}

fn mat(d: usize, entries: &[(usize, usize, Gq)]) -> QMatrix {
    let mut m = QMatrix::zeros(d, d);
    for (i, j, v) in entries {
        m[(*i, *j)] = v.clone();
    }
    m
}

fn one() -> Gq {
    Gq::one()
}

fn span(n: usize, idx: &[usize]) -> Subspace {
    Subspace::span(n, &idx.iter().map(|&i| unit_vec(n, i)).collect::<Vec<_>>())
}

fn fixture(name: &str, algebra: LieAlgebra, levi: Subspace, rep: Rep, subgroups: &[(&str, Subspace)]) -> Fixture {
    Fixture {
        name: name.into(),
        algebra,
        levi,
        rep: Some(rep),
        faithful: Some(true),
        subgroups: subgroups.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        semidirect: None,
    }
}

/// `[e1,e2] = e3` with the upper triangular 3×3 representation.
pub fn heisenberg3() -> Fixture {
    let a = LieAlgebra::from_brackets(names(&["e1", "e2", "e3"]), &[(0, 1, unit_vec(3, 2))]);
    let rep = Rep::new(3, vec![mat(3, &[(0, 1, one())]), mat(3, &[(1, 2, one())]), mat(3, &[(0, 2, one())])])
        .expect("shapes");
    fixture("heisenberg3", a, Subspace::zero(3), rep, &[("N", span(3, &[2])), ("E", Subspace::zero(3))])
}

/// `[e0,ej] = e_{j+1}` for `1 ≤ j ≤ n−2`, acting on `V ⊕ ℂ` with
/// `V = ⟨e1,…,e_{n−1}⟩`: `e0` shifts `V`, `v ∈ V` maps `ℂ` onto `v`.
pub fn filiform(n: usize) -> Fixture {
    assert!(n >= 3);
    let nm: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let br: Vec<(usize, usize, QVec)> = (1..n - 1).map(|j| (0, j, unit_vec(n, j + 1))).collect();
    let a = LieAlgebra::from_brackets(nm, &br);
    let shift: Vec<(usize, usize, Gq)> = (1..n - 1).map(|j| (j, j - 1, one())).collect();
    let mut mats = vec![mat(n, &shift)];
    mats.extend((1..n).map(|j| mat(n, &[(j - 1, n - 1, one())])));
    let rep = Rep::new(n, mats).expect("shapes");
    let mut subs: Vec<(String, Subspace)> =
        (2..n).map(|k| (format!("H{k}"), span(n, &(k..n).collect::<Vec<_>>()))).collect();
    subs.push(("N".into(), span(n, &(2..n).collect::<Vec<_>>())));
    subs.push(("E".into(), Subspace::zero(n)));
    let subs: Vec<(&str, Subspace)> = subs.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    fixture(&format!("filiform{n}"), a, Subspace::zero(n), rep, &subs)
}

/// `[x,y] = y`, with `ρ(x) = E11 + E34` and `ρ(y) = E12`.
pub fn affine2() -> Fixture {
    let a = LieAlgebra::from_brackets(names(&["x", "y"]), &[(0, 1, unit_vec(2, 1))]);
    let rep = Rep::new(4, vec![mat(4, &[(0, 0, one()), (2, 3, one())]), mat(4, &[(0, 1, one())])]).expect("shapes");
    fixture("affine2", a, Subspace::zero(2), rep, &[("N", span(2, &[1]))])
}

/// `[h,e] = 2e`, `[h,f] = −2f`, `[e,f] = h` in the defining representation.
pub fn sl2() -> Fixture {
    let a = sl2_brackets(&["h", "e", "f"], 3);
    let rep = Rep::new(
        2,
        vec![mat(2, &[(0, 0, one()), (1, 1, Gq::int(-1))]), mat(2, &[(0, 1, one())]), mat(2, &[(1, 0, one())])],
    )
    .expect("shapes");
    fixture("sl2", a, Subspace::full(3), rep, &[("N", Subspace::zero(3))])
}

fn sl2_brackets(nm: &[&str], n: usize) -> LieAlgebra {
    let two = |i: usize| crate::scalar::vec_scale(&Gq::int(2), &unit_vec(n, i));
    let mut br = vec![(0, 1, two(1)), (0, 2, vec_neg(&two(2))), (1, 2, unit_vec(n, 0))];
    if n == 5 {
        br.extend([
            (0, 3, unit_vec(5, 3)),
            (0, 4, vec_neg(&unit_vec(5, 4))),
            (1, 4, unit_vec(5, 3)),
            (2, 3, unit_vec(5, 4)),
        ]);
    }
    LieAlgebra::from_brackets(names(nm), &br)
}

/// `sl2 ⋉ ℂ²` in the 3×3 affine representation.
pub fn asl2() -> Fixture {
    let a = sl2_brackets(&["h", "e", "f", "u", "v"], 5);
    let rep = Rep::new(
        3,
        vec![
            mat(3, &[(0, 0, one()), (1, 1, Gq::int(-1))]),
            mat(3, &[(0, 1, one())]),
            mat(3, &[(1, 0, one())]),
            mat(3, &[(0, 2, one())]),
            mat(3, &[(1, 2, one())]),
        ],
    )
    .expect("shapes");
    fixture("asl2", a, span(5, &[0, 1, 2]), rep, &[("N", span(5, &[3, 4])), ("E", span(5, &[3, 4]))])
}

/// Two Heisenberg algebras `⟨x1,x2,x3⟩` and `⟨y1,y2,y3⟩` with `x1` acting on
/// the second by `y1 ↦ y1`, `y2 ↦ −y2`; the exponential radical is `⟨y⟩`.
pub fn sixdim() -> Fixture {
    let e = |i| unit_vec(6, i);
    let a = LieAlgebra::from_brackets(
        names(&["x1", "x2", "x3", "y1", "y2", "y3"]),
        &[(0, 1, e(2)), (3, 4, e(5)), (0, 3, e(3)), (0, 4, vec_neg(&e(4)))],
    );
    let rep = Rep::new(
        6,
        vec![
            mat(6, &[(0, 1, one()), (3, 3, one()), (5, 5, one())]),
            mat(6, &[(1, 2, one())]),
            mat(6, &[(0, 2, one())]),
            mat(6, &[(3, 4, one())]),
            mat(6, &[(4, 5, one())]),
            mat(6, &[(3, 5, one())]),
        ],
    )
    .expect("shapes");
    fixture("sixdim", a, Subspace::zero(6), rep, &[("N", span(6, &[2, 3, 4, 5])), ("E", span(6, &[3, 4, 5]))])
}

/// The line `ℂ` with `π(z) = diag(e^z, e^{iz})`.
pub fn cdiag() -> Fixture {
    let a = LieAlgebra::abelian(1);
    let rep = Rep::new(2, vec![mat(2, &[(0, 0, one()), (1, 1, Gq::i())])]).expect("shapes");
    fixture("cdiag", a, Subspace::zero(1), rep, &[("N", Subspace::zero(1))])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_validates() {
        for f in all() {
            f.algebra.validate().unwrap_or_else(|e| panic!("{}: {e}", f.name));
            let rep = f.rep.as_ref().unwrap();
            rep.validate(&f.algebra).unwrap_or_else(|e| panic!("{}: {e}", f.name));
            assert!(rep.is_faithful(), "{}", f.name);
            for (k, n) in &f.subgroups {
                f.algebra.validate_intermediate(n, &f.levi).unwrap_or_else(|e| panic!("{} {k}: {e}", f.name));
            }
        }
    }

    #[test]
    fn lookup() {
        assert!(by_name("filiform9").is_none());
        assert_eq!(by_name("filiform6").unwrap().dim(), 6);
    }
}
