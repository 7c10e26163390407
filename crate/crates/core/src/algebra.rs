//! Structure-constant Lie algebras over the Gaussian rationals: brackets,
//! series, the radical chain, Cartan subalgebras and adapted bases.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{QMatrix, Subspace};
use crate::scalar::{unit_vec, vec_add, vec_axpy, vec_is_zero, zero_vec, Gq, QVec};

/// Default number of random trials when searching for a regular element.
pub const CARTAN_TRIALS: usize = 64;

/// A Lie algebra given by `[e_i, e_j] = Σ_k c[i][j][k] e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    names: Vec<String>,
    c: Vec<Vec<QVec>>,
    nonzero: Vec<(usize, usize)>,
}

impl LieAlgebra {
    /// Builds the algebra without validating it; see [`LieAlgebra::validate`].
    pub fn new(names: Vec<String>, c: Vec<Vec<QVec>>) -> Result<Self> {
        let n = names.len();
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: c.len() });
        }
        for row in &c {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for v in row {
                if v.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: v.len() });
                }
            }
        }
        let nonzero =
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| !vec_is_zero(&c[i][j])).collect();
        Ok(Self { names, c, nonzero })
    }

    /// Builds from the nonzero brackets `[e_i, e_j] = v` with `i < j`, filling
    /// the rest by antisymmetry.
    pub fn from_brackets(names: Vec<String>, brackets: &[(usize, usize, QVec)]) -> Self {
        let n = names.len();
        let mut c = vec![vec![zero_vec(n); n]; n];
        for (i, j, v) in brackets {
            c[*i][*j] = v.clone();
            c[*j][*i] = crate::scalar::vec_neg(v);
        }
        Self::new(names, c).expect("consistent shapes")
    }

    pub fn abelian(n: usize) -> Self {
        Self::from_brackets((0..n).map(|i| format!("e{i}")).collect(), &[])
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn structure_constants(&self) -> &[Vec<QVec>] {
        &self.c
    }

    pub fn basis_vector(&self, i: usize) -> QVec {
        unit_vec(self.dim(), i)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Exact antisymmetry and Jacobi check; reports the first violating triple.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        for i in 0..n {
            for j in i..n {
                for k in 0..n {
                    if self.c[i][j][k] != -&self.c[j][i][k] {
                        return Err(Error::AntisymmetryViolation { i, j, k });
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (ei, ej, ek) = (unit_vec(n, i), unit_vec(n, j), unit_vec(n, k));
                    let a = self.br(&ei, &self.c[j][k]);
                    let b = self.br(&ej, &self.c[k][i]);
                    let c = self.br(&ek, &self.c[i][j]);
                    if !vec_is_zero(&vec_add(&vec_add(&a, &b), &c)) {
                        return Err(Error::JacobiViolation { i, j, k });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn bracket(&self, x: &[Gq], y: &[Gq]) -> Result<QVec> {
        let n = self.dim();
        for v in [x, y] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        Ok(self.br(x, y))
    }

    /// Bracket without the dimension check.
    pub fn br(&self, x: &[Gq], y: &[Gq]) -> QVec {
        let mut out = zero_vec(self.dim());
        for &(i, j) in &self.nonzero {
            if x[i].is_zero() || y[j].is_zero() {
                continue;
            }
            vec_axpy(&mut out, &(&x[i] * &y[j]), &self.c[i][j]);
        }
        out
    }

    /// `ad(x)` as an `n×n` matrix acting on coordinate columns.
    pub fn ad(&self, x: &[Gq]) -> QMatrix {
        let n = self.dim();
        let cols: Vec<QVec> = (0..n).map(|j| self.br(x, &unit_vec(n, j))).collect();
        QMatrix::from_columns(n, &cols)
    }

    /// `span{[u, w] : u ∈ U, w ∈ W}`
    pub fn bracket_spaces(&self, u: &Subspace, w: &Subspace) -> Subspace {
        let mut vs = Vec::new();
        for a in u.basis() {
            for b in w.basis() {
                vs.push(self.br(a, b));
            }
        }
        Subspace::span(self.dim(), &vs)
    }

    pub fn full(&self) -> Subspace {
        Subspace::full(self.dim())
    }

    pub fn derived_algebra(&self) -> Subspace {
        let vs: Vec<QVec> = self.nonzero.iter().map(|&(i, j)| self.c[i][j].clone()).collect();
        Subspace::span(self.dim(), &vs)
    }

    pub fn is_subalgebra(&self, h: &Subspace) -> bool {
        self.bracket_spaces(h, h).is_subspace_of(h)
    }

    /// `[k, h] ⊆ h`
    pub fn normalizes(&self, k: &Subspace, h: &Subspace) -> bool {
        self.bracket_spaces(k, h).is_subspace_of(h)
    }

    pub fn is_ideal(&self, h: &Subspace) -> bool {
        self.normalizes(&self.full(), h)
    }

    pub fn lower_central_series(&self, h: &Subspace) -> Result<SeriesChain> {
        if !self.is_subalgebra(h) {
            return Err(Error::NotASubalgebra);
        }
        Ok(SeriesChain::iterate(SeriesKind::LowerCentral, h.clone(), |c| self.bracket_spaces(h, c)))
    }

    pub fn derived_series(&self, h: &Subspace) -> Result<SeriesChain> {
        if !self.is_subalgebra(h) {
            return Err(Error::NotASubalgebra);
        }
        Ok(SeriesChain::iterate(SeriesKind::Derived, h.clone(), |d| self.bracket_spaces(d, d)))
    }

    pub fn is_nilpotent(&self) -> bool {
        self.lower_central_series(&self.full()).map(|s| s.reaches_zero()).unwrap_or(false)
    }

    pub fn is_solvable(&self) -> bool {
        self.derived_series(&self.full()).map(|s| s.reaches_zero()).unwrap_or(false)
    }

    /// Smallest `c` with `C^{c+1} = 0`, or `None` when not nilpotent.
    pub fn nilpotency_class(&self) -> Option<usize> {
        let s = self.lower_central_series(&self.full()).ok()?;
        s.reaches_zero().then(|| s.terms.len() - 1)
    }

    /// `κ(e_i, e_j) = tr(ad e_i · ad e_j)`
    pub fn killing_matrix(&self) -> QMatrix {
        let n = self.dim();
        let ads: Vec<QMatrix> = (0..n).map(|i| self.ad(&unit_vec(n, i))).collect();
        QMatrix::from_fn(n, n, |i, j| ads[i].mul(&ads[j]).trace())
    }

    /// `𝔯 = [𝔤,𝔤]^⊥` with respect to the Killing form.
    pub fn solvable_radical(&self) -> Result<Subspace> {
        let n = self.dim();
        let k = self.killing_matrix();
        let d = self.derived_algebra();
        let rows: Vec<QVec> = d.basis().iter().map(|v| k.mul_vec(v)).collect();
        let r = if rows.is_empty() { self.full() } else { Subspace::span(n, &QMatrix::from_rows(&rows).kernel()) };
        if !self.is_ideal(&r) {
            return Err(Error::InternalInconsistency("solvable radical is not an ideal".into()));
        }
        if !self.derived_series(&r)?.reaches_zero() {
            return Err(Error::InternalInconsistency("solvable radical is not solvable".into()));
        }
        Ok(r)
    }

    /// `𝔫 = [𝔤,𝔯]`, cross-checked against `[𝔤,𝔤] ∩ 𝔯`.
    pub fn nilpotent_radical(&self) -> Result<Subspace> {
        let r = self.solvable_radical()?;
        self.nilpotent_radical_from(&r)
    }

    pub fn nilpotent_radical_from(&self, r: &Subspace) -> Result<Subspace> {
        let n = self.bracket_spaces(&self.full(), r);
        let alt = self.derived_algebra().intersect(r);
        if n != alt {
            return Err(Error::InternalInconsistency("[g,r] differs from [g,g] ∩ r".into()));
        }
        if !self.lower_central_series(&n)?.reaches_zero() {
            return Err(Error::InternalInconsistency("nilpotent radical is not nilpotent".into()));
        }
        Ok(n)
    }

    pub fn subalgebra_generated(&self, vectors: &[QVec]) -> Result<Subspace> {
        for v in vectors {
            if v.len() != self.dim() {
                return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
            }
        }
        let mut s = Subspace::span(self.dim(), vectors);
        loop {
            let next = s.sum(&self.bracket_spaces(&s, &s));
            if next == s {
                return Ok(s);
            }
            s = next;
        }
    }

    pub fn validate_levi(&self, levi: &Subspace, r: &Subspace) -> Result<()> {
        if !self.is_subalgebra(levi) {
            return Err(Error::InvalidLeviComplement("not a subalgebra".into()));
        }
        if self.bracket_spaces(levi, levi) != *levi {
            return Err(Error::InvalidLeviComplement("[s,s] differs from s".into()));
        }
        if !levi.intersect(r).is_zero() {
            return Err(Error::InvalidLeviComplement("meets the solvable radical".into()));
        }
        if levi.sum(r) != self.full() {
            return Err(Error::InvalidLeviComplement("s + r is not the whole algebra".into()));
        }
        Ok(())
    }

    /// `𝔢 = 𝔯_∞ + (𝔰,𝔯)`
    pub fn exponential_radical(&self, levi: &Subspace) -> Result<Subspace> {
        let r = self.solvable_radical()?;
        self.validate_levi(levi, &r)?;
        let r_inf = self.lower_central_series(&r)?.last().clone();
        let sr = self.bracket_spaces(levi, &r);
        let e = r_inf.sum(&self.subalgebra_generated(sr.basis())?);
        if !self.is_ideal(&e) {
            return Err(Error::InternalInconsistency("exponential radical is not an ideal".into()));
        }
        let n = self.nilpotent_radical_from(&r)?;
        if !e.is_subspace_of(&n) {
            return Err(Error::EViolatesContainment);
        }
        Ok(e)
    }

    /// The structure constants of a subalgebra in its echelon basis.
    pub fn restrict(&self, h: &Subspace) -> Result<LieAlgebra> {
        if !self.is_subalgebra(h) {
            return Err(Error::NotASubalgebra);
        }
        let b = h.basis();
        let k = b.len();
        let c = (0..k).map(|i| (0..k).map(|j| h.coords(&self.br(&b[i], &b[j])).expect("closed")).collect()).collect();
        LieAlgebra::new((0..k).map(|i| format!("h{i}")).collect(), c)
    }

    /// `{x ∈ k : [x, h] ⊆ h}`
    pub fn normalizer_in(&self, k: &Subspace, h: &Subspace) -> Subspace {
        let n = self.dim();
        let kb = k.basis();
        if kb.is_empty() {
            return Subspace::zero(n);
        }
        // Each column holds the residues of [k_i, h_j] modulo h for all j.
        let cols: Vec<QVec> =
            kb.iter().map(|x| h.basis().iter().flat_map(|y| h.reduce(&self.br(x, y))).collect()).collect();
        if cols[0].is_empty() {
            return k.clone();
        }
        let m = QMatrix::from_columns(cols[0].len(), &cols);
        let vs: Vec<QVec> = m.kernel().iter().map(|c| k.combine(c)).collect();
        Subspace::span(n, &vs)
    }

    /// Fitting null component `ker ad_b(x)^{dim b}` of `x ∈ b`.
    pub fn fitting_null(&self, b: &Subspace, x: &[Gq]) -> Subspace {
        let bb = b.basis();
        let k = bb.len();
        let cols: Vec<QVec> = bb.iter().map(|y| b.coords(&self.br(x, y)).expect("x normalizes b")).collect();
        let m = QMatrix::from_columns(k, &cols).pow(k as u32);
        let vs: Vec<QVec> = m.kernel().iter().map(|c| b.combine(c)).collect();
        Subspace::span(self.dim(), &vs)
    }

    /// A Cartan subalgebra of the solvable subalgebra `b`, found as the
    /// Fitting null component of a random element.
    pub fn cartan_subalgebra(&self, b: &Subspace, seed: u64) -> Result<Subspace> {
        self.cartan_subalgebra_with(b, seed, CARTAN_TRIALS)
    }

    pub fn cartan_subalgebra_with(&self, b: &Subspace, seed: u64, trials: usize) -> Result<Subspace> {
        if !self.derived_series(b)?.reaches_zero() {
            return Err(Error::NotSolvable);
        }
        if self.lower_central_series(b)?.reaches_zero() {
            return Ok(b.clone());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trials {
            let coeffs: QVec = (0..b.dim()).map(|_| Gq::int(rng.random_range(-7..=7))).collect();
            let x = b.combine(&coeffs);
            let h = self.fitting_null(b, &x);
            if self.lower_central_series(&h)?.reaches_zero() && self.normalizer_in(b, &h) == h {
                return Ok(h);
            }
        }
        Err(Error::RegularElementNotFound { trials, seed })
    }

    /// Quotient of the subalgebra `b` by its ideal `ideal`.
    pub fn quotient(&self, b: &Subspace, ideal: &Subspace) -> Result<Quotient> {
        if !self.is_subalgebra(b) {
            return Err(Error::NotASubalgebra);
        }
        if !ideal.is_subspace_of(b) || !self.normalizes(b, ideal) {
            return Err(Error::NotAnIdeal("quotient kernel is not an ideal of the subalgebra".into()));
        }
        let reps = ideal.completion_from(b);
        let q = reps.len();
        let mut cols: Vec<QVec> = reps.iter().map(|v| b.coords(v).expect("in b")).collect();
        cols.extend(ideal.basis().iter().map(|v| b.coords(v).expect("in b")));
        let p = QMatrix::from_columns(b.dim(), &cols);
        let pinv = p.inverse().ok_or_else(|| Error::InternalInconsistency("quotient basis is singular".into()))?;
        let proj = QMatrix::from_fn(q, b.dim(), |i, j| pinv[(i, j)].clone());
        let mut quotient =
            Quotient { algebra: LieAlgebra::abelian(0), reps, sub: b.clone(), ideal: ideal.clone(), proj };
        let c = (0..q)
            .map(|i| {
                (0..q)
                    .map(|j| quotient.project(&self.br(&quotient.reps[i], &quotient.reps[j])).expect("closed"))
                    .collect()
            })
            .collect();
        quotient.algebra = LieAlgebra::new((0..q).map(|i| format!("q{i}")).collect(), c)?;
        Ok(quotient)
    }

    /// `𝔫′` is an ideal of `𝔤` with `𝔢 ⊆ 𝔫′ ⊆ 𝔫`.
    pub fn validate_intermediate(&self, nprime: &Subspace, levi: &Subspace) -> Result<()> {
        if !self.is_ideal(nprime) {
            return Err(Error::NotAnIdeal("the chosen subspace is not an ideal".into()));
        }
        let e = self.exponential_radical(levi)?;
        let n = self.nilpotent_radical()?;
        if !e.is_subspace_of(nprime) {
            return Err(Error::NotBetweenRadicals("e ⊄ n'".into()));
        }
        if !nprime.is_subspace_of(&n) {
            return Err(Error::NotBetweenRadicals("n' ⊄ n".into()));
        }
        Ok(())
    }
}

/// `𝔟/𝔦` with representatives of a canonical complement of `𝔦` in `𝔟`.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub algebra: LieAlgebra,
    /// Ambient vectors projecting onto the quotient basis.
    pub reps: Vec<QVec>,
    pub sub: Subspace,
    pub ideal: Subspace,
    /// `dτ` in the echelon coordinates of `sub`.
    pub proj: QMatrix,
}

impl Quotient {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    /// `dτ(v)`, or `None` when `v ∉ 𝔟`.
    pub fn project(&self, v: &[Gq]) -> Option<QVec> {
        Some(self.proj.mul_vec(&self.sub.coords(v)?))
    }

    pub fn lift(&self, q: &[Gq]) -> QVec {
        let mut out = zero_vec(self.sub.ambient());
        for (c, r) in q.iter().zip(&self.reps) {
            vec_axpy(&mut out, c, r);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    Derived,
    LowerCentral,
}

/// A descending chain of subspaces, recorded until it reaches zero or repeats.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesChain {
    pub kind: SeriesKind,
    pub terms: Vec<Subspace>,
}

impl SeriesChain {
    fn iterate(kind: SeriesKind, first: Subspace, mut step: impl FnMut(&Subspace) -> Subspace) -> Self {
        let mut terms = vec![first];
        loop {
            let last = terms.last().expect("nonempty");
            if last.is_zero() {
                break;
            }
            let next = step(last);
            let stable = next == *last;
            terms.push(next);
            if stable {
                break;
            }
        }
        Self { kind, terms }
    }

    pub fn last(&self) -> &Subspace {
        self.terms.last().expect("nonempty")
    }

    pub fn reaches_zero(&self) -> bool {
        self.last().is_zero()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.terms.iter().map(Subspace::dim).collect()
    }
}

/// A basis adapted to the lower central series with the depth of each vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedBasis {
    #[serde(skip)]
    pub vectors: Vec<QVec>,
    pub weights: Vec<u32>,
}

/// Weighted basis of a nilpotent algebra, sorted by weight; `w_k` is the
/// largest `i` with `e_k ∈ C^i`.
pub fn f_basis_weights(a: &LieAlgebra) -> Result<WeightedBasis> {
    let lcs = a.lower_central_series(&a.full())?;
    if !lcs.reaches_zero() {
        return Err(Error::NotNilpotent);
    }
    let mut acc = Subspace::zero(a.dim());
    let mut layers = Vec::new();
    for (i, c) in lcs.terms.iter().enumerate().rev() {
        let added = acc.completion_from(c);
        acc = c.clone();
        layers.push((i as u32 + 1, added));
    }
    let mut vectors = Vec::new();
    let mut weights = Vec::new();
    for (w, vs) in layers.into_iter().rev() {
        for v in vs {
            vectors.push(v);
            weights.push(w);
        }
    }
    Ok(WeightedBasis { vectors, weights })
}

/// `𝔳 ⊕ (𝔫′ ∩ 𝔥) = 𝔥`, completing the echelon basis of the intersection
/// with echelon basis vectors of `𝔥` in order.
pub fn complement_v(h: &Subspace, nprime: &Subspace) -> Subspace {
    let inter = nprime.intersect(h);
    Subspace::span(h.ambient(), &inter.completion_from(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn e(n: usize, i: usize) -> QVec {
        unit_vec(n, i)
    }

    #[test]
    fn antisymmetry_violation_is_reported() {
        let mut c = vec![vec![zero_vec(2); 2]; 2];
        c[0][1] = e(2, 0);
        c[1][0] = e(2, 0);
        let a = LieAlgebra::new(vec!["e1".into(), "e2".into()], c).unwrap();
        assert!(matches!(a.validate(), Err(Error::AntisymmetryViolation { .. })));
    }

    #[test]
    fn jacobi_violation_is_reported() {
        let a = LieAlgebra::from_brackets(
            vec!["a".into(), "b".into(), "c".into()],
            &[(0, 1, e(3, 1)), (1, 2, e(3, 0)), (0, 2, e(3, 0))],
        );
        assert!(matches!(a.validate(), Err(Error::JacobiViolation { i: 0, j: 1, k: 2 })));
    }

    #[test]
    fn series_conventions() {
        let aff = fixtures::affine2().algebra;
        assert_eq!(aff.lower_central_series(&aff.full()).unwrap().dims(), vec![2, 1, 1]);
        let ab = LieAlgebra::abelian(3);
        assert_eq!(ab.lower_central_series(&ab.full()).unwrap().dims(), vec![3, 0]);
        let sl2 = fixtures::sl2().algebra;
        assert_eq!(sl2.derived_series(&sl2.full()).unwrap().dims(), vec![3, 3]);
        let f4 = fixtures::filiform(4).algebra;
        assert_eq!(f4.lower_central_series(&f4.full()).unwrap().dims(), vec![4, 2, 1, 0]);
        assert_eq!(f4.nilpotency_class(), Some(3));
    }

    #[test]
    fn radicals_of_small_algebras() {
        let sl2 = fixtures::sl2().algebra;
        assert!(sl2.solvable_radical().unwrap().is_zero());
        let aff = fixtures::affine2().algebra;
        assert_eq!(aff.solvable_radical().unwrap(), aff.full());
        assert_eq!(aff.nilpotent_radical().unwrap(), Subspace::span(2, &[e(2, 1)]));
        let asl2 = fixtures::asl2();
        let levi = asl2.levi.clone();
        let ex = asl2.algebra.exponential_radical(&levi).unwrap();
        assert_eq!(ex.dim(), 2);
    }

    #[test]
    fn cartan_of_affine2() {
        let aff = fixtures::affine2().algebra;
        let h = aff.cartan_subalgebra(&aff.full(), 7).unwrap();
        assert_eq!(h.dim(), 1);
        assert!(!h.contains(&e(2, 1)));
        assert!(aff.restrict(&h).unwrap().is_nilpotent());
        assert_eq!(aff.normalizer_in(&aff.full(), &h), h);
    }

    #[test]
    fn quotient_and_weights() {
        let h = fixtures::heisenberg3().algebra;
        let q = h.quotient(&h.full(), &Subspace::span(3, &[e(3, 2)])).unwrap();
        assert_eq!(q.dim(), 2);
        assert!(q.algebra.derived_algebra().is_zero());
        assert_eq!(f_basis_weights(&h).unwrap().weights, vec![1, 1, 2]);
        let f6 = fixtures::filiform(6).algebra;
        assert_eq!(f_basis_weights(&f6).unwrap().weights, vec![1, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn complement_examples() {
        let v = complement_v(&Subspace::full(4), &Subspace::span(4, &[e(4, 2), e(4, 3)]));
        assert_eq!(v, Subspace::span(4, &[e(4, 0), e(4, 1)]));
        let h = Subspace::span(4, &[e(4, 2)]);
        assert!(complement_v(&h, &Subspace::full(4)).is_zero());
    }
}
