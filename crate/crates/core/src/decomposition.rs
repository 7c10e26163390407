//! The triple decomposition `g = exp(η)·exp(ξ)·l` with `η ∈ 𝔫′`, `ξ ∈ 𝔳`
//! and `l` in the reductive factor, plus the truncated BCH product it uses.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::algebra::{complement_v, f_basis_weights, LieAlgebra, Quotient, WeightedBasis};
use crate::error::{Error, Result};
use crate::group::{log_unipotent, log_unipotent_f64, CMat, GMat, GroupElement, Rep, ScaledMatrix};
use crate::io::ScalarJson;
use crate::linalg::{QMatrix, Subspace};
use crate::scalar::{vec_add, vec_is_zero, vec_neg, vec_sub, zero_vec, Gq, QVec};

/// Relative tolerance for `η ∈ 𝔫′` on the floating point path.
pub const ETA_TOLERANCE: f64 = 1e-9;

/// Bernoulli numbers `B_0, …, B_m` (with `B_1 = −1/2`).
pub fn bernoulli(m: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(m + 1);
    for n in 0..=m {
        if n == 0 {
            b.push(BigRational::one());
            continue;
        }
        let mut s = BigRational::zero();
        let mut binom = BigInt::one();
        for (k, bk) in b.iter().enumerate() {
            s += BigRational::from_integer(binom.clone()) * bk;
            binom = binom * BigInt::from(n + 1 - k) / BigInt::from(k + 1);
        }
        b.push(-s / BigRational::from_integer(BigInt::from(n + 1)));
    }
    b
}

/// The BCH product `log(exp x · exp y)` on a nilpotent algebra, summed by
/// Varadarajan's recursion up to the nilpotency class.
#[derive(Clone, Debug)]
pub struct Bch {
    alg: LieAlgebra,
    class: usize,
    /// `B_{2p}/(2p)!` for `p = 1, 2, …`
    k2p: Vec<Gq>,
}

impl Bch {
    pub fn new(alg: &LieAlgebra) -> Result<Self> {
        let class = alg.nilpotency_class().ok_or(Error::NotNilpotent)?;
        let b = bernoulli(class.max(2));
        let mut fact = BigInt::one();
        let mut k2p = Vec::new();
        for (n, bn) in b.iter().enumerate().take(class.max(2) + 1).skip(1) {
            fact *= BigInt::from(n);
            if n % 2 == 0 {
                k2p.push(Gq::real(bn / BigRational::from_integer(fact.clone())));
            }
        }
        Ok(Self { alg: alg.clone(), class, k2p })
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.alg
    }

    pub fn product(&self, x: &[Gq], y: &[Gq]) -> QVec {
        let n = self.alg.dim();
        if vec_is_zero(x) {
            return y.to_vec();
        }
        if vec_is_zero(y) {
            return x.to_vec();
        }
        let s = vec_add(x, y);
        let d = vec_sub(x, y);
        // z[k] is the homogeneous component of degree k + 1.
        let mut z: Vec<QVec> = vec![s.clone()];
        for m in 1..self.class {
            let mut next = self.alg.br(&d, &z[m - 1]);
            next = crate::scalar::vec_scale(&Gq::ratio(1, 2), &next);
            for (p, kp) in self.k2p.iter().enumerate() {
                let parts = 2 * (p + 1);
                if parts > m {
                    break;
                }
                let mut acc = zero_vec(n);
                for comp in compositions(m, parts) {
                    let mut t = s.clone();
                    for &k in comp.iter().rev() {
                        t = self.alg.br(&z[k - 1], &t);
                        if vec_is_zero(&t) {
                            break;
                        }
                    }
                    acc = vec_add(&acc, &t);
                }
                crate::scalar::vec_axpy(&mut next, kp, &acc);
            }
            z.push(crate::scalar::vec_scale(&Gq::ratio(1, m as i64 + 1), &next));
        }
        z.iter().fold(zero_vec(n), |a, b| vec_add(&a, b))
    }

    /// `log(Π exp xⱼ)`
    pub fn fold(&self, xs: &[QVec]) -> QVec {
        xs.iter().fold(zero_vec(self.alg.dim()), |acc, x| self.product(&acc, x))
    }
}

pub fn bch(a: &LieAlgebra, x: &[Gq], y: &[Gq]) -> Result<QVec> {
    let n = a.dim();
    for v in [x, y] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
    }
    Ok(Bch::new(a)?.product(x, y))
}

/// Ordered compositions of `n` into `parts` positive integers.
fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return if n >= 1 { vec![vec![n]] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(parts - 1) {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `𝔤 = 𝔟 ⊕ 𝔩` with `𝔟` a solvable ideal and `𝔩` a subalgebra.
#[derive(Clone, Debug, Serialize)]
pub struct SemidirectData {
    pub b: Subspace,
    pub l: Subspace,
    #[serde(skip)]
    split: QMatrix,
}

impl SemidirectData {
    pub fn new(a: &LieAlgebra, b: Subspace, l: Subspace) -> Result<Self> {
        if !a.is_ideal(&b) {
            return Err(Error::NotAnIdeal("the solvable factor is not an ideal".into()));
        }
        if !a.is_subalgebra(&l) {
            return Err(Error::NotASubalgebra);
        }
        if !b.intersect(&l).is_zero() || b.sum(&l) != a.full() {
            return Err(Error::InvalidLeviComplement("the factors do not split the algebra".into()));
        }
        let mut cols: Vec<QVec> = b.basis().to_vec();
        cols.extend(l.basis().iter().cloned());
        let split = QMatrix::from_columns(a.dim(), &cols).inverse().expect("complementary");
        Ok(Self { b, l, split })
    }

    /// `(p_𝔟 x, p_𝔩 x)`
    pub fn split(&self, x: &[Gq]) -> (QVec, QVec) {
        let c = self.split.mul_vec(x);
        let kb = self.b.dim();
        (self.b.combine(&c[..kb]), self.l.combine(&c[kb..]))
    }
}

/// Everything needed to decompose group elements for one choice of `𝔫′`.
#[derive(Clone, Debug)]
pub struct DecompContext {
    pub algebra: LieAlgebra,
    pub rep: Rep,
    pub semidirect: SemidirectData,
    pub nprime: Subspace,
    pub h: Subspace,
    pub v: Subspace,
    /// `𝔟/𝔫′`
    pub quotient: Quotient,
    pub bch: Bch,
    /// 𝓕-basis of `𝔟/𝔫′` and the change to its coordinates.
    pub weights: WeightedBasis,
    to_f_coords: QMatrix,
    /// `(dτ|_𝔳)⁻¹`, from quotient coordinates to `𝔳` coordinates.
    dtau_v_inv: QMatrix,
}

impl DecompContext {
    pub fn new(
        algebra: &LieAlgebra,
        rep: &Rep,
        levi: &Subspace,
        nprime: &Subspace,
        semidirect: Option<SemidirectData>,
        seed: u64,
    ) -> Result<Self> {
        algebra.validate()?;
        rep.validate(algebra)?;
        algebra.validate_intermediate(nprime, levi)?;
        let semidirect = match semidirect {
            Some(s) => s,
            None => SemidirectData::new(algebra, algebra.solvable_radical()?, levi.clone())?,
        };
        let (b, l) = (&semidirect.b, &semidirect.l);
        if !nprime.is_subspace_of(b) {
            return Err(Error::NotBetweenRadicals("n' ⊄ b".into()));
        }
        if !algebra.bracket_spaces(l, b).is_subspace_of(nprime) {
            return Err(Error::InternalInconsistency("the reductive factor acts nontrivially on b/n'".into()));
        }
        let quotient = algebra.quotient(b, nprime)?;
        let bch = Bch::new(&quotient.algebra)?;
        let h = algebra.cartan_subalgebra(b, seed)?;
        if nprime.sum(&h) != *b {
            return Err(Error::InternalInconsistency("n' + h differs from b".into()));
        }
        let v = complement_v(&h, nprime);
        let q = quotient.dim();
        let cols: Vec<QVec> = v.basis().iter().map(|x| quotient.project(x).expect("v ⊆ b")).collect();
        if cols.len() != q {
            return Err(Error::InternalInconsistency("dim v differs from dim b/n'".into()));
        }
        let dtau_v_inv = if q == 0 {
            QMatrix::zeros(0, 0)
        } else {
            QMatrix::from_columns(q, &cols)
                .inverse()
                .ok_or_else(|| Error::InternalInconsistency("dτ restricted to v is singular".into()))?
        };
        let weights = f_basis_weights(&quotient.algebra)?;
        let to_f_coords = if q == 0 {
            QMatrix::zeros(0, 0)
        } else {
            QMatrix::from_columns(q, &weights.vectors).inverse().expect("basis")
        };
        Ok(Self {
            algebra: algebra.clone(),
            rep: rep.clone(),
            semidirect,
            nprime: nprime.clone(),
            h,
            v,
            quotient,
            bch,
            weights,
            to_f_coords,
            dtau_v_inv,
        })
    }

    /// Coordinates of a quotient vector in the 𝓕-basis.
    pub fn f_coords(&self, q: &[Gq]) -> QVec {
        if q.is_empty() {
            return Vec::new();
        }
        self.to_f_coords.mul_vec(q)
    }

    /// `log τ(b)` for the solvable part of `g`, from its word.
    pub fn log_tau(&self, word: &[QVec]) -> QVec {
        let ys: Vec<QVec> =
            word.iter().map(|x| self.quotient.project(&self.semidirect.split(x).0).expect("in b")).collect();
        self.bch.fold(&ys)
    }

    pub fn decompose(&self, g: &GroupElement) -> Result<TriDecomposition> {
        tri_decompose(g, self)
    }

    pub fn compose(&self, t: &TriDecomposition) -> GroupElement {
        tri_compose(t, self)
    }
}

/// `(η, ξ, l)` together with `log τ(b)` in quotient coordinates.
#[derive(Clone, Debug)]
pub struct TriDecomposition {
    pub eta: QVec,
    pub xi: QVec,
    pub l: GroupElement,
    pub log_tau: QVec,
    pub exact: bool,
}

impl Serialize for TriDecomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TriDecomposition", 3)?;
        st.serialize_field("eta", &self.eta.iter().map(ScalarJson::from).collect::<Vec<_>>())?;
        st.serialize_field("xi", &self.xi.iter().map(ScalarJson::from).collect::<Vec<_>>())?;
        st.serialize_field("l", &crate::io::matrix_pairs(&self.l.to_scaled().to_plain()))?;
        st.end()
    }
}

pub fn tri_decompose(g: &GroupElement, ctx: &DecompContext) -> Result<TriDecomposition> {
    let g = g.clone().with_recovered_word(&ctx.rep);
    let word = g.word.as_ref().ok_or(Error::ProjectionUnavailable)?;
    let rep = &ctx.rep;
    let l_word: Vec<QVec> = word.iter().map(|x| ctx.semidirect.split(x).1).filter(|x| !vec_is_zero(x)).collect();
    let l = GroupElement::from_word(rep, &l_word);
    let log_tau = ctx.log_tau(word);
    let xi =
        if log_tau.is_empty() { zero_vec(ctx.algebra.dim()) } else { ctx.v.combine(&ctx.dtau_v_inv.mul_vec(&log_tau)) };
    let m = g.mul(&l.inverse(rep)).mul(&GroupElement::exp(rep, &vec_neg(&xi)));
    if ctx.nprime.is_zero() {
        return Ok(TriDecomposition { eta: zero_vec(ctx.algebra.dim()), xi, l, log_tau, exact: m.is_exact() });
    }
    let (eta, exact) = match &m.mat {
        GMat::Exact(q) => {
            let lg = log_unipotent(q).map_err(|_| Error::EtaNotInNPrime(f64::INFINITY))?;
            let eta = rep.preimage_in(&lg, &ctx.nprime).ok_or(Error::EtaNotInNPrime(f64::INFINITY))?;
            (eta, true)
        }
        GMat::Float(s) => {
            let lg = log_unipotent_f64(&s.to_plain());
            let (c, res) = rep.float_preimage_in(&lg, &ctx.nprime);
            let rel = res * lg.norm() / lg.norm().max(1.0);
            if rel.is_nan() || rel > ETA_TOLERANCE {
                return Err(Error::EtaNotInNPrime(rel));
            }
            let coeffs: QVec = c.iter().map(|z| Gq::from_c64(*z)).collect();
            (ctx.nprime.combine(&coeffs), false)
        }
    };
    Ok(TriDecomposition { eta, xi, l, log_tau, exact })
}

/// `exp(η)·exp(ξ)·l`
pub fn tri_compose(t: &TriDecomposition, ctx: &DecompContext) -> GroupElement {
    GroupElement::exp(&ctx.rep, &t.eta).mul(&GroupElement::exp(&ctx.rep, &t.xi)).mul(&t.l)
}

/// `‖a − b‖ / ‖a‖` in Frobenius norm, computed in the scale of `a`.
pub fn relative_distance(a: &ScaledMatrix, b: &ScaledMatrix) -> f64 {
    let shift = (b.log_scale - a.log_scale).exp();
    let diff: CMat = &a.m - &b.m * num_complex::Complex64::new(shift, 0.0);
    diff.norm() / a.m.norm()
}
