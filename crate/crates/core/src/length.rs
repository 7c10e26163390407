//! Length functions as evaluable handles with a serializable provenance tree.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{f_basis_weights, LieAlgebra};
use crate::decomposition::{Bch, DecompContext};
use crate::error::{Error, Result};
use crate::group::{GroupElement, Rep};
use crate::linalg::QMatrix;
use crate::scalar::{vec_norm_f64, Gq, QVec};

type Eval = Arc<dyn Fn(&GroupElement) -> Result<f64> + Send + Sync>;

/// How a length function was built.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub op: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Provenance>,
}

impl Provenance {
    pub fn leaf(op: &str, detail: Option<String>) -> Self {
        Self { op: op.into(), detail, children: Vec::new() }
    }

    fn node(op: &str, detail: Option<String>, children: Vec<Provenance>) -> Self {
        Self { op: op.into(), detail, children }
    }
}

#[derive(Clone)]
pub struct LengthFunction {
    eval: Eval,
    pub provenance: Provenance,
    pub symmetric: bool,
    /// `ℓ(gh) ≤ ℓ(g) + ℓ(h)` holds up to rounding, not only up to constants.
    pub subadditive: bool,
}

impl fmt::Debug for LengthFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LengthFunction")
            .field("provenance", &self.provenance)
            .field("symmetric", &self.symmetric)
            .field("subadditive", &self.subadditive)
            .finish()
    }
}

impl LengthFunction {
    pub fn new(
        provenance: Provenance,
        symmetric: bool,
        subadditive: bool,
        f: impl Fn(&GroupElement) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { eval: Arc::new(f), provenance, symmetric, subadditive }
    }

    pub fn eval(&self, g: &GroupElement) -> Result<f64> {
        (self.eval)(g)
    }

    pub fn name(&self) -> String {
        self.provenance.op.clone()
    }

    pub fn zero() -> Self {
        Self::new(Provenance::leaf("zero", None), true, true, |_| Ok(0.0))
    }

    pub fn with_name(mut self, op: &str) -> Self {
        self.provenance = Provenance::node(op, None, vec![self.provenance]);
        self
    }
}

/// `max_k |t_k|^{1/w_k}`
pub fn word_length_nilpotent(t: &[f64], w: &[u32]) -> f64 {
    assert_eq!(t.len(), w.len());
    t.iter().zip(w).map(|(x, &wk)| x.abs().powf(1.0 / wk as f64)).fold(0.0, f64::max)
}

/// `log ‖π(g)‖`
pub fn length_pi(_rep: &Rep) -> LengthFunction {
    LengthFunction::new(Provenance::leaf("log-norm", None), false, true, |g| Ok(g.log_norm()))
}

/// `log ‖π(g)‖ + log ‖π(g⁻¹)‖`
pub fn length_pi_sym(rep: &Rep) -> LengthFunction {
    symmetrize(&length_pi(rep), rep).with_name("log-norm-sym")
}

/// Subadditive increasing functions with `f(0) = 0` that preserve domination.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "param", rename_all = "kebab-case")]
pub enum Vetted {
    Identity,
    Log1p,
    Power(f64),
    Min(f64),
}

impl Vetted {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::UnvettedFunction(s.to_string());
        match s {
            "identity" => return Ok(Self::Identity),
            "log1p" => return Ok(Self::Log1p),
            _ => {}
        }
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let v: f64 = arg.parse().map_err(|_| bad())?;
        match kind {
            "pow" if v > 0.0 && v <= 1.0 => Ok(Self::Power(v)),
            "min" if v > 0.0 => Ok(Self::Min(v)),
            _ => Err(bad()),
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        match self {
            Self::Identity => x,
            Self::Log1p => x.ln_1p(),
            Self::Power(a) => x.powf(*a),
            Self::Min(c) => x.min(*c),
        }
    }
}

/// `f ∘ ℓ`
pub fn length_compose_f(l: &LengthFunction, f: Vetted) -> LengthFunction {
    let inner = l.clone();
    LengthFunction::new(
        Provenance::node("compose", Some(format!("{f:?}")), vec![l.provenance.clone()]),
        l.symmetric,
        l.subadditive,
        move |g| Ok(f.apply(inner.eval(g)?)),
    )
}

pub fn length_sum(a: &LengthFunction, b: &LengthFunction) -> LengthFunction {
    let (x, y) = (a.clone(), b.clone());
    LengthFunction::new(
        Provenance::node("sum", None, vec![a.provenance.clone(), b.provenance.clone()]),
        a.symmetric && b.symmetric,
        a.subadditive && b.subadditive,
        move |g| Ok(x.eval(g)? + y.eval(g)?),
    )
}

pub fn length_max(a: &LengthFunction, b: &LengthFunction) -> LengthFunction {
    let (x, y) = (a.clone(), b.clone());
    LengthFunction::new(
        Provenance::node("max", None, vec![a.provenance.clone(), b.provenance.clone()]),
        a.symmetric && b.symmetric,
        a.subadditive && b.subadditive,
        move |g| Ok(x.eval(g)?.max(y.eval(g)?)),
    )
}

/// `ℓ(g) + ℓ(g⁻¹)`, evaluated on the canonical form of `g` so that
/// `ℓ^sym(g) = ℓ^sym(g⁻¹)` holds bit for bit.
pub fn symmetrize(l: &LengthFunction, rep: &Rep) -> LengthFunction {
    let inner = l.clone();
    let rep = rep.clone();
    LengthFunction::new(
        Provenance::node("symmetrize", None, vec![l.provenance.clone()]),
        true,
        l.subadditive,
        move |g| {
            let g = g.canonical(&rep);
            Ok(inner.eval(&g)? + inner.eval(&g.inverse(&rep))?)
        },
    )
}

/// A length function on `G/N′ ≅ B/N′ × L`, given the 𝓕-coordinates of
/// `log τ(b)` and the reductive factor `l`.
pub type QuotientLength = Arc<dyn Fn(&[f64], &GroupElement) -> f64 + Send + Sync>;

/// `ℓ ∘ σ` for the quotient map `σ: G → G/N′`, realized by the decomposition.
pub fn length_pullback(ql: QuotientLength, name: &str, ctx: Arc<DecompContext>) -> LengthFunction {
    LengthFunction::new(
        Provenance::node(
            "pullback",
            Some(format!("quotient by an ideal of dim {}", ctx.nprime.dim())),
            vec![Provenance::leaf(name, None)],
        ),
        false,
        false,
        move |g| {
            let word = g.clone().with_recovered_word(&ctx.rep).word.ok_or(Error::ProjectionUnavailable)?;
            let t = f_coords_f64(&ctx, &ctx.log_tau(&word));
            let l_word: Vec<QVec> = word.iter().map(|x| ctx.semidirect.split(x).1).collect();
            let l = GroupElement::from_word(&ctx.rep, &l_word);
            Ok(ql(&t, &l))
        },
    )
}

fn f_coords_f64(ctx: &DecompContext, q: &[Gq]) -> Vec<f64> {
    ctx.f_coords(q).iter().map(Gq::abs_f64).collect()
}

/// `log ‖ρ(l)‖ + log ‖ρ(l⁻¹)‖`, the stand-in for a word length on `L`.
pub fn reductive_proxy(l: &GroupElement, rep: &Rep) -> f64 {
    if l.word.as_ref().is_some_and(Vec::is_empty) {
        return 0.0;
    }
    l.log_norm() + l.inverse(rep).log_norm()
}

/// The word-length stand-in `ℓ₁(τ b) + ℓ₂(l)` on `G/N′`.
pub fn quotient_word_proxy(ctx: Arc<DecompContext>) -> QuotientLength {
    let w = ctx.weights.weights.clone();
    let rep = ctx.rep.clone();
    Arc::new(move |t: &[f64], l: &GroupElement| word_length_nilpotent(t, &w) + reductive_proxy(l, &rep))
}

/// `φ(g) = log(1 + |η|) + ℓ₁(τ exp ξ) + ℓ₂(l)`
pub fn phi_build(ctx: Arc<DecompContext>) -> LengthFunction {
    let detail = format!("n' of dim {}, weights {:?}", ctx.nprime.dim(), ctx.weights.weights);
    LengthFunction::new(Provenance::leaf("phi", Some(detail)), false, false, move |g| {
        let t = ctx.decompose(g)?;
        let eta = vec_norm_f64(&t.eta).ln_1p();
        let l1 = word_length_nilpotent(&f_coords_f64(&ctx, &t.log_tau), &ctx.weights.weights);
        Ok(eta + l1 + reductive_proxy(&t.l, &ctx.rep))
    })
}

/// `ℓ′ = ℓ̃σ + ℓ_π^sym`
pub fn ellprime_build(ctx: Arc<DecompContext>) -> Result<LengthFunction> {
    if !ctx.rep.is_faithful() {
        return Err(Error::NotFaithful);
    }
    let pulled = length_pullback(quotient_word_proxy(ctx.clone()), "word-proxy", ctx.clone());
    Ok(length_sum(&pulled, &length_pi_sym(&ctx.rep)).with_name("ellprime"))
}

/// Exponential coordinates of elements of a nilpotent group in an 𝓕-basis.
#[derive(Clone, Debug)]
pub struct NilpotentChart {
    bch: Bch,
    rep: Rep,
    pub weights: Vec<u32>,
    to_f: QMatrix,
}

impl NilpotentChart {
    pub fn new(a: &LieAlgebra, rep: &Rep) -> Result<Self> {
        let wb = f_basis_weights(a)?;
        let to_f = QMatrix::from_columns(a.dim(), &wb.vectors).inverse().expect("basis");
        Ok(Self { bch: Bch::new(a)?, rep: rep.clone(), weights: wb.weights, to_f })
    }

    /// `log g` in the fixture basis.
    pub fn log(&self, g: &GroupElement) -> Result<QVec> {
        let g = g.clone().with_recovered_word(&self.rep);
        let w = g.word.ok_or(Error::ProjectionUnavailable)?;
        Ok(self.bch.fold(&w))
    }

    pub fn f_coords(&self, g: &GroupElement) -> Result<Vec<f64>> {
        Ok(self.to_f.mul_vec(&self.log(g)?).iter().map(Gq::abs_f64).collect())
    }
}

/// `max_k |t_k|^{1/w_k}` on exponential coordinates of a nilpotent group.
pub fn word_proxy(a: &LieAlgebra, rep: &Rep) -> Result<LengthFunction> {
    let chart = NilpotentChart::new(a, rep)?;
    Ok(LengthFunction::new(
        Provenance::leaf("word-proxy", Some(format!("weights {:?}", chart.weights))),
        true,
        false,
        move |g| Ok(word_length_nilpotent(&chart.f_coords(g)?, &chart.weights)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scalar::{unit_vec, vec_scale};

    #[test]
    fn nilpotent_word_length() {
        assert_eq!(word_length_nilpotent(&[0.0, 0.0], &[1, 2]), 0.0);
        assert_eq!(word_length_nilpotent(&[3.0, -100.0], &[1, 2]), 10.0);
    }

    #[test]
    fn vetted_parsing() {
        assert_eq!(Vetted::parse("pow:0.5").unwrap(), Vetted::Power(0.5));
        assert!(matches!(Vetted::parse("pow:2"), Err(Error::UnvettedFunction(_))));
        assert!(matches!(Vetted::parse("exp"), Err(Error::UnvettedFunction(_))));
    }

    #[test]
    fn centre_norm_is_analytic() {
        let f = fixtures::heisenberg3();
        let rep = f.rep.unwrap();
        let lp = length_pi(&rep);
        for c in [1.0f64, 37.5, 1e6] {
            let g = GroupElement::exp(&rep, &vec_scale(&Gq::from_f64(c), &unit_vec(3, 2)));
            let want = ((c + (c * c + 4.0).sqrt()) / 2.0).ln();
            assert!((lp.eval(&g).unwrap() - want).abs() < 1e-12);
        }
        assert_eq!(lp.eval(&GroupElement::identity(3)).unwrap(), 0.0);
    }

    #[test]
    fn phi_on_filiform_formula() {
        let f = fixtures::filiform(5);
        let rep = f.rep.clone().unwrap();
        let ctx = Arc::new(DecompContext::new(&f.algebra, &rep, &f.levi, &f.subgroups["H3"], None, 3).unwrap());
        let phi = phi_build(ctx);
        let t = Gq::int(10_000);
        // e2 lies outside H3 and has weight 2 in the quotient.
        let g = GroupElement::exp(&rep, &vec_scale(&t, &unit_vec(5, 2)));
        assert!((phi.eval(&g).unwrap() - 100.0).abs() < 1e-9);
        let g = GroupElement::exp(&rep, &vec_scale(&t, &unit_vec(5, 4)));
        assert!((phi.eval(&g).unwrap() - 10_001f64.ln()).abs() < 1e-9);
        assert_eq!(phi.eval(&GroupElement::identity(5)).unwrap(), 0.0);
    }
}
