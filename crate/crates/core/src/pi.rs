//! Nilpotency of `θ(𝔫)`, polynomial growth of `‖e^{θ(η)}‖`, and the
//! witness-functional lower bound for `ℓ_π^sym` along nilpotent directions.

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{exp_mat, spectral_norm, CMat, GroupElement, Rep, Sampler};
use crate::linalg::{QMatrix, Subspace};
use crate::scalar::{vec_scale, Gq, QVec};

/// Default RMS residual (in log units) below which growth counts as polynomial.
pub const POLY_THRESHOLD: f64 = 0.1;
/// Minimal number of decades a growth grid must span.
pub const MIN_DECADES: f64 = 4.0;

#[derive(Clone, Debug, Serialize)]
pub struct NilpotentImageReport {
    pub all_nilpotent: bool,
    /// Nilpotency index of `ρ(η)` per tested direction, `None` when not nilpotent.
    pub indices: Vec<Option<usize>>,
    pub max_index: usize,
}

/// Exact nilpotency of `ρ(η)` on the basis of `sub` and on `extra` seeded
/// integer combinations.
pub fn check_nilpotent_image(rep: &Rep, sub: &Subspace, seed: u64, extra: usize) -> NilpotentImageReport {
    let mut dirs: Vec<QVec> = sub.basis().to_vec();
    if !sub.is_zero() {
        let s = Sampler::new(seed, 1.0);
        for i in 0..extra {
            let mut rng = s.rng(i as u64);
            let c: QVec = (0..sub.dim()).map(|_| Gq::int(rng.random_range(-9..=9))).collect();
            dirs.push(sub.combine(&c));
        }
    }
    let indices: Vec<Option<usize>> = crate::par::map(&dirs, |v| rep.image(v).nilpotency_index());
    NilpotentImageReport {
        all_nilpotent: indices.iter().all(Option::is_some),
        max_index: indices.iter().flatten().copied().max().unwrap_or(0),
        indices,
    }
}

/// `log ‖e^{ρ(η)}‖ ≈ α·log(1 + t|η|) + log C` along `t ↦ tη`.
#[derive(Clone, Debug, Serialize)]
pub struct PolyFit {
    pub c: f64,
    pub alpha: f64,
    /// RMS residual of the fit, in log units.
    pub residual: f64,
    pub alpha_lower_half: f64,
    pub alpha_upper_half: f64,
    /// RMS residual over the upper half of the grid, which decides `polynomial`.
    pub residual_upper_half: f64,
    pub polynomial: bool,
}

/// Least squares `y ≈ a·x + b`; returns `(a, b, rms residual)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let b = my - a * mx;
    let rms = (x.iter().zip(y).map(|(u, v)| (v - a * u - b).powi(2)).sum::<f64>() / n).sqrt();
    (a, b, rms)
}

fn decades(tgrid: &[f64]) -> f64 {
    match (tgrid.first(), tgrid.last()) {
        (Some(a), Some(b)) if *a > 0.0 => (b / a).log10(),
        _ => 0.0,
    }
}

/// `|η| := ‖ρ(η)‖`, the norm on the ideal induced by a faithful representation.
pub fn rep_norm(rep: &Rep, eta: &[Gq]) -> f64 {
    spectral_norm(&rep.image(eta).to_c64())
}

pub fn poly_growth_fit(rep: &Rep, eta: &[Gq], tgrid: &[Gq]) -> Result<PolyFit> {
    poly_growth_fit_with(rep, eta, tgrid, POLY_THRESHOLD)
}

pub fn poly_growth_fit_with(rep: &Rep, eta: &[Gq], tgrid: &[Gq], threshold: f64) -> Result<PolyFit> {
    let ts: Vec<f64> = tgrid.iter().map(Gq::abs_f64).collect();
    let d = decades(&ts);
    if d < MIN_DECADES {
        return Err(Error::GridTooShort(d));
    }
    let norm = rep_norm(rep, eta);
    let ys: Vec<f64> = crate::par::map(tgrid, |t| exp_mat(rep, &vec_scale(t, eta)).to_scaled().log_norm());
    if let Some(bad) = ys.iter().position(|y| !y.is_finite()) {
        return Err(Error::OverflowAtScale(if bad == 0 { 0.0 } else { ts[bad - 1] }));
    }
    let xs: Vec<f64> = ts.iter().map(|t| (t * norm).ln_1p()).collect();
    let (alpha, b, residual) = linear_fit(&xs, &ys);
    let h = xs.len() / 2;
    let (alpha_lower_half, _, _) = linear_fit(&xs[..=h], &ys[..=h]);
    let (alpha_upper_half, _, residual_upper_half) = linear_fit(&xs[h..], &ys[h..]);
    let stable = (alpha_lower_half - alpha_upper_half).abs() <= 0.2 * alpha.abs().max(1.0);
    Ok(PolyFit {
        c: b.exp(),
        alpha,
        residual,
        alpha_lower_half,
        alpha_upper_half,
        residual_upper_half,
        polynomial: residual_upper_half < threshold && stable,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExdiVerdict {
    pub nilpotent: NilpotentImageReport,
    pub fits: Vec<PolyFit>,
    /// Nilpotent image and polynomial growth on every tested ray.
    pub consistent_with_pi: bool,
}

/// Combines the nilpotency check on `sub` with growth fits along its basis rays.
pub fn exdi_verdict(rep: &Rep, sub: &Subspace, tgrid: &[Gq], seed: u64) -> Result<ExdiVerdict> {
    let nilpotent = check_nilpotent_image(rep, sub, seed, 8);
    let fits = sub.basis().iter().map(|v| poly_growth_fit(rep, v, tgrid)).collect::<Result<Vec<_>>>()?;
    let consistent_with_pi = nilpotent.all_nilpotent && fits.iter().all(|f| f.polynomial);
    Ok(ExdiVerdict { nilpotent, fits, consistent_with_pi })
}

/// A functional `X ↦ Σ Fᵢⱼ Xᵢⱼ` with `⟨F,1⟩ = 0`, `⟨F,a⟩ = ‖a‖` and
/// `⟨F,a^k⟩ = 0` for `1 < k < m`, where `a^m = 0`.
#[derive(Clone, Debug)]
pub struct Witness {
    /// Least-norm exact solution for right-hand side `⟨F₁,a⟩ = 1`.
    pub unit: QMatrix,
    /// `‖a‖`; the witness is `F = ‖a‖·F₁`.
    pub scale: f64,
    /// Dual (nuclear) norm of `F`.
    pub norm: f64,
    pub index: usize,
}

impl Witness {
    pub fn matrix(&self) -> CMat {
        self.unit.to_c64() * Complex64::new(self.scale, 0.0)
    }

    pub fn pair(&self, x: &CMat) -> Complex64 {
        self.matrix().iter().zip(x.iter()).map(|(f, v)| f * v).sum()
    }
}

fn singular_values(m: &CMat) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

pub fn witness_functional(a: &QMatrix) -> Result<Witness> {
    if a.is_zero() {
        return Err(Error::ZeroInput);
    }
    let m = a.nilpotency_index().ok_or(Error::NotNilpotentMatrix)?;
    let d = a.nrows();
    // Constraint rows: vec(I), vec(a), vec(a²), …, vec(a^{m−1}).
    let mut rows = vec![QMatrix::identity(d).vectorize()];
    let mut p = QMatrix::identity(d);
    for _ in 1..m {
        p = p.mul(a);
        rows.push(p.vectorize());
    }
    let c = QMatrix::from_rows(&rows);
    let mut rhs = vec![Gq::zero(); rows.len()];
    rhs[1] = Gq::one();
    // Least-norm solution f = Cᴴ (C Cᴴ)⁻¹ rhs.
    let ch = c.conj_transpose();
    let gram = c.mul(&ch);
    let y = gram.solve(&rhs).ok_or_else(|| Error::InternalInconsistency("powers of a are dependent".into()))?;
    let f = ch.mul_vec(&y);
    let unit = QMatrix::from_fn(d, d, |i, j| f[i * d + j].clone());
    let scale = spectral_norm(&a.to_c64());
    let norm = scale * singular_values(&unit.to_c64()).iter().sum::<f64>();
    Ok(Witness { unit, scale, norm, index: m })
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundSample {
    pub t: f64,
    /// `log(1 + |η|)`
    pub lhs: f64,
    /// `ℓ_π^sym(exp η) + log(1 + ‖f‖)`
    pub rhs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectionCertificate {
    pub direction: Vec<crate::io::ScalarJson>,
    pub witness_norm: f64,
    pub min_margin: f64,
    pub fit: PolyFit,
    /// `c₁·log(1+|η|) − d₁ ≤ ℓ_π^sym(exp η) ≤ c₂·log(1+|η|) + d₂` on the ray.
    pub c1: f64,
    pub d1: f64,
    pub c2: f64,
    pub d2: f64,
    pub certified: bool,
    pub samples: Vec<LowerBoundSample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    pub directions: Vec<DirectionCertificate>,
    pub all_certified: bool,
}

/// Checks `log(1+|η|) ≤ ℓ_π^sym(exp η) + log(1+‖f‖)` along `t·η` for each
/// direction, and pairs it with a polynomial upper bound.
pub fn lower_bound_check(rep: &Rep, nprime: &Subspace, directions: &[QVec], tgrid: &[Gq]) -> Result<LowerBoundReport> {
    let mut out = Vec::new();
    for dir in directions {
        if !nprime.contains(dir) {
            return Err(Error::NotBetweenRadicals("direction outside the ideal".into()));
        }
        let w = witness_functional(&rep.image(dir))?;
        let slack = w.norm.ln_1p();
        let samples: Vec<(LowerBoundSample, f64)> = crate::par::map(tgrid, |t| {
            let eta = vec_scale(t, dir);
            let g = GroupElement::exp(rep, &eta);
            let sym = g.log_norm() + GroupElement::exp(rep, &crate::scalar::vec_neg(&eta)).log_norm();
            let lhs = rep_norm(rep, &eta).ln_1p();
            (LowerBoundSample { t: t.abs_f64(), lhs, rhs: sym + slack }, sym)
        });
        let min_margin = samples.iter().map(|(s, _)| s.rhs - s.lhs).fold(f64::INFINITY, f64::min);
        let fit = poly_growth_fit(rep, dir, tgrid)?;
        // ℓ^sym adds the growth of e^{ρη} and e^{−ρη}, both of exponent α.
        let c2 = 2.0 * fit.alpha.max(0.0) + 0.1;
        let d2 = samples.iter().map(|(s, sym)| sym - c2 * s.lhs).fold(f64::NEG_INFINITY, f64::max).max(0.0);
        let certified = min_margin >= -1e-10 && fit.polynomial && d2.is_finite();
        out.push(DirectionCertificate {
            direction: crate::io::vec_json(dir),
            witness_norm: w.norm,
            min_margin,
            fit,
            c1: 1.0,
            d1: slack,
            c2,
            d2,
            certified,
            samples: samples.into_iter().map(|(s, _)| s).collect(),
        });
    }
    let all_certified = out.iter().all(|d| d.certified);
    Ok(LowerBoundReport { directions: out, all_certified })
}

/// Pairs a witness with `e^a` through the exact series `Σ a^k/k!`.
pub fn witness_on_exp(w: &Witness, a: &QMatrix) -> Complex64 {
    let e = crate::group::exp_nilpotent(a).expect("nilpotent");
    w.pair(&e.to_c64())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e13() -> QMatrix {
        let mut a = QMatrix::zeros(3, 3);
        a[(0, 2)] = Gq::one();
        a
    }

    #[test]
    fn witness_for_e13() {
        let a = e13();
        let w = witness_functional(&a).unwrap();
        assert_eq!(w.index, 2);
        let id = CMat::identity(3, 3);
        assert!(w.pair(&id).norm() < 1e-15);
        assert!((w.pair(&a.to_c64()) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((witness_on_exp(&w, &a) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(matches!(witness_functional(&QMatrix::zeros(2, 2)), Err(Error::ZeroInput)));
    }

    #[test]
    fn linear_fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (a, b, r) = linear_fit(&x, &y);
        assert!((a - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12 && r < 1e-12);
    }
}
