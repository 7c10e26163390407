//! Empirical distortion: ray profiles, model classification, scale-stratified
//! domination fits, the separation order and the maximality suite.
//!
//! Every verdict here is a statement about a finite seeded sample; reports
//! say so and record the thresholds that produced them.

use rand::Rng;
use serde::Serialize;

use crate::decomposition::DecompContext;
use crate::error::{Error, Result};
use crate::group::{GroupElement, Rep, Sampler};
use crate::io::{vec_json, ScalarJson};
use crate::length::LengthFunction;
use crate::linalg::Subspace;
use crate::pi::linear_fit;
use crate::scalar::{vec_scale, Gq, QVec};

pub const DEFAULT_TMAX: f64 = 1e6;
pub const DEFAULT_GRID_POINTS: usize = 33;
/// Largest normalized residual `√(1−R²)` a model may have and still win.
pub const CLASSIFY_THRESHOLD: f64 = 0.05;
/// Domination fails when the per-level constant grows by more than this
/// factor between the middle and the top of the scale range.
pub const GROWTH_THRESHOLD: f64 = 1.5;
/// Denominators below this are raised to it when forming ratios.
pub const RATIO_FLOOR: f64 = 1.0;

pub const SAMPLED_FIT_NOTE: &str =
    "equivalence and domination are certified only as fits on the seeded sample, not as quasi-isometry";

/// `points` log-spaced values on `[1, tmax]`, rounded to multiples of `2^-10`.
pub fn tgrid(points: usize, tmax: f64) -> Vec<Gq> {
    let points = points.max(2);
    (0..points).map(|i| Gq::dyadic(tmax.powf(i as f64 / (points - 1) as f64), 10)).collect()
}

pub fn default_tgrid() -> Vec<Gq> {
    tgrid(DEFAULT_GRID_POINTS, DEFAULT_TMAX)
}

#[derive(Clone, Debug, Serialize)]
pub struct RayProfile {
    pub direction: Vec<ScalarJson>,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl RayProfile {
    pub fn from_values(t: Vec<f64>, values: Vec<f64>) -> Self {
        Self { direction: Vec::new(), t, values }
    }

    /// `t,value,log1p,sqrt,linear` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,value,log1p_t,sqrt_t,t_linear\n");
        for (t, v) in self.t.iter().zip(&self.values) {
            s.push_str(&format!("{t},{v},{},{},{t}\n", t.ln_1p(), t.sqrt()));
        }
        s
    }
}

/// `t ↦ ℓ(exp(tη))` on the grid.
pub fn ray_profile(l: &LengthFunction, rep: &Rep, eta: &[Gq], grid: &[Gq]) -> Result<RayProfile> {
    let values = crate::par::map(grid, |t| l.eval(&GroupElement::exp(rep, &vec_scale(t, eta))));
    let t: Vec<f64> = grid.iter().map(Gq::abs_f64).collect();
    let mut out = Vec::with_capacity(values.len());
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        if !v.is_finite() {
            return Err(Error::OverflowAtScale(if i == 0 { 0.0 } else { t[i - 1] }));
        }
        out.push(v);
    }
    Ok(RayProfile { direction: vec_json(eta), t, values: out })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    Logarithmic,
    /// Best candidate exponent `p` and the free-exponent fit.
    Power {
        p: f64,
        fitted: f64,
    },
    Other,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub residual_log: f64,
    /// `(p, residual)` per candidate power.
    pub residual_power: Vec<(f64, f64)>,
    /// Exponent minimizing the power-model residual over `(0, 1.5]`.
    pub fitted_exponent: f64,
    pub fitted_residual: f64,
    pub threshold: f64,
}

/// `√(1 − R²)` of the affine fit `y ≈ a·f + b`.
fn model_residual(f: &[f64], y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let sst: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sst <= f64::EPSILON * my.abs().max(1.0) * n {
        return 0.0;
    }
    let (a, b, rms) = linear_fit(f, y);
    if a < 0.0 {
        return 1.0;
    }
    let _ = b;
    ((rms * rms * n) / sst).sqrt().min(1.0)
}

fn power_residual(t: &[f64], y: &[f64], p: f64) -> f64 {
    let f: Vec<f64> = t.iter().map(|x| x.powf(p)).collect();
    model_residual(&f, y)
}

/// Minimizer of a unimodal function on `[a, b]`.
fn golden_section(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if (b - a).abs() < 1e-7 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Log model against powers `1/w`, `w = 1, …, max(2, max_weight)`.
pub fn classify_distortion(p: &RayProfile, max_weight: u32) -> Classification {
    classify_with(p, max_weight, CLASSIFY_THRESHOLD)
}

pub fn classify_with(p: &RayProfile, max_weight: u32, threshold: f64) -> Classification {
    let logf: Vec<f64> = p.t.iter().map(|t| t.ln_1p()).collect();
    let residual_log = model_residual(&logf, &p.values);
    let residual_power: Vec<(f64, f64)> =
        (1..=max_weight.max(2)).map(|w| 1.0 / w as f64).map(|q| (q, power_residual(&p.t, &p.values, q))).collect();
    let fitted_exponent = golden_section(0.01, 1.5, |q| power_residual(&p.t, &p.values, q));
    let fitted_residual = power_residual(&p.t, &p.values, fitted_exponent);
    let (best_p, best_r) =
        residual_power.iter().copied().fold((f64::NAN, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let verdict = if residual_log <= best_r && residual_log <= threshold {
        Verdict::Logarithmic
    } else if best_r <= threshold {
        Verdict::Power { p: best_p, fitted: fitted_exponent }
    } else {
        Verdict::Other
    };
    Classification { verdict, residual_log, residual_power, fitted_exponent, fitted_residual, threshold }
}

/// Group elements grouped by scale level.
#[derive(Clone, Debug)]
pub struct LevelSamples {
    pub levels: Vec<(f64, Vec<GroupElement>)>,
}

impl LevelSamples {
    pub fn len(&self) -> usize {
        self.levels.iter().map(|(_, v)| v.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Scale-stratified sampler: at each level `s` the rays `exp(±s·d)` for the
/// given directions, plus random words whose largest letter has size
/// `s^{log word_max / log ray_max}`.
#[derive(Clone, Debug)]
pub struct LevelSampler {
    pub seed: u64,
    pub ray_max: f64,
    pub word_max: f64,
    pub levels: usize,
    pub words_per_level: usize,
    pub letters: usize,
    pub complex_phases: bool,
    pub directions: Vec<QVec>,
}

impl LevelSampler {
    pub fn new(seed: u64, ray_max: f64, directions: Vec<QVec>) -> Self {
        Self {
            seed,
            ray_max,
            word_max: ray_max,
            levels: 13,
            words_per_level: 8,
            letters: 3,
            complex_phases: false,
            directions,
        }
    }

    pub fn scales(&self) -> Vec<f64> {
        (0..self.levels).map(|k| self.ray_max.powf(k as f64 / (self.levels - 1).max(1) as f64)).collect()
    }

    pub fn sample(&self, rep: &Rep) -> LevelSamples {
        let exponent = if self.ray_max > 1.0 { self.word_max.max(1.0).ln() / self.ray_max.ln() } else { 1.0 };
        let base = Sampler { seed: self.seed, scale: 1.0, letters: self.letters, complex_phases: self.complex_phases };
        let units: Vec<Gq> = if self.complex_phases {
            vec![Gq::int(1), Gq::int(-1), Gq::i(), -Gq::i()]
        } else {
            vec![Gq::int(1), Gq::int(-1)]
        };
        let levels = self
            .scales()
            .into_iter()
            .enumerate()
            .map(|(k, s)| {
                let sq = Gq::dyadic(s, 10);
                let mut words: Vec<Vec<QVec>> = Vec::new();
                for d in &self.directions {
                    for u in &units {
                        words.push(vec![vec_scale(&(&sq * u), d)]);
                    }
                }
                let cap = s.powf(exponent);
                for j in 0..self.words_per_level {
                    let mut rng = base.rng((k * 1_000 + j) as u64);
                    let big = rng.random_range(0..self.letters);
                    let w: Vec<QVec> = (0..self.letters)
                        .map(|i| {
                            let d = &self.directions[rng.random_range(0..self.directions.len())];
                            let t = if i == big { Gq::dyadic(cap, 10) } else { base.log_uniform(&mut rng, cap) };
                            let u = base.unit(&mut rng);
                            vec_scale(&(&t * &u), d)
                        })
                        .collect();
                    words.push(w);
                }
                let elems = crate::par::map(&words, |w| GroupElement::from_word(rep, w));
                (s, elems)
            })
            .collect();
        LevelSamples { levels }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Domination {
    /// `la ≲ lb` on the sample.
    pub holds: bool,
    pub c: f64,
    pub d: f64,
    /// Ratio of the top-level constant to the mid-level constant.
    pub growth: f64,
    /// Slope of `log C_k` against `log s` over the upper half of the levels.
    pub slope: f64,
    pub level_constants: Vec<(f64, f64)>,
    pub growth_threshold: f64,
    pub ratio_floor: f64,
    pub samples: usize,
}

/// `(scale, [(a(g), b(g))])` per level.
pub type LevelValues = Vec<(f64, Vec<(f64, f64)>)>;

/// Values of two length functions on every sample, level by level.
pub fn evaluate_pair(la: &LengthFunction, lb: &LengthFunction, samples: &LevelSamples) -> Result<LevelValues> {
    samples
        .levels
        .iter()
        .map(|(s, elems)| {
            let vals = crate::par::map(elems, |g| Ok::<_, Error>((la.eval(g)?, lb.eval(g)?)));
            Ok((*s, vals.into_iter().collect::<Result<Vec<_>>>()?))
        })
        .collect()
}

/// Fits `la ≤ C·lb + D`: per-level constants `C_k = max la/max(lb, 1)`,
/// failure when `C_k` keeps growing across the upper levels.
pub fn dominates(la: &LengthFunction, lb: &LengthFunction, samples: &LevelSamples) -> Result<Domination> {
    Ok(domination_from_values(&evaluate_pair(la, lb, samples)?))
}

pub fn domination_from_values(vals: &[(f64, Vec<(f64, f64)>)]) -> Domination {
    let level_constants: Vec<(f64, f64)> =
        vals.iter().map(|(s, v)| (*s, v.iter().map(|(a, b)| a / b.max(RATIO_FLOOR)).fold(0.0, f64::max))).collect();
    let l = level_constants.len();
    let half = l / 2;
    let cs: Vec<f64> = level_constants.iter().map(|x| x.1).collect();
    let top = cs[l.saturating_sub(3)..].iter().copied().fold(0.0, f64::max);
    let mid = cs[half.saturating_sub(1)..(half + 2).min(l)].iter().copied().fold(0.0, f64::max);
    let growth = if top <= 0.1 { 1.0 } else { top / mid.max(0.1) };
    let xs: Vec<f64> = level_constants[half..].iter().map(|x| x.0.max(1.0).ln()).collect();
    let ys: Vec<f64> = level_constants[half..].iter().map(|x| x.1.max(1e-12).ln()).collect();
    let slope = if xs.len() >= 2 { linear_fit(&xs, &ys).0 } else { 0.0 };
    let holds = growth <= GROWTH_THRESHOLD;
    let c = cs[half..].iter().copied().fold(0.0, f64::max);
    let d = vals.iter().flat_map(|(_, v)| v.iter()).map(|(a, b)| a - c * b).fold(0.0, f64::max);
    Domination {
        holds,
        c,
        d,
        growth,
        slope,
        level_constants,
        growth_threshold: GROWTH_THRESHOLD,
        ratio_floor: RATIO_FLOOR,
        samples: vals.iter().map(|(_, v)| v.len()).sum(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Equivalence {
    pub forward: Domination,
    pub backward: Domination,
    pub holds: bool,
}

pub fn equivalent(la: &LengthFunction, lb: &LengthFunction, samples: &LevelSamples) -> Result<Equivalence> {
    let vals = evaluate_pair(la, lb, samples)?;
    let swapped: Vec<(f64, Vec<(f64, f64)>)> =
        vals.iter().map(|(s, v)| (*s, v.iter().map(|(a, b)| (*b, *a)).collect())).collect();
    let forward = domination_from_values(&vals);
    let backward = domination_from_values(&swapped);
    let holds = forward.holds && backward.holds;
    Ok(Equivalence { forward, backward, holds })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub n1_dim: usize,
    pub n2_dim: usize,
    pub contained: bool,
    /// `φ₂ ≲ φ₁` on the shared sample (expected when `𝔫₁ ⊆ 𝔫₂`).
    pub domination: Option<Domination>,
    pub witness: Option<Vec<ScalarJson>>,
    pub witness_in_n1: Option<bool>,
    pub weight: Option<u32>,
    pub phi1_on_witness: Option<Classification>,
    pub phi2_on_witness: Option<Classification>,
    /// `φ₂ ≲ φ₁` along the witness ray (expected to fail).
    pub witness_domination: Option<Domination>,
    pub passed: bool,
}

/// A direction of `𝔫₁ ∖ 𝔫₂` inside `𝔳₂`: from `𝔫₁ ∩ 𝔳₂` when possible,
/// otherwise the `𝔳₂`-component of a vector of `𝔫₁ ∖ 𝔫₂` along `𝔫₂`.
pub fn separation_witness(ctx2: &DecompContext, n1: &Subspace) -> Result<QVec> {
    let n2 = &ctx2.nprime;
    let inter = n1.intersect(&ctx2.v);
    if let Some(v) = inter.basis().first() {
        return Ok(v.clone());
    }
    let eta = n1
        .basis()
        .iter()
        .find(|v| !n2.contains(v))
        .ok_or_else(|| Error::WitnessConstructionFailed("n1 ⊆ n2, no witness exists".into()))?;
    let b = n2.sum(&ctx2.v);
    if !b.contains(eta) {
        return Err(Error::WitnessConstructionFailed(format!(
            "n2 + v2 has dim {} and does not contain the candidate",
            b.dim()
        )));
    }
    let mut cols = ctx2.v.basis().to_vec();
    cols.extend(n2.basis().iter().cloned());
    let m = crate::linalg::QMatrix::from_columns(eta.len(), &cols);
    let c = m.solve(eta).ok_or_else(|| Error::WitnessConstructionFailed("split along n2 failed".into()))?;
    Ok(ctx2.v.combine(&c[..ctx2.v.dim()]))
}

/// Smallest 𝓕-weight among the nonzero coordinates of `τ₂(η)`.
pub fn witness_weight(ctx2: &DecompContext, eta: &[Gq]) -> Option<u32> {
    let q = ctx2.quotient.project(eta)?;
    let t = ctx2.f_coords(&q);
    t.iter().zip(&ctx2.weights.weights).filter(|(x, _)| !num_traits::Zero::is_zero(*x)).map(|(_, w)| *w).min()
}

#[allow(clippy::too_many_arguments)]
pub fn separation_test(
    ctx1: &DecompContext,
    ctx2: &DecompContext,
    phi1: &LengthFunction,
    phi2: &LengthFunction,
    samples: &LevelSamples,
    grid: &[Gq],
    seed: u64,
) -> Result<SeparationReport> {
    let (n1, n2) = (&ctx1.nprime, &ctx2.nprime);
    let contained = n1.is_subspace_of(n2);
    let mut r = SeparationReport {
        n1_dim: n1.dim(),
        n2_dim: n2.dim(),
        contained,
        domination: None,
        witness: None,
        witness_in_n1: None,
        weight: None,
        phi1_on_witness: None,
        phi2_on_witness: None,
        witness_domination: None,
        passed: false,
    };
    if contained {
        let d = dominates(phi2, phi1, samples)?;
        r.passed = d.holds;
        r.domination = Some(d);
        return Ok(r);
    }
    let eta = separation_witness(ctx2, n1)?;
    let w = witness_weight(ctx2, &eta)
        .ok_or_else(|| Error::WitnessConstructionFailed("witness projects to zero".into()))?;
    let maxw = ctx2
        .weights
        .weights
        .iter()
        .copied()
        .max()
        .unwrap_or(1)
        .max(ctx1.weights.weights.iter().copied().max().unwrap_or(1));
    let c1 = classify_distortion(&ray_profile(phi1, &ctx1.rep, &eta, grid)?, maxw);
    let c2 = classify_distortion(&ray_profile(phi2, &ctx2.rep, &eta, grid)?, maxw);
    // t^{1/w} needs w/2 times the decades of t^{1/2} to outgrow log(1+t) equally clearly.
    let tmax = grid.last().map_or(DEFAULT_TMAX, Gq::abs_f64).powf((w as f64 / 2.0).max(1.0));
    let mut ray = LevelSampler::new(seed, tmax, vec![eta.clone()]);
    ray.words_per_level = 0;
    let wd = dominates(phi2, phi1, &ray.sample(&ctx2.rep))?;
    let p2_ok = matches!(c2.verdict, Verdict::Power { p, fitted } if (p - 1.0 / w as f64).abs() < 1e-12 && (fitted - 1.0 / w as f64).abs() <= 0.05);
    r.passed = p2_ok && c1.verdict == Verdict::Logarithmic && !wd.holds;
    r.witness_in_n1 = Some(n1.contains(&eta));
    r.witness = Some(vec_json(&eta));
    r.weight = Some(w);
    r.phi1_on_witness = Some(c1);
    r.phi2_on_witness = Some(c2);
    r.witness_domination = Some(wd);
    Ok(r)
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub provenance: crate::length::Provenance,
    /// Classification along each ray of `𝔫′`.
    pub ray_verdicts: Vec<Verdict>,
    pub admitted: bool,
    pub domination: Option<Domination>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MaximalityReport {
    pub entries: Vec<CatalogEntry>,
    pub all_dominated: bool,
    pub note: &'static str,
}

/// Every catalog member that is exponentially distorted on `𝔫′` (logarithmic
/// on all its rays) must be dominated by `φ`.
pub fn maximality_suite(
    phi: &LengthFunction,
    catalog: &[LengthFunction],
    rep: &Rep,
    nprime_rays: &[QVec],
    grid: &[Gq],
    samples: &LevelSamples,
    max_weight: u32,
) -> Result<MaximalityReport> {
    let mut entries = Vec::new();
    for l in catalog {
        let ray_verdicts = nprime_rays
            .iter()
            .map(|d| Ok(classify_distortion(&ray_profile(l, rep, d, grid)?, max_weight).verdict))
            .collect::<Result<Vec<_>>>()?;
        let admitted = ray_verdicts.iter().all(|v| *v == Verdict::Logarithmic);
        let domination = if admitted { Some(dominates(l, phi, samples)?) } else { None };
        entries.push(CatalogEntry {
            name: l.name(),
            provenance: l.provenance.clone(),
            ray_verdicts,
            admitted,
            domination,
        });
    }
    let all_dominated = entries.iter().filter(|e| e.admitted).all(|e| e.domination.as_ref().is_some_and(|d| d.holds));
    Ok(MaximalityReport { entries, all_dominated, note: SAMPLED_FIT_NOTE })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_f64() -> Vec<f64> {
        default_tgrid().iter().map(Gq::abs_f64).collect()
    }

    #[test]
    fn grid_shape() {
        let g = grid_f64();
        assert_eq!(g.len(), 33);
        assert_eq!(g[0], 1.0);
        assert!((g[32] - 1e6).abs() < 1e-3);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn synthetic_profiles() {
        let t = grid_f64();
        let log = RayProfile::from_values(t.clone(), t.iter().map(|x| x.ln_1p()).collect());
        assert_eq!(classify_distortion(&log, 4).verdict, Verdict::Logarithmic);
        let sq = RayProfile::from_values(t.clone(), t.iter().map(|x| x.sqrt()).collect());
        match classify_distortion(&sq, 4).verdict {
            Verdict::Power { p, fitted } => assert!(p == 0.5 && (fitted - 0.5).abs() < 0.02),
            v => panic!("{v:?}"),
        }
        let zero = RayProfile::from_values(t.clone(), vec![0.0; t.len()]);
        assert_eq!(classify_distortion(&zero, 4).verdict, Verdict::Logarithmic);
        let exp = RayProfile::from_values(t.clone(), t.iter().map(|x| (x / 1e5).exp()).collect());
        assert_eq!(classify_distortion(&exp, 4).verdict, Verdict::Other);
    }

    #[test]
    fn domination_of_synthetic_levels() {
        let scales: Vec<f64> = (0..13).map(|k| 1e6f64.powf(k as f64 / 12.0)).collect();
        let same: Vec<(f64, Vec<(f64, f64)>)> =
            scales.iter().map(|s| (*s, vec![(s.ln_1p() + 1.0, s.ln_1p() + 1.0)])).collect();
        let d = domination_from_values(&same);
        assert!(d.holds && (d.c - 1.0).abs() < 1e-12 && d.d == 0.0);
        let power_vs_log: Vec<(f64, Vec<(f64, f64)>)> =
            scales.iter().map(|s| (*s, vec![(s.sqrt(), s.ln_1p())])).collect();
        assert!(!domination_from_values(&power_vs_log).holds);
        let log_vs_zero: Vec<(f64, Vec<(f64, f64)>)> = scales.iter().map(|s| (*s, vec![(s.ln_1p(), 0.0)])).collect();
        assert!(!domination_from_values(&log_vs_zero).holds);
    }
}
