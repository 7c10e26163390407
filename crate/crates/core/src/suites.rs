//! Named verification suites over a fixture, each returning a report of
//! individual checks.

use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::decomposition::{
    relative_distance, tri_compose, tri_decompose, DecompContext, SemidirectData, ETA_TOLERANCE,
};
use crate::distortion::{
    classify_with, dominates, equivalent, maximality_suite, ray_profile, separation_test, tgrid, LevelSampler, Verdict,
    CLASSIFY_THRESHOLD, DEFAULT_GRID_POINTS, DEFAULT_TMAX, GROWTH_THRESHOLD, SAMPLED_FIT_NOTE,
};
use crate::error::{Error, Result};
use crate::fixtures::Fixture;
use crate::group::{sample_elements, GroupElement};
use crate::length::{
    ellprime_build, length_compose_f, length_pi, length_pi_sym, length_pullback, phi_build, quotient_word_proxy,
    word_proxy, LengthFunction, Vetted,
};
use crate::linalg::Subspace;
use crate::pi::{check_nilpotent_image, exdi_verdict, lower_bound_check, POLY_THRESHOLD};
use crate::scalar::{unit_vec, Gq, QVec};

pub const DEFAULT_SEED: u64 = 20_240_601;
/// Largest scale used on groups whose representation is not unipotent, where
/// products lose relative precision like `e^{-2s}`.
pub const NON_UNIPOTENT_SCALE: f64 = 16.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Pi,
    Distortion,
    Maximality,
    Separation,
    Decomposition,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::Pi, Suite::Distortion, Suite::Maximality, Suite::Separation, Suite::Decomposition];

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "pi" => Suite::Pi,
            "distortion" => Suite::Distortion,
            "maximality" => Suite::Maximality,
            "separation" => Suite::Separation,
            "decomposition" => Suite::Decomposition,
            _ => {
                return Err(Error::Config(format!(
                    "unknown suite {s:?}; expected pi, distortion, maximality, separation or decomposition"
                )))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Pi => "pi",
            Suite::Distortion => "distortion",
            Suite::Maximality => "maximality",
            Suite::Separation => "separation",
            Suite::Decomposition => "decomposition",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub tmax: f64,
    pub grid_points: usize,
    /// Residual threshold of the distortion classifier.
    pub threshold: f64,
    pub samples: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            tmax: DEFAULT_TMAX,
            grid_points: DEFAULT_GRID_POINTS,
            threshold: CLASSIFY_THRESHOLD,
            samples: 200,
        }
    }
}

impl SuiteConfig {
    pub fn grid(&self) -> Vec<Gq> {
        tgrid(self.grid_points, self.tmax)
    }

    /// Scale range appropriate for the fixture.
    pub fn scale_for(&self, f: &Fixture) -> f64 {
        if f.is_unipotent() {
            self.tmax
        } else {
            self.tmax.min(NON_UNIPOTENT_SCALE)
        }
    }

    pub fn thresholds(&self) -> Value {
        json!({
            "classify_residual": self.threshold,
            "domination_growth": GROWTH_THRESHOLD,
            "polynomial_residual": POLY_THRESHOLD,
            "eta_tolerance": ETA_TOLERANCE,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: Value) -> Self {
        Self { name: name.into(), passed, detail }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub fixture: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub note: &'static str,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

/// Decomposition context for a named ideal, using the fixture's declared
/// semidirect split when it has one.
pub fn context(f: &Fixture, nprime: &Subspace, seed: u64) -> Result<Arc<DecompContext>> {
    let rep = f.rep()?;
    let sd = match &f.semidirect {
        Some((b, l)) => Some(SemidirectData::new(&f.algebra, b.clone(), l.clone())?),
        None => None,
    };
    Ok(Arc::new(DecompContext::new(&f.algebra, rep, &f.levi, nprime, sd, seed)?))
}

/// The fixture's `N` when declared, otherwise the computed nilpotent radical.
pub fn default_nprime(f: &Fixture) -> Result<Subspace> {
    match f.subgroups.get("N") {
        Some(n) => Ok(n.clone()),
        None => f.algebra.nilpotent_radical(),
    }
}

fn basis_directions(n: usize) -> Vec<QVec> {
    (0..n).map(|i| unit_vec(n, i)).collect()
}

/// Directions of the level sampler: the basis of `𝔤`.
pub fn level_sampler(f: &Fixture, cfg: &SuiteConfig) -> LevelSampler {
    let mut s = LevelSampler::new(cfg.seed, cfg.scale_for(f), basis_directions(f.dim()));
    if !f.is_unipotent() {
        s.word_max = s.ray_max;
    }
    s
}

fn max_weight(ctx: &DecompContext) -> u32 {
    ctx.weights.weights.iter().copied().max().unwrap_or(1).max(f_dim_bound(ctx.algebra.dim()))
}

fn f_dim_bound(n: usize) -> u32 {
    (n.saturating_sub(1)).max(2) as u32
}

pub fn run(suite: Suite, f: &Fixture, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Pi => pi_suite(f, cfg)?,
        Suite::Distortion => distortion_suite(f, cfg)?,
        Suite::Maximality => maximality_checks(f, cfg)?,
        Suite::Separation => separation_suite(f, cfg)?,
        Suite::Decomposition => decomposition_suite(f, cfg)?,
    };
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { suite, fixture: f.name.clone(), passed, checks, note: SAMPLED_FIT_NOTE })
}

fn decomposition_suite(f: &Fixture, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let rep = f.rep()?;
    let scale = if f.is_unipotent() { 1e3 } else { 4.0 };
    let elems = sample_elements(&f.algebra, rep, cfg.seed, cfg.samples, scale);
    let mut checks = Vec::new();
    for (name, n) in &f.subgroups {
        let ctx = match context(f, n, cfg.seed) {
            Ok(c) => c,
            Err(e) => {
                checks.push(Check::new(format!("context {name}"), false, json!({ "error": e.to_string() })));
                continue;
            }
        };
        let results = crate::par::map(&elems, |g| -> Result<(f64, bool)> {
            let t = tri_decompose(g, &ctx)?;
            let back = tri_compose(&t, &ctx);
            let member = !t.exact || ctx.nprime.contains(&t.eta);
            Ok((relative_distance(&g.to_scaled(), &back.to_scaled()), member))
        });
        let mut worst = 0.0f64;
        let mut members = true;
        let mut error = None;
        for r in results {
            match r {
                Ok((d, m)) => {
                    worst = worst.max(d);
                    members &= m;
                }
                Err(e) => error = Some(e.to_string()),
            }
        }
        let passed = error.is_none() && worst <= 1e-9 && members;
        checks.push(Check::new(
            format!("round trip with n' = {name}"),
            passed,
            json!({ "samples": elems.len(), "max_relative_error": worst, "eta_in_nprime": members, "error": error }),
        ));
    }
    Ok(checks)
}

fn pi_suite(f: &Fixture, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let rep = f.rep()?;
    let n = f.algebra.nilpotent_radical()?;
    let grid = cfg.grid();
    let mut checks = Vec::new();
    let nil = check_nilpotent_image(rep, &n, cfg.seed, 8);
    checks.push(Check::new("nilpotent image on n", nil.all_nilpotent, to_value(&nil)));
    let ex = exdi_verdict(rep, &n, &grid, cfg.seed)?;
    checks.push(Check::new("consistent with PI", ex.consistent_with_pi, to_value(&ex)));
    let nprime = default_nprime(f)?;
    if !nprime.is_zero() {
        let lb = lower_bound_check(rep, &nprime, nprime.basis(), &grid)?;
        checks.push(Check::new("strict distortion certificate on n'", lb.all_certified, to_value(&lb)));
    }
    Ok(checks)
}

fn distortion_suite(f: &Fixture, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let nprime = default_nprime(f)?;
    let ctx = context(f, &nprime, cfg.seed)?;
    let phi = phi_build(ctx.clone());
    let grid = tgrid(cfg.grid_points, cfg.scale_for(f));
    let mw = max_weight(&ctx);
    let mut checks = Vec::new();
    let dirs = basis_directions(f.dim());
    let verdicts = crate::par::map(&dirs, |d| -> Result<_> {
        Ok(classify_with(&ray_profile(&phi, &ctx.rep, d, &grid)?, mw, cfg.threshold))
    });
    let mut per_dir = Vec::new();
    for (i, v) in verdicts.into_iter().enumerate() {
        let v = v?;
        if nprime.contains(&dirs[i]) {
            checks.push(Check::new(
                format!("phi logarithmic along {}", f.algebra.names()[i]),
                v.verdict == Verdict::Logarithmic,
                to_value(&v),
            ));
        }
        per_dir.push(json!({ "direction": f.algebra.names()[i], "classification": v }));
    }
    checks.push(Check::new("phi ray verdicts", true, Value::Array(per_dir)));
    if f.rep.is_some() && f.faithful != Some(false) {
        let sym = length_pi_sym(&ctx.rep);
        for v in nprime.basis() {
            let c = classify_with(&ray_profile(&sym, &ctx.rep, v, &grid)?, mw, cfg.threshold);
            checks.push(Check::new("pi-sym logarithmic on an n' ray", c.verdict == Verdict::Logarithmic, to_value(&c)));
        }
    }
    Ok(checks)
}

/// `ℓ_π`, `ℓ_π^sym`, `ℓ′`, the pulled-back quotient proxy, and on nilpotent
/// groups the word proxy and its `log1p`.
pub fn catalog(f: &Fixture, ctx: &Arc<DecompContext>) -> Result<Vec<LengthFunction>> {
    let rep = &ctx.rep;
    let mut c = vec![
        LengthFunction::zero(),
        length_pi(rep),
        length_pi_sym(rep),
        ellprime_build(ctx.clone())?,
        length_pullback(quotient_word_proxy(ctx.clone()), "word-proxy", ctx.clone()),
    ];
    if f.algebra.is_nilpotent() {
        let wp = word_proxy(&f.algebra, rep)?;
        c.push(length_compose_f(&wp, Vetted::Log1p));
        c.push(wp);
    }
    Ok(c)
}

fn maximality_checks(f: &Fixture, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let nprime = default_nprime(f)?;
    let ctx = context(f, &nprime, cfg.seed)?;
    let phi = phi_build(ctx.clone());
    let cat = catalog(f, &ctx)?;
    let samples = level_sampler(f, cfg).sample(&ctx.rep);
    let grid = tgrid(cfg.grid_points, cfg.scale_for(f));
    let rep = maximality_suite(&phi, &cat, &ctx.rep, nprime.basis(), &grid, &samples, max_weight(&ctx))?;
    let mut checks = vec![Check::new("admitted members dominated by phi", rep.all_dominated, to_value(&rep))];
    let ell = ellprime_build(ctx.clone())?;
    let eq = equivalent(&ell, &phi, &samples)?;
    checks.push(Check::new("ellprime equivalent to phi", eq.holds, to_value(&eq)));
    Ok(checks)
}

fn separation_suite(f: &Fixture, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut ideals: Vec<(String, Subspace)> = Vec::new();
    for (name, n) in &f.subgroups {
        if f.algebra.validate_intermediate(n, &f.levi).is_ok() && !ideals.iter().any(|(_, m)| m == n) {
            ideals.push((name.clone(), n.clone()));
        }
    }
    let ctxs: Vec<Arc<DecompContext>> = ideals.iter().map(|(_, n)| context(f, n, cfg.seed)).collect::<Result<_>>()?;
    let phis: Vec<LengthFunction> = ctxs.iter().map(|c| phi_build(c.clone())).collect();
    let samples = level_sampler(f, cfg).sample(f.rep()?);
    // Witness rays lie in 𝔫, which acts unipotently, so they take the full range.
    let grid = cfg.grid();
    let mut checks = Vec::new();
    for i in 0..ideals.len() {
        for j in 0..ideals.len() {
            let name = format!("{} vs {}", ideals[i].0, ideals[j].0);
            match separation_test(&ctxs[i], &ctxs[j], &phis[i], &phis[j], &samples, &grid, cfg.seed) {
                Ok(r) => checks.push(Check::new(name, r.passed, to_value(&r))),
                Err(e) => checks.push(Check::new(name, false, json!({ "error": e.to_string() }))),
            }
        }
    }
    Ok(checks)
}

/// `φ` along `t·dir` on the grid, for the CLI.
pub fn phi_values(ctx: &DecompContext, phi: &LengthFunction, point: &[Gq]) -> Result<f64> {
    phi.eval(&GroupElement::exp(&ctx.rep, point))
}

/// Fitted `la ≲ lb` on the fixture's level sample.
pub fn fitted_domination(
    f: &Fixture,
    cfg: &SuiteConfig,
    la: &LengthFunction,
    lb: &LengthFunction,
) -> Result<crate::distortion::Domination> {
    dominates(la, lb, &level_sampler(f, cfg).sample(f.rep()?))
}
