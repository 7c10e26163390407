//! Matrix realizations of the group: representations, exact unipotent
//! exp/log, floating point exp/log with overflow-free scaling, spectral
//! norms and seeded sampling.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{QMatrix, Subspace};
use crate::scalar::{unit_vec, vec_neg, vec_scale, Gq, QVec};

pub type CMat = DMatrix<Complex64>;

/// Exact entries above this many bits push a product onto the float path.
pub const EXACT_BITS_BUDGET: u64 = 2048;

/// A representation `ρ: 𝔤 → 𝔤𝔩(d)` given on the basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Rep {
    degree: usize,
    mats: Vec<QMatrix>,
}

impl Rep {
    pub fn new(degree: usize, mats: Vec<QMatrix>) -> Result<Self> {
        for m in &mats {
            if m.nrows() != degree || m.ncols() != degree {
                return Err(Error::DimensionMismatch { expected: degree, got: m.nrows().max(m.ncols()) });
            }
        }
        Ok(Self { degree, mats })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.mats.len()
    }

    pub fn matrices(&self) -> &[QMatrix] {
        &self.mats
    }

    /// `ρ(x) = Σ xᵢ ρ(eᵢ)`
    pub fn image(&self, x: &[Gq]) -> QMatrix {
        let mut m = QMatrix::zeros(self.degree, self.degree);
        for (c, r) in x.iter().zip(&self.mats) {
            if !c.is_zero() {
                m.axpy(c, r);
            }
        }
        m
    }

    /// Exact check of `ρ([eᵢ,eⱼ]) = [ρeᵢ, ρeⱼ]` on basis pairs.
    pub fn validate(&self, a: &LieAlgebra) -> Result<()> {
        if self.dim() != a.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), got: self.dim() });
        }
        let n = a.dim();
        for i in 0..n {
            for j in i + 1..n {
                let lhs = self.image(&a.structure_constants()[i][j]);
                if lhs != self.mats[i].commutator(&self.mats[j]) {
                    return Err(Error::NotAHomomorphism { i, j });
                }
            }
        }
        Ok(())
    }

    fn stacked(&self) -> QMatrix {
        let cols: Vec<QVec> = self.mats.iter().map(QMatrix::vectorize).collect();
        QMatrix::from_columns(self.degree * self.degree, &cols)
    }

    pub fn is_faithful(&self) -> bool {
        self.stacked().rank() == self.dim()
    }

    /// The `x ∈ sub` with `ρ(x) = m`, if one exists.
    pub fn preimage_in(&self, m: &QMatrix, sub: &Subspace) -> Option<QVec> {
        let cols: Vec<QVec> = sub.basis().iter().map(|v| self.image(v).vectorize()).collect();
        if cols.is_empty() {
            return m.is_zero().then(|| crate::scalar::zero_vec(self.dim()));
        }
        let a = QMatrix::from_columns(self.degree * self.degree, &cols);
        let c = a.solve(&m.vectorize())?;
        Some(sub.combine(&c))
    }

    /// Least-squares coefficients of `m` on `ρ(sub)` and the relative residual.
    pub fn float_preimage_in(&self, m: &CMat, sub: &Subspace) -> (Vec<Complex64>, f64) {
        let d2 = self.degree * self.degree;
        let k = sub.dim();
        let scale = m.norm().max(f64::MIN_POSITIVE);
        if k == 0 {
            return (Vec::new(), m.norm() / scale);
        }
        let imgs: Vec<CMat> = sub.basis().iter().map(|v| self.image(v).to_c64()).collect();
        let a = CMat::from_fn(d2, k, |r, c| imgs[c][(r / self.degree, r % self.degree)]);
        let b = CMat::from_fn(d2, 1, |r, _| m[(r / self.degree, r % self.degree)]);
        let x = a.clone().svd(true, true).solve(&b, 1e-14).expect("svd solve");
        let res = (&a * &x - &b).norm() / scale;
        ((0..k).map(|i| x[(i, 0)]).collect(), res)
    }
}

/// `Σ_k x^k / k!`, exact; `x` must be nilpotent.
pub fn exp_nilpotent(x: &QMatrix) -> Result<QMatrix> {
    let idx = x.nilpotency_index().ok_or(Error::NotNilpotentMatrix)?;
    let n = x.nrows();
    let mut out = QMatrix::identity(n);
    let mut term = QMatrix::identity(n);
    for k in 1..idx {
        term = term.mul(x).scale(&Gq::ratio(1, k as i64));
        out = out.add(&term);
    }
    Ok(out)
}

/// Mercator series `Σ (−1)^{k+1} (g−I)^k / k`, exact; `g − I` must be nilpotent.
pub fn log_unipotent(g: &QMatrix) -> Result<QMatrix> {
    let n = g.nrows();
    let x = g.sub(&QMatrix::identity(n));
    let idx = x.nilpotency_index().ok_or(Error::NotUnipotent)?;
    let mut out = QMatrix::zeros(n, n);
    let mut p = QMatrix::identity(n);
    for k in 1..idx {
        p = p.mul(&x);
        let c = if k % 2 == 1 { Gq::ratio(1, k as i64) } else { Gq::ratio(-1, k as i64) };
        out.axpy(&c, &p);
    }
    Ok(out)
}

/// Float analogue of [`log_unipotent`] for numerically unipotent matrices.
pub fn log_unipotent_f64(g: &CMat) -> CMat {
    let n = g.nrows();
    let x = g - CMat::identity(n, n);
    let mut out = CMat::zeros(n, n);
    let mut p = CMat::identity(n, n);
    for k in 1..n.max(2) {
        p = &p * &x;
        let c = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
        out += &p * Complex64::new(c, 0.0);
    }
    out
}

/// `e^{log_scale} · m`, kept with `max|mᵢⱼ| = 1` so that huge or tiny
/// matrices stay representable.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledMatrix {
    pub log_scale: f64,
    pub m: CMat,
}

impl ScaledMatrix {
    pub fn new(m: CMat) -> Self {
        let mut s = Self { log_scale: 0.0, m };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let s = self.m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if s > 0.0 && s.is_finite() {
            self.m /= Complex64::new(s, 0.0);
            self.log_scale += s.ln();
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self { log_scale: self.log_scale + o.log_scale, m: &self.m * &o.m };
        r.normalize();
        r
    }

    /// The plain matrix; overflows to infinity when the scale is too large.
    pub fn to_plain(&self) -> CMat {
        &self.m * Complex64::new(self.log_scale.exp(), 0.0)
    }

    /// `log ‖·‖₂`
    pub fn log_norm(&self) -> f64 {
        self.log_scale + spectral_norm(&self.m).ln()
    }

    pub fn is_finite(&self) -> bool {
        self.log_scale.is_finite() && self.m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Matrix exponential by scaling and squaring, renormalizing after every
/// squaring so the result never overflows.
pub fn expm(a: &CMat) -> ScaledMatrix {
    let norm1 = (0..a.ncols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let s = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a * Complex64::new(2f64.powi(-s), 0.0);
    let mut e = ScaledMatrix::new(b.exp());
    for _ in 0..s {
        e = e.mul(&e);
    }
    e
}

/// Principal matrix logarithm by inverse scaling and squaring.
pub fn logm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let schur = nalgebra::Schur::new(a.clone());
    let (_, t) = schur.unpack();
    for i in 0..n {
        let l = t[(i, i)];
        if l.norm() == 0.0 || (l.im.abs() <= 1e-12 * l.norm() && l.re < 0.0) {
            return Err(Error::LogBranchFailure);
        }
    }
    let id = CMat::identity(n, n);
    let mut y = a.clone();
    let mut k = 0;
    while (&y - &id).norm() >= 0.25 {
        y = sqrtm_db(&y).ok_or(Error::LogBranchFailure)?;
        k += 1;
        if k > 64 {
            return Err(Error::LogBranchFailure);
        }
    }
    let x = &y - &id;
    let mut out = CMat::zeros(n, n);
    for (node, w) in gauss_legendre_01(10) {
        let m = &id + &x * Complex64::new(node, 0.0);
        let inv = m.try_inverse().ok_or(Error::LogBranchFailure)?;
        out += &x * inv * Complex64::new(w, 0.0);
    }
    Ok(out * Complex64::new(2f64.powi(k), 0.0))
}

/// Denman–Beavers iteration for the principal square root.
fn sqrtm_db(a: &CMat) -> Option<CMat> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = CMat::identity(n, n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse()?;
        let zi = z.clone().try_inverse()?;
        let y1 = (&y + zi) * Complex64::new(0.5, 0.0);
        let z1 = (&z + yi) * Complex64::new(0.5, 0.0);
        let delta = (&y1 - &y).norm();
        y = y1;
        z = z1;
        if delta <= 1e-15 * y.norm() {
            return Some(y);
        }
    }
    Some(y)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre_01(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 1..=m {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((x + 1.0) / 2.0, w / 2.0));
    }
    out
}

/// Largest singular value, by one-sided Jacobi (Hestenes) orthogonalization.
pub fn spectral_norm(m: &CMat) -> f64 {
    let mut a = if m.nrows() >= m.ncols() { m.clone() } else { m.adjoint() };
    let n = a.ncols();
    if n == 0 {
        return 0.0;
    }
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..a.nrows() {
                    let ap = a[(r, p)];
                    let aq = a[(r, q)] * phase.conj();
                    a[(r, p)] = ap * c - aq * s;
                    a[(r, q)] = ap * s + aq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (0..n).map(|j| a.column(j).norm()).fold(0.0, f64::max)
}

pub fn operator_norm(m: &CMat) -> f64 {
    spectral_norm(m)
}

/// A matrix that is exact while arithmetic allows and scaled float otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum GMat {
    Exact(QMatrix),
    Float(ScaledMatrix),
}

impl GMat {
    pub fn to_scaled(&self) -> ScaledMatrix {
        match self {
            GMat::Exact(q) => ScaledMatrix::new(q.to_c64()),
            GMat::Float(s) => s.clone(),
        }
    }

    fn mul(&self, o: &GMat) -> GMat {
        match (self, o) {
            (GMat::Exact(a), GMat::Exact(b)) => {
                let p = a.mul(b);
                if p.max_bits() > EXACT_BITS_BUDGET {
                    GMat::Float(ScaledMatrix::new(p.to_c64()))
                } else {
                    GMat::Exact(p)
                }
            }
            _ => GMat::Float(self.to_scaled().mul(&o.to_scaled())),
        }
    }
}

/// A group element `π(g)` together with a word `g = Π exp(Xⱼ)` when known.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub mat: GMat,
    pub word: Option<Vec<QVec>>,
}

impl GroupElement {
    pub fn identity(degree: usize) -> Self {
        Self { mat: GMat::Exact(QMatrix::identity(degree)), word: Some(Vec::new()) }
    }

    /// `exp(ρ(x))`, exact when `ρ(x)` is nilpotent.
    pub fn exp(rep: &Rep, x: &[Gq]) -> Self {
        Self { mat: exp_mat(rep, x), word: Some(vec![x.to_vec()]) }
    }

    pub fn from_word(rep: &Rep, word: &[QVec]) -> Self {
        let mut mat = GMat::Exact(QMatrix::identity(rep.degree()));
        for x in word {
            mat = mat.mul(&exp_mat(rep, x));
        }
        Self { mat, word: Some(word.to_vec()) }
    }

    /// An element known only by its matrix.
    pub fn from_matrix(mat: GMat) -> Self {
        Self { mat, word: None }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let word = match (&self.word, &o.word) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
            _ => None,
        };
        Self { mat: self.mat.mul(&o.mat), word }
    }

    pub fn inverse(&self, rep: &Rep) -> Self {
        if let Some(w) = &self.word {
            let inv: Vec<QVec> = w.iter().rev().map(|x| vec_neg(x)).collect();
            return Self::from_word(rep, &inv);
        }
        let mat = match &self.mat {
            GMat::Exact(q) => GMat::Exact(q.inverse().expect("group elements are invertible")),
            GMat::Float(s) => {
                let inv = s.m.clone().try_inverse().expect("group elements are invertible");
                let mut r = ScaledMatrix::new(inv);
                r.log_scale -= s.log_scale;
                GMat::Float(r)
            }
        };
        Self { mat, word: None }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.mat, GMat::Exact(_))
    }

    pub fn exact(&self) -> Option<&QMatrix> {
        match &self.mat {
            GMat::Exact(q) => Some(q),
            GMat::Float(_) => None,
        }
    }

    pub fn to_scaled(&self) -> ScaledMatrix {
        self.mat.to_scaled()
    }

    /// `log ‖π(g)‖₂`
    pub fn log_norm(&self) -> f64 {
        self.to_scaled().log_norm()
    }

    /// Rebuilds the matrix from the word so equal words give identical bits.
    pub fn canonical(&self, rep: &Rep) -> Self {
        match &self.word {
            Some(w) => Self::from_word(rep, w),
            None => self.clone(),
        }
    }

    /// Recovers a one-letter word from an exact unipotent matrix.
    pub fn with_recovered_word(mut self, rep: &Rep) -> Self {
        if self.word.is_none() {
            if let GMat::Exact(q) = &self.mat {
                if let Ok(l) = log_unipotent(q) {
                    if let Some(x) = rep.preimage_in(&l, &Subspace::full(rep.dim())) {
                        self.word = Some(vec![x]);
                    }
                }
            }
        }
        self
    }
}

pub fn exp_mat(rep: &Rep, x: &[Gq]) -> GMat {
    let m = rep.image(x);
    match exp_nilpotent(&m) {
        Ok(e) => GMat::Exact(e),
        Err(_) => GMat::Float(expm(&m.to_c64())),
    }
}

/// Seeded sampler of random words `Π exp(t·u·eᵢ)` with log-uniform `t` in
/// `[1, scale]`, a unit `u ∈ {±1}` (or `{±1, ±i}` when `complex_phases`), and
/// `t` rounded to a multiple of `2^-10` so unipotent products stay exact.
#[derive(Clone, Debug)]
pub struct Sampler {
    pub seed: u64,
    pub scale: f64,
    pub letters: usize,
    pub complex_phases: bool,
}

impl Sampler {
    pub fn new(seed: u64, scale: f64) -> Self {
        Self { seed, scale, letters: 3, complex_phases: false }
    }

    /// Independent stream for item `i`.
    pub fn rng(&self, i: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(i);
        r
    }

    pub fn log_uniform(&self, rng: &mut ChaCha8Rng, max: f64) -> Gq {
        let t = (rng.random::<f64>() * max.max(1.0).ln()).exp();
        Gq::dyadic(t, 10)
    }

    pub fn unit(&self, rng: &mut ChaCha8Rng) -> Gq {
        let k = if self.complex_phases { rng.random_range(0..4) } else { rng.random_range(0..2) };
        match k {
            0 => Gq::one(),
            1 => Gq::int(-1),
            2 => Gq::i(),
            _ => -Gq::i(),
        }
    }

    /// The word of item `i` over the given directions.
    pub fn word(&self, i: u64, directions: &[QVec]) -> Vec<QVec> {
        let mut rng = self.rng(i);
        (0..self.letters)
            .map(|_| {
                let d = &directions[rng.random_range(0..directions.len())];
                let t = self.log_uniform(&mut rng, self.scale);
                let u = self.unit(&mut rng);
                vec_scale(&(&t * &u), d)
            })
            .collect()
    }
}

/// `count` seeded products of exponentials of scaled basis directions.
pub fn sample_elements(a: &LieAlgebra, rep: &Rep, seed: u64, count: usize, scale: f64) -> Vec<GroupElement> {
    let s = Sampler::new(seed, scale);
    let dirs: Vec<QVec> = (0..a.dim()).map(|i| unit_vec(a.dim(), i)).collect();
    crate::par::map_range(count, |i| GroupElement::from_word(rep, &s.word(i as u64, &dirs)))
}
