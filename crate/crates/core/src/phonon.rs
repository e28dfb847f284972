//! Phonon-number statistics of the probe mode (mode 1) after the coupling.
//!
//! The reduced state of mode 1 is a zero-mean Gaussian with
//! `V1' - I/2 = [[a, b], [b, a]]` (after a phase rotation that makes `b`
//! real and nonnegative). Its number distribution has the generating
//! function
//!
//! ```text
//! Σ_k P(k) s^k = [(1 + (1-s) a)^2 - (1-s)^2 b^2]^(-1/2)
//! ```
//!
//! which gives the hypergeometric closed form
//! `P(k) = 2F1((k+1)/2, (k+2)/2; 1; (B/A)^2) / (A^(k+1) sqrt(a^2 - b^2))`
//! with `A = 1 + a/(a^2 - b^2)` and `B = b/(a^2 - b^2)`. The same generating
//! function factorizes into two half-integer negative binomial laws with
//! parameters `u = a - b` and `w = a + b`; their convolution is exact for
//! every physical `(a, b)`, including the region where the series diverges.

use rand::Rng;

use crate::error::{ensure_domain, Error, Result};
use crate::gaussian::ModeCovariance;

/// Default truncation of the phonon-number sum.
pub const DEFAULT_K_MAX: usize = 200;

/// Tail mass targeted by [`distribution_adaptive`].
pub const ADAPTIVE_TAIL: f64 = 1e-10;

/// Largest `(B/A)^2` for which the hypergeometric series is used.
pub const SERIES_Z_MAX: f64 = 0.9;

/// Relative stopping threshold of the series.
pub const SERIES_REL_TOL: f64 = 1e-14;

const SERIES_MAX_TERMS: usize = 1_000_000;

/// `a` and `b` of the reduced probe covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeCoefficients {
    a: f64,
    b: f64,
}

impl ProbeCoefficients {
    /// Requires `a >= 0`, `b >= 0` and the uncertainty relation
    /// `(a + 1/2)^2 - b^2 >= 1/4`.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        ensure_domain("a", a, a >= 0.0 && a.is_finite(), "finite, >= 0")?;
        ensure_domain("b", b, b >= 0.0 && b.is_finite(), "finite, >= 0")?;
        let excess = a * a + a - b * b;
        ensure_domain(
            "a^2 + a - b^2",
            excess,
            excess >= -1e-12 * (1.0 + a * a),
            ">= 0 (uncertainty relation)",
        )?;
        Ok(Self { a, b })
    }

    pub fn from_covariance(v: &ModeCovariance) -> Result<Self> {
        Self::new((v.n - 0.5).max(0.0), v.m.norm())
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `a^2 - b^2`. Negative for strongly squeezed, nearly pure states.
    pub fn det(&self) -> f64 {
        self.a * self.a - self.b * self.b
    }

    /// `(A, B)` of the hypergeometric form, defined when `a^2 > b^2`.
    pub fn hypergeometric_params(&self) -> Option<(f64, f64)> {
        let det = self.det();
        (det > 0.0).then(|| (1.0 + self.a / det, self.b / det))
    }

    /// `(B/A)^2 = b^2 / (a^2 + a - b^2)^2`, when defined.
    pub fn series_argument(&self) -> Option<f64> {
        self.hypergeometric_params().map(|(a, b)| (b / a).powi(2))
    }

    fn quadrature_params(&self) -> (f64, f64) {
        (self.a - self.b, self.a + self.b)
    }
}

/// Probe coefficients after mixing a thermal mode 1 (`nbar1`) with a
/// squeezed thermal mode 2 (`nbar2`, `r`) for angle `theta`:
///
/// ```text
/// a = nbar1 cos^2 θ + sin^2 θ [(nbar2 + 1/2) cosh 2r - 1/2]
/// b = (nbar2 + 1/2) sinh 2|r| sin^2 θ
/// ```
pub fn probe_coefficients(nbar1: f64, nbar2: f64, r: f64, theta: f64) -> Result<ProbeCoefficients> {
    ensure_domain("nbar1", nbar1, nbar1 >= 0.0 && nbar1.is_finite(), "finite, >= 0")?;
    ensure_domain("nbar2", nbar2, nbar2 >= 0.0 && nbar2.is_finite(), "finite, >= 0")?;
    let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
    let h = nbar2 + 0.5;
    let a = nbar1 * c2 + s2 * (h * (2.0 * r).cosh() - 0.5);
    let b = h * (2.0 * r.abs()).sinh() * s2;
    ProbeCoefficients::new(a.max(0.0), b)
}

/// Kahan-compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub(crate) fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

/// `2F1((k+1)/2, (k+2)/2; 1; z)` by its power series.
pub fn hypergeometric_series(k: usize, z: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::SeriesDivergence { z });
    }
    let (p, q) = ((k as f64 + 1.0) / 2.0, (k as f64 + 2.0) / 2.0);
    let mut term = 1.0;
    let mut acc = Compensated::default();
    acc.add(term);
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        let ratio = (p + nf) * (q + nf) / ((nf + 1.0) * (nf + 1.0)) * z;
        term *= ratio;
        acc.add(term);
        // once the ratio is below one the remaining tail is bounded by a
        // geometric series
        if ratio < 1.0 && term / (1.0 - ratio) <= SERIES_REL_TOL * acc.value() {
            return Ok(acc.value());
        }
    }
    Err(Error::SeriesDivergence { z })
}

/// Probability of `k` phonons in the probe.
///
/// Uses the hypergeometric series when `a^2 > b^2` and `(B/A)^2 <=`
/// [`SERIES_Z_MAX`]; otherwise the exact finite convolution.
pub fn prob_closed_form(coef: &ProbeCoefficients, k: usize) -> Result<f64> {
    match (coef.hypergeometric_params(), coef.series_argument()) {
        (Some(_), Some(z)) if z <= SERIES_Z_MAX => {
            let det = coef.det();
            let big_a_det = det + coef.a; // A · det
            let f = hypergeometric_series(k, z)?;
            // 1 / (A^(k+1) sqrt(det)) = (det / (A det))^(k+1) / sqrt(det)
            let ln_pref = (k as f64 + 1.0) * (det.ln() - big_a_det.ln()) - 0.5 * det.ln();
            Ok((ln_pref.exp() * f).clamp(0.0, 1.0))
        }
        _ => Ok(prob_convolution(coef, k)),
    }
}

/// Weights `g_x(j) = c_j (1+x)^(-1/2) (x/(1+x))^j` with
/// `c_j = (2j)! / (4^j (j!)^2)`, and their derivatives in `x`.
fn half_negative_binomial(x: f64, len: usize, with_grad: bool) -> (Vec<f64>, Vec<f64>) {
    let ratio = x / (1.0 + x);
    let mut g = Vec::with_capacity(len);
    let mut dg = Vec::with_capacity(if with_grad { len } else { 0 });
    let mut gj = (1.0 + x).powf(-0.5);
    // t_j = c_j x^(j-1) (1+x)^(-j-1/2), so d g_j / dx = j t_j - (j + 1/2) g_j / (1+x)
    let mut tj = 0.0;
    for j in 0..len {
        if j > 0 {
            let cj = (2 * j - 1) as f64 / (2 * j) as f64;
            gj *= cj * ratio;
            tj = if j == 1 {
                0.5 * (1.0 + x).powf(-1.5)
            } else {
                tj * cj * ratio
            };
        }
        g.push(gj);
        if with_grad {
            dg.push(j as f64 * tj - (j as f64 + 0.5) * gj / (1.0 + x));
        }
    }
    (g, dg)
}

fn convolve_at(f: &[f64], g: &[f64], k: usize) -> f64 {
    let mut acc = Compensated::default();
    for j in 0..=k {
        acc.add(f[j] * g[k - j]);
    }
    acc.value()
}

fn prob_convolution(coef: &ProbeCoefficients, k: usize) -> f64 {
    let (u, w) = coef.quadrature_params();
    let (gu, _) = half_negative_binomial(u, k + 1, false);
    let (gw, _) = half_negative_binomial(w, k + 1, false);
    convolve_at(&gu, &gw, k).clamp(0.0, 1.0)
}

/// Truncated phonon-number distribution `P(0..=k_max)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhononDistribution {
    pub probs: Vec<f64>,
    pub k_max: usize,
    /// `1 - Σ probs`, accurate to double precision in absolute terms.
    pub tail_mass: f64,
}

impl PhononDistribution {
    pub fn from_probs(probs: Vec<f64>) -> Self {
        let mut acc = Compensated::default();
        for &p in &probs {
            acc.add(p);
        }
        let k_max = probs.len().saturating_sub(1);
        Self {
            probs,
            k_max,
            tail_mass: 1.0 - acc.value(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }
}

/// Distribution together with `∂P/∂a` and `∂P/∂b`.
#[derive(Clone, Debug)]
pub struct DistributionGradient {
    pub dist: PhononDistribution,
    pub d_a: Vec<f64>,
    pub d_b: Vec<f64>,
}

fn convolution_tables(coef: &ProbeCoefficients, k_max: usize, with_grad: bool) -> DistributionGradient {
    let (u, w) = coef.quadrature_params();
    let len = k_max + 1;
    let (gu, dgu) = half_negative_binomial(u, len, with_grad);
    let (gw, dgw) = half_negative_binomial(w, len, with_grad);
    let probs = (0..len).map(|k| convolve_at(&gu, &gw, k).clamp(0.0, 1.0)).collect();
    let (mut d_a, mut d_b) = (Vec::new(), Vec::new());
    if with_grad {
        for k in 0..len {
            let du = convolve_at(&dgu, &gw, k);
            let dw = convolve_at(&gu, &dgw, k);
            d_a.push(du + dw);
            d_b.push(dw - du);
        }
    }
    DistributionGradient {
        dist: PhononDistribution::from_probs(probs),
        d_a,
        d_b,
    }
}

/// `P(0..=k_max)` with the remaining mass reported as `tail_mass`.
pub fn distribution(coef: &ProbeCoefficients, k_max: usize) -> Result<PhononDistribution> {
    ensure_domain("k_max", k_max as f64, k_max >= 1, ">= 1")?;
    Ok(convolution_tables(coef, k_max, false).dist)
}

/// Grows `k_max` from [`DEFAULT_K_MAX`] until the tail mass is below
/// [`ADAPTIVE_TAIL`].
pub fn distribution_adaptive(coef: &ProbeCoefficients) -> PhononDistribution {
    let mut k_max = DEFAULT_K_MAX;
    loop {
        let d = convolution_tables(coef, k_max, false).dist;
        if d.tail_mass < ADAPTIVE_TAIL || k_max >= 1 << 16 {
            return d;
        }
        k_max *= 2;
    }
}

/// Distribution and its gradient with respect to `(a, b)`.
pub fn distribution_with_gradient(coef: &ProbeCoefficients, k_max: usize) -> Result<DistributionGradient> {
    ensure_domain("k_max", k_max as f64, k_max >= 1, ">= 1")?;
    Ok(convolution_tables(coef, k_max, true))
}

/// Inverse-CDF sampler over a normalized distribution.
#[derive(Clone, Debug)]
pub struct Sampler {
    cdf: Vec<f64>,
}

/// Largest `|1 - Σ P|` accepted by [`Sampler::new`].
pub const SAMPLER_NORM_TOL: f64 = 1e-6;

impl Sampler {
    pub fn new(dist: &PhononDistribution) -> Result<Self> {
        if dist.tail_mass.abs() > SAMPLER_NORM_TOL {
            return Err(Error::Unnormalized {
                tail: dist.tail_mass,
            });
        }
        let mut acc = Compensated::default();
        let cdf = dist
            .probs
            .iter()
            .map(|&p| {
                acc.add(p);
                acc.value()
            })
            .collect();
        Ok(Self { cdf })
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let total = *self.cdf.last().unwrap_or(&1.0);
        // mass beyond the truncation is assigned to the last bin
        self.cdf
            .partition_point(|&c| c <= u * total.max(1.0))
            .min(self.cdf.len() - 1)
    }

    pub fn draw_n<R: Rng>(&self, count: usize, mut rng: R) -> Vec<usize> {
        (0..count).map(|_| self.draw(&mut rng)).collect()
    }
}

/// `count` independent draws, deterministic for a given `seed`.
pub fn sample(dist: &PhononDistribution, count: usize, seed: u64) -> Result<Vec<usize>> {
    use rand::SeedableRng;
    let sampler = Sampler::new(dist)?;
    Ok(sampler.draw_n(count, rand_chacha::ChaCha8Rng::seed_from_u64(seed)))
}
