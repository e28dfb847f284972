//! Temperature estimation from probe phonon statistics: Planck occupations,
//! the classical Fisher matrix over `(T1, T2)` and Cramér–Rao bounds.

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, HBAR};
use crate::error::{ensure_domain, Error, Result};
use crate::phonon::{distribution_with_gradient, probe_coefficients, ProbeCoefficients, DEFAULT_K_MAX};

/// Default trap frequency, 4 MHz read as an angular frequency.
pub const DEFAULT_OMEGA: f64 = 4e6;

/// Probabilities below this are left out of the Fisher sums.
pub const MIN_PROB: f64 = 1e-30;

/// Largest tail mass accepted by [`fisher_matrix`].
pub const MAX_TAIL: f64 = 1e-6;

/// How a frequency given in hertz-like units is turned into rad/s.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaConvention {
    /// The number already is the angular frequency.
    #[default]
    Angular,
    /// The number is an ordinary frequency; multiply by 2π.
    Ordinary,
}

impl OmegaConvention {
    pub fn to_angular(self, omega: f64) -> f64 {
        match self {
            OmegaConvention::Angular => omega,
            OmegaConvention::Ordinary => 2.0 * std::f64::consts::PI * omega,
        }
    }
}

fn reduced_energy(t: f64, omega: f64) -> Result<f64> {
    ensure_domain("t", t, t > 0.0 && t.is_finite(), "finite, > 0")?;
    ensure_domain("omega", omega, omega > 0.0 && omega.is_finite(), "finite, > 0")?;
    Ok(HBAR * omega / (BOLTZMANN * t))
}

/// Planck occupation `1 / (exp(ħΩ/k_B T) - 1)`.
pub fn occupation_from_temperature(t: f64, omega: f64) -> Result<f64> {
    let x = reduced_energy(t, omega)?;
    Ok(1.0 / x.exp_m1())
}

/// `dn̄/dT`.
pub fn occupation_temperature_derivative(t: f64, omega: f64) -> Result<f64> {
    let x = reduced_energy(t, omega)?;
    // x e^x / (e^x - 1)^2 = (x/2)^2 / sinh^2(x/2) / x, stable for large x
    let s = (0.5 * x).sinh();
    if !s.is_finite() {
        return Ok(0.0);
    }
    Ok(x / (4.0 * s * s) / t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    /// rad/s
    pub omega: f64,
    /// K
    pub t1: f64,
    /// K
    pub t2: f64,
    pub r: f64,
    pub theta: f64,
    pub k_max: usize,
}

impl Default for TrapConfig {
    fn default() -> Self {
        Self {
            omega: DEFAULT_OMEGA,
            t1: 2.8e-5,
            t2: 2.08e-5,
            r: 0.0,
            theta: std::f64::consts::FRAC_PI_4,
            k_max: DEFAULT_K_MAX,
        }
    }
}

impl TrapConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| ensure_domain(name, v, v.is_finite(), "finite");
        ensure_domain("omega", self.omega, self.omega > 0.0 && self.omega.is_finite(), "finite, > 0")?;
        ensure_domain("t1", self.t1, self.t1 > 0.0 && self.t1.is_finite(), "finite, > 0")?;
        ensure_domain("t2", self.t2, self.t2 > 0.0 && self.t2.is_finite(), "finite, > 0")?;
        finite("r", self.r)?;
        finite("theta", self.theta)?;
        ensure_domain("k_max", self.k_max as f64, self.k_max >= 1, ">= 1")
    }

    pub fn nbar1(&self) -> Result<f64> {
        occupation_from_temperature(self.t1, self.omega)
    }

    pub fn nbar2(&self) -> Result<f64> {
        occupation_from_temperature(self.t2, self.omega)
    }

    pub fn coefficients(&self) -> Result<ProbeCoefficients> {
        self.validate()?;
        probe_coefficients(self.nbar1()?, self.nbar2()?, self.r, self.theta)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FisherMatrix {
    pub f11: f64,
    pub f22: f64,
    pub f12: f64,
}

impl FisherMatrix {
    pub fn det(&self) -> f64 {
        self.f11 * self.f22 - self.f12 * self.f12
    }

    /// Element `(i, j)` with 0-based indices.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 0) => self.f11,
            (1, 1) => self.f22,
            _ => self.f12,
        }
    }
}

/// `P(k)` and its temperature derivatives `∂P/∂T1`, `∂P/∂T2`.
#[derive(Clone, Debug)]
pub struct ProbabilityGradient {
    pub probs: Vec<f64>,
    pub tail_mass: f64,
    pub d_t1: Vec<f64>,
    pub d_t2: Vec<f64>,
}

pub fn probability_gradient(cfg: &TrapConfig) -> Result<ProbabilityGradient> {
    let coef = cfg.coefficients()?;
    let g = distribution_with_gradient(&coef, cfg.k_max)?;
    let dn1 = occupation_temperature_derivative(cfg.t1, cfg.omega)?;
    let dn2 = occupation_temperature_derivative(cfg.t2, cfg.omega)?;
    let (c2, s2) = (cfg.theta.cos().powi(2), cfg.theta.sin().powi(2));
    // chain rule through a(n̄1, n̄2) and b(n̄2)
    let da_dn1 = c2;
    let da_dn2 = s2 * (2.0 * cfg.r).cosh();
    let db_dn2 = s2 * (2.0 * cfg.r.abs()).sinh();
    let d_t1 = g.d_a.iter().map(|&pa| pa * da_dn1 * dn1).collect();
    let d_t2 = g
        .d_a
        .iter()
        .zip(&g.d_b)
        .map(|(&pa, &pb)| (pa * da_dn2 + pb * db_dn2) * dn2)
        .collect();
    Ok(ProbabilityGradient {
        probs: g.dist.probs,
        tail_mass: g.dist.tail_mass,
        d_t1,
        d_t2,
    })
}

impl ProbabilityGradient {
    /// `Σ_k ∂_α P ∂_β P / P` over `P(k) >= MIN_PROB`.
    pub fn fisher(&self) -> FisherMatrix {
        let mut f = FisherMatrix::default();
        for k in 0..self.probs.len() {
            let p = self.probs[k];
            if p < MIN_PROB {
                continue;
            }
            let (g1, g2) = (self.d_t1[k], self.d_t2[k]);
            f.f11 += g1 * g1 / p;
            f.f22 += g2 * g2 / p;
            f.f12 += g1 * g2 / p;
        }
        f
    }
}

/// Fisher matrix of the probe phonon-number measurement over `(T1, T2)`.
pub fn fisher_matrix(cfg: &TrapConfig) -> Result<FisherMatrix> {
    let g = probability_gradient(cfg)?;
    if g.tail_mass > MAX_TAIL {
        return Err(Error::Truncation {
            what: "phonon distribution",
            deficit: g.tail_mass,
            advice: "increase k_max",
        });
    }
    Ok(g.fisher())
}

/// Element-wise Cramér–Rao bounds in two conventions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CramerRao {
    /// `1 / sqrt(F_ii)`
    pub inverse_sqrt: [f64; 2],
    /// `1 / F_ii`, the usual single-parameter variance bound per sample.
    pub inverse: [f64; 2],
}

/// Zero information yields an infinite bound.
pub fn cramer_rao(f: &FisherMatrix) -> CramerRao {
    let inv = |x: f64| if x > 0.0 { 1.0 / x } else { f64::INFINITY };
    let isq = |x: f64| if x > 0.0 { 1.0 / x.sqrt() } else { f64::INFINITY };
    CramerRao {
        inverse_sqrt: [isq(f.f11), isq(f.f22)],
        inverse: [inv(f.f11), inv(f.f22)],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Theta,
    T2,
}

/// One Fisher matrix per grid value, in grid order.
pub fn fisher_sweep(template: &TrapConfig, axis: SweepAxis, grid: &[f64]) -> Result<Vec<FisherMatrix>> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    grid.iter()
        .map(|&x| {
            let mut cfg = *template;
            match axis {
                SweepAxis::Theta => cfg.theta = x,
                SweepAxis::T2 => cfg.t2 = x,
            }
            fisher_matrix(&cfg)
        })
        .collect()
}
