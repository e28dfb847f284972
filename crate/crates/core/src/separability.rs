//! Scalar physicality and separability bounds for two-mode Gaussian states.
//!
//! Both bounds come from the Schur complement of `V + E/2` with respect to
//! the mode-1 block. They are written in terms of three scalars built from
//! the mode-1 block and the correlations:
//!
//! ```text
//! s = n1 (|m_c|^2 + |m_s|^2) - m_c m_s m1* - m_c* m_s* m1
//! c = 2 n1 m_s* m_c - m_c^2 m1* - (m_s*)^2 m1
//! d = n1^2 - 1/4 - |m1|^2
//! ```

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gaussian::{
    evolve_beam_splitter, squeezed_thermal_cov, BeamSplitterParams, BipartiteCovariance,
    SqueezedThermalSpec,
};

/// `|d|` below this is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScdScalars {
    pub s: f64,
    pub c: C64,
    pub d: f64,
}

pub fn scd(v: &BipartiteCovariance) -> Result<ScdScalars> {
    let (n1, m1) = (v.v1.n, v.v1.m);
    let (ms, mc) = (v.c.m_s, v.c.m_c);
    let d = n1 * n1 - 0.25 - m1.norm_sqr();
    if d.abs() < SINGULAR_TOL {
        return Err(Error::Singular { d });
    }
    // mc ms m1* + c.c. is real
    let s = n1 * (mc.norm_sqr() + ms.norm_sqr()) - 2.0 * (mc * ms * m1.conj()).re;
    let c = 2.0 * n1 * ms.conj() * mc - mc * mc * m1.conj() - ms.conj() * ms.conj() * m1;
    Ok(ScdScalars { s, c, d })
}

/// First line of the physicality bound: `n1 - sqrt(|m1|^2 + 1/4)`.
pub fn local_margin(v: &BipartiteCovariance) -> f64 {
    v.v1.uncertainty_margin()
}

fn bound(v: &BipartiteCovariance, k: &ScdScalars, offset: f64) -> f64 {
    let delta = v.c.m_c.norm_sqr() - v.c.m_s.norm_sqr();
    let off_diag = (v.v2.m - k.c / k.d).norm_sqr();
    k.s / k.d + (0.25 * (delta / k.d + offset).powi(2) + off_diag).sqrt()
}

/// Second line of the physicality bound, `n2 - bound`. Together with
/// [`local_margin`] and `d > 0` it is nonnegative iff `V + E/2 >= 0`.
pub fn physicality_margin(v: &BipartiteCovariance) -> Result<f64> {
    let k = scd(v)?;
    Ok(v.v2.n - bound(v, &k, -1.0))
}

/// Separability margin: negative means the state is entangled.
///
/// Uses `||m_c|^2 - |m_s|^2|` so the bound is the larger of the bounds for
/// the state and its partial reflection. For physical inputs it is the
/// positive-partial-reflection condition.
pub fn separability_margin(v: &BipartiteCovariance) -> Result<f64> {
    let k = scd(v)?;
    let delta = (v.c.m_c.norm_sqr() - v.c.m_s.norm_sqr()).abs();
    let off_diag = (v.v2.m - k.c / k.d).norm_sqr();
    Ok(v.v2.n - (k.s / k.d + (0.25 * (delta / k.d + 1.0).powi(2) + off_diag).sqrt()))
}

/// Separability margin, falling back to the minimum eigenvalue of the
/// partially reflected `V + E/2` when mode 1 is pure. Both have the same
/// sign semantics.
pub fn separability_margin_or_eigen(v: &BipartiteCovariance) -> f64 {
    match separability_margin(v) {
        Ok(m) => m,
        Err(_) => v.min_eigenvalue_reflected(),
    }
}

/// Separability margin over a `(theta, r)` grid. Mode 1 is prepared from
/// `mode1`, mode 2 from `mode2` with its squeezing replaced by each `r`.
/// Rows follow `r_grid`, columns follow `theta_grid`.
pub fn entanglement_surface(
    mode1: SqueezedThermalSpec,
    mode2: SqueezedThermalSpec,
    theta_grid: &[f64],
    r_grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if theta_grid.is_empty() || r_grid.is_empty() {
        return Err(Error::Config("entanglement surface needs nonempty grids".into()));
    }
    let v1 = squeezed_thermal_cov(mode1);
    r_grid
        .iter()
        .map(|&r| {
            let v2 = squeezed_thermal_cov(SqueezedThermalSpec::new(mode2.nbar, r)?);
            let input = BipartiteCovariance::product(v1, v2);
            Ok(theta_grid
                .iter()
                .map(|&theta| {
                    let out = evolve_beam_splitter(&input, &BeamSplitterParams::coupling(theta));
                    separability_margin_or_eigen(&out)
                })
                .collect())
        })
        .collect()
}
