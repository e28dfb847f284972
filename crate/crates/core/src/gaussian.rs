//! Covariance-matrix description of zero-mean two-mode Gaussian states.
//!
//! The covariance uses the ladder-operator ordering `v = (a1, a1†, a2, a2†)`
//! with `V_ij = (-1)^(i+j) <{v_i, v_j†}> / 2`. In that ordering every block
//! has the shape `[[x, y], [y*, x*]]`, so a two-mode covariance is fully
//! described by six numbers: the local pairs `(n1, m1)`, `(n2, m2)` and the
//! correlations `(m_s, m_c)`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::constants::{ELEMENTARY_CHARGE, VACUUM_PERMITTIVITY};
use crate::error::{ensure_domain, Result};

/// Tolerance used by the single-mode uncertainty check.
pub const SINGLE_MODE_TOL: f64 = 1e-12;

/// Tolerance on the minimum eigenvalue of `V + E/2`.
pub const EIGEN_TOL: f64 = 1e-10;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Local covariance block `[[n, m], [m*, n]]` of one mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeCovariance {
    /// `<{a, a†}>/2`, i.e. mean occupation plus one half.
    pub n: f64,
    /// `-<a^2>`.
    pub m: C64,
}

impl ModeCovariance {
    pub fn new(n: f64, m: C64) -> Self {
        Self { n, m }
    }

    pub fn vacuum() -> Self {
        Self { n: 0.5, m: ZERO }
    }

    /// Uncertainty relation for one mode: `n >= sqrt(|m|^2 + 1/4)`.
    pub fn is_physical_single_mode(&self) -> bool {
        self.uncertainty_margin() >= -SINGLE_MODE_TOL
    }

    /// `n - sqrt(|m|^2 + 1/4)`; nonnegative for physical blocks.
    pub fn uncertainty_margin(&self) -> f64 {
        self.n - (self.m.norm_sqr() + 0.25).sqrt()
    }

    /// Normally ordered occupation `<a†a> = n - 1/2`.
    pub fn mean_occupation(&self) -> f64 {
        self.n - 0.5
    }

    pub fn matrix(&self) -> Matrix2<C64> {
        Matrix2::new(C64::from(self.n), self.m, self.m.conj(), C64::from(self.n))
    }
}

/// Correlation block `C = [[m_s, m_c], [m_c*, m_s*]]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CorrelationBlock {
    /// `<a1 a2†>`.
    pub m_s: C64,
    /// `-<a1 a2>`.
    pub m_c: C64,
}

impl CorrelationBlock {
    pub fn new(m_s: C64, m_c: C64) -> Self {
        Self { m_s, m_c }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.m_s == ZERO && self.m_c == ZERO
    }
}

/// Symmetrized second moments of a zero-mean two-mode state, as measured on
/// a density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondMoments {
    /// `<a1† a1>`
    pub n1: f64,
    /// `<a2† a2>`
    pub n2: f64,
    /// `<a1^2>`
    pub a1a1: C64,
    /// `<a2^2>`
    pub a2a2: C64,
    /// `<a1 a2†>`
    pub a1a2dag: C64,
    /// `<a1 a2>`
    pub a1a2: C64,
}

/// Full 4×4 covariance of two modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BipartiteCovariance {
    pub v1: ModeCovariance,
    pub v2: ModeCovariance,
    pub c: CorrelationBlock,
}

/// `E = diag(Z, Z)` with `Z = diag(1, -1)`.
pub fn symplectic_form() -> Matrix4<C64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(
        C64::from(1.0),
        C64::from(-1.0),
        C64::from(1.0),
        C64::from(-1.0),
    ))
}

/// Partial mirror reflection `T = diag(I, X)`: swaps `a2` and `a2†`.
pub fn partial_reflection() -> Matrix4<C64> {
    let one = C64::from(1.0);
    let mut t = Matrix4::zeros();
    t[(0, 0)] = one;
    t[(1, 1)] = one;
    t[(2, 3)] = one;
    t[(3, 2)] = one;
    t
}

impl BipartiteCovariance {
    pub fn new(v1: ModeCovariance, v2: ModeCovariance, c: CorrelationBlock) -> Self {
        Self { v1, v2, c }
    }

    /// Uncorrelated state `V1 ⊕ V2`.
    pub fn product(v1: ModeCovariance, v2: ModeCovariance) -> Self {
        Self::new(v1, v2, CorrelationBlock::zero())
    }

    /// Converts measured moments into the block parametrization. This is the
    /// only place where the `(-1)^(i+j)` factor of the definition is applied.
    pub fn from_moments(mo: &SecondMoments) -> Self {
        Self {
            v1: ModeCovariance::new(mo.n1 + 0.5, -mo.a1a1),
            v2: ModeCovariance::new(mo.n2 + 0.5, -mo.a2a2),
            c: CorrelationBlock::new(mo.a1a2dag, -mo.a1a2),
        }
    }

    /// Inverse of [`Self::from_moments`].
    pub fn to_moments(&self) -> SecondMoments {
        SecondMoments {
            n1: self.v1.n - 0.5,
            n2: self.v2.n - 0.5,
            a1a1: -self.v1.m,
            a2a2: -self.v2.m,
            a1a2dag: self.c.m_s,
            a1a2: -self.c.m_c,
        }
    }

    /// Assembles `[[V1, C], [C†, V2]]`.
    pub fn matrix(&self) -> Matrix4<C64> {
        let mut v = Matrix4::zeros();
        v.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.v1.matrix());
        v.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.v2.matrix());
        let c = Matrix2::new(self.c.m_s, self.c.m_c, self.c.m_c.conj(), self.c.m_s.conj());
        v.fixed_view_mut::<2, 2>(0, 2).copy_from(&c);
        v.fixed_view_mut::<2, 2>(2, 0).copy_from(&c.adjoint());
        v
    }

    /// Reads the block parameters back from an assembled matrix. The
    /// diagonal is taken as real; the matrix is assumed to have the
    /// block symmetry produced by [`Self::matrix`].
    pub fn from_matrix(v: &Matrix4<C64>) -> Self {
        Self {
            v1: ModeCovariance::new(v[(0, 0)].re, v[(0, 1)]),
            v2: ModeCovariance::new(v[(2, 2)].re, v[(2, 3)]),
            c: CorrelationBlock::new(v[(0, 2)], v[(0, 3)]),
        }
    }

    /// `T† V T` for an arbitrary 4×4 transform.
    pub fn congruence(&self, t: &Matrix4<C64>) -> Self {
        Self::from_matrix(&(t.adjoint() * self.matrix() * t))
    }

    pub fn trace(&self) -> f64 {
        2.0 * (self.v1.n + self.v2.n)
    }

    /// Minimum eigenvalue of `V + E/2`.
    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(self.matrix() + symplectic_form() * C64::from(0.5))
    }

    /// Minimum eigenvalue of `T V T + E/2` (partially reflected state).
    pub fn min_eigenvalue_reflected(&self) -> f64 {
        let t = partial_reflection();
        min_hermitian_eigenvalue(t * self.matrix() * t + symplectic_form() * C64::from(0.5))
    }

    /// Uncertainty principle `V + E/2 >= 0`, decided by eigenvalues.
    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue() >= -EIGEN_TOL
    }

    /// Positive partial reflection; for Gaussian states this decides separability.
    pub fn is_separable_by_eigenvalues(&self) -> bool {
        self.min_eigenvalue_reflected() >= -EIGEN_TOL
    }

    /// Symplectic eigenvalues (ascending), i.e. the moduli of the eigenvalues
    /// of `E V`. Requires `V > 0`.
    pub fn symplectic_eigenvalues(&self) -> [f64; 2] {
        let eig = SymmetricEigen::new(self.matrix());
        let sqrt_v = eig.eigenvectors
            * Matrix4::from_diagonal(&eig.eigenvalues.map(|l| C64::from(l.max(0.0).sqrt())))
            * eig.eigenvectors.adjoint();
        let h = sqrt_v * symplectic_form() * sqrt_v;
        let h = (h + h.adjoint()) * C64::from(0.5);
        let mut nu: Vec<f64> = SymmetricEigen::new(h)
            .eigenvalues
            .iter()
            .map(|l| l.abs())
            .collect();
        nu.sort_by(|a, b| a.total_cmp(b));
        // The spectrum is {±ν1, ±ν2}.
        [0.5 * (nu[0] + nu[1]), 0.5 * (nu[2] + nu[3])]
    }
}

fn min_hermitian_eigenvalue(m: Matrix4<C64>) -> f64 {
    let h = (m + m.adjoint()) * C64::from(0.5);
    SymmetricEigen::new(h).eigenvalues.min()
}

/// Parameters of the Bogoliubov map generated by a beam-splitter coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitterParams {
    /// Mixing angle `θ = g t`.
    pub theta: f64,
    pub phi0: f64,
    pub phi1: f64,
}

impl BeamSplitterParams {
    pub fn new(theta: f64, phi0: f64, phi1: f64) -> Self {
        Self { theta, phi0, phi1 }
    }

    /// Real mixing, `φ0 = φ1 = 0`.
    pub fn coupling(theta: f64) -> Self {
        Self::new(theta, 0.0, 0.0)
    }

    /// The exact covariance map of `exp[-iθ(a1 a2† + a1† a2)]`. It differs
    /// from [`Self::coupling`] only by a local quarter-period phase on mode 2,
    /// which leaves photon statistics and entanglement unchanged.
    pub fn unitary(theta: f64) -> Self {
        Self::new(theta, 0.0, FRAC_PI_2)
    }

    fn r_block(&self) -> Matrix2<C64> {
        let c = self.theta.cos();
        Matrix2::new(
            C64::from_polar(c, self.phi0),
            ZERO,
            ZERO,
            C64::from_polar(c, -self.phi0),
        )
    }

    fn s_block(&self) -> Matrix2<C64> {
        let s = self.theta.sin();
        Matrix2::new(
            C64::from_polar(s, self.phi1),
            ZERO,
            ZERO,
            C64::from_polar(s, -self.phi1),
        )
    }

    /// `M = [[R, S], [-S*, R*]]`.
    pub fn transfer_matrix(&self) -> Matrix4<C64> {
        let r = self.r_block();
        let s = self.s_block();
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&r);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&s);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&(-s.conjugate()));
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&r.conjugate());
        m
    }
}

/// Thermal state with mean occupation `nbar`.
pub fn thermal_cov(nbar: f64) -> Result<ModeCovariance> {
    ensure_domain("nbar", nbar, nbar >= 0.0 && nbar.is_finite(), "finite, >= 0")?;
    Ok(ModeCovariance::new(nbar + 0.5, ZERO))
}

/// Local preparation of one mode: a thermal state squeezed by `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezedThermalSpec {
    pub nbar: f64,
    pub r: f64,
}

impl SqueezedThermalSpec {
    pub fn new(nbar: f64, r: f64) -> Result<Self> {
        ensure_domain("nbar", nbar, nbar >= 0.0 && nbar.is_finite(), "finite, >= 0")?;
        ensure_domain("r", r, r.is_finite(), "finite")?;
        Ok(Self { nbar, r })
    }

    pub fn thermal(nbar: f64) -> Result<Self> {
        Self::new(nbar, 0.0)
    }
}

/// Covariance of `S(r) ρ_th S(r)†` with `S(r) = exp[(r/2)(a^2 - a†^2)]`.
///
/// With this squeezing convention `<a^2> = -(nbar + 1/2) sinh 2r`, so the
/// stored `m = -<a^2>` is real with the sign of `r`.
pub fn squeezed_thermal_cov(spec: SqueezedThermalSpec) -> ModeCovariance {
    let scale = spec.nbar + 0.5;
    let two_r = 2.0 * spec.r;
    ModeCovariance::new(scale * two_r.cosh(), C64::from(scale * two_r.sinh()))
}

/// Covariance after the beam-splitter map, `V' = M⁻¹ V M`.
///
/// `M` is unitary, so `M⁻¹ = M†`. For an uncorrelated input the blocks reduce
/// to `V1' = R* V1 R + S V2 S*`, `V2' = S* V1 S + R V2 R*` and
/// `C' = R* V1 S - S V2 R*`.
pub fn evolve_beam_splitter(
    v: &BipartiteCovariance,
    p: &BeamSplitterParams,
) -> BipartiteCovariance {
    v.congruence(&p.transfer_matrix())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    One,
    Two,
}

/// Marginal covariance of one mode.
pub fn reduce_mode(v: &BipartiteCovariance, which: Mode) -> ModeCovariance {
    match which {
        Mode::One => v.v1,
        Mode::Two => v.v2,
    }
}

/// Local squeezing `a -> a cosh r - e^{iφ} a† sinh r` on one mode, as a
/// 4×4 transform acting by congruence (`V -> K† V K`).
pub fn local_squeeze(which: Mode, r: f64, phi: f64) -> Matrix4<C64> {
    let ch = C64::from(r.cosh());
    let sh = C64::from_polar(r.sinh(), phi);
    let block = Matrix2::new(ch, sh, sh.conj(), ch);
    embed_local(which, block)
}

/// Local phase rotation `a -> e^{-iφ} a` on one mode.
pub fn local_rotation(which: Mode, phi: f64) -> Matrix4<C64> {
    let block = Matrix2::new(
        C64::from_polar(1.0, phi),
        ZERO,
        ZERO,
        C64::from_polar(1.0, -phi),
    );
    embed_local(which, block)
}

fn embed_local(which: Mode, block: Matrix2<C64>) -> Matrix4<C64> {
    let mut t = Matrix4::identity();
    let off = match which {
        Mode::One => 0,
        Mode::Two => 2,
    };
    t.fixed_view_mut::<2, 2>(off, off).copy_from(&block);
    t
}

/// Beam-splitter coupling constant `g = q^2 / (4π ε0 m ω d^3)` in rad/s.
pub fn coupling_constant(charge: f64, mass: f64, omega: f64, distance: f64) -> Result<f64> {
    ensure_domain("q", charge, charge > 0.0, "> 0")?;
    ensure_domain("m", mass, mass > 0.0, "> 0")?;
    ensure_domain("omega", omega, omega > 0.0, "> 0")?;
    ensure_domain("d", distance, distance > 0.0, "> 0")?;
    let k = 1.0 / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY);
    Ok(k * charge * charge / (mass * omega * distance.powi(3)))
}

/// Coupling for two singly charged ions.
pub fn ion_coupling_constant(mass: f64, omega: f64, distance: f64) -> Result<f64> {
    coupling_constant(ELEMENTARY_CHARGE, mass, omega, distance)
}
