//! Brute-force truncated Fock-space simulation.
//!
//! Nothing here uses Gaussian formulas: states are density matrices in the
//! number basis and evolutions are exponentials of the truncated generators.
//! It is the reference every closed form in the crate is tested against.
//!
//! Two routes are provided:
//!
//! * [`FockState`] with [`apply_squeeze`] and [`apply_beam_splitter`] keeps
//!   the full density matrix and uses dense matrix exponentials (scaling
//!   and squaring). Joint states cost `dim^4` memory, so this route is for
//!   small truncations.
//! * [`probe_distributions`] computes only the probe-mode number
//!   distribution of a thermal ⊗ squeezed-thermal input. It diagonalizes
//!   the squeezing generator and every total-number sector of the coupling
//!   once and reuses them across parameter points, which makes truncations
//!   of several hundred levels per mode affordable.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{ensure_domain, Error, Result};
use crate::gaussian::SecondMoments;
use crate::phonon::{Compensated, PhononDistribution};

pub const DEFAULT_SINGLE_DIM: usize = 60;
pub const DEFAULT_JOINT_DIM: usize = 40;

/// Largest trace loss an evolution may cause before it is rejected.
pub const MAX_TRACE_DEFICIT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    Single { dim: usize },
    /// Two modes, `dim` levels each, index `n1 * dim + n2`.
    Joint { dim: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    space: Space,
    rho: DMatrix<C64>,
}

fn annihilation(dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            C64::from((j as f64).sqrt())
        } else {
            C64::from(0.0)
        }
    })
}

impl FockState {
    pub fn single(rho: DMatrix<C64>) -> Result<Self> {
        if !rho.is_square() || rho.nrows() < 2 {
            return Err(Error::Config("single-mode state must be square, dim >= 2".into()));
        }
        Ok(Self {
            space: Space::Single { dim: rho.nrows() },
            rho,
        })
    }

    pub fn joint(dim: usize, rho: DMatrix<C64>) -> Result<Self> {
        if rho.nrows() != dim * dim || !rho.is_square() {
            return Err(Error::Config(format!("joint state must be {0}x{0}", dim * dim)));
        }
        Ok(Self {
            space: Space::Joint { dim },
            rho,
        })
    }

    /// Pure single-mode state from amplitudes.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let v = DVector::from_column_slice(amplitudes);
        Self::single(&v * v.adjoint())
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Levels per mode.
    pub fn dim(&self) -> usize {
        match self.space {
            Space::Single { dim } | Space::Joint { dim } => dim,
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// `max |ρ - ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.rho + self.rho.adjoint()) * C64::from(0.5);
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// `Tr(ρ A)`.
    pub fn expect(&self, op: &DMatrix<C64>) -> C64 {
        let mut acc = C64::from(0.0);
        for i in 0..self.rho.nrows() {
            for j in 0..self.rho.ncols() {
                acc += self.rho[(i, j)] * op[(j, i)];
            }
        }
        acc
    }

    /// `(<a†a>, <a^2>)` of a single-mode state.
    pub fn single_mode_moments(&self) -> Result<(f64, C64)> {
        let Space::Single { dim } = self.space else {
            return Err(Error::Config("expected a single-mode state".into()));
        };
        let a = annihilation(dim);
        Ok((self.expect(&(a.adjoint() * &a)).re, self.expect(&(&a * &a))))
    }

    /// Second moments of a joint state.
    pub fn second_moments(&self) -> Result<SecondMoments> {
        let Space::Joint { dim } = self.space else {
            return Err(Error::Config("expected a joint state".into()));
        };
        let a = annihilation(dim);
        let id = DMatrix::<C64>::identity(dim, dim);
        let a1 = a.kronecker(&id);
        let a2 = id.kronecker(&a);
        Ok(SecondMoments {
            n1: self.expect(&(a1.adjoint() * &a1)).re,
            n2: self.expect(&(a2.adjoint() * &a2)).re,
            a1a1: self.expect(&(&a1 * &a1)),
            a2a2: self.expect(&(&a2 * &a2)),
            a1a2dag: self.expect(&(&a1 * a2.adjoint())),
            a1a2: self.expect(&(&a1 * &a2)),
        })
    }

    /// `ρ1 ⊗ ρ2` for two single-mode states of equal dimension.
    pub fn tensor(&self, other: &FockState) -> Result<FockState> {
        match (self.space, other.space) {
            (Space::Single { dim: d1 }, Space::Single { dim: d2 }) if d1 == d2 => {
                FockState::joint(d1, self.rho.kronecker(&other.rho))
            }
            _ => Err(Error::Config("tensor needs two single-mode states of equal dim".into())),
        }
    }

    /// Mean of `a†a` summed over modes.
    pub fn total_number(&self) -> f64 {
        let d = self.dim();
        match self.space {
            Space::Single { .. } => (0..d).map(|n| n as f64 * self.rho[(n, n)].re).sum(),
            Space::Joint { .. } => (0..d * d)
                .map(|i| ((i / d) + (i % d)) as f64 * self.rho[(i, i)].re)
                .sum(),
        }
    }
}

/// Thermal state, geometric weights renormalized over the truncation.
pub fn thermal_state(nbar: f64, dim: usize) -> Result<FockState> {
    ensure_domain("nbar", nbar, nbar >= 0.0 && nbar.is_finite(), "finite, >= 0")?;
    ensure_domain("dim", dim as f64, dim >= 2, ">= 2")?;
    let x = nbar / (1.0 + nbar);
    let w: Vec<f64> = (0..dim).map(|n| x.powi(n as i32)).collect();
    let z: f64 = w.iter().sum();
    let diag = DVector::from_iterator(dim, w.iter().map(|p| C64::from(p / z)));
    FockState::single(DMatrix::from_diagonal(&diag))
}

fn embed(rho: &DMatrix<C64>, dim: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(dim, dim);
    out.view_mut((0, 0), rho.shape()).copy_from(rho);
    out
}

/// `S(r) ρ S(r)†` with `S(r) = exp[(r/2)(a^2 - a†^2)]`.
///
/// The generator is exponentiated in a space twice as large as the state's
/// and the result projected back; the probability lost in the projection
/// must stay below [`MAX_TRACE_DEFICIT`].
pub fn apply_squeeze(state: &FockState, r: f64) -> Result<FockState> {
    let Space::Single { dim } = state.space else {
        return Err(Error::Config("apply_squeeze expects a single-mode state".into()));
    };
    if r == 0.0 {
        return Ok(state.clone());
    }
    let work = 2 * dim + 16;
    let a = annihilation(work);
    let gen = (&a * &a - a.adjoint() * a.adjoint()) * C64::from(0.5 * r);
    let s = gen.exp();
    let out = &s * embed(&state.rho, work) * s.adjoint();
    let proj = out.view((0, 0), (dim, dim)).into_owned();
    let deficit = state.trace() - proj.trace().re;
    if deficit > MAX_TRACE_DEFICIT {
        return Err(Error::Truncation {
            what: "squeeze",
            deficit,
            advice: "increase the Fock dimension",
        });
    }
    FockState::single(proj)
}

/// Real symmetric generator `a1 a2† + a1† a2` restricted to the sector of
/// total number `n`, in the basis `|j, n - j>`, `j = 0..=n`.
fn sector_generator(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n + 1, n + 1, |i, j| {
        if j == i + 1 {
            ((j as f64) * ((n - i) as f64)).sqrt()
        } else if i == j + 1 {
            ((i as f64) * ((n - j) as f64)).sqrt()
        } else {
            0.0
        }
    })
}

/// `U(θ) ρ U(θ)†` with `U(θ) = exp[-iθ(a1 a2† + a1† a2)]`.
///
/// `U` conserves `n1 + n2`, so it is exponentiated sector by sector. The
/// sectors are complete up to `2(dim - 1)`; probability that leaves the
/// per-mode truncation is reported as a trace deficit.
pub fn apply_beam_splitter(joint: &FockState, theta: f64) -> Result<FockState> {
    let Space::Joint { dim } = joint.space else {
        return Err(Error::Config("apply_beam_splitter expects a joint state".into()));
    };
    let max_n = 2 * (dim - 1);
    let unitaries: Vec<DMatrix<C64>> = (0..=max_n)
        .map(|n| {
            let g = sector_generator(n).map(|x| C64::new(0.0, -theta * x));
            g.exp()
        })
        .collect();
    // levels j of sector n that lie inside the truncation
    let valid = |n: usize| -> std::ops::RangeInclusive<usize> {
        n.saturating_sub(dim - 1)..=n.min(dim - 1)
    };
    let idx = |n1: usize, n2: usize| n1 * dim + n2;

    let mut out = DMatrix::<C64>::zeros(dim * dim, dim * dim);
    for n in 0..=max_n {
        let rows = valid(n);
        let u = unitaries[n].rows_range(rows.clone()).columns_range(rows.clone()).into_owned();
        for np in 0..=max_n {
            let cols = valid(np);
            let block = DMatrix::from_fn(rows.clone().count(), cols.clone().count(), |i, j| {
                let (j1, j2) = (rows.start() + i, cols.start() + j);
                joint.rho[(idx(j1, n - j1), idx(j2, np - j2))]
            });
            if block.iter().all(|z| z.norm() == 0.0) {
                continue;
            }
            let up = unitaries[np].rows_range(cols.clone()).columns_range(cols.clone()).into_owned();
            let res = &u * block * up.adjoint();
            for (i, k1) in rows.clone().enumerate() {
                for (j, k2) in cols.clone().enumerate() {
                    out[(idx(k1, n - k1), idx(k2, np - k2))] = res[(i, j)];
                }
            }
        }
    }
    let state = FockState::joint(dim, out)?;
    let deficit = joint.trace() - state.trace();
    if deficit > MAX_TRACE_DEFICIT {
        return Err(Error::Truncation {
            what: "beam splitter",
            deficit,
            advice: "increase the Fock dimension",
        });
    }
    Ok(state)
}

/// Reduced state of mode 1.
pub fn partial_trace_mode2(joint: &FockState) -> Result<FockState> {
    let Space::Joint { dim } = joint.space else {
        return Err(Error::Config("partial trace expects a joint state".into()));
    };
    let rho = DMatrix::from_fn(dim, dim, |i, j| {
        (0..dim).map(|n| joint.rho[(i * dim + n, j * dim + n)]).sum()
    });
    FockState::single(rho)
}

/// Diagonal of a single-mode density matrix.
pub fn number_distribution(state: &FockState) -> Result<PhononDistribution> {
    let Space::Single { dim } = state.space else {
        return Err(Error::Config("number distribution expects a single-mode state".into()));
    };
    Ok(PhononDistribution::from_probs(
        (0..dim).map(|n| state.rho[(n, n)].re).collect(),
    ))
}

/// One point of the thermal ⊗ squeezed-thermal coupling problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbePoint {
    pub nbar1: f64,
    pub nbar2: f64,
    pub r: f64,
    pub theta: f64,
}

/// Probability mass discarded by every truncation of [`probe_distributions`].
pub const PROBE_TRUNCATION: f64 = 1e-13;

fn thermal_weights(nbar: f64, tol: f64) -> Vec<f64> {
    if nbar == 0.0 {
        return vec![1.0];
    }
    let x = nbar / (1.0 + nbar);
    let len = (tol.ln() / x.ln()).ceil().max(1.0) as usize + 1;
    (0..len).map(|n| (1.0 - x) * x.powi(n as i32)).collect()
}

/// Eigen-decomposition of the squeezing generator restricted to one parity
/// class and `half` levels (`n = parity + 2i`).
///
/// On that class `(a^2 - a†^2)/2` is real antisymmetric and tridiagonal;
/// a diagonal phase change turns `i` times it into the real symmetric
/// tridiagonal matrix with the same off-diagonal moduli, so
/// `|<l|S(r)|n>|` follows from its eigenvectors.
struct SqueezeSpectrum {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl SqueezeSpectrum {
    fn new(parity: usize, half: usize) -> Self {
        let m = DMatrix::from_fn(half, half, |i, j| {
            let lo = i.min(j);
            if i.abs_diff(j) == 1 {
                let n = (parity + 2 * lo) as f64;
                0.5 * ((n + 1.0) * (n + 2.0)).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(m);
        Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    /// `|<l|S(r)|n>|^2` for every level `l` of the class and the first
    /// `cols` levels `n`.
    fn transition_probabilities(&self, r: f64, cols: usize) -> DMatrix<f64> {
        let half = self.values.len();
        let cols = cols.min(half);
        let q = &self.vectors;
        let mut qc = q.clone();
        let mut qs = q.clone();
        for (m, &lam) in self.values.iter().enumerate() {
            let (s, c) = (r * lam).sin_cos();
            qc.column_mut(m).scale_mut(c);
            qs.column_mut(m).scale_mut(s);
        }
        let head = q.rows(0, cols).transpose();
        let re = &qc * &head;
        let im = &qs * &head;
        DMatrix::from_fn(half, cols, |i, j| re[(i, j)].powi(2) + im[(i, j)].powi(2))
    }
}

/// Number distribution of `S(r) ρ_th S(r)†` with the spectra cached per size.
struct SqueezeOracle {
    spectra: HashMap<(usize, usize), SqueezeSpectrum>,
}

impl SqueezeOracle {
    fn new() -> Self {
        Self {
            spectra: HashMap::new(),
        }
    }

    fn distribution(&mut self, nbar: f64, r: f64, tol: f64) -> Result<Vec<f64>> {
        let thermal = thermal_weights(nbar, tol);
        if r == 0.0 {
            return Ok(thermal);
        }
        let mut half = 64.max(thermal.len());
        loop {
            let work = 2 * half;
            let mut probs = vec![0.0; work];
            for parity in 0..2 {
                let spec = self
                    .spectra
                    .entry((parity, half))
                    .or_insert_with(|| SqueezeSpectrum::new(parity, half));
                let cols = (thermal.len() + 1 - parity) / 2;
                if cols == 0 {
                    continue;
                }
                let t = spec.transition_probabilities(r, cols);
                for i in 0..half {
                    let mut acc = Compensated::default();
                    for c in 0..cols {
                        acc.add(thermal[parity + 2 * c] * t[(i, c)]);
                    }
                    probs[parity + 2 * i] = acc.value();
                }
            }
            // the top quarter of the working space must be empty, otherwise
            // the truncated generator has reflected probability back
            let edge: f64 = probs[work * 3 / 4..].iter().sum();
            if edge < tol * 1e-2 {
                let mut len = work;
                let mut tail = 0.0;
                while len > 1 && tail + probs[len - 1] < tol {
                    tail += probs[len - 1];
                    len -= 1;
                }
                probs.truncate(len);
                return Ok(probs);
            }
            if work >= 1 << 14 {
                return Err(Error::Truncation {
                    what: "squeeze oracle",
                    deficit: edge,
                    advice: "squeezing too strong for the oracle",
                });
            }
            half *= 2;
        }
    }
}

/// Leading rows of the eigenvectors of one coupling sector.
struct SectorBasis {
    /// `rows × (n + 1)`, column `m` belongs to eigenvalue `n - 2m`.
    head: DMatrix<f64>,
}

/// Solves `(G - μ I) x = b` for a symmetric tridiagonal `G` given by its
/// off-diagonal, by Gaussian elimination with partial pivoting.
fn solve_shifted_tridiagonal(off: &[f64], mu: f64, b: &mut [f64]) {
    let n = b.len();
    let mut d: Vec<f64> = vec![-mu; n];
    let mut du: Vec<f64> = off.to_vec();
    du.push(0.0);
    let mut dl: Vec<f64> = off.to_vec();
    let mut du2 = vec![0.0; n];
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            let piv = if d[i] == 0.0 { f64::MIN_POSITIVE } else { d[i] };
            let f = dl[i] / piv;
            d[i] = piv;
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = f;
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            du[i] = tmp;
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
            dl[i] = f;
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = f64::MIN_POSITIVE;
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
}

impl SectorBasis {
    /// Eigenvectors by shifted inverse iteration. The eigenvalues of the
    /// sector generator are the integers `n, n-2, ..., -n`; every pair is
    /// verified by its residual.
    fn new(n: usize, rows: usize) -> Result<Self> {
        let dim = n + 1;
        let rows = rows.min(dim);
        let off: Vec<f64> = (0..n).map(|j| (((j + 1) * (n - j)) as f64).sqrt()).collect();
        let mut head = DMatrix::zeros(rows, dim);
        let seed: Vec<f64> = (0..dim).map(|i| 1.0 + (i as f64 * 0.618_033_988_75).fract()).collect();
        for m in 0..dim {
            let lam = n as f64 - 2.0 * m as f64;
            let mu = lam + 1e-13 * (1.0 + n as f64);
            let mut x = seed.clone();
            for _ in 0..4 {
                solve_shifted_tridiagonal(&off, mu, &mut x);
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter_mut().for_each(|v| *v /= norm);
            }
            // residual against the Rayleigh quotient; the shift itself
            // would dominate a residual taken against `lam`
            let gx: Vec<f64> = (0..dim)
                .map(|i| {
                    let mut g = 0.0;
                    if i > 0 {
                        g += off[i - 1] * x[i - 1];
                    }
                    if i + 1 < dim {
                        g += off[i] * x[i + 1];
                    }
                    g
                })
                .collect();
            let rq: f64 = gx.iter().zip(&x).map(|(g, v)| g * v).sum();
            let resid = gx
                .iter()
                .zip(&x)
                .map(|(g, v)| (g - rq * v).abs())
                .fold((rq - lam).abs(), f64::max);
            if resid > 1e-9 * (1.0 + n as f64) {
                return Err(Error::Truncation {
                    what: "sector eigenvector",
                    deficit: resid,
                    advice: "inverse iteration did not converge",
                });
            }
            for i in 0..rows {
                head[(i, m)] = x[i];
            }
        }
        Ok(Self { head })
    }
}

/// Probe-mode number distributions `P(0..=k_max)` for a batch of points.
///
/// Mode 1 starts thermal, mode 2 squeezed thermal; each state is truncated
/// where its remaining probability falls below [`PROBE_TRUNCATION`], so the
/// returned probabilities are accurate to about that level.
pub fn probe_distributions(points: &[ProbePoint], k_max: usize) -> Result<Vec<PhononDistribution>> {
    let tol = PROBE_TRUNCATION;
    let mut squeeze = SqueezeOracle::new();
    let mut inputs = Vec::with_capacity(points.len());
    for p in points {
        ensure_domain("nbar1", p.nbar1, p.nbar1 >= 0.0, ">= 0")?;
        ensure_domain("nbar2", p.nbar2, p.nbar2 >= 0.0, ">= 0")?;
        let p1 = thermal_weights(p.nbar1, tol);
        let p2 = squeeze.distribution(p.nbar2, p.r, tol)?;
        inputs.push((p1, p2));
    }
    let rows = inputs
        .iter()
        .map(|(p1, _)| p1.len())
        .max()
        .unwrap_or(1)
        .max(k_max + 1);
    let max_n = inputs
        .iter()
        .map(|(p1, p2)| p1.len() + p2.len() - 2)
        .max()
        .unwrap_or(0);

    let mut acc = vec![vec![0.0; k_max + 1]; points.len()];
    for n in 0..=max_n {
        let basis = SectorBasis::new(n, rows)?;
        let dim = n + 1;
        for (pi, (p1, p2)) in inputs.iter().enumerate() {
            if n > p1.len() + p2.len() - 2 {
                continue;
            }
            let j_lo = n.saturating_sub(p2.len() - 1);
            let j_hi = n.min(p1.len() - 1);
            if j_lo > j_hi {
                continue;
            }
            let weights: Vec<f64> = (j_lo..=j_hi).map(|j| p1[j] * p2[n - j]).collect();
            if weights.iter().sum::<f64>() < 1e-3 * tol {
                continue;
            }
            let k_hi = k_max.min(n);
            // U[k, j] = e^{-iθn} Σ_m V[k,m] V[j,m] e^{2iθm}
            let theta = points[pi].theta;
            let (mut vc, mut vs) = (
                basis.head.rows(0, k_hi + 1).into_owned(),
                basis.head.rows(0, k_hi + 1).into_owned(),
            );
            for m in 0..dim {
                let (s, c) = (2.0 * theta * m as f64).sin_cos();
                vc.column_mut(m).scale_mut(c);
                vs.column_mut(m).scale_mut(s);
            }
            let vj = basis.head.rows(j_lo, j_hi - j_lo + 1).transpose();
            let re = &vc * &vj;
            let im = &vs * &vj;
            for k in 0..=k_hi {
                let mut sum = Compensated::default();
                for (jj, w) in weights.iter().enumerate() {
                    sum.add(w * (re[(k, jj)].powi(2) + im[(k, jj)].powi(2)));
                }
                acc[pi][k] += sum.value();
            }
        }
    }
    Ok(acc.into_iter().map(PhononDistribution::from_probs).collect())
}

/// Number distribution of a squeezed thermal state, truncated at
/// [`PROBE_TRUNCATION`].
pub fn squeezed_thermal_distribution(nbar: f64, r: f64) -> Result<PhononDistribution> {
    ensure_domain("nbar", nbar, nbar >= 0.0, ">= 0")?;
    Ok(PhononDistribution::from_probs(
        SqueezeOracle::new().distribution(nbar, r, PROBE_TRUNCATION)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn basis(dim: usize, n: usize) -> Vec<C64> {
        let mut v = vec![C64::from(0.0); dim];
        v[n] = C64::from(1.0);
        v
    }

    #[test]
    fn thermal_basics() {
        let vac = thermal_state(0.0, 10).unwrap();
        assert_eq!(vac.matrix()[(0, 0)], C64::from(1.0));
        assert_abs_diff_eq!(vac.trace(), 1.0, epsilon = 0.0);
        let th = thermal_state(1.0, 60).unwrap();
        assert_abs_diff_eq!(th.total_number(), 1.0, epsilon = 1e-10);
        let d = number_distribution(&thermal_state(0.4, 30).unwrap()).unwrap();
        assert!(d.probs.windows(2).all(|w| w[1] < w[0]));
        assert!(thermal_state(-1.0, 10).is_err());
        assert!(thermal_state(1.0, 1).is_err());
    }

    #[test]
    fn squeeze_identity_and_vacuum_occupation() {
        let th = thermal_state(0.3, 20).unwrap();
        assert_eq!(apply_squeeze(&th, 0.0).unwrap(), th);
        let sq = apply_squeeze(&thermal_state(0.0, 60).unwrap(), 0.6).unwrap();
        assert_abs_diff_eq!(sq.total_number(), 0.6f64.sinh().powi(2), epsilon = 1e-10);
        let ev = sq.eigenvalues();
        assert_abs_diff_eq!(*ev.last().unwrap(), 1.0, epsilon = 1e-10);
        assert!(ev[0] > -1e-10);
        assert!(sq.hermiticity_error() < 1e-12);
    }

    #[test]
    fn squeeze_truncation_is_reported() {
        let err = apply_squeeze(&thermal_state(2.0, 20).unwrap(), 1.0).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn beam_splitter_identity_and_swap() {
        let dim = 6;
        let one = FockState::pure(&basis(dim, 1)).unwrap();
        let vac = FockState::pure(&basis(dim, 0)).unwrap();
        let joint = one.tensor(&vac).unwrap();
        let same = apply_beam_splitter(&joint, 0.0).unwrap();
        assert!((same.matrix() - joint.matrix()).iter().all(|z| z.norm() < 1e-14));
        let swapped = apply_beam_splitter(&joint, FRAC_PI_2).unwrap();
        // |1,0> -> |0,1> up to phase
        let target = dim; // index of (0, 1) is 0*dim + 1; of (1,0) is dim
        assert_abs_diff_eq!(swapped.matrix()[(1, 1)].re, 1.0, epsilon = 1e-12);
        assert!(swapped.matrix()[(target, target)].norm() < 1e-12);
    }

    #[test]
    fn beam_splitter_conserves_number_and_spectrum() {
        let dim = 16;
        let a = apply_squeeze(&thermal_state(0.05, dim).unwrap(), 0.1).unwrap();
        let b = thermal_state(0.08, dim).unwrap();
        let joint = a.tensor(&b).unwrap();
        let out = apply_beam_splitter(&joint, 0.7).unwrap();
        assert_abs_diff_eq!(out.total_number(), joint.total_number(), epsilon = 1e-10);
        assert_abs_diff_eq!(out.trace(), joint.trace(), epsilon = 1e-10);
        let (e0, e1) = (joint.eigenvalues(), out.eigenvalues());
        for (x, y) in e0.iter().zip(&e1) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn partial_trace_recovers_factors() {
        let dim = 14;
        let a = apply_squeeze(&thermal_state(0.1, dim).unwrap(), 0.15).unwrap();
        let b = thermal_state(0.3, dim).unwrap();
        let joint = a.tensor(&b).unwrap();
        let red = partial_trace_mode2(&joint).unwrap();
        let scale = b.trace();
        assert!((red.matrix() - a.matrix() * C64::from(scale)).iter().all(|z| z.norm() < 1e-14));
        // swap moves mode 2 into mode 1
        let out = apply_beam_splitter(&joint, FRAC_PI_2).unwrap();
        let red = partial_trace_mode2(&out).unwrap();
        let d1 = number_distribution(&red).unwrap();
        let d2 = number_distribution(&b).unwrap();
        for k in 0..dim {
            assert_abs_diff_eq!(d1.probs[k], d2.probs[k] * a.trace(), epsilon = 1e-10);
        }
    }

    #[test]
    fn partial_trace_preserves_trace_of_random_state() {
        use rand::{Rng, SeedableRng};
        let dim = 5;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let g = DMatrix::from_fn(dim * dim, dim * dim, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let rho = &g * g.adjoint();
        let rho = &rho / C64::from(rho.trace().re);
        let joint = FockState::joint(dim, rho).unwrap();
        let red = partial_trace_mode2(&joint).unwrap();
        assert_abs_diff_eq!(red.trace(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn squeeze_spectrum_matches_dense_exponential() {
        let (nbar, r) = (0.4, 0.5);
        let fast = squeezed_thermal_distribution(nbar, r).unwrap();
        let dense = number_distribution(&apply_squeeze(&thermal_state(nbar, 90).unwrap(), r).unwrap()).unwrap();
        for k in 0..40 {
            assert_abs_diff_eq!(fast.probs[k], dense.probs[k], epsilon = 1e-11);
        }
    }

    #[test]
    fn sector_basis_is_orthonormal() {
        for n in [30, 144, 401, 750] {
            let b = SectorBasis::new(n, n + 1).unwrap();
            let gram = b.head.transpose() * &b.head;
            for i in 0..=n {
                for j in 0..=n {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(gram[(i, j)], e, epsilon = 1e-11);
                }
            }
        }
    }

    #[test]
    fn sector_route_matches_dense_route() {
        let (n1, n2, r, th) = (0.3, 0.2, 0.25, 0.7);
        let dim = 20;
        let a = thermal_state(n1, dim).unwrap();
        let b = apply_squeeze(&thermal_state(n2, dim).unwrap(), r).unwrap();
        let out = apply_beam_splitter(&a.tensor(&b).unwrap(), th).unwrap();
        let dense = number_distribution(&partial_trace_mode2(&out).unwrap()).unwrap();
        let fast = probe_distributions(&[ProbePoint { nbar1: n1, nbar2: n2, r, theta: th }], 10).unwrap();
        for k in 0..=10 {
            assert_abs_diff_eq!(fast[0].probs[k], dense.probs[k], epsilon = 1e-7);
        }
    }

    #[test]
    fn squeezed_moments_match_covariance() {
        use crate::gaussian::{squeezed_thermal_cov, SqueezedThermalSpec};
        let (nbar, r) = (0.3, 0.4);
        let st = apply_squeeze(&thermal_state(nbar, 60).unwrap(), r).unwrap();
        let (n, a2) = st.single_mode_moments().unwrap();
        let v = squeezed_thermal_cov(SqueezedThermalSpec::new(nbar, r).unwrap());
        assert_abs_diff_eq!(n + 0.5, v.n, epsilon = 1e-10);
        assert!((-a2 - v.m).norm() < 1e-10);
    }

    #[test]
    fn joint_moments_match_covariance_evolution() {
        use crate::gaussian::{
            evolve_beam_splitter, squeezed_thermal_cov, BeamSplitterParams, BipartiteCovariance, SqueezedThermalSpec,
        };
        let dim = 14;
        let (n1, n2, r) = (0.05, 0.06, 0.12);
        let a = apply_squeeze(&thermal_state(n1, dim).unwrap(), 0.0).unwrap();
        let b = apply_squeeze(&thermal_state(n2, dim).unwrap(), r).unwrap();
        let input = BipartiteCovariance::product(
            squeezed_thermal_cov(SqueezedThermalSpec::thermal(n1).unwrap()),
            squeezed_thermal_cov(SqueezedThermalSpec::new(n2, r).unwrap()),
        );
        for &theta in &[0.3, 0.9, 2.2] {
            let out = apply_beam_splitter(&a.tensor(&b).unwrap(), theta).unwrap();
            let fock = BipartiteCovariance::from_moments(&out.second_moments().unwrap());
            let exact = evolve_beam_splitter(&input, &BeamSplitterParams::unitary(theta));
            assert!((fock.matrix() - exact.matrix()).iter().all(|z| z.norm() < 1e-7), "theta = {theta}");
            // the real coupling differs by a local phase only
            let real = evolve_beam_splitter(&input, &BeamSplitterParams::coupling(theta));
            assert_abs_diff_eq!(real.v1.n, fock.v1.n, epsilon = 1e-7);
            assert_abs_diff_eq!(real.c.m_s.norm(), fock.c.m_s.norm(), epsilon = 1e-7);
        }
    }

    #[test]
    fn probe_oracle_is_converged() {
        let p = ProbePoint { nbar1: 0.6, nbar2: 0.9, r: 0.7, theta: 1.1 };
        let d = &probe_distributions(&[p], 20).unwrap()[0];
        let full: f64 = d.probs.iter().sum::<f64>() + d.tail_mass;
        assert_abs_diff_eq!(full, 1.0, epsilon = 1e-15);
        assert!(d.probs.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }
}
