//! Randomized invariants across modules.

use std::f64::consts::PI;

use proptest::prelude::*;

use crate::gaussian::{
    evolve_beam_splitter, local_rotation, local_squeeze, squeezed_thermal_cov, thermal_cov, BeamSplitterParams,
    BipartiteCovariance, Mode, SqueezedThermalSpec,
};
use crate::phonon::{distribution, distribution_with_gradient, prob_closed_form, probe_coefficients, ProbeCoefficients};
use crate::separability::{physicality_margin, separability_margin};
use crate::thermometry::{fisher_matrix, occupation_from_temperature, TrapConfig};

fn close(a: &BipartiteCovariance, b: &BipartiteCovariance, tol: f64) -> bool {
    (a.matrix() - b.matrix()).iter().all(|z| z.norm() <= tol)
}

prop_compose! {
    fn product_state()(n1 in 0.0..3.0f64, n2 in 0.0..3.0f64, r1 in -1.0..1.0f64, r2 in -1.0..1.0f64)
        -> BipartiteCovariance {
        BipartiteCovariance::product(
            squeezed_thermal_cov(SqueezedThermalSpec::new(n1, r1).unwrap()),
            squeezed_thermal_cov(SqueezedThermalSpec::new(n2, r2).unwrap()),
        )
    }
}

prop_compose! {
    fn general_state()(v in product_state(), th in 0.0..PI, p0 in 0.0..6.3f64, p1 in 0.0..6.3f64,
                       s in 0.0..0.8f64, ps in 0.0..6.3f64, rot in 0.0..6.3f64) -> BipartiteCovariance {
        evolve_beam_splitter(&v, &BeamSplitterParams::new(th, p0, p1))
            .congruence(&local_squeeze(Mode::Two, s, ps))
            .congruence(&local_rotation(Mode::One, rot))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn coupling_composes(v in general_state(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let two = evolve_beam_splitter(&evolve_beam_splitter(&v, &BeamSplitterParams::coupling(a)), &BeamSplitterParams::coupling(b));
        let one = evolve_beam_splitter(&v, &BeamSplitterParams::coupling(a + b));
        prop_assert!(close(&two, &one, 1e-9));
    }

    #[test]
    fn coupling_is_periodic(v in general_state(), th in -6.0..6.0f64, p0 in 0.0..6.3f64, p1 in 0.0..6.3f64) {
        let base = evolve_beam_splitter(&v, &BeamSplitterParams::new(th, p0, p1));
        for shift in [PI, 2.0 * PI] {
            let moved = evolve_beam_splitter(&v, &BeamSplitterParams::new(th + shift, p0, p1));
            prop_assert!(close(&base, &moved, 1e-9));
        }
    }

    #[test]
    fn coupling_preserves_invariants(v in general_state(), th in 0.0..6.3f64, p0 in 0.0..6.3f64, p1 in 0.0..6.3f64) {
        let out = evolve_beam_splitter(&v, &BeamSplitterParams::new(th, p0, p1));
        let scale = 1.0 + v.trace();
        prop_assert!((out.trace() - v.trace()).abs() <= 1e-10 * scale);
        let (a, b) = (v.symplectic_eigenvalues(), out.symplectic_eigenvalues());
        prop_assert!((a[0] - b[0]).abs() <= 1e-8 * scale && (a[1] - b[1]).abs() <= 1e-8 * scale);
        prop_assert!(out.is_physical());
    }

    #[test]
    fn separability_never_exceeds_physicality(v in general_state()) {
        if let (Ok(s), Ok(p)) = (separability_margin(&v), physicality_margin(&v)) {
            prop_assert!(s <= p + 1e-12);
            prop_assert!(p >= -1e-8, "physical input must satisfy the bound, got {p}");
        }
    }

    #[test]
    fn separability_sign_matches_reflection_test(v in general_state()) {
        if let Ok(s) = separability_margin(&v) {
            let e = v.min_eigenvalue_reflected();
            if s.abs() > 1e-9 && e.abs() > 1e-9 {
                prop_assert_eq!(s >= 0.0, e >= 0.0);
            }
        }
    }

    #[test]
    fn squeezing_sign_does_not_matter(n1 in 0.0..2.0f64, n2 in 0.0..2.0f64, r in 0.0..1.0f64, th in 0.0..PI) {
        let p = probe_coefficients(n1, n2, r, th).unwrap();
        let m = probe_coefficients(n1, n2, -r, th).unwrap();
        prop_assert_eq!(p, m);
        let cfg = TrapConfig { r, theta: th, ..TrapConfig::default() };
        let f = fisher_matrix(&cfg).unwrap();
        let g = fisher_matrix(&TrapConfig { r: -r, ..cfg }).unwrap();
        prop_assert!((f.f11 - g.f11).abs() <= 1e-12 * f.f11.max(1.0));
        prop_assert!((f.f22 - g.f22).abs() <= 1e-12 * f.f22.max(1.0));
    }

    #[test]
    fn distribution_is_normalized(n1 in 0.0..2.0f64, n2 in 0.0..2.0f64, r in 0.0..1.0f64, th in 0.0..PI) {
        let coef = probe_coefficients(n1, n2, r, th).unwrap();
        let d = distribution(&coef, 600).unwrap();
        prop_assert!(d.probs.iter().all(|&p| p >= 0.0));
        prop_assert!((d.probs.iter().sum::<f64>() + d.tail_mass - 1.0).abs() < 1e-14);
        prop_assert!(d.tail_mass < 1e-8);
        // mean of the probe equals its covariance occupation a
        prop_assert!((d.mean() - coef.a()).abs() < 1e-7 * (1.0 + coef.a()));
    }

    #[test]
    fn series_and_convolution_agree(a in 0.0..3.0f64, frac in 0.0..1.0f64, k in 0usize..40) {
        // b limited so that the series converges comfortably
        let bmax = (a * a + a).sqrt();
        let coef = ProbeCoefficients::new(a, frac * bmax * 0.6).unwrap();
        let series = prob_closed_form(&coef, k).unwrap();
        let conv = distribution(&coef, 40).unwrap().probs[k];
        prop_assert!((series - conv).abs() <= 1e-13 + 1e-11 * conv);
    }

    #[test]
    fn gradients_sum_to_zero(a in 0.0..2.0f64, frac in 0.0..1.0f64) {
        let coef = ProbeCoefficients::new(a, frac * (a * a + a).sqrt()).unwrap();
        let g = distribution_with_gradient(&coef, 2000).unwrap();
        if g.dist.tail_mass < 1e-12 {
            prop_assert!(g.d_a.iter().sum::<f64>().abs() < 1e-8);
            prop_assert!(g.d_b.iter().sum::<f64>().abs() < 1e-8);
        }
    }

    #[test]
    fn fisher_is_positive_semidefinite(th in 0.0..6.3f64, r in 0.0..0.8f64, t2 in 0.5e-5..4e-5f64) {
        let f = fisher_matrix(&TrapConfig { theta: th, r, t2, ..TrapConfig::default() }).unwrap();
        prop_assert!(f.f11 >= 0.0 && f.f22 >= 0.0);
        prop_assert!(f.det() >= -1e-10 * (f.f11 * f.f22).max(1.0));
    }

    #[test]
    fn fisher_is_pi_periodic_and_mirror_symmetric(th in 0.0..PI, r in 0.0..0.8f64) {
        let cfg = TrapConfig { theta: th, r, ..TrapConfig::default() };
        let base = fisher_matrix(&cfg).unwrap();
        for other in [th + PI, PI - th] {
            let f = fisher_matrix(&TrapConfig { theta: other, ..cfg }).unwrap();
            for (x, y) in [(f.f11, base.f11), (f.f22, base.f22), (f.f12, base.f12)] {
                prop_assert!((x - y).abs() <= 1e-8 * (base.f11 + base.f22) + 1e-20);
            }
        }
    }

    #[test]
    fn occupation_increases_with_temperature(t in 1e-7..1e-3f64, factor in 1.0001..3.0f64) {
        let lo = occupation_from_temperature(t, 4e6).unwrap();
        let hi = occupation_from_temperature(t * factor, 4e6).unwrap();
        prop_assert!(hi > lo || (lo == 0.0 && hi == 0.0));
    }

    #[test]
    fn local_unitaries_keep_separability(v in general_state(), a in 0.0..6.3f64, b in 0.0..6.3f64) {
        let w = v.congruence(&local_rotation(Mode::One, a)).congruence(&local_rotation(Mode::Two, b));
        if let (Ok(s), Ok(t)) = (separability_margin(&v), separability_margin(&w)) {
            prop_assert!((s - t).abs() <= 1e-8 * (1.0 + s.abs()));
        }
    }
}

#[test]
fn thermal_states_mix_into_thermal_states() {
    let v = BipartiteCovariance::product(thermal_cov(0.4).unwrap(), thermal_cov(1.3).unwrap());
    let out = evolve_beam_splitter(&v, &BeamSplitterParams::coupling(0.6));
    assert!(out.v1.m.norm() < 1e-15 && out.v2.m.norm() < 1e-15);
    let c2 = 0.6f64.cos().powi(2);
    assert!((out.v1.n - (0.9 * c2 + 1.8 * (1.0 - c2))).abs() < 1e-14);
}
