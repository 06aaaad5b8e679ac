use super::*;
use crate::measures::{GridSpec, PolarGrid};
use crate::potentials::InteractionPotential;

fn quartic_rd(a: f64) -> RadialDensity {
    RadialDensity::from_potential(&ConfinementPotential::quartic(a, 0.0, 1.0), 240, 256, true)
        .unwrap()
}

/// `I₀(t)` by its power series, summed until the terms vanish.
fn bessel_i0(t: f64) -> f64 {
    let q = 0.25 * t * t;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..400 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// `∫₀^{ρ_max} f(ρ) ρ e^{−2V(ρ)} dρ / Z` on an unrelated Gauss–Legendre rule.
fn radial_oracle(v: impl Fn(f64) -> f64, rho_max: f64, f: impl Fn(f64) -> f64) -> f64 {
    let gl = GaussLegendre::new(333, 0.0, rho_max);
    let z = gl.integrate(|r| r * (-2.0 * v(r)).exp());
    gl.integrate(|r| f(r) * r * (-2.0 * v(r)).exp()) / z
}

#[test]
fn radial_density_is_normalized_with_closed_form_m2() {
    for a in [1.0, 0.05, quartic_coefficient_for_m2(3.0)] {
        let rd = quartic_rd(a);
        let mass: f64 = rd.weights().iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);
        let exact = 1.0 / (2.0 * PI * a).sqrt();
        assert!(
            (rd.m2() - exact).abs() < 1e-10 * exact,
            "a = {a}: {} vs {exact}",
            rd.m2()
        );
    }
}

#[test]
fn literal_convention_drops_the_polar_factor() {
    let v = ConfinementPotential::quartic(1.0, 0.0, 1.0);
    let rd = RadialDensity::from_potential(&v, 240, 64, false).unwrap();
    // E ρ² under e^{−2ρ⁴} dρ: Γ(3/4) / (√2 Γ(1/4))
    let exact = 1.225_416_702_465_177_6 / (2f64.sqrt() * 3.625_609_908_221_908);
    assert!((rd.m2() - exact).abs() < 1e-10, "{} vs {exact}", rd.m2());
}

#[test]
fn h_at_zero() {
    let rd = quartic_rd(1.0);
    let h = h_functions(&rd, 0.0);
    assert!((h.h - 2.0 * PI).abs() < 1e-12);
    assert!(h.h_prime.abs() < 1e-12);
    // H̃(0) = π m₂
    assert!((h.h_tilde - PI * rd.m2()).abs() < 1e-12);
}

#[test]
fn h_matches_bessel_form() {
    let rd = quartic_rd(1.0);
    let v = |r: f64| r.powi(4) + 1.0;
    for alpha in [0.1, 1.0, 5.0] {
        let exact = 2.0 * PI * radial_oracle(v, rd.rho_max(), |r| bessel_i0(alpha * r));
        let h = h_functions(&rd, alpha).h;
        assert!(
            (h - exact).abs() < 1e-10 * exact,
            "α = {alpha}: {h} vs {exact}"
        );
    }
}

#[test]
fn angular_integral_is_bessel() {
    let angles = uniform_angles(256);
    for t in [0.1, 1.0, 5.0] {
        let s: f64 = angles.iter().map(|u| (-t * u.cos()).exp()).sum::<f64>() * 2.0 * PI / 256.0;
        let exact = 2.0 * PI * bessel_i0(t);
        assert!((s - exact).abs() < 1e-10 * exact);
    }
}

#[test]
fn h_prime_matches_finite_differences() {
    let rd = quartic_rd(0.3);
    for k in 0..=10 {
        let a = 0.5 * k as f64;
        let d = 1e-4;
        let fd = (h_functions(&rd, a + d).h - h_functions(&rd, a - d).h) / (2.0 * d);
        let hp = h_functions(&rd, a).h_prime;
        let scale = hp.abs().max(1e-6 * h_functions(&rd, a).h);
        assert!((fd - hp).abs() < 1e-8 * scale, "α = {a}: {fd} vs {hp}");
    }
}

#[test]
fn large_alpha_stays_finite() {
    let rd = quartic_rd(1.0);
    let h = h_functions(&rd, 2000.0);
    assert!(h.ratio.is_finite() && h.log_h.is_finite());
    assert!(h.ratio > 0.0 && h.ratio <= rd.rho_max());
}

#[test]
fn j_examples() {
    let rd = quartic_rd(0.05);
    for theta in [0.0, 1.0, 2.0, PI] {
        assert!(j_alpha(&rd, theta, 0.0).abs() < 1e-14);
        let fd = j_prime_fd(&rd, theta, 0.0, 1e-4);
        let exact = -1.0 - theta.cos() * rd.m2();
        assert!((fd - exact).abs() < 1e-6, "θ = {theta}: {fd} vs {exact}");
        assert!(j_alpha(&rd, theta, 50.0) < -25.0);
    }
}

#[test]
fn alpha1_root_cases() {
    let sub = quartic_rd(1.0);
    assert!(sub.m2() < 1.0);
    assert_eq!(alpha1_root(&sub, PI, 1e-9).unwrap(), None);
    let sup = quartic_rd(0.05);
    assert_eq!(alpha1_root(&sup, 0.0, 1e-9).unwrap(), None);
    assert!(alpha1_root(&sup, PI, 0.0).is_err());

    // double well (ρ² − ρ₀²)²
    let r0: f64 = 1.2;
    let v = ConfinementPotential::quartic(1.0, -2.0 * r0 * r0, r0.powi(4));
    let rd = RadialDensity::from_potential(&v, 240, 256, true).unwrap();
    assert!(rd.m2() > 1.0);
    let a1 = alpha1_root(&rd, PI, 1e-9).unwrap().unwrap();
    assert!(a1 > 0.0);
    assert!(j_alpha(&rd, PI, a1).abs() < 1e-10);
    let a1_fine = alpha1_root(&rd.refined().unwrap(), PI, 1e-9)
        .unwrap()
        .unwrap();
    assert!((a1 - a1_fine).abs() < 1e-8, "{a1} vs {a1_fine}");
}

#[test]
fn classification_matches_root_existence() {
    let rds = [
        quartic_rd(1.0),
        quartic_rd(0.05),
        quartic_rd(quartic_coefficient_for_m2(3.0)),
    ];
    for rd in &rds {
        for k in 0..24 {
            let theta = 2.0 * PI * k as f64 / 24.0;
            let rep = classify_regime(rd, theta).unwrap();
            let root = alpha1_root(rd, theta, 1e-9).unwrap();
            assert_eq!(
                rep.regime == RegimeClassification::ConvergeToGamma,
                root.is_none()
            );
        }
    }
    let rd = &rds[2];
    assert_eq!(
        classify_regime(rd, 0.0).unwrap().regime,
        RegimeClassification::ConvergeToGamma
    );
    assert!(matches!(
        classify_regime(&rds[1], PI).unwrap().regime,
        RegimeClassification::ConvergeToRandomFixed { .. }
    ));
    let theta = 2.0 * PI / 3.0;
    match classify_regime(rd, theta).unwrap().regime {
        RegimeClassification::Circling { alpha1, t_theta } => {
            assert!(alpha1 > 0.0);
            assert!((t_theta - 2.0 * PI / theta.tan()).abs() < 1e-12);
        }
        other => panic!("expected circling, got {other:?}"),
    }
}

#[test]
fn threshold_is_flagged() {
    // cos θ m₂ = −1 exactly
    let rd = quartic_rd(quartic_coefficient_for_m2(2.0));
    let theta = (-1.0 / rd.m2()).acos();
    let rep = classify_regime(&rd, theta).unwrap();
    assert!(rep.warning.is_some());
    assert_eq!(rep.regime, RegimeClassification::ConvergeToGamma);
}

#[test]
fn rhs_at_equilibrium_and_on_the_pi_branch() {
    let rd = quartic_rd(quartic_coefficient_for_m2(3.0));
    let theta = 2.0 * PI / 3.0;
    let a1 = alpha1_root(&rd, theta, 1e-9).unwrap().unwrap();
    let (da, ds) = reduced_ode_rhs(&rd, theta, ReducedState::new(a1, 0.3));
    assert!(da.abs() < 1e-10);
    assert!((ds - theta.tan()).abs() < 1e-9, "{ds} vs {}", theta.tan());
    for a in [0.0, 0.3, 2.0] {
        assert!(reduced_ode_rhs(&rd, PI, ReducedState::new(a, 1.0)).1.abs() < 1e-15);
    }
}

#[test]
fn sigma_rate_series_matches_quadrature() {
    let rd = quartic_rd(0.3);
    let theta = 2.2;
    let limit = reduced_ode_rhs(&rd, theta, ReducedState::new(0.0, 0.0)).1;
    assert_eq!(limit, sigma_rate_at_zero(&rd, theta));
    let at = reduced_ode_rhs(&rd, theta, ReducedState::new(1e-6, 0.0)).1;
    assert!((limit - at).abs() < 1e-8, "{limit} vs {at}");
}

#[test]
fn reduced_trajectories() {
    let rd = quartic_rd(quartic_coefficient_for_m2(3.0));
    let theta = 2.0 * PI / 3.0;
    let a1 = alpha1_root(&rd, theta, 1e-9).unwrap().unwrap();
    let tr = integrate_reduced(&rd, theta, ReducedState::new(a1, 0.4), 5.0, 0.01).unwrap();
    let last = tr.states.last().unwrap();
    assert!(tr.states.iter().all(|s| (s.alpha - a1).abs() < 1e-10));
    let expected = (0.4 + 5.0 * theta.tan()).rem_euclid(2.0 * PI);
    let diff = (last.sigma - expected + PI).rem_euclid(2.0 * PI) - PI;
    assert!(diff.abs() < 1e-8, "{diff:e}");

    // linear decay rate at 0 is 1 + cos θ m₂ ≥ 1 for these angles
    let sub = quartic_rd(1.0);
    for theta in [0.0, 0.5 * PI] {
        let tr = integrate_reduced(&sub, theta, ReducedState::new(0.5, 0.0), 20.0, 0.01).unwrap();
        assert!(tr.states.last().unwrap().alpha < 1e-6);
    }
    // on the θ = π branch the rate is only 1 − m₂
    let tr = integrate_reduced(&sub, PI, ReducedState::new(0.5, 0.0), 20.0, 0.01).unwrap();
    let bound = 0.5 * (-(1.0 - sub.m2()) * 20.0).exp();
    assert!(tr.states.last().unwrap().alpha < bound);
    assert!(integrate_reduced(&sub, PI, ReducedState::new(0.5, 0.0), 1.0, 0.02).is_err());
}

#[test]
fn reduced_state_is_canonical() {
    let s = ReducedState::new(-1.0, 7.0);
    assert_eq!(s.alpha, 1.0);
    assert!((s.sigma - (7.0 + PI).rem_euclid(2.0 * PI)).abs() < 1e-15);
    let m = ReducedState::new(2.0, 0.5).mean();
    let back = ReducedState::from_mean(m);
    assert!((back.alpha - 2.0).abs() < 1e-15 && (back.sigma - 0.5).abs() < 1e-15);
}

fn model_for(a: f64, n_rho: usize, n_angle: usize) -> GibbsModel {
    let v = ConfinementPotential::quartic(a, 0.0, 1.0);
    let grid = PolarGrid::new(GridSpec::for_potential(&v, n_rho, n_angle).unwrap()).unwrap();
    GibbsModel::new(v, InteractionPotential::LinearRotation { theta: PI }, grid).unwrap()
}

#[test]
fn limit_measure_mean_and_equivariance() {
    let a = 0.05;
    let rd = quartic_rd(a);
    let model = model_for(a, 128, 64);
    let a1 = alpha1_root(&rd, PI, 1e-9).unwrap().unwrap();
    let v = [0.6, 0.8];
    let mu = limit_measure(&model, v, a1).unwrap();
    let m = mu.mean2();
    assert!(
        (m[0].hypot(m[1]) - a1 / 2.0).abs() < 1e-6,
        "{m:?} vs {}",
        a1 / 2.0
    );
    assert!((m[1].atan2(m[0]) - 0.8f64.atan2(0.6)).abs() < 1e-9);

    let g0 = limit_measure(&model, v, 0.0).unwrap();
    assert!(g0.max_abs_diff(model.gamma()) < 1e-15);

    // rotating v by k grid steps rotates the density by k angular nodes
    let n_angle = model.grid().n_angle();
    let k = 5;
    let phi = 2.0 * PI * k as f64 / n_angle as f64;
    let base = limit_measure(&model, [1.0, 0.0], a1).unwrap();
    let turned = limit_measure(&model, [phi.cos(), phi.sin()], a1).unwrap();
    for i in 0..model.grid().n_rho() {
        for j in 0..n_angle {
            let x = base.density_at(i, j);
            let y = turned.density_at(i, (j + k) % n_angle);
            assert!(
                (x - y).abs() <= 1e-12 * x.max(1e-300),
                "{i},{j}: {x} vs {y}"
            );
        }
    }
}

#[test]
fn limit_measure_is_a_fixed_point_on_the_pi_branch() {
    let a = 0.05;
    let rd = quartic_rd(a);
    let model = model_for(a, 128, 64);
    let a1 = alpha1_root(&rd, PI, 1e-9).unwrap().unwrap();
    let mu = limit_measure(&model, [0.0, 1.0], a1).unwrap();
    let pi = model.pi_map(&mu).unwrap().measure;
    assert!(model.v_norm(&pi.difference(&mu).unwrap()) < 1e-6);
}

#[test]
fn orbit_measure_mean_and_periodicity() {
    let a = quartic_coefficient_for_m2(3.0);
    let rd = quartic_rd(a);
    let theta = 2.0 * PI / 3.0;
    let model =
        model_for(a, 64, 64).with_interaction(InteractionPotential::LinearRotation { theta });
    let a1 = alpha1_root(&rd, theta, 1e-9).unwrap().unwrap();
    let delta = 0.7;
    let nu = periodic_orbit_measure(&model, theta, a1, delta, OrbitReading::Flowed).unwrap();
    let m = nu.mean2();
    assert!(
        (m[0].hypot(m[1]) - a1 / 2.0).abs() < 1e-6,
        "{m:?} vs {}",
        a1 / 2.0
    );
    assert!((m[1].atan2(m[0]) - delta).abs() < 1e-6);
    let again =
        periodic_orbit_measure(&model, theta, a1, delta + 2.0 * PI, OrbitReading::Flowed).unwrap();
    assert!(nu.max_abs_diff(&again) < 1e-12);

    // each constituent has mean norm α₁ / (2 |cos θ|)
    let lit = periodic_orbit_measure(&model, theta, a1, delta, OrbitReading::Literal).unwrap();
    let ml = lit.mean2();
    assert!((ml[0].hypot(ml[1]) - a1 / (2.0 * theta.cos().abs())).abs() < 1e-6);

    assert!(periodic_orbit_measure(&model, PI, a1, 0.0, OrbitReading::Flowed).is_err());
    assert!(periodic_orbit_measure(&model, 0.3, a1, 0.0, OrbitReading::Flowed).is_err());
}

#[test]
fn symmetry_integrals_vanish() {
    let model = model_for(1.0, 64, 256);
    let g = model.gamma();
    let (i1, i2) = symmetry_integrals(g, [1.0, 0.0], &|_| 1.0).unwrap();
    assert_eq!(i1, 0.0);
    assert!(i2[0].abs() < 1e-14 && i2[1].abs() < 1e-14);
    let (i1, _) = symmetry_integrals(g, [1.0, 0.0], &|u| u).unwrap();
    assert_eq!(i1, 0.0);
    let ang = 37f64.to_radians();
    let (i1, i2) = symmetry_integrals(g, [ang.cos(), ang.sin()], &|u| (-u).exp()).unwrap();
    assert!(
        i1.abs() < 1e-8 && i2[0].abs() < 1e-8 && i2[1].abs() < 1e-8,
        "{i1:e} {i2:?}"
    );
    assert!(symmetry_integrals(g, [2.0, 0.0], &|u| u).is_err());
}

#[test]
fn third_derivative_signs() {
    // Gaussian γ: J is linear, so J‴ vanishes everywhere
    let gauss = RadialDensity::from_potential(
        &ConfinementPotential::quartic(0.0, 1.0, 1.0),
        240,
        256,
        true,
    )
    .unwrap();
    assert!(j_third_derivative(&gauss, 0.0, 1e-2).abs() < 1e-4);
    assert!(j_third_derivative(&gauss, 1.0, 1e-2).abs() < 1e-4);

    // otherwise J‴(0) = 2κ₄ of the first coordinate, κ₄ = (3/8) m₄ − (3/4) m₂²
    let rd = quartic_rd(1.0);
    let kappa4 = 0.375 * rd.m4() - 0.75 * rd.m2() * rd.m2();
    let d0 = j_third_derivative(&rd, 0.0, 1e-2);
    assert!((d0 - 2.0 * kappa4).abs() < 1e-4, "{d0} vs {}", 2.0 * kappa4);
    assert!(d0 < 0.0);
    let rep = kurtosis_sign_check(&rd, &[0.5, 1.0, 2.0]).unwrap();
    assert!(rep.passed, "{rep:?}");
    assert!(rep.third_derivative.iter().all(|(_, d)| *d < 0.0));
    let jp: Vec<f64> = rep.first_derivative.iter().map(|(_, d)| *d).collect();
    assert!(jp[2] <= jp[1] && jp[1] <= jp[0]);
    assert!(kurtosis_sign_check(&rd, &[0.0]).is_err());
}
