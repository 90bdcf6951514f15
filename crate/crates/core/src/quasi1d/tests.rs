use super::*;
use crate::fixtures;
use approx::assert_abs_diff_eq;

fn params(s: &PoreScenario) -> DimensionlessParams {
    nondimensionalize(s).unwrap()
}

fn quick() -> QuasiOptions {
    QuasiOptions { axial_intervals: 200, ..Default::default() }
}

#[test]
fn lift_examples() {
    let s = fixtures::cylinder(0.0);
    let p = params(&s);
    let l = boundary_lift(&s.with_voltage(0.0).bc, &p);
    assert_eq!((l.q_left, l.s_left, l.q_right, l.s_right), (1.0, 1.0, 1.0, 1.0));
    let l = boundary_lift(&s.with_voltage(0.2).bc, &p);
    assert_abs_diff_eq!(l.s_right, 8f64.exp(), epsilon = 1e-9);
    assert_abs_diff_eq!(l.q_right, (-8f64).exp(), epsilon = 1e-15);
    let m = boundary_lift(&s.with_voltage(-0.2).bc, &p);
    assert_abs_diff_eq!(m.s_right, l.q_right, epsilon = 1e-15);
}

#[test]
fn residual_vanishes_for_constant_and_linear_states() {
    let s = fixtures::cylinder(0.0);
    let p = params(&s);
    let grid = AxialGrid::uniform(50).unwrap();
    let ones = vec![1.0; 51];
    let (r1, r2) = assemble_residual(&ones, &ones, &grid, &p, &s).unwrap();
    assert!(r1.iter().chain(&r2).all(|v| *v == 0.0));
    // S linear with Q = S keeps theta constant
    let lin: Vec<f64> = grid.x.iter().map(|x| 1.0 + 0.5 * x).collect();
    let (r1, r2) = assemble_residual(&lin, &lin, &grid, &p, &s).unwrap();
    assert!(r1.iter().chain(&r2).all(|v| v.abs() < 1e-10));
}

#[test]
fn equilibrium_has_zero_current() {
    for name in ["trumpet", "cylinder_charged", "cylinder"] {
        let s = fixtures::builtin(name).unwrap();
        let sol = solve_steady(&s, 0.0, &quick()).unwrap();
        assert!(sol.current_i.abs() < 1e-10, "{name}: {}", sol.current_i);
        assert!(sol.q.iter().chain(&sol.s).all(|v| (v - 1.0).abs() < 1e-12));
    }
}

#[test]
fn uncharged_cylinder_is_ohmic() {
    let s = fixtures::cylinder(0.0);
    let p = params(&s);
    let sol = solve_steady(&s, 0.05, &quick()).unwrap();
    let area = std::f64::consts::PI * 25.0;
    let ohmic = -area * (p.kappa_p + p.kappa_n) * 2.0;
    assert!(((sol.current_i - ohmic) / ohmic).abs() < 1e-3, "{} vs {}", sol.current_i, ohmic);
    let (mean, dev) = current(&sol, &s, &p).unwrap();
    assert_abs_diff_eq!(mean, sol.current_i, epsilon = 1e-9 * ohmic.abs());
    assert!(dev < 1e-6 * ohmic.abs());
}

#[test]
fn charged_solution_conserves_flux_and_stays_positive() {
    let s = fixtures::trumpet(1.0);
    let sol = solve_steady(&s, 0.1, &quick()).unwrap();
    assert!(sol.q.iter().chain(&sol.s).all(|v| *v > 0.0));
    assert!(sol.current_deviation <= 1e-6 * sol.current_i.abs());
    let p = params(&s);
    let lift = boundary_lift(&s.with_voltage(0.1).bc, &p);
    let n = sol.x.len() - 1;
    assert_eq!((sol.q[0], sol.s[0], sol.q[n], sol.s[n]), (lift.q_left, lift.s_left, lift.q_right, lift.s_right));
}

#[test]
fn mirror_symmetric_pore_gives_odd_current() {
    let s = fixtures::cylinder(0.5);
    let a = solve_steady(&s, 0.1, &quick()).unwrap();
    let b = solve_steady(&s, -0.1, &quick()).unwrap();
    assert!(((a.current_i + b.current_i) / a.current_i).abs() < 1e-8);
}

#[test]
fn gauge_shift_leaves_current_unchanged() {
    let s = fixtures::trumpet(1.0);
    let a = solve_steady(&s, 0.05, &quick()).unwrap();
    let opts = QuasiOptions { potential_offset: 1.7, ..quick() };
    let b = solve_steady(&s, 0.05, &opts).unwrap();
    assert!((a.current_i - b.current_i).abs() < 1e-8 * a.current_i.abs());
}

#[test]
fn reconstructed_fields_factor() {
    let s = fixtures::trumpet(1.0);
    let sol = solve_steady(&s, 0.1, &quick()).unwrap();
    let f = reconstruct_fields(&sol, &s, 9).unwrap();
    for i in (0..sol.x.len()).step_by(17) {
        for k in 0..9 {
            let j = f.index(i, k);
            let qs = sol.q[i] * sol.s[i];
            assert!((f.n[j] * f.p[j] / qs - 1.0).abs() < 1e-10);
        }
    }
    let u = fixtures::cylinder(0.0);
    let sol = solve_steady(&u, 0.05, &quick()).unwrap();
    let f = reconstruct_fields(&sol, &u, 5).unwrap();
    let j = f.index(40, 3);
    // uncharged: psi = 0, so n = p = sqrt(QS) and phi = ln sqrt(S/Q) at every radius
    let c = (sol.q[40] * sol.s[40]).sqrt();
    assert_abs_diff_eq!(f.n[j], c, epsilon = 1e-12);
    assert_abs_diff_eq!(f.p[j], c, epsilon = 1e-12);
    assert_abs_diff_eq!(f.phi[j], 0.5 * (sol.s[40] / sol.q[40]).ln(), epsilon = 1e-12);
    assert_eq!(f.n[f.index(40, 0)], f.n[f.index(40, 4)]);
}

#[test]
fn mu_phi_matches_fixed_point() {
    let s = fixtures::trumpet(1.0);
    for v in [0.0, 0.1, -0.2] {
        let a = solve_steady(&s, v, &quick()).unwrap();
        let b = solve_steady_mu_phi(&s, v, &quick()).unwrap();
        if v != 0.0 {
            assert!(((a.current_i - b.current_i) / a.current_i).abs() < 5e-3, "{} vs {}", a.current_i, b.current_i);
        }
        let (q, sv) = (b.q(), b.s());
        for i in 0..q.len() {
            assert!((q[i] / a.q[i] - 1.0).abs() < 5e-3);
            assert!((sv[i] / a.s[i] - 1.0).abs() < 5e-3);
        }
        assert!(b.neutrality_residual().iter().all(|r| r.abs() < 1e-8));
    }
}

#[test]
fn sweep_visits_every_voltage() {
    let s = fixtures::trumpet(1.0);
    let v: Vec<f64> = (0..5).map(|k| -0.1 + 0.05 * k as f64).collect();
    let iv = iv_sweep(&s, &v, &quick()).unwrap();
    assert!(iv.all_converged());
    assert_eq!(iv.voltages(), v);
    assert!(iv.current_at(0.0).unwrap().abs() < 1e-10);
    assert!(iv_sweep(&s, &[0.1, 0.0, 0.2], &quick()).is_err());
}
