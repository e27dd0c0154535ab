//! Ground-state solver checks, including dense-matrix oracles built on the
//! explicit Fourier interpolation matrices.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use socbec_core::ground_state::{
    self, gfdn_solve, multi_start, GfdnOptions, InitialGuess, LimitKind,
};
use socbec_core::model::{self, GaugeDirection};
use socbec_core::{make_grid, Axis, Complex64, Frame, Grid, Params, Potential, Spinor};

fn line(lo: f64, hi: f64, n: usize) -> Grid {
    make_grid(vec![Axis::fourier(lo, hi, n).unwrap()]).unwrap()
}

/// Dense `(K, D)` with `K = -1/2 d^2/dx^2` and `D = d/dx` from the trigonometric
/// interpolant, summing the Fourier series explicitly. The Nyquist mode is
/// dropped from `D` so it stays real antisymmetric.
fn spectral_matrices(g: &Grid) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = g.len();
    let len = g.axis(0).length();
    let x = g.nodes(0);
    let mut k = DMatrix::zeros(n, n);
    let mut d = DMatrix::zeros(n, n);
    let half = (n / 2) as i64;
    for j in 0..n {
        for l in 0..n {
            let dx = x[j] - x[l];
            let (mut ks, mut ds) = (0.0, 0.0);
            for m in -half..half {
                let mu = 2.0 * PI * m as f64 / len;
                ks += 0.5 * mu * mu * (mu * dx).cos();
                if m != -half {
                    ds -= mu * (mu * dx).sin();
                }
            }
            k[(j, l)] = ks / n as f64;
            d[(j, l)] = ds / n as f64;
        }
    }
    (k, d)
}

/// Lab-frame Hamiltonian at fixed densities `rho = (|phi1|^2, |phi2|^2)`.
fn dense_hamiltonian(g: &Grid, p: &Params, rho: Option<(&[f64], &[f64])>) -> DMatrix<Complex64> {
    let n = g.len();
    let (k, d) = spectral_matrices(g);
    let x = g.nodes(0);
    let mut h = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        for l in 0..n {
            let so = Complex64::new(0.0, p.k0 * d[(j, l)]);
            h[(j, l)] = Complex64::new(k[(j, l)], 0.0) + so;
            h[(n + j, n + l)] = Complex64::new(k[(j, l)], 0.0) - so;
        }
        let v = 0.5 * p.gamma[0].powi(2) * x[j] * x[j];
        let (r1, r2) = rho.map_or((0.0, 0.0), |(a, b)| (a[j], b[j]));
        h[(j, j)] += v + 0.5 * p.delta + p.beta11 * r1 + p.beta12 * r2;
        h[(n + j, n + j)] += v - 0.5 * p.delta + p.beta12 * r1 + p.beta22 * r2;
        h[(j, n + j)] += 0.5 * p.omega;
        h[(n + j, j)] += 0.5 * p.omega;
    }
    h
}

fn to_spinor(v: &DVector<Complex64>, g: &Grid) -> Spinor {
    let n = g.len();
    let mut s = Spinor::new(
        v.rows(0, n).iter().copied().collect(),
        v.rows(n, n).iter().copied().collect(),
    )
    .unwrap();
    s.normalize(g);
    s
}

/// Fully implicit imaginary time on the dense matrices:
/// `(I/tau + H(phi^n)) phi* = phi^n / tau`, then normalize.
fn dense_imaginary_time(g: &Grid, p: &Params, start: &Spinor, tau: f64, tol: f64) -> Spinor {
    let n = g.len();
    let mut phi = start.clone();
    for _ in 0..100_000 {
        let rho = (phi.density(1), phi.density(2));
        let mut a = dense_hamiltonian(g, p, Some((&rho.0, &rho.1)));
        for i in 0..2 * n {
            a[(i, i)] += 1.0 / tau;
        }
        let rhs = DVector::from_iterator(2 * n, phi.psi1.iter().chain(&phi.psi2).map(|z| z / tau));
        let sol = a.lu().solve(&rhs).expect("nonsingular");
        let next = to_spinor(&sol, g);
        let moved = next.max_diff(&phi) / tau;
        phi = next;
        if moved < tol {
            return phi;
        }
    }
    panic!("dense oracle did not converge");
}

fn modulus_gap(g: &Grid, a: &Spinor, b: &Spinor) -> f64 {
    model::modulus_distance(g, &a.psi1, &b.psi1) + model::modulus_distance(g, &a.psi2, &b.psi2)
}

#[test]
fn negative_raman_ground_state_matches_dense_oracle_and_sign_structure() {
    let g = line(-8.0, 8.0, 64);
    let p = Params {
        omega: -2.0,
        ..Params::default().with_betas(10.0, 10.0, 10.0)
    };
    let opts = GfdnOptions {
        tol: 1e-10,
        ..GfdnOptions::default()
    };
    let r = multi_start(&p, &g, &opts, &ground_state::default_starts(&p)).unwrap();
    assert!(r.converged);
    let start = ground_state::initial_state(&g, &p, &InitialGuess::GaussianOpposite).unwrap();
    let oracle = dense_imaginary_time(&g, &p, &start, 0.1, 1e-10);
    let e_oracle = model::energy(&g, &oracle, &p).unwrap();
    assert!(
        (r.energy - e_oracle).abs() < 1e-8,
        "{} vs {e_oracle}",
        r.energy
    );
    assert!(modulus_gap(&g, &r.phi, &oracle) < 1e-6);
    // Real up to a global phase, both components nonnegative after fixing the sign.
    let pivot = r.phi.psi2[g.len() / 2];
    let unphase = pivot.conj() / pivot.norm();
    let big = r
        .phi
        .psi1
        .iter()
        .chain(&r.phi.psi2)
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    for z in r.phi.psi1.iter().chain(&r.phi.psi2) {
        let w = z * unphase;
        assert!(w.im.abs() < 1e-8 * big);
        assert!(w.re > -1e-8 * big);
    }
}

#[test]
fn linear_spin_orbit_ground_state_is_the_lowest_eigenvector() {
    let g = line(-8.0, 8.0, 64);
    for omega in [-2.0, 3.0] {
        let p = Params {
            k0: 0.5,
            omega,
            delta: 0.3,
            ..Params::default()
        };
        let opts = GfdnOptions {
            tol: 1e-10,
            ..GfdnOptions::default()
        };
        let r = multi_start(&p, &g, &opts, &ground_state::default_starts(&p)).unwrap();
        assert!(r.converged);
        let eig = dense_hamiltonian(&g, &p, None).symmetric_eigen();
        let (imin, lmin) =
            eig.eigenvalues
                .iter()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |b, (i, v)| if *v < b.1 { (i, *v) } else { b },
                );
        let vec = eig.eigenvectors.column(imin).into_owned();
        let oracle = to_spinor(&vec, &g);
        assert!((r.energy - lmin).abs() < 1e-9, "{} vs {lmin}", r.energy);
        assert!((r.mu - lmin).abs() < 1e-9);
        assert!(modulus_gap(&g, &r.phi, &oracle) < 1e-6);
        // Raman overlap has the sign of -Omega.
        let overlap = model::raman_overlap(&g, &r.phi, &p).unwrap();
        assert!(overlap * omega < 0.0);
    }
}

#[test]
fn energy_decreases_along_iterates_and_norm_is_kept() {
    let g = line(-8.0, 8.0, 64);
    let p = Params {
        k0: 1.0,
        omega: -2.0,
        delta: 0.5,
        ..Params::default().with_betas(10.0, 5.0, 8.0)
    };
    for tau in [0.01, 0.1] {
        let mut phi = ground_state::initial_state(&g, &p, &InitialGuess::GaussianPair).unwrap();
        let mut stepper = ground_state::Gfdn::new(&g, &p, tau, 0.0).unwrap();
        let mut e = model::energy(&g, &phi, &p).unwrap();
        for it in 0..2000 {
            if it % ground_state::SHIFT_REFRESH == 0 {
                stepper.set_shift(stepper.default_shift(&phi)).unwrap();
            }
            phi = stepper.step(&phi).unwrap();
            assert!((phi.mass(&g) - 1.0).abs() < 1e-13);
            let next = model::energy(&g, &phi, &p).unwrap();
            assert!(
                next <= e + 1e-10,
                "tau {tau}, iteration {it}: {e} -> {next}"
            );
            e = next;
        }
    }
}

#[test]
fn converged_state_solves_the_eigenvalue_problem() {
    let g = line(-8.0, 8.0, 64);
    let p = Params {
        k0: 1.0,
        omega: -2.0,
        ..Params::default().with_betas(10.0, 5.0, 8.0)
    };
    let tol = 1e-8;
    let opts = GfdnOptions {
        tol,
        ..GfdnOptions::default()
    };
    let r = multi_start(&p, &g, &opts, &ground_state::default_starts(&p)).unwrap();
    assert!(r.converged);
    let res = model::eigen_residual(&g, &r.phi, &p).unwrap();
    assert!(res <= 10.0 * tol, "{res}");
}

#[test]
fn spin_orbit_shift_without_raman_is_the_gauge_offset() {
    let g = line(-16.0, 16.0, 128);
    let base = Params::default().with_betas(10.0, 10.0, 10.0);
    let opts = GfdnOptions {
        tol: 1e-9,
        ..GfdnOptions::default()
    };
    let e0 = multi_start(&base, &g, &opts, &ground_state::default_starts(&base))
        .unwrap()
        .energy;
    for k0 in [1.0, 2.0] {
        let p = Params { k0, ..base };
        let r = multi_start(&p, &g, &opts, &ground_state::default_starts(&p)).unwrap();
        assert!(
            (r.energy - (e0 - 0.5 * k0 * k0)).abs() < 1e-6,
            "k0 {k0}: {}",
            r.energy
        );
    }
}

#[test]
fn sine_solver_at_zero_spin_orbit_matches_the_lab_flow() {
    let ax = Axis::sine(-1.0, 1.0, 32).unwrap();
    let g = make_grid(vec![ax, ax]).unwrap();
    let lab = Params {
        omega: 5.0,
        potential: Potential::Box,
        frame: Frame::Lab,
        ..Params::default().with_betas(10.0, 9.0, 9.0)
    };
    let tilde = Params {
        frame: Frame::Tilde,
        ..lab
    };
    let opts = GfdnOptions {
        tol: 1e-9,
        init: InitialGuess::SinePair,
        ..GfdnOptions::default()
    };
    let a = gfdn_solve(&lab, &g, &opts).unwrap();
    let b = ground_state::besp_solve(&tilde, &g, &opts).unwrap();
    assert!(a.converged && b.converged);
    assert!((a.energy - b.energy).abs() < 1e-8);
    assert!(a.phi.max_diff(&b.phi) < 1e-8);
    assert!(b.lab_view.is_some());
    assert!(ground_state::besp_solve(&lab, &g, &opts).is_err());
}

#[test]
fn lab_view_of_a_tilde_result_is_the_gauge_image() {
    let ax = Axis::sine(-1.0, 1.0, 24).unwrap();
    let g = make_grid(vec![ax, ax]).unwrap();
    let p = Params {
        k0: 3.0,
        omega: 10.0,
        potential: Potential::Box,
        frame: Frame::Tilde,
        ..Params::default().with_betas(10.0, 9.0, 9.0)
    };
    let r = multi_start(
        &p,
        &g,
        &GfdnOptions::default(),
        &ground_state::default_starts(&p),
    )
    .unwrap();
    let lab = model::gauge_transform(&g, &r.phi, p.k0, GaugeDirection::ToLab).unwrap();
    assert_eq!(r.lab_view.as_ref().unwrap(), &lab);
}

#[test]
fn without_raman_the_weaker_component_takes_all_mass() {
    // beta22 < beta11 with beta12 = beta22: the ground state is (0, phi_g).
    let ax = Axis::sine(-1.0, 1.0, 32).unwrap();
    let g = make_grid(vec![ax, ax]).unwrap();
    let p = Params {
        potential: Potential::Box,
        frame: Frame::Tilde,
        ..Params::default().with_betas(10.0, 9.0, 9.0)
    };
    let starts = [
        InitialGuess::SingleComponent(1),
        InitialGuess::SingleComponent(2),
    ];
    let best = multi_start(&p, &g, &GfdnOptions::default(), &starts).unwrap();
    let other = gfdn_solve(&p, &g, &GfdnOptions::default().with_init(starts[0].clone())).unwrap();
    assert!(best.energy < other.energy);
    assert!(best.phi.component_mass(&g, 1).sqrt() <= 1e-3);
}

#[test]
fn multi_start_selects_the_minimum() {
    let g = line(-8.0, 8.0, 64);
    let p = Params {
        omega: 1.0,
        ..Params::default().with_betas(5.0, 20.0, 5.0)
    };
    let opts = GfdnOptions::default();
    let starts = [
        InitialGuess::GaussianPair,
        InitialGuess::GaussianOpposite,
        InitialGuess::SingleComponent(1),
    ];
    let best = multi_start(&p, &g, &opts, &starts).unwrap();
    for s in &starts {
        let r = gfdn_solve(&p, &g, &opts.clone().with_init(s.clone())).unwrap();
        assert!(best.energy <= r.energy);
    }
    let single = multi_start(&p, &g, &opts, &starts[..1]).unwrap();
    assert_eq!(
        single,
        gfdn_solve(&p, &g, &opts.clone().with_init(starts[0].clone())).unwrap()
    );
    let twice = multi_start(&p, &g, &opts, &[starts[1].clone(), starts[1].clone()]).unwrap();
    assert_eq!(twice, multi_start(&p, &g, &opts, &starts[1..2]).unwrap());
}

#[test]
fn large_detuning_empties_the_first_component() {
    let g = line(-8.0, 8.0, 64);
    let p = Params {
        omega: 2.0,
        k0: 1.0,
        ..Params::default().with_betas(10.0, 10.0, 10.0)
    };
    let r = ground_state::limit_study(
        LimitKind::LargeDelta,
        &p,
        &g,
        &GfdnOptions::default(),
        &[10.0, 40.0, 160.0],
    )
    .unwrap();
    let d: Vec<f64> = r.rows.iter().map(|r| r.diagnostic).collect();
    assert!(r.rows.iter().all(|r| r.state.converged));
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}

#[test]
fn strong_spin_orbit_energy_competition_is_negative_and_grows() {
    let g = line(-8.0, 8.0, 128);
    let sweep = [16.0, 24.0, 32.0];
    let study = |beta: f64| {
        let p = Params {
            k0: 8.0,
            ..Params::default().with_betas(beta, beta, beta)
        };
        ground_state::limit_study(
            LimitKind::EnergyCompetition,
            &p,
            &g,
            &GfdnOptions::default(),
            &sweep,
        )
        .unwrap()
    };
    // Without interaction the O(1) remainder is small enough for the sign
    // to show already at these couplings.
    let r = study(0.0);
    let d: Vec<f64> = r.rows.iter().map(|r| r.diagnostic).collect();
    assert!(d.iter().all(|v| *v < 0.0), "{d:?}");
    assert!(d[0].abs() < d[1].abs() && d[1].abs() < d[2].abs(), "{d:?}");
    assert!(r.c0.unwrap() > 0.0);
    // With interaction the offset is larger but the Omega^2 trend is the same.
    let r = study(10.0);
    let d: Vec<f64> = r.rows.iter().map(|r| r.diagnostic).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    assert!(r.c0.unwrap() > 0.0);
}
