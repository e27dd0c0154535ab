//! Centre-of-mass laws against direct quadrature and against the full
//! Gross-Pitaevskii dynamics.

use proptest::prelude::*;
use socbec_core::com_dynamics::{self, ComClosedFormInputs, LdaState};
use socbec_core::dynamics::Stepper;
use socbec_core::{make_grid, model, Axis, Complex64, Params, Spinor};

/// `x(t)` for `x'' + g^2 x = -k0 dN'(s)`, `x(0) = x0`, `x'(0) = P0 - k0 dN0`,
/// by Duhamel's formula with composite Simpson on `n` panels. `dN'` is
/// differentiated by hand from `dN0 cos(W s) + C0 sin(W s)`.
fn duhamel(i: &ComClosedFormInputs, t: f64, n: usize) -> f64 {
    let (g, w) = (i.gamma_x, i.omega);
    let force = |s: f64| -i.k0 * w * (-i.delta_n0 * (w * s).sin() + i.c0 * (w * s).cos());
    let kernel = |s: f64| (g * (t - s)).sin() / g * force(s);
    let h = t / n as f64;
    let mut acc = kernel(0.0) + kernel(t);
    for j in 1..n {
        acc += if j % 2 == 1 { 4.0 } else { 2.0 } * kernel(j as f64 * h);
    }
    let v0 = i.p0x - i.k0 * i.delta_n0;
    i.x0 * (g * t).cos() + v0 * (g * t).sin() / g + acc * h / 3.0
}

fn inputs() -> impl Strategy<Value = ComClosedFormInputs> {
    (
        -2.0..2.0f64,
        -2.0..2.0f64,
        -1.0..1.0f64,
        -1.0..1.0f64,
        0.5..3.0f64,
        0.1..6.0f64,
        any::<bool>(),
        -1.0..1.0f64,
    )
        .prop_filter_map("near resonance", |(x0, p0x, dn, c0, g, w, neg, k0)| {
            let omega = if neg { -w } else { w };
            ((w - g).abs() > 0.05).then_some(ComClosedFormInputs {
                x0,
                p0x,
                delta_n0: dn,
                c0,
                gamma_x: g,
                omega,
                k0,
                delta: 0.0,
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn closed_form_solves_the_forced_oscillator(i in inputs(), t in 0.0..8.0f64) {
        let want = duhamel(&i, t, 4000);
        let got = com_dynamics::xc_closed_form(&i, t);
        prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{got} vs {want}");
    }
}

#[test]
fn resonant_branch_solves_the_forced_oscillator() {
    for omega in [1.5, -1.5] {
        let i = ComClosedFormInputs {
            x0: 0.7,
            p0x: -0.4,
            delta_n0: 0.6,
            c0: -0.3,
            gamma_x: 1.5,
            omega,
            k0: 0.4,
            delta: 0.0,
        };
        assert!(i.is_resonant());
        for t in [0.0, 0.5, 3.0, 9.0] {
            let want = duhamel(&i, t, 8000);
            let got = com_dynamics::xc_closed_form(&i, t);
            assert!(
                (got - want).abs() < 1e-10,
                "omega {omega}, t {t}: {got} vs {want}"
            );
        }
    }
}

/// A state with nonzero coherence, momentum and imbalance.
fn asymmetric_state(g: &socbec_core::Grid) -> Spinor {
    let x = g.coordinate(0);
    let bump = |c: f64, k: f64, amp: Complex64| -> Vec<Complex64> {
        x.iter()
            .map(|x| amp * (-(x - c) * (x - c) / 2.0).exp() * Complex64::from_polar(1.0, k * x))
            .collect()
    };
    let mut s = Spinor::new(
        bump(1.0, 0.3, Complex64::new(1.0, 0.0)),
        bump(0.5, -0.2, Complex64::new(0.3, 0.5)),
    )
    .unwrap();
    s.normalize(g);
    s
}

#[test]
fn exact_law_matches_second_difference_of_the_dynamics() {
    let g = make_grid(vec![Axis::fourier(-12.0, 12.0, 128).unwrap()]).unwrap();
    let p = Params {
        k0: 0.8,
        omega: 3.0,
        delta: 0.4,
        gamma: [1.2, 1.0, 1.0],
        ..Params::default().with_betas(4.0, 2.0, 3.0)
    };
    let psi0 = asymmetric_state(&g);
    let xc = |s: &Spinor| model::observables(&g, s, &p).unwrap().xc[0];
    for tau in [2e-3, 1e-3] {
        let fwd = Stepper::new(&g, &p, tau).unwrap();
        let back = Stepper::new(&g, &p, -tau).unwrap();
        let (mut a, mut b) = (psi0.clone(), psi0.clone());
        fwd.step(&mut a).unwrap();
        back.step(&mut b).unwrap();
        let second = (xc(&a) - 2.0 * xc(&psi0) + xc(&b)) / (tau * tau);
        let law = com_dynamics::com_rhs_exact(&g, &psi0, &p).unwrap()[0];
        assert!(
            (second - law).abs() < 1e-4 * law.abs().max(1.0),
            "tau {tau}: {second} vs {law}"
        );
    }
}

#[test]
fn closed_form_inputs_are_read_from_the_lab_state() {
    let g = make_grid(vec![Axis::fourier(-12.0, 12.0, 128).unwrap()]).unwrap();
    let p = Params {
        k0: 0.5,
        omega: 2.0,
        ..Params::default()
    };
    let phi = asymmetric_state(&g);
    let i = ComClosedFormInputs::from_spinor(&g, &phi, &p).unwrap();
    let c = model::spin_coherence(&g, &phi).unwrap();
    let obs = model::observables(&g, &phi, &p).unwrap();
    assert_eq!(i.c0, 2.0 * c.im);
    assert_eq!((i.x0, i.delta_n0), (obs.xc[0], obs.delta_n));
    // Tilde-frame input describes the same physical state.
    let tilde = model::gauge_transform(&g, &phi, p.k0, model::GaugeDirection::ToTilde).unwrap();
    let pt = Params {
        frame: socbec_core::Frame::Tilde,
        ..p
    };
    let j = ComClosedFormInputs::from_spinor(&g, &tilde, &pt).unwrap();
    assert!((i.p0x - j.p0x).abs() < 1e-12 && (i.c0 - j.c0).abs() < 1e-12);
}

#[test]
fn lda_orbit_keeps_its_invariant_and_closes() {
    let p = Params {
        k0: 1.5,
        omega: 4.0,
        delta: 0.3,
        gamma: [1.0, 1.0, 1.0],
        ..Params::default()
    };
    let start = LdaState::from_moments(1.0, 0.2, p.k0);
    let series = com_dynamics::lda_ode_solve(start, &p, 1e-3, 20.0).unwrap();
    assert!(
        series.invariant_drift() < 1e-10,
        "{}",
        series.invariant_drift()
    );
    let orbit = com_dynamics::lda_orbit_return(start, &p, 1e-3, 40.0)
        .unwrap()
        .unwrap();
    assert!(orbit.distance < 1e-8, "{orbit:?}");
    // The return time is also a period of the sampled series.
    let k = (orbit.period / 1e-3).round() as usize;
    let later = series.states[k];
    assert!((later.xc - start.xc).abs() < 1e-2 && (later.px - start.px).abs() < 1e-2);
    // Strong Raman coupling makes the force nearly linear in P, which
    // stretches the period relative to the bare trap.
    assert!(orbit.period > 2.0 * std::f64::consts::PI);
}
