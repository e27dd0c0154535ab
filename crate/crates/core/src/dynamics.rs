//! Real-time evolution by Strang splitting.
//!
//! Lab frame on a Fourier grid uses the time-splitting Fourier pseudospectral
//! scheme: the linear part (kinetic, spin-orbit, detuning, Raman) is a 2x2
//! constant-coefficient system per mode and is integrated exactly. The tilde
//! frame (and in particular the box potential on a sine grid) splits
//! kinetic, pointwise and Raman rotation substeps, each exact.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::{self, Frame, Observables, Params, Spinor};

type Mat2 = [[Complex64; 2]; 2];

fn mat_vec(m: &Mat2, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    (m[0][0] * a + m[0][1] * b, m[1][0] * a + m[1][1] * b)
}

/// Exact half-step flow of one Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePropagator {
    pub chi: f64,
    pub lambda: f64,
    /// Eigenvector matrix; only meaningful when `Omega != 0`.
    pub q: [[f64; 2]; 2],
    pub u: [f64; 2],
    /// `Q^T e^{-i tau U / 4} Q`.
    pub matrix: Mat2,
}

impl ModePropagator {
    /// `mu2` is `|mu_k|^2`, `mux` the x wavenumber.
    pub fn new(mu2: f64, mux: f64, params: &Params, tau: f64) -> Self {
        let chi = params.k0 * mux - 0.5 * params.delta;
        let omega = params.omega;
        let phase = |u: f64| Complex64::from_polar(1.0, -0.25 * tau * u);
        let zero = Complex64::default();
        if omega == 0.0 {
            let u = [mu2 - 2.0 * chi, mu2 + 2.0 * chi];
            return Self {
                chi,
                lambda: chi.abs(),
                q: [[1.0, 0.0], [0.0, 1.0]],
                u,
                matrix: [[phase(u[0]), zero], [zero, phase(u[1])]],
            };
        }
        let lambda = 0.5 * (2.0 * chi).hypot(omega);
        // lambda -+ chi without cancellation: their product is Omega^2 / 4.
        let quarter = 0.25 * omega * omega;
        let (lm, lp) = if chi >= 0.0 {
            (quarter / (lambda + chi), lambda + chi)
        } else {
            (lambda - chi, quarter / (lambda - chi))
        };
        let two_l = 2.0 * lambda;
        let sgn = omega.signum();
        let q = if lambda - chi.abs() < 1e-300 * lambda {
            [
                [(lm / two_l).sqrt(), sgn * (lp / two_l).sqrt()],
                [-(lp / two_l).sqrt(), sgn * (lm / two_l).sqrt()],
            ]
        } else {
            [
                [(lm / two_l).sqrt(), 0.5 * omega / (two_l * lm).sqrt()],
                [-(lp / two_l).sqrt(), 0.5 * omega / (two_l * lp).sqrt()],
            ]
        };
        let u = [mu2 + two_l, mu2 - two_l];
        let e = [phase(u[0]), phase(u[1])];
        let mut matrix = [[zero; 2]; 2];
        for (r, row) in matrix.iter_mut().enumerate() {
            for (c, m) in row.iter_mut().enumerate() {
                *m = e[0] * q[0][r] * q[0][c] + e[1] * q[1][r] * q[1][c];
            }
        }
        Self {
            chi,
            lambda,
            q,
            u,
            matrix,
        }
    }
}

/// Propagators for every mode of a Fourier grid at a fixed step.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTable {
    pub tau: f64,
    pub params: Params,
    pub modes: Vec<ModePropagator>,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau == 0.0 || !tau.is_finite() {
        return Err(Error::InvalidParams(
            "time step must be finite and nonzero".into(),
        ));
    }
    Ok(())
}

/// Negative `tau` is accepted and gives the backward flow.
pub fn build_mode_propagators(grid: &Grid, params: &Params, tau: f64) -> Result<ModeTable> {
    check_tau(tau)?;
    if !grid.is_fourier() {
        return Err(Error::Unsupported(
            "mode propagators need a Fourier grid".into(),
        ));
    }
    let mu2 = grid.wavenumber_squared();
    let mux = grid.wavenumber_field(0);
    let modes = mu2
        .iter()
        .zip(&mux)
        .map(|(m2, mx)| ModePropagator::new(*m2, *mx, params, tau))
        .collect();
    Ok(ModeTable {
        tau,
        params: *params,
        modes,
    })
}

/// `psi_j <- e^{-i t (V_j + sum_l beta_jl |psi_l|^2)} psi_j`, exact since the densities are frozen.
fn potential_phase(psi: &mut Spinor, v1: &[f64], v2: &[f64], params: &Params, t: f64) {
    for i in 0..psi.len() {
        let (r1, r2) = (psi.psi1[i].norm_sqr(), psi.psi2[i].norm_sqr());
        let p1 = v1[i] + params.beta11 * r1 + params.beta12 * r2;
        let p2 = v2[i] + params.beta12 * r1 + params.beta22 * r2;
        psi.psi1[i] *= Complex64::from_polar(1.0, -t * p1);
        psi.psi2[i] *= Complex64::from_polar(1.0, -t * p2);
    }
}

fn apply_modes(grid: &Grid, psi: &mut Spinor, table: &ModeTable) -> Result<()> {
    grid.forward_in_place(&mut psi.psi1)?;
    grid.forward_in_place(&mut psi.psi2)?;
    for (i, m) in table.modes.iter().enumerate() {
        let (a, b) = mat_vec(&m.matrix, psi.psi1[i], psi.psi2[i]);
        psi.psi1[i] = a;
        psi.psi2[i] = b;
    }
    grid.inverse_in_place(&mut psi.psi1)?;
    grid.inverse_in_place(&mut psi.psi2)
}

/// One TSFP step with a precomputed table (lab frame, Fourier grid).
pub fn tsfp_step(grid: &Grid, psi: &Spinor, params: &Params, table: &ModeTable) -> Result<Spinor> {
    psi.check(grid)?;
    if table.modes.len() != grid.len() || table.params != *params {
        return Err(Error::InvalidParams(
            "mode table does not match grid or parameters".into(),
        ));
    }
    let (v1, v2) = model::potential_field(params, grid)?;
    let mut out = psi.clone();
    tsfp_in_place(grid, &mut out, params, table, &v1, &v2)?;
    Ok(out)
}

fn tsfp_in_place(
    grid: &Grid,
    psi: &mut Spinor,
    params: &Params,
    table: &ModeTable,
    v1: &[f64],
    v2: &[f64],
) -> Result<()> {
    apply_modes(grid, psi, table)?;
    potential_phase(psi, v1, v2, params, table.tau);
    apply_modes(grid, psi, table)
}

/// Pointwise exact Raman rotation of the tilde frame,
/// `T(x)^* e^{i tau Omega J / 2} T(x)` with `J = diag(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRotation {
    pub tau: f64,
    pub omega: f64,
    /// `e^{-2 i k0 x}` per node; `T = [[1, e], [-1, e]] / sqrt 2`.
    pub t_phase: Vec<Complex64>,
    /// `e^{i tau Omega J / 2}` diagonal.
    pub j_phase: [Complex64; 2],
}

impl BoxRotation {
    pub fn new(grid: &Grid, params: &Params, tau: f64) -> Self {
        let theta = 0.5 * tau * params.omega;
        Self {
            tau,
            omega: params.omega,
            t_phase: model::raman_phase(grid, params.k0)
                .into_iter()
                .map(|e| e.conj())
                .collect(),
            j_phase: [
                Complex64::from_polar(1.0, -theta),
                Complex64::from_polar(1.0, theta),
            ],
        }
    }

    pub fn t_matrix(&self, i: usize) -> Mat2 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let e = self.t_phase[i] * s;
        let one = Complex64::new(s, 0.0);
        [[one, e], [-one, e]]
    }

    pub fn rotate(&self, psi: &mut Spinor) {
        if self.omega == 0.0 {
            return;
        }
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let [j1, j2] = self.j_phase;
        for i in 0..psi.len() {
            let e = self.t_phase[i];
            let (a, b) = (psi.psi1[i], psi.psi2[i]);
            // w = T psi, then D w, then T^* back.
            let w1 = j1 * s * (a + e * b);
            let w2 = j2 * s * (-a + e * b);
            psi.psi1[i] = s * (w1 - w2);
            psi.psi2[i] = s * e.conj() * (w1 + w2);
        }
    }
}

/// Substeps of the tilde-frame splitting, reusable across steps.
#[derive(Debug, Clone, PartialEq)]
struct TildeSplit {
    kin1: Vec<Complex64>,
    kin2: Vec<Complex64>,
    rotation: BoxRotation,
}

impl TildeSplit {
    fn new(grid: &Grid, params: &Params, tau: f64) -> Self {
        let k2 = grid.wavenumber_squared();
        let half = |s: f64| -> Vec<Complex64> {
            k2.iter()
                .map(|k| {
                    Complex64::from_polar(1.0, -0.5 * tau * (0.5 * k + s * 0.5 * params.delta))
                })
                .collect()
        };
        Self {
            kin1: half(1.0),
            kin2: half(-1.0),
            rotation: BoxRotation::new(grid, params, tau),
        }
    }

    fn kinetic(&self, grid: &Grid, psi: &mut Spinor) -> Result<()> {
        for (f, k) in [(&mut psi.psi1, &self.kin1), (&mut psi.psi2, &self.kin2)] {
            grid.forward_in_place(f)?;
            f.iter_mut().zip(k).for_each(|(c, p)| *c *= p);
            grid.inverse_in_place(f)?;
        }
        Ok(())
    }

    fn step(
        &self,
        grid: &Grid,
        psi: &mut Spinor,
        params: &Params,
        v1: &[f64],
        v2: &[f64],
    ) -> Result<()> {
        let tau = self.rotation.tau;
        self.kinetic(grid, psi)?;
        potential_phase(psi, v1, v2, params, 0.5 * tau);
        self.rotation.rotate(psi);
        potential_phase(psi, v1, v2, params, 0.5 * tau);
        self.kinetic(grid, psi)
    }
}

/// One step of the box-potential splitting (tilde frame, sine grid).
pub fn box_step(grid: &Grid, psi: &Spinor, params: &Params, tau: f64) -> Result<Spinor> {
    check_tau(tau)?;
    psi.check(grid)?;
    if !grid.is_sine() || params.frame != Frame::Tilde {
        return Err(Error::Unsupported(
            "box splitting needs a sine grid and the tilde frame".into(),
        ));
    }
    let (v1, v2) = model::potential_field(params, grid)?;
    let mut out = psi.clone();
    TildeSplit::new(grid, params, tau).step(grid, &mut out, params, &v1, &v2)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Scheme {
    Tsfp(ModeTable),
    Tilde(TildeSplit),
}

/// A reusable stepper that picks the scheme for the grid and frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Stepper<'a> {
    grid: &'a Grid,
    params: Params,
    tau: f64,
    v1: Vec<f64>,
    v2: Vec<f64>,
    scheme: Scheme,
}

impl<'a> Stepper<'a> {
    pub fn new(grid: &'a Grid, params: &Params, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        let (v1, v2) = model::potential_field(params, grid)?;
        let lab_so = params.frame == Frame::Lab && params.k0 != 0.0;
        let scheme = if params.frame == Frame::Lab && grid.is_fourier() {
            Scheme::Tsfp(build_mode_propagators(grid, params, tau)?)
        } else if lab_so || grid.axis(0).basis != grid.axes().last().unwrap().basis {
            return Err(Error::Unsupported(
                "lab-frame dynamics with k0 != 0 need a Fourier grid; mixed bases are not supported".into(),
            ));
        } else {
            // Tilde frame, or lab frame with k0 = 0 where the frames coincide.
            Scheme::Tilde(TildeSplit::new(grid, params, tau))
        };
        Ok(Self {
            grid,
            params: *params,
            tau,
            v1,
            v2,
            scheme,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn step(&self, psi: &mut Spinor) -> Result<()> {
        match &self.scheme {
            Scheme::Tsfp(t) => tsfp_in_place(self.grid, psi, &self.params, t, &self.v1, &self.v2),
            Scheme::Tilde(s) => s.step(self.grid, psi, &self.params, &self.v1, &self.v2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub tau: f64,
    pub t_end: f64,
    /// Store a field snapshot every this many steps; 0 disables snapshots.
    pub snapshot_every: usize,
    /// Record observables every this many steps (the last step is always recorded).
    pub record_every: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            tau: 1e-3,
            t_end: 1.0,
            snapshot_every: 0,
            record_every: 1,
        }
    }
}

impl EvolveOptions {
    pub fn steps(&self) -> usize {
        (self.t_end / self.tau).round().max(0.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectorySeries {
    pub steps: Vec<usize>,
    pub times: Vec<f64>,
    pub observables: Vec<Observables>,
    pub snapshots: Vec<(f64, Spinor)>,
}

impl TrajectorySeries {
    /// Centre-of-mass component `a` over the recorded times.
    pub fn xc(&self, a: usize) -> Vec<f64> {
        self.observables.iter().map(|o| o.xc[a]).collect()
    }
}

/// A failed evolution keeps what was produced before the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveFailure {
    pub error: Error,
    pub last_good: Spinor,
    pub partial: TrajectorySeries,
}

/// Advance `psi0` to `options.t_end`. `observer` sees every recorded state.
pub fn evolve<F>(
    grid: &Grid,
    psi0: &Spinor,
    params: &Params,
    options: &EvolveOptions,
    mut observer: F,
) -> std::result::Result<(TrajectorySeries, Spinor), Box<EvolveFailure>>
where
    F: FnMut(f64, &Spinor, &Observables),
{
    let fail = |error: Error, last_good: &Spinor, partial: TrajectorySeries| {
        Box::new(EvolveFailure {
            error,
            last_good: last_good.clone(),
            partial,
        })
    };
    let mut series = TrajectorySeries::default();
    let setup = psi0
        .check(grid)
        .and_then(|_| Stepper::new(grid, params, options.tau));
    let stepper = match setup {
        Ok(s) => s,
        Err(e) => return Err(fail(e, psi0, series)),
    };
    let record_every = options.record_every.max(1);
    let n = options.steps();
    let mut psi = psi0.clone();
    let mut record = |step: usize, psi: &Spinor, series: &mut TrajectorySeries| -> Result<()> {
        let t = step as f64 * options.tau;
        let obs = model::observables(grid, psi, params)?;
        observer(t, psi, &obs);
        series.steps.push(step);
        series.times.push(t);
        series.observables.push(obs);
        Ok(())
    };
    let snapshot = |step: usize, psi: &Spinor, series: &mut TrajectorySeries| {
        if options.snapshot_every > 0 && step % options.snapshot_every == 0 {
            series
                .snapshots
                .push((step as f64 * options.tau, psi.clone()));
        }
    };
    if let Err(e) = record(0, &psi, &mut series) {
        return Err(fail(e, psi0, series));
    }
    snapshot(0, &psi, &mut series);
    let mut last_good = psi.clone();
    for step in 1..=n {
        if let Err(e) = stepper.step(&mut psi) {
            return Err(fail(e, &last_good, series));
        }
        if !psi.is_finite() {
            let e = Error::NonFinite {
                step,
                tau: options.tau,
            };
            return Err(fail(e, &last_good, series));
        }
        if step % record_every == 0 || step == n {
            if let Err(e) = record(step, &psi, &mut series) {
                return Err(fail(e, &last_good, series));
            }
        }
        snapshot(step, &psi, &mut series);
        last_good.clone_from(&psi);
    }
    Ok((series, psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Axis};
    use crate::model::Potential;
    use approx::assert_abs_diff_eq;

    fn norm2(m: &Mat2, o: &Mat2) -> f64 {
        let mut s: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                s = s.max((m[r][c] - o[r][c]).norm());
            }
        }
        s
    }

    #[test]
    fn symmetric_mode_values() {
        let p = Params {
            omega: 2.0,
            ..Params::default()
        };
        let m = ModePropagator::new(3.0, 1.7, &p, 0.1);
        assert_eq!(m.chi, 0.0);
        assert_abs_diff_eq!(m.lambda, 1.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [[s, s], [-s, s]];
        for r in 0..2 {
            for c in 0..2 {
                assert_abs_diff_eq!(m.q[r][c], expect[r][c], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn near_singular_branch_is_orthogonal() {
        // chi huge relative to Omega drives lambda - |chi| to underflow.
        for (chi_sign, omega) in [(1.0, 1e-160), (-1.0, -1e-160), (1.0, 3.0)] {
            let p = Params {
                k0: chi_sign * 1e3,
                omega,
                ..Params::default()
            };
            let m = ModePropagator::new(1.0, 1.0, &p, 0.01);
            let q = m.q;
            let qqt = [
                [
                    q[0][0] * q[0][0] + q[0][1] * q[0][1],
                    q[0][0] * q[1][0] + q[0][1] * q[1][1],
                ],
                [
                    q[1][0] * q[0][0] + q[1][1] * q[0][1],
                    q[1][0] * q[1][0] + q[1][1] * q[1][1],
                ],
            ];
            assert_abs_diff_eq!(qqt[0][0], 1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(qqt[1][1], 1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(qqt[0][1], 0.0, epsilon = 1e-13);
            assert!(m
                .matrix
                .iter()
                .flatten()
                .all(|z| z.re.is_finite() && z.im.is_finite()));
        }
    }

    #[test]
    fn zero_omega_branch_is_diagonal() {
        let p = Params {
            k0: 1.0,
            delta: 0.4,
            ..Params::default()
        };
        let m = ModePropagator::new(4.0, 2.0, &p, 0.1);
        let chi: f64 = 2.0 - 0.2;
        let e = |u: f64| Complex64::from_polar(1.0, -0.025 * u);
        let z = Complex64::default();
        let expect = [[e(4.0 - 2.0 * chi), z], [z, e(4.0 + 2.0 * chi)]];
        assert!(norm2(&m.matrix, &expect) < 1e-15);
    }

    #[test]
    fn sine_grid_rejected() {
        let g = make_grid(vec![Axis::sine(0.0, 1.0, 16).unwrap()]).unwrap();
        assert!(build_mode_propagators(&g, &Params::default(), 0.1).is_err());
        assert!(build_mode_propagators(
            &make_grid(vec![Axis::fourier(0.0, 1.0, 16).unwrap()]).unwrap(),
            &Params::default(),
            0.0
        )
        .is_err());
    }

    fn box_setup() -> (Grid, Params) {
        let g = make_grid(vec![Axis::sine(-1.0, 1.0, 32).unwrap()]).unwrap();
        let p = Params {
            k0: 3.0,
            omega: 7.0,
            delta: 0.5,
            potential: Potential::Box,
            frame: Frame::Tilde,
            ..Params::default().with_betas(10.0, 9.0, 9.0)
        };
        (g, p)
    }

    fn wavy(g: &Grid) -> Spinor {
        let x = g.coordinate(0);
        let mut s = Spinor::new(
            x.iter()
                .map(|x| Complex64::new((1.0 - x * x) * (1.0 + x), 0.3 * x))
                .collect(),
            x.iter()
                .map(|x| Complex64::new(0.5 * (1.0 - x * x), (2.0 * x).sin()))
                .collect(),
        )
        .unwrap();
        s.normalize(g);
        s
    }

    #[test]
    fn rotation_preserves_pointwise_density() {
        let (g, p) = box_setup();
        let mut s = wavy(&g);
        let before: Vec<f64> = (0..s.len())
            .map(|i| s.psi1[i].norm_sqr() + s.psi2[i].norm_sqr())
            .collect();
        BoxRotation::new(&g, &p, 0.37).rotate(&mut s);
        for (i, b) in before.iter().enumerate() {
            assert_abs_diff_eq!(
                s.psi1[i].norm_sqr() + s.psi2[i].norm_sqr(),
                *b,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn rotation_matches_closed_form() {
        // With R = [[0, e^{-2ik0x}], [e^{2ik0x}, 0]], R^2 = I so the flow is cos - i sin R.
        let (g, p) = box_setup();
        let tau = 0.21;
        let mut s = wavy(&g);
        let orig = s.clone();
        let rot = BoxRotation::new(&g, &p, tau);
        rot.rotate(&mut s);
        let th = 0.5 * tau * p.omega;
        let (c, sn) = (th.cos(), th.sin());
        let i = Complex64::i();
        for (n, e) in model::raman_phase(&g, p.k0).iter().enumerate() {
            let (a, b) = (orig.psi1[n], orig.psi2[n]);
            assert!((s.psi1[n] - (c * a - i * sn * e.conj() * b)).norm() < 1e-14);
            assert!((s.psi2[n] - (c * b - i * sn * e * a)).norm() < 1e-14);
            let t = rot.t_matrix(n);
            for r in 0..2 {
                let mut acc = Complex64::default();
                for col in 0..2 {
                    acc += t[col][0].conj() * t[col][r];
                }
                let id = if r == 0 { 1.0 } else { 0.0 };
                assert!((acc - id).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_omega_rotation_is_identity() {
        let (g, p) = box_setup();
        let mut s = wavy(&g);
        let orig = s.clone();
        BoxRotation::new(&g, &Params { omega: 0.0, ..p }, 0.4).rotate(&mut s);
        assert_eq!(s, orig);
    }

    #[test]
    fn box_step_conserves_mass_and_checks_setup() {
        let (g, p) = box_setup();
        let s = wavy(&g);
        let out = box_step(&g, &s, &p, 1e-3).unwrap();
        assert_abs_diff_eq!(out.mass(&g), 1.0, epsilon = 1e-13);
        assert!(box_step(
            &g,
            &s,
            &Params {
                frame: Frame::Lab,
                ..p
            },
            1e-3
        )
        .is_err());
    }

    #[test]
    fn zero_steps_records_initial_state() {
        let g = make_grid(vec![Axis::fourier(-8.0, 8.0, 64).unwrap()]).unwrap();
        let s = crate::ground_state::shifted_gaussian(&g, &Params::default(), &[1.0]);
        let opts = EvolveOptions {
            t_end: 0.0,
            ..EvolveOptions::default()
        };
        let mut seen = 0;
        let (series, fin) = evolve(&g, &s, &Params::default(), &opts, |_, _, _| seen += 1).unwrap();
        assert_eq!(series.times, vec![0.0]);
        assert_eq!(seen, 1);
        assert_eq!(fin, s);
    }

    #[test]
    fn blow_up_keeps_last_good_state() {
        let g = make_grid(vec![Axis::fourier(-8.0, 8.0, 64).unwrap()]).unwrap();
        let mut s = crate::ground_state::shifted_gaussian(&g, &Params::default(), &[0.0]);
        s.psi1[3] = Complex64::new(f64::NAN, 0.0);
        let opts = EvolveOptions {
            t_end: 0.01,
            ..EvolveOptions::default()
        };
        let err = evolve(&g, &s, &Params::default(), &opts, |_, _, _| {}).unwrap_err();
        assert!(matches!(err.error, Error::NonFinite { step: 1, .. }));
        assert_eq!(err.partial.times.len(), 1);
    }
}
