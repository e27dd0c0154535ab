//! Ground states by gradient flow with discrete normalization (GFDN).
//!
//! Each step is a semi-implicit backward Euler step: the constant-coefficient
//! linear part (Laplacian, spin-orbit derivative, detuning, stabilization
//! shift) is inverted mode by mode in spectral space, while the trap,
//! nonlinearity and Raman coupling are taken from the previous iterate. The
//! pair is then jointly renormalized.
//!
//! The explicit side also carries `mu_n phi_n`, with `mu_n` the chemical
//! potential of the current iterate. Projection removes the effect of that
//! term on the flow direction, but it makes exact eigenstates exact fixed
//! points of the discrete map for any `tau`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Basis, Grid};
use crate::model::{self, gauge_transform, Frame, GaugeDirection, Params, Potential, Spinor};

/// Starting data for the flow. Profiles are jointly normalized.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// `(g, g) / sqrt 2` with `g` a trap-adapted Gaussian.
    GaussianPair,
    /// `(g, -g) / sqrt 2`.
    GaussianOpposite,
    /// Lowest sine mode of the domain in both components.
    SinePair,
    /// `(g e^{ikx}, g e^{-ikx}) / sqrt 2`.
    PlaneWaveModulated(f64),
    /// `g` in component `j` (1 or 2) only.
    SingleComponent(usize),
    UserSupplied(Spinor),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GfdnOptions {
    pub tau: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub init: InitialGuess,
    /// Fixed stabilization shift; `None` uses half the running maximum of
    /// `V + beta * density`, refreshed every [`SHIFT_REFRESH`] iterations.
    pub shift: Option<f64>,
    /// Try an Aitken jump along the slowest mode at the end of each shift
    /// window; kept only if it lowers the energy.
    pub extrapolate: bool,
}

pub const SHIFT_REFRESH: usize = 50;

impl Default for GfdnOptions {
    fn default() -> Self {
        Self {
            tau: 0.01,
            tol: 1e-7,
            max_iters: 200_000,
            init: InitialGuess::GaussianPair,
            shift: None,
            extrapolate: true,
        }
    }
}

impl GfdnOptions {
    /// Defaults with the smaller step used for strong Raman coupling.
    pub fn for_params(params: &Params) -> Self {
        let mut o = Self::default();
        if params.omega.abs() >= 100.0 {
            o.tau = 0.001;
        }
        o
    }

    pub fn with_init(mut self, init: InitialGuess) -> Self {
        self.init = init;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParams("tau must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParams("tol must be positive".into()));
        }
        if matches!(self.shift, Some(a) if !(a >= 0.0)) {
            return Err(Error::InvalidParams(
                "stabilization shift must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateResult {
    pub phi: Spinor,
    pub energy: f64,
    pub mu: f64,
    pub iterations: usize,
    /// Last value of `max |phi^{n+1} - phi^n| / tau`.
    pub residual: f64,
    pub frame: Frame,
    pub converged: bool,
    pub warning: Option<String>,
    /// Lab-frame view of a tilde-frame result.
    pub lab_view: Option<Spinor>,
}

fn gaussian_profile(grid: &Grid, params: &Params, shift: &[f64]) -> Vec<f64> {
    let mut g = vec![1.0; grid.len()];
    for a in 0..grid.dim() {
        let axis = grid.axis(a);
        let (center, width2) = match params.potential {
            Potential::Harmonic => (0.0, 1.0 / params.gamma[a]),
            Potential::Box => (0.5 * (axis.lo + axis.hi), (axis.length() / 6.0).powi(2)),
        };
        let c = center + shift.get(a).copied().unwrap_or(0.0);
        for (gi, x) in g.iter_mut().zip(grid.coordinate(a)) {
            *gi *= (-(x - c).powi(2) / (2.0 * width2)).exp();
        }
    }
    g
}

fn sine_profile(grid: &Grid) -> Vec<f64> {
    let mut g = vec![1.0; grid.len()];
    for a in 0..grid.dim() {
        let axis = grid.axis(a);
        for (gi, x) in g.iter_mut().zip(grid.coordinate(a)) {
            *gi *= (std::f64::consts::PI * (x - axis.lo) / axis.length()).sin();
        }
    }
    g
}

/// Normalized starting state for `init`.
pub fn initial_state(grid: &Grid, params: &Params, init: &InitialGuess) -> Result<Spinor> {
    let real = |f: &[f64], s: f64| f.iter().map(|v| Complex64::new(s * v, 0.0)).collect();
    let mut phi = match init {
        InitialGuess::GaussianPair => {
            let g = gaussian_profile(grid, params, &[]);
            Spinor::new(real(&g, 1.0), real(&g, 1.0))?
        }
        InitialGuess::GaussianOpposite => {
            let g = gaussian_profile(grid, params, &[]);
            Spinor::new(real(&g, 1.0), real(&g, -1.0))?
        }
        InitialGuess::SinePair => {
            let g = sine_profile(grid);
            Spinor::new(real(&g, 1.0), real(&g, 1.0))?
        }
        InitialGuess::PlaneWaveModulated(k) => {
            let g = gaussian_profile(grid, params, &[]);
            let x = grid.coordinate(0);
            let wave = |s: f64| -> Vec<Complex64> {
                g.iter()
                    .zip(&x)
                    .map(|(g, x)| Complex64::from_polar(*g, s * k * x))
                    .collect()
            };
            Spinor::new(wave(1.0), wave(-1.0))?
        }
        InitialGuess::SingleComponent(j) => {
            let g = gaussian_profile(grid, params, &[]);
            let zero = vec![Complex64::default(); g.len()];
            match j {
                1 => Spinor::new(real(&g, 1.0), zero)?,
                2 => Spinor::new(zero, real(&g, 1.0))?,
                _ => return Err(Error::InvalidParams(format!("no component {j}"))),
            }
        }
        InitialGuess::UserSupplied(s) => {
            s.check(grid)?;
            s.clone()
        }
    };
    if phi.mass(grid) == 0.0 {
        return Err(Error::InvalidParams(
            "initial state is identically zero".into(),
        ));
    }
    phi.normalize(grid);
    Ok(phi)
}

/// Gaussian ground-state guess displaced by `offset`; used for shifted initial data.
pub fn shifted_gaussian(grid: &Grid, params: &Params, offset: &[f64]) -> Spinor {
    let g = gaussian_profile(grid, params, offset);
    let psi1: Vec<Complex64> = g.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let mut s = Spinor {
        psi2: vec![Complex64::default(); psi1.len()],
        psi1,
    };
    s.normalize(grid);
    s
}

fn check_setup(grid: &Grid, params: &Params) -> Result<()> {
    params.validate(grid)?;
    let needs_derivative = params.frame == Frame::Lab && params.k0 != 0.0;
    if needs_derivative && grid.axis(0).basis == Basis::Sine {
        return Err(Error::Unsupported(
            "lab frame with k0 != 0 needs a Fourier x axis; use the tilde frame on sine grids"
                .into(),
        ));
    }
    Ok(())
}

/// A GFDN stepper with precomputed spectral denominators.
#[derive(Debug, Clone)]
pub struct Gfdn<'a> {
    grid: &'a Grid,
    params: Params,
    tau: f64,
    v1: Vec<f64>,
    v2: Vec<f64>,
    k2: Vec<f64>,
    mux: Vec<f64>,
    phase: Option<Vec<Complex64>>,
    alpha: f64,
    den1: Vec<f64>,
    den2: Vec<f64>,
}

impl<'a> Gfdn<'a> {
    pub fn new(grid: &'a Grid, params: &Params, tau: f64, alpha: f64) -> Result<Self> {
        check_setup(grid, params)?;
        let (v1, v2) = model::potential_field(params, grid)?;
        let phase = match params.frame {
            Frame::Tilde => Some(model::raman_phase(grid, params.k0)),
            Frame::Lab => None,
        };
        let mut s = Self {
            grid,
            params: *params,
            tau,
            v1,
            v2,
            k2: grid.wavenumber_squared(),
            mux: grid.wavenumber_field(0),
            phase,
            alpha: f64::NAN,
            den1: Vec::new(),
            den2: Vec::new(),
        };
        s.set_shift(alpha)?;
        Ok(s)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn set_shift(&mut self, alpha: f64) -> Result<()> {
        if alpha == self.alpha {
            return Ok(());
        }
        let p = &self.params;
        let so = if p.frame == Frame::Lab { p.k0 } else { 0.0 };
        let base = 1.0 / self.tau + alpha;
        let den = |s: f64| -> Vec<f64> {
            self.k2
                .iter()
                .zip(&self.mux)
                .map(|(k2, mx)| base + 0.5 * k2 - s * so * mx + s * 0.5 * p.delta)
                .collect()
        };
        let (d1, d2) = (den(1.0), den(-1.0));
        if d1.iter().chain(&d2).any(|d| !(*d > 0.0)) {
            return Err(Error::InvalidParams(format!(
                "implicit operator is not positive for tau = {}; reduce tau or raise the shift",
                self.tau
            )));
        }
        self.alpha = alpha;
        self.den1 = d1;
        self.den2 = d2;
        Ok(())
    }

    /// `max (V + beta * density) / 2` over both components.
    pub fn default_shift(&self, phi: &Spinor) -> f64 {
        let p = &self.params;
        let mut m: f64 = 0.0;
        for i in 0..phi.len() {
            let (r1, r2) = (phi.psi1[i].norm_sqr(), phi.psi2[i].norm_sqr());
            m = m
                .max(self.v1[i] + p.beta11 * r1 + p.beta12 * r2)
                .max(self.v2[i] + p.beta12 * r1 + p.beta22 * r2);
        }
        0.5 * m
    }

    /// Chemical potential of `phi`, reusing the cached fields.
    pub fn chemical_potential(&self, phi: &Spinor) -> Result<f64> {
        let g = self.grid;
        let p = &self.params;
        let c1 = g.forward(&phi.psi1)?;
        let c2 = g.forward(&phi.psi2)?;
        let lab_so = p.frame == Frame::Lab && p.k0 != 0.0;
        let mut spectral = 0.0;
        for i in 0..c1.len() {
            let (a, b) = (c1[i].norm_sqr(), c2[i].norm_sqr());
            spectral += 0.5 * self.k2[i] * (a + b);
            if lab_so {
                spectral -= p.k0 * self.mux[i] * (a - b);
            }
        }
        let mut local = 0.0;
        for i in 0..phi.len() {
            let (a, b) = (phi.psi1[i], phi.psi2[i]);
            let (r1, r2) = (a.norm_sqr(), b.norm_sqr());
            let overlap = match &self.phase {
                None => a * b.conj(),
                Some(e) => e[i] * a * b.conj(),
            };
            local += self.v1[i] * r1
                + self.v2[i] * r2
                + 0.5 * p.delta * (r1 - r2)
                + p.omega * overlap.re
                + p.beta11 * r1 * r1
                + p.beta22 * r2 * r2
                + 2.0 * p.beta12 * r1 * r2;
        }
        Ok(spectral * g.parseval_weight() + local * g.cell_volume())
    }

    /// One flow step followed by joint normalization.
    pub fn step(&self, phi: &Spinor) -> Result<Spinor> {
        phi.check(self.grid)?;
        let p = &self.params;
        let mu = self.chemical_potential(phi)?;
        let base = 1.0 / self.tau + self.alpha + mu;
        let half_omega = 0.5 * p.omega;
        let n = phi.len();
        let mut r1 = Vec::with_capacity(n);
        let mut r2 = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (phi.psi1[i], phi.psi2[i]);
            let (d1, d2) = (a.norm_sqr(), b.norm_sqr());
            let e1 = base - self.v1[i] - p.beta11 * d1 - p.beta12 * d2;
            let e2 = base - self.v2[i] - p.beta12 * d1 - p.beta22 * d2;
            let (c12, c21) = match &self.phase {
                None => (b, a),
                Some(e) => (e[i].conj() * b, e[i] * a),
            };
            r1.push(e1 * a - half_omega * c12);
            r2.push(e2 * b - half_omega * c21);
        }
        let solve = |f: &mut Vec<Complex64>, den: &[f64]| {
            self.grid.forward_in_place(f)?;
            f.iter_mut().zip(den).for_each(|(c, d)| *c /= d);
            self.grid.inverse_in_place(f)
        };
        solve(&mut r1, &self.den1)?;
        solve(&mut r2, &self.den2)?;
        let mut next = Spinor { psi1: r1, psi2: r2 };
        next.normalize(self.grid);
        Ok(next)
    }
}

/// One GFDN step with the shift from `options` (or its default for `phi`).
pub fn gfdn_step(
    grid: &Grid,
    phi: &Spinor,
    params: &Params,
    options: &GfdnOptions,
) -> Result<Spinor> {
    options.validate()?;
    let mut g = Gfdn::new(grid, params, options.tau, options.shift.unwrap_or(0.0))?;
    if options.shift.is_none() {
        g.set_shift(g.default_shift(phi))?;
    }
    g.step(phi)
}

/// Rotate by a global phase so that the largest-modulus node is real positive.
pub fn fix_global_phase(phi: &mut Spinor) {
    let pivot = phi
        .psi1
        .iter()
        .chain(&phi.psi2)
        .copied()
        .fold(Complex64::default(), |m, z| {
            if z.norm() > m.norm() {
                z
            } else {
                m
            }
        });
    if pivot.norm() > 0.0 {
        phi.scale(pivot.conj() / pivot.norm());
    }
}

fn non_uniqueness_warning(grid: &Grid, params: &Params) -> Result<Option<String>> {
    if params.omega != 0.0 {
        return Ok(None);
    }
    let (_, nonzero) = model::uniqueness_indicator(params, grid)?;
    Ok((!nonzero).then(|| {
        "Omega = 0 and the uniqueness indicator vanishes: the ground state is not unique"
            .to_string()
    }))
}

/// If the last two differences are parallel with ratio `r` in `(0, 1)`, the
/// remaining error is taken to be a single geometric mode and summed out:
/// `phi + r/(1-r) (phi - old)`, renormalized.
fn aitken_jump(grid: &Grid, older: &Spinor, old: &Spinor, phi: &Spinor) -> Option<Spinor> {
    let pairs = |a: &Spinor, b: &Spinor| -> Vec<Complex64> {
        a.psi1
            .iter()
            .zip(&b.psi1)
            .chain(a.psi2.iter().zip(&b.psi2))
            .map(|(x, y)| x - y)
            .collect()
    };
    let dot = |a: &[Complex64], b: &[Complex64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
    };
    let d1 = pairs(old, older);
    let d2 = pairs(phi, old);
    let n1 = dot(&d1, &d1);
    if !(n1 > 0.0) {
        return None;
    }
    let r = dot(&d2, &d1) / n1;
    let misfit: f64 = d2
        .iter()
        .zip(&d1)
        .map(|(a, b)| (a - b * r).norm_sqr())
        .sum();
    if !(r > 0.0 && r < 1.0) || misfit > 1e-4 * dot(&d2, &d2) {
        return None;
    }
    let f = r / (1.0 - r);
    let n = phi.len();
    let mut out = phi.clone();
    for (i, d) in d2.iter().enumerate() {
        if i < n {
            out.psi1[i] += d * f;
        } else {
            out.psi2[i - n] += d * f;
        }
    }
    out.normalize(grid);
    out.is_finite().then_some(out)
}

pub fn gfdn_solve(
    params: &Params,
    grid: &Grid,
    options: &GfdnOptions,
) -> Result<GroundStateResult> {
    options.validate()?;
    check_setup(grid, params)?;
    if params.potential == Potential::Box && params.frame == Frame::Lab && params.k0 != 0.0 {
        return Err(Error::Unsupported(
            "box potential requires the tilde frame".into(),
        ));
    }
    let mut phi = initial_state(grid, params, &options.init)?;
    let mut stepper = Gfdn::new(grid, params, options.tau, options.shift.unwrap_or(0.0))?;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut trail: Vec<Spinor> = Vec::with_capacity(3);
    while iterations < options.max_iters {
        if options.shift.is_none() && iterations % SHIFT_REFRESH == 0 {
            stepper.set_shift(stepper.default_shift(&phi))?;
        }
        let next = stepper.step(&phi)?;
        iterations += 1;
        if !next.is_finite() {
            return Err(Error::NonFinite {
                step: iterations,
                tau: options.tau,
            });
        }
        residual = next.max_diff(&phi) / options.tau;
        if residual < options.tol {
            phi = next;
            converged = true;
            break;
        }
        let previous = std::mem::replace(&mut phi, next);
        if options.extrapolate {
            // Iterates since the last refresh share one linear operator.
            let window = iterations % SHIFT_REFRESH;
            if window == 1 {
                trail.clear();
            }
            trail.push(previous);
            if trail.len() > 2 {
                trail.remove(0);
            }
            if window == 0 && trail.len() == 2 {
                if let Some(jump) = aitken_jump(grid, &trail[0], &trail[1], &phi) {
                    if model::energy(grid, &jump, params)? <= model::energy(grid, &phi, params)? {
                        phi = jump;
                    }
                }
            }
        }
    }
    fix_global_phase(&mut phi);
    let energy = model::energy(grid, &phi, params)?;
    let mu = model::chemical_potential(grid, &phi, params)?;
    let lab_view = match params.frame {
        Frame::Tilde => Some(gauge_transform(
            grid,
            &phi,
            params.k0,
            GaugeDirection::ToLab,
        )?),
        Frame::Lab => None,
    };
    let mut warning = non_uniqueness_warning(grid, params)?;
    if !converged {
        warning = Some(format!(
            "not converged after {iterations} iterations (residual {residual:.3e})"
        ));
    }
    Ok(GroundStateResult {
        phi,
        energy,
        mu,
        iterations,
        residual,
        frame: params.frame,
        converged,
        warning,
        lab_view,
    })
}

/// Backward Euler sine pseudospectral solve: GFDN on the tilde functional
/// over an all-sine grid.
pub fn besp_solve(
    params: &Params,
    grid: &Grid,
    options: &GfdnOptions,
) -> Result<GroundStateResult> {
    if !grid.is_sine() {
        return Err(Error::Unsupported(
            "sine solver needs an all-sine grid".into(),
        ));
    }
    if params.frame != Frame::Tilde {
        return Err(Error::Unsupported(
            "sine solver runs in the tilde frame".into(),
        ));
    }
    gfdn_solve(params, grid, options)
}

/// `tau` capped at `1/|Omega|`: the explicit Raman term loses contractivity
/// once `tau |Omega|` approaches 2.
pub fn stable_tau(tau: f64, params: &Params) -> f64 {
    if params.omega == 0.0 {
        tau
    } else {
        tau.min(1.0 / params.omega.abs())
    }
}

/// Starts tried by default: both sign structures when `Omega != 0`, the
/// one favoured by `sgn(-Omega)` first.
pub fn default_starts(params: &Params) -> Vec<InitialGuess> {
    if params.omega < 0.0 {
        vec![InitialGuess::GaussianPair, InitialGuess::GaussianOpposite]
    } else if params.omega > 0.0 {
        vec![InitialGuess::GaussianOpposite, InitialGuess::GaussianPair]
    } else {
        vec![
            InitialGuess::SingleComponent(1),
            InitialGuess::SingleComponent(2),
            InitialGuess::GaussianPair,
        ]
    }
}

fn solve_any(params: &Params, grid: &Grid, options: &GfdnOptions) -> Result<GroundStateResult> {
    if grid.is_sine() && params.frame == Frame::Tilde {
        besp_solve(params, grid, options)
    } else {
        gfdn_solve(params, grid, options)
    }
}

/// Lowest-energy result over `starts`, preferring converged runs. Ties keep
/// the earliest start.
pub fn multi_start(
    params: &Params,
    grid: &Grid,
    options: &GfdnOptions,
    starts: &[InitialGuess],
) -> Result<GroundStateResult> {
    if starts.is_empty() {
        return solve_any(params, grid, options);
    }
    let runs: Vec<GroundStateResult> = starts
        .par_iter()
        .map(|init| solve_any(params, grid, &options.clone().with_init(init.clone())))
        .collect::<Result<_>>()?;
    let any_converged = runs.iter().any(|r| r.converged);
    let mut best: Option<GroundStateResult> = None;
    for r in runs {
        if any_converged && !r.converged {
            continue;
        }
        if best.as_ref().map_or(true, |b| r.energy < b.energy) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one start"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitKind {
    LargeK0,
    LargeOmega,
    LargeDelta,
    RateSmallK0,
    RateLargeK0,
    EnergyCompetition,
}

impl LimitKind {
    fn needs_fit(self) -> bool {
        matches!(
            self,
            Self::RateSmallK0 | Self::RateLargeK0 | Self::EnergyCompetition
        )
    }

    /// `base` with the swept parameter set to `value`.
    pub fn apply(self, base: &Params, value: f64) -> Params {
        let mut p = *base;
        match self {
            Self::LargeOmega | Self::EnergyCompetition => p.omega = value,
            Self::LargeDelta => p.delta = value,
            Self::LargeK0 | Self::RateSmallK0 | Self::RateLargeK0 => p.k0 = value,
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitRow {
    pub value: f64,
    /// Primary diagnostic of the sweep (see [`limit_study`]).
    pub diagnostic: f64,
    /// Raman overlap term `Omega * raman_overlap` of the computed state.
    pub raman_term: f64,
    /// LargeOmega: distance of the moduli to the limiting single field.
    pub secondary: Option<f64>,
    pub state: GroundStateResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub kind: LimitKind,
    pub rows: Vec<LimitRow>,
    pub reference: Option<GroundStateResult>,
    /// Log-log slope for the rate studies.
    pub slope: Option<f64>,
    /// Fitted leading constant for the energy competition study.
    pub c0: Option<f64>,
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn modulus_gap(grid: &Grid, phi: &Spinor, reference: &Spinor) -> f64 {
    model::modulus_distance(grid, &phi.psi1, &reference.psi1)
        + model::modulus_distance(grid, &phi.psi2, &reference.psi2)
}

/// Minimizer of the large-Raman single-field energy, returned as the pair
/// `(phi_s, phi_s)` with `||phi_s||^2 = 1/2`.
pub fn large_omega_limit_state(
    params: &Params,
    grid: &Grid,
    options: &GfdnOptions,
) -> Result<GroundStateResult> {
    let b = (params.beta11 + params.beta22 + 2.0 * params.beta12) / 4.0;
    let p = Params {
        k0: 0.0,
        omega: 0.0,
        delta: 0.0,
        ..params.with_betas(b, b, b)
    };
    let init = if grid.is_sine() {
        InitialGuess::SinePair
    } else {
        InitialGuess::GaussianPair
    };
    let mut r = solve_any(&p, grid, &options.clone().with_init(init))?;
    // The symmetric flow keeps psi1 = psi2; write both for clarity.
    r.phi.psi2 = r.phi.psi1.clone();
    Ok(r)
}

/// Ground states along a parameter sweep together with the diagnostic of the
/// matching limit.
///
/// * `LargeK0`, `RateLargeK0`: `sum_j || |phi_j| - |ref_j| ||` against the `Omega = 0` state.
/// * `RateSmallK0`: the same distance against the `k0 = 0` state.
/// * `LargeOmega`: `|| |phi1| - |phi2| ||`; `secondary` is the distance to the limiting field.
/// * `LargeDelta`: `||phi1||`.
/// * `EnergyCompetition`: `E_g + k0^2/2`; `c0` is the slope against `-Omega^2/k0^2`.
pub fn limit_study(
    kind: LimitKind,
    base: &Params,
    grid: &Grid,
    options: &GfdnOptions,
    values: &[f64],
) -> Result<LimitReport> {
    if values.is_empty() || (kind.needs_fit() && values.len() < 3) {
        return Err(Error::Study(format!(
            "{kind:?} needs at least {} sweep values",
            if kind.needs_fit() { 3 } else { 1 }
        )));
    }
    let starts = default_starts(base);
    let reference = match kind {
        LimitKind::LargeK0 | LimitKind::RateLargeK0 => {
            let p = Params {
                omega: 0.0,
                ..*base
            };
            Some(multi_start(&p, grid, options, &default_starts(&p))?)
        }
        LimitKind::RateSmallK0 => {
            let p = Params { k0: 0.0, ..*base };
            Some(multi_start(&p, grid, options, &starts)?)
        }
        LimitKind::LargeOmega => Some(large_omega_limit_state(base, grid, options)?),
        _ => None,
    };
    let states: Vec<(Params, GroundStateResult)> = values
        .par_iter()
        .map(|&v| {
            let p = kind.apply(base, v);
            let opts = GfdnOptions {
                tau: stable_tau(options.tau, &p),
                ..options.clone()
            };
            let mut starts = default_starts(&p);
            if let Some(r) = &reference {
                starts.push(InitialGuess::UserSupplied(r.phi.clone()));
            }
            multi_start(&p, grid, &opts, &starts).map(|r| (p, r))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(values.len());
    for (&value, (p, state)) in values.iter().zip(states) {
        let phi = &state.phi;
        let (diagnostic, secondary) = match kind {
            LimitKind::LargeK0 | LimitKind::RateLargeK0 | LimitKind::RateSmallK0 => (
                modulus_gap(grid, phi, &reference.as_ref().unwrap().phi),
                None,
            ),
            LimitKind::LargeOmega => (
                model::modulus_distance(grid, &phi.psi1, &phi.psi2),
                Some(modulus_gap(grid, phi, &reference.as_ref().unwrap().phi)),
            ),
            LimitKind::LargeDelta => (phi.component_mass(grid, 1).sqrt(), None),
            LimitKind::EnergyCompetition => (state.energy + 0.5 * p.k0 * p.k0, None),
        };
        rows.push(LimitRow {
            value,
            diagnostic,
            raman_term: p.omega * model::raman_overlap(grid, phi, &p)?,
            secondary,
            state,
        });
    }
    let (mut slope, mut c0) = (None, None);
    match kind {
        LimitKind::RateSmallK0 | LimitKind::RateLargeK0 => {
            let x: Vec<f64> = rows
                .iter()
                .map(|r| match kind {
                    LimitKind::RateSmallK0 => r.value.abs().ln(),
                    _ => -0.5 * r.value.abs().ln(),
                })
                .collect();
            let y: Vec<f64> = rows.iter().map(|r| r.diagnostic.ln()).collect();
            slope = Some(fit_slope(&x, &y));
        }
        LimitKind::EnergyCompetition => {
            let x: Vec<f64> = rows.iter().map(|r| -(r.value / base.k0).powi(2)).collect();
            let y: Vec<f64> = rows.iter().map(|r| r.diagnostic).collect();
            c0 = Some(fit_slope(&x, &y));
        }
        _ => {}
    }
    Ok(LimitReport {
        kind,
        rows,
        reference,
        slope,
        c0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Axis};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn grid1d(n: usize) -> Grid {
        make_grid(vec![Axis::fourier(-16.0, 16.0, n).unwrap()]).unwrap()
    }

    fn ho_state(grid: &Grid) -> Spinor {
        let g = grid
            .nodes(0)
            .iter()
            .map(|x| Complex64::new(PI.powf(-0.25) * (-x * x / 2.0).exp(), 0.0))
            .collect();
        Spinor::new(g, vec![Complex64::default(); grid.len()]).unwrap()
    }

    #[test]
    fn exact_state_is_fixed_point() {
        let g = grid1d(128);
        let opts = GfdnOptions::default();
        let phi = ho_state(&g);
        let next = gfdn_step(&g, &phi, &Params::default(), &opts).unwrap();
        assert!(next.max_diff(&phi) <= opts.tol * opts.tau);
    }

    #[test]
    fn cached_chemical_potential_matches_model() {
        let g = grid1d(64);
        let mut phi = ho_state(&g);
        phi.psi2 = g
            .nodes(0)
            .iter()
            .map(|x| Complex64::new((-x * x).exp(), 0.3 * x * (-x * x).exp()))
            .collect();
        phi.normalize(&g);
        for frame in [Frame::Lab, Frame::Tilde] {
            let p = Params {
                k0: 0.7,
                omega: -1.3,
                delta: 0.4,
                frame,
                ..Params::default().with_betas(3.0, 1.0, 2.0)
            };
            let stepper = Gfdn::new(&g, &p, 0.01, 0.0).unwrap();
            let mu = model::chemical_potential(&g, &phi, &p).unwrap();
            assert_abs_diff_eq!(
                stepper.chemical_potential(&phi).unwrap(),
                mu,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn projection_normalizes() {
        let g = grid1d(64);
        let mut phi = ho_state(&g);
        phi.scale(Complex64::new(3.0, 1.0));
        phi.psi2 = phi.psi1.iter().map(|z| z * 0.5).collect();
        let p = Params {
            omega: 1.0,
            ..Params::default().with_betas(5.0, 1.0, 2.0)
        };
        let next = gfdn_step(&g, &phi, &p, &GfdnOptions::default()).unwrap();
        assert_abs_diff_eq!(next.mass(&g), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn harmonic_oscillator_from_gaussian() {
        let g = grid1d(128);
        let r = gfdn_solve(&Params::default(), &g, &GfdnOptions::default()).unwrap();
        assert!(r.converged);
        assert_abs_diff_eq!(r.energy, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(r.mu, 0.5, epsilon = 1e-6);
        assert!(r.warning.is_some());
    }

    #[test]
    fn max_iters_flags_non_convergence() {
        let g = make_grid(vec![Axis::sine(-1.0, 1.0, 32).unwrap()]).unwrap();
        let p = Params {
            potential: Potential::Box,
            frame: Frame::Tilde,
            omega: 5.0,
            ..Params::default()
        };
        let opts = GfdnOptions {
            max_iters: 1,
            ..GfdnOptions::default()
        };
        let r = besp_solve(&p, &g, &opts).unwrap();
        assert!(!r.converged && r.iterations == 1 && r.warning.is_some());
    }

    #[test]
    fn setup_errors() {
        let s = make_grid(vec![Axis::sine(-1.0, 1.0, 32).unwrap()]).unwrap();
        let p = Params {
            potential: Potential::Box,
            k0: 1.0,
            ..Params::default()
        };
        assert!(gfdn_solve(&p, &s, &GfdnOptions::default()).is_err());
        assert!(besp_solve(&p, &s, &GfdnOptions::default()).is_err());
        let bad = GfdnOptions {
            tau: -1.0,
            ..GfdnOptions::default()
        };
        assert!(gfdn_solve(&Params::default(), &grid1d(32), &bad).is_err());
    }

    #[test]
    fn default_start_order_follows_omega_sign() {
        let neg = Params {
            omega: -2.0,
            ..Params::default()
        };
        assert_eq!(default_starts(&neg)[0], InitialGuess::GaussianPair);
        let pos = Params { omega: 2.0, ..neg };
        assert_eq!(default_starts(&pos)[0], InitialGuess::GaussianOpposite);
    }

    #[test]
    fn slope_of_power_law() {
        let x: Vec<f64> = [1.0f64, 2.0, 4.0].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = [3.0f64, 12.0, 48.0].iter().map(|v| v.ln()).collect();
        assert_abs_diff_eq!(fit_slope(&x, &y), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rate_study_needs_three_points() {
        let g = grid1d(32);
        let r = limit_study(
            LimitKind::RateSmallK0,
            &Params::default(),
            &g,
            &GfdnOptions::default(),
            &[0.1, 0.2],
        );
        assert!(matches!(r, Err(Error::Study(_))));
    }

    #[test]
    fn extrapolation_shortcuts_a_slow_mode() {
        // Equal beta12 and beta22 make the mass-transfer mode nearly neutral.
        let g = grid1d(64);
        let p = Params {
            omega: 0.05,
            ..Params::default().with_betas(10.0, 9.0, 9.0)
        };
        let solve = |extrapolate| {
            let o = GfdnOptions {
                tol: 1e-9,
                extrapolate,
                ..GfdnOptions::default()
            };
            gfdn_solve(&p, &g, &o).unwrap()
        };
        let (plain, fast) = (solve(false), solve(true));
        assert!(plain.converged && fast.converged);
        assert!(
            fast.iterations * 4 < plain.iterations,
            "{} vs {}",
            fast.iterations,
            plain.iterations
        );
        assert_abs_diff_eq!(fast.energy, plain.energy, epsilon = 1e-10);
        assert!(fast.phi.max_diff(&plain.phi) < 1e-6);
    }
}
