//! Centre-of-mass laws: the exact second-order law, closed-form small-`k0`
//! approximations, and the reduced LDA ODE.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Basis, Grid};
use crate::model::{self, Frame, GaugeDirection, Params, Potential, Spinor};

fn lab_view(grid: &Grid, phi: &Spinor, params: &Params) -> Result<Spinor> {
    match params.frame {
        Frame::Lab => Ok(phi.clone()),
        Frame::Tilde => model::gauge_transform(grid, phi, params.k0, GaugeDirection::ToLab),
    }
}

/// `Im int conj(psi1) psi2` of the lab-frame fields.
pub fn coherence_im(grid: &Grid, phi: &Spinor, params: &Params) -> Result<f64> {
    Ok(model::spin_coherence(grid, &lab_view(grid, phi, params)?)?.im)
}

/// `x_c'' = -Lambda x_c - 2 k0 Omega Im(int conj(psi1) psi2) e_x` at the current state.
pub fn com_rhs_exact(grid: &Grid, phi: &Spinor, params: &Params) -> Result<Vec<f64>> {
    if params.potential != Potential::Harmonic {
        return Err(Error::Unsupported(
            "the centre-of-mass law needs a harmonic trap".into(),
        ));
    }
    let obs = model::observables(grid, phi, params)?;
    let coupling = 2.0 * params.k0 * params.omega * coherence_im(grid, phi, params)?;
    Ok((0..grid.dim())
        .map(|a| {
            let f = -params.gamma[a].powi(2) * obs.xc[a];
            if a == 0 {
                f - coupling
            } else {
                f
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComClosedFormInputs {
    pub x0: f64,
    pub p0x: f64,
    pub delta_n0: f64,
    /// `2 Im int conj(psi1) psi2` at `t = 0`.
    pub c0: f64,
    pub gamma_x: f64,
    pub omega: f64,
    pub k0: f64,
    /// Carried for reference; the approximation assumes zero detuning.
    pub delta: f64,
}

impl ComClosedFormInputs {
    /// Initial moments of `phi`. Momentum and coherence are taken in the lab frame.
    pub fn from_spinor(grid: &Grid, phi: &Spinor, params: &Params) -> Result<Self> {
        let lab = lab_view(grid, phi, params)?;
        let lab_params = Params {
            frame: Frame::Lab,
            ..*params
        };
        let obs = model::observables(grid, &lab, &lab_params)?;
        Ok(Self {
            x0: obs.xc[0],
            p0x: obs.momentum[0],
            delta_n0: obs.delta_n,
            c0: 2.0 * model::spin_coherence(grid, &lab)?.im,
            gamma_x: params.gamma[0],
            omega: params.omega,
            k0: params.k0,
            delta: params.delta,
        })
    }

    pub fn is_resonant(&self) -> bool {
        (self.omega.abs() - self.gamma_x).abs() <= 1e-12
    }

    /// Small-`k0` mass-difference approximation `dN0 cos(Omega s) + C0 sin(Omega s)`.
    pub fn delta_n(&self, s: f64) -> f64 {
        self.delta_n0 * (self.omega * s).cos() + self.c0 * (self.omega * s).sin()
    }
}

/// Closed-form `x_c(t)` for small `k0`.
///
/// Off resonance this is the exact solution of
/// `x'' + gamma^2 x = -k0 dN'(t)` with the approximate `dN` above; the
/// resonant branch is its limit at `|Omega| = gamma_x`.
pub fn xc_closed_form(inp: &ComClosedFormInputs, t: f64) -> f64 {
    let g = inp.gamma_x;
    let (k0, om, dn, c0) = (inp.k0, inp.omega, inp.delta_n0, inp.c0);
    let (cg, sg) = ((g * t).cos(), (g * t).sin());
    if inp.is_resonant() {
        let sgn = om.signum();
        (inp.x0 - 0.5 * k0 * dn * t) * cg
            + (inp.p0x - 0.5 * k0 * dn - sgn * 0.5 * g * k0 * c0 * t) * sg / g
    } else {
        let d = g * g - om * om;
        (inp.x0 + k0 * c0 * om / d) * cg + (inp.p0x - g * g * k0 * dn / d) * sg / g
            - k0 * c0 * om / d * (om * t).cos()
            + k0 * dn * om / d * (om * t).sin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaState {
    pub xc: f64,
    pub px: f64,
}

impl LdaState {
    /// Initial state with `P^x(0) = k0 dN(0)`.
    pub fn from_moments(x0: f64, delta_n0: f64, k0: f64) -> Self {
        Self {
            xc: x0,
            px: k0 * delta_n0,
        }
    }

    fn distance(&self, o: &LdaState) -> f64 {
        (self.xc - o.xc).hypot(self.px - o.px)
    }
}

fn lda_root(p: f64, params: &Params) -> (f64, f64) {
    let a = 2.0 * params.k0 * p - params.delta;
    (a, a.hypot(params.omega))
}

fn lda_rhs(s: &LdaState, params: &Params) -> Result<LdaState> {
    let (a, r) = lda_root(s.px, params);
    if r <= f64::MIN_POSITIVE {
        return Err(Error::InvalidParams(
            "LDA force is singular: Omega = 0 and 2 k0 P - delta vanished".into(),
        ));
    }
    Ok(LdaState {
        xc: s.px - params.k0 * a / r,
        px: -params.gamma[0].powi(2) * s.xc,
    })
}

/// `gamma_x^2 x^2 + P^2 - sqrt((2 k0 P - delta)^2 + Omega^2)`.
pub fn lda_invariant(s: &LdaState, params: &Params) -> f64 {
    params.gamma[0].powi(2) * s.xc * s.xc + s.px * s.px - lda_root(s.px, params).1
}

fn rk4(s: &LdaState, params: &Params, h: f64) -> Result<LdaState> {
    let add = |a: &LdaState, k: &LdaState, f: f64| LdaState {
        xc: a.xc + f * k.xc,
        px: a.px + f * k.px,
    };
    let k1 = lda_rhs(s, params)?;
    let k2 = lda_rhs(&add(s, &k1, 0.5 * h), params)?;
    let k3 = lda_rhs(&add(s, &k2, 0.5 * h), params)?;
    let k4 = lda_rhs(&add(s, &k3, h), params)?;
    Ok(LdaState {
        xc: s.xc + h / 6.0 * (k1.xc + 2.0 * k2.xc + 2.0 * k3.xc + k4.xc),
        px: s.px + h / 6.0 * (k1.px + 2.0 * k2.px + 2.0 * k3.px + k4.px),
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LdaSeries {
    pub times: Vec<f64>,
    pub states: Vec<LdaState>,
    pub invariant: Vec<f64>,
}

impl LdaSeries {
    pub fn xc(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.xc).collect()
    }

    pub fn invariant_drift(&self) -> f64 {
        let i0 = self.invariant.first().copied().unwrap_or(0.0);
        self.invariant
            .iter()
            .map(|v| (v - i0).abs())
            .fold(0.0, f64::max)
    }
}

/// Fixed-step classical RK4 integration of the LDA system.
pub fn lda_ode_solve(
    initial: LdaState,
    params: &Params,
    tau: f64,
    t_end: f64,
) -> Result<LdaSeries> {
    if !(tau > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParams(
            "tau must be positive and t_end nonnegative".into(),
        ));
    }
    let n = (t_end / tau).round() as usize;
    let mut out = LdaSeries::default();
    let mut s = initial;
    lda_rhs(&s, params)?;
    for i in 0..=n {
        if i > 0 {
            s = rk4(&s, params, tau)?;
        }
        out.times.push(i as f64 * tau);
        out.states.push(s);
        out.invariant.push(lda_invariant(&s, params));
    }
    Ok(out)
}

/// First return of the LDA orbit to its starting point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitReturn {
    pub period: f64,
    /// Phase-space distance from the initial state at the return.
    pub distance: f64,
}

/// Finds the first full revolution by watching the section through the
/// initial point (constant `P`, or constant `x` when `P' = 0` there) and
/// bisecting the crossing step.
pub fn lda_orbit_return(
    initial: LdaState,
    params: &Params,
    tau: f64,
    t_max: f64,
) -> Result<Option<OrbitReturn>> {
    let d0 = lda_rhs(&initial, params)?;
    let use_p = d0.px != 0.0;
    let section = |s: &LdaState| {
        if use_p {
            (s.px - initial.px) * d0.px.signum()
        } else {
            (s.xc - initial.xc) * d0.xc.signum()
        }
    };
    if !use_p && d0.xc == 0.0 {
        return Ok(Some(OrbitReturn {
            period: 0.0,
            distance: 0.0,
        }));
    }
    let n = (t_max / tau).ceil() as usize;
    let mut s = initial;
    for i in 0..n {
        let next = rk4(&s, params, tau)?;
        if i > 0 && section(&s) < 0.0 && section(&next) >= 0.0 {
            let (mut lo, mut hi) = (0.0, tau);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if section(&rk4(&s, params, mid)?) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let at = rk4(&s, params, hi)?;
            return Ok(Some(OrbitReturn {
                period: i as f64 * tau + hi,
                distance: at.distance(&initial),
            }));
        }
        s = next;
    }
    Ok(None)
}

/// Deviation between two sampled curves over a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesError {
    pub max: f64,
    /// Root mean square in time over the window.
    pub l2: f64,
    pub samples: usize,
}

fn interpolate(t: &[f64], y: &[f64], at: f64) -> Option<f64> {
    if t.is_empty() || at < t[0] || at > *t.last().unwrap() {
        return None;
    }
    let i = t.partition_point(|v| *v <= at);
    if i == 0 {
        return Some(y[0]);
    }
    if i >= t.len() {
        return Some(*y.last().unwrap());
    }
    let (t0, t1) = (t[i - 1], t[i]);
    let w = if t1 > t0 { (at - t0) / (t1 - t0) } else { 0.0 };
    Some(y[i - 1] + w * (y[i] - y[i - 1]))
}

/// Compares `numeric` against `approx` (linearly interpolated onto the
/// numeric sample times) for `window.0 <= t <= window.1`.
pub fn compare_series(
    numeric: (&[f64], &[f64]),
    approx: (&[f64], &[f64]),
    window: (f64, f64),
) -> Result<SeriesError> {
    let (tn, yn) = numeric;
    let (ta, ya) = approx;
    if tn.len() != yn.len() || ta.len() != ya.len() {
        return Err(Error::DimensionMismatch {
            expected: tn.len(),
            got: yn.len(),
        });
    }
    let mut diffs = Vec::new();
    for (t, y) in tn.iter().zip(yn) {
        if *t < window.0 || *t > window.1 {
            continue;
        }
        if let Some(a) = interpolate(ta, ya, *t) {
            diffs.push((*t, y - a));
        }
    }
    if diffs.is_empty() {
        return Err(Error::Study(
            "no overlapping samples in the comparison window".into(),
        ));
    }
    let max = diffs.iter().map(|(_, d)| d.abs()).fold(0.0, f64::max);
    let l2 = if diffs.len() == 1 {
        diffs[0].1.abs()
    } else {
        let mut acc = 0.0;
        for w in diffs.windows(2) {
            acc += 0.5 * (w[0].1.powi(2) + w[1].1.powi(2)) * (w[1].0 - w[0].0);
        }
        let span = diffs.last().unwrap().0 - diffs[0].0;
        (acc / span).sqrt()
    };
    Ok(SeriesError {
        max,
        l2,
        samples: diffs.len(),
    })
}

/// `phi(x - offset)` by exact spectral translation along Fourier axes.
pub fn shift_state(grid: &Grid, phi: &Spinor, offset: &[f64]) -> Result<Spinor> {
    phi.check(grid)?;
    let mut phase = vec![Complex64::new(1.0, 0.0); grid.len()];
    for (a, &d) in offset.iter().enumerate().take(grid.dim()) {
        if d == 0.0 {
            continue;
        }
        if grid.axis(a).basis != Basis::Fourier {
            return Err(Error::Unsupported(
                "spectral shift needs Fourier axes".into(),
            ));
        }
        for (p, mu) in phase.iter_mut().zip(grid.wavenumber_field(a)) {
            *p *= Complex64::from_polar(1.0, -mu * d);
        }
    }
    let shift = |f: &[Complex64]| -> Result<Vec<Complex64>> {
        let mut c = grid.forward(f)?;
        c.iter_mut().zip(&phase).for_each(|(c, p)| *c *= p);
        grid.inverse(&c)
    };
    Ok(Spinor {
        psi1: shift(&phi.psi1)?,
        psi2: shift(&phi.psi2)?,
    })
}
