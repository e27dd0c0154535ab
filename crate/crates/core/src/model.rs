//! Physical parameters, the two-component state, and every functional the
//! solvers and diagnostics evaluate on it.
//!
//! All derivatives are spectral. Kinetic energies go through the discrete
//! Parseval identity of the grid's basis; first-derivative integrands
//! (spin-orbit term, momentum) use the spectral derivative on nodes.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Basis, Grid};

/// Trapping potential selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Potential {
    /// `V_1 = V_2 = (gamma_x^2 x^2 + gamma_y^2 y^2 + gamma_z^2 z^2) / 2`.
    Harmonic,
    /// Zero inside the grid's domain, infinite outside. The wall is the
    /// Dirichlet condition of a sine grid, so this needs a sine basis.
    Box,
}

/// Which set of variables a state is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Original variables with the `i k0 d/dx` spin-orbit term.
    Lab,
    /// Gauge-transformed variables with the oscillatory Raman term.
    Tilde,
}

/// Coefficients of the dimensionless coupled equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub k0: f64,
    pub omega: f64,
    pub delta: f64,
    pub beta11: f64,
    pub beta12: f64,
    pub beta22: f64,
    pub gamma: [f64; 3],
    pub potential: Potential,
    pub frame: Frame,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            k0: 0.0,
            omega: 0.0,
            delta: 0.0,
            beta11: 0.0,
            beta12: 0.0,
            beta22: 0.0,
            gamma: [1.0; 3],
            potential: Potential::Harmonic,
            frame: Frame::Lab,
        }
    }
}

impl Params {
    pub fn with_betas(mut self, beta11: f64, beta12: f64, beta22: f64) -> Self {
        self.beta11 = beta11;
        self.beta12 = beta12;
        self.beta22 = beta22;
        self
    }

    /// Interaction matrix entry; symmetric by construction.
    pub fn beta(&self, j: usize, l: usize) -> f64 {
        match (j, l) {
            (1, 1) => self.beta11,
            (2, 2) => self.beta22,
            _ => self.beta12,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let scalars = [
            self.k0,
            self.omega,
            self.delta,
            self.beta11,
            self.beta12,
            self.beta22,
        ];
        if scalars.iter().chain(&self.gamma).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(
                "all coefficients must be finite".into(),
            ));
        }
        match self.potential {
            Potential::Harmonic => {
                if let Some(a) = (0..grid.dim()).find(|&a| self.gamma[a] <= 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "trap frequency on axis {a} must be positive"
                    )));
                }
            }
            Potential::Box => {
                if !grid.is_sine() {
                    return Err(Error::Unsupported(
                        "box potential needs an all-sine (Dirichlet) grid".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A pair of complex fields sampled on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spinor {
    pub psi1: Vec<Complex64>,
    pub psi2: Vec<Complex64>,
}

impl Spinor {
    pub fn new(psi1: Vec<Complex64>, psi2: Vec<Complex64>) -> Result<Self> {
        if psi1.len() != psi2.len() {
            return Err(Error::DimensionMismatch {
                expected: psi1.len(),
                got: psi2.len(),
            });
        }
        Ok(Self { psi1, psi2 })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            psi1: vec![Complex64::default(); len],
            psi2: vec![Complex64::default(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.psi1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi1.is_empty()
    }

    pub fn component(&self, j: usize) -> &[Complex64] {
        if j == 1 {
            &self.psi1
        } else {
            &self.psi2
        }
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        grid.check_len(self.psi1.len())?;
        grid.check_len(self.psi2.len())
    }

    pub fn is_finite(&self) -> bool {
        self.psi1
            .iter()
            .chain(&self.psi2)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn component_mass(&self, grid: &Grid, j: usize) -> f64 {
        self.component(j).iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.cell_volume()
    }

    pub fn mass(&self, grid: &Grid) -> f64 {
        self.component_mass(grid, 1) + self.component_mass(grid, 2)
    }

    /// Jointly rescale both components so that `||psi1||^2 + ||psi2||^2 = 1`.
    pub fn normalize(&mut self, grid: &Grid) {
        let norm = self.mass(grid).sqrt();
        if norm > 0.0 {
            self.scale(Complex64::new(1.0 / norm, 0.0));
        }
    }

    pub fn scale(&mut self, s: Complex64) {
        self.psi1
            .iter_mut()
            .chain(self.psi2.iter_mut())
            .for_each(|z| *z *= s);
    }

    /// `max_j max_x |psi_j - other_j|`.
    pub fn max_diff(&self, other: &Spinor) -> f64 {
        self.psi1
            .iter()
            .zip(&other.psi1)
            .chain(self.psi2.iter().zip(&other.psi2))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Discrete L2 distance of the full pair.
    pub fn l2_distance(&self, grid: &Grid, other: &Spinor) -> f64 {
        let s: f64 = self
            .psi1
            .iter()
            .zip(&other.psi1)
            .chain(self.psi2.iter().zip(&other.psi2))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (s * grid.cell_volume()).sqrt()
    }

    pub fn density(&self, j: usize) -> Vec<f64> {
        self.component(j).iter().map(|z| z.norm_sqr()).collect()
    }
}

/// L2 norm of a real field on the grid.
pub fn l2_norm_real(grid: &Grid, f: &[f64]) -> f64 {
    (f.iter().map(|v| v * v).sum::<f64>() * grid.cell_volume()).sqrt()
}

/// `|| |a| - |b| ||` for two complex fields.
pub fn modulus_distance(grid: &Grid, a: &[Complex64], b: &[Complex64]) -> f64 {
    let s: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x.norm() - y.norm()).powi(2))
        .sum();
    (s * grid.cell_volume()).sqrt()
}

/// One time slice (or iterate) of scalar diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub mass: f64,
    pub mass1: f64,
    pub mass2: f64,
    pub delta_n: f64,
    pub energy: f64,
    pub chem_mu: f64,
    pub xc: Vec<f64>,
    pub momentum: Vec<f64>,
    /// `Re int psi1 conj(psi2)` (lab) or `Re int e^{2 i k0 x} psi1 conj(psi2)` (tilde).
    pub raman_overlap: f64,
}

pub fn potential_field(params: &Params, grid: &Grid) -> Result<(Vec<f64>, Vec<f64>)> {
    params.validate(grid)?;
    let v = match params.potential {
        Potential::Box => vec![0.0; grid.len()],
        Potential::Harmonic => {
            let mut v = vec![0.0; grid.len()];
            for a in 0..grid.dim() {
                let g2 = params.gamma[a] * params.gamma[a];
                for (vi, x) in v.iter_mut().zip(grid.coordinate(a)) {
                    *vi += 0.5 * g2 * x * x;
                }
            }
            v
        }
    };
    Ok((v.clone(), v))
}

/// Term-by-term breakdown of an energy evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub potential: f64,
    pub detuning: f64,
    pub raman: f64,
    pub spin_orbit: f64,
    pub interaction: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.kinetic
            + self.potential
            + self.detuning
            + self.raman
            + self.spin_orbit
            + self.interaction
    }
}

/// `(1/2) int |grad f|^2` through Parseval.
pub fn kinetic_energy(grid: &Grid, f: &[Complex64]) -> Result<f64> {
    let c = grid.forward(f)?;
    let k2 = grid.wavenumber_squared();
    let s: f64 = c.iter().zip(&k2).map(|(c, k)| c.norm_sqr() * k).sum();
    Ok(0.5 * grid.parseval_weight() * s)
}

/// `Re int i conj(f) df/dx`.
fn spin_orbit_integral(grid: &Grid, f: &[Complex64]) -> Result<f64> {
    if grid.axis(0).basis == Basis::Fourier {
        let c = grid.forward(f)?;
        let mu = grid.wavenumber_field(0);
        let s: f64 = c.iter().zip(&mu).map(|(c, m)| c.norm_sqr() * m).sum();
        Ok(-grid.parseval_weight() * s)
    } else {
        let d = grid.derivative(f, 0)?;
        let s: Complex64 = f.iter().zip(&d).map(|(a, b)| a.conj() * b).sum();
        Ok(-s.im * grid.cell_volume())
    }
}

/// `e^{i 2 k0 x}` on every node.
pub fn raman_phase(grid: &Grid, k0: f64) -> Vec<Complex64> {
    grid.coordinate(0)
        .into_iter()
        .map(|x| Complex64::from_polar(1.0, 2.0 * k0 * x))
        .collect()
}

/// `Re int psi1 conj(psi2)` in the lab frame, `Re int e^{2ik0x} psi1 conj(psi2)` in the tilde frame.
pub fn raman_overlap(grid: &Grid, phi: &Spinor, params: &Params) -> Result<f64> {
    phi.check(grid)?;
    let s: Complex64 = match params.frame {
        Frame::Lab => phi
            .psi1
            .iter()
            .zip(&phi.psi2)
            .map(|(a, b)| a * b.conj())
            .sum(),
        Frame::Tilde => raman_phase(grid, params.k0)
            .iter()
            .zip(phi.psi1.iter().zip(&phi.psi2))
            .map(|(e, (a, b))| e * a * b.conj())
            .sum(),
    };
    Ok(s.re * grid.cell_volume())
}

/// `int conj(psi1) psi2`.
pub fn spin_coherence(grid: &Grid, phi: &Spinor) -> Result<Complex64> {
    phi.check(grid)?;
    let s: Complex64 = phi
        .psi1
        .iter()
        .zip(&phi.psi2)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(s * grid.cell_volume())
}

/// `int (beta11/2 |psi1|^4 + beta22/2 |psi2|^4 + beta12 |psi1|^2 |psi2|^2)`.
pub fn interaction_energy(grid: &Grid, phi: &Spinor, params: &Params) -> Result<f64> {
    phi.check(grid)?;
    let s: f64 = phi
        .psi1
        .iter()
        .zip(&phi.psi2)
        .map(|(a, b)| {
            let (r1, r2) = (a.norm_sqr(), b.norm_sqr());
            0.5 * params.beta11 * r1 * r1 + 0.5 * params.beta22 * r2 * r2 + params.beta12 * r1 * r2
        })
        .sum();
    Ok(s * grid.cell_volume())
}

/// Energy terms in the frame selected by `params.frame`.
pub fn energy_parts(grid: &Grid, phi: &Spinor, params: &Params) -> Result<EnergyParts> {
    phi.check(grid)?;
    let (v1, v2) = potential_field(params, grid)?;
    let dv = grid.cell_volume();
    let potential: f64 = phi
        .psi1
        .iter()
        .zip(&v1)
        .map(|(z, v)| z.norm_sqr() * v)
        .chain(phi.psi2.iter().zip(&v2).map(|(z, v)| z.norm_sqr() * v))
        .sum::<f64>()
        * dv;
    let n1 = phi.component_mass(grid, 1);
    let n2 = phi.component_mass(grid, 2);
    let spin_orbit = match params.frame {
        Frame::Lab if params.k0 != 0.0 => {
            params.k0
                * (spin_orbit_integral(grid, &phi.psi1)? - spin_orbit_integral(grid, &phi.psi2)?)
        }
        _ => 0.0,
    };
    Ok(EnergyParts {
        kinetic: kinetic_energy(grid, &phi.psi1)? + kinetic_energy(grid, &phi.psi2)?,
        potential,
        detuning: 0.5 * params.delta * (n1 - n2),
        raman: params.omega * raman_overlap(grid, phi, params)?,
        spin_orbit,
        interaction: interaction_energy(grid, phi, params)?,
    })
}

pub fn energy(grid: &Grid, phi: &Spinor, params: &Params) -> Result<f64> {
    Ok(energy_parts(grid, phi, params)?.total())
}

/// Reduced energy functionals used by the limit studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyVariant {
    /// Lab-frame energy with the spin-orbit term removed (the `k0 = 0` energy).
    E0NoSo,
    /// Tilde-frame energy with the Raman term removed.
    ETilde0,
    /// Single-field large-Raman limit energy, evaluated on `psi1`.
    ESLargeOmega,
}

pub fn energy_variant(
    grid: &Grid,
    phi: &Spinor,
    params: &Params,
    variant: EnergyVariant,
) -> Result<f64> {
    match variant {
        EnergyVariant::E0NoSo => {
            let p = Params {
                frame: Frame::Lab,
                ..*params
            };
            let parts = energy_parts(grid, phi, &p)?;
            Ok(parts.total() - parts.spin_orbit)
        }
        EnergyVariant::ETilde0 => {
            let p = Params {
                frame: Frame::Tilde,
                ..*params
            };
            let parts = energy_parts(grid, phi, &p)?;
            Ok(parts.total() - parts.raman)
        }
        EnergyVariant::ESLargeOmega => energy_s(grid, &phi.psi1, params),
    }
}

/// `int (|grad f|^2/2 + (V1+V2)/2 |f|^2 + (beta11+beta22+2beta12)/4 |f|^4)`.
pub fn energy_s(grid: &Grid, f: &[Complex64], params: &Params) -> Result<f64> {
    grid.check_len(f.len())?;
    let (v1, v2) = potential_field(params, grid)?;
    let b = (params.beta11 + params.beta22 + 2.0 * params.beta12) / 4.0;
    let local: f64 = f
        .iter()
        .zip(v1.iter().zip(&v2))
        .map(|(z, (a, c))| {
            let r = z.norm_sqr();
            0.5 * (a + c) * r + b * r * r
        })
        .sum();
    Ok(kinetic_energy(grid, f)? + local * grid.cell_volume())
}

pub fn chemical_potential(grid: &Grid, phi: &Spinor, params: &Params) -> Result<f64> {
    Ok(energy(grid, phi, params)? + interaction_energy(grid, phi, params)?)
}

pub fn observables(grid: &Grid, phi: &Spinor, params: &Params) -> Result<Observables> {
    phi.check(grid)?;
    let parts = energy_parts(grid, phi, params)?;
    let energy = parts.total();
    let chem_mu = energy + parts.interaction;
    let mass1 = phi.component_mass(grid, 1);
    let mass2 = phi.component_mass(grid, 2);
    let dv = grid.cell_volume();
    let density: Vec<f64> = phi
        .psi1
        .iter()
        .zip(&phi.psi2)
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .collect();
    let mut xc = Vec::with_capacity(grid.dim());
    let mut momentum = Vec::with_capacity(grid.dim());
    for a in 0..grid.dim() {
        let x = grid.coordinate(a);
        xc.push(x.iter().zip(&density).map(|(x, r)| x * r).sum::<f64>() * dv);
        let d1 = grid.derivative(&phi.psi1, a)?;
        let d2 = grid.derivative(&phi.psi2, a)?;
        let p: f64 = phi
            .psi1
            .iter()
            .zip(&d1)
            .chain(phi.psi2.iter().zip(&d2))
            .map(|(z, d)| (z.conj() * d).im)
            .sum();
        momentum.push(p * dv);
    }
    Ok(Observables {
        mass: mass1 + mass2,
        mass1,
        mass2,
        delta_n: mass1 - mass2,
        energy,
        chem_mu,
        xc,
        momentum,
        raman_overlap: raman_overlap(grid, phi, params)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaugeDirection {
    ToTilde,
    ToLab,
}

/// Multiply `(psi1, psi2)` by `(e^{-ik0x}, e^{ik0x})` (to tilde) or the inverse phases.
pub fn gauge_transform(
    grid: &Grid,
    phi: &Spinor,
    k0: f64,
    direction: GaugeDirection,
) -> Result<Spinor> {
    phi.check(grid)?;
    let sign = match direction {
        GaugeDirection::ToTilde => -1.0,
        GaugeDirection::ToLab => 1.0,
    };
    let x = grid.coordinate(0);
    let psi1 = phi
        .psi1
        .iter()
        .zip(&x)
        .map(|(z, x)| z * Complex64::from_polar(1.0, sign * k0 * x))
        .collect();
    let psi2 = phi
        .psi2
        .iter()
        .zip(&x)
        .map(|(z, x)| z * Complex64::from_polar(1.0, -sign * k0 * x))
        .collect();
    Ok(Spinor { psi1, psi2 })
}

/// Stationary Hamiltonian applied to `phi` in the frame of `params`.
pub fn apply_hamiltonian(grid: &Grid, phi: &Spinor, params: &Params) -> Result<Spinor> {
    phi.check(grid)?;
    let (v1, v2) = potential_field(params, grid)?;
    let k2 = grid.wavenumber_squared();
    let lap = |f: &[Complex64]| -> Result<Vec<Complex64>> {
        let mut c = grid.forward(f)?;
        c.iter_mut().zip(&k2).for_each(|(c, k)| *c *= 0.5 * k);
        grid.inverse(&c)
    };
    let mut h1 = lap(&phi.psi1)?;
    let mut h2 = lap(&phi.psi2)?;
    if params.frame == Frame::Lab && params.k0 != 0.0 {
        let d1 = grid.derivative(&phi.psi1, 0)?;
        let d2 = grid.derivative(&phi.psi2, 0)?;
        let ik0 = Complex64::new(0.0, params.k0);
        h1.iter_mut().zip(&d1).for_each(|(h, d)| *h += ik0 * d);
        h2.iter_mut().zip(&d2).for_each(|(h, d)| *h -= ik0 * d);
    }
    let phase = match params.frame {
        Frame::Lab => None,
        Frame::Tilde => Some(raman_phase(grid, params.k0)),
    };
    let half_omega = 0.5 * params.omega;
    for i in 0..grid.len() {
        let (a, b) = (phi.psi1[i], phi.psi2[i]);
        let (r1, r2) = (a.norm_sqr(), b.norm_sqr());
        let p1 = v1[i] + 0.5 * params.delta + params.beta11 * r1 + params.beta12 * r2;
        let p2 = v2[i] - 0.5 * params.delta + params.beta12 * r1 + params.beta22 * r2;
        let (c12, c21) = match &phase {
            None => (b, a),
            Some(e) => (e[i].conj() * b, e[i] * a),
        };
        h1[i] += p1 * a + half_omega * c12;
        h2[i] += p2 * b + half_omega * c21;
    }
    Ok(Spinor { psi1: h1, psi2: h2 })
}

/// Discrete L2 norm of `H(phi) phi - mu phi`.
pub fn eigen_residual(grid: &Grid, phi: &Spinor, params: &Params) -> Result<f64> {
    let h = apply_hamiltonian(grid, phi, params)?;
    let mu = chemical_potential(grid, phi, params)?;
    let diff = Spinor {
        psi1: h
            .psi1
            .iter()
            .zip(&phi.psi1)
            .map(|(h, p)| h - mu * p)
            .collect(),
        psi2: h
            .psi2
            .iter()
            .zip(&phi.psi2)
            .map(|(h, p)| h - mu * p)
            .collect(),
    };
    Ok(diff.mass(grid).sqrt())
}

/// Interaction coefficients of the reduced `target_d`-dimensional model from
/// the 3D ones. `target_d = 3` is the identity.
pub fn reduce_dimension(
    g: [f64; 3],
    gamma_y: f64,
    gamma_z: f64,
    target_d: usize,
) -> Result<[f64; 3]> {
    let factor = match target_d {
        3 => 1.0,
        2 => {
            if gamma_z <= 0.0 {
                return Err(Error::InvalidParams("gamma_z must be positive".into()));
            }
            (gamma_z / (2.0 * PI)).sqrt()
        }
        1 => {
            if gamma_y <= 0.0 || gamma_z <= 0.0 {
                return Err(Error::InvalidParams(
                    "gamma_y and gamma_z must be positive".into(),
                ));
            }
            (gamma_y * gamma_z).sqrt() / (2.0 * PI)
        }
        d => return Err(Error::InvalidDimension(d)),
    };
    Ok(g.map(|v| v * factor))
}

/// Dimensional inputs (SI units unless stated).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalInputs {
    pub mass: f64,
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
    /// Scattering lengths `a11, a12, a22`.
    pub scattering: [f64; 3],
    pub atom_number: f64,
    /// Raman laser wave number.
    pub k0: f64,
    pub delta: f64,
    /// Rabi frequency.
    pub omega_raman: f64,
    pub hbar: f64,
}

/// Reduced Planck constant in J s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    pub omega0: f64,
    pub time: f64,
    pub length: f64,
    /// 3D interaction constants `g11, g12, g22`.
    pub g: [f64; 3],
    pub params: Params,
}

pub fn nondimensionalize(input: &PhysicalInputs) -> Result<Scaling> {
    let freqs = [input.omega_x, input.omega_y, input.omega_z];
    if input.mass <= 0.0 || input.hbar <= 0.0 || freqs.iter().any(|w| *w <= 0.0) {
        return Err(Error::InvalidParams(
            "mass, hbar and trap frequencies must be positive".into(),
        ));
    }
    let omega0 = freqs.iter().copied().fold(f64::INFINITY, f64::min);
    let length = (input.hbar / (input.mass * omega0)).sqrt();
    let g = input
        .scattering
        .map(|a| 4.0 * PI * input.atom_number * a / length);
    let params = Params {
        k0: input.k0 * length / 2.0,
        omega: input.omega_raman / omega0,
        delta: input.delta / omega0,
        beta11: g[0],
        beta12: g[1],
        beta22: g[2],
        gamma: freqs.map(|w| w / omega0),
        potential: Potential::Harmonic,
        frame: Frame::Lab,
    };
    Ok(Scaling {
        omega0,
        time: 1.0 / omega0,
        length,
        g,
        params,
    })
}

/// The indicator `I(x)`; the flag is true when `I` is not identically zero.
pub fn uniqueness_indicator(params: &Params, grid: &Grid) -> Result<(Vec<f64>, bool)> {
    let (v1, v2) = potential_field(params, grid)?;
    let b = (params.beta11 - params.beta12).powi(2) + (params.beta12 - params.beta22).powi(2);
    let field: Vec<f64> = v1
        .iter()
        .zip(&v2)
        .map(|(a, c)| (a - c + params.delta).powi(2) + b)
        .collect();
    let nonzero = field.iter().any(|v| *v != 0.0);
    Ok((field, nonzero))
}

/// Whether the 2D interaction coefficients satisfy the existence condition
/// for a given best Gagliardo-Nirenberg constant `cb` (user supplied).
pub fn existence_condition_2d(params: &Params, cb: f64) -> bool {
    params.beta11 > -cb
        && params.beta22 > -cb
        && params.beta12 >= -cb - ((cb + params.beta11) * (cb + params.beta22)).sqrt()
}

/// Rescaled coefficients of the coupled semiclassical symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandParams {
    pub k_inf: f64,
    pub omega_inf: f64,
    pub delta_inf: f64,
}

/// Eigenvalues `(lambda_1, lambda_2)`, `lambda_1 >= lambda_2`, of the
/// semiclassical symbol at phase-space point `xi` with local potentials.
pub fn band_eigenvalues(xi: &[f64], band: &BandParams, v1: f64, v2: f64) -> (f64, f64) {
    let xi2: f64 = xi.iter().map(|v| v * v).sum();
    let xi1 = xi.first().copied().unwrap_or(0.0);
    let mean = 0.5 * xi2 + 0.5 * (v1 + v2);
    let gap = (v1 - v2 + 2.0 * band.k_inf * xi1 + band.delta_inf).hypot(band.omega_inf);
    (mean + 0.5 * gap, mean - 0.5 * gap)
}
