//! Tensor-product grids and the spectral machinery shared by every solver.
//!
//! Fields are stored as flat row-major `Vec<Complex64>` (last axis fastest).
//! Spectral coefficients use the same layout. Along a Fourier axis the
//! coefficient index follows the usual FFT order (`k = 0, 1, .., n/2-1,
//! -n/2, .., -1`); along a sine axis index `i` holds mode `k = i + 1`.
//!
//! Normalization: `forward` carries the `1/n` factor and `inverse` none, so a
//! basis function `e^{i mu_k (x - lo)}` transforms to a unit coefficient. The
//! sine pair is scaled the same way: `sin(mu_k (x - lo))` maps to a unit entry.
//! With this convention the discrete Parseval identities read
//!
//! * Fourier axis: `h * sum |f_j|^2 = L * sum |c_k|^2`
//! * Sine axis: `h * sum |f_j|^2 = (L / 2) * sum |c_k|^2`
//!
//! and [`Grid::parseval_weight`] returns the product of the per-axis factors.

use std::f64::consts::PI;
use std::fmt;
use std::iter::Sum;
use std::ops::Mul;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Periodic, complex exponentials.
    Fourier,
    /// Homogeneous Dirichlet, sines on interior nodes.
    Sine,
}

/// One axis of a tensor-product grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub basis: Basis,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize, basis: Basis) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidAxis("bounds must be finite".into()));
        }
        if hi <= lo {
            return Err(Error::InvalidAxis(format!(
                "hi ({hi}) must exceed lo ({lo})"
            )));
        }
        if n < 4 {
            return Err(Error::InvalidAxis(format!(
                "n = {n} is below the minimum of 4"
            )));
        }
        if basis == Basis::Fourier && n % 2 != 0 {
            return Err(Error::InvalidAxis(format!(
                "Fourier axis needs even n, got {n}"
            )));
        }
        Ok(Self { lo, hi, n, basis })
    }

    pub fn fourier(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(lo, hi, n, Basis::Fourier)
    }

    pub fn sine(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(lo, hi, n, Basis::Sine)
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.n as f64
    }

    /// Number of stored samples: `n` for Fourier, `n - 1` interior nodes for sine.
    pub fn samples(&self) -> usize {
        match self.basis {
            Basis::Fourier => self.n,
            Basis::Sine => self.n - 1,
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        match self.basis {
            Basis::Fourier => (0..self.n).map(|j| self.lo + j as f64 * h).collect(),
            Basis::Sine => (1..self.n).map(|j| self.lo + j as f64 * h).collect(),
        }
    }

    /// Integer mode number stored at coefficient index `i`.
    pub fn mode_number(&self, i: usize) -> i64 {
        match self.basis {
            Basis::Fourier => {
                let half = (self.n / 2) as i64;
                let i = i as i64;
                if i < half {
                    i
                } else {
                    i - self.n as i64
                }
            }
            Basis::Sine => i as i64 + 1,
        }
    }

    /// Coefficient index holding mode `k`, if that mode exists on this axis.
    pub fn mode_index(&self, k: i64) -> Option<usize> {
        let n = self.n as i64;
        match self.basis {
            Basis::Fourier => {
                if k < -n / 2 || k >= n / 2 {
                    None
                } else {
                    Some(k.rem_euclid(n) as usize)
                }
            }
            Basis::Sine => {
                if k < 1 || k > n - 1 {
                    None
                } else {
                    Some((k - 1) as usize)
                }
            }
        }
    }

    /// Spectral multipliers `mu_k` in coefficient storage order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let scale = match self.basis {
            Basis::Fourier => 2.0 * PI / self.length(),
            Basis::Sine => PI / self.length(),
        };
        (0..self.samples())
            .map(|i| scale * self.mode_number(i) as f64)
            .collect()
    }
}

#[derive(Clone)]
struct AxisPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Tensor-product grid with precomputed nodes, wavenumbers and FFT plans.
#[derive(Clone)]
pub struct Grid {
    axes: Vec<Axis>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    nodes: Vec<Vec<f64>>,
    wavenumbers: Vec<Vec<f64>>,
    plans: Vec<AxisPlan>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("axes", &self.axes).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.axes == other.axes
    }
}

pub fn make_grid(axes: Vec<Axis>) -> Result<Grid> {
    Grid::new(axes)
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::InvalidDimension(axes.len()));
        }
        // Re-validate in case the axes were built by struct literal.
        for a in &axes {
            Axis::new(a.lo, a.hi, a.n, a.basis)?;
        }
        let shape: Vec<usize> = axes.iter().map(Axis::samples).collect();
        let mut strides = vec![1; shape.len()];
        for a in (0..shape.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        let mut planner = FftPlanner::new();
        let plans = axes
            .iter()
            .map(|a| {
                let len = match a.basis {
                    Basis::Fourier => a.n,
                    Basis::Sine => 2 * a.n,
                };
                AxisPlan {
                    forward: planner.plan_fft_forward(len),
                    inverse: planner.plan_fft_inverse(len),
                }
            })
            .collect();
        Ok(Self {
            nodes: axes.iter().map(Axis::nodes).collect(),
            wavenumbers: axes.iter().map(Axis::wavenumbers).collect(),
            axes,
            shape,
            strides,
            plans,
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn nodes(&self, a: usize) -> &[f64] {
        &self.nodes[a]
    }

    pub fn wavenumbers(&self, a: usize) -> &[f64] {
        &self.wavenumbers[a]
    }

    /// The common basis of all axes, or `None` for mixed grids.
    pub fn basis(&self) -> Option<Basis> {
        let first = self.axes[0].basis;
        self.axes.iter().all(|a| a.basis == first).then_some(first)
    }

    pub fn is_fourier(&self) -> bool {
        self.basis() == Some(Basis::Fourier)
    }

    pub fn is_sine(&self) -> bool {
        self.basis() == Some(Basis::Sine)
    }

    /// Volume element `h^d` of the rectangle rule.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Weight `W` such that `quadrature(|f|^2) = W * sum |c|^2`.
    pub fn parseval_weight(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| match a.basis {
                Basis::Fourier => a.length(),
                Basis::Sine => a.length() / 2.0,
            })
            .product()
    }

    /// Multi-index of flat position `idx`.
    pub fn unravel(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for a in 0..self.dim() {
            out[a] = idx / self.strides[a];
            idx %= self.strides[a];
        }
        out
    }

    /// Node coordinate along axis `a` for every flat position.
    pub fn coordinate(&self, a: usize) -> Vec<f64> {
        let nodes = &self.nodes[a];
        let stride = self.strides[a];
        let m = self.shape[a];
        (0..self.len()).map(|i| nodes[(i / stride) % m]).collect()
    }

    /// Wavenumber along axis `a` for every flat spectral position.
    pub fn wavenumber_field(&self, a: usize) -> Vec<f64> {
        let mu = &self.wavenumbers[a];
        let stride = self.strides[a];
        let m = self.shape[a];
        (0..self.len()).map(|i| mu[(i / stride) % m]).collect()
    }

    /// `|mu|^2` summed over all axes, in spectral storage order.
    pub fn wavenumber_squared(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for a in 0..self.dim() {
            for (o, mu) in out.iter_mut().zip(self.wavenumber_field(a)) {
                *o += mu * mu;
            }
        }
        out
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len == self.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.len(),
                got: len,
            })
        }
    }

    /// Rectangle-rule integral `h^d * sum samples`.
    pub fn quadrature<T>(&self, samples: &[T]) -> Result<T>
    where
        T: Copy + Sum<T> + Mul<f64, Output = T>,
    {
        self.check_len(samples.len())?;
        Ok(samples.iter().copied().sum::<T>() * self.cell_volume())
    }

    pub fn forward(&self, field: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = field.to_vec();
        self.forward_in_place(&mut out)?;
        Ok(out)
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = coeffs.to_vec();
        self.inverse_in_place(&mut out)?;
        Ok(out)
    }

    pub fn forward_in_place(&self, data: &mut [Complex64]) -> Result<()> {
        self.check_len(data.len())?;
        for a in 0..self.dim() {
            self.transform_axis(data, a, Direction::Forward);
        }
        Ok(())
    }

    pub fn inverse_in_place(&self, data: &mut [Complex64]) -> Result<()> {
        self.check_len(data.len())?;
        for a in 0..self.dim() {
            self.transform_axis(data, a, Direction::Inverse);
        }
        Ok(())
    }

    /// Transform along a subset of axes only.
    pub fn forward_axes(&self, data: &mut [Complex64], axes: &[usize]) -> Result<()> {
        self.check_len(data.len())?;
        for &a in axes {
            if a >= self.dim() {
                return Err(Error::AxisOutOfRange(a));
            }
            self.transform_axis(data, a, Direction::Forward);
        }
        Ok(())
    }

    pub fn inverse_axes(&self, data: &mut [Complex64], axes: &[usize]) -> Result<()> {
        self.check_len(data.len())?;
        for &a in axes {
            if a >= self.dim() {
                return Err(Error::AxisOutOfRange(a));
            }
            self.transform_axis(data, a, Direction::Inverse);
        }
        Ok(())
    }

    /// Spectral first derivative along axis `a`, evaluated on the nodes.
    ///
    /// On a sine axis the derivative of the sine interpolant is a cosine
    /// series, which is summed back onto the interior nodes.
    pub fn derivative(&self, field: &[Complex64], a: usize) -> Result<Vec<Complex64>> {
        self.check_len(field.len())?;
        if a >= self.dim() {
            return Err(Error::AxisOutOfRange(a));
        }
        let mut out = field.to_vec();
        let axis = self.axes[a];
        let mu = self.wavenumbers[a].clone();
        let plan = self.plans[a].clone();
        let n = axis.n;
        match axis.basis {
            Basis::Fourier => {
                let mut scratch =
                    vec![Complex64::default(); plan.forward.get_inplace_scratch_len()];
                self.for_each_line(&mut out, a, |line| {
                    plan.forward.process_with_scratch(line, &mut scratch);
                    let scale = 1.0 / n as f64;
                    for (c, &m) in line.iter_mut().zip(&mu) {
                        *c *= Complex64::new(0.0, m * scale);
                    }
                    plan.inverse.process_with_scratch(line, &mut scratch);
                });
            }
            Basis::Sine => {
                let mut ext = vec![Complex64::default(); 2 * n];
                let mut scratch =
                    vec![Complex64::default(); plan.forward.get_inplace_scratch_len()];
                self.for_each_line(&mut out, a, |line| {
                    sine_forward_line(line, &mut ext, &mut scratch, &*plan.forward);
                    for (c, &m) in line.iter_mut().zip(&mu) {
                        *c *= m;
                    }
                    // Even extension: E_j = 2 sum_k a_k cos(pi j k / n).
                    ext.iter_mut().for_each(|v| *v = Complex64::default());
                    for (k, &c) in line.iter().enumerate() {
                        ext[k + 1] = c;
                        ext[2 * n - k - 1] = c;
                    }
                    plan.forward.process_with_scratch(&mut ext, &mut scratch);
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = ext[j + 1] * 0.5;
                    }
                });
            }
        }
        Ok(out)
    }

    fn transform_axis(&self, data: &mut [Complex64], a: usize, dir: Direction) {
        let axis = self.axes[a];
        let plan = &self.plans[a];
        let n = axis.n;
        match axis.basis {
            Basis::Fourier => {
                let fft = match dir {
                    Direction::Forward => &plan.forward,
                    Direction::Inverse => &plan.inverse,
                };
                let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
                let scale = 1.0 / n as f64;
                self.for_each_line(data, a, |line| {
                    fft.process_with_scratch(line, &mut scratch);
                    if dir == Direction::Forward {
                        line.iter_mut().for_each(|c| *c *= scale);
                    }
                });
            }
            Basis::Sine => {
                let mut ext = vec![Complex64::default(); 2 * n];
                let mut scratch =
                    vec![Complex64::default(); plan.forward.get_inplace_scratch_len()];
                self.for_each_line(data, a, |line| {
                    sine_forward_line(line, &mut ext, &mut scratch, &*plan.forward);
                    if dir == Direction::Inverse {
                        // The sine synthesis sum equals n/2 times the analysis map.
                        let s = n as f64 / 2.0;
                        line.iter_mut().for_each(|c| *c *= s);
                    }
                });
            }
        }
    }

    /// Apply `f` to every 1D line along axis `a`. Lines along the last axis
    /// are contiguous and processed in place; others are gathered.
    fn for_each_line<F: FnMut(&mut [Complex64])>(
        &self,
        data: &mut [Complex64],
        a: usize,
        mut f: F,
    ) {
        let m = self.shape[a];
        let inner = self.strides[a];
        if inner == 1 {
            data.chunks_exact_mut(m).for_each(f);
            return;
        }
        let outer = self.len() / (m * inner);
        let mut buf = vec![Complex64::default(); m];
        for o in 0..outer {
            for i in 0..inner {
                let start = o * m * inner + i;
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = data[start + j * inner];
                }
                f(&mut buf);
                for (j, b) in buf.iter().enumerate() {
                    data[start + j * inner] = *b;
                }
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

/// `c_k = (2/n) sum_j f_j sin(pi j k / n)` via the odd extension of length `2n`.
fn sine_forward_line(
    line: &mut [Complex64],
    ext: &mut [Complex64],
    scratch: &mut [Complex64],
    fft: &dyn Fft<f64>,
) {
    let m = line.len();
    let n = m + 1;
    ext.iter_mut().for_each(|v| *v = Complex64::default());
    for (j, &v) in line.iter().enumerate() {
        ext[j + 1] = v;
        ext[2 * n - j - 1] = -v;
    }
    fft.process_with_scratch(ext, scratch);
    // G_k = -2i sum f_j sin(pi j k / n)  =>  c_k = i G_k / n
    let s = Complex64::new(0.0, 1.0 / n as f64);
    for (k, c) in line.iter_mut().enumerate() {
        *c = ext[k + 1] * s;
    }
}
