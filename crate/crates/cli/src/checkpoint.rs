//! Binary state container.
//!
//! Layout, all little endian:
//!
//! ```text
//! "SOCB"  u32 version
//! u32 dim, then per axis: u8 basis (0 fourier, 1 sine), f64 lo, f64 hi, u64 n
//! f64 k0 omega delta beta11 beta12 beta22 gamma_x gamma_y gamma_z
//! u8 potential (0 harmonic, 1 box), u8 frame (0 lab, 1 tilde)
//! u64 iteration, f64 time
//! (f64 re, f64 im) for every node of psi1, then psi2, row-major
//! ```

use std::path::Path;

use socbec_core::{Axis, Basis, Complex64, Frame, Grid, Params, Potential, Spinor};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"SOCB";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint (bad magic bytes)")]
    BadMagic,
    #[error("unsupported checkpoint version {0} (expected {VERSION})")]
    Version(u32),
    #[error("truncated checkpoint")]
    Truncated,
    #[error("{0} unexpected trailing bytes")]
    Trailing(usize),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("checkpoint grid {found:?} does not match the configured grid {expected:?}")]
    GridMismatch {
        expected: Vec<Axis>,
        found: Vec<Axis>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub axes: Vec<Axis>,
    /// Carries the frame the state is expressed in.
    pub params: Params,
    pub iteration: u64,
    pub time: f64,
    pub state: Spinor,
}

impl Checkpoint {
    pub fn new(grid: &Grid, params: &Params, iteration: u64, time: f64, state: &Spinor) -> Self {
        Self {
            axes: grid.axes().to_vec(),
            params: *params,
            iteration,
            time,
            state: state.clone(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let nodes = self.state.len();
        let mut b = Vec::with_capacity(128 + 32 * nodes);
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        b.extend_from_slice(&(self.axes.len() as u32).to_le_bytes());
        for a in &self.axes {
            b.push(match a.basis {
                Basis::Fourier => 0,
                Basis::Sine => 1,
            });
            b.extend_from_slice(&a.lo.to_le_bytes());
            b.extend_from_slice(&a.hi.to_le_bytes());
            b.extend_from_slice(&(a.n as u64).to_le_bytes());
        }
        let p = &self.params;
        for v in [
            p.k0, p.omega, p.delta, p.beta11, p.beta12, p.beta22, p.gamma[0], p.gamma[1],
            p.gamma[2],
        ] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b.push(match p.potential {
            Potential::Harmonic => 0,
            Potential::Box => 1,
        });
        b.push(match p.frame {
            Frame::Lab => 0,
            Frame::Tilde => 1,
        });
        b.extend_from_slice(&self.iteration.to_le_bytes());
        b.extend_from_slice(&self.time.to_le_bytes());
        for z in self.state.psi1.iter().chain(&self.state.psi2) {
            b.extend_from_slice(&z.re.to_le_bytes());
            b.extend_from_slice(&z.im.to_le_bytes());
        }
        b
    }

    /// Decodes a whole checkpoint; any inconsistency fails without
    /// returning partial data.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4).map_err(|_| CheckpointError::BadMagic)? != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(CheckpointError::Version(version));
        }
        let dim = r.u32()? as usize;
        if !(1..=3).contains(&dim) {
            return Err(CheckpointError::Corrupt(format!("dimension {dim}")));
        }
        let mut axes = Vec::with_capacity(dim);
        for _ in 0..dim {
            let basis = match r.u8()? {
                0 => Basis::Fourier,
                1 => Basis::Sine,
                t => return Err(CheckpointError::Corrupt(format!("basis tag {t}"))),
            };
            let (lo, hi, n) = (r.f64()?, r.f64()?, r.u64()?);
            let axis = Axis::new(lo, hi, n as usize, basis)
                .map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
            axes.push(axis);
        }
        let mut v = [0.0; 9];
        for x in &mut v {
            *x = r.f64()?;
        }
        let potential = match r.u8()? {
            0 => Potential::Harmonic,
            1 => Potential::Box,
            t => return Err(CheckpointError::Corrupt(format!("potential tag {t}"))),
        };
        let frame = match r.u8()? {
            0 => Frame::Lab,
            1 => Frame::Tilde,
            t => return Err(CheckpointError::Corrupt(format!("frame tag {t}"))),
        };
        let params = Params {
            k0: v[0],
            omega: v[1],
            delta: v[2],
            beta11: v[3],
            beta12: v[4],
            beta22: v[5],
            gamma: [v[6], v[7], v[8]],
            potential,
            frame,
        };
        let iteration = r.u64()?;
        let time = r.f64()?;
        let nodes: usize = axes.iter().map(|a| a.samples()).product();
        let expected = nodes
            .checked_mul(32)
            .ok_or_else(|| CheckpointError::Corrupt("grid too large".into()))?;
        let rest = bytes.len() - r.pos;
        if rest < expected {
            return Err(CheckpointError::Truncated);
        }
        if rest > expected {
            return Err(CheckpointError::Trailing(rest - expected));
        }
        let mut field = || -> Result<Vec<Complex64>, CheckpointError> {
            (0..nodes)
                .map(|_| Ok(Complex64::new(r.f64()?, r.f64()?)))
                .collect()
        };
        let psi1 = field()?;
        let psi2 = field()?;
        Ok(Self {
            axes,
            params,
            iteration,
            time,
            state: Spinor { psi1, psi2 },
        })
    }

    /// Errors unless the checkpoint was written on exactly `grid`.
    pub fn check_grid(&self, grid: &Grid) -> Result<(), CheckpointError> {
        if self.axes != grid.axes() {
            return Err(CheckpointError::GridMismatch {
                expected: grid.axes().to_vec(),
                found: self.axes.clone(),
            });
        }
        Ok(())
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).ok_or(CheckpointError::Truncated)?;
        let s = self
            .bytes
            .get(self.pos..end)
            .ok_or(CheckpointError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], CheckpointError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        self.array().map(u32::from_le_bytes)
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        self.array().map(u64::from_le_bytes)
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        self.array().map(f64::from_le_bytes)
    }
}

pub fn save_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<(), CheckpointError> {
    std::fs::write(path, checkpoint.to_bytes())?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, CheckpointError> {
    Checkpoint::from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use socbec_core::make_grid;

    fn sample() -> Checkpoint {
        let g = make_grid(vec![
            Axis::fourier(-4.0, 4.0, 8).unwrap(),
            Axis::sine(0.0, 1.0, 5).unwrap(),
        ])
        .unwrap();
        let psi1 = (0..g.len())
            .map(|i| Complex64::new(i as f64 / 7.0, -1e-300 * i as f64))
            .collect();
        let psi2 = (0..g.len())
            .map(|i| Complex64::new(f64::MIN_POSITIVE, i as f64).exp())
            .collect();
        let p = Params {
            k0: 2.5,
            frame: Frame::Tilde,
            ..Params::default()
        };
        Checkpoint::new(&g, &p, 42, 0.125, &Spinor { psi1, psi2 })
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let c = sample();
        let back = Checkpoint::from_bytes(&c.to_bytes()).unwrap();
        assert_eq!(back.axes, c.axes);
        assert_eq!(back.params, c.params);
        assert_eq!((back.iteration, back.time), (42, 0.125));
        let bits = |s: &Spinor| -> Vec<u64> {
            s.psi1
                .iter()
                .chain(&s.psi2)
                .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
                .collect()
        };
        assert_eq!(bits(&back.state), bits(&c.state));
    }

    #[test]
    fn damaged_files_are_rejected() {
        let bytes = sample().to_bytes();
        for cut in [0, 3, 10, bytes.len() - 1] {
            assert!(
                Checkpoint::from_bytes(&bytes[..cut]).is_err(),
                "cut at {cut}"
            );
        }
        assert!(matches!(
            Checkpoint::from_bytes(&bytes[..bytes.len() - 8]),
            Err(CheckpointError::Truncated)
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            Checkpoint::from_bytes(&bad),
            Err(CheckpointError::BadMagic)
        ));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(
            Checkpoint::from_bytes(&bad),
            Err(CheckpointError::Version(9))
        ));
        let mut long = bytes;
        long.push(0);
        assert!(matches!(
            Checkpoint::from_bytes(&long),
            Err(CheckpointError::Trailing(1))
        ));
    }

    #[test]
    fn grid_mismatch_is_detected() {
        let c = sample();
        let other = make_grid(vec![
            Axis::sine(-4.0, 4.0, 8).unwrap(),
            Axis::sine(0.0, 1.0, 5).unwrap(),
        ])
        .unwrap();
        assert!(matches!(
            c.check_grid(&other),
            Err(CheckpointError::GridMismatch { .. })
        ));
        let same = make_grid(c.axes.clone()).unwrap();
        assert!(c.check_grid(&same).is_ok());
    }
}
