//! Executes an [`ExperimentConfig`] and writes its artifacts.
//!
//! Every run produces `manifest.txt`, `observables.csv` and `final.socb` in
//! the output directory. Mode-specific files:
//!
//! * limit_study: `summary.csv` (one row per sweep value), `fit.csv` for the
//!   rate and competition sweeps, `snapshots/sweep_NNN.socb`;
//! * com_compare: `closed_form.csv`, `lda_compare.csv`, `lda_series.csv`,
//!   `summary.csv`;
//! * dynamics and com_compare: `snapshots/step_NNNNNNNN.socb` when
//!   `snapshot_every > 0`.
//!
//! `observables.csv` columns are `t` (or `iter`), `N`, `N1`, `N2`,
//! `delta_N`, `E`, `mu`, `xc_<axis>` and `P_<axis>` per axis, then
//! `raman_overlap`. New columns are only ever appended.
//!
//! A solver failure leaves everything written so far plus a `FAILED` file
//! describing what went wrong.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use socbec_core::com_dynamics::{self, ComClosedFormInputs, LdaState};
use socbec_core::dynamics::{self, TrajectorySeries};
use socbec_core::ground_state::{self, GroundStateResult};
use socbec_core::model::{self, Observables};
use socbec_core::{Grid, Params, Spinor};
use thiserror::Error;

use crate::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointError};
use crate::config::{ExperimentConfig, InitialSpec, LdaMomentum, Mode, StartSpec};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("solver failure: {0}")]
    Solver(String),
}

impl RunError {
    /// 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Input(_) | RunError::Checkpoint(_) => 1,
            RunError::Io { .. } | RunError::Solver(_) => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    /// Files written, relative to `out_dir`, in write order.
    pub artifacts: Vec<PathBuf>,
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn create(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|source| RunError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let _ = fs::remove_file(dir.join("FAILED"));
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn path(&self, name: &str) -> Result<PathBuf, RunError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| RunError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        Ok(path)
    }

    fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), RunError> {
        let path = self.path(name)?;
        fs::write(&path, contents).map_err(|source| RunError::Io { path, source })?;
        self.written.push(name.into());
        Ok(())
    }

    fn checkpoint(&mut self, name: &str, c: &Checkpoint) -> Result<(), RunError> {
        let path = self.path(name)?;
        save_checkpoint(&path, c).map_err(|e| match e {
            CheckpointError::Io(source) => RunError::Io { path, source },
            other => RunError::Checkpoint(other),
        })?;
        self.written.push(name.into());
        Ok(())
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

const AXES: [&str; 3] = ["x", "y", "z"];

fn observables_header(first: &str, dim: usize) -> String {
    let mut h = format!("{first},N,N1,N2,delta_N,E,mu");
    for a in &AXES[..dim] {
        let _ = write!(h, ",xc_{a}");
    }
    for a in &AXES[..dim] {
        let _ = write!(h, ",P_{a}");
    }
    h.push_str(",raman_overlap\n");
    h
}

fn observables_row(out: &mut String, first: &str, o: &Observables) {
    out.push_str(first);
    for v in [o.mass, o.mass1, o.mass2, o.delta_n, o.energy, o.chem_mu] {
        out.push(',');
        out.push_str(&num(v));
    }
    for v in o.xc.iter().chain(&o.momentum) {
        out.push(',');
        out.push_str(&num(*v));
    }
    out.push(',');
    out.push_str(&num(o.raman_overlap));
    out.push('\n');
}

fn time_csv(dim: usize, series: &TrajectorySeries) -> String {
    let mut s = observables_header("t", dim);
    for (t, o) in series.times.iter().zip(&series.observables) {
        observables_row(&mut s, &num(*t), o);
    }
    s
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn solver(e: impl std::fmt::Display) -> RunError {
    RunError::Solver(e.to_string())
}

/// Runs `config`. `source` is the original config text, hashed into the
/// manifest; `out` overrides the configured output directory.
pub fn run(
    config: &ExperimentConfig,
    source: &str,
    out: Option<&Path>,
) -> Result<RunSummary, RunError> {
    let mut config = config.clone();
    if let Some(dir) = out {
        config.output.dir = dir.to_path_buf();
    }
    let grid = config
        .grid
        .build()
        .map_err(|e| RunError::Input(format!("invalid grid: {e}")))?;
    let mut art = Artifacts::create(&config.output.dir)?;
    let manifest = format!(
        "socbec {}\nconfig_sha256 = {}\nthreads = {}\n\n# resolved configuration\n{}",
        env!("CARGO_PKG_VERSION"),
        sha256_hex(source),
        rayon::current_num_threads(),
        config.to_text()
    );
    art.write("manifest.txt", manifest)?;
    let result = match config.mode {
        Mode::GroundState => run_ground_state(&config, &grid, &mut art),
        Mode::Dynamics | Mode::ComCompare => run_dynamics(&config, &grid, &mut art),
        Mode::LimitStudy => run_limit_study(&config, &grid, &mut art),
    };
    if let Err(RunError::Solver(diagnostics)) = &result {
        art.write("FAILED", format!("{diagnostics}\n"))?;
    }
    result.map(|()| RunSummary {
        out_dir: art.dir.clone(),
        artifacts: art.written,
    })
}

fn solve_ground_state(
    config: &ExperimentConfig,
    grid: &Grid,
) -> Result<GroundStateResult, RunError> {
    let starts = match &config.starts {
        StartSpec::Auto => ground_state::default_starts(&config.params),
        StartSpec::Fixed(g) => vec![g.clone()],
    };
    ground_state::multi_start(&config.params, grid, &config.ground_state, &starts).map_err(solver)
}

fn not_converged(r: &GroundStateResult, tol: f64) -> String {
    format!(
        "ground state not converged after {} iterations (residual {:.3e}, tol {tol:.3e})",
        r.iterations, r.residual
    )
}

fn run_ground_state(
    config: &ExperimentConfig,
    grid: &Grid,
    art: &mut Artifacts,
) -> Result<(), RunError> {
    let gs = solve_ground_state(config, grid)?;
    let obs = model::observables(grid, &gs.phi, &config.params).map_err(solver)?;
    let mut csv = observables_header("iter", grid.dim());
    observables_row(&mut csv, &gs.iterations.to_string(), &obs);
    art.write("observables.csv", csv)?;
    let c = Checkpoint::new(grid, &config.params, gs.iterations as u64, 0.0, &gs.phi);
    if config.output.snapshots {
        art.checkpoint("snapshots/ground_state.socb", &c)?;
    }
    art.checkpoint("final.socb", &c)?;
    if !gs.converged {
        return Err(RunError::Solver(not_converged(
            &gs,
            config.ground_state.tol,
        )));
    }
    Ok(())
}

fn initial_state(
    config: &ExperimentConfig,
    grid: &Grid,
    art: &mut Artifacts,
) -> Result<Spinor, RunError> {
    let params = &config.params;
    match config
        .initial
        .as_ref()
        .expect("time-dependent modes have initial data")
    {
        InitialSpec::Gaussian { center, component } => {
            let mut s = ground_state::shifted_gaussian(grid, params, center);
            if *component == 2 {
                std::mem::swap(&mut s.psi1, &mut s.psi2);
            }
            Ok(s)
        }
        InitialSpec::GroundState { offset } => {
            let gs = solve_ground_state(config, grid)?;
            if config.output.snapshots {
                let c = Checkpoint::new(grid, params, gs.iterations as u64, 0.0, &gs.phi);
                art.checkpoint("snapshots/ground_state.socb", &c)?;
            }
            if !gs.converged {
                return Err(RunError::Solver(not_converged(
                    &gs,
                    config.ground_state.tol,
                )));
            }
            com_dynamics::shift_state(grid, &gs.phi, offset).map_err(solver)
        }
        InitialSpec::Checkpoint { path } => {
            let c = load_checkpoint(path)?;
            c.check_grid(grid)?;
            if c.params.frame != params.frame {
                return Err(RunError::Input(format!(
                    "checkpoint `{}` is in the {:?} frame but the run uses {:?}",
                    path.display(),
                    c.params.frame,
                    params.frame
                )));
            }
            Ok(c.state)
        }
    }
}

fn run_dynamics(
    config: &ExperimentConfig,
    grid: &Grid,
    art: &mut Artifacts,
) -> Result<(), RunError> {
    let params = &config.params;
    let psi0 = initial_state(config, grid, art)?;
    let mut options = config.dynamics;
    if !config.output.snapshots {
        options.snapshot_every = 0;
    }
    let (series, last, failure) =
        match dynamics::evolve(grid, &psi0, params, &options, |_, _, _| {}) {
            Ok((series, last)) => (series, last, None),
            Err(f) => (f.partial, f.last_good, Some(f.error)),
        };
    art.write("observables.csv", time_csv(grid.dim(), &series))?;
    for (t, s) in &series.snapshots {
        let step = (t / options.tau).round() as u64;
        let c = Checkpoint::new(grid, params, step, *t, s);
        art.checkpoint(&format!("snapshots/step_{step:08}.socb"), &c)?;
    }
    let last_step = series.steps.last().copied().unwrap_or(0);
    let c = Checkpoint::new(
        grid,
        params,
        last_step as u64,
        last_step as f64 * options.tau,
        &last,
    );
    art.checkpoint("final.socb", &c)?;
    if let Some(e) = failure {
        return Err(RunError::Solver(format!(
            "time stepping stopped: {e}; last good state at t = {}",
            last_step as f64 * options.tau
        )));
    }
    if config.mode == Mode::ComCompare {
        com_compare(config, grid, &psi0, &series, art)?;
    }
    Ok(())
}

/// Linear interpolation of `(t, y)` at `at`, `None` outside the samples.
fn sample_at(t: &[f64], y: &[f64], at: f64) -> Option<f64> {
    let eps = 1e-9 * t.last().copied().unwrap_or(1.0).abs().max(1.0);
    if t.is_empty() || at < t[0] - eps || at > t[t.len() - 1] + eps {
        return None;
    }
    let i = t.partition_point(|v| *v < at).min(t.len() - 1);
    if i == 0 || t[i] == at {
        return Some(y[i]);
    }
    let w = (at - t[i - 1]) / (t[i] - t[i - 1]);
    Some(y[i - 1] + w * (y[i] - y[i - 1]))
}

fn com_compare(
    config: &ExperimentConfig,
    grid: &Grid,
    psi0: &Spinor,
    series: &TrajectorySeries,
    art: &mut Artifacts,
) -> Result<(), RunError> {
    let params = &config.params;
    let com = &config.com;
    let times = &series.times;
    let xc = series.xc(0);
    let window = com
        .window
        .unwrap_or((0.0, times.last().copied().unwrap_or(0.0)));
    let mut summary = String::from("quantity,value\n");
    if com.closed_form {
        let inp = ComClosedFormInputs::from_spinor(grid, psi0, params).map_err(solver)?;
        let cf: Vec<f64> = times
            .iter()
            .map(|t| com_dynamics::xc_closed_form(&inp, *t))
            .collect();
        let mut csv = String::from("t,xc,xc_closed_form\n");
        for ((t, a), b) in times.iter().zip(&xc).zip(&cf) {
            let _ = writeln!(csv, "{},{},{}", num(*t), num(*a), num(*b));
        }
        art.write("closed_form.csv", csv)?;
        let e = com_dynamics::compare_series((times, &xc), (times, &cf), window).map_err(solver)?;
        let _ = writeln!(
            summary,
            "closed_form_max,{}\nclosed_form_rms,{}",
            num(e.max),
            num(e.l2)
        );
    }
    if com.lda {
        let obs0 = &series.observables[0];
        let lda0 = match com.lda_momentum {
            LdaMomentum::Imbalance => LdaState::from_moments(obs0.xc[0], obs0.delta_n, params.k0),
            LdaMomentum::Measured => LdaState {
                xc: obs0.xc[0],
                px: obs0.momentum[0],
            },
        };
        let t_end = com.lda_t_end.unwrap_or(config.dynamics.t_end);
        let lda = com_dynamics::lda_ode_solve(lda0, params, com.lda_tau, t_end).map_err(solver)?;
        let lda_xc = lda.xc();
        let mut full = String::from("t,xc,P,invariant\n");
        for ((t, s), inv) in lda.times.iter().zip(&lda.states).zip(&lda.invariant) {
            let _ = writeln!(
                full,
                "{},{},{},{}",
                num(*t),
                num(s.xc),
                num(s.px),
                num(*inv)
            );
        }
        art.write("lda_series.csv", full)?;
        let mut csv = String::from("t,xc,xc_lda\n");
        for (t, a) in times.iter().zip(&xc) {
            let b = sample_at(&lda.times, &lda_xc, *t)
                .map(num)
                .unwrap_or_default();
            let _ = writeln!(csv, "{},{},{}", num(*t), num(*a), b);
        }
        art.write("lda_compare.csv", csv)?;
        let e = com_dynamics::compare_series((times, &xc), (&lda.times, &lda_xc), window)
            .map_err(solver)?;
        let _ = writeln!(
            summary,
            "lda_max,{}\nlda_rms,{}\nlda_invariant_drift,{}",
            num(e.max),
            num(e.l2),
            num(lda.invariant_drift())
        );
        // Generous horizon for the first return; no row if none is found.
        let horizon = 4.0 * t_end.max(1.0);
        if let Some(r) =
            com_dynamics::lda_orbit_return(lda0, params, com.lda_tau, horizon).map_err(solver)?
        {
            let _ = writeln!(
                summary,
                "lda_period,{}\nlda_return_distance,{}",
                num(r.period),
                num(r.distance)
            );
        }
    }
    art.write("summary.csv", summary)
}

fn run_limit_study(
    config: &ExperimentConfig,
    grid: &Grid,
    art: &mut Artifacts,
) -> Result<(), RunError> {
    let sweep = config.sweep.as_ref().expect("limit studies have a sweep");
    let report = ground_state::limit_study(
        sweep.kind,
        &config.params,
        grid,
        &config.ground_state,
        &sweep.values,
    )
    .map_err(solver)?;
    let mut obs_csv = observables_header("iter", grid.dim());
    let mut summary = String::from(
        "value,E,mu,diagnostic,secondary,raman_term,raman_overlap,iterations,residual,converged\n",
    );
    let mut failed = Vec::new();
    for (i, row) in report.rows.iter().enumerate() {
        let p: Params = sweep.kind.apply(&config.params, row.value);
        let st = &row.state;
        let obs = model::observables(grid, &st.phi, &p).map_err(solver)?;
        observables_row(&mut obs_csv, &st.iterations.to_string(), &obs);
        let _ = writeln!(
            summary,
            "{},{},{},{},{},{},{},{},{},{}",
            num(row.value),
            num(st.energy),
            num(st.mu),
            num(row.diagnostic),
            row.secondary.map(num).unwrap_or_default(),
            num(row.raman_term),
            num(obs.raman_overlap),
            st.iterations,
            num(st.residual),
            st.converged
        );
        if config.output.snapshots {
            let c = Checkpoint::new(grid, &p, st.iterations as u64, 0.0, &st.phi);
            art.checkpoint(&format!("snapshots/sweep_{i:03}.socb"), &c)?;
        }
        if !st.converged {
            failed.push(format!(
                "value {}: {}",
                row.value,
                not_converged(st, config.ground_state.tol)
            ));
        }
    }
    art.write("observables.csv", obs_csv)?;
    art.write("summary.csv", summary)?;
    if report.slope.is_some() || report.c0.is_some() {
        let mut fit = String::from("quantity,value\n");
        if let Some(s) = report.slope {
            let _ = writeln!(fit, "slope,{}", num(s));
        }
        if let Some(c) = report.c0 {
            let _ = writeln!(fit, "c0,{}", num(c));
        }
        art.write("fit.csv", fit)?;
    }
    if let Some(r) = &report.reference {
        if config.output.snapshots {
            let c = Checkpoint::new(grid, &config.params, r.iterations as u64, 0.0, &r.phi);
            art.checkpoint("snapshots/reference.socb", &c)?;
        }
    }
    if let Some(last) = report.rows.last() {
        let p = sweep.kind.apply(&config.params, last.value);
        let st = &last.state;
        art.checkpoint(
            "final.socb",
            &Checkpoint::new(grid, &p, st.iterations as u64, 0.0, &st.phi),
        )?;
    }
    if !failed.is_empty() {
        return Err(RunError::Solver(failed.join("\n")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_significant_digits() {
        let v = 0.1 + 0.2;
        let s = num(v);
        assert_eq!(s, "3.0000000000000004e-1");
        assert_eq!(s.parse::<f64>().unwrap(), v);
    }

    #[test]
    fn header_lists_axes_in_order() {
        assert_eq!(
            observables_header("t", 2),
            "t,N,N1,N2,delta_N,E,mu,xc_x,xc_y,P_x,P_y,raman_overlap\n"
        );
    }

    #[test]
    fn sampling_interpolates_inside_and_refuses_outside() {
        let t = [0.0, 1.0, 2.0];
        let y = [0.0, 10.0, 30.0];
        assert_eq!(sample_at(&t, &y, 1.5), Some(20.0));
        assert_eq!(sample_at(&t, &y, 0.0), Some(0.0));
        assert_eq!(sample_at(&t, &y, 2.0), Some(30.0));
        assert_eq!(sample_at(&t, &y, 2.5), None);
    }

    #[test]
    fn digest_is_lowercase_hex() {
        assert_eq!(
            sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
