//! Experiment descriptions.
//!
//! The format is line oriented: `[section]` headers followed by
//! `key = value` lines. `#` starts a comment. Lists are comma separated.
//!
//! ```text
//! [run]
//! mode = ground_state        # ground_state | dynamics | limit_study | com_compare
//!
//! [grid]
//! basis = fourier            # fourier | sine
//! x = -16, 16, 128           # lo, hi, points; add y and z for 2D and 3D
//!
//! [params]
//! k0 = 1
//! omega = 20
//! beta11 = 10
//! ```
//!
//! Every key except `[run] mode` and `[grid] x` has a default; see
//! [`ExperimentConfig::to_text`] for the fully resolved form, which parses
//! back to the same configuration.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use socbec_core::dynamics::EvolveOptions;
use socbec_core::ground_state::{GfdnOptions, InitialGuess, LimitKind};
use socbec_core::{make_grid, Axis, Basis, Frame, Grid, Params, Potential};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line the problem was found on.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    GroundState,
    Dynamics,
    LimitStudy,
    ComCompare,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::GroundState => "ground_state",
            Mode::Dynamics => "dynamics",
            Mode::LimitStudy => "limit_study",
            Mode::ComCompare => "com_compare",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub basis: Basis,
    /// `(lo, hi, n)` per axis.
    pub axes: Vec<(f64, f64, usize)>,
}

impl GridSpec {
    pub fn build(&self) -> socbec_core::Result<Grid> {
        let axes = self
            .axes
            .iter()
            .map(|&(lo, hi, n)| Axis::new(lo, hi, n, self.basis))
            .collect::<socbec_core::Result<Vec<_>>>()?;
        make_grid(axes)
    }
}

/// Which starts the ground-state solver tries.
#[derive(Debug, Clone, PartialEq)]
pub enum StartSpec {
    /// Both sign structures, lowest energy wins.
    Auto,
    Fixed(InitialGuess),
}

/// Initial data for the time-dependent modes.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    /// Trap-adapted Gaussian centred at `center`, all mass in `component`.
    Gaussian {
        center: Vec<f64>,
        component: usize,
    },
    /// Ground state of the run's parameters translated by `offset`.
    GroundState {
        offset: Vec<f64>,
    },
    Checkpoint {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: LimitKind,
    pub values: Vec<f64>,
}

/// How the LDA initial momentum is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdaMomentum {
    /// `P(0) = k0 dN(0)`.
    Imbalance,
    /// The momentum observable of the initial state.
    Measured,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComSpec {
    pub closed_form: bool,
    pub lda: bool,
    pub lda_tau: f64,
    /// LDA integration length; `None` follows the dynamics.
    pub lda_t_end: Option<f64>,
    pub lda_momentum: LdaMomentum,
    /// Comparison window; `None` is the whole run.
    pub window: Option<(f64, f64)>,
}

impl Default for ComSpec {
    fn default() -> Self {
        Self {
            closed_form: true,
            lda: true,
            lda_tau: 1e-3,
            lda_t_end: None,
            lda_momentum: LdaMomentum::Imbalance,
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Write field snapshots (ground states and `snapshot_every` frames).
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub grid: GridSpec,
    pub params: Params,
    pub ground_state: GfdnOptions,
    pub starts: StartSpec,
    pub dynamics: EvolveOptions,
    pub initial: Option<InitialSpec>,
    pub sweep: Option<SweepSpec>,
    pub com: ComSpec,
    pub output: OutputSpec,
}

struct Entry {
    value: String,
    line: usize,
}

struct Section {
    name: String,
    line: usize,
    entries: HashMap<String, Entry>,
    used: Vec<&'static str>,
}

impl Section {
    fn take(&mut self, key: &'static str) -> Option<&Entry> {
        self.used.push(key);
        self.entries.get(key)
    }

    /// Rejects keys that no getter asked for.
    fn finish(&self) -> Result<(), ConfigError> {
        let mut unknown: Vec<(&String, &Entry)> = self
            .entries
            .iter()
            .filter(|(k, _)| !self.used.contains(&k.as_str()))
            .collect();
        unknown.sort_by_key(|(_, e)| e.line);
        match unknown.first() {
            Some((k, e)) => err(e.line, format!("unknown key `{k}` in [{}]", self.name)),
            None => Ok(()),
        }
    }

    fn f64(&mut self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => parse_f64(&e.value, e.line, key).map(Some),
        }
    }

    fn f64_or(&mut self, key: &'static str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn usize_or(&mut self, key: &'static str, default: usize) -> Result<usize, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(e) => e
                .value
                .parse()
                .or_else(|_| err(e.line, format!("`{key}` must be a nonnegative integer"))),
        }
    }

    fn bool_or(&mut self, key: &'static str, default: bool) -> Result<bool, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(e) => match e.value.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => err(e.line, format!("`{key}` must be true or false")),
            },
        }
    }

    fn list(&mut self, key: &'static str) -> Result<Option<(Vec<f64>, usize)>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => {
                let line = e.line;
                let v = e
                    .value
                    .split(',')
                    .map(|s| parse_f64(s.trim(), line, key))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Some((v, line)))
            }
        }
    }

    fn word(&mut self, key: &'static str) -> Option<(String, usize)> {
        self.take(key).map(|e| (e.value.clone(), e.line))
    }
}

fn parse_f64(s: &str, line: usize, key: &str) -> Result<f64, ConfigError> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => err(line, format!("`{key}` must be finite")),
        Err(_) => err(line, format!("`{key}`: cannot parse `{s}` as a number")),
    }
}

const SECTIONS: [&str; 9] = [
    "run",
    "grid",
    "params",
    "ground_state",
    "dynamics",
    "initial",
    "sweep",
    "com",
    "output",
];

fn split_sections(text: &str) -> Result<(HashMap<String, Section>, usize), ConfigError> {
    let mut sections: HashMap<String, Section> = HashMap::new();
    let mut current: Option<String> = None;
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return err(line, "malformed section header");
            };
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return err(line, format!("unknown section [{name}]"));
            }
            if sections.contains_key(name) {
                return err(line, format!("duplicate section [{name}]"));
            }
            sections.insert(
                name.to_string(),
                Section {
                    name: name.to_string(),
                    line,
                    entries: HashMap::new(),
                    used: Vec::new(),
                },
            );
            current = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return err(line, "expected `key = value`");
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return err(line, "empty key");
        }
        let Some(section) = current.as_ref().and_then(|c| sections.get_mut(c)) else {
            return err(line, format!("key `{key}` outside any section"));
        };
        if section.entries.contains_key(key) {
            return err(line, format!("duplicate key `{key}`"));
        }
        section.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
    }
    Ok((sections, last.max(1)))
}

/// Parses `text`, resolving relative checkpoint paths against the working
/// directory.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_in(text, Path::new("."))
}

/// Parses `text`, resolving relative checkpoint paths against `base`
/// (normally the directory holding the config file).
pub fn parse_config_in(text: &str, base: &Path) -> Result<ExperimentConfig, ConfigError> {
    let (mut sections, last_line) = split_sections(text)?;
    let empty = |name: &str| Section {
        name: name.to_string(),
        line: last_line,
        entries: HashMap::new(),
        used: Vec::new(),
    };
    let mut get = |name: &str| sections.remove(name).unwrap_or_else(|| empty(name));

    let mut run = get("run");
    let mode = match run.word("mode") {
        None => return err(run.line, "missing required key `mode` in [run]"),
        Some((w, line)) => match w.as_str() {
            "ground_state" => Mode::GroundState,
            "dynamics" => Mode::Dynamics,
            "limit_study" => Mode::LimitStudy,
            "com_compare" => Mode::ComCompare,
            _ => return err(line, format!("unknown mode `{w}`")),
        },
    };
    run.finish()?;

    let mut gs = get("grid");
    let grid = parse_grid(&mut gs)?;
    gs.finish()?;
    let built = grid
        .build()
        .or_else(|e| err(gs.line, format!("invalid grid: {e}")))?;

    let mut ps = get("params");
    let params = parse_params(&mut ps, &grid)?;
    ps.finish()?;
    if let Err(e) = params.validate(&built) {
        return err(ps.line, format!("invalid parameters: {e}"));
    }

    let mut gss = get("ground_state");
    let (ground_state, starts) = parse_ground_state(&mut gss, &params)?;
    gss.finish()?;

    let time_dependent = matches!(mode, Mode::Dynamics | Mode::ComCompare);
    let mut ds = get("dynamics");
    let dynamics = parse_dynamics(&mut ds, time_dependent)?;
    ds.finish()?;

    let mut is = get("initial");
    let initial = parse_initial(&mut is, time_dependent, grid.axes.len(), base)?;
    is.finish()?;
    if let Some(InitialSpec::GroundState { offset }) = &initial {
        if offset.iter().any(|&d| d != 0.0) && grid.basis != Basis::Fourier {
            return err(is.line, "a ground-state offset needs a Fourier grid");
        }
    }

    let mut ss = get("sweep");
    let sweep = parse_sweep(&mut ss, mode == Mode::LimitStudy)?;
    ss.finish()?;

    let mut cs = get("com");
    let com = parse_com(&mut cs)?;
    cs.finish()?;

    let mut os = get("output");
    let output = OutputSpec {
        dir: PathBuf::from(os.word("dir").map(|w| w.0).unwrap_or_else(|| "out".into())),
        snapshots: os.bool_or("snapshots", true)?,
    };
    os.finish()?;

    if params.frame == Frame::Lab && params.k0 != 0.0 && grid.basis == Basis::Sine {
        return err(ps.line, "a sine grid with k0 != 0 needs frame = tilde");
    }

    Ok(ExperimentConfig {
        mode,
        grid,
        params,
        ground_state,
        starts,
        dynamics,
        initial,
        sweep,
        com,
        output,
    })
}

fn parse_grid(s: &mut Section) -> Result<GridSpec, ConfigError> {
    let basis = match s.word("basis") {
        None => Basis::Fourier,
        Some((w, line)) => match w.as_str() {
            "fourier" => Basis::Fourier,
            "sine" => Basis::Sine,
            _ => return err(line, format!("unknown basis `{w}`")),
        },
    };
    let mut axes = Vec::new();
    let mut gap = false;
    for key in ["x", "y", "z"] {
        match s.list(key)? {
            None if key == "x" => return err(s.line, "missing required key `x` in [grid]"),
            None => gap = true,
            Some((_, line)) if gap => {
                return err(line, format!("`{key}` given without the preceding axes"))
            }
            Some((v, line)) => {
                if v.len() != 3 || v[2] < 1.0 || v[2].fract() != 0.0 {
                    return err(
                        line,
                        format!("`{key}` must be `lo, hi, n` with integer n >= 1"),
                    );
                }
                if !(v[1] > v[0]) {
                    return err(line, format!("`{key}`: hi must exceed lo"));
                }
                axes.push((v[0], v[1], v[2] as usize));
            }
        }
    }
    Ok(GridSpec { basis, axes })
}

fn parse_params(s: &mut Section, grid: &GridSpec) -> Result<Params, ConfigError> {
    let d = Params::default();
    let potential = match s.word("potential") {
        None if grid.basis == Basis::Sine => Potential::Box,
        None => Potential::Harmonic,
        Some((w, line)) => match w.as_str() {
            "harmonic" => Potential::Harmonic,
            "box" => Potential::Box,
            _ => return err(line, format!("unknown potential `{w}`")),
        },
    };
    let frame = match s.word("frame") {
        None if potential == Potential::Box => Frame::Tilde,
        None => Frame::Lab,
        Some((w, line)) => match w.as_str() {
            "lab" => Frame::Lab,
            "tilde" => Frame::Tilde,
            _ => return err(line, format!("unknown frame `{w}`")),
        },
    };
    Ok(Params {
        k0: s.f64_or("k0", d.k0)?,
        omega: s.f64_or("omega", d.omega)?,
        delta: s.f64_or("delta", d.delta)?,
        beta11: s.f64_or("beta11", d.beta11)?,
        beta12: s.f64_or("beta12", d.beta12)?,
        beta22: s.f64_or("beta22", d.beta22)?,
        gamma: [
            s.f64_or("gamma_x", d.gamma[0])?,
            s.f64_or("gamma_y", d.gamma[1])?,
            s.f64_or("gamma_z", d.gamma[2])?,
        ],
        potential,
        frame,
    })
}

fn parse_ground_state(
    s: &mut Section,
    params: &Params,
) -> Result<(GfdnOptions, StartSpec), ConfigError> {
    let d = GfdnOptions::for_params(params);
    let tau = s.f64_or("tau", d.tau)?;
    if tau <= 0.0 {
        return err(s.entries["tau"].line, "`tau` must be positive");
    }
    let tol = s.f64_or("tol", d.tol)?;
    if tol <= 0.0 {
        return err(s.entries["tol"].line, "`tol` must be positive");
    }
    let max_iters = s.usize_or("max_iters", d.max_iters)?;
    let shift = s.f64("shift")?;
    if let Some(a) = shift {
        if a < 0.0 {
            return err(s.entries["shift"].line, "`shift` must be nonnegative");
        }
    }
    let extrapolate = s.bool_or("extrapolate", d.extrapolate)?;
    let k = s.f64("plane_wave_k")?;
    let starts = match s.word("init") {
        None => StartSpec::Auto,
        Some((w, line)) => match w.as_str() {
            "auto" => StartSpec::Auto,
            "gaussian_pair" => StartSpec::Fixed(InitialGuess::GaussianPair),
            "gaussian_opposite" => StartSpec::Fixed(InitialGuess::GaussianOpposite),
            "sine_pair" => StartSpec::Fixed(InitialGuess::SinePair),
            "plane_wave" => {
                StartSpec::Fixed(InitialGuess::PlaneWaveModulated(k.unwrap_or(params.k0)))
            }
            "single_1" => StartSpec::Fixed(InitialGuess::SingleComponent(1)),
            "single_2" => StartSpec::Fixed(InitialGuess::SingleComponent(2)),
            _ => return err(line, format!("unknown init `{w}`")),
        },
    };
    let init = match &starts {
        StartSpec::Fixed(g) => g.clone(),
        StartSpec::Auto => d.init.clone(),
    };
    Ok((
        GfdnOptions {
            tau,
            tol,
            max_iters,
            init,
            shift,
            extrapolate,
        },
        starts,
    ))
}

fn parse_dynamics(s: &mut Section, required: bool) -> Result<EvolveOptions, ConfigError> {
    let d = EvolveOptions::default();
    let tau = s.f64_or("tau", d.tau)?;
    if tau <= 0.0 {
        return err(s.entries["tau"].line, "`tau` must be positive");
    }
    let t_end = match s.f64("t_end")? {
        Some(t) if t < 0.0 => return err(s.entries["t_end"].line, "`t_end` must be nonnegative"),
        Some(t) => t,
        None if required => return err(s.line, "missing required key `t_end` in [dynamics]"),
        None => d.t_end,
    };
    Ok(EvolveOptions {
        tau,
        t_end,
        record_every: s.usize_or("record_every", d.record_every)?.max(1),
        snapshot_every: s.usize_or("snapshot_every", d.snapshot_every)?,
    })
}

fn vector(s: &mut Section, key: &'static str, dim: usize) -> Result<Vec<f64>, ConfigError> {
    match s.list(key)? {
        None => Ok(vec![0.0; dim]),
        Some((v, line)) if v.len() != dim => err(line, format!("`{key}` needs {dim} components")),
        Some((v, _)) => Ok(v),
    }
}

fn parse_initial(
    s: &mut Section,
    required: bool,
    dim: usize,
    base: &Path,
) -> Result<Option<InitialSpec>, ConfigError> {
    let Some((kind, line)) = s.word("kind") else {
        if required {
            return err(s.line, "missing required key `kind` in [initial]");
        }
        return Ok(None);
    };
    let spec = match kind.as_str() {
        "gaussian" => {
            let component = s.usize_or("component", 1)?;
            if !(1..=2).contains(&component) {
                return err(s.entries["component"].line, "`component` must be 1 or 2");
            }
            InitialSpec::Gaussian {
                center: vector(s, "center", dim)?,
                component,
            }
        }
        "ground_state" => InitialSpec::GroundState {
            offset: vector(s, "offset", dim)?,
        },
        "checkpoint" => {
            let Some((p, pline)) = s.word("path") else {
                return err(line, "checkpoint initial data needs `path`");
            };
            let path = base.join(p);
            if !path.is_file() {
                return err(
                    pline,
                    format!("checkpoint `{}` does not exist", path.display()),
                );
            }
            InitialSpec::Checkpoint { path }
        }
        _ => return err(line, format!("unknown initial kind `{kind}`")),
    };
    Ok(Some(spec))
}

fn limit_kind_name(k: LimitKind) -> &'static str {
    match k {
        LimitKind::LargeK0 => "large_k0",
        LimitKind::LargeOmega => "large_omega",
        LimitKind::LargeDelta => "large_delta",
        LimitKind::RateSmallK0 => "rate_small_k0",
        LimitKind::RateLargeK0 => "rate_large_k0",
        LimitKind::EnergyCompetition => "energy_competition",
    }
}

fn parse_sweep(s: &mut Section, required: bool) -> Result<Option<SweepSpec>, ConfigError> {
    let kind = s.word("kind");
    let values = s.list("values")?;
    let (kind, line) = match kind {
        None if required => return err(s.line, "missing required key `kind` in [sweep]"),
        None => return Ok(None),
        Some(k) => k,
    };
    let kind = [
        LimitKind::LargeK0,
        LimitKind::LargeOmega,
        LimitKind::LargeDelta,
        LimitKind::RateSmallK0,
        LimitKind::RateLargeK0,
        LimitKind::EnergyCompetition,
    ]
    .into_iter()
    .find(|k| limit_kind_name(*k) == kind)
    .map_or_else(|| err(line, format!("unknown sweep kind `{kind}`")), Ok)?;
    let Some((values, _)) = values else {
        return err(s.line, "missing required key `values` in [sweep]");
    };
    Ok(Some(SweepSpec { kind, values }))
}

fn parse_com(s: &mut Section) -> Result<ComSpec, ConfigError> {
    let d = ComSpec::default();
    let lda_tau = s.f64_or("lda_tau", d.lda_tau)?;
    if lda_tau <= 0.0 {
        return err(s.entries["lda_tau"].line, "`lda_tau` must be positive");
    }
    let lda_momentum = match s.word("lda_momentum") {
        None => d.lda_momentum,
        Some((w, line)) => match w.as_str() {
            "imbalance" => LdaMomentum::Imbalance,
            "measured" => LdaMomentum::Measured,
            _ => return err(line, format!("unknown lda_momentum `{w}`")),
        },
    };
    let window = match s.list("window")? {
        None => None,
        Some((v, line)) if v.len() != 2 || v[1] < v[0] => {
            return err(line, "`window` must be `start, end` with start <= end")
        }
        Some((v, _)) => Some((v[0], v[1])),
    };
    Ok(ComSpec {
        closed_form: s.bool_or("closed_form", d.closed_form)?,
        lda: s.bool_or("lda", d.lda)?,
        lda_tau,
        lda_t_end: s.f64("lda_t_end")?,
        lda_momentum,
        window,
    })
}

fn list_text(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl ExperimentConfig {
    /// Canonical text with every default spelled out. Floats use the
    /// shortest round-trip representation.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "[run]\nmode = {}\n", self.mode.name());
        let basis = match self.grid.basis {
            Basis::Fourier => "fourier",
            Basis::Sine => "sine",
        };
        let _ = writeln!(s, "[grid]\nbasis = {basis}");
        for (name, (lo, hi, n)) in ["x", "y", "z"].iter().zip(&self.grid.axes) {
            let _ = writeln!(s, "{name} = {lo:?}, {hi:?}, {n}");
        }
        let _ = writeln!(s, "\n[params]");
        for (k, v) in [
            ("k0", p.k0),
            ("omega", p.omega),
            ("delta", p.delta),
            ("beta11", p.beta11),
            ("beta12", p.beta12),
            ("beta22", p.beta22),
            ("gamma_x", p.gamma[0]),
            ("gamma_y", p.gamma[1]),
            ("gamma_z", p.gamma[2]),
        ] {
            let _ = writeln!(s, "{k} = {v:?}");
        }
        let potential = match p.potential {
            Potential::Harmonic => "harmonic",
            Potential::Box => "box",
        };
        let frame = match p.frame {
            Frame::Lab => "lab",
            Frame::Tilde => "tilde",
        };
        let _ = writeln!(s, "potential = {potential}\nframe = {frame}\n");

        let g = &self.ground_state;
        let _ = writeln!(
            s,
            "[ground_state]\ntau = {:?}\ntol = {:?}\nmax_iters = {}\nextrapolate = {}",
            g.tau, g.tol, g.max_iters, g.extrapolate
        );
        if let Some(a) = g.shift {
            let _ = writeln!(s, "shift = {a:?}");
        }
        let init = match &self.starts {
            StartSpec::Auto => "auto".to_string(),
            StartSpec::Fixed(InitialGuess::GaussianPair) => "gaussian_pair".into(),
            StartSpec::Fixed(InitialGuess::GaussianOpposite) => "gaussian_opposite".into(),
            StartSpec::Fixed(InitialGuess::SinePair) => "sine_pair".into(),
            StartSpec::Fixed(InitialGuess::PlaneWaveModulated(k)) => {
                format!("plane_wave\nplane_wave_k = {k:?}")
            }
            StartSpec::Fixed(InitialGuess::SingleComponent(j)) => format!("single_{j}"),
            StartSpec::Fixed(InitialGuess::UserSupplied(_)) => "auto".into(),
        };
        let _ = writeln!(s, "init = {init}\n");

        let d = &self.dynamics;
        let _ = writeln!(
            s,
            "[dynamics]\ntau = {:?}\nt_end = {:?}\nrecord_every = {}\nsnapshot_every = {}\n",
            d.tau, d.t_end, d.record_every, d.snapshot_every
        );

        if let Some(init) = &self.initial {
            let _ = writeln!(s, "[initial]");
            let _ = match init {
                InitialSpec::Gaussian { center, component } => writeln!(
                    s,
                    "kind = gaussian\ncenter = {}\ncomponent = {component}",
                    list_text(center)
                ),
                InitialSpec::GroundState { offset } => {
                    writeln!(s, "kind = ground_state\noffset = {}", list_text(offset))
                }
                InitialSpec::Checkpoint { path } => {
                    writeln!(s, "kind = checkpoint\npath = {}", path.display())
                }
            };
            s.push('\n');
        }
        if let Some(sw) = &self.sweep {
            let _ = writeln!(
                s,
                "[sweep]\nkind = {}\nvalues = {}\n",
                limit_kind_name(sw.kind),
                list_text(&sw.values)
            );
        }
        let c = &self.com;
        let _ = writeln!(
            s,
            "[com]\nclosed_form = {}\nlda = {}\nlda_tau = {:?}\nlda_momentum = {}",
            c.closed_form,
            c.lda,
            c.lda_tau,
            match c.lda_momentum {
                LdaMomentum::Imbalance => "imbalance",
                LdaMomentum::Measured => "measured",
            }
        );
        if let Some(t) = c.lda_t_end {
            let _ = writeln!(s, "lda_t_end = {t:?}");
        }
        if let Some((a, b)) = c.window {
            let _ = writeln!(s, "window = {a:?}, {b:?}");
        }
        let _ = writeln!(
            s,
            "\n[output]\ndir = {}\nsnapshots = {}",
            self.output.dir.display(),
            self.output.snapshots
        );
        s
    }
}
