//! TOML experiment configuration.
//!
//! Every problem found while reading a file is collected, so a single run
//! reports all unknown keys, type errors and range violations at once.

use std::path::PathBuf;

use stablemix::pide::PicardOptions;
use stablemix::presets::DriftPreset;
use stablemix::probe::TestFunction;
use stablemix::spaces::conditions::require;
use stablemix::{GridSpec, RegularityIndices};
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckConditions,
    VerifyKernels,
    PideSolve,
    PidePicard,
    ZvonkinBuild,
    SimEuler,
    SimTransformed,
    SimUniqueness,
    SimKinetic,
    McKrylov,
    McKhasminskii,
    McGirsanov,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckConditions => "check conditions",
            Command::VerifyKernels => "verify-kernels",
            Command::PideSolve => "pide solve",
            Command::PidePicard => "pide picard",
            Command::ZvonkinBuild => "zvonkin build",
            Command::SimEuler => "sim euler",
            Command::SimTransformed => "sim transformed",
            Command::SimUniqueness => "sim uniqueness",
            Command::SimKinetic => "sim kinetic",
            Command::McKrylov => "mc krylov",
            Command::McKhasminskii => "mc khasminskii",
            Command::McGirsanov => "mc girsanov",
        }
    }

    /// Admissibility inequalities the command refuses to run without.
    pub fn required_conditions(self) -> &'static [&'static str] {
        match self {
            Command::PidePicard | Command::ZvonkinBuild | Command::SimTransformed | Command::McGirsanov => {
                &["cond_main"]
            }
            Command::McKrylov | Command::McKhasminskii => &["cond_krylov"],
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    pub amplitude: f64,
    pub width: f64,
    pub center: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZvonkinConfig {
    pub max_grad: f64,
    pub bilip_pairs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSection {
    pub z0: [f64; 2],
    pub epsilon: f64,
    pub steps: usize,
    pub horizon: f64,
    pub n_seeds: usize,
    pub levels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSection {
    pub n_samples: usize,
    pub n_steps: usize,
    pub horizon: f64,
    pub test_function: TestFunction,
    pub target_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub out: PathBuf,
    pub indices: RegularityIndices<f64>,
    pub grid: GridSpec<f64>,
    pub drift: DriftPreset,
    pub source: SourceConfig,
    pub picard: PicardOptions,
    pub zvonkin: ZvonkinConfig,
    pub sim: SimSection,
    pub mc: McSection,
}

impl ExperimentConfig {
    /// Built-in defaults, used when no file is given.
    pub fn defaults(command: Command) -> Self {
        let pi = std::f64::consts::PI;
        ExperimentConfig {
            command,
            seed: 0,
            out: PathBuf::from("out"),
            indices: RegularityIndices { alpha: 1.5, beta: 0.5, p: 8.0, q: 8.0, d1: 1, d2: 1 },
            grid: GridSpec { lx: pi, ly: pi, nx: 128, ny: 128, t_end: 0.5, nt: 256 },
            drift: DriftPreset::Bump { amplitude: 0.3, width: 0.5 },
            source: SourceConfig { amplitude: 1.0, width: 0.5, center: [0.0, 0.0] },
            picard: PicardOptions::default(),
            zvonkin: ZvonkinConfig { max_grad: 0.5, bilip_pairs: 10_000 },
            sim: SimSection {
                z0: [0.0, 0.0],
                epsilon: 1.0,
                steps: 1000,
                horizon: 1.0,
                n_seeds: 24,
                levels: vec![4, 8, 16, 32],
            },
            mc: McSection {
                n_samples: 10_000,
                n_steps: 100,
                horizon: 1.0,
                test_function: TestFunction::Bump { center: [0.0, 0.0], width: 0.5, amplitude: 1.0 },
                target_c: 0.3,
            },
        }
    }

    /// Range checks on the assembled configuration, including the
    /// admissibility inequalities the command needs.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = self.indices.range_errors();
        if let Err(e) = self.grid.validate() {
            errs.push(e.to_string());
        }
        if errs.is_empty() {
            if let Err(e) = require(&self.indices.check(), self.command.required_conditions()) {
                errs.push(format!("{} requires {e}", self.command.name()));
            }
        }
        if !(self.picard.tol > 0.0) {
            errs.push(format!("picard.tol must be positive, got {}", self.picard.tol));
        }
        if self.picard.max_iter == 0 {
            errs.push("picard.max_iter must be at least 1".into());
        }
        if !(self.zvonkin.max_grad > 0.0 && self.zvonkin.max_grad < 1.0) {
            errs.push(format!("zvonkin.max_grad must lie in (0,1), got {}", self.zvonkin.max_grad));
        }
        if !(self.source.width > 0.0) {
            errs.push(format!("source.width must be positive, got {}", self.source.width));
        }
        match self.drift {
            DriftPreset::Bump { width, .. } if !(width > 0.0) => {
                errs.push(format!("drift.width must be positive, got {width}"))
            }
            DriftPreset::Holder { gamma, .. } if !(gamma > 0.0 && gamma < 1.0) => {
                errs.push(format!("drift.gamma must lie in (0,1), got {gamma}"))
            }
            _ => {}
        }
        let s = &self.sim;
        if s.steps == 0 {
            errs.push("sim.steps must be at least 1".into());
        }
        if !(s.horizon > 0.0) {
            errs.push(format!("sim.horizon must be positive, got {}", s.horizon));
        }
        if !(s.epsilon >= 0.0) {
            errs.push(format!("sim.epsilon must be non-negative, got {}", s.epsilon));
        }
        if s.n_seeds == 0 {
            errs.push("sim.n_seeds must be at least 1".into());
        }
        if s.levels.len() < 2 || s.levels.contains(&0) {
            errs.push("sim.levels needs at least two positive entries".into());
        }
        let m = &self.mc;
        if m.n_samples < 2 {
            errs.push("mc.n_samples must be at least 2".into());
        }
        if m.n_steps == 0 {
            errs.push("mc.n_steps must be at least 1".into());
        }
        if !(m.horizon > 0.0) {
            errs.push(format!("mc.horizon must be positive, got {}", m.horizon));
        }
        if !m.test_function.is_nonnegative() {
            errs.push("mc test function must be nonnegative".into());
        }
        if !(m.target_c > 0.0 && m.target_c < 1.0) {
            errs.push(format!("mc.target_c must lie in (0,1), got {}", m.target_c));
        }
        errs
    }

    pub fn to_json(&self) -> serde_json::Value {
        let i = &self.indices;
        let g = &self.grid;
        let tf = match self.mc.test_function {
            TestFunction::Constant(c) => serde_json::json!({"kind": "constant", "value": c}),
            TestFunction::Box { x, y, height } => {
                serde_json::json!({"kind": "box", "x": x, "y": y, "height": height})
            }
            TestFunction::Bump { center, width, amplitude } => {
                serde_json::json!({"kind": "bump", "center": center, "width": width, "amplitude": amplitude})
            }
        };
        let drift = match self.drift {
            DriftPreset::Zero => serde_json::json!({"preset": "zero"}),
            DriftPreset::Bump { amplitude, width } => {
                serde_json::json!({"preset": "bump", "amplitude": amplitude, "width": width})
            }
            DriftPreset::Holder { gamma, amplitude } => {
                serde_json::json!({"preset": "holder", "amplitude": amplitude, "gamma": gamma})
            }
            DriftPreset::Trig { amplitude } => serde_json::json!({"preset": "trig", "amplitude": amplitude}),
        };
        serde_json::json!({
            "command": self.command.name(),
            "seed": self.seed,
            "out": self.out.display().to_string(),
            "indices": {"alpha": i.alpha, "beta": i.beta, "p": i.p, "q": i.q, "d1": i.d1, "d2": i.d2},
            "grid": {"lx": g.lx, "ly": g.ly, "nx": g.nx, "ny": g.ny, "t": g.t_end, "nt": g.nt},
            "drift": drift,
            "source": {"amplitude": self.source.amplitude, "width": self.source.width, "center": self.source.center},
            "picard": {"tol": self.picard.tol, "max_iter": self.picard.max_iter},
            "zvonkin": {"max_grad": self.zvonkin.max_grad, "bilip_pairs": self.zvonkin.bilip_pairs},
            "sim": {
                "z0": self.sim.z0, "epsilon": self.sim.epsilon, "steps": self.sim.steps,
                "horizon": self.sim.horizon, "n_seeds": self.sim.n_seeds, "levels": self.sim.levels,
            },
            "mc": {
                "n_samples": self.mc.n_samples, "n_steps": self.mc.n_steps, "horizon": self.mc.horizon,
                "test_function": tf, "target_c": self.mc.target_c,
            },
        })
    }
}

struct Reader {
    errors: Vec<String>,
}

impl Reader {
    fn section<'a>(&mut self, root: &'a Table, name: &str) -> Option<&'a Table> {
        match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.errors.push(format!("[{name}] must be a table"));
                None
            }
        }
    }

    fn known(&mut self, t: &Table, section: &str, keys: &[&str]) {
        for k in t.keys() {
            if !keys.contains(&k.as_str()) {
                let at = if section.is_empty() { k.clone() } else { format!("{section}.{k}") };
                self.errors.push(format!("unknown key {at:?}"));
            }
        }
    }

    fn f64(&mut self, t: &Table, section: &str, key: &str, into: &mut f64) {
        match t.get(key) {
            None => {}
            Some(Value::Float(v)) => *into = *v,
            Some(Value::Integer(v)) => *into = *v as f64,
            Some(other) => self.errors.push(format!("{section}.{key} must be a number, got {other}")),
        }
    }

    fn usize(&mut self, t: &Table, section: &str, key: &str, into: &mut usize) {
        match t.get(key) {
            None => {}
            Some(Value::Integer(v)) if *v >= 0 => *into = *v as usize,
            Some(other) => self.errors.push(format!("{section}.{key} must be a non-negative integer, got {other}")),
        }
    }

    fn pair(&mut self, t: &Table, section: &str, key: &str, into: &mut [f64; 2]) {
        let Some(v) = t.get(key) else { return };
        let parsed = v.as_array().filter(|a| a.len() == 2).and_then(|a| {
            let num = |x: &Value| x.as_float().or_else(|| x.as_integer().map(|i| i as f64));
            Some([num(&a[0])?, num(&a[1])?])
        });
        match parsed {
            Some(p) => *into = p,
            None => self.errors.push(format!("{section}.{key} must be a pair of numbers, got {v}")),
        }
    }

    fn string(&mut self, t: &Table, section: &str, key: &str) -> Option<String> {
        match t.get(key) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => {
                self.errors.push(format!("{section}.{key} must be a string, got {other}"));
                None
            }
        }
    }

    fn require_keys(&mut self, t: &Table, section: &str, keys: &[&str]) {
        for k in keys {
            if !t.contains_key(*k) {
                self.errors.push(format!("missing required key {section}.{k}"));
            }
        }
    }
}

/// Parses a configuration file for `command`. The `[indices]` section with
/// `alpha`, `beta`, `p` and `q` is required; everything else defaults.
pub fn parse_config(text: &str, command: Command) -> Result<ExperimentConfig, Vec<String>> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| vec![format!("syntax: {e}")])?;
    let mut cfg = ExperimentConfig::defaults(command);
    let mut r = Reader { errors: Vec::new() };
    r.known(&root, "", &["seed", "out", "indices", "grid", "drift", "source", "picard", "zvonkin", "sim", "mc"]);
    match root.get("seed") {
        None => {}
        Some(Value::Integer(v)) if *v >= 0 => cfg.seed = *v as u64,
        Some(other) => r.errors.push(format!("seed must be a non-negative integer, got {other}")),
    }
    if let Some(o) = r.string(&root, "", "out") {
        cfg.out = PathBuf::from(o);
    }

    match r.section(&root, "indices") {
        None if !root.contains_key("indices") => r.errors.push("missing required section [indices]".into()),
        None => {}
        Some(t) => {
            r.known(t, "indices", &["alpha", "beta", "p", "q", "d1", "d2"]);
            r.require_keys(t, "indices", &["alpha", "beta", "p", "q"]);
            let i = &mut cfg.indices;
            r.f64(t, "indices", "alpha", &mut i.alpha);
            r.f64(t, "indices", "beta", &mut i.beta);
            r.f64(t, "indices", "p", &mut i.p);
            r.f64(t, "indices", "q", &mut i.q);
            r.usize(t, "indices", "d1", &mut i.d1);
            r.usize(t, "indices", "d2", &mut i.d2);
        }
    }
    if let Some(t) = r.section(&root, "grid") {
        r.known(t, "grid", &["lx", "ly", "nx", "ny", "t", "nt"]);
        let g = &mut cfg.grid;
        r.f64(t, "grid", "lx", &mut g.lx);
        r.f64(t, "grid", "ly", &mut g.ly);
        r.usize(t, "grid", "nx", &mut g.nx);
        r.usize(t, "grid", "ny", &mut g.ny);
        r.f64(t, "grid", "t", &mut g.t_end);
        r.usize(t, "grid", "nt", &mut g.nt);
    }
    if let Some(t) = r.section(&root, "drift") {
        r.known(t, "drift", &["preset", "amplitude", "width", "gamma"]);
        let (mut amplitude, mut width, mut gamma) = (0.3, 0.5, 0.7);
        r.f64(t, "drift", "amplitude", &mut amplitude);
        r.f64(t, "drift", "width", &mut width);
        r.f64(t, "drift", "gamma", &mut gamma);
        let name = r.string(t, "drift", "preset").unwrap_or_else(|| cfg.drift.name().to_string());
        match DriftPreset::parse(&name, amplitude, width, gamma) {
            Ok(p) => cfg.drift = p,
            Err(e) => r.errors.push(e.to_string()),
        }
    }
    if let Some(t) = r.section(&root, "source") {
        r.known(t, "source", &["amplitude", "width", "center"]);
        r.f64(t, "source", "amplitude", &mut cfg.source.amplitude);
        r.f64(t, "source", "width", &mut cfg.source.width);
        r.pair(t, "source", "center", &mut cfg.source.center);
    }
    if let Some(t) = r.section(&root, "picard") {
        r.known(t, "picard", &["tol", "max_iter"]);
        r.f64(t, "picard", "tol", &mut cfg.picard.tol);
        r.usize(t, "picard", "max_iter", &mut cfg.picard.max_iter);
    }
    if let Some(t) = r.section(&root, "zvonkin") {
        r.known(t, "zvonkin", &["max_grad", "bilip_pairs"]);
        r.f64(t, "zvonkin", "max_grad", &mut cfg.zvonkin.max_grad);
        r.usize(t, "zvonkin", "bilip_pairs", &mut cfg.zvonkin.bilip_pairs);
    }
    if let Some(t) = r.section(&root, "sim") {
        r.known(t, "sim", &["z0", "epsilon", "steps", "horizon", "n_seeds", "levels"]);
        let s = &mut cfg.sim;
        r.pair(t, "sim", "z0", &mut s.z0);
        r.f64(t, "sim", "epsilon", &mut s.epsilon);
        r.usize(t, "sim", "steps", &mut s.steps);
        r.f64(t, "sim", "horizon", &mut s.horizon);
        r.usize(t, "sim", "n_seeds", &mut s.n_seeds);
        if let Some(v) = t.get("levels") {
            let parsed: Option<Vec<usize>> = v
                .as_array()
                .and_then(|a| a.iter().map(|x| x.as_integer().filter(|&i| i > 0).map(|i| i as usize)).collect());
            match parsed {
                Some(l) => s.levels = l,
                None => r.errors.push(format!("sim.levels must be a list of positive integers, got {v}")),
            }
        }
    }
    if let Some(t) = r.section(&root, "mc") {
        r.known(
            t,
            "mc",
            &["n_samples", "n_steps", "horizon", "target_c", "test_function", "center", "width", "height", "box_x", "box_y", "value"],
        );
        let m = &mut cfg.mc;
        r.usize(t, "mc", "n_samples", &mut m.n_samples);
        r.usize(t, "mc", "n_steps", &mut m.n_steps);
        r.f64(t, "mc", "horizon", &mut m.horizon);
        r.f64(t, "mc", "target_c", &mut m.target_c);
        let (mut center, mut width, mut height) = ([0.0, 0.0], 0.5, 1.0);
        let (mut bx, mut by, mut value) = ([-0.5, 0.5], [-0.5, 0.5], 1.0);
        r.pair(t, "mc", "center", &mut center);
        r.f64(t, "mc", "width", &mut width);
        r.f64(t, "mc", "height", &mut height);
        r.pair(t, "mc", "box_x", &mut bx);
        r.pair(t, "mc", "box_y", &mut by);
        r.f64(t, "mc", "value", &mut value);
        match r.string(t, "mc", "test_function").as_deref() {
            None | Some("bump") => m.test_function = TestFunction::Bump { center, width, amplitude: height },
            Some("box") => m.test_function = TestFunction::Box { x: bx, y: by, height },
            Some("constant") => m.test_function = TestFunction::Constant(value),
            Some(other) => r
                .errors
                .push(format!("mc.test_function {other:?} unknown; expected bump, box or constant")),
        }
    }

    let mut errors = r.errors;
    if errors.is_empty() {
        errors.extend(cfg.validate());
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(errors)
    }
}
