//! Experiment configuration.
//!
//! A config is one JSON document. Unknown keys are rejected everywhere and
//! every field has a default, so a file only needs the values it changes.

use std::path::{Path, PathBuf};

use femtonet::sched::DualConfig;
use femtonet::spectrum::{PrimaryChannel, SensorProfile};
use femtonet::video::VideoSequence;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    MulticastCase1,
    MulticastCase2,
    MulticastCase3,
    StreamSingle,
    StreamNoninterfering,
    StreamInterfering,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::MulticastCase1 => "multicast-case1",
            Scenario::MulticastCase2 => "multicast-case2",
            Scenario::MulticastCase3 => "multicast-case3",
            Scenario::StreamSingle => "stream-single",
            Scenario::StreamNoninterfering => "stream-noninterfering",
            Scenario::StreamInterfering => "stream-interfering",
        }
    }

    pub fn is_multicast(self) -> bool {
        matches!(self, Scenario::MulticastCase1 | Scenario::MulticastCase2 | Scenario::MulticastCase3)
    }
}

/// The swept variable and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variable", content = "values", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Sweep {
    Levels(Vec<usize>),
    /// MBS bandwidth in Hz; every FBS gets the rest of the fixed total.
    MbsBandwidth(Vec<f64>),
    Users(Vec<usize>),
    Channels(Vec<usize>),
    Utilization(Vec<f64>),
    /// `[false_alarm, miss]` pairs.
    SensingErrors(Vec<[f64; 2]>),
    /// Common-channel bandwidth in bit/s.
    CommonBandwidth(Vec<f64>),
    /// Dual-iteration budget per slot.
    Budget(Vec<usize>),
}

/// One point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    Base,
    Levels(usize),
    MbsBandwidth(f64),
    Users(usize),
    Channels(usize),
    Utilization(f64),
    SensingErrors(f64, f64),
    CommonBandwidth(f64),
    Budget(usize),
}

impl Point {
    /// Value written to the `sweep` column.
    pub fn label(&self) -> String {
        match *self {
            Point::Base => "base".to_string(),
            Point::Levels(v) | Point::Users(v) | Point::Channels(v) | Point::Budget(v) => v.to_string(),
            Point::MbsBandwidth(v) | Point::Utilization(v) | Point::CommonBandwidth(v) => v.to_string(),
            Point::SensingErrors(e, d) => format!("{e}/{d}"),
        }
    }
}

impl Sweep {
    pub fn points(&self) -> Vec<Point> {
        match self {
            Sweep::Levels(v) => v.iter().map(|&x| Point::Levels(x)).collect(),
            Sweep::MbsBandwidth(v) => v.iter().map(|&x| Point::MbsBandwidth(x)).collect(),
            Sweep::Users(v) => v.iter().map(|&x| Point::Users(x)).collect(),
            Sweep::Channels(v) => v.iter().map(|&x| Point::Channels(x)).collect(),
            Sweep::Utilization(v) => v.iter().map(|&x| Point::Utilization(x)).collect(),
            Sweep::SensingErrors(v) => v.iter().map(|p| Point::SensingErrors(p[0], p[1])).collect(),
            Sweep::CommonBandwidth(v) => v.iter().map(|&x| Point::CommonBandwidth(x)).collect(),
            Sweep::Budget(v) => v.iter().map(|&x| Point::Budget(x)).collect(),
        }
    }

    fn is_empty(&self) -> bool {
        self.points().is_empty()
    }

    fn applies_to_multicast(&self) -> bool {
        matches!(self, Sweep::Levels(_) | Sweep::MbsBandwidth(_) | Sweep::Users(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MulticastParams {
    pub users: usize,
    pub levels: usize,
    /// FBS count for Case III (Case II always has one).
    pub femtocells: usize,
    /// Users with no femtocell coverage, taken from the end of the user list
    /// (Case III only).
    pub uncovered_users: usize,
    /// Hz
    pub mbs_bandwidth: f64,
    /// Hz, per FBS
    pub fbs_bandwidth: f64,
    /// Hz. Case I gives it all to the MBS; an `mbs-bandwidth` sweep keeps it fixed.
    pub total_bandwidth: f64,
    /// Target rate per level, bit/s.
    pub rate: f64,
    /// Noise power, W.
    pub noise: f64,
    /// Mean MBS-user power gain.
    pub mbs_gain: f64,
    /// Mean FBS-user power gain inside the femtocell.
    pub fbs_gain: f64,
    /// Interference-range growth per watt, m/W.
    pub radius_per_watt: f64,
    /// Run the exhaustive oracle when the instance is small enough.
    pub oracle: bool,
}

impl Default for MulticastParams {
    fn default() -> Self {
        Self {
            users: 8,
            levels: 4,
            femtocells: 3,
            uncovered_users: 0,
            mbs_bandwidth: 1e6,
            fbs_bandwidth: 1e6,
            total_bandwidth: 2e6,
            rate: 2e6,
            noise: 1e-13,
            mbs_gain: 1e-12,
            fbs_gain: 1e-11,
            radius_per_watt: 100.0,
            oracle: true,
        }
    }
}

impl MulticastParams {
    pub fn at(&self, point: &Point) -> Self {
        let mut p = self.clone();
        match *point {
            Point::Levels(l) => p.levels = l,
            Point::Users(k) => p.users = k,
            Point::MbsBandwidth(b) => {
                p.mbs_bandwidth = b;
                p.fbs_bandwidth = p.total_bandwidth - b;
            }
            _ => {}
        }
        p
    }

    pub fn validate(&self, scenario: Scenario) -> Result<()> {
        let positive = [
            ("mbs_bandwidth", self.mbs_bandwidth),
            ("fbs_bandwidth", self.fbs_bandwidth),
            ("total_bandwidth", self.total_bandwidth),
            ("rate", self.rate),
            ("noise", self.noise),
            ("mbs_gain", self.mbs_gain),
            ("fbs_gain", self.fbs_gain),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(HarnessError::config(format!("multicast.{name} must be positive, got {v}")));
            }
        }
        if !(self.radius_per_watt >= 0.0 && self.radius_per_watt.is_finite()) {
            return Err(HarnessError::config("multicast.radius_per_watt must be non-negative"));
        }
        if self.users == 0 || self.levels == 0 {
            return Err(HarnessError::config("multicast needs at least one user and one level"));
        }
        if self.levels > self.users {
            return Err(HarnessError::config(format!(
                "multicast.levels ({}) exceeds users ({}); some level would be empty",
                self.levels, self.users
            )));
        }
        if scenario == Scenario::MulticastCase3 {
            if self.femtocells == 0 {
                return Err(HarnessError::config("multicast.femtocells must be at least 1 for case 3"));
            }
            if self.uncovered_users > self.users {
                return Err(HarnessError::config("multicast.uncovered_users exceeds users"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StreamParams {
    pub femtocells: usize,
    pub users_per_fbs: usize,
    /// Licensed channels `M`.
    pub channels: usize,
    pub p01: f64,
    pub p10: f64,
    /// Overrides the stationary utilization by adjusting `p01`.
    pub utilization: Option<f64>,
    /// Collision tolerance.
    pub gamma: f64,
    pub false_alarm: f64,
    pub miss: f64,
    /// FBSs sense every channel each slot in addition to the users.
    pub fbs_sensing: bool,
    /// Slots per GoP window `T`.
    pub window: u32,
    /// Windows simulated per run.
    pub windows: u32,
    /// bit/s
    pub common_bandwidth: f64,
    /// bit/s per licensed channel
    pub licensed_bandwidth: f64,
    /// Sequences assigned to users in turn within each femtocell.
    pub sequences: Vec<VideoSequence>,
    /// Per-link packet loss probabilities are drawn uniformly from this range.
    pub loss_range: [f64; 2],
    /// Decoding SINR threshold `H`.
    pub threshold: f64,
    /// Interference-graph edges (FBS pairs); interfering scenario only.
    pub edges: Vec<[usize; 2]>,
    pub step: f64,
    pub tolerance: f64,
    pub max_iters: usize,
    /// Rescale prices per transmitter before the dual update.
    pub precondition: bool,
    /// Refine the solver's primal point by single-user branch flips.
    pub polish: bool,
    /// Iteration cap for greedy candidate evaluations.
    pub inner_iters: usize,
    /// Slots at the start of each run whose dual traces are recorded.
    pub trace_slots: usize,
}

impl Default for StreamParams {
    fn default() -> Self {
        Self {
            femtocells: 1,
            users_per_fbs: 3,
            channels: 8,
            p01: 0.4,
            p10: 0.3,
            utilization: None,
            gamma: 0.2,
            false_alarm: 0.3,
            miss: 0.3,
            fbs_sensing: true,
            window: 10,
            windows: 5,
            common_bandwidth: 3e5,
            licensed_bandwidth: 3e5,
            sequences: vec![VideoSequence::bus(), VideoSequence::mobile(), VideoSequence::harbour()],
            loss_range: [0.004, 0.028],
            threshold: 1.0,
            edges: Vec::new(),
            step: 0.01,
            tolerance: 1e-6,
            max_iters: 10_000,
            precondition: true,
            polish: true,
            inner_iters: 200,
            trace_slots: 1,
        }
    }
}

impl StreamParams {
    pub fn at(&self, point: &Point) -> Self {
        let mut p = self.clone();
        match *point {
            Point::Channels(m) => p.channels = m,
            Point::Utilization(eta) => p.utilization = Some(eta),
            Point::SensingErrors(e, d) => {
                p.false_alarm = e;
                p.miss = d;
            }
            Point::CommonBandwidth(b) => p.common_bandwidth = b,
            Point::Budget(b) => p.max_iters = b,
            _ => {}
        }
        p
    }

    pub fn num_users(&self) -> usize {
        self.femtocells * self.users_per_fbs
    }

    pub fn dual_config(&self) -> DualConfig {
        DualConfig {
            step: self.step,
            tolerance: self.tolerance,
            max_iters: self.max_iters,
            precondition: self.precondition,
            polish: self.polish,
            record_trace: false,
        }
    }

    /// The primary-channel model after any utilization override.
    pub fn primary(&self) -> Result<PrimaryChannel> {
        let ch = PrimaryChannel::new(self.p01, self.p10)?;
        Ok(match self.utilization {
            Some(eta) => ch.with_utilization(eta)?,
            None => ch,
        })
    }

    pub fn profile(&self) -> Result<SensorProfile> {
        Ok(SensorProfile::new(self.false_alarm, self.miss)?)
    }

    pub fn validate(&self, scenario: Scenario) -> Result<()> {
        if self.femtocells == 0 || self.users_per_fbs == 0 {
            return Err(HarnessError::config("stream needs at least one femtocell and one user per femtocell"));
        }
        match scenario {
            Scenario::StreamSingle if self.femtocells != 1 => {
                return Err(HarnessError::config("stream-single requires stream.femtocells = 1"));
            }
            Scenario::StreamSingle | Scenario::StreamNoninterfering if !self.edges.is_empty() => {
                return Err(HarnessError::config(format!("{} takes no interference edges", scenario.name())));
            }
            _ => {}
        }
        for e in &self.edges {
            if e[0] >= self.femtocells || e[1] >= self.femtocells || e[0] == e[1] {
                return Err(HarnessError::config(format!("stream.edges: bad edge {:?}", e)));
            }
        }
        self.primary()?;
        self.profile()?;
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(HarnessError::config("stream.gamma must lie in (0, 1]"));
        }
        if self.window == 0 || self.windows == 0 {
            return Err(HarnessError::config("stream.window and stream.windows must be at least 1"));
        }
        for (name, v) in [
            ("common_bandwidth", self.common_bandwidth),
            ("licensed_bandwidth", self.licensed_bandwidth),
            ("threshold", self.threshold),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(HarnessError::config(format!("stream.{name} must be non-negative, got {v}")));
            }
        }
        let [lo, hi] = self.loss_range;
        if !(0.0 < lo && lo <= hi && hi < 1.0) {
            return Err(HarnessError::config("stream.loss_range must satisfy 0 < lo <= hi < 1"));
        }
        if !(self.threshold > 0.0) {
            return Err(HarnessError::config("stream.threshold must be positive"));
        }
        if self.sequences.is_empty() {
            return Err(HarnessError::config("stream.sequences is empty"));
        }
        for s in &self.sequences {
            s.validate()?;
        }
        if self.max_iters == 0 || self.inner_iters == 0 {
            return Err(HarnessError::config("stream.max_iters and stream.inner_iters must be at least 1"));
        }
        if !(self.step > 0.0 && self.step.is_finite()) || !(self.tolerance >= 0.0) {
            return Err(HarnessError::config("stream.step must be positive and stream.tolerance non-negative"));
        }
        Ok(())
    }
}

fn default_seeds() -> Vec<u64> {
    (0..10).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub multicast: MulticastParams,
    #[serde(default)]
    pub stream: StreamParams,
    /// Default output directory when `--out` is not given.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            seeds: default_seeds(),
            sweep: None,
            multicast: MulticastParams::default(),
            stream: StreamParams::default(),
            out: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn points(&self) -> Vec<Point> {
        match &self.sweep {
            Some(s) => s.points(),
            None => vec![Point::Base],
        }
    }

    /// Checks the config at every sweep point.
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(HarnessError::config("no seeds"));
        }
        if let Some(s) = &self.sweep {
            if s.is_empty() {
                return Err(HarnessError::config("sweep has no values"));
            }
            if self.scenario.is_multicast() != s.applies_to_multicast() {
                return Err(HarnessError::config(format!("sweep variable does not apply to {}", self.scenario.name())));
            }
        }
        for point in self.points() {
            if self.scenario.is_multicast() {
                let p = self.multicast.at(&point);
                if let Point::MbsBandwidth(b) = point {
                    if !(b > 0.0 && b < self.multicast.total_bandwidth) {
                        return Err(HarnessError::config(format!(
                            "mbs-bandwidth {b} must lie strictly inside (0, total_bandwidth)"
                        )));
                    }
                }
                p.validate(self.scenario)?;
            } else {
                self.stream.at(&point).validate(self.scenario)?;
            }
        }
        Ok(())
    }
}

/// Parses `a..b` (half-open) into a seed list.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let bad = || HarnessError::config(format!("seeds must look like a..b, got {spec:?}"));
    let (a, b) = spec.split_once("..").ok_or_else(bad)?;
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    if b <= a {
        return Err(HarnessError::config(format!("empty seed range {spec}")));
    }
    Ok((a..b).collect())
}
