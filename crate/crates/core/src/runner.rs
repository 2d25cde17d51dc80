//! Scenario configs, dispatch to the simulation modules, and JSON reports.
//!
//! A scenario document names a `kind`, an optional `seed` and `trials`
//! count, and a `params` table whose shape depends on the kind:
//!
//! ```toml
//! name = "ladder-3-2"
//! kind = "Ladder"
//!
//! [params]
//! rungs = 12
//! skips = [3, 2]
//! expected_period = 6
//! ```
//!
//! Reports are deterministic functions of the config: no timestamps, ordered
//! maps only, and every random draw comes from [`crate::rng::stream`].

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_integer::Integer;
use rand::Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::capacity::{self, CapacityError, Worksheet, WorksheetParams, CODATA};
use crate::memnet::{self, HopfieldGrid, KnotFeeder, MemnetError};
use crate::protocol::{
    self, ChannelId, MutationPolicy, NeuronNode, NodeId, NodeMap, ProtocolError, Role,
    Transcript,
};
use crate::qstate::{self, QStateError, QuantumRegister};
use crate::rng;
use crate::selection::{self, CouplingCandidate, EvolutionParams, PhaseLockOutcome, QuantumOscillator, SelectionError};

pub const REPORT_SCHEMA: &str = "nqcc-report/1";
pub const VERIFY_SCHEMA: &str = "nqcc-verify/1";

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Memnet(#[from] MemnetError),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error(transparent)]
    QState(#[from] QStateError),
}

pub type Result<T> = std::result::Result<T, RunnerError>;

fn config_err(path: impl Into<String>, message: impl Into<String>) -> RunnerError {
    RunnerError::Config {
        path: path.into(),
        message: message.into(),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunnerError + '_ {
    move |source| RunnerError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioKind {
    CnotEquivalence,
    ChoiceOfChannel,
    ChooseNeuron,
    PhaseLock,
    EvolveCouplings,
    Ladder,
    MadicGrid,
    Capacity,
}

impl ScenarioKind {
    pub fn is_stochastic(self) -> bool {
        !matches!(self, Self::Ladder | Self::MadicGrid | Self::Capacity)
    }
}

/// Reversibility sweep over `trials` random transcripts plus the fixed
/// four-row truth table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CnotEquivalenceParams {}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceOfChannelParams {
    /// Fixed control bit; drawn per trial when absent.
    #[serde(default)]
    pub control_bit: Option<u8>,
    #[serde(default)]
    pub target_bit: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChooseNeuronParams {
    pub targets: u32,
    /// Half-width of the acceptance band in binomial standard deviations.
    #[serde(default = "default_sigmas")]
    pub sigmas: f64,
}

fn default_sigmas() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseLockParams {
    pub controls: Vec<QuantumOscillator>,
    pub targets: Vec<QuantumOscillator>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSpec {
    pub control: NodeId,
    pub target: NodeId,
    pub channel: ChannelId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveCouplingsParams {
    #[serde(default = "default_steps")]
    pub steps: u32,
    #[serde(default = "default_threshold")]
    pub extinction_threshold: i64,
    #[serde(default)]
    pub noise: f64,
    pub oscillators: Vec<QuantumOscillator>,
    pub candidates: Vec<CandidateSpec>,
}

fn default_steps() -> u32 {
    10
}

fn default_threshold() -> i64 {
    selection::DEFAULT_EXTINCTION_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderParams {
    pub rungs: usize,
    #[serde(default)]
    pub skips: Vec<usize>,
    #[serde(default)]
    pub closed: bool,
    #[serde(default)]
    pub expected_period: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecallCase {
    pub stimulate: String,
    #[serde(default)]
    pub expect: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MadicGridParams {
    #[serde(default = "default_base")]
    pub base: u64,
    #[serde(default = "default_knots")]
    pub knots: usize,
    #[serde(default)]
    pub expected_knots: Option<Vec<u64>>,
    #[serde(default)]
    pub grid: Option<HopfieldGrid>,
    #[serde(default)]
    pub recall: Vec<RecallCase>,
    #[serde(default)]
    pub feeders: Vec<KnotFeeder>,
    #[serde(default)]
    pub ticks: u64,
}

fn default_base() -> u64 {
    2
}

fn default_knots() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityParams {
    #[serde(default)]
    pub worksheet: WorksheetParams,
    /// Relative tolerance against figures the source only gives rounded.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_tolerance() -> f64 {
    0.15
}

impl Default for CapacityParams {
    fn default() -> Self {
        Self {
            worksheet: WorksheetParams::default(),
            tolerance: default_tolerance(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioParams {
    CnotEquivalence(CnotEquivalenceParams),
    ChoiceOfChannel(ChoiceOfChannelParams),
    ChooseNeuron(ChooseNeuronParams),
    PhaseLock(PhaseLockParams),
    EvolveCouplings(EvolveCouplingsParams),
    Ladder(LadderParams),
    MadicGrid(MadicGridParams),
    Capacity(CapacityParams),
}

impl ScenarioParams {
    pub fn kind(&self) -> ScenarioKind {
        match self {
            Self::CnotEquivalence(_) => ScenarioKind::CnotEquivalence,
            Self::ChoiceOfChannel(_) => ScenarioKind::ChoiceOfChannel,
            Self::ChooseNeuron(_) => ScenarioKind::ChooseNeuron,
            Self::PhaseLock(_) => ScenarioKind::PhaseLock,
            Self::EvolveCouplings(_) => ScenarioKind::EvolveCouplings,
            Self::Ladder(_) => ScenarioKind::Ladder,
            Self::MadicGrid(_) => ScenarioKind::MadicGrid,
            Self::Capacity(_) => ScenarioKind::Capacity,
        }
    }

    fn from_value(kind: ScenarioKind, value: Value) -> Result<Self> {
        fn parse<T: DeserializeOwned>(value: Value) -> Result<T> {
            serde_path_to_error::deserialize(value).map_err(|e| {
                let path = e.path().to_string();
                let path = if path == "." { "params".to_owned() } else { format!("params.{path}") };
                config_err(path, e.into_inner().to_string())
            })
        }
        Ok(match kind {
            ScenarioKind::CnotEquivalence => Self::CnotEquivalence(parse(value)?),
            ScenarioKind::ChoiceOfChannel => Self::ChoiceOfChannel(parse(value)?),
            ScenarioKind::ChooseNeuron => Self::ChooseNeuron(parse(value)?),
            ScenarioKind::PhaseLock => Self::PhaseLock(parse(value)?),
            ScenarioKind::EvolveCouplings => Self::EvolveCouplings(parse(value)?),
            ScenarioKind::Ladder => Self::Ladder(parse(value)?),
            ScenarioKind::MadicGrid => Self::MadicGrid(parse(value)?),
            ScenarioKind::Capacity => Self::Capacity(parse(value)?),
        })
    }

    fn to_value(&self) -> Value {
        let v = match self {
            Self::CnotEquivalence(p) => serde_json::to_value(p),
            Self::ChoiceOfChannel(p) => serde_json::to_value(p),
            Self::ChooseNeuron(p) => serde_json::to_value(p),
            Self::PhaseLock(p) => serde_json::to_value(p),
            Self::EvolveCouplings(p) => serde_json::to_value(p),
            Self::Ladder(p) => serde_json::to_value(p),
            Self::MadicGrid(p) => serde_json::to_value(p),
            Self::Capacity(p) => serde_json::to_value(p),
        };
        v.expect("params serialize to JSON")
    }
}

/// One declarative experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: Option<u64>,
    pub trials: u64,
    pub params: ScenarioParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    kind: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default = "default_trials")]
    trials: u64,
    #[serde(default = "empty_table")]
    params: Value,
}

fn default_trials() -> u64 {
    1
}

fn empty_table() -> Value {
    Value::Object(Default::default())
}

impl TryFrom<RawConfig> for ScenarioConfig {
    type Error = RunnerError;

    fn try_from(raw: RawConfig) -> Result<Self> {
        Ok(Self {
            name: raw.name,
            seed: raw.seed,
            trials: raw.trials,
            params: ScenarioParams::from_value(raw.kind, raw.params)?,
        })
    }
}

impl From<ScenarioConfig> for RawConfig {
    fn from(c: ScenarioConfig) -> Self {
        Self {
            name: c.name,
            kind: c.params.kind(),
            seed: c.seed,
            trials: c.trials,
            params: c.params.to_value(),
        }
    }
}

/// Command-line replacements for a config's seed and trial count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
}

impl ScenarioConfig {
    pub fn new(name: impl Into<String>, seed: Option<u64>, trials: u64, params: ScenarioParams) -> Self {
        Self {
            name: name.into(),
            seed,
            trials,
            params,
        }
    }

    pub fn kind(&self) -> ScenarioKind {
        self.params.kind()
    }

    /// Parses a TOML document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_err("", e.to_string()))?;
        let value = serde_json::to_value(table).map_err(|e| config_err("", e.to_string()))?;
        Self::from_value(value)
    }

    /// Parses a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| config_err("", e.to_string()))?;
        Self::from_value(value)
    }

    fn from_value(value: Value) -> Result<Self> {
        let raw: RawConfig = serde_path_to_error::deserialize(value)
            .map_err(|e| config_err(e.path().to_string(), e.into_inner().to_string()))?;
        let config = Self::try_from(raw)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a `.json` or TOML scenario file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn apply(&mut self, overrides: Overrides) {
        if let Some(seed) = overrides.seed {
            self.seed = Some(seed);
        }
        if let Some(trials) = overrides.trials {
            self.trials = trials;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(config_err("name", "must not be empty"));
        }
        if self.trials < 1 {
            return Err(config_err("trials", "must be at least 1"));
        }
        if self.kind().is_stochastic() && self.seed.is_none() {
            return Err(config_err("seed", format!("required for {:?}", self.kind())));
        }
        match &self.params {
            ScenarioParams::CnotEquivalence(_) => {}
            ScenarioParams::ChoiceOfChannel(p) => {
                for (field, bit) in [("control_bit", p.control_bit), ("target_bit", p.target_bit)] {
                    if bit.is_some_and(|b| b > 1) {
                        return Err(config_err(format!("params.{field}"), "must be 0 or 1"));
                    }
                }
            }
            ScenarioParams::ChooseNeuron(p) => {
                if p.targets == 0 {
                    return Err(config_err("params.targets", "must be at least 1"));
                }
                if !(p.sigmas > 0.0 && p.sigmas.is_finite()) {
                    return Err(config_err("params.sigmas", "must be positive"));
                }
            }
            ScenarioParams::PhaseLock(p) => {
                if p.controls.is_empty() {
                    return Err(config_err("params.controls", "needs at least one oscillator"));
                }
                validate_oscillators("params.controls", &p.controls)?;
                validate_oscillators("params.targets", &p.targets)?;
            }
            ScenarioParams::EvolveCouplings(p) => {
                if p.extinction_threshold < 1 {
                    return Err(config_err("params.extinction_threshold", "must be at least 1"));
                }
                if !(0.0..=1.0).contains(&p.noise) {
                    return Err(config_err("params.noise", "must lie in [0, 1]"));
                }
                validate_oscillators("params.oscillators", &p.oscillators)?;
                for (i, c) in p.candidates.iter().enumerate() {
                    for (field, id) in [("control", &c.control), ("target", &c.target)] {
                        if !p.oscillators.iter().any(|o| &o.node == id) {
                            return Err(config_err(
                                format!("params.candidates[{i}].{field}"),
                                format!("no oscillator for node {id}"),
                            ));
                        }
                    }
                }
            }
            ScenarioParams::Ladder(p) => {
                memnet::build_ladder(p.rungs, &p.skips, p.closed)
                    .map_err(|e| config_err("params.skips", e.to_string()))?;
            }
            ScenarioParams::MadicGrid(p) => {
                if p.base < 2 {
                    return Err(config_err("params.base", "must be at least 2"));
                }
                if p.knots == 0 {
                    return Err(config_err("params.knots", "must be at least 1"));
                }
                if let Some(grid) = &p.grid {
                    grid.validate().map_err(|e| config_err("params.grid", e.to_string()))?;
                    for (i, case) in p.recall.iter().enumerate() {
                        let known = grid.rows.iter().chain(&grid.columns).any(|l| l.id == case.stimulate);
                        if !known {
                            return Err(config_err(
                                format!("params.recall[{i}].stimulate"),
                                format!("unknown loop {}", case.stimulate),
                            ));
                        }
                    }
                } else if !p.recall.is_empty() {
                    return Err(config_err("params.recall", "recall cases need a grid"));
                }
                if let Some(i) = p.feeders.iter().position(|f| f.period == 0) {
                    return Err(config_err(format!("params.feeders[{i}].period"), "must be positive"));
                }
            }
            ScenarioParams::Capacity(p) => {
                if !(p.tolerance >= 0.0 && p.tolerance.is_finite()) {
                    return Err(config_err("params.tolerance", "must be non-negative"));
                }
                capacity::worksheet(&p.worksheet).map_err(|e| config_err("params.worksheet", e.to_string()))?;
            }
        }
        Ok(())
    }
}

fn validate_oscillators(path: &str, oscillators: &[QuantumOscillator]) -> Result<()> {
    for (i, o) in oscillators.iter().enumerate() {
        QuantumOscillator::new(o.node.clone(), o.ground_index, o.mutator_index, o.period, o.phase)
            .map_err(|e| config_err(format!("{path}[{i}]"), e.to_string()))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

impl Statistic {
    fn point(name: &str, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            lower: None,
            upper: None,
        }
    }
}

/// Where a transcript from the run is written, relative to the report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRef {
    pub label: String,
    pub file: String,
    pub steps: usize,
    pub bits_transmitted: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTranscript {
    pub label: String,
    pub transcript: Transcript,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub scenario: ScenarioConfig,
    pub passed: bool,
    /// Trial count per outcome label.
    pub outcomes: BTreeMap<String, u64>,
    /// Kind-specific structured results.
    pub details: Value,
    pub statistics: Vec<Statistic>,
    pub checks: Vec<Check>,
    pub transcripts: Vec<TranscriptRef>,
}

impl RunReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Default)]
struct Builder {
    outcomes: BTreeMap<String, u64>,
    details: BTreeMap<String, Value>,
    statistics: Vec<Statistic>,
    checks: Vec<Check>,
    transcripts: Vec<LabeledTranscript>,
}

impl Builder {
    fn outcome(&mut self, label: impl Into<String>) {
        *self.outcomes.entry(label.into()).or_default() += 1;
    }

    fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("details serialize to JSON");
        self.details.insert(key.into(), v);
    }

    fn stat(&mut self, s: Statistic) {
        self.statistics.push(s);
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn finish(self, config: &ScenarioConfig) -> (RunReport, Vec<LabeledTranscript>) {
        let transcripts = self
            .transcripts
            .iter()
            .map(|t| TranscriptRef {
                label: t.label.clone(),
                file: transcript_file(&config.name, &t.label),
                steps: t.transcript.steps.len(),
                bits_transmitted: t.transcript.bits_transmitted(),
            })
            .collect();
        let report = RunReport {
            schema: REPORT_SCHEMA.into(),
            scenario: config.clone(),
            passed: self.checks.iter().all(|c| c.passed),
            outcomes: self.outcomes,
            details: Value::Object(self.details.into_iter().collect()),
            statistics: self.statistics,
            checks: self.checks,
            transcripts,
        };
        (report, self.transcripts)
    }
}

fn transcript_file(scenario: &str, label: &str) -> String {
    let clean = |s: &str| -> String {
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect()
    };
    format!("{}.{}.jsonl", clean(scenario), clean(label))
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    Ok(run_scenario_with_transcripts(config)?.0)
}

/// Like [`run_scenario`], also returning the transcripts the report refers to.
pub fn run_scenario_with_transcripts(config: &ScenarioConfig) -> Result<(RunReport, Vec<LabeledTranscript>)> {
    config.validate()?;
    let seed = config.seed.unwrap_or(0);
    let trials = config.trials;
    let mut b = Builder::default();
    match &config.params {
        ScenarioParams::CnotEquivalence(_) => cnot_equivalence(&mut b, seed, trials)?,
        ScenarioParams::ChoiceOfChannel(p) => choice_of_channel(&mut b, p, seed, trials)?,
        ScenarioParams::ChooseNeuron(p) => choose_neuron(&mut b, p, seed, trials)?,
        ScenarioParams::PhaseLock(p) => phase_lock(&mut b, p, seed, trials),
        ScenarioParams::EvolveCouplings(p) => evolve(&mut b, p, seed, trials)?,
        ScenarioParams::Ladder(p) => ladder(&mut b, p)?,
        ScenarioParams::MadicGrid(p) => madic_grid(&mut b, p)?,
        ScenarioParams::Capacity(p) => capacity_worksheet(&mut b, p)?,
    }
    Ok(b.finish(config))
}

fn bits_label(bits: &[usize]) -> String {
    bits.iter().map(|b| b.to_string()).collect()
}

fn cnot_equivalence(b: &mut Builder, seed: u64, trials: u64) -> Result<()> {
    let mut rng = rng::stream(seed, 0);
    let mut matches = 0;
    let mut rows = Vec::new();
    let mut two_bits = true;
    for (c, t) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
        let (control, target, mut channels) = protocol::cnot_pair(c, t);
        let run = protocol::run_cnot_protocol(&control, &target, &mut channels, MutationPolicy::ControlledNot, &mut rng)?;
        let classical = [run.control.eigenstate(), run.target.eigenstate()];
        let oracle = protocol::quantum_cnot_oracle(&QuantumRegister::from_bits(&[c, t])?)?;
        let (measured, _) = qstate::measure(&oracle, &[0, 1], &mut rng)?;
        let measured: Vec<usize> = measured.into_iter().map(usize::from).collect();
        let classical: Vec<usize> = classical.into_iter().map(|b| b.unwrap_or(usize::MAX)).collect();
        let input = bits_label(&[c.into(), t.into()]);
        if classical == measured {
            matches += 1;
        }
        two_bits &= run.transcript.bits_transmitted() == 2;
        b.outcome(format!("{input}->{}", bits_label(&classical)));
        rows.push(serde_json::json!({
            "input": input,
            "protocol": bits_label(&classical),
            "oracle": bits_label(&measured),
        }));
        b.transcripts.push(LabeledTranscript {
            label: format!("truth-{input}"),
            transcript: run.transcript,
        });
    }
    b.detail("truth_table", rows);
    b.stat(Statistic::point("truth_table_matches", f64::from(matches)));
    b.check("truth_table", matches == 4, format!("{matches}/4 rows match the quantum oracle"));
    b.check("two_bits_per_run", two_bits, "each run moves exactly 2 classical bits");

    let mut rng = rng::stream(seed, 1);
    let mut failures = 0u64;
    let mut first_failure = None;
    for i in 0..trials {
        let c: u8 = rng.gen_range(0..2);
        let t: u8 = rng.gen_range(0..2);
        let policy = match rng.gen_range(0..3) {
            0 => MutationPolicy::ControlledNot,
            1 => MutationPolicy::Forced(false),
            _ => MutationPolicy::Forced(true),
        };
        let (control, target, mut channels) = protocol::cnot_pair(c, t);
        let run = protocol::run_cnot_protocol(&control, &target, &mut channels, policy, &mut rng)?;
        let ok = replays_cleanly(&run.transcript, [&control, &target], [&run.control, &run.target]);
        if let Err(msg) = ok {
            failures += 1;
            first_failure.get_or_insert(format!("trial {i}: {msg}"));
        }
    }
    b.stat(Statistic::point("reversibility_trials", trials as f64));
    b.stat(Statistic::point("reversibility_failures", failures as f64));
    b.check(
        "reversibility",
        failures == 0,
        first_failure.unwrap_or_else(|| {
            format!("{trials} transcripts replay backward to the initial registers within {:e}", protocol::REPLAY_TOLERANCE)
        }),
    );
    Ok(())
}

fn node_map(nodes: [&NeuronNode; 2]) -> NodeMap {
    nodes.into_iter().map(|n| (n.id.clone(), n.clone())).collect()
}

/// Replays `transcript` backward from `finals` and forward from `initials`,
/// comparing registers at each end.
fn replays_cleanly(
    transcript: &Transcript,
    initials: [&NeuronNode; 2],
    finals: [&NeuronNode; 2],
) -> std::result::Result<(), String> {
    let tol = protocol::REPLAY_TOLERANCE;
    let mut back = node_map(finals);
    transcript.replay_backward(&mut back).map_err(|e| e.to_string())?;
    for n in initials {
        if !back[&n.id].register.approx_eq(&n.register, tol) {
            return Err(format!("backward replay of {} differs", n.id));
        }
    }
    let mut fwd = node_map(initials);
    transcript.replay_forward(&mut fwd).map_err(|e| e.to_string())?;
    for n in finals {
        if !fwd[&n.id].register.approx_eq(&n.register, tol) {
            return Err(format!("forward replay of {} differs", n.id));
        }
    }
    Ok(())
}

fn choice_of_channel(b: &mut Builder, p: &ChoiceOfChannelParams, seed: u64, trials: u64) -> Result<()> {
    let mut rng = rng::stream(seed, 0);
    let (mut inconsistent, mut latch_violations, mut failures, mut cnot_runs) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..trials {
        let c = p.control_bit.unwrap_or_else(|| rng.gen_range(0..2));
        let t = p.target_bit.unwrap_or_else(|| rng.gen_range(0..2));
        let (control, target, mut channels) = protocol::cnot_pair(c, t);
        // The mutated target reads out the other symbol: b' from b, b from b'.
        let expected = protocol::channel_name("a", if t == 1 { "b'" } else { "b" });
        let out = selection::choice_of_channel(&control, &target, &mut channels, &mut rng)?;
        if !out.feedback.is_consistent() {
            inconsistent += 1;
        }
        if out.is_selection_failure() {
            failures += 1;
        }
        if out.cnot_consistent {
            cnot_runs += 1;
        }
        if c == 1 && out.target_mutated && (out.latched() != Some(&expected) || !out.cnot_consistent) {
            latch_violations += 1;
        }
        let latched = out.latched().map_or_else(|| "none".to_owned(), |c| c.to_string());
        let mutated = if out.target_mutated { "mutated" } else { "kept" };
        b.outcome(format!("c={c} t={t} {mutated} latch={latched}"));
        if i == 0 {
            b.transcripts.push(LabeledTranscript {
                label: "trial-0".into(),
                transcript: out.transcript,
            });
        }
    }
    let n = trials as f64;
    b.stat(Statistic::point("selection_failure_rate", failures as f64 / n));
    b.stat(Statistic::point("cnot_consistent_rate", cnot_runs as f64 / n));
    b.check(
        "single_latch",
        inconsistent == 0,
        format!("{inconsistent} runs admitted more than one channel or latched an unadmitted one"),
    );
    b.check(
        "cnot_latch",
        latch_violations == 0,
        format!("{latch_violations} control=1 mutate runs missed [a<->NOT(target)] or broke the cNOT table"),
    );
    Ok(())
}

fn choose_neuron(b: &mut Builder, p: &ChooseNeuronParams, seed: u64, trials: u64) -> Result<()> {
    let mut rng = rng::stream(seed, 0);
    let control = NeuronNode::single_qubit("control", Role::Control, "a", 1);
    let targets: Vec<NeuronNode> = (0..p.targets)
        .map(|i| NeuronNode::single_qubit(format!("t{i:03}"), Role::Target, &format!("b{i}"), 0))
        .collect();
    let mut coupled = 0u64;
    for _ in 0..trials {
        let out = selection::choose_neuron(&control, &targets, &mut rng)?;
        match out.coupled {
            Some(c) => {
                coupled += 1;
                b.outcome(c.target.to_string());
            }
            None => b.outcome("none"),
        }
    }
    let n = trials as f64;
    let expected = selection::mutation_probability(p.targets)?;
    let sigma = (expected * (1.0 - expected) / n).sqrt();
    let (lower, upper) = (expected - p.sigmas * sigma, expected + p.sigmas * sigma);
    let rate = coupled as f64 / n;
    b.stat(Statistic {
        name: "coupling_rate".into(),
        value: rate,
        lower: Some(lower),
        upper: Some(upper),
    });
    b.stat(Statistic::point("expected_rate", expected));
    b.stat(Statistic::point("sigma", sigma));
    b.check(
        "coupling_rate",
        (lower..=upper).contains(&rate),
        format!("rate {rate} vs 1 - 0.5^{} = {expected}, band [{lower}, {upper}]", p.targets),
    );
    Ok(())
}

/// Tick on which the drifting control first meets a target, and which one.
fn predicted_lock(control: &QuantumOscillator, targets: &[QuantumOscillator]) -> Option<(u32, usize)> {
    targets
        .iter()
        .enumerate()
        .filter(|(_, t)| t.period == control.period)
        .map(|(i, t)| ((t.phase + t.period - control.phase) % t.period, i))
        .min()
}

fn phase_lock(b: &mut Builder, p: &PhaseLockParams, seed: u64, trials: u64) {
    let mut rng = rng::stream(seed, 0);
    let (mut unstable, mut mispredicted) = (0u64, 0u64);
    let mut lock_ticks = 0u64;
    let mut locks = 0u64;
    for _ in 0..trials {
        let outcome = selection::induced_fit_phase_lock(&p.controls, &p.targets, &mut rng);
        match &outcome {
            PhaseLockOutcome::Locked(lock) => {
                locks += 1;
                lock_ticks += u64::from(lock.lock_tick);
                if !lock.is_stable() {
                    unstable += 1;
                }
                if predicted_lock(&p.controls[lock.control_choice], &p.targets)
                    != Some((lock.lock_tick, lock.target_index))
                {
                    mispredicted += 1;
                }
                b.outcome(format!(
                    "control {} -> target {} at tick {}",
                    lock.control_choice, lock.target_index, lock.lock_tick
                ));
            }
            PhaseLockOutcome::NoLock { control_choice, .. } => {
                if control_choice.and_then(|c| predicted_lock(&p.controls[c], &p.targets)).is_some() {
                    mispredicted += 1;
                }
                b.outcome(format!("control {} -> no lock", control_choice.map_or(-1, |c| c as i64)));
            }
        }
    }
    b.stat(Statistic::point("lock_rate", locks as f64 / trials as f64));
    if locks > 0 {
        b.stat(Statistic::point("mean_lock_tick", lock_ticks as f64 / locks as f64));
    }
    b.check("lock_stable", unstable == 0, format!("{unstable} locks drifted within three periods"));
    b.check(
        "lock_predicted",
        mispredicted == 0,
        format!("{mispredicted} trials disagree with the phase-drift prediction"),
    );
}

/// Survivor indices for noiseless selection, by direct phase arithmetic.
fn predicted_survivors(p: &EvolveCouplingsParams) -> Vec<usize> {
    let osc = |id: &NodeId| p.oscillators.iter().find(|o| &o.node == id).expect("validated");
    p.candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            let (a, t) = (osc(&c.control), osc(&c.target));
            let mut fitness = 0i64;
            for s in 0..u64::from(p.steps) {
                let pa = (u64::from(a.phase) + s) % u64::from(a.period);
                let pt = (u64::from(t.phase) + s) % u64::from(t.period);
                fitness += if a.period == t.period && pa == pt { 1 } else { -1 };
                if fitness <= -p.extinction_threshold {
                    return false;
                }
            }
            true
        })
        .map(|(i, _)| i)
        .collect()
}

fn evolve(b: &mut Builder, p: &EvolveCouplingsParams, seed: u64, trials: u64) -> Result<()> {
    let oscillators: BTreeMap<NodeId, QuantumOscillator> =
        p.oscillators.iter().map(|o| (o.node.clone(), o.clone())).collect();
    let candidates: Vec<CouplingCandidate> = p
        .candidates
        .iter()
        .map(|c| CouplingCandidate::new(c.control.clone(), c.target.clone(), c.channel.clone()))
        .collect();
    let params = EvolutionParams {
        steps: p.steps,
        extinction_threshold: p.extinction_threshold,
        noise: p.noise,
    };
    let predicted = predicted_survivors(p);
    let mut rng = rng::stream(seed, 0);
    let (mut non_monotone, mut mispredicted) = (0u64, 0u64);
    let mut survival = vec![0u64; candidates.len()];
    for trial in 0..trials {
        let report = selection::evolve_couplings(&oscillators, &candidates, params, &mut rng)?;
        let monotone = report
            .alive_ledger
            .windows(2)
            .all(|w| w[1].iter().all(|i| w[0].contains(i)));
        if !monotone {
            non_monotone += 1;
        }
        if p.noise == 0.0 && report.survivors != predicted {
            mispredicted += 1;
        }
        for &i in &report.survivors {
            survival[i] += 1;
        }
        let label: Vec<String> = report.survivors.iter().map(|&i| candidates[i].channel.to_string()).collect();
        b.outcome(format!("survivors [{}]", label.join(", ")));
        if trial == 0 {
            b.detail("first_trial", &report);
        }
    }
    for (c, n) in candidates.iter().zip(&survival) {
        b.stat(Statistic::point(
            &format!("survival_rate {}->{} {}", c.control, c.target, c.channel),
            *n as f64 / trials as f64,
        ));
    }
    b.check(
        "extinction_monotone",
        non_monotone == 0,
        format!("{non_monotone} runs revived an extinct coupling"),
    );
    if p.noise == 0.0 {
        b.check(
            "survivors_predicted",
            mispredicted == 0,
            format!("expected survivors {predicted:?}; {mispredicted} trials differ"),
        );
    }
    Ok(())
}

fn ladder(b: &mut Builder, p: &LadderParams) -> Result<()> {
    let net = memnet::build_ladder(p.rungs, &p.skips, p.closed)?;
    let period = memnet::measure_periodicity(&net)?;
    b.outcome(format!("period {period}"));
    b.stat(Statistic::point("period", period as f64));
    let ticks = 2 * period + 1;
    let raster: Vec<Vec<String>> = memnet::propagate(&net, ticks)
        .iter()
        .map(|tracks| {
            tracks
                .iter()
                .map(|rungs| rungs.iter().map(|&on| if on { '#' } else { '.' }).collect())
                .collect()
        })
        .collect();
    b.detail("raster", raster);
    if !p.closed {
        let lcm = p.skips.iter().fold(1usize, |acc, &k| acc.lcm(&k));
        b.check("period_is_lcm", period == lcm, format!("measured {period}, lcm of skips {lcm}"));
    }
    if let Some(expected) = p.expected_period {
        b.check("expected_period", period == expected, format!("measured {period}, expected {expected}"));
    }
    if p.skips.len() >= 2 && !p.closed {
        let same = memnet::history_independence_check(p.rungs, &p.skips)?;
        b.check("history_independence", same, "every insertion order of the skips gives one period");
    }
    Ok(())
}

fn madic_grid(b: &mut Builder, p: &MadicGridParams) -> Result<()> {
    let string = memnet::LoopString::madic(p.base, p.knots, 1)?;
    b.detail("loop_string", &string);
    if let Some(expected) = &p.expected_knots {
        b.check(
            "knot_positions",
            &string.knot_neurons == expected,
            format!("computed {:?}, expected {expected:?}", string.knot_neurons),
        );
    }
    let geometric = (0..p.knots as u32).all(|i| {
        let sum: u128 = (0..=i).map(|j| u128::from(p.base).pow(j)).sum();
        u128::from(string.knot_neurons[i as usize]) == sum
    });
    b.check("knots_are_geometric_sums", geometric, format!("knots in base {}", p.base));

    if let Some(grid) = &p.grid {
        let mut recalls = BTreeMap::new();
        for case in &p.recall {
            let active = memnet::resonance_recall(grid, &case.stimulate)?;
            b.outcome(format!("recall {} -> {}", case.stimulate, active.len()));
            if let Some(expect) = &case.expect {
                let expect: std::collections::BTreeSet<String> = expect.iter().cloned().collect();
                b.check(
                    &format!("recall_{}", case.stimulate),
                    active == expect,
                    format!("recalled {active:?}"),
                );
            }
            let mut closed = true;
            for member in &active {
                closed &= memnet::resonance_recall(grid, member)? == active;
            }
            b.check(
                &format!("recall_closure_{}", case.stimulate),
                closed,
                "every recalled loop recalls the same set",
            );
            recalls.insert(case.stimulate.clone(), active);
        }
        b.detail("recall", recalls);
    }

    if !p.feeders.is_empty() {
        let fires = memnet::knot_fire_ticks(&p.feeders, p.ticks)?;
        let lcm = p.feeders.iter().fold(1u64, |acc, f| acc.lcm(&f.period));
        let spaced = fires.windows(2).all(|w| w[1] - w[0] == lcm);
        b.stat(Statistic::point("knot_fires", fires.len() as f64));
        b.detail("knot_fire_ticks", &fires);
        b.check("knot_period_is_lcm", spaced, format!("fires {fires:?}, lcm of feeder periods {lcm}"));
    }
    Ok(())
}

fn capacity_worksheet(b: &mut Builder, p: &CapacityParams) -> Result<()> {
    let sheet: Worksheet = capacity::worksheet(&p.worksheet)?;
    // Exact rows are integer arithmetic or exact decimal reciprocals.
    const EXACT: f64 = 1e-12;
    for row in &sheet.rows {
        b.stat(Statistic::point(&row.quantity, row.value));
        if let Some(dev) = row.deviation {
            let rounded = row.quantity.starts_with("threshold_");
            let tol = if rounded { p.tolerance } else { EXACT };
            b.check(
                &format!("reference_{}", row.quantity),
                dev <= tol,
                format!("{} {} vs {:e}, deviation {:.4}%", row.value, row.unit, row.reference.unwrap_or(0.0), dev * 100.0),
            );
        }
    }
    let d = &p.worksheet.decoherence;
    let kt = CODATA.boltzmann * d.temperature;
    let n = f64::from(d.charges_for_opening);
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let t = &sheet.threshold;
    let consistent = rel(t.voltage, kt / (n * CODATA.elementary_charge)) < 1e-12
        && rel(t.energy, kt / n) < 1e-12
        && rel(t.frequency, kt / (n * CODATA.planck)) < 1e-12;
    b.check("threshold_formulas", consistent, "U = kT/ne, E = kT/n, nu = kT/nh");
    b.detail("worksheet", &sheet);
    b.outcome("worksheet");
    Ok(())
}

pub fn emit_report(report: &RunReport, path: &Path) -> Result<()> {
    write_json(report, path)
}

pub fn load_report(path: &Path) -> Result<RunReport> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| config_err(path.display().to_string(), e.to_string()))
}

fn write_json(value: &impl Serialize, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize to JSON");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Writes each transcript as line-oriented JSON into `dir`, under the file
/// name its report refers to.
pub fn write_transcripts(report: &RunReport, transcripts: &[LabeledTranscript], dir: &Path) -> Result<()> {
    for (r, t) in report.transcripts.iter().zip(transcripts) {
        let path = dir.join(&r.file);
        fs::write(&path, t.transcript.to_jsonl()).map_err(io_err(&path))?;
    }
    Ok(())
}

type ScenarioRun = (RunReport, Vec<LabeledTranscript>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyEntry {
    pub file: String,
    pub name: Option<String>,
    pub passed: bool,
    pub failed_checks: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub passed: bool,
    pub entries: Vec<VerifyEntry>,
    pub reports: Vec<RunReport>,
}

/// Scenario files in `dir` (`*.toml` and `*.json`), sorted by file name.
pub fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "toml" || e == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs every scenario in `dir`. Scenarios run in parallel; entries and
/// reports are ordered by scenario name, then file name.
pub fn verify_dir(dir: &Path, overrides: Overrides) -> Result<(VerifyReport, Vec<Vec<LabeledTranscript>>)> {
    let files = scenario_files(dir)?;
    let mut results: Vec<(VerifyEntry, Option<ScenarioRun>)> = files
        .par_iter()
        .map(|path| {
            let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
            let run = ScenarioConfig::load(path).and_then(|mut config| {
                config.apply(overrides);
                run_scenario_with_transcripts(&config)
            });
            match run {
                Ok((report, transcripts)) => {
                    let entry = VerifyEntry {
                        file,
                        name: Some(report.scenario.name.clone()),
                        passed: report.passed,
                        failed_checks: report.failed_checks().map(|c| c.name.clone()).collect(),
                        error: None,
                    };
                    (entry, Some((report, transcripts)))
                }
                Err(e) => (
                    VerifyEntry {
                        file,
                        name: None,
                        passed: false,
                        failed_checks: Vec::new(),
                        error: Some(e.to_string()),
                    },
                    None,
                ),
            }
        })
        .collect();
    results.sort_by(|a, b| (&a.0.name, &a.0.file).cmp(&(&b.0.name, &b.0.file)));
    let passed = results.iter().all(|(e, _)| e.passed);
    let mut entries = Vec::with_capacity(results.len());
    let mut reports = Vec::new();
    let mut transcripts = Vec::new();
    for (entry, run) in results {
        entries.push(entry);
        if let Some((r, t)) = run {
            reports.push(r);
            transcripts.push(t);
        }
    }
    Ok((
        VerifyReport {
            schema: VERIFY_SCHEMA.into(),
            passed,
            entries,
            reports,
        },
        transcripts,
    ))
}

pub fn emit_verify_report(report: &VerifyReport, path: &Path) -> Result<()> {
    write_json(report, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        ScenarioConfig::from_toml(text)
    }

    #[test]
    fn ladder_config_round_trips_through_json() {
        let c = parse("name = \"l\"\nkind = \"Ladder\"\n[params]\nrungs = 12\nskips = [3, 2]\n").unwrap();
        assert_eq!(c.trials, 1);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(ScenarioConfig::from_json(&json).unwrap(), c);
    }

    #[test]
    fn errors_carry_field_paths() {
        let path_of = |text: &str| match parse(text) {
            Err(RunnerError::Config { path, .. }) => path,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(path_of("name = \"x\"\nkind = \"Teleport\"\n"), "kind");
        assert_eq!(path_of("name = \"x\"\nkind = \"ChooseNeuron\"\n[params]\ntargets = 2\n"), "seed");
        assert_eq!(
            path_of("name = \"x\"\nkind = \"ChooseNeuron\"\nseed = 1\ntrials = 0\n[params]\ntargets = 2\n"),
            "trials"
        );
        assert_eq!(
            path_of("name = \"x\"\nkind = \"Ladder\"\n[params]\nrungs = 12\nskips = [3, \"two\"]\n"),
            "params.skips[1]"
        );
        assert_eq!(path_of("name = \"x\"\nkind = \"Ladder\"\n[params]\nrungs = 4\nskips = [3]\n"), "params.skips");
        assert_eq!(
            path_of("name = \"x\"\nkind = \"Ladder\"\n[params]\nrungs = 12\nbogus = 1\n"),
            "params.bogus"
        );
    }

    #[test]
    fn cnot_scenario_matches_all_rows() {
        let c = ScenarioConfig::new("cnot", Some(3), 50, ScenarioParams::CnotEquivalence(CnotEquivalenceParams {}));
        let (r, t) = run_scenario_with_transcripts(&c).unwrap();
        assert!(r.passed, "{:?}", r.checks);
        assert_eq!(t.len(), 4);
        assert_eq!(r.transcripts[3].file, "cnot.truth-11.jsonl");
        assert_eq!(r.outcomes["11->10"], 1);
    }

    #[test]
    fn reports_are_deterministic() {
        let c = ScenarioConfig::new(
            "choice",
            Some(8),
            200,
            ScenarioParams::ChoiceOfChannel(ChoiceOfChannelParams::default()),
        );
        let a = serde_json::to_string(&run_scenario(&c).unwrap()).unwrap();
        let b = serde_json::to_string(&run_scenario(&c).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lock_prediction_matches_drift() {
        let c = QuantumOscillator::new("1", 0, 1, 4, 0).unwrap();
        let t = [
            QuantumOscillator::new("2", 0, 1, 4, 3).unwrap(),
            QuantumOscillator::new("2'", 0, 2, 4, 1).unwrap(),
            QuantumOscillator::new("2''", 0, 3, 5, 0).unwrap(),
        ];
        assert_eq!(predicted_lock(&c, &t), Some((1, 1)));
        assert_eq!(predicted_lock(&c, &t[2..]), None);
    }

    #[test]
    fn failing_expectation_fails_report() {
        let c = parse("name = \"l\"\nkind = \"Ladder\"\n[params]\nrungs = 12\nskips = [3, 2]\nexpected_period = 5\n")
            .unwrap();
        let r = run_scenario(&c).unwrap();
        assert!(!r.passed);
        assert_eq!(r.failed_checks().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["expected_period"]);
    }
}
