//! Neuron nodes holding a qubit register, coupled only by classical channels.
//!
//! A node maps the orthogonal eigenstates of its register to classical
//! pointer symbols (`a`, `a'`, …). The translator reads a register out into
//! a symbol and resets it from one; converters carry a symbol over a
//! classical channel to the paired symbol on another node. Composing these
//! steps reproduces a controlled-NOT between two nodes without any quantum
//! channel between them.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qstate::{self, Gate, QStateError, QuantumRegister};

/// Probability mass tolerated outside the pointer basis before the
/// translator refuses to act.
pub const DOMAIN_TOLERANCE: f64 = 1e-12;
/// Tolerance used when comparing replayed registers.
pub const REPLAY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("node {node}: register has support outside the pointer basis; readout and reset act on orthogonal pointer states only")]
    TranslatorDomain { node: NodeId },
    #[error("node {node}: unknown pointer symbol {symbol:?}")]
    UnknownSymbol { node: NodeId, symbol: String },
    #[error("channel {channel}: symbol {symbol:?} matches neither endpoint")]
    Routing { channel: ChannelId, symbol: String },
    #[error("configuration: {0}")]
    Configuration(String),
    #[error("invalid pointer table: {0}")]
    PointerTable(String),
    #[error("node {node}: register is not in a pointer eigenstate")]
    NotEigenstate { node: NodeId },
    #[error("argument: {0}")]
    Argument(String),
    #[error("replay: {0}")]
    Replay(String),
    #[error(transparent)]
    QState(#[from] QStateError),
    #[error("transcript i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("transcript line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, ProtocolError>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChannelId(pub String);

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ChannelId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for ChannelId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

/// A classical symbol mirroring one orthogonal eigenstate of a register.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointerState {
    pub symbol: String,
    pub eigenstate_index: usize,
}

/// Bijection between pointer symbols and register eigenstates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointerTable(Vec<PointerState>);

impl PointerTable {
    pub fn new(entries: Vec<PointerState>) -> Result<Self> {
        if entries.is_empty() {
            return Err(ProtocolError::PointerTable("empty table".into()));
        }
        for (i, e) in entries.iter().enumerate() {
            for prev in &entries[..i] {
                if prev.symbol == e.symbol {
                    return Err(ProtocolError::PointerTable(format!(
                        "symbol {:?} listed twice",
                        e.symbol
                    )));
                }
                if prev.eigenstate_index == e.eigenstate_index {
                    return Err(ProtocolError::PointerTable(format!(
                        "eigenstate {} mapped twice",
                        e.eigenstate_index
                    )));
                }
            }
        }
        Ok(Self(entries))
    }

    /// `{x ↦ 1, x' ↦ 0}`: the unprimed symbol is the unmutated state 1.
    pub fn binary(base: &str) -> Self {
        Self(vec![
            PointerState {
                symbol: base.to_owned(),
                eigenstate_index: 1,
            },
            PointerState {
                symbol: format!("{base}'"),
                eigenstate_index: 0,
            },
        ])
    }

    pub fn entries(&self) -> &[PointerState] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.0
            .iter()
            .find(|p| p.symbol == symbol)
            .map(|p| p.eigenstate_index)
    }

    pub fn symbol_of(&self, index: usize) -> Option<&str> {
        self.0
            .iter()
            .find(|p| p.eigenstate_index == index)
            .map(|p| p.symbol.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Control,
    Target,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeuronNode {
    pub id: NodeId,
    pub register: QuantumRegister,
    pub pointer_table: PointerTable,
    pub role: Role,
    pub channels: Vec<ChannelId>,
    mutate_qubit: usize,
}

impl NeuronNode {
    pub fn new(
        id: impl Into<NodeId>,
        role: Role,
        register: QuantumRegister,
        pointer_table: PointerTable,
    ) -> Result<Self> {
        let dim = register.dimension();
        if let Some(p) = pointer_table
            .entries()
            .iter()
            .find(|p| p.eigenstate_index >= dim)
        {
            return Err(ProtocolError::PointerTable(format!(
                "eigenstate {} exceeds register dimension {dim}",
                p.eigenstate_index
            )));
        }
        // Least significant qubit: flips eigenstates 1 and 0 of the default table.
        let mutate_qubit = register.qubit_count() - 1;
        Ok(Self {
            id: id.into(),
            register,
            pointer_table,
            role,
            channels: Vec::new(),
            mutate_qubit,
        })
    }

    /// One-qubit node in basis state `bit` with the table `{base ↦ 1, base' ↦ 0}`.
    pub fn single_qubit(id: impl Into<NodeId>, role: Role, base: &str, bit: u8) -> Self {
        let register = QuantumRegister::basis(1, usize::from(bit != 0)).expect("one qubit");
        Self::new(id, role, register, PointerTable::binary(base)).expect("binary table fits")
    }

    /// The qubit flipped by [`mutate`].
    pub fn mutate_qubit(&self) -> usize {
        self.mutate_qubit
    }

    pub fn with_mutate_qubit(mut self, qubit: usize) -> Result<Self> {
        if qubit >= self.register.qubit_count() {
            return Err(ProtocolError::Argument(format!(
                "mutate qubit {qubit} outside register"
            )));
        }
        self.mutate_qubit = qubit;
        Ok(self)
    }

    /// Pointer symbol of the current register, if it is a pointer eigenstate.
    pub fn pointer_symbol(&self) -> Option<&str> {
        let index = self.register.basis_index(REPLAY_TOLERANCE)?;
        self.pointer_table.symbol_of(index)
    }

    /// Eigenstate index when the register sits in a pointer eigenstate.
    pub fn eigenstate(&self) -> Option<usize> {
        let symbol = self.pointer_symbol()?;
        self.pointer_table.index_of(symbol)
    }
}

/// NOT on the node's mutate qubit; the pointer table is untouched.
pub fn mutate(node: &NeuronNode) -> NeuronNode {
    let mut out = node.clone();
    qstate::apply_gate_in_place(
        &mut out.register,
        &Gate::Not {
            qubit: node.mutate_qubit,
        },
    )
    .expect("mutate qubit validated at construction");
    out
}

/// Measures the register in the pointer basis and returns the observed symbol.
pub fn translate_readout<R: Rng + ?Sized>(
    node: &NeuronNode,
    rng: &mut R,
) -> Result<(String, NeuronNode)> {
    let table = node.pointer_table.entries();
    let weights: Vec<f64> = table
        .iter()
        .map(|p| node.register.probability(p.eigenstate_index))
        .collect();
    let inside: f64 = weights.iter().sum();
    if (1.0 - inside) > DOMAIN_TOLERANCE {
        return Err(ProtocolError::TranslatorDomain {
            node: node.id.clone(),
        });
    }
    let draw = rng.gen::<f64>() * inside;
    let mut acc = 0.0;
    let mut chosen = table.len() - 1;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if draw < acc {
            chosen = i;
            break;
        }
    }
    // A zero-weight tail entry can only be reached through rounding.
    if weights[chosen] == 0.0 {
        chosen = weights
            .iter()
            .rposition(|w| *w > 0.0)
            .expect("inside mass is one");
    }
    let entry = &table[chosen];
    let mut out = node.clone();
    let amp = node.register.amplitudes()[entry.eigenstate_index];
    let mut amplitudes = vec![num_complex::Complex64::new(0.0, 0.0); node.register.dimension()];
    amplitudes[entry.eigenstate_index] = amp / amp.norm();
    out.register = QuantumRegister::from_amplitudes(node.register.qubit_count(), amplitudes)?;
    Ok((entry.symbol.clone(), out))
}

/// Sets the register to the eigenstate mirrored by `symbol`.
pub fn reset_state(node: &NeuronNode, symbol: &str) -> Result<NeuronNode> {
    let index = node
        .pointer_table
        .index_of(symbol)
        .ok_or_else(|| ProtocolError::UnknownSymbol {
            node: node.id.clone(),
            symbol: symbol.to_owned(),
        })?;
    let mut out = node.clone();
    out.register = QuantumRegister::basis(node.register.qubit_count(), index)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endpoint {
    pub node: NodeId,
    pub symbol: String,
}

/// One classical wire pairing a pointer symbol on each of two nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalChannel {
    pub id: ChannelId,
    pub endpoint_a: Endpoint,
    pub endpoint_b: Endpoint,
    /// Set while a bit is in flight during the current step.
    pub payload: Option<u8>,
}

impl ClassicalChannel {
    /// Channel `[sym_a <-> sym_b]`, named after its two symbols.
    pub fn between(node_a: &NeuronNode, sym_a: &str, node_b: &NeuronNode, sym_b: &str) -> Result<Self> {
        for (node, sym) in [(node_a, sym_a), (node_b, sym_b)] {
            if node.pointer_table.index_of(sym).is_none() {
                return Err(ProtocolError::UnknownSymbol {
                    node: node.id.clone(),
                    symbol: sym.to_owned(),
                });
            }
        }
        if node_a.id == node_b.id {
            return Err(ProtocolError::Configuration(
                "channel endpoints must be on different nodes".into(),
            ));
        }
        Ok(Self {
            id: channel_name(sym_a, sym_b),
            endpoint_a: Endpoint {
                node: node_a.id.clone(),
                symbol: sym_a.to_owned(),
            },
            endpoint_b: Endpoint {
                node: node_b.id.clone(),
                symbol: sym_b.to_owned(),
            },
            payload: None,
        })
    }

    pub fn connects(&self, a: &Endpoint, b: &Endpoint) -> bool {
        (&self.endpoint_a == a && &self.endpoint_b == b)
            || (&self.endpoint_a == b && &self.endpoint_b == a)
    }
}

pub fn channel_name(sym_a: &str, sym_b: &str) -> ChannelId {
    ChannelId(format!("{sym_a}<->{sym_b}"))
}

/// Carries `symbol` from its endpoint to the far one; exactly one bit moves.
pub fn convert(channel: &mut ClassicalChannel, symbol: &str) -> Result<Endpoint> {
    let at_a = channel.endpoint_a.symbol == symbol;
    let at_b = channel.endpoint_b.symbol == symbol;
    let far = match (at_a, at_b) {
        (true, false) => channel.endpoint_b.clone(),
        (false, true) => channel.endpoint_a.clone(),
        _ => {
            return Err(ProtocolError::Routing {
                channel: channel.id.clone(),
                symbol: symbol.to_owned(),
            })
        }
    };
    channel.payload = Some(1);
    Ok(far)
}

/// The channels wired between a set of nodes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChannelSet {
    channels: BTreeMap<ChannelId, ClassicalChannel>,
}

impl ChannelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, channel: ClassicalChannel) {
        self.channels.insert(channel.id.clone(), channel);
    }

    pub fn remove(&mut self, id: &ChannelId) -> Option<ClassicalChannel> {
        self.channels.remove(id)
    }

    pub fn get(&self, id: &ChannelId) -> Option<&ClassicalChannel> {
        self.channels.get(id)
    }

    pub fn get_mut(&mut self, id: &ChannelId) -> Option<&mut ClassicalChannel> {
        self.channels.get_mut(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ClassicalChannel> {
        self.channels.values()
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Channel joining the two endpoints, in either orientation.
    pub fn find_mut(&mut self, a: &Endpoint, b: &Endpoint) -> Option<&mut ClassicalChannel> {
        self.channels.values_mut().find(|c| c.connects(a, b))
    }

    pub fn clear_payloads(&mut self) {
        for c in self.channels.values_mut() {
            c.payload = None;
        }
    }
}

/// Wires every symbol of `left` to every symbol of `right`: for binary
/// tables these are the four conversions `[a↔b]`, `[a′↔b′]`, `[a↔b′]`, `[a′↔b]`.
pub fn wire_all(left: &mut NeuronNode, right: &mut NeuronNode) -> Result<ChannelSet> {
    let mut set = ChannelSet::new();
    let left_symbols: Vec<String> = left.pointer_table.entries().iter().map(|p| p.symbol.clone()).collect();
    let right_symbols: Vec<String> = right.pointer_table.entries().iter().map(|p| p.symbol.clone()).collect();
    for ls in &left_symbols {
        for rs in &right_symbols {
            let ch = ClassicalChannel::between(left, ls, right, rs)?;
            left.channels.push(ch.id.clone());
            right.channels.push(ch.id.clone());
            set.insert(ch);
        }
    }
    Ok(set)
}

/// One recorded protocol step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Step {
    Mutate {
        node: NodeId,
    },
    Translate {
        node: NodeId,
        symbol: String,
    },
    Convert {
        channel: ChannelId,
        sent: String,
        delivered: String,
        to: NodeId,
        bit: u8,
    },
    Reset {
        node: NodeId,
        symbol: String,
        prior: String,
    },
    AndGate {
        node: NodeId,
        local: String,
        incoming: String,
        channel: ChannelId,
        admitted: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Mutate,
    Translate,
    Convert,
    Reset,
    AndGate,
}

impl Step {
    pub fn kind(&self) -> StepKind {
        match self {
            Step::Mutate { .. } => StepKind::Mutate,
            Step::Translate { .. } => StepKind::Translate,
            Step::Convert { .. } => StepKind::Convert,
            Step::Reset { .. } => StepKind::Reset,
            Step::AndGate { .. } => StepKind::AndGate,
        }
    }
}

/// Classical record of a run: pointer symbols before and after, and every
/// step in order. Registers are only ever captured as pointer eigenstates.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub initial: BTreeMap<NodeId, String>,
    pub steps: Vec<Step>,
    #[serde(rename = "final")]
    pub final_state: BTreeMap<NodeId, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum TranscriptLine {
    Start { node: NodeId, symbol: String },
    Step(Step),
    End { node: NodeId, symbol: String },
}

pub type NodeMap = BTreeMap<NodeId, NeuronNode>;

impl Transcript {
    pub fn begin(nodes: &[&NeuronNode]) -> Result<Self> {
        let mut initial = BTreeMap::new();
        for n in nodes {
            let symbol = n.pointer_symbol().ok_or_else(|| ProtocolError::NotEigenstate {
                node: n.id.clone(),
            })?;
            initial.insert(n.id.clone(), symbol.to_owned());
        }
        Ok(Self {
            initial,
            ..Self::default()
        })
    }

    pub fn push(&mut self, step: Step) {
        self.steps.push(step);
    }

    pub fn finish(&mut self, nodes: &[&NeuronNode]) -> Result<()> {
        for n in nodes {
            let symbol = n.pointer_symbol().ok_or_else(|| ProtocolError::NotEigenstate {
                node: n.id.clone(),
            })?;
            self.final_state.insert(n.id.clone(), symbol.to_owned());
        }
        Ok(())
    }

    /// Classical bits moved over channels.
    pub fn bits_transmitted(&self) -> usize {
        self.steps
            .iter()
            .map(|s| match s {
                Step::Convert { .. } => 1,
                _ => 0,
            })
            .sum()
    }

    /// Applies the steps to `nodes`, which must hold the initial state.
    pub fn replay_forward(&self, nodes: &mut NodeMap) -> Result<()> {
        check_symbols(nodes, &self.initial, "initial")?;
        for step in &self.steps {
            apply_step(nodes, step, Direction::Forward)?;
        }
        check_symbols(nodes, &self.final_state, "final")
    }

    /// Undoes the steps in reverse order; `nodes` must hold the final state.
    pub fn replay_backward(&self, nodes: &mut NodeMap) -> Result<()> {
        check_symbols(nodes, &self.final_state, "final")?;
        for step in self.steps.iter().rev() {
            apply_step(nodes, step, Direction::Backward)?;
        }
        check_symbols(nodes, &self.initial, "initial")
    }

    /// Line-oriented JSON: start records, one line per step, end records.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        let mut line = |rec: &TranscriptLine| -> Result<()> {
            serde_json::to_writer(&mut out, rec).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
            Ok(())
        };
        for (node, symbol) in &self.initial {
            line(&TranscriptLine::Start {
                node: node.clone(),
                symbol: symbol.clone(),
            })?;
        }
        for step in &self.steps {
            line(&TranscriptLine::Step(step.clone()))?;
        }
        for (node, symbol) in &self.final_state {
            line(&TranscriptLine::End {
                node: node.clone(),
                symbol: symbol.clone(),
            })?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut t = Self::default();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: TranscriptLine =
                serde_json::from_str(&line).map_err(|source| ProtocolError::Parse { line: i + 1, source })?;
            match rec {
                TranscriptLine::Start { node, symbol } => {
                    t.initial.insert(node, symbol);
                }
                TranscriptLine::Step(step) => t.steps.push(step),
                TranscriptLine::End { node, symbol } => {
                    t.final_state.insert(node, symbol);
                }
            }
        }
        Ok(t)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Backward,
}

fn node_mut<'a>(nodes: &'a mut NodeMap, id: &NodeId) -> Result<&'a mut NeuronNode> {
    nodes
        .get_mut(id)
        .ok_or_else(|| ProtocolError::Replay(format!("unknown node {id}")))
}

fn apply_step(nodes: &mut NodeMap, step: &Step, dir: Direction) -> Result<()> {
    match step {
        Step::Mutate { node } => {
            let n = node_mut(nodes, node)?;
            *n = mutate(n);
        }
        Step::Translate { node, symbol } => {
            let n = node_mut(nodes, node)?;
            if n.pointer_symbol() != Some(symbol.as_str()) {
                return Err(ProtocolError::Replay(format!(
                    "node {node} does not read out as {symbol}"
                )));
            }
        }
        Step::Convert { .. } | Step::AndGate { .. } => {}
        Step::Reset {
            node,
            symbol,
            prior,
        } => {
            let n = node_mut(nodes, node)?;
            let (expect, target) = match dir {
                Direction::Forward => (prior, symbol),
                Direction::Backward => (symbol, prior),
            };
            if n.pointer_symbol() != Some(expect.as_str()) {
                return Err(ProtocolError::Replay(format!(
                    "node {node} is not in {expect} before reset"
                )));
            }
            *n = reset_state(n, target)?;
        }
    }
    Ok(())
}

fn check_symbols(nodes: &NodeMap, expected: &BTreeMap<NodeId, String>, label: &str) -> Result<()> {
    for (id, symbol) in expected {
        let n = nodes
            .get(id)
            .ok_or_else(|| ProtocolError::Replay(format!("unknown node {id}")))?;
        if n.pointer_symbol() != Some(symbol.as_str()) {
            return Err(ProtocolError::Replay(format!(
                "node {id} is not in its {label} state {symbol}"
            )));
        }
    }
    Ok(())
}

/// When the target mutates during a protocol run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationPolicy {
    /// Mutate iff the control reads out eigenstate 1.
    #[default]
    ControlledNot,
    /// Mutate (or not) regardless of the control.
    Forced(bool),
}

#[derive(Debug, Clone)]
pub struct CnotRun {
    pub control: NeuronNode,
    pub target: NeuronNode,
    pub transcript: Transcript,
}

/// The two-node readout/convert/mutate/convert-back/reset sequence.
///
/// 1. both nodes are read out (`s_c`, `s_t`);
/// 2. the control sends `s_c` over `[s_c ↔ s_t]`, and the target is reset
///    from the delivered symbol;
/// 3. the target mutates according to `policy`, then is read out as `s_t′`;
/// 4. the target sends `s_t′` back over `[s_c ↔ s_t′]`, and the control is
///    reset from the delivered symbol.
pub fn run_cnot_protocol<R: Rng + ?Sized>(
    control: &NeuronNode,
    target: &NeuronNode,
    channels: &mut ChannelSet,
    policy: MutationPolicy,
    rng: &mut R,
) -> Result<CnotRun> {
    let mut transcript = Transcript::begin(&[control, target])?;
    channels.clear_payloads();

    let (s_c, mut control) = translate_readout(control, rng)?;
    transcript.push(Step::Translate {
        node: control.id.clone(),
        symbol: s_c.clone(),
    });
    let (s_t, mut target) = translate_readout(target, rng)?;
    transcript.push(Step::Translate {
        node: target.id.clone(),
        symbol: s_t.clone(),
    });

    let delivered = send(channels, &control, &s_c, &target, &s_t, &mut transcript)?;
    target = reset_logged(&target, &delivered, &s_t, &mut transcript)?;

    let control_bit = control.pointer_table.index_of(&s_c).unwrap_or(0);
    let mutates = match policy {
        MutationPolicy::ControlledNot => control_bit == 1,
        MutationPolicy::Forced(m) => m,
    };
    if mutates {
        target = mutate(&target);
        transcript.push(Step::Mutate {
            node: target.id.clone(),
        });
    }
    let (s_t2, t) = translate_readout(&target, rng)?;
    target = t;
    transcript.push(Step::Translate {
        node: target.id.clone(),
        symbol: s_t2.clone(),
    });

    let delivered = send(channels, &target, &s_t2, &control, &s_c, &mut transcript)?;
    control = reset_logged(&control, &delivered, &s_c, &mut transcript)?;

    transcript.finish(&[&control, &target])?;
    Ok(CnotRun {
        control,
        target,
        transcript,
    })
}

/// Sends `sym_from` towards `to`, whose paired symbol is `sym_to`.
pub(crate) fn send(
    channels: &mut ChannelSet,
    from: &NeuronNode,
    sym_from: &str,
    to: &NeuronNode,
    sym_to: &str,
    transcript: &mut Transcript,
) -> Result<String> {
    let near = Endpoint {
        node: from.id.clone(),
        symbol: sym_from.to_owned(),
    };
    let far = Endpoint {
        node: to.id.clone(),
        symbol: sym_to.to_owned(),
    };
    let channel = channels.find_mut(&near, &far).ok_or_else(|| {
        ProtocolError::Configuration(format!(
            "no channel wired for [{sym_from} <-> {sym_to}] between {} and {}",
            from.id, to.id
        ))
    })?;
    let delivered = convert(channel, sym_from)?;
    transcript.push(Step::Convert {
        channel: channel.id.clone(),
        sent: sym_from.to_owned(),
        delivered: delivered.symbol.clone(),
        to: delivered.node.clone(),
        bit: channel.payload.unwrap_or(0),
    });
    Ok(delivered.symbol)
}

pub(crate) fn reset_logged(
    node: &NeuronNode,
    symbol: &str,
    prior: &str,
    transcript: &mut Transcript,
) -> Result<NeuronNode> {
    let out = reset_state(node, symbol)?;
    transcript.push(Step::Reset {
        node: node.id.clone(),
        symbol: symbol.to_owned(),
        prior: prior.to_owned(),
    });
    Ok(out)
}

/// Exact CNOT with qubit 0 as control; ground truth for the classical protocol.
pub fn quantum_cnot_oracle(joint: &QuantumRegister) -> Result<QuantumRegister> {
    if joint.qubit_count() != 2 {
        return Err(ProtocolError::Argument(format!(
            "oracle needs a 2-qubit register, got {}",
            joint.qubit_count()
        )));
    }
    Ok(qstate::apply_gate(joint, &Gate::Cnot { control: 0, target: 1 })?)
}

/// Control and target nodes in basis states, fully wired.
pub fn cnot_pair(control_bit: u8, target_bit: u8) -> (NeuronNode, NeuronNode, ChannelSet) {
    let mut control = NeuronNode::single_qubit("n1", Role::Control, "a", control_bit);
    let mut target = NeuronNode::single_qubit("n2", Role::Target, "b", target_bit);
    let channels = wire_all(&mut control, &mut target).expect("binary tables wire");
    (control, target, channels)
}
