//! Selection of couplings between nodes.
//!
//! Covers the AND-gate feedback loop that latches one of four live channels,
//! the multi-target "choice of channel is choice of neuron" variant with its
//! `1 − 0.5ⁿ` coupling law, induced-fit phase locking of oscillators, and
//! extinction of couplings that stay out of phase.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::{
    self, mutate, translate_readout, ChannelId, ChannelSet, Endpoint, NeuronNode, NodeId,
    ProtocolError, Step, Transcript,
};

/// Default fitness deficit at which a coupling dies.
pub const DEFAULT_EXTINCTION_THRESHOLD: i64 = 3;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("argument: {0}")]
    Argument(String),
    #[error("no oscillator registered for node {0}")]
    MissingOscillator(NodeId),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

pub type Result<T> = std::result::Result<T, SelectionError>;

/// AND-gate record on the control: its local readout against each incoming symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackLoop {
    pub control: NodeId,
    pub local: String,
    /// `(channel, incoming symbol, admitted)` in evaluation order.
    pub and_gate_inputs: Vec<(ChannelId, String, bool)>,
    pub latched_channel: Option<ChannelId>,
}

impl FeedbackLoop {
    /// At most one channel admitted, and it is the latched one.
    pub fn is_consistent(&self) -> bool {
        let admitted: Vec<&ChannelId> = self
            .and_gate_inputs
            .iter()
            .filter(|(_, _, ok)| *ok)
            .map(|(c, _, _)| c)
            .collect();
        match (&self.latched_channel, admitted.as_slice()) {
            (None, []) => true,
            (Some(l), [only]) => l == *only,
            _ => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChoiceOutcome {
    pub feedback: FeedbackLoop,
    pub target_mutated: bool,
    pub control: NeuronNode,
    pub target: NeuronNode,
    pub transcript: Transcript,
    /// Final pair equals the cNOT truth table applied to the initial pair.
    pub cnot_consistent: bool,
}

impl ChoiceOutcome {
    pub fn latched(&self) -> Option<&ChannelId> {
        self.feedback.latched_channel.as_ref()
    }

    /// No channel agreed with the local readout: the nodes stay uncoupled.
    pub fn is_selection_failure(&self) -> bool {
        self.feedback.latched_channel.is_none()
    }
}

/// Feedback-loop channel choice with a fair mutate coin for the target.
pub fn choice_of_channel<R: Rng + ?Sized>(
    control: &NeuronNode,
    target: &NeuronNode,
    channels: &mut ChannelSet,
    rng: &mut R,
) -> Result<ChoiceOutcome> {
    let mutates = rng.gen_bool(0.5);
    choice_of_channel_with(control, target, channels, mutates, rng)
}

/// [`choice_of_channel`] with the target's mutation decided by the caller.
pub fn choice_of_channel_with<R: Rng + ?Sized>(
    control: &NeuronNode,
    target: &NeuronNode,
    channels: &mut ChannelSet,
    target_mutates: bool,
    rng: &mut R,
) -> Result<ChoiceOutcome> {
    let initial_bits = (eigen_bit(control)?, eigen_bit(target)?);
    let mut transcript = Transcript::begin(&[control, target])?;
    channels.clear_payloads();

    let (local, control) = translate_readout(control, rng)?;
    transcript.push(Step::Translate {
        node: control.id.clone(),
        symbol: local.clone(),
    });
    let (s_t, target) = translate_readout(target, rng)?;
    transcript.push(Step::Translate {
        node: target.id.clone(),
        symbol: s_t.clone(),
    });
    let delivered = protocol::send(channels, &control, &local, &target, &s_t, &mut transcript)?;
    let mut target = protocol::reset_logged(&target, &delivered, &s_t, &mut transcript)?;

    if target_mutates {
        target = mutate(&target);
        transcript.push(Step::Mutate {
            node: target.id.clone(),
        });
    }
    let (out, t) = translate_readout(&target, rng)?;
    target = t;
    transcript.push(Step::Translate {
        node: target.id.clone(),
        symbol: out.clone(),
    });

    // The target's output travels back on every channel that starts at its
    // symbol; the AND gate on the control admits only the one agreeing with
    // the local readout.
    let from = Endpoint {
        node: target.id.clone(),
        symbol: out.clone(),
    };
    let return_ids: Vec<ChannelId> = channels
        .iter()
        .filter(|c| {
            (c.endpoint_a == from && c.endpoint_b.node == control.id)
                || (c.endpoint_b == from && c.endpoint_a.node == control.id)
        })
        .map(|c| c.id.clone())
        .collect();

    let mut feedback = FeedbackLoop {
        control: control.id.clone(),
        local: local.clone(),
        and_gate_inputs: Vec::new(),
        latched_channel: None,
    };
    for id in return_ids {
        let ch = channels.get_mut(&id).expect("listed above");
        let far = protocol::convert(ch, &out)?;
        transcript.push(Step::Convert {
            channel: id.clone(),
            sent: out.clone(),
            delivered: far.symbol.clone(),
            to: far.node.clone(),
            bit: ch.payload.unwrap_or(0),
        });
        let incoming = far.symbol;
        let admitted = incoming == local && feedback.latched_channel.is_none();
        transcript.push(Step::AndGate {
            node: control.id.clone(),
            local: local.clone(),
            incoming: incoming.clone(),
            channel: id.clone(),
            admitted,
        });
        if admitted {
            feedback.latched_channel = Some(id.clone());
        }
        feedback.and_gate_inputs.push((id, incoming, admitted));
    }

    let control = if feedback.latched_channel.is_some() {
        protocol::reset_logged(&control, &local, &local, &mut transcript)?
    } else {
        control
    };
    transcript.finish(&[&control, &target])?;

    let final_bits = (eigen_bit(&control)?, eigen_bit(&target)?);
    let cnot_consistent = final_bits == (initial_bits.0, initial_bits.1 ^ initial_bits.0);
    Ok(ChoiceOutcome {
        feedback,
        target_mutated: target_mutates,
        control,
        target,
        transcript,
        cnot_consistent,
    })
}

fn eigen_bit(node: &NeuronNode) -> Result<usize> {
    node.eigenstate().ok_or_else(|| {
        SelectionError::Protocol(ProtocolError::NotEigenstate {
            node: node.id.clone(),
        })
    })
}

/// Chance that at least one of `n` fair-coin targets mutates: `1 − 0.5ⁿ`.
pub fn mutation_probability(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(SelectionError::Argument(
            "number of target neurons must be at least 1".into(),
        ));
    }
    Ok(1.0 - 0.5f64.powi(n.min(i32::MAX as u32) as i32))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coupling {
    pub target: NodeId,
    pub channel: ChannelId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChooseOutcome {
    pub coupled: Option<Coupling>,
    pub mutated: Vec<NodeId>,
}

/// Broadcast from the control to every target; each flips a fair mutate
/// coin and the lowest-id mutated target couples on its return channel.
pub fn choose_neuron<R: Rng + ?Sized>(
    control: &NeuronNode,
    targets: &[NeuronNode],
    rng: &mut R,
) -> Result<ChooseOutcome> {
    let coins: Vec<bool> = targets.iter().map(|_| rng.gen_bool(0.5)).collect();
    choose_neuron_with(control, targets, &coins)
}

/// [`choose_neuron`] with explicit mutate decisions, one per target.
pub fn choose_neuron_with(
    control: &NeuronNode,
    targets: &[NeuronNode],
    mutates: &[bool],
) -> Result<ChooseOutcome> {
    if mutates.len() != targets.len() {
        return Err(SelectionError::Argument(format!(
            "{} mutate decisions for {} targets",
            mutates.len(),
            targets.len()
        )));
    }
    let local = control
        .pointer_symbol()
        .ok_or_else(|| ProtocolError::NotEigenstate {
            node: control.id.clone(),
        })?
        .to_owned();
    let mut mutated = Vec::new();
    for (t, &m) in targets.iter().zip(mutates) {
        if t.pointer_symbol().is_none() {
            return Err(ProtocolError::NotEigenstate { node: t.id.clone() }.into());
        }
        if m {
            mutated.push(t);
        }
    }
    let coupled = mutated.iter().min_by(|a, b| a.id.cmp(&b.id)).map(|t| {
        let after = mutate(t);
        let symbol = after.pointer_symbol().expect("NOT maps eigenstates to eigenstates");
        Coupling {
            target: t.id.clone(),
            channel: protocol::channel_name(&local, symbol),
        }
    });
    Ok(ChooseOutcome {
        coupled,
        mutated: mutated.into_iter().map(|t| t.id.clone()).collect(),
    })
}

/// A node fluctuating between its ground eigenstate and one mutator
/// eigenstate with a fixed period of discrete ticks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumOscillator {
    pub node: NodeId,
    pub ground_index: usize,
    pub mutator_index: usize,
    pub period: u32,
    pub phase: u32,
}

impl QuantumOscillator {
    pub fn new(
        node: impl Into<NodeId>,
        ground_index: usize,
        mutator_index: usize,
        period: u32,
        phase: u32,
    ) -> Result<Self> {
        if ground_index == mutator_index {
            return Err(SelectionError::Argument(
                "ground and mutator eigenstates must differ".into(),
            ));
        }
        if period == 0 || phase >= period {
            return Err(SelectionError::Argument(format!(
                "phase {phase} outside [0, {period})"
            )));
        }
        Ok(Self {
            node: node.into(),
            ground_index,
            mutator_index,
            period,
            phase,
        })
    }

    pub fn tick(&mut self) {
        self.phase = (self.phase + 1) % self.period;
    }

    pub fn in_phase_with(&self, other: &Self) -> bool {
        self.period == other.period && self.phase == other.phase
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseLock {
    /// Index of the control's chosen mutator oscillation.
    pub control_choice: usize,
    pub control: QuantumOscillator,
    /// Position of the locked target in the input list.
    pub target_index: usize,
    pub target: QuantumOscillator,
    pub lock_tick: u32,
    /// Phase difference on each tick after locking, over three periods.
    pub phase_differences: Vec<i64>,
}

impl PhaseLock {
    pub fn is_stable(&self) -> bool {
        self.phase_differences.iter().all(|d| *d == 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PhaseLockOutcome {
    Locked(PhaseLock),
    NoLock { control_choice: Option<usize>, ticks: u32 },
}

/// Draws the control's free first mutation uniformly, then searches for a
/// lock with [`induced_fit_phase_lock_with_choice`].
pub fn induced_fit_phase_lock<R: Rng + ?Sized>(
    control_candidates: &[QuantumOscillator],
    targets: &[QuantumOscillator],
    rng: &mut R,
) -> PhaseLockOutcome {
    if control_candidates.is_empty() {
        return PhaseLockOutcome::NoLock {
            control_choice: None,
            ticks: 0,
        };
    }
    let choice = rng.gen_range(0..control_candidates.len());
    induced_fit_phase_lock_with_choice(control_candidates, targets, choice)
}

/// Discrete induced-fit search.
///
/// Every oscillator advances one slot per tick. While unlocked, the control
/// slips one extra slot per tick, so its phase drifts by +1 relative to each
/// target and visits every relative phase within one period. The first tick
/// on which a target of equal period shares the control's phase locks that
/// target (lowest list position on ties). After locking both advance
/// together for three periods and the phase differences are recorded.
pub fn induced_fit_phase_lock_with_choice(
    control_candidates: &[QuantumOscillator],
    targets: &[QuantumOscillator],
    choice: usize,
) -> PhaseLockOutcome {
    let Some(start) = control_candidates.get(choice) else {
        return PhaseLockOutcome::NoLock {
            control_choice: None,
            ticks: 0,
        };
    };
    let mut control = start.clone();
    let mut targets = targets.to_vec();
    let period = control.period;
    for tick in 0..period {
        if let Some(index) = targets.iter().position(|t| t.in_phase_with(&control)) {
            let mut target = targets[index].clone();
            let mut c = control.clone();
            let phase_differences = (0..3 * period)
                .map(|_| {
                    c.tick();
                    target.tick();
                    i64::from(c.phase) - i64::from(target.phase)
                })
                .collect();
            return PhaseLockOutcome::Locked(PhaseLock {
                control_choice: choice,
                control,
                target_index: index,
                target: targets[index].clone(),
                lock_tick: tick,
                phase_differences,
            });
        }
        for t in &mut targets {
            t.tick();
        }
        control.tick();
        control.tick();
    }
    PhaseLockOutcome::NoLock {
        control_choice: Some(choice),
        ticks: period,
    }
}

/// A candidate control→target coupling under selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingCandidate {
    pub control: NodeId,
    pub target: NodeId,
    pub channel: ChannelId,
    /// Signed resonance score: +1 per in-phase step, −1 per out-of-phase step.
    pub fitness: i64,
    pub alive: bool,
}

impl CouplingCandidate {
    pub fn new(control: impl Into<NodeId>, target: impl Into<NodeId>, channel: impl Into<ChannelId>) -> Self {
        Self {
            control: control.into(),
            target: target.into(),
            channel: channel.into(),
            fitness: 0,
            alive: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams {
    pub steps: u32,
    pub extinction_threshold: i64,
    /// Per-step probability that a candidate's phase check is misread.
    pub noise: f64,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        Self {
            steps: 10,
            extinction_threshold: DEFAULT_EXTINCTION_THRESHOLD,
            noise: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionReport {
    pub candidates: Vec<CouplingCandidate>,
    /// Indices of living candidates after the final step.
    pub survivors: Vec<usize>,
    /// Fitness of every candidate after each step.
    pub fitness_ledger: Vec<Vec<i64>>,
    /// Living candidate indices after each step.
    pub alive_ledger: Vec<Vec<usize>>,
    /// `(candidate index, step)` for every extinction.
    pub extinctions: Vec<(usize, u32)>,
}

/// Darwinian selection over candidate couplings.
///
/// Each step scores every living candidate against the current phases of its
/// two oscillators, kills candidates whose fitness reaches
/// `−extinction_threshold`, then advances all oscillators one tick.
pub fn evolve_couplings<R: Rng + ?Sized>(
    oscillators: &BTreeMap<NodeId, QuantumOscillator>,
    candidates: &[CouplingCandidate],
    params: EvolutionParams,
    rng: &mut R,
) -> Result<EvolutionReport> {
    if params.extinction_threshold < 1 {
        return Err(SelectionError::Argument(
            "extinction threshold must be at least 1".into(),
        ));
    }
    if !(0.0..=1.0).contains(&params.noise) {
        return Err(SelectionError::Argument(format!("noise {} outside [0, 1]", params.noise)));
    }
    for c in candidates {
        for id in [&c.control, &c.target] {
            if !oscillators.contains_key(id) {
                return Err(SelectionError::MissingOscillator(id.clone()));
            }
        }
        if !c.alive || c.fitness != 0 {
            return Err(SelectionError::Argument(format!(
                "candidate {}->{} must start alive with fitness 0",
                c.control, c.target
            )));
        }
    }

    let mut oscillators = oscillators.clone();
    let mut candidates = candidates.to_vec();
    let mut report = EvolutionReport {
        candidates: Vec::new(),
        survivors: Vec::new(),
        fitness_ledger: Vec::with_capacity(params.steps as usize),
        alive_ledger: Vec::with_capacity(params.steps as usize),
        extinctions: Vec::new(),
    };

    for step in 1..=params.steps {
        for (i, c) in candidates.iter_mut().enumerate() {
            if !c.alive {
                continue;
            }
            let mut consistent = oscillators[&c.control].in_phase_with(&oscillators[&c.target]);
            if params.noise > 0.0 && rng.gen_bool(params.noise) {
                consistent = !consistent;
            }
            c.fitness += if consistent { 1 } else { -1 };
            if c.fitness <= -params.extinction_threshold {
                c.alive = false;
                report.extinctions.push((i, step));
            }
        }
        for o in oscillators.values_mut() {
            o.tick();
        }
        report
            .fitness_ledger
            .push(candidates.iter().map(|c| c.fitness).collect());
        report.alive_ledger.push(alive_indices(&candidates));
    }
    report.survivors = alive_indices(&candidates);
    report.candidates = candidates;
    Ok(report)
}

fn alive_indices(candidates: &[CouplingCandidate]) -> Vec<usize> {
    candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.alive)
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{cnot_pair, Role};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(5)
    }

    #[test]
    fn control_one_target_mutates_latches_a_b_prime() {
        let (c, t, mut ch) = cnot_pair(1, 1);
        let out = choice_of_channel_with(&c, &t, &mut ch, true, &mut rng()).unwrap();
        assert_eq!(out.latched(), Some(&ChannelId::from("a<->b'")));
        assert!(out.cnot_consistent);
        assert_eq!(out.target.eigenstate(), Some(0));
        assert_eq!(out.control.eigenstate(), Some(1));
    }

    #[test]
    fn control_one_without_mutation_is_not_cnot() {
        let (c, t, mut ch) = cnot_pair(1, 1);
        let out = choice_of_channel_with(&c, &t, &mut ch, false, &mut rng()).unwrap();
        assert_eq!(out.latched(), Some(&ChannelId::from("a<->b")));
        assert!(!out.cnot_consistent);
    }

    #[test]
    fn control_zero_target_mutates_latches_primes() {
        // Consistency table: local a' against incoming {a, a'} from b'.
        let (c, t, mut ch) = cnot_pair(0, 1);
        let out = choice_of_channel_with(&c, &t, &mut ch, true, &mut rng()).unwrap();
        assert_eq!(out.latched(), Some(&ChannelId::from("a'<->b'")));
        assert_eq!(out.feedback.and_gate_inputs.len(), 2);
        assert!(out.feedback.is_consistent());
    }

    #[test]
    fn missing_return_channel_is_selection_failure() {
        let (c, t, mut ch) = cnot_pair(1, 1);
        ch.remove(&ChannelId::from("a<->b'"));
        let out = choice_of_channel_with(&c, &t, &mut ch, true, &mut rng()).unwrap();
        assert!(out.is_selection_failure());
        assert!(out.feedback.is_consistent());
    }

    #[test]
    fn probability_law_values() {
        assert_eq!(mutation_probability(1).unwrap(), 0.5);
        assert_eq!(mutation_probability(2).unwrap(), 0.75);
        assert_eq!(mutation_probability(10).unwrap(), 0.9990234375);
        assert!(mutation_probability(0).is_err());
    }

    #[test]
    fn probability_law_monte_carlo_ten_coins() {
        let mut r = rng();
        let trials = 100_000u32;
        let hits = (0..trials)
            .filter(|_| (0..10).any(|_| r.gen_bool(0.5)))
            .count();
        let p = mutation_probability(10).unwrap();
        let sigma = (p * (1.0 - p) / f64::from(trials)).sqrt();
        assert!((hits as f64 / f64::from(trials) - p).abs() <= 3.0 * sigma);
    }

    fn targets(n: usize) -> Vec<NeuronNode> {
        (0..n)
            .map(|i| NeuronNode::single_qubit(format!("t{i}").as_str(), Role::Target, "b", 1))
            .collect()
    }

    #[test]
    fn forced_single_target_couples() {
        let c = NeuronNode::single_qubit("n1", Role::Control, "a", 1);
        let out = choose_neuron_with(&c, &targets(1), &[true]).unwrap();
        assert_eq!(
            out.coupled,
            Some(Coupling {
                target: "t0".into(),
                channel: "a<->b'".into()
            })
        );
    }

    #[test]
    fn lowest_id_wins_ties() {
        let c = NeuronNode::single_qubit("n1", Role::Control, "a", 1);
        let out = choose_neuron_with(&c, &targets(3), &[false, true, true]).unwrap();
        assert_eq!(out.coupled.unwrap().target, NodeId::from("t1"));
        assert!(choose_neuron_with(&c, &targets(3), &[false; 3]).unwrap().coupled.is_none());
    }

    #[test]
    fn choose_neuron_rate_n2() {
        let c = NeuronNode::single_qubit("n1", Role::Control, "a", 1);
        let ts = targets(2);
        let mut r = ChaCha8Rng::seed_from_u64(42);
        let trials = 100_000u32;
        let hits = (0..trials)
            .filter(|_| choose_neuron(&c, &ts, &mut r).unwrap().coupled.is_some())
            .count();
        let f = hits as f64 / f64::from(trials);
        let sigma = (0.75f64 * 0.25 / f64::from(trials)).sqrt();
        assert!((f - 0.75).abs() <= 3.0 * sigma, "{f}");
    }

    fn osc(node: &str, mutator: usize, period: u32, phase: u32) -> QuantumOscillator {
        QuantumOscillator::new(node, 0, mutator, period, phase).unwrap()
    }

    #[test]
    fn four_targets_lock_on_matching_phase() {
        let names = ["2", "2'", "2''", "2'''"];
        let targets: Vec<_> = (0..4).map(|i| osc(names[i], i + 1, 4, i as u32)).collect();
        let control = vec![osc("1", 3, 4, 2)];
        let PhaseLockOutcome::Locked(lock) = induced_fit_phase_lock_with_choice(&control, &targets, 0) else {
            panic!("expected lock");
        };
        assert_eq!(lock.target.node, NodeId::from("2''"));
        assert_eq!(lock.lock_tick, 0);
        assert!(lock.is_stable());
        assert_eq!(lock.phase_differences.len(), 12);
    }

    #[test]
    fn identical_phase_locks_immediately() {
        let out = induced_fit_phase_lock(&[osc("1", 1, 5, 3)], &[osc("2", 1, 5, 3)], &mut rng());
        assert!(matches!(out, PhaseLockOutcome::Locked(PhaseLock { lock_tick: 0, .. })));
    }

    #[test]
    fn drift_alignment_takes_one_tick() {
        // Hand-stepped: tick 0 control 0 vs targets 1; tick 1 control 2 vs targets 2.
        let targets = vec![osc("2", 1, 4, 1), osc("2'", 2, 4, 1)];
        let PhaseLockOutcome::Locked(lock) = induced_fit_phase_lock_with_choice(&[osc("1", 1, 4, 0)], &targets, 0) else {
            panic!("expected lock");
        };
        assert_eq!(lock.lock_tick, 1);
        assert_eq!(lock.target_index, 0);
    }

    #[test]
    fn mismatched_periods_never_lock() {
        let out = induced_fit_phase_lock_with_choice(&[osc("1", 1, 4, 0)], &[osc("2", 1, 3, 0)], 0);
        assert_eq!(
            out,
            PhaseLockOutcome::NoLock {
                control_choice: Some(0),
                ticks: 4
            }
        );
    }

    #[test]
    fn oscillator_invariants() {
        assert!(QuantumOscillator::new("x", 1, 1, 4, 0).is_err());
        assert!(QuantumOscillator::new("x", 0, 1, 4, 4).is_err());
        let mut o = osc("x", 1, 3, 2);
        o.tick();
        assert_eq!(o.phase, 0);
    }

    fn network(phases: &[(&str, u32)]) -> BTreeMap<NodeId, QuantumOscillator> {
        phases
            .iter()
            .map(|(n, p)| (NodeId::from(*n), osc(n, 1, 4, *p)))
            .collect()
    }

    #[test]
    fn only_consistent_coupling_survives() {
        // Ledger by hand: in-phase candidate +1 per step; the other reaches -3 at step 3.
        let oscs = network(&[("c", 0), ("t1", 0), ("t2", 1)]);
        let cands = vec![
            CouplingCandidate::new("c", "t1", "a<->b'"),
            CouplingCandidate::new("c", "t2", "a<->b'"),
        ];
        let params = EvolutionParams {
            steps: 10,
            extinction_threshold: 3,
            noise: 0.0,
        };
        let rep = evolve_couplings(&oscs, &cands, params, &mut rng()).unwrap();
        assert_eq!(rep.survivors, vec![0]);
        assert_eq!(rep.extinctions, vec![(1, 3)]);
        assert_eq!(rep.candidates[0].fitness, 10);
        assert_eq!(rep.candidates[1].fitness, -3);
    }

    #[test]
    fn empty_and_all_consistent() {
        let oscs = network(&[("c", 2), ("t1", 2), ("t2", 2)]);
        let rep = evolve_couplings(&oscs, &[], EvolutionParams::default(), &mut rng()).unwrap();
        assert!(rep.survivors.is_empty());
        let cands = vec![
            CouplingCandidate::new("c", "t1", "x"),
            CouplingCandidate::new("c", "t2", "y"),
        ];
        let rep = evolve_couplings(&oscs, &cands, EvolutionParams::default(), &mut rng()).unwrap();
        assert_eq!(rep.survivors, vec![0, 1]);
        assert_eq!(rep.candidates[0].fitness, rep.candidates[1].fitness);
    }

    #[test]
    fn missing_oscillator_rejected() {
        let oscs = network(&[("c", 0)]);
        let cands = vec![CouplingCandidate::new("c", "ghost", "x")];
        assert!(matches!(
            evolve_couplings(&oscs, &cands, EvolutionParams::default(), &mut rng()),
            Err(SelectionError::MissingOscillator(_))
        ));
    }
}
