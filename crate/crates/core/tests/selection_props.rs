use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nqcc::protocol::{cnot_pair, NeuronNode, NodeId, Role};
use nqcc::selection::{
    choice_of_channel, choose_neuron, evolve_couplings, induced_fit_phase_lock, mutation_probability,
    CouplingCandidate, EvolutionParams, PhaseLockOutcome, QuantumOscillator,
};

fn oscillators(n: usize) -> impl Strategy<Value = Vec<QuantumOscillator>> {
    prop::collection::vec((2u32..6, 0u32..6), n).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (period, phase))| QuantumOscillator::new(format!("n{i}"), 0, 1, period, phase % period).unwrap())
            .collect()
    })
}

fn network() -> impl Strategy<Value = (Vec<QuantumOscillator>, Vec<CouplingCandidate>)> {
    (2usize..6).prop_flat_map(|n| {
        let pairs = prop::collection::vec((0..n, 0..n).prop_filter("distinct", |(a, b)| a != b), 1..8);
        (oscillators(n), pairs).prop_map(|(osc, pairs)| {
            let cands = pairs
                .into_iter()
                .enumerate()
                .map(|(i, (a, b))| CouplingCandidate::new(format!("n{a}"), format!("n{b}"), format!("ch{i}")))
                .collect();
            (osc, cands)
        })
    })
}

fn by_id(osc: &[QuantumOscillator]) -> BTreeMap<NodeId, QuantumOscillator> {
    osc.iter().map(|o| (o.node.clone(), o.clone())).collect()
}

proptest! {
    #[test]
    fn extinct_couplings_never_return((osc, cands) in network(), noise in 0.0f64..0.5, seed in any::<u64>()) {
        let params = EvolutionParams { steps: 30, extinction_threshold: 3, noise };
        let r = evolve_couplings(&by_id(&osc), &cands, params, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        for w in r.alive_ledger.windows(2) {
            prop_assert!(w[1].iter().all(|i| w[0].contains(i)));
        }
        for (i, step) in &r.extinctions {
            prop_assert!(!r.alive_ledger[*step as usize - 1].contains(i));
        }
        prop_assert_eq!(r.survivors.clone(), r.alive_ledger.last().cloned().unwrap_or_default());
    }

    #[test]
    fn identical_seeds_identical_selection((osc, cands) in network(), noise in 0.0f64..0.5, seed in any::<u64>()) {
        let params = EvolutionParams { steps: 20, extinction_threshold: 3, noise };
        let a = evolve_couplings(&by_id(&osc), &cands, params, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let b = evolve_couplings(&by_id(&osc), &cands, params, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn identical_seeds_identical_transcripts(c in 0u8..2, t in 0u8..2, seed in any::<u64>()) {
        let run = |seed| {
            let (control, target, mut ch) = cnot_pair(c, t);
            choice_of_channel(&control, &target, &mut ch, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
        };
        let (a, b) = (run(seed), run(seed));
        prop_assert_eq!(a.transcript, b.transcript);
        prop_assert_eq!(a.feedback, b.feedback);
    }

    #[test]
    fn locks_are_stable(controls in oscillators(3), targets in oscillators(4), seed in any::<u64>()) {
        if let PhaseLockOutcome::Locked(lock) = induced_fit_phase_lock(&controls, &targets, &mut ChaCha8Rng::seed_from_u64(seed)) {
            prop_assert!(lock.is_stable());
            prop_assert_eq!(lock.phase_differences.len() as u32, 3 * lock.control.period);
            prop_assert_eq!(lock.target.period, lock.control.period);
        }
    }
}

#[test]
fn latch_is_unique_over_ten_thousand_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for i in 0..10_000u32 {
        let (control, target, mut ch) = cnot_pair((i % 2) as u8, ((i / 2) % 2) as u8);
        let out = choice_of_channel(&control, &target, &mut ch, &mut rng).unwrap();
        assert!(out.feedback.is_consistent(), "run {i}: {:?}", out.feedback);
        assert!(out.latched().is_some());
    }
}

#[test]
fn coupling_rate_tracks_one_minus_half_power() {
    let control = NeuronNode::single_qubit("c", Role::Control, "a", 1);
    for n in 1..=4u32 {
        let targets: Vec<NeuronNode> = (0..n)
            .map(|i| NeuronNode::single_qubit(format!("t{i}"), Role::Target, &format!("b{i}"), 0))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(u64::from(n));
        let trials = 20_000;
        let coupled = (0..trials)
            .filter(|_| choose_neuron(&control, &targets, &mut rng).unwrap().coupled.is_some())
            .count();
        let p = mutation_probability(n).unwrap();
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        let rate = coupled as f64 / trials as f64;
        assert!((rate - p).abs() <= 3.0 * sigma, "n={n}: {rate} vs {p}");
    }
}
