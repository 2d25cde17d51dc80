use proptest::prelude::*;

use nqcc::capacity::{
    channel_count, clock_frequency, coincidence_interval, compress_qubits, decoherence_threshold,
    frohlich_budget, worksheet, BudgetParams, DecoherenceParams, WorksheetParams, CODATA,
};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

proptest! {
    #[test]
    fn compression_grows_with_channels(half in 1u64..1_000_000) {
        let (a, b) = (compress_qubits(2 * half).unwrap(), compress_qubits(2 * half + 2).unwrap());
        prop_assert!(b > a);
        prop_assert_eq!(a, u128::from(half) * u128::from(half));
    }

    #[test]
    fn channel_count_doubles_per_qubit(q in 0u32..200) {
        prop_assert_eq!(channel_count(q + 1), channel_count(q) * 2u8);
    }

    #[test]
    fn clock_falls_as_delay_grows(d in 1e-6f64..10.0, factor in 1.001f64..10.0) {
        prop_assert!(clock_frequency(d * factor).unwrap() < clock_frequency(d).unwrap());
        prop_assert!(rel(clock_frequency(d).unwrap() * d, 1.0) < 1e-15);
    }

    #[test]
    fn threshold_scales_with_temperature_and_charge(t in 1.0f64..1000.0, n in 1u32..50) {
        let p = DecoherenceParams { temperature: t, charges_for_opening: n };
        let base = decoherence_threshold(&p, &CODATA).unwrap();
        let hotter = decoherence_threshold(&DecoherenceParams { temperature: 2.0 * t, ..p }, &CODATA).unwrap();
        let more = decoherence_threshold(&DecoherenceParams { charges_for_opening: n + 1, ..p }, &CODATA).unwrap();
        prop_assert!(hotter.voltage > base.voltage && hotter.energy > base.energy && hotter.frequency > base.frequency);
        prop_assert!(more.voltage < base.voltage && more.energy < base.energy && more.frequency < base.frequency);
        // V·C = J and J/(J·s) = Hz.
        prop_assert!(rel(base.voltage * CODATA.elementary_charge, base.energy) < 1e-12);
        prop_assert!(rel(base.energy / CODATA.planck, base.frequency) < 1e-12);
    }

    #[test]
    fn coincidence_shrinks_with_rate(r in 1u64..1_000_000_000) {
        prop_assert!(coincidence_interval(r + 1).unwrap() < coincidence_interval(r).unwrap());
    }

    #[test]
    fn budget_grows_with_neuron_area(area_exp in -12.0f64..-6.0, lipids in 1u64..1000) {
        let small = BudgetParams { neuron_area: 10f64.powf(area_exp), lipids_per_module: lipids, ..BudgetParams::default() };
        let large = BudgetParams { neuron_area: 10f64.powf(area_exp + 0.5), ..small };
        let (a, b) = (frohlich_budget(&small).unwrap(), frohlich_budget(&large).unwrap());
        prop_assert!(b.modules_per_neuron >= a.modules_per_neuron);
        prop_assert_eq!(a.channel_proteins, a.modules_per_neuron);
        prop_assert_eq!(a.total_lipids, u128::from(a.modules_per_neuron) * u128::from(lipids));
    }
}

#[test]
fn default_worksheet_matches_published_figures() {
    let sheet = worksheet(&WorksheetParams::default()).unwrap();
    for (q, v) in [
        ("compressed_qubits", 1e8),
        ("clock_frequency", 50.0),
        ("frohlich_modules", 1e8),
        ("total_lipids", 1e10),
    ] {
        assert_eq!(sheet.row(q).unwrap().value, v, "{q}");
    }
    for q in ["threshold_voltage", "threshold_energy", "threshold_frequency"] {
        assert!(sheet.row(q).unwrap().deviation.unwrap() <= 0.15, "{q}");
    }
}
