//! Browser bindings for three interactive views: ladder propagation, the
//! Werner-state PPT curve, and the coupling rate against `1 − 0.5ⁿ`.
//!
//! The plain functions carry the logic and are tested natively; the
//! `#[wasm_bindgen]` exports only convert to JS-friendly types.

use nqcc::memnet;
use nqcc::protocol::{NeuronNode, Role};
use nqcc::qstate::{ppt_separability, DensityMatrix};
use nqcc::rng;
use nqcc::selection;
use wasm_bindgen::prelude::*;

/// Propagation of a ladder: measured period and one row string per tick,
/// tracks separated by `|`, `#` for an active rung.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LadderView {
    pub period: usize,
    pub rows: Vec<String>,
}

pub fn ladder_view(rungs: usize, skips: &[usize], closed: bool, ticks: usize) -> Result<LadderView, String> {
    let net = memnet::build_ladder(rungs, skips, closed).map_err(|e| e.to_string())?;
    let period = memnet::measure_periodicity(&net).map_err(|e| e.to_string())?;
    let rows = memnet::propagate(&net, ticks)
        .iter()
        .map(|tracks| {
            tracks
                .iter()
                .map(|rungs| rungs.iter().map(|&on| if on { '#' } else { '.' }).collect::<String>())
                .collect::<Vec<_>>()
                .join("|")
        })
        .collect();
    Ok(LadderView { period, rows })
}

/// Minimum partial-transpose eigenvalue of the Werner state at `points`
/// evenly spaced mixing weights in `[0, 1]`.
pub fn werner_curve(points: usize) -> Vec<(f64, f64)> {
    let points = points.max(2);
    (0..points)
        .map(|i| {
            let p = i as f64 / (points - 1) as f64;
            let rho = DensityMatrix::werner(p).expect("p in [0, 1]");
            (p, ppt_separability(&rho).expect("two-qubit state").min_eigenvalue)
        })
        .collect()
}

/// Empirical rate at which some target couples, for `1..=max_targets`
/// targets, paired with `1 − 0.5ⁿ`.
pub fn coupling_rates(max_targets: u32, trials: u32, seed: u64) -> Result<Vec<(u32, f64, f64)>, String> {
    let control = NeuronNode::single_qubit("c", Role::Control, "a", 1);
    (1..=max_targets)
        .map(|n| {
            let targets: Vec<NeuronNode> = (0..n)
                .map(|i| NeuronNode::single_qubit(format!("t{i}"), Role::Target, &format!("b{i}"), 0))
                .collect();
            let mut rng = rng::stream(seed, u64::from(n));
            let mut coupled = 0u32;
            for _ in 0..trials {
                let out = selection::choose_neuron(&control, &targets, &mut rng).map_err(|e| e.to_string())?;
                coupled += u32::from(out.coupled.is_some());
            }
            let expected = selection::mutation_probability(n).map_err(|e| e.to_string())?;
            Ok((n, f64::from(coupled) / f64::from(trials.max(1)), expected))
        })
        .collect()
}

#[wasm_bindgen]
pub struct Ladder {
    period: usize,
    rows: Vec<String>,
}

#[wasm_bindgen]
impl Ladder {
    #[wasm_bindgen(getter)]
    pub fn period(&self) -> usize {
        self.period
    }

    #[wasm_bindgen(getter)]
    pub fn rows(&self) -> Vec<String> {
        self.rows.clone()
    }
}

#[wasm_bindgen(js_name = ladder)]
pub fn ladder_js(rungs: usize, skips: Vec<usize>, closed: bool, ticks: usize) -> Result<Ladder, JsError> {
    let v = ladder_view(rungs, &skips, closed, ticks).map_err(|e| JsError::new(&e))?;
    Ok(Ladder {
        period: v.period,
        rows: v.rows,
    })
}

/// Flat `[p0, λ0, p1, λ1, …]`.
#[wasm_bindgen(js_name = wernerCurve)]
pub fn werner_curve_js(points: usize) -> Vec<f64> {
    werner_curve(points).into_iter().flat_map(|(p, l)| [p, l]).collect()
}

/// Flat `[n, empirical, expected, …]`.
#[wasm_bindgen(js_name = couplingRates)]
pub fn coupling_rates_js(max_targets: u32, trials: u32, seed: u64) -> Result<Vec<f64>, JsError> {
    let rates = coupling_rates(max_targets, trials, seed).map_err(|e| JsError::new(&e))?;
    Ok(rates.into_iter().flat_map(|(n, e, x)| [f64::from(n), e, x]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_three_two() {
        let v = ladder_view(12, &[3, 2], false, 8).unwrap();
        assert_eq!(v.period, 6);
        assert_eq!(v.rows.len(), 9);
        assert_eq!(v.rows[0].split('|').count(), 2);
        assert!(ladder_view(3, &[3], false, 4).is_err());
    }

    #[test]
    fn werner_curve_crosses_zero_at_one_third() {
        let curve = werner_curve(31);
        assert_eq!(curve.len(), 31);
        assert!((curve[0].1 - 0.25).abs() < 1e-12);
        assert!((curve[30].1 + 0.5).abs() < 1e-9);
        for (p, l) in curve {
            assert_eq!(l < -1e-10, p > 1.0 / 3.0 + 1e-9, "p = {p}");
        }
    }

    #[test]
    fn rates_follow_the_law() {
        let rates = coupling_rates(3, 20_000, 7).unwrap();
        assert_eq!(rates.len(), 3);
        for (n, got, want) in rates {
            assert_eq!(want, 1.0 - 0.5f64.powi(n as i32));
            assert!((got - want).abs() < 0.02, "n={n}: {got}");
        }
    }
}
