//! Closed-form capacity arithmetic: channel counts, compression, clock
//! rates, the thermal decoherence threshold, signal coincidence intervals and
//! Fröhlich-module budgets.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("argument: {0}")]
    Argument(String),
}

pub type Result<T> = std::result::Result<T, CapacityError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// J/K
    pub boltzmann: f64,
    /// C
    pub elementary_charge: f64,
    /// J·s
    pub planck: f64,
}

pub const CODATA: PhysicalConstants = PhysicalConstants {
    boltzmann: 1.380649e-23,
    elementary_charge: 1.602177e-19,
    planck: 6.62607e-34,
};

/// `f = 2^q` input/output channels for `q` qubits.
pub fn channel_count(qubits: u32) -> BigUint {
    BigUint::from(1u8) << qubits
}

/// Qubits carried by `n` classical channels under `q = (n/2)²`.
pub fn compress_qubits(channels: u64) -> Result<u128> {
    if channels < 2 || !channels.is_multiple_of(2) {
        return Err(CapacityError::Argument(format!(
            "channel count {channels} must be even and at least 2"
        )));
    }
    let half = u128::from(channels / 2);
    Ok(half * half)
}

/// Switching frequency (Hz) of a unit with the given input-to-output delay.
pub fn clock_frequency(delay_seconds: f64) -> Result<f64> {
    if !(delay_seconds > 0.0 && delay_seconds.is_finite()) {
        return Err(CapacityError::Argument(format!("delay {delay_seconds} s must be positive")));
    }
    Ok(1.0 / delay_seconds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceParams {
    /// K
    pub temperature: f64,
    /// Charges needed to open one channel.
    pub charges_for_opening: u32,
}

impl Default for DecoherenceParams {
    fn default() -> Self {
        Self {
            temperature: 310.0,
            charges_for_opening: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceThreshold {
    /// `U = kT/(ne)`, volts
    pub voltage: f64,
    /// `E = U·e`, joules
    pub energy: f64,
    /// `ν = E/h`, hertz
    pub frequency: f64,
}

pub fn decoherence_threshold(
    params: &DecoherenceParams,
    constants: &PhysicalConstants,
) -> Result<DecoherenceThreshold> {
    if !(params.temperature > 0.0 && params.temperature.is_finite()) {
        return Err(CapacityError::Argument(format!(
            "temperature {} K must be positive",
            params.temperature
        )));
    }
    if params.charges_for_opening == 0 {
        return Err(CapacityError::Argument("at least one charge is needed".into()));
    }
    let n = f64::from(params.charges_for_opening);
    let voltage = constants.boltzmann * params.temperature / (n * constants.elementary_charge);
    let energy = voltage * constants.elementary_charge;
    let frequency = energy / constants.planck;
    Ok(DecoherenceThreshold {
        voltage,
        energy,
        frequency,
    })
}

/// Mean spacing (s) between signals arriving at `signals_per_ms`.
pub fn coincidence_interval(signals_per_ms: u64) -> Result<f64> {
    if signals_per_ms == 0 {
        return Err(CapacityError::Argument("signal rate must be at least 1/ms".into()));
    }
    Ok(1e-3 / signals_per_ms as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    /// m²
    pub module_area: f64,
    pub modules_per_neuron: u64,
    pub lipids_per_module: u64,
    pub channel_proteins: u64,
    pub total_lipids: u128,
    pub qubit_estimate: u128,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BudgetParams {
    /// m²; inferred from 10^8 channels at 10^-17 m² each.
    pub neuron_area: f64,
    /// m²
    pub module_area: f64,
    pub lipids_per_module: u64,
    /// Qubits credited to each module; defaults to its lipid count.
    pub qubits_per_module: Option<u64>,
}

impl Default for BudgetParams {
    fn default() -> Self {
        Self {
            neuron_area: 1e-9,
            module_area: 1e-17,
            lipids_per_module: 100,
            qubits_per_module: None,
        }
    }
}

/// Whole modules of `module_area` covering `neuron_area`, with one channel
/// protein each.
pub fn frohlich_budget(params: &BudgetParams) -> Result<BudgetReport> {
    let BudgetParams {
        neuron_area,
        module_area,
        lipids_per_module,
        qubits_per_module,
    } = *params;
    for (name, a) in [("neuron", neuron_area), ("module", module_area)] {
        if !(a > 0.0 && a.is_finite()) {
            return Err(CapacityError::Argument(format!("{name} area {a} must be positive")));
        }
    }
    let modules = whole_ratio(neuron_area, module_area);
    let lipids = u128::from(modules) * u128::from(lipids_per_module);
    let per_module_qubits = qubits_per_module.unwrap_or(lipids_per_module);
    Ok(BudgetReport {
        module_area,
        modules_per_neuron: modules,
        lipids_per_module,
        channel_proteins: modules,
        total_lipids: lipids,
        qubit_estimate: u128::from(modules) * u128::from(per_module_qubits),
    })
}

/// `floor(a / b)`, treating quotients within float rounding of an integer
/// as that integer (`1e-9 / 1e-17` is not exactly `1e8` in binary).
fn whole_ratio(a: f64, b: f64) -> u64 {
    let r = a / b;
    let nearest = r.round();
    if (r - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as u64
    } else {
        r.floor() as u64
    }
}

/// Inputs for the capacity worksheet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorksheetParams {
    pub qubits_per_neuron: u32,
    pub compression_channels: u64,
    /// s
    pub delay: f64,
    pub signals_per_ms: Vec<u64>,
    pub decoherence: DecoherenceParams,
    pub budget: BudgetParams,
    pub inputs_per_cycle: u64,
}

impl Default for WorksheetParams {
    fn default() -> Self {
        Self {
            qubits_per_neuron: 14,
            compression_channels: 20_000,
            delay: 0.020,
            signals_per_ms: vec![10_000, 100_000],
            decoherence: DecoherenceParams::default(),
            budget: BudgetParams::default(),
            inputs_per_cycle: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorksheetRow {
    pub quantity: String,
    pub formula: String,
    pub value: f64,
    pub unit: String,
    /// Published figure this row is compared against, if any.
    pub reference: Option<f64>,
    /// `|value − reference| / reference`
    pub deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Worksheet {
    pub threshold: DecoherenceThreshold,
    pub budget: BudgetReport,
    pub rows: Vec<WorksheetRow>,
}

impl Worksheet {
    pub fn row(&self, quantity: &str) -> Option<&WorksheetRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }
}

fn row(quantity: &str, formula: &str, value: f64, unit: &str, reference: Option<f64>) -> WorksheetRow {
    WorksheetRow {
        quantity: quantity.into(),
        formula: formula.into(),
        value,
        unit: unit.into(),
        reference,
        deviation: reference.map(|r| ((value - r) / r).abs()),
    }
}

pub fn worksheet(params: &WorksheetParams) -> Result<Worksheet> {
    let threshold = decoherence_threshold(&params.decoherence, &CODATA)?;
    let budget = frohlich_budget(&params.budget)?;
    let channels = channel_count(params.qubits_per_neuron);
    let compressed = compress_qubits(params.compression_channels)?;
    let per_cycle = compress_qubits(params.inputs_per_cycle)?;

    let mut rows = vec![
        row(
            "channels_per_neuron",
            "f = 2^q",
            channels.to_string().parse().unwrap_or(f64::INFINITY),
            "channels",
            None,
        ),
        row("compressed_qubits", "q = (n/2)^2", compressed as f64, "qubits", Some(1e8)),
        row("clock_frequency", "1/delay", clock_frequency(params.delay)?, "Hz", Some(50.0)),
    ];
    for &rate in &params.signals_per_ms {
        let reference = (rate == 100_000).then_some(1e-8);
        rows.push(row(
            &format!("coincidence_interval_{rate}_per_ms"),
            "1e-3 s / signals",
            coincidence_interval(rate)?,
            "s",
            reference,
        ));
    }
    rows.extend([
        row("threshold_voltage", "U = kT/(ne)", threshold.voltage, "V", Some(5e-3)),
        row("threshold_energy", "E = U e", threshold.energy, "J", Some(8e-22)),
        row("threshold_frequency", "nu = E/h", threshold.frequency, "Hz", Some(1e12)),
        row(
            "frohlich_modules",
            "floor(A_neuron / A_module)",
            budget.modules_per_neuron as f64,
            "modules",
            Some(1e8),
        ),
        row("channel_proteins", "one per module", budget.channel_proteins as f64, "proteins", Some(1e8)),
        row(
            "total_lipids",
            "modules x lipids/module",
            budget.total_lipids as f64,
            "lipids",
            Some(1e10),
        ),
        // The two qubit figures are not reconciled with each other.
        row(
            "qubits_coherent_lipids",
            "modules x qubits/module",
            budget.qubit_estimate as f64,
            "qubits",
            Some(1e10),
        ),
        row(
            "qubits_per_cycle_compressed",
            "q = (inputs/2)^2",
            per_cycle as f64,
            "qubits",
            None,
        ),
    ]);
    Ok(Worksheet {
        threshold,
        budget,
        rows,
    })
}

impl fmt::Display for Worksheet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<36} {:<28} {:>14} {:<9} {:>12} {:>10}",
            "quantity", "formula", "value", "unit", "reference", "deviation"
        )?;
        for r in &self.rows {
            let reference = r.reference.map_or_else(|| "-".to_owned(), |v| format!("{v:.3e}"));
            let deviation = r.deviation.map_or_else(|| "-".to_owned(), |d| format!("{:.1}%", d * 100.0));
            writeln!(
                f,
                "{:<36} {:<28} {:>14.4e} {:<9} {:>12} {:>10}",
                r.quantity, r.formula, r.value, r.unit, reference, deviation
            )?;
        }
        Ok(())
    }
}
