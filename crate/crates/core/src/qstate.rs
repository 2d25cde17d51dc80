//! Exact small-register quantum mathematics.
//!
//! Amplitudes are stored densely. Qubit 0 is the leftmost label in a ket, so
//! `|10⟩` is basis index 2 with qubit 0 set. Every operation returns a new
//! value; the only shared state is the random source passed to [`measure`].

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::hermitian_eigenvalues;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 12;
/// Tolerance on the squared norm of a register.
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Tolerance on Hermiticity and trace of a density matrix.
pub const DENSITY_TOLERANCE: f64 = 1e-12;
/// Most negative eigenvalue still accepted as numerical noise.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;
/// A partial transpose eigenvalue below `-PPT_TOLERANCE` witnesses entanglement.
pub const PPT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QStateError {
    #[error("qubit count {0} outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("expected {expected} amplitudes, got {actual}")]
    AmplitudeLength { expected: usize, actual: usize },
    #[error("register is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("gate {gate} does not fit a {qubits}-qubit register")]
    GateMismatch { gate: String, qubits: usize },
    #[error("qubit index {index} out of range for a {qubits}-qubit register")]
    QubitIndex { index: usize, qubits: usize },
    #[error("qubit index {0} listed twice")]
    DuplicateQubit(usize),
    #[error("keep list must name at least one qubit")]
    EmptyKeep,
    #[error("unsupported density dimension {0}; the separability test needs a two-qubit (4x4) matrix")]
    UnsupportedDimension(usize),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
}

pub type Result<T> = std::result::Result<T, QStateError>;

/// Normalized amplitude vector over `qubit_count` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRegister {
    qubit_count: usize,
    amplitudes: Vec<Complex64>,
}

impl QuantumRegister {
    /// `|0…0⟩` on `qubit_count` qubits.
    pub fn new(qubit_count: usize) -> Result<Self> {
        Self::basis(qubit_count, 0)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(qubit_count: usize, index: usize) -> Result<Self> {
        check_qubit_count(qubit_count)?;
        let dim = 1usize << qubit_count;
        if index >= dim {
            return Err(QStateError::AmplitudeLength {
                expected: dim,
                actual: index + 1,
            });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            qubit_count,
            amplitudes,
        })
    }

    /// Basis state from a bit list, qubit 0 first.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let index = bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b != 0));
        Self::basis(bits.len(), index)
    }

    pub fn from_amplitudes(qubit_count: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubit_count(qubit_count)?;
        let expected = 1usize << qubit_count;
        if amplitudes.len() != expected {
            return Err(QStateError::AmplitudeLength {
                expected,
                actual: amplitudes.len(),
            });
        }
        let norm = norm_sqr(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(QStateError::NotNormalized(norm));
        }
        Ok(Self {
            qubit_count,
            amplitudes,
        })
    }

    /// Scales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(qubit_count: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = norm_sqr(&amplitudes).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QStateError::NotNormalized(norm));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Self::from_amplitudes(qubit_count, amplitudes)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes.get(index).map_or(0.0, |a| a.norm_sqr())
    }

    /// Mask selecting `qubit` inside a basis index.
    pub fn qubit_mask(&self, qubit: usize) -> usize {
        1usize << (self.qubit_count - 1 - qubit)
    }

    /// Returns the basis index if the register is a computational basis
    /// state up to a global phase.
    pub fn basis_index(&self, tolerance: f64) -> Option<usize> {
        let (index, p) = self
            .amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        ((1.0 - p).abs() <= tolerance).then_some(index)
    }

    /// Kronecker product; `self` supplies the leading qubits.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let qubit_count = self.qubit_count + other.qubit_count;
        check_qubit_count(qubit_count)?;
        let mut amplitudes = Vec::with_capacity(1 << qubit_count);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(Self {
            qubit_count,
            amplitudes,
        })
    }

    /// Componentwise comparison.
    pub fn approx_eq(&self, other: &Self, tolerance: f64) -> bool {
        self.qubit_count == other.qubit_count
            && self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .all(|(a, b)| (a - b).norm() <= tolerance)
    }

    /// Outcome distribution over the joint bit patterns of `qubits`,
    /// indexed with `qubits[0]` as the most significant bit.
    pub fn outcome_probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        check_indices(qubits, self.qubit_count)?;
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (index, a) in self.amplitudes.iter().enumerate() {
            let pattern = qubits.iter().fold(0usize, |acc, &q| {
                (acc << 1) | usize::from(index & self.qubit_mask(q) != 0)
            });
            probs[pattern] += a.norm_sqr();
        }
        Ok(probs)
    }
}

fn norm_sqr(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum()
}

fn check_qubit_count(qubit_count: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&qubit_count) {
        Ok(())
    } else {
        Err(QStateError::QubitCount(qubit_count))
    }
}

fn check_indices(qubits: &[usize], qubit_count: usize) -> Result<()> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= qubit_count {
            return Err(QStateError::QubitIndex {
                index: q,
                qubits: qubit_count,
            });
        }
        if qubits[..i].contains(&q) {
            return Err(QStateError::DuplicateQubit(q));
        }
    }
    Ok(())
}

/// Unitary gates with their target qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    Not { qubit: usize },
    Hadamard { qubit: usize },
    /// `exp(iθZ/2)`: phase `e^{iθ/2}` on `|0⟩`, `e^{-iθ/2}` on `|1⟩`.
    Rotation { qubit: usize, angle: f64 },
    Cnot { control: usize, target: usize },
    SqrtSwap { first: usize, second: usize },
    SqrtSwapDagger { first: usize, second: usize },
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::Not { .. } => "NOT",
            Gate::Hadamard { .. } => "HADAMARD",
            Gate::Rotation { .. } => "ROTATION",
            Gate::Cnot { .. } => "CNOT",
            Gate::SqrtSwap { .. } => "SQRT_SWAP",
            Gate::SqrtSwapDagger { .. } => "SQRT_SWAP_DAGGER",
        }
    }

    /// Target qubits in the order the local matrix addresses them.
    pub fn targets(&self) -> Vec<usize> {
        match *self {
            Gate::Not { qubit } | Gate::Hadamard { qubit } | Gate::Rotation { qubit, .. } => {
                vec![qubit]
            }
            Gate::Cnot { control, target } => vec![control, target],
            Gate::SqrtSwap { first, second } | Gate::SqrtSwapDagger { first, second } => {
                vec![first, second]
            }
        }
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rotation { qubit, angle } => Gate::Rotation {
                qubit,
                angle: -angle,
            },
            Gate::SqrtSwap { first, second } => Gate::SqrtSwapDagger { first, second },
            Gate::SqrtSwapDagger { first, second } => Gate::SqrtSwap { first, second },
            g => g,
        }
    }

    /// Row-major local matrix of dimension `2^targets().len()`.
    pub fn matrix(&self) -> Vec<Complex64> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let o = c(0.0, 0.0);
        let l = c(1.0, 0.0);
        match *self {
            Gate::Not { .. } => vec![o, l, l, o],
            Gate::Hadamard { .. } => {
                let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                vec![h, h, h, -h]
            }
            Gate::Rotation { angle, .. } => {
                vec![Complex64::from_polar(1.0, angle / 2.0), o, o, Complex64::from_polar(1.0, -angle / 2.0)]
            }
            Gate::Cnot { .. } => vec![
                l, o, o, o, //
                o, l, o, o, //
                o, o, o, l, //
                o, o, l, o,
            ],
            Gate::SqrtSwap { .. } | Gate::SqrtSwapDagger { .. } => {
                let sign = if matches!(self, Gate::SqrtSwap { .. }) { 1.0 } else { -1.0 };
                let p = c(0.5, 0.5 * sign);
                let m = c(0.5, -0.5 * sign);
                vec![
                    l, o, o, o, //
                    o, p, m, o, //
                    o, m, p, o, //
                    o, o, o, l,
                ]
            }
        }
    }

    fn check(&self, qubits: usize) -> Result<()> {
        check_indices(&self.targets(), qubits).map_err(|_| QStateError::GateMismatch {
            gate: format!("{self:?}"),
            qubits,
        })
    }
}

/// Applies `gate` and returns the evolved register.
pub fn apply_gate(reg: &QuantumRegister, gate: &Gate) -> Result<QuantumRegister> {
    let mut out = reg.clone();
    apply_gate_in_place(&mut out, gate)?;
    Ok(out)
}

pub fn apply_gate_in_place(reg: &mut QuantumRegister, gate: &Gate) -> Result<()> {
    gate.check(reg.qubit_count)?;
    let targets = gate.targets();
    let masks: Vec<usize> = targets.iter().map(|&q| reg.qubit_mask(q)).collect();
    let all_targets: usize = masks.iter().sum();
    let local_dim = 1usize << targets.len();
    let matrix = gate.matrix();

    let local_index = |l: usize| -> usize {
        masks
            .iter()
            .enumerate()
            .filter(|(j, _)| l & (1 << (targets.len() - 1 - j)) != 0)
            .map(|(_, m)| *m)
            .sum()
    };
    let offsets: Vec<usize> = (0..local_dim).map(local_index).collect();

    let mut gathered = vec![Complex64::new(0.0, 0.0); local_dim];
    for base in 0..reg.amplitudes.len() {
        if base & all_targets != 0 {
            continue;
        }
        for (slot, off) in gathered.iter_mut().zip(&offsets) {
            *slot = reg.amplitudes[base | off];
        }
        for (row, off) in offsets.iter().enumerate() {
            reg.amplitudes[base | off] = (0..local_dim)
                .map(|col| matrix[row * local_dim + col] * gathered[col])
                .sum();
        }
    }
    Ok(())
}

/// Projective measurement of `qubits` in the computational basis.
///
/// Qubits are measured in list order; the returned bits follow the same
/// order.
pub fn measure<R: Rng + ?Sized>(
    reg: &QuantumRegister,
    qubits: &[usize],
    rng: &mut R,
) -> Result<(Vec<u8>, QuantumRegister)> {
    check_indices(qubits, reg.qubit_count)?;
    let mut state = reg.clone();
    let mut outcome = Vec::with_capacity(qubits.len());
    for &q in qubits {
        let mask = state.qubit_mask(q);
        let p_one: f64 = state
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let bit = u8::from(rng.gen::<f64>() < p_one);
        let keep_set = bit == 1;
        let p = if keep_set { p_one } else { 1.0 - p_one };
        let scale = p.sqrt();
        for (i, a) in state.amplitudes.iter_mut().enumerate() {
            if (i & mask != 0) == keep_set {
                *a /= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        outcome.push(bit);
    }
    Ok((outcome, state))
}

/// Verdict of the positive-partial-transpose test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Separability {
    Separable,
    Entangled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptReport {
    pub verdict: Separability,
    pub min_eigenvalue: f64,
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dimension: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validates the density-matrix invariants.
    pub fn from_entries(dimension: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dimension * dimension || dimension == 0 {
            return Err(QStateError::InvalidDensity(format!(
                "{} entries for dimension {dimension}",
                entries.len()
            )));
        }
        let rho = Self { dimension, entries };
        if !rho.is_hermitian(DENSITY_TOLERANCE) {
            return Err(QStateError::InvalidDensity("not Hermitian".into()));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > DENSITY_TOLERANCE || trace.im.abs() > DENSITY_TOLERANCE {
            return Err(QStateError::InvalidDensity(format!("trace {trace}")));
        }
        let min = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < EIGENVALUE_FLOOR {
            return Err(QStateError::InvalidDensity(format!(
                "negative eigenvalue {min}"
            )));
        }
        Ok(rho)
    }

    pub fn from_pure(reg: &QuantumRegister) -> Self {
        let dimension = reg.dimension();
        let a = reg.amplitudes();
        let entries = (0..dimension * dimension)
            .map(|k| a[k / dimension] * a[k % dimension].conj())
            .collect();
        Self { dimension, entries }
    }

    pub fn maximally_mixed(dimension: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dimension * dimension];
        for i in 0..dimension {
            entries[i * dimension + i] = Complex64::new(1.0 / dimension as f64, 0.0);
        }
        Self { dimension, entries }
    }

    /// Convex combination `Σ wᵢ ρᵢ`; weights must be non-negative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(QStateError::InvalidDensity("empty mixture".into()));
        };
        let dimension = first.dimension;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, r)| *w < 0.0 || r.dimension != dimension)
            || (total - 1.0).abs() > DENSITY_TOLERANCE
        {
            return Err(QStateError::InvalidDensity("bad mixture weights".into()));
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); dimension * dimension];
        for (w, rho) in parts {
            for (e, x) in entries.iter_mut().zip(&rho.entries) {
                *e += x * *w;
            }
        }
        Ok(Self { dimension, entries })
    }

    /// `p·|Φ⁺⟩⟨Φ⁺| + (1−p)·I/4`.
    pub fn werner(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(QStateError::InvalidDensity(format!("werner weight {p}")));
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = QuantumRegister::from_amplitudes(
            2,
            vec![
                Complex64::new(h, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(h, 0.0),
            ],
        )?;
        let bell = Self::from_pure(&bell);
        Self::mixture(&[(p, &bell), (1.0 - p, &Self::maximally_mixed(4))])
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dimension + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dimension).map(|i| self.get(i, i)).sum()
    }

    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        let n = self.dimension;
        (0..n).all(|i| (i..n).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tolerance))
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(self.dimension, &self.entries)
    }

    /// Partial transpose over the second qubit of a two-qubit matrix.
    pub fn partial_transpose(&self) -> Result<Vec<Complex64>> {
        if self.dimension != 4 {
            return Err(QStateError::UnsupportedDimension(self.dimension));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); 16];
        for a in 0..2 {
            for b in 0..2 {
                for a2 in 0..2 {
                    for b2 in 0..2 {
                        out[(2 * a + b) * 4 + 2 * a2 + b2] = self.get(2 * a + b2, 2 * a2 + b);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Partial trace keeping `keep`, in the listed order (first entry most
/// significant in the reduced basis).
pub fn reduced_density(reg: &QuantumRegister, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(QStateError::EmptyKeep);
    }
    check_indices(keep, reg.qubit_count)?;
    let env: Vec<usize> = (0..reg.qubit_count).filter(|q| !keep.contains(q)).collect();
    let dim = 1usize << keep.len();
    let env_dim = 1usize << env.len();

    // Amplitudes regrouped as env_dim vectors of length dim.
    let mut blocks = vec![Complex64::new(0.0, 0.0); env_dim * dim];
    for (index, a) in reg.amplitudes.iter().enumerate() {
        let pick = |qs: &[usize]| {
            qs.iter()
                .fold(0usize, |acc, &q| (acc << 1) | usize::from(index & reg.qubit_mask(q) != 0))
        };
        blocks[pick(&env) * dim + pick(keep)] = *a;
    }
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for block in blocks.chunks(dim) {
        for i in 0..dim {
            if block[i] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dim {
                entries[i * dim + j] += block[i] * block[j].conj();
            }
        }
    }
    Ok(DensityMatrix {
        dimension: dim,
        entries,
    })
}

/// Peres–Horodecki test on a two-qubit density matrix; exact at this size.
pub fn ppt_separability(rho: &DensityMatrix) -> Result<PptReport> {
    let pt = rho.partial_transpose()?;
    let min_eigenvalue = hermitian_eigenvalues(4, &pt)[0];
    let verdict = if min_eigenvalue < -PPT_TOLERANCE {
        Separability::Entangled
    } else {
        Separability::Separable
    };
    Ok(PptReport {
        verdict,
        min_eigenvalue,
    })
}

/// `tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let n = rho.dimension;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (rho.get(i, j) * rho.get(j, i)).re;
        }
    }
    acc
}
