//! Memory-network constructions: ladders with skip overlays, m-adic loop
//! strings with their knot neurons, and resonance recall on a Hopfield grid.
//!
//! # Ladder dynamics
//!
//! A ladder has `rung_count` rungs joined by a stile `N → N+1`. Each overlay
//! of stride `k` is a further ladder acting on the first one: it carries the
//! same stile, and its connection from rung `N` to rung `N+k` closes a loop
//! over `k` consecutive rungs, realized as a return edge `N+k−1 → N`. Every
//! ladder is a separate track of the construct with its own activation
//! vector.
//!
//! Propagation runs in synchronous ticks. A rung of a track is active at
//! `t+1` iff some in-edge source of that track was active at `t`. All tracks
//! are seeded at rung 0. The period is read off the concatenated activation
//! vector once it starts repeating.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MemnetError {
    #[error("construction: {0}")]
    Construction(String),
    #[error("no period found within {steps} steps")]
    Aperiodic { steps: usize },
    #[error("argument: {0}")]
    Argument(String),
    #[error("unknown loop {0:?}")]
    UnknownLoop(String),
    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, MemnetError>;

/// Directed edge on one ladder track; `stride` is 1 for the base stile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub stride: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LadderNetwork {
    pub rung_count: usize,
    pub base_edges: Vec<(usize, usize)>,
    /// Skip values in insertion order.
    pub overlays: Vec<usize>,
    pub closed: bool,
}

pub fn build_ladder(rungs: usize, skips: &[usize], closed: bool) -> Result<LadderNetwork> {
    if rungs < 2 {
        return Err(MemnetError::Construction(format!(
            "a ladder needs at least 2 rungs, got {rungs}"
        )));
    }
    for &k in skips {
        if k < 2 {
            return Err(MemnetError::Construction(format!("skip {k} must be at least 2")));
        }
        if k >= rungs {
            return Err(MemnetError::Construction(format!(
                "skip {k} does not fit {rungs} rungs"
            )));
        }
    }
    if let Some(&max) = skips.iter().max() {
        if rungs < 2 * max {
            return Err(MemnetError::Construction(format!(
                "{rungs} rungs cannot hold two strides of {max}"
            )));
        }
    }
    let mut base_edges: Vec<(usize, usize)> = (0..rungs - 1).map(|n| (n, n + 1)).collect();
    if closed {
        base_edges.push((rungs - 1, 0));
    }
    Ok(LadderNetwork {
        rung_count: rungs,
        base_edges,
        overlays: skips.to_vec(),
        closed,
    })
}

impl LadderNetwork {
    /// Overlay connections `N → N+k` (wrapping when closed).
    pub fn overlay_edges(&self, k: usize) -> Vec<(usize, usize)> {
        let r = self.rung_count;
        if self.closed {
            (0..r).map(|n| (n, (n + k) % r)).collect()
        } else {
            (0..r.saturating_sub(k)).map(|n| (n, n + k)).collect()
        }
    }

    /// Every connection labelled by stride; insertion order does not matter.
    pub fn edge_set(&self) -> BTreeSet<Edge> {
        let base = self.base_edges.iter().map(|&(from, to)| Edge { stride: 1, from, to });
        let overlays = self.overlays.iter().flat_map(|&k| {
            self.overlay_edges(k)
                .into_iter()
                .map(move |(from, to)| Edge { stride: k, from, to })
        });
        base.chain(overlays).collect()
    }

    /// In-edge lists for each track: one track per overlay, or the bare
    /// stile when there are none.
    fn tracks(&self) -> Vec<Vec<Vec<usize>>> {
        let r = self.rung_count;
        let stile = || {
            let mut inputs = vec![Vec::new(); r];
            for &(from, to) in &self.base_edges {
                inputs[to].push(from);
            }
            inputs
        };
        if self.overlays.is_empty() {
            return vec![stile()];
        }
        self.overlays
            .iter()
            .map(|&k| {
                let mut inputs = stile();
                for (from, to) in self.overlay_edges(k) {
                    // The loop N → … → N+k−1 → N spans k rungs.
                    let back_from = if self.closed {
                        (to + r - 1) % r
                    } else {
                        to - 1
                    };
                    inputs[from].push(back_from);
                }
                inputs
            })
            .collect()
    }
}

/// Activation raster: `raster[t][track][rung]`, tracks seeded at rung 0.
pub fn propagate(net: &LadderNetwork, ticks: usize) -> Vec<Vec<Vec<bool>>> {
    let tracks = net.tracks();
    let mut state: Vec<Vec<bool>> = tracks
        .iter()
        .map(|_| {
            let mut v = vec![false; net.rung_count];
            v[0] = true;
            v
        })
        .collect();
    let mut raster = Vec::with_capacity(ticks + 1);
    raster.push(state.clone());
    for _ in 0..ticks {
        state = step(&tracks, &state);
        raster.push(state.clone());
    }
    raster
}

fn step(tracks: &[Vec<Vec<usize>>], state: &[Vec<bool>]) -> Vec<Vec<bool>> {
    tracks
        .iter()
        .zip(state)
        .map(|(inputs, active)| {
            inputs
                .iter()
                .map(|srcs| srcs.iter().any(|&s| active[s]))
                .collect()
        })
        .collect()
}

/// Smallest `P > 0` with `state(t+P) = state(t)` once the transient has passed.
pub fn measure_periodicity(net: &LadderNetwork) -> Result<usize> {
    let limit = (net.rung_count * net.rung_count).max(4 * net.rung_count);
    let tracks = net.tracks();
    let mut state: Vec<Vec<bool>> = tracks
        .iter()
        .map(|_| {
            let mut v = vec![false; net.rung_count];
            v[0] = true;
            v
        })
        .collect();
    let mut seen: HashMap<Vec<Vec<bool>>, usize> = HashMap::new();
    for t in 0..=limit {
        if let Some(first) = seen.insert(state.clone(), t) {
            return Ok(t - first);
        }
        state = step(&tracks, &state);
    }
    Err(MemnetError::Aperiodic { steps: limit })
}

/// Builds the ladder under every insertion order of `skips` and reports
/// whether all orders give the same period.
pub fn history_independence_check(rungs: usize, skips: &[usize]) -> Result<bool> {
    if skips.len() < 2 {
        return Err(MemnetError::Argument(
            "history independence needs at least two overlays".into(),
        ));
    }
    let mut periods = BTreeSet::new();
    for order in skips.iter().copied().permutations(skips.len()) {
        let net = build_ladder(rungs, &order, false)?;
        periods.insert(measure_periodicity(&net)?);
    }
    Ok(periods.len() == 1)
}

/// Partial geometric sums `Σ_{j≤i} baseʲ` for `i = 0..count`.
///
/// Base 2 gives the knot neurons 1, 3, 7, 15, …; the symbolic form
/// `N^(m−1) + … + N + 1` corresponds to choosing `base = N`.
pub fn madic_knot_positions(base: u64, count: usize) -> Result<Vec<u64>> {
    if base < 2 {
        return Err(MemnetError::Argument(format!("base {base} must be at least 2")));
    }
    if count == 0 {
        return Err(MemnetError::Argument("count must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(count);
    let (mut sum, mut power) = (0u64, 1u64);
    for i in 0..count {
        sum = sum
            .checked_add(power)
            .ok_or_else(|| MemnetError::Overflow(format!("knot {i} in base {base}")))?;
        out.push(sum);
        if i + 1 < count {
            power = power
                .checked_mul(base)
                .ok_or_else(|| MemnetError::Overflow(format!("power {} of {base}", i + 1)))?;
        }
    }
    Ok(out)
}

/// `2 + 2N`, exposed as stated without a propagation model behind it.
pub fn triadic_period(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(MemnetError::Argument("N must be at least 1".into()));
    }
    n.checked_mul(2)
        .and_then(|v| v.checked_add(2))
        .ok_or_else(|| MemnetError::Overflow(format!("2 + 2*{n}")))
}

/// Concatenated loops sharing a knot neuron between neighbours.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopString {
    pub loops: Vec<u64>,
    pub knot_neurons: Vec<u64>,
    pub m: u32,
}

impl LoopString {
    pub fn new(loops: Vec<u64>, knot_neurons: Vec<u64>, m: u32) -> Result<Self> {
        if !knot_neurons.windows(2).all(|w| w[0] < w[1]) {
            return Err(MemnetError::Construction(
                "knot positions must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            loops,
            knot_neurons,
            m,
        })
    }

    /// String whose knots sit at the geometric-sum positions; each loop spans
    /// the gap between consecutive knots.
    pub fn madic(base: u64, knots: usize, m: u32) -> Result<Self> {
        let knot_neurons = madic_knot_positions(base, knots)?;
        let loops = knot_neurons.windows(2).map(|w| w[1] - w[0]).collect();
        Self::new(loops, knot_neurons, m)
    }
}

/// Positive rational frequency in Hz; written as `"10"` or `"5/2"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Frequency(pub Ratio<u64>);

impl Frequency {
    pub fn hz(n: u64) -> Self {
        Self(Ratio::from_integer(n))
    }

    /// One frequency is an integer multiple of the other.
    pub fn resonates_with(&self, other: &Self) -> bool {
        let r = self.0 / other.0;
        r.is_integer() || r.recip().is_integer()
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Frequency {
    type Err = MemnetError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || MemnetError::Argument(format!("invalid frequency {s:?}"));
        let r = match s.trim().split_once('/') {
            Some((n, d)) => {
                let n: u64 = n.trim().parse().map_err(|_| bad())?;
                let d: u64 = d.trim().parse().map_err(|_| bad())?;
                if d == 0 {
                    return Err(bad());
                }
                Ratio::new(n, d)
            }
            None => Ratio::from_integer(s.trim().parse().map_err(|_| bad())?),
        };
        if r == Ratio::from_integer(0) {
            return Err(MemnetError::Argument("frequency must be positive".into()));
        }
        Ok(Self(r))
    }
}

impl Serialize for Frequency {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Frequency {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Int(n) => n.to_string(),
            Raw::Text(s) => s,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridLoop {
    pub id: String,
    pub frequency: Frequency,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intersection {
    pub row: String,
    pub column: String,
    pub knot: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HopfieldGrid {
    pub rows: Vec<GridLoop>,
    pub columns: Vec<GridLoop>,
    #[serde(default)]
    pub intersections: Vec<Intersection>,
}

impl HopfieldGrid {
    pub fn new(rows: Vec<GridLoop>, columns: Vec<GridLoop>, intersections: Vec<Intersection>) -> Result<Self> {
        let grid = Self {
            rows,
            columns,
            intersections,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        for l in self.rows.iter().chain(&self.columns) {
            if !ids.insert(l.id.as_str()) {
                return Err(MemnetError::Construction(format!("loop id {:?} used twice", l.id)));
            }
        }
        for x in &self.intersections {
            if !self.rows.iter().any(|r| r.id == x.row) {
                return Err(MemnetError::Construction(format!(
                    "knot {:?}: {:?} is not a row",
                    x.knot, x.row
                )));
            }
            if !self.columns.iter().any(|c| c.id == x.column) {
                return Err(MemnetError::Construction(format!(
                    "knot {:?}: {:?} is not a column",
                    x.knot, x.column
                )));
            }
        }
        Ok(())
    }

    fn frequency(&self, id: &str) -> Option<Frequency> {
        self.rows
            .iter()
            .chain(&self.columns)
            .find(|l| l.id == id)
            .map(|l| l.frequency)
    }

    fn neighbours<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.intersections.iter().filter_map(move |x| {
            if x.row == id {
                Some(x.column.as_str())
            } else if x.column == id {
                Some(x.row.as_str())
            } else {
                None
            }
        })
    }
}

/// Loops reachable from `stimulated` through intersections whose two loops
/// differ by an integer frequency ratio.
pub fn resonance_recall(grid: &HopfieldGrid, stimulated: &str) -> Result<BTreeSet<String>> {
    if grid.frequency(stimulated).is_none() {
        return Err(MemnetError::UnknownLoop(stimulated.to_owned()));
    }
    let mut active = BTreeSet::from([stimulated.to_owned()]);
    let mut queue = VecDeque::from([stimulated.to_owned()]);
    while let Some(id) = queue.pop_front() {
        let f = grid.frequency(&id).expect("validated");
        for n in grid.neighbours(&id) {
            let g = grid.frequency(n).expect("validated");
            if f.resonates_with(&g) && active.insert(n.to_owned()) {
                queue.push_back(n.to_owned());
            }
        }
    }
    Ok(active)
}

/// A knot fires when all feeder phases coincide.
pub fn knot_fire(feeder_phases: &[u64]) -> bool {
    match feeder_phases.split_first() {
        Some((first, rest)) => rest.iter().all(|p| p == first),
        None => false,
    }
}

/// A feeder loop delivering one pulse per period to a knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnotFeeder {
    pub period: u64,
    #[serde(default)]
    pub offset: u64,
}

impl KnotFeeder {
    pub fn phase_at(&self, tick: u64) -> u64 {
        (tick + self.offset) % self.period
    }
}

/// Ticks in `0..ticks` on which the knot fires.
///
/// The knot evaluates [`knot_fire`] on ticks where at least one feeder
/// delivers its pulse (phase 0).
pub fn knot_fire_ticks(feeders: &[KnotFeeder], ticks: u64) -> Result<Vec<u64>> {
    if feeders.is_empty() || feeders.iter().any(|f| f.period == 0) {
        return Err(MemnetError::Argument("knot needs feeders with positive periods".into()));
    }
    Ok((0..ticks)
        .filter(|&t| {
            let phases: Vec<u64> = feeders.iter().map(|f| f.phase_at(t)).collect();
            phases.contains(&0) && knot_fire(&phases)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_with_two_overlays() {
        let net = build_ladder(12, &[3, 2], false).unwrap();
        assert_eq!(net.overlays, vec![3, 2]);
        assert_eq!(net.base_edges.len(), 11);
        assert_eq!(net.edge_set().len(), 11 + 9 + 10);
        assert_eq!(net.edge_set(), build_ladder(12, &[2, 3], false).unwrap().edge_set());
    }

    #[test]
    fn plain_ladder() {
        let net = build_ladder(6, &[], false).unwrap();
        assert!(net.overlays.is_empty());
        assert_eq!(net.edge_set().len(), 5);
        // The stile alone is a feed-forward chain: the pulse runs off the end.
        assert_eq!(measure_periodicity(&net).unwrap(), 1);
    }

    #[test]
    fn construction_errors() {
        assert!(build_ladder(12, &[12], false).is_err());
        assert!(build_ladder(12, &[1], false).is_err());
        assert!(build_ladder(5, &[3], false).is_err());
    }

    #[test]
    fn closed_ladder_wraps() {
        let net = build_ladder(6, &[2], true).unwrap();
        assert!(net.edge_set().contains(&Edge { stride: 2, from: 5, to: 1 }));
        assert!(net.edge_set().contains(&Edge { stride: 1, from: 5, to: 0 }));
        assert_eq!(measure_periodicity(&net).unwrap(), 2);
    }

    #[test]
    fn periodicity_examples() {
        let p = |rungs, skips: &[usize]| measure_periodicity(&build_ladder(rungs, skips, false).unwrap()).unwrap();
        assert_eq!(p(12, &[3, 2]), 6);
        assert_eq!(p(12, &[2]), 2);
        assert_eq!(p(48, &[4, 6]), 12);
    }

    #[test]
    fn history_independence_examples() {
        assert!(history_independence_check(12, &[3, 2]).unwrap());
        assert!(history_independence_check(12, &[2, 2]).unwrap());
        assert!(history_independence_check(24, &[2, 3, 4]).unwrap());
        assert!(history_independence_check(12, &[3]).is_err());
    }

    #[test]
    fn knot_positions() {
        assert_eq!(madic_knot_positions(2, 3).unwrap(), vec![1, 3, 7]);
        assert_eq!(madic_knot_positions(2, 4).unwrap(), vec![1, 3, 7, 15]);
        assert_eq!(madic_knot_positions(3, 3).unwrap(), vec![1, 4, 13]);
        assert!(madic_knot_positions(1, 3).is_err());
        assert!(matches!(madic_knot_positions(2, 70), Err(MemnetError::Overflow(_))));
    }

    #[test]
    fn loop_string_from_knots() {
        let s = LoopString::madic(2, 4, 3).unwrap();
        assert_eq!(s.loops, vec![2, 4, 8]);
        assert!(LoopString::new(vec![], vec![3, 3], 3).is_err());
    }

    #[test]
    fn triadic_formula() {
        assert_eq!(triadic_period(1).unwrap(), 4);
        assert_eq!(triadic_period(2).unwrap(), 6);
        assert_eq!(triadic_period(10).unwrap(), 22);
        assert!(triadic_period(0).is_err());
    }

    fn lp(id: &str, f: &str) -> GridLoop {
        GridLoop {
            id: id.into(),
            frequency: f.parse().unwrap(),
        }
    }

    fn knot(row: &str, column: &str) -> Intersection {
        Intersection {
            row: row.into(),
            column: column.into(),
            knot: format!("{row}x{column}"),
        }
    }

    #[test]
    fn recall_single_loop() {
        let grid = HopfieldGrid::new(vec![lp("r", "10")], vec![], vec![]).unwrap();
        assert_eq!(resonance_recall(&grid, "r").unwrap(), BTreeSet::from(["r".to_owned()]));
        assert!(matches!(resonance_recall(&grid, "x"), Err(MemnetError::UnknownLoop(_))));
    }

    #[test]
    fn recall_integer_ratio_only() {
        let grid = HopfieldGrid::new(
            vec![lp("r", "10")],
            vec![lp("c20", "20"), lp("c15", "15")],
            vec![knot("r", "c20"), knot("r", "c15")],
        )
        .unwrap();
        let got = resonance_recall(&grid, "r").unwrap();
        assert_eq!(got, BTreeSet::from(["r".to_owned(), "c20".to_owned()]));
    }

    #[test]
    fn recall_chain_of_two_hops() {
        let grid = HopfieldGrid::new(
            vec![lp("r1", "10"), lp("r2", "60")],
            vec![lp("c", "30")],
            vec![knot("r1", "c"), knot("r2", "c")],
        )
        .unwrap();
        assert_eq!(resonance_recall(&grid, "r1").unwrap().len(), 3);
    }

    #[test]
    fn rational_frequencies() {
        let a: Frequency = "5/2".parse().unwrap();
        let b: Frequency = "15/2".parse().unwrap();
        assert!(a.resonates_with(&b));
        assert!(!a.resonates_with(&Frequency::hz(4)));
        assert!("0".parse::<Frequency>().is_err());
        assert!("1/0".parse::<Frequency>().is_err());
    }

    #[test]
    fn grid_rejects_dangling_intersection() {
        let err = HopfieldGrid::new(vec![lp("r", "1")], vec![], vec![knot("r", "c")]);
        assert!(err.is_err());
    }

    #[test]
    fn knot_fire_examples() {
        assert!(knot_fire(&[0, 0, 0]));
        assert!(!knot_fire(&[0, 1, 0]));
        let feeders = [KnotFeeder { period: 2, offset: 0 }, KnotFeeder { period: 3, offset: 0 }];
        // Enumerated by hand over 12 ticks: only 0 and 6 see both pulses.
        assert_eq!(knot_fire_ticks(&feeders, 12).unwrap(), vec![0, 6]);
    }
}
