//! CIF-UCB: optimistic endpoint selection over an adaptively refined
//! partition of (0, 1].
//!
//! Each active cell (x, y] keeps the history of the rounds in which it was
//! the selected cell. From that history it estimates Λ(y) by dividing the
//! detected counts left of y by the effective number of samples
//! S = Σ γ(b_τ). The cell index is
//!
//! ```text
//! I(x, y) = γ(y)·Λ̄(y) + m·(y − x) + γ(y)·ζ(S)
//! ```
//!
//! and the round's sweep endpoint is the right end of the cell with the
//! largest index. Once m·(y − x) ≥ ζ the cell is halved and both children
//! inherit the parent's history restricted to their own interval.
//!
//! Only the selected cell changes in a round, so the other cells' indices
//! are unchanged. Indices live in a max-heap with lazy invalidation. Each
//! slot carries a generation counter, and a heap entry whose generation no
//! longer matches its slot is stale and is dropped when it reaches the top.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::Rng;

use crate::environment::{self, FppbInstance, SweepObservation};
use crate::error::{Error, Result};
use crate::process::FilterModel;

/// Indices within this distance of the maximum are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// The confidence width ζ as a function of the effective sample count S:
///
/// ```text
/// ζ(S) = c·max(1, λ_max)·ln T / S + sqrt(c·λ_max·ln T / S),   ζ(0) = +∞
/// ```
///
/// with c = 6 by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceWidth {
    scale: f64,
    lambda_max: f64,
    log_horizon: f64,
}

impl ConfidenceWidth {
    pub const DEFAULT_SCALE: f64 = 6.0;

    /// Width for horizon `horizon`. Horizons below 2 use ln 2, since ln 1 = 0
    /// would make every sampled cell infinitely confident.
    pub fn new(lambda_max: f64, horizon: f64) -> Self {
        Self { scale: Self::DEFAULT_SCALE, lambda_max, log_horizon: horizon.max(2.0).ln() }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn width(&self, effective_samples: f64) -> f64 {
        if !(effective_samples > 0.0) {
            return f64::INFINITY;
        }
        let c = self.scale * self.log_horizon;
        c * self.lambda_max.max(1.0) / effective_samples + (c * self.lambda_max / effective_samples).sqrt()
    }

    /// Lower bound on the effective samples a child of length `child_len`
    /// inherits, implied by the division rule having fired on its parent:
    /// m·2ℓ ≥ ζ(S) ≥ sqrt(c·λ_max·ln T / S).
    pub fn split_sample_bound(&self, m: f64, child_len: f64) -> f64 {
        self.scale * self.lambda_max * self.log_horizon / (4.0 * m * m * child_len * child_len)
    }
}

/// ζ with the default constant: 6·max(1, λ_max)·ln T/S + sqrt(6·λ_max·ln T/S).
pub fn compute_zeta(effective_samples: f64, lambda_max: f64, horizon: f64) -> f64 {
    if !(effective_samples > 0.0) {
        return f64::INFINITY;
    }
    let c = ConfidenceWidth::DEFAULT_SCALE * horizon.ln();
    c * lambda_max.max(1.0) / effective_samples + (c * lambda_max / effective_samples).sqrt()
}

/// One round's contribution to a cell: the sweep endpoint, the number of
/// detections at or left of the cell's left end, and the detections inside
/// the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub round: usize,
    pub sweep_endpoint: f64,
    pub left_offset: u32,
    pub in_cell: Vec<f64>,
}

impl SweepRecord {
    /// Split a sweep observation over the cell (x, y].
    pub fn from_observation(obs: &SweepObservation, x: f64, y: f64) -> Self {
        let left = obs.detected.count_le(x);
        let upto = obs.detected.count_le(y);
        Self {
            round: obs.round,
            sweep_endpoint: obs.endpoint,
            left_offset: left as u32,
            in_cell: obs.detected.locations()[left..upto.max(left)].to_vec(),
        }
    }

    /// Z_τ(y): detections left of the cell's right end.
    pub fn count_to_right_end(&self) -> u64 {
        self.left_offset as u64 + self.in_cell.len() as u64
    }
}

#[derive(Debug, Clone, Copy)]
struct StoredRecord {
    round: u32,
    left_offset: u32,
    sweep_endpoint: f64,
    start: u32,
    len: u32,
}

/// Borrowed view of a record held by a [`Cell`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordView<'a> {
    pub round: usize,
    pub sweep_endpoint: f64,
    pub left_offset: u32,
    pub in_cell: &'a [f64],
}

impl RecordView<'_> {
    pub fn count_to_right_end(&self) -> u64 {
        self.left_offset as u64 + self.in_cell.len() as u64
    }
}

/// An interval (x, y] with its sweep history and estimator state.
#[derive(Debug, Clone)]
pub struct Cell {
    x: f64,
    y: f64,
    records: Vec<StoredRecord>,
    locations: Vec<f64>,
    effective_samples: f64,
    count_sum: u64,
    lambda_hat: f64,
    zeta: f64,
    index: f64,
}

impl Cell {
    /// A cell with no history.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(0.0 <= x && x < y && y <= 1.0) {
            return Err(Error::Consistency(format!("cell ({x}, {y}] is not a subinterval of (0, 1]")));
        }
        Ok(Self {
            x,
            y,
            records: Vec::new(),
            locations: Vec::new(),
            effective_samples: 0.0,
            count_sum: 0,
            lambda_hat: 0.0,
            zeta: f64::INFINITY,
            index: 0.0,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn len(&self) -> f64 {
        self.y - self.x
    }

    /// S = Σ γ(b_τ) over the recorded sweeps.
    pub fn effective_samples(&self) -> f64 {
        self.effective_samples
    }

    /// Λ̄(y); zero before any sweep.
    pub fn lambda_hat(&self) -> f64 {
        self.lambda_hat
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn index(&self) -> f64 {
        self.index
    }

    /// Σ Z_τ(y) over the recorded sweeps.
    pub fn count_sum(&self) -> u64 {
        self.count_sum
    }

    pub fn sweeps(&self) -> usize {
        self.records.len()
    }

    pub fn records(&self) -> impl Iterator<Item = RecordView<'_>> + '_ {
        self.records.iter().map(move |r| RecordView {
            round: r.round as usize,
            sweep_endpoint: r.sweep_endpoint,
            left_offset: r.left_offset,
            in_cell: &self.locations[r.start as usize..(r.start + r.len) as usize],
        })
    }

    /// S recomputed from the records.
    pub fn recompute_effective_samples(&self, filter: &FilterModel) -> f64 {
        self.records.iter().map(|r| filter.gamma_unchecked(r.sweep_endpoint)).sum()
    }

    /// Λ̄(y) recomputed from the records.
    pub fn recompute_lambda_hat(&self, filter: &FilterModel) -> f64 {
        let s = self.recompute_effective_samples(filter);
        let z: u64 = self.records().map(|r| r.count_to_right_end()).sum();
        if s > 0.0 {
            z as f64 / s
        } else {
            0.0
        }
    }

    /// Append a sweep record and refresh S, Λ̄ and ζ. The index is left to
    /// the caller.
    pub fn update(&mut self, record: SweepRecord, filter: &FilterModel, width: &ConfidenceWidth) -> Result<()> {
        if record.sweep_endpoint < self.y {
            return Err(Error::Consistency(format!(
                "sweep to {} does not cover cell ({}, {}]",
                record.sweep_endpoint, self.x, self.y
            )));
        }
        if record.in_cell.iter().any(|&p| !(p > self.x && p <= self.y)) {
            return Err(Error::Consistency(format!("record has locations outside ({}, {}]", self.x, self.y)));
        }
        if record.in_cell.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Consistency("record locations not sorted".into()));
        }
        let z = record.count_to_right_end();
        self.records.push(StoredRecord {
            round: record.round as u32,
            left_offset: record.left_offset,
            sweep_endpoint: record.sweep_endpoint,
            start: self.locations.len() as u32,
            len: record.in_cell.len() as u32,
        });
        self.locations.extend_from_slice(&record.in_cell);
        self.effective_samples += filter.gamma_unchecked(record.sweep_endpoint);
        self.count_sum += z;
        self.refresh_estimate(width);
        Ok(())
    }

    fn refresh_estimate(&mut self, width: &ConfidenceWidth) {
        self.lambda_hat = if self.effective_samples > 0.0 {
            self.count_sum as f64 / self.effective_samples
        } else {
            0.0
        };
        self.zeta = width.width(self.effective_samples);
    }

    /// Halve the cell at its midpoint. Each child gets every parent record
    /// restricted to its own interval; the right child's left offset absorbs
    /// the parent's detections in (x, mid]. Both children keep the parent's S.
    pub fn split(&self, width: &ConfidenceWidth) -> (Cell, Cell) {
        let mid = 0.5 * (self.x + self.y);
        let mut left = Cell::new(self.x, mid).expect("midpoint inside parent");
        let mut right = Cell::new(mid, self.y).expect("midpoint inside parent");
        left.records.reserve(self.records.len());
        right.records.reserve(self.records.len());
        for r in self.records() {
            let k = r.in_cell.partition_point(|&p| p <= mid);
            for (child, left_offset, part) in [
                (&mut left, r.left_offset, &r.in_cell[..k]),
                (&mut right, r.left_offset + k as u32, &r.in_cell[k..]),
            ] {
                child.records.push(StoredRecord {
                    round: r.round as u32,
                    left_offset,
                    sweep_endpoint: r.sweep_endpoint,
                    start: child.locations.len() as u32,
                    len: part.len() as u32,
                });
                child.locations.extend_from_slice(part);
                child.count_sum += left_offset as u64 + part.len() as u64;
            }
        }
        for child in [&mut left, &mut right] {
            child.effective_samples = self.effective_samples;
            child.refresh_estimate(width);
        }
        (left, right)
    }
}

/// γ(y)·Λ̄(y) + m·(y − x) + γ(y)·ζ, or m·(y − x) for a cell with no samples.
pub fn compute_index(cell: &Cell, m: f64, gamma_at_y: f64) -> f64 {
    if cell.effective_samples > 0.0 {
        gamma_at_y * cell.lambda_hat + m * cell.len() + gamma_at_y * cell.zeta
    } else {
        m * cell.len()
    }
}

#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    index: f64,
    slot: usize,
    generation: u64,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.index
            .total_cmp(&other.index)
            .then_with(|| other.slot.cmp(&self.slot))
            .then_with(|| self.generation.cmp(&other.generation))
    }
}

/// Index assigned to cells that have never been swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColdStart {
    /// m·(y − x); the initial (0, 1] cell starts at m.
    Lipschitz,
    /// +∞, so every unsampled cell is swept once before any resweep.
    Infinite,
}

/// Everything logged when a cell is divided.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitEvent {
    pub round: usize,
    pub x: f64,
    pub y: f64,
    pub mid: f64,
    /// m·(y − x) at split time.
    pub lipschitz_term: f64,
    /// ζ at split time, after the round's update.
    pub zeta: f64,
    pub effective_samples: f64,
    /// Lower bound on S that each child must satisfy.
    pub child_sample_bound: f64,
    pub parent_lambda_hat: f64,
    pub left_lambda_hat: f64,
    pub right_lambda_hat: f64,
}

/// What happened in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayedRound {
    pub round: usize,
    pub a: f64,
    pub b: f64,
    pub reward: u64,
    pub split: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CifUcbOptions {
    pub confidence_scale: f64,
    pub cold_start: ColdStart,
    pub splitting: bool,
    /// Also feed each round's detections to every active cell lying
    /// entirely left of the sweep endpoint. Off by default: only the
    /// selected cell learns from a sweep.
    pub share_left_sweeps: bool,
}

impl Default for CifUcbOptions {
    fn default() -> Self {
        Self {
            confidence_scale: ConfidenceWidth::DEFAULT_SCALE,
            cold_start: ColdStart::Lipschitz,
            splitting: true,
            share_left_sweeps: false,
        }
    }
}

/// Algorithm state: the active partition, the index heap and the split log.
#[derive(Debug, Clone)]
pub struct CifUcb {
    filter: FilterModel,
    m: f64,
    width: ConfidenceWidth,
    horizon: usize,
    options: CifUcbOptions,
    slots: Vec<Option<Cell>>,
    generations: Vec<u64>,
    // keyed by the bit pattern of x, which orders nonnegative floats
    active: BTreeMap<u64, usize>,
    heap: BinaryHeap<HeapEntry>,
    round: usize,
    splits: Vec<SplitEvent>,
}

impl CifUcb {
    /// Fresh state with the single active cell (0, 1] at index m.
    pub fn new(instance: &FppbInstance) -> Self {
        Self::with_options(instance, CifUcbOptions::default())
    }

    pub fn with_options(instance: &FppbInstance, options: CifUcbOptions) -> Self {
        Self::with_partition(instance, options, &[0.0, 1.0])
    }

    /// Non-adaptive variant over `k` equal cells; unswept cells have
    /// infinite index and cells never divide.
    pub fn fixed_grid(instance: &FppbInstance, k: usize, confidence_scale: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInstance("fixed grid needs K >= 1".into()));
        }
        let edges: Vec<f64> = (0..=k).map(|i| if i == k { 1.0 } else { i as f64 / k as f64 }).collect();
        let options = CifUcbOptions {
            confidence_scale,
            cold_start: ColdStart::Infinite,
            splitting: false,
            share_left_sweeps: false,
        };
        Ok(Self::with_partition(instance, options, &edges))
    }

    fn with_partition(instance: &FppbInstance, options: CifUcbOptions, edges: &[f64]) -> Self {
        let width = ConfidenceWidth::new(instance.lambda_max, instance.horizon as f64).with_scale(options.confidence_scale);
        let mut state = Self {
            filter: instance.filter.clone(),
            m: instance.m,
            width,
            horizon: instance.horizon,
            options,
            slots: Vec::new(),
            generations: Vec::new(),
            active: BTreeMap::new(),
            heap: BinaryHeap::new(),
            round: 0,
            splits: Vec::new(),
        };
        for w in edges.windows(2) {
            let cell = Cell::new(w[0], w[1]).expect("valid partition");
            state.insert(cell);
        }
        state
    }

    pub fn width(&self) -> &ConfidenceWidth {
        &self.width
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn filter(&self) -> &FilterModel {
        &self.filter
    }

    /// Rounds played so far.
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn splits(&self) -> &[SplitEvent] {
        &self.splits
    }

    pub fn active_len(&self) -> usize {
        self.active.len()
    }

    /// Active cells ordered by left endpoint.
    pub fn cells(&self) -> impl Iterator<Item = &Cell> + '_ {
        self.active.values().map(move |&s| self.slots[s].as_ref().expect("active slot is occupied"))
    }

    /// Active cell in `slot`, if any.
    pub fn cell(&self, slot: usize) -> Option<&Cell> {
        self.slots.get(slot).and_then(Option::as_ref)
    }

    /// Index of `cell` under this state's cold-start rule.
    pub fn index_of(&self, cell: &Cell) -> f64 {
        if cell.effective_samples > 0.0 {
            compute_index(cell, self.m, self.filter.gamma_unchecked(cell.y))
        } else {
            match self.options.cold_start {
                ColdStart::Lipschitz => self.m * cell.len(),
                ColdStart::Infinite => f64::INFINITY,
            }
        }
    }

    fn insert(&mut self, mut cell: Cell) -> usize {
        cell.index = self.index_of(&cell);
        let slot = self.slots.len();
        self.active.insert(cell.x.to_bits(), slot);
        self.heap.push(HeapEntry { index: cell.index, slot, generation: 0 });
        self.slots.push(Some(cell));
        self.generations.push(0);
        slot
    }

    fn is_live(&self, entry: &HeapEntry) -> bool {
        self.slots[entry.slot].is_some() && self.generations[entry.slot] == entry.generation
    }

    /// Slot of the active cell with the largest index, ties (within
    /// [`TIE_TOLERANCE`]) broken uniformly at random. Leaves the heap holding
    /// every active cell.
    pub fn select_cell<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let mut tied: Vec<HeapEntry> = Vec::new();
        while let Some(&top) = self.heap.peek() {
            if !self.is_live(&top) {
                self.heap.pop();
                continue;
            }
            match tied.first() {
                Some(best) if !(top.index >= best.index - TIE_TOLERANCE) => break,
                _ => {}
            }
            tied.push(top);
            self.heap.pop();
        }
        let pick = match tied.len() {
            0 => panic!("index heap is empty; the active partition is never empty"),
            1 => 0,
            n => rng.random_range(0..n),
        };
        let slot = tied[pick].slot;
        self.heap.extend(tied);
        slot
    }

    /// Fold the round's observation into the cell in `slot` (the selected
    /// cell) and re-key it. No other cell is touched.
    pub fn ingest_observation(&mut self, slot: usize, obs: &SweepObservation) -> Result<()> {
        let cell = self.slots[slot]
            .as_mut()
            .ok_or_else(|| Error::Consistency(format!("slot {slot} is not active")))?;
        if obs.endpoint != cell.y {
            return Err(Error::Consistency(format!(
                "observation endpoint {} differs from selected cell end {}",
                obs.endpoint, cell.y
            )));
        }
        let record = SweepRecord::from_observation(obs, cell.x, cell.y);
        cell.update(record, &self.filter, &self.width)?;
        self.rekey(slot);
        Ok(())
    }

    fn rekey(&mut self, slot: usize) {
        let index = {
            let cell = self.slots[slot].as_ref().expect("occupied");
            self.index_of(cell)
        };
        self.slots[slot].as_mut().expect("occupied").index = index;
        self.generations[slot] += 1;
        self.heap.push(HeapEntry { index, slot, generation: self.generations[slot] });
    }

    /// Apply the division rule to the cell in `slot`: halve it when
    /// m·(y − x) ≥ ζ. Returns the children's slots.
    pub fn maybe_split(&mut self, slot: usize) -> Option<(usize, usize)> {
        if !self.options.splitting {
            return None;
        }
        let cell = self.slots[slot].as_ref()?;
        let lipschitz_term = self.m * cell.len();
        let mid = 0.5 * (cell.x + cell.y);
        if !(lipschitz_term >= cell.zeta) || !(mid > cell.x && mid < cell.y) {
            return None;
        }
        let (left, right) = cell.split(&self.width);
        let event = SplitEvent {
            round: self.round,
            x: cell.x,
            y: cell.y,
            mid,
            lipschitz_term,
            zeta: cell.zeta,
            effective_samples: cell.effective_samples,
            child_sample_bound: self.width.split_sample_bound(self.m, mid - cell.x),
            parent_lambda_hat: cell.lambda_hat,
            left_lambda_hat: left.lambda_hat,
            right_lambda_hat: right.lambda_hat,
        };
        self.splits.push(event);
        self.slots[slot] = None;
        self.active.remove(&left.x.to_bits());
        let l = self.insert(left);
        let r = self.insert(right);
        Some((l, r))
    }

    /// One full round: select, sweep, update, divide.
    pub fn play_round<R: Rng + ?Sized>(&mut self, instance: &FppbInstance, rng: &mut R) -> Result<PlayedRound> {
        self.round += 1;
        let slot = self.select_cell(rng);
        let (a, b) = {
            let c = self.slots[slot].as_ref().expect("selected slot is active");
            (c.x, c.y)
        };
        let obs = environment::sweep(instance, rng, b, self.round)?;
        self.ingest_observation(slot, &obs)?;
        if self.options.share_left_sweeps {
            let left: Vec<usize> = self.active.range(..a.to_bits()).map(|(_, &s)| s).collect();
            for s in left {
                let cell = self.slots[s].as_mut().expect("active slot is occupied");
                cell.update(SweepRecord::from_observation(&obs, cell.x, cell.y), &self.filter, &self.width)?;
                self.rekey(s);
            }
        }
        let split = self.maybe_split(slot).is_some();
        Ok(PlayedRound { round: self.round, a, b, reward: obs.reward, split })
    }

    /// Checks that the active cells tile (0, 1] exactly.
    pub fn check_partition(&self) -> Result<()> {
        let mut expected_x = 0.0;
        for cell in self.cells() {
            if cell.x != expected_x {
                return Err(Error::Consistency(format!("gap or overlap at {expected_x} (next cell starts at {})", cell.x)));
            }
            if !(cell.y > cell.x) {
                return Err(Error::Consistency(format!("empty cell at {}", cell.x)));
            }
            expected_x = cell.y;
        }
        if expected_x != 1.0 {
            return Err(Error::Consistency(format!("partition ends at {expected_x}")));
        }
        Ok(())
    }
}

/// One row of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub a: f64,
    pub b: f64,
    pub reward: u64,
    pub regret: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub optimum: (f64, f64),
    pub rows: Vec<RoundRecord>,
}

impl Trajectory {
    /// Running sum of the per-round pseudo-regret.
    pub fn cumulative_regret(&self) -> Vec<f64> {
        self.rows
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r.regret;
                Some(*acc)
            })
            .collect()
    }
}

/// Play `state` for the rest of the horizon, recording pseudo-regret.
pub fn run_state<R: Rng + ?Sized>(instance: &FppbInstance, state: &mut CifUcb, rng: &mut R) -> Result<Trajectory> {
    let optimum = instance.optimum();
    let mut rows = Vec::with_capacity(instance.horizon);
    while state.round() < instance.horizon {
        let r = state.play_round(instance, rng)?;
        rows.push(RoundRecord {
            round: r.round,
            a: r.a,
            b: r.b,
            reward: r.reward,
            regret: environment::per_round_regret(instance, optimum.1, r.b),
        });
    }
    Ok(Trajectory { optimum, rows })
}

/// Run CIF-UCB for the instance horizon; returns the trajectory and final state.
pub fn run<R: Rng + ?Sized>(instance: &FppbInstance, rng: &mut R) -> Result<(Trajectory, CifUcb)> {
    run_with(instance, CifUcbOptions::default(), rng)
}

pub fn run_with<R: Rng + ?Sized>(
    instance: &FppbInstance,
    options: CifUcbOptions,
    rng: &mut R,
) -> Result<(Trajectory, CifUcb)> {
    let mut state = CifUcb::with_options(instance, options);
    let traj = run_state(instance, &mut state, rng)?;
    Ok((traj, state))
}
