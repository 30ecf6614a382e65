//! Markov chain over the numbers of operating MCUs and sensors.
//!
//! States are ordered as blocks of descending sensor count, and within a
//! block by descending MCU count:
//! `(N_M,N_S), (N_M-1,N_S), ..., (0,N_S), (N_M,N_S-1), ..., (0,0)`.
//! Every transition moves to a later state, so the generator is strictly
//! upper triangular off the diagonal.

mod dot;
mod uniformization;

use rayon::prelude::*;

use crate::analysis::{ReliabilityCurve, SolverTag};
use crate::architecture::ArchitectureSpec;
use crate::error::{Error, Result};

pub use dot::export_dot;
pub use uniformization::solve_transient;

/// `m` operating MCUs and `s` operating sensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SystemState {
    pub m: u32,
    pub s: u32,
}

impl SystemState {
    pub const fn new(m: u32, s: u32) -> Self {
        Self { m, s }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    n_mcus: u32,
    n_sensors: u32,
    states: Vec<SystemState>,
}

impl StateSpace {
    pub fn new(n_mcus: u32, n_sensors: u32) -> Self {
        let states = (0..=n_sensors)
            .rev()
            .flat_map(|s| (0..=n_mcus).rev().map(move |m| SystemState { m, s }))
            .collect();
        Self {
            n_mcus,
            n_sensors,
            states,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[SystemState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> SystemState {
        self.states[index]
    }

    pub fn n_mcus(&self) -> u32 {
        self.n_mcus
    }

    pub fn n_sensors(&self) -> u32 {
        self.n_sensors
    }

    pub fn index_of(&self, state: SystemState) -> Option<usize> {
        if state.m > self.n_mcus || state.s > self.n_sensors {
            return None;
        }
        let block = (self.n_sensors - state.s) as usize;
        Some(block * (self.n_mcus as usize + 1) + (self.n_mcus - state.m) as usize)
    }

    /// Index of the all-operating state `(N_M, N_S)`.
    pub fn initial_index(&self) -> usize {
        0
    }

    /// A distribution with all mass on `(N_M, N_S)` at `t = 0`.
    pub fn initial_distribution(&self) -> ProbabilityVector {
        let mut values = vec![0.0; self.len()];
        values[self.initial_index()] = 1.0;
        ProbabilityVector { values, time: 0.0 }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, SystemState)> + '_ {
        self.states.iter().copied().enumerate()
    }
}

/// `(N_M+1)(N_S+1)` states of `spec` in the canonical order.
pub fn enumerate_states(spec: &ArchitectureSpec) -> StateSpace {
    StateSpace::new(spec.n_mcus(), spec.n_sensors())
}

/// Sparse transition-rate matrix (h⁻¹), row-compressed.
///
/// Rows hold the off-diagonal entries sorted by column. The diagonal is kept
/// separately and always equals minus the off-diagonal row sum.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    rates: Vec<f64>,
    diagonal: Vec<f64>,
}

impl GeneratorMatrix {
    /// Assembles a generator from off-diagonal `(row, col, rate)` entries.
    /// Duplicate entries are summed.
    pub fn from_entries(dim: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for &(row, col, rate) in entries {
            if row >= dim || col >= dim {
                return Err(Error::InvalidArgument(format!(
                    "entry ({row},{col}) outside a {dim}x{dim} generator"
                )));
            }
            if row == col {
                return Err(Error::InvalidArgument(format!(
                    "diagonal entry ({row},{col}) must not be given explicitly"
                )));
            }
            if !(rate.is_finite() && rate >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "rate {rate} at ({row},{col}) is not a finite non-negative number"
                )));
            }
            sorted.push((row, col, rate));
        }
        sorted.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(sorted.len());
        let mut rates: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut diagonal = vec![0.0; dim];
        let mut last: Option<(usize, usize)> = None;
        for (row, col, rate) in sorted {
            if rate == 0.0 {
                continue;
            }
            if last == Some((row, col)) {
                *rates.last_mut().unwrap() += rate;
            } else {
                cols.push(col);
                rates.push(rate);
                row_ptr[row + 1] += 1;
                last = Some((row, col));
            }
            diagonal[row] -= rate;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            row_ptr,
            cols,
            rates,
            diagonal,
        })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self, row: usize) -> f64 {
        self.diagonal[row]
    }

    /// Off-diagonal `(col, rate)` pairs of `row`.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.rates[span].iter().copied())
    }

    /// All off-diagonal `(row, col, rate)` entries in row-major order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim()).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn nnz_off_diagonal(&self) -> usize {
        self.cols.len()
    }

    /// Largest total departure rate over all states.
    pub fn max_exit_rate(&self) -> f64 {
        self.diagonal.iter().fold(0.0_f64, |acc, d| acc.max(-d))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        if row == col {
            return self.diagonal[row];
        }
        self.row(row)
            .find(|&(c, _)| c == col)
            .map_or(0.0, |(_, v)| v)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| self.get(r, c)).collect())
            .collect()
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.off_diagonal().all(|(r, c, _)| c > r)
    }
}

/// Generator of the failure process: state `(m,s)` moves to `(m-1,s)` at
/// rate `m·λ_M` and to `(m,s-1)` at rate `s·λ_S`.
pub fn build_generator(spec: &ArchitectureSpec, states: &StateSpace) -> GeneratorMatrix {
    let mut entries = Vec::with_capacity(2 * states.len());
    for (i, state) in states.iter() {
        if state.m > 0 {
            let to = states.index_of(SystemState::new(state.m - 1, state.s)).unwrap();
            entries.push((i, to, f64::from(state.m) * spec.lambda_mcu()));
        }
        if state.s > 0 {
            let to = states.index_of(SystemState::new(state.m, state.s - 1)).unwrap();
            entries.push((i, to, f64::from(state.s) * spec.lambda_sensor()));
        }
    }
    GeneratorMatrix::from_entries(states.len(), &entries)
        .expect("failure transitions are in range with positive rates")
}

/// State probabilities at time `time` (hours), aligned to a [`StateSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    values: Vec<f64>,
    time: f64,
}

/// Tolerance on `Σ p = 1` accepted by [`ProbabilityVector::new`].
pub const SUM_TOLERANCE: f64 = 1e-12;

impl ProbabilityVector {
    pub fn new(values: Vec<f64>, time: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} = {v} is outside [0, 1]"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        if !(time.is_finite() && time >= 0.0) {
            return Err(Error::InvalidArgument(format!("time {time} must be finite and >= 0")));
        }
        Ok(Self { values, time })
    }

    pub(crate) fn from_raw(values: Vec<f64>, time: f64) -> Self {
        Self { values, time }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Probability mass on the operational states `m ≥ M, s ≥ S`,
/// which for this failure-only process is the survival probability.
pub fn reliability_at(spec: &ArchitectureSpec, states: &StateSpace, p: &ProbabilityVector) -> f64 {
    debug_assert_eq!(states.len(), p.len());
    let r: f64 = states
        .iter()
        .filter(|(_, st)| is_operational(spec, *st))
        .map(|(i, _)| p.values[i])
        .sum();
    r.clamp(0.0, 1.0)
}

pub fn is_operational(spec: &ArchitectureSpec, state: SystemState) -> bool {
    state.m >= spec.m_required() && state.s >= spec.s_required()
}

/// `R(t)` at a single time, starting with every component operating.
pub fn reliability(spec: &ArchitectureSpec, t: f64, eps: f64) -> Result<f64> {
    let states = enumerate_states(spec);
    let generator = build_generator(spec, &states);
    let p = solve_transient(&generator, &states.initial_distribution(), t, eps)?;
    Ok(reliability_at(spec, &states, &p))
}

/// `R(t)` on `t_grid`. Every point is solved from `t = 0`, so the values do
/// not depend on the grid or on evaluation order.
pub fn sample_curve(spec: &ArchitectureSpec, t_grid: &[f64], eps: f64) -> Result<ReliabilityCurve> {
    crate::analysis::check_grid(t_grid)?;
    let states = enumerate_states(spec);
    let generator = build_generator(spec, &states);
    let p0 = states.initial_distribution();
    let values = t_grid
        .par_iter()
        .map(|&t| {
            solve_transient(&generator, &p0, t, eps).map(|p| reliability_at(spec, &states, &p))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReliabilityCurve::new(
        spec.label(),
        t_grid.to_vec(),
        values,
        SolverTag::Ctmc,
    ))
}
