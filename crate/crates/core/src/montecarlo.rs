//! Monte Carlo estimate of `R(t)` from sampled component lifetimes.
//!
//! Run `r` reads its uniforms from a ChaCha8 stream keyed by the seed,
//! starting at word `r · 2 · (N_S + N_M)`. Every run therefore owns a fixed
//! slice of the keystream, and any partition of the runs across threads
//! produces the same estimates.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::check_grid;
use crate::architecture::ArchitectureSpec;
use crate::error::{Error, Result};

/// Recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng/rand_chacha-0.3 seed_from_u64, word offset run*2*(N_S+N_M)";

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.576;

const CHUNK_RUNS: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    runs: u64,
    seed: u64,
    t_grid: Vec<f64>,
}

impl McConfig {
    pub fn new(runs: u64, seed: u64, t_grid: Vec<f64>) -> Result<Self> {
        if runs == 0 {
            return Err(Error::InvalidArgument("runs must be >= 1".into()));
        }
        check_grid(&t_grid)?;
        Ok(Self { runs, seed, t_grid })
    }

    pub fn runs(&self) -> u64 {
        self.runs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub label: String,
    pub t_grid: Vec<f64>,
    /// Runs still operating at each grid time.
    pub survivors: Vec<u64>,
    pub runs: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn estimates(&self) -> Vec<f64> {
        (0..self.t_grid.len()).map(|i| self.estimate(i)).collect()
    }

    pub fn estimate(&self, i: usize) -> f64 {
        self.survivors[i] as f64 / self.runs as f64
    }

    /// Half-width of the 99% normal-approximation interval.
    pub fn half_width(&self, i: usize) -> f64 {
        let r = self.estimate(i);
        Z_99 * (r * (1.0 - r) / self.runs as f64).sqrt()
    }

    pub fn half_widths(&self) -> Vec<f64> {
        (0..self.t_grid.len()).map(|i| self.half_width(i)).collect()
    }

    /// `estimate ± half_width`, clipped to `[0, 1]`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        let (r, h) = (self.estimate(i), self.half_width(i));
        ((r - h).max(0.0), (r + h).min(1.0))
    }
}

/// Position of run `run` in the keystream for `spec`.
pub fn run_stream(seed: u64, run: u64, spec: &ArchitectureSpec) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(u128::from(run) * words_per_run(spec.n_sensors(), spec.n_mcus()));
    rng
}

fn words_per_run(n_sensors: u32, n_mcus: u32) -> u128 {
    2 * u128::from(n_sensors + n_mcus)
}

/// Unit-rate exponential by inversion, `-ln(1 - u)` with `u ∈ [0, 1)`.
fn unit_exponential<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    -(-u).ln_1p()
}

/// Fills `buf` with sorted unit-rate exponential lifetimes.
fn draw_sorted<R: RngCore + ?Sized>(rng: &mut R, buf: &mut [f64]) {
    for x in buf.iter_mut() {
        *x = unit_exponential(rng);
    }
    buf.sort_unstable_by(f64::total_cmp);
}

/// Samples one system failure time (hours).
///
/// Sensor lifetimes are drawn before MCU lifetimes. A `KooN` layer fails at
/// its `(N-K+1)`-th component failure; the system fails with the first layer.
pub fn simulate_failure_time<R: RngCore + ?Sized>(spec: &ArchitectureSpec, rng: &mut R) -> f64 {
    let mut sensors = vec![0.0; spec.n_sensors() as usize];
    let mut mcus = vec![0.0; spec.n_mcus() as usize];
    draw_sorted(rng, &mut sensors);
    draw_sorted(rng, &mut mcus);
    let sensor_layer = sensors[(spec.n_sensors() - spec.s_required()) as usize] / spec.lambda_sensor();
    let mcu_layer = mcus[(spec.n_mcus() - spec.m_required()) as usize] / spec.lambda_mcu();
    sensor_layer.min(mcu_layer)
}

pub fn estimate_curve(spec: &ArchitectureSpec, cfg: &McConfig) -> McEstimate {
    estimate_many(std::slice::from_ref(spec), cfg).pop().unwrap()
}

/// Estimates every spec in `specs`, returned in input order.
///
/// Specs with the same component counts and rates share their sampled
/// lifetimes. Since the keystream slice of a run depends only on the seed,
/// the run index and the counts, each estimate is identical to what
/// [`estimate_curve`] returns for that spec alone.
pub fn estimate_many(specs: &[ArchitectureSpec], cfg: &McConfig) -> Vec<McEstimate> {
    let mut out: Vec<Option<McEstimate>> = vec![None; specs.len()];
    let mut done = vec![false; specs.len()];
    for i in 0..specs.len() {
        if done[i] {
            continue;
        }
        let key = family_key(&specs[i]);
        let members: Vec<usize> = (i..specs.len())
            .filter(|&j| !done[j] && family_key(&specs[j]) == key)
            .collect();
        let family: Vec<ArchitectureSpec> = members.iter().map(|&j| specs[j]).collect();
        for (j, est) in members.iter().zip(estimate_family(&family, cfg)) {
            done[*j] = true;
            out[*j] = Some(est);
        }
    }
    out.into_iter().map(Option::unwrap).collect()
}

fn family_key(spec: &ArchitectureSpec) -> (u32, u32, u64, u64) {
    (
        spec.n_sensors(),
        spec.n_mcus(),
        spec.lambda_sensor().to_bits(),
        spec.lambda_mcu().to_bits(),
    )
}

/// All members share counts and rates.
fn estimate_family(family: &[ArchitectureSpec], cfg: &McConfig) -> Vec<McEstimate> {
    let first = family[0];
    let (n_s, n_m) = (first.n_sensors() as usize, first.n_mcus() as usize);
    let wpr = words_per_run(first.n_sensors(), first.n_mcus());
    let grid = cfg.t_grid();
    let bins = grid.len() + 1;
    // Bin of a failure time τ: the number of grid times strictly below τ.
    // Binning is monotone, so the bin of a minimum is the minimum of bins.
    let bin_of = |tau: f64| grid.partition_point(|&t| t < tau);

    let chunks = cfg.runs.div_ceil(CHUNK_RUNS);
    let histograms = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK_RUNS;
            let end = (start + CHUNK_RUNS).min(cfg.runs);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_word_pos(u128::from(start) * wpr);

            let mut hist = vec![vec![0u64; bins]; family.len()];
            let mut sensors = vec![0.0; n_s];
            let mut mcus = vec![0.0; n_m];
            let mut sensor_bins = vec![0usize; n_s + 1];
            let mut mcu_bins = vec![0usize; n_m + 1];
            for _ in start..end {
                draw_sorted(&mut rng, &mut sensors);
                draw_sorted(&mut rng, &mut mcus);
                for k in 1..=n_s {
                    sensor_bins[k] = bin_of(sensors[n_s - k] / first.lambda_sensor());
                }
                for k in 1..=n_m {
                    mcu_bins[k] = bin_of(mcus[n_m - k] / first.lambda_mcu());
                }
                for (h, spec) in hist.iter_mut().zip(family) {
                    let b = sensor_bins[spec.s_required() as usize].min(mcu_bins[spec.m_required() as usize]);
                    h[b] += 1;
                }
            }
            hist
        })
        .reduce(
            || vec![vec![0u64; bins]; family.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    for (u, v) in x.iter_mut().zip(y) {
                        *u += v;
                    }
                }
                a
            },
        );

    family
        .iter()
        .zip(histograms)
        .map(|(spec, hist)| {
            // Survivors at grid point j: runs whose bin exceeds j.
            let mut survivors = vec![0u64; grid.len()];
            let mut above = 0u64;
            for j in (0..grid.len()).rev() {
                above += hist[j + 1];
                survivors[j] = above;
            }
            McEstimate {
                label: spec.label(),
                t_grid: grid.to_vec(),
                survivors,
                runs: cfg.runs,
                seed: cfg.seed,
            }
        })
        .collect()
}
