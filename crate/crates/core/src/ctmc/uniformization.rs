//! Transient solution `p(t) = p(0)·exp(Q t)` by uniformization.
//!
//! With `Λ ≥ max_i |q_ii|` the matrix `P = I + Q/Λ` is stochastic and
//! `exp(Q t) = Σ_k Poisson(k; Λt) · P^k`. The Poisson weights are computed
//! outward from the mode and normalized, so `Λt` far past the `exp(-Λt)`
//! underflow point is handled without special cases.

use super::{GeneratorMatrix, ProbabilityVector};
use crate::error::{Error, Result};

/// Largest accepted truncation tolerance.
pub const MAX_EPS: f64 = 1e-6;

pub fn solve_transient(
    generator: &GeneratorMatrix,
    p0: &ProbabilityVector,
    t: f64,
    eps: f64,
) -> Result<ProbabilityVector> {
    if p0.len() != generator.dim() {
        return Err(Error::DimensionMismatch {
            expected: generator.dim(),
            actual: p0.len(),
        });
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time {t} must be finite and >= 0")));
    }
    if !(eps > 0.0 && eps <= MAX_EPS) {
        return Err(Error::InvalidArgument(format!(
            "truncation tolerance {eps} must lie in (0, {MAX_EPS}]"
        )));
    }

    let rate = generator.max_exit_rate();
    if rate == 0.0 {
        if generator.dim() == 1 {
            return Ok(ProbabilityVector::from_raw(p0.values().to_vec(), t));
        }
        return Err(Error::DegenerateGenerator);
    }
    if t == 0.0 {
        return Ok(ProbabilityVector::from_raw(p0.values().to_vec(), 0.0));
    }

    let dtmc = Uniformized::new(generator, rate);
    let window = PoissonWindow::new(rate * t, eps);

    let mut v = p0.values().to_vec();
    let mut next = vec![0.0; v.len()];
    let mut acc = vec![0.0; v.len()];
    for k in 0..=window.right() {
        let w = window.weight(k);
        if w > 0.0 {
            for (a, x) in acc.iter_mut().zip(&v) {
                *a += w * x;
            }
        }
        if k < window.right() {
            dtmc.step(&v, &mut next);
            std::mem::swap(&mut v, &mut next);
        }
    }

    let total: f64 = acc.iter().sum();
    for a in &mut acc {
        *a = (*a / total).min(1.0);
    }
    Ok(ProbabilityVector::from_raw(acc, t))
}

/// `P = I + Q/Λ` in the same sparse layout as the generator.
struct Uniformized<'a> {
    generator: &'a GeneratorMatrix,
    inv_rate: f64,
    stay: Vec<f64>,
}

impl<'a> Uniformized<'a> {
    fn new(generator: &'a GeneratorMatrix, rate: f64) -> Self {
        // (Λ - |q_ii|)/Λ is exactly zero on the fastest row.
        let stay = (0..generator.dim())
            .map(|i| ((rate + generator.diagonal(i)) / rate).max(0.0))
            .collect();
        Self {
            generator,
            inv_rate: 1.0 / rate,
            stay,
        }
    }

    /// `out = v · P`
    fn step(&self, v: &[f64], out: &mut [f64]) {
        for ((o, x), s) in out.iter_mut().zip(v).zip(&self.stay) {
            *o = x * s;
        }
        for (i, &x) in v.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (j, q) in self.generator.row(i) {
                out[j] += x * q * self.inv_rate;
            }
        }
    }
}

/// Normalized Poisson weights on `left..=right`; the mass outside the
/// window is below `eps`.
#[derive(Debug, Clone)]
pub(crate) struct PoissonWindow {
    left: usize,
    weights: Vec<f64>,
}

impl PoissonWindow {
    pub(crate) fn new(mean: f64, eps: f64) -> Self {
        debug_assert!(mean > 0.0 && eps > 0.0);
        let half_eps = 0.5 * eps;
        let mode = mean.floor() as usize;

        // Unnormalized, w(mode) = 1. Beyond the mode the term ratios shrink
        // monotonically, so a geometric series bounds each discarded tail.
        let mut right = vec![1.0];
        let mut total = 1.0;
        let mut k = mode;
        loop {
            let w = *right.last().unwrap();
            let r = mean / (k + 1) as f64;
            if r < 1.0 && w * r / (1.0 - r) <= half_eps * total {
                break;
            }
            let next = w * r;
            right.push(next);
            total += next;
            k += 1;
        }

        let mut left = Vec::new();
        let mut k = mode;
        let mut w = 1.0;
        while k > 0 {
            let r = k as f64 / mean;
            if r < 1.0 && w * r / (1.0 - r) <= half_eps * total {
                break;
            }
            w *= r;
            k -= 1;
            left.push(w);
            total += w;
        }

        let start = k;
        let weights = left
            .into_iter()
            .rev()
            .chain(right)
            .map(|w| w / total)
            .collect();
        Self {
            left: start,
            weights,
        }
    }

    #[cfg(test)]
    pub(crate) fn left(&self) -> usize {
        self.left
    }

    pub(crate) fn right(&self) -> usize {
        self.left + self.weights.len() - 1
    }

    pub(crate) fn weight(&self, k: usize) -> f64 {
        if k < self.left {
            0.0
        } else {
            self.weights.get(k - self.left).copied().unwrap_or(0.0)
        }
    }
}
