//! Comparison studies over families of architectures.

use std::cmp::Ordering;
use std::fmt::Write;

use rayon::prelude::*;

use crate::analytic::{analytic_reliability, mttf};
use crate::architecture::{classify_self_diagnosis, ArchitectureSpec, DiagnosisClass, Layer};
use crate::ctmc;
use crate::error::{Error, Result};
use crate::DEFAULT_EPS;

/// Which computation produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverTag {
    Ctmc,
    Analytic,
    MonteCarlo,
}

impl SolverTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverTag::Ctmc => "ctmc",
            SolverTag::Analytic => "analytic",
            SolverTag::MonteCarlo => "montecarlo",
        }
    }
}

/// Deterministic routes to `R(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Solver {
    #[default]
    Ctmc,
    Analytic,
}

impl Solver {
    pub fn tag(self) -> SolverTag {
        match self {
            Solver::Ctmc => SolverTag::Ctmc,
            Solver::Analytic => SolverTag::Analytic,
        }
    }

    pub fn reliability(self, spec: &ArchitectureSpec, t: f64) -> Result<f64> {
        match self {
            Solver::Ctmc => ctmc::reliability(spec, t, DEFAULT_EPS),
            Solver::Analytic => {
                if !(t.is_finite() && t >= 0.0) {
                    return Err(Error::InvalidArgument(format!("time {t} must be finite and >= 0")));
                }
                Ok(analytic_reliability(spec, t))
            }
        }
    }

    pub fn curve(self, spec: &ArchitectureSpec, t_grid: &[f64]) -> Result<ReliabilityCurve> {
        match self {
            Solver::Ctmc => ctmc::sample_curve(spec, t_grid, DEFAULT_EPS),
            Solver::Analytic => {
                check_grid(t_grid)?;
                let values = t_grid.iter().map(|&t| analytic_reliability(spec, t)).collect();
                Ok(ReliabilityCurve::new(spec.label(), t_grid.to_vec(), values, SolverTag::Analytic))
            }
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ctmc" => Ok(Solver::Ctmc),
            "analytic" => Ok(Solver::Analytic),
            other => Err(Error::InvalidArgument(format!("unknown solver {other:?}"))),
        }
    }
}

/// Sampled `R(t)` for one architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityCurve {
    label: String,
    t_grid: Vec<f64>,
    values: Vec<f64>,
    solver: SolverTag,
}

impl ReliabilityCurve {
    pub fn new(label: String, t_grid: Vec<f64>, values: Vec<f64>, solver: SolverTag) -> Self {
        assert_eq!(t_grid.len(), values.len());
        Self {
            label,
            t_grid,
            values,
            solver,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn solver(&self) -> SolverTag {
        self.solver
    }

    pub fn is_nonincreasing(&self, slack: f64) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0] + slack)
    }
}

/// Grid must be non-empty, finite, non-negative and ascending.
pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("time grid is empty".into()));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidArgument("grid times must be finite and >= 0".into()));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("time grid is not ascending".into()));
    }
    Ok(())
}

/// `points` evenly spaced times on `[0, t_max]`, both ends included.
pub fn uniform_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::InvalidArgument("a grid needs at least 2 points".into()));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidArgument(format!("t_max {t_max} must be finite and > 0")));
    }
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|i| if i == points - 1 { t_max } else { t_max * i as f64 / last })
        .collect())
}

/// Every `SooN_S/MooN_M` with `N_S ≤ max_sensors` and `N_M ≤ max_mcus`,
/// ordered by `(N_S, S, N_M, M)`.
pub fn enumerate_architectures(
    max_sensors: u32,
    max_mcus: u32,
    lambda_sensor: f64,
    lambda_mcu: f64,
) -> Result<Vec<ArchitectureSpec>> {
    let mut out = Vec::new();
    for n_s in 1..=max_sensors {
        for s in 1..=n_s {
            for n_m in 1..=max_mcus {
                for m in 1..=n_m {
                    out.push(ArchitectureSpec::new(
                        Layer::new(s, n_s),
                        Layer::new(m, n_m),
                        lambda_sensor,
                        lambda_mcu,
                    )?);
                }
            }
        }
    }
    Ok(out)
}

/// Bisection stops once the bracket is this narrow (hours)...
pub const CROSSING_TIME_TOL: f64 = 1e-3;
/// ...and the curves agree to this much at the returned time.
pub const CROSSING_VALUE_TOL: f64 = 1e-9;
const CROSSING_SCAN_STEPS: u32 = 1000;

/// First time in `(0, t_max]` at which `a - b` strictly changes sign.
///
/// The interval is scanned in `t_max/1000` steps and the first bracketing
/// step is refined by bisection. Zeros that touch without crossing are
/// ignored.
pub fn crossing_time<A, B>(a: A, b: B, t_max: f64) -> Option<f64>
where
    A: Fn(f64) -> f64,
    B: Fn(f64) -> f64,
{
    let diff = |t: f64| a(t) - b(t);
    let step = t_max / f64::from(CROSSING_SCAN_STEPS);
    let mut last: Option<(f64, f64)> = None;
    for k in 1..=CROSSING_SCAN_STEPS {
        let t = if k == CROSSING_SCAN_STEPS { t_max } else { step * f64::from(k) };
        let d = diff(t);
        if d == 0.0 || d.is_nan() {
            continue;
        }
        match last {
            Some((t_prev, d_prev)) if d_prev.signum() != d.signum() => {
                return Some(bisect(&diff, t_prev, t, d_prev.signum()));
            }
            _ => last = Some((t, d)),
        }
    }
    None
}

fn bisect(diff: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, lo_sign: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        let d = diff(mid);
        let converged = hi - lo <= CROSSING_TIME_TOL && d.abs() <= CROSSING_VALUE_TOL;
        if d == 0.0 || converged || mid <= lo || mid >= hi {
            return mid;
        }
        if d.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedRow {
    pub spec: ArchitectureSpec,
    pub label: String,
    pub reliability: f64,
    /// 1-based.
    pub rank: usize,
}

fn by_reliability_then_label(a: (f64, &str), b: (f64, &str)) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
}

/// Rows sorted by `R(t)` descending, ties broken by label.
pub fn rank_at(specs: &[ArchitectureSpec], t: f64, solver: Solver) -> Result<Vec<RankedRow>> {
    let values = specs
        .par_iter()
        .map(|s| solver.reliability(s, t))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<RankedRow> = specs
        .iter()
        .zip(values)
        .map(|(s, r)| RankedRow {
            spec: *s,
            label: s.label(),
            reliability: r,
            rank: 0,
        })
        .collect();
    rows.sort_by(|a, b| by_reliability_then_label((a.reliability, &a.label), (b.reliability, &b.label)));
    for (i, row) in rows.iter_mut().enumerate() {
        row.rank = i + 1;
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    /// Times at which `R` is tabulated and ranked.
    pub horizons: Vec<f64>,
    /// Upper end of the crossing search against the reference.
    pub crossing_horizon: f64,
    pub solver: Solver,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            horizons: vec![10_000.0, 20_000.0, 30_000.0],
            crossing_horizon: 30_000.0,
            solver: Solver::Ctmc,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub spec: ArchitectureSpec,
    pub label: String,
    pub sensor_class: DiagnosisClass,
    pub mcu_class: DiagnosisClass,
    pub suitable: bool,
    pub mttf_hours: f64,
    /// One per horizon.
    pub reliability: Vec<f64>,
    /// `R - R_reference`, one per horizon.
    pub delta_vs_reference: Vec<f64>,
    pub crossing_vs_reference: Option<f64>,
    /// One per horizon, 1-based.
    pub ranks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub horizons: Vec<f64>,
    pub reference: String,
    pub rows: Vec<ComparisonRow>,
}

/// Per-architecture metrics in input order.
///
/// `R` values come from `options.solver`, MTTF from the closed form and
/// crossing times from bisection on the closed-form curves.
pub fn build_report(
    specs: &[ArchitectureSpec],
    options: &ReportOptions,
    reference: &ArchitectureSpec,
) -> Result<ComparisonReport> {
    check_grid(&options.horizons)?;
    let reference_r = options
        .horizons
        .iter()
        .map(|&t| options.solver.reliability(reference, t))
        .collect::<Result<Vec<_>>>()?;
    let rows = specs
        .par_iter()
        .map(|spec| {
            let diagnosis = classify_self_diagnosis(spec);
            let reliability = options
                .horizons
                .iter()
                .map(|&t| options.solver.reliability(spec, t))
                .collect::<Result<Vec<_>>>()?;
            let delta_vs_reference = reliability.iter().zip(&reference_r).map(|(r, q)| r - q).collect();
            let crossing_vs_reference = crossing_time(
                |t| analytic_reliability(spec, t),
                |t| analytic_reliability(reference, t),
                options.crossing_horizon,
            );
            Ok(ComparisonRow {
                spec: *spec,
                label: spec.label(),
                sensor_class: diagnosis.sensor,
                mcu_class: diagnosis.mcu,
                suitable: diagnosis.suitable,
                mttf_hours: mttf(spec),
                reliability,
                delta_vs_reference,
                crossing_vs_reference,
                ranks: vec![0; options.horizons.len()],
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = rows;
    for h in 0..options.horizons.len() {
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&i, &j| {
            by_reliability_then_label(
                (rows[i].reliability[h], &rows[i].label),
                (rows[j].reliability[h], &rows[j].label),
            )
        });
        for (rank, i) in order.into_iter().enumerate() {
            rows[i].ranks[h] = rank + 1;
        }
    }
    Ok(ComparisonReport {
        horizons: options.horizons.clone(),
        reference: reference.label(),
        rows,
    })
}

impl ComparisonReport {
    pub fn row(&self, label: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// `R_a - R_b` at every horizon.
    pub fn delta_r(&self, a: &str, b: &str) -> Option<Vec<f64>> {
        let (a, b) = (self.row(a)?, self.row(b)?);
        Some(a.reliability.iter().zip(&b.reliability).map(|(x, y)| x - y).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,sensor_class,mcu_class,suitable,mttf_hours");
        for t in &self.horizons {
            write!(out, ",r_at_{t}").unwrap();
        }
        for t in &self.horizons {
            write!(out, ",delta_r_vs_ref_at_{t}").unwrap();
        }
        out.push_str(",crossing_vs_ref_hours");
        for t in &self.horizons {
            write!(out, ",rank_at_{t}").unwrap();
        }
        out.push('\n');
        for row in &self.rows {
            write!(
                out,
                "{},{},{},{},{}",
                row.label, row.sensor_class, row.mcu_class, row.suitable, row.mttf_hours
            )
            .unwrap();
            for r in row.reliability.iter().chain(&row.delta_vs_reference) {
                write!(out, ",{r}").unwrap();
            }
            out.push(',');
            if let Some(t) = row.crossing_vs_reference {
                write!(out, "{t}").unwrap();
            }
            for rank in &row.ranks {
                write!(out, ",{rank}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}
