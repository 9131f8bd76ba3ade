//! Parameter sweeps producing conductance spectra, plus lineshape analysis:
//! extremum detection and asymmetry quantification.
//!
//! A sweep evaluates one grid point at a time through [`eval_point`], a pure
//! function of the spec and the index, so callers may fan the grid out across
//! threads and assemble rows in grid order; [`run_sweep`] is the sequential
//! reference driver. Same spec, same table, bit for bit.

use alloc::vec::Vec;
use core::fmt;

use libm::acos;
use num_complex::Complex64;

use crate::closed_form::{self, ClosedFormError};
use crate::model::{GaugeAllocation, Momentum, RingConfig};
use crate::oracle;

/// The swept axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Common real dot level: `Re E_u = Re E_d = x` (imaginary parts kept).
    EpsilonCommon,
    /// Band energy; the momentum is derived via `k = arccos(-x / 2 t0)`.
    Omega,
    /// Total flux phase.
    Phi,
    /// Gain/loss of the upper dot: `Im E_u = x`.
    GammaU,
    /// Gain/loss of the lower dot: `Im E_d = x`.
    GammaD,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::EpsilonCommon => "epsilon_common",
            SweepVariable::Omega => "omega",
            SweepVariable::Phi => "phi",
            SweepVariable::GammaU => "gamma_u",
            SweepVariable::GammaD => "gamma_d",
        }
    }
}

/// Evaluation backend for a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Analytic formulas, falling back to the oracle at singular points.
    ClosedForm,
    /// The linear-system solver only.
    Oracle,
    /// Closed form as the primary value plus a per-point comparison against
    /// the oracle.
    Both,
}

/// A uniform closed grid over one variable with everything else fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    /// Non-swept physical parameters.
    pub base: RingConfig,
    /// Fixed momentum (ignored for [`SweepVariable::Omega`]).
    pub k: f64,
    pub engine: Engine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepError {
    /// `start >= stop`, or a bound is not finite.
    BadRange,
    /// Fewer than two grid points.
    TooFewPoints,
    /// An omega sweep leaving the open band `(-2 t0, 2 t0)`.
    OutOfBand,
    /// The fixed momentum is not a propagating mode.
    BadMomentum,
}

impl fmt::Display for SweepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepError::BadRange => write!(f, "sweep range must be finite with start < stop"),
            SweepError::TooFewPoints => write!(f, "sweep needs at least 2 grid points"),
            SweepError::OutOfBand => {
                write!(f, "omega sweep must stay strictly inside the band (-2 t0, 2 t0)")
            }
            SweepError::BadMomentum => write!(f, "fixed momentum k must lie strictly inside (0, pi)"),
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    /// Swept-variable value.
    pub x: f64,
    /// Transmission probability `T`.
    pub probability: f64,
    /// Conductance `G` in units of `2e²/h`; equal to `T` by definition.
    pub conductance: f64,
    pub tau: Complex64,
    pub r: Complex64,
    /// True when the point was handed to the oracle (closed form refused) or
    /// the oracle itself detected rank deficiency.
    pub singular: bool,
    /// `|T_closed - T_oracle|` under [`Engine::Both`], absent otherwise.
    pub discrepancy: Option<f64>,
}

/// A sweep result: rows in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub variable: SweepVariable,
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumTable {
    /// Builds an analysis-only table from `(x, G)` samples; amplitudes are
    /// zeroed and `T = G`. Lineshape analysis reads only `x` and `G`.
    pub fn from_samples<I>(variable: SweepVariable, samples: I) -> Self
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let zero = Complex64::new(0.0, 0.0);
        let rows = samples
            .into_iter()
            .map(|(x, g)| SpectrumRow {
                x,
                probability: g,
                conductance: g,
                tau: zero,
                r: zero,
                singular: false,
                discrepancy: None,
            })
            .collect();
        SpectrumTable { variable, rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Largest per-point closed-vs-oracle discrepancy, when recorded.
    pub fn max_discrepancy(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|row| row.discrepancy)
            .fold(None, |acc, d| Some(acc.map_or(d, |m: f64| m.max(d))))
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.points < 2 {
            return Err(SweepError::TooFewPoints);
        }
        if !self.start.is_finite() || !self.stop.is_finite() || self.start >= self.stop {
            return Err(SweepError::BadRange);
        }
        if self.variable == SweepVariable::Omega {
            let band = 2.0 * self.base.t0;
            if self.start <= -band || self.stop >= band {
                return Err(SweepError::OutOfBand);
            }
        } else if self.base.dispersion(self.k).is_err() {
            return Err(SweepError::BadMomentum);
        }
        Ok(())
    }

    pub fn grid_step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    /// Grid value at `index`; the grid is closed, so the last index returns
    /// `stop` exactly.
    pub fn grid_value(&self, index: usize) -> f64 {
        if index + 1 == self.points {
            self.stop
        } else {
            self.start + index as f64 * self.grid_step()
        }
    }

    fn point_setup(&self, x: f64) -> Option<(RingConfig, Momentum)> {
        let mut config = self.base;
        let k = match self.variable {
            SweepVariable::EpsilonCommon => {
                config.e_u = Complex64::new(x, self.base.e_u.im);
                config.e_d = Complex64::new(x, self.base.e_d.im);
                self.k
            }
            SweepVariable::Omega => acos(-x / (2.0 * self.base.t0)),
            SweepVariable::Phi => {
                config.phi = x;
                self.k
            }
            SweepVariable::GammaU => {
                config.e_u = Complex64::new(self.base.e_u.re, x);
                self.k
            }
            SweepVariable::GammaD => {
                config.e_d = Complex64::new(self.base.e_d.re, x);
                self.k
            }
        };
        let momentum = config.dispersion(k).ok()?;
        Some((config, momentum))
    }
}

/// Evaluates one grid point. Backend errors never panic or abort: a point
/// the closed forms refuse falls back to the oracle and is flagged singular;
/// a point no backend can produce yields NaN values with the flag set.
pub fn eval_point(spec: &SweepSpec, index: usize) -> SpectrumRow {
    let x = spec.grid_value(index);
    let Some((config, momentum)) = spec.point_setup(x) else {
        return nan_row(x);
    };
    match spec.engine {
        Engine::ClosedForm => closed_row(&config, &momentum, x),
        Engine::Oracle => oracle_row(&config, &momentum, x),
        Engine::Both => {
            let closed = closed_row(&config, &momentum, x);
            let oracle_value = oracle_row(&config, &momentum, x);
            let discrepancy = if closed.probability.is_finite()
                && oracle_value.probability.is_finite()
            {
                libm::fabs(closed.probability - oracle_value.probability)
            } else {
                f64::NAN
            };
            SpectrumRow { discrepancy: Some(discrepancy), ..closed }
        }
    }
}

fn nan_row(x: f64) -> SpectrumRow {
    let nan = Complex64::new(f64::NAN, f64::NAN);
    SpectrumRow {
        x,
        probability: f64::NAN,
        conductance: f64::NAN,
        tau: nan,
        r: nan,
        singular: true,
        discrepancy: None,
    }
}

fn closed_row(config: &RingConfig, momentum: &Momentum, x: f64) -> SpectrumRow {
    let alloc = GaugeAllocation::symmetric(config);
    let result = closed_form::transmission(config, momentum)
        .and_then(|t| closed_form::r_general(config, &alloc, momentum).map(|r| (t, r)));
    match result {
        Ok((t, r)) => SpectrumRow {
            x,
            probability: t.probability,
            conductance: t.conductance,
            tau: t.tau,
            r,
            singular: false,
            discrepancy: None,
        },
        Err(ClosedFormError::SingularPoint) => oracle_row(config, momentum, x),
        // unreachable for the sweep's parameterizations, but stay total
        Err(_) => nan_row(x),
    }
}

fn oracle_row(config: &RingConfig, momentum: &Momentum, x: f64) -> SpectrumRow {
    let alloc = GaugeAllocation::symmetric(config);
    match oracle::solve_scattering(config, &alloc, momentum) {
        Ok(sol) => SpectrumRow {
            x,
            probability: sol.transmission(),
            conductance: sol.transmission(),
            tau: sol.tau_rl,
            r: sol.r_ll,
            singular: sol.singular,
            discrepancy: None,
        },
        Err(_) => nan_row(x),
    }
}

/// Runs the sweep sequentially, rows in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SpectrumTable, SweepError> {
    spec.validate()?;
    let rows = (0..spec.points).map(|i| eval_point(spec, i)).collect();
    Ok(SpectrumTable { variable: spec.variable, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

/// An interior extremum of the conductance column, refined off-grid by
/// parabolic interpolation through its neighbors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub position: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalysisError {
    /// Monotone or flat curve: nothing to report.
    NoExtrema,
    /// The curve has no interior maximum to center the metric on.
    NoInteriorMaximum,
    /// Fewer rows than the analysis needs.
    TooFewRows,
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::NoExtrema => write!(f, "curve has no interior extrema"),
            AnalysisError::NoInteriorMaximum => write!(f, "curve has no interior maximum"),
            AnalysisError::TooFewRows => write!(f, "analysis needs at least 3 rows"),
        }
    }
}

/// Interior grid extrema of `G` by three-point comparison (half-strict, so a
/// two-point plateau at an apex counts once), refined by fitting a parabola
/// through the triple. Endpoints are never reported.
pub fn find_extrema(table: &SpectrumTable) -> Result<Vec<Extremum>, AnalysisError> {
    if table.len() < 3 {
        return Err(AnalysisError::TooFewRows);
    }
    let rows = &table.rows;
    let mut found = Vec::new();
    for i in 1..rows.len() - 1 {
        let (prev, here, next) = (rows[i - 1].conductance, rows[i].conductance, rows[i + 1].conductance);
        let kind = if prev < here && here >= next {
            ExtremumKind::Maximum
        } else if prev > here && here <= next {
            ExtremumKind::Minimum
        } else {
            continue;
        };
        let h = rows[i + 1].x - rows[i].x;
        let curvature = prev + next - 2.0 * here;
        let (position, value) = if libm::fabs(curvature) > 1e-300 {
            let offset = 0.5 * h * (prev - next) / curvature;
            let offset = offset.clamp(-h, h);
            let refined = here - (next - prev) * (next - prev) / (8.0 * curvature);
            (rows[i].x + offset, refined)
        } else {
            (rows[i].x, here)
        };
        found.push(Extremum { position, value, kind });
    }
    if found.is_empty() {
        Err(AnalysisError::NoExtrema)
    } else {
        Ok(found)
    }
}

/// Lineshape asymmetry about the curve's maximum:
/// `max_δ |G(x_max + δ) - G(x_max - δ)| / max G` over the symmetric window
/// the grid contains. Zero for flat curves (a constant is symmetric about
/// any center); errors when the maximum sits on an endpoint.
pub fn asymmetry_metric(table: &SpectrumTable) -> Result<f64, AnalysisError> {
    if table.len() < 3 {
        return Err(AnalysisError::TooFewRows);
    }
    let g: Vec<f64> = table.rows.iter().map(|row| row.conductance).collect();
    let g_max = g.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let g_min = g.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if !(g_max > g_min) {
        return Ok(0.0);
    }
    let peak = g
        .iter()
        .position(|&v| v == g_max)
        .expect("max value present");
    if peak == 0 || peak == g.len() - 1 {
        return Err(AnalysisError::NoInteriorMaximum);
    }
    let reach = peak.min(g.len() - 1 - peak);
    let mut worst: f64 = 0.0;
    for j in 1..=reach {
        worst = worst.max(libm::fabs(g[peak + j] - g[peak - j]));
    }
    Ok(worst / g_max)
}

/// Reflection asymmetry about the grid midpoint:
/// `max_j |G(x_j) - G(x_{n-1-j})| / max G`, zero for flat curves. This is the
/// symmetry measure for spectra expected to be even about the sweep center.
pub fn reflection_asymmetry(table: &SpectrumTable) -> f64 {
    let g: Vec<f64> = table.rows.iter().map(|row| row.conductance).collect();
    let g_max = g.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let g_min = g.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if !(g_max > g_min) || !(g_max != 0.0) {
        return 0.0;
    }
    let n = g.len();
    let mut worst: f64 = 0.0;
    for j in 0..n / 2 {
        worst = worst.max(libm::fabs(g[j] - g[n - 1 - j]));
    }
    worst / g_max
}
