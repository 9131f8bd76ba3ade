//! Least-squares extraction of Fano lineshape parameters from a spectrum.
//!
//! The model is the standard Fano profile with free scale and offset,
//!
//! ```text
//! G(x) ~ background + amplitude (e + q)^2 / (e^2 + 1),  e = (x - center)/width
//! ```
//!
//! fitted by derivative-free simplex descent from eight deterministic starts
//! seeded by the detected extrema. No randomness anywhere: same table, same
//! fit.

use alloc::vec::Vec;
use core::fmt;

use libm::{fabs, sqrt};

use crate::spectra::{find_extrema, ExtremumKind, SpectrumTable};

const PARAMS: usize = 5;

/// Fitted Fano profile parameters.
///
/// `q` is the dimensionless asymmetry parameter of the reduced profile;
/// `center` and `width` map the swept variable onto the reduced detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoFit {
    pub q: f64,
    pub center: f64,
    /// Reduced-detuning scale, always positive.
    pub width: f64,
    pub amplitude: f64,
    pub background: f64,
    /// Root-mean-square residual over the fitted grid.
    pub rms_residual: f64,
}

impl FanoFit {
    /// The fitted model evaluated at `x`.
    pub fn evaluate(&self, x: f64) -> f64 {
        fano_profile(self.q, self.center, self.width, self.amplitude, self.background, x)
    }

    /// Position of the fitted profile zero: the dip sits at
    /// `center - q * width`.
    pub fn dip_position(&self) -> f64 {
        self.center - self.q * self.width
    }

    /// Asymmetry parameter expressed in the sweep's energy units, read off
    /// the fitted dip location (the profile zero sits at minus this value).
    pub fn q_energy(&self) -> f64 {
        -self.dip_position()
    }
}

/// The Fano profile `background + amplitude (e + q)^2/(e^2 + 1)` with
/// `e = (x - center)/width`.
pub fn fano_profile(
    q: f64,
    center: f64,
    width: f64,
    amplitude: f64,
    background: f64,
    x: f64,
) -> f64 {
    let e = (x - center) / width;
    background + amplitude * (e + q) * (e + q) / (e * e + 1.0)
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Seed scale for the reduced-detuning width; pass the level broadening
    /// when fitting physical spectra. Falls back to a span-derived scale.
    pub width_hint: Option<f64>,
    /// Iteration cap per simplex start.
    pub max_iterations: usize,
    /// Declare divergence when the best residual exceeds this fraction of
    /// the data range.
    pub max_residual_fraction: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { width_hint: None, max_iterations: 10_000, max_residual_fraction: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitError {
    /// Fewer than 20 rows.
    TooFewRows,
    /// The conductance column is constant; there is no lineshape to fit.
    ConstantData,
    /// Every start ran out of iterations, or the best residual exceeds the
    /// allowed fraction of the data range.
    Diverged { rms_residual: f64, allowed: f64 },
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitError::TooFewRows => write!(f, "fit needs at least 20 rows"),
            FitError::ConstantData => write!(f, "conductance column is constant"),
            FitError::Diverged { rms_residual, allowed } => {
                write!(f, "fit diverged: rms residual {rms_residual:e} > allowed {allowed:e}")
            }
        }
    }
}

/// Fits the Fano profile with default options.
pub fn fit_fano(table: &SpectrumTable) -> Result<FanoFit, FitError> {
    fit_fano_with(table, &FitOptions::default())
}

/// Fits the Fano profile, picking the lowest-residual result of eight
/// deterministic starts: `q ∈ {±1}` x width seeds `{W, 4W}` x centers at the
/// two strongest detected extrema.
pub fn fit_fano_with(table: &SpectrumTable, options: &FitOptions) -> Result<FanoFit, FitError> {
    if table.len() < 20 {
        return Err(FitError::TooFewRows);
    }
    let xs: Vec<f64> = table.rows.iter().map(|row| row.x).collect();
    let ys: Vec<f64> = table.rows.iter().map(|row| row.conductance).collect();
    let y_max = ys.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let y_min = ys.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let range = y_max - y_min;
    if !(range > 0.0) {
        return Err(FitError::ConstantData);
    }
    let span = xs[xs.len() - 1] - xs[0];

    let width_seed = options.width_hint.unwrap_or(span / 20.0).max(span * 1e-6);
    let centers = start_centers(table, &xs);

    let objective = |p: &[f64; PARAMS]| -> f64 {
        let (q, center, width, amplitude, background) = (p[0], p[1], p[2], p[3], p[4]);
        if fabs(width) < span * 1e-9 || !width.is_finite() {
            return f64::INFINITY;
        }
        let mut sse = 0.0;
        for (&x, &y) in xs.iter().zip(&ys) {
            let d = fano_profile(q, center, width, amplitude, background, x) - y;
            sse += d * d;
        }
        sse
    };

    let n = xs.len() as f64;
    let good_enough = (1e-14 * range) * (1e-14 * range) * n;

    let mut best: Option<([f64; PARAMS], f64)> = None;
    let mut any_converged = false;
    'starts: for &q0 in &[1.0, -1.0] {
        for &w0 in &[width_seed, 4.0 * width_seed] {
            for &c0 in &centers {
                let start = [q0, c0, w0, 0.5 * range, y_min];
                let steps = [0.5, 0.5 * w0, 0.5 * w0, 0.25 * range, 0.1 * range];
                let coarse = nelder_mead(&objective, start, steps, options.max_iterations);
                // polish from the coarse optimum with a small simplex
                let polish_steps = polish_scale(&coarse.x);
                let fine = nelder_mead(&objective, coarse.x, polish_steps, options.max_iterations);
                let candidate = if fine.fval < coarse.fval { fine } else { coarse };
                any_converged |= candidate.converged;
                if best.as_ref().map_or(true, |(_, f)| candidate.fval < *f) {
                    best = Some((candidate.x, candidate.fval));
                }
                if let Some((_, f)) = best {
                    if f <= good_enough {
                        break 'starts;
                    }
                }
            }
        }
    }

    let (params, sse) = best.expect("at least one start ran");
    let rms_residual = sqrt(sse / n);
    let allowed = options.max_residual_fraction * range;
    if !any_converged || rms_residual > allowed {
        return Err(FitError::Diverged { rms_residual, allowed });
    }

    let [mut q, center, mut width, amplitude, background] = params;
    // (q, width) -> (-q, -width) leaves the model invariant; keep width > 0
    if width < 0.0 {
        width = -width;
        q = -q;
    }
    Ok(FanoFit { q, center, width, amplitude, background, rms_residual })
}

/// Centers for the multi-start: the strongest detected maximum and minimum,
/// padded with window quartiles when the curve has fewer extrema.
fn start_centers(table: &SpectrumTable, xs: &[f64]) -> [f64; 2] {
    let span = xs[xs.len() - 1] - xs[0];
    let fallback = [xs[0] + 0.25 * span, xs[0] + 0.75 * span];
    match find_extrema(table) {
        Ok(extrema) => {
            let peak = extrema
                .iter()
                .filter(|e| e.kind == ExtremumKind::Maximum)
                .max_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
            let dip = extrema
                .iter()
                .filter(|e| e.kind == ExtremumKind::Minimum)
                .min_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
            match (peak, dip) {
                (Some(p), Some(d)) => [p.position, d.position],
                (Some(p), None) => [p.position, xs[0] + 0.5 * span],
                (None, Some(d)) => [d.position, xs[0] + 0.5 * span],
                (None, None) => fallback,
            }
        }
        Err(_) => fallback,
    }
}

fn polish_scale(x: &[f64; PARAMS]) -> [f64; PARAMS] {
    let mut steps = [0.0; PARAMS];
    for (step, &value) in steps.iter_mut().zip(x.iter()) {
        *step = 1e-5 * (1.0 + fabs(value));
    }
    steps
}

struct SimplexResult {
    x: [f64; PARAMS],
    fval: f64,
    converged: bool,
}

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2) over `PARAMS` dimensions.
fn nelder_mead<F>(
    objective: &F,
    start: [f64; PARAMS],
    steps: [f64; PARAMS],
    max_iterations: usize,
) -> SimplexResult
where
    F: Fn(&[f64; PARAMS]) -> f64,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let mut vertices: Vec<[f64; PARAMS]> = Vec::with_capacity(PARAMS + 1);
    vertices.push(start);
    for dim in 0..PARAMS {
        let mut v = start;
        v[dim] += if steps[dim] != 0.0 { steps[dim] } else { 1e-8 };
        vertices.push(v);
    }
    let mut values: Vec<f64> = vertices.iter().map(|v| objective(v)).collect();

    let mut converged = false;
    for _ in 0..max_iterations {
        // order best..worst
        let mut order: Vec<usize> = (0..vertices.len()).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(core::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[PARAMS];
        let second_worst = order[PARAMS - 1];

        if simplex_collapsed(&vertices, &values, best, worst) {
            converged = true;
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = [0.0; PARAMS];
        for &idx in order.iter().take(PARAMS) {
            for dim in 0..PARAMS {
                centroid[dim] += vertices[idx][dim];
            }
        }
        for c in &mut centroid {
            *c /= PARAMS as f64;
        }

        let reflected = blend(&centroid, &vertices[worst], -REFLECT);
        let f_reflected = objective(&reflected);

        if f_reflected < values[best] {
            let expanded = blend(&centroid, &vertices[worst], -EXPAND);
            let f_expanded = objective(&expanded);
            if f_expanded < f_reflected {
                vertices[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                vertices[worst] = reflected;
                values[worst] = f_reflected;
            }
        } else if f_reflected < values[second_worst] {
            vertices[worst] = reflected;
            values[worst] = f_reflected;
        } else {
            let contracted = if f_reflected < values[worst] {
                blend(&centroid, &vertices[worst], -CONTRACT)
            } else {
                blend(&centroid, &vertices[worst], CONTRACT)
            };
            let f_contracted = objective(&contracted);
            if f_contracted < values[worst].min(f_reflected) {
                vertices[worst] = contracted;
                values[worst] = f_contracted;
            } else {
                // shrink toward the best vertex
                let anchor = vertices[best];
                for idx in 0..vertices.len() {
                    if idx == best {
                        continue;
                    }
                    for dim in 0..PARAMS {
                        vertices[idx][dim] =
                            anchor[dim] + SHRINK * (vertices[idx][dim] - anchor[dim]);
                    }
                    values[idx] = objective(&vertices[idx]);
                }
            }
        }
    }

    let mut best_idx = 0;
    for idx in 1..values.len() {
        if values[idx] < values[best_idx] {
            best_idx = idx;
        }
    }
    SimplexResult { x: vertices[best_idx], fval: values[best_idx], converged }
}

fn simplex_collapsed(
    vertices: &[[f64; PARAMS]],
    values: &[f64],
    best: usize,
    worst: usize,
) -> bool {
    let f_best = values[best];
    let f_worst = values[worst];
    if f_worst - f_best <= 1e-12 * fabs(f_best) + 1e-300 {
        return true;
    }
    let mut diameter: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for vertex in vertices {
        for dim in 0..PARAMS {
            diameter = diameter.max(fabs(vertex[dim] - vertices[best][dim]));
            scale = scale.max(fabs(vertex[dim]));
        }
    }
    diameter <= 1e-12 * scale
}

fn blend(centroid: &[f64; PARAMS], worst: &[f64; PARAMS], factor: f64) -> [f64; PARAMS] {
    // centroid + factor (worst - centroid); negative factors reflect
    let mut out = [0.0; PARAMS];
    for dim in 0..PARAMS {
        out[dim] = centroid[dim] + factor * (worst[dim] - centroid[dim]);
    }
    out
}
