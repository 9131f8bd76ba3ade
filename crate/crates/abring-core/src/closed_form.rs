//! Closed-form scattering amplitudes and probabilities of the two-dot ring.
//!
//! Every function here is a direct transcription of an analytic expression;
//! none of them calls the linear-system solver in [`crate::oracle`]. Where a
//! denominator can vanish the functions refuse with
//! [`ClosedFormError::SingularPoint`] instead of returning the removable
//! limit — at such points the oracle is the authority.

use core::f64::consts::{PI, TAU};
use core::fmt;

use libm::{cos, fabs, round, sin, tan};
use num_complex::Complex64;

use crate::model::{GaugeAllocation, Momentum, RingConfig};

/// Denominators are declared singular below this fraction of their largest
/// contributing term.
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormError {
    /// The expression's denominator vanishes (within tolerance); the
    /// observable stays finite there but must come from the oracle.
    SingularPoint,
    /// The dot levels are not of the balanced form `ε ± iγ`.
    NotPtSymmetric,
    /// `q = -γ tan(φ/2)` diverges at `φ = π (mod 2π)`: the profile is a
    /// symmetric Lorentzian rather than a Fano lineshape.
    InfiniteQ,
}

impl fmt::Display for ClosedFormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClosedFormError::SingularPoint => {
                write!(f, "closed-form denominator vanishes at this parameter point")
            }
            ClosedFormError::NotPtSymmetric => {
                write!(f, "dot levels are not balanced gain/loss (E_u = ε+iγ, E_d = ε-iγ)")
            }
            ClosedFormError::InfiniteQ => {
                write!(f, "Fano q diverges at φ = π (mod 2π); profile is Lorentzian")
            }
        }
    }
}

/// Transmission amplitude, probability and conductance at one momentum.
///
/// `conductance` is in units of `2e²/h`, so it equals the probability; both
/// may exceed 1 when the dot levels carry gain or loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionResult {
    pub tau: Complex64,
    pub probability: f64,
    pub conductance: f64,
}

/// Fano asymmetry parameter `q = -γ tan(φ/2)` and reduced-detuning scale α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoParameters {
    pub q: f64,
    pub alpha: f64,
}

/// Which printed form of the balanced gain/loss transmission to evaluate.
/// The symmetric and asymmetric gauge forms print identical brackets and the
/// identical denominator, which is exactly the equality they demonstrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtForm {
    Symmetric,
    Asymmetric,
}

fn guard_denominator(den: Complex64, scale: f64) -> Result<Complex64, ClosedFormError> {
    if den.norm() <= SINGULAR_TOL * scale.max(1.0) {
        Err(ClosedFormError::SingularPoint)
    } else {
        Ok(den)
    }
}

/// Transmission amplitude for an arbitrary gauge allocation:
///
/// ```text
/// tau = [ (w-E_u) e^{-ik} t0 t_dl* t_dr + (w-E_d) e^{-ik} t0 t_ul* t_ur ] (e^{-2ik} - 1)
///       / [ A (t_dl* t_ur* - t_ul* t_dr*)
///           - (w-E_u) e^{-ik} t0 (|t_dl|^2 + |t_dr|^2)
///           - (w-E_d) e^{-ik} t0 (|t_ur|^2 + |t_ul|^2)
///           - (w-E_u)(w-E_d) e^{-2ik} t0^2 ]
/// ```
///
/// with `A = t_ul t_dr - t_dl t_ur`.
pub fn tau_general(
    config: &RingConfig,
    alloc: &GaugeAllocation,
    momentum: &Momentum,
) -> Result<Complex64, ClosedFormError> {
    let omega = Complex64::new(momentum.omega(), 0.0);
    let exp_mik = momentum.exp_minus_ik();
    let exp_m2ik = momentum.exp_minus_2ik();
    let t0 = config.t0;
    let du = omega - config.e_u;
    let dd = omega - config.e_d;
    let a = alloc.t_ul * alloc.t_dr - alloc.t_dl * alloc.t_ur;

    let numerator = (du * exp_mik * t0 * alloc.t_dl.conj() * alloc.t_dr
        + dd * exp_mik * t0 * alloc.t_ul.conj() * alloc.t_ur)
        * (exp_m2ik - 1.0);

    let term1 = a * (alloc.t_dl.conj() * alloc.t_ur.conj() - alloc.t_ul.conj() * alloc.t_dr.conj());
    let term2 = du * exp_mik * t0 * (alloc.t_dl.norm_sqr() + alloc.t_dr.norm_sqr());
    let term3 = dd * exp_mik * t0 * (alloc.t_ur.norm_sqr() + alloc.t_ul.norm_sqr());
    let term4 = du * dd * exp_m2ik * (t0 * t0);
    let scale = term1
        .norm()
        .max(term2.norm())
        .max(term3.norm())
        .max(term4.norm());
    let denominator = guard_denominator(term1 - term2 - term3 - term4, scale)?;

    Ok(numerator / denominator)
}

/// Reflection amplitude for an arbitrary gauge allocation (consumes the
/// transmission amplitude internally):
///
/// ```text
/// r = [ -A t_ul* e^{-2ik} - (w-E_u) e^{-ik} t0 t_dr
///       - (A t_ur* - (w-E_u) e^{-ik} t0 t_dl) tau ]
///     / [ A t_ul* + (w-E_u) e^{-ik} t0 t_dr ]
/// ```
pub fn r_general(
    config: &RingConfig,
    alloc: &GaugeAllocation,
    momentum: &Momentum,
) -> Result<Complex64, ClosedFormError> {
    let tau = tau_general(config, alloc, momentum)?;
    let omega = Complex64::new(momentum.omega(), 0.0);
    let exp_mik = momentum.exp_minus_ik();
    let exp_m2ik = momentum.exp_minus_2ik();
    let t0 = config.t0;
    let du = omega - config.e_u;
    let a = alloc.t_ul * alloc.t_dr - alloc.t_dl * alloc.t_ur;

    let lead = a * alloc.t_ul.conj();
    let coupling = du * exp_mik * t0 * alloc.t_dr;
    let denominator = guard_denominator(lead + coupling, lead.norm().max(coupling.norm()))?;

    let numerator =
        -lead * exp_m2ik - coupling - (a * alloc.t_ur.conj() - du * exp_mik * t0 * alloc.t_dl) * tau;
    Ok(numerator / denominator)
}

/// Denominator shared by the gauge-specialized amplitudes,
/// `B = (w-E_u)(w-E_d) e^{-ik} + 2Γ(w-E_u) + 2Γ(w-E_d) + 4Γ² e^{ik} sin²(φ/2)`,
/// together with the magnitude of its largest term.
fn denominator_b(config: &RingConfig, momentum: &Momentum) -> (Complex64, f64) {
    let omega = Complex64::new(momentum.omega(), 0.0);
    let du = omega - config.e_u;
    let dd = omega - config.e_d;
    let gamma = config.level_width();
    let half_sin = sin(config.phi / 2.0);
    let term1 = du * dd * momentum.exp_minus_ik();
    let term2 = 2.0 * gamma * du;
    let term3 = 2.0 * gamma * dd;
    let term4 = 4.0 * gamma * gamma * half_sin * half_sin * momentum.exp_ik();
    let scale = term1
        .norm()
        .max(term2.norm())
        .max(term3.norm())
        .max(term4.norm());
    (term1 + term2 + term3 + term4, scale)
}

/// Transmission amplitude in the evenly distributed gauge:
/// `tau_1 = -[(w-E_u) e^{iφ/2} + (w-E_d) e^{-iφ/2}](e^{-2ik} - 1) Γ / B`.
pub fn tau_symmetric(
    config: &RingConfig,
    momentum: &Momentum,
) -> Result<Complex64, ClosedFormError> {
    let (b, scale) = denominator_b(config, momentum);
    let b = guard_denominator(b, scale)?;
    let omega = Complex64::new(momentum.omega(), 0.0);
    let half_phase = Complex64::from_polar(1.0, config.phi / 2.0);
    let numerator = ((omega - config.e_u) * half_phase
        + (omega - config.e_d) * half_phase.conj())
        * (momentum.exp_minus_2ik() - 1.0)
        * config.level_width();
    Ok(-numerator / b)
}

/// Transmission amplitude in the single-bond gauge:
/// `tau_2 = -[(w-E_u) + (w-E_d) e^{-iφ}](e^{-2ik} - 1) Γ / B`.
///
/// Identically `e^{-iφ/2} tau_1`: the two gauges differ by a pure phase.
pub fn tau_asymmetric(
    config: &RingConfig,
    momentum: &Momentum,
) -> Result<Complex64, ClosedFormError> {
    let (b, scale) = denominator_b(config, momentum);
    let b = guard_denominator(b, scale)?;
    let omega = Complex64::new(momentum.omega(), 0.0);
    let full_phase = Complex64::from_polar(1.0, -config.phi);
    let numerator = ((omega - config.e_u) + (omega - config.e_d) * full_phase)
        * (momentum.exp_minus_2ik() - 1.0)
        * config.level_width();
    Ok(-numerator / b)
}

/// Gauge-independent transmission probability
///
/// ```text
/// T = 4 Γ² sin²k [ (w-E_u)(w-E_u*) + (w-E_u)(w-E_d*) e^{iφ}
///                  + (w-E_u*)(w-E_d) e^{-iφ} + (w-E_d)(w-E_d*) ] / |B|²
/// ```
///
/// with `B = (w-E_u)(w-E_d) e^{-ik} + 2Γ(2w - E_u - E_d) + 4Γ² e^{ik} sin²(φ/2)`.
/// The returned amplitude is the evenly-distributed-gauge one.
pub fn transmission(
    config: &RingConfig,
    momentum: &Momentum,
) -> Result<TransmissionResult, ClosedFormError> {
    let tau = tau_symmetric(config, momentum)?;

    let omega = Complex64::new(momentum.omega(), 0.0);
    let du = omega - config.e_u;
    let dd = omega - config.e_d;
    let gamma = config.level_width();
    let half_sin = sin(config.phi / 2.0);
    let b = du * dd * momentum.exp_minus_ik()
        + 2.0 * gamma * (2.0 * omega - config.e_u - config.e_d)
        + 4.0 * gamma * gamma * half_sin * half_sin * momentum.exp_ik();

    let flux_phase = Complex64::from_polar(1.0, config.phi);
    let bracket = du * du.conj()
        + du * dd.conj() * flux_phase
        + du.conj() * dd * flux_phase.conj()
        + dd * dd.conj();
    let sin_k = sin(momentum.k());
    let probability = 4.0 * gamma * gamma * sin_k * sin_k * bracket.re / b.norm_sqr();
    Ok(TransmissionResult { tau, probability, conductance: probability })
}

fn pt_epsilon_gamma(config: &RingConfig) -> Result<(f64, f64), ClosedFormError> {
    if config.e_u.re == config.e_d.re && config.e_u.im == -config.e_d.im {
        Ok((config.e_u.re, config.e_u.im))
    } else {
        Err(ClosedFormError::NotPtSymmetric)
    }
}

/// Transmission probability for balanced gain and loss `E_{u,d} = ε ± iγ`:
///
/// ```text
/// T = 4 Γ² sin²k { 2[(w-ε)² + γ²] + 2 cos φ (w-ε)² + 4 γ sin φ (w-ε) - 2 γ² cos φ } / |B|²
/// B = [(w-ε)² + γ²] e^{-ik} + 4Γ(w-ε) + 4Γ² e^{ik} sin²(φ/2)
/// ```
///
/// The brackets printed for the evenly distributed (PT-symmetric) and
/// single-bond (PT-asymmetric) gauges coincide term by term, so both
/// `PtForm`s evaluate the same expression — that equality is the statement.
pub fn transmission_pt(
    config: &RingConfig,
    momentum: &Momentum,
    form: PtForm,
) -> Result<f64, ClosedFormError> {
    let (epsilon, gamma_gain) = pt_epsilon_gamma(config)?;
    let gamma = config.level_width();
    let x = momentum.omega() - epsilon;
    let half_sin = sin(config.phi / 2.0);

    let term1 = (x * x + gamma_gain * gamma_gain) * momentum.exp_minus_ik();
    let term2 = Complex64::new(4.0 * gamma * x, 0.0);
    let term3 = 4.0 * gamma * gamma * half_sin * half_sin * momentum.exp_ik();
    let scale = term1.norm().max(term2.norm()).max(term3.norm());
    let b = guard_denominator(term1 + term2 + term3, scale)?;

    let bracket = 2.0 * (x * x + gamma_gain * gamma_gain)
        + 2.0 * cos(config.phi) * x * x
        + 4.0 * gamma_gain * sin(config.phi) * x
        - 2.0 * gamma_gain * gamma_gain * cos(config.phi);
    let sin_k = sin(momentum.k());
    let t = 4.0 * gamma * gamma * sin_k * sin_k * bracket / b.norm_sqr();
    match form {
        PtForm::Symmetric | PtForm::Asymmetric => Ok(t),
    }
}

/// Transmission amplitude at the Fermi energy (`k = π/2`, `w = 0`):
///
/// ```text
/// tau = -i 2Γ (E_u e^{iφ/2} + E_d e^{-iφ/2})
///       / [ (E_u - 2iΓ)(E_d - 2iΓ) + 4Γ² cos²(φ/2) ]
/// ```
pub fn tau_fermi(config: &RingConfig) -> Result<Complex64, ClosedFormError> {
    let gamma = config.level_width();
    let two_i_gamma = Complex64::new(0.0, 2.0 * gamma);
    let half_cos = cos(config.phi / 2.0);
    let product = (config.e_u - two_i_gamma) * (config.e_d - two_i_gamma);
    let shift = 4.0 * gamma * gamma * half_cos * half_cos;
    let denominator = guard_denominator(product + shift, product.norm().max(shift))?;

    let half_phase = Complex64::from_polar(1.0, config.phi / 2.0);
    let numerator = 2.0 * gamma * (config.e_u * half_phase + config.e_d * half_phase.conj());
    Ok(-Complex64::i() * numerator / denominator)
}

/// Conductance at the Fermi energy for balanced gain and loss, in units of
/// `2e²/h`, written without the tangent so it is valid at every flux:
///
/// ```text
/// G = (ε cos(φ/2) - γ sin(φ/2))² / (ε² + α²)
/// α = (ε² - (4Γ² sin²(φ/2) - γ²)) / (4Γ)
/// ```
///
/// Equivalent to `cos²(φ/2)(ε - γ tan(φ/2))²/(ε² + α²)` wherever the tangent
/// exists. Returns IEEE infinity/NaN on the measure-zero singular manifold
/// (`ε = 0` with `α = 0`) rather than erroring.
pub fn conductance_fano_form(epsilon: f64, gamma_gain: f64, phi: f64, level_width: f64) -> f64 {
    let half_cos = cos(phi / 2.0);
    let half_sin = sin(phi / 2.0);
    let numerator = {
        let root = epsilon * half_cos - gamma_gain * half_sin;
        root * root
    };
    let alpha = fano_alpha(epsilon, gamma_gain, phi, level_width);
    numerator / (epsilon * epsilon + alpha * alpha)
}

/// Reduced-detuning scale `α = (ε² - (4Γ² sin²(φ/2) - γ²)) / (4Γ)`.
pub fn fano_alpha(epsilon: f64, gamma_gain: f64, phi: f64, level_width: f64) -> f64 {
    let half_sin = sin(phi / 2.0);
    (epsilon * epsilon
        - (4.0 * level_width * level_width * half_sin * half_sin - gamma_gain * gamma_gain))
        / (4.0 * level_width)
}

/// Circular distance from `phi` to π (mod 2π).
fn distance_to_pi(phi: f64) -> f64 {
    let d = phi - PI;
    fabs(d - TAU * round(d / TAU))
}

/// Fano asymmetry parameter `q = -γ tan(φ/2)` plus the scale α at the given
/// detuning. Signals [`ClosedFormError::InfiniteQ`] at `φ = π (mod 2π)`,
/// where the profile degenerates to a symmetric Lorentzian.
pub fn fano_parameters(
    epsilon: f64,
    gamma_gain: f64,
    phi: f64,
    level_width: f64,
) -> Result<FanoParameters, ClosedFormError> {
    Ok(FanoParameters {
        q: fano_q(gamma_gain, phi)?,
        alpha: fano_alpha(epsilon, gamma_gain, phi, level_width),
    })
}

/// `q = -γ tan(φ/2)`, finite away from `φ = π (mod 2π)`.
pub fn fano_q(gamma_gain: f64, phi: f64) -> Result<f64, ClosedFormError> {
    if distance_to_pi(phi) <= 1e-12 {
        return Err(ClosedFormError::InfiniteQ);
    }
    Ok(-gamma_gain * tan(phi / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    fn cfg(e_u: Complex64, e_d: Complex64, phi: f64) -> RingConfig {
        RingConfig::from_level_width(0.1, e_u, e_d, phi).unwrap()
    }

    fn zero() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }

    fn pt(epsilon: f64, gamma_gain: f64, phi: f64) -> RingConfig {
        cfg(
            Complex64::new(epsilon, gamma_gain),
            Complex64::new(epsilon, -gamma_gain),
            phi,
        )
    }

    #[test]
    fn fermi_amplitude_vanishes_at_pi_flux_without_gain() {
        for epsilon in [0.0, 0.3, -1.2, 0.05] {
            let config = cfg(Complex64::new(epsilon, 0.0), Complex64::new(epsilon, 0.0), PI);
            let tau = tau_fermi(&config).unwrap();
            assert!(tau.norm() < 1e-14, "eps={epsilon}: |tau| = {}", tau.norm());
        }
    }

    #[test]
    fn fermi_amplitude_reduces_at_zero_flux() {
        // E_u = E_d = ε real, φ = 0: tau = -4iΓ / (ε - 4iΓ)
        let gamma = 0.1;
        for epsilon in [0.3, -0.7, 0.05] {
            let config = cfg(Complex64::new(epsilon, 0.0), Complex64::new(epsilon, 0.0), 0.0);
            let tau = tau_fermi(&config).unwrap();
            let expected = Complex64::new(0.0, -4.0 * gamma) / Complex64::new(epsilon, -4.0 * gamma);
            assert!((tau - expected).norm() < 1e-14, "eps={epsilon}");
        }
    }

    #[test]
    fn fermi_amplitude_matches_transmission_at_half_filling() {
        let config = cfg(Complex64::new(0.2, 0.05), Complex64::new(-0.1, -0.02), 1.3);
        let m = config.dispersion(FRAC_PI_2).unwrap();
        let t = transmission(&config, &m).unwrap().probability;
        let tf = tau_fermi(&config).unwrap().norm_sqr();
        assert!(fabs(t - tf) <= 1e-12 * t.max(1.0), "{t} vs {tf}");
    }

    #[test]
    fn symmetric_amplitude_from_resonant_lorentzian() {
        // Hermitian limit at φ = 0, common level ε, half filling:
        // |tau|² = 16Γ²/(ε² + 16Γ²)
        let gamma = 0.1;
        for epsilon in [0.3, -0.5, 0.04] {
            let config = cfg(Complex64::new(epsilon, 0.0), Complex64::new(epsilon, 0.0), 0.0);
            let m = config.dispersion(FRAC_PI_2).unwrap();
            let tau = tau_symmetric(&config, &m).unwrap();
            let expected =
                16.0 * gamma * gamma / (epsilon * epsilon + 16.0 * gamma * gamma);
            assert!(fabs(tau.norm_sqr() - expected) < 1e-13, "eps={epsilon}");
        }
    }

    #[test]
    fn pt_numerator_vanishes_at_zero_detuning_zero_flux() {
        let config = pt(0.0, 0.07, 0.0);
        let m = config.dispersion(FRAC_PI_2).unwrap();
        let tau = tau_symmetric(&config, &m).unwrap();
        // the gain/loss terms cancel; only roundoff in omega = -2 cos(pi/2)
        // survives
        assert!(tau.norm() < 1e-13, "|tau| = {}", tau.norm());
    }

    #[test]
    fn asymmetric_is_symmetric_times_half_phase() {
        let samples = [
            (Complex64::new(0.2, 0.05), Complex64::new(-0.1, -0.02), 1.3, 1.2),
            (Complex64::new(-0.4, 0.3), Complex64::new(0.6, 0.1), 4.9, 0.4),
            (Complex64::new(0.0, 0.19), Complex64::new(0.0, -0.19), 2.0, FRAC_PI_2),
        ];
        for (e_u, e_d, phi, k) in samples {
            let config = cfg(e_u, e_d, phi);
            let m = config.dispersion(k).unwrap();
            let sym = tau_symmetric(&config, &m).unwrap();
            let asym = tau_asymmetric(&config, &m).unwrap();
            let expected = Complex64::from_polar(1.0, -phi / 2.0) * sym;
            assert!((asym - expected).norm() <= 1e-12, "phi={phi}");
            assert!(fabs(asym.norm() - sym.norm()) <= 1e-13);
        }
        // φ = 0: exactly equal, the phase factor is 1
        let config = cfg(Complex64::new(0.3, 0.1), Complex64::new(0.2, -0.4), 0.0);
        let m = config.dispersion(0.9).unwrap();
        assert_eq!(
            tau_symmetric(&config, &m).unwrap(),
            tau_asymmetric(&config, &m).unwrap()
        );
    }

    #[test]
    fn probability_is_squared_amplitude() {
        let samples = [
            (Complex64::new(0.2, 0.05), Complex64::new(-0.1, -0.02), 1.3, 1.2),
            (Complex64::new(0.7, -0.2), Complex64::new(-0.3, 0.4), 5.5, 2.2),
            (Complex64::new(0.1, 0.0), Complex64::new(0.4, 0.0), 2.7, 0.3),
        ];
        for (e_u, e_d, phi, k) in samples {
            let config = cfg(e_u, e_d, phi);
            let m = config.dispersion(k).unwrap();
            let result = transmission(&config, &m).unwrap();
            let direct = result.tau.norm_sqr();
            assert!(
                fabs(result.probability - direct) <= 1e-12 * direct.max(1.0),
                "phi={phi}: {} vs {direct}",
                result.probability
            );
            assert_eq!(result.probability, result.conductance);
        }
    }

    #[test]
    fn hermitian_probability_bounded_by_one() {
        let config = cfg(Complex64::new(0.4, 0.0), Complex64::new(-0.6, 0.0), 2.0);
        for k in [0.4, 1.1, 2.8] {
            let m = config.dispersion(k).unwrap();
            let t = transmission(&config, &m).unwrap().probability;
            assert!(t <= 1.0 + 1e-12 && t >= 0.0, "k={k}: T = {t}");
        }
    }

    #[test]
    fn balanced_gain_probability_exceeds_unity() {
        // ε = 0, γ = 0.19, φ = π, k = π/2: T = γ²/α² with α = (γ² - 4Γ²)/(4Γ)
        let gamma_gain = 0.19;
        let gamma = 0.1;
        let config = pt(0.0, gamma_gain, PI);
        let m = config.dispersion(FRAC_PI_2).unwrap();
        let t = transmission(&config, &m).unwrap().probability;
        let alpha = (gamma_gain * gamma_gain - 4.0 * gamma * gamma) / (4.0 * gamma);
        let expected = gamma_gain * gamma_gain / (alpha * alpha);
        assert!(t > 1.0);
        assert!(fabs(t - expected) <= 1e-9 * expected, "{t} vs {expected}");
    }

    #[test]
    fn pt_forms_are_identical_and_match_general_probability() {
        let samples = [(0.3, 0.05, 1.1, 0.8), (-0.2, 0.19, 2.9, FRAC_PI_2), (0.0, 0.4, 0.3, 2.0)];
        for (epsilon, gamma_gain, phi, k) in samples {
            let config = pt(epsilon, gamma_gain, phi);
            let m = config.dispersion(k).unwrap();
            let sym = transmission_pt(&config, &m, PtForm::Symmetric).unwrap();
            let asym = transmission_pt(&config, &m, PtForm::Asymmetric).unwrap();
            assert_eq!(sym, asym);
            let general = transmission(&config, &m).unwrap().probability;
            assert!(fabs(sym - general) <= 1e-12 * general.max(1.0), "eps={epsilon}");
        }
    }

    #[test]
    fn pt_form_reduces_to_hermitian_limit() {
        let config = pt(0.4, 0.0, 1.7);
        let m = config.dispersion(1.0).unwrap();
        let pt_value = transmission_pt(&config, &m, PtForm::Symmetric).unwrap();
        let plain = transmission(&config, &m).unwrap().probability;
        assert!(fabs(pt_value - plain) <= 1e-12);
    }

    #[test]
    fn pt_form_rejects_unbalanced_levels() {
        let config = cfg(Complex64::new(0.1, 0.05), Complex64::new(0.1, 0.05), 1.0);
        let m = config.dispersion(1.0).unwrap();
        assert_eq!(
            transmission_pt(&config, &m, PtForm::Symmetric),
            Err(ClosedFormError::NotPtSymmetric)
        );
    }

    #[test]
    fn closed_forms_refuse_the_singular_point() {
        let config = cfg(zero(), zero(), 0.0);
        let m = config.dispersion(FRAC_PI_2).unwrap();
        let alloc = GaugeAllocation::symmetric(&config);
        assert_eq!(tau_symmetric(&config, &m), Err(ClosedFormError::SingularPoint));
        assert_eq!(tau_asymmetric(&config, &m), Err(ClosedFormError::SingularPoint));
        assert!(transmission(&config, &m).is_err());
        assert_eq!(tau_general(&config, &alloc, &m), Err(ClosedFormError::SingularPoint));
        assert_eq!(r_general(&config, &alloc, &m), Err(ClosedFormError::SingularPoint));
        assert_eq!(tau_fermi(&config), Err(ClosedFormError::SingularPoint));
    }

    #[test]
    fn hermitian_reflection_complements_transmission() {
        let config = cfg(Complex64::new(0.5, 0.0), Complex64::new(-0.3, 0.0), 2.4);
        let m = config.dispersion(1.2).unwrap();
        for alloc in [
            GaugeAllocation::symmetric(&config),
            GaugeAllocation::asymmetric(&config),
        ] {
            let tau = tau_general(&config, &alloc, &m).unwrap();
            let r = r_general(&config, &alloc, &m).unwrap();
            assert!(fabs(tau.norm_sqr() + r.norm_sqr() - 1.0) < 1e-12);
        }
    }

    #[test]
    fn general_amplitude_blocks_at_pi_flux_resonance() {
        let config = cfg(zero(), zero(), PI);
        let m = config.dispersion(FRAC_PI_2).unwrap();
        let alloc = GaugeAllocation::symmetric(&config);
        let tau = tau_general(&config, &alloc, &m).unwrap();
        assert!(tau.norm() < 1e-12);
    }

    #[test]
    fn fano_form_zero_exactly_at_the_dip() {
        for (gamma_gain, phi) in [(0.05, FRAC_PI_2), (0.1, PI / 4.0), (0.02, 3.0 * PI / 4.0)] {
            let dip = gamma_gain * tan(phi / 2.0);
            let g = conductance_fano_form(dip, gamma_gain, phi, 0.1);
            assert!(g <= 1e-28, "gamma={gamma_gain} phi={phi}: G = {g}");
        }
        // φ = 0 balanced: dip at ε = 0 reaches exactly zero
        assert_eq!(conductance_fano_form(0.0, 0.07, 0.0, 0.1), 0.0);
    }

    #[test]
    fn fano_form_matches_fermi_amplitude() {
        let samples = [(0.3, 0.05, 1.3), (-0.4, 0.19, 2.2), (0.08, -0.1, 0.6)];
        for (epsilon, gamma_gain, phi) in samples {
            let g = conductance_fano_form(epsilon, gamma_gain, phi, 0.1);
            let config = pt(epsilon, gamma_gain, phi);
            let t = tau_fermi(&config).unwrap().norm_sqr();
            assert!(fabs(g - t) <= 1e-12 * t.max(1.0), "eps={epsilon}: {g} vs {t}");
        }
    }

    #[test]
    fn fano_q_special_values() {
        assert_eq!(fano_q(0.37, 0.0).unwrap(), 0.0);
        let q = fano_q(0.05, FRAC_PI_2).unwrap();
        assert!(fabs(q + 0.05) < 1e-15);
        let q = fano_q(0.05, PI / 3.0).unwrap();
        assert!(fabs(q - (-0.05 * tan(PI / 6.0))) < 1e-16);
        assert!(fabs(q + 0.028868) < 1e-6);
    }

    #[test]
    fn fano_q_diverges_at_pi() {
        assert_eq!(fano_q(0.1, PI), Err(ClosedFormError::InfiniteQ));
        assert_eq!(fano_q(0.1, 3.0 * PI), Err(ClosedFormError::InfiniteQ));
        assert_eq!(fano_q(0.1, -PI), Err(ClosedFormError::InfiniteQ));
        assert!(fano_q(0.1, PI - 1e-6).is_ok());
    }

    #[test]
    fn fano_parameters_carry_alpha() {
        let p = fano_parameters(0.2, 0.05, FRAC_PI_2, 0.1).unwrap();
        assert!(fabs(p.q + 0.05) < 1e-15);
        let expected_alpha = (0.04 - (4.0 * 0.01 * 0.5 - 0.0025)) / 0.4;
        assert!(fabs(p.alpha - expected_alpha) < 1e-15);
    }
}
