//! Physical configuration of the ring-lead system and gauge allocations of
//! the flux phase onto the four dot-lead tunneling amplitudes.

use core::f64::consts::{PI, TAU};
use core::fmt;

use libm::{cos, sqrt};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Parameters of the two-dot Aharonov-Bohm ring attached to 1D leads.
///
/// `t0` is the lead hopping and the global energy unit, `t` the common
/// magnitude of the four dot-lead tunneling amplitudes, `e_u`/`e_d` the
/// (possibly complex) dot levels and `phi` the total flux phase threading
/// the ring. The derived level broadening is `Γ = t²/t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingConfig {
    pub t0: f64,
    pub t: f64,
    pub e_u: Complex64,
    pub e_d: Complex64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelError {
    /// `t0` or `t` is zero, negative, or not finite.
    NonPositiveHopping,
    /// A dot energy or the flux phase is NaN/infinite.
    NonFiniteParameter,
    /// Momentum outside the open interval (0, π): the mode carries no flux.
    NonPropagatingMode,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NonPositiveHopping => write!(f, "hoppings t0 and t must be positive"),
            ModelError::NonFiniteParameter => write!(f, "parameters must be finite"),
            ModelError::NonPropagatingMode => {
                write!(f, "momentum k must lie strictly inside (0, pi)")
            }
        }
    }
}

impl RingConfig {
    pub fn new(
        t0: f64,
        t: f64,
        e_u: Complex64,
        e_d: Complex64,
        phi: f64,
    ) -> Result<Self, ModelError> {
        if !(t0 > 0.0) || !(t > 0.0) || !t0.is_finite() || !t.is_finite() {
            return Err(ModelError::NonPositiveHopping);
        }
        if !e_u.re.is_finite()
            || !e_u.im.is_finite()
            || !e_d.re.is_finite()
            || !e_d.im.is_finite()
            || !phi.is_finite()
        {
            return Err(ModelError::NonFiniteParameter);
        }
        Ok(RingConfig { t0, t, e_u, e_d, phi })
    }

    /// Builds a configuration in units of `t0 = 1` from the level broadening
    /// `Γ` instead of the raw coupling, via `t = sqrt(Γ)`.
    pub fn from_level_width(
        gamma_cap: f64,
        e_u: Complex64,
        e_d: Complex64,
        phi: f64,
    ) -> Result<Self, ModelError> {
        if !(gamma_cap > 0.0) || !gamma_cap.is_finite() {
            return Err(ModelError::NonPositiveHopping);
        }
        RingConfig::new(1.0, sqrt(gamma_cap), e_u, e_d, phi)
    }

    /// Level broadening `Γ = t²/t0`.
    pub fn level_width(&self) -> f64 {
        self.t * self.t / self.t0
    }

    /// Band energy of a propagating lead mode, `ω = -2 t0 cos k`.
    ///
    /// Rejects `k` outside the open interval (0, π); band edges and
    /// evanescent modes are out of scope.
    pub fn dispersion(&self, k: f64) -> Result<Momentum, ModelError> {
        if !(k > 0.0 && k < PI) {
            return Err(ModelError::NonPropagatingMode);
        }
        Ok(Momentum { k, omega: -2.0 * self.t0 * cos(k) })
    }
}

/// A propagating lead mode: Bloch momentum `k` in (0, π) and its band
/// energy `ω = -2 t0 cos k`. Only constructible through
/// [`RingConfig::dispersion`] so the pair stays consistent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Momentum {
    k: f64,
    omega: f64,
}

impl Momentum {
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `e^{ik}` on the unit circle.
    pub fn exp_ik(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.k)
    }

    /// `e^{-ik}`.
    pub fn exp_minus_ik(&self) -> Complex64 {
        Complex64::from_polar(1.0, -self.k)
    }

    /// `e^{-2ik}`.
    pub fn exp_minus_2ik(&self) -> Complex64 {
        Complex64::from_polar(1.0, -2.0 * self.k)
    }
}

/// The four complex dot-lead tunneling amplitudes realizing a total flux.
///
/// Gauge freedom allows the flux phase to be distributed over the four
/// amplitudes in any way that keeps the loop phase
/// `arg(t_ul conj(t_ur) t_dr conj(t_dl))` equal to `phi` (mod 2π); physical
/// observables must not depend on the distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeAllocation {
    pub t_ul: Complex64,
    pub t_ur: Complex64,
    pub t_dl: Complex64,
    pub t_dr: Complex64,
}

impl GaugeAllocation {
    /// Phase distributed evenly: `t_ul = t e^{iφ/4}`, `t_dl = t e^{-iφ/4}`,
    /// `t_ur = t e^{-iφ/4}`, `t_dr = t e^{iφ/4}`.
    pub fn symmetric(config: &RingConfig) -> Self {
        let quarter = config.phi / 4.0;
        GaugeAllocation {
            t_ul: Complex64::from_polar(config.t, quarter),
            t_ur: Complex64::from_polar(config.t, -quarter),
            t_dl: Complex64::from_polar(config.t, -quarter),
            t_dr: Complex64::from_polar(config.t, quarter),
        }
    }

    /// Entire phase on one bond: `t_ul = t e^{iφ}`, the rest real `t`.
    pub fn asymmetric(config: &RingConfig) -> Self {
        let t = Complex64::new(config.t, 0.0);
        GaugeAllocation {
            t_ul: Complex64::from_polar(config.t, config.phi),
            t_ur: t,
            t_dl: t,
            t_dr: t,
        }
    }

    /// Random distribution of the phase: three bond phases drawn uniformly
    /// in [0, 2π), the fourth fixed so the loop phase equals `phi` exactly.
    /// Deterministic for a fixed seed.
    pub fn random(config: &RingConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || uniform_unit(&mut rng) * TAU;
        let theta_ul = draw();
        let theta_ur = draw();
        let theta_dl = draw();
        let theta_dr = config.phi - theta_ul + theta_ur + theta_dl;
        GaugeAllocation {
            t_ul: Complex64::from_polar(config.t, theta_ul),
            t_ur: Complex64::from_polar(config.t, theta_ur),
            t_dl: Complex64::from_polar(config.t, theta_dl),
            t_dr: Complex64::from_polar(config.t, theta_dr),
        }
    }

    /// Gauge-invariant loop phase `arg(t_ul conj(t_ur) t_dr conj(t_dl))`
    /// in (-π, π].
    pub fn loop_phase(&self) -> f64 {
        (self.t_ul * self.t_ur.conj() * self.t_dr * self.t_dl.conj()).arg()
    }
}

/// Uniform f64 in [0, 1) from the top 53 bits of the generator.
fn uniform_unit<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
