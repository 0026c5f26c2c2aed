//! Physical parameters, derived rates and regime labels.
//!
//! Every rate is an angular rate in rad/ns. Linear frequencies in GHz
//! (the usual `rate / 2π` convention for quoting cavity-QED parameters)
//! are converted at the boundary with [`ghz`] and [`to_ghz`].

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio used to decide that one rate is "much larger" than another.
pub const MUCH_GREATER_RATIO: f64 = 10.0;

/// Relative tolerance for the optimal-cavity equality `κ = g0²/κ`.
pub const OPTIMAL_REL_TOL: f64 = 0.05;

/// Linear frequency in GHz to angular rate in rad/ns.
#[inline]
pub fn ghz(nu: f64) -> f64 {
    TAU * nu
}

/// Angular rate in rad/ns to linear frequency in GHz.
#[inline]
pub fn to_ghz(omega: f64) -> f64 {
    omega / TAU
}

/// Emitter-cavity system rates.
///
/// `kappa` and `gamma` are half-widths: the cavity field amplitude decays
/// at `kappa`, the emitter population leaks to non-cavity modes at `2 gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Emitter-cavity coupling constant.
    pub g0: f64,
    /// Cavity field decay rate.
    pub kappa: f64,
    /// Emitter amplitude decay rate into non-cavity modes.
    pub gamma: f64,
    /// Emitter-cavity detuning `ω0 - ωc`.
    pub delta: f64,
    /// Half the free-space spontaneous decay rate; only needed for Purcell quantities.
    pub gamma0: Option<f64>,
}

impl SystemParams {
    /// Resonant parameters from angular rates, validated.
    pub fn new(g0: f64, kappa: f64, gamma: f64) -> Result<Self> {
        let p = SystemParams {
            g0,
            kappa,
            gamma,
            delta: 0.0,
            gamma0: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Resonant parameters from linear frequencies in GHz, validated.
    pub fn from_ghz(g0: f64, kappa: f64, gamma: f64) -> Result<Self> {
        Self::new(ghz(g0), ghz(kappa), ghz(gamma))
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        self.delta = delta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_gamma0(mut self, gamma0: f64) -> Result<Self> {
        self.gamma0 = Some(gamma0);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        fn finite(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(field, format!("must be finite, got {v}")))
            }
        }
        finite("g0", self.g0)?;
        finite("kappa", self.kappa)?;
        finite("gamma", self.gamma)?;
        finite("delta", self.delta)?;
        if self.g0 <= 0.0 {
            return Err(Error::param("g0", format!("must be > 0, got {}", self.g0)));
        }
        if self.kappa <= 0.0 {
            return Err(Error::param(
                "kappa",
                format!("must be > 0, got {}", self.kappa),
            ));
        }
        if self.gamma < 0.0 {
            return Err(Error::param(
                "gamma",
                format!("must be >= 0, got {}", self.gamma),
            ));
        }
        if let Some(g0f) = self.gamma0 {
            finite("gamma0", g0f)?;
            if g0f <= 0.0 {
                return Err(Error::param("gamma0", format!("must be > 0, got {g0f}")));
            }
        }
        Ok(())
    }

    /// Total damping `K = κ + γ`.
    #[inline]
    pub fn total_damping(&self) -> f64 {
        self.kappa + self.gamma
    }

    pub fn is_resonant(&self) -> bool {
        self.delta == 0.0
    }

    /// Decay rate of the total excitation `|E|² + |C|²` at late times:
    /// twice the slowest amplitude decay rate, `K − 2 Re√(((Γ − iΔ)/2)² − g0²)`.
    ///
    /// Equals `K` on the underdamped resonant branch and falls towards
    /// `4g0²/K` deep in the overdamped regime.
    pub fn population_decay_rate(&self) -> f64 {
        let k = self.total_damping();
        let half = Complex64::new(0.5 * (self.kappa - self.gamma), -0.5 * self.delta);
        let root = (half * half - self.g0 * self.g0).sqrt();
        // Slow eigenvalue K/2 − r written as (K²/4 − r²)/(K/2 + r), which
        // does not cancel when r ≈ K/2.
        let product = Complex64::new(
            self.kappa * self.gamma + self.g0 * self.g0 + 0.25 * self.delta * self.delta,
            0.5 * (self.kappa - self.gamma) * self.delta,
        );
        2.0 * (product / (0.5 * k + root)).re
    }
}

/// Purcell-picture quantities, defined only when `gamma0` is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurcellFactors {
    /// Fraction of free-space emission going to non-cavity modes, `γ/γ0`.
    pub f: f64,
    /// Purcell factor `g0²/(κ γ0)`.
    pub fp: f64,
    /// Spontaneous-emission coupling factor `Fp/(Fp + f)`.
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedRates {
    /// `K = κ + γ`.
    pub k_total: f64,
    /// `Γ = κ - γ`.
    pub gamma_diff: f64,
    /// `g0² - (Γ/2)²`, the signed square of the generalized Rabi frequency.
    pub g_squared: f64,
    /// Principal square root of `g_squared`: real and non-negative, or
    /// purely imaginary with positive imaginary part.
    pub g: Complex64,
    /// Cooperativity `g0²/(2κγ)`; `+∞` for a lossless emitter.
    pub c0: f64,
    /// Full atomic linewidth `2γ`.
    pub gamma1: f64,
    pub purcell: Option<PurcellFactors>,
}

/// Principal square root of a real number, as a complex value.
pub(crate) fn principal_sqrt(x: f64) -> Complex64 {
    if x >= 0.0 {
        Complex64::new(x.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-x).sqrt())
    }
}

pub fn derive_rates(p: &SystemParams) -> Result<DerivedRates> {
    p.validate()?;
    let k_total = p.kappa + p.gamma;
    let gamma_diff = p.kappa - p.gamma;
    let half = 0.5 * gamma_diff;
    // (g0 - Γ/2)(g0 + Γ/2) avoids cancellation near critical damping.
    let g_squared = (p.g0 - half) * (p.g0 + half);
    let g = principal_sqrt(g_squared);
    let g0_sq = p.g0 * p.g0;
    let c0 = if p.gamma == 0.0 {
        f64::INFINITY
    } else {
        g0_sq / (2.0 * p.kappa * p.gamma)
    };
    let purcell = p.gamma0.map(|gamma0| {
        let f = p.gamma / gamma0;
        let fp = g0_sq / (p.kappa * gamma0);
        PurcellFactors {
            f,
            fp,
            beta: fp / (fp + f),
        }
    });
    Ok(DerivedRates {
        k_total,
        gamma_diff,
        g_squared,
        g,
        c0,
        gamma1: 2.0 * p.gamma,
        purcell,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Coupling {
    Strong,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CavityRegime {
    /// `κ ≈ g0²/κ ≫ γ`.
    Optimal,
    /// `g0²/κ > κ ≫ γ`.
    Good,
    /// `κ > g0²/κ ≫ γ`.
    Bad,
    /// Emitter loss not negligible against both cavity rates.
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub coupling: Coupling,
    pub cavity: CavityRegime,
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coupling::Strong => "Strong",
            Coupling::Weak => "Weak",
        })
    }
}

impl fmt::Display for CavityRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CavityRegime::Optimal => "Optimal",
            CavityRegime::Good => "Good",
            CavityRegime::Bad => "Bad",
            CavityRegime::Unclassified => "Unclassified",
        })
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.coupling, self.cavity)
    }
}

/// Labels the coupling strength and the cavity regime.
///
/// Strong coupling requires `g0 ≥ κ` and `g0 > γ`. The cavity labels compare
/// `κ` with the cavity-enhanced emitter rate `g0²/κ`, and apply only when
/// `γ` is at least [`MUCH_GREATER_RATIO`] times smaller than both.
pub fn classify_regime(p: &SystemParams, _d: &DerivedRates) -> Result<RegimeLabel> {
    p.validate()?;
    let coupling = if p.g0 >= p.kappa && p.g0 > p.gamma {
        Coupling::Strong
    } else {
        Coupling::Weak
    };
    let enhanced = p.g0 * p.g0 / p.kappa;
    let gamma_negligible =
        p.kappa >= MUCH_GREATER_RATIO * p.gamma && enhanced >= MUCH_GREATER_RATIO * p.gamma;
    let cavity = if !gamma_negligible {
        CavityRegime::Unclassified
    } else if (p.kappa - enhanced).abs() <= OPTIMAL_REL_TOL * p.kappa.max(enhanced) {
        CavityRegime::Optimal
    } else if enhanced > p.kappa {
        CavityRegime::Good
    } else {
        CavityRegime::Bad
    };
    Ok(RegimeLabel { coupling, cavity })
}
