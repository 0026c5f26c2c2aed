//! Fixed-step RK4 integration of the amplitude equations
//!
//! ```text
//! dE/dt = -i g0 e^{+iΔt} C - γ E
//! dC/dt = -i g0 e^{-iΔt} E - κ C
//! ```
//!
//! for arbitrary detuning. The two loss channels are carried as extra state
//! components `dP_out/dt = 2κ|C|²` and `dP_spont/dt = 2γ|E|²`, so RK4 on
//! them reduces to Simpson's rule over each step and the probability ledger
//! `|E|² + |C|² + P_out + P_spont = 1` holds to the integrator's own order.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::AmplitudePair;
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::spectrum::{check_axis, SpectrumGrid};

/// `K t_max` needed before the remaining excitation is treated as a tail.
pub const MIN_HORIZON_KT: f64 = 40.0;
/// Default horizon in units of `1/K`.
pub const DEFAULT_HORIZON_KT: f64 = 45.0;
/// Ledger residual beyond which an integration is rejected.
pub const LEDGER_ABORT: f64 = 1e-6;
/// Steps larger than this fraction of the fastest period trigger a warning.
const STEP_WARN_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Rk4Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    /// Horizon (ns).
    pub t_max: f64,
    /// Requested step (ns); the grid uses the largest step not exceeding it
    /// that lands exactly on `t_max`.
    pub dt: f64,
    pub method: Method,
    /// When set, [`efficiency_numeric`] extends `t_max` to
    /// `tail_extension / K` if the horizon is too short.
    pub tail_extension: Option<f64>,
}

fn fastest_rate(p: &SystemParams) -> f64 {
    let base = p.total_damping().max(p.g0);
    // Near |Δ| ≈ g0 the two dressed frequencies separate by more than
    // either rate alone; the extra |Δ|/2 keeps the ledger within 1e-8.
    (base + 0.5 * p.delta.abs()).max(p.delta.abs())
}

impl IntegrationConfig {
    /// `dt = min(1e-3 ns, 0.02 / max(max(K, g0) + |Δ|/2, |Δ|))`, `t_max = 45/K`.
    /// On resonance this is `0.02 / max(K, g0)`.
    pub fn for_params(p: &SystemParams) -> Self {
        IntegrationConfig {
            t_max: DEFAULT_HORIZON_KT / p.total_damping(),
            dt: (0.02 / fastest_rate(p)).min(1e-3),
            method: Method::Rk4Fixed,
            tail_extension: Some(DEFAULT_HORIZON_KT),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::InvalidIntegration(format!(
                "t_max must be > 0, got {}",
                self.t_max
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidIntegration(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if let Some(m) = self.tail_extension {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidIntegration(format!(
                    "tail_extension must be > 0, got {m}"
                )));
            }
        }
        Ok(())
    }
}

/// Time grid with the amplitudes and accumulated channel probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeTrajectory {
    pub params: SystemParams,
    pub times: Vec<f64>,
    pub e: Vec<Complex64>,
    pub c: Vec<Complex64>,
    /// `2κ ∫ |C|²`, probability emitted through the output mirror.
    pub p_out: Vec<f64>,
    /// `2γ ∫ |E|²`, probability lost to non-cavity modes.
    pub p_spont: Vec<f64>,
}

impl AmplitudeTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn ledger_residual(&self, i: usize) -> f64 {
        self.e[i].norm_sqr() + self.c[i].norm_sqr() + self.p_out[i] + self.p_spont[i] - 1.0
    }

    pub fn max_ledger_residual(&self) -> f64 {
        (0..self.len())
            .map(|i| self.ledger_residual(i).abs())
            .fold(0.0, f64::max)
    }

    /// `n(t_i) = 2κ |C(t_i)|²`.
    pub fn emission_rate(&self, i: usize) -> f64 {
        2.0 * self.params.kappa * self.c[i].norm_sqr()
    }

    pub fn amplitudes(&self, i: usize) -> AmplitudePair {
        AmplitudePair {
            e: self.e[i],
            c: self.c[i],
        }
    }

    /// Final `P_out` plus the share of the remaining excitation that will
    /// still leave through the mirror, taken at the instantaneous branching
    /// ratio `κ|C|² : γ|E|²` of the last node.
    pub fn emitted_with_tail(&self) -> f64 {
        let last = self.len() - 1;
        let e2 = self.e[last].norm_sqr();
        let c2 = self.c[last].norm_sqr();
        let out = self.params.kappa * c2;
        let spont = self.params.gamma * e2;
        let tail = if out + spont > 0.0 {
            (e2 + c2) * out / (out + spont)
        } else {
            0.0
        };
        self.p_out[last] + tail
    }
}

#[derive(Debug, Clone, Copy)]
struct State {
    e: Complex64,
    c: Complex64,
    p_out: f64,
    p_spont: f64,
}

impl Add for State {
    type Output = State;
    fn add(self, o: State) -> State {
        State {
            e: self.e + o.e,
            c: self.c + o.c,
            p_out: self.p_out + o.p_out,
            p_spont: self.p_spont + o.p_spont,
        }
    }
}

impl Mul<State> for f64 {
    type Output = State;
    fn mul(self, s: State) -> State {
        State {
            e: self * s.e,
            c: self * s.c,
            p_out: self * s.p_out,
            p_spont: self * s.p_spont,
        }
    }
}

fn derivative(p: &SystemParams, t: f64, y: &State) -> State {
    let minus_i_g0 = Complex64::new(0.0, -p.g0);
    let phase = Complex64::cis(p.delta * t);
    State {
        e: minus_i_g0 * phase * y.c - p.gamma * y.e,
        c: minus_i_g0 * phase.conj() * y.e - p.kappa * y.c,
        p_out: 2.0 * p.kappa * y.c.norm_sqr(),
        p_spont: 2.0 * p.gamma * y.e.norm_sqr(),
    }
}

fn rk4_step(p: &SystemParams, t: f64, h: f64, y: &State) -> State {
    let k1 = derivative(p, t, y);
    let k2 = derivative(p, t + 0.5 * h, &(*y + (0.5 * h) * k1));
    let k3 = derivative(p, t + 0.5 * h, &(*y + (0.5 * h) * k2));
    let k4 = derivative(p, t + h, &(*y + h * k3));
    *y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrates from the excited emitter, `E(0) = 1`, `C(0) = 0`.
pub fn integrate(p: &SystemParams, cfg: &IntegrationConfig) -> Result<AmplitudeTrajectory> {
    integrate_from(
        p,
        cfg,
        AmplitudePair {
            e: Complex64::new(1.0, 0.0),
            c: Complex64::new(0.0, 0.0),
        },
    )
}

/// Integrates from an arbitrary normalised initial state.
pub fn integrate_from(
    p: &SystemParams,
    cfg: &IntegrationConfig,
    initial: AmplitudePair,
) -> Result<AmplitudeTrajectory> {
    p.validate()?;
    cfg.validate()?;
    let norm = initial.norm_sqr();
    if norm.is_nan() || (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidIntegration(format!(
            "initial state must be normalised, |E|²+|C|² = {norm}"
        )));
    }
    let warn_dt = STEP_WARN_FRACTION / fastest_rate(p);
    if cfg.dt > warn_dt {
        warn!(
            "dt = {} ns exceeds the recommended bound {:.3e} ns; accuracy may suffer",
            cfg.dt, warn_dt
        );
    }

    let steps = ((cfg.t_max / cfg.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = cfg.t_max / steps as f64;

    let mut traj = AmplitudeTrajectory {
        params: *p,
        times: Vec::with_capacity(steps + 1),
        e: Vec::with_capacity(steps + 1),
        c: Vec::with_capacity(steps + 1),
        p_out: Vec::with_capacity(steps + 1),
        p_spont: Vec::with_capacity(steps + 1),
    };
    let mut y = State {
        e: initial.e,
        c: initial.c,
        p_out: 0.0,
        p_spont: 0.0,
    };
    for i in 0..=steps {
        let t = if i == steps { cfg.t_max } else { h * i as f64 };
        if i > 0 {
            y = rk4_step(p, h * (i - 1) as f64, h, &y);
        }
        let residual = y.e.norm_sqr() + y.c.norm_sqr() + y.p_out + y.p_spont - 1.0;
        if residual.is_nan() || residual.abs() > LEDGER_ABORT {
            return Err(Error::LedgerViolation {
                node: i,
                time: t,
                residual,
            });
        }
        traj.times.push(t);
        traj.e.push(y.e);
        traj.c.push(y.c);
        traj.p_out.push(y.p_out);
        traj.p_spont.push(y.p_spont);
    }
    Ok(traj)
}

/// Horizon after applying `tail_extension`, or an error if still too short.
///
/// The horizon is measured in units of `1/rate`.
fn resolve_horizon(cfg: &IntegrationConfig, rate: f64) -> Result<IntegrationConfig> {
    cfg.validate()?;
    let k = rate;
    let mut cfg = *cfg;
    if k * cfg.t_max < MIN_HORIZON_KT {
        if let Some(m) = cfg.tail_extension {
            cfg.t_max = cfg.t_max.max(m / k);
        }
    }
    let kt = k * cfg.t_max;
    if kt < MIN_HORIZON_KT {
        return Err(Error::InsufficientHorizon {
            kt,
            required: MIN_HORIZON_KT,
        });
    }
    Ok(cfg)
}

/// Integrates to a long-time horizon and returns the emitted photon
/// probability, including the exponentially small tail past the horizon.
pub fn efficiency_numeric(p: &SystemParams, cfg: &IntegrationConfig) -> Result<f64> {
    p.validate()?;
    // The tail estimate is exact once only the slow eigenmode survives,
    // so a horizon in units of 1/K suffices even when decay is slower.
    let cfg = resolve_horizon(cfg, p.total_damping())?;
    Ok(integrate(p, &cfg)?.emitted_with_tail())
}

/// Integrates until the excitation has decayed: the horizon is extended
/// to `tail_extension` in units of [`SystemParams::population_decay_rate`],
/// which exceeds `1/K` on the overdamped branch.
pub fn integrate_to_long_time(
    p: &SystemParams,
    cfg: &IntegrationConfig,
) -> Result<AmplitudeTrajectory> {
    p.validate()?;
    let cfg = resolve_horizon(cfg, p.population_decay_rate())?;
    integrate(p, &cfg)
}

/// `S(δ) = (κ/π) |∫ e^{iδt} C(t) dt|²` by the trapezoid rule on the
/// trajectory's own grid.
pub fn output_spectrum_numeric(traj: &AmplitudeTrajectory, axis: &[f64]) -> Result<SpectrumGrid> {
    check_axis(axis)?;
    // Truncation error is set by the slowest decaying mode.
    let kt = traj.params.population_decay_rate() * traj.horizon();
    if kt < MIN_HORIZON_KT {
        return Err(Error::InsufficientHorizon {
            kt,
            required: MIN_HORIZON_KT,
        });
    }
    let n = traj.len();
    let weights: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 {
                traj.times[i] - traj.times[i - 1]
            } else {
                0.0
            };
            let right = if i + 1 < n {
                traj.times[i + 1] - traj.times[i]
            } else {
                0.0
            };
            0.5 * (left + right)
        })
        .collect();
    let scale = traj.params.kappa / PI;
    let density = axis
        .iter()
        .map(|&delta| {
            let amp: Complex64 = traj
                .times
                .iter()
                .zip(&traj.c)
                .zip(&weights)
                .map(|((&t, &c), &w)| w * Complex64::cis(delta * t) * c)
                .sum();
            scale * amp.norm_sqr()
        })
        .collect();
    Ok(SpectrumGrid {
        delta: axis.to_vec(),
        density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{amplitudes_at, efficiency};
    use crate::model::ghz;

    fn fig2(kappa_ghz: f64) -> SystemParams {
        SystemParams::from_ghz(8.0, kappa_ghz, 0.16).unwrap()
    }

    #[test]
    fn matches_closed_form_on_resonance() {
        let p = fig2(8.0);
        let cfg = IntegrationConfig {
            t_max: 1.0,
            dt: 1e-4,
            method: Method::Rk4Fixed,
            tail_extension: None,
        };
        let traj = integrate(&p, &cfg).unwrap();
        assert_eq!(traj.len(), 10_001);
        let mut worst = 0.0f64;
        for i in 0..traj.len() {
            let a = amplitudes_at(&p, traj.times[i]).unwrap();
            worst = worst
                .max((traj.e[i] - a.e).norm())
                .max((traj.c[i] - a.c).norm());
        }
        assert!(worst <= 1e-8, "{worst}");
        assert!((traj.p_out[traj.len() - 1] - 0.96117).abs() < 1e-4);
    }

    #[test]
    fn decoupled_emitter_decays_freely() {
        let p = SystemParams::new(1e-300, 5.0, 0.8).unwrap();
        let cfg = IntegrationConfig::for_params(&p);
        let traj = integrate(&p, &cfg).unwrap();
        for i in (0..traj.len()).step_by(97) {
            let t = traj.times[i];
            assert!((traj.e[i].re - (-0.8 * t).exp()).abs() < 1e-10);
            assert!(traj.c[i].norm() < 1e-250);
        }
        assert!(efficiency_numeric(&p, &cfg).unwrap() < 1e-250);
    }

    #[test]
    fn ledger_and_monotone_channels() {
        for k in [3.2, 8.0, 16.0] {
            let p = fig2(k).with_delta(ghz(3.0)).unwrap();
            let traj = integrate(&p, &IntegrationConfig::for_params(&p)).unwrap();
            assert!(traj.max_ledger_residual() <= 1e-8);
            assert!(traj.p_out.windows(2).all(|w| w[1] >= w[0]));
            assert!(traj.p_spont.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn lossless_emitter_emits_everything() {
        for k in [0.5, 3.0, 40.0] {
            let p = SystemParams::from_ghz(8.0, k, 0.0).unwrap();
            let eta = efficiency_numeric(&p, &IntegrationConfig::for_params(&p)).unwrap();
            assert!((eta - 1.0).abs() < 1e-8, "{eta}");
        }
    }

    #[test]
    fn fig2_numeric_efficiencies() {
        for k in [3.2, 8.0, 16.0] {
            let p = fig2(k);
            let eta = efficiency_numeric(&p, &IntegrationConfig::for_params(&p)).unwrap();
            let exact = efficiency(&p).unwrap().eta_q;
            assert!((eta - exact).abs() <= 1e-6, "{eta} vs {exact}");
        }
    }

    #[test]
    fn detuning_lowers_efficiency() {
        let p = fig2(8.0);
        let on = efficiency_numeric(&p, &IntegrationConfig::for_params(&p)).unwrap();
        let off_p = p.with_delta(5.0 * p.g0).unwrap();
        let off = efficiency_numeric(&off_p, &IntegrationConfig::for_params(&off_p)).unwrap();
        assert!(off < on, "{off} !< {on}");
    }

    #[test]
    fn horizon_errors() {
        let p = fig2(8.0);
        let cfg = IntegrationConfig {
            t_max: 0.1,
            dt: 1e-3,
            method: Method::Rk4Fixed,
            tail_extension: None,
        };
        assert!(matches!(
            efficiency_numeric(&p, &cfg),
            Err(Error::InsufficientHorizon { .. })
        ));
        let traj = integrate(&p, &cfg).unwrap();
        assert!(output_spectrum_numeric(&traj, &[0.0]).is_err());
        let extended = IntegrationConfig {
            tail_extension: Some(45.0),
            ..cfg
        };
        assert!(efficiency_numeric(&p, &extended).is_ok());
        let too_short = IntegrationConfig {
            tail_extension: Some(10.0),
            ..cfg
        };
        assert!(efficiency_numeric(&p, &too_short).is_err());
    }

    #[test]
    fn ledger_violation_aborts() {
        let p = fig2(8.0);
        let cfg = IntegrationConfig {
            t_max: 1.0,
            dt: 0.05,
            method: Method::Rk4Fixed,
            tail_extension: None,
        };
        match integrate(&p, &cfg) {
            Err(Error::LedgerViolation { node, residual, .. }) => {
                assert!(node > 0);
                assert!(residual.abs() > LEDGER_ABORT);
            }
            other => panic!("expected ledger violation, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let p = fig2(8.0);
        let good = IntegrationConfig::for_params(&p);
        for bad in [
            IntegrationConfig { dt: 0.0, ..good },
            IntegrationConfig {
                t_max: -1.0,
                ..good
            },
            IntegrationConfig {
                dt: f64::NAN,
                ..good
            },
            IntegrationConfig {
                tail_extension: Some(0.0),
                ..good
            },
        ] {
            assert!(matches!(
                integrate(&p, &bad),
                Err(Error::InvalidIntegration(_))
            ));
        }
        let unnormalised = AmplitudePair {
            e: Complex64::new(0.5, 0.0),
            c: Complex64::new(0.0, 0.0),
        };
        assert!(integrate_from(&p, &good, unnormalised).is_err());
    }

    #[test]
    fn grid_lands_on_horizon() {
        let p = fig2(8.0);
        let cfg = IntegrationConfig {
            t_max: 0.0123,
            dt: 0.001,
            method: Method::Rk4Fixed,
            tail_extension: None,
        };
        let traj = integrate(&p, &cfg).unwrap();
        assert_eq!(traj.horizon(), 0.0123);
        assert_eq!(traj.len(), 14);
    }
}
