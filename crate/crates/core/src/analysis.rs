//! Design answers built on the closed forms and the integrator: pulse shape
//! metrics, cavity-decay optimization, parameter sweeps and the Law-Kimble
//! comparison.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{efficiency, rate_with, EfficiencyBreakdown};
use crate::error::{Error, Result};
use crate::model::{classify_regime, derive_rates, RegimeLabel, SystemParams};
use crate::numeric::{
    integrate_to_long_time, AmplitudeTrajectory, IntegrationConfig, DEFAULT_HORIZON_KT,
};
use crate::search::{bisect, golden_max};

/// Relative tolerance of the κ search.
pub const KAPPA_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionMetrics {
    pub eta_q: f64,
    /// Time of the emission-rate maximum (ns).
    pub peak_time: f64,
    /// Emission rate at `peak_time` (1/ns).
    pub peak_rate: f64,
    /// Full width at half maximum of the primary lobe of `n(t)` (ns).
    pub fwhm: f64,
    /// Set when a later Rabi lobe climbs back above half maximum.
    pub multi_lobe: bool,
    pub regime: RegimeLabel,
    pub breakdown: EfficiencyBreakdown,
}

fn metrics_common(p: &SystemParams) -> Result<(RegimeLabel, EfficiencyBreakdown)> {
    let d = derive_rates(p)?;
    Ok((classify_regime(p, &d)?, efficiency(p)?))
}

/// Peak and primary-lobe width of the resonant emission rate.
pub fn pulse_metrics(p: &SystemParams) -> Result<EmissionMetrics> {
    let d = derive_rates(p)?;
    if p.delta != 0.0 {
        return Err(Error::OffResonance { delta: p.delta });
    }
    let (regime, breakdown) = metrics_common(p)?;
    let n = |t: f64| rate_with(p, &d, t);
    let k = d.k_total;

    // n(t) vanishes at multiples of π/g on the underdamped branch and is
    // unimodal between consecutive zeros.
    let lobe_end = (d.g_squared > 0.0).then(|| PI / d.g.re);
    let mut hi = DEFAULT_HORIZON_KT / k;
    if let Some(end) = lobe_end {
        hi = hi.min(end);
    }
    let mut peak = golden_max(n, 0.0, hi, 1e-12 * hi, 400);
    let mut widenings = 0;
    while lobe_end.is_none() && peak.x >= hi * (1.0 - 1e-9) && widenings < 64 {
        hi *= 2.0;
        peak = golden_max(n, 0.0, hi, 1e-12 * hi, 400);
        widenings += 1;
    }
    if !(peak.value > 0.0 && peak.value.is_finite()) {
        return Err(Error::DegeneratePulse);
    }
    let half = 0.5 * peak.value;
    let above = |t: f64| n(t) - half;
    let left = bisect(above, 0.0, peak.x, 1e-15 * peak.x)
        .ok_or_else(|| Error::Optimization("no half-maximum crossing before the peak".into()))?;
    let right_bound = match lobe_end {
        Some(end) => end,
        None => {
            let mut r = 2.0 * peak.x;
            let mut tries = 0;
            while above(r) >= 0.0 && tries < 64 {
                r *= 2.0;
                tries += 1;
            }
            r
        }
    };
    let right = bisect(above, peak.x, right_bound, 1e-15 * right_bound)
        .ok_or_else(|| Error::Optimization("no half-maximum crossing after the peak".into()))?;
    // Later lobes peak at t* + mπ/g with weight e^{-Kmπ/g}, so the first
    // repeat decides.
    let multi_lobe = lobe_end.is_some_and(|end| n(peak.x + end) >= half);

    Ok(EmissionMetrics {
        eta_q: breakdown.eta_q,
        peak_time: peak.x,
        peak_rate: peak.value,
        fwhm: right - left,
        multi_lobe,
        regime,
        breakdown,
    })
}

/// Pulse metrics read off an integrated trajectory, for any detuning.
///
/// The peak is refined by a parabola through the three highest-neighbour
/// nodes; half-maximum crossings are linearly interpolated.
pub fn pulse_metrics_from_trajectory(traj: &AmplitudeTrajectory) -> Result<EmissionMetrics> {
    let p = &traj.params;
    let (regime, breakdown) = metrics_common(p)?;
    let rates: Vec<f64> = (0..traj.len()).map(|i| traj.emission_rate(i)).collect();
    let (imax, &nmax) = rates
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::DegeneratePulse)?;
    if nmax.is_nan() || nmax <= 0.0 {
        return Err(Error::DegeneratePulse);
    }
    let t = &traj.times;
    let (peak_time, peak_rate) = if imax > 0 && imax + 1 < rates.len() {
        let (y0, y1, y2) = (rates[imax - 1], rates[imax], rates[imax + 1]);
        let h = t[imax + 1] - t[imax];
        let denom = y0 - 2.0 * y1 + y2;
        if denom < 0.0 {
            let off = 0.5 * (y0 - y2) / denom;
            (t[imax] + off * h, y1 - 0.25 * (y0 - y2) * off)
        } else {
            (t[imax], y1)
        }
    } else {
        (t[imax], nmax)
    };
    let half = 0.5 * peak_rate;
    let cross = |i: usize, j: usize| {
        let (a, b) = (rates[i] - half, rates[j] - half);
        t[i] + (t[j] - t[i]) * a / (a - b)
    };
    let left = (0..imax)
        .rev()
        .find(|&i| rates[i] < half)
        .map(|i| cross(i, i + 1))
        .ok_or_else(|| Error::Optimization("no half-maximum crossing before the peak".into()))?;
    let right_idx = (imax + 1..rates.len())
        .find(|&i| rates[i] < half)
        .ok_or_else(|| {
            Error::Optimization("emission rate stays above half maximum to the horizon".into())
        })?;
    let right = cross(right_idx - 1, right_idx);
    let multi_lobe = rates[right_idx..].iter().any(|&r| r >= half);

    Ok(EmissionMetrics {
        eta_q: traj.emitted_with_tail(),
        peak_time,
        peak_rate,
        fwhm: right - left,
        multi_lobe,
        regime,
        breakdown,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimumKind {
    /// Stationary point strictly inside the bracket.
    Interior,
    /// Objective still rising at the lower end.
    LowerBoundary,
    /// Objective still rising at the upper end.
    UpperBoundary,
    /// Objective constant over the bracket.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub kappa_star: f64,
    pub eta_q_star: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
    pub kind: OptimumKind,
}

/// Golden-section maximization of an arbitrary objective over
/// `κ ∈ [lo, hi]`, searched in `ln κ`.
pub fn maximize_over_kappa(
    bracket: (f64, f64),
    objective: impl Fn(f64) -> Result<f64>,
) -> Result<OptimizationReport> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::param(
            "bracket",
            format!("need 0 < lo < hi, got ({lo}, {hi})"),
        ));
    }
    let mut failure = None;
    let mut eval = |kappa: f64| match objective(kappa) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NEG_INFINITY
        }
    };
    let (f_lo, f_hi) = (eval(lo), eval(hi));
    let mid = (lo * hi).sqrt();
    let f_mid = eval(mid);
    let tol = KAPPA_REL_TOL * 0.1;
    let best = golden_max(|x| eval(x.exp()), lo.ln(), hi.ln(), tol, 500);
    if let Some(e) = failure {
        return Err(e);
    }
    let scale = f_lo.abs().max(f_hi.abs()).max(f_mid.abs());
    let flat = [f_lo, f_hi, best.value]
        .iter()
        .all(|v| (v - f_mid).abs() <= 4.0 * f64::EPSILON * scale);
    let kappa_star = best.x.exp().clamp(lo, hi);
    let kind = if flat {
        OptimumKind::Flat
    } else if (kappa_star / lo).ln() <= 2.0 * tol {
        OptimumKind::LowerBoundary
    } else if (hi / kappa_star).ln() <= 2.0 * tol {
        OptimumKind::UpperBoundary
    } else {
        OptimumKind::Interior
    };
    Ok(OptimizationReport {
        kappa_star: if flat { mid } else { kappa_star },
        eta_q_star: if flat { f_mid } else { best.value },
        iterations: best.iterations,
        bracket,
        kind,
    })
}

/// Cavity decay rate that maximizes the resonant quantum efficiency for a
/// given emitter (`g0`, `gamma`).
pub fn optimize_kappa(g0: f64, gamma: f64, bracket: (f64, f64)) -> Result<OptimizationReport> {
    // Validates g0 and gamma once up front.
    SystemParams::new(g0, bracket.0.max(f64::MIN_POSITIVE), gamma)?;
    maximize_over_kappa(bracket, |kappa| {
        Ok(efficiency(&SystemParams {
            g0,
            kappa,
            gamma,
            delta: 0.0,
            gamma0: None,
        })?
        .eta_q)
    })
}

/// Law-Kimble estimate next to the full efficiency.
pub fn compare_law_kimble(p: &SystemParams) -> Result<EfficiencyBreakdown> {
    efficiency(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    G0,
    Kappa,
    Gamma,
    Delta,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::G0 => "g0",
            SweepAxis::Kappa => "kappa",
            SweepAxis::Gamma => "gamma",
            SweepAxis::Delta => "delta",
        }
    }

    fn apply(self, base: &SystemParams, value: f64) -> SystemParams {
        let mut p = *base;
        match self {
            SweepAxis::G0 => p.g0 = value,
            SweepAxis::Kappa => p.kappa = value,
            SweepAxis::Gamma => p.gamma = value,
            SweepAxis::Delta => p.delta = value,
        }
        p
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g0" => Ok(SweepAxis::G0),
            "kappa" => Ok(SweepAxis::Kappa),
            "gamma" => Ok(SweepAxis::Gamma),
            "delta" => Ok(SweepAxis::Delta),
            other => Err(Error::param(
                "sweep_axis",
                format!("expected g0|kappa|gamma|delta, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Analytic,
    Numeric,
}

impl std::str::FromStr for Route {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Route::Analytic),
            "numeric" => Ok(Route::Numeric),
            other => Err(Error::param(
                "route",
                format!("expected analytic|numeric, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub metrics: Option<EmissionMetrics>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub provenance: Route,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }
}

fn evaluate_point(p: &SystemParams, route: Route) -> Result<EmissionMetrics> {
    p.validate()?;
    match route {
        Route::Analytic => pulse_metrics(p),
        Route::Numeric => {
            let traj = integrate_to_long_time(p, &IntegrationConfig::for_params(p))?;
            pulse_metrics_from_trajectory(&traj)
        }
    }
}

/// Evaluates metrics at each axis value, in parallel, preserving input order.
///
/// Detuning sweeps and off-resonant bases always use the numeric route.
/// Failures at individual points are recorded on that point.
pub fn sweep(
    base: &SystemParams,
    axis: SweepAxis,
    values: &[f64],
    route: Route,
) -> Result<SweepResult> {
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::InvalidGrid(
            "sweep values must be strictly monotone".into(),
        ));
    }
    let route = if axis == SweepAxis::Delta || base.delta != 0.0 {
        Route::Numeric
    } else {
        route
    };
    let points = values
        .par_iter()
        .map(
            |&value| match evaluate_point(&axis.apply(base, value), route) {
                Ok(m) => SweepPoint {
                    value,
                    metrics: Some(m),
                    error: None,
                },
                Err(e) => SweepPoint {
                    value,
                    metrics: None,
                    error: Some(e.to_string()),
                },
            },
        )
        .collect();
    Ok(SweepResult {
        axis,
        provenance: route,
        points,
    })
}
