//! Closed-form resonant dynamics and efficiency formulas.
//!
//! With `Δ = 0` and the emitter initially excited, the amplitude equations
//! solve to
//!
//! ```text
//! E(t) = e^{-Kt/2} [cos(gt) + (Γ/2) sin(gt)/g]
//! C(t) = -i g0 e^{-Kt/2} sin(gt)/g
//! ```
//!
//! with `K = κ + γ`, `Γ = κ - γ` and `g² = g0² - (Γ/2)²`. Only `g²` enters
//! the physics, so everything here is built from the even combinations
//! `cos(gt)` and `sin(gt)/g`, evaluated with complex `g` so that the
//! underdamped, critical and overdamped branches share one code path.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive_rates, DerivedRates, SystemParams};
use crate::spectrum::{check_axis, SpectrumGrid};

/// Below this `|g t|` the even combinations are evaluated by Taylor series.
const TAYLOR_THRESHOLD: f64 = 1e-4;

/// Below this `max(K, |g|) t` the emission probability is summed as a power
/// series instead of the closed form, which loses all relative precision as
/// `t → 0`.
const SERIES_THRESHOLD: f64 = 0.5;
const SERIES_TERMS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudePair {
    /// Excited-emitter, empty-cavity amplitude.
    pub e: Complex64,
    /// Ground-emitter, one-photon-cavity amplitude.
    pub c: Complex64,
}

impl AmplitudePair {
    pub fn norm_sqr(&self) -> f64 {
        self.e.norm_sqr() + self.c.norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyBreakdown {
    /// Quantum efficiency, `eta_c * eta_extr`.
    pub eta_q: f64,
    /// Coupling efficiency `g0²/(g0² + κγ)`.
    pub eta_c: f64,
    /// Extraction efficiency `κ/(κ + γ)`.
    pub eta_extr: f64,
    /// Law-Kimble estimate `2C0/(2C0 + 1)`.
    pub law_kimble: f64,
    /// `law_kimble - eta_q`, evaluated as `eta_c γ/(κ + γ)`.
    pub law_kimble_error: f64,
}

/// `e^{-Kt/2} cos(gt)` and `e^{-Kt/2} sin(gt)/g`, both real for real `g²`.
#[derive(Debug, Clone, Copy)]
struct Envelope {
    cos: f64,
    sinc: f64,
}

fn envelope(d: &DerivedRates, t: f64) -> Envelope {
    let k = d.k_total;
    let g = d.g;
    if g.norm() * t < TAYLOR_THRESHOLD {
        let g2 = d.g_squared;
        let t2 = t * t;
        let damp = (-0.5 * k * t).exp();
        let cos = 1.0 - g2 * t2 / 2.0 + g2 * g2 * t2 * t2 / 24.0;
        let sinc = t * (1.0 - g2 * t2 / 6.0 + g2 * g2 * t2 * t2 / 120.0);
        return Envelope {
            cos: damp * cos,
            sinc: damp * sinc,
        };
    }
    // |Im g| < K/2, so neither exponent grows.
    let i = Complex64::i();
    let decay = Complex64::new(-0.5 * k * t, 0.0);
    let plus = (i * g * t + decay).exp();
    let minus = (-i * g * t + decay).exp();
    let cos = 0.5 * (plus + minus);
    let sinc = (plus - minus) / (2.0 * i * g);
    Envelope {
        cos: cos.re,
        sinc: sinc.re,
    }
}

fn resonant(p: &SystemParams) -> Result<DerivedRates> {
    let d = derive_rates(p)?;
    if p.delta != 0.0 {
        return Err(Error::OffResonance { delta: p.delta });
    }
    Ok(d)
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(
            "t",
            format!("time must be finite and >= 0, got {t}"),
        ))
    }
}

/// Emitter and cavity amplitudes at time `t` (ns), starting from `E(0) = 1`.
pub fn amplitudes_at(p: &SystemParams, t: f64) -> Result<AmplitudePair> {
    let d = resonant(p)?;
    check_time(t)?;
    Ok(amplitudes_with(p, &d, t))
}

fn amplitudes_with(p: &SystemParams, d: &DerivedRates, t: f64) -> AmplitudePair {
    let env = envelope(d, t);
    AmplitudePair {
        e: Complex64::new(env.cos + 0.5 * d.gamma_diff * env.sinc, 0.0),
        c: Complex64::new(0.0, -p.g0 * env.sinc),
    }
}

/// Photon emission rate `n(t) = 2κ |C(t)|²` through the output mirror (1/ns).
pub fn emission_rate_at(p: &SystemParams, t: f64) -> Result<f64> {
    let d = resonant(p)?;
    check_time(t)?;
    Ok(rate_with(p, &d, t))
}

pub(crate) fn rate_with(p: &SystemParams, d: &DerivedRates, t: f64) -> f64 {
    let s = p.g0 * envelope(d, t).sinc;
    2.0 * p.kappa * s * s
}

/// Probability that the photon has left through the output mirror by time `t`.
pub fn emission_probability_at(p: &SystemParams, t: f64) -> Result<f64> {
    let d = resonant(p)?;
    check_time(t)?;
    Ok(probability_with(p, &d, t))
}

pub(crate) fn probability_with(p: &SystemParams, d: &DerivedRates, t: f64) -> f64 {
    let k = d.k_total;
    if k.max(d.g.norm()) * t <= SERIES_THRESHOLD {
        return probability_series(p, d, t);
    }
    let eta_q = breakdown(p).eta_q;
    let env = envelope(d, t);
    let bracket = (-k * t).exp() + 0.5 * k * k * env.sinc * env.sinc + k * env.sinc * env.cos;
    (eta_q * (1.0 - bracket)).max(0.0)
}

/// `2κ g0² ∫₀ᵗ e^{-Ks} (sin(gs)/g)² ds` summed term by term in `u = s/t`.
fn probability_series(p: &SystemParams, d: &DerivedRates, t: f64) -> f64 {
    let a = d.k_total * t;
    let b = d.g_squared * t * t;
    // sin(gu t)/(g t) = Σ s_m u^{2m+1}
    let mut s = [0.0; SERIES_TERMS];
    s[0] = 1.0;
    for m in 1..SERIES_TERMS {
        s[m] = -s[m - 1] * b / ((2 * m) as f64 * (2 * m + 1) as f64);
    }
    // e^{-a u} = Σ e_n u^n
    let mut e = [0.0; SERIES_TERMS];
    e[0] = 1.0;
    for n in 1..SERIES_TERMS {
        e[n] = -e[n - 1] * a / n as f64;
    }
    let mut integral = 0.0;
    for j in 0..SERIES_TERMS {
        let c_j: f64 = (0..=j).map(|m| s[m] * s[j - m]).sum();
        if c_j == 0.0 {
            continue;
        }
        for (n, e_n) in e.iter().enumerate() {
            integral += c_j * e_n / (2 * j + n + 3) as f64;
        }
    }
    2.0 * p.kappa * p.g0 * p.g0 * t * t * t * integral
}

fn breakdown(p: &SystemParams) -> EfficiencyBreakdown {
    let g0_sq = p.g0 * p.g0;
    let eta_c = g0_sq / (g0_sq + p.kappa * p.gamma);
    let eta_extr = p.kappa / (p.kappa + p.gamma);
    let law_kimble = if p.gamma == 0.0 {
        1.0
    } else {
        let c0 = g0_sq / (2.0 * p.kappa * p.gamma);
        2.0 * c0 / (2.0 * c0 + 1.0)
    };
    EfficiencyBreakdown {
        eta_q: eta_c * eta_extr,
        eta_c,
        eta_extr,
        law_kimble,
        law_kimble_error: eta_c * p.gamma / (p.kappa + p.gamma),
    }
}

/// Integrated-pulse quantum efficiency and its factors.
///
/// This is the resonant result; `delta` is not consulted. Off-resonant
/// efficiencies come from [`crate::numeric::efficiency_numeric`].
pub fn efficiency(p: &SystemParams) -> Result<EfficiencyBreakdown> {
    p.validate()?;
    Ok(breakdown(p))
}

/// Quantum efficiency written as `β κ/(κ + γ)` with the Purcell factor.
pub fn efficiency_via_purcell(p: &SystemParams) -> Result<f64> {
    let d = derive_rates(p)?;
    let pf = d.purcell.ok_or(Error::MissingGamma0)?;
    Ok(pf.beta * p.kappa / (p.kappa + p.gamma))
}

/// Output spectrum `S(δ) = (κ/π) g0² / |(K/2 - iδ)² + g²|²` on `axis` (rad/ns).
///
/// `S` is the squared Fourier transform of `C(t)`, normalised so that its
/// integral over all detunings is the quantum efficiency.
pub fn output_spectrum_analytic(p: &SystemParams, axis: &[f64]) -> Result<SpectrumGrid> {
    let d = resonant(p)?;
    check_axis(axis)?;
    let half_k = 0.5 * d.k_total;
    let scale = p.kappa / std::f64::consts::PI * p.g0 * p.g0;
    let density = axis
        .iter()
        .map(|&delta| {
            let z = Complex64::new(half_k, -delta);
            scale / (z * z + d.g_squared).norm_sqr()
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
    use crate::model::ghz;
    use crate::spectrum::uniform_axis;

    fn fig2(kappa_ghz: f64) -> SystemParams {
        SystemParams::from_ghz(8.0, kappa_ghz, 0.16).unwrap()
    }

    /// Composite Simpson on [0, t] with `n` (even) panels.
    fn simpson(f: impl Fn(f64) -> f64, t: f64, n: usize) -> f64 {
        let h = t / n as f64;
        let mut acc = f(0.0) + f(t);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(h * i as f64);
        }
        acc * h / 3.0
    }

    #[test]
    fn initial_state() {
        for k in [3.2, 8.0, 16.0] {
            let a = amplitudes_at(&fig2(k), 0.0).unwrap();
            assert_eq!(a.e, Complex64::new(1.0, 0.0));
            assert_eq!(a.c.norm(), 0.0);
            assert_eq!(emission_rate_at(&fig2(k), 0.0).unwrap(), 0.0);
            assert_eq!(emission_probability_at(&fig2(k), 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn equal_damping_collapses() {
        let p = SystemParams::new(3.0, 0.7, 0.7).unwrap();
        for &t in &[0.0, 1e-6, 0.1, 0.5, 2.0, 7.0] {
            let a = amplitudes_at(&p, t).unwrap();
            let env = (-0.7f64 * t).exp();
            assert!((a.e.re - env * (3.0 * t).cos()).abs() < 1e-14);
            assert!((a.c.im + env * (3.0 * t).sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn off_resonance_rejected() {
        let p = fig2(8.0).with_delta(0.1).unwrap();
        assert!(matches!(
            amplitudes_at(&p, 0.1),
            Err(Error::OffResonance { .. })
        ));
        assert!(matches!(
            emission_rate_at(&p, 0.1),
            Err(Error::OffResonance { .. })
        ));
        assert!(matches!(
            emission_probability_at(&p, 0.1),
            Err(Error::OffResonance { .. })
        ));
        assert!(output_spectrum_analytic(&p, &[0.0]).is_err());
        assert!(efficiency(&p).is_ok());
        assert!(amplitudes_at(&fig2(8.0), -1.0).is_err());
    }

    #[test]
    fn fig2_efficiencies() {
        let b = efficiency(&fig2(8.0)).unwrap();
        // Reference values by direct arithmetic in the GHz units.
        assert!((b.eta_q - 0.961_168_781_237_985).abs() < 1e-12);
        assert!((b.eta_c - 50.0 / 51.0).abs() < 1e-14);
        assert!((b.eta_extr - 50.0 / 51.0).abs() < 1e-14);
        let good = efficiency(&fig2(3.2)).unwrap().eta_q;
        assert!((good - 0.944_822_373_393_802).abs() < 1e-12);
        let bad = efficiency(&fig2(16.0)).unwrap().eta_q;
        assert!((bad - 0.952_018_278_750_952).abs() < 1e-12);
        assert!(((b.eta_q - b.eta_c * b.eta_extr) / b.eta_q).abs() < 1e-12);
        assert!((b.law_kimble - 50.0 / 51.0).abs() < 1e-14);
        assert!((b.law_kimble_error - 50.0 / 51.0 / 51.0).abs() < 1e-14);
    }

    #[test]
    fn lossless_emitter_is_perfect() {
        let b = efficiency(&SystemParams::new(1.0, 3.0, 0.0).unwrap()).unwrap();
        assert_eq!(
            (b.eta_q, b.eta_c, b.eta_extr, b.law_kimble),
            (1.0, 1.0, 1.0, 1.0)
        );
        assert_eq!(b.law_kimble_error, 0.0);
    }

    #[test]
    fn purcell_route() {
        let base = fig2(8.0);
        assert!(matches!(
            efficiency_via_purcell(&base),
            Err(Error::MissingGamma0)
        ));
        let eta = efficiency(&base).unwrap().eta_q;
        let p = base.with_gamma0(base.gamma).unwrap();
        assert!((efficiency_via_purcell(&p).unwrap() - eta).abs() / eta < 1e-12);
        for f in [0.05, 0.5, 1.0, 1.7, 2.0] {
            let p = base.with_gamma0(base.gamma / f).unwrap();
            assert!((efficiency_via_purcell(&p).unwrap() - eta).abs() / eta < 1e-12);
        }
    }

    #[test]
    fn purcell_limit_reaches_extraction() {
        // γ0 → 0 at fixed f: Fp → ∞, β → 1 and the result tends to κ/(κ+γ).
        let f = 0.5;
        let mut last_gap = f64::INFINITY;
        for gamma0 in [1.0, 1e-2, 1e-4, 1e-6, 1e-8] {
            let p = SystemParams::new(ghz(8.0), ghz(8.0), f * gamma0)
                .unwrap()
                .with_gamma0(gamma0)
                .unwrap();
            let eta = efficiency_via_purcell(&p).unwrap();
            let extr = efficiency(&p).unwrap().eta_extr;
            let gap = (extr - eta).abs();
            assert!(gap < last_gap);
            last_gap = gap;
        }
        assert!(last_gap < 1e-9);
    }

    #[test]
    fn probability_matches_quadrature_of_rate() {
        for k in [3.2, 8.0, 16.0] {
            let p = fig2(k);
            for &t in &[0.005, 0.02, 0.05, 0.1, 0.3] {
                let quad = simpson(|s| emission_rate_at(&p, s).unwrap(), t, 4000);
                let closed = emission_probability_at(&p, t).unwrap();
                assert!(
                    (quad - closed).abs() < 1e-7,
                    "k={k} t={t}: {quad} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn probability_reaches_efficiency() {
        let p = fig2(8.0);
        let po = emission_probability_at(&p, 1.0).unwrap();
        assert!((po - 0.96117).abs() < 1e-4);
        assert!((po - efficiency(&p).unwrap().eta_q).abs() < 1e-15);
    }

    #[test]
    fn series_and_closed_form_agree_at_threshold() {
        for k in [3.2, 8.0, 16.0] {
            let p = fig2(k);
            let d = derive_rates(&p).unwrap();
            let t = SERIES_THRESHOLD / d.k_total.max(d.g.norm());
            let s = probability_series(&p, &d, t);
            let eta = efficiency(&p).unwrap().eta_q;
            let env = envelope(&d, t);
            let kk = d.k_total;
            let closed = eta
                * (1.0
                    - ((-kk * t).exp()
                        + 0.5 * kk * kk * env.sinc * env.sinc
                        + kk * env.sinc * env.cos));
            assert!((s - closed).abs() < 1e-13, "{s} vs {closed}");
        }
    }

    #[test]
    fn rate_equals_cavity_population() {
        for k in [0.5, 3.2, 8.0, 16.0, 200.0] {
            let p = fig2(k);
            for i in 0..50 {
                let t = 0.01 * i as f64;
                let c = amplitudes_at(&p, t).unwrap().c;
                let two_route = 2.0 * p.kappa * c.norm_sqr();
                let n = emission_rate_at(&p, t).unwrap();
                assert!((two_route - n).abs() <= 1e-12 * n.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn norm_derivative_matches_losses() {
        let h = 1e-6;
        for k in [3.2, 8.0, 16.0, 100.0] {
            let p = fig2(k);
            for &t in &[0.003, 0.02, 0.07] {
                let norm = |s| amplitudes_at(&p, s).unwrap().norm_sqr();
                let fd = (norm(t + h) - norm(t - h)) / (2.0 * h);
                let a = amplitudes_at(&p, t).unwrap();
                let exact = -2.0 * p.gamma * a.e.norm_sqr() - 2.0 * p.kappa * a.c.norm_sqr();
                assert!((fd - exact).abs() <= 1e-6 * exact.abs(), "{fd} vs {exact}");
            }
        }
    }

    #[test]
    fn continuity_across_critical_damping() {
        let kappa = 10.0;
        let gamma = 1.0;
        let half = 0.5 * (kappa - gamma);
        let under = SystemParams::new(half * (1.0 + 1e-9), kappa, gamma).unwrap();
        let over = SystemParams::new(half * (1.0 - 1e-9), kappa, gamma).unwrap();
        let crit = SystemParams::new(half, kappa, gamma).unwrap();
        assert!(derive_rates(&under).unwrap().g.re > 0.0);
        assert!(derive_rates(&over).unwrap().g.im > 0.0);
        assert_eq!(derive_rates(&crit).unwrap().g_squared, 0.0);
        for i in 0..200 {
            let t = 0.02 * i as f64;
            let a = amplitudes_at(&under, t).unwrap();
            let b = amplitudes_at(&over, t).unwrap();
            let c = amplitudes_at(&crit, t).unwrap();
            assert!((a.e - b.e).norm() < 1e-6 && (a.c - b.c).norm() < 1e-6);
            assert!((a.e - c.e).norm() < 1e-6);
            let pa = emission_probability_at(&under, t).unwrap();
            let pb = emission_probability_at(&over, t).unwrap();
            assert!((pa - pb).abs() < 1e-6);
        }
    }

    #[test]
    fn probability_is_monotone() {
        for k in [0.1, 3.2, 8.0, 16.0, 500.0] {
            let p = fig2(k);
            let mut last = 0.0;
            for i in 0..20_000 {
                let t = 1e-5 * i as f64;
                let po = emission_probability_at(&p, t).unwrap();
                assert!(po >= last, "k={k} t={t}: {po} < {last}");
                last = po;
            }
        }
    }

    #[test]
    fn spectrum_parseval_and_doublet() {
        let p = fig2(8.0);
        let d = derive_rates(&p).unwrap();
        let span = 20.0 * d.k_total;
        let s = output_spectrum_analytic(&p, &uniform_axis(-span, span, 40_001).unwrap()).unwrap();
        let eta = efficiency(&p).unwrap().eta_q;
        assert!((s.integral() - eta).abs() < 1e-3);
        let peaks = s.peaks();
        assert_eq!(peaks.len(), 2);
        // Maxima of |(K/2 - iδ)² + g²|⁻² sit at ±sqrt(g² - K²/4).
        let expected = (d.g_squared - 0.25 * d.k_total * d.k_total).sqrt();
        for (peak, sign) in peaks.iter().zip([-1.0, 1.0]) {
            assert!((peak - sign * expected).abs() <= s.max_step());
        }
    }

    #[test]
    fn overdamped_spectrum_single_peak() {
        let p = SystemParams::new(0.5, ghz(16.0), ghz(0.16)).unwrap();
        let axis = uniform_axis(-400.0, 400.0, 8001).unwrap();
        let s = output_spectrum_analytic(&p, &axis).unwrap();
        let peaks = s.peaks();
        assert_eq!(peaks.len(), 1);
        assert!(peaks[0].abs() <= s.max_step());
        assert!(output_spectrum_analytic(&p, &[]).is_err());
        assert!(output_spectrum_analytic(&p, &[1.0, 0.0]).is_err());
    }
}
