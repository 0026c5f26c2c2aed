//! Output-photon spectral densities on a detuning axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Photon spectral density `S(δ)` sampled on a strictly increasing detuning
/// axis (rad/ns). `S` is a density per unit angular detuning, so the
/// integral over the axis is a probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGrid {
    pub delta: Vec<f64>,
    pub density: Vec<f64>,
}

/// Evenly spaced axis with `n ≥ 2` points from `lo` to `hi` inclusive.
pub fn uniform_axis(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 points, got {n}"
        )));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidGrid(format!("bad range [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect())
}

pub(crate) fn check_axis(axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::InvalidGrid("empty detuning axis".into()));
    }
    if let Some(bad) = axis.iter().find(|d| !d.is_finite()) {
        return Err(Error::InvalidGrid(format!("non-finite detuning {bad}")));
    }
    if let Some(i) = axis.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!(
            "axis not strictly increasing at index {}",
            i + 1
        )));
    }
    Ok(())
}

impl SpectrumGrid {
    /// Trapezoid integral of the density over the axis.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.delta, &self.density)
    }

    /// Indices of strict interior local maxima (plateaus count once, at their left edge).
    pub fn peak_indices(&self) -> Vec<usize> {
        let s = &self.density;
        let mut peaks = Vec::new();
        let mut i = 1;
        while i + 1 < s.len() {
            if s[i] > s[i - 1] {
                let mut j = i;
                while j + 1 < s.len() && s[j + 1] == s[i] {
                    j += 1;
                }
                if j + 1 < s.len() && s[j + 1] < s[i] {
                    peaks.push(i);
                }
                i = j + 1;
            } else {
                i += 1;
            }
        }
        peaks
    }

    /// Detunings of the local maxima.
    pub fn peaks(&self) -> Vec<f64> {
        self.peak_indices()
            .into_iter()
            .map(|i| self.delta[i])
            .collect()
    }

    /// Largest spacing between adjacent axis points.
    pub fn max_step(&self) -> f64 {
        self.delta
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_validation() {
        assert!(check_axis(&[]).is_err());
        assert!(check_axis(&[0.0, 0.0]).is_err());
        assert!(check_axis(&[1.0, 0.0]).is_err());
        assert!(check_axis(&[0.0, f64::NAN]).is_err());
        assert!(check_axis(&[0.0]).is_ok());
        assert!(uniform_axis(1.0, 1.0, 5).is_err());
        assert!(uniform_axis(0.0, 1.0, 1).is_err());
        let a = uniform_axis(-1.0, 1.0, 5).unwrap();
        assert_eq!(a, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn peak_finding() {
        let g = SpectrumGrid {
            delta: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            density: vec![0.0, 2.0, 1.0, 3.0, 3.0, 0.5, 1.0],
        };
        assert_eq!(g.peak_indices(), vec![1, 3]);
        assert_eq!(g.max_step(), 1.0);
    }

    #[test]
    fn trapezoid_is_exact_for_lines() {
        let x = [0.0, 0.5, 2.0];
        let y = [1.0, 2.0, 5.0];
        assert!((trapezoid(&x, &y) - 6.0).abs() < 1e-15);
    }
}
