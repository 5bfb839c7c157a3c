use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Stroboscopic Fourier transform `A(ω_k) = Σ_j e^{−iω_k jT} v_j` at
/// `ω_k = 2πk/(MT)`, `k = 0..M−1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm()).collect()
    }

    /// Bin of the period-doubling frequency π/T (exact for even M).
    pub fn half_frequency_bin(&self) -> usize {
        self.len() / 2
    }

    pub fn half_frequency_magnitude(&self) -> f64 {
        self.amplitudes[self.half_frequency_bin()].norm()
    }

    pub fn zero_frequency_magnitude(&self) -> f64 {
        self.amplitudes[0].norm()
    }

    /// Bin with the largest magnitude among `k ≤ M/2` (the rest mirror them
    /// for real input).
    pub fn dominant_bin(&self) -> usize {
        let mags = self.magnitudes();
        (0..=self.len() / 2).max_by(|&a, &b| mags[a].total_cmp(&mags[b])).unwrap_or(0)
    }
}

pub fn stroboscopic_spectrum(values: &[f64], period: f64) -> Result<Spectrum> {
    let m = values.len();
    if m < 2 {
        return Err(Error::InvalidParameter("spectrum needs at least two cycle values".into()));
    }
    if !(period > 0.0) {
        return Err(Error::InvalidParameter(format!("period must be positive, got {period}")));
    }
    let frequencies = (0..m).map(|k| 2.0 * PI * k as f64 / (m as f64 * period)).collect();
    let amplitudes = (0..m)
        .map(|k| {
            values
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    // reduce kj mod M first so large indices keep full phase precision
                    let phase = -2.0 * PI * ((k * j) % m) as f64 / m as f64;
                    Complex64::from_polar(v, phase)
                })
                .sum()
        })
        .collect();
    Ok(Spectrum { frequencies, amplitudes })
}

/// Half-width of the contiguous γ interval around `center` on which the
/// period-doubling peak stays at or above `threshold` times its maximum over
/// the grid. Edges are located by linear interpolation between grid
/// points. Returns 0 (with a warning) when no peak is present at `center`.
pub fn rigidity_extent_from_peaks(gammas: &[f64], peaks: &[f64], center: f64, threshold: f64) -> Result<f64> {
    if gammas.len() != peaks.len() || gammas.is_empty() {
        return Err(Error::InvalidParameter("γ grid and peak list must have equal nonzero length".into()));
    }
    if gammas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("γ grid must be strictly increasing".into()));
    }
    let max = peaks.iter().copied().fold(0.0, f64::max);
    let level = threshold * max;
    let c = (0..gammas.len())
        .min_by(|&a, &b| (gammas[a] - center).abs().total_cmp(&(gammas[b] - center).abs()))
        .expect("nonempty grid");
    if !(max > 0.0) || peaks[c] < level {
        log::warn!("no period-doubling peak near gamma = {center}; rigidity extent set to 0");
        return Ok(0.0);
    }
    let edge = |inside: usize, outside: usize| {
        let (pi, po) = (peaks[inside], peaks[outside]);
        let frac = if pi > po { (pi - level) / (pi - po) } else { 0.0 };
        gammas[inside] + frac * (gammas[outside] - gammas[inside])
    };
    let mut right = gammas[gammas.len() - 1];
    for k in c + 1..gammas.len() {
        if peaks[k] < level {
            right = edge(k - 1, k);
            break;
        }
    }
    let mut left = gammas[0];
    for k in (0..c).rev() {
        if peaks[k] < level {
            left = edge(k + 1, k);
            break;
        }
    }
    Ok(0.5 * (right - left))
}

/// [`rigidity_extent_from_peaks`] using each spectrum's π/T magnitude.
pub fn rigidity_extent(gammas: &[f64], spectra: &[Spectrum], center: f64, threshold: f64) -> Result<f64> {
    let peaks: Vec<f64> = spectra.iter().map(Spectrum::half_frequency_magnitude).collect();
    rigidity_extent_from_peaks(gammas, &peaks, center, threshold)
}

/// Precession phase `atan2(y, x)` in `(−π, π]`.
pub fn phase_estimate(x: f64, y: f64) -> Result<f64> {
    if x.hypot(y) < 1e-12 {
        return Err(Error::UndefinedPhase);
    }
    let p = y.atan2(x);
    Ok(if p <= -PI { PI } else { p })
}
