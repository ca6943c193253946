//! Hann-windowed magnitude spectra of recorded series.

use std::f64::consts::PI;

use mbfdtd_core::constants::angular_frequency_to_ev;
use mbfdtd_core::observables::TimeSeries;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Hann,
    Rectangular,
}

impl Window {
    pub fn label(self) -> &'static str {
        match self {
            Window::Hann => "hann",
            Window::Rectangular => "rectangular",
        }
    }

    /// Periodic Hann, so that an integer number of cycles windows cleanly.
    pub fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::Hann => (0..n).map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / n as f64).cos()).collect(),
            Window::Rectangular => vec![1.0; n],
        }
    }
}

/// One-sided magnitude spectrum, bins `0..=N/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Photon energy of each bin, eV.
    pub energies_ev: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub window: Window,
    /// Label of the series this was computed from.
    pub source: String,
    /// Length of the transformed record.
    pub samples: usize,
}

impl Spectrum {
    pub fn bin_width_ev(&self) -> f64 {
        self.energies_ev.get(1).copied().unwrap_or(0.0)
    }

    /// Largest magnitude within `half_width_ev` of `energy_ev`.
    pub fn peak_near(&self, energy_ev: f64, half_width_ev: f64) -> f64 {
        self.energies_ev
            .iter()
            .zip(&self.magnitude)
            .filter(|(e, _)| (**e - energy_ev).abs() <= half_width_ev)
            .fold(0.0, |m, (_, v)| f64::max(m, *v))
    }

    /// Energy of the largest bin.
    pub fn dominant_energy(&self) -> f64 {
        let (i, _) = self
            .magnitude
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        self.energies_ev[i]
    }

    /// `Σ|X_k|²/N` over the full two-sided spectrum, reconstructed from the
    /// stored half. Equals the windowed time-domain power `Σ w²x²`.
    pub fn total_power(&self) -> f64 {
        let n = self.samples;
        let half = self.magnitude.len();
        let mut sum = 0.0;
        for (k, m) in self.magnitude.iter().enumerate() {
            let twice = k != 0 && !(n % 2 == 0 && k == half - 1);
            sum += if twice { 2.0 } else { 1.0 } * m * m;
        }
        sum / n as f64
    }
}

/// Windowed, mean-removed time-domain power of `series`: the quantity whose
/// spectral decomposition is [`Spectrum::total_power`].
pub fn windowed_power(series: &TimeSeries, window: Window) -> f64 {
    prepared(series, window).iter().map(|x| x * x).sum()
}

fn prepared(series: &TimeSeries, window: Window) -> Vec<f64> {
    let n = series.values.len();
    let mean = series.values.iter().sum::<f64>() / n.max(1) as f64;
    window.weights(n).iter().zip(&series.values).map(|(w, x)| w * (x - mean)).collect()
}

/// Magnitude of the DFT of the mean-removed, windowed series, on an eV axis
/// with bin width `2πħ/(NΔt)`. Returns `None` for fewer than two samples.
pub fn spectrum(series: &TimeSeries, window: Window) -> Option<Spectrum> {
    let n = series.values.len();
    if n < 2 {
        return None;
    }
    let mut buf: Vec<Complex64> = prepared(series, window).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2 + 1;
    let bin = angular_frequency_to_ev(2.0 * PI / (n as f64 * series.sample_interval));
    Some(Spectrum {
        energies_ev: (0..half).map(|k| k as f64 * bin).collect(),
        magnitude: buf[..half].iter().map(|c| c.norm()).collect(),
        window,
        source: series.label.clone(),
        samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mbfdtd_core::constants::ev_to_angular_frequency;

    fn tone(ev: f64, n: usize, dt: f64) -> TimeSeries {
        let w = ev_to_angular_frequency(ev);
        TimeSeries::from_values("x", "V/m", dt, (0..n).map(|k| (w * k as f64 * dt).sin()).collect())
    }

    #[test]
    fn sinusoid_peaks_in_its_bin() {
        let s = spectrum(&tone(1.5, 8192, 2e-17), Window::Hann).unwrap();
        assert!((s.dominant_energy() - 1.5).abs() <= s.bin_width_ev());
    }

    #[test]
    fn axis_is_increasing_with_stated_bin() {
        let dt = 2e-17;
        let s = spectrum(&tone(1.0, 1000, dt), Window::Hann).unwrap();
        assert!(s.energies_ev.windows(2).all(|w| w[1] > w[0]));
        let expected = angular_frequency_to_ev(2.0 * PI / (1000.0 * dt));
        assert!((s.bin_width_ev() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn too_short() {
        assert!(spectrum(&TimeSeries::from_values("x", "1", 1.0, vec![1.0]), Window::Hann).is_none());
    }
}
