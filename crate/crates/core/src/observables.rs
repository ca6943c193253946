//! Recorders and time-series analyses.

use alloc::collections::VecDeque;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::Simulation;
use crate::error::{Error, Result};
use crate::math;
use crate::scenario::SimulationDomain;

pub const RHO_11: &str = "rho_11";
pub const RHO_22: &str = "rho_22";
pub const RHO_1P1P: &str = "rho_1p1p";
pub const EX_SOLUTE: &str = "ex_solute";
pub const EX_GAP_MAX: &str = "ex_gap_max";
pub const EX_TRANSMITTED: &str = "ex_transmitted";
pub const EX_REFLECTED: &str = "ex_reflected";

/// Uniformly sampled real series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub label: String,
    pub units: String,
    /// s
    pub sample_interval: f64,
    /// s
    pub start_time: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(label: impl Into<String>, units: impl Into<String>, sample_interval: f64, start_time: f64) -> Self {
        TimeSeries {
            label: label.into(),
            units: units.into(),
            sample_interval,
            start_time,
            values: Vec::new(),
        }
    }

    pub fn from_values(label: impl Into<String>, units: impl Into<String>, sample_interval: f64, values: Vec<f64>) -> Self {
        TimeSeries { values, ..Self::new(label, units, sample_interval, 0.0) }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time_at(&self, index: usize) -> f64 {
        self.start_time + index as f64 * self.sample_interval
    }

    pub fn duration(&self) -> f64 {
        self.len().saturating_sub(1) as f64 * self.sample_interval
    }

    /// Sample index nearest to time `t`, clamped to the series.
    pub fn index_at(&self, t: f64) -> usize {
        let i = math::round((t - self.start_time) / self.sample_interval);
        if i <= 0.0 {
            0
        } else {
            (i as usize).min(self.len().saturating_sub(1))
        }
    }

    /// Values from time `t` onward.
    pub fn tail_from(&self, t: f64) -> &[f64] {
        &self.values[self.index_at(t)..]
    }
}

/// Samples the standard observable set every `decimation` steps.
#[derive(Debug, Clone)]
pub struct Recorder {
    decimation: u64,
    solute_probe: usize,
    transmission_probe: usize,
    reflection_probe: usize,
    gap: core::ops::Range<usize>,
    series: Vec<TimeSeries>,
}

impl Recorder {
    /// Series follow the domain: populations of every layer present, the
    /// field at the solute center, the spatial max of `|Ex|` over the gap,
    /// and the field at both probes.
    pub fn new(domain: &SimulationDomain, has_solvent: bool, dt: f64, decimation: usize) -> Result<Self> {
        if decimation == 0 {
            return Err(Error::invalid("decimation", "must be at least 1"));
        }
        let interval = dt * decimation as f64;
        let mut names: Vec<(&str, &str)> = alloc::vec![(RHO_11, "1"), (RHO_22, "1")];
        if has_solvent {
            names.push((RHO_1P1P, "1"));
        }
        names.extend([(EX_SOLUTE, "V/m"), (EX_GAP_MAX, "V/m"), (EX_TRANSMITTED, "V/m"), (EX_REFLECTED, "V/m")]);
        Ok(Recorder {
            decimation: decimation as u64,
            solute_probe: domain.solute_probe,
            transmission_probe: domain.transmission_probe,
            reflection_probe: domain.reflection_probe,
            gap: domain.gap.clone(),
            series: names.into_iter().map(|(n, u)| TimeSeries::new(n, u, interval, 0.0)).collect(),
        })
    }

    pub fn decimation(&self) -> usize {
        self.decimation as usize
    }

    /// Append one sample to every series if the simulation sits on a
    /// recording step. Returns whether a sample was taken.
    pub fn sample(&mut self, sim: &Simulation) -> bool {
        let n = sim.time_index();
        if n % self.decimation != 0 {
            return false;
        }
        let ex = &sim.fields().ex;
        for s in &mut self.series {
            if s.values.is_empty() {
                s.start_time = sim.time();
            }
            let v = match s.label.as_str() {
                RHO_11 => sim.solute().map_or(0.0, |l| l.mean_population(1)),
                RHO_22 => sim.solute().map_or(0.0, |l| l.mean_population(2)),
                RHO_1P1P => sim.solvent().map_or(0.0, |l| l.mean_population(1)),
                EX_SOLUTE => ex[self.solute_probe],
                EX_GAP_MAX => ex[self.gap.clone()].iter().fold(0.0f64, |m, v| m.max(v.abs())),
                EX_TRANSMITTED => ex[self.transmission_probe],
                EX_REFLECTED => ex[self.reflection_probe],
                _ => unreachable!("recorder only creates known series"),
            };
            s.values.push(v);
        }
        true
    }

    pub fn get(&self, name: &str) -> Result<&TimeSeries> {
        self.series
            .iter()
            .find(|s| s.label == name)
            .ok_or_else(|| Error::MissingSeries(name.to_string()))
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn into_series(self) -> Vec<TimeSeries> {
        self.series
    }

    /// Last `count` samples of every series, oldest first.
    pub fn last_samples(&self, count: usize) -> Vec<(String, Vec<f64>)> {
        self.series
            .iter()
            .map(|s| {
                let from = s.len().saturating_sub(count);
                (s.label.clone(), s.values[from..].to_vec())
            })
            .collect()
    }
}

/// Sliding maximum of `|x|` over one optical period, stamped at the window
/// centers.
pub fn field_envelope(series: &TimeSeries, optical_period: f64) -> Result<TimeSeries> {
    if !(optical_period > 0.0) {
        return Err(Error::invalid("optical_period", "must be positive"));
    }
    let w = math::round(optical_period / series.sample_interval) as usize;
    if w < 16 {
        return Err(Error::invalid(
            "sample_interval",
            alloc::format!("{w} samples per optical period, need at least 16"),
        ));
    }
    if series.len() < w {
        return Err(Error::SeriesTooShort { needed: w, available: series.len() });
    }
    let mut out = TimeSeries::new(
        alloc::format!("{}_envelope", series.label),
        series.units.clone(),
        series.sample_interval,
        series.time_at(0) + 0.5 * (w - 1) as f64 * series.sample_interval,
    );
    out.values.reserve(series.len() - w + 1);
    // indices with decreasing |x|
    let mut window: VecDeque<usize> = VecDeque::with_capacity(w);
    for (i, v) in series.values.iter().enumerate() {
        let a = v.abs();
        while window.back().is_some_and(|&j| series.values[j].abs() <= a) {
            window.pop_back();
        }
        window.push_back(i);
        if window[0] + w <= i {
            window.pop_front();
        }
        if i + 1 >= w {
            out.values.push(series.values[window[0]].abs());
        }
    }
    Ok(out)
}

/// Means of consecutive non-overlapping windows of `window_samples`.
pub fn window_means(values: &[f64], window_samples: usize) -> Vec<f64> {
    values
        .chunks_exact(window_samples.max(1))
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect()
}

/// Earliest sample index after which consecutive windowed means differ by
/// no more than `rel_tol` times the largest windowed magnitude, or `None`.
///
/// The comparison scale is global so that a series settling to zero is
/// detected as readily as one settling to a constant.
pub fn detect_steady_state(series: &TimeSeries, rel_tol: f64, window: f64) -> Option<usize> {
    let w = math::round(window / series.sample_interval) as usize;
    if w == 0 {
        return None;
    }
    let means = window_means(&series.values, w);
    if means.len() < 2 {
        return None;
    }
    let scale = means.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Some(0);
    }
    let settled = |k: usize| (means[k + 1] - means[k]).abs() <= rel_tol * scale;
    let mut first = None;
    for k in (0..means.len() - 1).rev() {
        if settled(k) {
            first = Some(k);
        } else {
            break;
        }
    }
    first.map(|k| k * w)
}

/// Ratio of steady-state envelope means of `inside` and `reference`, each
/// averaged over its final window. Both must pass [`detect_steady_state`].
pub fn field_enhancement(inside: &TimeSeries, reference: &TimeSeries, rel_tol: f64, window: f64) -> Result<f64> {
    let settled_mean = |s: &TimeSeries| -> Result<f64> {
        detect_steady_state(s, rel_tol, window).ok_or(Error::SteadyStateNotReached)?;
        let w = (math::round(window / s.sample_interval) as usize).max(1);
        let tail = &s.values[s.len() - w.min(s.len())..];
        Ok(tail.iter().sum::<f64>() / tail.len() as f64)
    };
    let reference = settled_mean(reference)?;
    if reference == 0.0 {
        return Err(Error::invalid("reference", "reference envelope is zero"));
    }
    Ok(settled_mean(inside)? / reference)
}

/// Running single-frequency Fourier sum `Σ x(t_k) e^{iωt_k} Δt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DftAccumulator {
    pub angular_frequency: f64,
    pub sum: Complex64,
}

impl DftAccumulator {
    pub fn new(angular_frequency: f64) -> Self {
        DftAccumulator { angular_frequency, sum: Complex64::new(0.0, 0.0) }
    }

    pub fn add(&mut self, value: f64, t: f64, weight: f64) {
        let phase = self.angular_frequency * t;
        self.sum += Complex64::new(math::cos(phase), math::sin(phase)) * (value * weight);
    }
}

/// Indices of strict local maxima of `y` above `threshold`.
pub fn local_maxima(y: &[f64], threshold: f64) -> Vec<usize> {
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > threshold)
        .collect()
}

/// Sub-sample peak position `i + δ` from a parabola through `y[i−1..=i+1]`.
pub fn parabolic_peak(y: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= y.len() {
        return i as f64;
    }
    let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom == 0.0 {
        return i as f64;
    }
    i as f64 + 0.5 * (a - c) / denom
}

/// Times at which `series` crosses `level` upward, with hysteresis `band`
/// and linear interpolation between samples.
pub fn upward_crossings(series: &TimeSeries, level: f64, band: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut armed = false;
    for (k, pair) in series.values.windows(2).enumerate() {
        if pair[0] < level - band {
            armed = true;
        }
        if armed && pair[0] < level && pair[1] >= level {
            let frac = (level - pair[0]) / (pair[1] - pair[0]);
            out.push(series.time_at(k) + frac * series.sample_interval);
            armed = false;
        }
    }
    out
}

/// Centered moving average over `window` seconds, stamped at window centers.
pub fn moving_average(series: &TimeSeries, window: f64) -> Result<TimeSeries> {
    let w = (math::round(window / series.sample_interval) as usize).max(1);
    if series.len() < w {
        return Err(Error::SeriesTooShort { needed: w, available: series.len() });
    }
    let mut out = TimeSeries::new(
        alloc::format!("{}_mean", series.label),
        series.units.clone(),
        series.sample_interval,
        series.time_at(0) + 0.5 * (w - 1) as f64 * series.sample_interval,
    );
    let mut acc: f64 = series.values[..w].iter().sum();
    out.values.push(acc / w as f64);
    for i in w..series.len() {
        acc += series.values[i] - series.values[i - w];
        out.values.push(acc / w as f64);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub time: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// Alternating maxima and minima of a slow signal. A turning point is
/// accepted once the signal has moved `band` away from it, which rejects
/// ripple smaller than `band`. The start of the record is not reported.
pub fn alternating_extrema(series: &TimeSeries, band: f64) -> Vec<Extremum> {
    let mut out = Vec::new();
    let Some(&first) = series.values.first() else { return out };
    let (mut hi, mut hi_at, mut lo, mut lo_at) = (first, 0, first, 0);
    // None until the first excursion decides which way the signal goes
    let mut rising: Option<bool> = None;
    for (i, &v) in series.values.iter().enumerate() {
        if v > hi {
            hi = v;
            hi_at = i;
        }
        if v < lo {
            lo = v;
            lo_at = i;
        }
        match rising {
            None => {
                if hi - first > band {
                    rising = Some(true);
                    lo = v;
                    lo_at = i;
                } else if first - lo > band {
                    rising = Some(false);
                    hi = v;
                    hi_at = i;
                }
            }
            Some(true) => {
                if hi - v > band {
                    out.push(Extremum { time: series.time_at(hi_at), value: hi, kind: ExtremumKind::Max });
                    rising = Some(false);
                    lo = v;
                    lo_at = i;
                }
            }
            Some(false) => {
                if v - lo > band {
                    out.push(Extremum { time: series.time_at(lo_at), value: lo, kind: ExtremumKind::Min });
                    rising = Some(true);
                    hi = v;
                    hi_at = i;
                }
            }
        }
    }
    out
}

/// Oscillation frequency (Hz) from the mean spacing of alternating extrema.
pub fn oscillation_frequency(extrema: &[Extremum]) -> Option<f64> {
    if extrema.len() < 2 {
        return None;
    }
    let span = extrema[extrema.len() - 1].time - extrema[0].time;
    let half_period = span / (extrema.len() - 1) as f64;
    Some(0.5 / half_period)
}

/// `e_k = asymptote ± amplitude·exp(−t_k/decay_time)`, sign + at maxima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampedFit {
    pub asymptote: f64,
    pub amplitude: f64,
    pub decay_time: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

impl DampedFit {
    /// Distance of each extremum from the fitted asymptote.
    pub fn deviations(&self, extrema: &[Extremum]) -> Vec<f64> {
        extrema.iter().map(|e| math::abs(e.value - self.asymptote)).collect()
    }
}

/// Least-squares fit of a damped oscillation to its alternating extrema.
/// Linear in asymptote and amplitude; the decay time is found by a log grid
/// followed by golden-section refinement.
pub fn fit_damped_extrema(extrema: &[Extremum]) -> Option<DampedFit> {
    if extrema.len() < 3 {
        return None;
    }
    let t0 = extrema[0].time;
    let span = extrema[extrema.len() - 1].time - t0;
    if !(span > 0.0) {
        return None;
    }
    let sign = |e: &Extremum| if e.kind == ExtremumKind::Max { 1.0 } else { -1.0 };
    let solve = |tau: f64| -> DampedFit {
        // normal equations for y = a + A x, x = s e^{−(t−t0)/τ}
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        let n = extrema.len() as f64;
        for e in extrema {
            let x = sign(e) * math::exp(-(e.time - t0) / tau);
            sx += x;
            sy += e.value;
            sxx += x * x;
            sxy += x * e.value;
        }
        let det = n * sxx - sx * sx;
        let amp = if det != 0.0 { (n * sxy - sx * sy) / det } else { 0.0 };
        let a = (sy - amp * sx) / n;
        let rss: f64 = extrema
            .iter()
            .map(|e| {
                let r = e.value - a - amp * sign(e) * math::exp(-(e.time - t0) / tau);
                r * r
            })
            .sum();
        DampedFit {
            asymptote: a,
            amplitude: amp * math::exp(t0 / tau),
            decay_time: tau,
            rms: math::sqrt(rss / n),
        }
    };
    let (lo, hi) = (math::ln(span * 1e-2), math::ln(span * 1e3));
    let grid = 400;
    let mut best = (0, f64::INFINITY);
    for k in 0..=grid {
        let tau = math::exp(lo + (hi - lo) * k as f64 / grid as f64);
        let r = solve(tau).rms;
        if r < best.1 {
            best = (k, r);
        }
    }
    let step = (hi - lo) / grid as f64;
    let (mut a, mut b) = (lo + step * (best.0 as f64 - 1.0), lo + step * (best.0 as f64 + 1.0));
    let phi = 0.5 * (math::sqrt(5.0) - 1.0);
    for _ in 0..60 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if solve(math::exp(c)).rms < solve(math::exp(d)).rms {
            b = d;
        } else {
            a = c;
        }
    }
    Some(solve(math::exp(0.5 * (a + b))))
}
