//! Spectral peak detection for uniformly sampled time series.
//!
//! Hann-windowed FFT with parabolic peak interpolation. A second,
//! integer-period trimmed pass backs the leakage-sensitive measurements
//! (limit-cycle purity, harmonic content).

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// One detected spectral peak. Frequencies are angular (rad / time unit).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Peak {
    pub frequency: f64,
    pub power: f64,
}

/// Peaks of a series, sorted by falling power.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FourierPeaks {
    /// Angular frequency resolution 2π / window length.
    pub resolution: f64,
    pub peaks: Vec<Peak>,
}

#[derive(Debug, Clone, Copy)]
pub struct FourierOptions {
    /// Keep peaks whose power exceeds this fraction of the dominant peak.
    pub power_floor: f64,
    pub max_peaks: usize,
    /// Reject the analysis when the dominant peak completes fewer than this
    /// many cycles inside the window.
    pub min_cycles: f64,
}

impl Default for FourierOptions {
    fn default() -> Self {
        Self { power_floor: 1e-4, max_peaks: 8, min_cycles: 8.0 }
    }
}

/// Power spectrum |FFT(w·x)|² of the mean-subtracted, Hann-windowed series.
/// Returns bins 0..n/2.
fn power_spectrum(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos());
            Complex64::new((v - mean) * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().take(n / 2 + 1).map(|z| z.norm_sqr()).collect()
}

/// Detect spectral peaks of a uniformly sampled series.
///
/// The leading `transient_fraction` of the series is discarded first. Local
/// maxima are refined by parabolic interpolation in log power; maxima inside
/// the sidelobe skirt (±6 bins) of a stronger peak are suppressed.
pub fn fourier_peaks(
    values: &[f64],
    dt: f64,
    transient_fraction: f64,
    opts: &FourierOptions,
) -> Result<FourierPeaks> {
    if !(dt > 0.0) {
        return Err(Error::ParameterDomain(format!("dt must be > 0, got {dt}")));
    }
    let skip = ((values.len() as f64) * transient_fraction).floor() as usize;
    let tail = &values[skip.min(values.len())..];
    let n = tail.len();
    if n < 64 {
        return Err(Error::TooShortSeries(format!("{n} samples after transient")));
    }

    let power = power_spectrum(tail);
    let resolution = 2.0 * std::f64::consts::PI / (n as f64 * dt);

    // Where the raw spectral weight sits decides whether the window is long
    // enough: the strongest bin must complete at least `min_cycles` periods.
    let (k_raw, p_raw) = power
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    let mean_sq = values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64;
    if *p_raw <= 1e-24 * (1.0 + mean_sq) * n as f64 {
        return Ok(FourierPeaks { resolution, peaks: Vec::new() }); // flat series
    }
    if (k_raw as f64) < opts.min_cycles {
        return Err(Error::TooShortSeries(format!(
            "dominant component completes only {k_raw} cycles in the window (need {})",
            opts.min_cycles
        )));
    }

    let mut candidates: Vec<(usize, f64)> = (2..power.len() - 1)
        .filter(|&k| power[k] > power[k - 1] && power[k] >= power[k + 1])
        .map(|k| (k, power[k]))
        .collect();
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1));

    let Some(&(_, p_dom)) = candidates.first() else {
        return Ok(FourierPeaks { resolution, peaks: Vec::new() });
    };

    let mut accepted: Vec<usize> = Vec::new();
    let mut peaks = Vec::new();
    for (k, p) in candidates {
        if p < opts.power_floor * p_dom || peaks.len() >= opts.max_peaks {
            break;
        }
        if (k as f64) < opts.min_cycles {
            continue;
        }
        // Hann sidelobes of an accepted peak sit within a few bins; skip them.
        if accepted.iter().any(|&ka| k.abs_diff(ka) <= 6) {
            continue;
        }
        accepted.push(k);
        let (freq_bins, p_interp) = refine_parabolic(&power, k);
        peaks.push(Peak { frequency: freq_bins * resolution, power: p_interp });
    }
    peaks.sort_by(|a, b| b.power.total_cmp(&a.power));
    Ok(FourierPeaks { resolution, peaks })
}

/// Parabolic interpolation in log power around bin k.
fn refine_parabolic(power: &[f64], k: usize) -> (f64, f64) {
    let (pm, p0, pp) = (power[k - 1].max(1e-300), power[k].max(1e-300), power[k + 1].max(1e-300));
    let (lm, l0, lp) = (pm.ln(), p0.ln(), pp.ln());
    let denom = lm - 2.0 * l0 + lp;
    if denom.abs() < 1e-12 {
        return (k as f64, p0);
    }
    let delta = (0.5 * (lm - lp) / denom).clamp(-0.5, 0.5);
    let l_pk = l0 - 0.25 * (lm - lp) * delta;
    (k as f64 + delta, l_pk.exp())
}

/// Hann spectrum of the series trimmed to an integer number of periods of
/// its dominant component. Returns (power bins, dominant bin index).
fn trimmed_spectrum(values: &[f64], dt: f64) -> Result<(Vec<f64>, usize)> {
    let peaks = fourier_peaks(values, dt, 0.0, &FourierOptions::default())?;
    let Some(dominant) = peaks.peaks.first() else {
        return Err(Error::TooShortSeries("no dominant spectral component".into()));
    };
    let period_samples = 2.0 * std::f64::consts::PI / (dominant.frequency * dt);
    let m = (values.len() as f64 / period_samples).floor();
    let n_keep = ((m * period_samples).round() as usize).min(values.len());
    if n_keep < 64 {
        return Err(Error::TooShortSeries(format!("{n_keep} samples over whole periods")));
    }
    let power = power_spectrum(&values[..n_keep]);
    let k0 = (2..power.len() - 1)
        .max_by(|&a, &b| power[a].total_cmp(&power[b]))
        .expect("non-empty spectrum");
    Ok((power, k0))
}

/// Ratio of the strongest secondary spectral power to the dominant peak,
/// measured on an integer-period window so window leakage cannot fake a
/// secondary component. Near zero for a pure single-frequency cycle.
pub fn spectral_purity(values: &[f64], dt: f64) -> Result<f64> {
    let (power, k0) = trimmed_spectrum(values, dt)?;
    let p_dom: f64 = window_power(&power, k0, 2);
    let secondary = power
        .iter()
        .enumerate()
        .skip(2)
        .filter(|(k, _)| k.abs_diff(k0) > 4)
        .map(|(_, &p)| p)
        .fold(0.0, f64::max);
    Ok(secondary / p_dom)
}

/// Power near integer multiples of the fundamental, relative to the
/// fundamental's power. `harmonics` lists the multiples to probe (the
/// fundamental itself is the dominant detected peak).
pub fn harmonic_power_ratios(values: &[f64], dt: f64, harmonics: &[u32]) -> Result<Vec<f64>> {
    let (power, k0) = trimmed_spectrum(values, dt)?;
    let p_fund = window_power(&power, k0, 2);
    Ok(harmonics
        .iter()
        .map(|&h| {
            let kh = k0 * h as usize;
            if kh + 2 >= power.len() {
                0.0
            } else {
                window_power(&power, kh, 2) / p_fund
            }
        })
        .collect())
}

fn window_power(power: &[f64], k: usize, half_width: usize) -> f64 {
    let lo = k.saturating_sub(half_width);
    let hi = (k + half_width + 1).min(power.len());
    power[lo..hi].iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample(f: impl Fn(f64) -> f64, dt: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| f(i as f64 * dt)).collect()
    }

    #[test]
    fn pure_sinusoid_single_peak() {
        let w0 = 1.3;
        let dt = 0.05;
        let vals = sample(|t| (w0 * t).sin(), dt, 1 << 14);
        let got = fourier_peaks(&vals, dt, 0.0, &FourierOptions::default()).unwrap();
        assert_eq!(got.peaks.len(), 1);
        assert!((got.peaks[0].frequency - w0).abs() < got.resolution);
    }

    #[test]
    fn two_incommensurate_tones() {
        let (w0, w1) = (1.0, std::f64::consts::SQRT_2);
        let dt = 0.04;
        let vals = sample(|t| (w0 * t).sin() + 0.5 * (w1 * t).cos(), dt, 1 << 14);
        let got = fourier_peaks(&vals, dt, 0.0, &FourierOptions::default()).unwrap();
        assert!(got.peaks.len() >= 2);
        let f: Vec<f64> = got.peaks.iter().map(|p| p.frequency).collect();
        assert!((f[0] - w0).abs() < got.resolution);
        assert!((f[1] - w1).abs() < got.resolution);
        // Powers 1 : 0.25.
        assert_relative_eq!(got.peaks[1].power / got.peaks[0].power, 0.25, max_relative = 0.05);
    }

    #[test]
    fn transient_fraction_is_discarded() {
        let w0 = 2.0;
        let dt = 0.02;
        let n = 1 << 14;
        // Garbage in the first half, clean tone in the second.
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                if i < n / 2 {
                    (17.0 * t).sin() * (0.3 * t).cos()
                } else {
                    (w0 * t).sin()
                }
            })
            .collect();
        let got = fourier_peaks(&vals, dt, 0.5, &FourierOptions::default()).unwrap();
        assert!((got.peaks[0].frequency - w0).abs() < got.resolution);
    }

    #[test]
    fn too_short_series_is_rejected() {
        let vals = sample(|t| (0.001 * t).sin(), 0.1, 256);
        assert!(matches!(
            fourier_peaks(&vals, 0.1, 0.0, &FourierOptions::default()),
            Err(Error::TooShortSeries(_))
        ));
    }

    #[test]
    fn purity_of_pure_tone_is_tiny() {
        let dt = 0.03;
        let vals = sample(|t| (1.1 * t).sin(), dt, 1 << 14);
        let purity = spectral_purity(&vals, dt).unwrap();
        assert!(purity < 1e-8, "purity {purity:.3e}");
    }

    #[test]
    fn purity_detects_contamination() {
        let dt = 0.03;
        let vals = sample(|t| (1.1 * t).sin() + 0.02 * (2.9 * t).sin(), dt, 1 << 14);
        let purity = spectral_purity(&vals, dt).unwrap();
        assert!(purity > 1e-4, "purity {purity:.3e}");
    }

    #[test]
    fn harmonic_ratios_of_square_like_wave() {
        // Odd-harmonic signal: fundamental + 1/3 third + 1/5 fifth.
        let w0 = 0.9;
        let dt = 0.04;
        let vals = sample(
            |t| (w0 * t).sin() + (3.0 * w0 * t).sin() / 3.0 + (5.0 * w0 * t).sin() / 5.0,
            dt,
            1 << 14,
        );
        let r = harmonic_power_ratios(&vals, dt, &[2, 3, 4, 5]).unwrap();
        assert!(r[0] < 1e-6, "even 2nd harmonic {:.3e}", r[0]);
        assert!(r[2] < 1e-6, "even 4th harmonic {:.3e}", r[2]);
        assert_relative_eq!(r[1], 1.0 / 9.0, max_relative = 0.02);
        assert_relative_eq!(r[3], 1.0 / 25.0, max_relative = 0.02);
    }
}
