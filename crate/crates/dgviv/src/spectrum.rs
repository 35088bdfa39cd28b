//! Magnitude spectra of nonuniformly sampled time series.

use dgviv_core::Error;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Rectangular,
    Hann,
}

impl Window {
    fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
                .collect(),
        }
    }
}

/// Single-sided amplitude spectrum: a pure tone of amplitude `A` on a bin
/// shows magnitude `A`, the mean shows at `f = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub frequency: f64,
    pub magnitude: f64,
}

/// Linear interpolation of `(t, y)` onto `n` equispaced times spanning the
/// same interval. `t` must be increasing.
pub fn resample_uniform(t: &[f64], y: &[f64], n: usize) -> Vec<f64> {
    let (t0, t1) = (t[0], t[t.len() - 1]);
    let mut j = 0;
    (0..n)
        .map(|i| {
            let s = if i + 1 == n {
                t1
            } else {
                t0 + (t1 - t0) * i as f64 / (n - 1) as f64
            };
            while j + 2 < t.len() && t[j + 1] < s {
                j += 1;
            }
            let (a, b) = (t[j], t[j + 1]);
            let w = if b > a { (s - a) / (b - a) } else { 0.0 };
            y[j] + w.clamp(0.0, 1.0) * (y[j + 1] - y[j])
        })
        .collect()
}

/// Resamples to uniform spacing (same sample count), applies the window,
/// and returns the single-sided amplitude spectrum.
pub fn dft_spectrum(t: &[f64], y: &[f64], window: Window) -> Result<Spectrum, Error> {
    let n = t.len();
    if n < 16 || y.len() != n {
        return Err(Error::ShortSeries);
    }
    if !(t[n - 1] > t[0]) || t.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidParameter("sample times must increase"));
    }
    let uniform = resample_uniform(t, y, n);
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    let w = window.weights(n);
    let gain: f64 = w.iter().sum();
    let mut buf: Vec<Complex<f64>> = uniform
        .iter()
        .zip(&w)
        .map(|(v, w)| Complex::new(v * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2 + 1;
    let frequencies = (0..half).map(|k| k as f64 / (n as f64 * dt)).collect();
    let magnitudes = (0..half)
        .map(|k| {
            let edge = k == 0 || (n.is_multiple_of(2) && k == n / 2);
            buf[k].norm() / gain * if edge { 1.0 } else { 2.0 }
        })
        .collect();
    Ok(Spectrum {
        frequencies,
        magnitudes,
    })
}

/// Up to `k` local maxima by decreasing magnitude, located by a parabola
/// through each peak bin and its neighbours. A spectrum without peaks above
/// round-off yields only the mean.
pub fn dominant_modes(spectrum: &Spectrum, k: usize) -> Vec<Mode> {
    let m = &spectrum.magnitudes;
    let f = &spectrum.frequencies;
    let floor = 1e-10 * m.iter().fold(0.0f64, |a, &b| a.max(b));
    let df = if f.len() > 1 { f[1] - f[0] } else { 0.0 };
    let mut peaks: Vec<Mode> = (1..m.len())
        .filter(|&i| m[i] > floor && m[i] >= m[i - 1] && (i + 1 == m.len() || m[i] > m[i + 1]))
        .map(|i| {
            if i + 1 == m.len() {
                return Mode {
                    frequency: f[i],
                    magnitude: m[i],
                };
            }
            let (a, b, c) = (m[i - 1], m[i], m[i + 1]);
            let denom = a - 2.0 * b + c;
            let delta = if denom != 0.0 {
                (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            Mode {
                frequency: f[i] + delta * df,
                magnitude: b - 0.25 * (a - c) * delta,
            }
        })
        .collect();
    if peaks.is_empty() {
        return m
            .first()
            .map(|&mag| Mode {
                frequency: 0.0,
                magnitude: mag,
            })
            .into_iter()
            .collect();
    }
    peaks.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    peaks.truncate(k);
    peaks
}
