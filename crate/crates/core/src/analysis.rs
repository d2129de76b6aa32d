//! Signal measurements shared by tests, scenario metrics and backend
//! comparison: frequencies, phases, lags and waveform errors.

use std::f64::consts::PI;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

pub fn circular_mean(angles: impl IntoIterator<Item = f64>) -> f64 {
    let (s, c) = angles
        .into_iter()
        .fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    s.atan2(c)
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn peak_to_peak(xs: &[f64]) -> f64 {
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if xs.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

pub fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

/// Times (s, relative to the first sample) of upward mean crossings. A
/// Schmitt trigger at +/- `hysteresis` times the standard deviation rejects
/// spike-noise chatter.
pub fn upward_crossings(signal: &[f64], dt: f64, hysteresis: f64) -> Vec<f64> {
    let m = mean(signal);
    let sd = (signal.iter().map(|v| (v - m).powi(2)).sum::<f64>() / signal.len().max(1) as f64).sqrt();
    let h = hysteresis * sd;
    let mut out = Vec::new();
    let mut armed = false;
    let mut last_up: Option<f64> = None;
    for k in 1..signal.len() {
        let (a, b) = (signal[k - 1] - m, signal[k] - m);
        if a < 0.0 && b >= 0.0 {
            last_up = Some((k - 1) as f64 * dt + dt * (-a) / (b - a));
        }
        if b < -h {
            armed = true;
        } else if armed && b > h {
            if let Some(t) = last_up {
                out.push(t);
            }
            armed = false;
        }
    }
    out
}

/// Dominant frequency (Hz) from mean-crossing periods.
pub fn zero_crossing_frequency(signal: &[f64], dt: f64) -> Option<f64> {
    let c = upward_crossings(signal, dt, 0.25);
    if c.len() < 2 {
        return None;
    }
    Some((c.len() - 1) as f64 / (c[c.len() - 1] - c[0]))
}

/// Mean frequency over several channels, ignoring ones without a period.
pub fn common_frequency(channels: &[Vec<f64>], dt: f64) -> Option<f64> {
    let fs: Vec<f64> = channels.iter().filter_map(|c| zero_crossing_frequency(c, dt)).collect();
    if fs.is_empty() {
        None
    } else {
        Some(mean(&fs))
    }
}

/// Phase `phi` of the fundamental, with `signal ~ A cos(2 pi f t + phi)`
/// and `t` measured from the first sample.
pub fn phase_at(signal: &[f64], dt: f64, freq: f64) -> f64 {
    let m = mean(signal);
    let w = 2.0 * PI * freq;
    let (mut c, mut s) = (0.0, 0.0);
    for (k, v) in signal.iter().enumerate() {
        let (sn, cs) = (w * k as f64 * dt).sin_cos();
        c += (v - m) * cs;
        s += (v - m) * sn;
    }
    (-s).atan2(c)
}

/// Lag of each channel behind its predecessor: `phase[k] - phase[k + 1]`,
/// wrapped. A head-to-tail travelling wave gives positive lags.
pub fn successive_lags(channels: &[Vec<f64>], dt: f64, freq: f64) -> Vec<f64> {
    let phases: Vec<f64> = channels.iter().map(|c| phase_at(c, dt, freq)).collect();
    phases.windows(2).map(|w| wrap_angle(w[0] - w[1])).collect()
}

/// Circular-mean phase difference `theta_a - theta_b` of two Cartesian
/// trajectories given as `(x, y)` samples.
pub fn xy_phase_difference(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    circular_mean(
        a.iter()
            .zip(b)
            .map(|(p, q)| wrap_angle(p.1.atan2(p.0) - q.1.atan2(q.0))),
    )
}

fn interp(xs: &[f64], pos: f64) -> Option<f64> {
    if pos < 0.0 {
        return None;
    }
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if frac == 0.0 {
        return xs.get(i).copied();
    }
    let (a, b) = (xs.get(i)?, xs.get(i + 1)?);
    Some(a + frac * (b - a))
}

/// Waveform RMSE of `test` against `reference` after removing a global
/// frequency and phase offset.
///
/// Both are channel-major series at the same `dt`. The reference is
/// time-scaled by `f_test / f_ref` so one test period maps to one reference
/// period, then shifted by the whole-sample offset (searched over one
/// reference period starting at `ref_start`) that minimises the error. The
/// reference must extend far enough to cover the scaled window; samples
/// past its end are skipped.
pub fn aligned_rmse(
    test: &[Vec<f64>],
    reference: &[Vec<f64>],
    dt: f64,
    f_test: f64,
    f_ref: f64,
    ref_start: usize,
) -> f64 {
    let ratio = f_test / f_ref;
    let period = (1.0 / (f_ref * dt)).ceil() as usize;
    let n = test.first().map_or(0, Vec::len);
    let mut best = f64::INFINITY;
    for shift in 0..period.max(1) {
        let offset = (ref_start + shift) as f64;
        let mut sum = 0.0;
        let mut count = 0usize;
        'samples: for k in 0..n {
            let pos = offset + k as f64 * ratio;
            let mut local = 0.0;
            for (tc, rc) in test.iter().zip(reference) {
                match interp(rc, pos) {
                    Some(r) => local += (tc[k] - r).powi(2),
                    None => break 'samples,
                }
            }
            sum += local;
            count += test.len();
        }
        if count > 0 && count * 2 >= n * test.len() {
            best = best.min((sum / count as f64).sqrt());
        }
    }
    best
}
