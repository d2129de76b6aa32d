use std::collections::BTreeMap;

use super::config::ScenarioConfig;
use super::run::{RunOutput, Trace};
use crate::analysis::{aligned_rmse, common_frequency, mean, peak_to_peak, successive_lags};

/// Channel-major `psi_*` columns from row `from` on.
pub fn psi_channels(psi: &Trace, from: usize) -> Vec<Vec<f64>> {
    psi.columns
        .iter()
        .filter(|c| c.starts_with("psi_"))
        .map(|c| psi.column_from(c, from))
        .collect()
}

/// Rhythm frequency (Hz) and head-to-tail joint lags after row `from`.
pub fn rhythm(psi: &Trace, dt: f64, from: usize) -> Option<(f64, Vec<f64>)> {
    let ch = psi_channels(psi, from);
    let f = common_frequency(&ch, dt)?;
    Some((f, successive_lags(&ch, dt, f)))
}

/// Waveform RMSE of `test` against `reference` from row `from`, after
/// removing frequency and phase offsets. Falls back to the plain RMSE when
/// either side has no rhythm.
pub fn psi_rmse(test: &Trace, reference: &Trace, dt: f64, from: usize) -> f64 {
    let t = psi_channels(test, from);
    let r = psi_channels(reference, 0);
    match (common_frequency(&t, dt), common_frequency(&psi_channels(reference, from), dt)) {
        (Some(ft), Some(fr)) => aligned_rmse(&t, &r, dt, ft, fr, from),
        _ => {
            let (mut sum, mut n) = (0.0, 0usize);
            for (tc, rc) in t.iter().zip(&r) {
                for (a, b) in tc.iter().zip(&rc[from..]) {
                    sum += (a - b).powi(2);
                    n += 1;
                }
            }
            (sum / n.max(1) as f64).sqrt()
        }
    }
}

pub(crate) fn cpg_metrics(out: &RunOutput, config: &ScenarioConfig) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    let from = out.psi.row_at(config.transient);
    let ch = psi_channels(&out.psi, from);
    m.insert(
        "psi_peak_to_peak_mean".into(),
        mean(&ch.iter().map(|c| peak_to_peak(c)).collect::<Vec<_>>()),
    );
    if let Some((f, lags)) = rhythm(&out.psi, config.dt(), from) {
        m.insert("frequency_hz".into(), f);
        m.insert("mean_segment_lag_rad".into(), mean(&lags));
    }
    m
}

/// Window over the last `seconds` (bounded by the transient).
pub fn final_window(trace: &Trace, config: &ScenarioConfig, seconds: f64) -> usize {
    let start = (config.duration - seconds).max(config.transient.min(config.duration));
    trace.row_at(start)
}

pub(crate) fn body_metrics_of(traj: &Trace, config: &ScenarioConfig) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    let from = final_window(traj, config, 5.0);
    let (Some(first), Some(last)) = (traj.rows.get(from), traj.rows.last()) else {
        return m;
    };
    let (cx, cy) = (traj.column_index("com_x").unwrap(), traj.column_index("com_y").unwrap());
    let span = last[0] - first[0];
    if span > 0.0 {
        let d = (last[cx] - first[cx]).hypot(last[cy] - first[cy]);
        m.insert("mean_speed_final".into(), d / span);
    }
    let target = config.steering.map_or(0.0, |s| s.r_z_target);
    let hf = traj.column_index("heading_filtered").unwrap();
    let errors: Vec<f64> = traj.rows[from..].iter().map(|r| r[hf] - target).collect();
    m.insert("final_heading".into(), last[hf]);
    m.insert("final_heading_error".into(), last[hf] - target);
    m.insert(
        "max_abs_heading_error_final".into(),
        errors.iter().fold(0.0f64, |a, e| a.max(e.abs())),
    );
    m.insert("distance_x".into(), last[cx] - traj.rows[0][cx]);
    m.insert("distance_y".into(), last[cy] - traj.rows[0][cy]);
    m
}
