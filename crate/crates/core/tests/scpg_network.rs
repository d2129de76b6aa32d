use std::f64::consts::PI;
use std::sync::OnceLock;

use scpg_core::analysis::{common_frequency, mean, peak_to_peak, successive_lags, zero_crossing_frequency};
use scpg_core::cpg::{motor_output_with, CartOscState, ChainTopology, CpgParams, DriveSignal, Method, ReferenceCpg};
use scpg_core::scpg::{build_scpg, PerturbationSpec, ProbeData, ProbeKind, ScpgConfig};
use scpg_core::Error;

const DRIVE: f64 = 3.0;

fn small(n_segments: usize, neurons: usize) -> ScpgConfig {
    ScpgConfig {
        cpg: CpgParams { n_segments, ..Default::default() },
        neurons_per_population: neurons,
        ..Default::default()
    }
}

#[test]
fn population_counts_follow_the_chain() {
    let net = build_scpg(small(1, 100)).unwrap();
    assert_eq!(net.population_counts(), (2, 2, 2));
    let net = build_scpg(small(8, 20)).unwrap();
    assert_eq!(net.population_counts(), (16, 44, 2));
    let net = build_scpg(ScpgConfig { drive_passthrough: true, ..small(2, 50) }).unwrap();
    assert_eq!(net.population_counts(), (4, 8, 0));
}

#[test]
fn identical_seeds_give_identical_runs() {
    let cfg = ScpgConfig {
        probes: vec![ProbeKind::Psi, ProbeKind::Spikes { oscillator: 1, max_neurons: 100 }],
        ..small(1, 100)
    };
    let run = |cfg: ScpgConfig| {
        let mut net = build_scpg(cfg).unwrap();
        for _ in 0..300 {
            net.step(DriveSignal::symmetric(DRIVE), &[]).unwrap();
        }
        (
            net.probe(ProbeKind::Psi).unwrap(),
            net.probe(ProbeKind::Spikes { oscillator: 1, max_neurons: 100 }).unwrap(),
        )
    };
    let a = run(cfg.clone());
    assert_eq!(a, run(cfg.clone()));
    let other = run(ScpgConfig { seed: 1, ..cfg });
    assert_ne!(a.1, other.1);
}

#[test]
fn probes_and_perturbations_are_validated() {
    let mut net = build_scpg(ScpgConfig { probes: vec![ProbeKind::Psi], ..small(1, 60) }).unwrap();
    assert!(matches!(net.probe(ProbeKind::DecodedXy), Err(Error::Config(_))));
    let bad = PerturbationSpec { oscillator_index: 7, t_start: 0.0, t_end: 1.0, injected_value: [1.0, 0.0] };
    assert!(matches!(net.step(DriveSignal::symmetric(DRIVE), &[bad]), Err(Error::Config(_))));
    let empty = PerturbationSpec { oscillator_index: 0, t_start: 1.0, t_end: 1.0, injected_value: [1.0, 0.0] };
    assert!(net.step(DriveSignal::symmetric(DRIVE), &[empty]).is_err());
    assert!(net.step(DriveSignal::new(f64::NAN, 3.0), &[]).is_err());
}

struct Run {
    dt: f64,
    psi: Vec<Vec<f64>>,
    xy: Vec<Vec<f64>>,
    spikes: Vec<(f64, usize)>,
}

/// 10 s at 2000 neurons per population with symmetric drive.
fn default_run() -> &'static Run {
    static RUN: OnceLock<Run> = OnceLock::new();
    RUN.get_or_init(|| {
        let cfg = ScpgConfig {
            probes: vec![
                ProbeKind::Psi,
                ProbeKind::DecodedXy,
                ProbeKind::Spikes { oscillator: 0, max_neurons: 50 },
            ],
            ..Default::default()
        };
        let mut net = build_scpg(cfg).unwrap();
        for _ in 0..10_000 {
            net.step(DriveSignal::symmetric(DRIVE), &[]).unwrap();
        }
        let series = |k| match net.probe(k).unwrap() {
            ProbeData::Series { rows, .. } => rows,
            ProbeData::Spikes(_) => unreachable!(),
        };
        let spikes = match net.probe(ProbeKind::Spikes { oscillator: 0, max_neurons: 50 }).unwrap() {
            ProbeData::Spikes(s) => s,
            ProbeData::Series { .. } => unreachable!(),
        };
        Run { dt: net.dt(), psi: series(ProbeKind::Psi), xy: series(ProbeKind::DecodedXy), spikes }
    })
}

fn column(rows: &[Vec<f64>], j: usize, from: usize, to: usize) -> Vec<f64> {
    rows[from..to].iter().map(|r| r[j]).collect()
}

#[test]
fn self_starts_from_noise() {
    let run = default_run();
    let (_, r) = CpgParams::default().drive_map.saturate(DRIVE);
    for i in 0..16 {
        let x = column(&run.xy, 1 + 2 * i, 2000, 3000);
        assert!(peak_to_peak(&x) >= r, "oscillator {i}: p2p {}", peak_to_peak(&x));
    }
}

#[test]
fn joints_follow_reference_frequency_and_lag() {
    let run = default_run();
    let params = CpgParams::default();
    let (w, _) = params.drive_map.saturate(DRIVE);
    let psi: Vec<Vec<f64>> = (0..8).map(|k| column(&run.psi, 1 + k, 3000, 10_000)).collect();
    let f = common_frequency(&psi, run.dt).unwrap();
    for p in &psi {
        let fk = zero_crossing_frequency(p, run.dt).unwrap();
        assert!((fk - w / (2.0 * PI)).abs() / (w / (2.0 * PI)) < 0.05, "joint frequency {fk}");
    }
    for lag in successive_lags(&psi, run.dt, f) {
        assert!((lag - params.segment_lag()).abs() < 0.1, "lag {lag}");
    }
}

#[test]
fn left_and_right_are_in_antiphase() {
    let run = default_run();
    let f = {
        let x: Vec<Vec<f64>> = (0..16).map(|i| column(&run.xy, 1 + 2 * i, 3000, 10_000)).collect();
        common_frequency(&x, run.dt).unwrap()
    };
    let period = ((1.0 / f) / run.dt).round() as usize;
    for k in 0..8 {
        let l = column(&run.xy, 1 + 2 * ChainTopology::left(k), 3000, 10_000);
        let r = column(&run.xy, 1 + 2 * ChainTopology::right(k), 3000, 10_000);
        let (ml, mr) = (mean(&l), mean(&r));
        let n = l.len() - period;
        let best = (0..period)
            .max_by(|&a, &b| {
                let c = |s: usize| (0..n).map(|t| (l[t] - ml) * (r[t + s] - mr)).sum::<f64>();
                c(a).total_cmp(&c(b))
            })
            .unwrap();
        let offset = (best as f64 - period as f64 / 2.0).abs() / period as f64;
        assert!(offset <= 0.05, "segment {k}: peak at {best} of {period}");
    }
}

#[test]
fn decoded_radius_matches_drive_amplitude() {
    let run = default_run();
    let (_, r) = CpgParams::default().drive_map.saturate(DRIVE);
    for i in 0..16 {
        let norms: Vec<f64> = run.xy[5000..]
            .iter()
            .map(|row| (row[1 + 2 * i].powi(2) + row[2 + 2 * i].powi(2)).sqrt())
            .collect();
        let m = mean(&norms);
        assert!((m - r).abs() / r < 0.1, "oscillator {i}: mean radius {m}");
    }
}

#[test]
fn psi_is_the_motor_map_of_decoded_states() {
    let run = default_run();
    let params = CpgParams::default();
    let topo = params.topology().unwrap();
    for (p, xy) in run.psi.iter().zip(&run.xy).step_by(97) {
        let states: Vec<CartOscState> = (0..16).map(|i| CartOscState::new(xy[1 + 2 * i], xy[2 + 2 * i])).collect();
        assert_eq!(&p[1..], motor_output_with(&states, &topo, params.motor_readout).as_slice());
    }
}

/// Frequency in `[lo, hi]` Hz with the largest DFT power.
fn dominant_frequency(signal: &[f64], dt: f64, lo: f64, hi: f64) -> f64 {
    let m = mean(signal);
    let duration = signal.len() as f64 * dt;
    let mut best = (0.0, lo);
    let mut f = lo;
    while f <= hi {
        let (mut c, mut s) = (0.0, 0.0);
        for (k, v) in signal.iter().enumerate() {
            let ph = 2.0 * PI * f * k as f64 * dt;
            c += (v - m) * ph.cos();
            s += (v - m) * ph.sin();
        }
        if c * c + s * s > best.0 {
            best = (c * c + s * s, f);
        }
        f += 0.5 / duration;
    }
    best.1
}

#[test]
fn spike_raster_alternates_with_the_rhythm() {
    let run = default_run();
    let bin = 0.02;
    let n_bins = (7.0 / bin) as usize;
    let mut counts = vec![vec![0.0; n_bins]; 50];
    for &(t, neuron) in &run.spikes {
        if t >= 3.0 {
            let b = (((t - 3.0) / bin) as usize).min(n_bins - 1);
            counts[neuron][b] += 1.0;
        }
    }
    let (w, _) = CpgParams::default().drive_map.saturate(DRIVE);
    let f = w / (2.0 * PI);
    let active: Vec<&Vec<f64>> = counts.iter().filter(|c| c.iter().sum::<f64>() >= 30.0).collect();
    assert!(active.len() >= 10, "only {} active neurons", active.len());
    let locked = active
        .iter()
        .filter(|c| (dominant_frequency(c, bin, 0.5, 5.0) - f).abs() / f < 0.1)
        .count();
    assert!(locked * 10 >= active.len() * 6, "{locked}/{} neurons fire at the rhythm", active.len());
}

fn half_range(rows: &[Vec<f64>], k: usize) -> f64 {
    peak_to_peak(&rows.iter().map(|r| r[k]).collect::<Vec<_>>()) / 2.0
}

#[test]
fn out_of_band_drive_silences_the_reference() {
    let params = CpgParams::default();
    let alpha = params.output_gain;
    let (_, r) = params.drive_map.saturate(DRIVE);
    let mut cpg = ReferenceCpg::seeded(params, 0, Method::Rk4).unwrap();
    let mut psi = Vec::new();
    for step in 0..6000 {
        cpg.set_drive(DriveSignal::symmetric(if step < 2000 { DRIVE } else { 0.0 }));
        cpg.step(1e-3, &[]).unwrap();
        psi.push(cpg.psi());
    }
    for k in 0..8 {
        let amp = half_range(&psi[5000..], k);
        assert!(amp < 0.05 * alpha * r, "joint {k}: residual amplitude {amp}");
    }
}

#[test]
fn out_of_band_drive_quiets_the_spiking_joints() {
    let cfg = ScpgConfig { probes: vec![ProbeKind::Psi], ..ScpgConfig::default() };
    let mut net = build_scpg(cfg).unwrap();
    let mut psi = Vec::new();
    for step in 0..6000 {
        let d = if step < 2000 { DRIVE } else { 0.0 };
        psi.push(net.step(DriveSignal::symmetric(d), &[]).unwrap());
    }
    for k in 0..8 {
        let active = half_range(&psi[1000..2000], k);
        let residual = half_range(&psi[5000..], k);
        assert!(residual < 0.15 * active, "joint {k}: {residual} left of {active}");
    }
}
