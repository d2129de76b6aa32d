use scpg_core::body::{BodyConfig, BodyModel, BodyState, DragLaw, FluidField};
use scpg_core::cpg::{CpgParams, DriveSignal, Method, ReferenceCpg};

const DT: f64 = 1e-3;

/// Seeded reference CPG; `swapped` exchanges the left and right start states.
fn cpg(swapped: bool) -> ReferenceCpg {
    let seeded = ReferenceCpg::seeded(CpgParams::default(), 0, Method::Rk4).unwrap();
    if !swapped {
        return seeded;
    }
    let mut states = seeded.states().to_vec();
    for pair in states.chunks_mut(2) {
        pair.swap(0, 1);
    }
    ReferenceCpg::new(CpgParams::default(), states, Method::Rk4).unwrap()
}

/// Drives the body with the reference CPG; `map` transforms the setpoints.
fn swim(
    config: BodyConfig,
    drive: DriveSignal,
    fluid: FluidField,
    start: BodyState,
    secs: f64,
    map: impl Fn(Vec<f64>) -> Vec<f64>,
) -> Vec<BodyState> {
    swim_with(cpg(false), config, drive, fluid, start, secs, map)
}

fn swim_with(
    mut cpg: ReferenceCpg,
    config: BodyConfig,
    drive: DriveSignal,
    fluid: FluidField,
    start: BodyState,
    secs: f64,
    map: impl Fn(Vec<f64>) -> Vec<f64>,
) -> Vec<BodyState> {
    let model = BodyModel::new(config).unwrap();
    cpg.set_drive(drive);
    let mut s = start;
    let mut out = Vec::new();
    for _ in 0..(secs / DT).round() as usize {
        cpg.step(DT, &[]).unwrap();
        s = model.step_pd(&s, &map(cpg.psi()), &fluid, DT).unwrap().0;
        out.push(s.clone());
    }
    out
}

/// Centre-of-mass speed over the last `window` seconds.
fn mean_speed(config: &BodyConfig, traj: &[BodyState], window: f64) -> f64 {
    let model = BodyModel::new(*config).unwrap();
    let n = (window / DT).round() as usize;
    let a = model.center_of_mass(&traj[traj.len() - 1 - n]);
    let b = model.center_of_mass(traj.last().unwrap());
    (b[0] - a[0]).hypot(b[1] - a[1]) / window
}

fn forward_speed(config: BodyConfig) -> f64 {
    let start = BodyState::at_rest(&config);
    let traj = swim(config, DriveSignal::symmetric(3.0), FluidField::default(), start, 16.0, |p| p);
    mean_speed(&config, &traj, 6.0)
}

#[test]
fn reference_gait_swims_forward() {
    let config = BodyConfig::default();
    let start = BodyState::at_rest(&config);
    let traj = swim(config, DriveSignal::symmetric(3.0), FluidField::default(), start, 16.0, |p| p);
    let speed = mean_speed(&config, &traj, 6.0);
    // recorded baseline 0.3875 m/s
    assert!(speed > 0.01, "{speed}");
    assert!((speed - 0.3875).abs() < 0.01, "{speed}");
    // head first along +x
    assert!(traj.last().unwrap().q[0] > 3.0);
}

#[test]
fn propulsion_needs_anisotropy() {
    let base = forward_speed(BodyConfig::default());
    let mut iso = BodyConfig::default();
    iso.drag.c_parallel = iso.drag.c_perpendicular;
    let componentwise = forward_speed(iso);
    iso.drag.law = DragLaw::Norm;
    let norm = forward_speed(iso);
    let mut norm_base = BodyConfig::default();
    norm_base.drag.law = DragLaw::Norm;
    let norm_base = forward_speed(norm_base);
    // equal coefficients under the per-axis law still leave 18% of the speed
    assert!(componentwise / base < 0.25, "{componentwise} / {base}");
    assert!(norm / norm_base < 0.10, "{norm} / {norm_base}");
}

#[test]
fn stronger_right_drive_turns_counter_clockwise() {
    let config = BodyConfig::default();
    let start = BodyState::at_rest(&config);
    let right = swim(config, DriveSignal::new(3.0, 3.5), FluidField::default(), start.clone(), 8.0, |p| p);
    let left = swim_with(cpg(true), config, DriveSignal::new(3.5, 3.0), FluidField::default(), start, 8.0, |p| p);
    let hr = right.last().unwrap().heading();
    let hl = left.last().unwrap().heading();
    assert!(hr > 0.5, "{hr}");
    assert!((hr + hl).abs() < 1e-6 * hr.abs().max(1.0), "{hr} vs {hl}");
}

#[test]
fn trajectory_rotates_with_the_frame() {
    let config = BodyConfig::default();
    let fluid = FluidField {
        current_velocity: [-0.05, 0.02],
        gradient: [[0.0, 0.2], [0.0, 0.0]],
    };
    let angle = 1.1;
    let start = BodyState::at_rest(&config);
    let a = swim(config, DriveSignal::symmetric(3.0), fluid, start.clone(), 3.0, |p| p);
    let b = swim(config, DriveSignal::symmetric(3.0), fluid.rotated(angle), start.rotated(angle), 3.0, |p| p);
    for (sa, sb) in a.iter().zip(&b).step_by(100) {
        let ra = sa.rotated(angle);
        for (x, y) in ra.q.iter().chain(&ra.qd).zip(sb.q.iter().chain(&sb.qd)) {
            assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0), "{x} vs {y}");
        }
    }
}

#[test]
fn mirrored_targets_mirror_the_trajectory() {
    let config = BodyConfig::default();
    let start = BodyState::at_rest(&config);
    let a = swim(config, DriveSignal::new(3.0, 3.4), FluidField::default(), start.clone(), 4.0, |p| p);
    let b = swim(config, DriveSignal::new(3.0, 3.4), FluidField::default(), start, 4.0, |p| {
        p.into_iter().map(|v| -v).collect()
    });
    for (sa, sb) in a.iter().zip(&b).step_by(100) {
        let m = sa.mirrored();
        for (x, y) in m.q.iter().chain(&m.qd).zip(sb.q.iter().chain(&sb.qd)) {
            assert!((x - y).abs() <= 1e-6 * x.abs().max(1.0), "{x} vs {y}");
        }
    }
}

#[test]
fn uniform_current_only_advects() {
    let config = BodyConfig::default();
    let start = BodyState::at_rest(&config);
    // the carried body starts at rest relative to the water
    let mut drifting = start.clone();
    drifting.qd[0] = -0.1;
    drifting.qd[1] = 0.05;
    let still = swim(config, DriveSignal::symmetric(3.0), FluidField::default(), start, 4.0, |p| p);
    let carried = swim(config, DriveSignal::symmetric(3.0), FluidField::uniform(-0.1, 0.05), drifting, 4.0, |p| p);
    let (a, b) = (still.last().unwrap(), carried.last().unwrap());
    assert!((a.heading() - b.heading()).abs() < 1e-9);
    assert!((b.q[0] - a.q[0] + 0.4).abs() < 1e-6 && (b.q[1] - a.q[1] - 0.2).abs() < 1e-6);
}
