use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{Backend, ScenarioConfig, ScenarioId};
use super::metrics::{body_metrics_of, cpg_metrics, psi_rmse};
use crate::body::{body_metrics, BodyModel, BodyState};
use crate::cpg::{CartOscState, DriveSignal, ReferenceCpg};
use crate::error::{Error, Result};
use crate::pilot::{steer_clamped, HeadingFilter};
use crate::scpg::{PerturbationSpec, ProbeData, ProbeKind, ScpgNetwork};

/// Column-labelled time series; the first column is time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Trace {
    fn new(columns: Vec<String>, capacity: usize) -> Self {
        Self {
            columns,
            rows: Vec::with_capacity(capacity),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// One column from row `from` on.
    pub fn column_from(&self, name: &str, from: usize) -> Vec<f64> {
        let j = self.column_index(name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows[from.min(self.rows.len())..].iter().map(|r| r[j]).collect()
    }

    /// First row with time >= `t`.
    pub fn row_at(&self, t: f64) -> usize {
        self.rows.partition_point(|r| r[0] < t - 1e-9)
    }
}

/// In-memory result of one simulated run.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub psi: Trace,
    pub oscillators: Trace,
    pub drive: Trace,
    pub trajectory: Option<Trace>,
    /// `(t, oscillator, neuron)` spike events from the configured probes.
    pub spikes: Option<Vec<(f64, usize, usize)>>,
    pub build_seconds: f64,
    pub step_seconds: f64,
    pub metrics: BTreeMap<String, f64>,
    /// Member runs of a sweep, labelled.
    pub members: Vec<(String, RunOutput)>,
}

enum CpgBackend {
    Ideal { cpg: ReferenceCpg, tau: f64 },
    Spiking(Box<ScpgNetwork>),
}

impl CpgBackend {
    fn build(config: &ScenarioConfig) -> Result<Self> {
        match config.backend {
            Backend::Ideal => Ok(CpgBackend::Ideal {
                cpg: ReferenceCpg::seeded(config.network.cpg.clone(), config.seed, config.ideal_method)?,
                tau: config.network.synapse.tau,
            }),
            Backend::Spiking => Ok(CpgBackend::Spiking(Box::new(ScpgNetwork::build(config.network.clone())?))),
        }
    }

    fn step(&mut self, t: f64, dt: f64, drive: DriveSignal, perturbations: &[PerturbationSpec]) -> Result<Vec<f64>> {
        match self {
            CpgBackend::Ideal { cpg, tau } => {
                cpg.set_drive(drive);
                let forcing: Vec<(usize, [f64; 2])> = perturbations
                    .iter()
                    .filter(|p| p.is_active(t))
                    .map(|p| (p.oscillator_index, p.ideal_forcing(*tau)))
                    .collect();
                cpg.step(dt, &forcing)?;
                Ok(cpg.psi())
            }
            CpgBackend::Spiking(net) => net.step(drive, perturbations),
        }
    }

    fn xy(&self) -> Vec<CartOscState> {
        match self {
            CpgBackend::Ideal { cpg, .. } => cpg.states().to_vec(),
            CpgBackend::Spiking(net) => net.decoded_xy(),
        }
    }

    fn spikes(&self) -> Result<Option<Vec<(f64, usize, usize)>>> {
        let CpgBackend::Spiking(net) = self else {
            return Ok(None);
        };
        let mut all = Vec::new();
        for probe in &net.config().probes {
            if let ProbeKind::Spikes { oscillator, .. } = probe {
                if let ProbeData::Spikes(events) = net.probe(*probe)? {
                    all.extend(events.into_iter().map(|(t, n)| (t, *oscillator, n)));
                }
            }
        }
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        Ok(Some(all))
    }
}

/// Runs the scenario in memory without writing anything.
pub fn simulate(config: &ScenarioConfig) -> Result<RunOutput> {
    config.validate()?;
    if config.scenario == ScenarioId::SwimNeuronSweep {
        return simulate_sweep(config);
    }
    simulate_single(config)
}

fn simulate_single(config: &ScenarioConfig) -> Result<RunOutput> {
    let dt = config.dt();
    let n_steps = config.n_steps();
    let n_seg = config.network.cpg.n_segments;
    let n_osc = config.network.cpg.n_oscillators();

    let t_build = Instant::now();
    let mut cpg = CpgBackend::build(config)?;
    let build_seconds = t_build.elapsed().as_secs_f64();

    let with_body = config.scenario.has_body();
    let model = BodyModel::new(config.body)?;
    let mut body = BodyState::at_rest(&config.body);
    let mut filter = HeadingFilter::new(config.heading_filter_tau)?;
    let map = config.network.cpg.drive_map;

    let mut psi_cols = vec!["t".to_string()];
    psi_cols.extend((0..n_seg).map(|k| format!("psi_{k}")));
    let mut osc_cols = vec!["t".to_string()];
    for i in 0..n_osc {
        osc_cols.push(format!("x_{i}"));
        osc_cols.push(format!("y_{i}"));
    }
    let mut traj_cols: Vec<String> = ["t", "head_x", "head_y", "heading"].iter().map(|s| s.to_string()).collect();
    traj_cols.extend((0..config.body.n_joints()).map(|k| format!("joint_{k}")));
    traj_cols.extend(["speed", "heading_filtered", "com_x", "com_y"].iter().map(|s| s.to_string()));

    let mut psi = Trace::new(psi_cols, n_steps);
    let mut osc = Trace::new(osc_cols, n_steps);
    let mut drive_trace = Trace::new(vec!["t".into(), "d_left".into(), "d_right".into()], n_steps);
    let mut traj = with_body.then(|| Trace::new(traj_cols, n_steps));

    let t_run = Instant::now();
    let mut heading_f = 0.0;
    for k in 0..n_steps {
        let t = k as f64 * dt;
        let drive = match &config.steering {
            Some(s) => steer_clamped(heading_f, s, &map),
            None => config.drive.at(t),
        };
        let p = cpg.step(t, dt, drive, &config.perturbations)?;
        let t_next = (k + 1) as f64 * dt;

        let mut row = Vec::with_capacity(n_seg + 1);
        row.push(t_next);
        row.extend_from_slice(&p);
        psi.rows.push(row);
        let mut row = Vec::with_capacity(2 * n_osc + 1);
        row.push(t_next);
        for s in cpg.xy() {
            row.extend([s.x, s.y]);
        }
        osc.rows.push(row);
        drive_trace.rows.push(vec![t_next, drive.d_left, drive.d_right]);

        if let Some(traj) = &mut traj {
            body = model
                .step_pd(&body, &p, &config.fluid, dt)
                .map_err(|e| at_time(e, t_next))?
                .0;
            heading_f = filter.update(body.heading(), dt);
            let m = body_metrics(&model, &body);
            let com = model.center_of_mass(&body);
            let mut row = Vec::with_capacity(traj.columns.len());
            row.extend([t_next, m.head_position[0], m.head_position[1], m.heading]);
            row.extend_from_slice(body.joint_angles());
            row.extend([m.speed, heading_f, com[0], com[1]]);
            traj.rows.push(row);
        }
    }
    let step_seconds = t_run.elapsed().as_secs_f64();

    let mut out = RunOutput {
        spikes: cpg.spikes()?,
        psi,
        oscillators: osc,
        drive: drive_trace,
        trajectory: traj,
        build_seconds,
        step_seconds,
        metrics: BTreeMap::new(),
        members: Vec::new(),
    };
    out.metrics = cpg_metrics(&out, config);
    if let Some(traj) = &out.trajectory {
        out.metrics.extend(body_metrics_of(traj, config));
    }
    Ok(out)
}

fn at_time(e: Error, t: f64) -> Error {
    match e {
        Error::Divergence { module, detail, .. } => Error::Divergence { module, time: t, detail },
        other => other,
    }
}

/// The ideal run fills the top-level traces; each population size is a
/// member run compared against it.
fn simulate_sweep(config: &ScenarioConfig) -> Result<RunOutput> {
    let mut reference_config = config.clone();
    reference_config.scenario = ScenarioId::SwimBasic;
    reference_config.backend = Backend::Ideal;
    let mut out = simulate_single(&reference_config)?;
    let start = out.psi.row_at(config.transient);
    for &n in &config.sweep_neurons {
        let mut member = reference_config.clone();
        member.backend = config.backend;
        member.network.neurons_per_population = n;
        let mut m = simulate_single(&member)?;
        let rmse = psi_rmse(&m.psi, &out.psi, config.dt(), start);
        m.metrics.insert("psi_rmse".into(), rmse);
        out.metrics.insert(format!("psi_rmse_n{n}"), rmse);
        out.members.push((format!("n{n}"), m));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberReport {
    pub label: String,
    pub build_seconds: f64,
    pub step_seconds_per_sim_second: f64,
    pub metrics: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: ScenarioId,
    pub backend: Backend,
    pub seed: u64,
    /// Network construction including decoder solves (s).
    pub build_seconds: f64,
    /// Wall-clock stepping time per simulated second.
    pub step_seconds_per_sim_second: f64,
    pub sim_seconds: f64,
    pub manifest: Vec<ManifestEntry>,
    pub metrics: BTreeMap<String, f64>,
    pub members: Vec<MemberReport>,
    pub config: ScenarioConfig,
}

/// Simulates and writes CSVs plus `report.json` into `config.output_dir`.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    let out = simulate(config)?;
    write_outputs(config, &out)
}

pub fn write_outputs(config: &ScenarioConfig, out: &RunOutput) -> Result<RunReport> {
    let dir = &config.output_dir;
    let mut manifest = write_run_files(dir, out)?;
    let mut members = Vec::new();
    for (label, m) in &out.members {
        manifest.extend(write_run_files(&dir.join(label), m)?);
        members.push(MemberReport {
            label: label.clone(),
            build_seconds: m.build_seconds,
            step_seconds_per_sim_second: m.step_seconds / config.duration,
            metrics: m.metrics.clone(),
        });
    }
    let report = RunReport {
        scenario: config.scenario,
        backend: config.backend,
        seed: config.seed,
        build_seconds: out.build_seconds,
        step_seconds_per_sim_second: out.step_seconds / config.duration,
        sim_seconds: config.duration,
        manifest,
        metrics: out.metrics.clone(),
        members,
        config: config.clone(),
    };
    let path = dir.join("report.json");
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &report)?;
    Ok(report)
}

fn write_run_files(dir: &Path, out: &RunOutput) -> Result<Vec<ManifestEntry>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = Vec::new();
    let mut traces = vec![("psi.csv", &out.psi), ("oscillators.csv", &out.oscillators), ("drive.csv", &out.drive)];
    if let Some(t) = &out.trajectory {
        traces.push(("trajectory.csv", t));
    }
    for (name, trace) in traces {
        let path = dir.join(name);
        write_trace(&path, trace)?;
        manifest.push(ManifestEntry {
            path,
            rows: trace.rows.len(),
        });
    }
    if let Some(spikes) = &out.spikes {
        let path = dir.join("spikes.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["t", "oscillator", "neuron"])?;
        for (t, o, n) in spikes {
            w.write_record([format!("{t:.6}"), o.to_string(), n.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        manifest.push(ManifestEntry {
            path,
            rows: spikes.len(),
        });
    }
    Ok(manifest)
}

/// Time at microsecond resolution; values in shortest round-trip form.
fn write_trace(path: &Path, trace: &Trace) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&trace.columns)?;
    let mut record = Vec::with_capacity(trace.columns.len());
    for row in &trace.rows {
        record.clear();
        record.push(format!("{:.6}", row[0]));
        record.extend(row[1..].iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
