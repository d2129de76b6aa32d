use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::lif::{lif_rate, LifParams};
use crate::error::{Error, Result};

/// Sampling recipe for one ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationSpec {
    pub n_neurons: usize,
    pub dimensions: usize,
    pub radius: f64,
    pub max_rate_range: (f64, f64),
    pub intercept_range: (f64, f64),
    pub seed: u64,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        Self {
            n_neurons: 100,
            dimensions: 1,
            radius: 1.0,
            max_rate_range: (200.0, 400.0),
            intercept_range: (-1.0, 0.9),
            seed: 0,
        }
    }
}

impl PopulationSpec {
    pub fn new(n_neurons: usize, dimensions: usize, radius: f64, seed: u64) -> Self {
        Self {
            n_neurons,
            dimensions,
            radius,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self, lif: &LifParams) -> Result<()> {
        if self.n_neurons == 0 || self.dimensions == 0 {
            return Err(Error::config("population needs at least one neuron and one dimension"));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::config(format!("population radius must be > 0, got {}", self.radius)));
        }
        let (lo, hi) = self.max_rate_range;
        if !(lo > 0.0 && lo <= hi && hi < lif.rate_ceiling()) {
            return Err(Error::config(format!(
                "max rate range ({lo}, {hi}) must lie in (0, {})",
                lif.rate_ceiling()
            )));
        }
        let (lo, hi) = self.intercept_range;
        if !(lo >= -1.0 && lo <= hi && hi < 1.0) {
            return Err(Error::config(format!("intercept range ({lo}, {hi}) must lie in [-1, 1)")));
        }
        Ok(())
    }
}

/// A generated LIF ensemble together with its membrane state.
#[derive(Clone, Debug)]
pub struct Population {
    pub spec: PopulationSpec,
    pub lif: LifParams,
    /// Row-major `n_neurons x dimensions`, unit rows.
    pub encoders: Vec<f64>,
    pub gains: Vec<f64>,
    pub biases: Vec<f64>,
    pub max_rates: Vec<f64>,
    pub intercepts: Vec<f64>,
    pub voltage: Vec<f64>,
    pub refractory: Vec<f64>,
}

/// Uniform sample on the unit sphere in `d` dimensions.
pub fn sample_sphere<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Uniform sample in the solid ball of the given radius.
pub fn sample_ball<R: Rng>(d: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    let dir = sample_sphere(d, rng);
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / d as f64);
    dir.into_iter().map(|x| x * r).collect()
}

impl Population {
    pub fn generate(spec: PopulationSpec, lif: LifParams) -> Result<Self> {
        lif.validate()?;
        spec.validate(&lif)?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let n = spec.n_neurons;
        let d = spec.dimensions;

        let mut encoders = Vec::with_capacity(n * d);
        for _ in 0..n {
            encoders.extend(sample_sphere(d, &mut rng));
        }
        let rate_dist = uniform(spec.max_rate_range)?;
        let icpt_dist = uniform(spec.intercept_range)?;
        let max_rates: Vec<f64> = (0..n).map(|_| rate_dist.sample(&mut rng)).collect();
        let intercepts: Vec<f64> = (0..n).map(|_| icpt_dist.sample(&mut rng)).collect();

        let mut gains = Vec::with_capacity(n);
        let mut biases = Vec::with_capacity(n);
        for (&rate, &c) in max_rates.iter().zip(&intercepts) {
            let j_max = lif.current_for_rate(rate);
            let gain = (j_max - lif.v_threshold) / (1.0 - c);
            gains.push(gain);
            biases.push(lif.v_threshold - gain * c);
        }

        Ok(Self {
            spec,
            lif,
            encoders,
            gains,
            biases,
            max_rates,
            intercepts,
            voltage: vec![0.0; n],
            refractory: vec![0.0; n],
        })
    }

    pub fn n_neurons(&self) -> usize {
        self.spec.n_neurons
    }

    pub fn dimensions(&self) -> usize {
        self.spec.dimensions
    }

    pub fn radius(&self) -> f64 {
        self.spec.radius
    }

    pub fn encoder(&self, i: usize) -> &[f64] {
        let d = self.dimensions();
        &self.encoders[i * d..(i + 1) * d]
    }

    /// Somatic current of neuron `i` for represented value `x`.
    #[inline]
    pub fn current(&self, i: usize, x: &[f64]) -> f64 {
        let e = self.encoder(i);
        let dot: f64 = e.iter().zip(x).map(|(a, b)| a * b).sum();
        self.gains[i] * dot / self.spec.radius + self.biases[i]
    }

    pub fn currents(&self, x: &[f64], out: &mut [f64]) {
        for (i, j) in out.iter_mut().enumerate() {
            *j = self.current(i, x);
        }
    }

    /// Steady-state firing rates for a represented value.
    pub fn rates(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_neurons())
            .map(|i| lif_rate(self.current(i, x), &self.lif))
            .collect()
    }

    /// Seeded uniform membrane voltages in `[0, threshold)` and cleared refractory timers.
    pub fn randomize_state(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vth = self.lif.v_threshold;
        for v in &mut self.voltage {
            *v = rng.random::<f64>() * vth;
        }
        self.refractory.iter_mut().for_each(|r| *r = 0.0);
    }

    pub fn reset_state(&mut self) {
        self.voltage.iter_mut().for_each(|v| *v = 0.0);
        self.refractory.iter_mut().for_each(|r| *r = 0.0);
    }

    /// Advances the membranes by `dt` with per-neuron currents `j`, pushing
    /// the index of every neuron that fired into `spiked`.
    pub fn step_spikes(&mut self, j: &[f64], dt: f64, spiked: &mut Vec<usize>) {
        let LifParams {
            tau_rc,
            tau_ref,
            v_threshold: vth,
        } = self.lif;
        spiked.clear();
        let full_step = (-dt / tau_rc).exp_m1();
        for i in 0..self.voltage.len() {
            let refr = self.refractory[i] - dt;
            let delta = (dt - refr).clamp(0.0, dt);
            let decay = if delta == dt { full_step } else { (-delta / tau_rc).exp_m1() };
            let mut v = self.voltage[i];
            v -= (j[i] - v) * decay;
            if v > vth {
                let overshoot = (v - vth) / (j[i] - vth);
                let t_spike = dt + tau_rc * (-overshoot).ln_1p();
                spiked.push(i);
                self.voltage[i] = 0.0;
                self.refractory[i] = tau_ref + t_spike;
            } else {
                self.voltage[i] = v.max(0.0);
                self.refractory[i] = refr;
            }
        }
    }
}

fn uniform((lo, hi): (f64, f64)) -> Result<Uniform<f64>> {
    Uniform::new_inclusive(lo, hi).map_err(|e| Error::config(format!("bad range ({lo}, {hi}): {e}")))
}
