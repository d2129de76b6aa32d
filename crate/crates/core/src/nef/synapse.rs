use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First-order exponential synapse, `h(t) = exp(-t / tau) / tau`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Synapse {
    pub tau: f64,
}

impl Default for Synapse {
    fn default() -> Self {
        Self { tau: 0.1 }
    }
}

impl Synapse {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::config(format!("synapse time constant must be >= 0, got {tau}")));
        }
        Ok(Self { tau })
    }

    /// Per-step retention factor `exp(-dt / tau)`; zero for a pass-through.
    pub fn decay(&self, dt: f64) -> f64 {
        if self.tau == 0.0 {
            0.0
        } else {
            (-dt / self.tau).exp()
        }
    }
}

/// Discrete low-pass state, exact for inputs held constant over a step.
#[derive(Clone, Debug, PartialEq)]
pub struct Lowpass {
    decay: f64,
    value: Vec<f64>,
}

impl Lowpass {
    pub fn new(synapse: Synapse, dt: f64, dims: usize) -> Self {
        Self {
            decay: synapse.decay(dt),
            value: vec![0.0; dims],
        }
    }

    pub fn update(&mut self, input: &[f64]) {
        let gain = 1.0 - self.decay;
        for (v, u) in self.value.iter_mut().zip(input) {
            *v = self.decay * *v + gain * u;
        }
    }

    pub fn value(&self) -> &[f64] {
        &self.value
    }

    pub fn reset(&mut self) {
        self.value.iter_mut().for_each(|v| *v = 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_spike_decays_by_e_per_tau() {
        let dt = 1e-3;
        let syn = Synapse::new(0.1).unwrap();
        let mut f = Lowpass::new(syn, dt, 1);
        f.update(&[1.0 / dt]);
        let peak = f.value()[0];
        for _ in 0..100 {
            f.update(&[0.0]);
        }
        assert!((peak / f.value()[0] - std::f64::consts::E).abs() < 1e-9);
    }

    #[test]
    fn unit_area() {
        let dt = 1e-3;
        let mut f = Lowpass::new(Synapse::new(0.05).unwrap(), dt, 1);
        f.update(&[1.0 / dt]);
        let mut area = f.value()[0] * dt;
        for _ in 0..20_000 {
            f.update(&[0.0]);
            area += f.value()[0] * dt;
        }
        // discrete impulse response sums to 1 / (1 - decay) * (1 - decay)
        assert!((area - 1.0 / (1.0 - (-dt / 0.05f64).exp()) * (1.0 - (-dt / 0.05f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn zero_tau_passes_through() {
        let mut f = Lowpass::new(Synapse::new(0.0).unwrap(), 1e-3, 2);
        f.update(&[3.0, -1.0]);
        assert_eq!(f.value(), &[3.0, -1.0]);
    }

    #[test]
    fn negative_tau_rejected() {
        assert!(Synapse::new(-0.1).is_err());
    }
}
