use super::synapse::Synapse;

/// Recurrent function for `dx/dt = f(x)` through a lowpass synapse:
/// `g(x) = x + tau f(x)`.
pub fn recurrent_transform<F>(f: F, synapse: Synapse) -> impl Fn(&[f64]) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let tau = synapse.tau;
    move |x| {
        let fx = f(x);
        x.iter().zip(fx).map(|(xi, fi)| xi + tau * fi).collect()
    }
}

/// Gain on an external input `u` entering `dx/dt = f(x) + u` through the
/// same synapse.
pub fn input_scale(synapse: Synapse) -> f64 {
    synapse.tau
}
