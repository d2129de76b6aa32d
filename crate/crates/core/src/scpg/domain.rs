use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::nef::{eval_points, Population};

/// Where decoder evaluation points are drawn for the 4-d populations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalDomain {
    /// Uniform in the population's ball.
    Ball,
    /// Uniform over the reachable states: `(x, y)` discs slightly wider than
    /// the largest amplitude, frequency and amplitude targets in their bands.
    #[default]
    Operating,
}

const DOMAIN_SEED_SALT: u64 = 0x0da1_ba11_0000_0004;

fn disc<R: Rng>(radius: f64, rng: &mut R) -> [f64; 2] {
    let r = radius * rng.random::<f64>().sqrt();
    let a = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    [r * a.cos(), r * a.sin()]
}

/// Points over `[x, y, omega / omega_scale, R]`.
pub fn oscillator_points(pop: &Population, domain: EvalDomain, count: usize, amplitude_max: f64) -> Vec<Vec<f64>> {
    match domain {
        EvalDomain::Ball => eval_points(pop, count),
        EvalDomain::Operating => {
            let mut rng = ChaCha8Rng::seed_from_u64(pop.spec.seed ^ DOMAIN_SEED_SALT);
            (0..count)
                .map(|_| {
                    let [x, y] = disc(1.2 * amplitude_max, &mut rng);
                    let w = rng.random_range(-0.05..1.05);
                    let r = rng.random_range(-0.05..1.05) * amplitude_max;
                    vec![x, y, w, r]
                })
                .collect()
        }
    }
}

/// Points over `[x_i, y_i, x_j, y_j]`.
pub fn coupling_points(pop: &Population, domain: EvalDomain, count: usize, amplitude_max: f64) -> Vec<Vec<f64>> {
    match domain {
        EvalDomain::Ball => eval_points(pop, count),
        EvalDomain::Operating => {
            let mut rng = ChaCha8Rng::seed_from_u64(pop.spec.seed ^ DOMAIN_SEED_SALT);
            (0..count)
                .map(|_| {
                    let [a, b] = disc(1.1 * amplitude_max, &mut rng);
                    let [c, d] = disc(1.1 * amplitude_max, &mut rng);
                    vec![a, b, c, d]
                })
                .collect()
        }
    }
}
