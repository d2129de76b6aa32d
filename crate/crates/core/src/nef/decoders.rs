use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lif::lif_rate;
use super::population::{sample_ball, Population};
use crate::error::{Error, Result};

const EVAL_SEED_SALT: u64 = 0xe7a1_9017_5eed_0001;

/// Linear readout weights, row-major `n_neurons x output_dims`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderMatrix {
    pub label: String,
    pub n_neurons: usize,
    pub output_dims: usize,
    pub weights: Vec<f64>,
}

impl DecoderMatrix {
    pub fn zeros(label: impl Into<String>, n_neurons: usize, output_dims: usize) -> Self {
        Self {
            label: label.into(),
            n_neurons,
            output_dims,
            weights: vec![0.0; n_neurons * output_dims],
        }
    }

    #[inline]
    pub fn row(&self, neuron: usize) -> &[f64] {
        &self.weights[neuron * self.output_dims..(neuron + 1) * self.output_dims]
    }

    pub fn get(&self, neuron: usize, dim: usize) -> f64 {
        self.weights[neuron * self.output_dims + dim]
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.is_finite())
    }
}

/// Fit quality of a solved decoder on its own evaluation points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub rmse: f64,
    pub max_error: f64,
    pub lambda: f64,
    pub n_eval_points: usize,
}

#[derive(Clone, Debug)]
pub struct Solved {
    pub decoders: DecoderMatrix,
    pub stats: SolveStats,
}

/// `max(500, 10 d sqrt(n))`.
pub fn default_eval_count(n_neurons: usize, dimensions: usize) -> usize {
    let n = (10.0 * dimensions as f64 * (n_neurons as f64).sqrt()).ceil() as usize;
    n.max(500)
}

/// Seeded evaluation points, uniform in the population's ball.
pub fn eval_points(pop: &Population, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(pop.spec.seed ^ EVAL_SEED_SALT);
    (0..count)
        .map(|_| sample_ball(pop.dimensions(), pop.radius(), &mut rng))
        .collect()
}

/// Rate matrix `A[p, i]` of every neuron at every point.
pub fn activity_matrix(pop: &Population, points: &[Vec<f64>]) -> Mat<f64> {
    let mut a = Mat::<f64>::zeros(points.len(), pop.n_neurons());
    for (p, x) in points.iter().enumerate() {
        for i in 0..pop.n_neurons() {
            a[(p, i)] = lif_rate(pop.current(i, x), &pop.lif);
        }
    }
    a
}

/// Ridge least-squares solver with the factorisation shared across targets.
pub struct DecoderSolver {
    population: String,
    points: Vec<Vec<f64>>,
    activities: Mat<f64>,
    lambda: f64,
    factor: faer::linalg::solvers::Llt<f64>,
}

impl DecoderSolver {
    /// `regularization` is a fraction of the largest rate in the activity
    /// matrix; the ridge penalty is `(regularization * max_rate)^2 * n_points`.
    pub fn new(
        population: impl Into<String>,
        pop: &Population,
        points: Vec<Vec<f64>>,
        regularization: f64,
    ) -> Result<Self> {
        let population = population.into();
        if points.is_empty() {
            return Err(Error::DecoderSolve {
                population,
                detail: "no evaluation points".into(),
            });
        }
        if !(regularization > 0.0) {
            return Err(Error::config(format!("regularization must be > 0, got {regularization}")));
        }
        if let Some(p) = points.iter().find(|p| p.len() != pop.dimensions()) {
            return Err(Error::Shape(format!(
                "evaluation point of length {} for a {}-d population",
                p.len(),
                pop.dimensions()
            )));
        }
        let activities = activity_matrix(pop, &points);
        let max_rate = activities
            .col_iter()
            .flat_map(|c| c.iter().copied().collect::<Vec<_>>())
            .fold(0.0f64, f64::max);
        if max_rate <= 0.0 {
            return Err(Error::DecoderSolve {
                population,
                detail: "no neuron is active on the evaluation points".into(),
            });
        }
        let lambda = (regularization * max_rate).powi(2) * points.len() as f64;
        let mut gram = activities.transpose() * &activities;
        for i in 0..gram.nrows() {
            gram[(i, i)] += lambda;
        }
        let factor = gram.llt(Side::Lower).map_err(|e| Error::DecoderSolve {
            population: population.clone(),
            detail: format!("cholesky failed: {e:?}"),
        })?;
        Ok(Self {
            population,
            points,
            activities,
            lambda,
            factor,
        })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn activities(&self) -> &Mat<f64> {
        &self.activities
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Stacked targets `F[p, k]`.
    pub fn targets<F>(&self, target: F) -> Result<Mat<f64>>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let values: Vec<Vec<f64>> = self.points.iter().map(|p| target(p)).collect();
        let k = values[0].len();
        if k == 0 || values.iter().any(|v| v.len() != k) {
            return Err(Error::Shape(format!(
                "target for `{}` must return a fixed non-empty length",
                self.population
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::DecoderSolve {
                population: self.population.clone(),
                detail: "target function is not finite on the evaluation points".into(),
            });
        }
        Ok(Mat::from_fn(values.len(), k, |p, j| values[p][j]))
    }

    pub fn solve<F>(&self, label: impl Into<String>, target: F) -> Result<Solved>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let f = self.targets(target)?;
        let rhs = self.activities.transpose() * &f;
        let d = self.factor.solve(&rhs);
        let n = d.nrows();
        let k = d.ncols();
        let mut weights = Vec::with_capacity(n * k);
        for i in 0..n {
            for j in 0..k {
                weights.push(d[(i, j)]);
            }
        }
        let decoders = DecoderMatrix {
            label: label.into(),
            n_neurons: n,
            output_dims: k,
            weights,
        };
        if !decoders.is_finite() {
            return Err(Error::DecoderSolve {
                population: self.population.clone(),
                detail: format!("non-finite decoders for `{}`", decoders.label),
            });
        }
        let residual = &self.activities * &d - &f;
        let m = f.nrows();
        let mut sq = 0.0;
        let mut max_error = 0.0f64;
        for p in 0..m {
            let e2: f64 = (0..k).map(|j| residual[(p, j)].powi(2)).sum();
            sq += e2;
            max_error = max_error.max(e2.sqrt());
        }
        let stats = SolveStats {
            rmse: (sq / m as f64).sqrt(),
            max_error,
            lambda: self.lambda,
            n_eval_points: m,
        };
        Ok(Solved { decoders, stats })
    }

    /// `||A D - F||^2 + lambda ||D||^2` for arbitrary decoders.
    pub fn objective(&self, targets: &Mat<f64>, decoders: &DecoderMatrix) -> f64 {
        let d = Mat::from_fn(decoders.n_neurons, decoders.output_dims, |i, j| decoders.get(i, j));
        let r = &self.activities * &d - targets;
        let fit: f64 = r.col_iter().map(|c| c.iter().map(|v| v * v).sum::<f64>()).sum();
        let ridge: f64 = decoders.weights.iter().map(|w| w * w).sum();
        fit + self.lambda * ridge
    }
}

/// One-shot solve on seeded uniform-ball evaluation points.
pub fn solve_decoders<F>(pop: &Population, target: F, n_eval_points: usize, regularization: f64) -> Result<Solved>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let solver = DecoderSolver::new("population", pop, eval_points(pop, n_eval_points), regularization)?;
    solver.solve("target", target)
}

/// `activity^T D`.
pub fn decode(activity: &[f64], decoders: &DecoderMatrix) -> Result<Vec<f64>> {
    if activity.len() != decoders.n_neurons {
        return Err(Error::Shape(format!(
            "activity of length {} for decoders with {} rows",
            activity.len(),
            decoders.n_neurons
        )));
    }
    let mut out = vec![0.0; decoders.output_dims];
    for (i, a) in activity.iter().enumerate() {
        if *a != 0.0 {
            for (o, w) in out.iter_mut().zip(decoders.row(i)) {
                *o += a * w;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nef::{LifParams, PopulationSpec};
    use proptest::prelude::*;

    fn pop(n: usize, d: usize, radius: f64, seed: u64) -> Population {
        Population::generate(PopulationSpec::new(n, d, radius, seed), LifParams::default()).unwrap()
    }

    #[test]
    fn eval_count_rule() {
        assert_eq!(default_eval_count(100, 1), 500);
        assert_eq!(default_eval_count(2000, 4), 1789);
    }

    #[test]
    fn identity_decode_one_dimension() {
        for radius in [1.0, 3.0] {
            let p = pop(100, 1, radius, 4);
            let s = solve_decoders(&p, |x| x.to_vec(), 500, 0.1).unwrap();
            assert!(s.stats.rmse < 0.02 * radius, "rmse {}", s.stats.rmse);
            let half = decode(&p.rates(&[0.5 * radius]), &s.decoders).unwrap();
            assert!((half[0] - 0.5 * radius).abs() < 0.05 * radius);
        }
    }

    #[test]
    fn zero_target_gives_zero_decoders() {
        let p = pop(50, 2, 1.0, 1);
        let s = solve_decoders(&p, |_| vec![0.0], 500, 0.1).unwrap();
        assert!(s.decoders.weights.iter().all(|w| w.abs() < 1e-12));
    }

    #[test]
    fn first_order_optimality() {
        let p = pop(60, 2, 1.0, 9);
        let solver = DecoderSolver::new("p", &p, eval_points(&p, 500), 0.1).unwrap();
        let target = |x: &[f64]| vec![x[0] * x[1], x[0].sin()];
        let s = solver.solve("prod", target).unwrap();
        let f = solver.targets(target).unwrap();
        let base = solver.objective(&f, &s.decoders);
        for idx in (0..s.decoders.weights.len()).step_by(7) {
            for delta in [1e-3, -1e-3] {
                let mut d = s.decoders.clone();
                d.weights[idx] += delta;
                assert!(solver.objective(&f, &d) >= base);
            }
        }
    }

    #[test]
    fn decode_shape_mismatch() {
        let d = DecoderMatrix::zeros("z", 3, 2);
        assert!(matches!(decode(&[1.0, 2.0], &d), Err(Error::Shape(_))));
        assert_eq!(decode(&[0.0; 3], &d).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn solve_is_deterministic() {
        let p = pop(80, 3, 1.0, 2);
        let a = solve_decoders(&p, |x| vec![x[0] * x[2]], 600, 0.1).unwrap();
        let b = solve_decoders(&p, |x| vec![x[0] * x[2]], 600, 0.1).unwrap();
        assert_eq!(a.decoders, b.decoders);
    }

    proptest! {
        #[test]
        fn decode_is_linear(
            a in proptest::collection::vec(-50.0f64..50.0, 6),
            b in proptest::collection::vec(-50.0f64..50.0, 6),
            w in proptest::collection::vec(-1.0f64..1.0, 12),
        ) {
            let d = DecoderMatrix { label: "w".into(), n_neurons: 6, output_dims: 2, weights: w };
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            let lhs = decode(&sum, &d).unwrap();
            let ra = decode(&a, &d).unwrap();
            let rb = decode(&b, &d).unwrap();
            for k in 0..2 {
                prop_assert!((lhs[k] - (ra[k] + rb[k])).abs() <= 1e-9 * (1.0 + lhs[k].abs()));
            }
        }
    }
}
