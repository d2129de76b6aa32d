use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign convention of the phase coupling term.
///
/// With `SourceMinusTarget` the coupling of oscillator `j` into `i` is
/// `w r_j sin(theta_j - theta_i - phi_ij)`, whose stable fixed point is
/// `theta_j - theta_i = phi_ij`. `TargetMinusSource` swaps the phase
/// difference, `sin(theta_i - theta_j - phi_ij)`; its stable locked state
/// sits at `theta_j - theta_i = -(phi_ij + pi)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    #[default]
    SourceMinusTarget,
    TargetMinusSource,
}

/// Directed coupling: `source` influences `target`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub target: usize,
    pub source: usize,
    /// Coupling weight (1/s).
    pub weight: f64,
    /// Desired phase of the source relative to the target (rad).
    pub phase_bias: f64,
}

/// Double-chain coupling graph. Oscillators are interleaved: segment `k`
/// owns oscillator `2k` (left) and `2k + 1` (right).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainTopology {
    pub n_segments: usize,
    pub couplings: Vec<Coupling>,
    /// Gain from oscillator output to joint angle (rad per unit).
    pub output_gain: f64,
    pub convention: PhaseConvention,
}

impl ChainTopology {
    pub fn n_oscillators(&self) -> usize {
        2 * self.n_segments
    }

    pub const fn left(segment: usize) -> usize {
        2 * segment
    }

    pub const fn right(segment: usize) -> usize {
        2 * segment + 1
    }

    pub const fn is_right(oscillator: usize) -> bool {
        oscillator % 2 == 1
    }

    pub const fn segment_of(oscillator: usize) -> usize {
        oscillator / 2
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_oscillators();
        for c in &self.couplings {
            if c.target >= n || c.source >= n {
                return Err(Error::Topology(format!(
                    "coupling {} <- {} out of range for {} oscillators",
                    c.target, c.source, n
                )));
            }
            if c.target == c.source {
                return Err(Error::Topology(format!("self-coupling on oscillator {}", c.target)));
            }
            if !c.weight.is_finite() || !c.phase_bias.is_finite() {
                return Err(Error::Topology("non-finite coupling parameters".into()));
            }
        }
        Ok(())
    }

    /// Couplings whose target is `oscillator`.
    pub fn incoming(&self, oscillator: usize) -> impl Iterator<Item = &Coupling> {
        self.couplings.iter().filter(move |c| c.target == oscillator)
    }

    pub fn has_incoming(&self, oscillator: usize) -> bool {
        self.incoming(oscillator).next().is_some()
    }

    pub fn with_convention(mut self, convention: PhaseConvention) -> Self {
        self.convention = convention;
        self
    }
}

/// Builds the double chain: each oscillator couples to its ipsilateral
/// rostral/caudal neighbours with bias `-/+ total_phase_lag / n_segments`
/// and to its contralateral partner with bias `pi`.
pub fn build_topology(
    n_segments: usize,
    total_phase_lag: f64,
    weight: f64,
    output_gain: f64,
) -> Result<ChainTopology> {
    if n_segments == 0 {
        return Err(Error::Topology("a chain needs at least one segment".into()));
    }
    let lag = total_phase_lag / n_segments as f64;
    let mut couplings = Vec::with_capacity(4 * (n_segments - 1) + 2 * n_segments);
    for k in 0..n_segments {
        for side in 0..2 {
            let me = 2 * k + side;
            if k > 0 {
                // rostral neighbour leads
                couplings.push(Coupling {
                    target: me,
                    source: me - 2,
                    weight,
                    phase_bias: lag,
                });
            }
            if k + 1 < n_segments {
                couplings.push(Coupling {
                    target: me,
                    source: me + 2,
                    weight,
                    phase_bias: -lag,
                });
            }
            couplings.push(Coupling {
                target: me,
                source: 2 * k + (1 - side),
                weight,
                phase_bias: PI,
            });
        }
    }
    Ok(ChainTopology {
        n_segments,
        couplings,
        output_gain,
        convention: PhaseConvention::default(),
    })
}
