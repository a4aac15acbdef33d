//! Bursty binary channel model and trajectory simulation.
//!
//! The model is a four-state HMM describing a binary symbol stream sent
//! through a channel that alternates between a low-error and a high-error
//! regime. The hidden state is the pair (transmitted bit, regime), indexed
//! `bit * 2 + regime`:
//!
//! * the regime switches from low-error to high-error with probability `p0`
//!   and back with probability `p1`,
//! * the transmitted bit flips with probability `p2`,
//! * the observed bit is the transmitted bit, read incorrectly with
//!   probability `q0` in the low-error regime and `q1` in the high-error
//!   regime.
//!
//! Bit and regime evolve independently, so each transition probability is a
//! product of one bit factor and one regime factor. The prior is uniform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HmmError, Result};
use crate::matrix::Matrix;
use crate::model::{HmmModel, ObservationSequence, StateSequence};
use crate::scalar::FloatScalar;

/// Channel parameters; all must lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeParams {
    /// Regime switch probability, low-error to high-error.
    pub p0: f64,
    /// Regime switch probability, high-error to low-error.
    pub p1: f64,
    /// Transmitted bit flip probability.
    pub p2: f64,
    /// Read error probability in the low-error regime.
    pub q0: f64,
    /// Read error probability in the high-error regime.
    pub q1: f64,
}

impl Default for GeParams {
    /// A mildly bursty channel: rare regime switches, occasional bit flips,
    /// an order of magnitude between the two error rates.
    fn default() -> Self {
        GeParams {
            p0: 0.03,
            p1: 0.1,
            p2: 0.05,
            q0: 0.01,
            q1: 0.1,
        }
    }
}

impl GeParams {
    fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("p0", self.p0),
            ("p1", self.p1),
            ("p2", self.p2),
            ("q0", self.q0),
            ("q1", self.q1),
        ] {
            if !(0.0..=1.0).contains(&value) || value.is_nan() {
                return Err(HmmError::InvalidParameter {
                    name,
                    value,
                    reason: "must lie in [0, 1]",
                });
            }
        }
        Ok(())
    }
}

/// Builds the four-state channel model for the given parameters.
pub fn build_ge_model<F: FloatScalar>(params: &GeParams) -> Result<HmmModel<F>> {
    params.validate()?;
    let GeParams { p0, p1, p2, q0, q1 } = *params;
    let transition = [
        [
            (1.0 - p0) * (1.0 - p2),
            p0 * (1.0 - p2),
            (1.0 - p0) * p2,
            p0 * p2,
        ],
        [
            p1 * (1.0 - p2),
            (1.0 - p1) * (1.0 - p2),
            p1 * p2,
            (1.0 - p1) * p2,
        ],
        [
            (1.0 - p0) * p2,
            p0 * p2,
            (1.0 - p0) * (1.0 - p2),
            p0 * (1.0 - p2),
        ],
        [
            p1 * p2,
            (1.0 - p1) * p2,
            p1 * (1.0 - p2),
            (1.0 - p1) * (1.0 - p2),
        ],
    ];
    let emission = [
        [1.0 - q0, q0],
        [1.0 - q1, q1],
        [q0, 1.0 - q0],
        [q1, 1.0 - q1],
    ];
    HmmModel::new(
        vec![F::from_f64_param(0.25); 4],
        Matrix::from_fn(4, 4, |i, j| F::from_f64_param(transition[i][j])),
        Matrix::from_fn(4, 2, |i, j| F::from_f64_param(emission[i][j])),
    )
}

/// A simulated hidden trajectory with its observations and the seed that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub states: StateSequence,
    pub observations: ObservationSequence,
    pub seed: u64,
}

/// Samples a state and observation trajectory of the given length.
///
/// Reproducibility contract: the generator is ChaCha8 seeded directly with
/// `seed`, and each step draws exactly two uniform doubles in a fixed
/// order (state first, then observation), mapped to indices by walking the
/// cumulative distribution. Equal inputs give equal trajectories on every
/// platform and thread count.
pub fn simulate<F: FloatScalar>(
    model: &HmmModel<F>,
    len: usize,
    seed: u64,
) -> Result<SimulationOutput> {
    if len == 0 {
        return Err(HmmError::EmptyInput {
            context: "simulation length",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(len);
    let mut observations = Vec::with_capacity(len);

    let mut state = sample_index(&mut rng, model.prior());
    states.push(state);
    observations.push(sample_index(&mut rng, model.emission().row(state)));
    for _ in 1..len {
        state = sample_index(&mut rng, model.transition().row(state));
        states.push(state);
        observations.push(sample_index(&mut rng, model.emission().row(state)));
    }
    Ok(SimulationOutput {
        states: StateSequence(states),
        observations: ObservationSequence::new(observations)?,
        seed,
    })
}

/// Inverse-CDF draw: the first index whose cumulative weight exceeds a
/// uniform sample. Weights are a validated distribution; any residue that
/// rounding leaves past the last positive weight falls back to it.
fn sample_index<F: FloatScalar>(rng: &mut ChaCha8Rng, weights: &[F]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (idx, &w) in weights.iter().enumerate() {
        let w = w.to_f64().expect("weights are finite");
        if w > 0.0 {
            last_positive = idx;
        }
        acc += w;
        if u < acc {
            return idx;
        }
    }
    last_positive
}
