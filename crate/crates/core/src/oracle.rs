//! Brute-force reference oracles for differential testing.
//!
//! Each oracle enumerates all `D^T` state sequences and evaluates the joint
//! weight directly, with no recursions, no scans, and no rescaling. They are
//! deliberately naive: the fast pipelines are checked against these, never
//! the other way round. A size guard refuses inputs whose enumeration would
//! exceed [`BRUTE_FORCE_LIMIT`] sequences.

use crate::error::{HmmError, Result};
use crate::model::{build_potentials, HmmModel, ObservationSequence, StateSequence};
use crate::scalar::FloatScalar;

/// Maximum number of sequences an oracle will enumerate.
pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

/// Number of sequences for a problem, or an error beyond the guard.
fn guarded_sequence_count(num_states: usize, len: usize) -> Result<u64> {
    let mut total: u64 = 1;
    for _ in 0..len {
        total = total
            .checked_mul(num_states as u64)
            .filter(|&v| v <= BRUTE_FORCE_LIMIT)
            .ok_or(HmmError::SizeGuardExceeded {
                num_states,
                len,
                limit: BRUTE_FORCE_LIMIT,
            })?;
    }
    Ok(total)
}

/// Writes the `index`-th state sequence in lexicographic order into `states`.
/// The first step is the most significant digit.
fn decode_sequence(mut index: u64, num_states: usize, states: &mut [usize]) {
    let d = num_states as u64;
    for slot in states.iter_mut().rev() {
        *slot = (index % d) as usize;
        index /= d;
    }
}

/// Smoothing marginals by full enumeration: for every step `k`, the
/// normalised total weight of sequences passing through each state.
pub fn brute_force_marginals<F: FloatScalar>(
    model: &HmmModel<F>,
    obs: &ObservationSequence,
) -> Result<Vec<Vec<F>>> {
    let d = model.num_states();
    let t = obs.len();
    let count = guarded_sequence_count(d, t)?;
    let potentials = build_potentials(model, obs)?;

    let mut acc = vec![vec![F::zero(); d]; t];
    let mut states = vec![0usize; t];
    for index in 0..count {
        decode_sequence(index, d, &mut states);
        let mut w = potentials.first()[states[0]];
        for (step, m) in potentials.pairwise().iter().enumerate() {
            w = w * m.get(states[step], states[step + 1]);
        }
        for (step, &x) in states.iter().enumerate() {
            acc[step][x] += w;
        }
    }

    for (step, row) in acc.iter_mut().enumerate() {
        let z = row.iter().fold(F::zero(), |s, &v| s + v);
        if z <= F::zero() {
            return Err(HmmError::DegenerateMarginal { step });
        }
        for v in row.iter_mut() {
            *v /= z;
        }
    }
    Ok(acc)
}

/// Log of the total unnormalised weight over all sequences.
pub fn brute_force_log_evidence<F: FloatScalar>(
    model: &HmmModel<F>,
    obs: &ObservationSequence,
) -> Result<F> {
    let d = model.num_states();
    let t = obs.len();
    let count = guarded_sequence_count(d, t)?;
    let potentials = build_potentials(model, obs)?;

    let mut total = F::zero();
    let mut states = vec![0usize; t];
    for index in 0..count {
        decode_sequence(index, d, &mut states);
        let mut w = potentials.first()[states[0]];
        for (step, m) in potentials.pairwise().iter().enumerate() {
            w = w * m.get(states[step], states[step + 1]);
        }
        total += w;
    }
    if total <= F::zero() {
        return Err(HmmError::ImpossibleObservations { step: 0 });
    }
    Ok(total.ln())
}

/// Maximum-weight state sequence by full enumeration, with its log weight.
///
/// Sequences are visited in lexicographic order and only strictly better
/// weights replace the incumbent, so ties resolve to the lexicographically
/// smallest sequence.
pub fn brute_force_map<F: FloatScalar>(
    model: &HmmModel<F>,
    obs: &ObservationSequence,
) -> Result<(StateSequence, F)> {
    let d = model.num_states();
    let t = obs.len();
    let count = guarded_sequence_count(d, t)?;

    let mut best: Option<(Vec<usize>, F)> = None;
    let mut states = vec![0usize; t];
    for index in 0..count {
        decode_sequence(index, d, &mut states);
        let w = crate::model::joint_weight(model, obs, &StateSequence(states.clone()))?;
        let better = match &best {
            None => w > F::neg_infinity(),
            Some((_, incumbent)) => w > *incumbent,
        };
        if better {
            best = Some((states.clone(), w));
        }
    }
    match best {
        Some((path, w)) => Ok((StateSequence(path), w)),
        None => Err(HmmError::ImpossibleObservations { step: 0 }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn two_state_model() -> HmmModel {
        HmmModel::new(
            vec![0.6, 0.4],
            Matrix::from_rows(&[vec![0.7, 0.3], vec![0.4, 0.6]]),
            Matrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]]),
        )
        .unwrap()
    }

    #[test]
    fn single_step_marginal_is_bayes_rule() {
        let model = two_state_model();
        let obs = ObservationSequence::new(vec![0]).unwrap();
        let m = brute_force_marginals(&model, &obs).unwrap();
        // p(x1 | y1=0) proportional to prior * emission(., 0).
        let w0 = 0.6 * 0.9;
        let w1 = 0.4 * 0.2;
        assert!((m[0][0] - w0 / (w0 + w1)).abs() < 1e-15);
        assert!((m[0][1] - w1 / (w0 + w1)).abs() < 1e-15);
    }

    #[test]
    fn marginals_sum_to_one_each_step() {
        let model = two_state_model();
        let obs = ObservationSequence::new(vec![0, 1, 1, 0, 1]).unwrap();
        let m = brute_force_marginals(&model, &obs).unwrap();
        for row in &m {
            let s: f64 = row.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn map_ties_resolve_to_lexicographically_smallest() {
        // Symmetric model: every sequence has identical weight.
        let model = HmmModel::new(
            vec![0.5, 0.5],
            Matrix::filled(2, 2, 0.5),
            Matrix::filled(2, 2, 0.5),
        )
        .unwrap();
        let obs = ObservationSequence::new(vec![0, 1, 0]).unwrap();
        let (path, _) = brute_force_map(&model, &obs).unwrap();
        assert_eq!(path.states(), &[0, 0, 0]);
    }

    #[test]
    fn map_weight_matches_joint_weight_of_returned_path() {
        let model = two_state_model();
        let obs = ObservationSequence::new(vec![0, 1, 0, 0]).unwrap();
        let (path, w) = brute_force_map(&model, &obs).unwrap();
        let direct = crate::model::joint_weight(&model, &obs, &path).unwrap();
        assert_eq!(w.to_bits(), direct.to_bits());
    }

    #[test]
    fn size_guard_rejects_oversized_enumeration() {
        let model = two_state_model();
        // 2^24 > 10^7 sequences.
        let obs = ObservationSequence::new(vec![0; 24]).unwrap();
        assert!(matches!(
            brute_force_marginals(&model, &obs),
            Err(HmmError::SizeGuardExceeded { .. })
        ));
        assert!(matches!(
            brute_force_map(&model, &obs),
            Err(HmmError::SizeGuardExceeded { .. })
        ));
    }

    #[test]
    fn guard_admits_boundary_size() {
        // 10^7 exactly: 10 states, 7 steps.
        assert!(guarded_sequence_count(10, 7).is_ok());
        assert!(guarded_sequence_count(10, 8).is_err());
    }

    #[test]
    fn decode_enumerates_lexicographically() {
        let mut s = vec![0usize; 3];
        decode_sequence(0, 2, &mut s);
        assert_eq!(s, &[0, 0, 0]);
        decode_sequence(1, 2, &mut s);
        assert_eq!(s, &[0, 0, 1]);
        decode_sequence(4, 2, &mut s);
        assert_eq!(s, &[1, 0, 0]);
        decode_sequence(7, 2, &mut s);
        assert_eq!(s, &[1, 1, 1]);
    }

    #[test]
    fn log_evidence_matches_hand_sum() {
        let model = two_state_model();
        let obs = ObservationSequence::new(vec![0, 1]).unwrap();
        // Sum over four sequences of prior * emission * transition * emission.
        let mut z = 0.0f64;
        for x0 in 0..2 {
            for x1 in 0..2 {
                let prior = [0.6, 0.4][x0];
                let e0 = [[0.9, 0.1], [0.2, 0.8]][x0][0];
                let tr = [[0.7, 0.3], [0.4, 0.6]][x0][x1];
                let e1 = [[0.9, 0.1], [0.2, 0.8]][x1][1];
                z += prior * e0 * tr * e1;
            }
        }
        let lz = brute_force_log_evidence(&model, &obs).unwrap();
        assert!((lz - z.ln()).abs() < 1e-14);
    }
}
