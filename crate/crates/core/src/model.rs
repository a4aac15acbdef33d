//! Model and sequence types, potential construction, and joint weights.
//!
//! A hidden Markov model here is a prior over `D` states, a row-stochastic
//! `D x D` transition matrix, and a row-stochastic `D x V` emission matrix
//! over a discrete alphabet. Inference never touches the model directly:
//! observations are first folded into a [`PotentialSequence`], one weight
//! vector for the initial step and one weight matrix per transition, and all
//! algorithms consume those potentials.

use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{HmmError, Result};
use crate::matrix::Matrix;
use crate::scalar::FloatScalar;

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/// Validated discrete-state, discrete-observation hidden Markov model.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel<F: FloatScalar = f64> {
    prior: Vec<F>,
    transition: Matrix<F>,
    emission: Matrix<F>,
}

impl<F: FloatScalar> HmmModel<F> {
    /// Validates shapes and stochasticity and builds a model.
    ///
    /// Requirements: `prior` has positive length `D` and sums to one within
    /// the scalar tolerance; `transition` is `D x D` and `emission` is
    /// `D x V` with `V >= 1`; every row of both sums to one within tolerance;
    /// all entries are nonnegative. A row of zeros fails the row-sum check,
    /// so models with unusable states are rejected at construction.
    pub fn new(prior: Vec<F>, transition: Matrix<F>, emission: Matrix<F>) -> Result<Self> {
        let d = prior.len();
        if d == 0 {
            return Err(HmmError::EmptyInput {
                context: "model prior",
            });
        }
        if transition.rows() != d || transition.cols() != d {
            return Err(HmmError::DimensionMismatch {
                context: "transition matrix rows/cols vs prior length",
                expected: d,
                actual: if transition.rows() != d {
                    transition.rows()
                } else {
                    transition.cols()
                },
            });
        }
        if emission.rows() != d {
            return Err(HmmError::DimensionMismatch {
                context: "emission matrix rows vs prior length",
                expected: d,
                actual: emission.rows(),
            });
        }
        check_distribution("prior", 0, &prior)?;
        for i in 0..d {
            check_distribution("transition row", i, transition.row(i))?;
            check_distribution("emission row", i, emission.row(i))?;
        }
        Ok(HmmModel {
            prior,
            transition,
            emission,
        })
    }

    /// Number of hidden states `D`.
    pub fn num_states(&self) -> usize {
        self.prior.len()
    }

    /// Number of observation symbols `V`.
    pub fn alphabet_size(&self) -> usize {
        self.emission.cols()
    }

    pub fn prior(&self) -> &[F] {
        &self.prior
    }

    pub fn transition(&self) -> &Matrix<F> {
        &self.transition
    }

    pub fn emission(&self) -> &Matrix<F> {
        &self.emission
    }
}

fn check_distribution<F: FloatScalar>(context: &'static str, index: usize, row: &[F]) -> Result<()> {
    let mut sum = F::zero();
    for &v in row {
        if !(v >= F::zero()) {
            return Err(HmmError::InvalidDistribution {
                context,
                index,
                reason: format!("entry {v:?} is negative or not a number"),
            });
        }
        sum += v;
    }
    let err = (sum - F::one()).abs();
    if err > F::distribution_tolerance() {
        return Err(HmmError::InvalidDistribution {
            context,
            index,
            reason: format!("sums to {sum:?}, not 1"),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Serialized form
// ---------------------------------------------------------------------------

/// On-disk JSON layout of a model. Shapes are revalidated on load, so a file
/// whose declared sizes disagree with its arrays is rejected.
#[derive(Serialize, Deserialize)]
struct ModelFile<F> {
    num_states: usize,
    alphabet_size: usize,
    prior: Vec<F>,
    transition: Vec<Vec<F>>,
    emission: Vec<Vec<F>>,
}

impl<F: FloatScalar + Serialize + DeserializeOwned> HmmModel<F> {
    /// Parses a model from its JSON form and validates it.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: ModelFile<F> = serde_json::from_str(text)?;
        if file.prior.len() != file.num_states {
            return Err(HmmError::DimensionMismatch {
                context: "declared num_states vs prior length",
                expected: file.num_states,
                actual: file.prior.len(),
            });
        }
        let rect = |rows: &[Vec<F>], context: &'static str, cols: usize| -> Result<Matrix<F>> {
            if rows.len() != file.num_states {
                return Err(HmmError::DimensionMismatch {
                    context,
                    expected: file.num_states,
                    actual: rows.len(),
                });
            }
            for row in rows {
                if row.len() != cols {
                    return Err(HmmError::DimensionMismatch {
                        context,
                        expected: cols,
                        actual: row.len(),
                    });
                }
            }
            Ok(Matrix::from_rows(rows))
        };
        let transition = rect(&file.transition, "transition matrix", file.num_states)?;
        let emission = rect(&file.emission, "emission matrix", file.alphabet_size)?;
        HmmModel::new(file.prior, transition, emission)
    }

    /// Serialises the model to the JSON layout accepted by [`Self::from_json_str`].
    pub fn to_json_string(&self) -> String {
        let d = self.num_states();
        let file = ModelFile {
            num_states: d,
            alphabet_size: self.alphabet_size(),
            prior: self.prior.clone(),
            transition: (0..d).map(|i| self.transition.row(i).to_vec()).collect(),
            emission: (0..d).map(|i| self.emission.row(i).to_vec()).collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serialises")
    }

    /// Reads and validates a model from a JSON file.
    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Writes the model as JSON.
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Sequences
// ---------------------------------------------------------------------------

/// Nonempty sequence of observed symbol indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationSequence(Vec<usize>);

impl ObservationSequence {
    pub fn new(symbols: Vec<usize>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(HmmError::EmptyInput {
                context: "observation sequence",
            });
        }
        Ok(ObservationSequence(symbols))
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Sequence of hidden state indices, one per step.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StateSequence(pub Vec<usize>);

impl StateSequence {
    pub fn states(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Potentials
// ---------------------------------------------------------------------------

/// Observation-conditioned factorisation of the joint weight.
///
/// `first[j]` is the weight of starting in state `j` and emitting the first
/// symbol; `pairwise[t]` has entry `(i, j)` equal to the weight of moving
/// from state `i` at step `t+1` to state `j` at step `t+2` and emitting the
/// symbol observed there. The unnormalised weight of a state sequence is the
/// product of its `first` entry and one entry of each pairwise matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSequence<F: FloatScalar = f64> {
    first: Vec<F>,
    pairwise: Vec<Matrix<F>>,
}

impl<F: FloatScalar> PotentialSequence<F> {
    /// Validates shapes and nonnegativity and assembles a potential sequence.
    pub fn new(first: Vec<F>, pairwise: Vec<Matrix<F>>) -> Result<Self> {
        let d = first.len();
        if d == 0 {
            return Err(HmmError::EmptyInput {
                context: "initial potential",
            });
        }
        let admissible = |v: F| v >= F::zero() && v.is_finite();
        if let Some(idx) = first.iter().position(|&v| !admissible(v)) {
            return Err(HmmError::InvalidEntry {
                context: "initial potential",
                index: idx,
            });
        }
        for m in &pairwise {
            if m.rows() != d || m.cols() != d {
                return Err(HmmError::DimensionMismatch {
                    context: "pairwise potential shape",
                    expected: d,
                    actual: if m.rows() != d { m.rows() } else { m.cols() },
                });
            }
            if let Some(idx) = m.entries().iter().position(|&v| !admissible(v)) {
                return Err(HmmError::InvalidEntry {
                    context: "pairwise potential",
                    index: idx,
                });
            }
        }
        Ok(PotentialSequence { first, pairwise })
    }

    /// Number of time steps `T` covered by the potentials.
    pub fn len(&self) -> usize {
        self.pairwise.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn num_states(&self) -> usize {
        self.first.len()
    }

    pub fn first(&self) -> &[F] {
        &self.first
    }

    pub fn pairwise(&self) -> &[Matrix<F>] {
        &self.pairwise
    }

    /// Log weight of a concrete state path under these potentials. Paths
    /// through zero-weight entries yield `-inf`.
    ///
    /// Summation is compensated so that re-evaluated weights stay accurate
    /// to a few ulps of the total even over very long paths; every decoder
    /// reports weights through this one routine, so identical paths always
    /// receive bitwise identical weights.
    pub fn path_log_weight(&self, states: &[usize]) -> Result<F> {
        if states.len() != self.len() {
            return Err(HmmError::DimensionMismatch {
                context: "state path length vs potential length",
                expected: self.len(),
                actual: states.len(),
            });
        }
        let mut total = CompensatedSum::new(self.first[states[0]].ln());
        for (t, m) in self.pairwise.iter().enumerate() {
            total.add(m.get(states[t], states[t + 1]).ln());
        }
        Ok(total.total())
    }
}

/// Kahan–Neumaier running sum. Plain left-to-right accumulation of `T` log
/// factors drifts by roughly `sqrt(T) * eps * |total|`, which at chain
/// lengths around 10^5 exceeds the cross-decoder agreement tolerances; the
/// compensated form keeps the error within a few ulps of the total.
struct CompensatedSum<F: FloatScalar> {
    sum: F,
    compensation: F,
}

impl<F: FloatScalar> CompensatedSum<F> {
    fn new(first: F) -> Self {
        Self {
            sum: first,
            compensation: F::zero(),
        }
    }

    fn add(&mut self, value: F) {
        let t = self.sum + value;
        if t.is_finite() {
            if self.sum.abs() >= value.abs() {
                self.compensation = self.compensation + ((self.sum - t) + value);
            } else {
                self.compensation = self.compensation + ((value - t) + self.sum);
            }
        } else {
            // An infinite total absorbs everything; the correction terms
            // would otherwise turn into NaN differences of infinities.
            self.compensation = F::zero();
        }
        self.sum = t;
    }

    fn total(self) -> F {
        self.sum + self.compensation
    }
}

/// Folds observations into the model to obtain the potential sequence.
///
/// Errors if any symbol is outside the model alphabet, naming the offending
/// step.
pub fn build_potentials<F: FloatScalar>(
    model: &HmmModel<F>,
    obs: &ObservationSequence,
) -> Result<PotentialSequence<F>> {
    let d = model.num_states();
    let v = model.alphabet_size();
    for (step, &sym) in obs.symbols().iter().enumerate() {
        if sym >= v {
            return Err(HmmError::SymbolOutOfRange {
                step,
                symbol: sym,
                alphabet_size: v,
            });
        }
    }
    let y = obs.symbols();
    let first = (0..d)
        .map(|j| model.emission().get(j, y[0]) * model.prior()[j])
        .collect();
    let pairwise = y[1..]
        .iter()
        .map(|&sym| {
            Matrix::from_fn(d, d, |i, j| {
                model.emission().get(j, sym) * model.transition().get(i, j)
            })
        })
        .collect();
    // Model rows are validated nonnegative, so products are too.
    Ok(PotentialSequence { first, pairwise })
}

/// Log of the unnormalised joint weight of a state path under observations.
///
/// Computed factor by factor with the same products as [`build_potentials`],
/// so it agrees bitwise with [`PotentialSequence::path_log_weight`] on the
/// built potentials. Zero-probability paths give `-inf`.
pub fn joint_weight<F: FloatScalar>(
    model: &HmmModel<F>,
    obs: &ObservationSequence,
    states: &StateSequence,
) -> Result<F> {
    if states.len() != obs.len() {
        return Err(HmmError::DimensionMismatch {
            context: "state path length vs observation length",
            expected: obs.len(),
            actual: states.len(),
        });
    }
    let v = model.alphabet_size();
    let d = model.num_states();
    let y = obs.symbols();
    let x = states.states();
    for (step, &sym) in y.iter().enumerate() {
        if sym >= v {
            return Err(HmmError::SymbolOutOfRange {
                step,
                symbol: sym,
                alphabet_size: v,
            });
        }
        if x[step] >= d {
            return Err(HmmError::DimensionMismatch {
                context: "state index vs number of states",
                expected: d,
                actual: x[step],
            });
        }
    }
    let mut total = CompensatedSum::new((model.emission().get(x[0], y[0]) * model.prior()[x[0]]).ln());
    for t in 1..y.len() {
        let factor = model.emission().get(x[t], y[t]) * model.transition().get(x[t - 1], x[t]);
        total.add(factor.ln());
    }
    Ok(total.total())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state_model() -> HmmModel {
        HmmModel::new(
            vec![0.5, 0.5],
            Matrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]]),
            Matrix::from_rows(&[vec![0.7, 0.3], vec![0.4, 0.6]]),
        )
        .unwrap()
    }

    #[test]
    fn rejects_non_square_transition() {
        let err = HmmModel::new(
            vec![0.5, 0.5],
            Matrix::from_rows(&[vec![1.0, 0.0]]),
            Matrix::from_rows(&[vec![1.0], vec![1.0]]),
        )
        .unwrap_err();
        assert!(matches!(err, HmmError::DimensionMismatch { .. }));
    }

    #[test]
    fn rejects_row_not_summing_to_one() {
        let err = HmmModel::new(
            vec![0.5, 0.5],
            Matrix::from_rows(&[vec![0.9, 0.2], vec![0.2, 0.8]]),
            Matrix::from_rows(&[vec![1.0], vec![1.0]]),
        )
        .unwrap_err();
        assert!(matches!(err, HmmError::InvalidDistribution { index: 0, .. }));
    }

    #[test]
    fn rejects_zero_row() {
        // An all-zero transition row is caught by the same row-sum check.
        let err = HmmModel::new(
            vec![0.5, 0.5],
            Matrix::from_rows(&[vec![0.0, 0.0], vec![0.2, 0.8]]),
            Matrix::from_rows(&[vec![1.0], vec![1.0]]),
        )
        .unwrap_err();
        assert!(matches!(err, HmmError::InvalidDistribution { .. }));
    }

    #[test]
    fn rejects_negative_entry() {
        let err = HmmModel::new(
            vec![1.5, -0.5],
            Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]),
            Matrix::from_rows(&[vec![1.0], vec![1.0]]),
        )
        .unwrap_err();
        assert!(matches!(err, HmmError::InvalidDistribution { .. }));
    }

    #[test]
    fn rejects_empty_observations() {
        assert!(matches!(
            ObservationSequence::new(vec![]),
            Err(HmmError::EmptyInput { .. })
        ));
    }

    #[test]
    fn potential_entries_match_hand_computation() {
        let model = two_state_model();
        let obs = ObservationSequence::new(vec![0, 1]).unwrap();
        let p = build_potentials(&model, &obs).unwrap();
        // first[j] = emission(j, 0) * prior[j]
        assert_eq!(p.first(), &[0.7 * 0.5, 0.4 * 0.5]);
        // pairwise[0](i, j) = emission(j, 1) * transition(i, j)
        let m = &p.pairwise()[0];
        assert_eq!(m.get(0, 0), 0.3 * 0.9);
        assert_eq!(m.get(0, 1), 0.6 * 0.1);
        assert_eq!(m.get(1, 0), 0.3 * 0.2);
        assert_eq!(m.get(1, 1), 0.6 * 0.8);
        assert_eq!(p.len(), 2);
        assert_eq!(p.num_states(), 2);
    }

    #[test]
    fn build_potentials_names_offending_symbol() {
        let model = two_state_model();
        let obs = ObservationSequence::new(vec![0, 5, 1]).unwrap();
        match build_potentials(&model, &obs) {
            Err(HmmError::SymbolOutOfRange { step, symbol, .. }) => {
                assert_eq!(step, 1);
                assert_eq!(symbol, 5);
            }
            other => panic!("expected symbol error, got {other:?}"),
        }
    }

    #[test]
    fn joint_weight_matches_factor_product() {
        let model = two_state_model();
        let obs = ObservationSequence::new(vec![0, 1]).unwrap();
        let states = StateSequence(vec![0, 1]);
        let w = joint_weight(&model, &obs, &states).unwrap();
        let expected = (0.7f64 * 0.5).ln() + (0.6f64 * 0.1).ln();
        assert_eq!(w, expected);
    }

    #[test]
    fn joint_weight_agrees_bitwise_with_path_log_weight() {
        let model = two_state_model();
        let obs = ObservationSequence::new(vec![0, 1, 0, 0, 1]).unwrap();
        let p = build_potentials(&model, &obs).unwrap();
        for path in [
            vec![0, 0, 0, 0, 0],
            vec![1, 0, 1, 0, 1],
            vec![0, 1, 1, 1, 0],
        ] {
            let via_model = joint_weight(&model, &obs, &StateSequence(path.clone())).unwrap();
            let via_potentials = p.path_log_weight(&path).unwrap();
            assert_eq!(via_model.to_bits(), via_potentials.to_bits());
        }
    }

    #[test]
    fn zero_probability_path_gives_neg_infinity() {
        let model = HmmModel::new(
            vec![1.0, 0.0],
            Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]),
            Matrix::from_rows(&[vec![1.0], vec![1.0]]),
        )
        .unwrap();
        let obs = ObservationSequence::new(vec![0, 0]).unwrap();
        let w = joint_weight(&model, &obs, &StateSequence(vec![0, 1])).unwrap();
        assert_eq!(w, f64::NEG_INFINITY);
    }

    #[test]
    fn joint_weight_rejects_length_mismatch() {
        let model = two_state_model();
        let obs = ObservationSequence::new(vec![0, 1]).unwrap();
        let err = joint_weight(&model, &obs, &StateSequence(vec![0])).unwrap_err();
        assert!(matches!(err, HmmError::DimensionMismatch { .. }));
    }

    #[test]
    fn json_round_trip_preserves_model() {
        let model = two_state_model();
        let text = model.to_json_string();
        let back: HmmModel = HmmModel::from_json_str(&text).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn json_rejects_inconsistent_declared_sizes() {
        let text = r#"{
            "num_states": 3,
            "alphabet_size": 2,
            "prior": [0.5, 0.5],
            "transition": [[1.0, 0.0], [0.0, 1.0]],
            "emission": [[0.5, 0.5], [0.5, 0.5]]
        }"#;
        assert!(matches!(
            HmmModel::<f64>::from_json_str(text),
            Err(HmmError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn json_rejects_invalid_distribution_on_load() {
        let text = r#"{
            "num_states": 2,
            "alphabet_size": 2,
            "prior": [0.9, 0.5],
            "transition": [[1.0, 0.0], [0.0, 1.0]],
            "emission": [[0.5, 0.5], [0.5, 0.5]]
        }"#;
        assert!(matches!(
            HmmModel::<f64>::from_json_str(text),
            Err(HmmError::InvalidDistribution { .. })
        ));
    }

    #[test]
    fn f32_model_accepts_single_precision_rows() {
        let model: HmmModel<f32> = HmmModel::new(
            vec![0.1f32, 0.2, 0.7],
            Matrix::filled(3, 3, 1.0f32 / 3.0),
            Matrix::filled(3, 2, 0.5f32),
        )
        .unwrap();
        assert_eq!(model.num_states(), 3);
    }
}
