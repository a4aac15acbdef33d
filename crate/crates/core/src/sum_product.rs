//! Smoothing marginals by sum-product message passing.
//!
//! Two interchangeable executions are provided. The sequential one runs the
//! classic forward-backward vector recursions in `T - 1` dependent steps per
//! pass. The parallel one lifts the same computation into the scan engine:
//! scan elements are `D x D` weight matrices whose product telescopes the
//! chain, the forward pass is an inclusive forward scan and the backward
//! pass an inclusive reversed scan, giving logarithmic dependency depth.
//!
//! Every element and every per-step vector is kept normalised so that its
//! largest entry is one, with the discarded magnitude accumulated in a log
//! scale. This keeps arbitrarily long chains inside floating-point range
//! while preserving exact ratios; true values are `weights * exp(log_scale)`.
//!
//! Forward prefix matrices have identical rows and backward suffix matrices
//! identical columns, because the boundary elements erase the row (or
//! column) index. Extraction therefore reads row zero (or column zero).

use crate::error::{HmmError, Result};
use crate::matrix::Matrix;
use crate::model::PotentialSequence;
use crate::scalar::FloatScalar;
use crate::scan::{parallel_scan, ScanProblem, ScanStats};

// ---------------------------------------------------------------------------
// Scan element
// ---------------------------------------------------------------------------

/// Scan element of the sum-product pass: a nonnegative weight matrix with
/// its magnitude split off into a log scale.
///
/// Invariant: the largest entry of `weights` is one, unless every entry is
/// zero (an annihilating element, which stays all-zero under combination).
#[derive(Debug, Clone, PartialEq)]
pub struct SumProductElement<F: FloatScalar = f64> {
    weights: Matrix<F>,
    log_scale: F,
}

impl<F: FloatScalar> SumProductElement<F> {
    /// Normalises an arbitrary nonnegative matrix into element form.
    pub fn from_weights(weights: Matrix<F>) -> Self {
        let mut e = SumProductElement {
            weights,
            log_scale: F::zero(),
        };
        e.rescale();
        e
    }

    /// Boundary element starting the forward pass: every row is the initial
    /// potential, so any prefix product through it has identical rows.
    pub fn leading(first: &[F]) -> Self {
        let d = first.len();
        Self::from_weights(Matrix::from_fn(d, d, |_, j| first[j]))
    }

    /// Interior element wrapping one pairwise potential matrix.
    pub fn pairwise(potential: &Matrix<F>) -> Self {
        Self::from_weights(potential.clone())
    }

    /// Boundary element ending the backward pass: all ones, which sums out
    /// the final state and makes suffix products column-constant.
    pub fn trailing(num_states: usize) -> Self {
        SumProductElement {
            weights: Matrix::filled(num_states, num_states, F::one()),
            log_scale: F::zero(),
        }
    }

    pub fn weights(&self) -> &Matrix<F> {
        &self.weights
    }

    pub fn log_scale(&self) -> F {
        self.log_scale
    }

    pub fn dim(&self) -> usize {
        self.weights.rows()
    }

    /// Entry `(i, j)` on its true scale, as a log weight.
    pub fn log_entry(&self, i: usize, j: usize) -> F {
        self.weights.get(i, j).ln() + self.log_scale
    }

    fn rescale(&mut self) {
        let max = self
            .weights
            .entries()
            .iter()
            .fold(F::zero(), |m, &v| if v > m { v } else { m });
        if max > F::zero() && max != F::one() {
            self.weights = self.weights.map(|v| v / max);
            self.log_scale += max.ln();
        }
    }
}

/// Associative combination of two elements: the matrix product of the true
/// matrices, renormalised. Scales add, plus the log of the rescaling factor.
pub fn combine_sum<F: FloatScalar>(
    a: &SumProductElement<F>,
    b: &SumProductElement<F>,
) -> Result<SumProductElement<F>> {
    if a.dim() != b.dim() {
        return Err(HmmError::DimensionMismatch {
            context: "sum-product combine operands",
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let mut e = SumProductElement {
        weights: a.weights.matmul(&b.weights),
        log_scale: a.log_scale + b.log_scale,
    };
    e.rescale();
    Ok(e)
}

// ---------------------------------------------------------------------------
// Per-step vectors
// ---------------------------------------------------------------------------

/// One forward or backward message: nonnegative weights over states with the
/// same max-entry-one normalisation as the matrix elements.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledVector<F: FloatScalar = f64> {
    weights: Vec<F>,
    log_scale: F,
}

impl<F: FloatScalar> ScaledVector<F> {
    pub fn new(weights: Vec<F>, log_scale: F) -> Self {
        let mut v = ScaledVector { weights, log_scale };
        let max = v
            .weights
            .iter()
            .fold(F::zero(), |m, &w| if w > m { w } else { m });
        if max > F::zero() && max != F::one() {
            for w in v.weights.iter_mut() {
                *w /= max;
            }
            v.log_scale += max.ln();
        }
        v
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn log_scale(&self) -> F {
        self.log_scale
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

// ---------------------------------------------------------------------------
// Passes
// ---------------------------------------------------------------------------

/// Forward messages by the sequential vector recursion.
///
/// Output `k` is the unnormalised filtering weight of each state at step
/// `k + 1` (on the scaled representation), reached after exactly `k`
/// dependent steps.
pub fn forward_sequential<F: FloatScalar>(
    potentials: &PotentialSequence<F>,
) -> (Vec<ScaledVector<F>>, ScanStats) {
    let d = potentials.num_states();
    let mut out = Vec::with_capacity(potentials.len());
    out.push(ScaledVector::new(potentials.first().to_vec(), F::zero()));
    for m in potentials.pairwise() {
        let prev = out.last().unwrap();
        let mut next = vec![F::zero(); d];
        for i in 0..d {
            let w = prev.weights[i];
            if w > F::zero() {
                for (j, slot) in next.iter_mut().enumerate() {
                    *slot += w * m.get(i, j);
                }
            }
        }
        out.push(ScaledVector::new(next, prev.log_scale));
    }
    let steps = (potentials.len() - 1) as u64;
    (
        out,
        ScanStats {
            combine_invocations: steps,
            parallel_depth: steps as u32,
        },
    )
}

/// Backward messages by the sequential vector recursion.
///
/// Output `k` sums the weight of all continuations after step `k + 1`; the
/// final output is the all-ones vector.
pub fn backward_sequential<F: FloatScalar>(
    potentials: &PotentialSequence<F>,
) -> (Vec<ScaledVector<F>>, ScanStats) {
    let d = potentials.num_states();
    let t = potentials.len();
    let mut out = vec![ScaledVector::new(vec![F::one(); d], F::zero())];
    for m in potentials.pairwise().iter().rev() {
        let next = out.last().unwrap();
        let mut cur = vec![F::zero(); d];
        for (i, slot) in cur.iter_mut().enumerate() {
            let mut acc = F::zero();
            for j in 0..d {
                acc += m.get(i, j) * next.weights[j];
            }
            *slot = acc;
        }
        out.push(ScaledVector::new(cur, next.log_scale));
    }
    out.reverse();
    let steps = (t - 1) as u64;
    (
        out,
        ScanStats {
            combine_invocations: steps,
            parallel_depth: steps as u32,
        },
    )
}

/// Scan element list for the forward pass: the leading boundary element
/// followed by every pairwise potential.
pub fn forward_elements<F: FloatScalar>(
    potentials: &PotentialSequence<F>,
) -> Vec<SumProductElement<F>> {
    let mut elems = Vec::with_capacity(potentials.len());
    elems.push(SumProductElement::leading(potentials.first()));
    elems.extend(potentials.pairwise().iter().map(SumProductElement::pairwise));
    elems
}

/// Scan element list for the backward pass: every pairwise potential
/// followed by the trailing boundary element.
pub fn backward_elements<F: FloatScalar>(
    potentials: &PotentialSequence<F>,
) -> Vec<SumProductElement<F>> {
    let mut elems = Vec::with_capacity(potentials.len());
    elems.extend(potentials.pairwise().iter().map(SumProductElement::pairwise));
    elems.push(SumProductElement::trailing(potentials.num_states()));
    elems
}

fn combine_sum_total<F: FloatScalar>(
    a: &SumProductElement<F>,
    b: &SumProductElement<F>,
) -> SumProductElement<F> {
    combine_sum(a, b).expect("potential matrices share the model dimension")
}

/// Forward messages by parallel scan; values match [`forward_sequential`]
/// up to floating-point regrouping.
pub fn forward_parallel<F: FloatScalar>(
    potentials: &PotentialSequence<F>,
) -> (Vec<ScaledVector<F>>, ScanStats) {
    let problem = ScanProblem::forward(forward_elements(potentials), combine_sum_total)
        .expect("potential sequence is nonempty");
    let (prefixes, stats) = parallel_scan(&problem);
    let out = prefixes
        .into_iter()
        .map(|e| ScaledVector::new(e.weights().row(0).to_vec(), e.log_scale()))
        .collect();
    (out, stats)
}

/// Backward messages by parallel reversed scan; values match
/// [`backward_sequential`] up to floating-point regrouping.
pub fn backward_parallel<F: FloatScalar>(
    potentials: &PotentialSequence<F>,
) -> (Vec<ScaledVector<F>>, ScanStats) {
    let problem = ScanProblem::reversed(backward_elements(potentials), combine_sum_total)
        .expect("potential sequence is nonempty");
    let (suffixes, stats) = parallel_scan(&problem);
    let out = suffixes
        .into_iter()
        .map(|e| ScaledVector::new(e.weights().col(0), e.log_scale()))
        .collect();
    (out, stats)
}

// ---------------------------------------------------------------------------
// Marginals
// ---------------------------------------------------------------------------

/// Smoothing marginals for every step plus the log evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSet<F: FloatScalar = f64> {
    marginals: Vec<Vec<F>>,
    log_evidence: F,
}

impl<F: FloatScalar> MarginalSet<F> {
    /// Number of time steps.
    pub fn len(&self) -> usize {
        self.marginals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marginals.is_empty()
    }

    pub fn num_states(&self) -> usize {
        self.marginals[0].len()
    }

    /// Distribution over states at step `k`; entries sum to one.
    pub fn step(&self, k: usize) -> &[F] {
        &self.marginals[k]
    }

    pub fn marginals(&self) -> &[Vec<F>] {
        &self.marginals
    }

    /// Log of the total unnormalised weight (the observation likelihood).
    pub fn log_evidence(&self) -> F {
        self.log_evidence
    }

    /// Largest absolute entry difference against another marginal set.
    pub fn max_abs_difference(&self, other: &MarginalSet<F>) -> F {
        assert_eq!(self.len(), other.len(), "marginal sets cover equal spans");
        let mut worst = F::zero();
        for (a, b) in self.marginals.iter().zip(&other.marginals) {
            for (&x, &y) in a.iter().zip(b) {
                let d = (x - y).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Pointwise product of matching forward and backward messages, normalised
/// per step.
///
/// Also recovers the log evidence at step zero; its value is the same at
/// every step up to rounding, which [`per_step_log_evidence`] exposes for
/// verification. Errors if the message lists disagree in shape or if the
/// product vanishes at some step.
pub fn marginals<F: FloatScalar>(
    forward: &[ScaledVector<F>],
    backward: &[ScaledVector<F>],
) -> Result<MarginalSet<F>> {
    if forward.len() != backward.len() {
        return Err(HmmError::DimensionMismatch {
            context: "forward vs backward message count",
            expected: forward.len(),
            actual: backward.len(),
        });
    }
    if forward.is_empty() {
        return Err(HmmError::EmptyInput {
            context: "marginal assembly",
        });
    }
    let mut out = Vec::with_capacity(forward.len());
    let mut log_evidence = F::zero();
    for (k, (f, b)) in forward.iter().zip(backward).enumerate() {
        if f.dim() != b.dim() {
            return Err(HmmError::DimensionMismatch {
                context: "forward vs backward message dimension",
                expected: f.dim(),
                actual: b.dim(),
            });
        }
        let prod: Vec<F> = f
            .weights()
            .iter()
            .zip(b.weights())
            .map(|(&x, &y)| x * y)
            .collect();
        let z = prod.iter().fold(F::zero(), |s, &v| s + v);
        if !(z > F::zero()) {
            return Err(HmmError::DegenerateMarginal { step: k });
        }
        if k == 0 {
            log_evidence = z.ln() + f.log_scale() + b.log_scale();
        }
        out.push(prod.into_iter().map(|v| v / z).collect());
    }
    Ok(MarginalSet {
        marginals: out,
        log_evidence,
    })
}

/// Log evidence recomputed independently at every step. All entries agree
/// up to rounding; spread beyond tolerance indicates an inconsistency
/// between the passes.
pub fn per_step_log_evidence<F: FloatScalar>(
    forward: &[ScaledVector<F>],
    backward: &[ScaledVector<F>],
) -> Result<Vec<F>> {
    if forward.len() != backward.len() {
        return Err(HmmError::DimensionMismatch {
            context: "forward vs backward message count",
            expected: forward.len(),
            actual: backward.len(),
        });
    }
    forward
        .iter()
        .zip(backward)
        .enumerate()
        .map(|(k, (f, b))| {
            let mut z = F::zero();
            for (&x, &y) in f.weights().iter().zip(b.weights()) {
                z += x * y;
            }
            if !(z > F::zero()) {
                return Err(HmmError::DegenerateMarginal { step: k });
            }
            Ok(z.ln() + f.log_scale() + b.log_scale())
        })
        .collect()
}

// ---------------------------------------------------------------------------
// End-to-end smoothing
// ---------------------------------------------------------------------------

/// Marginals plus the execution statistics of both passes.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothOutcome<F: FloatScalar = f64> {
    pub marginals: MarginalSet<F>,
    pub forward_stats: ScanStats,
    pub backward_stats: ScanStats,
}

/// Both sequential passes plus marginal assembly.
pub fn smooth_sequential<F: FloatScalar>(
    potentials: &PotentialSequence<F>,
) -> Result<SmoothOutcome<F>> {
    let (f, fs) = forward_sequential(potentials);
    let (b, bs) = backward_sequential(potentials);
    Ok(SmoothOutcome {
        marginals: marginals(&f, &b)?,
        forward_stats: fs,
        backward_stats: bs,
    })
}

/// Both parallel passes plus marginal assembly.
pub fn smooth_parallel<F: FloatScalar>(
    potentials: &PotentialSequence<F>,
) -> Result<SmoothOutcome<F>> {
    let (f, fs) = forward_parallel(potentials);
    let (b, bs) = backward_parallel(potentials);
    Ok(SmoothOutcome {
        marginals: marginals(&f, &b)?,
        forward_stats: fs,
        backward_stats: bs,
    })
}
