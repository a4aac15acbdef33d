//! Most-probable state sequences by max-product message passing.
//!
//! Everything here works on log weights in the max-plus semiring, so long
//! chains need no rescaling: weights add, alternatives take the maximum,
//! and an impossible transition is negative infinity.
//!
//! Three decoders produce the same answer by different routes:
//!
//! * [`viterbi_sequential`]: the textbook dynamic program with backpointers,
//!   `T - 1` dependent steps.
//! * [`map_sequential`] / [`map_parallel`]: max-plus forward and backward
//!   messages (by recursion or by scan), then an independent per-step
//!   argmax. This route fails loudly on ties, because independently chosen
//!   per-step maximisers need not assemble into one optimal path.
//! * [`viterbi_path_parallel`]: a single balanced reduction over elements
//!   that carry their maximising interior path alongside the weight matrix,
//!   splicing paths at the maximising midpoint on every combine. Exact even
//!   under ties, but path storage grows with the span, so it is guarded by
//!   a capacity cap.
//!
//! All decoders report `log_weight` by re-evaluating their path against the
//! potentials with one log per factor, so two decoders that agree on the
//! path agree on the weight to the bit.

use crate::error::{HmmError, Result};
use crate::matrix::Matrix;
use crate::model::{PotentialSequence, StateSequence};
use crate::scalar::{FloatScalar, MaxPlusWeight};
use crate::scan::{parallel_reduce, parallel_scan, ScanProblem, ScanStats};

/// Per-step maximiser gaps larger than this trigger [`HmmError::AmbiguousDecoding`].
pub const AMBIGUITY_GAP_TOLERANCE: f64 = 1e-6;

/// Two per-step scores within this distance of the step optimum count as tied.
pub const TIE_DETECTION_TOLERANCE: f64 = 1e-9;

/// Longest potential sequence [`viterbi_path_parallel`] accepts by default.
pub const DEFAULT_PATH_CAPACITY: usize = 1024;

// ---------------------------------------------------------------------------
// Scan elements
// ---------------------------------------------------------------------------

/// Scan element of the max-product pass: a matrix of log weights.
///
/// Entry `(i, k)` is the best log weight over interior assignments of the
/// chain segment the element spans, given endpoint states `i` and `k`.
/// Entries are never NaN or positive infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxProductElement<W: MaxPlusWeight = f64> {
    log_weights: Matrix<W>,
}

impl<W: MaxPlusWeight> MaxProductElement<W> {
    pub fn from_log_weights(log_weights: Matrix<W>) -> Self {
        debug_assert!(
            log_weights.entries().iter().all(|v| v.is_valid_log_weight()),
            "log weights must not be NaN or positive infinity"
        );
        MaxProductElement { log_weights }
    }

    pub fn log_weights(&self) -> &Matrix<W> {
        &self.log_weights
    }

    pub fn dim(&self) -> usize {
        self.log_weights.rows()
    }
}

/// Associative combination: max-plus matrix product, maximising over the
/// shared junction state.
pub fn combine_max<W: MaxPlusWeight>(
    a: &MaxProductElement<W>,
    b: &MaxProductElement<W>,
) -> Result<MaxProductElement<W>> {
    if a.dim() != b.dim() {
        return Err(HmmError::DimensionMismatch {
            context: "max-product combine operands",
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(MaxProductElement {
        log_weights: a.log_weights.max_plus_matmul(&b.log_weights),
    })
}

/// Max-product element that also carries, per endpoint pair, the maximising
/// interior state path of the segment it spans.
///
/// A fresh single-step element has empty interior paths; combining elements
/// spanning `s` and `u` steps yields interior paths of length `s + u - 1`,
/// the junction state included.
#[derive(Debug, Clone, PartialEq)]
pub struct PathElement<W: MaxPlusWeight = f64> {
    log_weights: Matrix<W>,
    /// Row-major `(i, k)` slots of interior paths, each `span - 1` long.
    paths: Vec<Vec<u32>>,
    span: usize,
}

impl<W: MaxPlusWeight> PathElement<W> {
    /// Wraps a single-step log-weight matrix; interior paths start empty.
    pub fn single_step(log_weights: Matrix<W>) -> Self {
        let d = log_weights.rows();
        debug_assert!(
            log_weights.entries().iter().all(|v| v.is_valid_log_weight()),
            "log weights must not be NaN or positive infinity"
        );
        PathElement {
            log_weights,
            paths: vec![Vec::new(); d * d],
            span: 1,
        }
    }

    pub fn log_weights(&self) -> &Matrix<W> {
        &self.log_weights
    }

    /// Interior path for endpoint states `(i, k)`.
    pub fn path(&self, i: usize, k: usize) -> &[u32] {
        &self.paths[i * self.dim() + k]
    }

    /// Number of chain steps the element spans.
    pub fn span(&self) -> usize {
        self.span
    }

    pub fn dim(&self) -> usize {
        self.log_weights.rows()
    }
}

/// Associative combination of path-carrying elements: max-plus product for
/// the weights, and for each endpoint pair the two operand paths spliced
/// around the maximising junction state. Junction ties resolve to the
/// smallest state index.
pub fn combine_path<W: MaxPlusWeight>(
    a: &PathElement<W>,
    b: &PathElement<W>,
) -> Result<PathElement<W>> {
    let d = a.dim();
    if d != b.dim() {
        return Err(HmmError::DimensionMismatch {
            context: "path combine operands",
            expected: d,
            actual: b.dim(),
        });
    }
    let (log_weights, junction) = a.log_weights.max_plus_matmul_with_argmax(&b.log_weights);
    let mut paths = Vec::with_capacity(d * d);
    for i in 0..d {
        for k in 0..d {
            let m = junction.get(i, k) as usize;
            let left = a.path(i, m);
            let right = b.path(m, k);
            let mut spliced = Vec::with_capacity(left.len() + 1 + right.len());
            spliced.extend_from_slice(left);
            spliced.push(m as u32);
            spliced.extend_from_slice(right);
            paths.push(spliced);
        }
    }
    Ok(PathElement {
        log_weights,
        paths,
        span: a.span + b.span,
    })
}

// ---------------------------------------------------------------------------
// Decoded result
// ---------------------------------------------------------------------------

/// A decoded most-probable state sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct MapResult<F: FloatScalar = f64> {
    /// The decoded path, one state per step.
    pub path: StateSequence,
    /// Log weight of `path` under the potentials, re-evaluated factor by
    /// factor so that identical paths give bitwise identical weights.
    pub log_weight: F,
    /// Combined forward plus backward score per step and state; only the
    /// per-step argmax route produces these.
    pub per_step_scores: Option<Vec<Vec<F>>>,
}

// ---------------------------------------------------------------------------
// Sequential decoding
// ---------------------------------------------------------------------------

/// Classic dynamic-programming decoder with backpointers.
///
/// Ties in every argmax resolve to the smallest state index. If at some
/// step every state has log weight negative infinity, the observations are
/// impossible under the model and that step is reported.
pub fn viterbi_sequential<F: FloatScalar + MaxPlusWeight>(
    potentials: &PotentialSequence<F>,
) -> Result<(MapResult<F>, ScanStats)> {
    let d = potentials.num_states();
    let t = potentials.len();
    let mut score: Vec<F> = potentials.first().iter().map(|&v| v.ln()).collect();
    if score.iter().all(|v| !v.is_reachable()) {
        return Err(HmmError::ImpossibleObservations { step: 0 });
    }
    let mut backptr: Vec<Vec<u32>> = Vec::with_capacity(t - 1);
    for (step, m) in potentials.pairwise().iter().enumerate() {
        let log_m = m.map(|v| v.ln());
        let mut next = vec![F::neg_infinity(); d];
        let mut from = vec![0u32; d];
        for i in 0..d {
            if !score[i].is_reachable() {
                continue;
            }
            for j in 0..d {
                let cand = score[i] + log_m.get(i, j);
                if cand > next[j] {
                    next[j] = cand;
                    from[j] = i as u32;
                }
            }
        }
        if next.iter().all(|v| !v.is_reachable()) {
            return Err(HmmError::ImpossibleObservations { step: step + 1 });
        }
        score = next;
        backptr.push(from);
    }

    let mut best_state = 0usize;
    for (j, &v) in score.iter().enumerate() {
        if v > score[best_state] {
            best_state = j;
        }
    }
    let mut path = vec![0usize; t];
    path[t - 1] = best_state;
    for step in (0..t - 1).rev() {
        path[step] = backptr[step][path[step + 1]] as usize;
    }
    let log_weight = potentials.path_log_weight(&path)?;
    let steps = (t - 1) as u64;
    Ok((
        MapResult {
            path: StateSequence(path),
            log_weight,
            per_step_scores: None,
        },
        ScanStats {
            combine_invocations: steps,
            parallel_depth: steps as u32,
        },
    ))
}

// ---------------------------------------------------------------------------
// Max-plus message passes
// ---------------------------------------------------------------------------

/// Forward max messages by recursion: output `k` holds, per state, the best
/// log weight over all length-`k + 1` prefixes ending in that state.
pub fn max_forward_sequential<F: FloatScalar + MaxPlusWeight>(
    potentials: &PotentialSequence<F>,
) -> (Vec<Vec<F>>, ScanStats) {
    let d = potentials.num_states();
    let mut out: Vec<Vec<F>> = Vec::with_capacity(potentials.len());
    out.push(potentials.first().iter().map(|&v| v.ln()).collect());
    for m in potentials.pairwise() {
        let prev = out.last().unwrap();
        let mut next = vec![F::neg_infinity(); d];
        for i in 0..d {
            if !prev[i].is_reachable() {
                continue;
            }
            for (j, slot) in next.iter_mut().enumerate() {
                let cand = prev[i] + m.get(i, j).ln();
                if cand > *slot {
                    *slot = cand;
                }
            }
        }
        out.push(next);
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

/// Backward max messages by recursion: output `k` holds, per state, the
/// best log weight over all continuations after step `k + 1`. The final
/// output is all zeros.
pub fn max_backward_sequential<F: FloatScalar + MaxPlusWeight>(
    potentials: &PotentialSequence<F>,
) -> (Vec<Vec<F>>, ScanStats) {
    let d = potentials.num_states();
    let mut out: Vec<Vec<F>> = vec![vec![F::zero(); d]];
    for m in potentials.pairwise().iter().rev() {
        let next = out.last().unwrap();
        let mut cur = vec![F::neg_infinity(); d];
        for (i, slot) in cur.iter_mut().enumerate() {
            for j in 0..d {
                if !next[j].is_reachable() {
                    continue;
                }
                let cand = m.get(i, j).ln() + next[j];
                if cand > *slot {
                    *slot = cand;
                }
            }
        }
        out.push(cur);
    }
    out.reverse();
    let steps = (potentials.len() - 1) as u64;
    (
        out,
        ScanStats {
            combine_invocations: steps,
            parallel_depth: steps as u32,
        },
    )
}

/// Scan element list for the forward max pass.
pub fn max_forward_elements<F: FloatScalar + MaxPlusWeight>(
    potentials: &PotentialSequence<F>,
) -> Vec<MaxProductElement<F>> {
    let d = potentials.num_states();
    let first = potentials.first();
    let mut elems = Vec::with_capacity(potentials.len());
    elems.push(MaxProductElement::from_log_weights(Matrix::from_fn(
        d,
        d,
        |_, j| first[j].ln(),
    )));
    elems.extend(
        potentials
            .pairwise()
            .iter()
            .map(|m| MaxProductElement::from_log_weights(m.map(|v| v.ln()))),
    );
    elems
}

/// Scan element list for the backward max pass.
pub fn max_backward_elements<F: FloatScalar + MaxPlusWeight>(
    potentials: &PotentialSequence<F>,
) -> Vec<MaxProductElement<F>> {
    let d = potentials.num_states();
    let mut elems = Vec::with_capacity(potentials.len());
    elems.extend(
        potentials
            .pairwise()
            .iter()
            .map(|m| MaxProductElement::from_log_weights(m.map(|v| v.ln()))),
    );
    elems.push(MaxProductElement::from_log_weights(Matrix::filled(
        d,
        d,
        F::log_one(),
    )));
    elems
}

fn combine_max_total<W: MaxPlusWeight>(
    a: &MaxProductElement<W>,
    b: &MaxProductElement<W>,
) -> MaxProductElement<W> {
    combine_max(a, b).expect("potential matrices share the model dimension")
}

/// Forward max messages by parallel scan; matches [`max_forward_sequential`].
pub fn max_forward_parallel<F: FloatScalar + MaxPlusWeight>(
    potentials: &PotentialSequence<F>,
) -> (Vec<Vec<F>>, ScanStats) {
    let problem = ScanProblem::forward(max_forward_elements(potentials), combine_max_total)
        .expect("potential sequence is nonempty");
    let (prefixes, stats) = parallel_scan(&problem);
    let out = prefixes
        .into_iter()
        .map(|e| e.log_weights().row(0).to_vec())
        .collect();
    (out, stats)
}

/// Backward max messages by parallel reversed scan; matches
/// [`max_backward_sequential`].
pub fn max_backward_parallel<F: FloatScalar + MaxPlusWeight>(
    potentials: &PotentialSequence<F>,
) -> (Vec<Vec<F>>, ScanStats) {
    let problem = ScanProblem::reversed(max_backward_elements(potentials), combine_max_total)
        .expect("potential sequence is nonempty");
    let (suffixes, stats) = parallel_scan(&problem);
    let out = suffixes.into_iter().map(|e| e.log_weights().col(0)).collect();
    (out, stats)
}

// ---------------------------------------------------------------------------
// Per-step argmax decoding
// ---------------------------------------------------------------------------

/// Decodes a path by maximising `forward[k] + backward[k]` independently at
/// every step.
///
/// When the maximiser is unique everywhere, each step recovers the state
/// the single optimal path visits there. When some step is tied, the
/// independently chosen states may splice segments of different optimal
/// paths into a non-path; this is detected by re-evaluating the assembled
/// path, and reported as [`HmmError::AmbiguousDecoding`] with the tied
/// steps, rather than returning a silently sub-optimal path.
pub fn map_from_potentials<F: FloatScalar + MaxPlusWeight>(
    potentials: &PotentialSequence<F>,
    forward: &[Vec<F>],
    backward: &[Vec<F>],
) -> Result<MapResult<F>> {
    let t = potentials.len();
    let d = potentials.num_states();
    if forward.len() != t || backward.len() != t {
        return Err(HmmError::DimensionMismatch {
            context: "message count vs potential length",
            expected: t,
            actual: if forward.len() != t {
                forward.len()
            } else {
                backward.len()
            },
        });
    }
    let mut path = vec![0usize; t];
    let mut scores = Vec::with_capacity(t);
    let mut optimum = F::neg_infinity();
    let mut tied_steps = Vec::new();
    let tie_tol = F::from_f64_param(TIE_DETECTION_TOLERANCE);
    for k in 0..t {
        if forward[k].len() != d || backward[k].len() != d {
            return Err(HmmError::DimensionMismatch {
                context: "message dimension vs state count",
                expected: d,
                actual: forward[k].len().min(backward[k].len()),
            });
        }
        let step_scores: Vec<F> = (0..d).map(|x| forward[k][x].plus(backward[k][x])).collect();
        let mut best = 0usize;
        for (x, &s) in step_scores.iter().enumerate() {
            if s > step_scores[best] {
                best = x;
            }
        }
        let step_max = step_scores[best];
        if step_max > optimum {
            optimum = step_max;
        }
        let near_best = step_scores
            .iter()
            .filter(|&&s| s.is_reachable() && step_max - s <= tie_tol)
            .count();
        if near_best > 1 {
            tied_steps.push(k);
        }
        path[k] = best;
        scores.push(step_scores);
    }
    if !optimum.is_reachable() {
        let step = forward
            .iter()
            .position(|msg| msg.iter().all(|v| !v.is_reachable()))
            .unwrap_or(0);
        return Err(HmmError::ImpossibleObservations { step });
    }
    let log_weight = potentials.path_log_weight(&path)?;
    let gap = optimum - log_weight;
    if gap > F::from_f64_param(AMBIGUITY_GAP_TOLERANCE) || !log_weight.is_reachable() {
        return Err(HmmError::AmbiguousDecoding {
            gap: gap.to_f64().unwrap_or(f64::INFINITY),
            tied_steps,
        });
    }
    Ok(MapResult {
        path: StateSequence(path),
        log_weight,
        per_step_scores: Some(scores),
    })
}

/// Decoded result plus the statistics of both message passes.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome<F: FloatScalar = f64> {
    pub result: MapResult<F>,
    pub forward_stats: ScanStats,
    pub backward_stats: ScanStats,
}

/// Sequential max passes plus per-step argmax decoding.
pub fn map_sequential<F: FloatScalar + MaxPlusWeight>(
    potentials: &PotentialSequence<F>,
) -> Result<DecodeOutcome<F>> {
    let (f, fs) = max_forward_sequential(potentials);
    let (b, bs) = max_backward_sequential(potentials);
    Ok(DecodeOutcome {
        result: map_from_potentials(potentials, &f, &b)?,
        forward_stats: fs,
        backward_stats: bs,
    })
}

/// Parallel max passes plus per-step argmax decoding.
pub fn map_parallel<F: FloatScalar + MaxPlusWeight>(
    potentials: &PotentialSequence<F>,
) -> Result<DecodeOutcome<F>> {
    let (f, fs) = max_forward_parallel(potentials);
    let (b, bs) = max_backward_parallel(potentials);
    Ok(DecodeOutcome {
        result: map_from_potentials(potentials, &f, &b)?,
        forward_stats: fs,
        backward_stats: bs,
    })
}

// ---------------------------------------------------------------------------
// Path-carrying reduction
// ---------------------------------------------------------------------------

/// Scan element list for the path-carrying reduction: leading boundary,
/// every pairwise step, trailing boundary.
pub fn path_elements<F: FloatScalar + MaxPlusWeight>(
    potentials: &PotentialSequence<F>,
) -> Vec<PathElement<F>> {
    let d = potentials.num_states();
    let first = potentials.first();
    let mut elems = Vec::with_capacity(potentials.len() + 1);
    elems.push(PathElement::single_step(Matrix::from_fn(d, d, |_, j| {
        first[j].ln()
    })));
    elems.extend(
        potentials
            .pairwise()
            .iter()
            .map(|m| PathElement::single_step(m.map(|v| v.ln()))),
    );
    elems.push(PathElement::single_step(Matrix::filled(d, d, F::log_one())));
    elems
}

/// Decodes with the default capacity cap; see
/// [`viterbi_path_parallel_with_capacity`].
pub fn viterbi_path_parallel<F: FloatScalar + MaxPlusWeight>(
    potentials: &PotentialSequence<F>,
) -> Result<(MapResult<F>, ScanStats)> {
    viterbi_path_parallel_with_capacity(potentials, DEFAULT_PATH_CAPACITY)
}

/// Single balanced reduction over path-carrying elements.
///
/// Exact under ties (every junction argmax picks one consistent optimal
/// path), at the cost of storing paths inside elements: memory per element
/// grows linearly with its span, so sequences longer than the cap are
/// refused up front.
pub fn viterbi_path_parallel_with_capacity<F: FloatScalar + MaxPlusWeight>(
    potentials: &PotentialSequence<F>,
    capacity: usize,
) -> Result<(MapResult<F>, ScanStats)> {
    let t = potentials.len();
    if t > capacity {
        return Err(HmmError::PathCapacityExceeded {
            len: t,
            cap: capacity,
        });
    }
    let elems = path_elements(potentials);
    let (total, stats) = parallel_reduce(&elems, |a, b| {
        combine_path(a, b).expect("potential matrices share the model dimension")
    })?;
    debug_assert_eq!(total.span(), t + 1);
    let best = total.log_weights().get(0, 0);
    if !best.is_reachable() {
        return Err(HmmError::ImpossibleObservations { step: 0 });
    }
    let path: Vec<usize> = total.path(0, 0).iter().map(|&s| s as usize).collect();
    debug_assert_eq!(path.len(), t);
    let log_weight = potentials.path_log_weight(&path)?;
    Ok((
        MapResult {
            path: StateSequence(path),
            log_weight,
            per_step_scores: None,
        },
        stats,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_potentials, HmmModel, ObservationSequence};
    use crate::oracle::brute_force_map;

    fn test_model() -> HmmModel {
        HmmModel::new(
            vec![0.6, 0.4],
            Matrix::from_rows(&[vec![0.7, 0.3], vec![0.4, 0.6]]),
            Matrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]]),
        )
        .unwrap()
    }

    fn test_potentials(symbols: Vec<usize>) -> PotentialSequence {
        let obs = ObservationSequence::new(symbols).unwrap();
        build_potentials(&test_model(), &obs).unwrap()
    }

    #[test]
    fn combine_max_matches_hand_product() {
        let a = MaxProductElement::from_log_weights(Matrix::from_rows(&[
            vec![0i64, 1],
            vec![2, 3],
        ]));
        let b = MaxProductElement::from_log_weights(Matrix::from_rows(&[
            vec![4i64, 5],
            vec![6, 7],
        ]));
        let c = combine_max(&a, &b).unwrap();
        assert_eq!(
            c.log_weights(),
            &Matrix::from_rows(&[vec![7i64, 8], vec![9, 10]])
        );
    }

    #[test]
    fn tropical_identity_is_neutral() {
        // Zero diagonal, annihilator off-diagonal.
        let identity = MaxProductElement::from_log_weights(Matrix::from_fn(2, 2, |i, j| {
            if i == j {
                0i64
            } else {
                i64::MIN
            }
        }));
        let a = MaxProductElement::from_log_weights(Matrix::from_rows(&[
            vec![3i64, -7],
            vec![0, 11],
        ]));
        assert_eq!(combine_max(&a, &identity).unwrap(), a);
        assert_eq!(combine_max(&identity, &a).unwrap(), a);
    }

    #[test]
    fn combine_max_rejects_dimension_mismatch() {
        let a = MaxProductElement::from_log_weights(Matrix::filled(2, 2, 0i64));
        let b = MaxProductElement::from_log_weights(Matrix::filled(3, 3, 0i64));
        assert!(matches!(
            combine_max(&a, &b),
            Err(HmmError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn path_combine_splices_at_maximising_junction() {
        // Segment A prefers junction 1 for endpoints (0, .), segment B is flat.
        let a = PathElement::single_step(Matrix::from_rows(&[vec![0i64, 5], vec![1, 1]]));
        let b = PathElement::single_step(Matrix::from_rows(&[vec![2i64, 2], vec![2, 2]]));
        let c = combine_path(&a, &b).unwrap();
        assert_eq!(c.span(), 2);
        assert_eq!(c.log_weights().get(0, 0), 7);
        assert_eq!(c.path(0, 0), &[1]);
    }

    #[test]
    fn path_combine_breaks_junction_ties_low() {
        // Both junctions give total 3 for endpoints (0, 0).
        let a = PathElement::single_step(Matrix::from_rows(&[vec![1i64, 2], vec![0, 0]]));
        let b = PathElement::single_step(Matrix::from_rows(&[vec![2i64, 0], vec![1, 0]]));
        let c = combine_path(&a, &b).unwrap();
        assert_eq!(c.log_weights().get(0, 0), 3);
        assert_eq!(c.path(0, 0), &[0]);
    }

    #[test]
    fn viterbi_matches_brute_force() {
        let model = test_model();
        for symbols in [vec![0], vec![0, 1], vec![0, 1, 1, 0, 0], vec![1, 1, 0, 1, 0, 1]] {
            let obs = ObservationSequence::new(symbols).unwrap();
            let p = build_potentials(&model, &obs).unwrap();
            let (oracle_path, oracle_w) = brute_force_map(&model, &obs).unwrap();
            let (got, stats) = viterbi_sequential(&p).unwrap();
            assert_eq!(got.path, oracle_path);
            assert!((got.log_weight - oracle_w).abs() <= 1e-12);
            assert_eq!(stats.combine_invocations, (p.len() - 1) as u64);
        }
    }

    #[test]
    fn all_decoders_agree_on_tie_free_input() {
        let p = test_potentials(vec![0, 1, 1, 0, 0, 1, 0]);
        let (viterbi, _) = viterbi_sequential(&p).unwrap();
        let seq = map_sequential(&p).unwrap().result;
        let par = map_parallel(&p).unwrap().result;
        let (reduced, _) = viterbi_path_parallel(&p).unwrap();
        assert_eq!(viterbi.path, seq.path);
        assert_eq!(viterbi.path, par.path);
        assert_eq!(viterbi.path, reduced.path);
        // Identical paths are re-evaluated identically, to the bit.
        assert_eq!(viterbi.log_weight.to_bits(), seq.log_weight.to_bits());
        assert_eq!(viterbi.log_weight.to_bits(), par.log_weight.to_bits());
        assert_eq!(viterbi.log_weight.to_bits(), reduced.log_weight.to_bits());
    }

    #[test]
    fn parallel_max_passes_match_sequential() {
        let p = test_potentials(vec![1, 0, 1, 1, 0, 0, 1, 0, 1]);
        let (fs, _) = max_forward_sequential(&p);
        let (fp, _) = max_forward_parallel(&p);
        let (bs, _) = max_backward_sequential(&p);
        let (bp, _) = max_backward_parallel(&p);
        for k in 0..p.len() {
            for x in 0..p.num_states() {
                assert!((fs[k][x] - fp[k][x]).abs() <= 1e-12, "forward {k} {x}");
                assert!((bs[k][x] - bp[k][x]).abs() <= 1e-12, "backward {k} {x}");
            }
        }
    }

    #[test]
    fn per_step_scores_are_constant_at_the_optimum() {
        let p = test_potentials(vec![0, 1, 0, 0, 1]);
        let outcome = map_sequential(&p).unwrap();
        let scores = outcome.result.per_step_scores.as_ref().unwrap();
        let w = outcome.result.log_weight;
        for (k, step) in scores.iter().enumerate() {
            let best = step.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!((best - w).abs() <= 1e-12, "step {k}");
        }
    }

    #[test]
    fn tied_instance_is_reported_not_mangled() {
        // Two optimal paths (0,1) and (1,0); the per-step argmaxes assemble
        // the impossible path (0,0).
        let p = PotentialSequence::new(
            vec![1.0, 1.0],
            vec![Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])],
        )
        .unwrap();
        match map_sequential(&p) {
            Err(HmmError::AmbiguousDecoding { gap, tied_steps }) => {
                assert!(gap > AMBIGUITY_GAP_TOLERANCE);
                assert_eq!(tied_steps, vec![0, 1]);
            }
            other => panic!("expected ambiguity error, got {other:?}"),
        }
        // The path-carrying reduction handles the same instance exactly.
        let (reduced, _) = viterbi_path_parallel(&p).unwrap();
        assert_eq!(reduced.log_weight, 0.0);
        let (viterbi, _) = viterbi_sequential(&p).unwrap();
        assert_eq!(viterbi.log_weight, 0.0);
    }

    #[test]
    fn impossible_observations_error_names_first_dead_step() {
        let p = PotentialSequence::new(
            vec![1.0, 0.0],
            vec![
                Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]),
                Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]),
            ],
        )
        .unwrap();
        match viterbi_sequential(&p) {
            Err(HmmError::ImpossibleObservations { step }) => assert_eq!(step, 1),
            other => panic!("expected impossibility error, got {other:?}"),
        }
        assert!(matches!(
            map_sequential(&p),
            Err(HmmError::ImpossibleObservations { .. })
        ));
        assert!(matches!(
            viterbi_path_parallel(&p),
            Err(HmmError::ImpossibleObservations { .. })
        ));
    }

    #[test]
    fn path_reduction_respects_capacity() {
        let p = test_potentials(vec![0; 9]);
        assert!(matches!(
            viterbi_path_parallel_with_capacity(&p, 8),
            Err(HmmError::PathCapacityExceeded { len: 9, cap: 8 })
        ));
        assert!(viterbi_path_parallel_with_capacity(&p, 9).is_ok());
    }

    #[test]
    fn path_reduction_handles_single_step() {
        let p = test_potentials(vec![1]);
        let (r, stats) = viterbi_path_parallel(&p).unwrap();
        assert_eq!(r.path.states(), &[1]);
        // Two boundary elements, one combine.
        assert_eq!(stats.combine_invocations, 1);
    }

    #[test]
    fn integer_elements_are_exactly_associative_on_samples() {
        let mats = [
            Matrix::from_rows(&[vec![3i64, -1], vec![i64::MIN, 7]]),
            Matrix::from_rows(&[vec![0i64, 2], vec![5, -4]]),
            Matrix::from_rows(&[vec![-9i64, 1], vec![2, i64::MIN]]),
        ];
        let [a, b, c] = mats.map(MaxProductElement::from_log_weights);
        let left = combine_max(&combine_max(&a, &b).unwrap(), &c).unwrap();
        let right = combine_max(&a, &combine_max(&b, &c).unwrap()).unwrap();
        assert_eq!(left, right);
    }
}
