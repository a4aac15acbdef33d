//! Generic associative-scan engine.
//!
//! Computes inclusive prefix combinations of a nonempty element sequence
//! under a caller-supplied associative operator, in either direction. Two
//! executors share one contract: [`sequential_scan`] applies the operator in
//! strict order (left to right, or right to left for reversed scans), while
//! [`parallel_scan`] uses a balanced pairing tree whose shape depends only on
//! the input length, so its results and statistics are identical for every
//! worker count. There is no identity element requirement and no padding:
//! odd levels carry their leftover element through untouched.
//!
//! The tree works in rounds on a sequence of length `n`: adjacent elements
//! are paired into `floor(n/2)` combined values, the scan recurses on those
//! pairs, and the pair prefixes are then stitched back over the original
//! positions (even positions past the first need one extra combine). Each
//! round costs `n - 1` invocations and two levels of dependency depth, which
//! yields the documented bounds of at most `2 * len` invocations and
//! `2 * ceil(log2(len)) + 1` depth.
//!
//! A reversed scan is a forward scan in disguise: reverse the elements, flip
//! the operator's arguments, scan, and reverse the outputs.

use std::fmt::Debug;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{HmmError, Result};

/// Orientation of the prefix combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanDirection {
    /// Output `k` combines elements `0..=k` left to right.
    Forward,
    /// Output `k` combines elements `k..len` left to right.
    Reversed,
}

/// Execution counters reported by every scan run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScanStats {
    /// Number of times the combine operator ran.
    pub combine_invocations: u64,
    /// Length of the longest chain of dependent combine applications.
    pub parallel_depth: u32,
}

/// Upper bound on combine invocations of [`parallel_scan`] for a given length.
pub fn parallel_invocation_bound(len: usize) -> u64 {
    2 * len as u64
}

/// Upper bound on dependency depth of [`parallel_scan`] for a given length.
pub fn parallel_depth_bound(len: usize) -> u32 {
    2 * ceil_log2(len) + 1
}

/// Smallest `k` with `2^k >= n`; zero for `n <= 1`.
pub fn ceil_log2(n: usize) -> u32 {
    (n.max(1) as u64).next_power_of_two().trailing_zeros()
}

/// An element sequence plus the associative operator to scan it with.
pub struct ScanProblem<T, C> {
    elements: Vec<T>,
    combine: C,
    direction: ScanDirection,
}

impl<T, C> ScanProblem<T, C>
where
    T: Clone + PartialEq + Debug + Send + Sync,
    C: Fn(&T, &T) -> T + Sync,
{
    /// Wraps elements and operator; rejects an empty element list, since an
    /// inclusive scan of nothing has no meaningful output.
    pub fn new(elements: Vec<T>, combine: C, direction: ScanDirection) -> Result<Self> {
        if elements.is_empty() {
            return Err(HmmError::EmptyInput {
                context: "scan elements",
            });
        }
        Ok(ScanProblem {
            elements,
            combine,
            direction,
        })
    }

    pub fn forward(elements: Vec<T>, combine: C) -> Result<Self> {
        Self::new(elements, combine, ScanDirection::Forward)
    }

    pub fn reversed(elements: Vec<T>, combine: C) -> Result<Self> {
        Self::new(elements, combine, ScanDirection::Reversed)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn direction(&self) -> ScanDirection {
        self.direction
    }

    pub fn elements(&self) -> &[T] {
        &self.elements
    }

    /// Re-evaluates one combine and insists on identical output. The scan
    /// contract requires a pure operator; this catches stateful closures
    /// early in debug builds.
    fn debug_check_pure(&self) {
        #[cfg(debug_assertions)]
        if self.elements.len() >= 2 {
            let once = (self.combine)(&self.elements[0], &self.elements[1]);
            let twice = (self.combine)(&self.elements[0], &self.elements[1]);
            assert_eq!(
                once, twice,
                "scan combine operator must be referentially transparent"
            );
        }
    }
}

/// Inclusive scan applying the operator one element at a time.
///
/// Forward scans run strictly left to right, reversed scans strictly right
/// to left; either way the operator sees `(earlier-in-time, later-in-time)`
/// argument order. Costs exactly `len - 1` invocations in a chain of the
/// same depth.
pub fn sequential_scan<T, C>(problem: &ScanProblem<T, C>) -> (Vec<T>, ScanStats)
where
    T: Clone + PartialEq + Debug + Send + Sync,
    C: Fn(&T, &T) -> T + Sync,
{
    problem.debug_check_pure();
    let n = problem.elements.len();
    let mut out: Vec<T> = Vec::with_capacity(n);
    match problem.direction {
        ScanDirection::Forward => {
            out.push(problem.elements[0].clone());
            for e in &problem.elements[1..] {
                let next = (problem.combine)(out.last().unwrap(), e);
                out.push(next);
            }
        }
        ScanDirection::Reversed => {
            out.push(problem.elements[n - 1].clone());
            for e in problem.elements[..n - 1].iter().rev() {
                let next = (problem.combine)(e, out.last().unwrap());
                out.push(next);
            }
            out.reverse();
        }
    }
    let stats = ScanStats {
        combine_invocations: (n - 1) as u64,
        parallel_depth: (n - 1) as u32,
    };
    (out, stats)
}

/// Inclusive scan over the balanced pairing tree.
///
/// Produces exactly the values of [`sequential_scan`] when the operator is
/// associative, using at most [`parallel_invocation_bound`] invocations in
/// at most [`parallel_depth_bound`] dependent levels. The tree shape, and
/// therefore every output value and both statistics, depends only on the
/// element count, never on the number of worker threads.
pub fn parallel_scan<T, C>(problem: &ScanProblem<T, C>) -> (Vec<T>, ScanStats)
where
    T: Clone + PartialEq + Debug + Send + Sync,
    C: Fn(&T, &T) -> T + Sync,
{
    problem.debug_check_pure();
    let counter = AtomicU64::new(0);
    let (out, depth) = match problem.direction {
        ScanDirection::Forward => {
            let counted = |a: &T, b: &T| {
                counter.fetch_add(1, Ordering::Relaxed);
                (problem.combine)(a, b)
            };
            tree_scan(&problem.elements, &counted)
        }
        ScanDirection::Reversed => {
            let flipped = |a: &T, b: &T| {
                counter.fetch_add(1, Ordering::Relaxed);
                (problem.combine)(b, a)
            };
            let reversed: Vec<T> = problem.elements.iter().rev().cloned().collect();
            let (mut out, depth) = tree_scan(&reversed, &flipped);
            out.reverse();
            (out, depth)
        }
    };
    let stats = ScanStats {
        combine_invocations: counter.into_inner(),
        parallel_depth: depth,
    };
    (out, stats)
}

/// Levels smaller than this run as plain loops; the tree shape is unchanged,
/// only the scheduling differs, so results stay identical.
const PARALLEL_LEVEL_MIN: usize = 512;

/// Minimum slice length rayon hands to one worker within a level.
const PARALLEL_CHUNK: usize = 256;

fn level_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    if n < PARALLEL_LEVEL_MIN {
        (0..n).map(f).collect()
    } else {
        (0..n)
            .into_par_iter()
            .with_min_len(PARALLEL_CHUNK)
            .map(f)
            .collect()
    }
}

/// One pairing round plus recursion plus one stitching round.
fn tree_scan<T, C>(input: &[T], combine: &C) -> (Vec<T>, u32)
where
    T: Clone + Send + Sync,
    C: Fn(&T, &T) -> T + Sync,
{
    let n = input.len();
    if n == 1 {
        return (vec![input[0].clone()], 0);
    }

    // Pair adjacent elements; an odd tail element waits for the stitch round.
    let pairs = level_map(n / 2, |i| combine(&input[2 * i], &input[2 * i + 1]));
    let (inner, inner_depth) = tree_scan(&pairs, combine);

    // inner[i] is the prefix through position 2*i + 1. Odd positions copy it;
    // even positions past the first extend the preceding pair prefix by one.
    let out = level_map(n, |j| {
        if j == 0 {
            input[0].clone()
        } else if j % 2 == 1 {
            inner[j / 2].clone()
        } else {
            combine(&inner[j / 2 - 1], &input[j])
        }
    });

    let mut depth = 1 + inner_depth;
    if n >= 3 {
        depth += 1;
    }
    (out, depth)
}

/// Single combined value of all elements via a balanced reduction tree.
///
/// The split point of every node is the slice midpoint, so the grouping is a
/// pure function of the length: results are identical for every worker
/// count. Costs exactly `len - 1` invocations at depth `ceil(log2(len))`.
pub fn parallel_reduce<T, C>(elements: &[T], combine: C) -> Result<(T, ScanStats)>
where
    T: Clone + Send + Sync,
    C: Fn(&T, &T) -> T + Sync,
{
    if elements.is_empty() {
        return Err(HmmError::EmptyInput {
            context: "reduce elements",
        });
    }
    let counter = AtomicU64::new(0);
    let counted = |a: &T, b: &T| {
        counter.fetch_add(1, Ordering::Relaxed);
        combine(a, b)
    };
    let value = reduce_tree(elements, &counted);
    let stats = ScanStats {
        combine_invocations: counter.into_inner(),
        parallel_depth: ceil_log2(elements.len()),
    };
    Ok((value, stats))
}

fn reduce_tree<T, C>(slice: &[T], combine: &C) -> T
where
    T: Clone + Send + Sync,
    C: Fn(&T, &T) -> T + Sync,
{
    match slice.len() {
        1 => slice[0].clone(),
        2 => combine(&slice[0], &slice[1]),
        n => {
            let (left, right) = slice.split_at(n / 2);
            let (lv, rv) = if n >= PARALLEL_LEVEL_MIN {
                rayon::join(|| reduce_tree(left, combine), || reduce_tree(right, combine))
            } else {
                (reduce_tree(left, combine), reduce_tree(right, combine))
            };
            combine(&lv, &rv)
        }
    }
}
