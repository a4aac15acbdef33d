//! Frozen reference values, generated once by the enumeration oracles and
//! pinned here as literals. These tests protect two things: the oracles
//! themselves against silent regressions, and the fast pipelines against
//! drift from the values the oracles produced at freeze time.

use hmm_parscan::*;

/// Largest drift tolerated between an oracle and its frozen output.
const FROZEN_TOL: f64 = 1e-13;
/// Pipeline-versus-oracle bar for marginals.
const MARGINAL_TOL: f64 = 1e-10;
/// Pipeline-versus-oracle bar for MAP log weights.
const MAP_TOL: f64 = 1e-9;

fn two_state_model() -> HmmModel {
    HmmModel::new(
        vec![0.6, 0.4],
        Matrix::from_rows(&[vec![0.7, 0.3], vec![0.4, 0.6]]),
        Matrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]]),
    )
    .unwrap()
}

/// Two-state model, observations [0, 1, 1, 0]: smoothing marginals from
/// full enumeration.
const TWO_STATE_MARGINALS: [[f64; 2]; 4] = [
    [7.91589989509965508e-1, 2.08410010490034492e-1],
    [1.33942754383335860e-1, 8.66057245616664084e-1],
    [1.32216394425295980e-1, 8.67783605574704020e-1],
    [7.71557020830211382e-1, 2.28442979169788701e-1],
];
const TWO_STATE_MAP_PATH: [usize; 4] = [0, 1, 1, 0];
const TWO_STATE_MAP_LOG_WEIGHT: f64 = -3.79892291767614410;
const TWO_STATE_LOG_EVIDENCE: f64 = -2.99478272451840244;

#[test]
fn two_state_oracle_reproduces_frozen_values() {
    let model = two_state_model();
    let obs = ObservationSequence::new(vec![0, 1, 1, 0]).unwrap();
    let marg = brute_force_marginals(&model, &obs).unwrap();
    for (k, row) in TWO_STATE_MARGINALS.iter().enumerate() {
        for (x, &expected) in row.iter().enumerate() {
            assert!(
                (marg[k][x] - expected).abs() <= FROZEN_TOL,
                "marginal k={k} x={x}: {} vs frozen {expected}",
                marg[k][x]
            );
        }
    }
    let (path, w) = brute_force_map(&model, &obs).unwrap();
    assert_eq!(path.states(), &TWO_STATE_MAP_PATH);
    assert!((w - TWO_STATE_MAP_LOG_WEIGHT).abs() <= FROZEN_TOL);
    let lz = brute_force_log_evidence(&model, &obs).unwrap();
    assert!((lz - TWO_STATE_LOG_EVIDENCE).abs() <= FROZEN_TOL);
}

#[test]
fn two_state_pipelines_match_frozen_marginals() {
    let model = two_state_model();
    let obs = ObservationSequence::new(vec![0, 1, 1, 0]).unwrap();
    let p = build_potentials(&model, &obs).unwrap();
    for outcome in [smooth_sequential(&p).unwrap(), smooth_parallel(&p).unwrap()] {
        for (k, row) in TWO_STATE_MARGINALS.iter().enumerate() {
            for (x, &expected) in row.iter().enumerate() {
                assert!(
                    (outcome.marginals.step(k)[x] - expected).abs() <= MARGINAL_TOL,
                    "pipeline marginal k={k} x={x}"
                );
            }
        }
        assert!((outcome.marginals.log_evidence() - TWO_STATE_LOG_EVIDENCE).abs() <= MARGINAL_TOL);
    }
}

#[test]
fn two_state_decoders_match_frozen_map() {
    let model = two_state_model();
    let obs = ObservationSequence::new(vec![0, 1, 1, 0]).unwrap();
    let p = build_potentials(&model, &obs).unwrap();
    let (viterbi, _) = viterbi_sequential(&p).unwrap();
    let argmax = map_parallel(&p).unwrap().result;
    let (reduced, _) = viterbi_path_parallel(&p).unwrap();
    for r in [&viterbi, &argmax, &reduced] {
        assert_eq!(r.path.states(), &TWO_STATE_MAP_PATH);
        assert!((r.log_weight - TWO_STATE_MAP_LOG_WEIGHT).abs() <= MAP_TOL);
    }
}

/// Bursty-channel defaults, length 8, seed 1: the simulated observations
/// and the oracle answers for them.
const GE_T8_SEED: u64 = 1;
const GE_T8_STATES: [usize; 8] = [1, 1, 1, 1, 1, 1, 1, 1];
const GE_T8_OBS: [usize; 8] = [0, 0, 0, 0, 0, 0, 0, 0];
const GE_T8_MAP_PATH: [usize; 8] = [0, 0, 0, 0, 0, 0, 0, 0];
const GE_T8_MAP_LOG_WEIGHT: f64 = -2.03896456105371549;
const GE_T8_LOG_EVIDENCE: f64 = -1.38788045518355840;
const GE_T8_MARGINALS_K0: [f64; 4] = [
    6.13444530228872464e-1,
    3.83743149303346742e-1,
    3.30169976547685438e-4,
    2.48215049123308700e-3,
];
const GE_T8_MARGINALS_K4: [f64; 4] = [
    7.41461180141175569e-1,
    2.58417262439029682e-1,
    2.13603281489789392e-5,
    1.00197091645795394e-4,
];
const GE_T8_MARGINALS_K7: [f64; 4] = [
    7.69290448715022057e-1,
    2.28805513830025203e-1,
    4.14687790547078276e-4,
    1.48934966440569219e-3,
];

#[test]
fn channel_simulation_reproduces_frozen_trajectory() {
    let model: HmmModel = build_ge_model(&GeParams::default()).unwrap();
    let sim = simulate(&model, 8, GE_T8_SEED).unwrap();
    assert_eq!(sim.states.states(), &GE_T8_STATES);
    assert_eq!(sim.observations.symbols(), &GE_T8_OBS);
}

#[test]
fn channel_oracle_reproduces_frozen_values() {
    let model: HmmModel = build_ge_model(&GeParams::default()).unwrap();
    let obs = ObservationSequence::new(GE_T8_OBS.to_vec()).unwrap();
    let marg = brute_force_marginals(&model, &obs).unwrap();
    for (k, frozen) in [
        (0usize, &GE_T8_MARGINALS_K0),
        (4, &GE_T8_MARGINALS_K4),
        (7, &GE_T8_MARGINALS_K7),
    ] {
        for (x, &expected) in frozen.iter().enumerate() {
            assert!(
                (marg[k][x] - expected).abs() <= FROZEN_TOL,
                "marginal k={k} x={x}"
            );
        }
    }
    let (path, w) = brute_force_map(&model, &obs).unwrap();
    assert_eq!(path.states(), &GE_T8_MAP_PATH);
    assert!((w - GE_T8_MAP_LOG_WEIGHT).abs() <= FROZEN_TOL);
    let lz = brute_force_log_evidence(&model, &obs).unwrap();
    assert!((lz - GE_T8_LOG_EVIDENCE).abs() <= FROZEN_TOL);
}

#[test]
fn channel_pipelines_match_frozen_values() {
    let model: HmmModel = build_ge_model(&GeParams::default()).unwrap();
    let obs = ObservationSequence::new(GE_T8_OBS.to_vec()).unwrap();
    let p = build_potentials(&model, &obs).unwrap();

    let outcome = smooth_parallel(&p).unwrap();
    for (k, frozen) in [
        (0usize, &GE_T8_MARGINALS_K0),
        (4, &GE_T8_MARGINALS_K4),
        (7, &GE_T8_MARGINALS_K7),
    ] {
        for (x, &expected) in frozen.iter().enumerate() {
            assert!(
                (outcome.marginals.step(k)[x] - expected).abs() <= MARGINAL_TOL,
                "pipeline marginal k={k} x={x}"
            );
        }
    }
    assert!((outcome.marginals.log_evidence() - GE_T8_LOG_EVIDENCE).abs() <= MARGINAL_TOL);

    let (viterbi, _) = viterbi_sequential(&p).unwrap();
    let argmax = map_parallel(&p).unwrap().result;
    let (reduced, _) = viterbi_path_parallel(&p).unwrap();
    for r in [&viterbi, &argmax, &reduced] {
        assert_eq!(r.path.states(), &GE_T8_MAP_PATH);
        assert!((r.log_weight - GE_T8_MAP_LOG_WEIGHT).abs() <= MAP_TOL);
    }
}
