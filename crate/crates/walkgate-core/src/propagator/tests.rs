use std::f64::consts::PI;

use ndarray::{array, Array1};

use super::*;
use crate::drive::{CouplingFunction, Envelope, PulseComponent};
use crate::graph::{Edge, Vertex};
use crate::propagator::coined::{coined_walk_run, CoinedMode, CoinedOptions};
use crate::propagator::line::{hadamard_coin, line_walk_demo};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Two-level graph with a single driven edge of gap `omega0`.
fn two_level(omega0: f64, g: C64) -> Graph {
    Graph::new(
        vec![Vertex::auxiliary("g", 0.0), Vertex::auxiliary("e", omega0)],
        vec![Edge::new("e", "g", g)],
        0,
    )
}

fn lambda_system() -> Graph {
    Graph::new(
        vec![
            Vertex::qubit("0", 0.0, vec![0]),
            Vertex::qubit("1", 0.4, vec![1]),
            Vertex::auxiliary("2", 5.0),
        ],
        vec![
            Edge::new("2", "0", c(1.0, 0.0)),
            Edge::new("2", "1", c(1.0, 0.0)),
        ],
        1,
    )
}

#[test]
fn exact_propagator_of_zero_pulse_is_identity() {
    let graph = two_level(5.0, c(0.5, 0.0));
    let pulse = Pulse::new(
        Envelope::flat(0.0, 1.0),
        vec![PulseComponent::new(5.0, c(0.0, 0.0))],
    );
    let initial = WalkerState::basis(&graph, "g").unwrap();
    let (u, result) = exact_propagator(&graph, &pulse, &initial, 1e-3, 8).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((u[[i, j]] - c(target, 0.0)).norm() < 1e-12);
        }
    }
    assert!(result.norm_drift < 1e-12);
}

#[test]
fn exact_rabi_transfer_matches_resonant_walk() {
    // omega >> Omega so the resonant walk is accurate to O(Omega/omega).
    let omega = 200.0;
    let rabi = 1.0;
    let graph = two_level(omega, c(1.0, 0.0));
    let t_gate = 0.4 * PI / rabi;
    let pulse = Pulse::new(
        Envelope::flat(0.0, t_gate),
        vec![PulseComponent::new(omega, c(rabi, 0.0))],
    );
    let initial = WalkerState::basis(&graph, "g").unwrap();
    let (_, exact) = exact_propagator(&graph, &pulse, &initial, 1.0 / (400.0 * omega), 4).unwrap();
    let resonant = resonant_walk_run(&graph, &pulse, &initial, 1e-9, 4).unwrap();
    let p_exact = site_probabilities(&exact.final_walker);
    let p_res = site_probabilities(&resonant.final_walker);
    // Transfer probability follows sin^2(Omega tau).
    let expected = (rabi * t_gate).sin().powi(2);
    assert!((p_res[1] - expected).abs() < 1e-12);
    assert!(
        (p_exact[1] - expected).abs() < 30.0 / omega,
        "diff {}",
        (p_exact[1] - expected).abs()
    );
    assert!(exact.final_walker.distance(&resonant.final_walker) < 30.0 / omega);
    // ~1e5 exact steps of per-step exponentials keep the norm to 1e-10.
    assert!(exact.norm_drift < 1e-10, "norm drift {}", exact.norm_drift);
}

#[test]
fn default_dt_resolves_fastest_scale() {
    let graph = two_level(40.0, c(1.0, 0.0));
    let pulse = Pulse::new(
        Envelope::flat(0.0, 1.0),
        vec![PulseComponent::new(65.0, c(0.1, 0.0))],
    );
    assert!((default_dt(&graph, &pulse) - 1.0 / (50.0 * 65.0)).abs() < 1e-18);
    let slow = Pulse::new(
        Envelope::flat(0.0, 1.0),
        vec![PulseComponent::new(2.0, c(0.1, 0.0))],
    );
    assert!((default_dt(&graph, &slow) - 1.0 / (50.0 * 40.0)).abs() < 1e-18);
}

#[test]
fn resonant_z_walk_returns_with_phase_pi() {
    // Single resonant leg driven for tau Omega = pi: |0> -> -|0>.
    let graph = lambda_system();
    let rabi = 0.5;
    let tau = PI / rabi;
    let pulse = Pulse::new(
        Envelope::flat(0.0, tau),
        vec![PulseComponent::new(5.0, c(rabi, 0.0))],
    );
    let initial = WalkerState::basis(&graph, "0").unwrap();
    let result = resonant_walk_run(&graph, &pulse, &initial, 1e-9, 4).unwrap();
    let i0 = graph.vertex_index("0").unwrap();
    assert!((result.final_walker.amplitudes[i0] - c(-1.0, 0.0)).norm() < 1e-10);
}

#[test]
fn resonant_hadamard_walk_endpoints() {
    // |Omega_0leg| = (sqrt(2)-1) |Omega_1leg| with a pi phase difference and
    // tau sqrt(|O1|^2 + |O2|^2) = pi sends |0> to (|0>+|1>)/sqrt(2) and |1>
    // to (|0>-|1>)/sqrt(2).
    let graph = lambda_system();
    let o1 = 1.0;
    let o2 = -(2.0_f64.sqrt() - 1.0);
    let w = (o1 * o1 + o2 * o2).sqrt();
    let tau = PI / w;
    // Omega = conj(amp) conj(g) with g = 1, so amp = conj(Omega).
    let pulse = Pulse::new(
        Envelope::flat(0.0, tau),
        vec![
            PulseComponent::new(4.6, c(o1, 0.0)), // |1> leg (gap 5.0 - 0.4)
            PulseComponent::new(5.0, c(o2, 0.0)), // |0> leg
        ],
    );
    let i0 = graph.vertex_index("0").unwrap();
    let i1 = graph.vertex_index("1").unwrap();
    let s = 1.0 / 2.0_f64.sqrt();

    let from0 = resonant_walk_run(
        &graph,
        &pulse,
        &WalkerState::basis(&graph, "0").unwrap(),
        1e-9,
        4,
    )
    .unwrap();
    assert!((from0.final_walker.amplitudes[i0] - c(s, 0.0)).norm() < 1e-10);
    assert!((from0.final_walker.amplitudes[i1] - c(s, 0.0)).norm() < 1e-10);

    let from1 = resonant_walk_run(
        &graph,
        &pulse,
        &WalkerState::basis(&graph, "1").unwrap(),
        1e-9,
        4,
    )
    .unwrap();
    assert!((from1.final_walker.amplitudes[i0] - c(s, 0.0)).norm() < 1e-10);
    assert!((from1.final_walker.amplitudes[i1] - c(-s, 0.0)).norm() < 1e-10);
}

#[test]
fn resonant_walk_with_zero_adjacency_is_identity() {
    let graph = lambda_system();
    let pulse = Pulse::new(
        Envelope::flat(0.0, 2.0),
        vec![PulseComponent::new(1.23, c(0.4, 0.0))],
    );
    let initial = WalkerState::basis(&graph, "1").unwrap();
    let result = resonant_walk_run(&graph, &pulse, &initial, 1e-9, 4).unwrap();
    assert!(result.final_walker.distance(&initial) < 1e-14);
}

#[test]
fn coined_zero_pulse_leaves_walker_unchanged() {
    let graph = lambda_system();
    let pulse = Pulse::new(
        Envelope::flat(0.0, 1.0),
        vec![PulseComponent::new(5.0, c(0.0, 0.0))],
    );
    let amps = array![c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)];
    let initial = WalkerState::new(amps).unwrap();
    let result = coined_walk_run(
        &graph,
        &pulse,
        &initial,
        1e-2,
        2,
        CoinedMode::Full,
        &CoinedOptions::default(),
    )
    .unwrap();
    assert!(result.final_walker.distance(&initial) < 1e-12);
    assert_eq!(result.boundary_leakage, 0.0);
    assert!((result.coin_purity - 1.0).abs() < 1e-12);
}

#[test]
fn coined_resonant_drive_matches_resonant_walk() {
    // omega / Omega >= 1e3 with M >= 4: the coined walker should land within
    // 1e-4 of the pure continuous-time walk. The residual counter-rotating
    // effect scales as Omega / 2 omega, so run well inside the regime.
    let omega = 1e4;
    let rabi = 1.0;
    let graph = two_level(omega, c(1.0, 0.0));
    let t_gate = 0.35 * PI;
    let pulse = Pulse::new(
        Envelope::flat(0.0, t_gate),
        vec![PulseComponent::new(omega, c(rabi, 0.0))],
    );
    let initial = WalkerState::basis(&graph, "g").unwrap();
    let coined = coined_walk_run(
        &graph,
        &pulse,
        &initial,
        1.0 / (50.0 * omega),
        4,
        CoinedMode::Full,
        &CoinedOptions::default(),
    )
    .unwrap();
    let resonant = resonant_walk_run(&graph, &pulse, &initial, 1e-9, 4).unwrap();
    let dist = coined.final_walker.distance(&resonant.final_walker);
    assert!(dist < 1e-4, "distance {dist}");
    assert!(coined.boundary_leakage < 1e-10);
}

#[test]
fn rwa_resonant_only_coin_stays_factored() {
    let omega = 150.0;
    let graph = two_level(omega, c(1.0, 0.0));
    let t_gate = 0.3 * PI;
    let pulse = Pulse::new(
        Envelope::flat(0.0, t_gate),
        vec![PulseComponent::new(omega, c(1.0, 0.0))],
    );
    let initial = WalkerState::basis(&graph, "g").unwrap();
    let run = coined_walk_run(
        &graph,
        &pulse,
        &initial,
        1.0 / (50.0 * omega),
        6,
        CoinedMode::Rwa,
        &CoinedOptions::default(),
    )
    .unwrap();
    assert!(run.coin_purity > 1.0 - 1e-12, "purity {}", run.coin_purity);
}

#[test]
fn quadratic_coupling_drives_two_photon_rabi() {
    // F(x) = x^2 on a gap of 2 omega: the k = +-2 ladder terms are resonant
    // and flop the population at |amp^2 g|; the scalar k = 0 term is far
    // detuned and only dresses the transition slightly.
    let omega = 40.0;
    let graph = two_level(2.0 * omega, c(1.0, 0.0));
    let amp = 0.6;
    let two_photon_rabi = amp * amp; // |amp|^2 |g|
    let t_gate = 0.5 * PI / two_photon_rabi;
    let pulse = Pulse::new(
        Envelope::flat(0.0, t_gate),
        vec![PulseComponent::new(omega, c(amp, 0.0))],
    );
    let initial = WalkerState::basis(&graph, "g").unwrap();
    let options = CoinedOptions {
        coupling: Some((CouplingFunction::new(vec![0.0, 0.0, 1.0]).unwrap(), 2)),
        ..CoinedOptions::default()
    };
    let run = coined_walk_run(
        &graph,
        &pulse,
        &initial,
        1.0 / (100.0 * omega),
        6,
        CoinedMode::Full,
        &options,
    )
    .unwrap();
    let probs = site_probabilities(&run.final_walker);
    // Half a flop: full transfer up to the off-resonant dressing.
    assert!(probs[1] > 0.95, "two-photon transfer {probs:?}");
    assert!(run.norm_drift < 1e-9);
}

#[test]
fn coined_full_converges_linearly_to_exact() {
    // Halving dt should halve the distance to the exact propagator within a
    // factor of 1.5 either way.
    let graph = Graph::new(
        vec![
            Vertex::auxiliary("a", 0.0),
            Vertex::auxiliary("b", 11.0),
            Vertex::auxiliary("c", 17.0),
        ],
        vec![
            Edge::new("b", "a", c(0.8, 0.2)),
            Edge::new("c", "b", c(0.5, -0.4)),
        ],
        0,
    );
    let pulse = Pulse::new(
        Envelope::flat(0.0, 0.7),
        vec![
            PulseComponent::new(11.0, c(0.9, 0.0)),
            PulseComponent::new(6.0, c(0.0, 0.7)),
        ],
    );
    let initial = WalkerState::basis(&graph, "a").unwrap();
    let options = CoinedOptions {
        leakage_threshold: 1e-3,
        ..CoinedOptions::default()
    };

    let mut distances = Vec::new();
    for halving in 0..3 {
        let dt = 2e-3 / (1 << halving) as f64;
        let (_, exact) = exact_propagator(&graph, &pulse, &initial, dt, 2).unwrap();
        let coined =
            coined_walk_run(&graph, &pulse, &initial, dt, 5, CoinedMode::Full, &options).unwrap();
        distances.push(exact.final_walker.distance(&coined.final_walker));
    }
    for w in distances.windows(2) {
        let ratio = w[0] / w[1];
        assert!(
            ratio > 2.0 / 1.5 && ratio < 2.0 * 1.5,
            "ratios from {distances:?}"
        );
    }
}

#[test]
fn generalized_linear_coupling_reproduces_dipole_walk() {
    let graph = two_level(40.0, c(0.7, 0.3));
    let pulse = Pulse::new(
        Envelope::flat(0.0, 0.5),
        vec![PulseComponent::new(40.0, c(0.6, -0.2))],
    );
    let initial = WalkerState::basis(&graph, "g").unwrap();
    let dipole = coined_walk_run(
        &graph,
        &pulse,
        &initial,
        5e-4,
        3,
        CoinedMode::Full,
        &CoinedOptions::default(),
    )
    .unwrap();
    let options = CoinedOptions {
        coupling: Some((CouplingFunction::dipole(), 1)),
        ..CoinedOptions::default()
    };
    let general = coined_walk_run(
        &graph,
        &pulse,
        &initial,
        5e-4,
        3,
        CoinedMode::Full,
        &options,
    )
    .unwrap();
    assert!(dipole.final_walker.distance(&general.final_walker) < 1e-13);
    assert_eq!(dipole.boundary_leakage, general.boundary_leakage);
}

#[test]
fn approximation_report_zero_pulse_gives_zero_distances() {
    let graph = lambda_system();
    let pulse = Pulse::new(
        Envelope::flat(0.0, 0.5),
        vec![PulseComponent::new(5.0, c(0.0, 0.0))],
    );
    let initial = WalkerState::basis(&graph, "0").unwrap();
    let report =
        approximation_report(&graph, &pulse, &initial, 1e-3, 2, &CoinedOptions::default()).unwrap();
    assert!(report.distance_exact_full < 1e-12);
    assert!(report.distance_full_rwa < 1e-12);
    assert!(report.distance_rwa_resonant < 1e-12);
}

#[test]
fn site_probabilities_of_pure_and_uniform_states() {
    let pure = WalkerState::new(array![c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
    assert_eq!(site_probabilities(&pure), vec![0.0, 1.0, 0.0]);

    let d = 4;
    let amp = 1.0 / (d as f64).sqrt();
    let uniform = WalkerState::new(Array1::from_elem(d, c(amp, 0.0))).unwrap();
    for p in site_probabilities(&uniform) {
        assert!((p - 0.25).abs() < 1e-15);
    }
}

#[test]
fn ladder_probabilities_are_m_summed_magnitudes() {
    // Entangled walker-coin state: probabilities equal the m-summed squares.
    let graph = two_level(10.0, c(1.0, 0.0));
    let walker = WalkerState::basis(&graph, "g").unwrap();
    let mut state = LadderState::from_walker(&walker, 2, 1);
    // Move some amplitude by hand to (e, m=1) and (e, m=-2).
    let dim = state.amplitudes.len();
    let per = dim / 2;
    state.amplitudes[0] = c(0.0, 0.0);
    state.amplitudes[per / 2] = c(0.6, 0.0); // (g, m=0)
    state.amplitudes[per + per / 2 + 1] = c(0.0, 0.6); // (e, m=1)
    state.amplitudes[per + per / 2 - 2] = c(0.28_f64.sqrt(), 0.0); // (e, m=-2)
    let probs = state.site_probabilities();
    assert!((probs[0] - 0.36).abs() < 1e-12);
    assert!((probs[1] - 0.64).abs() < 1e-12);
}

#[test]
fn unnormalized_walker_state_is_rejected() {
    assert!(WalkerState::new(array![c(0.5, 0.0), c(0.5, 0.0)]).is_err());
}

#[test]
fn line_walk_zero_steps_stays_at_origin() {
    let dist = line_walk_demo(0, &hadamard_coin(), (c(1.0, 0.0), c(0.0, 0.0))).unwrap();
    assert_eq!(dist, vec![1.0]);
}

#[test]
fn line_walk_one_hadamard_step_splits_evenly() {
    let dist = line_walk_demo(1, &hadamard_coin(), (c(1.0, 0.0), c(0.0, 0.0))).unwrap();
    assert_eq!(dist.len(), 3);
    assert!((dist[0] - 0.5).abs() < 1e-15); // site -1
    assert!(dist[1] < 1e-15); // site 0
    assert!((dist[2] - 0.5).abs() < 1e-15); // site +1
}

#[test]
fn line_walk_conserves_probability_and_support() {
    for steps in [3usize, 10, 47] {
        let dist = line_walk_demo(steps, &hadamard_coin(), (c(0.6, 0.0), c(0.0, 0.8))).unwrap();
        assert_eq!(dist.len(), 2 * steps + 1);
        let total: f64 = dist.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn line_walk_hadamard_distribution_is_asymmetric() {
    let steps = 100;
    let dist = line_walk_demo(steps, &hadamard_coin(), (c(1.0, 0.0), c(0.0, 0.0))).unwrap();
    let left: f64 = dist[..steps].iter().sum();
    let right: f64 = dist[steps + 1..].iter().sum();
    assert!((left - right).abs() > 0.1, "left {left} right {right}");
}

#[test]
fn line_walk_rejects_nonunitary_coin() {
    let mut coin = hadamard_coin();
    coin[[0, 0]] = c(0.9, 0.0);
    assert!(line_walk_demo(3, &coin, (c(1.0, 0.0), c(0.0, 0.0))).is_err());
}

#[test]
fn leakage_threshold_errors_when_truncation_too_small() {
    // Strong far-off-resonant drive with M = 1 pushes weight into the guard.
    let graph = two_level(4.0, c(1.0, 0.0));
    let pulse = Pulse::new(
        Envelope::flat(0.0, 3.0),
        vec![PulseComponent::new(4.0, c(2.0, 0.0))],
    );
    let initial = WalkerState::basis(&graph, "g").unwrap();
    let options = CoinedOptions {
        leakage_threshold: 1e-12,
        ..CoinedOptions::default()
    };
    let run = coined_walk_run(
        &graph,
        &pulse,
        &initial,
        1e-3,
        1,
        CoinedMode::Full,
        &options,
    );
    assert!(matches!(
        run,
        Err(crate::error::Error::LeakageExceeded { .. })
    ));
}
