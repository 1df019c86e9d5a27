use std::f64::consts::PI;

use super::*;
use crate::systems::{cz_register, lambda_system, z_leg_system, CzRegisterParams};

fn cx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn standard_targets() {
    let z = target_unitary(GateName::Z, 1).unwrap();
    assert_eq!(z[[0, 0]], cx(1.0, 0.0));
    assert_eq!(z[[1, 1]], cx(-1.0, 0.0));
    assert_eq!(z[[0, 1]], cx(0.0, 0.0));

    let cz = target_unitary(GateName::Cz, 2).unwrap();
    for i in 0..4 {
        let expected = if i == 3 { -1.0 } else { 1.0 };
        assert_eq!(cz[[i, i]], cx(expected, 0.0));
    }

    let h = target_unitary(GateName::H, 1).unwrap();
    let hh = h.dot(&h);
    for i in 0..2 {
        for j in 0..2 {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((hh[[i, j]] - cx(expected, 0.0)).norm() < 1e-15);
        }
    }

    assert!(target_unitary(GateName::Z, 2).is_err());
}

#[test]
fn z_synthesis_meets_pi_condition_and_fidelity() {
    let graph = z_leg_system(0.0, 0.4, 5.0, cx(0.5, 0.0));
    let synthesis = synthesize_z(&graph, 0).unwrap();
    let omega = synthesis.omegas.values().next().unwrap();
    assert!((synthesis.tau_gate * omega.norm() - PI).abs() < 1e-12);
    assert!(
        synthesis.achieved_fidelity >= 1.0 - 1e-10,
        "fidelity {}",
        synthesis.achieved_fidelity
    );

    let n1 = synthesize_z(&graph, 1).unwrap();
    assert!((n1.tau_gate * n1.omegas.values().next().unwrap().norm() - 3.0 * PI).abs() < 1e-12);
}

#[test]
fn z_synthesis_requires_an_auxiliary_leg() {
    let mut graph = z_leg_system(0.0, 0.4, 5.0, cx(0.5, 0.0));
    graph.edges.clear();
    assert!(matches!(synthesize_z(&graph, 0), Err(Error::Synthesis(_))));
}

#[test]
fn z_synthesis_rejects_zero_coupling_leg() {
    let graph = z_leg_system(0.0, 0.4, 5.0, cx(0.0, 0.0));
    assert!(matches!(synthesize_z(&graph, 0), Err(Error::Synthesis(_))));
}

#[test]
fn hadamard_synthesis_hits_paper_parameters() {
    let graph = lambda_system(0.0, 0.4, 5.0, cx(0.5, 0.0), cx(0.5, 0.0));
    let synthesis = synthesize_hadamard(&graph, 0).unwrap();
    assert!(
        synthesis.achieved_fidelity >= 1.0 - 1e-9,
        "fidelity {}",
        synthesis.achieved_fidelity
    );
    // Ratio and phase conditions on the two class amplitudes.
    let omegas: Vec<C64> = synthesis.omegas.values().copied().collect();
    let (big, small) = if omegas[0].norm() > omegas[1].norm() {
        (omegas[0], omegas[1])
    } else {
        (omegas[1], omegas[0])
    };
    assert!((small.norm() / big.norm() - (2.0_f64.sqrt() - 1.0)).abs() < 1e-12);
    let phase_diff = (small.arg() - big.arg()).rem_euclid(2.0 * PI);
    assert!((phase_diff - PI).abs() < 1e-12);
    let w = (big.norm_sqr() + small.norm_sqr()).sqrt();
    assert!((synthesis.tau_gate * w - PI).abs() < 1e-12);
}

#[test]
fn hadamard_walk_endpoints_match_plan() {
    let graph = lambda_system(0.0, 0.4, 5.0, cx(0.5, 0.0), cx(0.5, 0.0));
    let synthesis = synthesize_hadamard(&graph, 0).unwrap();
    let spec = gate_spec_for(&graph, GateName::H, target_unitary(GateName::H, 1).unwrap()).unwrap();
    let verification = verify_gate(&spec, &synthesis.pulse, &graph, &VerifyMode::Resonant).unwrap();
    let s = 1.0 / 2.0_f64.sqrt();
    // Walk 1: |0> -> (|0> + |1>)/sqrt(2); walk 2: |1> -> (|0> - |1>)/sqrt(2).
    assert!((verification.achieved[[0, 0]] - cx(s, 0.0)).norm() < 1e-9);
    assert!((verification.achieved[[1, 0]] - cx(s, 0.0)).norm() < 1e-9);
    assert!((verification.achieved[[0, 1]] - cx(s, 0.0)).norm() < 1e-9);
    assert!((verification.achieved[[1, 1]] - cx(-s, 0.0)).norm() < 1e-9);
}

#[test]
fn hadamard_synthesis_rejects_degenerate_legs() {
    // Both legs share the gap when the computational states are degenerate.
    let graph = lambda_system(0.0, 0.0, 5.0, cx(0.5, 0.0), cx(0.5, 0.0));
    assert!(matches!(
        synthesize_hadamard(&graph, 0),
        Err(Error::Synthesis(_))
    ));
}

#[test]
fn hadamard_ratio_perturbation_costs_fidelity() {
    let graph = lambda_system(0.0, 0.4, 5.0, cx(0.5, 0.0), cx(0.5, 0.0));
    let synthesis = synthesize_hadamard(&graph, 0).unwrap();
    // Perturb the smaller amplitude by 1% and re-verify.
    let mut omegas = synthesis.omegas.clone();
    let (&small_class, &small) = omegas
        .iter()
        .min_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
        .unwrap();
    omegas.insert(small_class, small * 1.01);
    let classes = crate::graph::compute_edge_classes(&graph, CLASS_TOL);
    let pulse = pulse_from_class_amplitudes(&classes, &omegas, synthesis.tau_gate).unwrap();
    let spec = gate_spec_for(&graph, GateName::H, target_unitary(GateName::H, 1).unwrap()).unwrap();
    let verification = verify_gate(&spec, &pulse, &graph, &VerifyMode::Resonant).unwrap();
    // The measured sensitivity of the fidelity to a 1% amplitude-ratio error
    // is ~3e-5 (quadratic in the perturbation).
    assert!(
        verification.fidelity < 1.0 - 1e-5,
        "fidelity {}",
        verification.fidelity
    );
    assert!(
        verification.fidelity > 0.999,
        "fidelity {}",
        verification.fidelity
    );
}

#[test]
fn cz_feasibility_examples() {
    let graph = cz_register(CzRegisterParams::default());
    // (3, 1, 1, 1): sqrt(2) in [1, 3].
    assert!(synthesize_cz(&graph, 3, 1, 1, 1).is_ok());
    // Ordering violated.
    assert!(matches!(
        synthesize_cz(&graph, 1, 3, 1, 1),
        Err(Error::InfeasibleIntegers(_))
    ));
    // Even integers rejected.
    assert!(matches!(
        synthesize_cz(&graph, 4, 1, 1, 1),
        Err(Error::InfeasibleIntegers(_))
    ));
}

#[test]
fn cz_walks_return_with_the_right_phases() {
    let graph = cz_register(CzRegisterParams::default());
    let synthesis = synthesize_cz(&graph, 3, 1, 1, 1).unwrap();
    assert!(
        synthesis.achieved_fidelity >= 1.0 - 1e-6,
        "fidelity {}",
        synthesis.achieved_fidelity
    );
    let spec = gate_spec_for(
        &graph,
        GateName::Cz,
        target_unitary(GateName::Cz, 2).unwrap(),
    )
    .unwrap();
    let verification = verify_gate(&spec, &synthesis.pulse, &graph, &VerifyMode::Resonant).unwrap();
    assert!(!verification.incomplete_return);
    // Walks 1-3 come back with phase +1, walk 4 with phase -1 (the plan
    // column already carries the -1, so all plan overlaps are +1).
    for (i, walk) in verification.walks.iter().enumerate() {
        assert!(walk.return_probability > 1.0 - 1e-6, "walk {i}: {walk:?}");
        assert!(
            (walk.plan_overlap - cx(1.0, 0.0)).norm() < 1e-6,
            "walk {i}: {walk:?}"
        );
    }
    let diag: Vec<C64> = (0..4).map(|i| verification.achieved[[i, i]]).collect();
    for (i, &d) in diag.iter().enumerate() {
        let expected = if i == 3 { -1.0 } else { 1.0 };
        assert!((d - cx(expected, 0.0)).norm() < 1e-6, "diag {diag:?}");
    }
}

#[test]
fn truncated_pulse_flags_incomplete_return() {
    let graph = z_leg_system(0.0, 0.4, 5.0, cx(0.5, 0.0));
    let synthesis = synthesize_z(&graph, 0).unwrap();
    let mut pulse = synthesis.pulse.clone();
    pulse.envelope.t_gate *= 0.5; // interrupt the walk mid-rotation
    let spec = gate_spec_for(&graph, GateName::Z, target_unitary(GateName::Z, 1).unwrap()).unwrap();
    let verification = verify_gate(&spec, &pulse, &graph, &VerifyMode::Resonant).unwrap();
    assert!(verification.incomplete_return);
    assert!(verification.walks.iter().any(|w| w.incomplete));
}

#[test]
fn fidelity_is_global_phase_invariant() {
    let u = target_unitary(GateName::H, 1).unwrap();
    assert!((gate_fidelity(&u, &u).unwrap() - 1.0).abs() < 1e-15);
    let rotated = u.mapv(|z| z * C64::from_polar(1.0, 1.2345));
    assert!((gate_fidelity(&rotated, &u).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn fidelity_of_orthogonal_traces_is_zero() {
    let z = target_unitary(GateName::Z, 1).unwrap();
    let eye = Array2::<C64>::eye(2);
    assert!(gate_fidelity(&z, &eye).unwrap() < 1e-15);
}

#[test]
fn fidelity_rejects_dimension_mismatch_and_nonunitary() {
    let z = target_unitary(GateName::Z, 1).unwrap();
    let cz = target_unitary(GateName::Cz, 2).unwrap();
    assert!(matches!(
        gate_fidelity(&z, &cz),
        Err(Error::DimensionMismatch(..))
    ));

    let mut leaky = Array2::<C64>::eye(2);
    leaky[[0, 0]] = cx(0.7, 0.0);
    assert!(gate_fidelity(&leaky, &Array2::<C64>::eye(2)).is_err());
}

#[test]
fn fidelity_invariant_under_simultaneous_permutation() {
    let graph = cz_register(CzRegisterParams::default());
    let synthesis = synthesize_cz(&graph, 3, 1, 1, 1).unwrap();
    let spec = gate_spec_for(
        &graph,
        GateName::Cz,
        target_unitary(GateName::Cz, 2).unwrap(),
    )
    .unwrap();
    let verification = verify_gate(&spec, &synthesis.pulse, &graph, &VerifyMode::Resonant).unwrap();

    let perm = [2usize, 0, 3, 1];
    let d = 4;
    let mut pa = Array2::<C64>::zeros((d, d));
    let mut pt = Array2::<C64>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            pa[[i, j]] = verification.achieved[[perm[i], perm[j]]];
            pt[[i, j]] = spec.target[[perm[i], perm[j]]];
        }
    }
    let product = pt.t().mapv(|z| z.conj()).dot(&pa);
    let trace: C64 = (0..d).map(|i| product[[i, i]]).sum();
    assert!((trace.norm() / d as f64 - verification.fidelity).abs() < 1e-12);
}

#[test]
fn class_breaking_assignment_is_rejected() {
    let graph = cz_register(CzRegisterParams::default());
    let (classified, classes) = graph.classified(CLASS_TOL);
    // The two second-qubit edges |01>-|02> and |11>-|12> share a class; try
    // to give them different amplitudes.
    let shared: Vec<usize> = classes
        .iter()
        .find(|c| c.members.len() == 2)
        .map(|c| c.members.clone())
        .unwrap();
    let mut per_edge = BTreeMap::new();
    per_edge.insert(shared[0], cx(1.0, 0.0));
    per_edge.insert(shared[1], cx(0.5, 0.0));
    assert!(matches!(
        assign_class_amplitudes(&classes, &per_edge),
        Err(Error::Synthesis(_))
    ));
    // Consistent assignment passes and lands on the class.
    per_edge.insert(shared[1], cx(1.0, 0.0));
    let omegas = assign_class_amplitudes(&classes, &per_edge).unwrap();
    assert_eq!(omegas.len(), 1);
    drop(classified);
}

#[test]
fn synthesized_amplitudes_respect_edge_classes() {
    let graph = cz_register(CzRegisterParams::default());
    let synthesis = synthesize_cz(&graph, 3, 1, 1, 1).unwrap();
    let (_, classes) = graph.classified(CLASS_TOL);
    // Every driven class has one amplitude; both members of a symmetric
    // class see the same resonant amplitude by construction.
    for class in &classes {
        if let Some(omega) = synthesis.omegas.get(&class.class_id) {
            assert!(omega.norm() > 0.0);
        }
    }
    assert_eq!(synthesis.omegas.len(), 4);
}

#[test]
fn symmetric_register_cannot_entangle() {
    // No interaction shifts: the walk generator is a sum of single-qubit
    // terms for any drive, and CZ verification stays far from 1.
    let graph = cz_register(CzRegisterParams {
        shift_22: 0.0,
        ..CzRegisterParams::default()
    });
    let (_, classes) = graph.classified(CLASS_TOL);
    assert_eq!(classes.len(), 2);

    let mut omegas = BTreeMap::new();
    omegas.insert(classes[0].class_id, cx(0.8, 0.0));
    omegas.insert(classes[1].class_id, cx(0.5, 0.0));
    let lambda = resonant_generator(&graph, &classes, &omegas, 2.0 * PI).unwrap();
    let (local, _) = crate::graph::is_local_generator(&lambda, &graph).unwrap();
    assert!(local);

    let spec = gate_spec_for(
        &graph,
        GateName::Cz,
        target_unitary(GateName::Cz, 2).unwrap(),
    )
    .unwrap();
    let pulse = pulse_from_class_amplitudes(&classes, &omegas, 2.0 * PI).unwrap();
    let verification = verify_gate(&spec, &pulse, &graph, &VerifyMode::Resonant).unwrap();
    assert!(verification.fidelity < 0.99);
}

#[test]
fn cz_graph_with_unbroken_symmetry_refuses_synthesis() {
    let graph = cz_register(CzRegisterParams {
        shift_22: 0.0,
        ..CzRegisterParams::default()
    });
    assert!(matches!(
        synthesize_cz(&graph, 3, 1, 1, 1),
        Err(Error::Synthesis(_))
    ));
}

#[test]
fn cz_walk4_reduces_to_a_chain_with_the_same_return() {
    // The walk-4 square loop collapses through the diagonal-loop move to a
    // 4-state chain; the chain walk returns |0> -> -|0> at the same time,
    // and the spectra agree.
    let graph = cz_register(CzRegisterParams::default());
    let synthesis = synthesize_cz(&graph, 3, 1, 1, 1).unwrap();
    let classes = crate::graph::compute_edge_classes(&graph, CLASS_TOL);
    let class_of_edge = |hi: &str, lo: &str| {
        let idx = graph
            .edges
            .iter()
            .position(|e| e.hi == hi && e.lo == lo)
            .unwrap();
        classes
            .iter()
            .find(|c| c.members.contains(&idx))
            .unwrap()
            .class_id
    };
    let omega_a = synthesis.omegas[&class_of_edge("12", "11")];
    let omega_ap = synthesis.omegas[&class_of_edge("21", "11")];
    let omega_b = synthesis.omegas[&class_of_edge("22", "12")];
    let omega_bp = synthesis.omegas[&class_of_edge("22", "21")];

    // Loop on (|11>, |12>, |22>, |21>) as the diagonal square: couplings in
    // chain-derivation direction, all on-site energies resonant (zero).
    let (a, b, cc, d) = (omega_a.conj(), omega_b.conj(), omega_bp, omega_ap.conj());
    let energies = crate::reduction::DiagonalLoopEnergies {
        e0: 0.0,
        e1: 0.0,
        e2: 0.0,
        e3: 0.0,
    };
    let report = crate::reduction::diagonal_loop_to_chain(a, b, cc, d, energies).unwrap();

    let loop_h = crate::reduction::assemble_hamiltonian(
        &["0", "1", "2", "3"],
        &[("0", "1", a), ("1", "2", b), ("3", "2", cc), ("0", "3", d)],
        &[0.0; 4],
    );
    let chain_h = report.hamiltonian_after();
    let loop_eigs = crate::linalg::eigvalsh(&loop_h).unwrap();
    let chain_eigs = crate::linalg::eigvalsh(&chain_h).unwrap();
    for (x, y) in loop_eigs.iter().zip(chain_eigs.iter()) {
        assert!((x - y).abs() < 1e-12);
        // The walk-4 construction puts the spectrum on odd half-integers.
        assert!((x * 2.0 - (x * 2.0).round()).abs() < 1e-9, "{loop_eigs:?}");
        assert!(
            ((x * 2.0).round() as i64).rem_euclid(2) == 1,
            "{loop_eigs:?}"
        );
    }

    // The reduced chain performs the same phase-pi return walk.
    let u = crate::linalg::expm_hermitian(&chain_h, synthesis.tau_gate).unwrap();
    assert!((u[[0, 0]] - cx(-1.0, 0.0)).norm() < 1e-9, "{:?}", u[[0, 0]]);
}

#[test]
fn walk_plan_rows_form_a_unitary() {
    let target = target_unitary(GateName::Cnot, 2).unwrap();
    let plan = WalkPlan::from_target(&target).unwrap();
    assert_eq!(plan.columns.len(), 4);
    let mut nonunitary = target.clone();
    nonunitary[[0, 0]] = cx(0.5, 0.0);
    assert!(WalkPlan::from_target(&nonunitary).is_err());
}

#[test]
fn verified_gate_is_unitary_when_walks_complete() {
    let graph = cz_register(CzRegisterParams::default());
    let synthesis = synthesize_cz(&graph, 3, 1, 1, 1).unwrap();
    let spec = gate_spec_for(
        &graph,
        GateName::Cz,
        target_unitary(GateName::Cz, 2).unwrap(),
    )
    .unwrap();
    let verification = verify_gate(&spec, &synthesis.pulse, &graph, &VerifyMode::Resonant).unwrap();
    assert!(verification.unitary_deviation < 1e-8);
}
