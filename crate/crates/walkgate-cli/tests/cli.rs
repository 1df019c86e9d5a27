//! End-to-end tests of the command surface: config parsing, artifact
//! emission, determinism, and the reduce round trip.

use std::fs;
use std::path::Path;

use tempfile::TempDir;

use walkgate_cli::config::parse_config;
use walkgate_cli::run_args;

/// Minimal Lambda-system document: two computational states and one shared
/// auxiliary driven resonantly on the |0> leg for a pi rotation.
fn lambda_config(mode: &str, dt_line: &str) -> String {
    format!(
        r#"{{
  "qubit_count": 1,
  "vertices": [
    {{"label": "0", "energy": 0.0, "levels": [0]}},
    {{"label": "1", "energy": 0.4, "levels": [1]}},
    {{"label": "2", "energy": 5.0}}
  ],
  "edges": [
    {{"hi": "2", "lo": "0", "g": [1.0, 0.0]}},
    {{"hi": "2", "lo": "1", "g": [1.0, 0.0]}}
  ],
  "pulses": [
    {{
      "envelope": {{"kind": "flat", "t_start": 0.0, "t_gate": 6.283185307179586}},
      "components": [{{"omega": 5.0, "amp": [0.5, 0.0]}}]
    }}
  ],
  "simulation": {{"mode": "{mode}"{dt_line}}},
  "initial_state": {{"amplitudes": {{"0": [1.0, 0.0]}}}},
  "gate": {{"name": "z", "n": 0}}
}}"#
    )
}

fn write_config(dir: &Path, contents: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> i32 {
    run_args(std::iter::once("walkgate").chain(args.iter().copied()))
}

#[test]
fn minimal_config_parses() {
    let config = parse_config(&lambda_config("resonant", "")).unwrap();
    assert_eq!(config.vertices.len(), 3);
    assert_eq!(config.simulation.coin_levels, 6);
}

#[test]
fn missing_dt_in_coined_mode_names_the_path() {
    let err = parse_config(&lambda_config("full", "")).unwrap_err();
    let message = err.to_string();
    assert!(message.contains("simulation.dt"), "{message}");
}

#[test]
fn unknown_keys_are_rejected_with_a_path() {
    let text = lambda_config("resonant", "").replace(
        "\"qubit_count\": 1,",
        "\"qubit_count\": 1, \"surprise\": 3,",
    );
    let err = parse_config(&text).unwrap_err();
    assert!(err.to_string().contains("surprise"), "{err}");
}

#[test]
fn overlapping_pulse_windows_are_rejected() {
    let text = lambda_config("resonant", "").replace(
        r#""pulses": ["#,
        r#""pulses": [
    {
      "envelope": {"kind": "flat", "t_start": 3.0, "t_gate": 5.0},
      "components": [{"omega": 7.7, "amp": [0.1, 0.0]}]
    },"#,
    );
    let err = parse_config(&text).unwrap_err();
    assert!(err.to_string().contains("pulses overlap"), "{err}");
}

#[test]
fn simulate_resonant_writes_normalized_trajectory() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), &lambda_config("resonant", ""));
    let out = dir.path().join("out");
    let code = run(&[
        "simulate",
        "-c",
        config.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,tau,P_0,P_1,P_2,norm,leakage");
    let mut rows = 0;
    for line in lines {
        let fields: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let total: f64 = fields[2..5].iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "row sums to {total}");
        rows += 1;
    }
    assert!(rows >= 2);
    assert!(out.join("final_state.json").exists());
}

#[test]
fn identical_inputs_give_byte_identical_outputs() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), &lambda_config("full", ", \"dt\": 0.002"));
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    assert_eq!(
        run(&[
            "simulate",
            "-c",
            config.to_str().unwrap(),
            "-o",
            out_a.to_str().unwrap()
        ]),
        0
    );
    assert_eq!(
        run(&[
            "simulate",
            "-c",
            config.to_str().unwrap(),
            "-o",
            out_b.to_str().unwrap()
        ]),
        0
    );
    for name in ["trajectory.csv", "final_state.json"] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn verify_z_reports_unit_fidelity() {
    let dir = TempDir::new().unwrap();
    // Z drives a single auxiliary leg; drop the |1> leg.
    let text = lambda_config("resonant", "").replace(
        r#"{"hi": "2", "lo": "0", "g": [1.0, 0.0]},
    {"hi": "2", "lo": "1", "g": [1.0, 0.0]}"#,
        r#"{"hi": "2", "lo": "0", "g": [1.0, 0.0]}"#,
    );
    let config = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let code = run(&[
        "verify",
        "-c",
        config.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let fidelity = report["fidelity"].as_f64().unwrap();
    assert!(fidelity >= 1.0 - 1e-10, "fidelity {fidelity}");
    assert_eq!(report["incomplete_return"], serde_json::Value::Bool(false));

    let unitary: Vec<Vec<[f64; 2]>> =
        serde_json::from_str(&fs::read_to_string(out.join("unitary.json")).unwrap()).unwrap();
    assert_eq!(unitary.len(), 2);
    assert!(walkgate_cli::commands::record_unitarity(&unitary) < 1e-8);
}

#[test]
fn synthesize_h_writes_amplitude_record() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), &lambda_config("resonant", ""));
    let out = dir.path().join("out");
    let code = run(&[
        "synthesize",
        "h",
        "-c",
        config.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("synthesis.json")).unwrap()).unwrap();
    assert!(record["achieved_fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
    assert_eq!(record["omegas"].as_object().unwrap().len(), 2);
    assert_eq!(record["pulse"]["components"].as_array().unwrap().len(), 2);
}

#[test]
fn compare_reports_three_distances() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), &lambda_config("compare", ", \"dt\": 0.002"));
    let out = dir.path().join("out");
    let code = run(&[
        "compare",
        "-c",
        config.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    // The subcommand output equals the library report on the same inputs.
    let parsed = parse_config(&lambda_config("compare", ", \"dt\": 0.002")).unwrap();
    let graph = parsed.graph();
    let library = walkgate_core::propagator::approximation_report(
        &graph,
        &parsed.pulse(0).unwrap(),
        &parsed.initial_walker(&graph).unwrap(),
        0.002,
        parsed.simulation.coin_levels,
        &walkgate_core::propagator::CoinedOptions::default(),
    )
    .unwrap();
    assert_eq!(
        report["distance_exact_full"].as_f64().unwrap(),
        library.distance_exact_full
    );
    assert_eq!(
        report["distance_full_rwa"].as_f64().unwrap(),
        library.distance_full_rwa
    );
    assert_eq!(
        report["distance_rwa_resonant"].as_f64().unwrap(),
        library.distance_rwa_resonant
    );
    // The |1> leg is detuned by only 0.4 at amplitude 0.5, far from scale
    // separation, so the resonant reduction visibly fails there.
    assert!(library.distance_rwa_resonant > 0.1 && library.distance_rwa_resonant <= 2.0);
}

/// Chain with a one-segment branch, all auxiliary states.
fn branch_config() -> String {
    r#"{
  "qubit_count": 0,
  "vertices": [
    {"label": "c0", "energy": 0.1},
    {"label": "c1", "energy": 0.9},
    {"label": "c2", "energy": 1.3},
    {"label": "c3", "energy": 1.4},
    {"label": "br", "energy": 2.2}
  ],
  "edges": [
    {"hi": "c1", "lo": "c0", "g": [0.5, 0.2]},
    {"hi": "c2", "lo": "c1", "g": [0.4, -0.1]},
    {"hi": "c3", "lo": "c2", "g": [0.3, 0.0]},
    {"hi": "br", "lo": "c1", "g": [0.2, 0.6]}
  ],
  "pulses": [],
  "simulation": {"mode": "resonant"},
  "reduce": {"kind": "branch", "labels": {"v1": "c1", "v2": "c2", "v1p": "br"}}
}"#
    .to_string()
}

#[test]
fn reduce_branch_emits_reparseable_equivalent_graph() {
    let dir = TempDir::new().unwrap();
    let config_path = write_config(dir.path(), &branch_config());
    let out = dir.path().join("out");
    let code = run(&[
        "reduce",
        "-c",
        config_path.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    // Round trip: the emitted document parses under the same schema.
    let emitted = fs::read_to_string(out.join("reduced_graph.json")).unwrap();
    let reparsed = parse_config(&emitted).unwrap();
    assert_eq!(reparsed.vertices.len(), 5);
    assert!(reparsed.vertices.iter().any(|v| v.label == "x"));
    assert!(reparsed.vertices.iter().any(|v| v.label == "xp"));

    // Spectrum oracle: original couplings+energies vs reduced graph plus the
    // off-diagonal part of G'' from the report.
    let original = parse_config(&branch_config()).unwrap().graph();
    let reduced = reparsed.graph();
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("reduction_report.json")).unwrap())
            .unwrap();

    let assemble = |graph: &walkgate_core::graph::Graph| {
        let n = graph.dim();
        let mut h = ndarray::Array2::<walkgate_core::C64>::zeros((n, n));
        for (i, v) in graph.vertices.iter().enumerate() {
            h[[i, i]] = walkgate_core::C64::new(v.energy, 0.0);
        }
        for e in 0..graph.edges.len() {
            let (hi, lo) = graph.edge_endpoints(e).unwrap();
            h[[hi, lo]] += graph.edges[e].g;
            h[[lo, hi]] += graph.edges[e].g.conj();
        }
        h
    };
    let before = assemble(&original);
    let mut after = assemble(&reduced);
    // Add the G'' cross terms (off-diagonal only; energies already applied).
    let g2 = report["g_doubleprime"].as_array().unwrap();
    let order: Vec<String> = report["vertex_order"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    for (i, row) in g2.iter().enumerate() {
        for (j, entry) in row.as_array().unwrap().iter().enumerate() {
            if i == j {
                continue;
            }
            let pair = entry.as_array().unwrap();
            let z = walkgate_core::C64::new(pair[0].as_f64().unwrap(), pair[1].as_f64().unwrap());
            let gi = reduced.vertex_index(&order[i]).unwrap();
            let gj = reduced.vertex_index(&order[j]).unwrap();
            after[[gi, gj]] += z;
        }
    }
    let eig_before = walkgate_core::linalg::eigvalsh(&before).unwrap();
    let eig_after = walkgate_core::linalg::eigvalsh(&after).unwrap();
    for (a, b) in eig_before.iter().zip(eig_after.iter()) {
        assert!((a - b).abs() < 1e-12, "{eig_before:?} vs {eig_after:?}");
    }
}

#[test]
fn reduce_protects_computational_vertices() {
    let text = branch_config()
        .replace(
            r#"{"label": "c2", "energy": 1.3}"#,
            r#"{"label": "c2", "energy": 1.3, "levels": [0]}"#,
        )
        .replace(r#""qubit_count": 0"#, r#""qubit_count": 1"#)
        .replace(
            r#"{"label": "c3", "energy": 1.4}"#,
            r#"{"label": "c3", "energy": 1.4, "levels": [1]}"#,
        );
    let dir = TempDir::new().unwrap();
    let config_path = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let code = run(&[
        "reduce",
        "-c",
        config_path.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        code, 6,
        "rotation touching a computational vertex must fail"
    );
}

#[test]
fn line_demo_distribution_sums_to_one() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let code = run(&["line-demo", "-o", out.to_str().unwrap(), "--steps", "25"]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(out.join("distribution.csv")).unwrap();
    let mut total = 0.0;
    let mut count = 0;
    for line in csv.lines().skip(1) {
        let (site, p) = line.split_once(',').unwrap();
        let site: i64 = site.parse().unwrap();
        assert!((-25..=25).contains(&site));
        total += p.parse::<f64>().unwrap();
        count += 1;
    }
    assert_eq!(count, 51);
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn sequential_pulses_compose() {
    // Two half-rotations in separate windows equal one pi rotation:
    // |0> -> -|0> on the driven leg.
    let text = lambda_config("resonant", "").replace(
        r#""pulses": [
    {
      "envelope": {"kind": "flat", "t_start": 0.0, "t_gate": 6.283185307179586},
      "components": [{"omega": 5.0, "amp": [0.5, 0.0]}]
    }
  ],"#,
        r#""pulses": [
    {
      "envelope": {"kind": "flat", "t_start": 0.0, "t_gate": 3.141592653589793},
      "components": [{"omega": 5.0, "amp": [0.5, 0.0]}]
    },
    {
      "envelope": {"kind": "flat", "t_start": 4.0, "t_gate": 3.141592653589793},
      "components": [{"omega": 5.0, "amp": [0.5, 0.0]}]
    }
  ],"#,
    );
    let dir = TempDir::new().unwrap();
    let config_path = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let code = run(&[
        "simulate",
        "-c",
        config_path.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("final_state.json")).unwrap()).unwrap();
    let amp0 = record["amplitudes"][0].as_array().unwrap();
    assert!((amp0[0].as_f64().unwrap() + 1.0).abs() < 1e-9, "{record}");
    assert!(amp0[1].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn double_resonance_maps_to_drive_exit_code() {
    let text = lambda_config("resonant", "").replace(
        r#""components": [{"omega": 5.0, "amp": [0.5, 0.0]}]"#,
        r#""components": [{"omega": 5.0, "amp": [0.5, 0.0]}, {"omega": 5.0000000001, "amp": [0.1, 0.0]}]"#,
    );
    let dir = TempDir::new().unwrap();
    let config_path = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let code = run(&[
        "simulate",
        "-c",
        config_path.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 4);
}

#[test]
fn infeasible_cz_integers_map_to_synthesis_exit_code() {
    let text = lambda_config("resonant", "").replace(
        r#""gate": {"name": "z", "n": 0}"#,
        r#""gate": {"name": "cz", "n": 1, "m": 3, "n_a": 1, "n_a_prime": 1}"#,
    );
    let dir = TempDir::new().unwrap();
    let config_path = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let code = run(&[
        "synthesize",
        "cz",
        "-c",
        config_path.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 7);
}
