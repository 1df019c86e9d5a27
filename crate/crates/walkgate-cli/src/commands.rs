//! Subcommand implementations: each reads the parsed config, runs the
//! corresponding core operations, writes artifacts into the output
//! directory, and prints a short summary.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use walkgate_core::drive::Pulse;
use walkgate_core::gates::{
    gate_spec_for, synthesize_cz, synthesize_hadamard, synthesize_z, target_unitary, GateName,
    SynthesisResult, VerifyMode,
};
use walkgate_core::graph::Graph;
use walkgate_core::linalg::unitarity_deviation;
use walkgate_core::propagator::{
    approximation_report, coined_walk_run, exact_propagator, hadamard_coin, line_walk_demo,
    resonant_walk_run, CoinedMode, CoinedOptions, PropagationResult, WalkerState,
};
use walkgate_core::reduction::{
    apply_rotation_generic, coupling_between, energy_diagonal, find_diagonal_loops,
    find_one_segment_branches, unique_match, LocalRotation, ReductionReport,
};
use walkgate_core::{Error as CoreError, C64};

use crate::config::{
    graph_to_config_sections, mode_name, Config, GateNameConfig, Mode, ReduceConfig, ReduceKind,
};
use crate::error::CliError;
use crate::output::{fmt_f64, matrix_record, write_json, write_trajectory_csv, FinalStateRecord};

fn labels(graph: &Graph) -> Vec<String> {
    graph.vertices.iter().map(|v| v.label.clone()).collect()
}

fn coined_options(config: &Config) -> CoinedOptions {
    CoinedOptions {
        leakage_threshold: config.simulation.leakage_threshold,
        resonance_tol: config.simulation.resonance_tol,
        sample_target: config.simulation.samples,
        coupling: None,
    }
}

fn require_dt(config: &Config, mode: Mode) -> Result<f64, CliError> {
    config.simulation.dt.ok_or_else(|| {
        CliError::Config(format!(
            "simulation.dt: required for mode '{}'",
            mode_name(mode)
        ))
    })
}

fn run_mode(
    config: &Config,
    graph: &Graph,
    pulse: &Pulse,
    initial: &WalkerState,
    mode: Mode,
) -> Result<PropagationResult, CliError> {
    let samples = config.simulation.samples;
    Ok(match mode {
        Mode::Resonant => resonant_walk_run(
            graph,
            pulse,
            initial,
            config.simulation.resonance_tol,
            samples,
        )?,
        Mode::Exact => {
            let dt = require_dt(config, mode)?;
            exact_propagator(graph, pulse, initial, dt, samples)?.1
        }
        Mode::Full | Mode::Rwa => {
            let dt = require_dt(config, mode)?;
            let coined_mode = if mode == Mode::Full {
                CoinedMode::Full
            } else {
                CoinedMode::Rwa
            };
            coined_walk_run(
                graph,
                pulse,
                initial,
                dt,
                config.simulation.coin_levels,
                coined_mode,
                &coined_options(config),
            )?
        }
        Mode::Compare => {
            return Err(CliError::Usage(
                "mode 'compare' is served by the compare subcommand".into(),
            ))
        }
    })
}

pub fn simulate(config: &Config, out_dir: &Path) -> Result<(), CliError> {
    let started = std::time::Instant::now();
    let graph = config.graph();
    let initial = config.initial_walker(&graph)?;
    let mode = config.simulation.mode;
    if mode == Mode::Compare {
        return compare(config, out_dir);
    }
    if config.pulses.is_empty() {
        return Err(CliError::Config(
            "pulses: at least one pulse required".into(),
        ));
    }

    // Pulses are sequenced in time; each walk starts from the previous
    // walker with fresh coins.
    let mut order: Vec<usize> = (0..config.pulses.len()).collect();
    order.sort_by(|&i, &j| {
        config.pulses[i]
            .envelope
            .t_start
            .partial_cmp(&config.pulses[j].envelope.t_start)
            .unwrap()
    });

    let mut walker = initial;
    let mut combined: Option<PropagationResult> = None;
    for index in order {
        let pulse = config.pulse(index)?;
        let result = run_mode(config, &graph, &pulse, &walker, mode)?;
        walker = result.final_walker.clone();
        combined = Some(match combined {
            None => result,
            Some(mut acc) => {
                acc.trajectory.extend(result.trajectory);
                acc.norm_drift += result.norm_drift;
                acc.boundary_leakage += result.boundary_leakage;
                acc.coin_purity = acc.coin_purity.min(result.coin_purity);
                acc.warnings.extend(result.warnings);
                acc.final_walker = result.final_walker;
                acc
            }
        });
    }
    let result = combined.expect("at least one pulse ran");

    let labels = labels(&graph);
    write_trajectory_csv(&out_dir.join("trajectory.csv"), &labels, &result)?;
    write_json(
        &out_dir.join("final_state.json"),
        &FinalStateRecord::from_result(&labels, &result),
    )?;
    for warning in &result.warnings {
        eprintln!("warning: {warning}");
    }
    println!(
        "simulate[{}]: norm drift {}, boundary leakage {}, coin purity {}",
        mode_name(mode),
        fmt_f64(result.norm_drift),
        fmt_f64(result.boundary_leakage),
        fmt_f64(result.coin_purity)
    );
    eprintln!("elapsed {} ms", started.elapsed().as_millis());
    Ok(())
}

#[derive(Serialize)]
struct CompareRecord {
    distance_exact_full: f64,
    distance_full_rwa: f64,
    distance_rwa_resonant: f64,
    purity_full: f64,
    purity_rwa: f64,
    leakage_full: f64,
    leakage_rwa: f64,
}

pub fn compare(config: &Config, out_dir: &Path) -> Result<(), CliError> {
    let started = std::time::Instant::now();
    let graph = config.graph();
    let pulse = config.pulse(0)?;
    let initial = config.initial_walker(&graph)?;
    let dt = require_dt(config, Mode::Compare)?;
    let report = approximation_report(
        &graph,
        &pulse,
        &initial,
        dt,
        config.simulation.coin_levels,
        &coined_options(config),
    )?;
    let record = CompareRecord {
        distance_exact_full: report.distance_exact_full,
        distance_full_rwa: report.distance_full_rwa,
        distance_rwa_resonant: report.distance_rwa_resonant,
        purity_full: report.purity_full,
        purity_rwa: report.purity_rwa,
        leakage_full: report.leakage_full,
        leakage_rwa: report.leakage_rwa,
    };
    write_json(&out_dir.join("report.json"), &record)?;
    println!(
        "compare: exact-full {} full-rwa {} rwa-resonant {}",
        fmt_f64(report.distance_exact_full),
        fmt_f64(report.distance_full_rwa),
        fmt_f64(report.distance_rwa_resonant)
    );
    eprintln!("elapsed {} ms", started.elapsed().as_millis());
    Ok(())
}

#[derive(Serialize)]
struct SynthesisRecord {
    gate: String,
    /// class_id -> amplitude as [re, im].
    omegas: BTreeMap<usize, [f64; 2]>,
    tau_gate: f64,
    integers: Option<[i64; 4]>,
    achieved_fidelity: f64,
    refined: bool,
    pulse: PulseRecord,
}

#[derive(Serialize)]
struct PulseRecord {
    t_start: f64,
    t_gate: f64,
    components: Vec<ComponentRecord>,
}

#[derive(Serialize)]
struct ComponentRecord {
    omega: f64,
    amp: [f64; 2],
}

fn pulse_record(pulse: &Pulse) -> PulseRecord {
    PulseRecord {
        t_start: pulse.envelope.t_start,
        t_gate: pulse.envelope.t_gate,
        components: pulse
            .components
            .iter()
            .map(|c| ComponentRecord {
                omega: c.omega,
                amp: [c.amp.re, c.amp.im],
            })
            .collect(),
    }
}

fn synthesis_record(gate: &str, synthesis: &SynthesisResult) -> SynthesisRecord {
    SynthesisRecord {
        gate: gate.to_string(),
        omegas: synthesis
            .omegas
            .iter()
            .map(|(&k, v)| (k, [v.re, v.im]))
            .collect(),
        tau_gate: synthesis.tau_gate,
        integers: synthesis.integers.map(|i| [i.n, i.m, i.n_a, i.n_a_prime]),
        achieved_fidelity: synthesis.achieved_fidelity,
        refined: synthesis.refined,
        pulse: pulse_record(&synthesis.pulse),
    }
}

pub fn run_synthesis(config: &Config, gate: GateNameConfig) -> Result<SynthesisResult, CliError> {
    let graph = config.graph();
    let gate_config = config.gate.clone();
    let n = gate_config.as_ref().map(|g| g.n).unwrap_or(0);
    let synthesis = match gate {
        GateNameConfig::Z => synthesize_z(&graph, n)?,
        GateNameConfig::H => synthesize_hadamard(&graph, n)?,
        GateNameConfig::Cz => {
            let g = gate_config.ok_or_else(|| {
                CliError::Config("gate: section with cz integers required".into())
            })?;
            let missing = || CliError::Config("gate: cz needs n, m, n_a, n_a_prime".into());
            synthesize_cz(
                &graph,
                g.n as i64,
                g.m.ok_or_else(missing)?,
                g.n_a.ok_or_else(missing)?,
                g.n_a_prime.ok_or_else(missing)?,
            )?
        }
    };
    Ok(synthesis)
}

fn gate_name_str(gate: GateNameConfig) -> &'static str {
    match gate {
        GateNameConfig::Z => "z",
        GateNameConfig::H => "h",
        GateNameConfig::Cz => "cz",
    }
}

pub fn synthesize(config: &Config, out_dir: &Path, gate: GateNameConfig) -> Result<(), CliError> {
    let synthesis = run_synthesis(config, gate)?;
    write_json(
        &out_dir.join("synthesis.json"),
        &synthesis_record(gate_name_str(gate), &synthesis),
    )?;
    println!(
        "synthesize[{}]: fidelity {} tau_gate {}",
        gate_name_str(gate),
        fmt_f64(synthesis.achieved_fidelity),
        fmt_f64(synthesis.tau_gate)
    );
    Ok(())
}

#[derive(Serialize)]
struct WalkRecord {
    basis: String,
    return_probability: f64,
    phase: f64,
    incomplete: bool,
}

#[derive(Serialize)]
struct VerifyRecord {
    gate: String,
    mode: String,
    fidelity: f64,
    unitary_deviation: f64,
    incomplete_return: bool,
    walks: Vec<WalkRecord>,
}

pub fn verify(config: &Config, out_dir: &Path) -> Result<(), CliError> {
    let started = std::time::Instant::now();
    let gate = config
        .gate
        .as_ref()
        .ok_or_else(|| CliError::Config("gate: section required for verify".into()))?
        .name;
    let graph = config.graph();
    let synthesis = run_synthesis(config, gate)?;

    let target = match gate {
        GateNameConfig::Z => target_unitary(GateName::Z, graph.qubit_count)?,
        GateNameConfig::H => target_unitary(GateName::H, graph.qubit_count)?,
        GateNameConfig::Cz => target_unitary(GateName::Cz, graph.qubit_count)?,
    };
    let core_name = match gate {
        GateNameConfig::Z => GateName::Z,
        GateNameConfig::H => GateName::H,
        GateNameConfig::Cz => GateName::Cz,
    };
    let spec = gate_spec_for(&graph, core_name, target)?;

    let mode = config.simulation.mode;
    let verify_mode = match mode {
        Mode::Resonant => VerifyMode::Resonant,
        Mode::Exact => VerifyMode::Exact {
            dt: require_dt(config, mode)?,
        },
        Mode::Full => VerifyMode::Coined {
            dt: require_dt(config, mode)?,
            truncation: config.simulation.coin_levels,
            mode: CoinedMode::Full,
        },
        Mode::Rwa => VerifyMode::Coined {
            dt: require_dt(config, mode)?,
            truncation: config.simulation.coin_levels,
            mode: CoinedMode::Rwa,
        },
        Mode::Compare => {
            return Err(CliError::Usage(
                "verify does not support mode 'compare'".into(),
            ))
        }
    };

    let verification =
        walkgate_core::gates::verify_gate(&spec, &synthesis.pulse, &graph, &verify_mode)?;
    let record = VerifyRecord {
        gate: gate_name_str(gate).to_string(),
        mode: mode_name(mode).to_string(),
        fidelity: verification.fidelity,
        unitary_deviation: verification.unitary_deviation,
        incomplete_return: verification.incomplete_return,
        walks: verification
            .walks
            .iter()
            .map(|w| WalkRecord {
                basis: w.basis_label.clone(),
                return_probability: w.return_probability,
                phase: w.phase,
                incomplete: w.incomplete,
            })
            .collect(),
    };
    write_json(&out_dir.join("report.json"), &record)?;
    write_json(
        &out_dir.join("unitary.json"),
        &matrix_record(&verification.achieved),
    )?;
    write_json(
        &out_dir.join("synthesis.json"),
        &synthesis_record(gate_name_str(gate), &synthesis),
    )?;
    if verification.incomplete_return {
        eprintln!("warning: incomplete return flagged on at least one walk");
    }
    println!("fidelity {}", fmt_f64(verification.fidelity));
    eprintln!("elapsed {} ms", started.elapsed().as_millis());
    Ok(())
}

#[derive(Serialize)]
struct ReductionRecord {
    kind: String,
    consumed_labels: Vec<String>,
    introduced_labels: Vec<String>,
    /// Rotation rows over the consumed labels, as [re, im] pairs.
    rotation: Vec<Vec<[f64; 2]>>,
    vertex_order: Vec<String>,
    /// Transformed couplings <from|H'|to>.
    g_prime: Vec<EdgeAmpRecord>,
    /// Transformed diagonal-term matrix in vertex_order.
    g_doubleprime: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct EdgeAmpRecord {
    from: String,
    to: String,
    amp: [f64; 2],
}

fn reduction_record(kind: &str, report: &ReductionReport) -> ReductionRecord {
    ReductionRecord {
        kind: kind.to_string(),
        consumed_labels: report.consumed_labels.clone(),
        introduced_labels: report.introduced_labels.clone(),
        rotation: matrix_record(&report.rotation.matrix),
        vertex_order: report.vertex_order.clone(),
        g_prime: report
            .g_prime
            .iter()
            .map(|e| EdgeAmpRecord {
                from: e.from.clone(),
                to: e.to.clone(),
                amp: [e.amp.re, e.amp.im],
            })
            .collect(),
        g_doubleprime: matrix_record(&report.g_doubleprime),
    }
}

fn need_coupling(graph: &Graph, a: &str, b: &str) -> Result<C64, CliError> {
    coupling_between(graph, a, b).ok_or_else(|| {
        CliError::Core(CoreError::InvalidArgument(format!(
            "no edge between {a} and {b}"
        )))
    })
}

fn fresh_labels(graph: &Graph, bases: &[&str]) -> Vec<String> {
    bases
        .iter()
        .map(|base| {
            if graph.vertex(base).is_none() {
                return base.to_string();
            }
            let mut k = 2usize;
            loop {
                let candidate = format!("{base}{k}");
                if graph.vertex(&candidate).is_none() {
                    return candidate;
                }
                k += 1;
            }
        })
        .collect()
}

fn label_of<'a>(
    labels: &'a Option<BTreeMap<String, String>>,
    key: &str,
) -> Result<&'a str, CliError> {
    labels
        .as_ref()
        .and_then(|m| m.get(key))
        .map(|s| s.as_str())
        .ok_or_else(|| CliError::Config(format!("reduce.labels.{key}: required for this kind")))
}

/// Binary rotation onto (p, q)-weighted superpositions of two states.
fn binary_rotation_matrix(p: C64, q: C64) -> Result<ndarray::Array2<C64>, CliError> {
    let w = (p.norm_sqr() + q.norm_sqr()).sqrt();
    if w == 0.0 {
        return Err(CliError::Core(CoreError::DegenerateRotation(
            "coupling pair vanishes".into(),
        )));
    }
    let mut m = ndarray::Array2::<C64>::zeros((2, 2));
    m[[0, 0]] = p.conj() / w;
    m[[0, 1]] = q.conj() / w;
    m[[1, 0]] = q / w;
    m[[1, 1]] = -p / w;
    Ok(m)
}

fn build_reduction_rotation(
    graph: &Graph,
    reduce: &ReduceConfig,
) -> Result<LocalRotation, CliError> {
    match reduce.kind {
        ReduceKind::Branch => {
            let (v1, v2, v1p) = match &reduce.labels {
                Some(_) => {
                    let v1 = label_of(&reduce.labels, "v1")?.to_string();
                    let v2 = label_of(&reduce.labels, "v2")?.to_string();
                    let v1p = label_of(&reduce.labels, "v1p")?.to_string();
                    (v1, v2, v1p)
                }
                None => {
                    let found =
                        unique_match(find_one_segment_branches(graph), "one-segment branch")?;
                    (found.v1, found.v2, found.v1p)
                }
            };
            let a = need_coupling(graph, &v1, &v2)?;
            let ap = need_coupling(graph, &v1, &v1p)?;
            let introduced = fresh_labels(graph, &["x", "xp"]);
            Ok(LocalRotation {
                support: vec![v2, v1p],
                introduced,
                matrix: binary_rotation_matrix(a, ap)?,
            })
        }
        ReduceKind::DiagonalLoop => {
            let (v0, v1, v3) = match &reduce.labels {
                Some(_) => {
                    let v0 = label_of(&reduce.labels, "v0")?.to_string();
                    let v1 = label_of(&reduce.labels, "v1")?.to_string();
                    let v3 = label_of(&reduce.labels, "v3")?.to_string();
                    (v0, v1, v3)
                }
                None => {
                    let found = unique_match(find_diagonal_loops(graph), "diagonal loop")?;
                    (found.v0, found.v1, found.v3)
                }
            };
            let a = need_coupling(graph, &v0, &v1)?;
            let d = need_coupling(graph, &v0, &v3)?;
            let introduced = fresh_labels(graph, &["x", "xp"]);
            Ok(LocalRotation {
                support: vec![v1, v3],
                introduced,
                matrix: binary_rotation_matrix(a, d)?,
            })
        }
        ReduceKind::Loop6 => {
            let v0 = label_of(&reduce.labels, "v0")?.to_string();
            let v1 = label_of(&reduce.labels, "v1")?.to_string();
            let v2 = label_of(&reduce.labels, "v2")?.to_string();
            let v1p = label_of(&reduce.labels, "v1p")?.to_string();
            let v2p = label_of(&reduce.labels, "v2p")?.to_string();
            let a = need_coupling(graph, &v0, &v1)?;
            let b = need_coupling(graph, &v0, &v2)?;
            let c1 = need_coupling(graph, &v1, &v1p)?;
            let c2 = need_coupling(graph, &v2, &v2p)?;
            let mx = binary_rotation_matrix(a, b)?;
            let my = binary_rotation_matrix(a * c1, b * c2)?;
            let mut m = ndarray::Array2::<C64>::zeros((4, 4));
            for i in 0..2 {
                for j in 0..2 {
                    m[[i, j]] = mx[[i, j]];
                    m[[2 + i, 2 + j]] = my[[i, j]];
                }
            }
            let introduced = fresh_labels(graph, &["x", "xp", "y", "yp"]);
            Ok(LocalRotation {
                support: vec![v1, v2, v1p, v2p],
                introduced,
                matrix: m,
            })
        }
        ReduceKind::Loop4Inverse => {
            let v1 = label_of(&reduce.labels, "v1")?.to_string();
            let vx = label_of(&reduce.labels, "vx")?.to_string();
            let v3 = label_of(&reduce.labels, "v3")?.to_string();
            let vxp = label_of(&reduce.labels, "vxp")?.to_string();
            let v2p = label_of(&reduce.labels, "v2p")?.to_string();
            let a = need_coupling(graph, &v1, &vx)?;
            let b = need_coupling(graph, &vx, &v3)?;
            let bp = need_coupling(graph, &v3, &vxp)?;
            let ap = need_coupling(graph, &vx, &v2p)?;
            let cp = need_coupling(graph, &v2p, &vxp)?;
            // The loop has one parameter too many; reject inconsistent input.
            let lhs = bp * ap.conj();
            let rhs = cp * b.conj();
            let scale = lhs.norm().max(rhs.norm());
            if scale > 0.0 && (lhs - rhs).norm() > 1e-9 * scale {
                return Err(CliError::Core(CoreError::ConditionViolated {
                    lhs: if b.norm() > 0.0 { bp / b.conj() } else { lhs },
                    rhs: if ap.norm() > 0.0 { cp / ap.conj() } else { rhs },
                }));
            }
            let w_y = (b.norm_sqr() + bp.norm_sqr()).sqrt();
            if w_y == 0.0 {
                return Err(CliError::Core(CoreError::DegenerateRotation(
                    "loop couplings vanish".into(),
                )));
            }
            let a_rec = a * b / w_y;
            let ap_rec = a * bp / w_y;
            let forward = binary_rotation_matrix(a_rec, ap_rec)?;
            let inverse = forward.t().mapv(|z| z.conj());
            let introduced = fresh_labels(graph, &["u", "up"]);
            Ok(LocalRotation {
                support: vec![vx, vxp],
                introduced,
                matrix: inverse,
            })
        }
    }
}

pub fn reduce(config: &Config, out_dir: &Path) -> Result<(), CliError> {
    let graph = config.graph();
    let reduce_config = config.reduce.as_ref().ok_or_else(|| {
        CliError::Config("reduce: section required for the reduce command".into())
    })?;

    let protected: Vec<String> = match &reduce_config.protected {
        Some(listed) => listed.clone(),
        None => graph
            .vertices
            .iter()
            .filter(|v| v.is_computational())
            .map(|v| v.label.clone())
            .collect(),
    };

    let rotation = build_reduction_rotation(&graph, reduce_config)?;
    let report = apply_rotation_generic(&graph, &energy_diagonal(&graph), &rotation, &protected)?;

    // Reassemble a graph: on-site energies from the diagonal of G''; any
    // cross terms stay in the report as the extra walk generator.
    let new_vertices: Vec<walkgate_core::graph::Vertex> = report
        .vertex_order
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let energy = report.g_doubleprime[[i, i]].re;
            match graph.vertex(label) {
                Some(old) => {
                    let mut v = old.clone();
                    v.energy = energy;
                    v
                }
                None => walkgate_core::graph::Vertex::auxiliary(label.clone(), energy),
            }
        })
        .collect();
    let mut new_edges = Vec::new();
    for edge in &report.g_prime {
        let e_from = new_vertices
            .iter()
            .find(|v| v.label == edge.from)
            .unwrap()
            .energy;
        let e_to = new_vertices
            .iter()
            .find(|v| v.label == edge.to)
            .unwrap()
            .energy;
        let (hi, lo, g) = if e_from >= e_to {
            (edge.from.clone(), edge.to.clone(), edge.amp)
        } else {
            (edge.to.clone(), edge.from.clone(), edge.amp.conj())
        };
        new_edges.push(walkgate_core::graph::Edge::new(hi, lo, g));
    }
    let reduced = Graph::new(new_vertices, new_edges, graph.qubit_count);

    let (vertices, edges) = graph_to_config_sections(&reduced);
    let emitted = Config {
        qubit_count: config.qubit_count,
        vertices,
        edges,
        pulses: config.pulses.clone(),
        simulation: config.simulation.clone(),
        initial_state: None,
        gate: None,
        reduce: None,
    };
    write_json(&out_dir.join("reduced_graph.json"), &emitted)?;
    let kind = match reduce_config.kind {
        ReduceKind::Branch => "branch",
        ReduceKind::DiagonalLoop => "diagonal_loop",
        ReduceKind::Loop6 => "loop6",
        ReduceKind::Loop4Inverse => "loop4_inverse",
    };
    write_json(
        &out_dir.join("reduction_report.json"),
        &reduction_record(kind, &report),
    )?;
    println!(
        "reduce[{kind}]: consumed {:?}, introduced {:?}, {} transformed couplings",
        report.consumed_labels,
        report.introduced_labels,
        report.g_prime.len()
    );
    Ok(())
}

pub fn line_demo(out_dir: &Path, steps: usize) -> Result<(), CliError> {
    let coin = hadamard_coin();
    let distribution = line_walk_demo(steps, &coin, (C64::new(1.0, 0.0), C64::new(0.0, 0.0)))?;
    let mut csv = String::from("site,probability\n");
    for (i, p) in distribution.iter().enumerate() {
        let site = i as i64 - steps as i64;
        csv.push_str(&format!("{site},{}\n", fmt_f64(*p)));
    }
    fs::write(out_dir.join("distribution.csv"), csv)?;
    let total: f64 = distribution.iter().sum();
    println!(
        "line-demo: {steps} steps, total probability {}",
        fmt_f64(total)
    );
    Ok(())
}

/// Sanity helper shared by tests: unitarity deviation of a matrix record.
pub fn record_unitarity(record: &[Vec<[f64; 2]>]) -> f64 {
    let n = record.len();
    let mut m = ndarray::Array2::<C64>::zeros((n, n));
    for (i, row) in record.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            m[[i, j]] = C64::new(z[0], z[1]);
        }
    }
    unitarity_deviation(&m)
}
