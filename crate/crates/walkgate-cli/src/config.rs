//! Strict configuration schema: a JSON document with vertices, edges,
//! pulses, simulation settings, the initial state, and optional gate and
//! reduce sections. Unknown keys are rejected; parse and validation errors
//! carry a path into the document.

use std::collections::BTreeMap;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use walkgate_core::drive::{Envelope, Pulse, PulseComponent};
use walkgate_core::graph::{validate_graph, Edge, Graph, Vertex};
use walkgate_core::propagator::WalkerState;
use walkgate_core::C64;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub qubit_count: usize,
    pub vertices: Vec<VertexConfig>,
    pub edges: Vec<EdgeConfig>,
    #[serde(default)]
    pub pulses: Vec<PulseConfig>,
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub initial_state: Option<InitialStateConfig>,
    #[serde(default)]
    pub gate: Option<GateConfig>,
    #[serde(default)]
    pub reduce: Option<ReduceConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexConfig {
    pub label: String,
    pub energy: f64,
    /// Per-qubit level indices; computational states carry all levels <= 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub hi: String,
    pub lo: String,
    /// Complex coupling as [re, im].
    pub g: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub envelope: EnvelopeConfig,
    pub components: Vec<ComponentConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    /// One of "flat", "raised_cosine", "gaussian".
    pub kind: String,
    pub t_start: f64,
    pub t_gate: f64,
    /// Gaussian width; required for kind "gaussian".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Gaussian cutoff in units of sigma; required for kind "gaussian".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub omega: f64,
    pub amp: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Full,
    Rwa,
    Resonant,
    Compare,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_coin_levels")]
    pub coin_levels: usize,
    #[serde(default = "default_resonance_tol")]
    pub resonance_tol: f64,
    #[serde(default = "default_leakage_threshold")]
    pub leakage_threshold: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_coin_levels() -> usize {
    6
}
fn default_resonance_tol() -> f64 {
    1e-9
}
fn default_leakage_threshold() -> f64 {
    1e-6
}
fn default_samples() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateConfig {
    /// label -> [re, im]; must be normalized.
    pub amplitudes: BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct GateConfig {
    pub name: GateNameConfig,
    #[serde(default)]
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_a: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_a_prime: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateNameConfig {
    Z,
    H,
    Cz,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct ReduceConfig {
    pub kind: ReduceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<BTreeMap<String, String>>,
    /// Vertices the rotation must not touch; defaults to the computational
    /// states.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protected: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReduceKind {
    Branch,
    DiagonalLoop,
    Loop6,
    Loop4Inverse,
}

/// Parse with a document path attached to any serde error.
pub fn parse_config(text: &str) -> Result<Config, CliError> {
    let deserializer = &mut serde_json::Deserializer::from_str(text);
    let config: Config = serde_path_to_error::deserialize(deserializer)
        .map_err(|e| CliError::Config(format!("{}: {}", e.path(), e.inner())))?;
    validate(&config)?;
    Ok(config)
}

fn validate(config: &Config) -> Result<(), CliError> {
    let graph = config.graph();
    let diagnostics = validate_graph(&graph);
    if !diagnostics.is_empty() {
        let rendered: Vec<String> = diagnostics
            .iter()
            .map(|d| format!("{:?} {:?}", d.kind, d.labels))
            .collect();
        return Err(CliError::Graph(rendered.join("; ")));
    }

    for (i, pulse) in config.pulses.iter().enumerate() {
        if pulse.envelope.t_gate <= 0.0 {
            return Err(CliError::Config(format!(
                "pulses[{i}].envelope.t_gate: must be positive"
            )));
        }
        match pulse.envelope.kind.as_str() {
            "flat" | "raised_cosine" => {}
            "gaussian" => {
                if pulse.envelope.sigma.map(|s| s <= 0.0).unwrap_or(true) {
                    return Err(CliError::Config(format!(
                        "pulses[{i}].envelope.sigma: positive value required for gaussian"
                    )));
                }
                if pulse.envelope.truncation.map(|t| t <= 0.0).unwrap_or(true) {
                    return Err(CliError::Config(format!(
                        "pulses[{i}].envelope.truncation: positive value required for gaussian"
                    )));
                }
            }
            other => {
                return Err(CliError::Config(format!(
                    "pulses[{i}].envelope.kind: unknown envelope '{other}'"
                )))
            }
        }
        for (j, component) in pulse.components.iter().enumerate() {
            if component.omega <= 0.0 {
                return Err(CliError::Config(format!(
                    "pulses[{i}].components[{j}].omega: must be positive"
                )));
            }
            for (k, other) in pulse.components.iter().enumerate().skip(j + 1) {
                if component.omega == other.omega {
                    return Err(CliError::Config(format!(
                        "pulses[{i}].components[{k}].omega: duplicate frequency {}",
                        other.omega
                    )));
                }
            }
        }
    }
    // Pulses are sequenced; their windows must not overlap.
    for (i, a) in config.pulses.iter().enumerate() {
        for (j, b) in config.pulses.iter().enumerate().skip(i + 1) {
            let (a0, a1) = (a.envelope.t_start, a.envelope.t_start + a.envelope.t_gate);
            let (b0, b1) = (b.envelope.t_start, b.envelope.t_start + b.envelope.t_gate);
            if a0 < b1 && b0 < a1 {
                return Err(CliError::Config(format!(
                    "pulses[{j}]: pulses overlap (windows [{a0}, {a1}] and [{b0}, {b1}])"
                )));
            }
        }
    }

    if needs_dt(config.simulation.mode) && config.simulation.dt.is_none() {
        return Err(CliError::Config(format!(
            "simulation.dt: required for mode '{}'",
            mode_name(config.simulation.mode)
        )));
    }
    if let Some(dt) = config.simulation.dt {
        if dt <= 0.0 {
            return Err(CliError::Config("simulation.dt: must be positive".into()));
        }
    }
    if config.simulation.coin_levels < 1 {
        return Err(CliError::Config(
            "simulation.coin_levels: must be at least 1".into(),
        ));
    }

    if let Some(initial) = &config.initial_state {
        let mut norm = 0.0;
        for (label, amp) in &initial.amplitudes {
            if graph.vertex_index(label).is_none() {
                return Err(CliError::Config(format!(
                    "initial_state.amplitudes.{label}: unknown vertex"
                )));
            }
            norm += amp[0] * amp[0] + amp[1] * amp[1];
        }
        if (norm.sqrt() - 1.0).abs() > 1e-9 {
            return Err(CliError::Config(format!(
                "initial_state.amplitudes: norm {} deviates from 1",
                norm.sqrt()
            )));
        }
    }

    if let Some(gate) = &config.gate {
        if gate.name == GateNameConfig::Cz {
            for (field, value) in [
                ("m", gate.m),
                ("n_a", gate.n_a),
                ("n_a_prime", gate.n_a_prime),
            ] {
                if value.is_none() {
                    return Err(CliError::Config(format!(
                        "gate.{field}: required for the cz gate"
                    )));
                }
            }
        }
    }

    Ok(())
}

pub fn needs_dt(mode: Mode) -> bool {
    matches!(mode, Mode::Exact | Mode::Full | Mode::Rwa | Mode::Compare)
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Exact => "exact",
        Mode::Full => "full",
        Mode::Rwa => "rwa",
        Mode::Resonant => "resonant",
        Mode::Compare => "compare",
    }
}

impl Config {
    pub fn graph(&self) -> Graph {
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                let computational = v
                    .levels
                    .as_ref()
                    .map(|l| l.len() == self.qubit_count && l.iter().all(|&x| x <= 1))
                    .unwrap_or(false);
                match (&v.levels, computational) {
                    (Some(levels), true) => {
                        Vertex::qubit(v.label.clone(), v.energy, levels.clone())
                    }
                    (Some(levels), false) => {
                        Vertex::auxiliary_with_levels(v.label.clone(), v.energy, levels.clone())
                    }
                    (None, _) => Vertex::auxiliary(v.label.clone(), v.energy),
                }
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(e.hi.clone(), e.lo.clone(), C64::new(e.g[0], e.g[1])))
            .collect();
        Graph::new(vertices, edges, self.qubit_count)
    }

    pub fn pulse(&self, index: usize) -> Result<Pulse, CliError> {
        let p = self
            .pulses
            .get(index)
            .ok_or_else(|| CliError::Config(format!("pulses[{index}]: missing")))?;
        let envelope = match p.envelope.kind.as_str() {
            "flat" => Envelope::flat(p.envelope.t_start, p.envelope.t_gate),
            "raised_cosine" => Envelope::raised_cosine(p.envelope.t_start, p.envelope.t_gate),
            "gaussian" => Envelope::gaussian(
                p.envelope.t_start,
                p.envelope.t_gate,
                p.envelope.sigma.unwrap_or(1.0),
                p.envelope.truncation.unwrap_or(3.0),
            ),
            other => {
                return Err(CliError::Config(format!(
                    "pulses[{index}].envelope.kind: unknown envelope '{other}'"
                )))
            }
        };
        let components = p
            .components
            .iter()
            .map(|c| PulseComponent::new(c.omega, C64::new(c.amp[0], c.amp[1])))
            .collect();
        Ok(Pulse::new(envelope, components))
    }

    pub fn initial_walker(&self, graph: &Graph) -> Result<WalkerState, CliError> {
        let initial = self
            .initial_state
            .as_ref()
            .ok_or_else(|| CliError::Config("initial_state: required for this command".into()))?;
        let mut amplitudes = Array1::<C64>::zeros(graph.dim());
        for (label, amp) in &initial.amplitudes {
            let idx = graph.vertex_index(label).ok_or_else(|| {
                CliError::Config(format!("initial_state.amplitudes.{label}: unknown vertex"))
            })?;
            amplitudes[idx] = C64::new(amp[0], amp[1]);
        }
        WalkerState::new(amplitudes).map_err(CliError::Core)
    }
}

/// Emit a graph back in the config schema (used by `reduce`).
pub fn graph_to_config_sections(graph: &Graph) -> (Vec<VertexConfig>, Vec<EdgeConfig>) {
    let vertices = graph
        .vertices
        .iter()
        .map(|v| VertexConfig {
            label: v.label.clone(),
            energy: v.energy,
            levels: v.levels().map(|l| l.to_vec()),
        })
        .collect();
    let edges = graph
        .edges
        .iter()
        .map(|e| EdgeConfig {
            hi: e.hi.clone(),
            lo: e.lo.clone(),
            g: [e.g.re, e.g.im],
        })
        .collect();
    (vertices, edges)
}
