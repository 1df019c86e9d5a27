//! Ready-made state graphs for common gate constructions.

use crate::graph::{Edge, Graph, Vertex};
use crate::C64;

/// A three-level Lambda system: computational `0`, `1` and a shared
/// auxiliary `2` coupled to both.
pub fn lambda_system(e0: f64, e1: f64, e_aux: f64, g0: C64, g1: C64) -> Graph {
    Graph::new(
        vec![
            Vertex::qubit("0", e0, vec![0]),
            Vertex::qubit("1", e1, vec![1]),
            Vertex::auxiliary("2", e_aux),
        ],
        vec![Edge::new("2", "0", g0), Edge::new("2", "1", g1)],
        1,
    )
}

/// A two-level system with one driven transition; computational `0` with an
/// auxiliary leg `2`, plus an uncoupled `1`, which is the minimal Z-gate
/// graph.
pub fn z_leg_system(e0: f64, e1: f64, e_aux: f64, g: C64) -> Graph {
    Graph::new(
        vec![
            Vertex::qubit("0", e0, vec![0]),
            Vertex::qubit("1", e1, vec![1]),
            Vertex::auxiliary("2", e_aux),
        ],
        vec![Edge::new("2", "0", g)],
        1,
    )
}

/// Parameters of the two-qubit register used by the CZ construction: two
/// three-level systems driven on their 1 <-> 2 transitions, with an
/// interaction that shifts the doubly-excited `|22>` state.
#[derive(Debug, Clone, Copy)]
pub struct CzRegisterParams {
    /// First-qubit level energies `(E_level0, E_level1, E_level2)`.
    pub single_a: [f64; 3],
    /// Second-qubit level energies; spectrally distinct from the first so
    /// the two qubits are separately addressable.
    pub single_b: [f64; 3],
    /// Energy shift of the `|22>` state.
    pub shift_22: f64,
    /// Dipole coupling of every 1 <-> 2 transition.
    pub g: C64,
}

impl Default for CzRegisterParams {
    fn default() -> Self {
        CzRegisterParams {
            single_a: [0.0, 1.0, 6.0],
            single_b: [0.0, 0.9, 5.2],
            shift_22: 1.1,
            g: C64::new(0.4, 0.0),
        }
    }
}

/// Two qutrits with 1 <-> 2 transitions driven on both qubits.
///
/// With `shift_22 != 0` the `|22>`-adjacent edges fall out of the symmetric
/// classes (the gaps `|12>-|22>` and `|21>-|22>` are shifted), which is what
/// entangling walks probe; with a zero shift the register is non-interacting
/// and every walk generator is a sum of single-qubit terms.
pub fn cz_register(params: CzRegisterParams) -> Graph {
    let energy = |i: u32, j: u32| -> f64 {
        let mut e = params.single_a[i as usize] + params.single_b[j as usize];
        if i == 2 && j == 2 {
            e += params.shift_22;
        }
        e
    };
    let mut vertices = Vec::new();
    for i in 0..3u32 {
        for j in 0..3u32 {
            let label = format!("{i}{j}");
            if i <= 1 && j <= 1 {
                vertices.push(Vertex::qubit(label, energy(i, j), vec![i, j]));
            } else {
                vertices.push(Vertex::auxiliary_with_levels(
                    label,
                    energy(i, j),
                    vec![i, j],
                ));
            }
        }
    }
    // Second-qubit 1 <-> 2 transitions for every first-qubit level, and the
    // mirror set; the higher-energy endpoint is always the level-2 state.
    let edges = vec![
        Edge::new("02", "01", params.g),
        Edge::new("12", "11", params.g),
        Edge::new("22", "21", params.g),
        Edge::new("20", "10", params.g),
        Edge::new("21", "11", params.g),
        Edge::new("22", "12", params.g),
    ];
    Graph::new(vertices, edges, 2)
}
