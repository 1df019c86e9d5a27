//! Quantum gates as quantum walks on graphs of multiqubit basis states.
//!
//! A register of qubits (plus any auxiliary levels) driven by a classical
//! control pulse is modelled as a graph: vertices are basis states with
//! energies, edges carry complex dipole couplings. The evolution produced by
//! the drive is simulated in four modes of decreasing generality:
//!
//! * **exact** — time-ordered product of midpoint-evaluated exponentials of
//!   the full interaction Hamiltonian `V(t)`;
//! * **full coined walk** — the same dynamics rewritten as a coined quantum
//!   walk on the graph tensored with one truncated quasienergy ladder per
//!   drive frequency;
//! * **rwa** — the coined walk with the counter-rotating term dropped;
//! * **resonant** — a continuous-time quantum walk `exp(-i tau Lambda)`
//!   generated by the resonant adjacency matrix, with all coins factored out.
//!
//! On top of the propagators sit the graph-reduction moves (local unitary
//! rotations that turn branches and loops into chains) and analytic gate
//! synthesis for Z, Hadamard and CZ, each verified by running the walks.
//!
//! Conventions used throughout: `hbar = 1`, energies and frequencies share
//! units, edge orientation is `hi` = higher-energy endpoint, and the resonant
//! adjacency matrix is `Lambda[hi, lo] = conj(E_w) * conj(g)` summed over the
//! components resonant with the edge.

pub mod drive;
pub mod error;
pub mod gates;
pub mod graph;
pub mod linalg;
pub mod propagator;
pub mod reduction;
pub mod systems;

pub use error::{Error, Result};

/// Complex scalar used for all amplitudes and matrix entries.
pub type C64 = num_complex::Complex64;
