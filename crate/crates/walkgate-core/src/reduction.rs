//! Local basis rotations that simplify the walk graph: moving a one-segment
//! branch along a chain, trading a square loop for two branches (and back),
//! collapsing a diagonally-inserted square loop into a chain, and reducing a
//! six-segment loop to a four-segment one.
//!
//! Every move rotates states outside the gate domain, producing transformed
//! couplings (the graph `G'`) and a transformed diagonal term (the graph
//! `G''`, generally no longer diagonal). The combined Hamiltonian is
//! similarity-equivalent to the original, so the eigenvalue multiset is the
//! correctness oracle for all of these.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::unitarity_deviation;
use crate::C64;

/// A unitary rotation acting on a subset of basis states.
///
/// Row `k` of `matrix` expands the new state `introduced[k]` over the old
/// states `support`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalRotation {
    pub support: Vec<String>,
    pub introduced: Vec<String>,
    pub matrix: Array2<C64>,
}

impl LocalRotation {
    pub fn validate(&self) -> Result<()> {
        let n = self.support.len();
        if self.matrix.nrows() != n || self.matrix.ncols() != n || self.introduced.len() != n {
            return Err(Error::DimensionMismatch(self.matrix.nrows(), n));
        }
        let dev = unitarity_deviation(&self.matrix);
        if dev > 1e-12 {
            return Err(Error::NotUnitary {
                deviation: dev,
                tol: 1e-12,
            });
        }
        Ok(())
    }
}

/// A coupling in the transformed graph: `amp = <from|H'|to>`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedEdge {
    pub from: String,
    pub to: String,
    pub amp: C64,
}

/// Outcome of one local rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    pub rotation: LocalRotation,
    /// Basis labels indexing `g_doubleprime`, after the rotation.
    pub vertex_order: Vec<String>,
    /// Transformed couplings (graph `G'`).
    pub g_prime: Vec<TransformedEdge>,
    /// Transformed diagonal term (graph `G''`), including the new on-site
    /// energies and any cross terms the rotation produced.
    pub g_doubleprime: Array2<C64>,
    pub consumed_labels: Vec<String>,
    pub introduced_labels: Vec<String>,
}

impl ReductionReport {
    /// `<from|H'|to>` for a transformed coupling, if present.
    pub fn coupling(&self, from: &str, to: &str) -> Option<C64> {
        self.g_prime.iter().find_map(|e| {
            if e.from == from && e.to == to {
                Some(e.amp)
            } else if e.from == to && e.to == from {
                Some(e.amp.conj())
            } else {
                None
            }
        })
    }

    /// Full transformed Hamiltonian `G' + G''` in `vertex_order`.
    pub fn hamiltonian_after(&self) -> Array2<C64> {
        let n = self.vertex_order.len();
        let mut h = self.g_doubleprime.clone();
        for edge in &self.g_prime {
            let i = self
                .vertex_order
                .iter()
                .position(|l| l == &edge.from)
                .unwrap();
            let j = self
                .vertex_order
                .iter()
                .position(|l| l == &edge.to)
                .unwrap();
            h[[i, j]] += edge.amp;
            h[[j, i]] += edge.amp.conj();
        }
        debug_assert_eq!(h.nrows(), n);
        h
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Drop couplings that vanished by interference or degenerate inputs.
fn nonzero_edges(edges: Vec<TransformedEdge>) -> Vec<TransformedEdge> {
    let scale = edges.iter().map(|e| e.amp.norm()).fold(1.0_f64, f64::max);
    edges
        .into_iter()
        .filter(|e| e.amp.norm() > 1e-14 * scale)
        .collect()
}

/// Collect the nonzero strictly-upper-triangle entries of `h` as couplings.
fn matrix_to_edges(h: &Array2<C64>, labels: &[String]) -> Vec<TransformedEdge> {
    let scale = h.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let mut edges = Vec::new();
    for i in 0..h.nrows() {
        for j in (i + 1)..h.ncols() {
            if h[[i, j]].norm() > 1e-14 * scale {
                edges.push(TransformedEdge {
                    from: labels[i].clone(),
                    to: labels[j].clone(),
                    amp: h[[i, j]],
                });
            }
        }
    }
    edges
}

/// `<a|H|b>` read off the stored edges (stored as `g = <hi|H|lo>`).
pub fn coupling_between(graph: &Graph, a: &str, b: &str) -> Option<C64> {
    graph.edges.iter().find_map(|e| {
        if e.hi == a && e.lo == b {
            Some(e.g)
        } else if e.hi == b && e.lo == a {
            Some(e.g.conj())
        } else {
            None
        }
    })
}

/// Apply an arbitrary local rotation to a coupling graph and a diagonal-term
/// matrix given in graph vertex order.
///
/// Errors if the rotation support intersects `protected` (rotating the gate's
/// endpoint states would scramble the gate).
pub fn apply_rotation_generic(
    graph: &Graph,
    diagonal_term: &Array2<C64>,
    rotation: &LocalRotation,
    protected: &[String],
) -> Result<ReductionReport> {
    rotation.validate()?;
    let clash: Vec<String> = rotation
        .support
        .iter()
        .filter(|s| protected.contains(s))
        .cloned()
        .collect();
    if !clash.is_empty() {
        return Err(Error::ProtectedVertices(clash));
    }
    let n = graph.dim();
    if diagonal_term.nrows() != n || diagonal_term.ncols() != n {
        return Err(Error::DimensionMismatch(diagonal_term.nrows(), n));
    }
    let support_idx: Vec<usize> = rotation
        .support
        .iter()
        .map(|label| {
            graph
                .vertex_index(label)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown vertex {label}")))
        })
        .collect::<Result<_>>()?;

    // Full rotation: identity outside the support block.
    let mut full = Array2::<C64>::eye(n);
    for (r, &row_vertex) in support_idx.iter().enumerate() {
        for j in 0..n {
            full[[row_vertex, j]] = C64::new(0.0, 0.0);
        }
        for (s, &col_vertex) in support_idx.iter().enumerate() {
            full[[row_vertex, col_vertex]] = rotation.matrix[[r, s]];
        }
    }

    let mut coupling = Array2::<C64>::zeros((n, n));
    for (i, _) in graph.edges.iter().enumerate() {
        let (hi, lo) = graph
            .edge_endpoints(i)
            .ok_or_else(|| Error::InvalidGraph("edge endpoints missing during rotation".into()))?;
        coupling[[hi, lo]] += graph.edges[i].g;
        coupling[[lo, hi]] += graph.edges[i].g.conj();
    }

    let conj_full = full.mapv(|z| z.conj());
    let transform = |x: &Array2<C64>| conj_full.dot(x).dot(&full.t());
    let mut coupling_after = transform(&coupling);
    let mut diag_after = transform(diagonal_term);
    // A rotation mixing two coupled states can turn coupling into on-site
    // terms; those belong with the diagonal-term graph.
    for i in 0..n {
        diag_after[[i, i]] += coupling_after[[i, i]];
        coupling_after[[i, i]] = C64::new(0.0, 0.0);
    }

    let mut vertex_order: Vec<String> = graph.vertices.iter().map(|v| v.label.clone()).collect();
    for (k, &idx) in support_idx.iter().enumerate() {
        vertex_order[idx] = rotation.introduced[k].clone();
    }

    Ok(ReductionReport {
        rotation: rotation.clone(),
        g_prime: matrix_to_edges(&coupling_after, &vertex_order),
        g_doubleprime: diag_after,
        consumed_labels: rotation.support.clone(),
        introduced_labels: rotation.introduced.clone(),
        vertex_order,
    })
}

/// The binary rotation underlying all four moves: `|x> = (p* |u> + q* |v>)/W`,
/// `|x'> = (q |u> - p |v>)/W` with `W = sqrt(|p|^2 + |q|^2)`.
fn binary_rotation(p: C64, q: C64) -> (Array2<C64>, f64) {
    let w = (p.norm_sqr() + q.norm_sqr()).sqrt();
    let mut m = Array2::<C64>::zeros((2, 2));
    m[[0, 0]] = p.conj() / w;
    m[[0, 1]] = q.conj() / w;
    m[[1, 0]] = q / w;
    m[[1, 1]] = -p / w;
    (m, w)
}

/// Diagonal-term block produced by the binary rotation on states with
/// energies `(e_u, e_v)`: returns `(e_x, e_xp, cross)` where
/// `cross = <x|G''|x'>`.
fn rotated_diagonal_block(p: C64, q: C64, e_u: f64, e_v: f64) -> (f64, f64, C64) {
    let w2 = p.norm_sqr() + q.norm_sqr();
    let e_x = (e_u * p.norm_sqr() + e_v * q.norm_sqr()) / w2;
    let e_xp = (e_u * q.norm_sqr() + e_v * p.norm_sqr()) / w2;
    let cross = c((e_u - e_v) / w2) * p * q;
    (e_x, e_xp, cross)
}

/// Energies of the one-segment-branch subgraph, in order `(1, 2, 3, 1')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchEnergies {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e1p: f64,
}

/// Move a one-segment branch two segments along a chain.
///
/// Input: chain couplings `a = <1|H|2>`, `b = <2|H|3>` and branch coupling
/// `a' = <1|H|1'>`. The rotation mixes `2` and `1'` into `x`, `x'`, giving
/// the chain `1 -x- 3` with a branch `x'` at `3`:
/// couplings `(W_x, a b / W_x, a' b* / W_x)` and a `x-x'` diagonal cross term
/// `(E_2 - E_1') a a' / W_x^2`.
pub fn move_branch_one_segment(
    a: C64,
    a_branch: C64,
    b: C64,
    energies: BranchEnergies,
) -> Result<ReductionReport> {
    let (m, w) = binary_rotation(a, a_branch);
    if w == 0.0 {
        return Err(Error::DegenerateRotation("|a|^2 + |a'|^2 vanishes".into()));
    }
    let rotation = LocalRotation {
        support: vec!["2".into(), "1p".into()],
        introduced: vec!["x".into(), "xp".into()],
        matrix: m,
    };
    let vertex_order: Vec<String> = vec!["1".into(), "x".into(), "3".into(), "xp".into()];

    let g_prime = nonzero_edges(vec![
        TransformedEdge {
            from: "1".into(),
            to: "x".into(),
            amp: c(w),
        },
        TransformedEdge {
            from: "x".into(),
            to: "3".into(),
            amp: a * b / w,
        },
        TransformedEdge {
            from: "3".into(),
            to: "xp".into(),
            amp: a_branch * b.conj() / w,
        },
    ]);

    let (e_x, e_xp, cross) = rotated_diagonal_block(a, a_branch, energies.e2, energies.e1p);
    let mut g2 = Array2::<C64>::zeros((4, 4));
    g2[[0, 0]] = c(energies.e1);
    g2[[1, 1]] = c(e_x);
    g2[[2, 2]] = c(energies.e3);
    g2[[3, 3]] = c(e_xp);
    g2[[1, 3]] = cross;
    g2[[3, 1]] = cross.conj();

    Ok(ReductionReport {
        rotation,
        vertex_order,
        g_prime,
        g_doubleprime: g2,
        consumed_labels: vec!["2".into(), "1p".into()],
        introduced_labels: vec!["x".into(), "xp".into()],
    })
}

/// Energies for the two-branch / four-loop pair, branch side, in order
/// `(1, 2, 3, 1', 2', 4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBranchEnergies {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e1p: f64,
    pub e2p: f64,
    pub e4: f64,
}

/// Couplings of the four-segment loop on a chain, with the directions of the
/// defining relations: `A = <1|H|x>`, `B = <x|H|3>`, `B' = <3|H|x'>`,
/// `A' = <x|H|2'>`, `C' = <2'|H|x'>`, `C = <3|H|4>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loop4Couplings {
    pub a: C64,
    pub a_prime: C64,
    pub b: C64,
    pub b_prime: C64,
    pub c: C64,
    pub c_prime: C64,
}

/// Turn a chain segment with two adjacent one-segment branches into a
/// four-segment loop on the chain.
///
/// Inputs: `a = <1|H|2>`, `a' = <1|H|1'>`, `b = <2|H|3>`, `b' = <2|H|2'>`,
/// `cc = <3|H|4>`.
pub fn branches_to_loop4(
    a: C64,
    a_prime: C64,
    b: C64,
    b_prime: C64,
    cc: C64,
    energies: TwoBranchEnergies,
) -> Result<ReductionReport> {
    let (m, w) = binary_rotation(a, a_prime);
    if w == 0.0 {
        return Err(Error::DegenerateRotation("|a|^2 + |a'|^2 vanishes".into()));
    }
    let rotation = LocalRotation {
        support: vec!["2".into(), "1p".into()],
        introduced: vec!["x".into(), "xp".into()],
        matrix: m,
    };
    let vertex_order: Vec<String> = vec![
        "1".into(),
        "x".into(),
        "3".into(),
        "xp".into(),
        "2p".into(),
        "4".into(),
    ];

    let g_prime = nonzero_edges(vec![
        TransformedEdge {
            from: "1".into(),
            to: "x".into(),
            amp: c(w),
        },
        TransformedEdge {
            from: "x".into(),
            to: "3".into(),
            amp: a * b / w,
        },
        TransformedEdge {
            from: "3".into(),
            to: "xp".into(),
            amp: a_prime * b.conj() / w,
        },
        TransformedEdge {
            from: "x".into(),
            to: "2p".into(),
            amp: a * b_prime / w,
        },
        TransformedEdge {
            from: "2p".into(),
            to: "xp".into(),
            amp: a_prime * b_prime.conj() / w,
        },
        TransformedEdge {
            from: "3".into(),
            to: "4".into(),
            amp: cc,
        },
    ]);

    let (e_x, e_xp, cross) = rotated_diagonal_block(a, a_prime, energies.e2, energies.e1p);
    let mut g2 = Array2::<C64>::zeros((6, 6));
    g2[[0, 0]] = c(energies.e1);
    g2[[1, 1]] = c(e_x);
    g2[[2, 2]] = c(energies.e3);
    g2[[3, 3]] = c(e_xp);
    g2[[4, 4]] = c(energies.e2p);
    g2[[5, 5]] = c(energies.e4);
    g2[[1, 3]] = cross;
    g2[[3, 1]] = cross.conj();

    Ok(ReductionReport {
        rotation,
        vertex_order,
        g_prime,
        g_doubleprime: g2,
        consumed_labels: vec!["2".into(), "1p".into()],
        introduced_labels: vec!["x".into(), "xp".into()],
    })
}

/// Energies for the loop side of the four-loop pair, in order
/// `(1, x, 3, x', 2', 4)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loop4Energies {
    pub e1: f64,
    pub e_x: f64,
    pub e3: f64,
    pub e_xp: f64,
    pub e2p: f64,
    pub e4: f64,
}

/// Invert [`branches_to_loop4`]: recover the two-branch chain from a
/// four-segment loop.
///
/// The loop has one more complex parameter than the branch graph, so the
/// inversion requires `B'/B* = C'/A'*`; inputs violating it are rejected.
pub fn loop4_to_branches(
    couplings: Loop4Couplings,
    energies: Loop4Energies,
) -> Result<ReductionReport> {
    let Loop4Couplings {
        a,
        a_prime,
        b,
        b_prime,
        c: cc,
        c_prime,
    } = couplings;
    // Cross-multiplied form of B'/B* = C'/A'*.
    let lhs = b_prime * a_prime.conj();
    let rhs = c_prime * b.conj();
    let scale = lhs.norm().max(rhs.norm());
    if (lhs - rhs).norm() > 1e-9 * scale.max(f64::MIN_POSITIVE) && scale > 0.0 {
        return Err(Error::ConditionViolated {
            lhs: if b.norm() > 0.0 {
                b_prime / b.conj()
            } else {
                lhs
            },
            rhs: if a_prime.norm() > 0.0 {
                c_prime / a_prime.conj()
            } else {
                rhs
            },
        });
    }
    let w_y = (b.norm_sqr() + b_prime.norm_sqr()).sqrt();
    if w_y == 0.0 {
        return Err(Error::DegenerateRotation("|B|^2 + |B'|^2 vanishes".into()));
    }

    let a_rec = a * b / w_y;
    let a_prime_rec = a * b_prime / w_y;
    let b_rec = c(w_y);
    let b_prime_rec = if b.norm() > 0.0 {
        a_prime * w_y / b
    } else {
        // B = 0 forces the branch coupling through the C' relation.
        (c_prime * a / a_prime_rec.conj()).conj()
    };

    // Rotation back from (x, x') to (2, 1'): the inverse of the forward
    // binary rotation built from the recovered branch couplings.
    let (forward, w_x) = binary_rotation(a_rec, a_prime_rec);
    if w_x == 0.0 {
        return Err(Error::DegenerateRotation(
            "recovered branch couplings vanish".into(),
        ));
    }
    let inverse = forward.t().mapv(|z| z.conj());
    let rotation = LocalRotation {
        support: vec!["x".into(), "xp".into()],
        introduced: vec!["2".into(), "1p".into()],
        matrix: inverse,
    };
    let vertex_order: Vec<String> = vec![
        "1".into(),
        "2".into(),
        "3".into(),
        "1p".into(),
        "2p".into(),
        "4".into(),
    ];

    let g_prime = nonzero_edges(vec![
        TransformedEdge {
            from: "1".into(),
            to: "2".into(),
            amp: a_rec,
        },
        TransformedEdge {
            from: "1".into(),
            to: "1p".into(),
            amp: a_prime_rec,
        },
        TransformedEdge {
            from: "2".into(),
            to: "3".into(),
            amp: b_rec,
        },
        TransformedEdge {
            from: "2".into(),
            to: "2p".into(),
            amp: b_prime_rec,
        },
        TransformedEdge {
            from: "3".into(),
            to: "4".into(),
            amp: cc,
        },
    ]);

    // G'' back in the branch basis: <2|G''|1'> = (E_x - E_x') a' a* / W_x^2.
    let w2 = w_x * w_x;
    let e2 = (energies.e_x * a_rec.norm_sqr() + energies.e_xp * a_prime_rec.norm_sqr()) / w2;
    let e1p = (energies.e_x * a_prime_rec.norm_sqr() + energies.e_xp * a_rec.norm_sqr()) / w2;
    let cross = c((energies.e_x - energies.e_xp) / w2) * a_prime_rec * a_rec.conj();
    let mut g2 = Array2::<C64>::zeros((6, 6));
    g2[[0, 0]] = c(energies.e1);
    g2[[1, 1]] = c(e2);
    g2[[2, 2]] = c(energies.e3);
    g2[[3, 3]] = c(e1p);
    g2[[4, 4]] = c(energies.e2p);
    g2[[5, 5]] = c(energies.e4);
    g2[[1, 3]] = cross;
    g2[[3, 1]] = cross.conj();

    Ok(ReductionReport {
        rotation,
        vertex_order,
        g_prime,
        g_doubleprime: g2,
        consumed_labels: vec!["x".into(), "xp".into()],
        introduced_labels: vec!["2".into(), "1p".into()],
    })
}

/// Energies of the diagonally-inserted square loop, in order `(0, 1, 2, 3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalLoopEnergies {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
}

/// Collapse a square loop attached via its diagonal into a three-coupling
/// chain `0 -x- 2 -x'`.
///
/// Inputs: `a = <0|H|1>`, `b = <1|H|2>`, `cc = <3|H|2>`, `d = <0|H|3>`.
/// Output chain: `A = W_x`, `B = (a b + cc d)/W_x`, `C = (b* d - a cc*)/W_x`,
/// with the `x-x'` diagonal cross term `(E_1 - E_3) a d / W_x^2`.
pub fn diagonal_loop_to_chain(
    a: C64,
    b: C64,
    cc: C64,
    d: C64,
    energies: DiagonalLoopEnergies,
) -> Result<ReductionReport> {
    let (m, w) = binary_rotation(a, d);
    if w == 0.0 {
        return Err(Error::DegenerateRotation("|a|^2 + |d|^2 vanishes".into()));
    }
    let rotation = LocalRotation {
        support: vec!["1".into(), "3".into()],
        introduced: vec!["x".into(), "xp".into()],
        matrix: m,
    };
    let vertex_order: Vec<String> = vec!["0".into(), "x".into(), "2".into(), "xp".into()];

    let g_prime = nonzero_edges(vec![
        TransformedEdge {
            from: "0".into(),
            to: "x".into(),
            amp: c(w),
        },
        TransformedEdge {
            from: "x".into(),
            to: "2".into(),
            amp: (a * b + cc * d) / w,
        },
        TransformedEdge {
            from: "2".into(),
            to: "xp".into(),
            amp: (b.conj() * d - a * cc.conj()) / w,
        },
    ]);

    let (e_x, e_xp, cross) = rotated_diagonal_block(a, d, energies.e1, energies.e3);
    let mut g2 = Array2::<C64>::zeros((4, 4));
    g2[[0, 0]] = c(energies.e0);
    g2[[1, 1]] = c(e_x);
    g2[[2, 2]] = c(energies.e2);
    g2[[3, 3]] = c(e_xp);
    g2[[1, 3]] = cross;
    g2[[3, 1]] = cross.conj();

    Ok(ReductionReport {
        rotation,
        vertex_order,
        g_prime,
        g_doubleprime: g2,
        consumed_labels: vec!["1".into(), "3".into()],
        introduced_labels: vec!["x".into(), "xp".into()],
    })
}

/// Energies of the six-segment loop inserted via its diagonal, in order
/// `(0, 1, 2, 1', 2', 3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loop6Energies {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub e1p: f64,
    pub e2p: f64,
    pub e3: f64,
}

/// Reduce a six-segment loop (inserted via its largest diagonal) to a
/// four-segment edge-sharing loop; `b' = 0` covers the linear chain with a
/// two-segment branch.
///
/// Inputs: `a = <0|H|1>`, `b = <0|H|2>`, `c1 = <1|H|1'>`, `c2 = <2|H|2'>`,
/// `a' = <1'|H|3>`, `b' = <2'|H|3>`.
pub fn loop6_to_loop4(
    a: C64,
    b: C64,
    c1: C64,
    c2: C64,
    a_prime: C64,
    b_prime: C64,
    energies: Loop6Energies,
) -> Result<ReductionReport> {
    let w_x = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if w_x == 0.0 {
        return Err(Error::DegenerateRotation("|a|^2 + |b|^2 vanishes".into()));
    }
    let w_y = ((a * c1).norm_sqr() + (b * c2).norm_sqr()).sqrt();
    if w_y == 0.0 {
        return Err(Error::DegenerateRotation(
            "|a c1|^2 + |b c2|^2 vanishes".into(),
        ));
    }

    // Two disjoint binary rotations: (1,2) -> (x,x') and (1',2') -> (y,y').
    let (mx, _) = binary_rotation(a, b);
    let (my, _) = binary_rotation(a * c1, b * c2);
    let mut m = Array2::<C64>::zeros((4, 4));
    for i in 0..2 {
        for j in 0..2 {
            m[[i, j]] = mx[[i, j]];
            m[[2 + i, 2 + j]] = my[[i, j]];
        }
    }
    let rotation = LocalRotation {
        support: vec!["1".into(), "2".into(), "1p".into(), "2p".into()],
        introduced: vec!["x".into(), "xp".into(), "y".into(), "yp".into()],
        matrix: m,
    };
    let vertex_order: Vec<String> = vec![
        "0".into(),
        "x".into(),
        "xp".into(),
        "y".into(),
        "yp".into(),
        "3".into(),
    ];

    let g_prime = nonzero_edges(vec![
        TransformedEdge {
            from: "0".into(),
            to: "x".into(),
            amp: c(w_x),
        },
        TransformedEdge {
            from: "x".into(),
            to: "y".into(),
            amp: c(w_y / w_x),
        },
        TransformedEdge {
            from: "y".into(),
            to: "xp".into(),
            amp: a * b * c(c1.norm_sqr() - c2.norm_sqr()) / c(w_x * w_y),
        },
        TransformedEdge {
            from: "xp".into(),
            to: "yp".into(),
            amp: c1 * c2 * c(w_x / w_y),
        },
        TransformedEdge {
            from: "y".into(),
            to: "3".into(),
            amp: (a * a_prime * c1 + b * b_prime * c2) / w_y,
        },
        TransformedEdge {
            from: "3".into(),
            to: "yp".into(),
            amp: (b * a_prime.conj() * c2 - a * b_prime.conj() * c1) / w_y,
        },
    ]);

    let (e_x, e_xp, cross_x) = rotated_diagonal_block(a, b, energies.e1, energies.e2);
    let (e_y, e_yp, cross_y) = rotated_diagonal_block(a * c1, b * c2, energies.e1p, energies.e2p);
    let mut g2 = Array2::<C64>::zeros((6, 6));
    g2[[0, 0]] = c(energies.e0);
    g2[[1, 1]] = c(e_x);
    g2[[2, 2]] = c(e_xp);
    g2[[3, 3]] = c(e_y);
    g2[[4, 4]] = c(e_yp);
    g2[[5, 5]] = c(energies.e3);
    g2[[1, 2]] = cross_x;
    g2[[2, 1]] = cross_x.conj();
    g2[[3, 4]] = cross_y;
    g2[[4, 3]] = cross_y.conj();

    Ok(ReductionReport {
        rotation,
        vertex_order,
        g_prime,
        g_doubleprime: g2,
        consumed_labels: vec!["1".into(), "2".into(), "1p".into(), "2p".into()],
        introduced_labels: vec!["x".into(), "xp".into(), "y".into(), "yp".into()],
    })
}

/// A located one-segment-branch pattern: chain `v1 - v2 - v3` with the
/// branch `v1p` hanging off `v1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchMatch {
    pub v1: String,
    pub v2: String,
    pub v3: String,
    pub v1p: String,
}

/// Locate every one-segment-branch pattern: `v2` couples only to `v1` and
/// `v3`, and the branch endpoint `v1p` couples only to `v1`.
pub fn find_one_segment_branches(graph: &Graph) -> Vec<BranchMatch> {
    let n = graph.dim();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..graph.edges.len() {
        if let Some((hi, lo)) = graph.edge_endpoints(i) {
            adjacency[hi].push(lo);
            adjacency[lo].push(hi);
        }
    }
    let mut matches = Vec::new();
    for v1 in 0..n {
        for &v1p in &adjacency[v1] {
            if adjacency[v1p].len() != 1 {
                continue;
            }
            for &v2 in &adjacency[v1] {
                if v2 == v1p || adjacency[v2].len() != 2 {
                    continue;
                }
                let &v3 = adjacency[v2].iter().find(|&&w| w != v1).unwrap();
                if v3 == v1p {
                    continue;
                }
                matches.push(BranchMatch {
                    v1: graph.vertices[v1].label.clone(),
                    v2: graph.vertices[v2].label.clone(),
                    v3: graph.vertices[v3].label.clone(),
                    v1p: graph.vertices[v1p].label.clone(),
                });
            }
        }
    }
    matches
}

/// A located diagonally-attached square loop `v0 - v1 - v2 - v3 - v0` where
/// `v1` and `v3` have no other couplings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalLoopMatch {
    pub v0: String,
    pub v1: String,
    pub v2: String,
    pub v3: String,
}

pub fn find_diagonal_loops(graph: &Graph) -> Vec<DiagonalLoopMatch> {
    let n = graph.dim();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..graph.edges.len() {
        if let Some((hi, lo)) = graph.edge_endpoints(i) {
            adjacency[hi].push(lo);
            adjacency[lo].push(hi);
        }
    }
    let mut matches = Vec::new();
    for v1 in 0..n {
        if adjacency[v1].len() != 2 {
            continue;
        }
        for v3 in (v1 + 1)..n {
            if adjacency[v3].len() != 2 || adjacency[v3].contains(&v1) {
                continue;
            }
            let (a0, a1) = (adjacency[v1][0], adjacency[v1][1]);
            let shares = adjacency[v3].contains(&a0) && adjacency[v3].contains(&a1);
            if !shares {
                continue;
            }
            // Orient so v0 and v2 are the diagonal endpoints.
            matches.push(DiagonalLoopMatch {
                v0: graph.vertices[a0.min(a1)].label.clone(),
                v1: graph.vertices[v1].label.clone(),
                v2: graph.vertices[a0.max(a1)].label.clone(),
                v3: graph.vertices[v3].label.clone(),
            });
        }
    }
    matches
}

/// The unique match of a pattern, or a structured error.
pub fn unique_match<T>(mut matches: Vec<T>, pattern: &str) -> Result<T> {
    match matches.len() {
        0 => Err(Error::NoMatch {
            pattern: pattern.into(),
        }),
        1 => Ok(matches.pop().unwrap()),
        count => Err(Error::AmbiguousMatch {
            pattern: pattern.into(),
            count,
        }),
    }
}

/// Hermitian matrix from couplings plus diagonal energies; test oracle helper.
pub fn assemble_hamiltonian(
    labels: &[&str],
    couplings: &[(&str, &str, C64)],
    energies: &[f64],
) -> Array2<C64> {
    let n = labels.len();
    let mut h = Array2::<C64>::zeros((n, n));
    for (i, &e) in energies.iter().enumerate() {
        h[[i, i]] = c(e);
    }
    let index = |l: &str| labels.iter().position(|&x| x == l).unwrap();
    for &(from, to, amp) in couplings {
        let (i, j) = (index(from), index(to));
        h[[i, j]] += amp;
        h[[j, i]] += amp.conj();
    }
    h
}

/// Diagonal matrix of vertex energies in graph order.
pub fn energy_diagonal(graph: &Graph) -> Array2<C64> {
    let n = graph.dim();
    let mut d = Array2::<C64>::zeros((n, n));
    for (i, v) in graph.vertices.iter().enumerate() {
        d[[i, i]] = c(v.energy);
    }
    d
}
