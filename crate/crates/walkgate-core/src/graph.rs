//! The Hilbert-space graph: vertices are multiqubit basis states with bare
//! energies, edges carry the complex dipole couplings addressed by the drive.
//!
//! Edges are stored with `hi` = higher-energy endpoint so that the transition
//! gap `delta_e = E_hi - E_lo` is nonnegative by construction. The resonant
//! adjacency matrix populates `Lambda[hi, lo] = conj(amp) * conj(g)` for the
//! pulse component resonant with the edge.

use std::collections::{BTreeMap, HashMap, HashSet};

use ndarray::Array2;

use crate::drive::Pulse;
use crate::error::{Error, Result};
use crate::linalg::frobenius_norm;
use crate::C64;

/// Which part of the state space a vertex belongs to.
///
/// Computational (qubit-domain) vertices carry one level index per declared
/// qubit, all of them 0 or 1. Auxiliary vertices may still carry per-qubit
/// level indices (e.g. a second excited level of one of the qubits), which is
/// what makes tensor-product factorization checks possible; auxiliary states
/// outside any product structure carry none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    Qubit { levels: Vec<u32> },
    Auxiliary { levels: Option<Vec<u32>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub label: String,
    pub energy: f64,
    pub domain: Domain,
}

impl Vertex {
    pub fn qubit(label: impl Into<String>, energy: f64, levels: Vec<u32>) -> Self {
        Vertex {
            label: label.into(),
            energy,
            domain: Domain::Qubit { levels },
        }
    }

    pub fn auxiliary(label: impl Into<String>, energy: f64) -> Self {
        Vertex {
            label: label.into(),
            energy,
            domain: Domain::Auxiliary { levels: None },
        }
    }

    pub fn auxiliary_with_levels(label: impl Into<String>, energy: f64, levels: Vec<u32>) -> Self {
        Vertex {
            label: label.into(),
            energy,
            domain: Domain::Auxiliary {
                levels: Some(levels),
            },
        }
    }

    pub fn levels(&self) -> Option<&[u32]> {
        match &self.domain {
            Domain::Qubit { levels } => Some(levels),
            Domain::Auxiliary { levels } => levels.as_deref(),
        }
    }

    pub fn is_computational(&self) -> bool {
        matches!(self.domain, Domain::Qubit { .. })
    }
}

/// A driven transition between two basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Label of the higher-energy endpoint.
    pub hi: String,
    /// Label of the lower-energy endpoint.
    pub lo: String,
    /// Dipole coupling; the resonant amplitude on this edge is `conj(amp)*conj(g)`.
    pub g: C64,
    /// Symmetry class, filled in by [`compute_edge_classes`].
    pub class_id: Option<usize>,
}

impl Edge {
    pub fn new(hi: impl Into<String>, lo: impl Into<String>, g: C64) -> Self {
        Edge {
            hi: hi.into(),
            lo: lo.into(),
            g,
            class_id: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub qubit_count: usize,
}

/// A set of edges sharing `(delta_e, g)` within the classification tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeClass {
    pub class_id: usize,
    /// Indices into `graph.edges`.
    pub members: Vec<usize>,
    pub delta_e: f64,
    pub g_representative: C64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    DuplicateLabel,
    MissingEndpoint,
    SelfEdge,
    DuplicateEdge,
    EdgeOrientation,
    LevelArity,
}

/// A structured validation finding; an empty diagnostic list means the graph
/// satisfies all structural invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub labels: Vec<String>,
}

impl Graph {
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>, qubit_count: usize) -> Self {
        Graph {
            vertices,
            edges,
            qubit_count,
        }
    }

    pub fn vertex_index(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.label == label)
    }

    pub fn vertex(&self, label: &str) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.label == label)
    }

    pub fn dim(&self) -> usize {
        self.vertices.len()
    }

    /// Transition gap of edge `i`; nonnegative for a valid graph.
    pub fn delta_e(&self, i: usize) -> f64 {
        let e = &self.edges[i];
        let ehi = self.vertex(&e.hi).map(|v| v.energy).unwrap_or(0.0);
        let elo = self.vertex(&e.lo).map(|v| v.energy).unwrap_or(0.0);
        ehi - elo
    }

    /// Edge endpoints as vertex indices `(hi, lo)`.
    pub fn edge_endpoints(&self, i: usize) -> Option<(usize, usize)> {
        let e = &self.edges[i];
        Some((self.vertex_index(&e.hi)?, self.vertex_index(&e.lo)?))
    }

    /// Indices of edges incident on the vertex at `index`.
    pub fn incident_edges(&self, index: usize) -> Vec<usize> {
        let label = &self.vertices[index].label;
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| &e.hi == label || &e.lo == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// Computational vertex indices in big-endian level order (|0..0> first).
    ///
    /// Errors unless the qubit subgraph contains exactly `2^qubit_count`
    /// computational states.
    pub fn computational_vertices(&self) -> Result<Vec<usize>> {
        let mut found: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if let Domain::Qubit { levels } = &v.domain {
                if found.insert(levels.clone(), i).is_some() {
                    return Err(Error::InvalidGraph(format!(
                        "computational levels {levels:?} appear on more than one vertex"
                    )));
                }
            }
        }
        let expected = 1usize << self.qubit_count;
        if found.len() != expected {
            return Err(Error::InvalidGraph(format!(
                "expected {expected} computational states for {} qubit(s), found {}",
                self.qubit_count,
                found.len()
            )));
        }
        // BTreeMap over level vectors is already big-endian lexicographic.
        Ok(found.into_values().collect())
    }

    /// Copy of the graph with `class_id` filled in on every edge.
    pub fn classified(&self, tol_rel: f64) -> (Graph, Vec<EdgeClass>) {
        let classes = compute_edge_classes(self, tol_rel);
        let mut graph = self.clone();
        for class in &classes {
            for &e in &class.members {
                graph.edges[e].class_id = Some(class.class_id);
            }
        }
        (graph, classes)
    }
}

/// Check every structural invariant, returning one diagnostic per violation.
pub fn validate_graph(graph: &Graph) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    let mut seen = HashSet::new();
    for v in &graph.vertices {
        if !seen.insert(v.label.clone()) {
            diags.push(Diagnostic {
                kind: DiagnosticKind::DuplicateLabel,
                labels: vec![v.label.clone()],
            });
        }
        if let Some(levels) = v.levels() {
            if levels.len() != graph.qubit_count {
                diags.push(Diagnostic {
                    kind: DiagnosticKind::LevelArity,
                    labels: vec![v.label.clone()],
                });
            }
        }
    }

    let mut pairs = HashSet::new();
    for e in &graph.edges {
        let hi = graph.vertex(&e.hi);
        let lo = graph.vertex(&e.lo);
        if hi.is_none() || lo.is_none() {
            diags.push(Diagnostic {
                kind: DiagnosticKind::MissingEndpoint,
                labels: vec![e.hi.clone(), e.lo.clone()],
            });
            continue;
        }
        if e.hi == e.lo {
            diags.push(Diagnostic {
                kind: DiagnosticKind::SelfEdge,
                labels: vec![e.hi.clone()],
            });
            continue;
        }
        let mut key = [e.hi.clone(), e.lo.clone()];
        key.sort();
        if !pairs.insert(key) {
            diags.push(Diagnostic {
                kind: DiagnosticKind::DuplicateEdge,
                labels: vec![e.hi.clone(), e.lo.clone()],
            });
        }
        if hi.unwrap().energy < lo.unwrap().energy {
            diags.push(Diagnostic {
                kind: DiagnosticKind::EdgeOrientation,
                labels: vec![e.hi.clone(), e.lo.clone()],
            });
        }
    }

    diags
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn couplings_close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
}

/// Partition the edges into symmetry classes of equal `(delta_e, g)` within
/// the relative tolerance `tol_rel`.
///
/// Class ids are assigned deterministically by ascending
/// `(delta_e, |g|, arg g, lowest member index)`.
pub fn compute_edge_classes(graph: &Graph, tol_rel: f64) -> Vec<EdgeClass> {
    let n = graph.edges.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let same = rel_close(graph.delta_e(i), graph.delta_e(j), tol_rel)
                && couplings_close(graph.edges[i].g, graph.edges[j].g, tol_rel);
            if same {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj.max(ri)] = rj.min(ri);
                }
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }

    let mut classes: Vec<EdgeClass> = groups
        .into_values()
        .map(|members| {
            let first = members[0];
            EdgeClass {
                class_id: 0,
                delta_e: graph.delta_e(first),
                g_representative: graph.edges[first].g,
                members,
            }
        })
        .collect();

    classes.sort_by(|a, b| {
        let ka = (
            a.delta_e,
            a.g_representative.norm(),
            a.g_representative.arg(),
            a.members[0],
        );
        let kb = (
            b.delta_e,
            b.g_representative.norm(),
            b.g_representative.arg(),
            b.members[0],
        );
        ka.partial_cmp(&kb).unwrap()
    });
    for (id, class) in classes.iter_mut().enumerate() {
        class.class_id = id;
    }
    classes
}

/// Resonant adjacency matrix `Lambda` generated by the drive.
///
/// `Lambda[hi, lo]` is `conj(amp) * conj(g)` for the pulse component within
/// `tol_res` of the edge gap; off-resonant components contribute nothing.
/// Errors if two distinct components are resonant with the same edge.
pub fn adjacency_from_drive(graph: &Graph, pulse: &Pulse, tol_res: f64) -> Result<Array2<C64>> {
    let n = graph.dim();
    let mut lambda = Array2::<C64>::zeros((n, n));
    for (i, edge) in graph.edges.iter().enumerate() {
        let gap = graph.delta_e(i);
        let resonant: Vec<&crate::drive::PulseComponent> = pulse
            .components
            .iter()
            .filter(|c| (gap - c.omega).abs() <= tol_res)
            .collect();
        if resonant.len() > 1 {
            return Err(Error::DoubleResonance {
                hi: edge.hi.clone(),
                lo: edge.lo.clone(),
            });
        }
        if let Some(comp) = resonant.first() {
            let (hi, lo) = graph.edge_endpoints(i).ok_or_else(|| {
                Error::InvalidGraph(format!(
                    "edge {}-{} has missing endpoints",
                    edge.hi, edge.lo
                ))
            })?;
            let amp = comp.amp.conj() * edge.g.conj();
            lambda[[hi, lo]] += amp;
            lambda[[lo, hi]] += amp.conj();
        }
    }
    Ok(lambda)
}

/// Tensor-product factorization of the vertex set: per-subsystem level sets
/// plus the position of each vertex in the product ordering.
struct Factorization {
    /// Sorted level values per subsystem.
    level_sets: Vec<Vec<u32>>,
    /// `perm[product_index] = vertex_index`.
    perm: Vec<usize>,
}

fn factorize(graph: &Graph) -> Result<Factorization> {
    let q = graph.qubit_count;
    let mut level_sets: Vec<HashSet<u32>> = vec![HashSet::new(); q];
    let mut tuples: Vec<Vec<u32>> = Vec::with_capacity(graph.dim());
    for v in &graph.vertices {
        let levels = v.levels().ok_or_else(|| {
            Error::InvalidGraph(format!(
                "vertex {} carries no per-qubit levels; the vertex set does not factor",
                v.label
            ))
        })?;
        if levels.len() != q {
            return Err(Error::InvalidGraph(format!(
                "vertex {} has {} level indices, expected {q}",
                v.label,
                levels.len()
            )));
        }
        for (k, &l) in levels.iter().enumerate() {
            level_sets[k].insert(l);
        }
        tuples.push(levels.to_vec());
    }
    let level_sets: Vec<Vec<u32>> = level_sets
        .into_iter()
        .map(|s| {
            let mut v: Vec<u32> = s.into_iter().collect();
            v.sort();
            v
        })
        .collect();
    let product_size: usize = level_sets.iter().map(|s| s.len()).product();
    if product_size != graph.dim() {
        return Err(Error::InvalidGraph(format!(
            "vertex set of size {} does not factor as a product of level sets (product size {})",
            graph.dim(),
            product_size
        )));
    }
    let mut index_of: HashMap<Vec<u32>, usize> = HashMap::new();
    for (i, t) in tuples.iter().enumerate() {
        if index_of.insert(t.clone(), i).is_some() {
            return Err(Error::InvalidGraph(format!("duplicate level tuple {t:?}")));
        }
    }
    // Enumerate the product in row-major (big-endian) order.
    let mut perm = Vec::with_capacity(product_size);
    let mut counters = vec![0usize; q];
    loop {
        let tuple: Vec<u32> = counters
            .iter()
            .enumerate()
            .map(|(k, &c)| level_sets[k][c])
            .collect();
        let idx = *index_of.get(&tuple).ok_or_else(|| {
            Error::InvalidGraph(format!(
                "missing product state {tuple:?}; vertex set does not factor"
            ))
        })?;
        perm.push(idx);
        // Increment the mixed-radix counter.
        let mut k = q;
        loop {
            if k == 0 {
                return Ok(Factorization { level_sets, perm });
            }
            k -= 1;
            counters[k] += 1;
            if counters[k] < level_sets[k].len() {
                break;
            }
            counters[k] = 0;
        }
    }
}

/// Decide whether `Lambda` generates only tensor-product (non-entangling)
/// evolution, by projecting onto sums of single-subsystem operators.
///
/// Returns `(is_local, residual_norm)` where the residual is the Frobenius
/// distance from `Lambda` to the local subspace; `true` means
/// `exp(-i tau Lambda)` is a tensor product for all `tau`.
pub fn is_local_generator(lambda: &Array2<C64>, graph: &Graph) -> Result<(bool, f64)> {
    if graph.qubit_count < 2 {
        return Err(Error::InvalidArgument(
            "locality test needs at least two subsystems".into(),
        ));
    }
    let n = graph.dim();
    if lambda.nrows() != n || lambda.ncols() != n {
        return Err(Error::DimensionMismatch(lambda.nrows(), n));
    }
    let fact = factorize(graph)?;
    let dims: Vec<usize> = fact.level_sets.iter().map(|s| s.len()).collect();
    let q = dims.len();

    // Reorder Lambda into product order.
    let mut m = Array2::<C64>::zeros((n, n));
    for a in 0..n {
        for b in 0..n {
            m[[a, b]] = lambda[[fact.perm[a], fact.perm[b]]];
        }
    }

    // Strides of the row-major product index.
    let mut strides = vec![1usize; q];
    for k in (0..q.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }

    let trace: C64 = (0..n).map(|i| m[[i, i]]).sum();
    let d_total = n as f64;

    // P(Lambda) = sum_k ptr_k(Lambda)/d_rest (x) I_rest - (q-1) * tr/d * I.
    let mut projected = Array2::<C64>::zeros((n, n));
    for k in 0..q {
        let dk = dims[k];
        let d_rest = (n / dk) as f64;
        let mut x = Array2::<C64>::zeros((dk, dk));
        for a in 0..dk {
            for b in 0..dk {
                // Sum over all indices of the other factors.
                let mut acc = C64::new(0.0, 0.0);
                for rest in 0..(n / dk) {
                    // Decompose `rest` over the other factors and rebuild full indices.
                    let mut ia = 0usize;
                    let mut ib = 0usize;
                    let mut r = rest;
                    for j in (0..q).rev() {
                        if j == k {
                            continue;
                        }
                        let lj = r % dims[j];
                        r /= dims[j];
                        ia += lj * strides[j];
                        ib += lj * strides[j];
                    }
                    ia += a * strides[k];
                    ib += b * strides[k];
                    acc += m[[ia, ib]];
                }
                x[[a, b]] = acc / C64::new(d_rest, 0.0);
            }
        }
        for row in 0..n {
            for col in 0..n {
                // Nonzero only where the other factors' indices agree.
                let mut same_rest = true;
                for j in 0..q {
                    if j == k {
                        continue;
                    }
                    if (row / strides[j]) % dims[j] != (col / strides[j]) % dims[j] {
                        same_rest = false;
                        break;
                    }
                }
                if same_rest {
                    let a = (row / strides[k]) % dims[k];
                    let b = (col / strides[k]) % dims[k];
                    projected[[row, col]] += x[[a, b]];
                }
            }
        }
    }
    let overcount = C64::new((q - 1) as f64, 0.0) * trace / C64::new(d_total, 0.0);
    for i in 0..n {
        projected[[i, i]] -= overcount;
    }

    let residual = frobenius_norm(&(&m - &projected));
    let scale = frobenius_norm(&m);
    Ok((residual <= 1e-12 * scale.max(f64::MIN_POSITIVE), residual))
}
