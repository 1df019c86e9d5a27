//! Gate targets, walk plans, analytic parameter synthesis for Z, Hadamard and
//! CZ, and fidelity verification by running one walk per computational basis
//! state.
//!
//! Basis ordering is big-endian over the computational labels, |0..0> first.
//! Synthesized amplitudes live on edge symmetry classes: the resonant
//! amplitude of every edge in a class is the class amplitude, realized by one
//! pulse component per class at the class transition gap.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2};

use crate::drive::{Envelope, Pulse, PulseComponent};
use crate::error::{Error, Result};
use crate::graph::{adjacency_from_drive, compute_edge_classes, EdgeClass, Graph};
use crate::linalg::{unitarity_deviation, HermitianEigen};
use crate::propagator::{
    coined_walk_run, exact_propagator, resonant_walk_run, CoinedMode, CoinedOptions, WalkerState,
};
use crate::C64;

/// Tolerance used when classifying edges for synthesis.
pub const CLASS_TOL: f64 = 1e-9;
/// Residual population outside the qubit domain flagged as incomplete return.
pub const RETURN_TOL: f64 = 1e-6;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateName {
    Z,
    H,
    Cz,
    Cnot,
    Custom,
}

/// A gate target on the computational subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    pub name: GateName,
    pub target: Array2<C64>,
    /// Computational vertices the gate acts on (the protected set).
    pub affected_vertices: Vec<String>,
}

impl GateSpec {
    pub fn new(
        name: GateName,
        target: Array2<C64>,
        affected_vertices: Vec<String>,
    ) -> Result<Self> {
        let dev = unitarity_deviation(&target);
        if dev > 1e-12 {
            return Err(Error::NotUnitary {
                deviation: dev,
                tol: 1e-12,
            });
        }
        Ok(GateSpec {
            name,
            target,
            affected_vertices,
        })
    }
}

/// Standard gate matrix in big-endian basis order (|0..0> first).
pub fn target_unitary(name: GateName, qubit_count: usize) -> Result<Array2<C64>> {
    match (name, qubit_count) {
        (GateName::Z, 1) => Ok(Array2::from_diag(&Array1::from(vec![c(1.0), c(-1.0)]))),
        (GateName::H, 1) => {
            let s = 1.0 / 2.0_f64.sqrt();
            let mut h = Array2::<C64>::zeros((2, 2));
            h[[0, 0]] = c(s);
            h[[0, 1]] = c(s);
            h[[1, 0]] = c(s);
            h[[1, 1]] = c(-s);
            Ok(h)
        }
        (GateName::Cz, 2) => Ok(Array2::from_diag(&Array1::from(vec![
            c(1.0),
            c(1.0),
            c(1.0),
            c(-1.0),
        ]))),
        (GateName::Cnot, 2) => {
            // Control on the first qubit: |i j> -> |i, j xor i>.
            let mut u = Array2::<C64>::zeros((4, 4));
            u[[0, 0]] = c(1.0);
            u[[1, 1]] = c(1.0);
            u[[2, 3]] = c(1.0);
            u[[3, 2]] = c(1.0);
            Ok(u)
        }
        _ => Err(Error::InvalidArgument(format!(
            "no standard {name:?} on {qubit_count} qubit(s)"
        ))),
    }
}

/// Per-basis-state required endpoints: row `s` is the target column for the
/// walk starting from computational state `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkPlan {
    pub columns: Vec<Array1<C64>>,
}

impl WalkPlan {
    pub fn from_target(target: &Array2<C64>) -> Result<Self> {
        let dev = unitarity_deviation(target);
        if dev > 1e-9 {
            return Err(Error::NotUnitary {
                deviation: dev,
                tol: 1e-9,
            });
        }
        Ok(WalkPlan {
            columns: (0..target.ncols())
                .map(|j| target.column(j).to_owned())
                .collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CzIntegers {
    pub n: i64,
    pub m: i64,
    pub n_a: i64,
    pub n_a_prime: i64,
}

/// Synthesized per-class resonant amplitudes with the gate time.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    /// class_id -> resonant amplitude Omega.
    pub omegas: BTreeMap<usize, C64>,
    pub tau_gate: f64,
    pub integers: Option<CzIntegers>,
    pub achieved_fidelity: f64,
    pub refined: bool,
    /// The drive realizing the amplitudes (flat envelope, one component per
    /// driven class).
    pub pulse: Pulse,
}

/// Reject per-edge amplitude requests that break a symmetry class.
pub fn assign_class_amplitudes(
    classes: &[EdgeClass],
    per_edge: &BTreeMap<usize, C64>,
) -> Result<BTreeMap<usize, C64>> {
    let mut omegas = BTreeMap::new();
    for class in classes {
        let mut chosen: Option<C64> = None;
        for &edge in &class.members {
            if let Some(&amp) = per_edge.get(&edge) {
                match chosen {
                    None => chosen = Some(amp),
                    Some(prev) => {
                        if (prev - amp).norm() > 1e-12 * prev.norm().max(amp.norm()) {
                            return Err(Error::Synthesis(format!(
                                "edges of class {} are symmetry-locked; conflicting amplitudes {prev} and {amp}",
                                class.class_id
                            )));
                        }
                    }
                }
            }
        }
        if let Some(amp) = chosen {
            omegas.insert(class.class_id, amp);
        }
    }
    Ok(omegas)
}

/// Build the flat drive realizing class amplitudes: one component per driven
/// class at the class gap, with `amp = conj(Omega) / g`.
pub fn pulse_from_class_amplitudes(
    classes: &[EdgeClass],
    omegas: &BTreeMap<usize, C64>,
    tau_gate: f64,
) -> Result<Pulse> {
    let mut components = Vec::new();
    for (&class_id, &omega) in omegas {
        let class = classes
            .iter()
            .find(|c| c.class_id == class_id)
            .ok_or_else(|| Error::Synthesis(format!("unknown edge class {class_id}")))?;
        if class.g_representative.norm() == 0.0 {
            return Err(Error::Synthesis(format!(
                "class {class_id} has zero dipole coupling; its amplitude cannot be driven"
            )));
        }
        if omega.norm() == 0.0 {
            return Err(Error::Synthesis(format!(
                "class {class_id} was assigned a vanishing resonant amplitude"
            )));
        }
        components.push(PulseComponent::new(
            class.delta_e,
            omega.conj() / class.g_representative,
        ));
    }
    // Distinct classes must be separately addressable in frequency.
    for (i, a) in components.iter().enumerate() {
        for b in components.iter().skip(i + 1) {
            if (a.omega - b.omega).abs() <= CLASS_TOL {
                return Err(Error::Synthesis(format!(
                    "two driven classes share the transition gap {}; they cannot be addressed separately",
                    a.omega
                )));
            }
        }
    }
    let pulse = Pulse::new(Envelope::flat(0.0, tau_gate), components);
    pulse.validate()?;
    Ok(pulse)
}

/// Auxiliary vertices attached to exactly one computational vertex, with the
/// attaching edge index: the Lambda legs usable for Z.
fn lambda_legs(graph: &Graph) -> Vec<(usize, usize, usize)> {
    let mut legs = Vec::new();
    for (aux, v) in graph.vertices.iter().enumerate() {
        if v.is_computational() {
            continue;
        }
        let incident = graph.incident_edges(aux);
        if incident.len() != 1 {
            continue;
        }
        let edge = incident[0];
        let (hi, lo) = match graph.edge_endpoints(edge) {
            Some(pair) => pair,
            None => continue,
        };
        let other = if hi == aux { lo } else { hi };
        if graph.vertices[other].is_computational() {
            legs.push((aux, other, edge));
        }
    }
    legs
}

/// Z gate: drive one auxiliary leg so the attached computational state
/// completes `tau Omega = pi (2n + 1)`, returning with phase -1.
pub fn synthesize_z(graph: &Graph, n: u32) -> Result<SynthesisResult> {
    let classes = compute_edge_classes(graph, CLASS_TOL);
    let legs = lambda_legs(graph);
    let (_, _, edge) = legs.first().copied().ok_or_else(|| {
        Error::Synthesis("no auxiliary leg attached to a single computational vertex".into())
    })?;
    let class_id = classes
        .iter()
        .find(|c| c.members.contains(&edge))
        .map(|c| c.class_id)
        .expect("classes partition the edges");

    let omega = c(1.0);
    let tau_gate = std::f64::consts::PI * (2.0 * n as f64 + 1.0) / omega.norm();
    let mut omegas = BTreeMap::new();
    omegas.insert(class_id, omega);
    let pulse = pulse_from_class_amplitudes(&classes, &omegas, tau_gate)?;

    let target = target_unitary(GateName::Z, graph.qubit_count)?;
    let spec = gate_spec_for(graph, GateName::Z, target)?;
    let verification = verify_gate(&spec, &pulse, graph, &VerifyMode::Resonant)?;

    Ok(SynthesisResult {
        omegas,
        tau_gate,
        integers: None,
        achieved_fidelity: verification.fidelity,
        refined: false,
        pulse,
    })
}

/// Hadamard: two resonant legs of a Lambda system with amplitude ratio
/// `sqrt(2) - 1`, opposite phases, and `tau sqrt(|O1|^2 + |O2|^2) = pi (2n+1)`.
///
/// The smaller amplitude sits on the leg to the level-0 state; that choice
/// realizes the walk endpoints `|0> -> (|0>+|1>)/sqrt(2)` and
/// `|1> -> (|0>-|1>)/sqrt(2)` exactly.
pub fn synthesize_hadamard(graph: &Graph, n: u32) -> Result<SynthesisResult> {
    if graph.qubit_count != 1 {
        return Err(Error::Synthesis(
            "Hadamard synthesis expects a single qubit".into(),
        ));
    }
    let comp = graph.computational_vertices()?;
    let (v0, v1) = (comp[0], comp[1]);
    // The shared auxiliary: connected to both computational states.
    let mut hub = None;
    for (aux, v) in graph.vertices.iter().enumerate() {
        if v.is_computational() {
            continue;
        }
        let mut to0 = None;
        let mut to1 = None;
        for e in graph.incident_edges(aux) {
            let (hi, lo) = graph.edge_endpoints(e).unwrap();
            let other = if hi == aux { lo } else { hi };
            if other == v0 {
                to0 = Some(e);
            } else if other == v1 {
                to1 = Some(e);
            }
        }
        if let (Some(e0), Some(e1)) = (to0, to1) {
            hub = Some((e0, e1));
            break;
        }
    }
    let (edge0, edge1) = hub.ok_or_else(|| {
        Error::Synthesis("no auxiliary state couples to both computational states".into())
    })?;

    let gap0 = graph.delta_e(edge0);
    let gap1 = graph.delta_e(edge1);
    if (gap0 - gap1).abs() <= CLASS_TOL {
        return Err(Error::Synthesis(
            "both legs share the transition gap; they cannot be addressed separately".into(),
        ));
    }

    let classes = compute_edge_classes(graph, CLASS_TOL);
    let class_of = |edge: usize| {
        classes
            .iter()
            .find(|c| c.members.contains(&edge))
            .map(|c| c.class_id)
            .expect("classes partition the edges")
    };

    let ratio = 2.0_f64.sqrt() - 1.0;
    let omega1 = c(1.0);
    let omega0 = c(-ratio);
    let w = (omega1.norm_sqr() + omega0.norm_sqr()).sqrt();
    let tau_gate = std::f64::consts::PI * (2.0 * n as f64 + 1.0) / w;

    let mut omegas = BTreeMap::new();
    omegas.insert(class_of(edge1), omega1);
    omegas.insert(class_of(edge0), omega0);
    let pulse = pulse_from_class_amplitudes(&classes, &omegas, tau_gate)?;

    let target = target_unitary(GateName::H, 1)?;
    let spec = gate_spec_for(graph, GateName::H, target)?;
    let verification = verify_gate(&spec, &pulse, graph, &VerifyMode::Resonant)?;

    Ok(SynthesisResult {
        omegas,
        tau_gate,
        integers: None,
        achieved_fidelity: verification.fidelity,
        refined: false,
        pulse,
    })
}

/// The four CZ walk edges around the |11> loop, as edge indices.
struct CzLoopEdges {
    a: usize,       // |11> - |12>
    a_prime: usize, // |11> - |21>
    b: usize,       // |12> - |22>
    b_prime: usize, // |21> - |22>
}

fn cz_loop_edges(graph: &Graph) -> Result<CzLoopEdges> {
    let by_levels = |levels: &[u32]| -> Result<usize> {
        graph
            .vertices
            .iter()
            .position(|v| v.levels() == Some(levels))
            .ok_or_else(|| Error::Synthesis(format!("missing state with levels {levels:?}")))
    };
    let v11 = by_levels(&[1, 1])?;
    let v12 = by_levels(&[1, 2])?;
    let v21 = by_levels(&[2, 1])?;
    let v22 = by_levels(&[2, 2])?;
    let edge_between = |a: usize, b: usize| -> Result<usize> {
        (0..graph.edges.len())
            .find(|&e| {
                let Some((hi, lo)) = graph.edge_endpoints(e) else {
                    return false;
                };
                (hi == a && lo == b) || (hi == b && lo == a)
            })
            .ok_or_else(|| {
                Error::Synthesis(format!(
                    "missing walk edge {} - {}",
                    graph.vertices[a].label, graph.vertices[b].label
                ))
            })
    };
    Ok(CzLoopEdges {
        a: edge_between(v11, v12)?,
        a_prime: edge_between(v11, v21)?,
        b: edge_between(v12, v22)?,
        b_prime: edge_between(v21, v22)?,
    })
}

/// Walk-4 generator on the loop (|11>, |12>, |22>, |21>) for given edge
/// amplitudes (stored as `Lambda[hi, lo]`).
fn walk4_block(omega_a: C64, omega_ap: C64, omega_b: C64, omega_bp: C64) -> Array2<C64> {
    let mut block = Array2::<C64>::zeros((4, 4));
    let mut put = |i: usize, j: usize, v: C64| {
        block[[i, j]] = v;
        block[[j, i]] = v.conj();
    };
    put(1, 0, omega_a); // <12|L|11>
    put(3, 0, omega_ap); // <21|L|11>
    put(2, 1, omega_b); // <22|L|12>
    put(2, 3, omega_bp); // <22|L|21>
    block
}

/// Residuals of the walk-4 endpoint `exp(-i tau L) |11> = -|11>`.
fn walk4_residual(tau: f64, block: &Array2<C64>) -> Vec<f64> {
    let eig = HermitianEigen::new(block).expect("4x4 walk block is Hermitian");
    let mut start = Array1::<C64>::zeros(4);
    start[0] = c(1.0);
    let out = eig.apply_exp(tau, &start);
    let mut residual = Vec::with_capacity(8);
    for i in 0..4 {
        let target = if i == 0 { c(-1.0) } else { c(0.0) };
        residual.push(out[i].re - target.re);
        residual.push(out[i].im - target.im);
    }
    residual
}

/// Levenberg-Marquardt on a small dense least-squares problem.
fn refine_least_squares(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = f(&x);
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    for _ in 0..max_iter {
        if cost < 1e-28 {
            break;
        }
        let m = r.len();
        // Forward-difference Jacobian.
        let mut jac = vec![vec![0.0; n]; m];
        for j in 0..n {
            let h = 1e-7 * x[j].abs().max(1.0);
            let mut xh = x.clone();
            xh[j] += h;
            let rh = f(&xh);
            for i in 0..m {
                jac[i][j] = (rh[i] - r[i]) / h;
            }
        }
        // Normal equations with damping.
        let mut a = vec![vec![0.0; n]; n];
        let mut b = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (0..m).map(|k| jac[k][i] * jac[k][j]).sum();
            }
            b[i] = -(0..m).map(|k| jac[k][i] * r[k]).sum::<f64>();
        }
        let mut improved = false;
        for _ in 0..16 {
            let mut damped = a.clone();
            for i in 0..n {
                damped[i][i] += lambda * (a[i][i].max(1e-12));
            }
            let Some(delta) = solve_dense(&damped, &b) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(xi, di)| xi + di).collect();
            let rt = f(&trial);
            let trial_cost: f64 = rt.iter().map(|v| v * v).sum();
            if trial_cost < cost {
                x = trial;
                r = rt;
                cost = trial_cost;
                lambda = (lambda * 0.3).max(1e-14);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (x, cost.sqrt())
}

fn solve_dense(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = m[row][col] / m[col][col];
            let (pivot_rows, tail) = m.split_at_mut(row);
            let pivot = &pivot_rows[col];
            for (k, value) in tail[0].iter_mut().enumerate().take(n).skip(col) {
                *value -= factor * pivot[k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// CZ synthesis from the odd integers `(n, m)` and the return windings
/// `(n_A, n_A')` of walks 2 and 3.
///
/// Walks 2 and 3 fix `tau Omega_A = 2 pi n_A`, `tau Omega_A' = 2 pi n_A'`.
/// The analytic seed for `(Omega_B, Omega_B')` solves
/// `|Omega_A' Omega_B* - Omega_A Omega_B'*| = pi^2 n m / tau^2` and
/// `|Omega_A Omega_B + Omega_A' Omega_B'| = R2` (the loop-to-chain values
/// that place the walk-4 eigenvalues on odd half-integers), with the phase
/// gauge `arg Omega_B = 0`; a least-squares refinement then polishes the
/// walk-4 endpoint to residual <= 1e-10.
pub fn synthesize_cz(
    graph: &Graph,
    n: i64,
    m: i64,
    n_a: i64,
    n_a_prime: i64,
) -> Result<SynthesisResult> {
    if n % 2 == 0 || m % 2 == 0 || m <= 0 || n <= m {
        return Err(Error::InfeasibleIntegers(format!(
            "need odd integers 0 < m < n, got n = {n}, m = {m}"
        )));
    }
    let p = ((n_a * n_a + n_a_prime * n_a_prime) as f64).sqrt();
    if !(m as f64 <= p && p <= n as f64) {
        return Err(Error::InfeasibleIntegers(format!(
            "ordering violated: need m <= sqrt(n_A^2 + n_A'^2) <= n, got sqrt = {p}"
        )));
    }
    let discriminant = ((n * n) as f64 - 4.0 * p * p) * (4.0 * p * p - (m * m) as f64);
    if discriminant < 0.0 {
        return Err(Error::InfeasibleIntegers(format!(
            "no loop amplitudes place the walk-4 spectrum on odd half-integers: need m <= 2 sqrt(n_A^2 + n_A'^2) <= n (sqrt = {p})"
        )));
    }

    let edges = cz_loop_edges(graph)?;
    let classes = compute_edge_classes(graph, CLASS_TOL);
    let class_of = |edge: usize| {
        classes
            .iter()
            .find(|c| c.members.contains(&edge))
            .map(|c| c.class_id)
            .expect("classes partition the edges")
    };
    let (cls_a, cls_ap, cls_b, cls_bp) = (
        class_of(edges.a),
        class_of(edges.a_prime),
        class_of(edges.b),
        class_of(edges.b_prime),
    );
    if cls_b == cls_a || cls_b == cls_ap || cls_bp == cls_a || cls_bp == cls_ap {
        return Err(Error::Synthesis(
            "the |22>-adjacent edges are symmetry-locked to the walk-2/3 edges; the interaction must break the class".into(),
        ));
    }

    let tau = 2.0 * std::f64::consts::PI;
    let omega_a = n_a as f64;
    let omega_ap = n_a_prime as f64;
    let r1 = (n * m) as f64 / 4.0;
    let r2 = discriminant.sqrt() / 4.0;

    // Real seed solving both modulus equations (one sign branch suffices;
    // the others are gauge copies).
    let p2 = p * p;
    let beta = (omega_ap * r1 + omega_a * r2) / p2;
    let beta_p = (-omega_a * r1 + omega_ap * r2) / p2;

    let residual_fn = |x: &[f64]| -> Vec<f64> {
        let block = walk4_block(
            c(omega_a),
            c(omega_ap),
            C64::new(x[0], x[1]),
            C64::new(x[2], x[3]),
        );
        walk4_residual(tau, &block)
    };
    let (solution, residual) = refine_least_squares(&residual_fn, &[beta, 0.0, beta_p, 0.0], 60);
    if residual > 1e-6 {
        return Err(Error::RefinementStalled { residual });
    }
    let omega_b = C64::new(solution[0], solution[1]);
    let omega_bp = C64::new(solution[2], solution[3]);

    let mut omegas = BTreeMap::new();
    omegas.insert(cls_a, c(omega_a));
    omegas.insert(cls_ap, c(omega_ap));
    omegas.insert(cls_b, omega_b);
    omegas.insert(cls_bp, omega_bp);
    let pulse = pulse_from_class_amplitudes(&classes, &omegas, tau)?;

    let target = target_unitary(GateName::Cz, 2)?;
    let spec = gate_spec_for(graph, GateName::Cz, target)?;
    let verification = verify_gate(&spec, &pulse, graph, &VerifyMode::Resonant)?;

    Ok(SynthesisResult {
        omegas,
        tau_gate: tau,
        integers: Some(CzIntegers {
            n,
            m,
            n_a,
            n_a_prime,
        }),
        achieved_fidelity: verification.fidelity,
        refined: true,
        pulse,
    })
}

/// Gate spec with the affected vertices filled from the graph.
pub fn gate_spec_for(graph: &Graph, name: GateName, target: Array2<C64>) -> Result<GateSpec> {
    let comp = graph.computational_vertices()?;
    if target.nrows() != comp.len() {
        return Err(Error::DimensionMismatch(target.nrows(), comp.len()));
    }
    GateSpec::new(
        name,
        target,
        comp.iter()
            .map(|&i| graph.vertices[i].label.clone())
            .collect(),
    )
}

#[derive(Debug, Clone)]
pub enum VerifyMode {
    Resonant,
    Coined {
        dt: f64,
        truncation: usize,
        mode: CoinedMode,
    },
    Exact {
        dt: f64,
    },
}

/// One verification walk: started at `basis_label`, how much returned to the
/// qubit domain and with what phase relative to the plan column.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkOutcome {
    pub basis_label: String,
    /// Probability of ending inside the computational subspace.
    pub return_probability: f64,
    /// Overlap with the plan column; its argument is the walk phase.
    pub plan_overlap: C64,
    pub phase: f64,
    pub incomplete: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateVerification {
    pub walks: Vec<WalkOutcome>,
    /// Achieved operator on the computational subspace, column per walk.
    pub achieved: Array2<C64>,
    pub fidelity: f64,
    pub unitary_deviation: f64,
    pub incomplete_return: bool,
}

/// Run one walk per computational basis state, assemble the achieved
/// operator column-by-column, and compare with the plan.
pub fn verify_gate(
    spec: &GateSpec,
    pulse: &Pulse,
    graph: &Graph,
    mode: &VerifyMode,
) -> Result<GateVerification> {
    let comp = graph.computational_vertices()?;
    let d = comp.len();
    if spec.target.nrows() != d {
        return Err(Error::DimensionMismatch(spec.target.nrows(), d));
    }
    let plan = WalkPlan::from_target(&spec.target)?;

    let mut achieved = Array2::<C64>::zeros((d, d));
    let mut walks = Vec::with_capacity(d);
    let mut incomplete_any = false;

    for (s, &vertex) in comp.iter().enumerate() {
        let initial = WalkerState::basis(graph, &graph.vertices[vertex].label)?;
        let final_walker = match mode {
            VerifyMode::Resonant => {
                resonant_walk_run(graph, pulse, &initial, CLASS_TOL, 2)?.final_walker
            }
            VerifyMode::Coined {
                dt,
                truncation,
                mode,
            } => {
                let options = CoinedOptions::default();
                coined_walk_run(graph, pulse, &initial, *dt, *truncation, *mode, &options)?
                    .final_walker
            }
            VerifyMode::Exact { dt } => {
                exact_propagator(graph, pulse, &initial, *dt, 2)?
                    .1
                    .final_walker
            }
        };

        let mut column = Array1::<C64>::zeros(d);
        for (row, &v) in comp.iter().enumerate() {
            column[row] = final_walker.amplitudes[v];
        }
        let return_probability: f64 = column.iter().map(|z| z.norm_sqr()).sum::<f64>()
            / final_walker
                .amplitudes
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>();
        let incomplete = 1.0 - return_probability > RETURN_TOL;
        incomplete_any |= incomplete;

        let plan_overlap: C64 = plan.columns[s]
            .iter()
            .zip(column.iter())
            .map(|(p, a)| p.conj() * a)
            .sum();
        walks.push(WalkOutcome {
            basis_label: graph.vertices[vertex].label.clone(),
            return_probability,
            plan_overlap,
            phase: plan_overlap.arg(),
            incomplete,
        });
        for row in 0..d {
            achieved[[row, s]] = column[row];
        }
    }

    let product = spec.target.t().mapv(|z| z.conj()).dot(&achieved);
    let trace: C64 = (0..d).map(|i| product[[i, i]]).sum();
    let fidelity = trace.norm() / d as f64;

    Ok(GateVerification {
        walks,
        fidelity,
        unitary_deviation: unitarity_deviation(&achieved),
        achieved,
        incomplete_return: incomplete_any,
    })
}

/// Global-phase-invariant gate fidelity `|Tr(U_target^dag U_achieved)| / d`.
///
/// Both operators must be unitary within 1e-9; use [`verify_gate`] for
/// leaky, subunitary assembled operators.
pub fn gate_fidelity(u_achieved: &Array2<C64>, u_target: &Array2<C64>) -> Result<f64> {
    if u_achieved.nrows() != u_target.nrows() || u_achieved.ncols() != u_target.ncols() {
        return Err(Error::DimensionMismatch(
            u_achieved.nrows(),
            u_target.nrows(),
        ));
    }
    for (name, u) in [("achieved", u_achieved), ("target", u_target)] {
        let dev = unitarity_deviation(u);
        if dev > 1e-9 {
            return Err(Error::NotUnitary {
                deviation: dev,
                tol: 1e-9,
            })
            .map_err(|e| match e {
                Error::NotUnitary { deviation, tol } => Error::InvalidArgument(format!(
                    "{name} operator is not unitary within {tol:.0e} (deviation {deviation:.3e})"
                )),
                other => other,
            });
        }
    }
    let d = u_target.nrows() as f64;
    let product = u_target.t().mapv(|z| z.conj()).dot(u_achieved);
    let trace: C64 = (0..u_target.nrows()).map(|i| product[[i, i]]).sum();
    Ok(trace.norm() / d)
}

/// Resonant generator for explicitly-given class amplitudes; exposed for
/// feasibility scans.
pub fn resonant_generator(
    graph: &Graph,
    classes: &[EdgeClass],
    omegas: &BTreeMap<usize, C64>,
    tau_gate: f64,
) -> Result<Array2<C64>> {
    let pulse = pulse_from_class_amplitudes(classes, omegas, tau_gate)?;
    adjacency_from_drive(graph, &pulse, CLASS_TOL)
}

#[cfg(test)]
mod tests;
