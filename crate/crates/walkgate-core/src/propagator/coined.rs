//! Coined quantum walk on the graph tensored with one truncated quasienergy
//! ladder per pulse component.
//!
//! Each component `w` contributes a ladder index `m_w`; the co-rotating
//! interaction raises the walker while raising the ladder
//! (`<hi, m+1| V- |lo, m> = conj(amp) conj(g)`), the counter-rotating one
//! raises the walker while lowering the ladder
//! (`<hi, m-1| V+ |lo, m> = amp conj(g)`). Per step the state first picks up
//! the free phases `exp(-i dt E_xi)` and `exp(+i dt sum_w w m_w)` together,
//! then the counter-rotating and co-rotating exponentials; keeping both
//! phase factors on the same side of the coupling factors matters, because
//! only their product is constant on the resonance-degenerate pairs. After
//! the last step the final corrections `exp(+i t_end E_xi)` and
//! `exp(-i t_end sum_w w m_w)` are applied and the walker is read out by
//! summing amplitudes coherently over the ladder. In the classical-field
//! limit the ladders are displacement-degenerate, so the coherent sum is the
//! thermodynamic-limit readout; it reproduces the exact propagator as
//! `dt -> 0` and the resonant walk `exp(-i tau Lambda)` exactly when every
//! component is resonant.
//!
//! The ladder is truncated at `|m_w| <= M` with a guard ring at `M + 1`:
//! amplitude reaching the guard is absorbed after each step and accounted as
//! `boundary_leakage`, so `norm^2 + leakage` is conserved.

use ndarray::{Array1, Array2};

use crate::drive::{effective_time, generalized_interaction_terms, CouplingFunction, Pulse};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::HermitianEigen;
use crate::C64;

use super::{sample_stride, step_grid, PropagationResult, TrajectoryRow, WalkerState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoinedMode {
    /// Both the co-rotating and counter-rotating exponentials.
    Full,
    /// Rotating wave approximation: counter-rotating factor dropped.
    Rwa,
}

#[derive(Debug, Clone)]
pub struct CoinedOptions {
    /// Error out when the absorbed boundary leakage exceeds this.
    pub leakage_threshold: f64,
    /// Tolerance for deciding which edges a component is resonant with
    /// (used only for the co-moving frame of the purity diagnostic).
    pub resonance_tol: f64,
    /// Target number of trajectory rows.
    pub sample_target: usize,
    /// Optional generalized field-matter coupling `F(x)` with its expansion
    /// order; `None` means the dipole coupling `F(x) = x`.
    pub coupling: Option<(CouplingFunction, usize)>,
}

impl Default for CoinedOptions {
    fn default() -> Self {
        CoinedOptions {
            leakage_threshold: 1e-6,
            resonance_tol: 1e-9,
            sample_target: 256,
            coupling: None,
        }
    }
}

/// Dense amplitudes over `(vertex, coin multi-index)` with one ladder index
/// per pulse component, each confined to `[-(M+1), M+1]` including the guard.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderState {
    pub amplitudes: Array1<C64>,
    pub truncation: usize,
    n_vertices: usize,
    n_components: usize,
}

impl LadderState {
    /// Walker state placed at the ladder origin `m = 0`.
    pub fn from_walker(walker: &WalkerState, truncation: usize, n_components: usize) -> Self {
        let layout = Layout::new(walker.amplitudes.len(), n_components, truncation);
        let mut amplitudes = Array1::<C64>::zeros(layout.dim());
        let origin = layout.ladder_origin();
        for (v, amp) in walker.amplitudes.iter().enumerate() {
            amplitudes[layout.index(v, origin)] = *amp;
        }
        LadderState {
            amplitudes,
            truncation,
            n_vertices: walker.amplitudes.len(),
            n_components,
        }
    }

    fn layout(&self) -> Layout {
        Layout::new(self.n_vertices, self.n_components, self.truncation)
    }

    /// Per-vertex probabilities with the coins traced out.
    pub fn site_probabilities(&self) -> Vec<f64> {
        let layout = self.layout();
        let mut probs = vec![0.0; self.n_vertices];
        for (v, p) in probs.iter_mut().enumerate() {
            for l in 0..layout.ladder_total {
                *p += self.amplitudes[layout.index(v, l)].norm_sqr();
            }
        }
        let total: f64 = probs.iter().sum();
        if total > 0.0 {
            for p in probs.iter_mut() {
                *p /= total;
            }
        }
        probs
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Index bookkeeping for the vertex-major `(vertex, ladder)` flattening.
struct Layout {
    n_vertices: usize,
    n_components: usize,
    /// Ladder values per component, `2 (M + 1) + 1` including the guard ring.
    per_component: usize,
    /// Offset so that `m = -(M+1)` maps to slot 0.
    half: i32,
    ladder_total: usize,
    strides: Vec<usize>,
}

impl Layout {
    fn new(n_vertices: usize, n_components: usize, truncation: usize) -> Self {
        let half = truncation as i32 + 1;
        let per_component = 2 * (truncation + 1) + 1;
        let ladder_total = per_component.pow(n_components as u32);
        let mut strides = vec![1usize; n_components];
        for c in (0..n_components.saturating_sub(1)).rev() {
            strides[c] = strides[c + 1] * per_component;
        }
        Layout {
            n_vertices,
            n_components,
            per_component,
            half,
            ladder_total,
            strides,
        }
    }

    fn dim(&self) -> usize {
        self.n_vertices * self.ladder_total
    }

    fn index(&self, vertex: usize, ladder: usize) -> usize {
        vertex * self.ladder_total + ladder
    }

    fn ladder_origin(&self) -> usize {
        let mut l = 0usize;
        for c in 0..self.n_components {
            l += self.half as usize * self.strides[c];
        }
        l
    }

    fn m_of(&self, ladder: usize, component: usize) -> i32 {
        ((ladder / self.strides[component]) % self.per_component) as i32 - self.half
    }

    /// Ladder slot shifted by `shift` on one component; `None` if out of range.
    fn shifted(&self, ladder: usize, component: usize, shift: i32) -> Option<usize> {
        let m = self.m_of(ladder, component) + shift;
        if m.abs() > self.half {
            return None;
        }
        let old = ((ladder / self.strides[component]) % self.per_component) as i64;
        let new = (m + self.half) as i64;
        Some((ladder as i64 + (new - old) * self.strides[component] as i64) as usize)
    }

    fn is_guard(&self, ladder: usize) -> bool {
        (0..self.n_components).any(|c| self.m_of(ladder, c).abs() == self.half)
    }

    fn in_band(&self, m: &[i32]) -> bool {
        m.iter().all(|v| v.abs() < self.half)
    }

    fn encode(&self, m: &[i32]) -> usize {
        m.iter()
            .enumerate()
            .map(|(c, &v)| (v + self.half) as usize * self.strides[c])
            .sum()
    }
}

/// Ladder-shift terms of one component: `(shift, coefficient)` multiplying
/// the walker-raising jump operator `conj(g) |hi><lo|`.
fn component_terms(pulse: &Pulse, options: &CoinedOptions) -> Result<Vec<Vec<(i32, C64)>>> {
    pulse
        .components
        .iter()
        .map(|comp| match &options.coupling {
            None => Ok(vec![(1, comp.amp.conj()), (-1, comp.amp)]),
            Some((f, order)) => generalized_interaction_terms(f, comp, *order),
        })
        .collect()
}

struct Generators {
    minus: Array2<C64>,
    plus: Array2<C64>,
}

/// Assemble the static co- and counter-rotating generators on the full
/// `(vertex, ladder)` space. Couplings whose target leaves the guarded band
/// are truncated.
fn build_generators(
    graph: &Graph,
    pulse: &Pulse,
    layout: &Layout,
    options: &CoinedOptions,
) -> Result<Generators> {
    let dim = layout.dim();
    let mut minus = Array2::<C64>::zeros((dim, dim));
    let mut plus = Array2::<C64>::zeros((dim, dim));
    let terms = component_terms(pulse, options)?;

    for (i, edge) in graph.edges.iter().enumerate() {
        let (hi, lo) = graph.edge_endpoints(i).ok_or_else(|| {
            Error::InvalidGraph(format!(
                "edge {}-{} has missing endpoints",
                edge.hi, edge.lo
            ))
        })?;
        let g_conj = edge.g.conj();
        for (c, comp_terms) in terms.iter().enumerate() {
            for &(shift, coeff) in comp_terms {
                let target = if shift >= 0 { &mut minus } else { &mut plus };
                let weight = coeff * g_conj;
                for l in 0..layout.ladder_total {
                    let Some(l_to) = layout.shifted(l, c, shift) else {
                        continue;
                    };
                    let row = layout.index(hi, l_to);
                    let col = layout.index(lo, l);
                    target[[row, col]] += weight;
                    target[[col, row]] += weight.conj();
                }
            }
        }
    }
    Ok(Generators { minus, plus })
}

/// Resonant co-moving displacement `d_w(xi)` per component: on each connected
/// component of the `w`-resonant subgraph the ladder origin rides along with
/// the walker's energy, `d = (E_xi - E_ref) / w`.
fn comoving_displacements(graph: &Graph, pulse: &Pulse, tol_res: f64) -> Vec<Vec<i32>> {
    let n = graph.dim();
    pulse
        .components
        .iter()
        .map(|comp| {
            let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
            for (i, _) in graph.edges.iter().enumerate() {
                if (graph.delta_e(i) - comp.omega).abs() <= tol_res {
                    if let Some((hi, lo)) = graph.edge_endpoints(i) {
                        adjacency[hi].push(lo);
                        adjacency[lo].push(hi);
                    }
                }
            }
            let mut d = vec![0i32; n];
            let mut seen = vec![false; n];
            for start in 0..n {
                if seen[start] || adjacency[start].is_empty() {
                    continue;
                }
                let e_ref = graph.vertices[start].energy;
                let mut stack = vec![start];
                seen[start] = true;
                while let Some(v) = stack.pop() {
                    d[v] = ((graph.vertices[v].energy - e_ref) / comp.omega).round() as i32;
                    for &w in &adjacency[v] {
                        if !seen[w] {
                            seen[w] = true;
                            stack.push(w);
                        }
                    }
                }
            }
            d
        })
        .collect()
}

/// Purity of the reduced walker density matrix, with the ladders aligned to
/// the resonant co-moving frame before tracing. Rigid ladder displacements
/// that merely ride along with resonant transitions cost nothing in the
/// classical-field limit and are undone here; genuine non-resonant coin
/// activity is what lowers the purity.
fn aligned_purity(state: &Array1<C64>, layout: &Layout, displacements: &[Vec<i32>]) -> f64 {
    let nv = layout.n_vertices;
    let nc = layout.n_components;
    let mut rho = Array2::<C64>::zeros((nv, nv));
    let mut m = vec![0i32; nc];
    let mut shifted = vec![0i32; nc];
    for l in 0..layout.ladder_total {
        for (c, slot) in m.iter_mut().enumerate() {
            *slot = layout.m_of(l, c);
        }
        for v in 0..nv {
            // amplitude at (v, m + d(v)) contributes to row v of rho.
            let mut ok = true;
            for c in 0..nc {
                shifted[c] = m[c] + displacements[c][v];
                if shifted[c].abs() > layout.half - 1 {
                    ok = false;
                    break;
                }
            }
            if !ok || !layout.in_band(&m) {
                continue;
            }
            let av = state[layout.index(v, layout.encode(&shifted))];
            if av == C64::new(0.0, 0.0) {
                continue;
            }
            for w in 0..nv {
                let mut ok2 = true;
                for c in 0..nc {
                    shifted[c] = m[c] + displacements[c][w];
                    if shifted[c].abs() > layout.half - 1 {
                        ok2 = false;
                        break;
                    }
                }
                if !ok2 {
                    continue;
                }
                let aw = state[layout.index(w, layout.encode(&shifted))];
                rho[[v, w]] += av * aw.conj();
            }
        }
    }
    let trace: f64 = (0..nv).map(|v| rho[[v, v]].re).sum();
    if trace <= 0.0 {
        return 1.0;
    }
    let trace_sq: f64 = rho.iter().map(|z| z.norm_sqr()).sum();
    trace_sq / (trace * trace)
}

/// Propagate a coined walk over one pulse and read the walker out.
pub fn coined_walk_run(
    graph: &Graph,
    pulse: &Pulse,
    initial: &WalkerState,
    dt: f64,
    truncation: usize,
    mode: CoinedMode,
    options: &CoinedOptions,
) -> Result<PropagationResult> {
    if truncation < 1 {
        return Err(Error::InvalidArgument(
            "coin truncation must be at least 1".into(),
        ));
    }
    if dt <= 0.0 {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    pulse.validate()?;
    let n = graph.dim();
    if initial.amplitudes.len() != n {
        return Err(Error::DimensionMismatch(initial.amplitudes.len(), n));
    }

    let n_components = pulse.components.len();
    let layout = Layout::new(n, n_components, truncation);
    let env = &pulse.envelope;
    let (steps, dt) = step_grid(env.t_gate, dt);
    let stride = sample_stride(steps, options.sample_target);

    let generators = build_generators(graph, pulse, &layout, options)?;
    let eig_minus = HermitianEigen::new(&generators.minus)?;
    let eig_plus = match mode {
        CoinedMode::Full => Some(HermitianEigen::new(&generators.plus)?),
        CoinedMode::Rwa => None,
    };

    // Combined per-step free phase exp(-i dt E_xi) exp(+i dt sum_w w m_w);
    // the paper's rotating frame carries the gap phase exp(-i dE t) on the
    // raising operator, which fixes this sign.
    let dim = layout.dim();
    let mut step_phase = Array1::<C64>::zeros(dim);
    for v in 0..n {
        let e = graph.vertices[v].energy;
        for l in 0..layout.ladder_total {
            let idx = layout.index(v, l);
            let m_omega: f64 = (0..n_components)
                .map(|c| layout.m_of(l, c) as f64 * pulse.components[c].omega)
                .sum();
            step_phase[idx] = (C64::i() * dt * (m_omega - e)).exp();
        }
    }

    let guard: Vec<usize> = (0..layout.ladder_total)
        .filter(|&l| layout.is_guard(l))
        .flat_map(|l| (0..n).map(move |v| v * layout.ladder_total + l))
        .collect();

    // Flat envelopes admit a precomposed constant step operator
    // E- . E+ . D (free phases first, then the coupling factors).
    let flat = matches!(env.kind, crate::drive::EnvelopeKind::Flat);
    let merged_step: Option<Array2<C64>> = if flat {
        let mut step = match &eig_plus {
            Some(plus) => eig_minus.exp_matrix(dt).dot(&plus.exp_matrix(dt)),
            None => eig_minus.exp_matrix(dt),
        };
        for ((_, j), z) in step.indexed_iter_mut() {
            *z *= step_phase[j];
        }
        Some(step)
    } else {
        None
    };

    let mut state = LadderState::from_walker(initial, truncation, n_components);
    // Initial interaction-picture phase at t_start (ladder starts at m = 0).
    if env.t_start != 0.0 {
        for v in 0..n {
            let phase = (-C64::i() * env.t_start * graph.vertices[v].energy).exp();
            for l in 0..layout.ladder_total {
                state.amplitudes[layout.index(v, l)] *= phase;
            }
        }
    }

    let mut leakage = 0.0f64;
    let mut trajectory = Vec::new();
    trajectory.push(TrajectoryRow {
        t: env.t_start,
        tau: 0.0,
        probabilities: state.site_probabilities(),
        norm: state.norm(),
        leakage: 0.0,
    });

    for k in 0..steps {
        let t_mid = env.t_start + (k as f64 + 0.5) * dt;
        if let Some(step_matrix) = &merged_step {
            state.amplitudes = step_matrix.dot(&state.amplitudes);
        } else {
            let phi = env.phi(t_mid);
            for (amp, phase) in state.amplitudes.iter_mut().zip(step_phase.iter()) {
                *amp *= phase;
            }
            if let Some(plus) = &eig_plus {
                state.amplitudes = plus.apply_exp(dt * phi, &state.amplitudes);
            }
            state.amplitudes = eig_minus.apply_exp(dt * phi, &state.amplitudes);
        }
        // Absorb amplitude that reached the guard ring.
        for &idx in &guard {
            leakage += state.amplitudes[idx].norm_sqr();
            state.amplitudes[idx] = C64::new(0.0, 0.0);
        }
        if (k + 1) % stride == 0 || k + 1 == steps {
            let t = env.t_start + (k as f64 + 1.0) * dt;
            trajectory.push(TrajectoryRow {
                t,
                tau: effective_time(env, t),
                probabilities: state.site_probabilities(),
                norm: state.norm(),
                leakage,
            });
        }
    }

    // Final corrections: undo the free phases accumulated up to t_end.
    let t_end = env.t_end();
    for v in 0..n {
        let e_phase = (C64::i() * t_end * graph.vertices[v].energy).exp();
        for l in 0..layout.ladder_total {
            let m_omega: f64 = (0..n_components)
                .map(|c| layout.m_of(l, c) as f64 * pulse.components[c].omega)
                .sum();
            state.amplitudes[layout.index(v, l)] *= e_phase * (-C64::i() * t_end * m_omega).exp();
        }
    }

    let displacements = comoving_displacements(graph, pulse, options.resonance_tol);
    let coin_purity = aligned_purity(&state.amplitudes, &layout, &displacements);

    let norm_sqr: f64 = state.amplitudes.iter().map(|z| z.norm_sqr()).sum();
    let norm_drift = (norm_sqr + leakage - 1.0).abs();

    // Thermodynamic-limit readout: coherent sum over the ladder per vertex.
    let mut readout = Array1::<C64>::zeros(n);
    for v in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for l in 0..layout.ladder_total {
            if !layout.is_guard(l) {
                acc += state.amplitudes[layout.index(v, l)];
            }
        }
        readout[v] = acc;
    }
    let readout_norm = readout.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if readout_norm == 0.0 {
        return Err(Error::InvalidArgument(
            "coherent readout annihilated the state; the walk did not return".into(),
        ));
    }
    readout.mapv_inplace(|z| z / readout_norm);

    if leakage > options.leakage_threshold {
        return Err(Error::LeakageExceeded {
            leakage,
            threshold: options.leakage_threshold,
        });
    }

    Ok(PropagationResult {
        trajectory,
        final_walker: WalkerState {
            amplitudes: readout,
        },
        norm_drift,
        boundary_leakage: leakage,
        coin_purity,
        warnings: Vec::new(),
    })
}
