//! Control pulses and the driving Hamiltonians they generate.
//!
//! A pulse is an envelope `Phi(t)` in `[0, 1]` times a sum of frequency
//! components `amp * exp(-i w t) + conj(amp) * exp(i w t)`. The interaction
//! matrix element on an edge with gap `dE` carries the extra rotation
//! `exp(-i dE t)`, so the co-rotating detuning is `dE - w` and the
//! counter-rotating one `dE + w`.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::C64;

/// One frequency component of the control field.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseComponent {
    pub omega: f64,
    pub amp: C64,
}

impl PulseComponent {
    pub fn new(omega: f64, amp: C64) -> Self {
        PulseComponent { omega, amp }
    }
}

/// Pulse envelope `Phi(t)`: zero outside `[t_start, t_start + t_gate]`,
/// within `[0, 1]` inside.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvelopeKind {
    Flat,
    /// `sin^2(pi (t - t_start) / t_gate)`.
    RaisedCosine,
    /// Gaussian centred on the window, hard-truncated at `truncation` sigmas.
    Gaussian {
        sigma: f64,
        truncation: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub kind: EnvelopeKind,
    pub t_start: f64,
    pub t_gate: f64,
}

impl Envelope {
    pub fn flat(t_start: f64, t_gate: f64) -> Self {
        Envelope {
            kind: EnvelopeKind::Flat,
            t_start,
            t_gate,
        }
    }

    pub fn raised_cosine(t_start: f64, t_gate: f64) -> Self {
        Envelope {
            kind: EnvelopeKind::RaisedCosine,
            t_start,
            t_gate,
        }
    }

    pub fn gaussian(t_start: f64, t_gate: f64, sigma: f64, truncation: f64) -> Self {
        Envelope {
            kind: EnvelopeKind::Gaussian { sigma, truncation },
            t_start,
            t_gate,
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.t_gate
    }

    pub fn phi(&self, t: f64) -> f64 {
        if t < self.t_start || t > self.t_end() || self.t_gate <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            EnvelopeKind::Flat => 1.0,
            EnvelopeKind::RaisedCosine => {
                let x = std::f64::consts::PI * (t - self.t_start) / self.t_gate;
                x.sin().powi(2)
            }
            EnvelopeKind::Gaussian { sigma, truncation } => {
                let center = self.t_start + 0.5 * self.t_gate;
                let dt = t - center;
                if dt.abs() > truncation * sigma {
                    0.0
                } else {
                    (-0.5 * (dt / sigma).powi(2)).exp()
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub envelope: Envelope,
    pub components: Vec<PulseComponent>,
}

impl Pulse {
    pub fn new(envelope: Envelope, components: Vec<PulseComponent>) -> Self {
        Pulse {
            envelope,
            components,
        }
    }

    /// Component frequencies must be pairwise distinct.
    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.components.iter().enumerate() {
            if a.omega <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "component frequency must be positive, got {}",
                    a.omega
                )));
            }
            for b in self.components.iter().skip(i + 1) {
                if a.omega == b.omega {
                    return Err(Error::InvalidArgument(format!(
                        "duplicate component frequency {}",
                        a.omega
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-edge detuning pair `(dE - w, dE + w)`; the second is built from the
/// first so `plus = minus + 2 w` holds exactly in floating point.
pub fn detunings(graph: &Graph, omega: f64) -> Vec<(f64, f64)> {
    (0..graph.edges.len())
        .map(|i| {
            let minus = graph.delta_e(i) - omega;
            (minus, minus + 2.0 * omega)
        })
        .collect()
}

/// For every edge, which components are resonant (`|dE - w| <= tol_res`) and
/// which are not. Every `(edge, component)` pair lands in exactly one bucket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResonancePartition {
    /// `resonant[edge]` holds component indices.
    pub resonant: Vec<Vec<usize>>,
    pub non_resonant: Vec<Vec<usize>>,
}

pub fn resonance_partition(
    graph: &Graph,
    pulse: &Pulse,
    tol_res: f64,
) -> Result<ResonancePartition> {
    let mut resonant = Vec::with_capacity(graph.edges.len());
    let mut non_resonant = Vec::with_capacity(graph.edges.len());
    for (i, edge) in graph.edges.iter().enumerate() {
        let gap = graph.delta_e(i);
        let mut res = Vec::new();
        let mut non = Vec::new();
        for (k, comp) in pulse.components.iter().enumerate() {
            if (gap - comp.omega).abs() <= tol_res {
                res.push(k);
            } else {
                non.push(k);
            }
        }
        if res.len() > 1 {
            return Err(Error::DoubleResonance {
                hi: edge.hi.clone(),
                lo: edge.lo.clone(),
            });
        }
        resonant.push(res);
        non_resonant.push(non);
    }
    Ok(ResonancePartition {
        resonant,
        non_resonant,
    })
}

/// The full interaction-picture driving Hamiltonian `V(t)` on the graph.
///
/// `V(t)[hi, lo] = Phi(t) * sum_w (conj(amp) e^{iwt} + amp e^{-iwt}) * conj(g) * e^{-i dE t}`,
/// with the conjugate entry mirrored and zero diagonal.
pub fn classical_hamiltonian(graph: &Graph, pulse: &Pulse, t: f64) -> Array2<C64> {
    let n = graph.dim();
    let mut v = Array2::<C64>::zeros((n, n));
    let phi = pulse.envelope.phi(t);
    if phi == 0.0 {
        return v;
    }
    for (i, edge) in graph.edges.iter().enumerate() {
        let Some((hi, lo)) = graph.edge_endpoints(i) else {
            continue;
        };
        let gap = graph.delta_e(i);
        let mut field = C64::new(0.0, 0.0);
        for comp in &pulse.components {
            field += comp.amp.conj() * (C64::i() * comp.omega * t).exp()
                + comp.amp * (-C64::i() * comp.omega * t).exp();
        }
        let entry = phi * field * edge.g.conj() * (-C64::i() * gap * t).exp();
        v[[hi, lo]] += entry;
        v[[lo, hi]] += entry.conj();
    }
    v
}

/// Effective time `tau(t) = integral of Phi from t_start to t`.
///
/// Closed form for flat and raised-cosine envelopes; adaptive Simpson
/// quadrature (absolute tolerance 1e-12) for the truncated gaussian.
pub fn effective_time(envelope: &Envelope, t: f64) -> f64 {
    let t = t.min(envelope.t_end());
    if t <= envelope.t_start || envelope.t_gate <= 0.0 {
        return 0.0;
    }
    let x = t - envelope.t_start;
    match &envelope.kind {
        EnvelopeKind::Flat => x,
        EnvelopeKind::RaisedCosine => {
            // integral of sin^2(pi x / T) = x/2 - T sin(2 pi x / T) / (4 pi)
            let period = envelope.t_gate;
            0.5 * x
                - period * (2.0 * std::f64::consts::PI * x / period).sin()
                    / (4.0 * std::f64::consts::PI)
        }
        EnvelopeKind::Gaussian { sigma, truncation } => {
            // Integrate only over the smooth part of the support; the hard
            // truncation would otherwise defeat the adaptive refinement.
            let center = envelope.t_start + 0.5 * envelope.t_gate;
            let lo = envelope.t_start.max(center - truncation * sigma);
            let hi = t.min(center + truncation * sigma);
            if hi <= lo {
                return 0.0;
            }
            adaptive_simpson(&|s| envelope.phi(s), lo, hi, 1e-12, 48)
        }
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, depth)
}

/// A field-matter coupling `F(x)` given by its Taylor coefficients
/// `F^(m)(0) / m!` for `m = 0..=M_F`; the dipole case is `F(x) = x`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingFunction {
    pub taylor: Vec<f64>,
}

impl CouplingFunction {
    pub fn new(taylor: Vec<f64>) -> Result<Self> {
        if taylor.is_empty() || taylor.iter().all(|&c| c == 0.0) {
            return Err(Error::InvalidArgument(
                "coupling function needs at least one nonzero Taylor coefficient".into(),
            ));
        }
        Ok(CouplingFunction { taylor })
    }

    pub fn dipole() -> Self {
        CouplingFunction {
            taylor: vec![0.0, 1.0],
        }
    }

    pub fn max_order(&self) -> usize {
        self.taylor.len() - 1
    }
}

/// Expand `F(conj(amp) I+ + amp I-)` up to `order` into net-ladder-shift
/// terms: for each shift `k` the coefficient multiplying `(I+)^k` (`k > 0`),
/// `(I-)^|k|` (`k < 0`) or the scalar even-order part (`k = 0`).
///
/// Zero coefficients are dropped; the result is sorted by `k`.
pub fn generalized_interaction_terms(
    f: &CouplingFunction,
    component: &PulseComponent,
    order: usize,
) -> Result<Vec<(i32, C64)>> {
    if order < 1 {
        return Err(Error::InvalidArgument(
            "expansion order must be at least 1".into(),
        ));
    }
    if order > f.max_order() {
        return Err(Error::InvalidArgument(format!(
            "expansion order {order} exceeds the Taylor truncation {}",
            f.max_order()
        )));
    }
    let amp = component.amp;
    let mut coeffs: Vec<C64> = vec![C64::new(0.0, 0.0); 2 * order + 1];
    for (m, &fm) in f.taylor.iter().enumerate().take(order + 1) {
        if fm == 0.0 {
            continue;
        }
        // (conj(amp) I+ + amp I-)^m with commuting I+-:
        // sum_k C(m,k) conj(amp)^k amp^(m-k) (I+)^k (I-)^(m-k), net shift 2k - m.
        for k in 0..=m {
            let shift = 2 * k as i32 - m as i32;
            let weight = binomial(m, k) * fm;
            let term = amp.conj().powu(k as u32) * amp.powu((m - k) as u32) * weight;
            coeffs[(shift + order as i32) as usize] += term;
        }
    }
    Ok(coeffs
        .into_iter()
        .enumerate()
        .map(|(i, c)| (i as i32 - order as i32, c))
        .filter(|(_, c)| c.norm() != 0.0)
        .collect())
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0_f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}
