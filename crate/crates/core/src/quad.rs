//! Gauss–Legendre quadrature on [0, 1] and a spectral prefix-integration
//! operator used to evaluate nested simplex integrals.
//!
//! A function resolved at the n nodes of a Gauss–Legendre rule determines a
//! degree n-1 polynomial interpolant. `PrefixOp` integrates that interpolant
//! exactly from 0 to every node, which is what the nested Fourier-coefficient
//! integrals need: each level is a prefix integral of (basis x weight x inner).

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

/// A quadrature rule on [0, 1]. Weights sum to 1.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature of values sampled at the rule's nodes.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        self.weights.iter().zip(values).map(|(w, f)| w * f).sum()
    }
}

/// P_n(x) and P'_n(x) on [-1, 1] via the three-term recurrence.
fn legendre_value_deriv(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let p_next = ((2 * k + 1) as f64 * x * p - k as f64 * p_prev) / (k + 1) as f64;
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

fn build_gauss_unit(n: usize) -> GaussRule {
    assert!(n >= 1, "quadrature rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        // Newton from the Tricomi initial guess; roots come out in descending order.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_value_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_value_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - k] = x;
        nodes[k] = -x;
        weights[n - 1 - k] = w;
        weights[k] = w;
    }
    // map [-1,1] -> [0,1]
    for v in nodes.iter_mut() {
        *v = 0.5 * (*v + 1.0);
    }
    for w in weights.iter_mut() {
        *w *= 0.5;
    }
    GaussRule { nodes, weights }
}

static RULES: OnceLock<RwLock<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();

/// Cached n-point Gauss–Legendre rule on [0, 1].
pub fn gauss01(n: usize) -> Arc<GaussRule> {
    let cache = RULES.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(r) = cache.read().unwrap().get(&n) {
        return r.clone();
    }
    let built = Arc::new(build_gauss_unit(n));
    cache
        .write()
        .unwrap()
        .entry(n)
        .or_insert(built)
        .clone()
}

/// Composite Gauss rule on [0, 1] with at least `min_nodes` nodes, assembled
/// from fixed-order panels. Used for residual checks where the integrand may
/// oscillate faster than a single panel resolves.
pub fn composite01(min_nodes: usize) -> GaussRule {
    const PANEL: usize = 48;
    let panels = min_nodes.div_ceil(PANEL).max(1);
    let base = gauss01(PANEL);
    let mut nodes = Vec::with_capacity(panels * PANEL);
    let mut weights = Vec::with_capacity(panels * PANEL);
    let h = 1.0 / panels as f64;
    for p in 0..panels {
        let left = p as f64 * h;
        for (x, w) in base.nodes.iter().zip(&base.weights) {
            nodes.push(left + h * x);
            weights.push(h * w);
        }
    }
    GaussRule { nodes, weights }
}

/// Shifted Legendre values: rows[d][a] = P_d(2 u_a - 1) for d = 0..=dmax.
pub(crate) fn shifted_legendre_rows(nodes: &[f64], dmax: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut rows = Vec::with_capacity(dmax + 1);
    rows.push(vec![1.0; n]);
    if dmax == 0 {
        return rows;
    }
    rows.push(nodes.iter().map(|u| 2.0 * u - 1.0).collect());
    for d in 1..dmax {
        let mut next = vec![0.0; n];
        for a in 0..n {
            let x = 2.0 * nodes[a] - 1.0;
            next[a] = ((2 * d + 1) as f64 * x * rows[d][a] - d as f64 * rows[d - 1][a])
                / (d + 1) as f64;
        }
        rows.push(next);
    }
    rows
}

/// Exact prefix integration of the nodal interpolant: given f at the nodes of
/// the n-point rule, `apply` returns F(u_a) = ∫_0^{u_a} f for every node.
pub struct PrefixOp {
    n: usize,
    rule: Arc<GaussRule>,
    matrix: Vec<f64>, // row-major n x n
}

impl PrefixOp {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rule(&self) -> &GaussRule {
        &self.rule
    }

    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(f.len(), n);
        debug_assert_eq!(out.len(), n);
        for (a, o) in out.iter_mut().enumerate() {
            let row = &self.matrix[a * n..(a + 1) * n];
            let mut acc = 0.0;
            for (m, v) in row.iter().zip(f) {
                acc += m * v;
            }
            *o = acc;
        }
    }

    pub fn apply_alloc(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.apply(f, &mut out);
        out
    }
}

fn build_prefix(n: usize) -> PrefixOp {
    let rule = gauss01(n);
    let p = shifted_legendre_rows(&rule.nodes, n);
    // values -> Legendre coefficients: c_d = (2d+1) sum_b w_b f_b P_d(u_b)
    let mut coef = vec![0.0; n * n];
    for d in 0..n {
        let scale = (2 * d + 1) as f64;
        for b in 0..n {
            coef[d * n + b] = scale * rule.weights[b] * p[d][b];
        }
    }
    // coefficients -> antiderivative values at nodes:
    // ∫_0^u P~_0 = (P~_1(u)+1)/2, ∫_0^u P~_d = (P~_{d+1}(u)-P~_{d-1}(u))/(2(2d+1))
    let mut anti = vec![0.0; n * n];
    for a in 0..n {
        anti[a * n] = 0.5 * (p[1][a] + 1.0);
        for d in 1..n {
            anti[a * n + d] = (p[d + 1][a] - p[d - 1][a]) / (2.0 * (2 * d + 1) as f64);
        }
    }
    // matrix = anti * coef
    let mut matrix = vec![0.0; n * n];
    for a in 0..n {
        for d in 0..n {
            let v = anti[a * n + d];
            if v == 0.0 {
                continue;
            }
            let crow = &coef[d * n..(d + 1) * n];
            let mrow = &mut matrix[a * n..(a + 1) * n];
            for (m, c) in mrow.iter_mut().zip(crow) {
                *m += v * c;
            }
        }
    }
    PrefixOp { n, rule, matrix }
}

static PREFIX_OPS: OnceLock<RwLock<HashMap<usize, Arc<PrefixOp>>>> = OnceLock::new();

/// Cached prefix-integration operator for the n-point rule.
pub fn prefix_op(n: usize) -> Arc<PrefixOp> {
    let cache = PREFIX_OPS.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(op) = cache.read().unwrap().get(&n) {
        return op.clone();
    }
    let built = Arc::new(build_prefix(n));
    cache
        .write()
        .unwrap()
        .entry(n)
        .or_insert(built)
        .clone()
}
