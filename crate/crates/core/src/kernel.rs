//! The weighted simplex kernel K(t_1, ..., t_k) = psi_1(t_1)...psi_k(t_k) on
//! {t_1 < ... < t_k}, its multiple Fourier coefficients over a product basis,
//! its exact squared norm, and partial Parseval sums.
//!
//! Coefficients are evaluated as nested one-dimensional integrals on the unit
//! interval (prefix integrals memoized on a shared Gauss–Legendre node set)
//! and rescaled to [t, T] by the homogeneity law
//! `C_[t,T] = (T-t)^(k/2 + sum l) C_[0,1]`.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;

use crate::basis::{eval_phi_unit, BasisKind, Interval};
use crate::error::{Error, Result};
use crate::kahan::NeumaierSum;
use crate::quad::{prefix_op, PrefixOp};

/// Maximum supported weight exponent, matching the catalog range.
pub const MAX_EXPONENT: u32 = 4;

/// Multiplicity k in 1..=4 with weights psi_l(tau) = (t - tau)^(l_l).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedKernel {
    exponents: Vec<u32>,
    iv: Interval,
}

impl WeightedKernel {
    pub fn new(exponents: &[u32], iv: Interval) -> Result<Self> {
        if exponents.is_empty() || exponents.len() > 4 {
            return Err(Error::InvalidKernel(format!(
                "multiplicity {} outside 1..=4",
                exponents.len()
            )));
        }
        if let Some(&e) = exponents.iter().find(|&&e| e > MAX_EXPONENT) {
            return Err(Error::InvalidKernel(format!(
                "weight exponent {e} exceeds the catalog range {MAX_EXPONENT}"
            )));
        }
        Ok(Self {
            exponents: exponents.to_vec(),
            iv,
        })
    }

    pub fn multiplicity(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn interval(&self) -> Interval {
        self.iv
    }

    pub fn weight_degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    /// ||K||^2 = I_k = integral of prod psi_l^2 over the simplex, by iterated
    /// power-rule integration.
    pub fn norm_sq(&self) -> f64 {
        let mut degree = 0u32;
        let mut coef = 1.0;
        for &e in &self.exponents {
            degree += 2 * e + 1;
            coef /= degree as f64;
        }
        coef * self.iv.length().powi(degree as i32)
    }

    /// Scale factor between unit-interval and [t, T] coefficients.
    fn scale(&self) -> f64 {
        let pow = self.multiplicity() as f64 / 2.0 + self.weight_degree() as f64;
        self.iv.length().powf(pow)
    }
}

/// I_k = ||K||^2.
pub fn kernel_norm_sq(kernel: &WeightedKernel) -> f64 {
    kernel.norm_sq()
}

fn check_indices(kernel: &WeightedKernel, indices: &[usize]) -> Result<()> {
    if indices.len() != kernel.multiplicity() {
        return Err(Error::ArityMismatch {
            expected: kernel.multiplicity(),
            got: indices.len(),
        });
    }
    Ok(())
}

/// Node count for the shared rule: the prefix-integral representation must
/// resolve every intermediate integrand as an interpolant, so the count grows
/// with the cumulative index budget across axes, not just the largest index.
fn node_count(exponents: &[u32], max_indices: &[usize]) -> usize {
    let s: usize = max_indices.iter().sum();
    let d: usize = exponents.iter().map(|&e| e as usize).sum();
    let k = exponents.len();
    64.max(2 * s + 10).max(s + d + k + 6)
}

/// psi_l on the unit interval with the weight written as (t - tau)^l: (-u)^l.
fn unit_weight(e: u32, u: f64) -> f64 {
    (-u).powi(e as i32)
}

fn phi_rows(kind: BasisKind, jmax: usize, nodes: &[f64]) -> Vec<Vec<f64>> {
    (0..=jmax)
        .map(|j| nodes.iter().map(|&u| eval_phi_unit(kind, j, u)).collect())
        .collect()
}

fn psi_rows(exponents: &[u32], nodes: &[f64]) -> Vec<Vec<f64>> {
    exponents
        .iter()
        .map(|&e| nodes.iter().map(|&u| unit_weight(e, u)).collect())
        .collect()
}

/// Single unit-interval coefficient for one multi-index, with an explicit rule size.
pub(crate) fn unit_coefficient_with_nodes(
    kind: BasisKind,
    exponents: &[u32],
    indices: &[usize],
    n: usize,
) -> f64 {
    let op = prefix_op(n);
    let nodes = &op.rule().nodes;
    let k = indices.len();
    let mut g = vec![1.0; n];
    let mut buf = vec![0.0; n];
    for l in 0..k - 1 {
        for (a, &u) in nodes.iter().enumerate() {
            buf[a] = eval_phi_unit(kind, indices[l], u) * unit_weight(exponents[l], u) * g[a];
        }
        op.apply(&buf, &mut g);
    }
    let rule = op.rule();
    let mut acc = 0.0;
    for (a, &u) in nodes.iter().enumerate() {
        acc += rule.weights[a]
            * eval_phi_unit(kind, indices[k - 1], u)
            * unit_weight(exponents[k - 1], u)
            * g[a];
    }
    acc
}

/// Fourier coefficient C_{j_k...j_1} of the kernel against the product basis,
/// evaluated as the nested simplex integral and rescaled to [t, T].
pub fn fourier_coefficient(
    kind: BasisKind,
    kernel: &WeightedKernel,
    indices: &[usize],
) -> Result<f64> {
    check_indices(kernel, indices)?;
    let n = node_count(kernel.exponents(), indices);
    if kernel.multiplicity() == 1 {
        // single axis: plain quadrature, no prefix operator needed
        let rule = crate::quad::gauss01(n);
        let mut acc = 0.0;
        for (a, &u) in rule.nodes.iter().enumerate() {
            acc += rule.weights[a]
                * eval_phi_unit(kind, indices[0], u)
                * unit_weight(kernel.exponents()[0], u);
        }
        return Ok(acc * kernel.scale());
    }
    Ok(unit_coefficient_with_nodes(kind, kernel.exponents(), indices, n) * kernel.scale())
}

/// Dense tensor of coefficients for 0 <= j_l <= p_l, immutable once built.
///
/// Storage is row-major in (j_1, ..., j_k) with j_k fastest.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    kind: BasisKind,
    kernel: WeightedKernel,
    orders: Vec<usize>,
    values: Arc<Vec<f64>>,
}

impl CoefficientTable {
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn kernel(&self) -> &WeightedKernel {
        &self.kernel
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    /// Equal truncation across axes, if the table has one.
    pub fn uniform_order(&self) -> Option<usize> {
        let p = self.orders[0];
        self.orders.iter().all(|&o| o == p).then_some(p)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn multiplicity(&self) -> usize {
        self.orders.len()
    }

    #[inline]
    pub fn index_of(&self, mi: &[usize]) -> usize {
        debug_assert_eq!(mi.len(), self.orders.len());
        let mut idx = 0;
        for (l, &j) in mi.iter().enumerate() {
            debug_assert!(j <= self.orders[l]);
            idx = idx * (self.orders[l] + 1) + j;
        }
        idx
    }

    #[inline]
    pub fn get(&self, mi: &[usize]) -> f64 {
        self.values[self.index_of(mi)]
    }

    /// CSV dump: header `j1,...,jk,C`, rows in row-major order, full double
    /// precision (17 significant digits).
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let k = self.multiplicity();
        for l in 1..=k {
            write!(out, "j{l},")?;
        }
        writeln!(out, "C")?;
        let mut mi = vec![0usize; k];
        for &v in self.values.iter() {
            for &j in mi.iter() {
                write!(out, "{j},")?;
            }
            writeln!(out, "{v:.16e}")?;
            // odometer, last axis fastest
            for l in (0..k).rev() {
                if mi[l] < self.orders[l] {
                    mi[l] += 1;
                    break;
                }
                mi[l] = 0;
            }
        }
        Ok(())
    }
}

type UnitKey = (BasisKind, Vec<u32>, Vec<usize>);

static UNIT_TABLES: OnceLock<RwLock<HashMap<UnitKey, Arc<Vec<f64>>>>> = OnceLock::new();

fn table_len(orders: &[usize]) -> usize {
    orders.iter().map(|&p| p + 1).product()
}

fn build_unit_table(kind: BasisKind, exponents: &[u32], orders: &[usize]) -> Vec<f64> {
    let k = orders.len();
    let n = node_count(exponents, orders);
    if k == 1 {
        // single axis: plain quadrature row, no prefix operator
        let rule = crate::quad::gauss01(n);
        return (0..=orders[0])
            .map(|j| {
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&u, &w)| w * eval_phi_unit(kind, j, u) * unit_weight(exponents[0], u))
                    .sum()
            })
            .collect();
    }
    let op = prefix_op(n);
    let nodes = op.rule().nodes.clone();
    let weights = op.rule().weights.clone();
    let jmax = *orders.iter().max().unwrap();
    let phi = phi_rows(kind, jmax, &nodes);
    let psi = psi_rows(exponents, &nodes);

    // last-axis row: w_a phi_j(a) psi_k(a)
    let last: Vec<Vec<f64>> = (0..=orders[k - 1])
        .map(|j| {
            (0..n)
                .map(|a| weights[a] * phi[j][a] * psi[k - 1][a])
                .collect()
        })
        .collect();

    let mut values = vec![0.0; table_len(orders)];
    match k {
        2 => {
            let block = orders[1] + 1;
            values
                .par_chunks_mut(block)
                .enumerate()
                .for_each(|(j1, chunk)| {
                    let g1 = level_fn(&op, &phi[j1], &psi[0], None);
                    for (j2, slot) in chunk.iter_mut().enumerate() {
                        *slot = dot(&last[j2], &g1);
                    }
                });
        }
        3 => {
            let block = (orders[1] + 1) * (orders[2] + 1);
            values
                .par_chunks_mut(block)
                .enumerate()
                .for_each(|(j1, chunk)| {
                    let g1 = level_fn(&op, &phi[j1], &psi[0], None);
                    for j2 in 0..=orders[1] {
                        let g2 = level_fn(&op, &phi[j2], &psi[1], Some(&g1));
                        let row = &mut chunk[j2 * (orders[2] + 1)..(j2 + 1) * (orders[2] + 1)];
                        for (j3, slot) in row.iter_mut().enumerate() {
                            *slot = dot(&last[j3], &g2);
                        }
                    }
                });
        }
        4 => {
            let block = (orders[1] + 1) * (orders[2] + 1) * (orders[3] + 1);
            let inner2 = (orders[2] + 1) * (orders[3] + 1);
            values
                .par_chunks_mut(block)
                .enumerate()
                .for_each(|(j1, chunk)| {
                    let g1 = level_fn(&op, &phi[j1], &psi[0], None);
                    for j2 in 0..=orders[1] {
                        let g2 = level_fn(&op, &phi[j2], &psi[1], Some(&g1));
                        for j3 in 0..=orders[2] {
                            let g3 = level_fn(&op, &phi[j3], &psi[2], Some(&g2));
                            let row = &mut chunk[j2 * inner2 + j3 * (orders[3] + 1)..];
                            for (j4, slot) in row[..orders[3] + 1].iter_mut().enumerate() {
                                *slot = dot(&last[j4], &g3);
                            }
                        }
                    }
                });
        }
        _ => unreachable!("multiplicity checked at kernel construction"),
    }
    values
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Prefix integral of phi * psi * inner (inner = 1 when absent).
fn level_fn(op: &Arc<PrefixOp>, phi: &[f64], psi: &[f64], inner: Option<&[f64]>) -> Vec<f64> {
    let n = phi.len();
    let mut buf = vec![0.0; n];
    match inner {
        Some(g) => {
            for a in 0..n {
                buf[a] = phi[a] * psi[a] * g[a];
            }
        }
        None => {
            for a in 0..n {
                buf[a] = phi[a] * psi[a];
            }
        }
    }
    op.apply_alloc(&buf)
}

fn unit_table(kind: BasisKind, exponents: &[u32], orders: &[usize]) -> Arc<Vec<f64>> {
    let key: UnitKey = (kind, exponents.to_vec(), orders.to_vec());
    let cache = UNIT_TABLES.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = cache.read().unwrap().get(&key) {
        return v.clone();
    }
    let built = Arc::new(build_unit_table(kind, exponents, orders));
    cache
        .write()
        .unwrap()
        .entry(key)
        .or_insert(built)
        .clone()
}

fn capacity_guard(k: usize, orders: &[usize]) -> Result<()> {
    let cap = match k {
        1 | 2 => 10_000,
        3 => 200,
        4 => 50,
        _ => return Err(Error::UnsupportedMultiplicity(k)),
    };
    if let Some(&p) = orders.iter().find(|&&p| p > cap) {
        return Err(Error::CapacityExceeded(format!(
            "order {p} exceeds the limit {cap} for multiplicity {k}"
        )));
    }
    Ok(())
}

/// Build the dense coefficient table for 0 <= j_l <= p_l. Deterministic; unit
/// interval results are cached by (basis, exponents, orders) and rescaled.
pub fn build_table(
    kind: BasisKind,
    kernel: &WeightedKernel,
    orders: &[usize],
) -> Result<CoefficientTable> {
    if orders.len() != kernel.multiplicity() {
        return Err(Error::ArityMismatch {
            expected: kernel.multiplicity(),
            got: orders.len(),
        });
    }
    capacity_guard(kernel.multiplicity(), orders)?;
    let unit = unit_table(kind, kernel.exponents(), orders);
    let scale = kernel.scale();
    let values: Vec<f64> = unit.iter().map(|&v| v * scale).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite coefficient in table".into()));
    }
    let table = CoefficientTable {
        kind,
        kernel: kernel.clone(),
        orders: orders.to_vec(),
        values: Arc::new(values),
    };
    // Parseval bound: the partial sum of squares may not exceed ||K||^2.
    let norm = kernel.norm_sq();
    if parseval_partial(&table) > norm * (1.0 + 1e-9) {
        return Err(Error::Numerical(
            "Parseval bound violated; quadrature under-resolved".into(),
        ));
    }
    Ok(table)
}

/// Sum of squared coefficients in the table; nondecreasing in each order and
/// bounded by ||K||^2.
pub fn parseval_partial(table: &CoefficientTable) -> f64 {
    let mut acc = NeumaierSum::new();
    for &v in table.values() {
        acc.add(v * v);
    }
    acc.value()
}
