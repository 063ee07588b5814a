//! Generic truncated expansions of iterated Ito integrals (multiplicity 1..4,
//! with indicator corrections) and Stratonovich integrals (plain multiple
//! sums, no corrections) over a coefficient table.

use crate::basis::Interval;
use crate::error::{Error, Result};
use crate::gaussian::GaussianDraw;
use crate::kahan::NeumaierSum;
use crate::kernel::{CoefficientTable, WeightedKernel};

/// Component indices i_1..i_k in 0..=m; 0 denotes the time component
/// w^(0)_tau = tau.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentIndices(Vec<usize>);

impl ComponentIndices {
    pub fn new(indices: &[usize]) -> Result<Self> {
        if indices.is_empty() || indices.len() > 4 {
            return Err(Error::UnsupportedMultiplicity(indices.len()));
        }
        Ok(Self(indices.to_vec()))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn multiplicity(&self) -> usize {
        self.0.len()
    }

    pub fn has_time_component(&self) -> bool {
        self.0.iter().any(|&i| i == 0)
    }

    pub fn all_wiener(&self) -> bool {
        !self.has_time_component()
    }
}

impl std::ops::Index<usize> for ComponentIndices {
    type Output = usize;
    fn index(&self, l: usize) -> &usize {
        &self.0[l]
    }
}

/// Effective variate: zeta_j^(i) for Wiener components, and for the time
/// component the deterministic integral of phi_j, which is sqrt(T-t) at j = 0
/// and zero otherwise.
pub fn zeta_eff(draw: &GaussianDraw, i: usize, j: usize, iv: Interval) -> Result<f64> {
    if i == 0 {
        if j > draw.max_index() {
            return Err(Error::IndexOutOfRange(format!(
                "basis index {j} outside 0..={}",
                draw.max_index()
            )));
        }
        return Ok(if j == 0 { iv.length().sqrt() } else { 0.0 });
    }
    draw.zeta(i, j)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegralKind {
    Ito,
    Stratonovich,
}

/// A single evaluation of a truncated expansion, with the inputs recorded for
/// audit.
#[derive(Clone, Debug)]
pub struct TruncatedIntegral {
    pub value: f64,
    pub kind: IntegralKind,
    pub kernel: WeightedKernel,
    pub indices: ComponentIndices,
    pub orders: Vec<usize>,
    /// False when the evaluation is permitted but falls outside the quoted
    /// theorem hypotheses (Stratonovich k = 2 with a time component).
    pub within_theorem: bool,
}

fn resolve_slots(
    table: &CoefficientTable,
    idx: &ComponentIndices,
    draw: &GaussianDraw,
) -> Result<Vec<Vec<f64>>> {
    let iv = table.kernel().interval();
    let mut slots = Vec::with_capacity(idx.multiplicity());
    for l in 0..idx.multiplicity() {
        let p = table.orders()[l];
        let mut v = Vec::with_capacity(p + 1);
        for j in 0..=p {
            v.push(zeta_eff(draw, idx[l], j, iv)?);
        }
        slots.push(v);
    }
    Ok(slots)
}

fn check_shape(table: &CoefficientTable, idx: &ComponentIndices) -> Result<()> {
    if idx.multiplicity() != table.multiplicity() {
        return Err(Error::ArityMismatch {
            expected: table.multiplicity(),
            got: idx.multiplicity(),
        });
    }
    Ok(())
}

/// Pair indicator 1_{i_a = i_b != 0}.
#[inline]
fn paired(idx: &ComponentIndices, a: usize, b: usize) -> bool {
    idx[a] == idx[b] && idx[a] != 0
}

fn evaluate(
    table: &CoefficientTable,
    idx: &ComponentIndices,
    slots: &[Vec<f64>],
    corrections: bool,
) -> f64 {
    let orders = table.orders();
    let values = table.values();
    let mut acc = NeumaierSum::new();
    match table.multiplicity() {
        1 => {
            for (j, &c) in values.iter().enumerate() {
                acc.add(c * slots[0][j]);
            }
        }
        2 => {
            let pair = corrections && paired(idx, 0, 1);
            let mut it = values.iter();
            for j1 in 0..=orders[0] {
                let z1 = slots[0][j1];
                for j2 in 0..=orders[1] {
                    let c = *it.next().unwrap();
                    let mut term = z1 * slots[1][j2];
                    if pair && j1 == j2 {
                        term -= 1.0;
                    }
                    acc.add(c * term);
                }
            }
        }
        3 => {
            let p12 = corrections && paired(idx, 0, 1);
            let p23 = corrections && paired(idx, 1, 2);
            let p13 = corrections && paired(idx, 0, 2);
            let mut it = values.iter();
            for j1 in 0..=orders[0] {
                let z1 = slots[0][j1];
                for j2 in 0..=orders[1] {
                    let z2 = slots[1][j2];
                    for j3 in 0..=orders[2] {
                        let c = *it.next().unwrap();
                        let z3 = slots[2][j3];
                        let mut term = z1 * z2 * z3;
                        if p12 && j1 == j2 {
                            term -= z3;
                        }
                        if p23 && j2 == j3 {
                            term -= z1;
                        }
                        if p13 && j1 == j3 {
                            term -= z2;
                        }
                        acc.add(c * term);
                    }
                }
            }
        }
        4 => {
            let p = [
                (0usize, 1usize),
                (0, 2),
                (0, 3),
                (1, 2),
                (1, 3),
                (2, 3),
            ];
            let ind: Vec<bool> = p
                .iter()
                .map(|&(a, b)| corrections && paired(idx, a, b))
                .collect();
            let mut it = values.iter();
            for j1 in 0..=orders[0] {
                for j2 in 0..=orders[1] {
                    for j3 in 0..=orders[2] {
                        for j4 in 0..=orders[3] {
                            let c = *it.next().unwrap();
                            let j = [j1, j2, j3, j4];
                            let z = [
                                slots[0][j1],
                                slots[1][j2],
                                slots[2][j3],
                                slots[3][j4],
                            ];
                            let mut term = z[0] * z[1] * z[2] * z[3];
                            // pair corrections: drop the matched pair, keep the rest
                            for (t, &(a, b)) in p.iter().enumerate() {
                                if ind[t] && j[a] == j[b] {
                                    let (c1, c2) = others(a, b);
                                    term -= z[c1] * z[c2];
                                }
                            }
                            // double-pair additions
                            if ind[0] && j[0] == j[1] && ind[5] && j[2] == j[3] {
                                term += 1.0;
                            }
                            if ind[1] && j[0] == j[2] && ind[4] && j[1] == j[3] {
                                term += 1.0;
                            }
                            if ind[2] && j[0] == j[3] && ind[3] && j[1] == j[2] {
                                term += 1.0;
                            }
                            acc.add(c * term);
                        }
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    acc.value()
}

/// The two axes not in the pair (a, b), for the k = 4 corrections.
fn others(a: usize, b: usize) -> (usize, usize) {
    let mut rest = (0..4).filter(|&x| x != a && x != b);
    (rest.next().unwrap(), rest.next().unwrap())
}

fn check_draw_coverage(
    table: &CoefficientTable,
    idx: &ComponentIndices,
    draw: &GaussianDraw,
) -> Result<()> {
    let needed = *table.orders().iter().max().unwrap();
    if needed > draw.max_index() {
        return Err(Error::IndexOutOfRange(format!(
            "draw covers indices up to {}, table needs {needed}",
            draw.max_index()
        )));
    }
    for l in 0..idx.multiplicity() {
        if idx[l] > draw.components() {
            return Err(Error::IndexOutOfRange(format!(
                "component {} outside 0..={}",
                idx[l],
                draw.components()
            )));
        }
    }
    Ok(())
}

/// Truncated expansion of the iterated Ito integral: the prelimit multiple
/// sum with the k-specific indicator corrections.
pub fn ito_truncated(
    table: &CoefficientTable,
    idx: &ComponentIndices,
    draw: &GaussianDraw,
) -> Result<TruncatedIntegral> {
    check_shape(table, idx)?;
    check_draw_coverage(table, idx, draw)?;
    let slots = resolve_slots(table, idx, draw)?;
    let value = evaluate(table, idx, &slots, true);
    Ok(TruncatedIntegral {
        value,
        kind: IntegralKind::Ito,
        kernel: table.kernel().clone(),
        indices: idx.clone(),
        orders: table.orders().to_vec(),
        within_theorem: true,
    })
}

/// Truncated expansion of the iterated Stratonovich integral: the plain
/// multiple sum, no corrections.
///
/// Restrictions follow the theorem's statement: k = 2 admits any truncation
/// pair (time components are permitted but flagged as outside the quoted
/// hypotheses); k = 3 with unit weights admits any truncations and any
/// components; k = 3 with nonunit weights requires Wiener components and a
/// single truncation order; k = 4 requires unit weights and a single order.
pub fn stratonovich_truncated(
    table: &CoefficientTable,
    idx: &ComponentIndices,
    draw: &GaussianDraw,
) -> Result<TruncatedIntegral> {
    check_shape(table, idx)?;
    check_draw_coverage(table, idx, draw)?;
    let k = table.multiplicity();
    let unit_weights = table.kernel().weight_degree() == 0;
    let uniform = table.uniform_order().is_some();
    let mut within_theorem = true;
    match k {
        1 => {}
        2 => {
            if idx.has_time_component() {
                within_theorem = false;
            }
        }
        3 => {
            if !unit_weights {
                if idx.has_time_component() {
                    return Err(Error::TheoremRestriction(
                        "multiplicity 3 with nonunit weights is stated for Wiener components only"
                            .into(),
                    ));
                }
                if !uniform {
                    return Err(Error::TheoremRestriction(
                        "multiplicity 3 with nonunit weights requires equal truncation orders"
                            .into(),
                    ));
                }
            }
        }
        4 => {
            if !unit_weights {
                return Err(Error::TheoremRestriction(
                    "multiplicity 4 is stated for unit weights only".into(),
                ));
            }
            if !uniform {
                return Err(Error::TheoremRestriction(
                    "multiplicity 4 requires equal truncation orders".into(),
                ));
            }
        }
        other => return Err(Error::UnsupportedMultiplicity(other)),
    }
    let slots = resolve_slots(table, idx, draw)?;
    let value = evaluate(table, idx, &slots, false);
    Ok(TruncatedIntegral {
        value,
        kind: IntegralKind::Stratonovich,
        kernel: table.kernel().clone(),
        indices: idx.clone(),
        orders: table.orders().to_vec(),
        within_theorem,
    })
}
