//! Closed-form truncated expansions used by the Taylor-Stratonovich scheme:
//! the trigonometric catalog (singles, doubles, the triple with its cross-sum
//! D block), the J family with time components, the Legendre closed forms,
//! and diagonal trace partial sums.
//!
//! Each display is transcribed literally, term for term, with tail variables
//! exactly where the displays carry them. A slot model (zeta index, xi, mu)
//! lets the same transcription serve point evaluation, exact second-moment
//! computation, and cross-checks against the generic expansion engine.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};

use crate::basis::{BasisKind, Interval};
use crate::error::{Error, Result};
use crate::expansion::{zeta_eff, ComponentIndices};
use crate::gaussian::{tail_weights, GaussianDraw};
use crate::kahan::NeumaierSum;
use crate::kernel::unit_coefficient_with_nodes;

/// Catalog entries. For the J family the digit pattern records which axes are
/// Wiener components (1) and which are the time component (0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CatalogName {
    I0,
    I1,
    I2,
    I00,
    I10,
    I01,
    I000,
    J10,
    J01,
    J001,
    J010,
    J100,
    J011,
    J110,
    J101,
}

impl CatalogName {
    pub fn label(&self) -> &'static str {
        match self {
            CatalogName::I0 => "I0",
            CatalogName::I1 => "I1",
            CatalogName::I2 => "I2",
            CatalogName::I00 => "I00",
            CatalogName::I10 => "I10",
            CatalogName::I01 => "I01",
            CatalogName::I000 => "I000",
            CatalogName::J10 => "J10_i0",
            CatalogName::J01 => "J01_0i",
            CatalogName::J001 => "J001",
            CatalogName::J010 => "J010",
            CatalogName::J100 => "J100",
            CatalogName::J011 => "J011_0ii",
            CatalogName::J110 => "J110_ii0",
            CatalogName::J101 => "J101_i0i",
        }
    }

    /// Multiplicity of the underlying iterated integral.
    pub fn arity(&self) -> usize {
        match self {
            CatalogName::I0 | CatalogName::I1 | CatalogName::I2 => 1,
            CatalogName::I00 | CatalogName::I10 | CatalogName::I01 => 2,
            CatalogName::J10 | CatalogName::J01 => 2,
            _ => 3,
        }
    }

    /// Weight exponents of the corresponding kernel (time axes have unit
    /// weight; their time integration is what the J displays absorb).
    pub fn kernel_exponents(&self) -> &'static [u32] {
        match self {
            CatalogName::I0 => &[0],
            CatalogName::I1 => &[1],
            CatalogName::I2 => &[2],
            CatalogName::I00 => &[0, 0],
            CatalogName::I10 => &[1, 0],
            CatalogName::I01 => &[0, 1],
            CatalogName::J10 | CatalogName::J01 => &[0, 0],
            _ => &[0, 0, 0],
        }
    }

    /// Which axes must carry the time component 0.
    fn time_axes(&self) -> &'static [usize] {
        match self {
            CatalogName::J10 => &[1],
            CatalogName::J01 => &[0],
            CatalogName::J001 => &[0, 1],
            CatalogName::J010 => &[0, 2],
            CatalogName::J100 => &[1, 2],
            CatalogName::J011 => &[0],
            CatalogName::J110 => &[2],
            CatalogName::J101 => &[1],
            _ => &[],
        }
    }

    fn is_trig_only(&self) -> bool {
        !matches!(
            self,
            CatalogName::I0 | CatalogName::I1 | CatalogName::I2 | CatalogName::I00
        )
    }

    /// Power of (T - t) in front of the display.
    fn length_power(&self) -> f64 {
        match self {
            CatalogName::I0 => 0.5,
            CatalogName::I1 | CatalogName::J10 | CatalogName::J01 => 1.5,
            CatalogName::I00 => 1.0,
            CatalogName::I2 | CatalogName::J001 | CatalogName::J010 | CatalogName::J100 => 2.5,
            CatalogName::I000 => 1.5,
            CatalogName::I10 | CatalogName::I01 => 2.0,
            CatalogName::J011 | CatalogName::J110 | CatalogName::J101 => 2.0,
        }
    }

    /// Highest zeta index the display touches at truncation q.
    pub fn required_index(&self, basis: BasisKind, q: usize) -> usize {
        match basis {
            BasisKind::Trigonometric => match self {
                CatalogName::I0 => 0,
                // the ladder block of the triple reaches index 2(m+r) <= 4q
                CatalogName::I000 => 4 * q,
                _ => 2 * q,
            },
            BasisKind::Legendre => match self {
                CatalogName::I0 => 0,
                CatalogName::I1 => 1,
                CatalogName::I2 => 2,
                CatalogName::I00 => q.max(1),
                _ => 0,
            },
        }
    }
}

/// A catalog entry in a specific basis. The triple and the J family are
/// trigonometric only; I0, I1, I2, I00 exist in both bases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CatalogId {
    pub name: CatalogName,
    pub basis: BasisKind,
}

impl CatalogId {
    pub fn new(name: CatalogName, basis: BasisKind) -> Result<Self> {
        if basis == BasisKind::Legendre && name.is_trig_only() {
            return Err(Error::UnsupportedCatalogEntry(format!(
                "{} has no Legendre closed form; use the generic engine",
                name.label()
            )));
        }
        Ok(Self { name, basis })
    }

    pub fn trig(name: CatalogName) -> Self {
        Self {
            name,
            basis: BasisKind::Trigonometric,
        }
    }
}

/// Whether the tail variables xi_q, mu_q enter the evaluation. `Off` zeroes
/// them, which is what the generic-engine equivalence checks need.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tails {
    On,
    Off,
}

/// A variate slot of one Wiener component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Slot {
    Z(usize),
    Xi,
    Mu,
}

use Slot::{Mu, Xi, Z};

// ---------------------------------------------------------------------------
// Display transcriptions. Coefficients are on the unit interval; the leading
// (T-t) power is applied by the evaluators. Tail terms are always emitted and
// zeroed at resolution when tails are off.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum SingleKind {
    I0,
    I1,
    I2,
    J10,
    J01,
    J001,
    J010,
    J100,
}

pub(crate) fn emit_single(kind: SingleKind, q: usize, sink: &mut dyn FnMut(f64, Slot)) {
    let w = tail_weights(q);
    let (sa, sb) = (w.alpha.sqrt(), w.beta.sqrt());
    match kind {
        SingleKind::I0 => sink(1.0, Z(0)),
        SingleKind::I1 => {
            sink(-0.5, Z(0));
            for r in 1..=q {
                sink(0.5 * SQRT_2 / (PI * r as f64), Z(2 * r - 1));
            }
            sink(0.5 * SQRT_2 * sa / PI, Xi);
        }
        SingleKind::I2 => {
            sink(1.0 / 3.0, Z(0));
            for r in 1..=q {
                let rf = r as f64;
                sink(1.0 / (SQRT_2 * PI * PI * rf * rf), Z(2 * r));
                sink(-1.0 / (SQRT_2 * PI * rf), Z(2 * r - 1));
            }
            sink(sb / (SQRT_2 * PI * PI), Mu);
            sink(-sa / (SQRT_2 * PI), Xi);
        }
        SingleKind::J10 => {
            sink(0.5, Z(0));
            for r in 1..=q {
                sink(0.5 * SQRT_2 / (PI * r as f64), Z(2 * r - 1));
            }
            sink(0.5 * SQRT_2 * sa / PI, Xi);
        }
        SingleKind::J01 => {
            sink(0.5, Z(0));
            for r in 1..=q {
                sink(-0.5 * SQRT_2 / (PI * r as f64), Z(2 * r - 1));
            }
            sink(-0.5 * SQRT_2 * sa / PI, Xi);
        }
        SingleKind::J001 => {
            sink(1.0 / 6.0, Z(0));
            for r in 1..=q {
                let rf = r as f64;
                sink(1.0 / (2.0 * SQRT_2 * PI * PI * rf * rf), Z(2 * r));
                sink(-1.0 / (2.0 * SQRT_2 * PI * rf), Z(2 * r - 1));
            }
            sink(sb / (2.0 * SQRT_2 * PI * PI), Mu);
            sink(-sa / (2.0 * SQRT_2 * PI), Xi);
        }
        SingleKind::J010 => {
            sink(1.0 / 6.0, Z(0));
            for r in 1..=q {
                let rf = r as f64;
                sink(-1.0 / (SQRT_2 * PI * PI * rf * rf), Z(2 * r));
            }
            sink(-sb / (SQRT_2 * PI * PI), Mu);
        }
        SingleKind::J100 => {
            sink(1.0 / 6.0, Z(0));
            for r in 1..=q {
                let rf = r as f64;
                sink(1.0 / (2.0 * SQRT_2 * PI * PI * rf * rf), Z(2 * r));
                sink(1.0 / (2.0 * SQRT_2 * PI * rf), Z(2 * r - 1));
            }
            sink(sb / (2.0 * SQRT_2 * PI * PI), Mu);
            sink(sa / (2.0 * SQRT_2 * PI), Xi);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PairKind {
    I00,
    I10,
    I01,
    J011,
    J110,
    J101,
}

pub(crate) fn emit_pair(kind: PairKind, q: usize, sink: &mut dyn FnMut(f64, Slot, Slot)) {
    let w = tail_weights(q);
    let (sa, sb) = (w.alpha.sqrt(), w.beta.sqrt());
    match kind {
        PairKind::I00 => {
            sink(0.5, Z(0), Z(0));
            for r in 1..=q {
                let rf = r as f64;
                sink(0.5 / (PI * rf), Z(2 * r), Z(2 * r - 1));
                sink(-0.5 / (PI * rf), Z(2 * r - 1), Z(2 * r));
                sink(0.5 * SQRT_2 / (PI * rf), Z(2 * r - 1), Z(0));
                sink(-0.5 * SQRT_2 / (PI * rf), Z(0), Z(2 * r - 1));
            }
            sink(0.5 * SQRT_2 * sa / PI, Xi, Z(0));
            sink(-0.5 * SQRT_2 * sa / PI, Z(0), Xi);
        }
        PairKind::I10 => {
            // overall minus sign of the display is folded into each term
            let e = -1.0;
            sink(e / 6.0, Z(0), Z(0));
            sink(-e * sa / (2.0 * SQRT_2 * PI), Z(0), Xi);
            sink(e * sb / (2.0 * SQRT_2 * PI * PI), Z(0), Mu);
            sink(-2.0 * e * sb / (2.0 * SQRT_2 * PI * PI), Mu, Z(0));
            for r in 1..=q {
                let rf = r as f64;
                sink(-e / (2.0 * SQRT_2 * PI * rf), Z(0), Z(2 * r - 1));
                sink(e / (2.0 * SQRT_2 * PI * PI * rf * rf), Z(0), Z(2 * r));
                sink(-2.0 * e / (2.0 * SQRT_2 * PI * PI * rf * rf), Z(2 * r), Z(0));
                sink(e / (4.0 * PI * rf), Z(2 * r), Z(2 * r - 1));
                sink(-e / (4.0 * PI * rf), Z(2 * r - 1), Z(2 * r));
                sink(3.0 * e / (8.0 * PI * PI * rf * rf), Z(2 * r - 1), Z(2 * r - 1));
                sink(e / (8.0 * PI * PI * rf * rf), Z(2 * r), Z(2 * r));
            }
            for r in 1..=q {
                for l in 1..=q {
                    if r == l {
                        continue;
                    }
                    let (rf, lf) = (r as f64, l as f64);
                    let g = -e / (2.0 * PI * PI * (rf * rf - lf * lf));
                    sink(g, Z(2 * r), Z(2 * l));
                    sink(g * lf / rf, Z(2 * r - 1), Z(2 * l - 1));
                }
            }
        }
        PairKind::I01 => {
            sink(-1.0 / 3.0, Z(0), Z(0));
            sink(-sa / (2.0 * SQRT_2 * PI), Xi, Z(0));
            sink(2.0 * sa / (2.0 * SQRT_2 * PI), Z(0), Xi);
            sink(sb / (2.0 * SQRT_2 * PI * PI), Mu, Z(0));
            sink(-2.0 * sb / (2.0 * SQRT_2 * PI * PI), Z(0), Mu);
            for r in 1..=q {
                let rf = r as f64;
                sink(-1.0 / (2.0 * SQRT_2 * PI * rf), Z(2 * r - 1), Z(0));
                sink(2.0 / (2.0 * SQRT_2 * PI * rf), Z(0), Z(2 * r - 1));
                sink(1.0 / (2.0 * SQRT_2 * PI * PI * rf * rf), Z(2 * r), Z(0));
                sink(-2.0 / (2.0 * SQRT_2 * PI * PI * rf * rf), Z(0), Z(2 * r));
                sink(-1.0 / (4.0 * PI * rf), Z(2 * r), Z(2 * r - 1));
                sink(1.0 / (4.0 * PI * rf), Z(2 * r - 1), Z(2 * r));
                sink(3.0 / (8.0 * PI * PI * rf * rf), Z(2 * r - 1), Z(2 * r - 1));
                sink(1.0 / (8.0 * PI * PI * rf * rf), Z(2 * r), Z(2 * r));
            }
            for r in 1..=q {
                for l in 1..=q {
                    if r == l {
                        continue;
                    }
                    let (rf, lf) = (r as f64, l as f64);
                    let g = 1.0 / (2.0 * PI * PI * (rf * rf - lf * lf));
                    sink(g * rf / lf, Z(2 * r - 1), Z(2 * l - 1));
                    sink(g, Z(2 * r), Z(2 * l));
                }
            }
        }
        PairKind::J011 => {
            // pair axes are (i2, i3)
            sink(1.0 / 6.0, Z(0), Z(0));
            sink(-sa / (2.0 * SQRT_2 * PI), Z(0), Xi);
            sink(sb / (2.0 * SQRT_2 * PI * PI), Z(0), Mu);
            sink(-2.0 * sb / (2.0 * SQRT_2 * PI * PI), Mu, Z(0));
            for r in 1..=q {
                let rf = r as f64;
                sink(-1.0 / (2.0 * SQRT_2 * PI * rf), Z(0), Z(2 * r - 1));
                sink(1.0 / (2.0 * SQRT_2 * PI * PI * rf * rf), Z(0), Z(2 * r));
                sink(-2.0 / (2.0 * SQRT_2 * PI * PI * rf * rf), Z(2 * r), Z(0));
            }
            for r in 1..=q {
                for l in 1..=q {
                    if r == l {
                        continue;
                    }
                    let (rf, lf) = (r as f64, l as f64);
                    let g = -1.0 / (2.0 * PI * PI * (rf * rf - lf * lf));
                    sink(g, Z(2 * r), Z(2 * l));
                    sink(g * lf / rf, Z(2 * r - 1), Z(2 * l - 1));
                }
            }
            for r in 1..=q {
                let rf = r as f64;
                sink(1.0 / (4.0 * PI * rf), Z(2 * r), Z(2 * r - 1));
                sink(-1.0 / (4.0 * PI * rf), Z(2 * r - 1), Z(2 * r));
                sink(3.0 / (8.0 * PI * PI * rf * rf), Z(2 * r - 1), Z(2 * r - 1));
                sink(1.0 / (8.0 * PI * PI * rf * rf), Z(2 * r), Z(2 * r));
            }
        }
        PairKind::J110 => {
            // pair axes are (i1, i2)
            sink(1.0 / 6.0, Z(0), Z(0));
            sink(sa / (2.0 * SQRT_2 * PI), Xi, Z(0));
            sink(sb / (2.0 * SQRT_2 * PI * PI), Mu, Z(0));
            sink(-2.0 * sb / (2.0 * SQRT_2 * PI * PI), Z(0), Mu);
            for r in 1..=q {
                let rf = r as f64;
                sink(1.0 / (2.0 * SQRT_2 * PI * rf), Z(2 * r - 1), Z(0));
                sink(1.0 / (2.0 * SQRT_2 * PI * PI * rf * rf), Z(2 * r), Z(0));
                sink(-2.0 / (2.0 * SQRT_2 * PI * PI * rf * rf), Z(0), Z(2 * r));
            }
            for r in 1..=q {
                for l in 1..=q {
                    if r == l {
                        continue;
                    }
                    let (rf, lf) = (r as f64, l as f64);
                    let g = 1.0 / (2.0 * PI * PI * (rf * rf - lf * lf));
                    sink(g * rf / lf, Z(2 * r - 1), Z(2 * l - 1));
                    sink(g, Z(2 * r), Z(2 * l));
                }
            }
            for r in 1..=q {
                let rf = r as f64;
                sink(1.0 / (4.0 * PI * rf), Z(2 * r), Z(2 * r - 1));
                sink(-1.0 / (4.0 * PI * rf), Z(2 * r - 1), Z(2 * r));
                sink(3.0 / (8.0 * PI * PI * rf * rf), Z(2 * r - 1), Z(2 * r - 1));
                sink(1.0 / (8.0 * PI * PI * rf * rf), Z(2 * r), Z(2 * r));
            }
        }
        PairKind::J101 => {
            // pair axes are (i1, i3)
            sink(1.0 / 6.0, Z(0), Z(0));
            sink(sa / (2.0 * SQRT_2 * PI), Xi, Z(0));
            sink(-sa / (2.0 * SQRT_2 * PI), Z(0), Xi);
            sink(sb / (2.0 * SQRT_2 * PI * PI), Mu, Z(0));
            sink(sb / (2.0 * SQRT_2 * PI * PI), Z(0), Mu);
            for r in 1..=q {
                let rf = r as f64;
                sink(1.0 / (2.0 * SQRT_2 * PI * rf), Z(2 * r - 1), Z(0));
                sink(-1.0 / (2.0 * SQRT_2 * PI * rf), Z(0), Z(2 * r - 1));
                sink(1.0 / (2.0 * SQRT_2 * PI * PI * rf * rf), Z(2 * r), Z(0));
                sink(1.0 / (2.0 * SQRT_2 * PI * PI * rf * rf), Z(0), Z(2 * r));
            }
            for r in 1..=q {
                for l in 1..=q {
                    if r == l {
                        continue;
                    }
                    let (rf, lf) = (r as f64, l as f64);
                    sink(-1.0 / (2.0 * PI * PI * rf * lf), Z(2 * r - 1), Z(2 * l - 1));
                }
            }
            for r in 1..=q {
                let rf = r as f64;
                sink(-3.0 / (4.0 * PI * PI * rf * rf), Z(2 * r - 1), Z(2 * r - 1));
                sink(-1.0 / (4.0 * PI * PI * rf * rf), Z(2 * r), Z(2 * r));
            }
        }
    }
}

/// The triple display for I000, including the cross-frequency D block with
/// its three double sums over the quoted index ranges.
pub(crate) fn emit_triple(q: usize, sink: &mut dyn FnMut(f64, Slot, Slot, Slot)) {
    let w = tail_weights(q);
    let (sa, sb) = (w.alpha.sqrt(), w.beta.sqrt());
    sink(1.0 / 6.0, Z(0), Z(0), Z(0));
    let c = sa / (2.0 * SQRT_2 * PI);
    sink(c, Xi, Z(0), Z(0));
    sink(-c, Z(0), Z(0), Xi);
    let c = sb / (2.0 * SQRT_2 * PI * PI);
    sink(c, Mu, Z(0), Z(0));
    sink(-2.0 * c, Z(0), Mu, Z(0));
    sink(c, Z(0), Z(0), Mu);
    for r in 1..=q {
        let rf = r as f64;
        let (s, co) = (Z(2 * r - 1), Z(2 * r));
        sink(1.0 / (2.0 * SQRT_2 * PI * rf), s, Z(0), Z(0));
        sink(-1.0 / (2.0 * SQRT_2 * PI * rf), Z(0), Z(0), s);
        sink(1.0 / (2.0 * SQRT_2 * PI * PI * rf * rf), co, Z(0), Z(0));
        sink(-2.0 / (2.0 * SQRT_2 * PI * PI * rf * rf), Z(0), co, Z(0));
        sink(1.0 / (2.0 * SQRT_2 * PI * PI * rf * rf), Z(0), Z(0), co);
        sink(1.0 / (4.0 * PI * rf), co, s, Z(0));
        sink(-1.0 / (4.0 * PI * rf), s, co, Z(0));
        sink(-1.0 / (4.0 * PI * rf), Z(0), s, co);
        sink(1.0 / (4.0 * PI * rf), Z(0), co, s);
        let d = 1.0 / (8.0 * PI * PI * rf * rf);
        sink(3.0 * d, s, s, Z(0));
        sink(d, co, co, Z(0));
        sink(-6.0 * d, s, Z(0), s);
        sink(3.0 * d, Z(0), s, s);
        sink(-2.0 * d, co, Z(0), co);
        sink(d, Z(0), co, co);
    }
    emit_triple_d_block1(q, sink);
    emit_triple_d_block2_harmonic(q, sink);
    emit_triple_d_block2_sum_freq(q, 0, sink);
    emit_triple_d_block3(q, sink);
}

fn emit_triple_d_block1(q: usize, sink: &mut dyn FnMut(f64, Slot, Slot, Slot)) {
    for r in 1..=q {
        for l in 1..=q {
            if r == l {
                continue;
            }
            let (rf, lf) = (r as f64, l as f64);
            let f = 1.0 / (2.0 * PI * PI);
            let g = 1.0 / (rf * rf - lf * lf);
            sink(f * g, Z(2 * r), Z(2 * l), Z(0));
            sink(-f * g, Z(0), Z(2 * r), Z(2 * l));
            sink(f * g * rf / lf, Z(2 * r - 1), Z(2 * l - 1), Z(0));
            sink(-f * g * lf / rf, Z(0), Z(2 * r - 1), Z(2 * l - 1));
            sink(-f / (rf * lf), Z(2 * r - 1), Z(0), Z(2 * l - 1));
        }
    }
}

/// The 2/(rm) group of the (r, m) full-square block; indices stay within 2q.
fn emit_triple_d_block2_harmonic(q: usize, sink: &mut dyn FnMut(f64, Slot, Slot, Slot)) {
    let f = 1.0 / (4.0 * SQRT_2 * PI * PI);
    for r in 1..=q {
        for m in 1..=q {
            let c = f * 2.0 / (r as f64 * m as f64);
            sink(-c, Z(2 * r - 1), Z(2 * m - 1), Z(2 * m));
            sink(c, Z(2 * r - 1), Z(2 * r), Z(2 * m - 1));
            sink(c, Z(2 * r - 1), Z(2 * m), Z(2 * m - 1));
            sink(-c, Z(2 * r), Z(2 * r - 1), Z(2 * m - 1));
        }
    }
}

/// The 1/(m(r+m)) group with sum-frequency indices 2(m+r), restricted to
/// pairs with m + r > min_sum_excl (0 keeps the whole block).
fn emit_triple_d_block2_sum_freq(
    q: usize,
    min_sum_excl: usize,
    sink: &mut dyn FnMut(f64, Slot, Slot, Slot),
) {
    let f = 1.0 / (4.0 * SQRT_2 * PI * PI);
    for r in 1..=q {
        for m in 1..=q {
            if r + m <= min_sum_excl {
                continue;
            }
            let (rf, mf) = (r as f64, m as f64);
            let c = f / (mf * (rf + mf));
            sink(-c, Z(2 * (m + r)), Z(2 * r), Z(2 * m));
            sink(-c, Z(2 * (m + r) - 1), Z(2 * r - 1), Z(2 * m));
            sink(-c, Z(2 * (m + r) - 1), Z(2 * r), Z(2 * m - 1));
            sink(c, Z(2 * (m + r)), Z(2 * r - 1), Z(2 * m - 1));
        }
    }
}

fn emit_triple_d_block3(q: usize, sink: &mut dyn FnMut(f64, Slot, Slot, Slot)) {
    let f = 1.0 / (4.0 * SQRT_2 * PI * PI);
    for m in 1..=q {
        for l in (m + 1)..=q {
            let (mf, lf) = (m as f64, l as f64);
            let c = f / (mf * (lf - mf));
            sink(c, Z(2 * (l - m)), Z(2 * l), Z(2 * m));
            sink(c, Z(2 * (l - m) - 1), Z(2 * l - 1), Z(2 * m));
            sink(-c, Z(2 * (l - m) - 1), Z(2 * l), Z(2 * m - 1));
            sink(c, Z(2 * (l - m)), Z(2 * l - 1), Z(2 * m - 1));
            let c = f / (lf * (lf - mf));
            sink(-c, Z(2 * (l - m)), Z(2 * m), Z(2 * l));
            sink(c, Z(2 * (l - m) - 1), Z(2 * m - 1), Z(2 * l));
            sink(-c, Z(2 * (l - m) - 1), Z(2 * m), Z(2 * l - 1));
            sink(-c, Z(2 * (l - m)), Z(2 * m - 1), Z(2 * l - 1));
        }
    }
}

// ---------------------------------------------------------------------------
// Slot resolution and evaluation
// ---------------------------------------------------------------------------

struct CompSlots {
    z: Vec<f64>,
    xi: f64,
    mu: f64,
}

impl CompSlots {
    #[inline]
    fn get(&self, s: Slot) -> f64 {
        match s {
            Z(j) => self.z[j],
            Xi => self.xi,
            Mu => self.mu,
        }
    }
}

fn comp_slots(
    draw: &GaussianDraw,
    iv: Interval,
    comp: usize,
    pmax: usize,
    tails: Tails,
) -> Result<CompSlots> {
    let mut z = Vec::with_capacity(pmax + 1);
    for j in 0..=pmax {
        z.push(zeta_eff(draw, comp, j, iv)?);
    }
    let (xi, mu) = if comp == 0 || tails == Tails::Off {
        (0.0, 0.0)
    } else {
        (draw.xi(comp)?, draw.mu(comp)?)
    };
    Ok(CompSlots { z, xi, mu })
}

fn check_pattern(name: CatalogName, idx: &ComponentIndices) -> Result<()> {
    if idx.multiplicity() != name.arity() {
        return Err(Error::ArityMismatch {
            expected: name.arity(),
            got: idx.multiplicity(),
        });
    }
    let time_axes = name.time_axes();
    for l in 0..idx.multiplicity() {
        let must_be_time = time_axes.contains(&l);
        if must_be_time && idx[l] != 0 {
            return Err(Error::InvalidParameter(format!(
                "{} requires the time component on axis {}",
                name.label(),
                l + 1
            )));
        }
        if !must_be_time && idx[l] == 0 {
            return Err(Error::InvalidParameter(format!(
                "{} requires a Wiener component (>= 1) on axis {}",
                name.label(),
                l + 1
            )));
        }
    }
    Ok(())
}

fn check_tail_convention(q: usize, draw: &GaussianDraw, tails: Tails) -> Result<()> {
    if tails == Tails::On && draw.tail_cut() != q {
        return Err(Error::InvalidParameter(format!(
            "draw carries tail variables for cut {}, evaluation needs cut {q}",
            draw.tail_cut()
        )));
    }
    Ok(())
}

/// Evaluate a catalog entry with tail variables included.
pub fn eval_catalog(
    id: CatalogId,
    iv: Interval,
    idx: &ComponentIndices,
    q: usize,
    draw: &GaussianDraw,
) -> Result<f64> {
    eval_catalog_with(id, iv, idx, q, draw, Tails::On)
}

/// Evaluate a catalog entry with an explicit tail mode.
pub fn eval_catalog_with(
    id: CatalogId,
    iv: Interval,
    idx: &ComponentIndices,
    q: usize,
    draw: &GaussianDraw,
    tails: Tails,
) -> Result<f64> {
    check_pattern(id.name, idx)?;
    if id.basis == BasisKind::Legendre {
        return legendre_closed_forms(id.name, iv, idx, q, draw);
    }
    let has_tails = !matches!(id.name, CatalogName::I0);
    if has_tails {
        check_tail_convention(q, draw, tails)?;
    }
    let pneed = id.name.required_index(id.basis, q);
    if pneed > draw.max_index() {
        return Err(Error::IndexOutOfRange(format!(
            "draw covers indices up to {}, {} at q = {q} needs {pneed}",
            draw.max_index(),
            id.name.label()
        )));
    }
    let scale = iv.length().powf(id.name.length_power());

    let single = |kind: SingleKind, comp: usize| -> Result<f64> {
        let slots = comp_slots(draw, iv, comp, pneed, tails)?;
        let mut acc = NeumaierSum::new();
        emit_single(kind, q, &mut |c, s| acc.add(c * slots.get(s)));
        Ok(scale * acc.value())
    };
    let pair = |kind: PairKind, c1: usize, c2: usize| -> Result<f64> {
        let s1 = comp_slots(draw, iv, c1, pneed, tails)?;
        let s2 = comp_slots(draw, iv, c2, pneed, tails)?;
        let mut acc = NeumaierSum::new();
        emit_pair(kind, q, &mut |c, a, b| acc.add(c * s1.get(a) * s2.get(b)));
        Ok(scale * acc.value())
    };

    match id.name {
        CatalogName::I0 => single(SingleKind::I0, idx[0]),
        CatalogName::I1 => single(SingleKind::I1, idx[0]),
        CatalogName::I2 => single(SingleKind::I2, idx[0]),
        CatalogName::J10 => single(SingleKind::J10, idx[0]),
        CatalogName::J01 => single(SingleKind::J01, idx[1]),
        CatalogName::J001 => single(SingleKind::J001, idx[2]),
        CatalogName::J010 => single(SingleKind::J010, idx[1]),
        CatalogName::J100 => single(SingleKind::J100, idx[0]),
        CatalogName::I00 => pair(PairKind::I00, idx[0], idx[1]),
        CatalogName::I10 => pair(PairKind::I10, idx[0], idx[1]),
        CatalogName::I01 => pair(PairKind::I01, idx[0], idx[1]),
        CatalogName::J011 => pair(PairKind::J011, idx[1], idx[2]),
        CatalogName::J110 => pair(PairKind::J110, idx[0], idx[1]),
        CatalogName::J101 => pair(PairKind::J101, idx[0], idx[2]),
        CatalogName::I000 => {
            let s1 = comp_slots(draw, iv, idx[0], pneed, tails)?;
            let s2 = comp_slots(draw, iv, idx[1], pneed, tails)?;
            let s3 = comp_slots(draw, iv, idx[2], pneed, tails)?;
            let mut acc = NeumaierSum::new();
            emit_triple(q, &mut |c, a, b, d| {
                acc.add(c * s1.get(a) * s2.get(b) * s3.get(d))
            });
            Ok(scale * acc.value())
        }
    }
}

/// The double display evaluated with arbitrary components (time components
/// permitted): the substitution route for the J family of multiplicity 2.
pub fn trig_double_via_substitution(
    iv: Interval,
    comps: (usize, usize),
    q: usize,
    draw: &GaussianDraw,
    tails: Tails,
) -> Result<f64> {
    let pneed = 2 * q;
    let s1 = comp_slots(draw, iv, comps.0, pneed, tails)?;
    let s2 = comp_slots(draw, iv, comps.1, pneed, tails)?;
    let mut acc = NeumaierSum::new();
    emit_pair(PairKind::I00, q, &mut |c, a, b| {
        acc.add(c * s1.get(a) * s2.get(b))
    });
    Ok(iv.length() * acc.value())
}

/// The triple display evaluated with arbitrary components: the substitution
/// route for the J family of multiplicity 3.
pub fn trig_triple_via_substitution(
    iv: Interval,
    comps: (usize, usize, usize),
    q: usize,
    draw: &GaussianDraw,
    tails: Tails,
) -> Result<f64> {
    let pneed = 4 * q;
    let s1 = comp_slots(draw, iv, comps.0, pneed, tails)?;
    let s2 = comp_slots(draw, iv, comps.1, pneed, tails)?;
    let s3 = comp_slots(draw, iv, comps.2, pneed, tails)?;
    let mut acc = NeumaierSum::new();
    emit_triple(q, &mut |c, a, b, d| {
        acc.add(c * s1.get(a) * s2.get(b) * s3.get(d))
    });
    Ok(iv.length().powf(1.5) * acc.value())
}

/// The part of the printed triple display that a rectangular truncation at
/// index 2q cannot hold: the sum-frequency terms of the (r, m) block with
/// m + r > q. The generic engine at orders 2q reproduces the printed display
/// minus exactly this amount.
pub fn i000_rectangle_overhang(
    iv: Interval,
    idx: &ComponentIndices,
    q: usize,
    draw: &GaussianDraw,
) -> Result<f64> {
    check_pattern(CatalogName::I000, idx)?;
    let pneed = 4 * q;
    let s1 = comp_slots(draw, iv, idx[0], pneed, Tails::Off)?;
    let s2 = comp_slots(draw, iv, idx[1], pneed, Tails::Off)?;
    let s3 = comp_slots(draw, iv, idx[2], pneed, Tails::Off)?;
    let mut acc = NeumaierSum::new();
    emit_triple_d_block2_sum_freq(q, q, &mut |c, a, b, d| {
        acc.add(c * s1.get(a) * s2.get(b) * s3.get(d))
    });
    Ok(iv.length().powf(1.5) * acc.value())
}

/// Exact evaluation of the Legendre closed forms. The truncation order p
/// bounds the alternating series of the double integral; the single-integral
/// forms are exact once p reaches the required polynomial order.
pub fn legendre_closed_forms(
    name: CatalogName,
    iv: Interval,
    idx: &ComponentIndices,
    p: usize,
    draw: &GaussianDraw,
) -> Result<f64> {
    check_pattern(name, idx)?;
    if idx.has_time_component() {
        return Err(Error::InvalidParameter(
            "Legendre closed forms are stated for Wiener components".into(),
        ));
    }
    let len = iv.length();
    match name {
        CatalogName::I0 => Ok(len.sqrt() * draw.zeta(idx[0], 0)?),
        CatalogName::I1 => {
            if p < 1 {
                return Err(Error::InvalidParameter(
                    "I1 needs truncation order p >= 1".into(),
                ));
            }
            let z0 = draw.zeta(idx[0], 0)?;
            let z1 = draw.zeta(idx[0], 1)?;
            Ok(-len.powf(1.5) / 2.0 * (z0 + z1 / 3.0f64.sqrt()))
        }
        CatalogName::I2 => {
            if p < 2 {
                return Err(Error::InvalidParameter(
                    "I2 needs truncation order p >= 2".into(),
                ));
            }
            let z0 = draw.zeta(idx[0], 0)?;
            let z1 = draw.zeta(idx[0], 1)?;
            let z2 = draw.zeta(idx[0], 2)?;
            Ok(len.powf(2.5) / 3.0 * (z0 + 3.0f64.sqrt() / 2.0 * z1 + z2 / (2.0 * 5.0f64.sqrt())))
        }
        CatalogName::I00 => {
            let (c1, c2) = (idx[0], idx[1]);
            let mut acc = NeumaierSum::new();
            acc.add(draw.zeta(c1, 0)? * draw.zeta(c2, 0)?);
            for i in 1..=p {
                let w = 1.0 / ((4 * i * i - 1) as f64).sqrt();
                acc.add(
                    w * (draw.zeta(c1, i - 1)? * draw.zeta(c2, i)?
                        - draw.zeta(c1, i)? * draw.zeta(c2, i - 1)?),
                );
            }
            Ok(len / 2.0 * acc.value())
        }
        other => Err(Error::UnsupportedCatalogEntry(format!(
            "{} has no Legendre closed form",
            other.label()
        ))),
    }
}

/// Which diagonal kernel the trace partial sum uses: weight on the inner or
/// the outer axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceKernel {
    C10,
    C01,
}

/// Partial sum over j <= jmax of the diagonal coefficients C_jj of the
/// weighted double kernel; converges to -(T-t)^2/4 for both bases and both
/// weight placements.
pub fn trace_identity_partial(
    basis: BasisKind,
    which: TraceKernel,
    iv: Interval,
    jmax: usize,
) -> f64 {
    let exps: [u32; 2] = match which {
        TraceKernel::C10 => [1, 0],
        TraceKernel::C01 => [0, 1],
    };
    // one shared rule across the whole sweep, sized for the largest index
    let n = 64usize.max(4 * jmax + 10);
    let scale = iv.length().powi(2);
    let mut acc = NeumaierSum::new();
    for j in 0..=jmax {
        acc.add(unit_coefficient_with_nodes(basis, &exps, &[j, j], n));
    }
    scale * acc.value()
}

// ---------------------------------------------------------------------------
// Exact second moments via the quadratic form of the emitted coefficients
// ---------------------------------------------------------------------------

/// Exact variance of a single-component entry: the sum of squared expansion
/// coefficients (every slot is an independent standard Gaussian).
pub fn single_entry_variance(id: CatalogId, iv: Interval, q: usize, tails: Tails) -> Result<f64> {
    if id.basis != BasisKind::Trigonometric {
        return Err(Error::UnsupportedCatalogEntry(
            "variance by quadratic form is provided for the trigonometric entries".into(),
        ));
    }
    let kind = match id.name {
        CatalogName::I0 => SingleKind::I0,
        CatalogName::I1 => SingleKind::I1,
        CatalogName::I2 => SingleKind::I2,
        CatalogName::J10 => SingleKind::J10,
        CatalogName::J01 => SingleKind::J01,
        CatalogName::J001 => SingleKind::J001,
        CatalogName::J010 => SingleKind::J010,
        CatalogName::J100 => SingleKind::J100,
        other => {
            return Err(Error::UnsupportedCatalogEntry(format!(
                "{} is not a single-component entry",
                other.label()
            )))
        }
    };
    let mut coeffs: HashMap<Slot, f64> = HashMap::new();
    emit_single(kind, q, &mut |c, s| {
        if tails == Tails::Off && matches!(s, Xi | Mu) {
            return;
        }
        *coeffs.entry(s).or_insert(0.0) += c;
    });
    let mut acc = NeumaierSum::new();
    for v in coeffs.values() {
        acc.add(v * v);
    }
    Ok(iv.length().powf(2.0 * id.name.length_power()) * acc.value())
}

/// Exact second moment of a two-component entry for distinct Wiener
/// components: sum of squared coefficients over slot pairs.
pub fn pair_entry_second_moment_distinct(
    id: CatalogId,
    iv: Interval,
    q: usize,
    tails: Tails,
) -> Result<f64> {
    let kind = pair_kind(id)?;
    let mut coeffs: HashMap<(Slot, Slot), f64> = HashMap::new();
    emit_pair(kind, q, &mut |c, a, b| {
        if tails == Tails::Off && (matches!(a, Xi | Mu) || matches!(b, Xi | Mu)) {
            return;
        }
        *coeffs.entry((a, b)).or_insert(0.0) += c;
    });
    let mut acc = NeumaierSum::new();
    for v in coeffs.values() {
        acc.add(v * v);
    }
    Ok(iv.length().powf(2.0 * id.name.length_power()) * acc.value())
}

/// Deterministic mean of a two-component entry when both Wiener components
/// coincide: the sum of coefficients on matching slot pairs.
pub fn pair_entry_mean_equal_components(
    id: CatalogId,
    iv: Interval,
    q: usize,
    tails: Tails,
) -> Result<f64> {
    let kind = pair_kind(id)?;
    let mut acc = NeumaierSum::new();
    emit_pair(kind, q, &mut |c, a, b| {
        if tails == Tails::Off && (matches!(a, Xi | Mu) || matches!(b, Xi | Mu)) {
            return;
        }
        if a == b {
            acc.add(c);
        }
    });
    Ok(iv.length().powf(id.name.length_power()) * acc.value())
}

fn pair_kind(id: CatalogId) -> Result<PairKind> {
    if id.basis != BasisKind::Trigonometric {
        return Err(Error::UnsupportedCatalogEntry(
            "quadratic-form moments are provided for the trigonometric entries".into(),
        ));
    }
    Ok(match id.name {
        CatalogName::I00 => PairKind::I00,
        CatalogName::I10 => PairKind::I10,
        CatalogName::I01 => PairKind::I01,
        CatalogName::J011 => PairKind::J011,
        CatalogName::J110 => PairKind::J110,
        CatalogName::J101 => PairKind::J101,
        other => {
            return Err(Error::UnsupportedCatalogEntry(format!(
                "{} is not a two-component entry",
                other.label()
            )))
        }
    })
}

/// Exact second moment of the triple for pairwise distinct Wiener components.
pub fn triple_second_moment_distinct(iv: Interval, q: usize, tails: Tails) -> f64 {
    let mut coeffs: HashMap<(Slot, Slot, Slot), f64> = HashMap::new();
    emit_triple(q, &mut |c, a, b, d| {
        if tails == Tails::Off
            && (matches!(a, Xi | Mu) || matches!(b, Xi | Mu) || matches!(d, Xi | Mu))
        {
            return;
        }
        *coeffs.entry((a, b, d)).or_insert(0.0) += c;
    });
    let mut acc = NeumaierSum::new();
    for v in coeffs.values() {
        acc.add(v * v);
    }
    iv.length().powi(3) * acc.value()
}
