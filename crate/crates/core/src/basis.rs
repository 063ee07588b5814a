//! The two complete orthonormal systems on [t, T]: Legendre polynomials and
//! the trigonometric system with frequency layout
//! j = 0 (constant), j = 2r-1 (sine), j = 2r (cosine).

use crate::error::{Error, Result};
use crate::quad;

/// A finite time interval [t, T] with T - t > 1e-12.
///
/// All catalog formulas are homogeneous in T - t; near-degenerate intervals
/// are rejected at construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    start: f64,
    end: f64,
}

impl Interval {
    pub const MIN_LENGTH: f64 = 1e-12;

    pub fn new(start: f64, end: f64) -> Result<Self> {
        let len = end - start;
        if !start.is_finite() || !end.is_finite() || !(len > Self::MIN_LENGTH) {
            return Err(Error::InvalidInterval { start, end });
        }
        Ok(Self { start, end })
    }

    /// The unit interval [0, 1].
    pub fn unit() -> Self {
        Self { start: 0.0, end: 1.0 }
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, s: f64) -> bool {
        s >= self.start && s <= self.end
    }

    /// Affine map of s in [t, T] to [0, 1].
    pub fn to_unit(&self, s: f64) -> f64 {
        (s - self.start) / self.length()
    }
}

/// Which complete orthonormal system of L2([t, T]) to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Legendre,
    Trigonometric,
}

impl BasisKind {
    pub fn name(&self) -> &'static str {
        match self {
            BasisKind::Legendre => "legendre",
            BasisKind::Trigonometric => "trig",
        }
    }
}

/// Legendre polynomial P_j(x) on [-1, 1] by the three-term recurrence.
pub fn legendre_poly(j: usize, x: f64) -> f64 {
    if j == 0 {
        return 1.0;
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..j {
        let p_next = ((2 * k + 1) as f64 * x * p - k as f64 * p_prev) / (k + 1) as f64;
        p_prev = p;
        p = p_next;
    }
    p
}

/// Basis function value on the unit interval, u in [0, 1]. No domain checks.
pub(crate) fn eval_phi_unit(kind: BasisKind, j: usize, u: f64) -> f64 {
    match kind {
        BasisKind::Legendre => ((2 * j + 1) as f64).sqrt() * legendre_poly(j, 2.0 * u - 1.0),
        BasisKind::Trigonometric => {
            if j == 0 {
                1.0
            } else {
                let r = j.div_ceil(2) as f64;
                let arg = 2.0 * std::f64::consts::PI * r * u;
                if j % 2 == 1 {
                    std::f64::consts::SQRT_2 * arg.sin()
                } else {
                    std::f64::consts::SQRT_2 * arg.cos()
                }
            }
        }
    }
}

/// phi_j(s) on [t, T].
///
/// Both systems scale as phi on the unit interval at the mapped point,
/// divided by sqrt(T-t).
pub fn eval_phi(kind: BasisKind, iv: Interval, j: usize, s: f64) -> Result<f64> {
    if !iv.contains(s) {
        return Err(Error::OutOfDomain {
            point: s,
            start: iv.start(),
            end: iv.end(),
        });
    }
    Ok(eval_phi_unit(kind, j, iv.to_unit(s)) / iv.length().sqrt())
}

/// max over 0 <= i, j <= jmax of |<phi_i, phi_j> - delta_ij|, computed with a
/// composite Gauss rule of at least max(200, 4 jmax) nodes so that no pairing
/// is quadrature-limited.
pub fn orthonormality_residual(kind: BasisKind, iv: Interval, jmax: usize) -> f64 {
    let rule = quad::composite01(200.max(4 * jmax));
    let n = rule.len();
    let len = iv.length();
    let mut vals = vec![vec![0.0; n]; jmax + 1];
    for (j, row) in vals.iter_mut().enumerate() {
        for (a, u) in rule.nodes.iter().enumerate() {
            let s = iv.start() + len * u;
            row[a] = eval_phi(kind, iv, j, s).expect("node inside the interval");
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..=jmax {
        for j in i..=jmax {
            let mut acc = 0.0;
            for a in 0..n {
                acc += len * rule.weights[a] * vals[i][a] * vals[j][a];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - target).abs());
        }
    }
    worst
}
