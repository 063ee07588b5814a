//! The Karhunen-Loeve expansion route: random Fourier coefficients of the
//! Brownian bridge, the classical single/double/triple approximations, and
//! the double-sum approximation of the cross-frequency series.
//!
//! The coefficient mapping to the zeta variates comes from integrating the
//! bridge's Fourier integrals by parts against the Wiener increments:
//! a_{i,r} = -sqrt(Delta)/(sqrt(2) pi r) zeta_{2r-1}^(i),
//! b_{i,r} = +sqrt(Delta)/(sqrt(2) pi r) zeta_{2r}^(i),
//! a_{i,0} = (sqrt(2 Delta)/pi) sum_r zeta_{2r-1}^(i)/r.
//! This keeps the two expansion routes driven by the same Wiener information.

use std::f64::consts::PI;

use crate::basis::Interval;
use crate::catalog::{eval_catalog_with, CatalogId, CatalogName, Tails};
use crate::error::{Error, Result};
use crate::expansion::ComponentIndices;
use crate::gaussian::{tail_weights, GaussianDraw};
use crate::kahan::NeumaierSum;

/// Bridge Fourier coefficients a_{i,r} (r = 0..=r_max) and b_{i,r}
/// (r = 1..=r_max) for components i = 1..=m, with Var a_{i,r} = Var b_{i,r}
/// = Delta/(2 pi^2 r^2) for r >= 1 and Var a_{i,0} = Delta/3.
#[derive(Clone, Debug)]
pub struct KlCoefficients {
    m: usize,
    r_max: usize,
    delta: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl KlCoefficients {
    pub fn components(&self) -> usize {
        self.m
    }

    pub fn r_max(&self) -> usize {
        self.r_max
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// a_{i,r} for i in 1..=m, r in 0..=r_max.
    pub fn a(&self, i: usize, r: usize) -> Result<f64> {
        self.check(i, r)?;
        Ok(self.a[(i - 1) * (self.r_max + 1) + r])
    }

    /// b_{i,r} for i in 1..=m, r in 1..=r_max.
    pub fn b(&self, i: usize, r: usize) -> Result<f64> {
        self.check(i, r)?;
        if r == 0 {
            return Err(Error::IndexOutOfRange("b has no r = 0 entry".into()));
        }
        Ok(self.b[(i - 1) * (self.r_max + 1) + r])
    }

    fn check(&self, i: usize, r: usize) -> Result<()> {
        if i == 0 || i > self.m {
            return Err(Error::IndexOutOfRange(format!(
                "component {i} outside 1..={}",
                self.m
            )));
        }
        if r > self.r_max {
            return Err(Error::IndexOutOfRange(format!(
                "frequency {r} outside 0..={}",
                self.r_max
            )));
        }
        Ok(())
    }
}

fn kl_scale(delta: f64, r: usize) -> f64 {
    (delta / (2.0 * PI * PI * (r * r) as f64)).sqrt()
}

/// Map a Gaussian draw onto bridge coefficients. The r = 0 cosine coefficient
/// is completed with the tail variable so its variance is exactly Delta/3;
/// the draw's tail cut must equal r_max.
pub fn kl_from_draw(draw: &GaussianDraw, delta: f64, r_max: usize) -> Result<KlCoefficients> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter("Delta must be positive".into()));
    }
    if r_max < 1 {
        return Err(Error::InvalidParameter("r_max must be at least 1".into()));
    }
    if draw.max_index() < 2 * r_max {
        return Err(Error::IndexOutOfRange(format!(
            "draw covers indices up to {}, mapping needs {}",
            draw.max_index(),
            2 * r_max
        )));
    }
    if draw.tail_cut() != r_max {
        return Err(Error::InvalidParameter(format!(
            "draw tail cut {} must equal r_max {r_max} for the a0 completion",
            draw.tail_cut()
        )));
    }
    let m = draw.components();
    let alpha = tail_weights(r_max).alpha;
    let mut a = vec![0.0; m * (r_max + 1)];
    let mut b = vec![0.0; m * (r_max + 1)];
    for i in 1..=m {
        let row = (i - 1) * (r_max + 1);
        let mut a0 = NeumaierSum::new();
        for r in 1..=r_max {
            let s = kl_scale(delta, r);
            a[row + r] = -s * draw.zeta(i, 2 * r - 1)?;
            b[row + r] = s * draw.zeta(i, 2 * r)?;
            a0.add(draw.zeta(i, 2 * r - 1)? / r as f64);
        }
        a0.add(alpha.sqrt() * draw.xi(i)?);
        a[row] = (2.0 * delta).sqrt() / PI * a0.value();
    }
    Ok(KlCoefficients {
        m,
        r_max,
        delta,
        a,
        b,
    })
}

fn unit_interval_of(delta: f64) -> Result<Interval> {
    Interval::new(0.0, delta)
}

/// The classical mean-square approximation of the weighted single integral;
/// the same display as the trigonometric catalog entry, evaluated through the
/// same path so the two routes agree bitwise on identical variate slots.
pub fn milstein_i1(q: usize, delta: f64, i: usize, draw: &GaussianDraw) -> Result<f64> {
    let iv = unit_interval_of(delta)?;
    eval_catalog_with(
        CatalogId::trig(CatalogName::I1),
        iv,
        &ComponentIndices::new(&[i])?,
        q,
        draw,
        Tails::On,
    )
}

/// The double-integral approximation with its antisymmetric tail completion.
pub fn milstein_i00(q: usize, delta: f64, idx: (usize, usize), draw: &GaussianDraw) -> Result<f64> {
    let iv = unit_interval_of(delta)?;
    eval_catalog_with(
        CatalogId::trig(CatalogName::I00),
        iv,
        &ComponentIndices::new(&[idx.0, idx.1])?,
        q,
        draw,
        Tails::On,
    )
}

/// The quadratic-weight single integral approximation.
pub fn milstein_i2(q: usize, delta: f64, i: usize, draw: &GaussianDraw) -> Result<f64> {
    let iv = unit_interval_of(delta)?;
    eval_catalog_with(
        CatalogId::trig(CatalogName::I2),
        iv,
        &ComponentIndices::new(&[i])?,
        q,
        draw,
        Tails::On,
    )
}

/// Plain truncated bridge coefficients used inside the triple construction:
/// every series is cut at its printed range, no tail completion anywhere.
struct PlainKl {
    a: Vec<Vec<f64>>, // [comp-1][r], r = 0 slot unused
    b: Vec<Vec<f64>>,
    a0: Vec<f64>, // truncated at q
}

fn plain_kl(draw: &GaussianDraw, delta: f64, q: usize, r_max: usize) -> Result<PlainKl> {
    let m = draw.components();
    let mut a = vec![vec![0.0; r_max + 1]; m];
    let mut b = vec![vec![0.0; r_max + 1]; m];
    let mut a0 = vec![0.0; m];
    for i in 1..=m {
        for r in 1..=r_max {
            let s = kl_scale(delta, r);
            a[i - 1][r] = -s * draw.zeta(i, 2 * r - 1)?;
            b[i - 1][r] = s * draw.zeta(i, 2 * r)?;
        }
        let mut acc = NeumaierSum::new();
        for r in 1..=q {
            acc.add(a[i - 1][r]);
        }
        a0[i - 1] = -2.0 * acc.value();
    }
    Ok(PlainKl { a, b, a0 })
}

impl PlainKl {
    #[inline]
    fn a(&self, i: usize, r: usize) -> f64 {
        self.a[i - 1][r]
    }
    #[inline]
    fn b(&self, i: usize, r: usize) -> f64 {
        self.b[i - 1][r]
    }
}

fn block_a(kl: &PlainKl, delta: f64, q: usize, i2: usize, i3: usize) -> f64 {
    let mut acc = NeumaierSum::new();
    for r in 1..=q {
        acc.add(r as f64 * (kl.a(i2, r) * kl.b(i3, r) - kl.b(i2, r) * kl.a(i3, r)));
    }
    PI / delta * acc.value()
}

fn block_b(kl: &PlainKl, delta: f64, q: usize, i2: usize, i3: usize) -> f64 {
    let mut acc = NeumaierSum::new();
    for r in 1..=q {
        acc.add(kl.a(i2, r) * kl.a(i3, r) + kl.b(i2, r) * kl.b(i3, r));
    }
    acc.value() / (2.0 * delta)
}

fn block_c(kl: &PlainKl, delta: f64, q: usize, i2: usize, i3: usize) -> f64 {
    let mut acc = NeumaierSum::new();
    for l in 1..=q {
        for r in 1..=q {
            if r == l {
                continue;
            }
            let (rf, lf) = (r as f64, l as f64);
            let g = rf / (rf * rf - lf * lf);
            acc.add(g * (rf * kl.a(i2, r) * kl.a(i3, l) + lf * kl.b(i2, r) * kl.b(i3, l)));
        }
    }
    -acc.value() / delta
}

fn block_small_b(kl: &PlainKl, q: usize, i: usize) -> f64 {
    let mut acc = NeumaierSum::new();
    for r in 1..=q {
        acc.add(kl.b(i, r) / r as f64);
    }
    acc.value()
}

fn block_d(kl: &PlainKl, delta: f64, q: usize, i1: usize, i2: usize, i3: usize) -> f64 {
    let c0 = PI / (2.0 * delta.powf(1.5));
    let mut acc = NeumaierSum::new();
    for l in 1..=q {
        let lf = l as f64;
        for r in 1..=q {
            acc.add(
                -c0 * lf
                    * (kl.a(i2, l) * (kl.a(i3, l + r) * kl.b(i1, r) - kl.a(i1, r) * kl.b(i3, l + r))
                        + kl.b(i2, l)
                            * (kl.a(i1, r) * kl.a(i3, r + l) + kl.b(i1, r) * kl.b(i3, l + r))),
            );
        }
        for r in 1..l {
            acc.add(
                c0 * lf
                    * (kl.a(i2, l) * (kl.a(i1, r) * kl.b(i3, l - r) + kl.a(i3, l - r) * kl.b(i1, r))
                        - kl.b(i2, l)
                            * (kl.a(i1, r) * kl.a(i3, l - r) - kl.b(i1, r) * kl.b(i3, l - r))),
            );
        }
        for r in (l + 1)..=q {
            acc.add(
                c0 * lf
                    * (kl.a(i2, l) * (kl.a(i3, r - l) * kl.b(i1, r) - kl.a(i1, r) * kl.b(i3, r - l))
                        + kl.b(i2, l)
                            * (kl.a(i1, r) * kl.a(i3, r - l) + kl.b(i1, r) * kl.b(i3, r - l))),
            );
        }
    }
    acc.value()
}

/// The iterated-substitution construction of the triple Stratonovich
/// integral: products of single integrals, the bridge blocks A, B, C, b, and
/// the printed double-sum approximation of the cross-frequency series D.
/// Every series is truncated at q; the cross-frequency block touches bridge
/// frequencies up to 2q, so the draw must cover zeta indices up to 4q.
pub fn milstein_triple(
    q: usize,
    delta: f64,
    idx: (usize, usize, usize),
    draw: &GaussianDraw,
) -> Result<f64> {
    let (i1, i2, i3) = idx;
    if i1 == 0 || i2 == 0 || i3 == 0 {
        return Err(Error::InvalidParameter(
            "the triple construction is stated for Wiener components only".into(),
        ));
    }
    let m = draw.components();
    if i1 > m || i2 > m || i3 > m {
        return Err(Error::IndexOutOfRange(format!(
            "component outside 1..={m}"
        )));
    }
    if q < 1 {
        return Err(Error::InvalidParameter("q must be at least 1".into()));
    }
    if draw.max_index() < 4 * q {
        return Err(Error::IndexOutOfRange(format!(
            "draw covers indices up to {}, the triple at q = {q} needs {}",
            draw.max_index(),
            4 * q
        )));
    }
    let iv = unit_interval_of(delta)?;
    let kl = plain_kl(draw, delta, q, 2 * q)?;

    let j1 = |i: usize| -> Result<f64> { Ok(delta.sqrt() * draw.zeta(i, 0)?) };
    let j1_1 = j1(i1)?;
    let j1_2 = j1(i2)?;
    let j1_3 = j1(i3)?;

    // the double integral member, truncated at q without tail variables
    let j11_23 = eval_catalog_with(
        CatalogId::trig(CatalogName::I00),
        iv,
        &ComponentIndices::new(&[i2, i3])?,
        q,
        draw,
        Tails::Off,
    )?;

    let a_23 = block_a(&kl, delta, q, i2, i3);
    let a_12 = block_a(&kl, delta, q, i1, i2);
    let b_23 = block_b(&kl, delta, q, i2, i3);
    let b_13 = block_b(&kl, delta, q, i1, i3);
    let c_23 = block_c(&kl, delta, q, i2, i3);
    let c_21 = block_c(&kl, delta, q, i2, i1);
    let sb1 = block_small_b(&kl, q, i1);
    let sb2 = block_small_b(&kl, q, i2);
    let sb3 = block_small_b(&kl, q, i3);
    let a0_1 = kl.a0[i1 - 1];
    let a0_3 = kl.a0[i3 - 1];
    let d = block_d(&kl, delta, q, i1, i2, i3);

    let j011_23 = j1_2 * j1_3 / 6.0 - delta / PI * j1_3 * sb2 + delta * delta * b_23
        - 0.25 * delta * a0_3 * j1_2
        + delta / (2.0 * PI) * sb3 * j1_2
        + delta * delta * c_23
        + 0.5 * delta * delta * a_23;

    Ok(j1_1 * j011_23 / delta + 0.5 * a0_1 * j11_23 + sb1 * j1_2 * j1_3 / (2.0 * PI)
        - delta * j1_2 * b_13
        + delta * j1_3 * (0.5 * a_12 - c_21)
        + delta.powf(1.5) * d)
}

/// The inner double-with-time member of the triple construction, exposed for
/// comparison against the printed zeta-based display of the same integral.
pub fn milstein_j011(
    q: usize,
    delta: f64,
    idx: (usize, usize),
    draw: &GaussianDraw,
) -> Result<f64> {
    let (i2, i3) = idx;
    if i2 == 0 || i3 == 0 {
        return Err(Error::InvalidParameter(
            "the construction is stated for Wiener components only".into(),
        ));
    }
    if draw.max_index() < 4 * q {
        return Err(Error::IndexOutOfRange(format!(
            "draw covers indices up to {}, the construction at q = {q} needs {}",
            draw.max_index(),
            4 * q
        )));
    }
    let kl = plain_kl(draw, delta, q, 2 * q)?;
    let j1_2 = delta.sqrt() * draw.zeta(i2, 0)?;
    let j1_3 = delta.sqrt() * draw.zeta(i3, 0)?;
    Ok(j1_2 * j1_3 / 6.0 - delta / PI * j1_3 * block_small_b(&kl, q, i2)
        + delta * delta * block_b(&kl, delta, q, i2, i3)
        - 0.25 * delta * kl.a0[i3 - 1] * j1_2
        + delta / (2.0 * PI) * block_small_b(&kl, q, i3) * j1_2
        + delta * delta * block_c(&kl, delta, q, i2, i3)
        + 0.5 * delta * delta * block_a(&kl, delta, q, i2, i3))
}
