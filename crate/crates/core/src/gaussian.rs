//! Reproducible standard Gaussian variates: the zeta_j^(i) driving the
//! expansions plus the tail variables xi_q^(i), mu_q^(i) with weights
//! alpha_q, beta_q.
//!
//! Every variate is generated by a counter-based scheme keyed on
//! (seed, stream tag, component, index), so draws are independent of
//! evaluation order and safe to produce in parallel.

use crate::error::{Error, Result};
use crate::kahan::NeumaierSum;

const TAG_ZETA: u64 = 0x5a45_5441;
const TAG_XI: u64 = 0x5849;
const TAG_MU: u64 = 0x4d55;
pub(crate) const TAG_PATH: u64 = 0x5041_5448;
pub(crate) const TAG_TRIAL: u64 = 0x5452_4c53;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a seed with stream coordinates into a generator state.
#[inline]
pub(crate) fn mix_key(seed: u64, parts: &[u64]) -> u64 {
    let mut state = seed;
    let mut acc = splitmix64(&mut state);
    for &p in parts {
        state ^= p.wrapping_mul(0xd134_2543_de82_ef95);
        acc ^= splitmix64(&mut state);
    }
    acc
}

#[inline]
fn unit_open(bits: u64) -> f64 {
    // (0, 1]: 53 significand bits, never exactly 0
    ((bits >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
}

/// Standard normal at a fixed stream position, via Box–Muller on two
/// splitmix64 outputs. Pure in (seed, tag, a, b).
pub(crate) fn standard_normal_at(seed: u64, tag: u64, a: u64, b: u64) -> f64 {
    let mut state = mix_key(seed, &[tag, a, b]);
    let u1 = unit_open(splitmix64(&mut state));
    let u2 = unit_open(splitmix64(&mut state));
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// alpha_q = pi^2/6 - sum_{r<=q} r^-2 and beta_q = pi^4/90 - sum_{r<=q} r^-4,
/// clamped at zero if rounding dips negative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailWeights {
    pub alpha: f64,
    pub beta: f64,
}

pub fn tail_weights(q: usize) -> TailWeights {
    let mut s2 = NeumaierSum::new();
    let mut s4 = NeumaierSum::new();
    // ascending r: the compensation absorbs the shrinking terms
    for r in 1..=q {
        let inv = 1.0 / (r as f64);
        let inv2 = inv * inv;
        s2.add(inv2);
        s4.add(inv2 * inv2);
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    TailWeights {
        alpha: (pi2 / 6.0 - s2.value()).max(0.0),
        beta: (pi2 * pi2 / 90.0 - s4.value()).max(0.0),
    }
}

/// Matrix of independent standard Gaussians zeta_j^(i) for i in 1..=m,
/// j in 0..=p, plus tail variables xi_q^(i), mu_q^(i). Deterministic in
/// (seed, m, p, q); extending p leaves existing slots unchanged.
///
/// The formal time component i = 0 is not stored; see
/// [`crate::expansion::zeta_eff`].
#[derive(Clone, Debug)]
pub struct GaussianDraw {
    seed: u64,
    m: usize,
    p: usize,
    q: usize,
    zeta: Vec<f64>, // m rows of p+1
    xi: Vec<f64>,
    mu: Vec<f64>,
}

impl GaussianDraw {
    pub fn sample(seed: u64, m: usize, p: usize, q: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParameter(
                "at least one Wiener component is required".into(),
            ));
        }
        let cols = p + 1;
        let mut zeta = vec![0.0; m * cols];
        for i in 1..=m {
            for j in 0..=p {
                zeta[(i - 1) * cols + j] = standard_normal_at(seed, TAG_ZETA, i as u64, j as u64);
            }
        }
        let xi = (1..=m)
            .map(|i| standard_normal_at(seed, TAG_XI, i as u64, q as u64))
            .collect();
        let mu = (1..=m)
            .map(|i| standard_normal_at(seed, TAG_MU, i as u64, q as u64))
            .collect();
        Ok(Self {
            seed,
            m,
            p,
            q,
            zeta,
            xi,
            mu,
        })
    }

    /// Assemble a draw from externally produced variates (unit probes,
    /// path-coupled reconstructions). `zeta[i-1]` must hold p+1 entries.
    pub fn from_parts(
        m: usize,
        p: usize,
        q: usize,
        zeta: Vec<Vec<f64>>,
        xi: Vec<f64>,
        mu: Vec<f64>,
    ) -> Result<Self> {
        if zeta.len() != m || xi.len() != m || mu.len() != m {
            return Err(Error::InvalidParameter(format!(
                "expected {m} rows of variates, got {}/{}/{}",
                zeta.len(),
                xi.len(),
                mu.len()
            )));
        }
        if zeta.iter().any(|row| row.len() != p + 1) {
            return Err(Error::InvalidParameter(format!(
                "every zeta row must hold p + 1 = {} entries",
                p + 1
            )));
        }
        let flat = zeta.into_iter().flatten().collect();
        Ok(Self {
            seed: 0,
            m,
            p,
            q,
            zeta: flat,
            xi,
            mu,
        })
    }

    /// All-zero draw, handy for coefficient probing.
    pub fn zeros(m: usize, p: usize, q: usize) -> Self {
        Self {
            seed: 0,
            m,
            p,
            q,
            zeta: vec![0.0; m * (p + 1)],
            xi: vec![0.0; m],
            mu: vec![0.0; m],
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn max_index(&self) -> usize {
        self.p
    }

    pub fn tail_cut(&self) -> usize {
        self.q
    }

    fn check_component(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.m {
            return Err(Error::IndexOutOfRange(format!(
                "component {i} outside 1..={}",
                self.m
            )));
        }
        Ok(())
    }

    /// zeta_j^(i) for i in 1..=m, j in 0..=p.
    pub fn zeta(&self, i: usize, j: usize) -> Result<f64> {
        self.check_component(i)?;
        if j > self.p {
            return Err(Error::IndexOutOfRange(format!(
                "basis index {j} outside 0..={}",
                self.p
            )));
        }
        Ok(self.zeta[(i - 1) * (self.p + 1) + j])
    }

    pub fn xi(&self, i: usize) -> Result<f64> {
        self.check_component(i)?;
        Ok(self.xi[i - 1])
    }

    pub fn mu(&self, i: usize) -> Result<f64> {
        self.check_component(i)?;
        Ok(self.mu[i - 1])
    }
}
