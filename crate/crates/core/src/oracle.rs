//! Brute-force fine-grid Monte Carlo oracle: simulate a Wiener path, form
//! iterated integrals by discretized nesting (left point for Ito, midpoint of
//! the accumulated inner integral for Stratonovich), project the same path
//! onto the basis to get pathwise-coupled variates, and estimate mean-square
//! errors of any truncated expansion against the pathwise truth.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::basis::{eval_phi, BasisKind, Interval};
use crate::catalog::{eval_catalog, CatalogId, CatalogName};
use crate::error::{Error, Result};
use crate::expansion::{stratonovich_truncated, ComponentIndices, IntegralKind};
use crate::gaussian::{self, tail_weights, GaussianDraw};
use crate::kahan::NeumaierSum;
use crate::kernel::{CoefficientTable, WeightedKernel};

/// A discretized m-component Wiener path on an equispaced grid with
/// independent N(0, dt) increments, reproducible from the seed.
#[derive(Clone, Debug)]
pub struct WienerPath {
    iv: Interval,
    steps: usize,
    m: usize,
    seed: u64,
    dw: Vec<f64>, // m rows of `steps`
}

impl WienerPath {
    pub fn generate(seed: u64, m: usize, steps: usize, iv: Interval) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParameter(
                "at least one Wiener component is required".into(),
            ));
        }
        if steps < 2 {
            return Err(Error::InvalidParameter("grid needs at least 2 steps".into()));
        }
        let sd = (iv.length() / steps as f64).sqrt();
        let mut dw = vec![0.0; m * steps];
        for i in 1..=m {
            let row = (i - 1) * steps;
            for n in 0..steps {
                dw[row + n] =
                    sd * gaussian::standard_normal_at(seed, gaussian::TAG_PATH, i as u64, n as u64);
            }
        }
        Ok(Self {
            iv,
            steps,
            m,
            seed,
            dw,
        })
    }

    pub fn interval(&self) -> Interval {
        self.iv
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn increments(&self, i: usize) -> Result<&[f64]> {
        if i == 0 || i > self.m {
            return Err(Error::IndexOutOfRange(format!(
                "component {i} outside 1..={}",
                self.m
            )));
        }
        Ok(&self.dw[(i - 1) * self.steps..i * self.steps])
    }

    /// W_T - W_t of one component (the increments telescope).
    pub fn endpoint_increment(&self, i: usize) -> Result<f64> {
        Ok(self.increments(i)?.iter().sum())
    }

    /// Merge increments in groups of `factor`, producing the same Brownian
    /// path on a coarser grid. Used for grid-refinement studies.
    pub fn coarsen(&self, factor: usize) -> Result<WienerPath> {
        if factor == 0 || self.steps % factor != 0 {
            return Err(Error::InvalidParameter(format!(
                "coarsening factor {factor} must divide the step count {}",
                self.steps
            )));
        }
        let steps = self.steps / factor;
        let mut dw = vec![0.0; self.m * steps];
        for i in 0..self.m {
            for n in 0..steps {
                let mut s = 0.0;
                for v in &self.dw[i * self.steps + n * factor..i * self.steps + (n + 1) * factor] {
                    s += v;
                }
                dw[i * steps + n] = s;
            }
        }
        Ok(WienerPath {
            iv: self.iv,
            steps,
            m: self.m,
            seed: self.seed,
            dw,
        })
    }
}

/// Nested discretized iterated integral over the path. Ito uses left-point
/// evaluation; Stratonovich uses the midpoint of the accumulated inner
/// integral (trapezoid-consistent) and midpoint weights. Time components
/// (index 0) integrate against dt.
pub fn simulate_iterated(
    path: &WienerPath,
    kernel: &WeightedKernel,
    idx: &ComponentIndices,
    kind: IntegralKind,
) -> Result<f64> {
    let k = kernel.multiplicity();
    if idx.multiplicity() != k {
        return Err(Error::ArityMismatch {
            expected: k,
            got: idx.multiplicity(),
        });
    }
    for l in 0..k {
        if idx[l] > path.components() {
            return Err(Error::IndexOutOfRange(format!(
                "component {} outside 0..={}",
                idx[l],
                path.components()
            )));
        }
    }
    let n = path.steps();
    let t0 = path.interval().start();
    let dt = path.interval().length() / n as f64;
    let mut prev = vec![1.0; n + 1];
    let mut cur = vec![0.0; n + 1];
    for l in 0..k {
        let e = kernel.exponents()[l] as i32;
        let dws = if idx[l] >= 1 {
            Some(path.increments(idx[l])?)
        } else {
            None
        };
        cur[0] = 0.0;
        for step in 0..n {
            let dx = match dws {
                Some(w) => w[step],
                None => dt,
            };
            let (tau, feed) = match kind {
                IntegralKind::Ito => (t0 + step as f64 * dt, prev[step]),
                IntegralKind::Stratonovich => (
                    t0 + (step as f64 + 0.5) * dt,
                    0.5 * (prev[step] + prev[step + 1]),
                ),
            };
            let psi = (t0 - tau).powi(e);
            cur[step + 1] = cur[step] + psi * feed * dx;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[n])
}

/// Left-point Riemann-Stieltjes projection of the path onto one basis
/// function: zeta_j^(i) reconstructed from the path itself.
pub fn zeta_from_path(path: &WienerPath, kind: BasisKind, j: usize, i: usize) -> Result<f64> {
    let dw = path.increments(i)?;
    let iv = path.interval();
    let n = path.steps();
    let dt = iv.length() / n as f64;
    let mut acc = NeumaierSum::new();
    for (step, &inc) in dw.iter().enumerate() {
        let tau = iv.start() + step as f64 * dt;
        acc.add(eval_phi(kind, iv, j, tau)? * inc);
    }
    Ok(acc.value())
}

/// All Legendre projections zeta_j^(i) for j = 0..=jmax in one sweep: the
/// recurrence runs once per grid point instead of once per (j, point) pair.
pub fn legendre_zetas_from_path(path: &WienerPath, i: usize, jmax: usize) -> Result<Vec<f64>> {
    let dw = path.increments(i)?;
    let iv = path.interval();
    let n = path.steps();
    let dt = iv.length() / n as f64;
    let norm = iv.length().sqrt();
    let mut acc = vec![NeumaierSum::new(); jmax + 1];
    for (step, &inc) in dw.iter().enumerate() {
        let x = 2.0 * (step as f64 * dt) / iv.length() - 1.0;
        let mut p_prev = 1.0;
        let mut p = x;
        for (j, slot) in acc.iter_mut().enumerate() {
            let val = match j {
                0 => 1.0,
                1 => x,
                _ => {
                    let next =
                        ((2 * j - 1) as f64 * x * p - (j - 1) as f64 * p_prev) / j as f64;
                    p_prev = p;
                    p = next;
                    next
                }
            };
            slot.add(((2 * j + 1) as f64).sqrt() * val * inc);
        }
    }
    Ok(acc.iter().map(|s| s.value() / norm).collect())
}

/// All trigonometric path projections up to frequency r_max at once:
/// one DFT of the increments per component.
#[derive(Clone, Debug)]
pub struct TrigPathZetas {
    pub zeta0: f64,
    /// sin[r - 1] = zeta_{2r-1}
    pub sin: Vec<f64>,
    /// cos[r - 1] = zeta_{2r}
    pub cos: Vec<f64>,
}

static FFT_PLANS: OnceLock<Mutex<HashMap<usize, Arc<dyn Fft<f64>>>>> = OnceLock::new();

fn fft_plan(n: usize) -> Arc<dyn Fft<f64>> {
    let cache = FFT_PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| FftPlanner::new().plan_fft_forward(n))
        .clone()
}

pub fn trig_zetas_from_path(path: &WienerPath, i: usize, r_max: usize) -> Result<TrigPathZetas> {
    let n = path.steps();
    if 2 * r_max >= n {
        return Err(Error::InvalidParameter(format!(
            "grid with {n} steps resolves frequencies below {}, requested {r_max}",
            n / 2
        )));
    }
    let dw = path.increments(i)?;
    let mut buf: Vec<Complex<f64>> = dw.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft_plan(n).process(&mut buf);
    let len = path.interval().length();
    let norm = (2.0 / len).sqrt();
    let mut sin = Vec::with_capacity(r_max);
    let mut cos = Vec::with_capacity(r_max);
    for r in 1..=r_max {
        sin.push(-norm * buf[r].im);
        cos.push(norm * buf[r].re);
    }
    Ok(TrigPathZetas {
        zeta0: buf[0].re / len.sqrt(),
        sin,
        cos,
    })
}

/// What the Monte Carlo error estimate compares against the pathwise truth.
#[derive(Clone, Copy, Debug)]
pub enum ApproxTarget<'a> {
    /// A catalog entry at truncation q on the given interval, with tails
    /// reconstructed from the path.
    Catalog { id: CatalogId, iv: Interval },
    /// A Stratonovich multiple-sum expansion over a coefficient table.
    StratonovichTable(&'a CoefficientTable),
}

impl ApproxTarget<'_> {
    /// Catalog target on the unit interval.
    pub fn catalog(id: CatalogId) -> Self {
        ApproxTarget::Catalog {
            id,
            iv: Interval::unit(),
        }
    }
}

/// A Monte Carlo estimate of E[(truth - approximation)^2].
#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    /// mean of (truth - approximation)
    pub mean: f64,
    /// mean of (truth - approximation)^2: the mean-square error
    pub second_moment: f64,
    /// standard error of the second moment estimate
    pub stderr: f64,
    pub trials: usize,
    pub grid_n: usize,
}

fn catalog_kernel(name: CatalogName, iv: Interval) -> Result<WeightedKernel> {
    WeightedKernel::new(name.kernel_exponents(), iv)
}

/// Tail reconstruction cap: enough frequencies that the variance beyond the
/// cap sits below the Monte Carlo noise at the prescribed trial counts.
fn reconstruction_cap(q: usize, grid_n: usize) -> Result<usize> {
    let cap = (16 * q + 1000).min(grid_n / 2 - 1);
    if cap < q {
        return Err(Error::InvalidParameter(format!(
            "reconstruction cap {cap} below the tail cut {q}; refine the grid"
        )));
    }
    Ok(cap)
}

fn path_draw_trig(
    path: &WienerPath,
    q: usize,
    pneed: usize,
    rcap: usize,
) -> Result<GaussianDraw> {
    let m = path.components();
    let w = tail_weights(q);
    let r_total = rcap.max(pneed.div_ceil(2));
    let mut zeta = Vec::with_capacity(m);
    let mut xi = Vec::with_capacity(m);
    let mut mu = Vec::with_capacity(m);
    for i in 1..=m {
        let z = trig_zetas_from_path(path, i, r_total)?;
        let mut row = vec![0.0; pneed + 1];
        row[0] = z.zeta0;
        for j in 1..=pneed {
            let r = j.div_ceil(2);
            row[j] = if j % 2 == 1 { z.sin[r - 1] } else { z.cos[r - 1] };
        }
        let mut xs = NeumaierSum::new();
        let mut ms = NeumaierSum::new();
        for r in (q + 1)..=rcap {
            let rf = r as f64;
            xs.add(z.sin[r - 1] / rf);
            ms.add(z.cos[r - 1] / (rf * rf));
        }
        xi.push(if w.alpha > 0.0 { xs.value() / w.alpha.sqrt() } else { 0.0 });
        mu.push(if w.beta > 0.0 { ms.value() / w.beta.sqrt() } else { 0.0 });
        zeta.push(row);
    }
    GaussianDraw::from_parts(m, pneed, q, zeta, xi, mu)
}

fn path_draw_basis(path: &WienerPath, kind: BasisKind, pneed: usize, q: usize) -> Result<GaussianDraw> {
    let m = path.components();
    let mut zeta = Vec::with_capacity(m);
    for i in 1..=m {
        let row = match kind {
            BasisKind::Legendre => legendre_zetas_from_path(path, i, pneed)?,
            BasisKind::Trigonometric => {
                let mut row = Vec::with_capacity(pneed + 1);
                for j in 0..=pneed {
                    row.push(zeta_from_path(path, kind, j, i)?);
                }
                row
            }
        };
        zeta.push(row);
    }
    GaussianDraw::from_parts(m, pneed, q, zeta, vec![0.0; m], vec![0.0; m])
}

/// Estimate E[(J - J^q)^2] by pathwise coupling: per trial, simulate a fine
/// path, build the truth by discretized nesting, feed the same path's basis
/// projections (tails reconstructed as finite partial sums over frequencies
/// q+1 ..= cap) into the approximation, and average the squared difference.
pub fn ms_error_vs_truth(
    target: ApproxTarget<'_>,
    idx: &ComponentIndices,
    q: usize,
    trials: usize,
    grid_n: usize,
    seed: u64,
) -> Result<McEstimate> {
    if trials < 1000 {
        return Err(Error::InvalidParameter(
            "at least 1000 trials are required for a reported estimate".into(),
        ));
    }
    if grid_n < 1000 {
        return Err(Error::InvalidParameter(
            "grid must have at least 1000 steps".into(),
        ));
    }
    let (kernel, iv) = match target {
        ApproxTarget::Catalog { id, iv } => (catalog_kernel(id.name, iv)?, iv),
        ApproxTarget::StratonovichTable(t) => (t.kernel().clone(), t.kernel().interval()),
    };
    let m = idx.as_slice().iter().copied().max().unwrap_or(1).max(1);
    let rcap = reconstruction_cap(q, grid_n)?;

    let diffs: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<f64> {
            let trial_seed = gaussian::mix_key(seed, &[gaussian::TAG_TRIAL, trial as u64]);
            let path = WienerPath::generate(trial_seed, m, grid_n, iv)?;
            let truth = simulate_iterated(&path, &kernel, idx, IntegralKind::Stratonovich)?;
            let approx = match target {
                ApproxTarget::Catalog { id, .. } => {
                    let pneed = id.name.required_index(id.basis, q);
                    let draw = match id.basis {
                        BasisKind::Trigonometric => path_draw_trig(&path, q, pneed, rcap)?,
                        BasisKind::Legendre => path_draw_basis(&path, BasisKind::Legendre, pneed, q)?,
                    };
                    eval_catalog(id, iv, idx, q, &draw)?
                }
                ApproxTarget::StratonovichTable(t) => {
                    let pneed = *t.orders().iter().max().unwrap();
                    let draw = path_draw_basis(&path, t.kind(), pneed, q)?;
                    stratonovich_truncated(t, idx, &draw)?.value
                }
            };
            Ok(truth - approx)
        })
        .collect::<Result<Vec<f64>>>()?;

    let n = trials as f64;
    let mut mean = NeumaierSum::new();
    let mut m2 = NeumaierSum::new();
    let mut m4 = NeumaierSum::new();
    for &d in &diffs {
        mean.add(d);
        m2.add(d * d);
        m4.add(d * d * d * d);
    }
    let second = m2.value() / n;
    let var_of_sq = (m4.value() / n - second * second).max(0.0);
    Ok(McEstimate {
        mean: mean.value() / n,
        second_moment: second,
        stderr: (var_of_sq / n).sqrt(),
        trials,
        grid_n,
    })
}

/// The spread allowance for comparing discretized estimates with closed
/// forms: first-order weak bias of the nested sums.
pub fn grid_bias_allowance(k: usize, iv: Interval, grid_n: usize) -> f64 {
    3.0 * iv.length().powi(k as i32) / grid_n as f64
}
