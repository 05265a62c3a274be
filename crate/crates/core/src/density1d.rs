//! Deterministic 1-D density evolution.
//!
//! Densities live on a uniform grid and every integral is a trapezoid sum.
//! The forward step convolves with the heat kernel `N(0, εη)`; the backward
//! step normalizes the conditional `exp(−(f(x) + (x − y)²/(2η))/ε)` at every
//! grid node `y` and mixes those conditionals against the current density.
//! Both steps are full `O(n²)` quadratures: this module is an oracle for the
//! Monte Carlo path, so exactness wins over speed.
//!
//! The inner loops run in parallel over output nodes, each with a fixed
//! summation order, so results do not depend on the thread count.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::Potential;

/// Relative density below which an endpoint counts as negligible.
pub const ENDPOINT_TOL: f64 = 1e-14;
/// Largest probability mass allowed to leave the grid in one operation.
pub const LEAKAGE_TOL: f64 = 1e-10;
/// Densities below this are treated as zero before taking logs.
pub const DENSITY_FLOOR: f64 = 1e-300;
/// Quantile nodes used by [`w2_grid_1d`].
pub const W2_QUANTILE_NODES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    pub lo: f64,
    pub hi: f64,
    pub values: Vec<f64>,
}

fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i + 1 == n {
        0.5
    } else {
        1.0
    }
}

impl GridDensity {
    /// Wrap raw values; they are checked but not normalized.
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Validation(format!("grid needs lo < hi, got [{lo}, {hi}]")));
        }
        if values.len() < 3 {
            return Err(Error::Validation(format!(
                "grid needs at least 3 nodes, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Validation(format!(
                "grid value at node {i} is {} (must be finite and nonnegative)",
                values[i]
            )));
        }
        Ok(GridDensity { lo, hi, values })
    }

    /// Sample `density` on the grid and normalize.
    pub fn from_fn(lo: f64, hi: f64, n: usize, density: impl Fn(f64) -> f64) -> Result<Self> {
        let h = (hi - lo) / (n.max(2) - 1) as f64;
        let values = (0..n).map(|i| density(lo + i as f64 * h)).collect();
        let mut g = Self::new(lo, hi, values)?;
        g.normalize()?;
        Ok(g)
    }

    /// Normalized `N(mean, var)` on the grid.
    pub fn gaussian(lo: f64, hi: f64, n: usize, mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0) {
            return Err(Error::Validation(format!("variance must be positive, got {var}")));
        }
        Self::from_fn(lo, hi, n, |x| (-(x - mean).powi(2) / (2.0 * var)).exp())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / (self.n() - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.h()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.x(i)).collect()
    }

    /// Trapezoid integral of `g(x) ρ(x)`.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        let n = self.n();
        let h = self.h();
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| trapezoid_weight(i, n) * v * g(self.x(i)))
            .sum::<f64>()
            * h
    }

    pub fn mass(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    pub fn mean(&self) -> f64 {
        self.integrate(|x| x) / self.mass()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.integrate(|x| (x - m).powi(2)) / self.mass()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let z = self.mass();
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::NumericRange(format!("grid mass is {z}, cannot normalize")));
        }
        self.values.iter_mut().for_each(|v| *v /= z);
        Ok(())
    }

    fn same_grid(&self, other: &GridDensity) -> Result<()> {
        if self.n() != other.n() || self.lo != other.lo || self.hi != other.hi {
            return Err(Error::Validation(format!(
                "densities live on different grids: [{}, {}] x {} vs [{}, {}] x {}",
                self.lo,
                self.hi,
                self.n(),
                other.lo,
                other.hi,
                other.n()
            )));
        }
        Ok(())
    }

    /// Two-column CSV `x,value`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "x,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.16e},{v:.16e}", self.x(i))?;
        }
        Ok(())
    }
}

/// Normalized `exp(−f)` on `[lo, hi]` with `n` nodes. Both endpoints must be
/// negligible relative to the peak, otherwise the truncated tails could carry
/// real mass.
pub fn grid_from_potential(f: &dyn Potential, lo: f64, hi: f64, n: usize) -> Result<GridDensity> {
    grid_from_scaled_potential(f, 1.0, lo, hi, n)
}

/// Normalized `exp(−f/ε)`, the stationary law of the entropy-`ε` sampler.
pub fn grid_from_scaled_potential(f: &dyn Potential, eps: f64, lo: f64, hi: f64, n: usize) -> Result<GridDensity> {
    if !(eps > 0.0) {
        return Err(Error::Validation(format!("eps must be positive, got {eps}")));
    }
    if f.dim() != 1 {
        return Err(Error::Validation(format!(
            "{} has dimension {}; grid densities are one-dimensional",
            f.name(),
            f.dim()
        )));
    }
    if !(lo < hi) || n < 3 {
        return Err(Error::Validation(format!(
            "grid needs lo < hi and n ≥ 3, got [{lo}, {hi}] with n = {n}"
        )));
    }
    let h = (hi - lo) / (n - 1) as f64;
    let logs: Vec<f64> = (0..n).map(|i| -f.value(&[lo + i as f64 * h]) / eps).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::NumericRange(format!("{} is not finite on the grid", f.name())));
    }
    let values: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let edge = values[0].max(values[n - 1]);
    if edge >= ENDPOINT_TOL {
        return Err(Error::DomainTooSmall(format!(
            "exp(-{}) at the boundary of [{lo}, {hi}] is {edge:.3e} of its peak; tail mass would be truncated",
            f.name()
        )));
    }
    let mut g = GridDensity::new(lo, hi, values)?;
    g.normalize()?;
    Ok(g)
}

fn normal_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Convolve with the `N(0, t)` kernel by trapezoid quadrature and
/// renormalize. Fails if more than [`LEAKAGE_TOL`] of the mass would be
/// carried past either end of the grid.
pub fn heat_convolve(rho: &GridDensity, t: f64) -> Result<GridDensity> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Validation(format!("heat time must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(rho.clone());
    }
    let n = rho.n();
    let h = rho.h();
    let sd = t.sqrt();
    let leaked: f64 = (0..n)
        .map(|j| {
            let x = rho.x(j);
            let out = normal_tail((x - rho.lo) / sd) + normal_tail((rho.hi - x) / sd);
            trapezoid_weight(j, n) * rho.values[j] * out
        })
        .sum::<f64>()
        * h;
    if leaked > LEAKAGE_TOL {
        return Err(Error::DomainTooSmall(format!(
            "heat kernel with t = {t} carries {leaked:.3e} of the mass past [{}, {}]",
            rho.lo, rho.hi
        )));
    }
    let norm = 1.0 / (2.0 * std::f64::consts::PI * t).sqrt();
    let kernel: Vec<f64> = (0..n)
        .map(|k| norm * (-((k as f64) * h).powi(2) / (2.0 * t)).exp())
        .collect();
    let src: Vec<f64> = (0..n)
        .map(|j| trapezoid_weight(j, n) * rho.values[j] * h)
        .collect();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            src.iter()
                .enumerate()
                .map(|(j, s)| s * kernel[i.abs_diff(j)])
                .sum()
        })
        .collect();
    let mut out = GridDensity::new(rho.lo, rho.hi, values)?;
    out.normalize()?;
    Ok(out)
}

/// Backward step: `ρ^X(x) = ∫ π_ε^{X|Y}(x | y) ρ^Y(y) dy` with each
/// conditional normalized by quadrature on the grid.
pub fn rgo_density_step(rho_y: &GridDensity, f: &dyn Potential, eta: f64, eps: f64) -> Result<GridDensity> {
    if f.dim() != 1 {
        return Err(Error::Validation(format!(
            "{} has dimension {}; grid densities are one-dimensional",
            f.name(),
            f.dim()
        )));
    }
    if !(eta > 0.0) || !(eps > 0.0) {
        return Err(Error::Validation(format!(
            "eta and eps must be positive, got {eta} and {eps}"
        )));
    }
    let n = rho_y.n();
    let h = rho_y.h();
    let fx: Vec<f64> = (0..n).map(|i| f.value(&[rho_y.x(i)]) / eps).collect();
    if let Some(i) = fx.iter().position(|v| !v.is_finite()) {
        return Err(Error::NumericRange(format!(
            "{} is not finite at grid node {i} (x = {})",
            f.name(),
            rho_y.x(i)
        )));
    }
    let quad: Vec<f64> = (0..n)
        .map(|k| ((k as f64) * h).powi(2) / (2.0 * eta * eps))
        .collect();
    let log_cond = |i: usize, j: usize| -fx[i] - quad[i.abs_diff(j)];

    // Log-normalizer of every conditional and the share of its mass sitting
    // on the grid endpoints.
    let norms: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let top = (0..n).map(|i| log_cond(i, j)).fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = (0..n)
                .map(|i| trapezoid_weight(i, n) * (log_cond(i, j) - top).exp())
                .sum::<f64>()
                * h;
            let edge = ((log_cond(0, j) - top).exp() + (log_cond(n - 1, j) - top).exp()) * h / z;
            (top + z.ln(), edge)
        })
        .collect();
    if let Some(j) = norms.iter().position(|(lz, _)| !lz.is_finite()) {
        return Err(Error::NumericRange(format!(
            "conditional normalizer at grid node {j} (y = {}) is not representable",
            rho_y.x(j)
        )));
    }
    let truncated: f64 = (0..n)
        .map(|j| trapezoid_weight(j, n) * rho_y.values[j] * h * norms[j].1)
        .sum();
    if truncated > LEAKAGE_TOL {
        return Err(Error::DomainTooSmall(format!(
            "conditionals put {truncated:.3e} of the mass on the boundary of [{}, {}]",
            rho_y.lo, rho_y.hi
        )));
    }

    let weights: Vec<f64> = (0..n)
        .map(|j| trapezoid_weight(j, n) * rho_y.values[j] * h)
        .collect();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .filter(|&j| weights[j] > 0.0)
                .map(|j| weights[j] * (log_cond(i, j) - norms[j].0).exp())
                .sum()
        })
        .collect();
    let mut out = GridDensity::new(rho_y.lo, rho_y.hi, values)?;
    out.normalize()?;
    Ok(out)
}

/// One full iteration: heat flow for `εη`, then the backward step.
pub fn density_iteration(rho: &GridDensity, f: &dyn Potential, eta: f64, eps: f64) -> Result<GridDensity> {
    let y = heat_convolve(rho, eps * eta)?;
    rgo_density_step(&y, f, eta, eps)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceKind {
    Kl,
    Chi2,
    Renyi(f64),
}

/// `KL`, `χ²` or Rényi-`q` divergence of `rho` from `pi` by quadrature.
pub fn divergence_grid(kind: DivergenceKind, rho: &GridDensity, pi: &GridDensity) -> Result<f64> {
    rho.same_grid(pi)?;
    let n = rho.n();
    let h = rho.h();
    for i in 0..n {
        if rho.values[i] > DENSITY_FLOOR && pi.values[i] <= DENSITY_FLOOR {
            return Err(Error::Support(format!(
                "rho has mass at x = {} where pi vanishes",
                rho.x(i)
            )));
        }
    }
    let terms = (0..n).filter(|&i| rho.values[i] > DENSITY_FLOOR);
    match kind {
        DivergenceKind::Kl => {
            let kl: f64 = terms
                .map(|i| {
                    let (r, p) = (rho.values[i], pi.values[i]);
                    trapezoid_weight(i, n) * r * (r / p).ln()
                })
                .sum::<f64>()
                * h;
            Ok(kl.max(0.0))
        }
        DivergenceKind::Chi2 => {
            let s: f64 = terms
                .map(|i| {
                    let (r, p) = (rho.values[i], pi.values[i]);
                    trapezoid_weight(i, n) * r * (r / p)
                })
                .sum::<f64>()
                * h;
            Ok((s - 1.0).max(0.0))
        }
        DivergenceKind::Renyi(q) => {
            if !(q > 0.0) {
                return Err(Error::Domain(format!("Renyi order must be positive, got {q}")));
            }
            if q == 1.0 {
                return divergence_grid(DivergenceKind::Kl, rho, pi);
            }
            // log ∫ ρ^q π^{1−q} in log space.
            let logs: Vec<f64> = terms
                .map(|i| {
                    let (r, p) = (rho.values[i], pi.values[i]);
                    (trapezoid_weight(i, n) * h).ln() + q * r.ln() + (1.0 - q) * p.ln()
                })
                .collect();
            let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
            Ok((lse / (q - 1.0)).max(0.0))
        }
    }
}

fn cdf(g: &GridDensity) -> Vec<f64> {
    let h = g.h();
    let mut c = Vec::with_capacity(g.n());
    let mut acc = 0.0;
    c.push(0.0);
    for w in g.values.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * h;
        c.push(acc);
    }
    c.iter_mut().for_each(|v| *v /= acc);
    c
}

fn quantile(g: &GridDensity, c: &[f64], u: f64) -> f64 {
    let k = c.partition_point(|v| *v < u).clamp(1, c.len() - 1);
    let (c0, c1) = (c[k - 1], c[k]);
    let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
    g.x(k - 1) + frac * g.h()
}

/// `W₂` between two grid densities through their quantile functions,
/// integrated by the midpoint rule on [`W2_QUANTILE_NODES`] nodes.
pub fn w2_grid_1d(rho: &GridDensity, pi: &GridDensity) -> Result<f64> {
    rho.same_grid(pi)?;
    let (ca, cb) = (cdf(rho), cdf(pi));
    let m = W2_QUANTILE_NODES;
    let s: f64 = (0..m)
        .map(|k| {
            let u = (k as f64 + 0.5) / m as f64;
            (quantile(rho, &ca, u) - quantile(pi, &cb, u)).powi(2)
        })
        .sum();
    Ok((s / m as f64).sqrt())
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// diagonal `d` and off-diagonal `e` (Sturm sequence count).
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
        q = d[i] - x - off;
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Spectral-gap estimate of the Poincaré constant of `pi`: the second
/// smallest eigenvalue of the piecewise-linear discretization of
/// `ψ ↦ −(πψ')'/π` with natural boundary conditions, i.e. of
/// `B^{-1/2} A B^{-1/2}` where `A` is the weighted stiffness matrix and `B`
/// the lumped mass matrix.
pub fn poincare_estimate(pi: &GridDensity) -> Result<f64> {
    let n = pi.n();
    let h = pi.h();
    if let Some(i) = pi.values.iter().position(|v| !(*v > 0.0)) {
        return Err(Error::Support(format!(
            "pi vanishes at x = {}; the spectral estimate needs a positive density",
            pi.x(i)
        )));
    }
    let a: Vec<f64> = pi.values.windows(2).map(|w| 0.5 * (w[0] + w[1]) / h).collect();
    let b: Vec<f64> = (0..n).map(|i| trapezoid_weight(i, n) * pi.values[i] * h).collect();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 { a[i - 1] } else { 0.0 };
            let right = if i + 1 < n { a[i] } else { 0.0 };
            (left + right) / b[i]
        })
        .collect();
    let off: Vec<f64> = (0..n - 1).map(|i| -a[i] / (b[i] * b[i + 1]).sqrt()).collect();
    if diag.iter().chain(&off).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("discretized operator has non-finite entries".into()));
    }
    let upper = (0..n)
        .map(|i| {
            let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { off[i].abs() } else { 0.0 };
            diag[i] + l + r
        })
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (0.0, upper);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(&diag, &off, mid) >= 2 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let gap = 0.5 * (lo + hi);
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::Numeric(format!("spectral gap estimate failed (got {gap})")));
    }
    Ok(gap)
}
