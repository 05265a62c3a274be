//! Restricted Gaussian oracle: exact samples from
//! `π_ε^{X|Y}(x | y) ∝ exp(−(f(x) + ‖x − y‖²/(2η))/ε)`.
//!
//! The composite potential is minimized first, then a Gaussian proposal
//! `N(x*, α̃⁻¹ I)` centred at the minimizer is accepted with probability
//! `exp(−f̃(Z) + f̃(x*) + (α̃/2)‖Z − x*‖²)`. Strong convexity of `f̃` makes that
//! probability at most one.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::potential::{composite, Potential, PotentialRef};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_INNER_ITERATIONS: usize = 10_000;
pub const DEFAULT_MAX_TRIALS: usize = 1_000_000;
/// Slack above one tolerated on a computed acceptance probability before it
/// is treated as a broken contract; values in `(1, 1 + slack]` are clamped.
pub const ACCEPTANCE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RgoOptions {
    /// Gradient-norm tolerance of the unscaled composite `f + ‖·−y‖²/(2η)`.
    pub tol: f64,
    pub max_inner_iterations: usize,
    pub max_trials: usize,
}

impl Default for RgoOptions {
    fn default() -> Self {
        RgoOptions {
            tol: DEFAULT_TOL,
            max_inner_iterations: DEFAULT_MAX_INNER_ITERATIONS,
            max_trials: DEFAULT_MAX_TRIALS,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RgoStats {
    pub calls: u64,
    pub total_trials: u64,
    pub total_inner_iterations: u64,
    pub max_trials_single_call: u64,
}

impl RgoStats {
    pub fn record(&mut self, trials: usize, inner_iterations: usize) {
        self.calls += 1;
        self.total_trials += trials as u64;
        self.total_inner_iterations += inner_iterations as u64;
        self.max_trials_single_call = self.max_trials_single_call.max(trials as u64);
    }

    pub fn merge(&mut self, other: &RgoStats) {
        self.calls += other.calls;
        self.total_trials += other.total_trials;
        self.total_inner_iterations += other.total_inner_iterations;
        self.max_trials_single_call = self.max_trials_single_call.max(other.max_trials_single_call);
    }

    pub fn mean_trials(&self) -> f64 {
        if self.calls == 0 {
            0.0
        } else {
            self.total_trials as f64 / self.calls as f64
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Minimize a strongly convex potential.
///
/// Uses the closed-form minimizer when the potential exposes one (zero
/// iterations); otherwise gradient descent with backtracking until
/// `‖∇f̃‖ ≤ tol`.
pub fn inner_minimize(
    ft: &dyn Potential,
    x_init: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<(Vec<f64>, usize)> {
    if !(tol > 0.0) {
        return Err(Error::Validation(format!("tolerance must be positive, got {tol}")));
    }
    if x_init.len() != ft.dim() {
        return Err(Error::Validation(format!(
            "initial point has dimension {} but potential has dimension {}",
            x_init.len(),
            ft.dim()
        )));
    }
    if let Some(x) = ft.exact_minimizer() {
        return Ok((x, 0));
    }
    match ft.regularity().alpha_strong_convexity {
        Some(a) if a > 0.0 => {}
        _ => {
            return Err(Error::Validation(format!(
                "{} is not declared strongly convex",
                ft.name()
            )))
        }
    }
    if !ft.is_smooth() || ft.grad(x_init).is_none() {
        return Err(Error::Capability(format!(
            "{} has neither a smooth gradient nor a closed-form prox",
            ft.name()
        )));
    }

    let mut x = x_init.to_vec();
    let mut g = ft.grad(&x).expect("checked above");
    let mut step = ft.regularity().beta_smoothness.map_or(1.0, |b| 1.0 / b);
    let mut trial = vec![0.0; x.len()];
    for iter in 0..max_iterations {
        let gnorm = norm(&g);
        if gnorm <= tol {
            return Ok((x, iter));
        }
        let gsq = gnorm * gnorm;
        // The composite is convex along the ray, so a directional derivative
        // still at least half the initial one implies an Armijo decrease with
        // constant 1/2. Testing slopes instead of values keeps the line search
        // meaningful once value differences fall below rounding.
        let mut g_trial;
        loop {
            for ((t, xi), gi) in trial.iter_mut().zip(&x).zip(&g) {
                *t = xi - step * gi;
            }
            g_trial = ft.grad(&trial).expect("checked above");
            let slope: f64 = g_trial.iter().zip(&g).map(|(a, b)| a * b).sum();
            if slope >= 0.5 * gsq && ft.value(&trial).is_finite() {
                std::mem::swap(&mut x, &mut trial);
                step *= 1.5;
                break;
            }
            step *= 0.5;
            if step < 1e-300 {
                return Err(Error::Convergence {
                    iterate: x,
                    residual: gnorm,
                    iterations: iter,
                });
            }
        }
        g = g_trial;
    }
    let residual = norm(&g);
    if residual <= tol {
        return Ok((x, max_iterations));
    }
    Err(Error::Convergence {
        iterate: x,
        residual,
        iterations: max_iterations,
    })
}

/// Draw one sample from `exp(−f̃)` by rejection from `N(x*, α̃⁻¹ I)`.
/// Returns the sample and the number of proposals drawn.
pub fn rejection_sample<R: Rng + ?Sized>(
    ft: &dyn Potential,
    x_star: &[f64],
    alpha_tilde: f64,
    rng: &mut R,
    max_trials: usize,
) -> Result<(Vec<f64>, usize)> {
    if !(alpha_tilde > 0.0) {
        return Err(Error::Validation(format!(
            "proposal precision must be positive, got {alpha_tilde}"
        )));
    }
    let f_star = ft.value(x_star);
    let sd = alpha_tilde.sqrt().recip();
    let log_cap = ACCEPTANCE_SLACK.ln_1p();
    let mut z = vec![0.0; x_star.len()];
    for trial in 1..=max_trials {
        let mut dist_sq = 0.0;
        for (zi, xi) in z.iter_mut().zip(x_star) {
            let xi_noise: f64 = rng.sample(StandardNormal);
            let step = sd * xi_noise;
            *zi = xi + step;
            dist_sq += step * step;
        }
        let log_p = -ft.value(&z) + f_star + 0.5 * alpha_tilde * dist_sq;
        if log_p > log_cap {
            return Err(Error::ContractViolation {
                probability: log_p.exp(),
            });
        }
        let u: f64 = rng.gen();
        if u < log_p.min(0.0).exp() {
            return Ok((z, trial));
        }
    }
    Err(Error::RunawayRejection { cap: max_trials })
}

/// One exact draw from `π_ε^{X|Y}(· | y)`; updates `stats`.
pub fn rgo_sample<R: Rng + ?Sized>(
    f: &PotentialRef,
    y: &[f64],
    eta: f64,
    eps: f64,
    rng: &mut R,
    stats: &mut RgoStats,
    opts: &RgoOptions,
) -> Result<Vec<f64>> {
    let ft = composite(f.clone(), y, eta, eps)?;
    let alpha_tilde = ft.regularity().alpha_strong_convexity.ok_or_else(|| {
        Error::Validation(format!(
            "composite of {} with eta = {eta} is not strongly convex",
            f.name()
        ))
    })?;
    // The composite's gradient carries a 1/ε factor.
    let (x_star, iters) = inner_minimize(&ft, y, opts.tol / eps, opts.max_inner_iterations)?;
    let (x, trials) = rejection_sample(&ft, &x_star, alpha_tilde, rng, opts.max_trials)?;
    stats.record(trials, iters);
    Ok(x)
}
