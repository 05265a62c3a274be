//! Runs a configured experiment and produces report rows.
//!
//! Divergence experiments (`gaussian_exact`, `eps_limit`, `density1d`)
//! measure every requested metric at every iteration and pair it with the
//! configured bounds. A bound's initial value is the measured metric at
//! `k = 0`, and its `α` and `η` come from the configuration, so every bound
//! row is a `rates` formula evaluated on the experiment's own parameters.

use nalgebra::DMatrix;

use crate::config::{bound_metric, BoundSpec, ExperimentConfig, ExperimentKind, InitLaw, Metric};
use crate::density1d::{
    density_iteration, divergence_grid, grid_from_scaled_potential, poincare_estimate, w2_grid_1d,
    DivergenceKind, GridDensity,
};
use crate::error::{Error, Result};
use crate::gaussian::{chi2_gauss, gaussian_step_entropic, kl_gauss, renyi_gauss, w2_gauss, GaussianState};
use crate::potential::PotentialRef;
use crate::proxopt::prox_point_run;
use crate::rates::{bound_eps_generalized, RateBound, Theorem, LOI_CONSTANT_STATED};
use crate::report::ReportRow;
use crate::sampler::{chain_rng, run, ChainEnsemble, Entropy};

/// Stream index reserved for drawing the initial ensemble, disjoint from
/// every chain's stream.
const INIT_STREAM: usize = usize::MAX;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    cfg.validate()?;
    let result = match cfg.kind {
        ExperimentKind::GaussianExact => gaussian_exact(cfg),
        ExperimentKind::EpsLimit => eps_limit(cfg),
        ExperimentKind::Density1d => density(cfg),
        ExperimentKind::McSampler => mc_sampler(cfg),
        ExperimentKind::ProxPoint => prox_point(cfg),
    };
    result.map_err(|e| e.context(format!("{} experiment", cfg.kind.as_str())))
}

struct ConfiguredBound {
    metric: Metric,
    bound: RateBound,
}

/// Instantiate the configured bounds with initial values measured on the
/// `k = 0` state. `fallback_alpha` supplies `α` for Poincaré-type bounds
/// when neither the bound nor the potential gives one.
fn configure_bounds(
    cfg: &ExperimentConfig,
    f: &PotentialRef,
    eta: f64,
    initial: &dyn Fn(Metric) -> Result<f64>,
    fallback_alpha: &dyn Fn() -> Result<f64>,
) -> Result<Vec<ConfiguredBound>> {
    cfg.bounds
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            configure_bound(cfg, f, eta, spec, initial, fallback_alpha).map_err(|e| e.context(format!("bound[{i}]")))
        })
        .collect()
}

fn configure_bound(
    cfg: &ExperimentConfig,
    f: &PotentialRef,
    eta: f64,
    spec: &BoundSpec,
    initial: &dyn Fn(Metric) -> Result<f64>,
    fallback_alpha: &dyn Fn() -> Result<f64>,
) -> Result<ConfiguredBound> {
    let theorem = spec.theorem()?;
    let metric = bound_metric(theorem, spec.q).ok_or_else(|| Error::Config("missing q".into()))?;
    let alpha = || -> Result<f64> {
        match spec.alpha.or_else(|| cfg.derived_alpha(theorem, f)) {
            Some(a) => Ok(a),
            None => fallback_alpha(),
        }
    };
    let d0 = initial(metric)?;
    let q = spec.q.unwrap_or(1.0);
    let bound = match theorem {
        Theorem::Slc => RateBound::Slc {
            w2_0: d0,
            alpha: alpha()?,
            eta,
        },
        Theorem::Lc => RateBound::Lc {
            w2_0: initial(Metric::W2)?,
            h_0: if spec.refined { Some(d0) } else { None },
            eta,
        },
        Theorem::LsiKl => RateBound::LsiKl {
            h_0: d0,
            alpha: alpha()?,
            eta,
        },
        Theorem::LsiRenyi => RateBound::LsiRenyi {
            r_0: d0,
            alpha: alpha()?,
            eta,
            q,
        },
        Theorem::PiChi2 => RateBound::PiChi2 {
            chi2_0: d0,
            alpha: alpha()?,
            eta,
        },
        Theorem::PiRenyi => RateBound::PiRenyi {
            r_0: d0,
            alpha: alpha()?,
            eta,
            q,
        },
        Theorem::Loi => RateBound::Loi {
            r_0: d0,
            alpha: alpha()?,
            eta,
            q,
            r: spec.r.unwrap_or(1.0),
            loi_constant: spec.loi_constant.unwrap_or(LOI_CONSTANT_STATED),
        },
        Theorem::EpsGeneralized => RateBound::EpsGeneralized {
            h_0: d0,
            alpha: alpha()?,
            eta,
        },
    };
    Ok(ConfiguredBound { metric, bound })
}

/// Rows for one state of a divergence experiment.
fn state_rows(
    k: u64,
    metrics: &[Metric],
    bounds: &[ConfiguredBound],
    suffix: &str,
    scalar: &dyn Fn(Metric) -> Result<f64>,
    vector: &dyn Fn(Metric) -> Vec<f64>,
) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for &m in metrics {
        if matches!(m, Metric::Mean | Metric::Var) {
            for (j, v) in vector(m).into_iter().enumerate() {
                rows.push(ReportRow::metric_only(k, format!("{m}[{j}]{suffix}"), v));
            }
            continue;
        }
        let value = scalar(m)?;
        let name = format!("{m}{suffix}");
        let mut paired = false;
        for b in bounds.iter().filter(|b| b.metric == m) {
            // LC without an initial KL says nothing at k = 0.
            let bv = match b.bound.evaluate(k) {
                Err(Error::UndefinedBound(_)) => continue,
                other => other?,
            };
            rows.push(ReportRow::with_bound(k, name.clone(), value, b.bound.theorem().as_str(), bv));
            paired = true;
        }
        if !paired {
            rows.push(ReportRow::metric_only(k, name, value));
        }
    }
    Ok(rows)
}

fn gaussian_target(cfg: &ExperimentConfig) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        cfg.potential.params.len(),
        cfg.potential.params.iter().map(|p| 1.0 / p),
    ))
}

/// The initial Gaussian; `init.variance` is scaled by `variance_scale`.
fn gaussian_init(cfg: &ExperimentConfig, variance_scale: f64) -> Result<GaussianState> {
    match cfg.init_law()? {
        InitLaw::Gaussian { mean, variance } => {
            let v: Vec<f64> = variance.iter().map(|x| x * variance_scale).collect();
            GaussianState::diagonal(&mean, &v)
        }
        InitLaw::Point(_) => Err(Error::Validation("a Gaussian initial law is required".into())),
    }
}

fn gaussian_scalar(s: &GaussianState, target: &GaussianState, m: Metric) -> Result<f64> {
    match m {
        Metric::Kl => kl_gauss(s, target),
        Metric::Chi2 => chi2_gauss(s, target),
        Metric::Renyi(q) => renyi_gauss(q, s, target),
        Metric::W2 => w2_gauss(s, target),
        Metric::VarErr => Ok((&s.cov - &target.cov).abs().max()),
        other => Err(Error::Validation(format!("{other} is not a Gaussian metric"))),
    }
}

fn gaussian_vector(s: &GaussianState, m: Metric) -> Vec<f64> {
    match m {
        Metric::Mean => s.mean.iter().copied().collect(),
        _ => s.cov.diagonal().iter().copied().collect(),
    }
}

/// Closed-form trajectory for the entropy-`eps` sampler with Gaussian target.
fn gaussian_trajectory(
    cfg: &ExperimentConfig,
    eta: f64,
    eps: f64,
    variance_scale: f64,
) -> Result<(GaussianState, Vec<GaussianState>)> {
    let sigma = gaussian_target(cfg);
    let d = sigma.nrows();
    let target = GaussianState::new(nalgebra::DVector::zeros(d), &sigma * eps)?;
    let mut states = vec![gaussian_init(cfg, variance_scale)?];
    for _ in 0..cfg.sampler.iterations {
        let next = gaussian_step_entropic(states.last().expect("non-empty"), &sigma, eta, eps)?;
        states.push(next);
    }
    Ok((target, states))
}

fn no_fallback() -> Result<f64> {
    Err(Error::Validation("alpha is not derivable for this bound".into()))
}

fn gaussian_rows(
    cfg: &ExperimentConfig,
    f: &PotentialRef,
    eta: f64,
    eps: f64,
    variance_scale: f64,
    suffix: &str,
) -> Result<(Vec<ReportRow>, Vec<GaussianState>, GaussianState)> {
    let (target, states) = gaussian_trajectory(cfg, eta, eps, variance_scale)?;
    let bounds = configure_bounds(
        cfg,
        f,
        eta,
        &|m| gaussian_scalar(&states[0], &target, m),
        &no_fallback,
    )?;
    let mut rows = Vec::new();
    for (k, s) in states.iter().enumerate() {
        rows.extend(state_rows(
            k as u64,
            &cfg.metrics,
            &bounds,
            suffix,
            &|m| gaussian_scalar(s, &target, m),
            &|m| gaussian_vector(s, m),
        )?);
    }
    Ok((rows, states, target))
}

fn gaussian_exact(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let f = cfg.potential()?;
    let eps = match cfg.entropy()? {
        Entropy::Level(e) => e,
        Entropy::Limit => return Err(Error::Validation("gaussian_exact needs a positive eps".into())),
    };
    Ok(gaussian_rows(cfg, &f, cfg.eta()?, eps, 1.0, "")?.0)
}

fn eps_limit(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let f = cfg.potential()?;
    let eta = cfg.eta()?;
    let k_max = cfg.sampler.iterations;
    let factor_alpha = cfg
        .bounds
        .iter()
        .find(|b| b.theorem().ok() == Some(Theorem::EpsGeneralized))
        .map(|b| b.alpha.or_else(|| cfg.derived_alpha(Theorem::EpsGeneralized, &f)));
    let mut rows = Vec::new();
    for eps in cfg.eps_levels()? {
        let suffix = format!("[eps={eps}]");
        // The initial covariance is given in units of ε, so every level starts
        // from the same law relative to its own target N(0, εΣ).
        let (level_rows, states, target) = gaussian_rows(cfg, &f, eta, eps, eps, &suffix)?;
        rows.extend(level_rows);
        if !cfg.metrics.contains(&Metric::Kl) || k_max == 0 {
            continue;
        }
        // Geometric-mean per-step contraction of KL over the whole run.
        let kl_0 = kl_gauss(&states[0], &target)?;
        let kl_k = kl_gauss(&states[k_max], &target)?;
        if kl_0 <= 0.0 {
            continue;
        }
        let fitted = (kl_k / kl_0).powf(1.0 / k_max as f64);
        let name = format!("KL_FACTOR{suffix}");
        rows.push(match factor_alpha.flatten() {
            Some(alpha) => ReportRow::with_bound(
                k_max as u64,
                name,
                fitted,
                Theorem::EpsGeneralized.as_str(),
                bound_eps_generalized(1.0, alpha, eta, 1)?,
            ),
            None => ReportRow::metric_only(k_max as u64, name, fitted),
        });
    }
    Ok(rows)
}

fn grid_scalar(rho: &GridDensity, pi: &GridDensity, m: Metric) -> Result<f64> {
    match m {
        Metric::Kl => divergence_grid(DivergenceKind::Kl, rho, pi),
        Metric::Chi2 => divergence_grid(DivergenceKind::Chi2, rho, pi),
        Metric::Renyi(q) => divergence_grid(DivergenceKind::Renyi(q), rho, pi),
        Metric::W2 => w2_grid_1d(rho, pi),
        other => Err(Error::Validation(format!("{other} is not a grid metric"))),
    }
}

fn density(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let f = cfg.potential()?;
    let eta = cfg.eta()?;
    let eps = match cfg.entropy()? {
        Entropy::Level(e) => e,
        Entropy::Limit => return Err(Error::Validation("density1d needs a positive eps".into())),
    };
    let g = cfg.grid();
    let pi = grid_from_scaled_potential(f.as_ref(), eps, g.lo, g.hi, g.n)?;
    let (mean, var) = match cfg.init_law()? {
        InitLaw::Gaussian { mean, variance } => (mean[0], variance[0]),
        InitLaw::Point(_) => return Err(Error::Validation("density1d needs a Gaussian initial law".into())),
    };
    let mut states = vec![GridDensity::gaussian(g.lo, g.hi, g.n, mean, var)?];
    for _ in 0..cfg.sampler.iterations {
        let next = density_iteration(states.last().expect("non-empty"), f.as_ref(), eta, eps)?;
        states.push(next);
    }
    // The spectral gap of exp(−f/ε) pairs with step εη; rescale to pair with η.
    let poincare = || poincare_estimate(&pi).map(|a| a * eps);
    let bounds = configure_bounds(cfg, &f, eta, &|m| grid_scalar(&states[0], &pi, m), &poincare)?;
    let mut rows = Vec::new();
    for (k, rho) in states.iter().enumerate() {
        rows.extend(state_rows(
            k as u64,
            &cfg.metrics,
            &bounds,
            "",
            &|m| grid_scalar(rho, &pi, m),
            &|m| match m {
                Metric::Mean => vec![rho.mean()],
                _ => vec![rho.variance()],
            },
        )?);
    }
    Ok(rows)
}

fn mc_sampler(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let f = cfg.potential()?;
    let scfg = cfg.sampler_config()?;
    let init = match cfg.init_law()? {
        InitLaw::Gaussian { mean, variance } => ChainEnsemble::sample_gaussian(
            &GaussianState::diagonal(&mean, &variance)?,
            scfg.chains,
            &mut chain_rng(scfg.seed, INIT_STREAM),
        )?,
        InitLaw::Point(p) => ChainEnsemble::dirac(&p, scfg.chains)?,
    };
    let trajectory = run(&f, &init, &scfg)?;
    let mut rows = Vec::new();
    for (k, snap) in trajectory.iter().enumerate() {
        let k = k as u64;
        for &m in &cfg.metrics {
            match m {
                Metric::Mean | Metric::Var => {
                    let v = if m == Metric::Mean { snap.mean() } else { snap.variance() };
                    for (j, x) in v.into_iter().enumerate() {
                        rows.push(ReportRow::metric_only(k, format!("{m}[{j}]"), x));
                    }
                }
                Metric::Trials if k > 0 => {
                    let prev = &trajectory[k as usize - 1].rgo_stats;
                    let calls = snap.rgo_stats.calls - prev.calls;
                    if calls > 0 {
                        let trials = snap.rgo_stats.total_trials - prev.total_trials;
                        rows.push(ReportRow::metric_only(k, m.to_string(), trials as f64 / calls as f64));
                    }
                }
                _ => {}
            }
        }
    }
    Ok(rows)
}

fn prox_point(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let f = cfg.potential()?;
    let x0 = match cfg.init_law()? {
        InitLaw::Point(p) => p,
        InitLaw::Gaussian { .. } => return Err(Error::Validation("prox_point starts from a point".into())),
    };
    let tr = prox_point_run(&f, cfg.eta()?, &x0, cfg.sampler.iterations)?;
    let f_star = f.min_value();
    let mut rows = Vec::new();
    for k in 0..tr.values.len() {
        for &m in &cfg.metrics {
            let value = match m {
                Metric::F => tr.values[k],
                Metric::FGap => tr.values[k] - f_star.unwrap_or(f64::NAN),
                Metric::Residual => tr.residuals[k],
                _ => continue,
            };
            rows.push(ReportRow::metric_only(k as u64, m.to_string(), value));
        }
    }
    Ok(rows)
}
