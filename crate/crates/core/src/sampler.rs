//! Ensembles of independent proximal-sampler chains.
//!
//! One iteration is a forward step `y = x + √(εη) ξ` followed by a backward
//! step `x' ~ π_ε^{X|Y}(· | y)` drawn by the restricted Gaussian oracle. In
//! the deterministic limit the forward step is the identity and the backward
//! step is the proximal map, so the ensemble runs the proximal point method
//! from many starting points at once.
//!
//! Every chain owns a ChaCha stream selected by `(seed, chain index)`, so
//! parallel and serial execution produce the same trajectory bit for bit.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{cholesky, GaussianState};
use crate::potential::PotentialRef;
use crate::proxopt::{prox, DEFAULT_PROX_TOL};
use crate::rgo::{rgo_sample, RgoOptions, RgoStats};

/// Largest number of stored coordinates (`N · d · (K + 1)`) in a trajectory.
pub const MAX_TRAJECTORY_ENTRIES: usize = 100_000_000;

/// Entropy level of the backward step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entropy {
    /// Sample `exp(−(f + ‖·−y‖²/(2η))/ε)` with noise `εη` in the forward step.
    Level(f64),
    /// The `ε → 0` limit: no forward noise, backward step is `prox_{ηf}`.
    Limit,
}

impl Default for Entropy {
    fn default() -> Self {
        Entropy::Level(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub eta: f64,
    pub eps: Entropy,
    pub iterations: usize,
    pub chains: usize,
    pub seed: u64,
    pub rgo: RgoOptions,
}

impl SamplerConfig {
    pub fn new(eta: f64, iterations: usize, chains: usize, seed: u64) -> Self {
        SamplerConfig {
            eta,
            eps: Entropy::default(),
            iterations,
            chains,
            seed,
            rgo: RgoOptions::default(),
        }
    }

    pub fn with_eps(mut self, eps: Entropy) -> Self {
        self.eps = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Validation(format!("eta must be positive, got {}", self.eta)));
        }
        if let Entropy::Level(e) = self.eps {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::Validation(format!(
                    "eps must be positive (use the limit flag for eps = 0), got {e}"
                )));
            }
        }
        if self.chains == 0 {
            return Err(Error::Validation("at least one chain is required".into()));
        }
        Ok(())
    }

    /// Forward-step variance `εη`, zero in the limit.
    pub fn noise_variance(&self) -> f64 {
        match self.eps {
            Entropy::Level(e) => e * self.eta,
            Entropy::Limit => 0.0,
        }
    }
}

/// The RNG stream owned by one chain.
pub fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

/// One stream per chain, in chain order.
pub fn chain_rngs(seed: u64, chains: usize) -> Vec<ChaCha8Rng> {
    (0..chains).map(|c| chain_rng(seed, c)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainEnsemble {
    pub positions: Vec<Vec<f64>>,
    pub iteration: usize,
    pub rgo_stats: RgoStats,
}

impl ChainEnsemble {
    pub fn new(positions: Vec<Vec<f64>>) -> Result<Self> {
        let d = positions
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::Validation("an ensemble needs at least one chain".into()))?;
        if d == 0 {
            return Err(Error::Validation("positions must have positive dimension".into()));
        }
        for (i, p) in positions.iter().enumerate() {
            if p.len() != d {
                return Err(Error::Validation(format!(
                    "chain {i} has dimension {} but chain 0 has dimension {d}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("chain {i} has a non-finite coordinate")));
            }
        }
        Ok(ChainEnsemble {
            positions,
            iteration: 0,
            rgo_stats: RgoStats::default(),
        })
    }

    /// `n` chains all started at `x`.
    pub fn dirac(x: &[f64], n: usize) -> Result<Self> {
        Self::new(vec![x.to_vec(); n])
    }

    /// `n` independent draws from a Gaussian state.
    pub fn sample_gaussian<R: Rng + ?Sized>(s: &GaussianState, n: usize, rng: &mut R) -> Result<Self> {
        let l = cholesky(&s.cov)?.l();
        let d = s.dim();
        let mut positions = Vec::with_capacity(n);
        let mut xi = nalgebra::DVector::zeros(d);
        for _ in 0..n {
            for v in xi.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let x = &s.mean + &l * &xi;
            positions.push(x.iter().copied().collect());
        }
        Self::new(positions)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.positions.first().map_or(0, Vec::len)
    }

    /// Per-coordinate sample mean.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut m = vec![0.0; self.dim()];
        for p in &self.positions {
            for (mi, pi) in m.iter_mut().zip(p) {
                *mi += pi;
            }
        }
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    /// Per-coordinate unbiased sample variance.
    pub fn variance(&self) -> Vec<f64> {
        let m = self.mean();
        let n = self.len() as f64;
        let mut v = vec![0.0; self.dim()];
        for p in &self.positions {
            for ((vi, pi), mi) in v.iter_mut().zip(p).zip(&m) {
                *vi += (pi - mi).powi(2);
            }
        }
        v.iter_mut().for_each(|x| *x /= (n - 1.0).max(1.0));
        v
    }

    /// Values of coordinate `j` across chains.
    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.positions.iter().map(|p| p[j]).collect()
    }
}

/// `y_i = x_i + √(εη) ξ_i`, drawing `ξ_i` from chain `i`'s stream.
pub fn forward_step(ens: &ChainEnsemble, cfg: &SamplerConfig, rngs: &mut [ChaCha8Rng]) -> Vec<Vec<f64>> {
    let sd = cfg.noise_variance().sqrt();
    if sd == 0.0 {
        return ens.positions.clone();
    }
    ens.positions
        .par_iter()
        .zip(rngs.par_iter_mut())
        .map(|(x, rng)| {
            x.iter()
                .map(|xi| {
                    let z: f64 = rng.sample(StandardNormal);
                    xi + sd * z
                })
                .collect()
        })
        .collect()
}

/// Advance every chain through the backward step. The returned ensemble's
/// iteration is `iteration + 1` and its statistics cover this step only.
pub fn backward_step(
    ys: &[Vec<f64>],
    f: &PotentialRef,
    cfg: &SamplerConfig,
    iteration: usize,
    rngs: &mut [ChaCha8Rng],
) -> Result<ChainEnsemble> {
    let results: Vec<Result<(Vec<f64>, RgoStats)>> = ys
        .par_iter()
        .zip(rngs.par_iter_mut())
        .enumerate()
        .map(|(index, (y, rng))| {
            let mut stats = RgoStats::default();
            let x = match cfg.eps {
                Entropy::Level(eps) => rgo_sample(f, y, cfg.eta, eps, rng, &mut stats, &cfg.rgo),
                Entropy::Limit => prox(f, cfg.eta, y, DEFAULT_PROX_TOL),
            }
            .map_err(|e| Error::Chain {
                index,
                source: Box::new(e),
            })?;
            Ok((x, stats))
        })
        .collect();
    let mut positions = Vec::with_capacity(ys.len());
    let mut rgo_stats = RgoStats::default();
    for r in results {
        let (x, s) = r?;
        rgo_stats.merge(&s);
        positions.push(x);
    }
    Ok(ChainEnsemble {
        positions,
        iteration: iteration + 1,
        rgo_stats,
    })
}

/// Run `cfg.iterations` forward/backward pairs from `init`, recording the
/// ensemble after every backward step. Snapshot `k` carries the cumulative
/// oracle statistics up to iteration `k`.
pub fn run(f: &PotentialRef, init: &ChainEnsemble, cfg: &SamplerConfig) -> Result<Vec<ChainEnsemble>> {
    cfg.validate()?;
    if init.dim() != f.dim() {
        return Err(Error::Validation(format!(
            "initial positions have dimension {} but {} has dimension {}",
            init.dim(),
            f.name(),
            f.dim()
        )));
    }
    if init.len() != cfg.chains {
        return Err(Error::Validation(format!(
            "initial ensemble has {} chains but the configuration asks for {}",
            init.len(),
            cfg.chains
        )));
    }
    let entries = (cfg.chains as u128) * (f.dim() as u128) * (cfg.iterations as u128 + 1);
    if entries > MAX_TRAJECTORY_ENTRIES as u128 {
        return Err(Error::Validation(format!(
            "trajectory would store {entries} coordinates, above the limit of {MAX_TRAJECTORY_ENTRIES}"
        )));
    }

    let mut rngs = chain_rngs(cfg.seed, cfg.chains);
    let mut trajectory = Vec::with_capacity(cfg.iterations + 1);
    trajectory.push(init.clone());
    for _ in 0..cfg.iterations {
        let current = trajectory.last().expect("non-empty");
        let ys = forward_step(current, cfg, &mut rngs);
        let mut next = backward_step(&ys, f, cfg, current.iteration, &mut rngs)?;
        let mut cumulative = current.rgo_stats;
        cumulative.merge(&next.rgo_stats);
        next.rgo_stats = cumulative;
        trajectory.push(next);
    }
    Ok(trajectory)
}

/// Trajectory as CSV with columns `iteration,chain,coord,value`.
pub fn write_trajectory_csv<W: Write>(out: &mut W, trajectory: &[ChainEnsemble]) -> std::io::Result<()> {
    writeln!(out, "iteration,chain,coord,value")?;
    for snap in trajectory {
        for (c, p) in snap.positions.iter().enumerate() {
            for (j, v) in p.iter().enumerate() {
                writeln!(out, "{},{c},{j},{v:.16e}", snap.iteration)?;
            }
        }
    }
    Ok(())
}

/// 1-D Wasserstein-2 distance between two equal-size samples via the sorted
/// coupling.
pub fn empirical_w2_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Validation(format!(
            "sorted coupling needs equal non-empty samples, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let s: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum();
    Ok((s / a.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::builtin;

    fn within_se(samples: &[f64], expected: f64, k: f64) -> bool {
        let n = samples.len() as f64;
        let m = samples.iter().sum::<f64>() / n;
        let v = samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m - expected).abs() <= k * (v / n).sqrt()
    }

    fn variance_within_se(samples: &[f64], expected: f64, k: f64) -> bool {
        // Standard error of the sample variance from the fourth central moment.
        let n = samples.len() as f64;
        let m = samples.iter().sum::<f64>() / n;
        let v = samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        let m4 = samples.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
        let se = ((m4 - v * v * (n - 3.0) / (n - 1.0)) / n).sqrt();
        (v - expected).abs() <= k * se
    }

    #[test]
    fn forward_limit_is_identity() {
        let ens = ChainEnsemble::dirac(&[1.5, -2.0], 4).unwrap();
        let cfg = SamplerConfig::new(1.0, 1, 4, 0).with_eps(Entropy::Limit);
        let mut rngs = chain_rngs(0, 4);
        assert_eq!(forward_step(&ens, &cfg, &mut rngs), ens.positions);
    }

    #[test]
    fn forward_variance_matches_eps_eta() {
        let n = 100_000;
        let ens = ChainEnsemble::dirac(&[0.0], n).unwrap();
        let cfg = SamplerConfig::new(1.0, 1, n, 11);
        let ys = forward_step(&ens, &cfg, &mut chain_rngs(11, n));
        let col: Vec<f64> = ys.iter().map(|y| y[0]).collect();
        let m = col.iter().sum::<f64>() / n as f64;
        let v = col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((v - 1.0).abs() <= 3.0 * (2.0 / n as f64).sqrt(), "variance {v}");

        let ens = ChainEnsemble::dirac(&[5.0], n).unwrap();
        let cfg = SamplerConfig::new(0.25, 1, n, 12).with_eps(Entropy::Level(4.0));
        let ys = forward_step(&ens, &cfg, &mut chain_rngs(12, n));
        let col: Vec<f64> = ys.iter().map(|y| y[0]).collect();
        assert!(within_se(&col, 5.0, 3.0));
        assert!(variance_within_se(&col, 1.0, 3.0));
    }

    #[test]
    fn backward_gaussian_conditional() {
        let n = 100_000;
        let f = builtin("quadratic", &[1.0]).unwrap();
        let cfg = SamplerConfig::new(1.0, 1, n, 5);
        let ys = vec![vec![2.0]; n];
        let out = backward_step(&ys, &f, &cfg, 0, &mut chain_rngs(5, n)).unwrap();
        assert_eq!(out.iteration, 1);
        let col = out.coordinate(0);
        assert!(within_se(&col, 1.0, 3.0));
        assert!(variance_within_se(&col, 0.5, 3.0));
    }

    #[test]
    fn backward_limit_is_prox() {
        let f = builtin("abs_1d", &[]).unwrap();
        let cfg = SamplerConfig::new(1.0, 1, 3, 0).with_eps(Entropy::Limit);
        let ys = vec![vec![3.0], vec![0.5], vec![-2.0]];
        let out = backward_step(&ys, &f, &cfg, 7, &mut chain_rngs(0, 3)).unwrap();
        assert_eq!(out.positions, vec![vec![2.0], vec![0.0], vec![-1.0]]);
        assert_eq!(out.iteration, 8);
    }

    #[test]
    fn backward_abs_matches_quadrature_mean() {
        let eta = 1.0 / 16.0;
        let dens = |x: f64| (-x.abs() - (x - 3.0).powi(2) / (2.0 * eta)).exp();
        let (lo, hi, m) = (-2.0, 8.0, 200_001);
        let h = (hi - lo) / (m - 1) as f64;
        let (mut z, mut s) = (0.0, 0.0);
        for i in 0..m {
            let x = lo + i as f64 * h;
            let w = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
            z += w * dens(x);
            s += w * x * dens(x);
        }
        let expected = s / z;

        let n = 50_000;
        let f = builtin("abs_1d", &[]).unwrap();
        let cfg = SamplerConfig::new(eta, 1, n, 21);
        let out = backward_step(&vec![vec![3.0]; n], &f, &cfg, 0, &mut chain_rngs(21, n)).unwrap();
        assert!(within_se(&out.coordinate(0), expected, 3.0));
    }

    #[test]
    fn errors_carry_chain_index() {
        let f = builtin("quadratic", &[1.0]).unwrap();
        let mut cfg = SamplerConfig::new(1.0, 1, 2, 0);
        cfg.rgo.max_trials = 0;
        let err = backward_step(&[vec![0.0], vec![1.0]], &f, &cfg, 0, &mut chain_rngs(0, 2)).unwrap_err();
        assert!(matches!(err, Error::Chain { index: 0, .. }), "{err:?}");
    }

    #[test]
    fn zero_iterations_returns_init() {
        let f = builtin("quadratic", &[1.0]).unwrap();
        let init = ChainEnsemble::dirac(&[0.3], 5).unwrap();
        let traj = run(&f, &init, &SamplerConfig::new(1.0, 0, 5, 0)).unwrap();
        assert_eq!(traj, vec![init]);
    }

    #[test]
    fn run_is_seed_deterministic() {
        let f = builtin("quartic_plus_quadratic_d", &[2.0]).unwrap();
        let init = ChainEnsemble::dirac(&[1.0, -1.0], 64).unwrap();
        let cfg = SamplerConfig::new(0.05, 4, 64, 99);
        let a = run(&f, &init, &cfg).unwrap();
        let b = run(&f, &init, &cfg).unwrap();
        assert_eq!(a, b);
        let c = run(&f, &init, &SamplerConfig { seed: 100, ..cfg }).unwrap();
        assert_ne!(a.last().unwrap().positions, c.last().unwrap().positions);
    }

    #[test]
    fn parallel_equals_serial() {
        let f = builtin("quadratic", &[1.0, 2.0]).unwrap();
        let init = ChainEnsemble::dirac(&[1.0, 1.0], 32).unwrap();
        let cfg = SamplerConfig::new(0.5, 3, 32, 3);
        let par = run(&f, &init, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let ser = pool.install(|| run(&f, &init, &cfg)).unwrap();
        assert_eq!(par, ser);
    }

    #[test]
    fn memory_guard_and_validation() {
        let f = builtin("quadratic", &[1.0]).unwrap();
        let init = ChainEnsemble::dirac(&[0.0], 1).unwrap();
        let cfg = SamplerConfig::new(1.0, MAX_TRAJECTORY_ENTRIES, 1, 0);
        assert!(run(&f, &init, &cfg).unwrap_err().is_validation());
        let cfg = SamplerConfig::new(-1.0, 1, 1, 0);
        assert!(run(&f, &init, &cfg).unwrap_err().is_validation());
        let cfg = SamplerConfig::new(1.0, 1, 1, 0).with_eps(Entropy::Level(0.0));
        assert!(run(&f, &init, &cfg).unwrap_err().is_validation());
        assert!(ChainEnsemble::new(vec![vec![f64::NAN]]).is_err());
    }

    #[test]
    fn stationarity_from_exact_samples() {
        let n = 100_000;
        let f = builtin("quadratic", &[1.0]).unwrap();
        let target = GaussianState::scalar(0.0, 1.0).unwrap();
        let init = ChainEnsemble::sample_gaussian(&target, n, &mut chain_rng(1234, usize::MAX)).unwrap();
        let traj = run(&f, &init, &SamplerConfig::new(1.0, 5, n, 8)).unwrap();
        let col = traj[5].coordinate(0);
        assert!(within_se(&col, 0.0, 3.0));
        assert!(variance_within_se(&col, 1.0, 3.0));
    }

    #[test]
    fn trajectory_csv_layout() {
        let ens = ChainEnsemble::dirac(&[1.0, 2.0], 2).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &[ens]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iteration,chain,coord,value");
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("0,1,1,"));
    }

    #[test]
    fn empirical_w2_shift() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let b: Vec<f64> = a.iter().rev().map(|x| x + 2.0).collect();
        assert!((empirical_w2_1d(&a, &b).unwrap() - 2.0).abs() < 1e-12);
    }
}
