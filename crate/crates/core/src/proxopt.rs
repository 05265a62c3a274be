//! Proximal point method, Moreau envelope and executable checks of the
//! proximal-map contraction properties.

use crate::error::{Error, Result};
use crate::potential::{composite, Potential, PotentialRef, RegularityInfo};
use crate::rgo::{inner_minimize, DEFAULT_MAX_INNER_ITERATIONS};

pub const DEFAULT_PROX_TOL: f64 = 1e-12;
const GLOBAL_GRID: usize = 20_001;

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Hides the closed-form minimizer of a composite so the numeric path runs.
#[derive(Debug)]
struct Numeric<'a>(&'a dyn Potential);

impl Potential for Numeric<'_> {
    fn name(&self) -> String {
        self.0.name()
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x)
    }
    fn grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.0.grad(x)
    }
    fn is_smooth(&self) -> bool {
        self.0.is_smooth()
    }
    fn regularity(&self) -> &RegularityInfo {
        self.0.regularity()
    }
}

/// `prox_{ηf}(y) = argmin_x f(x) + ‖x − y‖²/(2η)`.
///
/// Closed form when available; gradient descent when the proximal objective
/// is strongly convex and smooth; otherwise, in one dimension, a global grid
/// search refined by bisection on the derivative. An argmin that is not
/// unique is an error.
pub fn prox(f: &PotentialRef, eta: f64, y: &[f64], tol: f64) -> Result<Vec<f64>> {
    if let Some(x) = f.analytic_prox(eta, y) {
        if y.len() != f.dim() {
            return Err(Error::Validation("prox center has the wrong dimension".into()));
        }
        return Ok(x);
    }
    prox_numeric(f, eta, y, tol)
}

/// [`prox`] without the closed-form shortcut.
pub fn prox_numeric(f: &PotentialRef, eta: f64, y: &[f64], tol: f64) -> Result<Vec<f64>> {
    let ft = composite(f.clone(), y, eta, 1.0)?;
    let convex = ft.regularity().alpha_strong_convexity.is_some();
    if convex && ft.is_smooth() && f.grad(y).is_some() {
        let (x, _) = inner_minimize(&Numeric(&ft), y, tol, DEFAULT_MAX_INNER_ITERATIONS)?;
        return Ok(x);
    }
    if f.dim() == 1 {
        return global_prox_1d(f, eta, y[0]).map(|x| vec![x]);
    }
    Err(Error::Validation(format!(
        "prox of {} with eta = {eta} is not a strongly convex problem",
        f.name()
    )))
}

fn global_prox_1d(f: &PotentialRef, eta: f64, y: f64) -> Result<f64> {
    let fstar = f.min_value().ok_or_else(|| {
        Error::Capability(format!(
            "global prox search for {} needs a known minimum value",
            f.name()
        ))
    })?;
    let obj = |z: f64| f.value(&[z]) + (z - y) * (z - y) / (2.0 * eta);
    // Any minimizer z has (z − y)²/(2η) ≤ f(y) − f*.
    let radius = (2.0 * eta * (f.value(&[y]) - fstar).max(0.0)).sqrt() * 1.01 + 1e-9;
    let n = GLOBAL_GRID;
    let h = 2.0 * radius / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| y - radius + h * i as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&z| obj(z)).collect();

    let mut candidates = Vec::new();
    for i in 0..n {
        let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
        let right = if i == n - 1 { f64::INFINITY } else { vals[i + 1] };
        if vals[i] <= left && vals[i] <= right {
            candidates.push(i);
        }
    }
    let mut refined: Vec<(f64, f64)> = candidates
        .into_iter()
        .map(|i| {
            let lo = grid[i.saturating_sub(1)];
            let hi = grid[(i + 1).min(n - 1)];
            let z = refine_1d(f, eta, y, lo, hi);
            (z, obj(z))
        })
        .collect();
    refined.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (best_z, best_v) = refined[0];
    for &(z, v) in &refined[1..] {
        if (z - best_z).abs() > 2.0 * h && (v - best_v).abs() <= 1e-10 * (1.0 + best_v.abs()) {
            return Err(Error::Validation(format!(
                "prox of {} at y = {y} with eta = {eta} is not unique ({best_z} and {z})",
                f.name()
            )));
        }
    }
    Ok(best_z)
}

/// Bisection on the derivative when it changes sign on `[lo, hi]`, golden
/// section otherwise.
fn refine_1d(f: &PotentialRef, eta: f64, y: f64, mut lo: f64, mut hi: f64) -> f64 {
    let obj = |z: f64| f.value(&[z]) + (z - y) * (z - y) / (2.0 * eta);
    let deriv = |z: f64| f.grad(&[z]).map(|g| g[0] + (z - y) / eta);
    if f.is_smooth() {
        if let (Some(dl), Some(dh)) = (deriv(lo), deriv(hi)) {
            if dl <= 0.0 && dh >= 0.0 {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if deriv(mid).expect("smooth") < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (obj(a), obj(b));
    for _ in 0..200 {
        if hi - lo <= 1e-15 * (1.0 + lo.abs()) {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = obj(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = obj(b);
        }
    }
    let mid = 0.5 * (lo + hi);
    [lo, mid, hi]
        .into_iter()
        .min_by(|p, q| obj(*p).total_cmp(&obj(*q)))
        .expect("non-empty")
}

/// Iterates, objective values and stationarity residuals of the proximal
/// point method.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxTrajectory {
    pub iterates: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// `‖∇f(x_{k+1}) + (x_{k+1} − x_k)/η‖`; zero for closed-form steps and
    /// at `k = 0`.
    pub residuals: Vec<f64>,
}

impl ProxTrajectory {
    /// CSV with header `k,x0,…,x{d-1},f,residual`.
    pub fn to_csv(&self) -> String {
        let d = self.iterates.first().map_or(0, Vec::len);
        let mut out = String::from("k");
        for j in 0..d {
            out.push_str(&format!(",x{j}"));
        }
        out.push_str(",f,residual\n");
        for (k, ((x, v), r)) in self.iterates.iter().zip(&self.values).zip(&self.residuals).enumerate() {
            out.push_str(&k.to_string());
            for xi in x {
                out.push_str(&format!(",{xi:.16e}"));
            }
            out.push_str(&format!(",{v:.16e},{r:.16e}\n"));
        }
        out
    }
}

pub fn prox_point_run(f: &PotentialRef, eta: f64, x0: &[f64], iterations: usize) -> Result<ProxTrajectory> {
    if x0.len() != f.dim() {
        return Err(Error::Validation(format!(
            "x0 has dimension {} but the potential has dimension {}",
            x0.len(),
            f.dim()
        )));
    }
    let mut iterates = vec![x0.to_vec()];
    let mut values = vec![f.value(x0)];
    let mut residuals = vec![0.0];
    for _ in 0..iterations {
        let prev = iterates.last().expect("non-empty");
        let analytic = f.analytic_prox(eta, prev).is_some();
        let next = prox(f, eta, prev, DEFAULT_PROX_TOL)?;
        let residual = if analytic || !f.is_smooth() {
            0.0
        } else {
            match f.grad(&next) {
                Some(g) => g
                    .iter()
                    .zip(next.iter().zip(prev))
                    .map(|(gi, (n, p))| (gi + (n - p) / eta).powi(2))
                    .sum::<f64>()
                    .sqrt(),
                None => 0.0,
            }
        };
        values.push(f.value(&next));
        residuals.push(residual);
        iterates.push(next);
    }
    Ok(ProxTrajectory {
        iterates,
        values,
        residuals,
    })
}

/// `min_z f(z) + ‖z − x‖²/(2t)`.
pub fn moreau_envelope(f: &PotentialRef, t: f64, x: &[f64]) -> Result<f64> {
    let xt = prox(f, t, x, DEFAULT_PROX_TOL)?;
    Ok(f.value(&xt) + dist_sq(&xt, x) / (2.0 * t))
}

/// Outcome of a contraction check: the measured ratio, the bound it is
/// compared against, and whether `ratio ≤ bound + 1e-9`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionCheck {
    pub ratio: f64,
    pub bound: f64,
    pub passed: bool,
}

const CHECK_SLACK: f64 = 1e-9;

/// `(f(x') − f*)/(f(x) − f*)` with `x' = prox_{ηf}(x)`, against
/// `(1 + αη)^{-2}` for the declared PL constant `α`.
pub fn pl_contraction_check(f: &PotentialRef, eta: f64, x: &[f64]) -> Result<ContractionCheck> {
    let alpha = f.regularity().pl_alpha.ok_or_else(|| {
        Error::Capability(format!("{} declares no PL constant", f.name()))
    })?;
    let fstar = f
        .min_value()
        .ok_or_else(|| Error::Capability(format!("{} has no known minimum", f.name())))?;
    let gap = f.value(x) - fstar;
    if gap <= 0.0 {
        return Err(Error::UndefinedRatio("f(x) equals the minimum value".into()));
    }
    let xp = prox(f, eta, x, DEFAULT_PROX_TOL)?;
    let ratio = (f.value(&xp) - fstar) / gap;
    let bound = (1.0 + alpha * eta).powi(-2);
    Ok(ContractionCheck {
        ratio,
        bound,
        passed: ratio <= bound + CHECK_SLACK,
    })
}

/// `‖prox(x) − prox(y)‖/‖x − y‖` against `1/(1 + αη)`.
pub fn prox_contraction_check(f: &PotentialRef, eta: f64, x: &[f64], y: &[f64]) -> Result<ContractionCheck> {
    let alpha = f.regularity().alpha_strong_convexity.ok_or_else(|| {
        Error::Capability(format!("{} declares no convexity constant", f.name()))
    })?;
    let denom = dist_sq(x, y).sqrt();
    if denom == 0.0 {
        return Err(Error::UndefinedRatio("x and y coincide".into()));
    }
    let px = prox(f, eta, x, DEFAULT_PROX_TOL)?;
    let py = prox(f, eta, y, DEFAULT_PROX_TOL)?;
    let ratio = dist_sq(&px, &py).sqrt() / denom;
    let bound = 1.0 / (1.0 + alpha * eta);
    Ok(ContractionCheck {
        ratio,
        bound,
        passed: ratio <= bound + CHECK_SLACK,
    })
}

/// Max over `t_grid` of `|∂ₜ env(t) + ‖x_t − x‖²/(2t²)|`, with the time
/// derivative of the Moreau envelope taken by central differences.
pub fn hamilton_jacobi_check(f: &PotentialRef, x: &[f64], t_grid: &[f64]) -> Result<f64> {
    const H: f64 = 1e-4;
    let mut worst: f64 = 0.0;
    for &t in t_grid {
        if !(t > H) {
            return Err(Error::Validation(format!("time {t} must exceed the difference step {H}")));
        }
        let dt = (moreau_envelope(f, t + H, x)? - moreau_envelope(f, t - H, x)?) / (2.0 * H);
        let xt = prox(f, t, x, DEFAULT_PROX_TOL)?;
        let residual = (dt + dist_sq(&xt, x) / (2.0 * t * t)).abs();
        worst = worst.max(residual);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::builtin;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prox_examples() {
        let q = builtin("quadratic", &[1.0]).unwrap();
        assert_eq!(prox(&q, 1.0, &[2.0], 1e-12).unwrap(), vec![1.0]);
        let a = builtin("abs_1d", &[]).unwrap();
        assert_eq!(prox(&a, 1.0, &[3.0], 1e-12).unwrap(), vec![2.0]);
        let qu = builtin("quartic_1d", &[]).unwrap();
        let x = prox(&qu, 1.0, &[1.0], 1e-12).unwrap()[0];
        assert!((x - 0.682328).abs() < 1e-6);
        assert!((x * x * x + x - 1.0).abs() < 1e-11);
    }

    #[test]
    fn analytic_prox_agrees_with_numeric_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for f in [builtin("quadratic", &[1.7]).unwrap(), builtin("abs_1d", &[]).unwrap()] {
            for _ in 0..100 {
                let eta = rng.gen_range(0.01..4.0);
                let y = [rng.gen_range(-6.0..6.0)];
                let a = f.analytic_prox(eta, &y).unwrap();
                let n = prox_numeric(&f, eta, &y, 1e-12).unwrap();
                assert!((a[0] - n[0]).abs() < 1e-6, "{}: {a:?} vs {n:?}", f.name());
            }
        }
        let q = builtin("quadratic", &[1.0, 4.0, 0.3]).unwrap();
        for _ in 0..100 {
            let eta = rng.gen_range(0.01..4.0);
            let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-6.0..6.0)).collect();
            let a = q.analytic_prox(eta, &y).unwrap();
            let n = prox_numeric(&q, eta, &y, 1e-12).unwrap();
            assert!(dist_sq(&a, &n).sqrt() < 1e-6);
        }
    }

    #[test]
    fn soft_threshold_beats_grid_brute_force() {
        let f = builtin("abs_1d", &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let eta = rng.gen_range(0.05..3.0);
            let y = rng.gen_range(-5.0..5.0);
            let obj = |z: f64| z.abs() + (z - y) * (z - y) / (2.0 * eta);
            let z = f.analytic_prox(eta, &[y]).unwrap()[0];
            let n = 1_000_001;
            let brute = (0..n)
                .map(|i| obj(-10.0 + 20.0 * i as f64 / (n - 1) as f64))
                .fold(f64::INFINITY, f64::min);
            assert!(obj(z) <= brute + 1e-10);
        }
    }

    #[test]
    fn prox_point_examples() {
        let q = builtin("quadratic", &[1.0]).unwrap();
        let tr = prox_point_run(&q, 1.0, &[2.0], 3).unwrap();
        let xs: Vec<f64> = tr.iterates.iter().map(|v| v[0]).collect();
        assert_eq!(xs, vec![2.0, 1.0, 0.5, 0.25]);
        assert!(tr.to_csv().starts_with("k,x0,f,residual\n"));
        assert_eq!(tr.to_csv().lines().count(), 5);
    }

    #[test]
    fn prox_point_descends() {
        for (name, params) in [("quartic_1d", vec![]), ("pl_sine_1d", vec![]), ("abs_1d", vec![]), ("quartic_plus_quadratic_d", vec![2.0])] {
            let f = builtin(name, &params).unwrap();
            let x0 = vec![3.7; f.dim()];
            let tr = prox_point_run(&f, 0.2, &x0, 20).unwrap();
            for w in tr.values.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{name}: {w:?}");
            }
            for r in &tr.residuals {
                assert!(*r < 1e-8, "{name}: residual {r}");
            }
        }
    }

    #[test]
    fn moreau_examples() {
        let q = builtin("quadratic", &[1.0]).unwrap();
        assert!((moreau_envelope(&q, 1.0, &[2.0]).unwrap() - 1.0).abs() < 1e-15);
        let a = builtin("abs_1d", &[]).unwrap();
        assert!((moreau_envelope(&a, 1.0, &[3.0]).unwrap() - 2.5).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for f in [q, a, builtin("pl_sine_1d", &[]).unwrap(), builtin("quartic_1d", &[]).unwrap()] {
            for _ in 0..30 {
                let x = [rng.gen_range(-4.0..4.0)];
                let t = rng.gen_range(0.05..0.24);
                assert!(moreau_envelope(&f, t, &x).unwrap() <= f.value(&x) + 1e-12);
            }
            assert!(moreau_envelope(&f, 0.7, &[0.0]).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn pl_contraction_examples() {
        let q = builtin("quadratic", &[1.0]).unwrap();
        let c = pl_contraction_check(&q, 1.0, &[2.0]).unwrap();
        assert!((c.ratio - 0.25).abs() < 1e-15);
        assert!(c.passed);

        let pl = builtin("pl_sine_1d", &[]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for eta in [0.2, 0.5] {
            let mut done = 0;
            while done < 100 {
                let x: f64 = rng.gen_range(-5.0..5.0);
                if x.abs() < 0.05 {
                    continue;
                }
                let c = pl_contraction_check(&pl, eta, &[x]).unwrap();
                assert!(c.passed, "eta={eta} x={x}: {c:?}");
                done += 1;
            }
        }

        let c = pl_contraction_check(&q, 1e-6, &[1.3]).unwrap();
        assert!((c.ratio - 1.0).abs() < 1e-4);
        assert!(matches!(pl_contraction_check(&q, 1.0, &[0.0]), Err(Error::UndefinedRatio(_))));
    }

    #[test]
    fn prox_contraction_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let q = builtin("quadratic", &[1.0]).unwrap();
        for _ in 0..20 {
            let c = prox_contraction_check(&q, 1.0, &[rng.gen_range(-5.0..5.0)], &[rng.gen_range(-5.0..5.0)]).unwrap();
            assert!((c.ratio - 0.5).abs() < 1e-12);
        }
        let q2 = builtin("quadratic", &[1.0, 4.0]).unwrap();
        let mut best: f64 = 0.0;
        for _ in 0..100 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let c = prox_contraction_check(&q2, 1.0, &x, &y).unwrap();
            assert!(c.passed);
            best = best.max(c.ratio);
        }
        let along_weak = prox_contraction_check(&q2, 1.0, &[1.0, 0.0], &[-2.0, 0.0]).unwrap();
        assert!((along_weak.ratio - 0.5).abs() < 1e-15);
        assert!(best > 0.4);

        let a = builtin("abs_1d", &[]).unwrap();
        for _ in 0..50 {
            let c = prox_contraction_check(&a, 0.7, &[rng.gen_range(-3.0..3.0)], &[rng.gen_range(-3.0..3.0)]).unwrap();
            assert!(c.ratio <= 1.0 + 1e-12);
        }
        assert!(matches!(prox_contraction_check(&a, 1.0, &[1.0], &[1.0]), Err(Error::UndefinedRatio(_))));
    }

    #[test]
    fn hamilton_jacobi_examples() {
        let q = builtin("quadratic", &[1.0]).unwrap();
        assert!(hamilton_jacobi_check(&q, &[2.0], &[0.5, 1.0, 2.0]).unwrap() <= 1e-5);
        let pl = builtin("pl_sine_1d", &[]).unwrap();
        assert!(hamilton_jacobi_check(&pl, &[1.3], &[0.5, 1.0, 2.0]).unwrap() <= 1e-4);
        assert!(hamilton_jacobi_check(&pl, &[0.0], &[0.5, 1.0, 2.0]).unwrap() <= 1e-8);
    }

    #[test]
    fn envelope_identity_for_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let alpha = rng.gen_range(0.1..5.0);
            let eta = rng.gen_range(0.01..3.0);
            let x = [rng.gen_range(-5.0..5.0)];
            let f = builtin("quadratic", &[alpha]).unwrap();
            let env = moreau_envelope(&f, eta, &x).unwrap();
            assert!((env - f.value(&x) / (1.0 + alpha * eta)).abs() < 1e-10);
        }
    }
}
