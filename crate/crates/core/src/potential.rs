//! Target potentials `f` with `π ∝ exp(-f)`.
//!
//! A [`Potential`] is an immutable, thread-safe description of `f`: its value,
//! an optional gradient (or subgradient selection), an optional closed-form
//! proximal map and the regularity constants the rate bounds and the
//! rejection sampler rely on. The built-in catalogue covers the regimes the
//! sampler is tested in: strongly log-concave quadratics, convex Lipschitz
//! `|x|`, convex non-smooth-growth `x⁴/4`, and a non-convex PL potential.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Functional inequality satisfied by `exp(-f)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InequalityClass {
    /// Strongly log-concave.
    Slc,
    /// Log-concave.
    Lc,
    /// Log-Sobolev.
    Lsi,
    /// Poincaré.
    Pi,
    /// Latała–Oleszkiewicz of order `r ∈ [1, 2]`.
    Loi { r: f64 },
    None,
}

/// Declared regularity constants of a potential.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityInfo {
    pub alpha_strong_convexity: Option<f64>,
    /// Lower bound on the Hessian, possibly negative. Equals the strong
    /// convexity constant for convex potentials.
    pub hessian_lower_bound: Option<f64>,
    pub beta_smoothness: Option<f64>,
    pub lipschitz_m: Option<f64>,
    pub pl_alpha: Option<f64>,
    pub inequality_class: InequalityClass,
    pub inequality_constant: Option<f64>,
}

impl RegularityInfo {
    fn empty() -> Self {
        RegularityInfo {
            alpha_strong_convexity: None,
            hessian_lower_bound: None,
            beta_smoothness: None,
            lipschitz_m: None,
            pl_alpha: None,
            inequality_class: InequalityClass::None,
            inequality_constant: None,
        }
    }
}

pub trait Potential: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Gradient, or a subgradient selection for non-smooth potentials.
    /// `None` when the potential provides neither.
    fn grad(&self, x: &[f64]) -> Option<Vec<f64>>;

    fn is_smooth(&self) -> bool {
        true
    }

    /// Closed-form `prox_{ηf}(y)`.
    fn analytic_prox(&self, _eta: f64, _y: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Exact minimizer when it is available in closed form.
    fn exact_minimizer(&self) -> Option<Vec<f64>> {
        None
    }

    /// Known minimum value `f*`.
    fn min_value(&self) -> Option<f64> {
        None
    }

    fn regularity(&self) -> &RegularityInfo;
}

pub type PotentialRef = Arc<dyn Potential>;

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `f(x) = Σ λᵢ xᵢ² / 2` with precisions `λ` (the spectrum of `Σ⁻¹`).
#[derive(Debug, Clone)]
pub struct Quadratic {
    precisions: Vec<f64>,
    reg: RegularityInfo,
}

impl Quadratic {
    pub fn new(precisions: Vec<f64>) -> Result<Self> {
        if precisions.is_empty() {
            return Err(Error::Validation("quadratic needs at least one precision".into()));
        }
        if precisions.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::Validation(
                "quadratic precisions must be positive and finite".into(),
            ));
        }
        let lo = precisions.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = precisions.iter().cloned().fold(0.0, f64::max);
        let reg = RegularityInfo {
            alpha_strong_convexity: Some(lo),
            hessian_lower_bound: Some(lo),
            beta_smoothness: Some(hi),
            pl_alpha: Some(lo),
            inequality_class: InequalityClass::Slc,
            inequality_constant: Some(lo),
            ..RegularityInfo::empty()
        };
        Ok(Quadratic { precisions, reg })
    }

    pub fn precisions(&self) -> &[f64] {
        &self.precisions
    }
}

impl Potential for Quadratic {
    fn name(&self) -> String {
        "quadratic".into()
    }

    fn dim(&self) -> usize {
        self.precisions.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * x
            .iter()
            .zip(&self.precisions)
            .map(|(xi, l)| l * xi * xi)
            .sum::<f64>()
    }

    fn grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.iter().zip(&self.precisions).map(|(xi, l)| l * xi).collect())
    }

    fn analytic_prox(&self, eta: f64, y: &[f64]) -> Option<Vec<f64>> {
        Some(
            y.iter()
                .zip(&self.precisions)
                .map(|(yi, l)| yi / (1.0 + eta * l))
                .collect(),
        )
    }

    fn exact_minimizer(&self) -> Option<Vec<f64>> {
        Some(vec![0.0; self.dim()])
    }

    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn regularity(&self) -> &RegularityInfo {
        &self.reg
    }
}

/// Soft-threshold `sign(y)·max(|y| − t, 0)`.
pub fn soft_threshold(y: f64, t: f64) -> f64 {
    if y > t {
        y - t
    } else if y < -t {
        y + t
    } else {
        0.0
    }
}

/// `f(x) = |x|` in one dimension.
#[derive(Debug, Clone)]
pub struct AbsValue {
    reg: RegularityInfo,
}

impl AbsValue {
    pub fn new() -> Self {
        AbsValue {
            reg: RegularityInfo {
                alpha_strong_convexity: Some(0.0),
                hessian_lower_bound: Some(0.0),
                lipschitz_m: Some(1.0),
                inequality_class: InequalityClass::Lc,
                ..RegularityInfo::empty()
            },
        }
    }
}

impl Default for AbsValue {
    fn default() -> Self {
        Self::new()
    }
}

impl Potential for AbsValue {
    fn name(&self) -> String {
        "abs_1d".into()
    }

    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        x[0].abs()
    }

    /// Minimal-norm subgradient: `0` at the kink.
    fn grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        let g = if x[0] > 0.0 {
            1.0
        } else if x[0] < 0.0 {
            -1.0
        } else {
            0.0
        };
        Some(vec![g])
    }

    fn is_smooth(&self) -> bool {
        false
    }

    fn analytic_prox(&self, eta: f64, y: &[f64]) -> Option<Vec<f64>> {
        Some(vec![soft_threshold(y[0], eta)])
    }

    fn exact_minimizer(&self) -> Option<Vec<f64>> {
        Some(vec![0.0])
    }

    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn regularity(&self) -> &RegularityInfo {
        &self.reg
    }
}

/// `f(x) = x⁴/4` in one dimension.
#[derive(Debug, Clone)]
pub struct Quartic {
    reg: RegularityInfo,
}

impl Quartic {
    pub fn new() -> Self {
        Quartic {
            reg: RegularityInfo {
                alpha_strong_convexity: Some(0.0),
                hessian_lower_bound: Some(0.0),
                inequality_class: InequalityClass::Lc,
                ..RegularityInfo::empty()
            },
        }
    }
}

impl Default for Quartic {
    fn default() -> Self {
        Self::new()
    }
}

impl Potential for Quartic {
    fn name(&self) -> String {
        "quartic_1d".into()
    }

    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.25 * x[0].powi(4)
    }

    fn grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![x[0].powi(3)])
    }

    fn exact_minimizer(&self) -> Option<Vec<f64>> {
        Some(vec![0.0])
    }

    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn regularity(&self) -> &RegularityInfo {
        &self.reg
    }
}

/// Box and resolution on which the PL constant of [`PlSine`] is certified.
pub const PL_SINE_BOX: (f64, f64) = (-10.0, 10.0);
pub const PL_SINE_GRID: usize = 100_001;

/// `f(x) = x² + 3 sin²(x)`: non-convex (`f'' ≥ −4`) but PL, minimum `0` at `0`.
#[derive(Debug, Clone)]
pub struct PlSine {
    reg: RegularityInfo,
}

impl PlSine {
    pub fn new() -> Self {
        let mut reg = RegularityInfo {
            hessian_lower_bound: Some(-4.0),
            beta_smoothness: Some(8.0),
            ..RegularityInfo::empty()
        };
        let probe = PlSine { reg: reg.clone() };
        let certified = certify_pl_constant(&probe, PL_SINE_BOX.0, PL_SINE_BOX.1, PL_SINE_GRID)
            .expect("pl_sine_1d has a known minimum");
        reg.pl_alpha = Some(certified);
        PlSine { reg }
    }
}

impl Default for PlSine {
    fn default() -> Self {
        Self::new()
    }
}

impl Potential for PlSine {
    fn name(&self) -> String {
        "pl_sine_1d".into()
    }

    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        let s = x[0].sin();
        x[0] * x[0] + 3.0 * s * s
    }

    fn grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![2.0 * x[0] + 3.0 * (2.0 * x[0]).sin()])
    }

    fn exact_minimizer(&self) -> Option<Vec<f64>> {
        Some(vec![0.0])
    }

    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn regularity(&self) -> &RegularityInfo {
        &self.reg
    }
}

/// `f(x) = Σ (xᵢ²/2 + xᵢ⁴/4)` in `d` dimensions.
///
/// The quartic term is not globally smooth; the declared `β = 1 + 3R²` is the
/// smoothness on the box `|xᵢ| ≤ R`, which holds the bulk of `exp(-f)` for the
/// default `R = 3`.
#[derive(Debug, Clone)]
pub struct QuarticPlusQuadratic {
    dim: usize,
    box_radius: f64,
    reg: RegularityInfo,
}

impl QuarticPlusQuadratic {
    pub fn new(dim: usize, box_radius: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("dimension must be positive".into()));
        }
        if !(box_radius > 0.0) {
            return Err(Error::Validation("box radius must be positive".into()));
        }
        Ok(QuarticPlusQuadratic {
            dim,
            box_radius,
            reg: RegularityInfo {
                alpha_strong_convexity: Some(1.0),
                hessian_lower_bound: Some(1.0),
                beta_smoothness: Some(1.0 + 3.0 * box_radius * box_radius),
                pl_alpha: Some(1.0),
                inequality_class: InequalityClass::Slc,
                inequality_constant: Some(1.0),
                ..RegularityInfo::empty()
            },
        })
    }

    pub fn box_radius(&self) -> f64 {
        self.box_radius
    }
}

impl Potential for QuarticPlusQuadratic {
    fn name(&self) -> String {
        "quartic_plus_quadratic_d".into()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter()
            .map(|&v| {
                let s = v * v;
                0.5 * s + 0.25 * s * s
            })
            .sum()
    }

    fn grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.iter().map(|&v| v + v * v * v).collect())
    }

    fn exact_minimizer(&self) -> Option<Vec<f64>> {
        Some(vec![0.0; self.dim])
    }

    fn min_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn regularity(&self) -> &RegularityInfo {
        &self.reg
    }
}

pub const BUILTIN_NAMES: &[&str] = &[
    "quadratic",
    "abs_1d",
    "quartic_1d",
    "pl_sine_1d",
    "quartic_plus_quadratic_d",
];

/// Instantiate a built-in potential by name.
///
/// Parameters: `quadratic` takes the precision spectrum (`Σ⁻¹` diagonal);
/// `quartic_plus_quadratic_d` takes `[d]` or `[d, R]`; the 1-D potentials take
/// none.
pub fn builtin(name: &str, params: &[f64]) -> Result<PotentialRef> {
    let no_params = |n: &str| -> Result<()> {
        if params.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(format!("{n} takes no parameters")))
        }
    };
    match name {
        "quadratic" => Ok(Arc::new(Quadratic::new(params.to_vec())?)),
        "abs_1d" => {
            no_params(name)?;
            Ok(Arc::new(AbsValue::new()))
        }
        "quartic_1d" => {
            no_params(name)?;
            Ok(Arc::new(Quartic::new()))
        }
        "pl_sine_1d" => {
            no_params(name)?;
            Ok(Arc::new(PlSine::new()))
        }
        "quartic_plus_quadratic_d" => {
            let (d, r) = match params {
                [d] => (*d, 3.0),
                [d, r] => (*d, *r),
                _ => {
                    return Err(Error::Validation(
                        "quartic_plus_quadratic_d takes [d] or [d, box_radius]".into(),
                    ))
                }
            };
            if !(d >= 1.0) || d.fract() != 0.0 {
                return Err(Error::Validation(format!(
                    "dimension must be a positive integer, got {d}"
                )));
            }
            Ok(Arc::new(QuarticPlusQuadratic::new(d as usize, r)?))
        }
        other => Err(Error::Config(format!(
            "unknown potential '{other}' (expected one of {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

/// `f̃_ε(x) = (f(x) + ‖x − y‖²/(2η)) / ε`, the restricted Gaussian oracle's
/// potential.
#[derive(Debug, Clone)]
pub struct Composite {
    base: PotentialRef,
    center: Vec<f64>,
    eta: f64,
    eps: f64,
    reg: RegularityInfo,
}

impl Composite {
    pub fn base(&self) -> &PotentialRef {
        &self.base
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

pub fn composite(f: PotentialRef, y: &[f64], eta: f64, eps: f64) -> Result<Composite> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Validation(format!("eta must be positive, got {eta}")));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Validation(format!("eps must be positive, got {eps}")));
    }
    if y.len() != f.dim() {
        return Err(Error::Validation(format!(
            "center has dimension {} but potential has dimension {}",
            y.len(),
            f.dim()
        )));
    }
    let base = f.regularity();
    let lower = base
        .hessian_lower_bound
        .or(base.alpha_strong_convexity)
        .map(|a| (a + 1.0 / eta) / eps);
    let alpha = lower.filter(|&a| a > 0.0);
    let reg = RegularityInfo {
        alpha_strong_convexity: alpha,
        hessian_lower_bound: lower,
        beta_smoothness: base.beta_smoothness.map(|b| (b + 1.0 / eta) / eps),
        lipschitz_m: None,
        pl_alpha: alpha,
        inequality_class: if alpha.is_some() {
            InequalityClass::Slc
        } else {
            InequalityClass::None
        },
        inequality_constant: alpha,
    };
    Ok(Composite {
        base: f,
        center: y.to_vec(),
        eta,
        eps,
        reg,
    })
}

impl Potential for Composite {
    fn name(&self) -> String {
        format!("composite({})", self.base.name())
    }

    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.base.value(x) + dist_sq(x, &self.center) / (2.0 * self.eta)) / self.eps
    }

    fn grad(&self, x: &[f64]) -> Option<Vec<f64>> {
        let g = self.base.grad(x)?;
        Some(
            g.iter()
                .zip(x.iter().zip(&self.center))
                .map(|(gi, (xi, yi))| (gi + (xi - yi) / self.eta) / self.eps)
                .collect(),
        )
    }

    fn is_smooth(&self) -> bool {
        self.base.is_smooth()
    }

    fn exact_minimizer(&self) -> Option<Vec<f64>> {
        self.base.analytic_prox(self.eta, &self.center)
    }

    fn regularity(&self) -> &RegularityInfo {
        &self.reg
    }
}

/// Max over `points` of `‖∇f − ∇_fd f‖ / (1 + ‖∇f‖)` with central differences.
/// Non-finite values and a missing gradient report `+∞`.
pub fn grad_check(f: &dyn Potential, points: &[Vec<f64>]) -> f64 {
    const H: f64 = 1e-5;
    let mut worst: f64 = 0.0;
    for x in points {
        let Some(g) = f.grad(x) else {
            return f64::INFINITY;
        };
        let mut probe = x.clone();
        let mut err_sq = 0.0;
        for i in 0..x.len() {
            probe[i] = x[i] + H;
            let up = f.value(&probe);
            probe[i] = x[i] - H;
            let down = f.value(&probe);
            probe[i] = x[i];
            let fd = (up - down) / (2.0 * H);
            err_sq += (g[i] - fd).powi(2);
        }
        let rel = err_sq.sqrt() / (1.0 + norm_sq(&g).sqrt());
        if !rel.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(rel);
    }
    worst
}

/// Grid infimum of `|f'|² / (2(f − f*))` on `[lo, hi]` with `n` points,
/// skipping nodes where `f − f*` is at rounding level (the minimizer).
pub fn certify_pl_constant(f: &dyn Potential, lo: f64, hi: f64, n: usize) -> Result<f64> {
    if f.dim() != 1 {
        return Err(Error::Validation("PL certification is one-dimensional".into()));
    }
    let fstar = f
        .min_value()
        .ok_or_else(|| Error::Capability("PL certification needs a known minimum".into()))?;
    let h = (hi - lo) / (n - 1) as f64;
    let mut inf = f64::INFINITY;
    for i in 0..n {
        let x = [lo + h * i as f64];
        let gap = f.value(&x) - fstar;
        if gap <= 1e-12 {
            continue;
        }
        let g = f
            .grad(&x)
            .ok_or_else(|| Error::Capability("PL certification needs a gradient".into()))?;
        inf = inf.min(g[0] * g[0] / (2.0 * gap));
    }
    Ok(inf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quadratic_unit_values() {
        let f = builtin("quadratic", &[1.0]).unwrap();
        assert_eq!(f.value(&[2.0]), 2.0);
        assert_eq!(f.grad(&[2.0]).unwrap(), vec![2.0]);
        let r = f.regularity();
        assert_eq!(r.alpha_strong_convexity, Some(1.0));
        assert_eq!(r.beta_smoothness, Some(1.0));
    }

    #[test]
    fn abs_prox_is_soft_threshold() {
        let f = builtin("abs_1d", &[]).unwrap();
        assert_eq!(f.analytic_prox(1.0, &[3.0]).unwrap(), vec![2.0]);
        assert_eq!(f.analytic_prox(1.0, &[-0.5]).unwrap(), vec![0.0]);
        assert_eq!(f.regularity().lipschitz_m, Some(1.0));
        assert_eq!(f.grad(&[0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn pl_sine_certified_constant_in_range() {
        let f = builtin("pl_sine_1d", &[]).unwrap();
        let a = f.regularity().pl_alpha.unwrap();
        assert!(a > 0.0 && a <= 2.0, "certified PL constant {a}");
        // Independent re-evaluation of the grid infimum.
        let n = 100_001;
        let mut inf = f64::INFINITY;
        for i in 0..n {
            let x = -10.0 + 20.0 * i as f64 / (n - 1) as f64;
            let v = x * x + 3.0 * x.sin().powi(2);
            if v <= 1e-12 {
                continue;
            }
            let g = 2.0 * x + 3.0 * (2.0 * x).sin();
            inf = inf.min(g * g / (2.0 * v));
        }
        assert!((a - inf).abs() < 1e-12);
    }

    #[test]
    fn unknown_and_invalid_builtins() {
        assert!(matches!(builtin("banana", &[]), Err(Error::Config(_))));
        assert!(matches!(builtin("quadratic", &[0.0]), Err(Error::Validation(_))));
        assert!(matches!(builtin("quadratic", &[-1.0]), Err(Error::Validation(_))));
        assert!(matches!(builtin("quartic_plus_quadratic_d", &[0.0]), Err(Error::Validation(_))));
        assert!(matches!(builtin("abs_1d", &[1.0]), Err(Error::Validation(_))));
    }

    #[test]
    fn composite_examples() {
        let q = builtin("quadratic", &[1.0]).unwrap();
        let c = composite(q.clone(), &[0.0], 1.0, 1.0).unwrap();
        assert_eq!(c.value(&[1.0]), 1.0);
        let c = composite(q.clone(), &[2.0], 1.0, 0.5).unwrap();
        assert_eq!(c.regularity().alpha_strong_convexity, Some(4.0));
        assert_eq!(c.regularity().beta_smoothness, Some(4.0));
        let a = builtin("abs_1d", &[]).unwrap();
        let c = composite(a, &[3.0], 1.0, 1.0).unwrap();
        assert_eq!(c.exact_minimizer().unwrap(), vec![2.0]);
        assert!(matches!(composite(q, &[0.0, 1.0], 1.0, 1.0), Err(Error::Validation(_))));
    }

    #[test]
    fn composite_of_pl_sine_needs_small_step() {
        let f = builtin("pl_sine_1d", &[]).unwrap();
        let c = composite(f.clone(), &[1.0], 0.2, 1.0).unwrap();
        assert!((c.regularity().alpha_strong_convexity.unwrap() - 1.0).abs() < 1e-12);
        let c = composite(f, &[1.0], 0.5, 1.0).unwrap();
        assert_eq!(c.regularity().alpha_strong_convexity, None);
    }

    #[test]
    fn grad_check_examples() {
        let q = builtin("quadratic", &[1.0]).unwrap();
        let pts: Vec<Vec<f64>> = [0.0, 1.0, -2.0].iter().map(|&x| vec![x]).collect();
        assert!(grad_check(q.as_ref(), &pts) < 1e-7);

        let pl = builtin("pl_sine_1d", &[]).unwrap();
        let pts: Vec<Vec<f64>> = (0..100).map(|i| vec![-5.0 + 10.0 * i as f64 / 99.0]).collect();
        assert!(grad_check(pl.as_ref(), &pts) < 1e-5);

        let qu = builtin("quartic_1d", &[]).unwrap();
        assert!(grad_check(qu.as_ref(), &[vec![10.0]]) < 1e-4);

        let qq = builtin("quartic_plus_quadratic_d", &[3.0]).unwrap();
        assert!(grad_check(qq.as_ref(), &[vec![0.3, -1.2, 2.0]]) < 1e-6);
    }

    #[test]
    fn strong_convexity_holds_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cases = [
            builtin("quadratic", &[1.0]).unwrap(),
            builtin("quadratic", &[1.0, 4.0, 0.5]).unwrap(),
            builtin("quartic_plus_quadratic_d", &[2.0]).unwrap(),
            composite(builtin("abs_1d", &[]).unwrap(), &[0.7], 0.25, 1.0)
                .map(|c| Arc::new(c) as PotentialRef)
                .unwrap(),
        ];
        for f in cases {
            let a = f.regularity().alpha_strong_convexity.unwrap();
            assert!(a > 0.0);
            for _ in 0..1000 {
                let x: Vec<f64> = (0..f.dim()).map(|_| rng.gen_range(-4.0..4.0)).collect();
                let y: Vec<f64> = (0..f.dim()).map(|_| rng.gen_range(-4.0..4.0)).collect();
                let g = f.grad(&x).unwrap();
                let lin: f64 = g.iter().zip(y.iter().zip(&x)).map(|(g, (y, x))| g * (y - x)).sum();
                let lower = f.value(&x) + lin + 0.5 * a * dist_sq(&x, &y);
                assert!(f.value(&y) >= lower - 1e-8, "{}: {} < {}", f.name(), f.value(&y), lower);
            }
        }
    }

    #[test]
    fn pl_inequality_holds_on_box() {
        let f = builtin("pl_sine_1d", &[]).unwrap();
        let a = f.regularity().pl_alpha.unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x = [rng.gen_range(-10.0..10.0)];
            let g = f.grad(&x).unwrap()[0];
            assert!(g * g >= 2.0 * a * f.value(&x) - 1e-8);
        }
    }

    #[test]
    fn composite_unit_entropy_is_at_least_inverse_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for name in ["quadratic", "abs_1d", "quartic_1d"] {
            let params: &[f64] = if name == "quadratic" { &[2.5] } else { &[] };
            let f = builtin(name, params).unwrap();
            for _ in 0..50 {
                let eta = rng.gen_range(0.01..5.0);
                let c = composite(f.clone(), &[rng.gen_range(-3.0..3.0)], eta, 1.0).unwrap();
                assert!(c.regularity().alpha_strong_convexity.unwrap() >= 1.0 / eta - 1e-12);
            }
        }
    }
}
