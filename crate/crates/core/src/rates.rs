//! Convergence-rate bounds for the proximal sampler as explicit functions of
//! the iteration count `k`.
//!
//! Every bound here is nonincreasing in `k` and equals the initial
//! divergence at `k = 0`. The Rényi bounds under PI and LOI are piecewise:
//! a linear (or power) decay until the divergence reaches order one, then
//! geometric decay. Where the piecewise formula at `k = 0` would exceed the
//! initial value (initial divergence already below one) the initial value is
//! used; Rényi divergence never increases along a Markov kernel, so the
//! minimum is still a valid bound.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Constant in the LOI rate as stated in the theorem.
pub const LOI_CONSTANT_STATED: f64 = 68.0;
/// Constant that appears in the LOI proof; a more conservative choice.
pub const LOI_CONSTANT_PROOF: f64 = 136.0;
/// Default prefactor `c` in `η = c/(βd)`.
pub const DEFAULT_SMOOTH_PREFACTOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    Slc,
    Lc,
    LsiKl,
    LsiRenyi,
    PiChi2,
    PiRenyi,
    Loi,
    EpsGeneralized,
}

impl Theorem {
    pub const ALL: [Theorem; 8] = [
        Theorem::Slc,
        Theorem::Lc,
        Theorem::LsiKl,
        Theorem::LsiRenyi,
        Theorem::PiChi2,
        Theorem::PiRenyi,
        Theorem::Loi,
        Theorem::EpsGeneralized,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Theorem::Slc => "SLC",
            Theorem::Lc => "LC",
            Theorem::LsiKl => "LSI_KL",
            Theorem::LsiRenyi => "LSI_RENYI",
            Theorem::PiChi2 => "PI_CHI2",
            Theorem::PiRenyi => "PI_RENYI",
            Theorem::Loi => "LOI",
            Theorem::EpsGeneralized => "EPS_GENERALIZED",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Theorem::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == norm)
            .ok_or_else(|| Error::Config(format!("unknown theorem '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsiKind {
    Kl,
    Renyi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiKind {
    Chi2,
    Renyi,
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and nonnegative, got {v}")))
    }
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

/// `W₂₀ / (1 + αη)^k`.
pub fn bound_slc(w2_0: f64, alpha: f64, eta: f64, k: u64) -> Result<f64> {
    check_nonneg("W2_0", w2_0)?;
    check_nonneg("alpha", alpha)?;
    check_pos("eta", eta)?;
    Ok(w2_0 / (1.0 + alpha * eta).powf(k as f64))
}

/// `W₂₀² / (kη)`, or the sharper `H₀ / (1 + kηH₀/W₂₀²)` when `H₀` is known.
pub fn bound_lc(w2_0: f64, h_0: Option<f64>, eta: f64, k: u64) -> Result<f64> {
    check_nonneg("W2_0", w2_0)?;
    check_pos("eta", eta)?;
    let w2sq = w2_0 * w2_0;
    match h_0 {
        Some(h) => {
            check_nonneg("H_0", h)?;
            if w2sq == 0.0 {
                return Ok(if k == 0 { h } else { 0.0 });
            }
            Ok(h / (1.0 + k as f64 * eta * h / w2sq))
        }
        None if k == 0 => Err(Error::UndefinedBound(
            "the LC bound at k = 0 needs the initial KL divergence".into(),
        )),
        None => Ok(w2sq / (k as f64 * eta)),
    }
}

/// `D₀ / (1 + αη)^{2k/q}`; `KL` is the `q = 1` case.
pub fn bound_lsi(kind: LsiKind, d_0: f64, alpha: f64, eta: f64, q: f64, k: u64) -> Result<f64> {
    check_nonneg("initial divergence", d_0)?;
    check_nonneg("alpha", alpha)?;
    check_pos("eta", eta)?;
    let q = match kind {
        LsiKind::Kl => 1.0,
        LsiKind::Renyi => {
            if !(q >= 1.0) {
                return Err(Error::Domain(format!("Rényi order must satisfy q ≥ 1, got {q}")));
            }
            q
        }
    };
    Ok(d_0 / (1.0 + alpha * eta).powf(2.0 * k as f64 / q))
}

/// First iteration of the geometric phase of the PI Rényi bound.
pub fn pi_renyi_threshold(r_0: f64, alpha: f64, eta: f64, q: f64) -> f64 {
    (q / (2.0 * (alpha * eta).ln_1p()) * (r_0 - 1.0)).ceil()
}

/// Poincaré bounds: `χ²₀/(1 + αη)^{2k}`, or the two-phase Rényi bound
/// (`q ≥ 2`).
pub fn bound_pi(kind: PiKind, d_0: f64, alpha: f64, eta: f64, q: f64, k: u64) -> Result<f64> {
    check_nonneg("initial divergence", d_0)?;
    check_pos("alpha", alpha)?;
    check_pos("eta", eta)?;
    let log_step = (alpha * eta).ln_1p();
    match kind {
        PiKind::Chi2 => Ok(d_0 / (2.0 * k as f64 * log_step).exp()),
        PiKind::Renyi => {
            if !(q >= 2.0) {
                return Err(Error::Domain(format!(
                    "the Poincaré Rényi bound requires q ≥ 2, got {q}"
                )));
            }
            let kf = k as f64;
            let linear_until = q / (2.0 * log_step) * (d_0 - 1.0);
            let value = if kf <= linear_until {
                d_0 - 2.0 * kf * log_step / q
            } else {
                let k0 = linear_until.ceil();
                (-2.0 * (kf - k0) * log_step / q).exp()
            };
            Ok(value.min(d_0))
        }
    }
}

/// `c₀` of the LOI bound.
pub fn loi_threshold(r_0: f64, alpha: f64, eta: f64, q: f64, r: f64, loi_constant: f64) -> f64 {
    let p = 2.0 / r - 1.0;
    loi_constant * q / (p * (alpha * eta).ln_1p()) * (r_0.powf(p) - 1.0)
}

/// Two-phase Rényi bound under an `(r, α)`-LOI, `r ∈ [1, 2)`, `q ≥ 2`.
pub fn bound_loi(
    r_0: f64,
    alpha: f64,
    eta: f64,
    q: f64,
    r: f64,
    k: u64,
    loi_constant: f64,
) -> Result<f64> {
    check_nonneg("R_0", r_0)?;
    check_pos("alpha", alpha)?;
    check_pos("eta", eta)?;
    check_pos("loi_constant", loi_constant)?;
    if r == 2.0 {
        return Err(Error::Domain(
            "LOI of order r = 2 is the log-Sobolev case; use the LSI bound".into(),
        ));
    }
    if !(1.0..2.0).contains(&r) {
        return Err(Error::Domain(format!("LOI order must lie in [1, 2), got {r}")));
    }
    if !(q >= 2.0) {
        return Err(Error::Domain(format!("the LOI bound requires q ≥ 2, got {q}")));
    }
    let p = 2.0 / r - 1.0;
    let log_step = (alpha * eta).ln_1p();
    let c0 = loi_threshold(r_0, alpha, eta, q, r, loi_constant);
    if k == 0 {
        return Ok(r_0);
    }
    let kf = k as f64;
    let value = if kf <= c0 {
        (r_0.powf(p) - p * kf * log_step / (loi_constant * q))
            .max(0.0)
            .powf(1.0 / p)
    } else {
        (-(kf - c0.ceil()) * log_step / (loi_constant * q)).exp()
    };
    Ok(value.min(r_0))
}

/// `H₀/(1 + αη)^{2k}` for the entropy-regularized sampler, with `α` the
/// strong convexity of `f` (not of `f/ε`).
pub fn bound_eps_generalized(h_0: f64, alpha: f64, eta: f64, k: u64) -> Result<f64> {
    bound_lsi(LsiKind::Kl, h_0, alpha, eta, 1.0, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRegime {
    SmoothBeta,
    LipschitzM,
}

impl FromStr for StepRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth_beta" => Ok(StepRegime::SmoothBeta),
            "lipschitz_M" | "lipschitz_m" => Ok(StepRegime::LipschitzM),
            other => Err(Error::Config(format!(
                "unknown step-size regime '{other}' (expected smooth_beta or lipschitz_M)"
            ))),
        }
    }
}

/// `c/(βd)` in the smooth regime, `1/(16M²d)` in the Lipschitz regime.
pub fn suggest_step_size(regime: StepRegime, constant: f64, d: usize, prefactor: Option<f64>) -> Result<f64> {
    check_pos("constant", constant)?;
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    match regime {
        StepRegime::SmoothBeta => {
            let c = prefactor.unwrap_or(DEFAULT_SMOOTH_PREFACTOR);
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::Domain(format!(
                    "smooth prefactor must lie in (0, 1) so that βη < 1, got {c}"
                )));
            }
            Ok(c / (constant * d as f64))
        }
        StepRegime::LipschitzM => Ok(1.0 / (16.0 * constant * constant * d as f64)),
    }
}

/// Expected-trial bound `κ̃^{d/2}` of rejection sampling for the composite
/// of a `β`-smooth potential, `κ̃ = (1 + βη)/(1 − βη)`; requires `βη < 1`.
pub fn rejection_trials_bound(beta: f64, eta: f64, d: usize) -> Result<f64> {
    check_pos("beta", beta)?;
    check_pos("eta", eta)?;
    let be = beta * eta;
    if be >= 1.0 {
        return Err(Error::Domain(format!("need βη < 1, got {be}")));
    }
    Ok(((1.0 + be) / (1.0 - be)).powf(d as f64 / 2.0))
}

/// A bound with all of its parameters, evaluable at any `k`.
#[derive(Debug, Clone, PartialEq)]
pub enum RateBound {
    Slc { w2_0: f64, alpha: f64, eta: f64 },
    Lc { w2_0: f64, h_0: Option<f64>, eta: f64 },
    LsiKl { h_0: f64, alpha: f64, eta: f64 },
    LsiRenyi { r_0: f64, alpha: f64, eta: f64, q: f64 },
    PiChi2 { chi2_0: f64, alpha: f64, eta: f64 },
    PiRenyi { r_0: f64, alpha: f64, eta: f64, q: f64 },
    Loi { r_0: f64, alpha: f64, eta: f64, q: f64, r: f64, loi_constant: f64 },
    EpsGeneralized { h_0: f64, alpha: f64, eta: f64 },
}

impl RateBound {
    pub fn theorem(&self) -> Theorem {
        match self {
            RateBound::Slc { .. } => Theorem::Slc,
            RateBound::Lc { .. } => Theorem::Lc,
            RateBound::LsiKl { .. } => Theorem::LsiKl,
            RateBound::LsiRenyi { .. } => Theorem::LsiRenyi,
            RateBound::PiChi2 { .. } => Theorem::PiChi2,
            RateBound::PiRenyi { .. } => Theorem::PiRenyi,
            RateBound::Loi { .. } => Theorem::Loi,
            RateBound::EpsGeneralized { .. } => Theorem::EpsGeneralized,
        }
    }

    pub fn evaluate(&self, k: u64) -> Result<f64> {
        match *self {
            RateBound::Slc { w2_0, alpha, eta } => bound_slc(w2_0, alpha, eta, k),
            RateBound::Lc { w2_0, h_0, eta } => bound_lc(w2_0, h_0, eta, k),
            RateBound::LsiKl { h_0, alpha, eta } => bound_lsi(LsiKind::Kl, h_0, alpha, eta, 1.0, k),
            RateBound::LsiRenyi { r_0, alpha, eta, q } => {
                bound_lsi(LsiKind::Renyi, r_0, alpha, eta, q, k)
            }
            RateBound::PiChi2 { chi2_0, alpha, eta } => {
                bound_pi(PiKind::Chi2, chi2_0, alpha, eta, 2.0, k)
            }
            RateBound::PiRenyi { r_0, alpha, eta, q } => bound_pi(PiKind::Renyi, r_0, alpha, eta, q, k),
            RateBound::Loi { r_0, alpha, eta, q, r, loi_constant } => {
                bound_loi(r_0, alpha, eta, q, r, k, loi_constant)
            }
            RateBound::EpsGeneralized { h_0, alpha, eta } => bound_eps_generalized(h_0, alpha, eta, k),
        }
    }

    /// `(k, bound)` for `k` in `k_min..=k_max`.
    pub fn curve(&self, k_min: u64, k_max: u64) -> Result<Vec<(u64, f64)>> {
        (k_min..=k_max).map(|k| Ok((k, self.evaluate(k)?))).collect()
    }
}

/// Write a bound curve as `k,bound` CSV.
pub fn write_curve_csv<W: Write>(out: &mut W, curve: &[(u64, f64)]) -> std::io::Result<()> {
    writeln!(out, "k,bound")?;
    for (k, b) in curve {
        writeln!(out, "{k},{b:.16e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    #[test]
    fn slc_examples() {
        assert_eq!(bound_slc(4.0, 1.0, 1.0, 2).unwrap(), 1.0);
        assert_eq!(bound_slc(3.0, 0.0, 0.7, 9).unwrap(), 3.0);
        assert_eq!(bound_slc(1.0, 0.5, 2.0, 3).unwrap(), 0.125);
    }

    #[test]
    fn lc_examples() {
        assert!((bound_lc(2.0, None, 0.1, 10).unwrap() - 4.0).abs() < 1e-14);
        assert!((bound_lc(2.0, Some(1.0), 0.1, 10).unwrap() - 0.8).abs() < 1e-14);
        assert!(matches!(bound_lc(2.0, None, 0.1, 0), Err(Error::UndefinedBound(_))));
        assert_eq!(bound_lc(2.0, Some(0.7), 0.1, 0).unwrap(), 0.7);
        for w in [0.1, 1.0, 3.0] {
            for h in [0.01, 0.5, 4.0] {
                for eta in [0.01, 0.1, 1.0] {
                    for k in 1..50 {
                        assert!(bound_lc(w, Some(h), eta, k).unwrap() <= bound_lc(w, None, eta, k).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn lsi_examples() {
        assert_eq!(bound_lsi(LsiKind::Kl, 8.0, 1.0, 1.0, 7.0, 1).unwrap(), 2.0);
        assert_eq!(bound_lsi(LsiKind::Renyi, 8.0, 1.0, 1.0, 2.0, 1).unwrap(), 4.0);
        for k in 0..10 {
            assert_eq!(
                bound_lsi(LsiKind::Renyi, 3.3, 0.4, 0.9, 1.0, k).unwrap(),
                bound_lsi(LsiKind::Kl, 3.3, 0.4, 0.9, 1.0, k).unwrap()
            );
        }
    }

    #[test]
    fn pi_examples() {
        let l2 = std::f64::consts::LN_2;
        assert_eq!(pi_renyi_threshold(3.0, 1.0, 1.0, 2.0), 3.0);
        assert!((bound_pi(PiKind::Renyi, 3.0, 1.0, 1.0, 2.0, 1).unwrap() - (3.0 - l2)).abs() < 1e-15);
        assert!((bound_pi(PiKind::Renyi, 3.0, 1.0, 1.0, 2.0, 5).unwrap() - 0.25).abs() < 1e-15);
        assert!((bound_pi(PiKind::Chi2, 9.0, 1.0, 1.0, 2.0, 1).unwrap() - 2.25).abs() < 1e-14);
        assert!(matches!(bound_pi(PiKind::Renyi, 3.0, 1.0, 1.0, 1.5, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn loi_examples() {
        let eta = E - 1.0;
        assert!((loi_threshold(2.0, 1.0, eta, 2.0, 1.0, 68.0) - 136.0).abs() < 1e-10);
        assert!((bound_loi(2.0, 1.0, eta, 2.0, 1.0, 68, 68.0).unwrap() - 1.5).abs() < 1e-12);
        assert!((bound_loi(2.0, 1.0, eta, 2.0, 1.0, 272, 68.0).unwrap() - (-1.0f64).exp()).abs() < 1e-12);
        assert!(matches!(bound_loi(2.0, 1.0, 1.0, 2.0, 2.0, 1, 68.0), Err(Error::Domain(_))));
        assert!(matches!(bound_loi(2.0, 1.0, 1.0, 1.5, 1.5, 1, 68.0), Err(Error::Domain(_))));
    }

    #[test]
    fn loi_order_one_is_looser_than_pi() {
        for &r0 in &[0.5, 1.0, 2.0, 5.0, 20.0] {
            for &q in &[2.0, 3.0, 8.0] {
                for &eta in &[0.05, 0.5, 2.0] {
                    for &c in &[LOI_CONSTANT_STATED, LOI_CONSTANT_PROOF] {
                        for k in (0..5000).step_by(7) {
                            let loi = bound_loi(r0, 1.0, eta, q, 1.0, k, c).unwrap();
                            let pi = bound_pi(PiKind::Renyi, r0, 1.0, eta, q, k).unwrap();
                            assert!(loi >= pi - 1e-12, "r0={r0} q={q} eta={eta} k={k}: {loi} < {pi}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn eps_generalized_examples() {
        assert_eq!(bound_eps_generalized(8.0, 1.0, 1.0, 1).unwrap(), 2.0);
        assert_eq!(bound_eps_generalized(8.0, 1.0, 1.0, 0).unwrap(), 8.0);
        for k in 0..20 {
            assert_eq!(
                bound_eps_generalized(1.7, 0.3, 0.6, k).unwrap(),
                bound_lsi(LsiKind::Kl, 1.7, 0.3, 0.6, 1.0, k).unwrap()
            );
        }
    }

    #[test]
    fn step_size_examples() {
        assert_eq!(suggest_step_size(StepRegime::LipschitzM, 1.0, 1, None).unwrap(), 1.0 / 16.0);
        assert_eq!(suggest_step_size(StepRegime::SmoothBeta, 2.0, 4, Some(0.5)).unwrap(), 1.0 / 16.0);
        for beta in [0.1, 1.0, 28.0, 1e3] {
            for d in 1..10 {
                let eta = suggest_step_size(StepRegime::SmoothBeta, beta, d, None).unwrap();
                assert!(beta * eta < 1.0);
            }
        }
        assert!(suggest_step_size(StepRegime::SmoothBeta, 1.0, 1, Some(1.0)).is_err());
    }

    #[test]
    fn theorem_names_round_trip() {
        for t in Theorem::ALL {
            assert_eq!(t.as_str().parse::<Theorem>().unwrap(), t);
        }
        assert!("nope".parse::<Theorem>().is_err());
    }

    #[test]
    fn curve_csv_has_header_and_rows() {
        let b = RateBound::Slc { w2_0: 4.0, alpha: 1.0, eta: 1.0 };
        let mut out = Vec::new();
        write_curve_csv(&mut out, &b.curve(0, 2).unwrap()).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k,bound");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3].split(',').nth(1).unwrap().parse::<f64>().unwrap(), 1.0);
    }

    fn arb_bound() -> impl Strategy<Value = RateBound> {
        let d0 = 0.0f64..50.0;
        let alpha = 0.01f64..5.0;
        let eta = 0.001f64..3.0;
        prop_oneof![
            (d0.clone(), 0.0f64..5.0, eta.clone()).prop_map(|(w2_0, alpha, eta)| RateBound::Slc { w2_0, alpha, eta }),
            (d0.clone(), d0.clone(), eta.clone()).prop_map(|(w2_0, h, eta)| RateBound::Lc { w2_0, h_0: Some(h), eta }),
            (d0.clone(), alpha.clone(), eta.clone()).prop_map(|(h_0, alpha, eta)| RateBound::LsiKl { h_0, alpha, eta }),
            (d0.clone(), alpha.clone(), eta.clone(), 1.0f64..10.0)
                .prop_map(|(r_0, alpha, eta, q)| RateBound::LsiRenyi { r_0, alpha, eta, q }),
            (d0.clone(), alpha.clone(), eta.clone()).prop_map(|(chi2_0, alpha, eta)| RateBound::PiChi2 { chi2_0, alpha, eta }),
            (d0.clone(), alpha.clone(), eta.clone(), 2.0f64..10.0)
                .prop_map(|(r_0, alpha, eta, q)| RateBound::PiRenyi { r_0, alpha, eta, q }),
            (d0.clone(), alpha.clone(), eta.clone(), 2.0f64..10.0, 1.0f64..1.99, prop::bool::ANY).prop_map(
                |(r_0, alpha, eta, q, r, proof)| RateBound::Loi {
                    r_0,
                    alpha,
                    eta,
                    q,
                    r,
                    loi_constant: if proof { LOI_CONSTANT_PROOF } else { LOI_CONSTANT_STATED },
                }
            ),
            (d0, alpha, eta).prop_map(|(h_0, alpha, eta)| RateBound::EpsGeneralized { h_0, alpha, eta }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn bounds_are_nonincreasing_and_start_at_initial(b in arb_bound()) {
            let curve = b.curve(0, 1000).unwrap();
            let initial = match b {
                RateBound::Slc { w2_0, .. } => w2_0,
                RateBound::Lc { h_0, .. } => h_0.unwrap(),
                RateBound::LsiKl { h_0, .. } | RateBound::EpsGeneralized { h_0, .. } => h_0,
                RateBound::LsiRenyi { r_0, .. } | RateBound::PiRenyi { r_0, .. } | RateBound::Loi { r_0, .. } => r_0,
                RateBound::PiChi2 { chi2_0, .. } => chi2_0,
            };
            prop_assert_eq!(curve[0].1, initial);
            for w in curve.windows(2) {
                prop_assert!(w[1].1 <= w[0].1 + 1e-12 * w[0].1.abs().max(1.0), "{:?} at k={}", b, w[1].0);
            }
        }

        #[test]
        fn piecewise_bounds_have_no_upward_jump(
            r_0 in 1.5f64..60.0,
            alpha in 0.01f64..5.0,
            eta in 0.01f64..3.0,
            q in 2.0f64..10.0,
            r in 1.0f64..1.99,
        ) {
            let step = (alpha * eta).ln_1p();
            let k0 = pi_renyi_threshold(r_0, alpha, eta, q);
            prop_assume!(k0 >= 1.0 && k0 < 1e6);
            let k0 = k0 as u64;
            let before = bound_pi(PiKind::Renyi, r_0, alpha, eta, q, k0 - 1).unwrap();
            let at = bound_pi(PiKind::Renyi, r_0, alpha, eta, q, k0).unwrap();
            prop_assert!(at <= before);
            prop_assert!(before - at <= 2.0 * step / q + 1e-12);

            for c in [LOI_CONSTANT_STATED, LOI_CONSTANT_PROOF] {
                let c0 = loi_threshold(r_0, alpha, eta, q, r, c).ceil();
                prop_assume!(c0 >= 1.0 && c0 < 1e6);
                let kc = c0 as u64;
                let p = 2.0 / r - 1.0;
                let first = |k: f64| (r_0.powf(p) - p * k * step / (c * q)).max(0.0).powf(1.0 / p);
                let before = bound_loi(r_0, alpha, eta, q, r, kc - 1, c).unwrap();
                let at = bound_loi(r_0, alpha, eta, q, r, kc, c).unwrap();
                prop_assert!(at <= before);
                prop_assert!(before - at <= first(c0 - 1.0) - first(c0) + 1e-12);
            }
        }
    }
}
