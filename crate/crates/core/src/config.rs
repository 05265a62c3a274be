//! Experiment configuration: one experiment per TOML document.
//!
//! ```toml
//! kind = "gaussian_exact"
//! metrics = ["KL", "W2", "VAR_ERR"]
//!
//! [potential]
//! name = "quadratic"
//! params = [1.0]
//!
//! [sampler]
//! eta = 1.0
//! iterations = 5
//!
//! [init]
//! mean = [1.0]
//! variance = [5.0]
//!
//! [[bound]]
//! theorem = "LSI_KL"
//!
//! [[bound]]
//! theorem = "SLC"
//! ```
//!
//! Unknown keys are rejected. Every bound must be checkable against one of
//! the requested metrics, and every parameter it needs must be given or be
//! derivable from the potential's declared regularity (or, for Poincaré-type
//! bounds on a grid, from the grid's spectral-gap estimate).

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{builtin, InequalityClass, PotentialRef};
use crate::rates::{suggest_step_size, StepRegime, Theorem};
use crate::sampler::{Entropy, SamplerConfig};

pub const DEFAULT_GRID: GridSection = GridSection {
    lo: -12.0,
    hi: 12.0,
    n: 4001,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    GaussianExact,
    McSampler,
    Density1d,
    ProxPoint,
    EpsLimit,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::GaussianExact => "gaussian_exact",
            ExperimentKind::McSampler => "mc_sampler",
            ExperimentKind::Density1d => "density1d",
            ExperimentKind::ProxPoint => "prox_point",
            ExperimentKind::EpsLimit => "eps_limit",
        }
    }
}

/// A measured quantity in a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Metric {
    Kl,
    Chi2,
    Renyi(f64),
    W2,
    /// Per-coordinate mean.
    Mean,
    /// Per-coordinate variance.
    Var,
    /// Largest absolute deviation of a covariance entry from the target's.
    VarErr,
    /// Mean rejection-sampling trials per oracle call in the iteration.
    Trials,
    /// Objective value `f(x_k)`.
    F,
    /// Optimality gap `f(x_k) − min f`.
    FGap,
    /// Stationarity residual of the proximal step.
    Residual,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Kl => f.write_str("KL"),
            Metric::Chi2 => f.write_str("CHI2"),
            Metric::Renyi(q) => write!(f, "RENYI({q})"),
            Metric::W2 => f.write_str("W2"),
            Metric::Mean => f.write_str("MEAN"),
            Metric::Var => f.write_str("VAR"),
            Metric::VarErr => f.write_str("VAR_ERR"),
            Metric::Trials => f.write_str("TRIALS"),
            Metric::F => f.write_str("F"),
            Metric::FGap => f.write_str("F_GAP"),
            Metric::Residual => f.write_str("RESIDUAL"),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        if let Some(inner) = t.strip_prefix("RENYI(").and_then(|r| r.strip_suffix(')')) {
            let q: f64 = inner
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad Renyi order in metric '{s}'")))?;
            if !(q > 0.0 && q.is_finite()) {
                return Err(Error::Validation(format!("Renyi order must be positive, got {q}")));
            }
            return Ok(Metric::Renyi(q));
        }
        Ok(match t.as_str() {
            "KL" => Metric::Kl,
            "CHI2" => Metric::Chi2,
            "W2" => Metric::W2,
            "MEAN" => Metric::Mean,
            "VAR" => Metric::Var,
            "VAR_ERR" => Metric::VarErr,
            "TRIALS" => Metric::Trials,
            "F" => Metric::F,
            "F_GAP" => Metric::FGap,
            "RESIDUAL" => Metric::Residual,
            _ => return Err(Error::Config(format!("unknown metric '{s}'"))),
        })
    }
}

impl TryFrom<String> for Metric {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Metric> for String {
    fn from(m: Metric) -> String {
        m.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub name: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

/// `eps` is either a positive number or the word `"limit"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsValue {
    Level(f64),
    Word(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<EpsValue>,
    pub iterations: usize,
    #[serde(default = "one")]
    pub chains: usize,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}

/// Step size from the rejection-sampling rules instead of a literal `eta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSizeSection {
    /// `smooth_beta` (`η = c/(βd)`) or `lipschitz_M` (`η = 1/(16M²d)`).
    pub regime: String,
    /// `β` or `M`; defaults to the potential's declared value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    /// Defaults to the potential's dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefactor: Option<f64>,
}

/// Initial law: `N(mean, diag(variance))`, or a point mass at `point`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsLimitSection {
    pub levels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSpec {
    pub theorem: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loi_constant: Option<f64>,
    /// LC only: use the refined form that also involves the initial KL.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub refined: bool,
}

impl BoundSpec {
    pub fn theorem(&self) -> Result<Theorem> {
        self.theorem.parse()
    }
}

/// The metric a bound controls.
pub fn bound_metric(theorem: Theorem, q: Option<f64>) -> Option<Metric> {
    match theorem {
        Theorem::Slc => Some(Metric::W2),
        Theorem::Lc | Theorem::LsiKl | Theorem::EpsGeneralized => Some(Metric::Kl),
        Theorem::PiChi2 => Some(Metric::Chi2),
        Theorem::LsiRenyi | Theorem::PiRenyi | Theorem::Loi => q.map(Metric::Renyi),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub metrics: Vec<Metric>,
    pub potential: PotentialSpec,
    pub sampler: SamplerSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_size: Option<StepSizeSection>,
    #[serde(default)]
    pub init: InitSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_limit: Option<EpsLimitSection>,
    #[serde(default, rename = "bound", skip_serializing_if = "Vec::is_empty")]
    pub bounds: Vec<BoundSpec>,
}

/// Initial law after validation.
#[derive(Debug, Clone, PartialEq)]
pub enum InitLaw {
    Gaussian { mean: Vec<f64>, variance: Vec<f64> },
    Point(Vec<f64>),
}

fn cfg_err(path: &str, msg: impl fmt::Display) -> Error {
    Error::Config(format!("{path}: {msg}"))
}

fn val_err(path: &str, msg: impl fmt::Display) -> Error {
    Error::Validation(format!("{path}: {msg}"))
}

fn prefix(path: &str, e: Error) -> Error {
    match e {
        Error::Config(m) => cfg_err(path, m),
        Error::Validation(m) | Error::Domain(m) => val_err(path, m),
        other => other.context(path),
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn potential(&self) -> Result<PotentialRef> {
        builtin(&self.potential.name, &self.potential.params).map_err(|e| match e {
            Error::Config(m) => cfg_err("potential.name", m),
            Error::Validation(m) => val_err("potential.params", m),
            other => other,
        })
    }

    /// Step size, literal or from the step-size rule.
    pub fn eta(&self) -> Result<f64> {
        let f = self.potential()?;
        match (&self.sampler.eta, &self.step_size) {
            (Some(_), Some(_)) => Err(cfg_err(
                "sampler.eta",
                "give either sampler.eta or a [step_size] section, not both",
            )),
            (None, None) => Err(cfg_err("sampler.eta", "missing (or add a [step_size] section)")),
            (Some(eta), None) => {
                if *eta > 0.0 && eta.is_finite() {
                    Ok(*eta)
                } else {
                    Err(val_err("sampler.eta", format!("must be positive, got {eta}")))
                }
            }
            (None, Some(rule)) => {
                let regime: StepRegime = rule.regime.parse().map_err(|e| prefix("step_size.regime", e))?;
                let reg = f.regularity();
                let declared = match regime {
                    StepRegime::SmoothBeta => reg.beta_smoothness,
                    StepRegime::LipschitzM => reg.lipschitz_m,
                };
                let constant = rule.constant.or(declared).ok_or_else(|| {
                    val_err(
                        "step_size.constant",
                        format!("{} declares no constant for {}; give one", f.name(), rule.regime),
                    )
                })?;
                let d = rule.dim.unwrap_or(f.dim());
                suggest_step_size(regime, constant, d, rule.prefactor).map_err(|e| prefix("step_size", e))
            }
        }
    }

    pub fn entropy(&self) -> Result<Entropy> {
        match &self.sampler.eps {
            None => Ok(Entropy::Level(1.0)),
            Some(EpsValue::Level(e)) if *e > 0.0 && e.is_finite() => Ok(Entropy::Level(*e)),
            Some(EpsValue::Level(e)) => Err(val_err(
                "sampler.eps",
                format!("must be positive (use \"limit\" for the deterministic limit), got {e}"),
            )),
            Some(EpsValue::Word(w)) if w == "limit" => Ok(Entropy::Limit),
            Some(EpsValue::Word(w)) => Err(cfg_err(
                "sampler.eps",
                format!("expected a positive number or \"limit\", got '{w}'"),
            )),
        }
    }

    pub fn sampler_config(&self) -> Result<SamplerConfig> {
        let cfg = SamplerConfig::new(self.eta()?, self.sampler.iterations, self.sampler.chains, self.sampler.seed)
            .with_eps(self.entropy()?);
        cfg.validate().map_err(|e| prefix("sampler", e))?;
        Ok(cfg)
    }

    pub fn grid(&self) -> GridSection {
        self.grid.unwrap_or(DEFAULT_GRID)
    }

    pub fn init_law(&self) -> Result<InitLaw> {
        let d = self.potential()?.dim();
        let i = &self.init;
        let law = match (&i.mean, &i.variance, &i.point) {
            (Some(m), Some(v), None) => {
                if v.len() != m.len() {
                    return Err(val_err("init.variance", "must have the same length as init.mean"));
                }
                if let Some(bad) = v.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                    return Err(val_err("init.variance", format!("entries must be positive, got {bad}")));
                }
                InitLaw::Gaussian {
                    mean: m.clone(),
                    variance: v.clone(),
                }
            }
            (None, None, Some(p)) => InitLaw::Point(p.clone()),
            _ => {
                return Err(cfg_err(
                    "init",
                    "give either mean and variance (Gaussian) or point (point mass)",
                ))
            }
        };
        let (InitLaw::Gaussian { mean: x, .. } | InitLaw::Point(x)) = &law;
        if x.len() != d {
            return Err(val_err(
                "init",
                format!("has dimension {} but the potential has dimension {d}", x.len()),
            ));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(val_err("init", "coordinates must be finite"));
        }
        Ok(law)
    }

    pub fn eps_levels(&self) -> Result<Vec<f64>> {
        let sec = self
            .eps_limit
            .as_ref()
            .ok_or_else(|| cfg_err("eps_limit.levels", "missing"))?;
        if sec.levels.is_empty() {
            return Err(val_err("eps_limit.levels", "needs at least one level"));
        }
        if let Some(bad) = sec.levels.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(val_err("eps_limit.levels", format!("levels must be positive, got {bad}")));
        }
        Ok(sec.levels.clone())
    }

    fn allowed_metrics(&self) -> &'static [&'static str] {
        match self.kind {
            ExperimentKind::GaussianExact | ExperimentKind::EpsLimit => {
                &["KL", "CHI2", "RENYI", "W2", "MEAN", "VAR", "VAR_ERR"]
            }
            ExperimentKind::Density1d => &["KL", "CHI2", "RENYI", "W2", "MEAN", "VAR"],
            ExperimentKind::McSampler => &["MEAN", "VAR", "TRIALS"],
            ExperimentKind::ProxPoint => &["F", "F_GAP", "RESIDUAL"],
        }
    }

    /// Full validation; [`parse_config`] calls this.
    pub fn validate(&self) -> Result<()> {
        let f = self.potential()?;
        let kind = self.kind.as_str();
        self.eta()?;
        let entropy = self.entropy()?;
        if self.sampler.chains == 0 {
            return Err(val_err("sampler.chains", "must be at least 1"));
        }
        let law = self.init_law()?;

        match self.kind {
            ExperimentKind::GaussianExact | ExperimentKind::EpsLimit => {
                if self.potential.name != "quadratic" {
                    return Err(val_err(
                        "potential.name",
                        format!("{kind} needs the quadratic potential (Gaussian target)"),
                    ));
                }
                if !matches!(law, InitLaw::Gaussian { .. }) {
                    return Err(val_err("init", format!("{kind} needs a Gaussian initial law")));
                }
                if entropy == Entropy::Limit {
                    return Err(val_err("sampler.eps", format!("{kind} needs a positive eps")));
                }
            }
            ExperimentKind::Density1d => {
                if f.dim() != 1 {
                    return Err(val_err("potential", "density1d needs a one-dimensional potential"));
                }
                if !matches!(law, InitLaw::Gaussian { .. }) {
                    return Err(val_err("init", "density1d needs a Gaussian initial law"));
                }
                if entropy == Entropy::Limit {
                    return Err(val_err("sampler.eps", "density1d needs a positive eps"));
                }
                let g = self.grid();
                if !(g.lo < g.hi) || g.n < 3 {
                    return Err(val_err("grid", "needs lo < hi and n ≥ 3"));
                }
            }
            ExperimentKind::McSampler => {}
            ExperimentKind::ProxPoint => {
                if !matches!(law, InitLaw::Point(_)) {
                    return Err(val_err("init.point", "prox_point starts from a point"));
                }
            }
        }
        if self.kind == ExperimentKind::EpsLimit {
            self.eps_levels()?;
        } else if self.eps_limit.is_some() {
            return Err(cfg_err("eps_limit", format!("only valid for eps_limit experiments, not {kind}")));
        }
        if self.grid.is_some() && self.kind != ExperimentKind::Density1d {
            return Err(cfg_err("grid", format!("only valid for density1d experiments, not {kind}")));
        }

        if self.metrics.is_empty() {
            return Err(val_err("metrics", "request at least one metric"));
        }
        let allowed = self.allowed_metrics();
        for (i, m) in self.metrics.iter().enumerate() {
            let name = m.to_string();
            let base = name.split('(').next().unwrap_or(&name);
            if !allowed.contains(&base) {
                return Err(val_err(
                    &format!("metrics[{i}]"),
                    format!("{name} is not available for {kind} (allowed: {})", allowed.join(", ")),
                ));
            }
            if *m == Metric::FGap && f.min_value().is_none() {
                return Err(val_err(
                    &format!("metrics[{i}]"),
                    format!("F_GAP needs a known minimum value, which {} does not declare", f.name()),
                ));
            }
        }

        for (i, b) in self.bounds.iter().enumerate() {
            self.validate_bound(i, b, &f)?;
        }
        Ok(())
    }

    fn validate_bound(&self, i: usize, b: &BoundSpec, f: &PotentialRef) -> Result<()> {
        let path = format!("bound[{i}]");
        let theorem = b.theorem().map_err(|e| prefix(&format!("{path}.theorem"), e))?;
        if matches!(self.kind, ExperimentKind::McSampler | ExperimentKind::ProxPoint) {
            return Err(val_err(
                &path,
                format!(
                    "{} reports no divergences, so {theorem} cannot be checked",
                    self.kind.as_str()
                ),
            ));
        }
        let renyi = matches!(theorem, Theorem::LsiRenyi | Theorem::PiRenyi | Theorem::Loi);
        if renyi {
            let q = b
                .q
                .ok_or_else(|| cfg_err(&format!("{path}.q"), format!("{theorem} needs a Renyi order q")))?;
            let need_two = matches!(theorem, Theorem::PiRenyi | Theorem::Loi);
            if need_two && !(q >= 2.0) {
                return Err(val_err(&format!("{path}.q"), format!("{theorem} requires q ≥ 2, got {q}")));
            }
            if !need_two && !(q >= 1.0) {
                return Err(val_err(&format!("{path}.q"), format!("{theorem} requires q ≥ 1, got {q}")));
            }
        } else if b.q.is_some() {
            return Err(cfg_err(&format!("{path}.q"), format!("{theorem} takes no Renyi order")));
        }
        if theorem == Theorem::Loi {
            let r = b
                .r
                .ok_or_else(|| cfg_err(&format!("{path}.r"), "LOI needs its order r"))?;
            if !(1.0..2.0).contains(&r) {
                return Err(val_err(&format!("{path}.r"), format!("LOI order must lie in [1, 2), got {r}")));
            }
            if let Some(c) = b.loi_constant {
                if !(c > 0.0) {
                    return Err(val_err(&format!("{path}.loi_constant"), "must be positive"));
                }
            }
        } else if b.r.is_some() || b.loi_constant.is_some() {
            return Err(cfg_err(&path, format!("r and loi_constant apply to LOI only, not {theorem}")));
        }
        if b.refined && theorem != Theorem::Lc {
            return Err(cfg_err(&format!("{path}.refined"), "applies to LC only"));
        }
        let metric = bound_metric(theorem, b.q).expect("q checked above");
        if !self.metrics.contains(&metric) {
            return Err(val_err(
                &path,
                format!("{theorem} bounds {metric}, which is not among the requested metrics"),
            ));
        }
        if theorem == Theorem::Lc {
            if b.alpha.is_some() {
                return Err(cfg_err(&format!("{path}.alpha"), "LC takes no alpha"));
            }
            return Ok(());
        }
        if let Some(a) = b.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(val_err(&format!("{path}.alpha"), format!("must be positive, got {a}")));
            }
            return Ok(());
        }
        if self.derived_alpha(theorem, f).is_none() {
            let poincare_on_grid =
                self.kind == ExperimentKind::Density1d && matches!(theorem, Theorem::PiChi2 | Theorem::PiRenyi | Theorem::Loi);
            if !poincare_on_grid {
                return Err(val_err(
                    &format!("{path}.alpha"),
                    format!("{theorem} needs alpha and {} does not declare one; give it explicitly", f.name()),
                ));
            }
        }
        Ok(())
    }

    /// `α` implied by the potential's declared regularity for a theorem.
    /// Strong convexity implies log-Sobolev, which implies Poincaré, with the
    /// same constant.
    pub fn derived_alpha(&self, theorem: Theorem, f: &PotentialRef) -> Option<f64> {
        let reg = f.regularity();
        let class_constant = |accept: &[InequalityClass]| {
            if accept.iter().any(|c| std::mem::discriminant(c) == std::mem::discriminant(&reg.inequality_class)) {
                reg.inequality_constant
            } else {
                None
            }
        };
        let positive = |a: Option<f64>| a.filter(|v| *v > 0.0);
        match theorem {
            Theorem::Lc => None,
            Theorem::Slc | Theorem::EpsGeneralized => positive(reg.alpha_strong_convexity),
            Theorem::LsiKl | Theorem::LsiRenyi => positive(
                reg.alpha_strong_convexity
                    .or_else(|| class_constant(&[InequalityClass::Slc, InequalityClass::Lsi])),
            ),
            Theorem::PiChi2 | Theorem::PiRenyi | Theorem::Loi => positive(reg.alpha_strong_convexity.or_else(|| {
                class_constant(&[
                    InequalityClass::Slc,
                    InequalityClass::Lsi,
                    InequalityClass::Pi,
                    InequalityClass::Loi { r: 1.0 },
                ])
            })),
        }
    }

    /// The report's default path: `output` if set, else `<dir>/<stem>.csv`.
    pub fn output_path(&self, default_dir: Option<&std::path::Path>, stem: &str) -> PathBuf {
        match (&self.output, default_dir) {
            (Some(p), Some(dir)) if p.is_relative() => dir.join(p),
            (Some(p), _) => p.clone(),
            (None, Some(dir)) => dir.join(format!("{stem}.csv")),
            (None, None) => PathBuf::from(format!("{stem}.csv")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
kind = "gaussian_exact"
metrics = ["KL", "W2", "VAR_ERR"]

[potential]
name = "quadratic"
params = [1.0]

[sampler]
eta = 1.0
iterations = 5

[init]
mean = [1.0]
variance = [5.0]

[[bound]]
theorem = "LSI_KL"

[[bound]]
theorem = "SLC"
"#;

    #[test]
    fn minimal_round_trip() {
        let cfg = parse_config(MINIMAL).unwrap();
        let text = cfg.to_toml().unwrap();
        let again = parse_config(&text).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(again.to_toml().unwrap(), text);
    }

    #[test]
    fn pi_renyi_below_two_is_rejected() {
        let text = MINIMAL.replace(
            "[[bound]]\ntheorem = \"SLC\"",
            "[[bound]]\ntheorem = \"PI_RENYI\"\nq = 1.5",
        ).replace("\"VAR_ERR\"", "\"VAR_ERR\", \"RENYI(1.5)\"");
        let err = parse_config(&text).unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("q ≥ 2"), "{err}");
    }

    #[test]
    fn lipschitz_rule_resolves_to_one_sixteenth() {
        let text = r#"
kind = "mc_sampler"
metrics = ["TRIALS"]

[potential]
name = "abs_1d"

[sampler]
iterations = 3
chains = 10

[step_size]
regime = "lipschitz_M"

[init]
point = [0.0]
"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.eta().unwrap(), 1.0 / 16.0);
        let explicit = text.replace("regime = \"lipschitz_M\"", "regime = \"lipschitz_M\"\nconstant = 1.0\ndim = 1");
        assert_eq!(parse_config(&explicit).unwrap().eta().unwrap(), 1.0 / 16.0);
    }

    #[test]
    fn unknown_keys_and_names() {
        let err = parse_config(&MINIMAL.replace("iterations = 5", "iterations = 5\nwarmup = 2")).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        assert!(err.to_string().contains("warmup"));

        let err = parse_config(&MINIMAL.replace("name = \"quadratic\"", "name = \"banana\"")).unwrap_err();
        assert!(err.to_string().contains("potential.name"), "{err}");

        let err = parse_config(&MINIMAL.replace("kind = \"gaussian_exact\"\n", "")).unwrap_err();
        assert!(err.to_string().contains("kind"), "{err}");

        let err = parse_config(&MINIMAL.replace("\"LSI_KL\"", "\"NOPE\"")).unwrap_err();
        assert!(err.to_string().contains("bound[0].theorem"), "{err}");
    }

    #[test]
    fn bound_needs_its_metric_and_alpha() {
        let err = parse_config(&MINIMAL.replace("[\"KL\", \"W2\", \"VAR_ERR\"]", "[\"KL\"]")).unwrap_err();
        assert!(err.to_string().contains("W2"), "{err}");

        let text = r#"
kind = "density1d"
metrics = ["KL"]

[potential]
name = "abs_1d"

[sampler]
eta = 0.1
iterations = 3

[init]
mean = [2.0]
variance = [1.0]

[[bound]]
theorem = "LSI_KL"
"#;
        let err = parse_config(text).unwrap_err();
        assert!(err.to_string().contains("bound[0].alpha"), "{err}");
        assert!(parse_config(&text.replace("\"LSI_KL\"", "\"LSI_KL\"\nalpha = 0.2")).is_ok());
        assert!(parse_config(&text.replace("\"LSI_KL\"", "\"LC\"")).is_ok());
    }

    #[test]
    fn eps_values() {
        let cfg = parse_config(&MINIMAL.replace("eta = 1.0", "eta = 1.0\neps = 0.5")).unwrap();
        assert_eq!(cfg.entropy().unwrap(), Entropy::Level(0.5));
        let err = parse_config(&MINIMAL.replace("eta = 1.0", "eta = 1.0\neps = \"limit\"")).unwrap_err();
        assert!(err.is_validation());
        let err = parse_config(&MINIMAL.replace("eta = 1.0", "eta = 1.0\neps = \"zero\"")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn metric_strings() {
        for s in ["KL", "CHI2", "RENYI(2)", "RENYI(1.5)", "W2", "MEAN", "VAR", "VAR_ERR", "TRIALS", "F", "F_GAP", "RESIDUAL"] {
            let m: Metric = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert!("RENYI(-1)".parse::<Metric>().is_err());
        assert!("TV".parse::<Metric>().is_err());
    }
}
