//! Exact Gaussian dynamics of the proximal sampler and closed-form
//! divergences between Gaussians.
//!
//! With target `N(0, Σ)` and initial law `N(m₀, Σ₀)`, every iterate stays
//! Gaussian: the forward step adds `ηI` to the covariance, and the backward
//! step maps `(m, S)` to `(M m, M S M + ηM)` with `M = Σ(Σ + ηI)⁻¹` and
//! `S = Σ_k + ηI`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalue floor applied before square roots.
pub const EIGEN_FLOOR: f64 = 1e-14;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::Validation(format!(
                "covariance is {}x{} but mean has length {}",
                cov.nrows(),
                cov.ncols(),
                mean.len()
            )));
        }
        check_spd(&cov)?;
        Ok(GaussianState { mean, cov })
    }

    /// `N(m, diag(variances))`.
    pub fn diagonal(mean: &[f64], variances: &[f64]) -> Result<Self> {
        Self::new(
            DVector::from_column_slice(mean),
            DMatrix::from_diagonal(&DVector::from_column_slice(variances)),
        )
    }

    /// One-dimensional `N(m, s²)`.
    pub fn scalar(mean: f64, variance: f64) -> Result<Self> {
        Self::diagonal(&[mean], &[variance])
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

pub fn check_spd(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::Validation("matrix must be square and non-empty".into()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("matrix has non-finite entries".into()));
    }
    let asym = (m - m.transpose()).abs().max();
    if asym > SYMMETRY_TOL * m.abs().max().max(1.0) {
        return Err(Error::Validation(format!("matrix is not symmetric (defect {asym:.3e})")));
    }
    let min_eig = SymmetricEigen::new(m.clone()).eigenvalues.min();
    if !(min_eig > 0.0) {
        return Err(Error::Validation(format!(
            "matrix is not positive definite (smallest eigenvalue {min_eig:.3e})"
        )));
    }
    Ok(())
}

fn is_diagonal(m: &DMatrix<f64>) -> bool {
    m.iter()
        .enumerate()
        .all(|(idx, v)| idx % m.nrows() == idx / m.nrows() || *v == 0.0)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Symmetric square root via eigendecomposition, eigenvalues floored at
/// [`EIGEN_FLOOR`].
pub fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(m.clone()));
    let roots = eig.eigenvalues.map(|l| l.max(EIGEN_FLOOR).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

pub(crate) fn cholesky(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone())
        .ok_or_else(|| Error::Validation("matrix is not positive definite".into()))
}

fn log_det_chol(c: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * c.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

fn same_dim(a: &GaussianState, b: &GaussianState) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Validation(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Forward (heat) step: covariance grows by `εη I`.
pub fn gaussian_forward(s: &GaussianState, eta: f64, eps: f64) -> GaussianState {
    let d = s.dim();
    GaussianState {
        mean: s.mean.clone(),
        cov: &s.cov + DMatrix::identity(d, d) * (eps * eta),
    }
}

/// One full forward + backward iteration with target `N(0, Σ_target)`.
pub fn gaussian_step(
    s: &GaussianState,
    sigma_target: &DMatrix<f64>,
    eta: f64,
) -> Result<GaussianState> {
    if !(eta > 0.0) {
        return Err(Error::Validation(format!("eta must be positive, got {eta}")));
    }
    if sigma_target.nrows() != s.dim() {
        return Err(Error::Validation("target covariance dimension mismatch".into()));
    }
    check_spd(sigma_target)?;
    let d = s.dim();
    let eye = DMatrix::<f64>::identity(d, d);
    let shifted = cholesky(&(sigma_target + &eye * eta))?;
    // (Σ + ηI)⁻¹ Σ = Σ (Σ + ηI)⁻¹ since both are functions of Σ.
    let m = symmetrize(shifted.solve(sigma_target));
    let mean = &m * &s.mean;
    let cov = &m * (&s.cov + &eye * eta) * &m + &m * eta;
    Ok(GaussianState {
        mean,
        cov: symmetrize(cov),
    })
}

/// The iteration for target `exp(−f/ε)` with `f(x) = xᵀΣ⁻¹x/2`: the
/// same recursion with target covariance `εΣ` and step `εη`.
pub fn gaussian_step_entropic(
    s: &GaussianState,
    sigma_target: &DMatrix<f64>,
    eta: f64,
    eps: f64,
) -> Result<GaussianState> {
    if !(eps > 0.0) {
        return Err(Error::Validation(format!("eps must be positive, got {eps}")));
    }
    gaussian_step(s, &(sigma_target * eps), eta * eps)
}

/// `prox_{ηf}(m) = (I + ηΣ⁻¹)⁻¹ m` for `f(x) = xᵀΣ⁻¹x/2`.
pub fn quadratic_prox(sigma_target: &DMatrix<f64>, eta: f64, m: &DVector<f64>) -> Result<DVector<f64>> {
    let d = m.len();
    let precision = cholesky(sigma_target)?.inverse();
    let system = DMatrix::<f64>::identity(d, d) + precision * eta;
    system
        .lu()
        .solve(m)
        .ok_or_else(|| Error::Numeric("singular proximal system".into()))
}

/// Whether the step's mean equals `prox_{ηf}(m_k)` to `1e-10`.
pub fn gaussian_mean_is_prox_check(
    s: &GaussianState,
    sigma_target: &DMatrix<f64>,
    eta: f64,
) -> Result<bool> {
    let next = gaussian_step(s, sigma_target, eta)?;
    let prox = quadratic_prox(sigma_target, eta, &s.mean)?;
    Ok((next.mean - prox).amax() <= 1e-10)
}

/// `KL(a ‖ b)`.
pub fn kl_gauss(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    same_dim(a, b)?;
    let cb = cholesky(&b.cov)?;
    let ca = cholesky(&a.cov)?;
    let diff = &a.mean - &b.mean;
    let trace = cb.solve(&a.cov).trace();
    let maha = diff.dot(&cb.solve(&diff));
    let d = a.dim() as f64;
    Ok((0.5 * (trace + maha - d + log_det_chol(&cb) - log_det_chol(&ca))).max(0.0))
}

/// Bures–Wasserstein distance `W₂(a, b)`.
pub fn w2_gauss(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    same_dim(a, b)?;
    check_spd(&a.cov)?;
    check_spd(&b.cov)?;
    let diff = &a.mean - &b.mean;
    if is_diagonal(&a.cov) && is_diagonal(&b.cov) {
        let bures: f64 = a
            .cov
            .diagonal()
            .iter()
            .zip(b.cov.diagonal().iter())
            .map(|(x, y)| (x.sqrt() - y.sqrt()).powi(2))
            .sum();
        return Ok((diff.norm_squared() + bures).sqrt());
    }
    let rb = sym_sqrt(&b.cov);
    let cross = sym_sqrt(&(&rb * &a.cov * &rb));
    let bures = (a.cov.trace() + b.cov.trace() - 2.0 * cross.trace()).max(0.0);
    Ok((diff.norm_squared() + bures).sqrt())
}

/// `χ²(a ‖ b) = ∫ ρ_a²/ρ_b − 1`, or `+∞` unless `2Σ_a⁻¹ − Σ_b⁻¹ ≻ 0`.
pub fn chi2_gauss(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    same_dim(a, b)?;
    let ca = cholesky(&a.cov)?;
    let cb = cholesky(&b.cov)?;
    let pa = ca.inverse();
    let pb = cb.inverse();
    let p = symmetrize(&pa * 2.0 - &pb);
    let Some(cp) = Cholesky::new(p) else {
        return Ok(f64::INFINITY);
    };
    let v = &pa * &a.mean * 2.0 - &pb * &b.mean;
    let exponent = 0.5 * v.dot(&cp.solve(&v)) - a.mean.dot(&(&pa * &a.mean))
        + 0.5 * b.mean.dot(&(&pb * &b.mean));
    let log_integral = 0.5 * log_det_chol(&cb) - log_det_chol(&ca) - 0.5 * log_det_chol(&cp) + exponent;
    Ok(log_integral.exp_m1().max(0.0))
}

/// Rényi divergence of order `q ≥ 1`; `q = 1` is KL. `+∞` unless
/// `qΣ_b + (1 − q)Σ_a ≻ 0`.
pub fn renyi_gauss(q: f64, a: &GaussianState, b: &GaussianState) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("Rényi order must be ≥ 1, got {q}")));
    }
    same_dim(a, b)?;
    if q == 1.0 {
        return kl_gauss(a, b);
    }
    let ca = cholesky(&a.cov)?;
    let cb = cholesky(&b.cov)?;
    let mix = symmetrize(&b.cov * q + &a.cov * (1.0 - q));
    let Some(cm) = Cholesky::new(mix) else {
        return Ok(f64::INFINITY);
    };
    let diff = &a.mean - &b.mean;
    let maha = diff.dot(&cm.solve(&diff));
    let logdets = log_det_chol(&cm) - (1.0 - q) * log_det_chol(&ca) - q * log_det_chol(&cb);
    Ok((0.5 * q * maha - logdets / (2.0 * (q - 1.0))).max(0.0))
}
