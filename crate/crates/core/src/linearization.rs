//! The matrix D of the linearized system, its eigenvalue parameters and the
//! periodic coefficient matrix B(θ).

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::central_config::{solve_symmetric_y, Configuration};
use crate::error::{domain, Error, Result};

/// `D = I − (1/μ)(Σ mᵢ/|dᵢ|³) I + (3/μ) Σ mᵢ dᵢdᵢᵀ/|dᵢ|⁵` with `dᵢ = aᵢ − a_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DMatrix {
    pub entries: Matrix2<f64>,
    pub beta20: f64,
    pub beta220: Complex64,
}

impl DMatrix {
    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    pub fn det(&self) -> f64 {
        self.entries.determinant()
    }
}

pub fn compute_d(config: &Configuration) -> Result<DMatrix> {
    let p = config
        .massless_position
        .ok_or_else(|| domain("configuration has no massless body"))?;
    if !(config.mu > 0.0) {
        return Err(domain("configuration multiplier must be positive"));
    }
    let mut s = 0.0;
    let mut outer = Matrix2::zeros();
    let mut b22 = Complex64::new(0.0, 0.0);
    for (i, (m, a)) in config.masses.iter().zip(&config.primary_positions).enumerate() {
        let d = a - p;
        let r2 = d.norm_squared();
        let r = r2.sqrt();
        if r < 1e-12 {
            return Err(Error::Singular(format!("massless body coincides with primary {i}")));
        }
        let r5 = r2 * r2 * r;
        s += m / (r2 * r);
        outer += *m * d * d.transpose() / r5;
        let dc = Complex64::new(d.x, d.y);
        b22 += *m * dc * dc / r5;
    }
    let mu = config.mu;
    let mut entries = Matrix2::identity() * (1.0 - s / mu) + outer * (3.0 / mu);
    let off = 0.5 * (entries[(0, 1)] + entries[(1, 0)]);
    entries[(0, 1)] = off;
    entries[(1, 0)] = off;
    Ok(DMatrix {
        entries,
        beta20: s / mu - 1.0,
        beta220: b22 * (1.5 / mu),
    })
}

/// Input of the linearized system: ordered eigenvalues `λ₃ ≥ λ₄` of D,
/// `α = (λ₃+λ₄)/2 − 1`, `β = (λ₃−λ₄)/2` and the eccentricity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityParams {
    pub lambda3: f64,
    pub lambda4: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `9 − (λ₃−λ₄)²`, defined only on the collinear family `λ₃+λ₄ = 3`.
    pub beta_hls: Option<f64>,
    pub e: f64,
}

fn check_e(e: f64) -> Result<()> {
    if (0.0..1.0).contains(&e) {
        Ok(())
    } else {
        Err(domain(format!("eccentricity must lie in [0, 1), got {e}")))
    }
}

impl StabilityParams {
    pub fn from_eigenvalues(lambda3: f64, lambda4: f64, e: f64) -> Result<Self> {
        check_e(e)?;
        if !(lambda3.is_finite() && lambda4.is_finite()) {
            return Err(domain("eigenvalues must be finite"));
        }
        let (l3, l4) = if lambda3 >= lambda4 { (lambda3, lambda4) } else { (lambda4, lambda3) };
        let beta_hls = ((l3 + l4 - 3.0).abs() <= 1e-8).then(|| 9.0 - (l3 - l4).powi(2));
        Ok(StabilityParams {
            lambda3: l3,
            lambda4: l4,
            alpha: 0.5 * (l3 + l4) - 1.0,
            beta: 0.5 * (l3 - l4),
            beta_hls,
            e,
        })
    }

    /// Collinear family: `λ₃,₄ = (3 ± √(9 − β))/2` for `β ∈ [0, 9]`.
    pub fn from_hls(beta_hls: f64, e: f64) -> Result<Self> {
        if !(0.0..=9.0).contains(&beta_hls) {
            return Err(domain(format!("beta must lie in [0, 9], got {beta_hls}")));
        }
        let root = (9.0 - beta_hls).sqrt();
        let mut p = Self::from_eigenvalues(0.5 * (3.0 + root), 0.5 * (3.0 - root), e)?;
        p.beta_hls = Some(beta_hls);
        Ok(p)
    }

    pub fn from_alpha_beta(alpha: f64, beta: f64, e: f64) -> Result<Self> {
        if !(beta >= 0.0) {
            return Err(domain(format!("beta must be nonnegative, got {beta}")));
        }
        let mut p = Self::from_eigenvalues(1.0 + alpha + beta, 1.0 + alpha - beta, e)?;
        p.alpha = alpha;
        p.beta = beta;
        Ok(p)
    }

    pub fn with_e(&self, e: f64) -> Result<Self> {
        check_e(e)?;
        Ok(StabilityParams { e, ..*self })
    }

    pub fn k_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.lambda3, 0.0, 0.0, self.lambda4)
    }
}

/// Ordered eigenvalues of D in closed form.
pub fn spectral_params(d: &DMatrix, e: f64) -> Result<StabilityParams> {
    let m = &d.entries;
    let half_tr = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let half_diff = 0.5 * (m[(0, 0)] - m[(1, 1)]);
    let rad = half_diff.hypot(m[(0, 1)]);
    StabilityParams::from_eigenvalues(half_tr + rad, half_tr - rad, e)
}

/// `r_e(θ) = 1/(1 + e cos θ)`.
pub fn r_e(e: f64, theta: f64) -> f64 {
    1.0 / (1.0 + e * theta.cos())
}

fn block(tl: Matrix2<f64>, tr: Matrix2<f64>, bl: Matrix2<f64>, br: Matrix2<f64>) -> Matrix4<f64> {
    let mut b = Matrix4::zeros();
    b.fixed_view_mut::<2, 2>(0, 0).copy_from(&tl);
    b.fixed_view_mut::<2, 2>(0, 2).copy_from(&tr);
    b.fixed_view_mut::<2, 2>(2, 0).copy_from(&bl);
    b.fixed_view_mut::<2, 2>(2, 2).copy_from(&br);
    b
}

pub fn j2() -> Matrix2<f64> {
    Matrix2::new(0.0, -1.0, 1.0, 0.0)
}

/// `B(θ) = [[I, −J], [J, I − r_e(θ)K]]` with `K = diag(λ₃, λ₄)`.
pub fn b_matrix(p: &StabilityParams, theta: f64) -> Matrix4<f64> {
    b_matrix_d_form(&p.k_matrix(), p.e, theta)
}

/// Same block layout with an arbitrary symmetric 2×2 matrix in place of K.
pub fn b_matrix_d_form(d: &Matrix2<f64>, e: f64, theta: f64) -> Matrix4<f64> {
    let i = Matrix2::identity();
    block(i, -j2(), j2(), i - d * r_e(e, theta))
}

/// Value of `z` for the symmetric chain `m₁ = m₃`, where `D = 3 diag(z, 1−z)`.
pub fn symmetric_z(m2: f64) -> Result<f64> {
    let y = solve_symmetric_y(m2)?;
    Ok(8.0 * (1.0 - m2) / ((1.0 + 7.0 * m2) * (y * y + 1.0).powf(2.5)))
}

/// `β = 36 z (1 − z)` along the symmetric chain.
pub fn symmetric_beta_hls(m2: f64) -> Result<f64> {
    let z = symmetric_z(m2)?;
    Ok(36.0 * z * (1.0 - z))
}
