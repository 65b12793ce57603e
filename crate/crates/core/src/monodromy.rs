//! Fundamental solution of `ξ' = J B(θ) ξ` over one period and the
//! classification of its endpoint spectrum.

use std::f64::consts::PI;

use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::{Matrix2, Matrix4, SMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linearization::{b_matrix, b_matrix_d_form, StabilityParams};
use crate::ode::{Dop853, IntegratorStats};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_CIRCLE_TOL: f64 = 1e-6;
const SAMPLES: usize = 64;

/// Standard symplectic form `[[0, −I], [I, 0]]`.
pub fn j4() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j[(0, 2)] = -1.0;
    j[(1, 3)] = -1.0;
    j[(2, 0)] = 1.0;
    j[(3, 1)] = 1.0;
    j
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMetadata {
    pub tol: f64,
    pub stats: IntegratorStats,
    /// Largest symplectic defect over the intermediate samples.
    pub max_intermediate_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monodromy {
    pub gamma_end: Matrix4<f64>,
    pub symplectic_residual: f64,
    pub eigenvalues: [Complex64; 4],
    pub step_metadata: StepMetadata,
}

/// `‖γᵀJγ − J‖_∞`.
pub fn symplectic_residual(g: &Matrix4<f64>) -> f64 {
    let j = j4();
    inf_norm(&(g.transpose() * j * g - j))
}

fn inf_norm<const N: usize>(a: &SMatrix<f64, N, N>) -> f64 {
    a.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn one_norm<const N: usize>(a: &SMatrix<f64, N, N>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Eigenvalues of a real 4×4 matrix via balancing and a real Schur form,
/// sorted by argument and then modulus.
pub fn eigenvalues(g: &Matrix4<f64>) -> Result<[Complex64; 4]> {
    let mut m = *g;
    balance_parlett_reinsch(&mut m);
    let schur = Schur::try_new(m, f64::EPSILON, 10_000).ok_or_else(|| Error::Convergence {
        what: "Schur decomposition of the monodromy".into(),
        residual: f64::NAN,
    })?;
    let ev = schur.complex_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(|a, b| a.arg().total_cmp(&b.arg()).then(a.norm().total_cmp(&b.norm())));
    Ok(out)
}

fn check_tol(e: f64, tol: f64) -> Result<()> {
    if !(0.0..=0.99).contains(&e) {
        return Err(domain(format!("eccentricity must lie in [0, 0.99] for integration, got {e}")));
    }
    if !(tol >= 1e-13 && tol < 1.0) {
        return Err(domain(format!("integration tolerance must lie in [1e-13, 1), got {tol}")));
    }
    Ok(())
}

/// Integrates `γ' = J B(θ) γ`, `γ(0) = I` over `[0, 2π]` for an arbitrary
/// coefficient matrix, sampling the symplectic defect at 64 points.
pub fn integrate_coefficient<F>(b: F, tol: f64) -> Result<Monodromy>
where
    F: Fn(f64) -> Matrix4<f64>,
{
    let j = j4();
    let rhs = |t: f64, y: &Matrix4<f64>| j * b(t) * y;
    let solver = Dop853::new(tol);
    let mut y = Matrix4::identity();
    let mut h = None;
    let mut stats = IntegratorStats::default();
    let mut worst: f64 = 0.0;
    for k in 0..SAMPLES {
        let t0 = 2.0 * PI * k as f64 / SAMPLES as f64;
        let t1 = 2.0 * PI * (k + 1) as f64 / SAMPLES as f64;
        let sol = solver.solve(rhs, t0, t1, y, h)?;
        y = sol.y;
        h = Some(sol.h_next);
        stats.absorb(&sol.stats);
        worst = worst.max(symplectic_residual(&y));
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::Convergence {
            what: "monodromy integration overflow".into(),
            residual: f64::INFINITY,
        });
    }
    Ok(Monodromy {
        gamma_end: y,
        symplectic_residual: symplectic_residual(&y),
        eigenvalues: eigenvalues(&y)?,
        step_metadata: StepMetadata {
            tol,
            stats,
            max_intermediate_residual: worst,
        },
    })
}

/// Monodromy of the K-form system `B(θ) = [[I, −J], [J, I − r_e(θ)K]]`.
pub fn integrate_fundamental(p: &StabilityParams, tol: f64) -> Result<Monodromy> {
    check_tol(p.e, tol)?;
    let p = *p;
    integrate_coefficient(|t| b_matrix(&p, t), tol)
}

/// Monodromy of the system written with the full matrix D in place of its
/// diagonalization; conjugate to the K-form.
pub fn integrate_d_form(d: &Matrix2<f64>, e: f64, tol: f64) -> Result<Monodromy> {
    check_tol(e, tol)?;
    let d = *d;
    integrate_coefficient(|t| b_matrix_d_form(&d, e, t), tol)
}

/// Scaling-and-squaring exponential with a Taylor kernel.
pub fn matrix_exponential<const N: usize>(a: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    let norm = one_norm(a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a / 2f64.powi(squarings);
    let mut sum = SMatrix::<f64, N, N>::identity();
    let mut term = SMatrix::<f64, N, N>::identity();
    for k in 1..=30 {
        term = term * scaled / k as f64;
        sum += term;
        if one_norm(&term) <= f64::EPSILON * one_norm(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    StronglyLinearlyStable,
    LinearlyStable,
    SpectrallyStableNotLinear,
    Hyperbolic,
    Unstable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::StronglyLinearlyStable => "strongly_linearly_stable",
            Verdict::LinearlyStable => "linearly_stable",
            Verdict::SpectrallyStableNotLinear => "spectrally_stable_not_linear",
            Verdict::Hyperbolic => "hyperbolic",
            Verdict::Unstable => "unstable",
        }
    }

    /// Linearly stable, strongly or not.
    pub fn is_stable(self) -> bool {
        matches!(self, Verdict::StronglyLinearlyStable | Verdict::LinearlyStable)
    }

    pub fn is_spectrally_stable(self) -> bool {
        self.is_stable() || self == Verdict::SpectrallyStableNotLinear
    }

    /// Some eigenvalue off the unit circle; includes the hyperbolic case.
    pub fn is_unstable(self) -> bool {
        !self.is_spectrally_stable()
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub value: Complex64,
    pub modulus: f64,
    pub angle: f64,
    pub on_circle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumVerdict {
    pub verdict: Verdict,
    pub on_circle_count: usize,
    pub semisimple: bool,
    pub details: Vec<EigenRecord>,
}

fn complexify(g: &Matrix4<f64>) -> Matrix4<Complex64> {
    g.map(|v| Complex64::new(v, 0.0))
}

/// Number of singular values of `γ − ωI` below `threshold · ‖γ‖₂`.
pub fn near_kernel_dimension(g: &Matrix4<f64>, omega: Complex64, threshold: f64) -> usize {
    let scale = g.singular_values().max().max(1.0);
    let shifted = complexify(g) - Matrix4::<Complex64>::identity() * omega;
    shifted
        .singular_values()
        .iter()
        .filter(|s| **s < threshold * scale)
        .count()
}

pub fn classify_spectrum(m: &Monodromy, circle_tol: f64) -> SpectrumVerdict {
    classify_matrix(&m.gamma_end, &m.eigenvalues, circle_tol)
}

/// Classification from a matrix and its eigenvalues: on-circle flags,
/// semisimplicity of eigenvalue clusters and the stability verdict.
pub fn classify_matrix(g: &Matrix4<f64>, eigs: &[Complex64; 4], circle_tol: f64) -> SpectrumVerdict {
    let details: Vec<EigenRecord> = eigs
        .iter()
        .map(|z| EigenRecord {
            value: *z,
            modulus: z.norm(),
            angle: z.arg(),
            on_circle: (z.norm() - 1.0).abs() < circle_tol,
        })
        .collect();
    let on_circle_count = details.iter().filter(|d| d.on_circle).count();

    let cluster_tol = circle_tol.sqrt();
    let mut label: Vec<usize> = (0..4).collect();
    for i in 0..4 {
        for j in (i + 1)..4 {
            if (eigs[i] - eigs[j]).norm() < cluster_tol {
                let (a, b) = (label[i], label[j]);
                label.iter_mut().filter(|l| **l == b).for_each(|l| *l = a);
            }
        }
    }
    let mut semisimple = true;
    for root in 0..4 {
        let members: Vec<usize> = (0..4).filter(|&i| label[i] == root).collect();
        if members.len() < 2 {
            continue;
        }
        let centre = members.iter().map(|&i| eigs[i]).sum::<Complex64>() / members.len() as f64;
        if near_kernel_dimension(g, centre, cluster_tol) < members.len() {
            semisimple = false;
        }
    }

    let verdict = if on_circle_count == 0 {
        Verdict::Hyperbolic
    } else if on_circle_count < 4 {
        Verdict::Unstable
    } else if !semisimple {
        Verdict::SpectrallyStableNotLinear
    } else {
        let distinct = (0..4).all(|i| ((i + 1)..4).all(|j| (eigs[i] - eigs[j]).norm() > circle_tol));
        let away = details
            .iter()
            .all(|d| d.angle.abs() > circle_tol && (PI - d.angle.abs()) > circle_tol);
        if distinct && away {
            Verdict::StronglyLinearlyStable
        } else {
            Verdict::LinearlyStable
        }
    };
    SpectrumVerdict {
        verdict,
        on_circle_count,
        semisimple,
        details,
    }
}
