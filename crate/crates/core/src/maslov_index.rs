//! ω-Morse indices of the second-order operator
//! `Ā(α, β, e) = −d²/dt² − I + r_e(t)[(1+α) I + β S(t)]` on 2π-periodic
//! functions twisted by `y(2π) = ω y(0)`.
//!
//! The operator is discretized in the basis `e^{i(k+ρ)t}`, `ω = e^{2πiρ}`.
//! The Fourier coefficients of `r_e` are geometric, so the matrix is exactly
//! banded. Inertia is computed without a full eigendecomposition: the modes
//! with `|k+ρ|` above a cutoff form a positive definite block that is
//! factored by banded Cholesky, and the remaining low modes are handled
//! through their Schur complement.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linearization::StabilityParams;
use crate::monodromy::{integrate_fundamental, near_kernel_dimension, DEFAULT_CIRCLE_TOL, DEFAULT_TOL};

pub const DEFAULT_LEVELS: [usize; 5] = [64, 128, 256, 512, 1024];
/// Relative singular-value threshold for `dim ker(γ − ωI)`.
pub const KERNEL_RANK_TOL: f64 = 1e-6;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Point `ω = e^{2πiρ}` on the unit circle, stored through `ρ ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Omega {
    rho: f64,
}

impl Omega {
    pub fn from_rho(rho: f64) -> Self {
        Omega { rho: rho.rem_euclid(1.0) }
    }

    pub fn one() -> Self {
        Omega { rho: 0.0 }
    }

    pub fn minus_one() -> Self {
        Omega { rho: 0.5 }
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        if ((z.norm() - 1.0).abs()) > 1e-12 {
            return Err(domain(format!("omega must lie on the unit circle, |omega| = {}", z.norm())));
        }
        Ok(Self::from_rho(z.arg() / (2.0 * PI)))
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * self.rho)
    }
}

/// Fourier coefficients `c_k = b^k/√(1−e²)`, `b = −e/(1+√(1−e²))`, of
/// `r_e(t) = 1/(1 + e cos t)` for `k ≥ 0`, cut off once below `1e−17·c₀`.
pub fn resolvent_coefficients(e: f64) -> Vec<f64> {
    let s = (1.0 - e * e).sqrt();
    let b = -e / (1.0 + s);
    let c0 = 1.0 / s;
    let mut out = vec![c0];
    let mut c = c0;
    loop {
        c *= b;
        if c.abs() < 1e-17 * c0 {
            break;
        }
        out.push(c);
    }
    out
}

/// Galerkin matrix of `Ā` with modes `k = −K..=K`; row `2(k+K) + c` holds
/// component `c` of mode `k`. Entries are produced on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinOperator {
    pub params: StabilityParams,
    pub rho: f64,
    pub modes: usize,
    pub coefficients: Vec<f64>,
    /// Lower bandwidth in rows.
    pub bandwidth: usize,
    /// Bound on the multiplication part, `(|1+α| + |β|)/(1−e)`.
    pub potential_bound: f64,
    pub under_resolved: bool,
}

pub fn assemble_operator(p: &StabilityParams, omega: Omega, modes: usize) -> Result<GalerkinOperator> {
    if !(0.0..=0.99).contains(&p.e) {
        return Err(domain(format!("eccentricity must lie in [0, 0.99], got {}", p.e)));
    }
    if modes < 8 {
        return Err(domain(format!("at least 8 modes per side required, got {modes}")));
    }
    let coefficients = resolvent_coefficients(p.e);
    let reach = coefficients.len() + 1;
    let potential_bound = ((1.0 + p.alpha).abs() + p.beta.abs()) / (1.0 - p.e);
    let cut = low_mode_cutoff(potential_bound);
    Ok(GalerkinOperator {
        params: *p,
        rho: omega.rho(),
        modes,
        bandwidth: 2 * reach + 1,
        potential_bound,
        under_resolved: (modes as f64) < cut + reach as f64,
        coefficients,
    })
}

/// Modes with `|k+ρ|` above this value see the operator bounded below by
/// `2 + potential_bound`.
fn low_mode_cutoff(potential_bound: f64) -> f64 {
    (3.0 + 2.0 * potential_bound).sqrt()
}

impl GalerkinOperator {
    pub fn dim(&self) -> usize {
        2 * (2 * self.modes + 1)
    }

    fn coef(&self, j: i64) -> f64 {
        self.coefficients.get(j.unsigned_abs() as usize).copied().unwrap_or(0.0)
    }

    fn mode_of(&self, row: usize) -> (i64, usize) {
        ((row / 2) as i64 - self.modes as i64, row % 2)
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        let (k, c) = self.mode_of(row);
        let (l, d) = self.mode_of(col);
        let m = k - l;
        if m.unsigned_abs() as usize > self.coefficients.len() + 1 {
            return ZERO;
        }
        let p = &self.params;
        let mut v = ZERO;
        if c == d {
            v.re += (1.0 + p.alpha) * self.coef(m);
            if m == 0 {
                let nu = k as f64 + self.rho;
                v.re += nu * nu - 1.0;
            }
        }
        let (lo, hi) = (self.coef(m - 2), self.coef(m + 2));
        match (c, d) {
            (0, 0) => v.re += p.beta * 0.5 * (lo + hi),
            (1, 1) => v.re -= p.beta * 0.5 * (lo + hi),
            _ => v.im -= p.beta * 0.5 * (lo - hi),
        }
        v
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }

    pub fn kernel_tol(&self) -> f64 {
        1e-7 * self.potential_bound.max(1.0)
    }

    fn split(&self) -> (Vec<usize>, Vec<usize>) {
        let cut = low_mode_cutoff(self.potential_bound);
        let (mut low, mut high) = (Vec::new(), Vec::new());
        for row in 0..self.dim() {
            let (k, _) = self.mode_of(row);
            if (k as f64 + self.rho).abs() <= cut {
                low.push(row);
            } else {
                high.push(row);
            }
        }
        (low, high)
    }

    /// Lower bound of the high-mode block.
    fn high_floor(&self, high: &[usize]) -> f64 {
        high.iter()
            .map(|&r| {
                let nu = self.mode_of(r).0 as f64 + self.rho;
                nu * nu
            })
            .fold(f64::INFINITY, f64::min)
            - 1.0
            - self.potential_bound
    }

    /// Eigenvalues of the pencil `S(σ) v = μ W(σ) v`, where `S(σ)` is the
    /// Schur complement of the high block of `G − σI` and
    /// `W(σ) = I + Xᴴ X`, `X = (G_hh − σ)⁻¹ G_hl`. Near `σ` they agree with
    /// the eigenvalues of `G − σI` to second order; at `σ` their signs give
    /// the exact inertia of `G − σI`.
    fn pencil(&self, sigma: f64) -> Result<Vec<f64>> {
        let (low, high) = self.split();
        let m = low.len();
        let w = self.bandwidth;
        let nh = high.len();

        let mut chol = BandCholesky::new(nh, w);
        for (i, &ri) in high.iter().enumerate() {
            for j in i.saturating_sub(w)..=i {
                let mut v = self.entry(ri, high[j]);
                if i == j {
                    v.re -= sigma;
                }
                chol.set(i, j, v);
            }
        }
        chol.factor()?;

        // Coupling block G_hl, nonzero only within the band.
        let mut y = DMatrix::<Complex64>::zeros(nh, m);
        for (i, &ri) in high.iter().enumerate() {
            for (j, &rj) in low.iter().enumerate() {
                if ri.abs_diff(rj) <= w {
                    y[(i, j)] = self.entry(ri, rj);
                }
            }
        }
        for j in 0..m {
            chol.forward(&mut y.column_mut(j));
        }
        let mut s = DMatrix::from_fn(m, m, |i, j| {
            let mut v = self.entry(low[i], low[j]);
            if i == j {
                v.re -= sigma;
            }
            v
        });
        if nh > 0 {
            s -= y.adjoint() * &y;
        }
        let mut x = y;
        for j in 0..m {
            chol.backward(&mut x.column_mut(j));
        }
        let mut wmat = DMatrix::<Complex64>::identity(m, m);
        if nh > 0 {
            wmat += x.adjoint() * &x;
        }
        hermitize(&mut s);
        hermitize(&mut wmat);

        let c = wmat.cholesky().ok_or_else(|| Error::Convergence {
            what: "Cholesky of the Schur pencil weight".into(),
            residual: f64::NAN,
        })?;
        let l = c.l();
        let l_inv = l
            .clone()
            .solve_lower_triangular(&DMatrix::identity(m, m))
            .ok_or_else(|| Error::Singular("pencil weight factor".into()))?;
        let mut t = &l_inv * s * l_inv.adjoint();
        hermitize(&mut t);
        let mut ev: Vec<f64> = SymmetricEigen::new(t).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// `(φ, ν, gap)`: counts below `−tol` and within `[−tol, tol]`, and the
    /// smallest magnitude outside the kernel band.
    pub fn inertia(&self, tol: f64) -> Result<(usize, usize, f64)> {
        let ev = self.pencil(0.0)?;
        let phi = ev.iter().filter(|v| **v < -tol).count();
        let nu = ev.iter().filter(|v| v.abs() <= tol).count();
        let (low, high) = self.split();
        let mut gap = ev.iter().filter(|v| v.abs() > tol).map(|v| v.abs()).fold(f64::INFINITY, f64::min);
        if !high.is_empty() && low.len() < self.dim() {
            gap = gap.min(self.high_floor(&high));
        }
        Ok((phi, nu, gap))
    }

    /// Smallest eigenvalue by Newton iteration on the Schur pencil,
    /// approaching from above.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (_, high) = self.split();
        let ceiling = if high.is_empty() { f64::INFINITY } else { self.high_floor(&high) - 0.5 };
        let mut lambda = 0.0f64.min(ceiling);
        for _ in 0..60 {
            let mu = self.pencil(lambda)?[0];
            let next = (lambda + mu).min(ceiling);
            if (next - lambda).abs() <= 1e-13 * lambda.abs().max(1.0) {
                return Ok(next);
            }
            lambda = next;
        }
        Ok(lambda)
    }
}

fn hermitize(a: &mut DMatrix<Complex64>) {
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)].im = 0.0;
        for j in 0..i {
            let v = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            a[(i, j)] = v;
            a[(j, i)] = v.conj();
        }
    }
}

/// Lower Cholesky factor of a Hermitian positive definite band matrix.
struct BandCholesky {
    n: usize,
    w: usize,
    data: Vec<Complex64>,
}

impl BandCholesky {
    fn new(n: usize, w: usize) -> Self {
        BandCholesky { n, w, data: vec![ZERO; n * (w + 1)] }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.w + 1) + (j + self.w - i)
    }

    fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[self.idx(i, j)]
    }

    fn factor(&mut self) -> Result<()> {
        let w = self.w;
        for j in 0..self.n {
            let lo = j.saturating_sub(w);
            let mut d = self.get(j, j).re;
            for k in lo..j {
                d -= self.get(j, k).norm_sqr();
            }
            if !(d > 0.0) {
                return Err(Error::Convergence {
                    what: "banded Cholesky of the high-mode block".into(),
                    residual: d,
                });
            }
            let d = d.sqrt();
            let jj = self.idx(j, j);
            self.data[jj] = Complex64::new(d, 0.0);
            for i in (j + 1)..(j + w + 1).min(self.n) {
                let mut v = self.get(i, j);
                for k in i.saturating_sub(w)..j {
                    v -= self.get(i, k) * self.get(j, k).conj();
                }
                let ij = self.idx(i, j);
                self.data[ij] = v / d;
            }
        }
        Ok(())
    }

    /// `x ← L⁻¹ x`.
    fn forward<S>(&self, x: &mut nalgebra::Matrix<Complex64, nalgebra::Dyn, nalgebra::U1, S>)
    where
        S: nalgebra::StorageMut<Complex64, nalgebra::Dyn, nalgebra::U1>,
    {
        for i in 0..self.n {
            let mut v = x[i];
            for k in i.saturating_sub(self.w)..i {
                v -= self.get(i, k) * x[k];
            }
            x[i] = v / self.get(i, i).re;
        }
    }

    /// `x ← L⁻ᴴ x`.
    fn backward<S>(&self, x: &mut nalgebra::Matrix<Complex64, nalgebra::Dyn, nalgebra::U1, S>)
    where
        S: nalgebra::StorageMut<Complex64, nalgebra::Dyn, nalgebra::U1>,
    {
        for i in (0..self.n).rev() {
            let mut v = x[i];
            for k in (i + 1)..(i + self.w + 1).min(self.n) {
                v -= self.get(k, i).conj() * x[k];
            }
            x[i] = v / self.get(i, i).re;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    pub modes: usize,
    pub phi: usize,
    pub nu: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    pub omega: Complex64,
    pub rho: f64,
    pub phi: usize,
    pub nu: usize,
    pub num_modes: usize,
    pub min_eigenvalue: f64,
    pub kernel_gap: f64,
    pub kernel_tol: f64,
    pub stable_under_refinement: bool,
    pub under_resolved: bool,
    pub levels: Vec<LevelCounts>,
}

pub fn morse_index(p: &StabilityParams, omega: Omega) -> Result<IndexResult> {
    morse_index_with(p, omega, &DEFAULT_LEVELS)
}

/// Counts at increasing mode levels until two consecutive levels agree on
/// both `φ` and `ν`.
pub fn morse_index_with(p: &StabilityParams, omega: Omega, levels: &[usize]) -> Result<IndexResult> {
    let mut history: Vec<LevelCounts> = Vec::new();
    for &modes in levels {
        let op = assemble_operator(p, omega, modes)?;
        let tol = op.kernel_tol();
        let (phi, nu, gap) = op.inertia(tol)?;
        let agreed = history.last().is_some_and(|prev| prev.phi == phi && prev.nu == nu);
        history.push(LevelCounts { modes, phi, nu });
        if agreed {
            return Ok(IndexResult {
                omega: omega.value(),
                rho: omega.rho(),
                phi,
                nu,
                num_modes: modes,
                min_eigenvalue: op.min_eigenvalue()?,
                kernel_gap: gap,
                kernel_tol: tol,
                stable_under_refinement: true,
                under_resolved: op.under_resolved,
                levels: history,
            });
        }
    }
    let n = history.len();
    let last = history.last().map(|c| (c.phi, c.nu)).unwrap_or_default();
    let previous = if n >= 2 { (history[n - 2].phi, history[n - 2].nu) } else { last };
    Err(Error::IndexUnstable {
        max_modes: levels.last().copied().unwrap_or(0),
        last,
        previous,
    })
}

/// True iff `Ā` is positive definite (smallest eigenvalue above the kernel
/// tolerance) at `omega_samples` uniformly spaced points of the circle.
pub fn positivity_check(p: &StabilityParams, omega_samples: usize) -> Result<bool> {
    if omega_samples < 16 {
        return Err(domain(format!("at least 16 omega samples required, got {omega_samples}")));
    }
    let results: Result<Vec<bool>> = (0..omega_samples)
        .into_par_iter()
        .map(|j| {
            let r = morse_index(p, Omega::from_rho(j as f64 / omega_samples as f64))?;
            Ok(r.phi == 0 && r.nu == 0 && r.min_eigenvalue > r.kernel_tol)
        })
        .collect();
    Ok(results?.into_iter().all(|b| b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuCheck {
    pub rho: f64,
    pub nu_operator: usize,
    pub nu_monodromy: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexJump {
    pub rho_lo: f64,
    pub rho_hi: f64,
    /// `φ(ρ_hi) − φ(ρ_lo)`.
    pub delta: i64,
    /// On-circle eigenvalues of the monodromy with argument in the bin.
    pub eigenvalues_in_bin: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub nu_checks: Vec<NuCheck>,
    pub jumps: Vec<IndexJump>,
    pub phi_1: usize,
    pub phi_m1: usize,
    /// On-circle eigenvalues with argument in the open interval (0, π).
    pub upper_circle_eigenvalues: usize,
    pub nu_consistent: bool,
    pub jumps_consistent: bool,
}

impl ConsistencyReport {
    pub fn consistent(&self) -> bool {
        self.nu_consistent && self.jumps_consistent
    }
}

/// Cross-checks the operator indices against the monodromy: kernel
/// dimensions at sampled `ω`, and the location and size of the jumps of
/// `φ_ω` along the upper half circle.
pub fn index_monodromy_consistency(p: &StabilityParams) -> Result<ConsistencyReport> {
    let mono = integrate_fundamental(p, DEFAULT_TOL)?;
    let g = mono.gamma_end;

    let nu_rhos: Vec<f64> = (0..16).map(|j| j as f64 / 16.0).collect();
    let nu_checks: Result<Vec<NuCheck>> = nu_rhos
        .par_iter()
        .map(|&rho| {
            let om = Omega::from_rho(rho);
            let r = morse_index(p, om)?;
            Ok(NuCheck {
                rho,
                nu_operator: r.nu,
                nu_monodromy: near_kernel_dimension(&g, om.value(), KERNEL_RANK_TOL),
            })
        })
        .collect();
    let nu_checks = nu_checks?;

    let samples = 33;
    let path: Vec<f64> = (0..samples).map(|j| 0.5 * j as f64 / (samples - 1) as f64).collect();
    let phis: Result<Vec<usize>> = path
        .par_iter()
        .map(|&rho| Ok(morse_index(p, Omega::from_rho(rho))?.phi))
        .collect();
    let phis = phis?;

    let circle_rhos: Vec<f64> = mono
        .eigenvalues
        .iter()
        .filter(|z| (z.norm() - 1.0).abs() < DEFAULT_CIRCLE_TOL && z.im >= -DEFAULT_CIRCLE_TOL)
        .map(|z| z.arg().abs() / (2.0 * PI))
        .collect();
    let upper = circle_rhos
        .iter()
        .filter(|r| **r > DEFAULT_CIRCLE_TOL && **r < 0.5 - DEFAULT_CIRCLE_TOL)
        .count();

    let slack = 1e-6;
    let mut jumps = Vec::new();
    let mut jumps_consistent = true;
    for i in 1..samples {
        let delta = phis[i] as i64 - phis[i - 1] as i64;
        if delta == 0 {
            continue;
        }
        let (lo, hi) = (path[i - 1], path[i]);
        let count = circle_rhos.iter().filter(|r| **r >= lo - slack && **r <= hi + slack).count();
        if (delta.unsigned_abs() as usize) > count {
            jumps_consistent = false;
        }
        jumps.push(IndexJump {
            rho_lo: lo,
            rho_hi: hi,
            delta,
            eigenvalues_in_bin: count,
        });
    }

    Ok(ConsistencyReport {
        nu_consistent: nu_checks.iter().all(|c| c.nu_operator == c.nu_monodromy),
        nu_checks,
        jumps,
        phi_1: phis[0],
        phi_m1: phis[samples - 1],
        upper_circle_eigenvalues: upper,
        jumps_consistent,
    })
}
