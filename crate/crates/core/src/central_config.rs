//! Collinear central configurations of the primaries and the off-line
//! equilibrium site of the massless body.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::roots::{brentq, first_sign_change, log_space};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MassKind {
    Collinear,
    Polygon,
}

/// Masses of the primaries, rescaled on construction so that they sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassSystem {
    masses: Vec<f64>,
    kind: MassKind,
}

impl MassSystem {
    pub fn collinear(raw: &[f64]) -> Result<Self> {
        Self::normalized(raw.to_vec(), MassKind::Collinear)
    }

    /// Central mass `m0` first, followed by `n` vertex masses `m`.
    pub fn polygon(n: usize, m0: f64, m: f64) -> Result<Self> {
        if n < 2 {
            return Err(domain(format!("polygon needs n >= 2, got {n}")));
        }
        let mut masses = vec![m0];
        masses.extend(std::iter::repeat(m).take(n));
        Self::normalized(masses, MassKind::Polygon)
    }

    fn normalized(mut masses: Vec<f64>, kind: MassKind) -> Result<Self> {
        if masses.is_empty() {
            return Err(domain("empty mass list"));
        }
        if let Some(bad) = masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(domain(format!("primary masses must be positive, got {bad}")));
        }
        let total: f64 = masses.iter().sum();
        masses.iter_mut().for_each(|m| *m /= total);
        Ok(MassSystem { masses, kind })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn kind(&self) -> MassKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }
}

/// Normalized planar configuration: centre of mass at the origin and
/// `Σ mᵢ|aᵢ|² = 1`, so that the multiplier `μ` equals the potential `U(a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub masses: Vec<f64>,
    pub primary_positions: Vec<Vector2<f64>>,
    pub massless_position: Option<Vector2<f64>>,
    pub mu: f64,
    pub cc_residual: f64,
    pub inertia_residual: f64,
}

impl Configuration {
    /// Translates to the centre of mass, rescales to unit inertia and
    /// evaluates `μ = U(a)` and the central-configuration defect.
    pub fn from_primaries(masses: &[f64], positions: &[Vector2<f64>]) -> Result<Self> {
        if masses.len() != positions.len() {
            return Err(domain("mass and position lists differ in length"));
        }
        let sys = MassSystem::normalized(masses.to_vec(), MassKind::Collinear)?;
        let masses = sys.masses;
        let com: Vector2<f64> = masses.iter().zip(positions).map(|(m, a)| *m * a).sum();
        let mut pos: Vec<Vector2<f64>> = positions.iter().map(|a| a - com).collect();
        let inertia: f64 = masses.iter().zip(&pos).map(|(m, a)| m * a.norm_squared()).sum();
        if !(inertia > 0.0) {
            return Err(Error::Singular("all primaries coincide".into()));
        }
        let s = inertia.sqrt().recip();
        pos.iter_mut().for_each(|a| *a *= s);
        let mu = potential(&masses, &pos)?;
        let mut cfg = Configuration {
            masses,
            primary_positions: pos,
            massless_position: None,
            mu,
            cc_residual: 0.0,
            inertia_residual: 0.0,
        };
        cfg.refresh_residuals();
        Ok(cfg)
    }

    pub fn with_massless(&self, p: Vector2<f64>) -> Self {
        let mut cfg = self.clone();
        cfg.massless_position = Some(p);
        cfg.refresh_residuals();
        cfg
    }

    fn refresh_residuals(&mut self) {
        let mut worst: f64 = 0.0;
        for (i, a) in self.primary_positions.iter().enumerate() {
            let acc = self.field_at(a, Some(i));
            worst = worst.max((acc + self.mu * a).norm());
        }
        if let Some(p) = self.massless_position {
            worst = worst.max(self.massless_defect(&p).norm());
        }
        self.cc_residual = worst;
        let com: Vector2<f64> = self
            .masses
            .iter()
            .zip(&self.primary_positions)
            .map(|(m, a)| *m * a)
            .sum();
        let inertia: f64 = self
            .masses
            .iter()
            .zip(&self.primary_positions)
            .map(|(m, a)| m * a.norm_squared())
            .sum();
        self.inertia_residual = com.norm().max((inertia - 1.0).abs());
    }

    /// `Σⱼ mⱼ (aⱼ − p)/|aⱼ − p|³`, skipping body `skip`.
    pub fn field_at(&self, p: &Vector2<f64>, skip: Option<usize>) -> Vector2<f64> {
        let mut acc = Vector2::zeros();
        for (j, (m, a)) in self.masses.iter().zip(&self.primary_positions).enumerate() {
            if Some(j) == skip {
                continue;
            }
            let d = a - p;
            let r = d.norm();
            acc += *m * d / (r * r * r);
        }
        acc
    }

    /// Central-configuration defect of a massless body at `p`.
    pub fn massless_defect(&self, p: &Vector2<f64>) -> Vector2<f64> {
        self.field_at(p, None) + self.mu * p
    }

    pub fn is_on_x_axis(&self) -> bool {
        self.primary_positions.iter().all(|a| a.y.abs() < 1e-12)
    }
}

/// Newtonian potential `U(a) = Σ_{i<j} mᵢmⱼ/|aᵢ − aⱼ|`.
pub fn potential(masses: &[f64], pos: &[Vector2<f64>]) -> Result<f64> {
    let mut u = 0.0;
    for i in 0..masses.len() {
        for j in (i + 1)..masses.len() {
            let r = (pos[i] - pos[j]).norm();
            if r < 1e-12 {
                return Err(Error::Singular(format!("primaries {i} and {j} collide")));
            }
            u += masses[i] * masses[j] / r;
        }
    }
    Ok(u)
}

pub(crate) fn euler_quintic_coefficients(m1: f64, m2: f64, m3: f64) -> [f64; 6] {
    [
        -(m1 + m2),
        -(3.0 * m1 + 2.0 * m2),
        -(3.0 * m1 + m2),
        3.0 * m3 + m2,
        3.0 * m3 + 2.0 * m2,
        m3 + m2,
    ]
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, ck| acc * x + ck)
}

/// Unique positive root of the Euler quintic: the ratio of the gaps
/// `|q₂ − q₁| : |q₃ − q₂| = x : 1` for masses `m1, m2, m3` in that order.
pub fn solve_euler_quintic(m1: f64, m2: f64, m3: f64) -> Result<f64> {
    for m in [m1, m2, m3] {
        if !(m.is_finite() && m > 0.0) {
            return Err(domain(format!("quintic masses must be positive, got {m}")));
        }
    }
    let c = euler_quintic_coefficients(m1, m2, m3);
    let p = |x: f64| horner(&c, x);
    let mut hi = 100.0;
    let bracket = loop {
        if let Some(b) = first_sign_change(p, &log_space(1e-8, hi, 10_000)) {
            break b;
        }
        if hi > 1e8 {
            return Err(Error::Convergence {
                what: "Euler quintic bracketing".into(),
                residual: p(hi).abs(),
            });
        }
        hi *= 100.0;
    };
    let x = if bracket.0 == bracket.1 {
        bracket.0
    } else {
        brentq(p, bracket.0, bracket.1, 0.0, 1e-15, 500).ok_or_else(|| Error::Convergence {
            what: "Euler quintic Brent iteration".into(),
            residual: f64::NAN,
        })?
    };
    let scale = c.iter().fold(0.0f64, |a, b| a.max(b.abs())) * x.max(1.0).powi(5);
    let residual = p(x).abs() / scale;
    if residual > 1e-13 {
        return Err(Error::Convergence {
            what: "Euler quintic".into(),
            residual,
        });
    }
    Ok(x)
}

/// Euler collinear configuration of three primaries in the order given.
pub fn collinear_three_primaries(m: &MassSystem) -> Result<Configuration> {
    if m.kind() != MassKind::Collinear || m.len() != 3 {
        return Err(domain("collinear_three_primaries needs a collinear system of 3 masses"));
    }
    let ms = m.masses();
    let x = solve_euler_quintic(ms[0], ms[1], ms[2])?;
    let pos = [
        Vector2::new(0.0, 0.0),
        Vector2::new(x, 0.0),
        Vector2::new(1.0 + x, 0.0),
    ];
    Configuration::from_primaries(ms, &pos)
}

fn chain_positions(u: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0, 1.0];
    for v in u {
        let last = x[x.len() - 1];
        x.push(last + v.exp());
    }
    x
}

/// `ln U + ½ ln I` of a chain with unit first gap and log gaps `u`, with its
/// gradient. Scale invariant and coercive on the ordered chain, so its only
/// critical point is the minimizer, which is Moulton's configuration.
fn moulton_objective(masses: &[f64], u: &[f64]) -> (f64, Vec<f64>) {
    let x = chain_positions(u);
    let k = x.len();
    let total: f64 = masses.iter().sum();
    let c = masses.iter().zip(&x).map(|(m, xi)| m * xi).sum::<f64>() / total;
    let inertia: f64 = masses.iter().zip(&x).map(|(m, xi)| m * (xi - c).powi(2)).sum();
    let mut pot = 0.0;
    let mut du = vec![0.0; k];
    for i in 0..k {
        for j in i + 1..k {
            let d = x[j] - x[i];
            let w = masses[i] * masses[j];
            pot += w / d;
            du[i] += w / (d * d);
            du[j] -= w / (d * d);
        }
    }
    let gx: Vec<f64> = (0..k).map(|i| du[i] / pot + masses[i] * (x[i] - c) / inertia).collect();
    // x_p depends on gap q (q ≥ 1) through every p > q
    let mut grad = vec![0.0; u.len()];
    let mut tail: f64 = 0.0;
    for p in (2..k).rev() {
        tail += gx[p];
        grad[p - 2] = u[p - 2].exp() * tail;
    }
    (pot.ln() + 0.5 * inertia.ln(), grad)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

/// Moulton's collinear central configuration with the masses arranged left
/// to right as `ordering[0], ordering[1], …`.
pub fn moulton_collinear(m: &MassSystem, ordering: &[usize]) -> Result<Configuration> {
    let k = m.len();
    if k < 2 {
        return Err(domain("Moulton configuration needs at least two masses"));
    }
    let mut seen = vec![false; k];
    if ordering.len() != k || ordering.iter().any(|&i| i >= k || std::mem::replace(&mut seen[i], true)) {
        return Err(domain("ordering must be a permutation of the mass indices"));
    }
    let masses: Vec<f64> = ordering.iter().map(|&i| m.masses()[i]).collect();
    let mut u = vec![0.0; k.saturating_sub(2)];

    if k > 2 {
        let n = k - 2;
        let (mut fval, mut g) = moulton_objective(&masses, &u);
        let mut converged = false;
        for _ in 0..200 {
            let gnorm = max_abs(&g);
            if gnorm < 1e-13 {
                converged = true;
                break;
            }
            let h = 1e-5;
            let mut hess = nalgebra::DMatrix::<f64>::zeros(n, n);
            for j in 0..n {
                let mut up = u.clone();
                let mut um = u.clone();
                up[j] += h;
                um[j] -= h;
                let gp = moulton_objective(&masses, &up).1;
                let gm = moulton_objective(&masses, &um).1;
                for i in 0..n {
                    hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
                }
            }
            let hess = (&hess + hess.transpose()) * 0.5;
            let rhs = nalgebra::DVector::from_iterator(n, g.iter().map(|v| -v));
            // Levenberg shift until the model is convex
            let mut shift = 0.0;
            let step = loop {
                let shifted = &hess + nalgebra::DMatrix::identity(n, n) * shift;
                if let Some(ch) = shifted.cholesky() {
                    break ch.solve(&rhs);
                }
                shift = if shift == 0.0 { 1e-8 * hess.amax().max(1.0) } else { shift * 10.0 };
            };
            let slope: f64 = step.iter().zip(&g).map(|(d, gi)| d * gi).sum();
            let mut t = (1.0 / step.amax()).min(1.0);
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
                let (ft, gt) = moulton_objective(&masses, &trial);
                if ft.is_finite() && ft < fval && ft <= fval + 1e-4 * t * slope {
                    u = trial;
                    fval = ft;
                    g = gt;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // near the minimum the objective stops resolving decreases;
                // plain Newton on the gradient finishes the job
                let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
                let (ft, gt) = moulton_objective(&masses, &trial);
                if gnorm < 1e-6 && max_abs(&gt) < gnorm {
                    u = trial;
                    fval = ft;
                    g = gt;
                } else {
                    converged = gnorm < 1e-9;
                    break;
                }
            }
        }
        if !converged {
            return Err(Error::Convergence {
                what: "Moulton minimization".into(),
                residual: max_abs(&g),
            });
        }
    }

    let mut pos = vec![Vector2::zeros(); k];
    let mut x = 0.0;
    for (p, &body) in ordering.iter().enumerate() {
        if p > 0 {
            x += if p == 1 { 1.0 } else { u[p - 2].exp() };
        }
        pos[body] = Vector2::new(x, 0.0);
    }
    let cfg = Configuration::from_primaries(m.masses(), &pos)?;
    if cfg.cc_residual > 1e-10 {
        return Err(Error::Convergence {
            what: "Moulton configuration residual".into(),
            residual: cfg.cc_residual,
        });
    }
    Ok(cfg)
}

/// Equilibrium site of the massless body near `guess`, found by damped
/// Newton iteration on `Σⱼ mⱼ(aⱼ − p)/|aⱼ − p|³ + μp = 0`.
pub fn restricted_position(config: &Configuration, guess: Vector2<f64>) -> Result<Configuration> {
    let collinear = config.is_on_x_axis();
    if collinear && guess.y.abs() < 1e-8 {
        return Err(domain("initial guess lies on the line of the primaries"));
    }
    let jacobian = |p: &Vector2<f64>| {
        let mut jac = Matrix2::identity() * config.mu;
        for (m, a) in config.masses.iter().zip(&config.primary_positions) {
            let d = a - p;
            let r2 = d.norm_squared();
            let r = r2.sqrt();
            let r3 = r2 * r;
            jac += *m * (3.0 * d * d.transpose() / (r3 * r2) - Matrix2::identity() / r3);
        }
        jac
    };
    let mut p = if collinear { off_line_start(config, guess) } else { guess };
    let mut f = config.massless_defect(&p);
    let mut fnorm = f.norm();
    let mut converged = fnorm < 1e-13;
    for _ in 0..200 {
        if converged {
            break;
        }
        let step = jacobian(&p).lu().solve(&(-f)).ok_or_else(|| Error::Convergence {
            what: "restricted_position (singular Jacobian)".into(),
            residual: fnorm,
        })?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = p + t * step;
            let ft = config.massless_defect(&trial);
            let nt = ft.norm();
            if nt.is_finite() && nt < fnorm {
                p = trial;
                f = ft;
                fnorm = nt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if fnorm < 1e-13 || (!accepted && fnorm < 1e-11) {
            converged = true;
        } else if !accepted {
            break;
        }
    }
    if !converged || !p.iter().all(|v| v.is_finite()) {
        return Err(Error::Convergence {
            what: "restricted_position Newton".into(),
            residual: fnorm,
        });
    }
    if collinear && p.y.abs() < 1e-8 {
        return Err(Error::Degenerate(format!(
            "massless body converged onto the line of the primaries at x = {}",
            p.x
        )));
    }
    let cfg = config.with_massless(p);
    if cfg.cc_residual > 1e-10 {
        return Err(Error::Convergence {
            what: "restricted_position residual".into(),
            residual: cfg.cc_residual,
        });
    }
    if collinear {
        let s: f64 = config
            .masses
            .iter()
            .zip(&config.primary_positions)
            .map(|(m, a)| m / (a - p).norm().powi(3))
            .sum();
        if (s - config.mu).abs() > 1e-9 {
            return Err(Error::Convergence {
                what: "multiplier identity at the massless site".into(),
                residual: (s - config.mu).abs(),
            });
        }
    }
    Ok(cfg)
}

/// For primaries on the x-axis the off-line equations reduce to
/// `Σ mⱼ/rⱼ³ = μ` and `Σ mⱼ aⱼ/rⱼ³ = 0`. Solving these in `(x, ln|y|)` keeps
/// the iterate off the line, where the full system has its own roots.
fn off_line_start(config: &Configuration, guess: Vector2<f64>) -> Vector2<f64> {
    let sign = guess.y.signum();
    let eval = |x: f64, y: f64| {
        let mut f = Vector2::new(-config.mu, 0.0);
        let mut jac = Matrix2::zeros();
        for (m, a) in config.masses.iter().zip(&config.primary_positions) {
            let dx = a.x - x;
            let r2 = dx * dx + y * y;
            let r3 = r2 * r2.sqrt();
            let r5 = r3 * r2;
            f += Vector2::new(m / r3, m * a.x / r3);
            // columns: d/dx and d/d(ln y) = y d/dy
            jac[(0, 0)] += 3.0 * m * dx / r5;
            jac[(0, 1)] -= 3.0 * m * y * y / r5;
            jac[(1, 0)] += 3.0 * m * a.x * dx / r5;
            jac[(1, 1)] -= 3.0 * m * a.x * y * y / r5;
        }
        (f, jac)
    };
    let (mut x, mut s) = (guess.x, guess.y.abs().ln());
    let (mut f, mut jac) = eval(x, s.exp());
    for _ in 0..200 {
        if f.norm() < 1e-14 * config.mu.max(1.0) {
            break;
        }
        let Some(step) = jac.lu().solve(&(-f)) else { break };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let (ft, jt) = eval(x + t * step.x, (s + t * step.y).exp());
            if ft.norm().is_finite() && ft.norm() < f.norm() {
                x += t * step.x;
                s += t * step.y;
                (f, jac) = (ft, jt);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Vector2::new(x, sign * s.exp())
}

/// Root `y ∈ [1, √3]` of `(1−m₂)/(y²+1)^{3/2} + m₂/y³ = (1+7m₂)/8` for the
/// symmetric chain `m₁ = m₃`.
pub fn solve_symmetric_y(m2: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m2) {
        return Err(domain(format!("m2 must lie in [0, 1), got {m2}")));
    }
    let f = |y: f64| (1.0 - m2) / (y * y + 1.0).powf(1.5) + m2 / (y * y * y) - (1.0 + 7.0 * m2) / 8.0;
    let hi = 3f64.sqrt();
    if m2 == 0.0 {
        return Ok(hi);
    }
    let y = brentq(f, 1.0, hi, 1e-16, 4.0 * f64::EPSILON, 500).ok_or_else(|| {
        Error::Existence(format!("symmetric y-equation has no root in [1, sqrt 3] at m2 = {m2}"))
    })?;
    let residual = f(y).abs();
    if residual > 1e-13 {
        return Err(Error::Convergence {
            what: "symmetric y-equation".into(),
            residual,
        });
    }
    Ok(y)
}

/// Symmetric chain `m₁ = m₃ = (1−m₂)/2` with the massless body above the
/// middle primary.
pub fn symmetric_configuration(m2: f64) -> Result<Configuration> {
    if !(m2 > 0.0 && m2 < 1.0) {
        return Err(domain(format!("symmetric configuration needs 0 < m2 < 1, got {m2}")));
    }
    let y = solve_symmetric_y(m2)?;
    let m1 = (1.0 - m2) / 2.0;
    let sys = MassSystem::collinear(&[m1, m2, m1])?;
    let cfg = collinear_three_primaries(&sys)?;
    Ok(cfg.with_massless(Vector2::new(0.0, y / (1.0 - m2).sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_normalized(cfg: &Configuration) {
        assert!(cfg.inertia_residual < 1e-12, "inertia {}", cfg.inertia_residual);
        assert!(cfg.cc_residual < 1e-10, "cc {}", cfg.cc_residual);
    }

    #[test]
    fn quintic_symmetric_root() {
        assert!((solve_euler_quintic(0.2, 0.6, 0.2).unwrap() - 1.0).abs() < 1e-14);
        let t = 1.0 / 3.0;
        assert!((solve_euler_quintic(t, t, t).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quintic_rejects_bad_mass() {
        assert!(matches!(solve_euler_quintic(0.0, 0.5, 0.5), Err(Error::Domain(_))));
        assert!(matches!(solve_euler_quintic(-1.0, 0.5, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn quintic_unique_positive_root() {
        let c = euler_quintic_coefficients(0.5, 0.3, 0.2);
        let x = solve_euler_quintic(0.5, 0.3, 0.2).unwrap();
        let pts = log_space(1e-6, 100.0, 20_000);
        let changes = pts
            .windows(2)
            .filter(|w| horner(&c, w[0]) * horner(&c, w[1]) < 0.0)
            .count();
        assert_eq!(changes, 1);
        assert!(horner(&c, x).abs() < 1e-13 * 3.0);
    }

    #[test]
    fn symmetric_positions() {
        let m2 = 0.4;
        let m1 = (1.0 - m2) / 2.0;
        let cfg = collinear_three_primaries(&MassSystem::collinear(&[m1, m2, m1]).unwrap()).unwrap();
        let s = (1.0 - m2).powf(-0.5);
        assert!((cfg.primary_positions[0] - Vector2::new(-s, 0.0)).norm() < 1e-13);
        assert!(cfg.primary_positions[1].norm() < 1e-13);
        assert!((cfg.primary_positions[2] - Vector2::new(s, 0.0)).norm() < 1e-13);
        assert_normalized(&cfg);
    }

    #[test]
    fn unequal_triple_residual() {
        let cfg = collinear_three_primaries(&MassSystem::collinear(&[0.5, 0.3, 0.2]).unwrap()).unwrap();
        assert_normalized(&cfg);
    }

    #[test]
    fn moulton_two_bodies() {
        let sys = MassSystem::collinear(&[0.25, 0.75]).unwrap();
        let cfg = moulton_collinear(&sys, &[0, 1]).unwrap();
        let d = (cfg.primary_positions[1] - cfg.primary_positions[0]).norm();
        // m1 m2 d² = 1 under unit inertia.
        assert!((d - (1.0f64 / (0.25 * 0.75)).sqrt()).abs() < 1e-13);
        assert!((cfg.mu - 0.25 * 0.75 / d).abs() < 1e-14);
    }

    #[test]
    fn moulton_four_equal_is_symmetric() {
        let sys = MassSystem::collinear(&[1.0; 4]).unwrap();
        let cfg = moulton_collinear(&sys, &[0, 1, 2, 3]).unwrap();
        assert_normalized(&cfg);
        let x: Vec<f64> = cfg.primary_positions.iter().map(|a| a.x).collect();
        assert!((x[0] + x[3]).abs() < 1e-12 && (x[1] + x[2]).abs() < 1e-12);
    }

    #[test]
    fn moulton_matches_euler() {
        let sys = MassSystem::collinear(&[0.5, 0.3, 0.2]).unwrap();
        let a = moulton_collinear(&sys, &[0, 1, 2]).unwrap();
        let b = collinear_three_primaries(&sys).unwrap();
        for (p, q) in a.primary_positions.iter().zip(&b.primary_positions) {
            assert!((p - q).norm() < 1e-10);
        }
    }

    #[test]
    fn moulton_respects_ordering() {
        let sys = MassSystem::collinear(&[0.5, 0.3, 0.2]).unwrap();
        let cfg = moulton_collinear(&sys, &[2, 0, 1]).unwrap();
        let x: Vec<f64> = cfg.primary_positions.iter().map(|a| a.x).collect();
        assert!(x[2] < x[0] && x[0] < x[1]);
        assert!(moulton_collinear(&sys, &[0, 0, 1]).is_err());
    }

    #[test]
    fn symmetric_y_anchors() {
        assert!((solve_symmetric_y(0.0).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        assert!((solve_symmetric_y(1.0 - 1e-9).unwrap() - 1.0).abs() < 1e-3);
        assert!(solve_symmetric_y(0.3).unwrap() > solve_symmetric_y(0.6).unwrap());
        assert!(solve_symmetric_y(1.0).is_err());
        assert!(solve_symmetric_y(-0.1).is_err());
    }

    #[test]
    fn restricted_symmetric_site() {
        for m2 in [0.1, 0.5, 0.854, 0.95] {
            let cfg = symmetric_configuration(m2).unwrap();
            let base = Configuration { massless_position: None, ..cfg.clone() };
            let sol = restricted_position(&base, Vector2::new(0.0, 1.0)).unwrap();
            let p = sol.massless_position.unwrap();
            assert!((p - cfg.massless_position.unwrap()).norm() < 1e-10, "m2 = {m2}");
            assert!(sol.cc_residual < 1e-10);
        }
    }

    #[test]
    fn restricted_rejects_on_line_guess() {
        let cfg = collinear_three_primaries(&MassSystem::collinear(&[0.3, 0.4, 0.3]).unwrap()).unwrap();
        assert!(restricted_position(&cfg, Vector2::new(0.3, 0.0)).is_err());
    }
}
