//! Regular (1+n)-gon primaries: n equal masses on a circle around a central
//! mass, the massless sites S1, S2, S3 and the lattice sums that fix the
//! eigenvalues of D there.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::central_config::Configuration;
use crate::error::{domain, Error, Result};
use crate::roots::{brentq, first_sign_change, log_space};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolygonSystem {
    pub n: usize,
    pub m0: f64,
    pub m: f64,
    pub total_vertex_mass: f64,
    pub alpha: f64,
    pub omega_sq: f64,
}

impl PolygonSystem {
    /// Rescales `m0 + n·m` to one.
    pub fn new(n: usize, m0: f64, m: f64) -> Result<Self> {
        if !(2..=64).contains(&n) {
            return Err(domain(format!("polygon order must lie in 2..=64, got {n}")));
        }
        if !(m0.is_finite() && m0 > 0.0 && m.is_finite() && m > 0.0) {
            return Err(domain("polygon masses must be positive"));
        }
        let total = m0 + n as f64 * m;
        let (m0, m) = (m0 / total, m / total);
        let big_m = n as f64 * m;
        Ok(PolygonSystem {
            n,
            m0,
            m,
            total_vertex_mass: big_m,
            alpha: big_m.sqrt().recip(),
            omega_sq: m0 + big_m * h1(n),
        })
    }

    /// System with the given ratio `m0/M` of central to total vertex mass.
    pub fn from_ratio(n: usize, m0_over_m: f64) -> Result<Self> {
        if !(m0_over_m.is_finite() && m0_over_m > 0.0) {
            return Err(domain(format!("m0/M must be positive, got {m0_over_m}")));
        }
        Self::new(n, m0_over_m, 1.0 / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Site {
    S1,
    S2,
    S3,
}

impl Site {
    pub const ALL: [Site; 3] = [Site::S1, Site::S2, Site::S3];

    /// Polar angle of the site measured from the vertex on the positive axis.
    pub fn theta(self, n: usize) -> f64 {
        match self {
            Site::S1 | Site::S2 => 0.0,
            Site::S3 => PI / n as f64,
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Site::S1 => "S1",
            Site::S2 => "S2",
            Site::S3 => "S3",
        };
        f.write_str(s)
    }
}

impl FromStr for Site {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S1" => Ok(Site::S1),
            "S2" => Ok(Site::S2),
            "S3" => Ok(Site::S3),
            other => Err(domain(format!("unknown site {other:?}, expected S1, S2 or S3"))),
        }
    }
}

/// `h_n(1) = (1/4n) Σ_{j=1}^{n-1} 1/sin(jπ/n)`.
pub fn h1(n: usize) -> f64 {
    let nf = n as f64;
    (1..n).map(|j| 1.0 / (j as f64 * PI / nf).sin()).sum::<f64>() / (4.0 * nf)
}

/// `h_n(x, u) = (1/n) Σ_{j=1}^{n} (1 − x cos φⱼ)/(1 + x² − 2x cos φⱼ)^{3/2}` with
/// `φⱼ = 2jπ/n + u`.
pub fn hn(n: usize, x: f64, u: f64) -> Result<f64> {
    let nf = n as f64;
    let mut sum = 0.0;
    for j in 1..=n {
        let c = (2.0 * j as f64 * PI / nf + u).cos();
        let base = 1.0 + x * x - 2.0 * x * c;
        if base <= 1e-28 {
            return Err(Error::Singular(format!("h_n term j = {j} vanishes at x = {x}, u = {u}")));
        }
        sum += (1.0 - x * c) / base.powf(1.5);
    }
    Ok(sum / nf)
}

fn psi(sys: &PolygonSystem, h1n: f64, rho: f64, theta: f64) -> f64 {
    let r3 = rho * rho * rho;
    match hn(sys.n, 1.0 / rho, theta) {
        Ok(h) => sys.m0 * (1.0 - r3) + sys.total_vertex_mass * (h - h1n * r3),
        Err(_) => f64::NAN,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BangQuantities {
    pub site: Site,
    pub rho: f64,
    pub theta: f64,
    pub omega_sq: f64,
    pub a: f64,
    /// Rotated into the frame whose real axis passes through the site.
    pub b: Complex64,
    pub l2: f64,
    pub l3: f64,
    pub psi_residual: f64,
}

impl BangQuantities {
    pub fn lambda3(&self) -> f64 {
        1.0 + (self.a + self.b.norm()) / self.omega_sq
    }

    pub fn lambda4(&self) -> f64 {
        1.0 + (self.a - self.b.norm()) / self.omega_sq
    }

    pub fn two_a_minus_omega_sq(&self) -> f64 {
        2.0 * self.a - self.omega_sq
    }
}

/// Lattice sums `A` and `B` at `w0 = ρ e^{iθ}` for vertices at the n-th roots
/// of unity; `B` is returned in the frame rotated by `−θ`.
pub fn bang_sums(sys: &PolygonSystem, rho: f64, theta: f64) -> Result<(f64, Complex64)> {
    let nf = sys.n as f64;
    let w0 = Complex64::from_polar(rho, theta);
    let mut sa = 0.0;
    let mut sb = Complex64::new(0.0, 0.0);
    for j in 0..sys.n {
        let d = w0 - Complex64::from_polar(1.0, 2.0 * PI * j as f64 / nf);
        let r = d.norm();
        if r < 1e-14 {
            return Err(Error::Singular(format!("massless site coincides with vertex {j}")));
        }
        let r3 = r * r * r;
        sa += 1.0 / r3;
        sb += d * d / (r3 * r * r);
    }
    let big_m = sys.total_vertex_mass;
    let r3 = rho * rho * rho;
    let a = big_m / (2.0 * nf) * sa + sys.m0 / (2.0 * r3);
    let b = 3.0 * big_m / (2.0 * nf) * sb + 1.5 * sys.m0 * w0 * w0 / (r3 * rho * rho);
    Ok((a, b * Complex64::from_polar(1.0, -2.0 * theta)))
}

/// Locates the site on its semi-axis and evaluates the lattice sums there.
pub fn solve_site(sys: &PolygonSystem, site: Site) -> Result<BangQuantities> {
    let theta = site.theta(sys.n);
    let h1n = h1(sys.n);
    let (outward, lo, hi) = match site {
        Site::S1 => (true, 1e-6, 49.0),
        Site::S2 => (false, 1e-6, 1.0 - 1e-3),
        Site::S3 => (true, 1e-9, 49.0),
    };
    let rho_of = |d: f64| if outward { 1.0 + d } else { 1.0 - d };
    let g = |d: f64| psi(sys, h1n, rho_of(d), theta);
    let (a, b) = first_sign_change(g, &log_space(lo, hi, 4000)).ok_or_else(|| {
        Error::Existence(format!("{site}: no sign change of psi for n = {}", sys.n))
    })?;
    let delta = if a == b {
        a
    } else {
        brentq(g, a, b, 0.0, 1e-14, 500)
            .ok_or_else(|| Error::Existence(format!("{site}: Brent lost the bracket")))?
    };
    let rho = rho_of(delta);
    let psi_residual = psi(sys, h1n, rho, theta).abs();
    if !(psi_residual < 1e-12) {
        return Err(Error::Convergence {
            what: format!("{site} site equation"),
            residual: psi_residual,
        });
    }
    let (a, b) = bang_sums(sys, rho, theta)?;
    Ok(BangQuantities {
        site,
        rho,
        theta,
        omega_sq: sys.omega_sq,
        a,
        b,
        l2: sys.omega_sq - a,
        l3: sys.omega_sq + a - b.norm(),
        psi_residual,
    })
}

/// Explicit normalized configuration: central mass at the origin, vertices
/// at `α e^{2πij/n}` and, if given, the massless body at its site.
pub fn polygon_configuration(sys: &PolygonSystem, site: Option<&BangQuantities>) -> Result<Configuration> {
    let nf = sys.n as f64;
    let mut masses = vec![sys.m0];
    let mut pos = vec![Vector2::zeros()];
    for j in 0..sys.n {
        let t = 2.0 * PI * j as f64 / nf;
        masses.push(sys.m);
        pos.push(sys.alpha * Vector2::new(t.cos(), t.sin()));
    }
    let cfg = Configuration::from_primaries(&masses, &pos)?;
    Ok(match site {
        Some(q) => cfg.with_massless(sys.alpha * q.rho * Vector2::new(q.theta.cos(), q.theta.sin())),
        None => cfg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolygonLimitRow {
    pub m0_over_m: f64,
    pub rho: f64,
    pub a_over_omega_sq: f64,
    pub b_over_omega_sq: f64,
    pub l3: f64,
    pub two_a_minus_omega_sq: f64,
    pub lambda3: f64,
    pub lambda4: f64,
}

pub fn polygon_limits(n: usize, m0_over_m_list: &[f64], site: Site) -> Result<Vec<PolygonLimitRow>> {
    m0_over_m_list
        .iter()
        .map(|&r| {
            let sys = PolygonSystem::from_ratio(n, r)?;
            let q = solve_site(&sys, site)?;
            Ok(PolygonLimitRow {
                m0_over_m: r,
                rho: q.rho,
                a_over_omega_sq: q.a / q.omega_sq,
                b_over_omega_sq: q.b.norm() / q.omega_sq,
                l3: q.l3,
                two_a_minus_omega_sq: q.two_a_minus_omega_sq(),
                lambda3: q.lambda3(),
                lambda4: q.lambda4(),
            })
        })
        .collect()
}
