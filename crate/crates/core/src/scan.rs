//! Parameter sweeps: the (β, e) rectangle of the collinear family, the
//! curves separating its stability regions, the (m₁, m₃) mass plane of the
//! four-body chain, the symmetric threshold m* and polygon verdict tables.

use nalgebra::Vector2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::central_config::{collinear_three_primaries, restricted_position, MassSystem};
use crate::error::{domain, Error, Result};
use crate::linearization::{compute_d, spectral_params, symmetric_beta_hls, StabilityParams};
use crate::maslov_index::{morse_index, Omega};
use crate::monodromy::{classify_spectrum, integrate_fundamental, SpectrumVerdict, Verdict, DEFAULT_CIRCLE_TOL, DEFAULT_TOL};
use crate::polygon_config::{solve_site, PolygonSystem, Site};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub integ_tol: f64,
    pub circle_tol: f64,
    /// Coarse β step used before bisection in curve extraction.
    pub coarse_beta_step: f64,
    /// Whether scan records carry the ω = ±1 indices.
    pub with_indices: bool,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            integ_tol: DEFAULT_TOL,
            circle_tol: DEFAULT_CIRCLE_TOL,
            coarse_beta_step: 0.05,
            with_indices: true,
        }
    }
}

impl ScanSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.integ_tol >= 1e-13 && self.integ_tol < 1e-3) {
            return Err(domain(format!("integration tolerance {} outside [1e-13, 1e-3)", self.integ_tol)));
        }
        if !(self.circle_tol > 0.0 && self.circle_tol < 1e-2) {
            return Err(domain(format!("circle tolerance {} outside (0, 1e-2)", self.circle_tol)));
        }
        if !(self.coarse_beta_step > 0.0 && self.coarse_beta_step <= 1.0) {
            return Err(domain(format!("coarse beta step {} outside (0, 1]", self.coarse_beta_step)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordSource {
    Grid,
    Bisection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub params: StabilityParams,
    pub verdict: Option<SpectrumVerdict>,
    pub eigenvalues: Option<[Complex64; 4]>,
    pub symplectic_residual: Option<f64>,
    pub phi_1: Option<usize>,
    pub nu_1: Option<usize>,
    pub phi_m1: Option<usize>,
    pub nu_m1: Option<usize>,
    pub source: RecordSource,
    pub error: Option<String>,
}

impl ScanRecord {
    pub fn verdict_kind(&self) -> Option<Verdict> {
        self.verdict.as_ref().map(|v| v.verdict)
    }
}

/// Monodromy verdict and, if requested, the ω = ±1 indices at one point.
/// Failures are recorded in the returned row.
pub fn evaluate_point(p: &StabilityParams, settings: &ScanSettings, source: RecordSource) -> ScanRecord {
    let mut rec = ScanRecord {
        params: *p,
        verdict: None,
        eigenvalues: None,
        symplectic_residual: None,
        phi_1: None,
        nu_1: None,
        phi_m1: None,
        nu_m1: None,
        source,
        error: None,
    };
    let mut errors = Vec::new();
    match integrate_fundamental(p, settings.integ_tol) {
        Ok(m) => {
            rec.verdict = Some(classify_spectrum(&m, settings.circle_tol));
            rec.eigenvalues = Some(m.eigenvalues);
            rec.symplectic_residual = Some(m.symplectic_residual);
        }
        Err(e) => errors.push(e.to_string()),
    }
    if settings.with_indices {
        match morse_index(p, Omega::one()) {
            Ok(r) => {
                rec.phi_1 = Some(r.phi);
                rec.nu_1 = Some(r.nu);
            }
            Err(e) => errors.push(e.to_string()),
        }
        match morse_index(p, Omega::minus_one()) {
            Ok(r) => {
                rec.phi_m1 = Some(r.phi);
                rec.nu_m1 = Some(r.nu);
            }
            Err(e) => errors.push(e.to_string()),
        }
    }
    if !errors.is_empty() {
        rec.error = Some(errors.join("; "));
    }
    rec
}

fn check_theta_grid(beta_grid: &[f64], e_grid: &[f64]) -> Result<()> {
    if let Some(b) = beta_grid.iter().find(|b| !(0.0..=9.0).contains(*b)) {
        return Err(domain(format!("beta {b} outside [0, 9]")));
    }
    if let Some(e) = e_grid.iter().find(|e| !(0.0..=0.99).contains(*e)) {
        return Err(domain(format!("eccentricity {e} outside [0, 0.99]")));
    }
    Ok(())
}

/// One record per grid point, ordered with `e` outermost.
pub fn scan_theta(beta_grid: &[f64], e_grid: &[f64], settings: &ScanSettings) -> Result<Vec<ScanRecord>> {
    settings.validate()?;
    check_theta_grid(beta_grid, e_grid)?;
    let points: Vec<StabilityParams> = e_grid
        .iter()
        .flat_map(|&e| beta_grid.iter().map(move |&b| StabilityParams::from_hls(b, e)))
        .collect::<Result<_>>()?;
    Ok(points
        .par_iter()
        .map(|p| evaluate_point(p, settings, RecordSource::Grid))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curve {
    BetaS,
    BetaM,
    BetaK,
}

impl Curve {
    pub fn as_str(self) -> &'static str {
        match self {
            Curve::BetaS => "beta_s",
            Curve::BetaM => "beta_m",
            Curve::BetaK => "beta_k",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub e: f64,
    pub beta: f64,
    pub curve: Curve,
    pub bracket_width: f64,
}

/// A located drop of `φ₋₁` by `size` units at `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexDrop {
    pub beta: f64,
    pub bracket_width: f64,
    pub size: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub e: f64,
    pub coarse_beta: Vec<f64>,
    pub coarse_phi_m1: Vec<usize>,
    pub drops: Vec<IndexDrop>,
    pub monotone: bool,
    pub beta_k: f64,
    pub beta_k_width: f64,
    pub error: Option<String>,
}

impl CurveRow {
    pub fn unit_drop_count(&self) -> usize {
        self.drops.iter().map(|d| d.size).sum()
    }

    /// `(β_s, β_m)` when exactly two unit drops were found.
    pub fn beta_s_m(&self) -> Option<(f64, f64)> {
        let mut units: Vec<f64> = self
            .drops
            .iter()
            .flat_map(|d| std::iter::repeat(d.beta).take(d.size))
            .collect();
        if units.len() != 2 {
            return None;
        }
        units.sort_by(f64::total_cmp);
        Some((units[0], units[1]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    pub rows: Vec<CurveRow>,
    pub points: Vec<CurvePoint>,
    pub failures: Vec<CurveFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFailure {
    pub e: f64,
    pub reason: String,
}

impl From<CurveFailure> for Error {
    fn from(f: CurveFailure) -> Self {
        Error::CurveExtraction { e: f.e, reason: f.reason }
    }
}

fn phi_m1(beta: f64, e: f64) -> Result<usize> {
    Ok(morse_index(&StabilityParams::from_hls(beta, e)?, Omega::minus_one())?.phi)
}

fn circle_predicate(beta: f64, e: f64, settings: &ScanSettings) -> Result<bool> {
    let m = integrate_fundamental(&StabilityParams::from_hls(beta, e)?, settings.integ_tol)?;
    Ok(classify_spectrum(&m, settings.circle_tol).on_circle_count > 0)
}

fn locate_drops(e: f64, lo: f64, hi: f64, phi_lo: usize, phi_hi: usize, res: f64, out: &mut Vec<IndexDrop>) -> Result<()> {
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > res {
        let mid = 0.5 * (lo + hi);
        let pm = phi_m1(mid, e)?;
        if pm == phi_lo {
            lo = mid;
        } else if pm == phi_hi {
            hi = mid;
        } else {
            locate_drops(e, lo, mid, phi_lo, pm, res, out)?;
            return locate_drops(e, mid, hi, pm, phi_hi, res, out);
        }
    }
    out.push(IndexDrop {
        beta: 0.5 * (lo + hi),
        bracket_width: hi - lo,
        size: phi_lo.saturating_sub(phi_hi),
        from: phi_lo,
        to: phi_hi,
    });
    Ok(())
}

fn coarse_grid(step: f64) -> Vec<f64> {
    let n = (9.0 / step).round() as usize;
    (0..=n).map(|j| (j as f64 * step).min(9.0)).collect()
}

/// Curve data for one eccentricity.
pub fn curve_row(e: f64, beta_resolution: f64, settings: &ScanSettings) -> Result<CurveRow> {
    let grid = coarse_grid(settings.coarse_beta_step);
    let phis: Vec<usize> = grid.par_iter().map(|&b| phi_m1(b, e)).collect::<Result<_>>()?;

    let mut drops = Vec::new();
    let mut monotone = true;
    for j in 1..grid.len() {
        if phis[j] > phis[j - 1] {
            monotone = false;
        } else if phis[j] < phis[j - 1] {
            locate_drops(e, grid[j - 1], grid[j], phis[j - 1], phis[j], beta_resolution, &mut drops)?;
        }
    }
    drops.retain(|d| d.size > 0);

    // β = 0 is the Kepler degeneracy where every multiplier equals 1; the
    // predicate holds there analytically and is sampled from the next node on.
    let holds: Vec<bool> = grid[1..]
        .par_iter()
        .map(|&b| circle_predicate(b, e, settings))
        .collect::<Result<_>>()?;
    let (beta_k, beta_k_width) = match holds.iter().position(|h| !h) {
        None => (9.0, 0.0),
        Some(i) => {
            let (mut lo, mut hi) = (grid[i], grid[i + 1]);
            while hi - lo > beta_resolution {
                let mid = 0.5 * (lo + hi);
                if circle_predicate(mid, e, settings)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (0.5 * (lo + hi), hi - lo)
        }
    };

    let mut row = CurveRow {
        e,
        coarse_beta: grid,
        coarse_phi_m1: phis,
        drops,
        monotone,
        beta_k,
        beta_k_width,
        error: None,
    };
    let units = row.unit_drop_count();
    if units != 2 {
        row.error = Some(format!("expected two unit drops of the -1 index, found {units}"));
    } else if !monotone {
        row.error = Some("the -1 index increases somewhere along beta".into());
    }
    Ok(row)
}

/// Locates `β_s ≤ β_m` from the drops of `φ₋₁` along β and `β_k` from the
/// circle-intersection predicate, one row per eccentricity.
pub fn find_curves(e_list: &[f64], beta_resolution: f64, settings: &ScanSettings) -> Result<CurveSet> {
    settings.validate()?;
    if !(beta_resolution > 0.0 && beta_resolution <= 0.01) {
        return Err(domain(format!("beta resolution {beta_resolution} outside (0, 0.01]")));
    }
    check_theta_grid(&[], e_list)?;
    let rows: Vec<Result<CurveRow>> = e_list
        .par_iter()
        .map(|&e| curve_row(e, beta_resolution, settings))
        .collect();
    let mut set = CurveSet {
        rows: Vec::new(),
        points: Vec::new(),
        failures: Vec::new(),
    };
    for (row, &e) in rows.into_iter().zip(e_list) {
        match row {
            Err(err) => set.failures.push(CurveFailure { e, reason: err.to_string() }),
            Ok(row) => {
                match (&row.error, row.beta_s_m()) {
                    (None, Some((bs, bm))) => {
                        let widths: Vec<f64> = row.drops.iter().map(|d| d.bracket_width).collect();
                        let w = widths.iter().copied().fold(0.0, f64::max);
                        set.points.push(CurvePoint { e, beta: bs, curve: Curve::BetaS, bracket_width: w });
                        set.points.push(CurvePoint { e, beta: bm, curve: Curve::BetaM, bracket_width: w });
                        set.points.push(CurvePoint {
                            e,
                            beta: row.beta_k,
                            curve: Curve::BetaK,
                            bracket_width: row.beta_k_width,
                        });
                    }
                    (reason, _) => set.failures.push(CurveFailure {
                        e,
                        reason: reason.clone().unwrap_or_else(|| "curve extraction failed".into()),
                    }),
                }
                set.rows.push(row);
            }
        }
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    I,
    II,
    III,
    IV,
}

impl Region {
    /// Stability label attached to the region by the separation theorem.
    pub fn labelled_stable(self) -> bool {
        matches!(self, Region::I | Region::III)
    }
}

/// Region of `beta` relative to the curves `β_s ≤ β_m ≤ β_k` at one `e`.
pub fn region_of(beta: f64, beta_s: f64, beta_m: f64, beta_k: f64) -> Region {
    if beta < beta_s {
        Region::I
    } else if beta < beta_m {
        Region::II
    } else if beta < beta_k {
        Region::III
    } else {
        Region::IV
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassCell {
    pub m1: f64,
    pub m3: f64,
    pub m2: f64,
    pub massless_position: Option<Vector2<f64>>,
    pub beta_hls: Option<f64>,
    pub lambda3: Option<f64>,
    pub lambda4: Option<f64>,
    pub verdict: Option<Verdict>,
    pub error: Option<String>,
}

impl MassCell {
    pub fn is_stable(&self) -> bool {
        self.verdict.is_some_and(Verdict::is_stable)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassScan {
    pub e: f64,
    pub m1_grid: Vec<f64>,
    pub m3_grid: Vec<f64>,
    /// Row-major with `m1` outermost.
    pub cells: Vec<MassCell>,
}

impl MassScan {
    pub fn cell(&self, i1: usize, i3: usize) -> &MassCell {
        &self.cells[i1 * self.m3_grid.len() + i3]
    }
}

fn mass_cell(m1: f64, m3: f64, e: f64, settings: &ScanSettings) -> MassCell {
    let mut cell = MassCell {
        m1,
        m3,
        m2: 1.0 - m1 - m3,
        massless_position: None,
        beta_hls: None,
        lambda3: None,
        lambda4: None,
        verdict: None,
        error: None,
    };
    if !(m1 > 0.0 && m3 > 0.0 && m1 + m3 < 1.0) {
        cell.error = Some("outside the mass simplex".into());
        return cell;
    }
    let run = |cell: &mut MassCell| -> Result<()> {
        let sys = MassSystem::collinear(&[m1, 1.0 - m1 - m3, m3])?;
        let cfg = restricted_position(&collinear_three_primaries(&sys)?, Vector2::new(0.0, 1.0))?;
        cell.massless_position = cfg.massless_position;
        let p = spectral_params(&compute_d(&cfg)?, e)?;
        cell.beta_hls = p.beta_hls;
        cell.lambda3 = Some(p.lambda3);
        cell.lambda4 = Some(p.lambda4);
        let m = integrate_fundamental(&p, settings.integ_tol)?;
        cell.verdict = Some(classify_spectrum(&m, settings.circle_tol).verdict);
        Ok(())
    };
    if let Err(err) = run(&mut cell) {
        cell.error = Some(err.to_string());
    }
    cell
}

/// Stability of the four-body chain `m₁, m₂ = 1 − m₁ − m₃, m₃` over a grid
/// of the mass plane; cells outside the simplex carry an error entry.
pub fn mass_scan_4body(m1_grid: &[f64], m3_grid: &[f64], e: f64, settings: &ScanSettings) -> Result<MassScan> {
    settings.validate()?;
    if !(0.0..=0.99).contains(&e) {
        return Err(domain(format!("eccentricity {e} outside [0, 0.99]")));
    }
    let pairs: Vec<(f64, f64)> = m1_grid
        .iter()
        .flat_map(|&a| m3_grid.iter().map(move |&b| (a, b)))
        .collect();
    let cells = pairs.par_iter().map(|&(a, b)| mass_cell(a, b, e, settings)).collect();
    Ok(MassScan {
        e,
        m1_grid: m1_grid.to_vec(),
        m3_grid: m3_grid.to_vec(),
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MStar {
    pub m_star: f64,
    pub bracket: (f64, f64),
    /// True when `β(m₂) − 1` changes sign exactly once on the search grid.
    pub monotone: bool,
    pub warning: Option<String>,
}

/// Boundary `m*` of `β(m₂) < 1` along the symmetric chain at `e = 0`.
pub fn find_mstar(tolerance: f64) -> Result<MStar> {
    if !(tolerance >= 1e-8 && tolerance < 0.1) {
        return Err(domain(format!("tolerance {tolerance} outside [1e-8, 0.1)")));
    }
    let grid: Vec<f64> = (0..1000).map(|j| j as f64 * 1e-3).collect();
    let betas: Vec<f64> = grid.iter().map(|&m| symmetric_beta_hls(m)).collect::<Result<_>>()?;
    // β rises slightly near m₂ = 0 before falling, so the meaningful check is
    // a single sign change of β − 1 along the grid.
    let crossings = betas.windows(2).filter(|w| (w[0] >= 1.0) != (w[1] >= 1.0)).count();
    let monotone = crossings == 1;
    let first_below = betas
        .iter()
        .position(|b| *b < 1.0)
        .ok_or_else(|| Error::Existence("beta never drops below 1 on the m2 grid".into()))?;
    if first_below == 0 {
        return Err(Error::Existence("beta is below 1 already at m2 = 0".into()));
    }
    let (mut lo, mut hi) = (grid[first_below - 1], grid[first_below]);
    if !monotone {
        return Ok(MStar {
            m_star: 0.5 * (lo + hi),
            bracket: (lo, hi),
            monotone,
            warning: Some("beta(m2) - 1 changes sign more than once on the grid; reporting the first crossing".into()),
        });
    }
    while hi - lo >= tolerance {
        let mid = 0.5 * (lo + hi);
        if symmetric_beta_hls(mid)? < 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(MStar {
        m_star: 0.5 * (lo + hi),
        bracket: (lo, hi),
        monotone,
        warning: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonVerdictRow {
    pub n: usize,
    pub m0_over_m: f64,
    pub site: Site,
    pub e: f64,
    pub rho: Option<f64>,
    pub record: Option<ScanRecord>,
    pub error: Option<String>,
}

impl PolygonVerdictRow {
    pub fn verdict(&self) -> Option<Verdict> {
        self.record.as_ref().and_then(|r| r.verdict_kind())
    }
}

/// Verdicts for every `(n, m0/M, site, e)`; rows are ordered in that nesting.
pub fn polygon_verdicts(
    n_list: &[usize],
    m0_over_m_list: &[f64],
    e_list: &[f64],
    sites: &[Site],
    settings: &ScanSettings,
) -> Result<Vec<PolygonVerdictRow>> {
    settings.validate()?;
    if n_list.is_empty() || m0_over_m_list.is_empty() || e_list.is_empty() || sites.is_empty() {
        return Err(domain("polygon verdict lists must be nonempty"));
    }
    check_theta_grid(&[], e_list)?;
    let mut cells = Vec::new();
    for &n in n_list {
        for &r in m0_over_m_list {
            for &site in sites {
                for &e in e_list {
                    cells.push((n, r, site, e));
                }
            }
        }
    }
    Ok(cells
        .par_iter()
        .map(|&(n, r, site, e)| {
            let mut row = PolygonVerdictRow {
                n,
                m0_over_m: r,
                site,
                e,
                rho: None,
                record: None,
                error: None,
            };
            let q = PolygonSystem::from_ratio(n, r).and_then(|sys| solve_site(&sys, site));
            match q.and_then(|q| Ok((q.rho, StabilityParams::from_eigenvalues(q.lambda3(), q.lambda4(), e)?))) {
                Ok((rho, p)) => {
                    row.rho = Some(rho);
                    let rec = evaluate_point(&p, settings, RecordSource::Grid);
                    row.error = rec.error.clone();
                    row.record = Some(rec);
                }
                Err(err) => row.error = Some(err.to_string()),
            }
            row
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstabilityExtent {
    pub n: usize,
    pub m0_over_m: f64,
    pub site: Site,
    /// Largest grid eccentricity up to which every verdict is unstable.
    pub e_max: Option<f64>,
}

pub fn instability_extent(rows: &[PolygonVerdictRow]) -> Vec<InstabilityExtent> {
    let mut keys: Vec<(usize, f64, Site)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|k| k.0 == r.n && k.1 == r.m0_over_m && k.2 == r.site) {
            keys.push((r.n, r.m0_over_m, r.site));
        }
    }
    keys.into_iter()
        .map(|(n, ratio, site)| {
            let mut group: Vec<&PolygonVerdictRow> = rows
                .iter()
                .filter(|r| r.n == n && r.m0_over_m == ratio && r.site == site)
                .collect();
            group.sort_by(|a, b| a.e.total_cmp(&b.e));
            let mut e_max = None;
            for r in group {
                if r.verdict().is_some_and(Verdict::is_unstable) {
                    e_max = Some(r.e);
                } else {
                    break;
                }
            }
            InstabilityExtent { n, m0_over_m: ratio, site, e_max }
        })
        .collect()
}
