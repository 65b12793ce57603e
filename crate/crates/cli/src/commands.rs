//! Subcommand arguments and their workflows.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use erestab::central_config::{
    collinear_three_primaries, moulton_collinear, restricted_position, solve_euler_quintic, symmetric_configuration,
    Configuration, MassSystem,
};
use erestab::linearization::{compute_d, spectral_params, StabilityParams};
use erestab::maslov_index::{index_monodromy_consistency, morse_index, positivity_check, Omega};
use erestab::monodromy::{classify_spectrum, integrate_fundamental, Verdict};
use erestab::polygon_config::{polygon_configuration, polygon_limits, solve_site, PolygonSystem, Site};
use erestab::scan::{
    find_curves, find_mstar, instability_extent, mass_scan_4body, polygon_verdicts, scan_theta, Curve, CurveSet,
    ScanRecord, ScanSettings,
};
use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{parse_grid, parse_pair, parse_usize_list, ConfigError};
use crate::output::{fmt_f64, fmt_opt, fmt_opt_f64, CsvTable, Sink};
use crate::svg::{emit_svg, Marker, Polyline, Style};

/// Version of the scan-theta CSV column layout.
pub const THETA_CSV_SCHEMA: u32 = 1;

pub const THETA_COLUMNS: [&str; 16] = [
    "beta", "e", "verdict", "phi_1", "nu_1", "phi_m1", "nu_m1", "eig1_re", "eig1_im", "eig2_re", "eig2_im", "eig3_re",
    "eig3_im", "eig4_re", "eig4_im", "sympl_residual",
];

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Collinear primaries given by `--m` (Euler for three, Moulton otherwise).
    Collinear,
    /// Symmetric chain `m1 = m3` parameterized by `--m2`.
    Symmetric,
    /// Regular polygon with a central mass; `--n`, `--m0-over-m`, `--site`.
    Polygon,
    /// Collinear family parameterized directly by `--beta` in [0, 9].
    Hls,
    /// Direct `(--alpha, --beta)` input.
    AlphaBeta,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SystemArgs {
    #[arg(long, value_enum, default_value = "collinear")]
    pub family: Family,
    /// Comma-separated primary masses.
    #[arg(long)]
    pub m: Option<String>,
    /// Permutation of the primaries along the line (Moulton chains).
    #[arg(long)]
    pub ordering: Option<String>,
    /// Newton start for the massless body, `x,y`.
    #[arg(long, default_value = "0,1")]
    pub guess: String,
    #[arg(long)]
    pub m2: Option<f64>,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 1000.0)]
    pub m0_over_m: f64,
    #[arg(long, default_value = "S3")]
    pub site: String,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub e: f64,
}

struct Resolved {
    config: Option<Configuration>,
    params: StabilityParams,
    extra: serde_json::Value,
}

fn masses(args: &SystemArgs) -> Result<Vec<f64>> {
    let m = args.m.as_deref().ok_or_else(|| config_err("--m is required for the collinear family"))?;
    Ok(parse_grid(m)?)
}

fn resolve(args: &SystemArgs, need_params: bool) -> Result<Resolved> {
    let e = args.e;
    match args.family {
        Family::Collinear => {
            let m = masses(args)?;
            let sys = MassSystem::collinear(&m)?;
            let mut extra = json!({});
            let line = if m.len() == 3 {
                let x = solve_euler_quintic(sys.masses()[0], sys.masses()[1], sys.masses()[2])?;
                extra["quintic_root"] = json!(x);
                collinear_three_primaries(&sys)?
            } else {
                let ordering = match &args.ordering {
                    Some(o) => parse_usize_list(o)?,
                    None => (0..m.len()).collect(),
                };
                moulton_collinear(&sys, &ordering)?
            };
            let (gx, gy) = parse_pair(&args.guess)?;
            let cfg = restricted_position(&line, Vector2::new(gx, gy))?;
            let params = spectral_params(&compute_d(&cfg)?, e)?;
            Ok(Resolved { config: Some(cfg), params, extra })
        }
        Family::Symmetric => {
            let m2 = args.m2.ok_or_else(|| config_err("--m2 is required for the symmetric family"))?;
            let cfg = symmetric_configuration(m2)?;
            let params = spectral_params(&compute_d(&cfg)?, e)?;
            Ok(Resolved { config: Some(cfg), params, extra: json!({ "m2": m2 }) })
        }
        Family::Polygon => {
            let site: Site = args.site.parse()?;
            let sys = PolygonSystem::from_ratio(args.n, args.m0_over_m)?;
            let q = solve_site(&sys, site)?;
            let cfg = polygon_configuration(&sys, Some(&q))?;
            let params = StabilityParams::from_eigenvalues(q.lambda3(), q.lambda4(), e)?;
            let direct = spectral_params(&compute_d(&cfg)?, e)?;
            let extra = json!({
                "bang": q,
                "direct_lambda3": direct.lambda3,
                "direct_lambda4": direct.lambda4,
            });
            Ok(Resolved { config: Some(cfg), params, extra })
        }
        Family::Hls | Family::AlphaBeta if !need_params => {
            bail!(config_err("families hls and alpha-beta carry no configuration"))
        }
        Family::Hls => {
            let b = args.beta.ok_or_else(|| config_err("--beta is required for the hls family"))?;
            Ok(Resolved { config: None, params: StabilityParams::from_hls(b, e)?, extra: json!({}) })
        }
        Family::AlphaBeta => {
            let (Some(a), Some(b)) = (args.alpha, args.beta) else {
                bail!(config_err("--alpha and --beta are required for the alpha-beta family"));
            };
            Ok(Resolved { config: None, params: StabilityParams::from_alpha_beta(a, b, e)?, extra: json!({}) })
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CcArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
}

pub fn run_cc(args: &CcArgs, sink: &mut Sink) -> Result<()> {
    let r = resolve(&args.system, false)?;
    let out = json!({
        "family": args.system.family,
        "configuration": r.config,
        "lambda3": r.params.lambda3,
        "lambda4": r.params.lambda4,
        "beta_hls": r.params.beta_hls,
        "details": r.extra,
    });
    sink.json("cc.json", &out)?;
    if let Some(cfg) = &r.config {
        println!("mu = {}", fmt_f64(cfg.mu));
        if let Some(p) = cfg.massless_position {
            println!("massless body at ({}, {})", fmt_f64(p.x), fmt_f64(p.y));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PolygonArgs {
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Comma-separated list or range of m0/M.
    #[arg(long, default_value = "1e3,1e6")]
    pub m0_over_m: String,
    #[arg(long, default_value = "S3")]
    pub site: String,
}

pub fn run_polygon(args: &PolygonArgs, sink: &mut Sink) -> Result<()> {
    let site: Site = args.site.parse()?;
    let rows = polygon_limits(args.n, &parse_grid(&args.m0_over_m)?, site)?;
    let mut t = CsvTable::new(&[
        "m0_over_m",
        "rho",
        "a_over_omega_sq",
        "b_over_omega_sq",
        "l3",
        "two_a_minus_omega_sq",
        "lambda3",
        "lambda4",
    ])?;
    for r in &rows {
        t.row(&[
            r.m0_over_m,
            r.rho,
            r.a_over_omega_sq,
            r.b_over_omega_sq,
            r.l3,
            r.two_a_minus_omega_sq,
            r.lambda3,
            r.lambda4,
        ]
        .map(fmt_f64))?;
    }
    sink.write("polygon.csv", &t.into_bytes()?)?;
    sink.json("polygon.json", &json!({ "n": args.n, "site": site, "rows": rows }))?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct StabilityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
}

pub fn run_stability(args: &StabilityArgs, settings: &ScanSettings, sink: &mut Sink) -> Result<()> {
    let r = resolve(&args.system, true)?;
    let m = integrate_fundamental(&r.params, settings.integ_tol)?;
    let v = classify_spectrum(&m, settings.circle_tol);
    let out = json!({
        "family": args.system.family,
        "beta_hls": r.params.beta_hls,
        "alpha": r.params.alpha,
        "beta": r.params.beta,
        "lambda3": r.params.lambda3,
        "lambda4": r.params.lambda4,
        "e": r.params.e,
        "verdict": v.verdict,
        "on_circle_count": v.on_circle_count,
        "semisimple": v.semisimple,
        "eigenvalues": v.details,
        "symplectic_residual": m.symplectic_residual,
        "step_metadata": m.step_metadata,
        "details": r.extra,
    });
    sink.json("stability.json", &out)?;
    println!("verdict: {}", v.verdict);
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct IndexArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Comma-separated ω arguments as fractions of a turn: ω = exp(2πiρ).
    #[arg(long, default_value = "0,0.5")]
    pub rho: String,
    /// Also run the index/monodromy consistency report.
    #[arg(long)]
    pub consistency: bool,
    /// Number of ω samples for the positivity check (0 skips it).
    #[arg(long, default_value_t = 0)]
    pub positivity_samples: usize,
}

pub fn run_index(args: &IndexArgs, sink: &mut Sink) -> Result<()> {
    let r = resolve(&args.system, true)?;
    let rhos = parse_grid(&args.rho)?;
    if let Some(bad) = rhos.iter().find(|x| !(0.0..1.0).contains(*x)) {
        bail!(config_err(format!("rho {bad} outside [0, 1)")));
    }
    let results = rhos
        .iter()
        .map(|&rho| morse_index(&r.params, Omega::from_rho(rho)))
        .collect::<erestab::Result<Vec<_>>>()?;
    for res in &results {
        println!("rho = {}: phi = {}, nu = {}", res.rho, res.phi, res.nu);
    }
    let consistency = if args.consistency { Some(index_monodromy_consistency(&r.params)?) } else { None };
    let positive = if args.positivity_samples > 0 {
        Some(positivity_check(&r.params, args.positivity_samples)?)
    } else {
        None
    };
    sink.json(
        "index.json",
        &json!({
            "params": r.params,
            "indices": results,
            "consistency": consistency,
            "positive_definite": positive,
        }),
    )?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ScanThetaArgs {
    /// β grid: list or `start:stop:step` within [0, 9].
    #[arg(long, default_value = "0:9:0.05")]
    pub beta: String,
    /// Eccentricity grid within [0, 0.99].
    #[arg(long, default_value = "0:0.95:0.02")]
    pub e: String,
    /// Skip the ω = ±1 indices in the records.
    #[arg(long)]
    pub no_indices: bool,
    /// Skip curve extraction.
    #[arg(long)]
    pub no_curves: bool,
    #[arg(long, default_value_t = 0.005)]
    pub beta_resolution: f64,
    #[arg(long, default_value_t = 0.05)]
    pub coarse_beta_step: f64,
    /// Curves are extracted only up to this eccentricity.
    #[arg(long, default_value_t = 0.95)]
    pub curve_e_max: f64,
    /// SVG region plot, relative to the output directory.
    #[arg(long)]
    pub svg: Option<String>,
}

fn theta_row(rec: &ScanRecord) -> Vec<String> {
    let mut row = vec![
        fmt_f64(rec.params.beta_hls.unwrap_or(f64::NAN)),
        fmt_f64(rec.params.e),
        rec.verdict_kind().map(|v| v.as_str().to_string()).unwrap_or_else(|| "error".into()),
        fmt_opt(rec.phi_1),
        fmt_opt(rec.nu_1),
        fmt_opt(rec.phi_m1),
        fmt_opt(rec.nu_m1),
    ];
    for k in 0..4 {
        let z = rec.eigenvalues.map(|e| e[k]);
        row.push(fmt_opt_f64(z.map(|z| z.re)));
        row.push(fmt_opt_f64(z.map(|z| z.im)));
    }
    row.push(fmt_opt_f64(rec.symplectic_residual));
    row
}

pub fn theta_csv(records: &[ScanRecord]) -> Result<Vec<u8>> {
    let mut t = CsvTable::new(&THETA_COLUMNS)?;
    for r in records {
        t.row(&theta_row(r))?;
    }
    t.into_bytes()
}

pub fn curves_csv(curves: &CurveSet) -> Result<Vec<u8>> {
    let mut t = CsvTable::new(&["e", "curve", "beta", "bracket_width"])?;
    for p in &curves.points {
        t.row(&[fmt_f64(p.e), p.curve.as_str().to_string(), fmt_f64(p.beta), fmt_f64(p.bracket_width)])?;
    }
    t.into_bytes()
}

fn curve_polylines(curves: &CurveSet) -> Vec<Polyline> {
    [(Curve::BetaS, "gamma_s"), (Curve::BetaM, "gamma_m"), (Curve::BetaK, "gamma_k")]
        .iter()
        .map(|(c, label)| Polyline {
            label: label.to_string(),
            points: curves.points.iter().filter(|p| p.curve == *c).map(|p| (p.beta, p.e)).collect(),
        })
        .collect()
}

pub fn theta_svg(records: &[ScanRecord], curves: Option<&CurveSet>) -> String {
    let markers: Vec<Marker> = records
        .iter()
        .map(|r| Marker {
            x: r.params.beta_hls.unwrap_or(f64::NAN),
            y: r.params.e,
            class: r.verdict_kind().map(|v| v.as_str().to_string()).unwrap_or_else(|| "error".into()),
        })
        .collect();
    let lines = curves.map(curve_polylines).unwrap_or_default();
    emit_svg(
        &markers,
        &lines,
        &Style {
            title: "Linear stability in the (beta, e) rectangle".into(),
            x_label: "beta".into(),
            y_label: "e".into(),
            x_range: (0.0, 9.0),
            y_range: (0.0, 1.0),
        },
    )
}

fn verdict_counts<'a>(verdicts: impl Iterator<Item = Option<Verdict>> + 'a) -> BTreeMap<&'static str, usize> {
    let mut counts = BTreeMap::new();
    for v in verdicts {
        *counts.entry(v.map(Verdict::as_str).unwrap_or("error")).or_insert(0) += 1;
    }
    counts
}

pub fn run_scan_theta(args: &ScanThetaArgs, settings: &ScanSettings, sink: &mut Sink, hash: &str) -> Result<()> {
    let betas = parse_grid(&args.beta)?;
    let es = parse_grid(&args.e)?;
    let settings = ScanSettings {
        with_indices: !args.no_indices,
        coarse_beta_step: args.coarse_beta_step,
        ..*settings
    };
    let records = scan_theta(&betas, &es, &settings)?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("warning: {failed} grid points recorded errors");
    }
    sink.write("theta.csv", &theta_csv(&records)?)?;

    let curves = if args.no_curves {
        None
    } else {
        let curve_es: Vec<f64> = es.iter().copied().filter(|e| *e <= args.curve_e_max).collect();
        let set = find_curves(&curve_es, args.beta_resolution, &settings)?;
        for f in &set.failures {
            eprintln!("warning: curve extraction at e = {}: {}", f.e, f.reason);
        }
        sink.write("curves.csv", &curves_csv(&set)?)?;
        Some(set)
    };
    sink.json(
        "theta.json",
        &json!({
            "csv_schema": THETA_CSV_SCHEMA,
            "settings_hash": hash,
            "points": records.len(),
            "failed_points": failed,
            "verdict_counts": verdict_counts(records.iter().map(ScanRecord::verdict_kind)),
            "records": records,
            "curves": curves,
        }),
    )?;
    if let Some(svg) = &args.svg {
        sink.write(svg, theta_svg(&records, curves.as_ref()).as_bytes())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ScanMassArgs {
    #[arg(long, default_value = "0.005:0.995:0.01")]
    pub m1: String,
    #[arg(long, default_value = "0.005:0.995:0.01")]
    pub m3: String,
    #[arg(long, default_value_t = 0.0)]
    pub e: f64,
    #[arg(long)]
    pub svg: Option<String>,
}

pub fn run_scan_mass(args: &ScanMassArgs, settings: &ScanSettings, sink: &mut Sink, hash: &str) -> Result<()> {
    let g1 = parse_grid(&args.m1)?;
    let g3 = parse_grid(&args.m3)?;
    if let Some(bad) = g1.iter().chain(&g3).find(|m| !(**m > 0.0 && **m < 1.0)) {
        bail!(config_err(format!("mass {bad} outside (0, 1)")));
    }
    let scan = mass_scan_4body(&g1, &g3, args.e, settings)?;
    let mut t = CsvTable::new(&["m1", "m3", "m2", "beta_hls", "lambda3", "lambda4", "verdict", "stable", "x", "y", "error"])?;
    for c in &scan.cells {
        t.row(&[
            fmt_f64(c.m1),
            fmt_f64(c.m3),
            fmt_f64(c.m2),
            fmt_opt_f64(c.beta_hls),
            fmt_opt_f64(c.lambda3),
            fmt_opt_f64(c.lambda4),
            c.verdict.map(|v| v.as_str().to_string()).unwrap_or_default(),
            c.is_stable().to_string(),
            fmt_opt_f64(c.massless_position.map(|p| p.x)),
            fmt_opt_f64(c.massless_position.map(|p| p.y)),
            c.error.clone().unwrap_or_default(),
        ])?;
    }
    sink.write("mass.csv", &t.into_bytes()?)?;
    let stable = scan.cells.iter().filter(|c| c.is_stable()).count();
    sink.json(
        "mass.json",
        &json!({
            "settings_hash": hash,
            "e": args.e,
            "cells": scan.cells.len(),
            "stable_cells": stable,
            "verdict_counts": verdict_counts(scan.cells.iter().filter(|c| c.error.is_none()).map(|c| c.verdict)),
        }),
    )?;
    println!("stable cells: {stable} of {}", scan.cells.len());
    if let Some(svg) = &args.svg {
        let markers: Vec<Marker> = scan
            .cells
            .iter()
            .filter(|c| c.m1 + c.m3 < 1.0)
            .map(|c| Marker {
                x: c.m1,
                y: c.m3,
                class: match (c.verdict, &c.error) {
                    (Some(v), _) if v.is_stable() => "stable".into(),
                    (Some(v), _) => v.as_str().into(),
                    (None, _) => "error".into(),
                },
            })
            .collect();
        let doc = emit_svg(
            &markers,
            &[],
            &Style {
                title: format!("Four-body chain stability, e = {}", args.e),
                x_label: "m1".into(),
                y_label: "m3".into(),
                x_range: (0.0, 1.0),
                y_range: (0.0, 1.0),
            },
        );
        sink.write(svg, doc.as_bytes())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct FindMstarArgs {
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

pub fn run_find_mstar(args: &FindMstarArgs, sink: &mut Sink) -> Result<()> {
    let m = find_mstar(args.tol)?;
    if let Some(w) = &m.warning {
        eprintln!("warning: {w}");
    }
    println!("m* = {}", fmt_f64(m.m_star));
    sink.json("mstar.json", &m)?;
    Ok(())
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PolygonVerdictArgs {
    #[arg(long, default_value = "4,8,12")]
    pub n: String,
    #[arg(long, default_value = "10,100,1000,10000")]
    pub m0_over_m: String,
    #[arg(long, default_value = "0,0.05,0.1")]
    pub e: String,
    #[arg(long, default_value = "S1,S2,S3")]
    pub sites: String,
}

pub fn run_polygon_verdicts(args: &PolygonVerdictArgs, settings: &ScanSettings, sink: &mut Sink) -> Result<()> {
    let sites: Vec<Site> = args.sites.split(',').map(|s| s.trim().parse()).collect::<erestab::Result<_>>()?;
    let rows = polygon_verdicts(
        &parse_usize_list(&args.n)?,
        &parse_grid(&args.m0_over_m)?,
        &parse_grid(&args.e)?,
        &sites,
        settings,
    )?;
    let mut t = CsvTable::new(&[
        "n", "m0_over_m", "site", "e", "rho", "lambda3", "lambda4", "verdict", "phi_1", "nu_1", "phi_m1", "nu_m1", "error",
    ])?;
    for r in &rows {
        let rec = r.record.as_ref();
        t.row(&[
            r.n.to_string(),
            fmt_f64(r.m0_over_m),
            r.site.to_string(),
            fmt_f64(r.e),
            fmt_opt_f64(r.rho),
            fmt_opt_f64(rec.map(|x| x.params.lambda3)),
            fmt_opt_f64(rec.map(|x| x.params.lambda4)),
            r.verdict().map(|v| v.as_str().to_string()).unwrap_or_default(),
            fmt_opt(rec.and_then(|x| x.phi_1)),
            fmt_opt(rec.and_then(|x| x.nu_1)),
            fmt_opt(rec.and_then(|x| x.phi_m1)),
            fmt_opt(rec.and_then(|x| x.nu_m1)),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    sink.write("polygon_verdicts.csv", &t.into_bytes()?)?;
    sink.json("polygon_extents.json", &instability_extent(&rows))?;
    Ok(())
}
