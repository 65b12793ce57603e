//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use erestab::central_config::{
    collinear_three_primaries, moulton_collinear, potential, restricted_position, solve_symmetric_y,
    symmetric_configuration, MassSystem,
};
use erestab::linearization::{b_matrix, compute_d, spectral_params, symmetric_beta_hls, StabilityParams};
use erestab::maslov_index::{morse_index, Omega, KERNEL_RANK_TOL};
use erestab::monodromy::{
    classify_spectrum, eigenvalues, integrate_fundamental, j4, matrix_exponential, near_kernel_dimension,
    DEFAULT_CIRCLE_TOL, DEFAULT_TOL,
};
use erestab::polygon_config::{solve_site, PolygonSystem, Site};
use erestab::scan::{find_curves, find_mstar, mass_scan_4body, polygon_verdicts, ScanSettings};
use nalgebra::{Complex, Matrix4, Vector2};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn c1_trace_law() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst_trace: f64 = 0.0;
    let mut min_l4 = f64::INFINITY;
    let mut check = |cfg: &erestab::central_config::Configuration| -> Result<(), String> {
        let p = spectral_params(&compute_d(cfg).map_err(err)?, 0.0).map_err(err)?;
        worst_trace = worst_trace.max((p.lambda3 + p.lambda4 - 3.0).abs());
        min_l4 = min_l4.min(p.lambda4);
        Ok(())
    };
    for _ in 0..200 {
        let m: Vec<f64> = (0..3).map(|_| rng.gen_range(0.01..1.0)).collect();
        let sys = MassSystem::collinear(&m).map_err(err)?;
        let line = collinear_three_primaries(&sys).map_err(err)?;
        check(&restricted_position(&line, Vector2::new(0.0, 1.0)).map_err(|e| format!("{m:?}: {e}"))?)?;
    }
    for _ in 0..50 {
        let m: Vec<f64> = (0..4).map(|_| rng.gen_range(0.01..1.0)).collect();
        let mut ordering: Vec<usize> = (0..4).collect();
        ordering.shuffle(&mut rng);
        let sys = MassSystem::collinear(&m).map_err(err)?;
        let line = moulton_collinear(&sys, &ordering).map_err(err)?;
        check(&restricted_position(&line, Vector2::new(0.0, 1.0)).map_err(|e| format!("{m:?}: {e}"))?)?;
    }
    ensure(worst_trace < 1e-9 && min_l4 > -1e-9, || {
        format!("max |l3+l4-3| = {worst_trace:e}, min l4 = {min_l4:e}")
    })?;
    Ok(format!("max |l3+l4-3| = {worst_trace:.1e}, min l4 = {min_l4:.3e}"))
}

fn c2_symmetric_anchors() -> Outcome {
    let y0 = solve_symmetric_y(0.0).map_err(err)?;
    ensure((y0 - 3f64.sqrt()).abs() < 1e-12, || format!("y(0) = {y0}"))?;
    let y1 = solve_symmetric_y(1.0 - 1e-9).map_err(err)?;
    ensure((y1 - 1.0).abs() < 1e-3, || format!("y(1-1e-9) = {y1}"))?;
    let b1 = symmetric_beta_hls(1.0 - 1e-9).map_err(err)?;
    ensure(b1.abs() < 1e-6, || format!("beta(1-1e-9) = {b1}"))?;
    let mut prev = y0;
    for k in 1..1000 {
        let y = solve_symmetric_y(k as f64 * 1e-3).map_err(err)?;
        ensure(y < prev, || format!("y not decreasing at m2 = {}", k as f64 * 1e-3))?;
        prev = y;
    }
    let b0 = symmetric_beta_hls(0.0).map_err(err)?;
    // Routh-style closed form 27(m1m2 + m2m3 + m3m1)/(Σm)² at (1/2, 0, 1/2)
    let (m1, m2, m3) = (0.5, 0.0, 0.5);
    let routh = 27.0 * (m1 * m2 + m2 * m3 + m3 * m1) / ((m1 + m2 + m3) * (m1 + m2 + m3));
    ensure((b0 - 6.75).abs() < 1e-10 && (b0 - routh).abs() < 1e-10, || format!("beta(0) = {b0}, routh {routh}"))?;
    // the closed-form chain agrees with D assembled from the configuration
    for m2 in [1e-6, 0.3, 0.854, 0.99] {
        let p = spectral_params(&compute_d(&symmetric_configuration(m2).map_err(err)?).map_err(err)?, 0.0).map_err(err)?;
        let chain = symmetric_beta_hls(m2).map_err(err)?;
        let direct = p.beta_hls.ok_or("trace law violated")?;
        ensure((chain - direct).abs() < 1e-8, || format!("m2 = {m2}: chain {chain} vs D {direct}"))?;
    }
    Ok(format!("y(0) = {y0:.15}, beta(0) = {b0:.12}"))
}

fn c3_mstar() -> Outcome {
    let m = find_mstar(1e-6).map_err(err)?;
    let (lo, hi) = m.bracket;
    ensure((0.84..=0.87).contains(&m.m_star), || format!("m* = {}", m.m_star))?;
    ensure(hi - lo < 1e-6, || format!("bracket width {}", hi - lo))?;
    ensure(lo - 0.005 <= 0.854 && 0.854 <= hi + 0.005, || format!("0.854 outside [{lo}, {hi}] +- 0.005"))?;
    Ok(format!("m* = {:.10}, bracket width {:.1e}", m.m_star, hi - lo))
}

fn c4_circular_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst_abs: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    let mut floor: f64 = 0.0;
    for _ in 0..50 {
        let (a, b) = (rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
        let p = StabilityParams::from_alpha_beta(a, b, 0.0).map_err(err)?;
        let m = integrate_fundamental(&p, DEFAULT_TOL).map_err(err)?;
        // exp(2π JB) has eigenvalues exp(2π λ) for the eigenvalues λ of JB
        let jb: Matrix4<f64> = j4() * b_matrix(&p, 0.0);
        let oracle: Vec<Complex<f64>> = jb
            .map(|x| Complex::new(x, 0.0))
            .eigenvalues()
            .ok_or("oracle eigenvalues failed")?
            .iter()
            .map(|l| (l * 2.0 * PI).exp())
            .collect();
        // eigenvalues of the exponential itself show the double-precision floor
        let reference = eigenvalues(&matrix_exponential(&(jb * (2.0 * PI)))).map_err(err)?;
        for z in &oracle {
            let d = reference.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            floor = floor.max(d);
        }
        let mut pool: Vec<Complex<f64>> = m.eigenvalues.to_vec();
        for z in oracle {
            let (k, d) = pool
                .iter()
                .enumerate()
                .map(|(k, w)| (k, (w - z).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            pool.remove(k);
            worst_abs = worst_abs.max(d);
            worst_rel = worst_rel.max(d / z.norm().max(1.0));
        }
    }
    ensure(worst_abs < 1e-8, || format!("max eigenvalue error {worst_abs:.2e} (relative {worst_rel:.2e}; exact-exponential floor {floor:.2e})"))?;
    Ok(format!("max eigenvalue error {worst_abs:.2e}"))
}

fn c5_symplecticity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0.0);
    let mut scale: f64 = 0.0;
    for i in 0..20 {
        for j in 0..10 {
            let (b, e) = (9.0 * i as f64 / 19.0, 0.9 * j as f64 / 9.0);
            let m = integrate_fundamental(&StabilityParams::from_hls(b, e).map_err(err)?, 1e-12).map_err(err)?;
            if m.symplectic_residual > worst {
                worst = m.symplectic_residual;
                at = (b, e);
                scale = m.gamma_end.amax().powi(2) * f64::EPSILON;
            }
        }
    }
    ensure(worst < 1e-8, || format!(
            "max residual {worst:.2e} at (beta, e) = ({:.3}, {:.2}); rounding scale eps*|gamma|^2 = {scale:.2e}",
            at.0, at.1
        ))?;
    Ok(format!("max residual {worst:.2e}"))
}

fn c6_index_anchors() -> Outcome {
    for b in [0.25, 0.75, 1.25] {
        for e in [0.0, 0.2, 0.4, 0.6] {
            let p = StabilityParams::from_alpha_beta(0.5, b, e).map_err(err)?;
            let r = morse_index(&p, Omega::one()).map_err(err)?;
            ensure(r.phi == 0, || format!("phi_1 = {} at beta = {b}, e = {e}", r.phi))?;
        }
    }
    let p = StabilityParams::from_alpha_beta(0.5, 1.5, 0.2).map_err(err)?;
    let r = morse_index(&p, Omega::minus_one()).map_err(err)?;
    ensure(r.phi == 2, || format!("phi_-1(1/2, 3/2, 0.2) = {}", r.phi))?;

    let mut rng = StdRng::seed_from_u64(6);
    let mut nonzero = 0;
    for _ in 0..20 {
        let p = StabilityParams::from_hls(rng.gen_range(0.0..9.0), rng.gen_range(0.0..0.6)).map_err(err)?;
        let g = integrate_fundamental(&p, DEFAULT_TOL).map_err(err)?.gamma_end;
        for (omega, w) in [(Omega::one(), 1.0), (Omega::minus_one(), -1.0)] {
            let nu = morse_index(&p, omega).map_err(err)?.nu;
            let k = near_kernel_dimension(&g, Complex::new(w, 0.0), KERNEL_RANK_TOL);
            nonzero += usize::from(nu > 0);
            ensure(nu == k, || format!("nu = {nu} but dim ker = {k} at omega = {w}, {p:?}"))?;
        }
    }
    Ok(format!("phi_-1(1/2, 3/2, 0.2) = 2; {nonzero} of 40 kernel checks nonzero"))
}

fn c7_circular_transition() -> Outcome {
    let v = |b: f64| -> Result<_, String> {
        let m = integrate_fundamental(&StabilityParams::from_hls(b, 0.0).map_err(err)?, DEFAULT_TOL).map_err(err)?;
        Ok(classify_spectrum(&m, DEFAULT_CIRCLE_TOL).verdict)
    };
    let (a, b) = (v(0.9)?, v(1.1)?);
    ensure(a.is_stable() && b.is_unstable(), || format!("verdicts {a} at 0.9 and {b} at 1.1"))?;
    let set = find_curves(&[0.0], 1e-3, &ScanSettings::default()).map_err(err)?;
    let row = &set.rows[0];
    let drops: Vec<String> = row.drops.iter().map(|d| format!("{:.4} (size {})", d.beta, d.size)).collect();
    let bs = row
        .beta_s_m()
        .map(|(s, _)| s)
        .ok_or_else(|| format!("no beta_s at e = 0; phi_-1 drops at {}", drops.join(", ")))?;
    ensure((0.95..=1.05).contains(&bs), || format!("beta_s(0) = {bs:.4}; phi_-1 drops at {}", drops.join(", ")))?;
    Ok(format!("beta_s(0) = {bs:.4}"))
}

fn c8_curve_structure() -> Outcome {
    let es: Vec<f64> = (0..=5).map(|k| k as f64 * 0.1).collect();
    let res = 1e-3;
    let set = find_curves(&es, res, &ScanSettings::default()).map_err(err)?;
    let mut problems = Vec::new();
    let mut summary = Vec::new();
    for row in &set.rows {
        let unit_locations = row.drops.iter().filter(|d| d.size == 1).count();
        if !row.monotone {
            problems.push(format!("e = {}: phi_-1 increases", row.e));
        }
        if unit_locations != 2 || row.drops.len() != 2 {
            let d: Vec<String> = row.drops.iter().map(|d| format!("{:.4}x{}", d.beta, d.size)).collect();
            problems.push(format!("e = {}: drops {}", row.e, d.join(" ")));
        }
        if let Some((bs, bm)) = row.beta_s_m() {
            if !(bs <= bm && bm <= row.beta_k + res) {
                problems.push(format!("e = {}: order {bs} {bm} {}", row.e, row.beta_k));
            }
            summary.push(format!("{:.1}:{bs:.3}/{bm:.3}/{:.3}", row.e, row.beta_k));
        }
    }
    ensure(problems.is_empty(), || problems.join("; "))?;
    Ok(summary.join(" "))
}

fn c9_polygon_limits() -> Outcome {
    let sys = PolygonSystem::from_ratio(8, 1e6).map_err(err)?;
    let s1 = solve_site(&sys, Site::S1).map_err(err)?;
    let (a1, b1) = (s1.a / s1.omega_sq, s1.b.norm() / s1.omega_sq);
    ensure((a1 - 2.0).abs() < 0.05 && (b1 - 6.0).abs() < 0.15 && s1.l3 < 0.0, || {
        format!("S1: A/w2 = {a1}, |B|/w2 = {b1}, l3 = {}", s1.l3)
    })?;
    let s3 = solve_site(&sys, Site::S3).map_err(err)?;
    let a3 = s3.a / s3.omega_sq;
    ensure(a3 > 0.5 && a3 < 0.55 && s3.l3 > 0.0 && s3.l3 < 0.05 && s3.two_a_minus_omega_sq() > 0.0, || {
        format!("S3: A/w2 = {a3}, l3 = {}, 2A-w2 = {}", s3.l3, s3.two_a_minus_omega_sq())
    })?;
    // μ from the raw vertex layout, not from the system record
    let mut masses = vec![sys.m0];
    let mut pos = vec![Vector2::zeros()];
    for j in 0..8 {
        let t = 2.0 * PI * j as f64 / 8.0;
        masses.push(sys.m);
        pos.push(sys.alpha * Vector2::new(t.cos(), t.sin()));
    }
    let mu = potential(&masses, &pos).map_err(err)?;
    let d = (mu * sys.alpha.powi(3) - sys.omega_sq).abs();
    ensure(d < 1e-10, || format!("|mu alpha^3 - w2| = {d:e}"))?;
    Ok(format!("S1 A/w2 = {a1:.4}, |B|/w2 = {b1:.4}; S3 A/w2 = {a3:.6}, l3 = {:.2e}", s3.l3))
}

fn c10_polygon_verdicts() -> Outcome {
    let s = ScanSettings::default();
    let rows = polygon_verdicts(&[8], &[1e3], &[0.0, 0.05, 0.1], &[Site::S1, Site::S2], &s).map_err(err)?;
    for r in &rows {
        ensure(r.verdict().is_some_and(|v| v.is_unstable()), || {
            format!("{} at e = {}: {:?} {:?}", r.site, r.e, r.verdict(), r.error)
        })?;
    }
    let rows = polygon_verdicts(&[8], &[1e3], &[0.0, 0.1, 0.3], &[Site::S3], &s).map_err(err)?;
    for r in &rows {
        let rec = r.record.as_ref().ok_or_else(|| format!("S3 at e = {}: {:?}", r.e, r.error))?;
        let eigs = rec.eigenvalues.ok_or("missing eigenvalues")?;
        let off = eigs.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
        ensure(off < 1e-5, || format!("S3 at e = {}: max ||z|-1| = {off:e}", r.e))?;
        let (p1, pm) = (rec.phi_1.ok_or("missing phi_1")?, rec.phi_m1.ok_or("missing phi_-1")?);
        ensure(pm as i64 - p1 as i64 == 2, || format!("S3 at e = {}: phi_-1 = {pm}, phi_1 = {p1}", r.e))?;
    }
    Ok("S1, S2 unstable; S3 on the circle with phi_-1 - phi_1 = 2".into())
}

fn c11_mass_plane() -> Outcome {
    let s = ScanSettings::default();
    let grid: Vec<f64> = (0..100).map(|j| (j as f64 + 0.5) / 100.0).collect();
    let scan = mass_scan_4body(&grid, &grid, 0.0, &s).map_err(err)?;
    let stable = scan.cells.iter().filter(|c| c.is_stable()).count();
    ensure(stable > 0, || "no stable cell".into())?;
    for i in 0..100 {
        for k in 0..100 {
            ensure(scan.cell(i, k).is_stable() == scan.cell(k, i).is_stable(), || {
                format!("asymmetric at ({}, {})", grid[i], grid[k])
            })?;
        }
    }
    let probe = mass_scan_4body(&[0.073, 0.25], &[0.073, 0.25], 0.0, &s).map_err(err)?;
    let (a, b) = (probe.cell(0, 0), probe.cell(1, 1));
    ensure(b.verdict.is_some() && !b.is_stable(), || format!("(0.25, 0.25): {:?} {:?}", b.verdict, b.error))?;
    ensure(a.is_stable(), || {
        format!(
            "(0.073, 0.073) is {:?} with beta = {:?}; {stable} stable cells",
            a.verdict, a.beta_hls
        )
    })?;
    Ok(format!("{stable} stable cells, symmetric"))
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "collinear trace law", limit: Duration::from_secs(10), run: c1_trace_law },
        Criterion { id: 2, name: "symmetric-family anchors", limit: Duration::from_secs(1), run: c2_symmetric_anchors },
        Criterion { id: 3, name: "threshold m*", limit: Duration::from_secs(5), run: c3_mstar },
        Criterion { id: 4, name: "e=0 exponential oracle", limit: Duration::from_secs(30), run: c4_circular_oracle },
        Criterion { id: 5, name: "symplecticity", limit: Duration::from_secs(60), run: c5_symplecticity },
        Criterion { id: 6, name: "index anchors", limit: Duration::from_secs(120), run: c6_index_anchors },
        Criterion { id: 7, name: "circular stability transition", limit: Duration::from_secs(10), run: c7_circular_transition },
        Criterion { id: 8, name: "curve structure", limit: Duration::from_secs(600), run: c8_curve_structure },
        Criterion { id: 9, name: "polygon limits", limit: Duration::from_secs(5), run: c9_polygon_limits },
        Criterion { id: 10, name: "polygon verdicts", limit: Duration::from_secs(120), run: c10_polygon_verdicts },
        Criterion { id: 11, name: "mass-plane stability region", limit: Duration::from_secs(300), run: c11_mass_plane },
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > c.limit => Err(format!("{msg}; runtime {:.1}s over {}s", took.as_secs_f64(), c.limit.as_secs())),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS [{:>2}] {} ({:.2}s): {msg}", c.id, c.name, took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("FAIL [{:>2}] {} ({:.2}s): {msg}", c.id, c.name, took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
