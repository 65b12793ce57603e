use erestab::monodromy::Verdict;
use erestab::scan::{find_curves, region_of, scan_theta, Curve, CurveSet, ScanSettings};

fn curve(set: &CurveSet, e: f64, c: Curve) -> f64 {
    set.points.iter().find(|p| p.e == e && p.curve == c).unwrap().beta
}

#[test]
fn regions_agree_with_pointwise_verdicts() {
    let settings = ScanSettings { with_indices: false, ..ScanSettings::default() };
    let es = [0.1, 0.3];
    let res = 0.005;
    let set = find_curves(&es, res, &settings).unwrap();
    assert!(set.failures.is_empty(), "{:?}", set.failures);
    let betas: Vec<f64> = (0..=90).map(|k| k as f64 * 0.1).collect();
    let recs = scan_theta(&betas, &es, &settings).unwrap();
    let (mut compared, mut agreed) = (0, 0);
    for r in &recs {
        let e = r.params.e;
        let b = r.params.beta_hls.unwrap();
        let (bs, bm, bk) = (curve(&set, e, Curve::BetaS), curve(&set, e, Curve::BetaM), curve(&set, e, Curve::BetaK));
        if [bs, bm, bk].iter().any(|c| (b - c).abs() < 2.0 * res) || b == 0.0 {
            continue;
        }
        compared += 1;
        let stable = r.verdict_kind().is_some_and(Verdict::is_stable);
        if region_of(b, bs, bm, bk).labelled_stable() == stable {
            agreed += 1;
        } else {
            eprintln!("disagreement at beta {b}, e {e}: {:?}", r.verdict_kind());
        }
    }
    assert!(agreed as f64 >= 0.99 * compared as f64, "{agreed} of {compared}");
}

#[test]
fn curves_are_stable_under_refinement() {
    let settings = ScanSettings { with_indices: false, ..ScanSettings::default() };
    let coarse = find_curves(&[0.2], 0.01, &settings).unwrap();
    let fine = find_curves(&[0.2], 0.005, &settings).unwrap();
    for c in [Curve::BetaS, Curve::BetaM, Curve::BetaK] {
        let d = (curve(&coarse, 0.2, c) - curve(&fine, 0.2, c)).abs();
        assert!(d < 0.01, "{c:?} moved by {d}");
    }
    for p in coarse.points.iter().chain(&fine.points) {
        assert!(p.bracket_width <= if coarse.points.contains(p) { 0.01 } else { 0.005 });
    }
}

#[test]
fn emitted_curves_are_ordered() {
    let res = 0.005;
    let set = find_curves(&[0.1, 0.25, 0.4], res, &ScanSettings::default()).unwrap();
    for row in &set.rows {
        let (bs, bm) = row.beta_s_m().unwrap();
        assert!(bs <= bm && bm <= row.beta_k + res, "e = {}: {bs} {bm} {}", row.e, row.beta_k);
        assert!(row.monotone);
    }
}

#[test]
fn scan_is_reproducible() {
    let s = ScanSettings::default();
    let a = scan_theta(&[0.3, 1.7, 5.0], &[0.0, 0.45], &s).unwrap();
    let b = scan_theta(&[0.3, 1.7, 5.0], &[0.0, 0.45], &s).unwrap();
    assert_eq!(a, b);
    assert_eq!(a[3].params.e, 0.45);
    assert_eq!(a[3].params.beta_hls, Some(0.3));
}
