//! Scalar root finding: Brent's method and sign-change bracketing.

/// Brent's method on `[xa, xb]`. Returns `None` when the endpoints do not
/// bracket a sign change.
pub fn brentq<F>(f: F, xa: f64, xb: f64, xtol: f64, rtol: f64, iter: usize) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let mut xpre = xa;
    let mut xcur = xb;
    let mut xblk = 0.0;
    let mut fpre = f(xpre);
    let mut fcur = f(xcur);
    let mut fblk = 0.0;
    let mut spre = 0.0;
    let mut scur = 0.0;

    if fpre * fcur > 0.0 || fpre.is_nan() || fcur.is_nan() {
        return None;
    }
    if fpre == 0.0 {
        return Some(xpre);
    }
    if fcur == 0.0 {
        return Some(xcur);
    }

    for _ in 0..iter {
        if fpre * fcur < 0.0 {
            xblk = xpre;
            fblk = fpre;
            spre = xcur - xpre;
            scur = spre;
        }
        if fblk.abs() < fcur.abs() {
            xpre = xcur;
            xcur = xblk;
            xblk = xpre;
            fpre = fcur;
            fcur = fblk;
            fblk = fpre;
        }

        let delta = (xtol + rtol * xcur.abs()) / 2.0;
        let sbis = (xblk - xcur) / 2.0;
        if fcur == 0.0 || sbis.abs() < delta {
            return Some(xcur);
        }

        if spre.abs() > delta && fcur.abs() < fpre.abs() {
            let stry = if xpre == xblk {
                -fcur * (xcur - xpre) / (fcur - fpre)
            } else {
                let dpre = (fpre - fcur) / (xpre - xcur);
                let dblk = (fblk - fcur) / (xblk - xcur);
                -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            };
            if 2.0 * stry.abs() < spre.abs().min(3.0 * sbis.abs() - delta) {
                spre = scur;
                scur = stry;
            } else {
                spre = sbis;
                scur = sbis;
            }
        } else {
            spre = sbis;
            scur = sbis;
        }

        xpre = xcur;
        fpre = fcur;
        if scur.abs() > delta {
            xcur += scur;
        } else {
            xcur += if sbis > 0.0 { delta } else { -delta };
        }
        fcur = f(xcur);
    }
    Some(xcur)
}

/// Evaluates `f` at the given ascending sample points and returns the first
/// adjacent pair with a sign change.
pub fn first_sign_change<F>(f: F, points: &[f64]) -> Option<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let mut prev: Option<(f64, f64)> = None;
    for &x in points {
        let fx = f(x);
        if !fx.is_finite() {
            prev = None;
            continue;
        }
        if fx == 0.0 {
            return Some((x, x));
        }
        if let Some((xp, fp)) = prev {
            if fp * fx < 0.0 {
                return Some((xp, x));
            }
        }
        prev = Some((x, fx));
    }
    None
}

/// `count` points geometrically spaced from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root() {
        let r = brentq(|x| x * x * x - 0.5, 0.0, 1.0, 1e-15, 4.0 * f64::EPSILON, 200).unwrap();
        assert!((r - 0.5f64.powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn no_bracket() {
        assert!(brentq(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 1e-12, 100).is_none());
    }

    #[test]
    fn sign_change_scan() {
        let pts = log_space(1e-3, 10.0, 50);
        let (a, b) = first_sign_change(|x| x - 2.0, &pts).unwrap();
        assert!(a < 2.0 && b > 2.0);
    }
}
