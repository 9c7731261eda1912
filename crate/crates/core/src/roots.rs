//! Bracketed scalar root refinement.

use crate::error::Result;

/// Refines a sign change of `f` on `[lo, hi]` with the Illinois variant of
/// regula falsi, interleaved with bisection so the bracket always shrinks.
/// Returns the root estimate once the bracket is narrower than `tol`.
pub fn refine<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    mut flo: f64,
    mut fhi: f64,
    tol: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    debug_assert!(flo.signum() != fhi.signum());
    let mut side = 0i8;
    for iter in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mut x = if iter % 3 == 2 {
            0.5 * (lo + hi)
        } else {
            (lo * fhi - hi * flo) / (fhi - flo)
        };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Indices `i` with a sign change between `values[i]` and `values[i + 1]`.
pub fn sign_changes(values: &[f64]) -> Vec<usize> {
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != 0.0 && (w[1] == 0.0 || w[0].signum() != w[1].signum()))
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refines_cosine_root() {
        let f = |x: f64| Ok(x.cos());
        let r = refine(f, 1.0, 2.0, 1f64.cos(), 2f64.cos(), 1e-13).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn refines_steep_function() {
        let f = |x: f64| Ok((x - 0.3).powi(3) * 1e6 + 1e-9 * (x - 0.3));
        let r = refine(f, 0.0, 1.0, f(0.0).unwrap(), f(1.0).unwrap(), 1e-12).unwrap();
        assert!((r - 0.3).abs() < 1e-6);
    }

    #[test]
    fn finds_sign_changes() {
        assert_eq!(sign_changes(&[1.0, -1.0, -2.0, 3.0, 4.0]), vec![0, 2]);
        assert!(sign_changes(&[1.0, 2.0]).is_empty());
    }
}
