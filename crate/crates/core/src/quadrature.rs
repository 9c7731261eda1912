//! Composite Gauss–Legendre quadrature on top of `gauss-quad`.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::Result;

/// Nodes per panel.
pub const NODES: usize = 32;

fn rule(nodes: usize) -> &'static [(f64, f64)] {
    static R32: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static R64: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    let build = |n: usize| {
        GaussLegendre::new(NonZeroUsize::new(n).unwrap())
            .as_node_weight_pairs()
            .to_vec()
    };
    match nodes {
        32 => R32.get_or_init(|| build(32)),
        64 => R64.get_or_init(|| build(64)),
        _ => Box::leak(build(nodes).into_boxed_slice()),
    }
}

/// Panels needed on an interval of `width` for a solution with wavenumber
/// `kappa`: one per half wavelength of the squared integrand.
pub fn panels_for(kappa: f64, width: f64) -> usize {
    ((kappa * width / std::f64::consts::PI).ceil() as usize).max(1)
}

/// Integral of `f` over `[lo, hi]` split into `panels` equal panels of
/// `nodes`-point Gauss–Legendre.
pub fn integrate<F>(lo: f64, hi: f64, panels: usize, nodes: usize, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let pairs = rule(nodes);
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * h;
        let (mid, half) = (a + 0.5 * h, 0.5 * h);
        let mut s = 0.0;
        for &(x, w) in pairs {
            s += w * f(mid + half * x)?;
        }
        total += s * half;
    }
    Ok(total)
}
