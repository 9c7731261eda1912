//! Cylindrical and spherical Bessel functions of integer order and real
//! positive argument, with first derivatives.
//!
//! The base orders are produced by one of two branches:
//!
//! * `x < ASYMPTOTIC_CROSSOVER`: Miller's downward recurrence normalized by
//!   the sum rule `1 = J_0 + 2 Σ J_2k`, with `Y_0`, `Y_1` from the Neumann
//!   series over the same recurrence values.
//! * `x >= ASYMPTOTIC_CROSSOVER`: Hankel's large-argument expansion.
//!
//! Higher orders follow from upward recurrence (always for `Y`, and for `J`
//! while `l <= x`) or from a Miller sweep normalized by the base order when
//! `l > x`. Spherical functions use the closed forms of `j_0, j_1, y_0, y_1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest order accepted unless a caller supplies its own bound.
pub const DEFAULT_MAX_ORDER: u32 = 2048;

/// Argument at which the base orders switch from the recurrence/series branch
/// to the Hankel expansion. The smallest Hankel term near here is ~e^{-2x}.
pub const ASYMPTOTIC_CROSSOVER: f64 = 25.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE: f64 = 1e250;

/// `J_l`, `Y_l` and their derivatives at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylPair {
    pub order: u32,
    pub x: f64,
    pub j: f64,
    pub jp: f64,
    pub y: f64,
    pub yp: f64,
}

impl CylPair {
    /// `J Y' - J' Y`, equal to `2 / (pi x)`.
    pub fn wronskian(&self) -> f64 {
        self.j * self.yp - self.jp * self.y
    }

    pub fn hankel1(&self) -> HankelPair {
        HankelPair {
            h: Complex64::new(self.j, self.y),
            hp: Complex64::new(self.jp, self.yp),
        }
    }
}

/// Spherical `j_l`, `y_l` and their derivatives at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphPair {
    pub order: u32,
    pub x: f64,
    pub j: f64,
    pub jp: f64,
    pub y: f64,
    pub yp: f64,
}

impl SphPair {
    /// `j y' - j' y`, equal to `1 / x^2`.
    pub fn wronskian(&self) -> f64 {
        self.j * self.yp - self.jp * self.y
    }

    pub fn hankel1(&self) -> HankelPair {
        HankelPair {
            h: Complex64::new(self.j, self.y),
            hp: Complex64::new(self.jp, self.yp),
        }
    }
}

/// First-kind Hankel function and its derivative with respect to the argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelPair {
    pub h: Complex64,
    pub hp: Complex64,
}

impl HankelPair {
    /// `h' / h`, scaled first so that `|h|²` cannot overflow.
    pub fn log_derivative(&self) -> Complex64 {
        let s = self.h.re.abs().max(self.h.im.abs());
        (self.hp / s) / (self.h / s)
    }
}

fn check_args(l: u32, x: f64, max_order: u32) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(x));
    }
    if l > max_order {
        return Err(Error::ModeTooHigh {
            mode: l,
            max: max_order,
        });
    }
    Ok(())
}

/// Even starting order for a downward sweep that must resolve order `l` at `x`.
fn miller_start(l: u32, x: f64) -> u32 {
    let m = (l as f64).max(x.ceil());
    let n = (m + 12.0 * m.cbrt() + 30.0) as u32;
    n + (n & 1)
}

pub fn cyl_bessel(l: u32, x: f64) -> Result<CylPair> {
    cyl_bessel_bounded(l, x, DEFAULT_MAX_ORDER)
}

pub fn cyl_bessel_bounded(l: u32, x: f64, max_order: u32) -> Result<CylPair> {
    check_args(l, x, max_order)?;
    let (base, j_lm1, j_l) = cyl_j_core(l, x);
    let (y_lm1, y_l) = upward_cyl(l, x, base.y0, base.y1);
    if !y_l.is_finite() || !y_lm1.is_finite() || (l as f64 > x && j_l.abs() < f64::MIN_POSITIVE) {
        return Err(Error::Range { order: l, x });
    }

    let (jp, yp) = if l == 0 {
        (-base.j1, -base.y1)
    } else {
        let lf = l as f64;
        (j_lm1 - lf / x * j_l, y_lm1 - lf / x * y_l)
    };
    if !yp.is_finite() {
        return Err(Error::Range { order: l, x });
    }

    Ok(CylPair {
        order: l,
        x,
        j: j_l,
        jp,
        y: y_l,
        yp,
    })
}

fn cyl_j_core(l: u32, x: f64) -> (CylBase, f64, f64) {
    if x < ASYMPTOTIC_CROSSOVER {
        let sweep = MillerCyl::run(l, x);
        let base = sweep.base(x);
        return (base, sweep.j_lm1 / sweep.norm, sweep.j_l / sweep.norm);
    }
    let base = cyl_base_asymptotic(x);
    if (l as f64) <= x {
        let (a, b) = upward_cyl(l, x, base.j0, base.j1);
        return (base, a, b);
    }
    let sweep = MillerCyl::run(l, x);
    let scale = if base.j0.abs() >= base.j1.abs() {
        base.j0 / sweep.f0
    } else {
        base.j1 / sweep.f1
    };
    (base, sweep.j_lm1 * scale, sweep.j_l * scale)
}

/// `(J_l(x), J_l'(x))` only. Never raises a range error: values below the
/// binary64 range underflow to zero.
pub fn cyl_j(l: u32, x: f64) -> Result<(f64, f64)> {
    check_args(l, x, DEFAULT_MAX_ORDER)?;
    let (base, j_lm1, j_l) = cyl_j_core(l, x);
    let jp = if l == 0 {
        -base.j1
    } else {
        j_lm1 - l as f64 / x * j_l
    };
    Ok((j_l, jp))
}

/// Unit vector along `(J_l(x), J_l'(x))`, accurate even where `J_l`
/// underflows.
pub fn cyl_j_direction(l: u32, x: f64) -> Result<(f64, f64)> {
    check_args(l, x, DEFAULT_MAX_ORDER)?;
    let (j, jp) = if x < ASYMPTOTIC_CROSSOVER || (l as f64) > x {
        let sweep = MillerCyl::run(l, x);
        let sign = if x < ASYMPTOTIC_CROSSOVER {
            sweep.norm.signum()
        } else {
            let base = cyl_base_asymptotic(x);
            if base.j0.abs() >= base.j1.abs() {
                (base.j0 / sweep.f0).signum()
            } else {
                (base.j1 / sweep.f1).signum()
            }
        };
        let (fl, other) = sweep.dir;
        let fp = if l == 0 {
            -other
        } else {
            other - l as f64 / x * fl
        };
        (sign * fl, sign * fp)
    } else {
        cyl_j(l, x)?
    };
    let n = j.hypot(jp);
    Ok((j / n, jp / n))
}

/// Unit vector along `(j_l(x), j_l'(x))`.
pub fn sph_j_direction(l: u32, x: f64) -> Result<(f64, f64)> {
    check_args(l, x, DEFAULT_MAX_ORDER)?;
    let (_, _, _, (j, jp)) = sph_j_core(l, x);
    let n = j.hypot(jp);
    Ok((j / n, jp / n))
}

pub fn cyl_hankel1(l: u32, x: f64) -> Result<HankelPair> {
    cyl_bessel(l, x).map(|p| p.hankel1())
}

/// Returns `(f_{l-1}, f_l)` from upward recurrence; `f_{-1}` is reported as `f_1`.
fn upward_cyl(l: u32, x: f64, f0: f64, f1: f64) -> (f64, f64) {
    match l {
        0 => (f1, f0),
        1 => (f0, f1),
        _ => {
            let (mut prev, mut cur) = (f0, f1);
            for n in 1..l {
                let next = 2.0 * n as f64 / x * cur - prev;
                prev = cur;
                cur = next;
                if !cur.is_finite() {
                    break;
                }
            }
            (prev, cur)
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CylBase {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

/// Unnormalized values of one downward sweep together with the sums needed for
/// the normalization and the Neumann series.
struct MillerCyl {
    /// `(f_l, f_{l-1})` as recorded, never rescaled (for l = 0: `(f_0, f_1)`).
    dir: (f64, f64),
    j_l: f64,
    j_lm1: f64,
    f0: f64,
    f1: f64,
    norm: f64,
    s_y0: f64,
    s_y1: f64,
}

impl MillerCyl {
    fn run(l: u32, x: f64) -> Self {
        let start = miller_start(l, x);
        let mut out = MillerCyl {
            dir: (0.0, 0.0),
            j_l: 0.0,
            j_lm1: 0.0,
            f0: 0.0,
            f1: 0.0,
            norm: 0.0,
            s_y0: 0.0,
            s_y1: 0.0,
        };
        let mut upper = 0.0;
        let mut cur = 1e-30;
        let mut n = start;
        loop {
            out.absorb(n, cur, l);
            if n == 0 {
                if l == 0 {
                    out.dir = (cur, upper);
                }
                break;
            }
            let next = 2.0 * n as f64 / x * cur - upper;
            if n == l {
                out.dir = (cur, next);
            }
            upper = cur;
            cur = next;
            n -= 1;
            if cur.abs() > RESCALE {
                let s = 1.0 / RESCALE;
                cur *= s;
                upper *= s;
                out.scale(s);
            }
        }
        out
    }

    fn absorb(&mut self, n: u32, f: f64, l: u32) {
        if n == l {
            self.j_l = f;
        }
        if l > 0 && n == l - 1 {
            self.j_lm1 = f;
        }
        match n {
            0 => {
                self.f0 = f;
                self.norm += f;
            }
            1 => self.f1 = f,
            _ => {}
        }
        if n > 0 && n % 2 == 0 {
            self.norm += 2.0 * f;
            let k = (n / 2) as f64;
            let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
            self.s_y0 += sign * f / k;
        }
        if n % 2 == 1 {
            // coefficient of J_{2j+1} in sum_k (-1)^k (J_{2k-1} - J_{2k+1}) / k
            let j = (n - 1) / 2;
            let sign = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
            let mut c = 1.0 / (j + 1) as f64;
            if j >= 1 {
                c += 1.0 / j as f64;
            }
            self.s_y1 += sign * c * f;
        }
    }

    fn scale(&mut self, s: f64) {
        self.j_l *= s;
        self.j_lm1 *= s;
        self.f0 *= s;
        self.f1 *= s;
        self.norm *= s;
        self.s_y0 *= s;
        self.s_y1 *= s;
    }

    fn base(&self, x: f64) -> CylBase {
        let j0 = self.f0 / self.norm;
        let j1 = self.f1 / self.norm;
        let log_term = (0.5 * x).ln() + EULER_GAMMA;
        let y0 = 2.0 / PI * (log_term * j0 - 2.0 * self.s_y0 / self.norm);
        let y1 = 2.0 / PI * (-j0 / x + log_term * j1 + self.s_y1 / self.norm);
        CylBase { j0, j1, y0, y1 }
    }
}

/// Base orders from the recurrence branch; valid for any `x > 0`, used below
/// the crossover.
pub fn cyl_base_recurrence(x: f64) -> CylBase {
    MillerCyl::run(1, x).base(x)
}

/// Base orders from Hankel's expansion; accurate above the crossover.
pub fn cyl_base_asymptotic(x: f64) -> CylBase {
    let (j0, y0) = hankel_expansion(0.0, x);
    let (j1, y1) = hankel_expansion(1.0, x);
    CylBase { j0, j1, y0, y1 }
}

fn hankel_expansion(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200u32 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (8.0 * k as f64 * x);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let phi = (0.5 * nu + 0.25) * PI;
    let (s, c) = x.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let cos_chi = c * cp + s * sp;
    let sin_chi = s * cp - c * sp;
    let amp = (2.0 / (PI * x)).sqrt();
    (
        amp * (p * cos_chi - q * sin_chi),
        amp * (p * sin_chi + q * cos_chi),
    )
}

pub fn sph_bessel(l: u32, x: f64) -> Result<SphPair> {
    sph_bessel_bounded(l, x, DEFAULT_MAX_ORDER)
}

pub fn sph_bessel_bounded(l: u32, x: f64, max_order: u32) -> Result<SphPair> {
    check_args(l, x, max_order)?;
    let (s, c) = x.sin_cos();
    let y0 = -c / x;
    let y1 = -(c / x + s) / x;
    let (j1, j_lm1, j_l, _) = sph_j_core(l, x);
    let (y_lm1, y_l) = upward_sph(l, x, y0, y1);
    if !y_l.is_finite() || !y_lm1.is_finite() || (l as f64 > x && j_l.abs() < f64::MIN_POSITIVE) {
        return Err(Error::Range { order: l, x });
    }
    let (jp, yp) = if l == 0 {
        (-j1, -y1)
    } else {
        let lf = (l + 1) as f64;
        (j_lm1 - lf / x * j_l, y_lm1 - lf / x * y_l)
    };
    if !yp.is_finite() {
        return Err(Error::Range { order: l, x });
    }
    Ok(SphPair {
        order: l,
        x,
        j: j_l,
        jp,
        y: y_l,
        yp,
    })
}

/// Returns `(j_1, j_{l-1}, j_l, d)` where `d` is `(j_l, j_l')` up to a positive
/// factor, free of underflow.
fn sph_j_core(l: u32, x: f64) -> (f64, f64, f64, (f64, f64)) {
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = if x < 1.0 {
        sph_j1_series(x)
    } else {
        (s / x - c) / x
    };
    if (l as f64) <= x {
        let (a, b) = upward_sph(l, x, j0, j1);
        let bp = if l == 0 {
            -j1
        } else {
            a - (l + 1) as f64 / x * b
        };
        return (j1, a, b, (b, bp));
    }
    let start = miller_start(l, x);
    let (mut rec_l, mut rec_lm1, mut rec1) = (0.0, 0.0, 0.0);
    let mut dir = (0.0, 0.0);
    let rec0;
    let mut upper = 0.0;
    let mut cur = 1e-30;
    let mut n = start;
    loop {
        if n == l {
            rec_l = cur;
        }
        if l > 0 && n == l - 1 {
            rec_lm1 = cur;
        }
        if n == 1 {
            rec1 = cur;
        }
        if n == 0 {
            rec0 = cur;
            if l == 0 {
                dir = (cur, upper);
            }
            break;
        }
        let next = (2 * n + 1) as f64 / x * cur - upper;
        if n == l {
            dir = (cur, next);
        }
        upper = cur;
        cur = next;
        n -= 1;
        if cur.abs() > RESCALE {
            let sc = 1.0 / RESCALE;
            cur *= sc;
            upper *= sc;
            rec_l *= sc;
            rec_lm1 *= sc;
            rec1 *= sc;
        }
    }
    let scale = if j0.abs() >= j1.abs() {
        j0 / rec0
    } else {
        j1 / rec1
    };
    let dp = if l == 0 {
        -dir.1
    } else {
        dir.1 - (l + 1) as f64 / x * dir.0
    };
    let sg = scale.signum();
    (j1, rec_lm1 * scale, rec_l * scale, (sg * dir.0, sg * dp))
}

/// `(j_l(x), j_l'(x))` only; underflows to zero instead of raising.
pub fn sph_j(l: u32, x: f64) -> Result<(f64, f64)> {
    check_args(l, x, DEFAULT_MAX_ORDER)?;
    let (j1, j_lm1, j_l, _) = sph_j_core(l, x);
    let jp = if l == 0 {
        -j1
    } else {
        j_lm1 - (l + 1) as f64 / x * j_l
    };
    Ok((j_l, jp))
}

pub fn sph_hankel1(l: u32, x: f64) -> Result<HankelPair> {
    sph_bessel(l, x).map(|p| p.hankel1())
}

fn upward_sph(l: u32, x: f64, f0: f64, f1: f64) -> (f64, f64) {
    match l {
        0 => (f1, f0),
        1 => (f0, f1),
        _ => {
            let (mut prev, mut cur) = (f0, f1);
            for n in 1..l {
                let next = (2 * n + 1) as f64 / x * cur - prev;
                prev = cur;
                cur = next;
                if !cur.is_finite() {
                    break;
                }
            }
            (prev, cur)
        }
    }
}

fn sph_j1_series(x: f64) -> f64 {
    // x * sum_k (-x^2/2)^k / (k! (2k+3)!!)
    let h = -0.5 * x * x;
    let mut term = 1.0 / 3.0;
    let mut sum = term;
    for k in 1..20 {
        term *= h / (k as f64 * (2 * k + 3) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    x * sum
}
