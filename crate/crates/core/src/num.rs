//! Scalar numerics used by the engines: adaptive quadrature, bracketed
//! root-finding, and 1-D maximization.

use crate::error::{Error, Result};

/// Adaptive Simpson quadrature of a smooth integrand on [a, b].
///
/// The integrand is assumed smooth on the open interval; callers split at
/// known kinks before calling.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    adaptive_simpson(&f, a, b, fa, fm, fb, whole, tol, 52)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Fixed 16-point Gauss-Legendre rule on [a, b]; exact for polynomials up to
/// degree 31 and near machine precision for smooth rational integrands on
/// short intervals.
#[allow(clippy::excessive_precision)] // published 16-point Gauss-Legendre table
pub fn gauss16<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    // Abscissae/weights for n = 16 on [-1, 1].
    const X: [f64; 8] = [
        0.095_012_509_837_637_440_19,
        0.281_603_550_779_258_913_23,
        0.458_016_777_657_227_386_34,
        0.617_876_244_402_643_748_45,
        0.755_404_408_355_003_033_90,
        0.865_631_202_387_831_743_88,
        0.944_575_023_073_232_576_08,
        0.989_400_934_991_649_932_60,
    ];
    const W: [f64; 8] = [
        0.189_450_610_455_068_496_29,
        0.182_603_415_044_923_588_87,
        0.169_156_519_395_002_538_19,
        0.149_595_988_816_576_732_08,
        0.124_628_971_255_533_872_05,
        0.095_158_511_682_492_784_81,
        0.062_253_523_938_647_892_86,
        0.027_152_459_411_754_094_85,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..8 {
        acc += W[i] * (f(c + h * X[i]) + f(c - h * X[i]));
    }
    acc * h
}

/// Bracketed bisection for a continuous function with f(lo) and f(hi) of
/// opposite sign (or zero). Returns the midpoint of the final bracket.
pub fn bisect<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: u32,
) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numerical(format!(
            "bisection bracket does not straddle a root: f({lo}) = {flo}, f({hi}) = {fhi}"
        )));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section maximization of a unimodal function on [a, b].
/// Returns (argmax, max).
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Grid scan followed by golden-section refinement around the best cell.
/// Robust for piecewise-smooth objectives that need not be unimodal.
pub fn grid_then_golden<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    grid: usize,
    tol: f64,
) -> (f64, f64) {
    let n = grid.max(2);
    let mut best_i = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..=n {
        let x = a + (b - a) * i as f64 / n as f64;
        let v = f(x);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let lo = a + (b - a) * best_i.saturating_sub(1) as f64 / n as f64;
    let hi = a + (b - a) * (best_i + 1).min(n) as f64 / n as f64;
    let (x, v) = golden_max(f, lo, hi, tol);
    if v >= best_v {
        (x, v)
    } else {
        (a + (b - a) * best_i as f64 / n as f64, best_v)
    }
}
