//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// `f` may fail; the first error aborts the search. Stops when the bracket is
/// narrower than `xtol` (plus a few ulps) or `f` hits exactly zero.
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NonConvergence(
            "brent: endpoints do not bracket a root",
        ));
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(Error::NonConvergence("brent: iteration cap reached"))
}

/// Plain bisection; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (lo, hi);
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NonConvergence(
            "bisect: endpoints do not bracket a root",
        ));
    }
    let lo_sign = flo.signum();
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence("bisect: iteration cap reached"))
}

/// Expands `[lo, hi]` geometrically until a decreasing function `f` changes
/// sign, i.e. `f(lo) > 0 > f(hi)`. `lo_floor` is an open lower limit that
/// is approached but never crossed.
pub fn bracket_decreasing<F>(
    mut f: F,
    start: f64,
    lo_floor: Option<f64>,
    max_expand: usize,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f0 = f(start)?;
    if f0 == 0.0 {
        return Ok((start, start));
    }
    let mut step = start.abs().max(1.0);
    if f0 > 0.0 {
        let mut lo = start;
        for _ in 0..max_expand {
            let hi = lo + step;
            if f(hi)? <= 0.0 {
                return Ok((lo, hi));
            }
            lo = hi;
            step *= 2.0;
        }
    } else {
        let mut hi = start;
        for _ in 0..max_expand {
            let mut lo = match lo_floor {
                Some(floor) => floor + 0.5 * (hi - floor),
                None => hi - step,
            };
            if lo == hi {
                // halving stalls within an ulp of the floor; the floor itself
                // is the last candidate
                match lo_floor {
                    Some(floor) if floor < hi => lo = floor,
                    _ => break,
                }
            }
            if f(lo)? >= 0.0 {
                return Ok((lo, hi));
            }
            hi = lo;
            step *= 2.0;
        }
    }
    Err(Error::NonConvergence("bracket expansion failed"))
}

/// Solves `f(x) = target` for increasing `f`.
///
/// `f` may return `-inf` below its effective domain and `+inf` above it;
/// the bracket is shrunk by bisection until both ends are finite before
/// switching to Brent. `floor` is an open lower limit for `x`.
pub fn invert_increasing<F>(mut f: F, target: f64, floor: Option<f64>, start: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut g = |x: f64| f(x).map(|v| if v.is_nan() { v } else { target - v });
    let (mut lo, mut hi) = bracket_decreasing(&mut g, start, floor, 400)?;
    if lo == hi {
        return Ok(lo);
    }
    let mut glo = g(lo)?;
    let mut ghi = g(hi)?;
    for _ in 0..400 {
        if glo.is_finite() && ghi.is_finite() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            // adjacent floats: keep the end inside the domain
            return Ok(if glo.is_finite() { lo } else { hi });
        }
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm > 0.0 {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }
    if glo.is_nan() || ghi.is_nan() {
        return Err(Error::NonConvergence("inversion hit a NaN"));
    }
    brent(g, lo, hi, 1e-15, 400)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inversion_handles_infinite_region() {
        // ln x, -inf at and below 0
        let f = |x: f64| Ok(if x <= 0.0 { f64::NEG_INFINITY } else { x.ln() });
        let x = invert_increasing(f, -3.0, None, 5.0).unwrap();
        assert!((x - (-3.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn brent_finds_cubic_root() {
        let r = brent(|x| Ok(x * x * x - 2.0), 0.0, 2.0, 1e-15, 100).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn bisect_agrees_with_brent() {
        let f = |x: f64| Ok(x.cos() - x);
        let a = bisect(f, 0.0, 1.0, 1e-14, 200).unwrap();
        let b = brent(f, 0.0, 1.0, 1e-14, 200).unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn bracket_respects_floor() {
        // decreasing with a pole at 1: f = 1/(x-1) - 10
        let (lo, hi) =
            bracket_decreasing(|x| Ok(1.0 / (x - 1.0) - 10.0), 3.0, Some(1.0), 200).unwrap();
        assert!(lo > 1.0 && lo < 1.1 && hi >= 1.1);
    }

    #[test]
    fn root_below_float_resolution_resolves_to_first_float_above_floor() {
        // the root sits e^-800 above the floor, closer than an ulp; an odd
        // mantissa makes the halving midpoint round up and stall
        let floor = 1f64.next_up();
        let f = move |x: f64| Ok(if x <= floor { f64::NEG_INFINITY } else { (x - floor).ln() });
        let x = invert_increasing(f, -800.0, Some(floor), 2.0).unwrap();
        assert_eq!(x, floor.next_up());
    }

    #[test]
    fn rejects_non_bracket() {
        assert!(brent(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 50).is_err());
    }
}
