//! Adaptive Simpson quadrature and bracketing root search.

const MAX_DEPTH: u32 = 50;
const MIN_DEPTH: u32 = 4;

struct Panel {
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` using adaptive
/// Simpson with Richardson correction.
///
/// A minimum subdivision depth guards against integrands that happen to
/// fool the first error estimate. At the depth limit the best available
/// estimate is kept.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, Panel { a, m, b, fa, fm, fb, whole }, tol, 0)
}

fn recurse<F: Fn(f64) -> f64>(f: &F, p: Panel, tol: f64, depth: u32) -> f64 {
    let lm = 0.5 * (p.a + p.m);
    let rm = 0.5 * (p.m + p.b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(p.a, p.m, p.fa, flm, p.fm);
    let right = simpson(p.m, p.b, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    if depth >= MAX_DEPTH || (depth >= MIN_DEPTH && delta.abs() <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    let l = Panel { a: p.a, m: lm, b: p.m, fa: p.fa, fm: flm, fb: p.fm, whole: left };
    let r = Panel { a: p.m, m: rm, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right };
    recurse(f, l, 0.5 * tol, depth + 1) + recurse(f, r, 0.5 * tol, depth + 1)
}

/// Bisects a bracket `[lo, hi]` with `f(lo)` and `f(hi)` of opposite signs
/// until its width is at most `width`. Returns the midpoint.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        if hi - lo <= width {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
