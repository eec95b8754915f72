//! Bracketed scalar root finding and fixed-grid quadrature.

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200;

/// Root of `f` in `[lo, hi]` by bisection refined with secant steps
/// (Illinois-style false position with a bisection safeguard).
///
/// `f(lo)` and `f(hi)` must differ in sign. Converges when the bracket is
/// narrower than `x_tol` or `|f| <= f_tol`.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, x_tol: f64, f_tol: f64, what: &'static str) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NoBracket { what, lo: a, hi: b });
    }
    // side that was retained on the previous step: -1 = a, +1 = b
    let mut side = 0i8;
    for _ in 0..MAX_ITERATIONS {
        let width = b - a;
        let mut x = (a * fb - b * fa) / (fb - fa);
        // keep secant steps well inside the bracket, otherwise bisect
        if !(x > a + 0.01 * width && x < b - 0.01 * width) {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        if !fx.is_finite() {
            return Err(Error::NoConvergence { what, iterations: 0 });
        }
        if fx.abs() <= f_tol || width <= x_tol {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if b - a <= x_tol {
            return Ok(0.5 * (a + b));
        }
    }
    Err(Error::NoConvergence { what, iterations: MAX_ITERATIONS })
}

/// Grow `[lo, hi]` geometrically around a starting guess until `f` changes
/// sign or the limits are reached. `f` must be increasing across the root.
pub fn bracket_increasing<F>(
    mut f: F,
    guess: f64,
    min: f64,
    max: f64,
    what: &'static str,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let guess = guess.clamp(min, max);
    let g0 = f(guess)?;
    if g0 == 0.0 {
        return Ok((guess, guess));
    }
    let mut prev = guess;
    let factor = 1.5;
    loop {
        let next = if g0 < 0.0 { (prev * factor).min(max) } else { (prev / factor).max(min) };
        let g = f(next)?;
        if g.signum() != g0.signum() {
            return Ok(if g0 < 0.0 { (prev, next) } else { (next, prev) });
        }
        if next == max || next == min {
            return Err(Error::NoBracket { what, lo: min, hi: max });
        }
        prev = next;
    }
}

/// Composite Simpson rule on a uniform grid with an even number of
/// intervals.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    assert!(n >= 3 && n % 2 == 1, "simpson needs an odd number of samples, got {n}");
    let interior: f64 = values[1..n - 1]
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v })
        .sum();
    h / 3.0 * (values[0] + interior + values[n - 1])
}

/// Running integral on a uniform grid, fourth order: each interval uses the
/// cubic through its four nearest samples.
pub fn cumulative_integral(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 4, "cumulative_integral needs at least four samples");
    let f = values;
    let mut out = Vec::with_capacity(n);
    out.push(0.0);
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let piece = if i == 0 {
            h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if i == n - 2 {
            h / 24.0 * (9.0 * f[n - 1] + 19.0 * f[n - 2] - 5.0 * f[n - 3] + f[n - 4])
        } else {
            h / 24.0 * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2])
        };
        acc += piece;
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn finds_sqrt_two() {
        let r = find_root(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-14, 0.0, "x").unwrap();
        assert_relative_eq!(r, 2f64.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn handles_flat_sided_functions() {
        // steep on one side, flat on the other: plain false position stalls here
        let r = find_root(|x| Ok(x.powi(9) - 1e-9), -1.0, 1.0, 1e-15, 0.0, "x").unwrap();
        assert_relative_eq!(r, 1e-1, max_relative = 1e-10);
    }

    #[test]
    fn missing_sign_change_is_an_error() {
        let err = find_root(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 0.0, "x").unwrap_err();
        assert!(matches!(err, Error::NoBracket { .. }));
    }

    #[test]
    fn brackets_grow_both_ways() {
        let (a, b) = bracket_increasing(|x| Ok(x - 37.0), 1.0, 1e-3, 1e3, "x").unwrap();
        assert!(a <= 37.0 && 37.0 <= b);
        let (a, b) = bracket_increasing(|x| Ok(x - 0.02), 1.0, 1e-3, 1e3, "x").unwrap();
        assert!(a <= 0.02 && 0.02 <= b);
        assert!(bracket_increasing(|x| Ok(x + 1.0), 1.0, 1e-3, 1e3, "x").is_err());
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let h = 0.1;
        let v: Vec<f64> = (0..=10).map(|i| (i as f64 * h).powi(3)).collect();
        assert_relative_eq!(simpson(&v, h), 0.25, max_relative = 1e-14);
    }

    #[test]
    fn cumulative_integral_is_fourth_order() {
        let err = |n: usize| {
            let h = 2.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|i| (i as f64 * h).cos()).collect();
            let c = cumulative_integral(&v, h);
            c.iter().enumerate().map(|(i, ci)| (ci - (i as f64 * h).sin()).abs()).fold(0.0, f64::max)
        };
        let order = (err(41) / err(81)).log2();
        assert!(order > 3.7, "order {order}");
    }
}
