//! Piecewise cubic Hermite interpolation of tabulated data.
//!
//! Slopes are either supplied or computed with the Fritsch–Carlson
//! monotone-preserving rule. The table is split into smooth *runs* at
//! breakpoints: nodes where the data has a slope discontinuity (a kink).
//! Each run gets its own one-sided end slopes, so a kink is reproduced as a
//! kink instead of being rounded off, and evaluation can be pinned to one
//! run (extrapolating its end cubic) for integrators that must not see the
//! discontinuity inside a step.

use crate::error::{Error, Result};

/// A kink is flagged when the jump in secant slope at a node exceeds the
/// jumps at the neighbouring nodes by this factor.
const KINK_RATIO: f64 = 25.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CubicHermite {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Slope at node `i` as the right end of interval `i - 1`.
    d_left: Vec<f64>,
    /// Slope at node `i` as the left end of interval `i`.
    d_right: Vec<f64>,
    /// Node indices starting each run, plus the final node index.
    run_starts: Vec<usize>,
}

/// Value and first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

fn check_nodes(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Table(format!("{} abscissae but {} values", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Table("need at least two nodes".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Table("non-finite entry".into()));
    }
    if let Some(i) = x.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Table(format!(
            "abscissae not strictly increasing at row {}: {} then {}",
            i + 1,
            x[i],
            x[i + 1]
        )));
    }
    Ok(())
}

fn secants(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| (ys[1] - ys[0]) / (xs[1] - xs[0])).collect()
}

/// Interior nodes where the slope jumps, judged against the local
/// curvature of the data.
fn detect_kinks(x: &[f64], y: &[f64]) -> Vec<usize> {
    let n = x.len();
    if n < 5 {
        return Vec::new();
    }
    let delta = secants(x, y);
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let span = x[n - 1] - x[0];
    // jump[i] is the secant jump at node i (1..n-1)
    let jump = |i: usize| (delta[i] - delta[i - 1]).abs();
    let mut kinks = Vec::new();
    for i in 2..n - 2 {
        let here = jump(i);
        if here <= 1e-9 * scale / span {
            continue;
        }
        let neighbours = jump(i - 1).max(jump(i + 1));
        if here > KINK_RATIO * neighbours {
            kinks.push(i);
        }
    }
    kinks
}

/// Fritsch–Carlson slopes for one smooth run.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta = secants(x, y);
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a * b <= 0.0 {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    let edge = |h0: f64, h1: f64, m0: f64, m1: f64| {
        let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if d.signum() != m0.signum() || m0 == 0.0 {
            0.0
        } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
            3.0 * m0
        } else {
            d
        }
    };
    d[0] = edge(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

impl CubicHermite {
    /// Monotone-preserving interpolant; kinks in the data are detected and
    /// become run boundaries.
    pub fn pchip(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_nodes(&x, &y)?;
        let kinks = detect_kinks(&x, &y);
        Self::pchip_with_breaks(x, y, &kinks)
    }

    /// Monotone-preserving interpolant with explicit interior breakpoints.
    pub fn pchip_with_breaks(x: Vec<f64>, y: Vec<f64>, breaks: &[usize]) -> Result<Self> {
        check_nodes(&x, &y)?;
        let n = x.len();
        let run_starts = run_starts(n, breaks)?;
        let mut d_left = vec![0.0; n];
        let mut d_right = vec![0.0; n];
        for w in run_starts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let d = pchip_slopes(&x[a..=b], &y[a..=b]);
            for (k, &dk) in d.iter().enumerate() {
                let i = a + k;
                if i > a {
                    d_left[i] = dk;
                }
                if i < b {
                    d_right[i] = dk;
                }
            }
        }
        d_left[0] = d_right[0];
        d_right[n - 1] = d_left[n - 1];
        Ok(Self { x, y, d_left, d_right, run_starts })
    }

    /// Hermite interpolant with known one-sided slopes. Nodes where the two
    /// slopes differ are breakpoints.
    pub fn with_slopes(x: Vec<f64>, y: Vec<f64>, d_left: Vec<f64>, d_right: Vec<f64>) -> Result<Self> {
        check_nodes(&x, &y)?;
        let n = x.len();
        if d_left.len() != n || d_right.len() != n {
            return Err(Error::Table("slope table length mismatch".into()));
        }
        if d_left.iter().chain(&d_right).any(|v| !v.is_finite()) {
            return Err(Error::Table("non-finite slope".into()));
        }
        let breaks: Vec<usize> = (1..n - 1).filter(|&i| d_left[i] != d_right[i]).collect();
        let run_starts = run_starts(n, &breaks)?;
        Ok(Self { x, y, d_left, d_right, run_starts })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn first(&self) -> f64 {
        self.x[0]
    }

    pub fn last(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    /// Abscissae bounding the smooth runs, first node and last node included.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.run_starts.iter().map(|&i| self.x[i]).collect()
    }

    pub fn run_count(&self) -> usize {
        self.run_starts.len() - 1
    }

    /// Index of the run containing `x` (clamped to the table).
    pub fn run_of(&self, x: f64) -> usize {
        let node = self.interval(x);
        self.run_starts[1..].partition_point(|&b| b <= node).min(self.run_count() - 1)
    }

    fn interval(&self, x: f64) -> usize {
        let n = self.x.len();
        self.x.partition_point(|&xi| xi <= x).saturating_sub(1).min(n - 2)
    }

    fn eval_interval(&self, k: usize, x: f64) -> Jet {
        let (x0, x1) = (self.x[k], self.x[k + 1]);
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        let (d0, d1) = (self.d_right[k], self.d_left[k + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * d1;
        let slope = (6.0 * t2 - 6.0 * t) / h * (y0 - y1) + (3.0 * t2 - 4.0 * t + 1.0) * d0 + (3.0 * t2 - 2.0 * t) * d1;
        let curv = (12.0 * t - 6.0) / (h * h) * (y0 - y1) + (6.0 * t - 4.0) / h * d0 + (6.0 * t - 2.0) / h * d1;
        Jet { value, d1: slope, d2: curv }
    }

    /// Evaluate at `x`, extrapolating the end cubics outside the table.
    pub fn eval(&self, x: f64) -> Jet {
        self.eval_interval(self.interval(x), x)
    }

    /// Evaluate with the cubic pieces of run `run` only: inside the run this
    /// equals [`eval`](Self::eval); outside it the nearest end piece of the
    /// run is extrapolated.
    pub fn eval_in_run(&self, run: usize, x: f64) -> Jet {
        let (a, b) = (self.run_starts[run], self.run_starts[run + 1]);
        let k = self.interval(x).clamp(a, b - 1);
        self.eval_interval(k, x)
    }

    /// Exact integral of the interpolant over the whole table.
    pub fn integral(&self) -> f64 {
        (0..self.x.len() - 1)
            .map(|k| {
                let h = self.x[k + 1] - self.x[k];
                h * (self.y[k] + self.y[k + 1]) / 2.0 + h * h * (self.d_right[k] - self.d_left[k + 1]) / 12.0
            })
            .sum()
    }
}

fn run_starts(n: usize, breaks: &[usize]) -> Result<Vec<usize>> {
    let mut starts = vec![0];
    for &b in breaks {
        if b == 0 || b >= n - 1 || b <= *starts.last().unwrap() {
            return Err(Error::Table(format!("invalid breakpoint index {b}")));
        }
        starts.push(b);
    }
    starts.push(n - 1);
    Ok(starts)
}
