use std::f64::consts::FRAC_PI_2;

use super::profile::{CurvatureProfile, Segment};
use crate::error::{Error, Result};

/// Centreline of a bend in the plane, entry tangent along +X at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarPath {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Tangent angle θ(s) measured from +X.
    pub theta: Vec<f64>,
}

impl PlanarPath {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// Length of the polyline through the points.
    pub fn polyline_length(&self) -> f64 {
        self.x
            .windows(2)
            .zip(self.y.windows(2))
            .map(|(x, y)| (x[1] - x[0]).hypot(y[1] - y[0]))
            .sum()
    }

    pub fn end(&self) -> (f64, f64) {
        (self.x[self.len() - 1], self.y[self.len() - 1])
    }

    pub fn total_turn(&self) -> f64 {
        self.theta[self.len() - 1] - self.theta[0]
    }
}

/// Integrate θ' = κ, (X', Y') = (cos θ, sin θ) with classical RK4 in s.
///
/// Steps never straddle a breakpoint of the profile, so kinks and curvature
/// steps do not degrade the order.
pub fn reconstruct_path(profile: &CurvatureProfile, ds: f64) -> Result<PlanarPath> {
    let s_f = profile.length();
    if !(ds > 0.0) || ds > s_f / 100.0 * (1.0 + 1e-12) {
        return Err(Error::StepTooCoarse { ds, limit: s_f / 100.0 });
    }
    let bps = profile.breakpoints();
    let mut path = PlanarPath {
        s: vec![0.0],
        x: vec![0.0],
        y: vec![0.0],
        theta: vec![0.0],
    };
    let (mut theta, mut x, mut y) = (0.0f64, 0.0f64, 0.0f64);
    for (run, w) in bps.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let n = ((b - a) / ds).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        let kappa = |s: f64| profile.eval_segment(Segment::Run(run), s).value;
        for i in 0..n {
            let s0 = a + h * i as f64;
            let (k1, k2, k4) = (kappa(s0), kappa(s0 + 0.5 * h), kappa(s0 + h));
            // θ stages
            let t1 = theta;
            let t2 = theta + 0.5 * h * k1;
            let t3 = theta + 0.5 * h * k2;
            let t4 = theta + h * k2;
            x += h / 6.0 * (t1.cos() + 2.0 * t2.cos() + 2.0 * t3.cos() + t4.cos());
            y += h / 6.0 * (t1.sin() + 2.0 * t2.sin() + 2.0 * t3.sin() + t4.sin());
            theta += h / 6.0 * (k1 + 4.0 * k2 + k4);
            let s1 = if i + 1 == n { b } else { s0 + h };
            path.s.push(s1);
            path.x.push(x);
            path.y.push(y);
            path.theta.push(theta);
        }
    }
    Ok(path)
}

/// Radius of the largest quarter circle that fits inside the bend.
///
/// The candidates are the quarter circles tangent to both guide axes (the
/// entry axis along +X through the entry point, the exit axis along +Y
/// through the exit point). A candidate of radius R fits when its tangent
/// points lie within the extent of the bend, R ≤ min(ΔX, ΔY), and no point
/// of the path lies inside its disc. For a path point at distances (u, w)
/// from the exit and entry axes, the disc contains the point exactly when
/// u + w − √(2uw) < R < u + w + √(2uw).
pub fn equivalent_radius(path: &PlanarPath) -> Result<f64> {
    if path.len() < 2 {
        return Err(Error::Precondition("path has fewer than two points".into()));
    }
    let entry = path.theta[0];
    let exit = path.theta[path.len() - 1];
    if entry.abs() > 1e-6 || (exit - FRAC_PI_2).abs() > 1e-6 {
        return Err(Error::TangentMismatch { entry, exit });
    }
    let (x_exit, y_exit) = path.end();
    let (x_entry, y_entry) = (path.x[0], path.y[0]);
    let extent = (x_exit - x_entry).min(y_exit - y_entry);
    if !(extent > 0.0) {
        return Ok(0.0);
    }
    // open interval of radii whose disc contains each point
    let excluded: Vec<(f64, f64)> = path
        .x
        .iter()
        .zip(&path.y)
        .filter_map(|(&x, &y)| {
            let (u, w) = (x_exit - x, y - y_entry);
            if u <= 0.0 || w <= 0.0 {
                return None;
            }
            let root = (2.0 * u * w).sqrt();
            Some((u + w - root, u + w + root))
        })
        .collect();
    let tol = 1e-9;
    let fits = |r: f64| excluded.iter().all(|&(lo, hi)| r <= lo * (1.0 + tol) || r >= hi * (1.0 - tol));
    if fits(extent) {
        return Ok(extent);
    }
    let mut candidates: Vec<f64> = excluded.iter().map(|&(lo, _)| lo).filter(|&lo| lo < extent).collect();
    candidates.sort_by(|a, b| b.total_cmp(a));
    Ok(candidates.into_iter().find(|&r| fits(r)).unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn straight_profile_gives_segment() {
        let p = CurvatureProfile::constant(0.0, 10.0).unwrap();
        let path = reconstruct_path(&p, 0.01).unwrap();
        let (x, y) = path.end();
        assert_relative_eq!(x, 10.0, max_relative = 1e-12);
        assert_eq!(y, 0.0);
    }

    #[test]
    fn quarter_circle_ends_at_r_r() {
        let r = 10.0;
        let p = CurvatureProfile::constant(1.0 / r, PI * r / 2.0).unwrap();
        let path = reconstruct_path(&p, p.length() / 1e4).unwrap();
        let (x, y) = path.end();
        assert!((x - r).abs() < 1e-10 && (y - r).abs() < 1e-10, "end ({x}, {y})");
        assert_relative_eq!(path.total_turn(), PI / 2.0, max_relative = 1e-12);
        assert_relative_eq!(path.polyline_length(), p.length(), max_relative = 1e-6);
        assert_relative_eq!(equivalent_radius(&path).unwrap(), r, max_relative = 1e-9);
    }

    #[test]
    fn right_angle_corner_encloses_the_full_quarter_circle() {
        // two perpendicular legs meeting at (1, 0): the corner lies outside
        // every tangent quarter circle
        let path = PlanarPath {
            s: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            x: vec![0.0, 0.5, 1.0, 1.0, 1.0],
            y: vec![0.0, 0.0, 0.0, 0.5, 1.0],
            theta: vec![0.0, 0.0, FRAC_PI_2 / 2.0, FRAC_PI_2, FRAC_PI_2],
        };
        assert_eq!(equivalent_radius(&path).unwrap(), 1.0);
    }

    #[test]
    fn diagonal_chamfer_limits_the_radius() {
        // straight cut from (0, 0) to (1, 1): the tangent circle centred at
        // (1 − R, R) touches the line y = x when (1 − 2R)/√2 = R
        let n = 1001;
        let t: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let mut theta = vec![FRAC_PI_2 / 2.0; n];
        theta[0] = 0.0;
        theta[n - 1] = FRAC_PI_2;
        let path = PlanarPath {
            s: t.iter().map(|v| v * 2f64.sqrt()).collect(),
            x: t.clone(),
            y: t.clone(),
            theta,
        };
        let expected = 1.0 / (2.0 + 2f64.sqrt());
        assert_relative_eq!(equivalent_radius(&path).unwrap(), expected, max_relative = 1e-9);
    }

    #[test]
    fn non_right_angle_is_rejected() {
        let p = CurvatureProfile::constant(0.1, 10.0).unwrap();
        let path = reconstruct_path(&p, 0.05).unwrap();
        assert!(matches!(equivalent_radius(&path), Err(Error::TangentMismatch { .. })));
    }

    #[test]
    fn coarse_step_is_rejected() {
        let p = CurvatureProfile::constant(0.1, 10.0).unwrap();
        assert!(matches!(reconstruct_path(&p, 0.2), Err(Error::StepTooCoarse { .. })));
        assert!(reconstruct_path(&p, 0.1).is_ok());
    }
}
