//! Curvature profiles by inverse engineering of the transverse motion.
//!
//! All computations run in natural units (σ, 1/ω): ω = 1 and ħ/m = 1. The
//! public entry points take [`PhysicalParams`] and SI design targets and
//! return a [`BendDesign`] whose tables are in natural units, with the unit
//! system attached for conversion.
//!
//! The transverse trajectory is imposed as the quintic
//! `P(x) = Δy (10x³ − 15x⁴ + 6x⁵)` over the first half of the bend and
//! mirrored over the second. Energy conservation `ẏ² + y² + v_κ² = ṡ₀²`
//! then gives `v_κ(t)`, and the transverse Newton equation gives `ṡ(t)` and
//! `κ(t)` pointwise.

use crate::error::{Error, Result};
use crate::geometry::CurvatureProfile;
use crate::roots::{bracket_increasing, cumulative_integral, find_root, simpson};
use crate::scenario::{DesignKind, PhysicalParams, UnitSystem};

/// Uniform time samples per half bend.
pub const HALF_BEND_SAMPLES: usize = 4000;

const ANGLE_TOL: f64 = 1e-10;

/// y and its first three time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub y: f64,
    pub ydot: f64,
    pub yddot: f64,
    pub yjerk: f64,
}

/// `y(t) = P(t/T)` on `[0, T]`, mirrored as `y(2T − t)` on `[T, 2T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseTrajectory {
    pub half_time: f64,
    pub delta_y: f64,
}

impl TransverseTrajectory {
    pub fn new(delta_y: f64, half_time: f64) -> Self {
        Self { half_time, delta_y }
    }

    pub fn eval(&self, t: f64) -> Result<TrajectoryPoint> {
        polynomial_trajectory(self.delta_y, self.half_time, t)
    }

    /// max over the bend of ẏ² + ω²y² (natural units).
    pub fn max_transverse_energy(&self) -> f64 {
        let n = 2000;
        (0..=n)
            .map(|i| {
                let p = quintic(self.delta_y, self.half_time, self.half_time * i as f64 / n as f64);
                p.ydot * p.ydot + p.y * p.y
            })
            .fold(0.0, f64::max)
    }
}

fn quintic(delta_y: f64, half_time: f64, t: f64) -> TrajectoryPoint {
    let x = t / half_time;
    let (x2, x3) = (x * x, x * x * x);
    let t1 = half_time;
    let t2 = t1 * t1;
    TrajectoryPoint {
        y: delta_y * x3 * (10.0 - 15.0 * x + 6.0 * x2),
        ydot: delta_y * 30.0 * x2 * (1.0 - 2.0 * x + x2) / t1,
        yddot: delta_y * 60.0 * x * (1.0 - 3.0 * x + 2.0 * x2) / t2,
        yjerk: delta_y * 60.0 * (1.0 - 6.0 * x + 6.0 * x2) / (t2 * t1),
    }
}

/// The quintic transverse trajectory and its derivatives at `t ∈ [0, 2T]`.
pub fn polynomial_trajectory(delta_y: f64, half_time: f64, t: f64) -> Result<TrajectoryPoint> {
    let t_max = 2.0 * half_time;
    if !(0.0..=t_max).contains(&t) {
        return Err(Error::OutOfRange { t, t_max });
    }
    if t <= half_time {
        Ok(quintic(delta_y, half_time, t))
    } else {
        let p = quintic(delta_y, half_time, t_max - t);
        Ok(TrajectoryPoint {
            y: p.y,
            ydot: -p.ydot,
            yddot: p.yddot,
            yjerk: -p.yjerk,
        })
    }
}

/// Transverse excursion Δy at the bend midpoint for a peak curvature
/// `kappa_m`: the negative root of `2κ_m Δy² − Δy − κ_m ṡ₀²/ω² = 0`.
///
/// Any consistent unit system works. Written in a cancellation-free form.
pub fn solve_delta_y(sdot0: f64, omega: f64, kappa_m: f64) -> f64 {
    let q = 8.0 * (kappa_m * sdot0 / omega).powi(2);
    -2.0 * kappa_m * (sdot0 / omega).powi(2) / ((1.0 + q).sqrt() + 1.0)
}

/// Pointwise reconstruction along the imposed trajectory (ω = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub v_kappa: f64,
    pub sdot: f64,
    pub kappa: f64,
    /// dκ/ds
    pub kappa_slope: f64,
}

/// Longitudinal velocity, curvature and its slope from the transverse
/// motion. These are the regular forms of `ṡ = v_κ + v̇_κ y/ẏ` and
/// `κ = v̇_κ/(ṡẏ)`, without the 0/0 at the trajectory turning points.
pub fn reconstruct(sdot0: f64, p: &TrajectoryPoint) -> Option<Reconstruction> {
    let vk2 = sdot0 * sdot0 - p.ydot * p.ydot - p.y * p.y;
    if vk2 <= 0.0 {
        return None;
    }
    let v = vk2.sqrt();
    let force = p.yddot + p.y;
    let force_dot = p.yjerk + p.ydot;
    let sdot = v - force * p.y / v;
    if sdot <= 0.0 {
        return None;
    }
    let v_dot = -p.ydot * force / v;
    let s_ddot = v_dot - (force_dot * p.y + force * p.ydot) / v + force * p.y * v_dot / vk2;
    let denom = v * sdot;
    let kappa = -force / denom;
    let kappa_dot = -force_dot / denom + force * (v_dot * sdot + v * s_ddot) / (denom * denom);
    Some(Reconstruction {
        v_kappa: v,
        sdot,
        kappa,
        kappa_slope: kappa_dot / sdot,
    })
}

/// Time-resolved design tables over the full bend `[0, 2T]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DesignTables {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub sdot: Vec<f64>,
    pub v_kappa: Vec<f64>,
    pub kappa: Vec<f64>,
    pub y: Vec<f64>,
    pub ydot: Vec<f64>,
}

/// Inputs a design was built from, in natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignInputs {
    pub sdot0: f64,
    pub kappa_m: Option<f64>,
    pub radius: Option<f64>,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BendDesign {
    pub kind: DesignKind,
    pub profile: CurvatureProfile,
    pub trajectory: Option<TransverseTrajectory>,
    /// T (sta2d), T₁D (adiabatic1d), or half the traversal time at ṡ₀
    /// (circular).
    pub half_time: f64,
    pub inputs: DesignInputs,
    pub tables: DesignTables,
    pub units: UnitSystem,
}

impl BendDesign {
    pub fn length(&self) -> f64 {
        self.profile.length()
    }

    pub fn delta_y(&self) -> Option<f64> {
        self.trajectory.map(|t| t.delta_y)
    }

    /// Peak |κ| of the profile.
    pub fn kappa_peak(&self) -> f64 {
        self.profile.kappa_max()
    }
}

fn half_bend_angle(sdot0: f64, delta_y: f64, half_time: f64) -> Option<f64> {
    let n = HALF_BEND_SAMPLES;
    let h = half_time / n as f64;
    let mut integrand = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let p = quintic(delta_y, half_time, h * i as f64);
        let r = reconstruct(sdot0, &p)?;
        integrand.push(r.kappa * r.sdot);
    }
    Some(simpson(&integrand, h))
}

fn check_design_inputs(sdot0: f64, angle: f64) -> Result<()> {
    if !(sdot0 > 0.0 && sdot0.is_finite()) {
        return Err(Error::Precondition(format!("incident velocity must be > 0, got {sdot0}")));
    }
    if !(angle > 0.0 && angle <= std::f64::consts::PI) {
        return Err(Error::Precondition(format!("bend angle must lie in (0, π], got {angle}")));
    }
    Ok(())
}

/// Exact inverse-engineered bend in natural units.
pub fn design_sta_natural(sdot0: f64, kappa_m: f64, angle: f64, units: UnitSystem) -> Result<BendDesign> {
    check_design_inputs(sdot0, angle)?;
    if !(kappa_m > 0.0 && kappa_m.is_finite()) {
        return Err(Error::Precondition(format!("peak curvature must be > 0, got {kappa_m}")));
    }
    let delta_y = solve_delta_y(sdot0, 1.0, kappa_m);
    if delta_y * delta_y >= sdot0 * sdot0 {
        return Err(Error::Infeasible {
            transverse: delta_y * delta_y,
            total: sdot0 * sdot0,
        });
    }
    let half_angle = 0.5 * angle;
    // infeasible (too short) trial times count as undershooting the angle
    let g = |t: f64| -> Result<f64> {
        Ok(half_bend_angle(sdot0, delta_y, t).map_or(-half_angle - 1.0, |a| a - half_angle))
    };
    let guess = half_angle / (kappa_m * sdot0);
    let (lo, hi) = bracket_increasing(g, guess, 1e-3, 1e3, "half-bend angle")?;
    let half_time = if lo == hi { lo } else { find_root(g, lo, hi, 1e-14, ANGLE_TOL, "half-bend time")? };
    let residual = g(half_time)?;
    if residual.abs() > ANGLE_TOL {
        return Err(Error::NoConvergence { what: "half-bend time", iterations: 0 });
    }
    let trajectory = TransverseTrajectory::new(delta_y, half_time);
    if trajectory.max_transverse_energy() >= sdot0 * sdot0 {
        return Err(Error::Infeasible {
            transverse: trajectory.max_transverse_energy(),
            total: sdot0 * sdot0,
        });
    }

    let n = HALF_BEND_SAMPLES;
    let h = half_time / n as f64;
    let mut half = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = h * i as f64;
        let p = quintic(delta_y, half_time, t);
        let r = reconstruct(sdot0, &p).ok_or(Error::Infeasible {
            transverse: p.ydot * p.ydot + p.y * p.y,
            total: sdot0 * sdot0,
        })?;
        half.push((t, p, r));
    }
    let sdot: Vec<f64> = half.iter().map(|(_, _, r)| r.sdot).collect();
    let s_half = cumulative_integral(&sdot, h);
    let s_mid = s_half[n];
    let s_f = 2.0 * s_mid;

    // first half then mirror; the midpoint is a kink (slope flips sign)
    let mut s = s_half.clone();
    let mut kappa: Vec<f64> = half.iter().map(|(_, _, r)| r.kappa).collect();
    let mut slope_left: Vec<f64> = half.iter().map(|(_, _, r)| r.kappa_slope).collect();
    let mut slope_right = slope_left.clone();
    slope_right[n] = -slope_left[n];
    for i in (0..n).rev() {
        s.push(s_f - s_half[i]);
        kappa.push(half[i].2.kappa);
        slope_left.push(-half[i].2.kappa_slope);
        slope_right.push(-half[i].2.kappa_slope);
    }
    let profile = CurvatureProfile::from_samples_with_slopes(s.clone(), kappa.clone(), slope_left, slope_right)?;

    let mut tables = DesignTables::default();
    for (i, (t, p, r)) in half.iter().enumerate() {
        tables.t.push(*t);
        tables.s.push(s_half[i]);
        tables.sdot.push(r.sdot);
        tables.v_kappa.push(r.v_kappa);
        tables.kappa.push(r.kappa);
        tables.y.push(p.y);
        tables.ydot.push(p.ydot);
    }
    for i in (0..n).rev() {
        let (t, p, r) = &half[i];
        tables.t.push(2.0 * half_time - t);
        tables.s.push(s_f - s_half[i]);
        tables.sdot.push(r.sdot);
        tables.v_kappa.push(r.v_kappa);
        tables.kappa.push(r.kappa);
        tables.y.push(p.y);
        tables.ydot.push(-p.ydot);
    }

    Ok(BendDesign {
        kind: DesignKind::Sta2d,
        profile,
        trajectory: Some(trajectory),
        half_time,
        inputs: DesignInputs {
            sdot0,
            kappa_m: Some(kappa_m),
            radius: None,
            angle,
        },
        tables,
        units,
    })
}

/// Peak curvature (natural units) whose exact design takes `half_time`
/// for the first half of the bend. T falls monotonically as κ_m grows.
pub fn sta_kappa_for_half_time(sdot0: f64, half_time: f64, angle: f64, units: UnitSystem) -> Result<f64> {
    if !(half_time > 0.0 && half_time.is_finite()) {
        return Err(Error::Precondition(format!("half-bend time must be > 0, got {half_time}")));
    }
    let g = |kappa: f64| -> Result<f64> { Ok(half_time - design_sta_natural(sdot0, kappa, angle, units)?.half_time) };
    let guess = 0.5 * angle / (sdot0 * half_time);
    let (lo, hi) = bracket_increasing(g, guess, 1e-6, 10.0, "half-bend time")?;
    if lo == hi {
        return Ok(lo);
    }
    find_root(g, lo, hi, 1e-13 * hi, 1e-12 * half_time, "peak curvature for the half-bend time")
}

/// Exact inverse-engineered bend for a peak curvature `kappa_m` in 1/m.
pub fn design_sta_bend(params: &PhysicalParams, kappa_m: f64, angle: f64) -> Result<BendDesign> {
    let units = params.units();
    design_sta_natural(
        units.velocity_to_internal(params.sdot0),
        units.curvature_to_internal(kappa_m),
        angle,
        units,
    )
}

/// Curvature of the 1D-adiabatic design at one instant: root of
/// `ÿ + y + (ṡ₀² + κ²/4) κ (1 − κy) = 0` continued from `previous`.
fn adiabatic_kappa(sdot0: f64, p: &TrajectoryPoint, previous: f64, t: f64) -> Result<f64> {
    let f = |k: f64| Ok(p.yddot + p.y + (sdot0 * sdot0 + 0.25 * k * k) * k * (1.0 - k * p.y));
    let floor = 1e-3 / sdot0;
    let mut width = 0.2 * previous.abs() + floor;
    for _ in 0..6 {
        let (lo, hi) = (previous - width, previous + width);
        if f(lo)?.signum() != f(hi)?.signum() {
            return find_root(f, lo, hi, 1e-15 * (1.0 + previous.abs()), 0.0, "adiabatic curvature");
        }
        width *= 2.0;
    }
    Err(Error::BranchLost {
        t,
        kappa_lo: previous - width,
        kappa_hi: previous + width,
    })
}

struct AdiabaticHalf {
    points: Vec<TrajectoryPoint>,
    kappa: Vec<f64>,
    sdot: Vec<f64>,
}

fn adiabatic_half(sdot0: f64, delta_y: f64, half_time: f64) -> Result<AdiabaticHalf> {
    let n = HALF_BEND_SAMPLES;
    let h = half_time / n as f64;
    let mut points = Vec::with_capacity(n + 1);
    let mut kappa = Vec::with_capacity(n + 1);
    let mut previous = 0.0;
    for i in 0..=n {
        let t = h * i as f64;
        let p = quintic(delta_y, half_time, t);
        let k = if i == 0 { 0.0 } else { adiabatic_kappa(sdot0, &p, previous, t)? };
        previous = k;
        points.push(p);
        kappa.push(k);
    }
    let sdot = kappa.iter().map(|k| (sdot0 * sdot0 + 0.25 * k * k).sqrt()).collect();
    Ok(AdiabaticHalf { points, kappa, sdot })
}

/// 1D-adiabatic baseline in natural units. `delta_y` is the transverse
/// excursion of the matched 2D design.
pub fn design_adiabatic_1d_natural(sdot0: f64, delta_y: f64, angle: f64, units: UnitSystem) -> Result<BendDesign> {
    check_design_inputs(sdot0, angle)?;
    if !(delta_y < 0.0 && delta_y.is_finite()) {
        return Err(Error::Precondition(format!("transverse excursion must be < 0, got {delta_y}")));
    }
    if delta_y * delta_y >= sdot0 * sdot0 {
        return Err(Error::Infeasible {
            transverse: delta_y * delta_y,
            total: sdot0 * sdot0,
        });
    }
    let half_angle = 0.5 * angle;
    let n = HALF_BEND_SAMPLES;
    let angle_of = |t: f64| -> Result<f64> {
        let half = adiabatic_half(sdot0, delta_y, t)?;
        let integrand: Vec<f64> = half.kappa.iter().zip(&half.sdot).map(|(k, v)| k * v).collect();
        Ok(simpson(&integrand, t / n as f64) - half_angle)
    };
    // losing the branch means the trial time is too short
    let g = |t: f64| -> Result<f64> {
        match angle_of(t) {
            Err(Error::BranchLost { .. }) => Ok(-half_angle - 1.0),
            other => other,
        }
    };
    let kappa_guess = -delta_y / (sdot0 * sdot0);
    let guess = half_angle / (kappa_guess * sdot0);
    let (lo, hi) = bracket_increasing(g, guess, 1e-3, 1e3, "1D half-bend angle")?;
    let half_time = if lo == hi { lo } else { find_root(g, lo, hi, 1e-14, ANGLE_TOL, "1D half-bend time")? };
    if angle_of(half_time)?.abs() > ANGLE_TOL {
        return Err(Error::NoConvergence { what: "1D half-bend time", iterations: 0 });
    }

    let half = adiabatic_half(sdot0, delta_y, half_time)?;
    let h = half_time / n as f64;
    let s_half = cumulative_integral(&half.sdot, h);
    let s_f = 2.0 * s_half[n];
    let mut s = s_half.clone();
    let mut kappa = half.kappa.clone();
    for i in (0..n).rev() {
        s.push(s_f - s_half[i]);
        kappa.push(half.kappa[i]);
    }
    let profile = CurvatureProfile::from_samples(s, kappa)?;

    let mut tables = DesignTables::default();
    let order: Vec<(usize, bool)> = (0..=n).map(|i| (i, false)).chain((0..n).rev().map(|i| (i, true))).collect();
    for (i, mirrored) in order {
        let t = h * i as f64;
        let p = &half.points[i];
        let k = half.kappa[i];
        tables.t.push(if mirrored { 2.0 * half_time - t } else { t });
        tables.s.push(if mirrored { s_f - s_half[i] } else { s_half[i] });
        tables.sdot.push(half.sdot[i]);
        tables.v_kappa.push(half.sdot[i] * (1.0 - k * p.y));
        tables.kappa.push(k);
        tables.y.push(p.y);
        tables.ydot.push(if mirrored { -p.ydot } else { p.ydot });
    }

    Ok(BendDesign {
        kind: DesignKind::Adiabatic1d,
        profile,
        trajectory: Some(TransverseTrajectory::new(delta_y, half_time)),
        half_time,
        inputs: DesignInputs {
            sdot0,
            kappa_m: None,
            radius: None,
            angle,
        },
        tables,
        units,
    })
}

/// 1D-adiabatic baseline for a transverse excursion `delta_y` in m.
pub fn design_adiabatic_1d_bend(params: &PhysicalParams, delta_y: f64, angle: f64) -> Result<BendDesign> {
    let units = params.units();
    design_adiabatic_1d_natural(
        units.velocity_to_internal(params.sdot0),
        units.length_to_internal(delta_y),
        angle,
        units,
    )
}

/// Constant-curvature arc in natural units.
pub fn circular_natural(sdot0: f64, radius: f64, angle: f64, units: UnitSystem) -> Result<BendDesign> {
    check_design_inputs(sdot0, angle)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Precondition(format!("radius must be > 0, got {radius}")));
    }
    let length = radius * angle;
    let profile = CurvatureProfile::constant(1.0 / radius, length)?;
    Ok(BendDesign {
        kind: DesignKind::Circular,
        profile,
        trajectory: None,
        half_time: 0.5 * length / sdot0,
        inputs: DesignInputs {
            sdot0,
            kappa_m: Some(1.0 / radius),
            radius: Some(radius),
            angle,
        },
        tables: DesignTables::default(),
        units,
    })
}

/// Circular arc of radius `radius` (m) turning by `angle`.
pub fn circular_bend(params: &PhysicalParams, radius: f64, angle: f64) -> Result<BendDesign> {
    let units = params.units();
    circular_natural(
        units.velocity_to_internal(params.sdot0),
        units.length_to_internal(radius),
        angle,
        units,
    )
}

/// Wrap a tabulated profile so it can be simulated at incident speed
/// `sdot0` (natural units).
pub fn tabulated_natural(profile: CurvatureProfile, sdot0: f64, units: UnitSystem) -> Result<BendDesign> {
    if !(sdot0 > 0.0 && sdot0.is_finite()) {
        return Err(Error::Precondition(format!("incident velocity must be > 0, got {sdot0}")));
    }
    let length = profile.length();
    let angle = profile.turning_angle();
    Ok(BendDesign {
        kind: DesignKind::Tabulated,
        trajectory: None,
        half_time: 0.5 * length / sdot0,
        inputs: DesignInputs {
            sdot0,
            kappa_m: Some(profile.kappa_max()),
            radius: None,
            angle,
        },
        profile,
        tables: DesignTables::default(),
        units,
    })
}
