//! Point-particle dynamics in the curvilinear frame of a bent guide.
//!
//! All quantities are in natural units (length σ, time 1/ω), so the
//! transverse trap frequency is 1. The equations of motion are
//!
//! ```text
//! s̈ (1 − κy) = ṡ (κ' ṡ y + 2κẏ)
//! ÿ + y = −ṡ² κ (1 − κy)
//! ```
//!
//! and E = (ẏ² + y² + v_κ²)/2 with v_κ = (1 − κy)ṡ is conserved.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{CurvatureProfile, Segment};
use crate::roots::find_root;

/// Steps per trap period used when the caller does not choose one.
pub const DEFAULT_STEPS_PER_PERIOD: f64 = 1000.0;

/// Largest accepted step, 1/100 of a trap period.
pub const MAX_DT: f64 = std::f64::consts::TAU / 100.0;

/// Default step 2π/1000.
pub fn default_dt() -> f64 {
    std::f64::consts::TAU / DEFAULT_STEPS_PER_PERIOD
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassicalState {
    pub t: f64,
    pub s: f64,
    pub sdot: f64,
    pub y: f64,
    pub ydot: f64,
}

impl ClassicalState {
    /// Particle on the guide axis entering at `s` with speed `sdot`.
    pub fn on_axis(s: f64, sdot: f64) -> Self {
        Self {
            t: 0.0,
            s,
            sdot,
            y: 0.0,
            ydot: 0.0,
        }
    }

    fn vector(&self) -> [f64; 4] {
        [self.s, self.sdot, self.y, self.ydot]
    }

    fn with_vector(t: f64, v: [f64; 4]) -> Self {
        Self {
            t,
            s: v[0],
            sdot: v[1],
            y: v[2],
            ydot: v[3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassicalTrajectory {
    pub states: Vec<ClassicalState>,
    /// E = (ẏ² + y² + v_κ²)/2 at every state.
    pub energy: Vec<f64>,
    /// State on reaching s = s_f, if the particle got there.
    pub exit: Option<ClassicalState>,
    /// First state with ṡ ≤ 0, if the particle turned back.
    pub reflected: Option<ClassicalState>,
}

impl ClassicalTrajectory {
    /// max |E(t) − E(0)| / E(0).
    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        self.energy.iter().map(|e| (e - e0).abs() / e0).fold(0.0, f64::max)
    }

    pub fn relative_energy_drift(&self) -> Vec<f64> {
        let e0 = self.energy[0];
        self.energy.iter().map(|e| (e - e0) / e0).collect()
    }

    pub fn last(&self) -> &ClassicalState {
        self.states.last().expect("a trajectory holds at least its initial state")
    }
}

fn energy(profile: &CurvatureProfile, seg: Segment, v: &[f64; 4]) -> f64 {
    let kappa = profile.eval_segment(seg, v[0]).value;
    let v_kappa = (1.0 - kappa * v[2]) * v[1];
    0.5 * (v[3] * v[3] + v[2] * v[2] + v_kappa * v_kappa)
}

/// Right-hand side using the curvature formula of one segment; `None` if
/// the metric factor is not positive.
fn rhs(profile: &CurvatureProfile, seg: Segment, v: &[f64; 4]) -> Option<[f64; 4]> {
    let [s, sdot, y, ydot] = *v;
    let jet = profile.eval_segment(seg, s);
    let h = 1.0 - jet.value * y;
    if !(h > 0.0) {
        return None;
    }
    let sddot = sdot * (jet.d1 * sdot * y + 2.0 * jet.value * ydot) / h;
    let yddot = -y - sdot * sdot * jet.value * h;
    Some([sdot, sddot, ydot, yddot])
}

fn rk4(profile: &CurvatureProfile, seg: Segment, v: &[f64; 4], dt: f64) -> Option<[f64; 4]> {
    let add = |a: &[f64; 4], k: &[f64; 4], f: f64| [a[0] + f * k[0], a[1] + f * k[1], a[2] + f * k[2], a[3] + f * k[3]];
    let k1 = rhs(profile, seg, v)?;
    let k2 = rhs(profile, seg, &add(v, &k1, 0.5 * dt))?;
    let k3 = rhs(profile, seg, &add(v, &k2, 0.5 * dt))?;
    let k4 = rhs(profile, seg, &add(v, &k3, dt))?;
    let mut out = *v;
    for i in 0..4 {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Some(out)
}

/// Integrate from `initial` with fixed step `dt` until s reaches `s_stop`.
///
/// Steps never straddle a profile breakpoint: when a step would cross one
/// it is split so that a partial step lands exactly on it, and the rest of
/// the step continues with the next segment's formula. Across a jump in κ
/// the speed ṡ is rescaled so that v_κ = (1 − κy)ṡ stays continuous,
/// which is what the equations of motion imply for a step in curvature.
/// The exit record is the state exactly at s = s_f.
///
/// Turning back (ṡ ≤ 0) ends the run without an error; the state is kept
/// in [`ClassicalTrajectory::reflected`].
pub fn integrate(
    profile: &CurvatureProfile,
    initial: ClassicalState,
    dt: f64,
    s_stop: f64,
) -> Result<ClassicalTrajectory> {
    if !(initial.sdot > 0.0) {
        return Err(Error::Precondition(format!("initial ṡ must be > 0, got {}", initial.sdot)));
    }
    if !(dt > 0.0 && dt <= MAX_DT * (1.0 + 1e-12)) {
        return Err(Error::Precondition(format!("time step must lie in (0, 2π/100], got {dt}")));
    }
    if !(s_stop > initial.s) {
        return Err(Error::Precondition(format!(
            "stop position {s_stop} must lie beyond the start {}",
            initial.s
        )));
    }
    let h0 = 1.0 - profile.kappa(initial.s) * initial.y;
    if !(h0 > 0.0) {
        return Err(Error::MetricSingularity {
            t: initial.t,
            s: initial.s,
            h: h0,
        });
    }

    let s_f = profile.length();
    let t_cap = initial.t + 20.0 * (s_stop - initial.s) / initial.sdot + 100.0;
    let mut seg = profile.segment_of(initial.s);
    let boundary_of = |seg: Segment| -> f64 {
        match profile.next_segment(seg) {
            Some((_, at)) => at.min(s_stop),
            None => s_stop,
        }
    };
    let mut boundary = boundary_of(seg);

    let mut traj = ClassicalTrajectory::default();
    let mut v = initial.vector();
    let mut t = initial.t;
    traj.states.push(initial);
    traj.energy.push(energy(profile, seg, &v));
    if initial.s == s_f {
        traj.exit = Some(initial);
    }

    let singular = |t: f64, v: &[f64; 4], seg: Segment| {
        let h = 1.0 - profile.eval_segment(seg, v[0]).value * v[2];
        Error::MetricSingularity { t, s: v[0], h }
    };

    loop {
        if t > t_cap {
            return Err(Error::Timeout { t_cap, s_stop });
        }
        let mut remaining = dt;
        let mut done = false;
        while remaining > 0.0 {
            let trial = rk4(profile, seg, &v, remaining).ok_or_else(|| singular(t, &v, seg))?;
            if trial[0] < boundary {
                v = trial;
                t += remaining;
                break;
            }
            // land exactly on the boundary
            let start = v;
            let f = |tau: f64| -> Result<f64> {
                rk4(profile, seg, &start, tau)
                    .map(|w| w[0] - boundary)
                    .ok_or_else(|| singular(t, &start, seg))
            };
            let tau = if trial[0] == boundary {
                remaining
            } else {
                let tol = 1e-14 * boundary.abs().max(1.0);
                find_root(f, 0.0, remaining, 1e-15 * remaining, tol, "breakpoint crossing time")?
            };
            v = rk4(profile, seg, &start, tau).ok_or_else(|| singular(t, &start, seg))?;
            v[0] = boundary;
            t += tau;
            remaining -= tau;
            if boundary == s_stop && profile.next_segment(seg).is_none_or(|(_, at)| at > s_stop) {
                done = true;
                break;
            }
            let (next, _) = profile.next_segment(seg).expect("boundary below s_stop has a next segment");
            let h_left = 1.0 - profile.eval_segment(seg, boundary).value * v[2];
            let h_right = 1.0 - profile.eval_segment(next, boundary).value * v[2];
            if !(h_right > 0.0) {
                return Err(singular(t, &v, next));
            }
            v[1] *= h_left / h_right;
            seg = next;
            boundary = boundary_of(seg);
            if seg == Segment::After {
                traj.exit = Some(ClassicalState::with_vector(t, v));
            }
            if v[0] >= s_stop {
                done = true;
                break;
            }
        }
        let state = ClassicalState::with_vector(t, v);
        traj.states.push(state);
        traj.energy.push(energy(profile, seg, &v));
        if done {
            return Ok(traj);
        }
        if !(v[1] > 0.0) {
            traj.reflected = Some(state);
            return Ok(traj);
        }
    }
}

/// Amplitude √(y² + ẏ²) of the free transverse oscillation after the bend.
pub fn exit_amplitude(trajectory: &ClassicalTrajectory) -> Result<f64> {
    let exit = trajectory.exit.ok_or(Error::NoExit)?;
    Ok(exit.y.hypot(exit.ydot))
}

/// Transverse energy of an oscillation of amplitude `a` in quanta of ħω.
pub fn excess_quanta_classical(a: f64, sigma: f64) -> f64 {
    0.5 * (a / sigma).powi(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub velocities: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// ᾱ: velocity-averaged exit amplitude in units of σ.
    pub mean_amplitude: f64,
}

/// Average exit amplitude over incident speeds uniformly spread in
/// `[(1 − ε)ṡ₀, (1 + ε)ṡ₀]`, trapezoid rule over `n_samples` speeds.
///
/// Samples run in parallel; results are stored by sample index, so the
/// reduction does not depend on scheduling.
pub fn robustness_sweep(
    profile: &CurvatureProfile,
    sdot0: f64,
    epsilon: f64,
    n_samples: usize,
    dt: f64,
) -> Result<SweepResult> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Precondition(format!("epsilon must lie in (0, 0.5), got {epsilon}")));
    }
    if n_samples < 11 || n_samples.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "velocity sample count must be odd and at least 11, got {n_samples}"
        )));
    }
    let (lo, hi) = ((1.0 - epsilon) * sdot0, (1.0 + epsilon) * sdot0);
    let step = (hi - lo) / (n_samples - 1) as f64;
    let velocities: Vec<f64> = (0..n_samples).map(|i| lo + step * i as f64).collect();
    let amplitudes = velocities
        .par_iter()
        .enumerate()
        .map(|(index, &v)| {
            integrate(profile, ClassicalState::on_axis(0.0, v), dt, profile.length())
                .and_then(|traj| exit_amplitude(&traj))
                .map_err(|e| Error::Sample {
                    index,
                    velocity: v,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    let inner: f64 = amplitudes[1..n_samples - 1].iter().sum();
    let integral = step * (inner + 0.5 * (amplitudes[0] + amplitudes[n_samples - 1]));
    Ok(SweepResult {
        velocities,
        amplitudes,
        mean_amplitude: integral / (hi - lo),
    })
}
