//! Oracles shared by the integration suites. Each property check returns
//! the measured quantity so that the unit suites and the acceptance
//! summary apply their own thresholds to the same computation.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use bendsta_core::classical::{default_dt, exit_amplitude, integrate, ClassicalState};
use bendsta_core::designer::{circular_natural, design_sta_natural, polynomial_trajectory};
use bendsta_core::geometry::CurvatureProfile;
use bendsta_core::quantum::{
    init_wavepacket, transverse_ground, Grid2D, GridSpec, Hamiltonian, PacketSpec, Propagator, TransverseGround,
    WaveField, measure,
};
use bendsta_core::scenario::Scenario;
use bendsta_core::UnitSystem;
use num_complex::Complex64 as C;

pub fn units() -> UnitSystem {
    Scenario::reference_bend().units().unwrap()
}

pub fn reference_sdot0() -> f64 {
    units().velocity_to_internal(20e-3)
}

pub const DT: f64 = TAU / 200.0;

/// κ(s) = κ₀ sin²(πs/L) on [0, L], finely tabulated.
pub fn bump(kappa0: f64, length: f64) -> CurvatureProfile {
    let n = 2001;
    let s: Vec<f64> = (0..n).map(|i| length * i as f64 / (n - 1) as f64).collect();
    let k = s.iter().map(|&v| kappa0 * (PI * v / length).sin().powi(2)).collect();
    CurvatureProfile::from_samples(s, k).unwrap()
}

pub fn hamiltonian(profile: &CurvatureProfile, spec: GridSpec, k: f64) -> Hamiltonian {
    Hamiltonian::new(Grid2D::new(profile, spec).unwrap(), k)
}

pub fn spec(ns: usize, ny: usize, s_min: f64, s_max: f64, y_max: f64) -> GridSpec {
    GridSpec {
        ns,
        ny,
        s_min,
        s_max,
        y_max,
    }
}

/// Row-major dense matrix over the interior nodes.
pub struct Dense {
    pub n: usize,
    pub a: Vec<C>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            a: vec![C::default(); n * n],
        }
    }
    pub fn at(&mut self, r: usize, c: usize) -> &mut C {
        &mut self.a[r * self.n + c]
    }
    pub fn get(&self, r: usize, c: usize) -> C {
        self.a[r * self.n + c]
    }
}

/// Interior index of node (i, j), 1 ≤ i ≤ ns − 2, 1 ≤ j ≤ ny − 2.
pub fn interior(i: usize, j: usize, ny: usize) -> usize {
    (i - 1) * (ny - 2) + (j - 1)
}

/// H at k = 0, written directly from the flux-form stencil with the metric
/// evaluated from κ(s) on the spot.
pub fn stencil_matrix(profile: &CurvatureProfile, sp: GridSpec) -> Dense {
    let GridSpec {
        ns,
        ny,
        s_min,
        s_max,
        y_max,
    } = sp;
    let ds = (s_max - s_min) / (ns - 1) as f64;
    let dy = 2.0 * y_max / (ny - 1) as f64;
    let s = |i: f64| s_min + ds * i;
    let y = |j: f64| -y_max + dy * j;
    let h = |si: f64, yj: f64| 1.0 - profile.kappa(si) * yj;
    let mut m = Dense::zeros((ns - 2) * (ny - 2));
    for i in 1..ns - 1 {
        for j in 1..ny - 1 {
            let (fi, fj) = (i as f64, j as f64);
            let r = interior(i, j, ny);
            let hij = h(s(fi), y(fj));
            let up = h(s(fi), y(fj + 0.5));
            let down = h(s(fi), y(fj - 0.5));
            let right = 1.0 / (1.0 - profile.kappa(s(fi + 0.5)) * y(fj));
            let left = 1.0 / (1.0 - profile.kappa(s(fi - 0.5)) * y(fj));
            let cy = -0.5 / (hij * dy * dy);
            let cs = -0.5 / (hij * ds * ds);
            *m.at(r, r) += -cy * (up + down) - cs * (right + left) + 0.5 * y(fj) * y(fj);
            if j + 1 < ny - 1 {
                *m.at(r, interior(i, j + 1, ny)) += cy * up;
            }
            if j > 1 {
                *m.at(r, interior(i, j - 1, ny)) += cy * down;
            }
            if i + 1 < ns - 1 {
                *m.at(r, interior(i + 1, j, ny)) += cs * right;
            }
            if i > 1 {
                *m.at(r, interior(i - 1, j, ny)) += cs * left;
            }
        }
    }
    m
}

/// H assembled column by column from the solver's own operator.
pub fn applied_matrix(h: &Hamiltonian) -> Dense {
    let g = &h.grid;
    let (ns, ny) = (g.ns, g.ny);
    let mut m = Dense::zeros((ns - 2) * (ny - 2));
    let mut e = vec![C::default(); ns * ny];
    for i in 1..ns - 1 {
        for j in 1..ny - 1 {
            e[i * ny + j] = C::new(1.0, 0.0);
            let col = h.apply(&e);
            e[i * ny + j] = C::default();
            for a in 1..ns - 1 {
                for b in 1..ny - 1 {
                    *m.at(interior(a, b, ny), interior(i, j, ny)) = col[a * ny + b];
                }
            }
        }
    }
    m
}

pub fn interior_weights(g: &Grid2D) -> Vec<f64> {
    let mut w = Vec::new();
    for i in 1..g.ns - 1 {
        for j in 1..g.ny - 1 {
            w.push(g.h[g.index(i, j)]);
        }
    }
    w
}

pub fn max_abs(m: &Dense) -> f64 {
    m.a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// max |(WH)_ab − conj((WH)_ba)| relative to max |WH|.
pub fn weighted_asymmetry(m: &Dense, w: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for a in 0..m.n {
        for b in 0..m.n {
            let wab = m.get(a, b) * w[a];
            let wba = m.get(b, a) * w[b];
            worst = worst.max((wab - wba.conj()).norm());
            scale = scale.max(wab.norm());
        }
    }
    worst / scale
}

pub fn random_field(g: &Grid2D, values: &[f64]) -> Vec<C> {
    let mut f = vec![C::default(); g.len()];
    let mut it = values.chunks(2);
    for i in 1..g.ns - 1 {
        for j in 1..g.ny - 1 {
            let v = it.next().unwrap();
            f[g.index(i, j)] = C::new(v[0], v[1]);
        }
    }
    f
}

pub fn packet(h: &Hamiltonian, s0: f64, sigma_s: f64, k0: f64) -> (WaveField, TransverseGround) {
    let ground = transverse_ground(&h.grid.y, h.grid.dy);
    let field = init_wavepacket(h, &ground, PacketSpec { s0, sigma_s, k0 }, 4.0).unwrap();
    (field, ground)
}

/// Density variance along s, computed straight from the field.
pub fn s_variance(h: &Hamiltonian, field: &WaveField) -> f64 {
    let g = &h.grid;
    let (mut n, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for i in 0..g.ns {
        for j in 0..g.ny {
            let p = field.phi[g.index(i, j)].norm_sqr() * g.h[g.index(i, j)];
            n += p;
            m1 += p * g.s[i];
            m2 += p * g.s[i] * g.s[i];
        }
    }
    m2 / n - (m1 / n).powi(2)
}

pub fn reference_traversal_time() -> f64 {
    let units = Scenario::reference_bend().units().unwrap();
    let kappa = units.curvature_to_internal(0.22e6);
    let sdot0 = units.velocity_to_internal(0.02);
    2.0 * design_sta_natural(sdot0, kappa, FRAC_PI_2, units).unwrap().half_time
}

/// Banded LU without pivoting; A = W + iτK has a positive definite
/// Hermitian part, so elimination is stable.
pub struct Banded {
    n: usize,
    bw: usize,
    /// row r holds columns r − bw ..= r + bw
    a: Vec<C>,
}

impl Banded {
    pub fn new(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            a: vec![C::default(); n * (2 * bw + 1)],
        }
    }
    fn idx(&self, r: usize, c: usize) -> usize {
        r * (2 * self.bw + 1) + (c + self.bw - r)
    }
    pub fn add(&mut self, r: usize, c: usize, v: C) {
        let i = self.idx(r, c);
        self.a[i] += v;
    }
    pub fn get(&self, r: usize, c: usize) -> C {
        self.a[self.idx(r, c)]
    }
    pub fn factor(&mut self) {
        for p in 0..self.n {
            let pivot = self.get(p, p);
            for r in p + 1..(p + self.bw + 1).min(self.n) {
                let f = self.get(r, p) / pivot;
                let ir = self.idx(r, p);
                self.a[ir] = f;
                for c in p + 1..(p + self.bw + 1).min(self.n) {
                    let v = self.get(p, c);
                    let i = self.idx(r, c);
                    self.a[i] -= f * v;
                }
            }
        }
    }
    pub fn solve(&self, b: &mut [C]) {
        for r in 0..self.n {
            for c in r.saturating_sub(self.bw)..r {
                let v = self.get(r, c) * b[c];
                b[r] -= v;
            }
        }
        for r in (0..self.n).rev() {
            for c in r + 1..(r + self.bw + 1).min(self.n) {
                let v = self.get(r, c) * b[c];
                b[r] -= v;
            }
            b[r] /= self.get(r, r);
        }
    }
}

/// ‖a − b‖ in the h-norm.
pub fn distance(h: &Hamiltonian, a: &WaveField, b: &WaveField) -> f64 {
    let diff: Vec<C> = a.phi.iter().zip(&b.phi).map(|(x, y)| x - y).collect();
    h.norm(&diff).sqrt()
}

/// Largest |⟨y⟩ − y_cl(⟨s⟩)| inside the bend, relative to |Δy|, for a
/// packet entering an sta2d bend at speed `sdot0` (natural units).
pub fn ehrenfest_deviation(sdot0: f64, kappa_m: f64, angle: f64, sigma_s: f64, ds: f64, ny: usize) -> (f64, f64) {
    let units = Scenario::reference_bend().units().unwrap();
    let design = design_sta_natural(sdot0, kappa_m, angle, units).unwrap();
    let s_f = design.length();
    let delta_y = design.delta_y().unwrap();
    let classical = integrate(&design.profile, ClassicalState::on_axis(0.0, sdot0), TAU / 1000.0, s_f).unwrap();

    let y_max = delta_y.abs() + 7.0;
    let s0 = -5.0 * sigma_s - 2.0;
    let (s_min, s_max) = (s0 - 5.0 * sigma_s - 5.0, 1.3 * s_f + 5.0 * sigma_s + 10.0);
    let ns = ((s_max - s_min) / ds) as usize;
    let h = hamiltonian(&design.profile, spec(ns, ny, s_min, s_max, y_max), sdot0);
    let (mut field, ground) = packet(&h, s0, sigma_s, sdot0);
    let prop = Propagator::new(&h, DT).unwrap();
    let mut worst: f64 = 0.0;
    loop {
        prop.evolve(&mut field, 2);
        let o = measure(&h, &ground, &field);
        if o.s_mean >= s_f {
            break;
        }
        if o.s_mean <= 0.0 {
            continue;
        }
        let idx = classical.states.partition_point(|st| st.s < o.s_mean);
        let (a, b) = (&classical.states[idx - 1], &classical.states[idx]);
        let y = a.y + (b.y - a.y) * (o.s_mean - a.s) / (b.s - a.s);
        worst = worst.max((o.y_mean - y).abs());
    }
    (worst / delta_y.abs(), delta_y)
}


/// Largest relative asymmetry of the metric-weighted dense operator, over
/// a bare and a carrier Hamiltonian.
pub fn hermiticity_asymmetry() -> f64 {
    let profile = bump(0.12, 6.0);
    [0.0, 4.0]
        .into_iter()
        .map(|k| {
            let h = hamiltonian(&profile, spec(24, 20, -2.0, 8.0, 5.0), k);
            weighted_asymmetry(&applied_matrix(&h), &interior_weights(&h.grid))
        })
        .fold(0.0, f64::max)
}

/// Largest per-step and total change of the h-norm over 400 steps through
/// a bump.
pub fn norm_drift() -> (f64, f64) {
    let profile = bump(0.1, 20.0);
    let h = hamiltonian(&profile, spec(256, 48, -20.0, 50.0, 6.0), 5.0);
    let (mut field, _) = packet(&h, -6.0, 3.0, 5.0);
    let prop = Propagator::new(&h, DT).unwrap();
    let mut worst_step: f64 = 0.0;
    let mut last = h.norm(&field.phi);
    for _ in 0..400 {
        prop.evolve(&mut field, 1);
        let n = h.norm(&field.phi);
        worst_step = worst_step.max((n - last).abs());
        last = n;
    }
    (worst_step, (last - 1.0).abs())
}

/// Relative error of the density variance of a free Gaussian against
/// (a²/2)(1 + (t/a²)²) after the reference traversal time.
pub fn free_gaussian_deviation() -> f64 {
    let a = 3.0;
    let t_end = reference_traversal_time();
    let straight = CurvatureProfile::constant(0.0, 1.0).unwrap();
    let h = hamiltonian(&straight, spec(2048, 16, -60.0, 60.0, 5.0), 0.0);
    let (mut field, _) = packet(&h, -0.5, a, 0.0);
    let n = (t_end / DT).round() as usize;
    let var0 = s_variance(&h, &field);
    assert!((var0 / (0.5 * a * a) - 1.0).abs() < 1e-10);
    Propagator::new(&h, DT).unwrap().evolve(&mut field, n);
    let t = field.t;
    let expected = 0.5 * a * a * (1.0 + (t / (a * a)).powi(2));
    (s_variance(&h, &field) / expected - 1.0).abs()
}

/// |⟨ψ_split, ψ_full⟩_h| after 120 steps, where ψ_full comes from an
/// unsplit Crank–Nicolson solve with the independently assembled stencil.
pub fn split_vs_unsplit_overlap() -> f64 {
    let profile = bump(0.06, 20.0);
    let sp = spec(128, 32, -12.0, 28.0, 6.0);
    let h = hamiltonian(&profile, sp, 0.0);
    let (mut split, _) = packet(&h, -1.5, 2.0, 1.5);
    let mut full: Vec<C> = Vec::new();
    let g = &h.grid;
    let (ns, ny) = (g.ns, g.ny);
    for i in 1..ns - 1 {
        full.extend_from_slice(&split.phi[i * ny + 1..i * ny + ny - 1]);
    }

    // W ± i(dt/2) W H with H from the independent stencil
    let dense = stencil_matrix(&profile, sp);
    let w = interior_weights(g);
    let n = dense.n;
    let bw = ny - 2;
    let tau = 0.5 * DT;
    let mut lhs = Banded::new(n, bw);
    let mut rhs = Banded::new(n, bw);
    #[allow(clippy::needless_range_loop)]
    for r in 0..n {
        for c in r.saturating_sub(bw)..(r + bw + 1).min(n) {
            let k = dense.get(r, c) * w[r];
            let diag = if r == c { C::new(w[r], 0.0) } else { C::default() };
            lhs.add(r, c, diag + C::i() * tau * k);
            rhs.add(r, c, diag - C::i() * tau * k);
        }
    }
    lhs.factor();

    let steps = 120;
    let mut b = vec![C::default(); n];
    for _ in 0..steps {
        for (r, out) in b.iter_mut().enumerate() {
            *out = (r.saturating_sub(bw)..(r + bw + 1).min(n)).map(|c| rhs.get(r, c) * full[c]).sum();
        }
        lhs.solve(&mut b);
        full.copy_from_slice(&b);
    }
    Propagator::new(&h, DT).unwrap().evolve(&mut split, steps);

    let mut overlap = C::default();
    let mut n_full = 0.0;
    for i in 1..ns - 1 {
        for j in 1..ny - 1 {
            let r = interior(i, j, ny);
            overlap += split.phi[i * ny + j].conj() * full[r] * w[r];
            n_full += full[r].norm_sqr() * w[r];
        }
    }
    let cell = g.ds * g.dy;
    assert!(((n_full * cell) - 1.0).abs() < 1e-10);
    overlap.norm() * cell
}

/// Ehrenfest deviation of a narrow packet in a gentle bend, κ_mσ = 0.01
/// and σ_s/s_f ≈ 0.025, relative to |Δy|; also returns Δy.
pub fn ehrenfest_gentle() -> (f64, f64) {
    ehrenfest_deviation(7.148, 0.01, FRAC_PI_2 / 2.0, 4.0, 0.05, 64)
}

/// Observed order of the classical energy error on a circular arc from
/// steps 0.06 and 0.03.
pub fn energy_convergence_order() -> f64 {
    let sdot0 = reference_sdot0();
    let design = circular_natural(sdot0, 30.0, FRAC_PI_4, units()).unwrap();
    let start = ClassicalState {
        t: 0.0,
        s: 0.0,
        sdot: sdot0,
        y: 0.7,
        ydot: -0.4,
    };
    let drift = |dt: f64| integrate(&design.profile, start, dt, design.length()).unwrap().max_energy_drift();
    (drift(0.06) / drift(0.03)).log2()
}

/// Largest relative error of the exit amplitude behind weak circular
/// arcs against the linear response 2κṡ²|sin(τ/2)|. In that limit the
/// transverse motion obeys ÿ + y = κṡ² while the particle is on the arc.
pub fn linear_response_deviation() -> f64 {
    let sdot0 = reference_sdot0();
    [(2.0e4, 2.0), (5.0e4, 4.5), (1.0e5, 9.0)]
        .into_iter()
        .map(|(radius, tau)| {
            let angle = tau * sdot0 / radius;
            let design = circular_natural(sdot0, radius, angle, units()).unwrap();
            let run =
                integrate(&design.profile, ClassicalState::on_axis(0.0, sdot0), default_dt(), design.length()).unwrap();
            let a = exit_amplitude(&run).unwrap();
            let expected = 2.0 * sdot0 * sdot0 / radius * (tau / 2.0).sin().abs();
            (a / expected - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest |y(t) − y_target(t)| over the reference bend relative to |Δy|,
/// and the exit time relative to 2T.
pub fn design_inverse_deviation() -> (f64, f64) {
    let sdot0 = reference_sdot0();
    let kappa_m = units().curvature_to_internal(0.22e6);
    let design = design_sta_natural(sdot0, kappa_m, FRAC_PI_2, units()).unwrap();
    let traj = design.trajectory.unwrap();
    let run = integrate(&design.profile, ClassicalState::on_axis(0.0, sdot0), default_dt(), design.length()).unwrap();
    let t_end = 2.0 * design.half_time;
    let mut worst: f64 = 0.0;
    for p in run.states.iter().filter(|p| p.t <= t_end) {
        let target = polynomial_trajectory(traj.delta_y, traj.half_time, p.t).unwrap();
        worst = worst.max((p.y - target.y).abs());
    }
    (worst / traj.delta_y.abs(), run.exit.unwrap().t / t_end)
}
