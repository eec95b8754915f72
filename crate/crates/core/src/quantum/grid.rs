use crate::error::{Error, Result};
use crate::geometry::CurvatureProfile;
use crate::scenario::QuantumSettings;

/// Largest accepted κ_max·y_max; keeps h ≥ 0.1 on the grid.
pub const MAX_KAPPA_Y: f64 = 0.9;

/// Grid room left on either side of the packet, in standard deviations of
/// its longitudinal density.
pub const PACKET_MARGIN: f64 = 6.0;

/// Extent and resolution of the (s, y) grid, natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub ns: usize,
    pub ny: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub y_max: f64,
}

/// Uniform grid with the metric factor tabulated at nodes and half-nodes.
///
/// Arrays over nodes are row-major with index `i * ny + j` (s index i,
/// y index j). The edge nodes carry the Dirichlet condition ψ = 0 and are
/// not unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub ns: usize,
    pub ny: usize,
    pub ds: f64,
    pub dy: f64,
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    /// Length of the bend, for normalised positions.
    pub s_f: f64,
    pub kappa: Vec<f64>,
    /// h(s_i, y_j).
    pub h: Vec<f64>,
    /// h(s_{i+½}, y_j), index `i * ny + j`, i < ns − 1.
    pub h_s_half: Vec<f64>,
    /// h(s_i, y_{j+½}), index `i * (ny − 1) + j`, j < ny − 1.
    pub h_y_half: Vec<f64>,
}

impl Grid2D {
    pub fn new(profile: &CurvatureProfile, spec: GridSpec) -> Result<Self> {
        let GridSpec {
            ns,
            ny,
            s_min,
            s_max,
            y_max,
        } = spec;
        if ns < 8 || ny < 8 {
            return Err(Error::Precondition(format!("grid needs at least 8×8 points, got {ns}×{ny}")));
        }
        if !(s_max > s_min && y_max > 0.0) {
            return Err(Error::Precondition(format!(
                "empty grid extent: s ∈ [{s_min}, {s_max}], y_max = {y_max}"
            )));
        }
        let product = profile.kappa_max() * y_max;
        if product > MAX_KAPPA_Y {
            return Err(Error::MetricTooSingular { product });
        }
        let ds = (s_max - s_min) / (ns - 1) as f64;
        let dy = 2.0 * y_max / (ny - 1) as f64;
        let s: Vec<f64> = (0..ns).map(|i| s_min + ds * i as f64).collect();
        let y: Vec<f64> = (0..ny).map(|j| -y_max + dy * j as f64).collect();
        let kappa: Vec<f64> = s.iter().map(|&si| profile.kappa(si)).collect();
        let kappa_half: Vec<f64> = s.windows(2).map(|w| profile.kappa(0.5 * (w[0] + w[1]))).collect();

        let mut h = Vec::with_capacity(ns * ny);
        let mut h_y_half = Vec::with_capacity(ns * (ny - 1));
        for &k in &kappa {
            h.extend(y.iter().map(|&yj| 1.0 - k * yj));
            h_y_half.extend(y[..ny - 1].iter().map(|&yj| 1.0 - k * (yj + 0.5 * dy)));
        }
        let mut h_s_half = Vec::with_capacity((ns - 1) * ny);
        for &k in &kappa_half {
            h_s_half.extend(y.iter().map(|&yj| 1.0 - k * yj));
        }
        Ok(Self {
            ns,
            ny,
            ds,
            dy,
            s,
            y,
            s_f: profile.length(),
            kappa,
            h,
            h_s_half,
            h_y_half,
        })
    }

    pub fn len(&self) -> usize {
        self.ns * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn s_min(&self) -> f64 {
        self.s[0]
    }

    pub fn s_max(&self) -> f64 {
        self.s[self.ns - 1]
    }

    pub fn y_max(&self) -> f64 {
        self.y[self.ny - 1]
    }

    pub fn min_h(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            ns: self.ns,
            ny: self.ny,
            s_min: self.s_min(),
            s_max: self.s_max(),
            y_max: self.y_max(),
        }
    }
}

/// Grid extent for a protocol run, natural units.
///
/// Without explicit margins the grid spans at least [−s_f, 2.5 s_f] and is
/// widened so that the packet, `PACKET_MARGIN` density standard deviations
/// on each side, fits both at the start and at the stop position.
/// `sigma_s` is the packet width parameter of [`super::PacketSpec`].
pub fn protocol_grid_spec(
    settings: &QuantumSettings,
    s_f: f64,
    sigma_s: f64,
    length_unit_um: f64,
) -> GridSpec {
    let s0 = settings.start_position_sf * s_f;
    let s_stop = settings.stop_position_sf * s_f;
    let room = PACKET_MARGIN * sigma_s / std::f64::consts::SQRT_2;
    let s_min = match settings.s_margin_left_um {
        Some(m) => -m / length_unit_um,
        None => (-s_f).min(s0 - room),
    };
    let s_max = match settings.s_margin_right_um {
        Some(m) => s_f + m / length_unit_um,
        None => (2.5 * s_f).max(s_stop + room),
    };
    GridSpec {
        ns: settings.grid_ns,
        ny: settings.grid_ny,
        s_min,
        s_max,
        y_max: settings.y_halfwidth_sigma,
    }
}
