//! Built-in parameter presets and the reproduction pipelines for the
//! reference bend, the robustness comparison and the quantum comparison.
//!
//! Each pipeline returns its data together with a [`MetricsReport`] whose
//! checked metrics compare computed numbers against the reference values
//! in [`targets`].

use std::f64::consts::FRAC_PI_2;

use crate::classical::{default_dt, exit_amplitude, integrate, robustness_sweep, ClassicalState, ClassicalTrajectory};
use crate::designer::{
    circular_natural, design_adiabatic_1d_natural, design_sta_natural, sta_kappa_for_half_time, BendDesign,
};
use crate::error::{Error, Result};
use crate::geometry::{adiabaticity_report, equivalent_radius, reconstruct_path, AdiabaticityReport, PlanarPath};
use crate::quantum::{run_protocol, ProtocolRun};
use crate::roots::{bracket_increasing, find_root};
use crate::scenario::{DesignKind, Scenario, UnitSystem};
use crate::tables::{Metric, MetricsReport};

/// Reference values and acceptance tolerances.
pub mod targets {
    pub const BEND_LENGTH_UM: f64 = 16.6;
    pub const BEND_TOTAL_TIME_MS: f64 = 0.88;
    pub const BEND_R_EQ_UM: f64 = 10.0;
    pub const DESIGN_REL_TOL: f64 = 0.03;
    pub const R_EQ_REL_TOL: f64 = 0.05;
    pub const MAX_EXIT_AMPLITUDE: f64 = 1e-4;
    pub const MAX_ENERGY_DRIFT: f64 = 1e-8;

    pub const SWEEP_EPSILON: f64 = 0.05;
    pub const SWEEP_SAMPLES: usize = 101;
    pub const MIN_ALPHA_RATIO: f64 = 10.0;
    /// Radius grid of the robustness comparison, μm.
    pub const RADII_UM: [f64; 13] = [8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0, 15.0, 16.0, 17.0, 18.0, 19.0, 20.0];

    /// Half-bend times T and lengths of the comparison designs.
    pub const HALF_TIME_2D_MS: f64 = 0.295;
    pub const HALF_TIME_1D_MS: f64 = 0.334;
    pub const LENGTH_2D_UM: f64 = 10.37;
    pub const LENGTH_1D_UM: f64 = 13.36;
    pub const NBAR_2D: f64 = 5.1e-3;
    pub const NBAR_2D_BOUND: f64 = 1e-2;
    pub const NBAR_1D: f64 = 1.4;
    pub const NBAR_1D_REL_TOL: f64 = 0.3;
    pub const FIDELITY_2D: f64 = 0.996;
    pub const FIDELITY_BOUND: f64 = 0.99;
    pub const POST_BEND_Y_AMPLITUDE: f64 = 0.5;
    pub const SLOPE_RATIO: f64 = 0.6;
    pub const SLOPE_RATIO_TOL: f64 = 0.2;
    pub const BENDING_RATIO: f64 = 5.0;
    pub const BENDING_RATIO_TOL: f64 = 2.0;
    /// Transverse half-width of the comparison grid, σ.
    pub const COMPARISON_Y_HALFWIDTH: f64 = 7.5;
}

const PATH_POINTS: f64 = 4000.0;

fn um(units: &UnitSystem, x: f64) -> f64 {
    units.length_to_si(x) * 1e6
}

fn ms(units: &UnitSystem, t: f64) -> f64 {
    units.time_to_si(t) * 1e3
}

/// The comparison scenario: the reference velocity and trap frequency with
/// the peak curvature whose exact design has the reference half-bend time.
pub fn comparison_scenario() -> Result<Scenario> {
    let mut scenario = Scenario::reference_bend();
    let units = scenario.units()?;
    let sdot0 = units.velocity_to_internal(scenario.sdot0_mm_s * 1e-3);
    let half_time = units.time_to_internal(targets::HALF_TIME_2D_MS * 1e-3);
    let kappa = sta_kappa_for_half_time(sdot0, half_time, scenario.angle(), units)?;
    scenario.design.kappa_max_per_um = Some(units.curvature_to_si(kappa) * 1e-6);
    scenario.quantum.y_halfwidth_sigma = targets::COMPARISON_Y_HALFWIDTH;
    Ok(scenario)
}

fn natural_inputs(scenario: &Scenario) -> Result<(UnitSystem, f64)> {
    let units = scenario.units()?;
    Ok((units, units.velocity_to_internal(scenario.sdot0_mm_s * 1e-3)))
}

/// Build the design a scenario describes.
pub fn design_from_scenario(scenario: &Scenario) -> Result<BendDesign> {
    scenario.validate()?;
    let (units, sdot0) = natural_inputs(scenario)?;
    let d = &scenario.design;
    let per_um = |k: f64| units.curvature_to_internal(k * 1e6);
    let angle = scenario.angle();
    match d.kind {
        DesignKind::Sta2d => design_sta_natural(sdot0, per_um(d.kappa_max_per_um.unwrap_or_default()), angle, units),
        DesignKind::Circular => {
            circular_natural(sdot0, units.length_to_internal(d.radius_um.unwrap_or_default() * 1e-6), angle, units)
        }
        DesignKind::Adiabatic1d => {
            let delta_y = match (d.delta_y_um, d.kappa_max_per_um) {
                (Some(dy), _) => units.length_to_internal(dy * 1e-6),
                (None, Some(k)) => design_sta_natural(sdot0, per_um(k), angle, units)?
                    .delta_y()
                    .expect("sta2d designs carry a trajectory"),
                (None, None) => unreachable!("validated above"),
            };
            design_adiabatic_1d_natural(sdot0, delta_y, angle, units)
        }
        DesignKind::Tabulated => unreachable!("rejected by validation"),
    }
}

/// Centreline of a design sampled finely enough for the radius search.
pub fn design_path(design: &BendDesign) -> Result<PlanarPath> {
    reconstruct_path(&design.profile, design.length() / PATH_POINTS)
}

/// Peak curvature (natural units) of the exact design whose equivalent
/// radius is `radius`. R_eq falls as κ_m grows.
pub fn sta_kappa_for_radius(sdot0: f64, radius: f64, units: UnitSystem) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Precondition(format!("radius must be > 0, got {radius}")));
    }
    let g = |kappa: f64| -> Result<f64> {
        let design = design_sta_natural(sdot0, kappa, FRAC_PI_2, units)?;
        Ok(radius - equivalent_radius(&design_path(&design)?)?)
    };
    // R_eq κ_m ≈ 2.2 over the reference family
    let (lo, hi) = bracket_increasing(g, 2.2 / radius, 1e-5, 1.0, "equivalent radius")?;
    let kappa = if lo == hi { lo } else { find_root(g, lo, hi, 1e-13 * hi, 1e-9 * radius, "matched peak curvature")? };
    let residual = g(kappa)?;
    if residual.abs() > 1e-6 * radius {
        return Err(Error::Precondition(format!(
            "no exact design has equivalent radius {radius:.4}σ (closest misses by {residual:.3e}σ)"
        )));
    }
    Ok(kappa)
}

/// Output of the reference-bend reproduction.
#[derive(Debug, Clone)]
pub struct ReferenceBend {
    pub design: BendDesign,
    pub path: PlanarPath,
    /// Natural units.
    pub r_eq: f64,
    pub trajectory: ClassicalTrajectory,
    pub report: MetricsReport,
}

/// Design the reference bend, its path and equivalent radius, and fly a
/// classical particle through it at the design speed.
pub fn reproduce_reference_bend(scenario: &Scenario) -> Result<ReferenceBend> {
    let design = design_from_scenario(scenario)?;
    let units = design.units;
    let path = design_path(&design)?;
    let r_eq = equivalent_radius(&path)?;
    let start = ClassicalState::on_axis(0.0, design.inputs.sdot0);
    let trajectory = integrate(&design.profile, start, default_dt(), design.length())?;
    let amplitude = exit_amplitude(&trajectory)?;

    let mut report = MetricsReport::new("reproduce fig2");
    report.push(Metric::relative(
        "s_f",
        um(&units, design.length()),
        "um",
        targets::BEND_LENGTH_UM,
        targets::DESIGN_REL_TOL,
    ));
    report.push(Metric::relative(
        "total_time",
        ms(&units, 2.0 * design.half_time),
        "ms",
        targets::BEND_TOTAL_TIME_MS,
        targets::DESIGN_REL_TOL,
    ));
    report.push(Metric::relative("R_eq", um(&units, r_eq), "um", targets::BEND_R_EQ_UM, targets::R_EQ_REL_TOL));
    if let Some(dy) = design.delta_y() {
        report.push(Metric::value("delta_y", um(&units, dy), "um"));
    }
    report.push(Metric::at_most(
        "exit_amplitude",
        amplitude,
        "sigma",
        None,
        targets::MAX_EXIT_AMPLITUDE,
    ));
    report.push(Metric::at_most(
        "energy_drift",
        trajectory.max_energy_drift(),
        "",
        None,
        targets::MAX_ENERGY_DRIFT,
    ));
    Ok(ReferenceBend {
        design,
        path,
        r_eq,
        trajectory,
        report,
    })
}

/// Robustness of a circular arc and of the exact design with the same
/// equivalent radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusRow {
    pub radius_um: f64,
    pub alpha_circular: f64,
    /// Peak curvature of the matched exact design, μm⁻¹.
    pub kappa_sta_per_um: f64,
    pub alpha_sta: f64,
}

impl RadiusRow {
    pub fn ratio(&self) -> f64 {
        self.alpha_circular / self.alpha_sta
    }
}

/// Mean exit amplitudes ᾱ (in σ) of circular and matched exact bends for
/// each radius, quarter turns.
pub fn radius_sweep(scenario: &Scenario, radii_um: &[f64], epsilon: f64, samples: usize) -> Result<Vec<RadiusRow>> {
    let (units, sdot0) = natural_inputs(scenario)?;
    radii_um
        .iter()
        .map(|&r_um| {
            let radius = units.length_to_internal(r_um * 1e-6);
            let circle = circular_natural(sdot0, radius, FRAC_PI_2, units)?;
            let alpha_circular = robustness_sweep(&circle.profile, sdot0, epsilon, samples, default_dt())?.mean_amplitude;
            let kappa = sta_kappa_for_radius(sdot0, radius, units)?;
            let sta = design_sta_natural(sdot0, kappa, FRAC_PI_2, units)?;
            let alpha_sta = robustness_sweep(&sta.profile, sdot0, epsilon, samples, default_dt())?.mean_amplitude;
            Ok(RadiusRow {
                radius_um: r_um,
                alpha_circular,
                kappa_sta_per_um: units.curvature_to_si(kappa) * 1e-6,
                alpha_sta,
            })
        })
        .collect()
}

/// Index of an interior point lower than both neighbours, if any.
pub fn interior_minimum(values: &[f64]) -> Option<usize> {
    (1..values.len().saturating_sub(1)).find(|&i| values[i] < values[i - 1] && values[i] < values[i + 1])
}

#[derive(Debug, Clone)]
pub struct RobustnessComparison {
    pub rows: Vec<RadiusRow>,
    pub report: MetricsReport,
}

/// Sweep the radius grid and check the amplitude ratio at every radius and
/// the phase-matching minimum of the circular arcs.
pub fn reproduce_robustness(
    scenario: &Scenario,
    radii_um: &[f64],
    epsilon: f64,
    samples: usize,
) -> Result<RobustnessComparison> {
    if radii_um.len() < 3 {
        return Err(Error::Precondition("the radius grid needs at least three radii".into()));
    }
    let rows = radius_sweep(scenario, radii_um, epsilon, samples)?;
    let mut report = MetricsReport::new("reproduce fig3");
    for row in &rows {
        report.push(Metric::at_least(
            &format!("alpha_ratio_R{}um", row.radius_um),
            row.ratio(),
            "",
            None,
            targets::MIN_ALPHA_RATIO,
        ));
    }
    let circular: Vec<f64> = rows.iter().map(|r| r.alpha_circular).collect();
    let minimum = interior_minimum(&circular);
    report.push(Metric::check("alpha_circular_local_minimum", minimum.is_some()));
    if let Some(i) = minimum {
        report.push(Metric::value("alpha_circular_minimum_radius", rows[i].radius_um, "um"));
    }
    let worst = rows.iter().map(RadiusRow::ratio).fold(f64::INFINITY, f64::min);
    report.push(Metric::value("alpha_ratio_min", worst, ""));
    Ok(RobustnessComparison { rows, report })
}

/// Output of the quantum comparison between the exact and 1D designs.
#[derive(Debug)]
pub struct QuantumComparison {
    pub design_2d: BendDesign,
    pub design_1d: BendDesign,
    pub run_2d: ProtocolRun,
    pub run_1d: ProtocolRun,
    pub adiabaticity: AdiabaticityReport,
    pub report: MetricsReport,
}

/// Position (in s_f) of the smallest ⟨ṡ⟩ while the packet centre is in the
/// bend, and whether κ there is at least half its peak.
pub fn slowest_point(run: &ProtocolRun, design: &BendDesign) -> Option<(f64, bool)> {
    let s_f = design.length();
    let half_peak = 0.5 * design.kappa_peak();
    run.observables
        .iter()
        .filter(|o| (0.0..=s_f).contains(&o.s_mean))
        .min_by(|a, b| a.sdot_mean.total_cmp(&b.sdot_mean))
        .map(|o| (o.s_mean / s_f, design.profile.kappa(o.s_mean) >= half_peak))
}

/// Largest |⟨y⟩| (natural units) once the packet centre has left the bend.
pub fn post_bend_y_amplitude(run: &ProtocolRun, design: &BendDesign) -> f64 {
    let s_f = design.length();
    run.observables
        .iter()
        .filter(|o| o.s_mean >= s_f)
        .map(|o| o.y_mean.abs())
        .fold(0.0, f64::max)
}

/// Run the quantum protocol through the exact design of `scenario` and
/// through the 1D-adiabatic design with the same Δy.
pub fn reproduce_quantum(scenario: &Scenario) -> Result<QuantumComparison> {
    let mut sta = scenario.clone();
    sta.design.kind = DesignKind::Sta2d;
    let design_2d = design_from_scenario(&sta)?;
    let delta_y = design_2d.delta_y().expect("sta2d designs carry a trajectory");
    let design_1d = design_adiabatic_1d_natural(design_2d.inputs.sdot0, delta_y, design_2d.inputs.angle, design_2d.units)?;
    let (run_2d, run_1d) = rayon::join(
        || run_protocol(&design_2d, &scenario.quantum),
        || run_protocol(&design_1d, &scenario.quantum),
    );
    let (run_2d, run_1d) = (run_2d?, run_1d?);
    let units = design_2d.units;
    let adiabaticity = adiabaticity_report(&design_2d.profile, 1.0);

    let mut report = MetricsReport::new("reproduce fig4");
    report.warnings.extend(run_2d.warnings.iter().map(|w| format!("2D run: {w}")));
    report.warnings.extend(run_1d.warnings.iter().map(|w| format!("1D run: {w}")));
    report.push(Metric::value(
        "kappa_max_2d",
        units.curvature_to_si(design_2d.kappa_peak()) * 1e-6,
        "1/um",
    ));
    report.push(Metric::value("T_2d", ms(&units, design_2d.half_time), "ms"));
    report.push(Metric::relative(
        "s_f_2d",
        um(&units, design_2d.length()),
        "um",
        targets::LENGTH_2D_UM,
        targets::DESIGN_REL_TOL,
    ));
    report.push(Metric::relative(
        "T_1d",
        ms(&units, design_1d.half_time),
        "ms",
        targets::HALF_TIME_1D_MS,
        targets::DESIGN_REL_TOL,
    ));
    report.push(Metric::relative(
        "s_f_1d",
        um(&units, design_1d.length()),
        "um",
        targets::LENGTH_1D_UM,
        targets::DESIGN_REL_TOL,
    ));
    report.push(Metric::at_most(
        "nbar_2d",
        run_2d.last.nbar,
        "",
        Some(targets::NBAR_2D),
        targets::NBAR_2D_BOUND,
    ));
    report.push(Metric::relative(
        "nbar_1d",
        run_1d.last.nbar,
        "",
        targets::NBAR_1D,
        targets::NBAR_1D_REL_TOL,
    ));
    report.push(Metric::at_least(
        "fidelity_2d",
        run_2d.fidelity,
        "",
        Some(targets::FIDELITY_2D),
        targets::FIDELITY_BOUND,
    ));
    report.push(Metric::value("fidelity_1d", run_1d.fidelity, ""));
    report.push(Metric::value("sdot_final_over_sdot0_2d", run_2d.last.sdot_mean / run_2d.sdot0, ""));
    match slowest_point(&run_2d, &design_2d) {
        Some((at, strong)) => {
            report.push(Metric::value("sdot_min_position_2d", at, "s_f"));
            report.push(Metric::check("sdot_min_in_strong_curvature_2d", strong));
        }
        None => report.push(Metric::check("sdot_min_in_strong_curvature_2d", false)),
    }
    report.push(Metric::at_least(
        "post_bend_y_amplitude_1d",
        post_bend_y_amplitude(&run_1d, &design_1d),
        "sigma",
        None,
        targets::POST_BEND_Y_AMPLITUDE,
    ));
    report.push(Metric::relative(
        "max_slope_ratio_2d",
        adiabaticity.max_slope,
        "",
        targets::SLOPE_RATIO,
        targets::SLOPE_RATIO_TOL / targets::SLOPE_RATIO,
    ));
    report.push(Metric::relative(
        "max_bending_ratio_2d",
        adiabaticity.max_bending,
        "",
        targets::BENDING_RATIO,
        targets::BENDING_RATIO_TOL / targets::BENDING_RATIO,
    ));
    report.push(Metric::value("leakage_2d", run_2d.last.leakage, ""));
    report.push(Metric::value("leakage_1d", run_1d.last.leakage, ""));
    Ok(QuantumComparison {
        design_2d,
        design_1d,
        run_2d,
        run_1d,
        adiabaticity,
        report,
    })
}
