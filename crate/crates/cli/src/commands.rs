use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::{Path, PathBuf};
use std::time::Instant;

use bendsta_core::classical::{exit_amplitude, integrate, robustness_sweep, ClassicalState};
use bendsta_core::designer::tabulated_natural;
use bendsta_core::geometry::{adiabaticity_report, equivalent_radius, reconstruct_path, AdiabaticityReport};
use bendsta_core::quantum::run_protocol;
use bendsta_core::reproduce::{
    comparison_scenario, design_from_scenario, design_path, radius_sweep, reproduce_quantum, reproduce_reference_bend,
    reproduce_robustness, targets,
};
use bendsta_core::scenario::{load_scenario, save_scenario, DesignSettings};
use bendsta_core::tables::{
    read_profile_csv, write_adiabaticity_csv, write_design_metadata, write_metrics, write_observables_csv,
    write_path_csv, write_profile_csv, write_radii_csv, write_snapshot, write_sweep_csv, write_trajectory_csv, Metric,
    MetricsReport, Snapshot,
};
use bendsta_core::{BendDesign, DesignKind, Scenario, UnitSystem};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::manifest::{self, RunManifest};

/// Files a command wrote, relative to its output directory.
struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|source| bendsta_core::Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn file(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }
}

/// What a finished command hands back for the manifest.
struct Finished {
    output: Output,
    inputs: Vec<u8>,
    pass: bool,
}

/// Run one command; `Ok(false)` means a reproduction check failed.
pub fn run(command: Command, argv: Vec<String>) -> CliResult<bool> {
    let name = command.name().to_string();
    let start = Instant::now();
    let finished = match command {
        Command::Design(cmd) => design(cmd)?,
        Command::Path(cmd) => path(cmd)?,
        Command::Diagnose(cmd) => diagnose(cmd)?,
        Command::Classical(ClassicalCmd::Run(cmd)) => classical_run(cmd)?,
        Command::Classical(ClassicalCmd::Sweep(cmd)) => classical_sweep(cmd)?,
        Command::Classical(ClassicalCmd::SweepRadii(cmd)) => sweep_radii(cmd)?,
        Command::Quantum(QuantumCmd::Run(cmd)) => quantum_run(cmd)?,
        Command::Reproduce(cmd) => reproduce(cmd)?,
    };
    let record = RunManifest {
        tool: "bendsta",
        version: env!("CARGO_PKG_VERSION"),
        command: name,
        args: argv,
        scenario_sha256: manifest::sha256_hex(&[&finished.inputs]),
        artifacts: finished.output.files.clone(),
        duration_s: start.elapsed().as_secs_f64(),
    };
    manifest::append(&finished.output.dir, &record)?;
    println!("wrote {} files to {}", finished.output.files.len(), finished.output.dir.display());
    Ok(finished.pass)
}

fn base_scenario(common: &Common, preset: Option<Preset>) -> CliResult<Option<Scenario>> {
    if let Some(path) = &common.scenario {
        return Ok(Some(load_scenario(path)?));
    }
    Ok(match preset {
        Some(Preset::Reference) => Some(Scenario::reference_bend()),
        Some(Preset::Comparison) => Some(comparison_scenario()?),
        None => None,
    })
}

/// The scenario given by the file or preset with the physics flags applied.
/// Returns whether a base was given.
fn physics_scenario(common: &Common, physics: &PhysicsFlags) -> CliResult<(Scenario, bool)> {
    let base = base_scenario(common, physics.preset)?;
    let has_base = base.is_some();
    let mut scenario = match base {
        Some(s) => s,
        None => {
            let missing = |flag: &str| {
                CliError::Usage(format!("{flag} is required unless --scenario or --preset is given"))
            };
            Scenario {
                mass_kg: None,
                omega_hz: physics.omega_hz.ok_or_else(|| missing("--omega-hz"))?,
                sdot0_mm_s: physics.sdot0_mm_s.ok_or_else(|| missing("--sdot0-mm-s"))?,
                design: DesignSettings::default(),
                quantum: Default::default(),
            }
        }
    };
    if let Some(v) = physics.omega_hz {
        scenario.omega_hz = v;
    }
    if let Some(v) = physics.sdot0_mm_s {
        scenario.sdot0_mm_s = v;
    }
    if physics.mass_kg.is_some() {
        scenario.mass_kg = physics.mass_kg;
    }
    Ok((scenario, has_base))
}

fn apply_design_flags(scenario: &mut Scenario, flags: &DesignFlags, has_base: bool) -> CliResult<()> {
    let d = &mut scenario.design;
    let kind = match (flags.kind, flags.adiabatic1d) {
        (Some(KindArg::Sta2d), _) => Some(DesignKind::Sta2d),
        (Some(KindArg::Adiabatic1d), _) | (None, true) => Some(DesignKind::Adiabatic1d),
        (Some(KindArg::Circular), _) => Some(DesignKind::Circular),
        (None, false) if flags.radius_um.is_some() && flags.kappa_max_per_um.is_none() => Some(DesignKind::Circular),
        (None, false) => None,
    };
    if let Some(kind) = kind {
        d.kind = kind;
    }
    if flags.kappa_max_per_um.is_some() {
        d.kappa_max_per_um = flags.kappa_max_per_um;
    }
    if flags.radius_um.is_some() {
        d.radius_um = flags.radius_um;
    }
    if flags.delta_y_um.is_some() {
        d.delta_y_um = flags.delta_y_um;
    }
    if let Some(angle) = flags.angle_deg {
        d.angle_deg = angle;
    }
    if !has_base {
        let required = match d.kind {
            DesignKind::Sta2d if d.kappa_max_per_um.is_none() => Some("--kappa-max-per-um"),
            DesignKind::Circular if d.radius_um.is_none() => Some("--radius-um"),
            DesignKind::Adiabatic1d if d.kappa_max_per_um.is_none() && d.delta_y_um.is_none() => {
                Some("--kappa-max-per-um or --delta-y-um")
            }
            _ => None,
        };
        if let Some(flag) = required {
            return Err(CliError::Usage(format!("{flag} is required for --kind {}", d.kind)));
        }
    }
    Ok(())
}

fn design_flags_given(flags: &DesignFlags) -> bool {
    flags.kind.is_some()
        || flags.adiabatic1d
        || flags.kappa_max_per_um.is_some()
        || flags.radius_um.is_some()
        || flags.delta_y_um.is_some()
        || flags.angle_deg.is_some()
}

fn scenario_bytes(scenario: &Scenario) -> CliResult<Vec<u8>> {
    Ok(scenario.to_toml_string()?.into_bytes())
}

/// A designed bend from scenario and flags, or a tabulated one from
/// `--profile`, with the bytes that identify the inputs.
fn resolve_bend(src: &BendSource) -> CliResult<(Scenario, BendDesign, Vec<u8>)> {
    let (mut scenario, has_base) = physics_scenario(&src.common, &src.physics)?;
    match &src.profile {
        Some(file) => {
            if design_flags_given(&src.design) {
                return Err(CliError::Usage("design flags cannot be combined with --profile".into()));
            }
            scenario.validate_physics()?;
            let units = scenario.units()?;
            let profile = read_profile_csv(&units, file)?;
            let sdot0 = units.velocity_to_internal(scenario.sdot0_mm_s * 1e-3);
            let design = tabulated_natural(profile, sdot0, units)?;
            let mut inputs = scenario_bytes(&scenario)?;
            inputs.extend(std::fs::read(file).map_err(|e| bendsta_core::Error::Io {
                path: file.clone(),
                source: e,
            })?);
            Ok((scenario, design, inputs))
        }
        None => {
            apply_design_flags(&mut scenario, &src.design, has_base)?;
            scenario.validate()?;
            let design = design_from_scenario(&scenario)?;
            let inputs = scenario_bytes(&scenario)?;
            Ok((scenario, design, inputs))
        }
    }
}

fn um(units: &UnitSystem, x: f64) -> f64 {
    units.length_to_si(x) * 1e6
}

fn ms(units: &UnitSystem, t: f64) -> f64 {
    units.time_to_si(t) * 1e3
}

fn is_quarter_turn(design: &BendDesign) -> bool {
    (design.profile.turning_angle() - FRAC_PI_2).abs() < 1e-6
}

fn print_report(report: &MetricsReport) {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for m in &report.metrics {
        let verdict = match m.pass {
            Some(true) => format!("  PASS ({})", m.tolerance.as_deref().unwrap_or("")),
            Some(false) => format!("  FAIL ({})", m.tolerance.as_deref().unwrap_or("")),
            None => String::new(),
        };
        let reference = m.reference.map(|r| format!("  [reference {r}]")).unwrap_or_default();
        println!("{:<34} {:>14.6e} {:<6}{reference}{verdict}", m.name, m.value, m.unit);
    }
}

fn adiabaticity_metrics(report: &mut MetricsReport, adiabaticity: &AdiabaticityReport) {
    report.push(Metric::value("max_sigma_kappa", adiabaticity.max_curvature, ""));
    report.push(Metric::value("max_slope_ratio", adiabaticity.max_slope, ""));
    report.push(Metric::value("max_bending_ratio", adiabaticity.max_bending, ""));
}

fn design(cmd: DesignCmd) -> CliResult<Finished> {
    let src = BendSource {
        common: cmd.common,
        physics: cmd.physics,
        design: cmd.design,
        profile: None,
    };
    let (scenario, design, inputs) = resolve_bend(&src)?;
    let units = design.units;
    let adiabaticity = adiabaticity_report(&design.profile, 1.0);
    let path = design_path(&design)?;

    let mut report = MetricsReport::new("design");
    report.push(Metric::value("s_f", um(&units, design.length()), "um"));
    report.push(Metric::value("T", ms(&units, design.half_time), "ms"));
    report.push(Metric::value("total_time", ms(&units, 2.0 * design.half_time), "ms"));
    if let Some(dy) = design.delta_y() {
        report.push(Metric::value("delta_y", um(&units, dy), "um"));
    }
    report.push(Metric::value("kappa_max", units.curvature_to_si(design.kappa_peak()) * 1e-6, "1/um"));
    if is_quarter_turn(&design) {
        report.push(Metric::value("R_eq", um(&units, equivalent_radius(&path)?), "um"));
    } else {
        report.warnings.push("R_eq is defined for quarter turns only".into());
    }
    adiabaticity_metrics(&mut report, &adiabaticity);

    let mut out = Output::new(&src.common.out_dir)?;
    save_scenario(&scenario, out.file("scenario.toml"))?;
    write_profile_csv(&design.profile, &units, out.file("profile.csv"))?;
    write_design_metadata(&design, out.file("design.toml"))?;
    write_path_csv(&path, &units, out.file("path.csv"))?;
    write_adiabaticity_csv(&adiabaticity, &units, out.file("adiabaticity.csv"))?;
    write_metrics(&report, out.file("metrics.toml"))?;
    println!("design {}", design.kind);
    print_report(&report);
    Ok(Finished {
        output: out,
        inputs,
        pass: true,
    })
}

fn path(cmd: PathCmd) -> CliResult<Finished> {
    let (_, design, inputs) = resolve_bend(&cmd.source)?;
    let units = design.units;
    let ds = match cmd.ds_um {
        Some(v) => units.length_to_internal(v * 1e-6),
        None => design.length() / 4000.0,
    };
    let path = reconstruct_path(&design.profile, ds)?;
    let (x, y) = path.end();
    let mut report = MetricsReport::new("path");
    report.push(Metric::value("end_x", um(&units, x), "um"));
    report.push(Metric::value("end_y", um(&units, y), "um"));
    report.push(Metric::value("total_turn", path.total_turn().to_degrees(), "deg"));
    if is_quarter_turn(&design) {
        report.push(Metric::value("R_eq", um(&units, equivalent_radius(&path)?), "um"));
    }
    let mut out = Output::new(&cmd.source.common.out_dir)?;
    write_path_csv(&path, &units, out.file("path.csv"))?;
    write_metrics(&report, out.file("metrics.toml"))?;
    print_report(&report);
    Ok(Finished {
        output: out,
        inputs,
        pass: true,
    })
}

fn diagnose(cmd: DiagnoseCmd) -> CliResult<Finished> {
    let (_, design, inputs) = resolve_bend(&cmd.source)?;
    let units = design.units;
    let adiabaticity = adiabaticity_report(&design.profile, 1.0);
    let mut report = MetricsReport::new("diagnose");
    adiabaticity_metrics(&mut report, &adiabaticity);
    let mut out = Output::new(&cmd.source.common.out_dir)?;
    write_adiabaticity_csv(&adiabaticity, &units, out.file("adiabaticity.csv"))?;
    write_metrics(&report, out.file("metrics.toml"))?;
    print_report(&report);
    Ok(Finished {
        output: out,
        inputs,
        pass: true,
    })
}

fn step(flags: &StepFlags) -> f64 {
    TAU / flags.steps_per_period
}

fn classical_run(cmd: ClassicalRunCmd) -> CliResult<Finished> {
    let (_, design, inputs) = resolve_bend(&cmd.source)?;
    let units = design.units;
    let sdot = match cmd.sdot_mm_s {
        Some(v) => units.velocity_to_internal(v * 1e-3),
        None => design.inputs.sdot0,
    };
    let start = ClassicalState {
        t: 0.0,
        s: 0.0,
        sdot,
        y: units.length_to_internal(cmd.y0_um * 1e-6),
        ydot: units.velocity_to_internal(cmd.ydot0_mm_s * 1e-3),
    };
    let traj = integrate(&design.profile, start, step(&cmd.steps), design.length())?;
    let mut report = MetricsReport::new("classical run");
    report.push(Metric::value("energy_drift", traj.max_energy_drift(), ""));
    match (&traj.reflected, exit_amplitude(&traj)) {
        (Some(state), _) => report.warnings.push(format!(
            "particle turned back at s = {:.4} um",
            um(&units, state.s)
        )),
        (None, Ok(a)) => {
            report.push(Metric::value("exit_amplitude", a, "sigma"));
            report.push(Metric::value("exit_time", ms(&units, traj.exit.map_or(0.0, |e| e.t)), "ms"));
        }
        (None, Err(e)) => return Err(e.into()),
    }
    let mut out = Output::new(&cmd.source.common.out_dir)?;
    write_trajectory_csv(&traj, &units, out.file("trajectory.csv"))?;
    write_metrics(&report, out.file("metrics.toml"))?;
    print_report(&report);
    Ok(Finished {
        output: out,
        inputs,
        pass: true,
    })
}

fn classical_sweep(cmd: SweepCmd) -> CliResult<Finished> {
    let (_, design, inputs) = resolve_bend(&cmd.source)?;
    let units = design.units;
    let sweep = robustness_sweep(
        &design.profile,
        design.inputs.sdot0,
        cmd.sweep.epsilon,
        cmd.sweep.samples,
        step(&cmd.steps),
    )?;
    let mut report = MetricsReport::new("classical sweep");
    report.push(Metric::value("alpha_bar", sweep.mean_amplitude, "sigma"));
    report.push(Metric::value("epsilon", cmd.sweep.epsilon, ""));
    let mut out = Output::new(&cmd.source.common.out_dir)?;
    write_sweep_csv(&sweep, &units, out.file("sweep.csv"))?;
    write_metrics(&report, out.file("metrics.toml"))?;
    print_report(&report);
    Ok(Finished {
        output: out,
        inputs,
        pass: true,
    })
}

fn radii_or_default(radii: &[f64]) -> Vec<f64> {
    if radii.is_empty() {
        targets::RADII_UM.to_vec()
    } else {
        radii.to_vec()
    }
}

fn sweep_radii(cmd: SweepRadiiCmd) -> CliResult<Finished> {
    let (scenario, _) = physics_scenario(&cmd.common, &cmd.physics)?;
    scenario.validate_physics()?;
    let radii = radii_or_default(&cmd.radii_um);
    let rows = radius_sweep(&scenario, &radii, cmd.sweep.epsilon, cmd.sweep.samples)?;
    let mut report = MetricsReport::new("classical sweep-radii");
    for row in &rows {
        report.push(Metric::value(&format!("alpha_ratio_R{}um", row.radius_um), row.ratio(), ""));
    }
    let mut out = Output::new(&cmd.common.out_dir)?;
    write_radii_csv(&rows, out.file("radii.csv"))?;
    write_metrics(&report, out.file("metrics.toml"))?;
    println!("{:>10} {:>14} {:>14} {:>10}", "R (um)", "alpha_c", "alpha_sta", "ratio");
    for r in &rows {
        println!("{:>10.3} {:>14.6e} {:>14.6e} {:>10.2}", r.radius_um, r.alpha_circular, r.alpha_sta, r.ratio());
    }
    Ok(Finished {
        output: out,
        inputs: scenario_bytes(&scenario)?,
        pass: true,
    })
}

fn apply_grid_flags(scenario: &mut Scenario, g: &GridFlags) {
    let q = &mut scenario.quantum;
    macro_rules! set {
        ($($field:ident),*) => {$(if let Some(v) = g.$field { q.$field = v; })*};
    }
    set!(
        grid_ns,
        grid_ny,
        y_halfwidth_sigma,
        dt_fraction,
        sigma_s_over_sigma_y,
        start_position_sf,
        stop_position_sf,
        record_every
    );
    if g.no_carrier {
        q.carrier = false;
    }
}

fn quantum_run(cmd: QuantumRunCmd) -> CliResult<Finished> {
    let (mut scenario, design, _) = resolve_bend(&cmd.source)?;
    apply_grid_flags(&mut scenario, &cmd.grid);
    scenario.validate_physics()?;
    let mut inputs = scenario_bytes(&scenario)?;
    if let Some(file) = &cmd.source.profile {
        inputs.extend(std::fs::read(file).unwrap_or_default());
    }
    let units = design.units;
    let run = run_protocol(&design, &scenario.quantum)?;
    let mut report = MetricsReport::new("quantum run");
    report.warnings.clone_from(&run.warnings);
    report.push(Metric::value("nbar", run.last.nbar, ""));
    report.push(Metric::value("fidelity", run.fidelity, ""));
    report.push(Metric::value("sdot_final_over_sdot0", run.last.sdot_mean / run.sdot0, ""));
    report.push(Metric::value("norm_error", (run.last.norm - 1.0).abs(), ""));
    report.push(Metric::value("leakage", run.last.leakage, ""));
    report.push(Metric::value("s_final_over_sf", run.last.s_mean / design.length(), ""));
    let mut out = Output::new(&cmd.source.common.out_dir)?;
    write_observables_csv(&run.observables, design.length(), &units, out.file("observables.csv"))?;
    write_snapshot(
        &Snapshot::from_grid(run.grid(), &run.density(), &units),
        out.file("snapshot.txt"),
    )?;
    write_metrics(&report, out.file("metrics.toml"))?;
    print_report(&report);
    Ok(Finished {
        output: out,
        inputs,
        pass: true,
    })
}

fn reproduce(cmd: ReproduceCmd) -> CliResult<Finished> {
    let mut out = Output::new(&cmd.common.out_dir)?;
    let given = match &cmd.common.scenario {
        Some(path) => Some(load_scenario(path)?),
        None => None,
    };
    let (scenario, report) = match cmd.figure {
        Figure::Fig2 => {
            let scenario = given.unwrap_or_else(Scenario::reference_bend);
            let r = reproduce_reference_bend(&scenario)?;
            let units = r.design.units;
            save_scenario(&scenario, out.file("scenario.toml"))?;
            write_profile_csv(&r.design.profile, &units, out.file("profile.csv"))?;
            write_design_metadata(&r.design, out.file("design.toml"))?;
            write_path_csv(&r.path, &units, out.file("path.csv"))?;
            write_trajectory_csv(&r.trajectory, &units, out.file("trajectory.csv"))?;
            (scenario, r.report)
        }
        Figure::Fig3 => {
            let scenario = given.unwrap_or_else(Scenario::reference_bend);
            let radii = radii_or_default(&cmd.radii_um);
            let r = reproduce_robustness(&scenario, &radii, targets::SWEEP_EPSILON, targets::SWEEP_SAMPLES)?;
            save_scenario(&scenario, out.file("scenario.toml"))?;
            write_radii_csv(&r.rows, out.file("radii.csv"))?;
            (scenario, r.report)
        }
        Figure::Fig4 => {
            let mut scenario = match given {
                Some(s) => s,
                None => comparison_scenario()?,
            };
            apply_grid_flags(&mut scenario, &cmd.grid);
            scenario.validate()?;
            let r = reproduce_quantum(&scenario)?;
            let units = r.design_2d.units;
            save_scenario(&scenario, out.file("scenario.toml"))?;
            for (tag, design, run) in [("2d", &r.design_2d, &r.run_2d), ("1d", &r.design_1d, &r.run_1d)] {
                write_profile_csv(&design.profile, &units, out.file(&format!("profile_{tag}.csv")))?;
                write_design_metadata(design, out.file(&format!("design_{tag}.toml")))?;
                write_observables_csv(
                    &run.observables,
                    design.length(),
                    &units,
                    out.file(&format!("observables_{tag}.csv")),
                )?;
                write_snapshot(
                    &Snapshot::from_grid(run.grid(), &run.density(), &units),
                    out.file(&format!("snapshot_{tag}.txt")),
                )?;
            }
            write_adiabaticity_csv(&r.adiabaticity, &units, out.file("adiabaticity_2d.csv"))?;
            (scenario, r.report)
        }
    };
    write_metrics(&report, out.file("metrics.toml"))?;
    print_report(&report);
    let pass = report.all_pass();
    println!("{}", if pass { "all checks passed" } else { "some checks FAILED" });
    Ok(Finished {
        output: out,
        inputs: scenario_bytes(&scenario)?,
        pass,
    })
}
