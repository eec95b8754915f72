//! CSV, metadata and snapshot files. Everything written here is SI; the
//! readers convert back to natural units.
//!
//! Floats are written in their shortest round-trip form, so identical
//! inputs give byte-identical files. Every writer assembles the whole file
//! in memory before touching the disk, so a failed run leaves no partial
//! table behind.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classical::{ClassicalTrajectory, SweepResult};
use crate::designer::BendDesign;
use crate::error::{Error, Result};
use crate::geometry::{AdiabaticityReport, CurvatureProfile, PlanarPath};
use crate::quantum::{Grid2D, Observables};
use crate::reproduce::RadiusRow;
use crate::scenario::{DesignKind, UnitSystem};

pub const PROFILE_HEADER: [&str; 2] = ["s_m", "kappa_per_m"];
pub const PATH_HEADER: [&str; 4] = ["s_m", "X_m", "Y_m", "theta_rad"];
pub const TRAJECTORY_HEADER: [&str; 6] = ["t_s", "s_m", "sdot_m_s", "y_m", "ydot_m_s", "energy_rel_drift"];
pub const SWEEP_HEADER: [&str; 3] = ["v_m_s", "a_m", "a_over_sigma"];
pub const OBSERVABLES_HEADER: [&str; 10] = [
    "t_s",
    "s_mean_m",
    "s_over_sf",
    "y_mean_m",
    "sdot_mean_m_s",
    "Et_J",
    "nbar",
    "fidelity",
    "norm",
    "leakage",
];

/// First line of a density snapshot file.
pub const ADIABATICITY_HEADER: [&str; 5] = ["s_m", "kappa_per_m", "sigma_kappa", "slope_ratio", "bending_ratio"];
pub const RADII_HEADER: [&str; 5] = ["radius_um", "alpha_circular", "kappa_sta_per_um", "alpha_sta", "ratio"];
pub const SNAPSHOT_MAGIC: &str = "# bendsta-snapshot v1";

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn csv_bytes<T: Serialize, const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [T; N]>) -> Result<Vec<u8>> {
    let table_err = |e: csv::Error| Error::Table(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(table_err)?;
    for row in rows {
        w.serialize(&row[..]).map_err(table_err)?;
    }
    w.into_inner().map_err(|e| Error::Table(e.to_string()))
}

fn read_csv(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let table_err = |e: csv::Error| Error::Table(format!("{}: {e}", path.display()));
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let found: Vec<String> = r.headers().map_err(table_err)?.iter().map(str::to_string).collect();
    if found != header {
        return Err(Error::Table(format!(
            "{}: expected header {}, found {}",
            path.display(),
            header.join(","),
            found.join(",")
        )));
    }
    r.deserialize::<Vec<f64>>().map(|row| row.map_err(table_err)).collect()
}

/// Profile CSV `s_m,kappa_per_m` over [0, s_f].
pub fn write_profile_csv(profile: &CurvatureProfile, units: &UnitSystem, path: impl AsRef<Path>) -> Result<()> {
    let rows = profile
        .sample_s()
        .iter()
        .zip(profile.sample_kappa())
        .map(|(&s, &k)| [units.length_to_si(s), units.curvature_to_si(k)]);
    write_file(path.as_ref(), &csv_bytes(PROFILE_HEADER, rows)?)
}

/// Read a profile CSV into natural units.
///
/// The interior is re-interpolated with the monotone cubic Hermite rule,
/// so one-sided slopes at a cusp are not preserved exactly.
pub fn read_profile_csv(units: &UnitSystem, path: impl AsRef<Path>) -> Result<CurvatureProfile> {
    let path = path.as_ref();
    let rows = read_csv(path, &PROFILE_HEADER)?;
    if rows.len() < 2 {
        return Err(Error::Table(format!("{}: a profile needs at least two rows", path.display())));
    }
    let (s, kappa): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .map(|r| (units.length_to_internal(r[0]), units.curvature_to_internal(r[1])))
        .unzip();
    if s[0].abs() > 1e-9 * s[s.len() - 1].abs() {
        return Err(Error::Table(format!("{}: first row must be at s = 0", path.display())));
    }
    let mut s = s;
    s[0] = 0.0;
    if s.len() == 2 && kappa[0] == kappa[1] {
        return CurvatureProfile::constant(kappa[0], s[1]);
    }
    CurvatureProfile::from_samples(s, kappa)
}

/// Path CSV `s_m,X_m,Y_m,theta_rad`.
pub fn write_path_csv(path: &PlanarPath, units: &UnitSystem, file: impl AsRef<Path>) -> Result<()> {
    let rows = (0..path.len()).map(|i| {
        [
            units.length_to_si(path.s[i]),
            units.length_to_si(path.x[i]),
            units.length_to_si(path.y[i]),
            path.theta[i],
        ]
    });
    write_file(file.as_ref(), &csv_bytes(PATH_HEADER, rows)?)
}

/// Design metadata, SI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMetadata {
    pub kind: DesignKind,
    /// Half-bend duration T.
    #[serde(rename = "T_s")]
    pub t_half_s: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta_y_m: Option<f64>,
    pub kappa_m_per_m: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub radius_m: Option<f64>,
    pub s_f_m: f64,
    pub angle_rad: f64,
    pub sdot0_m_s: f64,
    pub omega_rad_s: f64,
}

impl DesignMetadata {
    pub fn from_design(design: &BendDesign) -> Self {
        let u = &design.units;
        Self {
            kind: design.kind,
            t_half_s: u.time_to_si(design.half_time),
            delta_y_m: design.delta_y().map(|d| u.length_to_si(d)),
            kappa_m_per_m: u.curvature_to_si(design.kappa_peak()),
            radius_m: design.inputs.radius.map(|r| u.length_to_si(r)),
            s_f_m: u.length_to_si(design.length()),
            angle_rad: design.inputs.angle,
            sdot0_m_s: u.velocity_to_si(design.inputs.sdot0),
            omega_rad_s: 1.0 / u.time,
        }
    }
}

pub fn write_design_metadata(design: &BendDesign, path: impl AsRef<Path>) -> Result<()> {
    let text = toml::to_string(&DesignMetadata::from_design(design)).map_err(|e| Error::Table(e.to_string()))?;
    write_file(path.as_ref(), text.as_bytes())
}

pub fn read_design_metadata(path: impl AsRef<Path>) -> Result<DesignMetadata> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Table(format!("{}: {e}", path.display())))
}

/// Trajectory CSV `t_s,s_m,sdot_m_s,y_m,ydot_m_s,energy_rel_drift`.
pub fn write_trajectory_csv(traj: &ClassicalTrajectory, units: &UnitSystem, path: impl AsRef<Path>) -> Result<()> {
    let drift = traj.relative_energy_drift();
    let rows = traj.states.iter().zip(drift).map(|(st, d)| {
        [
            units.time_to_si(st.t),
            units.length_to_si(st.s),
            units.velocity_to_si(st.sdot),
            units.length_to_si(st.y),
            units.velocity_to_si(st.ydot),
            d,
        ]
    });
    write_file(path.as_ref(), &csv_bytes(TRAJECTORY_HEADER, rows)?)
}

/// Sweep CSV `v_m_s,a_m,a_over_sigma` followed by a `# abar = …` line.
pub fn write_sweep_csv(sweep: &SweepResult, units: &UnitSystem, path: impl AsRef<Path>) -> Result<()> {
    let rows = sweep
        .velocities
        .iter()
        .zip(&sweep.amplitudes)
        .map(|(&v, &a)| [units.velocity_to_si(v), units.length_to_si(a), a]);
    let mut bytes = csv_bytes(SWEEP_HEADER, rows)?;
    bytes.extend_from_slice(format!("# abar = {}\n", sweep.mean_amplitude).as_bytes());
    write_file(path.as_ref(), &bytes)
}

/// Adiabaticity samples; ratios are empty where κ is negligible.
pub fn write_adiabaticity_csv(report: &AdiabaticityReport, units: &UnitSystem, path: impl AsRef<Path>) -> Result<()> {
    let rows = report.samples.iter().map(|p| {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            units.length_to_si(p.s).to_string(),
            units.curvature_to_si(p.kappa).to_string(),
            p.curvature.to_string(),
            opt(p.slope),
            opt(p.bending),
        ]
    });
    write_file(path.as_ref(), &csv_bytes(ADIABATICITY_HEADER, rows)?)
}

/// Robustness comparison table, one row per radius.
pub fn write_radii_csv(rows: &[RadiusRow], path: impl AsRef<Path>) -> Result<()> {
    let rows = rows
        .iter()
        .map(|r| [r.radius_um, r.alpha_circular, r.kappa_sta_per_um, r.alpha_sta, r.ratio()]);
    write_file(path.as_ref(), &csv_bytes(RADII_HEADER, rows)?)
}

/// Observables CSV, one row per recorded step.
pub fn write_observables_csv(
    series: &[Observables],
    s_f: f64,
    units: &UnitSystem,
    path: impl AsRef<Path>,
) -> Result<()> {
    let rows = series.iter().map(|o| {
        [
            units.time_to_si(o.t),
            units.length_to_si(o.s_mean),
            o.s_mean / s_f,
            units.length_to_si(o.y_mean),
            units.velocity_to_si(o.sdot_mean),
            units.energy_to_si(o.transverse_energy),
            o.nbar,
            o.fidelity,
            o.norm,
            o.leakage,
        ]
    });
    write_file(path.as_ref(), &csv_bytes(OBSERVABLES_HEADER, rows)?)
}

/// Density snapshot on the simulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub ns: usize,
    pub ny: usize,
    pub s_min_m: f64,
    pub s_max_m: f64,
    pub y_max_m: f64,
    /// |ψ|²h in μm⁻², row-major with the s index outermost.
    pub density_per_um2: Vec<f64>,
}

impl Snapshot {
    /// `density` is |ψ|²h in natural units (per σ²).
    pub fn from_grid(grid: &Grid2D, density: &[f64], units: &UnitSystem) -> Self {
        let sigma_um = units.length * 1e6;
        Self {
            ns: grid.ns,
            ny: grid.ny,
            s_min_m: units.length_to_si(grid.s_min()),
            s_max_m: units.length_to_si(grid.s_max()),
            y_max_m: units.length_to_si(grid.y_max()),
            density_per_um2: density.iter().map(|d| d / (sigma_um * sigma_um)).collect(),
        }
    }
}

/// Text snapshot: the magic line, a header line
/// `n_s n_y s_min_m s_max_m y_max_m`, then one line of n_y values per s row.
pub fn write_snapshot(snap: &Snapshot, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "{SNAPSHOT_MAGIC}");
    let _ = writeln!(out, "# n_s n_y s_min_m s_max_m y_max_m; then |psi|^2 h in um^-2, one s row per line");
    let _ = writeln!(
        out,
        "{} {} {:e} {:e} {:e}",
        snap.ns, snap.ny, snap.s_min_m, snap.s_max_m, snap.y_max_m
    );
    for row in snap.density_per_um2.chunks(snap.ny) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    write_file(path.as_ref(), out.as_bytes())
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    let path = path.as_ref();
    let bad = |what: &str| Error::Table(format!("{}: {what}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(SNAPSHOT_MAGIC) {
        return Err(bad("not a version 1 snapshot"));
    }
    let mut lines = lines.filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("missing header"))?.split_whitespace().collect();
    if header.len() != 5 {
        return Err(bad("header needs n_s n_y s_min s_max y_max"));
    }
    let count = |v: &str| v.parse::<usize>().map_err(|_| bad("bad grid size"));
    let real = |v: &str| v.parse::<f64>().map_err(|_| bad("bad number"));
    let (ns, ny) = (count(header[0])?, count(header[1])?);
    let density: Vec<f64> = lines.flat_map(str::split_whitespace).map(real).collect::<Result<_>>()?;
    if density.len() != ns * ny {
        return Err(bad(&format!("expected {} values, found {}", ns * ny, density.len())));
    }
    Ok(Snapshot {
        ns,
        ny,
        s_min_m: real(header[2])?,
        s_max_m: real(header[3])?,
        y_max_m: real(header[4])?,
        density_per_um2: density,
    })
}

/// One reported quantity, optionally checked against a reference value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub unit: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference: Option<f64>,
    /// Human-readable acceptance rule, e.g. "within 3%".
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tolerance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pass: Option<bool>,
}

impl Metric {
    pub fn value(name: &str, value: f64, unit: &str) -> Self {
        Self {
            name: name.into(),
            value,
            unit: unit.into(),
            reference: None,
            tolerance: None,
            pass: None,
        }
    }

    /// Pass when |value − reference| ≤ rel·|reference|.
    pub fn relative(name: &str, value: f64, unit: &str, reference: f64, rel: f64) -> Self {
        Self {
            reference: Some(reference),
            tolerance: Some(format!("within {}%", (rel * 1e4).round() / 100.0)),
            pass: Some((value - reference).abs() <= rel * reference.abs()),
            ..Self::value(name, value, unit)
        }
    }

    /// Pass when value ≤ bound.
    pub fn at_most(name: &str, value: f64, unit: &str, reference: Option<f64>, bound: f64) -> Self {
        Self {
            reference,
            tolerance: Some(format!("<= {}", bound_label(bound))),
            pass: Some(value <= bound),
            ..Self::value(name, value, unit)
        }
    }

    /// Pass when value ≥ bound.
    pub fn at_least(name: &str, value: f64, unit: &str, reference: Option<f64>, bound: f64) -> Self {
        Self {
            reference,
            tolerance: Some(format!(">= {}", bound_label(bound))),
            pass: Some(value >= bound),
            ..Self::value(name, value, unit)
        }
    }

    /// Pass when the condition holds; the value is 1 or 0.
    pub fn check(name: &str, holds: bool) -> Self {
        Self {
            tolerance: Some("holds".into()),
            pass: Some(holds),
            ..Self::value(name, if holds { 1.0 } else { 0.0 }, "")
        }
    }
}

/// Bounds below 1e-3 in exponent form, others as written.
fn bound_label(bound: f64) -> String {
    if bound != 0.0 && bound.abs() < 1e-3 {
        format!("{bound:e}")
    } else {
        format!("{bound}")
    }
}

/// Metrics summary of a command, written as TOML.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub command: String,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default, rename = "metric")]
    pub metrics: Vec<Metric>,
}

impl MetricsReport {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, metric: Metric) {
        self.metrics.push(metric);
    }

    /// False when any checked metric failed.
    pub fn all_pass(&self) -> bool {
        self.metrics.iter().all(|m| m.pass != Some(false))
    }

    pub fn get(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Table(e.to_string()))
    }
}

pub fn write_metrics(report: &MetricsReport, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), report.to_toml_string()?.as_bytes())
}

pub fn read_metrics(path: impl AsRef<Path>) -> Result<MetricsReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Table(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{default_dt, integrate, ClassicalState};
    use crate::designer::design_sta_bend;
    use crate::geometry::reconstruct_path;
    use crate::scenario::Scenario;

    fn reference() -> BendDesign {
        let sc = Scenario::reference_bend();
        design_sta_bend(&sc.params().unwrap(), 0.22e6, std::f64::consts::FRAC_PI_2).unwrap()
    }

    #[test]
    fn profile_round_trip_keeps_samples() {
        let d = reference();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("profile.csv");
        write_profile_csv(&d.profile, &d.units, &file).unwrap();
        let text = std::fs::read_to_string(&file).unwrap();
        assert!(text.starts_with("s_m,kappa_per_m\n"));
        let back = read_profile_csv(&d.units, &file).unwrap();
        assert_eq!(back.sample_s().len(), d.profile.sample_s().len());
        for (a, b) in back.sample_kappa().iter().zip(d.profile.sample_kappa()) {
            assert!((a - b).abs() <= 1e-12 * d.profile.kappa_max());
        }
        assert!((back.turning_angle() - d.profile.turning_angle()).abs() < 1e-6);
    }

    #[test]
    fn constant_profile_round_trips_as_a_step() {
        let units = Scenario::reference_bend().units().unwrap();
        let p = CurvatureProfile::constant(0.02, 78.5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("arc.csv");
        write_profile_csv(&p, &units, &file).unwrap();
        let back = read_profile_csv(&units, &file).unwrap();
        assert!((back.kappa(40.0) - 0.02).abs() < 1e-15);
        assert!((back.length() - 78.5).abs() < 1e-12);
    }

    #[test]
    fn wrong_header_is_rejected() {
        let units = Scenario::reference_bend().units().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("bad.csv");
        std::fs::write(&file, "s,kappa\n0,0\n1,0\n").unwrap();
        assert!(matches!(read_profile_csv(&units, &file), Err(Error::Table(_))));
    }

    #[test]
    fn path_and_metadata_are_si() {
        let d = reference();
        let dir = tempfile::tempdir().unwrap();
        let path = reconstruct_path(&d.profile, d.length() / 1000.0).unwrap();
        write_path_csv(&path, &d.units, dir.path().join("path.csv")).unwrap();
        let rows = read_csv(&dir.path().join("path.csv"), &PATH_HEADER).unwrap();
        let last = rows.last().unwrap();
        assert!((last[0] - d.units.length_to_si(d.length())).abs() < 1e-15);
        assert!((last[3] - std::f64::consts::FRAC_PI_2).abs() < 1e-8);

        write_design_metadata(&d, dir.path().join("design.toml")).unwrap();
        let meta = read_design_metadata(dir.path().join("design.toml")).unwrap();
        assert_eq!(meta.kind, DesignKind::Sta2d);
        assert!((meta.kappa_m_per_m - 0.22e6).abs() < 1e-6 * 0.22e6);
        assert!((meta.omega_rad_s - 2.0 * std::f64::consts::PI * 1705.0).abs() < 1e-9);
        assert!((meta.sdot0_m_s - 0.02).abs() < 1e-15);
    }

    #[test]
    fn trajectory_and_sweep_tables() {
        let units = Scenario::reference_bend().units().unwrap();
        let p = CurvatureProfile::constant(0.0, 10.0).unwrap();
        let traj = integrate(&p, ClassicalState::on_axis(0.0, 7.0), default_dt(), 10.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("traj.csv");
        write_trajectory_csv(&traj, &units, &file).unwrap();
        let rows = read_csv(&file, &TRAJECTORY_HEADER).unwrap();
        assert_eq!(rows.len(), traj.states.len());
        assert!(rows.iter().all(|r| r[3] == 0.0 && r[5] == 0.0));

        let sweep = SweepResult {
            velocities: vec![6.0, 7.0],
            amplitudes: vec![0.5, 0.25],
            mean_amplitude: 0.375,
        };
        let file = dir.path().join("sweep.csv");
        write_sweep_csv(&sweep, &units, &file).unwrap();
        let text = std::fs::read_to_string(&file).unwrap();
        assert!(text.ends_with("# abar = 0.375\n"));
        let rows = read_csv(&file, &SWEEP_HEADER).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1][2], 0.25);
    }

    #[test]
    fn snapshot_round_trip() {
        let snap = Snapshot {
            ns: 3,
            ny: 2,
            s_min_m: -1e-6,
            s_max_m: 2e-6,
            y_max_m: 5e-7,
            density_per_um2: vec![0.0, 0.125, 1.5, 2.25e-3, 7.0, 1e-300],
        };
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("snap.txt");
        write_snapshot(&snap, &file).unwrap();
        assert_eq!(read_snapshot(&file).unwrap(), snap);
        std::fs::write(&file, "garbage\n").unwrap();
        assert!(read_snapshot(&file).is_err());
    }

    #[test]
    fn metrics_round_trip_and_verdicts() {
        let mut report = MetricsReport::new("reproduce fig2");
        report.push(Metric::relative("s_f", 16.43, "um", 16.6, 0.03));
        report.push(Metric::at_most("nbar", 2e-3, "", Some(5.1e-3), 1e-2));
        report.push(Metric::value("T", 0.44, "ms"));
        assert!(report.all_pass());
        report.push(Metric::relative("R_eq", 7.5, "um", 10.0, 0.05));
        assert!(!report.all_pass());
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("metrics.toml");
        write_metrics(&report, &file).unwrap();
        assert_eq!(read_metrics(&file).unwrap(), report);
    }
}
