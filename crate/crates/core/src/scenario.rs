//! Physical constants, the natural unit system and the scenario file.
//!
//! Scenario files are TOML. SI (or the engineering units named in each key)
//! appears only here and in the table writers; everything downstream works
//! in the dimensionless units of [`UnitSystem`]: length `σ = √(ħ/mω)`,
//! time `1/ω`, energy `ħω`. In these units `ħ = m = ω = 1`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// ⁸⁷Rb atomic mass, kg. Used when a scenario does not give `mass_kg`.
pub const RB87_MASS: f64 = 1.443_160_60e-25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// kg
    pub mass: f64,
    /// J·s
    pub hbar: f64,
    /// Transverse trap angular frequency, rad/s.
    pub omega: f64,
    /// Incident longitudinal velocity, m/s.
    pub sdot0: f64,
}

impl PhysicalParams {
    pub fn new(mass: f64, hbar: f64, omega: f64, sdot0: f64) -> Result<Self> {
        for (key, value) in [("mass", mass), ("hbar", hbar), ("omega", omega), ("sdot0", sdot0)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::validation(key, format!("must be finite and > 0, got {value}")));
            }
        }
        let params = Self { mass, hbar, omega, sdot0 };
        let sigma = params.sigma();
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::validation("omega", "ground-state length is not finite"));
        }
        Ok(params)
    }

    /// ⁸⁷Rb with the given trap frequency (Hz) and incident velocity (mm/s).
    pub fn rb87(omega_hz: f64, sdot0_mm_s: f64) -> Result<Self> {
        Self::new(RB87_MASS, HBAR, 2.0 * PI * omega_hz, sdot0_mm_s * 1e-3)
    }

    /// Transverse ground-state length `√(ħ/mω)`, m.
    pub fn sigma(&self) -> f64 {
        (self.hbar / (self.mass * self.omega)).sqrt()
    }

    pub fn units(&self) -> UnitSystem {
        natural_units(self)
    }
}

/// Conversion factors between SI and the internal dimensionless units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    /// σ in m.
    pub length: f64,
    /// 1/ω in s.
    pub time: f64,
    /// ħω in J.
    pub energy: f64,
}

pub fn natural_units(params: &PhysicalParams) -> UnitSystem {
    UnitSystem {
        length: params.sigma(),
        time: 1.0 / params.omega,
        energy: params.hbar * params.omega,
    }
}

impl UnitSystem {
    pub fn velocity(&self) -> f64 {
        self.length / self.time
    }

    pub fn length_to_internal(&self, meters: f64) -> f64 {
        meters / self.length
    }
    pub fn length_to_si(&self, x: f64) -> f64 {
        x * self.length
    }
    pub fn time_to_internal(&self, seconds: f64) -> f64 {
        seconds / self.time
    }
    pub fn time_to_si(&self, t: f64) -> f64 {
        t * self.time
    }
    pub fn velocity_to_internal(&self, m_per_s: f64) -> f64 {
        m_per_s / self.velocity()
    }
    pub fn velocity_to_si(&self, v: f64) -> f64 {
        v * self.velocity()
    }
    pub fn energy_to_internal(&self, joules: f64) -> f64 {
        joules / self.energy
    }
    pub fn energy_to_si(&self, e: f64) -> f64 {
        e * self.energy
    }
    /// 1/m to 1/σ.
    pub fn curvature_to_internal(&self, per_m: f64) -> f64 {
        per_m * self.length
    }
    pub fn curvature_to_si(&self, kappa: f64) -> f64 {
        kappa / self.length
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Sta2d,
    Adiabatic1d,
    Circular,
    /// A profile read from a table rather than designed.
    Tabulated,
}

impl DesignKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DesignKind::Sta2d => "sta2d",
            DesignKind::Adiabatic1d => "adiabatic1d",
            DesignKind::Circular => "circular",
            DesignKind::Tabulated => "tabulated",
        }
    }
}

impl std::fmt::Display for DesignKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DesignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sta2d" => Ok(DesignKind::Sta2d),
            "adiabatic1d" => Ok(DesignKind::Adiabatic1d),
            "circular" => Ok(DesignKind::Circular),
            other => Err(Error::validation(
                "design.kind",
                format!("expected sta2d, adiabatic1d or circular, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSettings {
    pub kind: DesignKind,
    /// Peak curvature for sta2d; for adiabatic1d it fixes the matched Δy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_max_per_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_um: Option<f64>,
    /// Explicit transverse excursion for adiabatic1d, overriding the one
    /// derived from `kappa_max_per_um`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_y_um: Option<f64>,
    #[serde(default = "default_angle_deg")]
    pub angle_deg: f64,
}

fn default_angle_deg() -> f64 {
    90.0
}

impl Default for DesignSettings {
    fn default() -> Self {
        Self {
            kind: DesignKind::Sta2d,
            kappa_max_per_um: None,
            radius_um: None,
            delta_y_um: None,
            angle_deg: default_angle_deg(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantumSettings {
    pub grid_ns: usize,
    pub grid_ny: usize,
    /// Transverse half-width of the grid in units of σ.
    pub y_halfwidth_sigma: f64,
    /// Time step as a fraction of the trap period 2π/ω.
    pub dt_fraction: f64,
    /// Extent of the grid before s = 0; derived from the bend and the
    /// packet size when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_margin_left_um: Option<f64>,
    /// Extent of the grid after s = s_f.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_margin_right_um: Option<f64>,
    pub sigma_s_over_sigma_y: f64,
    /// Initial packet centre in units of s_f.
    pub start_position_sf: f64,
    /// Packet centre at which the run stops, in units of s_f.
    pub stop_position_sf: f64,
    /// Observables are recorded every this many steps.
    pub record_every: usize,
    /// Factor the incident plane wave out of the longitudinal stencil.
    pub carrier: bool,
}

impl Default for QuantumSettings {
    fn default() -> Self {
        Self {
            grid_ns: 1024,
            grid_ny: 128,
            y_halfwidth_sigma: 8.0,
            dt_fraction: 1.0 / 200.0,
            s_margin_left_um: None,
            s_margin_right_um: None,
            sigma_s_over_sigma_y: 10.0,
            start_position_sf: -0.5,
            stop_position_sf: 1.5,
            record_every: 10,
            carrier: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_kg: Option<f64>,
    pub omega_hz: f64,
    pub sdot0_mm_s: f64,
    #[serde(default)]
    pub design: DesignSettings,
    #[serde(default)]
    pub quantum: QuantumSettings,
}

impl Scenario {
    /// The Fig. 2 parameter set: ṡ₀ = 20 mm/s, ω = 2π·1705 Hz, κ_m = 0.22 μm⁻¹.
    pub fn reference_bend() -> Self {
        Self {
            mass_kg: None,
            omega_hz: 1705.0,
            sdot0_mm_s: 20.0,
            design: DesignSettings {
                kind: DesignKind::Sta2d,
                kappa_max_per_um: Some(0.22),
                ..DesignSettings::default()
            },
            quantum: QuantumSettings::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn mass(&self) -> f64 {
        self.mass_kg.unwrap_or(RB87_MASS)
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        PhysicalParams::new(self.mass(), HBAR, 2.0 * PI * self.omega_hz, self.sdot0_mm_s * 1e-3)
    }

    pub fn units(&self) -> Result<UnitSystem> {
        Ok(self.params()?.units())
    }

    /// Total bend angle in rad.
    pub fn angle(&self) -> f64 {
        self.design.angle_deg.to_radians()
    }

    /// Check every section.
    pub fn validate(&self) -> Result<()> {
        self.validate_physics()?;
        self.validate_design()
    }

    /// Check everything except the design section, for runs on a
    /// tabulated profile.
    pub fn validate_physics(&self) -> Result<()> {
        if let Some(mass) = self.mass_kg {
            positive("mass_kg", mass)?;
        }
        positive("omega_hz", self.omega_hz)?;
        positive("sdot0_mm_s", self.sdot0_mm_s)?;
        self.validate_quantum()
    }

    fn validate_design(&self) -> Result<()> {
        let d = &self.design;
        if !(d.angle_deg > 0.0 && d.angle_deg <= 180.0) {
            return Err(Error::validation(
                "design.angle_deg",
                format!("must lie in (0, 180], got {}", d.angle_deg),
            ));
        }
        match d.kind {
            DesignKind::Sta2d => match d.kappa_max_per_um {
                Some(k) => positive("design.kappa_max_per_um", k)?,
                None => return Err(Error::validation("design.kappa_max_per_um", "required for sta2d")),
            },
            DesignKind::Circular => match d.radius_um {
                Some(r) => positive("design.radius_um", r)?,
                None => return Err(Error::validation("design.radius_um", "required for circular")),
            },
            DesignKind::Tabulated => {
                return Err(Error::validation(
                    "design.kind",
                    "tabulated profiles are read from a profile file, not built from a scenario",
                ))
            }
            DesignKind::Adiabatic1d => match (d.delta_y_um, d.kappa_max_per_um) {
                (Some(dy), _) => {
                    if !(dy.is_finite() && dy < 0.0) {
                        return Err(Error::validation("design.delta_y_um", "must be finite and < 0"));
                    }
                }
                (None, Some(k)) => positive("design.kappa_max_per_um", k)?,
                (None, None) => {
                    return Err(Error::validation(
                        "design.kappa_max_per_um",
                        "adiabatic1d needs kappa_max_per_um (matched 2D design) or delta_y_um",
                    ))
                }
            },
        }
        Ok(())
    }

    fn validate_quantum(&self) -> Result<()> {
        let q = &self.quantum;
        if q.grid_ns < 8 {
            return Err(Error::validation("quantum.grid_ns", "must be at least 8"));
        }
        if q.grid_ny < 8 {
            return Err(Error::validation("quantum.grid_ny", "must be at least 8"));
        }
        positive("quantum.y_halfwidth_sigma", q.y_halfwidth_sigma)?;
        positive("quantum.dt_fraction", q.dt_fraction)?;
        positive("quantum.sigma_s_over_sigma_y", q.sigma_s_over_sigma_y)?;
        if let Some(m) = q.s_margin_left_um {
            positive("quantum.s_margin_left_um", m)?;
        }
        if let Some(m) = q.s_margin_right_um {
            positive("quantum.s_margin_right_um", m)?;
        }
        if !q.start_position_sf.is_finite() || q.start_position_sf >= 0.0 {
            return Err(Error::validation("quantum.start_position_sf", "must be < 0 (entry guide)"));
        }
        if !q.stop_position_sf.is_finite() || q.stop_position_sf <= 1.0 {
            return Err(Error::validation("quantum.stop_position_sf", "must be > 1 (exit guide)"));
        }
        if q.record_every == 0 {
            return Err(Error::validation("quantum.record_every", "must be at least 1"));
        }
        Ok(())
    }
}

fn positive(key: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(key, format!("must be finite and > 0, got {value}")))
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Scenario::from_toml_str(&text)
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, scenario.to_toml_string()?).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const FIG2: &str = r#"
omega_hz = 1705
sdot0_mm_s = 20

[design]
kind = "sta2d"
kappa_max_per_um = 0.22
"#;

    #[test]
    fn fig2_file_parses() {
        let sc = Scenario::from_toml_str(FIG2).unwrap();
        assert_eq!(sc.design.kind, DesignKind::Sta2d);
        assert_eq!(sc.design.kappa_max_per_um, Some(0.22));
        assert_eq!(sc.design.angle_deg, 90.0);
        let p = sc.params().unwrap();
        assert_relative_eq!(p.omega, 2.0 * PI * 1705.0);
        assert_relative_eq!(p.sdot0, 0.02);
    }

    #[test]
    fn missing_mass_defaults_to_rubidium() {
        let sc = Scenario::from_toml_str(FIG2).unwrap();
        assert_eq!(sc.mass(), RB87_MASS);
        let sigma = sc.params().unwrap().sigma();
        assert!((sigma * 1e6 - 0.261).abs() < 5e-4, "sigma = {sigma}");
    }

    #[test]
    fn zero_omega_is_rejected_by_name() {
        let err = Scenario::from_toml_str("omega_hz = 0\nsdot0_mm_s = 20\n[design]\nkind=\"circular\"\nradius_um=10\n")
            .unwrap_err();
        match err {
            Error::Validation { key, .. } => assert!(key.contains("omega"), "{key}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_file_is_a_parse_error() {
        assert!(matches!(Scenario::from_toml_str("omega_hz = = 3"), Err(Error::Parse(_))));
        assert!(matches!(Scenario::from_toml_str("omega_hz = 3\nbogus = 1"), Err(Error::Parse(_))));
    }

    #[test]
    fn kind_specific_keys_are_required() {
        let err = Scenario::from_toml_str("omega_hz = 1705\nsdot0_mm_s = 20\n[design]\nkind = \"circular\"\n")
            .unwrap_err();
        assert!(matches!(err, Error::Validation { ref key, .. } if key == "design.radius_um"));
        let err = Scenario::from_toml_str(
            "omega_hz = 1705\nsdot0_mm_s = 20\n[design]\nkind = \"sta2d\"\nkappa_max_per_um = 0.2\nangle_deg = 200\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation { ref key, .. } if key == "design.angle_deg"));
    }

    #[test]
    fn natural_units_of_reference_parameters() {
        let p = PhysicalParams::rb87(1705.0, 20.0).unwrap();
        let u = natural_units(&p);
        assert!((u.length * 1e6 - 0.2612).abs() < 1e-4);
        let v = u.velocity_to_internal(p.sdot0);
        assert!((v - 7.15).abs() < 5e-3, "v = {v}");
        assert_eq!(u.length_to_internal(p.sigma()), 1.0);
        // ħ = m = ω = 1 in these units
        assert_relative_eq!(p.hbar / (u.energy * u.time), 1.0, max_relative = 1e-14);
        assert_relative_eq!(p.mass * u.length.powi(2) / (u.energy * u.time.powi(2)), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(PhysicalParams::new(-1.0, HBAR, 1.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, HBAR, f64::NAN, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, HBAR, 1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn unit_round_trip(x in 1e-12f64..1e3, omega_hz in 10.0f64..1e5, mass in 1e-27f64..1e-24) {
            let p = PhysicalParams::new(mass, HBAR, 2.0 * PI * omega_hz, 0.01).unwrap();
            let u = p.units();
            let close = |a: f64, b: f64| ((a - b) / b).abs() <= 1e-14;
            prop_assert!(close(u.length_to_si(u.length_to_internal(x)), x));
            prop_assert!(close(u.time_to_si(u.time_to_internal(x)), x));
            prop_assert!(close(u.velocity_to_si(u.velocity_to_internal(x)), x));
            prop_assert!(close(u.energy_to_si(u.energy_to_internal(x)), x));
            prop_assert!(close(u.curvature_to_si(u.curvature_to_internal(x)), x));
        }

        #[test]
        fn scenario_round_trip(
            omega_hz in 1.0f64..1e5,
            sdot in 0.1f64..100.0,
            kappa in 1e-3f64..2.0,
            angle in 1.0f64..180.0,
            mass in proptest::option::of(1e-27f64..1e-24),
            ns in 8usize..4096,
        ) {
            let mut sc = Scenario::reference_bend();
            sc.omega_hz = omega_hz;
            sc.sdot0_mm_s = sdot;
            sc.mass_kg = mass;
            sc.design.kappa_max_per_um = Some(kappa);
            sc.design.angle_deg = angle;
            sc.quantum.grid_ns = ns;
            sc.quantum.s_margin_left_um = Some(kappa * 10.0);
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("scenario.toml");
            save_scenario(&sc, &path).unwrap();
            let back = load_scenario(&path).unwrap();
            prop_assert_eq!(back, sc);
        }
    }
}
