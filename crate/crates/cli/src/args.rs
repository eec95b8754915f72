use std::path::PathBuf;

use bendsta_core::reproduce::targets;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bendsta", version, about = "Design and validate sharply bent matter-wave guides")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design a bend; write its profile, metadata, path and adiabaticity table.
    Design(DesignCmd),
    /// Reconstruct the planar centreline of a bend and its equivalent radius.
    Path(PathCmd),
    /// Adiabaticity ratios along a curvature profile.
    Diagnose(DiagnoseCmd),
    /// Point-particle validation.
    #[command(subcommand)]
    Classical(ClassicalCmd),
    /// Wave-packet validation.
    #[command(subcommand)]
    Quantum(QuantumCmd),
    /// Rerun a built-in reproduction and check it against reference values.
    Reproduce(ReproduceCmd),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Design(_) => "design",
            Command::Path(_) => "path",
            Command::Diagnose(_) => "diagnose",
            Command::Classical(ClassicalCmd::Run(_)) => "classical run",
            Command::Classical(ClassicalCmd::Sweep(_)) => "classical sweep",
            Command::Classical(ClassicalCmd::SweepRadii(_)) => "classical sweep-radii",
            Command::Quantum(QuantumCmd::Run(_)) => "quantum run",
            Command::Reproduce(r) => match r.figure {
                Figure::Fig2 => "reproduce fig2",
                Figure::Fig3 => "reproduce fig3",
                Figure::Fig4 => "reproduce fig4",
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario TOML file; inline flags override its values.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Directory for all output files and the run manifest.
    #[arg(long, default_value = "bendsta-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// ṡ₀ = 20 mm/s, ω = 2π·1705 Hz, κ_m = 0.22 μm⁻¹.
    Reference,
    /// The same trap and speed with T = 0.295 ms and a 7.5σ grid half-width.
    Comparison,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Sta2d,
    Adiabatic1d,
    Circular,
}

/// Physical parameters, shared by every command.
#[derive(Debug, Args)]
pub struct PhysicsFlags {
    /// Built-in parameter set used as the base instead of a scenario file.
    #[arg(long, value_enum, conflicts_with = "scenario")]
    pub preset: Option<Preset>,
    /// Transverse trap frequency ω/2π.
    #[arg(long)]
    pub omega_hz: Option<f64>,
    /// Incident longitudinal velocity.
    #[arg(long)]
    pub sdot0_mm_s: Option<f64>,
    /// Particle mass; ⁸⁷Rb when absent.
    #[arg(long)]
    pub mass_kg: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DesignFlags {
    #[arg(long, value_enum, conflicts_with = "adiabatic1d")]
    pub kind: Option<KindArg>,
    /// Shorthand for --kind adiabatic1d.
    #[arg(long)]
    pub adiabatic1d: bool,
    #[arg(long)]
    pub kappa_max_per_um: Option<f64>,
    #[arg(long)]
    pub radius_um: Option<f64>,
    /// Transverse excursion for adiabatic1d (negative, outward).
    #[arg(long, allow_hyphen_values = true)]
    pub delta_y_um: Option<f64>,
    #[arg(long)]
    pub angle_deg: Option<f64>,
}

/// A bend given either by design flags or by a profile CSV.
#[derive(Debug, Args)]
pub struct BendSource {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub physics: PhysicsFlags,
    #[command(flatten)]
    pub design: DesignFlags,
    /// Curvature profile CSV (`s_m,kappa_per_m`) instead of a design.
    #[arg(long)]
    pub profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DesignCmd {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub physics: PhysicsFlags,
    #[command(flatten)]
    pub design: DesignFlags,
}

#[derive(Debug, Args)]
pub struct PathCmd {
    #[command(flatten)]
    pub source: BendSource,
    /// Arc-length step of the reconstruction; s_f/4000 when absent.
    #[arg(long)]
    pub ds_um: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DiagnoseCmd {
    #[command(flatten)]
    pub source: BendSource,
}

#[derive(Debug, Subcommand)]
pub enum ClassicalCmd {
    /// Integrate one trajectory through the bend.
    Run(ClassicalRunCmd),
    /// Exit amplitude over a band of incident speeds.
    Sweep(SweepCmd),
    /// Circular and matched exact bends over a radius grid.
    SweepRadii(SweepRadiiCmd),
}

#[derive(Debug, Args)]
pub struct StepFlags {
    /// Integration steps per trap period.
    #[arg(long, default_value_t = bendsta_core::classical::DEFAULT_STEPS_PER_PERIOD)]
    pub steps_per_period: f64,
}

#[derive(Debug, Args)]
pub struct ClassicalRunCmd {
    #[command(flatten)]
    pub source: BendSource,
    #[command(flatten)]
    pub steps: StepFlags,
    /// Initial longitudinal speed; the design speed when absent.
    #[arg(long)]
    pub sdot_mm_s: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub y0_um: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub ydot0_mm_s: f64,
}

#[derive(Debug, Args)]
pub struct SweepFlags {
    /// Half-width of the speed band relative to ṡ₀.
    #[arg(long, default_value_t = targets::SWEEP_EPSILON)]
    pub epsilon: f64,
    /// Number of speeds (odd, at least 11).
    #[arg(long, default_value_t = targets::SWEEP_SAMPLES)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct SweepCmd {
    #[command(flatten)]
    pub source: BendSource,
    #[command(flatten)]
    pub sweep: SweepFlags,
    #[command(flatten)]
    pub steps: StepFlags,
}

#[derive(Debug, Args)]
pub struct SweepRadiiCmd {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub physics: PhysicsFlags,
    #[command(flatten)]
    pub sweep: SweepFlags,
    /// Radii, comma separated; the built-in 8 to 20 μm grid when absent.
    #[arg(long, value_delimiter = ',')]
    pub radii_um: Vec<f64>,
}

#[derive(Debug, Subcommand)]
pub enum QuantumCmd {
    /// Send a wave packet through the bend.
    Run(QuantumRunCmd),
}

#[derive(Debug, Args)]
pub struct GridFlags {
    #[arg(long)]
    pub grid_ns: Option<usize>,
    #[arg(long)]
    pub grid_ny: Option<usize>,
    #[arg(long)]
    pub y_halfwidth_sigma: Option<f64>,
    /// Time step as a fraction of the trap period.
    #[arg(long)]
    pub dt_fraction: Option<f64>,
    /// Longitudinal packet width in units of σ.
    #[arg(long)]
    pub sigma_s_over_sigma_y: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub start_position_sf: Option<f64>,
    #[arg(long)]
    pub stop_position_sf: Option<f64>,
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Use the plain longitudinal stencil without the carrier factor.
    #[arg(long)]
    pub no_carrier: bool,
}

#[derive(Debug, Args)]
pub struct QuantumRunCmd {
    #[command(flatten)]
    pub source: BendSource,
    #[command(flatten)]
    pub grid: GridFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    /// Reference bend: length, time, equivalent radius, classical null test.
    Fig2,
    /// Robustness of circular versus matched exact bends over radius.
    Fig3,
    /// Quantum comparison of the exact and 1D-adiabatic designs.
    Fig4,
}

#[derive(Debug, Args)]
pub struct ReproduceCmd {
    #[arg(value_enum)]
    pub figure: Figure,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: GridFlags,
    /// Radii for fig3, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub radii_um: Vec<f64>,
}
