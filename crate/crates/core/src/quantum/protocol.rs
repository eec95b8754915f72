use std::f64::consts::TAU;

use super::evolve::Propagator;
use super::field::{init_wavepacket, transverse_ground, PacketSpec, TransverseGround, WaveField};
use super::grid::{protocol_grid_spec, Grid2D};
use super::observables::{checked_fidelity, measure, Observables};
use super::operator::Hamiltonian;
use crate::designer::BendDesign;
use crate::error::{Error, Result};
use crate::scenario::QuantumSettings;

/// Packet tails, in units of σ_s, that must fit inside the grid.
pub const SUPPORT_WIDTHS: f64 = 4.0;

/// Leakage above which a run carries a warning.
pub const LEAKAGE_WARNING: f64 = 1e-8;

/// Outcome of a full traversal simulation, natural units.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub hamiltonian: Hamiltonian,
    pub ground: TransverseGround,
    pub dt: f64,
    /// Incident velocity ṡ₀.
    pub sdot0: f64,
    /// Recorded every `record_every` steps, plus the first and last state.
    pub observables: Vec<Observables>,
    /// Observables at the stop position.
    pub last: Observables,
    /// Ground-mode fidelity at the stop position.
    pub fidelity: f64,
    pub field: WaveField,
    pub warnings: Vec<String>,
}

impl ProtocolRun {
    pub fn grid(&self) -> &Grid2D {
        &self.hamiltonian.grid
    }

    /// |ψ|²h at every node, row-major; integrates to the norm over ds dy.
    pub fn density(&self) -> Vec<f64> {
        self.field
            .phi
            .iter()
            .zip(&self.grid().h)
            .map(|(p, h)| p.norm_sqr() * h)
            .collect()
    }
}

/// Send a cigar-shaped packet through `design` and follow it until its
/// centre reaches `stop_position_sf · s_f`.
///
/// The packet starts at `start_position_sf · s_f` with the design velocity
/// ṡ₀, the transverse ground state and longitudinal width σ_s =
/// `sigma_s_over_sigma_y` ground-state lengths, in the same Gaussian
/// convention as the ground state.
pub fn run_protocol(design: &BendDesign, settings: &QuantumSettings) -> Result<ProtocolRun> {
    let profile = &design.profile;
    let s_f = profile.length();
    let sdot0 = design.inputs.sdot0;
    let sigma_s = settings.sigma_s_over_sigma_y;
    let spec = protocol_grid_spec(settings, s_f, sigma_s, design.units.length * 1e6);
    let grid = Grid2D::new(profile, spec)?;
    let k = if settings.carrier { sdot0 } else { 0.0 };
    let hamiltonian = Hamiltonian::new(grid, k);
    let ground = transverse_ground(&hamiltonian.grid.y, hamiltonian.grid.dy);
    let packet = PacketSpec {
        s0: settings.start_position_sf * s_f,
        sigma_s,
        k0: sdot0,
    };
    let mut field = init_wavepacket(&hamiltonian, &ground, packet, SUPPORT_WIDTHS)?;
    let dt = TAU * settings.dt_fraction;
    let propagator = Propagator::new(&hamiltonian, dt)?;

    let s_stop = settings.stop_position_sf * s_f;
    let expected = (s_stop - packet.s0) / sdot0 / dt;
    let max_steps = (3.0 * expected) as usize + 100;
    let record_every = settings.record_every.max(1);

    let mut observables = vec![measure(&hamiltonian, &ground, &field)];
    let mut warnings = Vec::new();
    let mut leak_warned = false;
    let mut step = 0usize;
    let last = loop {
        propagator.evolve(&mut field, 1);
        step += 1;
        let obs = measure(&hamiltonian, &ground, &field);
        if obs.leakage > LEAKAGE_WARNING && !leak_warned {
            warnings.push(format!(
                "boundary leakage {:.2e} exceeds {LEAKAGE_WARNING:.0e} at t = {:.3}",
                obs.leakage, obs.t
            ));
            leak_warned = true;
        }
        let done = obs.s_mean >= s_stop;
        if step.is_multiple_of(record_every) || done {
            observables.push(obs);
        }
        if done {
            break obs;
        }
        if step >= max_steps {
            return Err(Error::Timeout {
                t_cap: field.t,
                s_stop,
            });
        }
    };
    let fidelity = checked_fidelity(&last)?;
    Ok(ProtocolRun {
        hamiltonian,
        ground,
        dt,
        sdot0,
        observables,
        last,
        fidelity,
        field,
        warnings,
    })
}
