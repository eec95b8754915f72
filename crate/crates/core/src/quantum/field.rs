use num_complex::Complex64;

use super::operator::Hamiltonian;
use crate::error::{Error, Result};

type C = Complex64;

/// Wave function on the grid: the envelope φ of ψ = e^{iks}φ, row-major
/// like the grid tables, zero on the edges.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub phi: Vec<C>,
    pub t: f64,
}

/// Ground state of the straight-guide transverse operator on the grid's
/// y axis, normalised so that Σ χ₀² Δy = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TransverseGround {
    /// χ₀(y_j) for every node including the (zero) edges.
    pub chi: Vec<f64>,
    /// Discrete ground energy, ½ up to O(Δy²).
    pub energy: f64,
}

/// Inverse iteration on −½ d²/dy² + ½y² with Dirichlet edges.
pub fn transverse_ground(y: &[f64], dy: f64) -> TransverseGround {
    let n = y.len() - 2;
    let off = -0.5 / (dy * dy);
    let diag: Vec<f64> = y[1..y.len() - 1].iter().map(|&v| 1.0 / (dy * dy) + 0.5 * v * v).collect();
    // shift below the ground level so the iteration matrix stays definite
    let shift = 0.25;
    let mut v: Vec<f64> = y[1..y.len() - 1].iter().map(|&v| (-0.5 * v * v).exp()).collect();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for _ in 0..60 {
        // solve (A − shift) w = v
        for r in 0..n {
            let b = diag[r] - shift;
            let (cp, dp) = if r == 0 { (0.0, 0.0) } else { (c[r - 1], d[r - 1]) };
            let pivot = b - off * cp;
            c[r] = off / pivot;
            d[r] = (v[r] - off * dp) / pivot;
        }
        v[n - 1] = d[n - 1];
        for r in (0..n - 1).rev() {
            v[r] = d[r] - c[r] * v[r + 1];
        }
        let norm = (v.iter().map(|x| x * x).sum::<f64>() * dy).sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    }
    if v[n / 2] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let mut energy = 0.0;
    for r in 0..n {
        let mut av = diag[r] * v[r];
        if r > 0 {
            av += off * v[r - 1];
        }
        if r + 1 < n {
            av += off * v[r + 1];
        }
        energy += v[r] * av * dy;
    }
    let mut chi = vec![0.0];
    chi.extend(v);
    chi.push(0.0);
    TransverseGround { chi, energy }
}

/// Initial packet parameters in natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpec {
    /// Centre s₀.
    pub s0: f64,
    /// Longitudinal width in the convention of the transverse ground
    /// state, ψ ∝ exp(−(s − s₀)²/2σ_s²); |ψ|² has standard deviation σ_s/√2.
    pub sigma_s: f64,
    /// Mean longitudinal wavenumber mṡ₀/ħ.
    pub k0: f64,
}

/// ψ ∝ exp(−(s − s₀)²/2σ_s²) χ₀(y) e^{ik₀s}, normalised under ⟨·,·⟩_h.
///
/// The transverse factor is the discrete ground state, so the packet
/// starts with no transverse excitation on the grid. When the
/// Hamiltonian factors out a carrier k, the stored envelope carries
/// e^{i(k₀ − k)s}. The packet centre must lie in the entry straight and
/// its tails up to `margin`·σ_s must fit inside the grid.
pub fn init_wavepacket(
    hamiltonian: &Hamiltonian,
    ground: &TransverseGround,
    packet: PacketSpec,
    margin: f64,
) -> Result<WaveField> {
    let g = &hamiltonian.grid;
    let PacketSpec { s0, sigma_s, k0 } = packet;
    if !(sigma_s > 0.0) {
        return Err(Error::Precondition(format!("packet width must be > 0, got {sigma_s}")));
    }
    if s0 >= 0.0 {
        return Err(Error::Support(format!(
            "packet centre s0 = {s0:.3} must lie in the entry straight (s < 0)"
        )));
    }
    let (lo, hi) = (s0 - margin * sigma_s, s0 + margin * sigma_s);
    if lo < g.s_min() || hi > g.s_max() {
        return Err(Error::Support(format!(
            "packet tails [{lo:.3}, {hi:.3}] exceed the grid [{:.3}, {:.3}]",
            g.s_min(),
            g.s_max()
        )));
    }
    if 4.0 > g.y_max() {
        return Err(Error::Support(format!(
            "transverse grid half-width {:.3} is below 4 ground-state widths",
            g.y_max()
        )));
    }
    let dk = k0 - hamiltonian.k;
    let mut phi = vec![C::default(); g.len()];
    for i in 1..g.ns - 1 {
        let x = g.s[i] - s0;
        let envelope = C::from_polar((-x * x / (2.0 * sigma_s * sigma_s)).exp(), dk * g.s[i]);
        for j in 1..g.ny - 1 {
            phi[g.index(i, j)] = envelope * ground.chi[j];
        }
    }
    let norm = hamiltonian.norm(&phi).sqrt();
    phi.iter_mut().for_each(|v| *v /= norm);
    Ok(WaveField { phi, t: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_approaches_the_gaussian() {
        let n = 129;
        let dy = 16.0 / (n - 1) as f64;
        let y: Vec<f64> = (0..n).map(|j| -8.0 + dy * j as f64).collect();
        let g = transverse_ground(&y, dy);
        // leading discretisation error of the three-point stencil is −Δy²⟨p⁴⟩/24 = −Δy²/32
        let expected = 0.5 - dy * dy / 32.0;
        assert!((g.energy - expected).abs() < 0.05 * dy.powi(4), "E0 = {}", g.energy);
        let norm = std::f64::consts::PI.powf(-0.25);
        let err = g
            .chi
            .iter()
            .zip(&y)
            .map(|(c, v)| (c - norm * (-0.5 * v * v).exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.1 * dy * dy, "max deviation {err}");
    }
}
