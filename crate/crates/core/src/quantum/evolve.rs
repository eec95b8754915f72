use num_complex::Complex64;
use rayon::prelude::*;

use super::operator::{Hamiltonian, LineMatrix};
use super::WaveField;
use crate::error::{Error, Result};

type C = Complex64;

/// Smallest pivot magnitude, relative to the row scale, accepted by the
/// tridiagonal elimination.
const PIVOT_FLOOR: f64 = 1e-13;

/// LU factors of (W + iτK) for one grid line, with the matrix W − iτK
/// kept for the right-hand side. W = diag(h) is positive and K is
/// Hermitian, so the Hermitian part of the system matrix is positive
/// definite and elimination needs no pivoting.
#[derive(Debug, Clone)]
struct CayleyLine {
    /// K and W.
    matrix: LineMatrix,
    tau: f64,
    /// Sub-diagonal of W + iτK.
    lower: Vec<C>,
    /// Reciprocal pivots.
    inv_pivot: Vec<C>,
    /// Modified super-diagonal c'_n.
    upper: Vec<C>,
}

impl CayleyLine {
    fn new(matrix: LineMatrix, tau: f64, location: impl Fn(usize) -> String) -> Result<Self> {
        let n = matrix.len();
        let i_tau = C::new(0.0, tau);
        let mut lower = vec![C::default(); n];
        let mut inv_pivot = vec![C::default(); n];
        let mut upper = vec![C::default(); n];
        for r in 0..n {
            let diag = matrix.weight[r] + i_tau * matrix.diag[r];
            let sub = i_tau * matrix.sub[r];
            let pivot = if r == 0 { diag } else { diag - sub * upper[r - 1] };
            let scale = diag.norm();
            if !(pivot.norm() > PIVOT_FLOOR * scale) {
                return Err(Error::SolveBreakdown {
                    location: location(r),
                    pivot: pivot.norm(),
                });
            }
            lower[r] = sub;
            inv_pivot[r] = pivot.inv();
            upper[r] = i_tau * matrix.sup[r] * inv_pivot[r];
        }
        Ok(Self {
            matrix,
            tau,
            lower,
            inv_pivot,
            upper,
        })
    }

    /// x ← (W + iτK)⁻¹ (W − iτK) x, using `scratch` of the same length.
    fn apply(&self, x: &mut [C], scratch: &mut [C]) {
        let n = self.matrix.len();
        let m = &self.matrix;
        let i_tau = C::new(0.0, self.tau);
        // right-hand side
        for r in 0..n {
            let mut k = x[r] * m.diag[r];
            if r > 0 {
                k += m.sub[r] * x[r - 1];
            }
            if r + 1 < n {
                k += m.sup[r] * x[r + 1];
            }
            scratch[r] = x[r] * m.weight[r] - i_tau * k;
        }
        // forward elimination and back substitution
        for r in 0..n {
            let d = if r == 0 { scratch[0] } else { scratch[r] - self.lower[r] * scratch[r - 1] };
            scratch[r] = d * self.inv_pivot[r];
        }
        x[n - 1] = scratch[n - 1];
        for r in (0..n - 1).rev() {
            x[r] = scratch[r] - self.upper[r] * x[r + 1];
        }
    }
}

/// Time stepper for a fixed Hamiltonian and step.
///
/// One step is the symmetric composition
/// C_y(dt/2) · C_s(dt) · C_y(dt/2), where C_a(τ) = (1 + iτH_a/2)⁻¹(1 − iτH_a/2)
/// is the Cayley (Crank–Nicolson) propagator of the transverse part
/// H_y + V or of the longitudinal part H_s. Every factor is unitary under
/// the h-weighted inner product, so the norm is conserved up to rounding;
/// the composition is second order in dt.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub dt: f64,
    transverse: Vec<CayleyLine>,
    longitudinal: Vec<CayleyLine>,
    ns: usize,
    ny: usize,
}

impl Propagator {
    pub fn new(hamiltonian: &Hamiltonian, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt <= std::f64::consts::TAU / 100.0 * (1.0 + 1e-12)) {
            return Err(Error::Precondition(format!("time step must lie in (0, 2π/100], got {dt}")));
        }
        let g = &hamiltonian.grid;
        let (ns, ny) = (g.ns, g.ny);
        let transverse = (1..ns - 1)
            .into_par_iter()
            .map(|i| {
                let s = g.s[i];
                CayleyLine::new(hamiltonian.transverse_line(i), 0.25 * dt, |r| {
                    format!("transverse line s = {s:.4}, y = {:.4}", g.y[r + 1])
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let longitudinal = (1..ny - 1)
            .into_par_iter()
            .map(|j| {
                let y = g.y[j];
                CayleyLine::new(hamiltonian.longitudinal_line(j), 0.5 * dt, |r| {
                    format!("longitudinal line y = {y:.4}, s = {:.4}", g.s[r + 1])
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dt,
            transverse,
            longitudinal,
            ns,
            ny,
        })
    }

    fn transverse_half(&self, phi: &mut [C]) {
        let ny = self.ny;
        phi.par_chunks_mut(ny)
            .skip(1)
            .take(self.ns - 2)
            .zip(&self.transverse)
            .for_each_init(
                || vec![C::default(); ny],
                |scratch, (row, line)| line.apply(&mut row[1..ny - 1], scratch),
            );
    }

    fn longitudinal_full(&self, phi: &mut [C], columns: &mut Vec<C>) {
        let (ns, ny) = (self.ns, self.ny);
        columns.resize(ns * ny, C::default());
        transpose(phi, columns, ns, ny);
        columns
            .par_chunks_mut(ns)
            .skip(1)
            .take(ny - 2)
            .zip(&self.longitudinal)
            .for_each_init(
                || vec![C::default(); ns],
                |scratch, (col, line)| line.apply(&mut col[1..ns - 1], scratch),
            );
        transpose(columns, phi, ny, ns);
    }

    /// Advance by `n_steps` steps of `dt`.
    pub fn evolve(&self, field: &mut WaveField, n_steps: usize) {
        let mut columns = Vec::new();
        for _ in 0..n_steps {
            self.transverse_half(&mut field.phi);
            self.longitudinal_full(&mut field.phi, &mut columns);
            self.transverse_half(&mut field.phi);
            field.t += self.dt;
        }
    }
}

/// `dst[c * rows + r] = src[r * cols + c]` for a `rows × cols` array.
fn transpose(src: &[C], dst: &mut [C], rows: usize, cols: usize) {
    const BLOCK: usize = 32;
    dst.par_chunks_mut(rows * BLOCK.min(cols)).enumerate().for_each(|(b, chunk)| {
        let c0 = b * BLOCK;
        let n_cols = chunk.len() / rows;
        for r0 in (0..rows).step_by(BLOCK) {
            for c in c0..c0 + n_cols {
                for r in r0..(r0 + BLOCK).min(rows) {
                    chunk[(c - c0) * rows + r] = src[r * cols + c];
                }
            }
        }
    });
}

/// Advance `field` by `n_steps` steps of `dt` under `hamiltonian`.
pub fn evolve(hamiltonian: &Hamiltonian, field: &mut WaveField, dt: f64, n_steps: usize) -> Result<()> {
    Propagator::new(hamiltonian, dt)?.evolve(field, n_steps);
    Ok(())
}
