use num_complex::Complex64;

use super::grid::Grid2D;

type C = Complex64;

/// Discrete curved-guide Hamiltonian in natural units (ħ = m = ω = 1).
///
/// The stored field is the envelope φ of ψ = e^{iks}φ, where k is the
/// carrier wavenumber (0 disables the factorisation). The longitudinal
/// derivative acts through the link operator
///
/// ```text
/// (Dφ)_{i+½} = (φ_{i+1} − φ_i)/Δs + ik (φ_{i+1} + φ_i)/2
/// ```
///
/// so that H_s = (1/2h) D† (1/h) D − k²/2; subtracting the carrier energy
/// k²/2 only changes a global phase. At k = 0 both terms reduce to the
/// flux-form stencils
///
/// ```text
/// H_y ψ = −(1/2h_ij)[h_{i,j+½}(ψ_{i,j+1} − ψ_ij) − h_{i,j−½}(ψ_ij − ψ_{i,j−1})]/Δy² + y_j²ψ_ij/2
/// H_s ψ = −(1/2h_ij)[(ψ_{i+1,j} − ψ_ij)/h_{i+½,j} − (ψ_ij − ψ_{i−1,j})/h_{i−½,j}]/Δs²
/// ```
///
/// Multiplying a row of either operator by h gives a Hermitian
/// tridiagonal matrix K, so H is self-adjoint under ⟨f, g⟩_h =
/// ΣΣ f*g h ΔsΔy. The `*_line` methods return K along one grid line.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub grid: Grid2D,
    /// Carrier wavenumber k = mṡ₀/ħ.
    pub k: f64,
}

/// Hermitian tridiagonal matrix: `sub[n]` couples n to n−1, `sup[n]` n to
/// n+1 (the first `sub` and last `sup` are unused).
#[derive(Debug, Clone, PartialEq)]
pub struct LineMatrix {
    pub sub: Vec<C>,
    pub diag: Vec<f64>,
    pub sup: Vec<C>,
    /// h along the line.
    pub weight: Vec<f64>,
}

impl LineMatrix {
    fn with_len(n: usize) -> Self {
        Self {
            sub: vec![C::default(); n],
            diag: vec![0.0; n],
            sup: vec![C::default(); n],
            weight: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// out = K x
    pub fn apply(&self, x: &[C], out: &mut [C]) {
        let n = self.len();
        for m in 0..n {
            let mut acc = x[m] * self.diag[m];
            if m > 0 {
                acc += self.sub[m] * x[m - 1];
            }
            if m + 1 < n {
                acc += self.sup[m] * x[m + 1];
            }
            out[m] = acc;
        }
    }
}

impl Hamiltonian {
    pub fn new(grid: Grid2D, k: f64) -> Self {
        Self { grid, k }
    }

    /// Transverse part h·(H_y + V) on the interior of grid row `i`.
    pub fn transverse_line(&self, i: usize) -> LineMatrix {
        let g = &self.grid;
        let n = g.ny - 2;
        let c = 0.5 / (g.dy * g.dy);
        let half = &g.h_y_half[i * (g.ny - 1)..(i + 1) * (g.ny - 1)];
        let mut m = LineMatrix::with_len(n);
        for r in 0..n {
            let j = r + 1;
            let (below, above) = (half[j - 1], half[j]);
            let h = g.h[g.index(i, j)];
            m.weight[r] = h;
            m.diag[r] = c * (below + above) + 0.5 * g.y[j] * g.y[j] * h;
            m.sub[r] = C::new(-c * below, 0.0);
            m.sup[r] = C::new(-c * above, 0.0);
        }
        m
    }

    /// Longitudinal part h·H_s on the interior of grid column `j`.
    pub fn longitudinal_line(&self, j: usize) -> LineMatrix {
        let g = &self.grid;
        let n = g.ns - 2;
        let k = self.k;
        let inv = 1.0 / g.ds;
        let abs2 = inv * inv + 0.25 * k * k;
        // ½ (1/Δs + ik/2)², the coupling to the right neighbour per unit W
        let fwd = 0.5 * C::new(inv, 0.5 * k).powi(2);
        let mut m = LineMatrix::with_len(n);
        for r in 0..n {
            let i = r + 1;
            let w_left = 1.0 / g.h_s_half[(i - 1) * g.ny + j];
            let w_right = 1.0 / g.h_s_half[i * g.ny + j];
            let h = g.h[g.index(i, j)];
            m.weight[r] = h;
            m.diag[r] = 0.5 * abs2 * (w_left + w_right) - 0.5 * k * k * h;
            m.sup[r] = -fwd * w_right;
            m.sub[r] = -fwd.conj() * w_left;
        }
        m
    }

    /// H φ over the whole grid; zero on the Dirichlet edges.
    pub fn apply(&self, phi: &[C]) -> Vec<C> {
        let g = &self.grid;
        let (ns, ny) = (g.ns, g.ny);
        let mut out = vec![C::default(); ns * ny];
        let mut line = vec![C::default(); ny.max(ns)];
        let mut res = vec![C::default(); ny.max(ns)];
        for i in 1..ns - 1 {
            let m = self.transverse_line(i);
            line[..ny - 2].copy_from_slice(&phi[i * ny + 1..i * ny + ny - 1]);
            m.apply(&line[..ny - 2], &mut res[..ny - 2]);
            for r in 0..ny - 2 {
                out[i * ny + r + 1] += res[r] / m.weight[r];
            }
        }
        for j in 1..ny - 1 {
            let m = self.longitudinal_line(j);
            for r in 0..ns - 2 {
                line[r] = phi[(r + 1) * ny + j];
            }
            m.apply(&line[..ns - 2], &mut res[..ns - 2]);
            for r in 0..ns - 2 {
                out[(r + 1) * ny + j] += res[r] / m.weight[r];
            }
        }
        out
    }

    /// ⟨f, g⟩_h
    pub fn inner(&self, f: &[C], g: &[C]) -> C {
        let grid = &self.grid;
        let sum: C = f.iter().zip(g).zip(&grid.h).map(|((a, b), h)| a.conj() * b * *h).sum();
        sum * grid.ds * grid.dy
    }

    /// ⟨f, f⟩_h
    pub fn norm(&self, f: &[C]) -> f64 {
        let grid = &self.grid;
        let sum: f64 = f.iter().zip(&grid.h).map(|(a, h)| a.norm_sqr() * h).sum();
        sum * grid.ds * grid.dy
    }
}
