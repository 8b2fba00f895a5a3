//! Dimension-by-dimension minmod gradients and the piecewise-linear
//! reconstruction whose face traces feed the Riemann solver.
//!
//! For a cell `K` and direction `i` the two interfacial slopes are
//! `⟦u⟧_σ / h` over the faces `σ ∈ Eᵢ(K)`. The limited gradient takes the
//! smaller slope when both are strictly positive, the larger when both are
//! strictly negative, and zero otherwise. Sign tests are exact comparisons:
//! the downstream case logic is combinatorial and an epsilon would silently
//! change cases.
//!
//! The reconstruction `R_V u(x) = u_K + (x − x_K)·∇u_K` has face traces
//! `(R_V u)⁻ = u_K + (h/2) ∇⁽ⁱ⁾u_K` and `(R_V u)⁺ = u_L − (h/2) ∇⁽ⁱ⁾u_L`,
//! which satisfy
//!
//! * `⟦R_V u⟧ = ⟦u⟧ − h ⟨∇⁽ⁱ⁾u⟩`
//! * `⟨R_V u⟩ = ⟨u⟩ − (h/4) ⟦∇⁽ⁱ⁾u⟧`
//!
//! The face factors `λ = ⟦R_V u⟧/⟦u⟧` and `μ = ⟨u⟩/⟨R_V u⟩` record how much
//! the limiter clipped. `μ` can be `+∞` (when `⟨R_V u⟩ = 0 ≠ ⟨u⟩`); it is
//! stored as a tagged value and consumers only ever use the product
//! `2(μ−1)⟨R_V u⟩`, which equals `(h/2)⟦∇⁽ⁱ⁾u⟧` in every case.

use alloc::vec;
use alloc::vec::Vec;

use crate::field::Field;
use crate::mesh::{FaceId, Mesh, MAX_DIM};

/// Scalar minmod: smaller-magnitude slope under strict sign agreement,
/// zero otherwise.
#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.min(b)
    } else if a < 0.0 && b < 0.0 {
        a.max(b)
    } else {
        0.0
    }
}

/// Limited cell gradients, one `d`-vector per cell, plus the mesh width used
/// to form them.
#[derive(Clone, Debug)]
pub struct GradientField {
    dim: usize,
    grads: Vec<f64>,
}

impl GradientField {
    /// Gradient component `(∇⁽ᵃˣⁱˢ⁾u)_cell` (units: value per length).
    #[inline]
    pub fn component(&self, cell: usize, axis: usize) -> f64 {
        self.grads[cell * self.dim + axis]
    }

    /// All components for one cell.
    #[inline]
    pub fn at(&self, cell: usize) -> &[f64] {
        &self.grads[cell * self.dim..(cell + 1) * self.dim]
    }

    /// Discrete divergence of `u·𝟙` in a cell: `Σ_j (∇⁽ʲ⁾u)_cell`.
    #[inline]
    pub fn divergence(&self, cell: usize) -> f64 {
        self.at(cell).iter().sum()
    }
}

/// Minmod gradients of a field, dimension by dimension.
pub fn minmod_gradients(mesh: &Mesh, field: &Field) -> GradientField {
    let dim = mesh.dim();
    let h = mesh.h();
    let mut grads = vec![0.0; mesh.cell_count() * dim];
    for cell in 0..mesh.cell_count() {
        let u = field.value(cell);
        for axis in 0..dim {
            let lower = field.value(mesh.neighbor(cell, axis, -1));
            let upper = field.value(mesh.neighbor(cell, axis, 1));
            let slope_minus = (u - lower) / h;
            let slope_plus = (upper - u) / h;
            grads[cell * dim + axis] = minmod(slope_minus, slope_plus);
        }
    }
    GradientField { dim, grads }
}

/// The face factor `μ`, kept as a tagged value because the third branch of
/// its definition is `+∞`. It is never used arithmetically; audits print it
/// and consumers use [`FaceReconstruction::mu_product`] instead.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mu {
    Finite(f64),
    Infinite,
}

impl Mu {
    pub fn as_f64(&self) -> f64 {
        match self {
            Mu::Finite(v) => *v,
            Mu::Infinite => f64::INFINITY,
        }
    }
}

/// Everything the flux kernel needs to know about one face: raw and
/// reconstructed traces, jumps and averages, the face factors, and the
/// directional slopes and divergences of the two adjacent cells.
#[derive(Clone, Debug)]
pub struct FaceReconstruction {
    pub face: FaceId,
    /// Cell values `u_K`, `u_L`.
    pub u_minus: f64,
    pub u_plus: f64,
    /// `⟦u⟧`, `⟨u⟩` of the raw field.
    pub jump_u: f64,
    pub avg_u: f64,
    /// Traces `(R_V u)⁻`, `(R_V u)⁺`.
    pub trace_minus: f64,
    pub trace_plus: f64,
    /// `⟦R_V u⟧`, `⟨R_V u⟩`.
    pub jump_rv: f64,
    pub avg_rv: f64,
    /// `λ ∈ [0,1]`.
    pub lambda: f64,
    pub mu: Mu,
    /// Directional slopes of the minus/plus cells (entries beyond `dim` are
    /// zero).
    pub grad_minus: [f64; MAX_DIM],
    pub grad_plus: [f64; MAX_DIM],
    /// `(div_h (u·𝟙))` evaluated in the minus/plus cell.
    pub div_minus: f64,
    pub div_plus: f64,
    /// Mesh width, carried so product forms can be evaluated in place.
    pub h: f64,
}

impl FaceReconstruction {
    /// `(1−λ)⟦u⟧`, which equals `h⟨∇⁽ⁱ⁾u⟧⟩` exactly.
    #[inline]
    pub fn lambda_product(&self) -> f64 {
        let i = self.face.axis;
        0.5 * self.h * (self.grad_minus[i] + self.grad_plus[i])
    }

    /// `2(μ−1)⟨R_V u⟩`, which equals `(h/2)⟦∇⁽ⁱ⁾u⟧` exactly, including the
    /// `μ = +∞` case (where it reads `2⟨u⟩`).
    #[inline]
    pub fn mu_product(&self) -> f64 {
        let i = self.face.axis;
        0.5 * self.h * (self.grad_plus[i] - self.grad_minus[i])
    }

    /// Larger cell magnitude `max(|u_K|, |u_L|)`, the scale appearing in the
    /// dissipation bounds.
    #[inline]
    pub fn max_cell_abs(&self) -> f64 {
        crate::math::abs(self.u_minus).max(crate::math::abs(self.u_plus))
    }
}

/// Assemble the full per-face reconstruction bundle.
pub fn reconstruct_face(
    mesh: &Mesh,
    field: &Field,
    grads: &GradientField,
    face: FaceId,
) -> FaceReconstruction {
    let i = face.axis;
    let h = mesh.h();
    let minus_cell = face.minus_cell;
    let plus_cell = mesh.plus_cell(face);

    let u_minus = field.value(minus_cell);
    let u_plus = field.value(plus_cell);
    let jump_u = u_plus - u_minus;
    let avg_u = 0.5 * (u_minus + u_plus);

    let mut grad_minus = [0.0; MAX_DIM];
    let mut grad_plus = [0.0; MAX_DIM];
    grad_minus[..mesh.dim()].copy_from_slice(grads.at(minus_cell));
    grad_plus[..mesh.dim()].copy_from_slice(grads.at(plus_cell));

    let trace_minus = u_minus + 0.5 * h * grad_minus[i];
    let trace_plus = u_plus - 0.5 * h * grad_plus[i];
    let jump_rv = trace_plus - trace_minus;
    let avg_rv = 0.5 * (trace_minus + trace_plus);

    let lambda = if jump_u != 0.0 { jump_rv / jump_u } else { 1.0 };
    let mu = if avg_rv != 0.0 {
        Mu::Finite(avg_u / avg_rv)
    } else if avg_u == 0.0 {
        Mu::Finite(1.0)
    } else {
        Mu::Infinite
    };

    FaceReconstruction {
        face,
        u_minus,
        u_plus,
        jump_u,
        avg_u,
        trace_minus,
        trace_plus,
        jump_rv,
        avg_rv,
        lambda,
        mu,
        grad_minus,
        grad_plus,
        div_minus: grads.divergence(minus_cell),
        div_plus: grads.divergence(plus_cell),
        h,
    }
}
