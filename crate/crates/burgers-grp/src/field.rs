//! Piecewise-constant cell states and their face algebra.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::mesh::{FaceId, Mesh};
use crate::quadrature;

/// One piecewise-constant state `u_h` at a fixed time: one value (a cell
/// average) per cell. Fields are immutable once constructed and contain only
/// finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    values: Vec<f64>,
    time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldError {
    /// A cell value (or a projected average) was NaN or infinite.
    NonFinite { cell: usize },
    /// Value vector length does not match the mesh cell count.
    WrongLength { got: usize, expected: usize },
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::NonFinite { cell } => write!(f, "non-finite value in cell {cell}"),
            FieldError::WrongLength { got, expected } => {
                write!(f, "expected {expected} cell values, got {got}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FieldError {}

/// Traces, jump and average of a field at one face, oriented by `+eᵢ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceValues {
    pub minus: f64,
    pub plus: f64,
    /// `⟦u⟧ = u⁺ − u⁻`
    pub jump: f64,
    /// `⟨u⟩ = (u⁻ + u⁺)/2`
    pub avg: f64,
}

impl Field {
    pub fn new(mesh: &Mesh, values: Vec<f64>, time: f64) -> Result<Self, FieldError> {
        if values.len() != mesh.cell_count() {
            return Err(FieldError::WrongLength {
                got: values.len(),
                expected: mesh.cell_count(),
            });
        }
        for (cell, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(FieldError::NonFinite { cell });
            }
        }
        Ok(Self { values, time })
    }

    pub fn constant(mesh: &Mesh, value: f64, time: f64) -> Self {
        Self {
            values: vec![value; mesh.cell_count()],
            time,
        }
    }

    /// Cell-average projection `Π_Q φ` of pointwise data, evaluated with the
    /// tensor-product Gauss rule of [`crate::quadrature`]. Exact for cellwise
    /// constants and for polynomials up to degree 7 per axis.
    pub fn project(
        mesh: &Mesh,
        time: f64,
        mut f: impl FnMut(&[f64]) -> f64,
    ) -> Result<Self, FieldError> {
        let mut values = Vec::with_capacity(mesh.cell_count());
        for cell in 0..mesh.cell_count() {
            let avg = quadrature::cell_average(mesh, cell, &mut f);
            if !avg.is_finite() {
                return Err(FieldError::NonFinite { cell });
            }
            values.push(avg);
        }
        Ok(Self { values, time })
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.time
    }

    pub(crate) fn from_raw(values: Vec<f64>, time: f64) -> Self {
        Self { values, time }
    }

    /// Traces, jump and average at a face; the reconstruction identity
    /// `u⁻ = ⟨u⟩ − ⟦u⟧/2`, `u⁺ = ⟨u⟩ + ⟦u⟧/2` holds by construction.
    #[inline]
    pub fn face_values(&self, mesh: &Mesh, face: FaceId) -> FaceValues {
        let minus = self.values[face.minus_cell];
        let plus = self.values[mesh.plus_cell(face)];
        FaceValues {
            minus,
            plus,
            jump: plus - minus,
            avg: 0.5 * (minus + plus),
        }
    }

    /// Conserved mass `Σ_K |K| u_K`, compensated summation in cell order.
    pub fn mass(&self, mesh: &Mesh) -> f64 {
        mesh.cell_volume() * math::sum(self.values.iter().copied())
    }

    /// Total entropy `∫ η(u_h) = Σ_K |K| u_K²/2`.
    pub fn total_entropy(&self, mesh: &Mesh) -> f64 {
        mesh.cell_volume() * math::sum(self.values.iter().map(|&u| crate::burgers::entropy(u)))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(math::abs(v)))
    }

    /// Evaluate the piecewise-constant interpolant at a point of the torus.
    pub fn eval(&self, mesh: &Mesh, x: &[f64]) -> f64 {
        let n = mesh.n();
        let mut coords = [0usize; crate::mesh::MAX_DIM];
        for axis in 0..mesh.dim() {
            let s = math::fract_unit(x[axis]);
            let mut c = (s * n as f64) as usize;
            if c >= n {
                c = n - 1;
            }
            coords[axis] = c;
        }
        self.values[mesh.cell_index(&coords[..mesh.dim()])]
    }

    pub(crate) fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn projection_of_constant_is_constant() {
        let mesh = Mesh::new(2, 4).unwrap();
        let field = Field::project(&mesh, 0.0, |_| 3.5).unwrap();
        for &v in field.values() {
            assert_abs_diff_eq!(v, 3.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn projection_of_linear_gives_center_value() {
        // φ(x) = x₁ on the first cell [0,h]^d has average h/2
        for dim in 1..=3 {
            let mesh = Mesh::new(dim, 2).unwrap();
            let field = Field::project(&mesh, 0.0, |x| x[0]).unwrap();
            assert_abs_diff_eq!(field.value(0), mesh.h() / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn projection_rejects_non_finite() {
        let mesh = Mesh::new(1, 2).unwrap();
        let err = Field::project(&mesh, 0.0, |x| 1.0 / (x[0] - x[0])).unwrap_err();
        assert!(matches!(err, FieldError::NonFinite { .. }));
    }

    #[test]
    fn projection_idempotent_on_piecewise_constants() {
        let mesh = Mesh::new(2, 4).unwrap();
        let base = Field::new(&mesh, (0..16).map(|i| i as f64 - 7.5).collect(), 0.0).unwrap();
        let again = Field::project(&mesh, 0.0, |x| base.eval(&mesh, x)).unwrap();
        for (a, b) in base.values().iter().zip(again.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn face_values_match_definitions() {
        let mesh = Mesh::new(1, 2).unwrap();
        let field = Field::new(&mesh, vec![0.0, 2.0], 0.0).unwrap();
        // interior face (cell0 | cell1)
        let fv = field.face_values(&mesh, FaceId { axis: 0, minus_cell: 0 });
        assert_eq!((fv.jump, fv.avg), (2.0, 1.0));
        // wrap face (cell1 | cell0): jump flips by periodic orientation
        let fv = field.face_values(&mesh, FaceId { axis: 0, minus_cell: 1 });
        assert_eq!((fv.minus, fv.plus), (2.0, 0.0));
        assert_eq!((fv.jump, fv.avg), (-2.0, 1.0));
    }

    #[test]
    fn oriented_jumps_telescope_around_the_torus() {
        let mesh = Mesh::new(1, 8).unwrap();
        let field = Field::new(
            &mesh,
            (0..8).map(|i| (i as f64 * 0.37).sin() * 2.0).collect(),
            0.0,
        )
        .unwrap();
        let total: f64 = mesh
            .faces()
            .map(|f| field.face_values(&mesh, f).jump)
            .sum();
        assert_abs_diff_eq!(total, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mass_uses_cell_volume() {
        let mesh = Mesh::new(2, 4).unwrap();
        let field = Field::constant(&mesh, 2.0, 0.0);
        assert_abs_diff_eq!(field.mass(&mesh), 2.0, epsilon = 1e-15);
    }
}
