//! Tensor-product 4-point Gauss–Legendre quadrature per cell.
//!
//! This single rule backs the cell-average projection, the error norms and
//! the cell integrals of smooth test functions, so every quantity that
//! involves an integral of pointwise data is discretized consistently. The
//! rule is exact for polynomials up to degree 7 per axis.

use crate::mesh::{Mesh, MAX_DIM};

/// Nodes of the 4-point Gauss–Legendre rule mapped to `[0, 1]`.
pub const GAUSS4_NODES: [f64; 4] = [
    0.069_431_844_202_973_71,
    0.330_009_478_207_571_87,
    0.669_990_521_792_428_1,
    0.930_568_155_797_026_3,
];

/// Weights matching [`GAUSS4_NODES`]; they sum to 1.
pub const GAUSS4_WEIGHTS: [f64; 4] = [
    0.173_927_422_568_726_93,
    0.326_072_577_431_273_05,
    0.326_072_577_431_273_05,
    0.173_927_422_568_726_93,
];

/// Iterate the tensor-product rule over one cell: calls `visit(x, w)` for
/// each of the `4^d` nodes, with weights summing to 1 (the rule computes
/// cell averages, not integrals).
#[inline]
pub fn for_each_node(mesh: &Mesh, cell: usize, mut visit: impl FnMut(&[f64], f64)) {
    let dim = mesh.dim();
    let origin = mesh.cell_origin(cell);
    let h = mesh.h();
    let mut x = [0.0f64; MAX_DIM];
    match dim {
        1 => {
            for a in 0..4 {
                x[0] = origin[0] + GAUSS4_NODES[a] * h;
                visit(&x[..1], GAUSS4_WEIGHTS[a]);
            }
        }
        2 => {
            for a in 0..4 {
                x[0] = origin[0] + GAUSS4_NODES[a] * h;
                for b in 0..4 {
                    x[1] = origin[1] + GAUSS4_NODES[b] * h;
                    visit(&x[..2], GAUSS4_WEIGHTS[a] * GAUSS4_WEIGHTS[b]);
                }
            }
        }
        3 => {
            for a in 0..4 {
                x[0] = origin[0] + GAUSS4_NODES[a] * h;
                for b in 0..4 {
                    x[1] = origin[1] + GAUSS4_NODES[b] * h;
                    for c in 0..4 {
                        x[2] = origin[2] + GAUSS4_NODES[c] * h;
                        visit(&x[..3], GAUSS4_WEIGHTS[a] * GAUSS4_WEIGHTS[b] * GAUSS4_WEIGHTS[c]);
                    }
                }
            }
        }
        _ => unreachable!("mesh dimension is validated at construction"),
    }
}

/// Cell average of a pointwise function.
pub fn cell_average(mesh: &Mesh, cell: usize, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let mut acc = crate::math::Accumulator::new();
    for_each_node(mesh, cell, |x, w| acc.add(w * f(x)));
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_normalised() {
        let total: f64 = GAUSS4_WEIGHTS.iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn averages_a_cubic_exactly() {
        let mesh = Mesh::new(1, 2).unwrap();
        // ∫_0^(1/2) x^3 dx / (1/2) = (1/2)^3 / 4 = 1/32
        let avg = cell_average(&mesh, 0, |x| x[0] * x[0] * x[0]);
        assert_abs_diff_eq!(avg, 1.0 / 32.0, epsilon = 1e-15);
    }

    #[test]
    fn tensor_rule_in_three_dimensions() {
        let mesh = Mesh::new(3, 2).unwrap();
        // separable integrand: average of x*y*z over [0,1/2]^3 is (1/4)^3
        let avg = cell_average(&mesh, 0, |x| x[0] * x[1] * x[2]);
        assert_abs_diff_eq!(avg, 0.25f64.powi(3), epsilon = 1e-15);
    }
}
