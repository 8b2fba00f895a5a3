//! Periodic uniform Cartesian meshes of the unit torus `[0,1)^d`.
//!
//! Cells are axis-aligned cubes of side `h = 1/n`, indexed row-major over
//! their axis tuples (last axis fastest). A face is identified by its
//! direction `i` and the cell on its negative side; the positive side is the
//! periodic neighbor in direction `+eᵢ`. With this convention every face is
//! enumerated exactly once and the face count per direction equals the cell
//! count.
//!
//! Orientation at a face is fixed by `+eᵢ`: the "−" trace belongs to the
//! minus cell, the "+" trace to the plus cell, and the jump of a quantity is
//! `plus − minus`.

use alloc::vec::Vec;
use core::fmt;

pub const MAX_DIM: usize = 3;

/// Identifies one face: normal direction `axis` and the cell on the `−eᵢ`
/// side. The cell on the `+eᵢ` side is `mesh.plus_cell(face)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FaceId {
    pub axis: usize,
    pub minus_cell: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshError {
    /// Supported dimensions are 1, 2 and 3.
    BadDimension(usize),
    /// At least two cells per axis are required so each face joins two
    /// distinct cells.
    TooFewCells(usize),
}

impl fmt::Display for MeshError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshError::BadDimension(d) => write!(f, "unsupported dimension {d} (expected 1-3)"),
            MeshError::TooFewCells(n) => write!(f, "need at least 2 cells per axis, got {n}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MeshError {}

/// Periodic uniform Cartesian mesh descriptor.
#[derive(Clone, Debug)]
pub struct Mesh {
    dim: usize,
    n: usize,
    h: f64,
    cell_count: usize,
    /// strides[axis] = number of linear indices between neighbors along axis
    strides: [usize; MAX_DIM],
}

impl Mesh {
    pub fn new(dim: usize, n: usize) -> Result<Self, MeshError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(MeshError::BadDimension(dim));
        }
        if n < 2 {
            return Err(MeshError::TooFewCells(n));
        }
        let cell_count = n.pow(dim as u32);
        let mut strides = [0usize; MAX_DIM];
        let mut s = 1;
        for axis in (0..dim).rev() {
            strides[axis] = s;
            s *= n;
        }
        Ok(Self {
            dim,
            n,
            h: 1.0 / n as f64,
            cell_count,
            strides,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Mesh width `h = 1/n`.
    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    /// Faces per direction equal the cell count; total is `d · n^d`.
    #[inline]
    pub fn face_count(&self) -> usize {
        self.dim * self.cell_count
    }

    /// Cell measure `|K| = h^d`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        let mut v = 1.0;
        for _ in 0..self.dim {
            v *= self.h;
        }
        v
    }

    /// Face measure `|σ| = h^{d−1}`.
    #[inline]
    pub fn face_area(&self) -> f64 {
        let mut a = 1.0;
        for _ in 1..self.dim {
            a *= self.h;
        }
        a
    }

    /// Axis tuple of a cell (entries beyond `dim` are zero).
    #[inline]
    pub fn cell_coords(&self, cell: usize) -> [usize; MAX_DIM] {
        debug_assert!(cell < self.cell_count);
        let mut coords = [0usize; MAX_DIM];
        for axis in 0..self.dim {
            coords[axis] = (cell / self.strides[axis]) % self.n;
        }
        coords
    }

    #[inline]
    pub fn cell_index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dim);
        let mut idx = 0;
        for (axis, &c) in coords.iter().enumerate() {
            debug_assert!(c < self.n);
            idx += c * self.strides[axis];
        }
        idx
    }

    /// Periodic neighbor of `cell` at `offset` steps along `axis`.
    #[inline]
    pub fn neighbor(&self, cell: usize, axis: usize, offset: i64) -> usize {
        debug_assert!(axis < self.dim);
        let stride = self.strides[axis];
        let c = (cell / stride) % self.n;
        let wrapped = (c as i64 + offset).rem_euclid(self.n as i64) as usize;
        cell - c * stride + wrapped * stride
    }

    /// Center of a cell (entries beyond `dim` are zero).
    #[inline]
    pub fn cell_center(&self, cell: usize) -> [f64; MAX_DIM] {
        let coords = self.cell_coords(cell);
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            x[axis] = (coords[axis] as f64 + 0.5) * self.h;
        }
        x
    }

    /// Lower corner of a cell.
    #[inline]
    pub fn cell_origin(&self, cell: usize) -> [f64; MAX_DIM] {
        let coords = self.cell_coords(cell);
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            x[axis] = coords[axis] as f64 * self.h;
        }
        x
    }

    /// Cell on the `+eᵢ` side of a face.
    #[inline]
    pub fn plus_cell(&self, face: FaceId) -> usize {
        self.neighbor(face.minus_cell, face.axis, 1)
    }

    /// Center of a face.
    pub fn face_center(&self, face: FaceId) -> [f64; MAX_DIM] {
        let mut x = self.cell_center(face.minus_cell);
        let coords = self.cell_coords(face.minus_cell);
        x[face.axis] = ((coords[face.axis] + 1) % self.n) as f64 * self.h;
        if coords[face.axis] + 1 == self.n {
            // wrap face sits at the seam, report it at 1.0 rather than 0.0
            x[face.axis] = 1.0;
        }
        x
    }

    /// Linear index of a face in `0..face_count()`, grouped by direction.
    #[inline]
    pub fn face_index(&self, face: FaceId) -> usize {
        face.axis * self.cell_count + face.minus_cell
    }

    #[inline]
    pub fn face_from_index(&self, index: usize) -> FaceId {
        FaceId {
            axis: index / self.cell_count,
            minus_cell: index % self.cell_count,
        }
    }

    /// All faces, grouped by direction, minus-cell order within a direction.
    pub fn faces(&self) -> impl Iterator<Item = FaceId> + '_ {
        (0..self.dim).flat_map(move |axis| {
            (0..self.cell_count).map(move |minus_cell| FaceId { axis, minus_cell })
        })
    }

    /// The two faces of `cell` in direction `axis`, as (minus-side face,
    /// plus-side face) relative to the cell.
    #[inline]
    pub fn cell_faces(&self, cell: usize, axis: usize) -> (FaceId, FaceId) {
        (
            FaceId {
                axis,
                minus_cell: self.neighbor(cell, axis, -1),
            },
            FaceId {
                axis,
                minus_cell: cell,
            },
        )
    }

    /// Evaluate a function of position at every cell center.
    pub fn map_cell_centers(&self, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
        (0..self.cell_count)
            .map(|c| {
                let x = self.cell_center(c);
                f(&x[..self.dim])
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert_eq!(Mesh::new(0, 8).unwrap_err(), MeshError::BadDimension(0));
        assert_eq!(Mesh::new(4, 8).unwrap_err(), MeshError::BadDimension(4));
        assert_eq!(Mesh::new(2, 1).unwrap_err(), MeshError::TooFewCells(1));
    }

    #[test]
    fn counts_and_measures() {
        let mesh = Mesh::new(2, 4).unwrap();
        assert_eq!(mesh.cell_count(), 16);
        assert_eq!(mesh.face_count(), 32);
        assert_eq!(mesh.cell_volume(), 1.0 / 16.0);
        assert_eq!(mesh.face_area(), 0.25);
        // every direction has exactly n^d faces
        let per_dir = mesh.faces().filter(|f| f.axis == 1).count();
        assert_eq!(per_dir, 16);
    }

    #[test]
    fn neighbor_wraps_periodically() {
        let mesh = Mesh::new(2, 4).unwrap();
        let c = mesh.cell_index(&[3, 1]);
        assert_eq!(mesh.cell_coords(mesh.neighbor(c, 0, 1))[..2], [0, 1]);
        assert_eq!(mesh.cell_coords(mesh.neighbor(c, 0, -1))[..2], [2, 1]);
        assert_eq!(mesh.cell_coords(mesh.neighbor(c, 1, 3))[..2], [3, 0]);
        let back = mesh.neighbor(mesh.neighbor(c, 1, -1), 1, 1);
        assert_eq!(back, c);
    }

    #[test]
    fn face_round_trip_and_sides() {
        let mesh = Mesh::new(3, 2).unwrap();
        for face in mesh.faces() {
            assert_eq!(mesh.face_from_index(mesh.face_index(face)), face);
            let plus = mesh.plus_cell(face);
            assert_ne!(plus, face.minus_cell);
            // the face is the minus-side cell's plus face
            let (_, f_plus) = mesh.cell_faces(face.minus_cell, face.axis);
            assert_eq!(f_plus, face);
            // and the plus-side cell's minus face
            let (f_minus, _) = mesh.cell_faces(plus, face.axis);
            assert_eq!(f_minus, face);
        }
    }

    #[test]
    fn cell_centers_offset_by_half() {
        let mesh = Mesh::new(1, 4).unwrap();
        let x = mesh.cell_center(0);
        assert_eq!(x[0], 0.125);
        let x = mesh.cell_center(3);
        assert_eq!(x[0], 0.875);
    }
}
