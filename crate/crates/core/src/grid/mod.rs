//! Staggered (MAC) grid on a rectangle.
//!
//! Scalars live at cell centres; the `x` velocity component lives on
//! vertical faces and the `y` component on horizontal faces. Indexing is
//! row-major with `x` fastest:
//!
//! * cell `(i, j)`, `0 <= i < nx`, `0 <= j < ny`
//! * x-face `(i, j)`, `0 <= i <= nx`, `0 <= j < ny`, at `(x0 + i hx, y0 + (j + 1/2) hy)`
//! * y-face `(i, j)`, `0 <= i < nx`, `0 <= j <= ny`, at `(x0 + (i + 1/2) hx, y0 + j hy)`
//!
//! Boundary data for a scalar is a [`BoundaryTrace`]: one value per boundary
//! face. A Dirichlet trace is imposed through ghost cells by linear
//! reflection, `ghost = 2 b - interior`.

mod norms;
mod ops;
mod projection;
mod spectral;

pub use norms::{cell_norms, face_norms, velocity_gradient_norm, Norms};
pub use ops::{
    advect_scalar, advection_form, div, face_mean, face_values, grad, laplacian, sbp_check,
    skew_defect, AdvectionScheme,
};
pub use projection::{harmonic_extension, leray_project, Projector};
pub use spectral::{analytic_min_eigenvalue, poincare_constant, min_eigenvalue_inverse_iteration};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    lx: f64,
    ly: f64,
}

impl UniformGrid {
    pub fn new(nx: usize, ny: usize, origin: (f64, f64), extent: (f64, f64)) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4 cells per axis, got {nx} x {ny}"
            )));
        }
        if !(extent.0 > 0.0 && extent.1 > 0.0 && extent.0.is_finite() && extent.1.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "extents must be positive, got {:?}",
                extent
            )));
        }
        if !(origin.0.is_finite() && origin.1.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self {
            nx,
            ny,
            x0: origin.0,
            y0: origin.1,
            lx: extent.0,
            ly: extent.1,
        })
    }

    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(n, n, (0.0, 0.0), (1.0, 1.0))
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }
    pub fn origin(&self) -> (f64, f64) {
        (self.x0, self.y0)
    }
    pub fn extent(&self) -> (f64, f64) {
        (self.lx, self.ly)
    }
    /// Coarsest spacing.
    pub fn spacing(&self) -> f64 {
        self.hx().max(self.hy())
    }
    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }
    pub fn xface_count(&self) -> usize {
        (self.nx + 1) * self.ny
    }
    pub fn yface_count(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
    #[inline]
    pub fn xface(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }
    #[inline]
    pub fn yface(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.hx(),
            self.y0 + (j as f64 + 0.5) * self.hy(),
        )
    }
    pub fn xface_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + i as f64 * self.hx(),
            self.y0 + (j as f64 + 0.5) * self.hy(),
        )
    }
    pub fn yface_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.hx(),
            self.y0 + j as f64 * self.hy(),
        )
    }
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.hx(), self.y0 + j as f64 * self.hy())
    }

    /// Midpoint of boundary face `k` on `side`.
    pub fn boundary_point(&self, side: Side, k: usize) -> (f64, f64) {
        match side {
            Side::Left => self.xface_center(0, k),
            Side::Right => self.xface_center(self.nx, k),
            Side::Bottom => self.yface_center(k, 0),
            Side::Top => self.yface_center(k, self.ny),
        }
    }

    /// Cell-area weighted inner product of two cell arrays.
    pub fn cell_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.cell_area()
    }

    /// Quadrature weight of x-face `(i, _)`: half a cell on the boundary.
    #[inline]
    pub fn xface_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.nx {
            0.5 * self.cell_area()
        } else {
            self.cell_area()
        }
    }
    #[inline]
    pub fn yface_weight(&self, j: usize) -> f64 {
        if j == 0 || j == self.ny {
            0.5 * self.cell_area()
        } else {
            self.cell_area()
        }
    }

    /// Face inner product (dual-cell quadrature).
    pub fn face_dot(&self, a: &FaceField, b: &FaceField) -> f64 {
        let mut sx = 0.0;
        for j in 0..self.ny {
            for i in 0..=self.nx {
                let k = self.xface(i, j);
                sx += self.xface_weight(i) * a.x[k] * b.x[k];
            }
        }
        let mut sy = 0.0;
        for j in 0..=self.ny {
            for i in 0..self.nx {
                let k = self.yface(i, j);
                sy += self.yface_weight(j) * a.y[k] * b.y[k];
            }
        }
        sx + sy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];
}

/// One value per boundary face, grouped by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    left: Vec<f64>,
    right: Vec<f64>,
    bottom: Vec<f64>,
    top: Vec<f64>,
}

impl BoundaryTrace {
    pub fn from_parts(left: Vec<f64>, right: Vec<f64>, bottom: Vec<f64>, top: Vec<f64>) -> Self {
        Self {
            left,
            right,
            bottom,
            top,
        }
    }

    pub fn constant(grid: &UniformGrid, c: f64) -> Self {
        Self::from_parts(
            vec![c; grid.ny],
            vec![c; grid.ny],
            vec![c; grid.nx],
            vec![c; grid.nx],
        )
    }

    pub fn zeros(grid: &UniformGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Sample `f` at the boundary face midpoints.
    pub fn from_fn(grid: &UniformGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let sample = |side: Side, n: usize| -> Vec<f64> {
            (0..n)
                .map(|k| {
                    let (x, y) = grid.boundary_point(side, k);
                    f(x, y)
                })
                .collect()
        };
        Self::from_parts(
            sample(Side::Left, grid.ny),
            sample(Side::Right, grid.ny),
            sample(Side::Bottom, grid.nx),
            sample(Side::Top, grid.nx),
        )
    }

    pub fn side(&self, side: Side) -> &[f64] {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
            Side::Bottom => &self.bottom,
            Side::Top => &self.top,
        }
    }

    pub fn side_mut(&mut self, side: Side) -> &mut [f64] {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
            Side::Bottom => &mut self.bottom,
            Side::Top => &mut self.top,
        }
    }

    #[inline]
    pub fn get(&self, side: Side, k: usize) -> f64 {
        self.side(side)[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.left
            .iter()
            .chain(&self.right)
            .chain(&self.bottom)
            .chain(&self.top)
            .copied()
    }

    pub fn min(&self) -> f64 {
        self.iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let m = |v: &Vec<f64>| v.iter().map(|&x| f(x)).collect();
        Self::from_parts(m(&self.left), m(&self.right), m(&self.bottom), m(&self.top))
    }

    pub fn matches(&self, grid: &UniformGrid) -> bool {
        self.left.len() == grid.ny
            && self.right.len() == grid.ny
            && self.bottom.len() == grid.nx
            && self.top.len() == grid.nx
    }

    /// Error unless every value lies in `[0, 1]`.
    pub fn check_unit_range(&self) -> Result<()> {
        match self.iter().find(|v| !(0.0..=1.0).contains(v)) {
            Some(value) => Err(Error::BoundaryOutOfRange { value }),
            None => Ok(()),
        }
    }
}

/// What a cell field knows about itself outside the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Boundary {
    /// No data; ghosts mirror the interior (zero normal gradient).
    Free,
    /// Values on the boundary faces, imposed by linear reflection.
    Dirichlet(BoundaryTrace),
    /// Explicit values at the ghost cell centres.
    Ghost(BoundaryTrace),
}

/// Scalar at cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
    boundary: Boundary,
}

impl CellField {
    pub fn from_parts(nx: usize, ny: usize, values: Vec<f64>, boundary: Boundary) -> Self {
        assert_eq!(values.len(), nx * ny, "cell field size");
        Self {
            nx,
            ny,
            values,
            boundary,
        }
    }

    pub fn from_values(grid: &UniformGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::Shape(format!(
                "expected {} cell values, got {}",
                grid.cell_count(),
                values.len()
            )));
        }
        Ok(Self::from_parts(grid.nx, grid.ny, values, Boundary::Free))
    }

    pub fn zeros(grid: &UniformGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &UniformGrid, c: f64) -> Self {
        Self::from_parts(grid.nx, grid.ny, vec![c; grid.cell_count()], Boundary::Free)
    }

    pub fn from_fn(grid: &UniformGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.cell_count());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.cell_center(i, j);
                values.push(f(x, y));
            }
        }
        Self::from_parts(grid.nx, grid.ny, values, Boundary::Free)
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_dirichlet(self, trace: BoundaryTrace) -> Self {
        self.with_boundary(Boundary::Dirichlet(trace))
    }

    pub fn with_zero_dirichlet(self) -> Self {
        let trace = BoundaryTrace::from_parts(
            vec![0.0; self.ny],
            vec![0.0; self.ny],
            vec![0.0; self.nx],
            vec![0.0; self.nx],
        );
        self.with_dirichlet(trace)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn matches(&self, grid: &UniformGrid) -> bool {
        self.nx == grid.nx && self.ny == grid.ny
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    /// Interior cell adjacent to boundary face `k` of `side`.
    #[inline]
    pub fn boundary_cell(&self, side: Side, k: usize) -> (usize, usize) {
        match side {
            Side::Left => (0, k),
            Side::Right => (self.nx - 1, k),
            Side::Bottom => (k, 0),
            Side::Top => (k, self.ny - 1),
        }
    }

    /// Value at the ghost cell across boundary face `k` of `side`.
    #[inline]
    pub fn ghost(&self, side: Side, k: usize) -> f64 {
        let (i, j) = self.boundary_cell(side, k);
        let inner = self.at(i, j);
        match &self.boundary {
            Boundary::Free => inner,
            Boundary::Dirichlet(t) => 2.0 * t.get(side, k) - inner,
            Boundary::Ghost(t) => t.get(side, k),
        }
    }

    /// Value on boundary face `k` of `side`.
    #[inline]
    pub fn trace(&self, side: Side, k: usize) -> f64 {
        match &self.boundary {
            Boundary::Dirichlet(t) => t.get(side, k),
            _ => {
                let (i, j) = self.boundary_cell(side, k);
                0.5 * (self.at(i, j) + self.ghost(side, k))
            }
        }
    }

    /// Value at `(i, j)` where indices one step outside address ghosts.
    #[inline]
    pub fn at_or_ghost(&self, i: i64, j: i64) -> f64 {
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        if i < 0 {
            self.ghost(Side::Left, j as usize)
        } else if i >= nx {
            self.ghost(Side::Right, j as usize)
        } else if j < 0 {
            self.ghost(Side::Bottom, i as usize)
        } else if j >= ny {
            self.ghost(Side::Top, i as usize)
        } else {
            self.at(i as usize, j as usize)
        }
    }

    pub fn is_finite(&self) -> bool {
        let boundary_ok = match &self.boundary {
            Boundary::Free => true,
            Boundary::Dirichlet(t) | Boundary::Ghost(t) => t.iter().all(f64::is_finite),
        };
        boundary_ok && self.values.iter().all(|v| v.is_finite())
    }

    /// Apply `f` to the values and to any boundary data.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        out.map_in_place(f);
        out
    }

    pub fn map_in_place(&mut self, f: impl Fn(f64) -> f64) {
        self.values.iter_mut().for_each(|v| *v = f(*v));
        self.boundary = match &self.boundary {
            Boundary::Free => Boundary::Free,
            Boundary::Dirichlet(t) => Boundary::Dirichlet(t.map(&f)),
            Boundary::Ghost(t) => Boundary::Ghost(t.map(&f)),
        };
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `self - other` on values; keeps `self`'s boundary tag.
    pub fn sub(&self, other: &CellField) -> CellField {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Self::from_parts(self.nx, self.ny, values, self.boundary.clone())
    }
}

/// Vector field on the staggered faces.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    nx: usize,
    ny: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl FaceField {
    pub fn zeros(grid: &UniformGrid) -> Self {
        Self {
            nx: grid.nx,
            ny: grid.ny,
            x: vec![0.0; grid.xface_count()],
            y: vec![0.0; grid.yface_count()],
        }
    }

    pub fn from_vecs(nx: usize, ny: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != (nx + 1) * ny || y.len() != nx * (ny + 1) {
            return Err(Error::Shape(format!(
                "face field {nx} x {ny}: got {} x-faces and {} y-faces",
                x.len(),
                y.len()
            )));
        }
        Ok(Self { nx, ny, x, y })
    }

    /// Sample the components at their own face midpoints.
    pub fn from_fns(
        grid: &UniformGrid,
        fx: impl Fn(f64, f64) -> f64,
        fy: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let mut out = Self::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..=grid.nx {
                let (x, y) = grid.xface_center(i, j);
                out.x[grid.xface(i, j)] = fx(x, y);
            }
        }
        for j in 0..=grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.yface_center(i, j);
                out.y[grid.yface(i, j)] = fy(x, y);
            }
        }
        out
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }
    pub fn matches(&self, grid: &UniformGrid) -> bool {
        self.nx == grid.nx && self.ny == grid.ny
    }
    pub fn x(&self) -> &[f64] {
        &self.x
    }
    pub fn y(&self) -> &[f64] {
        &self.y
    }
    pub fn x_mut(&mut self) -> &mut [f64] {
        &mut self.x
    }
    pub fn y_mut(&mut self) -> &mut [f64] {
        &mut self.y
    }
    #[inline]
    pub fn at_x(&self, i: usize, j: usize) -> f64 {
        self.x[j * (self.nx + 1) + i]
    }
    #[inline]
    pub fn at_y(&self, i: usize, j: usize) -> f64 {
        self.y[j * self.nx + i]
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.x.iter().chain(&self.y).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Zero the components normal to the boundary.
    pub fn zero_normal_boundary(&mut self) {
        let (nx, ny) = (self.nx, self.ny);
        for j in 0..ny {
            self.x[j * (nx + 1)] = 0.0;
            self.x[j * (nx + 1) + nx] = 0.0;
        }
        for i in 0..nx {
            self.y[i] = 0.0;
            self.y[ny * nx + i] = 0.0;
        }
    }

    /// Largest boundary-normal component in magnitude.
    pub fn normal_trace_max(&self) -> f64 {
        let (nx, ny) = (self.nx, self.ny);
        let mut m: f64 = 0.0;
        for j in 0..ny {
            m = m.max(self.x[j * (nx + 1)].abs()).max(self.x[j * (nx + 1) + nx].abs());
        }
        for i in 0..nx {
            m = m.max(self.y[i].abs()).max(self.y[ny * nx + i].abs());
        }
        m
    }

    /// Componentwise product.
    pub fn mul(&self, other: &FaceField) -> FaceField {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &FaceField) -> FaceField {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &FaceField) -> FaceField {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> FaceField {
        self.map(|v| v * s)
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &FaceField, b: f64) -> FaceField {
        self.zip_with(other, |x, y| a * x + b * y)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> FaceField {
        FaceField {
            nx: self.nx,
            ny: self.ny,
            x: self.x.iter().map(|&v| f(v)).collect(),
            y: self.y.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &FaceField, f: impl Fn(f64, f64) -> f64) -> FaceField {
        assert_eq!(self.shape(), other.shape(), "face field shapes");
        FaceField {
            nx: self.nx,
            ny: self.ny,
            x: self.x.iter().zip(&other.x).map(|(&a, &b)| f(a, b)).collect(),
            y: self.y.iter().zip(&other.y).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Velocity interpolated to cell centres (face averages).
    pub fn to_cell_centers(&self) -> (Vec<f64>, Vec<f64>) {
        let (nx, ny) = (self.nx, self.ny);
        let mut u = Vec::with_capacity(nx * ny);
        let mut v = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                u.push(0.5 * (self.at_x(i, j) + self.at_x(i + 1, j)));
                v.push(0.5 * (self.at_y(i, j) + self.at_y(i, j + 1)));
            }
        }
        (u, v)
    }
}
