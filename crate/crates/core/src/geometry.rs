//! Planar geometry: points, rectangles, the gridded region and ball predicates.
//!
//! Cells are numbered left to right, then top to bottom. Cell `i` sits in row
//! `i / columns` (row 0 is the top strip) and column `i % columns`. Cells on the
//! right and bottom edges are clipped to the region.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2D<T> {
    pub x1: T,
    pub x2: T,
}

impl<T: Scalar> Point2D<T> {
    pub fn new(x1: T, x2: T) -> Self {
        Self { x1, x2 }
    }

    pub fn distance_sq(&self, other: &Self) -> T {
        let d1 = self.x1 - other.x1;
        let d2 = self.x2 - other.x2;
        d1 * d1 + d2 * d2
    }

    pub fn distance(&self, other: &Self) -> T {
        self.distance_sq(other).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

/// Closed Euclidean ball membership: `‖candidate − center‖ ≤ radius`.
pub fn ball_contains<T: Scalar>(center: Point2D<T>, radius: T, candidate: Point2D<T>) -> bool {
    center.distance_sq(&candidate) <= radius * radius
}

/// Axis-aligned rectangle `[x1_left, x1_right] × [x2_bottom, x2_top]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect<T> {
    pub x1_left: T,
    pub x1_right: T,
    pub x2_bottom: T,
    pub x2_top: T,
}

impl<T: Scalar> Rect<T> {
    pub fn new(x1_left: T, x1_right: T, x2_bottom: T, x2_top: T) -> Result<Self> {
        let finite = [x1_left, x1_right, x2_bottom, x2_top].iter().all(|v| v.is_finite());
        if !finite || !(x1_left < x1_right) || !(x2_bottom < x2_top) {
            return Err(Error::InvalidRegion(format!(
                "rectangle [{x1_left}, {x1_right}] x [{x2_bottom}, {x2_top}] is empty or not finite"
            )));
        }
        Ok(Self { x1_left, x1_right, x2_bottom, x2_top })
    }

    /// The unit square `[0, 1]²`.
    pub fn unit() -> Self {
        Self { x1_left: T::zero(), x1_right: T::one(), x2_bottom: T::zero(), x2_top: T::one() }
    }

    pub fn width(&self) -> T {
        self.x1_right - self.x1_left
    }

    pub fn height(&self) -> T {
        self.x2_top - self.x2_bottom
    }

    pub fn area(&self) -> T {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point2D<T> {
        let half = T::lit(0.5);
        Point2D::new((self.x1_left + self.x1_right) * half, (self.x2_bottom + self.x2_top) * half)
    }

    /// Closed containment.
    pub fn contains(&self, p: &Point2D<T>) -> bool {
        p.x1 >= self.x1_left && p.x1 <= self.x1_right && p.x2 >= self.x2_bottom && p.x2 <= self.x2_top
    }

    /// Nearest point of the rectangle.
    pub fn clamp(&self, p: &Point2D<T>) -> Point2D<T> {
        Point2D::new(p.x1.max(self.x1_left).min(self.x1_right), p.x2.max(self.x2_bottom).min(self.x2_top))
    }

    /// Distance on the torus obtained by identifying opposite edges.
    pub fn torus_distance_sq(&self, a: &Point2D<T>, b: &Point2D<T>) -> T {
        let wrap = |d: T, span: T| {
            let d = d.abs() % span;
            d.min(span - d)
        };
        let d1 = wrap(a.x1 - b.x1, self.width());
        let d2 = wrap(a.x2 - b.x2, self.height());
        d1 * d1 + d2 * d2
    }

    /// Maps a point back into the rectangle by periodic translation.
    pub fn wrap(&self, p: Point2D<T>) -> Point2D<T> {
        let wrap1 = |v: T, lo: T, span: T| {
            let mut t = (v - lo) % span;
            if t < T::zero() {
                t = t + span;
            }
            lo + t
        };
        Point2D::new(wrap1(p.x1, self.x1_left, self.width()), wrap1(p.x2, self.x2_bottom, self.height()))
    }
}

/// Rectangular study region split into cells of nominal size `cell_width × cell_height`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region<T> {
    pub bounds: Rect<T>,
    pub cell_width: T,
    pub cell_height: T,
}

/// One grid cell. `bounds` is already clipped to the parent region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell<T> {
    pub index: usize,
    pub row: usize,
    pub col: usize,
    pub bounds: Rect<T>,
}

impl<T: Scalar> Cell<T> {
    /// A free-standing cell, handy as an integration window.
    pub fn standalone(bounds: Rect<T>) -> Self {
        Self { index: 0, row: 0, col: 0, bounds }
    }

    pub fn contains(&self, p: &Point2D<T>) -> bool {
        self.bounds.contains(p)
    }

    pub fn area(&self) -> T {
        self.bounds.area()
    }
}

// ceil() that ignores representation noise such as 2.0000000000000004
fn ceil_tolerant<T: Scalar>(v: T) -> usize {
    let snapped = v.round();
    let c = if (v - snapped).abs() <= T::lit(1e-9) * v.abs().max(T::one()) { snapped } else { v.ceil() };
    c.to_usize().unwrap_or(0).max(1)
}

impl<T: Scalar> Region<T> {
    pub fn new(bounds: Rect<T>, cell_width: T, cell_height: T) -> Result<Self> {
        if !(cell_width > T::zero())
            || !(cell_height > T::zero())
            || !cell_width.is_finite()
            || !cell_height.is_finite()
        {
            return Err(Error::InvalidRegion(format!("cell size must be positive, got {cell_width} x {cell_height}")));
        }
        Ok(Self { bounds, cell_width, cell_height })
    }

    /// Number of grid columns `⌈(x1_right − x1_left)/cell_width⌉`.
    pub fn columns(&self) -> usize {
        ceil_tolerant(self.bounds.width() / self.cell_width)
    }

    /// Number of grid rows `⌈(x2_top − x2_bottom)/cell_height⌉`.
    pub fn rows(&self) -> usize {
        ceil_tolerant(self.bounds.height() / self.cell_height)
    }

    pub fn cell_count(&self) -> usize {
        self.rows() * self.columns()
    }

    pub fn index_of(&self, row: usize, col: usize) -> usize {
        row * self.columns() + col
    }

    pub fn row_col(&self, index: usize) -> (usize, usize) {
        let cols = self.columns();
        (index / cols, index % cols)
    }

    /// Cell `index`, or `None` past the end of the grid.
    pub fn cell(&self, index: usize) -> Option<Cell<T>> {
        if index >= self.cell_count() {
            return None;
        }
        let (row, col) = self.row_col(index);
        let b = &self.bounds;
        let x1_left = b.x1_left + self.cell_width * T::from_usize_lossy(col);
        // the last column/row always closes on the region edge
        let x1_right = if col + 1 == self.columns() {
            b.x1_right
        } else {
            b.x1_right.min(b.x1_left + self.cell_width * T::from_usize_lossy(col + 1))
        };
        let x2_bottom = if row + 1 == self.rows() {
            b.x2_bottom
        } else {
            b.x2_bottom.max(b.x2_top - self.cell_height * T::from_usize_lossy(row + 1))
        };
        let x2_top = b.x2_top - self.cell_height * T::from_usize_lossy(row);
        Some(Cell { index, row, col, bounds: Rect { x1_left, x1_right, x2_bottom, x2_top } })
    }

    /// Index of the cell owning `p`. Cells are closed on their left and top
    /// edges; the region's own right and bottom edges belong to the last cells.
    pub fn locate(&self, p: &Point2D<T>) -> Option<usize> {
        if !self.bounds.contains(p) {
            return None;
        }
        let col = ((p.x1 - self.bounds.x1_left) / self.cell_width).floor().to_usize()?;
        let row = ((self.bounds.x2_top - p.x2) / self.cell_height).floor().to_usize()?;
        let col = col.min(self.columns() - 1);
        let row = row.min(self.rows() - 1);
        Some(self.index_of(row, col))
    }
}

/// All cells of the region in index order.
pub fn grid_region<T: Scalar>(region: &Region<T>) -> Vec<Cell<T>> {
    (0..region.cell_count()).filter_map(|i| region.cell(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region(side: f64, step: f64) -> Region<f64> {
        Region::new(Rect::new(0.0, side, 0.0, side).unwrap(), step, step).unwrap()
    }

    // nested row/column enumeration, independent of Region::cell
    fn enumerate_cells(left: f64, right: f64, bottom: f64, top: f64, w: f64, h: f64) -> Vec<[f64; 4]> {
        let mut out = Vec::new();
        let mut y_top = top;
        while y_top > bottom + 1e-12 {
            let y_bot = (y_top - h).max(bottom);
            let mut x_left = left;
            while x_left < right - 1e-12 {
                let x_right = (x_left + w).min(right);
                out.push([x_left, x_right, y_bot, y_top]);
                x_left += w;
            }
            y_top -= h;
        }
        out
    }

    #[test]
    fn grid_matches_enumeration() {
        let r = region(10.0, 2.0);
        let cells = grid_region(&r);
        let oracle = enumerate_cells(0.0, 10.0, 0.0, 10.0, 2.0, 2.0);
        assert_eq!(cells.len(), 25);
        assert_eq!(oracle.len(), 25);
        for (c, o) in cells.iter().zip(&oracle) {
            let b = c.bounds;
            assert_eq!([b.x1_left, b.x1_right, b.x2_bottom, b.x2_top], *o);
        }
        let c0 = cells[0].bounds;
        assert_eq!((c0.x1_left, c0.x1_right, c0.x2_bottom, c0.x2_top), (0.0, 2.0, 8.0, 10.0));
        let c7 = cells[7];
        assert_eq!((c7.row, c7.col), (1, 2));
        assert_eq!(
            (c7.bounds.x1_left, c7.bounds.x1_right, c7.bounds.x2_bottom, c7.bounds.x2_top),
            (4.0, 6.0, 6.0, 8.0)
        );
    }

    #[test]
    fn boundary_cells_are_clipped() {
        let r = region(5.0, 2.0);
        assert_eq!(r.columns(), 3);
        let c2 = r.cell(2).unwrap();
        assert_eq!((c2.bounds.x1_left, c2.bounds.x1_right), (4.0, 5.0));
        let last = r.cell(8).unwrap();
        assert_eq!((last.bounds.x2_bottom, last.bounds.x2_top), (0.0, 1.0));
        assert!(r.cell(9).is_none());
        let oracle = enumerate_cells(0.0, 5.0, 0.0, 5.0, 2.0, 2.0);
        for (c, o) in grid_region(&r).iter().zip(&oracle) {
            let b = c.bounds;
            assert_eq!([b.x1_left, b.x1_right, b.x2_bottom, b.x2_top], *o);
        }
    }

    #[test]
    fn grid_ignores_float_noise_in_ratio() {
        let r = Region::new(Rect::new(0.0, 0.7, 0.0, 0.3).unwrap(), 0.1, 0.1).unwrap();
        assert_eq!((r.columns(), r.rows()), (7, 3));
    }

    #[test]
    fn ball_is_closed() {
        let o = Point2D::new(0.0, 0.0);
        assert!(ball_contains(o, 1.0, o));
        assert!(ball_contains(o, 1.0, Point2D::new(1.0, 0.0)));
        assert!(!ball_contains(o, 1.0, Point2D::new(1.0, 1.0)));
    }

    #[test]
    fn invalid_regions_rejected() {
        assert!(Rect::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(Rect::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(Rect::new(0.0, f64::NAN, 0.0, 1.0).is_err());
        assert!(Region::new(Rect::<f64>::unit(), 0.0, 1.0).is_err());
        assert!(Region::new(Rect::<f64>::unit(), 1.0, -1.0).is_err());
    }

    #[test]
    fn locate_edges() {
        let r = region(10.0, 2.0);
        assert_eq!(r.locate(&Point2D::new(0.0, 10.0)), Some(0));
        assert_eq!(r.locate(&Point2D::new(2.0, 10.0)), Some(1));
        assert_eq!(r.locate(&Point2D::new(10.0, 0.0)), Some(24));
        assert_eq!(r.locate(&Point2D::new(1.0, 8.0)), Some(5));
        assert_eq!(r.locate(&Point2D::new(11.0, 5.0)), None);
    }

    #[test]
    fn torus_helpers() {
        let w = Rect::<f64>::unit();
        let a = Point2D::new(0.05, 0.5);
        let b = Point2D::new(0.95, 0.5);
        assert!((w.torus_distance_sq(&a, &b) - 0.01).abs() < 1e-12);
        let p = w.wrap(Point2D::new(-0.25, 1.5));
        assert!((p.x1 - 0.75).abs() < 1e-12 && (p.x2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn works_in_f32() {
        let r = Region::new(Rect::new(0.0f32, 10.0, 0.0, 10.0).unwrap(), 2.0, 2.0).unwrap();
        assert_eq!(grid_region(&r).len(), 25);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn interior_point_has_exactly_one_owner(
                w in 0.3f64..4.0, h in 0.3f64..4.0,
                width in 1.0f64..12.0, height in 1.0f64..12.0,
                fx in 0.001f64..0.999, fy in 0.001f64..0.999,
            ) {
                let r = Region::new(Rect::new(-1.0, width - 1.0, 2.0, 2.0 + height).unwrap(), w, h).unwrap();
                let p = Point2D::new(-1.0 + fx * width, 2.0 + fy * height);
                let owners: Vec<usize> = grid_region(&r)
                    .iter()
                    .filter(|c| {
                        let b = c.bounds;
                        let in_x = p.x1 >= b.x1_left && (p.x1 < b.x1_right || b.x1_right == r.bounds.x1_right);
                        let in_y = p.x2 <= b.x2_top && (p.x2 > b.x2_bottom || b.x2_bottom == r.bounds.x2_bottom);
                        in_x && in_y
                    })
                    .map(|c| c.index)
                    .collect();
                prop_assert_eq!(owners.len(), 1);
                prop_assert_eq!(r.locate(&p), Some(owners[0]));
            }

            #[test]
            fn index_round_trip_and_clipping(w in 0.3f64..4.0, h in 0.3f64..4.0, side in 1.0f64..12.0) {
                let r = Region::new(Rect::new(0.0, side, 0.0, side * 0.7).unwrap(), w, h).unwrap();
                for c in grid_region(&r) {
                    prop_assert_eq!(r.index_of(c.row, c.col), c.index);
                    prop_assert_eq!(r.row_col(c.index), (c.row, c.col));
                    prop_assert!(c.bounds.x1_right <= r.bounds.x1_right);
                    prop_assert!(c.bounds.x2_bottom >= r.bounds.x2_bottom);
                    prop_assert!(c.bounds.width() <= w + 1e-12);
                    prop_assert!(c.bounds.height() <= h + 1e-12);
                }
            }
        }
    }
}
