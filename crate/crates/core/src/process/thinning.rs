//! Matérn I and II dependent thinnings.
//!
//! Both thinnings use closed balls: two points at distance exactly `r` are
//! neighbours. Removal is simultaneous, so survivors are pairwise `> r` apart.

use std::cmp::Ordering;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point2D, Rect};
use crate::intensity::Intensity;
use crate::rng::rng_from_seed;
use crate::scalar::Scalar;

use super::sampling::{intensity_mark, MarkedPoint, PointSample, Stage};

/// How distances behave at the edge of the sampling window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BorderMode {
    /// The window is all there is: balls are clipped at its boundary.
    #[default]
    Truncate,
    /// Opposite edges are identified (flat torus).
    Wrap,
}

fn check_radius<T: Scalar>(r: T) -> Result<()> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::InvalidRadius(r.as_f64()));
    }
    Ok(())
}

/// Uniform bucket grid over the window with bucket side `>= r`.
struct NeighbourIndex<'a, T> {
    locs: &'a [Point2D<T>],
    window: Rect<T>,
    border: BorderMode,
    r2: T,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a, T: Scalar> NeighbourIndex<'a, T> {
    fn new(locs: &'a [Point2D<T>], window: Rect<T>, r: T, border: BorderMode) -> Self {
        // bucket side never drops below r; bucket count stays O(points)
        let cap = ((4 * locs.len().max(1)) as f64).sqrt().ceil() as usize + 1;
        let side = |span: T| -> usize {
            let n = (span / r).floor().to_usize().unwrap_or(1);
            n.clamp(1, cap)
        };
        let (nx, ny) = (side(window.width()), side(window.height()));
        let mut buckets = vec![Vec::new(); nx * ny];
        for (i, p) in locs.iter().enumerate() {
            let (bx, by) = Self::bucket_of_raw(&window, nx, ny, p);
            buckets[by * nx + bx].push(i);
        }
        Self { locs, window, border, r2: r * r, nx, ny, buckets }
    }

    fn bucket_of_raw(window: &Rect<T>, nx: usize, ny: usize, p: &Point2D<T>) -> (usize, usize) {
        let f = |v: T, lo: T, span: T, n: usize| -> usize {
            let t = ((v - lo) / span * T::from_usize_lossy(n)).floor();
            t.to_isize().unwrap_or(0).clamp(0, n as isize - 1) as usize
        };
        (f(p.x1, window.x1_left, window.width(), nx), f(p.x2, window.x2_bottom, window.height(), ny))
    }

    fn close(&self, a: usize, b: usize) -> bool {
        let (p, q) = (&self.locs[a], &self.locs[b]);
        let d2 = match self.border {
            BorderMode::Truncate => p.distance_sq(q),
            BorderMode::Wrap => self.window.torus_distance_sq(p, q),
        };
        d2 <= self.r2
    }

    /// Calls `visit(j)` for every `j != i` within the closed `r`-ball of point `i`.
    /// Returning `false` from `visit` stops the scan.
    fn for_each_neighbour(&self, i: usize, mut visit: impl FnMut(usize) -> bool) {
        let (bx, by) = Self::bucket_of_raw(&self.window, self.nx, self.ny, &self.locs[i]);
        let range = |b: usize, n: usize| -> Vec<usize> {
            let wrap = self.border == BorderMode::Wrap;
            let mut v: Vec<usize> = if wrap && n >= 3 {
                vec![(b + n - 1) % n, b, (b + 1) % n]
            } else if wrap {
                (0..n).collect()
            } else {
                (b.saturating_sub(1)..=(b + 1).min(n - 1)).collect()
            };
            v.dedup();
            v
        };
        for yy in range(by, self.ny) {
            for &xx in &range(bx, self.nx) {
                for &j in &self.buckets[yy * self.nx + xx] {
                    if j != i && self.close(i, j) && !visit(j) {
                        return;
                    }
                }
            }
        }
    }
}

/// Matérn I: keeps exactly the points with no other point in their closed `r`-ball.
pub fn matern1_thin<T: Scalar>(sample: &PointSample<T>, r: T) -> Result<PointSample<T>> {
    matern1_thin_with(sample, r, BorderMode::Truncate)
}

pub fn matern1_thin_with<T: Scalar>(sample: &PointSample<T>, r: T, border: BorderMode) -> Result<PointSample<T>> {
    check_radius(r)?;
    let locs = sample.locations();
    let index = NeighbourIndex::new(&locs, sample.cell.bounds, r, border);
    let points = sample
        .points
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let mut alone = true;
            index.for_each_neighbour(*i, |_| {
                alone = false;
                false
            });
            alone
        })
        .map(|(_, p)| *p)
        .collect();
    Ok(PointSample { points, cell: sample.cell, seed: sample.seed, stage: Stage::Thinned })
}

/// Total order used by Matérn II: mark, then tie-break, then position in the sample.
pub fn mark_order<T: Scalar>(a: (&MarkedPoint<T>, usize), b: (&MarkedPoint<T>, usize)) -> Ordering {
    a.0.mark
        .partial_cmp(&b.0.mark)
        .unwrap_or(Ordering::Equal)
        .then(a.0.tie_break.total_cmp(&b.0.tie_break))
        .then(a.1.cmp(&b.1))
}

/// Sets `mark = 1/λ(x)` on every point and draws fresh tie-break uniforms from `seed`.
pub fn assign_intensity_marks<T: Scalar, I: Intensity<T> + ?Sized>(
    sample: &PointSample<T>,
    field: &I,
    seed: u64,
) -> PointSample<T> {
    let mut rng = rng_from_seed(seed);
    let points = sample
        .points
        .iter()
        .map(|p| MarkedPoint {
            location: p.location,
            mark: intensity_mark(field.intensity(p.location)),
            tie_break: rng.random(),
        })
        .collect();
    PointSample { points, cell: sample.cell, seed: sample.seed, stage: sample.stage }
}

/// Matérn II on already-marked points: a point survives iff it is the
/// minimum under [`mark_order`] within its closed `r`-ball.
pub fn thin_by_marks<T: Scalar>(sample: &PointSample<T>, r: T, border: BorderMode) -> Result<PointSample<T>> {
    check_radius(r)?;
    let locs = sample.locations();
    let index = NeighbourIndex::new(&locs, sample.cell.bounds, r, border);
    let pts = &sample.points;
    let points = pts
        .iter()
        .enumerate()
        .filter(|&(i, p)| {
            let mut smallest = true;
            index.for_each_neighbour(i, |j| {
                if mark_order((&pts[j], j), (p, i)) == Ordering::Less {
                    smallest = false;
                }
                smallest
            });
            smallest
        })
        .map(|(_, p)| *p)
        .collect();
    Ok(PointSample { points, cell: sample.cell, seed: sample.seed, stage: Stage::Thinned })
}

/// Matérn II with intensity marks `1/λ(x)`: within every closed `r`-ball only
/// the highest-intensity point survives.
pub fn matern2_thin<T: Scalar, I: Intensity<T> + ?Sized>(
    sample: &PointSample<T>,
    r: T,
    field: &I,
    seed: u64,
) -> Result<PointSample<T>> {
    matern2_thin_with(sample, r, field, seed, BorderMode::Truncate)
}

pub fn matern2_thin_with<T: Scalar, I: Intensity<T> + ?Sized>(
    sample: &PointSample<T>,
    r: T,
    field: &I,
    seed: u64,
    border: BorderMode,
) -> Result<PointSample<T>> {
    let marked = assign_intensity_marks(sample, field, seed);
    thin_by_marks(&marked, r, border)
}
