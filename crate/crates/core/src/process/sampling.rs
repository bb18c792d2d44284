use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::geometry::{Cell, Point2D};
use crate::intensity::{lambda_max_over, Intensity};
use crate::rng::rng_from_seed;
use crate::scalar::Scalar;

/// A point with its thinning mark and an independent uniform tie-break.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkedPoint<T> {
    pub location: Point2D<T>,
    pub mark: T,
    pub tie_break: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Raw,
    Thinned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSample<T> {
    pub points: Vec<MarkedPoint<T>>,
    pub cell: Cell<T>,
    pub seed: u64,
    pub stage: Stage,
}

impl<T: Scalar> PointSample<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn locations(&self) -> Vec<Point2D<T>> {
        self.points.iter().map(|p| p.location).collect()
    }
}

/// Mark used by Matérn II: `1/λ(x)`, with `+∞` where the intensity vanishes.
pub fn intensity_mark<T: Scalar>(lambda: T) -> T {
    if lambda > T::zero() {
        T::one() / lambda
    } else {
        T::infinity()
    }
}

/// Draws an inhomogeneous Poisson sample on `cell` by thinning a homogeneous
/// process of rate `M̂ = lambda_max_over(cell)`.
///
/// Stream layout: one Poisson count, then per candidate three uniforms
/// (x₁, x₂, acceptance), then a tie-break uniform for every accepted point.
pub fn sample_inhomogeneous_ppp<T: Scalar, I: Intensity<T> + ?Sized>(
    field: &I,
    cell: &Cell<T>,
    seed: u64,
) -> PointSample<T> {
    let bound = lambda_max_over(field, cell);
    sample_with_bound(field, cell, bound, seed)
}

/// Same as [`sample_inhomogeneous_ppp`] with a caller-supplied dominating rate.
pub fn sample_with_bound<T: Scalar, I: Intensity<T> + ?Sized>(
    field: &I,
    cell: &Cell<T>,
    bound: T,
    seed: u64,
) -> PointSample<T> {
    let mut rng = rng_from_seed(seed);
    let mut points = Vec::new();
    let bound_f = bound.as_f64();
    let mean = bound_f * cell.area().as_f64();
    if mean > 0.0 && mean.is_finite() {
        let n = Poisson::new(mean).expect("positive finite mean").sample(&mut rng) as u64;
        let b = cell.bounds;
        let (w, h) = (b.width().as_f64(), b.height().as_f64());
        let (l, bot) = (b.x1_left.as_f64(), b.x2_bottom.as_f64());
        let mut accepted = Vec::new();
        for _ in 0..n {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            let ua: f64 = rng.random();
            let x = Point2D::new(T::lit(l + u1 * w), T::lit(bot + u2 * h));
            let lam = field.intensity(x);
            if ua * bound_f < lam.as_f64() {
                accepted.push((x, lam));
            }
        }
        points = accepted
            .into_iter()
            .map(|(location, lam)| MarkedPoint { location, mark: intensity_mark(lam), tie_break: rng.random() })
            .collect();
    }
    PointSample { points, cell: *cell, seed, stage: Stage::Raw }
}
