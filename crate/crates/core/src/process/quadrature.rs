//! Expected point counts of the inhomogeneous Matérn processes.
//!
//! Both counts have the form `∫_C exp(−Φ(x)) λ(x) dx` where `Φ(x)` is the
//! mass of intensity inside `B(x, r)` that can eliminate a point at `x`:
//! all of it for Matérn I, only the part where `λ(u) > λ(x)` for Matérn II.
//!
//! The outer integral is a midpoint rule on an `outer × outer` grid over the
//! window. `Φ` is integrated in polar coordinates around `x`: `angular`
//! equally spaced rays, each split into `radial` midpoint panels with the
//! `ρ` Jacobian. In truncate mode each ray stops where it leaves the window,
//! so the clipped ball is integrated without a discontinuity. For Matérn II
//! a panel where the indicator flips is split at the crossing, located by
//! bisection.

use rayon::prelude::*;

use crate::geometry::{Point2D, Rect};
use crate::intensity::Intensity;
use crate::scalar::Scalar;

use super::thinning::BorderMode;
use super::ProcessKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureOptions {
    pub outer: usize,
    pub radial: usize,
    pub angular: usize,
    pub border: BorderMode,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { outer: 128, radial: 32, angular: 32, border: BorderMode::Truncate }
    }
}

impl QuadratureOptions {
    pub fn with_border(mut self, border: BorderMode) -> Self {
        self.border = border;
        self
    }
}

const CROSSING_BISECTIONS: usize = 24;

fn ray_exit<T: Scalar>(window: &Rect<T>, x: &Point2D<T>, c: T, s: T) -> T {
    let axis = |pos: T, d: T, lo: T, hi: T| {
        if d > T::zero() {
            (hi - pos) / d
        } else if d < T::zero() {
            (lo - pos) / d
        } else {
            T::infinity()
        }
    };
    axis(x.x1, c, window.x1_left, window.x1_right).min(axis(x.x2, s, window.x2_bottom, window.x2_top)).max(T::zero())
}

/// `Φ(x)`; `threshold = Some(λ(x))` restricts the integrand to `λ(u) > λ(x)`.
fn eliminating_mass<T: Scalar, I: Intensity<T> + ?Sized>(
    field: &I,
    window: &Rect<T>,
    x: Point2D<T>,
    r: T,
    threshold: Option<T>,
    opts: &QuadratureOptions,
) -> T {
    let n_theta = opts.angular.max(1);
    let n_rho = opts.radial.max(1);
    let dtheta = T::TAU() / T::from_usize_lossy(n_theta);
    let half = T::lit(0.5);
    let mut total = T::zero();
    for a in 0..n_theta {
        let theta = dtheta * (T::from_usize_lossy(a) + half);
        let (s, c) = theta.sin_cos();
        let reach = match opts.border {
            BorderMode::Truncate => r.min(ray_exit(window, &x, c, s)),
            BorderMode::Wrap => r,
        };
        if reach <= T::zero() {
            continue;
        }
        let at = |rho: T| -> T {
            let u = Point2D::new(x.x1 + rho * c, x.x2 + rho * s);
            let u = match opts.border {
                BorderMode::Truncate => u,
                BorderMode::Wrap => window.wrap(u),
            };
            field.intensity(u)
        };
        let h = reach / T::from_usize_lossy(n_rho);
        let mut ray = T::zero();
        match threshold {
            None => {
                for i in 0..n_rho {
                    let rho = h * (T::from_usize_lossy(i) + half);
                    ray = ray + at(rho) * rho;
                }
                ray = ray * h;
            }
            Some(level) => {
                let above = |v: T| v > level;
                // the centre itself never counts (strict inequality)
                let mut lo_above = false;
                for i in 0..n_rho {
                    let a0 = h * T::from_usize_lossy(i);
                    let a1 = a0 + h;
                    let hi_above = above(at(a1));
                    if lo_above == hi_above {
                        if lo_above {
                            let m = a0 + h * half;
                            let v = at(m);
                            if above(v) {
                                ray = ray + v * m * h;
                            }
                        }
                    } else {
                        let (mut p, mut q) = (a0, a1);
                        for _ in 0..CROSSING_BISECTIONS {
                            let mid = (p + q) * half;
                            if above(at(mid)) == lo_above {
                                p = mid;
                            } else {
                                q = mid;
                            }
                        }
                        let cross = (p + q) * half;
                        let (seg0, seg1) = if lo_above { (a0, cross) } else { (cross, a1) };
                        let len = seg1 - seg0;
                        if len > T::zero() {
                            let m = (seg0 + seg1) * half;
                            ray = ray + at(m) * m * len;
                        }
                    }
                    lo_above = hi_above;
                }
            }
        }
        total = total + ray;
    }
    total * dtheta
}

/// Outer quadrature nodes of an expected-count integral for the unscaled
/// field. Scaling `λ` by `k` scales both `λ(x)` and `Φ(x)` by `k` (the
/// Matérn II indicator is scale free), so `E(k) = Σ h² k λ(x) e^{−k Φ(x)}`
/// can be evaluated for any `k` without redoing the inner integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct CountProfile<T> {
    /// `(λ(x), Φ(x))` per outer row, nodes with `λ(x) = 0` dropped.
    rows: Vec<Vec<(T, T)>>,
    node_area: T,
}

impl<T: Scalar> CountProfile<T> {
    pub fn new<I: Intensity<T> + ?Sized>(
        field: &I,
        window: &Rect<T>,
        r: T,
        process: ProcessKind,
        opts: &QuadratureOptions,
    ) -> Self {
        let n = opts.outer.max(1);
        let nn = T::from_usize_lossy(n);
        let h1 = window.width() / nn;
        let h2 = window.height() / nn;
        let half = T::lit(0.5);
        let restrict = process == ProcessKind::Matern2;
        let rows = (0..n)
            .into_par_iter()
            .map(|a| {
                let x1 = window.x1_left + h1 * (T::from_usize_lossy(a) + half);
                (0..n)
                    .filter_map(|b| {
                        let x2 = window.x2_bottom + h2 * (T::from_usize_lossy(b) + half);
                        let x = Point2D::new(x1, x2);
                        let lam = field.intensity(x);
                        if lam <= T::zero() {
                            return None;
                        }
                        let phi = if r > T::zero() {
                            eliminating_mass(field, window, x, r, restrict.then_some(lam), opts)
                        } else {
                            T::zero()
                        };
                        Some((lam, phi))
                    })
                    .collect()
            })
            .collect();
        Self { rows, node_area: h1 * h2 }
    }

    /// Expected count for the field scaled by `k`.
    pub fn expected(&self, k: T) -> T {
        self.rows
            .iter()
            .map(|row| row.iter().fold(T::zero(), |acc, &(lam, phi)| acc + (-(k * phi)).exp() * (k * lam)))
            .fold(T::zero(), |s, v| s + v)
            * self.node_area
    }
}

fn expected_count<T: Scalar, I: Intensity<T> + ?Sized>(
    field: &I,
    window: &Rect<T>,
    r: T,
    process: ProcessKind,
    opts: &QuadratureOptions,
) -> T {
    CountProfile::new(field, window, r, process, opts).expected(T::one())
}

/// Expected number of inhomogeneous Matérn I points in `window`:
/// `∫_C exp(−∫_{B(x,r)} λ(u) du) λ(x) dx`.
pub fn expected_count_matern1<T: Scalar, I: Intensity<T> + ?Sized>(
    field: &I,
    window: &Rect<T>,
    r: T,
    opts: &QuadratureOptions,
) -> T {
    expected_count(field, window, r, ProcessKind::Matern1, opts)
}

/// Expected number of inhomogeneous Matérn II points in `window` with marks `1/λ`:
/// `∫_C exp(−∫_{B(x,r)} 𝟙(λ(u) > λ(x)) λ(u) du) λ(x) dx`.
pub fn expected_count_matern2<T: Scalar, I: Intensity<T> + ?Sized>(
    field: &I,
    window: &Rect<T>,
    r: T,
    opts: &QuadratureOptions,
) -> T {
    expected_count(field, window, r, ProcessKind::Matern2, opts)
}
