//! Population model and Poisson intensity.
//!
//! Population is a superposition of circles, each carrying a radial profile
//! built from Gaussian lobes `A·exp(−(ρ − ρ₀)²/(2σ²))`. A lobe with `ρ₀ = 0`
//! is a plain bell; `ρ₀ > 0` produces a ring, which is how multi-lobed
//! profiles are expressed. The sum of all profiles at a point is the
//! gentrification `G(x)`; the Poisson intensity is `λ(x) = k·G(x)`.

use crate::error::{Error, Result};
use crate::geometry::{Cell, Point2D, Rect};
use crate::process::quadrature::{CountProfile, QuadratureOptions};
use crate::process::ProcessKind;
use crate::scalar::Scalar;

/// Anything that can serve as the intensity of an inhomogeneous Poisson process.
pub trait Intensity<T: Scalar>: Sync {
    fn intensity(&self, x: Point2D<T>) -> T;

    /// Locations inside `window` where the intensity is likely to peak. Used
    /// to tighten the grid-based supremum estimate.
    fn peak_hints(&self, _window: &Rect<T>) -> Vec<Point2D<T>> {
        Vec::new()
    }
}

impl<T: Scalar, F> Intensity<T> for F
where
    F: Fn(Point2D<T>) -> T + Sync,
{
    fn intensity(&self, x: Point2D<T>) -> T {
        self(x)
    }
}

/// Homogeneous intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantIntensity<T>(pub T);

impl<T: Scalar> Intensity<T> for ConstantIntensity<T> {
    fn intensity(&self, _x: Point2D<T>) -> T {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lobe<T> {
    pub amplitude: T,
    pub radial_offset: T,
    pub sigma: T,
}

impl<T: Scalar> Lobe<T> {
    pub fn new(amplitude: T, radial_offset: T, sigma: T) -> Result<Self> {
        if !(amplitude >= T::zero()) || !amplitude.is_finite() {
            return Err(Error::InvalidIntensity(format!("lobe amplitude must be >= 0, got {amplitude}")));
        }
        if !(radial_offset >= T::zero()) || !radial_offset.is_finite() {
            return Err(Error::InvalidIntensity(format!("lobe offset must be >= 0, got {radial_offset}")));
        }
        if !(sigma > T::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidIntensity(format!("lobe sigma must be > 0, got {sigma}")));
        }
        Ok(Self { amplitude, radial_offset, sigma })
    }

    pub fn eval(&self, rho: T) -> T {
        let d = (rho - self.radial_offset) / self.sigma;
        self.amplitude * (-(d * d) * T::lit(0.5)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevolutionKind {
    Gaussian,
    MultiLobeGaussian,
}

/// Radial population profile `f(ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RevolutionFunction<T> {
    lobes: Vec<Lobe<T>>,
}

impl<T: Scalar> RevolutionFunction<T> {
    pub fn new(lobes: Vec<Lobe<T>>) -> Result<Self> {
        if lobes.is_empty() {
            return Err(Error::InvalidIntensity("revolution function needs at least one lobe".into()));
        }
        Ok(Self { lobes })
    }

    pub fn gaussian(amplitude: T, sigma: T) -> Result<Self> {
        Self::new(vec![Lobe::new(amplitude, T::zero(), sigma)?])
    }

    pub fn lobes(&self) -> &[Lobe<T>] {
        &self.lobes
    }

    pub fn kind(&self) -> RevolutionKind {
        match self.lobes.as_slice() {
            [l] if l.radial_offset == T::zero() => RevolutionKind::Gaussian,
            _ => RevolutionKind::MultiLobeGaussian,
        }
    }

    pub fn eval(&self, rho: T) -> T {
        self.lobes.iter().map(|l| l.eval(rho)).sum()
    }

    /// Radius beyond which the profile is negligible: largest offset plus five sigmas.
    pub fn default_support(&self) -> T {
        self.lobes.iter().map(|l| l.radial_offset + T::lit(5.0) * l.sigma).fold(T::zero(), T::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationCircle<T> {
    pub center: Point2D<T>,
    pub revolution: RevolutionFunction<T>,
    pub support_radius: T,
}

impl<T: Scalar> PopulationCircle<T> {
    /// Circle with the default support radius.
    pub fn new(center: Point2D<T>, revolution: RevolutionFunction<T>) -> Self {
        let support_radius = revolution.default_support();
        Self { center, revolution, support_radius }
    }

    pub fn with_support(center: Point2D<T>, revolution: RevolutionFunction<T>, support_radius: T) -> Result<Self> {
        if !(support_radius > T::zero()) || !center.is_finite() {
            return Err(Error::InvalidIntensity(format!(
                "support radius must be > 0 and center finite (got {support_radius})"
            )));
        }
        Ok(Self { center, revolution, support_radius })
    }

    pub fn eval(&self, x: &Point2D<T>) -> T {
        let d2 = self.center.distance_sq(x);
        if d2 > self.support_radius * self.support_radius {
            return T::zero();
        }
        self.revolution.eval(d2.sqrt())
    }
}

/// `λ(x) = k·G(x)` over a set of population circles.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityField<T> {
    pub circles: Vec<PopulationCircle<T>>,
    pub k: T,
}

impl<T: Scalar> IntensityField<T> {
    pub fn new(circles: Vec<PopulationCircle<T>>, k: T) -> Result<Self> {
        if !(k >= T::zero()) || !k.is_finite() {
            return Err(Error::InvalidIntensity(format!("scale k must be finite and >= 0, got {k}")));
        }
        Ok(Self { circles, k })
    }

    /// Same circles with a different scale.
    pub fn with_scale(&self, k: T) -> Self {
        Self { circles: self.circles.clone(), k }
    }

    pub fn gentrification_at(&self, x: Point2D<T>) -> T {
        self.circles.iter().map(|c| c.eval(&x)).sum()
    }

    pub fn intensity_at(&self, x: Point2D<T>) -> T {
        if self.k == T::zero() {
            return T::zero();
        }
        self.k * self.gentrification_at(x)
    }
}

impl<T: Scalar> Intensity<T> for IntensityField<T> {
    fn intensity(&self, x: Point2D<T>) -> T {
        self.intensity_at(x)
    }

    fn peak_hints(&self, window: &Rect<T>) -> Vec<Point2D<T>> {
        let mid = window.center();
        let mut hints = Vec::new();
        for c in &self.circles {
            hints.push(window.clamp(&c.center));
            let towards = mid.distance(&c.center);
            for l in c.revolution.lobes().iter().filter(|l| l.radial_offset > T::zero()) {
                let (u1, u2) = if towards > T::zero() {
                    ((mid.x1 - c.center.x1) / towards, (mid.x2 - c.center.x2) / towards)
                } else {
                    (T::one(), T::zero())
                };
                let p = Point2D::new(c.center.x1 + u1 * l.radial_offset, c.center.x2 + u2 * l.radial_offset);
                hints.push(window.clamp(&p));
            }
        }
        hints
    }
}

/// Grid-based upper bound on `sup λ` over a window: the maximum over an
/// `n × n` lattice spanning the window (edges included) plus the field's peak
/// hints, times `safety`.
pub fn lambda_max_over_with<T: Scalar, I: Intensity<T> + ?Sized>(
    field: &I,
    window: &Rect<T>,
    n: usize,
    safety: T,
) -> T {
    let n = n.max(2);
    let steps = T::from_usize_lossy(n - 1);
    let mut best = T::zero();
    for a in 0..n {
        let x1 = window.x1_left + window.width() * T::from_usize_lossy(a) / steps;
        for b in 0..n {
            let x2 = window.x2_bottom + window.height() * T::from_usize_lossy(b) / steps;
            best = best.max(field.intensity(Point2D::new(x1, x2)));
        }
    }
    for p in field.peak_hints(window) {
        best = best.max(field.intensity(p));
    }
    best * safety
}

pub const LAMBDA_MAX_GRID: usize = 64;
pub const LAMBDA_MAX_SAFETY: f64 = 1.05;

/// Upper bound on `λ` over `cell` at the default 64×64 resolution with a 1.05 margin.
pub fn lambda_max_over<T: Scalar, I: Intensity<T> + ?Sized>(field: &I, cell: &Cell<T>) -> T {
    lambda_max_over_with(field, &cell.bounds, LAMBDA_MAX_GRID, T::lit(LAMBDA_MAX_SAFETY))
}

/// Midpoint rule on an `n × n` sub-grid of `window`.
pub fn integrate_midpoint<T: Scalar, F: Fn(Point2D<T>) -> T>(f: F, window: &Rect<T>, n: usize) -> T {
    let n = n.max(1);
    let nn = T::from_usize_lossy(n);
    let h1 = window.width() / nn;
    let h2 = window.height() / nn;
    let half = T::lit(0.5);
    let mut acc = T::zero();
    for a in 0..n {
        let x1 = window.x1_left + h1 * (T::from_usize_lossy(a) + half);
        for b in 0..n {
            let x2 = window.x2_bottom + h2 * (T::from_usize_lossy(b) + half);
            acc = acc + f(Point2D::new(x1, x2));
        }
    }
    acc * h1 * h2
}

pub const DEFAULT_G_QUADRATURE: usize = 64;

/// How `k` is chosen for a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CalibrationMode<T> {
    /// `k = N / ∫_cell G`: the raw Poisson process has mean `N`.
    PreThin,
    /// `k` such that the expected number of thinned survivors is `N`.
    PostThin { radius: T, process: ProcessKind },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationSettings {
    /// Midpoint sub-grid per side for `∫_cell G`.
    pub g_quadrature: usize,
    pub count_quadrature: QuadratureOptions,
    pub rel_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            g_quadrature: DEFAULT_G_QUADRATURE,
            count_quadrature: QuadratureOptions::default(),
            rel_tolerance: 0.01,
            max_iterations: 60,
        }
    }
}

pub fn calibrate_k<T: Scalar>(
    field: &IntensityField<T>,
    cell: &Cell<T>,
    target: u32,
    mode: CalibrationMode<T>,
) -> Result<T> {
    calibrate_k_with(field, cell, target, mode, &CalibrationSettings::default())
}

pub fn calibrate_k_with<T: Scalar>(
    field: &IntensityField<T>,
    cell: &Cell<T>,
    target: u32,
    mode: CalibrationMode<T>,
    settings: &CalibrationSettings,
) -> Result<T> {
    if target == 0 {
        return Err(Error::InvalidTarget(target));
    }
    let mass = integrate_midpoint(|x| field.gentrification_at(x), &cell.bounds, settings.g_quadrature);
    if !(mass > T::zero()) {
        return Err(Error::CalibrationImpossible { cell: cell.index });
    }
    let target_t = T::from_u32(target).expect("u32 fits scalar");
    let pre_thin = target_t / mass;
    let (radius, process) = match mode {
        CalibrationMode::PreThin => return Ok(pre_thin),
        CalibrationMode::PostThin { radius, process } => (radius, process),
    };
    if !(radius > T::zero()) {
        return Err(Error::InvalidRadius(radius.as_f64()));
    }

    let profile = CountProfile::new(field, &cell.bounds, radius, process, &settings.count_quadrature);
    let expected = |k: f64| profile.expected(T::lit(k)).as_f64();
    let goal = f64::from(target);
    let tol = settings.rel_tolerance;
    let close = |e: f64| (e - goal).abs() <= tol * goal;

    // E(k) starts at 0, rises, and eventually falls again because every node
    // contributes k·λ·e^{−kΦ}. Double from the pre-thin k (where E <= N)
    // until the target is bracketed or the curve turns.
    let mut iterations = 0;
    let mut lo = 0.0f64;
    let mut hi = pre_thin.as_f64();
    let mut e_hi = expected(hi);
    iterations += 1;
    if close(e_hi) {
        return Ok(T::lit(hi));
    }
    let mut e_lo = 0.0;
    while e_hi < goal {
        if iterations >= settings.max_iterations || !hi.is_finite() {
            return Err(Error::CalibrationDiverged { cell: cell.index, lo, hi });
        }
        if e_hi < e_lo {
            // past the peak: it lies in [lo / 2, hi]
            let (k_peak, e_peak) = maximise_log(&expected, (lo * 0.5).max(f64::MIN_POSITIVE), hi);
            if close(e_peak) {
                return Ok(T::lit(k_peak));
            }
            if e_peak < goal {
                return Err(Error::TargetUnreachable { cell: cell.index, target, max_expected: e_peak });
            }
            hi = k_peak;
            lo *= 0.5;
            break;
        }
        lo = hi;
        e_lo = e_hi;
        hi *= 2.0;
        e_hi = expected(hi);
        iterations += 1;
        if close(e_hi) {
            return Ok(T::lit(hi));
        }
    }
    // bisection on the rising branch; geometric midpoint once lo > 0
    while iterations < settings.max_iterations {
        let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
        let e = expected(mid);
        iterations += 1;
        if close(e) {
            return Ok(T::lit(mid));
        }
        if e < goal {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::CalibrationDiverged { cell: cell.index, lo, hi })
}

/// Golden-section search for the maximum of `f` over `[a, b]` in `ln k`.
fn maximise_log(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a.ln(), b.ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c.exp()), f(d.exp()));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d.exp());
        }
    }
    if fc > fd {
        (c.exp(), fc)
    } else {
        (d.exp(), fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bell(center: (f64, f64), a: f64, sigma: f64) -> PopulationCircle<f64> {
        PopulationCircle::new(Point2D::new(center.0, center.1), RevolutionFunction::gaussian(a, sigma).unwrap())
    }

    #[test]
    fn gentrification_examples() {
        let f = IntensityField::new(vec![bell((0.0, 0.0), 100.0, 1.0)], 1.0).unwrap();
        assert_relative_eq!(f.gentrification_at(Point2D::new(0.0, 0.0)), 100.0);
        let expect = 100.0 * (-0.5f64).exp();
        assert_relative_eq!(f.gentrification_at(Point2D::new(1.0, 0.0)), expect, max_relative = 1e-12);
        assert_relative_eq!(expect, 60.653, epsilon = 1e-3);

        let two = IntensityField::new(vec![bell((0.0, 0.0), 100.0, 1.0), bell((2.0, 0.0), 100.0, 1.0)], 1.0).unwrap();
        assert_relative_eq!(two.gentrification_at(Point2D::new(1.0, 0.0)), 2.0 * expect, max_relative = 1e-12);
    }

    #[test]
    fn intensity_scaling() {
        let f = IntensityField::new(vec![bell((0.0, 0.0), 100.0, 1.0)], 0.0).unwrap();
        assert_eq!(f.intensity_at(Point2D::new(0.3, 0.1)), 0.0);
        let f2 = f.with_scale(2.0);
        assert_relative_eq!(f2.intensity_at(Point2D::new(1.0, 0.0)), 121.306, epsilon = 1e-3);
        let empty = IntensityField::<f64>::new(vec![], 1.0).unwrap();
        assert_eq!(empty.intensity_at(Point2D::new(5.0, 5.0)), 0.0);
    }

    #[test]
    fn support_cutoff_and_default() {
        let c = bell((0.0, 0.0), 10.0, 0.5);
        assert_relative_eq!(c.support_radius, 2.5);
        assert_eq!(c.eval(&Point2D::new(2.6, 0.0)), 0.0);
        assert!(c.eval(&Point2D::new(2.4, 0.0)) > 0.0);
        // the cut-off tail is tiny relative to the peak
        assert!(c.revolution.eval(2.5) / 10.0 < 4e-6);
    }

    #[test]
    fn multi_lobe_kind_and_peak() {
        let r = RevolutionFunction::new(vec![Lobe::new(50.0, 0.0, 0.3).unwrap(), Lobe::new(80.0, 1.0, 0.2).unwrap()])
            .unwrap();
        assert_eq!(r.kind(), RevolutionKind::MultiLobeGaussian);
        assert_eq!(RevolutionFunction::gaussian(1.0, 1.0).unwrap().kind(), RevolutionKind::Gaussian);
        assert!(r.eval(1.0) > r.eval(0.6));
        assert_relative_eq!(r.default_support(), 2.0);
    }

    #[test]
    fn invalid_parameters() {
        assert!(RevolutionFunction::<f64>::new(vec![]).is_err());
        assert!(Lobe::new(-1.0, 0.0, 1.0).is_err());
        assert!(Lobe::new(1.0, -0.1, 1.0).is_err());
        assert!(Lobe::new(1.0, 0.0, 0.0).is_err());
        assert!(IntensityField::<f64>::new(vec![], -1.0).is_err());
        assert!(PopulationCircle::with_support(
            Point2D::new(0.0, 0.0),
            RevolutionFunction::gaussian(1.0, 1.0).unwrap(),
            0.0
        )
        .is_err());
    }

    #[test]
    fn lambda_max_examples() {
        let cell = Cell::standalone(Rect::<f64>::unit());
        assert_eq!(lambda_max_over(&ConstantIntensity(0.0), &cell), 0.0);
        let m = lambda_max_over(&ConstantIntensity(3.0), &cell);
        assert!((3.0..=3.0 * 1.05 + 1e-12).contains(&m));

        // narrow peak off the lattice; compare with a 10x finer lattice
        let f = IntensityField::new(vec![bell((0.3137, 0.6571), 40.0, 0.01)], 2.0).unwrap();
        let bound = lambda_max_over(&f, &cell);
        let fine = lambda_max_over_with(&f, &cell.bounds, 640, 1.0);
        assert!(bound >= fine, "{bound} < {fine}");
        assert!(bound >= 80.0);
    }

    #[test]
    fn midpoint_integral_of_gaussian() {
        // ∫∫ A e^{-ρ²/2σ²} over the plane is 2πσ²A
        let f = IntensityField::new(vec![bell((0.0, 0.0), 7.0, 0.4)], 1.0).unwrap();
        let w = Rect::new(-3.0, 3.0, -3.0, 3.0).unwrap();
        let got = integrate_midpoint(|x| f.gentrification_at(x), &w, 256);
        assert_relative_eq!(got, 2.0 * std::f64::consts::PI * 0.16 * 7.0, max_relative = 1e-5);
    }

    fn unit_cell_around_origin() -> Cell<f64> {
        Cell::standalone(Rect::new(-3.0, 3.0, -3.0, 3.0).unwrap())
    }

    #[test]
    fn pre_thin_matches_closed_form_mass() {
        let f = IntensityField::new(vec![bell((0.0, 0.0), 7.0, 0.4)], 1.0).unwrap();
        let mass = 2.0 * std::f64::consts::PI * 0.16 * 7.0;
        let mut last = 0.0;
        for n in 1..6u32 {
            let k = calibrate_k(&f, &unit_cell_around_origin(), n, CalibrationMode::PreThin).unwrap();
            assert_relative_eq!(k, f64::from(n) / mass, max_relative = 1e-4);
            assert!(k > last);
            last = k;
        }
    }

    #[test]
    fn post_thin_hits_the_quadrature_target() {
        let f = IntensityField::new(vec![bell((0.3, 0.6), 10.0, 0.5)], 1.0).unwrap();
        let cell = Cell::standalone(Rect::unit());
        let r = 0.125;
        for process in [ProcessKind::Matern1, ProcessKind::Matern2] {
            let pre = calibrate_k(&f, &cell, 4, CalibrationMode::PreThin).unwrap();
            let k = calibrate_k(&f, &cell, 4, CalibrationMode::PostThin { radius: r, process }).unwrap();
            assert!(k > pre, "{process:?}");
            let q = QuadratureOptions::default();
            let scaled = f.with_scale(k);
            let e = match process {
                ProcessKind::Matern1 => crate::process::expected_count_matern1(&scaled, &cell.bounds, r, &q),
                ProcessKind::Matern2 => crate::process::expected_count_matern2(&scaled, &cell.bounds, r, &q),
            };
            assert!((e - 4.0).abs() <= 0.04, "{process:?}: {e}");
        }
    }

    #[test]
    fn post_thin_reports_unreachable_targets() {
        // everything within 0.05 of one point: Matérn II keeps about one point
        let c = PopulationCircle::with_support(
            Point2D::new(0.5, 0.5),
            RevolutionFunction::gaussian(1.0, 0.02).unwrap(),
            0.05,
        )
        .unwrap();
        let f = IntensityField::new(vec![c], 1.0).unwrap();
        let cell = Cell::standalone(Rect::unit());
        let mode = CalibrationMode::PostThin { radius: 0.25, process: ProcessKind::Matern2 };
        match calibrate_k(&f, &cell, 5, mode) {
            Err(Error::TargetUnreachable { cell: 0, target: 5, max_expected }) => {
                assert!(max_expected > 0.5 && max_expected < 2.0, "{max_expected}")
            }
            other => panic!("{other:?}"),
        }
        assert!(calibrate_k(&f, &cell, 1, mode).is_ok());
    }

    #[test]
    fn calibration_errors() {
        let f = IntensityField::new(vec![bell((0.0, 0.0), 7.0, 0.4)], 1.0).unwrap();
        let far = Cell::standalone(Rect::new(100.0, 101.0, 0.0, 1.0).unwrap());
        assert_eq!(calibrate_k(&f, &far, 1, CalibrationMode::PreThin), Err(Error::CalibrationImpossible { cell: 0 }));
        assert_eq!(
            calibrate_k(&f, &unit_cell_around_origin(), 0, CalibrationMode::PreThin),
            Err(Error::InvalidTarget(0))
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn circle() -> impl Strategy<Value = PopulationCircle<f64>> {
            (-5.0f64..5.0, -5.0f64..5.0, 0.0f64..100.0, 0.0f64..2.0, 0.05f64..2.0).prop_map(|(x, y, a, off, s)| {
                PopulationCircle::new(
                    Point2D::new(x, y),
                    RevolutionFunction::new(vec![Lobe::new(a, off, s).unwrap()]).unwrap(),
                )
            })
        }

        proptest! {
            #[test]
            fn nonnegative_and_superposition(
                a in prop::collection::vec(circle(), 0..4),
                b in prop::collection::vec(circle(), 0..4),
                px in -6.0f64..6.0, py in -6.0f64..6.0, k in 0.0f64..10.0,
            ) {
                let p = Point2D::new(px, py);
                let fa = IntensityField::new(a.clone(), k).unwrap();
                let fb = IntensityField::new(b.clone(), k).unwrap();
                let mut all = a;
                all.extend(b);
                let fab = IntensityField::new(all, k).unwrap();
                prop_assert!(fab.intensity_at(p) >= 0.0);
                let sum = fa.gentrification_at(p) + fb.gentrification_at(p);
                prop_assert!((fab.gentrification_at(p) - sum).abs() <= 1e-9 * (1.0 + sum));
            }
        }
    }
}
