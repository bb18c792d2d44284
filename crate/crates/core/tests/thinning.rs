use proptest::prelude::*;

use stochtopo::geometry::{Cell, Point2D, Rect};
use stochtopo::intensity::{ConstantIntensity, IntensityField, PopulationCircle, RevolutionFunction};
use stochtopo::process::{
    assign_intensity_marks, matern1_thin, matern2_thin, sample_inhomogeneous_ppp, thin_by_marks, PointSample, Stage,
};
use stochtopo::validation::{check_hardcore, check_matern1_witness, check_matern2_witness};
use stochtopo::BorderMode;

fn field_strategy() -> impl Strategy<Value = IntensityField<f64>> {
    let circle =
        (-0.5f64..1.5, -0.5f64..1.5, 1.0f64..200.0, 0.0f64..0.3, 0.05f64..0.8).prop_map(|(x, y, a, off, s)| {
            PopulationCircle::new(
                Point2D::new(x, y),
                RevolutionFunction::new(vec![stochtopo::intensity::Lobe::new(a, off, s).unwrap()]).unwrap(),
            )
        });
    prop::collection::vec(circle, 1..4).prop_map(|c| IntensityField::new(c, 1.0).unwrap())
}

fn inside(sample: &PointSample<f64>) -> bool {
    sample.points.iter().all(|p| sample.cell.contains(&p.location))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn thinned_sets_are_hard_core_and_witnessed(field in field_strategy(), r in 0.01f64..0.4, seed in any::<u64>()) {
        let cell = Cell::standalone(Rect::unit());
        let raw = sample_inhomogeneous_ppp(&field, &cell, seed);
        prop_assert_eq!(raw.stage, Stage::Raw);
        prop_assert!(inside(&raw));

        let m1 = matern1_thin(&raw, r).unwrap();
        let marked = assign_intensity_marks(&raw, &field, seed ^ 1);
        let m2 = thin_by_marks(&marked, r, BorderMode::Truncate).unwrap();
        prop_assert_eq!(m1.stage, Stage::Thinned);

        prop_assert!(check_hardcore(&m1.locations(), r, None).is_ok());
        prop_assert!(check_hardcore(&m2.locations(), r, None).is_ok());
        prop_assert!(check_matern1_witness(&raw.locations(), &m1.locations(), r, None).is_ok());
        let w = check_matern2_witness(&marked.points, &m2.points, r, None);
        prop_assert!(w.is_ok(), "{:?}", w);

        // raw ⊇ Matérn II ⊇ Matérn I
        let raw_locs = raw.locations();
        let m2_locs = m2.locations();
        prop_assert!(m2_locs.iter().all(|p| raw_locs.contains(p)));
        prop_assert!(m1.locations().iter().all(|p| m2_locs.contains(p)));

        // the globally smallest mark always survives
        if let Some(best) = marked.points.iter().min_by(|a, b| {
            a.mark.partial_cmp(&b.mark).unwrap().then(a.tie_break.partial_cmp(&b.tie_break).unwrap())
        }) {
            prop_assert!(m2_locs.contains(&best.location));
        }
    }

    #[test]
    fn matern2_is_deterministic(field in field_strategy(), r in 0.01f64..0.4, seed in any::<u64>()) {
        let cell = Cell::standalone(Rect::unit());
        let a = matern2_thin(&sample_inhomogeneous_ppp(&field, &cell, seed), r, &field, seed).unwrap();
        let b = matern2_thin(&sample_inhomogeneous_ppp(&field, &cell, seed), r, &field, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn wrapped_thinning_is_hard_core_on_the_torus(seed in any::<u64>(), r in 0.02f64..0.2) {
        let cell = Cell::standalone(Rect::unit());
        let lam = ConstantIntensity(60.0);
        let raw = sample_inhomogeneous_ppp(&lam, &cell, seed);
        let m1 = stochtopo::process::matern1_thin_with(&raw, r, BorderMode::Wrap).unwrap();
        let marked = assign_intensity_marks(&raw, &lam, seed);
        let m2 = thin_by_marks(&marked, r, BorderMode::Wrap).unwrap();
        let torus = Rect::unit();
        prop_assert!(check_hardcore(&m1.locations(), r, Some(&torus)).is_ok());
        prop_assert!(check_matern1_witness(&raw.locations(), &m1.locations(), r, Some(&torus)).is_ok());
        prop_assert!(check_matern2_witness(&marked.points, &m2.points, r, Some(&torus)).is_ok());
    }
}

#[test]
fn raw_count_matches_intensity_mass() {
    // E[raw count] = ∫λ; the oracle integral is a 512² midpoint sum
    let c = PopulationCircle::new(Point2D::new(0.3, 0.8), RevolutionFunction::gaussian(80.0, 0.35).unwrap());
    let field = IntensityField::new(vec![c], 1.0).unwrap();
    let cell = Cell::standalone(Rect::unit());
    let n = 512;
    let mut mass = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = Point2D::new((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
            mass += field.intensity_at(p);
        }
    }
    mass /= (n * n) as f64;

    let reps = 10_000u64;
    let counts: Vec<f64> = (0..reps).map(|s| sample_inhomogeneous_ppp(&field, &cell, s).len() as f64).collect();
    let mean = counts.iter().sum::<f64>() / reps as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let se = (var / reps as f64).sqrt();
    assert!((mean - mass).abs() <= 3.0 * se, "mean {mean}, mass {mass}, se {se}");
}

#[test]
fn samples_follow_the_intensity_shape() {
    // λ(x) = 100·x1 on the unit square: left and right halves hold 1/4 and 3/4 of the mass
    let lam = |p: Point2D<f64>| 100.0 * p.x1;
    let cell = Cell::standalone(Rect::unit());
    let (mut left, mut total) = (0usize, 0usize);
    for seed in 0..2000 {
        let s = sample_inhomogeneous_ppp(&lam, &cell, seed);
        left += s.points.iter().filter(|p| p.location.x1 < 0.5).count();
        total += s.len();
    }
    let frac = left as f64 / total as f64;
    let se = (0.25f64 * 0.75 / total as f64).sqrt();
    assert!((frac - 0.25).abs() <= 3.0 * se, "left fraction {frac}");
}
