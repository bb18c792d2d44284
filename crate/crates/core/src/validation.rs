//! Independent oracles: Monte-Carlo count estimates, quadratic-time thinning
//! checks, from-scratch coverage recounts and exhaustive small-instance
//! placement. None of these reuse the neighbour index, the candidate ball
//! scan or the matrix bookkeeping they are meant to check.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Cell;
use crate::geometry::{Point2D, Rect};
use crate::intensity::lambda_max_over;
use crate::intensity::Intensity;
use crate::placement::{CandidateLayout, LatencyBudget, PlacementResult, RingHierarchy};
use crate::process::BaseStation;
use crate::process::{
    expected_count_matern1, expected_count_matern2, matern1_thin_with, matern2_thin_with, sample_with_bound,
    BorderMode, MarkedPoint, ProcessKind, QuadratureOptions,
};
use crate::rng::{derive_seed, STREAM_SAMPLE, STREAM_TIE_MARKS};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloReport {
    pub replications: usize,
    pub mean: f64,
    pub std_error: f64,
    pub analytic: f64,
    pub z_score: f64,
}

impl MonteCarloReport {
    pub fn from_counts(counts: &[f64], analytic: f64) -> Self {
        let n = counts.len();
        let mean = counts.iter().sum::<f64>() / n.max(1) as f64;
        let var = if n > 1 { counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        let std_error = (var / n.max(1) as f64).sqrt();
        let gap = (mean - analytic).abs();
        let z_score = if std_error > 0.0 {
            gap / std_error
        } else if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        Self { replications: n, mean, std_error, analytic, z_score }
    }

    pub fn passes(&self, z_max: f64) -> bool {
        self.z_score <= z_max
    }
}

pub const MIN_REPLICATIONS: usize = 100;

/// Surviving counts of `replications` independent sample-and-thin runs on `window`.
/// Replication `i` uses `derive_seed(seed, [i, STREAM_SAMPLE])` and
/// `derive_seed(seed, [i, STREAM_TIE_MARKS])`.
pub fn mc_counts<T: Scalar, I: Intensity<T> + ?Sized>(
    field: &I,
    window: &Rect<T>,
    r: T,
    process: ProcessKind,
    border: BorderMode,
    replications: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let cell = Cell::standalone(*window);
    let bound = lambda_max_over(field, &cell);
    (0..replications as u64)
        .into_par_iter()
        .map(|i| {
            let raw = sample_with_bound(field, &cell, bound, derive_seed(seed, &[i, STREAM_SAMPLE]));
            let thinned = match process {
                ProcessKind::Matern1 => matern1_thin_with(&raw, r, border)?,
                ProcessKind::Matern2 => {
                    matern2_thin_with(&raw, r, field, derive_seed(seed, &[i, STREAM_TIE_MARKS]), border)?
                }
            };
            Ok(thinned.len() as f64)
        })
        .collect()
}

/// Monte-Carlo mean survivor count compared with the matching quadrature.
pub fn mc_expected_count<T: Scalar, I: Intensity<T> + ?Sized>(
    field: &I,
    window: &Rect<T>,
    r: T,
    process: ProcessKind,
    replications: usize,
    seed: u64,
    quadrature: &QuadratureOptions,
) -> Result<MonteCarloReport> {
    let replications = replications.max(MIN_REPLICATIONS);
    let counts = mc_counts(field, window, r, process, quadrature.border, replications, seed)?;
    let analytic = match process {
        ProcessKind::Matern1 => expected_count_matern1(field, window, r, quadrature),
        ProcessKind::Matern2 => expected_count_matern2(field, window, r, quadrature),
    };
    Ok(MonteCarloReport::from_counts(&counts, analytic.as_f64()))
}

/// A pair of points that violates a checked property.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Counterexample<T> {
    pub first: usize,
    pub second: usize,
    pub a: Point2D<T>,
    pub b: Point2D<T>,
    pub distance: T,
}

fn plain_distance<T: Scalar>(a: &Point2D<T>, b: &Point2D<T>, torus: Option<&Rect<T>>) -> T {
    let mut d1 = (a.x1 - b.x1).abs();
    let mut d2 = (a.x2 - b.x2).abs();
    if let Some(w) = torus {
        d1 = d1.min(w.width() - d1);
        d2 = d2.min(w.height() - d2);
    }
    (d1 * d1 + d2 * d2).sqrt()
}

/// Every pair strictly farther apart than `r`. `torus` switches to wrapped distances.
pub fn check_hardcore<T: Scalar>(
    points: &[Point2D<T>],
    r: T,
    torus: Option<&Rect<T>>,
) -> std::result::Result<(), Counterexample<T>> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = plain_distance(&points[i], &points[j], torus);
            if d <= r {
                return Err(Counterexample { first: i, second: j, a: points[i], b: points[j], distance: d });
            }
        }
    }
    Ok(())
}

fn beats<T: Scalar>(a: &MarkedPoint<T>, ia: usize, b: &MarkedPoint<T>, ib: usize) -> bool {
    if a.mark != b.mark {
        return a.mark < b.mark;
    }
    if a.tie_break != b.tie_break {
        return a.tie_break < b.tie_break;
    }
    ia < ib
}

/// Checks a Matérn II result against its marked raw sample: survivors are
/// exactly the raw points that beat every other raw point within `r`.
pub fn check_matern2_witness<T: Scalar>(
    raw: &[MarkedPoint<T>],
    survivors: &[MarkedPoint<T>],
    r: T,
    torus: Option<&Rect<T>>,
) -> std::result::Result<(), String> {
    let mut expected = Vec::new();
    for (i, p) in raw.iter().enumerate() {
        let mut loser = None;
        for (j, q) in raw.iter().enumerate() {
            if i != j && plain_distance(&p.location, &q.location, torus) <= r && beats(q, j, p, i) {
                loser = Some(j);
                break;
            }
        }
        if loser.is_none() {
            expected.push(*p);
        }
    }
    if expected.len() != survivors.len() {
        return Err(format!("expected {} survivors, got {}", expected.len(), survivors.len()));
    }
    for (k, (e, s)) in expected.iter().zip(survivors).enumerate() {
        if e.location != s.location {
            return Err(format!("survivor {k}: expected {:?}, got {:?}", e.location, s.location));
        }
    }
    let locs: Vec<_> = survivors.iter().map(|p| p.location).collect();
    check_hardcore(&locs, r, torus)
        .map_err(|c| format!("survivors {} and {} are {} apart (r = {r})", c.first, c.second, c.distance))
}

/// Matérn I counterpart of [`check_matern2_witness`].
pub fn check_matern1_witness<T: Scalar>(
    raw: &[Point2D<T>],
    survivors: &[Point2D<T>],
    r: T,
    torus: Option<&Rect<T>>,
) -> std::result::Result<(), String> {
    let expected: Vec<Point2D<T>> = raw
        .iter()
        .enumerate()
        .filter(|(i, p)| raw.iter().enumerate().all(|(j, q)| *i == j || plain_distance(p, q, torus) > r))
        .map(|(_, p)| *p)
        .collect();
    if expected != survivors {
        return Err(format!("expected {} isolated points, got {}", expected.len(), survivors.len()));
    }
    Ok(())
}

fn reach_oracle<T: Scalar>(p_ms: T, budget: &LatencyBudget<T>) -> Option<T> {
    // solve 2·l(d) + 2p + t_r = RTT for d without going through the library helper
    let spare = budget.rtt_budget_ms - budget.radio_delay_ms - p_ms - p_ms;
    if spare < T::zero() {
        None
    } else {
        Some(budget.model.inverse(spare * T::lit(0.5)))
    }
}

/// Per ring, the number of `unassigned` stations within reach of every candidate.
pub fn recount_coverage<T: Scalar>(
    stations: &[Point2D<T>],
    rings: &RingHierarchy<T>,
    layout: &CandidateLayout<T>,
    budget: &LatencyBudget<T>,
) -> Vec<Vec<u32>> {
    rings
        .rings()
        .iter()
        .map(|ring| {
            let reach = reach_oracle(ring.processing_delay_ms, budget);
            (0..layout.len())
                .map(|c| {
                    let site = layout.location(c);
                    match reach {
                        None => 0,
                        Some(m) => stations.iter().filter(|s| plain_distance(s, &site, None) <= m).count() as u32,
                    }
                })
                .collect()
        })
        .collect()
}

/// Relative slack allowed when re-checking `rtt ≤ budget` after the fact.
pub const RTT_SLACK: f64 = 1e-9;

/// Re-derives feasibility and capacity of a finished placement from scratch.
pub fn check_placement<T: Scalar>(
    bss: &[BaseStation<T>],
    rings: &RingHierarchy<T>,
    budget: &LatencyBudget<T>,
    result: &PlacementResult<T>,
) -> std::result::Result<(), String> {
    let limit = budget.rtt_budget_ms.as_f64() * (1.0 + RTT_SLACK) + RTT_SLACK;
    let mut seen = std::collections::BTreeMap::new();
    let mut per_pop = vec![0usize; result.pops.len()];
    for a in &result.assignments {
        if seen.insert(a.bs_id, a.pop_id).is_some() {
            return Err(format!("base station {} assigned twice", a.bs_id));
        }
        let bs = bss.iter().find(|b| b.id == a.bs_id).ok_or(format!("unknown base station {}", a.bs_id))?;
        let pop = result.pops.get(a.pop_id).ok_or(format!("unknown PoP {}", a.pop_id))?;
        let ring = &rings.rings()[pop.ring_index];
        let d = plain_distance(&bs.location, &pop.location, None).as_f64();
        let rtt = 2.0 * budget.model.delay(T::lit(d)).as_f64()
            + 2.0 * ring.processing_delay_ms.as_f64()
            + budget.radio_delay_ms.as_f64();
        if rtt > limit {
            return Err(format!("base station {} -> PoP {}: rtt {rtt} ms exceeds {limit} ms", a.bs_id, a.pop_id));
        }
        per_pop[a.pop_id] += 1;
    }
    for (pop, n) in result.pops.iter().zip(&per_pop) {
        if *n > pop.ring.max_bss {
            return Err(format!(
                "PoP {} serves {n} stations, ring {:?} allows {}",
                pop.id, pop.ring.name, pop.ring.max_bss
            ));
        }
    }
    for id in &result.unassignable {
        if seen.contains_key(id) {
            return Err(format!("base station {id} both assigned and unassignable"));
        }
    }
    if seen.len() + result.unassignable.len() != bss.len() {
        return Err(format!(
            "{} assigned + {} unassignable != {} stations",
            seen.len(),
            result.unassignable.len(),
            bss.len()
        ));
    }
    Ok(())
}

pub const BRUTE_FORCE_MAX_BSS: usize = 8;
pub const BRUTE_FORCE_MAX_RINGS: usize = 3;
pub const BRUTE_FORCE_MAX_CANDIDATES: usize = 400;

/// One PoP of an optimal plan: candidate, ring position and served stations (by id).
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPop {
    pub candidate: usize,
    pub ring_index: usize,
    pub stations: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalPlacement {
    /// `None` when some station cannot be served by any candidate.
    pub pop_count: Option<usize>,
    pub plan: Vec<PlannedPop>,
}

/// Minimum number of PoPs that serves every station under reach and
/// capacity limits, by exhaustive search over station subsets.
///
/// Each `(candidate, ring)` pair can serve any subset of the stations in its
/// reach up to the ring capacity, so a subset is servable by one PoP iff some
/// pair admits it. The optimum is then a shortest partition of the station
/// set into servable blocks, found by dynamic programming over all `2ⁿ` subsets.
pub fn brute_force_placement<T: Scalar>(
    bss: &[BaseStation<T>],
    rings: &RingHierarchy<T>,
    layout: &CandidateLayout<T>,
    budget: &LatencyBudget<T>,
) -> Result<OptimalPlacement> {
    if bss.len() > BRUTE_FORCE_MAX_BSS
        || rings.len() > BRUTE_FORCE_MAX_RINGS
        || layout.len() > BRUTE_FORCE_MAX_CANDIDATES
    {
        return Err(Error::InstanceTooLarge(format!(
            "{} stations / {} rings / {} candidates (limits {BRUTE_FORCE_MAX_BSS}/{BRUTE_FORCE_MAX_RINGS}/{BRUTE_FORCE_MAX_CANDIDATES})",
            bss.len(),
            rings.len(),
            layout.len()
        )));
    }
    let n = bss.len();
    let full: usize = (1 << n) - 1;
    // servable[S] = Some((candidate, ring)) for some pair able to serve exactly S
    let mut servable: Vec<Option<(usize, usize)>> = vec![None; full + 1];
    for (ri, ring) in rings.rings().iter().enumerate() {
        let Some(reach) = reach_oracle(ring.processing_delay_ms, budget) else { continue };
        for c in 0..layout.len() {
            let site = layout.location(c);
            let mask = bss
                .iter()
                .enumerate()
                .filter(|(_, b)| plain_distance(&b.location, &site, None) <= reach)
                .fold(0usize, |m, (i, _)| m | (1 << i));
            // all non-empty sub-masks within capacity
            let mut sub = mask;
            while sub > 0 {
                if sub.count_ones() as usize <= ring.max_bss && servable[sub].is_none() {
                    servable[sub] = Some((c, ri));
                }
                sub = (sub - 1) & mask;
            }
        }
    }
    let mut best: Vec<Option<(usize, usize)>> = vec![None; full + 1]; // (count, block)
    best[0] = Some((0, 0));
    for s in 1..=full {
        let mut sub = s;
        while sub > 0 {
            if servable[sub].is_some() {
                if let Some((rest, _)) = best[s & !sub] {
                    if best[s].is_none_or(|(b, _)| rest + 1 < b) {
                        best[s] = Some((rest + 1, sub));
                    }
                }
            }
            sub = (sub - 1) & s;
        }
    }
    let Some((count, _)) = best[full] else {
        return Ok(OptimalPlacement { pop_count: None, plan: Vec::new() });
    };
    let mut plan = Vec::new();
    let mut s = full;
    while s > 0 {
        let (_, block) = best[s].expect("reachable state");
        let (candidate, ring_index) = servable[block].expect("servable block");
        let stations = (0..n).filter(|i| block & (1 << i) != 0).map(|i| bss[i].id).collect();
        plan.push(PlannedPop { candidate, ring_index, stations });
        s &= !block;
    }
    Ok(OptimalPlacement { pop_count: Some(count), plan })
}
