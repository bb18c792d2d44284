//! Latency-constrained MEC PoP placement.
//!
//! A PoP at `m` attached to ring `M` can serve a base station at `x` iff
//! `2·l(‖x − m‖) + 2·p(M) + t_r ≤ RTT`, i.e. iff `‖x − m‖ ≤ m_M`. Candidate PoP
//! sites are the centres of a uniform grid over the region. The greedy loop
//! keeps, per ring, a count matrix of unassigned stations in reach of every
//! candidate and repeatedly opens the PoP with the largest count.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ball_contains, Point2D, Rect};
use crate::process::BaseStation;
use crate::scalar::Scalar;

/// Propagation delay `l(d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayModel<T> {
    /// `l(d) = d / km_per_ms`
    Linear { km_per_ms: T },
}

impl<T: Scalar> DelayModel<T> {
    pub fn linear(km_per_ms: T) -> Result<Self> {
        if !(km_per_ms > T::zero()) || !km_per_ms.is_finite() {
            return Err(Error::InvalidDelayModel(format!("km_per_ms must be > 0, got {km_per_ms}")));
        }
        Ok(Self::Linear { km_per_ms })
    }

    /// Delay in ms over `km`.
    pub fn delay(&self, km: T) -> T {
        match *self {
            Self::Linear { km_per_ms } => km / km_per_ms,
        }
    }

    /// Distance in km covered in `ms`.
    pub fn inverse(&self, ms: T) -> T {
        match *self {
            Self::Linear { km_per_ms } => ms * km_per_ms,
        }
    }
}

impl<T: Scalar> Default for DelayModel<T> {
    /// Fibre: roughly 200 km per ms.
    fn default() -> Self {
        Self::Linear { km_per_ms: T::lit(200.0) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRing<T> {
    pub name: String,
    pub rank: i64,
    pub processing_delay_ms: T,
    pub max_bss: usize,
}

impl<T: Scalar> NetworkRing<T> {
    pub fn new(name: impl Into<String>, rank: i64, processing_delay_ms: T, max_bss: usize) -> Self {
        Self { name: name.into(), rank, processing_delay_ms, max_bss }
    }
}

/// Rings ordered by rank. Processing delay strictly increases along the order.
#[derive(Debug, Clone, PartialEq)]
pub struct RingHierarchy<T> {
    rings: Vec<NetworkRing<T>>,
}

impl<T: Scalar> RingHierarchy<T> {
    pub fn new(mut rings: Vec<NetworkRing<T>>) -> Result<Self> {
        if rings.is_empty() {
            return Err(Error::InvalidRings("at least one ring is required".into()));
        }
        rings.sort_by_key(|r| r.rank);
        for r in &rings {
            if !(r.processing_delay_ms >= T::zero()) || !r.processing_delay_ms.is_finite() {
                return Err(Error::InvalidRings(format!("ring {:?}: processing delay must be >= 0", r.name)));
            }
            if r.max_bss == 0 {
                return Err(Error::InvalidRings(format!("ring {:?}: max_bss must be >= 1", r.name)));
            }
        }
        for w in rings.windows(2) {
            if w[0].rank == w[1].rank {
                return Err(Error::InvalidRings(format!(
                    "rings {:?} and {:?} share rank {}",
                    w[0].name, w[1].name, w[0].rank
                )));
            }
            if !(w[0].processing_delay_ms < w[1].processing_delay_ms) {
                return Err(Error::InvalidRings(format!(
                    "processing delay must increase with rank: {:?} ({}) vs {:?} ({})",
                    w[0].name, w[0].processing_delay_ms, w[1].name, w[1].processing_delay_ms
                )));
            }
        }
        Ok(Self { rings })
    }

    pub fn rings(&self) -> &[NetworkRing<T>] {
        &self.rings
    }

    pub fn len(&self) -> usize {
        self.rings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rings.is_empty()
    }
}

/// The latency parameters shared by every ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyBudget<T> {
    pub rtt_budget_ms: T,
    pub radio_delay_ms: T,
    pub model: DelayModel<T>,
}

/// `2·l(‖bs − pop‖) + 2·p(ring) + t_r`.
pub fn rtt<T: Scalar>(bs: Point2D<T>, pop: Point2D<T>, ring: &NetworkRing<T>, t_r: T, model: &DelayModel<T>) -> T {
    let two = T::lit(2.0);
    two * model.delay(bs.distance(&pop)) + two * ring.processing_delay_ms + t_r
}

/// `m_M = l⁻¹((RTT − 2·p − t_r)/2)`, or `None` when the ring cannot meet the budget at all.
pub fn max_assignment_distance<T: Scalar>(
    ring: &NetworkRing<T>,
    rtt_budget: T,
    t_r: T,
    model: &DelayModel<T>,
) -> Option<T> {
    let slack = (rtt_budget - T::lit(2.0) * ring.processing_delay_ms - t_r) / T::lit(2.0);
    (slack >= T::zero()).then(|| model.inverse(slack))
}

/// Candidate PoP sites: centres of a `cols × rows` grid over `bounds`,
/// numbered row-major from the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateLayout<T> {
    pub bounds: Rect<T>,
    pub cols: usize,
    pub rows: usize,
}

pub const DEFAULT_CANDIDATES_PER_KM: f64 = 4.0;

impl<T: Scalar> CandidateLayout<T> {
    pub fn with_dims(bounds: Rect<T>, cols: usize, rows: usize) -> Result<Self> {
        if cols == 0 || rows == 0 {
            return Err(Error::InvalidCandidateGrid(format!("grid must be non-empty, got {cols} x {rows}")));
        }
        Ok(Self { bounds, cols, rows })
    }

    /// `per_km` candidates per km along each axis.
    pub fn with_resolution(bounds: Rect<T>, per_km: T) -> Result<Self> {
        if !(per_km > T::zero()) || !per_km.is_finite() {
            return Err(Error::InvalidCandidateGrid(format!("resolution must be > 0, got {per_km}")));
        }
        let n = |span: T| (span * per_km).ceil().to_usize().unwrap_or(1).max(1);
        Self::with_dims(bounds, n(bounds.width()), n(bounds.height()))
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn step1(&self) -> T {
        self.bounds.width() / T::from_usize_lossy(self.cols)
    }

    fn step2(&self) -> T {
        self.bounds.height() / T::from_usize_lossy(self.rows)
    }

    pub fn location(&self, index: usize) -> Point2D<T> {
        let (row, col) = (index / self.cols, index % self.cols);
        let half = T::lit(0.5);
        Point2D::new(
            self.bounds.x1_left + self.step1() * (T::from_usize_lossy(col) + half),
            self.bounds.x2_top - self.step2() * (T::from_usize_lossy(row) + half),
        )
    }

    /// Visits every candidate inside the closed ball `B(center, radius)` in index order.
    pub fn for_each_in_ball(&self, center: Point2D<T>, radius: T, mut f: impl FnMut(usize)) {
        let half = T::lit(0.5);
        let span = |lo: T, hi: T, n: usize| -> Option<(usize, usize)> {
            let a = (lo - half).floor() - T::one();
            let b = (hi - half).ceil() + T::one();
            let last = T::from_usize_lossy(n - 1);
            if b < T::zero() || a > last {
                return None;
            }
            Some((a.max(T::zero()).to_usize()?, b.min(last).to_usize()?))
        };
        let (s1, s2) = (self.step1(), self.step2());
        let Some((c0, c1)) = span(
            (center.x1 - radius - self.bounds.x1_left) / s1,
            (center.x1 + radius - self.bounds.x1_left) / s1,
            self.cols,
        ) else {
            return;
        };
        let Some((r0, r1)) = span(
            (self.bounds.x2_top - center.x2 - radius) / s2,
            (self.bounds.x2_top - center.x2 + radius) / s2,
            self.rows,
        ) else {
            return;
        };
        for row in r0..=r1 {
            for col in c0..=c1 {
                let idx = row * self.cols + col;
                if ball_contains(center, radius, self.location(idx)) {
                    f(idx);
                }
            }
        }
    }
}

/// Per-ring coverage counts over the candidate layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid<T> {
    pub layout: CandidateLayout<T>,
    /// `reach[ring]` is `m_M`, `None` for rings that cannot meet the budget.
    pub reach: Vec<Option<T>>,
    pub matrices: Vec<Vec<u32>>,
}

pub fn ring_reaches<T: Scalar>(rings: &RingHierarchy<T>, budget: &LatencyBudget<T>) -> Vec<Option<T>> {
    rings
        .rings()
        .iter()
        .map(|r| max_assignment_distance(r, budget.rtt_budget_ms, budget.radio_delay_ms, &budget.model))
        .collect()
}

/// For each ring and base station, adds one to every candidate within `m_M` of the station.
pub fn build_candidate_matrices<T: Scalar>(
    bss: &[BaseStation<T>],
    rings: &RingHierarchy<T>,
    layout: CandidateLayout<T>,
    budget: &LatencyBudget<T>,
) -> CandidateGrid<T> {
    let reach = ring_reaches(rings, budget);
    let size = layout.len();
    let matrices = reach
        .iter()
        .map(|m| match m {
            None => vec![0u32; size],
            Some(m) => bss
                .par_iter()
                .fold(
                    || vec![0u32; size],
                    |mut acc, bs| {
                        layout.for_each_in_ball(bs.location, *m, |i| acc[i] += 1);
                        acc
                    },
                )
                .reduce(
                    || vec![0u32; size],
                    |mut a, b| {
                        a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                        a
                    },
                ),
        })
        .collect();
    CandidateGrid { layout, reach, matrices }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedPop<T> {
    pub id: usize,
    pub location: Point2D<T>,
    /// Position of the ring in the hierarchy.
    pub ring_index: usize,
    pub ring: NetworkRing<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment<T> {
    pub bs_id: usize,
    pub pop_id: usize,
    pub distance_km: T,
    pub rtt_ms: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlacementResult<T> {
    pub pops: Vec<PlacedPop<T>>,
    pub assignments: Vec<Assignment<T>>,
    pub unassignable: Vec<usize>,
}

/// One iteration of the selection loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub pop_id: usize,
    pub candidate: usize,
    pub ring_index: usize,
    pub coverage: u32,
    pub assigned: Vec<usize>,
}

/// Step-wise driver of the greedy placement. [`place_mec_pops`] runs it to completion.
pub struct PlacementEngine<'a, T> {
    bss: &'a [BaseStation<T>],
    rings: &'a RingHierarchy<T>,
    budget: LatencyBudget<T>,
    grid: CandidateGrid<T>,
    unassigned: BTreeSet<usize>,
    result: PlacementResult<T>,
    finished: bool,
}

impl<'a, T: Scalar> PlacementEngine<'a, T> {
    pub fn new(
        bss: &'a [BaseStation<T>],
        rings: &'a RingHierarchy<T>,
        layout: CandidateLayout<T>,
        budget: LatencyBudget<T>,
    ) -> Self {
        let grid = build_candidate_matrices(bss, rings, layout, &budget);
        Self {
            bss,
            rings,
            budget,
            grid,
            unassigned: (0..bss.len()).collect(),
            result: PlacementResult::default(),
            finished: false,
        }
    }

    pub fn grid(&self) -> &CandidateGrid<T> {
        &self.grid
    }

    /// Positions (into the input slice) of stations not yet assigned.
    pub fn unassigned(&self) -> &BTreeSet<usize> {
        &self.unassigned
    }

    pub fn result(&self) -> &PlacementResult<T> {
        &self.result
    }

    /// Best `(coverage, ring, candidate)`: highest coverage, then lowest
    /// processing delay, then lowest candidate index.
    pub fn best_candidate(&self) -> Option<(u32, usize, usize)> {
        let mut best: Option<(u32, usize, usize)> = None;
        for (ri, matrix) in self.grid.matrices.iter().enumerate() {
            let Some((idx, &cov)) =
                matrix.iter().enumerate().fold(None, |acc: Option<(usize, &u32)>, (i, v)| match acc {
                    Some((_, b)) if *v <= *b => acc,
                    _ => Some((i, v)),
                })
            else {
                continue;
            };
            let take = match best {
                None => true,
                Some((bc, bri, _)) => {
                    cov > bc
                        || (cov == bc
                            && self.rings.rings()[ri].processing_delay_ms < self.rings.rings()[bri].processing_delay_ms)
                }
            };
            if take {
                best = Some((cov, ri, idx));
            }
        }
        best
    }

    /// Opens one PoP. Returns `None` once every station is assigned or the
    /// remaining ones cannot be covered; those are then listed as unassignable.
    pub fn step(&mut self) -> Option<Selection> {
        if self.finished {
            return None;
        }
        if self.unassigned.is_empty() {
            self.finished = true;
            return None;
        }
        let best = self.best_candidate().filter(|&(cov, _, _)| cov > 0);
        let Some((coverage, ring_index, candidate)) = best else {
            self.result.unassignable = self.unassigned.iter().map(|&i| self.bss[i].id).collect();
            self.unassigned.clear();
            self.finished = true;
            return None;
        };
        let ring = &self.rings.rings()[ring_index];
        let reach = self.grid.reach[ring_index].expect("covering ring has a reach");
        let site = self.grid.layout.location(candidate);

        let mut in_reach: Vec<(T, usize)> = self
            .unassigned
            .iter()
            .filter(|&&i| ball_contains(site, reach, self.bss[i].location))
            .map(|&i| (self.bss[i].location.distance(&site), i))
            .collect();
        in_reach.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
        in_reach.truncate(ring.max_bss);

        let pop_id = self.result.pops.len();
        self.result.pops.push(PlacedPop { id: pop_id, location: site, ring_index, ring: ring.clone() });
        let mut assigned = Vec::with_capacity(in_reach.len());
        for (distance, i) in in_reach {
            let bs = &self.bss[i];
            for (matrix, m) in self.grid.matrices.iter_mut().zip(&self.grid.reach) {
                if let Some(m) = m {
                    self.grid.layout.for_each_in_ball(bs.location, *m, |c| {
                        debug_assert!(matrix[c] > 0, "coverage count went negative at candidate {c}");
                        matrix[c] = matrix[c].saturating_sub(1);
                    });
                }
            }
            self.unassigned.remove(&i);
            self.result.assignments.push(Assignment {
                bs_id: bs.id,
                pop_id,
                distance_km: distance,
                rtt_ms: rtt(bs.location, site, ring, self.budget.radio_delay_ms, &self.budget.model),
            });
            assigned.push(bs.id);
        }
        Some(Selection { pop_id, candidate, ring_index, coverage, assigned })
    }

    pub fn run(mut self) -> PlacementResult<T> {
        while self.step().is_some() {}
        self.result
    }
}

/// Greedy ring-aware PoP placement over all base stations.
pub fn place_mec_pops<T: Scalar>(
    bss: &[BaseStation<T>],
    rings: &RingHierarchy<T>,
    layout: CandidateLayout<T>,
    budget: LatencyBudget<T>,
) -> PlacementResult<T> {
    PlacementEngine::new(bss, rings, layout, budget).run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fibre() -> DelayModel<f64> {
        DelayModel::linear(200.0).unwrap()
    }

    fn ring(name: &str, rank: i64, p: f64, cap: usize) -> NetworkRing<f64> {
        NetworkRing::new(name, rank, p, cap)
    }

    fn bs(id: usize, x1: f64, x2: f64) -> BaseStation<f64> {
        BaseStation { id, location: Point2D::new(x1, x2), cell_index: 0 }
    }

    #[test]
    fn rtt_examples() {
        let r = ring("a", 0, 2.0, 1);
        let o = Point2D::new(0.0, 0.0);
        assert_relative_eq!(rtt(o, Point2D::new(100.0, 0.0), &r, 1.0, &fibre()), 6.0);
        assert_relative_eq!(rtt(o, o, &r, 1.0, &fibre()), 5.0);
        assert_eq!(rtt(o, o, &ring("z", 0, 0.0, 1), 0.0, &fibre()), 0.0);
    }

    #[test]
    fn max_distance_examples() {
        let r = ring("a", 0, 2.0, 1);
        assert_relative_eq!(max_assignment_distance(&r, 10.0, 1.0, &fibre()).unwrap(), 500.0);
        assert_eq!(max_assignment_distance(&r, 4.0, 1.0, &fibre()), None);
        assert_eq!(max_assignment_distance(&r, 5.0, 1.0, &fibre()), Some(0.0));
    }

    #[test]
    fn delay_model_inverse() {
        let m = fibre();
        for d in [0.0, 0.5, 17.0, 1234.5] {
            assert_relative_eq!(m.inverse(m.delay(d)), d, max_relative = 1e-15);
        }
        assert!(DelayModel::linear(0.0).is_err());
    }

    #[test]
    fn hierarchy_validation() {
        assert!(RingHierarchy::<f64>::new(vec![]).is_err());
        assert!(RingHierarchy::new(vec![ring("a", 0, 2.0, 1), ring("b", 1, 2.0, 1)]).is_err());
        assert!(RingHierarchy::new(vec![ring("a", 0, 2.0, 1), ring("b", 0, 3.0, 1)]).is_err());
        assert!(RingHierarchy::new(vec![ring("a", 0, 2.0, 0)]).is_err());
        let h = RingHierarchy::new(vec![ring("b", 5, 3.0, 1), ring("a", 1, 1.0, 1)]).unwrap();
        assert_eq!(h.rings()[0].name, "a");
    }

    #[test]
    fn ball_scan_matches_bruteforce() {
        let layout = CandidateLayout::with_dims(Rect::new(-1.0, 3.0, 0.0, 2.0).unwrap(), 17, 9).unwrap();
        for (c, r) in [((0.3, 0.7), 0.5), ((-1.0, 2.0), 0.26), ((5.0, 1.0), 2.5), ((1.0, 1.0), 0.0), ((1.0, 1.0), 9.0)]
        {
            let center = Point2D::new(c.0, c.1);
            let mut got = Vec::new();
            layout.for_each_in_ball(center, r, |i| got.push(i));
            let want: Vec<usize> = (0..layout.len()).filter(|&i| layout.location(i).distance(&center) <= r).collect();
            assert_eq!(got, want, "center {c:?} r {r}");
        }
    }

    fn budget(rtt_budget_ms: f64) -> LatencyBudget<f64> {
        LatencyBudget { rtt_budget_ms, radio_delay_ms: 0.0, model: DelayModel::linear(1.0).unwrap() }
    }

    #[test]
    fn candidate_matrix_counts() {
        let rings = RingHierarchy::new(vec![ring("a", 0, 0.0, 10), ring("dead", 1, 5.0, 10)]).unwrap();
        let layout = CandidateLayout::with_dims(Rect::new(0.0, 4.0, 0.0, 4.0).unwrap(), 8, 8).unwrap();
        // m_M = 0.5·budget·1 = 1 km for ring a; ring dead needs 10 ms of processing
        let b = budget(2.0);
        let one = build_candidate_matrices(&[bs(0, 2.0, 2.0)], &rings, layout, &b);
        for i in 0..layout.len() {
            let inside = layout.location(i).distance(&Point2D::new(2.0, 2.0)) <= 1.0;
            assert_eq!(one.matrices[0][i], inside as u32);
        }
        assert!(one.matrices[1].iter().all(|&v| v == 0));
        assert_eq!(one.reach[1], None);

        let four = [bs(0, 1.0, 1.0), bs(1, 1.5, 1.0), bs(2, 1.0, 1.5), bs(3, 1.5, 1.5)];
        let g = build_candidate_matrices(&four, &rings, layout, &b);
        let x0 = (0..layout.len()).find(|&i| layout.location(i) == Point2D::new(1.25, 1.25)).unwrap();
        assert_eq!(g.matrices[0][x0], 4);
    }

    #[test]
    fn single_station() {
        let rings = RingHierarchy::new(vec![ring("a", 0, 0.0, 3)]).unwrap();
        let layout = CandidateLayout::with_dims(Rect::new(0.0, 4.0, 0.0, 4.0).unwrap(), 8, 8).unwrap();
        let res = place_mec_pops(&[bs(7, 3.1, 0.2)], &rings, layout, budget(2.0));
        assert_eq!(res.pops.len(), 1);
        assert_eq!(res.assignments.len(), 1);
        assert_eq!(res.assignments[0].bs_id, 7);
        assert!(res.assignments[0].distance_km <= 1.0);
        assert!(res.unassignable.is_empty());
    }

    #[test]
    fn empty_and_infeasible() {
        let rings = RingHierarchy::new(vec![ring("a", 0, 3.0, 3)]).unwrap();
        let layout = CandidateLayout::with_dims(Rect::new(0.0, 4.0, 0.0, 4.0).unwrap(), 4, 4).unwrap();
        assert_eq!(place_mec_pops(&[], &rings, layout, budget(2.0)), PlacementResult::default());
        let res = place_mec_pops(&[bs(0, 1.0, 1.0), bs(1, 2.0, 2.0)], &rings, layout, budget(2.0));
        assert!(res.pops.is_empty());
        assert_eq!(res.unassignable, vec![0, 1]);
    }

    #[test]
    fn collinear_middle_candidate() {
        // candidates at 0.5, 1.5, ..., 9.5; stations at 3.5, 4.5, 5.5 (spacing 1), reach 2
        let rings = RingHierarchy::new(vec![ring("a", 0, 0.0, 10), ring("b", 1, 1.0, 10)]).unwrap();
        let layout = CandidateLayout::with_dims(Rect::new(0.0, 10.0, 0.0, 1.0).unwrap(), 10, 1).unwrap();
        let bss = [bs(0, 3.5, 0.5), bs(1, 4.5, 0.5), bs(2, 5.5, 0.5)];
        // ring a: reach 0.5·(4 − 0) = 2; ring b: 0.5·(4 − 2) = 1
        let res = place_mec_pops(&bss, &rings, layout, budget(4.0));
        // brute force over all candidates: ring a covers all three at 3.5, 4.5 and 5.5; lowest index wins
        let covering: Vec<usize> = (0..layout.len())
            .filter(|&i| bss.iter().all(|b| b.location.distance(&layout.location(i)) <= 2.0))
            .collect();
        assert_eq!(covering, vec![3, 4, 5]);
        assert_eq!(res.pops.len(), 1);
        assert_eq!(res.pops[0].ring.name, "a");
        assert_eq!(res.pops[0].location, layout.location(3));
    }

    #[test]
    fn exact_middle_when_reach_is_tight() {
        let rings = RingHierarchy::new(vec![ring("a", 0, 0.0, 10)]).unwrap();
        let layout = CandidateLayout::with_dims(Rect::new(0.0, 10.0, 0.0, 1.0).unwrap(), 10, 1).unwrap();
        let bss = [bs(0, 3.5, 0.5), bs(1, 4.5, 0.5), bs(2, 5.5, 0.5)];
        let res = place_mec_pops(&bss, &rings, layout, budget(2.0));
        assert_eq!(res.pops.len(), 1);
        assert_eq!(res.pops[0].location, Point2D::new(4.5, 0.5));
        assert_eq!(res.assignments.len(), 3);
    }

    #[test]
    fn ties_prefer_faster_ring() {
        let rings = RingHierarchy::new(vec![ring("b", 1, 0.5, 10), ring("a", 0, 0.25, 10)]).unwrap();
        let layout = CandidateLayout::with_dims(Rect::new(0.0, 10.0, 0.0, 1.0).unwrap(), 10, 1).unwrap();
        let bss = [bs(0, 4.5, 0.5), bs(1, 5.5, 0.5), bs(2, 6.5, 0.5)];
        // both rings reach at least 1 km so each has a candidate covering 3
        let res = place_mec_pops(&bss, &rings, layout, budget(3.0));
        assert_eq!(res.pops.len(), 1);
        assert_eq!(res.pops[0].ring.name, "a");
    }

    #[test]
    fn capacity_forces_second_pop() {
        let rings = RingHierarchy::new(vec![ring("a", 0, 0.0, 2)]).unwrap();
        let layout = CandidateLayout::with_dims(Rect::new(0.0, 10.0, 0.0, 1.0).unwrap(), 10, 1).unwrap();
        let bss = [bs(0, 4.5, 0.5), bs(1, 5.5, 0.5), bs(2, 3.5, 0.5)];
        let mut engine = PlacementEngine::new(&bss, &rings, layout, budget(2.0));
        let first = engine.step().unwrap();
        assert_eq!(first.coverage, 3);
        assert_eq!(engine.result().pops[0].location, Point2D::new(4.5, 0.5));
        // nearest two: the co-located station and then the lower id at distance 1
        assert_eq!(first.assigned, vec![0, 1]);
        let second = engine.step().unwrap();
        assert_eq!(second.coverage, 1);
        assert_eq!(second.assigned, vec![2]);
        assert!(engine.step().is_none());
        let res = engine.run();
        assert_eq!(res.pops.len(), 2);
        assert!(res.unassignable.is_empty());
    }
}
