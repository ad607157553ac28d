//! Maximal t-separated point sets on the torus: construction by dart
//! throwing plus grid repair, covering certificates, and the packing
//! bounds that control how many separated points fit in a ball.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::lemma1_bound;
use crate::error::{Error, Result};
use crate::index::PeriodicIndex;
use crate::rng::{stream, KeyedRng};
use crate::torus::{euclidean_distance, reduce, TorusPoint, TorusSpec, TAU};

/// Separation used for the site set of the coloring.
pub const SITE_SEPARATION: f64 = 1.0 / 3.0;

/// Cap on the dart-throwing failure budget; the grid repair pass finishes
/// whatever the darts leave open.
pub const MAX_DART_FAILURES: usize = 100_000;

/// Default recursion depth for adaptive covering refinement below the grid
/// pitch. Deep enough that the last cells are smaller than `TAU`, so any
/// cell left undecided can take a new member.
pub const DEFAULT_REFINE_DEPTH: usize = 40;

const MAX_WITNESSES: usize = 100_000;
const BLOCK_CHUNK: u64 = 64;
const FILL_CHUNK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Uniform darts until a run of consecutive rejections, then a grid pass
    /// anchored at the first dart.
    RandomDarts,
    /// Greedy insertion over a grid whose offset is drawn from the seed.
    GridGreedy,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::RandomDarts => "random-darts",
            Strategy::GridGreedy => "grid-greedy",
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-darts" => Ok(Strategy::RandomDarts),
            "grid-greedy" => Ok(Strategy::GridGreedy),
            other => Err(Error::InvalidParameter(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Default certification pitch `t / (4 sqrt(n))`, giving slack `t / 8`.
pub fn default_pitch(t: f64, n: usize) -> f64 {
    t / (4.0 * (n as f64).sqrt())
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub strategy: Strategy,
    /// Grid pitch for repair and certification; defaults to [`default_pitch`].
    pub pitch: Option<f64>,
    pub refine_depth: usize,
    /// Consecutive dart rejections before stopping; defaults to
    /// `min(10^4 |P|, MAX_DART_FAILURES)`.
    pub dart_failures: Option<usize>,
    /// Insertions allowed while repairing a single block before giving up.
    pub max_repairs: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            strategy: Strategy::RandomDarts,
            pitch: None,
            refine_depth: DEFAULT_REFINE_DEPTH,
            dart_failures: None,
            max_repairs: 4096,
        }
    }
}

/// Outcome of a covering check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringCertificate {
    pub radius: f64,
    /// Effective pitch, at most the requested one.
    pub pitch: f64,
    /// Nearest-member queries spent on block, grid and sub-cell centres.
    pub evaluated: u64,
    pub refine_depth: usize,
    pub refined_cells: u64,
    /// Grid or refined points farther than `radius` from every member.
    pub uncovered: u64,
    /// Cells that could be neither certified nor refuted at the depth limit.
    pub inconclusive: u64,
    /// Largest nearest-member distance at any evaluated centre, a lower
    /// bound on the covering radius.
    pub max_grid_distance: f64,
    #[serde(skip)]
    pub witnesses: Vec<Vec<f64>>,
}

impl CoveringCertificate {
    pub fn passed(&self) -> bool {
        self.uncovered == 0 && self.inconclusive == 0
    }
}

/// A t-separated point set on a torus, optionally certified maximal.
#[derive(Clone, Debug)]
pub struct SeparatedSet {
    t: f64,
    index: PeriodicIndex,
    certificate: Option<CoveringCertificate>,
    strategy: Option<Strategy>,
}

impl SeparatedSet {
    /// Validates that all pairwise torus distances are at least `t - TAU`.
    pub fn new(spec: TorusSpec, t: f64, points: &[TorusPoint]) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::InvalidParameter(format!("separation {t} must be positive")));
        }
        let mut index = PeriodicIndex::new(spec, t);
        for p in points {
            if p.coords().len() != spec.n() {
                return Err(Error::DimensionMismatch {
                    expected: spec.n(),
                    got: p.coords().len(),
                });
            }
            let mut clash = None;
            index.for_each_within(p.coords(), t - TAU, |id, d| {
                if d < t - TAU && clash.is_none() {
                    clash = Some((id, d));
                }
            });
            if let Some((first, distance)) = clash {
                return Err(Error::NotSeparated {
                    first,
                    second: index.len(),
                    distance,
                    required: t,
                });
            }
            index.insert(p.coords());
        }
        Ok(Self {
            t,
            index,
            certificate: None,
            strategy: None,
        })
    }

    pub fn spec(&self) -> &TorusSpec {
        self.index.spec()
    }

    pub fn separation(&self) -> f64 {
        self.t
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn point(&self, id: usize) -> &[f64] {
        self.index.point(id)
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.index.points()
    }

    pub fn index(&self) -> &PeriodicIndex {
        &self.index
    }

    pub fn strategy(&self) -> Option<Strategy> {
        self.strategy
    }

    /// Stored certificate, present only if a covering check at radius `t`
    /// has passed.
    pub fn certificate(&self) -> Option<&CoveringCertificate> {
        self.certificate.as_ref()
    }

    pub fn is_certified(&self) -> bool {
        self.certificate.is_some()
    }

    /// Run [`verify_covering`] at radius `t` and keep the certificate on success.
    pub fn certify(&mut self, pitch: f64, refine_depth: usize) -> Result<CoveringCertificate> {
        let cert = verify_covering(self, self.t, pitch, refine_depth)?;
        if cert.passed() {
            self.certificate = Some(cert.clone());
        }
        Ok(cert)
    }

    /// Smallest pairwise torus distance (infinity for fewer than two points).
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        let mut radius = 2.0 * self.t;
        loop {
            for (id, p) in self.points().enumerate() {
                self.index.for_each_within(p, radius, |other, d| {
                    if other != id && d < best {
                        best = d;
                    }
                });
            }
            if best.is_finite() || self.len() < 2 || radius >= self.spec().diameter() {
                return best;
            }
            radius = (radius * 2.0).min(self.spec().diameter());
        }
    }

    /// Members at torus distance `<= s` from `p`.
    pub fn count_within(&self, p: &[f64], s: f64) -> Result<usize> {
        let limit = self.spec().period() / 2.0 - self.t / 2.0;
        if !(s >= 0.0) || s >= limit {
            return Err(Error::Precondition(format!(
                "radius {s} must lie in [0, {limit}) so the torus does not fold the ball"
            )));
        }
        if p.len() != self.spec().n() {
            return Err(Error::DimensionMismatch {
                expected: self.spec().n(),
                got: p.len(),
            });
        }
        Ok(self.index.count_within(p, s))
    }
}

/// Cubic grid on the fundamental domain, grouped into aligned blocks of
/// `2^levels` points per axis so that sweeps can skip whole blocks.
#[derive(Clone, Debug)]
struct Grid {
    n: usize,
    period: f64,
    blocks_per_axis: u64,
    levels: usize,
    pitch: f64,
    offset: Vec<f64>,
}

impl Grid {
    /// Blocks are as coarse as possible without exceeding `max_block`.
    fn new(spec: &TorusSpec, requested_pitch: f64, max_block: f64, offset: Vec<f64>) -> Result<Self> {
        let mut levels = 0;
        while requested_pitch * f64::from(1u32 << (levels + 1)) <= max_block && levels < 20 {
            levels += 1;
        }
        let block = requested_pitch * f64::from(1u32 << levels);
        let blocks_per_axis = (spec.period() / block).ceil().max(1.0);
        let per_axis = blocks_per_axis * f64::from(1u32 << levels);
        if per_axis.powi(spec.n() as i32) > 1e15 {
            return Err(Error::InvalidParameter(format!(
                "certification grid of {per_axis}^{} points is too large",
                spec.n()
            )));
        }
        Ok(Self {
            n: spec.n(),
            period: spec.period(),
            blocks_per_axis: blocks_per_axis as u64,
            levels,
            pitch: spec.period() / per_axis,
            offset,
        })
    }

    fn block_count(&self) -> u64 {
        self.blocks_per_axis.pow(self.n as u32)
    }

    fn block_side(&self) -> f64 {
        self.pitch * f64::from(1u32 << self.levels)
    }

    /// Centre of a block: the midpoint of the grid points it contains.
    fn block_center_into(&self, mut linear: u64, out: &mut [f64]) {
        let span = f64::from(1u32 << self.levels);
        for (axis, slot) in out.iter_mut().enumerate() {
            let b = (linear % self.blocks_per_axis) as f64;
            linear /= self.blocks_per_axis;
            *slot = reduce(self.offset[axis] + (b * span + (span - 1.0) / 2.0) * self.pitch, self.period);
        }
    }
}

#[derive(Default)]
struct CoverTally {
    evaluated: u64,
    refined: u64,
    uncovered: u64,
    inconclusive: u64,
    max_grid_distance: f64,
    witnesses: Vec<Vec<f64>>,
}

impl CoverTally {
    fn witness(&mut self, p: &[f64]) {
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(p.to_vec());
        }
    }

    fn merge(&mut self, other: CoverTally) {
        self.evaluated += other.evaluated;
        self.refined += other.refined;
        self.uncovered += other.uncovered;
        self.inconclusive += other.inconclusive;
        self.max_grid_distance = self.max_grid_distance.max(other.max_grid_distance);
        let room = MAX_WITNESSES.saturating_sub(self.witnesses.len());
        self.witnesses.extend(other.witnesses.into_iter().take(room));
    }
}

struct Refiner<'a> {
    index: &'a PeriodicIndex,
    radius: f64,
    period: f64,
    sqrt_n: f64,
}

impl<'a> Refiner<'a> {
    fn new(index: &'a PeriodicIndex, radius: f64, grid: &Grid) -> Self {
        Self {
            index,
            radius,
            period: grid.period,
            sqrt_n: (grid.n as f64).sqrt(),
        }
    }

    /// Classify the cube of edge `side` centred at `center`. Returns true
    /// once an uncovered point is found; refining the rest of that cube
    /// would only trace the boundary of the same hole.
    fn cell(&self, center: &[f64], side: f64, depth_left: usize, tally: &mut CoverTally) -> bool {
        let d = self.index.nearest_distance(center);
        tally.evaluated += 1;
        tally.max_grid_distance = tally.max_grid_distance.max(d);
        let half_diag = side * self.sqrt_n / 2.0;
        if d <= self.radius - half_diag {
            return false;
        }
        if d > self.radius {
            tally.uncovered += 1;
            tally.witness(center);
            return true;
        }
        if depth_left == 0 {
            tally.inconclusive += 1;
            // still usable for repair if a site could go here
            if d >= self.radius - TAU {
                tally.witness(center);
            }
            return false;
        }
        tally.refined += 1;
        let n = center.len();
        let quarter = side / 4.0;
        let mut sub = vec![0.0; n];
        for corner in 0..(1usize << n) {
            for axis in 0..n {
                let sign = if corner >> axis & 1 == 1 { 1.0 } else { -1.0 };
                sub[axis] = reduce(center[axis] + sign * quarter, self.period);
            }
            if self.cell(&sub, side / 2.0, depth_left - 1, tally) {
                return true;
            }
        }
        false
    }
}

impl CoverTally {
    fn passed(&self) -> bool {
        self.uncovered == 0 && self.inconclusive == 0
    }
}

/// Tallies of a full sweep, split into blocks that passed and blocks that
/// did not (in block order).
struct Sweep {
    passed: CoverTally,
    failed: Vec<(u64, CoverTally)>,
}

fn check_block(refiner: &Refiner<'_>, grid: &Grid, block: u64, refine_depth: usize) -> CoverTally {
    let mut tally = CoverTally::default();
    let mut center = vec![0.0; grid.n];
    grid.block_center_into(block, &mut center);
    refiner.cell(&center, grid.block_side(), grid.levels + refine_depth, &mut tally);
    tally
}

fn sweep_grid(refiner: &Refiner<'_>, grid: &Grid, refine_depth: usize) -> Sweep {
    let total = grid.block_count();
    let chunks = total.div_ceil(BLOCK_CHUNK);
    let parts: Vec<Sweep> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut part = Sweep {
                passed: CoverTally::default(),
                failed: Vec::new(),
            };
            for block in chunk * BLOCK_CHUNK..((chunk + 1) * BLOCK_CHUNK).min(total) {
                let tally = check_block(refiner, grid, block, refine_depth);
                if tally.passed() {
                    part.passed.merge(tally);
                } else {
                    part.failed.push((block, tally));
                }
            }
            part
        })
        .collect();
    let mut sweep = Sweep {
        passed: CoverTally::default(),
        failed: Vec::new(),
    };
    for part in parts {
        sweep.passed.merge(part.passed);
        sweep.failed.extend(part.failed);
    }
    sweep
}

fn certificate_from(radius: f64, grid: &Grid, refine_depth: usize, tally: CoverTally) -> CoveringCertificate {
    CoveringCertificate {
        radius,
        pitch: grid.pitch,
        evaluated: tally.evaluated,
        refine_depth,
        refined_cells: tally.refined,
        uncovered: tally.uncovered,
        inconclusive: tally.inconclusive,
        max_grid_distance: tally.max_grid_distance,
        witnesses: tally.witnesses,
    }
}

/// Certify that every torus point lies within `radius` of the set.
///
/// Grid points of pitch `g` within `radius - g sqrt(n)/2` of the set certify
/// their whole cell. With `refine_depth = 0` that is the entire test; with a
/// positive depth, cells that fail it are split into `2^n` sub-cells
/// recursively, which can only turn failures into passes when the covering
/// radius genuinely is at most `radius`.
///
/// The sweep starts from blocks of grid cells and only descends into a
/// block whose centre is not already deep enough inside the covered region,
/// so the verdict equals that of visiting every grid point.
pub fn verify_covering(
    set: &SeparatedSet,
    radius: f64,
    grid_pitch: f64,
    refine_depth: usize,
) -> Result<CoveringCertificate> {
    verify_covering_index(set.index(), radius, grid_pitch, refine_depth)
}

pub(crate) fn verify_covering_index(
    index: &PeriodicIndex,
    radius: f64,
    grid_pitch: f64,
    refine_depth: usize,
) -> Result<CoveringCertificate> {
    let spec = index.spec();
    let n = spec.n();
    if !(grid_pitch > 0.0) {
        return Err(Error::InvalidParameter(format!("grid pitch {grid_pitch} must be positive")));
    }
    if grid_pitch * (n as f64).sqrt() / 2.0 >= radius {
        return Err(Error::GridTooCoarse {
            pitch: grid_pitch,
            radius,
            n,
        });
    }
    let grid = Grid::new(spec, grid_pitch, radius, vec![0.0; n])?;
    let refiner = Refiner::new(index, radius, &grid);
    let sweep = sweep_grid(&refiner, &grid, refine_depth);
    let mut tally = sweep.passed;
    for (_, failed) in sweep.failed {
        tally.merge(failed);
    }
    Ok(certificate_from(radius, &grid, refine_depth, tally))
}

/// Make a set cover at radius `t`: sweep once, then repair each failing
/// block in turn by inserting its witnesses until it passes. Insertions
/// only shrink distances, so blocks that already passed stay certified.
fn repair_and_certify(
    index: &mut PeriodicIndex,
    t: f64,
    pitch: f64,
    refine_depth: usize,
    max_repairs: usize,
) -> Result<CoveringCertificate> {
    let spec = *index.spec();
    let grid = Grid::new(&spec, pitch, t, vec![0.0; spec.n()])?;
    let sweep = sweep_grid(&Refiner::new(index, t, &grid), &grid, refine_depth);
    let mut tally = sweep.passed;
    let mut spent = CoverTally::default();
    for (block, mut failed) in sweep.failed {
        let mut repairs = 0;
        while !failed.passed() {
            if repairs == max_repairs {
                return Err(Error::CertificationFailed {
                    rounds: repairs,
                    uncovered: (failed.uncovered + failed.inconclusive) as usize,
                });
            }
            let before = index.len();
            for w in &failed.witnesses {
                if !index.any_closer_than(w, t - TAU) {
                    index.insert(w);
                }
            }
            // the sweep's witnesses may have been covered by earlier repairs
            if index.len() == before && repairs > 0 {
                return Err(Error::CertificationFailed {
                    rounds: repairs + 1,
                    uncovered: (failed.uncovered + failed.inconclusive) as usize,
                });
            }
            spent.evaluated += failed.evaluated;
            spent.refined += failed.refined;
            failed = check_block(&Refiner::new(index, t, &grid), &grid, block, refine_depth);
            repairs += 1;
        }
        tally.merge(failed);
    }
    tally.evaluated += spent.evaluated;
    tally.refined += spent.refined;
    Ok(certificate_from(t, &grid, refine_depth, tally))
}

/// Collect grid points of a block that may be at least `cutoff` from every
/// member, skipping sub-blocks whose centre proves otherwise.
fn fill_candidates(
    index: &PeriodicIndex,
    grid: &Grid,
    center: &mut Vec<f64>,
    side: f64,
    level: usize,
    cutoff: f64,
    out: &mut Vec<Vec<f64>>,
) {
    if level == 0 {
        if !index.any_closer_than(center, cutoff) {
            out.push(center.clone());
        }
        return;
    }
    if index.nearest_distance(center) + side * (grid.n as f64).sqrt() / 2.0 < cutoff {
        return;
    }
    let quarter = side / 4.0;
    let base = center.clone();
    for corner in 0..(1usize << grid.n) {
        for axis in 0..grid.n {
            let sign = if corner >> axis & 1 == 1 { 1.0 } else { -1.0 };
            center[axis] = reduce(base[axis] + sign * quarter, grid.period);
        }
        fill_candidates(index, grid, center, side / 2.0, level - 1, cutoff, out);
    }
    center.copy_from_slice(&base);
}

/// Insert every grid point that is at least `t - TAU` from the set, block
/// by block. Candidates are found in parallel and inserted sequentially.
fn grid_fill(index: &mut PeriodicIndex, grid: &Grid, t: f64) {
    let total = grid.block_count();
    let mut start = 0;
    while start < total {
        let end = (start + FILL_CHUNK).min(total);
        let snapshot: &PeriodicIndex = index;
        let candidates: Vec<Vec<Vec<f64>>> = (start..end)
            .into_par_iter()
            .map(|block| {
                let mut center = vec![0.0; grid.n];
                grid.block_center_into(block, &mut center);
                let mut out = Vec::new();
                fill_candidates(snapshot, grid, &mut center, grid.block_side(), grid.levels, t - TAU, &mut out);
                out
            })
            .collect();
        for p in candidates.iter().flatten() {
            if !index.any_closer_than(p, t - TAU) {
                index.insert(p);
            }
        }
        start = end;
    }
}

fn throw_darts(index: &mut PeriodicIndex, t: f64, seed: u64, budget: Option<usize>) {
    let spec = *index.spec();
    let mut rng = KeyedRng::from_words(&[seed, stream::DARTS]);
    let mut dart = vec![0.0; spec.n()];
    let mut failures = 0usize;
    loop {
        let limit = budget.unwrap_or_else(|| (10_000 * index.len().max(1)).min(MAX_DART_FAILURES));
        if failures >= limit {
            break;
        }
        for c in dart.iter_mut() {
            *c = rng.unit() * spec.period();
        }
        if index.any_closer_than(&dart, t - TAU) {
            failures += 1;
        } else {
            index.insert(&dart);
            failures = 0;
        }
    }
}

/// Build a maximal `t`-separated subset of the torus and certify it.
///
/// Deterministic in `(seed, options)`. Requires `0 < t <= R/2`.
pub fn build_maximal_separated(
    spec: TorusSpec,
    t: f64,
    seed: u64,
    options: &BuildOptions,
) -> Result<SeparatedSet> {
    if !(t > 0.0) || t > spec.period() / 2.0 {
        return Err(Error::Precondition(format!(
            "separation {t} must lie in (0, R/2] for R = {}",
            spec.period()
        )));
    }
    let n = spec.n();
    let pitch = options.pitch.unwrap_or_else(|| default_pitch(t, n));
    if pitch * (n as f64).sqrt() / 2.0 >= t {
        return Err(Error::GridTooCoarse { pitch, radius: t, n });
    }
    let mut index = PeriodicIndex::new(spec, t);
    if options.strategy == Strategy::RandomDarts {
        throw_darts(&mut index, t, seed, options.dart_failures);
    }
    let offset = if index.is_empty() {
        let mut rng = KeyedRng::from_words(&[seed, stream::DARTS]);
        (0..n).map(|_| rng.unit() * spec.period()).collect()
    } else {
        index.point(0).to_vec()
    };
    let fill = Grid::new(&spec, pitch, t, offset)?;
    grid_fill(&mut index, &fill, t);

    let certificate = repair_and_certify(&mut index, t, pitch, options.refine_depth, options.max_repairs)?;
    Ok(SeparatedSet {
        t,
        index,
        certificate: Some(certificate),
        strategy: Some(options.strategy),
    })
}

/// `(2s/t + 1)^n`: how many `t`-separated points fit within distance `s`
/// of any point.
pub fn packing_bound(t: f64, s: f64, n: usize) -> f64 {
    (2.0 * s / t + 1.0).powi(n as i32)
}

/// `(4 sqrt(n) R)^n`, the size bound for a 1/3-separated set on the torus.
pub fn max_count_bound(spec: &TorusSpec) -> f64 {
    lemma1_bound(spec.n(), spec.period()).final_bound
}

/// Greedy `s`-separated subset of a 1-separated Euclidean set, scanning in
/// input order. Returns ascending indices into `points`.
pub fn greedy_separated_subset(points: &[Vec<f64>], s: f64) -> Result<Vec<usize>> {
    if !(s >= 1.0) {
        return Err(Error::InvalidParameter(format!("separation {s} must be at least 1")));
    }
    check_one_separated(points)?;
    let mut kept: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if kept
            .iter()
            .all(|&j| euclidean_distance(p, &points[j]) >= s - TAU)
        {
            kept.push(i);
        }
    }
    Ok(kept)
}

/// Pairwise Euclidean distances at least `1 - TAU` and a common dimension.
pub fn check_one_separated(points: &[Vec<f64>]) -> Result<()> {
    let Some(first) = points.first() else {
        return Ok(());
    };
    let n = first.len();
    for (i, p) in points.iter().enumerate() {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
        for (j, q) in points[..i].iter().enumerate() {
            let d = euclidean_distance(p, q);
            if d < 1.0 - TAU {
                return Err(Error::NotSeparated {
                    first: j,
                    second: i,
                    distance: d,
                    required: 1.0,
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::torus_distance;

    fn points(spec: &TorusSpec, raw: &[&[f64]]) -> Vec<TorusPoint> {
        raw.iter().map(|p| spec.wrap(p).unwrap()).collect()
    }

    #[test]
    fn circle_of_four_with_separation_two_has_two_points() {
        let spec = TorusSpec::new(1, 4.0).unwrap();
        for strategy in [Strategy::RandomDarts, Strategy::GridGreedy] {
            for seed in 0..5 {
                let opts = BuildOptions {
                    strategy,
                    ..Default::default()
                };
                let set = build_maximal_separated(spec, 2.0, seed, &opts).unwrap();
                assert_eq!(set.len(), 2, "{strategy} seed {seed}");
                assert!(set.is_certified());
            }
        }
    }

    #[test]
    fn one_dimensional_size_window() {
        // spacing in [1/3, 2/3] on a circle of length 10 forces 15..=30 points
        let spec = TorusSpec::new(1, 10.0).unwrap();
        for strategy in [Strategy::RandomDarts, Strategy::GridGreedy] {
            for seed in 0..10 {
                let opts = BuildOptions {
                    strategy,
                    ..Default::default()
                };
                let set = build_maximal_separated(spec, SITE_SEPARATION, seed, &opts).unwrap();
                assert!((15..=30).contains(&set.len()), "{}", set.len());
                assert!(set.min_pairwise_distance() >= SITE_SEPARATION - TAU);
            }
        }
    }

    #[test]
    fn build_is_deterministic() {
        let spec = TorusSpec::new(2, 3.0).unwrap();
        let opts = BuildOptions::default();
        let a = build_maximal_separated(spec, SITE_SEPARATION, 11, &opts).unwrap();
        let b = build_maximal_separated(spec, SITE_SEPARATION, 11, &opts).unwrap();
        assert!(a.points().eq(b.points()));
        let c = build_maximal_separated(spec, SITE_SEPARATION, 12, &opts).unwrap();
        assert!(!a.points().eq(c.points()));
    }

    #[test]
    fn built_sets_are_separated_and_certified() {
        for (n, r) in [(2, 2.5), (2, 4.0), (3, 2.5)] {
            let spec = TorusSpec::new(n, r).unwrap();
            let set =
                build_maximal_separated(spec, SITE_SEPARATION, 3, &BuildOptions::default()).unwrap();
            let pts: Vec<&[f64]> = set.points().collect();
            for i in 0..pts.len() {
                for j in 0..i {
                    assert!(torus_distance(pts[i], pts[j], r) >= SITE_SEPARATION - TAU);
                }
            }
            let cert = verify_covering(&set, SITE_SEPARATION, default_pitch(SITE_SEPARATION, n), DEFAULT_REFINE_DEPTH)
                .unwrap();
            assert!(cert.passed());
            assert!((set.len() as f64) <= max_count_bound(&spec));
        }
    }

    #[test]
    fn covering_examples() {
        let spec = TorusSpec::new(1, 4.0).unwrap();
        let pair = SeparatedSet::new(spec, 2.0, &points(&spec, &[&[0.0], &[2.0]])).unwrap();
        assert!(verify_covering(&pair, 2.0, 0.1, 0).unwrap().passed());

        let single = SeparatedSet::new(spec, 2.0, &points(&spec, &[&[0.0]])).unwrap();
        let cert = verify_covering(&single, 1.0, 0.1, 0).unwrap();
        assert!(!cert.passed());
        assert!(cert.uncovered > 0);
        let cert = verify_covering(&single, 1.0, 0.1, 8).unwrap();
        assert!(!cert.passed());
        assert!(!cert.witnesses.is_empty());
        assert!(cert.witnesses.iter().all(|w| torus_distance(w, &[0.0], 4.0) > 1.0));
        assert!(cert.max_grid_distance > 1.9);

        assert!(matches!(
            verify_covering(&single, 1.0, 2.0, 0),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn refinement_certifies_what_the_plain_grid_cannot() {
        // two points at distance 2 on a circle of length 4: covering radius 1
        let spec = TorusSpec::new(1, 4.0).unwrap();
        let pair = SeparatedSet::new(spec, 1.0, &points(&spec, &[&[0.05], &[2.05]])).unwrap();
        let plain = verify_covering(&pair, 1.0, 0.2, 0).unwrap();
        assert!(!plain.passed());
        let refined = verify_covering(&pair, 1.0 + 1e-3, 0.2, 12).unwrap();
        assert!(refined.passed());
    }

    #[test]
    fn separation_is_validated() {
        let spec = TorusSpec::new(1, 10.0).unwrap();
        let err = SeparatedSet::new(spec, 1.0, &points(&spec, &[&[0.0], &[9.5]])).unwrap_err();
        assert!(matches!(err, Error::NotSeparated { .. }));
    }

    #[test]
    fn packing_bound_examples() {
        assert!((packing_bound(1.0 / 3.0, 2.0 / 3.0, 2) - 25.0).abs() < 1e-9);
        assert!((packing_bound(1.0 / 3.0, 5.0 / 3.0, 1) - 11.0).abs() < 1e-9);
        assert_eq!(packing_bound(1.0, 0.0, 5), 1.0);
    }

    #[test]
    fn count_within_examples() {
        let spec = TorusSpec::new(1, 10.0).unwrap();
        let raw: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let pts: Vec<TorusPoint> = raw.iter().map(|p| spec.wrap(p).unwrap()).collect();
        let set = SeparatedSet::new(spec, 1.0, &pts).unwrap();
        assert_eq!(set.count_within(&[0.0], 2.5).unwrap(), 5);
        assert_eq!(set.count_within(&[3.0], 0.0).unwrap(), 1);
        assert!(set.count_within(&[0.0], 4.5).is_err());
    }

    #[test]
    fn greedy_subset_examples() {
        let line: Vec<Vec<f64>> = (0..11).map(|i| vec![i as f64]).collect();
        assert_eq!(greedy_separated_subset(&line, 5.0).unwrap(), vec![0, 5, 10]);
        assert_eq!(greedy_separated_subset(&[vec![1.0, 2.0]], 7.0).unwrap(), vec![0]);
        let crowded = vec![vec![0.0], vec![0.5]];
        assert!(greedy_separated_subset(&crowded, 2.0).is_err());
        assert!(greedy_separated_subset(&line, 0.5).is_err());
    }

    #[test]
    fn max_count_bound_examples() {
        let b = max_count_bound(&TorusSpec::new(1, 10.0).unwrap());
        assert!((b - 40.0).abs() < 1e-9);
        let b = max_count_bound(&TorusSpec::new(2, 4.0).unwrap());
        assert!((b - 512.0).abs() < 1e-9);
    }

    #[test]
    fn strategy_parses() {
        assert_eq!("grid-greedy".parse::<Strategy>().unwrap(), Strategy::GridGreedy);
        assert!("spiral".parse::<Strategy>().is_err());
    }
}
