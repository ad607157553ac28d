//! Attacks on a coloring: a certificate and a directed search for red pairs
//! at distance one, and Monte Carlo searches for blue copies of `l_m` and of
//! general separated sets.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{Color, Coloring, EXCLUSION_RADIUS};
use crate::error::{Error, Result};
use crate::rng::{stream, KeyedRng};
use crate::separated::{check_one_separated, default_pitch, verify_covering, CoveringCertificate, DEFAULT_REFINE_DEPTH, SITE_SEPARATION};
use crate::torus::{displacement, euclidean_distance, euclidean_norm, reduce, TAU};

/// Covering radius the red-pair argument needs (cell diameter at most 2/3).
pub const CELL_RADIUS: f64 = SITE_SEPARATION;

/// Two points count as a unit pair when their distance is within this of 1.
pub const UNIT_TOL: f64 = 1e-9;

const RED_SAMPLE_ATTEMPTS: usize = 64;

/// A finite 1-separated target set with its first point at the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSet {
    points: Vec<Vec<f64>>,
    diameter: f64,
    separation: f64,
}

impl KSet {
    /// Validates 1-separation and translates the first point to the origin.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("K must contain at least one point".into()));
        }
        check_one_separated(&points)?;
        let origin = points[0].clone();
        let points: Vec<Vec<f64>> = points
            .into_iter()
            .map(|p| p.iter().zip(&origin).map(|(a, b)| a - b).collect())
            .collect();
        let mut diameter: f64 = 0.0;
        let mut separation = f64::INFINITY;
        for i in 0..points.len() {
            for j in 0..i {
                let d = euclidean_distance(&points[i], &points[j]);
                diameter = diameter.max(d);
                separation = separation.min(d);
            }
        }
        Ok(Self {
            points,
            diameter,
            separation,
        })
    }

    /// `l_m` along the first axis of `E^n`.
    pub fn line(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter("need n >= 1 and m >= 1".into()));
        }
        let points = (0..m)
            .map(|i| {
                let mut p = vec![0.0; n];
                p[0] = i as f64;
                p
            })
            .collect();
        Ok(Self {
            points,
            diameter: (m - 1) as f64,
            separation: if m > 1 { 1.0 } else { f64::INFINITY },
        })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }
}

/// Isometry `k -> rotation . k + translation` (rotation may include a reflection).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    /// Row-major `n x n` orthogonal matrix.
    pub rotation: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
}

impl Placement {
    pub fn apply(&self, k: &[f64]) -> Vec<f64> {
        self.rotation
            .iter()
            .zip(&self.translation)
            .map(|(row, t)| row.iter().zip(k).map(|(a, b)| a * b).sum::<f64>() + t)
            .collect()
    }

    pub fn place(&self, k: &KSet) -> Vec<Vec<f64>> {
        k.points().iter().map(|p| self.apply(p)).collect()
    }

    /// `R^T R = I` within 1e-10 and distances preserved within 1e-9.
    pub fn validate(&self, k: &KSet) -> Result<()> {
        let n = self.rotation.len();
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|r| self.rotation[r][i] * self.rotation[r][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-10 {
                    return Err(Error::Precondition(format!(
                        "rotation is not orthogonal: (R^T R)[{i}][{j}] = {dot}"
                    )));
                }
            }
        }
        let placed = self.place(k);
        for i in 0..placed.len() {
            for j in 0..i {
                let before = euclidean_distance(&k.points()[i], &k.points()[j]);
                let after = euclidean_distance(&placed[i], &placed[j]);
                if (before - after).abs() > 1e-9 {
                    return Err(Error::Precondition(format!(
                        "placement distorts distance {i}-{j}: {before} -> {after}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `base + i direction` for `i = 0..m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineQuery {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
    pub m: usize,
}

impl LineQuery {
    pub fn point(&self, i: usize) -> Vec<f64> {
        self.base
            .iter()
            .zip(&self.direction)
            .map(|(b, d)| b + i as f64 * d)
            .collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.m).map(|i| self.point(i)).collect()
    }
}

/// Outcome of the structural check that no two red points are at distance one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RedPairCertificate {
    /// (a) covering radius at most 1/3, so every cell has diameter at most 2/3.
    pub covering_passed: bool,
    pub covering: Option<CoveringCertificate>,
    /// (b) red sites pairwise farther than 5/3 + TAU.
    pub separation_passed: bool,
    pub min_red_site_distance: f64,
    pub closest_red_sites: Option<(usize, usize)>,
    /// (c) `R - 2/3 > 1`.
    pub period_passed: bool,
    pub period: f64,
    pub red_sites: usize,
}

impl RedPairCertificate {
    pub fn passed(&self) -> bool {
        self.covering_passed && self.separation_passed && self.period_passed
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.covering_passed {
            let detail = self.covering.as_ref().map_or(String::new(), |c| {
                format!(
                    " ({} uncovered, {} inconclusive, first witness {:?})",
                    c.uncovered,
                    c.inconclusive,
                    c.witnesses.first()
                )
            });
            out.push(format!("(a) covering radius not certified at {CELL_RADIUS}{detail}"));
        }
        if !self.separation_passed {
            out.push(format!(
                "(b) red sites {:?} at distance {} <= {}",
                self.closest_red_sites,
                self.min_red_site_distance,
                EXCLUSION_RADIUS + TAU
            ));
        }
        if !self.period_passed {
            out.push(format!("(c) period {} does not exceed 5/3", self.period));
        }
        out
    }
}

/// Check the three facts that rule out red unit pairs.
///
/// A stored covering certificate at radius at most 1/3 is reused; otherwise
/// covering is verified from scratch at the default pitch.
pub fn red_pair_certificate(coloring: &Coloring) -> Result<RedPairCertificate> {
    let sites = coloring.sites();
    let n = sites.spec().n();
    let (covering_passed, covering) = match sites.certificate() {
        Some(cert) if cert.radius <= CELL_RADIUS && cert.passed() => (true, Some(cert.clone())),
        _ => {
            let cert = verify_covering(sites, CELL_RADIUS, default_pitch(CELL_RADIUS, n), DEFAULT_REFINE_DEPTH)?;
            (cert.passed(), Some(cert))
        }
    };

    let red = coloring.red_site_index();
    let ids = coloring.s_ids();
    let mut best = f64::INFINITY;
    let mut closest = None;
    for (i, p) in red.points().enumerate() {
        red.for_each_within(p, sites.spec().diameter(), |j, d| {
            if j < i && d < best {
                best = d;
                closest = Some((ids[j], ids[i]));
            }
        });
    }
    let period = sites.spec().period();
    Ok(RedPairCertificate {
        covering_passed,
        covering,
        separation_passed: best > EXCLUSION_RADIUS + TAU,
        min_red_site_distance: best,
        closest_red_sites: closest,
        period_passed: period - 2.0 * CELL_RADIUS > 1.0,
        period,
        red_sites: ids.len(),
    })
}

/// Two red points at distance one (within [`UNIT_TOL`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RedPair {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub distance: f64,
    pub trial: u64,
}

fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = euclidean_norm(&v);
        if norm > 1e-12 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// Uniform red point: a uniform red site, a uniform point of the ball of
/// radius `radius` around it, accepted if it lands in that site's cell.
/// Red cells sit inside disjoint equal balls, so accepted points are
/// uniform over the red set.
fn sample_red_point(coloring: &Coloring, rng: &mut KeyedRng, radius: f64) -> Option<(usize, Vec<f64>)> {
    let ids = coloring.s_ids();
    let n = coloring.spec().n();
    for _ in 0..RED_SAMPLE_ATTEMPTS {
        let pick = ((rng.unit() * ids.len() as f64) as usize).min(ids.len() - 1);
        let site = coloring.sites().point(ids[pick]);
        let dir = random_unit(rng, n);
        let r = radius * rng.unit().powf(1.0 / n as f64);
        let q: Vec<f64> = site.iter().zip(&dir).map(|(s, d)| s + r * d).collect();
        if coloring.color(&q) == Color::Red {
            return Some((pick, q));
        }
    }
    None
}

fn unit_pair_if_red(coloring: &Coloring, q: &[f64], dir: &[f64], trial: u64) -> Option<RedPair> {
    let q2: Vec<f64> = q.iter().zip(dir).map(|(a, d)| a + d).collect();
    if coloring.color(&q2) != Color::Red {
        return None;
    }
    let distance = euclidean_distance(q, &q2);
    ((distance - 1.0).abs() <= UNIT_TOL).then(|| RedPair {
        first: q.to_vec(),
        second: q2,
        distance,
        trial,
    })
}

fn red_pair_trial(coloring: &Coloring, trial: u64, seed: u64, radius: f64) -> Option<RedPair> {
    let n = coloring.spec().n();
    let period = coloring.spec().period();
    let mut rng = KeyedRng::from_words(&[seed, stream::RED_SEARCH, trial]);
    let (own, q) = sample_red_point(coloring, &mut rng, radius)?;
    let u = random_unit(&mut rng, n);
    if let Some(pair) = unit_pair_if_red(coloring, &q, &u, trial) {
        return Some(pair);
    }

    // Directed refinement: aim at every other red site that a unit step
    // could reach, then slide q towards it inside its own cell.
    let red = coloring.red_site_index();
    let reduced: Vec<f64> = q.iter().map(|&c| reduce(c, period)).collect();
    let mut targets = Vec::new();
    red.for_each_within(&reduced, 1.0 + 2.0 * radius + TAU, |j, _| {
        if j != own {
            targets.push(j);
        }
    });
    for j in targets {
        let delta = displacement(&reduced, red.point(j), period);
        let norm = euclidean_norm(&delta);
        if norm < 1e-12 {
            continue;
        }
        let dir: Vec<f64> = delta.iter().map(|d| d / norm).collect();
        for step in 0..8 {
            let lambda = radius * step as f64 / 8.0;
            let moved: Vec<f64> = q.iter().zip(&dir).map(|(a, d)| a + lambda * d).collect();
            if coloring.color(&moved) != Color::Red {
                break;
            }
            if let Some(pair) = unit_pair_if_red(coloring, &moved, &dir, trial) {
                return Some(pair);
            }
        }
    }
    None
}

/// Search for two red points at distance one. The first hit in trial order
/// is returned, independent of thread count.
pub fn red_pair_search(coloring: &Coloring, trials: u64, seed: u64) -> Option<RedPair> {
    if coloring.s_ids().is_empty() {
        return None;
    }
    let radius = coloring
        .sites()
        .certificate()
        .map_or(CELL_RADIUS, |c| c.radius.max(CELL_RADIUS));
    (0..trials)
        .into_par_iter()
        .find_map_first(|trial| red_pair_trial(coloring, trial, seed, radius))
}

fn line_for_trial(n: usize, period: f64, trial: u64, seed: u64, m: usize) -> LineQuery {
    let mut rng = KeyedRng::from_words(&[seed, stream::BLUE_LINE, trial]);
    let base: Vec<f64> = (0..n).map(|_| rng.unit() * 3.0 * period).collect();
    let direction = random_unit(&mut rng, n);
    LineQuery { base, direction, m }
}

fn all_blue(coloring: &Coloring, points: impl IntoIterator<Item = Vec<f64>>) -> bool {
    points.into_iter().all(|p| coloring.color(&p) == Color::Blue)
}

fn blue_line_search_unchecked(coloring: &Coloring, m: usize, trials: u64, seed: u64) -> Option<LineQuery> {
    let n = coloring.spec().n();
    let period = coloring.spec().period();
    (0..trials).into_par_iter().find_map_first(|trial| {
        let line = line_for_trial(n, period, trial, seed, m);
        all_blue(coloring, (0..m).map(|i| line.point(i))).then_some(line)
    })
}

/// Monte Carlo search for an all-blue copy of `l_m` with base in the box
/// `[0, 3R)^n` and a uniform direction.
pub fn blue_line_search(coloring: &Coloring, m: usize, trials: u64, seed: u64) -> Result<Option<LineQuery>> {
    if m < 2 {
        return Err(Error::Precondition(format!("m = {m} must be at least 2")));
    }
    Ok(blue_line_search_unchecked(coloring, m, trials, seed))
}

/// Largest `m <= m_max` for which [`blue_line_search`] succeeds with this
/// budget and seed; `m_max` stands in for "unbounded".
///
/// Trial `i` draws the same line for every `m`, so success is monotone in
/// `m` and in `trials`, which makes doubling plus bisection exact.
pub fn longest_blue_run(coloring: &Coloring, trials: u64, seed: u64, m_max: usize) -> usize {
    if coloring.s_ids().is_empty() {
        return m_max;
    }
    let found = |m: usize| blue_line_search_unchecked(coloring, m, trials, seed).is_some();
    if !found(1) {
        return 0;
    }
    let mut good = 1;
    let mut bad = None;
    while good < m_max {
        let next = (good * 2).min(m_max);
        if found(next) {
            good = next;
        } else {
            bad = Some(next);
            break;
        }
    }
    let Some(mut bad) = bad else {
        return good;
    };
    while bad - good > 1 {
        let mid = good + (bad - good) / 2;
        if found(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Exact longest blue run of a one-dimensional periodic coloring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "m", rename_all = "kebab-case")]
pub enum BlueRun {
    /// Largest `m` with an all-blue `l_m`.
    Finite(u64),
    /// Blue copies of `l_m` exist for every `m`.
    Unbounded,
    /// Blue copies exist for every `m` up to the cap; the search stopped there.
    AtLeast(u64),
}

impl std::fmt::Display for BlueRun {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BlueRun::Finite(m) => write!(f, "{m}"),
            BlueRun::Unbounded => f.write_str("unbounded"),
            BlueRun::AtLeast(m) => write!(f, ">={m}"),
        }
    }
}

impl BlueRun {
    /// Whether a Monte Carlo run length `m` is consistent with this value.
    pub fn dominates(&self, m: u64) -> bool {
        match *self {
            BlueRun::Finite(k) => m <= k,
            BlueRun::Unbounded | BlueRun::AtLeast(_) => true,
        }
    }
}

/// Sorted disjoint closed intervals on `[0, period]`.
struct ArcUnion {
    period: f64,
    spans: Vec<(f64, f64)>,
}

impl ArcUnion {
    fn insert_span(&mut self, lo: f64, hi: f64) {
        let at = self.spans.partition_point(|s| s.1 < lo);
        let mut lo = lo;
        let mut hi = hi;
        let mut end = at;
        while end < self.spans.len() && self.spans[end].0 <= hi {
            lo = lo.min(self.spans[end].0);
            hi = hi.max(self.spans[end].1);
            end += 1;
        }
        self.spans.splice(at..end, std::iter::once((lo, hi)));
    }

    /// Closed arc starting at `start` (reduced) with the given length.
    fn insert_arc(&mut self, start: f64, length: f64) {
        if length >= self.period {
            self.spans = vec![(0.0, self.period)];
            return;
        }
        let end = start + length;
        if end <= self.period {
            self.insert_span(start, end);
        } else {
            self.insert_span(start, self.period);
            self.insert_span(0.0, end - self.period);
        }
    }

    fn covers_circle(&self) -> bool {
        self.spans.len() == 1 && self.spans[0].0 <= 0.0 && self.spans[0].1 >= self.period
    }
}

/// Longest all-blue `l_m` when the red set is the union of the closed arcs
/// `[start, start + length]` on a circle of circumference `period`.
///
/// `{p, p+1, ..., p+m-1}` is blue iff `p` avoids every arc shifted by `-i`,
/// `i < m`; `m` grows until those shifts cover the circle. If `m` is an
/// exact multiple of the period the shifts repeat from then on.
pub fn max_blue_run_from_arcs(arcs: &[(f64, f64)], period: f64, m_cap: u64) -> BlueRun {
    if arcs.is_empty() {
        return BlueRun::Unbounded;
    }
    let mut union = ArcUnion {
        period,
        spans: Vec::new(),
    };
    for i in 0..m_cap {
        for &(start, length) in arcs {
            union.insert_arc(reduce(start - i as f64, period), length);
        }
        if union.covers_circle() {
            return BlueRun::Finite(i);
        }
        if ((i + 1) as f64) % period == 0.0 {
            return BlueRun::Unbounded;
        }
    }
    BlueRun::AtLeast(m_cap)
}

/// Exact longest blue run for a coloring of the circle.
pub fn exact_blue_runs_1d(coloring: &Coloring, m_cap: u64) -> Result<BlueRun> {
    let arcs = coloring.red_arcs_1d()?;
    Ok(max_blue_run_from_arcs(&arcs, coloring.spec().period(), m_cap))
}

/// Gram-Schmidt on a Gaussian frame: a Haar-random orthogonal matrix.
fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<f64>> {
    loop {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut degenerate = false;
        for _ in 0..n {
            let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            for _ in 0..2 {
                for c in &cols {
                    let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                    for (vi, ci) in v.iter_mut().zip(c) {
                        *vi -= dot * ci;
                    }
                }
            }
            let norm = euclidean_norm(&v);
            if norm < 1e-8 {
                degenerate = true;
                break;
            }
            cols.push(v.into_iter().map(|c| c / norm).collect());
        }
        if !degenerate {
            return (0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect();
        }
    }
}

/// Monte Carlo search for an all-blue isometric copy of `k`.
pub fn blue_placement_search(
    coloring: &Coloring,
    k: &KSet,
    trials: u64,
    seed: u64,
) -> Result<Option<Placement>> {
    let n = coloring.spec().n();
    let period = coloring.spec().period();
    if k.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: k.dim(),
        });
    }
    if k.diameter() > period - 1.0 + TAU {
        return Err(Error::Precondition(format!(
            "diameter {} of K exceeds R - 1 = {}",
            k.diameter(),
            period - 1.0
        )));
    }
    let found = (0..trials).into_par_iter().find_map_first(|trial| {
        let mut rng = KeyedRng::from_words(&[seed, stream::BLUE_PLACEMENT, trial]);
        let rotation = random_orthogonal(&mut rng, n);
        let translation: Vec<f64> = (0..n).map(|_| rng.unit() * 3.0 * period).collect();
        let placement = Placement {
            rotation,
            translation,
        };
        all_blue(coloring, k.points().iter().map(|p| placement.apply(p))).then_some(placement)
    });
    if let Some(p) = &found {
        p.validate(k)?;
    }
    Ok(found)
}
