//! Periodic cell list over a point set on the torus.
//!
//! The fundamental domain is cut into `k^n` cubic buckets of edge `R / k`.
//! Range queries visit exactly the buckets whose slab intersects the query
//! box on every axis, wrapping modulo `k`, so results are exact for any
//! radius.

use smallvec::SmallVec;

use crate::torus::{torus_distance_sq, TorusSpec};

/// Upper limit on the total number of buckets.
const MAX_BUCKETS: usize = 1 << 22;

type AxisList = SmallVec<[u32; 8]>;

/// Result of a nearest-site query: all sites within `tie_tol` of the
/// minimum distance, in ascending id order.
#[derive(Clone, Debug, PartialEq)]
pub struct Nearest {
    pub ids: SmallVec<[usize; 4]>,
    pub distance: f64,
}

#[derive(Clone, Debug)]
pub struct PeriodicIndex {
    spec: TorusSpec,
    per_axis: usize,
    edge: f64,
    coords: Vec<f64>,
    buckets: Vec<Vec<u32>>,
    bucket_of: Vec<u32>,
}

impl PeriodicIndex {
    /// Empty index whose buckets have edge at least `min_edge` (when the
    /// bucket budget allows it).
    pub fn new(spec: TorusSpec, min_edge: f64) -> Self {
        let n = spec.n();
        let r = spec.period();
        let mut per_axis = ((r / min_edge).floor() as usize).max(1);
        let cap = (MAX_BUCKETS as f64).powf(1.0 / n as f64).floor() as usize;
        per_axis = per_axis.min(cap.max(1));
        let total = per_axis.pow(n as u32);
        Self {
            spec,
            per_axis,
            edge: r / per_axis as f64,
            coords: Vec::new(),
            buckets: vec![Vec::new(); total],
            bucket_of: Vec::new(),
        }
    }

    /// Index over reduced coordinates, ids assigned in input order.
    pub fn from_points<'a, I>(spec: TorusSpec, min_edge: f64, points: I) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut index = Self::new(spec, min_edge);
        for p in points {
            index.insert(p);
        }
        index
    }

    pub fn spec(&self) -> &TorusSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.bucket_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bucket_of.is_empty()
    }

    pub fn buckets_per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn bucket_edge(&self) -> f64 {
        self.edge
    }

    #[inline]
    pub fn point(&self, id: usize) -> &[f64] {
        let n = self.spec.n();
        &self.coords[id * n..(id + 1) * n]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.spec.n())
    }

    /// Members of a bucket, by flat bucket id.
    pub fn bucket_members(&self, bucket: usize) -> &[u32] {
        &self.buckets[bucket]
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    /// Flat bucket id of the stored member `id`.
    pub fn bucket_of(&self, id: usize) -> usize {
        self.bucket_of[id] as usize
    }

    #[inline]
    fn axis_bucket(&self, c: f64) -> usize {
        ((c / self.edge) as usize).min(self.per_axis - 1)
    }

    /// Flat bucket id for reduced coordinates.
    pub fn bucket_for(&self, coords: &[f64]) -> usize {
        let mut flat = 0;
        for &c in coords.iter().rev() {
            flat = flat * self.per_axis + self.axis_bucket(c);
        }
        flat
    }

    /// Append a point (reduced coordinates); returns its id.
    pub fn insert(&mut self, coords: &[f64]) -> usize {
        debug_assert_eq!(coords.len(), self.spec.n());
        let id = self.bucket_of.len();
        let bucket = self.bucket_for(coords);
        self.coords.extend_from_slice(coords);
        self.buckets[bucket].push(id as u32);
        self.bucket_of.push(bucket as u32);
        id
    }

    fn axis_range(&self, c: f64, radius: f64) -> AxisList {
        let k = self.per_axis as i64;
        if !(2.0 * radius < self.spec.period()) {
            return (0..k as u32).collect();
        }
        let lo = ((c - radius) / self.edge).floor() as i64;
        let hi = ((c + radius) / self.edge).floor() as i64;
        if hi - lo + 1 >= k {
            (0..k as u32).collect()
        } else {
            (lo..=hi).map(|i| i.rem_euclid(k) as u32).collect()
        }
    }

    /// Calls `f(id, distance_sq)` for every stored point in a bucket that
    /// intersects the box of half-width `radius` around `q`. Returning
    /// `false` from `f` stops the scan.
    fn scan_box<F: FnMut(usize, f64) -> bool>(&self, q: &[f64], radius: f64, mut f: F) {
        let n = self.spec.n();
        let period = self.spec.period();
        let lists: SmallVec<[AxisList; 4]> =
            q.iter().map(|&c| self.axis_range(c, radius)).collect();
        let mut cursor: SmallVec<[usize; 4]> = SmallVec::from_elem(0, n);
        loop {
            let mut flat = 0usize;
            for axis in (0..n).rev() {
                flat = flat * self.per_axis + lists[axis][cursor[axis]] as usize;
            }
            for &id in &self.buckets[flat] {
                let id = id as usize;
                let d2 = torus_distance_sq(q, self.point(id), period);
                if !f(id, d2) {
                    return;
                }
            }
            let mut axis = 0;
            loop {
                if axis == n {
                    return;
                }
                cursor[axis] += 1;
                if cursor[axis] < lists[axis].len() {
                    break;
                }
                cursor[axis] = 0;
                axis += 1;
            }
        }
    }

    /// Visit every member at torus distance `<= radius` from `q`.
    pub fn for_each_within<F: FnMut(usize, f64)>(&self, q: &[f64], radius: f64, mut f: F) {
        let r2 = radius * radius;
        self.scan_box(q, radius, |id, d2| {
            if d2 <= r2 {
                f(id, d2.sqrt());
            }
            true
        });
    }

    /// Ids (ascending) of members at torus distance `<= radius` from `q`.
    pub fn within(&self, q: &[f64], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(q, radius, |id, _| out.push(id));
        out.sort_unstable();
        out
    }

    pub fn count_within(&self, q: &[f64], radius: f64) -> usize {
        let mut count = 0;
        self.for_each_within(q, radius, |_, _| count += 1);
        count
    }

    /// Whether some member is at distance strictly less than `radius`.
    pub fn any_closer_than(&self, q: &[f64], radius: f64) -> bool {
        let r2 = radius * radius;
        let mut hit = false;
        self.scan_box(q, radius, |_, d2| {
            if d2 < r2 {
                hit = true;
                false
            } else {
                true
            }
        });
        hit
    }

    /// Minimum distance from `q` to the stored points, or infinity when empty.
    pub fn nearest_distance(&self, q: &[f64]) -> f64 {
        self.nearest_impl(q, 0.0).map_or(f64::INFINITY, |n| n.distance)
    }

    /// All members within `tie_tol` of the minimum distance. `None` when
    /// the index is empty.
    pub fn nearest(&self, q: &[f64], tie_tol: f64) -> Option<Nearest> {
        self.nearest_impl(q, tie_tol)
    }

    fn nearest_impl(&self, q: &[f64], tie_tol: f64) -> Option<Nearest> {
        if self.is_empty() {
            return None;
        }
        let full = self.spec.diameter();
        let mut radius = self.edge;
        loop {
            let mut best = f64::INFINITY;
            self.scan_box(q, radius, |_, d2| {
                if d2 < best {
                    best = d2;
                }
                true
            });
            let best = best.sqrt();
            // every point farther than `radius` lies outside the scanned box
            if best + tie_tol <= radius || radius >= full {
                let cutoff = best + tie_tol;
                let mut ids: SmallVec<[usize; 4]> = SmallVec::new();
                self.for_each_within(q, cutoff, |id, d| {
                    if d <= cutoff {
                        ids.push(id);
                    }
                });
                ids.sort_unstable();
                return Some(Nearest {
                    ids,
                    distance: best,
                });
            }
            radius = (radius * 2.0).min(full);
            if best.is_finite() {
                radius = radius.max(best + tie_tol);
            }
        }
    }

    /// Exhaustive nearest scan; used as an oracle in tests.
    pub fn nearest_brute_force(&self, q: &[f64], tie_tol: f64) -> Option<Nearest> {
        let period = self.spec.period();
        let dists: Vec<f64> = self
            .points()
            .map(|p| torus_distance_sq(q, p, period).sqrt())
            .collect();
        let best = dists.iter().cloned().fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            return None;
        }
        let ids = dists
            .iter()
            .enumerate()
            .filter(|(_, &d)| d <= best + tie_tol)
            .map(|(i, _)| i)
            .collect();
        Some(Nearest {
            ids,
            distance: best,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::KeyedRng;
    use crate::torus::torus_distance;

    fn random_points(spec: &TorusSpec, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = KeyedRng::from_words(&[seed]);
        (0..count)
            .map(|_| (0..spec.n()).map(|_| rng.unit() * spec.period()).collect())
            .collect()
    }

    #[test]
    fn every_member_in_exactly_one_recomputable_bucket() {
        let spec = TorusSpec::new(2, 7.3).unwrap();
        let pts = random_points(&spec, 500, 1);
        let index = PeriodicIndex::from_points(spec, 1.0 / 3.0, pts.iter().map(|p| p.as_slice()));
        let mut seen = vec![0; pts.len()];
        for b in 0..index.bucket_count() {
            for &id in index.bucket_members(b) {
                seen[id as usize] += 1;
                assert_eq!(index.bucket_for(index.point(id as usize)), b);
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        assert!(index.bucket_edge() >= 1.0 / 3.0);
    }

    #[test]
    fn nearest_and_range_match_brute_force() {
        for (n, r, count) in [(1, 10.0, 40), (2, 4.5, 150), (3, 2.5, 200), (2, 9.0, 3)] {
            let spec = TorusSpec::new(n, r).unwrap();
            let pts = random_points(&spec, count, n as u64);
            let index =
                PeriodicIndex::from_points(spec, 1.0 / 3.0, pts.iter().map(|p| p.as_slice()));
            for q in random_points(&spec, 2000, 99 + n as u64) {
                let fast = index.nearest(&q, 1e-9).unwrap();
                let slow = index.nearest_brute_force(&q, 1e-9).unwrap();
                assert_eq!(fast.ids, slow.ids);
                assert!((fast.distance - slow.distance).abs() < 1e-12);

                let s = 0.9;
                let fast = index.within(&q, s);
                let slow: Vec<usize> = pts
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| torus_distance(&q, p, r) <= s)
                    .map(|(i, _)| i)
                    .collect();
                assert_eq!(fast, slow);
            }
        }
    }

    #[test]
    fn equidistant_tie_reports_both() {
        let spec = TorusSpec::new(1, 10.0).unwrap();
        let index = PeriodicIndex::from_points(spec, 1.0 / 3.0, [[0.0].as_slice(), &[5.0]]);
        let nearest = index.nearest(&[2.5], 1e-9).unwrap();
        assert_eq!(nearest.ids.as_slice(), &[0, 1]);
        assert_eq!(nearest.distance, 2.5);
    }

    #[test]
    fn empty_index_has_no_nearest() {
        let spec = TorusSpec::new(2, 3.0).unwrap();
        let index = PeriodicIndex::new(spec, 0.5);
        assert!(index.nearest(&[0.0, 0.0], 0.0).is_none());
        assert_eq!(index.nearest_distance(&[1.0, 1.0]), f64::INFINITY);
    }
}
