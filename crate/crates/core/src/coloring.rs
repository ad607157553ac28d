//! Random site selection and the red/blue color oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::default_sampling_probability;
use crate::error::{Error, Result};
use crate::index::PeriodicIndex;
use crate::rng::{derive_key, stream, unit_from_key, KeyedRng};
use crate::separated::{SeparatedSet, SITE_SEPARATION};
use crate::torus::{reduce, TorusSpec, TAU};

/// Sampled sites closer than this to another sampled site are discarded.
pub const EXCLUSION_RADIUS: f64 = 5.0 / 3.0;

/// Elimination threshold actually applied, so that surviving sites are
/// separated by more than `EXCLUSION_RADIUS + TAU`.
pub const EXCLUSION_CUTOFF: f64 = EXCLUSION_RADIUS + TAU;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
}

impl std::fmt::Display for Color {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Color::Red => "red",
            Color::Blue => "blue",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoringConfig {
    pub spec: TorusSpec,
    pub t: f64,
    pub x: f64,
    pub seed: u64,
    pub tie_tol: f64,
}

impl ColoringConfig {
    /// Site separation 1/3, `x = 20^{-n}`, tie tolerance `TAU`.
    pub fn new(spec: TorusSpec, seed: u64) -> Self {
        Self {
            spec,
            t: SITE_SEPARATION,
            x: default_sampling_probability(spec.n()),
            seed,
            tie_tol: TAU,
        }
    }

    pub fn with_x(mut self, x: f64) -> Self {
        self.x = x;
        self
    }

    /// Whether `x` is the default `20^{-n}`.
    pub fn uses_default_x(&self) -> bool {
        self.x == default_sampling_probability(self.spec.n())
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.x) {
            return Err(Error::InvalidParameter(format!("x = {} must lie in [0, 1]", self.x)));
        }
        if !(self.tie_tol >= 0.0) {
            return Err(Error::InvalidParameter("tie tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

/// Bernoulli(`x`) membership of each site, keyed by `(seed, site id)`.
pub fn sample_q(site_count: usize, config: &ColoringConfig) -> Vec<bool> {
    (0..site_count)
        .map(|id| unit_from_key(derive_key(&[config.seed, stream::Q_MEMBERSHIP, id as u64])) < config.x)
        .collect()
}

/// Keep the sampled sites with no other sampled site within 5/3.
pub fn filter_s(sites: &SeparatedSet, q_bits: &[bool]) -> Vec<bool> {
    let index = sites.index();
    (0..sites.len())
        .map(|id| {
            if !q_bits[id] {
                return false;
            }
            let mut alone = true;
            index.for_each_within(index.point(id), EXCLUSION_CUTOFF, |other, _| {
                if other != id && q_bits[other] {
                    alone = false;
                }
            });
            alone
        })
        .collect()
}

/// Number of other sites within the exclusion radius of `p`.
pub fn exclusion_neighbors(sites: &SeparatedSet, p: usize) -> Vec<usize> {
    let index = sites.index();
    let mut out = index.within(index.point(p), EXCLUSION_CUTOFF);
    out.retain(|&id| id != p);
    out
}

/// `x (1 - x)^{N(p)}`: `p` survives iff it is sampled and none of the
/// `N(p)` sites within 5/3 is.
pub fn s_inclusion_probability_exact(sites: &SeparatedSet, x: f64, p: usize) -> f64 {
    let count = exclusion_neighbors(sites, p).len();
    x * (1.0 - x).powi(count as i32)
}

/// Fraction of `trials` independent resamples in which `p` survives.
pub fn resample_s_frequency(
    sites: &SeparatedSet,
    config: &ColoringConfig,
    p: usize,
    trials: u64,
) -> f64 {
    let neighbors = exclusion_neighbors(sites, p);
    let drawn = |trial: u64, id: usize| {
        unit_from_key(derive_key(&[config.seed, stream::RESAMPLE, trial, id as u64])) < config.x
    };
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&trial| drawn(trial, p) && neighbors.iter().all(|&id| !drawn(trial, id)))
        .count();
    hits as f64 / trials.max(1) as f64
}

/// A site set with its sampled subsets and the color oracle.
#[derive(Clone, Debug)]
pub struct Coloring {
    config: ColoringConfig,
    sites: SeparatedSet,
    q_bits: Vec<bool>,
    s_bits: Vec<bool>,
    red_sites: PeriodicIndex,
    red_ids: Vec<usize>,
}

impl Coloring {
    /// Sample `Q` and filter it to `S`.
    pub fn new(sites: SeparatedSet, config: ColoringConfig) -> Result<Self> {
        config.validate()?;
        if sites.spec() != &config.spec {
            return Err(Error::InvalidParameter("site set and config disagree on the torus".into()));
        }
        let q_bits = sample_q(sites.len(), &config);
        let s_bits = filter_s(&sites, &q_bits);
        Self::assemble(sites, config, q_bits, s_bits)
    }

    /// Take `Q` and `S` as given. Only `S ⊆ Q` is enforced; the red-pair
    /// certificate is what checks the separation of `S`.
    pub fn from_parts(
        sites: SeparatedSet,
        config: ColoringConfig,
        q_bits: Vec<bool>,
        s_bits: Vec<bool>,
    ) -> Result<Self> {
        config.validate()?;
        if q_bits.len() != sites.len() || s_bits.len() != sites.len() {
            return Err(Error::InvalidParameter("membership vectors must match the site count".into()));
        }
        if s_bits.iter().zip(&q_bits).any(|(&s, &q)| s && !q) {
            return Err(Error::InvalidParameter("S must be a subset of Q".into()));
        }
        Self::assemble(sites, config, q_bits, s_bits)
    }

    fn assemble(
        sites: SeparatedSet,
        config: ColoringConfig,
        q_bits: Vec<bool>,
        s_bits: Vec<bool>,
    ) -> Result<Self> {
        let red_ids: Vec<usize> = (0..sites.len()).filter(|&i| s_bits[i]).collect();
        let red_sites = PeriodicIndex::from_points(
            *sites.spec(),
            EXCLUSION_RADIUS,
            red_ids.iter().map(|&i| sites.point(i)),
        );
        Ok(Self {
            config,
            sites,
            q_bits,
            s_bits,
            red_sites,
            red_ids,
        })
    }

    pub fn config(&self) -> &ColoringConfig {
        &self.config
    }

    pub fn spec(&self) -> &TorusSpec {
        self.sites.spec()
    }

    pub fn sites(&self) -> &SeparatedSet {
        &self.sites
    }

    pub fn q_bits(&self) -> &[bool] {
        &self.q_bits
    }

    pub fn s_bits(&self) -> &[bool] {
        &self.s_bits
    }

    pub fn q_ids(&self) -> Vec<usize> {
        (0..self.sites.len()).filter(|&i| self.q_bits[i]).collect()
    }

    /// Ids of the red sites, ascending.
    pub fn s_ids(&self) -> &[usize] {
        &self.red_ids
    }

    /// Index over the red sites only; its ids are positions in [`Self::s_ids`].
    pub fn red_site_index(&self) -> &PeriodicIndex {
        &self.red_sites
    }

    pub fn is_red_site(&self, id: usize) -> bool {
        self.s_bits[id]
    }

    /// Color of an arbitrary point of `E^n`.
    ///
    /// Red iff some site within `tie_tol` of the nearest distance is red,
    /// so cell boundaries of red cells are red.
    pub fn color(&self, point: &[f64]) -> Color {
        debug_assert_eq!(point.len(), self.spec().n());
        if self.red_ids.is_empty() {
            return Color::Blue;
        }
        let period = self.spec().period();
        let mut reduced = smallvec::SmallVec::<[f64; 4]>::new();
        reduced.extend(point.iter().map(|&c| reduce(c, period)));
        self.color_reduced(&reduced)
    }

    /// Color of a point already in the fundamental domain.
    pub fn color_reduced(&self, reduced: &[f64]) -> Color {
        if self.red_ids.is_empty() {
            return Color::Blue;
        }
        match self.sites.index().nearest(reduced, self.config.tie_tol) {
            Some(near) if near.ids.iter().any(|&id| self.s_bits[id]) => Color::Red,
            _ => Color::Blue,
        }
    }

    pub fn color_checked(&self, point: &[f64]) -> Result<Color> {
        if point.len() != self.spec().n() {
            return Err(Error::DimensionMismatch {
                expected: self.spec().n(),
                got: point.len(),
            });
        }
        Ok(self.color(point))
    }

    /// Smallest torus distance between two red sites (infinity if fewer than two).
    pub fn min_red_site_distance(&self) -> f64 {
        let index = &self.red_sites;
        let diameter = self.spec().diameter();
        let mut best = f64::INFINITY;
        for (i, p) in index.points().enumerate() {
            index.for_each_within(p, diameter, |j, d| {
                if j != i && d < best {
                    best = d;
                }
            });
        }
        best
    }

    /// Monte Carlo fraction of the torus colored red.
    pub fn red_density(&self, samples: u64, seed: u64) -> f64 {
        let n = self.spec().n();
        let period = self.spec().period();
        let red = (0..samples)
            .into_par_iter()
            .filter(|&i| {
                let mut rng = KeyedRng::from_words(&[seed, stream::RED_DENSITY, i]);
                let p: smallvec::SmallVec<[f64; 4]> = (0..n).map(|_| rng.unit() * period).collect();
                self.color_reduced(&p) == Color::Red
            })
            .count();
        red as f64 / samples.max(1) as f64
    }

    /// Red arcs of a one-dimensional coloring as closed intervals
    /// `[start, start + length]` with `start` in `[0, R)`.
    pub fn red_arcs_1d(&self) -> Result<Vec<(f64, f64)>> {
        if self.spec().n() != 1 {
            return Err(Error::Precondition("red arcs exist only in dimension 1".into()));
        }
        let period = self.spec().period();
        let mut order: Vec<usize> = (0..self.sites.len()).collect();
        order.sort_by(|&a, &b| self.sites.point(a)[0].total_cmp(&self.sites.point(b)[0]));
        if order.len() == 1 {
            return Ok(if self.s_bits[order[0]] { vec![(0.0, period)] } else { vec![] });
        }
        let m = order.len();
        let mut arcs = Vec::new();
        for (k, &id) in order.iter().enumerate() {
            if !self.s_bits[id] {
                continue;
            }
            let here = self.sites.point(id)[0];
            let prev = self.sites.point(order[(k + m - 1) % m])[0];
            let next = self.sites.point(order[(k + 1) % m])[0];
            let back = (here - prev).rem_euclid(period) / 2.0;
            let ahead = (next - here).rem_euclid(period) / 2.0;
            arcs.push((reduce(here - back, period), back + ahead));
        }
        Ok(arcs)
    }

    /// Exact red fraction in dimension one.
    pub fn exact_red_measure_1d(&self) -> Result<f64> {
        let arcs = self.red_arcs_1d()?;
        Ok(arcs.iter().fold(0.0, |acc, a| acc + a.1) / self.spec().period())
    }
}
