//! Implicit periodic Voronoi decomposition of a site set.
//!
//! Cells are never built as polytopes. Membership is answered either by a
//! nearest-site query or by the bisector half-spaces of a site's nearby
//! neighbours, and the two routes are cross-checked in tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{Nearest, PeriodicIndex};
use crate::separated::SeparatedSet;
use crate::torus::{displacement, TAU};

/// `{x : normal . x <= offset}` in coordinates centred at a site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub neighbor: usize,
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    /// Signed distance of `x` past the bounding hyperplane (negative inside).
    pub fn excess(&self, x: &[f64]) -> f64 {
        let dot: f64 = self.normal.iter().zip(x).map(|(a, b)| a * b).sum();
        let norm = self.normal.iter().map(|a| a * a).sum::<f64>().sqrt();
        (dot - self.offset) / norm
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.excess(x) <= tol
    }
}

/// Fresh index over the members of `set`, ids matching the set's order.
pub fn build_index(set: &SeparatedSet) -> PeriodicIndex {
    PeriodicIndex::from_points(*set.spec(), set.separation(), set.points())
}

pub fn nearest(index: &PeriodicIndex, q: &[f64], tie_tol: f64) -> Option<Nearest> {
    index.nearest(q, tie_tol)
}

/// Members other than `p` at torus distance `<= s` from it, ascending.
pub fn neighbors_within(index: &PeriodicIndex, p: usize, s: f64) -> Vec<usize> {
    let mut ids = index.within(index.point(p), s);
    ids.retain(|&id| id != p);
    ids
}

/// Bisector half-spaces of the cell of site `p`, one per neighbour within
/// twice the certified covering radius.
///
/// Only valid for certified sets: with covering radius `rho`, every cell
/// lies in the ball of radius `rho` around its site, and any site whose
/// bisector can cut that ball is within `2 rho`.
pub fn cell_halfspaces(set: &SeparatedSet, p: usize) -> Result<Vec<HalfSpace>> {
    let cert = set.certificate().ok_or(Error::Uncertified)?;
    if p >= set.len() {
        return Err(Error::InvalidParameter(format!("site {p} out of range")));
    }
    let reach = 2.0 * cert.radius;
    let period = set.spec().period();
    if reach >= period / 2.0 {
        return Err(Error::Precondition(format!(
            "neighbour reach {reach} must stay below R/2 = {}",
            period / 2.0
        )));
    }
    let site = set.point(p);
    Ok(neighbors_within(set.index(), p, reach)
        .into_iter()
        .map(|id| {
            let normal = displacement(site, set.point(id), period);
            let offset = normal.iter().map(|a| a * a).sum::<f64>() / 2.0;
            HalfSpace {
                neighbor: id,
                normal,
                offset,
            }
        })
        .collect())
}

/// Whether `q_local` (relative to the site) satisfies every half-space
/// within tolerance `tol`.
pub fn cell_contains(halfspaces: &[HalfSpace], q_local: &[f64], tol: f64) -> bool {
    halfspaces.iter().all(|h| h.contains(q_local, tol))
}

/// Distance from `q_local` to the nearest bisector; points closer than `TAU`
/// form the boundary band where the two membership routes may disagree.
pub fn boundary_clearance(halfspaces: &[HalfSpace], q_local: &[f64]) -> f64 {
    halfspaces
        .iter()
        .map(|h| h.excess(q_local).abs())
        .fold(f64::INFINITY, f64::min)
}

pub fn default_tie_tolerance() -> f64 {
    TAU
}
