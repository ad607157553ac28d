//! Counting and probability bounds behind the existence argument: the
//! sign-pattern bound, the number of realizable cell assignments, the
//! per-assignment probability and the closing inequality.
//!
//! Every exponential quantity is carried as a natural logarithm. Set sizes
//! are `f64` because the interesting ones (`|K| = 10^{5n}` at `n = 10`)
//! overflow every integer type.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default sampling probability `20^{-n}`.
pub fn default_sampling_probability(n: usize) -> f64 {
    20f64.powi(-(n as i32))
}

/// Sign-pattern bound `(50 D M / N)^N` in natural-log form.
pub fn ln_sign_pattern_bound(m: f64, n_vars: u64, degree: u64) -> Result<f64> {
    if n_vars < 2 || m < n_vars as f64 || degree < 1 {
        return Err(Error::Precondition(format!(
            "sign-pattern bound needs M >= N >= 2 and D >= 1 (M = {m}, N = {n_vars}, D = {degree})"
        )));
    }
    let nv = n_vars as f64;
    Ok(nv * (50.0 * degree as f64 * m / nv).ln())
}

/// Sign-pattern bound `(50 D M / N)^N` for at most `M` polynomials of
/// degree `D` in `N` variables.
pub fn sign_pattern_bound(m: f64, n_vars: u64, degree: u64) -> Result<f64> {
    ln_sign_pattern_bound(m, n_vars, degree)?;
    Ok((50.0 * degree as f64 * m / n_vars as f64).powi(n_vars as i32))
}

/// Both forms of the site-count bound for a 1/3-separated set on a torus
/// of period `R`: the volume quotient `(36 n R^2 / pi)^{n/2}` and the
/// rounded `(4 sqrt(n) R)^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteCountBound {
    pub intermediate: f64,
    pub final_bound: f64,
}

pub fn lemma1_bound(n: usize, period: f64) -> SiteCountBound {
    let nf = n as f64;
    SiteCountBound {
        intermediate: (36.0 * nf * period * period / std::f64::consts::PI).powf(nf / 2.0),
        final_bound: (4.0 * nf.sqrt() * period).powi(n as i32),
    }
}

/// Natural logs of the two bounds on the number of realizable cell
/// assignments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventCountBound {
    /// `ln M` with `M = 5^n |K'| 3^n (4 sqrt(n) R)^n`.
    pub ln_polynomials: f64,
    /// `N = (d+1) n`.
    pub variables: u64,
    /// `N ln(50 M / N)`.
    pub ln_sign_patterns: f64,
    /// `2 n^2 ln(50 |K'|) + 2 n^3 ln(60 sqrt(n) R)`.
    pub ln_relaxed: f64,
    pub ln_relaxed_k_term: f64,
    pub ln_relaxed_r_term: f64,
}

pub fn bad_event_count_bound(n: usize, period: f64, kprime: f64, d: usize) -> Result<EventCountBound> {
    if !(kprime >= 1.0) {
        return Err(Error::Precondition(format!("|K'| = {kprime} must be at least 1")));
    }
    if d > n {
        return Err(Error::Precondition(format!("span dimension {d} exceeds n = {n}")));
    }
    let nf = n as f64;
    let ln_polynomials =
        nf * 5f64.ln() + kprime.ln() + nf * 3f64.ln() + nf * (4.0 * nf.sqrt() * period).ln();
    let variables = ((d + 1) * n) as u64;
    let ln_sign_patterns = if variables >= 2 {
        let vf = variables as f64;
        vf * (50f64.ln() + ln_polynomials - vf.ln())
    } else {
        // a single variable: the sign-pattern theorem does not apply and the
        // relaxed bound is used alone
        f64::NAN
    };
    let k_term = 2.0 * nf * nf * (50.0 * kprime).ln();
    let r_term = 2.0 * nf.powi(3) * (60.0 * nf.sqrt() * period).ln();
    Ok(EventCountBound {
        ln_polynomials,
        variables,
        ln_sign_patterns,
        ln_relaxed: k_term + r_term,
        ln_relaxed_k_term: k_term,
        ln_relaxed_r_term: r_term,
    })
}

/// All quantities of the union-bound argument for one `(n, R, |K|)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub n: usize,
    pub period: f64,
    pub k_size: f64,
    /// Sampling probability `20^{-n}`.
    pub x: f64,
    /// `ceil(|K| / 11^n)`.
    pub kprime: f64,
    /// Dimension spanned by `K'`.
    pub d: usize,
    pub ln_m: f64,
    pub big_n: u64,
    pub degree: u64,
    pub ln_sign_patterns: f64,
    pub log_event_count_bound: f64,
    /// `-x |K'| / 2`.
    pub log_single_event_bound: f64,
    /// `|K'| ln(1 - x/2)`, the exact log of `(1 - x/2)^{|K'|}`.
    pub log_single_event_exact: f64,
    /// `x |K'| / 4 - 2 n^2 ln(50 |K'|)`.
    pub margin_a: f64,
    /// `x |K'| / 4 - 2 n^3 ln(60 sqrt(n) R)`.
    pub margin_b: f64,
    pub feasible: bool,
    /// `10^{4n} log2(R)` (base-2 logarithm).
    pub threshold_log2: f64,
    /// `|K| > 10^{4n} log2(R)`.
    pub hypothesis_holds: bool,
}

impl FeasibilityReport {
    /// `ln(#events) + ln(P(event))`; negative means the union bound succeeds.
    pub fn union_bound_exponent(&self) -> f64 {
        self.log_event_count_bound + self.log_single_event_bound
    }
}

/// `ceil(|K| / 11^n)`.
pub fn kprime_for(k_size: f64, n: usize) -> f64 {
    (k_size / 11f64.powi(n as i32)).ceil().max(1.0)
}

pub fn theorem_feasibility(n: usize, period: f64, k_size: f64) -> Result<FeasibilityReport> {
    theorem_feasibility_with_span(n, period, k_size, n)
}

pub fn theorem_feasibility_with_span(
    n: usize,
    period: f64,
    k_size: f64,
    d: usize,
) -> Result<FeasibilityReport> {
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    if !(period > 2.0) {
        return Err(Error::Precondition(format!("R = {period} must exceed 2")));
    }
    if !(k_size >= 1.0) {
        return Err(Error::Precondition(format!("|K| = {k_size} must be at least 1")));
    }
    let x = default_sampling_probability(n);
    let kprime = kprime_for(k_size, n);
    let events = bad_event_count_bound(n, period, kprime, d)?;
    let margin_a = x * kprime / 4.0 - events.ln_relaxed_k_term;
    let margin_b = x * kprime / 4.0 - events.ln_relaxed_r_term;
    let threshold_log2 = 10f64.powi(4 * n as i32) * period.log2();
    Ok(FeasibilityReport {
        n,
        period,
        k_size,
        x,
        kprime,
        d,
        ln_m: events.ln_polynomials,
        big_n: events.variables,
        degree: 1,
        ln_sign_patterns: events.ln_sign_patterns,
        log_event_count_bound: events.ln_relaxed,
        log_single_event_bound: -x * kprime / 2.0,
        log_single_event_exact: kprime * (-x / 2.0).ln_1p(),
        margin_a,
        margin_b,
        feasible: margin_a > 0.0 && margin_b > 0.0,
        threshold_log2,
        hypothesis_holds: k_size > threshold_log2,
    })
}

/// Smallest `|K|` for which [`theorem_feasibility`] reports feasible.
///
/// The feasible set is upward closed in `|K|` (the margins are convex in
/// `|K'|` and negative at `|K'| = 1`), so doubling then bisection finds it.
pub fn min_k_for_feasibility(n: usize, period: f64) -> Result<MinKReport> {
    let feasible = |k: f64| theorem_feasibility(n, period, k).map(|r| r.feasible);
    let mut hi = 1.0f64;
    while !feasible(hi)? {
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e300 {
            return Err(Error::Precondition("no feasible |K| below 1e300".into()));
        }
    }
    let mut lo = (hi / 2.0).floor().max(0.0);
    if hi <= 1.0 {
        lo = 0.0;
    }
    // invariant: !feasible(lo) (or lo = 0), feasible(hi)
    while hi - lo > 1.0 {
        let mid = ((lo + hi) / 2.0).floor();
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let threshold = 10f64.powi(4 * n as i32) * period.log2();
    Ok(MinKReport {
        n,
        period,
        min_k: hi,
        threshold_log2: threshold,
        ratio_to_threshold: hi / threshold,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinKReport {
    pub n: usize,
    pub period: f64,
    pub min_k: f64,
    pub threshold_log2: f64,
    pub ratio_to_threshold: f64,
}

/// Feasibility for `K = l_m` (diameter `m - 1`, so `R = m`).
pub fn ell_m_feasibility(n: usize, m: f64) -> Result<FeasibilityReport> {
    if !(m >= 2.0) {
        return Err(Error::Precondition(format!("m = {m} must be at least 2")));
    }
    theorem_feasibility(n, m, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_pattern_examples() {
        assert_eq!(sign_pattern_bound(4.0, 2, 1).unwrap(), 10000.0);
        assert_eq!(sign_pattern_bound(2.0, 2, 1).unwrap(), 2500.0);
        assert!(sign_pattern_bound(1.0, 2, 1).is_err());
        assert!(sign_pattern_bound(5.0, 1, 1).is_err());
        let ln = ln_sign_pattern_bound(4.0, 2, 1).unwrap();
        assert!((ln - 10000f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn lemma1_examples() {
        let b = lemma1_bound(1, 10.0);
        assert!((b.intermediate - (3600.0 / std::f64::consts::PI).sqrt()).abs() < 1e-9);
        assert!((b.intermediate - 33.85).abs() < 0.01);
        assert!((b.final_bound - 40.0).abs() < 1e-12);
        for n in 1..=20 {
            for r in 3..=100 {
                let b = lemma1_bound(n, r as f64);
                assert!(b.intermediate < b.final_bound, "n={n} R={r}");
            }
        }
    }

    #[test]
    fn event_count_example_values() {
        // n = 2, R = 4, |K'| = ceil(2e8 / 121)
        let kprime = kprime_for(2e8, 2);
        assert_eq!(kprime, 1_652_893.0);
        let b = bad_event_count_bound(2, 4.0, kprime, 2).unwrap();
        // 8 ln(50 * 1652893) and 16 ln(240 sqrt 2), evaluated independently
        let k_term = 8.0 * (82_644_650f64).ln();
        let r_term = 16.0 * (339.411_254_969_542_8f64).ln();
        assert!((b.ln_relaxed_k_term - k_term).abs() < 1e-9);
        assert!((b.ln_relaxed_r_term - r_term).abs() < 1e-9);
        assert!((b.ln_relaxed_k_term - 145.8).abs() < 0.05);
        assert!((b.ln_relaxed_r_term - 93.3).abs() < 0.1);
    }

    #[test]
    fn sign_patterns_below_relaxed_bound() {
        for n in 1..=6 {
            for &r in &[2.5, 4.0, 16.0, 1e3, 1e9] {
                for &k in &[1.0, 7.0, 1e3, 1e8, 1e20] {
                    for d in 1..=n {
                        let b = bad_event_count_bound(n, r, k, d).unwrap();
                        assert!(b.ln_sign_patterns <= b.ln_relaxed + 1e-9, "n={n} R={r} k={k} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn event_count_monotone() {
        let base = bad_event_count_bound(3, 5.0, 100.0, 3).unwrap().ln_relaxed;
        assert!(bad_event_count_bound(3, 6.0, 100.0, 3).unwrap().ln_relaxed >= base);
        assert!(bad_event_count_bound(3, 5.0, 101.0, 3).unwrap().ln_relaxed >= base);
    }

    #[test]
    fn headline_example_is_feasible() {
        let r = theorem_feasibility(2, 4.0, 2e8).unwrap();
        assert!(r.feasible);
        assert!((r.x * r.kprime / 4.0 - 1033.06).abs() < 0.01);
        assert!(r.margin_a > 880.0 && r.margin_b > 930.0);
        assert!(r.union_bound_exponent() < 0.0);
        assert!(r.log_single_event_exact < r.log_single_event_bound);
    }

    #[test]
    fn tiny_k_is_infeasible() {
        assert!(!theorem_feasibility(1, 4.0, 1.0).unwrap().feasible);
        assert!(!theorem_feasibility(3, 4.0, 1.0).unwrap().feasible);
    }

    #[test]
    fn min_k_is_sharp() {
        let report = min_k_for_feasibility(1, 4.0).unwrap();
        let k = report.min_k;
        assert!(theorem_feasibility(1, 4.0, k).unwrap().feasible);
        assert!(!theorem_feasibility(1, 4.0, k - 1.0).unwrap().feasible);
        assert!(k > 1.9e4 && k < 2.2e4, "{k}");
        let k2 = min_k_for_feasibility(2, 4.0).unwrap().min_k;
        assert!(k2 <= 2e8);
        let k_small_r = min_k_for_feasibility(2, 3.0).unwrap().min_k;
        assert!(k_small_r <= k2);
    }

    #[test]
    fn ell_m_hypothesis() {
        let r = ell_m_feasibility(2, 1e10).unwrap();
        assert!(r.hypothesis_holds);
        let r = ell_m_feasibility(1, 1e5).unwrap();
        assert!(!r.hypothesis_holds);
        for n in 2..=10 {
            let r = ell_m_feasibility(n, 10f64.powi(5 * n as i32)).unwrap();
            assert!(r.hypothesis_holds, "n = {n}");
            assert!(r.feasible, "n = {n}");
        }
    }
}
