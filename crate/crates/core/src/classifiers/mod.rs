//! Growth comparison and the virtual-cyclicity detectors.

mod cover_demo;

use serde::Serialize;
use serde_json::json;

use crate::cayley::sphere_counts;
use crate::ends::EndDepthProfile;
use crate::error::{Error, Result};
use crate::group::GroupOracle;
use crate::scalar::Scalar;

pub use cover_demo::{sphere_cover_demo, CoveringStep, DemoReport, DemoStatus, LandingStep, SphereStep};

/// Smallest `a` at which the sphere-size criterion is a theorem rather than a demonstration.
pub const CRITERION_MIN_A: u32 = 100;

/// Samples `f(x)` on the contiguous range `start..start + len`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthSamples<T> {
    start: u64,
    values: Vec<T>,
}

impl<T: Scalar> GrowthSamples<T> {
    pub fn new(start: u64, values: Vec<T>) -> Result<Self> {
        if start == 0 {
            return Err(Error::InvalidParameter("growth samples start at x >= 1".into()));
        }
        if values.is_empty() {
            return Err(Error::InvalidParameter("growth samples need a nonempty domain".into()));
        }
        if values.iter().any(|&v| v < T::zero() || !v.is_finite_value()) {
            return Err(Error::InvalidParameter("growth samples must be finite and nonnegative".into()));
        }
        Ok(GrowthSamples { start, values })
    }

    pub fn from_fn(range: std::ops::RangeInclusive<u64>, f: impl Fn(u64) -> T) -> Result<Self> {
        let start = *range.start();
        Self::new(start, range.map(f).collect())
    }

    pub fn first(&self) -> u64 {
        self.start
    }

    pub fn last(&self) -> u64 {
        self.start + self.values.len() as u64 - 1
    }

    pub fn get(&self, x: u64) -> Option<T> {
        x.checked_sub(self.start).and_then(|i| self.values.get(i as usize)).copied()
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::zero(), Scalar::max_of)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, T)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| (self.start + i as u64, v))
    }
}

/// Search bounds for [`growth_dominates`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominationBounds<T> {
    pub max_a1: u64,
    pub max_a2: u64,
    /// Upper bound on the additive constant; `None` means `2 · max g`.
    pub max_a3: Option<T>,
}

impl<T> Default for DominationBounds<T> {
    fn default() -> Self {
        DominationBounds { max_a1: 8, max_a2: 8, max_a3: None }
    }
}

/// Constants with `f(x) ≤ a1·g(a2·x) + a3` on `from..=to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DominationWitness {
    pub a1: u64,
    pub a2: u64,
    pub a3: u64,
    pub from: u64,
    pub to: u64,
}

impl DominationWitness {
    /// Re-checks the inequality at every sampled `x` of `f` with `a2·x` in `g`'s domain.
    pub fn holds<T: Scalar>(&self, f: &GrowthSamples<T>, g: &GrowthSamples<T>) -> bool {
        let (a1, a3) = (T::from_u64(self.a1), T::from_u64(self.a3));
        f.iter().filter_map(|(x, fx)| g.get(self.a2 * x).map(|gx| (fx, gx))).all(|(fx, gx)| fx <= a1 * gx + a3)
    }

    /// Witness for `f ≺ h` from `f ≺ g` (self) and `g ≺ h` (other).
    pub fn compose(&self, other: &DominationWitness) -> DominationWitness {
        DominationWitness {
            a1: self.a1 * other.a1,
            a2: self.a2 * other.a2,
            a3: self.a1 * other.a3 + self.a3,
            from: self.from,
            to: self.to,
        }
    }
}

/// Grid search for the lexicographically smallest `(a1, a2, a3)` with
/// `f(x) ≤ a1·g(a2·x) + a3` on all of `f`'s domain.
///
/// Only dilations `a2` for which `a2·x` stays inside `g`'s sampled domain for
/// every `x` are tried. `None` means no witness within the bounds, not a
/// disproof.
pub fn growth_dominates<T: Scalar>(
    f: &GrowthSamples<T>,
    g: &GrowthSamples<T>,
    bounds: &DominationBounds<T>,
) -> Option<DominationWitness> {
    let max_a3 = bounds.max_a3.unwrap_or_else(|| T::from_u64(2) * g.max_value());
    for a1 in 1..=bounds.max_a1 {
        let a1_t = T::from_u64(a1);
        for a2 in 1..=bounds.max_a2 {
            if a2 * f.first() < g.first() || a2 * f.last() > g.last() {
                continue;
            }
            let needed = f
                .iter()
                .map(|(x, fx)| {
                    let scaled = a1_t * g.get(a2 * x).unwrap();
                    if fx > scaled {
                        fx - scaled
                    } else {
                        T::zero()
                    }
                })
                .fold(T::zero(), Scalar::max_of);
            if needed <= max_a3 {
                let a3 = needed.as_f64().ceil() as u64;
                return Some(DominationWitness { a1, a2, a3, from: f.first(), to: f.last() });
            }
        }
    }
    None
}

/// Outcome of comparing an end-depth profile against `V₀(r) ≤ 4r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearDepthReport {
    pub bound_factor: u32,
    /// Radii of certified entries that were checked.
    pub checked: Vec<u32>,
    pub skipped_uncertified: usize,
    pub max_ratio: Option<f64>,
    /// `(r, V₀(r))` pairs above `4r`.
    pub violations: Vec<(u32, u32)>,
    pub pass: bool,
    pub note: String,
}

/// Checks `V₀(r) ≤ 4r` on the certified entries of a profile. A violation
/// contradicts the linear end-depth theorem and signals a bug.
pub fn linear_end_depth_check(profile: &EndDepthProfile) -> LinearDepthReport {
    const FACTOR: u32 = 4;
    let certified: Vec<_> = profile.entries.iter().filter(|e| e.certified).collect();
    let violations: Vec<(u32, u32)> =
        certified.iter().filter(|e| e.value as u64 > FACTOR as u64 * e.r as u64).map(|e| (e.r, e.value)).collect();
    let max_ratio = certified.iter().map(|e| e.value as f64 / e.r as f64).reduce(f64::max);
    let note = if certified.is_empty() {
        "no certified radius; nothing was checked".to_string()
    } else if violations.is_empty() {
        "V0(r) <= 4r on every certified radius".to_string()
    } else {
        "V0(r) > 4r on a certified radius: this contradicts the linear end-depth theorem for one-ended groups \
         and indicates an implementation error"
            .to_string()
    };
    LinearDepthReport {
        bound_factor: FACTOR,
        checked: certified.iter().map(|e| e.r).collect(),
        skipped_uncertified: profile.entries.len() - certified.len(),
        max_ratio,
        pass: violations.is_empty(),
        violations,
        note,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    VirtuallyCyclicEvidence,
    Infeasible,
    NoEvidence,
    DemonstrationOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub details: String,
    pub payload: serde_json::Value,
}

const TWO_ENDS_NOTE: &str = "A finitely generated group has two ends exactly when it is virtually Z.";

/// Looks for a sphere size that repeats over the tail of the sequence.
///
/// `sizes[r] = |S(r)|` for `r = 0..=r_max`, with `r_max ≥ 20`. Fires when one
/// value occurs at least half the time among the last `⌈r_max/2⌉` radii, a
/// finite proxy for a bounded subsequence of sphere sizes.
pub fn bounded_sphere_detector(sizes: &[usize]) -> Result<Verdict> {
    let r_max = sizes.len().saturating_sub(1);
    if r_max < 20 {
        return Err(Error::InvalidParameter(format!("sphere sizes up to r_max >= 20 required, got {r_max}")));
    }
    let window = r_max.div_ceil(2);
    let tail = &sizes[r_max + 1 - window..];
    let mut counts: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    for &s in tail {
        *counts.entry(s).or_default() += 1;
    }
    let (&value, &hits) = counts.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).unwrap();
    let needed = window.div_ceil(2);
    let payload = json!({
        "r_max": r_max,
        "window": [r_max + 1 - window, r_max],
        "most_frequent_size": value,
        "occurrences": hits,
        "required_occurrences": needed,
    });
    if hits >= needed {
        Ok(Verdict {
            kind: VerdictKind::VirtuallyCyclicEvidence,
            details: format!(
                "|S(r)| = {value} on {hits} of the last {window} radii. Finite evidence of a bounded subsequence of \
                 sphere sizes, not a proof. {TWO_ENDS_NOTE}"
            ),
            payload,
        })
    } else {
        Ok(Verdict {
            kind: VerdictKind::NoEvidence,
            details: format!("no sphere size repeats on at least {needed} of the last {window} radii"),
            payload,
        })
    }
}

/// Sphere sizes up to `r_max` fed to [`bounded_sphere_detector`].
///
/// When the budget runs out first, the detector sees the explored prefix if it
/// reaches radius 20; otherwise the verdict is `no_evidence` and the payload
/// records where exploration stopped.
pub fn sphere_size_detector(oracle: &GroupOracle, r_max: u32, budget: usize) -> Result<Verdict> {
    if r_max < 20 {
        return Err(Error::InvalidParameter(format!("r_max >= 20 required, got {r_max}")));
    }
    let (sizes, explored) = match sphere_counts(oracle, r_max, budget) {
        Ok(c) => (c.sizes, r_max),
        Err(Error::BudgetExceeded { radius_reached, .. }) => {
            let c = sphere_counts(oracle, radius_reached, budget)?;
            (c.sizes, radius_reached)
        }
        Err(e) => return Err(e),
    };
    let truncated = explored < r_max;
    if sizes.len() <= 20 {
        let last = *sizes.last().unwrap();
        return Ok(Verdict {
            kind: VerdictKind::NoEvidence,
            details: format!(
                "node budget of {budget} exhausted at radius {explored} of {r_max} (|S({explored})| = {last}); \
                 too few radii for the detector"
            ),
            payload: json!({ "r_max": r_max, "explored_radius": explored, "truncated": true, "sizes": sizes }),
        });
    }
    let mut verdict = bounded_sphere_detector(&sizes)?;
    if let serde_json::Value::Object(map) = &mut verdict.payload {
        map.insert("explored_radius".into(), json!(explored));
        map.insert("truncated".into(), json!(truncated));
        map.insert("sizes".into(), json!(sizes));
    }
    if truncated {
        verdict.details.push_str(&format!(" (node budget exhausted, sizes only up to radius {explored})"));
    }
    Ok(verdict)
}

/// `(2a+1)^(n+2)`, or `None` on overflow.
pub fn criterion_radius(a: u32, n: u32) -> Option<u64> {
    (2 * a as u64 + 1).checked_pow(n.checked_add(2)?)
}

/// Evaluates "a sphere of radius `(2a+1)^(n+2)` has at most `n` elements".
pub fn sphere_bound_criterion(oracle: &GroupOracle, a: u32, n: u32, budget: usize) -> Result<Verdict> {
    if a < 3 || n < 2 {
        return Err(Error::InvalidParameter(format!("criterion needs a >= 3 and n >= 2 (got a = {a}, n = {n})")));
    }
    let infeasible = |rho: Option<u64>, why: String| Verdict {
        kind: VerdictKind::Infeasible,
        details: why,
        payload: json!({ "a": a, "n": n, "required_radius": rho, "budget": budget }),
    };
    let Some(rho) = criterion_radius(a, n) else {
        return Ok(infeasible(None, "required radius (2a+1)^(n+2) overflows 64 bits".into()));
    };
    // An infinite group has at least 2ρ+1 elements in B(ρ).
    if rho > u32::MAX as u64 || (!oracle.is_finite() && 2 * rho as u128 + 1 > budget as u128) {
        return Ok(infeasible(
            Some(rho),
            format!(
                "exploring to radius {rho} needs at least {} elements, above the budget of {budget}",
                2 * rho as u128 + 1
            ),
        ));
    }
    let counts = match sphere_counts(oracle, rho as u32, budget) {
        Ok(c) => c,
        Err(Error::BudgetExceeded { radius_reached, .. }) => {
            return Ok(infeasible(
                Some(rho),
                format!("node budget of {budget} exhausted at radius {radius_reached} of {rho}"),
            ))
        }
        Err(e) => return Err(e),
    };
    let size = counts.sizes[rho as usize];
    let payload = json!({ "a": a, "n": n, "rho": rho, "sphere_size": size, "visited": counts.visited });
    if size > n as usize {
        return Ok(Verdict {
            kind: VerdictKind::NoEvidence,
            details: format!("|S({rho})| = {size} > n = {n}"),
            payload,
        });
    }
    if a >= CRITERION_MIN_A {
        Ok(Verdict {
            kind: VerdictKind::VirtuallyCyclicEvidence,
            details: format!("|S({rho})| = {size} <= n = {n} with a = {a} >= {CRITERION_MIN_A}. {TWO_ENDS_NOTE}"),
            payload,
        })
    } else {
        Ok(Verdict {
            kind: VerdictKind::DemonstrationOnly,
            details: format!(
                "|S({rho})| = {size} <= n = {n}, but the hypothesis a >= {CRITERION_MIN_A} is violated (a < 100, a = {a}); \
                 demonstration of the mechanics only"
            ),
            payload,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ends::{EndDepthEntry, EndDepthProfile, OneEndedness};
    use crate::group::GroupSpec;

    fn samples(range: std::ops::RangeInclusive<u64>, f: impl Fn(u64) -> f64) -> GrowthSamples<f64> {
        GrowthSamples::from_fn(range, f).unwrap()
    }

    #[test]
    fn linear_below_quadratic() {
        let f = samples(1..=100, |x| x as f64);
        let g = samples(1..=100, |x| (x * x) as f64);
        let w = growth_dominates(&f, &g, &DominationBounds::default()).unwrap();
        assert_eq!((w.a1, w.a2, w.a3), (1, 1, 0));
    }

    #[test]
    fn exponential_not_below_linear() {
        let f = samples(1..=20, |x| 2f64.powi(x as i32));
        let g = samples(1..=20, |x| x as f64);
        assert_eq!(growth_dominates(&f, &g, &DominationBounds::default()), None);
    }

    #[test]
    fn reflexive_and_integer_samples() {
        let f = GrowthSamples::<u64>::from_fn(1..=30, |x| 3 * x + 1).unwrap();
        let w = growth_dominates(&f, &f, &DominationBounds::default()).unwrap();
        assert_eq!((w.a1, w.a2, w.a3), (1, 1, 0));
        let g = GrowthSamples::<u64>::from_fn(1..=30, |x| 3 * x).unwrap();
        let w = growth_dominates(&f, &g, &DominationBounds::default()).unwrap();
        assert_eq!((w.a1, w.a2, w.a3), (1, 1, 1));
        assert!(w.holds(&f, &g));
    }

    #[test]
    fn samples_validation() {
        assert!(GrowthSamples::<f64>::new(0, vec![1.0]).is_err());
        assert!(GrowthSamples::<f64>::new(1, vec![]).is_err());
        assert!(GrowthSamples::<f64>::new(1, vec![-1.0]).is_err());
    }

    fn profile(values: &[(u32, u32)]) -> EndDepthProfile {
        EndDepthProfile {
            group: GroupSpec::ZPow { k: 2 },
            entries: values
                .iter()
                .map(|&(r, value)| EndDepthEntry {
                    r,
                    value,
                    certified: true,
                    truncation: 4 * r + 2,
                    bounded_components: 0,
                })
                .collect(),
            one_endedness: OneEndedness::Asserted,
            not_one_ended: false,
            warnings: vec![],
            explored: 0,
        }
    }

    #[test]
    fn linear_check_flags_violation() {
        let ok = linear_end_depth_check(&profile(&[(1, 1), (2, 2), (3, 3)]));
        assert!(ok.pass);
        assert_eq!(ok.max_ratio, Some(1.0));
        let bad = linear_end_depth_check(&profile(&[(1, 1), (2, 9)]));
        assert!(!bad.pass);
        assert_eq!(bad.violations, vec![(2, 9)]);
        let edge = linear_end_depth_check(&profile(&[(2, 8)]));
        assert!(edge.pass);
    }

    #[test]
    fn detector_on_constant_and_growing() {
        let constant = vec![1usize].into_iter().chain(std::iter::repeat_n(2, 30)).collect::<Vec<_>>();
        let v = bounded_sphere_detector(&constant).unwrap();
        assert_eq!(v.kind, VerdictKind::VirtuallyCyclicEvidence);
        assert_eq!(v.payload["most_frequent_size"], 2);
        let growing: Vec<usize> = (0..=30).map(|r| if r == 0 { 1 } else { 4 * r }).collect();
        assert_eq!(bounded_sphere_detector(&growing).unwrap().kind, VerdictKind::NoEvidence);
        assert!(bounded_sphere_detector(&growing[..20]).is_err());
    }

    #[test]
    fn detector_density_threshold() {
        // r_max = 20: window r = 11..=20 (10 radii), needs 5 repeats.
        let mut sizes: Vec<usize> = (0..=20).map(|r| 100 + r).collect();
        for r in [12, 14, 16, 18] {
            sizes[r] = 7;
        }
        assert_eq!(bounded_sphere_detector(&sizes).unwrap().kind, VerdictKind::NoEvidence);
        sizes[20] = 7;
        assert_eq!(bounded_sphere_detector(&sizes).unwrap().kind, VerdictKind::VirtuallyCyclicEvidence);
    }

    #[test]
    fn criterion_radius_arithmetic() {
        assert_eq!(criterion_radius(3, 2), Some(2401));
        assert_eq!(criterion_radius(100, 2), Some(1_632_240_801));
        assert_eq!(criterion_radius(100, 40), None);
    }

    #[test]
    fn criterion_parameter_checks() {
        let z = GroupOracle::new(GroupSpec::Z).unwrap();
        assert!(sphere_bound_criterion(&z, 2, 2, 1000).is_err());
        assert!(sphere_bound_criterion(&z, 3, 1, 1000).is_err());
    }

    #[test]
    fn criterion_on_finite_group_fires() {
        let c = GroupOracle::new(GroupSpec::CyclicFinite { m: 6 }).unwrap();
        let v = sphere_bound_criterion(&c, 3, 2, 1000).unwrap();
        assert_eq!(v.kind, VerdictKind::DemonstrationOnly);
        assert_eq!(v.payload["sphere_size"], 0);
    }
}
