//! Components of ball complements, the end-depth function, end counts and
//! witness checks for separating sets.

use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cayley::{explore, BallTable, UNREACHED};
use crate::error::{Error, Result};
use crate::group::{Element, GroupOracle, GroupSpec};

/// One connected component of `B(R) \ B(r)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Component {
    /// Table indices, ascending.
    pub vertices: Vec<usize>,
    /// Contains a vertex at distance exactly `R` (finite proxy for unbounded).
    pub touches_boundary: bool,
    pub max_distance: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentDecomposition {
    pub inner_radius: u32,
    pub truncation: u32,
    /// Ordered by smallest vertex index.
    pub components: Vec<Component>,
}

impl ComponentDecomposition {
    /// Components reaching the truncation sphere (candidates for `U_r`).
    pub fn boundary_touching(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| c.touches_boundary)
    }

    /// Components that stay inside the truncation; their union is `B_r`.
    pub fn bounded(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| !c.touches_boundary)
    }

    pub fn touching_count(&self) -> usize {
        self.boundary_touching().count()
    }

    /// `max d(e, x)` over `x` in the bounded components.
    pub fn bounded_depth(&self) -> Option<u32> {
        self.bounded().map(|c| c.max_distance).max()
    }
}

/// Connected components of `B(R) \ B(r)` for the table's own radius `R`.
pub fn complement_components(table: &BallTable, r: u32) -> Result<ComponentDecomposition> {
    complement_components_within(table, r, table.radius())
}

/// Connected components of `{v : r < d(v) ≤ truncation}`, using only edges
/// between such vertices.
pub fn complement_components_within(table: &BallTable, r: u32, truncation: u32) -> Result<ComponentDecomposition> {
    if r >= truncation {
        return Err(Error::InvalidParameter(format!("inner radius {r} must be below truncation {truncation}")));
    }
    if truncation > table.radius() {
        return Err(Error::TruncationTooSmall { needed: truncation as u64, available: table.radius() });
    }
    let lo = table.ball_size(r);
    let hi = table.ball_size(truncation);
    let mut uf = UnionFind::<usize>::new(hi - lo);
    for v in lo..hi {
        for &w in table.neighbors(v) {
            let w = w as usize;
            if w > v && w < hi {
                uf.union(v - lo, w - lo);
            }
        }
    }
    let mut slot_of_root: Vec<usize> = vec![usize::MAX; hi - lo];
    let mut components: Vec<Component> = Vec::new();
    for v in lo..hi {
        let root = uf.find(v - lo);
        if slot_of_root[root] == usize::MAX {
            slot_of_root[root] = components.len();
            components.push(Component { vertices: Vec::new(), touches_boundary: false, max_distance: 0 });
        }
        let c = &mut components[slot_of_root[root]];
        let d = table.distance(v);
        c.vertices.push(v);
        c.touches_boundary |= d == truncation;
        c.max_distance = c.max_distance.max(d);
    }
    Ok(ComponentDecomposition { inner_radius: r, truncation, components })
}

// ---------------------------------------------------------------------------
// End counts

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndsClass {
    Zero,
    One,
    Two,
    Infinite,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RadiusCount {
    pub r: u32,
    /// Boundary-touching component counts, one per schedule entry.
    pub per_truncation: Vec<usize>,
    /// Count agreed between the last two truncations.
    pub stable: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndsEstimate {
    pub group: GroupSpec,
    pub r_max: u32,
    pub schedule: Vec<u32>,
    pub complete_group: bool,
    /// Entries for `r = 0..=r_max`.
    pub counts: Vec<RadiusCount>,
    /// Common value over the tail window, when constant.
    pub stabilized: Option<usize>,
    pub classification: EndsClass,
    /// Elements in the explored ball.
    pub explored: usize,
}

impl EndsEstimate {
    pub fn stable_counts(&self) -> Vec<Option<usize>> {
        self.counts.iter().map(|c| c.stable).collect()
    }
}

/// Default truncation schedule for [`end_count_estimate`].
pub fn default_schedule(r_max: u32) -> Vec<u32> {
    vec![r_max + 2, r_max + 4]
}

/// Explores to the largest truncation in `schedule` and estimates the number
/// of ends from boundary-touching component counts.
pub fn end_count_estimate(oracle: &GroupOracle, r_max: u32, schedule: &[u32], budget: usize) -> Result<EndsEstimate> {
    validate_schedule(r_max, schedule)?;
    let table = explore(oracle, *schedule.last().unwrap(), budget)?;
    estimate_ends_in_table(&table, r_max, schedule)
}

fn validate_schedule(r_max: u32, schedule: &[u32]) -> Result<()> {
    if schedule.len() < 2 {
        return Err(Error::InvalidParameter("schedule needs at least two truncations".into()));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("schedule must be strictly increasing".into()));
    }
    if schedule[0] <= r_max {
        return Err(Error::InvalidParameter(format!("smallest truncation {} must exceed r_max {r_max}", schedule[0])));
    }
    Ok(())
}

/// [`end_count_estimate`] on an existing table covering the schedule.
pub fn estimate_ends_in_table(table: &BallTable, r_max: u32, schedule: &[u32]) -> Result<EndsEstimate> {
    validate_schedule(r_max, schedule)?;
    let counts = (0..=r_max)
        .map(|r| {
            let per_truncation = schedule
                .iter()
                .map(|&t| complement_components_within(table, r, t).map(|d| d.touching_count()))
                .collect::<Result<Vec<_>>>()?;
            let n = per_truncation.len();
            let stable = (per_truncation[n - 2] == per_truncation[n - 1]).then_some(per_truncation[n - 1]);
            Ok(RadiusCount { r, per_truncation, stable })
        })
        .collect::<Result<Vec<_>>>()?;

    let stable: Vec<Option<usize>> = counts.iter().map(|c| c.stable).collect();
    let (classification, stabilized) = classify_counts(table.is_complete_group(), &stable);
    Ok(EndsEstimate {
        group: table.spec().clone(),
        r_max,
        schedule: schedule.to_vec(),
        complete_group: table.is_complete_group(),
        counts,
        stabilized,
        classification,
        explored: table.len(),
    })
}

/// Snaps stable counts onto {0, 1, 2, ∞}; anything else is inconclusive.
fn classify_counts(complete_group: bool, stable: &[Option<usize>]) -> (EndsClass, Option<usize>) {
    if complete_group {
        return (EndsClass::Zero, Some(0));
    }
    let tail_len = stable.len().div_ceil(2);
    let tail = &stable[stable.len() - tail_len..];
    let Some(tail) = tail.iter().copied().collect::<Option<Vec<usize>>>() else {
        return (EndsClass::Inconclusive, None);
    };
    let constant = tail.iter().all(|&c| c == tail[0]).then_some(tail[0]);
    match constant {
        Some(1) => (EndsClass::One, Some(1)),
        Some(2) => (EndsClass::Two, Some(2)),
        _ if tail.windows(2).all(|w| w[0] <= w[1]) && *tail.last().unwrap() >= 3 => (EndsClass::Infinite, constant),
        _ => (EndsClass::Inconclusive, constant),
    }
}

// ---------------------------------------------------------------------------
// End depth

/// Truncation used for a given inner radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// `R = 4r + 2`.
    Auto,
    Fixed(u32),
}

impl Truncation {
    pub fn for_radius(self, r: u32) -> u32 {
        match self {
            Truncation::Auto => certification_radius(r),
            Truncation::Fixed(t) => t,
        }
    }
}

/// Smallest truncation at which an end-depth value is certified: bounded
/// components of a one-ended group lie inside `B(4r)`, plus one slack layer
/// and one layer to tell them apart from the boundary.
pub fn certification_radius(r: u32) -> u32 {
    4 * r + 2
}

#[derive(Debug, Clone, Copy)]
pub struct EndDepthOptions {
    pub truncation: Truncation,
    /// Treat the group as one-ended instead of estimating it.
    pub assume_one_ended: bool,
    pub budget: usize,
}

impl Default for EndDepthOptions {
    fn default() -> Self {
        EndDepthOptions {
            truncation: Truncation::Auto,
            assume_one_ended: false,
            budget: crate::cayley::DEFAULT_NODE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EndDepthEntry {
    pub r: u32,
    /// `V₀(r)`.
    pub value: u32,
    pub certified: bool,
    pub truncation: u32,
    pub bounded_components: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum OneEndedness {
    Asserted,
    Estimated { classification: EndsClass, schedule: Vec<u32> },
}

impl OneEndedness {
    pub fn is_one_ended(&self) -> bool {
        matches!(self, OneEndedness::Asserted | OneEndedness::Estimated { classification: EndsClass::One, .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndDepthProfile {
    pub group: GroupSpec,
    pub entries: Vec<EndDepthEntry>,
    pub one_endedness: OneEndedness,
    /// Set when the group is not known to be one-ended; `V₀` is then only
    /// the depth of the bounded components.
    pub not_one_ended: bool,
    pub warnings: Vec<String>,
    /// Elements in the explored ball.
    pub explored: usize,
}

impl EndDepthProfile {
    pub fn value(&self, r: u32) -> Option<u32> {
        self.entries.iter().find(|e| e.r == r).map(|e| e.value)
    }
}

/// `V₀(r)` for a single radius.
pub fn end_depth(oracle: &GroupOracle, r: u32, opts: &EndDepthOptions) -> Result<EndDepthProfile> {
    if r == 0 {
        return Err(Error::InvalidParameter("end depth needs r >= 1".into()));
    }
    depth_profile(oracle, r..=r, opts)
}

/// `V₀(r)` for `r = 1..=r_max`, from a single exploration.
pub fn end_depth_profile(oracle: &GroupOracle, r_max: u32, opts: &EndDepthOptions) -> Result<EndDepthProfile> {
    if r_max == 0 {
        return Err(Error::InvalidParameter("r_max must be at least 1".into()));
    }
    depth_profile(oracle, 1..=r_max, opts)
}

fn depth_profile(
    oracle: &GroupOracle,
    radii: std::ops::RangeInclusive<u32>,
    opts: &EndDepthOptions,
) -> Result<EndDepthProfile> {
    let r_max = *radii.end();
    let horizon = radii.clone().map(|r| opts.truncation.for_radius(r)).max().unwrap();
    if let Some(r) = radii.clone().find(|&r| opts.truncation.for_radius(r) <= r) {
        return Err(Error::InvalidParameter(format!(
            "truncation {} must exceed r = {r}",
            opts.truncation.for_radius(r)
        )));
    }
    let table = explore(oracle, horizon, opts.budget)?;
    let mut warnings = Vec::new();

    let one_endedness = if opts.assume_one_ended {
        OneEndedness::Asserted
    } else if horizon - 1 > r_max {
        let schedule = vec![horizon - 1, horizon];
        let est = estimate_ends_in_table(&table, r_max, &schedule)?;
        OneEndedness::Estimated { classification: est.classification, schedule }
    } else {
        OneEndedness::Estimated { classification: EndsClass::Inconclusive, schedule: vec![] }
    };
    let one_ended = one_endedness.is_one_ended();
    if !one_ended {
        warnings.push(
            "NotOneEnded: the group is not known to be one-ended; end depth is defined for one-ended groups \
             and the values below are the depth of bounded components only"
                .to_string(),
        );
    }

    let entries = radii
        .map(|r| {
            let truncation = opts.truncation.for_radius(r);
            let dec = complement_components_within(&table, r, truncation)?;
            let value = dec.bounded_depth().unwrap_or(r);
            Ok(EndDepthEntry {
                r,
                value,
                certified: one_ended && truncation >= certification_radius(r),
                truncation,
                bounded_components: dec.bounded().count(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EndDepthProfile {
        group: oracle.spec().clone(),
        entries,
        one_endedness,
        not_one_ended: !one_ended,
        warnings,
        explored: table.len(),
    })
}

// ---------------------------------------------------------------------------
// Separating-set witnesses

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObssItem {
    pub k: Vec<Element>,
    pub r: u32,
    pub a: Vec<Element>,
    pub b: Vec<Element>,
}

/// A finite family `(K_i, r_i, A_i, B_i)` with a common diameter bound `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObssWitness {
    pub n: u64,
    pub items: Vec<ObssItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetDiameter {
    /// `None` when some pair is not connected inside the ball.
    pub value: Option<u64>,
    /// The diameter is exact when it fits in the ball around the set.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ItemReport {
    pub r: u32,
    pub diam_k: SetDiameter,
    pub diam_a: SetDiameter,
    pub diam_b: SetDiameter,
    /// Components of `N(K, r) \ K`.
    pub neighbourhood_components: usize,
    pub diam_k_below_n: bool,
    pub a_nonempty: bool,
    pub b_nonempty: bool,
    pub a_in_one_component: bool,
    pub b_in_one_component: bool,
    /// `A` and `B` are disjoint and lie in different components.
    pub a_b_distinct_components: bool,
}

impl ItemReport {
    pub fn passes(&self) -> bool {
        self.diam_k_below_n
            && self.a_nonempty
            && self.b_nonempty
            && self.a_in_one_component
            && self.b_in_one_component
            && self.a_b_distinct_components
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub n: u64,
    pub items: Vec<ItemReport>,
    pub r_strictly_increasing: bool,
    pub diam_a_strictly_increasing: bool,
    pub diam_b_strictly_increasing: bool,
    pub passes: bool,
    pub note: String,
}

const WITNESS_NOTE: &str =
    "Finite evidence only: unbounded growth of r_i, diam(A_i) and diam(B_i) is replaced by strict \
    increase over the supplied items. The criterion applies to Cayley graphs; the half-line [0, inf) satisfies \
    every condition yet has one end.";

/// Checks every condition of a separating-set witness inside one table.
///
/// `N(K, r)` is the open neighbourhood `{y : d(y, K) < r}`.
pub fn check_obss_witness(oracle: &GroupOracle, table: &BallTable, witness: &ObssWitness) -> Result<WitnessReport> {
    let resolve = |set: &[Element], what: &str| -> Result<Vec<usize>> {
        let mut out = set
            .iter()
            .map(|g| {
                table.index_of(oracle, g).ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "{what} element {g} is not in the ball of radius {}",
                        table.radius()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    };

    let mut items = Vec::with_capacity(witness.items.len());
    for item in &witness.items {
        let k = resolve(&item.k, "K")?;
        let a = resolve(&item.a, "A")?;
        let b = resolve(&item.b, "B")?;
        if k.is_empty() {
            return Err(Error::InvalidParameter("K must be nonempty".into()));
        }
        if item.r == 0 {
            return Err(Error::InvalidParameter("r must be positive".into()));
        }
        let k_far = k.iter().map(|&v| table.distance(v)).max().unwrap();
        let needed = k_far as u64 + item.r as u64;
        if needed > table.radius() as u64 {
            return Err(Error::TruncationTooSmall { needed, available: table.radius() });
        }

        let to_k = table.distances_from_set(&k, Some(item.r - 1), |_| true);
        let in_ring = |v: usize| to_k[v] != UNREACHED && to_k[v] >= 1;
        let labels = ring_labels(table, &to_k);
        let component_of = |set: &[usize]| -> Option<usize> {
            let first = *set.first()?;
            if !in_ring(first) {
                return None;
            }
            let label = labels[first];
            set.iter().all(|&v| in_ring(v) && labels[v] == label).then_some(label)
        };
        let (ca, cb) = (component_of(&a), component_of(&b));
        let disjoint = a.iter().all(|v| b.binary_search(v).is_err());

        let diam_k = set_diameter(table, &k);
        let diam_a = set_diameter(table, &a);
        let diam_b = set_diameter(table, &b);
        items.push(ItemReport {
            r: item.r,
            diam_k_below_n: diam_k.value.is_some_and(|d| d < witness.n),
            diam_k,
            diam_a,
            diam_b,
            neighbourhood_components: labels.iter().filter(|&&l| l != usize::MAX).max().map_or(0, |&l| l + 1),
            a_nonempty: !a.is_empty(),
            b_nonempty: !b.is_empty(),
            a_in_one_component: ca.is_some(),
            b_in_one_component: cb.is_some(),
            a_b_distinct_components: disjoint && matches!((ca, cb), (Some(x), Some(y)) if x != y),
        });
    }

    let increasing = |vals: Vec<Option<u64>>| {
        vals.windows(2).all(|w| matches!((w[0], w[1]), (Some(x), Some(y)) if x < y)) && vals.iter().all(Option::is_some)
    };
    let r_strictly_increasing = witness.items.windows(2).all(|w| w[0].r < w[1].r);
    let diam_a_strictly_increasing = increasing(items.iter().map(|i| i.diam_a.value).collect());
    let diam_b_strictly_increasing = increasing(items.iter().map(|i| i.diam_b.value).collect());
    let passes = !items.is_empty()
        && items.iter().all(ItemReport::passes)
        && r_strictly_increasing
        && diam_a_strictly_increasing
        && diam_b_strictly_increasing;
    Ok(WitnessReport {
        n: witness.n,
        items,
        r_strictly_increasing,
        diam_a_strictly_increasing,
        diam_b_strictly_increasing,
        passes,
        note: WITNESS_NOTE.to_string(),
    })
}

/// Component labels of the ring `{v : 1 ≤ to_k[v] < ∞}`; `usize::MAX` elsewhere.
fn ring_labels(table: &BallTable, to_k: &[u32]) -> Vec<usize> {
    let in_ring = |v: usize| to_k[v] != UNREACHED && to_k[v] >= 1;
    let mut labels = vec![usize::MAX; table.len()];
    let mut next = 0;
    for start in 0..table.len() {
        if !in_ring(start) || labels[start] != usize::MAX {
            continue;
        }
        labels[start] = next;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in table.neighbors(v) {
                let w = w as usize;
                if in_ring(w) && labels[w] == usize::MAX {
                    labels[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    labels
}

/// Diameter of a vertex set in the word metric, by per-source BFS inside the table.
pub fn set_diameter(table: &BallTable, set: &[usize]) -> SetDiameter {
    if set.is_empty() {
        return SetDiameter { value: Some(0), exact: true };
    }
    let value = set
        .par_iter()
        .map(|&s| {
            let dist = table.distances_from(s, None);
            set.iter()
                .map(|&t| (dist[t] != UNREACHED).then_some(dist[t] as u64))
                .collect::<Option<Vec<_>>>()
                .map(|v| v.into_iter().max().unwrap_or(0))
        })
        .collect::<Option<Vec<_>>>()
        .map(|v| v.into_iter().max().unwrap_or(0));
    let far = set.iter().map(|&v| table.distance(v)).max().unwrap() as u64;
    let exact = value.is_some_and(|d| d + far <= table.radius() as u64);
    SetDiameter { value, exact }
}
