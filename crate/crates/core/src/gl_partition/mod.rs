//! Finite metric spaces and gl-partitions: partitions whose blocks are
//! separated by more than `a` times the largest block diameter.
//!
//! [`build_gl_partition`] runs the iterated neighbourhood expansion
//! `A_m(i) = {y : d(y, A_{m-1}(i)) ≤ a·d_{m-1}}`, `d_m = max_j max(diam A_m(j), 1)`,
//! starting from singletons with `d_0 = 1`. [`verify_gl_partition`] re-checks
//! the partition conditions from raw distances only.

mod isometry;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cayley::{BallTable, UNREACHED};
use crate::error::{Error, Result};
use crate::group::{Element, GroupOracle};
use crate::scalar::{eq_tol, le_tol, Scalar};

pub use isometry::{find_isometry, MAX_ISOMETRY_POINTS};

/// A finite metric space with labelled points.
///
/// JSON form: `{"points":["p0",...],"distances":[[0,...],...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace<T>", bound(deserialize = "T: Scalar"))]
pub struct FiniteMetricSpace<T> {
    #[serde(rename = "points")]
    labels: Vec<String>,
    #[serde(rename = "distances")]
    dist: Vec<Vec<T>>,
}

#[derive(Deserialize)]
struct RawSpace<T> {
    points: Vec<String>,
    distances: Vec<Vec<T>>,
}

impl<T: Scalar> TryFrom<RawSpace<T>> for FiniteMetricSpace<T> {
    type Error = Error;

    fn try_from(raw: RawSpace<T>) -> Result<Self> {
        FiniteMetricSpace::new(raw.points, raw.distances)
    }
}

impl<T: Scalar> FiniteMetricSpace<T> {
    /// Validates symmetry, zero diagonal, positive off-diagonal entries and
    /// the triangle inequality (up to [`Scalar::tolerance`]).
    pub fn new(labels: Vec<String>, dist: Vec<Vec<T>>) -> Result<Self> {
        let n = labels.len();
        let bad = |msg: String| Err(Error::InvalidMetric(msg));
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return bad(format!("distance matrix must be {n}x{n}"));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return bad(format!("duplicate point label {dup}"));
        }
        for i in 0..n {
            if !eq_tol(dist[i][i], T::zero()) {
                return bad(format!("d({0},{0}) = {1} is not zero", labels[i], dist[i][i]));
            }
            for j in 0..n {
                let d = dist[i][j];
                if !d.is_finite_value() || d < T::zero() {
                    return bad(format!("d({},{}) = {d} is not a finite nonnegative number", labels[i], labels[j]));
                }
                if i != j && d <= T::tolerance() {
                    return bad(format!("distinct points {} and {} at distance {d}", labels[i], labels[j]));
                }
                if !eq_tol(d, dist[j][i]) {
                    return bad(format!("asymmetric distance between {} and {}", labels[i], labels[j]));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if !le_tol(dist[i][k], dist[i][j] + dist[j][k]) {
                        return bad(format!(
                            "triangle inequality fails for {}, {}, {}",
                            labels[i], labels[j], labels[k]
                        ));
                    }
                }
            }
        }
        Ok(FiniteMetricSpace { labels, dist })
    }

    /// Points on the real line with `|x - y|` distances, labelled by value.
    pub fn from_line(points: &[T]) -> Result<Self> {
        let labels = points.iter().map(|p| p.to_string()).collect();
        let abs_diff = |x: T, y: T| if x >= y { x - y } else { y - x };
        let dist = points.iter().map(|&x| points.iter().map(|&y| abs_diff(x, y)).collect()).collect();
        Self::new(labels, dist)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn distance(&self, i: usize, j: usize) -> T {
        self.dist[i][j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn diameter(&self) -> T {
        self.set_diameter(&(0..self.len()).collect::<Vec<_>>())
    }

    /// Largest pairwise distance in `set` (zero for fewer than two points).
    pub fn set_diameter(&self, set: &[usize]) -> T {
        let mut d = T::zero();
        for (a, &p) in set.iter().enumerate() {
            for &q in &set[a + 1..] {
                d = d.max_of(self.dist[p][q]);
            }
        }
        d
    }

    /// `d(y, set)`, or `None` for an empty set.
    pub fn distance_to_set(&self, y: usize, set: &[usize]) -> Option<T> {
        set.iter().map(|&x| self.dist[y][x]).reduce(Scalar::min_of)
    }
}

/// Output of [`build_gl_partition`].
///
/// Serializes as `{"a":3,"blocks":[["p0","p1"],["p2"]],"D":1,"k":1,"trivial":false,...}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlPartition<T> {
    pub a: u32,
    /// Distinct blocks, ordered by their first point.
    pub blocks: Vec<Vec<String>>,
    /// `max(diam(block), 1)` over the blocks.
    #[serde(rename = "D")]
    pub scale: T,
    /// Number of expansion steps until the sets stopped changing.
    pub k: usize,
    /// Some block is the whole space.
    pub trivial: bool,
    /// How many of the `n` expanded sets coincide with each block.
    pub multiplicity: Vec<usize>,
    /// Block members as point indices.
    #[serde(skip)]
    pub members: Vec<Vec<usize>>,
    /// `d_0, d_1, …, d_k`.
    #[serde(skip)]
    pub scale_history: Vec<T>,
}

impl<T: Scalar> GlPartition<T> {
    /// `d_m ≤ (2a+1)^m` at every recorded step.
    pub fn growth_bound_holds(&self) -> bool {
        let base = 2.0 * self.a as f64 + 1.0;
        self.scale_history.iter().enumerate().all(|(m, d)| d.as_f64() <= base.powi(m as i32) * (1.0 + 1e-12))
    }
}

/// Runs the neighbourhood expansion to its fixed point.
pub fn build_gl_partition<T: Scalar>(space: &FiniteMetricSpace<T>, a: u32) -> Result<GlPartition<T>> {
    if a < 3 {
        return Err(Error::InvalidParameter(format!("a = {a}; the construction needs an integer a >= 3")));
    }
    let n = space.len();
    if n == 0 {
        return Err(Error::InvalidParameter("metric space has no points".into()));
    }
    let a_t = T::from_u64(a as u64);
    let mut sets: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut scale = T::one();
    let mut history = vec![scale];
    let mut k = 0;
    loop {
        let radius = a_t * scale;
        let next: Vec<Vec<usize>> = sets
            .par_iter()
            .map(|set| (0..n).filter(|&y| space.distance_to_set(y, set).unwrap() <= radius).collect())
            .collect();
        if next == sets {
            break;
        }
        sets = next;
        k += 1;
        scale = sets.iter().map(|s| space.set_diameter(s)).fold(T::one(), Scalar::max_of);
        history.push(scale);
    }

    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut multiplicity = Vec::new();
    for set in sets {
        match members.iter().position(|b| *b == set) {
            Some(i) => multiplicity[i] += 1,
            None => {
                members.push(set);
                multiplicity.push(1);
            }
        }
    }
    let trivial = members.iter().any(|b| b.len() == n);
    let blocks = members.iter().map(|b| b.iter().map(|&i| space.labels[i].clone()).collect()).collect();
    let partition = GlPartition { a, blocks, scale, k, trivial, multiplicity, members, scale_history: history };
    assert!(partition.growth_bound_holds(), "scale sequence exceeded (2a+1)^m: {:?}", partition.scale_history);
    Ok(partition)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationFailure<T> {
    pub block: usize,
    /// `d(A, Y \ A)`.
    pub separation: T,
    /// `a · D`.
    pub required: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport<T> {
    pub a: u32,
    pub block_count: usize,
    /// Labels in blocks that are not points of the space.
    pub unknown_labels: Vec<String>,
    pub empty_blocks: Vec<usize>,
    /// Pairs of blocks that intersect without being equal.
    pub overlapping_blocks: Vec<(usize, usize)>,
    /// Points covered by no block.
    pub uncovered: Vec<String>,
    /// `D = max(diam(block), 1)` recomputed from raw distances.
    pub scale: T,
    pub separation_failures: Vec<SeparationFailure<T>>,
    pub condition_equal_or_disjoint: bool,
    pub condition_covers: bool,
    pub condition_separated: bool,
    pub nontrivial: bool,
    pub passes: bool,
}

/// Re-checks the gl-partition conditions from the space's distances and the
/// partition's block labels only.
pub fn verify_gl_partition<T: Scalar>(
    space: &FiniteMetricSpace<T>,
    partition: &GlPartition<T>,
    a: u32,
) -> VerificationReport<T> {
    verify_blocks(space, &partition.blocks, a)
}

/// [`verify_gl_partition`] on raw label blocks.
pub fn verify_blocks<T: Scalar>(space: &FiniteMetricSpace<T>, blocks: &[Vec<String>], a: u32) -> VerificationReport<T> {
    let n = space.len();
    let mut unknown_labels = Vec::new();
    let idx_blocks: Vec<Vec<usize>> = blocks
        .iter()
        .map(|b| {
            let mut v: Vec<usize> = b
                .iter()
                .filter_map(|l| {
                    let i = space.index_of(l);
                    if i.is_none() {
                        unknown_labels.push(l.clone());
                    }
                    i
                })
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let empty_blocks: Vec<usize> = (0..blocks.len()).filter(|&i| blocks[i].is_empty()).collect();

    let mut overlapping_blocks = Vec::new();
    for i in 0..idx_blocks.len() {
        for j in i + 1..idx_blocks.len() {
            let (x, y) = (&idx_blocks[i], &idx_blocks[j]);
            if x != y && x.iter().any(|p| y.binary_search(p).is_ok()) {
                overlapping_blocks.push((i, j));
            }
        }
    }
    let mut covered = vec![false; n];
    for b in &idx_blocks {
        for &p in b {
            covered[p] = true;
        }
    }
    let uncovered: Vec<String> = (0..n).filter(|&p| !covered[p]).map(|p| space.labels[p].clone()).collect();

    let scale = idx_blocks.iter().map(|b| space.set_diameter(b)).fold(T::one(), Scalar::max_of);
    let required = T::from_u64(a as u64) * scale;
    let mut separation_failures = Vec::new();
    for (i, b) in idx_blocks.iter().enumerate() {
        let outside: Vec<usize> = (0..n).filter(|p| b.binary_search(p).is_err()).collect();
        let separation = b.iter().filter_map(|&p| space.distance_to_set(p, &outside)).reduce(Scalar::min_of);
        if let Some(separation) = separation {
            if separation <= required {
                separation_failures.push(SeparationFailure { block: i, separation, required });
            }
        }
    }

    let condition_equal_or_disjoint = overlapping_blocks.is_empty();
    let condition_covers = unknown_labels.is_empty() && empty_blocks.is_empty() && uncovered.is_empty();
    let condition_separated = separation_failures.is_empty();
    let nontrivial = !idx_blocks.iter().any(|b| b.len() == n);
    VerificationReport {
        a,
        block_count: blocks.len(),
        unknown_labels,
        empty_blocks,
        overlapping_blocks,
        uncovered,
        scale,
        separation_failures,
        condition_equal_or_disjoint,
        condition_covers,
        condition_separated,
        nontrivial,
        passes: condition_equal_or_disjoint && condition_covers && condition_separated,
    }
}

/// Whether two non-trivial gl-partitions are similar: same `a`, same number of
/// blocks, and a block matching under which matched blocks are isometric.
pub fn similar_partitions<T: Scalar>(
    p1: &GlPartition<T>,
    s1: &FiniteMetricSpace<T>,
    p2: &GlPartition<T>,
    s2: &FiniteMetricSpace<T>,
) -> Result<bool> {
    if p1.trivial || p2.trivial {
        return Err(Error::InvalidParameter("similarity is defined for non-trivial partitions".into()));
    }
    if p1.a != p2.a || p1.members.len() != p2.members.len() {
        return Ok(false);
    }
    if let Some(big) = p1.members.iter().chain(&p2.members).map(Vec::len).find(|&l| l > MAX_ISOMETRY_POINTS) {
        return Err(Error::Infeasible(format!(
            "block of {big} points exceeds the isometry search bound of {MAX_ISOMETRY_POINTS}"
        )));
    }
    let m = p1.members.len();
    let compatible: Vec<Vec<bool>> =
        p1.members.iter().map(|x| p2.members.iter().map(|y| find_isometry(s1, x, s2, y).is_some()).collect()).collect();
    // Bipartite matching by augmenting paths.
    let mut owner = vec![usize::MAX; m];
    fn augment(i: usize, compatible: &[Vec<bool>], seen: &mut [bool], owner: &mut [usize]) -> bool {
        for j in 0..owner.len() {
            if compatible[i][j] && !seen[j] {
                seen[j] = true;
                if owner[j] == usize::MAX || augment(owner[j], compatible, seen, owner) {
                    owner[j] = i;
                    return true;
                }
            }
        }
        false
    }
    Ok((0..m).all(|i| augment(i, &compatible, &mut vec![false; m], &mut owner)))
}

/// The sphere `S(center, r)` with word-metric distances computed inside the
/// table. Exact when `d(e, center) + 3r ≤ R`.
pub fn sphere_as_metric_space(
    oracle: &GroupOracle,
    table: &BallTable,
    center: &Element,
    r: u32,
) -> Result<FiniteMetricSpace<u64>> {
    let c = table
        .index_of(oracle, center)
        .ok_or(Error::TruncationTooSmall { needed: u64::MAX, available: table.radius() })?;
    let needed = table.distance(c) as u64 + 3 * r as u64;
    if needed > table.radius() as u64 {
        return Err(Error::TruncationTooSmall { needed, available: table.radius() });
    }
    let from_center = table.distances_from(c, Some(r));
    let points: Vec<usize> = (0..table.len()).filter(|&v| from_center[v] == r).collect();
    let dist: Vec<Vec<u64>> = points
        .par_iter()
        .map(|&p| {
            let row = table.distances_from(p, Some(2 * r));
            points
                .iter()
                .map(|&q| {
                    debug_assert_ne!(row[q], UNREACHED);
                    row[q] as u64
                })
                .collect()
        })
        .collect();
    let labels = points.iter().map(|&p| table.element(p).to_string()).collect();
    FiniteMetricSpace::new(labels, dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{explore, DEFAULT_NODE_BUDGET};
    use crate::group::GroupSpec;

    fn line(points: &[u64]) -> FiniteMetricSpace<u64> {
        FiniteMetricSpace::from_line(points).unwrap()
    }

    #[test]
    fn distant_pair_splits_off() {
        let space = line(&[0, 1, 20000]);
        let p = build_gl_partition(&space, 3).unwrap();
        assert_eq!(p.blocks, vec![vec!["0".to_string(), "1".into()], vec!["20000".into()]]);
        assert_eq!((p.k, p.scale, p.trivial), (1, 1, false));
        assert_eq!(p.multiplicity, vec![2, 1]);
        let rep = verify_gl_partition(&space, &p, 3);
        assert!(rep.passes && rep.nontrivial);
    }

    #[test]
    fn close_points_collapse() {
        let space = line(&[0, 1, 2]);
        let p = build_gl_partition(&space, 3).unwrap();
        assert!(p.trivial);
        assert_eq!(p.blocks.len(), 1);
        assert_eq!(p.k, 1);
    }

    #[test]
    fn single_point() {
        let space = FiniteMetricSpace::<u64>::new(vec!["p".into()], vec![vec![0]]).unwrap();
        let p = build_gl_partition(&space, 3).unwrap();
        assert_eq!(p.blocks, vec![vec!["p".to_string()]]);
        assert!(p.trivial);
        assert_eq!(p.k, 0);
    }

    #[test]
    fn rejects_small_a_and_empty_space() {
        assert!(matches!(build_gl_partition(&line(&[0, 5]), 2), Err(Error::InvalidParameter(_))));
        let empty = FiniteMetricSpace::<u64>::new(vec![], vec![]).unwrap();
        assert!(matches!(build_gl_partition(&empty, 3), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn iteration_count_can_exceed_point_count_plus_one() {
        // Overlapping but unequal expansions keep the sets moving for longer
        // than one merge per step.
        let space = line(&[477, 479, 496, 502, 1263, 1333, 1521, 4642]);
        let p = build_gl_partition(&space, 3).unwrap();
        assert_eq!(p.k, 10);
        assert!(p.trivial);
        assert!(p.growth_bound_holds());
    }

    #[test]
    fn singleton_split_fails_separation() {
        let space = line(&[0, 1, 20000]);
        let blocks = vec![vec!["0".to_string()], vec!["1".to_string()], vec!["20000".to_string()]];
        let rep = verify_blocks(&space, &blocks, 3);
        assert!(!rep.condition_separated && rep.condition_covers && rep.condition_equal_or_disjoint);
        assert_eq!(rep.separation_failures[0].block, 0);
        assert_eq!(rep.separation_failures[0].separation, 1);
        assert!(!rep.passes);
    }

    #[test]
    fn overlapping_or_missing_blocks_fail() {
        let space = line(&[0, 1, 20000]);
        let overlap = vec![vec!["0".to_string(), "1".into()], vec!["1".to_string(), "20000".into()]];
        let rep = verify_blocks(&space, &overlap, 3);
        assert!(!rep.condition_equal_or_disjoint);
        assert_eq!(rep.overlapping_blocks, vec![(0, 1)]);
        let missing = vec![vec!["0".to_string(), "1".into()], vec!["7".to_string()]];
        let rep = verify_blocks(&space, &missing, 3);
        assert!(!rep.condition_covers);
        assert_eq!(rep.unknown_labels, vec!["7".to_string()]);
        assert_eq!(rep.uncovered, vec!["20000".to_string()]);
    }

    #[test]
    fn metric_validation() {
        let l = |n: usize| (0..n).map(|i| format!("p{i}")).collect::<Vec<_>>();
        assert!(FiniteMetricSpace::<u64>::new(l(2), vec![vec![0, 1], vec![2, 0]]).is_err());
        assert!(FiniteMetricSpace::<u64>::new(l(2), vec![vec![0, 0], vec![0, 0]]).is_err());
        assert!(FiniteMetricSpace::<u64>::new(l(3), vec![vec![0, 1, 5], vec![1, 0, 1], vec![5, 1, 0]]).is_err());
        assert!(FiniteMetricSpace::<f64>::new(
            l(3),
            vec![vec![0., 1., 2. + 1e-12], vec![1., 0., 1.], vec![2. + 1e-12, 1., 0.]]
        )
        .is_ok());
        assert!(FiniteMetricSpace::<f64>::new(l(2), vec![vec![0., f64::NAN], vec![f64::NAN, 0.]]).is_err());
    }

    #[test]
    fn json_shapes() {
        let space: FiniteMetricSpace<u64> =
            serde_json::from_str(r#"{"points":["a","b","c"],"distances":[[0,1,20000],[1,0,19999],[20000,19999,0]]}"#)
                .unwrap();
        let p = build_gl_partition(&space, 3).unwrap();
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v["blocks"], serde_json::json!([["a", "b"], ["c"]]));
        assert_eq!(v["D"], 1);
        assert_eq!(v["k"], 1);
        assert_eq!(v["trivial"], false);
        let bad: std::result::Result<FiniteMetricSpace<u64>, _> =
            serde_json::from_str(r#"{"points":["a","b"],"distances":[[0,1],[2,0]]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn real_valued_distances() {
        let space = FiniteMetricSpace::<f64>::from_line(&[0.0, 0.5, 1000.25]).unwrap();
        let p = build_gl_partition(&space, 3).unwrap();
        assert_eq!(p.members, vec![vec![0, 1], vec![2]]);
        assert_eq!(p.scale, 1.0);
    }

    #[test]
    fn similarity_of_partitions() {
        let s1 = line(&[0, 1, 500]);
        let s2 = line(&[0, 2, 500]);
        let s3 = line(&[10, 11, 510]);
        let p1 = build_gl_partition(&s1, 3).unwrap();
        let p2 = build_gl_partition(&s2, 3).unwrap();
        let p3 = build_gl_partition(&s3, 3).unwrap();
        assert!(similar_partitions(&p1, &s1, &p3, &s3).unwrap());
        assert!(!similar_partitions(&p1, &s1, &p2, &s2).unwrap());
        let s4 = line(&[0, 400, 800]);
        let p4 = build_gl_partition(&s4, 3).unwrap();
        assert!(!similar_partitions(&p1, &s1, &p4, &s4).unwrap());
        let trivial = build_gl_partition(&line(&[0, 1]), 3).unwrap();
        assert!(similar_partitions(&p1, &s1, &trivial, &line(&[0, 1])).is_err());
    }

    #[test]
    fn oversized_blocks_are_infeasible() {
        let pts: Vec<u64> = (0..17).chain([100_000]).collect();
        let s = line(&pts);
        let p = build_gl_partition(&s, 3).unwrap();
        assert!(matches!(similar_partitions(&p, &s, &p, &s), Err(Error::Infeasible(_))));
    }

    #[test]
    fn spheres_as_metric_spaces() {
        let z = GroupOracle::new(GroupSpec::Z).unwrap();
        let t = explore(&z, 15, DEFAULT_NODE_BUDGET).unwrap();
        let s = sphere_as_metric_space(&z, &t, &z.identity(), 5).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.distance(0, 1), 10);
        assert!(matches!(
            sphere_as_metric_space(&z, &t, &Element::Vector(vec![1]), 5),
            Err(Error::TruncationTooSmall { needed: 16, .. })
        ));

        let z2 = GroupOracle::new(GroupSpec::ZPow { k: 2 }).unwrap();
        let t = explore(&z2, 6, DEFAULT_NODE_BUDGET).unwrap();
        let s = sphere_as_metric_space(&z2, &t, &z2.identity(), 2).unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s.diameter(), 4);

        let f2 = GroupOracle::new(GroupSpec::Free { k: 2 }).unwrap();
        let t = explore(&f2, 6, DEFAULT_NODE_BUDGET).unwrap();
        let s = sphere_as_metric_space(&f2, &t, &f2.identity(), 2).unwrap();
        assert_eq!(s.len(), 12);
        // In the tree, d(x, y) = 4 - 2·|common prefix|.
        for i in 0..12 {
            for j in 0..12 {
                let common = common_prefix(&word(&s, i), &word(&s, j));
                let expected = if i == j { 0 } else { 4 - 2 * common as u64 };
                assert_eq!(s.distance(i, j), expected);
            }
        }
    }

    fn word(s: &FiniteMetricSpace<u64>, i: usize) -> Element {
        let letters = s.labels()[i]
            .split(' ')
            .map(|l| match l.strip_suffix("^-1") {
                Some(x) => -x[1..].parse::<i32>().unwrap(),
                None => l[1..].parse::<i32>().unwrap(),
            })
            .collect();
        Element::Word(letters)
    }

    fn common_prefix(a: &Element, b: &Element) -> usize {
        match (a, b) {
            (Element::Word(x), Element::Word(y)) => x.iter().zip(y).take_while(|(p, q)| p == q).count(),
            _ => unreachable!(),
        }
    }
}
