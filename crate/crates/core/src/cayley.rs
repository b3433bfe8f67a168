//! Breadth-first materialization of balls, spheres and geodesic axes in a
//! Cayley graph.

use std::collections::{HashMap, HashSet, VecDeque};
use std::io::{self, Write};
use std::ops::Range;

use crate::error::{Error, Result};
use crate::group::{Element, GroupOracle, GroupSpec};

/// Default cap on the number of group elements a single exploration may visit.
pub const DEFAULT_NODE_BUDGET: usize = 5_000_000;

/// Marker for "not reached" in per-source distance vectors.
pub const UNREACHED: u32 = u32::MAX;

/// The ball `B(R)` with exact word-metric distances from the identity.
///
/// Vertices are stored in BFS order, so the vertices at distance `r` occupy a
/// contiguous index range ([`BallTable::layer`]). Adjacency lists only hold
/// neighbours inside the ball; each edge is a right multiplication by a
/// generator.
#[derive(Debug, Clone)]
pub struct BallTable {
    spec: GroupSpec,
    radius: u32,
    elements: Vec<Element>,
    distances: Vec<u32>,
    index: HashMap<Vec<u8>, u32>,
    layer_starts: Vec<usize>,
    adj_offsets: Vec<usize>,
    adj: Vec<u32>,
    complete_group: bool,
}

/// Explores `B(radius)` by breadth-first search from the identity.
pub fn explore(oracle: &GroupOracle, radius: u32, budget: usize) -> Result<BallTable> {
    let gens = oracle.generators();
    let identity = oracle.identity();
    let mut index = HashMap::new();
    index.insert(oracle.canonical_key(&identity), 0u32);
    let mut elements = vec![identity];
    let mut distances = vec![0u32];
    let mut layer_starts = vec![0usize];
    let mut adj_offsets = vec![0usize];
    let mut adj: Vec<u32> = Vec::new();

    if budget == 0 {
        return Err(Error::BudgetExceeded { budget, radius_reached: 0 });
    }

    for r in 0..radius {
        let (start, end) = (layer_starts[r as usize], elements.len());
        layer_starts.push(end);
        for v in start..end {
            for s in gens {
                let w = oracle.multiply(&elements[v], s);
                let key = oracle.canonical_key(&w);
                let idx = match index.get(&key) {
                    Some(&idx) => idx,
                    None => {
                        if elements.len() >= budget {
                            return Err(Error::BudgetExceeded { budget, radius_reached: r });
                        }
                        let idx = elements.len() as u32;
                        index.insert(key, idx);
                        elements.push(w);
                        distances.push(r + 1);
                        idx
                    }
                };
                adj.push(idx);
            }
            adj_offsets.push(adj.len());
        }
    }
    // Outermost layer: neighbours are looked up, never inserted.
    let last_start = *layer_starts.last().unwrap();
    layer_starts.push(elements.len());
    for v in &elements[last_start..] {
        for s in gens {
            let w = oracle.multiply(v, s);
            if let Some(&idx) = index.get(&oracle.canonical_key(&w)) {
                adj.push(idx);
            }
        }
        adj_offsets.push(adj.len());
    }

    let complete_group = adj_offsets.windows(2).all(|w| w[1] - w[0] == gens.len());
    Ok(BallTable {
        spec: oracle.spec().clone(),
        radius,
        elements,
        distances,
        index,
        layer_starts,
        adj_offsets,
        adj,
        complete_group,
    })
}

impl BallTable {
    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Set when no vertex has a neighbour outside the table: the whole
    /// (finite) group was enumerated.
    pub fn is_complete_group(&self) -> bool {
        self.complete_group
    }

    pub fn element(&self, v: usize) -> &Element {
        &self.elements[v]
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn distance(&self, v: usize) -> u32 {
        self.distances[v]
    }

    pub fn distances(&self) -> &[u32] {
        &self.distances
    }

    pub fn index_of_key(&self, key: &[u8]) -> Option<usize> {
        self.index.get(key).map(|&i| i as usize)
    }

    pub fn index_of(&self, oracle: &GroupOracle, g: &Element) -> Option<usize> {
        self.index_of_key(&oracle.canonical_key(g))
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[self.adj_offsets[v]..self.adj_offsets[v + 1]]
    }

    /// Index range of the sphere `S(r)`; empty past the radius.
    pub fn layer(&self, r: u32) -> Range<usize> {
        let r = r as usize;
        if r + 1 >= self.layer_starts.len() {
            let n = self.elements.len();
            return n..n;
        }
        self.layer_starts[r]..self.layer_starts[r + 1]
    }

    pub fn sphere_size(&self, r: u32) -> usize {
        self.layer(r).len()
    }

    pub fn ball_size(&self, r: u32) -> usize {
        self.layer(r.min(self.radius)).end
    }

    /// `(r, |S(r)|)` for `r = 0..=R`.
    pub fn sphere_sizes(&self) -> Vec<(u32, usize)> {
        (0..=self.radius).map(|r| (r, self.sphere_size(r))).collect()
    }

    /// Word-metric distances from `source` along edges inside the table,
    /// stopping at `max_depth` when given. Unreached vertices hold [`UNREACHED`].
    pub fn distances_from(&self, source: usize, max_depth: Option<u32>) -> Vec<u32> {
        self.distances_from_set(&[source], max_depth, |_| true)
    }

    /// Multi-source BFS restricted to vertices accepted by `allowed`.
    pub fn distances_from_set(
        &self,
        sources: &[usize],
        max_depth: Option<u32>,
        allowed: impl Fn(usize) -> bool,
    ) -> Vec<u32> {
        let mut dist = vec![UNREACHED; self.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if allowed(s) && dist[s] == UNREACHED {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        let max_depth = max_depth.unwrap_or(UNREACHED - 1);
        while let Some(v) = queue.pop_front() {
            let d = dist[v];
            if d >= max_depth {
                continue;
            }
            for &w in self.neighbors(v) {
                let w = w as usize;
                if dist[w] == UNREACHED && allowed(w) {
                    dist[w] = d + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Debug dump: `key,distance,neighbor_count` rows with hex keys.
    pub fn write_csv<W: Write>(&self, oracle: &GroupOracle, mut out: W) -> io::Result<()> {
        writeln!(out, "key,distance,neighbor_count")?;
        for v in 0..self.len() {
            let key: String = oracle.canonical_key(&self.elements[v]).iter().map(|b| format!("{b:02x}")).collect();
            writeln!(out, "{key},{},{}", self.distances[v], self.neighbors(v).len())?;
        }
        Ok(())
    }
}

/// Sphere sizes from a layered BFS that keeps only three layers in memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SphereCounts {
    /// `sizes[r] = |S(r)|` for `r = 0..=radius`.
    pub sizes: Vec<usize>,
    /// The BFS ran out of new elements before `radius`.
    pub exhausted: bool,
    pub visited: usize,
}

/// Counts `|S(r)|` for `r = 0..=radius` without materializing the ball.
///
/// In a Cayley graph the neighbours of `S(r)` lie in `S(r-1) ∪ S(r) ∪ S(r+1)`,
/// so the previous and current layers suffice for deduplication. The budget
/// bounds the total number of elements visited.
pub fn sphere_counts(oracle: &GroupOracle, radius: u32, budget: usize) -> Result<SphereCounts> {
    let identity = oracle.identity();
    let mut prev: HashSet<Vec<u8>> = HashSet::new();
    let mut cur_keys: HashSet<Vec<u8>> = HashSet::from([oracle.canonical_key(&identity)]);
    let mut cur = vec![identity];
    let mut sizes = vec![1usize];
    let mut visited = 1usize;
    for r in 0..radius {
        let mut next_keys = HashSet::new();
        let mut next = Vec::new();
        for v in &cur {
            for s in oracle.generators() {
                let w = oracle.multiply(v, s);
                let key = oracle.canonical_key(&w);
                if prev.contains(&key) || cur_keys.contains(&key) || next_keys.contains(&key) {
                    continue;
                }
                visited += 1;
                if visited > budget {
                    return Err(Error::BudgetExceeded { budget, radius_reached: r });
                }
                next_keys.insert(key);
                next.push(w);
            }
        }
        if next.is_empty() {
            sizes.resize(radius as usize + 1, 0);
            return Ok(SphereCounts { sizes, exhausted: true, visited });
        }
        sizes.push(next.len());
        prev = std::mem::replace(&mut cur_keys, next_keys);
        cur = next;
    }
    Ok(SphereCounts { sizes, exhausted: false, visited })
}

/// Word length of `g`, found by a layered BFS from the identity up to
/// `max_radius`. `None` when `g` is farther than `max_radius`.
pub fn word_length(oracle: &GroupOracle, g: &Element, max_radius: u32, budget: usize) -> Result<Option<u32>> {
    let target = oracle.canonical_key(g);
    let identity = oracle.identity();
    let id_key = oracle.canonical_key(&identity);
    if id_key == target {
        return Ok(Some(0));
    }
    let mut prev: HashSet<Vec<u8>> = HashSet::new();
    let mut cur_keys: HashSet<Vec<u8>> = HashSet::from([id_key]);
    let mut cur = vec![identity];
    let mut visited = 1usize;
    for r in 0..max_radius {
        let mut next_keys = HashSet::new();
        let mut next = Vec::new();
        for v in &cur {
            for s in oracle.generators() {
                let w = oracle.multiply(v, s);
                let key = oracle.canonical_key(&w);
                if key == target {
                    return Ok(Some(r + 1));
                }
                if prev.contains(&key) || cur_keys.contains(&key) || next_keys.contains(&key) {
                    continue;
                }
                visited += 1;
                if visited > budget {
                    return Err(Error::BudgetExceeded { budget, radius_reached: r });
                }
                next_keys.insert(key);
                next.push(w);
            }
        }
        if next.is_empty() {
            break;
        }
        prev = std::mem::replace(&mut cur_keys, next_keys);
        cur = next;
    }
    Ok(None)
}

/// A bi-infinite path `γ_i`, `i ∈ [-L, L]`, read off powers of an axis word.
///
/// `γ_i` for `i > 0` is the length-`i` prefix of `w w w …`; for `i < 0` it is
/// the length-`|i|` prefix of `w⁻¹ w⁻¹ …`.
#[derive(Debug, Clone)]
pub struct GeodesicAxis {
    word: Vec<usize>,
    extent: u32,
    vertices: Vec<Element>,
    indices: Vec<usize>,
}

impl GeodesicAxis {
    pub fn word(&self) -> &[usize] {
        &self.word
    }

    pub fn extent(&self) -> u32 {
        self.extent
    }

    /// `γ_i`; panics when `|i|` exceeds the extent.
    pub fn vertex(&self, i: i64) -> &Element {
        &self.vertices[(i + self.extent as i64) as usize]
    }

    /// Table index of `γ_i` in the table the axis was verified against.
    pub fn table_index(&self, i: i64) -> usize {
        self.indices[(i + self.extent as i64) as usize]
    }
}

/// Builds `γ_{-L}..γ_L` along the oracle's designated axis and checks
/// `d(e, γ_i) = |i|` against the table.
pub fn build_axis(oracle: &GroupOracle, table: &BallTable, extent: u32) -> Result<GeodesicAxis> {
    let word = oracle.axis_word().ok_or(Error::NoAxis)?.to_vec();
    if extent > table.radius() {
        return Err(Error::InvalidParameter(format!("axis extent {extent} exceeds table radius {}", table.radius())));
    }
    let backward: Vec<usize> = word.iter().rev().map(|&i| oracle.inverse_generator(i)).collect();
    let gens = oracle.generators();
    let walk = |w: &[usize]| {
        let mut out = Vec::with_capacity(extent as usize);
        let mut g = oracle.identity();
        for step in 0..extent as usize {
            g = oracle.multiply(&g, &gens[w[step % w.len()]]);
            out.push(g.clone());
        }
        out
    };
    let fwd = walk(&word);
    let bwd = walk(&backward);
    let mut vertices: Vec<Element> = bwd.into_iter().rev().collect();
    vertices.push(oracle.identity());
    vertices.extend(fwd);

    let mut indices = Vec::with_capacity(vertices.len());
    for (pos, g) in vertices.iter().enumerate() {
        let i = pos as i64 - extent as i64;
        let expected = i.unsigned_abs();
        match table.index_of(oracle, g) {
            Some(v) if table.distance(v) as u64 == expected => indices.push(v),
            Some(v) => return Err(Error::NotGeodesic { index: i, expected, found: table.distance(v).to_string() }),
            None => return Err(Error::NotGeodesic { index: i, expected, found: "outside the ball".into() }),
        }
    }
    Ok(GeodesicAxis { word, extent, vertices, indices })
}
