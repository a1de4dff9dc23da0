//! Graph construction, an exact MIS oracle, and solution-quality metrics.
//!
//! Vertices carry 2D coordinates in micrometers. For `kings` and `unit_disk`
//! graphs the edge set is exactly the distance-threshold predicate: an edge
//! is present iff the Euclidean distance between the endpoints is at most
//! the blockade radius. `explicit` graphs carry an arbitrary edge list.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a graph's edge set was defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Kings,
    UnitDisk,
    Explicit,
}

/// An undirected graph embedded in the plane.
///
/// Immutable after construction; edges are stored canonically as `(i, j)`
/// with `i < j`, sorted lexicographically. The adjacency lists are derived
/// once at construction.
#[derive(Debug, Clone)]
pub struct Graph {
    kind: GraphKind,
    positions: Vec<[f64; 2]>,
    edges: Vec<(u32, u32)>,
    blockade_radius: Option<f64>,
    seed: Option<u64>,
    adjacency: Vec<Vec<u32>>,
}

impl Graph {
    /// Validates all invariants and builds the adjacency lists.
    pub fn from_parts(
        kind: GraphKind,
        positions: Vec<[f64; 2]>,
        mut edges: Vec<(u32, u32)>,
        blockade_radius: Option<f64>,
        seed: Option<u64>,
    ) -> Result<Self> {
        let n = positions.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if positions[i] == positions[j] {
                    return Err(Error::DuplicatePositions(i, j));
                }
            }
        }
        for e in edges.iter_mut() {
            if e.0 == e.1 {
                return Err(Error::InvalidEdge(e.0, e.1, "self-loop".into()));
            }
            if e.0 as usize >= n || e.1 as usize >= n {
                return Err(Error::InvalidEdge(e.0, e.1, format!("index out of range (n={n})")));
            }
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidEdge(0, 0, "duplicate edge".into()));
        }
        if matches!(kind, GraphKind::Kings | GraphKind::UnitDisk) {
            let radius = blockade_radius.ok_or_else(|| {
                Error::InvalidParam("kings/unit_disk graphs require a blockade radius".into())
            })?;
            let expected = threshold_edges(&positions, radius);
            if expected != edges {
                return Err(Error::InvalidParam(
                    "edge set does not match the distance-threshold predicate".into(),
                ));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in &edges {
            adjacency[i as usize].push(j);
            adjacency[j as usize].push(i);
        }
        for nbrs in adjacency.iter_mut() {
            nbrs.sort_unstable();
        }
        Ok(Graph {
            kind,
            positions,
            edges,
            blockade_radius,
            seed,
            adjacency,
        })
    }

    /// Builds an `explicit`-kind graph from positions and an arbitrary edge list.
    pub fn explicit(positions: Vec<[f64; 2]>, edges: Vec<(u32, u32)>) -> Result<Self> {
        Self::from_parts(GraphKind::Explicit, positions, edges, None, None)
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    /// Canonical edge list: `(i, j)` with `i < j`, sorted lexicographically.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn blockade_radius(&self) -> Option<f64> {
        self.blockade_radius
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let [xi, yi] = self.positions[i];
        let [xj, yj] = self.positions[j];
        ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt()
    }
}

fn threshold_edges(positions: &[[f64; 2]], radius: f64) -> Vec<(u32, u32)> {
    let mut edges = Vec::new();
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            let dx = positions[i][0] - positions[j][0];
            let dy = positions[i][1] - positions[j][1];
            if (dx * dx + dy * dy).sqrt() <= radius {
                edges.push((i as u32, j as u32));
            }
        }
    }
    edges
}

/// Diagonal neighbors sit at `spacing * sqrt(2)`; the 1% guard keeps them
/// strictly inside the radius without admitting distance-2 sites.
const KINGS_RADIUS_GUARD: f64 = 1.01;

/// Generates a (possibly diluted) King's graph on a `rows x cols` lattice.
///
/// Sites are kept as a uniform random subset of exactly
/// `ceil(fill_fraction * rows * cols)` lattice points, drawn from `seed`.
/// The blockade radius is `spacing * sqrt(2) * 1.01` so lateral and diagonal
/// lattice neighbors are edges while distance-2 sites are not.
pub fn generate_kings_graph(
    rows: usize,
    cols: usize,
    fill_fraction: f64,
    lattice_spacing: f64,
    seed: u64,
) -> Result<Graph> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParam("rows and cols must be >= 1".into()));
    }
    if lattice_spacing <= 0.0 {
        return Err(Error::InvalidParam("lattice spacing must be > 0".into()));
    }
    if !(0.0..=1.0).contains(&fill_fraction) {
        return Err(Error::InvalidParam("fill fraction must be in [0, 1]".into()));
    }
    let total = rows * cols;
    let keep = ((fill_fraction * total as f64).ceil() as usize).min(total);
    if keep == 0 {
        return Err(Error::EmptyGraph);
    }

    let mut site_indices: Vec<usize> = (0..total).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (chosen, _) = site_indices.partial_shuffle(&mut rng, keep);
    let mut chosen: Vec<usize> = chosen.to_vec();
    chosen.sort_unstable();

    let positions: Vec<[f64; 2]> = chosen
        .iter()
        .map(|&site| {
            let r = site / cols;
            let c = site % cols;
            [c as f64 * lattice_spacing, r as f64 * lattice_spacing]
        })
        .collect();

    let radius = lattice_spacing * std::f64::consts::SQRT_2 * KINGS_RADIUS_GUARD;
    let edges = threshold_edges(&positions, radius);
    Graph::from_parts(GraphKind::Kings, positions, edges, Some(radius), Some(seed))
}

/// Builds a unit-disk graph: an edge wherever the pairwise distance is at
/// most `radius`.
pub fn build_unit_disk_edges(positions: Vec<[f64; 2]>, radius: f64) -> Result<Graph> {
    if radius <= 0.0 {
        return Err(Error::InvalidParam("radius must be > 0".into()));
    }
    let edges = threshold_edges(&positions, radius);
    Graph::from_parts(GraphKind::UnitDisk, positions, edges, Some(radius), None)
}

// ============================================================================
// Spin configurations
// ============================================================================

/// A length-n binary occupation vector: a candidate independent set.
///
/// Independence is deliberately not an invariant — configurations that
/// violate it are legal states of the annealer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfiguration {
    bits: Vec<bool>,
}

impl SpinConfiguration {
    pub fn new(bits: Vec<bool>) -> Self {
        SpinConfiguration { bits }
    }

    pub fn zeros(n: usize) -> Self {
        SpinConfiguration { bits: vec![false; n] }
    }

    /// Parses a `{0,1}` string; vertex 0 is the leftmost character.
    pub fn from_bitstring(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Format(format!("invalid bitstring character {other:?}"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        Ok(SpinConfiguration { bits })
    }

    /// Renders with vertex 0 leftmost.
    pub fn to_bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn popcount(&self) -> u32 {
        self.bits.iter().filter(|&&b| b).count() as u32
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    /// True when no edge of `graph` has both endpoints occupied.
    pub fn is_independent(&self, graph: &Graph) -> bool {
        graph
            .edges()
            .iter()
            .all(|&(i, j)| !(self.bits[i as usize] && self.bits[j as usize]))
    }
}

// Serialized as a bitstring with vertex 0 leftmost.
impl Serialize for SpinConfiguration {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_bitstring())
    }
}

impl<'de> Deserialize<'de> for SpinConfiguration {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        SpinConfiguration::from_bitstring(&s).map_err(serde::de::Error::custom)
    }
}

// ============================================================================
// Metrics
// ============================================================================

fn check_len(graph: &Graph, config: &SpinConfiguration) -> Result<()> {
    if config.len() != graph.n() {
        return Err(Error::LengthMismatch {
            expected: graph.n(),
            actual: config.len(),
        });
    }
    Ok(())
}

/// Number of edges whose both endpoints are occupied.
pub fn violating_edges(graph: &Graph, config: &SpinConfiguration) -> Result<u32> {
    check_len(graph, config)?;
    Ok(graph
        .edges()
        .iter()
        .filter(|&&(i, j)| config.bit(i as usize) && config.bit(j as usize))
        .count() as u32)
}

/// Approximation ratio: `(occupied - violating_edges) / mis_size`.
///
/// Not clamped — the ratio is a signed quantity and trajectories may pass
/// through negative values.
pub fn approximation_ratio(graph: &Graph, config: &SpinConfiguration, mis_size: u32) -> Result<f64> {
    if mis_size == 0 {
        return Err(Error::InvalidParam("mis_size must be >= 1".into()));
    }
    let violations = violating_edges(graph, config)?;
    Ok((config.popcount() as f64 - violations as f64) / mis_size as f64)
}

/// Count of positions where two configurations differ.
pub fn hamming_distance(s: &SpinConfiguration, t: &SpinConfiguration) -> Result<u32> {
    if s.len() != t.len() {
        return Err(Error::LengthMismatch {
            expected: s.len(),
            actual: t.len(),
        });
    }
    Ok(s.as_slice()
        .iter()
        .zip(t.as_slice())
        .filter(|(a, b)| a != b)
        .count() as u32)
}

/// Mean vertex degree, `2|E| / n`.
pub fn average_degree(graph: &Graph) -> f64 {
    2.0 * graph.edge_count() as f64 / graph.n() as f64
}

// ============================================================================
// Exact MIS oracle
// ============================================================================

/// An exact maximum independent set with one witness.
#[derive(Debug, Clone)]
pub struct MisCertificate {
    pub size: u32,
    pub witness: SpinConfiguration,
}

/// Limits for the branch-and-bound oracle.
#[derive(Debug, Clone, Copy)]
pub struct MisOracleConfig {
    /// Largest vertex count accepted.
    pub max_n: usize,
    /// Maximum branch-and-bound node expansions before giving up.
    pub node_budget: u64,
}

impl Default for MisOracleConfig {
    fn default() -> Self {
        MisOracleConfig {
            max_n: 150,
            node_budget: 20_000_000,
        }
    }
}

/// Computes an exact maximum independent set with the default limits.
pub fn exact_mis(graph: &Graph) -> Result<MisCertificate> {
    exact_mis_with(graph, &MisOracleConfig::default())
}

/// Exact MIS via branch-and-bound with degree-0/1 folding and a greedy
/// clique-cover bound. Exceeding either limit yields a budget error; the
/// caller may raise the limits.
pub fn exact_mis_with(graph: &Graph, config: &MisOracleConfig) -> Result<MisCertificate> {
    let n = graph.n();
    if n > config.max_n {
        return Err(Error::MisBudgetExceeded);
    }
    let words = n.div_ceil(64);
    let adj: Vec<Vec<u64>> = (0..n)
        .map(|v| {
            let mut row = vec![0u64; words];
            for &u in graph.neighbors(v) {
                row[u as usize / 64] |= 1 << (u as usize % 64);
            }
            row
        })
        .collect();
    let mut alive = vec![!0u64; words];
    if n % 64 != 0 {
        alive[words - 1] = (1u64 << (n % 64)) - 1;
    }

    let mut search = MisSearch {
        adj,
        best_size: 0,
        best_set: vec![0u64; words],
        nodes: 0,
        budget: config.node_budget,
    };
    let picked = vec![0u64; words];
    search.branch(alive.clone(), picked, 0)?;

    let mut bits = vec![false; n];
    for (v, bit) in bits.iter_mut().enumerate() {
        *bit = search.best_set[v / 64] >> (v % 64) & 1 == 1;
    }
    Ok(MisCertificate {
        size: search.best_size,
        witness: SpinConfiguration::new(bits),
    })
}

struct MisSearch {
    adj: Vec<Vec<u64>>,
    best_size: u32,
    best_set: Vec<u64>,
    nodes: u64,
    budget: u64,
}

fn bs_count(set: &[u64]) -> u32 {
    set.iter().map(|w| w.count_ones()).sum()
}

fn bs_test(set: &[u64], v: usize) -> bool {
    set[v / 64] >> (v % 64) & 1 == 1
}

fn bs_clear(set: &mut [u64], v: usize) {
    set[v / 64] &= !(1u64 << (v % 64));
}

fn bs_set(set: &mut [u64], v: usize) {
    set[v / 64] |= 1u64 << (v % 64);
}

fn bs_and_not(set: &mut [u64], other: &[u64]) {
    for (w, o) in set.iter_mut().zip(other) {
        *w &= !o;
    }
}

fn bs_first(set: &[u64]) -> Option<usize> {
    for (k, &w) in set.iter().enumerate() {
        if w != 0 {
            return Some(k * 64 + w.trailing_zeros() as usize);
        }
    }
    None
}

fn bs_iter(set: &[u64]) -> impl Iterator<Item = usize> + '_ {
    set.iter().enumerate().flat_map(|(k, &w)| {
        let mut word = w;
        std::iter::from_fn(move || {
            if word == 0 {
                return None;
            }
            let v = word.trailing_zeros() as usize;
            word &= word - 1;
            Some(k * 64 + v)
        })
    })
}

impl MisSearch {
    fn alive_degree(&self, v: usize, alive: &[u64]) -> u32 {
        self.adj[v]
            .iter()
            .zip(alive)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    /// Upper bound on the independent set inside `alive`: greedily cover the
    /// vertices with cliques; each clique contributes at most one vertex.
    fn clique_cover_bound(&self, alive: &[u64]) -> u32 {
        let mut remaining = alive.to_vec();
        let mut cliques = 0;
        while let Some(v) = bs_first(&remaining) {
            bs_clear(&mut remaining, v);
            let mut cand: Vec<u64> = self.adj[v]
                .iter()
                .zip(&remaining)
                .map(|(a, b)| a & b)
                .collect();
            while let Some(u) = bs_first(&cand) {
                bs_clear(&mut remaining, u);
                for ((c, a), r) in cand.iter_mut().zip(&self.adj[u]).zip(&remaining) {
                    *c &= a & r;
                }
            }
            cliques += 1;
        }
        cliques
    }

    fn branch(&mut self, mut alive: Vec<u64>, mut picked: Vec<u64>, mut size: u32) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::MisBudgetExceeded);
        }

        // Degree-0/1 folding: isolated vertices are always taken; a degree-1
        // vertex can be taken ahead of its neighbor without losing optimality.
        loop {
            let mut reduced = false;
            for v in bs_iter(&alive.clone()) {
                if !bs_test(&alive, v) {
                    continue;
                }
                let deg = self.alive_degree(v, &alive);
                if deg == 0 {
                    bs_set(&mut picked, v);
                    bs_clear(&mut alive, v);
                    size += 1;
                    reduced = true;
                } else if deg == 1 {
                    bs_set(&mut picked, v);
                    bs_clear(&mut alive, v);
                    bs_and_not(&mut alive, &self.adj[v]);
                    size += 1;
                    reduced = true;
                }
            }
            if !reduced {
                break;
            }
        }

        if bs_count(&alive) == 0 {
            if size > self.best_size {
                self.best_size = size;
                self.best_set = picked;
            }
            return Ok(());
        }
        if size + self.clique_cover_bound(&alive) <= self.best_size {
            return Ok(());
        }

        let v = bs_iter(&alive)
            .max_by_key(|&v| self.alive_degree(v, &alive))
            .expect("alive set is non-empty");

        // Include v: drop its closed neighborhood.
        let mut inc_alive = alive.clone();
        bs_clear(&mut inc_alive, v);
        bs_and_not(&mut inc_alive, &self.adj[v]);
        let mut inc_picked = picked.clone();
        bs_set(&mut inc_picked, v);
        self.branch(inc_alive, inc_picked, size + 1)?;

        // Exclude v.
        bs_clear(&mut alive, v);
        self.branch(alive, picked, size)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line_positions(n: usize, spacing: f64) -> Vec<[f64; 2]> {
        (0..n).map(|i| [i as f64 * spacing, 0.0]).collect()
    }

    /// Exhaustive MIS over all 2^n subsets; test oracle, independent of the
    /// branch-and-bound path.
    pub(crate) fn brute_force_mis(graph: &Graph) -> u32 {
        let n = graph.n();
        assert!(n <= 24, "brute force limited to n <= 24");
        let adj_masks: Vec<u32> = (0..n)
            .map(|v| graph.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u))
            .collect();
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let mut ok = true;
            let mut m = mask;
            while m != 0 {
                let v = m.trailing_zeros() as usize;
                if adj_masks[v] & mask != 0 {
                    ok = false;
                    break;
                }
                m &= m - 1;
            }
            if ok {
                best = best.max(mask.count_ones());
            }
        }
        best
    }

    #[test]
    fn kings_3x3_full() {
        let g = generate_kings_graph(3, 3, 1.0, 6.0, 0).unwrap();
        assert_eq!(g.n(), 9);
        assert_eq!(g.edge_count(), 20);
    }

    #[test]
    fn kings_single_site() {
        let g = generate_kings_graph(1, 1, 1.0, 6.0, 42).unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn kings_2x2_is_k4() {
        let g = generate_kings_graph(2, 2, 1.0, 5.3, 7).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn kings_zero_fill_is_empty() {
        assert!(matches!(
            generate_kings_graph(4, 4, 0.0, 6.0, 1),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn kings_dilution_keeps_exact_count() {
        let g = generate_kings_graph(4, 4, 0.8, 6.0, 3).unwrap();
        assert_eq!(g.n(), 13); // ceil(0.8 * 16)
    }

    #[test]
    fn kings_same_seed_same_graph() {
        let a = generate_kings_graph(5, 5, 0.7, 6.0, 11).unwrap();
        let b = generate_kings_graph(5, 5, 0.7, 6.0, 11).unwrap();
        assert_eq!(a.positions(), b.positions());
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn unit_disk_blockaded_pair() {
        let g = build_unit_disk_edges(vec![[0.0, 0.0], [5.3, 0.0]], 7.5).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn unit_disk_distant_pair() {
        let g = build_unit_disk_edges(vec![[0.0, 0.0], [20.0, 0.0]], 7.5).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn unit_disk_collinear_path() {
        let g = build_unit_disk_edges(line_positions(3, 6.0), 7.5).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn unit_disk_duplicate_positions_rejected() {
        let err = build_unit_disk_edges(vec![[0.0, 0.0], [0.0, 0.0]], 7.5).unwrap_err();
        assert!(matches!(err, Error::DuplicatePositions(0, 1)));
    }

    #[test]
    fn explicit_rejects_bad_edges() {
        let pos = line_positions(3, 1.0);
        assert!(Graph::explicit(pos.clone(), vec![(0, 0)]).is_err());
        assert!(Graph::explicit(pos.clone(), vec![(0, 5)]).is_err());
        assert!(Graph::explicit(pos, vec![(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn exact_mis_path_p3() {
        let g = Graph::explicit(line_positions(3, 1.0), vec![(0, 1), (1, 2)]).unwrap();
        let cert = exact_mis(&g).unwrap();
        assert_eq!(cert.size, 2);
        assert_eq!(cert.witness.to_bitstring(), "101");
    }

    #[test]
    fn exact_mis_k4() {
        let g = generate_kings_graph(2, 2, 1.0, 5.3, 0).unwrap();
        assert_eq!(exact_mis(&g).unwrap().size, 1);
    }

    #[test]
    fn exact_mis_kings_3x3_is_corners() {
        let g = generate_kings_graph(3, 3, 1.0, 6.0, 0).unwrap();
        let cert = exact_mis(&g).unwrap();
        assert_eq!(cert.size, 4);
        assert!(cert.witness.is_independent(&g));
        assert_eq!(cert.witness.popcount(), 4);
    }

    #[test]
    fn exact_mis_budget_error() {
        let g = generate_kings_graph(5, 5, 1.0, 6.0, 0).unwrap();
        let tiny = MisOracleConfig { max_n: 150, node_budget: 1 };
        assert!(matches!(exact_mis_with(&g, &tiny), Err(Error::MisBudgetExceeded)));
        let small_n = MisOracleConfig { max_n: 10, node_budget: 1_000_000 };
        assert!(matches!(exact_mis_with(&g, &small_n), Err(Error::MisBudgetExceeded)));
    }

    #[test]
    fn exact_mis_matches_brute_force_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..40 {
            let n = 4 + (trial % 9);
            let positions = line_positions(n, 1.0);
            let mut edges = Vec::new();
            for i in 0..n as u32 {
                for j in (i + 1)..n as u32 {
                    if rand::Rng::random_bool(&mut rng, 0.3) {
                        edges.push((i, j));
                    }
                }
            }
            let g = Graph::explicit(positions, edges).unwrap();
            let cert = exact_mis(&g).unwrap();
            assert_eq!(cert.size, brute_force_mis(&g), "trial {trial}");
            assert!(cert.witness.is_independent(&g));
            assert_eq!(cert.witness.popcount(), cert.size);
        }
    }

    #[test]
    fn violating_edges_cases() {
        let k4 = generate_kings_graph(2, 2, 1.0, 5.3, 0).unwrap();
        let zeros = SpinConfiguration::zeros(4);
        assert_eq!(violating_edges(&k4, &zeros).unwrap(), 0);
        let ones = SpinConfiguration::from_bitstring("1111").unwrap();
        assert_eq!(violating_edges(&k4, &ones).unwrap(), 6);

        let c5 = Graph::explicit(
            line_positions(5, 1.0),
            vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)],
        )
        .unwrap();
        let config = SpinConfiguration::from_bitstring("10101").unwrap();
        assert_eq!(violating_edges(&c5, &config).unwrap(), 1);
    }

    #[test]
    fn violating_edges_length_mismatch() {
        let g = generate_kings_graph(2, 2, 1.0, 5.3, 0).unwrap();
        let short = SpinConfiguration::zeros(3);
        assert!(matches!(
            violating_edges(&g, &short),
            Err(Error::LengthMismatch { expected: 4, actual: 3 })
        ));
    }

    #[test]
    fn approximation_ratio_cases() {
        let g = generate_kings_graph(3, 3, 1.0, 6.0, 0).unwrap();
        let cert = exact_mis(&g).unwrap();
        assert_eq!(approximation_ratio(&g, &cert.witness, cert.size).unwrap(), 1.0);
        assert_eq!(
            approximation_ratio(&g, &SpinConfiguration::zeros(9), cert.size).unwrap(),
            0.0
        );

        // C5 with {0, 2, 4}: three occupied, one violation, |MIS| = 2.
        let c5 = Graph::explicit(
            line_positions(5, 1.0),
            vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)],
        )
        .unwrap();
        assert_eq!(exact_mis(&c5).unwrap().size, 2);
        let config = SpinConfiguration::from_bitstring("10101").unwrap();
        assert_eq!(approximation_ratio(&c5, &config, 2).unwrap(), 1.0);
    }

    #[test]
    fn approximation_ratio_rejects_zero_mis() {
        let g = generate_kings_graph(1, 1, 1.0, 6.0, 0).unwrap();
        assert!(approximation_ratio(&g, &SpinConfiguration::zeros(1), 0).is_err());
    }

    #[test]
    fn hamming_distance_cases() {
        let s = SpinConfiguration::from_bitstring("10110").unwrap();
        let t = SpinConfiguration::from_bitstring("10011").unwrap();
        assert_eq!(hamming_distance(&s, &t).unwrap(), 2);
        assert_eq!(hamming_distance(&s, &s).unwrap(), 0);
        let complement =
            SpinConfiguration::new(s.as_slice().iter().map(|b| !b).collect());
        assert_eq!(hamming_distance(&s, &complement).unwrap(), 5);
        let short = SpinConfiguration::zeros(3);
        assert!(hamming_distance(&s, &short).is_err());
    }

    #[test]
    fn average_degree_cases() {
        let k4 = generate_kings_graph(2, 2, 1.0, 5.3, 0).unwrap();
        assert_eq!(average_degree(&k4), 3.0);
        let single = generate_kings_graph(1, 1, 1.0, 6.0, 0).unwrap();
        assert_eq!(average_degree(&single), 0.0);
        let kings = generate_kings_graph(3, 3, 1.0, 6.0, 0).unwrap();
        assert!((average_degree(&kings) - 40.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn bitstring_round_trip() {
        let s = SpinConfiguration::from_bitstring("0101101").unwrap();
        assert_eq!(s.to_bitstring(), "0101101");
        assert_eq!(s.popcount(), 4);
        assert!(SpinConfiguration::from_bitstring("01x1").is_err());
    }

    proptest! {
        #[test]
        fn hamming_is_a_metric(
            a in proptest::collection::vec(any::<bool>(), 1..40),
            b in proptest::collection::vec(any::<bool>(), 1..40),
            c in proptest::collection::vec(any::<bool>(), 1..40),
        ) {
            let n = a.len().min(b.len()).min(c.len());
            let a = SpinConfiguration::new(a[..n].to_vec());
            let b = SpinConfiguration::new(b[..n].to_vec());
            let c = SpinConfiguration::new(c[..n].to_vec());
            let dab = hamming_distance(&a, &b).unwrap();
            let dba = hamming_distance(&b, &a).unwrap();
            let dac = hamming_distance(&a, &c).unwrap();
            let dcb = hamming_distance(&c, &b).unwrap();
            prop_assert_eq!(dab, dba);
            prop_assert_eq!(hamming_distance(&a, &a).unwrap(), 0);
            prop_assert!((dab == 0) == (a == b));
            prop_assert!(dab <= dac + dcb);
        }

        #[test]
        fn kings_edges_match_distance_predicate(
            rows in 1usize..5,
            cols in 1usize..5,
            seed in 0u64..500,
        ) {
            let g = generate_kings_graph(rows, cols, 0.9, 6.0, seed).unwrap();
            let radius = g.blockade_radius().unwrap();
            for i in 0..g.n() {
                for j in (i + 1)..g.n() {
                    let has_edge = g.neighbors(i).contains(&(j as u32));
                    prop_assert_eq!(has_edge, g.distance(i, j) <= radius);
                }
            }
        }

        #[test]
        fn exact_mis_brute_force_property(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 3 + (seed % 10) as usize;
            let mut edges = Vec::new();
            for i in 0..n as u32 {
                for j in (i + 1)..n as u32 {
                    if rand::Rng::random_bool(&mut rng, 0.35) {
                        edges.push((i, j));
                    }
                }
            }
            let g = Graph::explicit(line_positions(n, 1.0), edges).unwrap();
            prop_assert_eq!(exact_mis(&g).unwrap().size, brute_force_mis(&g));
        }
    }
}
