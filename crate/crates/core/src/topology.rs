//! Network topologies: caching nodes, requesting users, cache contents and the
//! signal/interference neighbor sets that define the scheduling factor graph.
//!
//! Two generators are provided. The helper scenario places three caching helpers
//! with partially overlapping coverage and drops users by a Poisson point process
//! over the union of their interference disks. The D2D scenario drops devices over
//! a square and thins them into requesting users and idle devices acting as caches.
//!
//! Both generators apply the same pruning rule: a user with no caching node able to
//! serve it is dropped, and so is a caching node with nobody to serve.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Sampling region for point processes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// Axis-aligned square `[0, side] x [0, side]`.
    Square { side: f64 },
    /// Union of equal-radius disks, sampled through its bounding box.
    DiskUnion { centers: Vec<Point>, radius: f64 },
}

impl Region {
    fn validate(&self) -> Result<()> {
        match self {
            Region::Square { side } if !(*side >= 0.0 && side.is_finite()) => {
                Err(config_err(format!("square side must be finite and >= 0, got {side}")))
            }
            Region::DiskUnion { radius, .. } if !(*radius > 0.0 && radius.is_finite()) => {
                Err(config_err(format!("coverage radius must be > 0, got {radius}")))
            }
            _ => Ok(()),
        }
    }

    /// `(x0, y0, x1, y1)`
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        match self {
            Region::Square { side } => (0.0, 0.0, *side, *side),
            Region::DiskUnion { centers, radius } => {
                let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
                for c in centers {
                    b.0 = b.0.min(c.x - radius);
                    b.1 = b.1.min(c.y - radius);
                    b.2 = b.2.max(c.x + radius);
                    b.3 = b.3.max(c.y + radius);
                }
                if centers.is_empty() {
                    (0.0, 0.0, 0.0, 0.0)
                } else {
                    b
                }
            }
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Region::Square { side } => (0.0..=*side).contains(&p.x) && (0.0..=*side).contains(&p.y),
            Region::DiskUnion { centers, radius } => centers.iter().any(|c| c.distance(p) <= *radius),
        }
    }
}

/// Homogeneous Poisson point process over `region` with `intensity` points per m².
pub fn generate_ppp_points<R: Rng + ?Sized>(region: &Region, intensity: f64, rng: &mut R) -> Result<Vec<Point>> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(config_err(format!("PPP intensity must be > 0, got {intensity}")));
    }
    region.validate()?;
    let (x0, y0, x1, y1) = region.bounding_box();
    let area = (x1 - x0) * (y1 - y0);
    if area <= 0.0 {
        return Ok(Vec::new());
    }
    let mean = intensity * area;
    let count = Poisson::new(mean)
        .map_err(|e| config_err(format!("poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let p = Point::new(rng.random_range(x0..=x1), rng.random_range(y0..=y1));
        // thinning the bounding-box process keeps it Poisson on the region
        if region.contains(&p) {
            points.push(p);
        }
    }
    Ok(points)
}

/// Content library with Zipf popularity over files `0..file_count` (file 0 most popular).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Library {
    pub file_count: usize,
    pub zipf_exponent: f64,
    pub cache_capacity: usize,
    pub popularity: Vec<f64>,
}

impl Library {
    pub fn zipf(file_count: usize, zipf_exponent: f64, cache_capacity: usize) -> Result<Self> {
        if file_count == 0 {
            return Err(config_err("library must contain at least one file"));
        }
        if cache_capacity > file_count {
            return Err(config_err(format!(
                "cache capacity {cache_capacity} exceeds library size {file_count}"
            )));
        }
        if !(zipf_exponent >= 0.0 && zipf_exponent.is_finite()) {
            return Err(config_err(format!("zipf exponent must be >= 0, got {zipf_exponent}")));
        }
        let weights: Vec<f64> = (1..=file_count).map(|r| (r as f64).powf(-zipf_exponent)).collect();
        let total: f64 = weights.iter().sum();
        let popularity = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { file_count, zipf_exponent, cache_capacity, popularity })
    }

    pub fn sample_request<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        WeightedIndex::new(&self.popularity)
            .expect("popularity is a valid probability vector")
            .sample(rng)
    }
}

/// How caches are filled. Placement is an input to scheduling, not optimized here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum Placement {
    /// Weighted sampling without replacement by popularity.
    #[default]
    PopularityWeighted,
    UniformWithoutReplacement,
    /// Verbatim per-node file lists, keyed by node index.
    Explicit { caches: BTreeMap<usize, Vec<usize>> },
}

/// Fills `node_count` caches according to `placement`. Each returned list is sorted.
pub fn place_content<R: Rng + ?Sized>(
    node_count: usize,
    library: &Library,
    placement: &Placement,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    let files: Vec<usize> = (0..library.file_count).collect();
    let cap = library.cache_capacity;
    let mut caches = Vec::with_capacity(node_count);
    match placement {
        Placement::PopularityWeighted => {
            for _ in 0..node_count {
                let mut picked: Vec<usize> = files
                    .choose_multiple_weighted(rng, cap, |&f| library.popularity[f])
                    .map_err(|e| config_err(format!("weighted placement: {e}")))?
                    .copied()
                    .collect();
                picked.sort_unstable();
                caches.push(picked);
            }
        }
        Placement::UniformWithoutReplacement => {
            for _ in 0..node_count {
                let mut picked = rand::seq::index::sample(rng, library.file_count, cap).into_vec();
                picked.sort_unstable();
                caches.push(picked);
            }
        }
        Placement::Explicit { caches: explicit } => {
            if let Some(&bad) = explicit.keys().find(|&&m| m >= node_count) {
                return Err(config_err(format!("explicit placement names unknown node {bad}")));
            }
            for m in 0..node_count {
                let mut list = explicit.get(&m).cloned().unwrap_or_default();
                if let Some(&f) = list.iter().find(|&&f| f >= library.file_count) {
                    return Err(config_err(format!("node {m}: unknown file {f}")));
                }
                list.sort_unstable();
                list.dedup();
                if list.len() > cap {
                    return Err(config_err(format!(
                        "node {m}: {} files exceed cache capacity {cap}",
                        list.len()
                    )));
                }
                caches.push(list);
            }
        }
    }
    Ok(caches)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CachingNode {
    pub position: Point,
    /// Sorted file ids.
    pub cache: Vec<usize>,
}

impl CachingNode {
    pub fn caches(&self, file: usize) -> bool {
        self.cache.binary_search(&file).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub position: Point,
    pub requested_file: usize,
}

/// Signal and interference neighbor sets, all sorted ascending.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Neighborhoods {
    /// Users within `d_i` of node m.
    pub interference_users: Vec<Vec<usize>>,
    /// Users within `d_s` of node m whose requested file node m caches.
    pub signal_users: Vec<Vec<usize>>,
    /// Nodes within `d_i` of user n.
    pub interferers: Vec<Vec<usize>>,
    /// Nodes within `d_s` of user n caching its file.
    pub servers: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TopologyFile {
    signal_range: f64,
    interference_range: f64,
    nodes: Vec<CachingNode>,
    users: Vec<User>,
}

/// Caching nodes and users with their neighbor relations. Node and user ids are
/// their indices in `nodes` / `users`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TopologyFile", into = "TopologyFile")]
pub struct Topology {
    nodes: Vec<CachingNode>,
    users: Vec<User>,
    signal_range: f64,
    interference_range: f64,
    hoods: Neighborhoods,
}

impl TryFrom<TopologyFile> for Topology {
    type Error = Error;

    fn try_from(f: TopologyFile) -> Result<Self> {
        Topology::new(f.nodes, f.users, f.signal_range, f.interference_range)
    }
}

impl From<Topology> for TopologyFile {
    fn from(t: Topology) -> Self {
        TopologyFile {
            signal_range: t.signal_range,
            interference_range: t.interference_range,
            nodes: t.nodes,
            users: t.users,
        }
    }
}

impl Topology {
    /// Builds neighbor sets from positions, caches and ranges. Does not prune.
    pub fn new(nodes: Vec<CachingNode>, users: Vec<User>, signal_range: f64, interference_range: f64) -> Result<Self> {
        if !(signal_range > 0.0 && interference_range > signal_range) {
            return Err(config_err(format!(
                "ranges must satisfy d_i > d_s > 0 (d_s = {signal_range}, d_i = {interference_range})"
            )));
        }
        for (m, node) in nodes.iter().enumerate() {
            if node.cache.windows(2).any(|w| w[0] >= w[1]) {
                return Err(config_err(format!("node {m}: cache list must be sorted and distinct")));
            }
        }
        let mut hoods = Neighborhoods {
            interference_users: vec![Vec::new(); nodes.len()],
            signal_users: vec![Vec::new(); nodes.len()],
            interferers: vec![Vec::new(); users.len()],
            servers: vec![Vec::new(); users.len()],
        };
        for (m, node) in nodes.iter().enumerate() {
            for (n, user) in users.iter().enumerate() {
                let d = node.position.distance(&user.position);
                if d <= interference_range {
                    hoods.interference_users[m].push(n);
                    hoods.interferers[n].push(m);
                    if d <= signal_range && node.caches(user.requested_file) {
                        hoods.signal_users[m].push(n);
                        hoods.servers[n].push(m);
                    }
                }
            }
        }
        Ok(Self { nodes, users, signal_range, interference_range, hoods })
    }

    pub fn nodes(&self) -> &[CachingNode] {
        &self.nodes
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn signal_range(&self) -> f64 {
        self.signal_range
    }

    pub fn interference_range(&self) -> f64 {
        self.interference_range
    }

    pub fn neighborhoods(&self) -> &Neighborhoods {
        &self.hoods
    }

    /// U_m
    pub fn interference_users(&self, m: usize) -> &[usize] {
        &self.hoods.interference_users[m]
    }

    /// V_m
    pub fn signal_users(&self, m: usize) -> &[usize] {
        &self.hoods.signal_users[m]
    }

    /// H_n
    pub fn interferers(&self, n: usize) -> &[usize] {
        &self.hoods.interferers[n]
    }

    /// J_n
    pub fn servers(&self, n: usize) -> &[usize] {
        &self.hoods.servers[n]
    }

    pub fn distance(&self, m: usize, n: usize) -> f64 {
        self.nodes[m].position.distance(&self.users[n].position)
    }

    pub fn is_signal_pair(&self, m: usize, n: usize) -> bool {
        self.hoods.signal_users[m].binary_search(&n).is_ok()
    }

    pub fn is_neighbor_pair(&self, m: usize, n: usize) -> bool {
        self.hoods.interference_users[m].binary_search(&n).is_ok()
    }

    /// Number of (node, user) pairs within interference range.
    pub fn edge_count(&self) -> usize {
        self.hoods.interference_users.iter().map(Vec::len).sum()
    }

    /// Keeps the listed nodes and users (in the given order) and rebuilds neighbor sets.
    pub fn restrict(&self, node_ids: &[usize], user_ids: &[usize]) -> Result<Self> {
        let nodes = node_ids.iter().map(|&m| self.nodes[m].clone()).collect();
        let users = user_ids.iter().map(|&n| self.users[n].clone()).collect();
        Topology::new(nodes, users, self.signal_range, self.interference_range)
    }

    /// Drops users nobody can serve, then nodes with nobody to serve. One pass reaches a
    /// fixed point: a dropped user belongs to no V_m and a dropped node to no J_n.
    /// Returns the pruned topology and the original ids of the kept nodes and users.
    pub fn pruned(&self) -> (Self, Vec<usize>, Vec<usize>) {
        let users: Vec<usize> = (0..self.user_count()).filter(|&n| !self.servers(n).is_empty()).collect();
        let nodes: Vec<usize> = (0..self.node_count()).filter(|&m| !self.signal_users(m).is_empty()).collect();
        let t = self.restrict(&nodes, &users).expect("ranges already validated");
        (t, nodes, users)
    }

    /// Keeps at most `max_users` users (lowest ids first) and re-prunes.
    pub fn truncate_users(&self, max_users: usize) -> Self {
        if self.user_count() <= max_users {
            return self.clone();
        }
        let users: Vec<usize> = (0..max_users).collect();
        let nodes: Vec<usize> = (0..self.node_count()).collect();
        self.restrict(&nodes, &users).expect("ranges already validated").pruned().0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Helper-scenario site positions for coverage radius `radius`.
pub fn helper_sites(radius: f64) -> [Point; 3] {
    [
        Point::new(0.0, 0.0),
        Point::new(5.0 / 3.0 * radius, 0.0),
        Point::new(5.0 / 6.0 * radius, 5.0 * 3f64.sqrt() / 6.0 * radius),
    ]
}

/// Three caching helpers with coverage radius `radius` (signal range `radius`,
/// interference range `3 * radius`); users drop by PPP over the union of the
/// interference disks and request one file each by popularity.
pub fn build_helper_topology<R: Rng + ?Sized>(
    radius: f64,
    user_intensity: f64,
    library: &Library,
    placement: &Placement,
    rng: &mut R,
) -> Result<Topology> {
    if !(radius > 0.0) {
        return Err(config_err(format!("coverage radius must be > 0, got {radius}")));
    }
    let sites = helper_sites(radius);
    let caches = place_content(sites.len(), library, placement, rng)?;
    let region = Region::DiskUnion { centers: sites.to_vec(), radius: 3.0 * radius };
    let points = generate_ppp_points(&region, user_intensity, rng)?;
    let users = points
        .into_iter()
        .map(|position| User { position, requested_file: library.sample_request(rng) })
        .collect();
    let nodes = sites
        .iter()
        .zip(caches)
        .map(|(&position, cache)| CachingNode { position, cache })
        .collect();
    Ok(Topology::new(nodes, users, radius, 3.0 * radius)?.pruned().0)
}

/// D2D scenario: devices drop by PPP over a `side` x `side` square; each becomes a
/// requesting user with probability `activity`, otherwise a caching node.
#[allow(clippy::too_many_arguments)]
pub fn build_d2d_topology<R: Rng + ?Sized>(
    side: f64,
    intensity: f64,
    activity: f64,
    signal_range: f64,
    interference_range: f64,
    library: &Library,
    placement: &Placement,
    rng: &mut R,
) -> Result<Topology> {
    if !(activity > 0.0 && activity < 1.0) {
        return Err(config_err(format!("activity probability must be in (0, 1), got {activity}")));
    }
    let devices = generate_ppp_points(&Region::Square { side }, intensity, rng)?;
    let mut node_pos = Vec::new();
    let mut user_pos = Vec::new();
    for p in devices {
        if rng.random_bool(activity) {
            user_pos.push(p);
        } else {
            node_pos.push(p);
        }
    }
    let caches = place_content(node_pos.len(), library, placement, rng)?;
    let nodes = node_pos
        .into_iter()
        .zip(caches)
        .map(|(position, cache)| CachingNode { position, cache })
        .collect();
    let users = user_pos
        .into_iter()
        .map(|position| User { position, requested_file: library.sample_request(rng) })
        .collect();
    Ok(Topology::new(nodes, users, signal_range, interference_range)?.pruned().0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn lib() -> Library {
        Library::zipf(100, 0.8, 10).unwrap()
    }

    #[test]
    fn zipf_popularity_normalized_and_decreasing() {
        let l = lib();
        let s: f64 = l.popularity.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(l.popularity.windows(2).all(|w| w[0] > w[1]));
        assert!(Library::zipf(5, 0.8, 6).is_err());
    }

    #[test]
    fn ppp_rejects_nonpositive_intensity_and_handles_empty_region() {
        let mut rng = stream(1, &[]);
        assert!(generate_ppp_points(&Region::Square { side: 10.0 }, 0.0, &mut rng).is_err());
        assert!(generate_ppp_points(&Region::Square { side: 10.0 }, -1.0, &mut rng).is_err());
        let pts = generate_ppp_points(&Region::Square { side: 0.0 }, 5.0, &mut rng).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn ppp_mean_count_matches_intensity_times_area() {
        // 600 x 600 at 0.04e-2 per m² -> 144 expected
        let region = Region::Square { side: 600.0 };
        let runs = 2000;
        let mut total = 0usize;
        for s in 0..runs {
            let mut rng = stream(s, &[9]);
            let pts = generate_ppp_points(&region, 0.04e-2, &mut rng).unwrap();
            assert!(pts.iter().all(|p| region.contains(p)));
            total += pts.len();
        }
        let mean = total as f64 / runs as f64;
        // std of the mean = sqrt(144 / 2000) ~ 0.27
        assert!((mean - 144.0).abs() < 1.5, "mean count {mean}");
    }

    #[test]
    fn helper_layout() {
        let sites = helper_sites(100.0);
        assert!((sites[1].x - 166.67).abs() < 0.01 && sites[1].y == 0.0);
        assert!((sites[2].x - 83.333).abs() < 0.01 && (sites[2].y - 144.338).abs() < 0.01);
        let mut rng = stream(3, &[]);
        let t = build_helper_topology(100.0, 0.01e-2, &lib(), &Placement::PopularityWeighted, &mut rng).unwrap();
        assert_eq!(t.signal_range(), 100.0);
        assert_eq!(t.interference_range(), 300.0);
        for node in t.nodes() {
            assert!(sites.iter().any(|s| s == &node.position));
        }
    }

    #[test]
    fn distance_rules_and_closed_balls() {
        let nodes = vec![
            CachingNode { position: Point::new(0.0, 0.0), cache: vec![0] },
            CachingNode { position: Point::new(1000.0, 0.0), cache: vec![1] },
        ];
        let users = vec![
            User { position: Point::new(99.0, 0.0), requested_file: 0 },
            User { position: Point::new(100.0, 0.0), requested_file: 0 },
            User { position: Point::new(750.0, 0.0), requested_file: 0 },
            User { position: Point::new(1300.0, 0.0), requested_file: 1 },
        ];
        let t = Topology::new(nodes, users, 100.0, 300.0).unwrap();
        assert_eq!(t.signal_users(0), &[0, 1]);
        assert_eq!(t.servers(0), &[0]);
        // 250 m from node 1, which does not cache file 0
        assert_eq!(t.interferers(2), &[1]);
        assert!(t.servers(2).is_empty());
        // exactly d_i counts as inside
        assert_eq!(t.interference_users(1), &[2, 3]);
        assert!(t.servers(3).is_empty());

        let (p, kept_nodes, kept_users) = t.pruned();
        assert_eq!(kept_users, vec![0, 1]);
        assert_eq!(kept_nodes, vec![0]);
        assert_eq!(p.user_count(), 2);
    }

    #[test]
    fn invalid_ranges_rejected() {
        assert!(Topology::new(vec![], vec![], 100.0, 100.0).is_err());
        assert!(Topology::new(vec![], vec![], 0.0, 100.0).is_err());
    }

    #[test]
    fn full_cache_serves_everyone_in_range() {
        let l = Library::zipf(5, 0.8, 5).unwrap();
        let mut rng = stream(2, &[]);
        let caches = place_content(4, &l, &Placement::PopularityWeighted, &mut rng).unwrap();
        assert!(caches.iter().all(|c| c == &vec![0, 1, 2, 3, 4]));
        let caches = place_content(4, &l, &Placement::UniformWithoutReplacement, &mut rng).unwrap();
        assert!(caches.iter().all(|c| c.len() == 5));
    }

    #[test]
    fn explicit_placement_passthrough_and_errors() {
        let l = Library::zipf(10, 0.8, 2).unwrap();
        let mut rng = stream(2, &[]);
        let mut caches = BTreeMap::new();
        caches.insert(0, vec![2, 1]);
        let out = place_content(2, &l, &Placement::Explicit { caches: caches.clone() }, &mut rng).unwrap();
        assert_eq!(out, vec![vec![1, 2], vec![]]);

        caches.insert(1, vec![1, 2, 3]);
        assert!(place_content(2, &l, &Placement::Explicit { caches: caches.clone() }, &mut rng).is_err());
        caches.insert(1, vec![42]);
        assert!(place_content(2, &l, &Placement::Explicit { caches: caches.clone() }, &mut rng).is_err());
        caches.remove(&1);
        caches.insert(5, vec![0]);
        assert!(place_content(2, &l, &Placement::Explicit { caches }, &mut rng).is_err());
    }

    #[test]
    fn popularity_weighted_placement_favors_popular_files() {
        let l = lib();
        let mut rng = stream(11, &[]);
        let caches = place_content(10_000, &l, &Placement::PopularityWeighted, &mut rng).unwrap();
        let count = |f: usize| caches.iter().filter(|c| c.contains(&f)).count();
        assert!(caches.iter().all(|c| c.len() == 10));
        assert!(count(0) > count(99), "{} vs {}", count(0), count(99));
    }

    #[test]
    fn d2d_limits_and_determinism() {
        let l = lib();
        let build = |seed: u64, pa: f64| {
            let mut rng = stream(seed, &[]);
            build_d2d_topology(600.0, 0.04e-2, pa, 100.0, 300.0, &l, &Placement::PopularityWeighted, &mut rng)
        };
        assert!(build(1, 0.0).is_err());
        assert!(build(1, 1.0).is_err());
        let a = build(5, 0.2).unwrap();
        let b = build(5, 0.2).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        // near-zero activity leaves no users, so pruning removes every node too
        let t = build(5, 1e-9).unwrap();
        assert_eq!(t.user_count(), 0);
    }

    #[test]
    fn d2d_thinning_means() {
        // expected 144 devices, 28.8 users, 115.2 caching nodes before pruning
        let runs = 1000;
        let (mut users, mut nodes) = (0usize, 0usize);
        for s in 0..runs {
            let mut rng = stream(s, &[4]);
            let devices = generate_ppp_points(&Region::Square { side: 600.0 }, 0.04e-2, &mut rng).unwrap();
            for _ in devices {
                if rng.random_bool(0.2) {
                    users += 1;
                } else {
                    nodes += 1;
                }
            }
        }
        let (mu, mn) = (users as f64 / runs as f64, nodes as f64 / runs as f64);
        assert!((mu - 28.8).abs() < 0.6, "users {mu}");
        assert!((mn - 115.2).abs() < 1.2, "nodes {mn}");
    }

    #[test]
    fn json_roundtrip_rebuilds_neighborhoods() {
        let mut rng = stream(8, &[]);
        let t = build_helper_topology(100.0, 0.01e-2, &lib(), &Placement::PopularityWeighted, &mut rng).unwrap();
        let back = Topology::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(t, back);
    }
}
