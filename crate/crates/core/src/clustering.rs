//! Density clustering of the occupation nodes.
//!
//! Clusters are grown by iterative two-hop expansion from random seed
//! occupations; the closure of that expansion is exactly the connected
//! components of the occupation projection, so the implementation runs
//! union-find over projection edges instead and is independent of the seed.
//! Components below the minimum size are dropped.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, SkillOccupationGraph};

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("min cluster size must be at least 1")]
    BadMinSize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: u32,
    /// Member occupation ids, ascending.
    pub occupation_ids: Vec<String>,
    /// Union of the members' skill neighbors, ascending.
    pub skill_ids: Vec<String>,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.occupation_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupation_ids.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub min_cluster_size: usize,
    pub clusters: Vec<Cluster>,
    pub dropped_occupation_ids: Vec<String>,
}

impl ClusterSet {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("cluster set serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(len: usize) -> Self {
        UnionFind {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Partitions occupations into clusters and filters out the small ones.
///
/// The `seed` is accepted for interface stability but cannot influence the
/// result: expansion to a fixed point covers a whole projection component no
/// matter where it starts, so only discovery order ever depended on it, and
/// cluster ids here are assigned by smallest member id instead.
pub fn cluster_graph(
    g: &SkillOccupationGraph,
    min_size: usize,
    _seed: u64,
) -> Result<ClusterSet, ClusterError> {
    if min_size < 1 {
        return Err(ClusterError::BadMinSize);
    }
    if g.occupation_count() == 0 {
        return Err(ClusterError::Graph(GraphError::EmptyGraph));
    }

    let mut uf = UnionFind::new(g.occupation_count());
    for skill in 0..g.skill_count() {
        let occs = g.occupations_of(skill);
        for pair in occs.windows(2) {
            uf.union(pair[0], pair[1]);
        }
    }

    let mut components: HashMap<usize, Vec<usize>> = HashMap::new();
    for occ in 0..g.occupation_count() {
        components.entry(uf.find(occ)).or_default().push(occ);
    }

    let mut kept: Vec<Vec<usize>> = Vec::new();
    let mut dropped: Vec<usize> = Vec::new();
    for (_, members) in components {
        if members.len() >= min_size {
            kept.push(members);
        } else {
            dropped.extend(members);
        }
    }

    // Members are pushed in ascending index order, and indices are sorted by
    // id, so members[0] is each component's smallest id.
    kept.sort_by(|a, b| g.occupation(a[0]).id.cmp(&g.occupation(b[0]).id));

    let clusters = kept
        .into_iter()
        .enumerate()
        .map(|(i, members)| {
            let mut skill_idxs: Vec<usize> = members
                .iter()
                .flat_map(|&o| g.skills_of(o).iter().copied())
                .collect();
            skill_idxs.sort_unstable();
            skill_idxs.dedup();
            Cluster {
                id: i as u32,
                occupation_ids: members.iter().map(|&o| g.occupation(o).id.clone()).collect(),
                skill_ids: skill_idxs.iter().map(|&s| g.skill(s).id.clone()).collect(),
            }
        })
        .collect();

    let mut dropped_ids: Vec<String> = dropped
        .into_iter()
        .map(|o| g.occupation(o).id.clone())
        .collect();
    dropped_ids.sort_unstable();

    Ok(ClusterSet {
        min_cluster_size: min_size,
        clusters,
        dropped_occupation_ids: dropped_ids,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterStats {
    pub cluster_count: usize,
    pub mean_occupations: f64,
    pub min_occupations: usize,
    pub max_occupations: usize,
    pub dropped_count: usize,
}

pub fn cluster_stats(cs: &ClusterSet) -> ClusterStats {
    let sizes: Vec<usize> = cs.clusters.iter().map(|c| c.len()).collect();
    let total: usize = sizes.iter().sum();
    ClusterStats {
        cluster_count: sizes.len(),
        mean_occupations: if sizes.is_empty() {
            0.0
        } else {
            total as f64 / sizes.len() as f64
        },
        min_occupations: sizes.iter().copied().min().unwrap_or(0),
        max_occupations: sizes.iter().copied().max().unwrap_or(0),
        dropped_count: cs.dropped_occupation_ids.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{occupation_projection, GraphBuilder, NodeSource};
    use crate::rng::Rng;

    /// Star components: each component is one shared skill with `size`
    /// occupations attached.
    fn graph_with_component_sizes(sizes: &[usize]) -> SkillOccupationGraph {
        let mut builder = GraphBuilder::new();
        for (c, &size) in sizes.iter().enumerate() {
            let skill = format!("s{c:02}");
            builder.add_skill(&skill, &format!("Hub skill {c}")).unwrap();
            for i in 0..size {
                let occ = format!("o{c:02}-{i:03}");
                builder
                    .add_occupation(&occ, &format!("Occupation {c}-{i}"), NodeSource::User)
                    .unwrap();
                builder.add_edge(&occ, &skill).unwrap();
            }
        }
        builder.finish().unwrap()
    }

    #[test]
    fn filter_rule_drops_small_components() {
        let g = graph_with_component_sizes(&[12, 9, 30]);
        let cs = cluster_graph(&g, 10, 0).unwrap();
        assert_eq!(cs.clusters.len(), 2);
        assert_eq!(cs.dropped_occupation_ids.len(), 9);
        let mut sizes: Vec<usize> = cs.clusters.iter().map(|c| c.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![12, 30]);
    }

    #[test]
    fn clusters_partition_the_occupations() {
        let g = crate::testutil::random_graph(60, 40, 150, 8);
        let cs = cluster_graph(&g, 3, 0).unwrap();
        let mut all: Vec<String> = cs
            .clusters
            .iter()
            .flat_map(|c| c.occupation_ids.iter().cloned())
            .chain(cs.dropped_occupation_ids.iter().cloned())
            .collect();
        all.sort_unstable();
        let mut expected: Vec<String> =
            g.occupations().iter().map(|o| o.id.clone()).collect();
        expected.sort_unstable();
        assert_eq!(all, expected);

        // No occupation in two clusters.
        let mut seen = std::collections::HashSet::new();
        for c in &cs.clusters {
            for id in &c.occupation_ids {
                assert!(seen.insert(id.clone()), "{id} appears twice");
            }
        }
    }

    #[test]
    fn cluster_skills_are_adjacent_to_members() {
        let g = crate::testutil::random_graph(40, 30, 100, 2);
        let cs = cluster_graph(&g, 1, 0).unwrap();
        for c in &cs.clusters {
            for skill_id in &c.skill_ids {
                let s = g.skill_index(skill_id).unwrap();
                let adjacent = g.occupations_of(s).iter().any(|&o| {
                    c.occupation_ids.contains(&g.occupation(o).id)
                });
                assert!(adjacent, "skill {skill_id} has no member neighbor");
            }
        }
    }

    /// BFS over the occupation projection: the independent component oracle.
    fn bfs_components(g: &SkillOccupationGraph) -> Vec<Vec<String>> {
        let proj = occupation_projection(g);
        let mut visited = vec![false; g.occupation_count()];
        let mut components = Vec::new();
        for start in 0..g.occupation_count() {
            if visited[start] {
                continue;
            }
            let mut queue = std::collections::VecDeque::from([start]);
            visited[start] = true;
            let mut members = Vec::new();
            while let Some(u) = queue.pop_front() {
                members.push(g.occupation(u).id.clone());
                for &v in proj.neighbors(u) {
                    if !visited[v] {
                        visited[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        components.sort();
        components
    }

    /// The literal algorithm: pick a random unassigned occupation, expand by
    /// two-hop steps until a fixed point, repeat.
    fn seeded_expansion(g: &SkillOccupationGraph, seed: u64) -> Vec<Vec<String>> {
        let mut rng = Rng::from_seed(seed);
        let mut assigned = vec![false; g.occupation_count()];
        let mut remaining: Vec<usize> = (0..g.occupation_count()).collect();
        let mut components = Vec::new();
        while !remaining.is_empty() {
            let pick = rng.index(remaining.len());
            let start = remaining[pick];
            let mut members = vec![start];
            assigned[start] = true;
            loop {
                let mut grew = false;
                let snapshot = members.clone();
                for &occ in &snapshot {
                    for &skill in g.skills_of(occ) {
                        for &other in g.occupations_of(skill) {
                            if !assigned[other] {
                                assigned[other] = true;
                                members.push(other);
                                grew = true;
                            }
                        }
                    }
                }
                if !grew {
                    break;
                }
            }
            remaining.retain(|&o| !assigned[o]);
            let mut ids: Vec<String> =
                members.iter().map(|&o| g.occupation(o).id.clone()).collect();
            ids.sort_unstable();
            components.push(ids);
        }
        components.sort();
        components
    }

    #[test]
    fn clusters_equal_bfs_components_and_seeded_expansion() {
        for trial in 0..20 {
            let g = crate::testutil::random_graph(40, 25, 70, trial);
            let cs = cluster_graph(&g, 1, 0).unwrap();
            let mut ours: Vec<Vec<String>> = cs
                .clusters
                .iter()
                .map(|c| c.occupation_ids.clone())
                .collect();
            ours.sort();
            assert_eq!(ours, bfs_components(&g), "trial {trial} vs BFS");
            for seed in 0..5 {
                assert_eq!(ours, seeded_expansion(&g, seed), "trial {trial} seed {seed}");
            }
        }
    }

    #[test]
    fn cluster_ids_are_assigned_by_smallest_member() {
        let g = graph_with_component_sizes(&[5, 5]);
        let cs = cluster_graph(&g, 1, 99).unwrap();
        assert_eq!(cs.clusters[0].id, 0);
        assert!(cs.clusters[0].occupation_ids[0] < cs.clusters[1].occupation_ids[0]);
    }

    #[test]
    fn result_is_seed_independent() {
        let g = crate::testutil::random_graph(50, 30, 120, 17);
        let base = cluster_graph(&g, 2, 0).unwrap();
        for seed in 1..5 {
            assert_eq!(cluster_graph(&g, 2, seed).unwrap(), base);
        }
    }

    #[test]
    fn stats_trivial() {
        let g = graph_with_component_sizes(&[10, 20]);
        let cs = cluster_graph(&g, 10, 0).unwrap();
        let stats = cluster_stats(&cs);
        assert_eq!(stats.cluster_count, 2);
        assert_eq!(stats.mean_occupations, 15.0);
        assert_eq!(stats.min_occupations, 10);
        assert_eq!(stats.max_occupations, 20);
        assert_eq!(stats.dropped_count, 0);
    }

    #[test]
    fn stats_match_recount() {
        let g = crate::testutil::random_graph(45, 30, 90, 31);
        let cs = cluster_graph(&g, 2, 0).unwrap();
        let stats = cluster_stats(&cs);
        let sizes: Vec<usize> = cs.clusters.iter().map(|c| c.occupation_ids.len()).collect();
        assert_eq!(stats.cluster_count, sizes.len());
        assert_eq!(
            stats.mean_occupations,
            sizes.iter().sum::<usize>() as f64 / sizes.len() as f64
        );
    }

    #[test]
    fn empty_graph_rejected() {
        let mut builder = GraphBuilder::new();
        builder.add_skill("s", "Skill").unwrap();
        let g = builder.finish().unwrap();
        assert!(matches!(
            cluster_graph(&g, 1, 0),
            Err(ClusterError::Graph(GraphError::EmptyGraph))
        ));
    }

    #[test]
    fn json_round_trip() {
        let g = graph_with_component_sizes(&[11, 13]);
        let cs = cluster_graph(&g, 10, 0).unwrap();
        let parsed = ClusterSet::from_json(&cs.to_json()).unwrap();
        assert_eq!(parsed, cs);
    }
}
