//! The bipartite skill-occupation graph: construction, ingestion, validation,
//! projection, and statistics.
//!
//! A graph value that exists is valid: strictly bipartite, no duplicate
//! edges, every edge endpoint present, all titles and names non-empty.
//! Construction goes through [`GraphBuilder`], which enforces those
//! invariants; after that the graph is immutable and safe to share.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Where an occupation node came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NodeSource {
    Dice,
    BlsGenerated,
    #[default]
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupationNode {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub source: NodeSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillNode {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("dangling edge ({occupation}, {skill}): {missing} is not a declared node")]
    DanglingEdge {
        occupation: String,
        skill: String,
        missing: String,
    },
    #[error("empty graph: no nodes defined")]
    EmptyGraph,
    #[error("occupation id {id:?} declared twice with different titles ({first:?} vs {second:?})")]
    ConflictingOccupation {
        id: String,
        first: String,
        second: String,
    },
    #[error("skill id {id:?} declared twice with different names ({first:?} vs {second:?})")]
    ConflictingSkill {
        id: String,
        first: String,
        second: String,
    },
    #[error("occupation {id:?} has an empty title")]
    EmptyTitle { id: String },
    #[error("skill {id:?} has an empty name")]
    EmptyName { id: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid graph JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Supported on-disk formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeTsv,
    GraphJson,
}

pub const EDGE_TSV_HEADER: &str = "occupation_id\toccupation_title\tskill_id\tskill_name";

/// Accumulates nodes and edges, then validates them into a graph.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    occupations: Vec<OccupationNode>,
    occ_by_id: HashMap<String, usize>,
    skills: Vec<SkillNode>,
    skill_by_id: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    duplicate_edges: usize,
    edge_seen: HashMap<(usize, usize), ()>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_occupation(
        &mut self,
        id: &str,
        title: &str,
        source: NodeSource,
    ) -> Result<usize, GraphError> {
        let title = title.trim();
        if title.is_empty() {
            return Err(GraphError::EmptyTitle { id: id.to_string() });
        }
        if let Some(&idx) = self.occ_by_id.get(id) {
            if self.occupations[idx].title != title {
                return Err(GraphError::ConflictingOccupation {
                    id: id.to_string(),
                    first: self.occupations[idx].title.clone(),
                    second: title.to_string(),
                });
            }
            return Ok(idx);
        }
        let idx = self.occupations.len();
        self.occupations.push(OccupationNode {
            id: id.to_string(),
            title: title.to_string(),
            source,
        });
        self.occ_by_id.insert(id.to_string(), idx);
        Ok(idx)
    }

    pub fn add_skill(&mut self, id: &str, name: &str) -> Result<usize, GraphError> {
        let name = name.trim();
        if name.is_empty() {
            return Err(GraphError::EmptyName { id: id.to_string() });
        }
        if let Some(&idx) = self.skill_by_id.get(id) {
            if self.skills[idx].name != name {
                return Err(GraphError::ConflictingSkill {
                    id: id.to_string(),
                    first: self.skills[idx].name.clone(),
                    second: name.to_string(),
                });
            }
            return Ok(idx);
        }
        let idx = self.skills.len();
        self.skills.push(SkillNode {
            id: id.to_string(),
            name: name.to_string(),
        });
        self.skill_by_id.insert(id.to_string(), idx);
        Ok(idx)
    }

    /// Adds an edge between already-declared nodes. Duplicates are collapsed
    /// and counted, not rejected: scraped sources contain them routinely.
    pub fn add_edge(&mut self, occupation_id: &str, skill_id: &str) -> Result<(), GraphError> {
        let occ = *self.occ_by_id.get(occupation_id).ok_or_else(|| {
            GraphError::DanglingEdge {
                occupation: occupation_id.to_string(),
                skill: skill_id.to_string(),
                missing: occupation_id.to_string(),
            }
        })?;
        let skill = *self
            .skill_by_id
            .get(skill_id)
            .ok_or_else(|| GraphError::DanglingEdge {
                occupation: occupation_id.to_string(),
                skill: skill_id.to_string(),
                missing: skill_id.to_string(),
            })?;
        if self.edge_seen.insert((occ, skill), ()).is_some() {
            self.duplicate_edges += 1;
        } else {
            self.edges.push((occ, skill));
        }
        Ok(())
    }

    pub fn duplicate_edges(&self) -> usize {
        self.duplicate_edges
    }

    /// Validates and freezes the graph. Nodes and adjacency lists come out in
    /// canonical (id-sorted) order so downstream output is byte-stable.
    pub fn finish(self) -> Result<SkillOccupationGraph, GraphError> {
        if self.occupations.is_empty() && self.skills.is_empty() {
            return Err(GraphError::EmptyGraph);
        }

        let mut occ_order: Vec<usize> = (0..self.occupations.len()).collect();
        occ_order.sort_by(|&a, &b| self.occupations[a].id.cmp(&self.occupations[b].id));
        let mut skill_order: Vec<usize> = (0..self.skills.len()).collect();
        skill_order.sort_by(|&a, &b| self.skills[a].id.cmp(&self.skills[b].id));

        let mut occ_remap = vec![0usize; self.occupations.len()];
        for (new, &old) in occ_order.iter().enumerate() {
            occ_remap[old] = new;
        }
        let mut skill_remap = vec![0usize; self.skills.len()];
        for (new, &old) in skill_order.iter().enumerate() {
            skill_remap[old] = new;
        }

        let occupations: Vec<OccupationNode> = occ_order
            .iter()
            .map(|&i| self.occupations[i].clone())
            .collect();
        let skills: Vec<SkillNode> = skill_order.iter().map(|&i| self.skills[i].clone()).collect();

        let mut occ_adj = vec![Vec::new(); occupations.len()];
        let mut skill_adj = vec![Vec::new(); skills.len()];
        for &(o, s) in &self.edges {
            let (o, s) = (occ_remap[o], skill_remap[s]);
            occ_adj[o].push(s);
            skill_adj[s].push(o);
        }
        for adj in occ_adj.iter_mut().chain(skill_adj.iter_mut()) {
            adj.sort_unstable();
        }

        let occ_by_id = occupations
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();
        let skill_by_id = skills
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();

        Ok(SkillOccupationGraph {
            occupations,
            skills,
            occ_adj,
            skill_adj,
            edge_count: self.edges.len(),
            occ_by_id,
            skill_by_id,
        })
    }
}

/// Bipartite graph of occupations and the skills they require.
#[derive(Debug, Clone, PartialEq)]
pub struct SkillOccupationGraph {
    occupations: Vec<OccupationNode>,
    skills: Vec<SkillNode>,
    occ_adj: Vec<Vec<usize>>,
    skill_adj: Vec<Vec<usize>>,
    edge_count: usize,
    occ_by_id: HashMap<String, usize>,
    skill_by_id: HashMap<String, usize>,
}

impl SkillOccupationGraph {
    pub fn occupation_count(&self) -> usize {
        self.occupations.len()
    }

    pub fn skill_count(&self) -> usize {
        self.skills.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn occupations(&self) -> &[OccupationNode] {
        &self.occupations
    }

    pub fn skills(&self) -> &[SkillNode] {
        &self.skills
    }

    pub fn occupation(&self, idx: usize) -> &OccupationNode {
        &self.occupations[idx]
    }

    pub fn skill(&self, idx: usize) -> &SkillNode {
        &self.skills[idx]
    }

    pub fn occupation_index(&self, id: &str) -> Option<usize> {
        self.occ_by_id.get(id).copied()
    }

    pub fn skill_index(&self, id: &str) -> Option<usize> {
        self.skill_by_id.get(id).copied()
    }

    /// Skill indices adjacent to an occupation, ascending.
    pub fn skills_of(&self, occupation: usize) -> &[usize] {
        &self.occ_adj[occupation]
    }

    /// Occupation indices adjacent to a skill, ascending.
    pub fn occupations_of(&self, skill: usize) -> &[usize] {
        &self.skill_adj[skill]
    }

    pub fn occupation_degree(&self, occupation: usize) -> usize {
        self.occ_adj[occupation].len()
    }

    /// Edges as (occupation idx, skill idx) in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.occ_adj
            .iter()
            .enumerate()
            .flat_map(|(o, adj)| adj.iter().map(move |&s| (o, s)))
    }

    pub fn parse_edge_tsv(text: &str) -> Result<Ingested, GraphError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim_end() == EDGE_TSV_HEADER => {}
            Some((_, header)) => {
                return Err(GraphError::MalformedRow {
                    line: 1,
                    reason: format!("expected header {EDGE_TSV_HEADER:?}, found {header:?}"),
                })
            }
            None => return Err(GraphError::EmptyGraph),
        }

        let mut builder = GraphBuilder::new();
        for (i, raw) in lines {
            let line_no = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 4 {
                return Err(GraphError::MalformedRow {
                    line: line_no,
                    reason: format!("expected 4 tab-separated fields, found {}", fields.len()),
                });
            }
            let (occ_id, occ_title, skill_id, skill_name) =
                (fields[0], fields[1], fields[2], fields[3]);
            if occ_id.trim().is_empty() || skill_id.trim().is_empty() {
                return Err(GraphError::MalformedRow {
                    line: line_no,
                    reason: "empty node id".to_string(),
                });
            }
            builder.add_occupation(occ_id, occ_title, NodeSource::User)?;
            builder.add_skill(skill_id, skill_name)?;
            builder.add_edge(occ_id, skill_id)?;
        }
        let duplicate_edges = builder.duplicate_edges();
        let graph = builder.finish()?;
        Ok(Ingested {
            graph,
            report: IngestReport {
                duplicate_edges,
                warnings: Vec::new(),
            },
        })
    }

    pub fn parse_graph_json(text: &str) -> Result<Ingested, GraphError> {
        let doc: GraphDocument = serde_json::from_str(text)?;
        let mut builder = GraphBuilder::new();
        for occ in &doc.occupations {
            builder.add_occupation(&occ.id, &occ.title, occ.source)?;
        }
        for skill in &doc.skills {
            builder.add_skill(&skill.id, &skill.name)?;
        }
        for edge in &doc.edges {
            builder.add_edge(&edge.occupation, &edge.skill)?;
        }
        let duplicate_edges = builder.duplicate_edges();
        let graph = builder.finish()?;
        Ok(Ingested {
            graph,
            report: IngestReport {
                duplicate_edges,
                warnings: Vec::new(),
            },
        })
    }

    /// Canonical JSON document: nodes and edges sorted by id.
    pub fn to_json(&self) -> String {
        let doc = GraphDocument {
            occupations: self.occupations.clone(),
            skills: self.skills.clone(),
            edges: self
                .edges()
                .map(|(o, s)| EdgeRecord {
                    occupation: self.occupations[o].id.clone(),
                    skill: self.skills[s].id.clone(),
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("graph document serializes");
        out.push('\n');
        out
    }

    /// Edge-TSV export. The format cannot express isolated nodes, so they are
    /// dropped and reported.
    pub fn to_edge_tsv(&self) -> TsvExport {
        let mut tsv = String::from(EDGE_TSV_HEADER);
        tsv.push('\n');
        for (o, s) in self.edges() {
            tsv.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                self.occupations[o].id,
                self.occupations[o].title,
                self.skills[s].id,
                self.skills[s].name
            ));
        }
        let dropped_occupations = self
            .occ_adj
            .iter()
            .enumerate()
            .filter(|(_, adj)| adj.is_empty())
            .map(|(i, _)| self.occupations[i].id.clone())
            .collect();
        let dropped_skills = self
            .skill_adj
            .iter()
            .enumerate()
            .filter(|(_, adj)| adj.is_empty())
            .map(|(i, _)| self.skills[i].id.clone())
            .collect();
        TsvExport {
            tsv,
            dropped_occupations,
            dropped_skills,
        }
    }
}

/// Loads and validates a graph file.
pub fn ingest_graph(path: &Path, format: GraphFormat) -> Result<Ingested, GraphError> {
    let text = fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    match format {
        GraphFormat::EdgeTsv => SkillOccupationGraph::parse_edge_tsv(&text),
        GraphFormat::GraphJson => SkillOccupationGraph::parse_graph_json(&text),
    }
}

#[derive(Debug)]
pub struct Ingested {
    pub graph: SkillOccupationGraph,
    pub report: IngestReport,
}

#[derive(Debug, Default)]
pub struct IngestReport {
    pub duplicate_edges: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug)]
pub struct TsvExport {
    pub tsv: String,
    pub dropped_occupations: Vec<String>,
    pub dropped_skills: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphDocument {
    occupations: Vec<OccupationNode>,
    skills: Vec<SkillNode>,
    edges: Vec<EdgeRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRecord {
    occupation: String,
    skill: String,
}

/// Corpus-level counts and degree averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub occupation_count: usize,
    pub skill_count: usize,
    pub edge_count: usize,
    pub avg_skills_per_occupation: f64,
    pub avg_occupations_per_skill: f64,
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>8} {:>8} {:>8} {:>18} {:>18}",
            "#Occ", "#Skill", "#Edges", "#Avg Skill per Occ", "#Avg Occ per Skill"
        )?;
        write!(
            f,
            "{:>8} {:>8} {:>8} {:>18.1} {:>18.1}",
            self.occupation_count,
            self.skill_count,
            self.edge_count,
            self.avg_skills_per_occupation,
            self.avg_occupations_per_skill
        )
    }
}

/// Exact degree averages over the graph.
pub fn compute_stats(g: &SkillOccupationGraph) -> Result<GraphStats, GraphError> {
    if g.occupation_count() == 0 || g.skill_count() == 0 {
        return Err(GraphError::EmptyGraph);
    }
    Ok(GraphStats {
        occupation_count: g.occupation_count(),
        skill_count: g.skill_count(),
        edge_count: g.edge_count(),
        avg_skills_per_occupation: g.edge_count() as f64 / g.occupation_count() as f64,
        avg_occupations_per_skill: g.edge_count() as f64 / g.skill_count() as f64,
    })
}

/// Adjacency over occupations: u and v are adjacent iff they share at least
/// one skill neighbor (one two-hop step in the bipartite graph). No
/// self-loops; neighbor lists ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationProjection {
    adjacency: Vec<Vec<usize>>,
}

impl OccupationProjection {
    pub fn neighbors(&self, occupation: usize) -> &[usize] {
        &self.adjacency[occupation]
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }
}

pub fn occupation_projection(g: &SkillOccupationGraph) -> OccupationProjection {
    let mut adjacency = vec![Vec::new(); g.occupation_count()];
    for skill in 0..g.skill_count() {
        let occs = g.occupations_of(skill);
        for (i, &u) in occs.iter().enumerate() {
            for &v in &occs[i + 1..] {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
        adj.dedup();
    }
    OccupationProjection { adjacency }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn tsv(rows: &[&str]) -> String {
        let mut s = String::from(EDGE_TSV_HEADER);
        s.push('\n');
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    #[test]
    fn minimal_tsv_ingest() {
        let text = tsv(&[
            "A\tOcc A\ts1\tSkill 1",
            "B\tOcc B\ts1\tSkill 1",
        ]);
        let ingested = SkillOccupationGraph::parse_edge_tsv(&text).unwrap();
        assert_eq!(ingested.graph.occupation_count(), 2);
        assert_eq!(ingested.graph.skill_count(), 1);
        assert_eq!(ingested.graph.edge_count(), 2);
        assert_eq!(ingested.report.duplicate_edges, 0);
    }

    #[test]
    fn duplicate_edge_rows_collapse_with_count() {
        let text = tsv(&[
            "A\tOcc A\ts1\tSkill 1",
            "B\tOcc B\ts1\tSkill 1",
            "B\tOcc B\ts1\tSkill 1",
        ]);
        let ingested = SkillOccupationGraph::parse_edge_tsv(&text).unwrap();
        assert_eq!(ingested.graph.edge_count(), 2);
        assert_eq!(ingested.report.duplicate_edges, 1);
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let text = tsv(&["A\tOcc A\ts1\tSkill 1", "B\tOcc B\ts1"]);
        let err = SkillOccupationGraph::parse_edge_tsv(&text).unwrap_err();
        match err {
            GraphError::MalformedRow { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn bad_header_is_line_one_error() {
        let err = SkillOccupationGraph::parse_edge_tsv("occ\ttitle\n").unwrap_err();
        match err {
            GraphError::MalformedRow { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn json_dangling_edge_rejected() {
        let text = r#"{
            "occupations": [{"id": "A", "title": "Occ A", "source": "user"}],
            "skills": [{"id": "s1", "name": "Skill 1"}],
            "edges": [{"occupation": "A", "skill": "missing"}]
        }"#;
        let err = SkillOccupationGraph::parse_graph_json(text).unwrap_err();
        assert!(matches!(err, GraphError::DanglingEdge { .. }));
    }

    #[test]
    fn empty_graph_rejected() {
        let err = SkillOccupationGraph::parse_edge_tsv(&tsv(&[])).unwrap_err();
        assert!(matches!(err, GraphError::EmptyGraph));
    }

    #[test]
    fn conflicting_titles_rejected() {
        let text = tsv(&["A\tOcc A\ts1\tSkill 1", "A\tOther\ts2\tSkill 2"]);
        let err = SkillOccupationGraph::parse_edge_tsv(&text).unwrap_err();
        assert!(matches!(err, GraphError::ConflictingOccupation { .. }));
    }

    #[test]
    fn json_keeps_isolated_nodes_tsv_drops_them() {
        let text = r#"{
            "occupations": [
                {"id": "A", "title": "Occ A", "source": "user"},
                {"id": "Z", "title": "Isolated", "source": "user"}
            ],
            "skills": [{"id": "s1", "name": "Skill 1"}],
            "edges": [{"occupation": "A", "skill": "s1"}]
        }"#;
        let ingested = SkillOccupationGraph::parse_graph_json(text).unwrap();
        assert_eq!(ingested.graph.occupation_count(), 2);

        let export = ingested.graph.to_edge_tsv();
        assert_eq!(export.dropped_occupations, vec!["Z".to_string()]);
        let reparsed = SkillOccupationGraph::parse_edge_tsv(&export.tsv).unwrap();
        assert_eq!(reparsed.graph.occupation_count(), 1);
    }

    #[test]
    fn stats_direct_ratio() {
        let text = tsv(&["A\tOcc A\ts1\tSkill 1", "B\tOcc B\ts1\tSkill 1"]);
        let g = SkillOccupationGraph::parse_edge_tsv(&text).unwrap().graph;
        let stats = compute_stats(&g).unwrap();
        assert_eq!(stats.avg_skills_per_occupation, 1.0);
        assert_eq!(stats.avg_occupations_per_skill, 2.0);
    }

    #[test]
    fn stats_display_rounds_to_one_decimal() {
        let stats = GraphStats {
            occupation_count: 8275,
            skill_count: 14807,
            edge_count: 70661,
            avg_skills_per_occupation: 70661.0 / 8275.0,
            avg_occupations_per_skill: 70661.0 / 14807.0,
        };
        let shown = stats.to_string();
        assert!(shown.contains("8.5"), "{shown}");
        assert!(shown.contains("4.8"), "{shown}");
    }

    #[test]
    fn stats_match_brute_force_recount() {
        let g = crate::testutil::random_graph(50, 80, 300, 11);
        let stats = compute_stats(&g).unwrap();

        // Independent recount: walk every adjacency list.
        let total_occ_degree: usize = (0..g.occupation_count())
            .map(|o| g.skills_of(o).len())
            .sum();
        let total_skill_degree: usize = (0..g.skill_count())
            .map(|s| g.occupations_of(s).len())
            .sum();
        assert_eq!(total_occ_degree, 300);
        assert_eq!(total_skill_degree, 300);
        assert_eq!(
            stats.avg_skills_per_occupation,
            total_occ_degree as f64 / 50.0
        );
        assert_eq!(
            stats.avg_occupations_per_skill,
            total_skill_degree as f64 / 80.0
        );
    }

    #[test]
    fn projection_shared_skill_means_adjacent() {
        let text = tsv(&["A\tOcc A\ts1\tSkill 1", "B\tOcc B\ts1\tSkill 1"]);
        let g = SkillOccupationGraph::parse_edge_tsv(&text).unwrap().graph;
        let proj = occupation_projection(&g);
        let a = g.occupation_index("A").unwrap();
        let b = g.occupation_index("B").unwrap();
        assert_eq!(proj.neighbors(a), &[b]);
        assert_eq!(proj.neighbors(b), &[a]);
    }

    #[test]
    fn projection_disjoint_skills_not_adjacent() {
        let text = tsv(&["A\tOcc A\ts1\tSkill 1", "B\tOcc B\ts2\tSkill 2"]);
        let g = SkillOccupationGraph::parse_edge_tsv(&text).unwrap().graph;
        let proj = occupation_projection(&g);
        assert!(proj.neighbors(0).is_empty());
        assert!(proj.neighbors(1).is_empty());
    }

    #[test]
    fn projection_matches_pairwise_oracle() {
        let g = crate::testutil::random_graph(30, 20, 80, 3);
        let proj = occupation_projection(&g);
        // O(n^2) oracle: compare every occupation pair's skill sets directly.
        for u in 0..g.occupation_count() {
            for v in 0..g.occupation_count() {
                if u == v {
                    assert!(!proj.neighbors(u).contains(&v), "self-loop at {u}");
                    continue;
                }
                let shares = g
                    .skills_of(u)
                    .iter()
                    .any(|s| g.skills_of(v).contains(s));
                assert_eq!(
                    proj.neighbors(u).contains(&v),
                    shares,
                    "projection mismatch for ({u}, {v})"
                );
            }
        }
    }

    #[test]
    fn round_trip_both_formats() {
        // Cover every node with one edge first; TSV cannot express isolated
        // nodes, and this test targets the no-isolated-nodes identity.
        let mut builder = GraphBuilder::new();
        for i in 0..12 {
            builder
                .add_occupation(&format!("o{i:03}"), &format!("Occupation {i}"), NodeSource::User)
                .unwrap();
        }
        for i in 0..9 {
            builder
                .add_skill(&format!("s{i:03}"), &format!("Skill {i}"))
                .unwrap();
        }
        let mut rng = Rng::from_seed(21);
        for i in 0..12 {
            builder
                .add_edge(&format!("o{i:03}"), &format!("s{:03}", i % 9))
                .unwrap();
        }
        for _ in 0..18 {
            let (o, s) = (rng.index(12), rng.index(9));
            builder
                .add_edge(&format!("o{o:03}"), &format!("s{s:03}"))
                .unwrap();
        }
        let g = builder.finish().unwrap();
        let json = g.to_json();
        let from_json = SkillOccupationGraph::parse_graph_json(&json).unwrap().graph;
        assert_eq!(g, from_json);

        let export = g.to_edge_tsv();
        assert!(export.dropped_occupations.is_empty());
        let from_tsv = SkillOccupationGraph::parse_edge_tsv(&export.tsv).unwrap().graph;
        assert_eq!(g, from_tsv);
    }

    #[test]
    fn canonical_json_is_byte_stable() {
        let g = crate::testutil::random_graph(10, 10, 25, 5);
        assert_eq!(g.to_json(), g.to_json());
        let reparsed = SkillOccupationGraph::parse_graph_json(&g.to_json())
            .unwrap()
            .graph;
        assert_eq!(reparsed.to_json(), g.to_json());
    }
}
