//! Subgraph sampling: from a cluster set to the symbolic plan for one triple.
//!
//! A triple plan starts with a uniformly chosen cluster and start occupation.
//! Target counts are drawn (experiences uniform on 1..=5, skills from an
//! oracle or a degree-based fallback), an alternating random walk collects
//! distinct skills and occupations until the targets are met, the collected
//! occupations are put in career order, and each experience gets a year span.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::Gender;
use crate::graph::SkillOccupationGraph;
use crate::rng::Rng;

#[derive(Debug, Error)]
#[error("oracle failed: {0}")]
pub struct OracleFailure(pub String);

/// Answers the skill-count question for a start occupation. Implementations
/// return the raw reply text; parsing happens here so unparseable replies can
/// fall back deterministically.
pub trait SkillCountOracle {
    fn skill_count_reply(&mut self, title: &str) -> Result<String, OracleFailure>;
}

/// Puts experience titles in chronological order.
pub trait OrderingOracle {
    fn order(&mut self, titles: &[String]) -> Result<Vec<String>, OracleFailure>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetSource {
    Oracle,
    Fallback,
}

/// How many experiences and skills one triple should carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingTargets {
    pub experience_count: u8,
    pub skill_count: u32,
    pub source: TargetSource,
}

#[derive(Debug, Clone)]
pub struct TargetChoice {
    pub targets: SamplingTargets,
    /// Present when the oracle was consulted but its reply was unusable.
    pub fallback_reason: Option<String>,
}

pub const MIN_EXPERIENCES: u8 = 1;
pub const MAX_EXPERIENCES: u8 = 5;
pub const FALLBACK_SKILL_MIN: u32 = 3;
pub const FALLBACK_SKILL_MAX: u32 = 20;

/// First integer found in a reply, taken as the skill count. Tokens are
/// whitespace-split and stripped of surrounding punctuation; zero does not
/// count as a usable answer.
pub fn parse_skill_count(reply: &str) -> Option<u32> {
    for token in reply.split_whitespace() {
        let token = token.trim_matches(|c: char| !c.is_ascii_digit());
        if token.is_empty() || token.len() > 6 {
            continue;
        }
        if let Ok(n) = token.parse::<u32>() {
            if n >= 1 {
                return Some(n);
            }
        }
    }
    None
}

/// Draws the per-triple targets. The experience count is uniform on 1..=5;
/// the skill count comes from the oracle when one is supplied and its reply
/// parses, otherwise from the start occupation's degree clamped to [3, 20].
pub fn choose_targets(
    start_title: &str,
    start_degree: usize,
    mut oracle: Option<&mut dyn SkillCountOracle>,
    rng: &mut Rng,
) -> TargetChoice {
    let experience_count = rng.range_inclusive(MIN_EXPERIENCES as i64, MAX_EXPERIENCES as i64) as u8;

    let fallback_count = (start_degree as u32).clamp(FALLBACK_SKILL_MIN, FALLBACK_SKILL_MAX);
    let (skill_count, source, fallback_reason) = match oracle.as_deref_mut() {
        Some(oracle) => match oracle.skill_count_reply(start_title) {
            Ok(reply) => match parse_skill_count(&reply) {
                Some(n) => (n, TargetSource::Oracle, None),
                None => (
                    fallback_count,
                    TargetSource::Fallback,
                    Some(format!("unparseable skill-count reply: {reply:?}")),
                ),
            },
            Err(err) => (
                fallback_count,
                TargetSource::Fallback,
                Some(err.to_string()),
            ),
        },
        None => (fallback_count, TargetSource::Fallback, None),
    };

    TargetChoice {
        targets: SamplingTargets {
            experience_count,
            skill_count,
            source,
        },
        fallback_reason,
    }
}

/// The skill-count question, verbatim with the title substituted.
pub fn build_skill_count_prompt(start_title: &str) -> String {
    format!(
        "On average how many skills does a person with a job title of '{start_title}' may have listed in his or her resume?"
    )
}

/// The ordering question; `None` for fewer than two titles, where there is
/// nothing to order.
pub fn build_ordering_prompt(titles: &[String]) -> Option<String> {
    if titles.len() < 2 {
        return None;
    }
    let list = titles
        .iter()
        .map(|t| format!("\"{t}\""))
        .collect::<Vec<_>>()
        .join(", ");
    Some(format!(
        "Given the previous experiences of individuals with {list}, please arrange them in a chronological order based on the likelihood of encountering these experiences from earlier to later over time."
    ))
}

/// Cluster members resolved to graph indices for sampling.
#[derive(Debug, Clone)]
pub struct ClusterIndex {
    pub cluster_id: u32,
    pub occupations: Vec<usize>,
    pub skills: Vec<usize>,
}

/// Resolves every cluster's member ids against the graph. Fails fast on a
/// cluster set that does not belong to this graph.
pub fn resolve_clusters(
    cs: &crate::clustering::ClusterSet,
    g: &SkillOccupationGraph,
) -> Result<Vec<ClusterIndex>, SamplingError> {
    cs.clusters
        .iter()
        .map(|c| {
            let occupations = c
                .occupation_ids
                .iter()
                .map(|id| {
                    g.occupation_index(id)
                        .ok_or_else(|| SamplingError::UnknownNode { id: id.clone() })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let skills = c
                .skill_ids
                .iter()
                .map(|id| {
                    g.skill_index(id)
                        .ok_or_else(|| SamplingError::UnknownNode { id: id.clone() })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ClusterIndex {
                cluster_id: c.id,
                occupations,
                skills,
            })
        })
        .collect()
}

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("cluster set references unknown node {id:?}")]
    UnknownNode { id: String },
    #[error("no clusters to sample from")]
    NoClusters,
}

/// Uniform cluster, then uniform start occupation within it. Returns the
/// position in `clusters` and the start occupation's graph index.
pub fn choose_start(clusters: &[ClusterIndex], rng: &mut Rng) -> Result<(usize, usize), SamplingError> {
    if clusters.is_empty() {
        return Err(SamplingError::NoClusters);
    }
    let cluster_pos = rng.index(clusters.len());
    let members = &clusters[cluster_pos].occupations;
    let start = members[rng.index(members.len())];
    Ok((cluster_pos, start))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WalkNode {
    Occupation(usize),
    Skill(usize),
}

/// Skills or experiences the walk could not collect within its step budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shortfall {
    pub skills_missing: u32,
    pub experiences_missing: u32,
}

#[derive(Debug, Clone)]
pub struct SampledSubgraph {
    pub cluster_id: u32,
    pub start: usize,
    /// Distinct occupations in collection order; the start comes first.
    pub occupations: Vec<usize>,
    /// Distinct skills in collection order.
    pub skills: Vec<usize>,
    /// Every node the walk visited, in order, for connectivity audits.
    pub trace: Vec<WalkNode>,
    pub shortfall: Option<Shortfall>,
}

/// Steps allowed per unit of target, so larger requests get larger budgets.
pub const WALK_BUDGET_FACTOR: u32 = 200;

/// Alternating random walk from the start occupation.
///
/// At an occupation the walk moves to a uniform skill neighbor, at a skill to
/// a uniform occupation neighbor. New nodes are collected only while their
/// kind's target is unmet, so counts equal targets exactly whenever the
/// cluster can supply them; a stuck walk restarts from the start node. When
/// the step budget runs out first, the plan carries a shortfall flag instead
/// of failing.
pub fn sample_subgraph(
    g: &SkillOccupationGraph,
    cluster: &ClusterIndex,
    start: usize,
    targets: &SamplingTargets,
    rng: &mut Rng,
) -> SampledSubgraph {
    let skill_target = targets.skill_count as usize;
    let exp_target = targets.experience_count as usize;
    let budget = WALK_BUDGET_FACTOR as usize * (skill_target + exp_target);

    let mut occupations = vec![start];
    let mut occ_seen: std::collections::HashSet<usize> = occupations.iter().copied().collect();
    let mut skills: Vec<usize> = Vec::new();
    let mut skill_seen: std::collections::HashSet<usize> = std::collections::HashSet::new();
    let mut trace = vec![WalkNode::Occupation(start)];

    let mut at = WalkNode::Occupation(start);
    let mut steps = 0usize;
    while steps < budget && !(skills.len() >= skill_target && occupations.len() >= exp_target) {
        steps += 1;
        at = match at {
            WalkNode::Occupation(o) => {
                let neighbors = g.skills_of(o);
                if neighbors.is_empty() {
                    // stuck: restart from the start node
                    trace.push(WalkNode::Occupation(start));
                    WalkNode::Occupation(start)
                } else {
                    let s = neighbors[rng.index(neighbors.len())];
                    trace.push(WalkNode::Skill(s));
                    if skills.len() < skill_target && skill_seen.insert(s) {
                        skills.push(s);
                    }
                    WalkNode::Skill(s)
                }
            }
            WalkNode::Skill(s) => {
                let neighbors = g.occupations_of(s);
                let o = neighbors[rng.index(neighbors.len())];
                trace.push(WalkNode::Occupation(o));
                if occupations.len() < exp_target && occ_seen.insert(o) {
                    occupations.push(o);
                }
                WalkNode::Occupation(o)
            }
        };
    }

    let shortfall = if skills.len() < skill_target || occupations.len() < exp_target {
        Some(Shortfall {
            skills_missing: (skill_target - skills.len()) as u32,
            experiences_missing: (exp_target - occupations.len()) as u32,
        })
    } else {
        None
    };

    SampledSubgraph {
        cluster_id: cluster.cluster_id,
        start,
        occupations,
        skills,
        trace,
        shortfall,
    }
}

/// Seniority tier used by the fallback ordering, highest first. A title's
/// tier is the highest tier any of its words (or the "vice president"
/// phrase) hits; unmarked titles sit at tier 2.
const SENIORITY_TIERS: &[(u8, &[&str])] = &[
    (8, &["chief", "head"]),
    (7, &["vp", "vice president"]),
    (6, &["director"]),
    (5, &["manager", "supervisor"]),
    (4, &["lead", "principal", "staff"]),
    (3, &["senior"]),
    (1, &["junior", "assistant"]),
    (0, &["intern"]),
];

pub const UNMARKED_TIER: u8 = 2;

pub fn seniority_tier(title: &str) -> u8 {
    let lowered = title.to_lowercase();
    let words: Vec<&str> = lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .collect();
    for &(tier, keywords) in SENIORITY_TIERS {
        for &kw in keywords {
            let hit = if kw.contains(' ') {
                let parts: Vec<&str> = kw.split(' ').collect();
                words.windows(parts.len()).any(|w| w == parts.as_slice())
            } else {
                words.iter().any(|&w| w == kw)
            };
            if hit {
                return tier;
            }
        }
    }
    UNMARKED_TIER
}

#[derive(Debug, Clone)]
pub struct OrderingOutcome {
    /// Indices into the input, oldest first.
    pub order: Vec<usize>,
    /// Present when an oracle was consulted but its answer was discarded.
    pub fallback_reason: Option<String>,
}

/// Orders experiences oldest to newest.
///
/// An oracle's answer is used only when it is a permutation of the input
/// titles; anything else falls back to ascending seniority tier, ties broken
/// by ascending occupation degree and then title.
pub fn order_experiences(
    titles: &[String],
    degrees: &[usize],
    mut oracle: Option<&mut dyn OrderingOracle>,
) -> OrderingOutcome {
    assert_eq!(titles.len(), degrees.len());
    if titles.len() <= 1 {
        return OrderingOutcome {
            order: (0..titles.len()).collect(),
            fallback_reason: None,
        };
    }

    if let Some(oracle) = oracle.as_deref_mut() {
        match oracle.order(titles) {
            Ok(reply) => match permutation_from_titles(titles, &reply) {
                Some(order) => {
                    return OrderingOutcome {
                        order,
                        fallback_reason: None,
                    }
                }
                None => {
                    return OrderingOutcome {
                        order: fallback_order(titles, degrees),
                        fallback_reason: Some(format!(
                            "oracle ordering is not a permutation of the input: {reply:?}"
                        )),
                    }
                }
            },
            Err(err) => {
                return OrderingOutcome {
                    order: fallback_order(titles, degrees),
                    fallback_reason: Some(err.to_string()),
                }
            }
        }
    }

    OrderingOutcome {
        order: fallback_order(titles, degrees),
        fallback_reason: None,
    }
}

/// Maps oracle-returned titles back to input indices; `None` unless the
/// reply is exactly a permutation of the input multiset.
fn permutation_from_titles(input: &[String], reply: &[String]) -> Option<Vec<usize>> {
    if input.len() != reply.len() {
        return None;
    }
    let mut used = vec![false; input.len()];
    let mut order = Vec::with_capacity(input.len());
    for title in reply {
        let idx = input
            .iter()
            .enumerate()
            .position(|(i, t)| !used[i] && t == title)?;
        used[idx] = true;
        order.push(idx);
    }
    Some(order)
}

fn fallback_order(titles: &[String], degrees: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..titles.len()).collect();
    order.sort_by(|&a, &b| {
        seniority_tier(&titles[a])
            .cmp(&seniority_tier(&titles[b]))
            .then(degrees[a].cmp(&degrees[b]))
            .then(titles[a].cmp(&titles[b]))
    });
    order
}

/// One past position on a resume.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperienceSpan {
    pub occupation_id: String,
    pub title: String,
    pub start_year: i32,
    pub end_year: i32,
    pub duration_years: u8,
}

pub const LAST_ACTIVE_MIN: i32 = 2015;
pub const LAST_ACTIVE_MAX: i32 = 2023;
pub const MIN_DURATION: u8 = 1;
pub const MAX_DURATION: u8 = 5;

/// Chains spans backward from the last-active year: the newest span ends at
/// `last_active`, and each earlier span ends where its successor starts.
/// Input durations are oldest first; output is (start, end) pairs aligned
/// with them.
pub fn compute_spans(last_active: i32, durations: &[u8]) -> Vec<(i32, i32)> {
    let mut spans = vec![(0, 0); durations.len()];
    let mut end = last_active;
    for i in (0..durations.len()).rev() {
        let start = end - durations[i] as i32;
        spans[i] = (start, end);
        end = start;
    }
    spans
}

/// Draws a last-active year and per-experience durations, then assigns
/// consecutive spans. Also draws the independent per-experience year counts
/// used by the job description. Draw order: last-active year, then durations
/// oldest to newest, then the job-description years oldest to newest.
pub fn attribute_time(
    ordered: &[(String, String)],
    rng: &mut Rng,
) -> (Vec<ExperienceSpan>, Vec<u8>) {
    assert!(!ordered.is_empty());
    let last_active = rng.range_inclusive(LAST_ACTIVE_MIN as i64, LAST_ACTIVE_MAX as i64) as i32;
    let durations: Vec<u8> = ordered
        .iter()
        .map(|_| rng.range_inclusive(MIN_DURATION as i64, MAX_DURATION as i64) as u8)
        .collect();
    let spans = compute_spans(last_active, &durations);
    let experiences = ordered
        .iter()
        .zip(spans.iter().zip(durations.iter()))
        .map(|((id, title), (&(start, end), &d))| ExperienceSpan {
            occupation_id: id.clone(),
            title: title.clone(),
            start_year: start,
            end_year: end,
            duration_years: d,
        })
        .collect();
    let jd_years: Vec<u8> = ordered
        .iter()
        .map(|_| rng.range_inclusive(MIN_DURATION as i64, MAX_DURATION as i64) as u8)
        .collect();
    (experiences, jd_years)
}

/// The fully-resolved symbolic plan for one triple, before any text is
/// rendered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleSpec {
    pub cluster_id: u32,
    pub start_occupation_id: String,
    /// The job title of the triple; the start occupation's title.
    pub start_title: String,
    /// Skill names in collection order.
    pub skills: Vec<String>,
    /// Oldest to newest.
    pub experiences: Vec<ExperienceSpan>,
    /// Independent year counts for the job description, aligned with
    /// `experiences`.
    pub jd_experience_years: Vec<u8>,
    pub candidate_first_name: String,
    pub candidate_gender: Gender,
    pub rng_seed: u64,
    pub targets: SamplingTargets,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shortfall: Option<Shortfall>,
}
