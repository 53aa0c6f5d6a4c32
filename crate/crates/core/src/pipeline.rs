//! Stage orchestration: plan triples from a clustered graph, render them
//! through either renderer, and assess document quality.
//!
//! Planning is sequential in triple index so gender balancing and every
//! random draw depend only on (root seed, index); rendering and assessment
//! fan out across worker threads because they are pure per item.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{assign_name, build_annotation, perturb, AnnotationRecord, GenderBalancer, NamePool};
use crate::clustering::ClusterSet;
use crate::graph::SkillOccupationGraph;
use crate::quality::{build_geval_prompt, parse_score, Criterion, QualityScore};
use crate::rendering::endpoint::{complete_cached, RequestLogEntry};
use crate::rendering::prompt::resume_experience_list;
use crate::rendering::{
    build_generation_prompt, parse_triple, render_template, verify_unmatched_skills, DocumentKind,
    EndpointClient, EndpointError, ParsedTriple, RendererKind, ResponseCache, Triple,
};
use crate::rng::{derive_seed, Rng};
use crate::sampling::{
    choose_start, choose_targets, order_experiences, resolve_clusters, sample_subgraph,
    attribute_time, OracleFailure, OrderingOracle, SamplingError, SkillCountOracle, TripleSpec,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Endpoint(#[from] EndpointError),
}

/// Both oracle questions a plan may ask, answered by one backend so the
/// planner can hold a single mutable handle.
pub trait PlanOracles {
    fn skill_count_reply(&mut self, title: &str) -> Result<String, OracleFailure>;
    fn order_titles(&mut self, titles: &[String]) -> Result<Vec<String>, OracleFailure>;
}

struct SkillShim<'a>(&'a mut dyn PlanOracles);
impl SkillCountOracle for SkillShim<'_> {
    fn skill_count_reply(&mut self, title: &str) -> Result<String, OracleFailure> {
        self.0.skill_count_reply(title)
    }
}

struct OrderShim<'a>(&'a mut dyn PlanOracles);
impl OrderingOracle for OrderShim<'_> {
    fn order(&mut self, titles: &[String]) -> Result<Vec<String>, OracleFailure> {
        self.0.order_titles(titles)
    }
}

/// One triple's plan and annotation, ready for rendering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedTriple {
    pub id: String,
    pub spec: TripleSpec,
    pub annotation: AnnotationRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanReject {
    pub index: u64,
    pub reason: String,
}

#[derive(Debug)]
pub struct PlanBatch {
    pub planned: Vec<PlannedTriple>,
    pub rejected: Vec<PlanReject>,
    pub shortfall_count: usize,
    pub oracle_fallbacks: usize,
}

/// Plans `count` triples. Each index derives its own seed from the root, so
/// re-running any subset reproduces the same plans; rejected indices (a
/// cluster that cannot supply two skills) are reported, not silently
/// skipped.
pub fn plan_triples(
    g: &SkillOccupationGraph,
    cs: &ClusterSet,
    pool: &NamePool,
    count: u64,
    root_seed: u64,
    mut oracles: Option<&mut dyn PlanOracles>,
) -> Result<PlanBatch, PipelineError> {
    let clusters = resolve_clusters(cs, g)?;
    if clusters.is_empty() {
        return Err(PipelineError::Sampling(SamplingError::NoClusters));
    }

    let mut balancer = GenderBalancer::new();
    let mut batch = PlanBatch {
        planned: Vec::with_capacity(count as usize),
        rejected: Vec::new(),
        shortfall_count: 0,
        oracle_fallbacks: 0,
    };

    for index in 0..count {
        let seed = derive_seed(root_seed, "sample", index);
        let mut rng = Rng::from_seed(seed);

        let (cluster_pos, start) = choose_start(&clusters, &mut rng)?;
        let cluster = &clusters[cluster_pos];
        let start_title = g.occupation(start).title.clone();
        let start_degree = g.occupation_degree(start);

        let choice = match oracles.as_deref_mut() {
            Some(oracles) => {
                let mut shim = SkillShim(oracles);
                choose_targets(&start_title, start_degree, Some(&mut shim), &mut rng)
            }
            None => choose_targets(&start_title, start_degree, None, &mut rng),
        };
        if choice.fallback_reason.is_some() {
            batch.oracle_fallbacks += 1;
        }

        let sub = sample_subgraph(g, cluster, start, &choice.targets, &mut rng);
        if sub.shortfall.is_some() {
            batch.shortfall_count += 1;
        }
        if sub.skills.len() < 2 {
            batch.rejected.push(PlanReject {
                index,
                reason: format!(
                    "cluster {} supplies only {} skill(s); need at least 2 to perturb",
                    cluster.cluster_id,
                    sub.skills.len()
                ),
            });
            continue;
        }

        let titles: Vec<String> = sub
            .occupations
            .iter()
            .map(|&o| g.occupation(o).title.clone())
            .collect();
        let degrees: Vec<usize> = sub
            .occupations
            .iter()
            .map(|&o| g.occupation_degree(o))
            .collect();
        let ordering = match oracles.as_deref_mut() {
            Some(oracles) if titles.len() >= 2 => {
                let mut shim = OrderShim(oracles);
                order_experiences(&titles, &degrees, Some(&mut shim))
            }
            _ => order_experiences(&titles, &degrees, None),
        };
        if ordering.fallback_reason.is_some() {
            batch.oracle_fallbacks += 1;
        }

        let ordered: Vec<(String, String)> = ordering
            .order
            .iter()
            .map(|&i| {
                (
                    g.occupation(sub.occupations[i]).id.clone(),
                    titles[i].clone(),
                )
            })
            .collect();
        let (experiences, jd_years) = attribute_time(&ordered, &mut rng);

        let (name, gender) = assign_name(pool, &mut balancer, cluster.cluster_id, &mut rng);

        let spec = TripleSpec {
            cluster_id: cluster.cluster_id,
            start_occupation_id: g.occupation(start).id.clone(),
            start_title,
            skills: sub.skills.iter().map(|&s| g.skill(s).name.clone()).collect(),
            experiences,
            jd_experience_years: jd_years,
            candidate_first_name: name.clone(),
            candidate_gender: gender,
            rng_seed: seed,
            targets: choice.targets,
            shortfall: sub.shortfall,
        };
        let perturbation = perturb(&spec, &mut rng).expect("at least 2 skills checked above");
        let annotation = build_annotation(&spec, &perturbation, &name, gender);

        batch.planned.push(PlannedTriple {
            id: format!("t{index:06}"),
            spec,
            annotation,
        });
    }

    Ok(batch)
}

/// Offline rendering of a planned batch. Deterministic, never fails.
pub fn render_planned_template(planned: &[PlannedTriple]) -> Vec<Triple> {
    planned
        .iter()
        .map(|p| render_template(&p.id, &p.spec, &p.annotation))
        .collect()
}

/// Appended to the prompt on the one re-ask after a malformed completion.
pub const STRUCTURE_REMINDER: &str = "Please follow the structure exactly.";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RejectedTriple {
    pub id: String,
    pub reason: String,
    pub raw_text: String,
}

#[derive(Debug, Default)]
pub struct GenerateReport {
    pub triples: Vec<Triple>,
    /// Completions that stayed malformed after the reminder re-ask.
    pub rejects: Vec<RejectedTriple>,
    /// Triples whose requests failed outright; re-run to resume them.
    pub endpoint_failures: Vec<(String, String)>,
    pub log: Vec<RequestLogEntry>,
}

enum Generated {
    Ok(Box<Triple>),
    Rejected(RejectedTriple),
    Failed(String, String),
}

fn generate_one(
    planned: &PlannedTriple,
    client: &EndpointClient,
    cache: Option<&ResponseCache>,
    log: &mut Vec<RequestLogEntry>,
) -> Generated {
    let prompt = build_generation_prompt(&planned.spec, &planned.annotation);

    let mut attempt_prompt = prompt.text().to_string();
    let mut last_raw = String::new();
    let mut last_reason = String::new();
    for ask in 0..2 {
        let completion = match complete_cached(client, cache, &attempt_prompt) {
            Ok(c) => c,
            Err(e) => {
                log.push(RequestLogEntry {
                    triple_id: planned.id.clone(),
                    kind: "generate".to_string(),
                    request_key: String::new(),
                    cache_hit: false,
                    attempts: 0,
                    outcome: format!("error: {e}"),
                });
                return Generated::Failed(planned.id.clone(), e.to_string());
            }
        };
        log.push(RequestLogEntry {
            triple_id: planned.id.clone(),
            kind: if ask == 0 { "generate" } else { "generate-retry" }.to_string(),
            request_key: completion.key.clone(),
            cache_hit: completion.cache_hit,
            attempts: completion.attempts,
            outcome: "ok".to_string(),
        });

        match parse_and_verify(&planned.annotation, &completion.text) {
            Ok(parsed) => {
                return Generated::Ok(Box::new(Triple {
                    id: planned.id.clone(),
                    spec: planned.spec.clone(),
                    annotation: planned.annotation.clone(),
                    job_description: parsed.job_description,
                    resume_matched: parsed.resume_matched,
                    resume_unmatched: parsed.resume_unmatched,
                    renderer: RendererKind::Endpoint,
                    raw_text: Some(completion.text),
                }));
            }
            Err(reason) => {
                last_raw = completion.text;
                last_reason = reason;
                attempt_prompt = format!("{}\n\n{STRUCTURE_REMINDER}", prompt.text());
            }
        }
    }
    Generated::Rejected(RejectedTriple {
        id: planned.id.clone(),
        reason: last_reason,
        raw_text: last_raw,
    })
}

fn parse_and_verify(
    annotation: &AnnotationRecord,
    raw: &str,
) -> Result<ParsedTriple, String> {
    let parsed = parse_triple(raw).map_err(|e| e.to_string())?;
    verify_unmatched_skills(annotation, &parsed).map_err(|e| e.to_string())?;
    Ok(parsed)
}

/// Endpoint-backed generation across `jobs` worker threads. Output order
/// follows the input plan regardless of scheduling.
pub fn generate_endpoint_batch(
    planned: &[PlannedTriple],
    client: &EndpointClient,
    cache: Option<&ResponseCache>,
    jobs: usize,
) -> GenerateReport {
    let jobs = jobs.max(1);
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<(Generated, Vec<RequestLogEntry>)>>> =
        Mutex::new((0..planned.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..jobs.min(planned.len().max(1)) {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= planned.len() {
                    break;
                }
                let mut log = Vec::new();
                let outcome = generate_one(&planned[index], client, cache, &mut log);
                slots.lock().unwrap()[index] = Some((outcome, log));
            });
        }
    });

    let mut report = GenerateReport::default();
    for slot in slots.into_inner().unwrap() {
        let (outcome, log) = slot.expect("every index processed");
        report.log.extend(log);
        match outcome {
            Generated::Ok(triple) => report.triples.push(*triple),
            Generated::Rejected(reject) => report.rejects.push(reject),
            Generated::Failed(id, error) => report.endpoint_failures.push((id, error)),
        }
    }
    report
}

#[derive(Debug, Default)]
pub struct AssessReport {
    pub scores: Vec<QualityScore>,
    pub failures: Vec<(String, String)>,
    pub log: Vec<RequestLogEntry>,
}

/// Scores a seeded sample of documents on both criteria through the judge
/// endpoint. `sample_size` counts documents, three per triple at most.
pub fn assess_triples(
    triples: &[Triple],
    sample_size: usize,
    seed: u64,
    client: &EndpointClient,
    cache: Option<&ResponseCache>,
) -> AssessReport {
    let mut documents: Vec<(String, DocumentKind, String, &Triple)> = Vec::new();
    for triple in triples {
        documents.push((
            format!("{}/jd", triple.id),
            DocumentKind::JobDescription,
            triple.job_description.text(),
            triple,
        ));
        documents.push((
            format!("{}/resume-matched", triple.id),
            DocumentKind::Resume,
            triple.resume_matched.text(),
            triple,
        ));
        documents.push((
            format!("{}/resume-unmatched", triple.id),
            DocumentKind::Resume,
            triple.resume_unmatched.text(),
            triple,
        ));
    }
    let mut order: Vec<usize> = (0..documents.len()).collect();
    let mut rng = Rng::from_seed(derive_seed(seed, "assess", 0));
    rng.shuffle(&mut order);
    order.truncate(sample_size);
    order.sort_unstable();

    let mut report = AssessReport::default();
    for index in order {
        let (doc_id, kind, text, triple) = &documents[index];
        let skills = triple.spec.skills.join(", ");
        let experience = resume_experience_list(&triple.spec.experiences);
        for criterion in [Criterion::Consistency, Criterion::Factuality] {
            let prompt = build_geval_prompt(criterion, &skills, &experience, text, *kind);
            match complete_cached(client, cache, &prompt) {
                Ok(completion) => {
                    report.log.push(RequestLogEntry {
                        triple_id: doc_id.clone(),
                        kind: format!("assess-{criterion}"),
                        request_key: completion.key.clone(),
                        cache_hit: completion.cache_hit,
                        attempts: completion.attempts,
                        outcome: "ok".to_string(),
                    });
                    match parse_score(&completion.text) {
                        Ok(score) => report.scores.push(QualityScore {
                            criterion,
                            score,
                            document_id: doc_id.clone(),
                            judge_model: client.config().model.clone(),
                        }),
                        Err(e) => report.failures.push((doc_id.clone(), e.to_string())),
                    }
                }
                Err(e) => report.failures.push((doc_id.clone(), e.to_string())),
            }
        }
    }
    report
}

/// Writes one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), PipelineError> {
    let file = std::fs::File::create(path).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut writer = std::io::BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item).expect("pipeline artifacts serialize");
        writeln!(writer, "{line}").map_err(|source| PipelineError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    writer.flush().map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads JSONL, counting lines that fail to parse instead of aborting.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<(Vec<T>, usize), PipelineError> {
    let file = std::fs::File::open(path).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = std::io::BufReader::new(file);
    let mut items = Vec::new();
    let mut skipped = 0;
    for line in reader.lines() {
        let line = line.map_err(|source| PipelineError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(item) => items.push(item),
            Err(_) => skipped += 1,
        }
    }
    Ok((items, skipped))
}

/// Per-stage provenance record; written next to every stage's artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub counts: BTreeMap<String, u64>,
}

impl Manifest {
    pub fn new(stage: &str, config_hash: &str, seed: u64) -> Self {
        Manifest {
            stage: stage.to_string(),
            config_hash: config_hash.to_string(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            counts: BTreeMap::new(),
        }
    }

    pub fn with_count(mut self, key: &str, value: u64) -> Self {
        self.counts.insert(key.to_string(), value);
        self
    }

    pub fn write(&self, dir: &Path) -> Result<(), PipelineError> {
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|source| PipelineError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}
