//! Materializing per-task supervised datasets from triples, plus splits and
//! corpus statistics.
//!
//! Gold labels always come from the symbolic plan, never from re-parsing
//! rendered text: the plan is the ground truth the documents were generated
//! to satisfy.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rendering::Triple;
use crate::rng::Rng;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaskError {
    #[error("not enough triples to split: have {available}, need {needed}")]
    InsufficientTriples { available: usize, needed: usize },
    #[error("invalid category map: {0}")]
    BadCategoryMap(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Matching,
    Explanation,
    Extraction,
    Editing,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [
        TaskKind::Matching,
        TaskKind::Explanation,
        TaskKind::Extraction,
        TaskKind::Editing,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Matching => "matching",
            TaskKind::Explanation => "explanation",
            TaskKind::Extraction => "extraction",
            TaskKind::Editing => "editing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    Dev,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Test, Split::Dev];

    pub fn name(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Dev => "dev",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TaskInput {
    /// Matching and explanation: a document pair.
    Pair {
        job_description: String,
        resume: String,
    },
    /// Extraction: one document and what to extract from it.
    Document {
        document: String,
        document_kind: String,
        item_kind: String,
    },
    /// Editing: the unmatched resume plus the modification signal.
    Editing {
        resume_unmatched: String,
        modification_signal: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TaskTarget {
    Label { label: u8 },
    Items { items: Vec<String> },
    Sections {
        skills_section: String,
        experience_section: String,
    },
}

/// One supervised example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub record_id: String,
    pub task: TaskKind,
    pub triple_id: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub split: Option<Split>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub polarity: Option<Polarity>,
    pub input: TaskInput,
    pub target: TaskTarget,
}

fn pair_input(triple: &Triple, unmatched: bool) -> TaskInput {
    TaskInput::Pair {
        job_description: triple.job_description.text(),
        resume: if unmatched {
            triple.resume_unmatched.text()
        } else {
            triple.resume_matched.text()
        },
    }
}

/// Matching: one positive pair (matched resume) and one negative pair
/// (unmatched resume) per triple.
pub fn export_matching(triples: &[Triple]) -> Vec<TaskRecord> {
    let mut records = Vec::with_capacity(triples.len() * 2);
    for triple in triples {
        records.push(TaskRecord {
            record_id: format!("{}/matching/pos", triple.id),
            task: TaskKind::Matching,
            triple_id: triple.id.clone(),
            split: None,
            polarity: Some(Polarity::Positive),
            input: pair_input(triple, false),
            target: TaskTarget::Label { label: 1 },
        });
        records.push(TaskRecord {
            record_id: format!("{}/matching/neg", triple.id),
            task: TaskKind::Matching,
            triple_id: triple.id.clone(),
            split: None,
            polarity: Some(Polarity::Negative),
            input: pair_input(triple, true),
            target: TaskTarget::Label { label: 0 },
        });
    }
    records
}

/// Explanation: the same pairs as matching, with the explanation item lists
/// as targets.
pub fn export_explanation(triples: &[Triple]) -> Vec<TaskRecord> {
    let mut records = Vec::with_capacity(triples.len() * 2);
    for triple in triples {
        records.push(TaskRecord {
            record_id: format!("{}/explanation/pos", triple.id),
            task: TaskKind::Explanation,
            triple_id: triple.id.clone(),
            split: None,
            polarity: Some(Polarity::Positive),
            input: pair_input(triple, false),
            target: TaskTarget::Items {
                items: triple.annotation.explanation_positive.clone(),
            },
        });
        records.push(TaskRecord {
            record_id: format!("{}/explanation/neg", triple.id),
            task: TaskKind::Explanation,
            triple_id: triple.id.clone(),
            split: None,
            polarity: Some(Polarity::Negative),
            input: pair_input(triple, true),
            target: TaskTarget::Items {
                items: triple.annotation.explanation_negative.clone(),
            },
        });
    }
    records
}

/// Gold skill and experience-title sets per document, straight from the
/// plan. The unmatched resume's sets reflect the perturbation.
pub fn extraction_gold(triple: &Triple, document_kind: &str, item_kind: &str) -> Vec<String> {
    let spec = &triple.spec;
    let perturbation = &triple.annotation.perturbation;
    match (document_kind, item_kind) {
        ("resume-unmatched", "skills") => spec
            .skills
            .iter()
            .filter(|s| !perturbation.removed_skills.contains(s))
            .cloned()
            .collect(),
        (_, "skills") => spec.skills.clone(),
        ("resume-unmatched", "experiences") => {
            let mut titles: Vec<String> =
                spec.experiences.iter().map(|e| e.title.clone()).collect();
            if perturbation.last_experience_dropped {
                titles.pop();
            }
            titles
        }
        (_, "experiences") => spec.experiences.iter().map(|e| e.title.clone()).collect(),
        _ => unreachable!("unknown extraction axis {document_kind}/{item_kind}"),
    }
}

/// Extraction: six records per triple (three documents, two item kinds).
pub fn export_extraction(triples: &[Triple]) -> Vec<TaskRecord> {
    let mut records = Vec::with_capacity(triples.len() * 6);
    for triple in triples {
        let documents = [
            ("job-description", triple.job_description.text()),
            ("resume-matched", triple.resume_matched.text()),
            ("resume-unmatched", triple.resume_unmatched.text()),
        ];
        for (document_kind, text) in documents {
            for item_kind in ["skills", "experiences"] {
                records.push(TaskRecord {
                    record_id: format!(
                        "{}/extraction/{}/{}",
                        triple.id, document_kind, item_kind
                    ),
                    task: TaskKind::Extraction,
                    triple_id: triple.id.clone(),
                    split: None,
                    polarity: None,
                    input: TaskInput::Document {
                        document: text.clone(),
                        document_kind: document_kind.to_string(),
                        item_kind: item_kind.to_string(),
                    },
                    target: TaskTarget::Items {
                        items: extraction_gold(triple, document_kind, item_kind),
                    },
                });
            }
        }
    }
    records
}

/// Editing: reconstruct the matched resume's Skills and Experience sections
/// from the unmatched resume, with the modification items as an extra
/// signal.
pub fn export_editing(triples: &[Triple]) -> Vec<TaskRecord> {
    triples
        .iter()
        .map(|triple| TaskRecord {
            record_id: format!("{}/editing", triple.id),
            task: TaskKind::Editing,
            triple_id: triple.id.clone(),
            split: None,
            polarity: None,
            input: TaskInput::Editing {
                resume_unmatched: triple.resume_unmatched.text(),
                modification_signal: triple.annotation.explanation_negative.clone(),
            },
            target: TaskTarget::Sections {
                skills_section: triple
                    .resume_matched
                    .section("Skills")
                    .unwrap_or_default()
                    .to_string(),
                experience_section: triple
                    .resume_matched
                    .section("Experience")
                    .unwrap_or_default()
                    .to_string(),
            },
        })
        .collect()
}

/// True when the perturbation removed as many skills as its bound allows.
pub fn is_maximal_perturbation(triple: &Triple) -> bool {
    let bound = 5.min(triple.spec.skills.len().saturating_sub(1));
    triple.annotation.perturbation.removed_skills.len() == bound
}

/// Noise-augmented matching export for out-of-distribution training:
/// unmatched resumes of maximally perturbed triples become positives, and
/// each positive is paired with a cross-triple (job description, resume)
/// negative drawn from the other triples.
pub fn export_matching_noise(triples: &[Triple], rng: &mut Rng) -> Vec<TaskRecord> {
    let qualifying: Vec<&Triple> = triples.iter().filter(|t| is_maximal_perturbation(t)).collect();
    let mut records = Vec::with_capacity(qualifying.len() * 2);
    for triple in &qualifying {
        records.push(TaskRecord {
            record_id: format!("{}/matching-noise/pos", triple.id),
            task: TaskKind::Matching,
            triple_id: triple.id.clone(),
            split: None,
            polarity: Some(Polarity::Positive),
            input: pair_input(triple, true),
            target: TaskTarget::Label { label: 1 },
        });
        if triples.len() > 1 {
            // cross-triple negative: this job description against a resume
            // sampled from a different triple
            let other = loop {
                let candidate = &triples[rng.index(triples.len())];
                if candidate.id != triple.id {
                    break candidate;
                }
            };
            records.push(TaskRecord {
                record_id: format!("{}/matching-noise/neg", triple.id),
                task: TaskKind::Matching,
                triple_id: triple.id.clone(),
                split: None,
                polarity: Some(Polarity::Negative),
                input: TaskInput::Pair {
                    job_description: triple.job_description.text(),
                    resume: other.resume_matched.text(),
                },
                target: TaskTarget::Label { label: 0 },
            });
        }
    }
    records
}

/// Materializes one task. `noise_mode` only changes the matching task.
pub fn export_task(
    triples: &[Triple],
    task: TaskKind,
    noise_mode: bool,
    rng: &mut Rng,
) -> Vec<TaskRecord> {
    match (task, noise_mode) {
        (TaskKind::Matching, false) => export_matching(triples),
        (TaskKind::Matching, true) => export_matching_noise(triples, rng),
        (TaskKind::Explanation, _) => export_explanation(triples),
        (TaskKind::Extraction, _) => export_extraction(triples),
        (TaskKind::Editing, _) => export_editing(triples),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub test: usize,
    pub dev: usize,
}

impl SplitSizes {
    pub fn total(&self) -> usize {
        self.train + self.test + self.dev
    }
}

impl Default for SplitSizes {
    fn default() -> Self {
        SplitSizes {
            train: 50_000,
            test: 1_000,
            dev: 1_000,
        }
    }
}

/// Assigns whole triples to splits with a seeded shuffle, so a triple's
/// records never straddle a split boundary. The assignment depends only on
/// the id set and the seed. Ids beyond the requested sizes stay unassigned.
pub fn assign_splits(
    triple_ids: &[String],
    sizes: SplitSizes,
    seed: u64,
) -> Result<HashMap<String, Split>, TaskError> {
    let mut ids: Vec<String> = triple_ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() < sizes.total() {
        return Err(TaskError::InsufficientTriples {
            available: ids.len(),
            needed: sizes.total(),
        });
    }
    let mut rng = Rng::from_seed(seed);
    rng.shuffle(&mut ids);
    let mut assignment = HashMap::with_capacity(sizes.total());
    for (i, id) in ids.into_iter().enumerate() {
        let split = if i < sizes.train {
            Split::Train
        } else if i < sizes.train + sizes.test {
            Split::Test
        } else if i < sizes.total() {
            Split::Dev
        } else {
            break;
        };
        assignment.insert(id, split);
    }
    Ok(assignment)
}

pub fn apply_splits(records: &mut [TaskRecord], assignment: &HashMap<String, Split>) {
    for record in records {
        record.split = assignment.get(&record.triple_id).copied();
    }
}

pub const CATEGORIES: [&str; 5] = [
    "tech",
    "social-product-finance",
    "manual-labor",
    "healthcare",
    "administrative",
];

pub const UNCATEGORIZED: &str = "uncategorized";

/// User-editable mapping from cluster ids (or job-title keywords) to the
/// five report categories. Keyword rules apply in file order when no
/// cluster rule matches.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CategoryMap {
    #[serde(default)]
    pub clusters: BTreeMap<u32, String>,
    #[serde(default)]
    pub title_keywords: Vec<(String, String)>,
}

impl CategoryMap {
    pub fn from_json(text: &str) -> Result<Self, TaskError> {
        serde_json::from_str(text).map_err(|e| TaskError::BadCategoryMap(e.to_string()))
    }

    pub fn category_for(&self, cluster_id: u32, start_title: &str) -> Option<&str> {
        if let Some(category) = self.clusters.get(&cluster_id) {
            return Some(category);
        }
        let lowered = start_title.to_lowercase();
        self.title_keywords
            .iter()
            .find(|(keyword, _)| lowered.contains(&keyword.to_lowercase()))
            .map(|(_, category)| category.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocStats {
    pub count: usize,
    pub mean_words: f64,
    pub min_words: usize,
    pub max_words: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub job_description: DocStats,
    pub resume_matched: DocStats,
    pub resume_unmatched: DocStats,
    pub category_distribution: BTreeMap<String, usize>,
    pub mean_skills: f64,
    pub mean_experiences: f64,
    pub mean_removed_skills: f64,
    /// Cluster ids that fell through the category map.
    pub uncategorized_clusters: Vec<u32>,
}

fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

fn doc_stats(counts: &[usize]) -> DocStats {
    DocStats {
        count: counts.len(),
        mean_words: if counts.is_empty() {
            0.0
        } else {
            counts.iter().sum::<usize>() as f64 / counts.len() as f64
        },
        min_words: counts.iter().copied().min().unwrap_or(0),
        max_words: counts.iter().copied().max().unwrap_or(0),
    }
}

/// Corpus-level statistics: per-kind word counts, category distribution,
/// and the plan-level means. Words are whitespace-separated tokens over the
/// full document text, headers included.
pub fn compute_corpus_stats(triples: &[Triple], categories: &CategoryMap) -> CorpusStats {
    let jd_words: Vec<usize> = triples
        .iter()
        .map(|t| word_count(&t.job_description.text()))
        .collect();
    let matched_words: Vec<usize> = triples
        .iter()
        .map(|t| word_count(&t.resume_matched.text()))
        .collect();
    let unmatched_words: Vec<usize> = triples
        .iter()
        .map(|t| word_count(&t.resume_unmatched.text()))
        .collect();

    let mut distribution: BTreeMap<String, usize> = BTreeMap::new();
    let mut uncategorized: Vec<u32> = Vec::new();
    for triple in triples {
        let category = categories
            .category_for(triple.spec.cluster_id, &triple.spec.start_title)
            .unwrap_or_else(|| {
                uncategorized.push(triple.spec.cluster_id);
                UNCATEGORIZED
            });
        *distribution.entry(category.to_string()).or_insert(0) += 1;
    }
    uncategorized.sort_unstable();
    uncategorized.dedup();

    let n = triples.len().max(1) as f64;
    CorpusStats {
        job_description: doc_stats(&jd_words),
        resume_matched: doc_stats(&matched_words),
        resume_unmatched: doc_stats(&unmatched_words),
        category_distribution: distribution,
        mean_skills: triples.iter().map(|t| t.spec.skills.len()).sum::<usize>() as f64 / n,
        mean_experiences: triples
            .iter()
            .map(|t| t.spec.experiences.len())
            .sum::<usize>() as f64
            / n,
        mean_removed_skills: triples
            .iter()
            .map(|t| t.annotation.perturbation.removed_skills.len())
            .sum::<usize>() as f64
            / n,
        uncategorized_clusters: uncategorized,
    }
}

/// Aligned text report: document table, plan-average table, and the
/// category distribution.
pub fn format_stats_table(stats: &CorpusStats) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<6} {:>8} {:>9} {:>8} {:>8}\n",
        "", "#Doc", "Avg #W", "Min #W", "Max #W"
    ));
    for (label, d) in [
        ("JD", &stats.job_description),
        ("R-M", &stats.resume_matched),
        ("R-U", &stats.resume_unmatched),
    ] {
        out.push_str(&format!(
            "{:<6} {:>8} {:>9.1} {:>8} {:>8}\n",
            label, d.count, d.mean_words, d.min_words, d.max_words
        ));
    }
    out.push('\n');
    out.push_str(&format!(
        "{:<8} {:>12} {:>9}\n",
        "", "Avg #Skills", "Avg #Exp"
    ));
    out.push_str(&format!(
        "{:<8} {:>12.2} {:>9.2}\n",
        "Sampled", stats.mean_skills, stats.mean_experiences
    ));
    out.push_str(&format!(
        "{:<8} {:>12.2} {:>9}\n",
        "Removed", stats.mean_removed_skills, "-"
    ));
    out.push('\n');
    out.push_str("Category distribution:\n");
    let total: usize = stats.category_distribution.values().sum();
    for (category, count) in &stats.category_distribution {
        let pct = if total == 0 {
            0.0
        } else {
            *count as f64 * 100.0 / total as f64
        };
        out.push_str(&format!("  {category:<24} {count:>6} ({pct:.1}%)\n"));
    }
    out
}
