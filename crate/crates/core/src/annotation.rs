//! Candidate identity and the counterfactual perturbation.
//!
//! Each triple gets a first name drawn so that genders stay balanced within
//! every cluster, plus a perturbation record describing how the unmatched
//! resume differs from the matched one: removed skills and a shortened (or
//! dropped) last experience. The perturbation doubles as the ground truth
//! for the explanation and editing tasks.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Rng;
use crate::sampling::TripleSpec;

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("name pool is empty")]
    EmptyPool,
    #[error("cannot read name file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("need at least 2 skills to perturb, found {found}")]
    TooFewSkills { found: usize },
    #[error("spec has no experiences to perturb")]
    NoExperiences,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
}

/// First-name pools, one per gender. The bundled lists are drawn from
/// popular given names across many language communities so that uniform
/// sampling yields diverse candidates; any substitute file with one name per
/// line works.
#[derive(Debug, Clone)]
pub struct NamePool {
    female: Vec<String>,
    male: Vec<String>,
}

impl NamePool {
    pub fn builtin() -> Self {
        NamePool::from_lists(
            include_str!("../data/first_names_female.txt"),
            include_str!("../data/first_names_male.txt"),
        )
        .expect("bundled name lists are non-empty")
    }

    pub fn from_files(female: &Path, male: &Path) -> Result<Self, AnnotationError> {
        let read = |path: &Path| {
            std::fs::read_to_string(path).map_err(|source| AnnotationError::Io {
                path: path.display().to_string(),
                source,
            })
        };
        NamePool::from_lists(&read(female)?, &read(male)?)
    }

    /// One name per line; blank lines skipped, duplicates dropped keeping
    /// first occurrence.
    pub fn from_lists(female: &str, male: &str) -> Result<Self, AnnotationError> {
        let parse = |text: &str| {
            let mut seen = std::collections::HashSet::new();
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .filter(|l| seen.insert(l.to_lowercase()))
                .map(str::to_string)
                .collect::<Vec<_>>()
        };
        let pool = NamePool {
            female: parse(female),
            male: parse(male),
        };
        if pool.female.is_empty() || pool.male.is_empty() {
            return Err(AnnotationError::EmptyPool);
        }
        Ok(pool)
    }

    pub fn names(&self, gender: Gender) -> &[String] {
        match gender {
            Gender::Female => &self.female,
            Gender::Male => &self.male,
        }
    }
}

/// Per-cluster gender counters. The counter difference within a cluster
/// never exceeds one: when counts are equal the gender is a coin flip,
/// otherwise the lagging gender is forced.
#[derive(Debug, Default, Clone)]
pub struct GenderBalancer {
    counts: HashMap<u32, (u64, u64)>,
}

impl GenderBalancer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counts(&self, cluster_id: u32) -> (u64, u64) {
        self.counts.get(&cluster_id).copied().unwrap_or((0, 0))
    }

    fn choose(&mut self, cluster_id: u32, rng: &mut Rng) -> Gender {
        let entry = self.counts.entry(cluster_id).or_insert((0, 0));
        let gender = match entry.0.cmp(&entry.1) {
            std::cmp::Ordering::Less => Gender::Female,
            std::cmp::Ordering::Greater => Gender::Male,
            std::cmp::Ordering::Equal => {
                if rng.coin() {
                    Gender::Female
                } else {
                    Gender::Male
                }
            }
        };
        match gender {
            Gender::Female => entry.0 += 1,
            Gender::Male => entry.1 += 1,
        }
        gender
    }
}

/// Draws a candidate name for a triple in `cluster_id`. Gender first (kept
/// balanced per cluster), then a uniform name from that gender's pool.
pub fn assign_name(
    pool: &NamePool,
    balancer: &mut GenderBalancer,
    cluster_id: u32,
    rng: &mut Rng,
) -> (String, Gender) {
    let gender = balancer.choose(cluster_id, rng);
    let names = pool.names(gender);
    (names[rng.index(names.len())].clone(), gender)
}

/// What the unmatched resume loses relative to the matched one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perturbation {
    pub removed_skills: Vec<String>,
    pub last_experience_reduction_years: u8,
    pub last_experience_new_duration: u8,
    pub last_experience_dropped: bool,
}

pub const MAX_REMOVED_SKILLS: usize = 5;

/// Draws the perturbation for a spec. The removal count is uniform on
/// [1, min(5, |skills|-1)] so at least one skill always survives; the
/// removed set is uniform without replacement; the last experience loses a
/// uniform number of its years and is dropped entirely when nothing is
/// left. Draw order: count, removed set, reduction.
pub fn perturb(spec: &TripleSpec, rng: &mut Rng) -> Result<Perturbation, AnnotationError> {
    let n = spec.skills.len();
    if n < 2 {
        return Err(AnnotationError::TooFewSkills { found: n });
    }
    let last = spec
        .experiences
        .last()
        .ok_or(AnnotationError::NoExperiences)?;

    let max_remove = MAX_REMOVED_SKILLS.min(n - 1);
    let count = 1 + rng.below(max_remove as u64) as usize;
    let removed_skills: Vec<String> = rng
        .sample_indices(n, count)
        .into_iter()
        .map(|i| spec.skills[i].clone())
        .collect();

    let d_last = last.duration_years;
    let reduction = 1 + rng.below(d_last as u64) as u8;
    let new_duration = d_last - reduction;

    Ok(Perturbation {
        removed_skills,
        last_experience_reduction_years: reduction,
        last_experience_new_duration: new_duration,
        last_experience_dropped: new_duration == 0,
    })
}

/// Renders the last-experience change as one human-readable item; the same
/// text feeds the generation prompt, the explanation targets, and the
/// editing signal.
pub fn last_experience_item(title: &str, perturbation: &Perturbation) -> String {
    if perturbation.last_experience_dropped {
        format!("last experience '{title}' removed")
    } else {
        format!(
            "last experience '{title}' reduced by {} year(s)",
            perturbation.last_experience_reduction_years
        )
    }
}

/// The full annotation for one triple: seed content, perturbation, identity,
/// and the explanation item lists for both polarities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub skills: Vec<String>,
    pub experiences: Vec<crate::sampling::ExperienceSpan>,
    pub perturbation: Perturbation,
    pub candidate_name: String,
    pub candidate_gender: Gender,
    /// Seed skills followed by experience titles.
    pub explanation_positive: Vec<String>,
    /// One item per removed skill plus the last-experience change.
    pub explanation_negative: Vec<String>,
}

pub fn build_annotation(
    spec: &TripleSpec,
    perturbation: &Perturbation,
    name: &str,
    gender: Gender,
) -> AnnotationRecord {
    let explanation_positive: Vec<String> = spec
        .skills
        .iter()
        .cloned()
        .chain(spec.experiences.iter().map(|e| e.title.clone()))
        .collect();

    let last_title = spec
        .experiences
        .last()
        .map(|e| e.title.as_str())
        .unwrap_or_default();
    let explanation_negative: Vec<String> = perturbation
        .removed_skills
        .iter()
        .map(|s| format!("removed skill: {s}"))
        .chain(std::iter::once(last_experience_item(last_title, perturbation)))
        .collect();

    AnnotationRecord {
        skills: spec.skills.clone(),
        experiences: spec.experiences.clone(),
        perturbation: perturbation.clone(),
        candidate_name: name.to_string(),
        candidate_gender: gender,
        explanation_positive,
        explanation_negative,
    }
}
