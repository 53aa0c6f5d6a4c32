//! Extends a seed graph with new occupations.
//!
//! Each new occupation is matched to its closest counterpart in a reference
//! graph; the counterpart's skill count becomes the generation target `n`.
//! This module builds the skill-generation prompt and merges the resulting
//! skills into the graph; executing the prompt against a language model is
//! the rendering module's job.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphBuilder, GraphError, NodeSource, SkillOccupationGraph};
use crate::rng::Rng;

#[derive(Debug, Error)]
pub enum CurationError {
    #[error("reference graph has no occupations")]
    EmptyReference,
    #[error("occupation title is empty")]
    EmptyTitle,
    #[error("no skills supplied for {title:?}")]
    EmptySkillList { title: String },
    #[error("skill {index} for {title:?} is empty after cleaning")]
    EmptySkill { title: String, index: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Phrase similarity scorer in [0, 1]. Implementations must be symmetric
/// (within 1e-9) and score any non-empty phrase against itself as 1.
pub trait SimilarityProvider {
    fn score(&self, a: &str, b: &str) -> f64;
}

/// Character-trigram cosine similarity over lowercased text. The deterministic
/// fallback when no embedding-based provider is wired in.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrigramCosine;

fn trigrams(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.to_lowercase().chars().collect();
    if chars.len() < 3 {
        if chars.is_empty() {
            return Vec::new();
        }
        return vec![chars.iter().collect()];
    }
    chars.windows(3).map(|w| w.iter().collect()).collect()
}

impl SimilarityProvider for TrigramCosine {
    fn score(&self, a: &str, b: &str) -> f64 {
        let mut counts_a = std::collections::HashMap::new();
        for g in trigrams(a) {
            *counts_a.entry(g).or_insert(0u64) += 1;
        }
        let mut counts_b = std::collections::HashMap::new();
        for g in trigrams(b) {
            *counts_b.entry(g).or_insert(0u64) += 1;
        }
        if counts_a.is_empty() || counts_b.is_empty() {
            return 0.0;
        }
        let dot: u64 = counts_a
            .iter()
            .filter_map(|(g, &ca)| counts_b.get(g).map(|&cb| ca * cb))
            .sum();
        let norm_a: u64 = counts_a.values().map(|&c| c * c).sum();
        let norm_b: u64 = counts_b.values().map(|&c| c * c).sum();
        dot as f64 / ((norm_a as f64).sqrt() * (norm_b as f64).sqrt())
    }
}

/// The resolved matching decision for one new occupation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationPlan {
    pub occupation_title: String,
    /// Closest counterpart in the reference graph; absent when the plan was
    /// drawn from a configured distribution instead.
    pub matched_reference_title: Option<String>,
    pub match_score: Option<f64>,
    /// The number of skills to generate.
    pub target_skill_count: u32,
}

/// Finds the reference occupation whose title maximizes the provider score.
/// Ties break to the lexicographically smallest title; the skill target is
/// the matched occupation's degree (at least 1).
pub fn match_occupation(
    title: &str,
    reference: &SkillOccupationGraph,
    provider: &dyn SimilarityProvider,
) -> Result<CurationPlan, CurationError> {
    let title = title.trim();
    if title.is_empty() {
        return Err(CurationError::EmptyTitle);
    }
    if reference.occupation_count() == 0 {
        return Err(CurationError::EmptyReference);
    }

    let mut best: Option<(f64, usize)> = None;
    for idx in 0..reference.occupation_count() {
        let candidate = &reference.occupation(idx).title;
        let score = provider.score(title, candidate);
        let better = match best {
            None => true,
            Some((best_score, best_idx)) => {
                score > best_score
                    || (score == best_score
                        && candidate < &reference.occupation(best_idx).title)
            }
        };
        if better {
            best = Some((score, idx));
        }
    }
    let (score, idx) = best.expect("non-empty reference");
    Ok(CurationPlan {
        occupation_title: title.to_string(),
        matched_reference_title: Some(reference.occupation(idx).title.clone()),
        match_score: Some(score),
        target_skill_count: reference.occupation_degree(idx).max(1) as u32,
    })
}

/// Skill-count source when no reference graph is available: integers from a
/// clamped normal distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkillCountDistribution {
    pub mean: f64,
    pub std_dev: f64,
    pub min: u32,
    pub max: u32,
}

impl Default for SkillCountDistribution {
    fn default() -> Self {
        // Mean follows the skills-per-occupation average of the curated
        // graph; the clamp keeps targets renderable.
        SkillCountDistribution {
            mean: 8.5,
            std_dev: 3.0,
            min: 3,
            max: 20,
        }
    }
}

impl SkillCountDistribution {
    pub fn sample(&self, rng: &mut Rng) -> u32 {
        let raw = self.mean + self.std_dev * rng.normal();
        let rounded = raw.round();
        let clamped = rounded.clamp(self.min as f64, self.max as f64);
        clamped as u32
    }
}

/// Builds a plan without a reference graph, drawing the skill target from
/// the configured distribution.
pub fn plan_from_distribution(
    title: &str,
    dist: &SkillCountDistribution,
    rng: &mut Rng,
) -> Result<CurationPlan, CurationError> {
    let title = title.trim();
    if title.is_empty() {
        return Err(CurationError::EmptyTitle);
    }
    Ok(CurationPlan {
        occupation_title: title.to_string(),
        matched_reference_title: None,
        match_score: None,
        target_skill_count: dist.sample(rng),
    })
}

/// The skill-generation request for one plan, verbatim.
pub fn build_skill_generation_prompt(plan: &CurationPlan) -> String {
    format!(
        "Generate {} number of required skills necessary for the occupation {}.",
        plan.target_skill_count, plan.occupation_title
    )
}

/// Trims whitespace and trailing punctuation from a generated skill string.
pub fn clean_skill_name(raw: &str) -> String {
    raw.trim()
        .trim_end_matches(['.', ',', ';', ':', '!', '?'])
        .trim()
        .to_string()
}

/// Adds a generated occupation and its skills to the graph.
///
/// The occupation is reused when a title already exists (case-insensitive);
/// skills are reused by case-insensitive name match. Node ids for new nodes
/// are slugs derived from the lowercased text, suffixed on collision.
pub fn merge_generated_skills(
    g: &SkillOccupationGraph,
    title: &str,
    skills: &[String],
) -> Result<SkillOccupationGraph, CurationError> {
    let title = title.trim();
    if title.is_empty() {
        return Err(CurationError::EmptyTitle);
    }
    if skills.is_empty() {
        return Err(CurationError::EmptySkillList {
            title: title.to_string(),
        });
    }

    let mut builder = GraphBuilder::new();
    for occ in g.occupations() {
        builder.add_occupation(&occ.id, &occ.title, occ.source)?;
    }
    for skill in g.skills() {
        builder.add_skill(&skill.id, &skill.name)?;
    }
    for (o, s) in g.edges() {
        builder.add_edge(&g.occupation(o).id, &g.skill(s).id)?;
    }

    let occ_id = match g
        .occupations()
        .iter()
        .find(|occ| occ.title.eq_ignore_ascii_case(title))
    {
        Some(existing) => existing.id.clone(),
        None => {
            let id = unique_id(&slug("occ", title), |candidate| {
                g.occupation_index(candidate).is_some()
            });
            builder.add_occupation(&id, title, NodeSource::BlsGenerated)?;
            id
        }
    };

    let mut new_skill_ids: Vec<String> = Vec::new();
    for (index, raw) in skills.iter().enumerate() {
        let name = clean_skill_name(raw);
        if name.is_empty() {
            return Err(CurationError::EmptySkill {
                title: title.to_string(),
                index,
            });
        }
        let skill_id = match g
            .skills()
            .iter()
            .find(|s| s.name.eq_ignore_ascii_case(&name))
        {
            Some(existing) => existing.id.clone(),
            None => {
                let id = unique_id(&slug("skill", &name), |candidate| {
                    g.skill_index(candidate).is_some()
                        || new_skill_ids.iter().any(|s| s == candidate)
                });
                builder.add_skill(&id, &name)?;
                new_skill_ids.push(id.clone());
                id
            }
        };
        builder.add_edge(&occ_id, &skill_id)?;
    }

    Ok(builder.finish()?)
}

fn slug(prefix: &str, text: &str) -> String {
    let mut out = String::with_capacity(prefix.len() + text.len() + 1);
    out.push_str(prefix);
    out.push(':');
    let mut last_dash = false;
    for ch in text.to_lowercase().chars() {
        if ch.is_alphanumeric() {
            out.push(ch);
            last_dash = false;
        } else if !last_dash && !out.ends_with(':') {
            out.push('-');
            last_dash = true;
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

fn unique_id(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_string();
    }
    for i in 2.. {
        let candidate = format!("{base}-{i}");
        if !taken(&candidate) {
            return candidate;
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EDGE_TSV_HEADER;

    struct ExactMatch;
    impl SimilarityProvider for ExactMatch {
        fn score(&self, a: &str, b: &str) -> f64 {
            if a == b {
                1.0
            } else {
                0.0
            }
        }
    }

    fn reference_graph() -> SkillOccupationGraph {
        let mut tsv = String::from(EDGE_TSV_HEADER);
        tsv.push('\n');
        for i in 0..7 {
            tsv.push_str(&format!("se\tSoftware Engineer\tsk{i}\tSkill {i}\n"));
        }
        for i in 0..4 {
            tsv.push_str(&format!("nu\tNurse\tnk{i}\tNursing skill {i}\n"));
        }
        SkillOccupationGraph::parse_edge_tsv(&tsv).unwrap().graph
    }

    #[test]
    fn exact_title_match_takes_reference_degree() {
        let reference = reference_graph();
        let plan = match_occupation("Software Engineer", &reference, &ExactMatch).unwrap();
        assert_eq!(
            plan.matched_reference_title.as_deref(),
            Some("Software Engineer")
        );
        assert_eq!(plan.target_skill_count, 7);
        assert_eq!(plan.match_score, Some(1.0));
    }

    #[test]
    fn fallback_match_equals_exhaustive_argmax() {
        let titles = [
            "Accountant",
            "Backend Engineer",
            "Chef",
            "Data Analyst",
            "Electrician",
            "Financial Advisor",
            "Graphic Designer",
            "HR Coordinator",
            "IT Support Specialist",
            "Journalist",
            "Kindergarten Teacher",
            "Lab Technician",
            "Mechanical Engineer",
            "Nurse Practitioner",
            "Operations Manager",
            "Paralegal",
            "Quality Inspector",
            "Receptionist",
            "Software Developer",
            "Truck Driver",
        ];
        let mut tsv = String::from(EDGE_TSV_HEADER);
        tsv.push('\n');
        for (i, t) in titles.iter().enumerate() {
            tsv.push_str(&format!("o{i}\t{t}\ts{i}\tSkill {i}\n"));
        }
        let reference = SkillOccupationGraph::parse_edge_tsv(&tsv).unwrap().graph;
        let provider = TrigramCosine;

        let plan = match_occupation("Backend Developer", &reference, &provider).unwrap();

        // Exhaustive scoring oracle with explicit tie-break.
        let mut best_title = None;
        let mut best_score = f64::NEG_INFINITY;
        for t in titles {
            let s = provider.score("Backend Developer", t);
            if s > best_score || (s == best_score && Some(t) < best_title.map(|b: &str| b).as_deref())
            {
                best_score = s;
                best_title = Some(t);
            }
        }
        assert_eq!(plan.matched_reference_title.as_deref(), best_title);
        assert_eq!(plan.match_score, Some(best_score));
    }

    #[test]
    fn matching_many_titles_yields_one_plan_each() {
        let reference = reference_graph();
        let titles: Vec<String> = (0..1112).map(|i| format!("Occupation {i}")).collect();
        let plans: Vec<CurationPlan> = titles
            .iter()
            .map(|t| match_occupation(t, &reference, &TrigramCosine).unwrap())
            .collect();
        assert_eq!(plans.len(), 1112);
    }

    #[test]
    fn empty_reference_rejected() {
        let mut builder = GraphBuilder::new();
        builder.add_skill("s1", "Skill").unwrap();
        let reference = builder.finish().unwrap();
        let err = match_occupation("Nurse", &reference, &TrigramCosine).unwrap_err();
        assert!(matches!(err, CurationError::EmptyReference));
    }

    #[test]
    fn prompt_text_is_exact() {
        let plan = CurationPlan {
            occupation_title: "Nurse".to_string(),
            matched_reference_title: None,
            match_score: None,
            target_skill_count: 7,
        };
        assert_eq!(
            build_skill_generation_prompt(&plan),
            "Generate 7 number of required skills necessary for the occupation Nurse."
        );
        let plan_one = CurationPlan {
            occupation_title: "X".to_string(),
            matched_reference_title: None,
            match_score: None,
            target_skill_count: 1,
        };
        assert_eq!(
            build_skill_generation_prompt(&plan_one),
            "Generate 1 number of required skills necessary for the occupation X."
        );
    }

    #[test]
    fn prompt_round_trips_through_regex() {
        let plan = CurationPlan {
            occupation_title: "Data Scientist".to_string(),
            matched_reference_title: None,
            match_score: None,
            target_skill_count: 12,
        };
        let prompt = build_skill_generation_prompt(&plan);
        let re = regex::Regex::new(
            r"^Generate (\d+) number of required skills necessary for the occupation (.+)\.$",
        )
        .unwrap();
        let caps = re.captures(&prompt).unwrap();
        assert_eq!(caps[1].parse::<u32>().unwrap(), 12);
        assert_eq!(&caps[2], "Data Scientist");
    }

    #[test]
    fn merge_into_empty_graph() {
        let mut builder = GraphBuilder::new();
        builder.add_skill("seed", "Placeholder").unwrap();
        let g = builder.finish().unwrap();
        let merged = merge_generated_skills(
            &g,
            "Nurse",
            &["Empathy".to_string(), "CPR".to_string()],
        )
        .unwrap();
        assert_eq!(merged.occupation_count(), 1);
        assert_eq!(merged.skill_count(), 3); // seed placeholder + 2 new
        assert_eq!(merged.edge_count(), 2);
    }

    #[test]
    fn case_insensitive_skill_reuse() {
        let mut builder = GraphBuilder::new();
        builder
            .add_occupation("o1", "Nurse", NodeSource::User)
            .unwrap();
        builder.add_skill("s1", "Empathy").unwrap();
        builder.add_edge("o1", "s1").unwrap();
        let g = builder.finish().unwrap();

        let merged = merge_generated_skills(&g, "Paramedic", &["EMPATHY".to_string()]).unwrap();
        assert_eq!(merged.skill_count(), 1);
        assert_eq!(merged.occupation_count(), 2);
        assert_eq!(merged.edge_count(), 2);
    }

    #[test]
    fn case_insensitive_occupation_reuse() {
        let mut builder = GraphBuilder::new();
        builder
            .add_occupation("o1", "Nurse", NodeSource::User)
            .unwrap();
        builder.add_skill("s1", "Empathy").unwrap();
        builder.add_edge("o1", "s1").unwrap();
        let g = builder.finish().unwrap();

        let merged = merge_generated_skills(&g, "NURSE", &["Triage".to_string()]).unwrap();
        assert_eq!(merged.occupation_count(), 1);
        assert_eq!(merged.edge_count(), 2);
    }

    #[test]
    fn skill_cleaning_strips_trailing_punctuation() {
        assert_eq!(clean_skill_name("  Empathy. "), "Empathy");
        assert_eq!(clean_skill_name("CPR!!"), "CPR");
        assert_eq!(clean_skill_name("C++"), "C++"); // internal symbols survive
    }

    #[test]
    fn empty_skill_list_rejected() {
        let mut builder = GraphBuilder::new();
        builder.add_skill("s1", "Skill").unwrap();
        let g = builder.finish().unwrap();
        let err = merge_generated_skills(&g, "Nurse", &[]).unwrap_err();
        assert!(matches!(err, CurationError::EmptySkillList { .. }));
    }

    #[test]
    fn merged_plan_counts_match_recount() {
        let mut builder = GraphBuilder::new();
        builder.add_skill("seed", "Placeholder").unwrap();
        let mut g = builder.finish().unwrap();

        let counts = [4u32, 7, 3, 9, 5];
        for (i, &n) in counts.iter().enumerate() {
            let skills: Vec<String> = (0..n)
                .map(|k| format!("Occupation {i} skill {k}"))
                .collect();
            g = merge_generated_skills(&g, &format!("Occupation {i}"), &skills).unwrap();
        }

        // Recount oracle: per-occupation degree equals the plan's count.
        let recount: Vec<u32> = (0..g.occupation_count())
            .map(|o| g.occupation_degree(o) as u32)
            .collect();
        let mut expected = counts.to_vec();
        expected.sort_unstable();
        let mut got = recount.clone();
        got.sort_unstable();
        assert_eq!(got, expected);

        let mean_plan = counts.iter().sum::<u32>() as f64 / counts.len() as f64;
        let mean_graph = recount.iter().sum::<u32>() as f64 / recount.len() as f64;
        assert_eq!(mean_plan, mean_graph);
    }

    #[test]
    fn merge_never_decreases_counts() {
        let mut builder = GraphBuilder::new();
        builder
            .add_occupation("o1", "Nurse", NodeSource::User)
            .unwrap();
        builder.add_skill("s1", "Empathy").unwrap();
        builder.add_edge("o1", "s1").unwrap();
        let g = builder.finish().unwrap();

        let merged =
            merge_generated_skills(&g, "Surgeon", &["Empathy".to_string(), "Suturing".to_string()])
                .unwrap();
        assert!(merged.occupation_count() >= g.occupation_count());
        assert!(merged.skill_count() >= g.skill_count());
        assert!(merged.edge_count() >= g.edge_count());
    }

    #[test]
    fn trigram_provider_satisfies_contract() {
        let provider = TrigramCosine;
        let phrases = [
            "Nurse",
            "Software Engineer",
            "se",
            "Backend Developer",
            "Data Scientist",
        ];
        for a in phrases {
            assert!((provider.score(a, a) - 1.0).abs() < 1e-12, "score({a},{a})");
            for b in phrases {
                let ab = provider.score(a, b);
                let ba = provider.score(b, a);
                assert!((ab - ba).abs() < 1e-9);
                assert!((0.0..=1.0 + 1e-12).contains(&ab));
            }
        }
    }

    #[test]
    fn distribution_sampling_respects_clamp_and_seed() {
        let dist = SkillCountDistribution::default();
        let mut rng = Rng::from_seed(4);
        let samples: Vec<u32> = (0..1000).map(|_| dist.sample(&mut rng)).collect();
        assert!(samples.iter().all(|&s| (3..=20).contains(&s)));
        let mut rng2 = Rng::from_seed(4);
        let samples2: Vec<u32> = (0..1000).map(|_| dist.sample(&mut rng2)).collect();
        assert_eq!(samples, samples2);
        let mean = samples.iter().sum::<u32>() as f64 / samples.len() as f64;
        assert!((mean - 8.5).abs() < 0.5, "mean {mean}");
    }
}
