//! The document-generation prompt.

use crate::annotation::{last_experience_item, AnnotationRecord};
use crate::sampling::{ExperienceSpan, TripleSpec};

use super::BLOCK_MARKERS;

/// The fully substituted generation request. Construction checks that each
/// block marker appears exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationPrompt {
    text: String,
}

impl GenerationPrompt {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn into_text(self) -> String {
        self.text
    }
}

pub fn skill_list(skills: &[String]) -> String {
    skills.join(", ")
}

pub fn years_phrase(years: u8) -> String {
    if years == 1 {
        "1 year".to_string()
    } else {
        format!("{years} years")
    }
}

/// Experiences as the job description sees them: title plus required years.
pub fn jd_experience_list(experiences: &[ExperienceSpan], jd_years: &[u8]) -> String {
    experiences
        .iter()
        .zip(jd_years)
        .map(|(e, &y)| format!("{} ({})", e.title, years_phrase(y)))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Experiences as the resume sees them: title plus year span.
pub fn resume_experience_list(experiences: &[ExperienceSpan]) -> String {
    experiences
        .iter()
        .map(|e| format!("{} ({}\u{2013}{})", e.title, e.start_year, e.end_year))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Builds the one-shot generation prompt for a triple: job description,
/// matching resume, and the perturbed copy, all in one completion.
pub fn build_generation_prompt(spec: &TripleSpec, annotation: &AnnotationRecord) -> GenerationPrompt {
    let skills = skill_list(&spec.skills);
    let jd_exp = jd_experience_list(&spec.experiences, &spec.jd_experience_years);
    let resume_exp = resume_experience_list(&spec.experiences);
    let removed = skill_list(&annotation.perturbation.removed_skills);
    let last_title = spec
        .experiences
        .last()
        .map(|e| e.title.as_str())
        .unwrap_or_default();
    let modification = last_experience_item(last_title, &annotation.perturbation);

    let text = format!(
        "Write a job description for a \"{title}\" job which require only skill set of \"{skills}\" \
and only previous job experience of \"{jd_exp}\" and a matching resume for a candidate with the \
name of \"{name}\" and having only skill set of \"{skills}\" and only previous job experience of \
\"{resume_exp}\". Then generate exactly the same resume (keeping everything the same) but \
excluding skill set of \"{removed}\" and \"{modification}\". Don't include any extra skills and \
experience. But generate extra details about provided skills and job experience. The job \
description should only contain Job Title, Job Summary, Required Skills, and Responsibilities \
sections (only include few responsibilities). Resumes should only contain Personal Information \
(containing the provided first name and a matching generated last name and email), Education, \
Skills, and Experience sections.
The generated output should exactly be according the following structure:

###### Job-description

## Job title
.....
## Job Summary
.....
## Required Skills
.....
## Required Experience
.....
## Responsibilities
.....

###### Resume 1

## Personal Information
.....
## Education
.....
## Skills
.....
## Experience
.....

###### Resume 2

## Personal Information
.....
## Education
.....
## Skills
.....
## Experience
.....

output:",
        title = spec.start_title,
        name = spec.candidate_first_name,
    );

    for marker in BLOCK_MARKERS {
        debug_assert_eq!(
            text.matches(&format!("###### {marker}")).count(),
            1,
            "marker {marker} must appear exactly once"
        );
    }

    GenerationPrompt { text }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{build_annotation, Gender, Perturbation};
    use crate::sampling::{SamplingTargets, TargetSource};

    fn sample_spec(skills: &[&str]) -> (TripleSpec, AnnotationRecord) {
        let spec = TripleSpec {
            cluster_id: 3,
            start_occupation_id: "o9".to_string(),
            start_title: "Senior Nurse".to_string(),
            skills: skills.iter().map(|s| s.to_string()).collect(),
            experiences: vec![
                ExperienceSpan {
                    occupation_id: "o1".to_string(),
                    title: "Nurse".to_string(),
                    start_year: 2015,
                    end_year: 2018,
                    duration_years: 3,
                },
                ExperienceSpan {
                    occupation_id: "o9".to_string(),
                    title: "Senior Nurse".to_string(),
                    start_year: 2018,
                    end_year: 2022,
                    duration_years: 4,
                },
            ],
            jd_experience_years: vec![2, 1],
            candidate_first_name: "Amara".to_string(),
            candidate_gender: Gender::Female,
            rng_seed: 7,
            targets: SamplingTargets {
                experience_count: 2,
                skill_count: skills.len() as u32,
                source: TargetSource::Fallback,
            },
            shortfall: None,
        };
        let perturbation = Perturbation {
            removed_skills: vec![skills[0].to_string()],
            last_experience_reduction_years: 2,
            last_experience_new_duration: 2,
            last_experience_dropped: false,
        };
        let annotation = build_annotation(&spec, &perturbation, "Amara", Gender::Female);
        (spec, annotation)
    }

    #[test]
    fn markers_appear_exactly_once() {
        let (spec, annotation) = sample_spec(&["Empathy", "Triage", "CPR"]);
        let prompt = build_generation_prompt(&spec, &annotation);
        for marker in BLOCK_MARKERS {
            assert_eq!(
                prompt.text().matches(&format!("###### {marker}")).count(),
                1,
                "{marker}"
            );
        }
    }

    #[test]
    fn single_skill_list_has_no_separator() {
        let (spec, annotation) = sample_spec(&["X"]);
        let prompt = build_generation_prompt(&spec, &annotation);
        assert!(prompt.text().contains("only skill set of \"X\""));
        assert!(!prompt.text().contains("X,"));
    }

    #[test]
    fn regex_oracle_recovers_every_substituted_field() {
        let (spec, annotation) = sample_spec(&["Empathy", "Triage", "CPR"]);
        let prompt = build_generation_prompt(&spec, &annotation);
        let re = regex::Regex::new(
            r#"(?s)^Write a job description for a "([^"]+)" job which require only skill set of "([^"]+)" and only previous job experience of "([^"]+)" and a matching resume for a candidate with the name of "([^"]+)" and having only skill set of "([^"]+)" and only previous job experience of "([^"]+)"\. Then generate exactly the same resume \(keeping everything the same\) but excluding skill set of "([^"]+)" and "([^"]+)"\."#,
        )
        .unwrap();
        let caps = re.captures(prompt.text()).expect("prompt matches oracle");
        assert_eq!(&caps[1], "Senior Nurse");
        assert_eq!(&caps[2], "Empathy, Triage, CPR");
        assert_eq!(&caps[3], "Nurse (2 years), Senior Nurse (1 year)");
        assert_eq!(&caps[4], "Amara");
        assert_eq!(&caps[5], "Empathy, Triage, CPR");
        assert_eq!(&caps[6], "Nurse (2015\u{2013}2018), Senior Nurse (2018\u{2013}2022)");
        assert_eq!(&caps[7], "Empathy");
        assert_eq!(&caps[8], "last experience 'Senior Nurse' reduced by 2 year(s)");
    }

    #[test]
    fn dropped_experience_phrase_is_substituted() {
        let (spec, _) = sample_spec(&["A", "B"]);
        let perturbation = Perturbation {
            removed_skills: vec!["A".to_string()],
            last_experience_reduction_years: 4,
            last_experience_new_duration: 0,
            last_experience_dropped: true,
        };
        let annotation = build_annotation(&spec, &perturbation, "Amara", Gender::Female);
        let prompt = build_generation_prompt(&spec, &annotation);
        assert!(prompt
            .text()
            .contains("\"last experience 'Senior Nurse' removed\""));
    }
}
