//! Automated quality scoring of generated documents.
//!
//! Judge prompts ask for a 1-5 consistency or factuality score given the
//! required skills, required experience, and the document body. The resume
//! variants are the job-description prompts with the document-kind wording
//! swapped. Replies are reduced to the integer score; integer extraction
//! stands in for token-probability weighting, which a completion-only
//! endpoint cannot provide.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rendering::DocumentKind;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QualityError {
    #[error("no standalone integer in 1..=5 found in reply {reply:?}")]
    UnparseableScore { reply: String },
    #[error("no scores to aggregate")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Consistency,
    Factuality,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::Consistency => write!(f, "consistency"),
            Criterion::Factuality => write!(f, "factuality"),
        }
    }
}

const CONSISTENCY_PROMPT: &str = "\
# Instruction:
As a hiring manager, your task is to evaluate job descriptions on a scale of 1-5. This scale represents the consistency of the job description, with 1 being completely inconsistent and 5 being fully consistent. Your evaluation should consider the alignment of job responsibilities, required skills, qualifications, and the overall tone of the job description, as well as the consistency between different sections of the job description. Please ensure you fully understand these instructions before proceeding.

# Evaluation Criteria:
1. Completely Inconsistent: The job responsibilities, required skills, qualifications, and overall tone of the job description are not aligned. The description is confusing and does not provide a clear understanding of the job. Additionally, there are significant inconsistencies between different sections of the job description, making it confusing and unclear.
2. Mostly Inconsistent: There are some elements of the job description that align, but there are significant inconsistencies between different sections that make the description unclear.
3. Somewhat Consistent: The job description has a fair amount of alignment between the responsibilities, skills, and qualifications, as well as between different sections, but there are areas that could be improved for clarity.
4. Mostly Consistent: The job description is mostly aligned, both within sections and between different sections, with only minor inconsistencies. The description provides a clear understanding of the job.
5. Fully Consistent: The job responsibilities, required skills, qualifications, and overall tone of the job description are perfectly aligned. Additionally, there is a high level of consistency between different sections, resulting in a clear and comprehensive understanding of the job.

# Evaluation Steps:
1. Carefully read the entire job description, focusing on the alignment between the job responsibilities, required skills, qualifications, and the overall tone of the description.
2. Evaluate the overall consistency of the job description based on the provided criteria.
3. Assign a consistency score ranging from 1 to 5, using the Evaluation Criteria as a guide.

# Required Skills:
{skills}

# Required Experience:
{experience}

# Job Description:
{document}

# Evaluation Form (scores ONLY):";

const FACTUALITY_PROMPT: &str = "\
# Instruction:
As a hiring manager, your task is to evaluate job descriptions on a scale of 1-5. This scale represents the factuality of the job description, with 1 being completely false and 5 being completely true. Your evaluation should consider the accuracy of the job responsibilities, required skills, qualifications, and the overall representation of the job role. Please ensure you fully understand these instructions before proceeding.

# Evaluation Criteria:
1. Completely False: The job description does not match the job title at all. The responsibilities, required skills, and qualifications are misleading or incorrect.
2. Mostly False: The job description has some elements of truth but contains significant inaccuracies or exaggerations in the responsibilities, required skills, or qualifications.
3. Somewhat True: The job description is partially accurate. Some responsibilities, required skills, or qualifications may be overstated or understated.
4. Mostly True: The job description is largely accurate, with minor discrepancies in the responsibilities, required skills, or qualifications.
5. Completely True: The job description accurately represents the job title, responsibilities, required skills, and qualifications without any exaggeration or understatement.

# Evaluation Steps:
1. Carefully read the entire job description, focusing on the job title, responsibilities, required skills, and qualifications.
2. Evaluate the overall factuality of the job description based on the provided criteria.
3. Assign a factuality score ranging from 1 to 5, using the Evaluation Criteria as a guide.

# Required Skills:
{skills}

# Required Experience:
{experience}

# Job Description:
{document}

# Evaluation Form (scores ONLY):";

/// Swaps the document-kind wording for resume judging. Only the exact
/// phrase changes; "job responsibilities", "job title", and "job role" are
/// different phrases and stay as they are.
fn swap_to_resume(text: &str) -> String {
    text.replace("Job Description", "Resume")
        .replace("job descriptions", "resumes")
        .replace("job description", "resume")
}

/// Builds the judge prompt for one document. `skills` and `experience` are
/// the pre-rendered requirement blocks the document was generated from.
pub fn build_geval_prompt(
    criterion: Criterion,
    skills: &str,
    experience: &str,
    document: &str,
    kind: DocumentKind,
) -> String {
    let base = match criterion {
        Criterion::Consistency => CONSISTENCY_PROMPT,
        Criterion::Factuality => FACTUALITY_PROMPT,
    };
    let body = match kind {
        DocumentKind::JobDescription => base.to_string(),
        DocumentKind::Resume => swap_to_resume(base),
    };
    body.replace("{skills}", skills)
        .replace("{experience}", experience)
        .replace("{document}", document)
}

/// Extracts the first standalone integer in 1..=5 from a judge reply.
/// Tokens are whitespace-split and stripped of surrounding punctuation.
pub fn parse_score(reply: &str) -> Result<u8, QualityError> {
    for token in reply.split_whitespace() {
        let token = token.trim_matches(|c: char| !c.is_ascii_digit());
        if token.is_empty() || token.len() > 1 {
            continue;
        }
        if let Ok(n) = token.parse::<u8>() {
            if (1..=5).contains(&n) {
                return Ok(n);
            }
        }
    }
    Err(QualityError::UnparseableScore {
        reply: reply.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityScore {
    pub criterion: Criterion,
    pub score: u8,
    pub document_id: String,
    pub judge_model: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionSummary {
    pub criterion: Criterion,
    pub mean: f64,
    /// Population standard deviation.
    pub std_dev: f64,
    pub count: usize,
}

/// Groups scores by criterion and reduces each group to mean, standard
/// deviation, and count. Scores are validated at parse time, so anything
/// outside 1..=5 cannot reach this point.
pub fn aggregate_scores(scores: &[QualityScore]) -> Result<Vec<CriterionSummary>, QualityError> {
    if scores.is_empty() {
        return Err(QualityError::EmptyInput);
    }
    let mut groups: BTreeMap<Criterion, Vec<f64>> = BTreeMap::new();
    for score in scores {
        debug_assert!((1..=5).contains(&score.score));
        groups
            .entry(score.criterion)
            .or_default()
            .push(score.score as f64);
    }
    Ok(groups
        .into_iter()
        .map(|(criterion, values)| {
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            CriterionSummary {
                criterion,
                mean,
                std_dev: variance.sqrt(),
                count: values.len(),
            }
        })
        .collect())
}

/// Plain-text summary table.
pub fn format_report(summaries: &[CriterionSummary]) -> String {
    let mut out = format!("{:<14} {:>8} {:>8} {:>8}\n", "Criterion", "Mean", "Std", "N");
    for s in summaries {
        out.push_str(&format!(
            "{:<14} {:>8.2} {:>8.2} {:>8}\n",
            s.criterion.to_string(),
            s.mean,
            s.std_dev,
            s.count
        ));
    }
    out
}
