//! Turning a triple plan into three documents and back.
//!
//! Two renderers share one output contract: a remote completion endpoint
//! (the paid path) and a deterministic offline template renderer (the free
//! path used for tests and dry runs). Both produce text in the fixed
//! three-block structure that [`parse::parse_triple`] understands, and every
//! accepted triple is verified so that the unmatched resume really omits the
//! removed skills.

pub mod endpoint;
pub mod parse;
pub mod prompt;
pub mod template;

use serde::{Deserialize, Serialize};

use crate::annotation::AnnotationRecord;
use crate::sampling::TripleSpec;

pub use endpoint::{EndpointClient, EndpointConfig, EndpointError, ResponseCache};
pub use parse::{parse_triple, ParseError, ParsedTriple};
pub use prompt::{build_generation_prompt, GenerationPrompt};
pub use template::{render_template, render_triple_text};

/// Block markers, in required order.
pub const BLOCK_MARKERS: [&str; 3] = ["Job-description", "Resume 1", "Resume 2"];

/// Job-description section headers, in canonical order and casing.
pub const JD_SECTIONS: [&str; 5] = [
    "Job title",
    "Job Summary",
    "Required Skills",
    "Required Experience",
    "Responsibilities",
];

/// Resume section headers, in canonical order and casing.
pub const RESUME_SECTIONS: [&str; 4] = ["Personal Information", "Education", "Skills", "Experience"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DocumentKind {
    JobDescription,
    Resume,
}

impl DocumentKind {
    pub fn expected_sections(&self) -> &'static [&'static str] {
        match self {
            DocumentKind::JobDescription => &JD_SECTIONS,
            DocumentKind::Resume => &RESUME_SECTIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub header: String,
    pub body: String,
}

/// One structured document: an ordered list of sections whose header set is
/// fixed by the document kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedDocument {
    pub kind: DocumentKind,
    pub sections: Vec<Section>,
}

impl ParsedDocument {
    /// Body of the named section; header match is case-insensitive and
    /// whitespace-tolerant.
    pub fn section(&self, header: &str) -> Option<&str> {
        let wanted = normalize_header(header);
        self.sections
            .iter()
            .find(|s| normalize_header(&s.header) == wanted)
            .map(|s| s.body.as_str())
    }

    /// The document's full text in block form, headers included.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for section in &self.sections {
            out.push_str("## ");
            out.push_str(&section.header);
            out.push('\n');
            out.push_str(&section.body);
            out.push('\n');
        }
        out
    }
}

/// Lowercased, whitespace-collapsed header used for tolerant matching.
pub(crate) fn normalize_header(raw: &str) -> String {
    raw.trim()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RendererKind {
    Endpoint,
    Template,
}

/// A fully rendered and parsed triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub id: String,
    pub spec: TripleSpec,
    pub annotation: AnnotationRecord,
    pub job_description: ParsedDocument,
    pub resume_matched: ParsedDocument,
    pub resume_unmatched: ParsedDocument,
    pub renderer: RendererKind,
    /// The raw completion, kept only for endpoint-rendered triples.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub raw_text: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("removed skill {skill:?} still present in the unmatched resume's Skills section")]
    RemovedSkillPresent { skill: String },
}

/// Checks the integrity rule every accepted triple must satisfy: no removed
/// skill may survive in the unmatched resume's Skills section. The match is
/// a substring check on normalized text, anchored at word boundaries so
/// that a removed "Java" does not flag a surviving "JavaScript".
pub fn verify_unmatched_skills(
    annotation: &AnnotationRecord,
    parsed: &ParsedTriple,
) -> Result<(), VerifyError> {
    let section = parsed
        .resume_unmatched
        .section("Skills")
        .unwrap_or_default();
    let haystack = crate::metrics::tokens(section);
    for skill in &annotation.perturbation.removed_skills {
        let needle = crate::metrics::tokens(skill);
        if !needle.is_empty() && contains_token_run(&haystack, &needle) {
            return Err(VerifyError::RemovedSkillPresent {
                skill: skill.clone(),
            });
        }
    }
    Ok(())
}

fn contains_token_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}
