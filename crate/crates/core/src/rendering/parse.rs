//! Parsing rendered text back into structured documents.
//!
//! The expected shape is three `######` blocks (job description, matched
//! resume, unmatched resume), each split into `##` sections. Header matching
//! is case-insensitive and whitespace-tolerant; everything else about the
//! structure is enforced, and errors name the first violated expectation.

use thiserror::Error;

use super::{
    normalize_header, DocumentKind, ParsedDocument, Section, BLOCK_MARKERS,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("no '######' block markers found")]
    NoBlocks,
    #[error("missing block {name:?}")]
    MissingBlock { name: String },
    #[error("unexpected block {found:?} at position {position}")]
    ExtraBlock { found: String, position: usize },
    #[error("missing section {header:?} in {block}")]
    MissingSection { block: String, header: String },
    #[error("empty section {header:?} in {block}")]
    EmptySection { block: String, header: String },
    #[error("duplicate section {header:?} in {block}")]
    DuplicateSection { block: String, header: String },
    #[error("unexpected section {header:?} in {block}")]
    UnexpectedSection { block: String, header: String },
}

/// The three documents recovered from one completion.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTriple {
    pub job_description: ParsedDocument,
    pub resume_matched: ParsedDocument,
    pub resume_unmatched: ParsedDocument,
}

/// Human-facing block labels used in error messages, aligned with
/// [`BLOCK_MARKERS`].
const BLOCK_LABELS: [&str; 3] = ["job-description", "resume-1", "resume-2"];

/// Splits a completion into its three documents.
///
/// Text before the first marker (echoed prompts, "output:" preambles) is
/// ignored; blocks must then appear in the fixed order. Within a block,
/// stray text before the first section header is tolerated, section headers
/// are matched tolerantly, and each expected section must appear exactly
/// once with a non-empty body.
pub fn parse_triple(raw: &str) -> Result<ParsedTriple, ParseError> {
    let blocks = split_blocks(raw)?;

    let mut iter = blocks.into_iter();
    let mut take_block = |position: usize| -> Result<(String, String), ParseError> {
        let expected = BLOCK_MARKERS[position];
        match iter.next() {
            Some((name, body)) => {
                if normalize_header(&name) == normalize_header(expected) {
                    Ok((name, body))
                } else {
                    Err(first_block_error(&name, position))
                }
            }
            None => Err(ParseError::MissingBlock {
                name: expected.to_string(),
            }),
        }
    };

    let (_, jd_body) = take_block(0)?;
    let (_, matched_body) = take_block(1)?;
    let (_, unmatched_body) = take_block(2)?;
    if let Some((name, _)) = iter.next() {
        return Err(ParseError::ExtraBlock {
            found: name,
            position: 3,
        });
    }

    Ok(ParsedTriple {
        job_description: parse_document(
            &jd_body,
            DocumentKind::JobDescription,
            BLOCK_LABELS[0],
        )?,
        resume_matched: parse_document(&matched_body, DocumentKind::Resume, BLOCK_LABELS[1])?,
        resume_unmatched: parse_document(&unmatched_body, DocumentKind::Resume, BLOCK_LABELS[2])?,
    })
}

/// Distinguishes a reordered known marker (missing-block at this position)
/// from an unknown one (extra-block).
fn first_block_error(found: &str, position: usize) -> ParseError {
    let known = BLOCK_MARKERS
        .iter()
        .any(|m| normalize_header(m) == normalize_header(found));
    if known {
        ParseError::MissingBlock {
            name: BLOCK_MARKERS[position].to_string(),
        }
    } else {
        ParseError::ExtraBlock {
            found: found.to_string(),
            position,
        }
    }
}

fn split_blocks(raw: &str) -> Result<Vec<(String, String)>, ParseError> {
    let mut blocks: Vec<(String, String)> = Vec::new();
    let mut current: Option<(String, String)> = None;
    for line in raw.lines() {
        let trimmed = line.trim_start();
        if trimmed.starts_with("######") {
            if let Some(block) = current.take() {
                blocks.push(block);
            }
            let name = trimmed.trim_start_matches('#').trim().to_string();
            current = Some((name, String::new()));
        } else if let Some((_, body)) = current.as_mut() {
            body.push_str(line);
            body.push('\n');
        }
        // text before the first marker is dropped
    }
    if let Some(block) = current.take() {
        blocks.push(block);
    }
    if blocks.is_empty() {
        return Err(ParseError::NoBlocks);
    }
    Ok(blocks)
}

fn parse_document(
    body: &str,
    kind: DocumentKind,
    block_label: &str,
) -> Result<ParsedDocument, ParseError> {
    let mut sections: Vec<Section> = Vec::new();
    let mut current: Option<Section> = None;
    for line in body.lines() {
        let trimmed = line.trim_start();
        if trimmed.starts_with("##") && !trimmed.starts_with("###") {
            if let Some(section) = current.take() {
                sections.push(section);
            }
            current = Some(Section {
                header: trimmed.trim_start_matches('#').trim().to_string(),
                body: String::new(),
            });
        } else if let Some(section) = current.as_mut() {
            section.body.push_str(line);
            section.body.push('\n');
        }
    }
    if let Some(section) = current.take() {
        sections.push(section);
    }

    // Trim surrounding blank lines; internal whitespace is preserved.
    for section in &mut sections {
        section.body = trim_blank_lines(&section.body);
    }

    let expected = kind.expected_sections();
    let mut canonical: Vec<Option<Section>> = vec![None; expected.len()];
    for section in sections {
        let normalized = normalize_header(&section.header);
        match expected
            .iter()
            .position(|e| normalize_header(e) == normalized)
        {
            Some(slot) => {
                if canonical[slot].is_some() {
                    return Err(ParseError::DuplicateSection {
                        block: block_label.to_string(),
                        header: expected[slot].to_string(),
                    });
                }
                canonical[slot] = Some(Section {
                    // store the canonical casing, keep the parsed body
                    header: expected[slot].to_string(),
                    body: section.body,
                });
            }
            None => {
                return Err(ParseError::UnexpectedSection {
                    block: block_label.to_string(),
                    header: section.header,
                })
            }
        }
    }

    let mut out = Vec::with_capacity(expected.len());
    for (slot, section) in canonical.into_iter().enumerate() {
        match section {
            Some(section) => {
                if section.body.trim().is_empty() {
                    return Err(ParseError::EmptySection {
                        block: block_label.to_string(),
                        header: expected[slot].to_string(),
                    });
                }
                out.push(section);
            }
            None => {
                return Err(ParseError::MissingSection {
                    block: block_label.to_string(),
                    header: expected[slot].to_string(),
                })
            }
        }
    }

    Ok(ParsedDocument {
        kind,
        sections: out,
    })
}

fn trim_blank_lines(text: &str) -> String {
    let lines: Vec<&str> = text.lines().collect();
    let start = lines
        .iter()
        .position(|l| !l.trim().is_empty())
        .unwrap_or(lines.len());
    let end = lines
        .iter()
        .rposition(|l| !l.trim().is_empty())
        .map(|i| i + 1)
        .unwrap_or(start);
    lines[start..end].join("\n")
}
