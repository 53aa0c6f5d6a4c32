//! Deterministic offline renderer.
//!
//! Produces the same three-block structure the endpoint is asked for, with
//! free-text sections (summary, responsibilities, education, identity)
//! filled from fixed phrase pools keyed by a stable hash of the inputs. Two
//! runs over the same plan are byte-identical on any platform.

use crate::annotation::AnnotationRecord;
use crate::sampling::TripleSpec;

use super::parse::parse_triple;
use super::{ParsedTriple, RendererKind, Triple};

/// FNV-1a, used for stable template picks (std's hasher is not specified
/// across releases).
fn fnv1a(text: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in text.bytes() {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn pick<'a>(pool: &[&'a str], key: u64, offset: u64) -> &'a str {
    pool[((key.wrapping_add(offset)) % pool.len() as u64) as usize]
}

const SUMMARY_TEMPLATES: [&str; 6] = [
    "We are looking for a dedicated {title} to join our team. The role centers on {skill} and offers room to grow within a supportive environment.",
    "Our organization seeks an experienced {title}. Day-to-day work relies on {skill} and close collaboration with colleagues across departments.",
    "An opportunity has opened for a {title} who takes pride in quality work. Strong command of {skill} is central to success in this position.",
    "We need a reliable {title} to support our growing operations. The position calls for solid {skill} and a practical, hands-on attitude.",
    "Join us as a {title} and help deliver consistent results for our clients. Applicants should be comfortable applying {skill} every day.",
    "We are hiring a {title} to strengthen our team. The work combines {skill} with steady attention to detail and clear communication.",
];

const RESPONSIBILITY_TEMPLATES: [&str; 6] = [
    "Apply {skill} to day-to-day {title} duties.",
    "Collaborate with team members and report progress clearly.",
    "Maintain accurate records and uphold quality standards.",
    "Use {skill} to resolve routine issues independently.",
    "Support continuous improvement across {title} workflows.",
    "Follow established procedures and safety guidelines.",
];

const DEGREES: [&str; 4] = ["B.S.", "B.A.", "M.S.", "Associate degree"];

const FIELDS: [&str; 8] = [
    "Business Administration",
    "Applied Sciences",
    "Communications",
    "Health Sciences",
    "Engineering",
    "Liberal Arts",
    "Economics",
    "Information Systems",
];

const INSTITUTIONS: [&str; 6] = [
    "State University",
    "City College",
    "Riverside Technical Institute",
    "Northfield Community College",
    "Lakeview University",
    "Harborview Institute",
];

const SURNAMES: [&str; 24] = [
    "Smith", "Johnson", "Garcia", "Kim", "Nguyen", "Patel", "Okafor", "Rossi", "Muller", "Tanaka",
    "Silva", "Kowalski", "Ivanov", "Haddad", "Osei", "Fernandez", "Dubois", "Andersson", "Popescu",
    "Yilmaz", "Chen", "Singh", "Abebe", "Novak",
];

/// Shown when the perturbation drops the only experience; resumes keep a
/// non-empty Experience section so the structure contract still holds.
pub const NO_EXPERIENCE_LINE: &str = "No prior experience.";

fn span_line(title: &str, start: i32, end: i32) -> String {
    format!("{title} ({start}\u{2013}{end})")
}

fn bullets(items: impl IntoIterator<Item = String>) -> String {
    items
        .into_iter()
        .map(|i| format!("- {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

struct Identity {
    full_name: String,
    email: String,
}

fn identity(spec: &TripleSpec) -> Identity {
    let key = fnv1a(&spec.candidate_first_name) ^ fnv1a(&spec.start_title);
    let last = pick(&SURNAMES, key, 0);
    let sanitize = |s: &str| {
        s.chars()
            .filter(|c| c.is_alphanumeric())
            .collect::<String>()
            .to_lowercase()
    };
    Identity {
        full_name: format!("{} {}", spec.candidate_first_name, last),
        email: format!(
            "{}.{}@example.com",
            sanitize(&spec.candidate_first_name),
            sanitize(last)
        ),
    }
}

fn job_description_text(spec: &TripleSpec) -> String {
    let key = fnv1a(&spec.start_title);
    let first_skill = spec.skills.first().map(String::as_str).unwrap_or("the role");
    let summary = pick(&SUMMARY_TEMPLATES, key, 0)
        .replace("{title}", &spec.start_title)
        .replace("{skill}", first_skill);

    let required_experience = spec
        .experiences
        .iter()
        .zip(&spec.jd_experience_years)
        .map(|(e, &y)| format!("{y}+ years as {}", e.title))
        .collect::<Vec<_>>()
        .join("\n");

    let responsibilities = bullets((0..3).map(|i| {
        let skill = &spec.skills[i % spec.skills.len()];
        pick(&RESPONSIBILITY_TEMPLATES, key, i as u64)
            .replace("{title}", &spec.start_title)
            .replace("{skill}", skill)
    }));

    format!(
        "## Job title\n{title}\n## Job Summary\n{summary}\n## Required Skills\n{skills}\n## Required Experience\n{required_experience}\n## Responsibilities\n{responsibilities}\n",
        title = spec.start_title,
        skills = bullets(spec.skills.iter().cloned()),
    )
}

fn education_text(spec: &TripleSpec) -> String {
    let key = fnv1a(&spec.start_title) ^ fnv1a(&spec.candidate_first_name);
    let graduation = spec
        .experiences
        .first()
        .map(|e| e.start_year - 1)
        .unwrap_or(2014);
    format!(
        "{} in {}, {}, graduated {}",
        pick(&DEGREES, key, 1),
        pick(&FIELDS, key, 2),
        pick(&INSTITUTIONS, key, 3),
        graduation
    )
}

fn resume_text(spec: &TripleSpec, annotation: &AnnotationRecord, unmatched: bool) -> String {
    let who = identity(spec);
    let personal = format!("{}\nEmail: {}", who.full_name, who.email);
    let education = education_text(spec);

    let skills: Vec<String> = if unmatched {
        spec.skills
            .iter()
            .filter(|s| !annotation.perturbation.removed_skills.contains(s))
            .cloned()
            .collect()
    } else {
        spec.skills.clone()
    };

    let mut lines: Vec<String> = Vec::new();
    let last_index = spec.experiences.len() - 1;
    for (i, e) in spec.experiences.iter().enumerate() {
        if unmatched && i == last_index {
            let p = &annotation.perturbation;
            if p.last_experience_dropped {
                continue;
            }
            // the shortened span keeps its end at the last-active year
            let new_start = e.end_year - p.last_experience_new_duration as i32;
            lines.push(span_line(&e.title, new_start, e.end_year));
        } else {
            lines.push(span_line(&e.title, e.start_year, e.end_year));
        }
    }
    if lines.is_empty() {
        lines.push(NO_EXPERIENCE_LINE.to_string());
    }

    format!(
        "## Personal Information\n{personal}\n## Education\n{education}\n## Skills\n{skills}\n## Experience\n{experience}\n",
        skills = bullets(skills),
        experience = lines.join("\n"),
    )
}

/// The complete three-block document text for a plan.
pub fn render_triple_text(spec: &TripleSpec, annotation: &AnnotationRecord) -> String {
    format!(
        "###### Job-description\n\n{jd}\n###### Resume 1\n\n{matched}\n###### Resume 2\n\n{unmatched}",
        jd = job_description_text(spec),
        matched = resume_text(spec, annotation, false),
        unmatched = resume_text(spec, annotation, true),
    )
}

/// Renders a plan offline and parses the result into a [`Triple`].
/// Rendering always produces parseable structure, so this cannot fail.
pub fn render_template(id: &str, spec: &TripleSpec, annotation: &AnnotationRecord) -> Triple {
    let text = render_triple_text(spec, annotation);
    let ParsedTriple {
        job_description,
        resume_matched,
        resume_unmatched,
    } = parse_triple(&text).expect("template output always parses");
    Triple {
        id: id.to_string(),
        spec: spec.clone(),
        annotation: annotation.clone(),
        job_description,
        resume_matched,
        resume_unmatched,
        renderer: RendererKind::Template,
        raw_text: None,
    }
}
