//! Skill-occupation graph tooling and deterministic generation of
//! job-description / resume training triples.
//!
//! The pipeline runs in stages: ingest or curate a bipartite
//! skill-occupation graph, cluster its occupations, sample subgraphs into
//! symbolic triple plans, render the plans into documents (offline templates
//! or a completion endpoint), assess document quality, export per-task
//! datasets, and evaluate model predictions against them.

pub mod annotation;
pub mod clustering;
pub mod curation;
pub mod graph;
pub mod metrics;
pub mod pipeline;
pub mod quality;
pub mod rendering;
pub mod rng;
pub mod sampling;
pub mod tasks;

#[cfg(test)]
pub(crate) mod testutil {
    use crate::annotation::{build_annotation, perturb, AnnotationRecord, Gender};
    use crate::graph::{GraphBuilder, NodeSource, SkillOccupationGraph};
    use crate::rng::Rng;
    use crate::sampling::{SamplingTargets, TargetSource, TripleSpec};

    /// Random bipartite graph with exactly `edges` distinct edges.
    pub fn random_graph(occ: usize, skills: usize, edges: usize, seed: u64) -> SkillOccupationGraph {
        let mut rng = Rng::from_seed(seed);
        let mut builder = GraphBuilder::new();
        for i in 0..occ {
            builder
                .add_occupation(&format!("o{i:03}"), &format!("Occupation {i}"), NodeSource::User)
                .unwrap();
        }
        for i in 0..skills {
            builder
                .add_skill(&format!("s{i:03}"), &format!("Skill {i}"))
                .unwrap();
        }
        let mut added = std::collections::HashSet::new();
        while added.len() < edges {
            let o = rng.index(occ);
            let s = rng.index(skills);
            if added.insert((o, s)) {
                builder
                    .add_edge(&format!("o{o:03}"), &format!("s{s:03}"))
                    .unwrap();
            }
        }
        builder.finish().unwrap()
    }

    /// Random but internally consistent triple plan, for renderer and export
    /// tests that do not need a real graph behind the plan.
    pub fn random_plan(seed: u64) -> (TripleSpec, AnnotationRecord) {
        let mut rng = Rng::from_seed(seed);
        let n_skills = 2 + rng.index(8);
        let n_exp = 1 + rng.index(5);
        let skills: Vec<String> = (0..n_skills).map(|i| format!("Skill {seed}-{i}")).collect();
        let titles = ["Nurse", "Engineer", "Clerk", "Analyst", "Technician"];
        let ordered: Vec<(String, String)> = (0..n_exp)
            .map(|i| {
                (
                    format!("o{i}"),
                    format!("{} {}", titles[rng.index(titles.len())], i),
                )
            })
            .collect();
        let (experiences, jd_years) = crate::sampling::attribute_time(&ordered, &mut rng);
        let start_title = experiences.last().unwrap().title.clone();
        let spec = TripleSpec {
            cluster_id: (seed % 7) as u32,
            start_occupation_id: "o0".to_string(),
            start_title,
            skills,
            experiences,
            jd_experience_years: jd_years,
            candidate_first_name: "Ada".to_string(),
            candidate_gender: Gender::Female,
            rng_seed: seed,
            targets: SamplingTargets {
                experience_count: n_exp as u8,
                skill_count: n_skills as u32,
                source: TargetSource::Fallback,
            },
            shortfall: None,
        };
        let perturbation = perturb(&spec, &mut rng).unwrap();
        let annotation = build_annotation(&spec, &perturbation, "Ada", Gender::Female);
        (spec, annotation)
    }

    /// Minimal scripted HTTP server for endpoint tests: answers the nth
    /// request with the nth (status, body) pair, then closes.
    pub fn serve_scripted(
        responses: Vec<(u16, String)>,
    ) -> (String, std::sync::Arc<std::sync::atomic::AtomicUsize>) {
        use std::io::{Read, Write};
        use std::sync::atomic::{AtomicUsize, Ordering};
        use std::sync::Arc;

        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicUsize::new(0));
        let hits_inner = hits.clone();
        std::thread::spawn(move || {
            for (status, body) in responses {
                let (mut stream, _) = match listener.accept() {
                    Ok(pair) => pair,
                    Err(_) => return,
                };
                hits_inner.fetch_add(1, Ordering::SeqCst);
                let mut buf = Vec::new();
                let mut tmp = [0u8; 1024];
                let body_len;
                loop {
                    let n = stream.read(&mut tmp).unwrap();
                    buf.extend_from_slice(&tmp[..n]);
                    if let Some(pos) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
                        let headers = String::from_utf8_lossy(&buf[..pos]).to_lowercase();
                        let announced = headers
                            .lines()
                            .find_map(|l| l.strip_prefix("content-length:"))
                            .and_then(|v| v.trim().parse::<usize>().ok())
                            .unwrap_or(0);
                        let have = buf.len() - (pos + 4);
                        body_len = announced.saturating_sub(have);
                        break;
                    }
                }
                let mut remaining = body_len;
                while remaining > 0 {
                    let n = stream.read(&mut tmp).unwrap();
                    remaining = remaining.saturating_sub(n);
                }
                let reply = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(reply.as_bytes()).unwrap();
            }
        });
        (url, hits)
    }

    /// Chat-completion reply body carrying `content`.
    pub fn chat_body(content: &str) -> String {
        serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": content}}]
        })
        .to_string()
    }
}
