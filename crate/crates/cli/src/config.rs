//! Run configuration: one declarative TOML file, overridable by flags.
//!
//! The config hash covers only semantic fields (everything that shapes the
//! artifacts); the output directory and worker count are excluded so two
//! runs of the same recipe into different directories produce identical
//! trees, manifests included.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hrgen_core::curation::SkillCountDistribution;
use hrgen_core::rendering::EndpointConfig;
use hrgen_core::tasks::SplitSizes;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default)]
    pub graph: GraphConfig,
    #[serde(default)]
    pub curation: CurationConfig,
    #[serde(default)]
    pub sample: SampleConfig,
    #[serde(default)]
    pub renderer: RendererConfig,
    #[serde(default)]
    pub endpoint: EndpointSection,
    #[serde(default)]
    pub names: NamesConfig,
    #[serde(default)]
    pub assess: AssessConfig,
    #[serde(default)]
    pub export: ExportConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_dir: default_output_dir(),
            seed: default_seed(),
            jobs: default_jobs(),
            graph: GraphConfig::default(),
            curation: CurationConfig::default(),
            sample: SampleConfig::default(),
            renderer: RendererConfig::default(),
            endpoint: EndpointSection::default(),
            names: NamesConfig::default(),
            assess: AssessConfig::default(),
            export: ExportConfig::default(),
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_seed() -> u64 {
    42
}

fn default_jobs() -> usize {
    4
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    /// Graph files to ingest; merged in order.
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    #[serde(default = "default_min_cluster_size")]
    pub min_cluster_size: usize,
}

fn default_min_cluster_size() -> usize {
    10
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurationConfig {
    /// New occupation titles, one per line.
    pub titles: Option<PathBuf>,
    /// Reference graph for degree transfer; absent means the fallback
    /// distribution supplies skill targets.
    pub reference_graph: Option<PathBuf>,
    #[serde(default)]
    pub fallback_counts: SkillCountDistribution,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    #[serde(default = "default_triple_count")]
    pub triple_count: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            triple_count: default_triple_count(),
        }
    }
}

fn default_triple_count() -> u64 {
    1000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RendererMode {
    Template,
    Endpoint,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RendererConfig {
    #[serde(default = "default_renderer_mode")]
    pub mode: RendererMode,
}

impl Default for RendererConfig {
    fn default() -> Self {
        RendererConfig {
            mode: default_renderer_mode(),
        }
    }
}

fn default_renderer_mode() -> RendererMode {
    RendererMode::Template
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointSection {
    #[serde(flatten)]
    pub config: EndpointConfig,
    /// Disk-cache completions under the triples directory.
    #[serde(default = "default_cache")]
    pub cache: bool,
}

impl Default for EndpointSection {
    fn default() -> Self {
        EndpointSection {
            config: EndpointConfig::default(),
            cache: default_cache(),
        }
    }
}

fn default_cache() -> bool {
    true
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamesConfig {
    /// Substitute first-name pools; bundled lists are used when absent.
    pub female: Option<PathBuf>,
    pub male: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssessConfig {
    #[serde(default = "default_assess_sample")]
    pub sample_size: usize,
}

impl Default for AssessConfig {
    fn default() -> Self {
        AssessConfig {
            sample_size: default_assess_sample(),
        }
    }
}

fn default_assess_sample() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportConfig {
    #[serde(default)]
    pub splits: SplitSizes,
    pub category_map: Option<PathBuf>,
}

impl Default for ExportConfig {
    fn default() -> Self {
        ExportConfig {
            splits: SplitSizes::default(),
            category_map: None,
        }
    }
}

impl RunConfig {
    /// Loads the config file and resolves its relative paths against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut self.output_dir);
        self.graph.inputs.iter_mut().for_each(resolve);
        if let Some(p) = self.curation.titles.as_mut() {
            resolve(p);
        }
        if let Some(p) = self.curation.reference_graph.as_mut() {
            resolve(p);
        }
        if let Some(p) = self.names.female.as_mut() {
            resolve(p);
        }
        if let Some(p) = self.names.male.as_mut() {
            resolve(p);
        }
        if let Some(p) = self.export.category_map.as_mut() {
            resolve(p);
        }
    }

    /// Hash of the semantic configuration. Output directory and job count
    /// shape where and how fast artifacts appear, not what they contain, so
    /// they stay out of the hash.
    pub fn semantic_hash(&self) -> String {
        #[derive(Serialize)]
        struct Semantic<'a> {
            seed: u64,
            graph: &'a GraphConfig,
            curation: &'a CurationConfig,
            sample: &'a SampleConfig,
            renderer: &'a RendererConfig,
            endpoint: &'a EndpointSection,
            names: &'a NamesConfig,
            assess: &'a AssessConfig,
            export: &'a ExportConfig,
        }
        let view = Semantic {
            seed: self.seed,
            graph: &self.graph,
            curation: &self.curation,
            sample: &self.sample,
            renderer: &self.renderer,
            endpoint: &self.endpoint,
            names: &self.names,
            assess: &self.assess,
            export: &self.export,
        };
        let canonical = serde_json::to_string(&view).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        format!("{:x}", hasher.finalize())
    }
}
