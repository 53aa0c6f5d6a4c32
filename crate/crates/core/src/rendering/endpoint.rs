//! Chat-completion endpoint client: bounded retries with exponential
//! backoff, credentials from the environment, and an on-disk response cache
//! keyed by (model, temperature, prompt) so interrupted runs resume without
//! re-paying for completions.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Full URL of the chat-completions endpoint.
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    /// Retries after the first attempt, for transient failures only.
    pub max_retries: u32,
    /// First backoff delay; doubles per retry.
    pub backoff_initial_ms: u64,
    /// Environment variable holding the API key.
    pub credential_env: String,
    pub timeout_secs: u64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: "https://api.openai.com/v1/chat/completions".to_string(),
            model: "gpt-4".to_string(),
            temperature: 1.0,
            max_retries: 3,
            backoff_initial_ms: 500,
            credential_env: "HRGEN_API_KEY".to_string(),
            timeout_secs: 120,
        }
    }
}

#[derive(Debug, Error)]
pub enum EndpointError {
    #[error("credential environment variable {var} is not set")]
    CredentialMissing { var: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned status {status}: {body}")]
    BadStatus { status: u16, body: String },
    #[error("reply did not contain a completion: {0}")]
    MalformedReply(String),
    #[error("endpoint failed after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
    #[error("cache i/o error at {path}: {source}")]
    CacheIo {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    temperature: f64,
    messages: [ChatMessage<'a>; 1],
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatReplyMessage,
}

#[derive(Deserialize)]
struct ChatReplyMessage {
    content: String,
}

pub struct EndpointClient {
    config: EndpointConfig,
    credential: String,
    http: reqwest::blocking::Client,
}

impl EndpointClient {
    /// Reads the credential eagerly so a missing key fails before any
    /// request is issued.
    pub fn new(config: EndpointConfig) -> Result<Self, EndpointError> {
        let credential = std::env::var(&config.credential_env).map_err(|_| {
            EndpointError::CredentialMissing {
                var: config.credential_env.clone(),
            }
        })?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| EndpointError::Transport(e.to_string()))?;
        Ok(EndpointClient {
            config,
            credential,
            http,
        })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    /// Sends the prompt as a single user message and returns the first
    /// choice's text. 429 and 5xx responses and transport errors retry with
    /// exponential backoff until `max_retries` is spent.
    pub fn complete(&self, prompt: &str) -> Result<Completion, EndpointError> {
        let request = ChatRequest {
            model: &self.config.model,
            temperature: self.config.temperature,
            messages: [ChatMessage {
                role: "user",
                content: prompt,
            }],
        };

        let mut last_failure = String::new();
        let attempts = self.config.max_retries + 1;
        for attempt in 0..attempts {
            if attempt > 0 {
                let delay = self.config.backoff_initial_ms << (attempt - 1);
                std::thread::sleep(Duration::from_millis(delay));
            }
            let sent = self
                .http
                .post(&self.config.base_url)
                .bearer_auth(&self.credential)
                .json(&request)
                .send();
            match sent {
                Ok(response) => {
                    let status = response.status();
                    if status.is_success() {
                        let parsed: ChatResponse = response
                            .json()
                            .map_err(|e| EndpointError::MalformedReply(e.to_string()))?;
                        let text = parsed
                            .choices
                            .into_iter()
                            .next()
                            .map(|c| c.message.content)
                            .ok_or_else(|| {
                                EndpointError::MalformedReply("no choices in reply".to_string())
                            })?;
                        return Ok(Completion {
                            text,
                            attempts: attempt + 1,
                        });
                    }
                    let code = status.as_u16();
                    let body = response.text().unwrap_or_default();
                    if code == 429 || (500..600).contains(&code) {
                        last_failure = format!("status {code}: {body}");
                        continue;
                    }
                    return Err(EndpointError::BadStatus { status: code, body });
                }
                Err(e) => {
                    last_failure = e.to_string();
                    continue;
                }
            }
        }
        Err(EndpointError::Exhausted {
            attempts,
            last: last_failure,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Completion {
    pub text: String,
    pub attempts: u32,
}

/// One cached completion; the file name is the request key.
#[derive(Debug, Serialize, Deserialize)]
pub struct CacheEntry {
    pub model: String,
    pub temperature: f64,
    pub prompt: String,
    pub reply: String,
}

/// Content-addressed completion cache: one JSON file per
/// (model, temperature, prompt) key.
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn open(dir: &Path) -> Result<Self, EndpointError> {
        std::fs::create_dir_all(dir).map_err(|source| EndpointError::CacheIo {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(ResponseCache {
            dir: dir.to_path_buf(),
        })
    }

    pub fn request_key(model: &str, temperature: f64, prompt: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(model.as_bytes());
        hasher.update([0x1f]);
        hasher.update(temperature.to_le_bytes());
        hasher.update([0x1f]);
        hasher.update(prompt.as_bytes());
        format!("{:x}", hasher.finalize())
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let text = std::fs::read_to_string(self.path_for(key)).ok()?;
        serde_json::from_str::<CacheEntry>(&text)
            .ok()
            .map(|e| e.reply)
    }

    pub fn put(&self, key: &str, entry: &CacheEntry) -> Result<(), EndpointError> {
        let path = self.path_for(key);
        let text = serde_json::to_string_pretty(entry).expect("cache entry serializes");
        std::fs::write(&path, text).map_err(|source| EndpointError::CacheIo {
            path: path.display().to_string(),
            source,
        })
    }
}

/// A completion that consults the cache first; at most one request is ever
/// issued per key while a cache is in use.
pub fn complete_cached(
    client: &EndpointClient,
    cache: Option<&ResponseCache>,
    prompt: &str,
) -> Result<CachedCompletion, EndpointError> {
    let key = ResponseCache::request_key(&client.config.model, client.config.temperature, prompt);
    if let Some(cache) = cache {
        if let Some(reply) = cache.get(&key) {
            return Ok(CachedCompletion {
                text: reply,
                attempts: 0,
                cache_hit: true,
                key,
            });
        }
    }
    let completion = client.complete(prompt)?;
    if let Some(cache) = cache {
        cache.put(
            &key,
            &CacheEntry {
                model: client.config.model.clone(),
                temperature: client.config.temperature,
                prompt: prompt.to_string(),
                reply: completion.text.clone(),
            },
        )?;
    }
    Ok(CachedCompletion {
        text: completion.text,
        attempts: completion.attempts,
        cache_hit: false,
        key,
    })
}

#[derive(Debug, Clone)]
pub struct CachedCompletion {
    pub text: String,
    pub attempts: u32,
    pub cache_hit: bool,
    pub key: String,
}

/// One line of the request audit log.
#[derive(Debug, Serialize, Deserialize)]
pub struct RequestLogEntry {
    pub triple_id: String,
    pub kind: String,
    pub request_key: String,
    pub cache_hit: bool,
    pub attempts: u32,
    pub outcome: String,
}
