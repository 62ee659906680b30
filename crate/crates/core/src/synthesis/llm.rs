//! Chat-completions client for an OpenAI-compatible endpoint.

use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::prompt::{parse_response, render_prompt};
use super::{Generator, GeneratorError, GeneratorRequest, GeneratorResponse, TokenUsage, UnitContext};

pub const ENV_BASE_URL: &str = "PREGUSS_LLM_BASE_URL";
pub const ENV_MODEL: &str = "PREGUSS_LLM_MODEL";
pub const ENV_API_KEY: &str = "PREGUSS_LLM_API_KEY";

const SYSTEM: &str = "You are an expert in deductive verification of C programs. \
                      Answer only with tagged ACSL clauses in one fenced block.";

#[derive(Debug, Clone)]
pub struct LlmConfig {
    /// Base URL up to and excluding `/chat/completions`.
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    pub retries: u32,
    /// First retry delay; doubled after every failure.
    pub backoff: Duration,
}

impl LlmConfig {
    /// Read the endpoint from the environment. The base URL is required.
    pub fn from_env() -> Result<LlmConfig, GeneratorError> {
        let base_url = std::env::var(ENV_BASE_URL)
            .map_err(|_| GeneratorError::Unavailable(format!("{ENV_BASE_URL} is not set")))?;
        Ok(LlmConfig {
            base_url,
            model: std::env::var(ENV_MODEL).unwrap_or_else(|_| "gpt-4o".into()),
            api_key: std::env::var(ENV_API_KEY).ok(),
            timeout: Duration::from_secs(120),
            retries: 3,
            backoff: Duration::from_millis(500),
        })
    }
}

#[derive(Deserialize)]
struct Completion {
    choices: Vec<Choice>,
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

#[derive(Deserialize)]
struct Usage {
    prompt_tokens: u64,
    completion_tokens: u64,
}

pub struct LlmGenerator {
    cfg: LlmConfig,
    agent: ureq::Agent,
}

impl LlmGenerator {
    pub fn new(cfg: LlmConfig) -> LlmGenerator {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        LlmGenerator { cfg, agent }
    }

    fn post(&self, prompt: &str) -> Result<Completion, String> {
        let url = format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'));
        let body = json!({
            "model": self.cfg.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": SYSTEM},
                {"role": "user", "content": prompt},
            ],
        });
        let mut req = self.agent.post(&url);
        if let Some(k) = &self.cfg.api_key {
            req = req.header("Authorization", &format!("Bearer {k}"));
        }
        let mut resp = req.send_json(&body).map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        if status != 200 {
            return Err(format!("HTTP {status}"));
        }
        resp.body_mut().read_json::<Completion>().map_err(|e| e.to_string())
    }
}

impl Generator for LlmGenerator {
    fn id(&self) -> String {
        format!("llm:{}", self.cfg.model)
    }

    fn generate(&mut self, req: &GeneratorRequest, cx: &UnitContext<'_>) -> Result<GeneratorResponse, GeneratorError> {
        let prompt = render_prompt(req);
        let mut delay = self.cfg.backoff;
        let mut last = String::new();
        for attempt in 0..=self.cfg.retries {
            if attempt > 0 {
                std::thread::sleep(delay);
                delay *= 2;
            }
            match self.post(&prompt) {
                Ok(c) => {
                    let raw = c
                        .choices
                        .into_iter()
                        .next()
                        .and_then(|ch| ch.message.content)
                        .unwrap_or_default();
                    let (clauses, notes) = parse_response(cx.tp, &raw);
                    return Ok(GeneratorResponse {
                        clauses,
                        raw,
                        notes,
                        usage: c.usage.map(|u| TokenUsage {
                            prompt: u.prompt_tokens,
                            completion: u.completion_tokens,
                        }),
                    });
                }
                Err(e) => last = e,
            }
        }
        Err(GeneratorError::Unavailable(format!(
            "{} attempts failed, last error: {last}",
            self.cfg.retries + 1
        )))
    }
}
