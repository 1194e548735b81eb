use std::sync::Arc;
use std::time::{Duration, Instant};

use platoon_cache_core::config::SimConfig;
use platoon_cache_core::policy::{ProviderError, ProviderRequest, RankProvider};
use serde_json::Value;

use super::outcome_of;
use crate::transcript::{chat_request, TranscriptEntry, TranscriptLog};

#[derive(Debug, Clone, PartialEq)]
pub struct HttpSettings {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub timeout: Duration,
    pub max_retries: u32,
    /// Wait before the first retry; doubled for each further one.
    pub backoff: Duration,
    pub api_key_env: String,
}

impl HttpSettings {
    pub fn from_config(config: &SimConfig) -> Self {
        Self {
            endpoint: config.endpoint.clone().unwrap_or_default(),
            model: config.model.clone(),
            temperature: config.temperature,
            timeout: Duration::from_millis(config.timeout_ms),
            max_retries: config.max_retries,
            backoff: Duration::from_millis(250),
            api_key_env: config.api_key_env.clone(),
        }
    }
}

/// Chat-completions client. Retries timeouts, transport errors, 429 and
/// 5xx; every attempt is logged. The API key is read from the environment
/// once and only ever placed in the Authorization header.
pub struct HttpProvider {
    agent: ureq::Agent,
    settings: HttpSettings,
    api_key: Option<String>,
    log: Option<Arc<TranscriptLog>>,
    seed: u64,
}

impl HttpProvider {
    pub fn new(settings: HttpSettings, log: Option<Arc<TranscriptLog>>, seed: u64) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(settings.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let api_key = std::env::var(&settings.api_key_env).ok().filter(|k| !k.is_empty());
        Self { agent, settings, api_key, log, seed }
    }

    fn send(&self, body: &Value) -> Result<String, ProviderError> {
        let mut req = self.agent.post(&self.settings.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body).map_err(|e| self.classify(e))?;
        let code = resp.status().as_u16();
        if !(200..300).contains(&code) {
            return Err(ProviderError::Status { code });
        }
        let v: Value = resp.body_mut().read_json().map_err(|e| self.classify(e))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| ProviderError::Transport("response has no choices[0].message.content".into()))
    }

    fn classify(&self, e: ureq::Error) -> ProviderError {
        let after_ms = self.settings.timeout.as_millis() as u64;
        match e {
            ureq::Error::Timeout(_) => ProviderError::Timeout { after_ms },
            ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => ProviderError::Timeout { after_ms },
            ureq::Error::StatusCode(code) => ProviderError::Status { code },
            other => ProviderError::Transport(other.to_string()),
        }
    }
}

impl RankProvider for HttpProvider {
    fn complete(&mut self, request: &ProviderRequest<'_>) -> Result<String, ProviderError> {
        let body = chat_request(&self.settings.model, self.settings.temperature, request.prompt);
        let digest = request.prompt.digest();
        let mut attempt = 0;
        loop {
            let start = Instant::now();
            let result = self.send(&body);
            if let Some(log) = &self.log {
                let entry = TranscriptEntry {
                    round: request.round,
                    seed: self.seed,
                    attempt,
                    prompt_digest: digest.clone(),
                    request: body.clone(),
                    response: result.as_ref().ok().cloned(),
                    latency_ms: start.elapsed().as_millis() as u64,
                    outcome: outcome_of(&result),
                };
                log.append(&entry)
                    .map_err(|e| ProviderError::Transport(format!("transcript write failed: {e}")))?;
            }
            match result {
                Err(e) if e.is_transient() && attempt < self.settings.max_retries => {
                    std::thread::sleep(self.settings.backoff * 2u32.pow(attempt));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}
