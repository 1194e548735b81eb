//! Concrete ranking providers and the per-replica factory.

mod http;
mod recorded;

use std::sync::Arc;
use std::time::Instant;

use platoon_cache_core::config::{ProviderKind, SimConfig};
use platoon_cache_core::policy::{MockProvider, ProviderError, ProviderRequest, RankProvider};

pub use http::{HttpProvider, HttpSettings};
pub use recorded::{RecordedProvider, RecordedStore};

use crate::transcript::{chat_request, TranscriptEntry, TranscriptLog, OUTCOME_OK};

pub(crate) fn outcome_of(result: &Result<String, ProviderError>) -> String {
    match result {
        Ok(_) => OUTCOME_OK.to_owned(),
        Err(e) => e.to_string(),
    }
}

/// Records every call of an in-process provider in the transcript.
pub struct Logged<P> {
    pub inner: P,
    pub log: Arc<TranscriptLog>,
    pub model: String,
    pub temperature: f64,
    pub seed: u64,
}

impl<P: RankProvider> RankProvider for Logged<P> {
    fn complete(&mut self, request: &ProviderRequest<'_>) -> Result<String, ProviderError> {
        let start = Instant::now();
        let result = self.inner.complete(request);
        let entry = TranscriptEntry {
            round: request.round,
            seed: self.seed,
            attempt: 0,
            prompt_digest: request.prompt.digest(),
            request: chat_request(&self.model, self.temperature, request.prompt),
            response: result.as_ref().ok().cloned(),
            latency_ms: start.elapsed().as_millis() as u64,
            outcome: outcome_of(&result),
        };
        self.log
            .append(&entry)
            .map_err(|e| ProviderError::Transport(format!("transcript write failed: {e}")))?;
        result
    }
}

/// Builds one provider per experiment replica.
pub trait ProviderFactory: Sync {
    fn make(&self, config: &SimConfig, seed: u64) -> Box<dyn RankProvider + '_>;
}

/// The provider named in the config, with calls logged to `log`.
pub struct StandardFactory {
    kind: ProviderKind,
    store: Option<Arc<RecordedStore>>,
    log: Option<Arc<TranscriptLog>>,
}

impl StandardFactory {
    pub fn new(config: &SimConfig, log: Option<Arc<TranscriptLog>>) -> std::io::Result<Self> {
        let store = match (config.provider, &config.record_path) {
            (ProviderKind::Recorded, Some(path)) => Some(Arc::new(RecordedStore::load(std::path::Path::new(path))?)),
            _ => None,
        };
        Ok(Self { kind: config.provider, store, log })
    }
}

fn wrap<'a, P: RankProvider + 'a>(
    inner: P,
    log: &Option<Arc<TranscriptLog>>,
    config: &SimConfig,
    seed: u64,
) -> Box<dyn RankProvider + 'a> {
    match log {
        Some(log) => Box::new(Logged {
            inner,
            log: log.clone(),
            model: config.model.clone(),
            temperature: config.temperature,
            seed,
        }),
        None => Box::new(inner),
    }
}

impl ProviderFactory for StandardFactory {
    fn make(&self, config: &SimConfig, seed: u64) -> Box<dyn RankProvider + '_> {
        match (self.kind, &self.store) {
            (ProviderKind::Recorded, Some(store)) => wrap(RecordedProvider::new(store.clone()), &self.log, config, seed),
            (ProviderKind::Http, _) => Box::new(HttpProvider::new(HttpSettings::from_config(config), self.log.clone(), seed)),
            _ => wrap(MockProvider { seed }, &self.log, config, seed),
        }
    }
}
