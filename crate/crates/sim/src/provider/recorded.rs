use std::collections::HashMap;
use std::io;
use std::path::Path;
use std::sync::Arc;

use platoon_cache_core::policy::{ProviderError, ProviderRequest, RankProvider};

use crate::transcript::{read_transcript, OUTCOME_OK};

/// Successful responses from a transcript, keyed by prompt digest. The
/// first recording of a digest wins.
#[derive(Debug, Default)]
pub struct RecordedStore {
    responses: HashMap<String, String>,
}

impl RecordedStore {
    pub fn load(path: &Path) -> io::Result<Self> {
        let mut responses = HashMap::new();
        for entry in read_transcript(path)? {
            if entry.outcome == OUTCOME_OK {
                if let Some(text) = entry.response {
                    responses.entry(entry.prompt_digest).or_insert(text);
                }
            }
        }
        Ok(Self { responses })
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }

    pub fn get(&self, digest: &str) -> Option<&str> {
        self.responses.get(digest).map(String::as_str)
    }
}

pub struct RecordedProvider {
    store: Arc<RecordedStore>,
}

impl RecordedProvider {
    pub fn new(store: Arc<RecordedStore>) -> Self {
        Self { store }
    }
}

impl RankProvider for RecordedProvider {
    fn complete(&mut self, request: &ProviderRequest<'_>) -> Result<String, ProviderError> {
        let digest = request.prompt.digest();
        self.store
            .get(&digest)
            .map(str::to_owned)
            .ok_or(ProviderError::MissingRecording { digest })
    }
}
