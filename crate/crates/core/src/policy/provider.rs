//! The seam between the simulator and whatever produces ranked lists.

use alloc::string::String;

use super::info::HeterogeneousInfo;
use super::parse::{parse_ranked_list, ParseError};
use super::prompt::PromptBundle;
use crate::decision::RankedList;

pub struct ProviderRequest<'a> {
    pub round: u32,
    pub prompt: &'a PromptBundle,
    pub info: &'a HeterogeneousInfo,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("no response within {after_ms} ms")]
    Timeout { after_ms: u64 },
    #[error("endpoint returned HTTP {code}")]
    Status { code: u16 },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("no recorded response for prompt {digest}")]
    MissingRecording { digest: String },
    #[error("unusable response: {0}")]
    Parse(#[from] ParseError),
}

impl ProviderError {
    /// Worth another attempt against the same endpoint.
    pub fn is_transient(&self) -> bool {
        match self {
            Self::Timeout { .. } | Self::Transport(_) => true,
            Self::Status { code } => *code == 429 || *code >= 500,
            Self::MissingRecording { .. } | Self::Parse(_) => false,
        }
    }
}

/// Produces the raw text answer for one prompt.
pub trait RankProvider {
    fn complete(&mut self, request: &ProviderRequest<'_>) -> Result<String, ProviderError>;
}

impl<P: RankProvider + ?Sized> RankProvider for &mut P {
    fn complete(&mut self, request: &ProviderRequest<'_>) -> Result<String, ProviderError> {
        (**self).complete(request)
    }
}

pub fn rank_with_provider(
    provider: &mut dyn RankProvider,
    request: &ProviderRequest<'_>,
) -> Result<RankedList, ProviderError> {
    let text = provider.complete(request)?;
    Ok(parse_ranked_list(&text)?)
}
