//! Ranking policies: the prompted model path and the reference baselines.

pub mod baseline;
pub mod info;
pub mod mock;
pub mod parse;
pub mod prompt;
pub mod provider;
pub mod solver;

pub use baseline::{popularity_rank, random_rank};
pub use info::{collect_info, HeterogeneousInfo};
pub use mock::{mock_rank, MockProvider};
pub use parse::{parse_ranked_list, render_list, ParseError};
pub use prompt::{build_prompt, PromptBundle};
pub use provider::{rank_with_provider, ProviderError, ProviderRequest, RankProvider};
pub use solver::{brute_force_place, clairvoyant_place, SolverError};
