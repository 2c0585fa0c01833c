//! Query routing and templated explanation rendering.

mod render;
mod run;

pub use render::{render_explanation, PhraseMap, FALLBACK_SENTENCE};
pub use run::{run_query, Explanation, ExplanationRequest, ExplainError, Method, QueryType};
