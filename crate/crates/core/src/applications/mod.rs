//! End-to-end scenarios: PageRank manipulation, distributed averaging with
//! failed links, and the voter model with influential agents.

pub mod averaging;
pub mod pagerank;
pub mod voter;
