//! Standard-gamble elicitation of utilities over life-satisfaction states:
//! the session engine, utility and loss-aversion estimation, representative
//! life satisfaction, a respondent simulator, and the HTTP/CLI plumbing.

pub mod aggregation;
pub mod batch;
pub mod domain;
pub mod elicitation;
pub mod estimation;
pub mod io;
pub mod pipeline;
pub mod report;
pub mod service;
pub mod simulator;
pub mod stats;
