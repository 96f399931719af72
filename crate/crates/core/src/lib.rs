//! Analytics for retweet-style event logs: who creates unreliable
//! content, who amplifies it, and which way causality runs.
//!
//! The pipeline, end to end:
//!
//! 1. [`ingest`] parses CSV/JSONL share events, labels them by web-domain
//!    category, and filters them to a study window.
//! 2. [`classify`] assigns each active user a per-window role from the
//!    fake share of their activity: creator (at or above a threshold,
//!    default 20%), consumer (positive but below), or non-spreader.
//! 3. [`network`] builds the directed retweet network and measures
//!    content concentration and inter-group link densities against a
//!    random null model.
//! 4. [`temporal`] tracks daily group sizes and fake volume, role
//!    transitions, and first-return times.
//! 5. [`ccm`] runs convergent cross mapping with permutation surrogates
//!    to probe causal direction between group sizes and fake volume.
//! 6. [`synth`] generates logs with planted structure and coupled
//!    chaotic series with known ground truth, for validation.
//!
//! Everything downstream of ingestion is a pure function over an
//! immutable [`event::EventLog`]; all randomness flows from explicit
//! seeds.

pub mod ccm;
pub mod classify;
pub mod event;
pub mod ingest;
pub mod network;
pub mod plot;
pub mod synth;
pub mod temporal;

pub use ccm::{CcmConfig, CcmResult, EmbeddingConfig};
pub use classify::{BehaviorSummary, ClassificationConfig, Role, RoleAssignment};
pub use event::{CategoryTable, ContentCategory, EventLog, ShareEvent, TimeWindow, UserId};
pub use ingest::{LogFormat, ParseOptions};
pub use network::{CategoryFilter, ConcentrationCurve, DensityMatrix, RetweetNetwork};
pub use synth::{CoupledMapParams, PopulationParams};
pub use temporal::{DailySeries, ReturnProfile, ReturnRecord};
