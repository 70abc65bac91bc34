//! Tool-augmented genomic question answering.
//!
//! The crate is organised around a small set of layers:
//!
//! * [`domain`] - task vocabulary, answers, conversation state, parameter
//!   canonicalisation.
//! * [`clock`] - injectable time source so every latency and trace timestamp
//!   is reproducible under test.
//! * [`trace`] - append-only episode event log with a JSONL disk format.
//! * [`llm`] - chat backend abstraction (scripted and remote HTTP) plus the
//!   JSON contract repair loop.
//! * [`transport`] - rate-limited HTTP layer with record/replay fixtures and
//!   clients for NCBI E-utilities, BLAST and web search.
//! * [`agents`] - tool agents that turn conversation state into tool calls.
//! * [`controllers`] - router, evaluator and generator decision logic.
//! * [`pipeline`] - the monolithic bracket-call loop, the multi-agent episode
//!   driver and the batch runner.
//! * [`bench`] - dataset loading, scoring rules, aggregation, latency
//!   statistics and error reporting.

pub mod agents;
pub mod bench;
pub mod clock;
pub mod controllers;
pub mod domain;
pub mod llm;
pub mod pipeline;
pub mod trace;
pub mod transport;
