//! Deterministic d-limited automata: a reference engine, the segment-map
//! algebra, and a linear-time simulation that replaces frozen tape blocks
//! by their maps.

pub mod bench;
pub mod format;
pub mod fuzz;
pub mod linear;
pub mod mapping;
pub mod model;
pub mod naive;
pub mod trace;
pub mod zoo;

pub use format::{parse_machine, serialize_machine, FormatError};
pub use linear::{run_linear, LinearOptions};
pub use mapping::{compose, describe_segment, DirectedState, SegmentMap};
pub use model::{validate_automaton, Automaton, DLimit, Mode, Move, StateId, SymbolId, TapeSymbol};
pub use naive::{run_naive, RunOptions};
pub use trace::{regular_trace, RejectReason, RunError, RunOutcome, Verdict};
