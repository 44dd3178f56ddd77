//! Run outcomes, step traces and their JSON-lines rendering.

use std::io::{self, Write};

use serde::Serialize;

use crate::model::{Automaton, Move, StateId, TapeSymbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RejectReason {
    /// A repeated configuration inside a write-free stretch.
    LoopDetected,
    /// A segment map (or a departure) reported that the head never leaves.
    MapLoop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }
}

/// What the engine did on one step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepCase {
    /// A plain move of the simulated machine (naive steps, linear A-moves).
    AMove,
    /// Linear engine: the visited cell froze and was turned into a map.
    Scan {
        merged_left: bool,
        merged_right: bool,
        segment: (usize, usize),
    },
    /// Linear engine: the head crossed a map cell.
    MapJump,
}

/// What the head read on a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Read {
    Symbol(TapeSymbol),
    Map,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub step: u64,
    pub pos: usize,
    pub state: StateId,
    pub read: Read,
    pub write: Read,
    pub mv: Move,
    /// The visited cell was frozen on arrival.
    pub frozen: bool,
    pub case: StepCase,
}

/// One move of the simulated machine at an unfrozen cell or a marker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RegularMove {
    pub state: StateId,
    pub pos: usize,
    pub read: TapeSymbol,
    pub write: TapeSymbol,
    pub mv: Move,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MoveCounts {
    /// Steps at unfrozen interior letters (linear: A-moves that did not freeze).
    pub letter: u64,
    /// Naive only: steps at frozen interior cells.
    pub frozen: u64,
    pub marker: u64,
    /// Linear only: deletion scans.
    pub scans: u64,
    /// Linear only: map jumps.
    pub map_jumps: u64,
}

impl MoveCounts {
    pub fn total(&self) -> u64 {
        self.letter + self.frozen + self.marker + self.scans + self.map_jumps
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub verdict: Verdict,
    /// Number of engine iterations; each iteration is one head move.
    pub steps: u64,
    pub moves: MoveCounts,
    /// Tape writes performed by the simulated machine.
    pub writes: u64,
    /// Visits per cell, indexed `0..=n+1`.
    pub cell_visits: Vec<u64>,
    /// Writes per cell, indexed `0..=n+1`.
    pub cell_writes: Vec<u64>,
    /// Linear only: total edge traversals over all compositions.
    pub compose_edges: u64,
    /// Linear only: the largest edge count of a single composition.
    pub max_compose_edges: usize,
    /// Linear only: number of shadow comparisons performed.
    pub shadow_checks: u64,
    pub d: usize,
    pub trace: Option<Vec<StepRecord>>,
}

impl RunOutcome {
    pub(crate) fn new(n: usize, d: usize, trace: bool) -> Self {
        RunOutcome {
            verdict: Verdict::Accept,
            steps: 0,
            moves: MoveCounts::default(),
            writes: 0,
            cell_visits: vec![0; n + 2],
            cell_writes: vec![0; n + 2],
            compose_edges: 0,
            max_compose_edges: 0,
            shadow_checks: 0,
            d,
            trace: trace.then(Vec::new),
        }
    }

    /// Loop iterations of the engine; equal to `steps` for both engines.
    pub fn loop_iterations(&self) -> u64 {
        self.steps
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("step budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("no transition for state {state:?} reading {read:?}")]
    MissingTransition { state: StateId, read: TapeSymbol },
    #[error("head left the tape at step {0}")]
    HeadOffTape(u64),
    #[error("{0}")]
    Word(#[from] crate::model::WordError),
    #[error("shadow mismatch at step {step}: {detail}")]
    ShadowMismatch { step: u64, detail: String },
}

/// Projects a recorded trace onto the moves made at unfrozen cells and
/// markers. Panics if the run was not traced.
pub fn regular_trace(outcome: &RunOutcome) -> Vec<RegularMove> {
    let trace = outcome
        .trace
        .as_ref()
        .expect("regular_trace needs a run recorded with tracing on");
    trace
        .iter()
        .filter(|r| !r.frozen)
        .filter_map(|r| match (r.read, r.write) {
            (Read::Symbol(read), Read::Symbol(write)) => Some(RegularMove {
                state: r.state,
                pos: r.pos,
                read,
                write,
                mv: r.mv,
            }),
            _ => None,
        })
        .collect()
}

#[derive(Serialize)]
struct StepJson<'a> {
    step: u64,
    pos: usize,
    state: &'a str,
    read: &'a str,
    write: &'a str,
    #[serde(rename = "move")]
    mv: &'a str,
    frozen: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    case: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    merged_left: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    merged_right: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    segment: Option<[usize; 2]>,
}

#[derive(Serialize)]
struct FinalJson {
    verdict: &'static str,
    reason: Option<&'static str>,
    steps: u64,
}

/// Placeholder token for a map cell in traces.
pub const MAP_TOKEN: &str = "@map";

/// Writes the trace as JSON lines followed by the final verdict record.
/// Linear-engine traces carry the extra `case` fields.
pub fn write_jsonl<W: Write>(
    aut: &Automaton,
    outcome: &RunOutcome,
    linear: bool,
    mut w: W,
) -> io::Result<()> {
    let tok = |r: Read| match r {
        Read::Symbol(s) => aut.token(s),
        Read::Map => MAP_TOKEN,
    };
    for r in outcome.trace.iter().flatten() {
        let (case, ml, mr, seg) = match r.case {
            StepCase::AMove => ("amove", None, None, None),
            StepCase::MapJump => ("mapjump", None, None, None),
            StepCase::Scan {
                merged_left,
                merged_right,
                segment,
            } => (
                "scan",
                Some(merged_left),
                Some(merged_right),
                Some([segment.0, segment.1]),
            ),
        };
        let rec = StepJson {
            step: r.step,
            pos: r.pos,
            state: aut.state_name(r.state),
            read: tok(r.read),
            write: tok(r.write),
            mv: r.mv.token(),
            frozen: r.frozen,
            case: linear.then_some(case),
            merged_left: ml,
            merged_right: mr,
            segment: seg,
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    let fin = FinalJson {
        verdict: if outcome.verdict.is_accept() {
            "accept"
        } else {
            "reject"
        },
        reason: (!outcome.verdict.is_accept()).then_some("loop"),
        steps: outcome.steps,
    };
    serde_json::to_writer(&mut w, &fin)?;
    w.write_all(b"\n")
}

/// Renders a regular-move projection, one move per line.
pub fn format_regular(aut: &Automaton, moves: &[RegularMove]) -> String {
    moves
        .iter()
        .map(|m| {
            format!(
                "{} {} {} {} {}\n",
                aut.state_name(m.state),
                m.pos,
                aut.token(m.read),
                aut.token(m.write),
                m.mv.token()
            )
        })
        .collect()
}
