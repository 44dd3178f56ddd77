//! Linear-time engine: the automaton simulated by a deleting machine.
//!
//! The tape is a doubly linked list over a fixed arena of `n + 2` cells.
//! Whenever a cell freezes, its content is replaced by the [`SegmentMap`]
//! of that cell and merged with adjacent map cells (a deletion scan), so a
//! maximal frozen block is always represented by one map cell. Crossing a
//! frozen block then costs one table lookup instead of a walk.
//!
//! Two situations are not covered by the classic three-case loop and are
//! handled here explicitly:
//!
//! * a write that jumps straight to the top rank freezes the cell too; the
//!   freeze test looks at the written letter, not at the rank read;
//! * a loop that bounces off an end-marker never shows up as `LOOP` in a
//!   map. A `(cell, directed state)` set, cleared on every write, catches it.
//!   Between two writes the head only alternates between markers and map
//!   cells next to them, so the set stays at `O(|Q|)` entries.

use crate::mapping::{cf, compose_full, describe_segment, DirectedState, SegmentMap};
use crate::model::{Automaton, FreezeRule, Move, StateId, SymbolId, TapeSymbol};
use crate::naive::{check_word, StretchDetector};
use crate::trace::{Read, RejectReason, RunError, RunOutcome, StepCase, StepRecord, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    LeftMarker,
    RightMarker,
    Letter { sym: SymbolId, visits: u64 },
    Map(SegmentMap),
}

#[derive(Clone, Debug)]
struct Node {
    prev: usize,
    next: usize,
    live: bool,
    payload: Payload,
}

/// Doubly linked tape. Cell indices never change; deleted cells are
/// unlinked and never reused.
#[derive(Clone, Debug)]
pub struct ListTape {
    nodes: Vec<Node>,
}

impl ListTape {
    pub fn new(word: &[SymbolId]) -> Self {
        let n = word.len();
        let mut nodes = Vec::with_capacity(n + 2);
        nodes.push(Node {
            prev: 0,
            next: 1,
            live: true,
            payload: Payload::LeftMarker,
        });
        for (i, &sym) in word.iter().enumerate() {
            nodes.push(Node {
                prev: i,
                next: i + 2,
                live: true,
                payload: Payload::Letter { sym, visits: 0 },
            });
        }
        nodes.push(Node {
            prev: n,
            next: n + 1,
            live: true,
            payload: Payload::RightMarker,
        });
        ListTape { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn right_marker(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn prev(&self, i: usize) -> usize {
        self.nodes[i].prev
    }

    pub fn next(&self, i: usize) -> usize {
        self.nodes[i].next
    }

    pub fn payload(&self, i: usize) -> &Payload {
        &self.nodes[i].payload
    }

    pub fn is_live(&self, i: usize) -> bool {
        self.nodes[i].live
    }

    pub fn is_map(&self, i: usize) -> bool {
        matches!(self.nodes[i].payload, Payload::Map(_))
    }

    /// Live cells from left to right.
    pub fn iter_live(&self) -> impl Iterator<Item = usize> + '_ {
        let end = self.right_marker();
        let mut cur = Some(0);
        std::iter::from_fn(move || {
            let i = cur?;
            cur = (i != end).then(|| self.nodes[i].next);
            Some(i)
        })
    }

    /// Removes interior cell `i` from the list.
    fn unlink(&mut self, i: usize) {
        debug_assert!(i != 0 && i != self.right_marker());
        let (p, n) = (self.nodes[i].prev, self.nodes[i].next);
        self.nodes[p].next = n;
        self.nodes[n].prev = p;
        self.nodes[i].live = false;
    }

    fn map_at(&self, i: usize) -> Option<&SegmentMap> {
        match &self.nodes[i].payload {
            Payload::Map(f) => Some(f),
            _ => None,
        }
    }
}

/// Initial tape: markers at `0` and `n + 1`, letters with zero visits between.
pub fn init_tape(word: &[SymbolId]) -> ListTape {
    ListTape::new(word)
}

/// Result of a deletion scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScanResult {
    /// Where the head goes next, `None` if it never leaves the merged block.
    pub exit: Option<DirectedState>,
    pub merged_left: bool,
    pub merged_right: bool,
    /// Edges traversed by the (at most two) compositions.
    pub edges: usize,
    pub max_edges: usize,
}

/// Test hook: seeded faults for mutation smoke tests of the harness.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fault {
    #[default]
    None,
    /// Never merge with a map on the right.
    SkipRightMerge,
}

/// Stores `g` (the map of the just-frozen cell `i`) in `i`, merging it with
/// map neighbours left then right. `p` is the directed result of the move
/// made at `i`; crossings into a merged neighbour are resolved through the
/// departure table of that merge. Returns immediately on a `LOOP` departure.
pub fn deletion_scan(tape: &mut ListTape, i: usize, p: DirectedState, g: SegmentMap) -> ScanResult {
    deletion_scan_with(tape, i, p, g, Fault::None)
}

fn deletion_scan_with(
    tape: &mut ListTape,
    i: usize,
    mut p: DirectedState,
    mut g: SegmentMap,
    fault: Fault,
) -> ScanResult {
    let mut res = ScanResult {
        exit: None,
        merged_left: false,
        merged_right: false,
        edges: 0,
        max_edges: 0,
    };
    let left = tape.prev(i);
    if let Some(f) = tape.map_at(left) {
        let c = compose_full(f, &g).expect("maps of one machine share |Q|");
        res.edges += c.edges;
        res.max_edges = res.max_edges.max(c.edges);
        if p.dir == Move::Left {
            match c.departure.get(p) {
                Some(d) => p = d,
                None => return res,
            }
        }
        g = c.map;
        tape.unlink(left);
        res.merged_left = true;
    }
    let right = tape.next(i);
    if fault != Fault::SkipRightMerge {
        if let Some(h) = tape.map_at(right) {
            let c = compose_full(&g, h).expect("maps of one machine share |Q|");
            res.edges += c.edges;
            res.max_edges = res.max_edges.max(c.edges);
            if p.dir == Move::Right {
                match c.departure.get(p) {
                    Some(d) => p = d,
                    None => return res,
                }
            }
            g = c.map;
            tape.unlink(right);
            res.merged_right = true;
        }
    }
    tape.nodes[i].payload = Payload::Map(g);
    res.exit = Some(p);
    res
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LinearOptions {
    pub trace: bool,
    /// Keep the simulated machine's tape alongside and check every new map
    /// against a direct walk over the block it represents.
    pub shadow: bool,
    pub max_steps: Option<u64>,
    #[doc(hidden)]
    pub fault: Fault,
}

/// Detector keys: letters and markers by `(cell, state)`, maps by
/// `(cell, directed state)`.
struct Keys {
    q_count: usize,
    cells: usize,
}

impl Keys {
    fn total(&self) -> usize {
        self.cells * self.q_count * 3
    }

    fn cell(&self, pos: usize, q: StateId) -> usize {
        pos * self.q_count + q.index()
    }

    fn map(&self, pos: usize, s: DirectedState) -> usize {
        self.cells * self.q_count + pos * 2 * self.q_count + s.index() as usize
    }
}

/// Runs `aut` on `word` with the deleting-machine simulation.
pub fn run_linear(
    aut: &Automaton,
    word: &[SymbolId],
    opts: LinearOptions,
) -> Result<RunOutcome, RunError> {
    check_word(aut, word)?;
    let n = word.len();
    let rule = FreezeRule::for_run(aut, n);
    let q_count = aut.state_count();
    let mut out = RunOutcome::new(n, rule.d(), opts.trace);
    let mut tape = ListTape::new(word);
    let keys = Keys {
        q_count,
        cells: n + 2,
    };
    let mut detector = StretchDetector::new(keys.total());
    let mut shadow: Option<Vec<SymbolId>> = opts.shadow.then(|| word.to_vec());
    let right = n + 1;

    let mut pos = if n == 0 { right } else { 1 };
    let mut cur = DirectedState::new(aut.start, Move::Right);
    loop {
        if pos == right && aut.is_accepting(cur.state) {
            out.verdict = Verdict::Accept;
            return Ok(out);
        }
        if opts.max_steps.is_some_and(|m| out.steps >= m) {
            return Err(RunError::BudgetExceeded(out.steps));
        }
        let q = cur.state;
        let step = out.steps;
        let (p, record) = match tape.payload(pos).clone() {
            Payload::LeftMarker | Payload::RightMarker => {
                let read = if pos == 0 {
                    TapeSymbol::LeftMarker
                } else {
                    TapeSymbol::RightMarker
                };
                if !detector.insert(keys.cell(pos, q)) {
                    out.verdict = Verdict::Reject(RejectReason::LoopDetected);
                    return Ok(out);
                }
                let t = *aut
                    .transition(q, read)
                    .ok_or(RunError::MissingTransition { state: q, read })?;
                out.moves.marker += 1;
                out.cell_visits[pos] += 1;
                let rec = StepRecord {
                    step,
                    pos,
                    state: q,
                    read: Read::Symbol(read),
                    write: Read::Symbol(read),
                    mv: t.mv,
                    frozen: false,
                    case: StepCase::AMove,
                };
                (DirectedState::new(t.to, t.mv), rec)
            }
            Payload::Letter { sym, visits } => {
                let read = TapeSymbol::Letter(sym);
                let t = *aut
                    .transition(q, read)
                    .ok_or(RunError::MissingTransition { state: q, read })?;
                let frozen_before = rule.is_frozen(aut, sym, visits);
                let written = if frozen_before {
                    sym
                } else {
                    t.write
                        .letter()
                        .ok_or(RunError::MissingTransition { state: q, read })?
                };
                if frozen_before {
                    // Only a counted machine with d(n) = 0 gets here.
                    if !detector.insert(keys.cell(pos, q)) {
                        out.verdict = Verdict::Reject(RejectReason::LoopDetected);
                        return Ok(out);
                    }
                } else {
                    detector.clear();
                    out.writes += 1;
                    out.cell_writes[pos] += 1;
                    if let Some(sh) = shadow.as_mut() {
                        sh[pos - 1] = written;
                    }
                }
                out.cell_visits[pos] += 1;
                let visits = visits + 1;
                let p = DirectedState::new(t.to, t.mv);
                let base = StepRecord {
                    step,
                    pos,
                    state: q,
                    read: Read::Symbol(read),
                    write: Read::Symbol(TapeSymbol::Letter(written)),
                    mv: t.mv,
                    frozen: frozen_before,
                    case: StepCase::AMove,
                };
                if rule.is_frozen(aut, written, visits) {
                    out.moves.scans += 1;
                    let g = cf(aut, written);
                    let scan = deletion_scan_with(&mut tape, pos, p, g, opts.fault);
                    out.compose_edges += scan.edges as u64;
                    out.max_compose_edges = out.max_compose_edges.max(scan.max_edges);
                    let segment = (tape.prev(pos) + 1, tape.next(pos) - 1);
                    let rec = StepRecord {
                        case: StepCase::Scan {
                            merged_left: scan.merged_left,
                            merged_right: scan.merged_right,
                            segment,
                        },
                        ..base
                    };
                    let Some(exit) = scan.exit else {
                        push_trace(&mut out, rec);
                        out.steps += 1;
                        out.verdict = Verdict::Reject(RejectReason::MapLoop);
                        return Ok(out);
                    };
                    if let Some(sh) = shadow.as_ref() {
                        check_shadow(aut, &tape, sh, pos, step)?;
                        out.shadow_checks += 1;
                    }
                    (exit, rec)
                } else {
                    tape.nodes[pos].payload = Payload::Letter {
                        sym: written,
                        visits,
                    };
                    out.moves.letter += 1;
                    (p, base)
                }
            }
            Payload::Map(f) => {
                if !detector.insert(keys.map(pos, cur)) {
                    out.verdict = Verdict::Reject(RejectReason::LoopDetected);
                    return Ok(out);
                }
                out.moves.map_jumps += 1;
                let Some(p) = f.apply(cur) else {
                    out.steps += 1;
                    out.verdict = Verdict::Reject(RejectReason::MapLoop);
                    return Ok(out);
                };
                let rec = StepRecord {
                    step,
                    pos,
                    state: q,
                    read: Read::Map,
                    write: Read::Map,
                    mv: p.dir,
                    frozen: true,
                    case: StepCase::MapJump,
                };
                (p, rec)
            }
        };
        push_trace(&mut out, record);
        out.steps += 1;
        pos = match p.dir {
            Move::Left if pos == 0 => return Err(RunError::HeadOffTape(out.steps)),
            Move::Left => tape.prev(pos),
            Move::Right if pos == right => return Err(RunError::HeadOffTape(out.steps)),
            Move::Right => tape.next(pos),
        };
        cur = p;
    }
}

fn push_trace(out: &mut RunOutcome, rec: StepRecord) {
    if let Some(t) = out.trace.as_mut() {
        t.push(rec);
    }
}

/// Compares the new map at `i` with a direct walk over the simulated
/// machine's tape, and checks that no map has a map neighbour.
fn check_shadow(
    aut: &Automaton,
    tape: &ListTape,
    shadow: &[SymbolId],
    i: usize,
    step: u64,
) -> Result<(), RunError> {
    let mismatch = |detail: String| Err(RunError::ShadowMismatch { step, detail });
    let (l, r) = (tape.prev(i), tape.next(i));
    if tape.is_map(l) || tape.is_map(r) {
        return mismatch(format!("map cell {i} has a map neighbour"));
    }
    let Some(stored) = tape.map_at(i) else {
        return mismatch(format!("cell {i} holds no map after a scan"));
    };
    let block = &shadow[l..r - 1];
    let want = describe_segment(aut, block).expect("block is non-empty");
    if *stored != want {
        return mismatch(format!(
            "map at cell {i} differs from block [{}, {}]",
            l + 1,
            r - 1
        ));
    }
    Ok(())
}
