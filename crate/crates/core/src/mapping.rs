//! Segment description maps and their directed composition.
//!
//! A [`SegmentMap`] summarises a block of frozen cells: for every way the
//! head can enter the block (at the left end moving right, or at the right
//! end moving left, in some state) it records the directed state in which
//! the head leaves, or [`LOOP`] if it never does.
//!
//! Two adjacent blocks described by `f` (left) and `g` (right) are combined
//! by walking the composition graph: six blocks of `|Q|` vertices, each
//! vertex with at most one successor. Marks left by the walk are reused to
//! answer every boundary-crossing query (the departure table) in the same
//! pass, so one composition touches each edge at most once.

use std::fmt;

use crate::model::{Automaton, Move, StateId, SymbolId, TapeSymbol};

/// Table value meaning "the head never leaves the segment".
pub const LOOP: u32 = u32::MAX;

/// A state together with the direction of the move that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectedState {
    pub state: StateId,
    pub dir: Move,
}

impl DirectedState {
    pub fn new(state: StateId, dir: Move) -> Self {
        DirectedState { state, dir }
    }

    pub fn right(q: u32) -> Self {
        DirectedState::new(StateId(q), Move::Right)
    }

    pub fn left(q: u32) -> Self {
        DirectedState::new(StateId(q), Move::Left)
    }

    /// `2 * state + (dir == Left)`.
    #[inline]
    pub fn index(self) -> u32 {
        2 * self.state.0 + u32::from(self.dir == Move::Left)
    }

    #[inline]
    pub fn from_index(idx: u32) -> Self {
        let dir = if idx & 1 == 1 {
            Move::Left
        } else {
            Move::Right
        };
        DirectedState::new(StateId(idx >> 1), dir)
    }
}

impl fmt::Display for DirectedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.state.0, self.dir.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MappingError {
    #[error("state-count mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("cannot describe an empty segment")]
    EmptySegment,
}

/// Total map from the `2|Q|` directed states to a directed state or [`LOOP`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SegmentMap {
    table: Box<[u32]>,
}

impl SegmentMap {
    /// Builds a map from raw canonical indices; `LOOP` is allowed as a value.
    pub fn from_table(table: Vec<u32>) -> Self {
        assert!(table.len().is_multiple_of(2), "table length must be 2|Q|");
        let limit = table.len() as u32;
        assert!(
            table.iter().all(|&v| v == LOOP || v < limit),
            "target out of range"
        );
        SegmentMap {
            table: table.into_boxed_slice(),
        }
    }

    pub fn from_fn(
        q_count: usize,
        mut f: impl FnMut(DirectedState) -> Option<DirectedState>,
    ) -> Self {
        let table = (0..2 * q_count as u32)
            .map(|i| f(DirectedState::from_index(i)).map_or(LOOP, DirectedState::index))
            .collect();
        SegmentMap { table }
    }

    /// The map of an empty, transparent block: every entry passes straight through.
    pub fn transparent(q_count: usize) -> Self {
        SegmentMap::from_fn(q_count, Some)
    }

    pub fn q_count(&self) -> usize {
        self.table.len() / 2
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, s: DirectedState) -> Option<DirectedState> {
        decode(self.table[s.index() as usize])
    }

    /// Debug dump, one `q,R -> p,L` line per input in canonical order.
    pub fn dump(&self, states: &[String]) -> String {
        let name = |ds: DirectedState| format!("{},{}", states[ds.state.index()], ds.dir.token());
        let mut out = String::new();
        for i in 0..self.table.len() as u32 {
            let from = name(DirectedState::from_index(i));
            match decode(self.table[i as usize]) {
                Some(to) => out.push_str(&format!("{from} -> {}\n", name(to))),
                None => out.push_str(&format!("{from} -> LOOP\n")),
            }
        }
        out
    }
}

impl fmt::Debug for SegmentMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.q_count()).map(|q| q.to_string()).collect();
        f.write_str(&self.dump(&names))
    }
}

#[inline]
fn decode(v: u32) -> Option<DirectedState> {
    (v != LOOP).then(|| DirectedState::from_index(v))
}

/// Exit of the combined segment for each boundary crossing, indexed by the
/// canonical index of the crossing: `->p` crosses rightward in state `p`,
/// `<-p` crosses leftward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepartureTable {
    table: Box<[u32]>,
}

impl DepartureTable {
    pub fn get(&self, s: DirectedState) -> Option<DirectedState> {
        decode(self.table[s.index() as usize])
    }
}

/// Departure lookup `D(f, g, s)`.
pub fn departure(dep: &DepartureTable, s: DirectedState) -> Option<DirectedState> {
    dep.get(s)
}

/// Cell description: the map of a single frozen cell holding `x`.
///
/// One step always leaves the cell, so the result never contains `LOOP`
/// and does not depend on the entry direction.
pub fn cf(aut: &Automaton, x: SymbolId) -> SegmentMap {
    let read = TapeSymbol::Letter(x);
    SegmentMap::from_fn(aut.state_count(), |s| {
        let t = aut
            .transition(s.state, read)
            .expect("cf needs a total transition table");
        Some(DirectedState::new(t.to, t.mv))
    })
}

/// Block ids of the composition graph.
const LIN_R: usize = 0;
const RIN_L: usize = 1;
const B_RIGHT: usize = 2;
const B_LEFT: usize = 3;
const LOUT_L: usize = 4;
const ROUT_R: usize = 5;

const NONE: u32 = u32::MAX;
const EMPTY: u32 = u32::MAX;

/// The glued graph of `f` (left part) and `g` (right part).
///
/// Blocks: `LinR` external entries into `f` moving right, `RinL` external
/// entries into `g` moving left, `Bright`/`Bleft` crossings of the internal
/// boundary, `LoutL`/`RoutR` external exits. Vertex `block * |Q| + q`.
#[derive(Clone, Debug)]
pub struct CompositionGraph {
    q_count: usize,
    next: Vec<u32>,
}

impl CompositionGraph {
    pub fn new(f: &SegmentMap, g: &SegmentMap) -> Result<Self, MappingError> {
        if f.q_count() != g.q_count() {
            return Err(MappingError::SizeMismatch(f.q_count(), g.q_count()));
        }
        let q_count = f.q_count();
        let mut next = vec![NONE; 6 * q_count];
        // Vertices reading f: external right-moving entries and leftward crossings.
        let via_f = |v: u32| match decode(v) {
            None => NONE,
            Some(DirectedState {
                state,
                dir: Move::Right,
            }) => (B_RIGHT * q_count + state.index()) as u32,
            Some(DirectedState {
                state,
                dir: Move::Left,
            }) => (LOUT_L * q_count + state.index()) as u32,
        };
        let via_g = |v: u32| match decode(v) {
            None => NONE,
            Some(DirectedState {
                state,
                dir: Move::Right,
            }) => (ROUT_R * q_count + state.index()) as u32,
            Some(DirectedState {
                state,
                dir: Move::Left,
            }) => (B_LEFT * q_count + state.index()) as u32,
        };
        for q in 0..q_count {
            let right = DirectedState::right(q as u32).index() as usize;
            let left = DirectedState::left(q as u32).index() as usize;
            next[LIN_R * q_count + q] = via_f(f.table[right]);
            next[B_LEFT * q_count + q] = via_f(f.table[left]);
            next[B_RIGHT * q_count + q] = via_g(g.table[right]);
            next[RIN_L * q_count + q] = via_g(g.table[left]);
        }
        Ok(CompositionGraph { q_count, next })
    }

    pub fn vertex_count(&self) -> usize {
        self.next.len()
    }

    /// Successor of `v`, `None` for out-degree 0.
    pub fn next(&self, v: usize) -> Option<usize> {
        let n = self.next[v];
        (n != NONE).then_some(n as usize)
    }

    fn block(&self, v: usize) -> usize {
        v / self.q_count
    }

    /// Directed exit for a vertex of `LoutL` or `RoutR`.
    fn exit(&self, v: usize) -> Option<DirectedState> {
        let q = (v % self.q_count) as u32;
        match self.block(v) {
            LOUT_L => Some(DirectedState::left(q)),
            ROUT_R => Some(DirectedState::right(q)),
            _ => None,
        }
    }
}

/// Result of [`compose_full`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Composition {
    pub map: SegmentMap,
    pub departure: DepartureTable,
    /// Edges traversed while computing both tables.
    pub edges: usize,
}

struct Walker<'g> {
    graph: &'g CompositionGraph,
    marks: Vec<u32>,
    /// Results by label: `0..2|Q|` are external entries, `2|Q|..4|Q|`
    /// are boundary crossings.
    results: Vec<u32>,
    edges: usize,
}

impl Walker<'_> {
    /// Follows successors from `u`, marking unmarked internal vertices with
    /// `label`, until an exit, a dead end or a marked vertex.
    fn walk(&mut self, label: u32, mut u: Option<usize>) -> u32 {
        loop {
            let Some(v) = u else { return LOOP };
            if let Some(exit) = self.graph.exit(v) {
                return exit.index();
            }
            match self.marks[v] {
                EMPTY => {
                    self.marks[v] = label;
                    u = self.graph.next(v);
                    if u.is_some() {
                        self.edges += 1;
                    }
                }
                m if m == label => return LOOP,
                m => return self.results[m as usize],
            }
        }
    }
}

/// Computes `h = f ◇ g` and the departure table of the pair.
///
/// Entries are processed in ascending canonical order of `LinR` then
/// `RinL`; boundary vertices not reached by those walks are then walked
/// in ascending canonical order with their own labels.
pub fn compose_full(f: &SegmentMap, g: &SegmentMap) -> Result<Composition, MappingError> {
    let graph = CompositionGraph::new(f, g)?;
    let q_count = graph.q_count;
    let two_q = 2 * q_count;
    let mut w = Walker {
        graph: &graph,
        marks: vec![EMPTY; graph.vertex_count()],
        results: vec![LOOP; 2 * two_q],
        edges: 0,
    };

    let origins = (0..q_count)
        .map(|q| (LIN_R * q_count + q, DirectedState::right(q as u32)))
        .chain((0..q_count).map(|q| (RIN_L * q_count + q, DirectedState::left(q as u32))));
    for (vertex, entry) in origins {
        let label = entry.index();
        let first = graph.next(vertex);
        if first.is_some() {
            w.edges += 1;
        }
        let r = w.walk(label, first);
        w.results[label as usize] = r;
    }
    let h: Vec<u32> = w.results[..two_q].to_vec();

    let mut dep = vec![LOOP; two_q];
    for idx in 0..two_q as u32 {
        let s = DirectedState::from_index(idx);
        let block = if s.dir == Move::Right {
            B_RIGHT
        } else {
            B_LEFT
        };
        let vertex = block * q_count + s.state.index();
        dep[idx as usize] = match w.marks[vertex] {
            EMPTY => {
                let label = two_q as u32 + idx;
                let r = w.walk(label, Some(vertex));
                w.results[label as usize] = r;
                r
            }
            m => w.results[m as usize],
        };
    }

    Ok(Composition {
        map: SegmentMap {
            table: h.into_boxed_slice(),
        },
        departure: DepartureTable {
            table: dep.into_boxed_slice(),
        },
        edges: w.edges,
    })
}

/// `f ◇ g` without the departure table.
pub fn compose(f: &SegmentMap, g: &SegmentMap) -> Result<SegmentMap, MappingError> {
    compose_full(f, g).map(|c| c.map)
}

pub fn apply(f: &SegmentMap, s: DirectedState) -> Option<DirectedState> {
    f.apply(s)
}

/// Describes a block of frozen letters by walking the head over it from
/// each of the `2|Q|` entries. Independent of the composition algorithm.
pub fn describe_segment(aut: &Automaton, letters: &[SymbolId]) -> Result<SegmentMap, MappingError> {
    if letters.is_empty() {
        return Err(MappingError::EmptySegment);
    }
    let q_count = aut.state_count();
    let len = letters.len();
    let mut seen = vec![u32::MAX; len * q_count];
    Ok(SegmentMap::from_fn(q_count, |entry| {
        let stamp = entry.index();
        let mut pos = if entry.dir == Move::Right { 0 } else { len - 1 };
        let mut q = entry.state;
        loop {
            let key = pos * q_count + q.index();
            if seen[key] == stamp {
                return None;
            }
            seen[key] = stamp;
            let t = aut
                .transition(q, TapeSymbol::Letter(letters[pos]))
                .expect("describe_segment needs a total transition table");
            q = t.to;
            match t.mv {
                Move::Left if pos == 0 => return Some(DirectedState::new(q, Move::Left)),
                Move::Left => pos -= 1,
                Move::Right if pos + 1 == len => return Some(DirectedState::new(q, Move::Right)),
                Move::Right => pos += 1,
            }
        }
    }))
}
