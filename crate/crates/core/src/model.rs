//! Machine descriptions for deterministic d-limited and d(n)-limited automata.
//!
//! An [`Automaton`] is a single-tape machine confined to the input cells and
//! the two end-markers `|>` and `<|`. In [`Mode::Ranked`] every tape letter
//! carries a rank `0..=d`; visiting a letter of rank `r < d` must rewrite it
//! with a letter of strictly larger rank, and letters of rank `d` are frozen.
//! In [`Mode::Counted`] letters carry no rank: each cell keeps a visit
//! counter and is frozen once it has been visited `d(n)` times.
//!
//! Markers are never members of the tape alphabet. The transition table is
//! indexed by `(state, column)` where column 0 is `|>`, columns `1..=T` are
//! the tape symbols in declaration order and column `T + 1` is `<|`.

use std::fmt;

/// Token reserved for the left end-marker.
pub const LEFT_MARKER: &str = "|>";
/// Token reserved for the right end-marker.
pub const RIGHT_MARKER: &str = "<|";

const RESERVED: [&str; 5] = [LEFT_MARKER, RIGHT_MARKER, "->", "L", "R"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

impl StateId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub u32);

impl SymbolId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Head movement. The low bit of a directed state's canonical index is
/// `0` for `Right` and `1` for `Left`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Right,
    Left,
}

impl Move {
    pub fn token(self) -> &'static str {
        match self {
            Move::Left => "L",
            Move::Right => "R",
        }
    }
}

/// Content a transition can read or write.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TapeSymbol {
    LeftMarker,
    Letter(SymbolId),
    RightMarker,
}

impl TapeSymbol {
    pub fn is_marker(self) -> bool {
        !matches!(self, TapeSymbol::Letter(_))
    }

    pub fn letter(self) -> Option<SymbolId> {
        match self {
            TapeSymbol::Letter(s) => Some(s),
            _ => None,
        }
    }
}

/// Per-cell rewrite budget as a function of the input length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DLimit {
    Const(u32),
    Log2,
    Sqrt,
    Id,
}

impl DLimit {
    /// Evaluates `d(n)`.
    pub fn eval(self, n: usize) -> usize {
        match self {
            DLimit::Const(k) => k as usize,
            DLimit::Log2 => {
                if n == 0 {
                    0
                } else {
                    n.ilog2() as usize
                }
            }
            DLimit::Sqrt => n.isqrt(),
            DLimit::Id => n,
        }
    }
}

impl fmt::Display for DLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DLimit::Const(k) => write!(f, "{k}"),
            DLimit::Log2 => f.write_str("log2"),
            DLimit::Sqrt => f.write_str("sqrt"),
            DLimit::Id => f.write_str("id"),
        }
    }
}

/// `d(n)` for a limit spec and input length.
pub fn d_of(spec: DLimit, n: usize) -> usize {
    spec.eval(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Ranked,
    Counted,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub name: String,
    /// Present in ranked mode only.
    pub rank: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub to: StateId,
    pub write: TapeSymbol,
    pub mv: Move,
}

/// Returns true when `tok` may name a symbol or a state.
///
/// Besides whitespace and the reserved tokens, `#` (comments), `:` (rank
/// suffix) and `,` (token-separated words) are excluded.
pub fn is_valid_token(tok: &str) -> bool {
    !tok.is_empty()
        && !tok
            .chars()
            .any(|c| c.is_whitespace() || c == '#' || c == ':' || c == ',')
        && !RESERVED.contains(&tok)
}

/// A complete machine description.
///
/// Values are structurally well formed (every id in range) when built by
/// the parser or the zoo; the definitional constraints are checked by
/// [`validate_automaton`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    pub mode: Mode,
    pub dlimit: DLimit,
    pub states: Vec<String>,
    /// Input symbols in declaration order, as ids into `tape`.
    pub input: Vec<SymbolId>,
    pub tape: Vec<Symbol>,
    pub start: StateId,
    /// Sorted and deduplicated.
    pub accepting: Vec<StateId>,
    /// Row-major `(state, column)`; `None` marks a missing entry.
    pub delta: Vec<Option<Transition>>,
}

impl Automaton {
    /// Creates a machine with an empty transition table.
    pub fn new(
        mode: Mode,
        dlimit: DLimit,
        states: Vec<String>,
        tape: Vec<Symbol>,
        input: Vec<SymbolId>,
        start: StateId,
        mut accepting: Vec<StateId>,
    ) -> Self {
        accepting.sort_unstable();
        accepting.dedup();
        let delta = vec![None; states.len() * (tape.len() + 2)];
        Automaton {
            mode,
            dlimit,
            states,
            input,
            tape,
            start,
            accepting,
            delta,
        }
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn column_count(&self) -> usize {
        self.tape.len() + 2
    }

    pub fn column(&self, sym: TapeSymbol) -> usize {
        match sym {
            TapeSymbol::LeftMarker => 0,
            TapeSymbol::Letter(s) => s.index() + 1,
            TapeSymbol::RightMarker => self.tape.len() + 1,
        }
    }

    pub fn column_symbol(&self, col: usize) -> TapeSymbol {
        if col == 0 {
            TapeSymbol::LeftMarker
        } else if col == self.tape.len() + 1 {
            TapeSymbol::RightMarker
        } else {
            TapeSymbol::Letter(SymbolId((col - 1) as u32))
        }
    }

    pub fn transition(&self, q: StateId, read: TapeSymbol) -> Option<&Transition> {
        self.delta[q.index() * self.column_count() + self.column(read)].as_ref()
    }

    pub fn set(&mut self, q: StateId, read: TapeSymbol, t: Transition) {
        let idx = q.index() * self.column_count() + self.column(read);
        self.delta[idx] = Some(t);
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting.binary_search(&q).is_ok()
    }

    pub fn rank(&self, s: SymbolId) -> Option<u32> {
        self.tape[s.index()].rank
    }

    /// Constant limit of a ranked machine, `None` for other limits.
    pub fn const_d(&self) -> Option<u32> {
        match self.dlimit {
            DLimit::Const(k) => Some(k),
            _ => None,
        }
    }

    pub fn d_for(&self, n: usize) -> usize {
        self.dlimit.eval(n)
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states
            .iter()
            .position(|s| s == name)
            .map(|i| StateId(i as u32))
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymbolId> {
        self.tape
            .iter()
            .position(|s| s.name == name)
            .map(|i| SymbolId(i as u32))
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.index()]
    }

    pub fn token(&self, sym: TapeSymbol) -> &str {
        match sym {
            TapeSymbol::LeftMarker => LEFT_MARKER,
            TapeSymbol::RightMarker => RIGHT_MARKER,
            TapeSymbol::Letter(s) => &self.tape[s.index()].name,
        }
    }

    pub fn is_input(&self, s: SymbolId) -> bool {
        self.input.contains(&s)
    }

    /// Length of the machine's description: the token count of its
    /// canonical serialization.
    pub fn description_len(&self) -> usize {
        crate::format::serialize_machine(self)
            .lines()
            .map(|l| l.split_whitespace().count())
            .sum()
    }

    /// Parses a word given on the command line.
    ///
    /// When every input symbol is a single character the word is read one
    /// character per symbol, unless it contains a comma; otherwise it is a
    /// comma-separated token list. The empty string is the empty word.
    pub fn parse_word(&self, text: &str) -> Result<Vec<SymbolId>, WordError> {
        if text.is_empty() {
            return Ok(Vec::new());
        }
        let single = self
            .input
            .iter()
            .all(|s| self.tape[s.index()].name.chars().count() == 1);
        if single && !text.contains(',') {
            let mut buf = [0u8; 4];
            text.chars()
                .map(|c| self.input_symbol(c.encode_utf8(&mut buf)))
                .collect()
        } else {
            self.parse_tokens(text)
        }
    }

    /// Parses a comma-separated token list.
    pub fn parse_tokens(&self, text: &str) -> Result<Vec<SymbolId>, WordError> {
        if text.is_empty() {
            return Ok(Vec::new());
        }
        text.split(',')
            .map(|t| self.input_symbol(t.trim()))
            .collect()
    }

    fn input_symbol(&self, tok: &str) -> Result<SymbolId, WordError> {
        self.symbol_id(tok)
            .filter(|s| self.is_input(*s))
            .ok_or_else(|| WordError(tok.to_string()))
    }

    /// Renders a word with the same convention [`Automaton::parse_word`] reads.
    pub fn format_word(&self, word: &[SymbolId]) -> String {
        let single = self
            .input
            .iter()
            .all(|s| self.tape[s.index()].name.chars().count() == 1);
        let names = word.iter().map(|s| self.tape[s.index()].name.as_str());
        if single {
            names.collect()
        } else {
            names.collect::<Vec<_>>().join(",")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("symbol `{0}` is not in the input alphabet")]
pub struct WordError(pub String);

/// Decides when a cell stops being writable, for one run of length `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FreezeRule {
    /// Ranked machine with constant `d`. With `d == 0` every cell freezes
    /// after its first visit.
    Ranked { d: u32 },
    /// Counted machine: cells freeze once visited `limit` times.
    Counted { limit: usize },
}

impl FreezeRule {
    pub fn for_run(aut: &Automaton, n: usize) -> Self {
        match aut.mode {
            Mode::Ranked => FreezeRule::Ranked {
                d: aut.d_for(n) as u32,
            },
            Mode::Counted => FreezeRule::Counted {
                limit: aut.d_for(n),
            },
        }
    }

    /// Whether a cell holding `letter` after `visits` visits is frozen.
    pub fn is_frozen(self, aut: &Automaton, letter: SymbolId, visits: u64) -> bool {
        match self {
            FreezeRule::Ranked { d: 0 } => visits >= 1,
            FreezeRule::Ranked { d } => aut.rank(letter) == Some(d),
            FreezeRule::Counted { limit } => visits >= limit as u64,
        }
    }

    pub fn d(self) -> usize {
        match self {
            FreezeRule::Ranked { d } => d as usize,
            FreezeRule::Counted { limit } => limit,
        }
    }
}

/// Validation rule identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    /// A `(state, symbol)` pair without a transition.
    Totality,
    /// `|>` must move right and `<|` must move left.
    MarkerDirection,
    /// A marker must be rewritten with itself, and only markers write markers.
    MarkerWrite,
    /// Letters of rank `d` (every letter when `d == 0`) must be rewritten
    /// with themselves.
    FrozenRewrite,
    /// A letter of rank `r < d` must become a letter of rank `r'` with `r < r' <= d`.
    RankIncrease,
    RankOutOfRange,
    MissingRank,
    UnexpectedRank,
    InputRank,
    /// Ranked machines need a constant `d`.
    RankedLimit,
    BadReference,
    DuplicateName,
    NoStates,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Totality => "Totality",
            Rule::MarkerDirection => "MarkerDirection",
            Rule::MarkerWrite => "MarkerWrite",
            Rule::FrozenRewrite => "FrozenRewrite",
            Rule::RankIncrease => "RankIncrease",
            Rule::RankOutOfRange => "RankOutOfRange",
            Rule::MissingRank => "MissingRank",
            Rule::UnexpectedRank => "UnexpectedRank",
            Rule::InputRank => "InputRank",
            Rule::RankedLimit => "RankedLimit",
            Rule::BadReference => "BadReference",
            Rule::DuplicateName => "DuplicateName",
            Rule::NoStates => "NoStates",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub state: Option<StateId>,
    pub read: Option<TapeSymbol>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return writeln!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "{}: {}", v.rule.name(), v.message)?;
        }
        Ok(())
    }
}

/// Checks every definitional constraint; violations are returned as data.
pub fn validate_automaton(aut: &Automaton) -> ValidationReport {
    let mut out = Vec::new();
    let mut push = |rule, state, read, message: String| {
        out.push(Violation {
            rule,
            state,
            read,
            message,
        })
    };

    let q_count = aut.states.len();
    if q_count == 0 {
        push(Rule::NoStates, None, None, "machine has no states".into());
    }
    for (i, name) in aut.states.iter().enumerate() {
        if aut.states[..i].contains(name) {
            push(
                Rule::DuplicateName,
                None,
                None,
                format!("state `{name}` declared twice"),
            );
        }
    }
    for (i, sym) in aut.tape.iter().enumerate() {
        if aut.tape[..i].iter().any(|s| s.name == sym.name) {
            push(
                Rule::DuplicateName,
                None,
                None,
                format!("symbol `{}` declared twice", sym.name),
            );
        }
    }
    if aut.start.index() >= q_count {
        push(
            Rule::BadReference,
            None,
            None,
            "start state out of range".into(),
        );
    }
    if aut.accepting.iter().any(|q| q.index() >= q_count) {
        push(
            Rule::BadReference,
            None,
            None,
            "accepting state out of range".into(),
        );
    }
    if aut.input.iter().any(|s| s.index() >= aut.tape.len()) {
        push(
            Rule::BadReference,
            None,
            None,
            "input symbol not in tape alphabet".into(),
        );
    }
    if aut.delta.len() != q_count * aut.column_count() {
        push(
            Rule::BadReference,
            None,
            None,
            "transition table has the wrong shape".into(),
        );
        return ValidationReport { violations: out };
    }

    let d = match (aut.mode, aut.dlimit) {
        (Mode::Ranked, DLimit::Const(k)) => Some(k),
        (Mode::Ranked, other) => {
            push(
                Rule::RankedLimit,
                None,
                None,
                format!("ranked machine needs a constant d, got `{other}`"),
            );
            None
        }
        (Mode::Counted, _) => None,
    };

    for (i, sym) in aut.tape.iter().enumerate() {
        let id = SymbolId(i as u32);
        match (aut.mode, sym.rank) {
            (Mode::Ranked, None) => push(
                Rule::MissingRank,
                None,
                Some(TapeSymbol::Letter(id)),
                format!("symbol `{}` has no rank", sym.name),
            ),
            (Mode::Ranked, Some(r)) => {
                if let Some(d) = d {
                    if r > d {
                        push(
                            Rule::RankOutOfRange,
                            None,
                            Some(TapeSymbol::Letter(id)),
                            format!("symbol `{}` has rank {r} > d = {d}", sym.name),
                        );
                    }
                }
                if r != 0 && aut.is_input(id) {
                    push(
                        Rule::InputRank,
                        None,
                        Some(TapeSymbol::Letter(id)),
                        format!("input symbol `{}` has rank {r}", sym.name),
                    );
                }
            }
            (Mode::Counted, Some(_)) => push(
                Rule::UnexpectedRank,
                None,
                Some(TapeSymbol::Letter(id)),
                format!("counted machine symbol `{}` carries a rank", sym.name),
            ),
            (Mode::Counted, None) => {}
        }
    }

    for qi in 0..q_count {
        let q = StateId(qi as u32);
        for col in 0..aut.column_count() {
            let read = aut.column_symbol(col);
            let at = || format!("({}, {})", aut.states[qi], aut.token(read));
            let Some(t) = aut.transition(q, read) else {
                push(
                    Rule::Totality,
                    Some(q),
                    Some(read),
                    format!("no transition for {}", at()),
                );
                continue;
            };
            if t.to.index() >= q_count
                || t.write
                    .letter()
                    .is_some_and(|s| s.index() >= aut.tape.len())
            {
                push(
                    Rule::BadReference,
                    Some(q),
                    Some(read),
                    format!(
                        "transition for {} references an unknown state or symbol",
                        at()
                    ),
                );
                continue;
            }
            match read {
                TapeSymbol::LeftMarker | TapeSymbol::RightMarker => {
                    if t.write != read {
                        push(
                            Rule::MarkerWrite,
                            Some(q),
                            Some(read),
                            format!("{} must rewrite the marker with itself", at()),
                        );
                    }
                    let want = if read == TapeSymbol::LeftMarker {
                        Move::Right
                    } else {
                        Move::Left
                    };
                    if t.mv != want {
                        push(
                            Rule::MarkerDirection,
                            Some(q),
                            Some(read),
                            format!("{} must move {}", at(), want.token()),
                        );
                    }
                }
                TapeSymbol::Letter(a) => {
                    let Some(w) = t.write.letter() else {
                        push(
                            Rule::MarkerWrite,
                            Some(q),
                            Some(read),
                            format!("{} writes an end-marker", at()),
                        );
                        continue;
                    };
                    let (Some(d), Some(r), Some(rw)) = (d, aut.rank(a), aut.rank(w)) else {
                        continue;
                    };
                    if d == 0 || r >= d {
                        if w != a {
                            push(
                                Rule::FrozenRewrite,
                                Some(q),
                                Some(read),
                                format!("{} rewrites a frozen letter", at()),
                            );
                        }
                    } else if !(r < rw && rw <= d) {
                        push(
                            Rule::RankIncrease,
                            Some(q),
                            Some(read),
                            format!("{} writes rank {rw}, needs {} ..= {d}", at(), r + 1),
                        );
                    }
                }
            }
        }
    }
    ValidationReport { violations: out }
}
