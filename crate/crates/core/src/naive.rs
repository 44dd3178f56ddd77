//! Reference engine: runs the automaton step by step on a plain tape.
//!
//! The engine is deliberately direct. Loop detection is exact: between two
//! writes the tape content is constant, so a repeated `(position, state)`
//! pair inside one write-free stretch means the machine cycles forever.

use crate::model::{Automaton, FreezeRule, Move, SymbolId, TapeSymbol};
use crate::trace::{Read, RejectReason, RunError, RunOutcome, StepCase, StepRecord, Verdict};

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub trace: bool,
    pub max_steps: Option<u64>,
}

/// Set of configuration keys seen since the last write.
///
/// Clearing bumps a generation counter instead of touching the table.
#[derive(Clone, Debug)]
pub struct StretchDetector {
    stamps: Vec<u32>,
    generation: u32,
}

impl StretchDetector {
    pub fn new(keys: usize) -> Self {
        StretchDetector {
            stamps: vec![0; keys],
            generation: 1,
        }
    }

    pub fn clear(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamps.fill(0);
            self.generation = 1;
        }
    }

    /// Records `key`; returns false if it was already present.
    pub fn insert(&mut self, key: usize) -> bool {
        let slot = &mut self.stamps[key];
        if *slot == self.generation {
            false
        } else {
            *slot = self.generation;
            true
        }
    }
}

/// Tape of the reference engine: cell 0 is `|>`, cell `n + 1` is `<|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaiveTape {
    pub letters: Vec<SymbolId>,
    pub visits: Vec<u64>,
}

impl NaiveTape {
    pub fn new(word: &[SymbolId]) -> Self {
        NaiveTape {
            letters: word.to_vec(),
            visits: vec![0; word.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Symbol at cell `pos` (`0..=n+1`).
    pub fn get(&self, pos: usize) -> TapeSymbol {
        if pos == 0 {
            TapeSymbol::LeftMarker
        } else if pos == self.letters.len() + 1 {
            TapeSymbol::RightMarker
        } else {
            TapeSymbol::Letter(self.letters[pos - 1])
        }
    }
}

pub(crate) fn check_word(aut: &Automaton, word: &[SymbolId]) -> Result<(), RunError> {
    match word.iter().find(|s| !aut.is_input(**s)) {
        Some(s) => Err(crate::model::WordError(
            aut.tape
                .get(s.index())
                .map_or_else(|| format!("#{}", s.0), |x| x.name.clone()),
        )
        .into()),
        None => Ok(()),
    }
}

/// Runs `aut` on `word` under the definitional semantics.
///
/// The head starts on cell 1 (on `<|` for the empty word). The run accepts
/// the first time the head arrives on `<|` in an accepting state; arriving
/// there in another state just applies the transition. Writes to frozen
/// cells are discarded in counted mode.
pub fn run_naive(
    aut: &Automaton,
    word: &[SymbolId],
    opts: RunOptions,
) -> Result<RunOutcome, RunError> {
    check_word(aut, word)?;
    let n = word.len();
    let rule = FreezeRule::for_run(aut, n);
    let q_count = aut.state_count();
    let mut out = RunOutcome::new(n, rule.d(), opts.trace);
    let mut tape = NaiveTape::new(word);
    let mut detector = StretchDetector::new((n + 2) * q_count);
    let right = n + 1;

    let mut pos = if n == 0 { right } else { 1 };
    let mut state = aut.start;
    loop {
        if pos == right && aut.is_accepting(state) {
            out.verdict = Verdict::Accept;
            return Ok(out);
        }
        if opts.max_steps.is_some_and(|m| out.steps >= m) {
            return Err(RunError::BudgetExceeded(out.steps));
        }
        let read = tape.get(pos);
        let (frozen, writable) = match read {
            TapeSymbol::Letter(a) => {
                let frozen = rule.is_frozen(aut, a, tape.visits[pos - 1]);
                (frozen, !frozen)
            }
            _ => (false, false),
        };
        if writable {
            detector.clear();
        } else if !detector.insert(pos * q_count + state.index()) {
            out.verdict = Verdict::Reject(RejectReason::LoopDetected);
            return Ok(out);
        }
        let t = *aut
            .transition(state, read)
            .ok_or(RunError::MissingTransition { state, read })?;
        let written = if writable { t.write } else { read };
        if let TapeSymbol::Letter(_) = read {
            if writable {
                let TapeSymbol::Letter(w) = t.write else {
                    return Err(RunError::MissingTransition { state, read });
                };
                tape.letters[pos - 1] = w;
                out.writes += 1;
                out.cell_writes[pos] += 1;
                out.moves.letter += 1;
            } else {
                out.moves.frozen += 1;
            }
            tape.visits[pos - 1] += 1;
        } else {
            out.moves.marker += 1;
        }
        out.cell_visits[pos] += 1;
        if let Some(trace) = out.trace.as_mut() {
            trace.push(StepRecord {
                step: out.steps,
                pos,
                state,
                read: Read::Symbol(read),
                write: Read::Symbol(written),
                mv: t.mv,
                frozen,
                case: StepCase::AMove,
            });
        }
        out.steps += 1;
        pos = match t.mv {
            Move::Left => pos.checked_sub(1),
            Move::Right => Some(pos + 1).filter(|p| *p <= right),
        }
        .ok_or(RunError::HeadOffTape(out.steps))?;
        state = t.to;
    }
}

/// Convenience wrapper returning only whether `word` is accepted.
pub fn accepts(aut: &Automaton, word: &[SymbolId]) -> Result<bool, RunError> {
    Ok(run_naive(aut, word, RunOptions::default())?
        .verdict
        .is_accept())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Mode;
    use crate::trace::regular_trace;
    use crate::zoo;

    fn word(aut: &Automaton, s: &str) -> Vec<SymbolId> {
        aut.parse_word(s).unwrap()
    }

    #[test]
    fn anbn_membership() {
        let aut = zoo::build_anbn();
        for (w, expect) in [
            ("", true),
            ("ab", true),
            ("aabb", true),
            ("aab", false),
            ("abab", false),
            ("ba", false),
            ("abb", false),
        ] {
            let out = run_naive(&aut, &word(&aut, w), RunOptions::default()).unwrap();
            assert_eq!(out.verdict.is_accept(), expect, "{w}");
        }
    }

    #[test]
    fn anbn_rejects_by_loop() {
        let aut = zoo::build_anbn();
        let out = run_naive(&aut, &word(&aut, "aab"), RunOptions::default()).unwrap();
        assert_eq!(out.verdict, Verdict::Reject(RejectReason::LoopDetected));
    }

    #[test]
    fn bouncer_loop_is_detected_quickly() {
        let aut = zoo::build_bouncer();
        let out = run_naive(&aut, &word(&aut, "a"), RunOptions::default()).unwrap();
        assert_eq!(out.verdict, Verdict::Reject(RejectReason::LoopDetected));
        assert!(
            out.steps <= 2 * aut.state_count() as u64 * 3,
            "{}",
            out.steps
        );
    }

    #[test]
    fn bouncer_projection_drops_only_frozen_steps() {
        let aut = zoo::build_bouncer();
        let out = run_naive(
            &aut,
            &word(&aut, "abba"),
            RunOptions {
                trace: true,
                max_steps: None,
            },
        )
        .unwrap();
        let trace = out.trace.as_ref().unwrap();
        let unfrozen = trace.iter().filter(|r| !r.frozen).count();
        assert!(unfrozen < trace.len());
        assert_eq!(regular_trace(&out).len(), unfrozen);
        assert_eq!(out.writes, 4);
    }

    #[test]
    fn steps_equal_sum_of_move_kinds() {
        let aut = zoo::build_anbn();
        let out = run_naive(&aut, &word(&aut, "aaabbb"), RunOptions::default()).unwrap();
        assert_eq!(out.steps, out.moves.total());
        assert!(out.writes as usize <= out.d * 6);
        assert_eq!(out.cell_visits.iter().sum::<u64>(), out.steps);
    }

    #[test]
    fn budget_is_reported_distinctly() {
        let aut = zoo::build_anbn();
        let opts = RunOptions {
            trace: false,
            max_steps: Some(3),
        };
        assert_eq!(
            run_naive(&aut, &word(&aut, "aabb"), opts),
            Err(RunError::BudgetExceeded(3))
        );
    }

    #[test]
    fn rejects_symbols_outside_input() {
        let aut = zoo::build_anbn();
        let a_big = aut.symbol_id("A").unwrap();
        assert!(matches!(
            run_naive(&aut, &[a_big], RunOptions::default()),
            Err(RunError::Word(_))
        ));
    }

    #[test]
    fn empty_word_starts_on_right_marker() {
        let aut = zoo::build_even_a_2dfa();
        let out = run_naive(
            &aut,
            &[],
            RunOptions {
                trace: true,
                max_steps: None,
            },
        )
        .unwrap();
        assert!(out.verdict.is_accept());
        assert_eq!(out.steps, 0);
        let aut = zoo::build_bouncer();
        let out = run_naive(
            &aut,
            &[],
            RunOptions {
                trace: true,
                max_steps: None,
            },
        )
        .unwrap();
        let first = out.trace.unwrap()[0];
        assert_eq!(first.pos, 1);
        assert_eq!(first.read, Read::Symbol(TapeSymbol::RightMarker));
    }

    #[test]
    fn counted_frozen_writes_are_discarded() {
        let aut = zoo::build_sweeper();
        let w = word(&aut, "abba");
        let out = run_naive(
            &aut,
            &w,
            RunOptions {
                trace: true,
                max_steps: None,
            },
        )
        .unwrap();
        for pos in 1..=4 {
            assert_eq!(out.cell_writes[pos], 4);
            assert!(out.cell_visits[pos] > 4);
        }
        for r in out.trace.as_ref().unwrap().iter().filter(|r| r.frozen) {
            assert_eq!(r.read, r.write);
        }
    }

    #[test]
    fn ranked_ranks_strictly_increase_until_frozen() {
        let aut = zoo::build_anbn();
        assert_eq!(aut.mode, Mode::Ranked);
        let out = run_naive(
            &aut,
            &word(&aut, "aaabbb"),
            RunOptions {
                trace: true,
                max_steps: None,
            },
        )
        .unwrap();
        let mut last: Vec<Option<u32>> = vec![Some(0); 8];
        for r in out.trace.unwrap() {
            if let (Read::Symbol(TapeSymbol::Letter(_)), Read::Symbol(TapeSymbol::Letter(w))) =
                (r.read, r.write)
            {
                if !r.frozen {
                    let rank = aut.rank(w);
                    assert!(rank > last[r.pos], "cell {} rank did not increase", r.pos);
                    last[r.pos] = rank;
                }
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let aut = zoo::build_anbn();
        let w = word(&aut, "aabbb");
        let opts = RunOptions {
            trace: true,
            max_steps: None,
        };
        assert_eq!(run_naive(&aut, &w, opts), run_naive(&aut, &w, opts));
    }

    #[test]
    fn anbn_ab_regular_trace_matches_golden() {
        let aut = zoo::build_anbn();
        let out = run_naive(
            &aut,
            &word(&aut, "ab"),
            RunOptions {
                trace: true,
                max_steps: None,
            },
        )
        .unwrap();
        let got = crate::trace::format_regular(&aut, &regular_trace(&out));
        assert_eq!(got, include_str!("../tests/golden/anbn_ab.regular"));
    }
}
