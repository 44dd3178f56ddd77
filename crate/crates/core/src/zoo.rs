//! Concrete machines and a seeded generator of random valid machines.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::model::{
    Automaton, DLimit, Mode, Move, StateId, Symbol, SymbolId, TapeSymbol, Transition,
};

/// Helper for writing transition tables by name.
struct Builder {
    aut: Automaton,
}

impl Builder {
    fn new(
        mode: Mode,
        dlimit: DLimit,
        states: &[&str],
        tape: &[(&str, Option<u32>)],
        input: &[&str],
        start: &str,
        accept: &[&str],
    ) -> Self {
        let tape: Vec<Symbol> = tape
            .iter()
            .map(|(name, rank)| Symbol {
                name: name.to_string(),
                rank: *rank,
            })
            .collect();
        let states: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let sid = |n: &str| StateId(states.iter().position(|s| s == n).unwrap() as u32);
        let input = input
            .iter()
            .map(|n| SymbolId(tape.iter().position(|s| s.name == *n).unwrap() as u32))
            .collect();
        let start = sid(start);
        let accept = accept.iter().map(|n| sid(n)).collect();
        Builder {
            aut: Automaton::new(mode, dlimit, states, tape, input, start, accept),
        }
    }

    fn sym(&self, name: &str) -> TapeSymbol {
        match name {
            "|>" => TapeSymbol::LeftMarker,
            "<|" => TapeSymbol::RightMarker,
            _ => TapeSymbol::Letter(
                self.aut
                    .symbol_id(name)
                    .unwrap_or_else(|| panic!("no symbol {name}")),
            ),
        }
    }

    fn on(&mut self, from: &str, read: &str, to: &str, write: &str, mv: Move) {
        let from = self.aut.state_id(from).unwrap();
        let to = self.aut.state_id(to).unwrap();
        let (read, write) = (self.sym(read), self.sym(write));
        self.aut.set(from, read, Transition { to, write, mv });
    }

    /// Fills every missing entry of `state` with `fill(read)`.
    fn fill(&mut self, state: &str, fill: impl Fn(&str) -> (&'static str, String, Move)) {
        let q = self.aut.state_id(state).unwrap();
        for col in 0..self.aut.column_count() {
            let read = self.aut.column_symbol(col);
            if self.aut.transition(q, read).is_some() {
                continue;
            }
            let tok = self.aut.token(read).to_string();
            let (to, write, mv) = fill(&tok);
            self.on(state, &tok, to, &write, mv);
        }
    }

    fn finish(self) -> Automaton {
        debug_assert!(crate::model::validate_automaton(&self.aut).is_ok());
        self.aut
    }
}

use Move::{Left as L, Right as R};

/// Ranked `d = 2` machine for `{a^n b^n | n >= 0}`.
///
/// `s` runs right over the `a`s marking them `a1`. Each `b` is marked `B`
/// and the head runs left (`l`) over frozen `A`/`B` cells to the nearest
/// `a1`, freezes it to `A`, then runs right (`r`) to the next unmarked `b`.
/// On `<|` state `c` sweeps left checking that no `a1` is left and `acc`
/// walks back to `<|`. Every malformed input ends in `trap`, which
/// bounces forever.
pub fn build_anbn() -> Automaton {
    let mut b = Builder::new(
        Mode::Ranked,
        DLimit::Const(2),
        &["s", "l", "r", "c", "acc", "trap"],
        &[
            ("a", Some(0)),
            ("b", Some(0)),
            ("a1", Some(1)),
            ("A", Some(2)),
            ("B", Some(2)),
        ],
        &["a", "b"],
        "s",
        &["acc"],
    );
    b.on("s", "a", "s", "a1", R);
    b.on("s", "b", "l", "B", L);
    b.on("s", "<|", "c", "<|", L);

    b.on("l", "A", "l", "A", L);
    b.on("l", "B", "l", "B", L);
    b.on("l", "a1", "r", "A", R);

    b.on("r", "A", "r", "A", R);
    b.on("r", "B", "r", "B", R);
    b.on("r", "b", "l", "B", L);
    b.on("r", "<|", "c", "<|", L);

    b.on("c", "A", "c", "A", L);
    b.on("c", "B", "c", "B", L);
    b.on("c", "|>", "acc", "|>", R);

    // `acc` only ever walks right over frozen cells.
    let pass = |read: &str| -> (&'static str, String, Move) {
        match read {
            "a" => ("acc", "a1".into(), R),
            "b" => ("acc", "B".into(), R),
            "a1" => ("acc", "A".into(), R),
            "<|" => ("acc", "<|".into(), L),
            other => ("acc", other.into(), R),
        }
    };
    b.fill("acc", pass);
    let trap = |read: &str| -> (&'static str, String, Move) {
        match read {
            "a" => ("trap", "a1".into(), R),
            "b" => ("trap", "B".into(), R),
            "a1" => ("trap", "A".into(), R),
            "<|" => ("trap", "<|".into(), L),
            other => ("trap", other.into(), R),
        }
    };
    for state in ["s", "l", "r", "c", "trap"] {
        b.fill(state, trap);
    }
    b.finish()
}

/// Ranked `d = 0` machine (a two-way DFA) accepting words over `{a, b}`
/// with an even number of `a`s.
pub fn build_even_a_2dfa() -> Automaton {
    let mut b = Builder::new(
        Mode::Ranked,
        DLimit::Const(0),
        &["even", "odd", "rej"],
        &[("a", Some(0)), ("b", Some(0))],
        &["a", "b"],
        "even",
        &["even"],
    );
    b.on("even", "a", "odd", "a", R);
    b.on("even", "b", "even", "b", R);
    b.on("odd", "a", "even", "a", R);
    b.on("odd", "b", "odd", "b", R);
    for q in ["even", "odd", "rej"] {
        b.on(q, "|>", "rej", "|>", R);
        b.on(q, "<|", "rej", "<|", L);
    }
    b.on("rej", "a", "rej", "a", L);
    b.on("rej", "b", "rej", "b", L);
    b.finish()
}

/// Ranked `d = 1` machine that sweeps right to `<|`, left to `|>`, and so
/// on forever. It has no accepting state.
pub fn build_bouncer() -> Automaton {
    let mut b = Builder::new(
        Mode::Ranked,
        DLimit::Const(1),
        &["right", "left"],
        &[
            ("a", Some(0)),
            ("b", Some(0)),
            ("A", Some(1)),
            ("B", Some(1)),
        ],
        &["a", "b"],
        "right",
        &[],
    );
    for (q, mv) in [("right", R), ("left", L)] {
        b.on(q, "a", q, "A", mv);
        b.on(q, "b", q, "B", mv);
        b.on(q, "A", q, "A", mv);
        b.on(q, "B", q, "B", mv);
        b.on(q, "|>", "right", "|>", R);
        b.on(q, "<|", "left", "<|", L);
    }
    b.finish()
}

/// Counted machine with `d(n) = n` that sweeps end to end, toggling
/// `a <-> b` on every visit. Each cell freezes after `n` visits; the
/// machine then bounces forever without accepting.
pub fn build_sweeper() -> Automaton {
    let mut b = Builder::new(
        Mode::Counted,
        DLimit::Id,
        &["right", "left"],
        &[("a", None), ("b", None)],
        &["a", "b"],
        "right",
        &[],
    );
    for (q, mv) in [("right", R), ("left", L)] {
        b.on(q, "a", q, "b", mv);
        b.on(q, "b", q, "a", mv);
        b.on(q, "|>", "right", "|>", R);
        b.on(q, "<|", "left", "<|", L);
    }
    b.finish()
}

pub const NAMES: [&str; 4] = ["anbn", "even-a", "bouncer", "sweeper"];

pub fn by_name(name: &str) -> Option<Automaton> {
    match name {
        "anbn" => Some(build_anbn()),
        "even-a" => Some(build_even_a_2dfa()),
        "bouncer" => Some(build_bouncer()),
        "sweeper" => Some(build_sweeper()),
        _ => None,
    }
}

/// Every zoo machine, in [`NAMES`] order.
pub fn all() -> Vec<Automaton> {
    NAMES.iter().map(|n| by_name(n).unwrap()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenMode {
    Ranked { d: u32 },
    Counted { dlimit: DLimit },
}

/// Parameters of [`random_automaton`]. The seed fully determines the output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub states: usize,
    pub mode: GenMode,
    pub input_size: usize,
    /// Ranked: symbols at each rank `1..=d`. Counted: extra non-input symbols.
    pub tape_per_rank: usize,
    /// Add an accepting state `qf` that no transition enters, and make no
    /// other state accepting.
    pub unreachable_accept: bool,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            states: 4,
            mode: GenMode::Ranked { d: 2 },
            input_size: 2,
            tape_per_rank: 1,
            unreachable_accept: false,
            seed: 0,
        }
    }
}

/// Uniform draw in `0..k` from a splitmix64 stream (`next % k`).
fn draw(rng: &mut SplitMix64, k: usize) -> usize {
    (rng.next_u64() % k as u64) as usize
}

fn letter_name(i: usize, upper: bool) -> String {
    let base = if upper { b'A' } else { b'a' };
    if i < 26 {
        ((base + i as u8) as char).to_string()
    } else {
        format!("{}{}", (base + (i % 26) as u8) as char, i / 26)
    }
}

/// Random machine that passes validation by construction.
///
/// Draw order (one splitmix64 stream seeded with `seed`): one accept draw
/// per state (`% 3 == 0` accepts; skipped with `unreachable_accept`), then
/// for each state and each column in table order: target state, written
/// symbol among the legal ones (skipped for markers and frozen letters),
/// and direction (skipped for markers).
pub fn random_automaton(p: &GenParams) -> Automaton {
    assert!(p.states >= 1 && p.input_size >= 1 && p.tape_per_rank >= 1);
    let mut rng = SplitMix64::seed_from_u64(p.seed);

    let mut tape: Vec<Symbol> = Vec::new();
    let (mode, dlimit, ranked_d) = match p.mode {
        GenMode::Ranked { d } => (Mode::Ranked, DLimit::Const(d), Some(d)),
        GenMode::Counted { dlimit } => (Mode::Counted, dlimit, None),
    };
    let rank0 = ranked_d.map(|_| 0);
    for i in 0..p.input_size {
        tape.push(Symbol {
            name: letter_name(i, false),
            rank: rank0,
        });
    }
    match ranked_d {
        Some(d) => {
            for r in 1..=d {
                for i in 0..p.tape_per_rank {
                    tape.push(Symbol {
                        name: format!("{}{r}", letter_name(i, true)),
                        rank: Some(r),
                    });
                }
            }
        }
        None => {
            for i in 0..p.tape_per_rank {
                tape.push(Symbol {
                    name: letter_name(i, true),
                    rank: None,
                });
            }
        }
    }

    let productive = p.states;
    let mut states: Vec<String> = (0..productive).map(|i| format!("q{i}")).collect();
    let mut accepting = Vec::new();
    if p.unreachable_accept {
        states.push("qf".into());
        accepting.push(StateId(productive as u32));
    } else {
        for q in 0..productive {
            if draw(&mut rng, 3) == 0 {
                accepting.push(StateId(q as u32));
            }
        }
    }
    let input = (0..p.input_size).map(|i| SymbolId(i as u32)).collect();
    let mut aut = Automaton::new(mode, dlimit, states, tape, input, StateId(0), accepting);

    for q in 0..aut.state_count() {
        for col in 0..aut.column_count() {
            let read = aut.column_symbol(col);
            let to = StateId(draw(&mut rng, productive) as u32);
            let (write, mv) = match read {
                TapeSymbol::LeftMarker => (read, Move::Right),
                TapeSymbol::RightMarker => (read, Move::Left),
                TapeSymbol::Letter(a) => {
                    let legal = legal_writes(&aut, a, ranked_d);
                    let write = if legal.len() == 1 {
                        legal[0]
                    } else {
                        legal[draw(&mut rng, legal.len())]
                    };
                    let mv = if draw(&mut rng, 2) == 0 {
                        Move::Right
                    } else {
                        Move::Left
                    };
                    (TapeSymbol::Letter(write), mv)
                }
            };
            aut.set(StateId(q as u32), read, Transition { to, write, mv });
        }
    }
    aut
}

fn legal_writes(aut: &Automaton, read: SymbolId, d: Option<u32>) -> Vec<SymbolId> {
    let all = (0..aut.tape.len() as u32).map(SymbolId);
    match d {
        None => all.collect(),
        Some(d) => {
            let r = aut.rank(read).unwrap();
            if d == 0 || r == d {
                vec![read]
            } else {
                all.filter(|s| aut.rank(*s).is_some_and(|w| w > r && w <= d))
                    .collect()
            }
        }
    }
}

/// Random word over the input alphabet.
pub fn random_word(aut: &Automaton, len: usize, rng: &mut SplitMix64) -> Vec<SymbolId> {
    (0..len)
        .map(|_| aut.input[draw(rng, aut.input.len())])
        .collect()
}

/// All words over the input alphabet of length at most `max_len`, shortest
/// first, each length in lexicographic order of input declaration.
pub fn words_up_to(aut: &Automaton, max_len: usize) -> Vec<Vec<SymbolId>> {
    let k = aut.input.len();
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<SymbolId>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * k);
        for w in &layer {
            for &s in &aut.input {
                let mut v = w.clone();
                v.push(s);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::serialize_machine;
    use crate::model::validate_automaton;
    use crate::naive::{run_naive, RunOptions};
    use std::collections::HashSet;

    fn is_anbn(w: &str) -> bool {
        let n = w.len() / 2;
        w.len().is_multiple_of(2)
            && w[..n].bytes().all(|c| c == b'a')
            && w[n..].bytes().all(|c| c == b'b')
    }

    #[test]
    fn builders_are_valid() {
        for aut in all() {
            let report = validate_automaton(&aut);
            assert!(report.is_ok(), "{report}");
        }
    }

    #[test]
    fn anbn_exhaustive_up_to_14() {
        let aut = build_anbn();
        for w in words_up_to(&aut, 14) {
            let text = aut.format_word(&w);
            let got = run_naive(&aut, &w, RunOptions::default())
                .unwrap()
                .verdict
                .is_accept();
            assert_eq!(got, is_anbn(&text), "{text}");
        }
    }

    #[test]
    fn anbn_naive_is_quadratic() {
        let aut = build_anbn();
        let steps = |k: usize| {
            let w = aut.parse_word(&("a".repeat(k) + &"b".repeat(k))).unwrap();
            run_naive(&aut, &w, RunOptions::default()).unwrap().steps as f64
        };
        let ratio = steps(64) / steps(32);
        assert!((3.4..=4.6).contains(&ratio), "{ratio}");
    }

    #[test]
    fn even_a_matches_parity() {
        let aut = build_even_a_2dfa();
        let mut rng = SplitMix64::seed_from_u64(7);
        for _ in 0..500 {
            let len = draw(&mut rng, 20);
            let w = random_word(&aut, len, &mut rng);
            let even = aut.format_word(&w).bytes().filter(|&c| c == b'a').count() % 2 == 0;
            let got = run_naive(&aut, &w, RunOptions::default())
                .unwrap()
                .verdict
                .is_accept();
            assert_eq!(got, even);
        }
        assert!(
            run_naive(&aut, &aut.parse_word("aa").unwrap(), RunOptions::default())
                .unwrap()
                .verdict
                .is_accept()
        );
        assert!(
            !run_naive(&aut, &aut.parse_word("a").unwrap(), RunOptions::default())
                .unwrap()
                .verdict
                .is_accept()
        );
    }

    #[test]
    fn sweeper_profile() {
        let aut = build_sweeper();
        for n in 0..=20usize {
            let w = aut
                .parse_word(&"ab".repeat(n).chars().take(n).collect::<String>())
                .unwrap();
            let out = run_naive(&aut, &w, RunOptions::default()).unwrap();
            assert!(!out.verdict.is_accept());
            for pos in 1..=n {
                assert_eq!(out.cell_writes[pos], n as u64);
            }
            let (lo, hi) = ((n * (n + 1)) as u64, (4 * (n + 2) * (n + 1)) as u64);
            assert!(
                out.steps >= lo && out.steps <= hi,
                "n={n} steps={}",
                out.steps
            );
        }
    }

    #[test]
    fn bouncer_never_accepts() {
        let aut = build_bouncer();
        for w in words_up_to(&aut, 8) {
            let out = run_naive(&aut, &w, RunOptions::default()).unwrap();
            assert!(!out.verdict.is_accept());
            assert!(out.steps <= 2 * (w.len() as u64 + 2) * 2 + 2 * w.len() as u64);
        }
    }

    #[test]
    fn same_seed_same_machine() {
        let p = GenParams {
            seed: 42,
            ..GenParams::default()
        };
        assert_eq!(
            serialize_machine(&random_automaton(&p)),
            serialize_machine(&random_automaton(&p))
        );
        let q = GenParams { seed: 43, ..p };
        assert_ne!(random_automaton(&p), random_automaton(&q));
    }

    #[test]
    fn thousand_random_machines_validate() {
        for seed in 0..1000u64 {
            let mode = if seed % 3 == 0 {
                GenMode::Counted {
                    dlimit: [DLimit::Const(2), DLimit::Log2, DLimit::Sqrt, DLimit::Id]
                        [(seed / 3 % 4) as usize],
                }
            } else {
                GenMode::Ranked {
                    d: (seed % 4) as u32,
                }
            };
            let p = GenParams {
                states: 1 + (seed % 5) as usize,
                mode,
                input_size: 1 + (seed % 3) as usize,
                tape_per_rank: 1 + (seed % 2) as usize,
                unreachable_accept: seed % 7 == 0,
                seed,
            };
            let aut = random_automaton(&p);
            let report = validate_automaton(&aut);
            assert!(report.is_ok(), "seed {seed}: {report}");
        }
    }

    #[test]
    fn every_rank_jump_is_generated_at_d3() {
        let mut seen = HashSet::new();
        for seed in 0..1000u64 {
            let aut = random_automaton(&GenParams {
                mode: GenMode::Ranked { d: 3 },
                seed,
                ..GenParams::default()
            });
            for q in 0..aut.state_count() {
                for (i, sym) in aut.tape.iter().enumerate() {
                    let t = aut
                        .transition(StateId(q as u32), TapeSymbol::Letter(SymbolId(i as u32)))
                        .unwrap();
                    let w = aut.rank(t.write.letter().unwrap()).unwrap();
                    seen.insert((sym.rank.unwrap(), w));
                }
            }
        }
        for r in 0..3 {
            for w in r + 1..=3 {
                assert!(seen.contains(&(r, w)), "jump {r} -> {w} never drawn");
            }
        }
    }

    #[test]
    fn unreachable_accept_state_is_never_entered() {
        let p = GenParams {
            unreachable_accept: true,
            seed: 5,
            ..GenParams::default()
        };
        let aut = random_automaton(&p);
        let qf = aut.state_id("qf").unwrap();
        assert_eq!(aut.accepting, vec![qf]);
        assert!(aut.delta.iter().flatten().all(|t| t.to != qf));
    }

    #[test]
    fn words_up_to_counts() {
        let aut = build_anbn();
        assert_eq!(words_up_to(&aut, 3).len(), 1 + 2 + 4 + 8);
    }
}
