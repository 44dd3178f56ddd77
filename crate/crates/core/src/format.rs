//! The line-oriented `.limla` machine format.
//!
//! ```text
//! limla 1
//! mode ranked
//! d 2
//! states s t
//! input a b
//! tape a b A:1 B:2
//! start s
//! accept t
//! delta s a -> t A R
//! ```
//!
//! `#` starts a comment and blank lines are ignored. `limla 1` must be the
//! first directive; the others may appear in any order, each at most once,
//! except `delta` which appears once per `(state, symbol)` pair. In ranked
//! mode every non-input tape symbol needs a `:<rank>` suffix and input
//! symbols default to rank 0; counted machines carry no ranks.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::model::{
    is_valid_token, Automaton, DLimit, Mode, Move, StateId, Symbol, SymbolId, TapeSymbol,
    Transition, LEFT_MARKER, RIGHT_MARKER,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    /// 1-based; 0 when the problem is a missing directive.
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError {
        line,
        message: message.into(),
    })
}

struct Directive<'a> {
    line: usize,
    args: Vec<&'a str>,
}

/// Parses a machine document. The result is structurally well formed but
/// not validated; see [`crate::model::validate_automaton`].
pub fn parse_machine(text: &str) -> Result<Automaton, FormatError> {
    let mut header_seen = false;
    let mut single: HashMap<&str, Directive> = HashMap::new();
    let mut deltas: Vec<Directive> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        let Some(key) = toks.next() else { continue };
        let args: Vec<&str> = toks.collect();
        if !header_seen {
            if key != "limla" || args != ["1"] {
                return err(line, "expected header `limla 1`");
            }
            header_seen = true;
            continue;
        }
        match key {
            "delta" => deltas.push(Directive { line, args }),
            "mode" | "d" | "states" | "input" | "tape" | "start" | "accept" => {
                if let Some(prev) = single.get(key) {
                    return err(
                        line,
                        format!("duplicate `{key}` (first on line {})", prev.line),
                    );
                }
                single.insert(key, Directive { line, args });
            }
            "limla" => return err(line, "duplicate header"),
            other => return err(line, format!("unknown directive `{other}`")),
        }
    }
    if !header_seen {
        return err(0, "empty document: expected header `limla 1`");
    }

    let required = |key: &str| -> Result<&Directive, FormatError> {
        single
            .get(key)
            .map_or_else(|| err(0, format!("missing `{key}` directive")), Ok)
    };
    let exactly_one = |dir: &Directive, key: &str| -> Result<String, FormatError> {
        match dir.args.as_slice() {
            [one] => Ok(one.to_string()),
            _ => err(dir.line, format!("`{key}` takes exactly one argument")),
        }
    };

    let mode_dir = required("mode")?;
    let mode = match exactly_one(mode_dir, "mode")?.as_str() {
        "ranked" => Mode::Ranked,
        "counted" => Mode::Counted,
        other => return err(mode_dir.line, format!("unknown mode `{other}`")),
    };

    let d_dir = required("d")?;
    let dlimit = match exactly_one(d_dir, "d")?.as_str() {
        "log2" => DLimit::Log2,
        "sqrt" => DLimit::Sqrt,
        "id" => DLimit::Id,
        num => match num.parse::<u32>() {
            Ok(k) => DLimit::Const(k),
            Err(_) => return err(d_dir.line, format!("bad d value `{num}`")),
        },
    };
    if mode == Mode::Ranked && !matches!(dlimit, DLimit::Const(_)) {
        return err(d_dir.line, "ranked mode requires an integer d");
    }

    let states_dir = required("states")?;
    if states_dir.args.is_empty() {
        return err(states_dir.line, "`states` needs at least one state");
    }
    let mut state_ids: HashMap<&str, StateId> = HashMap::new();
    for (i, name) in states_dir.args.iter().enumerate() {
        if !is_valid_token(name) {
            return err(states_dir.line, format!("invalid state name `{name}`"));
        }
        if state_ids.insert(name, StateId(i as u32)).is_some() {
            return err(states_dir.line, format!("duplicate state `{name}`"));
        }
    }
    let states: Vec<String> = states_dir.args.iter().map(|s| s.to_string()).collect();

    let input_dir = required("input")?;
    let tape_dir = required("tape")?;
    let mut tape = Vec::new();
    let mut sym_ids: HashMap<&str, SymbolId> = HashMap::new();
    let mut explicit_rank = Vec::new();
    for item in &tape_dir.args {
        let (name, rank) = match item.split_once(':') {
            Some((name, r)) => match r.parse::<u32>() {
                Ok(r) => (name, Some(r)),
                Err(_) => return err(tape_dir.line, format!("bad rank in `{item}`")),
            },
            None => (*item, None),
        };
        if !is_valid_token(name) {
            return err(tape_dir.line, format!("invalid symbol `{name}`"));
        }
        if mode == Mode::Counted && rank.is_some() {
            return err(
                tape_dir.line,
                format!("counted machines take no ranks (`{item}`)"),
            );
        }
        if sym_ids.insert(name, SymbolId(tape.len() as u32)).is_some() {
            return err(tape_dir.line, format!("duplicate symbol `{name}`"));
        }
        explicit_rank.push(rank.is_some());
        tape.push(Symbol {
            name: name.to_string(),
            rank,
        });
    }

    let mut input = Vec::new();
    for name in &input_dir.args {
        let Some(&id) = sym_ids.get(name) else {
            return err(
                input_dir.line,
                format!("input symbol `{name}` is not in the tape alphabet"),
            );
        };
        if input.contains(&id) {
            return err(input_dir.line, format!("duplicate input symbol `{name}`"));
        }
        input.push(id);
    }
    if mode == Mode::Ranked {
        for (i, sym) in tape.iter_mut().enumerate() {
            if explicit_rank[i] {
                continue;
            }
            if input.contains(&SymbolId(i as u32)) {
                sym.rank = Some(0);
            } else {
                return err(tape_dir.line, format!("symbol `{}` needs a rank", sym.name));
            }
        }
    }

    let lookup_state = |line: usize, name: &str| -> Result<StateId, FormatError> {
        state_ids
            .get(name)
            .copied()
            .map_or_else(|| err(line, format!("unknown state `{name}`")), Ok)
    };

    let start_dir = required("start")?;
    let start = lookup_state(start_dir.line, &exactly_one(start_dir, "start")?)?;

    let mut accepting = Vec::new();
    if let Some(acc) = single.get("accept") {
        for name in &acc.args {
            accepting.push(lookup_state(acc.line, name)?);
        }
    }

    let mut aut = Automaton::new(mode, dlimit, states, tape, input, start, accepting);

    let lookup_sym = |line: usize, tok: &str| -> Result<TapeSymbol, FormatError> {
        match tok {
            LEFT_MARKER => Ok(TapeSymbol::LeftMarker),
            RIGHT_MARKER => Ok(TapeSymbol::RightMarker),
            _ => sym_ids
                .get(tok)
                .map(|&s| TapeSymbol::Letter(s))
                .map_or_else(|| err(line, format!("unknown symbol `{tok}`")), Ok),
        }
    };
    for dir in &deltas {
        let [from, read, arrow, to, write, mv] = dir.args.as_slice() else {
            return err(
                dir.line,
                "expected `delta <state> <sym> -> <state> <sym> <L|R>`",
            );
        };
        if *arrow != "->" {
            return err(dir.line, "expected `->`");
        }
        let from = lookup_state(dir.line, from)?;
        let read = lookup_sym(dir.line, read)?;
        let to = lookup_state(dir.line, to)?;
        let write = lookup_sym(dir.line, write)?;
        let mv = match *mv {
            "L" => Move::Left,
            "R" => Move::Right,
            other => return err(dir.line, format!("bad move `{other}`")),
        };
        if aut.transition(from, read).is_some() {
            return err(dir.line, "duplicate transition");
        }
        aut.set(from, read, Transition { to, write, mv });
    }
    Ok(aut)
}

/// Canonical document: directives in fixed order, states and symbols in
/// declaration order, delta lines by `(state, column)`.
pub fn serialize_machine(aut: &Automaton) -> String {
    let mut out = String::from("limla 1\n");
    let mode = match aut.mode {
        Mode::Ranked => "ranked",
        Mode::Counted => "counted",
    };
    let _ = writeln!(out, "mode {mode}");
    let _ = writeln!(out, "d {}", aut.dlimit);
    let _ = writeln!(out, "states {}", aut.states.join(" "));
    let input: Vec<&str> = aut
        .input
        .iter()
        .map(|s| aut.tape[s.index()].name.as_str())
        .collect();
    out.push_str(&line("input", &input));
    let tape: Vec<String> = aut
        .tape
        .iter()
        .map(|s| match s.rank {
            Some(r) => format!("{}:{r}", s.name),
            None => s.name.clone(),
        })
        .collect();
    out.push_str(&line("tape", &tape));
    let _ = writeln!(out, "start {}", aut.state_name(aut.start));
    let accept: Vec<&str> = aut.accepting.iter().map(|q| aut.state_name(*q)).collect();
    out.push_str(&line("accept", &accept));
    for q in 0..aut.state_count() {
        let q = StateId(q as u32);
        for col in 0..aut.column_count() {
            let read = aut.column_symbol(col);
            if let Some(t) = aut.transition(q, read) {
                let _ = writeln!(
                    out,
                    "delta {} {} -> {} {} {}",
                    aut.state_name(q),
                    aut.token(read),
                    aut.state_name(t.to),
                    aut.token(t.write),
                    t.mv.token()
                );
            }
        }
    }
    out
}

fn line<S: AsRef<str>>(key: &str, items: &[S]) -> String {
    let mut s = key.to_string();
    for it in items {
        s.push(' ');
        s.push_str(it.as_ref());
    }
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    const MINIMAL: &str = "\
# one-state ranked machine
limla 1
mode ranked
d 1
states q
input a
tape a A:1
start q
accept q
delta q |> -> q |> R
delta q a -> q A R   # first visit
delta q A -> q A L
delta q <| -> q <| L
";

    #[test]
    fn parses_minimal_document() {
        let aut = parse_machine(MINIMAL).unwrap();
        assert_eq!(aut.mode, Mode::Ranked);
        assert_eq!(aut.dlimit, DLimit::Const(1));
        assert_eq!(aut.states, vec!["q"]);
        assert_eq!(aut.tape.len(), 2);
        assert_eq!(aut.tape[0].rank, Some(0));
        assert_eq!(aut.tape[1].rank, Some(1));
        assert_eq!(aut.input, vec![SymbolId(0)]);
        assert_eq!(aut.accepting, vec![StateId(0)]);
        let t = aut
            .transition(StateId(0), TapeSymbol::Letter(SymbolId(0)))
            .unwrap();
        assert_eq!(t.write, TapeSymbol::Letter(SymbolId(1)));
        assert_eq!(t.mv, Move::Right);
        assert!(crate::model::validate_automaton(&aut).is_ok());
    }

    #[test]
    fn missing_start_is_an_error() {
        let text = MINIMAL.replace("start q\n", "");
        let e = parse_machine(&text).unwrap_err();
        assert!(e.message.contains("start"), "{e}");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let cases = [
            (MINIMAL.replace("mode ranked", "mode fancy"), 3),
            (MINIMAL.replace("d 1", "d log2"), 4),
            (MINIMAL.replace("start q", "start q\nstart q"), 9),
            (MINIMAL.replace("accept q", "accept q\nwobble"), 10),
            (
                MINIMAL.replace("delta q A -> q A L", "delta q A -> q A"),
                12,
            ),
            (
                MINIMAL.replace("delta q A -> q A L", "delta q A => q A L"),
                12,
            ),
            (
                MINIMAL.replace("delta q A -> q A L", "delta q a -> q A L"),
                12,
            ),
            (MINIMAL.replace("tape a A:1", "tape a A"), 7),
            (MINIMAL.replace("tape a A:1", "tape a L:1"), 7),
            (MINIMAL.replace("states q", "states q q"), 5),
            (
                MINIMAL.replace("delta q A -> q A L", "delta q A -> z A L"),
                12,
            ),
        ];
        for (text, line) in cases {
            let e = parse_machine(&text).unwrap_err();
            assert_eq!(e.line, line, "{e}");
        }
    }

    #[test]
    fn empty_or_headerless_documents_fail() {
        assert!(parse_machine("").is_err());
        assert!(parse_machine("# nothing\n\n").is_err());
        assert_eq!(
            parse_machine(&MINIMAL.replace("limla 1", "limla 2"))
                .unwrap_err()
                .line,
            2
        );
    }

    #[test]
    fn counted_symbols_take_no_rank() {
        let text = MINIMAL.replace("mode ranked", "mode counted");
        assert!(parse_machine(&text).is_err());
        let text = text.replace("A:1", "A").replace("d 1", "d sqrt");
        let aut = parse_machine(&text).unwrap();
        assert_eq!(aut.dlimit, DLimit::Sqrt);
        assert!(aut.tape.iter().all(|s| s.rank.is_none()));
    }

    #[test]
    fn missing_delta_lines_parse_but_fail_validation() {
        let text = MINIMAL.replace("delta q A -> q A L\n", "");
        let aut = parse_machine(&text).unwrap();
        let report = crate::model::validate_automaton(&aut);
        assert!(report.has(crate::model::Rule::Totality));
    }

    #[test]
    fn zoo_round_trips() {
        for aut in zoo::all() {
            let doc = serialize_machine(&aut);
            let back = parse_machine(&doc).unwrap();
            assert_eq!(back, aut);
            assert_eq!(serialize_machine(&back), doc);
        }
    }

    #[test]
    fn serialization_is_canonical() {
        let a = parse_machine(MINIMAL).unwrap();
        let shuffled = "limla 1\naccept q\nstart q\ndelta q <| -> q <| L\ntape a:0 A:1\ninput a\n\
                        states q\nd 1\nmode ranked\ndelta q A -> q A L\ndelta q a -> q A R\n\
                        delta q |> -> q |> R\n";
        let b = parse_machine(shuffled).unwrap();
        assert_eq!(a, b);
        assert_eq!(serialize_machine(&a), serialize_machine(&b));
        let canon = serialize_machine(&a);
        assert_eq!(serialize_machine(&parse_machine(&canon).unwrap()), canon);
    }

    #[test]
    fn anbn_document_declares_d_2() {
        let doc = serialize_machine(&zoo::build_anbn());
        assert!(doc.lines().any(|l| l == "d 2"));
    }

    #[test]
    fn description_len_counts_tokens() {
        let aut = parse_machine(MINIMAL).unwrap();
        // header 2, mode 2, d 2, states 2, input 2, tape 3, start 2, accept 2, 4 deltas * 7
        assert_eq!(aut.description_len(), 2 + 2 + 2 + 2 + 2 + 3 + 2 + 2 + 4 * 7);
    }
}
