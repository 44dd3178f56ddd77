//! Differential fuzzing of the linear engine against the reference engine.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;

use crate::format::serialize_machine;
use crate::linear::{run_linear, Fault, LinearOptions};
use crate::model::{Automaton, DLimit, SymbolId};
use crate::naive::{run_naive, RunOptions};
use crate::trace::{format_regular, regular_trace, write_jsonl, RunOutcome};
use crate::zoo::{random_automaton, random_word, words_up_to, GenMode, GenParams};

/// Words longer than this many candidates per length are not enumerated.
pub const EXHAUSTIVE_WORDS: usize = 4096;
/// Random words per machine beyond the exhaustive lengths.
pub const RANDOM_WORDS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FuzzMode {
    Ranked,
    Counted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    pub states: usize,
    pub d: u32,
    pub mode: FuzzMode,
    pub seed: u64,
    pub machines: usize,
    pub maxlen: usize,
    pub alphabet_size: usize,
    pub max_steps: u64,
    #[doc(hidden)]
    pub fault: Fault,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            states: 4,
            d: 2,
            mode: FuzzMode::Ranked,
            seed: 0,
            machines: 200,
            maxlen: 10,
            alphabet_size: 2,
            max_steps: 10_000_000,
            fault: Fault::None,
        }
    }
}

/// Longest length whose words are all enumerated for an alphabet of size `a`.
pub fn exhaustive_len(a: usize, maxlen: usize) -> usize {
    let mut len = 0;
    let mut count = 1usize;
    while len < maxlen {
        match count.checked_mul(a) {
            Some(c) if c <= EXHAUSTIVE_WORDS => {
                count = c;
                len += 1;
            }
            _ => break,
        }
    }
    len
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub machine: usize,
    pub machine_seed: u64,
    pub word: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FuzzReport {
    pub machines: usize,
    pub runs: u64,
    pub shadow_checks: u64,
    pub divergences: Vec<Divergence>,
}

impl FuzzReport {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "machines={} runs={} shadow_checks={} divergences={}\n",
            self.machines,
            self.runs,
            self.shadow_checks,
            self.divergences.len()
        );
        for d in &self.divergences {
            let _ = writeln!(
                s,
                "machine {} (seed {}) word {:?}: {}",
                d.machine, d.machine_seed, d.word, d.detail
            );
        }
        s
    }
}

/// Machine parameters for the `index`-th machine of a campaign.
pub fn machine_params(cfg: &FuzzConfig, machine_seed: u64) -> GenParams {
    GenParams {
        states: cfg.states,
        mode: match cfg.mode {
            FuzzMode::Ranked => GenMode::Ranked { d: cfg.d },
            FuzzMode::Counted => GenMode::Counted {
                dlimit: DLimit::Const(cfg.d),
            },
        },
        input_size: cfg.alphabet_size,
        tape_per_rank: 1,
        unreachable_accept: false,
        seed: machine_seed,
    }
}

/// The words tried on every machine: all words up to the exhaustive length,
/// then [`RANDOM_WORDS`] random words of length `e+1 ..= max(maxlen, 2e+2)`.
pub fn fuzz_words(aut: &Automaton, cfg: &FuzzConfig, rng: &mut SplitMix64) -> Vec<Vec<SymbolId>> {
    let e = exhaustive_len(aut.input.len(), cfg.maxlen);
    let mut words = words_up_to(aut, e);
    let hi = cfg.maxlen.max(2 * e + 2);
    for _ in 0..RANDOM_WORDS {
        let len = e + 1 + (rng.next_u64() % (hi - e) as u64) as usize;
        words.push(random_word(aut, len, rng));
    }
    words
}

/// Result of one differential run.
pub struct Comparison {
    pub naive: Option<RunOutcome>,
    pub linear: Option<RunOutcome>,
    /// `None` when the engines agree.
    pub divergence: Option<String>,
}

/// Runs both engines on `word` (linear with shadow checking) and compares
/// verdicts and regular-move projections.
pub fn compare(aut: &Automaton, word: &[SymbolId], max_steps: u64, fault: Fault) -> Comparison {
    let naive = run_naive(
        aut,
        word,
        RunOptions {
            trace: true,
            max_steps: Some(max_steps),
        },
    );
    let linear = run_linear(
        aut,
        word,
        LinearOptions {
            trace: true,
            shadow: true,
            max_steps: Some(max_steps),
            fault,
        },
    );
    let divergence = match (&naive, &linear) {
        (Err(e), _) => Some(format!("naive engine error: {e}")),
        (_, Err(e)) => Some(format!("linear engine error: {e}")),
        (Ok(a), Ok(b)) => {
            if a.verdict.is_accept() != b.verdict.is_accept() {
                Some(format!(
                    "verdicts differ: naive {:?}, linear {:?}",
                    a.verdict, b.verdict
                ))
            } else {
                let (pa, pb) = (regular_trace(a), regular_trace(b));
                if pa != pb {
                    let at = pa
                        .iter()
                        .zip(&pb)
                        .position(|(x, y)| x != y)
                        .unwrap_or(pa.len().min(pb.len()));
                    Some(format!(
                        "regular traces differ at move {at} (naive {} moves, linear {} moves)",
                        pa.len(),
                        pb.len()
                    ))
                } else {
                    None
                }
            }
        }
    };
    Comparison {
        naive: naive.ok(),
        linear: linear.ok(),
        divergence,
    }
}

fn machine_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..count).map(|_| rng.next_u64()).collect()
}

/// Runs a fuzz campaign. Machines run in parallel; the report lists
/// divergences in machine order, then word order.
pub fn fuzz(cfg: &FuzzConfig) -> FuzzReport {
    let seeds = machine_seeds(cfg.seed, cfg.machines);
    let per_machine: Vec<(u64, u64, Vec<Divergence>)> = seeds
        .par_iter()
        .enumerate()
        .map(|(idx, &mseed)| {
            let aut = random_automaton(&machine_params(cfg, mseed));
            let mut rng = SplitMix64::seed_from_u64(mseed ^ 0x5eed);
            let mut runs = 0;
            let mut checks = 0;
            let mut found = Vec::new();
            for w in fuzz_words(&aut, cfg, &mut rng) {
                let cmp = compare(&aut, &w, cfg.max_steps, cfg.fault);
                runs += 1;
                checks += cmp.linear.as_ref().map_or(0, |o| o.shadow_checks);
                if let Some(detail) = cmp.divergence {
                    found.push(Divergence {
                        machine: idx,
                        machine_seed: mseed,
                        word: aut.format_word(&w),
                        detail,
                    });
                }
            }
            (runs, checks, found)
        })
        .collect();
    let mut report = FuzzReport {
        machines: cfg.machines,
        ..FuzzReport::default()
    };
    for (runs, checks, found) in per_machine {
        report.runs += runs;
        report.shadow_checks += checks;
        report.divergences.extend(found);
    }
    report
}

/// Writes a reproducer bundle for `d` into `dir/m<machine>_<n>`. Returns
/// the bundle directory.
pub fn write_reproducer(
    cfg: &FuzzConfig,
    d: &Divergence,
    dir: &Path,
    n: usize,
) -> io::Result<PathBuf> {
    let aut = random_automaton(&machine_params(cfg, d.machine_seed));
    let word = aut
        .parse_word(&d.word)
        .or_else(|_| aut.parse_tokens(&d.word))
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
    let bundle = dir.join(format!("m{}_{n}", d.machine));
    fs::create_dir_all(&bundle)?;
    fs::write(bundle.join("machine.limla"), serialize_machine(&aut))?;
    fs::write(bundle.join("word.txt"), format!("{}\n", d.word))?;

    let naive = run_naive(
        &aut,
        &word,
        RunOptions {
            trace: true,
            max_steps: Some(cfg.max_steps),
        },
    );
    // Without shadow checking the faulty run still produces a trace.
    let linear = run_linear(
        &aut,
        &word,
        LinearOptions {
            trace: true,
            shadow: false,
            max_steps: Some(cfg.max_steps),
            fault: cfg.fault,
        },
    );
    let mut diff = format!("{}\n", d.detail);
    for (name, out, is_linear) in [("naive", &naive, false), ("linear", &linear, true)] {
        let mut buf = Vec::new();
        match out {
            Ok(o) => write_jsonl(&aut, o, is_linear, &mut buf)?,
            Err(e) => {
                buf.extend(format!("{}\n", serde_json::json!({ "error": e.to_string() })).bytes())
            }
        }
        fs::write(bundle.join(format!("{name}.trace.jsonl")), buf)?;
    }
    if let (Ok(a), Ok(b)) = (&naive, &linear) {
        let (ra, rb) = (
            format_regular(&aut, &regular_trace(a)),
            format_regular(&aut, &regular_trace(b)),
        );
        for (i, (x, y)) in ra.lines().zip(rb.lines()).enumerate() {
            if x != y {
                let _ = writeln!(diff, "move {i}:\n- naive:  {x}\n+ linear: {y}");
                break;
            }
        }
        let _ = writeln!(
            diff,
            "naive regular moves: {}, linear regular moves: {}",
            ra.lines().count(),
            rb.lines().count()
        );
    }
    fs::write(bundle.join("diff.txt"), diff)?;
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_cap() {
        assert_eq!(exhaustive_len(2, 10), 10);
        assert_eq!(exhaustive_len(2, 20), 12);
        assert_eq!(exhaustive_len(3, 20), 7);
        assert_eq!(exhaustive_len(1, 30), 30);
    }

    #[test]
    fn small_campaign_is_clean_and_deterministic() {
        let cfg = FuzzConfig {
            machines: 12,
            maxlen: 6,
            seed: 99,
            ..FuzzConfig::default()
        };
        let a = fuzz(&cfg);
        assert!(a.divergences.is_empty(), "{}", a.summary());
        assert!(a.shadow_checks > 0);
        assert_eq!(a, fuzz(&cfg));
    }

    #[test]
    fn counted_campaign_is_clean() {
        let cfg = FuzzConfig {
            machines: 12,
            maxlen: 6,
            mode: FuzzMode::Counted,
            d: 3,
            seed: 5,
            ..FuzzConfig::default()
        };
        let r = fuzz(&cfg);
        assert!(r.divergences.is_empty(), "{}", r.summary());
    }

    #[test]
    fn faulty_engine_is_caught_with_reproducer() {
        let cfg = FuzzConfig {
            machines: 30,
            maxlen: 8,
            fault: Fault::SkipRightMerge,
            seed: 1,
            ..FuzzConfig::default()
        };
        let r = fuzz(&cfg);
        assert!(!r.divergences.is_empty());
        let dir = std::env::temp_dir().join(format!("limla-fuzz-test-{}", std::process::id()));
        let bundle = write_reproducer(&cfg, &r.divergences[0], &dir, 0).unwrap();
        for f in [
            "machine.limla",
            "word.txt",
            "naive.trace.jsonl",
            "linear.trace.jsonl",
            "diff.txt",
        ] {
            assert!(bundle.join(f).is_file(), "{f}");
        }
        let text = fs::read_to_string(bundle.join("machine.limla")).unwrap();
        assert!(crate::format::parse_machine(&text).is_ok());
        fs::remove_dir_all(&dir).unwrap();
    }
}
