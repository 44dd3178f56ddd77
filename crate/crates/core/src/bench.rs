//! Step-count benchmarks and log-log scaling fits.

use std::fmt;
use std::time::Instant;

use rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;

use crate::linear::{run_linear, LinearOptions};
use crate::model::{Automaton, SymbolId};
use crate::naive::{run_naive, RunOptions};
use crate::trace::{RunError, RunOutcome};
use crate::zoo::random_word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Engine {
    Naive,
    Linear,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Naive => "naive",
            Engine::Linear => "linear",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Input family for a benchmark.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    /// `a^(n/2) b^(n - n/2)`; needs input symbols `a` and `b`.
    Anbn,
    /// `n` copies of the first input symbol.
    Unary,
    /// Uniform random word drawn from a splitmix64 stream seeded with
    /// `seed ^ n`.
    Random(u64),
}

impl Generator {
    pub fn parse(text: &str) -> Result<Self, String> {
        match text {
            "anbn" => Ok(Generator::Anbn),
            "unary" => Ok(Generator::Unary),
            _ => match text.strip_prefix("random:") {
                Some(seed) => seed
                    .parse()
                    .map(Generator::Random)
                    .map_err(|_| format!("bad seed in generator `{text}`")),
                None => Err(format!(
                    "unknown generator `{text}` (anbn, unary, random:SEED)"
                )),
            },
        }
    }

    pub fn word(self, aut: &Automaton, n: usize) -> Result<Vec<SymbolId>, String> {
        match self {
            Generator::Anbn => {
                let find = |name| {
                    aut.symbol_id(name)
                        .filter(|s| aut.is_input(*s))
                        .ok_or_else(|| format!("generator anbn needs input symbol `{name}`"))
                };
                let (a, b) = (find("a")?, find("b")?);
                let half = n / 2;
                Ok((0..n).map(|i| if i < half { a } else { b }).collect())
            }
            Generator::Unary => match aut.input.first() {
                Some(&a) => Ok(vec![a; n]),
                None => Err("machine has an empty input alphabet".into()),
            },
            Generator::Random(seed) => {
                if aut.input.is_empty() {
                    return Err("machine has an empty input alphabet".into());
                }
                let mut rng = SplitMix64::seed_from_u64(seed ^ n as u64);
                Ok(random_word(aut, n, &mut rng))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRow {
    pub machine: String,
    pub engine: Engine,
    pub n: usize,
    pub steps: u64,
    pub loop_iterations: u64,
    pub wall_ns: u128,
    pub verdict: &'static str,
}

pub const CSV_HEADER: &str = "machine,engine,n,steps,loop_iterations,wall_ns,verdict";

impl BenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.machine,
            self.engine,
            self.n,
            self.steps,
            self.loop_iterations,
            self.wall_ns,
            self.verdict
        )
    }
}

pub fn run_engine(
    engine: Engine,
    aut: &Automaton,
    word: &[SymbolId],
) -> Result<RunOutcome, RunError> {
    match engine {
        Engine::Naive => run_naive(aut, word, RunOptions::default()),
        Engine::Linear => run_linear(aut, word, LinearOptions::default()),
    }
}

/// One row per `(engine, n)`, sorted by engine then `n`.
pub fn bench(
    machine: &str,
    aut: &Automaton,
    gen: Generator,
    lengths: &[usize],
    engines: &[Engine],
) -> Result<Vec<BenchRow>, String> {
    let words = lengths
        .iter()
        .map(|&n| gen.word(aut, n).map(|w| (n, w)))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(Engine, usize, &[SymbolId])> = engines
        .iter()
        .flat_map(|&e| words.iter().map(move |(n, w)| (e, *n, w.as_slice())))
        .collect();
    let mut rows = jobs
        .into_par_iter()
        .map(|(engine, n, word)| {
            let start = Instant::now();
            let out = run_engine(engine, aut, word).map_err(|e| format!("{engine} n={n}: {e}"))?;
            let wall_ns = start.elapsed().as_nanos();
            Ok(BenchRow {
                machine: machine.to_string(),
                engine,
                n,
                steps: out.steps,
                loop_iterations: out.loop_iterations(),
                wall_ns,
                verdict: if out.verdict.is_accept() {
                    "accept"
                } else {
                    "reject"
                },
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    rows.sort_by_key(|r| (r.engine, r.n));
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the log-log residuals.
    pub residual: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FitError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate point (n={0}, steps={1})")]
    Degenerate(u64, u64),
    #[error("rows mix machines, engines or verdicts")]
    Mixed,
    #[error("n must be strictly increasing")]
    NotMonotone,
}

/// Least-squares line through `(ln n, ln steps)`.
pub fn fit_points(points: &[(u64, u64)]) -> Result<ScalingFit, FitError> {
    if points.len() < 3 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    if let Some(&(n, s)) = points.iter().find(|(n, s)| *n == 0 || *s == 0) {
        return Err(FitError::Degenerate(n, s));
    }
    if points.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(FitError::NotMonotone);
    }
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, s)| ((n as f64).ln(), (s as f64).ln()))
        .collect();
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xy
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Ok(ScalingFit {
        slope,
        intercept,
        residual: (sse / k).sqrt(),
        points: xy.len(),
    })
}

/// Fits `steps` against `n` over rows of one machine, engine and verdict.
pub fn fit_scaling(rows: &[BenchRow]) -> Result<ScalingFit, FitError> {
    if let Some(first) = rows.first() {
        if rows.iter().any(|r| {
            r.machine != first.machine || r.engine != first.engine || r.verdict != first.verdict
        }) {
            return Err(FitError::Mixed);
        }
    }
    let points: Vec<(u64, u64)> = rows.iter().map(|r| (r.n as u64, r.steps)).collect();
    fit_points(&points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn exact_power_laws() {
        let quad: Vec<(u64, u64)> = [8u64, 16, 32, 64].iter().map(|&n| (n, n * n)).collect();
        assert!((fit_points(&quad).unwrap().slope - 2.0).abs() < 1e-9);
        let lin: Vec<(u64, u64)> = [3u64, 7, 100].iter().map(|&n| (n, 5 * n)).collect();
        let fit = fit_points(&lin).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-9);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn fit_errors() {
        assert_eq!(
            fit_points(&[(1, 1), (2, 2)]),
            Err(FitError::TooFewPoints(2))
        );
        assert_eq!(
            fit_points(&[(1, 1), (2, 0), (3, 3)]),
            Err(FitError::Degenerate(2, 0))
        );
        assert_eq!(
            fit_points(&[(0, 1), (2, 2), (3, 3)]),
            Err(FitError::Degenerate(0, 1))
        );
        assert_eq!(
            fit_points(&[(1, 1), (3, 2), (2, 3)]),
            Err(FitError::NotMonotone)
        );
    }

    #[test]
    fn generators() {
        let aut = zoo::build_anbn();
        assert_eq!(
            aut.format_word(&Generator::Anbn.word(&aut, 5).unwrap()),
            "aabbb"
        );
        assert_eq!(
            aut.format_word(&Generator::Unary.word(&aut, 3).unwrap()),
            "aaa"
        );
        let r = Generator::Random(9);
        assert_eq!(r.word(&aut, 40).unwrap(), r.word(&aut, 40).unwrap());
        assert_eq!(Generator::parse("random:12"), Ok(Generator::Random(12)));
        assert!(Generator::parse("random:x").is_err());
        assert!(Generator::parse("zigzag").is_err());
    }

    #[test]
    fn anbn_fits() {
        let aut = zoo::build_anbn();
        let lengths = [64, 128, 256, 512];
        let rows = bench(
            "anbn",
            &aut,
            Generator::Anbn,
            &lengths,
            &[Engine::Naive, Engine::Linear],
        )
        .unwrap();
        assert_eq!(rows.len(), 8);
        let (naive, linear) = rows.split_at(4);
        let slope_n = fit_scaling(naive).unwrap().slope;
        let slope_l = fit_scaling(linear).unwrap().slope;
        assert!((1.8..=2.2).contains(&slope_n), "naive slope {slope_n}");
        assert!((0.8..=1.2).contains(&slope_l), "linear slope {slope_l}");
        assert_eq!(fit_scaling(&rows), Err(FitError::Mixed));
    }

    #[test]
    fn sweeper_naive_is_quadratic() {
        let aut = zoo::build_sweeper();
        let rows = bench(
            "sweeper",
            &aut,
            Generator::Unary,
            &[32, 64, 128, 256],
            &[Engine::Naive],
        )
        .unwrap();
        let slope = fit_scaling(&rows).unwrap().slope;
        assert!((1.8..=2.2).contains(&slope), "{slope}");
    }

    #[test]
    fn step_columns_are_deterministic() {
        let aut = zoo::build_anbn();
        let strip = |rows: Vec<BenchRow>| -> Vec<(Engine, usize, u64, u64)> {
            rows.into_iter()
                .map(|r| (r.engine, r.n, r.steps, r.loop_iterations))
                .collect()
        };
        let run = || {
            bench(
                "anbn",
                &aut,
                Generator::Random(3),
                &[10, 20, 30],
                &[Engine::Naive, Engine::Linear],
            )
            .unwrap()
        };
        assert_eq!(strip(run()), strip(run()));
    }
}
