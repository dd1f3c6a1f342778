//! The `ratshare` command line.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage or input error,
//! 3 degenerate tie in `analyze`.

pub mod config;
pub mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::equilibrium::{
    abstain_weakly_dominates, check_profile, iterated_weak_dominance, pure_equilibria,
    verify_theorem3, BroadcastGame,
};
use crate::error::Error;
use crate::field::PrimeField;
use crate::game::{expected_utilities, StrategyProfile, UtilityModel};
use crate::montecarlo::simulate_sharded;
use crate::shamir::{deal, read_shares_csv, reconstruct, write_shares_csv, ShareParams};

use config::{parse_profile, Game, GameConfig};
use verify::{run_suite, VerifyOptions, MAX_N_LIMIT, SUITES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ratshare",
    version,
    about = "Secret sharing among selfish participants"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deal Shamir shares of a secret.
    Share {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        secret: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; a `.json` sidecar with the parameters is written beside it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the secret from a share file.
    Reconstruct {
        /// Field modulus; read from the sidecar when omitted.
        #[arg(long)]
        p: Option<u64>,
        file: PathBuf,
    },
    /// Equilibrium analysis of a game config.
    Analyze {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=MAX_N_LIMIT as u64))]
        max_n: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo estimate of expected utilities next to the exact values.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated disclosure probabilities; overrides the config profile.
        #[arg(long)]
        profile: Option<String>,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        shards: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Theorem3,
    Ht,
    Async,
    Lemma1,
    Shamir,
    All,
}

impl SuiteArg {
    fn names(self) -> Vec<&'static str> {
        match self {
            SuiteArg::Theorem3 => vec!["theorem3"],
            SuiteArg::Ht => vec!["ht"],
            SuiteArg::Async => vec!["async"],
            SuiteArg::Lemma1 => vec!["lemma1"],
            SuiteArg::Shamir => vec!["shamir"],
            SuiteArg::All => SUITES.to_vec(),
        }
    }
}

/// A command failure: exit code plus message for stderr.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DegenerateTie { .. } => Self {
                code: EXIT_DEGENERATE,
                message: e.to_string(),
            },
            _ => Self::usage(e),
        }
    }
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Self::usage(e)
    }
}

/// Buffered command result: stdout text, stderr text and exit code.
struct Output {
    stdout: String,
    stderr: String,
    code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            stderr: String::new(),
            code: EXIT_OK,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Stdout is written only after the command has finished.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(output) => {
            let _ = err.write_all(output.stderr.as_bytes());
            if out
                .write_all(output.stdout.as_bytes())
                .and_then(|_| out.flush())
                .is_err()
            {
                return EXIT_USAGE;
            }
            output.code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command) -> Result<Output, Failure> {
    match command {
        Command::Share {
            p,
            k,
            n,
            secret,
            seed,
            out,
        } => cmd_share(p, k, n, secret, seed, out.as_deref()),
        Command::Reconstruct { p, file } => cmd_reconstruct(p, &file),
        Command::Analyze { config } => cmd_analyze(&config),
        Command::Verify { suite, max_n, seed } => {
            Ok(cmd_verify(suite, max_n.map(|m| m as usize), seed))
        }
        Command::Simulate {
            config,
            profile,
            samples,
            seed,
            shards,
        } => cmd_simulate(&config, profile.as_deref(), samples, seed, shards),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn cmd_share(
    p: u64,
    k: usize,
    n: usize,
    secret: u64,
    seed: u64,
    out: Option<&Path>,
) -> Result<Output, Failure> {
    let field = PrimeField::new(p)?;
    if secret >= p {
        return Err(Failure::usage(format!(
            "secret {secret} is not an element of GF({p})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dealing = deal(field.element(secret), k, n, &mut rng)?;
    let mut csv = Vec::new();
    write_shares_csv(&dealing.shares, &mut csv).map_err(Failure::usage)?;
    match out {
        None => Ok(Output::ok(String::from_utf8(csv).expect("csv is ascii"))),
        Some(path) => {
            let sidecar = sidecar_path(path);
            fs::write(path, &csv)
                .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
            fs::write(&sidecar, to_json(&dealing.params()))
                .map_err(|e| Failure::usage(format!("cannot write {}: {e}", sidecar.display())))?;
            Ok(Output::ok(String::new()))
        }
    }
}

fn cmd_reconstruct(p: Option<u64>, file: &Path) -> Result<Output, Failure> {
    let sidecar = sidecar_path(file);
    let params: Option<ShareParams> =
        match fs::read_to_string(&sidecar) {
            Ok(text) => Some(serde_json::from_str(&text).map_err(|e| {
                Failure::usage(format!("invalid sidecar {}: {e}", sidecar.display()))
            })?),
            Err(_) => None,
        };
    let p = match (p, params) {
        (Some(flag), Some(side)) if flag != side.p => {
            return Err(Failure::usage(format!(
                "--p {flag} conflicts with p = {} in {}",
                side.p,
                sidecar.display()
            )))
        }
        (Some(flag), _) => flag,
        (None, Some(side)) => side.p,
        (None, None) => return Err(Failure::usage("--p is required when no sidecar is present")),
    };
    let input = fs::File::open(file)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", file.display())))?;
    let shares = read_shares_csv(input, p).map_err(Failure::usage)?;
    let secret = reconstruct(&shares, p)?;
    let mut stderr = String::new();
    if let Some(side) = params {
        if side.k > shares.len() {
            stderr = format!(
                "warning: threshold is {} but only {} share(s) supplied; result is not the dealt secret\n",
                side.k,
                shares.len()
            );
        }
    }
    Ok(Output {
        stdout: format!("{}\n", secret.value()),
        stderr,
        code: EXIT_OK,
    })
}

fn load_game(path: &Path) -> Result<Game, Failure> {
    Ok(GameConfig::load(path)?.build()?)
}

fn merge_object(target: &mut Value, extra: Value) {
    if let (Value::Object(t), Value::Object(e)) = (target, extra) {
        t.extend(e);
    }
}

fn cmd_analyze(path: &Path) -> Result<Output, Failure> {
    let game = load_game(path)?;
    let n = game.access.n();
    let mut report = json!({
        "model": match game.utilities {
            UtilityModel::CommonGood(_) => "common_good",
            UtilityModel::Greedy(_) => "greedy",
        },
        "good": game.utilities.good_label(),
        "access": game.access.to_spec(),
    });
    match &game.utilities {
        UtilityModel::CommonGood(u) => {
            let eq = verify_theorem3(&game.access, u)?;
            merge_object(
                &mut report,
                serde_json::to_value(&eq).expect("report serializes"),
            );
            if let Some(alpha) = &game.profile {
                let check = check_profile(&game.access, u, alpha)?;
                merge_object(&mut report, json!({ "profile_check": check }));
            }
        }
        UtilityModel::Greedy(u) => {
            let k = game.access.threshold_k().ok_or(Error::NotThreshold)?;
            let bg = BroadcastGame::new(k, *u)?;
            let equilibria = pure_equilibria(&bg)?;
            let dominance = iterated_weak_dominance(&bg)?;
            let indicators =
                |it: &mut dyn Iterator<Item = crate::access::Coalition>| -> Vec<Vec<u8>> {
                    it.map(|c| c.indicator(n)).collect()
                };
            merge_object(
                &mut report,
                json!({
                    "k": k,
                    "A": u.reward(),
                    "B": u.penalty(),
                    "axioms_hold": u.meets_axiom_bound(),
                    "abstain_dominates": (1..=n).map(|i| abstain_weakly_dominates(&bg, i)).collect::<Vec<_>>(),
                    "brute_force_ne": indicators(&mut equilibria.iter().map(|e| e.profile)),
                    "payoff_equivalent_ne": indicators(
                        &mut equilibria.iter().filter(|e| e.payoff_equivalent).map(|e| e.profile)
                    ),
                    "dominance_survivors": indicators(&mut dominance.survivors.iter().copied()),
                    "deletions": dominance.deletions,
                }),
            );
        }
    }
    Ok(Output::ok(to_json(&report)))
}

fn cmd_verify(suite: SuiteArg, max_n: Option<usize>, seed: u64) -> Output {
    let opts = VerifyOptions { max_n, seed };
    let mut stdout = String::new();
    let mut summaries = Vec::new();
    let mut all_passed = true;
    for name in suite.names() {
        let outcome = run_suite(name, &opts).expect("known suite");
        for line in &outcome.lines {
            stdout.push_str(line);
            stdout.push('\n');
        }
        all_passed &= outcome.passed();
        summaries.push(format!(
            "suite {}: {}/{} checks passed",
            outcome.name,
            outcome.checks - outcome.failures,
            outcome.checks
        ));
    }
    for s in summaries {
        stdout.push_str(&s);
        stdout.push('\n');
    }
    stdout.push_str(if all_passed {
        "result: pass\n"
    } else {
        "result: fail\n"
    });
    Output {
        stdout,
        stderr: String::new(),
        code: if all_passed {
            EXIT_OK
        } else {
            EXIT_VERIFY_FAILED
        },
    }
}

fn parse_profile_flag(text: &str, n: usize) -> Result<StrategyProfile, Failure> {
    let values = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("malformed profile entry `{}`", s.trim())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(parse_profile(&values, n)?)
}

#[derive(Serialize)]
struct SimulateReport {
    means: Vec<f64>,
    stderr: Vec<f64>,
    exact: Vec<f64>,
    samples: u64,
    seed: u64,
}

fn cmd_simulate(
    path: &Path,
    profile: Option<&str>,
    samples: u64,
    seed: Option<u64>,
    shards: u64,
) -> Result<Output, Failure> {
    let game = load_game(path)?;
    let u = match &game.utilities {
        UtilityModel::CommonGood(u) => u,
        UtilityModel::Greedy(_) => {
            return Err(Failure::usage("simulate requires the common_good model"))
        }
    };
    let alpha = match (profile, &game.profile) {
        (Some(text), _) => parse_profile_flag(text, game.access.n())?,
        (None, Some(alpha)) => alpha.clone(),
        (None, None) => {
            return Err(Failure::usage(
                "no profile given in --profile or the config",
            ))
        }
    };
    let seed = seed.or(game.seed).unwrap_or(0);
    let sim = simulate_sharded(&game.access, u, &alpha, samples, seed, shards)?;
    let exact = expected_utilities(&game.access, u, &alpha)?;
    Ok(Output::ok(to_json(&SimulateReport {
        means: sim.means,
        stderr: sim.stderr,
        exact,
        samples: sim.samples,
        seed: sim.seed,
    })))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("ratshare").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn share_prints_csv_without_out() {
        let (code, out, _) =
            run_capture(&["share", "--p", "7", "--k", "1", "--n", "2", "--secret", "4"]);
        assert_eq!(code, 0);
        assert_eq!(out, "participant,x,y\n1,1,4\n2,2,4\n");
    }

    #[test]
    fn share_rejects_bad_parameters_silently_on_stdout() {
        for args in [
            &["share", "--p", "5", "--k", "3", "--n", "6"][..],
            &["share", "--p", "7", "--k", "2", "--n", "3", "--secret", "7"],
            &["share", "--p", "8", "--k", "1", "--n", "2"],
        ] {
            let (code, out, err) = run_capture(args);
            assert_eq!(code, 2, "{args:?}");
            assert!(out.is_empty());
            assert!(!err.is_empty());
        }
    }

    #[test]
    fn verify_rejects_bad_flags() {
        assert_eq!(run_capture(&["verify", "--suite", "nope"]).0, 2);
        assert_eq!(
            run_capture(&["verify", "--suite", "ht", "--max-n", "0"]).0,
            2
        );
        assert_eq!(
            run_capture(&["verify", "--suite", "ht", "--max-n", "9"]).0,
            2
        );
    }

    #[test]
    fn verify_small_ht_passes() {
        let (code, out, _) = run_capture(&["verify", "--suite", "ht", "--max-n", "3"]);
        assert_eq!(code, 0);
        assert!(out.ends_with("result: pass\n"));
        assert_eq!(out.lines().filter(|l| l.starts_with("ok")).count(), 3);
    }

    #[test]
    fn help_goes_to_stdout() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("verify"));
    }

    #[test]
    fn profile_flag_parsing() {
        assert_eq!(
            parse_profile_flag("0.5, 1,0", 3).unwrap().alpha(),
            &[0.5, 1.0, 0.0]
        );
        assert!(parse_profile_flag("0.5,x,0", 3).is_err());
        assert!(parse_profile_flag("0.5,0.5", 3).is_err());
        assert!(parse_profile_flag("0.5,1.5,0", 3).is_err());
    }
}
