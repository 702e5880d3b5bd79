use cg_harness::claims;
use cg_harness::config::load_config_dir;
use cg_harness::report::{summary_markdown, to_csv, write_atomic};
use clap::{Parser, Subcommand};
use countable_games::catalog::{self, strategies, windows};
use countable_games::engine::simulate_mc;
use countable_games::game::{BoundaryPolicy, StateId, Tag};
use countable_games::solver::{bracket_at, check_supermartingale};
use countable_games::strategy::{Player, Strategy};
use num_traits::ToPrimitive;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "countable-games",
    about = "Reproduces the quantitative claims about countable stochastic reachability games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one registered claim.
    Reproduce {
        claim: String,
        /// Parameter overrides, repeatable: --set key=value
        #[arg(long = "set", value_parser = parse_kv)]
        set: Vec<(String, String)>,
        /// Output directory for the CSV (default: ./out)
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run every registered claim.
    RunAll {
        /// Directory with *.cfg override files
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Bracket the value of a catalog game state.
    Value {
        /// big_match_n | big_match_z:<k> | tb_big_match_n
        game: String,
        /// c<i>
        state: String,
        #[arg(long, default_value_t = 40)]
        radius: u32,
    },
    /// Estimate a reach probability by simulation.
    Simulate {
        /// big_match_n | tb_big_match_n | inf_branch_no_mr | inf_branch_no_markov | nested:<k> | conc_optmax | infbranch_optmin
        game: String,
        /// max_bm:<x>:<N> | max_bm_tb:<x>:<N> | mr_inv_squares | mr_const:<p> | max_as_winning | opt_max | random:<seed>
        sigma: String,
        /// fair_coin | always:<b> | opt_min | random:<seed>
        pi: String,
        #[arg(long, default_value_t = 1000)]
        horizon: u64,
        #[arg(long, default_value_t = 10000)]
        episodes: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// start state, e.g. c3 or u or s0 (default: the game's start)
        #[arg(long)]
        start: Option<String>,
    },
}

fn parse_kv(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got {s}"))
}

fn init_threads() {
    if let Ok(n) = std::env::var("CG_THREADS") {
        if let Ok(n) = n.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Reproduce { claim, set, out } => {
            claims::verify_registry()?;
            let outcome = claims::reproduce(&claim, &set)?;
            let csv = to_csv(&outcome.rows);
            let path = out.join(format!("{}.csv", claim.to_lowercase()));
            write_atomic(&path, &csv)?;
            let failed = outcome.rows.iter().filter(|r| !r.pass).count();
            println!(
                "{}: {} rows, {} failed, {} ms -> {}",
                outcome.id,
                outcome.rows.len(),
                failed,
                outcome.runtime_ms,
                path.display()
            );
            if let Some(e) = &outcome.error {
                eprintln!("error: {e}");
                return Ok(ExitCode::from(1));
            }
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::RunAll { config, out } => {
            let overrides = match config {
                Some(dir) => load_config_dir(&dir)?,
                None => Default::default(),
            };
            let outcomes = claims::run_all(&overrides)?;
            for o in &outcomes {
                let path = out.join(format!("{}.csv", o.id.to_lowercase()));
                write_atomic(&path, &to_csv(&o.rows))?;
            }
            let md = summary_markdown(&outcomes);
            write_atomic(&out.join("summary.md"), &md)?;
            print!("{md}");
            let all_pass = outcomes.iter().all(|o| o.passed());
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Value {
            game,
            state,
            radius,
        } => {
            let (g, window, certified) = match game.split_once(':') {
                None if game == "big_match_n" => (
                    catalog::big_match_n(),
                    windows::bm_window(radius, BoundaryPolicy::PessimisticMax),
                    true,
                ),
                None if game == "tb_big_match_n" => (
                    catalog::tb_big_match_n(),
                    windows::tb_window(radius, 2 * radius, BoundaryPolicy::PessimisticMax),
                    false,
                ),
                Some(("big_match_z", k)) => {
                    let k: u32 = k.parse()?;
                    (
                        catalog::big_match_z(k),
                        windows::bmz_window(k, radius, BoundaryPolicy::PessimisticMax),
                        true,
                    )
                }
                _ => return Err(format!("unknown game {game}").into()),
            };
            let s = parse_state(&state)?;
            let (lo, plain_hi) = bracket_at(&g, &s, &window)?;
            let mut hi = plain_hi;
            if certified {
                let cert = strategies::bm_value_certificate();
                check_supermartingale(&g, &cert, &g.enumerate_states(2000))
                    .map_err(|e| format!("certificate: {e}"))?;
                if let Some(c) = (cert.candidate)(&s) {
                    hi = hi.min(c.to_f64().unwrap());
                }
            }
            println!("{game} {state} (radius {radius}): [{lo:.6}, {hi:.6}]");
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            game,
            sigma,
            pi,
            horizon,
            episodes,
            seed,
            start,
        } => {
            let g = parse_game(&game)?;
            let sig = parse_sigma(&g, &sigma)?;
            let p = parse_pi(&g, &pi)?;
            let s = match start {
                Some(s) => parse_state(&s)?,
                None => g.start_hint().cloned().ok_or("game has no start hint")?,
            };
            let est = simulate_mc(&g, &sig, &p, &s, horizon, episodes, seed, 0.99)?;
            println!(
                "P(reach within {horizon}) in [{:.5}, {:.5}] ({} episodes, seed {seed})",
                est.interval.lo, est.interval.hi, episodes
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn parse_state(s: &str) -> Result<StateId, Box<dyn std::error::Error>> {
    if s == "u" {
        return Ok(StateId::bare(Tag::U));
    }
    if s == "s0" {
        return Ok(StateId::bare(Tag::S0));
    }
    if let Some(i) = s.strip_prefix('c') {
        return Ok(StateId::new(Tag::C, vec![i.parse()?]));
    }
    Err(format!("unknown state {s}").into())
}

fn parse_game(name: &str) -> Result<countable_games::Game, Box<dyn std::error::Error>> {
    Ok(match name.split_once(':') {
        None => match name {
            "big_match_n" => catalog::big_match_n(),
            "tb_big_match_n" => catalog::tb_big_match_n(),
            "inf_branch_no_mr" => catalog::inf_branch_no_mr(),
            "inf_branch_no_markov" => catalog::inf_branch_no_markov(),
            "combined" => catalog::combined(),
            "conc_optmax" => catalog::conc_optmax(),
            "infbranch_optmin" => catalog::infbranch_optmin(),
            _ => return Err(format!("unknown game {name}").into()),
        },
        Some(("big_match_z", k)) => catalog::big_match_z(k.parse()?),
        Some(("nested", k)) => catalog::nested(k.parse()?),
        _ => return Err(format!("unknown game {name}").into()),
    })
}

fn parse_sigma(
    g: &countable_games::Game,
    name: &str,
) -> Result<Strategy, Box<dyn std::error::Error>> {
    let parts: Vec<&str> = name.split(':').collect();
    Ok(match parts.as_slice() {
        ["max_bm", x, n] => strategies::max_bm_strategy(x.parse()?, n.parse()?),
        ["max_bm_tb", x, n] => strategies::max_bm_strategy_tb(x.parse()?, n.parse()?),
        ["mr_inv_squares"] => strategies::mr_from_f(&strategies::MrFamily::inverse_squares()),
        ["mr_const", p] => strategies::mr_from_f(&strategies::MrFamily::constant(p.parse()?)),
        ["max_as_winning"] => strategies::max_as_winning(g)?,
        ["opt_max"] => strategies::opt_max_conc_optmax(),
        ["random", seed] => strategies::random_memoryless(g, Player::Maximizer, seed.parse()?),
        _ => return Err(format!("unknown maximizer strategy {name}").into()),
    })
}

fn parse_pi(
    g: &countable_games::Game,
    name: &str,
) -> Result<Strategy, Box<dyn std::error::Error>> {
    let parts: Vec<&str> = name.split(':').collect();
    Ok(match parts.as_slice() {
        ["fair_coin"] => strategies::min_fair_coin(),
        ["always", b] => strategies::min_always(b.parse()?),
        ["opt_min"] => strategies::opt_min_infbranch(),
        ["random", seed] => strategies::random_memoryless(g, Player::Minimizer, seed.parse()?),
        _ => return Err(format!("unknown minimizer strategy {name}").into()),
    })
}
