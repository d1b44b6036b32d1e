use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use vagrowth::cosetreps::standard_growth_series;
use vagrowth::intset::Int;
use vagrowth::oracle;
use vagrowth::patterns::{build_pattern_space, PatternSpace, DEFAULT_PATTERN_CAP};
use vagrowth::ratfun::RationalSeries;
use vagrowth::relative::relative_series;
use vagrowth::twisted::{permissible_tuples, reduce_permutations, twisted_growth_series};
use vagrowth::vagroup::{validate, Group, GroupDescription};
use vagrowth::{Error, Result};

#[derive(Parser)]
#[command(name = "vagrowth", version, about = "Exact growth series for virtually abelian groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SeriesOpts {
    /// Group description file (JSON)
    input: PathBuf,
    /// Number of series coefficients to print
    #[arg(long, default_value_t = 12)]
    terms: usize,
    /// Abort if the pattern set grows beyond this size
    #[arg(long)]
    pattern_cap: Option<usize>,
    /// Reserved for reproducibility; all computation is deterministic
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dump pattern and set statistics to stderr
    #[arg(long)]
    debug_sets: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a group description file and report all problems
    Validate { input: PathBuf },
    /// Standard growth series of the group
    Growth {
        #[command(flatten)]
        opts: SeriesOpts,
    },
    /// Twisted conjugacy growth series
    Twisted {
        #[command(flatten)]
        opts: SeriesOpts,
        /// Endomorphism name from the description file
        #[arg(long)]
        endo: String,
    },
    /// Relative growth series of one twisted conjugacy class
    Relative {
        #[command(flatten)]
        opts: SeriesOpts,
        #[arg(long)]
        endo: String,
        /// Base element as a comma-separated generator word (empty = identity)
        #[arg(long, default_value = "")]
        element: String,
    },
    /// Brute-force enumeration tables as CSV
    Oracle {
        input: PathBuf,
        #[arg(long)]
        endo: String,
        #[arg(long, default_value_t = 6)]
        radius: u32,
    },
    /// Diff the twisted series against brute-force class counts
    Check {
        input: PathBuf,
        #[arg(long)]
        endo: String,
        #[arg(long, default_value_t = 6)]
        radius: u32,
        #[arg(long)]
        pattern_cap: Option<usize>,
    },
}

fn json_int(i: &Int) -> serde_json::Value {
    serde_json::Value::Number(
        serde_json::Number::from_str(&i.to_string()).expect("integer literal"),
    )
}

fn json_ints(v: &[Int]) -> serde_json::Value {
    serde_json::Value::Array(v.iter().map(json_int).collect())
}

fn series_json(s: &RationalSeries, terms: usize) -> Result<serde_json::Value> {
    Ok(json!({
        "num": json_ints(s.numerator().coeffs()),
        "den": json_ints(s.denominator().coeffs()),
        "coefficients": json_ints(&s.expand(terms)?),
    }))
}

fn load_group(path: &PathBuf) -> Result<Group> {
    Group::from_json_str(&std::fs::read_to_string(path)?)
}

fn space_for(group: &Group, cap: Option<usize>, debug: bool) -> Result<PatternSpace> {
    let sp = build_pattern_space(group, cap.unwrap_or(DEFAULT_PATTERN_CAP))?;
    if debug {
        eprintln!(
            "abelian generators: {}, transversal generators: {}, patterns: {}",
            sp.x_gens.len(),
            sp.y_gens.len(),
            sp.patterns.len()
        );
    }
    Ok(sp)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Validate { input } => {
            let desc = GroupDescription::from_json_str(&std::fs::read_to_string(&input)?)?;
            let errors = validate(&desc);
            let ok = errors.is_empty();
            println!("{}", json!({ "valid": ok, "errors": errors }));
            Ok(if ok { 0 } else { 2 })
        }
        Command::Growth { opts } => {
            let g = load_group(&opts.input)?;
            let sp = space_for(&g, opts.pattern_cap, opts.debug_sets)?;
            let s = standard_growth_series(&g, &sp)?;
            println!("{}", series_json(&s, opts.terms)?);
            Ok(0)
        }
        Command::Twisted { opts, endo } => {
            let g = load_group(&opts.input)?;
            let sp = space_for(&g, opts.pattern_cap, opts.debug_sets)?;
            let s = twisted_growth_series(&g, &sp, &endo)?;
            let e = g.endo(&endo)?.clone();
            let tuples = reduce_permutations(permissible_tuples(&g, &sp, &e));
            let mut out = series_json(&s, opts.terms)?;
            out["patterns"] = json!(sp.patterns.len());
            out["tuples"] = json!(tuples.len());
            println!("{out}");
            Ok(0)
        }
        Command::Relative { opts, endo, element } => {
            let g = load_group(&opts.input)?;
            let word: Vec<String> = element
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            let base = g.normalize(&word)?;
            let sp = space_for(&g, opts.pattern_cap, opts.debug_sets)?;
            let s = relative_series(&g, &sp, &endo, &base)?;
            println!("{}", series_json(&s, opts.terms)?);
            Ok(0)
        }
        Command::Oracle { input, endo, radius } => {
            let g = load_group(&input)?;
            let beta = oracle::ball_profile(&g, radius);
            let classes = oracle::class_profile(&g, &endo, radius)?;
            println!("radius,beta,classes");
            for r in 0..=radius as usize {
                println!("{r},{},{}", beta[r], classes[r]);
            }
            Ok(0)
        }
        Command::Check { input, endo, radius, pattern_cap } => {
            let g = load_group(&input)?;
            let sp = space_for(&g, pattern_cap, false)?;
            let s = twisted_growth_series(&g, &sp, &endo)?;
            let got = s.expand(radius as usize + 1)?;
            let want = oracle::class_profile(&g, &endo, radius)?;
            for (r, (a, b)) in got.iter().zip(&want).enumerate() {
                if a != &Int::from(*b) {
                    eprintln!("mismatch at radius {r}: series {a}, enumeration {b}");
                    return Ok(1);
                }
            }
            println!(
                "{}",
                json!({ "ok": true, "radius": radius, "series": series_json(&s, radius as usize + 1)? })
            );
            Ok(0)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Malformed(_)
        | Error::InvalidDescription(_)
        | Error::UnknownEndo(_)
        | Error::UnknownLetter(_)
        | Error::Io(_) => 2,
        Error::SizingCap { .. } => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
