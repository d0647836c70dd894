//! Command-line front end: counting, listing, multiplier computation, normal
//! forms, and brute-force verification, with text or JSON output.
//!
//! Exit codes: 0 success (and verification match), 1 bad input (domain,
//! precondition, unsupported, usage), 2 resource cap exceeded, 3 a
//! verification or cross-method comparison came back negative.

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use nilmult::engine::{verify_multiplier, GeneratorWord, GroupContext};
use nilmult::hallbasis::BasisTable;
use nilmult::multiplier::{
    multiplier_closed_form, multiplier_general, multiplier_general_unchecked,
    multiplier_two_factor, AbelianStructure, Caps, CyclicOrders, ProductSpec,
};
use nilmult::numtheory::witt_chi;
use nilmult::{Error, Result};

#[derive(Parser)]
#[command(
    name = "nilmult",
    version,
    about = "Invariants of nilpotent products of cyclic groups"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Skip input validation. Results outside the supported hypotheses
    /// carry no guarantee.
    #[arg(long, global = true)]
    force: bool,
    /// Maximum number of basic-commutator table entries
    /// (overrides NILMULT_BASIS_CAP).
    #[arg(long, global = true)]
    basis_cap: Option<usize>,
    /// Maximum number of elements a subgroup enumeration may visit
    /// (overrides NILMULT_SUBGROUP_CAP).
    #[arg(long, global = true)]
    subgroup_cap: Option<usize>,
    /// Seed for randomized spot checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    General,
    Closed,
    TwoFactor,
    All,
}

#[derive(Subcommand)]
enum Cmd {
    /// Count the basic commutators of one weight on q generators.
    Witt {
        /// Commutator weight (at least 1).
        #[arg(long)]
        weight: u32,
        /// Number of generators.
        #[arg(long)]
        generators: u64,
    },
    /// List basic commutators up to a weight, or just count them.
    Hall {
        /// Number of generators.
        #[arg(long)]
        generators: u32,
        /// Largest weight to enumerate.
        #[arg(long)]
        max_weight: u32,
        /// Print per-weight counts instead of the listing.
        #[arg(long)]
        count_only: bool,
    },
    /// Compute the c-nilpotent multiplier of an nth nilpotent product of
    /// cyclic groups.
    Multiplier {
        /// Nilpotency class n of the product.
        #[arg(long)]
        class: u32,
        /// Multiplier depth c.
        #[arg(long)]
        c: u32,
        /// Factor orders, comma separated; 0 means infinite cyclic.
        #[arg(long, value_delimiter = ',', required = true)]
        orders: Vec<u64>,
        /// Which computation to run; `all` runs every applicable one and
        /// compares.
        #[arg(long, value_enum, default_value_t = Method::General)]
        method: Method,
    },
    /// Normal form of a word in the generators of a nilpotent product.
    NormalForm {
        /// Nilpotency class of the product (at least 2).
        #[arg(long)]
        class: u32,
        /// Factor orders, comma separated; 0 means infinite cyclic.
        #[arg(long, value_delimiter = ',', required = true)]
        orders: Vec<u64>,
        /// The word, as whitespace-separated gK or gK^E tokens.
        #[arg(long)]
        word: String,
    },
    /// Check a predicted multiplier against brute-force enumeration inside
    /// the bigger product.
    Verify {
        /// Nilpotency class n of the product.
        #[arg(long)]
        class: u32,
        /// Multiplier depth c.
        #[arg(long)]
        c: u32,
        /// Factor orders, comma separated; all must be finite.
        #[arg(long, value_delimiter = ',', required = true)]
        orders: Vec<u64>,
        /// Additionally run this many randomized multiplication checks.
        #[arg(long)]
        spot_checks: Option<u32>,
    },
}

/// What a subcommand produced: a JSON result, the text rendering, and the
/// exit code (0, or 3 for a negative verdict).
struct Outcome {
    result: Value,
    text: String,
    exit: u8,
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::Precondition(_) | Error::Unsupported(_) => 1,
        Error::ResourceCap(_) => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::Precondition(_) => "precondition",
        Error::ResourceCap(_) => "resource-cap",
        Error::Unsupported(_) => "unsupported",
    }
}

/// The exit code a comparison verdict maps to.
fn verdict_exit(agreed: bool) -> u8 {
    if agreed {
        0
    } else {
        3
    }
}

fn env_cap(name: &str) -> Result<Option<usize>> {
    match std::env::var(name) {
        Ok(s) => {
            let v: usize = s.trim().parse().map_err(|_| {
                Error::Domain(format!("{name} must be a positive integer, got {s:?}"))
            })?;
            if v == 0 {
                return Err(Error::Domain(format!("{name} must be positive")));
            }
            Ok(Some(v))
        }
        Err(_) => Ok(None),
    }
}

/// Flag beats environment beats default.
fn resolve_caps(basis_flag: Option<usize>, subgroup_flag: Option<usize>) -> Result<Caps> {
    let mut caps = Caps::default();
    if let Some(v) = basis_flag {
        caps.basis = v;
    } else if let Some(v) = env_cap("NILMULT_BASIS_CAP")? {
        caps.basis = v;
    }
    if let Some(v) = subgroup_flag {
        caps.subgroup = v;
    } else if let Some(v) = env_cap("NILMULT_SUBGROUP_CAP")? {
        caps.subgroup = v;
    }
    Ok(caps)
}

fn parse_spec(class: u32, orders: &[u64]) -> Result<ProductSpec> {
    ProductSpec::new(class, CyclicOrders::new(orders.to_vec())?)
}

fn counts_json(counts: &BTreeMap<u64, u64>) -> Value {
    let mut obj = serde_json::Map::new();
    for (&k, &v) in counts {
        obj.insert(k.to_string(), json!(v));
    }
    Value::Object(obj)
}

fn counts_text(counts: &BTreeMap<u64, u64>) -> String {
    let parts: Vec<String> = counts.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

fn run_witt(weight: u32, generators: u64) -> Result<Outcome> {
    let chi = witt_chi(weight, generators)?;
    let chi_json = match chi.to_u64() {
        Some(v) => json!(v),
        None => json!(chi.to_string()),
    };
    Ok(Outcome {
        result: json!({
            "weight": weight,
            "generators": generators,
            "chi": chi_json,
        }),
        text: chi.to_string(),
        exit: 0,
    })
}

fn run_hall(generators: u32, max_weight: u32, count_only: bool, caps: &Caps) -> Result<Outcome> {
    let table = BasisTable::enumerate(generators, max_weight, caps.basis)?;
    let mut counts = serde_json::Map::new();
    let mut count_lines = Vec::new();
    for w in 1..=max_weight {
        let n = table.weight_range(w).len();
        counts.insert(w.to_string(), json!(n));
        count_lines.push(format!("weight {w}: {n}"));
    }
    let listing: Vec<String> = (0..table.len()).map(|i| table.render(i)).collect();
    let text = if count_only {
        count_lines.push(format!("total: {}", table.len()));
        count_lines.join("\n")
    } else {
        listing.join("\n")
    };
    Ok(Outcome {
        result: json!({
            "generators": generators,
            "max_weight": max_weight,
            "counts": Value::Object(counts),
            "total": table.len(),
            "commutators": if count_only { Value::Null } else { json!(listing) },
        }),
        text,
        exit: 0,
    })
}

/// The closed form wants the shape (free rank, descending divisibility
/// chain); derive that from a flat order list.
fn chain_shape(orders: &[u64]) -> (u32, Vec<u64>) {
    let m = orders.iter().filter(|&&o| o == 0).count() as u32;
    let mut rs: Vec<u64> = orders.iter().copied().filter(|&o| o != 0).collect();
    rs.sort_unstable_by(|a, b| b.cmp(a));
    (m, rs)
}

fn structure_json(s: &AbelianStructure) -> Value {
    let mut v = s.to_json_value();
    if let Value::Object(map) = &mut v {
        map.insert("text".into(), json!(s.to_text()));
    }
    v
}

fn run_multiplier(
    class: u32,
    c: u32,
    orders: &[u64],
    method: Method,
    caps: &Caps,
    force: bool,
) -> Result<Outcome> {
    let spec = parse_spec(class, orders)?;
    if force && method != Method::General {
        return Err(Error::Unsupported(
            "--force only applies to --method general".into(),
        ));
    }
    let general = |spec: &ProductSpec| -> Result<AbelianStructure> {
        if force {
            multiplier_general_unchecked(spec, c, caps)
        } else {
            multiplier_general(spec, c, caps)
        }
    };
    let closed = |_: &ProductSpec| -> Result<AbelianStructure> {
        let (m, rs) = chain_shape(orders);
        multiplier_closed_form(m, &rs, class, c)
    };
    let two_factor = |_: &ProductSpec| -> Result<AbelianStructure> {
        if orders.len() != 2 || orders.contains(&0) {
            return Err(Error::Domain(
                "the two-factor method needs exactly two finite orders".into(),
            ));
        }
        multiplier_two_factor(orders[0], orders[1], class, c)
    };
    let base = json!({
        "class": class,
        "c": c,
        "orders": orders,
    });
    match method {
        Method::General | Method::Closed | Method::TwoFactor => {
            let (name, s) = match method {
                Method::General => ("general", general(&spec)?),
                Method::Closed => ("closed", closed(&spec)?),
                Method::TwoFactor => ("two-factor", two_factor(&spec)?),
                Method::All => unreachable!(),
            };
            let mut result = base;
            if let Value::Object(map) = &mut result {
                map.insert("method".into(), json!(name));
                map.insert("multiplier".into(), structure_json(&s));
            }
            Ok(Outcome {
                result,
                text: s.to_text(),
                exit: 0,
            })
        }
        Method::All => {
            // The general path must succeed; the special forms run when the
            // input fits their shape and are compared against it.
            let g = general(&spec)?;
            let mut results = serde_json::Map::new();
            let mut lines = vec![format!("general: {}", g.to_text())];
            results.insert("general".into(), structure_json(&g));
            let mut agreed = true;
            for (name, f) in [
                (
                    "closed",
                    &closed as &dyn Fn(&ProductSpec) -> Result<AbelianStructure>,
                ),
                ("two-factor", &two_factor),
            ] {
                match f(&spec) {
                    Ok(s) => {
                        if s != g {
                            agreed = false;
                            lines.push(format!("{name}: {} (DISAGREES)", s.to_text()));
                        } else {
                            lines.push(format!("{name}: {}", s.to_text()));
                        }
                        results.insert(name.into(), structure_json(&s));
                    }
                    Err(e) => {
                        lines.push(format!("{name}: skipped ({e})"));
                        results.insert(name.into(), json!({ "skipped": e.to_string() }));
                    }
                }
            }
            lines.push(format!("agreement: {}", if agreed { "yes" } else { "NO" }));
            let mut result = base;
            if let Value::Object(map) = &mut result {
                map.insert("method".into(), json!("all"));
                map.insert("results".into(), Value::Object(results));
                map.insert("agree".into(), json!(agreed));
            }
            Ok(Outcome {
                result,
                text: lines.join("\n"),
                exit: verdict_exit(agreed),
            })
        }
    }
}

fn run_normal_form(
    class: u32,
    orders: &[u64],
    word: &str,
    caps: &Caps,
    force: bool,
) -> Result<Outcome> {
    let spec = parse_spec(class, orders)?;
    let ctx = if force {
        GroupContext::build_unchecked(&spec, caps)?
    } else {
        GroupContext::build(&spec, caps)?
    };
    let parsed: GeneratorWord = word.parse()?;
    let element = ctx.collect(&parsed)?;
    let exps: Vec<Value> = (0..ctx.basis().len())
        .map(|i| {
            json!({
                "commutator": ctx.basis().render(i),
                "weight": ctx.basis().weight(i),
                "modulus": ctx.moduli()[i],
                "exponent": element.exponents()[i].to_string(),
            })
        })
        .collect();
    Ok(Outcome {
        result: json!({
            "class": class,
            "orders": orders,
            "word": word,
            "normal_form": ctx.render_element(&element),
            "exponents": exps,
        }),
        text: ctx.render_element(&element),
        exit: 0,
    })
}

fn random_word(q: u32, rng: &mut ChaCha8Rng) -> GeneratorWord {
    let len = rng.gen_range(0..=6);
    let letters: Vec<(u32, i64)> = (0..len)
        .map(|_| (rng.gen_range(1..=q), rng.gen_range(-4..=4)))
        .collect();
    GeneratorWord::new(letters).expect("letters are in range")
}

/// Randomized cross-check in a context: collecting a concatenation must equal
/// multiplying the collected halves. Returns the number of failures.
fn spot_check(ctx: &GroupContext, rounds: u32, seed: u64) -> Result<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = ctx.basis().generator_count();
    let mut failures = 0;
    for _ in 0..rounds {
        let w1 = random_word(q, &mut rng);
        let w2 = random_word(q, &mut rng);
        let whole = ctx.collect(&w1.concat(&w2))?;
        let split = ctx.multiply(&ctx.collect(&w1)?, &ctx.collect(&w2)?)?;
        if whole != split {
            failures += 1;
        }
    }
    Ok(failures)
}

fn run_verify(
    class: u32,
    c: u32,
    orders: &[u64],
    spot_checks: Option<u32>,
    seed: u64,
    caps: &Caps,
    force: bool,
) -> Result<Outcome> {
    let spec = parse_spec(class, orders)?;
    let report = verify_multiplier(&spec, c, caps, force)?;
    let mut lines = vec![
        format!("predicted: {}", report.predicted.to_text()),
        format!(
            "subgroup: {} elements of weight >= {} inside the class-{} product",
            report.subgroup_size, report.weight_threshold, report.ambient_class
        ),
        format!("abelian: {}", if report.abelian { "yes" } else { "no" }),
        format!("observed orders: {}", counts_text(&report.observed_counts)),
        format!(
            "predicted orders: {}",
            counts_text(&report.predicted_counts)
        ),
    ];
    let mut spots = Value::Null;
    let mut spot_failures = 0;
    if let Some(rounds) = spot_checks {
        let ambient = parse_spec(report.ambient_class, orders)?;
        let ctx = if force {
            GroupContext::build_unchecked(&ambient, caps)?
        } else {
            GroupContext::build(&ambient, caps)?
        };
        spot_failures = spot_check(&ctx, rounds, seed)?;
        lines.push(format!(
            "spot checks: {} run, {} failed",
            rounds, spot_failures
        ));
        spots = json!({ "run": rounds, "failures": spot_failures });
    }
    let ok = report.matched && spot_failures == 0;
    lines.push(format!(
        "verdict: {}",
        if ok { "MATCH" } else { "MISMATCH" }
    ));
    Ok(Outcome {
        result: json!({
            "class": class,
            "c": c,
            "orders": orders,
            "predicted": structure_json(&report.predicted),
            "predicted_counts": counts_json(&report.predicted_counts),
            "observed_counts": counts_json(&report.observed_counts),
            "subgroup_size": report.subgroup_size,
            "ambient_class": report.ambient_class,
            "weight_threshold": report.weight_threshold,
            "abelian": report.abelian,
            "spot_checks": spots,
            "matched": ok,
        }),
        text: lines.join("\n"),
        exit: verdict_exit(ok),
    })
}

fn dispatch(cli: &Cli, caps: &Caps) -> Result<Outcome> {
    match &cli.cmd {
        Cmd::Witt { weight, generators } => run_witt(*weight, *generators),
        Cmd::Hall {
            generators,
            max_weight,
            count_only,
        } => run_hall(*generators, *max_weight, *count_only, caps),
        Cmd::Multiplier {
            class,
            c,
            orders,
            method,
        } => run_multiplier(*class, *c, orders, *method, caps, cli.force),
        Cmd::NormalForm {
            class,
            orders,
            word,
        } => run_normal_form(*class, orders, word, caps, cli.force),
        Cmd::Verify {
            class,
            c,
            orders,
            spot_checks,
        } => run_verify(*class, *c, orders, *spot_checks, cli.seed, caps, cli.force),
    }
}

fn real_main() -> u8 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors; usage problems are input
            // validation and exit 1.
            return match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    1
                }
            };
        }
    };
    let mut warnings: Vec<String> = Vec::new();
    if cli.force {
        warnings.push(
            "--force skips input validation; results outside the supported \
             hypotheses carry no guarantee"
                .into(),
        );
    }
    let outcome =
        resolve_caps(cli.basis_cap, cli.subgroup_cap).and_then(|caps| dispatch(&cli, &caps));
    match (cli.format, outcome) {
        (Format::Json, Ok(o)) => {
            let envelope = json!({
                "ok": true,
                "result": o.result,
                "warnings": warnings,
                "error": Value::Null,
            });
            println!("{envelope}");
            o.exit
        }
        (Format::Json, Err(e)) => {
            let envelope = json!({
                "ok": false,
                "result": Value::Null,
                "warnings": warnings,
                "error": { "kind": error_kind(&e), "message": e.to_string() },
            });
            println!("{envelope}");
            exit_code_for(&e)
        }
        (Format::Text, Ok(o)) => {
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", o.text);
            o.exit
        }
        (Format::Text, Err(e)) => {
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(real_main())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_variants_map_to_documented_exit_codes() {
        assert_eq!(exit_code_for(&Error::Domain("x".into())), 1);
        assert_eq!(exit_code_for(&Error::Precondition("x".into())), 1);
        assert_eq!(exit_code_for(&Error::Unsupported("x".into())), 1);
        assert_eq!(exit_code_for(&Error::ResourceCap("x".into())), 2);
        assert_eq!(error_kind(&Error::ResourceCap("x".into())), "resource-cap");
    }

    #[test]
    fn negative_verdicts_exit_three() {
        assert_eq!(verdict_exit(true), 0);
        assert_eq!(verdict_exit(false), 3);
    }

    #[test]
    fn chain_shape_splits_and_sorts() {
        assert_eq!(chain_shape(&[0, 25, 0, 5]), (2, vec![25, 5]));
        assert_eq!(chain_shape(&[7]), (0, vec![7]));
        assert_eq!(chain_shape(&[0, 0]), (2, vec![]));
    }

    #[test]
    fn flags_beat_defaults_in_cap_resolution() {
        // Environment interplay is covered end to end in the CLI tests,
        // where the child process gets a controlled environment.
        let caps = resolve_caps(Some(123), Some(456)).unwrap();
        assert_eq!(caps.basis, 123);
        assert_eq!(caps.subgroup, 456);
    }

    #[test]
    fn random_words_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let w = random_word(3, &mut rng);
            for &(k, e) in w.letters() {
                assert!((1..=3).contains(&k));
                assert!((-4..=4).contains(&e));
            }
        }
    }
}
