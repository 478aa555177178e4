//! `bjgeo`: orthogonality, preservation and isometry queries from the shell.
//!
//! Exit status: 0 for a positive answer, 1 for a negative one, 2 for bad input.

use std::io::Read;
use std::process::ExitCode;

use bjgeo::fixtures::{self, Fixture};
use bjgeo::report::{error_json, SCHEMA};
use bjgeo::sampling::DEFAULT_SEED;
use bjgeo::{run_query, Context, Error};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "bjgeo", version, about = "Birkhoff-James orthogonality certificates")]
struct Cli {
    /// Render the answer as an aligned table instead of one JSON line.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SpaceArgs {
    /// linfN, l1N, lpN (with --p), poly (with --vertices or --facets), inline JSON, or @file.
    #[arg(long, allow_hyphen_values = true)]
    space: String,
    /// Exponent for lp spaces, e.g. 3 or 3/2.
    #[arg(long)]
    p: Option<String>,
    /// Ball vertices for poly spaces: "a,b;c,d;...".
    #[arg(long, allow_hyphen_values = true)]
    vertices: Option<String>,
    /// Ball facets for poly spaces: "a,b;c,d;...".
    #[arg(long, allow_hyphen_values = true)]
    facets: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide x ⊥ y with a certificate or refutation.
    Ortho {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long, default_value = "char", value_parser = ["char", "oracle", "both"])]
        method: String,
    },
    /// Membership of y in x⁺ and x⁻.
    Sides {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Extreme support functionals of x.
    Support {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Order of smoothness of x.
    Smooth {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Associated cones of x.
    Cones {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Preservation of orthogonality by an operator at x.
    Preserve {
        #[command(flatten)]
        space: SpaceArgs,
        /// Codomain space, same syntax as --space. Defaults to the domain.
        #[arg(long, allow_hyphen_values = true)]
        codomain: Option<String>,
        /// Matrix rows separated by ';', entries by ','.
        #[arg(long, allow_hyphen_values = true)]
        op: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        kernel: Option<String>,
        /// Basis vectors separated by ';'.
        #[arg(long, allow_hyphen_values = true)]
        subspace: Option<String>,
        #[arg(long)]
        exists: bool,
        #[arg(long)]
        at_point: bool,
    },
    /// A codimension-two subspace of x^⊥ on which the operator preserves orthogonality.
    Codim2 {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        op: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Certify an operator as (a multiple of) an isometry.
    Isometry {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, allow_hyphen_values = true)]
        op: String,
        /// Run the refined test with n kernels per vertex (l_inf^n and l_1^n only).
        #[arg(long)]
        bkt: bool,
    },
    /// K-set conditions for a finite set of unit vectors of l_p^n.
    Kset {
        #[command(flatten)]
        space: SpaceArgs,
        /// Vectors separated by ';'.
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        /// Scale each vector to norm one first.
        #[arg(long)]
        normalize: bool,
        #[arg(long, default_value = "strong", value_parser = ["strong", "weak"])]
        reading: String,
    },
    /// The operator preserving orthogonality on a finite set without being an isometry multiple.
    Counterexample {
        #[arg(long)]
        p: String,
        #[arg(long)]
        n: usize,
    },
    /// Run a raw JSON query from a file ('-' for stdin).
    Query {
        #[arg(long)]
        file: String,
    },
    /// Regression corpus.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Subcommand)]
enum FixtureAction {
    Run {
        #[arg(long)]
        id: Option<String>,
        /// Print fixture ids with their descriptions.
        #[arg(long)]
        list: bool,
        /// Replay a corpus file instead of the built-in one.
        #[arg(long)]
        file: Option<String>,
    },
}

fn read_source(path: &str) -> Result<String, Error> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Parse(e.to_string()))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{path}: {e}")))
}

fn parse_json(text: &str) -> Result<Value, Error> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn dim_hint(text: &str) -> Option<usize> {
    text.split(';').next().map(|row| row.split(',').count())
}

/// Turns a `--space` argument into a `SpaceSpec` object. `hint` supplies the
/// dimension when the name carries none.
fn space_spec(spec: &str, p: Option<&str>, vertices: Option<&str>, facets: Option<&str>, hint: Option<usize>) -> Result<Value, Error> {
    let spec = spec.trim();
    if let Some(path) = spec.strip_prefix('@') {
        return parse_json(&read_source(path)?);
    }
    if spec.starts_with('{') {
        return parse_json(spec);
    }
    let (kind, rest) = ["linf", "l1", "lp", "poly"]
        .iter()
        .find_map(|k| spec.strip_prefix(k).map(|r| (*k, r)))
        .ok_or_else(|| Error::Parse(format!("unknown space {spec:?}")))?;
    let rest = rest.trim_start_matches('_');
    let dim = if rest.is_empty() {
        None
    } else {
        Some(rest.parse::<usize>().map_err(|_| Error::Parse(format!("bad dimension in {spec:?}")))?)
    };
    let mut out = Map::new();
    out.insert("kind".into(), json!(kind));
    if let Some(d) = dim.or(if kind == "poly" { None } else { hint }) {
        out.insert("dim".into(), json!(d));
    }
    if kind == "lp" {
        let p = p.ok_or_else(|| Error::BadExponent("lp spaces need --p".into()))?;
        out.insert("p".into(), json!(p));
    }
    if kind == "poly" {
        if let Some(v) = vertices {
            out.insert("vertices".into(), json!(v));
        }
        if let Some(f) = facets {
            out.insert("facets".into(), json!(f));
        }
    }
    Ok(Value::Object(out))
}

fn space_value(args: &SpaceArgs, hint: Option<&str>) -> Result<Value, Error> {
    space_spec(&args.space, args.p.as_deref(), args.vertices.as_deref(), args.facets.as_deref(), hint.and_then(dim_hint))
}

fn build_query(command: &Command) -> Result<Value, Error> {
    let q = match command {
        Command::Ortho { space, x, y, method } => {
            json!({"op": "ortho", "space": space_value(space, Some(x))?, "x": x, "y": y, "method": method})
        }
        Command::Sides { space, x, y } => json!({"op": "sides", "space": space_value(space, Some(x))?, "x": x, "y": y}),
        Command::Support { space, x } => json!({"op": "support", "space": space_value(space, Some(x))?, "x": x}),
        Command::Smooth { space, x } => json!({"op": "smooth", "space": space_value(space, Some(x))?, "x": x}),
        Command::Cones { space, x } => json!({"op": "cones", "space": space_value(space, Some(x))?, "x": x}),
        Command::Preserve { space, codomain, op, x, y, kernel, subspace, exists, at_point } => {
            let mut q = Map::new();
            q.insert("op".into(), json!("preserve"));
            q.insert("space".into(), space_value(space, Some(x))?);
            if let Some(c) = codomain {
                let rows = op.split(';').filter(|r| !r.trim().is_empty()).count();
                q.insert("codomain".into(), space_spec(c, space.p.as_deref(), None, None, Some(rows))?);
            }
            q.insert("operator".into(), json!(op));
            q.insert("x".into(), json!(x));
            let mut modes = 0;
            for (key, val) in [("y", y), ("kernel", kernel), ("subspace", subspace)] {
                if let Some(v) = val {
                    q.insert(key.into(), json!(v));
                    modes += 1;
                }
            }
            if *exists {
                q.insert("mode".into(), json!("exists"));
                modes += 1;
            }
            if *at_point {
                q.insert("mode".into(), json!("at_point"));
                modes += 1;
            }
            if modes != 1 {
                return Err(Error::Parse(
                    "give exactly one of --y, --kernel, --subspace, --exists, --at-point".into(),
                ));
            }
            Value::Object(q)
        }
        Command::Codim2 { space, op, x } => {
            json!({"op": "codim2", "space": space_value(space, Some(x))?, "operator": op, "x": x})
        }
        Command::Isometry { space, op, bkt } => {
            json!({"op": "isometry", "space": space_value(space, Some(op))?, "operator": op, "bkt": bkt})
        }
        Command::Kset { space, set, normalize, reading } => json!({
            "op": "kset", "space": space_value(space, Some(set))?, "set": set,
            "normalize": normalize, "reading": reading,
        }),
        Command::Counterexample { p, n } => json!({"op": "counterexample", "p": p, "n": n}),
        Command::Query { file } => parse_json(&read_source(file)?)?,
        Command::Fixtures { .. } => unreachable!("handled separately"),
    };
    Ok(q)
}

fn render(value: &Value, pretty: bool) -> String {
    if !pretty {
        return value.to_string();
    }
    let Value::Object(map) = value else { return value.to_string() };
    let width = map.keys().map(String::len).max().unwrap_or(0);
    map.iter()
        .filter(|(k, _)| k.as_str() != "schema")
        .map(|(k, v)| format!("{k:<width$}  {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn context() -> Context {
    let seed = std::env::var("BJGEO_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED);
    Context { seed }
}

fn fail_input(e: &Error) -> ExitCode {
    println!("{}", error_json(e));
    ExitCode::from(2)
}

fn run_fixtures(id: Option<&str>, list: bool, file: Option<&str>, pretty: bool) -> ExitCode {
    let corpus: Result<Vec<Fixture>, Error> = match file {
        Some(path) => read_source(path).and_then(|t| fixtures::load(&t)),
        None => Ok(fixtures::builtin()),
    };
    let mut corpus = match corpus {
        Ok(c) => c,
        Err(e) => return fail_input(&e),
    };
    if let Some(id) = id {
        corpus.retain(|f| f.id == id);
        if corpus.is_empty() {
            return fail_input(&Error::Parse(format!("no fixture with id {id:?}")));
        }
    }
    if list {
        for f in &corpus {
            println!("{}\t{}", f.id, f.anchor);
        }
        return ExitCode::SUCCESS;
    }
    let outcomes = fixtures::replay_all(&corpus, &context());
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    for o in &outcomes {
        let line = json!({
            "schema": SCHEMA,
            "fixture": o.id,
            "queries": o.queries,
            "passed": o.passed(),
            "mismatches": o.mismatches.iter().map(|m| m.to_json()).collect::<Vec<_>>(),
        });
        if pretty {
            let status = if o.passed() { "ok" } else { "FAIL" };
            println!("{:<24} {:>3} queries  {status}", o.id, o.queries);
            for m in &o.mismatches {
                println!("    query {} ({}) {}: expected {} got {}", m.query, m.op, m.path, m.expected, m.actual);
            }
        } else {
            println!("{line}");
        }
    }
    println!("{} fixtures, {} passed", outcomes.len(), passed);
    if passed == outcomes.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return fail_input(&Error::Parse(e.kind().to_string()));
        }
    };
    if let Command::Fixtures { action: FixtureAction::Run { id, list, file } } = &cli.command {
        return run_fixtures(id.as_deref(), *list, file.as_deref(), cli.pretty);
    }
    let query = match build_query(&cli.command) {
        Ok(q) => q,
        Err(e) => return fail_input(&e),
    };
    match run_query(&query, &context()) {
        Ok(answer) => {
            println!("{}", render(&answer.value, cli.pretty));
            if answer.positive {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail_input(&e),
    }
}
