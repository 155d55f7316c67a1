//! Command-line front end: group structure, ranks, η maps, Milnor and Arf
//! invariants of intersection forests, realization recipes, and the
//! certification selftest. JSON by default, human tables with
//! `--output text`. Exit codes: 0 ok, 2 validation, 3 resource limit.

use clap::{Parser, Subcommand};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use whitney_forest::config::{Config, OutputMode};
use whitney_forest::invariants::{self, ArfOutcome};
use whitney_forest::lie::{self, dn_lattice, witt_rank};
use whitney_forest::tree_groups::{framed_presentation, structure, twisted_presentation, Presentation};
use whitney_forest::trees::{parse_expr, TreeExpr};
use whitney_forest::{eta, selftest, Error};

#[derive(Parser)]
#[command(name = "wf", version, about = "Tree groups, η maps and Milnor invariants of twisted Whitney towers")]
struct Cli {
    /// Config file (key = value lines)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output mode: json or text
    #[arg(long, global = true)]
    output: Option<String>,
    /// Refuse enumerations above this many generators
    #[arg(long, global = true)]
    generator_cap: Option<usize>,
    /// Refuse relation matrices with more nonzero entries than this
    #[arg(long, global = true)]
    matrix_entry_limit: Option<usize>,
    /// Worker threads ("auto" or a count)
    #[arg(long, global = true)]
    threads: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Witt ranks and kernel ranks of the bracket map
    Ranks { m: u32, n_max: usize },
    /// Structure of a tree group
    Group {
        m: u32,
        n: usize,
        /// framed or twisted
        kind: String,
        /// Write the relation matrix in Matrix Market format
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
    },
    /// The summation maps
    Eta {
        #[command(subcommand)]
        sub: EtaCmd,
    },
    /// Milnor invariant of a forest file
    Milnor {
        file: PathBuf,
        /// Print only this component's longitude
        #[arg(long)]
        longitude: Option<u32>,
    },
    /// Higher-order Arf representative of a forest file
    Arf { file: PathBuf },
    /// Symbolic Bing-doubling recipe for a generator
    Realize { expr: String },
    /// Run the certification suite
    Selftest {
        /// quick (A1–A7) or full (adds A8)
        #[arg(long, default_value = "quick")]
        level: String,
    },
}

#[derive(Subcommand)]
enum EtaCmd {
    /// η of a tree or ∞-tree expression
    Apply {
        expr: String,
        /// Component count (default: largest label in the expression)
        #[arg(long)]
        m: Option<u32>,
    },
    /// Relation-by-relation well-definedness audit
    Audit { m: u32, n: usize },
    /// Kernel of the induced map
    Kernel { m: u32, n: usize },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Some(t) = cfg.thread_count {
        // Thread count changes scheduling only; all outputs are assembled in
        // deterministic order.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(&cli.cmd, &cfg) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}

fn load_config(cli: &Cli) -> Result<Config, Error> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(v) = cli.generator_cap {
        cfg.set("generator_cap", &v.to_string())?;
    }
    if let Some(v) = cli.matrix_entry_limit {
        cfg.set("matrix_entry_limit", &v.to_string())?;
    }
    if let Some(v) = &cli.threads {
        cfg.set("thread_count", v)?;
    }
    if let Some(v) = &cli.output {
        cfg.set("output", v)?;
    }
    Ok(cfg)
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::Resource(_) => ExitCode::from(3),
        Error::Internal(_) => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn run(cmd: &Cmd, cfg: &Config) -> Result<ExitCode, Error> {
    let cap = cfg.generator_cap;
    match cmd {
        Cmd::Ranks { m, n_max } => {
            let mut rows = Vec::new();
            for n in 1..=*n_max {
                let witt = witt_rank(*m, n);
                let formula =
                    whitney_forest::linalg::Int::from(*m) * witt_rank(*m, n + 1) - witt_rank(*m, n + 2);
                let kernel = dn_lattice(*m, n, cap)?.rank();
                rows.push((n, witt, formula, kernel));
            }
            match cfg.output {
                OutputMode::Json => {
                    let json_rows: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|(n, w, f, k)| {
                            serde_json::json!({
                                "n": n,
                                "witt": int_json(w),
                                "dn_rank_formula": int_json(f),
                                "dn_rank_kernel": k,
                            })
                        })
                        .collect();
                    emit(&serde_json::json!({ "m": m, "rows": json_rows }));
                }
                OutputMode::Text => {
                    let mut t = String::new();
                    let _ = writeln!(t, "{:>3} {:>10} {:>12} {:>12}", "n", "r_n", "rank D_n", "kernel");
                    for (n, w, f, k) in &rows {
                        let _ = writeln!(t, "{n:>3} {w:>10} {f:>12} {k:>12}");
                    }
                    print!("{t}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Group { m, n, kind, dump_matrix } => {
            let p = match kind.as_str() {
                "framed" => framed_presentation(*m, *n, cap)?,
                "twisted" => twisted_presentation(*m, *n, cap)?,
                other => {
                    return Err(Error::Validation(format!(
                        "group kind must be 'framed' or 'twisted', got '{other}'"
                    )))
                }
            };
            check_matrix_budget(&p, cfg)?;
            if let Some(path) = dump_matrix {
                std::fs::write(path, matrix_market(&p)).map_err(|e| {
                    Error::Validation(format!("cannot write {}: {e}", path.display()))
                })?;
            }
            let s = structure(&p);
            match cfg.output {
                OutputMode::Json => emit(&serde_json::json!({
                    "rank": s.rank,
                    "torsion": s.torsion.iter().map(int_json).collect::<Vec<_>>(),
                    "generators": p.generators.len(),
                })),
                OutputMode::Text => {
                    println!("generators: {}", p.generators.len());
                    println!("rank: {}", s.rank);
                    let shown: Vec<String> = s.torsion.iter().map(|d| d.to_string()).collect();
                    println!("torsion: [{}]", shown.join(", "));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Eta { sub } => run_eta(sub, cfg),
        Cmd::Milnor { file, longitude } => {
            let f = load_forest(file)?;
            let mu = invariants::milnor(&f, cap)?;
            match (longitude, cfg.output) {
                (Some(i), _) => {
                    let l = mu.longitudes.get(i).ok_or_else(|| {
                        Error::Validation(format!("no component {i} in a forest with m = {}", f.m))
                    })?;
                    emit(&lie::lie_to_json(l, cap)?);
                }
                (None, OutputMode::Json) => {
                    let mut doc = mu.to_json(cap)?;
                    if f.n == 0 {
                        // at order 0 the invariant is the linking/framing matrix
                        let l = invariants::linking_data(&f)?;
                        let rows: Vec<Vec<serde_json::Value>> =
                            l.iter().map(|row| row.iter().map(int_json).collect()).collect();
                        doc["linking_matrix"] = serde_json::json!(rows);
                    }
                    emit(&doc);
                }
                (None, OutputMode::Text) => {
                    println!("order: {}", mu.n);
                    println!("total: {}", tensor_text(&mu.total, cap)?);
                    for (i, l) in &mu.longitudes {
                        println!("longitude {i}: {}", lie_text(l, cap)?);
                    }
                    if f.n == 0 {
                        let l = invariants::linking_data(&f)?;
                        for row in &l {
                            let shown: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                            println!("linking: [{}]", shown.join(", "));
                        }
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Arf { file } => {
            let f = load_forest(file)?;
            match invariants::arf_value(&f, cap)? {
                ArfOutcome::MilnorObstruction(mu) => {
                    match cfg.output {
                        OutputMode::Json => emit(&serde_json::json!({
                            "arf": serde_json::Value::Null,
                            "milnor_obstruction": mu.to_json(cap)?,
                        })),
                        OutputMode::Text => {
                            println!("nonzero Milnor obstruction: {}", tensor_text(&mu.total, cap)?)
                        }
                    }
                    Ok(ExitCode::SUCCESS)
                }
                ArfOutcome::Value(v) => {
                    match cfg.output {
                        OutputMode::Json => emit(&serde_json::json!({
                            "arf": {
                                "k": v.k,
                                "terms": v.terms.iter().map(|j| j.to_string()).collect::<Vec<_>>(),
                            },
                            "note": "representative in Z2⊗L_k; the invariant lives in a quotient that is conjecturally the full group",
                        })),
                        OutputMode::Text => println!("Arf_{} = {v}", v.k),
                    }
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Cmd::Realize { expr } => {
            let m = max_label_of(expr)?;
            let gen = match parse_expr(expr, m)? {
                TreeExpr::Unrooted(t, _) => whitney_forest::tree_groups::Generator::Tree(t),
                TreeExpr::Inf(j) => whitney_forest::tree_groups::Generator::Inf(j),
                TreeExpr::Rooted(_) => {
                    return Err(Error::Validation(
                        "realize takes an unrooted tree <A,B> or an ∞-tree inf(J)".into(),
                    ))
                }
            };
            let recipe = invariants::realize_recipe(&gen)?;
            match cfg.output {
                OutputMode::Json => emit(&recipe.to_json()),
                OutputMode::Text => {
                    println!("target: {}", recipe.target);
                    for s in &recipe.steps {
                        println!("  {s}");
                    }
                    let labels: Vec<String> =
                        recipe.labels.iter().map(|(c, l)| format!("{c}→{l}")).collect();
                    println!("labels: {}", labels.join(", "));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Selftest { level } => {
            let level = match level.as_str() {
                "quick" => selftest::Level::Quick,
                "full" => selftest::Level::Full,
                other => {
                    return Err(Error::Validation(format!(
                        "selftest level must be 'quick' or 'full', got '{other}'"
                    )))
                }
            };
            let results = selftest::run(level, cap);
            match cfg.output {
                OutputMode::Json => {
                    let rows: Vec<serde_json::Value> = results
                        .iter()
                        .map(|c| {
                            serde_json::json!({
                                "id": c.id,
                                "description": c.description,
                                "passed": c.passed,
                                "details": c.details,
                                "millis": c.millis as u64,
                            })
                        })
                        .collect();
                    emit(&serde_json::Value::Array(rows));
                }
                OutputMode::Text => print!("{}", selftest::format_lines(&results)),
            }
            if results.iter().all(|c| c.passed) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn run_eta(sub: &EtaCmd, cfg: &Config) -> Result<ExitCode, Error> {
    let cap = cfg.generator_cap;
    match sub {
        EtaCmd::Apply { expr, m } => {
            let m = match m {
                Some(m) => *m,
                None => max_label_of(expr)?,
            };
            let tensor = match parse_expr(expr, m)? {
                TreeExpr::Unrooted(t, sign) => {
                    // η of the tree as written: the canonical image times the
                    // folding sign.
                    eta::eta_tree(&t, m, cap)?.scale(&whitney_forest::linalg::int(sign as i64))
                }
                TreeExpr::Inf(j) => eta::eta_inf(&j, m, cap)?,
                TreeExpr::Rooted(_) => {
                    return Err(Error::Validation(
                        "η applies to unrooted trees <A,B> and ∞-trees inf(J)".into(),
                    ))
                }
            };
            match cfg.output {
                OutputMode::Json => emit(&lie::tensor_to_json(&tensor, cap)?),
                OutputMode::Text => println!("{}", tensor_text(&tensor, cap)?),
            }
            Ok(ExitCode::SUCCESS)
        }
        EtaCmd::Audit { m, n } => {
            let report = eta::audit_well_defined(*m, *n, cap)?;
            match cfg.output {
                OutputMode::Json => {
                    let families: Vec<serde_json::Value> = report
                        .families
                        .iter()
                        .map(|f| {
                            serde_json::json!({
                                "family": f.name,
                                "checked": f.checked,
                                "failures": f.failures,
                            })
                        })
                        .collect();
                    emit(&serde_json::json!({
                        "m": m,
                        "n": n,
                        "ok": report.ok(),
                        "image_in_dn": report.image_in_dn,
                        "surjective": report.surjective,
                        "families": families,
                    }));
                }
                OutputMode::Text => {
                    for f in &report.families {
                        println!("{}: {} rows, {} failures", f.name, f.checked, f.failures.len());
                        for msg in &f.failures {
                            println!("  {msg}");
                        }
                    }
                    println!("surjective: {}", report.surjective);
                    println!("ok: {}", report.ok());
                }
            }
            Ok(if report.ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        EtaCmd::Kernel { m, n } => {
            let k = eta::ker_eta(*m, *n, cap)?;
            let gens: Vec<String> = k
                .symmetric_match
                .as_ref()
                .map(|b| b.roots.iter().map(|j| format!("inf(({j},{j}))")).collect())
                .unwrap_or_default();
            match cfg.output {
                OutputMode::Json => emit(&serde_json::json!({
                    "m": m,
                    "n": n,
                    "rank": k.group.rank,
                    "torsion": k.group.torsion.iter().map(int_json).collect::<Vec<_>>(),
                    "symmetric_generators": gens,
                    "verified": k.symmetric_match.as_ref().map(|b| b.verified),
                })),
                OutputMode::Text => {
                    println!("kernel rank: {}", k.group.rank);
                    let shown: Vec<String> = k.group.torsion.iter().map(|d| d.to_string()).collect();
                    println!("kernel torsion: [{}]", shown.join(", "));
                    if let Some(b) = &k.symmetric_match {
                        println!("generators: {}", gens.join(", "));
                        println!("verified: {}", b.verified);
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_forest(path: &PathBuf) -> Result<invariants::IntersectionForest, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    invariants::parse_forest_str(&text)
}

/// Largest label mentioned in an expression, for commands that infer m.
fn max_label_of(expr: &str) -> Result<u32, Error> {
    let mut max = 0u32;
    let mut cur = 0u32;
    let mut in_num = false;
    for b in expr.bytes() {
        if b.is_ascii_digit() {
            cur = cur.saturating_mul(10) + (b - b'0') as u32;
            in_num = true;
        } else if in_num {
            max = max.max(cur);
            cur = 0;
            in_num = false;
        }
    }
    if in_num {
        max = max.max(cur);
    }
    if max == 0 {
        return Err(Error::Validation("expression mentions no labels".into()));
    }
    Ok(max)
}

fn check_matrix_budget(p: &Presentation, cfg: &Config) -> Result<(), Error> {
    let nnz: usize = p.relations.iter().map(|(_, row)| row.len()).sum();
    if nnz > cfg.matrix_entry_limit {
        return Err(Error::Resource(format!(
            "relation matrix has {nnz} entries (limit {})",
            cfg.matrix_entry_limit
        )));
    }
    Ok(())
}

fn matrix_market(p: &Presentation) -> String {
    let nnz: usize = p.relations.iter().map(|(_, row)| row.len()).sum();
    let mut out = String::new();
    let _ = writeln!(out, "%%MatrixMarket matrix coordinate integer general");
    let _ = writeln!(out, "{} {} {}", p.relations.len(), p.generators.len(), nnz);
    for (i, (_, row)) in p.relations.iter().enumerate() {
        for (j, v) in row {
            let _ = writeln!(out, "{} {} {}", i + 1, j + 1, v);
        }
    }
    out
}

fn int_json(v: &whitney_forest::linalg::Int) -> serde_json::Value {
    match i64::try_from(v) {
        Ok(x) => serde_json::Value::from(x),
        Err(_) => serde_json::Value::from(v.to_string()),
    }
}

fn emit(v: &serde_json::Value) {
    println!("{}", serde_json::to_string(v).expect("serializable"));
}

fn tensor_text(t: &whitney_forest::lie::TensorElement, cap: usize) -> Result<String, Error> {
    let j = lie::tensor_to_json(t, cap)?;
    Ok(terms_text(&j))
}

fn lie_text(e: &whitney_forest::lie::LieElement, cap: usize) -> Result<String, Error> {
    let j = lie::lie_to_json(e, cap)?;
    Ok(terms_text(&j))
}

fn terms_text(j: &serde_json::Value) -> String {
    let terms = j["terms"].as_array().cloned().unwrap_or_default();
    if terms.is_empty() {
        return "0".into();
    }
    let shown: Vec<String> = terms
        .iter()
        .map(|t| format!("{}·{}", t["coeff"], t["bracket"].as_str().unwrap_or("?")))
        .collect();
    shown.join(" + ")
}
