//! `xor1` command-line pipeline.
//!
//! Stages hand off through files in one output directory:
//! `encode` writes `problem.json`, `csp.json`, `csp.table`; `reduce` writes
//! `reduced.json`, `reduced.table`, `trace.json`; `layout` writes
//! `layout.txt`, `stats.txt`; `solve` writes `solution.json`,
//! `activation.txt` and optionally `cost.txt`, `degenerate.txt`; `verify`
//! writes `verify.txt`. `pipeline` runs all five stages.
//!
//! Exit status: 0 validated solution, 2 proven infeasible, 3 budget
//! exhausted without an optimality certificate, 1 any other failure,
//! 64 usage errors and stage-order violations.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;
use xor1::decode::{decode, validate};
use xor1::layout::{
    apply_cost, assemble, estimate_atoms, from_layout_file, parse_cost_file, render_activation, render_ascii,
    stats, to_layout_file, AssembleOptions, CostMode, RaaLayout,
};
use xor1::model::{CspInstance, VarId};
use xor1::mwis::{degeneracy_probe, solve_exact, MwisSolution, SolveOptions};
use xor1::problems::{decode_gate, decode_queens, encode_gate, encode_queens, GateInstance, QueensInstance};
use xor1::reduce::{reduce_fixpoint, reorder, ReduceError, ReductionTrace};
use xor1::report::{benchmark, builtin_inputs, format_table, to_json, BenchmarkInput};

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "xor1", version, about = "Compile exactly-one constraint problems into atom-array MWIS instances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a problem as a constraint instance.
    Encode {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        dir: Dir,
    },
    /// Reduce the encoded instance and order its constraints.
    Reduce {
        #[command(flatten)]
        opts: ReduceOpts,
        #[command(flatten)]
        dir: Dir,
    },
    /// Assemble the atom-array layout of the reduced instance.
    Layout {
        #[command(flatten)]
        opts: LayoutOpts,
        #[command(flatten)]
        dir: Dir,
    },
    /// Solve the layout's maximum-weight independent set.
    Solve {
        #[command(flatten)]
        opts: SolveOpts,
        #[command(flatten)]
        dir: Dir,
    },
    /// Decode the solution and validate it against the original constraints.
    Verify {
        #[command(flatten)]
        dir: Dir,
    },
    /// Print the resource table.
    Report {
        /// Board sizes of the queens rows.
        #[arg(long, value_delimiter = ',', default_value = "4,8")]
        queens: Vec<usize>,
        /// Additional constraint instances, labeled by file stem.
        #[arg(long)]
        csp: Vec<PathBuf>,
        /// Emit JSON instead of the aligned table.
        #[arg(long)]
        json: bool,
    },
    /// Run encode, reduce, layout, solve and verify.
    Pipeline {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        reduce: ReduceOpts,
        #[command(flatten)]
        layout: LayoutOpts,
        #[command(flatten)]
        solve: SolveOpts,
        #[command(flatten)]
        dir: Dir,
    },
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct Source {
    /// Gate-assignment instance (JSON).
    #[arg(long)]
    gate: Option<PathBuf>,
    /// N-queens board size.
    #[arg(long)]
    queens: Option<usize>,
    /// Constraint instance (JSON).
    #[arg(long)]
    csp: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Dir {
    /// Stage directory.
    #[arg(long, env = "XOR1_OUT", default_value = "xor1-out")]
    out: PathBuf,
}

#[derive(Args, Clone, Default)]
struct ReduceOpts {
    /// Keep the input constraint order.
    #[arg(long)]
    no_reorder: bool,
}

#[derive(Args, Clone, Default)]
struct LayoutOpts {
    /// Print the ASCII grid.
    #[arg(long)]
    ascii: bool,
    /// Print layout statistics.
    #[arg(long)]
    stats: bool,
    /// Print the closed-form atom estimate for the reduced instance.
    #[arg(long)]
    estimate: bool,
}

#[derive(Copy, Clone, ValueEnum)]
enum CostModeArg {
    Epsilon,
    Lambda,
}

#[derive(Args, Clone)]
struct SolveOpts {
    /// Independence penalty in δ units; must exceed 12 when a cost is applied.
    #[arg(long = "U", default_value_t = 20)]
    u: i64,
    /// Solver budget in seconds.
    #[arg(long, default_value_t = 600.0)]
    budget: f64,
    /// Per-variable costs (`label cost` lines) to maximize among feasible solutions.
    #[arg(long)]
    cost: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "epsilon")]
    cost_mode: CostModeArg,
    /// Also enumerate every optimal optimization-vertex pattern.
    #[arg(long)]
    degenerate: bool,
    /// Fix a vertex id or a variable label: `KEY=0` or `KEY=1`.
    #[arg(long, value_parser = parse_force)]
    force: Vec<(String, bool)>,
}

fn parse_force(s: &str) -> Result<(String, bool), String> {
    let (k, v) = s.split_once('=').ok_or("expected KEY=0 or KEY=1")?;
    let b = match v {
        "0" => false,
        "1" => true,
        _ => return Err(format!("value `{v}` is not 0 or 1")),
    };
    Ok((k.to_string(), b))
}

/// Missing or inconsistent stage inputs.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

/// Non-error outcomes with their own exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Done,
    Infeasible,
    Uncertified,
}

/// Where the encoded instance came from; verify uses it to decode.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Problem {
    Gate { instance: GateInstance },
    Queens { n: usize },
    Csp,
}

fn read(dir: &Path, name: &str, stage: &str) -> Result<String> {
    let p = dir.join(name);
    if !p.exists() {
        return Err(Usage(format!("{} is missing; run `{stage}` first", p.display())).into());
    }
    std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let p = dir.join(name);
    std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
}

fn remove(dir: &Path, name: &str) -> Result<()> {
    let p = dir.join(name);
    if p.exists() {
        std::fs::remove_file(&p).with_context(|| format!("removing {}", p.display()))?;
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn load_csp(dir: &Path, name: &str, stage: &str) -> Result<CspInstance> {
    let text = read(dir, name, stage)?;
    CspInstance::from_json(&text).with_context(|| format!("parsing {name}"))
}

fn load_layout(dir: &Path) -> Result<RaaLayout> {
    from_layout_file(&read(dir, "layout.txt", "layout")?).context("parsing layout.txt")
}

fn encode(source: &Source, dir: &Path) -> Result<Outcome> {
    let (problem, csp) = if let Some(path) = &source.gate {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let instance = GateInstance::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
        let csp = encode_gate(&instance)?;
        (Problem::Gate { instance }, csp)
    } else if let Some(n) = source.queens {
        (Problem::Queens { n }, encode_queens(&QueensInstance { n })?)
    } else if let Some(path) = &source.csp {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        (Problem::Csp, CspInstance::from_json(&text).with_context(|| format!("parsing {}", path.display()))?)
    } else {
        unreachable!("clap requires one source");
    };
    write(dir, "problem.json", &json(&problem))?;
    write(dir, "csp.json", &csp.to_json())?;
    write(dir, "csp.table", &csp.binary_table())?;
    println!("encoded {} variables, {} constraints", csp.num_vars(), csp.constraints().len());
    Ok(Outcome::Done)
}

fn reduce(opts: &ReduceOpts, dir: &Path) -> Result<Outcome> {
    let csp = load_csp(dir, "csp.json", "encode")?;
    let (reduced, mut trace) = match reduce_fixpoint(&csp) {
        Ok(r) => r,
        Err(e @ ReduceError::Infeasible { .. }) => {
            for f in ["reduced.json", "reduced.table", "trace.json"] {
                remove(dir, f)?;
            }
            println!("infeasible: {e}");
            return Ok(Outcome::Infeasible);
        }
    };
    let reduced = if opts.no_reorder {
        reduced
    } else {
        let (ordered, r) = reorder(&reduced);
        trace.apply_reorder(&r);
        ordered
    };
    write(dir, "reduced.json", &reduced.to_json())?;
    write(dir, "reduced.table", &reduced.binary_table())?;
    write(dir, "trace.json", &trace.to_json())?;
    println!(
        "reduced to {} variables, {} constraints ({} fixed to 1, {} fixed to 0)",
        reduced.num_vars(),
        reduced.constraints().len(),
        trace.fixed_ones.len(),
        trace.fixed_zeros.len()
    );
    Ok(Outcome::Done)
}

fn layout(opts: &LayoutOpts, dir: &Path) -> Result<Outcome> {
    let reduced = load_csp(dir, "reduced.json", "reduce")?;
    let layout = assemble(&reduced, AssembleOptions::default())?;
    let s = stats(&layout);
    write(dir, "layout.txt", &to_layout_file(&layout))?;
    write(dir, "stats.txt", &s.to_string())?;
    println!("layout {}x{}, {} atoms", s.width, s.height, s.atoms);
    if opts.stats {
        print!("{s}");
    }
    if opts.estimate {
        println!("estimate {}", estimate_atoms(reduced.num_vars(), reduced.constraints().len()));
    }
    if opts.ascii {
        print!("{}", render_ascii(&layout));
    }
    Ok(Outcome::Done)
}

fn variable_ids(layout: &RaaLayout) -> BTreeMap<&str, VarId> {
    layout.variables.iter().enumerate().map(|(i, l)| (l.as_str(), VarId(i))).collect()
}

fn forced_vertices(layout: &RaaLayout, force: &[(String, bool)]) -> Result<Vec<(usize, bool)>> {
    let ids = variable_ids(layout);
    let mut out = Vec::new();
    for (key, b) in force {
        if let Ok(id) = key.parse::<usize>() {
            if id >= layout.graph.len() {
                bail!("--force {key}: the layout has {} vertices", layout.graph.len());
            }
            out.push((id, *b));
        } else {
            let v = ids.get(key.as_str()).ok_or_else(|| anyhow!("--force {key}: no such layout variable"))?;
            out.extend(layout.bindings[v].iter().map(|&id| (id, *b)));
        }
    }
    Ok(out)
}

fn solve(opts: &SolveOpts, dir: &Path) -> Result<Outcome> {
    let layout = load_layout(dir)?;
    let u = Rational64::from_integer(opts.u);
    let mut graph = layout.weighted_graph();
    remove(dir, "cost.txt")?;
    if let Some(path) = &opts.cost {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let entries = parse_cost_file(&text).with_context(|| format!("parsing {}", path.display()))?;
        let ids = variable_ids(&layout);
        let original = load_csp(dir, "csp.json", "encode").ok();
        let mut cost = BTreeMap::new();
        for (label, c) in entries {
            match ids.get(label.as_str()) {
                Some(&v) => {
                    cost.insert(v, c);
                }
                None if original.as_ref().is_some_and(|o| o.find(&label).is_some()) => {
                    println!("cost on {label} ignored: fixed by reduction");
                }
                None => bail!("cost file names unknown variable {label}"),
            }
        }
        let mode = match opts.cost_mode {
            CostModeArg::Epsilon => CostMode::Epsilon(None),
            CostModeArg::Lambda => CostMode::Lambda(None),
        };
        let costed = apply_cost(&layout, &cost, mode, u)?;
        write(dir, "cost.txt", &costed.report.to_string())?;
        print!("{}", costed.report);
        graph = costed.graph(&layout);
    }
    let solve_opts = SolveOptions {
        forced: forced_vertices(&layout, &opts.force)?,
        budget: Some(Duration::from_secs_f64(opts.budget)),
        ..SolveOptions::default()
    };
    let sol = solve_exact(&graph, &solve_opts)?;
    write(dir, "solution.json", &json(&sol))?;
    write(dir, "activation.txt", &render_activation(&layout, &sol.bits(layout.graph.len())))?;
    println!(
        "weight {} ({}, {})",
        sol.total_weight,
        if sol.certificate.proved_optimal { "optimal" } else { "not certified" },
        serde_json::to_value(sol.certificate.method)?.as_str().unwrap_or("?")
    );
    remove(dir, "degenerate.txt")?;
    if opts.degenerate {
        let readout: Vec<usize> = (0..layout.variables.len())
            .filter_map(|v| layout.readout(VarId(v)))
            .collect();
        let patterns = degeneracy_probe(&graph, &readout, 256, &solve_opts)?;
        let mut text = String::new();
        for p in &patterns {
            let bits: String = p.iter().map(|&b| if b { '1' } else { '0' }).collect();
            let _ = writeln!(text, "{bits}");
        }
        write(dir, "degenerate.txt", &text)?;
        println!("{} optimal patterns over {}", patterns.len(), layout.variables.join(" "));
        print!("{text}");
    }
    Ok(if sol.certificate.proved_optimal {
        Outcome::Done
    } else {
        Outcome::Uncertified
    })
}

fn board(n: usize, queens: &[(usize, usize)]) -> String {
    let mut s = String::new();
    for x in 0..n {
        let row: String = (0..n).map(|y| if queens.contains(&(x, y)) { 'Q' } else { '.' }).collect();
        let _ = writeln!(s, "{row}");
    }
    s
}

fn verify(dir: &Path) -> Result<Outcome> {
    let problem: Problem = serde_json::from_str(&read(dir, "problem.json", "encode")?).context("parsing problem.json")?;
    let original = load_csp(dir, "csp.json", "encode")?;
    let trace = ReductionTrace::from_json(&read(dir, "trace.json", "reduce")?).context("parsing trace.json")?;
    let layout = load_layout(dir)?;
    let sol: MwisSolution = serde_json::from_str(&read(dir, "solution.json", "solve")?).context("parsing solution.json")?;
    let decoded = decode(&layout, &sol, &trace)?;
    let report = validate(&original, &decoded.assignment)?;
    let mut text = String::new();
    let _ = writeln!(text, "certified {}", sol.certificate.proved_optimal);
    let _ = writeln!(text, "weight {}", sol.total_weight);
    let _ = writeln!(text, "assignment {}", decoded.assignment.bit_string());
    let ones: Vec<&str> = (0..original.num_vars())
        .filter(|&i| decoded.assignment.bits[i])
        .map(|i| original.label(VarId(i)))
        .collect();
    let _ = writeln!(text, "active {}", ones.join(" "));
    text.push_str(&report.to_string());
    if report.valid {
        match &problem {
            Problem::Gate { instance } => {
                text.push_str(&decode_gate(instance, &decoded.assignment)?.to_string());
            }
            Problem::Queens { n } => {
                let q = decode_queens(&QueensInstance { n: *n }, &decoded.assignment)?;
                let cells: Vec<String> = q.iter().map(|(x, y)| format!("({x},{y})")).collect();
                let _ = writeln!(text, "queens {}", cells.join(" "));
                text.push_str(&board(*n, &q));
            }
            Problem::Csp => {}
        }
    }
    write(dir, "verify.txt", &text)?;
    print!("{text}");
    if !sol.certificate.proved_optimal {
        return Ok(Outcome::Uncertified);
    }
    if !report.valid {
        bail!("decoded optimum violates {}", report.violated().join(", "));
    }
    Ok(Outcome::Done)
}

fn report(queens: &[usize], csp: &[PathBuf], as_json: bool) -> Result<Outcome> {
    let mut inputs = builtin_inputs(queens).map_err(|e| anyhow!(e))?;
    for path in csp {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let instance = CspInstance::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
        let label = path.file_stem().map_or("csp".into(), |s| s.to_string_lossy().into_owned());
        inputs.push(BenchmarkInput::Csp { label, instance });
    }
    let rows = benchmark(&inputs);
    print!("{}", if as_json { to_json(&rows) } else { format_table(&rows) });
    Ok(Outcome::Done)
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Encode { source, dir } => encode(&source, &dir.out),
        Command::Reduce { opts, dir } => reduce(&opts, &dir.out),
        Command::Layout { opts, dir } => layout(&opts, &dir.out),
        Command::Solve { opts, dir } => solve(&opts, &dir.out),
        Command::Verify { dir } => verify(&dir.out),
        Command::Report { queens, csp, json } => report(&queens, &csp, json),
        Command::Pipeline {
            source,
            reduce: r,
            layout: l,
            solve: s,
            dir,
        } => {
            let out = &dir.out;
            encode(&source, out)?;
            if reduce(&r, out)? == Outcome::Infeasible {
                return Ok(Outcome::Infeasible);
            }
            layout(&l, out)?;
            let solved = solve(&s, out)?;
            let verified = verify(out)?;
            Ok(if solved == Outcome::Uncertified { solved } else { verified })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(EXIT_INFEASIBLE),
        Ok(Outcome::Uncertified) => ExitCode::from(EXIT_BUDGET),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
