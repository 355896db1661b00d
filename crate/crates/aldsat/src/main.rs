//! Command-line front end: solving, instance generation, order listing,
//! subtree mapping, tree-model tables, and the experiment harness.
//!
//! Exit codes follow the DIMACS solver convention: 10 satisfiable,
//! 20 unsatisfiable, 0 analysis success, 1 usage or input error,
//! 2 node budget exhausted.

use aldsat::cnf::{generate_uniform_ksat, Formula};
use aldsat::dimacs::{parse_dimacs, write_dimacs};
use aldsat::experiment::{
    build_dataset, evaluate, greedy_construct, linear_sweep, split_half_eval, BuildParams,
    Dataset,
};
use aldsat::heuristics::{Combiner, HeuristicConfig};
use aldsat::search::{
    map_subtrees, solve, visit_order, SearchConfig, SearchError, SolveStatus, StrategyKind,
};
use aldsat::treemodel::{
    e_goal, leaf_probs, optimal_order, unsolved_curve, DepthProfile, LeafProbs,
};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            1
        }
    }
}

#[derive(Parser)]
#[command(
    name = "aldsat",
    version,
    about = "Look-ahead 3-SAT solver with discrepancy-ordered subtree search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a DIMACS CNF file
    Solve(SolveArgs),
    /// Generate a uniform random k-SAT instance as DIMACS
    Gen(GenArgs),
    /// Print a strategy's subtree visit order, one index per line
    Order(OrderArgs),
    /// Map which depth-d subtrees of an instance contain solutions
    Map(MapArgs),
    /// Evaluate traversal strategies on the probabilistic tree model
    Model(ModelArgs),
    /// Dataset construction and empirical order evaluation
    Experiment {
        #[command(subcommand)]
        command: ExperimentCommand,
    },
}

/// Weight-heuristic selection shared by the solving subcommands.
#[derive(Args, Clone)]
struct HeuristicArgs {
    /// Weight heuristic: w0x, w1plus, w1x, or wix (product combiner at
    /// --iterations rounds)
    #[arg(long, default_value = "wix")]
    heuristic: HeuristicName,
    /// Weight iteration count; only meaningful with --heuristic wix
    #[arg(long)]
    iterations: Option<u32>,
    /// Binary-clause weight in the recursion
    #[arg(long, default_value_t = 3.3)]
    gamma: f64,
    /// Disable failed-literal detection during look-ahead
    #[arg(long)]
    no_failed_literals: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum HeuristicName {
    W0x,
    W1plus,
    W1x,
    Wix,
}

impl HeuristicArgs {
    fn to_config(&self) -> Result<HeuristicConfig, String> {
        let (combiner, iterations) = match self.heuristic {
            HeuristicName::W0x => (Combiner::Product, 0),
            HeuristicName::W1plus => (Combiner::Sum, 1),
            HeuristicName::W1x => (Combiner::Product, 1),
            HeuristicName::Wix => (Combiner::Product, self.iterations.unwrap_or(3)),
        };
        if self.heuristic != HeuristicName::Wix && self.iterations.is_some() {
            return Err("--iterations only applies to --heuristic wix".into());
        }
        let config = HeuristicConfig {
            combiner,
            iterations,
            gamma: self.gamma,
            failed_literal_detection: !self.no_failed_literals,
        };
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }

    fn describe(&self) -> String {
        match self.heuristic {
            HeuristicName::W0x => "w0x".into(),
            HeuristicName::W1plus => "w1plus".into(),
            HeuristicName::W1x => "w1x".into(),
            HeuristicName::Wix => format!("w{}x", self.iterations.unwrap_or(3)),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Subtree visit strategy
    #[arg(long, default_value = "alds")]
    strategy: StrategyKind,
    /// Number of top levels traversed in strategy order (0 = plain DFS)
    #[arg(long, default_value_t = 8)]
    jump_depth: u8,
    /// Node evaluation budget
    #[arg(long, default_value_t = 100_000_000)]
    budget: u64,
    #[command(flatten)]
    heuristic: HeuristicArgs,
    /// DIMACS CNF input file
    file: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Number of variables
    #[arg(long)]
    vars: u32,
    /// Number of clauses (alternative to --ratio)
    #[arg(long, conflicts_with = "ratio")]
    clauses: Option<u32>,
    /// Clauses-to-variables ratio; m = round(ratio · n)
    #[arg(long)]
    ratio: Option<f64>,
    /// Literals per clause
    #[arg(long, default_value_t = 3)]
    width: u32,
    /// Generator seed
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OrderArgs {
    #[arg(long)]
    strategy: StrategyKind,
    #[arg(long)]
    depth: u8,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MapArgs {
    /// Subtree depth to map
    #[arg(long)]
    depth: u8,
    #[arg(long, default_value_t = 100_000_000)]
    budget: u64,
    #[command(flatten)]
    heuristic: HeuristicArgs,
    /// Output: a bare hex bitset line, or a JSON object with entered bits
    /// and node counts
    #[arg(long, value_enum, default_value_t = MapFormat::Hex)]
    format: MapFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
    file: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapFormat {
    Hex,
    Json,
}

#[derive(Args)]
struct ModelArgs {
    /// Tree depth d (2^d leaves)
    #[arg(long)]
    depth: u8,
    /// Explicit per-level probabilities p1,...,pd
    #[arg(long, value_delimiter = ',', conflicts_with = "linear")]
    profile: Option<Vec<f64>>,
    /// Linear profile y,x meaning p_level = y + x·level
    #[arg(long, value_delimiter = ',')]
    linear: Option<Vec<f64>>,
    /// Comma-separated strategies (dfs,ilds,dds,alds,optimal) or "all"
    #[arg(long, value_delimiter = ',', default_value = "all")]
    strategies: Vec<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Build a dataset of satisfiable instances and their subtree maps
    Build(BuildArgs),
    /// Score a visit order against a dataset
    Eval(EvalArgs),
    /// Construct the greedy coverage order for a dataset
    Greedy(GreedyArgs),
    /// Train greedy on a random half and compare against ALDS on both halves
    Split(SplitArgs),
    /// Sweep linear-profile slopes and score each induced order
    Sweep(SweepArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Satisfiable instances to collect
    #[arg(long, default_value_t = 200)]
    count: u32,
    #[arg(long, default_value_t = 100)]
    vars: u32,
    #[arg(long, default_value_t = 4.26)]
    ratio: f64,
    #[arg(long, default_value_t = 8)]
    depth: u8,
    /// First candidate seed (instances use consecutive seeds)
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100_000_000)]
    budget: u64,
    /// Worker threads (default: ALDSAT_JOBS or all cores)
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    heuristic: HeuristicArgs,
    /// Dataset file to write
    #[arg(long)]
    dataset: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// dfs, ilds, dds, alds, greedy (trained on this dataset), or file:PATH
    #[arg(long, default_value = "alds")]
    order: OrderSpec,
    /// Count only subtrees the mapping search entered (skip dead prefixes)
    #[arg(long)]
    skip_dead: bool,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GreedyArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    /// Also write the bare order (one index per line) for `eval --order file:`
    #[arg(long)]
    emit_order: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Shuffle seed for the half split
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Intercept of the linear profile
    #[arg(long, default_value_t = 0.56)]
    y: f64,
    /// Comma-separated slopes to evaluate
    #[arg(long, value_delimiter = ',')]
    xs: Vec<f64>,
    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

/// Order selector for dataset evaluation.
#[derive(Clone)]
enum OrderSpec {
    Strategy(StrategyKind),
    Greedy,
    File(PathBuf),
}

impl FromStr for OrderSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "greedy" {
            return Ok(OrderSpec::Greedy);
        }
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err("file: order needs a path".into());
            }
            return Ok(OrderSpec::File(PathBuf::from(path)));
        }
        match StrategyKind::from_str(s) {
            Ok(StrategyKind::Lds) => {
                Err("lds repeats subtrees and cannot rank a dataset".into())
            }
            Ok(kind) => Ok(OrderSpec::Strategy(kind)),
            Err(_) => Err(format!(
                "unknown order {s:?} (expected dfs, ilds, dds, alds, greedy, or file:PATH)"
            )),
        }
    }
}

impl OrderSpec {
    fn describe(&self) -> String {
        match self {
            OrderSpec::Strategy(kind) => kind.to_string(),
            OrderSpec::Greedy => "greedy".into(),
            OrderSpec::File(path) => format!("file:{}", path.display()),
        }
    }

    fn resolve(&self, dataset: &Dataset) -> Result<Vec<u32>, String> {
        match self {
            OrderSpec::Strategy(kind) => {
                visit_order(*kind, dataset.meta.d).map_err(|e| e.to_string())
            }
            OrderSpec::Greedy => Ok(greedy_construct(dataset)
                .map_err(|e| e.to_string())?
                .order),
            OrderSpec::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                text.lines()
                    .filter(|line| !line.trim().is_empty())
                    .map(|line| {
                        line.trim()
                            .parse::<u32>()
                            .map_err(|e| format!("{}: bad index {line:?}: {e}", path.display()))
                    })
                    .collect()
            }
        }
    }
}

fn dispatch(command: Command) -> Result<i32, String> {
    match command {
        Command::Solve(args) => cmd_solve(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Order(args) => cmd_order(args),
        Command::Map(args) => cmd_map(args),
        Command::Model(args) => cmd_model(args),
        Command::Experiment { command } => match command {
            ExperimentCommand::Build(args) => cmd_build(args),
            ExperimentCommand::Eval(args) => cmd_eval(args),
            ExperimentCommand::Greedy(args) => cmd_greedy(args),
            ExperimentCommand::Split(args) => cmd_split(args),
            ExperimentCommand::Sweep(args) => cmd_sweep(args),
        },
    }
}

fn read_formula(path: &Path) -> Result<(String, Formula), String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let parsed = parse_dimacs(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((text, parsed.formula))
}

/// Writes to stdout, treating a closed pipe as a normal end of output.
fn print_out(content: &str) -> Result<(), String> {
    use std::io::Write;
    match std::io::stdout().write_all(content.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.to_string()),
        _ => Ok(()),
    }
}

/// Writes to the output path, or stdout when none is given.
fn emit(output: Option<&Path>, content: &str) -> Result<(), String> {
    match output {
        Some(path) => std::fs::write(path, content).map_err(|e| format!("{}: {e}", path.display())),
        None => print_out(content),
    }
}

/// Checks a model against the raw integer stream of the DIMACS text,
/// independently of the parsed representation: reads the header, then the
/// first m zero-terminated clauses, and requires one true literal in each.
fn verify_model_raw(text: &str, model: &[bool]) -> Result<(), String> {
    let mut lines = text.lines();
    let (num_vars, num_clauses) = loop {
        let line = lines.next().ok_or("no DIMACS header")?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
            return Err(format!("unexpected header line {trimmed:?}"));
        }
        let n: usize = fields[2].parse().map_err(|_| "bad variable count")?;
        let m: usize = fields[3].parse().map_err(|_| "bad clause count")?;
        break (n, m);
    };
    if model.len() != num_vars {
        return Err(format!(
            "model has {} values for {num_vars} variables",
            model.len()
        ));
    }
    let mut clauses_seen = 0usize;
    let mut clause_satisfied = false;
    for token in lines.flat_map(str::split_whitespace) {
        if clauses_seen == num_clauses {
            break;
        }
        let lit: i64 = token
            .parse()
            .map_err(|_| format!("bad literal token {token:?}"))?;
        if lit == 0 {
            if !clause_satisfied {
                return Err(format!("model leaves clause {} unsatisfied", clauses_seen + 1));
            }
            clauses_seen += 1;
            clause_satisfied = false;
            continue;
        }
        let var = lit.unsigned_abs() as usize;
        if var > num_vars {
            return Err(format!("literal {lit} out of range"));
        }
        if model[var - 1] == (lit > 0) {
            clause_satisfied = true;
        }
    }
    if clauses_seen != num_clauses {
        return Err(format!(
            "expected {num_clauses} clauses, found {clauses_seen}"
        ));
    }
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<i32, String> {
    let (text, formula) = read_formula(&args.file)?;
    let config = SearchConfig {
        heuristic: args.heuristic.to_config()?,
        budget: args.budget,
        skip_dead_prefixes: true,
    };
    let report = solve(&formula, &config, args.strategy, args.jump_depth)
        .map_err(|e| e.to_string())?;
    let mut out = String::new();
    writeln!(
        out,
        "c strategy={} jump-depth={} heuristic={} gamma={} failed-literals={}",
        args.strategy,
        args.jump_depth,
        args.heuristic.describe(),
        args.heuristic.gamma,
        !args.heuristic.no_failed_literals
    )
    .unwrap();
    writeln!(
        out,
        "c nodes-expanded={} subtrees-entered={}",
        report.nodes_expanded, report.subtrees_entered
    )
    .unwrap();
    let code = match report.status {
        SolveStatus::Satisfiable(model) => {
            verify_model_raw(&text, &model)
                .map_err(|e| format!("internal: emitted model failed verification: {e}"))?;
            if let Some(rank) = report.rank_of_first_solution {
                writeln!(out, "c rank-of-first-solution={rank}").unwrap();
            }
            out.push_str("s SATISFIABLE\n");
            let lits: Vec<String> = model
                .iter()
                .enumerate()
                .map(|(i, &v)| format!("{}{}", if v { "" } else { "-" }, i + 1))
                .collect();
            for chunk in lits.chunks(20) {
                writeln!(out, "v {}", chunk.join(" ")).unwrap();
            }
            out.push_str("v 0\n");
            10
        }
        SolveStatus::Unsatisfiable => {
            out.push_str("s UNSATISFIABLE\n");
            20
        }
        SolveStatus::BudgetExhausted => {
            out.push_str("s UNKNOWN\n");
            eprintln!("budget of {} node evaluations exhausted", args.budget);
            2
        }
    };
    print_out(&out)?;
    Ok(code)
}

fn cmd_gen(args: GenArgs) -> Result<i32, String> {
    let m = match (args.clauses, args.ratio) {
        (Some(m), None) => m,
        (None, Some(ratio)) => (ratio * f64::from(args.vars)).round() as u32,
        (None, None) => return Err("one of --clauses or --ratio is required".into()),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    let formula =
        generate_uniform_ksat(args.vars, m, args.width, args.seed).map_err(|e| e.to_string())?;
    emit(args.output.as_deref(), &write_dimacs(&formula))?;
    Ok(0)
}

fn cmd_order(args: OrderArgs) -> Result<i32, String> {
    let order = visit_order(args.strategy, args.depth).map_err(|e| e.to_string())?;
    let mut out = String::new();
    for code in order {
        writeln!(out, "{code}").unwrap();
    }
    emit(args.output.as_deref(), &out)?;
    Ok(0)
}

fn cmd_map(args: MapArgs) -> Result<i32, String> {
    let (_, formula) = read_formula(&args.file)?;
    let config = SearchConfig {
        heuristic: args.heuristic.to_config()?,
        budget: args.budget,
        skip_dead_prefixes: true,
    };
    let map = match map_subtrees(&formula, &config, args.depth) {
        Ok(map) => map,
        Err(SearchError::BudgetExhausted(budget)) => {
            eprintln!("budget of {budget} node evaluations exhausted");
            return Ok(2);
        }
        Err(e) => return Err(e.to_string()),
    };
    let content = match args.format {
        MapFormat::Hex => format!("{}\n", map.solution_bits.to_hex()),
        MapFormat::Json => {
            let value = json!({
                "depth": map.depth,
                "solutions": map.solution_bits.to_hex(),
                "solution_count": map.solution_bits.count_ones(),
                "entered": map.entered_bits.to_hex(),
                "entered_count": map.entered_bits.count_ones(),
                "nodes_expanded": map.nodes_expanded,
            });
            format!("{}\n", serde_json::to_string_pretty(&value).unwrap())
        }
    };
    emit(args.output.as_deref(), &content)?;
    Ok(0)
}

/// Named orders the model table evaluates: the four permutation strategies
/// plus the probability-descending optimum.
fn model_orders(
    names: &[String],
    probs: &LeafProbs,
    depth: u8,
) -> Result<Vec<(String, Vec<u32>)>, String> {
    let expanded: Vec<&str> = if names.len() == 1 && names[0] == "all" {
        vec!["dfs", "ilds", "dds", "alds", "optimal"]
    } else {
        names.iter().map(String::as_str).collect()
    };
    expanded
        .into_iter()
        .map(|name| {
            let order = if name == "optimal" {
                optimal_order(probs)
            } else {
                match StrategyKind::from_str(name)? {
                    StrategyKind::Lds => {
                        return Err("lds repeats leaves and has no expected rank".into())
                    }
                    kind => visit_order(kind, depth).map_err(|e| e.to_string())?,
                }
            };
            Ok((name.to_string(), order))
        })
        .collect()
}

fn cmd_model(args: ModelArgs) -> Result<i32, String> {
    let profile = match (&args.profile, &args.linear) {
        (Some(levels), None) => {
            if levels.len() != args.depth as usize {
                return Err(format!(
                    "--profile has {} levels but --depth is {}",
                    levels.len(),
                    args.depth
                ));
            }
            DepthProfile::explicit(levels).map_err(|e| e.to_string())?
        }
        (None, Some(pair)) => {
            let [y, x] = pair.as_slice() else {
                return Err("--linear takes exactly y,x".into());
            };
            DepthProfile::linear(*y, *x, args.depth).map_err(|e| e.to_string())?
        }
        (None, None) => return Err("one of --profile or --linear is required".into()),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    let probs = leaf_probs(&profile);
    let orders = model_orders(&args.strategies, &probs, args.depth)?;

    let mut out = String::new();
    out.push_str("strategy,e_goal\n");
    let mut curves = Vec::new();
    for (name, order) in &orders {
        let value = e_goal(order, &probs).map_err(|e| e.to_string())?;
        writeln!(out, "{name},{value:.6}").unwrap();
        curves.push(unsolved_curve(order, &probs).map_err(|e| e.to_string())?);
    }
    out.push('\n');
    let names: Vec<&str> = orders.iter().map(|(n, _)| n.as_str()).collect();
    writeln!(out, "rank,{}", names.join(",")).unwrap();
    for rank in 0..probs.len() {
        let row: Vec<String> = curves.iter().map(|c| format!("{:.6}", c[rank])).collect();
        writeln!(out, "{},{}", rank + 1, row.join(",")).unwrap();
    }
    emit(args.output.as_deref(), &out)?;
    Ok(0)
}

fn cmd_build(args: BuildArgs) -> Result<i32, String> {
    let jobs = args.jobs.or_else(|| {
        std::env::var("ALDSAT_JOBS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(jobs) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    let params = BuildParams {
        count: args.count,
        n: args.vars,
        ratio: args.ratio,
        d: args.depth,
        seed0: args.seed,
        heuristic: args.heuristic.to_config()?,
        budget: args.budget,
    };
    let output = build_dataset(&params).map_err(|e| e.to_string())?;
    output
        .dataset
        .save(&args.dataset)
        .map_err(|e| e.to_string())?;
    let mean_popcount = output
        .dataset
        .records
        .iter()
        .map(|r| r.bits.count_ones() as f64)
        .sum::<f64>()
        / output.dataset.len().max(1) as f64;
    eprintln!(
        "kept {} instances (skipped {} unsatisfiable, {} over budget); mean satisfiable subtrees {:.1}",
        output.dataset.len(),
        output.skipped_unsat.len(),
        output.skipped_budget.len(),
        mean_popcount
    );
    Ok(0)
}

fn cmd_eval(args: EvalArgs) -> Result<i32, String> {
    let dataset = Dataset::load(&args.dataset).map_err(|e| e.to_string())?;
    let order = args.order.resolve(&dataset)?;
    let curve = evaluate(&order, &dataset, args.skip_dead).map_err(|e| e.to_string())?;
    let name = args.order.describe();
    let content = match args.format {
        TableFormat::Csv => {
            let mut out = String::new();
            out.push_str("order,skip_dead,e_star\n");
            writeln!(out, "{name},{},{:.6}", args.skip_dead, curve.e_star).unwrap();
            out.push('\n');
            out.push_str("rank,unsolved\n");
            for (i, value) in curve.unsolved.iter().enumerate() {
                writeln!(out, "{},{value:.6}", i + 1).unwrap();
            }
            out
        }
        TableFormat::Json => {
            let value = json!({
                "order": name,
                "skip_dead": args.skip_dead,
                "e_star": curve.e_star,
                "unsolved": curve.unsolved,
                "ranks": curve.ranks,
            });
            format!("{}\n", serde_json::to_string_pretty(&value).unwrap())
        }
    };
    emit(args.output.as_deref(), &content)?;
    Ok(0)
}

fn cmd_greedy(args: GreedyArgs) -> Result<i32, String> {
    let dataset = Dataset::load(&args.dataset).map_err(|e| e.to_string())?;
    let greedy = greedy_construct(&dataset).map_err(|e| e.to_string())?;
    if let Some(path) = &args.emit_order {
        let mut plain = String::new();
        for code in &greedy.order {
            writeln!(plain, "{code}").unwrap();
        }
        std::fs::write(path, plain).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let content = match args.format {
        TableFormat::Csv => {
            let mut out = String::new();
            out.push_str("position,subtree,covered\n");
            for (i, (code, covered)) in greedy.order.iter().zip(&greedy.covered).enumerate() {
                writeln!(out, "{},{code},{covered}", i + 1).unwrap();
            }
            out
        }
        TableFormat::Json => {
            let value = json!({
                "order": greedy.order,
                "covered": greedy.covered,
            });
            format!("{}\n", serde_json::to_string_pretty(&value).unwrap())
        }
    };
    emit(args.output.as_deref(), &content)?;
    Ok(0)
}

fn cmd_split(args: SplitArgs) -> Result<i32, String> {
    let dataset = Dataset::load(&args.dataset).map_err(|e| e.to_string())?;
    let split = split_half_eval(&dataset, args.seed).map_err(|e| e.to_string())?;
    let fmt = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
    let content = match args.format {
        TableFormat::Csv => {
            let mut out = String::new();
            out.push_str("half,size,greedy_e_star,alds_e_star\n");
            writeln!(
                out,
                "train,{},{},{}",
                split.train_size,
                fmt(split.greedy_on_train),
                fmt(split.alds_on_train)
            )
            .unwrap();
            writeln!(
                out,
                "test,{},{},{}",
                split.test_size,
                fmt(split.greedy_on_test),
                fmt(split.alds_on_test)
            )
            .unwrap();
            out
        }
        TableFormat::Json => {
            let value = json!({
                "seed": args.seed,
                "train_size": split.train_size,
                "test_size": split.test_size,
                "greedy_on_train": split.greedy_on_train,
                "alds_on_train": split.alds_on_train,
                "greedy_on_test": split.greedy_on_test,
                "alds_on_test": split.alds_on_test,
            });
            format!("{}\n", serde_json::to_string_pretty(&value).unwrap())
        }
    };
    emit(args.output.as_deref(), &content)?;
    Ok(0)
}

fn cmd_sweep(args: SweepArgs) -> Result<i32, String> {
    if args.xs.is_empty() {
        return Err("--xs needs at least one slope".into());
    }
    let dataset = Dataset::load(&args.dataset).map_err(|e| e.to_string())?;
    let points = linear_sweep(&dataset, args.y, &args.xs).map_err(|e| e.to_string())?;
    let content = match args.format {
        TableFormat::Csv => {
            let mut out = String::new();
            out.push_str("x,e_star\n");
            for point in &points {
                writeln!(out, "{},{:.6}", point.x, point.e_star).unwrap();
            }
            out
        }
        TableFormat::Json => {
            let value = json!({
                "y": args.y,
                "points": points
                    .iter()
                    .map(|p| json!({"x": p.x, "e_star": p.e_star}))
                    .collect::<Vec<_>>(),
            });
            format!("{}\n", serde_json::to_string_pretty(&value).unwrap())
        }
    };
    emit(args.output.as_deref(), &content)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_declaration_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn order_spec_parsing() {
        assert!(matches!(
            OrderSpec::from_str("dds"),
            Ok(OrderSpec::Strategy(StrategyKind::Dds))
        ));
        assert!(matches!(OrderSpec::from_str("greedy"), Ok(OrderSpec::Greedy)));
        assert!(matches!(OrderSpec::from_str("file:o.txt"), Ok(OrderSpec::File(_))));
        assert!(OrderSpec::from_str("lds").is_err());
        assert!(OrderSpec::from_str("file:").is_err());
        assert!(OrderSpec::from_str("bogus").is_err());
    }

    #[test]
    fn heuristic_args_map_to_configs() {
        let base = HeuristicArgs {
            heuristic: HeuristicName::W0x,
            iterations: None,
            gamma: 3.3,
            no_failed_literals: false,
        };
        let w0x = base.to_config().unwrap();
        assert_eq!((w0x.combiner, w0x.iterations), (Combiner::Product, 0));

        let w1plus = HeuristicArgs {
            heuristic: HeuristicName::W1plus,
            ..base.clone()
        }
        .to_config()
        .unwrap();
        assert_eq!((w1plus.combiner, w1plus.iterations), (Combiner::Sum, 1));

        let wix = HeuristicArgs {
            heuristic: HeuristicName::Wix,
            ..base.clone()
        };
        let w3x = wix.to_config().unwrap();
        assert_eq!((w3x.combiner, w3x.iterations), (Combiner::Product, 3));
        assert_eq!(wix.describe(), "w3x");

        let conflicted = HeuristicArgs {
            heuristic: HeuristicName::W1x,
            iterations: Some(2),
            ..base
        };
        assert!(conflicted.to_config().is_err());
    }

    #[test]
    fn raw_model_verification_reads_the_original_text() {
        let text = "c comment\np cnf 4 5\n-1 3 0\n1 2 3 0\n1 -2 4 0\n1 -2 -4 0\n2 -3 4 0\n";
        let good = [false, false, true, true];
        assert!(verify_model_raw(text, &good).is_ok());
        let bad = [false, true, true, false];
        let err = verify_model_raw(text, &bad).unwrap_err();
        assert!(err.contains("unsatisfied"), "{err}");
        let short = [false, false, true];
        assert!(verify_model_raw(text, &short).is_err());
        // Content after the declared clause count is ignored (benchmark
        // archives end files with a stray "%" and "0").
        let trailer = format!("{text}%\n0\n");
        assert!(verify_model_raw(&trailer, &good).is_ok());
    }
}
