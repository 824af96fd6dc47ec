use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::analytic::{effort_plot, team_plot, EffortExample, PlotData, TeamExample};
use crate::model::GameSpec;
use crate::sim::{
    run_replications, ContainmentReport, SimError, TraceContainment,
};
use crate::solver::{
    iterate_cloud, iterate_to_fixed, replay_certificate, simplex_cloud, LogitPerturbation,
    MixedProfileCloud, SigmaSearchPolicy, SolverError, SurvivorSet,
};

use super::bundle::{
    finish_csv, read_trace_actions, readable, rounds_csv, survivors_hash, trace_csv, write_atomic, MixedRecord,
    ResultBundle, SimulationRecord, SolveRecord, TOOL_VERSION,
};
use super::spec::{OperatorDoc, SpecDocument};
use super::IoError;

#[derive(Debug, Parser)]
#[command(name = "bnlab", version, about = "Berk-Nash rationalizability solver and learning simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate an operator to its largest fixed set and write a result bundle.
    Solve(SolveArgs),
    /// Simulate the learning dynamic and check containment in the fixed set.
    Simulate(SimulateArgs),
    /// Emit plot data for a built-in worked example.
    Example(ExampleArgs),
    /// Re-check every certificate in a result bundle.
    Verify(VerifyArgs),
}

/// Overrides shared by `solve` and `simulate`.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct SolverFlags {
    /// Respace every uniform grid to this step.
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// simplex:MESH[:SUPPORT], dirichlet:COUNT[:SEED], structured or lp.
    #[arg(long)]
    pub policy: Option<String>,
    /// Simplex mesh (search policy and logit cloud).
    #[arg(long)]
    pub mesh: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct SolveArgs {
    pub spec: PathBuf,
    #[arg(long, value_enum)]
    pub operator: Option<OperatorArg>,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Seed for sampled search policies.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output bundle path (JSON); a `.rounds.csv` is written beside it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OperatorArg {
    Gamma,
    Weak,
    Bp,
    Mixed,
}

impl From<OperatorArg> for OperatorDoc {
    fn from(o: OperatorArg) -> Self {
        match o {
            OperatorArg::Gamma => OperatorDoc::Gamma,
            OperatorArg::Weak => OperatorDoc::Weak,
            OperatorArg::Bp => OperatorDoc::Bp,
            OperatorArg::Mixed => OperatorDoc::Mixed,
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct SimulateArgs {
    pub spec: PathBuf,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub thinning: Option<usize>,
    #[arg(long)]
    pub window: Option<f64>,
    /// Logit scale: play intended mixed strategies instead of best responses.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Check a recorded trace CSV instead of simulating.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Skip the per-replication trace CSVs.
    #[arg(long)]
    pub summary_only: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleName {
    EffortOver,
    EffortUnder,
    Team,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ExampleArgs {
    #[arg(value_enum)]
    pub name: ExampleName,
    /// Number of curve samples.
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    #[arg(long)]
    pub true_theta: Option<f64>,
    #[arg(long)]
    pub true_ability: Option<f64>,
    #[arg(long)]
    pub ability: Option<f64>,
    /// Team example worker-gap threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Output directory for `curves.csv` and `annotations.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, clap::Args)]
pub struct VerifyArgs {
    pub bundle: PathBuf,
    /// Also require the bundle to match this spec file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

/// Process exit status for an error.
pub fn exit_code(err: &IoError) -> i32 {
    let solver = |e: &SolverError| match e {
        SolverError::NotConverged { .. } => 2,
        SolverError::EmptySurvivorSet => 3,
        _ => 1,
    };
    match err {
        IoError::Solver(e) => solver(e),
        IoError::Sim(SimError::Solver(e)) => solver(e),
        IoError::Schema(_) | IoError::Csv(_) | IoError::Argument(_) => 4,
        IoError::Io { .. } => 5,
        IoError::Verify(_) => 6,
        _ => 1,
    }
}

/// Parses a `--policy` value.
pub fn parse_policy(text: &str, mesh: Option<usize>, seed: Option<u64>) -> Result<SigmaSearchPolicy, IoError> {
    let bad = || IoError::Argument(format!("unrecognized policy {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    let num = |k: usize| -> Result<Option<u64>, IoError> {
        parts.get(k).map(|s| s.parse::<u64>().map_err(|_| bad())).transpose()
    };
    let policy = match parts[0] {
        "simplex" => SigmaSearchPolicy::SimplexGrid {
            mesh: num(1)?.map(|v| v as usize).or(mesh).unwrap_or(5),
            max_support: num(2)?.unwrap_or(2) as usize,
        },
        "dirichlet" => SigmaSearchPolicy::DirichletSample {
            count: num(1)?.unwrap_or(1000) as usize,
            seed: num(2)?.or(seed).unwrap_or(0),
        },
        "structured" => SigmaSearchPolicy::StructuredMoments,
        "lp" => SigmaSearchPolicy::LinearProgram,
        _ => return Err(bad()),
    };
    policy.validate()?;
    Ok(policy)
}

fn load_spec(path: &Path) -> Result<SpecDocument, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    SpecDocument::from_toml_str(&text)
}

/// Applies command-line overrides to the document (so the embedded spec
/// records exactly what ran).
fn apply_solver_flags(doc: &mut SpecDocument, flags: &SolverFlags, seed: Option<u64>) -> Result<(), IoError> {
    if let Some(step) = flags.grid_step {
        if !(step > 0.0 && step.is_finite()) {
            return Err(IoError::Argument("--grid-step must be positive".into()));
        }
        doc.respace(step);
    }
    if let Some(p) = &flags.policy {
        doc.solver.policy = parse_policy(p, flags.mesh, seed)?;
    } else {
        match &mut doc.solver.policy {
            SigmaSearchPolicy::SimplexGrid { mesh, .. } => {
                if let Some(m) = flags.mesh {
                    *mesh = m;
                }
            }
            SigmaSearchPolicy::DirichletSample { seed: s, .. } => {
                if let Some(v) = seed {
                    *s = v;
                }
            }
            _ => {}
        }
    }
    if let (Some(m), Some(mixed)) = (flags.mesh, doc.solver.mixed.as_mut()) {
        mixed.mesh = m;
    }
    if let Some(t) = flags.tol {
        doc.solver.tol = t;
    }
    if let Some(r) = flags.max_rounds {
        doc.solver.max_rounds = r;
    }
    Ok(())
}

fn mixed_record(game: &GameSpec, doc: &SpecDocument) -> Result<MixedRecord, IoError> {
    let m = doc
        .solver
        .mixed
        .as_ref()
        .ok_or_else(|| IoError::Schema("operator \"mixed\" needs a [solver.mixed] table".into()))?;
    let perturb = LogitPerturbation::new(m.lambda)?;
    let cloud = simplex_cloud(game, m.mesh)?;
    let run = iterate_cloud(game, cloud, &perturb, m.max_rounds, m.conv_tol, doc.solver.tol)?;
    Ok(MixedRecord {
        lambda: m.lambda,
        mesh: m.mesh,
        rounds: run.rounds,
        converged: run.converged,
        cloud: run.cloud,
    })
}

/// Runs `solve` and returns the bundle it wrote.
pub fn cmd_solve(args: &SolveArgs) -> Result<ResultBundle, IoError> {
    let mut doc = load_spec(&args.spec)?;
    if let Some(op) = args.operator {
        doc.solver.operator = op.into();
    }
    apply_solver_flags(&mut doc, &args.solver, args.seed)?;
    let game = doc.to_game()?;
    let mut bundle = ResultBundle {
        tool_version: TOOL_VERSION.into(),
        spec_hash: doc.hash()?,
        spec: doc.clone(),
        solve: None,
        mixed: None,
    };
    let mut rounds = None;
    match doc.solver.operator.pure() {
        Some(op) => {
            let fixed = iterate_to_fixed(&game, op, &doc.solver.policy, doc.solver.max_rounds, doc.solver.tol)?;
            rounds = Some(rounds_csv(&game, &fixed.history)?);
            bundle.solve = Some(SolveRecord::new(&game, &fixed, &doc.solver.policy, doc.solver.tol)?);
        }
        None => bundle.mixed = Some(mixed_record(&game, &doc)?),
    }
    let json = bundle.to_json()?;
    if let Some(csv) = rounds {
        write_atomic(&sibling(&args.out, "rounds.csv"), csv.as_bytes())?;
    }
    write_atomic(&args.out, json.as_bytes())?;
    Ok(bundle)
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Runs `simulate` and returns the summary it wrote to `out/report.json`.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<SimulationRecord, IoError> {
    let mut doc = load_spec(&args.spec)?;
    apply_solver_flags(&mut doc, &args.solver, args.seed)?;
    let s = &mut doc.simulation;
    if let Some(v) = args.seed {
        s.seed = v;
    }
    if let Some(v) = args.horizon {
        s.horizon = v;
    }
    if let Some(v) = args.reps {
        s.replications = v;
    }
    if let Some(v) = args.eps {
        s.eps = v;
    }
    if let Some(v) = args.thinning {
        s.thinning = v;
    }
    if let Some(v) = args.window {
        s.window = v;
    }
    if args.lambda.is_some() {
        s.lambda = args.lambda;
    }
    let game = doc.to_game()?;
    let cfg = doc.run_config();
    cfg.validate()?;
    let op = doc.solver.operator.pure().unwrap_or(crate::solver::Operator::Gamma);
    let fixed = iterate_to_fixed(&game, op, &doc.solver.policy, doc.solver.max_rounds, doc.solver.tol)?;
    let survivors = fixed.survivors;
    let perturb = doc.simulation.lambda.map(LogitPerturbation::new).transpose()?;
    let cloud: Option<MixedProfileCloud> = match &perturb {
        Some(p) => {
            let mesh = doc.solver.mixed.as_ref().map(|m| m.mesh).unwrap_or(11);
            let run = iterate_cloud(&game, simplex_cloud(&game, mesh)?, p, 200, 1e-8, cfg.tol)?;
            Some(run.cloud)
        }
        None => None,
    };

    let mut files: Vec<(String, String)> = Vec::new();
    let items: Vec<TraceContainment> = match &args.replay {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
            let trace = read_trace_actions(&game, &text)?;
            vec![TraceContainment::evaluate(&game, &trace, &survivors, &cfg, None)?]
        }
        None => {
            let keep = !args.summary_only;
            let results = run_replications(&game, &cfg, perturb.as_ref(), |trace| {
                let item = TraceContainment::evaluate(&game, &trace, &survivors, &cfg, cloud.as_ref());
                let csv = if keep { Some(trace_csv(&game, &trace)) } else { None };
                (trace.replication, item, csv)
            })?;
            let mut items = Vec::with_capacity(results.len());
            for (rep, item, csv) in results {
                items.push(item?);
                if let Some(csv) = csv {
                    files.push((format!("trace_{rep:04}.csv"), csv?));
                }
            }
            items
        }
    };
    let containment = ContainmentReport::from_traces(items, &cfg);
    let record = SimulationRecord {
        tool_version: TOOL_VERSION.into(),
        spec_hash: doc.hash()?,
        survivors_hash: survivors_hash(&survivors),
        survivor_count: survivors.count(),
        config: cfg,
        lambda: doc.simulation.lambda,
        intended_rate: containment.intended_rate(INTENDED_RADIUS),
        containment,
    };
    let report = serde_json::to_string_pretty(&record).map_err(|e| IoError::Schema(e.to_string()))?;
    files.push(("report.json".into(), report));
    files.push(("spec.toml".into(), doc.to_toml_string()?));
    publish_dir(&args.out, &files)?;
    Ok(record)
}

/// Sup-norm radius used for the intended-strategy rate in reports.
const INTENDED_RADIUS: f64 = 0.05;

/// Stages every file next to `out`, then moves them into place.
fn publish_dir(out: &Path, files: &[(String, String)]) -> Result<(), IoError> {
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(parent).map_err(|e| IoError::io(parent, e))?;
    let stage = tempfile::Builder::new()
        .prefix(".bnlab-stage-")
        .tempdir_in(parent)
        .map_err(|e| IoError::io(parent, e))?;
    for (name, body) in files {
        let p = stage.path().join(name);
        fs::write(&p, body).map_err(|e| IoError::io(&p, e))?;
    }
    fs::create_dir_all(out).map_err(|e| IoError::io(out, e))?;
    for (name, _) in files {
        let to = out.join(name);
        fs::rename(stage.path().join(name), &to).map_err(|e| IoError::io(&to, e))?;
        readable(&to)?;
    }
    Ok(())
}

fn plot_files(plot: &PlotData) -> Result<Vec<(String, String)>, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&plot.columns)?;
    for row in &plot.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    let curves = finish_csv(w)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "x", "y"])?;
    for a in &plot.annotations {
        w.write_record([a.label.clone(), a.x.to_string(), a.y.to_string()])?;
    }
    Ok(vec![("curves.csv".into(), curves), ("annotations.csv".into(), finish_csv(w)?)])
}

/// Runs `example` and returns the plot data it wrote.
pub fn cmd_example(args: &ExampleArgs) -> Result<PlotData, IoError> {
    let plot = match args.name {
        ExampleName::EffortOver | ExampleName::EffortUnder => {
            let mut ex = if args.name == ExampleName::EffortOver {
                EffortExample::overconfident_figure()?
            } else {
                EffortExample::underconfident_figure()?
            };
            ex = EffortExample::new(
                args.true_theta.unwrap_or(ex.true_theta),
                args.true_ability.unwrap_or(ex.true_ability),
                args.ability.unwrap_or(ex.ability),
                ex.cost,
            )?;
            effort_plot(&ex, args.points)?
        }
        ExampleName::Team => {
            let ex = TeamExample::quadratic(
                args.true_theta.unwrap_or(1.0),
                args.true_ability.unwrap_or(1.0),
                args.ability.unwrap_or(2.0),
                args.threshold.unwrap_or(0.105),
            )?;
            team_plot(&ex, args.points)?
        }
    };
    publish_dir(&args.out, &plot_files(&plot)?)?;
    Ok(plot)
}

/// Re-checks a bundle: spec hash, witness support, certificate coverage and
/// bitwise replay of every certificate. Returns the number replayed.
pub fn cmd_verify(args: &VerifyArgs) -> Result<usize, IoError> {
    let text = fs::read_to_string(&args.bundle).map_err(|e| IoError::io(&args.bundle, e))?;
    let bundle = ResultBundle::from_json(&text)?;
    let hash = bundle.spec.hash()?;
    if hash != bundle.spec_hash {
        return Err(IoError::Verify(format!("embedded spec hashes to {hash}, bundle says {}", bundle.spec_hash)));
    }
    if let Some(path) = &args.spec {
        let other = load_spec(path)?;
        if other.hash()? != hash {
            return Err(IoError::Verify(format!("{} does not match the bundle's spec", path.display())));
        }
    }
    let game = bundle.spec.to_game()?;
    let Some(solve) = &bundle.solve else {
        return Ok(0);
    };
    if solve.grid_len != game.n_profiles() || solve.survivors.iter().any(|&p| p >= game.n_profiles()) {
        return Err(IoError::Verify("survivor set does not match the grid".into()));
    }
    if solve.survivors.windows(2).any(|w| w[0] >= w[1]) {
        return Err(IoError::Verify("survivor list is not strictly ascending".into()));
    }
    let survivor_set = solve.survivor_set();
    let survivors = &survivor_set;
    if survivors_hash(survivors) != solve.survivors_hash {
        return Err(IoError::Verify("survivor hash mismatch".into()));
    }
    let mut covered_profiles = SurvivorSet::empty(game.n_profiles());
    let dims = game.grid().dims().to_vec();
    let mut covered_actions: Vec<Vec<bool>> = dims.iter().map(|&d| vec![false; d]).collect();
    for (k, cert) in solve.certificates.iter().enumerate() {
        if !cert.sigma.supported_in(survivors) {
            return Err(IoError::Verify(format!("certificate {k}: witness leaves the survivor set")));
        }
        if !replay_certificate(&game, cert, solve.tol)? {
            return Err(IoError::Verify(format!("certificate {k} does not replay")));
        }
        for pc in &cert.players {
            covered_actions[pc.player][pc.action] = true;
        }
        if cert.players.len() == game.n_players() {
            let coords: Vec<usize> = cert.players.iter().map(|p| p.action).collect();
            covered_profiles.insert(game.grid().encode(&coords));
        }
    }
    let proj = survivors.projections(game.grid());
    match solve.operator {
        crate::solver::Operator::Gamma => {
            if !survivors.same_profiles(&covered_profiles) {
                return Err(IoError::Verify("some surviving profile has no certificate".into()));
            }
        }
        _ => {
            if proj != covered_actions {
                return Err(IoError::Verify("some surviving action has no certificate".into()));
            }
        }
    }
    Ok(solve.certificates.len())
}

fn init_threads() -> Result<(), IoError> {
    if let Ok(v) = std::env::var("BNLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| IoError::Argument(format!("BNLAB_THREADS must be a positive integer, got {v:?}")))?;
        // A pool may already exist when embedded in tests; keep it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Entry point for the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 4 } else { 0 };
        }
    };
    let result = init_threads().and_then(|_| match &cli.command {
        Command::Solve(a) => cmd_solve(a).map(|b| {
            if let Some(s) = &b.solve {
                println!("{} survivors after {} rounds; ranges {:?}", s.survivor_count, s.rounds.len(), s.ranges);
            }
            if let Some(m) = &b.mixed {
                println!("cloud of {} points after {} rounds", m.cloud.points.len(), m.rounds);
            }
        }),
        Command::Simulate(a) => cmd_simulate(a).map(|r| {
            println!("containment pass rate {:.4} over {} traces", r.containment.pass_rate, r.containment.traces.len());
            if let Some(rate) = r.intended_rate {
                println!("intended strategies within {INTENDED_RADIUS} of the cloud: {rate:.4}");
            }
        }),
        Command::Example(a) => cmd_example(a).map(|p| {
            for n in &p.annotations {
                println!("{} = {}", n.label, n.x);
            }
        }),
        Command::Verify(a) => cmd_verify(a).map(|n| println!("verified {n} certificates")),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
