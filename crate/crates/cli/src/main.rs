mod config;
mod lab;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use symbreak::ends::ends_pipeline;
use symbreak::perm::{
    automorphisms_with_cap, check_sphere_action, disjoint_ray_witness, fixed_point_components, RayWitness,
    SphereActionReport, DEFAULT_GROUP_CAP,
};
use symbreak::scheme::{run_pipeline, PipelineOptions};
use symbreak::{Error, ErrorKind, LayeredGraph};

use crate::config::{
    check_epsilon, check_radius, parse_levels, parse_window, CMode, FamilyArg, LabConfig, Levels, RunConfig,
};

#[derive(Parser)]
#[command(name = "symbreak", version, about = "Distinguishing 2-colorings of layered graph truncations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Window-by-window coloring of one growth-bounded truncation.
    Pipeline(SchemeArgs),
    /// Component-tree variant for graphs with several ends.
    Ends {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// `auto` or a comma-separated list of sphere indices.
        #[arg(long, default_value = "auto")]
        levels: String,
    },
    /// Structural checks on the base stabilizer of a truncation.
    LemmaCheck {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 1)]
        margin: usize,
        #[arg(long, default_value_t = DEFAULT_GROUP_CAP)]
        group_cap: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Double counting, motion bound and search statistics on random groups.
    MotionLab {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 3)]
        min_points: usize,
        #[arg(long, default_value_t = 12)]
        max_points: usize,
        #[arg(long, default_value_t = 2)]
        generators: usize,
        #[arg(long, default_value_t = 4096)]
        group_cap: usize,
        /// Single-coloring trials per bound-holding instance.
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value_t = 100_000)]
        max_tries: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// line, ladder, grid2d, tree:<d>, threads:<s>x<depth>, synthetic:<path> or graph:<path>.
    #[arg(long)]
    family: String,
    #[arg(long)]
    radius: usize,
}

#[derive(Args)]
struct SchemeArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    epsilon: f64,
    /// `auto` or a positive growth constant.
    #[arg(long, default_value = "auto")]
    c: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run even when the growth check fails.
    #[arg(long)]
    force: bool,
    #[arg(long, default_value_t = 1)]
    margin: usize,
    /// `auto`, `strict` or a maximum window length.
    #[arg(long, default_value = "auto")]
    window: String,
    #[arg(long, default_value_t = 100_000)]
    max_tries: u64,
    #[arg(long, default_value_t = DEFAULT_GROUP_CAP)]
    group_cap: usize,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    coloring: Option<PathBuf>,
}

/// A failed run: the error plus whatever configuration had been resolved.
struct Failure {
    error: Error,
    config: Option<Box<RunConfig>>,
    report: Option<PathBuf>,
}

type Run<T> = std::result::Result<T, Failure>;

trait Context<T> {
    fn with(self, config: &RunConfig, report: &Option<PathBuf>) -> Run<T>;
}

impl<T> Context<T> for symbreak::Result<T> {
    fn with(self, config: &RunConfig, report: &Option<PathBuf>) -> Run<T> {
        self.map_err(|error| Failure { error, config: Some(Box::new(config.clone())), report: report.clone() })
    }
}

fn bare<T>(r: symbreak::Result<T>, report: &Option<PathBuf>) -> Run<T> {
    r.map_err(|error| Failure { error, config: None, report: report.clone() })
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config => 2,
        ErrorKind::Infeasible => 3,
        ErrorKind::SearchFailure => 4,
        ErrorKind::CapExceeded => 5,
        ErrorKind::Io => 1,
    }
}

fn kind_name(kind: ErrorKind) -> &'static str {
    match kind {
        ErrorKind::Config => "config",
        ErrorKind::Infeasible => "infeasible",
        ErrorKind::SearchFailure => "search_failure",
        ErrorKind::CapExceeded => "cap_exceeded",
        ErrorKind::Io => "io",
    }
}

fn error_details(e: &Error) -> Value {
    match e {
        Error::GrowthRefused { first_failure } => json!({ "first_failure": first_failure }),
        Error::ChooseKCeiling { ceiling, last_failed } => {
            json!({ "ceiling": ceiling, "last_failed": last_failed.to_string() })
        }
        Error::CapExceeded { cap, partial } => json!({ "cap": cap, "partial": partial.len() }),
        Error::BoundNotSatisfied { motion, threshold } => json!({ "motion": motion, "threshold": threshold }),
        Error::BlockSearchFailed { m, class, .. } => json!({ "m": m, "class": class }),
        Error::RandomizedExhausted { tries, best_survivors } => {
            json!({ "tries": tries, "best_survivors": best_survivors })
        }
        Error::TruncationTooShallow { needed, radius } => json!({ "needed": needed, "radius": radius }),
        _ => Value::Null,
    }
}

fn to_json<T: Serialize>(value: &T) -> symbreak::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> symbreak::Result<()> {
    std::fs::write(path, to_json(value)?)?;
    Ok(())
}

#[derive(Serialize)]
struct GraphSummary {
    radius: usize,
    vertices: usize,
    edges: usize,
    sphere_sizes: Vec<usize>,
}

impl GraphSummary {
    fn of(g: &LayeredGraph) -> Self {
        Self { radius: g.radius(), vertices: g.vertex_count(), edges: g.edges().len(), sphere_sizes: g.sphere_sizes() }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    graph: Option<GraphSummary>,
    report: T,
}

/// Writes the report to `path`, or to stdout when no path is given.
fn emit<T: Serialize>(path: &Option<PathBuf>, envelope: &Envelope<'_, T>, summary: String) -> symbreak::Result<()> {
    match path {
        Some(p) => {
            write_json(p, envelope)?;
            println!("{summary}");
        }
        None => print!("{}", to_json(envelope)?),
    }
    Ok(())
}

fn scheme_config(subcommand: &'static str, a: &SchemeArgs) -> Run<(RunConfig, FamilyArg, PipelineOptions)> {
    let r = &a.report;
    let family: FamilyArg = bare(a.graph.family.parse(), r)?;
    let c: CMode = bare(a.c.parse(), r)?;
    let window = bare(parse_window(&a.window), r)?;
    bare(check_epsilon(a.epsilon), r)?;
    bare(check_radius(a.graph.radius), r)?;
    let config = RunConfig {
        subcommand,
        family: Some(a.graph.family.clone()),
        radius: Some(a.graph.radius),
        epsilon: Some(a.epsilon),
        c: Some(c),
        seed: a.seed,
        force: a.force,
        margin: Some(a.margin),
        window: Some(window),
        levels: None,
        max_tries: Some(a.max_tries),
        group_cap: Some(a.group_cap),
        lab: None,
    };
    let mut opts = PipelineOptions::new(a.epsilon);
    opts.c = c.value();
    opts.seed = a.seed;
    opts.force = a.force;
    opts.margin = a.margin;
    opts.window = window;
    opts.max_tries = a.max_tries;
    opts.group_cap = a.group_cap;
    Ok((config, family, opts))
}

fn cmd_pipeline(a: &SchemeArgs) -> Run<()> {
    let (config, family, opts) = scheme_config("pipeline", a)?;
    macro_rules! ctx {
        ($e:expr) => {
            Context::with($e, &config, &a.report)
        };
    }
    let g = ctx!(family.load(a.graph.radius))?;
    let (coloring, report) = Context::with(run_pipeline(&g, &opts), &config, &a.report)?;
    if let Some(p) = &a.coloring {
        ctx!(write_json(p, &coloring))?;
    }
    let summary = format!(
        "pipeline: |Aut| = {}, checked {}, survivors {}, colored {}",
        report.group_order,
        report.verification.checked,
        report.verification.survivors.len(),
        report.coloring_support
    );
    ctx!(emit(&a.report, &Envelope { config: &config, graph: Some(GraphSummary::of(&g)), report }, summary))
}

fn cmd_ends(a: &SchemeArgs, levels: &str) -> Run<()> {
    let (mut config, family, opts) = scheme_config("ends", a)?;
    let levels = bare(parse_levels(levels), &a.report)?;
    config.levels = Some(match &levels {
        Some(l) => Levels::List(l.clone()),
        None => Levels::Auto("auto"),
    });
    macro_rules! ctx {
        ($e:expr) => {
            Context::with($e, &config, &a.report)
        };
    }
    let g = ctx!(family.load(a.graph.radius))?;
    let (coloring, report) = Context::with(ends_pipeline(&g, &opts, levels.as_deref()), &config, &a.report)?;
    if let Some(p) = &a.coloring {
        ctx!(write_json(p, &coloring))?;
    }
    let summary = format!(
        "ends: |Aut| = {}, {} chain(s), end movers {}, checked {}, survivors {}, colored {}",
        report.group_order,
        report.chains.len(),
        report.end_movers.len(),
        report.verification.checked,
        report.verification.survivors.len(),
        report.coloring_support
    );
    ctx!(emit(&a.report, &Envelope { config: &config, graph: Some(GraphSummary::of(&g)), report }, summary))
}

#[derive(Serialize)]
struct ComponentRecord {
    vertices: usize,
    max_level: usize,
    touches_outer: bool,
    witness: Option<RayWitness>,
}

#[derive(Serialize)]
struct ElementRecord {
    /// Index into the sorted automorphism list.
    index: usize,
    motion: usize,
    all_touch_outer: bool,
    components: Vec<ComponentRecord>,
}

#[derive(Serialize)]
struct StabilizerReport {
    group_order: usize,
    stabilizer_order: usize,
    sphere_action: SphereActionReport,
    violations: usize,
    elements: Vec<ElementRecord>,
    components_not_touching_outer: usize,
    witnesses_found: usize,
    witnesses_missing: usize,
}

fn cmd_lemma_check(graph: &GraphArgs, margin: usize, group_cap: usize, report: &Option<PathBuf>) -> Run<()> {
    let family: FamilyArg = bare(graph.family.parse(), report)?;
    bare(check_radius(graph.radius), report)?;
    let config = RunConfig {
        subcommand: "lemma-check",
        family: Some(graph.family.clone()),
        radius: Some(graph.radius),
        epsilon: None,
        c: None,
        seed: 0,
        force: false,
        margin: Some(margin),
        window: None,
        levels: None,
        max_tries: None,
        group_cap: Some(group_cap),
        lab: None,
    };
    macro_rules! ctx {
        ($e:expr) => {
            Context::with($e, &config, report)
        };
    }
    let g = ctx!(family.load(graph.radius))?;
    let all = ctx!(automorphisms_with_cap(&g, group_cap))?;
    let base = g.base();
    let mut stab_ids = Vec::new();
    for (i, p) in all.iter().enumerate() {
        if ctx!(p.apply(base))? == base {
            stab_ids.push(i);
        }
    }
    let stab = all.filter(false, |p| p.apply(base).is_ok_and(|v| v == base));
    let sphere_action = ctx!(check_sphere_action(&stab, &g, margin))?;
    let mut elements = Vec::new();
    for &i in &stab_ids {
        let p = &all.elements()[i];
        if p.is_identity() {
            continue;
        }
        let fc = ctx!(fixed_point_components(p, &g))?;
        let mut components = Vec::new();
        for c in &fc.components {
            // Only components reaching the boundary can carry a ray.
            let witness = if c.touches_outer { ctx!(disjoint_ray_witness(p, &g, &c.vertices))? } else { None };
            components.push(ComponentRecord {
                vertices: c.vertices.len(),
                max_level: c.max_level,
                touches_outer: c.touches_outer,
                witness,
            });
        }
        elements.push(ElementRecord { index: i, motion: p.motion(), all_touch_outer: fc.all_touch_outer, components });
    }
    let comps = || elements.iter().flat_map(|e| e.components.iter());
    let out = StabilizerReport {
        group_order: all.len(),
        stabilizer_order: stab.len(),
        violations: sphere_action.violations(),
        sphere_action,
        components_not_touching_outer: comps().filter(|c| !c.touches_outer).count(),
        witnesses_found: comps().filter(|c| c.witness.is_some()).count(),
        witnesses_missing: comps().filter(|c| c.witness.is_none()).count(),
        elements,
    };
    let summary = format!(
        "lemma-check: stabilizer {}, violations {}, components off the boundary {}, witnesses {}/{}",
        out.stabilizer_order,
        out.violations,
        out.components_not_touching_outer,
        out.witnesses_found,
        out.witnesses_found + out.witnesses_missing
    );
    ctx!(emit(report, &Envelope { config: &config, graph: Some(GraphSummary::of(&g)), report: out }, summary))
}

fn cmd_motion_lab(seed: u64, lab_cfg: LabConfig, max_tries: u64, report: &Option<PathBuf>) -> Run<()> {
    let config = RunConfig {
        subcommand: "motion-lab",
        family: None,
        radius: None,
        epsilon: None,
        c: None,
        seed,
        force: false,
        margin: None,
        window: None,
        levels: None,
        max_tries: Some(max_tries),
        group_cap: None,
        lab: Some(lab_cfg),
    };
    macro_rules! ctx {
        ($e:expr) => {
            Context::with($e, &config, report)
        };
    }
    let out = ctx!(lab::run(&lab_cfg, seed, max_tries))?;
    let s = &out.summary;
    let summary = format!(
        "motion-lab: {} instances, double counting {}/{}, bound holds {}, exhaustive success {}, single-try failures {}/{}",
        s.instances,
        s.double_count_equal,
        s.double_count_checked,
        s.bound_holds,
        s.exhaustive_success,
        s.single_try_failures,
        s.trials
    );
    ctx!(emit(report, &Envelope { config: &config, graph: None, report: out }, summary))
}

fn run(cli: Cli) -> Run<()> {
    match &cli.command {
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Ends { scheme, levels } => cmd_ends(scheme, levels),
        Command::LemmaCheck { graph, margin, group_cap, report } => cmd_lemma_check(graph, *margin, *group_cap, report),
        Command::MotionLab {
            seed,
            instances,
            min_points,
            max_points,
            generators,
            group_cap,
            trials,
            max_tries,
            report,
        } => {
            let lab_cfg = LabConfig {
                instances: *instances,
                min_points: *min_points,
                max_points: *max_points,
                generators: *generators,
                group_cap: *group_cap,
                trials: *trials,
            };
            cmd_motion_lab(*seed, lab_cfg, *max_tries, report)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { error, config, report }) => {
            let kind = error.kind();
            let code = exit_code(kind);
            let record = json!({
                "error": error.tag(),
                "kind": kind_name(kind),
                "exit_code": code,
                "message": error.to_string(),
                "details": error_details(&error),
                "config": config,
            });
            eprintln!("{record}");
            if let Some(p) = report {
                if let Err(e) = write_json(&p, &record) {
                    eprintln!("could not write error record to {}: {e}", p.display());
                }
            }
            ExitCode::from(code)
        }
    }
}
