//! `geolingua` — the GeoLingua diagram pipeline on the command line.
//!
//! Subcommands mirror the pipeline stages (`formalize`, `solve`, `render`,
//! `eval`) plus `run`, which chains them end to end into an output
//! directory with a run manifest.
//!
//! Exit codes are stable: 0 success, 1 usage/IO error, 2 autoformalization
//! filter exhausted, 3 network or credential failure, 4 program parse/
//! validate/compile error, 5 non-convergence under `--strict`, 6 empty
//! diagram.

use clap::{Args, Parser, Subcommand};
use geolingua::artifacts::{
    self, solution_file, ConfigEcho, RunManifest, SolutionFile, StageRecord,
};
use geolingua::formalize::{
    ChatEndpoint, EndpointConfig, FewShot, HttpChatEndpoint, PromptTemplate, ScriptedEndpoint,
};
use geolingua::render::{adaptive_canvas, render_svg, RenderOptions};
use geolingua::scene::Scene;
use geolingua::solver::{solve_with_jobs, write_trace_csv, SolverConfig};
use geolingua::{compile, metrics, parse_json, parse_text, validate, FormalProgram};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

const EXIT_EXHAUSTED: i32 = 2;
const EXIT_NETWORK: i32 = 3;
const EXIT_COMPILE: i32 = 4;
const EXIT_NOT_CONVERGED: i32 = 5;
const EXIT_EMPTY_DIAGRAM: i32 = 6;

type CliResult<T> = Result<T, (i32, String)>;

fn fail<T>(code: i32, message: impl Into<String>) -> CliResult<T> {
    Err((code, message.into()))
}

#[derive(Parser)]
#[command(
    name = "geolingua",
    version,
    about = "Compile GeoLingua geometry programs, solve point coordinates, and render diagrams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate natural language into a GeoLingua program via an LLM.
    Formalize(FormalizeArgs),
    /// Compile a program and solve point coordinates.
    Solve(SolveArgs),
    /// Render a solution file to SVG.
    Render(RenderArgs),
    /// Recompute constraint scores and quality indices for a solution.
    Eval(EvalArgs),
    /// Run the whole pipeline into an output directory.
    Run(RunArgs),
}

#[derive(Args, Clone)]
struct EndpointArgs {
    /// Chat endpoint root (default: GEOLINGUA_BASE_URL or api.deepseek.com).
    #[arg(long)]
    base_url: Option<String>,
    /// Model identifier (default: GEOLINGUA_MODEL or deepseek-chat).
    #[arg(long)]
    model: Option<String>,
    /// Request timeout in seconds.
    #[arg(long, default_value_t = 120)]
    timeout: u64,
    /// Sampling temperature.
    #[arg(long, default_value_t = 0.2)]
    temperature: f64,
    /// JSON file with few-shot examples (overrides the bundled ones).
    #[arg(long)]
    examples: Option<PathBuf>,
    /// Scripted endpoint: JSON array of canned responses (offline mode).
    #[arg(long)]
    mock: Option<PathBuf>,
}

#[derive(Args)]
struct FormalizeArgs {
    /// Natural-language input file.
    input: PathBuf,
    /// Output program JSON (default: `<input>.program.json`).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the attempt audit file here.
    #[arg(long)]
    audit: Option<PathBuf>,
    #[command(flatten)]
    endpoint: EndpointArgs,
}

#[derive(Args, Clone)]
struct SolveFlags {
    /// Convergence tolerance on the loss.
    #[arg(long)]
    alpha: Option<f64>,
    /// Inner-loop candidates per outer iteration (Q).
    #[arg(long)]
    inner: Option<usize>,
    /// Outer iterations per restart (T).
    #[arg(long)]
    outer: Option<usize>,
    /// Independent restarts.
    #[arg(long)]
    restarts: Option<usize>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Initial perturbation scale (fraction of the canvas span).
    #[arg(long)]
    sigma_initial: Option<f64>,
    /// Final perturbation scale (fraction of the canvas span).
    #[arg(long)]
    sigma_final: Option<f64>,
    /// Wall-clock budget in seconds (trades determinism for latency).
    #[arg(long)]
    time_budget: Option<f64>,
    /// Restarts run in parallel on up to this many threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// TOML config file (flags > environment > file > defaults).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Program file (.geo text or four-key .json).
    /// Program files; several at once run as a batch (`--jobs` then
    /// parallelizes across files and outputs take their derived names).
    #[arg(required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Output solution JSON (default: `<input>.solution.json`; single input only).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the loss trace as CSV (single input only).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Exit with status 5 when the solver does not converge.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    flags: SolveFlags,
}

#[derive(Args)]
struct RenderArgs {
    /// Solution JSON produced by `solve`.
    input: PathBuf,
    /// Output SVG path, or `-` for standard output (default: `<input>.svg`).
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 0.8)]
    stroke_width: f64,
    #[arg(long, default_value_t = 4.5)]
    font_size: f64,
    #[arg(long, default_value_t = 2.0)]
    label_offset: f64,
}

#[derive(Args)]
struct EvalArgs {
    /// Program file (.geo text or four-key .json).
    program: PathBuf,
    /// Solution JSON produced by `solve`.
    solution: PathBuf,
    /// Output report JSON (default: `<program>.report.json`).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Input: a program (.geo/.json) or natural-language text (.txt or --natural).
    input: PathBuf,
    /// Output directory for all artifacts.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Treat the input as natural language regardless of extension.
    #[arg(long)]
    natural: bool,
    /// Exit with status 5 when the solver does not converge.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    flags: SolveFlags,
    #[command(flatten)]
    endpoint: EndpointArgs,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Formalize(args) => cmd_formalize(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Render(args) => cmd_render(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Run(args) => cmd_run(args),
    };
    if let Err((code, message)) = outcome {
        eprintln!("error: {message}");
        std::process::exit(code);
    }
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).or_else(|e| fail(1, format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .or_else(|e| fail(1, format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, bytes).or_else(|e| fail(1, format!("cannot write {}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}{suffix}"))
}

/// Parse, validate and compile a program file; failures exit with code 4.
fn load_scene(path: &Path) -> CliResult<(FormalProgram, Scene)> {
    let source = read_file(path)?;
    let is_json = path.extension().and_then(|e| e.to_str()) == Some("json")
        || source.trim_start().starts_with('{');
    let program = match if is_json { parse_json(&source) } else { parse_text(&source) } {
        Ok(p) => p,
        Err(e) => return fail(EXIT_COMPILE, format!("{}: {e}", path.display())),
    };
    let report = validate(&program);
    if !report.ok() {
        let mut message = format!("{} failed validation:", path.display());
        for d in report.diagnostics {
            message.push_str(&format!("\n  [{}] {}", d.rule, d.message));
        }
        return fail(EXIT_COMPILE, message);
    }
    let scene = match compile(&program) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_COMPILE, format!("{}: {e}", path.display())),
    };
    Ok((program, scene))
}

#[derive(Debug, Default, serde::Deserialize)]
struct FileConfig {
    alpha: Option<f64>,
    inner_iterations: Option<usize>,
    outer_iterations: Option<usize>,
    restarts: Option<usize>,
    seed: Option<u64>,
    sigma_initial: Option<f64>,
    sigma_final: Option<f64>,
}

fn env_parse<T: std::str::FromStr>(name: &str) -> CliResult<Option<T>> {
    match std::env::var(name) {
        Ok(v) => v
            .parse::<T>()
            .map(Some)
            .or_else(|_| fail(1, format!("invalid value in ${name}: '{v}'"))),
        Err(_) => Ok(None),
    }
}

/// Resolve the solver configuration: flags > environment > config file >
/// defaults.
fn resolve_config(flags: &SolveFlags) -> CliResult<SolverConfig> {
    let mut config = SolverConfig::default();

    let file = flags
        .config
        .clone()
        .or_else(|| std::env::var("GEOLINGUA_CONFIG").ok().map(PathBuf::from));
    if let Some(path) = file {
        let text = read_file(&path)?;
        let parsed: FileConfig = toml::from_str(&text)
            .or_else(|e| fail(1, format!("invalid config {}: {e}", path.display())))?;
        config.alpha = parsed.alpha.unwrap_or(config.alpha);
        config.inner_iterations = parsed.inner_iterations.unwrap_or(config.inner_iterations);
        config.outer_iterations = parsed.outer_iterations.unwrap_or(config.outer_iterations);
        config.restarts = parsed.restarts.unwrap_or(config.restarts);
        config.seed = parsed.seed.unwrap_or(config.seed);
        config.sigma_initial = parsed.sigma_initial.unwrap_or(config.sigma_initial);
        config.sigma_final = parsed.sigma_final.unwrap_or(config.sigma_final);
    }

    config.alpha = env_parse("GEOLINGUA_ALPHA")?.unwrap_or(config.alpha);
    config.inner_iterations = env_parse("GEOLINGUA_INNER")?.unwrap_or(config.inner_iterations);
    config.outer_iterations = env_parse("GEOLINGUA_OUTER")?.unwrap_or(config.outer_iterations);
    config.restarts = env_parse("GEOLINGUA_RESTARTS")?.unwrap_or(config.restarts);
    config.seed = env_parse("GEOLINGUA_SEED")?.unwrap_or(config.seed);
    config.sigma_initial = env_parse("GEOLINGUA_SIGMA_INITIAL")?.unwrap_or(config.sigma_initial);
    config.sigma_final = env_parse("GEOLINGUA_SIGMA_FINAL")?.unwrap_or(config.sigma_final);

    config.alpha = flags.alpha.unwrap_or(config.alpha);
    config.inner_iterations = flags.inner.unwrap_or(config.inner_iterations);
    config.outer_iterations = flags.outer.unwrap_or(config.outer_iterations);
    config.restarts = flags.restarts.unwrap_or(config.restarts);
    config.seed = flags.seed.unwrap_or(config.seed);
    config.sigma_initial = flags.sigma_initial.unwrap_or(config.sigma_initial);
    config.sigma_final = flags.sigma_final.unwrap_or(config.sigma_final);
    config.time_budget = flags.time_budget.map(Duration::from_secs_f64);

    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return fail(1, format!("alpha must lie in (0,1), got {}", config.alpha));
    }
    if config.inner_iterations == 0 || config.outer_iterations == 0 || config.restarts == 0 {
        return fail(1, "inner, outer and restarts must all be at least 1");
    }
    if config.sigma_final > config.sigma_initial {
        return fail(1, "sigma-final must not exceed sigma-initial");
    }
    Ok(config)
}

fn build_endpoint(args: &EndpointArgs) -> CliResult<Box<dyn ChatEndpoint>> {
    if let Some(mock) = &args.mock {
        let text = read_file(mock)?;
        let entries: Vec<serde_json::Value> = serde_json::from_str(&text)
            .or_else(|e| fail(1, format!("invalid mock script {}: {e}", mock.display())))?;
        let responses = entries
            .into_iter()
            .map(|v| match v {
                serde_json::Value::String(s) => Ok(Ok(s)),
                serde_json::Value::Object(o) if o.contains_key("error") => {
                    Ok(Err(o["error"].as_str().unwrap_or("error").to_string()))
                }
                other => fail(
                    1,
                    format!("mock entries must be strings or {{\"error\": ...}}, got {other}"),
                ),
            })
            .collect::<CliResult<Vec<_>>>()?;
        return Ok(Box::new(ScriptedEndpoint::new(responses)));
    }
    let mut config = EndpointConfig::from_env();
    if let Some(url) = &args.base_url {
        config.base_url = url.clone();
    }
    if let Some(model) = &args.model {
        config.model = model.clone();
    }
    config.timeout = Duration::from_secs(args.timeout);
    config.temperature = args.temperature;
    match HttpChatEndpoint::new(config) {
        Ok(endpoint) => Ok(Box::new(endpoint)),
        Err(message) => fail(EXIT_NETWORK, message),
    }
}

fn load_template(args: &EndpointArgs) -> CliResult<PromptTemplate> {
    let template = PromptTemplate::default();
    match &args.examples {
        None => Ok(template),
        Some(path) => {
            let text = read_file(path)?;
            let examples: Vec<FewShot> = serde_json::from_str(&text)
                .or_else(|e| fail(1, format!("invalid examples file {}: {e}", path.display())))?;
            Ok(template.with_examples(examples))
        }
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn run_formalize_stage(
    input: &Path,
    endpoint_args: &EndpointArgs,
    program_out: &Path,
    audit_out: Option<&Path>,
) -> CliResult<FormalProgram> {
    let natural = read_file(input)?;
    if natural.trim().is_empty() {
        return fail(1, format!("{} is empty", input.display()));
    }
    let endpoint = build_endpoint(endpoint_args)?;
    let template = load_template(endpoint_args)?;
    let outcome = geolingua::formalize(natural.trim(), endpoint.as_ref(), &template);
    if let Some(path) = audit_out {
        write_file(path, &artifacts::to_json_bytes(&outcome.audit_record()))?;
    }
    match outcome.program {
        Some(program) => {
            write_file(
                program_out,
                geolingua::parse::to_json_string(&program).as_bytes(),
            )?;
            eprintln!(
                "formalized {} in {} attempt(s) -> {}",
                input.display(),
                outcome.attempts.len(),
                program_out.display()
            );
            Ok(program)
        }
        None if outcome.all_network_failures() => fail(
            EXIT_NETWORK,
            format!(
                "all {} attempts failed at the network layer: {}",
                outcome.attempts.len(),
                outcome
                    .attempts
                    .last()
                    .and_then(|a| a.report.diagnostics.first())
                    .map(|d| d.message.clone())
                    .unwrap_or_default()
            ),
        ),
        None => fail(
            EXIT_EXHAUSTED,
            format!(
                "validation filter exhausted after {} attempts",
                outcome.attempts.len()
            ),
        ),
    }
}

fn cmd_formalize(args: FormalizeArgs) -> CliResult<()> {
    let output = args
        .output
        .clone()
        .unwrap_or_else(|| with_suffix(&args.input, ".program.json"));
    run_formalize_stage(&args.input, &args.endpoint, &output, args.audit.as_deref())?;
    Ok(())
}

fn run_solve_stage(
    scene: &Scene,
    config: &SolverConfig,
    jobs: usize,
    solution_out: &Path,
    trace_out: Option<&Path>,
) -> CliResult<SolutionFile> {
    let result = solve_with_jobs(scene, config, jobs);
    let solution = solution_file(scene, &result, config.seed);
    write_file(solution_out, &artifacts::to_json_bytes(&solution))?;
    if let Some(path) = trace_out {
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &result.telemetry.trace)
            .or_else(|e| fail(1, format!("trace encoding failed: {e}")))?;
        write_file(path, &buf)?;
    }
    eprintln!(
        "solved: loss {:.6} ({}) after {} outer iteration(s), {} evaluation(s), {:.2?} -> {}",
        result.final_loss,
        if result.converged { "converged" } else { "not converged" },
        result.telemetry.outer_iterations.iter().sum::<usize>(),
        result.telemetry.evaluations,
        result.telemetry.wall_time,
        solution_out.display()
    );
    Ok(solution)
}

fn cmd_solve(args: SolveArgs) -> CliResult<()> {
    let config = resolve_config(&args.flags)?;

    if args.input.len() > 1 {
        // Batch mode: jobs spread across files, each solve sequential.
        if args.output.is_some() || args.trace.is_some() {
            return fail(1, "-o and --trace apply to single-input runs only");
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.flags.jobs.max(1).min(args.input.len()))
            .build()
            .or_else(|e| fail(1, format!("cannot build thread pool: {e}")))?;
        let results: Vec<CliResult<SolutionFile>> = pool.install(|| {
            use rayon::prelude::*;
            args.input
                .par_iter()
                .map(|input| {
                    let (_, scene) = load_scene(input)?;
                    run_solve_stage(
                        &scene,
                        &config,
                        1,
                        &with_suffix(input, ".solution.json"),
                        None,
                    )
                })
                .collect()
        });
        let mut unconverged = 0usize;
        for result in results {
            if !result?.converged {
                unconverged += 1;
            }
        }
        if args.strict && unconverged > 0 {
            return fail(
                EXIT_NOT_CONVERGED,
                format!("{unconverged} of {} inputs did not converge", args.input.len()),
            );
        }
        return Ok(());
    }

    let input = &args.input[0];
    let (_, scene) = load_scene(input)?;
    let output = args
        .output
        .clone()
        .unwrap_or_else(|| with_suffix(input, ".solution.json"));
    let solution = run_solve_stage(&scene, &config, args.flags.jobs, &output, args.trace.as_deref())?;
    if args.strict && !solution.converged {
        return fail(
            EXIT_NOT_CONVERGED,
            format!("did not converge: final loss {:.6}", solution.final_loss),
        );
    }
    Ok(())
}

fn render_solution(solution: &SolutionFile, options: &RenderOptions) -> CliResult<Vec<u8>> {
    let spec = adaptive_canvas(&solution.diagram.extent_points());
    match render_svg(&solution.diagram, &spec, options) {
        Ok(bytes) => Ok(bytes),
        Err(e) => fail(EXIT_EMPTY_DIAGRAM, e.to_string()),
    }
}

fn cmd_render(args: RenderArgs) -> CliResult<()> {
    let bytes = std::fs::read(&args.input)
        .or_else(|e| fail(1, format!("cannot read {}: {e}", args.input.display())))?;
    let solution = artifacts::solution_from_json(&bytes).or_else(|e| fail(1, e))?;
    let options = RenderOptions {
        stroke_width: args.stroke_width,
        font_size: args.font_size,
        label_offset: args.label_offset,
    };
    let svg = render_solution(&solution, &options)?;
    match &args.output {
        Some(path) if path.as_os_str() == "-" => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&svg)
                .or_else(|e| fail(1, format!("cannot write to stdout: {e}")))?;
        }
        Some(path) => write_file(path, &svg)?,
        None => write_file(&with_suffix(&args.input, ".svg"), &svg)?,
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let (_, scene) = load_scene(&args.program)?;
    let bytes = std::fs::read(&args.solution)
        .or_else(|e| fail(1, format!("cannot read {}: {e}", args.solution.display())))?;
    let solution = artifacts::solution_from_json(&bytes).or_else(|e| fail(1, e))?;
    let assignment =
        artifacts::assignment_from_solution(&scene, &solution).or_else(|e| fail(1, e))?;
    let (coords, degenerate) = geolingua::resolve_dependents(&scene, &assignment);
    let (scores, loss) = geolingua::evaluate(&scene, &coords, &degenerate);
    let report = metrics::report_from_scores(&scores, solution.alpha);
    let output = args
        .output
        .clone()
        .unwrap_or_else(|| with_suffix(&args.program, ".report.json"));
    write_file(&output, &artifacts::to_json_bytes(&artifacts::report_file(&report)))?;
    eprintln!(
        "evaluated: loss {:.6}, lci {}, adi {} -> {}",
        loss.value,
        report.lci.map_or("-".into(), |v| format!("{v:.6}")),
        report.adi.map_or("-".into(), |v| format!("{v:.6}")),
        output.display()
    );
    Ok(())
}

fn cmd_run(args: RunArgs) -> CliResult<()> {
    let out_dir = &args.out_dir;
    std::fs::create_dir_all(out_dir)
        .or_else(|e| fail(1, format!("cannot create {}: {e}", out_dir.display())))?;
    let config = resolve_config(&args.flags)?;

    let natural_input = args.natural
        || args.input.extension().and_then(|e| e.to_str()) == Some("txt");

    let mut stages: Vec<StageRecord> = Vec::new();
    let stage = |stages: &mut Vec<StageRecord>, name: &str, start: Instant, ok: bool| {
        stages.push(StageRecord {
            name: name.to_string(),
            ms: start.elapsed().as_millis(),
            ok,
        });
    };

    let finish = |stages: Vec<StageRecord>, exit_status: i32| -> CliResult<()> {
        let manifest = RunManifest {
            schema_version: artifacts::SCHEMA_VERSION,
            input: args.input.display().to_string(),
            mode: if natural_input { "natural" } else { "program" }.to_string(),
            output_dir: out_dir.display().to_string(),
            config: ConfigEcho::from(&config),
            stages,
            exit_status,
        };
        let path = out_dir.join("manifest.json");
        let tmp = out_dir.join("manifest.json.tmp");
        write_file(&tmp, &artifacts::to_json_bytes(&manifest))?;
        std::fs::rename(&tmp, &path)
            .or_else(|e| fail(1, format!("cannot finalize {}: {e}", path.display())))?;
        Ok(())
    };

    macro_rules! run_stage {
        ($name:literal, $stages:ident, $body:expr) => {{
            let start = Instant::now();
            match $body {
                Ok(value) => {
                    stage(&mut $stages, $name, start, true);
                    value
                }
                Err((code, message)) => {
                    stage(&mut $stages, $name, start, false);
                    finish($stages, code)?;
                    return fail(code, message);
                }
            }
        }};
    }

    // Stage 1 (natural input only): formalize.
    let program_path = if natural_input {
        let program_out = out_dir.join("program.json");
        let audit_out = out_dir.join("audit.json");
        run_stage!("formalize", stages, {
            run_formalize_stage(&args.input, &args.endpoint, &program_out, Some(&audit_out))
        });
        program_out
    } else {
        args.input.clone()
    };

    // Stage 2: compile.
    let (program, scene) = run_stage!("compile", stages, load_scene(&program_path));
    if !natural_input {
        // Normalized copy of the input program, for the record.
        write_file(
            &out_dir.join("program.json"),
            geolingua::parse::to_json_string(&program).as_bytes(),
        )?;
    }

    // Stage 3: solve.
    let solution_path = out_dir.join("solution.json");
    let trace_path = out_dir.join("trace.csv");
    let solution = run_stage!("solve", stages, {
        run_solve_stage(&scene, &config, args.flags.jobs, &solution_path, Some(&trace_path))
    });

    // Stage 4: eval.
    let report_path = out_dir.join("report.json");
    run_stage!("eval", stages, {
        let report = metrics::report_from_scores(&solution.scores, solution.alpha);
        write_file(&report_path, &artifacts::to_json_bytes(&artifacts::report_file(&report)))
    });

    // Stage 5: render.
    let svg_path = out_dir.join("diagram.svg");
    run_stage!("render", stages, {
        render_solution(&solution, &RenderOptions::default())
            .and_then(|svg| write_file(&svg_path, &svg))
    });

    if args.strict && !solution.converged {
        finish(stages, EXIT_NOT_CONVERGED)?;
        return fail(
            EXIT_NOT_CONVERGED,
            format!("did not converge: final loss {:.6}", solution.final_loss),
        );
    }
    finish(stages, 0)?;
    eprintln!("run complete -> {}", out_dir.display());
    Ok(())
}
