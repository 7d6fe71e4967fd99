use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use fiberwalk::algstat::{self, DesignProblem, FiberMap};
use fiberwalk::bundle::{self, Bundle};
use fiberwalk::diagnostics::{self, GapReportRow};
use fiberwalk::geometry::{enumerate_fiber, parse_rational, Rational};
use fiberwalk::sampler::{auto_steps, unscale, DEFAULT_MAX_BLOCKS};
use fiberwalk::spectral::second_eigenvalue;
use fiberwalk::{
    build_sampler, prepare_base, Error, ModelInstance, MoveSet, PreparedBase, RationalPoint,
    Result, SampleOptions, SamplerGraph, Strategy,
};

#[derive(Parser)]
#[command(
    name = "fiberwalk",
    version,
    about = "Zig-zag samplers for lattice points in dilated polytopes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Instance file operations.
    Instance {
        #[command(subcommand)]
        action: InstanceAction,
    },
    /// Build and certify the base graph H.
    Prepare {
        instance: PathBuf,
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Write a bundle directory.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build and certify the sampler graph G_m.
    Build {
        instance: PathBuf,
        #[arg(short)]
        m: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        lambda_target: Option<f64>,
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Write a bundle directory.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw samples from the fiber.
    Sample(SampleArgs),
    /// Reduce a design problem `A x = m b, x >= 0` to an instance file.
    Reduce {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        margins: PathBuf,
        /// Moves in table coordinates, one per row.
        #[arg(long)]
        moves: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        /// Where to write the moves in fiber coordinates.
        #[arg(long)]
        moves_out: Option<PathBuf>,
        /// Where to write the table map `x = m x0 + B t`.
        #[arg(long)]
        map_out: Option<PathBuf>,
    },
    /// Recertify the graphs stored in a bundle.
    Spectrum { bundle: PathBuf },
    /// Mixing diagnostics.
    Diagnose {
        #[command(subcommand)]
        action: DiagnoseAction,
    },
}

#[derive(Subcommand)]
enum InstanceAction {
    Validate { file: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyKind {
    Complete,
    Moves,
}

#[derive(Args)]
struct StrategyArgs {
    #[arg(long, value_enum, default_value = "complete")]
    strategy: StrategyKind,
    /// Move matrix file, one move per row.
    #[arg(long)]
    moves: Option<PathBuf>,
    /// Use the square of the moves graph.
    #[arg(long)]
    square: bool,
}

impl StrategyArgs {
    fn resolve(&self) -> Result<Strategy> {
        match (self.strategy, &self.moves) {
            (StrategyKind::Complete, None) if !self.square => Ok(Strategy::Complete),
            (StrategyKind::Complete, _) => Err(Error::InvalidArgument(
                "--moves and --square need --strategy moves".into(),
            )),
            (StrategyKind::Moves, None) => Err(Error::InvalidArgument(
                "--strategy moves needs --moves".into(),
            )),
            (StrategyKind::Moves, Some(path)) => {
                let moves = read_moves(path)?;
                Ok(if self.square {
                    Strategy::MovesSquared(moves)
                } else {
                    Strategy::Moves(moves)
                })
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SampleArgs {
    /// Instance file, or a bundle directory written by `build`.
    input: PathBuf,
    #[arg(short)]
    m: Option<u64>,
    #[arg(long)]
    count: usize,
    /// Walk length per block, or `auto`.
    #[arg(long)]
    steps: String,
    #[arg(long)]
    seed: u64,
    /// Seed for the expander; defaults to `--seed`.
    #[arg(long)]
    build_seed: Option<u64>,
    #[arg(long)]
    lambda_target: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Draw exactly uniform samples by rejection instead of walking.
    #[arg(long)]
    exact_oracle: bool,
    /// Print coordinates as decimals instead of exact rationals.
    #[arg(long)]
    decimal: bool,
    /// Divide points by m, giving points of P.
    #[arg(long)]
    unscale: bool,
    /// Print tables through a map written by `reduce --map-out`.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_BLOCKS)]
    max_blocks: usize,
    #[command(flatten)]
    strategy: StrategyArgs,
}

#[derive(Subcommand)]
enum DiagnoseAction {
    /// Slow-mixing witness on the baseline walk, or on G_m with `--zigzag`.
    Witness {
        instance: PathBuf,
        #[arg(short)]
        m: u64,
        /// Weight vector, comma separated rationals.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        omega: Vec<String>,
        /// Moves for the baseline walk.
        #[arg(long, required_unless_present = "zigzag")]
        moves: Option<PathBuf>,
        #[arg(long)]
        zigzag: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        lambda_target: Option<f64>,
        /// Remove the uniform component before normalizing.
        #[arg(long)]
        project: bool,
        /// Include the witness vector in the report.
        #[arg(long)]
        vector: bool,
    },
    /// Fraction of fiber points near a hyperplane `a.x = c`.
    Cut {
        instance: PathBuf,
        #[arg(short)]
        m: u64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        normal: Vec<i64>,
        #[arg(long, allow_hyphen_values = true)]
        offset: String,
        /// Distance bound; defaults to the longest move of `--moves`.
        #[arg(long, required_unless_present = "moves")]
        ell: Option<String>,
        #[arg(long)]
        moves: Option<PathBuf>,
    },
    /// Baseline versus zig-zag second eigenvalues over several m.
    Gap {
        instance: PathBuf,
        #[arg(long = "m", value_delimiter = ',', required = true)]
        m_list: Vec<u64>,
        /// Moves for the baseline walk.
        #[arg(long)]
        baseline_moves: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        lambda_target: Option<f64>,
        #[command(flatten)]
        strategy: StrategyArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cmd: Command) -> Result<String> {
    match cmd {
        Command::Instance {
            action: InstanceAction::Validate { file },
        } => validate(&file),
        Command::Prepare {
            instance,
            strategy,
            output,
        } => {
            let base = prepare_base(&ModelInstance::load(&instance)?, strategy.resolve()?)?;
            if let Some(dir) = &output {
                bundle::save_base(&base, dir)?;
            }
            to_json(&base_report(&base))
        }
        Command::Build {
            instance,
            m,
            seed,
            lambda_target,
            strategy,
            output,
        } => {
            let base = Arc::new(prepare_base(
                &ModelInstance::load(&instance)?,
                strategy.resolve()?,
            )?);
            let s = build_sampler(&base, m, seed, lambda_target)?;
            if let Some(dir) = &output {
                bundle::save_sampler(&s, dir)?;
            }
            to_json(&sampler_report(&s)?)
        }
        Command::Sample(args) => sample(args),
        Command::Reduce {
            design,
            margins,
            moves,
            output,
            moves_out,
            map_out,
        } => reduce(
            &design,
            &margins,
            moves.as_deref(),
            &output,
            moves_out.as_deref(),
            map_out.as_deref(),
        ),
        Command::Spectrum { bundle } => spectrum(&bundle),
        Command::Diagnose { action } => diagnose(action),
    }
}

fn to_json(v: &impl Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn read_moves(path: &Path) -> Result<MoveSet> {
    MoveSet::new(algstat::read_matrix(path)?)
}

fn validate(file: &Path) -> Result<String> {
    let inst = ModelInstance::load(file)?;
    let sys = inst.polytope().system();
    let bbox: Vec<[String; 2]> = sys
        .bounding_box()?
        .iter()
        .map(|(lo, hi)| [lo.to_string(), hi.to_string()])
        .collect();
    to_json(&json!({
        "valid": true,
        "name": inst.name,
        "d": inst.dim(),
        "n_s": inst.offsets().len(),
        "halfspaces": sys.rows().len(),
        "witness": inst.polytope().witness().to_strings(),
        "bounding_box": bbox,
    }))
}

fn base_report(base: &PreparedBase) -> serde_json::Value {
    let advisory = base.advisory();
    json!({
        "strategy": base.strategy().name(),
        "n_h": base.n_h(),
        "d_h": base.d_h(),
        "lambda_h": base.lambda_h(),
        "h_method": base.h_report().method,
        "h_residual": base.h_report().residual,
        "h_certified": base.h_report().is_certified(),
        "advisory_pass": advisory.pass,
        "advisory_margin": advisory.margin,
        "centers": base.centers(),
    })
}

fn sampler_report(s: &SamplerGraph) -> Result<serde_json::Value> {
    let base = s.base();
    let auto = auto_steps(s.lambda_bound()).ok();
    let advisory = base.advisory();
    Ok(json!({
        "m": s.m(),
        "seed": s.seed(),
        "strategy": base.strategy().name(),
        "n_s": base.instance().offsets().len(),
        "n_h": base.n_h(),
        "d_h": base.d_h(),
        "lambda_h": base.lambda_h(),
        "n_e": s.n_e(),
        "lambda_e": s.lambda_e(),
        "e_method": s.e_report().method,
        "e_residual": s.e_report().residual,
        "lambda_target": s.lambda_target(),
        "lambda_bound": s.lambda_bound(),
        "num_vertices": s.num_vertices(),
        "degree": s.graph().k(),
        "auto_steps": auto,
        "irrelevant_fraction": s.irrelevant_fraction()?.to_string(),
        "advisory_pass": advisory.pass,
    }))
}

fn sample(args: SampleArgs) -> Result<String> {
    let s = if args.input.is_dir() {
        match bundle::load(&args.input)? {
            Bundle::Sampler(s) => {
                if args.m.is_some_and(|m| m != s.m()) {
                    return Err(Error::InvalidArgument(format!(
                        "bundle was built for m = {}",
                        s.m()
                    )));
                }
                s
            }
            Bundle::Base(base) => {
                let m = args
                    .m
                    .ok_or_else(|| Error::InvalidArgument("-m is required".into()))?;
                build_sampler(
                    &base,
                    m,
                    args.build_seed.unwrap_or(args.seed),
                    args.lambda_target,
                )?
            }
        }
    } else {
        let m = args
            .m
            .ok_or_else(|| Error::InvalidArgument("-m is required".into()))?;
        let base = Arc::new(prepare_base(
            &ModelInstance::load(&args.input)?,
            args.strategy.resolve()?,
        )?);
        build_sampler(
            &base,
            m,
            args.build_seed.unwrap_or(args.seed),
            args.lambda_target,
        )?
    };
    let steps = match args.steps.as_str() {
        "auto" => s.auto_steps()?,
        t => t.parse::<u64>().map_err(|_| {
            Error::InvalidArgument(format!("--steps must be an integer or `auto`, got {t:?}"))
        })?,
    };
    let opts = SampleOptions {
        count: args.count,
        steps,
        seed: args.seed,
        max_blocks: args.max_blocks,
        exact_oracle: args.exact_oracle,
    };
    let points = s.sample_many(&opts)?;
    let rows: Vec<Vec<String>> = match &args.map {
        Some(path) => {
            let map: FiberMap = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            points
                .iter()
                .map(|p| {
                    let t = integer_coords(p)?;
                    Ok(map
                        .fiber_to_table(&t, s.m())?
                        .iter()
                        .map(i64::to_string)
                        .collect())
                })
                .collect::<Result<_>>()?
        }
        None => points
            .iter()
            .map(|p| {
                let p = if args.unscale {
                    unscale(p, s.m())
                } else {
                    p.clone()
                };
                if args.decimal {
                    p.to_f64().iter().map(f64::to_string).collect()
                } else {
                    p.to_strings()
                }
            })
            .collect(),
    };
    match args.format {
        Format::Csv => {
            let width = rows.first().map_or(s.dim(), Vec::len);
            let mut out = (1..=width)
                .map(|i| format!("x{i}"))
                .collect::<Vec<_>>()
                .join(",");
            out.push('\n');
            for r in &rows {
                let _ = writeln!(out, "{}", r.join(","));
            }
            Ok(out)
        }
        Format::Json => to_json(&json!({
            "m": s.m(),
            "steps": steps,
            "seed": args.seed,
            "exact_oracle": args.exact_oracle,
            "points": rows,
        })),
    }
}

fn integer_coords(p: &RationalPoint) -> Result<Vec<i64>> {
    p.coords()
        .iter()
        .map(|c| {
            if !c.is_integer() {
                return Err(Error::InvalidArgument(format!("point {p} is not integral")));
            }
            c.to_integer()
                .try_into()
                .map_err(|_| Error::Overflow(format!("coordinate of {p}")))
        })
        .collect()
}

fn reduce(
    design: &Path,
    margins: &Path,
    moves: Option<&Path>,
    output: &Path,
    moves_out: Option<&Path>,
    map_out: Option<&Path>,
) -> Result<String> {
    let a = algstat::read_matrix(design)?;
    let b = algstat::read_vector(margins)?;
    let table_moves = moves.map(algstat::read_matrix).transpose()?;
    let dp = DesignProblem::new(a, b, table_moves)?;
    let (inst, map) = algstat::reduce_to_model(&dp)?;
    inst.save(output)?;
    let fiber_moves = if dp.moves().is_some() {
        Some(algstat::moves_to_kernel_coords(&dp, &map)?)
    } else {
        None
    };
    match (&fiber_moves, moves_out) {
        (Some(mv), Some(path)) => std::fs::write(path, algstat::format_matrix(mv.moves()))?,
        (None, Some(_)) => return Err(Error::InvalidArgument("--moves-out needs --moves".into())),
        _ => {}
    }
    if let Some(path) = map_out {
        std::fs::write(path, serde_json::to_string_pretty(&map)? + "\n")?;
    }
    to_json(&json!({
        "d": inst.dim(),
        "halfspaces": inst.polytope().system().rows().len(),
        "x0": map.x0,
        "basis": map.basis,
        "fiber_moves": fiber_moves.as_ref().map(|m| m.moves().to_vec()),
        "instance": output,
    }))
}

fn spectrum(dir: &Path) -> Result<String> {
    let b = bundle::load(dir)?;
    let base = b.base();
    let h_now = second_eigenvalue(base.h());
    let mut report = json!({
        "n_h": base.n_h(),
        "lambda_h": base.lambda_h(),
        "lambda_h_recomputed": h_now.lambda,
        "h_method": h_now.method,
        "h_residual": h_now.residual,
    });
    if let Some(s) = b.sampler() {
        let e_now = second_eigenvalue(s.e());
        let g_now = second_eigenvalue(s.graph());
        let extra = json!({
            "m": s.m(),
            "n_e": s.n_e(),
            "lambda_e": s.lambda_e(),
            "lambda_e_recomputed": e_now.lambda,
            "e_residual": e_now.residual,
            "num_vertices": s.num_vertices(),
            "lambda_g": g_now.lambda,
            "g_method": g_now.method,
            "g_residual": g_now.residual,
            "lambda_bound": s.lambda_bound(),
            "within_bound": g_now.lambda <= s.lambda_bound() + 1e-6,
        });
        report
            .as_object_mut()
            .unwrap()
            .extend(extra.as_object().unwrap().clone());
    }
    to_json(&report)
}

fn diagnose(action: DiagnoseAction) -> Result<String> {
    match action {
        DiagnoseAction::Witness {
            instance,
            m,
            omega,
            moves,
            zigzag,
            seed,
            lambda_target,
            project,
            vector,
        } => {
            let inst = ModelInstance::load(&instance)?;
            let omega = omega
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<Rational>>>()?;
            let (graph, points, lambda) = if zigzag {
                let base = Arc::new(prepare_base(&inst, Strategy::Complete)?);
                let s = build_sampler(&base, m, seed, lambda_target)?;
                let points = (0..s.num_vertices())
                    .map(|v| s.decode_vertex(v))
                    .collect::<Result<Vec<_>>>()?;
                let lambda = second_eigenvalue(s.graph()).lambda;
                (s.graph().clone(), points, lambda)
            } else {
                let moves = read_moves(moves.as_deref().expect("required by clap"))?;
                let walk =
                    diagnostics::baseline_fiber_walk(inst.offsets(), inst.polytope(), m, &moves)?;
                let lambda = second_eigenvalue(&walk.graph).lambda;
                (walk.graph, walk.points, lambda)
            };
            let rep = diagnostics::slow_mixing_witness(&graph, &points, &omega, project)?;
            let mut out = json!({
                "graph": if zigzag { "zigzag" } else { "baseline" },
                "n": graph.n(),
                "lambda": lambda,
                "residual": rep.residual,
                "overlap": rep.overlap,
                "threshold": rep.threshold,
                "projected": project,
            });
            if vector {
                out["w"] = json!(rep.w);
            }
            to_json(&out)
        }
        DiagnoseAction::Cut {
            instance,
            m,
            normal,
            offset,
            ell,
            moves,
        } => {
            let inst = ModelInstance::load(&instance)?;
            let points = enumerate_fiber(inst.offsets(), inst.polytope(), m)?;
            let c = parse_rational(&offset)?;
            let (fraction, ell2) = match (ell, moves) {
                (Some(ell), _) => {
                    let ell = parse_rational(&ell)?;
                    (
                        diagnostics::cut_fraction(&points, &normal, &c, &ell)?,
                        &ell * &ell,
                    )
                }
                (None, Some(path)) => {
                    let ell2 = Rational::from_integer(
                        diagnostics::max_move_length_squared(&read_moves(&path)?).into(),
                    );
                    (
                        diagnostics::cut_fraction_squared(&points, &normal, &c, &ell2)?,
                        ell2,
                    )
                }
                (None, None) => unreachable!("required by clap"),
            };
            to_json(&json!({
                "m": m,
                "fiber_size": points.len(),
                "ell_squared": ell2.to_string(),
                "fraction": fraction.to_string(),
                "fraction_decimal": diagnostics::rational_to_f64(&fraction),
            }))
        }
        DiagnoseAction::Gap {
            instance,
            m_list,
            baseline_moves,
            seed,
            lambda_target,
            strategy,
        } => {
            let inst = ModelInstance::load(&instance)?;
            let moves = read_moves(&baseline_moves)?;
            let rows: Vec<GapReportRow> = diagnostics::gap_report(
                &inst,
                strategy.resolve()?,
                &moves,
                &m_list,
                seed,
                lambda_target,
            )?;
            to_json(&rows)
        }
    }
}
