//! `mutloop`: command-line front end for mutation-loop dynamics.
//!
//! Exit codes: 0 success, 1 input error, 2 not a mutation loop, 3 the budget
//! could not verify sign stability.

mod input;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mutloop_core::conjecture::{conjecture_check, run_suite, SignSource, SuiteConfig};
use mutloop_core::entropy::estimate;
use mutloop_core::io::{matrix_to_json, point_to_json, traces_to_tsv, Convention, LoopFile, TriangulationFile};
use mutloop_core::seed::apply_path;
use mutloop_core::stability::{
    check_cone_stabilization, check_north_south, check_x_filling, cone_criterion, detect_sign_stability, sign_cone,
    tropical_sign_detailed, Budget, Region, StabilityReport, Verdict,
};
use mutloop_core::surfaces::{builtin_mapping_class, catalog_names};
use mutloop_core::tropical::{loop_matrix, loop_matrix_check, path_matrix, transport_along_path, transport_point};
use mutloop_core::{Error, MutationLoop, SignSequence, TropicalPoint};

use input::Inputs;

#[derive(Parser)]
#[command(
    name = "mutloop",
    version,
    about = "Exact tropical dynamics of cluster mutation loops"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mutate a seed along a path and print every resulting exchange matrix.
    Mutate(Common),
    /// Sign word, image and presentation matrices of a point.
    Sign {
        #[command(flatten)]
        common: Common,
        /// Tropical point as a JSON array or comma list; defaults to ℓ⁺.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Sign stability, stretch factors, entropies, cone stabilization and the
    /// spectral-radius comparison for one loop.
    Stability(Common),
    /// Sign cones of a loop power, and stabilization of the stable sign.
    Cones {
        #[command(flatten)]
        common: Common,
        /// Sign word such as `+-+`; defaults to the detected stable sign.
        #[arg(long, allow_hyphen_values = true)]
        sign: Option<String>,
        /// Loop power whose sign cone is printed.
        #[arg(long, default_value_t = 1)]
        power: usize,
    },
    /// Entropy values and growth traces of a sign-stable loop.
    Entropy {
        #[command(flatten)]
        common: Common,
        /// Entropy parameter T.
        #[arg(long = "t", default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
    },
    /// Randomized spectral-radius harness, or a single check of one loop.
    Conjecture {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        max_rank: usize,
        /// Directory for counterexample reproducers.
        #[arg(long, default_value = ".")]
        reproducer_dir: PathBuf,
        /// Point whose sign is used for a single loop; defaults to the tropical sign.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Catalog mapping classes: triangulation, loop and North-South check.
    Surface {
        #[command(flatten)]
        common: Common,
        /// Print the triangulation of a catalog entry as a triangulation file.
        #[arg(long)]
        triangulation: bool,
    },
    /// Look for a vanishing coordinate within a bounded mutation depth.
    Xfill {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Seed file `{"n", "b", "convention"}`.
    #[arg(long)]
    seed: Option<PathBuf>,
    /// Loop file `{"path", "perm"}` with 1-based labels.
    #[arg(long = "loop")]
    loop_file: Option<PathBuf>,
    /// Built-in catalog mapping class, e.g. `torus-LR`.
    #[arg(long)]
    surface: Option<String>,
    /// Comma-separated 1-based mutation path.
    #[arg(long)]
    path: Option<String>,
    /// Seed matrices are in the Fomin-Zelevinsky convention (transposed).
    #[arg(long)]
    fz: bool,
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
    #[arg(long, default_value_t = 64)]
    ray_samples: usize,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// X-filling depth.
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Trace length.
    #[arg(long, default_value_t = 40)]
    n_max: usize,
    #[arg(long, value_enum, default_value_t = Output::Json)]
    output: Output,
    /// Sampling region: cone-C-plus, nonneg-and-nonpos or integer-rays.
    #[arg(long, default_value = "cone-C-plus")]
    region: Region,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Tsv,
    Text,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    NotALoop(String),
    Inconclusive(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::NotALoop(_) => 2,
            Failure::Inconclusive(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::NotALoop(m) | Failure::Inconclusive(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotALoop => Failure::NotALoop(e.to_string()),
            Error::Unverified => Failure::Inconclusive(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<Rendered, Failure>;

/// A JSON document plus an optional table for `--output tsv`, and the exit
/// code it should produce after printing.
struct Rendered {
    value: Value,
    tsv: Option<String>,
    exit: u8,
}

impl Rendered {
    fn ok(value: Value) -> Self {
        Rendered {
            value,
            tsv: None,
            exit: 0,
        }
    }
}

impl Common {
    fn budget(&self) -> Result<Budget, Failure> {
        if self.max_iterations == 0 || self.ray_samples == 0 {
            return Err(Failure::Input("budgets must be positive".into()));
        }
        Ok(Budget {
            max_iterations: self.max_iterations,
            ray_samples: self.ray_samples,
            rng_seed: self.rng_seed,
        })
    }

    fn inputs(&self) -> Inputs<'_> {
        Inputs {
            seed: self.seed.as_deref(),
            loop_file: self.loop_file.as_deref(),
            surface: self.surface.as_deref(),
            path: self.path.as_deref(),
            fz: self.fz,
        }
    }
}

fn loop_json(lp: &MutationLoop) -> Value {
    let f = LoopFile::from_loop(lp);
    json!({
        "rank": lp.rank(),
        "path": f.path,
        "perm": f.perm,
        "base": matrix_to_json(lp.base().matrix()),
        "fully_mutating": lp.is_fully_mutating(),
    })
}

fn cmd_mutate(c: &Common) -> Outcome {
    let (b, convention) = c.inputs().seed()?;
    let path = c.inputs().path(b.rank())?.unwrap_or_default();
    let seeds = apply_path(&b, &path)?;
    // the mutated matrices; an empty path echoes the seed
    let shown = if path.is_empty() { &seeds[..] } else { &seeds[1..] };
    let matrices: Vec<Value> = shown
        .iter()
        .map(|s| match convention {
            Convention::Paper => matrix_to_json(s.matrix()),
            Convention::Fz => matrix_to_json(&s.matrix().transpose()),
        })
        .collect();
    Ok(Rendered::ok(json!({
        "convention": convention,
        "path": path.steps().iter().map(|k| k + 1).collect::<Vec<_>>(),
        "matrices": matrices,
    })))
}

fn cmd_sign(c: &Common, point: Option<&str>) -> Outcome {
    let inputs = c.inputs();
    if inputs.loop_file.is_none() && inputs.surface.is_none() {
        // plain path from a seed, no closing relabeling
        let (b, _) = inputs.seed()?;
        let path = inputs
            .path(b.rank())?
            .ok_or_else(|| Failure::Input("give --loop, --surface or --path".into()))?;
        let (w, perturbation) = match point {
            Some(p) => (input::parse_point(p)?, None),
            None => {
                let (_, w) = tropical_sign_detailed(&b, &path)?;
                (w.clone().unwrap_or_else(|| TropicalPoint::all_ones(b.rank())), w)
            }
        };
        let (image, word) = transport_along_path(&b, &path, &w)?;
        let matrix = word
            .is_strict()
            .then(|| path_matrix(&b, &path, &word).map(|m| matrix_to_json(&m)))
            .transpose()?;
        return Ok(Rendered::ok(json!({
            "point": point_to_json(&w),
            "perturbed_from_ones": perturbation.is_some(),
            "sign": word,
            "image": point_to_json(&image),
            "E": matrix,
        })));
    }
    let lp = inputs.mutation_loop()?;
    let (w, perturbed) = match point {
        Some(p) => (input::parse_point(p)?, false),
        None => {
            let (_, w) = tropical_sign_detailed(lp.base(), lp.path())?;
            let perturbed = w.is_some();
            (w.unwrap_or_else(|| TropicalPoint::all_ones(lp.rank())), perturbed)
        }
    };
    let (image, word) = transport_point(&lp, &w)?;
    let (e, ec) = if word.is_strict() {
        (
            Some(matrix_to_json(&loop_matrix(&lp, &word)?)),
            Some(matrix_to_json(&loop_matrix_check(&lp, &word)?)),
        )
    } else {
        (None, None)
    };
    Ok(Rendered::ok(json!({
        "loop": loop_json(&lp),
        "point": point_to_json(&w),
        "perturbed_from_ones": perturbed,
        "sign": word,
        "image": point_to_json(&image),
        "E": e,
        "E_check": ec,
    })))
}

fn verdict_exit(report: &StabilityReport) -> u8 {
    if report.verdict == Verdict::Inconclusive {
        3
    } else {
        0
    }
}

fn cmd_stability(c: &Common) -> Outcome {
    let lp = c.inputs().mutation_loop()?;
    let budget = c.budget()?;
    let report = detect_sign_stability(&lp, c.region, budget)?;
    let mut out = json!({
        "loop": loop_json(&lp),
        "verdict": report.verdict,
        "stable_sign": report.stable_sign,
        "lambda": report.lambda,
        "lambda_check": report.lambda_check,
        "entropy": null,
        "cone_stabilization": null,
        "cone_criterion": null,
        "conjecture": null,
    });
    if let Ok((sign, e, _)) = report.stable_data() {
        let est = estimate(&lp, &report, 0.0, c.n_max)?;
        out["entropy"] = json!({
            "h_dfd": est.h_dfd,
            "h_per": est.h_per,
            "T": est.t,
            "h_per_upper_bound": est.h_per_upper_bound,
            "norm_growth_extrapolated": est.extrapolated,
            "orbit_growth_extrapolated": est.orbit_extrapolated,
        });
        let stab = check_cone_stabilization(&lp, sign, c.n_max)?;
        if let Some(s) = &stab {
            out["cone_criterion"] = serde_json::to_value(cone_criterion(&s.cone, e, c.n_max)?).unwrap();
        }
        out["cone_stabilization"] = serde_json::to_value(&stab).unwrap();
        out["conjecture"] = serde_json::to_value(conjecture_check(&lp, &SignSource::Stable(budget))?).unwrap();
    }
    let exit = verdict_exit(&report);
    out["report"] = serde_json::to_value(&report).unwrap();
    Ok(Rendered {
        value: out,
        tsv: None,
        exit,
    })
}

fn cmd_cones(c: &Common, sign: Option<&str>, power: usize) -> Outcome {
    let lp = c.inputs().mutation_loop()?;
    if power == 0 {
        return Err(Failure::Input("--power must be at least 1".into()));
    }
    let sign = match sign {
        Some(s) => SignSequence::parse(s)?,
        None => {
            let r = detect_sign_stability(&lp, c.region, c.budget()?)?;
            r.stable_data()
                .map(|d| d.0.clone())
                .map_err(|_| Failure::Inconclusive(format!("no stable sign: verdict {:?}", r.verdict)))?
        }
    };
    if sign.len() != lp.len() {
        return Err(Failure::Input(format!(
            "sign has length {}, the loop has {} steps",
            sign.len(),
            lp.len()
        )));
    }
    let cone = sign_cone(&lp, &sign.repeated(power), power)?;
    let stab = check_cone_stabilization(&lp, &sign, c.n_max)?;
    let e = sign
        .is_strict()
        .then(|| loop_matrix(&lp, &sign).map(|m| matrix_to_json(&m)))
        .transpose()?;
    Ok(Rendered::ok(json!({
        "loop": loop_json(&lp),
        "sign": sign,
        "power": power,
        "cone": cone,
        "strictly_convex": cone.is_strictly_convex(),
        "cone_stabilization": stab,
        "E": e,
    })))
}

fn cmd_entropy(c: &Common, t: f64) -> Outcome {
    let lp = c.inputs().mutation_loop()?;
    let report = detect_sign_stability(&lp, c.region, c.budget()?)?;
    if !report.is_verified() {
        return Err(Failure::Inconclusive(format!(
            "entropy needs a sign-stable loop; verdict {:?}",
            report.verdict
        )));
    }
    let est = estimate(&lp, &report, t, c.n_max)?;
    let tsv = traces_to_tsv(&[("norm_growth", &est.growth_trace), ("orbit_growth", &est.orbit_trace)]);
    Ok(Rendered {
        value: serde_json::to_value(&est).unwrap(),
        tsv: Some(tsv),
        exit: 0,
    })
}

fn cmd_conjecture(c: &Common, count: usize, max_rank: usize, dir: &std::path::Path, point: Option<&str>) -> Outcome {
    let inputs = c.inputs();
    if inputs.loop_file.is_some() || inputs.surface.is_some() || inputs.path.is_some() {
        let lp = inputs.mutation_loop()?;
        let source = match point {
            Some(p) => SignSource::Point(input::parse_point(p)?),
            None => SignSource::Tropical,
        };
        let r = conjecture_check(&lp, &source)?;
        return Ok(Rendered::ok(json!({
            "loop": loop_json(&lp),
            "check": r,
        })));
    }
    if max_rank < 2 {
        return Err(Failure::Input("random loops need --max-rank at least 2".into()));
    }
    if count == 0 {
        return Err(Failure::Input("--count must be positive".into()));
    }
    let cfg = SuiteConfig {
        count,
        max_rank,
        rng_seed: c.rng_seed,
    };
    let report = run_suite(&cfg, Some(dir))?;
    Ok(Rendered::ok(serde_json::to_value(&report).unwrap()))
}

fn cmd_surface(c: &Common, triangulation: bool) -> Outcome {
    let Some(name) = c.surface.as_deref() else {
        let entries: Vec<Value> = catalog_names()
            .into_iter()
            .map(|n| {
                let (_, spec) = builtin_mapping_class(n).expect("catalog entry");
                json!({"name": spec.name, "description": spec.description, "expected_stretch": spec.expected_stretch})
            })
            .collect();
        return Ok(Rendered::ok(json!({ "catalog": entries })));
    };
    let (t, spec) = builtin_mapping_class(name)?;
    if triangulation {
        let f: TriangulationFile = t.to_file();
        return Ok(Rendered::ok(serde_json::to_value(f).unwrap()));
    }
    let lp = spec.to_loop(&t)?;
    let ns = check_north_south(&lp, c.budget()?, c.depth)?;
    Ok(Rendered::ok(json!({
        "mapping_class": spec,
        "triangulation": t.to_file(),
        "loop": loop_json(&lp),
        "north_south": ns,
    })))
}

fn cmd_xfill(c: &Common, point: &str) -> Outcome {
    let b = if let Some(name) = c.surface.as_deref() {
        builtin_mapping_class(name)?.0.to_matrix()
    } else {
        c.inputs().seed()?.0
    };
    let w = input::parse_point(point)?;
    let r = check_x_filling(&w, &b, c.depth)?;
    Ok(Rendered::ok(json!({
        "point": point_to_json(&w),
        "depth": c.depth,
        "result": r,
    })))
}

fn run(cli: &Cli) -> (Outcome, Output) {
    match &cli.command {
        Command::Mutate(c) => (cmd_mutate(c), c.output),
        Command::Sign { common, point } => (cmd_sign(common, point.as_deref()), common.output),
        Command::Stability(c) => (cmd_stability(c), c.output),
        Command::Cones { common, sign, power } => (cmd_cones(common, sign.as_deref(), *power), common.output),
        Command::Entropy { common, t } => (cmd_entropy(common, *t), common.output),
        Command::Conjecture {
            common,
            count,
            max_rank,
            reproducer_dir,
            point,
        } => (
            cmd_conjecture(common, *count, *max_rank, reproducer_dir, point.as_deref()),
            common.output,
        ),
        Command::Surface { common, triangulation } => (cmd_surface(common, *triangulation), common.output),
        Command::Xfill { common, point } => (cmd_xfill(common, point), common.output),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (outcome, output) = run(&cli);
    match outcome {
        Ok(r) => match render::render(&r.value, r.tsv.as_deref(), output) {
            Ok(text) => {
                print!("{text}");
                ExitCode::from(r.exit)
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        },
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
