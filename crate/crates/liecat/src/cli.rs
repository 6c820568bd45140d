//! Command-line front end: load a realization or energy-model file, run one
//! computation, and report the answer as `key=value` lines.
//!
//! The protocol is deliberately plain. One key per line; reals printed with
//! 17 significant digits so every reported value re-parses to the same
//! binary double; vectors as comma-separated reals on a single line. Exit
//! status 0 means the computation succeeded; 1 means the request was
//! well-formed but the mathematics said no (`NotComposable`,
//! `InvalidMorphism`, `OutwardVector`, ...); 2 means the request itself was
//! malformed (unknown flags, unreadable or invalid spec files, bad numeric
//! syntax). On error the report is `error=<kind>` plus `detail=<message>`.
//!
//! The relative rank tolerance is resolved per invocation: a `--tol-rank`
//! flag beats the `LIECAT_TOL_RANK` environment variable, which beats the
//! built-in default. Families whose membership predicate is itself a rank
//! decision (the action category) record the tolerance that made the
//! decision in every answer as a `tol_rank=` line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::categories::{MorphismPoint, ObjectPoint, Realization};
use crate::error::{Error, Result};
use crate::flows::{self, SectionSpec};
use crate::numerics::{numerical_rank, ToleranceConfig};
use crate::ranks;
use crate::specfile::{self, format_real, format_real_list, parse_real, parse_real_list};
use crate::thermo::{self, Configuration, EnergyModel, OracleBudget};

/// Environment variable holding a decimal real that overrides the default
/// relative rank tolerance. An explicit `--tol-rank` flag wins over it.
pub const TOL_RANK_ENV: &str = "LIECAT_TOL_RANK";

/// What one invocation produced: the process exit status and the full
/// report text (already newline-terminated).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutcome {
    /// 0 success, 1 domain error, 2 parse/validation error.
    pub status: i32,
    /// `key=value` lines, or `error=`/`detail=` lines on failure.
    pub report: String,
}

/// Run one command given its arguments (without the program name). This is
/// the whole CLI behind a plain function so tests can drive it in-process.
pub fn run<I, T>(args: I) -> CliOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv = std::iter::once(OsString::from("liecat")).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion) => {
            return CliOutcome {
                status: 0,
                report: e.to_string(),
            }
        }
        Err(e) => {
            return failure_outcome(&Error::Parse {
                detail: one_line(&e.to_string()),
            })
        }
    };
    match execute(cli.verb) {
        Ok(lines) => CliOutcome {
            status: 0,
            report: lines.join("\n") + "\n",
        },
        Err(err) => failure_outcome(&err),
    }
}

fn failure_outcome(err: &Error) -> CliOutcome {
    CliOutcome {
        status: if err.is_input_error() { 2 } else { 1 },
        report: format!("error={}\ndetail={}\n", err.kind(), one_line(&err.to_string())),
    }
}

/// Collapse a possibly multi-line message into one report line.
fn one_line(text: &str) -> String {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Parser)]
#[command(name = "liecat", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Compose two morphisms: `g` after `h`.
    Compose(ComposeArgs),
    /// Left and right translation ranks of a morphism, with regularity.
    Rank(MorphismArgs),
    /// Decide invertibility of a morphism.
    Invertible(MorphismArgs),
    /// Sample near an invertible morphism and count invertible neighbours.
    #[command(name = "core-probe")]
    CoreProbe(CoreProbeArgs),
    /// Exponential of a monoid tangent vector at the unit.
    Exp(ExpArgs),
    /// Flow a morphism along a left-invariant section for a given time.
    Flow(FlowArgs),
    /// Bracket of two left-invariant sections at the unit over an object.
    Bracket(BracketArgs),
    /// Anchor matrix at an object: how invariant flows move base points.
    Anchor(AnchorArgs),
    /// Entropy of a probability configuration.
    Entropy(EntropyArgs),
    /// Gibbs equilibrium of an energy model.
    Gibbs(GibbsArgs),
    /// Second-law feasibility of a process between two configurations.
    Feasible(ProcessArgs),
    /// Reachability of one configuration from another.
    Reachable(ReachableArgs),
    /// Parse a realization file and report its shape.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SpecArg {
    /// Path to the realization file.
    #[arg(long)]
    spec: PathBuf,
    /// Relative rank tolerance override (beats LIECAT_TOL_RANK).
    #[arg(long)]
    tol_rank: Option<f64>,
}

#[derive(Args)]
struct ComposeArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Outer morphism coordinates, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    g: String,
    /// Inner morphism coordinates, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    h: String,
}

#[derive(Args)]
struct MorphismArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Morphism coordinates, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    morphism: String,
}

#[derive(Args)]
struct CoreProbeArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Centre morphism coordinates, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    morphism: String,
    /// Sampling radius around the centre.
    #[arg(long, default_value_t = 0.01)]
    radius: f64,
    /// Number of neighbours to draw.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// RNG seed (mandatory: probes must be reproducible).
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct ExpArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Tangent vector at the unit, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    vector: String,
}

#[derive(Args)]
struct FlowArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Starting morphism coordinates, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    morphism: String,
    /// Section data: target-fibre frame coefficients, or a raw monoid
    /// tangent vector with --monoid-vector.
    #[arg(long, allow_hyphen_values = true)]
    section: String,
    /// Flow time.
    #[arg(long, allow_hyphen_values = true)]
    time: f64,
    /// Interpret --section as a monoid tangent vector instead of frame
    /// coefficients.
    #[arg(long)]
    monoid_vector: bool,
}

#[derive(Args)]
struct BracketArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// First section, comma-separated (frame coefficients by default).
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    /// Second section, comma-separated (frame coefficients by default).
    #[arg(long, allow_hyphen_values = true)]
    beta: String,
    /// Base object coordinates; defaults to the unique object of a monoid.
    #[arg(long, allow_hyphen_values = true)]
    object: Option<String>,
    /// Interpret --alpha/--beta as monoid tangent vectors.
    #[arg(long)]
    monoid_vector: bool,
}

#[derive(Args)]
struct AnchorArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Base object coordinates; defaults to the unique object of a monoid.
    #[arg(long, allow_hyphen_values = true)]
    object: Option<String>,
}

#[derive(Args)]
struct EntropyArgs {
    /// Full probability vector (all outcomes), comma-separated.
    #[arg(long)]
    probs: String,
}

#[derive(Args)]
struct GibbsArgs {
    /// Path to an energy-model file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Energy levels, comma-separated (alternative to --model).
    #[arg(long, allow_hyphen_values = true)]
    energies: Option<String>,
    /// Product kT of Boltzmann constant and temperature (with --energies).
    #[arg(long = "kT")]
    k_t: Option<f64>,
    /// Boltzmann constant (with --energies; default 1).
    #[arg(long)]
    boltzmann: Option<f64>,
    /// Also run the brute-force maximizer and report the disagreement.
    #[arg(long)]
    oracle: bool,
    /// Oracle grid points per axis (with --oracle).
    #[arg(long)]
    grid: Option<usize>,
    /// Oracle refinement rounds (with --oracle).
    #[arg(long)]
    rounds: Option<usize>,
}

#[derive(Args)]
struct ProcessArgs {
    /// Probability vector of the state the process starts from.
    #[arg(long)]
    from: String,
    /// Probability vector of the state the process ends in.
    #[arg(long)]
    to: String,
    /// Entropy slack allowed below zero (for round-trip composites).
    #[arg(long, default_value_t = 0.0)]
    slack: f64,
}

#[derive(Args)]
struct ReachableArgs {
    /// Probability vector of the starting state.
    #[arg(long)]
    from: String,
    /// Probability vector of the candidate end state.
    #[arg(long)]
    to: String,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    spec: SpecArg,
}

fn execute(verb: Verb) -> Result<Vec<String>> {
    match verb {
        Verb::Compose(a) => cmd_compose(a),
        Verb::Rank(a) => cmd_rank(a),
        Verb::Invertible(a) => cmd_invertible(a),
        Verb::CoreProbe(a) => cmd_core_probe(a),
        Verb::Exp(a) => cmd_exp(a),
        Verb::Flow(a) => cmd_flow(a),
        Verb::Bracket(a) => cmd_bracket(a),
        Verb::Anchor(a) => cmd_anchor(a),
        Verb::Entropy(a) => cmd_entropy(a),
        Verb::Gibbs(a) => cmd_gibbs(a),
        Verb::Feasible(a) => cmd_feasible(a),
        Verb::Reachable(a) => cmd_reachable(a),
        Verb::Validate(a) => cmd_validate(a),
    }
}

// ----- shared plumbing ---------------------------------------------------

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        detail: format!("cannot read {}: {e}", path.display()),
    })
}

/// Resolve the tolerance configuration from an optional flag value and the
/// optional raw environment variable text. Flag beats environment beats
/// default.
fn resolve_tolerances(flag: Option<f64>, env_text: Option<&str>) -> Result<ToleranceConfig> {
    let mut tol = ToleranceConfig::default();
    if let Some(text) = env_text {
        let value = parse_real(text.trim()).map_err(|_| Error::Parse {
            detail: format!("{TOL_RANK_ENV} must be a finite decimal real, got `{text}`"),
        })?;
        if value <= 0.0 {
            return Err(Error::Parse {
                detail: format!("{TOL_RANK_ENV} must be positive, got {value}"),
            });
        }
        tol.rank_rel_tol = value;
    }
    if let Some(value) = flag {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Parse {
                detail: format!("--tol-rank must be positive and finite, got {value}"),
            });
        }
        tol.rank_rel_tol = value;
    }
    Ok(tol)
}

fn load_spec(spec: &SpecArg) -> Result<(Realization, ToleranceConfig)> {
    let realization = specfile::parse_realization(&read_file(&spec.spec)?)?;
    let env_text = std::env::var(TOL_RANK_ENV).ok();
    let tol = resolve_tolerances(spec.tol_rank, env_text.as_deref())?;
    Ok((realization, tol))
}

fn parse_morphism(c: &Realization, text: &str, tol: &ToleranceConfig) -> Result<MorphismPoint> {
    c.morphism_with(&parse_real_list(text)?, tol)
}

/// Pick the base object for bracket/anchor verbs: the flag if given, the
/// unique object of a monoid otherwise.
fn resolve_object(c: &Realization, flag: Option<&str>) -> Result<ObjectPoint> {
    match flag {
        Some(text) => c.object(&parse_real_list(text)?),
        None => c.unique_object().ok_or_else(|| Error::Parse {
            detail: format!("--object is required for family {}", c.family_name()),
        }),
    }
}

fn parse_section(text: &str, monoid_vector: bool) -> Result<SectionSpec> {
    let coords = parse_real_list(text)?;
    Ok(if monoid_vector {
        SectionSpec::MonoidVector(coords)
    } else {
        SectionSpec::FrameCoefficients(coords)
    })
}

fn parse_configuration(text: &str) -> Result<Configuration> {
    Configuration::new(parse_real_list(text)?)
}

/// Extra answer lines a family requires. The action category's membership
/// is itself a rank decision, so every answer on it records the tolerance
/// that made the decision.
fn family_lines(c: &Realization, tol: &ToleranceConfig) -> Vec<String> {
    match c {
        Realization::ActionCategory { .. } => {
            vec![format!("tol_rank={}", format_real(tol.rank_rel_tol))]
        }
        _ => Vec::new(),
    }
}

// ----- verbs -------------------------------------------------------------

fn cmd_compose(a: ComposeArgs) -> Result<Vec<String>> {
    let (c, tol) = load_spec(&a.spec)?;
    let g = parse_morphism(&c, &a.g, &tol)?;
    let h = parse_morphism(&c, &a.h, &tol)?;
    let gh = c.compose_with(&g, &h, &tol)?;
    let mut lines = vec![format!("composite={}", format_real_list(gh.coords()))];
    lines.extend(family_lines(&c, &tol));
    Ok(lines)
}

fn cmd_rank(a: MorphismArgs) -> Result<Vec<String>> {
    let (c, tol) = load_spec(&a.spec)?;
    let g = parse_morphism(&c, &a.morphism, &tol)?;
    let report = ranks::rank_report(&c, &g, &tol)?;
    let mut lines = vec![
        format!("left_rank={}", report.left),
        format!("right_rank={}", report.right),
        format!("delta={}", report.delta),
        format!("regular={}", report.regular),
    ];
    lines.extend(family_lines(&c, &tol));
    Ok(lines)
}

fn cmd_invertible(a: MorphismArgs) -> Result<Vec<String>> {
    let (c, tol) = load_spec(&a.spec)?;
    let g = parse_morphism(&c, &a.morphism, &tol)?;
    let mut lines = vec![format!(
        "invertible={}",
        ranks::is_invertible(&c, &g, &tol)?
    )];
    lines.extend(family_lines(&c, &tol));
    Ok(lines)
}

fn cmd_core_probe(a: CoreProbeArgs) -> Result<Vec<String>> {
    let (c, tol) = load_spec(&a.spec)?;
    if !a.radius.is_finite() || a.radius <= 0.0 {
        return Err(Error::Parse {
            detail: format!("--radius must be positive and finite, got {}", a.radius),
        });
    }
    if a.samples == 0 {
        return Err(Error::Parse {
            detail: "--samples must be at least 1".into(),
        });
    }
    let g = parse_morphism(&c, &a.morphism, &tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let probe = ranks::core_probe(&c, &g, a.radius, a.samples, &mut rng, &tol)?;
    let mut lines = vec![
        format!("samples={}", probe.samples),
        format!("invertible={}", probe.invertible),
        format!("fraction={}", format_real(probe.fraction())),
    ];
    lines.extend(family_lines(&c, &tol));
    Ok(lines)
}

fn cmd_exp(a: ExpArgs) -> Result<Vec<String>> {
    let (c, tol) = load_spec(&a.spec)?;
    let v = parse_real_list(&a.vector)?;
    let endpoint = flows::exp_monoid(&c, &v, &tol)?;
    let mut lines = vec![format!("endpoint={}", format_real_list(endpoint.coords()))];
    lines.extend(family_lines(&c, &tol));
    Ok(lines)
}

fn cmd_flow(a: FlowArgs) -> Result<Vec<String>> {
    let (c, tol) = load_spec(&a.spec)?;
    if !a.time.is_finite() {
        return Err(Error::Parse {
            detail: format!("--time must be finite, got {}", a.time),
        });
    }
    let g = parse_morphism(&c, &a.morphism, &tol)?;
    let section = parse_section(&a.section, a.monoid_vector)?;
    let flow = flows::flow_left_invariant(&c, &section, &g, a.time, &tol)?;
    let mut lines = vec![
        format!("endpoint={}", format_real_list(flow.endpoint.coords())),
        format!("t_reached={}", format_real(flow.t_reached)),
        format!("exited={}", flow.exited),
    ];
    lines.extend(family_lines(&c, &tol));
    Ok(lines)
}

fn cmd_bracket(a: BracketArgs) -> Result<Vec<String>> {
    let (c, tol) = load_spec(&a.spec)?;
    let x = resolve_object(&c, a.object.as_deref())?;
    let alpha = parse_section(&a.alpha, a.monoid_vector)?;
    let beta = parse_section(&a.beta, a.monoid_vector)?;
    let bracket = flows::bracket_at_unit(&c, &alpha, &beta, &x, &tol)?;
    let mut lines = vec![
        format!("ambient={}", format_real_list(&bracket.ambient)),
        format!("frame={}", format_real_list(&bracket.frame)),
        format!(
            "projection_residual={}",
            format_real(bracket.projection_residual)
        ),
    ];
    lines.extend(family_lines(&c, &tol));
    Ok(lines)
}

fn cmd_anchor(a: AnchorArgs) -> Result<Vec<String>> {
    let (c, tol) = load_spec(&a.spec)?;
    let x = resolve_object(&c, a.object.as_deref())?;
    let anchor = flows::anchor_matrix(&c, &x, &tol)?;
    let rank = numerical_rank(&anchor, &tol)?;
    let mut lines = vec![
        format!("rows={}", anchor.rows()),
        format!("cols={}", anchor.cols()),
        format!("matrix={}", format_real_list(anchor.as_slice())),
        format!("rank={rank}"),
    ];
    lines.extend(family_lines(&c, &tol));
    Ok(lines)
}

fn cmd_entropy(a: EntropyArgs) -> Result<Vec<String>> {
    let p = parse_configuration(&a.probs)?;
    Ok(vec![format!("entropy={}", format_real(thermo::entropy(&p)))])
}

fn cmd_gibbs(a: GibbsArgs) -> Result<Vec<String>> {
    let model = match (&a.model, &a.energies, a.k_t) {
        (Some(path), None, None) => {
            if a.boltzmann.is_some() {
                return Err(Error::Parse {
                    detail: "--boltzmann belongs to --energies mode; the model file carries its own"
                        .into(),
                });
            }
            specfile::parse_energy_model(&read_file(path)?)?
        }
        (None, Some(list), Some(kt)) => {
            let boltzmann = a.boltzmann.unwrap_or(1.0);
            if !kt.is_finite() || kt <= 0.0 || !boltzmann.is_finite() || boltzmann <= 0.0 {
                return Err(Error::Parse {
                    detail: "--kT and --boltzmann must be positive and finite".into(),
                });
            }
            EnergyModel::new(parse_real_list(list)?, kt / boltzmann, boltzmann)?
        }
        _ => {
            return Err(Error::Parse {
                detail: "pass either --model FILE or both --energies LIST and --kT REAL".into(),
            })
        }
    };
    let solution = thermo::gibbs_equilibrium(&model)?;
    let mut lines = vec![
        format!("p={}", format_real_list(solution.p_eq.probs())),
        format!("Z={}", format_real(solution.z)),
        format!("lambda1={}", format_real(solution.lambda1)),
    ];
    if a.oracle {
        let mut budget = OracleBudget::default();
        if let Some(grid) = a.grid {
            budget.grid = grid;
        }
        if let Some(rounds) = a.rounds {
            budget.refine_rounds = rounds;
        }
        let oracle = thermo::gibbs_bruteforce_oracle(&model, &budget)?;
        let diff = solution
            .p_eq
            .probs()
            .iter()
            .zip(oracle.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        lines.push(format!("p_oracle={}", format_real_list(oracle.probs())));
        lines.push(format!("oracle_max_abs_diff={}", format_real(diff)));
    } else if a.grid.is_some() || a.rounds.is_some() {
        return Err(Error::Parse {
            detail: "--grid and --rounds require --oracle".into(),
        });
    }
    Ok(lines)
}

fn cmd_feasible(a: ProcessArgs) -> Result<Vec<String>> {
    if !a.slack.is_finite() || a.slack < 0.0 {
        return Err(Error::Parse {
            detail: format!("--slack must be nonnegative and finite, got {}", a.slack),
        });
    }
    let p = parse_configuration(&a.from)?;
    let q = parse_configuration(&a.to)?;
    let delta = thermo::delta_entropy(&q, &p)?;
    let feasible = thermo::is_feasible(&q, &p, a.slack)?;
    Ok(vec![
        format!("delta_entropy={}", format_real(delta)),
        format!("feasible={feasible}"),
    ])
}

fn cmd_reachable(a: ReachableArgs) -> Result<Vec<String>> {
    let p = parse_configuration(&a.from)?;
    let target = parse_configuration(&a.to)?;
    Ok(vec![format!(
        "reachable={}",
        thermo::can_reach(&target, &p)?
    )])
}

fn cmd_validate(a: ValidateArgs) -> Result<Vec<String>> {
    let (c, tol) = load_spec(&a.spec)?;
    let mut lines = vec![
        format!("family={}", c.family_name()),
        format!("dim_morphisms={}", c.dim_morphisms()),
        format!("dim_objects={}", c.dim_objects()),
        format!("delta={}", c.delta()),
        format!("monoid={}", c.is_monoid()),
        "ok=true".to_string(),
    ];
    lines.extend(family_lines(&c, &tol));
    Ok(lines)
}
