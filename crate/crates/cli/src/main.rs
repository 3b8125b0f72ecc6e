use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use minority_qgame::equilibrium::{
    classify_profile, stationary_profile_search, EquilibriumReport, DEFAULT_AUDIT_GRID, NASH_TOL,
};
use minority_qgame::reproduce::{known_discrepancies, table_claims, write_figure, Target};
use minority_qgame::sweep::{
    format_sig, run_sweep, write_csv, AxisValues, SweepSpec, ENTANGLEMENT_AXIS,
};
use minority_qgame::{
    Error, Preset, Result, Scenario, ScenarioConfig, ScenarioTemplate, StrategyProfile, WeightMode,
};

#[derive(Parser)]
#[command(
    name = "qgame",
    version,
    about = "Cooperative quantum minority games: payoffs, sweeps and equilibrium audits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate payoffs at one strategy profile.
    Eval {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Group parameters, e.g. `--profile AB=0.5 C=0.5`.
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        profile: Vec<String>,
    },
    /// Evaluate a grid of profiles and write CSV.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Swept axis `NAME=start:stop:step`; NAME is a group or `a`.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        range: Vec<String>,
        /// Fixed group values, `NAME=value`.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        profile: Vec<String>,
        /// Output columns after the parameters (`P_A`, ..., `total_weight`).
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit a profile (or search for stationary profiles) for equilibrium.
    Audit {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Profile to audit; when absent a seeded multi-start search is run.
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        profile: Vec<String>,
        /// Largest tolerated best-response gain.
        #[arg(long, default_value_t = NASH_TOL)]
        tol: f64,
        /// Points of the unilateral scan over [0, 1]; 0 skips the scan.
        #[arg(long, default_value_t = DEFAULT_AUDIT_GRID)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Starting points of the stationary search.
        #[arg(long, default_value_t = 16)]
        starts: usize,
        /// Write the report(s) as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Regenerate figure data or check the known closed-form identities.
    Reproduce {
        /// fig1 | fig2 | fig3 | table-claims
        target: String,
        /// Directory for the CSV files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// JSON scenario file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    preset: Option<String>,
    /// Entanglement coefficient of a two-component initial state, in [0, 0.5].
    #[arg(long)]
    a: Option<f64>,
    /// How QSO outcome weights are turned into expectations.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<WeightMode>,
}

fn parse_mode(s: &str) -> std::result::Result<WeightMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl ScenarioArgs {
    fn template(&self, default_a: Option<f64>) -> Result<ScenarioTemplate> {
        let a = self.a.or(default_a);
        let mut template = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let mut config = ScenarioConfig::load(path).map_err(|e| match e {
                    Error::Io(io) => Error::Config(format!("cannot read {}: {io}", path.display())),
                    Error::Json(js) => Error::Config(format!("{}: {js}", path.display())),
                    other => other,
                })?;
                if config.preset.is_some() {
                    if self.a.is_some() || config.a.is_none() {
                        config.a = a;
                    }
                    config.template()?
                } else {
                    let t = config.template()?;
                    match self.a {
                        Some(a) => ScenarioTemplate {
                            state: rebuild_state(&t, a)?,
                            ..t
                        },
                        None => t,
                    }
                }
            }
            (None, Some(name)) => {
                let preset: Preset = name.parse()?;
                preset.template(if preset.is_two_component() { a } else { self.a })?
            }
            (None, None) => return Err(Error::Config("give --config or --preset".into())),
        };
        if let Some(mode) = self.mode {
            template.mode = mode;
        }
        Ok(template)
    }

    fn scenario(&self) -> Result<Scenario> {
        self.template(None)?.build(None)
    }
}

fn rebuild_state(t: &ScenarioTemplate, a: f64) -> Result<minority_qgame::config::StateSource> {
    use minority_qgame::config::StateSource;
    match t.state {
        StateSource::TwoComponent {
            basis_a, basis_b, ..
        } => Ok(StateSource::TwoComponent {
            basis_a,
            basis_b,
            a,
        }),
        StateSource::Fixed(_) => Err(Error::Config(
            "--a needs a two-component state given by `a`".into(),
        )),
    }
}

fn split_pair(text: &str) -> Result<(&str, &str)> {
    text.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| Error::Config(format!("expected NAME=VALUE, got `{text}`")))
}

fn parse_profile(scenario: &Scenario, pairs: &[String]) -> Result<StrategyProfile> {
    let parsed = pairs
        .iter()
        .map(|p| {
            let (k, v) = split_pair(p)?;
            let v: f64 = v
                .parse()
                .map_err(|_| Error::Config(format!("`{v}` is not a number in `{p}`")))?;
            Ok((k, v))
        })
        .collect::<Result<Vec<_>>>()?;
    scenario.profile_from_pairs(parsed)
}

fn describe_profile(scenario: &Scenario, profile: &[f64]) -> String {
    scenario
        .group_names()
        .iter()
        .zip(profile)
        .map(|(g, v)| format!("{g}={}", format_sig(*v)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_eval(args: &ScenarioArgs, profile: &[String]) -> Result<()> {
    let scenario = args.scenario()?;
    let profile = parse_profile(&scenario, profile)?;
    let eval = scenario.evaluate(&profile)?;
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "engine: {} ({} weights)",
        scenario.engine, scenario.mode
    )?;
    writeln!(
        out,
        "profile: {}",
        describe_profile(&scenario, profile.values())
    )?;
    for (name, v) in scenario
        .payoff_column_names()
        .iter()
        .zip(eval.payoffs.values())
    {
        writeln!(out, "{name} = {}", format_sig(*v))?;
    }
    writeln!(out, "total weight = {}", format_sig(eval.total_weight()))?;
    writeln!(
        out,
        "zero-sum residual = {}",
        format_sig(eval.payoffs.zero_sum_residual())
    )?;
    Ok(())
}

fn cmd_sweep(
    args: &ScenarioArgs,
    ranges: &[String],
    fixed: &[String],
    columns: &Option<Vec<String>>,
    out: &Option<PathBuf>,
) -> Result<()> {
    let mut sweep = SweepSpec::default();
    for r in ranges {
        let (name, values) = split_pair(r)?;
        sweep = sweep.axis(name, AxisValues::parse(values)?);
    }
    for f in fixed {
        let (name, value) = split_pair(f)?;
        match AxisValues::parse(value)? {
            v @ AxisValues::Fixed(_) => sweep = sweep.axis(name, v),
            _ => {
                return Err(Error::Config(format!(
                    "--profile takes single values; use --range for `{f}`"
                )))
            }
        }
    }
    sweep.columns = columns.clone();
    // a swept entanglement axis replaces whatever `a` the scenario carries
    let sweeps_a = sweep.axes.iter().any(|ax| ax.name == ENTANGLEMENT_AXIS);
    let template = args.template(sweeps_a.then_some(0.0))?;
    let table = run_sweep(&template, &sweep)?;
    match out {
        Some(path) => write_csv(&table, BufWriter::new(File::create(path)?)),
        None => write_csv(&table, io::stdout().lock()),
    }
}

fn print_report(
    out: &mut impl Write,
    scenario: &Scenario,
    report: &EquilibriumReport,
) -> io::Result<()> {
    writeln!(
        out,
        "profile: {}",
        describe_profile(scenario, &report.profile)
    )?;
    let payoffs: Vec<String> = scenario
        .payoff_column_names()
        .iter()
        .zip(&report.payoffs)
        .map(|(n, v)| format!("{n}={}", format_sig(*v)))
        .collect();
    writeln!(out, "payoffs: {}", payoffs.join(" "))?;
    match (&report.gradient, report.gradient_norm) {
        (Some(g), Some(norm)) => {
            let parts: Vec<String> = report
                .groups
                .iter()
                .zip(g)
                .map(|(n, v)| format!("d/d{n}={:.3e}", v))
                .collect();
            writeln!(
                out,
                "gradient: {}  (max-norm {:.3e})",
                parts.join(" "),
                norm
            )?;
        }
        _ => writeln!(out, "gradient: not defined on the boundary")?,
    }
    if !report.improvements.is_empty() {
        writeln!(out, "improvements:")?;
        for g in &report.improvements {
            writeln!(
                out,
                "  {:<4} baseline {}  best {} at {}  gain {}",
                g.group,
                format_sig(g.baseline),
                format_sig(g.best),
                format_sig(g.best_value),
                format_sig(g.improvement)
            )?;
        }
    }
    writeln!(out, "classification: {}", report.classification.label())?;
    if let Some(h) = &report.hessian {
        writeln!(
            out,
            "hessian of P_A: [[{:.6}, {:.6}], [{:.6}, {:.6}]]  eigenvalues {:.6}, {:.6}  ({:?})",
            h.matrix[0][0],
            h.matrix[0][1],
            h.matrix[1][0],
            h.matrix[1][1],
            h.eigenvalues[0],
            h.eigenvalues[1],
            h.shape
        )?;
    }
    Ok(())
}

fn cmd_audit(
    args: &ScenarioArgs,
    profile: &[String],
    tol: f64,
    grid: usize,
    seed: u64,
    starts: usize,
    out: &Option<PathBuf>,
) -> Result<()> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::Config(format!(
            "--tol must be nonnegative, got {tol}"
        )));
    }
    let scenario = args.scenario()?;
    let candidates = if profile.is_empty() {
        let found = stationary_profile_search(&scenario, starts, seed)?;
        println!(
            "stationary search: {} profile(s) from {starts} starts (seed {seed})",
            found.len()
        );
        found
    } else {
        vec![parse_profile(&scenario, profile)?]
    };
    let reports = candidates
        .iter()
        .map(|p| classify_profile(&scenario, p, tol, grid))
        .collect::<Result<Vec<_>>>()?;
    let mut stdout = io::stdout().lock();
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            writeln!(stdout)?;
        }
        print_report(&mut stdout, &scenario, r)?;
    }
    if let Some(path) = out {
        let file = BufWriter::new(File::create(path)?);
        if profile.is_empty() {
            serde_json::to_writer_pretty(file, &reports)?;
        } else {
            serde_json::to_writer_pretty(file, &reports[0])?;
        }
    }
    Ok(())
}

fn cmd_reproduce(target: &str, out: &Path) -> Result<bool> {
    let target: Target = target.parse()?;
    if target != Target::TableClaims {
        for path in write_figure(target, out)? {
            println!("wrote {}", path.display());
        }
        return Ok(true);
    }
    let claims = table_claims()?;
    for c in &claims {
        println!("{c}");
    }
    for d in known_discrepancies()? {
        println!("{d}");
    }
    let failed = claims.iter().filter(|c| !c.passed()).count();
    println!("{} claims, {} failed", claims.len(), failed);
    Ok(failed == 0)
}

fn run(cli: Cli) -> Result<bool> {
    match &cli.command {
        Command::Eval { scenario, profile } => cmd_eval(scenario, profile).map(|_| true),
        Command::Sweep {
            scenario,
            range,
            profile,
            columns,
            out,
        } => cmd_sweep(scenario, range, profile, columns, out).map(|_| true),
        Command::Audit {
            scenario,
            profile,
            tol,
            grid,
            seed,
            starts,
            out,
        } => cmd_audit(scenario, profile, *tol, *grid, *seed, *starts, out).map(|_| true),
        Command::Reproduce { target, out } => cmd_reproduce(target, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 3 })
        }
    }
}
