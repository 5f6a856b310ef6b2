//! `qillum`: detection reports, parameter sweeps, figure data, separability
//! checks, number-basis validation and Monte Carlo runs for quantum
//! illumination with an amplified idler.
//!
//! Exit status: 0 on success, 2 on invalid arguments, 1 when the parameters
//! are outside a routine's domain (or output cannot be written).

mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use qillum::fock::{build_oracle_state, oracle_count_stats, LEAKAGE_WARNING};
use qillum::montecarlo::{estimate_error_probability, TrialConfig};
use qillum::{
    amplify_mode, classify_regime, count_difference_stats, detection_report, gain_prefactor,
    log_negativity, min_ppt_symplectic_eigenvalue, receiver_covariances, snr_csh_closed_form,
    snr_qi_closed_form, tmsv_covariance, Gain, Hypothesis, ScenarioParams,
};
use rayon::prelude::*;
use serde::Serialize;

use output::{format_number, write_csv, write_json};

#[derive(Parser)]
#[command(
    name = "qillum",
    version,
    about = "Quantum illumination with an amplified idler"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Threshold, SNRs, error probability and regime of one scenario.
    Report {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Evaluate the SNRs and error probability along one parameter.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Emit the data behind a figure.
    Figure {
        #[command(subcommand)]
        figure: Figure,
    },
    /// Separability test of the amplified two-mode squeezed vacuum.
    Ppt {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compare the Gaussian count statistics with the number-basis reference.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Photon-number truncation per detector port.
        #[arg(long, default_value_t = 35, value_parser = clap::value_parser!(u64).range(2..=60))]
        dim: u64,
        /// Validate only the scenario given by the flags instead of the grid
        /// n_s ∈ {0.1, 0.5}, n_b ∈ {0.25, 1}, kappa ∈ {0.1, 0.5}, G ∈ {1, 2}.
        #[arg(long)]
        point: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo estimate of the error probability.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Decision trials per hypothesis.
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Subcommand)]
enum Figure {
    /// Gain prefactor (G − 1/G)²/(G² + 1/G²) for gain_db ∈ [0, 30], 301 points.
    GainPrefactor {
        /// How decibels map to the quadrature gain G.
        #[arg(long, value_enum, default_value_t = DbConvention::Amplitude)]
        db_convention: DbConvention,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// SNR ratio against coherent-state homodyne detection at 15 dB gain,
    /// n_b = 100, kappa = 1e-3, for n_s log-spaced over [1e-2, 1e8].
    SnrRatio {
        #[arg(long, default_value_t = 201, value_parser = clap::value_parser!(u64).range(2..))]
        points: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DbConvention {
    /// dB = 20·log10(G); 15 dB is G ≈ 5.62.
    Amplitude,
    /// dB = 10·log10(G); 15 dB is G ≈ 31.6.
    Power,
}

impl DbConvention {
    fn gain(self, db: f64) -> qillum::Result<Gain> {
        match self {
            DbConvention::Amplitude => Gain::from_db(db),
            DbConvention::Power => Gain::from_db(2.0 * db),
        }
    }
}

#[derive(Args)]
struct ScenarioArgs {
    /// Mean signal photons per mode.
    #[arg(long, default_value_t = 0.01)]
    ns: f64,
    /// Mean background photons per mode.
    #[arg(long, default_value_t = 100.0)]
    nb: f64,
    /// Target reflectance, 0 <= kappa < 1.
    #[arg(long, default_value_t = 1e-3)]
    kappa: f64,
    /// Idler gain in dB (20·log10 G); 15 dB if no gain is given.
    #[arg(long, conflicts_with = "gain")]
    gain_db: Option<f64>,
    /// Linear idler gain G >= 1.
    #[arg(long)]
    gain: Option<f64>,
    /// Number of signal–idler mode pairs M.
    #[arg(long, default_value_t = 1_000_000)]
    modes: u64,
}

impl ScenarioArgs {
    fn params(&self) -> qillum::Result<ScenarioParams> {
        let gain = match (self.gain, self.gain_db) {
            (Some(g), _) => Gain::linear(g)?,
            (None, Some(db)) => Gain::from_db(db)?,
            (None, None) => Gain::from_db(15.0)?,
        };
        ScenarioParams::new(self.ns, self.nb, self.kappa, gain, self.modes)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format; JSON for single results and CSV for tables by default.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepParam {
    #[value(name = "n_s")]
    NS,
    #[value(name = "n_b")]
    NB,
    Kappa,
    #[value(name = "gain_db")]
    GainDb,
    Modes,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Spacing {
    Linear,
    Log,
}

#[derive(Args)]
struct SweepArgs {
    /// Parameter to vary; the others come from the scenario flags.
    #[arg(long, value_enum)]
    param: SweepParam,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long, default_value_t = 51, value_parser = clap::value_parser!(u64).range(2..))]
    points: u64,
    #[arg(long, value_enum, default_value_t = Spacing::Linear)]
    spacing: Spacing,
}

/// `points` values from `from` to `to` inclusive.
fn grid(from: f64, to: f64, points: u64, spacing: Spacing) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points)
        .map(|k| {
            let t = k as f64 / last;
            match spacing {
                Spacing::Linear => from + (to - from) * t,
                Spacing::Log => 10f64.powf(from.log10() + (to.log10() - from.log10()) * t),
            }
        })
        .collect()
}

enum Failure {
    Usage(clap::Error),
    Domain(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Domain(e.into())
    }
}

fn usage(kind: ErrorKind, message: impl std::fmt::Display) -> Failure {
    Failure::Usage(Cli::command().error(kind, message))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => e.exit(),
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn emit(
    out: &OutputArgs,
    default: Format,
    write: impl FnOnce(&mut dyn Write, Format) -> anyhow::Result<()>,
) -> Result<(), Failure> {
    let mut sink = output::open(out.output.as_deref()).with_context(|| match &out.output {
        Some(p) => format!("cannot create {}", p.display()),
        None => "cannot open standard output".to_owned(),
    })?;
    write(&mut *sink, out.format.unwrap_or(default))?;
    sink.flush()?;
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Report { scenario, out } => report(&scenario, &out),
        Command::Sweep {
            scenario,
            sweep,
            out,
        } => run_sweep(&scenario, &sweep, &out),
        Command::Figure { figure } => match figure {
            Figure::GainPrefactor { db_convention, out } => {
                gain_prefactor_figure(db_convention, &out)
            }
            Figure::SnrRatio { points, out } => snr_ratio_figure(points, &out),
        },
        Command::Ppt { scenario, out } => ppt(&scenario, &out),
        Command::Validate {
            scenario,
            dim,
            point,
            out,
        } => validate(&scenario, dim as usize, point, &out),
        Command::Simulate {
            scenario,
            trials,
            seed,
            out,
        } => simulate(&scenario, trials, seed, &out),
    }
}

#[derive(Serialize)]
struct ReportOutput {
    params: ScenarioParams,
    gain_db: f64,
    report: qillum::DetectionReport,
    snr_csh: f64,
    regime: qillum::RegimeReport,
}

fn report(scenario: &ScenarioArgs, out: &OutputArgs) -> Result<(), Failure> {
    let params = scenario.params()?;
    let record = ReportOutput {
        params,
        gain_db: params.gain.db(),
        report: detection_report(&params)?,
        snr_csh: snr_csh_closed_form(&params),
        regime: classify_regime(&params),
    };
    emit(out, Format::Json, |w, format| match format {
        Format::Json => write_json(w, &record),
        Format::Csv => {
            let r = &record.report;
            write_csv(
                w,
                &[
                    "n_s",
                    "n_b",
                    "kappa",
                    "gain",
                    "modes",
                    "threshold",
                    "p_error",
                    "snr_paper",
                    "snr_first_principles",
                    "snr_csh",
                    "ratio",
                    "regime",
                    "clt_reliable",
                ],
                &[vec![
                    params.n_s.into(),
                    params.n_b.into(),
                    params.kappa.into(),
                    params.gain.value().into(),
                    params.modes.into(),
                    r.threshold.into(),
                    r.p_error.into(),
                    r.snr_paper.into(),
                    r.snr_first_principles.into(),
                    record.snr_csh.into(),
                    record.regime.ratio.into(),
                    record.regime.regime.to_string().into(),
                    r.clt_reliable.into(),
                ]],
            )
        }
    })
}

#[derive(Serialize)]
struct SweepRow {
    value: f64,
    snr_qi: f64,
    snr_csh: f64,
    ratio: f64,
    p_error: f64,
    regime: String,
}

fn with_param(
    base: ScenarioParams,
    param: SweepParam,
    value: f64,
) -> qillum::Result<ScenarioParams> {
    let mut p = base;
    match param {
        SweepParam::NS => p.n_s = value,
        SweepParam::NB => p.n_b = value,
        SweepParam::Kappa => p.kappa = value,
        SweepParam::GainDb => p.gain = Gain::from_db(value)?,
        SweepParam::Modes => {
            if !(value.is_finite() && value >= 1.0) {
                return Err(qillum::Error::Domain {
                    name: "modes",
                    value,
                    expected: "at least 1",
                });
            }
            p.modes = value.round() as u64;
        }
    }
    p.validate()?;
    Ok(p)
}

fn run_sweep(scenario: &ScenarioArgs, sweep: &SweepArgs, out: &OutputArgs) -> Result<(), Failure> {
    if !(sweep.from.is_finite() && sweep.to.is_finite()) {
        return Err(usage(
            ErrorKind::ValueValidation,
            "sweep bounds must be finite",
        ));
    }
    if sweep.spacing == Spacing::Log && (sweep.from <= 0.0 || sweep.to <= 0.0) {
        return Err(usage(
            ErrorKind::ValueValidation,
            "log spacing needs positive --from and --to",
        ));
    }
    let base = scenario.params()?;
    let values = grid(sweep.from, sweep.to, sweep.points, sweep.spacing);
    let rows = values
        .par_iter()
        .map(|&v| -> qillum::Result<SweepRow> {
            let p = with_param(base, sweep.param, v)?;
            let value = if sweep.param == SweepParam::Modes {
                p.modes as f64
            } else {
                v
            };
            let regime = classify_regime(&p);
            Ok(SweepRow {
                value,
                snr_qi: snr_qi_closed_form(&p),
                snr_csh: snr_csh_closed_form(&p),
                ratio: regime.ratio,
                p_error: detection_report(&p)?.p_error,
                regime: regime.regime.to_string(),
            })
        })
        .collect::<qillum::Result<Vec<_>>>()?;
    emit(out, Format::Csv, |w, format| match format {
        Format::Json => write_json(w, &rows),
        Format::Csv => write_csv(
            w,
            &["value", "snr_qi", "snr_csh", "ratio", "p_error", "regime"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.value.into(),
                        r.snr_qi.into(),
                        r.snr_csh.into(),
                        r.ratio.into(),
                        r.p_error.into(),
                        r.regime.as_str().into(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    })
}

#[derive(Serialize)]
struct PrefactorRow {
    gain_db: f64,
    prefactor: f64,
}

fn gain_prefactor_figure(convention: DbConvention, out: &OutputArgs) -> Result<(), Failure> {
    let rows = (0..=300)
        .map(|k| {
            let gain_db = k as f64 / 10.0;
            Ok(PrefactorRow {
                gain_db,
                prefactor: gain_prefactor(convention.gain(gain_db)?),
            })
        })
        .collect::<qillum::Result<Vec<_>>>()?;
    emit(out, Format::Csv, |w, format| match format {
        Format::Json => write_json(w, &rows),
        Format::Csv => write_csv(
            w,
            &["gain_db", "prefactor"],
            &rows
                .iter()
                .map(|r| vec![r.gain_db.into(), r.prefactor.into()])
                .collect::<Vec<_>>(),
        ),
    })
}

#[derive(Serialize)]
struct RatioRow {
    n_s: f64,
    snr_qi: f64,
    snr_csh: f64,
    ratio: f64,
    regime: String,
}

fn snr_ratio_figure(points: u64, out: &OutputArgs) -> Result<(), Failure> {
    let gain = Gain::from_db(15.0)?;
    let rows = grid(1e-2, 1e8, points, Spacing::Log)
        .into_iter()
        .map(|n_s| {
            let p = ScenarioParams::new(n_s, 100.0, 1e-3, gain, 1)?;
            let regime = classify_regime(&p);
            Ok(RatioRow {
                n_s,
                snr_qi: snr_qi_closed_form(&p),
                snr_csh: snr_csh_closed_form(&p),
                ratio: regime.ratio,
                regime: regime.regime.to_string(),
            })
        })
        .collect::<qillum::Result<Vec<_>>>()?;
    emit(out, Format::Csv, |w, format| match format {
        Format::Json => write_json(w, &rows),
        Format::Csv => write_csv(
            w,
            &["n_s", "snr_qi", "snr_csh", "ratio", "regime"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.n_s.into(),
                        r.snr_qi.into(),
                        r.snr_csh.into(),
                        r.ratio.into(),
                        r.regime.as_str().into(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    })
}

#[derive(Serialize)]
struct PptOutput {
    n_s: f64,
    gain: f64,
    min_ppt_eigenvalue: f64,
    log_negativity: f64,
    verdict: &'static str,
}

fn ppt(scenario: &ScenarioArgs, out: &OutputArgs) -> Result<(), Failure> {
    let p = scenario.params()?;
    let v = amplify_mode(&tmsv_covariance(p.n_s)?, 2, p.gain)?;
    let eigenvalue = min_ppt_symplectic_eigenvalue(&v)?;
    let record = PptOutput {
        n_s: p.n_s,
        gain: p.gain.value(),
        min_ppt_eigenvalue: eigenvalue,
        log_negativity: log_negativity(&v)?,
        verdict: if eigenvalue < 0.5 {
            "NONSEPARABLE"
        } else {
            "SEPARABLE"
        },
    };
    emit(out, Format::Json, |w, format| match format {
        Format::Json => write_json(w, &record),
        Format::Csv => write_csv(
            w,
            &[
                "n_s",
                "gain",
                "min_ppt_eigenvalue",
                "log_negativity",
                "verdict",
            ],
            &[vec![
                record.n_s.into(),
                record.gain.into(),
                record.min_ppt_eigenvalue.into(),
                record.log_negativity.into(),
                record.verdict.into(),
            ]],
        ),
    })
}

#[derive(Serialize)]
struct ValidationRow {
    n_s: f64,
    n_b: f64,
    kappa: f64,
    gain: f64,
    hypothesis: &'static str,
    gaussian_mean: f64,
    oracle_mean: f64,
    gaussian_variance: f64,
    oracle_variance: f64,
    leakage: f64,
    /// Largest of the mean and variance deviations, relative to the Gaussian value.
    relative_deviation: f64,
    /// Within max(1e-6 relative, 10 × leakage) for both moments.
    within_tolerance: bool,
}

#[derive(Serialize)]
struct ValidationOutput {
    dim: usize,
    max_relative_deviation: f64,
    max_leakage: f64,
    all_within_tolerance: bool,
    rows: Vec<ValidationRow>,
}

fn validation_rows(p: ScenarioParams, dim: usize) -> qillum::Result<Vec<ValidationRow>> {
    let (r0, r1) = receiver_covariances(&p)?;
    [(Hypothesis::Absent, r0), (Hypothesis::Present, r1)]
        .into_iter()
        .map(|(h, cov)| {
            let gauss = count_difference_stats(&cov)?;
            let state = build_oracle_state(&p, h, dim)?;
            let oracle = oracle_count_stats(&state.rho).stats;
            let rel = |g: f64, o: f64| {
                if g == 0.0 {
                    o.abs()
                } else {
                    (g - o).abs() / g.abs()
                }
            };
            let tol = |g: f64| (1e-6 * g.abs()).max(10.0 * state.leakage);
            Ok(ValidationRow {
                n_s: p.n_s,
                n_b: p.n_b,
                kappa: p.kappa,
                gain: p.gain.value(),
                hypothesis: match h {
                    Hypothesis::Absent => "ABSENT",
                    Hypothesis::Present => "PRESENT",
                },
                gaussian_mean: gauss.mean,
                oracle_mean: oracle.mean,
                gaussian_variance: gauss.variance,
                oracle_variance: oracle.variance,
                leakage: state.leakage,
                relative_deviation: rel(gauss.mean, oracle.mean)
                    .max(rel(gauss.variance, oracle.variance)),
                within_tolerance: (gauss.mean - oracle.mean).abs() <= tol(gauss.mean)
                    && (gauss.variance - oracle.variance).abs() <= tol(gauss.variance),
            })
        })
        .collect()
}

fn validate(
    scenario: &ScenarioArgs,
    dim: usize,
    point: bool,
    out: &OutputArgs,
) -> Result<(), Failure> {
    let points = if point {
        vec![scenario.params()?]
    } else {
        let mut grid = Vec::new();
        for n_s in [0.1, 0.5] {
            for n_b in [0.25, 1.0] {
                for kappa in [0.1, 0.5] {
                    for g in [1.0, 2.0] {
                        grid.push(ScenarioParams::new(n_s, n_b, kappa, Gain::linear(g)?, 1)?);
                    }
                }
            }
        }
        grid
    };
    let rows: Vec<ValidationRow> = points
        .par_iter()
        .map(|&p| validation_rows(p, dim))
        .collect::<qillum::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let max_leakage = rows.iter().map(|r| r.leakage).fold(0.0, f64::max);
    if max_leakage > LEAKAGE_WARNING {
        eprintln!(
            "warning: truncation leakage up to {} exceeds {}; increase --dim",
            format_number(max_leakage),
            format_number(LEAKAGE_WARNING)
        );
    }
    let record = ValidationOutput {
        dim,
        max_relative_deviation: rows
            .iter()
            .map(|r| r.relative_deviation)
            .fold(0.0, f64::max),
        max_leakage,
        all_within_tolerance: rows.iter().all(|r| r.within_tolerance),
        rows,
    };
    emit(out, Format::Json, |w, format| match format {
        Format::Json => write_json(w, &record),
        Format::Csv => write_csv(
            w,
            &[
                "n_s",
                "n_b",
                "kappa",
                "gain",
                "hypothesis",
                "gaussian_mean",
                "oracle_mean",
                "gaussian_variance",
                "oracle_variance",
                "leakage",
                "relative_deviation",
                "within_tolerance",
            ],
            &record
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.n_s.into(),
                        r.n_b.into(),
                        r.kappa.into(),
                        r.gain.into(),
                        r.hypothesis.into(),
                        r.gaussian_mean.into(),
                        r.oracle_mean.into(),
                        r.gaussian_variance.into(),
                        r.oracle_variance.into(),
                        r.leakage.into(),
                        r.relative_deviation.into(),
                        r.within_tolerance.into(),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
    })
}

#[derive(Serialize)]
struct SimulationOutput {
    params: ScenarioParams,
    seed: u64,
    estimate: qillum::montecarlo::ErrorEstimate,
    z_score: f64,
}

fn simulate(
    scenario: &ScenarioArgs,
    trials: u64,
    seed: u64,
    out: &OutputArgs,
) -> Result<(), Failure> {
    let params = scenario.params()?;
    let cfg = TrialConfig::new(params, trials, seed)?;
    let estimate = estimate_error_probability(&cfg)?;
    let record = SimulationOutput {
        params,
        seed,
        estimate,
        z_score: estimate.z_score(),
    };
    emit(out, Format::Json, |w, format| match format {
        Format::Json => write_json(w, &record),
        Format::Csv => write_csv(
            w,
            &[
                "trials",
                "seed",
                "p_error",
                "std_error",
                "false_alarms",
                "misses",
                "threshold",
                "analytic_p_error",
                "z_score",
            ],
            &[vec![
                estimate.trials.into(),
                seed.into(),
                estimate.p_error.into(),
                estimate.std_error.into(),
                estimate.false_alarms.into(),
                estimate.misses.into(),
                estimate.threshold.into(),
                estimate.analytic_p_error.into(),
                record.z_score.into(),
            ]],
        ),
    })
}
