//! `abel` — reconstruct radial absorption profiles from line-of-sight data.
//!
//! Subcommands cover the forward projection, both direct inversions, the
//! Tikhonov-regularized solve, signed error estimates, spline smoothing,
//! synthetic phantom generation, and the full tomography pipeline. All data
//! moves through small header-row CSV files; see the repository book for a
//! walk-through.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use abel::error_analysis::{error_recursion, noisy_bounds, refined_solution};
use abel::mesh::Mesh;
use abel::quadrature::{assemble_matrix, forward_apply, KernelKind};
use abel::regularization::{
    choose_alpha, residual_norm, tikhonov_solve, AlphaStatus, RegularizationConfig,
};
use abel::smoothing::fit_spline;
use abel::solvers::{
    estimate_qprime, solve_first, solve_second, DerivativeScheme, EndpointRule, Method,
    SolutionVector, SourceSamples,
};
use abel::synthetic::{add_noise, Phantom};
use abel::tomography::{reconstruct, ReconstructOptions, SmoothingOptions, TomographyInput};

use abel_cli::plot::{emit_plot_data, emit_svg, Series};
use abel_cli::table::{format_value, read_table, write_table, write_table_to, Table};
use abel_cli::CliError;

#[derive(Parser)]
#[command(
    name = "abel",
    version,
    about = "Abel-equation solvers for axisymmetric absorption profiles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Triangular back-substitution.
    First,
    /// Inversion-formula quadrature over q′.
    Second,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::First => Method::First,
            MethodArg::Second => Method::Second,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PhantomArg {
    Constant,
    Parabolic,
    Semicircle,
}

#[derive(Subcommand)]
enum Command {
    /// Project a solution file (r,k) to its source samples (x,q).
    Forward {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write `<output>_plot.{csv,svg}`.
        #[arg(long)]
        plot: bool,
    },
    /// Solve a source file (x,q) for the absorption profile (r,k).
    Invert {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "first")]
        method: MethodArg,
        /// Estimate q′ from a smoothing spline with this parameter
        /// (second method only; default is forward differences).
        #[arg(long)]
        smooth_p: Option<f64>,
        #[arg(long)]
        plot: bool,
    },
    /// Tikhonov-regularized solve with discrepancy-principle α selection.
    Regularize {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Discrepancy level δ; defaults to the norm of the file's
        /// per-node noise levels when a delta column is present.
        #[arg(long)]
        delta: Option<f64>,
        /// Fixed α, skipping the discrepancy search.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        plot: bool,
    },
    /// Signed error estimates and noise-aware bounds for the direct solve.
    Errors {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        plot: bool,
    },
    /// Smooth a two-column table with a cubic spline and resample it.
    Smooth {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0.99)]
        smooth_p: f64,
        /// Node count of the resampled output (default: keep the input count).
        #[arg(long)]
        resample_n: Option<usize>,
        #[arg(long)]
        plot: bool,
    },
    /// Generate a phantom's source file `x,q[,delta]` and optionally its
    /// exact profile (r,k).
    Synthetic {
        #[arg(long, value_enum)]
        phantom: PhantomArg,
        #[arg(long, default_value_t = 1.0)]
        k0: f64,
        #[arg(long = "R", default_value_t = 1.0)]
        radius: f64,
        /// Node count of the uniform mesh.
        #[arg(long, default_value_t = 11)]
        n: usize,
        /// Relative noise level σ (multiplicative Gaussian).
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the exact profile to this solution file.
        #[arg(long)]
        out_k: Option<PathBuf>,
        #[arg(long)]
        plot: bool,
    },
    /// Full pipeline: intensities (x,I) to an absorption profile (r,k).
    Tomo {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Reference intensity B of the ray source.
        #[arg(long)]
        planck_b: f64,
        /// Source temperature in °C (metadata only).
        #[arg(long)]
        t0: Option<f64>,
        /// Smooth the intensities with this spline parameter before solving.
        #[arg(long)]
        smooth_p: Option<f64>,
        /// Resample the smoothed intensities onto this many nodes.
        #[arg(long)]
        resample_n: Option<usize>,
        #[arg(long, value_enum, default_value = "first")]
        method: MethodArg,
        /// Run a Tikhonov pass with δ chosen by the discrepancy principle.
        #[arg(long)]
        delta: Option<f64>,
        /// Run a Tikhonov pass with this fixed α.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        plot: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Forward {
            input,
            output,
            plot,
        } => cmd_forward(&input, &output, plot),
        Command::Invert {
            input,
            output,
            method,
            smooth_p,
            plot,
        } => cmd_invert(&input, &output, method.into(), smooth_p, plot),
        Command::Regularize {
            input,
            output,
            delta,
            alpha,
            plot,
        } => cmd_regularize(&input, &output, delta, alpha, plot),
        Command::Errors {
            input,
            output,
            plot,
        } => cmd_errors(&input, &output, plot),
        Command::Smooth {
            input,
            output,
            smooth_p,
            resample_n,
            plot,
        } => cmd_smooth(&input, &output, smooth_p, resample_n, plot),
        Command::Synthetic {
            phantom,
            k0,
            radius,
            n,
            noise,
            seed,
            output,
            out_k,
            plot,
        } => cmd_synthetic(phantom, k0, radius, n, noise, seed, &output, &out_k, plot),
        Command::Tomo {
            input,
            output,
            planck_b,
            t0,
            smooth_p,
            resample_n,
            method,
            delta,
            alpha,
            plot,
        } => cmd_tomo(
            &input,
            &output,
            planck_b,
            t0,
            smooth_p,
            resample_n,
            method.into(),
            delta,
            alpha,
            plot,
        ),
    }
}

fn require_column<'t>(table: &'t Table, path: &Path, name: &str) -> Result<&'t [f64], CliError> {
    table.column(name).ok_or_else(|| CliError::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: format!("missing column {name:?}"),
    })
}

fn read_source(path: &Path) -> Result<(Mesh, SourceSamples), CliError> {
    let table = read_table(path)?;
    let x = require_column(&table, path, "x")?;
    let q = require_column(&table, path, "q")?;
    let mesh = Mesh::from_nodes(x.to_vec())?;
    let samples = match table.column("delta") {
        Some(deltas) => SourceSamples::with_noise_levels(q.to_vec(), deltas.to_vec())?,
        None => SourceSamples::new(q.to_vec())?,
    };
    Ok((mesh, samples))
}

fn write_output(output: &Option<PathBuf>, table: &Table) -> Result<(), CliError> {
    match output {
        Some(path) => write_table(path, table),
        None => write_table_to(&mut std::io::stdout().lock(), table),
    }
}

fn maybe_plot(plot: bool, output: &Option<PathBuf>, series: &[Series]) -> Result<(), CliError> {
    if !plot {
        return Ok(());
    }
    let output = output.as_ref().ok_or_else(|| {
        CliError::Usage("--plot needs --output to derive the plot file names".into())
    })?;
    let base = output.with_extension("");
    let base = base.to_string_lossy();
    emit_plot_data(series, &PathBuf::from(format!("{base}_plot.csv")))?;
    emit_svg(series, &PathBuf::from(format!("{base}_plot.svg")))
}

fn status_name(status: AlphaStatus) -> &'static str {
    match status {
        AlphaStatus::Converged => "converged",
        AlphaStatus::DeltaUnreachableLow => "delta-unreachable-low",
        AlphaStatus::DeltaUnreachableHigh => "delta-unreachable-high",
        AlphaStatus::MaxIterations => "max-iterations",
    }
}

fn cmd_forward(input: &Path, output: &Option<PathBuf>, plot: bool) -> Result<(), CliError> {
    let table = read_table(input)?;
    let r = require_column(&table, input, "r")?;
    let k = require_column(&table, input, "k")?;
    let mesh = Mesh::from_nodes(r.to_vec())?;
    let solution = SolutionVector::new(k.to_vec(), EndpointRule::ExtrapolateLinear);
    let q = forward_apply(&mesh, &solution)?;
    let out = Table::new(
        vec!["x".into(), "q".into()],
        vec![mesh.nodes().to_vec(), q.values().to_vec()],
    );
    write_output(output, &out)?;
    maybe_plot(plot, output, &[Series::new("q", mesh.nodes(), q.values())])
}

fn cmd_invert(
    input: &Path,
    output: &Option<PathBuf>,
    method: Method,
    smooth_p: Option<f64>,
    plot: bool,
) -> Result<(), CliError> {
    let (mesh, q) = read_source(input)?;
    let k = match method {
        Method::First => solve_first(&mesh, &q, EndpointRule::ExtrapolateLinear)?,
        Method::Second => {
            let scheme = match smooth_p {
                Some(p) => DerivativeScheme::SplineDerivative { p },
                None => DerivativeScheme::ForwardDifference,
            };
            let dq = estimate_qprime(&mesh, &q, scheme)?;
            solve_second(&mesh, &q, &dq, EndpointRule::ExtrapolateLinear)?
        }
    };
    let out = Table::new(
        vec!["r".into(), "k".into()],
        vec![mesh.nodes().to_vec(), k.values().to_vec()],
    );
    write_output(output, &out)?;
    maybe_plot(plot, output, &[Series::new("k", mesh.nodes(), k.values())])
}

fn cmd_regularize(
    input: &Path,
    output: &Option<PathBuf>,
    delta: Option<f64>,
    alpha: Option<f64>,
    plot: bool,
) -> Result<(), CliError> {
    let (mesh, q) = read_source(input)?;
    let n = mesh.len();
    let a = assemble_matrix(&mesh, KernelKind::Sqrt)?;
    let f = DVector::from_iterator(n - 1, q.values().iter().take(n - 1).map(|&v| v / 2.0));

    let mut diagnostics = Vec::new();
    let alpha = match (alpha, delta) {
        (Some(alpha), _) => alpha,
        (None, delta) => {
            let delta = match delta {
                Some(d) => d,
                None => match q.noise_levels() {
                    // f = q/2, so per-node levels contribute δ_i/2 each
                    Some(levels) => (0..n - 1)
                        .map(|i| (levels[i] / 2.0) * (levels[i] / 2.0))
                        .sum::<f64>()
                        .sqrt(),
                    None => {
                        return Err(CliError::Usage(
                            "regularize needs --alpha, --delta, or a delta column".into(),
                        ))
                    }
                },
            };
            let choice = choose_alpha(a.entries(), &f, &RegularizationConfig::new(delta))?;
            diagnostics.push(format!("delta = {}", format_value(delta)));
            diagnostics.push(format!("status = {}", status_name(choice.status)));
            diagnostics.push(format!("iterations = {}", choice.iterations));
            choice.alpha
        }
    };
    let k_alpha = tikhonov_solve(a.entries(), &f, alpha)?;
    let solution = EndpointRule::ExtrapolateLinear.complete(&mesh, k_alpha.as_slice().to_vec());
    let residual = residual_norm(
        a.entries(),
        &DVector::from_column_slice(&solution.values()[..n - 1]),
        &f,
    )?;

    let out = Table::new(
        vec!["r".into(), "k".into(), "alpha".into()],
        vec![
            mesh.nodes().to_vec(),
            solution.values().to_vec(),
            vec![alpha; n],
        ],
    );
    write_output(output, &out)?;
    println!("alpha = {}", format_value(alpha));
    println!("residual = {}", format_value(residual));
    for line in diagnostics {
        println!("{line}");
    }

    let direct = solve_first(&mesh, &q, EndpointRule::ExtrapolateLinear)?;
    maybe_plot(
        plot,
        output,
        &[
            Series::new("k", mesh.nodes(), direct.values()),
            Series::new("k_alpha", mesh.nodes(), solution.values()),
        ],
    )
}

fn cmd_errors(input: &Path, output: &Option<PathBuf>, plot: bool) -> Result<(), CliError> {
    let (mesh, q) = read_source(input)?;
    let n = mesh.len();
    let k = solve_first(&mesh, &q, EndpointRule::ExtrapolateLinear)?;
    let estimate = error_recursion(&mesh, &k)?;
    let deltas = q
        .noise_levels()
        .map(<[f64]>::to_vec)
        .unwrap_or_else(|| vec![0.0; n]);
    let bounds = noisy_bounds(&mesh, &estimate, &deltas)?;
    let out = Table::new(
        vec!["r".into(), "k".into(), "dk".into(), "bound".into()],
        vec![
            mesh.nodes().to_vec(),
            k.values().to_vec(),
            estimate.node_errors().to_vec(),
            bounds,
        ],
    );
    write_output(output, &out)?;
    let refined = refined_solution(&k, &estimate)?;
    maybe_plot(
        plot,
        output,
        &[
            Series::new("k", mesh.nodes(), k.values()),
            Series::new("k_refined", mesh.nodes(), refined.values()),
        ],
    )
}

fn cmd_smooth(
    input: &Path,
    output: &Option<PathBuf>,
    smooth_p: f64,
    resample_n: Option<usize>,
    plot: bool,
) -> Result<(), CliError> {
    let table = read_table(input)?;
    if table.headers.len() < 2 {
        return Err(CliError::Parse {
            path: input.to_path_buf(),
            line: 1,
            message: "smooth needs an abscissa column and a value column".into(),
        });
    }
    let xs = &table.columns[0];
    let ys = &table.columns[1];
    let spline = fit_spline(xs, ys, smooth_p)?;
    let n_out = resample_n.unwrap_or(xs.len());
    if n_out < 2 {
        return Err(CliError::Usage(format!(
            "--resample-n must be at least 2, got {n_out}"
        )));
    }
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let new_x: Vec<f64> = (0..n_out)
        .map(|i| lo + (hi - lo) * i as f64 / (n_out - 1) as f64)
        .collect();
    let new_y = new_x
        .iter()
        .map(|&x| spline.eval(x))
        .collect::<abel::Result<Vec<f64>>>()?;
    let out = Table::new(
        table.headers[..2].to_vec(),
        vec![new_x.clone(), new_y.clone()],
    );
    write_output(output, &out)?;
    maybe_plot(
        plot,
        output,
        &[Series::new(table.headers[1].clone(), &new_x, &new_y)],
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_synthetic(
    phantom: PhantomArg,
    k0: f64,
    radius: f64,
    n: usize,
    noise: f64,
    seed: u64,
    output: &Option<PathBuf>,
    out_k: &Option<PathBuf>,
    plot: bool,
) -> Result<(), CliError> {
    let phantom = match phantom {
        PhantomArg::Constant => Phantom::Constant { k0, radius },
        PhantomArg::Parabolic => Phantom::Parabolic { k0, radius },
        PhantomArg::Semicircle => Phantom::Semicircle { radius },
    };
    let mesh = Mesh::uniform(n, radius)?;
    let clean: Vec<f64> = mesh
        .nodes()
        .iter()
        .map(|&x| phantom.q(x))
        .collect::<abel::Result<_>>()?;
    let clean = SourceSamples::new(clean)?;

    let (samples, noise_norm) = if noise > 0.0 {
        let noisy = add_noise(&clean, noise, seed)?;
        let norm = (0..n - 1)
            .map(|i| {
                let d = (noisy.values()[i] - clean.values()[i]) / 2.0;
                d * d
            })
            .sum::<f64>()
            .sqrt();
        (noisy, Some(norm))
    } else {
        (clean, None)
    };

    let mut headers = vec!["x".into(), "q".into()];
    let mut columns = vec![mesh.nodes().to_vec(), samples.values().to_vec()];
    if let Some(levels) = samples.noise_levels() {
        headers.push("delta".into());
        columns.push(levels.to_vec());
    }
    write_output(output, &Table::new(headers, columns))?;
    if let Some(norm) = noise_norm {
        // the discrepancy level of this realization on the f = q/2 scale
        println!("delta = {}", format_value(norm));
    }

    if let Some(path) = out_k {
        let k: Vec<f64> = mesh
            .nodes()
            .iter()
            .map(|&r| phantom.k(r))
            .collect::<abel::Result<_>>()?;
        write_table(
            path,
            &Table::new(vec!["r".into(), "k".into()], vec![mesh.nodes().to_vec(), k]),
        )?;
    }
    maybe_plot(
        plot,
        output,
        &[Series::new("q", mesh.nodes(), samples.values())],
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_tomo(
    input: &Path,
    output: &Option<PathBuf>,
    planck_b: f64,
    t0: Option<f64>,
    smooth_p: Option<f64>,
    resample_n: Option<usize>,
    method: Method,
    delta: Option<f64>,
    alpha: Option<f64>,
    plot: bool,
) -> Result<(), CliError> {
    let table = read_table(input)?;
    let x = require_column(&table, input, "x")?;
    let intensities = require_column(&table, input, "I")?;
    let mesh = Mesh::from_nodes(x.to_vec())?;
    let mut input_data = TomographyInput::new(intensities.to_vec(), planck_b)?;
    if let Some(t0) = t0 {
        input_data = input_data.with_source_temperature(t0);
    }

    let smooth = match (smooth_p, resample_n) {
        (None, None) => None,
        (p, n) => Some(SmoothingOptions {
            p: p.unwrap_or(0.99),
            resample_n: n.unwrap_or(mesh.len()),
        }),
    };
    let regularization = match (alpha, delta) {
        (Some(a), _) => Some(RegularizationConfig::fixed_alpha(a)),
        (None, Some(d)) => Some(RegularizationConfig::new(d)),
        (None, None) => None,
    };
    let options = ReconstructOptions {
        smooth,
        method,
        regularization,
        ..Default::default()
    };
    let rec = reconstruct(&input_data, &mesh, &options)?;

    let mut headers = vec!["r".into(), "k".into()];
    let mut columns = vec![rec.mesh.nodes().to_vec(), rec.solution.values().to_vec()];
    if let Some(estimate) = &rec.error_estimate {
        headers.push("dk".into());
        columns.push(estimate.node_errors().to_vec());
    }
    write_output(output, &Table::new(headers, columns))?;

    println!("residual = {}", format_value(rec.residual));
    if let Some(alpha) = rec.alpha {
        println!("alpha = {}", format_value(alpha));
    }
    if let Some(status) = rec.alpha_status {
        println!("status = {}", status_name(status));
    }

    let mut series = Vec::new();
    if let Some(direct) = &rec.unregularized {
        series.push(Series::new("k", rec.mesh.nodes(), direct.values()));
        series.push(Series::new(
            "k_alpha",
            rec.mesh.nodes(),
            rec.solution.values(),
        ));
    } else {
        series.push(Series::new("k", rec.mesh.nodes(), rec.solution.values()));
    }
    maybe_plot(plot, output, &series)
}
