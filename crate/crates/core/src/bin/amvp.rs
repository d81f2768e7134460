use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use amvp_core::amvp::{fit_ladder, ladder_radii, rung_ladder, DecayOutcome};
use amvp_core::crosscheck::{compare_fields, minimize_energy, GridProblem};
use amvp_core::harness::config::parse_coefficient;
use amvp_core::harness::output::{load_report, series_label};
use amvp_core::harness::{emit_outputs, run_campaign, CampaignConfig, Status};
use amvp_core::hodograph::HodographModel;
use amvp_core::pharmonic::eval_u;
use amvp_core::spectral::{amvp_weights, epsilon_margin, exponent_ratio, spectral_triple, ProblemParams};
use amvp_core::{Error, Result};

/// p-harmonic functions from hodographic power series, and checks of their
/// asymptotic mean value property.
#[derive(Parser)]
#[command(name = "amvp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the spectral table for (p, n).
    Coeffs {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n: u32,
        /// Number of indices after n.
        #[arg(long, default_value_t = 8)]
        count: u32,
    },
    /// Run the full verification campaign and write the report files.
    Verify(ModelArgs),
    /// Residual ladder at one point for one weight.
    Amvp {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        #[arg(long, default_value_t = 0.0)]
        y: f64,
        /// Weight on the midrange; defaults to (p-2)/(p+2).
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Solve the discrete p-Dirichlet problem with boundary data from u.
    Crosscheck {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        cells: Option<usize>,
    },
    /// Re-render the report files from a saved report.json.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    /// Coefficient as k:re:im; repeat for several. Replaces the configured list.
    #[arg(long = "coeff")]
    coeffs: Vec<String>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<CampaignConfig> {
        let mut config = match &self.config {
            Some(path) => CampaignConfig::load(path)?,
            None => {
                let (Some(p), Some(n)) = (self.p, self.n) else {
                    return Err(Error::Config("give --config or both --p and --n".into()));
                };
                let mut c = CampaignConfig::new(p, n, Vec::new());
                c.coefficients.push((n + 1, 1.0, 0.0));
                c
            }
        };
        if let Some(p) = self.p {
            config.p = p;
        }
        if let Some(n) = self.n {
            config.n = n;
        }
        if !self.coeffs.is_empty() {
            config.coefficients = self
                .coeffs
                .iter()
                .map(|c| parse_coefficient(c))
                .collect::<Result<_>>()?;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.output = out.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

fn coeffs(p: f64, n: u32, count: u32) -> Result<bool> {
    let params = ProblemParams::new(p, n)?;
    println!("k,lambda,epsilon,mu");
    for k in n + 1..=n + count {
        let t = spectral_triple(params, k)?;
        println!("{k},{},{},{}", t.lambda, t.epsilon, t.mu);
    }
    let (a, b) = amvp_weights(p);
    println!("exponent ratio {}", exponent_ratio(params));
    println!("epsilon margin {}", epsilon_margin(params));
    println!("weights midrange {a} mean {b}");
    Ok(true)
}

fn verify(args: &ModelArgs) -> Result<bool> {
    let config = args.resolve()?;
    let report = run_campaign(&config);
    for r in &report.records {
        let status = if r.passed() { "pass" } else { "FAIL" };
        let measured = r.measured.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
        let threshold = r.threshold.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
        println!(
            "{status:4}  {:32} measured {measured:>14}  threshold {threshold:>14}",
            r.name
        );
    }
    for s in &report.critical {
        println!("critical point: {}", series_label(s));
    }
    emit_outputs(&report, &config.output)?;
    println!("wrote {}", config.output.display());
    Ok(report.overall == Status::Pass)
}

fn scan(args: &ModelArgs, x: f64, y: f64, alpha: Option<f64>) -> Result<bool> {
    let config = args.resolve()?;
    let model = HodographModel::new(config.coefficient_set()?)?;
    let center = Complex64::new(x, y);
    let pr = model.plane_radius();
    let available = if center.norm() == 0.0 {
        pr
    } else {
        center.norm().min(pr - center.norm())
    };
    if available <= 0.0 {
        return Err(Error::OutsideRegion {
            r: center.norm(),
            limit: pr,
        });
    }
    let alpha = alpha.unwrap_or(amvp_weights(config.p).0);
    let radii = ladder_radii(config.ladder.r0_fraction * available, config.ladder.rungs);
    let rungs = rung_ladder(|z| eval_u(&model, z), center, &radii, config.ladder.resolution)?;
    println!("r,residual");
    for r in &rungs {
        println!("{},{}", r.radius(), r.residual(alpha));
    }
    match fit_ladder(&rungs, alpha)? {
        DecayOutcome::Fitted(f) => println!("slope {} (r^2 {})", f.slope, f.r_squared),
        DecayOutcome::Vanishing { .. } => println!("residual at rounding level"),
    }
    Ok(true)
}

fn crosscheck(args: &ModelArgs, cells: Option<usize>) -> Result<bool> {
    let config = args.resolve()?;
    let model = HodographModel::new(config.coefficient_set()?)?;
    let cc = &config.crosscheck;
    let pr = model.plane_radius();
    let cells = cells.unwrap_or(cc.cells[cc.cells.len() - 1]);
    let problem = GridProblem::from_model(
        &model,
        Complex64::new(cc.center.0, cc.center.1) * pr,
        cc.half_width * pr,
        cells,
        config.p,
    )?;
    let solution = minimize_energy(&problem, config.tolerances.solver_tol, cc.max_iters)?;
    println!("cells {cells}");
    println!("iterations {}", solution.iterations);
    println!("energy {}", solution.energy);
    println!(
        "gradient norm {} (initial {})",
        solution.grad_norm, solution.initial_grad_norm
    );
    println!("max interior error {}", compare_fields(&solution, &model)?);
    Ok(true)
}

fn rerender(input: &Path, out: Option<&PathBuf>) -> Result<bool> {
    let report = load_report(input)?;
    let dir = out
        .cloned()
        .or_else(|| input.parent().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    emit_outputs(&report, &dir)?;
    println!("wrote {}", dir.display());
    Ok(report.overall == Status::Pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Coeffs { p, n, count } => coeffs(*p, *n, *count),
        Command::Verify(args) => verify(args),
        Command::Amvp { model, x, y, alpha } => scan(model, *x, *y, *alpha),
        Command::Crosscheck { model, cells } => crosscheck(model, *cells),
        Command::Report { input, out } => rerender(input, out.as_ref()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
