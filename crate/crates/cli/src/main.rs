//! `bcfkit`: fit spectral densities with simple-pole families,
//! decompose bath correlation functions into decaying exponentials,
//! and emit lineshapes, absorption spectra and coth-expansion tables
//! as CSV/JSON plot data.

mod errors;
mod manifest;
mod output;

use bcfkit::bcf::{decompose, exact_bcf_grid};
use bcfkit::cothexp::{CothExpansion, CothScheme};
use bcfkit::fitting::{fit_sd, target_samples, FitConfig, FitTarget};
use bcfkit::grid::logspace;
use bcfkit::lineshape::{g_from_exponential, g_from_sd_quadrature, LineshapeSeries};
use bcfkit::specdens::{FitSDModel, ReferenceSD, SpectralDensity};
use bcfkit::special::coth_real;
use bcfkit::spectra::{absorption, compare_spectra, FftConfig, Spectrum, Window};
use bcfkit::units::time_to_fs;
use clap::{Args, Parser, Subcommand, ValueEnum};
use errors::{io_context, CliError, CliResult};
use manifest::RunManifest;
use output::{read_json, write_csv, write_json};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "bcfkit",
    version,
    about = "Spectral-density fits and exponential bath correlation functions",
    after_help = "Units: frequencies in cm^-1, temperatures in Kelvin; the internal time \
                  variable multiplies cm^-1 to give phases, 1 unit = 5308.8375 fs.\n\
                  BCFKIT_THREADS caps internal parallelism."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a pole-family model to a reference or tabulated spectral density.
    Fit(FitArgs),
    /// Decompose a model's bath correlation function into exponentials.
    Decompose(DecomposeArgs),
    /// Compute an absorption spectrum from a model fit or, exactly, from a reference density.
    Spectrum(SpectrumArgs),
    /// Tabulate a coth pole expansion and its error against exact coth.
    Coth(CothArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Pade,
    Matsubara,
    Zero,
    CroySaalmann,
}

impl From<SchemeArg> for CothScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Pade => CothScheme::Pade,
            SchemeArg::Matsubara => CothScheme::Matsubara,
            SchemeArg::Zero => CothScheme::ZeroTemperature,
            SchemeArg::CroySaalmann => CothScheme::CroySaalmann,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowArg {
    None,
    Hann,
}

impl From<WindowArg> for Window {
    fn from(w: WindowArg) -> Self {
        match w {
            WindowArg::None => Window::None,
            WindowArg::Hann => Window::Hann,
        }
    }
}

#[derive(Args)]
struct FitArgs {
    /// Target spectral density JSON (reference form or {"kind":"table",...}).
    #[arg(long)]
    target: PathBuf,
    /// Fit configuration JSON.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Pole-family model JSON ({"n":..,"terms":[...]}).
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "temp-kelvin")]
    temp_kelvin: f64,
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// Expansion order (ignored for the zero scheme).
    #[arg(long = "L", default_value_t = 0)]
    expansion_order: usize,
    /// Also evaluate the quadrature oracle on the time grid (slow).
    #[arg(long)]
    oracle: bool,
    /// Time grid end (internal units; 0.2 ≈ 1 ps).
    #[arg(long, default_value_t = 0.2)]
    t_max: f64,
    #[arg(long, default_value_t = 400)]
    t_points: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Pole-family model JSON; the spectrum comes from its analytic
    /// exponential decomposition (needs --scheme/--L).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Reference density JSON; with --exact the spectrum comes from
    /// brute-force quadrature of the lineshape integral.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long = "temp-kelvin")]
    temp_kelvin: f64,
    #[arg(long, value_enum, default_value = "pade")]
    scheme: SchemeArg,
    #[arg(long = "L")]
    expansion_order: Option<usize>,
    /// Confirm the slow exact-quadrature route for --target.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    n_points: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    /// Artificial Lorentzian broadening HWHM in cm^-1
    /// (default: 1 at T = 0, else 0).
    #[arg(long)]
    gamma_add: Option<f64>,
    #[arg(long, value_enum, default_value = "none")]
    window: WindowArg,
    /// Output crop of the frequency axis.
    #[arg(long, default_value_t = -500.0, allow_negative_numbers = true)]
    omega_min: f64,
    #[arg(long, default_value_t = 5000.0, allow_negative_numbers = true)]
    omega_max: f64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CothArgs {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    #[arg(long = "L", default_value_t = 0)]
    expansion_order: usize,
    /// Argument range for the error sweep.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.1, 10.0])]
    range: Vec<f64>,
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Coth(args) => cmd_coth(args),
    }
}

fn ensure_out_dir(dir: &Path) -> CliResult<()> {
    io_context(&format!("creating {}", dir.display()), std::fs::create_dir_all(dir))
}

fn build_expansion(scheme: SchemeArg, order: usize) -> CliResult<CothExpansion> {
    if scheme != SchemeArg::Zero && order == 0 {
        return Err(CliError::Usage(format!(
            "--scheme {} needs --L >= 1",
            match scheme {
                SchemeArg::Pade => "pade",
                SchemeArg::Matsubara => "matsubara",
                SchemeArg::CroySaalmann => "croy-saalmann",
                SchemeArg::Zero => unreachable!(),
            }
        )));
    }
    Ok(CothExpansion::build(scheme.into(), order)?)
}

// ---------------------------------------------------------------- fit

#[derive(Serialize)]
struct FitResultOut {
    model: FitSDModel,
    residual_j: f64,
    residual_jw2: f64,
    iterations: usize,
    converged: bool,
}

fn cmd_fit(args: FitArgs) -> CliResult<()> {
    let target: FitTarget = read_json(&args.target)?;
    let config: FitConfig = read_json(&args.config)?;
    config.validate()?;
    ensure_out_dir(&args.out_dir)?;
    RunManifest::new("fit", &[&args.target, &args.config], Some(config.seed))?
        .write(&args.out_dir)?;

    let samples = target_samples(&target, &config)?;
    let result = fit_sd(&target, &config)?;
    if !result.converged {
        log::warn!(
            "no multistart met the tolerance after {} iterations; writing the best model found",
            result.iterations
        );
    }

    let rows = samples.iter().map(|&(w, j_t)| {
        let j_fit = result.model.evaluate(w);
        vec![w, j_t, j_fit, j_fit - j_t]
    });
    write_csv(&args.out_dir.join("fit_overlay.csv"), &["omega_invcm", "target", "fit", "diff"], rows)?;
    write_json(
        &args.out_dir.join("fit_result.json"),
        &FitResultOut {
            model: result.model,
            residual_j: result.residual_j,
            residual_jw2: result.residual_jw2,
            iterations: result.iterations,
            converged: result.converged,
        },
    )?;
    Ok(())
}

// ---------------------------------------------------------- decompose

fn cmd_decompose(args: DecomposeArgs) -> CliResult<()> {
    let model: FitSDModel = read_json(&args.model)?;
    let expansion = build_expansion(args.scheme, args.expansion_order)?;
    if args.t_points < 2 || args.t_max.is_nan() || args.t_max <= 0.0 {
        return Err(CliError::Usage("need --t-points >= 2 and --t-max > 0".into()));
    }
    ensure_out_dir(&args.out_dir)?;
    RunManifest::new("decompose", &[&args.model], None)?.write(&args.out_dir)?;

    let bcf = decompose(&model, &expansion, args.temp_kelvin)?;
    let bcf_value: serde_json::Value =
        serde_json::from_str(&bcf.to_json()).expect("round trip of own output");
    write_json(&args.out_dir.join("bcf.json"), &bcf_value)?;

    let ts: Vec<f64> = (0..args.t_points)
        .map(|i| args.t_max * i as f64 / (args.t_points - 1) as f64)
        .collect();
    let approx: Vec<_> = ts.iter().map(|&t| bcf.evaluate(t).expect("t >= 0")).collect();
    if args.oracle {
        let exact = exact_bcf_grid(&model, args.temp_kelvin, &ts)?;
        let rows = ts.iter().zip(&approx).zip(&exact).map(|((&t, a), e)| {
            vec![t, time_to_fs(t), a.re, a.im, e.re, e.im, (a - e).norm()]
        });
        write_csv(
            &args.out_dir.join("bcf.csv"),
            &["t_invcm", "t_fs", "re_alpha", "im_alpha", "re_exact", "im_exact", "abs_err"],
            rows,
        )?;
    } else {
        let rows = ts
            .iter()
            .zip(&approx)
            .map(|(&t, a)| vec![t, time_to_fs(t), a.re, a.im]);
        write_csv(
            &args.out_dir.join("bcf.csv"),
            &["t_invcm", "t_fs", "re_alpha", "im_alpha"],
            rows,
        )?;
    }
    Ok(())
}

// ----------------------------------------------------------- spectrum

#[derive(Serialize)]
struct SpectrumMeta {
    dt: f64,
    n_points: usize,
    gamma_add: f64,
    area: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_weight: Option<f64>,
    temp_kelvin: f64,
    negative_excursions: bool,
}

fn write_spectrum(
    out_dir: &Path,
    stem: &str,
    spectrum: &Spectrum,
    fft: &FftConfig,
    temp_kelvin: f64,
    crop: (f64, f64),
) -> CliResult<()> {
    let rows = spectrum
        .omega_grid()
        .iter()
        .zip(spectrum.values())
        .filter(|(w, _)| **w >= crop.0 && **w <= crop.1)
        .map(|(&w, &a)| vec![w, a]);
    write_csv(&out_dir.join(format!("{stem}.csv")), &["omega_invcm", "A"], rows)?;
    write_json(
        &out_dir.join(format!("{stem}.json")),
        &SpectrumMeta {
            dt: fft.dt,
            n_points: fft.n_points,
            gamma_add: fft.gamma_add,
            area: spectrum.area(),
            delta_weight: spectrum.delta_weight(),
            temp_kelvin,
            negative_excursions: spectrum.has_negative_excursions(),
        },
    )
}

fn cmd_spectrum(args: SpectrumArgs) -> CliResult<()> {
    if args.model.is_none() && args.target.is_none() {
        return Err(CliError::Usage("pass --model and/or --target".into()));
    }
    if args.target.is_some() && !args.exact {
        return Err(CliError::Usage(
            "reference targets are evaluated by (slow) lineshape quadrature; pass --exact to \
             confirm, or fit the target first and pass the model"
                .into(),
        ));
    }
    let model: Option<FitSDModel> = args.model.as_deref().map(read_json).transpose()?;
    let target: Option<ReferenceSD> = args.target.as_deref().map(read_json).transpose()?;
    if let Some(sd) = &target {
        sd.validate()?;
    }

    let inputs: Vec<&Path> = args
        .model
        .as_deref()
        .into_iter()
        .chain(args.target.as_deref())
        .collect();
    ensure_out_dir(&args.out_dir)?;
    RunManifest::new("spectrum", &inputs, None)?.write(&args.out_dir)?;

    // Transform defaults follow the sharpest feature present.
    let feature = model
        .as_ref()
        .map(|m| {
            m.terms()
                .iter()
                .flat_map(|t| t.poles().iter())
                .map(|p| p.norm())
                .fold(1.0, f64::max)
        })
        .into_iter()
        .chain(target.as_ref().map(|sd| sd.frequency_scale()))
        .fold(1.0, f64::max);
    let mut fft = FftConfig::for_max_feature(feature);
    if let Some(n) = args.n_points {
        fft.n_points = n;
    }
    if let Some(dt) = args.dt {
        fft.dt = dt;
    }
    fft.gamma_add = args
        .gamma_add
        .unwrap_or(if args.temp_kelvin == 0.0 { 1.0 } else { 0.0 });
    fft.window = args.window.into();
    let crop = (args.omega_min, args.omega_max);
    let t_grid = fft.time_grid();

    let mut fit_spectrum = None;
    if let Some(model) = &model {
        let order = args.expansion_order.ok_or_else(|| {
            CliError::Usage("--model needs --L (coth expansion order)".into())
        })?;
        let expansion = build_expansion(args.scheme, order)?;
        let bcf = decompose(model, &expansion, args.temp_kelvin)?;
        let g = g_from_exponential(&bcf, &t_grid);
        let spectrum = absorption(&g, &fft)?;
        write_spectrum(&args.out_dir, "spectrum_fit", &spectrum, &fft, args.temp_kelvin, crop)?;
        fit_spectrum = Some(spectrum);
    }

    let mut exact_spectrum = None;
    if let Some(sd) = &target {
        let g: LineshapeSeries = g_from_sd_quadrature(sd, args.temp_kelvin, &t_grid)?;
        let spectrum = absorption(&g, &fft)?;
        write_spectrum(&args.out_dir, "spectrum_exact", &spectrum, &fft, args.temp_kelvin, crop)?;
        exact_spectrum = Some(spectrum);
    }

    if let (Some(exact), Some(fit)) = (&exact_spectrum, &fit_spectrum) {
        let distance = compare_spectra(exact, fit);
        write_json(&args.out_dir.join("compare.json"), &distance)?;
    }
    Ok(())
}

// --------------------------------------------------------------- coth

fn cmd_coth(args: CothArgs) -> CliResult<()> {
    let expansion = build_expansion(args.scheme, args.expansion_order)?;
    let (lo, hi) = (args.range[0], args.range[1]);
    if !(0.0 < lo && lo < hi) {
        return Err(CliError::Usage("--range needs 0 < LO < HI".into()));
    }
    ensure_out_dir(&args.out_dir)?;
    RunManifest::new("coth", &[], None)?.write(&args.out_dir)?;

    let rows = expansion
        .terms()
        .iter()
        .enumerate()
        .map(|(i, t)| vec![(i + 1) as f64, t.pole.im, t.residue]);
    write_csv(&args.out_dir.join("expansion.csv"), &["ell", "im_xi", "eta"], rows)?;

    let sweep = logspace(lo, hi, 2000).into_iter().map(|x| {
        let exact = coth_real(x);
        let approx = expansion.evaluate_real(x).expect("positive real axis is pole free");
        vec![x, exact, approx, ((approx - exact) / exact).abs()]
    });
    write_csv(
        &args.out_dir.join("error_sweep.csv"),
        &["x", "exact", "approx", "rel_err"],
        sweep,
    )?;
    Ok(())
}
