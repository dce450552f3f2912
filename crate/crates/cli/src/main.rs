#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;
mod presets;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "tractdyn", version, about = "Direct tracts, growth and escaping dynamics of meromorphic functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify the pixels of a window by orbit behaviour and write an image.
    Render(RenderArgs),
    /// Growth profile B(r), a(r) on log-spaced circles.
    Growth(GrowthArgs),
    /// Wiman-Valiron check at one radius or a sweep of radii.
    WvCheck(WvArgs),
    /// Order bound for an algebraic differential equation.
    OdeBound(OdeArgs),
    /// Outer sequence of a region under the tract map.
    OuterSeq(OuterArgs),
    /// Locate a tract and report its verdicts.
    TractInfo(TractArgs),
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct ModelArgs {
    /// exp, expexp, example1, gamma, gamma_shift1 or gamma_cos; exp when
    /// omitted outside presets.
    #[arg(long)]
    pub model: Option<String>,
    /// Parameter of example1.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Tract threshold; the model default when omitted.
    #[arg(long = "R")]
    pub threshold: Option<f64>,
    /// Tract seed `re,im`; the model default when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub seed: Option<String>,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct Common {
    /// Output directory.
    #[arg(short = 'o', long = "out", default_value = "tractdyn-out")]
    pub out: PathBuf,
    /// Worker threads; hardware parallelism when omitted.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct RenderArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// fig1-left, fig1-mid, fig1-right, fig2-left, fig2-mid or fig2-right.
    #[arg(long)]
    pub preset: Option<String>,
    /// `re_min,re_max,im_min,im_max`
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// `WIDTHxHEIGHT`
    #[arg(long)]
    pub res: Option<String>,
    /// fig1 or fig2.
    #[arg(long)]
    pub palette: Option<String>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Enables the fast-escaping class with this rho.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Also write image.png.
    #[arg(long)]
    pub png: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct GrowthArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub rmin: f64,
    #[arg(long)]
    pub rmax: f64,
    /// Epsilon of the a(r) <= B(r)^(1+eps) check.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Parameters of the exceptional-radius scan.
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct WvArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Single radius.
    #[arg(long)]
    pub r: Option<f64>,
    /// Sweep range, used when `--r` is omitted.
    #[arg(long)]
    pub rmin: Option<f64>,
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Sweep spacing in log r.
    #[arg(long, default_value_t = 0.1)]
    pub log_step: f64,
    #[arg(long, default_value_t = 0.75)]
    pub tau: f64,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct OdeArgs {
    /// Equation such as `f'' - z*f`.
    #[arg(allow_hyphen_values = true, required_unless_present = "json")]
    pub equation: Option<String>,
    /// JSON monomial list instead of an equation string.
    #[arg(long, conflicts_with = "equation")]
    pub json: Option<PathBuf>,
    /// Compare kappa candidates with the profile of the registered solution.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct OuterArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Radius of the initial disc about 0.
    #[arg(long, default_value_t = 10.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 2)]
    pub steps: usize,
    #[arg(long, default_value_t = 1024)]
    pub nu: usize,
    #[arg(long, default_value_t = 1024)]
    pub ntheta: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, serde::Serialize)]
pub struct TractArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long)]
    pub res: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Render(a) => commands::render(&a),
        Command::Growth(a) => commands::growth(&a),
        Command::WvCheck(a) => commands::wv_check(&a),
        Command::OdeBound(a) => commands::ode_bound(&a),
        Command::OuterSeq(a) => commands::outer_seq(&a),
        Command::TractInfo(a) => commands::tract_info(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
