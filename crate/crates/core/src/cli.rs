//! Command-line front end: figure data as CSV/JSON and single-point reports.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{evolve_beam_splitter, squeezed_thermal_cov, BeamSplitterParams, BipartiteCovariance, SqueezedThermalSpec};
use crate::phonon::{distribution, DEFAULT_K_MAX};
use crate::separability::{entanglement_surface, separability_margin_or_eigen};
use crate::thermometry::{
    cramer_rao, fisher_matrix, fisher_sweep, CramerRao, FisherMatrix, OmegaConvention, SweepAxis, TrapConfig,
    DEFAULT_OMEGA,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub const FIG2_TEMPERATURE: f64 = 2.8e-5;
pub const DEFAULT_T1: f64 = 2.8e-5;
pub const DEFAULT_T2: f64 = 2.08e-5;
pub const DEFAULT_R_VALUES: [f64; 3] = [0.0, 0.25, 0.5];

#[derive(Parser, Debug)]
#[command(name = "thermoion", version, about = "Two-ion beam-splitter thermometry: figure data and point reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Separability margin over (r, theta).
    Fig2(Options),
    /// Fisher matrix against theta.
    Fig4(Options),
    /// Fisher matrix against T2 at theta = pi/4.
    Fig5(Options),
    /// Fisher matrix against T2 at theta = pi/2.
    Fig6(Options),
    /// Full report for one parameter point.
    Point(Options),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Angular,
    Ordinary,
}

impl From<ConventionArg> for OmegaConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Angular => OmegaConvention::Angular,
            ConventionArg::Ordinary => OmegaConvention::Ordinary,
        }
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct Options {
    /// TOML file with any of the options below; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Trap frequency (see --omega-convention).
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    #[arg(long, value_enum)]
    pub omega_convention: Option<ConventionArg>,
    /// Temperature of mode 1 in K.
    #[arg(long, allow_hyphen_values = true)]
    pub t1: Option<f64>,
    /// Temperature of mode 2 in K.
    #[arg(long, allow_hyphen_values = true)]
    pub t2: Option<f64>,
    /// Squeezing values, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub r: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Sweep axis grid as min:max:steps.
    #[arg(long)]
    pub grid: Option<Grid>,
    /// Squeezing grid of fig2 as min:max:steps.
    #[arg(long)]
    pub r_grid: Option<Grid>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Inclusive, evenly spaced grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::Config(format!("grid needs at least 2 steps, got {steps}")));
        }
        if min >= max || !min.is_finite() || !max.is_finite() {
            return Err(Error::Config(format!("grid needs finite min < max, got {min}:{max}")));
        }
        Ok(Self { min, max, steps })
    }

    pub fn points(&self) -> Vec<f64> {
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.max } else { self.min + h * i as f64 })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, steps] = parts.as_slice() else {
            return Err(format!("expected min:max:steps, got '{s}'"));
        };
        let min: f64 = min.trim().parse().map_err(|e| format!("grid min: {e}"))?;
        let max: f64 = max.trim().parse().map_err(|e| format!("grid max: {e}"))?;
        let steps: usize = steps.trim().parse().map_err(|e| format!("grid steps: {e}"))?;
        Grid::new(min, max, steps).map_err(|e| e.to_string())
    }
}

/// Options read from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub omega: Option<f64>,
    pub omega_convention: Option<OmegaConvention>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub r: Option<Vec<f64>>,
    pub theta: Option<f64>,
    pub kmax: Option<usize>,
    pub grid: Option<String>,
    pub r_grid: Option<String>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

fn read_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig4,
    Fig5,
    Fig6,
    Point,
}

/// Fully resolved request.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRequest {
    pub figure: Figure,
    /// `omega` already converted to rad/s.
    pub trap: TrapConfig,
    pub r_values: Vec<f64>,
    pub grid: Grid,
    pub r_grid: Grid,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl SweepRequest {
    pub fn resolve(figure: Figure, opts: &Options) -> Result<Self> {
        let file = match &opts.config {
            Some(p) => read_config(p)?,
            None => FileConfig::default(),
        };
        let parse_grid = |s: &Option<String>| -> Result<Option<Grid>> {
            s.as_deref().map(|g| g.parse::<Grid>().map_err(Error::Config)).transpose()
        };
        let file_grid = parse_grid(&file.grid)?;
        let file_r_grid = parse_grid(&file.r_grid)?;

        let convention = opts.omega_convention.map(OmegaConvention::from).or(file.omega_convention).unwrap_or_default();
        let omega = convention.to_angular(opts.omega.or(file.omega).unwrap_or(DEFAULT_OMEGA));
        let (t1_default, t2_default, theta_default, grid_default) = match figure {
            Figure::Fig2 => (FIG2_TEMPERATURE, FIG2_TEMPERATURE, 0.0, Grid::new(0.0, std::f64::consts::PI, 60)?),
            Figure::Fig4 | Figure::Point => (
                DEFAULT_T1,
                DEFAULT_T2,
                std::f64::consts::FRAC_PI_4,
                Grid::new(0.0, 2.0 * std::f64::consts::PI, 400)?,
            ),
            Figure::Fig5 => (DEFAULT_T1, DEFAULT_T2, std::f64::consts::FRAC_PI_4, Grid::new(0.5e-5, 4e-5, 200)?),
            Figure::Fig6 => (DEFAULT_T1, DEFAULT_T2, std::f64::consts::FRAC_PI_2, Grid::new(0.5e-5, 4e-5, 200)?),
        };
        let explicit_r = opts.r.clone().or(file.r);
        if explicit_r.as_ref().is_some_and(|r| r.is_empty()) {
            return Err(Error::Config("r needs at least one value".into()));
        }
        if figure == Figure::Point && explicit_r.as_ref().is_some_and(|r| r.len() > 1) {
            return Err(Error::Config("point takes a single r value".into()));
        }
        let r_values = explicit_r.clone().unwrap_or_else(|| DEFAULT_R_VALUES.to_vec());
        let trap = TrapConfig {
            omega,
            t1: opts.t1.or(file.t1).unwrap_or(t1_default),
            t2: opts.t2.or(file.t2).unwrap_or(t2_default),
            r: explicit_r.map_or(0.0, |r| r[0]),
            theta: opts.theta.or(file.theta).unwrap_or(theta_default),
            k_max: opts.kmax.or(file.kmax).unwrap_or(DEFAULT_K_MAX),
        };
        trap.validate()?;
        Ok(Self {
            figure,
            trap,
            r_values,
            grid: opts.grid.or(file_grid).unwrap_or(grid_default),
            r_grid: opts.r_grid.or(file_r_grid).unwrap_or(Grid::new(0.0, 1.0, 60)?),
            format: opts.format.or(file.format).unwrap_or_default(),
            out: opts.out.clone().or(file.out),
        })
    }
}

/// A rectangular table with named columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    /// Header plus rows, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// Array of objects keyed by column name.
    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .map(|(c, &x)| (c.to_string(), json_number(x)))
                    .collect()
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
        s.push('\n');
        s
    }
}

fn json_number(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, serde_json::Value::Number)
}

pub fn run_fig2(req: &SweepRequest) -> Result<Table> {
    let n1 = req.trap.nbar1()?;
    let n2 = req.trap.nbar2()?;
    let thetas = req.grid.points();
    let rs = req.r_grid.points();
    let surface = entanglement_surface(SqueezedThermalSpec::thermal(n1)?, SqueezedThermalSpec::thermal(n2)?, &thetas, &rs)?;
    let mut rows = Vec::with_capacity(thetas.len() * rs.len());
    for (r, line) in rs.iter().zip(&surface) {
        for (th, m) in thetas.iter().zip(line) {
            rows.push(vec![*r, *th, *m]);
        }
    }
    Ok(Table {
        columns: &["r", "theta", "separability_margin"],
        rows,
    })
}

fn fisher_table(req: &SweepRequest, axis: SweepAxis, columns: &'static [&'static str]) -> Result<Table> {
    let grid = req.grid.points();
    let mut rows = Vec::with_capacity(grid.len() * req.r_values.len());
    for &r in &req.r_values {
        let template = TrapConfig { r, ..req.trap };
        for (x, f) in grid.iter().zip(fisher_sweep(&template, axis, &grid)?) {
            rows.push(vec![*x, r, f.f11, f.f22, f.f12]);
        }
    }
    Ok(Table { columns, rows })
}

pub fn run_fig4(req: &SweepRequest) -> Result<Table> {
    fisher_table(req, SweepAxis::Theta, &["theta", "r", "f11", "f22", "f12"])
}

pub fn run_fig5(req: &SweepRequest) -> Result<Table> {
    fisher_table(req, SweepAxis::T2, &["t2", "r", "f11", "f22", "f12"])
}

pub fn run_fig6(req: &SweepRequest) -> Result<Table> {
    fisher_table(req, SweepAxis::T2, &["t2", "r", "f11", "f22", "f12"])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointReport {
    pub config: TrapConfig,
    pub nbar1: f64,
    pub nbar2: f64,
    pub a: f64,
    pub b: f64,
    /// `P(0..=9)`
    pub probabilities: Vec<f64>,
    pub fisher: FisherMatrix,
    pub cramer_rao: CramerRao,
    pub separability_margin: f64,
}

pub fn run_point(req: &SweepRequest) -> Result<PointReport> {
    let cfg = req.trap;
    let (nbar1, nbar2) = (cfg.nbar1()?, cfg.nbar2()?);
    let coef = cfg.coefficients()?;
    let dist = distribution(&coef, cfg.k_max.max(9))?;
    let fisher = fisher_matrix(&cfg)?;
    let input = BipartiteCovariance::product(
        squeezed_thermal_cov(SqueezedThermalSpec::thermal(nbar1)?),
        squeezed_thermal_cov(SqueezedThermalSpec::new(nbar2, cfg.r)?),
    );
    let out = evolve_beam_splitter(&input, &BeamSplitterParams::coupling(cfg.theta));
    Ok(PointReport {
        config: cfg,
        nbar1,
        nbar2,
        a: coef.a(),
        b: coef.b(),
        probabilities: dist.probs[..10].to_vec(),
        fisher,
        cramer_rao: cramer_rao(&fisher),
        separability_margin: separability_margin_or_eigen(&out),
    })
}

impl PointReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let c = &self.config;
        let _ = writeln!(s, "omega_rad_per_s  {:.16e}", c.omega);
        let _ = writeln!(s, "t1_K             {:.16e}", c.t1);
        let _ = writeln!(s, "t2_K             {:.16e}", c.t2);
        let _ = writeln!(s, "r                {:.16e}", c.r);
        let _ = writeln!(s, "theta            {:.16e}", c.theta);
        let _ = writeln!(s, "k_max            {}", c.k_max);
        let _ = writeln!(s, "nbar1            {:.16e}", self.nbar1);
        let _ = writeln!(s, "nbar2            {:.16e}", self.nbar2);
        let _ = writeln!(s, "a                {:.16e}", self.a);
        let _ = writeln!(s, "b                {:.16e}", self.b);
        for (k, p) in self.probabilities.iter().enumerate() {
            let _ = writeln!(s, "P({k})             {p:.16e}");
        }
        let _ = writeln!(s, "f11              {:.16e}", self.fisher.f11);
        let _ = writeln!(s, "f22              {:.16e}", self.fisher.f22);
        let _ = writeln!(s, "f12              {:.16e}", self.fisher.f12);
        let _ = writeln!(s, "crb_inv_sqrt_t1  {:.16e}", self.cramer_rao.inverse_sqrt[0]);
        let _ = writeln!(s, "crb_inv_sqrt_t2  {:.16e}", self.cramer_rao.inverse_sqrt[1]);
        let _ = writeln!(s, "crb_inverse_t1   {:.16e}", self.cramer_rao.inverse[0]);
        let _ = writeln!(s, "crb_inverse_t2   {:.16e}", self.cramer_rao.inverse[1]);
        let _ = writeln!(s, "separability     {:.16e}", self.separability_margin);
        s
    }

    pub fn to_json(&self) -> String {
        // infinite bounds are not JSON numbers
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(crb) = v.get_mut("cramer_rao") {
            for key in ["inverse_sqrt", "inverse"] {
                let arr = if key == "inverse" { self.cramer_rao.inverse } else { self.cramer_rao.inverse_sqrt };
                crb[key] = serde_json::Value::Array(arr.iter().map(|&x| json_number(x)).collect());
            }
        }
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Text that a request produces.
pub fn render(req: &SweepRequest) -> Result<String> {
    if req.figure == Figure::Point {
        let rep = run_point(req)?;
        return Ok(match req.format {
            Format::Json => rep.to_json(),
            Format::Csv => rep.to_text(),
        });
    }
    let table = match req.figure {
        Figure::Fig2 => run_fig2(req)?,
        Figure::Fig4 => run_fig4(req)?,
        Figure::Fig5 => run_fig5(req)?,
        Figure::Fig6 => run_fig6(req)?,
        Figure::Point => unreachable!(),
    };
    Ok(match req.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    })
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain { .. } => EXIT_USAGE,
        Error::Io { .. } => EXIT_IO,
        Error::Singular { .. } | Error::SeriesDivergence { .. } | Error::Truncation { .. } | Error::Unnormalized { .. } => {
            EXIT_NUMERIC
        }
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    let (figure, opts) = match &cli.command {
        Command::Fig2(o) => (Figure::Fig2, o),
        Command::Fig4(o) => (Figure::Fig4, o),
        Command::Fig5(o) => (Figure::Fig5, o),
        Command::Fig6(o) => (Figure::Fig6, o),
        Command::Point(o) => (Figure::Point, o),
    };
    let req = SweepRequest::resolve(figure, opts)?;
    let text = render(&req)?;
    match &req.out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().ansi().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
