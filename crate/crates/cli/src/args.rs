use std::path::PathBuf;

use beads_core::dimer::Axis;
use beads_core::io::{Builtin, Format};
use beads_core::{Interval, WindowSpec};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "beads",
    version,
    about = "Bead-model kernels, samplers and dimer tentacle analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the bead kernel J_γ(x, ξ).
    Kernel(KernelArgs),
    /// Evaluate the inverse Kasteleyn kernel of the honeycomb with weights (t, 1, e^{γt}).
    DiscreteKernel(DiscreteArgs),
    /// Compare the rescaled discrete kernel with J_γ over a list of meshes.
    Verify(VerifyArgs),
    /// Correlation density of a set of beads.
    Correlate(CorrelateArgs),
    /// Probability of no bead in a window.
    Gap(GapArgs),
    /// Joint law of bead counts in a window.
    Counts(CountsArgs),
    /// Exact samples of the bead process on a window.
    SampleDpp(SampleDppArgs),
    /// Markov chain on honeycomb torus tilings.
    SampleMcmc(SampleMcmcArgs),
    /// Coefficients of the characteristic polynomial.
    Charpoly(GraphOnly),
    /// Vertices of the Newton polygon.
    Newton(GraphOnly),
    /// Phase, slope and Ronkin function over a field grid.
    Amoeba(AmoebaArgs),
    /// Ronkin function and phase at one field.
    Ronkin(RonkinArgs),
    /// Tentacle positions and widths, or asymptote checks with --by.
    Tentacle(TentacleArgs),
    /// Defect densities of the thread-crossing edges.
    Rho(SideArgs),
    /// Rank-one factorization on the vertices bordering a thread.
    Rank1(Rank1Args),
    /// Dual embedding from the divergence-free flow at a torus zero.
    Isoradial(IsoradialArgs),
    /// Column labels of an n×m honeycomb at a horizontal field.
    Freeze(FreezeArgs),
    /// Geometric run-length law against exact probabilities.
    Runlength(RunlengthArgs),
    /// Inverse Kasteleyn kernel in a tentacle against the bead kernel.
    TentacleCheck(TentacleCheckArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GraphSource {
    /// Graph description file.
    #[arg(long, conflicts_with = "builtin")]
    pub graph: Option<PathBuf>,
    /// honeycomb:1x1 or honeycomb:NxM:weightfile.
    #[arg(long, value_parser = parse_builtin)]
    pub builtin: Option<Builtin>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_gamma)]
    pub gamma: f64,
    /// Thread offsets, as a list or lo:hi:n range.
    #[arg(long, allow_hyphen_values = true, default_value = "0", value_parser = parse_ints)]
    pub x: IntList,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_reals)]
    pub xi: RealList,
    /// Absolute tolerance of the kernel quadrature.
    #[arg(long, value_parser = parse_positive)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DiscreteArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_gamma)]
    pub gamma: f64,
    #[arg(long, value_parser = parse_mesh)]
    pub t: f64,
    #[arg(long, allow_hyphen_values = true, default_value = "0", value_parser = parse_ints)]
    pub x: IntList,
    #[arg(long, allow_hyphen_values = true, default_value = "0", value_parser = parse_ints)]
    pub y: IntList,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_gamma)]
    pub gamma: f64,
    #[arg(long, allow_hyphen_values = true, default_value = "0", value_parser = parse_ints)]
    pub x: IntList,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_reals)]
    pub xi: RealList,
    /// Meshes, e.g. 1e-2,1e-3.
    #[arg(long, default_value = "1e-2,1e-3", value_parser = parse_meshes)]
    pub t: RealList,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_gamma)]
    pub gamma: f64,
    /// Beads as thread:position, comma separated.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_points)]
    pub points: Points,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_gamma)]
    pub gamma: f64,
    /// Window as thread:lo:hi intervals, or comma separated lengths s of [0, s].
    #[arg(long, allow_hyphen_values = true, value_parser = parse_gap_window)]
    pub window: GapWindow,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CountsArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_gamma)]
    pub gamma: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_window)]
    pub window: WindowSpec,
    /// Largest count per interval.
    #[arg(long, default_value_t = 4)]
    pub max_n: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SampleDppArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_gamma)]
    pub gamma: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_window)]
    pub window: WindowSpec,
    /// Cell width of the discretized window.
    #[arg(long, default_value_t = 0.02, value_parser = parse_positive)]
    pub grid: f64,
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SampleMcmcArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_gamma)]
    pub gamma: f64,
    #[arg(long, value_parser = parse_mesh)]
    pub t: f64,
    /// Torus size as THREADSxSITES.
    #[arg(long, default_value = "8x40", value_parser = parse_size)]
    pub grid: (usize, usize),
    /// Sweeps between recorded measurements.
    #[arg(long, default_value_t = 10)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 10)]
    pub measurements: usize,
    /// Burn-in sweeps (default 100·threads·sites).
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct GraphOnly {
    #[command(flatten)]
    pub source: GraphSource,
    /// Make this Newton polygon side the bottom one by a change of basis.
    #[arg(long)]
    pub side: Option<usize>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct AmoebaArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub side: Option<usize>,
    /// Raster as bxlo:bxhi:n,bylo:byhi:n.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub grid: (Axis, Axis),
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct RonkinArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub side: Option<usize>,
    /// Field as bx,by.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
    pub field: (f64, f64),
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SideArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub side: Option<usize>,
    /// Root of the bottom side polynomial, by increasing modulus.
    #[arg(long, default_value_t = 0)]
    pub root: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TentacleArgs {
    #[command(flatten)]
    pub side: SideArgs,
    /// Heights at which to locate the tentacle boundary.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_reals)]
    pub by: Option<RealList>,
}

#[derive(Debug, Args)]
pub struct Rank1Args {
    #[command(flatten)]
    pub side: SideArgs,
    /// Thread label (default: the one with the largest density).
    #[arg(long)]
    pub thread: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IsoradialArgs {
    #[command(flatten)]
    pub side: SideArgs,
    /// Field as bx,by (default: the tentacle field at --t and --gamma).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
    pub field: Option<(f64, f64)>,
    #[arg(long, default_value_t = 1e-3, value_parser = parse_mesh)]
    pub t: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0, value_parser = parse_gamma)]
    pub gamma: f64,
}

#[derive(Debug, Args)]
pub struct FreezeArgs {
    /// honeycomb:NxM:weightfile.
    #[arg(long, value_parser = parse_builtin)]
    pub builtin: Builtin,
    #[arg(long, allow_hyphen_values = true)]
    pub bx: f64,
    #[arg(long, default_value_t = 1e-9, value_parser = parse_positive)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct RunlengthArgs {
    /// honeycomb:NxM:weightfile.
    #[arg(long, value_parser = parse_builtin)]
    pub builtin: Builtin,
    #[arg(long, default_value_t = 0)]
    pub root: usize,
    /// Frozen column (default: the first one labelled a).
    #[arg(long)]
    pub column: Option<usize>,
    /// Row of the bead that starts the run.
    #[arg(long, default_value_t = 0)]
    pub row: usize,
    /// Meshes at which to evaluate the exact probabilities.
    #[arg(long, default_value = "1e-2,1e-3", value_parser = parse_meshes)]
    pub t: RealList,
    /// Longest run length reported.
    #[arg(long, default_value_t = 3)]
    pub max_p: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct TentacleCheckArgs {
    #[command(flatten)]
    pub side: SideArgs,
    /// Thread-crossing edge (default: the first one found).
    #[arg(long)]
    pub edge: Option<usize>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_gamma)]
    pub gamma: f64,
    #[arg(long, default_value = "2e-3,1e-3", value_parser = parse_meshes)]
    pub t: RealList,
    #[arg(long, allow_hyphen_values = true, default_value = "-1,0,1", value_parser = parse_ints)]
    pub x: IntList,
    #[arg(long, allow_hyphen_values = true, default_value = "0,1", value_parser = parse_reals)]
    pub xi: RealList,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntList(pub Vec<i64>);

#[derive(Debug, Clone, PartialEq)]
pub struct RealList(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct Points(pub Vec<beads_core::BeadPoint>);

#[derive(Debug, Clone, PartialEq)]
pub enum GapWindow {
    Lengths(Vec<f64>),
    Window(WindowSpec),
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: beads_core::Error| e.to_string())
}

fn parse_builtin(s: &str) -> Result<Builtin, String> {
    s.parse().map_err(|e: beads_core::Error| e.to_string())
}

fn parse_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

pub fn parse_gamma(s: &str) -> Result<f64, String> {
    let g = parse_real(s)?;
    if g > -1.0 && g < 1.0 {
        Ok(g)
    } else {
        Err(format!("domain: gamma = {g} must lie in (-1, 1)"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_real(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("domain: {v} must be positive"))
    }
}

fn parse_mesh(s: &str) -> Result<f64, String> {
    let t = parse_real(s)?;
    if t > 0.0 && t < 1.0 {
        Ok(t)
    } else {
        Err(format!("domain: t = {t} must lie in (0, 1)"))
    }
}

fn parse_meshes(s: &str) -> Result<RealList, String> {
    s.split(',').map(parse_mesh).collect::<Result<_, _>>().map(RealList)
}

/// `lo:hi:n` as `n` evenly spaced values including both ends.
fn parse_range(s: &str) -> Result<Option<Vec<f64>>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Ok(None);
    }
    let (lo, hi) = (parse_real(parts[0])?, parse_real(parts[1])?);
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("'{}' is not a count", parts[2]))?;
    if n == 0 {
        return Err("a range needs at least one point".into());
    }
    let axis = Axis { lo, hi, n };
    Ok(Some((0..n).map(|i| axis.at(i)).collect()))
}

pub fn parse_reals(s: &str) -> Result<RealList, String> {
    if let Some(v) = parse_range(s)? {
        return Ok(RealList(v));
    }
    s.split(',').map(parse_real).collect::<Result<_, _>>().map(RealList)
}

fn parse_ints(s: &str) -> Result<IntList, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 2 {
        let lo: i64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| format!("'{}' is not an integer", parts[0]))?;
        let hi: i64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| format!("'{}' is not an integer", parts[1]))?;
        return Ok(IntList((lo..=hi).collect()));
    }
    s.split(',')
        .map(|p| p.trim().parse::<i64>().map_err(|_| format!("'{p}' is not an integer")))
        .collect::<Result<_, _>>()
        .map(IntList)
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("'{s}' is not a pair a,b"))?;
    Ok((parse_real(a)?, parse_real(b)?))
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once('x')
        .ok_or_else(|| format!("'{s}' is not of the form NxM"))?;
    let n = a.parse().map_err(|_| format!("'{a}' is not a count"))?;
    let m = b.parse().map_err(|_| format!("'{b}' is not a count"))?;
    Ok((n, m))
}

fn parse_points(s: &str) -> Result<Points, String> {
    s.split(',')
        .map(|p| {
            let (x, xi) = p
                .split_once(':')
                .ok_or_else(|| format!("'{p}' is not thread:position"))?;
            let thread = x.trim().parse().map_err(|_| format!("'{x}' is not an integer"))?;
            Ok(beads_core::BeadPoint {
                thread,
                position: parse_real(xi)?,
            })
        })
        .collect::<Result<_, String>>()
        .map(Points)
}

/// `thread:lo:hi` intervals separated by commas.
pub fn parse_window(s: &str) -> Result<WindowSpec, String> {
    let intervals = s
        .split(',')
        .map(|p| {
            let parts: Vec<&str> = p.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("'{p}' is not thread:lo:hi"));
            }
            let thread = parts[0]
                .trim()
                .parse()
                .map_err(|_| format!("'{}' is not an integer", parts[0]))?;
            Ok(Interval {
                thread,
                lo: parse_real(parts[1])?,
                hi: parse_real(parts[2])?,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    WindowSpec::new(intervals).map_err(|e| e.to_string())
}

fn parse_gap_window(s: &str) -> Result<GapWindow, String> {
    if s.contains(':') {
        return parse_window(s).map(GapWindow::Window);
    }
    let lengths: Vec<f64> = s.split(',').map(parse_real).collect::<Result<_, _>>()?;
    if let Some(l) = lengths.iter().find(|l| **l < 0.0) {
        return Err(format!("domain: gap length {l} must be nonnegative"));
    }
    Ok(GapWindow::Lengths(lengths))
}

fn parse_grid(s: &str) -> Result<(Axis, Axis), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("'{s}' is not lo:hi:n,lo:hi:n"))?;
    let axis = |p: &str| -> Result<Axis, String> {
        let parts: Vec<&str> = p.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("'{p}' is not lo:hi:n"));
        }
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| format!("'{}' is not a count", parts[2]))?;
        Ok(Axis {
            lo: parse_real(parts[0])?,
            hi: parse_real(parts[1])?,
            n,
        })
    };
    Ok((axis(a)?, axis(b)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::error::ErrorKind;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("beads").chain(args.iter().copied()))
    }

    #[test]
    fn kernel_config() {
        let cli = parse(&["kernel", "--gamma", "0", "--x", "0", "--xi", "1.25"]).unwrap();
        let Command::Kernel(k) = cli.command else { panic!() };
        assert_eq!(k.gamma, 0.0);
        assert_eq!(k.x, IntList(vec![0]));
        assert_eq!(k.xi, RealList(vec![1.25]));
        assert_eq!(k.output.format, Format::Csv);
    }

    #[test]
    fn gamma_outside_the_domain_is_a_usage_error() {
        let e = parse(&["kernel", "--gamma", "1.5", "--xi", "1"]).unwrap_err();
        assert_eq!(e.kind(), ErrorKind::ValueValidation);
        assert!(e.to_string().contains("gamma"));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn unknown_flags_are_named() {
        let e = parse(&["kernel", "--gamma", "0", "--xi", "1", "--colour", "red"]).unwrap_err();
        assert_eq!(e.kind(), ErrorKind::UnknownArgument);
        assert!(e.to_string().contains("--colour"));
    }

    #[test]
    fn amoeba_raster_config() {
        let cli = parse(&["amoeba", "--graph", "hc.toml", "--grid", "-3:3:200,-3:3:200"]).unwrap();
        let Command::Amoeba(a) = cli.command else { panic!() };
        assert_eq!(a.source.graph.as_deref(), Some(std::path::Path::new("hc.toml")));
        assert_eq!(
            a.grid.0,
            Axis {
                lo: -3.0,
                hi: 3.0,
                n: 200
            }
        );
        assert_eq!(
            a.grid.1,
            Axis {
                lo: -3.0,
                hi: 3.0,
                n: 200
            }
        );
    }

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_reals("0:1:3").unwrap(), RealList(vec![0.0, 0.5, 1.0]));
        assert_eq!(parse_reals("-1,2.5").unwrap(), RealList(vec![-1.0, 2.5]));
        assert_eq!(parse_ints("-2:2").unwrap(), IntList(vec![-2, -1, 0, 1, 2]));
        assert!(parse_meshes("0.1,1.5").is_err());
        assert_eq!(parse_gap_window("0.1,0.2").unwrap(), GapWindow::Lengths(vec![0.1, 0.2]));
        assert!(matches!(parse_gap_window("0:0:1,1:0:1").unwrap(), GapWindow::Window(_)));
        assert!(parse_window("0:1:0").is_err());
    }
}
