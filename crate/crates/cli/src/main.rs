//! `borromean`: arrange three polygonal unknots into the Borromean rings,
//! verify links, generate inputs and export pictures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use borromean_core::arranger::{arrange, ArrangeError, Mode};
use borromean_core::diagram::project;
use borromean_core::invariants::{certify_borromean, InvariantError, DEFAULT_CROSSING_CAP};
use borromean_core::io::{
    export_obj, export_svg, gen_ngon, gen_random_unknot, gen_torus_example, parse_link, report,
    write_link, CoordinatePlane, IoError, LinkFile,
};
use borromean_core::Knot;
use clap::{Args, Parser, Subcommand};

const PASS: u8 = 0;
const CERTIFICATE_FAIL: u8 = 1;
const INPUT_ERROR: u8 = 2;
const RETRIES_EXHAUSTED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "borromean",
    version,
    about = "Arrange three polygonal unknots into the Borromean rings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Arrange the three components of a LINK file and certify the result.
    Arrange {
        input: PathBuf,
        /// Rigid motions only (needs two planar components).
        #[arg(long)]
        rigid_only: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the arranged link here (with transform blocks).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the text report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Certify that a three-component LINK file is the Borromean rings.
    Verify {
        input: PathBuf,
        /// Largest diagram for which the bracket state sum is run (0 = never).
        #[arg(long, default_value_t = DEFAULT_CROSSING_CAP)]
        bracket_cap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate input polygons as a LINK file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Export a LINK file as OBJ polylines or an SVG diagram.
    Export {
        input: PathBuf,
        #[command(flatten)]
        target: ExportTarget,
        /// Projection seed for the SVG diagram.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ExportTarget {
    #[arg(long)]
    obj: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenKind {
    /// Regular n-gons, one per radius, side by side along x.
    Ngon {
        #[arg(long, default_value_t = 23)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        radius: Vec<f64>,
        /// Planes (xy, yz, zx), cycled over the radii.
        #[arg(long, value_delimiter = ',', default_value = "xy")]
        plane: Vec<CoordinatePlane>,
    },
    /// Random unknots with convex projections.
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        vertices: usize,
        #[arg(long)]
        planar: bool,
        /// Number of knots; knot i uses seed + i.
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// The many-meridian unknot on the fat torus.
    Torus {
        #[arg(long, default_value_t = 18)]
        n: usize,
        #[arg(long, default_value_t = 12)]
        segments: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Self {
            code: INPUT_ERROR,
            message: message.to_string(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::input(e)
    }
}

fn read_link(path: &Path) -> Result<LinkFile, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    parse_link(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_arrange(
    input: &Path,
    rigid_only: bool,
    seed: u64,
    out: Option<&Path>,
    report_path: Option<&Path>,
) -> Result<u8, Failure> {
    let file = read_link(input)?;
    let mode = if rigid_only {
        Mode::RigidOnly
    } else {
        Mode::AllowScaling
    };
    let a = match arrange(&file.knots(), mode, seed) {
        Ok(a) => a,
        Err(e @ ArrangeError::PreconditionViolated(_)) => return Err(Failure::input(e)),
        Err(e @ ArrangeError::RetriesExhausted { .. }) => {
            if let ArrangeError::RetriesExhausted { trace, .. } = &e {
                for line in trace.iter().rev().take(5).rev() {
                    eprintln!("  {line}");
                }
            }
            return Err(Failure {
                code: RETRIES_EXHAUSTED,
                message: e.to_string(),
            });
        }
    };
    if let Some(path) = out {
        let mut arranged = file.clone();
        for ((c, k), t) in arranged
            .components
            .iter_mut()
            .zip(&a.arranged)
            .zip(&a.transforms)
        {
            c.knot = k.clone();
            c.transform = Some(*t);
        }
        write_file(path, &write_link(&arranged))?;
    }
    emit(report_path, &report(&a.certificate, Some(&a)))?;
    Ok(if a.certificate.verdict.is_pass() {
        PASS
    } else {
        CERTIFICATE_FAIL
    })
}

fn run_verify(input: &Path, bracket_cap: usize, seed: u64) -> Result<u8, Failure> {
    let file = read_link(input)?;
    let cap = (bracket_cap > 0).then_some(bracket_cap);
    match certify_borromean(&file.knots(), seed, cap) {
        Ok(c) => {
            print!("{}", report::<f64>(&c, None));
            Ok(if c.verdict.is_pass() {
                PASS
            } else {
                CERTIFICATE_FAIL
            })
        }
        Err(e @ InvariantError::NotThreeComponents(_)) => Err(Failure::input(e)),
        Err(e) => Err(Failure {
            code: CERTIFICATE_FAIL,
            message: e.to_string(),
        }),
    }
}

fn run_gen(kind: &GenKind, out: Option<&Path>) -> Result<u8, Failure> {
    let knots: Vec<Knot> = match kind {
        GenKind::Ngon { n, radius, plane } => {
            let spacing = 3.0 * radius.iter().cloned().fold(0.0, f64::max);
            radius
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    gen_ngon(
                        *n,
                        r,
                        plane[i % plane.len()],
                        [spacing * i as f64, 0.0, 0.0],
                    )
                })
                .collect::<Result<_, _>>()?
        }
        GenKind::Random {
            seed,
            vertices,
            planar,
            count,
        } => (0..*count as u64)
            .map(|i| gen_random_unknot(seed.wrapping_add(i), *vertices, *planar))
            .collect::<Result<_, _>>()?,
        GenKind::Torus { n, segments } => vec![gen_torus_example(*n, *segments)?],
    };
    emit(out, &write_link(&LinkFile::from_knots(&knots)))?;
    Ok(PASS)
}

fn run_export(input: &Path, target: &ExportTarget, seed: u64) -> Result<u8, Failure> {
    let knots = read_link(input)?.knots();
    if let Some(path) = &target.obj {
        write_file(path, &export_obj(&knots))?;
    }
    if let Some(path) = &target.svg {
        let d = project(&knots, seed).map_err(Failure::input)?;
        write_file(path, &export_svg(&d))?;
    }
    Ok(PASS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT_ERROR } else { PASS });
        }
    };
    let result = match &cli.command {
        Command::Arrange {
            input,
            rigid_only,
            seed,
            out,
            report,
        } => run_arrange(input, *rigid_only, *seed, out.as_deref(), report.as_deref()),
        Command::Verify {
            input,
            bracket_cap,
            seed,
        } => run_verify(input, *bracket_cap, *seed),
        Command::Gen { kind, out } => run_gen(kind, out.as_deref()),
        Command::Export {
            input,
            target,
            seed,
        } => run_export(input, target, *seed),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
