//! `minface` command-line tool.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse or usage error, 3 point not
//! singular, 4 numeric failure, 5 audit found a sign violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use minface::classify::ClassifyError;
use minface::fixtures;
use minface::fuzz::{fuzz_scan_options, run_fuzz};
use minface::report::{overlay, point_report, scan_report, DEFAULT_THETAS};
use minface::singular::SingularError;
use minface::specfile::{SpecError, SurfaceSpec};
use minface::surface::{mesh_obj, SurfaceError};

#[derive(Parser)]
#[command(name = "minface", version, about = "Singularities of timelike minimal surfaces from W-data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one singular point.
    Classify {
        spec: PathBuf,
        /// Parameter point `u,v`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        at: (f64, f64),
    },
    /// Locate and classify every singular point in the domain block.
    Scan {
        spec: PathBuf,
        /// Report JSON path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV polylines of the singular curves and ω-lines.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write the conjugate or an associate surface as a new spec.
    #[command(group(ArgGroup::new("kind").required(true).args(["conjugate", "associate"])))]
    Transform {
        spec: PathBuf,
        #[arg(long)]
        conjugate: bool,
        #[arg(long, allow_hyphen_values = true)]
        associate: Option<f64>,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export a triangulated OBJ mesh over the domain.
    Mesh {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Append the singular set as polylines.
        #[arg(long)]
        singular_overlay: bool,
    },
    /// Emit the built-in fixtures as spec files.
    Fixtures {
        /// Directory to write `<name>.toml` files into; lists names when absent.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Only this fixture, printed to stdout unless `--out-dir` is given.
        #[arg(long)]
        name: Option<String>,
    },
    /// Seeded random W-data: scan, cross-check and sign audit.
    Audit {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        /// Summary JSON path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Io(PathBuf, std::io::Error),
    Usage(String),
    NotSingular(String),
    Numeric(String),
    Violations(usize),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(..) => 1,
            Failure::Usage(_) => 2,
            Failure::NotSingular(_) => 3,
            Failure::Numeric(_) => 4,
            Failure::Violations(_) => 5,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(p, e) => format!("{}: {e}", p.display()),
            Failure::Usage(m) | Failure::NotSingular(m) | Failure::Numeric(m) => m.clone(),
            Failure::Violations(n) => format!("audit found {n} sign violation(s)"),
        }
    }
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        if e.is_parse() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Numeric(e.to_string())
        }
    }
}

impl From<SurfaceError> for Failure {
    fn from(e: SurfaceError) -> Self {
        Failure::Numeric(e.to_string())
    }
}

impl From<ClassifyError> for Failure {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::Singular(SingularError::NotSingular { .. }) => Failure::NotSingular(e.to_string()),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `u,v`")?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok((num(a)?, num(b)?))
}

fn read_spec(path: &Path) -> Result<SurfaceSpec, Failure> {
    let src = fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))?;
    SurfaceSpec::from_toml(&src).map_err(|e| match e {
        SpecError::Toml(t) => Failure::Usage(format!("{}: {t}", path.display())),
        other => other.into(),
    })
}

fn write_or_print(path: Option<&Path>, content: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, content).map_err(|e| Failure::Io(p.to_path_buf(), e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn json(v: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Classify { spec, at } => {
            let w = read_spec(&spec)?.wdata()?;
            let r = point_report(&w, at, &DEFAULT_THETAS)?;
            write_or_print(None, &json(serde_json::json!(r)))
        }
        Command::Scan { spec, out, csv } => {
            let s = read_spec(&spec)?;
            let w = s.wdata()?;
            let domain = s
                .domain()
                .ok_or_else(|| Failure::Usage("scan needs a [domain] block".into()))?;
            let (report, scan) = scan_report(s.name.as_deref(), &w, &domain, &s.scan_options(), &DEFAULT_THETAS);
            if let Some(p) = csv {
                let text = minface::singular::curves_csv(&scan, &domain);
                fs::write(&p, text).map_err(|e| Failure::Io(p, e))?;
            }
            write_or_print(out.as_deref(), &json(serde_json::json!(report)))
        }
        Command::Transform {
            spec,
            conjugate,
            associate,
            out,
        } => {
            let s = read_spec(&spec)?;
            let w = s.wdata()?;
            let (w2, suffix) = if conjugate {
                (w.conjugate(), "conjugate".to_string())
            } else {
                let th = associate.expect("clap group requires one flag");
                (w.associate(th), format!("associate({th})"))
            };
            let name = s.name.as_ref().map(|n| format!("{n}_{suffix}"));
            let mut t = SurfaceSpec::from_wdata(name.as_deref(), &w2, s.domain().as_ref());
            t.domain = s.domain.clone();
            t.options = s.options.clone();
            write_or_print(out.as_deref(), &t.to_toml())
        }
        Command::Mesh {
            spec,
            out,
            singular_overlay,
        } => {
            let s = read_spec(&spec)?;
            let w = s.wdata()?;
            let domain = s
                .domain()
                .ok_or_else(|| Failure::Usage("mesh needs a [domain] block".into()))?;
            let lines = if singular_overlay {
                let scan = minface::singular::singular_scan(&w, &domain, &s.scan_options());
                overlay(&scan, &domain)
            } else {
                Vec::new()
            };
            let obj = mesh_obj(&w, &domain, s.mesh_grid(), &lines)?;
            fs::write(&out, obj).map_err(|e| Failure::Io(out, e))
        }
        Command::Fixtures { out_dir, name } => {
            let list = match &name {
                Some(n) => vec![fixtures::by_name(n).map_err(|e| Failure::Usage(e.to_string()))?],
                None => fixtures::all(),
            };
            match out_dir {
                Some(dir) => {
                    fs::create_dir_all(&dir).map_err(|e| Failure::Io(dir.clone(), e))?;
                    for f in &list {
                        let p = dir.join(format!("{}.toml", f.name));
                        fs::write(&p, f.spec().to_toml()).map_err(|e| Failure::Io(p, e))?;
                    }
                    Ok(())
                }
                None if name.is_some() => write_or_print(None, &list[0].spec().to_toml()),
                None => {
                    for f in &list {
                        println!("{}\t{}", f.name, f.notes);
                    }
                    Ok(())
                }
            }
        }
        Command::Audit { seed, count, out } => {
            let s = run_fuzz(seed, count, &fuzz_scan_options());
            write_or_print(out.as_deref(), &json(serde_json::json!(s)))?;
            match s.audit.violations.len() {
                0 => Ok(()),
                n => Err(Failure::Violations(n)),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse() {
        assert_eq!(parse_point("1,-1"), Ok((1.0, -1.0)));
        assert_eq!(parse_point(" 0.5 , 2e-1"), Ok((0.5, 0.2)));
        assert!(parse_point("1").is_err());
        assert!(parse_point("a,1").is_err());
    }

    #[test]
    fn conflicting_transform_flags() {
        let r = Cli::try_parse_from(["minface", "transform", "x.toml", "--conjugate", "--associate", "1"]);
        assert!(r.is_err());
        assert!(Cli::try_parse_from(["minface", "transform", "x.toml", "--associate", "-0.5"]).is_ok());
    }
}
