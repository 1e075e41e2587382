use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crcond_core::area::{area_convergence_study, AreaRecord, AreaStudy};
use crcond_core::fem::{experiment_sweep, ConvergenceRecord, SolverKind, SweepConfig};
use crcond_core::field::{Affine, Cylinder, Paraboloid, ScalarField};
use crcond_core::interp::{bound_audit, bound_audit_triangles, AuditMesh, InterpOptions, NormExponent};
use crcond_core::lantern::{classify_sequence_with, lantern_row, sample_ns, LanternParams, SequenceRule};
use crcond_core::mesh::{gen_aniso_capped, validate, write_mesh, DEFAULT_TRIANGLE_CAP};
use crcond_core::quadrature::TriangleRule;
use crcond_core::rate::fit_finest_half;
use crcond_core::report::{area_csv, audit_csv, lantern_csv, num, sweep_csv};
use crcond_core::sparse::CgConfig;
use crcond_core::trigeo::random_triangles;
use crcond_core::Error;

/// Experiments on the circumradius condition for P1 interpolation and FEM.
#[derive(Parser)]
#[command(name = "crcond", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output path; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomised corpora.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Degree of the triangle quadrature rule (1, 2, 4 or 5).
    #[arg(long, global = true, default_value_t = 4)]
    quad_degree: usize,
    /// Relative residual tolerance of the CG solver.
    #[arg(long, global = true, default_value_t = 1e-12)]
    cg_tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// FEM convergence sweep for the cylinder Poisson problem.
    FemSweep {
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.1])]
        alphas: Vec<f64>,
        #[arg(long = "n", value_delimiter = ',', default_values_t = [8, 16, 32, 64])]
        ns: Vec<usize>,
        /// CG iteration limit; 50 sqrt(ndof) + 1000 when omitted.
        #[arg(long)]
        max_iter: Option<usize>,
        /// Linear solver: cg (Jacobi-preconditioned CG) or banded (Cholesky).
        #[arg(long, default_value = "cg")]
        solver: SolverKind,
        #[command(flatten)]
        common: Common,
    },
    /// Schwarz lantern sequences m = floor(n^beta).
    Lantern {
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 3.0])]
        beta: Vec<f64>,
        #[arg(long, default_value_t = 256)]
        n_max: u64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        height: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Elementary area of interpolated graphs against the exact area.
    Area {
        #[arg(long, value_enum, default_value_t = FieldName::Cylinder)]
        field: FieldName,
        #[arg(long, value_delimiter = ',', default_values_t = [1.5, 2.1])]
        alphas: Vec<f64>,
        #[arg(long = "n", value_delimiter = ',', default_values_t = [8, 16, 32, 64, 128])]
        ns: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Per-element interpolation error against the C(K) and R_K bounds.
    InterpAudit {
        #[arg(long, default_value = "2")]
        p: NormExponent,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.5, 1.9])]
        alphas: Vec<f64>,
        #[arg(long = "n", value_delimiter = ',', default_values_t = [8, 16, 32])]
        ns: Vec<usize>,
        /// Number of random triangles added to the audit.
        #[arg(long, default_value_t = 1000)]
        random: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Writes a gen_aniso mesh in the text mesh format.
    Mesh {
        #[arg(long = "n")]
        n: usize,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldName {
    Cylinder,
    Paraboloid,
    Affine,
}

const CYLINDER_A: f64 = crcond_core::fem::CYLINDER_A;

fn field_of(name: FieldName) -> Box<dyn ScalarField> {
    match name {
        FieldName::Cylinder => Box::new(Cylinder::new(CYLINDER_A)),
        FieldName::Paraboloid => Box::new(Paraboloid),
        FieldName::Affine => Box::new(Affine::new(1.0, 0.5, -0.25)),
    }
}

fn emit(out: Option<&Path>, content: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, content),
        None => io::stdout().lock().write_all(content.as_bytes()),
    }
}

/// Per-sequence file name: `dir/stem_beta<b>.ext`.
fn sequence_path(out: &Path, beta: f64) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("lantern");
    let name = match out.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_beta{beta}.{ext}"),
        None => format!("{stem}_beta{beta}"),
    };
    out.with_file_name(name)
}

fn slope_line(label: &str, xs: &[f64], ys: &[f64]) -> String {
    match fit_finest_half(xs, ys) {
        Some(f) => format!("{label:>12} {:>9.4} {:>7.4} {:>3}", f.slope, f.r_squared, f.points),
        None => format!("{label:>12} {:>9} {:>7} {:>3}", "-", "-", xs.len()),
    }
}

fn fem_sweep(alphas: &[f64], ns: &[usize], max_iter: Option<usize>, solver: SolverKind, c: &Common) -> Result<(), Error> {
    let cfg = SweepConfig {
        quad_degree: c.quad_degree,
        solver,
        cg: CgConfig {
            rel_tol: c.cg_tol,
            max_iterations: max_iter,
        },
        ..SweepConfig::default()
    };
    let records = experiment_sweep(alphas, ns, &cfg)?;
    emit(c.out.as_deref(), &sweep_csv(&records))?;

    let mut e = io::stderr().lock();
    for (title, x_of) in [
        ("vs h_max", (|r: &ConvergenceRecord| r.h_max) as fn(&ConvergenceRecord) -> f64),
        ("vs R_max", |r: &ConvergenceRecord| r.r_max),
    ] {
        writeln!(e, "h1 error slope {title} (finest half)")?;
        writeln!(e, "{:>12} {:>9} {:>7} {:>3}", "alpha", "slope", "r2", "pts")?;
        for &alpha in alphas {
            let rs: Vec<&ConvergenceRecord> = records.iter().filter(|r| r.alpha == alpha).collect();
            let xs: Vec<f64> = rs.iter().map(|r| x_of(r)).collect();
            let ys: Vec<f64> = rs.iter().map(|r| r.h1).collect();
            writeln!(e, "{}", slope_line(&num(alpha), &xs, &ys))?;
        }
    }
    for &alpha in alphas {
        let rs: Vec<&ConvergenceRecord> = records.iter().filter(|r| r.alpha == alpha).collect();
        let xs: Vec<f64> = rs.iter().map(|r| r.n as f64).collect();
        let ys: Vec<f64> = rs.iter().map(|r| r.h1).collect();
        let verdict = match fit_finest_half(&xs, &ys) {
            Some(f) if f.slope < -0.02 => "converging",
            Some(_) => "not converging: h1 error does not decrease with N",
            None => "inconclusive",
        };
        writeln!(e, "alpha={}: {verdict}", num(alpha))?;
    }
    Ok(())
}

fn lantern(betas: &[f64], n_max: u64, r: f64, h: f64, c: &Common) -> Result<(), Error> {
    let mut e = io::stderr().lock();
    let mut stdout_blocks = Vec::new();
    for &beta in betas {
        let rule = SequenceRule::power(beta)?;
        let rows = match classify_sequence_with(&rule, n_max, r, h) {
            Ok(cls) => {
                writeln!(
                    e,
                    "{rule}: {} (m/n^2 slope {:.4}, R slope {:.4}, A_E slope {:.4}, gap slope {:.4}, equivalence {})",
                    cls.verdict(),
                    cls.ratio_slope,
                    cls.radius_slope,
                    cls.area_slope,
                    cls.gap_slope,
                    if cls.equivalence_holds() { "holds" } else { "VIOLATED" }
                )?;
                cls.rows
            }
            Err(Error::Inconclusive(msg)) => {
                writeln!(e, "warning: inconclusive: {msg}")?;
                sample_ns(n_max)
                    .into_iter()
                    .map(|n| LanternParams::new(rule.m(n), n, r, h).map(|p| lantern_row(&p)))
                    .collect::<Result<_, _>>()?
            }
            Err(err) => return Err(err),
        };
        let csv = lantern_csv(&rows);
        match (&c.out, betas.len()) {
            (Some(path), 1) => fs::write(path, csv)?,
            (Some(path), _) => fs::write(sequence_path(path, beta), csv)?,
            (None, _) => stdout_blocks.push(csv),
        }
    }
    if c.out.is_none() {
        emit(None, &stdout_blocks.join("\n"))?;
    }
    Ok(())
}

fn area(field: FieldName, alphas: &[f64], ns: &[usize], c: &Common) -> Result<(), Error> {
    let f = field_of(field);
    let mut records: Vec<AreaRecord> = Vec::new();
    let mut e = io::stderr().lock();
    for &alpha in alphas {
        let rep = area_convergence_study(&AreaStudy::new(f.as_ref(), alpha, ns.to_vec()))?;
        let slope = |fit: Option<crcond_core::rate::RateFit>| fit.map(|f| format!("{:.4}", f.slope)).unwrap_or("-".into());
        writeln!(
            e,
            "{} alpha={}: {} (exact {} from {}; gap slope vs R_max {}, vs N {}; bound {})",
            f.name(),
            num(alpha),
            rep.verdict,
            num(rep.exact.value),
            rep.exact.provenance,
            slope(rep.gap_vs_r),
            slope(rep.gap_vs_n),
            if rep.records.iter().all(|r| r.within_bound()) { "holds" } else { "VIOLATED" }
        )?;
        records.extend(rep.records);
    }
    emit(c.out.as_deref(), &area_csv(&records))?;
    Ok(())
}

fn interp_audit(p: NormExponent, alphas: &[f64], ns: &[usize], random: usize, c: &Common) -> Result<(), Error> {
    let opts = InterpOptions {
        rule: TriangleRule::with_degree(c.quad_degree)?,
        ..InterpOptions::default()
    };
    let mut meshes = Vec::new();
    for &alpha in alphas {
        for &n in ns {
            meshes.push(AuditMesh {
                id: format!("aniso-a{}-n{n}", num(alpha)),
                alpha: Some(alpha),
                n: Some(n),
                mesh: gen_aniso_capped(n, alpha, DEFAULT_TRIANGLE_CAP)?,
            });
        }
    }
    let v = Paraboloid;
    let mut table = bound_audit(&v, &meshes, p, &opts)?;
    let tris = random_triangles(random, c.seed);
    table
        .rows
        .extend(bound_audit_triangles(&v, &tris, &format!("random-s{}", c.seed), p, &opts)?.rows);
    emit(c.out.as_deref(), &audit_csv(&table))?;

    let mut e = io::stderr().lock();
    writeln!(e, "p={p}: {} elements audited", table.rows.len())?;
    if let Some(mc) = table.max_ratio_c() {
        writeln!(e, "max ratio_C = {}", num(mc))?;
    }
    writeln!(e, "max ratio_R = {}", num(table.max_ratio_r()))?;
    writeln!(e, "C(K) < R_K on every element: {}", table.kobayashi_below_circumradius())?;
    Ok(())
}

fn mesh(n: usize, alpha: f64, c: &Common) -> Result<(), Error> {
    let m = gen_aniso_capped(n, alpha, DEFAULT_TRIANGLE_CAP)?;
    let report = validate(&m)?;
    let mut buf = Vec::new();
    write_mesh(&m, &mut buf)?;
    match &c.out {
        Some(path) => fs::write(path, buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    let q = report.quality;
    writeln!(
        io::stderr().lock(),
        "{} vertices, {} triangles; h_max {}, R_max {}, max angle {}, min angle {}",
        m.num_vertices(),
        m.num_triangles(),
        num(q.h_max),
        num(q.r_max),
        num(q.theta_max_global),
        num(q.theta_min_global)
    )?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::FemSweep {
            alphas,
            ns,
            max_iter,
            solver,
            common,
        } => fem_sweep(&alphas, &ns, max_iter, solver, &common),
        Command::Lantern {
            beta,
            n_max,
            radius,
            height,
            common,
        } => lantern(&beta, n_max, radius, height, &common),
        Command::Area {
            field,
            alphas,
            ns,
            common,
        } => area(field, &alphas, &ns, &common),
        Command::InterpAudit {
            p,
            alphas,
            ns,
            random,
            common,
        } => interp_audit(p, &alphas, &ns, random, &common),
        Command::Mesh { n, alpha, common } => mesh(n, alpha, &common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
