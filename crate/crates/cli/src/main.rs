//! Command-line driver: mesh generation, certification runs, sweeps.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use weierstrass::domain::{build_domain_with, GridSpec, SplitRule};
use weierstrass::export::{
    write_blowup_csv, write_convergence_csv, write_mesh, write_r0_csv, write_report, MeshFormat,
};
use weierstrass::geometry::{blowup_sweep, gauss_curvature};
use weierstrass::mesh::{build_helicoid_mesh, build_mesh_on, clip_to_ball};
use weierstrass::verify::{check_convergence, Verifier};
use weierstrass::Complex;
use weierstrass::ConstructionParams;

#[derive(Parser)]
#[command(
    name = "weierstrass",
    about = "Minimal disks with prescribed curvature concentration: generation, certification, sweeps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Comma-separated marked heights b_1 < ... < b_n in (-1/2, 1/2).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    points: Vec<f64>,

    /// Pinch parameter in (0, 1/2].
    #[arg(long)]
    a: Option<f64>,

    /// Columns per domain piece.
    #[arg(long)]
    nx: Option<usize>,

    /// Samples per column (odd).
    #[arg(long)]
    ny: Option<usize>,

    /// Absolute quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,

    /// Off-axis margin for curvature suprema and compact regions.
    #[arg(long)]
    delta: Option<f64>,

    /// Helicoid oracle mode (h(z) = z on a rectangle).
    #[arg(long)]
    helicoid: bool,

    /// Corrupt the integrator's height output by eps*y (negative control).
    #[arg(long, hide = true)]
    inject_fault: Option<f64>,
}

impl CommonOpts {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg: RunConfig = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
            None => RunConfig::default(),
        };
        if !self.points.is_empty() {
            cfg.points = self.points.clone();
        }
        if let Some(a) = self.a {
            cfg.a = Some(a);
        }
        if let Some(nx) = self.nx {
            cfg.grid.nx = nx;
        }
        if let Some(ny) = self.ny {
            cfg.grid.ny = ny;
        }
        if let Some(tol) = self.tol {
            cfg.quad.abs_tol = tol;
        }
        if let Some(delta) = self.delta {
            cfg.delta = delta;
        }
        if self.helicoid {
            cfg.helicoid = true;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a surface mesh and write it to disk.
    Generate {
        #[command(flatten)]
        common: CommonOpts,

        /// Output mesh path (.obj or .ply).
        #[arg(long)]
        out: Option<PathBuf>,

        /// Write PLY in binary little-endian instead of ASCII.
        #[arg(long)]
        ply_binary: bool,

        /// Clip to the ball of radius min(r0/2, 1/4).
        #[arg(long)]
        clip: bool,
    },
    /// Run the certification suite and write a JSON report.
    Verify {
        #[command(flatten)]
        common: CommonOpts,

        /// Report output path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sweep the pinch parameter: curvature blowup, convergence, r0 tables.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,

        /// Comma-separated decreasing pinch values.
        #[arg(long, value_delimiter = ',')]
        a_list: Vec<f64>,

        /// Also tabulate r0 against the number of marked heights.
        #[arg(long)]
        r0_vs_n: bool,

        /// Largest point count for --r0-vs-n.
        #[arg(long, default_value_t = 4)]
        n_max: usize,

        /// Output directory for the CSV files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn init_threads() {
    #[cfg(feature = "parallel")]
    if let Ok(value) = std::env::var("WEIERSTRASS_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

fn require_params(cfg: &RunConfig) -> Result<ConstructionParams> {
    if cfg.points.is_empty() {
        bail!("no marked heights: pass --points (or --helicoid for oracle mode)");
    }
    let a = cfg
        .a
        .ok_or_else(|| anyhow::anyhow!("missing pinch parameter: pass --a"))?;
    ConstructionParams::new(cfg.points.clone(), a).context("validating construction parameters")
}

fn cmd_generate(
    common: &CommonOpts,
    out: Option<PathBuf>,
    ply_binary: bool,
    clip: bool,
) -> Result<()> {
    let mut cfg = common.resolve()?;
    if clip {
        cfg.clip = true;
    }
    let out = out
        .or_else(|| cfg.outputs.get("mesh").cloned())
        .ok_or_else(|| anyhow::anyhow!("no output path: pass --out"))?;
    let grid = cfg.grid.to_grid();

    let mut mesh = if cfg.helicoid {
        build_helicoid_mesh((-1.0, 1.0), (-1.0, 1.0), &grid, &cfg.quad)
            .context("building helicoid mesh")?
    } else {
        let params = require_params(&cfg)?;
        let rule = if cfg.half_gap_splits {
            SplitRule::HalfGap
        } else {
            SplitRule::Midpoint
        };
        let spec = build_domain_with(&params, rule).context("building domain")?;
        build_mesh_on(&spec, &grid, &cfg.quad).context("building surface mesh")?
    };

    let mut summary = vec![format!("vertices: {}", mesh.vertices.len())];
    if !cfg.helicoid {
        let params = require_params(&cfg)?;
        if cfg.clip {
            let verifier =
                Verifier::new(&params, &grid, &cfg.quad).context("preparing separation scan")?;
            let (_, sep) = verifier
                .check_separation()
                .context("estimating separation radius")?;
            let radius = (sep.r0 / 2.0).min(0.25);
            mesh = clip_to_ball(&mesh, radius);
            summary.push(format!("r0_estimate: {:.6}", sep.r0));
            summary.push(format!("clip_radius: {radius:.6}"));
            summary.push(format!("vertices_after_clip: {}", mesh.vertices.len()));
        }
        for (j, &b) in params.points.iter().enumerate() {
            let c = gauss_curvature(&params, Complex::new(b, 0.0))
                .context("evaluating curvature at a marked height")?;
            summary.push(format!("K(b_{}) = {:.4e}", j + 1, c.k));
        }
    }

    let format = match MeshFormat::from_path(&out).context("choosing mesh format")? {
        MeshFormat::PlyAscii if ply_binary => MeshFormat::PlyBinary,
        f => f,
    };
    write_mesh(&mesh, format, &out)
        .with_context(|| format!("writing mesh to {}", out.display()))?;
    println!("wrote {}", out.display());
    for line in summary {
        println!("{line}");
    }
    Ok(())
}

fn cmd_verify(common: &CommonOpts, report_path: Option<PathBuf>) -> Result<bool> {
    let cfg = common.resolve()?;
    let params = require_params(&cfg)?;
    let grid = cfg.grid.to_grid();
    let mut verifier =
        Verifier::new(&params, &grid, &cfg.quad).context("preparing verification")?;
    if let Some(eps) = common.inject_fault {
        verifier = verifier.with_axis_fault(eps);
    }
    if let Some(tol) = cfg.convergence_tolerance {
        verifier = verifier.with_convergence_tolerance(tol);
    }
    let report = verifier.run_all().context("running checks")?;

    for check in &report.checks {
        println!(
            "{}: {} (margin {:.3e}, tolerance {:.3e})",
            check.name,
            if check.pass { "pass" } else { "FAIL" },
            check.margin,
            check.tolerance
        );
    }
    let path = report_path
        .or_else(|| cfg.outputs.get("report").cloned())
        .unwrap_or_else(|| PathBuf::from("verification.json"));
    write_report(&report, &path)
        .with_context(|| format!("writing report to {}", path.display()))?;
    println!("report: {}", path.display());
    Ok(report.all_passed())
}

fn cmd_sweep(
    common: &CommonOpts,
    a_list: &[f64],
    r0_vs_n: bool,
    n_max: usize,
    out_dir: &PathBuf,
) -> Result<()> {
    let mut cfg = common.resolve()?;
    if !a_list.is_empty() {
        cfg.sweep = Some(a_list.to_vec());
    }
    let sweep = cfg
        .sweep
        .clone()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| anyhow::anyhow!("empty sweep: pass --a-list"))?;
    if cfg.points.is_empty() {
        bail!("no marked heights: pass --points");
    }
    for w in sweep.windows(2) {
        if !(w[0] > w[1]) {
            bail!(
                "sweep values must decrease strictly, got {} then {}",
                w[0],
                w[1]
            );
        }
    }
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let echo = cfg.echo();

    // Curvature blowup and off-axis boundedness.
    let blowup =
        blowup_sweep(&cfg.points, &sweep, cfg.delta).context("running curvature sweep")?;
    let blowup_path = out_dir.join("blowup.csv");
    write_blowup_csv(&blowup, &echo, &blowup_path).context("writing blowup CSV")?;
    for j in 0..cfg.points.len() {
        println!(
            "slope log|K(b_{})| vs log(1/a): {:.4} (last decade {:.4})",
            j + 1,
            blowup.blowup_slope(j),
            blowup.blowup_slope_last_decade(j)
        );
    }
    if let Some(s) = blowup.off_axis_stabilization() {
        println!("off-axis sup stabilization (two smallest a): {:.4}", s);
    }

    // Convergence differences on the compact region.
    if sweep.len() >= 3 {
        let conv = check_convergence(
            &cfg.points,
            &sweep,
            cfg.delta,
            &GridSpec::new(cfg.grid.nx.min(64), 7),
            &cfg.quad,
            1e-3,
            cfg.convergence_tolerance.unwrap_or(f64::INFINITY),
        )
        .context("running convergence sweep")?;
        let conv_path = out_dir.join("convergence.csv");
        write_convergence_csv(&conv, &echo, &conv_path).context("writing convergence CSV")?;
        println!(
            "convergence sup-differences: {}",
            conv.pairs
                .iter()
                .map(|p| format!("{:.2e}", p.sup_f))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }

    // Separation radius against a.
    let grid = cfg.grid.to_grid();
    let mut r0_rows = Vec::new();
    for &a in &sweep {
        let params = ConstructionParams::new(cfg.points.clone(), a)
            .context("validating sweep parameters")?;
        let verifier = Verifier::new(&params, &grid, &cfg.quad)?;
        let (_, sep) = verifier.check_separation()?;
        r0_rows.push((a, sep.r0));
    }
    write_r0_csv("a", &r0_rows, &echo, &out_dir.join("r0_vs_a.csv"))
        .context("writing r0-vs-a CSV")?;

    // Optional: separation radius against the number of marked heights,
    // equally spaced across (-0.3, 0.3), at the smallest sweep a.
    if r0_vs_n {
        let a = *sweep.last().unwrap();
        let mut rows = Vec::new();
        for n in 1..=n_max {
            let points: Vec<f64> = if n == 1 {
                vec![0.0]
            } else {
                (0..n)
                    .map(|j| -0.3 + 0.6 * j as f64 / (n - 1) as f64)
                    .collect()
            };
            let params = ConstructionParams::new(points, a)?;
            let verifier = Verifier::new(&params, &grid, &cfg.quad)?;
            let (_, sep) = verifier.check_separation()?;
            rows.push((n as f64, sep.r0));
        }
        write_r0_csv("n", &rows, &echo, &out_dir.join("r0_vs_n.csv"))
            .context("writing r0-vs-n CSV")?;
        println!(
            "r0 vs n: {}",
            rows.iter()
                .map(|(n, r)| format!("n={n}: {r:.5}"))
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    println!("sweep outputs in {}", out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Generate {
            common,
            out,
            ply_binary,
            clip,
        } => cmd_generate(common, out.clone(), *ply_binary, *clip).map(|()| true),
        Command::Verify { common, report } => cmd_verify(common, report.clone()),
        Command::Sweep {
            common,
            a_list,
            r0_vs_n,
            n_max,
            out_dir,
        } => cmd_sweep(common, a_list, *r0_vs_n, *n_max, out_dir).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::FAILURE
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
