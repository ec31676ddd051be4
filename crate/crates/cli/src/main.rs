//! `sqgpatch`: run α-SQG patch scenarios, evaluate kernels, inspect snapshots.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use sqg_patch::cde::{velocity_at_point, QuadratureConfig};
use sqg_patch::contour::SobolevIndex;
use sqg_patch::diagnostics::{blowup_bound_t, epsilon0, DiagnosticsConfig, DiagnosticsRecord};
use sqg_patch::evolution::{run, StopReason};
use sqg_patch::kernel::{self, Alpha, KernelConfig, DEFAULT_MAX_IMAGES, DEFAULT_TAIL_TOLERANCE};
use sqg_patch::oracle::{r_alpha_path_integral, velocity_area_integral, AreaQuadratureConfig};
use sqg_patch::scenario::ScenarioConfig;
use sqg_patch::snapshot::Snapshot;
use sqg_patch::svg;
use sqg_patch::PlanePoint;

#[derive(Parser)]
#[command(name = "sqgpatch", version, about = "Contour dynamics for periodic α-SQG patches")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Global {
    /// Override α from the config (or set it for kernel/diagnose).
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Lattice-sum tail tolerance.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "CDE_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a scenario and write snapshots, diagnostics and a plot.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (default: output_dir from the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print G, R, G_p, K and H at a point.
    Kernel {
        #[arg(allow_negative_numbers = true)]
        x1: f64,
        #[arg(allow_negative_numbers = true)]
        x2: f64,
        /// Only R.
        #[arg(long, conflicts_with = "free_only")]
        r_only: bool,
        /// Only the free-space G and K.
        #[arg(long)]
        free_only: bool,
    },
    /// Print the diagnostics of a snapshot file.
    Diagnose {
        snapshot: PathBuf,
        /// Sobolev index m ≥ 3.
        #[arg(long, default_value_t = 3)]
        m: usize,
    },
    /// Compare fast evaluators with the brute-force oracles at a point.
    OracleCheck {
        #[arg(allow_negative_numbers = true)]
        x1: f64,
        #[arg(allow_negative_numbers = true)]
        x2: f64,
        /// Also compare velocity_at_point with the area integral for this
        /// scenario's initial chain.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1024)]
        cells_per_unit: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.cmd {
        Command::Simulate { config, out } => simulate(&cli.global, config, out.as_deref()),
        Command::Kernel {
            x1,
            x2,
            r_only,
            free_only,
        } => kernel_cmd(&cli.global, PlanePoint::new(*x1, *x2), *r_only, *free_only).map(|_| 0),
        Command::Diagnose { snapshot, m } => diagnose(&cli.global, snapshot, *m).map(|_| 0),
        Command::OracleCheck {
            x1,
            x2,
            config,
            cells_per_unit,
        } => oracle_check(&cli.global, PlanePoint::new(*x1, *x2), config.as_deref(), *cells_per_unit),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn kernel_config(g: &Global, default_alpha: f64) -> Result<KernelConfig> {
    let alpha = Alpha::new(g.alpha.unwrap_or(default_alpha))?;
    Ok(KernelConfig::new(
        alpha,
        g.tolerance.unwrap_or(DEFAULT_TAIL_TOLERANCE),
        DEFAULT_MAX_IMAGES,
    )?)
}

fn simulate(g: &Global, config: &Path, out: Option<&Path>) -> Result<u8> {
    let mut cfg = ScenarioConfig::load(config).with_context(|| format!("reading {}", config.display()))?;
    if let Some(a) = g.alpha {
        cfg.alpha = a;
    }
    if let Some(t) = g.tolerance {
        cfg.kernel.tail_tolerance = t;
    }
    cfg.validate()?;
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir.clone());
    let snaps = out.join("snapshots");
    fs::create_dir_all(&snaps).with_context(|| format!("creating {}", snaps.display()))?;

    let field = cfg.velocity_field()?;
    let settings = cfg.run_settings()?;
    let initial = cfg.initial_chain()?;
    let m = settings.sobolev_index.get();

    let mut csv = BufWriter::new(File::create(out.join("diagnostics.csv"))?);
    writeln!(csv, "{}", DiagnosticsRecord::csv_header(m, initial.num_curves()))?;
    let outcome = run(initial.clone(), &field, &settings, &mut |frame| {
        writeln!(csv, "{}", frame.record.csv_row())?;
        Snapshot::from_chain(frame.time, frame.chain).write(&snaps.join(format!("snapshot_{:06}.json", frame.step)))
    });
    csv.flush()?;
    let outcome = outcome?;

    fs::write(
        out.join("contours.svg"),
        svg::render(&[
            svg::Layer {
                chain: &initial,
                color: "steelblue",
                label: "t = 0",
            },
            svg::Layer {
                chain: &outcome.final_chain,
                color: "firebrick",
                label: "final",
            },
        ]),
    )?;

    let drift: Vec<f64> = outcome
        .initial_record
        .area
        .iter()
        .zip(&outcome.final_record.area)
        .map(|(a, b)| ((b - a) / a).abs())
        .collect();
    let code = if outcome.reason == StopReason::Completed { 0 } else { 2 };
    let summary = json!({
        "reason": outcome.reason.to_string(),
        "exit_code": code,
        "final_time": outcome.final_time,
        "steps": outcome.steps,
        "f_ceiling": outcome.f_ceiling,
        "relative_area_drift": drift,
        "f_bound_violations": outcome.f_bound.violations,
        "initial": outcome.initial_record.to_json(),
        "final": outcome.final_record.to_json(),
    });
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    println!(
        "{} at t = {} after {} steps; output in {}",
        outcome.reason,
        outcome.final_time,
        outcome.steps,
        out.display()
    );
    Ok(code)
}

fn kernel_cmd(g: &Global, x: PlanePoint, r_only: bool, free_only: bool) -> Result<()> {
    let cfg = kernel_config(g, 0.5)?;
    if r_only {
        println!("R    {:.16e}", kernel::r_alpha(x, &cfg)?);
        return Ok(());
    }
    let gf = kernel::green_free(x, &cfg)?;
    let kf = kernel::k_free(x, &cfg)?;
    println!("G    {gf:.16e}");
    println!("K    {:.16e} {:.16e}", kf.x1, kf.x2);
    if free_only {
        return Ok(());
    }
    let h = kernel::h_alpha(x, &cfg)?;
    println!("R    {:.16e}", kernel::r_alpha(x, &cfg)?);
    println!("G_p  {:.16e}", kernel::green_periodic(x, &cfg)?);
    println!("H    {:.16e} {:.16e}", h.x1, h.x2);
    Ok(())
}

fn diagnose(g: &Global, path: &Path, m: usize) -> Result<()> {
    let snap = Snapshot::read(path).with_context(|| format!("reading {}", path.display()))?;
    let chain = snap.to_chain()?;
    let alpha = Alpha::new(g.alpha.unwrap_or(0.5))?;
    let m = SobolevIndex::new(m)?;
    let rec = DiagnosticsRecord::compute(&chain, snap.time, alpha, m, &DiagnosticsConfig::default())?;
    let s0 = rec.energy_s;
    let t_star = blowup_bound_t(s0, m.get(), 1.0);
    let eps0 = epsilon0(&chain, 1.0).ok();
    let mut j = rec.to_json();
    j["T_star_C1"] = json!(if t_star.is_finite() { Some(t_star) } else { None });
    j["epsilon0_C1"] = json!(eps0.filter(|v| v.is_finite()));
    println!("{}", serde_json::to_string_pretty(&j)?);
    println!("T* (C = 1)  {t_star:e}");
    match eps0 {
        Some(e) => println!("ε₀ (C = 1)  {e:e}"),
        None => println!("ε₀ (C = 1)  undefined"),
    }
    println!("{}", DiagnosticsRecord::csv_header(m.get(), chain.num_curves()));
    println!("{}", rec.csv_row());
    Ok(())
}

fn oracle_check(g: &Global, x: PlanePoint, config: Option<&Path>, cells: usize) -> Result<u8> {
    let mut ok = true;
    let cfg = match config {
        Some(p) => {
            let mut c = ScenarioConfig::load(p).with_context(|| format!("reading {}", p.display()))?;
            if let Some(a) = g.alpha {
                c.alpha = a;
            }
            Some(c)
        }
        None => None,
    };
    let alpha = g.alpha.or(cfg.as_ref().map(|c| c.alpha)).unwrap_or(0.5);
    let kcfg = kernel_config(g, alpha)?;

    let fast = kernel::r_alpha(x, &kcfg)?;
    let slow = r_alpha_path_integral(x, alpha, 1e-10)?;
    let err = (fast - slow).abs();
    ok &= err <= 1e-6;
    println!("R series    {fast:.16e}");
    println!("R path      {slow:.16e}");
    println!("|diff|      {err:.3e} (limit 1e-6)");

    if let Some(c) = cfg {
        let chain = c.initial_chain()?;
        let u = velocity_at_point(x, &chain, &kcfg, &QuadratureConfig::default())?;
        let area = AreaQuadratureConfig {
            cells_per_unit: cells,
            ..Default::default()
        };
        let v = velocity_area_integral(x, &chain, alpha, &area)?;
        let rel = (u - v).norm() / u.norm().max(f64::MIN_POSITIVE);
        ok &= rel <= 1e-3;
        println!("u boundary  {:.16e} {:.16e}", u.x1, u.x2);
        println!("u area      {:.16e} {:.16e}", v.x1, v.x2);
        println!("rel diff    {rel:.3e} (limit 1e-3)");
    }
    if !ok {
        bail!("fast and oracle values disagree");
    }
    Ok(0)
}
