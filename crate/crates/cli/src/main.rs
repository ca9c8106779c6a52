mod io;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use ndarray::Array2;
use rtvar::experiments::{add_noise, disk_config, make_disk_problem, remove_lines, remove_pixels, Noise};
use rtvar::field_io::{export_field, import_field};
use rtvar::*;

#[derive(Parser)]
#[command(name = "rtvar", version, about = "Curvature regularization of grayscale images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover a disk from an annulus of unknown pixels.
    Disk {
        #[arg(long, default_value_t = 40)]
        size: usize,
        #[arg(long, default_value_t = 10.0)]
        radius: f64,
        #[arg(long, default_value_t = 10.0)]
        band: f64,
        #[command(flatten)]
        opts: Opts,
    },
    /// Complete a shape inside the unknown region of a mask.
    Complete {
        input: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Simplify a binary shape under a linear force pulling towards it.
    Shapereg {
        input: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Fill in missing pixels, given by a mask or removed at random.
    Inpaint {
        input: PathBuf,
        /// Remove this fraction of image rows instead of reading a mask.
        #[arg(long, conflicts_with_all = ["mask", "remove_pixels"])]
        remove_lines: Option<f64>,
        /// Remove this fraction of pixels instead of reading a mask.
        #[arg(long, conflicts_with = "mask")]
        remove_pixels: Option<f64>,
        /// Write the mask that was used (255 known, 0 unknown).
        #[arg(long)]
        save_mask: Option<PathBuf>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Remove noise, optionally adding synthetic noise first.
    Denoise {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Fidelity::L2)]
        fidelity: Fidelity,
        /// Add zero-mean Gaussian noise with this standard deviation before solving.
        #[arg(long, conflicts_with = "salt_pepper")]
        gaussian: Option<f64>,
        /// Set this fraction of pixels to black or white before solving.
        #[arg(long)]
        salt_pepper: Option<f64>,
        /// Write the noisy input.
        #[arg(long)]
        save_noisy: Option<PathBuf>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Recompute the diagnostics line from an exported field.
    Diagnose { field: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Fidelity {
    L1,
    L2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Tac,
    Trv,
    Tsc,
}

#[derive(Args)]
struct Opts {
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    ntheta: Option<usize>,
    /// Data fidelity weight.
    #[arg(long)]
    lambda: Option<f64>,
    /// Iteration budget.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, default_value_t = 1e-3)]
    tol_div: f64,
    #[arg(long, default_value_t = 1e-3)]
    tol_cons: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Primal step multiplier; dual steps are divided by it.
    #[arg(long)]
    step_balance: Option<f64>,
    /// Output image (.png or .pgm).
    #[arg(short, long, default_value = "out.png")]
    output: PathBuf,
    /// Averaged field as CSV.
    #[arg(long)]
    export_field: Option<PathBuf>,
    /// Known pixels are 255, unknown ones 0.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Pixels at 255 pin the spatial flux between them to zero.
    #[arg(long)]
    field_mask: Option<PathBuf>,
    /// Convergence history as CSV.
    #[arg(long)]
    report: Option<PathBuf>,
}

struct Defaults {
    model: ModelArg,
    alpha: f64,
    ntheta: usize,
    lambda: f64,
}

struct Job {
    u0: Img,
    grid: Grid,
    model: Model,
    term: Term,
    config: Config,
}

impl Opts {
    fn model(&self, d: &Defaults) -> Result<Model> {
        let alpha = self.alpha.unwrap_or(d.alpha);
        let m = match self.model.unwrap_or(d.model) {
            ModelArg::Tac => CurvatureModel::tac(alpha),
            ModelArg::Trv => CurvatureModel::trv(alpha),
            ModelArg::Tsc => CurvatureModel::tsc(alpha),
        };
        Ok(m?)
    }

    fn grid(&self, img: &Img, d: &Defaults) -> Result<Grid> {
        Ok(Grid::unit(img.width(), img.height(), self.ntheta.unwrap_or(d.ntheta))?)
    }

    fn config(&self, base: Config, grid: &Grid) -> Result<Config> {
        let mut c = base;
        if let Some(n) = self.iters {
            c.max_iters = n;
        }
        if let Some(b) = self.step_balance {
            c.step_balance = b;
        }
        c.tol_div = self.tol_div;
        c.tol_consistency = self.tol_cons;
        c.seed = self.seed;
        if let Some(p) = &self.field_mask {
            let pinned = io::read_mask(p, (grid.n2(), grid.n1()))?;
            c.field_mask = Some(FieldMask::from_pixels(&pinned, grid)?);
        }
        c.validate(grid)?;
        Ok(c)
    }

    fn reject_mask(&self, cmd: &str) -> Result<()> {
        if self.mask.is_some() {
            bail!("--mask is not used by `{cmd}`");
        }
        Ok(())
    }

    fn ignore_lambda(&self, cmd: &str) {
        if self.lambda.is_some() {
            warn!("--lambda has no effect on `{cmd}`");
        }
    }

    fn known_mask(&self, img: &Img) -> Result<Array2<bool>> {
        match &self.mask {
            Some(p) => io::read_mask(p, img.values.dim()),
            None => bail!("a --mask is required"),
        }
    }
}

fn inpaint_term(img: Img, known: &Array2<bool>) -> Result<Term> {
    Ok(Term::inpaint(img, known.mapv(|k| !k))?)
}

fn build(cmd: Command) -> Result<Job> {
    match cmd {
        Command::Disk {
            size,
            radius,
            band,
            opts,
        } => {
            opts.reject_mask("disk")?;
            opts.ignore_lambda("disk");
            let d = Defaults {
                model: ModelArg::Tsc,
                alpha: 10.0,
                ntheta: 64,
                lambda: 0.0,
            };
            let p = make_disk_problem(
                size,
                radius,
                band,
                opts.alpha.unwrap_or(d.alpha),
                opts.ntheta.unwrap_or(d.ntheta),
            )?;
            let term = p.term()?;
            Ok(Job {
                u0: term.initial_image(),
                model: opts.model(&d)?,
                config: opts.config(disk_config(), &p.grid)?,
                grid: p.grid,
                term,
            })
        }
        Command::Complete { input, opts } => {
            opts.ignore_lambda("complete");
            let d = Defaults {
                model: ModelArg::Tac,
                alpha: 15.0,
                ntheta: 64,
                lambda: 0.0,
            };
            let img = io::read_image(&input)?;
            let known = opts.known_mask(&img)?;
            let grid = opts.grid(&img, &d)?;
            let term = inpaint_term(img, &known)?;
            Ok(Job {
                u0: term.initial_image(),
                model: opts.model(&d)?,
                config: opts.config(Config::default(), &grid)?,
                grid,
                term,
            })
        }
        Command::Shapereg { input, opts } => {
            opts.reject_mask("shapereg")?;
            let d = Defaults {
                model: ModelArg::Tsc,
                alpha: 10.0,
                ntheta: 32,
                lambda: 4.0,
            };
            let img = io::read_image(&input)?;
            let grid = opts.grid(&img, &d)?;
            let term = Term::shape_force(&img, opts.lambda.unwrap_or(d.lambda))?;
            Ok(Job {
                u0: term.initial_image(),
                model: opts.model(&d)?,
                config: opts.config(Config::default(), &grid)?,
                grid,
                term,
            })
        }
        Command::Inpaint {
            input,
            remove_lines: lines,
            remove_pixels: pixels,
            save_mask,
            opts,
        } => {
            opts.ignore_lambda("inpaint");
            let d = Defaults {
                model: ModelArg::Tsc,
                alpha: 10.0,
                ntheta: 32,
                lambda: 0.0,
            };
            let img = io::read_image(&input)?;
            let (w, h) = (img.width(), img.height());
            let known = match (lines, pixels) {
                (Some(f), _) => remove_lines(w, h, f, opts.seed)?.mapv(|free| !free),
                (_, Some(f)) => remove_pixels(w, h, f, opts.seed)?.mapv(|free| !free),
                _ => opts.known_mask(&img)?,
            };
            if let Some(p) = &save_mask {
                io::write_mask(p, &known)?;
            }
            let grid = opts.grid(&img, &d)?;
            let term = inpaint_term(img, &known)?;
            Ok(Job {
                u0: term.initial_image(),
                model: opts.model(&d)?,
                config: opts.config(Config::default(), &grid)?,
                grid,
                term,
            })
        }
        Command::Denoise {
            input,
            fidelity,
            gaussian,
            salt_pepper,
            save_noisy,
            opts,
        } => {
            opts.reject_mask("denoise")?;
            let lambda = match fidelity {
                Fidelity::L1 => 7.0,
                Fidelity::L2 => 40.0,
            };
            let d = Defaults {
                model: ModelArg::Tsc,
                alpha: 10.0,
                ntheta: 32,
                lambda,
            };
            let mut img = io::read_image(&input)?;
            if let Some(stddev) = gaussian {
                img = add_noise(&img, Noise::Gaussian { stddev }, opts.seed)?;
            }
            if let Some(fraction) = salt_pepper {
                img = add_noise(&img, Noise::SaltPepper { fraction }, opts.seed)?;
            }
            if let Some(p) = &save_noisy {
                io::write_image(p, &img)?;
            }
            let grid = opts.grid(&img, &d)?;
            let lambda = opts.lambda.unwrap_or(d.lambda);
            let term = match fidelity {
                Fidelity::L1 => Term::l1(img.clone(), lambda)?,
                Fidelity::L2 => Term::l2(img.clone(), lambda)?,
            };
            Ok(Job {
                u0: img,
                model: opts.model(&d)?,
                config: opts.config(Config::default(), &grid)?,
                grid,
                term,
            })
        }
        Command::Diagnose { .. } => unreachable!("handled before building a job"),
    }
}

fn print_diagnostics(d: &Diagnostics<f64>) {
    println!(
        "H_TV={} H_AC={} H_SC={} sc_singular={}",
        d.h_tv, d.h_ac, d.h_sc, d.sc_singular
    );
}

/// Grid dimensions implied by the largest indices in a field file.
fn field_grid(path: &Path) -> Result<Grid> {
    let f = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut max = [0usize; 3];
    for line in BufReader::new(f).lines().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for (m, c) in max.iter_mut().zip(line.split(',')) {
            *m = (*m).max(c.trim().parse().with_context(|| format!("bad index in `{line}`"))?);
        }
    }
    Ok(Grid::unit(max[0] + 2, max[1] + 2, max[2] + 1)?)
}

fn run(cmd: Command) -> Result<ExitCode> {
    if let Command::Diagnose { field } = &cmd {
        let grid = field_grid(field)?;
        let avg = import_field(field, &grid)?;
        print_diagnostics(&diagnostics(&avg, &grid)?);
        return Ok(ExitCode::SUCCESS);
    }
    let (output, export, report) = match &cmd {
        Command::Disk { opts, .. }
        | Command::Complete { opts, .. }
        | Command::Shapereg { opts, .. }
        | Command::Inpaint { opts, .. }
        | Command::Denoise { opts, .. } => (opts.output.clone(), opts.export_field.clone(), opts.report.clone()),
        Command::Diagnose { .. } => unreachable!(),
    };
    let job = build(cmd)?;
    if job.term.is_unconstrained() {
        warn!("the data term ties no pixel to the input; the solution is not unique");
    }
    info!(
        "{}x{}x{} grid, {} alpha={}",
        job.grid.n1(),
        job.grid.n2(),
        job.grid.ntheta(),
        job.model.kind(),
        job.model.alpha()
    );
    let sol = solve(&job.u0, &job.grid, &job.model, &job.term, &job.config)?;
    io::write_image(&output, &sol.u)?;
    if let Some(p) = &report {
        sol.report
            .write_csv(File::create(p).with_context(|| format!("writing {}", p.display()))?)?;
    }
    let avg = apply_averaging(&sol.sigma, &job.grid)?;
    if let Some(p) = &export {
        export_field(&avg, &job.grid, p)?;
    }
    print_diagnostics(&diagnostics(&avg, &job.grid)?);
    if let Some(last) = sol.report.last() {
        println!(
            "iterations={} energy={:e} div_res={:e} cons_res={:e} converged={}",
            sol.report.iterations, last.energy, last.div_residual, last.consistency_residual, sol.report.converged
        );
    }
    Ok(if sol.report.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
