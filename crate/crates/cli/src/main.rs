//! `metagabor`: metaplectic Wigner distributions, atoms and Gabor frames
//! from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration or usage
//! error, 3 numerical failure, 4 not a frame.

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use metagabor::frames::{
    build_system, coverage_warning, frame_bounds, frame_reconstruct, theorem_main_check, AtomKind,
};
use metagabor::grid::Grid1D;
use metagabor::io::{read_signal, write_signal, write_tf_array};
use metagabor::spaces::{amalgam_mixed_norm, amalgam_norm, mixed_norm, modulation_norm, Exponent, NormSpec, Weight};
use metagabor::symplectic::{try_factor, FactorizationJson, SymplecticMatrix, WignerFactorization};
use metagabor::tfr::wigner_metaplectic;
use metagabor::verify::{run_suite, SUITES};
use metagabor::window::Window;
use metagabor::Error;

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "metagabor", version, about = "Metaplectic Wigner distributions, atoms and Gabor frames")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration ("schema": "1"); flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Distribution: stft, tau:<tau> (tau != 0, 1) or custom (C, E from the config).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Number of signal-grid nodes (power of two, at least 16).
    #[arg(long = "grid-n", global = true)]
    grid_n: Option<usize>,
    /// Length L of the signal grid [-L/2, L/2).
    #[arg(long = "grid-length", global = true)]
    grid_length: Option<f64>,
    /// Analysis window g: gaussian[:sigma], hermite:<m>[:sigma], chirp:<c>[:sigma].
    #[arg(long = "analysis-window", global = true)]
    analysis_window: Option<String>,
}

#[derive(Args, Debug, Default)]
struct Input {
    /// Analyzed signal given as a window descriptor (gaussian[:sigma], hermite:<m>[:sigma], chirp:<c>[:sigma], zero).
    #[arg(long)]
    window: Option<String>,
    /// Analyzed signal read from a CSV file with header x,re,im.
    #[arg(long, conflicts_with = "window")]
    signal: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct LatticeArgs {
    /// Time step a of the lattice aZ x bZ.
    #[arg(long)]
    a: Option<f64>,
    /// Frequency step b of the lattice aZ x bZ.
    #[arg(long)]
    b: Option<f64>,
    /// Keep lattice points with max(|x|, |xi|) <= radius.
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute W_A(f, g) on the time-frequency grid and write it as CSV.
    Analyze {
        #[command(flatten)]
        input: Input,
        /// CSV destination (x,xi,re,im[,abs]); stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Add an abs column with |W_A(f, g)|.
        #[arg(long = "dump-modulus")]
        dump_modulus: bool,
        /// Nodes per axis of the time-frequency grid (defaults to the signal grid).
        #[arg(long = "tf-n")]
        tf_n: Option<usize>,
    },
    /// Frame bounds of the metaplectic (or classical) Gabor system.
    FrameBounds {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Use classical atoms M_xi T_x g instead of pi_A(x, xi) g.
        #[arg(long)]
        classical: bool,
    },
    /// Compare a metaplectic system with its classical counterpart.
    TheoremMain {
        #[command(flatten)]
        lattice: LatticeArgs,
    },
    /// Run an invariant suite and print one JSON line per check.
    Verify {
        /// One of symplectic, grid, moyal, atoms, covariance, frames, norms, all.
        suite: String,
    },
    /// Reconstruct a signal from its frame coefficients with the dual window.
    Reconstruct {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        lattice: LatticeArgs,
        /// CSV destination for the reconstruction (x,re,im).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Factor a 4x4 symplectic matrix as V_C A_FT2 D_E.
    Factor {
        /// JSON file holding the matrix as rows, or {"A": rows}.
        matrix: PathBuf,
    },
    /// Modulation (or Wiener amalgam) norm of a signal.
    Norm {
        #[command(flatten)]
        input: Input,
        /// Inner exponent p (number or inf).
        #[arg(long)]
        p: Option<String>,
        /// Outer exponent q (number or inf).
        #[arg(long)]
        q: Option<String>,
        /// Polynomial weight exponent s of v_s(z) = (1 + |z|)^s.
        #[arg(long)]
        s: Option<f64>,
        /// Wiener amalgam norm (inner integral over frequency).
        #[arg(long)]
        amalgam: bool,
        /// Use |W_A(f, g)| for the preset instead of the STFT.
        #[arg(long)]
        metaplectic: bool,
    },
}

struct Ctx {
    cfg: RunConfig,
    common: Common,
}

impl Ctx {
    fn grid(&self) -> anyhow::Result<Grid1D> {
        let n = self.common.grid_n.or(self.cfg.grid.n).unwrap_or(256);
        let length = self.common.grid_length.or(self.cfg.grid.length).unwrap_or(16.0);
        config::build_grid(n, length)
    }

    fn factorization(&self) -> anyhow::Result<WignerFactorization> {
        let preset = self
            .common
            .preset
            .clone()
            .or_else(|| self.cfg.preset.clone())
            .unwrap_or_else(|| "stft".into());
        config::resolve_factorization(&preset, self.cfg.c.as_ref(), self.cfg.e.as_ref())
    }

    fn analysis_window(&self) -> anyhow::Result<Window> {
        let desc = self
            .common
            .analysis_window
            .clone()
            .or_else(|| self.cfg.analysis_window.clone())
            .unwrap_or_else(|| "gaussian".into());
        config::parse_window(&desc)
    }

    fn input(&self, input: &Input) -> anyhow::Result<Window> {
        if let Some(path) = input.signal.as_ref().or(self.cfg.signal.as_ref()).filter(|_| input.window.is_none()) {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            return Ok(Window::sampled(read_signal(file)?));
        }
        let desc = input.window.clone().or_else(|| self.cfg.window.clone()).unwrap_or_else(|| "gaussian".into());
        config::parse_window(&desc)
    }

    fn lattice(&self, args: &LatticeArgs) -> anyhow::Result<metagabor::frames::Lattice> {
        config::lattice(
            args.a.or(self.cfg.lattice.a).unwrap_or(1.0),
            args.b.or(self.cfg.lattice.b).unwrap_or(0.5),
            args.radius.or(self.cfg.lattice.radius).unwrap_or(8.0),
        )
    }

    fn output(&self, flag: &Option<PathBuf>) -> Option<PathBuf> {
        flag.clone().or_else(|| self.cfg.output.clone())
    }
}

fn open_output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn parse_exponent(text: Option<&String>, fallback: Option<Exponent>) -> anyhow::Result<Exponent> {
    match text {
        Some(t) => Ok(serde_json::from_value(json!(t)).or_else(|_| -> anyhow::Result<Exponent> {
            let p: f64 = t.parse().with_context(|| format!("bad exponent {t:?}"))?;
            Ok(Exponent::new(p)?)
        })?),
        None => Ok(fallback.unwrap_or(Exponent(2.0))),
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let cfg = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig { schema: config::SCHEMA.into(), ..Default::default() },
    };
    let ctx = Ctx { cfg, common: cli.common };
    // configuration problems surface before any computation
    let grid = ctx.grid()?;
    let fac = ctx.factorization()?;
    let g = ctx.analysis_window()?;

    match cli.command {
        Command::Analyze { input, output, dump_modulus, tf_n } => {
            let f = ctx.input(&input)?;
            let grid = match &f {
                Window::Sampled(s) => *s.grid(),
                Window::Analytic(_) => grid,
            };
            let tf = config::tf_grid(&grid, tf_n.or(ctx.cfg.tf.n))?;
            let w = wigner_metaplectic(&f, &g, &fac, &tf)?;
            let energy = w.l2_norm().powi(2);
            let out = ctx.output(&output);
            let mut sink = open_output(&out)?;
            write_tf_array(&w, &mut sink, dump_modulus)?;
            sink.flush()?;
            let (i, j, v) = w.argmax_abs();
            let summary = json!({
                "energy": energy,
                "max_abs": v.norm(),
                "argmax": [tf.x.node(i), tf.xi.node(j)],
            });
            if out.is_some() {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
        }
        Command::FrameBounds { lattice, classical } => {
            let lattice = ctx.lattice(&lattice)?;
            let kind = if classical { AtomKind::Classical } else { AtomKind::Metaplectic(fac) };
            let sys = build_system(&g, &lattice, kind, &grid)?;
            let fb = frame_bounds(&sys)?;
            println!(
                "{}",
                json!({"A": fb.lower, "B": fb.upper, "frame": fb.is_frame(), "atoms": sys.len(), "method": fb.method})
            );
        }
        Command::TheoremMain { lattice } => {
            let lattice = ctx.lattice(&lattice)?;
            let report = theorem_main_check(&fac, &g, &lattice, &grid)?;
            let mut value = serde_json::to_value(&report)?;
            value["observed_ratio"] = json!(report.ratio);
            value["passed"] = json!(report.passed());
            println!("{value}");
            if let Some(w) = &report.warning {
                eprintln!("warning: {w}");
            }
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Verify { suite } => {
            if suite != "all" && !SUITES.contains(&suite.as_str()) {
                return Err(Error::UnknownSuite(suite).into());
            }
            let results = run_suite(&suite, &grid)?;
            let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.check.as_str()).collect();
            let mut out = io::stdout().lock();
            for r in &results {
                writeln!(out, "{}", serde_json::to_string(r)?)?;
            }
            writeln!(
                out,
                "{}",
                json!({"suite": suite, "checks": results.len(), "failed": failed, "passed": failed.is_empty()})
            )?;
            if !failed.is_empty() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Reconstruct { input, lattice, output } => {
            let f = ctx.input(&input)?;
            let grid = match &f {
                Window::Sampled(s) => *s.grid(),
                Window::Analytic(_) => grid,
            };
            let lattice = ctx.lattice(&lattice)?;
            let sys = build_system(&g, &lattice, AtomKind::Metaplectic(fac), &grid)?;
            let (rec, err) = frame_reconstruct(&sys, &f.sample(&grid))?;
            if let Some(path) = ctx.output(&output) {
                let mut sink = open_output(&Some(path))?;
                write_signal(&rec, &mut sink)?;
                sink.flush()?;
            }
            let warning = coverage_warning(&sys)?;
            if let Some(w) = &warning {
                eprintln!("warning: {w}");
            }
            println!("{}", json!({"relative_error": err, "atoms": sys.len(), "warning": warning}));
        }
        Command::Factor { matrix } => {
            let text = std::fs::read_to_string(&matrix).with_context(|| format!("reading {}", matrix.display()))?;
            let value: serde_json::Value = serde_json::from_str(&text)?;
            let a = SymplecticMatrix::new(config::parse_matrix(&value)?)?;
            match try_factor(&a) {
                Some((c, e)) => {
                    let mut out = serde_json::to_value(FactorizationJson::from_parts(&c, &e))?;
                    out["decomposable"] = json!(true);
                    println!("{out}");
                }
                None => println!("{}", json!({"decomposable": false, "message": "not decomposable"})),
            }
        }
        Command::Norm { input, p, q, s, amalgam, metaplectic } => {
            let f = ctx.input(&input)?;
            let spec = NormSpec {
                p: parse_exponent(p.as_ref(), ctx.cfg.norm.p)?,
                q: parse_exponent(q.as_ref(), ctx.cfg.norm.q)?,
                weight: match s {
                    Some(s) => Weight::vs(s),
                    None => ctx.cfg.norm.weight.clone().unwrap_or(Weight::Constant),
                },
            };
            let tf = config::tf_grid(&grid, ctx.cfg.tf.n)?;
            let value = match (amalgam, metaplectic) {
                (false, false) => modulation_norm(&f, &g, &spec, &tf)?,
                (true, false) => amalgam_norm(&f, &g, &spec, &tf)?,
                (false, true) => mixed_norm(&wigner_metaplectic(&f, &g, &fac, &tf)?, &spec),
                (true, true) => {
                    let (m1, m2) = spec.weight.split();
                    amalgam_mixed_norm(&wigner_metaplectic(&f, &g, &fac, &tf)?, spec.p, spec.q, &m1, &m2)
                }
            };
            println!("{value}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<Error>())
        .map_or(2, |e| e.exit_code() as u8)
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
            || matches!(e.downcast_ref::<Error>(), Some(Error::Io(io)) if io.kind() == io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
