use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use morseframe::cli::{
    cmd_analyze, cmd_normalize, cmd_plot, cmd_plot_values, cmd_project, parse_values, random_suite,
    seed_from_env, verify_report_json, CliError, CliResult, SceneConfig,
};

#[derive(Parser)]
#[command(name = "morseframe", version, about = "Normalize framed Morse functions on surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project values onto κ·P^{q-1} and print the certificate.
    Project {
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        kappa: f64,
    },
    /// Analyze a scene and report its specialness.
    Analyze(SceneArgs),
    /// Analyze, normalize and report the verdict on the normalized pair.
    Normalize {
        #[command(flatten)]
        scene: SceneArgs,
        /// Record saddle values of the straight-line homotopy at this many
        /// equally spaced times.
        #[arg(long)]
        homotopy_samples: Option<usize>,
    },
    /// Write SVG plots of a scene, or of a value list with --values.
    Plot {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
    },
    /// Re-verify a report (--json), or run the seeded random suite.
    Verify {
        /// Report file, or inline JSON.
        #[arg(long)]
        json: Option<String>,
        /// Points per dimension in the random suite.
        #[arg(long, default_value_t = 200)]
        rounds: usize,
    },
}

#[derive(Args)]
struct SceneArgs {
    /// Scene config file, or inline JSON.
    #[arg(long)]
    json: Option<String>,
    #[arg(long)]
    scene: Option<String>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    tie_tol: Option<f64>,
    #[arg(long)]
    delta_ext: Option<f64>,
    #[arg(long)]
    r_capture: Option<f64>,
    /// Output file (analyze, normalize) or directory (plot).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SceneArgs {
    /// The JSON config with command-line flags taking precedence.
    fn config(&self) -> CliResult<SceneConfig> {
        let mut config = match &self.json {
            Some(arg) => SceneConfig::from_arg(arg)?,
            None => SceneConfig::default(),
        };
        if let Some(s) = &self.scene {
            config.scene = s.clone();
        }
        if let Some(a) = self.a {
            config.params.insert("a".into(), a);
        }
        if let Some(b) = self.b {
            config.params.insert("b".into(), b);
        }
        if let Some(n) = self.grid {
            config.grid_n = n;
        }
        let t = &mut config.tolerances;
        t.tie_tol = self.tie_tol.or(t.tie_tol);
        t.delta_ext = self.delta_ext.or(t.delta_ext);
        t.r_capture = self.r_capture.or(t.r_capture);
        Ok(config)
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        }),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Project { values, kappa } => emit(&cmd_project(&values, kappa)?, None),
        Command::Analyze(args) => emit(&cmd_analyze(&args.config()?)?, args.out.as_ref()),
        Command::Normalize { scene, homotopy_samples } => {
            emit(&cmd_normalize(&scene.config()?, homotopy_samples)?, scene.out.as_ref())
        }
        Command::Plot { scene, values, kappa } => {
            let dir = scene.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let files = match values {
                Some(v) => cmd_plot_values(&parse_values(&v)?, kappa, &dir)?,
                None => cmd_plot(&scene.config()?, &dir)?,
            };
            let listing: String = files.written.iter().map(|p| format!("{}\n", p.display())).collect();
            emit(&listing, None)
        }
        Command::Verify { json, rounds } => match json {
            Some(arg) => {
                let text = if arg.trim_start().starts_with('{') {
                    arg
                } else {
                    std::fs::read_to_string(&arg).map_err(|e| CliError::Io { path: arg.clone(), source: e })?
                };
                emit(&verify_report_json(&text)?, None)
            }
            None => {
                let outcome = random_suite(seed_from_env()?, rounds);
                emit(&outcome.render(), None)?;
                if outcome.all_ok() {
                    Ok(())
                } else {
                    Err(CliError::Verification("random suite found violations".into()))
                }
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let CliError::Verification(lines) = &e {
                print!("{lines}");
                eprintln!("morseframe: verification failed");
            } else {
                eprintln!("morseframe: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
