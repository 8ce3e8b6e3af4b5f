use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wavemotion::commands::{self, Baseline, ControlSpec};
use wavemotion::config::RunConfig;
use wavemotion::{exec, Error, ExecMode, Result};

/// Wavelet-manifold diffusion for stochastic human motion prediction.
///
/// Settings come from built-in defaults, then `--config`, then each `--set`
/// in order. Run `wavemotion --dump-config` to print every key.
#[derive(Parser, Debug)]
#[command(name = "wavemotion", version, about, long_about = None)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct Global {
    /// Config file of `key = value` lines (`#` starts a comment).
    #[arg(long, short, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set sample.w=0.5`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads for data-parallel loops (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    dump_config: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a denoiser; writes the checkpoint, loss.csv and loss.svg.
    Train {
        /// Continue from this checkpoint (its step counter and optimizer state).
        #[arg(long, value_name = "CKPT")]
        resume: Option<PathBuf>,
    },
    /// Predict futures for one observed history.
    Predict {
        #[arg(long, value_name = "CKPT")]
        checkpoint: Option<PathBuf>,
        /// Motion file (.wmot or .csv); its first H frames are the history.
        #[arg(long, value_name = "FILE")]
        history: PathBuf,
        /// Pin these joints to the input motion, e.g. `0,1,2`.
        #[arg(long, value_name = "LIST")]
        mask_joints: Option<String>,
        /// Pin this inclusive frame range to the input motion, e.g. `20..30`.
        #[arg(long, value_name = "A..B")]
        mask_frames: Option<String>,
        /// Number of predictions (overrides `sample.count`).
        #[arg(long)]
        count: Option<usize>,
    },
    /// Evaluate APD, ADE, FDE, MMADE and MMFDE on held-out windows.
    Eval {
        #[arg(long, value_name = "CKPT")]
        checkpoint: Option<PathBuf>,
        /// Evaluate a reference predictor instead of the model: `zero_vel`.
        #[arg(long)]
        baseline: Option<String>,
    },
    /// Encode a motion file into a wavelet-manifold CSV.
    Encode {
        input: PathBuf,
        output: PathBuf,
        /// Wavelet basis (defaults to `model.basis`).
        #[arg(long)]
        basis: Option<String>,
    },
    /// Decode a wavelet-manifold CSV into a motion file.
    Decode { input: PathBuf, output: PathBuf },
    /// Position, velocity and acceleration roundtrip RMSE of every basis.
    AblateBases,
    /// Metrics over a sweep of TABG scale s, noise scale sigma, WMSG and CFG scale w.
    AblateGuidance {
        #[arg(long, value_name = "CKPT")]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value = "0.5,1.0,1.5")]
        s_values: String,
        #[arg(long, default_value = "0.5,1.5,2.5")]
        sigma_values: String,
        #[arg(long, default_value = "0.0,0.5,1.0,1.5,2.0")]
        w_values: String,
    },
}

fn load_config(g: &Global) -> Result<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    for kv in &g.set {
        cfg.apply_override(kv)?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<String> {
    let cfg = load_config(&cli.global)?;
    if cli.global.dump_config {
        return Ok(cfg.dump());
    }
    exec::init_threads(cli.global.threads);
    let mode = if cli.global.sequential { ExecMode::Sequential } else { ExecMode::Parallel };
    let Some(command) = cli.command else {
        return Err(Error::InvalidArgument("no subcommand given (see --help)".into()));
    };
    match command {
        Command::Train { resume } => commands::cmd_train(&cfg, resume.as_deref(), mode),
        Command::Predict {
            checkpoint,
            history,
            mask_joints,
            mask_frames,
            count,
        } => {
            let mut cfg = cfg;
            if let Some(n) = count {
                cfg.sample_count = n;
            }
            let control = ControlSpec {
                joints: mask_joints.as_deref().map(commands::parse_joint_list).transpose()?.unwrap_or_default(),
                frames: mask_frames.as_deref().map(commands::parse_frame_range).transpose()?,
            };
            let ck = checkpoint.unwrap_or_else(|| cfg.checkpoint_path());
            commands::cmd_predict(&cfg, &ck, &history, &control, mode)
        }
        Command::Eval { checkpoint, baseline } => {
            let baseline = baseline.as_deref().map(str::parse::<Baseline>).transpose()?;
            commands::cmd_eval(&cfg, checkpoint.as_deref(), baseline, mode)
        }
        Command::Encode { input, output, basis } => {
            commands::cmd_encode(&input, &output, basis.as_deref().unwrap_or(&cfg.model_basis))
        }
        Command::Decode { input, output } => commands::cmd_decode(&input, &output),
        Command::AblateBases => commands::cmd_ablate_bases(&cfg, mode),
        Command::AblateGuidance {
            checkpoint,
            s_values,
            sigma_values,
            w_values,
        } => {
            let grid = commands::guidance_grid(
                &cfg.sample_config(),
                &commands::parse_f64_list(&s_values)?,
                &commands::parse_f64_list(&sigma_values)?,
                &commands::parse_f64_list(&w_values)?,
            );
            commands::cmd_ablate_guidance(&cfg, checkpoint.as_deref(), &grid, mode)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[E_USAGE]: {first}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {}", e.code(), e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
