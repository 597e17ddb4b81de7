use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use finray::runner::{self, RunConfig};
use finray::Error;

#[derive(Parser)]
#[command(name = "finray", version, about = "Fin-ray finger surrogate modeling and design optimization")]
struct Cli {
    /// JSON run configuration; defaults apply to anything left out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the global seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the oracle over the design grid and write the dataset CSV.
    GenDataset {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the surrogate, optionally choosing its shape by grid search.
    Train {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out_model: Option<PathBuf>,
        #[arg(long)]
        grid_search: bool,
    },
    /// Run NSGA-II on the surrogate and write the Pareto front.
    Optimize {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out_front: Option<PathBuf>,
    },
    /// Label A/B/C, check the front against random samples and the oracle.
    Analyze {
        #[arg(long)]
        front: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        out_report: Option<PathBuf>,
    },
    /// Predict responses for one design given as t_beam,t_cross,spacing (mm).
    Eval {
        #[arg(long, value_parser = parse_design)]
        design: [f64; 3],
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

fn parse_design(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected t_beam,t_cross,spacing, got `{s}`"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{p}` is not a finite number"))?;
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let paths = cfg.paths.clone();
    match cli.command {
        Command::GenDataset { out } => {
            let out = out.unwrap_or(paths.dataset);
            let s = runner::gen_dataset(&cfg, &out)?;
            println!("wrote {} records to {} (seed {}, noise_sigma {})", s.records, out.display(), s.seed, s.noise_sigma);
        }
        Command::Train { data, out_model, grid_search } => {
            let data = data.unwrap_or(paths.dataset);
            let out = out_model.unwrap_or(paths.model);
            let s = runner::train(&cfg, &data, &out, grid_search)?;
            let [a, b, c] = s.config.hidden_sizes;
            println!("model {a}-{b}-{c} {} (seed {})", s.config.hidden_activation, s.config.seed);
            println!("final validation mse {}", s.final_val_mse);
            for (name, r2) in finray::dataset::TARGET_NAMES.iter().zip(&s.test_r2) {
                println!("test r2 {name} {r2:.4}");
            }
            for p in &s.written {
                println!("wrote {}", p.display());
            }
        }
        Command::Optimize { model, out_front } => {
            let model = model.unwrap_or(paths.model);
            let out = out_front.unwrap_or(paths.front);
            let s = runner::optimize(&cfg, &model, &out)?;
            println!("front of {} designs written to {} (seed {})", s.front_size, out.display(), s.seed);
        }
        Command::Analyze { front, model, out_report } => {
            let front = front.unwrap_or(paths.front);
            let model = model.unwrap_or(paths.model);
            let out = out_report.unwrap_or(paths.report_dir);
            let s = runner::analyze(&cfg, &front, &model, &out)?;
            println!("label,t_beam_mm,t_cross_mm,spacing_mm,pred_f_n,truth_f_n,err_f_pct,pred_d_mm,truth_d_mm,err_d_pct");
            for r in &s.comparison {
                let idx = match r.label {
                    finray::pareto::Label::A => s.selection.a,
                    finray::pareto::Label::B => s.selection.b,
                    finray::pareto::Label::C => s.selection.c,
                };
                let p = &s.front[idx].design;
                println!(
                    "{},{},{},{},{:.3},{:.3},{:.2},{:.3},{:.3},{:.2}",
                    r.label, p.t_beam, p.t_cross, p.spacing, r.predicted.f, r.truth.f, r.err_f_pct, r.predicted.d, r.truth.d, r.err_d_pct
                );
            }
            println!("{} of {} random samples dominate a front member", s.n_dominating, s.n_samples);
            println!("reports written to {}", out.display());
        }
        Command::Eval { design, model } => {
            let model = model.unwrap_or(paths.model);
            let e = runner::eval(&cfg, &model, design)?;
            let [fx, fy, dx, dy] = e.responses;
            println!("fx_n,fy_n,dx_mm,dy_mm,f_n,d_mm");
            println!("{fx},{fy},{dx},{dy},{},{}", e.objectives.f, e.objectives.d);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_user_error() { 2 } else { 1 })
        }
    }
}
