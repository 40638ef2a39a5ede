//! Command implementations behind the `tiltwarp` binary.

pub mod args;
pub mod bench;
pub mod commands;
pub mod output;

use std::process::ExitCode;

use args::{Cli, Command};

/// Process exit status for each failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Usage = 1,
    Data = 2,
    Internal = 3,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e as u8)
    }
}

/// Marks an error as a bug or environment failure rather than bad input.
#[derive(Debug)]
pub struct Internal(pub String);

impl std::fmt::Display for Internal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Internal {}

pub fn classify(err: &anyhow::Error) -> Exit {
    for cause in err.chain() {
        if cause.is::<Internal>() {
            return Exit::Internal;
        }
        if let Some(e) = cause.downcast_ref::<tiltwarp::Error>() {
            return match e {
                tiltwarp::Error::Encode(_) => Exit::Internal,
                _ => Exit::Data,
            };
        }
    }
    Exit::Data
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let config = cli.global.config();
    if let Some(n) = config.threads {
        if n == 0 {
            anyhow::bail!("--threads must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Internal(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::GenDataset { src_dir, out_dir } => {
            let summary = commands::gen_dataset(&src_dir, &out_dir, &config)?;
            println!(
                "wrote {} records ({} train, {} test) to {}",
                summary.records,
                summary.train,
                summary.test,
                summary.manifest.display()
            );
        }
        Command::Correct {
            input,
            mesh_file,
            flow,
            output,
        } => {
            let warp = match (mesh_file, flow) {
                (Some(m), None) => commands::WarpSource::Mesh(m),
                (None, Some(f)) => commands::WarpSource::Flow(f),
                _ => unreachable!("clap enforces exactly one warp source"),
            };
            commands::correct(&input, &warp, &output, &config)?;
        }
        Command::Evaluate {
            manifest,
            predictions,
            split,
            output,
        } => {
            let report = commands::evaluate(&manifest, &predictions, split)?;
            let text = report.to_tsv();
            match output {
                Some(p) => output::write_atomic(&p, text.as_bytes())?,
                None => print!("{text}"),
            }
        }
        Command::Bench { sizes, runs } => {
            let sizes: Vec<(usize, usize)> = sizes.iter().map(|d| (d.0, d.1)).collect();
            let table = bench::run(&sizes, runs, &config)?;
            print!("{}", table.to_text());
        }
        Command::Serve { addr, port, data_dir } => commands::serve(&addr, port, &data_dir, &config)?,
    }
    Ok(())
}
