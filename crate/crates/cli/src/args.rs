use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tiltwarp::{Boundary, Config, DEFAULT_GRID, DEFAULT_WORK_RES};

/// `<a>x<b>` with both parts positive, e.g. `8x6` or `512x384`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims(pub usize, pub usize);

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected <a>x<b>, got `{s}`"))?;
        let parse = |t: &str| -> Result<usize, String> {
            match t.trim().parse::<usize>() {
                Ok(v) if v > 0 => Ok(v),
                _ => Err(format!("`{t}` is not a positive integer")),
            }
        };
        Ok(Dims(parse(a)?, parse(b)?))
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.0, self.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    /// Out-of-range samples are black.
    Zero,
    /// Out-of-range samples repeat the nearest edge pixel.
    Clamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Png,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Mesh cells, columns x rows.
    #[arg(long = "mesh", global = true, value_name = "UxV", default_value_t = Dims(DEFAULT_GRID.0, DEFAULT_GRID.1))]
    pub grid: Dims,
    /// Working resolution for flow computation.
    #[arg(long, global = true, value_name = "WxH", default_value_t = Dims(DEFAULT_WORK_RES.0, DEFAULT_WORK_RES.1))]
    pub work_res: Dims,
    #[arg(long, global = true, value_enum, default_value = "zero")]
    pub boundary: BoundaryArg,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all logical cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output image format.
    #[arg(long, global = true, value_enum, default_value = "png")]
    pub format: FormatArg,
}

impl GlobalArgs {
    pub fn config(&self) -> Config {
        Config {
            grid: (self.grid.0, self.grid.1),
            work_res: (self.work_res.0, self.work_res.1),
            boundary: match self.boundary {
                BoundaryArg::Zero => Boundary::Constant(0.0),
                BoundaryArg::Clamp => Boundary::ClampToEdge,
            },
            seed: self.seed,
            threads: self.threads,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tiltwarp", version, about = "Mesh-based rotation correction toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a synthetic tilt dataset from a directory of level images.
    GenDataset {
        src_dir: PathBuf,
        out_dir: PathBuf,
    },
    /// Correct an image with a mesh or flow file.
    Correct {
        input: PathBuf,
        /// Predicted mesh (mesh file format).
        #[arg(long, conflicts_with = "flow", required_unless_present = "flow")]
        mesh_file: Option<PathBuf>,
        /// Backward flow (flow file format), at any resolution.
        #[arg(long)]
        flow: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score predictions against the labels of a manifest split.
    Evaluate {
        manifest: PathBuf,
        predictions: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Time the correction stages at several resolutions.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "512x384,1024x768,1536x1152,2048x1536")]
        sizes: Vec<Dims>,
        #[arg(long, default_value_t = 20)]
        runs: usize,
    },
    /// Run the edit service.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        addr: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        data_dir: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
    All,
}
