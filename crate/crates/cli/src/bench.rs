//! Median timings of the correction stages across output sizes.

use std::fmt::Write;
use std::time::{Duration, Instant};

use anyhow::bail;
use tiltwarp::geometry::pixel_center;
use tiltwarp::{backward_warp, mesh_to_flow, upsample_flow, Config, FlowField32, Image, Mesh64};

/// Tilt used for the benchmark mesh, in degrees.
pub const BENCH_TILT: f64 = 5.4;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub width: usize,
    pub height: usize,
    pub mesh_to_flow: Duration,
    pub upsample: Duration,
    pub warp: Duration,
    pub pipeline: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchTable {
    pub threads: usize,
    pub runs: usize,
    pub rows: Vec<BenchRow>,
    /// Coefficient of determination of warp time against pixel count.
    pub warp_r2: f64,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

impl BenchTable {
    pub fn to_text(&self) -> String {
        let mut s = format!("# threads={} runs={} median milliseconds\n", self.threads, self.runs);
        s.push_str("size\tpixels\tmesh_to_flow\tupsample\twarp\tpipeline\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{}x{}\t{}\t{:.3}\t{:.3}\t{:.3}\t{:.3}",
                r.width,
                r.height,
                r.width * r.height,
                ms(r.mesh_to_flow),
                ms(r.upsample),
                ms(r.warp),
                ms(r.pipeline)
            );
        }
        let _ = writeln!(s, "# warp r2 vs pixels: {:.4}", self.warp_r2);
        s
    }
}

pub fn median(samples: &mut [Duration]) -> Duration {
    samples.sort_unstable();
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2
    }
}

/// Median wall time of `runs` calls after one warm-up call.
pub fn time_median<R>(runs: usize, mut f: impl FnMut() -> R) -> Duration {
    std::hint::black_box(f());
    let mut samples: Vec<Duration> = (0..runs.max(1))
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(f());
            t.elapsed()
        })
        .collect();
    median(&mut samples)
}

/// R² of the least-squares line through `(xs, ys)`; 1 when `ys` is constant.
pub fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    if sxx == 0.0 {
        return 0.0;
    }
    sxy * sxy / (sxx * syy)
}

/// Deterministic 3-channel test scene.
pub fn bench_image(width: usize, height: usize) -> tiltwarp::Result<Image> {
    Image::from_fn(width, height, 3, |x, y, c| {
        let (fx, fy) = (x as f32 / width as f32, y as f32 / height as f32);
        match c {
            0 => 0.5 + 0.5 * (9.0 * fx + 4.0 * fy).sin(),
            1 => 0.5 + 0.5 * (7.0 * fy - 3.0 * fx).cos(),
            _ => 0.5 + 0.5 * (13.0 * (fx * fx + fy)).sin(),
        }
    })
}

/// Rigid lattice and its rotation by [`BENCH_TILT`] at the working resolution.
pub fn bench_meshes(config: &Config) -> tiltwarp::Result<(Mesh64, Mesh64)> {
    let (w, h) = config.work_res;
    let rig = Mesh64::rigid(w, h, config.grid.0, config.grid.1)?;
    let pre = rig.rotated_about(BENCH_TILT, pixel_center(w, h));
    Ok((rig, pre))
}

/// Median time of the full correction of a `width`×`height` image.
pub fn time_pipeline(width: usize, height: usize, runs: usize, config: &Config) -> anyhow::Result<Duration> {
    let img = bench_image(width, height)?;
    let (_, pre) = bench_meshes(config)?;
    let pipeline = config.pipeline()?;
    pipeline.correct_with_mesh(&img, &pre)?;
    Ok(time_median(runs, || pipeline.correct_with_mesh(&img, &pre)))
}

pub fn run(sizes: &[(usize, usize)], runs: usize, config: &Config) -> anyhow::Result<BenchTable> {
    if sizes.is_empty() {
        bail!("no sizes to benchmark");
    }
    if runs == 0 {
        bail!("--runs must be positive");
    }
    let (rig, pre) = bench_meshes(config)?;
    let pipeline = config.pipeline()?;
    let flow: FlowField32 = mesh_to_flow(&rig, &pre)?;
    let mesh_time = time_median(runs, || mesh_to_flow::<f64, f32>(&rig, &pre));
    let mut rows = Vec::with_capacity(sizes.len());
    for &(w, h) in sizes {
        let img = bench_image(w, h)?;
        let up = upsample_flow(&flow, w, h)?;
        rows.push(BenchRow {
            width: w,
            height: h,
            mesh_to_flow: mesh_time,
            upsample: time_median(runs, || upsample_flow(&flow, w, h)),
            warp: time_median(runs, || backward_warp(&img, &up, config.boundary)),
            pipeline: time_median(runs, || pipeline.correct_with_mesh(&img, &pre)),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.width * r.height) as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.warp.as_secs_f64()).collect();
    Ok(BenchTable {
        threads: rayon::current_num_threads(),
        runs,
        warp_r2: r_squared(&xs, &ys),
        rows,
    })
}
