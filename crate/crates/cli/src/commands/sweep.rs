//! `crossgcn sweep`: grid over alpha/beta/d for one or more models.

use std::path::PathBuf;

use clap::Args;

use crossgcn::crossnet::VariantId;
use crossgcn::error::{Error, Result};
use crossgcn::eval::{run_sweep, write_atomic, ExperimentSettings, LinkData, SweepAxis};

use crate::settings::ModelFlags;

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub graph_a: PathBuf,
    #[arg(long)]
    pub graph_b: PathBuf,
    #[arg(long)]
    pub alignment: Option<PathBuf>,
    #[arg(long)]
    pub features_a: Option<PathBuf>,
    #[arg(long)]
    pub features_b: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub align_negative_ratio: f64,
    /// Comma-separated model list, e.g. `separated,m5,m11,m13`.
    #[arg(long, default_value = "m13")]
    pub models: String,
    /// Grid axis `name=v1,v2,...` with name one of alpha_a, beta, d.
    /// Repeat the flag for a cross product.
    #[arg(long = "grid")]
    pub grids: Vec<String>,
    /// Number of seeded repetitions per grid point (seeds 0..N).
    #[arg(long, default_value_t = 10)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub model: ModelFlags,
}

fn parse_axis(spec: &str) -> Result<SweepAxis> {
    let (name, values) = spec.split_once('=').ok_or_else(|| {
        Error::Config(format!("grid '{}' must look like name=v1,v2,...", spec))
    })?;
    let parse_f64 = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad grid value '{}'", s)))
    };
    match name.trim() {
        "alpha_a" => Ok(SweepAxis::AlphaA(
            values.split(',').map(parse_f64).collect::<Result<_>>()?,
        )),
        "beta" => Ok(SweepAxis::Beta(
            values.split(',').map(parse_f64).collect::<Result<_>>()?,
        )),
        "d" => Ok(SweepAxis::Dim(
            values
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad grid value '{}'", s)))
                })
                .collect::<Result<_>>()?,
        )),
        other => Err(Error::Config(format!(
            "unknown grid axis '{}' (expected alpha_a, beta, or d)",
            other
        ))),
    }
}

pub fn run(args: SweepArgs) -> Result<()> {
    let resolved = args.model.resolve()?;
    let models: Vec<VariantId> = args
        .models
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_>>()?;
    let axes: Vec<SweepAxis> = args.grids.iter().map(|g| parse_axis(g)).collect::<Result<_>>()?;
    if axes.is_empty() {
        return Err(Error::Config("pass at least one --grid axis".into()));
    }

    let (ga, gb) = super::load_graph_pair(
        &args.graph_a,
        &args.graph_b,
        args.features_a.as_ref(),
        args.features_b.as_ref(),
    )?;
    let alignment = super::load_alignment_or_empty(
        args.alignment.as_ref(),
        &ga,
        &gb,
        args.align_negative_ratio,
        args.seed,
    )?;
    let data = LinkData::Loaded(Box::new((ga, gb, alignment)));

    let base = ExperimentSettings {
        variant: models[0],
        d: resolved.dim,
        m_hat: resolved.mhat,
        alpha_a: resolved.alpha_a,
        beta: resolved.beta,
        epochs: resolved.epochs,
        learning_rate: resolved.lr,
        eval_every: 5,
        restarts: 1,
        seeds: (0..args.seeds as u64).map(|s| args.seed.wrapping_add(s)).collect(),
    };
    let csv = run_sweep(&base, &models, &axes, &data)?;
    write_atomic(&args.out.join("sweep.csv"), csv.as_bytes())?;
    log::info!("sweep written to {}", args.out.join("sweep.csv").display());
    Ok(())
}
