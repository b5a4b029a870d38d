//! Experiment orchestration: repeated seeded training runs, best-validation
//! checkpoint selection, metric aggregation, and sweep tables.

use std::collections::BTreeMap;
use std::time::Instant;

use log::info;

use crate::crossnet::{
    train_with_callback, CrossModel, TrainOptions, TrainSetup, VariantId,
};
use crate::error::{Error, Result};
use crate::eval::metrics::{auc, average_precision, harmonic_overall};
use crate::eval::ranking::mrr_hits;
use crate::eval::report::{sig6, MetricsReport, SeedOutcome};
use crate::gcn::gcn_forward;
use crate::graph::{
    normalize_adjacency, split_links, split_triples, Alignment, Graph, LinkSplit, RelationalGraph,
};
use crate::numerics::sigmoid;
use crate::relational::{cross_rgcn_train_with_callback, RelModel, RelSharingMode};
use crate::synth::{
    generate_relational_pair, generate_synthetic_pair, SyntheticPairSpec, SyntheticRelationalSpec,
};

/// Hyperparameters of one experiment; seeds are full replicates.
#[derive(Debug, Clone)]
pub struct ExperimentSettings {
    pub variant: VariantId,
    pub d: usize,
    pub m_hat: Option<usize>,
    pub alpha_a: f64,
    /// `None` keeps the variant's registry default.
    pub beta: Option<f64>,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Validation is scored every this many epochs for checkpoint selection.
    pub eval_every: usize,
    /// Independent training restarts per seed. Each restart selects its
    /// best-validation checkpoint; the seed's metrics are the mean over
    /// restarts, which estimates the procedure's expected performance.
    pub restarts: usize,
    pub seeds: Vec<u64>,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        ExperimentSettings {
            variant: VariantId::M13,
            d: 64,
            m_hat: None,
            alpha_a: 0.5,
            beta: None,
            epochs: 200,
            learning_rate: 0.01,
            eval_every: 5,
            restarts: 1,
            seeds: (0..10).collect(),
        }
    }
}

impl ExperimentSettings {
    pub fn config_for(&self, feature_dims: &[usize]) -> Result<crate::crossnet::ModelConfig> {
        let mut config = self.variant.config(self.d, self.m_hat);
        config.alpha = vec![self.alpha_a, 1.0 - self.alpha_a];
        if let Some(beta) = self.beta {
            config.beta = beta;
        }
        config.validate(feature_dims)?;
        Ok(config)
    }
}

/// Where the two link-task graphs come from. Synthetic data is regenerated
/// per seed so each replicate is a fresh world.
pub enum LinkData {
    Synthetic(SyntheticPairSpec),
    Loaded(Box<(Graph<f64>, Graph<f64>, Alignment)>),
}

impl LinkData {
    fn realize(&self, seed: u64) -> Result<(Graph<f64>, Graph<f64>, Alignment)> {
        match self {
            LinkData::Synthetic(spec) => {
                let mut spec = spec.clone();
                spec.seed = seed;
                let pair = generate_synthetic_pair(&spec)?;
                Ok((pair.graph_a, pair.graph_b, pair.alignment))
            }
            LinkData::Loaded(data) => Ok((*data.clone()).clone()),
        }
    }
}

pub enum RelData {
    Synthetic(SyntheticRelationalSpec),
    Loaded(Box<(RelationalGraph<f64>, RelationalGraph<f64>, Alignment)>),
}

impl RelData {
    fn realize(&self, seed: u64) -> Result<(RelationalGraph<f64>, RelationalGraph<f64>, Alignment)> {
        match self {
            RelData::Synthetic(spec) => {
                let mut spec = spec.clone();
                spec.seed = seed;
                let pair = generate_relational_pair(&spec)?;
                Ok((pair.graph_a, pair.graph_b, pair.alignment))
            }
            RelData::Loaded(data) => Ok((*data.clone()).clone()),
        }
    }
}

/// Sigmoid inner-product scores for a pair list.
fn pair_scores(u: &crate::numerics::Matrix<f64>, pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs
        .iter()
        .map(|&(i, j)| sigmoid(u.dot_rows(i, u, j)))
        .collect()
}

fn link_metrics_for_graph(
    u: &crate::numerics::Matrix<f64>,
    positives: &[(usize, usize)],
    negatives: &[(usize, usize)],
) -> Result<BTreeMap<String, f64>> {
    let pos = pair_scores(u, positives);
    let neg = pair_scores(u, negatives);
    let mut out = BTreeMap::new();
    out.insert("auc".to_string(), auc(&pos, &neg)?);
    out.insert("ap".to_string(), average_precision(&pos, &neg)?);
    Ok(out)
}

fn overall_of(maps: &[BTreeMap<String, f64>]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    if maps.is_empty() {
        return Ok(out);
    }
    for key in maps[0].keys() {
        let values: Vec<f64> = maps.iter().map(|m| m[key]).collect();
        // the harmonic mean's limit as any value reaches zero is zero
        let overall = if values.iter().any(|&v| v <= 0.0) {
            0.0
        } else {
            harmonic_overall(&values)?
        };
        out.insert(key.clone(), overall);
    }
    Ok(out)
}

/// Evaluates a link model on a pair of splits.
pub fn evaluate_link_model(
    model: &CrossModel<f64>,
    graphs: &[Graph<f64>],
    splits: &[LinkSplit<f64>],
) -> Result<(Vec<BTreeMap<String, f64>>, Vec<BTreeMap<String, f64>>)> {
    let mut val_maps = Vec::new();
    let mut test_maps = Vec::new();
    for g in 0..graphs.len() {
        let adj = normalize_adjacency(&graphs[g]);
        let (u, _) = gcn_forward(&adj, &graphs[g].features, model.view(g))?;
        let val_pos: Vec<(usize, usize)> =
            splits[g].validation.iter().map(|&(i, j, _)| (i, j)).collect();
        let test_pos: Vec<(usize, usize)> =
            splits[g].test.iter().map(|&(i, j, _)| (i, j)).collect();
        val_maps.push(link_metrics_for_graph(&u, &val_pos, &splits[g].negatives_val)?);
        test_maps.push(link_metrics_for_graph(&u, &test_pos, &splits[g].negatives_test)?);
    }
    Ok((val_maps, test_maps))
}

/// One full seeded replicate of the link experiment.
fn run_link_seed(
    settings: &ExperimentSettings,
    data: &LinkData,
    seed: u64,
) -> Result<SeedOutcome> {
    let (ga, gb, alignment) = data.realize(seed)?;
    let graphs = vec![ga, gb];
    let splits = vec![
        split_links(&graphs[0], (8, 1, 1), seed)?,
        split_links(&graphs[1], (8, 1, 1), seed.wrapping_add(0x517c_c1b7_2722_0a95))?,
    ];
    let feature_dims = [graphs[0].feature_count(), graphs[1].feature_count()];
    let config = settings.config_for(&feature_dims)?;

    let opts = TrainOptions {
        epochs: settings.epochs,
        learning_rate: settings.learning_rate,
        negatives_per_positive: 1,
        resample_negatives: true,
    };
    let setup = TrainSetup {
        graphs: &graphs,
        splits: &splits,
        alignment: Some(&alignment),
    };

    let eval_every = settings.eval_every.max(1);
    let started = Instant::now();
    let restarts = settings.restarts.max(1);
    let mut restart_outcomes: Vec<(Vec<BTreeMap<String, f64>>, Vec<BTreeMap<String, f64>>)> =
        Vec::with_capacity(restarts);
    for restart in 0..restarts {
        let init_seed = if restart == 0 {
            seed
        } else {
            seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(restart as u64))
        };
        let mut best: Option<(f64, CrossModel<f64>)> = None;
        let mut model = CrossModel::build(config.clone(), &feature_dims, &[(0, 1)], init_seed)?;
        train_with_callback(&mut model, &setup, &opts, init_seed, |epoch, current| {
            // the final epoch always counts as a selection point
            if (epoch + 1) % eval_every != 0 && epoch + 1 != opts.epochs {
                return Ok(());
            }
            let (val_maps, _) = evaluate_link_model(current, &graphs, &splits)?;
            let score = harmonic_overall(&[val_maps[0]["auc"], val_maps[1]["auc"]])?;
            if best.as_ref().map_or(true, |(b, _)| score > *b) {
                best = Some((score, current.clone()));
            }
            Ok(())
        })?;
        let chosen = best
            .map(|(_, m)| m)
            .expect("the final epoch is always a selection point");
        restart_outcomes.push(evaluate_link_model(&chosen, &graphs, &splits)?);
    }
    let elapsed = started.elapsed().as_secs_f64();
    info!(
        "seed {}: {} restart(s) x {} epochs in {:.3}s",
        seed,
        restarts,
        settings.epochs,
        elapsed
    );

    let mean_maps = |pick: &dyn Fn(
        &(Vec<BTreeMap<String, f64>>, Vec<BTreeMap<String, f64>>),
    ) -> &Vec<BTreeMap<String, f64>>|
     -> Vec<BTreeMap<String, f64>> {
        let graphs_n = pick(&restart_outcomes[0]).len();
        (0..graphs_n)
            .map(|g| {
                let mut out = BTreeMap::new();
                for key in pick(&restart_outcomes[0])[g].keys() {
                    let sum: f64 = restart_outcomes.iter().map(|o| pick(o)[g][key]).sum();
                    out.insert(key.clone(), sum / restart_outcomes.len() as f64);
                }
                out
            })
            .collect()
    };
    let val_maps = mean_maps(&|o| &o.0);
    let test_maps = mean_maps(&|o| &o.1);
    Ok(SeedOutcome {
        seed,
        overall_validation: overall_of(&val_maps)?,
        overall_test: overall_of(&test_maps)?,
        validation: val_maps,
        test: test_maps,
    })
}

pub fn run_link_experiment(
    settings: &ExperimentSettings,
    data: &LinkData,
) -> Result<MetricsReport> {
    if settings.seeds.is_empty() {
        return Err(Error::Contract("need at least one seed".into()));
    }
    let mut per_seed = Vec::with_capacity(settings.seeds.len());
    for &seed in &settings.seeds {
        per_seed.push(run_link_seed(settings, data, seed)?);
    }
    let (ga, gb, _) = data.realize(settings.seeds[0])?;
    let sa = split_links(&ga, (8, 1, 1), settings.seeds[0])?;
    let sb = split_links(
        &gb,
        (8, 1, 1),
        settings.seeds[0].wrapping_add(0x517c_c1b7_2722_0a95),
    )?;
    let n_eval = vec![
        sa.test.len() + sa.negatives_test.len(),
        sb.test.len() + sb.negatives_test.len(),
    ];
    Ok(MetricsReport::aggregate(
        "link",
        &settings.variant.to_string(),
        n_eval,
        per_seed,
    ))
}

fn rel_metrics_for_graph(
    model: &RelModel<f64>,
    g: usize,
    rg: &RelationalGraph<f64>,
    eval_triples: &[(usize, usize, usize)],
) -> Result<BTreeMap<String, f64>> {
    let norm = crate::relational::RelNormalizer::build(
        rg,
        crate::relational::NormalizerKind::PerNodeNeighborCount,
    );
    let (u, _) = crate::relational::rgcn_forward(&norm, &rg.features, model, g, true)?;
    let core = model.store.get(model.wiring(g).core);
    let metrics = mrr_hits(&u, core, eval_triples, &rg.triples, &[1, 3])?;
    let mut out = BTreeMap::new();
    out.insert("mrr_raw".to_string(), metrics.mrr_raw);
    out.insert("mrr_filtered".to_string(), metrics.mrr_filtered);
    out.insert("hits1".to_string(), metrics.hits[0].1);
    out.insert("hits3".to_string(), metrics.hits[1].1);
    Ok(out)
}

fn run_relation_seed(
    settings: &ExperimentSettings,
    data: &RelData,
    seed: u64,
) -> Result<SeedOutcome> {
    let (ga, gb, alignment) = data.realize(seed)?;
    let splits = vec![
        split_triples(&ga, (8, 1, 1), seed)?,
        split_triples(&gb, (8, 1, 1), seed.wrapping_add(0x517c_c1b7_2722_0a95))?,
    ];
    let feature_dims = [ga.features.cols(), gb.features.cols()];
    let config = settings.config_for(&feature_dims)?;
    let mut model = RelModel::build(config, &[&ga, &gb], RelSharingMode::IndexTruncation, seed)?;
    let train_triples = vec![splits[0].train.clone(), splits[1].train.clone()];

    let mut best: Option<(f64, RelModel<f64>)> = None;
    let eval_every = settings.eval_every.max(1);
    cross_rgcn_train_with_callback(
        &mut model,
        &[&ga, &gb],
        &train_triples,
        Some(&alignment),
        settings.epochs,
        settings.learning_rate,
        seed,
        |epoch, current| {
            if (epoch + 1) % eval_every != 0 {
                return Ok(());
            }
            let va = rel_metrics_for_graph(current, 0, &ga, &splits[0].validation)?;
            let vb = rel_metrics_for_graph(current, 1, &gb, &splits[1].validation)?;
            let score = harmonic_overall(&[va["mrr_filtered"], vb["mrr_filtered"]])?;
            if best.as_ref().map_or(true, |(b, _)| score > *b) {
                best = Some((score, current.clone()));
            }
            Ok(())
        },
    )?;
    let chosen = best.map(|(_, m)| m).unwrap_or(model);
    let val_maps = vec![
        rel_metrics_for_graph(&chosen, 0, &ga, &splits[0].validation)?,
        rel_metrics_for_graph(&chosen, 1, &gb, &splits[1].validation)?,
    ];
    let test_maps = vec![
        rel_metrics_for_graph(&chosen, 0, &ga, &splits[0].test)?,
        rel_metrics_for_graph(&chosen, 1, &gb, &splits[1].test)?,
    ];
    Ok(SeedOutcome {
        seed,
        overall_validation: overall_of(&val_maps)?,
        overall_test: overall_of(&test_maps)?,
        validation: val_maps,
        test: test_maps,
    })
}

pub fn run_relation_experiment(
    settings: &ExperimentSettings,
    data: &RelData,
) -> Result<MetricsReport> {
    if settings.seeds.is_empty() {
        return Err(Error::Contract("need at least one seed".into()));
    }
    let mut per_seed = Vec::with_capacity(settings.seeds.len());
    for &seed in &settings.seeds {
        per_seed.push(run_relation_seed(settings, data, seed)?);
    }
    let (ga, gb, _) = data.realize(settings.seeds[0])?;
    let sa = split_triples(&ga, (8, 1, 1), settings.seeds[0])?;
    let sb = split_triples(
        &gb,
        (8, 1, 1),
        settings.seeds[0].wrapping_add(0x517c_c1b7_2722_0a95),
    )?;
    let n_eval = vec![2 * sa.test.len(), 2 * sb.test.len()];
    Ok(MetricsReport::aggregate(
        "relation",
        &settings.variant.to_string(),
        n_eval,
        per_seed,
    ))
}

/// One grid axis of a sweep.
#[derive(Debug, Clone)]
pub enum SweepAxis {
    AlphaA(Vec<f64>),
    Beta(Vec<f64>),
    Dim(Vec<usize>),
}

/// Long-format sweep table over the cross product of the grid axes: one
/// row per (model, grid point, scope, metric).
pub fn run_sweep(
    base: &ExperimentSettings,
    models: &[VariantId],
    axes: &[SweepAxis],
    data: &LinkData,
) -> Result<String> {
    let mut csv = String::from("model,alpha_a,beta,d,scope,metric,mean,std\n");
    let mut points: Vec<ExperimentSettings> = vec![base.clone()];
    for axis in axes {
        let mut expanded = Vec::new();
        for point in &points {
            match axis {
                SweepAxis::AlphaA(vals) => expanded.extend(vals.iter().map(|&a| {
                    ExperimentSettings {
                        alpha_a: a,
                        ..point.clone()
                    }
                })),
                SweepAxis::Beta(vals) => expanded.extend(vals.iter().map(|&b| {
                    ExperimentSettings {
                        beta: Some(b),
                        ..point.clone()
                    }
                })),
                SweepAxis::Dim(vals) => expanded.extend(vals.iter().map(|&d| {
                    ExperimentSettings {
                        d,
                        ..point.clone()
                    }
                })),
            }
        }
        points = expanded;
    }
    for point in &points {
        for &model in models {
            let settings = ExperimentSettings {
                variant: model,
                ..point.clone()
            };
            let report = run_link_experiment(&settings, data)?;
            let beta_shown = settings
                .beta
                .unwrap_or_else(|| model.config(settings.d, None).beta);
            let mut push_rows = |scope: &str, map: &crate::eval::report::MetricMap| {
                for (metric, summary) in map {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        model,
                        sig6(settings.alpha_a),
                        sig6(beta_shown),
                        settings.d,
                        scope,
                        metric,
                        summary.mean,
                        summary.std
                    ));
                }
            };
            for (g, map) in report.validation.iter().enumerate() {
                push_rows(&format!("val_graph_{}", (b'a' + g as u8) as char), map);
            }
            for (g, map) in report.test.iter().enumerate() {
                push_rows(&format!("test_graph_{}", (b'a' + g as u8) as char), map);
            }
            push_rows("val_overall", &report.overall_validation);
            push_rows("test_overall", &report.overall_test);
        }
    }
    Ok(csv)
}
