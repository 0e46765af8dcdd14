use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use dendro_evo::clustering::{ClusteringRecipe, Method, Metric};
use dendro_evo::data::{Column, ColumnData, FeatureMatrix};
use dendro_evo::evo::{ancestral_states, bm_fit, fit_rate, marginal_posteriors};
use dendro_evo::io::{read_csv, write_csv, ColumnRole, Dataset};
use dendro_evo::render::{self, RenderSpec};
use dendro_evo::scores::{self, LabelAssignment, ScoreOptions, ScoreReport};
use dendro_evo::simgen::{self, SimConfig};
use dendro_evo::tree::{Dendrogram, EDGE_EPS};

use crate::output::OutputDir;
use crate::{BenchmarkArgs, ImportanceArgs, InputArgs, RenderArgs, ScoreArgs, SimGaussiansArgs, SimTreeArgs};

fn load(args: &InputArgs) -> Result<Dataset> {
    let mut overrides = BTreeMap::new();
    for (names, role) in [
        (&args.categorical, ColumnRole::Categorical),
        (&args.continuous, ColumnRole::Continuous),
        (&args.ignore, ColumnRole::Ignore),
    ] {
        for n in names {
            overrides.insert(n.clone(), role);
        }
    }
    if let Some(l) = &args.label {
        overrides.insert(l.clone(), ColumnRole::Label);
    }
    Ok(read_csv(&args.input, &overrides)?)
}

fn recipe(method: Method, metric: Metric, no_standardize: bool) -> ClusteringRecipe {
    let mut r = ClusteringRecipe::new(method, metric);
    r.standardize = !no_standardize;
    r
}

fn grid() -> Vec<ClusteringRecipe> {
    Method::GRID.iter().flat_map(|&m| Metric::ALL.iter().map(move |&d| ClusteringRecipe::new(m, d))).collect()
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "data".into())
}

fn write_reports(out: &mut OutputDir, prefix: &str, reports: &[ScoreReport]) -> Result<()> {
    out.write_with(&format!("{prefix}.csv"), |w| Ok(scores::write_reports_csv(reports, w)?))?;
    out.write_with(&format!("{prefix}.json"), |w| Ok(scores::write_reports_json(reports, w)?))?;
    Ok(())
}

pub fn score(args: &ScoreArgs) -> Result<()> {
    let data = load(&args.input)?;
    let methods = if args.methods.is_empty() { Method::GRID.to_vec() } else { args.methods.clone() };
    let recipes: Vec<ClusteringRecipe> = methods
        .iter()
        .flat_map(|&m| args.metrics.iter().map(move |&d| recipe(m, d, args.recipe.no_standardize)))
        .collect();
    let options = ScoreOptions {
        k: args.k,
        assignment: if args.hungarian { LabelAssignment::Hungarian } else { LabelAssignment::Majority },
    };
    let labels = data.labels.as_ref().map(|l| l.codes.as_slice());
    let reports = recipes
        .par_iter()
        .map(|r| scores::score(&data.features, labels, r, &options).with_context(|| format!("scoring {}", r.id())))
        .collect::<Result<Vec<_>>>()?;
    let mut out = OutputDir::create(&args.output_dir)?;
    write_reports(&mut out, "scores", &reports)?;
    out.finish("score", args)
}

fn build_tree(x: &FeatureMatrix, r: &ClusteringRecipe) -> Result<Dendrogram> {
    let cols = dendro_evo::clustering::standardize(x).usable_continuous();
    if cols.is_empty() {
        bail!("no continuous feature with variation to cluster on");
    }
    Ok(r.build_on(x, &cols)?)
}

pub fn importance(args: &ImportanceArgs) -> Result<()> {
    let data = load(&args.input)?;
    let r = recipe(args.method, args.metric, args.recipe.no_standardize);
    let d = build_tree(&data.features, &r)?;
    let pfis = scores::pfis(&data.features, &d)?;
    let names: Vec<String> = data.features.column_names().iter().map(|s| s.to_string()).collect();
    let svg = render::render_importance(&names, &pfis, &RenderSpec::default())?;
    let newick = d.to_ultrametric(EDGE_EPS)?.to_newick(d.leaf_labels());
    let mut out = OutputDir::create(&args.output_dir)?;
    out.write_with("importance.csv", |w| Ok(scores::write_pfis_csv(&names, &pfis, w)?))?;
    out.write_str("importance.svg", &svg)?;
    out.write_str("tree.nwk", &(newick + "\n"))?;
    out.finish("importance", args)
}

fn render_feature(d: &Dendrogram, column: &Column, spec: &RenderSpec) -> Result<String> {
    let tree = d.to_ultrametric(EDGE_EPS)?;
    match &column.data {
        ColumnData::Continuous(y) => {
            let fit = bm_fit(&tree, y)?;
            let asr = ancestral_states(&fit, y, spec.samples_per_edge)?;
            Ok(render::render_continuous(d, &asr, y, spec)?)
        }
        ColumnData::Categorical { levels, codes } => {
            let (states, labels) = scores::observed_states(levels, codes);
            let codes: Vec<usize> = labels.iter().map(|l| l.expect("observed")).collect();
            let post = if states.len() < 2 {
                let probs = vec![vec![1.0]; d.n_nodes()];
                dendro_evo::evo::StatePosteriors { states, probs }
            } else {
                let fit = fit_rate(&tree, &labels, &states)?;
                marginal_posteriors(&fit, &tree, &labels)?
            };
            Ok(render::render_categorical(d, &post, &codes, spec)?)
        }
    }
}

pub fn render(args: &RenderArgs) -> Result<()> {
    let data = load(&args.input)?;
    let r = recipe(args.method, args.metric, args.recipe.no_standardize);
    let d = build_tree(&data.features, &r)?;
    let spec = RenderSpec {
        width: args.width,
        height: args.height,
        colormap: args.colormap,
        orientation: args.orientation,
        samples_per_edge: args.samples_per_edge,
        legend: !args.no_legend,
        label_font_size: args.font_size,
    };
    spec.validate()?;

    let mut columns: Vec<Column> = data.features.columns().to_vec();
    if let Some(l) = &data.labels {
        let values: Vec<&str> = l.codes.iter().map(|&c| l.levels[c].as_str()).collect();
        columns.push(Column::categorical(l.name.clone(), &values));
    }
    let selected: Vec<&Column> = if args.features.is_empty() {
        columns.iter().collect()
    } else {
        args.features
            .iter()
            .map(|f| columns.iter().find(|c| &c.name == f).with_context(|| format!("no feature named '{f}'")))
            .collect::<Result<_>>()?
    };
    let dataset = args.dataset.clone().unwrap_or_else(|| stem(&args.input.input));
    let method = r.id();
    let svgs = selected
        .par_iter()
        .map(|c| render_feature(&d, c, &spec).with_context(|| format!("rendering '{}'", c.name)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = OutputDir::create(&args.output_dir)?;
    for (c, svg) in selected.iter().zip(svgs) {
        out.write_str(&render::file_name(&dataset, &c.name, &method), &svg)?;
    }
    out.finish("render", args)
}

pub fn simulate_tree(args: &SimTreeArgs) -> Result<()> {
    let mut cfg = SimConfig { depth: args.depth, seed: args.seed, noise_scale_is_variance: !args.sd_noise, ..Default::default() };
    if !args.sigma.is_empty() {
        cfg.sigma = args.sigma.clone();
    }
    let sim = simgen::simulate_tree_data(&cfg)?;
    let newick = sim.tree.to_ultrametric(EDGE_EPS)?.to_newick(sim.tree.leaf_labels());
    let mut out = OutputDir::create(&args.output_dir)?;
    out.write_with("tree_data.csv", |w| Ok(write_csv(&sim.data, None, w)?))?;
    out.write_str("tree.nwk", &(newick + "\n"))?;
    out.finish("simulate tree", args)
}

pub fn simulate_gaussians(args: &SimGaussiansArgs) -> Result<()> {
    let sim = simgen::simulate_two_gaussians(args.n, args.seed)?;
    let labels: Vec<String> = sim.labels.iter().map(|l| l.to_string()).collect();
    let mut out = OutputDir::create(&args.output_dir)?;
    out.write_with("gaussians.csv", |w| Ok(write_csv(&sim.data, Some(("Y", &labels)), w)?))?;
    out.finish("simulate gaussians", args)
}

#[derive(Serialize)]
struct Failure {
    dataset: String,
    method_id: String,
    error: String,
}

pub fn benchmark(args: &BenchmarkArgs) -> Result<()> {
    let mut datasets: Vec<(String, FeatureMatrix, Vec<usize>)> = Vec::new();
    for spec in &args.inputs {
        let (path, label) = match spec.rsplit_once(':') {
            Some((p, l)) if !l.is_empty() => (PathBuf::from(p), l.to_string()),
            _ => (PathBuf::from(spec), args.label.clone().with_context(|| format!("no label column given for {spec}"))?),
        };
        {
            let input = InputArgs {
                input: path.clone(),
                label: Some(label),
                categorical: vec![],
                continuous: vec![],
                ignore: vec![],
            };
            let d = load(&input)?;
            let labels = d.labels.context("label column missing")?.codes;
            datasets.push((stem(&path), d.features, labels));
        }
    }
    if let Some(n) = args.simulated {
        let sim = simgen::simulate_two_gaussians(n, args.seed)?;
        datasets.push(("simulated".into(), sim.data, sim.labels));
    }
    if datasets.is_empty() {
        bail!("nothing to benchmark: give --inputs or --simulated");
    }
    let options = ScoreOptions {
        k: None,
        assignment: if args.hungarian { LabelAssignment::Hungarian } else { LabelAssignment::Majority },
    };

    let mut out = OutputDir::create(&args.output_dir)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (name, x, labels) in &datasets {
        let results: Vec<_> = grid().par_iter().map(|r| (r.id(), scores::score(x, Some(labels), r, &options))).collect();
        let mut reports = Vec::new();
        for (id, res) in results {
            match res {
                Ok(rep) => reports.push(rep),
                Err(e) => {
                    log::error!("{name}: {id} failed: {e}");
                    failures.push(Failure { dataset: name.clone(), method_id: id, error: e.to_string() });
                }
            }
        }
        write_reports(&mut out, &format!("{name}_scores"), &reports)?;
        rows.push(scores::benchmark_table(name, &reports));
    }
    out.write_with("benchmark.csv", |w| Ok(scores::write_benchmark_csv(&rows, w)?))?;
    out.write_str("failures.json", &(serde_json::to_string_pretty(&failures)? + "\n"))?;
    out.finish("benchmark", args)
}
