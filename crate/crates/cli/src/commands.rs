use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Serialize;

use cgr_core::corpus::{generate_synthetic, load_corpus, save_corpus, Metrics};
use cgr_core::model::{
    forward, load_checkpoint, predict_pairs, save_checkpoint, GraphCache, ModelConfig,
};
use cgr_core::mrg::{Mrg, MrgVariant, Task};
use cgr_core::training::{
    evaluate_model, split_corpus, train, write_history_csv, LossConfig,
};

use crate::config::RunConfig;

pub fn parse_variant(name: &str) -> anyhow::Result<MrgVariant> {
    match name {
        "full" => Ok(MrgVariant::Full),
        "owm" => Ok(MrgVariant::Owm),
        "norel" => Ok(MrgVariant::Norel),
        "fcg" => Ok(MrgVariant::Fcg),
        other => bail!("unknown graph variant {other:?} (expected full, owm, norel, or fcg)"),
    }
}

pub fn cmd_gen(config: &RunConfig, out: &Path, docs: Option<usize>) -> anyhow::Result<()> {
    let mut synth = config.synth.clone();
    if let Some(docs) = docs {
        synth.docs = docs;
    }
    let corpus = generate_synthetic(&synth, config.master_seed())
        .context("generating synthetic corpus")?;
    save_corpus(&corpus, out).with_context(|| format!("writing {}", out.display()))?;
    println!("wrote {} documents to {}", corpus.len(), out.display());
    Ok(())
}

fn resolve_corpus(config: &RunConfig, arg: Option<&Path>) -> anyhow::Result<PathBuf> {
    match arg.map(Path::to_path_buf).or_else(|| config.paths.corpus.clone()) {
        Some(path) => Ok(path),
        None => bail!("no corpus given (pass a path or set [paths] corpus in the config)"),
    }
}

pub fn cmd_train(
    config: &RunConfig,
    corpus_arg: Option<&Path>,
    out_dir_arg: Option<&Path>,
    model: &ModelConfig,
) -> anyhow::Result<()> {
    let corpus_path = resolve_corpus(config, corpus_arg)?;
    let out_dir = match out_dir_arg.map(Path::to_path_buf).or_else(|| config.paths.out_dir.clone())
    {
        Some(dir) => dir,
        None => bail!("no output directory given (pass --out-dir or set [paths] out_dir)"),
    };
    let corpus = load_corpus(&corpus_path)
        .with_context(|| format!("loading {}", corpus_path.display()))?;
    let outcome = train(&corpus, model, &config.effective_train(), &config.loss)?;

    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let checkpoint = out_dir.join("model.json");
    save_checkpoint(&checkpoint, model, &outcome.vocab, &outcome.store)?;
    write_history_csv(out_dir.join("history.csv"), &outcome.history)?;
    println!(
        "trained {} epochs; best dev pair F1 {:.4} at epoch {}; checkpoint {}",
        outcome.epochs_run,
        outcome.best_dev_f1,
        outcome.best_epoch,
        checkpoint.display()
    );
    Ok(())
}

pub fn cmd_eval(checkpoint: &Path, corpus_path: &Path) -> anyhow::Result<()> {
    let (model, vocab, store) = load_checkpoint(checkpoint)?;
    let corpus = load_corpus(corpus_path)
        .with_context(|| format!("loading {}", corpus_path.display()))?;
    let metrics = evaluate_model(&store, &model, &vocab, &corpus)?;
    println!("{}", serde_json::to_string_pretty(&metrics)?);
    Ok(())
}

#[derive(Serialize)]
struct PredictionRow<'a> {
    id: &'a str,
    pairs: Vec<[usize; 2]>,
}

pub fn cmd_predict(checkpoint: &Path, corpus_path: &Path, out: &Path) -> anyhow::Result<()> {
    let (model, vocab, store) = load_checkpoint(checkpoint)?;
    let corpus = load_corpus(corpus_path)
        .with_context(|| format!("loading {}", corpus_path.display()))?;
    let mut cache = GraphCache::new(model.gamma, model.graph_variant);
    let mut writer = std::io::BufWriter::new(
        fs::File::create(out).with_context(|| format!("creating {}", out.display()))?,
    );
    for document in &corpus {
        let graph = cache.get(document.clauses.len());
        let outputs = forward(&store, &model, &vocab, &graph, document)?;
        let pairs = predict_pairs(&outputs)
            .into_iter()
            .map(|p| [p.emotion, p.cause])
            .collect();
        let row = PredictionRow { id: &document.id, pairs };
        writeln!(writer, "{}", serde_json::to_string(&row)?)?;
    }
    writer.flush()?;
    println!("wrote predictions for {} documents to {}", corpus.len(), out.display());
    Ok(())
}

fn node_name(task: Task, clause: usize) -> String {
    let letter = match task {
        Task::Cause => 'c',
        Task::Tag => 't',
        Task::Emotion => 'e',
    };
    format!("{letter}{clause}")
}

fn mrg_to_dot(mrg: &Mrg) -> String {
    let mut dot = String::from("digraph mrg {\n  rankdir=LR;\n");
    for node in mrg.nodes() {
        dot.push_str(&format!("  \"{}\";\n", node_name(node.task, node.clause_index)));
    }
    for edge in &mrg.edges {
        dot.push_str(&format!(
            "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
            node_name(edge.source.task, edge.source.clause_index),
            node_name(edge.target.task, edge.target.clause_index),
            edge.relation.label()
        ));
    }
    dot.push_str("}\n");
    dot
}

pub fn cmd_graph(
    n: usize,
    gamma: usize,
    variant: MrgVariant,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    if n == 0 || gamma == 0 {
        bail!("graph needs n >= 1 and gamma >= 1");
    }
    let mrg = Mrg::build(n, gamma, variant);
    println!("nodes: {}", mrg.nodes().len());
    println!("edges: {}", mrg.edges.len());
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for edge in &mrg.edges {
        *counts.entry(edge.relation.label()).or_default() += 1;
    }
    for (label, count) in counts {
        println!("{label}\t{count}");
    }
    if let Some(path) = out {
        fs::write(path, mrg_to_dot(&mrg))
            .with_context(|| format!("writing {}", path.display()))?;
        println!("wrote DOT to {}", path.display());
    }
    Ok(())
}

/// One configuration tried by a sweep: a short name plus the model/loss
/// overrides it implies.
struct SweepPoint {
    name: String,
    model: ModelConfig,
    loss: LossConfig,
}

fn sweep_points(dimension: &str, config: &RunConfig) -> anyhow::Result<Vec<SweepPoint>> {
    let base_model = config.model.clone();
    let base_loss = config.loss.clone();
    let point = |name: String, model: ModelConfig, loss: LossConfig| SweepPoint { name, model, loss };
    let points = match dimension {
        "gamma" => (1..=4)
            .map(|gamma| {
                point(
                    gamma.to_string(),
                    ModelConfig { gamma, ..base_model.clone() },
                    base_loss.clone(),
                )
            })
            .collect(),
        "steps" => (1..=6)
            .map(|steps| {
                point(
                    steps.to_string(),
                    ModelConfig { steps, ..base_model.clone() },
                    base_loss.clone(),
                )
            })
            .collect(),
        "variant" => MrgVariant::ALL
            .iter()
            .map(|&graph_variant| {
                point(
                    format!("{graph_variant:?}").to_lowercase(),
                    ModelConfig { graph_variant, ..base_model.clone() },
                    base_loss.clone(),
                )
            })
            .collect(),
        "loss" => {
            let ablations: [(&str, fn(&mut LossConfig)); 6] = [
                ("full", |_| {}),
                ("no_margin", |l| l.disable_margin = true),
                ("no_estimate", |l| l.disable_estimate = true),
                ("no_harness", |l| l.disable_harness = true),
                ("no_cause", |l| l.disable_cause = true),
                ("no_emotion", |l| l.disable_emotion = true),
            ];
            ablations
                .into_iter()
                .map(|(name, apply)| {
                    let mut loss = base_loss.clone();
                    apply(&mut loss);
                    point(name.to_string(), base_model.clone(), loss)
                })
                .collect()
        }
        other => bail!("unknown sweep dimension {other:?} (expected gamma, steps, variant, or loss)"),
    };
    Ok(points)
}

pub fn cmd_sweep(
    config: &RunConfig,
    dimension: &str,
    corpus_arg: Option<&Path>,
    values: Option<&str>,
    out: &Path,
) -> anyhow::Result<()> {
    let mut points = sweep_points(dimension, config)?;
    if let Some(values) = values {
        let wanted: Vec<&str> = values.split(',').map(str::trim).collect();
        for v in &wanted {
            if !points.iter().any(|p| p.name == *v) {
                bail!("value {v:?} is not part of the {dimension} sweep");
            }
        }
        points.retain(|p| wanted.contains(&p.name.as_str()));
    }

    let corpus = match corpus_arg.map(Path::to_path_buf).or_else(|| config.paths.corpus.clone()) {
        Some(path) => {
            load_corpus(&path).with_context(|| format!("loading {}", path.display()))?
        }
        None => generate_synthetic(&config.synth, config.master_seed())
            .context("generating sweep corpus")?,
    };

    let train_config = config.effective_train();
    let mut csv = String::from(
        "dimension,value,p_ecpe,r_ecpe,f1_ecpe,p_ee,r_ee,f1_ee,p_ce,r_ce,f1_ce\n",
    );
    for p in &points {
        let outcome = train(&corpus, &p.model, &train_config, &p.loss)
            .with_context(|| format!("training sweep point {}", p.name))?;
        let (_, dev) = split_corpus(&corpus, train_config.eval_split, train_config.seed);
        let m: Metrics = evaluate_model(&outcome.store, &p.model, &outcome.vocab, &dev)?;
        csv.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            dimension,
            p.name,
            m.ecpe.precision,
            m.ecpe.recall,
            m.ecpe.f1,
            m.ee.precision,
            m.ee.recall,
            m.ee.f1,
            m.ce.precision,
            m.ce.recall,
            m.ce.f1,
        ));
        println!("{} = {}: dev pair F1 {:.4}", dimension, p.name, m.ecpe.f1);
    }
    fs::write(out, csv).with_context(|| format!("writing {}", out.display()))?;
    println!("wrote sweep results to {}", out.display());
    Ok(())
}
