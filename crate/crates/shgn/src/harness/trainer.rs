use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::auxtasks::{label_stories, ClueRule, LossWeights};
use crate::corpus::{
    apply_label_cache, load_dep_trees, load_embeddings, load_knowledge, load_label_cache,
    load_lexicon, load_stories, DepTree, KnowledgeEdge, SentimentLexicon, Stopwords, Story,
};
use crate::decoder::Vocab;
use crate::encoder::NodeInitializer;
use crate::error::{Result, ShgnError};
use crate::graph::{build_graph, retrieve_concepts, HeteroGraph};
use crate::harness::{lr_schedule, save_checkpoint, Adam, TrainConfig};
use crate::model::Model;
use crate::numerics::{GradStore, SeededRng, Tensor};

/// One optimizer step's log record, written as a JSON line.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepLog {
    pub step: u64,
    pub lr: f64,
    pub loss: f64,
    pub loss_gen: f64,
    pub loss_sen: f64,
    pub loss_clu: f64,
}

pub struct TrainOutcome {
    pub log: Vec<StepLog>,
    /// Final (last-step) model.
    pub model: Model,
    pub optimizer: Adam,
    pub steps: u64,
    pub epochs_run: usize,
    /// Validation per-token generation NLL of the best epoch.
    pub best_val_nll: f64,
    /// Parameter values of the best epoch, in registration order.
    pub best_params: Vec<Tensor>,
    pub final_train_nll: f64,
    pub stopped_early: bool,
}

/// Builds each story's graph under the config's ablation options.
pub fn prepare_model_inputs(
    cfg: &TrainConfig,
    stories: &[Story],
    knowledge: &[KnowledgeEdge],
    trees: Option<&HashMap<String, DepTree>>,
    stopwords: &Stopwords,
) -> Result<Vec<HeteroGraph>> {
    stories
        .iter()
        .map(|story| {
            let hits = retrieve_concepts(story, knowledge, trees, stopwords);
            build_graph(story, &hits, trees, stopwords, cfg.graph_options())
        })
        .collect()
}

/// Mean per-token generation NLL over a story set (forward only).
pub fn per_token_nll(model: &Model, stories: &[Story], graphs: &[HeteroGraph]) -> Result<f64> {
    let unweighted = LossWeights::new(0.0, 0.0)?;
    let mut nll_sum = 0.0;
    let mut tokens = 0usize;
    for (story, graph) in stories.iter().zip(graphs.iter()) {
        let losses = model.story_losses(story, graph, unweighted, false)?;
        nll_sum += losses.gen_sum;
        tokens += losses.token_count;
    }
    if tokens == 0 {
        return Err(ShgnError::Invalid("no target tokens to evaluate".into()));
    }
    Ok(nll_sum / tokens as f64)
}

fn diagnostics_dump(model: &Model, step: u64, log: &[StepLog]) -> String {
    let mut lines = vec![format!("non-finite loss at step {step}")];
    for (name, tensor) in model.store.iter() {
        lines.push(format!(
            "param {name}: norm {:.6e} finite {}",
            tensor.sq_l2_norm().sqrt(),
            tensor.all_finite()
        ));
    }
    if let Some(last) = log.last() {
        lines.push(format!(
            "last logged step {}: loss {} gen {} sen {} clu {}",
            last.step, last.loss, last.loss_gen, last.loss_sen, last.loss_clu
        ));
    }
    lines.join("\n")
}

/// Core training loop over already-loaded, already-labeled stories and their
/// graphs. Single-threaded and fully deterministic given the config seed.
pub fn train_in_memory(
    cfg: &TrainConfig,
    train_stories: &[Story],
    train_graphs: &[HeteroGraph],
    val: Option<(&[Story], &[HeteroGraph])>,
    init: NodeInitializer,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_stories.is_empty() {
        return Err(ShgnError::Invalid("empty training set".into()));
    }
    let (l1, l2) = cfg.effective_lambdas();
    let weights = LossWeights::new(l1, l2)?;

    let lists: Vec<&[String]> = train_stories
        .iter()
        .flat_map(|s| {
            s.context
                .iter()
                .map(Vec::as_slice)
                .chain(s.ending.as_deref())
        })
        .collect();
    let vocab = Vocab::from_token_lists(lists.into_iter(), cfg.min_freq);

    let mut model = Model::new(
        cfg.model_dims(),
        vocab,
        init,
        cfg.seed,
        cfg.scaled_attention,
    )?;
    let mut adam = Adam::new(&model.store, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);

    // Bucket stories by node count so batches stay size-homogeneous.
    let mut order: Vec<usize> = (0..train_stories.len()).collect();
    order.sort_by_key(|&i| (train_graphs[i].node_count(), i));
    let batches: Vec<Vec<usize>> = order
        .chunks(cfg.batch_size)
        .map(<[usize]>::to_vec)
        .collect();

    let mut rng = SeededRng::new(cfg.seed ^ 0xba7c4);
    let mut log: Vec<StepLog> = Vec::new();
    let mut step = 0u64;
    let mut best_val_nll = f64::INFINITY;
    let mut best_params: Vec<Tensor> = snapshot(&model);
    let mut epochs_run = 0;
    let mut stopped_early = false;

    'epochs: for _epoch in 0..cfg.epochs {
        epochs_run += 1;
        let mut batch_order: Vec<usize> = (0..batches.len()).collect();
        rng.shuffle(&mut batch_order);
        for &b in &batch_order {
            let batch = &batches[b];
            let mut grads = GradStore::zeros(&model.store);
            let mut total = 0.0;
            let mut gen = 0.0;
            let mut sen = 0.0;
            let mut clu = 0.0;
            for &i in batch {
                let losses = model
                    .story_losses(&train_stories[i], &train_graphs[i], weights, true)
                    .map_err(|err| match err {
                        ShgnError::NonFinite(_) => {
                            ShgnError::NonFinite(diagnostics_dump(&model, step, &log))
                        }
                        other => other,
                    })?;
                grads.accumulate(losses.grads.as_ref().expect("gradients requested"))?;
                total += losses.total;
                gen += losses.gen_mean;
                sen += losses.sen;
                clu += losses.clu;
            }
            let n = batch.len() as f64;
            grads.scale(1.0 / n);
            let entry = StepLog {
                step,
                lr: lr_schedule(step, cfg.base_lr, cfg.warmup_steps),
                loss: total / n,
                loss_gen: gen / n,
                loss_sen: sen / n,
                loss_clu: clu / n,
            };
            if !entry.loss.is_finite() || !grads.all_finite() {
                return Err(ShgnError::NonFinite(diagnostics_dump(&model, step, &log)));
            }
            grads.clip_global_norm(cfg.grad_clip);
            adam.step(&mut model.store, &grads, entry.lr)?;
            log.push(entry);
            step += 1;
            if cfg.max_steps.is_some_and(|max| step >= max) {
                stopped_early = true;
                break 'epochs;
            }
        }

        let train_nll = per_token_nll(&model, train_stories, train_graphs)?;
        let val_nll = match val {
            Some((vs, vg)) => per_token_nll(&model, vs, vg)?,
            None => train_nll,
        };
        if val_nll < best_val_nll {
            best_val_nll = val_nll;
            best_params = snapshot(&model);
        }
        if cfg.nll_stop.is_some_and(|t| train_nll < t) {
            stopped_early = true;
            break 'epochs;
        }
    }

    let final_train_nll = per_token_nll(&model, train_stories, train_graphs)?;
    if best_val_nll.is_infinite() {
        best_val_nll = final_train_nll;
        best_params = snapshot(&model);
    }
    Ok(TrainOutcome {
        log,
        model,
        optimizer: adam,
        steps: step,
        epochs_run,
        best_val_nll,
        best_params,
        final_train_nll,
        stopped_early,
    })
}

fn snapshot(model: &Model) -> Vec<Tensor> {
    model.store.iter().map(|(_, t)| t.clone()).collect()
}

fn load_stopwords(cfg: &TrainConfig) -> Result<Stopwords> {
    match &cfg.stopwords_path {
        Some(p) => Stopwords::from_path(p),
        None => Ok(Stopwords::default_english()),
    }
}

fn build_initializer(cfg: &TrainConfig) -> Result<NodeInitializer> {
    match &cfg.embeddings_path {
        Some(p) => Ok(NodeInitializer::PretrainedTable(load_embeddings(p)?)),
        None => Ok(NodeInitializer::HashDeterministic {
            dim: cfg.hash_dim.unwrap_or(cfg.hidden),
            seed: cfg.init_seed,
        }),
    }
}

/// File-driven training: loads every input named in the config, labels the
/// stories (from the cache or the lexicon + parses), trains, and writes the
/// step log plus best/last checkpoints into `out_dir`.
pub fn train(cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let train_path = cfg
        .train_path
        .as_ref()
        .ok_or_else(|| ShgnError::Invalid("train_path is required".into()))?;
    let mut stories = load_stories(train_path)?;
    let knowledge = match &cfg.knowledge_path {
        Some(p) => load_knowledge(p)?,
        None => Vec::new(),
    };
    let trees = match &cfg.parses_path {
        Some(p) => Some(load_dep_trees(p)?),
        None => None,
    };
    let stopwords = load_stopwords(cfg)?;

    let (l1, l2) = cfg.effective_lambdas();
    if l1 > 0.0 || l2 > 0.0 {
        if let Some(cache_path) = &cfg.labels_path {
            let cache = load_label_cache(cache_path)?;
            apply_label_cache(&mut stories, &cache)?;
        } else {
            let lexicon = match &cfg.lexicon_path {
                Some(p) => load_lexicon(p)?,
                None => SentimentLexicon::empty(),
            };
            let trees_ref = trees.as_ref().ok_or_else(|| {
                ShgnError::Invalid(
                    "clue labeling needs parses_path (or a labels_path cache)".into(),
                )
            })?;
            label_stories(&mut stories, &lexicon, trees_ref, ClueRule::TopDegreeClasses)?;
        }
    }

    let graphs = prepare_model_inputs(cfg, &stories, &knowledge, trees.as_ref(), &stopwords)?;

    let val_data = match &cfg.val_path {
        Some(p) => {
            let val_stories = load_stories(p)?;
            let val_graphs =
                prepare_model_inputs(cfg, &val_stories, &knowledge, trees.as_ref(), &stopwords)?;
            Some((val_stories, val_graphs))
        }
        None => None,
    };

    let init = build_initializer(cfg)?;
    let outcome = match train_in_memory(
        cfg,
        &stories,
        &graphs,
        val_data
            .as_ref()
            .map(|(s, g)| (s.as_slice(), g.as_slice())),
        init,
    ) {
        Ok(outcome) => outcome,
        Err(err) => {
            // Leave a diagnostics file next to where the checkpoints would go.
            if let ShgnError::NonFinite(dump) = &err {
                let _ = fs::create_dir_all(&cfg.out_dir);
                let _ = fs::write(cfg.out_dir.join("diagnostics.txt"), dump);
            }
            return Err(err);
        }
    };

    write_outputs(cfg, &outcome)?;
    Ok(outcome)
}

fn write_outputs(cfg: &TrainConfig, outcome: &TrainOutcome) -> Result<()> {
    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| ShgnError::io(cfg.out_dir.display().to_string(), e))?;
    let mut log_text = String::new();
    for entry in &outcome.log {
        log_text.push_str(&serde_json::to_string(entry).expect("log entry serializes"));
        log_text.push('\n');
    }
    let log_path = cfg.out_dir.join("train_log.jsonl");
    fs::write(&log_path, log_text).map_err(|e| ShgnError::io(log_path.display().to_string(), e))?;

    let hash = cfg.config_hash();
    save_checkpoint(
        cfg.out_dir.join("checkpoint_last.json"),
        &outcome.model,
        Some(&outcome.optimizer),
        outcome.steps,
        hash,
    )?;

    // Best checkpoint: same model with the best epoch's parameter values.
    let mut best = Model::new(
        cfg.model_dims(),
        outcome.model.vocab.clone(),
        match &outcome.model.init {
            NodeInitializer::HashDeterministic { dim, seed } => {
                NodeInitializer::HashDeterministic {
                    dim: *dim,
                    seed: *seed,
                }
            }
            NodeInitializer::PretrainedTable(t) => NodeInitializer::PretrainedTable(t.clone()),
        },
        cfg.seed,
        cfg.scaled_attention,
    )?;
    for (i, tensor) in outcome.best_params.iter().enumerate() {
        *best.store.get_mut(crate::numerics::ParamId(i)) = tensor.clone();
    }
    save_checkpoint(
        cfg.out_dir.join("checkpoint_best.json"),
        &best,
        None,
        outcome.steps,
        hash,
    )?;
    Ok(())
}

/// Writes generation results as JSONL records.
#[derive(Serialize, Deserialize)]
pub struct GenerationRecord {
    pub id: String,
    pub ending: String,
    pub score: f64,
    pub beams: Vec<BeamRecord>,
}

#[derive(Serialize, Deserialize)]
pub struct BeamRecord {
    pub text: String,
    pub score: f64,
}

pub fn write_generation_records(path: impl AsRef<Path>, records: &[GenerationRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("generation record serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| ShgnError::io(path.display().to_string(), e))
}
