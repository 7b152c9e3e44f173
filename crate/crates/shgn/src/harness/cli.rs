//! Command-line interface: `build-graph`, `label`, `train`, `generate`,
//! `evaluate`, and `inspect`. The binary is a thin wrapper over the library;
//! each capability is also demonstrated standalone in `examples/`.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::auxtasks::{label_stories, ClueRule};
use crate::corpus::{
    load_dep_trees, load_embeddings, load_knowledge, load_lexicon, load_stories, save_label_cache,
    Stopwords,
};
use crate::decoder::GenOptions;
use crate::error::{Result, ShgnError};
use crate::graph::{build_graph, retrieve_concepts, GraphOptions, NodeType};
use crate::harness::trainer::{write_generation_records, BeamRecord, GenerationRecord};
use crate::harness::{load_checkpoint, model_from_checkpoint, train, InitSpec, TrainConfig};
use crate::metrics::evaluate;

#[derive(Parser)]
#[command(
    name = "shgn",
    about = "Story ending generation over a heterogeneous story graph",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one story's heterogeneous graph and export it as JSON.
    BuildGraph(BuildGraphArgs),
    /// Compute sentiment and clue-word labels and write the label cache.
    Label(LabelArgs),
    /// Train a model and write checkpoints plus a step log.
    Train(Box<TrainArgs>),
    /// Decode endings for a story file with a trained checkpoint.
    Generate(GenerateArgs),
    /// Score hypothesis endings against references with BLEU and ROUGE.
    Evaluate(EvaluateArgs),
    /// Print graph statistics for one story.
    Inspect(InspectArgs),
}

#[derive(Args)]
struct GraphInputArgs {
    /// Story JSONL file.
    #[arg(long)]
    stories: PathBuf,
    /// Knowledge triples TSV (head\trelation\ttail).
    #[arg(long)]
    knowledge: Option<PathBuf>,
    /// CoNLL-U parses keyed by `<storyid>.<k>`.
    #[arg(long)]
    parses: Option<PathBuf>,
    /// Stopword list, one token per line (default list when absent).
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    no_global: bool,
    #[arg(long)]
    no_knowledge: bool,
    #[arg(long)]
    no_word: bool,
}

impl GraphInputArgs {
    fn graph_options(&self) -> GraphOptions {
        GraphOptions {
            include_global: !self.no_global,
            include_knowledge: !self.no_knowledge,
            include_word: !self.no_word,
        }
    }

    fn build_for(
        &self,
        story_id: Option<&str>,
    ) -> Result<Vec<(crate::corpus::Story, crate::graph::HeteroGraph)>> {
        let stories = load_stories(&self.stories)?;
        let knowledge = match &self.knowledge {
            Some(p) => load_knowledge(p)?,
            None => Vec::new(),
        };
        let trees = match &self.parses {
            Some(p) => Some(load_dep_trees(p)?),
            None => None,
        };
        let stopwords = match &self.stopwords {
            Some(p) => Stopwords::from_path(p)?,
            None => Stopwords::default_english(),
        };
        let selected: Vec<crate::corpus::Story> = match story_id {
            Some(id) => {
                let story = stories
                    .into_iter()
                    .find(|s| s.id == id)
                    .ok_or_else(|| ShgnError::Invalid(format!("no story with id {id:?}")))?;
                vec![story]
            }
            None => stories,
        };
        selected
            .into_iter()
            .map(|story| {
                let hits = retrieve_concepts(&story, &knowledge, trees.as_ref(), &stopwords);
                let graph = build_graph(
                    &story,
                    &hits,
                    trees.as_ref(),
                    &stopwords,
                    self.graph_options(),
                )?;
                Ok((story, graph))
            })
            .collect()
    }
}

#[derive(Args)]
struct BuildGraphArgs {
    #[command(flatten)]
    input: GraphInputArgs,
    /// Story id to export.
    #[arg(long)]
    id: String,
    /// Output JSON path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long)]
    stories: PathBuf,
    /// Token valence lexicon TSV.
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    parses: PathBuf,
    /// Output label-cache JSONL.
    #[arg(long)]
    out: PathBuf,
    /// Flag exactly two tokens per sentence (ties by index) instead of
    /// whole top-degree classes.
    #[arg(long)]
    exact_two: bool,
}

#[derive(Args)]
struct TrainArgs {
    /// TOML or JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset applied after the config file (currently: toy).
    #[arg(long)]
    preset: Option<String>,

    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    val: Option<PathBuf>,
    #[arg(long)]
    knowledge: Option<PathBuf>,
    #[arg(long)]
    parses: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,

    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    heads: Option<usize>,
    #[arg(long)]
    decoder_layers: Option<usize>,
    #[arg(long)]
    graph_layers: Option<usize>,
    #[arg(long)]
    ffn: Option<usize>,
    #[arg(long)]
    max_ending_len: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    base_lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    warmup_steps: Option<u64>,
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long)]
    grad_clip: Option<f64>,
    #[arg(long)]
    min_freq: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    beam_size: Option<usize>,
    #[arg(long)]
    hash_dim: Option<usize>,
    #[arg(long)]
    init_seed: Option<u64>,
    #[arg(long)]
    nll_stop: Option<f64>,
    #[arg(long)]
    length_norm: bool,
    #[arg(long)]
    scaled_attention: bool,
    #[arg(long)]
    deterministic: bool,
    #[arg(long)]
    no_global: bool,
    #[arg(long)]
    no_knowledge: bool,
    #[arg(long)]
    no_word: bool,
    #[arg(long)]
    no_aux: bool,
}

impl TrainArgs {
    fn into_config(self) -> Result<TrainConfig> {
        let mut cfg = match &self.config {
            Some(path) => read_config_file(path)?,
            None => TrainConfig::default(),
        };
        if let Some(preset) = &self.preset {
            cfg.apply_preset(preset)?;
        }
        macro_rules! override_opt {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$field = Some(v); })*
            };
        }
        macro_rules! override_val {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$field = v; })*
            };
        }
        override_opt!(
            train => train_path,
            val => val_path,
            knowledge => knowledge_path,
            parses => parses_path,
            lexicon => lexicon_path,
            labels => labels_path,
            stopwords => stopwords_path,
            embeddings => embeddings_path,
            ffn => ffn,
            max_steps => max_steps,
            hash_dim => hash_dim,
            nll_stop => nll_stop,
        );
        override_val!(
            hidden => hidden,
            heads => heads,
            decoder_layers => decoder_layers,
            graph_layers => graph_layers,
            max_ending_len => max_ending_len,
            batch_size => batch_size,
            base_lr => base_lr,
            epochs => epochs,
            warmup_steps => warmup_steps,
            lambda1 => lambda1,
            lambda2 => lambda2,
            grad_clip => grad_clip,
            min_freq => min_freq,
            seed => seed,
            beam_size => beam_size,
            init_seed => init_seed,
        );
        if let Some(dir) = self.out_dir {
            cfg.out_dir = dir;
        }
        if self.length_norm {
            cfg.length_norm = true;
        }
        if self.scaled_attention {
            cfg.scaled_attention = true;
        }
        if self.deterministic {
            cfg.deterministic = true;
        }
        if self.no_global {
            cfg.no_global = true;
        }
        if self.no_knowledge {
            cfg.no_knowledge = true;
        }
        if self.no_word {
            cfg.no_word = true;
        }
        if self.no_aux {
            cfg.no_aux = true;
        }
        Ok(cfg)
    }
}

fn read_config_file(path: &PathBuf) -> Result<TrainConfig> {
    let text =
        fs::read_to_string(path).map_err(|e| ShgnError::io(path.display().to_string(), e))?;
    let is_toml = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    if is_toml {
        toml::from_str(&text)
            .map_err(|e| ShgnError::Invalid(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(&text)
            .map_err(|e| ShgnError::Invalid(format!("{}: {e}", path.display())))
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[command(flatten)]
    input: GraphInputArgs,
    /// Embedding table for checkpoints trained with a pretrained-table
    /// initializer.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Output JSONL path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5)]
    beam: usize,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    length_norm: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Hypothesis JSONL ({id, ending, ...} per line).
    #[arg(long)]
    hyp: PathBuf,
    /// Reference JSONL ({id, ending, ...} per line).
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Optional JSON report output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    #[command(flatten)]
    input: GraphInputArgs,
    #[arg(long)]
    id: String,
}

pub fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::BuildGraph(args) => run_build_graph(args),
        Command::Label(args) => run_label(args),
        Command::Train(args) => run_train(*args),
        Command::Generate(args) => run_generate(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Inspect(args) => run_inspect(args),
    }
}

fn run_build_graph(args: BuildGraphArgs) -> Result<()> {
    let built = args.input.build_for(Some(&args.id))?;
    let (_, graph) = &built[0];
    let json = serde_json::to_string_pretty(&graph.export()).expect("graph export serializes");
    match &args.out {
        Some(path) => {
            fs::write(path, json).map_err(|e| ShgnError::io(path.display().to_string(), e))?
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn run_label(args: LabelArgs) -> Result<()> {
    let mut stories = load_stories(&args.stories)?;
    let lexicon = load_lexicon(&args.lexicon)?;
    let trees = load_dep_trees(&args.parses)?;
    let rule = if args.exact_two {
        ClueRule::ExactTwoByIndex
    } else {
        ClueRule::TopDegreeClasses
    };
    label_stories(&mut stories, &lexicon, &trees, rule)?;
    save_label_cache(&args.out, &stories)?;
    println!("labeled {} stories -> {}", stories.len(), args.out.display());
    Ok(())
}

fn run_train(args: TrainArgs) -> Result<()> {
    let cfg = args.into_config()?;
    let outcome = train(&cfg)?;
    println!(
        "trained {} steps over {} epochs; final train NLL/token {:.4}, best val NLL/token {:.4}",
        outcome.steps, outcome.epochs_run, outcome.final_train_nll, outcome.best_val_nll
    );
    println!(
        "wrote {} and checkpoints under {}",
        cfg.out_dir.join("train_log.jsonl").display(),
        cfg.out_dir.display()
    );
    Ok(())
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let checkpoint = load_checkpoint(&args.checkpoint)?;
    let table = match &args.embeddings {
        Some(p) => Some(load_embeddings(p)?),
        None => None,
    };
    let model = model_from_checkpoint(&checkpoint, table)?;

    // The flags must describe the same configuration the checkpoint was
    // trained with; the recorded hash catches mismatches.
    let mut candidate = TrainConfig {
        hidden: checkpoint.hidden,
        heads: checkpoint.heads,
        decoder_layers: checkpoint.decoder_layers,
        graph_layers: checkpoint.graph_layers,
        ffn: Some(checkpoint.ffn),
        max_ending_len: checkpoint.max_len,
        scaled_attention: checkpoint.scaled_attention,
        no_global: args.input.no_global,
        no_knowledge: args.input.no_knowledge,
        no_word: args.input.no_word,
        embeddings_path: args.embeddings.clone(),
        ..TrainConfig::default()
    };
    match &checkpoint.init {
        InitSpec::Hash { dim, seed } => {
            candidate.hash_dim = Some(*dim);
            candidate.init_seed = *seed;
        }
        InitSpec::Table { .. } => {}
    }
    if candidate.config_hash() != checkpoint.config_hash {
        return Err(ShgnError::Checkpoint(format!(
            "config hash mismatch: flags give {:#x}, checkpoint has {:#x} \
             (check ablation/initializer flags)",
            candidate.config_hash(),
            checkpoint.config_hash
        )));
    }

    let max_len = args.max_len.unwrap_or(checkpoint.max_len);
    let opts = GenOptions {
        beam_size: args.beam,
        max_len,
        length_norm: args.length_norm,
    };
    let built = args.input.build_for(None)?;
    let mut records = Vec::with_capacity(built.len());
    for (story, graph) in &built {
        let result = model.generate_for(graph, opts)?;
        records.push(GenerationRecord {
            id: story.id.clone(),
            ending: result.text(&model.vocab),
            score: result.score,
            beams: result
                .beams
                .iter()
                .map(|b| BeamRecord {
                    text: model.vocab.render(&b.tokens),
                    score: b.score,
                })
                .collect(),
        });
    }
    write_generation_records(&args.out, &records)?;
    println!("generated {} endings -> {}", records.len(), args.out.display());
    Ok(())
}

fn endings_by_id(path: &PathBuf) -> Result<Vec<(String, Vec<String>)>> {
    let text =
        fs::read_to_string(path).map_err(|e| ShgnError::io(path.display().to_string(), e))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| {
            ShgnError::parse(path.display().to_string(), lineno + 1, e.to_string())
        })?;
        let id = value
            .get("id")
            .and_then(|v| v.as_str())
            .ok_or_else(|| {
                ShgnError::parse(path.display().to_string(), lineno + 1, "missing id field")
            })?
            .to_string();
        let ending = value
            .get("ending")
            .and_then(|v| v.as_str())
            .ok_or_else(|| {
                ShgnError::parse(
                    path.display().to_string(),
                    lineno + 1,
                    "missing ending field",
                )
            })?;
        out.push((id, crate::corpus::tokenize(ending)));
    }
    Ok(out)
}

fn run_evaluate(args: EvaluateArgs) -> Result<()> {
    let hyp_records = endings_by_id(&args.hyp)?;
    let ref_records: HashMap<String, Vec<String>> =
        endings_by_id(&args.reference)?.into_iter().collect();
    let mut hyps = Vec::with_capacity(hyp_records.len());
    let mut refs = Vec::with_capacity(hyp_records.len());
    for (id, hyp) in hyp_records {
        let reference = ref_records
            .get(&id)
            .ok_or_else(|| ShgnError::Invalid(format!("no reference for id {id:?}")))?;
        hyps.push(hyp);
        refs.push(reference.clone());
    }
    let report = evaluate(&hyps, &refs)?;
    println!("metric        score");
    for (k, b) in report.bleu.iter().enumerate() {
        println!("BLEU-{}        {:6.2}", k + 1, b * 100.0);
    }
    for (name, score) in [
        ("ROUGE-1", report.rouge.rouge1),
        ("ROUGE-2", report.rouge.rouge2),
        ("ROUGE-L", report.rouge.rouge_l),
    ] {
        println!("{name}-P     {:6.2}", score.precision * 100.0);
        println!("{name}-R     {:6.2}", score.recall * 100.0);
        println!("{name}-F1    {:6.2}", score.f1 * 100.0);
    }
    println!("pairs         {}", report.n);
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        fs::write(path, json).map_err(|e| ShgnError::io(path.display().to_string(), e))?;
    }
    Ok(())
}

fn run_inspect(args: InspectArgs) -> Result<()> {
    let built = args.input.build_for(Some(&args.id))?;
    let (story, graph) = &built[0];
    println!("story {} ({} context sentences)", story.id, story.sentence_count());
    let mut node_counts = [0usize; 4];
    for node in graph.nodes() {
        node_counts[node.kind.index()] += 1;
    }
    println!("nodes: {}", graph.node_count());
    for kind in NodeType::ALL {
        println!("  {:<10} {}", kind.name(), node_counts[kind.index()]);
    }
    let mut edge_counts: HashMap<&'static str, usize> = HashMap::new();
    for edge in graph.edges() {
        *edge_counts.entry(edge.kind.name()).or_insert(0) += 1;
    }
    println!("edges: {}", graph.edges().len());
    for kind in crate::graph::EdgeType::ALL {
        println!("  {:<22} {}", kind.name(), edge_counts.get(kind.name()).copied().unwrap_or(0));
    }
    println!("node list:");
    for node in graph.nodes() {
        println!("  {:<12} {:<10} {}", node.id, node.kind.name(), node.text);
    }
    Ok(())
}
