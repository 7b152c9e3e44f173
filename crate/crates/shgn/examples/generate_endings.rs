//! Trains briefly on the demo corpus, then decodes endings with beam search
//! and shows the surviving hypotheses.
//!
//! ```bash
//! cargo run --release -p shgn --example generate_endings
//! ```

use shgn::auxtasks::{label_stories, ClueRule};
use shgn::corpus::{load_dep_trees, load_knowledge, load_lexicon, load_stories, Stopwords};
use shgn::decoder::GenOptions;
use shgn::encoder::NodeInitializer;
use shgn::harness::{prepare_model_inputs, train_in_memory, TrainConfig};

fn main() -> shgn::Result<()> {
    let data = std::env::temp_dir().join("shgn_toy_corpus");
    shgn::toydata::write_all(&data)?;
    let mut stories = load_stories(data.join("stories.jsonl"))?;
    let knowledge = load_knowledge(data.join("knowledge.tsv"))?;
    let trees = load_dep_trees(data.join("parses.conllu"))?;
    let lexicon = load_lexicon(data.join("lexicon.tsv"))?;
    let stopwords = Stopwords::default_english();
    label_stories(&mut stories, &lexicon, &trees, ClueRule::TopDegreeClasses)?;

    let mut cfg = TrainConfig::toy();
    cfg.epochs = 300;
    cfg.nll_stop = Some(0.05);
    let graphs = prepare_model_inputs(&cfg, &stories, &knowledge, Some(&trees), &stopwords)?;
    let init = NodeInitializer::HashDeterministic {
        dim: cfg.hidden,
        seed: cfg.init_seed,
    };
    println!("training until the endings are memorized...");
    let outcome = train_in_memory(&cfg, &stories, &graphs, None, init)?;
    println!(
        "done after {} steps (train NLL/token {:.4})\n",
        outcome.steps, outcome.final_train_nll
    );

    let opts = GenOptions {
        beam_size: 5,
        max_len: 10,
        length_norm: false,
    };
    for (story, graph) in stories.iter().zip(graphs.iter()).take(4) {
        let result = outcome.model.generate_for(graph, opts)?;
        println!("story {}", story.id);
        println!("  gold ending: {}", story.ending.as_ref().unwrap().join(" "));
        println!(
            "  beam-5 best: {} (score {:.3})",
            result.text(&outcome.model.vocab),
            result.score
        );
        for (rank, beam) in result.beams.iter().enumerate().take(3) {
            println!(
                "    #{rank} {:<40} {:.3}",
                outcome.model.vocab.render(&beam.tokens),
                beam.score
            );
        }
    }
    Ok(())
}
