//! Verifies the analytic gradients of the complete multi-task loss against
//! central finite differences, for every entry of every parameter, on a
//! six-node fixture graph.
//!
//! ```bash
//! cargo run --release -p shgn --example gradient_check
//! ```

use shgn::auxtasks::LossWeights;
use shgn::corpus::{tokenize, Sentiment, Stopwords, Story};
use shgn::decoder::Vocab;
use shgn::encoder::NodeInitializer;
use shgn::graph::{build_graph, ConceptHit, GraphOptions};
use shgn::model::{Model, ModelDims};
use shgn::numerics::{grad_check, GradMode, LossEval};

fn main() -> shgn::Result<()> {
    let story = Story {
        id: "fix".into(),
        context: vec![tokenize("the milk ."), tokenize("some cereal .")],
        ending: Some(tokenize("it was food .")),
        sentiment_label: Some(Sentiment::Neutral),
        clue_flags: Some(vec![vec![false, true, false], vec![false, true, false]]),
    };
    let hits = vec![ConceptHit {
        concept: "food".into(),
        source_sentences: [1, 2].into_iter().collect(),
        trigger_tokens: Default::default(),
    }];
    let graph = build_graph(
        &story,
        &hits,
        None,
        &Stopwords::default_english(),
        GraphOptions::default(),
    )?;
    println!(
        "fixture graph: {} nodes, {} edges",
        graph.node_count(),
        graph.edges().len()
    );

    let lists: Vec<&[String]> = story
        .context
        .iter()
        .map(Vec::as_slice)
        .chain(story.ending.as_deref())
        .collect();
    let vocab = Vocab::from_token_lists(lists.into_iter(), 1);
    let mut model = Model::new(
        ModelDims {
            hidden: 8,
            heads: 4,
            graph_layers: 1,
            decoder_layers: 2,
            ffn: 32,
            max_len: 10,
        },
        vocab,
        NodeInitializer::HashDeterministic { dim: 8, seed: 0 },
        7,
        false,
    )?;
    let weights = LossWeights::default();

    let started = std::time::Instant::now();
    let mut store = std::mem::take(&mut model.store);
    let report = grad_check(
        &mut store,
        |store, mode| {
            let losses = model.story_losses_in(
                store,
                &story,
                &graph,
                weights,
                mode == GradMode::WithGrads,
            )?;
            Ok(LossEval {
                value: losses.total,
                grads: losses.grads,
            })
        },
        1e-5,
        1e-4,
    )?;
    model.store = store;

    println!(
        "checked {} parameter entries in {:.2?}: max relative error {:.3e}, {} failures",
        report.entries_checked,
        started.elapsed(),
        report.max_rel_err,
        report.failures.len()
    );
    for failure in report.failures.iter().take(5) {
        println!(
            "  {}[{}]: analytic {:.6e} vs numeric {:.6e}",
            failure.param, failure.index, failure.analytic, failure.numeric
        );
    }
    if report.passed() {
        println!("gradients agree with finite differences at tolerance 1e-4");
    }
    Ok(())
}
