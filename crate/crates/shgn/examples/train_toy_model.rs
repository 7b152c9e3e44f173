//! Trains the desk-scale model on the 32-story demo corpus until it
//! memorizes the endings, then writes checkpoints and the step log.
//!
//! ```bash
//! cargo run --release -p shgn --example train_toy_model
//! ```

use shgn::harness::{train, TrainConfig};

fn main() -> shgn::Result<()> {
    let data = std::env::temp_dir().join("shgn_toy_corpus");
    shgn::toydata::write_all(&data)?;

    let mut cfg = TrainConfig::toy();
    cfg.train_path = Some(data.join("stories.jsonl"));
    cfg.knowledge_path = Some(data.join("knowledge.tsv"));
    cfg.parses_path = Some(data.join("parses.conllu"));
    cfg.lexicon_path = Some(data.join("lexicon.tsv"));
    cfg.out_dir = std::env::temp_dir().join("shgn_toy_run");
    cfg.epochs = 300;
    cfg.nll_stop = Some(0.05);

    let outcome = train(&cfg)?;
    println!(
        "trained {} steps over {} epochs; final train NLL/token {:.4}",
        outcome.steps, outcome.epochs_run, outcome.final_train_nll
    );
    for entry in outcome.log.iter().step_by(25) {
        println!(
            "  step {:>4}  lr {:.5}  L {:.4}  gen {:.4}  sen {:.4}  clu {:.4}",
            entry.step, entry.lr, entry.loss, entry.loss_gen, entry.loss_sen, entry.loss_clu
        );
    }
    println!(
        "checkpoints and train_log.jsonl written under {}",
        cfg.out_dir.display()
    );
    Ok(())
}
