//! Scores hypothesis endings against references with corpus-level BLEU and
//! per-pair ROUGE, including the degenerate cases that pin the metric
//! definitions.
//!
//! ```bash
//! cargo run -p shgn --example evaluate_endings
//! ```

use shgn::corpus::tokenize;
use shgn::metrics::evaluate;

fn main() -> shgn::Result<()> {
    let pairs = [
        ("anna decided to keep the cake .", "anna decided to keep the cake ."),
        ("ben decided to sell the book .", "ben wanted to sell his book ."),
        ("the kite flew away", "carla decided to toss the kite ."),
    ];
    let hyps: Vec<Vec<String>> = pairs.iter().map(|(h, _)| tokenize(h)).collect();
    let refs: Vec<Vec<String>> = pairs.iter().map(|(_, r)| tokenize(r)).collect();

    let report = evaluate(&hyps, &refs)?;
    println!("{} pairs", report.n);
    for (k, score) in report.bleu.iter().enumerate() {
        println!("BLEU-{}     {:6.2}", k + 1, score * 100.0);
    }
    for (name, score) in [
        ("ROUGE-1", report.rouge.rouge1),
        ("ROUGE-2", report.rouge.rouge2),
        ("ROUGE-L", report.rouge.rouge_l),
    ] {
        println!(
            "{name}    P {:6.2}  R {:6.2}  F1 {:6.2}",
            score.precision * 100.0,
            score.recall * 100.0,
            score.f1 * 100.0
        );
    }

    // Two classic hand-checkable cases.
    let clipped = shgn::metrics::modified_precision(
        &[tokenize("the the the")],
        &[tokenize("the cat")],
        1,
    )?;
    println!("\nclipped unigram precision of 'the the the' vs 'the cat': {clipped:.4}");
    let lcs = shgn::metrics::rouge(&[tokenize("a b c")], &[tokenize("a c")])?;
    println!("ROUGE-L F1 of 'a b c' vs 'a c': {:.4}", lcs.rouge_l.f1);
    Ok(())
}
