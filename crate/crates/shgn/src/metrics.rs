//! Corpus-level BLEU-1..4 and ROUGE-1/2/L over tokenized hypothesis/reference
//! pairs (single reference per hypothesis).
//!
//! BLEU uses corpus-level modified n-gram precision with a brevity penalty;
//! zero clipped-match counts are smoothed to 1e-9 (scores vary across
//! toolkits, so nothing here is calibrated against third-party decimals).
//! ROUGE is averaged per pair: n-gram precision/recall/F1 for ROUGE-1/2 and
//! longest-common-subsequence F1 (beta = 1) for ROUGE-L.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShgnError};

const SMOOTH_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RougeScores {
    pub rouge1: RougeScore,
    pub rouge2: RougeScore,
    pub rouge_l: RougeScore,
}

/// Full automatic-evaluation report; scores are fractions in [0, 1]
/// (multiplied by 100 for display).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub bleu: [f64; 4],
    pub rouge: RougeScores,
    /// Number of evaluated pairs.
    pub n: usize,
}

fn check_pairs(hypotheses: &[Vec<String>], references: &[Vec<String>]) -> Result<()> {
    if hypotheses.is_empty() {
        return Err(ShgnError::Invalid("no hypothesis/reference pairs".into()));
    }
    if hypotheses.len() != references.len() {
        return Err(ShgnError::Invalid(format!(
            "{} hypotheses vs {} references",
            hypotheses.len(),
            references.len()
        )));
    }
    Ok(())
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus-level modified n-gram precision: clipped matches over total
/// hypothesis n-grams, summed across all pairs before dividing.
pub fn modified_precision(
    hypotheses: &[Vec<String>],
    references: &[Vec<String>],
    n: usize,
) -> Result<f64> {
    check_pairs(hypotheses, references)?;
    let mut matches = 0usize;
    let mut total = 0usize;
    for (hyp, reference) in hypotheses.iter().zip(references.iter()) {
        let hyp_counts = ngram_counts(hyp, n);
        let ref_counts = ngram_counts(reference, n);
        for (gram, &count) in &hyp_counts {
            total += count;
            matches += count.min(ref_counts.get(gram).copied().unwrap_or(0));
        }
    }
    if total == 0 {
        return Ok(SMOOTH_EPS);
    }
    let numerator = if matches == 0 {
        SMOOTH_EPS
    } else {
        matches as f64
    };
    Ok(numerator / total as f64)
}

/// Corpus-level BLEU-1..4: each B_k is the brevity penalty times the
/// geometric mean of the modified precisions p_1..p_k.
pub fn bleu(hypotheses: &[Vec<String>], references: &[Vec<String>]) -> Result<[f64; 4]> {
    check_pairs(hypotheses, references)?;
    let precisions: Vec<f64> = (1..=4)
        .map(|n| modified_precision(hypotheses, references, n))
        .collect::<Result<_>>()?;
    let hyp_len: usize = hypotheses.iter().map(Vec::len).sum();
    let ref_len: usize = references.iter().map(Vec::len).sum();
    let bp = if hyp_len == 0 {
        0.0
    } else if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    let mut scores = [0.0; 4];
    for k in 1..=4 {
        let mean_log: f64 =
            precisions[..k].iter().map(|p| p.ln()).sum::<f64>() / k as f64;
        scores[k - 1] = bp * mean_log.exp();
    }
    Ok(scores)
}

fn rouge_n_pair(hyp: &[String], reference: &[String], n: usize) -> RougeScore {
    let hyp_counts = ngram_counts(hyp, n);
    let ref_counts = ngram_counts(reference, n);
    let hyp_total: usize = hyp_counts.values().sum();
    let ref_total: usize = ref_counts.values().sum();
    let overlap: usize = hyp_counts
        .iter()
        .map(|(gram, &count)| count.min(ref_counts.get(gram).copied().unwrap_or(0)))
        .sum();
    score_from_counts(overlap, hyp_total, ref_total)
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn score_from_counts(overlap: usize, hyp_total: usize, ref_total: usize) -> RougeScore {
    let precision = if hyp_total == 0 {
        0.0
    } else {
        overlap as f64 / hyp_total as f64
    };
    let recall = if ref_total == 0 {
        0.0
    } else {
        overlap as f64 / ref_total as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    RougeScore {
        precision,
        recall,
        f1,
    }
}

fn mean_scores(scores: &[RougeScore]) -> RougeScore {
    let n = scores.len() as f64;
    RougeScore {
        precision: scores.iter().map(|s| s.precision).sum::<f64>() / n,
        recall: scores.iter().map(|s| s.recall).sum::<f64>() / n,
        f1: scores.iter().map(|s| s.f1).sum::<f64>() / n,
    }
}

/// ROUGE-1, ROUGE-2, and ROUGE-L, each averaged per pair over the corpus.
pub fn rouge(hypotheses: &[Vec<String>], references: &[Vec<String>]) -> Result<RougeScores> {
    check_pairs(hypotheses, references)?;
    let mut r1 = Vec::with_capacity(hypotheses.len());
    let mut r2 = Vec::with_capacity(hypotheses.len());
    let mut rl = Vec::with_capacity(hypotheses.len());
    for (hyp, reference) in hypotheses.iter().zip(references.iter()) {
        r1.push(rouge_n_pair(hyp, reference, 1));
        r2.push(rouge_n_pair(hyp, reference, 2));
        let lcs = lcs_len(hyp, reference);
        rl.push(score_from_counts(lcs, hyp.len(), reference.len()));
    }
    Ok(RougeScores {
        rouge1: mean_scores(&r1),
        rouge2: mean_scores(&r2),
        rouge_l: mean_scores(&rl),
    })
}

/// BLEU plus ROUGE in one report.
pub fn evaluate(hypotheses: &[Vec<String>], references: &[Vec<String>]) -> Result<EvalReport> {
    Ok(EvalReport {
        bleu: bleu(hypotheses, references)?,
        rouge: rouge(hypotheses, references)?,
        n: hypotheses.len(),
    })
}
