//! Auxiliary-task labeling and heads: sentiment of the gold ending (via a
//! lexicon compound score), clue-word flags (top-degree tokens of each
//! sentence's dependency tree), the two prediction heads over encoder states,
//! and the combined multi-task objective.

use std::collections::HashMap;

use crate::corpus::{trees_for_story, DepTree, SentimentLexicon, Sentiment, Story};
use crate::encoder::NodeStates;
use crate::error::{Result, ShgnError};
use crate::graph::HeteroGraph;
use crate::numerics::{ParamId, ParamStore, SeededRng, Tape, Var};

/// Compound sentiment score of a bag of tokens:
/// `sum(valence) / sqrt(sum(valence^2) + 15)`.
pub fn compound_score(tokens: &[String], lexicon: &SentimentLexicon) -> f64 {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for token in tokens {
        let v = lexicon.valence(token);
        sum += v;
        sum_sq += v * v;
    }
    sum / (sum_sq + 15.0).sqrt()
}

/// Labels an ending: positive when the compound score is >= 0.05, negative
/// when <= -0.05, neutral otherwise. Total; an empty lexicon labels
/// everything neutral.
pub fn label_sentiment(tokens: &[String], lexicon: &SentimentLexicon) -> Sentiment {
    let compound = compound_score(tokens, lexicon);
    if compound >= 0.05 {
        Sentiment::Positive
    } else if compound <= -0.05 {
        Sentiment::Negative
    } else {
        Sentiment::Neutral
    }
}

/// How "top-2-degree" tokens are selected per sentence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClueRule {
    /// Walk degree values from highest down, flagging complete equivalence
    /// classes until at least min(2, len) tokens are flagged. Ties included.
    TopDegreeClasses,
    /// Exactly two tokens, ties broken by token index.
    ExactTwoByIndex,
}

/// Clue flags for one parsed sentence.
pub fn clue_flags_for_tree(tree: &DepTree, rule: ClueRule) -> Vec<bool> {
    let n = tree.len();
    let degrees: Vec<usize> = (0..n).map(|i| tree.degree(i)).collect();
    let mut flags = vec![false; n];
    match rule {
        ClueRule::TopDegreeClasses => {
            let mut values: Vec<usize> = degrees.clone();
            values.sort_unstable_by(|a, b| b.cmp(a));
            values.dedup();
            let needed = n.min(2);
            let mut flagged = 0;
            for value in values {
                if flagged >= needed {
                    break;
                }
                for i in 0..n {
                    if degrees[i] == value {
                        flags[i] = true;
                        flagged += 1;
                    }
                }
            }
        }
        ClueRule::ExactTwoByIndex => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| degrees[b].cmp(&degrees[a]).then(a.cmp(&b)));
            for &i in order.iter().take(2) {
                flags[i] = true;
            }
        }
    }
    flags
}

/// Clue flags for every context token of a story; errors when a sentence has
/// no tree or the tree's token count mismatches.
pub fn label_clue_words(
    story: &Story,
    trees: &HashMap<String, DepTree>,
    rule: ClueRule,
) -> Result<Vec<Vec<bool>>> {
    let resolved = trees_for_story(story, trees)?;
    Ok(resolved
        .iter()
        .map(|tree| clue_flags_for_tree(tree, rule))
        .collect())
}

/// Labels every story in place (sentiment from the ending, clue flags from
/// the parses). Stories without endings get a neutral sentiment label.
pub fn label_stories(
    stories: &mut [Story],
    lexicon: &SentimentLexicon,
    trees: &HashMap<String, DepTree>,
    rule: ClueRule,
) -> Result<()> {
    for story in stories.iter_mut() {
        story.sentiment_label = Some(match &story.ending {
            Some(ending) => label_sentiment(ending, lexicon),
            None => Sentiment::Neutral,
        });
        story.clue_flags = Some(label_clue_words(story, trees, rule)?);
    }
    Ok(())
}

/// Sentiment head: one `[d, 3]` projection of the summed sentence states,
/// classes ordered (negative, neutral, positive).
pub struct SentimentHead {
    pub w: ParamId,
}

impl SentimentHead {
    pub fn new(store: &mut ParamStore, hidden: usize, rng: &mut SeededRng) -> Result<Self> {
        Ok(SentimentHead {
            w: store.register_xavier("aux.sentiment.w", hidden, 3, rng)?,
        })
    }
}

/// Clue head: one `[d, 1]` projection producing a logit per word node.
pub struct ClueHead {
    pub w: ParamId,
}

impl ClueHead {
    pub fn new(store: &mut ParamStore, hidden: usize, rng: &mut SeededRng) -> Result<Self> {
        Ok(ClueHead {
            w: store.register_xavier("aux.clue.w", hidden, 1, rng)?,
        })
    }
}

/// Three-class logits from the sum of final sentence-node vectors. The sum
/// runs in context order, so it is independent of node insertion order.
pub fn predict_sentiment(
    tape: &mut Tape,
    store: &ParamStore,
    graph: &HeteroGraph,
    states: &NodeStates,
    head: &SentimentHead,
) -> Result<Var> {
    if graph.sentence_order().is_empty() {
        return Err(ShgnError::Invalid(
            "sentiment prediction needs at least one sentence node".into(),
        ));
    }
    let rows: Vec<Var> = graph
        .sentence_order()
        .iter()
        .map(|&s| tape.slice_rows(states.matrix, s, 1))
        .collect::<Result<_>>()?;
    let stacked = tape.concat_rows(&rows)?;
    let summed = tape.sum_axis(stacked, 0)?;
    let w = tape.param(store, head.w);
    tape.matmul(summed, w)
}

/// Cross entropy of the sentiment logits against the labeled class.
pub fn sentiment_loss(tape: &mut Tape, logits: Var, label: Sentiment) -> Result<Var> {
    tape.cross_entropy_sum(logits, &[label.class_index()], &[true])
}

/// Per-word-node clue prediction: logits and sigmoid probabilities aligned
/// with `word_nodes`. `None` when the graph has no word nodes.
pub struct CluePrediction {
    pub word_nodes: Vec<usize>,
    pub logits: Var,
    pub probabilities: Var,
}

pub fn predict_clues(
    tape: &mut Tape,
    store: &ParamStore,
    graph: &HeteroGraph,
    states: &NodeStates,
    head: &ClueHead,
) -> Result<Option<CluePrediction>> {
    let word_nodes = graph.word_node_indices();
    if word_nodes.is_empty() {
        return Ok(None);
    }
    let rows: Vec<Var> = word_nodes
        .iter()
        .map(|&w| tape.slice_rows(states.matrix, w, 1))
        .collect::<Result<_>>()?;
    let stacked = tape.concat_rows(&rows)?;
    let w = tape.param(store, head.w);
    let logits = tape.matmul(stacked, w)?;
    let probabilities = tape.sigmoid(logits);
    Ok(Some(CluePrediction {
        word_nodes,
        logits,
        probabilities,
    }))
}

/// 0/1 clue targets for each word node: positive when the token is flagged
/// in at least one sentence. Requires labeled clue flags on the story.
pub fn word_node_targets(graph: &HeteroGraph, story: &Story) -> Result<Vec<f64>> {
    let flags = story.clue_flags.as_ref().ok_or_else(|| {
        ShgnError::Invalid(format!("story {} has no clue flags", story.id))
    })?;
    let mut targets = Vec::new();
    for &w in &graph.word_node_indices() {
        let token = &graph.node(w).text;
        let mut positive = false;
        for (sentence, sentence_flags) in story.context.iter().zip(flags.iter()) {
            for (tok, &flag) in sentence.iter().zip(sentence_flags.iter()) {
                if flag && tok == token {
                    positive = true;
                }
            }
        }
        targets.push(if positive { 1.0 } else { 0.0 });
    }
    Ok(targets)
}

/// Mean binary cross entropy of the clue logits; an absent prediction (no
/// word nodes) contributes an exact zero.
pub fn clue_loss(
    tape: &mut Tape,
    prediction: Option<&CluePrediction>,
    targets: &[f64],
) -> Result<Var> {
    match prediction {
        Some(p) => tape.bce_mean(p.logits, targets),
        None => {
            let zero = tape.constant(crate::numerics::Tensor::scalar(0.0));
            Ok(zero)
        }
    }
}

/// Multi-task mixing weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl LossWeights {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        if lambda1 < 0.0 || lambda2 < 0.0 || lambda1 + lambda2 > 1.0 {
            return Err(ShgnError::Invalid(format!(
                "loss weights must satisfy l1 >= 0, l2 >= 0, l1 + l2 <= 1 (got {lambda1}, {lambda2})"
            )));
        }
        Ok(LossWeights { lambda1, lambda2 })
    }

    pub fn generation_weight(&self) -> f64 {
        1.0 - self.lambda1 - self.lambda2
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            lambda1: 0.1,
            lambda2: 0.1,
        }
    }
}

/// `L = l1 * L_sen + l2 * L_clu + (1 - l1 - l2) * L_gen` on plain scalars.
pub fn total_loss_value(l_gen: f64, l_sen: f64, l_clu: f64, w: LossWeights) -> Result<f64> {
    if !l_gen.is_finite() || !l_sen.is_finite() || !l_clu.is_finite() {
        return Err(ShgnError::NonFinite("total loss input".into()));
    }
    Ok(w.lambda1 * l_sen + w.lambda2 * l_clu + w.generation_weight() * l_gen)
}

/// Tape version of the combined objective. Zero-weighted branches are
/// skipped entirely, so with l1 = l2 = 0 the gradients are exactly those of
/// the generation loss alone.
pub fn total_loss_var(
    tape: &mut Tape,
    l_gen: Var,
    l_sen: Option<Var>,
    l_clu: Option<Var>,
    w: LossWeights,
) -> Result<Var> {
    for v in [Some(l_gen), l_sen, l_clu].into_iter().flatten() {
        if !tape.value(v).all_finite() {
            return Err(ShgnError::NonFinite("total loss input".into()));
        }
    }
    let mut total = tape.scalar_mul(l_gen, w.generation_weight());
    if w.lambda1 > 0.0 {
        let sen = l_sen.ok_or_else(|| {
            ShgnError::Invalid("lambda1 > 0 but no sentiment loss provided".into())
        })?;
        let term = tape.scalar_mul(sen, w.lambda1);
        total = tape.add(total, term)?;
    }
    if w.lambda2 > 0.0 {
        let clu = l_clu
            .ok_or_else(|| ShgnError::Invalid("lambda2 > 0 but no clue loss provided".into()))?;
        let term = tape.scalar_mul(clu, w.lambda2);
        total = tape.add(total, term)?;
    }
    Ok(total)
}
