//! Transformer decoder over the encoder's node states: token vocabulary,
//! teacher-forced training forward pass, generation loss, and greedy/beam
//! decoding.
//!
//! The block is a standard pre-norm decoder layer (masked self-attention,
//! cross-attention over all node vectors, position-wise FFN with a ReLU in
//! the middle, each with residual and layer norm) with a final layer norm
//! before the output projection. Generation re-runs the same forward pass on
//! each prefix, so training and decoding share one code path.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Result, ShgnError};
use crate::numerics::{ParamId, ParamStore, SeededRng, Tape, Tensor, Var};

pub const PAD: usize = 0;
pub const BOS: usize = 1;
pub const EOS: usize = 2;
pub const UNK: usize = 3;

const RESERVED: [&str; 4] = ["<pad>", "<bos>", "<eos>", "<unk>"];

/// Token-to-id map with fixed reserved ids PAD=0, BOS=1, EOS=2, UNK=3.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    /// Builds a vocabulary from token lists, keeping tokens with frequency
    /// >= `min_freq`, ordered by descending frequency then lexicographically.
    pub fn from_token_lists<'a, I>(lists: I, min_freq: usize) -> Vocab
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for list in lists {
            for token in list {
                *counts.entry(token.as_str()).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<(&str, usize)> = counts
            .into_iter()
            .filter(|(t, c)| *c >= min_freq && !RESERVED.contains(t))
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let mut tokens: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        tokens.extend(kept.into_iter().map(|(t, _)| t.to_string()));
        Vocab::from_tokens(tokens).expect("reserved prefix is present by construction")
    }

    /// Rebuilds a vocabulary from its token list (id order), as stored in
    /// checkpoints. The first four entries must be the reserved tokens.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Vocab> {
        if tokens.len() < 4 || tokens[..4] != RESERVED.map(String::from) {
            return Err(ShgnError::Invalid(
                "vocabulary must start with the reserved tokens <pad> <bos> <eos> <unk>".into(),
            ));
        }
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Vocab { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// True when only the reserved tokens are present.
    pub fn is_empty(&self) -> bool {
        self.tokens.len() == 4
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id_of(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id_of(t)).collect()
    }

    /// Renders ids as text; PAD/BOS/EOS are stripped, UNK prints as `<unk>`.
    pub fn render(&self, ids: &[usize]) -> String {
        ids.iter()
            .filter(|&&id| id != PAD && id != BOS && id != EOS)
            .map(|&id| self.tokens[id].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecoderDims {
    pub hidden: usize,
    pub heads: usize,
    pub layers: usize,
    /// FFN inner width.
    pub ffn: usize,
    /// Maximum generated ending length (tokens after BOS).
    pub max_len: usize,
}

impl DecoderDims {
    pub fn head_dim(&self) -> usize {
        self.hidden / self.heads
    }
}

pub struct AttnParams {
    pub wq: ParamId,
    pub bq: ParamId,
    pub wk: ParamId,
    pub bk: ParamId,
    pub wv: ParamId,
    pub bv: ParamId,
    pub wo: ParamId,
    pub bo: ParamId,
}

pub struct DecoderLayerParams {
    pub ln1: (ParamId, ParamId),
    pub self_attn: AttnParams,
    pub ln2: (ParamId, ParamId),
    pub cross_attn: AttnParams,
    pub ln3: (ParamId, ParamId),
    pub ffn_w1: ParamId,
    pub ffn_b1: ParamId,
    pub ffn_w2: ParamId,
    pub ffn_b2: ParamId,
}

pub struct DecoderParams {
    pub dims: DecoderDims,
    pub vocab_size: usize,
    pub embed: ParamId,
    pub layers: Vec<DecoderLayerParams>,
    pub final_ln: (ParamId, ParamId),
    pub w_out: ParamId,
    pub b_out: ParamId,
    /// Fixed sinusoidal positions, `[max_len + 1, hidden]`.
    positions: Tensor,
}

impl DecoderParams {
    pub fn new(
        store: &mut ParamStore,
        dims: DecoderDims,
        vocab_size: usize,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        if dims.heads == 0 || dims.hidden % dims.heads != 0 {
            return Err(ShgnError::Invalid(format!(
                "decoder hidden size {} is not divisible into {} heads",
                dims.hidden, dims.heads
            )));
        }
        let d = dims.hidden;
        let embed = store.register_xavier("dec.embed", vocab_size, d, rng)?;
        let mut layers = Vec::with_capacity(dims.layers);
        for l in 0..dims.layers {
            let ln = |store: &mut ParamStore, name: &str| -> Result<(ParamId, ParamId)> {
                let gain = store.register(format!("dec.L{l}.{name}.gain"), ones(1, d))?;
                let bias = store.register(format!("dec.L{l}.{name}.bias"), Tensor::zeros(1, d))?;
                Ok((gain, bias))
            };
            let ln1 = ln(store, "ln1")?;
            let ln2 = ln(store, "ln2")?;
            let ln3 = ln(store, "ln3")?;
            let attn = |store: &mut ParamStore,
                            name: &str,
                            rng: &mut SeededRng|
             -> Result<AttnParams> {
                Ok(AttnParams {
                    wq: store.register_xavier(format!("dec.L{l}.{name}.wq"), d, d, rng)?,
                    bq: store.register(format!("dec.L{l}.{name}.bq"), Tensor::zeros(1, d))?,
                    wk: store.register_xavier(format!("dec.L{l}.{name}.wk"), d, d, rng)?,
                    bk: store.register(format!("dec.L{l}.{name}.bk"), Tensor::zeros(1, d))?,
                    wv: store.register_xavier(format!("dec.L{l}.{name}.wv"), d, d, rng)?,
                    bv: store.register(format!("dec.L{l}.{name}.bv"), Tensor::zeros(1, d))?,
                    wo: store.register_xavier(format!("dec.L{l}.{name}.wo"), d, d, rng)?,
                    bo: store.register(format!("dec.L{l}.{name}.bo"), Tensor::zeros(1, d))?,
                })
            };
            let self_attn = attn(store, "self", rng)?;
            let cross_attn = attn(store, "cross", rng)?;
            let ffn_w1 = store.register_xavier(format!("dec.L{l}.ffn.w1"), d, dims.ffn, rng)?;
            let ffn_b1 = store.register(format!("dec.L{l}.ffn.b1"), Tensor::zeros(1, dims.ffn))?;
            let ffn_w2 = store.register_xavier(format!("dec.L{l}.ffn.w2"), dims.ffn, d, rng)?;
            let ffn_b2 = store.register(format!("dec.L{l}.ffn.b2"), Tensor::zeros(1, d))?;
            layers.push(DecoderLayerParams {
                ln1,
                self_attn,
                ln2,
                cross_attn,
                ln3,
                ffn_w1,
                ffn_b1,
                ffn_w2,
                ffn_b2,
            });
        }
        let final_gain = store.register("dec.final_ln.gain", ones(1, d))?;
        let final_bias = store.register("dec.final_ln.bias", Tensor::zeros(1, d))?;
        let w_out = store.register_xavier("dec.out.w", d, vocab_size, rng)?;
        let b_out = store.register("dec.out.b", Tensor::zeros(1, vocab_size))?;
        Ok(DecoderParams {
            dims,
            vocab_size,
            embed,
            layers,
            final_ln: (final_gain, final_bias),
            w_out,
            b_out,
            positions: positional_encoding(dims.max_len + 1, d),
        })
    }
}

fn ones(rows: usize, cols: usize) -> Tensor {
    let mut t = Tensor::zeros(rows, cols);
    for v in t.data_mut() {
        *v = 1.0;
    }
    t
}

/// Sinusoidal positional encodings: row t holds
/// sin(t / 10000^(2i/d)) and cos(t / 10000^(2i/d)) interleaved.
pub fn positional_encoding(len: usize, d: usize) -> Tensor {
    let mut pe = Tensor::zeros(len, d);
    for t in 0..len {
        for i in 0..d {
            let exponent = 2.0 * ((i / 2) as f64) / d as f64;
            let angle = t as f64 / 10000f64.powf(exponent);
            pe.set(t, i, if i % 2 == 0 { angle.sin() } else { angle.cos() });
        }
    }
    pe
}

const MASKED: f64 = -1e30;

fn causal_mask(len: usize) -> Tensor {
    let mut m = Tensor::zeros(len, len);
    for i in 0..len {
        for j in (i + 1)..len {
            m.set(i, j, MASKED);
        }
    }
    m
}

struct AttnVars {
    wq: Var,
    bq: Var,
    wk: Var,
    bk: Var,
    wv: Var,
    bv: Var,
    wo: Var,
    bo: Var,
}

impl AttnVars {
    fn materialize(tape: &mut Tape, store: &ParamStore, p: &AttnParams) -> AttnVars {
        AttnVars {
            wq: tape.param(store, p.wq),
            bq: tape.param(store, p.bq),
            wk: tape.param(store, p.wk),
            bk: tape.param(store, p.bk),
            wv: tape.param(store, p.wv),
            bv: tape.param(store, p.bv),
            wo: tape.param(store, p.wo),
            bo: tape.param(store, p.bo),
        }
    }
}

/// Scaled dot-product multi-head attention; optionally records the per-head
/// softmax weights into `trace`.
fn multi_head_attention(
    tape: &mut Tape,
    q_in: Var,
    kv_in: Var,
    p: &AttnVars,
    heads: usize,
    mask: Option<&Tensor>,
    trace: Option<&mut Vec<Var>>,
) -> Result<Var> {
    let q_all = tape.matmul(q_in, p.wq)?;
    let q_all = tape.add_row_broadcast(q_all, p.bq)?;
    let k_all = tape.matmul(kv_in, p.wk)?;
    let k_all = tape.add_row_broadcast(k_all, p.bk)?;
    let v_all = tape.matmul(kv_in, p.wv)?;
    let v_all = tape.add_row_broadcast(v_all, p.bv)?;

    let q_heads = tape.split_heads(q_all, heads)?;
    let k_heads = tape.split_heads(k_all, heads)?;
    let v_heads = tape.split_heads(v_all, heads)?;
    let scale = 1.0 / ((tape.value(q_heads[0]).cols()) as f64).sqrt();

    let mask_var = mask.map(|m| tape.constant(m.clone()));
    let mut outputs = Vec::with_capacity(heads);
    let mut weight_vars = Vec::with_capacity(heads);
    for h in 0..heads {
        let kt = tape.transpose(k_heads[h]);
        let scores = tape.matmul(q_heads[h], kt)?;
        let scores = tape.scalar_mul(scores, scale);
        let scores = match mask_var {
            Some(m) => tape.add(scores, m)?,
            None => scores,
        };
        let weights = tape.softmax(scores);
        weight_vars.push(weights);
        outputs.push(tape.matmul(weights, v_heads[h])?);
    }
    if let Some(t) = trace {
        t.extend(weight_vars);
    }
    let cat = tape.concat_cols(&outputs)?;
    let out = tape.matmul(cat, p.wo)?;
    tape.add_row_broadcast(out, p.bo)
}

/// Per-layer attention weights recorded during a traced decode.
#[derive(Default)]
pub struct DecodeTrace {
    /// `[T, T]` self-attention weights, per layer then per head.
    pub self_weights: Vec<Var>,
    /// `[T, |V_nodes|]` cross-attention weights, per layer then per head.
    pub cross_weights: Vec<Var>,
}

/// Teacher-forced decoder forward pass: `gold` must begin with BOS; returns
/// logits `[T, vocab]` where row t predicts the token after `gold[..=t]`.
pub fn decode_train(
    tape: &mut Tape,
    store: &ParamStore,
    params: &DecoderParams,
    node_states: Var,
    gold: &[usize],
) -> Result<Var> {
    decode_train_traced(tape, store, params, node_states, gold, None)
}

pub fn decode_train_traced(
    tape: &mut Tape,
    store: &ParamStore,
    params: &DecoderParams,
    node_states: Var,
    gold: &[usize],
    mut trace: Option<&mut DecodeTrace>,
) -> Result<Var> {
    if gold.is_empty() {
        return Err(ShgnError::Invalid("decoder input is empty".into()));
    }
    if gold[0] != BOS {
        return Err(ShgnError::Invalid(
            "decoder input must begin with BOS".into(),
        ));
    }
    let t_len = gold.len();
    if t_len > params.dims.max_len + 1 {
        return Err(ShgnError::Invalid(format!(
            "decoder input length {} exceeds max length {}",
            t_len,
            params.dims.max_len + 1
        )));
    }

    let embed = tape.param(store, params.embed);
    let tok = tape.embedding_lookup(embed, gold)?;
    let mut pos = Tensor::zeros(t_len, params.dims.hidden);
    for t in 0..t_len {
        for c in 0..params.dims.hidden {
            pos.set(t, c, params.positions.at(t, c));
        }
    }
    let pos = tape.constant(pos);
    let mut x = tape.add(tok, pos)?;

    let mask = causal_mask(t_len);
    for layer in &params.layers {
        let ln1_g = tape.param(store, layer.ln1.0);
        let ln1_b = tape.param(store, layer.ln1.1);
        let normed = tape.layer_norm(x, ln1_g, ln1_b, 1e-5)?;
        let self_p = AttnVars::materialize(tape, store, &layer.self_attn);
        let self_out = multi_head_attention(
            tape,
            normed,
            normed,
            &self_p,
            params.dims.heads,
            Some(&mask),
            trace.as_deref_mut().map(|t| &mut t.self_weights),
        )?;
        x = tape.add(x, self_out)?;

        let ln2_g = tape.param(store, layer.ln2.0);
        let ln2_b = tape.param(store, layer.ln2.1);
        let normed = tape.layer_norm(x, ln2_g, ln2_b, 1e-5)?;
        let cross_p = AttnVars::materialize(tape, store, &layer.cross_attn);
        let cross_out = multi_head_attention(
            tape,
            normed,
            node_states,
            &cross_p,
            params.dims.heads,
            None,
            trace.as_deref_mut().map(|t| &mut t.cross_weights),
        )?;
        x = tape.add(x, cross_out)?;

        let ln3_g = tape.param(store, layer.ln3.0);
        let ln3_b = tape.param(store, layer.ln3.1);
        let normed = tape.layer_norm(x, ln3_g, ln3_b, 1e-5)?;
        let w1 = tape.param(store, layer.ffn_w1);
        let b1 = tape.param(store, layer.ffn_b1);
        let w2 = tape.param(store, layer.ffn_w2);
        let b2 = tape.param(store, layer.ffn_b2);
        let inner = tape.matmul(normed, w1)?;
        let inner = tape.add_row_broadcast(inner, b1)?;
        let inner = tape.relu(inner);
        let outer = tape.matmul(inner, w2)?;
        let outer = tape.add_row_broadcast(outer, b2)?;
        x = tape.add(x, outer)?;
    }

    let fg = tape.param(store, params.final_ln.0);
    let fb = tape.param(store, params.final_ln.1);
    let x = tape.layer_norm(x, fg, fb, 1e-5)?;
    let w_out = tape.param(store, params.w_out);
    let b_out = tape.param(store, params.b_out);
    let logits = tape.matmul(x, w_out)?;
    tape.add_row_broadcast(logits, b_out)
}

/// Generation loss over teacher-forced logits. Targets are the gold sequence
/// shifted left and terminated by EOS; PAD targets are masked out. Returns
/// the summed and per-token mean negative log-likelihood.
pub struct GenLoss {
    pub sum: Var,
    pub mean: Var,
    pub count: usize,
}

pub fn loss_gen(tape: &mut Tape, logits: Var, gold: &[usize]) -> Result<GenLoss> {
    if gold.is_empty() {
        return Err(ShgnError::Invalid("empty gold sequence".into()));
    }
    let t_len = gold.len();
    let mut targets = Vec::with_capacity(t_len);
    for i in 0..t_len {
        targets.push(if i + 1 < t_len { gold[i + 1] } else { EOS });
    }
    let mask: Vec<bool> = targets.iter().map(|&t| t != PAD).collect();
    let count = mask.iter().filter(|&&m| m).count();
    let sum = tape.cross_entropy_sum(logits, &targets, &mask)?;
    let mean = tape.scalar_mul(sum, 1.0 / count.max(1) as f64);
    Ok(GenLoss { sum, mean, count })
}

/// One completed hypothesis: emitted ids (EOS included when emitted, BOS
/// never), per-token log probabilities, and the summed log probability.
#[derive(Clone, Debug)]
pub struct Hypothesis {
    pub tokens: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub score: f64,
}

/// Decoded output: the best hypothesis plus all final beam hypotheses.
#[derive(Clone, Debug)]
pub struct GenerationResult {
    pub tokens: Vec<usize>,
    pub log_probs: Vec<f64>,
    pub score: f64,
    pub beams: Vec<Hypothesis>,
}

impl GenerationResult {
    pub fn text(&self, vocab: &Vocab) -> String {
        vocab.render(&self.tokens)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GenOptions {
    pub beam_size: usize,
    pub max_len: usize,
    pub length_norm: bool,
}

/// Next-token log-probabilities after a BOS-prefixed id sequence, via the
/// same forward pass as training.
pub fn next_token_log_probs(
    store: &ParamStore,
    params: &DecoderParams,
    node_states: &Tensor,
    prefix: &[usize],
) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let states = tape.constant(node_states.clone());
    let logits = decode_train(&mut tape, store, params, states, prefix)?;
    let lv = tape.value(logits);
    let last = lv.rows() - 1;
    let logp = lv.log_softmax_rows();
    Ok(logp.row_slice(last).to_vec())
}

fn hypothesis_rank_key(h: &Hypothesis, length_norm: bool) -> f64 {
    if length_norm && !h.tokens.is_empty() {
        h.score / h.tokens.len() as f64
    } else {
        h.score
    }
}

fn sort_hypotheses(hyps: &mut [Hypothesis], length_norm: bool) {
    hyps.sort_by(|a, b| {
        hypothesis_rank_key(b, length_norm)
            .partial_cmp(&hypothesis_rank_key(a, length_norm))
            .unwrap_or(Ordering::Equal)
            .then(a.tokens.len().cmp(&b.tokens.len()))
            .then(a.tokens.cmp(&b.tokens))
    });
}

/// Standard beam search over next-token log probabilities. Hypotheses end at
/// EOS or `max_len`; completed hypotheses are never pruned and compete by
/// score (optionally divided by length). PAD and BOS are never emitted.
/// Deterministic given the parameters and states.
pub fn generate(
    store: &ParamStore,
    params: &DecoderParams,
    node_states: &Tensor,
    opts: GenOptions,
) -> Result<GenerationResult> {
    if opts.beam_size == 0 {
        return Err(ShgnError::Invalid("beam size must be at least 1".into()));
    }
    if opts.max_len > params.dims.max_len {
        return Err(ShgnError::Invalid(format!(
            "max_len {} exceeds decoder max length {}",
            opts.max_len, params.dims.max_len
        )));
    }

    struct Partial {
        ids: Vec<usize>,
        log_probs: Vec<f64>,
        score: f64,
    }

    let mut live = vec![Partial {
        ids: vec![BOS],
        log_probs: Vec::new(),
        score: 0.0,
    }];
    let mut done: Vec<Hypothesis> = Vec::new();

    for _ in 0..opts.max_len {
        if live.is_empty() {
            break;
        }
        let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
        for (bi, partial) in live.iter().enumerate() {
            let logp = next_token_log_probs(store, params, node_states, &partial.ids)?;
            for (tok, lp) in logp.iter().enumerate() {
                if tok == PAD || tok == BOS {
                    continue;
                }
                candidates.push((partial.score + lp, bi, tok));
            }
        }
        candidates.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(Ordering::Equal)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        let mut next_live = Vec::new();
        for &(score, bi, tok) in candidates.iter().take(opts.beam_size) {
            let partial = &live[bi];
            let mut ids = partial.ids.clone();
            ids.push(tok);
            let mut log_probs = partial.log_probs.clone();
            log_probs.push(score - partial.score);
            if tok == EOS {
                done.push(Hypothesis {
                    tokens: ids[1..].to_vec(),
                    log_probs,
                    score,
                });
            } else {
                next_live.push(Partial {
                    ids,
                    log_probs,
                    score,
                });
            }
        }
        live = next_live;
    }
    // Hypotheses that hit max_len compete as-is.
    for partial in live {
        done.push(Hypothesis {
            tokens: partial.ids[1..].to_vec(),
            log_probs: partial.log_probs,
            score: partial.score,
        });
    }
    sort_hypotheses(&mut done, opts.length_norm);
    let best = done[0].clone();
    Ok(GenerationResult {
        tokens: best.tokens,
        log_probs: best.log_probs,
        score: best.score,
        beams: done,
    })
}

/// Greedy argmax decoding (ties broken toward the smallest token id).
pub fn greedy(
    store: &ParamStore,
    params: &DecoderParams,
    node_states: &Tensor,
    max_len: usize,
) -> Result<GenerationResult> {
    let mut ids = vec![BOS];
    let mut log_probs = Vec::new();
    let mut score = 0.0;
    for _ in 0..max_len {
        let logp = next_token_log_probs(store, params, node_states, &ids)?;
        let mut best_tok = EOS;
        let mut best_lp = f64::NEG_INFINITY;
        for (tok, &lp) in logp.iter().enumerate() {
            if tok == PAD || tok == BOS {
                continue;
            }
            if lp > best_lp {
                best_lp = lp;
                best_tok = tok;
            }
        }
        ids.push(best_tok);
        log_probs.push(best_lp);
        score += best_lp;
        if best_tok == EOS {
            break;
        }
    }
    let tokens = ids[1..].to_vec();
    Ok(GenerationResult {
        tokens: tokens.clone(),
        log_probs: log_probs.clone(),
        score,
        beams: vec![Hypothesis {
            tokens,
            log_probs,
            score,
        }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{grad_check, GradMode, LossEval};

    fn toy_params(
        vocab_size: usize,
        d: usize,
        heads: usize,
        layers: usize,
        max_len: usize,
        seed: u64,
    ) -> (ParamStore, DecoderParams) {
        let mut store = ParamStore::new();
        let mut rng = SeededRng::new(seed);
        let dims = DecoderDims {
            hidden: d,
            heads,
            layers,
            ffn: 2 * d,
            max_len,
        };
        let params = DecoderParams::new(&mut store, dims, vocab_size, &mut rng).unwrap();
        (store, params)
    }

    fn random_states(rows: usize, d: usize, seed: u64) -> Tensor {
        let mut rng = SeededRng::new(seed);
        let mut t = Tensor::zeros(rows, d);
        for v in t.data_mut() {
            *v = rng.uniform(-1.0, 1.0);
        }
        t
    }

    #[test]
    fn vocab_reserves_fixed_ids() {
        let lists: Vec<Vec<String>> = vec![
            vec!["milk".into(), "milk".into(), "cereal".into()],
            vec!["cereal".into(), "rare".into()],
        ];
        let refs: Vec<&[String]> = lists.iter().map(Vec::as_slice).collect();
        let vocab = Vocab::from_token_lists(refs.into_iter(), 2);
        assert_eq!(vocab.token(PAD), "<pad>");
        assert_eq!(vocab.token(BOS), "<bos>");
        assert_eq!(vocab.token(EOS), "<eos>");
        assert_eq!(vocab.token(UNK), "<unk>");
        assert_eq!(vocab.id_of("rare"), UNK);
        assert!(vocab.id_of("milk") > UNK);
        assert_eq!(vocab.len(), 6);
    }

    #[test]
    fn causal_mask_makes_prefix_logits_bit_identical() {
        let (store, params) = toy_params(11, 8, 2, 1, 10, 3);
        let states = random_states(3, 8, 4);
        let run = |gold: &[usize]| {
            let mut tape = Tape::new();
            let sv = tape.constant(states.clone());
            let logits = decode_train(&mut tape, &store, &params, sv, gold).unwrap();
            tape.value(logits).clone()
        };
        let a = run(&[BOS, 5, 6, 7]);
        let b = run(&[BOS, 5, 6, 9]);
        // Rows 0..=2 depend only on gold[0..=2].
        for r in 0..3 {
            for c in 0..11 {
                assert_eq!(a.at(r, c).to_bits(), b.at(r, c).to_bits());
            }
        }
        assert_ne!(a.row_slice(3), b.row_slice(3));
    }

    #[test]
    fn single_node_cross_attention_weight_is_one() {
        let (store, params) = toy_params(7, 8, 2, 2, 10, 5);
        let states = random_states(1, 8, 6);
        let mut tape = Tape::new();
        let sv = tape.constant(states);
        let mut trace = DecodeTrace::default();
        decode_train_traced(&mut tape, &store, &params, sv, &[BOS, 4, 5], Some(&mut trace))
            .unwrap();
        assert!(!trace.cross_weights.is_empty());
        for w in &trace.cross_weights {
            for &v in tape.value(*w).data() {
                assert_eq!(v, 1.0);
            }
        }
    }

    #[test]
    fn empty_gold_is_error() {
        let (store, params) = toy_params(7, 8, 2, 1, 10, 5);
        let states = random_states(2, 8, 6);
        let mut tape = Tape::new();
        let sv = tape.constant(states);
        assert!(decode_train(&mut tape, &store, &params, sv, &[]).is_err());
    }

    #[test]
    fn logits_match_independent_scripted_forward() {
        // Plain-f64 reimplementation of the whole decoder forward pass.
        let (store, params) = toy_params(11, 8, 2, 1, 10, 42);
        let states = random_states(3, 8, 43);
        let gold = [BOS, 5, 6];

        let mut tape = Tape::new();
        let sv = tape.constant(states.clone());
        let logits = decode_train(&mut tape, &store, &params, sv, &gold).unwrap();
        let got = tape.value(logits).clone();

        let g = |name: &str| store.get(store.id_of(name).unwrap()).clone();
        let d = 8usize;
        let heads = 2usize;

        let mm = |a: &Vec<Vec<f64>>, b: &Tensor| -> Vec<Vec<f64>> {
            a.iter()
                .map(|row| {
                    (0..b.cols())
                        .map(|c| (0..b.rows()).map(|k| row[k] * b.at(k, c)).sum())
                        .collect()
                })
                .collect()
        };
        let add_bias = |x: &mut Vec<Vec<f64>>, b: &Tensor| {
            for row in x.iter_mut() {
                for (c, v) in row.iter_mut().enumerate() {
                    *v += b.at(0, c);
                }
            }
        };
        let layer_norm = |x: &Vec<Vec<f64>>, gain: &Tensor, bias: &Tensor| -> Vec<Vec<f64>> {
            x.iter()
                .map(|row| {
                    let mean = row.iter().sum::<f64>() / row.len() as f64;
                    let var =
                        row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / row.len() as f64;
                    let sigma = (var + 1e-5).sqrt();
                    row.iter()
                        .enumerate()
                        .map(|(c, v)| gain.at(0, c) * (v - mean) / sigma + bias.at(0, c))
                        .collect()
                })
                .collect()
        };
        let softmax = |row: &mut Vec<f64>| {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = (*v - max).exp();
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        };
        let attention = |q_in: &Vec<Vec<f64>>,
                         kv: &Vec<Vec<f64>>,
                         prefix: &str,
                         causal: bool|
         -> Vec<Vec<f64>> {
            let mut q = mm(q_in, &g(&format!("{prefix}.wq")));
            add_bias(&mut q, &g(&format!("{prefix}.bq")));
            let mut k = mm(kv, &g(&format!("{prefix}.wk")));
            add_bias(&mut k, &g(&format!("{prefix}.bk")));
            let mut v = mm(kv, &g(&format!("{prefix}.wv")));
            add_bias(&mut v, &g(&format!("{prefix}.bv")));
            let dh = d / heads;
            let scale = 1.0 / (dh as f64).sqrt();
            let mut cat = vec![vec![0.0; d]; q.len()];
            for h in 0..heads {
                for (i, q_row) in q.iter().enumerate() {
                    let mut scores: Vec<f64> = k
                        .iter()
                        .map(|k_row| {
                            (0..dh)
                                .map(|c| q_row[h * dh + c] * k_row[h * dh + c])
                                .sum::<f64>()
                                * scale
                        })
                        .collect();
                    if causal {
                        for (j, s) in scores.iter_mut().enumerate() {
                            if j > i {
                                *s += MASKED;
                            }
                        }
                    }
                    softmax(&mut scores);
                    for c in 0..dh {
                        cat[i][h * dh + c] = scores
                            .iter()
                            .zip(v.iter())
                            .map(|(w, v_row)| w * v_row[h * dh + c])
                            .sum();
                    }
                }
            }
            let mut out = mm(&cat, &g(&format!("{prefix}.wo")));
            add_bias(&mut out, &g(&format!("{prefix}.bo")));
            out
        };

        // Embedding + positions.
        let embed = g("dec.embed");
        let mut x: Vec<Vec<f64>> = gold
            .iter()
            .enumerate()
            .map(|(t, &id)| {
                (0..d)
                    .map(|c| embed.at(id, c) + params.positions.at(t, c))
                    .collect()
            })
            .collect();
        let kv: Vec<Vec<f64>> = (0..states.rows())
            .map(|r| states.row_slice(r).to_vec())
            .collect();

        let normed = layer_norm(&x, &g("dec.L0.ln1.gain"), &g("dec.L0.ln1.bias"));
        let self_out = attention(&normed, &normed, "dec.L0.self", true);
        for (xr, sr) in x.iter_mut().zip(self_out.iter()) {
            for (a, b) in xr.iter_mut().zip(sr.iter()) {
                *a += b;
            }
        }
        let normed = layer_norm(&x, &g("dec.L0.ln2.gain"), &g("dec.L0.ln2.bias"));
        let cross_out = attention(&normed, &kv, "dec.L0.cross", false);
        for (xr, sr) in x.iter_mut().zip(cross_out.iter()) {
            for (a, b) in xr.iter_mut().zip(sr.iter()) {
                *a += b;
            }
        }
        let normed = layer_norm(&x, &g("dec.L0.ln3.gain"), &g("dec.L0.ln3.bias"));
        let mut inner = mm(&normed, &g("dec.L0.ffn.w1"));
        add_bias(&mut inner, &g("dec.L0.ffn.b1"));
        for row in inner.iter_mut() {
            for v in row.iter_mut() {
                *v = v.max(0.0);
            }
        }
        let mut outer = mm(&inner, &g("dec.L0.ffn.w2"));
        add_bias(&mut outer, &g("dec.L0.ffn.b2"));
        for (xr, sr) in x.iter_mut().zip(outer.iter()) {
            for (a, b) in xr.iter_mut().zip(sr.iter()) {
                *a += b;
            }
        }
        let x = layer_norm(&x, &g("dec.final_ln.gain"), &g("dec.final_ln.bias"));
        let mut expected = mm(&x, &g("dec.out.w"));
        add_bias(&mut expected, &g("dec.out.b"));

        for t in 0..gold.len() {
            for c in 0..11 {
                assert!(
                    (got.at(t, c) - expected[t][c]).abs() < 1e-10,
                    "logit [{t},{c}] {} vs {}",
                    got.at(t, c),
                    expected[t][c]
                );
            }
        }
    }

    #[test]
    fn loss_vanishes_when_gold_is_forced() {
        let mut tape = Tape::new();
        // Vocab 5, gold [BOS, 4]: targets are [4, EOS] with margin 50.
        let mut logits = Tensor::zeros(2, 5);
        logits.set(0, 4, 50.0);
        logits.set(1, EOS, 50.0);
        let lv = tape.constant(logits);
        let loss = loss_gen(&mut tape, lv, &[BOS, 4]).unwrap();
        assert!(tape.value(loss.sum).item().unwrap() < 1e-6);
    }

    #[test]
    fn uniform_logits_loss_is_len_times_log_vocab() {
        let mut tape = Tape::new();
        let lv = tape.constant(Tensor::zeros(4, 11));
        let loss = loss_gen(&mut tape, lv, &[BOS, 5, 6, 7]).unwrap();
        let expected = 4.0 * (11.0f64).ln();
        assert!((tape.value(loss.sum).item().unwrap() - expected).abs() < 1e-12);
        assert!(
            (tape.value(loss.mean).item().unwrap() - expected / 4.0).abs() < 1e-12
        );
    }

    #[test]
    fn random_loss_matches_log_sum_exp_oracle() {
        let mut rng = SeededRng::new(17);
        let mut logits = Tensor::zeros(3, 6);
        for v in logits.data_mut() {
            *v = rng.uniform(-3.0, 3.0);
        }
        let gold = [BOS, 4, 5];
        let targets = [4usize, 5, EOS];
        let mut expected = 0.0;
        for (r, &t) in targets.iter().enumerate() {
            let row = logits.row_slice(r);
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
            expected += lse - row[t];
        }
        let mut tape = Tape::new();
        let lv = tape.constant(logits);
        let loss = loss_gen(&mut tape, lv, &gold).unwrap();
        assert!((tape.value(loss.sum).item().unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn output_softmax_rows_sum_to_one() {
        let (store, params) = toy_params(9, 8, 2, 1, 10, 21);
        let states = random_states(4, 8, 22);
        let mut tape = Tape::new();
        let sv = tape.constant(states);
        let logits = decode_train(&mut tape, &store, &params, sv, &[BOS, 4, 5, 6]).unwrap();
        let probs = tape.softmax(logits);
        let pv = tape.value(probs);
        for r in 0..pv.rows() {
            let sum: f64 = pv.row_slice(r).iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    /// Exhaustive enumeration oracle over every hypothesis: sequences of
    /// emittable tokens where EOS only terminates, up to max_len.
    fn exhaustive_best(
        store: &ParamStore,
        params: &DecoderParams,
        states: &Tensor,
        max_len: usize,
    ) -> (Vec<usize>, f64) {
        let emittable: Vec<usize> = (0..params.vocab_size)
            .filter(|&t| t != PAD && t != BOS)
            .collect();
        let mut best: Option<(Vec<usize>, f64)> = None;
        let mut stack: Vec<(Vec<usize>, f64)> = vec![(vec![], 0.0)];
        while let Some((seq, score)) = stack.pop() {
            let mut prefix = vec![BOS];
            prefix.extend(&seq);
            let logp = next_token_log_probs(store, params, states, &prefix).unwrap();
            for &tok in &emittable {
                let new_score = score + logp[tok];
                let mut new_seq = seq.clone();
                new_seq.push(tok);
                let complete = tok == EOS || new_seq.len() == max_len;
                if complete {
                    let better = match &best {
                        None => true,
                        Some((bseq, bscore)) => {
                            new_score > *bscore
                                || (new_score == *bscore
                                    && (new_seq.len(), new_seq.clone())
                                        < (bseq.len(), bseq.clone()))
                        }
                    };
                    if better {
                        best = Some((new_seq.clone(), new_score));
                    }
                }
                if tok != EOS && new_seq.len() < max_len {
                    stack.push((new_seq, new_score));
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn beam_one_equals_greedy() {
        for seed in 0..5 {
            let (store, params) = toy_params(7, 8, 2, 1, 6, 100 + seed);
            let states = random_states(3, 8, 200 + seed);
            let beam = generate(
                &store,
                &params,
                &states,
                GenOptions {
                    beam_size: 1,
                    max_len: 6,
                    length_norm: false,
                },
            )
            .unwrap();
            let g = greedy(&store, &params, &states, 6).unwrap();
            assert_eq!(beam.tokens, g.tokens, "seed {seed}");
        }
    }

    #[test]
    fn full_width_beam_matches_exhaustive_enumeration() {
        for seed in 0..5 {
            // 4 emittable tokens (EOS, UNK, 4, 5), max_len 3.
            let (store, params) = toy_params(6, 8, 2, 1, 3, 300 + seed);
            let states = random_states(2, 8, 400 + seed);
            let full_width = 4usize.pow(3);
            let beam = generate(
                &store,
                &params,
                &states,
                GenOptions {
                    beam_size: full_width,
                    max_len: 3,
                    length_norm: false,
                },
            )
            .unwrap();
            let (best_seq, best_score) = exhaustive_best(&store, &params, &states, 3);
            assert_eq!(beam.tokens, best_seq, "seed {seed}");
            assert!((beam.score - best_score).abs() < 1e-12);
            for hyp in &beam.beams {
                assert_eq!(hyp.log_probs.len(), hyp.tokens.len());
                let sum: f64 = hyp.log_probs.iter().sum();
                assert!((hyp.score - sum).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn larger_beams_never_score_worse() {
        for seed in 0..5 {
            let (store, params) = toy_params(6, 8, 2, 1, 3, 500 + seed);
            let states = random_states(2, 8, 600 + seed);
            let mut prev = f64::NEG_INFINITY;
            for beam_size in [1, 2, 4, 8, 16, 64] {
                let out = generate(
                    &store,
                    &params,
                    &states,
                    GenOptions {
                        beam_size,
                        max_len: 3,
                        length_norm: false,
                    },
                )
                .unwrap();
                assert!(
                    out.score >= prev - 1e-12,
                    "seed {seed} beam {beam_size}: {} < {prev}",
                    out.score
                );
                prev = out.score;
            }
        }
    }

    #[test]
    fn decode_gradients_pass_grad_check() {
        let (mut store, params) = toy_params(7, 8, 2, 1, 6, 700);
        let states = random_states(3, 8, 701);
        let gold = [BOS, 4, 5, 6];
        let report = grad_check(
            &mut store,
            |store, mode| {
                let mut tape = Tape::new();
                let sv = tape.constant(states.clone());
                let logits = decode_train(&mut tape, store, &params, sv, &gold)?;
                let loss = loss_gen(&mut tape, logits, &gold)?;
                let value = tape.value(loss.mean).item()?;
                let grads = match mode {
                    GradMode::WithGrads => Some(tape.backward(loss.mean, store)?),
                    GradMode::ValueOnly => None,
                };
                Ok(LossEval { value, grads })
            },
            1e-5,
            1e-4,
        )
        .unwrap();
        assert!(
            report.passed(),
            "max rel err {}, {} failures",
            report.max_rel_err,
            report.failures.len()
        );
    }
}
