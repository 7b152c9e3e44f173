//! Full model assembly: encoder, decoder, and auxiliary heads over one
//! parameter store, with the combined per-story objective used by the
//! trainer, the gradient checker, and generation.

use crate::auxtasks::{
    clue_loss, predict_clues, predict_sentiment, sentiment_loss, total_loss_var, word_node_targets,
    ClueHead, LossWeights, SentimentHead,
};
use crate::corpus::Story;
use crate::decoder::{
    decode_train, generate, greedy, loss_gen, DecoderDims, DecoderParams, GenOptions,
    GenerationResult, Vocab, BOS,
};
use crate::encoder::{encode, EncoderParams, HgtDims, NodeInitializer};
use crate::error::{Result, ShgnError};
use crate::graph::HeteroGraph;
use crate::numerics::{GradStore, ParamStore, SeededRng, Tape, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelDims {
    pub hidden: usize,
    pub heads: usize,
    pub graph_layers: usize,
    pub decoder_layers: usize,
    pub ffn: usize,
    pub max_len: usize,
}

pub struct Model {
    pub store: ParamStore,
    pub encoder: EncoderParams,
    pub decoder: DecoderParams,
    pub sentiment: SentimentHead,
    pub clue: ClueHead,
    pub vocab: Vocab,
    pub init: NodeInitializer,
    pub scaled_attention: bool,
}

/// Per-story loss values; gradients are included when requested.
pub struct StoryLosses {
    pub total: f64,
    pub gen_sum: f64,
    pub gen_mean: f64,
    pub sen: f64,
    pub clu: f64,
    pub token_count: usize,
    pub grads: Option<GradStore>,
}

impl Model {
    pub fn new(
        dims: ModelDims,
        vocab: Vocab,
        init: NodeInitializer,
        seed: u64,
        scaled_attention: bool,
    ) -> Result<Model> {
        let mut store = ParamStore::new();
        let mut rng = SeededRng::new(seed);
        let encoder = EncoderParams::new(
            &mut store,
            HgtDims {
                hidden: dims.hidden,
                heads: dims.heads,
                layers: dims.graph_layers,
            },
            init.dimension(),
            &mut rng,
        )?;
        let decoder = DecoderParams::new(
            &mut store,
            DecoderDims {
                hidden: dims.hidden,
                heads: dims.heads,
                layers: dims.decoder_layers,
                ffn: dims.ffn,
                max_len: dims.max_len,
            },
            vocab.len(),
            &mut rng,
        )?;
        let sentiment = SentimentHead::new(&mut store, dims.hidden, &mut rng)?;
        let clue = ClueHead::new(&mut store, dims.hidden, &mut rng)?;
        Ok(Model {
            store,
            encoder,
            decoder,
            sentiment,
            clue,
            vocab,
            init,
            scaled_attention,
        })
    }

    /// Gold decoder input for a story: BOS followed by the encoded ending,
    /// truncated to the decoder's maximum length.
    pub fn gold_ids(&self, story: &Story) -> Result<Vec<usize>> {
        let ending = story
            .ending
            .as_ref()
            .ok_or_else(|| ShgnError::Invalid(format!("story {} has no ending", story.id)))?;
        let mut ids = vec![BOS];
        let limit = ending.len().min(self.decoder.dims.max_len);
        ids.extend(self.vocab.encode(&ending[..limit]));
        Ok(ids)
    }

    /// Combined multi-task loss of one story. Aux branches with zero weight
    /// are skipped entirely (their reported loss is 0), so the zero-weight
    /// gradients equal the generation-only gradients bit for bit.
    pub fn story_losses(
        &self,
        story: &Story,
        graph: &HeteroGraph,
        weights: LossWeights,
        with_grads: bool,
    ) -> Result<StoryLosses> {
        self.story_losses_in(&self.store, story, graph, weights, with_grads)
    }

    /// Same loss evaluated against an external parameter store with this
    /// model's layout; the gradient checker perturbs the store in place.
    pub fn story_losses_in(
        &self,
        store: &ParamStore,
        story: &Story,
        graph: &HeteroGraph,
        weights: LossWeights,
        with_grads: bool,
    ) -> Result<StoryLosses> {
        let gold = self.gold_ids(story)?;
        let mut tape = Tape::new();
        let (final_states, _) = encode(
            &mut tape,
            store,
            graph,
            &self.init,
            &self.encoder,
            self.scaled_attention,
        )?;
        let logits = decode_train(&mut tape, store, &self.decoder, final_states.matrix, &gold)?;
        let gen = loss_gen(&mut tape, logits, &gold)?;

        let sen = if weights.lambda1 > 0.0 {
            let label = story.sentiment_label.ok_or_else(|| {
                ShgnError::Invalid(format!("story {} has no sentiment label", story.id))
            })?;
            let s_logits =
                predict_sentiment(&mut tape, store, graph, &final_states, &self.sentiment)?;
            Some(sentiment_loss(&mut tape, s_logits, label)?)
        } else {
            None
        };
        let clu = if weights.lambda2 > 0.0 {
            let prediction = predict_clues(&mut tape, store, graph, &final_states, &self.clue)?;
            let targets = word_node_targets(graph, story)?;
            Some(clue_loss(&mut tape, prediction.as_ref(), &targets)?)
        } else {
            None
        };

        let total = total_loss_var(&mut tape, gen.mean, sen, clu, weights)?;
        let grads = if with_grads {
            Some(tape.backward(total, store)?)
        } else {
            None
        };
        Ok(StoryLosses {
            total: tape.value(total).item()?,
            gen_sum: tape.value(gen.sum).item()?,
            gen_mean: tape.value(gen.mean).item()?,
            sen: sen.map_or(0.0, |v| tape.value(v).item().unwrap_or(f64::NAN)),
            clu: clu.map_or(0.0, |v| tape.value(v).item().unwrap_or(f64::NAN)),
            token_count: gen.count,
            grads,
        })
    }

    /// Forward-only encoder pass returning the final node vectors.
    pub fn encode_story(&self, graph: &HeteroGraph) -> Result<Tensor> {
        let mut tape = Tape::new();
        let (final_states, _) = encode(
            &mut tape,
            &self.store,
            graph,
            &self.init,
            &self.encoder,
            self.scaled_attention,
        )?;
        Ok(tape.value(final_states.matrix).clone())
    }

    pub fn generate_for(&self, graph: &HeteroGraph, opts: GenOptions) -> Result<GenerationResult> {
        let states = self.encode_story(graph)?;
        generate(&self.store, &self.decoder, &states, opts)
    }

    pub fn greedy_for(&self, graph: &HeteroGraph, max_len: usize) -> Result<GenerationResult> {
        let states = self.encode_story(graph)?;
        greedy(&self.store, &self.decoder, &states, max_len)
    }
}
