use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decoder::Vocab;
use crate::encoder::NodeInitializer;
use crate::error::{Result, ShgnError};
use crate::harness::Adam;
use crate::model::{Model, ModelDims};
use crate::numerics::Tensor;

pub const CHECKPOINT_FORMAT: &str = "shgn-checkpoint-v1";

/// How the graph initializer is reconstructed at load time. Pretrained
/// tables are not embedded; generation must re-supply the table file, which
/// is validated against the recorded dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitSpec {
    Hash { dim: usize, seed: u64 },
    Table { dim: usize },
}

impl InitSpec {
    pub fn of(init: &NodeInitializer) -> InitSpec {
        match init {
            NodeInitializer::HashDeterministic { dim, seed } => InitSpec::Hash {
                dim: *dim,
                seed: *seed,
            },
            NodeInitializer::PretrainedTable(t) => InitSpec::Table { dim: t.dimension() },
        }
    }
}

#[derive(Serialize, Deserialize)]
struct NamedTensor {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// On-disk checkpoint: a versioned JSON map of parameter name to shape plus
/// row-major values, alongside the vocabulary, model dims, optimizer state,
/// the step counter, and the configuration hash.
#[derive(Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub step: u64,
    pub config_hash: u64,
    pub hidden: usize,
    pub heads: usize,
    pub graph_layers: usize,
    pub decoder_layers: usize,
    pub ffn: usize,
    pub max_len: usize,
    pub scaled_attention: bool,
    pub init: InitSpec,
    pub vocab: Vec<String>,
    params: Vec<NamedTensor>,
    pub optimizer: Option<Adam>,
}

pub fn save_checkpoint(
    path: impl AsRef<Path>,
    model: &Model,
    optimizer: Option<&Adam>,
    step: u64,
    config_hash: u64,
) -> Result<()> {
    let path = path.as_ref();
    let params = model
        .store
        .iter()
        .map(|(name, tensor)| NamedTensor {
            name: name.to_string(),
            rows: tensor.rows(),
            cols: tensor.cols(),
            data: tensor.data().to_vec(),
        })
        .collect();
    let checkpoint = Checkpoint {
        format: CHECKPOINT_FORMAT.to_string(),
        step,
        config_hash,
        hidden: model.encoder.dims.hidden,
        heads: model.encoder.dims.heads,
        graph_layers: model.encoder.dims.layers,
        decoder_layers: model.decoder.dims.layers,
        ffn: model.decoder.dims.ffn,
        max_len: model.decoder.dims.max_len,
        scaled_attention: model.scaled_attention,
        init: InitSpec::of(&model.init),
        vocab: model.vocab.tokens().to_vec(),
        params,
        optimizer: optimizer.cloned(),
    };
    let json = serde_json::to_string(&checkpoint).expect("checkpoint serializes");
    fs::write(path, json).map_err(|e| ShgnError::io(path.display().to_string(), e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|e| ShgnError::io(path.display().to_string(), e))?;
    let checkpoint: Checkpoint = serde_json::from_str(&text)
        .map_err(|e| ShgnError::Checkpoint(format!("{}: {e}", path.display())))?;
    if checkpoint.format != CHECKPOINT_FORMAT {
        return Err(ShgnError::Checkpoint(format!(
            "unsupported format {:?}, expected {:?}",
            checkpoint.format, CHECKPOINT_FORMAT
        )));
    }
    Ok(checkpoint)
}

/// Rebuilds a model from a checkpoint. `table` must be supplied when the
/// checkpoint was trained with a pretrained table initializer.
pub fn model_from_checkpoint(
    checkpoint: &Checkpoint,
    table: Option<crate::corpus::EmbeddingTable>,
) -> Result<Model> {
    let init = match &checkpoint.init {
        InitSpec::Hash { dim, seed } => {
            if table.is_some() {
                return Err(ShgnError::Checkpoint(
                    "checkpoint used a hash initializer; do not supply an embedding table".into(),
                ));
            }
            NodeInitializer::HashDeterministic {
                dim: *dim,
                seed: *seed,
            }
        }
        InitSpec::Table { dim } => {
            let t = table.ok_or_else(|| {
                ShgnError::Checkpoint(
                    "checkpoint used a pretrained table; supply the embeddings file".into(),
                )
            })?;
            if t.dimension() != *dim {
                return Err(ShgnError::Checkpoint(format!(
                    "embedding table dimension {} does not match checkpoint {}",
                    t.dimension(),
                    dim
                )));
            }
            NodeInitializer::PretrainedTable(t)
        }
    };
    let dims = ModelDims {
        hidden: checkpoint.hidden,
        heads: checkpoint.heads,
        graph_layers: checkpoint.graph_layers,
        decoder_layers: checkpoint.decoder_layers,
        ffn: checkpoint.ffn,
        max_len: checkpoint.max_len,
    };
    let vocab = Vocab::from_tokens(checkpoint.vocab.clone())
        .map_err(|e| ShgnError::Checkpoint(e.to_string()))?;
    let mut model = Model::new(dims, vocab, init, 0, checkpoint.scaled_attention)?;
    if checkpoint.params.len() != model.store.len() {
        return Err(ShgnError::Checkpoint(format!(
            "checkpoint has {} parameters, model expects {}",
            checkpoint.params.len(),
            model.store.len()
        )));
    }
    for saved in &checkpoint.params {
        let id = model.store.id_of(&saved.name).ok_or_else(|| {
            ShgnError::Checkpoint(format!("unknown parameter {:?}", saved.name))
        })?;
        let tensor = Tensor::from_vec(saved.rows, saved.cols, saved.data.clone())?;
        if tensor.shape() != model.store.get(id).shape() {
            return Err(ShgnError::Checkpoint(format!(
                "parameter {:?} has shape {:?}, model expects {:?}",
                saved.name,
                tensor.shape(),
                model.store.get(id).shape()
            )));
        }
        *model.store.get_mut(id) = tensor;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, Stopwords, Story};
    use crate::graph::{build_graph, GraphOptions};

    fn toy_model() -> (Model, crate::graph::HeteroGraph) {
        let story = Story {
            id: "st1".into(),
            context: vec![tokenize("anna got milk .")],
            ending: Some(tokenize("she drank it .")),
            sentiment_label: None,
            clue_flags: None,
        };
        let graph = build_graph(
            &story,
            &[],
            None,
            &Stopwords::default_english(),
            GraphOptions::default(),
        )
        .unwrap();
        let lists: Vec<Vec<String>> = story
            .context
            .iter()
            .cloned()
            .chain(story.ending.clone())
            .collect();
        let refs: Vec<&[String]> = lists.iter().map(Vec::as_slice).collect();
        let vocab = Vocab::from_token_lists(refs.into_iter(), 1);
        let model = Model::new(
            ModelDims {
                hidden: 8,
                heads: 2,
                graph_layers: 1,
                decoder_layers: 1,
                ffn: 16,
                max_len: 10,
            },
            vocab,
            NodeInitializer::HashDeterministic { dim: 8, seed: 3 },
            11,
            false,
        )
        .unwrap();
        (model, graph)
    }

    #[test]
    fn roundtrip_reproduces_forward_pass_bit_identically() {
        let (model, graph) = toy_model();
        let before = model.encode_story(&graph).unwrap();

        let file = tempfile::NamedTempFile::new().unwrap();
        let adam = Adam::new(&model.store, 0.9, 0.999, 1e-8);
        save_checkpoint(file.path(), &model, Some(&adam), 17, 0xfeed).unwrap();

        let checkpoint = load_checkpoint(file.path()).unwrap();
        assert_eq!(checkpoint.step, 17);
        assert_eq!(checkpoint.config_hash, 0xfeed);
        let restored = model_from_checkpoint(&checkpoint, None).unwrap();
        let after = restored.encode_story(&graph).unwrap();
        assert_eq!(before.data().len(), after.data().len());
        for (a, b) in before.data().iter().zip(after.data().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn wrong_format_string_is_rejected() {
        let (model, _) = toy_model();
        let file = tempfile::NamedTempFile::new().unwrap();
        save_checkpoint(file.path(), &model, None, 0, 0).unwrap();
        let mut text = std::fs::read_to_string(file.path()).unwrap();
        text = text.replace(CHECKPOINT_FORMAT, "shgn-checkpoint-v0");
        std::fs::write(file.path(), text).unwrap();
        assert!(load_checkpoint(file.path()).is_err());
    }

    #[test]
    fn corrupted_vocabulary_is_an_error_not_a_panic() {
        let (model, _) = toy_model();
        let file = tempfile::NamedTempFile::new().unwrap();
        save_checkpoint(file.path(), &model, None, 0, 0).unwrap();
        let text = std::fs::read_to_string(file.path())
            .unwrap()
            .replace("<pad>", "<oops>");
        std::fs::write(file.path(), text).unwrap();
        let checkpoint = load_checkpoint(file.path()).unwrap();
        assert!(matches!(
            model_from_checkpoint(&checkpoint, None),
            Err(ShgnError::Checkpoint(_))
        ));
    }

    #[test]
    fn table_checkpoint_requires_table_at_load() {
        let (mut model, _) = toy_model();
        let mut table = crate::corpus::EmbeddingTable::new(8);
        table.insert("x", vec![0.0; 8]).unwrap();
        model.init = NodeInitializer::PretrainedTable(table);
        let file = tempfile::NamedTempFile::new().unwrap();
        save_checkpoint(file.path(), &model, None, 0, 0).unwrap();
        let checkpoint = load_checkpoint(file.path()).unwrap();
        assert!(model_from_checkpoint(&checkpoint, None).is_err());
    }
}
