//! Node initialization and the heterogeneous-graph-transformer layer stack.
//!
//! Every node gets an initial vector from a pluggable provider (pretrained
//! table or deterministic hash expansion); the global node's vector is a
//! trainable parameter. Each graph layer computes type-parameterized mutual
//! attention over in-neighbors, type-parameterized messages, and a residual
//! sigmoid aggregation; the final states are a learned projection of
//! `[h^L, h^0]`.
//!
//! Parameter names in checkpoints are stable:
//! `hgt.L<l>.<role>.<node-or-edge-name>` for layer weights (roles `key`,
//! `query`, `message`, `aggregate` per node type and `att`, `msg` per edge
//! type), plus `hgt.global_init`, `hgt.adapter`, and `hgt.final`.

use crate::corpus::EmbeddingTable;
use crate::error::{Result, ShgnError};
use crate::graph::{EdgeType, HeteroGraph, NodeType};
use crate::numerics::{fnv1a64, ParamId, ParamStore, SeededRng, Tape, Tensor, Var};

/// Fallback seed used when a pretrained table misses a key.
const TABLE_FALLBACK_SEED: u64 = 0x7ab1e;

/// Provides initial vectors for sentence, word, and knowledge nodes. The
/// global node always uses the learned vector in the parameters instead.
#[derive(Clone, Debug)]
pub enum NodeInitializer {
    PretrainedTable(EmbeddingTable),
    HashDeterministic { dim: usize, seed: u64 },
}

impl NodeInitializer {
    pub fn dimension(&self) -> usize {
        match self {
            NodeInitializer::PretrainedTable(t) => t.dimension(),
            NodeInitializer::HashDeterministic { dim, .. } => *dim,
        }
    }

    /// Total lookup: pretrained tables fall back to the deterministic hash
    /// expansion for unknown keys.
    pub fn vector(&self, key: &str) -> Vec<f64> {
        match self {
            NodeInitializer::PretrainedTable(t) => t
                .lookup(key)
                .map(<[f64]>::to_vec)
                .unwrap_or_else(|| hash_vector(key, t.dimension(), TABLE_FALLBACK_SEED)),
            NodeInitializer::HashDeterministic { dim, seed } => hash_vector(key, *dim, *seed),
        }
    }
}

/// Deterministic hash expansion: seed a stream from FNV-1a(key) xor seed,
/// draw `dim` uniform values, and L2-normalize. Unit norm by contract.
pub fn hash_vector(key: &str, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = SeededRng::new(fnv1a64(key.as_bytes()) ^ seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-12 {
        v = vec![0.0; dim];
        v[0] = 1.0;
    } else {
        for x in &mut v {
            *x /= norm;
        }
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HgtDims {
    pub hidden: usize,
    pub heads: usize,
    pub layers: usize,
}

impl HgtDims {
    pub fn head_dim(&self) -> usize {
        self.hidden / self.heads
    }
}

/// One graph layer's parameters: per node type, the key/query/message
/// projections and the aggregation output; per edge type, the attention
/// bilinear form and the message transform.
pub struct HgtLayerParams {
    pub key: [ParamId; 4],
    pub query: [ParamId; 4],
    pub message: [ParamId; 4],
    pub aggregate: [ParamId; 4],
    pub att: [ParamId; 7],
    pub msg: [ParamId; 7],
}

pub struct EncoderParams {
    pub dims: HgtDims,
    pub global_init: ParamId,
    /// Maps provider vectors to the hidden width when they differ.
    pub adapter: Option<ParamId>,
    pub layers: Vec<HgtLayerParams>,
    pub w_final: ParamId,
}

impl EncoderParams {
    pub fn new(
        store: &mut ParamStore,
        dims: HgtDims,
        input_dim: usize,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        if dims.heads == 0 || dims.hidden % dims.heads != 0 {
            return Err(ShgnError::Invalid(format!(
                "hidden size {} is not divisible into {} heads",
                dims.hidden, dims.heads
            )));
        }
        let d = dims.hidden;
        let dh = dims.head_dim();
        let global_init = store.register_xavier("hgt.global_init", 1, d, rng)?;
        let adapter = if input_dim != d {
            Some(store.register_xavier("hgt.adapter", input_dim, d, rng)?)
        } else {
            None
        };
        let mut layers = Vec::with_capacity(dims.layers);
        for l in 0..dims.layers {
            let node_role = |store: &mut ParamStore, role: &str, rng: &mut SeededRng| {
                let ids: Vec<ParamId> = NodeType::ALL
                    .iter()
                    .map(|t| {
                        store.register_xavier(format!("hgt.L{l}.{role}.{}", t.name()), d, d, rng)
                    })
                    .collect::<Result<_>>()?;
                Ok::<[ParamId; 4], ShgnError>(ids.try_into().expect("four node types"))
            };
            let key = node_role(store, "key", rng)?;
            let query = node_role(store, "query", rng)?;
            let message = node_role(store, "message", rng)?;
            let aggregate = node_role(store, "aggregate", rng)?;
            let edge_role = |store: &mut ParamStore, role: &str, rng: &mut SeededRng| {
                let ids: Vec<ParamId> = EdgeType::ALL
                    .iter()
                    .map(|e| {
                        store.register_xavier(format!("hgt.L{l}.{role}.{}", e.name()), dh, dh, rng)
                    })
                    .collect::<Result<_>>()?;
                Ok::<[ParamId; 7], ShgnError>(ids.try_into().expect("seven edge types"))
            };
            let att = edge_role(store, "att", rng)?;
            let msg = edge_role(store, "msg", rng)?;
            layers.push(HgtLayerParams {
                key,
                query,
                message,
                aggregate,
                att,
                msg,
            });
        }
        let w_final = store.register_xavier("hgt.final", 2 * d, d, rng)?;
        Ok(EncoderParams {
            dims,
            global_init,
            adapter,
            layers,
            w_final,
        })
    }
}

/// Node vectors as one `[|V|, d]` matrix aligned with graph node order.
#[derive(Clone, Copy)]
pub struct NodeStates {
    pub matrix: Var,
}

/// Attention over one target's in-neighbors: raw bilinear scores and
/// softmaxed weights, per head, each `[1, n_sources]`.
pub struct PerTargetAttention {
    pub sources: Vec<usize>,
    pub raw: Vec<Var>,
    pub weights: Vec<Var>,
}

/// Per-target attention, aligned with graph node order; `None` for nodes
/// without in-neighbors.
pub struct AttentionScores {
    pub per_target: Vec<Option<PerTargetAttention>>,
}

/// Per-target stacked messages, `[n_sources, head_dim]` per head.
pub struct MessageStacks {
    pub per_target: Vec<Option<Vec<Var>>>,
}

fn in_neighbors(graph: &HeteroGraph, target: usize) -> (Vec<usize>, Vec<EdgeType>) {
    let mut sources = Vec::new();
    let mut kinds = Vec::new();
    for &e in graph.in_edge_indices(target) {
        let edge = graph.edges()[e];
        sources.push(edge.src);
        kinds.push(edge.kind);
    }
    (sources, kinds)
}

/// Initial node representations: the learned global vector for the global
/// node, provider vectors (through the adapter when present) for the rest.
/// Sentence nodes are keyed by their full sentence text, word nodes by the
/// token, knowledge nodes by the concept string.
pub fn initialize(
    tape: &mut Tape,
    store: &ParamStore,
    graph: &HeteroGraph,
    init: &NodeInitializer,
    params: &EncoderParams,
) -> Result<NodeStates> {
    let adapter = params.adapter.map(|id| tape.param(store, id));
    let mut rows = Vec::with_capacity(graph.node_count());
    for node in graph.nodes() {
        let row = match node.kind {
            NodeType::Global => tape.param(store, params.global_init),
            _ => {
                let raw = tape.constant(Tensor::row(&init.vector(&node.text)));
                match adapter {
                    Some(a) => tape.matmul(raw, a)?,
                    None => raw,
                }
            }
        };
        let (_, w) = tape.value(row).shape();
        if w != params.dims.hidden {
            return Err(ShgnError::shape(
                "initialize",
                format!(
                    "node {} vector width {} vs hidden {} (adapter missing?)",
                    node.id, w, params.dims.hidden
                ),
            ));
        }
        rows.push(row);
    }
    Ok(NodeStates {
        matrix: tape.concat_rows(&rows)?,
    })
}

/// Heterogeneous mutual attention for layer `layer`: per head, the bilinear
/// score `k_s W_att(e) q_t^T` softmaxed over each target's in-neighbors.
/// Targets with no in-neighbors get no attention row.
pub fn hgt_attention(
    tape: &mut Tape,
    store: &ParamStore,
    graph: &HeteroGraph,
    states: &NodeStates,
    params: &EncoderParams,
    layer: usize,
    scaled: bool,
) -> Result<AttentionScores> {
    let dims = params.dims;
    let lp = &params.layers[layer];
    let key_w: Vec<Var> = lp.key.iter().map(|&id| tape.param(store, id)).collect();
    let query_w: Vec<Var> = lp.query.iter().map(|&id| tape.param(store, id)).collect();
    let att_w: Vec<Var> = lp.att.iter().map(|&id| tape.param(store, id)).collect();

    // Per-node key/query projections, split per head.
    let mut keys: Vec<Vec<Var>> = Vec::with_capacity(graph.node_count());
    let mut queries: Vec<Vec<Var>> = Vec::with_capacity(graph.node_count());
    for (v, node) in graph.nodes().iter().enumerate() {
        let h = tape.slice_rows(states.matrix, v, 1)?;
        let k = tape.matmul(h, key_w[node.kind.index()])?;
        let q = tape.matmul(h, query_w[node.kind.index()])?;
        keys.push(tape.split_heads(k, dims.heads)?);
        queries.push(tape.split_heads(q, dims.heads)?);
    }

    let scale = 1.0 / (dims.head_dim() as f64).sqrt();
    let mut per_target = Vec::with_capacity(graph.node_count());
    for t in 0..graph.node_count() {
        let (sources, kinds) = in_neighbors(graph, t);
        if sources.is_empty() {
            per_target.push(None);
            continue;
        }
        let mut raw = Vec::with_capacity(dims.heads);
        let mut weights = Vec::with_capacity(dims.heads);
        for head in 0..dims.heads {
            let qt = tape.transpose(queries[t][head]);
            let mut scores = Vec::with_capacity(sources.len());
            for (s, kind) in sources.iter().zip(kinds.iter()) {
                let kw = tape.matmul(keys[*s][head], att_w[kind.index()])?;
                let mut alpha = tape.matmul(kw, qt)?;
                if scaled {
                    alpha = tape.scalar_mul(alpha, scale);
                }
                scores.push(alpha);
            }
            let row = tape.concat_cols(&scores)?;
            raw.push(row);
            weights.push(tape.softmax(row));
        }
        per_target.push(Some(PerTargetAttention {
            sources,
            raw,
            weights,
        }));
    }
    Ok(AttentionScores { per_target })
}

/// Heterogeneous message passing for layer `layer`: per head,
/// `(W_message(tau(s)) h_s) W_msg(e)`, stacked over each target's
/// in-neighbors in the same order as the attention rows.
pub fn hgt_message(
    tape: &mut Tape,
    store: &ParamStore,
    graph: &HeteroGraph,
    states: &NodeStates,
    params: &EncoderParams,
    layer: usize,
) -> Result<MessageStacks> {
    let dims = params.dims;
    let lp = &params.layers[layer];
    let message_w: Vec<Var> = lp.message.iter().map(|&id| tape.param(store, id)).collect();
    let msg_edge_w: Vec<Var> = lp.msg.iter().map(|&id| tape.param(store, id)).collect();

    let mut projected: Vec<Vec<Var>> = Vec::with_capacity(graph.node_count());
    for (v, node) in graph.nodes().iter().enumerate() {
        let h = tape.slice_rows(states.matrix, v, 1)?;
        let m = tape.matmul(h, message_w[node.kind.index()])?;
        projected.push(tape.split_heads(m, dims.heads)?);
    }

    let mut per_target = Vec::with_capacity(graph.node_count());
    for t in 0..graph.node_count() {
        let (sources, kinds) = in_neighbors(graph, t);
        if sources.is_empty() {
            per_target.push(None);
            continue;
        }
        let mut heads = Vec::with_capacity(dims.heads);
        for head in 0..dims.heads {
            let mut rows = Vec::with_capacity(sources.len());
            for (s, kind) in sources.iter().zip(kinds.iter()) {
                rows.push(tape.matmul(projected[*s][head], msg_edge_w[kind.index()])?);
            }
            heads.push(tape.concat_rows(&rows)?);
        }
        per_target.push(Some(heads));
    }
    Ok(MessageStacks { per_target })
}

/// Target-specific aggregation for layer `layer`: attention-weighted message
/// sums per head, concatenated, passed through a sigmoid and the target
/// type's output projection, plus the residual. Targets without in-neighbors
/// pass through unchanged.
pub fn hgt_aggregate(
    tape: &mut Tape,
    store: &ParamStore,
    graph: &HeteroGraph,
    states: &NodeStates,
    attn: &AttentionScores,
    msgs: &MessageStacks,
    params: &EncoderParams,
    layer: usize,
) -> Result<NodeStates> {
    let dims = params.dims;
    let lp = &params.layers[layer];
    let aggregate_w: Vec<Var> = lp
        .aggregate
        .iter()
        .map(|&id| tape.param(store, id))
        .collect();

    let mut rows = Vec::with_capacity(graph.node_count());
    for (t, node) in graph.nodes().iter().enumerate() {
        let prev = tape.slice_rows(states.matrix, t, 1)?;
        let row = match (&attn.per_target[t], &msgs.per_target[t]) {
            (Some(att), Some(msg_heads)) => {
                let mut parts = Vec::with_capacity(dims.heads);
                for head in 0..dims.heads {
                    parts.push(tape.matmul(att.weights[head], msg_heads[head])?);
                }
                let agg = tape.concat_cols(&parts)?;
                let gated = tape.sigmoid(agg);
                let projected = tape.matmul(gated, aggregate_w[node.kind.index()])?;
                tape.add(projected, prev)?
            }
            _ => prev,
        };
        rows.push(row);
    }
    Ok(NodeStates {
        matrix: tape.concat_rows(&rows)?,
    })
}

/// Final projection of `[h^L, h^0]` back to the hidden width.
pub fn finalize(
    tape: &mut Tape,
    store: &ParamStore,
    states_l: &NodeStates,
    states_0: &NodeStates,
    params: &EncoderParams,
) -> Result<NodeStates> {
    let w = tape.param(store, params.w_final);
    let cat = tape.concat_cols(&[states_l.matrix, states_0.matrix])?;
    Ok(NodeStates {
        matrix: tape.matmul(cat, w)?,
    })
}

/// Full encoder: initialization, `layers` graph layers, final projection.
/// Returns both the final and the initial states.
pub fn encode(
    tape: &mut Tape,
    store: &ParamStore,
    graph: &HeteroGraph,
    init: &NodeInitializer,
    params: &EncoderParams,
    scaled_attention: bool,
) -> Result<(NodeStates, NodeStates)> {
    let initial = initialize(tape, store, graph, init, params)?;
    let mut states = initial;
    for layer in 0..params.dims.layers {
        let attn = hgt_attention(tape, store, graph, &states, params, layer, scaled_attention)?;
        let msgs = hgt_message(tape, store, graph, &states, params, layer)?;
        states = hgt_aggregate(tape, store, graph, &states, &attn, &msgs, params, layer)?;
    }
    let finalized = finalize(tape, store, &states, &initial, params)?;
    Ok((finalized, initial))
}
