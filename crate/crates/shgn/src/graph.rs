//! Heterogeneous story graph construction: one-hop concept retrieval from the
//! knowledge triples, filtering to concepts supported by more than one
//! context sentence, node merging, and typed edge emission.
//!
//! The graph is directed with four node types (global, knowledge, sentence,
//! word) and seven edge types. Node ids are stable strings: `g`, `s<k>`,
//! `w:<token>`, `k:<concept>`. Construction is deterministic: identical
//! inputs produce identical node and edge lists, order included.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{DepTree, KnowledgeEdge, Stopwords, Story};
use crate::error::{Result, ShgnError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeType {
    Global,
    Knowledge,
    Sentence,
    Word,
}

impl NodeType {
    pub const ALL: [NodeType; 4] = [
        NodeType::Global,
        NodeType::Knowledge,
        NodeType::Sentence,
        NodeType::Word,
    ];

    pub fn index(self) -> usize {
        match self {
            NodeType::Global => 0,
            NodeType::Knowledge => 1,
            NodeType::Sentence => 2,
            NodeType::Word => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeType::Global => "global",
            NodeType::Knowledge => "knowledge",
            NodeType::Sentence => "sentence",
            NodeType::Word => "word",
        }
    }
}

/// The seven directed edge kinds of the story graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeType {
    GlobalToSentence,
    SentenceToGlobal,
    SentenceToSentence,
    KnowledgeToSentence,
    SentenceToKnowledge,
    WordToSentence,
    SentenceToWord,
}

impl EdgeType {
    pub const ALL: [EdgeType; 7] = [
        EdgeType::GlobalToSentence,
        EdgeType::SentenceToGlobal,
        EdgeType::SentenceToSentence,
        EdgeType::KnowledgeToSentence,
        EdgeType::SentenceToKnowledge,
        EdgeType::WordToSentence,
        EdgeType::SentenceToWord,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|e| *e == self).expect("listed")
    }

    /// The (source, destination) node types this edge kind connects.
    pub fn endpoints(self) -> (NodeType, NodeType) {
        match self {
            EdgeType::GlobalToSentence => (NodeType::Global, NodeType::Sentence),
            EdgeType::SentenceToGlobal => (NodeType::Sentence, NodeType::Global),
            EdgeType::SentenceToSentence => (NodeType::Sentence, NodeType::Sentence),
            EdgeType::KnowledgeToSentence => (NodeType::Knowledge, NodeType::Sentence),
            EdgeType::SentenceToKnowledge => (NodeType::Sentence, NodeType::Knowledge),
            EdgeType::WordToSentence => (NodeType::Word, NodeType::Sentence),
            EdgeType::SentenceToWord => (NodeType::Sentence, NodeType::Word),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EdgeType::GlobalToSentence => "global_to_sentence",
            EdgeType::SentenceToGlobal => "sentence_to_global",
            EdgeType::SentenceToSentence => "sentence_to_sentence",
            EdgeType::KnowledgeToSentence => "knowledge_to_sentence",
            EdgeType::SentenceToKnowledge => "sentence_to_knowledge",
            EdgeType::WordToSentence => "word_to_sentence",
            EdgeType::SentenceToWord => "sentence_to_word",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphNode {
    pub id: String,
    pub kind: NodeType,
    /// Text payload: sentence text, word token, or concept string; empty for
    /// the global node.
    pub text: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphEdge {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeType,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
}

/// One retrieved concept with the context sentences (1-based) and tokens
/// (sentence, token index) that triggered it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConceptHit {
    pub concept: String,
    pub source_sentences: BTreeSet<usize>,
    pub trigger_tokens: BTreeSet<(usize, usize)>,
}

/// Node-type ablation switches; all true for the standard graph.
#[derive(Clone, Copy, Debug)]
pub struct GraphOptions {
    pub include_global: bool,
    pub include_knowledge: bool,
    pub include_word: bool,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions {
            include_global: true,
            include_knowledge: true,
            include_word: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HeteroGraph {
    nodes: Vec<GraphNode>,
    edges: Vec<GraphEdge>,
    index: HashMap<String, usize>,
    sentence_order: Vec<usize>,
    in_edges: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
}

impl HeteroGraph {
    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn node(&self, idx: usize) -> &GraphNode {
        &self.nodes[idx]
    }

    /// Sentence node indices in context order.
    pub fn sentence_order(&self) -> &[usize] {
        &self.sentence_order
    }

    pub fn global_index(&self) -> Option<usize> {
        self.index.get("g").copied()
    }

    pub fn word_node_indices(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].kind == NodeType::Word)
            .collect()
    }

    pub fn knowledge_node_indices(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].kind == NodeType::Knowledge)
            .collect()
    }

    /// Incoming edge indices of a node, in edge insertion order.
    pub fn in_edge_indices(&self, node: usize) -> &[usize] {
        &self.in_edges[node]
    }

    /// Neighbors of `node_id` with the connecting edge type, in edge
    /// insertion order. `In` returns sources of edges ending at the node.
    pub fn neighbors(
        &self,
        node_id: &str,
        direction: Direction,
    ) -> Result<Vec<(String, EdgeType)>> {
        let idx = self
            .node_index(node_id)
            .ok_or_else(|| ShgnError::UnknownNode(node_id.to_string()))?;
        let edge_list = match direction {
            Direction::In => &self.in_edges[idx],
            Direction::Out => &self.out_edges[idx],
        };
        Ok(edge_list
            .iter()
            .map(|&e| {
                let edge = self.edges[e];
                let other = match direction {
                    Direction::In => edge.src,
                    Direction::Out => edge.dst,
                };
                (self.nodes[other].id.clone(), edge.kind)
            })
            .collect())
    }

    /// Structural invariants: type-consistent edges, no duplicate
    /// (src, dst, type) triples, the sentence chain, and ≥2 distinct sentence
    /// in-neighbors for every knowledge node.
    pub fn validate(&self) -> Result<()> {
        for edge in &self.edges {
            let (src_t, dst_t) = edge.kind.endpoints();
            if self.nodes[edge.src].kind != src_t || self.nodes[edge.dst].kind != dst_t {
                return Err(ShgnError::Invalid(format!(
                    "edge {} -> {} has type {} but endpoint types {}/{}",
                    self.nodes[edge.src].id,
                    self.nodes[edge.dst].id,
                    edge.kind.name(),
                    self.nodes[edge.src].kind.name(),
                    self.nodes[edge.dst].kind.name(),
                )));
            }
        }
        let mut seen = HashSet::new();
        for edge in &self.edges {
            if !seen.insert((edge.src, edge.dst, edge.kind)) {
                return Err(ShgnError::Invalid(format!(
                    "duplicate edge {} -> {} ({})",
                    self.nodes[edge.src].id,
                    self.nodes[edge.dst].id,
                    edge.kind.name()
                )));
            }
        }
        for k in 1..self.sentence_order.len() {
            let (a, b) = (self.sentence_order[k - 1], self.sentence_order[k]);
            let chained = self
                .edges
                .iter()
                .any(|e| e.kind == EdgeType::SentenceToSentence && e.src == a && e.dst == b);
            if !chained {
                return Err(ShgnError::Invalid(format!(
                    "missing sentence chain edge {} -> {}",
                    self.nodes[a].id, self.nodes[b].id
                )));
            }
        }
        for idx in self.knowledge_node_indices() {
            let sources: HashSet<usize> = self.in_edges[idx]
                .iter()
                .map(|&e| self.edges[e])
                .filter(|e| e.kind == EdgeType::SentenceToKnowledge)
                .map(|e| e.src)
                .collect();
            if sources.len() < 2 {
                return Err(ShgnError::Invalid(format!(
                    "knowledge node {} has {} sentence in-neighbors, needs at least 2",
                    self.nodes[idx].id,
                    sources.len()
                )));
            }
        }
        Ok(())
    }

    /// Copy of the graph with nodes reinserted in `perm` order and edge
    /// endpoints remapped; edge order is preserved. Used to check that the
    /// encoder is equivariant to node insertion order.
    pub fn permuted_copy(&self, perm: &[usize]) -> HeteroGraph {
        assert_eq!(perm.len(), self.nodes.len());
        let mut new_pos = vec![0usize; self.nodes.len()];
        for (new_idx, &old_idx) in perm.iter().enumerate() {
            new_pos[old_idx] = new_idx;
        }
        let nodes: Vec<GraphNode> = perm.iter().map(|&i| self.nodes[i].clone()).collect();
        let edges: Vec<GraphEdge> = self
            .edges
            .iter()
            .map(|e| GraphEdge {
                src: new_pos[e.src],
                dst: new_pos[e.dst],
                kind: e.kind,
            })
            .collect();
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();
        let sentence_order = self.sentence_order.iter().map(|&s| new_pos[s]).collect();
        let mut in_edges = vec![Vec::new(); nodes.len()];
        let mut out_edges = vec![Vec::new(); nodes.len()];
        for (i, edge) in edges.iter().enumerate() {
            out_edges[edge.src].push(i);
            in_edges[edge.dst].push(i);
        }
        HeteroGraph {
            nodes,
            edges,
            index,
            sentence_order,
            in_edges,
            out_edges,
        }
    }

    pub fn export(&self) -> GraphExport {
        GraphExport {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeExport {
                    id: n.id.clone(),
                    r#type: n.kind,
                    text: n.text.clone(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeExport {
                    src: self.nodes[e.src].id.clone(),
                    dst: self.nodes[e.dst].id.clone(),
                    r#type: e.kind,
                })
                .collect(),
        }
    }
}

/// JSON export schema: `{nodes: [{id,type,text}], edges: [{src,dst,type}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphExport {
    pub nodes: Vec<NodeExport>,
    pub edges: Vec<EdgeExport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeExport {
    pub id: String,
    pub r#type: NodeType,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeExport {
    pub src: String,
    pub dst: String,
    pub r#type: EdgeType,
}

const CONTENT_POS: [&str; 5] = ["NOUN", "PROPN", "VERB", "ADJ", "ADV"];

/// A token is eligible for retrieval (and for a word node) when it is not a
/// stopword and, if a matching parse is available, carries a content POS tag.
fn token_eligible(
    token: &str,
    position: usize,
    tree: Option<&DepTree>,
    stopwords: &Stopwords,
) -> bool {
    if stopwords.contains(token) {
        return false;
    }
    match tree {
        Some(t) => CONTENT_POS.contains(&t.upos[position].as_str()),
        None => true,
    }
}

fn tree_for_sentence<'a>(
    story: &Story,
    k: usize,
    trees: Option<&'a HashMap<String, DepTree>>,
) -> Option<&'a DepTree> {
    let trees = trees?;
    let tree = trees.get(&format!("{}.{}", story.id, k + 1))?;
    // A misaligned parse cannot supply per-token POS tags; fall back to the
    // content-word rule for this sentence.
    (tree.len() == story.context[k].len()).then_some(tree)
}

/// Retrieves one-hop concepts: for every eligible context token that matches
/// an edge's head or tail (exact match after case-folding), the opposite
/// endpoint is collected as a concept, grouped with its source sentences.
pub fn retrieve_concepts(
    story: &Story,
    knowledge: &[KnowledgeEdge],
    trees: Option<&HashMap<String, DepTree>>,
    stopwords: &Stopwords,
) -> Vec<ConceptHit> {
    let mut order: Vec<String> = Vec::new();
    let mut hits: HashMap<String, ConceptHit> = HashMap::new();
    for (k, sentence) in story.context.iter().enumerate() {
        let tree = tree_for_sentence(story, k, trees);
        for (t, token) in sentence.iter().enumerate() {
            if !token_eligible(token, t, tree, stopwords) {
                continue;
            }
            for edge in knowledge {
                let concept = if edge.head == *token {
                    &edge.tail
                } else if edge.tail == *token {
                    &edge.head
                } else {
                    continue;
                };
                let hit = hits.entry(concept.clone()).or_insert_with(|| {
                    order.push(concept.clone());
                    ConceptHit {
                        concept: concept.clone(),
                        source_sentences: BTreeSet::new(),
                        trigger_tokens: BTreeSet::new(),
                    }
                });
                hit.source_sentences.insert(k + 1);
                hit.trigger_tokens.insert((k + 1, t));
            }
        }
    }
    order
        .into_iter()
        .map(|c| hits.remove(&c).expect("ordered concepts exist"))
        .collect()
}

/// Builds the heterogeneous story graph from a story and its concept hits.
///
/// Nodes: one global node, one sentence node per context sentence, one word
/// node per distinct eligible token (merged across sentences), and one
/// knowledge node per concept supported by more than one sentence. Edges:
/// global <-> sentence both ways, the sentence chain, word <-> sentence both
/// ways, knowledge <-> sentence both ways.
pub fn build_graph(
    story: &Story,
    hits: &[ConceptHit],
    trees: Option<&HashMap<String, DepTree>>,
    stopwords: &Stopwords,
    opts: GraphOptions,
) -> Result<HeteroGraph> {
    if story.context.is_empty() {
        return Err(ShgnError::Invalid(format!(
            "story {} has no context sentences",
            story.id
        )));
    }

    let mut nodes = Vec::new();
    let mut index = HashMap::new();
    let push_node = |nodes: &mut Vec<GraphNode>,
                         index: &mut HashMap<String, usize>,
                         id: String,
                         kind: NodeType,
                         text: String| {
        let idx = nodes.len();
        index.insert(id.clone(), idx);
        nodes.push(GraphNode { id, kind, text });
        idx
    };

    let global = opts.include_global.then(|| {
        push_node(
            &mut nodes,
            &mut index,
            "g".to_string(),
            NodeType::Global,
            String::new(),
        )
    });

    let mut sentence_order = Vec::with_capacity(story.context.len());
    for k in 0..story.context.len() {
        sentence_order.push(push_node(
            &mut nodes,
            &mut index,
            format!("s{}", k + 1),
            NodeType::Sentence,
            story.sentence_text(k),
        ));
    }

    // Word nodes in first-occurrence order; remember which sentences contain
    // each word (insertion-ordered, deduplicated).
    let mut word_nodes: Vec<usize> = Vec::new();
    let mut word_sentences: Vec<Vec<usize>> = Vec::new();
    if opts.include_word {
        let mut word_slot: HashMap<String, usize> = HashMap::new();
        for (k, sentence) in story.context.iter().enumerate() {
            let tree = tree_for_sentence(story, k, trees);
            for (t, token) in sentence.iter().enumerate() {
                if !token_eligible(token, t, tree, stopwords) {
                    continue;
                }
                let slot = *word_slot.entry(token.clone()).or_insert_with(|| {
                    word_nodes.push(push_node(
                        &mut nodes,
                        &mut index,
                        format!("w:{token}"),
                        NodeType::Word,
                        token.clone(),
                    ));
                    word_sentences.push(Vec::new());
                    word_nodes.len() - 1
                });
                if !word_sentences[slot].contains(&sentence_order[k]) {
                    word_sentences[slot].push(sentence_order[k]);
                }
            }
        }
    }

    // Knowledge nodes: only concepts retrieved from more than one sentence.
    let mut knowledge_nodes: Vec<(usize, Vec<usize>)> = Vec::new();
    if opts.include_knowledge {
        for hit in hits {
            if hit.source_sentences.len() < 2 {
                continue;
            }
            let idx = push_node(
                &mut nodes,
                &mut index,
                format!("k:{}", hit.concept),
                NodeType::Knowledge,
                hit.concept.clone(),
            );
            let sources = hit
                .source_sentences
                .iter()
                .map(|&k| sentence_order[k - 1])
                .collect();
            knowledge_nodes.push((idx, sources));
        }
    }

    let mut edges = Vec::new();
    let mut edge_seen = HashSet::new();
    let mut push_edge = |edges: &mut Vec<GraphEdge>, src: usize, dst: usize, kind: EdgeType| {
        if edge_seen.insert((src, dst, kind)) {
            edges.push(GraphEdge { src, dst, kind });
        }
    };

    if let Some(g) = global {
        for &s in &sentence_order {
            push_edge(&mut edges, g, s, EdgeType::GlobalToSentence);
            push_edge(&mut edges, s, g, EdgeType::SentenceToGlobal);
        }
    }
    for k in 1..sentence_order.len() {
        push_edge(
            &mut edges,
            sentence_order[k - 1],
            sentence_order[k],
            EdgeType::SentenceToSentence,
        );
    }
    for (slot, &w) in word_nodes.iter().enumerate() {
        for &s in &word_sentences[slot] {
            push_edge(&mut edges, w, s, EdgeType::WordToSentence);
            push_edge(&mut edges, s, w, EdgeType::SentenceToWord);
        }
    }
    for (kn, sources) in &knowledge_nodes {
        for &s in sources {
            push_edge(&mut edges, *kn, s, EdgeType::KnowledgeToSentence);
            push_edge(&mut edges, s, *kn, EdgeType::SentenceToKnowledge);
        }
    }

    let mut in_edges = vec![Vec::new(); nodes.len()];
    let mut out_edges = vec![Vec::new(); nodes.len()];
    for (i, edge) in edges.iter().enumerate() {
        out_edges[edge.src].push(i);
        in_edges[edge.dst].push(i);
    }

    let graph = HeteroGraph {
        nodes,
        edges,
        index,
        sentence_order,
        in_edges,
        out_edges,
    };
    graph.validate()?;
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn story(sentences: &[&str]) -> Story {
        Story {
            id: "st1".into(),
            context: sentences.iter().map(|s| tokenize(s)).collect(),
            ending: None,
            sentiment_label: None,
            clue_flags: None,
        }
    }

    fn kedge(h: &str, r: &str, t: &str) -> KnowledgeEdge {
        KnowledgeEdge {
            head: h.into(),
            relation: r.into(),
            tail: t.into(),
        }
    }

    #[test]
    fn one_hop_retrieval_finds_opposite_endpoint() {
        let st = story(&["the sky", "the sky", "anna got milk today"]);
        let edges = vec![kedge("milk", "relatedto", "cereal")];
        let hits = retrieve_concepts(&st, &edges, None, &Stopwords::default_english());
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].concept, "cereal");
        assert_eq!(
            hits[0]
                .source_sentences
                .iter()
                .copied()
                .collect::<Vec<_>>(),
            vec![3]
        );
    }

    #[test]
    fn empty_knowledge_yields_empty_hits() {
        let st = story(&["anna got milk"]);
        let hits = retrieve_concepts(&st, &[], None, &Stopwords::default_english());
        assert!(hits.is_empty());
    }

    #[test]
    fn retrieval_matches_brute_force_double_loop() {
        let st = story(&[
            "anna went to the kitchen for breakfast .",
            "she poured cereal into a bowl .",
            "anna got milk .",
            "then it was too much for her .",
        ]);
        let edges = vec![
            kedge("cereal", "isa", "food"),
            kedge("milk", "isa", "food"),
            kedge("cereal", "relatedto", "milk"),
            kedge("breakfast", "relatedto", "milk"),
            kedge("kitchen", "atlocation", "house"),
            kedge("bowl", "atlocation", "cupboard"),
            kedge("went", "formof", "go"),
            kedge("poured", "formof", "pour"),
            kedge("sofa", "atlocation", "living room"),
            kedge("dog", "desires", "bone"),
            kedge("milk", "relatedto", "cereal"),
            kedge("got", "formof", "get"),
        ];
        let stopwords = Stopwords::default_english();
        let hits = retrieve_concepts(&st, &edges, None, &stopwords);

        // Independent oracle: exhaustive loop over all (token, edge) pairs.
        let mut expected: HashMap<String, BTreeSet<usize>> = HashMap::new();
        for (k, sentence) in st.context.iter().enumerate() {
            for token in sentence {
                if stopwords.contains(token) {
                    continue;
                }
                for e in &edges {
                    if e.head == *token {
                        expected.entry(e.tail.clone()).or_default().insert(k + 1);
                    }
                    if e.tail == *token {
                        expected.entry(e.head.clone()).or_default().insert(k + 1);
                    }
                }
            }
        }
        assert_eq!(hits.len(), expected.len());
        for hit in &hits {
            assert_eq!(Some(&hit.source_sentences), expected.get(&hit.concept));
        }
    }

    #[test]
    fn degenerate_story_builds_two_nodes_two_edges() {
        let st = story(&["the and of ."]);
        let graph = build_graph(
            &st,
            &[],
            None,
            &Stopwords::default_english(),
            GraphOptions::default(),
        )
        .unwrap();
        assert_eq!(graph.node_count(), 2);
        assert_eq!(graph.edges().len(), 2);
        let kinds: Vec<EdgeType> = graph.edges().iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            vec![EdgeType::GlobalToSentence, EdgeType::SentenceToGlobal]
        );
    }

    #[test]
    fn single_sentence_concepts_are_dropped() {
        let st = story(&["anna got milk", "the sky was blue"]);
        let hits = vec![ConceptHit {
            concept: "cereal".into(),
            source_sentences: [2].into_iter().collect(),
            trigger_tokens: BTreeSet::new(),
        }];
        let graph = build_graph(
            &st,
            &hits,
            None,
            &Stopwords::default_english(),
            GraphOptions::default(),
        )
        .unwrap();
        assert!(graph.node_index("k:cereal").is_none());
        assert!(graph.knowledge_node_indices().is_empty());
    }

    #[test]
    fn zero_sentence_story_is_error() {
        let st = Story {
            id: "e".into(),
            context: vec![],
            ending: None,
            sentiment_label: None,
            clue_flags: None,
        };
        assert!(build_graph(
            &st,
            &[],
            None,
            &Stopwords::default_english(),
            GraphOptions::default()
        )
        .is_err());
    }

    #[test]
    fn neighbors_of_global_in_are_all_sentences() {
        let st = story(&["anna got milk", "the sky was blue", "it rained"]);
        let graph = build_graph(
            &st,
            &[],
            None,
            &Stopwords::default_english(),
            GraphOptions::default(),
        )
        .unwrap();
        let ns = graph.neighbors("g", Direction::In).unwrap();
        assert_eq!(
            ns.iter().map(|(id, _)| id.as_str()).collect::<Vec<_>>(),
            vec!["s1", "s2", "s3"]
        );
        assert!(ns.iter().all(|(_, k)| *k == EdgeType::SentenceToGlobal));
    }

    #[test]
    fn first_sentence_has_no_sentence_predecessor() {
        let st = story(&["anna got milk", "the sky was blue"]);
        let graph = build_graph(
            &st,
            &[],
            None,
            &Stopwords::default_english(),
            GraphOptions::default(),
        )
        .unwrap();
        let ns = graph.neighbors("s1", Direction::In).unwrap();
        assert!(ns.iter().all(|(_, k)| *k != EdgeType::SentenceToSentence));
    }

    #[test]
    fn neighbors_match_edge_list_scan() {
        let st = story(&[
            "anna went to the kitchen for breakfast .",
            "she poured cereal into a bowl .",
            "anna got milk .",
            "then it was too much for her .",
        ]);
        let stopwords = Stopwords::default_english();
        let edges = vec![kedge("cereal", "isa", "food"), kedge("milk", "isa", "food")];
        let hits = retrieve_concepts(&st, &edges, None, &stopwords);
        let graph = build_graph(&st, &hits, None, &stopwords, GraphOptions::default()).unwrap();

        let s2 = graph.node_index("s2").unwrap();
        let expected: Vec<(String, EdgeType)> = graph
            .edges()
            .iter()
            .filter(|e| e.dst == s2)
            .map(|e| (graph.node(e.src).id.clone(), e.kind))
            .collect();
        assert_eq!(graph.neighbors("s2", Direction::In).unwrap(), expected);
        assert!(!expected.is_empty());
    }

    #[test]
    fn unknown_node_id_is_error() {
        let st = story(&["anna got milk"]);
        let graph = build_graph(
            &st,
            &[],
            None,
            &Stopwords::default_english(),
            GraphOptions::default(),
        )
        .unwrap();
        assert!(graph.neighbors("nope", Direction::In).is_err());
    }

    #[test]
    fn construction_is_deterministic() {
        let st = story(&["anna got milk .", "she poured cereal ."]);
        let stopwords = Stopwords::default_english();
        let edges = vec![kedge("milk", "isa", "food"), kedge("cereal", "isa", "food")];
        let build = || {
            let hits = retrieve_concepts(&st, &edges, None, &stopwords);
            let g = build_graph(&st, &hits, None, &stopwords, GraphOptions::default()).unwrap();
            serde_json::to_string(&g.export()).unwrap()
        };
        assert_eq!(build(), build());
    }

    #[test]
    fn every_node_reaches_global_within_two_undirected_hops() {
        let st = story(&[
            "anna went to the kitchen for breakfast .",
            "she poured cereal into a bowl .",
            "anna got milk .",
        ]);
        let stopwords = Stopwords::default_english();
        let edges = vec![kedge("milk", "isa", "food"), kedge("cereal", "isa", "food")];
        let hits = retrieve_concepts(&st, &edges, None, &stopwords);
        let graph = build_graph(&st, &hits, None, &stopwords, GraphOptions::default()).unwrap();

        let g = graph.global_index().unwrap();
        let mut dist = vec![usize::MAX; graph.node_count()];
        dist[g] = 0;
        let mut frontier = vec![g];
        for hop in 1..=2 {
            let mut next = Vec::new();
            for &n in &frontier {
                for e in graph.edges() {
                    for (a, b) in [(e.src, e.dst), (e.dst, e.src)] {
                        if a == n && dist[b] == usize::MAX {
                            dist[b] = hop;
                            next.push(b);
                        }
                    }
                }
            }
            frontier = next;
        }
        assert!(dist.iter().all(|&d| d <= 2));
    }

    #[test]
    fn ablations_drop_node_types() {
        let st = story(&["anna got milk .", "she poured cereal ."]);
        let stopwords = Stopwords::default_english();
        let edges = vec![kedge("milk", "isa", "food"), kedge("cereal", "isa", "food")];
        let hits = retrieve_concepts(&st, &edges, None, &stopwords);

        let no_global = build_graph(
            &st,
            &hits,
            None,
            &stopwords,
            GraphOptions {
                include_global: false,
                ..GraphOptions::default()
            },
        )
        .unwrap();
        assert!(no_global.global_index().is_none());

        let no_knowledge = build_graph(
            &st,
            &hits,
            None,
            &stopwords,
            GraphOptions {
                include_knowledge: false,
                ..GraphOptions::default()
            },
        )
        .unwrap();
        assert!(no_knowledge.knowledge_node_indices().is_empty());

        let no_word = build_graph(
            &st,
            &hits,
            None,
            &stopwords,
            GraphOptions {
                include_word: false,
                ..GraphOptions::default()
            },
        )
        .unwrap();
        assert!(no_word.word_node_indices().is_empty());
    }
}
