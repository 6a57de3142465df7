//! The running example "Indeed everybody wants to meet John": an EDS-style
//! graph with a control reentrancy, two quantifiers and a named constant.

use crate::corpus::{offsets_for, CorpusEntry, Sentence};
use crate::graph::{Alignment, Edge, Node, NodeId, Predicate, SemanticGraph};

pub fn example_sentence() -> Sentence {
    let tokens: Vec<String> =
        ["Indeed", "everybody", "wants", "to", "meet", "John"].iter().map(|s| s.to_string()).collect();
    Sentence {
        char_offsets: offsets_for(&tokens),
        tokens,
        pos_tags: ["RB", "NN", "VBZ", "TO", "VB", "NNP"].map(String::from).to_vec(),
        ne_tags: ["O", "O", "O", "O", "O", "PERSON"].map(String::from).to_vec(),
    }
}

pub fn example_graph() -> SemanticGraph {
    let nodes = [
        (Predicate::abstract_("person"), 1, None),
        (Predicate::abstract_("every_q"), 1, None),
        (Predicate::surface("want", "v", Some("1")), 2, None),
        (Predicate::surface("meet", "v", Some("1")), 4, None),
        (Predicate::abstract_("named"), 5, Some("John")),
        (Predicate::abstract_("proper_q"), 5, None),
    ];
    SemanticGraph {
        nodes: nodes
            .into_iter()
            .enumerate()
            .map(|(i, (predicate, tok, constant))| Node {
                id: NodeId(i),
                predicate,
                alignment: Alignment::token(tok),
                constant: constant.map(str::to_string),
            })
            .collect(),
        edges: vec![
            Edge::new(NodeId(2), "ARG1", NodeId(0)),
            Edge::new(NodeId(1), "BV", NodeId(0)),
            Edge::new(NodeId(2), "ARG2", NodeId(3)),
            Edge::new(NodeId(3), "ARG1", NodeId(0)),
            Edge::new(NodeId(3), "ARG2", NodeId(4)),
            Edge::new(NodeId(5), "BV", NodeId(4)),
        ],
        root: NodeId(2),
    }
}

pub fn example_entry() -> CorpusEntry {
    CorpusEntry::new(example_sentence(), example_graph())
}

/// Top-down linearization of the example with delexicalized predicates.
pub const EXAMPLE_TOP_DOWN: &str = ":root( <2> _v_1 :ARG1( <1> person :BV-of( <1> every_q ) ) \
:ARG2( <4> _v_1 :ARG1*( <1> person ) :ARG2( <5> named_CARG :BV-of( <5> proper_q ) ) ) )";
