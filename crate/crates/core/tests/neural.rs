use semgraph::corpus::{generate_synthetic_corpus, CorpusEntry, Sentence, SynthConfig};
use semgraph::graph::graphs_equal;
use semgraph::neural::{train, DecoderVariant, ModelConfig, Parser};
use tempfile::TempDir;

fn corpus() -> Vec<CorpusEntry> {
    generate_synthetic_corpus(&SynthConfig { size: 10, seed: 8, max_nodes: 6, ..SynthConfig::default() })
}

fn config(variant: DecoderVariant) -> ModelConfig {
    ModelConfig { batch_size: 5, hidden_dim: 12, ..ModelConfig::tiny(variant) }
}

#[test]
fn checkpoint_round_trip_preserves_decoding() {
    let c = corpus();
    let dir = TempDir::new().unwrap();
    let sentences: Vec<Sentence> = c.iter().map(|e| e.sentence.clone()).collect();
    for variant in DecoderVariant::ALL {
        let (p, _) = train(&c, config(variant), 3, |_, _| true).unwrap();
        let path = dir.path().join(format!("{variant}.bin"));
        p.save(&path).unwrap();
        let q = Parser::load(&path).unwrap();
        assert_eq!(q.config, p.config);
        assert_eq!(q.params, p.params);
        let (a, b) = (p.parse(&sentences, 4), q.parse(&sentences, 7));
        assert!(a.iter().zip(&b).all(|(x, y)| graphs_equal(x, y)), "{variant}");
        assert_eq!(p.loss(&c[0]).unwrap(), q.loss(&c[0]).unwrap());
    }
}

#[test]
fn decoded_graphs_are_valid_for_every_variant() {
    let c = corpus();
    let sentences: Vec<Sentence> = c.iter().map(|e| e.sentence.clone()).collect();
    for variant in DecoderVariant::ALL {
        let (p, _) = train(&c, config(variant), 2, |_, _| true).unwrap();
        for (s, out) in sentences.iter().zip(p.batch_greedy_decode(&sentences, 3)) {
            assert!(out.graph.validate(s.len()).is_empty());
            assert!(out.actions.len() <= 4 * s.len() + 10);
        }
    }
}

#[test]
fn truncated_checkpoint_is_rejected() {
    let c = corpus();
    let dir = TempDir::new().unwrap();
    let (p, _) = train(&c, config(DecoderVariant::Stack), 1, |_, _| true).unwrap();
    let path = dir.path().join("m.bin");
    p.save(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
    assert!(Parser::load(&path).is_err());
    std::fs::write(&path, b"not a checkpoint").unwrap();
    assert!(Parser::load(&path).is_err());
}
