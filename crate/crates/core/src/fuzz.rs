//! Seeded random inputs for robustness testing of the total parsers.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Predicate;
use crate::linearize::LinearToken;
use crate::transition::{Action, ArcDirection};

const LABELS: &[&str] = &["ARG1", "ARG2", "BV", "root", "", "L-INDEX", "ARG1-of"];
const PREDICATES: &[&str] = &["_v_1", "_n_1", "person", "named_CARG", "named", "udef_q", "_want_v_1", "*", "("];
const CONSTANTS: &[&str] = &["John", "", "a \"b\"", "12"];

fn pick<'a>(rng: &mut ChaCha8Rng, items: &[&'a str]) -> &'a str {
    items.choose(rng).expect("non-empty")
}

/// Up to `max_len` top-down tokens drawn independently: brackets need not
/// balance and alignments may exceed `sentence_len`.
pub fn random_linear_tokens(seed: u64, max_len: usize, sentence_len: usize) -> Vec<LinearToken> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| match rng.gen_range(0..10) {
            0..=2 => LinearToken::OpenEdge {
                label: pick(&mut rng, LABELS).to_string(),
                reversed: rng.gen_bool(0.3),
                reentrant: rng.gen_bool(0.2),
            },
            3..=4 => LinearToken::Close,
            5..=6 => LinearToken::Align(rng.gen_range(0..sentence_len + 3)),
            7..=8 => LinearToken::Predicate(pick(&mut rng, PREDICATES).to_string()),
            _ => LinearToken::Constant(pick(&mut rng, CONSTANTS).to_string()),
        })
        .collect()
}

/// Up to `max_len` actions drawn independently, legal or not; positions may
/// exceed `sentence_len`.
pub fn random_actions(seed: u64, max_len: usize, sentence_len: usize) -> Vec<Action> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = rng.gen_range(0..=max_len);
    let label = |rng: &mut ChaCha8Rng| pick(rng, LABELS).to_string();
    (0..len)
        .map(|_| match rng.gen_range(0..8) {
            0..=1 => Action::Shift {
                start: rng.gen_range(0..sentence_len + 3),
                predicate: Predicate::parse(pick(&mut rng, PREDICATES)),
                constant: rng.gen_bool(0.2).then(|| pick(&mut rng, CONSTANTS).to_string()),
            },
            2 => Action::Reduce { end: rng.gen_bool(0.7).then(|| rng.gen_range(0..sentence_len + 3)) },
            3 => Action::LeftArc(label(&mut rng)),
            4 => Action::RightArc(label(&mut rng)),
            5 => Action::UndirectedArc(label(&mut rng)),
            6 => Action::CrossArc {
                depth: rng.gen_range(0..5),
                label: label(&mut rng),
                direction: *[ArcDirection::ToStack, ArcDirection::ToBuffer, ArcDirection::Undirected]
                    .choose(&mut rng)
                    .expect("non-empty"),
            },
            _ => Action::Root,
        })
        .collect()
}
