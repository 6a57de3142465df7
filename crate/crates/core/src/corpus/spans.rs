use super::Sentence;
use crate::error::{Error, Result};
use crate::graph::Alignment;

/// Maps character spans (end exclusive) onto inclusive token spans. A token
/// that the span only clips by a single character at either edge is not
/// counted, so boundaries that miss a token boundary by one character snap
/// to it.
pub fn char_spans_to_token_spans(char_spans: &[(usize, usize)], sentence: &Sentence) -> Result<Vec<Alignment>> {
    char_spans
        .iter()
        .map(|&(start, end)| {
            let overlapping: Vec<usize> = sentence
                .char_offsets
                .iter()
                .enumerate()
                .filter(|(_, &(ts, te))| ts < end && start < te)
                .map(|(i, _)| i)
                .collect();
            let (mut first, mut last) = match (overlapping.first(), overlapping.last()) {
                (Some(&f), Some(&l)) => (f, l),
                _ => return Err(Error::SpanOverlapsNoToken { start, end }),
            };
            if first < last && sentence.char_offsets[first].1 == start + 1 {
                first += 1;
            }
            if first < last && sentence.char_offsets[last].0 + 1 == end {
                last -= 1;
            }
            Ok(Alignment::new(first, last))
        })
        .collect()
}
