//! Answer span extraction.

/// The generation convention all prompts teach: the scored answer follows
/// the final `Answer:` marker.
pub const ANSWER_MARKER: &str = "Answer:";

/// Returns the span after the last `Answer:` marker, trimmed. Text without
/// a marker is returned whole, trimmed, so free-form generations still
/// score.
pub fn parse_answer_span(text: &str) -> String {
    match text.rfind(ANSWER_MARKER) {
        Some(at) => text[at + ANSWER_MARKER.len()..].trim().to_string(),
        None => text.trim().to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn last_marker_wins() {
        assert_eq!(
            parse_answer_span("Thought: checking both.\nAnswer: chr7\nAnswer: chr8"),
            "chr8"
        );
    }

    #[test]
    fn no_marker_returns_whole_text() {
        assert_eq!(parse_answer_span("  chr7:100-200  "), "chr7:100-200");
    }

    #[test]
    fn span_is_trimmed() {
        assert_eq!(parse_answer_span("Answer:   PSMB10  \n"), "PSMB10");
        assert_eq!(parse_answer_span("Answer:"), "");
    }

    #[test]
    fn marker_matching_is_case_sensitive() {
        assert_eq!(parse_answer_span("answer: lowercase"), "answer: lowercase");
    }

    proptest! {
        #[test]
        fn parse_is_idempotent(text in ".{0,200}") {
            let once = parse_answer_span(&text);
            let twice = parse_answer_span(&once);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn span_never_contains_marker(prefix in ".{0,80}", suffix in "[^:]{0,80}") {
            let text = format!("{prefix}Answer:{suffix}");
            let span = parse_answer_span(&text);
            prop_assert!(!span.contains(ANSWER_MARKER));
        }
    }
}
