//! Text normalization and phrase occurrence counting.
//!
//! Normalized text is a sequence of lowercase alphanumeric word tokens. HTML
//! tags are dropped, and every other non-alphanumeric character separates
//! words. A normalized phrase is its tokens joined by single spaces.

/// Replaces every complete `<...>` tag with a space. A `<` with no closing
/// `>` after it is kept (it is a separator either way).
fn strip_tags(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    while let Some(open) = rest.find('<') {
        out.push_str(&rest[..open]);
        match rest[open..].find('>') {
            Some(close) => {
                out.push(' ');
                rest = &rest[open + close + 1..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

/// Splits raw text (possibly HTML) into lowercase word tokens.
///
/// ```
/// use ibag_search::ontology::normalize_text;
/// assert_eq!(normalize_text("<b>Wicket-Keeper!</b> match"), ["wicket", "keeper", "match"]);
/// ```
pub fn normalize_text(raw: &str) -> Vec<String> {
    let lowered = strip_tags(raw).to_lowercase();
    lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Normalizes a term or synonym into its canonical phrase form.
pub fn normalize_phrase(raw: &str) -> String {
    normalize_text(raw).join(" ")
}

/// Counts non-overlapping, left-to-right matches of `phrase` in `tokens`.
///
/// `phrase` must already be normalized. An empty phrase never matches.
pub fn count_occurrences<S: AsRef<str>>(tokens: &[S], phrase: &str) -> usize {
    let words: Vec<&str> = phrase.split(' ').filter(|w| !w.is_empty()).collect();
    if words.is_empty() || words.len() > tokens.len() {
        return 0;
    }
    let mut count = 0;
    let mut i = 0;
    while i + words.len() <= tokens.len() {
        let hit = tokens[i..i + words.len()]
            .iter()
            .zip(&words)
            .all(|(t, w)| t.as_ref() == *w);
        if hit {
            count += 1;
            i += words.len();
        } else {
            i += 1;
        }
    }
    count
}

/// True if `phrase` occurs in `tokens` at least once. Does not allocate.
pub fn contains_phrase<S: AsRef<str>>(tokens: &[S], phrase: &str) -> bool {
    let n = phrase.split(' ').filter(|w| !w.is_empty()).count();
    if n == 0 || n > tokens.len() {
        return false;
    }
    tokens.windows(n).any(|w| {
        w.iter()
            .map(AsRef::as_ref)
            .eq(phrase.split(' ').filter(|w| !w.is_empty()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        s.split(' ').map(str::to_owned).collect()
    }

    #[test]
    fn hyphen_and_punctuation_split_words() {
        assert_eq!(normalize_text("Wicket-Keeper!"), ["wicket", "keeper"]);
    }

    #[test]
    fn empty_input() {
        assert!(normalize_text("").is_empty());
        assert!(normalize_text("  ,,, <p></p> ").is_empty());
    }

    #[test]
    fn tags_are_removed() {
        assert_eq!(normalize_text("<b>Cricket</b> match"), ["cricket", "match"]);
        assert_eq!(normalize_text("a<br/>b"), ["a", "b"]);
        // unterminated tag opener is just punctuation
        assert_eq!(normalize_text("x < y"), ["x", "y"]);
    }

    #[test]
    fn counting_examples() {
        assert_eq!(
            count_occurrences(&toks("wicket keeper and wicket keeper"), "wicket keeper"),
            2
        );
        assert_eq!(count_occurrences(&toks("cricket"), "cricket"), 1);
        assert_eq!(count_occurrences(&toks("wicket wicket keeper"), "wicket keeper"), 1);
        assert_eq!(count_occurrences(&toks("a a a"), "a a"), 1);
        assert_eq!(count_occurrences(&toks("cricket"), ""), 0);
        assert_eq!(count_occurrences::<String>(&[], "cricket"), 0);
    }

    /// Independent count: try every start offset, keep greedy non-overlap.
    fn brute_force(tokens: &[String], phrase: &[String]) -> usize {
        let starts: Vec<usize> = (0..tokens.len())
            .filter(|&s| s + phrase.len() <= tokens.len() && tokens[s..s + phrase.len()] == *phrase)
            .collect();
        let mut next_free = 0;
        let mut n = 0;
        for s in starts {
            if s >= next_free {
                n += 1;
                next_free = s + phrase.len();
            }
        }
        n
    }

    fn word() -> impl Strategy<Value = String> {
        prop::sample::select(vec!["a", "b", "c", "ab"]).prop_map(str::to_owned)
    }

    proptest! {
        #[test]
        fn matches_alignment_oracle(tokens in prop::collection::vec(word(), 0..30),
                                    phrase in prop::collection::vec(word(), 1..4)) {
            let joined = phrase.join(" ");
            prop_assert_eq!(count_occurrences(&tokens, &joined), brute_force(&tokens, &phrase));
        }

        #[test]
        fn contains_agrees_with_count(tokens in prop::collection::vec(word(), 0..30),
                                      phrase in prop::collection::vec(word(), 1..4)) {
            let joined = phrase.join(" ");
            prop_assert_eq!(contains_phrase(&tokens, &joined), count_occurrences(&tokens, &joined) > 0);
        }

        #[test]
        fn count_times_length_bounded(tokens in prop::collection::vec(word(), 0..30),
                                      phrase in prop::collection::vec(word(), 1..4)) {
            let joined = phrase.join(" ");
            prop_assert!(count_occurrences(&tokens, &joined) * phrase.len() <= tokens.len());
        }

        #[test]
        fn normalization_is_idempotent(raw in "[a-zA-Z0-9ÀÉßøπΣ<>/ ,.!-]{0,60}") {
            let once = normalize_text(&raw);
            let twice = normalize_text(&once.join(" "));
            prop_assert_eq!(&once, &twice);
        }
    }
}
