/// Currency signs that stay attached to a following number.
const CURRENCY: [char; 5] = ['$', '€', '£', '¥', '₹'];

pub(crate) fn is_punct(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

pub(crate) fn is_currency(c: char) -> bool {
    CURRENCY.contains(&c)
}

/// Token made only of punctuation/symbol characters.
pub fn is_pure_punctuation(token: &str) -> bool {
    !token.is_empty() && token.chars().all(is_punct)
}

/// Splits on Unicode whitespace, then peels leading and trailing punctuation
/// into single-character tokens. A currency sign directly before a digit and
/// a `%` directly after a digit stay attached (`€20`, `4%`).
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        let mut end = chars.len();

        while start < end && is_punct(chars[start]) {
            let keeps_number = is_currency(chars[start])
                && chars.get(start + 1).is_some_and(|c| c.is_ascii_digit());
            if keeps_number {
                break;
            }
            start += 1;
        }
        let mut trailing = Vec::new();
        while end > start && is_punct(chars[end - 1]) {
            let percent = chars[end - 1] == '%'
                && end >= 2
                && end - 2 >= start
                && chars[end - 2].is_ascii_digit();
            if percent {
                break;
            }
            end -= 1;
            trailing.push(chars[end].to_string());
        }

        tokens.extend(chars[..start].iter().map(|c| c.to_string()));
        if start < end {
            tokens.push(chars[start..end].iter().collect());
        }
        tokens.extend(trailing.into_iter().rev());
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s)
    }

    #[test]
    fn sentence_with_period() {
        assert_eq!(
            toks("Personal data shall be processed."),
            ["Personal", "data", "shall", "be", "processed", "."]
        );
    }

    #[test]
    fn empty_input() {
        assert!(toks("").is_empty());
        assert!(toks(" \n\t ").is_empty());
    }

    #[test]
    fn money_and_percent_kept_whole() {
        assert_eq!(toks("€20 million or 4%"), ["€20", "million", "or", "4%"]);
        assert_eq!(toks("($7,500)."), ["(", "$7,500", ")", "."]);
    }

    #[test]
    fn internal_punctuation_kept() {
        assert_eq!(toks("1798.100. opt-out"), ["1798.100", ".", "opt-out"]);
        assert_eq!(
            toks("\"Article 17(1)\""),
            ["\"", "Article", "17(1", ")", "\""]
        );
    }

    #[test]
    fn lone_currency_is_punctuation() {
        assert_eq!(toks("$ 5"), ["$", "5"]);
        assert!(is_pure_punctuation("$"));
        assert!(!is_pure_punctuation("€20"));
    }
}
