use super::Token;

/// Splits text into tokens.
///
/// Whitespace separates tokens and every punctuation or symbol character is a
/// token of its own, with these exceptions kept attached to the surrounding
/// alphanumeric run:
///
/// * `-` and `/` between two alphanumerics (`Jan-2003`, `04/05/2013`);
/// * `.` and `:` between two digits (`3.5`, `10:30`);
/// * `,` used as a thousands separator (`1,000`);
/// * dotted abbreviations of two or more single letters (`U.S.`, `p.m.`).
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let end = if let Some(end) = abbreviation_end(&chars, i) {
            end
        } else if c.is_alphanumeric() {
            word_end(&chars, i)
        } else {
            i + 1
        };
        tokens.push(Token::new(chars[i..end].iter().collect::<String>(), i));
        i = end;
    }
    tokens
}

fn word_end(chars: &[char], start: usize) -> usize {
    let n = chars.len();
    let mut j = start + 1;
    while j < n {
        if chars[j].is_alphanumeric() {
            j += 1;
            continue;
        }
        if j + 1 < n && chars[j + 1].is_alphanumeric() {
            let (prev, next) = (chars[j - 1], chars[j + 1]);
            let joins = match chars[j] {
                '-' | '/' => true,
                '.' | ':' => prev.is_ascii_digit() && next.is_ascii_digit(),
                ',' => prev.is_ascii_digit() && is_thousands_group(&chars[j + 1..]),
                _ => false,
            };
            if joins {
                j += 2;
                continue;
            }
        }
        break;
    }
    j
}

fn is_thousands_group(rest: &[char]) -> bool {
    rest.len() >= 3
        && rest[..3].iter().all(char::is_ascii_digit)
        && rest.get(3).is_none_or(|c| !c.is_ascii_digit())
}

fn abbreviation_end(chars: &[char], start: usize) -> Option<usize> {
    let mut j = start;
    let mut pairs = 0;
    while j + 1 < chars.len() && chars[j].is_alphabetic() && chars[j + 1] == '.' {
        pairs += 1;
        j += 2;
    }
    let followed_by_word = chars.get(j).is_some_and(|c| c.is_alphanumeric());
    (pairs >= 2 && !followed_by_word).then_some(j)
}

/// Groups tokens into sentences: a sentence ends after `.`, `!` or `?`, or
/// where the gap before the next token contains a newline.
pub fn split_sentences(text: &str, tokens: Vec<Token>) -> Vec<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    for tok in tokens {
        if let Some(prev) = current.last() {
            let gap = chars
                .get(prev.char_end..tok.char_start)
                .unwrap_or_default();
            if gap.contains(&'\n') {
                sentences.push(std::mem::take(&mut current));
            }
        }
        let terminal = matches!(tok.surface.as_str(), "." | "!" | "?");
        current.push(tok);
        if terminal {
            sentences.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    sentences
}
