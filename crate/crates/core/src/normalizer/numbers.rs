//! Spelled-out and numeric quantities.

/// Regex alternation matching the quantities [`parse_number`] understands.
pub(crate) const NUMBER_PATTERN: &str = concat!(
    r"\d{1,3}(?:,\d{3})+|\d+(?:\.\d+)?",
    r"|(?:twenty|thirty|forty|fifty|sixty|seventy|eighty|ninety)",
    r"(?:[- ](?:one|two|three|four|five|six|seven|eight|nine))?",
    r"|one|two|three|four|five|six|seven|eight|nine|ten|eleven|twelve|thirteen",
    r"|fourteen|fifteen|sixteen|seventeen|eighteen|nineteen",
    r"|(?:a |one )?hundred|(?:a )?dozen|a couple of|a|an"
);

/// Unspecified amounts, rendered as `X` in values.
pub(crate) const FUZZY_PATTERN: &str =
    r"several|a few|few|some|many|a couple|a number of|numerous|a handful of";

const UNITS: [&str; 10] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
];
const TEENS: [&str; 10] = [
    "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
    "eighteen", "nineteen",
];
const TENS: [&str; 8] = [
    "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];

/// Parses a quantity such as `3`, `3.5`, `1,000`, `three`, `twenty-five`,
/// `a` or `a dozen`.
pub fn parse_number(text: &str) -> Option<f64> {
    let text = text.trim();
    if text.starts_with(|c: char| c.is_ascii_digit()) {
        return text.replace(',', "").parse().ok();
    }
    match text {
        "a" | "an" => return Some(1.0),
        "a couple of" => return Some(2.0),
        "dozen" | "a dozen" => return Some(12.0),
        "hundred" | "a hundred" | "one hundred" => return Some(100.0),
        _ => {}
    }
    if let Some(i) = UNITS.iter().position(|w| *w == text) {
        return Some(i as f64);
    }
    if let Some(i) = TEENS.iter().position(|w| *w == text) {
        return Some((10 + i) as f64);
    }
    let mut parts = text.splitn(2, ['-', ' ']);
    let first = parts.next()?;
    let tens = TENS.iter().position(|w| *w == first)?;
    let base = 20 + 10 * tens;
    match parts.next() {
        None => Some(base as f64),
        Some(unit) => {
            let u = UNITS.iter().position(|w| *w == unit).filter(|&u| u > 0)?;
            Some((base + u) as f64)
        }
    }
}

/// Ordinals (`third`, `3rd`, `twenty-first`) up to 99.
pub fn parse_ordinal(text: &str) -> Option<u32> {
    let text = text.trim();
    if let Some(digits) = text
        .strip_suffix("st")
        .or_else(|| text.strip_suffix("nd"))
        .or_else(|| text.strip_suffix("rd"))
        .or_else(|| text.strip_suffix("th"))
    {
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            return digits.parse().ok();
        }
    }
    const SIMPLE: [&str; 19] = [
        "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth",
        "tenth", "eleventh", "twelfth", "thirteenth", "fourteenth", "fifteenth", "sixteenth",
        "seventeenth", "eighteenth", "nineteenth",
    ];
    const TENS_ORD: [&str; 8] = [
        "twentieth", "thirtieth", "fortieth", "fiftieth", "sixtieth", "seventieth", "eightieth",
        "ninetieth",
    ];
    if let Some(i) = SIMPLE.iter().position(|w| *w == text) {
        return Some(i as u32 + 1);
    }
    if let Some(i) = TENS_ORD.iter().position(|w| *w == text) {
        return Some(20 + 10 * i as u32);
    }
    let (tens, unit) = text.split_once(['-', ' '])?;
    let t = TENS.iter().position(|w| *w == tens)? as u32;
    let u = SIMPLE[..9].iter().position(|w| *w == unit)? as u32 + 1;
    Some(20 + 10 * t + u)
}

pub(crate) const ORDINAL_PATTERN: &str = concat!(
    r"\d{1,2}(?:st|nd|rd|th)",
    r"|(?:twenty|thirty)[- ](?:first|second|third|fourth|fifth|sixth|seventh|eighth|ninth)",
    r"|first|second|third|fourth|fifth|sixth|seventh|eighth|ninth|tenth|eleventh|twelfth",
    r"|thirteenth|fourteenth|fifteenth|sixteenth|seventeenth|eighteenth|nineteenth",
    r"|twentieth|thirtieth"
);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(parse_number("three"), Some(3.0));
        assert_eq!(parse_number("twenty-five"), Some(25.0));
        assert_eq!(parse_number("twenty five"), Some(25.0));
        assert_eq!(parse_number("forty"), Some(40.0));
        assert_eq!(parse_number("a"), Some(1.0));
        assert_eq!(parse_number("1,000"), Some(1000.0));
        assert_eq!(parse_number("3.5"), Some(3.5));
        assert_eq!(parse_number("twenty-zero"), None);
        assert_eq!(parse_number("several"), None);
    }

    #[test]
    fn ordinals() {
        assert_eq!(parse_ordinal("third"), Some(3));
        assert_eq!(parse_ordinal("21st"), Some(21));
        assert_eq!(parse_ordinal("twenty-first"), Some(21));
        assert_eq!(parse_ordinal("twentieth"), Some(20));
        assert_eq!(parse_ordinal("th"), None);
    }

    #[test]
    fn pattern_covers_parser() {
        let re = regex::Regex::new(&format!("^(?:{NUMBER_PATTERN})$")).unwrap();
        for w in ["3", "1,000", "2.5", "seventy-two", "nineteen", "a dozen", "an", "a couple of"] {
            assert!(re.is_match(w), "{w}");
            assert!(parse_number(w).is_some(), "{w}");
        }
        let re = regex::Regex::new(&format!("^(?:{ORDINAL_PATTERN})$")).unwrap();
        for w in ["1st", "twenty-third", "twentieth", "twelfth"] {
            assert!(re.is_match(w), "{w}");
            assert!(parse_ordinal(w).is_some(), "{w}");
        }
    }
}
