use std::sync::OnceLock;

use regex::Regex;

use super::TimexType;

struct Grammar {
    date: Regex,
    time_suffix: Regex,
    period: Regex,
}

fn grammar() -> &'static Grammar {
    static G: OnceLock<Grammar> = OnceLock::new();
    G.get_or_init(|| Grammar {
        date: Regex::new(concat!(
            r"^(?:",
            r"(?P<y>\d{4})(?:-(?P<m>\d{2})(?:-(?P<d>\d{2}))?)?",
            r"|(?P<wy>\d{4})-W(?P<w>\d{2})",
            r"|\d{4}-Q[1-4]",
            r"|\d{4}-(?:SP|SU|FA|WI)",
            r"|\d{3}|\d{2}",
            r"|PAST_REF|PRESENT_REF|FUTURE_REF",
            r")$"
        ))
        .unwrap(),
        time_suffix: Regex::new(r"^(?:(?P<h>\d{2})(?::(?P<min>\d{2}))?|MO|AF|EV|NI)$").unwrap(),
        period: Regex::new(concat!(
            r"^P(?:(?:\d+|X)(?:Y|M|W|D|DE|CE))*",
            r"(?:T(?:(?:\d+|X)(?:H|M|S))+)?$"
        ))
        .unwrap(),
    })
}

/// Checks a TIMEX3 value against the grammar for its type.
///
/// * `DATE`: `YYYY[-MM[-DD]]`, `YYYY-Wnn`, `YYYY-Qn`, `YYYY-SP|SU|FA|WI`,
///   `YYY` (decade), `YY` (century), `PAST_REF`, `PRESENT_REF`, `FUTURE_REF`.
/// * `TIME`: a calendar date, `T`, then `hh[:mm]` or `MO|AF|EV|NI`.
/// * `DURATION`, `SET`: an ISO 8601 period whose amounts are digits or `X`.
///
/// Calendar fields are range-checked: months 01-12, real days of month,
/// ISO weeks 01-53, hours 00-24, minutes 00-59.
pub fn validate_value(timex_type: TimexType, value: &str) -> bool {
    match timex_type {
        TimexType::Date => valid_date(value),
        TimexType::Time => match value.split_once('T') {
            Some((date, time)) => {
                is_calendar_date(date) && valid_time_suffix(time)
            }
            None => false,
        },
        TimexType::Duration | TimexType::Set => valid_period(value),
    }
}

fn valid_date(value: &str) -> bool {
    let Some(caps) = grammar().date.captures(value) else {
        return false;
    };
    if let Some(y) = caps.name("y") {
        let year: i32 = y.as_str().parse().unwrap();
        if let Some(m) = caps.name("m") {
            let month: u32 = m.as_str().parse().unwrap();
            if !(1..=12).contains(&month) {
                return false;
            }
            if let Some(d) = caps.name("d") {
                let day: u32 = d.as_str().parse().unwrap();
                return chrono::NaiveDate::from_ymd_opt(year, month, day).is_some();
            }
        }
    }
    if let Some(w) = caps.name("w") {
        let week: u32 = w.as_str().parse().unwrap();
        let year: i32 = caps["wy"].parse().unwrap();
        return week >= 1 && chrono::NaiveDate::from_isoywd_opt(year, week, chrono::Weekday::Mon).is_some();
    }
    true
}

fn is_calendar_date(value: &str) -> bool {
    value.len() == 10 && chrono::NaiveDate::parse_from_str(value, "%Y-%m-%d").is_ok()
}

fn valid_time_suffix(time: &str) -> bool {
    let Some(caps) = grammar().time_suffix.captures(time) else {
        return false;
    };
    let hour_ok = caps
        .name("h")
        .is_none_or(|h| h.as_str().parse::<u32>().unwrap() <= 24);
    let min_ok = caps
        .name("min")
        .is_none_or(|m| m.as_str().parse::<u32>().unwrap() <= 59);
    hour_ok && min_ok
}

fn valid_period(value: &str) -> bool {
    value.len() > 1 && !value.ends_with('T') && grammar().period.is_match(value)
}
