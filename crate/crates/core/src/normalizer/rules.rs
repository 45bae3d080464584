//! Normalization rules: token-level patterns plus named value functions.
//!
//! A rule pattern is a regular expression over the expression's lower-cased
//! tokens joined by single spaces. Lexical classes are written as `{name}`
//! atoms and expand to alternations (see [`atom`]); the whole pattern must
//! match the whole expression. Captures named `n`, `unit`, `month`, `day`,
//! `year`, `wd`, `pod`, ... feed the rule's value function.

use std::fmt::Write as _;
use std::sync::OnceLock;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime};
use regex::{Captures, Regex};

use super::calendar::{
    add_period, fmt_day, fmt_month, fmt_week, fmt_year, parse_month, parse_weekday, quarter_of,
    resolve_weekday, CalendarUnit, WeekdayDirection,
};
use super::numbers::{parse_number, parse_ordinal, FUZZY_PATTERN, NUMBER_PATTERN, ORDINAL_PATTERN};
use super::{Anchor, NormalizerOptions, TimexType, WeekdayHint};
use crate::error::{Error, Result};

/// Expansion of a `{name}` pattern atom.
pub fn atom(name: &str) -> Option<&'static str> {
    Some(match name {
        "num" => NUMBER_PATTERN,
        "fuzzy" => FUZZY_PATTERN,
        "ordinal" => ORDINAL_PATTERN,
        "unit" => concat!(
            r"seconds?|minutes?|hours?|days?|weeks?|fortnights?|months?|years?",
            r"|decades?|century|centuries"
        ),
        "cal_unit" => r"days?|weeks?|fortnights?|months?|years?|decades?|century|centuries",
        "clock_unit" => r"seconds?|minutes?|hours?",
        "month" => concat!(
            r"january|february|march|april|may|june|july|august|september|october|november",
            r"|december|(?:jan|feb|mar|apr|jun|jul|aug|sept|sep|oct|nov|dec)(?: \.)?"
        ),
        "weekday" => concat!(
            r"monday|tuesday|wednesday|thursday|friday|saturday|sunday",
            r"|(?:mon|tues|tue|wed|thurs|thur|thu|fri|sat|sun)(?: \.)?"
        ),
        "season" => r"spring|summer|autumn|fall|winter",
        "pod" => r"morning|afternoon|evening|night",
        "day" => concat!(
            r"\d{1,2}(?:st|nd|rd|th)?|(?:twenty|thirty)[- ](?:first|second|third|fourth|fifth",
            r"|sixth|seventh|eighth|ninth)|first|second|third|fourth|fifth|sixth|seventh|eighth",
            r"|ninth|tenth|eleventh|twelfth|thirteenth|fourteenth|fifteenth|sixteenth",
            r"|seventeenth|eighteenth|nineteenth|twentieth|thirtieth"
        ),
        "year" => r"[12]\d{3}",
        "ampm" => r"a\.m\.|p\.m\.|am|pm",
        "before" => r"ago|earlier|before|previously|back",
        "after" => r"later|after|ahead|from now|hence|on",
        "prev" => r"last|previous|the previous|the last|past|the past",
        "this" => r"this|current|the current|the present",
        "next" => r"next|the next|coming|the coming|following|the following|upcoming",
        _ => return None,
    })
}

fn expand_atoms(id: &str, pattern: &str) -> Result<String> {
    static ATOM: OnceLock<Regex> = OnceLock::new();
    let re = ATOM.get_or_init(|| Regex::new(r"\{([a-z_]+)\}").unwrap());
    let mut out = String::new();
    let mut last = 0;
    for caps in re.captures_iter(pattern) {
        let whole = caps.get(0).unwrap();
        let body = atom(&caps[1]).ok_or_else(|| Error::Rule {
            id: id.to_string(),
            message: format!("unknown atom `{{{}}}`", &caps[1]),
        })?;
        out.push_str(&pattern[last..whole.start()]);
        let _ = write!(out, "(?:{body})");
        last = whole.end();
    }
    out.push_str(&pattern[last..]);
    Ok(out)
}

/// Value-construction functions available to rules.
#[derive(Clone, Debug, PartialEq)]
pub enum ValueFn {
    /// A fixed value, e.g. `P1D` or `PRESENT_REF`.
    Literal(String),
    /// Anchor date shifted by N days.
    DeicticDay(i64),
    /// Anchor date shifted by N days, with a part-of-day suffix.
    DayPod(i64, String),
    /// `today|yesterday|tomorrow|this|last` + part of day.
    DeicticPod,
    /// Four-digit year, month number, day number.
    DateYmd,
    /// `a/b/year` with configurable month/day order.
    NumericDate,
    /// Month name + day (+ year, else the anchor's).
    DateMdy,
    /// Month name (+ year or relative word).
    MonthYear,
    Year,
    Decade,
    /// Two-digit decade resolved against the anchor century.
    DecadeShort,
    DecadeWord,
    Century,
    Quarter,
    QuarterRelative,
    /// `last|this|next` + calendar unit.
    RelativeRef,
    /// N calendar units before/after the anchor; the argument sets the
    /// direction when the pattern has no `dir` capture.
    RelativeUnits(Option<i64>),
    /// N hours/minutes before/after the anchor time.
    RelativeClock,
    /// Unspecified amount before/after: past or future reference.
    FuzzyRef,
    Weekday,
    WeekdayPod,
    Clock,
    ClockNamed(String),
    Duration,
    DurationFuzzy,
    /// Every (N) unit; the argument is the default N.
    SetEvery(Option<u32>),
    Season,
}

impl ValueFn {
    /// Parses `name[:args]`.
    pub fn parse(spec: &str) -> Result<ValueFn> {
        let (name, args) = match spec.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (spec, None),
        };
        let bad = |m: &str| Error::Config(format!("value function `{spec}`: {m}"));
        let int_arg = || -> Result<i64> {
            args.ok_or_else(|| bad("missing argument"))?
                .parse()
                .map_err(|_| bad("argument must be an integer"))
        };
        let no_args = |f: ValueFn| -> Result<ValueFn> {
            match args {
                None => Ok(f),
                Some(_) => Err(bad("takes no argument")),
            }
        };
        match name {
            "literal" => Ok(ValueFn::Literal(
                args.filter(|a| !a.is_empty())
                    .ok_or_else(|| bad("missing value"))?
                    .to_string(),
            )),
            "deictic_day" => Ok(ValueFn::DeicticDay(int_arg()?)),
            "day_pod" => {
                let (n, pod) = args
                    .and_then(|a| a.split_once(':'))
                    .ok_or_else(|| bad("expected N:POD"))?;
                if !matches!(pod, "MO" | "AF" | "EV" | "NI") {
                    return Err(bad("part of day must be MO, AF, EV or NI"));
                }
                Ok(ValueFn::DayPod(
                    n.parse().map_err(|_| bad("N must be an integer"))?,
                    pod.to_string(),
                ))
            }
            "relative_units" => Ok(ValueFn::RelativeUnits(match args {
                None => None,
                Some(_) => Some(int_arg()?),
            })),
            "set_every" => Ok(ValueFn::SetEvery(match args {
                None => None,
                Some(_) => Some(int_arg()? as u32),
            })),
            "clock_named" => {
                let t = args.ok_or_else(|| bad("expected HH:MM"))?;
                NaiveTime::parse_from_str(t, "%H:%M").map_err(|_| bad("expected HH:MM"))?;
                Ok(ValueFn::ClockNamed(t.to_string()))
            }
            "deictic_pod" => no_args(ValueFn::DeicticPod),
            "date_ymd" => no_args(ValueFn::DateYmd),
            "numeric_date" => no_args(ValueFn::NumericDate),
            "date_mdy" => no_args(ValueFn::DateMdy),
            "month_year" => no_args(ValueFn::MonthYear),
            "year" => no_args(ValueFn::Year),
            "decade" => no_args(ValueFn::Decade),
            "decade_short" => no_args(ValueFn::DecadeShort),
            "decade_word" => no_args(ValueFn::DecadeWord),
            "century" => no_args(ValueFn::Century),
            "quarter" => no_args(ValueFn::Quarter),
            "quarter_relative" => no_args(ValueFn::QuarterRelative),
            "relative_ref" => no_args(ValueFn::RelativeRef),
            "relative_clock" => no_args(ValueFn::RelativeClock),
            "fuzzy_ref" => no_args(ValueFn::FuzzyRef),
            "weekday" => no_args(ValueFn::Weekday),
            "weekday_pod" => no_args(ValueFn::WeekdayPod),
            "clock" => no_args(ValueFn::Clock),
            "duration" => no_args(ValueFn::Duration),
            "duration_fuzzy" => no_args(ValueFn::DurationFuzzy),
            "season" => no_args(ValueFn::Season),
            _ => Err(bad("unknown function")),
        }
    }

    fn spec(&self) -> String {
        match self {
            ValueFn::Literal(v) => format!("literal:{v}"),
            ValueFn::DeicticDay(n) => format!("deictic_day:{n}"),
            ValueFn::DayPod(n, p) => format!("day_pod:{n}:{p}"),
            ValueFn::DeicticPod => "deictic_pod".into(),
            ValueFn::DateYmd => "date_ymd".into(),
            ValueFn::NumericDate => "numeric_date".into(),
            ValueFn::DateMdy => "date_mdy".into(),
            ValueFn::MonthYear => "month_year".into(),
            ValueFn::Year => "year".into(),
            ValueFn::Decade => "decade".into(),
            ValueFn::DecadeShort => "decade_short".into(),
            ValueFn::DecadeWord => "decade_word".into(),
            ValueFn::Century => "century".into(),
            ValueFn::Quarter => "quarter".into(),
            ValueFn::QuarterRelative => "quarter_relative".into(),
            ValueFn::RelativeRef => "relative_ref".into(),
            ValueFn::RelativeUnits(None) => "relative_units".into(),
            ValueFn::RelativeUnits(Some(d)) => format!("relative_units:{d}"),
            ValueFn::RelativeClock => "relative_clock".into(),
            ValueFn::FuzzyRef => "fuzzy_ref".into(),
            ValueFn::Weekday => "weekday".into(),
            ValueFn::WeekdayPod => "weekday_pod".into(),
            ValueFn::Clock => "clock".into(),
            ValueFn::ClockNamed(t) => format!("clock_named:{t}"),
            ValueFn::Duration => "duration".into(),
            ValueFn::DurationFuzzy => "duration_fuzzy".into(),
            ValueFn::SetEvery(None) => "set_every".into(),
            ValueFn::SetEvery(Some(n)) => format!("set_every:{n}"),
            ValueFn::Season => "season".into(),
        }
    }

    pub(crate) fn apply(&self, caps: &Captures, anchor: &Anchor, opts: &NormalizerOptions) -> Option<String> {
        let cap = |name: &str| caps.name(name).map(|m| m.as_str());
        let today = anchor.date;
        match self {
            ValueFn::Literal(v) => Some(v.clone()),
            ValueFn::DeicticDay(n) => add_period(today, *n, CalendarUnit::Day).map(fmt_day),
            ValueFn::DayPod(n, pod) => {
                Some(format!("{}T{pod}", fmt_day(add_period(today, *n, CalendarUnit::Day)?)))
            }
            ValueFn::DeicticPod => {
                let offset = match cap("deictic") {
                    None | Some("today" | "this") => 0,
                    Some("yesterday" | "last") => -1,
                    Some("tomorrow") => 1,
                    Some(_) => return None,
                };
                let date = add_period(today, offset, CalendarUnit::Day)?;
                Some(format!("{}T{}", fmt_day(date), pod_code(cap("pod")?)?))
            }
            ValueFn::DateYmd => {
                let date = NaiveDate::from_ymd_opt(
                    cap("year")?.parse().ok()?,
                    cap("month")?.parse().ok()?,
                    cap("day")?.parse().ok()?,
                )?;
                Some(fmt_day(date))
            }
            ValueFn::NumericDate => {
                let (a, b): (u32, u32) = (cap("a")?.parse().ok()?, cap("b")?.parse().ok()?);
                let (month, day) = if opts.day_first { (b, a) } else { (a, b) };
                let year = expand_year(cap("year")?, today.year())?;
                NaiveDate::from_ymd_opt(year, month, day).map(fmt_day)
            }
            ValueFn::DateMdy => {
                let month = parse_month(cap("month")?)?;
                let day = parse_day(cap("day")?)?;
                let year = match cap("year") {
                    Some(y) => y.parse().ok()?,
                    None => today.year(),
                };
                NaiveDate::from_ymd_opt(year, month, day).map(fmt_day)
            }
            ValueFn::MonthYear => {
                let month = parse_month(cap("month")?)?;
                let year = match (cap("year"), cap("rel").map(relative_word)) {
                    (Some(y), None) => y.parse().ok()?,
                    (None, None) | (None, Some(Some(0))) => today.year(),
                    (None, Some(Some(-1))) if month < today.month() => today.year(),
                    (None, Some(Some(-1))) => today.year() - 1,
                    (None, Some(Some(1))) if month > today.month() => today.year(),
                    (None, Some(Some(1))) => today.year() + 1,
                    _ => return None,
                };
                Some(format!("{}-{month:02}", fmt_year(year)))
            }
            ValueFn::Year => {
                let year: i32 = cap("year")?.parse().ok()?;
                Some(fmt_year(year))
            }
            ValueFn::Decade => {
                let d = cap("decade")?;
                (d.len() == 3).then(|| d.to_string())
            }
            ValueFn::DecadeShort => {
                let digit: i32 = cap("dd")?.parse().ok()?;
                Some(resolve_short_decade(digit, today.year()))
            }
            ValueFn::DecadeWord => {
                let digit = match cap("dw")? {
                    "twenties" => 2,
                    "thirties" => 3,
                    "forties" => 4,
                    "fifties" => 5,
                    "sixties" => 6,
                    "seventies" => 7,
                    "eighties" => 8,
                    "nineties" => 9,
                    _ => return None,
                };
                Some(resolve_short_decade(digit, today.year()))
            }
            ValueFn::Century => {
                let n = parse_ordinal(cap("ord")?)?;
                (1..=100).contains(&n).then(|| format!("{:02}", n - 1))
            }
            ValueFn::Quarter => {
                let q = match cap("q")? {
                    "q1" => 1,
                    "q2" => 2,
                    "q3" => 3,
                    "q4" => 4,
                    other => parse_ordinal(other)?,
                };
                if !(1..=4).contains(&q) {
                    return None;
                }
                let year = match cap("year") {
                    Some(y) => y.parse().ok()?,
                    None => today.year(),
                };
                Some(format!("{}-Q{q}", fmt_year(year)))
            }
            ValueFn::QuarterRelative => {
                let shift = relative_word(cap("rel")?)?;
                let index = today.year() * 4 + quarter_of(today.month()) as i32 - 1 + shift as i32;
                Some(format!("{}-Q{}", fmt_year(index.div_euclid(4)), index.rem_euclid(4) + 1))
            }
            ValueFn::RelativeRef => {
                let shift = relative_word(cap("rel")?)?;
                shift_calendar(today, shift, parse_unit(cap("unit")?)?)
            }
            ValueFn::RelativeUnits(default_dir) => {
                let n = whole_number(cap("n")?)?;
                let dir = match cap("dir") {
                    Some(word) => direction_word(word)?,
                    None => (*default_dir)?,
                };
                shift_calendar(today, dir * n, parse_unit(cap("unit")?)?)
            }
            ValueFn::RelativeClock => {
                let n = whole_number(cap("n")?)?;
                let dir = direction_word(cap("dir")?)?;
                let delta = match parse_unit(cap("unit")?)? {
                    Unit::Hour => Duration::try_hours(dir * n)?,
                    Unit::Minute => Duration::try_minutes(dir * n)?,
                    _ => return None,
                };
                let at = NaiveDateTime::new(today, anchor.time?).checked_add_signed(delta)?;
                Some(at.format("%Y-%m-%dT%H:%M").to_string())
            }
            ValueFn::FuzzyRef => match direction_word(cap("dir")?)? {
                d if d < 0 => Some("PAST_REF".into()),
                _ => Some("FUTURE_REF".into()),
            },
            ValueFn::Weekday => weekday_date(cap("wd")?, cap("rel"), today, opts).map(fmt_day),
            ValueFn::WeekdayPod => {
                let date = weekday_date(cap("wd")?, cap("rel"), today, opts)?;
                Some(format!("{}T{}", fmt_day(date), pod_code(cap("pod")?)?))
            }
            ValueFn::Clock => {
                let mut hour: u32 = cap("h")?.parse().ok()?;
                let minute: u32 = cap("m").map_or(Some(0), |m| m.parse().ok())?;
                if let Some(ampm) = cap("ampm") {
                    if !(1..=12).contains(&hour) {
                        return None;
                    }
                    let pm = ampm.starts_with('p');
                    hour = match (pm, hour) {
                        (false, 12) => 0,
                        (true, 12) => 12,
                        (true, h) => h + 12,
                        (false, h) => h,
                    };
                }
                (hour <= 24 && minute <= 59)
                    .then(|| format!("{}T{hour:02}:{minute:02}", fmt_day(today)))
            }
            ValueFn::ClockNamed(t) => Some(format!("{}T{t}", fmt_day(today))),
            ValueFn::Duration => {
                let n = parse_number(cap("n")?)?;
                duration_value(n, parse_unit(cap("unit")?)?)
            }
            ValueFn::DurationFuzzy => Some(fuzzy_duration(parse_unit(cap("unit")?)?)),
            ValueFn::SetEvery(default_n) => {
                let n = match cap("n") {
                    Some(n) => parse_number(n)?,
                    None => f64::from(default_n.unwrap_or(1)),
                };
                duration_value(n, parse_unit(cap("unit")?)?)
            }
            ValueFn::Season => {
                let (code, start) = match cap("season")? {
                    "spring" => ("SP", 3),
                    "summer" => ("SU", 6),
                    "autumn" | "fall" => ("FA", 9),
                    "winter" => ("WI", 12),
                    _ => return None,
                };
                let year = match (cap("year"), cap("rel").map(relative_word)) {
                    (Some(y), None) => y.parse().ok()?,
                    (None, None) | (None, Some(Some(0))) => today.year(),
                    (None, Some(Some(-1))) => {
                        // most recent season instance that has ended
                        let now = today.year() * 12 + today.month0() as i32;
                        let mut y = today.year();
                        while y * 12 + start - 1 + 2 >= now {
                            y -= 1;
                        }
                        y
                    }
                    (None, Some(Some(1))) => {
                        let now = today.year() * 12 + today.month0() as i32;
                        let mut y = today.year() - 1;
                        while y * 12 + start - 1 <= now {
                            y += 1;
                        }
                        y
                    }
                    _ => return None,
                };
                Some(format!("{}-{code}", fmt_year(year)))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Unit {
    Second,
    Minute,
    Hour,
    Day,
    Week,
    Fortnight,
    Month,
    Year,
    Decade,
    Century,
}

fn parse_unit(text: &str) -> Option<Unit> {
    let singular = if text == "centuries" {
        "century"
    } else {
        text.strip_suffix('s').unwrap_or(text)
    };
    Some(match singular {
        "second" => Unit::Second,
        "minute" => Unit::Minute,
        "hour" => Unit::Hour,
        "day" => Unit::Day,
        "week" => Unit::Week,
        "fortnight" => Unit::Fortnight,
        "month" => Unit::Month,
        "year" => Unit::Year,
        "decade" => Unit::Decade,
        "century" => Unit::Century,
        _ => return None,
    })
}

fn designator(unit: Unit) -> (&'static str, &'static str) {
    match unit {
        Unit::Second => ("PT", "S"),
        Unit::Minute => ("PT", "M"),
        Unit::Hour => ("PT", "H"),
        Unit::Day => ("P", "D"),
        Unit::Week | Unit::Fortnight => ("P", "W"),
        Unit::Month => ("P", "M"),
        Unit::Year => ("P", "Y"),
        Unit::Decade => ("P", "DE"),
        Unit::Century => ("P", "CE"),
    }
}

/// The next finer unit and how many of it make one of `unit`.
fn finer(unit: Unit) -> Option<(Unit, f64)> {
    Some(match unit {
        Unit::Century => (Unit::Year, 100.0),
        Unit::Decade => (Unit::Year, 10.0),
        Unit::Year => (Unit::Month, 12.0),
        Unit::Fortnight => (Unit::Day, 14.0),
        Unit::Week => (Unit::Day, 7.0),
        Unit::Day => (Unit::Hour, 24.0),
        Unit::Hour => (Unit::Minute, 60.0),
        Unit::Minute => (Unit::Second, 60.0),
        Unit::Month | Unit::Second => return None,
    })
}

fn duration_value(mut n: f64, mut unit: Unit) -> Option<String> {
    if unit == Unit::Fortnight {
        n *= 2.0;
        unit = Unit::Week;
    }
    // fractional amounts move to a finer unit until whole
    while (n - n.round()).abs() > 1e-9 {
        let (next, factor) = finer(unit)?;
        n *= factor;
        unit = next;
    }
    if !(0.0..1e9).contains(&n) {
        return None;
    }
    let (prefix, suffix) = designator(unit);
    Some(format!("{prefix}{}{suffix}", n.round() as u64))
}

fn fuzzy_duration(unit: Unit) -> String {
    let (prefix, suffix) = designator(unit);
    format!("{prefix}X{suffix}")
}

fn whole_number(text: &str) -> Option<i64> {
    let n = parse_number(text)?;
    (n.fract() == 0.0 && n < 1e6).then_some(n as i64)
}

fn relative_word(word: &str) -> Option<i64> {
    let word = word.strip_prefix("the ").unwrap_or(word);
    Some(match word {
        "last" | "previous" | "past" => -1,
        "this" | "current" | "present" => 0,
        "next" | "coming" | "following" | "upcoming" => 1,
        _ => return None,
    })
}

fn direction_word(word: &str) -> Option<i64> {
    Some(match word {
        "ago" | "earlier" | "before" | "previously" | "back" => -1,
        "later" | "after" | "ahead" | "from now" | "hence" | "on" | "in" => 1,
        _ => return None,
    })
}

fn pod_code(pod: &str) -> Option<&'static str> {
    Some(match pod {
        "morning" => "MO",
        "afternoon" => "AF",
        "evening" => "EV",
        "night" => "NI",
        _ => return None,
    })
}

fn parse_day(text: &str) -> Option<u32> {
    text.parse().ok().or_else(|| parse_ordinal(text))
}

fn expand_year(text: &str, anchor_year: i32) -> Option<i32> {
    let y: i32 = text.parse().ok()?;
    match text.len() {
        4 => Some(y),
        2 => {
            let candidate = 2000 + y;
            Some(if candidate <= anchor_year + 10 { candidate } else { 1900 + y })
        }
        _ => None,
    }
}

fn resolve_short_decade(digit: i32, anchor_year: i32) -> String {
    let century = anchor_year.div_euclid(100);
    let mut decade = century * 10 + digit;
    if decade * 10 > anchor_year {
        decade -= 10;
    }
    format!("{decade:03}")
}

fn shift_calendar(today: NaiveDate, n: i64, unit: Unit) -> Option<String> {
    match unit {
        Unit::Day => add_period(today, n, CalendarUnit::Day).map(fmt_day),
        Unit::Week => add_period(today, n, CalendarUnit::Week).map(fmt_week),
        Unit::Fortnight => add_period(today, 2 * n, CalendarUnit::Week).map(fmt_week),
        Unit::Month => add_period(today, n, CalendarUnit::Month).map(fmt_month),
        Unit::Year => year_string(i64::from(today.year()) + n),
        Unit::Decade => {
            let y = i64::from(today.year()) + 10 * n;
            (0..10000).contains(&y).then(|| format!("{:03}", y / 10))
        }
        Unit::Century => {
            let y = i64::from(today.year()) + 100 * n;
            (0..10000).contains(&y).then(|| format!("{:02}", y / 100))
        }
        Unit::Hour | Unit::Minute | Unit::Second => None,
    }
}

fn year_string(y: i64) -> Option<String> {
    (0..10000).contains(&y).then(|| format!("{y:04}"))
}

fn weekday_date(
    name: &str,
    rel: Option<&str>,
    today: NaiveDate,
    opts: &NormalizerOptions,
) -> Option<NaiveDate> {
    let day = parse_weekday(name)?;
    let direction = match rel.map(relative_word) {
        None => match opts.weekday_hint {
            WeekdayHint::Past => WeekdayDirection::NearestPast,
            WeekdayHint::Future => WeekdayDirection::NearestFuture,
        },
        Some(Some(-1)) => WeekdayDirection::Last,
        Some(Some(0)) => WeekdayDirection::ThisWeek,
        Some(Some(1)) => WeekdayDirection::Next,
        Some(_) => return None,
    };
    Some(resolve_weekday(day, direction, today))
}

/// A normalization rule.
#[derive(Clone, Debug)]
pub struct NormRule {
    pub id: String,
    /// Lower values are tried first; ties are ordered by id.
    pub priority: i32,
    pub pattern: String,
    pub timex_type: TimexType,
    pub value_fn: ValueFn,
    compiled: Regex,
}

impl NormRule {
    pub fn new(
        id: impl Into<String>,
        priority: i32,
        pattern: impl Into<String>,
        timex_type: TimexType,
        value_fn: ValueFn,
    ) -> Result<NormRule> {
        let id = id.into();
        let pattern = pattern.into();
        let expanded = expand_atoms(&id, &pattern)?;
        let compiled = Regex::new(&format!("^(?:{expanded})$")).map_err(|e| Error::Rule {
            id: id.clone(),
            message: e.to_string(),
        })?;
        Ok(NormRule {
            id,
            priority,
            pattern,
            timex_type,
            value_fn,
            compiled,
        })
    }

    pub(crate) fn captures<'t>(&self, text: &'t str) -> Option<Captures<'t>> {
        self.compiled.captures(text)
    }

    /// The rule as one line of the rule file format.
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.id,
            self.priority,
            self.pattern,
            self.timex_type,
            self.value_fn.spec()
        )
    }
}

/// Parses a rule file: `id\tpriority\tpattern\ttype\tvalue_fn[:args]` per
/// line, `#` comments and blank lines ignored.
pub fn parse_rules(text: &str) -> Result<Vec<NormRule>> {
    let mut rules = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                line_no,
                format!("expected 5 tab-separated fields, found {}", fields.len()),
            ));
        }
        let priority = fields[1]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("invalid priority `{}`", fields[1])))?;
        let ty = fields[3]
            .parse()
            .map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
        let value_fn =
            ValueFn::parse(fields[4]).map_err(|e| Error::parse(line_no, e.to_string()))?;
        rules.push(
            NormRule::new(fields[0], priority, fields[2], ty, value_fn)
                .map_err(|e| Error::parse(line_no, e.to_string()))?,
        );
    }
    Ok(rules)
}

/// Built-in rule inventory in file format.
pub const BUILTIN_RULES: &str = include_str!("builtin_rules.tsv");

pub fn builtin_rules() -> Vec<NormRule> {
    parse_rules(BUILTIN_RULES).expect("built-in rules are valid")
}
