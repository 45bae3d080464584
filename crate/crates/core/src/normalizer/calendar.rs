use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Duration, Months, NaiveDate, NaiveTime, Timelike, Weekday};

use crate::error::{Error, Result};

/// Document creation time: a calendar date with an optional time of day.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Anchor {
    pub date: NaiveDate,
    pub time: Option<NaiveTime>,
}

impl Anchor {
    pub fn new(date: NaiveDate) -> Anchor {
        Anchor { date, time: None }
    }

    pub fn from_ymd(year: i32, month: u32, day: u32) -> Option<Anchor> {
        NaiveDate::from_ymd_opt(year, month, day).map(Anchor::new)
    }

    pub fn with_time(mut self, time: NaiveTime) -> Anchor {
        self.time = Some(time);
        self
    }

    pub fn weekday(&self) -> Weekday {
        self.date.weekday()
    }

    /// The same anchor moved by `days` calendar days.
    pub fn shifted(&self, days: i64) -> Option<Anchor> {
        self.date
            .checked_add_signed(Duration::days(days))
            .map(|date| Anchor { date, ..*self })
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.date.format("%Y-%m-%d"))?;
        if let Some(t) = self.time {
            if t.second() == 0 {
                write!(f, "T{}", t.format("%H:%M"))?;
            } else {
                write!(f, "T{}", t.format("%H:%M:%S"))?;
            }
        }
        Ok(())
    }
}

impl FromStr for Anchor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Anchor> {
        let bad = || Error::InvalidInput(format!("invalid ISO-8601 date `{s}`"));
        let (date, time) = match s.split_once('T') {
            Some((d, t)) => (d, Some(t)),
            None => (s, None),
        };
        if date.len() != 10 {
            return Err(bad());
        }
        let date = NaiveDate::parse_from_str(date, "%Y-%m-%d").map_err(|_| bad())?;
        let time = match time {
            None => None,
            Some(t) => Some(
                NaiveTime::parse_from_str(t, "%H:%M:%S")
                    .or_else(|_| NaiveTime::parse_from_str(t, "%H:%M"))
                    .map_err(|_| bad())?,
            ),
        };
        Ok(Anchor { date, time })
    }
}

/// Units accepted by [`add_period`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CalendarUnit {
    Day,
    Week,
    Month,
    Year,
}

/// Calendar arithmetic. Month and year steps clamp the day of month to the
/// length of the target month. `None` only outside the representable range.
pub fn add_period(date: NaiveDate, n: i64, unit: CalendarUnit) -> Option<NaiveDate> {
    match unit {
        CalendarUnit::Day => date.checked_add_signed(Duration::try_days(n)?),
        CalendarUnit::Week => date.checked_add_signed(Duration::try_weeks(n)?),
        CalendarUnit::Month => add_months(date, n),
        CalendarUnit::Year => add_months(date, n.checked_mul(12)?),
    }
}

fn add_months(date: NaiveDate, n: i64) -> Option<NaiveDate> {
    let months = Months::new(u32::try_from(n.unsigned_abs()).ok()?);
    if n >= 0 {
        date.checked_add_months(months)
    } else {
        date.checked_sub_months(months)
    }
}

/// How a weekday name is resolved against the anchor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeekdayDirection {
    /// Latest matching date strictly before the anchor.
    Last,
    /// Earliest matching date strictly after the anchor.
    Next,
    /// Latest matching date on or before the anchor.
    NearestPast,
    /// Earliest matching date on or after the anchor.
    NearestFuture,
    /// The matching day in the anchor's ISO week.
    ThisWeek,
}

pub fn resolve_weekday(day: Weekday, direction: WeekdayDirection, anchor: NaiveDate) -> NaiveDate {
    let target = i64::from(day.num_days_from_monday());
    let current = i64::from(anchor.weekday().num_days_from_monday());
    let back = (current - target).rem_euclid(7);
    let forward = (target - current).rem_euclid(7);
    let offset = match direction {
        WeekdayDirection::Last => -(if back == 0 { 7 } else { back }),
        WeekdayDirection::Next => {
            if forward == 0 {
                7
            } else {
                forward
            }
        }
        WeekdayDirection::NearestPast => -back,
        WeekdayDirection::NearestFuture => forward,
        WeekdayDirection::ThisWeek => target - current,
    };
    anchor + Duration::days(offset)
}

pub(crate) fn parse_weekday(name: &str) -> Option<Weekday> {
    let name = name.trim_end_matches([' ', '.']);
    Some(match name {
        "monday" | "mon" => Weekday::Mon,
        "tuesday" | "tue" | "tues" => Weekday::Tue,
        "wednesday" | "wed" => Weekday::Wed,
        "thursday" | "thu" | "thur" | "thurs" => Weekday::Thu,
        "friday" | "fri" => Weekday::Fri,
        "saturday" | "sat" => Weekday::Sat,
        "sunday" | "sun" => Weekday::Sun,
        _ => return None,
    })
}

pub(crate) fn parse_month(name: &str) -> Option<u32> {
    let name = name.trim_end_matches([' ', '.']);
    Some(match name {
        "january" | "jan" => 1,
        "february" | "feb" => 2,
        "march" | "mar" => 3,
        "april" | "apr" => 4,
        "may" => 5,
        "june" | "jun" => 6,
        "july" | "jul" => 7,
        "august" | "aug" => 8,
        "september" | "sep" | "sept" => 9,
        "october" | "oct" => 10,
        "november" | "nov" => 11,
        "december" | "dec" => 12,
        _ => return None,
    })
}

pub(crate) fn fmt_day(d: NaiveDate) -> String {
    d.format("%Y-%m-%d").to_string()
}

pub(crate) fn fmt_week(d: NaiveDate) -> String {
    let w = d.iso_week();
    format!("{:04}-W{:02}", w.year(), w.week())
}

pub(crate) fn fmt_month(d: NaiveDate) -> String {
    format!("{:04}-{:02}", d.year(), d.month())
}

pub(crate) fn fmt_year(year: i32) -> String {
    format!("{year:04}")
}

pub(crate) fn quarter_of(month: u32) -> u32 {
    (month - 1) / 3 + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn anchor_parse_display() {
        let a: Anchor = "2013-04-11".parse().unwrap();
        assert_eq!(a.weekday(), Weekday::Thu);
        assert_eq!(a.to_string(), "2013-04-11");
        let t: Anchor = "2013-04-11T09:05:07".parse().unwrap();
        assert_eq!(t.to_string(), "2013-04-11T09:05:07");
        assert!("2013-4-11".parse::<Anchor>().is_err());
        assert!("2013-02-30".parse::<Anchor>().is_err());
        assert!("2013-02-03T25:00".parse::<Anchor>().is_err());
    }

    #[test]
    fn period_arithmetic_examples() {
        assert_eq!(add_period(d("2013-04-11"), 0, CalendarUnit::Day), Some(d("2013-04-11")));
        assert_eq!(add_period(d("2013-01-31"), 1, CalendarUnit::Month), Some(d("2013-02-28")));
        assert_eq!(add_period(d("2012-02-29"), 1, CalendarUnit::Year), Some(d("2013-02-28")));
        assert_eq!(add_period(d("2013-03-31"), -1, CalendarUnit::Month), Some(d("2013-02-28")));
        assert_eq!(add_period(d("2013-04-11"), -2, CalendarUnit::Week), Some(d("2013-03-28")));
    }

    #[test]
    fn weekday_examples() {
        let anchor = d("2013-04-11");
        assert_eq!(resolve_weekday(Weekday::Wed, WeekdayDirection::Last, anchor), d("2013-04-10"));
        assert_eq!(resolve_weekday(Weekday::Thu, WeekdayDirection::Next, anchor), d("2013-04-18"));
        assert_eq!(resolve_weekday(Weekday::Fri, WeekdayDirection::Next, anchor), d("2013-04-12"));
        assert_eq!(resolve_weekday(Weekday::Thu, WeekdayDirection::Last, anchor), d("2013-04-04"));
        assert_eq!(resolve_weekday(Weekday::Thu, WeekdayDirection::NearestPast, anchor), anchor);
        assert_eq!(resolve_weekday(Weekday::Mon, WeekdayDirection::ThisWeek, anchor), d("2013-04-08"));
        assert_eq!(resolve_weekday(Weekday::Sun, WeekdayDirection::ThisWeek, anchor), d("2013-04-14"));
    }

    #[test]
    fn iso_week_format_uses_iso_year() {
        assert_eq!(fmt_week(d("2013-12-30")), "2014-W01");
        assert_eq!(fmt_week(d("2013-04-11")), "2013-W15");
    }
}
