use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A calendar month, written `YYYY-MM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Option<Self> {
        (1..=12).contains(&month).then_some(YearMonth { year, month })
    }

    pub fn of(date: NaiveDate) -> Self {
        YearMonth { year: date.year(), month: date.month() }
    }

    pub fn next(self) -> Self {
        if self.month == 12 {
            YearMonth { year: self.year + 1, month: 1 }
        } else {
            YearMonth { year: self.year, month: self.month + 1 }
        }
    }

    /// Every month from `from` to `to`, both included.
    pub fn range(from: YearMonth, to: YearMonth) -> Vec<YearMonth> {
        let mut out = Vec::new();
        let mut m = from;
        while m <= to {
            out.push(m);
            m = m.next();
        }
        out
    }

    /// Parses `2022-02`, or a range `2022-02..2023-09`, or a comma list of either.
    pub fn parse_list(text: &str) -> Result<Vec<YearMonth>, String> {
        let mut out = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once("..") {
                Some((a, b)) => {
                    let (a, b): (YearMonth, YearMonth) = (a.trim().parse()?, b.trim().parse()?);
                    if a > b {
                        return Err(format!("empty month range {part}"));
                    }
                    out.extend(YearMonth::range(a, b));
                }
                None => out.push(part.parse()?),
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("expected YYYY-MM, got `{s}`");
        let (y, m) = s.split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        let year = y.parse().map_err(|_| bad())?;
        let month = m.parse().map_err(|_| bad())?;
        YearMonth::new(year, month).ok_or_else(bad)
    }
}

impl Serialize for YearMonth {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let m: YearMonth = "2022-02".parse().unwrap();
        assert_eq!((m.year, m.month), (2022, 2));
        assert_eq!(m.to_string(), "2022-02");
        assert!("2022-13".parse::<YearMonth>().is_err());
        assert!("2022-2".parse::<YearMonth>().is_err());
    }

    #[test]
    fn paper_window_has_twenty_months() {
        let months = YearMonth::parse_list("2022-02..2023-09").unwrap();
        assert_eq!(months.len(), 20);
        assert_eq!(months.last().unwrap().to_string(), "2023-09");
    }

    #[test]
    fn lists_are_sorted_and_deduplicated() {
        let months = YearMonth::parse_list("2023-01, 2022-12..2023-01").unwrap();
        assert_eq!(months.iter().map(ToString::to_string).collect::<Vec<_>>(), ["2022-12", "2023-01"]);
        assert!(YearMonth::parse_list("2023-02..2023-01").is_err());
    }
}
