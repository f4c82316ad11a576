use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Calendar resolution of the feature and indicator axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resolution {
    Monthly,
    Quarterly,
}

impl Resolution {
    pub fn name(self) -> &'static str {
        match self {
            Resolution::Monthly => "monthly",
            Resolution::Quarterly => "quarterly",
        }
    }

    fn per_year(self) -> i64 {
        match self {
            Resolution::Monthly => 12,
            Resolution::Quarterly => 4,
        }
    }
}

impl FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "monthly" | "month" | "m" => Ok(Resolution::Monthly),
            "quarterly" | "quarter" | "q" => Ok(Resolution::Quarterly),
            other => Err(Error::InvalidPeriod(format!("unknown resolution `{other}`"))),
        }
    }
}

/// A calendar month or quarter. Ordered chronologically within one resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Period {
    resolution: Resolution,
    /// Months or quarters since year 0.
    ordinal: i64,
}

impl Period {
    pub fn containing(date: NaiveDate, resolution: Resolution) -> Self {
        let sub = match resolution {
            Resolution::Monthly => date.month0() as i64,
            Resolution::Quarterly => date.month0() as i64 / 3,
        };
        Period {
            resolution,
            ordinal: date.year() as i64 * resolution.per_year() + sub,
        }
    }

    pub fn new(year: i32, sub: u32, resolution: Resolution) -> Result<Self> {
        let valid = match resolution {
            Resolution::Monthly => (1..=12).contains(&sub),
            Resolution::Quarterly => (1..=4).contains(&sub),
        };
        if !valid {
            return Err(Error::InvalidPeriod(format!("{year}/{sub}")));
        }
        Ok(Period {
            resolution,
            ordinal: year as i64 * resolution.per_year() + sub as i64 - 1,
        })
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn next(&self) -> Self {
        Period {
            resolution: self.resolution,
            ordinal: self.ordinal + 1,
        }
    }

    /// First calendar day of the period.
    pub fn first_day(&self) -> NaiveDate {
        let per_year = self.resolution.per_year();
        let year = self.ordinal.div_euclid(per_year) as i32;
        let sub = self.ordinal.rem_euclid(per_year) as u32;
        let month = match self.resolution {
            Resolution::Monthly => sub + 1,
            Resolution::Quarterly => 3 * sub + 1,
        };
        NaiveDate::from_ymd_opt(year, month, 1).expect("valid calendar month")
    }

    /// Signed number of periods from `self` to `other`.
    pub fn steps_to(&self, other: &Period) -> i64 {
        other.ordinal - self.ordinal
    }

    /// Every period from `first` to `last` inclusive.
    pub fn span(first: Period, last: Period) -> Vec<Period> {
        let mut out = Vec::new();
        let mut p = first;
        while p <= last {
            out.push(p);
            p = p.next();
        }
        out
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let per_year = self.resolution.per_year();
        let year = self.ordinal.div_euclid(per_year);
        let sub = self.ordinal.rem_euclid(per_year) + 1;
        match self.resolution {
            Resolution::Monthly => write!(f, "{year:04}-{sub:02}"),
            Resolution::Quarterly => write!(f, "{year:04}-Q{sub}"),
        }
    }
}

impl FromStr for Period {
    type Err = Error;

    /// Parses `YYYY-MM` or `YYYY-Qn`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPeriod(s.to_owned());
        let (year, rest) = s.trim().split_once('-').ok_or_else(bad)?;
        let year: i32 = year.parse().map_err(|_| bad())?;
        if let Some(q) = rest.strip_prefix(['Q', 'q']) {
            let q: u32 = q.parse().map_err(|_| bad())?;
            Period::new(year, q, Resolution::Quarterly).map_err(|_| bad())
        } else {
            let m: u32 = rest.parse().map_err(|_| bad())?;
            Period::new(year, m, Resolution::Monthly).map_err(|_| bad())
        }
    }
}

impl TryFrom<String> for Period {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Period> for String {
    fn from(p: Period) -> String {
        p.to_string()
    }
}
