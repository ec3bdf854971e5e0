use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Content assessment classes, lowest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QualityClass {
    Stub,
    Start,
    C,
    B,
    GA,
    FA,
}

impl QualityClass {
    pub const THRESHOLD: QualityClass = QualityClass::B;

    pub fn as_str(self) -> &'static str {
        match self {
            QualityClass::Stub => "Stub",
            QualityClass::Start => "Start",
            QualityClass::C => "C",
            QualityClass::B => "B",
            QualityClass::GA => "GA",
            QualityClass::FA => "FA",
        }
    }

    pub fn meets_threshold(self) -> bool {
        self >= Self::THRESHOLD
    }
}

impl fmt::Display for QualityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QualityClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stub" => Ok(QualityClass::Stub),
            "start" => Ok(QualityClass::Start),
            "c" => Ok(QualityClass::C),
            "b" => Ok(QualityClass::B),
            "ga" => Ok(QualityClass::GA),
            "fa" => Ok(QualityClass::FA),
            _ => Err(format!("unknown quality class `{s}`")),
        }
    }
}
