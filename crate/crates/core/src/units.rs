use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Unit in which rates and mutual information are reported.
///
/// All arithmetic happens in nats; `Bit` only rescales results on the way out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Nat,
    Bit,
}

impl LogBase {
    /// Converts a quantity measured in nats into this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Nat => nats,
            LogBase::Bit => nats / std::f64::consts::LN_2,
        }
    }

    pub fn to_nats(self, value: f64) -> f64 {
        match self {
            LogBase::Nat => value,
            LogBase::Bit => value * std::f64::consts::LN_2,
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            LogBase::Nat => "nats",
            LogBase::Bit => "bits",
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::Nat => "nat",
            LogBase::Bit => "bit",
        })
    }
}

impl FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nat" | "nats" => Ok(LogBase::Nat),
            "bit" | "bits" => Ok(LogBase::Bit),
            other => Err(format!("unknown log base `{other}` (expected nat or bit)")),
        }
    }
}
