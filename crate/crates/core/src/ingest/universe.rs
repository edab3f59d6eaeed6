//! Asset-universe files.
//!
//! One record per line: `symbol, full name, group, [YYYY-MM-DD:joined|left ...]`.
//! `#` starts a comment line. The index symbol is declared once with
//! `index = SYMBOL`. Fields may be quoted when a name contains a comma.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use csv::{ReaderBuilder, Trim};
use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::dates::{format_date, parse_date, Date};

pub const DEFAULT_UNIVERSE: &str = include_str!("../../data/wig20.universe");

/// Membership block an asset belongs to over the analysed period. The
/// declaration order is the display order of comparison tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Constant,
    Introduced,
    Removed,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Constant => "constant",
            Group::Introduced => "introduced",
            Group::Removed => "removed",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "constant" => Ok(Group::Constant),
            "introduced" => Ok(Group::Introduced),
            "removed" => Ok(Group::Removed),
            other => Err(format!("unknown group {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MembershipChange {
    Joined,
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MembershipEvent {
    pub date: Date,
    pub change: MembershipChange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetMeta {
    pub symbol: String,
    pub full_name: String,
    pub group: Group,
    pub membership_events: Vec<MembershipEvent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetUniverse {
    pub index_symbol: String,
    pub assets: Vec<AssetMeta>,
}

impl AssetUniverse {
    pub fn get(&self, symbol: &str) -> Option<&AssetMeta> {
        self.assets.iter().find(|a| a.symbol == symbol)
    }
}

pub fn default_universe() -> AssetUniverse {
    load_universe(DEFAULT_UNIVERSE).expect("bundled universe file is valid")
}

pub fn load_universe(text: &str) -> Result<AssetUniverse, IngestError> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());

    let mut index_symbol: Option<String> = None;
    let mut assets = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::UniverseParse {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |reason: String| IngestError::UniverseParse { line, reason };
        if record.iter().all(str::is_empty) {
            continue;
        }

        if record.len() == 1 {
            let (key, value) = record[0].split_once('=').ok_or_else(|| {
                err(format!(
                    "expected `index = SYMBOL` or an asset record, got {:?}",
                    &record[0]
                ))
            })?;
            if key.trim() != "index" {
                return Err(err(format!("unknown directive {:?}", key.trim())));
            }
            if index_symbol.is_some() {
                return Err(err("index declared twice".into()));
            }
            let value = value.trim();
            if value.is_empty() {
                return Err(err("empty index symbol".into()));
            }
            index_symbol = Some(value.to_string());
            continue;
        }

        if record.len() < 3 {
            return Err(err("asset record needs symbol, full name and group".into()));
        }
        let symbol = record[0].to_string();
        if symbol.is_empty() {
            return Err(err("empty symbol".into()));
        }
        let group: Group = record[2].parse().map_err(err)?;
        let mut membership_events = Vec::new();
        for field in record.iter().skip(3).filter(|f| !f.is_empty()) {
            let (date, change) = field
                .split_once(':')
                .ok_or_else(|| err(format!("membership event {field:?} is not DATE:joined|left")))?;
            let date = parse_date(date).ok_or_else(|| err(format!("bad event date {date:?}")))?;
            let change = match change.trim().to_ascii_lowercase().as_str() {
                "joined" => MembershipChange::Joined,
                "left" => MembershipChange::Left,
                other => return Err(err(format!("unknown membership change {other:?}"))),
            };
            membership_events.push(MembershipEvent { date, change });
        }
        if let Some(w) = membership_events.windows(2).find(|w| w[1].date < w[0].date) {
            return Err(err(format!(
                "membership events out of order at {}",
                format_date(w[1].date)
            )));
        }
        if !seen.insert(symbol.clone()) {
            return Err(IngestError::DuplicateSymbol(symbol));
        }
        assets.push(AssetMeta {
            symbol,
            full_name: record[1].to_string(),
            group,
            membership_events,
        });
    }

    let index_symbol = index_symbol.ok_or(IngestError::UniverseParse {
        line: 0,
        reason: "missing `index = SYMBOL` declaration".into(),
    })?;
    if seen.contains(&index_symbol) {
        return Err(IngestError::DuplicateSymbol(index_symbol));
    }
    Ok(AssetUniverse { index_symbol, assets })
}
