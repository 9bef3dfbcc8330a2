//! Item (`Q…`) and property (`P…`) identifiers.
//!
//! Identifiers are stored as their numeric part so that hashing and
//! comparison stay cheap on the classification hot path. Textual forms are
//! produced on demand through `Display`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// An item identifier such as `Q312`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Qid(pub u64);

/// A property identifier such as `P31`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pid(pub u32);

/// Either kind of identifier. Used where a store is keyed by both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ident {
    Item(Qid),
    Property(Pid),
}

/// instance of
pub const INSTANCE_OF: Pid = Pid(31);
/// subclass of
pub const SUBCLASS_OF: Pid = Pid(279);
/// human
pub const HUMAN: Qid = Qid(5);

/// The properties whose values are type assertions.
pub const TYPE_PROPERTIES: [Pid; 2] = [INSTANCE_OF, SUBCLASS_OF];

const PROPERTY_BIT: u64 = 1 << 63;

fn parse_digits(s: &str) -> Option<u64> {
    if s.is_empty() || s.len() > 18 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    // Leading zeros would give two spellings for one id.
    if s.len() > 1 && s.starts_with('0') {
        return None;
    }
    s.parse().ok()
}

/// True when `s` is a well-formed item id (`Q` followed by digits).
pub fn is_qid(s: &str) -> bool {
    s.strip_prefix('Q').and_then(parse_digits).is_some()
}

/// True when `s` is a well-formed property id (`P` followed by digits).
pub fn is_pid(s: &str) -> bool {
    s.strip_prefix('P')
        .and_then(parse_digits)
        .is_some_and(|n| n <= u32::MAX as u64)
}

impl Qid {
    pub fn parse(s: &str) -> Result<Self, Error> {
        s.parse()
    }
}

impl Pid {
    pub fn parse(s: &str) -> Result<Self, Error> {
        s.parse()
    }
}

impl Ident {
    pub fn parse(s: &str) -> Result<Self, Error> {
        s.parse()
    }

    /// Packed 64-bit key used by label stores.
    pub fn key(self) -> u64 {
        match self {
            Ident::Item(q) => q.0,
            Ident::Property(p) => PROPERTY_BIT | p.0 as u64,
        }
    }

    pub fn from_key(key: u64) -> Self {
        if key & PROPERTY_BIT != 0 {
            Ident::Property(Pid((key & !PROPERTY_BIT) as u32))
        } else {
            Ident::Item(Qid(key))
        }
    }
}

impl From<Qid> for Ident {
    fn from(q: Qid) -> Self {
        Ident::Item(q)
    }
}

impl From<Pid> for Ident {
    fn from(p: Pid) -> Self {
        Ident::Property(p)
    }
}

impl FromStr for Qid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        s.strip_prefix('Q')
            .and_then(parse_digits)
            .map(Qid)
            .ok_or_else(|| Error::InvalidId(s.to_string()))
    }
}

impl FromStr for Pid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        s.strip_prefix('P')
            .and_then(parse_digits)
            .filter(|n| *n <= u32::MAX as u64)
            .map(|n| Pid(n as u32))
            .ok_or_else(|| Error::InvalidId(s.to_string()))
    }
}

impl FromStr for Ident {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.as_bytes().first() {
            Some(b'Q') => s.parse().map(Ident::Item),
            Some(b'P') => s.parse().map(Ident::Property),
            _ => Err(Error::InvalidId(s.to_string())),
        }
    }
}

impl fmt::Display for Qid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.0)
    }
}

impl fmt::Display for Pid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ident::Item(q) => q.fmt(f),
            Ident::Property(p) => p.fmt(f),
        }
    }
}

macro_rules! string_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = <std::borrow::Cow<'de, str>>::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(Qid);
string_serde!(Pid);
string_serde!(Ident);
