use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Token substituted for missing categorical and text values.
pub const MISSING: &str = "<MISSING>";

/// The twelve POI attributes, in column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Attribute {
    LmId,
    X,
    Y,
    LmName,
    Cate,
    StrAdd,
    Unit,
    Mun,
    Pr,
    Pc,
    Phone,
    Website,
}

/// How an attribute is turned into numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributeKind {
    Numeric,
    Categorical,
    Text,
}

impl Attribute {
    pub const ALL: [Attribute; 12] = [
        Attribute::LmId,
        Attribute::X,
        Attribute::Y,
        Attribute::LmName,
        Attribute::Cate,
        Attribute::StrAdd,
        Attribute::Unit,
        Attribute::Mun,
        Attribute::Pr,
        Attribute::Pc,
        Attribute::Phone,
        Attribute::Website,
    ];

    pub fn column(self) -> &'static str {
        match self {
            Attribute::LmId => "LM_ID",
            Attribute::X => "X",
            Attribute::Y => "Y",
            Attribute::LmName => "LM_NAME",
            Attribute::Cate => "CATE",
            Attribute::StrAdd => "STR_ADD",
            Attribute::Unit => "U",
            Attribute::Mun => "MUN",
            Attribute::Pr => "PR",
            Attribute::Pc => "PC",
            Attribute::Phone => "PHONE",
            Attribute::Website => "WEBSITE",
        }
    }

    pub fn kind(self) -> AttributeKind {
        match self {
            Attribute::X | Attribute::Y => AttributeKind::Numeric,
            Attribute::Cate | Attribute::Mun | Attribute::Pr => AttributeKind::Categorical,
            _ => AttributeKind::Text,
        }
    }

    fn bit(self) -> u16 {
        1 << (self as u16)
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim();
        Attribute::ALL
            .into_iter()
            .find(|a| a.column().eq_ignore_ascii_case(wanted))
            .ok_or_else(|| Error::UnknownAttribute(s.to_string()))
    }
}

impl Serialize for Attribute {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.column())
    }
}

impl<'de> Deserialize<'de> for Attribute {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A set of attributes. Iteration always follows column order, which keeps
/// encodings and variant names stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct AttributeSet(u16);

impl AttributeSet {
    pub const fn empty() -> Self {
        AttributeSet(0)
    }

    pub fn all() -> Self {
        Attribute::ALL.into_iter().collect()
    }

    /// Every attribute except `LM_ID`, which is opt-in because generated ids
    /// come from a recognizable namespace.
    pub fn default_active() -> Self {
        let mut set = Self::all();
        set.remove(Attribute::LmId);
        set
    }

    pub fn contains(&self, a: Attribute) -> bool {
        self.0 & a.bit() != 0
    }

    pub fn insert(&mut self, a: Attribute) {
        self.0 |= a.bit();
    }

    pub fn remove(&mut self, a: Attribute) {
        self.0 &= !a.bit();
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn union(self, other: Self) -> Self {
        AttributeSet(self.0 | other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        AttributeSet(self.0 & !other.0)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Attribute> + '_ {
        Attribute::ALL.into_iter().filter(|a| self.contains(*a))
    }
}

impl FromIterator<Attribute> for AttributeSet {
    fn from_iter<I: IntoIterator<Item = Attribute>>(iter: I) -> Self {
        let mut set = AttributeSet::empty();
        for a in iter {
            set.insert(a);
        }
        set
    }
}

impl Serialize for AttributeSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for AttributeSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let attrs = Vec::<Attribute>::deserialize(d)?;
        Ok(attrs.into_iter().collect())
    }
}

/// Veracity label. `Fake` is the positive class everywhere in evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Fake = 0,
    Real = 1,
}

impl Label {
    pub fn from_u8(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::Fake),
            1 => Some(Label::Real),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    /// Output-unit index of this class.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_u8())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = u8::deserialize(d)?;
        Label::from_u8(v).ok_or_else(|| serde::de::Error::custom(format!("label must be 0 or 1, got {v}")))
    }
}

/// One POI row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoiRecord {
    pub lm_id: String,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub lm_name: String,
    pub cate: String,
    pub str_add: String,
    pub unit: String,
    pub mun: String,
    pub pr: String,
    pub pc: String,
    pub phone: String,
    pub website: String,
    pub label: Label,
    /// Attributes that were missing in the source and filled by cleaning.
    #[serde(default)]
    pub missing: AttributeSet,
}

impl PoiRecord {
    /// Text value of a non-numeric attribute; `None` for X and Y.
    pub fn text(&self, a: Attribute) -> Option<&str> {
        Some(match a {
            Attribute::LmId => &self.lm_id,
            Attribute::LmName => &self.lm_name,
            Attribute::Cate => &self.cate,
            Attribute::StrAdd => &self.str_add,
            Attribute::Unit => &self.unit,
            Attribute::Mun => &self.mun,
            Attribute::Pr => &self.pr,
            Attribute::Pc => &self.pc,
            Attribute::Phone => &self.phone,
            Attribute::Website => &self.website,
            Attribute::X | Attribute::Y => return None,
        })
    }

    pub(crate) fn text_mut(&mut self, a: Attribute) -> Option<&mut String> {
        Some(match a {
            Attribute::LmId => &mut self.lm_id,
            Attribute::LmName => &mut self.lm_name,
            Attribute::Cate => &mut self.cate,
            Attribute::StrAdd => &mut self.str_add,
            Attribute::Unit => &mut self.unit,
            Attribute::Mun => &mut self.mun,
            Attribute::Pr => &mut self.pr,
            Attribute::Pc => &mut self.pc,
            Attribute::Phone => &mut self.phone,
            Attribute::Website => &mut self.website,
            Attribute::X | Attribute::Y => return None,
        })
    }

    pub fn coord(&self, a: Attribute) -> Option<f64> {
        match a {
            Attribute::X => self.x,
            Attribute::Y => self.y,
            _ => None,
        }
    }

    pub(crate) fn coord_mut(&mut self, a: Attribute) -> Option<&mut Option<f64>> {
        match a {
            Attribute::X => Some(&mut self.x),
            Attribute::Y => Some(&mut self.y),
            _ => None,
        }
    }

    /// Whether the attribute holds a usable value (not empty, not the
    /// sentinel, finite for coordinates).
    pub fn is_present(&self, a: Attribute) -> bool {
        match a.kind() {
            AttributeKind::Numeric => self.coord(a).is_some_and(f64::is_finite) && !self.missing.contains(a),
            _ => {
                let v = self.text(a).unwrap_or_default().trim();
                !v.is_empty() && v != MISSING
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Bundled,
    Generated,
    Merged,
    Loaded,
}

/// An ordered collection of records and where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<PoiRecord>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(records: Vec<PoiRecord>, provenance: Provenance) -> Self {
        Dataset { records, provenance }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.records.iter().map(|r| r.label).collect()
    }

    /// `(fake, real)` counts.
    pub fn label_counts(&self) -> (usize, usize) {
        let fake = self.records.iter().filter(|r| r.label == Label::Fake).count();
        (fake, self.records.len() - fake)
    }

    /// New dataset holding the records at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            provenance: self.provenance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attribute_names_round_trip() {
        for a in Attribute::ALL {
            assert_eq!(a.column().parse::<Attribute>().unwrap(), a);
        }
        assert!(matches!("ZIP".parse::<Attribute>(), Err(Error::UnknownAttribute(_))));
    }

    #[test]
    fn set_iterates_in_column_order() {
        let set: AttributeSet = [Attribute::Pc, Attribute::X, Attribute::Mun].into_iter().collect();
        let order: Vec<_> = set.iter().collect();
        assert_eq!(order, vec![Attribute::X, Attribute::Mun, Attribute::Pc]);
        assert_eq!(set.len(), 3);
        assert!(!AttributeSet::default_active().contains(Attribute::LmId));
        assert_eq!(AttributeSet::all().len(), 12);
    }

    #[test]
    fn set_serializes_as_names() {
        let set: AttributeSet = [Attribute::Y, Attribute::LmName].into_iter().collect();
        let json = serde_json::to_string(&set).unwrap();
        assert_eq!(json, r#"["Y","LM_NAME"]"#);
        assert_eq!(serde_json::from_str::<AttributeSet>(&json).unwrap(), set);
    }
}
