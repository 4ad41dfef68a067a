//! Seeded generators for labelled POI records.
//!
//! [`generate_fake`] produces the negative class. [`generate_reference`]
//! produces the real-schema sample that ships with the crate.

mod lexicon;
mod reference;

use std::collections::HashSet;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{AttributeSet, Dataset, Label, PoiRecord, Provenance};
use crate::error::{Error, Result};
use crate::patterns;

pub use lexicon::NameLexicon;
pub use reference::{generate_reference, ReferenceOptions, BUNDLED_SEED};

use lexicon::{slug, CATEGORIES, MUNICIPALITIES, NEIGHBOUR_MUNICIPALITIES, OTHER_AREA_CODES, PEEL_AREA_CODES, POSTAL_LETTERS, TLDS};

/// Prefix of every generated fake id.
pub const FAKE_ID_PREFIX: &str = "F-";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl CoordBox {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }
}

impl Default for CoordBox {
    fn default() -> Self {
        CoordBox { x_min: 43.53, x_max: 43.95, y_min: -80.05, y_max: -79.54 }
    }
}

/// Knobs of the fake-record generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FakeProfile {
    pub coord_box: CoordBox,
    pub out_of_box_rate: f64,
    pub valid_postal_rate: f64,
    pub valid_phone_rate: f64,
    pub category_pool: Vec<String>,
    pub municipality_pool: Vec<String>,
    /// Drawn uniformly; repeat an entry to weight it.
    pub province_pool: Vec<String>,
    pub name_lexicon: NameLexicon,
}

impl Default for FakeProfile {
    fn default() -> Self {
        let mut municipality_pool: Vec<String> = MUNICIPALITIES.iter().map(|m| m.name.to_string()).collect();
        municipality_pool.extend(NEIGHBOUR_MUNICIPALITIES.iter().take(1).map(|m| m.to_string()));
        let mut province_pool = vec!["ON".to_string(); 8];
        province_pool.extend(["QC", "BC"].map(String::from));
        FakeProfile {
            coord_box: CoordBox::default(),
            out_of_box_rate: 0.3,
            valid_postal_rate: 0.7,
            valid_phone_rate: 0.7,
            category_pool: CATEGORIES.iter().map(|(c, _)| c.to_string()).collect(),
            municipality_pool,
            province_pool,
            name_lexicon: NameLexicon::default(),
        }
    }
}

impl FakeProfile {
    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [
            ("out_of_box_rate", self.out_of_box_rate),
            ("valid_postal_rate", self.valid_postal_rate),
            ("valid_phone_rate", self.valid_phone_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InvalidProfile(format!("{name} must be in [0, 1], got {rate}")));
            }
        }
        let b = &self.coord_box;
        if !(b.x_min < b.x_max && b.y_min < b.y_max) {
            return Err(Error::InvalidProfile(format!("coord_box is not well ordered: {b:?}")));
        }
        let lex = &self.name_lexicon;
        for (name, empty) in [
            ("category_pool", self.category_pool.is_empty()),
            ("municipality_pool", self.municipality_pool.is_empty()),
            ("province_pool", self.province_pool.is_empty()),
            ("name_lexicon.place_words", lex.place_words.is_empty()),
            ("name_lexicon.street_names", lex.street_names.is_empty()),
            ("name_lexicon.street_types", lex.street_types.is_empty()),
            ("name_lexicon.surnames", lex.surnames.is_empty()),
        ] {
            if empty {
                return Err(Error::InvalidProfile(format!("{name} is empty")));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let profile: FakeProfile = serde_json::from_str(text)?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

pub(crate) fn pick<'a, T>(rng: &mut impl Rng, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

pub(crate) fn postal_letter(rng: &mut impl Rng) -> char {
    *pick(rng, POSTAL_LETTERS) as char
}

pub(crate) fn digit(rng: &mut impl Rng) -> char {
    char::from(b'0' + rng.random_range(0..10u8))
}

/// `fsa` followed by a random local delivery unit.
pub(crate) fn postal_code(rng: &mut impl Rng, fsa: &str) -> String {
    format!("{fsa} {}{}{}", digit(rng), postal_letter(rng), digit(rng))
}

fn invalid_postal(rng: &mut impl Rng) -> String {
    const ALNUM: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    loop {
        let len = rng.random_range(5..=7);
        let s: String = (0..len).map(|_| *pick(rng, ALNUM) as char).collect();
        if !patterns::is_valid_postal(&s) {
            return s;
        }
    }
}

pub(crate) fn phone_number(rng: &mut impl Rng, area: &str) -> String {
    let exchange = rng.random_range(200..1000);
    let line = rng.random_range(0..10000);
    if rng.random_bool(0.8) {
        format!("{area}-{exchange}-{line:04}")
    } else {
        format!("({area}) {exchange}-{line:04}")
    }
}

fn invalid_phone(rng: &mut impl Rng) -> String {
    loop {
        let s = match rng.random_range(0..3) {
            0 => format!("{}-{:04}", rng.random_range(100..1000), rng.random_range(0..10000)),
            1 => format!("{}{}", rng.random_range(10_000_000u64..100_000_000_000), ["x", "x#", ""][rng.random_range(0..3)]),
            _ => format!("{}-{}-{}", rng.random_range(10..100), rng.random_range(100..1000), rng.random_range(100..1000)),
        };
        if !patterns::is_valid_phone(&s) {
            return s;
        }
    }
}

fn fake_record(rng: &mut impl Rng, i: usize, p: &FakeProfile) -> PoiRecord {
    let lex = &p.name_lexicon;
    let b = p.coord_box;
    let (x, y) = if rng.random_bool(p.out_of_box_rate) {
        // a ring one box-width wide around the box
        let (w, h) = (b.x_max - b.x_min, b.y_max - b.y_min);
        loop {
            let x = rng.random_range(b.x_min - w..b.x_max + w);
            let y = rng.random_range(b.y_min - h..b.y_max + h);
            if !b.contains(x, y) {
                break (x, y);
            }
        }
    } else {
        (rng.random_range(b.x_min..=b.x_max), rng.random_range(b.y_min..=b.y_max))
    };

    let cate = pick(rng, &p.category_pool).clone();
    let (_, nouns) = pick(rng, &CATEGORIES);
    let lm_name = if rng.random_bool(0.7) {
        format!("{} {}", pick(rng, &lex.place_words), pick(rng, nouns))
    } else {
        format!("{} {}", pick(rng, &lex.surnames), pick(rng, nouns))
    };
    let str_add = format!("{} {} {}", rng.random_range(1..10000), pick(rng, &lex.street_names), pick(rng, &lex.street_types));
    let unit = match rng.random_range(0..3) {
        0 => format!("Apt. {}", rng.random_range(1..1000)),
        1 => format!("Suite {}", rng.random_range(100..1000)),
        _ => format!("{}", rng.random_range(1..100)),
    };
    let mun = pick(rng, &p.municipality_pool).clone();
    let pr = pick(rng, &p.province_pool).clone();
    let pc = if rng.random_bool(p.valid_postal_rate) {
        let m = pick(rng, &MUNICIPALITIES);
        let fsa = pick(rng, m.fsas);
        postal_code(rng, fsa)
    } else {
        invalid_postal(rng)
    };
    let phone = if rng.random_bool(p.valid_phone_rate) {
        let area = if rng.random_bool(0.5) { *pick(rng, &PEEL_AREA_CODES) } else { *pick(rng, &OTHER_AREA_CODES) };
        phone_number(rng, area)
    } else {
        invalid_phone(rng)
    };
    let website = format!(
        "https://www.{}{}.{}/",
        slug(pick(rng, &lex.surnames)),
        slug(pick(rng, &lex.place_words)),
        pick(rng, &TLDS)
    );
    // same five-decimal precision as the reference sample
    let round5 = |v: f64| (v * 1e5).round() / 1e5;
    PoiRecord {
        lm_id: format!("{FAKE_ID_PREFIX}{i:05}"),
        x: Some(round5(x)),
        y: Some(round5(y)),
        lm_name,
        cate,
        str_add,
        unit,
        mun,
        pr,
        pc,
        phone,
        website,
        label: Label::Fake,
        missing: AttributeSet::empty(),
    }
}

/// `n` fake records, all labelled [`Label::Fake`], deterministic in
/// `(n, profile, seed)`.
pub fn generate_fake(n: usize, profile: &FakeProfile, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidProfile("n must be at least 1".into()));
    }
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n).map(|i| fake_record(&mut rng, i, profile)).collect();
    Ok(Dataset::new(records, Provenance::Generated))
}

/// Real records followed by fake records.
pub fn merge_labeled(real: &Dataset, fake: &Dataset) -> Result<Dataset> {
    if real.is_empty() {
        return Err(Error::MissingClass("real"));
    }
    if fake.is_empty() {
        return Err(Error::MissingClass("fake"));
    }
    for (side, ds, expected) in [("real", real, Label::Real), ("fake", fake, Label::Fake)] {
        if let Some(r) = ds.records.iter().find(|r| r.label != expected) {
            return Err(Error::LabelContamination { side, lm_id: r.lm_id.clone(), label: r.label.as_u8() });
        }
    }
    let mut records = real.records.clone();
    records.extend(fake.records.iter().cloned());
    Ok(Dataset::new(records, Provenance::Merged))
}

/// Whether any two records share an id.
pub fn has_id_collision(ds: &Dataset) -> bool {
    let mut seen = HashSet::new();
    ds.records.iter().any(|r| !seen.insert(r.lm_id.as_str()))
}
