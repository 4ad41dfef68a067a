use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::lexicon::{slug, Municipality, CATEGORIES, MUNICIPALITIES, PEEL_AREA_CODES, TLDS};
use super::{phone_number, pick, postal_code, NameLexicon};
use crate::data::{AttributeSet, Dataset, Label, PoiRecord, Provenance};

/// Seed that produced the bundled sample.
pub const BUNDLED_SEED: u64 = 2024;

/// Shape of the real-schema reference sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOptions {
    /// Distinct landmarks.
    pub unique: usize,
    /// Extra rows repeating an earlier id; every third one with shifted
    /// coordinates.
    pub duplicates: usize,
    pub missing_coord_rate: f64,
    pub unit_rate: f64,
    pub missing_phone_rate: f64,
    pub missing_website_rate: f64,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions {
            unique: 1300,
            duplicates: 12,
            missing_coord_rate: 0.005,
            unit_rate: 0.4,
            missing_phone_rate: 0.1,
            missing_website_rate: 0.2,
        }
    }
}

fn municipality(rng: &mut impl Rng) -> &'static Municipality {
    let mut u = rng.random::<f64>();
    for m in &MUNICIPALITIES {
        if u < m.weight {
            return m;
        }
        u -= m.weight;
    }
    &MUNICIPALITIES[MUNICIPALITIES.len() - 1]
}

fn coord(rng: &mut impl Rng, (lo, hi): (f64, f64), missing_rate: f64) -> Option<f64> {
    if rng.random_bool(missing_rate) {
        None
    } else {
        // five decimals
        Some((rng.random_range(lo..hi) * 1e5).round() / 1e5)
    }
}

fn reference_record(rng: &mut impl Rng, id: usize, opts: &ReferenceOptions, lex: &NameLexicon) -> PoiRecord {
    let m = municipality(rng);
    let (cate, nouns) = pick(rng, &CATEGORIES);
    let place = pick(rng, &lex.place_words);
    let noun = pick(rng, nouns);
    let lm_name = if rng.random_bool(0.25) {
        format!("{} {} {}", m.name, noun, rng.random_range(1..400))
    } else {
        format!("{place} {noun}")
    };
    let x = coord(rng, m.x, opts.missing_coord_rate);
    let y = coord(rng, m.y, opts.missing_coord_rate);
    let str_add = format!("{} {} {}", rng.random_range(1..3500), pick(rng, &lex.street_names), pick(rng, &lex.street_types));
    let unit = if rng.random_bool(opts.unit_rate) {
        if rng.random_bool(0.6) {
            format!("Unit {}", rng.random_range(1..60))
        } else {
            format!("Suite {}", rng.random_range(100..400))
        }
    } else {
        String::new()
    };
    let fsa = pick(rng, m.fsas);
    let pc = postal_code(rng, fsa);
    let phone = if rng.random_bool(opts.missing_phone_rate) {
        String::new()
    } else {
        let area = pick(rng, &PEEL_AREA_CODES);
        let mut p = phone_number(rng, area);
        if rng.random_bool(0.1) {
            p.push_str(&format!(" ext. {}", rng.random_range(100..9000)));
        }
        p
    };
    let website = if rng.random_bool(opts.missing_website_rate) {
        String::new()
    } else {
        match rng.random_range(0..3) {
            0 => format!("https://www.{}/{}", m.domain, slug(noun)),
            1 => format!("https://www.peelregion.ca/{}", slug(place)),
            _ => format!("https://www.{}{}.{}/", slug(place), slug(noun), pick(rng, &TLDS)),
        }
    };
    PoiRecord {
        lm_id: (10_000 + id).to_string(),
        x,
        y,
        lm_name,
        cate: cate.to_string(),
        str_add,
        unit,
        mun: m.name.to_string(),
        pr: "ON".to_string(),
        pc,
        phone,
        website,
        label: Label::Real,
        missing: AttributeSet::empty(),
    }
}

/// A real-schema sample of plausible regional landmarks, labelled
/// [`Label::Real`]. Includes a few duplicate ids and missing cells so the
/// cleaning stage has work to do.
pub fn generate_reference(opts: &ReferenceOptions, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lex = NameLexicon::default();
    let mut records: Vec<PoiRecord> = (0..opts.unique).map(|i| reference_record(&mut rng, i, opts, &lex)).collect();
    for d in 0..opts.duplicates.min(opts.unique) {
        let mut dup = records[rng.random_range(0..opts.unique)].clone();
        if d % 3 == 0 {
            dup.x = dup.x.map(|x| x + 0.001);
        }
        let at = rng.random_range(0..=records.len());
        records.insert(at, dup);
    }
    Dataset::new(records, Provenance::Bundled)
}
