//! Surface-format checks for postal codes, phone numbers and websites.

use std::sync::LazyLock;

use regex::Regex;

static POSTAL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Z][0-9][A-Z] [0-9][A-Z][0-9]$").unwrap());

static PHONE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(\+1[ -]?)?(\([0-9]{3}\) ?|[0-9]{3}[-. ])[0-9]{3}[-. ][0-9]{4}( ext\.? ?[0-9]{1,5})?$").unwrap()
});

static WEBSITE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^https?://([a-z0-9-]+\.)+[a-z]{2,}(/[A-Za-z0-9._~%/-]*)?$").unwrap());

/// Canadian postal code, `A1A 1A1`.
pub fn is_valid_postal(s: &str) -> bool {
    POSTAL.is_match(s)
}

/// North American number such as `905-555-0101` or `(905) 555-0101`.
pub fn is_valid_phone(s: &str) -> bool {
    PHONE.is_match(s)
}

pub fn is_valid_website(s: &str) -> bool {
    WEBSITE.is_match(s)
}
