use serde::{Deserialize, Serialize};

/// A municipality of the reference region: its coordinate extent, postal
/// forward sortation areas and web domain.
pub(crate) struct Municipality {
    pub name: &'static str,
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub fsas: &'static [&'static str],
    pub domain: &'static str,
    pub weight: f64,
}

pub(crate) const MUNICIPALITIES: [Municipality; 3] = [
    Municipality {
        name: "Mississauga",
        x: (43.53, 43.66),
        y: (-79.76, -79.54),
        fsas: &[
            "L4T", "L4V", "L4W", "L4X", "L4Y", "L4Z", "L5A", "L5B", "L5C", "L5E", "L5G", "L5H", "L5J", "L5K", "L5L", "L5M",
            "L5N", "L5R", "L5T", "L5V", "L5W",
        ],
        domain: "mississauga.ca",
        weight: 0.50,
    },
    Municipality {
        name: "Brampton",
        x: (43.66, 43.78),
        y: (-79.85, -79.63),
        fsas: &["L6P", "L6R", "L6S", "L6T", "L6V", "L6W", "L6X", "L6Y", "L6Z", "L7A"],
        domain: "brampton.ca",
        weight: 0.38,
    },
    Municipality {
        name: "Caledon",
        x: (43.78, 43.95),
        y: (-80.05, -79.70),
        fsas: &["L7C", "L7E", "L7K", "L0N"],
        domain: "caledon.ca",
        weight: 0.12,
    },
];

/// Category label and the nouns used to name places of that category.
pub(crate) const CATEGORIES: [(&str, &[&str]); 12] = [
    ("Arts, museum and cultural spaces", &["Arts Centre", "Museum", "Gallery", "Heritage House", "Theatre"]),
    ("Emergency responder stations", &["Fire Station", "Police Division", "Paramedic Station"]),
    ("Institutional buildings", &["City Hall", "Town Hall", "Court House", "Public Library", "Library Branch"]),
    ("Hospitals, medical centres and walk-in clinics", &["Hospital", "Medical Centre", "Walk-In Clinic", "Health Centre"]),
    ("Housing", &["Housing Co-operative", "Family Shelter", "Seniors Residence", "Community Housing"]),
    ("Food banks", &["Food Bank", "Community Pantry", "Food Centre"]),
    ("Long term care and retirement homes", &["Long Term Care Centre", "Retirement Home", "Manor"]),
    ("Post office", &["Post Office", "Postal Outlet"]),
    ("Recreation centres and meeting places", &["Community Centre", "Arena", "Pool", "Recreation Centre", "Meeting Hall"]),
    ("Settlement services", &["Newcomer Centre", "Settlement Services", "Immigrant Services"]),
    ("Shopping centres", &["Plaza", "Shopping Centre", "Town Centre", "Mall"]),
    ("Transportation", &["GO Station", "Bus Terminal", "Transit Hub", "Airport Terminal"]),
];

pub(crate) const NEIGHBOUR_MUNICIPALITIES: [&str; 4] = ["Toronto", "Oakville", "Vaughan", "Milton"];

pub(crate) const PEEL_AREA_CODES: [&str; 3] = ["905", "289", "365"];

pub(crate) const OTHER_AREA_CODES: [&str; 8] = ["416", "647", "437", "519", "613", "604", "403", "514"];

pub(crate) const POSTAL_LETTERS: &[u8] = b"ABCEGHJKLMNPRSTVWXYZ";

pub(crate) const TLDS: [&str; 4] = ["ca", "com", "org", "net"];

/// Word lists for place names and street addresses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NameLexicon {
    pub place_words: Vec<String>,
    pub street_names: Vec<String>,
    pub street_types: Vec<String>,
    pub surnames: Vec<String>,
}

fn owned(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

impl Default for NameLexicon {
    fn default() -> Self {
        NameLexicon {
            place_words: owned(&[
                "Meadowvale", "Streetsville", "Port Credit", "Clarkson", "Erin Mills", "Malton", "Cooksville", "Churchill Meadows",
                "Lisgar", "Hurontario", "Chinguacousy", "Springdale", "Heart Lake", "Bramalea", "Castlemore", "Mount Pleasant",
                "Sandringham", "Gore Meadows", "Bolton", "Inglewood", "Alton", "Belfountain", "Cheltenham", "Palgrave",
                "Valleywood", "Mayfield", "Credit Valley", "Lakeview", "Applewood", "Fletcher's Creek",
            ]),
            street_names: owned(&[
                "Queen", "Main", "Hurontario", "Dundas", "Steeles", "Bovaird", "Mavis", "Dixie", "Derry", "Britannia", "Eglinton",
                "Burnhamthorpe", "Erin Mills", "Winston Churchill", "Sandalwood", "Mayfield", "King", "Olde Base Line",
                "Airport", "Kennedy", "Williams", "Chinguacousy", "Creditview", "Lakeshore", "Mississauga Valley",
                "Ray Lawson", "Torbram", "Goreway", "Highway 50", "Charleston",
            ]),
            street_types: owned(&["St", "Rd", "Ave", "Dr", "Blvd", "Cres", "Pkwy", "Way", "Line", "Ct"]),
            surnames: owned(&[
                "Smith", "Brown", "Tremblay", "Martin", "Roy", "Wilson", "MacDonald", "Gagnon", "Johnson", "Taylor",
                "Campbell", "Anderson", "Leblanc", "Lee", "White", "Thompson", "Singh", "Patel", "Nguyen", "Walker",
            ]),
        }
    }
}

pub(crate) fn slug(s: &str) -> String {
    s.chars().filter(|c| c.is_ascii_alphanumeric()).map(|c| c.to_ascii_lowercase()).collect()
}
