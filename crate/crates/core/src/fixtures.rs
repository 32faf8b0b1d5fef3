//! Bundled cages.

use crate::geometry::Cage;
use crate::io::parse_cage;

pub const SQUARE_JSON: &str = include_str!("../fixtures/square.json");
pub const QUADRATIC_JSON: &str = include_str!("../fixtures/quadratic.json");
pub const BENT_CUBIC_JSON: &str = include_str!("../fixtures/bent_cubic.json");

/// Name and JSON of every bundled cage.
pub const ALL: [(&str, &str); 3] = [
    ("square", SQUARE_JSON),
    ("quadratic", QUADRATIC_JSON),
    ("bent_cubic", BENT_CUBIC_JSON),
];

/// Unit square, four straight edges.
pub fn square() -> Cage {
    parse_cage(SQUARE_JSON).expect("bundled fixture")
}

/// Four quadratic curves, unit diameter.
pub fn quadratic() -> Cage {
    parse_cage(QUADRATIC_JSON).expect("bundled fixture")
}

/// A bar bent into an arc: eight cubic curves, unit diameter.
pub fn bent_cubic() -> Cage {
    parse_cage(BENT_CUBIC_JSON).expect("bundled fixture")
}

pub fn by_name(name: &str) -> Option<Cage> {
    ALL.iter()
        .find(|(n, _)| *n == name)
        .map(|(_, json)| parse_cage(json).expect("bundled fixture"))
}
