//! Bundled fans and lattice maps.

use crate::fan::{parse_fan, Fan};
use crate::quotient::{parse_map, LatticeMap};

/// `(file name, contents)` for every bundled fan.
pub const FANS: &[(&str, &str)] = &[
    ("oda.fan.json", include_str!("../data/oda.fan.json")),
    ("oda-coxlift.fan.json", include_str!("../data/oda-coxlift.fan.json")),
    ("oda-hat.fan.json", include_str!("../data/oda-hat.fan.json")),
    ("nontwodiv.fan.json", include_str!("../data/nontwodiv.fan.json")),
    ("cstar-sigma.fan.json", include_str!("../data/cstar-sigma.fan.json")),
    ("p1.fan.json", include_str!("../data/p1.fan.json")),
    ("p2.fan.json", include_str!("../data/p2.fan.json")),
    ("p1xp1.fan.json", include_str!("../data/p1xp1.fan.json")),
    ("overlap.fan.json", include_str!("../data/overlap.fan.json")),
];

/// `(file name, contents)` for every bundled map.
pub const MAPS: &[(&str, &str)] = &[
    ("oda-Q.map.json", include_str!("../data/oda-Q.map.json")),
    ("oda-hat-P.map.json", include_str!("../data/oda-hat-P.map.json")),
    ("nontwodiv-Q1.map.json", include_str!("../data/nontwodiv-Q1.map.json")),
    ("cstar-P.map.json", include_str!("../data/cstar-P.map.json")),
    ("identity2.map.json", include_str!("../data/identity2.map.json")),
];

fn lookup<'a>(table: &'a [(&str, &'a str)], file: &str) -> &'a str {
    table.iter().find(|(n, _)| *n == file).map(|(_, c)| *c).unwrap_or_else(|| panic!("no bundled file {file}"))
}

/// Bundled fan by stem, e.g. `fan("oda")`.
pub fn fan(stem: &str) -> Fan {
    parse_fan(lookup(FANS, &format!("{stem}.fan.json"))).expect("bundled fan parses").fan
}

/// Bundled map by stem, e.g. `map("cstar-P")`.
pub fn map(stem: &str) -> LatticeMap {
    parse_map(lookup(MAPS, &format!("{stem}.map.json"))).expect("bundled map parses")
}

/// Bundled fans that are valid and complete.
pub fn complete_fans() -> Vec<Fan> {
    FANS.iter()
        .map(|(n, _)| fan(n.trim_end_matches(".fan.json")))
        .filter(|f| f.validate().is_valid() && f.is_complete())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn everything_parses() {
        for (n, _) in FANS {
            fan(n.trim_end_matches(".fan.json"));
        }
        for (n, _) in MAPS {
            map(n.trim_end_matches(".map.json"));
        }
        let names: Vec<String> = complete_fans().iter().map(|f| f.name().unwrap().to_string()).collect();
        assert_eq!(names, ["oda", "p1", "p2", "p1xp1"]);
    }
}
