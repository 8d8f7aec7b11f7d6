//! Value lists for sweep flags: `8`, `2,4,8`, `2..16` (inclusive) or a mix
//! such as `2..4,8,16`. Scheme lists accept names or `all`.

use std::fmt;
use std::str::FromStr;

use anonsched::attacker::AttackMode;
use anonsched::SchemeKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntList(pub Vec<usize>);

impl FromStr for IntList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim) {
            if let Some((lo, hi)) = item.split_once("..") {
                let lo: usize = lo.trim().parse().map_err(|_| format!("bad range start in `{item}`"))?;
                let hi: usize = hi.trim().parse().map_err(|_| format!("bad range end in `{item}`"))?;
                if lo > hi {
                    return Err(format!("empty range `{item}`"));
                }
                out.extend(lo..=hi);
            } else {
                out.push(item.parse().map_err(|_| format!("`{item}` is not a non-negative integer"))?);
            }
        }
        Ok(IntList(out))
    }
}

impl fmt::Display for IntList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&items.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeList(pub Vec<SchemeKind>);

impl FromStr for SchemeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(SchemeList(SchemeKind::ALL.to_vec()));
        }
        s.split(',')
            .map(|name| name.parse::<SchemeKind>().map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()
            .map(SchemeList)
    }
}

impl fmt::Display for SchemeList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<&str> = self.0.iter().map(|s| s.name()).collect();
        f.write_str(&items.join(","))
    }
}

/// Attack modes requested on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeChoice {
    Single,
    Network,
    Both,
}

impl ModeChoice {
    pub fn modes(self) -> &'static [AttackMode] {
        match self {
            ModeChoice::Single => &[AttackMode::SingleNode],
            ModeChoice::Network => &[AttackMode::NetworkWide],
            ModeChoice::Both => &[AttackMode::SingleNode, AttackMode::NetworkWide],
        }
    }
}

impl FromStr for ModeChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("both") {
            return Ok(ModeChoice::Both);
        }
        match s.parse::<AttackMode>()? {
            AttackMode::SingleNode => Ok(ModeChoice::Single),
            AttackMode::NetworkWide => Ok(ModeChoice::Network),
        }
    }
}

impl fmt::Display for ModeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeChoice::Single => "single",
            ModeChoice::Network => "network",
            ModeChoice::Both => "both",
        })
    }
}
