use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Two-level internal state. `Down` is basis index 0 (H polarization), `Up` is 1 (V).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    pub fn bit(self) -> usize {
        match self {
            Spin::Down => 0,
            Spin::Up => 1,
        }
    }

    pub fn from_bit(bit: usize) -> Spin {
        if bit & 1 == 0 {
            Spin::Down
        } else {
            Spin::Up
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Spin::Down => 'd',
            Spin::Up => 'u',
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Down => "down",
            Spin::Up => "up",
        })
    }
}

impl FromStr for Spin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "down" | "d" | "h" | "0" => Ok(Spin::Down),
            "up" | "u" | "v" | "1" => Ok(Spin::Up),
            other => Err(Error::invalid(format!("unknown spin '{other}'"))),
        }
    }
}

/// Basis index of a spin pattern listed by detector, detector 0 most significant.
pub fn basis_index(spins: &[Spin]) -> usize {
    spins.iter().fold(0, |acc, s| (acc << 1) | s.bit())
}

/// Inverse of [`basis_index`].
pub fn spins_of_index(index: usize, n: usize) -> Vec<Spin> {
    (0..n).map(|k| Spin::from_bit(index >> (n - 1 - k))).collect()
}

/// Label such as `ddu` for a basis index.
pub fn basis_label(index: usize, n: usize) -> String {
    spins_of_index(index, n).into_iter().map(Spin::symbol).collect()
}
