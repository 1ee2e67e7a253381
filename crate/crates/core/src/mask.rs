//! Care masks built from observed inputs.
//!
//! An address that was never observed is a don't care: its stored value may
//! be rewritten freely during compression. Observed addresses are cares and
//! must reconstruct bit-exactly.

use crate::error::{Error, Result};
use crate::table::strip_comment;

/// Per-entry care flags aligned with a table (`true` = care).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CareMask {
    flags: Vec<bool>,
}

impl CareMask {
    pub fn new(flags: Vec<bool>) -> Self {
        CareMask { flags }
    }

    pub fn all_care(len: usize) -> Self {
        CareMask {
            flags: vec![true; len],
        }
    }

    pub fn all_dont_care(len: usize) -> Self {
        CareMask {
            flags: vec![false; len],
        }
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn is_care(&self, x: usize) -> bool {
        self.flags[x]
    }

    pub fn care_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn is_all_care(&self) -> bool {
        self.flags.iter().all(|&f| f)
    }

    /// Elementwise OR.
    pub fn union(&self, other: &CareMask) -> Result<CareMask> {
        if self.len() != other.len() {
            return Err(Error::SizeMismatch {
                table: self.len(),
                mask: other.len(),
            });
        }
        Ok(CareMask {
            flags: self
                .flags
                .iter()
                .zip(&other.flags)
                .map(|(a, b)| *a || *b)
                .collect(),
        })
    }

    /// Parses a mask file: one `0` or `1` per line, line k is address k.
    pub fn parse(text: &str) -> Result<CareMask> {
        let mut flags = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            match raw.trim() {
                "" => continue,
                "1" => flags.push(true),
                "0" => flags.push(false),
                other => {
                    return Err(Error::parse(
                        idx + 1,
                        format!("expected 0 or 1, found `{other}`"),
                    ))
                }
            }
        }
        Ok(CareMask { flags })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.flags.len() * 2);
        for &f in &self.flags {
            out.push_str(if f { "1\n" } else { "0\n" });
        }
        out
    }
}

/// Marks exactly the observed addresses as cares. Duplicates are harmless.
pub fn mask_from_observations(
    w_in: u32,
    observed: impl IntoIterator<Item = u64>,
) -> Result<CareMask> {
    let len = 1usize << w_in;
    let mut flags = vec![false; len];
    for addr in observed {
        if addr >> w_in != 0 {
            return Err(Error::Address { addr, w_in });
        }
        flags[addr as usize] = true;
    }
    Ok(CareMask { flags })
}

/// Fraction of entries that are cares; 0 for an empty mask.
pub fn care_fraction(mask: &CareMask) -> f64 {
    if mask.is_empty() {
        0.0
    } else {
        mask.care_count() as f64 / mask.len() as f64
    }
}

/// Parses an observation file: one address per line, either `w_in` binary
/// digits or `0x`-prefixed hex. Blank lines and `#` comments are skipped.
/// Errors carry the 1-based line number.
pub fn parse_observations(text: &str, w_in: u32) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let addr = if let Some(hex) = line.strip_prefix("0x").or_else(|| line.strip_prefix("0X")) {
            u64::from_str_radix(hex, 16)
                .map_err(|e| Error::parse(line_no, format!("bad hex address `{line}`: {e}")))?
        } else {
            if line.len() != w_in as usize || !line.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::parse(
                    line_no,
                    format!("expected {w_in} binary digits or 0x-prefixed hex, found `{line}`"),
                ));
            }
            u64::from_str_radix(line, 2).map_err(|e| Error::parse(line_no, e.to_string()))?
        };
        if addr >> w_in != 0 {
            return Err(Error::parse(
                line_no,
                format!("address {addr:#x} out of range for a {w_in}-bit input"),
            ));
        }
        out.push(addr);
    }
    Ok(out)
}

/// Observation file text straight to a mask.
pub fn mask_from_observation_text(text: &str, w_in: u32) -> Result<CareMask> {
    mask_from_observations(w_in, parse_observations(text, w_in)?)
}
