//! IRMA codes: four hierarchical axes written `TTTT-DDD-AAA-BBB`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const WILDCARD: u8 = b'*';

/// Axis names and lengths, in order: technical, directional, anatomical,
/// biological.
pub const AXES: [(char, usize); 4] = [('T', 4), ('D', 3), ('A', 3), ('B', 3)];

pub const CODE_CHARS: usize = 13;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IrmaCode {
    chars: [u8; CODE_CHARS],
}

impl IrmaCode {
    /// All 13 characters, without separators.
    pub fn chars(&self) -> &[u8; CODE_CHARS] {
        &self.chars
    }

    /// Characters of axis `k` (0 = T, 1 = D, 2 = A, 3 = B).
    pub fn axis(&self, k: usize) -> &[u8] {
        let start: usize = AXES[..k].iter().map(|a| a.1).sum();
        &self.chars[start..start + AXES[k].1]
    }

    pub fn axes(&self) -> impl Iterator<Item = &[u8]> {
        (0..AXES.len()).map(move |k| self.axis(k))
    }

    pub fn has_wildcard(&self) -> bool {
        self.chars.contains(&WILDCARD)
    }
}

pub fn parse_irma(s: &str) -> Result<IrmaCode> {
    s.parse()
}

impl FromStr for IrmaCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fail = |reason: String| Error::IrmaParse {
            code: s.to_string(),
            reason,
        };
        let groups: Vec<&str> = s.trim().split('-').collect();
        if groups.len() != AXES.len() {
            return Err(fail(format!(
                "expected 4 groups TTTT-DDD-AAA-BBB, found {}",
                groups.len()
            )));
        }
        let mut chars = [0u8; CODE_CHARS];
        let mut at = 0;
        for (group, &(name, len)) in groups.iter().zip(&AXES) {
            if group.chars().count() != len {
                return Err(fail(format!("axis {name} must have {len} characters")));
            }
            for c in group.chars() {
                let c = c.to_ascii_lowercase();
                if !(c.is_ascii_digit() || c.is_ascii_lowercase() || c == '*') {
                    return Err(fail(format!("axis {name} has illegal character {c:?}")));
                }
                chars[at] = c as u8;
                at += 1;
            }
        }
        Ok(IrmaCode { chars })
    }
}

impl fmt::Display for IrmaCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..AXES.len() {
            if k > 0 {
                f.write_str("-")?;
            }
            // chars are validated ASCII
            f.write_str(std::str::from_utf8(self.axis(k)).map_err(|_| fmt::Error)?)?;
        }
        Ok(())
    }
}

impl fmt::Debug for IrmaCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IrmaCode({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_sample_codes() {
        let c = parse_irma("1121-127-700-500").unwrap();
        assert_eq!(c.axis(0), b"1121");
        assert_eq!(c.axis(1), b"127");
        assert_eq!(c.axis(2), b"700");
        assert_eq!(c.axis(3), b"500");

        let d = parse_irma("112d-121-500-000").unwrap();
        assert_eq!(d.axis(0), b"112d");
        assert_eq!(d.to_string(), "112d-121-500-000");
    }

    #[test]
    fn lowercases_and_accepts_wildcards() {
        let c = parse_irma(" 112D-1*1-500-000 ").unwrap();
        assert_eq!(c.to_string(), "112d-1*1-500-000");
        assert!(c.has_wildcard());
    }

    #[test]
    fn errors_name_the_group() {
        let err = parse_irma("1121-12-700-500").unwrap_err();
        assert!(err.to_string().contains("axis D must have 3 characters"), "{err}");

        let err = parse_irma("1121-127-7x0-50").unwrap_err();
        assert!(err.to_string().contains("axis B must have 3 characters"), "{err}");

        let err = parse_irma("1121-127-7_0-500").unwrap_err();
        assert!(err.to_string().contains("axis A has illegal character"), "{err}");

        let err = parse_irma("1121-127-700").unwrap_err();
        assert!(err.to_string().contains("expected 4 groups"), "{err}");

        assert!(parse_irma("").is_err());
        assert!(parse_irma("11é1-127-700-500").is_err());
    }

    proptest! {
        #[test]
        fn display_round_trips(s in "[0-9a-z*]{4}-[0-9a-z*]{3}-[0-9a-z*]{3}-[0-9a-z*]{3}") {
            let c = parse_irma(&s).unwrap();
            prop_assert_eq!(c.to_string(), s.clone());
            prop_assert_eq!(parse_irma(&c.to_string()).unwrap(), c);
        }
    }
}
