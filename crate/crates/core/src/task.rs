//! Combinatorics of the game: bit strings, the complement-paired input
//! ordering, parity sets, the sign matrix and the closed-form bounds.

use std::fmt;

use serde::Serialize;

use crate::error::{PomError, Result};

pub const MAX_BITS: usize = 16;

/// An `n`-bit string. Bit 1 is the leftmost (most significant) bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: u8,
    value: u32,
}

impl BitString {
    pub fn new(len: usize, value: u32) -> Result<Self> {
        check_len(len)?;
        if (value as u64) >> len != 0 {
            return Err(PomError::OutOfRange {
                what: "bit-string value",
                value: value as usize,
                min: 0,
                max: (1usize << len) - 1,
            });
        }
        Ok(Self {
            len: len as u8,
            value,
        })
    }

    /// Parses a string of `0`/`1` characters, bit 1 first.
    pub fn parse(s: &str) -> Result<Self> {
        let mut value = 0u32;
        for ch in s.chars() {
            let bit = match ch {
                '0' => 0,
                '1' => 1,
                _ => {
                    return Err(PomError::InvalidSetup(format!("'{s}' is not a bit string")));
                }
            };
            value = (value << 1) | bit;
        }
        Self::new(s.len(), value)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Numeric value with bit 1 as the most significant bit.
    pub fn value(&self) -> u32 {
        self.value
    }

    /// Bit `y` for `y` in `1..=len`.
    pub fn bit(&self, y: usize) -> u8 {
        debug_assert!((1..=self.len()).contains(&y));
        ((self.value >> (self.len() - y)) & 1) as u8
    }

    pub fn weight(&self) -> u32 {
        self.value.count_ones()
    }

    /// `s . x = XOR_r s_r x_r`
    pub fn dot(&self, other: &BitString) -> u8 {
        ((self.value & other.value).count_ones() & 1) as u8
    }

    pub fn complement(&self) -> Self {
        Self {
            len: self.len,
            value: !self.value & ((1u32 << self.len) - 1),
        }
    }

    pub fn xor(&self, other: &BitString) -> Self {
        Self {
            len: self.len,
            value: self.value ^ other.value,
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for y in 1..=self.len() {
            write!(f, "{}", self.bit(y))?;
        }
        Ok(())
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn check_len(n: usize) -> Result<()> {
    if !(1..=MAX_BITS).contains(&n) {
        return Err(PomError::OutOfRange {
            what: "n",
            value: n,
            min: 1,
            max: MAX_BITS,
        });
    }
    Ok(())
}

fn check_at_least_two(n: usize) -> Result<()> {
    check_len(n)?;
    if n < 2 {
        return Err(PomError::OutOfRange {
            what: "n",
            value: n,
            min: 2,
            max: MAX_BITS,
        });
    }
    Ok(())
}

/// All `2^n` strings, entry `i` and entry `2^n + 1 - i` (1-based) complementary.
#[derive(Clone, Debug)]
pub struct InputOrdering {
    n: usize,
    entries: Vec<BitString>,
}

impl InputOrdering {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[BitString] {
        &self.entries
    }

    /// Entry `i`, 1-based.
    pub fn get(&self, i: usize) -> BitString {
        self.entries[i - 1]
    }

    /// The complement partner index of the 1-based index `i`.
    pub fn partner(&self, i: usize) -> usize {
        self.entries.len() + 1 - i
    }

    /// `(x^i, x^j)` for `i` in `1..=2^(n-1)`, `j = 2^n + 1 - i`.
    pub fn pairs(&self) -> impl Iterator<Item = (BitString, BitString)> + '_ {
        let half = self.entries.len() / 2;
        (0..half).map(move |k| (self.entries[k], self.entries[self.entries.len() - 1 - k]))
    }
}

/// Orders `{0,1}^n` by Hamming weight, then by numeric value.
pub fn input_ordering(n: usize) -> Result<InputOrdering> {
    check_len(n)?;
    let mut entries: Vec<BitString> = (0..1u32 << n)
        .map(|v| BitString {
            len: n as u8,
            value: v,
        })
        .collect();
    entries.sort_by_key(|b| (b.weight(), b.value));
    Ok(InputOrdering { n, entries })
}

/// All strings of Hamming weight at least 2, weight-then-value order.
pub fn parity_set(n: usize) -> Result<Vec<BitString>> {
    check_at_least_two(n)?;
    Ok(input_ordering(n)?
        .entries
        .into_iter()
        .filter(|b| b.weight() >= 2)
        .collect())
}

/// `s[i][y] = (-1)^(x^i_y)` over the first half of the input ordering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignMatrix {
    n: usize,
    signs: Vec<i8>,
}

impl SignMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.signs.len() / self.n
    }

    /// Sign for 0-based row `i` and 0-based column `y`.
    pub fn get(&self, i: usize, y: usize) -> i8 {
        self.signs[i * self.n + y]
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.signs[i * self.n..(i + 1) * self.n]
    }

    /// `sum_i s[i][y] s[i][y']`
    pub fn column_dot(&self, y: usize, yp: usize) -> i64 {
        (0..self.rows())
            .map(|i| (self.get(i, y) * self.get(i, yp)) as i64)
            .sum()
    }
}

pub fn sign_matrix(n: usize) -> Result<SignMatrix> {
    check_at_least_two(n)?;
    let ordering = input_ordering(n)?;
    let half = 1usize << (n - 1);
    let mut signs = Vec::with_capacity(half * n);
    for x in &ordering.entries[..half] {
        for y in 1..=n {
            signs.push(if x.bit(y) == 0 { 1 } else { -1 });
        }
    }
    Ok(SignMatrix { n, signs })
}

/// Closed-form success probabilities for the `n`-bit game.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BoundsRecord {
    pub n: usize,
    pub classical: f64,
    pub pnc: f64,
    pub quantum_opt: f64,
    pub algebraic_success: f64,
}

pub fn bounds(n: usize) -> Result<BoundsRecord> {
    check_at_least_two(n)?;
    let nf = n as f64;
    let classical = (nf + 1.0) / (2.0 * nf);
    Ok(BoundsRecord {
        n,
        classical,
        pnc: classical,
        quantum_opt: 0.5 * (1.0 + 1.0 / nf.sqrt()),
        algebraic_success: 1.0,
    })
}

/// Largest value any assignment can give the Bell expression: `n 2^(n-1)`.
pub fn algebraic_max(n: usize) -> Result<f64> {
    check_at_least_two(n)?;
    Ok((n * (1usize << (n - 1))) as f64)
}

/// `2^(n-1) sqrt(n)`, the quantum maximum of the Bell expression.
pub fn quantum_bell_bound(n: usize) -> f64 {
    (1u64 << (n - 1)) as f64 * (n as f64).sqrt()
}
