//! Ring configurations and their orbits under rotation and reflection.
//!
//! A configuration of `n` players is stored as an `n`-bit integer whose most
//! significant bit is player 1, so the string `x1 x2 .. xn` read in binary is
//! the integer value. Orbits are labelled by their numerically smallest member.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_PLAYERS: u32 = 3;
/// States fit in one `u32`.
pub const MAX_PLAYERS: u32 = 32;

/// Win/loss status of every player on the ring; bit value 1 means winner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RingState {
    bits: u32,
    n: u32,
}

impl RingState {
    pub fn new(bits: u32, n: u32) -> Result<Self> {
        check_ring_size(n)?;
        if n < 32 && bits >> n != 0 {
            return Err(Error::Invalid(format!("state {bits} has more than {n} bits")));
        }
        Ok(Self { bits, n })
    }

    /// Parses a `0`/`1` string such as `"010"`, player 1 first.
    pub fn parse(s: &str) -> Result<Self> {
        let n = s.len() as u32;
        check_ring_size(n)?;
        let mut bits = 0u32;
        for c in s.chars() {
            bits = (bits << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::Invalid(format!("bad state string {s:?}"))),
                };
        }
        Ok(Self { bits, n })
    }

    pub(crate) const fn from_raw(bits: u32, n: u32) -> Self {
        Self { bits, n }
    }

    pub fn zeros(n: u32) -> Result<Self> {
        Self::new(0, n)
    }

    pub fn ones(n: u32) -> Result<Self> {
        check_ring_size(n)?;
        Ok(Self { bits: mask(n), n })
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn n(self) -> u32 {
        self.n
    }

    #[inline]
    fn shift(self, player: usize) -> u32 {
        self.n - player as u32
    }

    /// Status of player `player` (1-based), wrapping around the ring.
    #[inline]
    pub fn get(self, player: usize) -> bool {
        let n = self.n as usize;
        let i = (player + n - 1) % n + 1;
        (self.bits >> self.shift(i)) & 1 == 1
    }

    /// The configuration with player `player` (1-based) toggled.
    #[inline]
    pub fn flip(self, player: usize) -> Self {
        Self { bits: self.bits ^ (1 << self.shift(player)), n: self.n }
    }

    #[inline]
    pub fn set(self, player: usize, win: bool) -> Self {
        if self.get(player) == win {
            self
        } else {
            self.flip(player)
        }
    }

    /// `2 * x[i-1] + x[i+1]`: which of the four game-B coins player `player` tosses.
    #[inline]
    pub fn neighbor_code(self, player: usize) -> usize {
        2 * self.get(player + self.n as usize - 1) as usize + self.get(player + 1) as usize
    }

    pub fn ones_count(self) -> u32 {
        self.bits.count_ones()
    }

    /// Componentwise complement.
    pub fn complement(self) -> Self {
        Self { bits: !self.bits & mask(self.n), n: self.n }
    }

    /// `(x2, .., xn, x1)`.
    pub fn rotate(self) -> Self {
        let n = self.n;
        let top = (self.bits >> (n - 1)) & 1;
        Self { bits: ((self.bits << 1) & mask(n)) | top, n }
    }

    /// `(xn, .., x1)`.
    pub fn reflect(self) -> Self {
        Self { bits: self.bits.reverse_bits() >> (32 - self.n), n: self.n }
    }

    /// All group images, with repetition, in a fixed order.
    pub fn images(self, sym: Symmetry) -> impl Iterator<Item = RingState> {
        let n = self.n as usize;
        let reflected = match sym {
            Symmetry::Cyclic => None,
            Symmetry::Dihedral => Some(self.reflect()),
        };
        let rotations = std::iter::successors(Some(self), |s| Some(s.rotate())).take(n);
        let mirrored = reflected
            .into_iter()
            .flat_map(move |r| std::iter::successors(Some(r), |s| Some(s.rotate())).take(n));
        rotations.chain(mirrored)
    }
}

impl fmt::Display for RingState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.n as usize)
    }
}

#[inline]
fn mask(n: u32) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

pub(crate) fn check_ring_size(n: u32) -> Result<()> {
    if (MIN_PLAYERS..=MAX_PLAYERS).contains(&n) {
        Ok(())
    } else {
        Err(Error::RingSize { n, min: MIN_PLAYERS, max: MAX_PLAYERS })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    /// Rotations only; valid for any parameters.
    Cyclic,
    /// Rotations and reflections; only valid when `p1 = p2`.
    Dihedral,
}

impl Symmetry {
    pub fn group_order(self, n: u32) -> usize {
        match self {
            Symmetry::Cyclic => n as usize,
            Symmetry::Dihedral => 2 * n as usize,
        }
    }
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symmetry::Cyclic => "cyclic",
            Symmetry::Dihedral => "dihedral",
        })
    }
}

impl std::str::FromStr for Symmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cyclic" => Ok(Symmetry::Cyclic),
            "dihedral" => Ok(Symmetry::Dihedral),
            _ => Err(Error::Invalid(format!("unknown symmetry {s:?}"))),
        }
    }
}

/// The orbit member with the smallest integer value.
pub fn canonical_form(x: RingState, sym: Symmetry) -> RingState {
    let bits = x.images(sym).map(RingState::bits).min().unwrap_or(x.bits);
    RingState { bits, n: x.n }
}

/// One orbit of the group action on `{0,1}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivClass {
    pub canonical: RingState,
    pub orbit_size: usize,
    /// Sorted ascending.
    pub members: Vec<RingState>,
    pub ones_count: u32,
}

impl EquivClass {
    pub fn of(x: RingState, sym: Symmetry) -> Self {
        let mut members: Vec<RingState> = x.images(sym).collect();
        members.sort_unstable();
        members.dedup();
        Self {
            canonical: members[0],
            orbit_size: members.len(),
            ones_count: x.ones_count(),
            members,
        }
    }
}

/// All orbits, sorted by canonical value.
pub fn enumerate_classes(n: u32, sym: Symmetry) -> Result<Vec<EquivClass>> {
    Ok(canonical_states(n, sym)?.into_iter().map(|x| EquivClass::of(x, sym)).collect())
}

/// Canonical representatives only, sorted ascending.
pub fn canonical_states(n: u32, sym: Symmetry) -> Result<Vec<RingState>> {
    check_ring_size(n)?;
    let top = 1u64 << n;
    Ok((0..top)
        .map(|b| RingState::from_raw(b as u32, n))
        .filter(|&x| canonical_form(x, sym) == x)
        .collect())
}

/// Number of orbits via the necklace (cyclic) and bracelet (dihedral)
/// totient formulas; no enumeration. Supports `3 <= n <= 126`.
pub fn count_classes(n: u32, sym: Symmetry) -> Result<u128> {
    if !(MIN_PLAYERS..=126).contains(&n) {
        return Err(Error::RingSize { n, min: MIN_PLAYERS, max: 126 });
    }
    let necklaces = (1..=n)
        .filter(|d| n % d == 0)
        .map(|d| totient(d) as u128 * (1u128 << (n / d)))
        .sum::<u128>()
        / n as u128;
    Ok(match sym {
        Symmetry::Cyclic => necklaces,
        Symmetry::Dihedral if n % 2 == 1 => (necklaces + (1u128 << n.div_ceil(2))) / 2,
        Symmetry::Dihedral => (necklaces + 3 * (1u128 << (n / 2 - 1))) / 2,
    })
}

pub fn totient(mut n: u32) -> u32 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}
