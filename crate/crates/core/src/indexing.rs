//! Canonical orders on endpoint strings and remainder masks.
//!
//! Endpoint strings are injective sequences of 1-based wall positions, listed
//! in ascending lexicographic order. Remainder masks are bit strings over the
//! wall positions an endpoint string leaves unused, listed in *descending*
//! lexicographic order, so the complement of the `s`-th mask is the `s`-th mask
//! from the end.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Ordered path endpoints as 1-based wall positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EndpointString(Vec<usize>);

impl EndpointString {
    pub fn new(positions: Vec<usize>) -> Self {
        EndpointString(positions)
    }

    pub fn positions(&self) -> &[usize] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// Whether the entries are distinct and lie in `1..=wall_size`.
    pub fn fits(&self, wall_size: usize) -> bool {
        let mut seen = 0u64;
        for &p in &self.0 {
            if p == 0 || p > wall_size || p > 64 || seen & (1 << (p - 1)) != 0 {
                return false;
            }
            seen |= 1 << (p - 1);
        }
        true
    }

    /// Wall positions not named by this string, ascending.
    pub fn remaining(&self, wall_size: usize) -> Vec<usize> {
        (1..=wall_size).filter(|p| !self.0.contains(p)).collect()
    }

    /// Right rotation by `z` (taken mod k).
    pub fn shift(&self, z: usize) -> EndpointString {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let k = v.len();
            v.rotate_right(z % k);
        }
        EndpointString(v)
    }

    /// Whether the positions are strictly increasing.
    pub fn is_sorted(&self) -> bool {
        self.0.windows(2).all(|w| w[0] < w[1])
    }
}

impl fmt::Display for EndpointString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.0.iter().any(|&p| p > 9);
        for (i, p) in self.0.iter().enumerate() {
            if wide && i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// A bit string; bit `i` (from the left) addresses the `i`-th remaining wall
/// position in ascending order. `1` means covered inside this tile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RemainderMask {
    len: usize,
    // leftmost character is the most significant bit
    value: u64,
}

impl RemainderMask {
    pub fn new(len: usize, value: u64) -> Self {
        assert!(len < 64, "mask too long");
        assert!(value >> len == 0, "mask value out of range");
        RemainderMask { len, value }
    }

    pub fn empty() -> Self {
        RemainderMask { len: 0, value: 0 }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        RemainderMask::new(bits.len(), value)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    /// Bit `i`, counted from the left.
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len);
        (self.value >> (self.len - 1 - i)) & 1 == 1
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.bit(i)).collect()
    }

    pub fn flip(&self) -> RemainderMask {
        let full = if self.len == 0 { 0 } else { (1u64 << self.len) - 1 };
        RemainderMask { len: self.len, value: !self.value & full }
    }
}

impl fmt::Display for RemainderMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("ε");
        }
        for i in 0..self.len {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for RemainderMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "ε" || s.is_empty() {
            return Ok(RemainderMask::empty());
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::format("remainder mask", format!("unexpected character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if bits.len() >= 64 {
            return Err(Error::format("remainder mask", "longer than 63 bits"));
        }
        Ok(RemainderMask::from_bits(&bits))
    }
}

fn check_k(wall_size: usize, k: usize) -> Result<()> {
    if k == 0 || k > wall_size {
        Err(Error::InvalidK { k, max: wall_size })
    } else {
        Ok(())
    }
}

/// n · (n−1) ⋯ (n−r+1)
fn falling(n: usize, r: usize) -> usize {
    (0..r).map(|i| n - i).product()
}

/// All injective k-strings over a wall of the given size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EndpointFamily {
    wall_size: usize,
    k: usize,
}

impl EndpointFamily {
    pub fn new(wall_size: usize, k: usize) -> Result<Self> {
        check_k(wall_size, k)?;
        Ok(EndpointFamily { wall_size, k })
    }

    pub fn wall_size(&self) -> usize {
        self.wall_size
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// C(wall_size, k) · k!
    pub fn len(&self) -> usize {
        falling(self.wall_size, self.k)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, b: &EndpointString) -> bool {
        b.k() == self.k && b.fits(self.wall_size)
    }

    pub fn rank(&self, b: &EndpointString) -> Result<usize> {
        if !self.contains(b) {
            return Err(Error::NotInFamily(format!(
                "endpoint string {b} (wall {}, k {})",
                self.wall_size, self.k
            )));
        }
        let mut used = 0u64;
        let mut rank = 0;
        for (j, &p) in b.positions().iter().enumerate() {
            let below = (1..p).filter(|&q| used & (1 << (q - 1)) == 0).count();
            rank += below * falling(self.wall_size - j - 1, self.k - j - 1);
            used |= 1 << (p - 1);
        }
        Ok(rank)
    }

    pub fn unrank(&self, mut index: usize) -> Result<EndpointString> {
        if index >= self.len() {
            return Err(Error::NotInFamily(format!(
                "index {index} (family of {} endpoint strings)",
                self.len()
            )));
        }
        let mut free: Vec<usize> = (1..=self.wall_size).collect();
        let mut out = Vec::with_capacity(self.k);
        for j in 0..self.k {
            let block = falling(self.wall_size - j - 1, self.k - j - 1);
            out.push(free.remove(index / block));
            index %= block;
        }
        Ok(EndpointString(out))
    }

    /// Every member in ascending lexicographic order.
    pub fn enumerate(&self) -> Vec<EndpointString> {
        let mut out = Vec::with_capacity(self.len());
        let mut current = Vec::with_capacity(self.k);
        self.extend(&mut current, 0, &mut out);
        out
    }

    fn extend(&self, current: &mut Vec<usize>, used: u64, out: &mut Vec<EndpointString>) {
        if current.len() == self.k {
            out.push(EndpointString(current.clone()));
            return;
        }
        for p in 1..=self.wall_size {
            if used & (1 << (p - 1)) == 0 {
                current.push(p);
                self.extend(current, used | (1 << (p - 1)), out);
                current.pop();
            }
        }
    }
}

/// All bit strings of length `wall_size − k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaskFamily {
    bits: usize,
}

impl MaskFamily {
    pub fn new(wall_size: usize, k: usize) -> Result<Self> {
        check_k(wall_size, k)?;
        Ok(MaskFamily { bits: wall_size - k })
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// 2^(wall_size − k)
    pub fn len(&self) -> usize {
        1 << self.bits
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rank(&self, mask: &RemainderMask) -> Result<usize> {
        if mask.len() != self.bits {
            return Err(Error::NotInFamily(format!("mask {mask} (expected {} bits)", self.bits)));
        }
        Ok(self.len() - 1 - mask.value() as usize)
    }

    pub fn unrank(&self, index: usize) -> Result<RemainderMask> {
        if index >= self.len() {
            return Err(Error::NotInFamily(format!("index {index} (family of {} masks)", self.len())));
        }
        Ok(RemainderMask::new(self.bits, (self.len() - 1 - index) as u64))
    }

    /// Every member in descending lexicographic order.
    pub fn enumerate(&self) -> Vec<RemainderMask> {
        (0..self.len()).map(|i| RemainderMask::new(self.bits, (self.len() - 1 - i) as u64)).collect()
    }
}

pub fn enumerate_endpoint_strings(wall_size: usize, k: usize) -> Result<Vec<EndpointString>> {
    Ok(EndpointFamily::new(wall_size, k)?.enumerate())
}

pub fn enumerate_remainder_masks(wall_size: usize, k: usize) -> Result<Vec<RemainderMask>> {
    Ok(MaskFamily::new(wall_size, k)?.enumerate())
}

pub fn flip(mask: &RemainderMask) -> RemainderMask {
    mask.flip()
}

pub fn shift(b: &EndpointString, z: usize) -> EndpointString {
    b.shift(z)
}
