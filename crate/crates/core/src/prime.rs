use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A prime `p`, fixing the group `C_p wr C_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u32);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if p > u32::MAX as u64 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Prime(p as u32))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    /// `(p+1)/2` as a real number; it is an integer for odd `p`.
    pub fn half_bound(self) -> f64 {
        (self.0 as f64 + 1.0) / 2.0
    }

    /// `p^p`, the order of the base group, if it fits in a `u64`.
    pub fn base_order(self) -> Option<u64> {
        (self.0 as u64).checked_pow(self.0)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for Prime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u32(self.0)
    }
}

impl<'de> Deserialize<'de> for Prime {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let p = u64::deserialize(d)?;
        Prime::new(p).map_err(serde::de::Error::custom)
    }
}

/// Deterministic trial division; `p` never exceeds `u32::MAX` here.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes() {
        let primes: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
    }

    #[test]
    fn rejects_composites() {
        assert!(matches!(Prime::new(4), Err(Error::NotPrime(4))));
        assert!(Prime::new(1).is_err());
        assert!(Prime::new(0).is_err());
        assert!(Prime::new(91).is_err());
        assert_eq!(Prime::new(13).unwrap().get(), 13);
    }

    #[test]
    fn base_order() {
        assert_eq!(Prime::new(5).unwrap().base_order(), Some(3125));
        assert_eq!(Prime::new(7).unwrap().base_order(), Some(823_543));
        assert_eq!(Prime::new(17).unwrap().base_order(), None);
    }
}
