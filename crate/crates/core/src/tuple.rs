//! Residue tuples: the linear characters of the base group `A = C_p^p`.
//!
//! The tuple `(i_1, ..., i_p)` stands for `lambda^{i_1} x ... x lambda^{i_p}`,
//! where `lambda` is the character of `C_p` sending the generator to
//! `zeta = exp(2 pi i / p)`. The top group `C_p` acts by cyclic rotation, so a
//! rotation class of tuples is a conjugacy class of characters of `A`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::prime::Prime;

/// A linear character of the base group, as `p` residues mod `p`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tuple {
    p: Prime,
    entries: Vec<u32>,
}

impl Tuple {
    pub fn new(p: Prime, entries: Vec<u32>) -> Result<Self> {
        if entries.len() != p.as_usize() {
            return Err(Error::LengthMismatch {
                expected: p.as_usize(),
                found: entries.len(),
            });
        }
        if let Some(&bad) = entries.iter().find(|&&e| e >= p.get()) {
            return Err(Error::ResidueOutOfRange {
                value: bad as u64,
                p: p.get(),
            });
        }
        Ok(Tuple { p, entries })
    }

    /// Builds a tuple from arbitrary integers, reducing each mod `p`.
    pub fn reduced<I: IntoIterator<Item = i64>>(p: Prime, values: I) -> Result<Self> {
        let m = p.get() as i64;
        let entries = values
            .into_iter()
            .map(|v| v.rem_euclid(m) as u32)
            .collect();
        Tuple::new(p, entries)
    }

    /// Parses `"1,0,0,0,0"`; `p` is the number of entries and must be prime.
    pub fn parse(s: &str) -> Result<Self> {
        let values = parse_residues(s)?;
        let p = Prime::new(values.len() as u64).map_err(|_| Error::Parse {
            input: s.to_string(),
            reason: format!("length {} is not prime", values.len()),
        })?;
        Tuple::from_parsed(p, values)
    }

    /// Parses a tuple that must have exactly `p` entries.
    pub fn parse_for(s: &str, p: Prime) -> Result<Self> {
        let values = parse_residues(s)?;
        if values.len() != p.as_usize() {
            return Err(Error::LengthMismatch {
                expected: p.as_usize(),
                found: values.len(),
            });
        }
        Tuple::from_parsed(p, values)
    }

    fn from_parsed(p: Prime, values: Vec<u64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|&&v| v >= p.get() as u64) {
            return Err(Error::ResidueOutOfRange { value: bad, p: p.get() });
        }
        Tuple::new(p, values.into_iter().map(|v| v as u32).collect())
    }

    pub fn zero(p: Prime) -> Self {
        Tuple::constant(p, 0)
    }

    pub fn constant(p: Prime, c: u32) -> Self {
        Tuple {
            p,
            entries: vec![c % p.get(); p.as_usize()],
        }
    }

    /// The tuple with a single `1` at `index` (mod p).
    pub fn unit(p: Prime, index: usize) -> Self {
        let mut entries = vec![0; p.as_usize()];
        entries[index % p.as_usize()] = 1;
        Tuple { p, entries }
    }

    #[inline]
    pub fn p(&self) -> Prime {
        self.p
    }

    #[inline]
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<u32> {
        self.entries
    }

    /// `Some(c)` if every entry equals `c`.
    pub fn constant_value(&self) -> Option<u32> {
        let first = self.entries[0];
        self.entries.iter().all(|&e| e == first).then_some(first)
    }

    pub fn is_constant(&self) -> bool {
        self.constant_value().is_some()
    }

    /// Entry sum mod p.
    pub fn sum(&self) -> u32 {
        residue_sum(&self.entries, self.p.get())
    }

    /// Rotation by `shift` places to the right: entry `j` moves to `j + shift`.
    pub fn rotate(&self, shift: usize) -> Tuple {
        let n = self.entries.len();
        let s = shift % n;
        let mut entries = Vec::with_capacity(n);
        entries.extend_from_slice(&self.entries[n - s..]);
        entries.extend_from_slice(&self.entries[..n - s]);
        Tuple { p: self.p, entries }
    }

    /// The `p` rotations in shift order, starting with `self`. These are the
    /// constituents of the restriction to `A` of the induced character.
    pub fn rotations(&self) -> Vec<Tuple> {
        (0..self.entries.len()).map(|s| self.rotate(s)).collect()
    }

    /// Lexicographically least rotation.
    pub fn canonical_rotation(&self) -> OrbitRep {
        let start = least_rotation_start(&self.entries);
        let n = self.entries.len();
        let entries = (0..n).map(|m| self.entries[(start + m) % n]).collect();
        OrbitRep(Tuple { p: self.p, entries })
    }

    /// True iff the tuple is non-constant, i.e. its induced character is irreducible.
    pub fn is_irreducible_inducing(&self) -> bool {
        !self.is_constant()
    }

    /// True iff the induced (irreducible) character is faithful: entry sum `!= 0 mod p`.
    /// Constant tuples are rejected since their induced characters are reducible.
    pub fn is_faithful_inducing(&self) -> Result<bool> {
        if self.is_constant() {
            return Err(Error::ConstantTuple(self.to_string()));
        }
        Ok(self.sum() != 0)
    }

    /// Componentwise sum: the product of the two linear characters.
    pub fn add(&self, other: &Tuple) -> Result<Tuple> {
        self.same_prime(other)?;
        let p = self.p.get();
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| (a + b) % p)
            .collect();
        Ok(Tuple { p: self.p, entries })
    }

    /// Componentwise negation: the complex conjugate character.
    pub fn neg(&self) -> Tuple {
        let p = self.p.get();
        let entries = self.entries.iter().map(|&a| (p - a) % p).collect();
        Tuple { p: self.p, entries }
    }

    /// Multiplies every entry by the unit `k` mod p (a Galois conjugation).
    pub fn scale(&self, k: u64) -> Result<Tuple> {
        let p = self.p.get();
        let k = (k % p as u64) as u32;
        if k == 0 {
            return Err(Error::NotAUnit { k: k as u64, p });
        }
        let entries = self
            .entries
            .iter()
            .map(|&a| ((a as u64 * k as u64) % p as u64) as u32)
            .collect();
        Ok(Tuple { p: self.p, entries })
    }

    pub(crate) fn same_prime(&self, other: &Tuple) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch {
                left: self.p.get(),
                right: other.p.get(),
            });
        }
        Ok(())
    }
}

fn parse_residues(s: &str) -> Result<Vec<u64>> {
    let parse_err = |reason: String| Error::Parse {
        input: s.to_string(),
        reason,
    };
    let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
    if trimmed.is_empty() {
        return Err(parse_err("empty tuple".into()));
    }
    trimmed
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|e| parse_err(format!("{:?}: {e}", part.trim())))
        })
        .collect()
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for Tuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Tuple::parse(s)
    }
}

impl Serialize for Tuple {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Tuple {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Tuple::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// A tuple in canonical form: the least of its `p` rotations. One `OrbitRep`
/// names one conjugacy class of characters of `A`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbitRep(Tuple);

impl OrbitRep {
    /// Accepts a tuple that is already canonical.
    pub fn new(t: Tuple) -> Result<Self> {
        if t.canonical_rotation().0 != t {
            return Err(Error::NotCanonical(t.to_string()));
        }
        Ok(OrbitRep(t))
    }

    /// Canonicalizes `t`.
    pub fn of(t: &Tuple) -> Self {
        t.canonical_rotation()
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(OrbitRep::of(&Tuple::parse(s)?))
    }

    #[inline]
    pub fn tuple(&self) -> &Tuple {
        &self.0
    }

    pub fn into_tuple(self) -> Tuple {
        self.0
    }

    #[inline]
    pub fn p(&self) -> Prime {
        self.0.p
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_constant()
    }

    /// Fails with [`Error::ConstantTuple`] unless the class induces irreducibly.
    pub fn require_irreducible(&self) -> Result<()> {
        if self.is_constant() {
            return Err(Error::ConstantTuple(self.to_string()));
        }
        Ok(())
    }

    /// Canonical class of `k * self`.
    pub fn scale(&self, k: u64) -> Result<OrbitRep> {
        Ok(self.0.scale(k)?.canonical_rotation())
    }
}

impl fmt::Display for OrbitRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for OrbitRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0)
    }
}

impl Serialize for OrbitRep {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrbitRep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let t = Tuple::deserialize(d)?;
        OrbitRep::new(t).map_err(serde::de::Error::custom)
    }
}

/// Start index of the lexicographically least rotation of `s`, in `O(n)`.
///
/// Two-candidate scan: `i` and `j` are competing start positions and `k` the
/// length of their common prefix. On a mismatch the loser, along with the
/// `k` positions after it, can never start the minimum.
pub fn least_rotation_start<T: Ord>(s: &[T]) -> usize {
    let n = s.len();
    if n < 2 {
        return 0;
    }
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = &s[(i + k) % n];
        let b = &s[(j + k) % n];
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j)
}

#[inline]
pub(crate) fn residue_sum(entries: &[u32], p: u32) -> u32 {
    (entries.iter().map(|&e| e as u64).sum::<u64>() % p as u64) as u32
}
