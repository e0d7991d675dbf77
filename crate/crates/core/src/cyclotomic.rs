//! Exact arithmetic in `Z[zeta_p]`, generic over the integer coefficient type.
//!
//! Values are coefficient vectors of length `p` over the basis
//! `1, zeta, ..., zeta^{p-1}`. Since `1 + zeta + ... + zeta^{p-1} = 0`, a
//! vector and the same vector shifted by a constant denote the same value;
//! the canonical form subtracts the minimum coefficient, so equality of
//! values is equality of canonical vectors.

use std::fmt;

use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::prime::Prime;

/// Integer types usable as cyclotomic coefficients (`i64`, `i128`, `BigInt`, ...).
pub trait Coefficient:
    Clone
    + Ord
    + fmt::Debug
    + fmt::Display
    + Integer
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
{
}

impl<T> Coefficient for T where
    T: Clone
        + Ord
        + fmt::Debug
        + fmt::Display
        + Integer
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
{
}

pub(crate) fn coeff<C: Coefficient>(n: u64) -> Result<C> {
    C::from_u64(n).ok_or(Error::Overflow)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CyclotomicInt<C> {
    p: Prime,
    coeffs: Vec<C>,
}

impl<C: Coefficient> CyclotomicInt<C> {
    /// Canonicalizes an arbitrary coefficient vector of length `p`.
    pub fn from_coeffs(p: Prime, coeffs: Vec<C>) -> Result<Self> {
        if coeffs.len() != p.as_usize() {
            return Err(Error::LengthMismatch {
                expected: p.as_usize(),
                found: coeffs.len(),
            });
        }
        let mut v = CyclotomicInt { p, coeffs };
        v.canonicalize()?;
        Ok(v)
    }

    pub fn zero(p: Prime) -> Self {
        CyclotomicInt {
            p,
            coeffs: vec![C::zero(); p.as_usize()],
        }
    }

    pub fn one(p: Prime) -> Self {
        Self::zeta_pow(p, 0)
    }

    /// `zeta^e`, exponent taken mod p.
    pub fn zeta_pow(p: Prime, e: u64) -> Self {
        let mut coeffs = vec![C::zero(); p.as_usize()];
        coeffs[(e % p.get() as u64) as usize] = C::one();
        CyclotomicInt { p, coeffs }
    }

    pub fn from_integer(p: Prime, n: C) -> Result<Self> {
        let mut coeffs = vec![C::zero(); p.as_usize()];
        coeffs[0] = n;
        Self::from_coeffs(p, coeffs)
    }

    #[inline]
    pub fn p(&self) -> Prime {
        self.p
    }

    /// Canonical coefficients (minimum entry is zero).
    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The rational integer this value equals, if it is one.
    pub fn to_integer(&self) -> Option<C> {
        let rest = &self.coeffs[1..];
        let v = rest.first()?.clone();
        if rest.iter().any(|c| *c != v) {
            return None;
        }
        self.coeffs[0].checked_sub(&v)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.checked_add(b).ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()?;
        Self::from_coeffs(self.p, coeffs)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.checked_sub(b).ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()?;
        Self::from_coeffs(self.p, coeffs)
    }

    /// Product via cyclic convolution: `zeta^i * zeta^j = zeta^{(i+j) mod p}`.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_prime(other)?;
        let n = self.p.as_usize();
        let mut coeffs = vec![C::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let term = a.checked_mul(b).ok_or(Error::Overflow)?;
                let slot = &mut coeffs[(i + j) % n];
                *slot = slot.checked_add(&term).ok_or(Error::Overflow)?;
            }
        }
        Self::from_coeffs(self.p, coeffs)
    }

    pub fn try_scale(&self, k: &C) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| a.checked_mul(k).ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()?;
        Self::from_coeffs(self.p, coeffs)
    }

    /// Complex conjugation, `zeta^i -> zeta^{-i}`.
    pub fn conj(&self) -> Self {
        let n = self.p.as_usize();
        let coeffs = (0..n).map(|i| self.coeffs[(n - i) % n].clone()).collect();
        // a permutation of a canonical vector is canonical
        CyclotomicInt { p: self.p, coeffs }
    }

    fn same_prime(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch {
                left: self.p.get(),
                right: other.p.get(),
            });
        }
        Ok(())
    }

    fn canonicalize(&mut self) -> Result<()> {
        let min = self.coeffs.iter().min().cloned().unwrap_or_else(C::zero);
        if !min.is_zero() {
            for c in &mut self.coeffs {
                *c = c.checked_sub(&min).ok_or(Error::Overflow)?;
            }
        }
        Ok(())
    }
}

impl<C: Coefficient> fmt::Display for CyclotomicInt<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.to_integer() {
            return write!(f, "{n}");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match (i, c.is_one()) {
                (0, _) => write!(f, "{c}")?,
                (_, true) => write!(f, "z^{i}")?,
                (_, false) => write!(f, "{c}*z^{i}")?,
            }
        }
        Ok(())
    }
}

impl<C: Coefficient> fmt::Debug for CyclotomicInt<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CyclotomicInt<p={}>({self})", self.p)
    }
}
