//! Exact scalars: prime fields of odd characteristic and the rationals.

use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, Zero};

use crate::error::{Error, Result};

/// An exact scalar of characteristic other than two.
///
/// Everything in the crate is generic over this trait. Elements have a
/// unique canonical representative, so derived equality and hashing are
/// mathematical equality.
pub trait Scalar:
    Num + Neg<Output = Self> + Clone + fmt::Debug + fmt::Display + Eq + Hash + Ord + Send + Sync + 'static
{
    /// 0 for the rationals, otherwise the prime.
    fn characteristic() -> u64;

    fn from_i64(v: i64) -> Self;

    /// Multiplicative inverse, `None` for zero.
    fn inv(&self) -> Option<Self>;

    /// Parse the canonical text form written by `Display`.
    fn parse_canonical(s: &str) -> Result<Self>;

    /// All elements in canonical order, for finite fields only.
    fn elements() -> Option<Vec<Self>>;

    /// Whether the element is a nonzero square. Only meaningful for finite
    /// fields, where it is decided by Euler's criterion.
    fn is_nonzero_square(&self) -> bool;

    /// A generator of the multiplicative group (finite fields only).
    fn primitive_root() -> Option<Self>;

    /// Some square root, if the element is a square in the field.
    fn sqrt(&self) -> Option<Self>;

    /// Position of the element in `elements()`, for finite fields only.
    fn to_index(&self) -> Option<u64>;

    fn half() -> Self {
        Self::from_i64(2).inv().expect("characteristic is not 2")
    }
}

pub const fn is_odd_prime(p: u32) -> bool {
    if p < 3 || p.is_multiple_of(2) {
        return false;
    }
    let mut k = 3;
    while k * k <= p {
        if p.is_multiple_of(k) {
            return false;
        }
        k += 2;
    }
    true
}

/// An element of GF(P). The modulus is a type parameter so arithmetic is
/// branch-free and mixing fields is a type error.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fp<const P: u32>(u32);

impl<const P: u32> Fp<P> {
    const CHECK: () = assert!(is_odd_prime(P), "GF(p) requires an odd prime p");

    pub fn new(v: i64) -> Self {
        #[allow(clippy::let_unit_value)]
        let _ = Self::CHECK;
        Fp(v.rem_euclid(P as i64) as u32)
    }

    pub fn value(self) -> u32 {
        self.0
    }

    fn pow(self, mut e: u64) -> Self {
        let mut base = self;
        let mut acc = Fp::new(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl<const P: u32> fmt::Debug for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u32> fmt::Display for Fp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u32> Add for Fp<P> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let s = self.0 + o.0;
        Fp(if s >= P { s - P } else { s })
    }
}

impl<const P: u32> Sub for Fp<P> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Fp(if self.0 >= o.0 { self.0 - o.0 } else { self.0 + P - o.0 })
    }
}

impl<const P: u32> Mul for Fp<P> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Fp(((self.0 as u64 * o.0 as u64) % P as u64) as u32)
    }
}

impl<const P: u32> Div for Fp<P> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.inv().expect("division by zero in GF(p)")
    }
}

impl<const P: u32> Rem for Fp<P> {
    type Output = Self;
    fn rem(self, _o: Self) -> Self {
        Fp(0)
    }
}

impl<const P: u32> Neg for Fp<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Fp(if self.0 == 0 { 0 } else { P - self.0 })
    }
}

impl<const P: u32> Zero for Fp<P> {
    fn zero() -> Self {
        Fp::new(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl<const P: u32> One for Fp<P> {
    fn one() -> Self {
        Fp::new(1)
    }
}

impl<const P: u32> Num for Fp<P> {
    type FromStrRadixErr = std::num::ParseIntError;
    fn from_str_radix(s: &str, radix: u32) -> std::result::Result<Self, Self::FromStrRadixErr> {
        i64::from_str_radix(s, radix).map(Fp::new)
    }
}

impl<const P: u32> Scalar for Fp<P> {
    fn characteristic() -> u64 {
        P as u64
    }

    fn from_i64(v: i64) -> Self {
        Fp::new(v)
    }

    fn inv(&self) -> Option<Self> {
        if self.0 == 0 {
            None
        } else {
            Some(self.pow(P as u64 - 2))
        }
    }

    fn parse_canonical(s: &str) -> Result<Self> {
        let v: u32 = s
            .parse()
            .map_err(|_| Error::Parse(format!("bad GF({P}) entry {s:?}")))?;
        if v >= P {
            return Err(Error::Parse(format!("entry {v} is not canonical in GF({P})")));
        }
        Ok(Fp(v))
    }

    fn elements() -> Option<Vec<Self>> {
        Some((0..P).map(|v| Fp::new(v as i64)).collect())
    }

    fn is_nonzero_square(&self) -> bool {
        self.0 != 0 && self.pow((P as u64 - 1) / 2).0 == 1
    }

    fn primitive_root() -> Option<Self> {
        let order = P as u64 - 1;
        let mut factors = Vec::new();
        let mut m = order;
        let mut f = 2;
        while f * f <= m {
            if m.is_multiple_of(f) {
                factors.push(f);
                while m.is_multiple_of(f) {
                    m /= f;
                }
            }
            f += 1;
        }
        if m > 1 {
            factors.push(m);
        }
        (2..P as i64)
            .map(Fp::new)
            .find(|g: &Fp<P>| factors.iter().all(|q| g.pow(order / q).0 != 1))
    }

    fn sqrt(&self) -> Option<Self> {
        (0..P).map(Fp).find(|r| *r * *r == *self)
    }

    fn to_index(&self) -> Option<u64> {
        Some(self.0 as u64)
    }
}

/// The rationals with arbitrary-precision numerator and denominator.
pub type Rational = BigRational;

impl Scalar for BigRational {
    fn characteristic() -> u64 {
        0
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }

    fn parse_canonical(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad rational entry {s:?}"));
        let q = match s.split_once('/') {
            Some((a, b)) => {
                let a: BigInt = a.parse().map_err(|_| bad())?;
                let b: BigInt = b.parse().map_err(|_| bad())?;
                if b.is_zero() || b.is_negative() {
                    return Err(bad());
                }
                let q = BigRational::new(a.clone(), b.clone());
                if *q.numer() != a || *q.denom() != b || b.is_one() {
                    return Err(Error::Parse(format!("rational entry {s:?} is not in lowest terms")));
                }
                q
            }
            None => BigRational::from_integer(s.parse().map_err(|_| bad())?),
        };
        Ok(q)
    }

    fn elements() -> Option<Vec<Self>> {
        None
    }

    fn is_nonzero_square(&self) -> bool {
        if self.is_zero() || self.is_negative() {
            return false;
        }
        let sq = |x: &BigInt| {
            let r = x.sqrt();
            &r * &r == *x
        };
        sq(self.numer()) && sq(self.denom())
    }

    fn primitive_root() -> Option<Self> {
        None
    }

    fn sqrt(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(self.clone());
        }
        if !self.is_nonzero_square() {
            return None;
        }
        Some(BigRational::new(self.numer().sqrt(), self.denom().sqrt()))
    }

    fn to_index(&self) -> Option<u64> {
        None
    }
}

/// Field descriptor written into matrix files: the prime, or 0 for the rationals.
pub fn descriptor<T: Scalar>() -> u64 {
    T::characteristic()
}

pub type Gf3 = Fp<3>;
pub type Gf5 = Fp<5>;
pub type Gf7 = Fp<7>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf3_half_is_two() {
        assert_eq!(Gf3::half(), Gf3::new(2));
        assert_eq!(-Gf3::half(), Gf3::new(1));
    }

    #[test]
    fn inverses_in_gf7() {
        for v in 1..7 {
            let x = Gf7::new(v);
            assert_eq!(x * x.inv().unwrap(), Gf7::one());
        }
        assert!(Gf7::zero().inv().is_none());
    }

    #[test]
    fn squares_mod_seven() {
        let squares: Vec<u32> = Gf7::elements()
            .unwrap()
            .into_iter()
            .filter(|x| x.is_nonzero_square())
            .map(|x| x.value())
            .collect();
        assert_eq!(squares, vec![1, 2, 4]);
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(Gf3::primitive_root(), Some(Gf3::new(2)));
        assert_eq!(Gf5::primitive_root(), Some(Gf5::new(2)));
        assert_eq!(Gf7::primitive_root(), Some(Gf7::new(3)));
    }

    #[test]
    fn rational_text_round_trip() {
        for s in ["0", "-3", "1/2", "-7/4"] {
            let q = Rational::parse_canonical(s).unwrap();
            assert_eq!(q.to_string(), s);
        }
        assert!(Rational::parse_canonical("2/4").is_err());
        assert!(Rational::parse_canonical("3/1").is_err());
    }

    #[test]
    fn gf_parse_rejects_noncanonical() {
        assert!(Gf5::parse_canonical("5").is_err());
        assert_eq!(Gf5::parse_canonical("4").unwrap(), Gf5::new(-1));
    }

    #[test]
    fn odd_prime_check() {
        assert!(!is_odd_prime(2));
        assert!(is_odd_prime(3));
        assert!(!is_odd_prime(9));
        assert!(is_odd_prime(101));
    }
}
