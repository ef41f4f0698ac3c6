use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::LinalgError;

/// The ground field of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldSpec {
    Rationals,
    PrimeField(u64),
}

impl FieldSpec {
    /// Builds `Fp`, rejecting composite or oversized moduli.
    pub fn prime(p: u64) -> Result<Self, LinalgError> {
        if p >= 1 << 32 || !is_prime(p) {
            return Err(LinalgError::NotPrime(p));
        }
        Ok(FieldSpec::PrimeField(p))
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            FieldSpec::Rationals => 0,
            FieldSpec::PrimeField(p) => *p,
        }
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match *self {
            FieldSpec::Rationals => Scalar::Small { num: n, den: 1 },
            FieldSpec::PrimeField(p) => Scalar::Mod {
                value: n.rem_euclid(p as i64) as u64,
                modulus: p,
            },
        }
    }

    /// `(-1)^k` as a scalar.
    pub fn sign(&self, k: i64) -> Scalar {
        if k.rem_euclid(2) == 0 {
            self.one()
        } else {
            self.from_i64(-1)
        }
    }

    /// Interprets `num/den` in this field.
    pub fn from_ratio(&self, num: &BigInt, den: &BigInt) -> Result<Scalar, LinalgError> {
        if den.is_zero() {
            return Err(LinalgError::ZeroDenominator);
        }
        match *self {
            FieldSpec::Rationals => Ok(Scalar::from_big(BigRational::new(num.clone(), den.clone()))),
            FieldSpec::PrimeField(p) => {
                let reduce = |x: &BigInt| -> u64 {
                    let m = BigInt::from(p);
                    (((x % &m) + &m) % &m).to_u64().unwrap_or(0)
                };
                let d = reduce(den);
                if d == 0 {
                    return Err(LinalgError::ZeroDenominator);
                }
                let n = reduce(num);
                Ok(Scalar::Mod {
                    value: n * inv_mod(d, p) % p,
                    modulus: p,
                })
            }
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "Q"),
            FieldSpec::PrimeField(p) => write!(f, "Fp {p}"),
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// An element of a [`FieldSpec`]. Rationals are kept in lowest terms with
/// positive denominator, as `Small` whenever both parts fit in an `i64`;
/// residues are kept in `0..p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Small { num: i64, den: i64 },
    Rat(BigRational),
    Mod { value: u64, modulus: u64 },
}

impl Scalar {
    fn from_big(r: BigRational) -> Scalar {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(num), Some(den)) => Scalar::Small { num, den },
            _ => Scalar::Rat(r),
        }
    }

    fn from_i128(num: i128, den: i128) -> Scalar {
        let g = num.gcd(&den);
        let (mut n, mut d) = if g > 1 { (num / g, den / g) } else { (num, den) };
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(num), Ok(den)) => Scalar::Small { num, den },
            _ => Scalar::Rat(BigRational::new(BigInt::from(n), BigInt::from(d))),
        }
    }

    fn big(&self) -> BigRational {
        match self {
            Scalar::Small { num, den } => BigRational::new_raw(BigInt::from(*num), BigInt::from(*den)),
            Scalar::Rat(r) => r.clone(),
            Scalar::Mod { .. } => panic!("scalar field mismatch: {self:?} is not rational"),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Small { num, .. } => *num == 0,
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Mod { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Small { num, den } => *num == 1 && *den == 1,
            Scalar::Rat(r) => r.is_one(),
            Scalar::Mod { value, .. } => *value == 1,
        }
    }

    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Small { .. } | Scalar::Rat(_) => FieldSpec::Rationals,
            Scalar::Mod { modulus, .. } => FieldSpec::PrimeField(*modulus),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Scalar::Small { num, den } => Scalar::from_i128(*den as i128, *num as i128),
            Scalar::Rat(r) => Scalar::from_big(r.recip()),
            Scalar::Mod { value, modulus } => Scalar::Mod {
                value: inv_mod(*value, *modulus),
                modulus: *modulus,
            },
        })
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Small { num, .. } => *num < 0,
            Scalar::Rat(r) => r.is_negative(),
            Scalar::Mod { .. } => false,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Small { num, den } => {
                if *den == 1 {
                    write!(f, "{num}")
                } else {
                    write!(f, "{num}/{den}")
                }
            }
            Scalar::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Mod { value, .. } => write!(f, "{value}"),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $small:expr, $rat:expr, $modop:expr) => {
        impl<'a> $trait<&'a Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Small { num: a, den: b }, Scalar::Small { num: c, den: d }) => {
                        let (n, d) = $small(*a as i128, *b as i128, *c as i128, *d as i128);
                        Scalar::from_i128(n, d)
                    }
                    (
                        Scalar::Mod { value: a, modulus: p },
                        Scalar::Mod { value: b, modulus: q },
                    ) if p == q => Scalar::Mod {
                        value: $modop(*a, *b, *p),
                        modulus: *p,
                    },
                    (Scalar::Mod { .. }, _) | (_, Scalar::Mod { .. }) => panic!("scalar field mismatch: {self:?} vs {rhs:?}"),
                    _ => Scalar::from_big($rat(&self.big(), &rhs.big())),
                }
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(
    Add,
    add,
    |a: i128, b: i128, c: i128, d: i128| if b == d { (a + c, b) } else { (a * d + c * b, b * d) },
    |a: &BigRational, b: &BigRational| a + b,
    |a: u64, b: u64, p: u64| (a + b) % p
);
binop!(
    Sub,
    sub,
    |a: i128, b: i128, c: i128, d: i128| if b == d { (a - c, b) } else { (a * d - c * b, b * d) },
    |a: &BigRational, b: &BigRational| a - b,
    |a: u64, b: u64, p: u64| (a + p - b) % p
);
binop!(
    Mul,
    mul,
    |a: i128, b: i128, c: i128, d: i128| (a * c, b * d),
    |a: &BigRational, b: &BigRational| a * b,
    |a: u64, b: u64, p: u64| a * b % p
);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Small { num, den } => Scalar::from_i128(-(*num as i128), *den as i128),
            Scalar::Rat(r) => Scalar::from_big(-r),
            Scalar::Mod { value, modulus } => Scalar::Mod {
                value: (modulus - value) % modulus,
                modulus: *modulus,
            },
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_arithmetic() {
        let f = FieldSpec::prime(7).unwrap();
        let a = f.from_i64(3);
        let b = f.from_i64(5);
        assert_eq!(&a + &b, f.from_i64(1));
        assert_eq!(&a - &b, f.from_i64(5));
        assert_eq!(&a * &b, f.from_i64(1));
        assert_eq!(a.inv().unwrap(), b);
        assert_eq!(f.from_i64(-1), f.from_i64(6));
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(FieldSpec::prime(9).is_err());
        assert!(FieldSpec::prime(1).is_err());
        assert!(FieldSpec::prime(2).is_ok());
    }

    #[test]
    fn rationals_lowest_terms() {
        let q = FieldSpec::Rationals;
        let x = q
            .from_ratio(&BigInt::from(2), &BigInt::from(-4))
            .unwrap();
        assert_eq!(x.to_string(), "-1/2");
        let half = q.from_ratio(&BigInt::from(1), &BigInt::from(2)).unwrap();
        assert_eq!(&x + &half, q.zero());
    }

    #[test]
    fn ratio_mod_p() {
        let f = FieldSpec::prime(5).unwrap();
        let x = f.from_ratio(&BigInt::from(1), &BigInt::from(2)).unwrap();
        assert_eq!(&x * &f.from_i64(2), f.one());
        assert!(f.from_ratio(&BigInt::from(1), &BigInt::from(10)).is_err());
    }

    #[test]
    fn small_and_big_rationals_agree() {
        let q = FieldSpec::Rationals;
        let big = q.from_i64(i64::MAX);
        let sq = &big * &big;
        assert!(matches!(sq, Scalar::Rat(_)));
        let back = &sq * &big.inv().unwrap();
        assert_eq!(back, big);
        assert!(matches!(back, Scalar::Small { .. }));
        let third = q.from_ratio(&BigInt::from(1), &BigInt::from(3)).unwrap();
        assert_eq!((&third + &third) + third.clone(), q.one());
        assert_eq!(q.from_i64(i64::MIN).inv().unwrap().to_string(), format!("-1/{}", 1u64 << 63));
        assert_eq!(-&q.from_i64(i64::MIN), &q.from_i64(i64::MAX) + &q.one());
    }
}
