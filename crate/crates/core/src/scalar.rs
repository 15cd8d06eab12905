//! Exact scalar arithmetic: arbitrary-precision rationals and prime fields.
//!
//! Every coefficient in the engine is a [`Scalar`] belonging to a [`FieldSpec`].
//! There is no floating point anywhere; all arithmetic is exact.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// The ground field: either the rationals or F_p for a prime p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldSpec {
    Rational,
    Prime(u64),
}

impl FieldSpec {
    /// Characteristic: 0 for the rationals, p for F_p.
    pub fn characteristic(&self) -> u64 {
        match self {
            FieldSpec::Rational => 0,
            FieldSpec::Prime(p) => *p,
        }
    }

    pub fn prime(p: u64) -> Result<FieldSpec, String> {
        if is_prime(p) {
            Ok(FieldSpec::Prime(p))
        } else {
            Err(format!("{p} is not prime"))
        }
    }

    pub fn zero(&self) -> Scalar {
        match self {
            FieldSpec::Rational => Scalar::Rat(BigRational::zero()),
            FieldSpec::Prime(p) => Scalar::Mod { v: 0, p: *p },
        }
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        match self {
            FieldSpec::Rational => Scalar::Rat(BigRational::from_integer(BigInt::from(n))),
            FieldSpec::Prime(p) => {
                let r = n.rem_euclid(*p as i64) as u64;
                Scalar::Mod { v: r, p: *p }
            }
        }
    }

    /// n/d as an element of the field. Fails if d vanishes in the field.
    pub fn fraction(&self, n: i64, d: i64) -> Result<Scalar, String> {
        let den = self.from_i64(d);
        if den.is_zero() {
            return Err(format!("denominator {d} vanishes in {self}"));
        }
        Ok(&self.from_i64(n) * &den.inv().unwrap())
    }

    /// (-1)^k as a scalar.
    pub fn sign(&self, k: i64) -> Scalar {
        if k.rem_euclid(2) == 0 {
            self.one()
        } else {
            self.from_i64(-1)
        }
    }

    pub fn parse(&self, s: &str) -> Result<Scalar, String> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: i128 = n.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
            let d: i128 = d.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
            if d == 0 {
                return Err("zero denominator".into());
            }
            match self {
                FieldSpec::Rational => Ok(Scalar::Rat(BigRational::new(
                    BigInt::from(n),
                    BigInt::from(d),
                ))),
                FieldSpec::Prime(_) => {
                    let dn = self.from_i64(d as i64);
                    if dn.is_zero() {
                        return Err(format!("denominator {d} vanishes mod p"));
                    }
                    Ok(&self.from_i64(n as i64) * &dn.inv().unwrap())
                }
            }
        } else {
            let n: i64 = s.parse().map_err(|_| format!("bad scalar {s:?}"))?;
            Ok(self.from_i64(n))
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rational => write!(f, "rational"),
            FieldSpec::Prime(p) => write!(f, "p={p}"),
        }
    }
}

/// An exact field element. `Mod` values carry their modulus so that plain
/// `+`/`*` work without threading a context; mixing moduli is a bug and
/// panics.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(BigRational),
    Mod { v: u64, p: u64 },
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Rat(_) => FieldSpec::Rational,
            Scalar::Mod { p, .. } => FieldSpec::Prime(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Mod { v, .. } => *v == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_one(),
            Scalar::Mod { v, .. } => *v == 1,
        }
    }

    /// Multiplicative inverse; `Err` on zero.
    pub fn inv(&self) -> Result<Scalar, String> {
        if self.is_zero() {
            return Err("division by zero".into());
        }
        match self {
            Scalar::Rat(r) => Ok(Scalar::Rat(r.recip())),
            Scalar::Mod { v, p } => Ok(Scalar::Mod {
                v: mod_inv(*v, *p),
                p: *p,
            }),
        }
    }

    /// Render in the form accepted by `FieldSpec::parse`.
    pub fn render(&self) -> String {
        match self {
            Scalar::Rat(r) => {
                if r.denom().is_one() {
                    format!("{}", r.numer())
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Mod { v, .. } => format!("{v}"),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // extended Euclid
    let (mut t, mut new_t): (i128, i128) = (0, 1);
    let (mut r, mut new_r): (i128, i128) = (p as i128, a as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert_eq!(r, 1, "not invertible mod {p}");
    t.rem_euclid(p as i128) as u64
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    // deterministic Miller-Rabin for u64
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    acc
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt, $modop:expr) => {
        impl $trait for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a $op b),
                    (Scalar::Mod { v: a, p }, Scalar::Mod { v: b, p: q }) => {
                        assert_eq!(p, q, "mixed prime fields");
                        Scalar::Mod { v: $modop(*a, *b, *p), p: *p }
                    }
                    _ => panic!("mixed scalar kinds"),
                }
            }
        }
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
    };
}

scalar_binop!(Add, add, +, |a: u64, b: u64, p: u64| (a + b) % p);
scalar_binop!(Sub, sub, -, |a: u64, b: u64, p: u64| (a + p - b) % p);
scalar_binop!(Mul, mul, *, mulmod);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rat(a) => Scalar::Rat(-a),
            Scalar::Mod { v, p } => Scalar::Mod {
                v: if *v == 0 { 0 } else { p - v },
                p: *p,
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

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = &*self + rhs;
    }
}

impl Scalar {
    /// Multiply by (-1)^k.
    pub fn times_sign(&self, k: i64) -> Scalar {
        if k.rem_euclid(2) == 0 {
            self.clone()
        } else {
            -self
        }
    }

    /// Compare magnitudes for pivot selection; prefers simple entries.
    pub fn pivot_weight(&self) -> usize {
        match self {
            Scalar::Rat(r) => r.numer().abs().to_string().len() + r.denom().to_string().len(),
            Scalar::Mod { .. } => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_arithmetic_is_exact() {
        let f = FieldSpec::Rational;
        let third = f.fraction(1, 3).unwrap();
        let sum = &(&third + &third) + &third;
        assert!(sum.is_one());
        assert_eq!(f.fraction(2, 4).unwrap().render(), "1/2");
    }

    #[test]
    fn prime_field_inverse() {
        let f = FieldSpec::prime(7).unwrap();
        for n in 1..7 {
            let x = f.from_i64(n);
            assert!((&x * &x.inv().unwrap()).is_one());
        }
        assert!(FieldSpec::prime(6).is_err());
        assert!(FieldSpec::prime(1).is_err());
    }

    #[test]
    fn division_by_zero_rejected() {
        assert!(FieldSpec::Rational.zero().inv().is_err());
        assert!(FieldSpec::Rational.fraction(1, 0).is_err());
    }

    #[test]
    fn parse_round_trip() {
        let f = FieldSpec::Rational;
        for s in ["0", "-3", "5/7", "-11/13"] {
            let x = f.parse(s).unwrap();
            assert_eq!(f.parse(&x.render()).unwrap(), x);
        }
        let g = FieldSpec::prime(101).unwrap();
        assert_eq!(g.parse("1/2").unwrap(), g.from_i64(51));
    }

    #[test]
    fn large_prime_recognised() {
        assert!(is_prime(2u64.pow(61) - 1));
        assert!(!is_prime(2u64.pow(61) - 2));
    }
}
