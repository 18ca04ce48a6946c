//! Exact arithmetic in the field Q(√2, i).
//!
//! A [`Scalar`] stores four rationals `(a, b, c, d)` denoting
//! `a + b√2 + (c + d√2)·i`. All operations are exact; there is no
//! floating-point fallback anywhere in this crate. Reality, rationality
//! and the sign of the real part are all decidable, which is what the
//! index trichotomy below relies on.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

/// Trichotomy of a Camacho-Sad index value.
///
/// `Nodal` is a positive irrational real, `RealSaddle` a negative real,
/// `ComplexSaddle` has a nonzero imaginary part. Zero and nonnegative
/// rationals fall outside the trichotomy and classify as `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexClass {
    Nodal,
    RealSaddle,
    ComplexSaddle,
}

impl fmt::Display for IndexClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexClass::Nodal => write!(f, "nodal"),
            IndexClass::RealSaddle => write!(f, "real_saddle"),
            IndexClass::ComplexSaddle => write!(f, "complex_saddle"),
        }
    }
}

/// An element `a + b√2 + (c + d√2)·i` of Q(√2, i).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub d: BigRational,
}

/// Sign of `x + y√2` without leaving Q: compare `x²` against `2y²`
/// when the terms pull in opposite directions.
fn real_quadratic_sign(x: &BigRational, y: &BigRational) -> i8 {
    let sx = sign_of(x);
    let sy = sign_of(y);
    match (sx, sy) {
        (0, 0) => 0,
        (s, 0) | (0, s) => s,
        (1, 1) => 1,
        (-1, -1) => -1,
        _ => {
            // Opposite signs: x + y√2 > 0 ⇔ the positive term dominates,
            // i.e. x² > 2y² when x > 0, and x² < 2y² when x < 0.
            let x2 = x * x;
            let y2 = BigRational::from_integer(BigInt::from(2)) * y * y;
            match x2.cmp(&y2) {
                std::cmp::Ordering::Equal => unreachable!("√2 is irrational"),
                std::cmp::Ordering::Greater => sx,
                std::cmp::Ordering::Less => -sx,
            }
        }
    }
}

fn sign_of(x: &BigRational) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Multiplication in the real subfield Q(√2): `(x1 + y1√2)(x2 + y2√2)`.
fn kmul(
    x1: &BigRational,
    y1: &BigRational,
    x2: &BigRational,
    y2: &BigRational,
) -> (BigRational, BigRational) {
    let two = BigRational::from_integer(BigInt::from(2));
    (x1 * x2 + &two * y1 * y2, x1 * y2 + y1 * x2)
}

/// Inverse in Q(√2): `1/(x + y√2) = (x − y√2)/(x² − 2y²)`.
/// The denominator is a nonzero rational whenever `(x, y) ≠ (0, 0)`.
fn kinv(x: &BigRational, y: &BigRational) -> (BigRational, BigRational) {
    let two = BigRational::from_integer(BigInt::from(2));
    let den = x * x - two * y * y;
    assert!(!den.is_zero(), "inverse of zero in Q(√2)");
    (x / &den, -(y / &den))
}

impl Scalar {
    pub fn new(a: BigRational, b: BigRational, c: BigRational, d: BigRational) -> Self {
        Scalar { a, b, c, d }
    }

    pub fn zero() -> Self {
        Scalar::from_integer(0)
    }

    pub fn one() -> Self {
        Scalar::from_integer(1)
    }

    pub fn from_integer(n: i64) -> Self {
        Scalar {
            a: BigRational::from_integer(BigInt::from(n)),
            b: BigRational::zero(),
            c: BigRational::zero(),
            d: BigRational::zero(),
        }
    }

    /// The rational `p/q`. Panics when `q = 0`.
    pub fn rational(p: i64, q: i64) -> Self {
        Scalar {
            a: BigRational::new(BigInt::from(p), BigInt::from(q)),
            b: BigRational::zero(),
            c: BigRational::zero(),
            d: BigRational::zero(),
        }
    }

    pub fn sqrt2() -> Self {
        Scalar {
            a: BigRational::zero(),
            b: BigRational::one(),
            c: BigRational::zero(),
            d: BigRational::zero(),
        }
    }

    pub fn i() -> Self {
        Scalar {
            a: BigRational::zero(),
            b: BigRational::zero(),
            c: BigRational::one(),
            d: BigRational::zero(),
        }
    }

    /// Builds `a + b√2 + (c + d√2)i` from integer coordinates.
    pub fn from_coords(a: i64, b: i64, c: i64, d: i64) -> Self {
        Scalar {
            a: BigRational::from_integer(BigInt::from(a)),
            b: BigRational::from_integer(BigInt::from(b)),
            c: BigRational::from_integer(BigInt::from(c)),
            d: BigRational::from_integer(BigInt::from(d)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    /// True exactly when the imaginary coordinates vanish.
    pub fn is_real(&self) -> bool {
        self.c.is_zero() && self.d.is_zero()
    }

    /// True exactly when the √2 and imaginary coordinates vanish.
    pub fn is_rational(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    /// Sign of the value as a real number: −1, 0 or +1.
    /// Panics when the value is not real.
    pub fn real_sign(&self) -> i8 {
        assert!(self.is_real(), "sign of a non-real scalar");
        real_quadratic_sign(&self.a, &self.b)
    }

    pub fn is_positive_real(&self) -> bool {
        self.is_real() && self.real_sign() > 0
    }

    pub fn is_negative_real(&self) -> bool {
        self.is_real() && self.real_sign() < 0
    }

    /// Index trichotomy. `None` for zero and for nonnegative rationals,
    /// the values no valid Camacho-Sad index takes.
    pub fn classify(&self) -> Option<IndexClass> {
        if !self.is_real() {
            return Some(IndexClass::ComplexSaddle);
        }
        match self.real_sign() {
            -1 => Some(IndexClass::RealSaddle),
            0 => None,
            _ => {
                if self.b.is_zero() {
                    None
                } else {
                    Some(IndexClass::Nodal)
                }
            }
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        // With re = a + b√2 and im = c + d√2, the complex conjugate trick
        // gives 1/z = (re − im·i) / (re² + im²), and re² + im² is a nonzero
        // element of the real subfield because Q(√2) ⊂ R.
        let (n_a, n_b) = {
            let (ra, rb) = kmul(&self.a, &self.b, &self.a, &self.b);
            let (ia, ib) = kmul(&self.c, &self.d, &self.c, &self.d);
            (ra + ia, rb + ib)
        };
        let (inv_a, inv_b) = kinv(&n_a, &n_b);
        let (re_a, re_b) = kmul(&self.a, &self.b, &inv_a, &inv_b);
        let (im_a, im_b) = kmul(&self.c, &self.d, &inv_a, &inv_b);
        Some(Scalar {
            a: re_a,
            b: re_b,
            c: -im_a,
            d: -im_b,
        })
    }

    /// Renders as `(a,b,c,d)` with each coordinate `p` or `p/q` in lowest terms.
    pub fn render(&self) -> String {
        format!(
            "({},{},{},{})",
            rat_str(&self.a),
            rat_str(&self.b),
            rat_str(&self.c),
            rat_str(&self.d)
        )
    }
}

fn rat_str(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn parse_rat(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|e| format!("bad numerator {p:?}: {e}"))?;
        let q = BigInt::from_str(q.trim()).map_err(|e| format!("bad denominator {q:?}: {e}"))?;
        if q.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        Ok(BigRational::new(p, q))
    } else {
        let p = BigInt::from_str(s).map_err(|e| format!("bad rational {s:?}: {e}"))?;
        Ok(BigRational::from_integer(p))
    }
}

impl FromStr for Scalar {
    type Err = String;

    /// Parses the `(a,b,c,d)` form produced by [`Scalar::render`].
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| format!("scalar {s:?} is not parenthesized"))?;
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 4 {
            return Err(format!(
                "scalar {s:?} has {} coordinates, expected 4",
                parts.len()
            ));
        }
        Ok(Scalar {
            a: parse_rat(parts[0])?,
            b: parse_rat(parts[1])?,
            c: parse_rat(parts[2])?,
            d: parse_rat(parts[3])?,
        })
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar {
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
            c: &self.c + &rhs.c,
            d: &self.d + &rhs.d,
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar {
            a: &self.a - &rhs.a,
            b: &self.b - &rhs.b,
            c: &self.c - &rhs.c,
            d: &self.d - &rhs.d,
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            a: -self.a.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: -self.d.clone(),
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        // (re1 + im1·i)(re2 + im2·i) with re, im in Q(√2).
        let (rr_a, rr_b) = kmul(&self.a, &self.b, &rhs.a, &rhs.b);
        let (ii_a, ii_b) = kmul(&self.c, &self.d, &rhs.c, &rhs.d);
        let (ri_a, ri_b) = kmul(&self.a, &self.b, &rhs.c, &rhs.d);
        let (ir_a, ir_b) = kmul(&self.c, &self.d, &rhs.a, &rhs.b);
        Scalar {
            a: rr_a - ii_a,
            b: rr_b - ii_b,
            c: ri_a + ir_a,
            d: ri_b + ir_b,
        }
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        let inv = rhs.inverse().expect("division by zero scalar");
        self * &inv
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                $trait::$method(&self, &rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(a: i64, b: i64, c: i64, d: i64) -> Scalar {
        Scalar::from_coords(a, b, c, d)
    }

    #[test]
    fn field_basics() {
        let x = s(1, 2, 3, 4);
        let y = s(-2, 0, 1, -1);
        assert_eq!(&(&x + &y) - &y, x);
        assert_eq!(&(&x * &y) / &y, x);
        assert_eq!(&Scalar::sqrt2() * &Scalar::sqrt2(), s(2, 0, 0, 0));
        assert_eq!(&Scalar::i() * &Scalar::i(), s(-1, 0, 0, 0));
    }

    #[test]
    fn inverse_exact() {
        let x = s(1, 1, 0, 0);
        let inv = x.inverse().unwrap();
        // 1/(1+√2) = √2 − 1.
        assert_eq!(inv, s(-1, 1, 0, 0));
        assert_eq!(&x * &inv, Scalar::one());
        assert!(Scalar::zero().inverse().is_none());
    }

    #[test]
    fn sign_cases() {
        assert_eq!(s(0, 0, 0, 0).real_sign(), 0);
        assert_eq!(s(3, -2, 0, 0).real_sign(), 1); // 3 > 2√2
        assert_eq!(s(-3, 2, 0, 0).real_sign(), -1);
        assert_eq!(s(-7, 5, 0, 0).real_sign(), 1); // 5√2 > 7
        assert_eq!(s(7, -5, 0, 0).real_sign(), -1);
        assert_eq!(s(0, -1, 0, 0).real_sign(), -1);
    }

    #[test]
    fn trichotomy() {
        assert_eq!(Scalar::sqrt2().classify(), Some(IndexClass::Nodal));
        assert_eq!(s(1, 1, 0, 0).classify(), Some(IndexClass::Nodal));
        assert_eq!(
            Scalar::rational(-5, 3).classify(),
            Some(IndexClass::RealSaddle)
        );
        assert_eq!(s(-1, -1, 0, 0).classify(), Some(IndexClass::RealSaddle));
        assert_eq!(s(1, 0, 1, 0).classify(), Some(IndexClass::ComplexSaddle));
        assert_eq!(s(0, 0, 0, 2).classify(), Some(IndexClass::ComplexSaddle));
        assert_eq!(Scalar::zero().classify(), None);
        assert_eq!(Scalar::rational(5, 3).classify(), None);
        assert_eq!(Scalar::one().classify(), None);
    }

    #[test]
    fn reciprocal_preserves_class() {
        for x in [
            Scalar::sqrt2(),
            s(1, 1, 0, 0),
            s(-3, 1, 0, 0),
            Scalar::rational(-7, 2),
            s(1, 0, 1, 0),
            s(0, 1, 2, -1),
        ] {
            let inv = x.inverse().unwrap();
            assert_eq!(x.classify(), inv.classify(), "class changed for {x}");
        }
    }

    #[test]
    fn render_parse_round_trip() {
        let x = Scalar::new(
            BigRational::new(BigInt::from(-3), BigInt::from(4)),
            BigRational::from_integer(BigInt::from(2)),
            BigRational::zero(),
            BigRational::new(BigInt::from(7), BigInt::from(5)),
        );
        assert_eq!(x.render(), "(-3/4,2,0,7/5)");
        assert_eq!(x.render().parse::<Scalar>().unwrap(), x);
        assert!("(1,2,3)".parse::<Scalar>().is_err());
        assert!("1,2,3,4".parse::<Scalar>().is_err());
        assert!("(1,2,3,1/0)".parse::<Scalar>().is_err());
    }
}
