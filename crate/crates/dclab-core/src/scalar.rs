//! Exact scalars: arbitrary-precision rationals and Gaussian rationals Q(i).
//!
//! All exact computations in the library run over `GaussRat`, pairs of
//! `BigRational` forming the field Q(i). This is enough to specialise
//! Hecke parameters, q-powers and evaluation points exactly while still
//! admitting complex values where the elliptic layer hands us couplings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// Element of the field Q(i).
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussRat {
    pub re: Rat,
    pub im: Rat,
}

impl GaussRat {
    pub fn new(re: Rat, im: Rat) -> Self {
        GaussRat { re, im }
    }

    pub fn from_rat(re: Rat) -> Self {
        GaussRat {
            re,
            im: Rat::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(rat_int(n))
    }

    pub fn from_frac(n: i64, d: i64) -> Self {
        Self::from_rat(rat(n, d))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        GaussRat {
            re: Rat::zero(),
            im: Rat::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRat {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// |z|^2 as a rational.
    pub fn norm_sq(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Self {
        let n = self.norm_sq();
        assert!(!n.is_zero(), "division by zero in GaussRat");
        GaussRat {
            re: &self.re / &n,
            im: -&self.im / &n,
        }
    }

    pub fn pow(&self, e: i64) -> Self {
        if e == 0 {
            return Self::one();
        }
        let base = if e < 0 { self.inv() } else { self.clone() };
        let mut acc = Self::one();
        let mut b = base;
        let mut n = e.unsigned_abs();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            n >>= 1;
        }
        acc
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
}

/// Convert a BigRational to f64 (approximate, good to ~1 ulp for moderate sizes).
pub fn rat_to_f64(r: &Rat) -> f64 {
    let n = r.numer();
    let d = r.denom();
    // scale into f64 range via bit lengths
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let shift = (nb.max(db) - 900).max(0);
    let n2 = n >> shift as u64;
    let d2 = d >> shift as u64;
    let nf = bigint_to_f64(&n2);
    let df = bigint_to_f64(&d2);
    if df == 0.0 {
        return 0.0;
    }
    nf / df
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    let (sign, digits) = x.to_u64_digits();
    let mut v = 0.0f64;
    for (i, d) in digits.iter().enumerate() {
        v += (*d as f64) * 2f64.powi(64 * i as i32);
    }
    if sign == num_bigint::Sign::Minus {
        -v
    } else {
        v
    }
}

/// Exact conversion f64 -> Rat (every finite f64 is a dyadic rational).
pub fn f64_to_rat(x: f64) -> Rat {
    assert!(x.is_finite(), "cannot convert non-finite float to rational");
    if x == 0.0 {
        return Rat::zero();
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e2) = if exp == 0 {
        (frac, -1074i64)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    let mut num = BigInt::from(mant) * BigInt::from(sign);
    let mut den = BigInt::one();
    if e2 >= 0 {
        num <<= e2 as u64;
    } else {
        den <<= (-e2) as u64;
    }
    Rat::new(num, den)
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}*i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}{}*i", self.re, self.im)
        } else {
            write!(f, "{}+{}*i", self.re, self.im)
        }
    }
}

impl fmt::Debug for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl<'a> Add for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, o: &'a GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
}

impl<'a> Sub for &'a GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &'a GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
}

impl<'a> Mul for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &'a GaussRat) -> GaussRat {
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl<'a> Div for &'a GaussRat {
    type Output = GaussRat;
    fn div(self, o: &'a GaussRat) -> GaussRat {
        self * &o.inv()
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_ops() {
        let a = GaussRat::new(rat(1, 2), rat(3, 1));
        let b = GaussRat::new(rat(-2, 3), rat(1, 5));
        let prod = &a * &b;
        let back = &prod / &b;
        assert_eq!(back, a);
        assert!((&a - &a).is_zero());
        let i = GaussRat::i();
        assert_eq!(&i * &i, GaussRat::from_int(-1));
        assert_eq!(a.pow(3), &(&a * &a) * &a);
        assert_eq!(a.pow(-2), (&a * &a).inv());
    }

    #[test]
    fn f64_roundtrip() {
        let x = 0.4375f64;
        let r = f64_to_rat(x);
        assert_eq!(rat_to_f64(&r), x);
        let y = -3.5e-9f64;
        assert!((rat_to_f64(&f64_to_rat(y)) - y).abs() < 1e-24);
    }
}
