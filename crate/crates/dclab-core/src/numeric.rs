//! Complex floating arithmetic at a configurable precision.
//!
//! The elliptic layer is generic over `CF`, implemented by `C64`
//! (double precision, used for flows and quick checks) and `Mpc`
//! (arbitrary-precision complex built on astro-float, used wherever the
//! acceptance checks require residuals that scale with the working
//! precision).

use crate::scalar::{rat_to_f64, GaussRat};
use astro_float::{BigFloat, Consts, RoundingMode};
use num_complex::Complex64;

/// Key identifying a numeric value exactly (for memoising theta calls).
pub type NumKey = Vec<u64>;

pub trait CF: Clone + std::fmt::Debug {
    type Ctx;

    fn zero(ctx: &mut Self::Ctx) -> Self;
    fn one(ctx: &mut Self::Ctx) -> Self;
    fn i(ctx: &mut Self::Ctx) -> Self;
    fn pi(ctx: &mut Self::Ctx) -> Self;
    fn from_rat(q: &GaussRat, ctx: &mut Self::Ctx) -> Self;
    fn from_i64(n: i64, ctx: &mut Self::Ctx) -> Self;

    fn add(&self, o: &Self, ctx: &mut Self::Ctx) -> Self;
    fn sub(&self, o: &Self, ctx: &mut Self::Ctx) -> Self;
    fn mul(&self, o: &Self, ctx: &mut Self::Ctx) -> Self;
    fn div(&self, o: &Self, ctx: &mut Self::Ctx) -> Self;
    fn neg(&self, ctx: &mut Self::Ctx) -> Self;
    fn exp(&self, ctx: &mut Self::Ctx) -> Self;

    fn powi(&self, n: i64, ctx: &mut Self::Ctx) -> Self {
        if n == 0 {
            return Self::one(ctx);
        }
        let base = if n < 0 {
            let one = Self::one(ctx);
            one.div(self, ctx)
        } else {
            self.clone()
        };
        let mut acc = Self::one(ctx);
        let mut b = base;
        let mut m = n.unsigned_abs();
        while m > 0 {
            if m & 1 == 1 {
                acc = acc.mul(&b, ctx);
            }
            b = b.mul(&b, ctx);
            m >>= 1;
        }
        acc
    }

    fn abs(&self) -> f64;
    /// floor(log2 |self|); i64::MIN for zero.
    fn mag_exp2(&self) -> i64;
    fn re_f64(&self) -> f64;
    fn im_f64(&self) -> f64;
    fn is_finite(&self) -> bool;
    fn prec_bits(ctx: &Self::Ctx) -> usize;
    fn key(&self) -> NumKey;
}

// ---- f64 complex ----

pub type C64 = Complex64;

impl CF for C64 {
    type Ctx = ();

    fn zero(_: &mut ()) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one(_: &mut ()) -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn i(_: &mut ()) -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn pi(_: &mut ()) -> Self {
        Complex64::new(std::f64::consts::PI, 0.0)
    }
    fn from_rat(q: &GaussRat, _: &mut ()) -> Self {
        let (re, im) = q.to_f64_pair();
        Complex64::new(re, im)
    }
    fn from_i64(n: i64, _: &mut ()) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn add(&self, o: &Self, _: &mut ()) -> Self {
        self + o
    }
    fn sub(&self, o: &Self, _: &mut ()) -> Self {
        self - o
    }
    fn mul(&self, o: &Self, _: &mut ()) -> Self {
        self * o
    }
    fn div(&self, o: &Self, _: &mut ()) -> Self {
        self / o
    }
    fn neg(&self, _: &mut ()) -> Self {
        -self
    }
    fn exp(&self, _: &mut ()) -> Self {
        Complex64::exp(*self)
    }
    fn abs(&self) -> f64 {
        self.norm()
    }
    fn mag_exp2(&self) -> i64 {
        let a = self.norm();
        if a == 0.0 {
            i64::MIN
        } else {
            a.log2().floor() as i64
        }
    }
    fn re_f64(&self) -> f64 {
        self.re
    }
    fn im_f64(&self) -> f64 {
        self.im
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn prec_bits(_: &()) -> usize {
        53
    }
    fn key(&self) -> NumKey {
        vec![self.re.to_bits(), self.im.to_bits()]
    }
}

// ---- arbitrary precision complex ----

pub struct MpCtx {
    pub p: usize,
    pub rm: RoundingMode,
    pub cc: Consts,
}

impl MpCtx {
    pub fn new(prec_bits: usize) -> Self {
        MpCtx {
            p: prec_bits,
            rm: RoundingMode::ToEven,
            cc: Consts::new().expect("constants cache"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Mpc {
    pub re: BigFloat,
    pub im: BigFloat,
}

fn bf_from_bigint(x: &num_bigint::BigInt, ctx: &mut MpCtx) -> BigFloat {
    // exact binary construction: digits are base 2^64, little endian
    let (sign, digits) = x.to_u64_digits();
    let mut acc = BigFloat::from_word(0, ctx.p);
    let two64 = BigFloat::from_i128(1i128 << 64, ctx.p);
    for d in digits.iter().rev() {
        acc = acc.mul(&two64, ctx.p + 64, ctx.rm);
        acc = acc.add(&BigFloat::from_word(*d, ctx.p), ctx.p + 64, ctx.rm);
    }
    let mut acc = acc;
    acc.set_precision(ctx.p, ctx.rm).ok();
    if sign == num_bigint::Sign::Minus {
        acc.inv_sign();
    }
    acc
}

fn bf_from_rat(r: &crate::scalar::Rat, ctx: &mut MpCtx) -> BigFloat {
    let n = bf_from_bigint(r.numer(), ctx);
    let d = bf_from_bigint(r.denom(), ctx);
    n.div(&d, ctx.p, ctx.rm)
}

pub fn bf_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    match x.as_raw_parts() {
        Some((words, _n, sign, exp, _)) => {
            let nw = words.len();
            let mut v = 0.0f64;
            for (i, w) in words.iter().enumerate().rev().take(2) {
                v += (*w as f64) * 2f64.powi(-64i32 * (nw - i) as i32);
            }
            // v in [1/2, 1); apply exponent with clamping
            let e = exp as i64;
            let r = if e > 1020 {
                f64::INFINITY
            } else if e < -1020 {
                0.0
            } else {
                v * 2f64.powi(e as i32)
            };
            if sign.is_negative() {
                -r
            } else {
                r
            }
        }
        None => f64::NAN,
    }
}

impl CF for Mpc {
    type Ctx = MpCtx;

    fn zero(ctx: &mut MpCtx) -> Self {
        Mpc {
            re: BigFloat::from_word(0, ctx.p),
            im: BigFloat::from_word(0, ctx.p),
        }
    }
    fn one(ctx: &mut MpCtx) -> Self {
        Mpc {
            re: BigFloat::from_word(1, ctx.p),
            im: BigFloat::from_word(0, ctx.p),
        }
    }
    fn i(ctx: &mut MpCtx) -> Self {
        Mpc {
            re: BigFloat::from_word(0, ctx.p),
            im: BigFloat::from_word(1, ctx.p),
        }
    }
    fn pi(ctx: &mut MpCtx) -> Self {
        let pi = ctx.cc.pi(ctx.p, ctx.rm);
        Mpc {
            re: pi,
            im: BigFloat::from_word(0, ctx.p),
        }
    }
    fn from_rat(q: &GaussRat, ctx: &mut MpCtx) -> Self {
        Mpc {
            re: bf_from_rat(&q.re, ctx),
            im: bf_from_rat(&q.im, ctx),
        }
    }
    fn from_i64(n: i64, ctx: &mut MpCtx) -> Self {
        Mpc {
            re: BigFloat::from_i128(n as i128, ctx.p),
            im: BigFloat::from_word(0, ctx.p),
        }
    }
    fn add(&self, o: &Self, ctx: &mut MpCtx) -> Self {
        Mpc {
            re: self.re.add(&o.re, ctx.p, ctx.rm),
            im: self.im.add(&o.im, ctx.p, ctx.rm),
        }
    }
    fn sub(&self, o: &Self, ctx: &mut MpCtx) -> Self {
        Mpc {
            re: self.re.sub(&o.re, ctx.p, ctx.rm),
            im: self.im.sub(&o.im, ctx.p, ctx.rm),
        }
    }
    fn mul(&self, o: &Self, ctx: &mut MpCtx) -> Self {
        let (p, rm) = (ctx.p, ctx.rm);
        let ac = self.re.mul(&o.re, p, rm);
        let bd = self.im.mul(&o.im, p, rm);
        let ad = self.re.mul(&o.im, p, rm);
        let bc = self.im.mul(&o.re, p, rm);
        Mpc {
            re: ac.sub(&bd, p, rm),
            im: ad.add(&bc, p, rm),
        }
    }
    fn div(&self, o: &Self, ctx: &mut MpCtx) -> Self {
        let (p, rm) = (ctx.p, ctx.rm);
        let n2 = o.re.mul(&o.re, p, rm).add(&o.im.mul(&o.im, p, rm), p, rm);
        let ac = self.re.mul(&o.re, p, rm);
        let bd = self.im.mul(&o.im, p, rm);
        let bc = self.im.mul(&o.re, p, rm);
        let ad = self.re.mul(&o.im, p, rm);
        Mpc {
            re: ac.add(&bd, p, rm).div(&n2, p, rm),
            im: bc.sub(&ad, p, rm).div(&n2, p, rm),
        }
    }
    fn neg(&self, _: &mut MpCtx) -> Self {
        Mpc {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }
    fn exp(&self, ctx: &mut MpCtx) -> Self {
        let (p, rm) = (ctx.p, ctx.rm);
        let ea = self.re.exp(p, rm, &mut ctx.cc);
        let cb = self.im.cos(p, rm, &mut ctx.cc);
        let sb = self.im.sin(p, rm, &mut ctx.cc);
        Mpc {
            re: ea.mul(&cb, p, rm),
            im: ea.mul(&sb, p, rm),
        }
    }
    fn abs(&self) -> f64 {
        let re = bf_to_f64(&self.re);
        let im = bf_to_f64(&self.im);
        re.hypot(im)
    }
    fn mag_exp2(&self) -> i64 {
        let er = if self.re.is_zero() {
            i64::MIN
        } else {
            self.re.exponent().map(|e| e as i64).unwrap_or(i64::MIN)
        };
        let ei = if self.im.is_zero() {
            i64::MIN
        } else {
            self.im.exponent().map(|e| e as i64).unwrap_or(i64::MIN)
        };
        er.max(ei)
    }
    fn re_f64(&self) -> f64 {
        bf_to_f64(&self.re)
    }
    fn im_f64(&self) -> f64 {
        bf_to_f64(&self.im)
    }
    fn is_finite(&self) -> bool {
        !self.re.is_nan() && !self.im.is_nan() && !self.re.is_inf() && !self.im.is_inf()
    }
    fn prec_bits(ctx: &MpCtx) -> usize {
        ctx.p
    }
    fn key(&self) -> NumKey {
        let mut k = Vec::new();
        for part in [&self.re, &self.im] {
            if let Some((words, n, sign, exp, _)) = part.as_raw_parts() {
                k.push(n as u64);
                k.push(if sign.is_negative() { 1 } else { 0 });
                k.push(exp as u64);
                k.extend_from_slice(words);
            } else {
                k.push(u64::MAX);
            }
        }
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn mpc_matches_f64() {
        let mut ctx = MpCtx::new(192);
        let a = Mpc::from_rat(&GaussRat::new(rat(1, 3), rat(-2, 7)), &mut ctx);
        let b = Mpc::from_rat(&GaussRat::new(rat(5, 2), rat(1, 9)), &mut ctx);
        let c = a.mul(&b, &mut ctx);
        let ca = Complex64::new(1.0 / 3.0, -2.0 / 7.0) * Complex64::new(2.5, 1.0 / 9.0);
        assert!((c.re_f64() - ca.re).abs() < 1e-14);
        assert!((c.im_f64() - ca.im).abs() < 1e-14);
        let e = a.exp(&mut ctx);
        let ea = Complex64::new(1.0 / 3.0, -2.0 / 7.0).exp();
        assert!((e.re_f64() - ea.re).abs() < 1e-14);
        assert!((e.im_f64() - ea.im).abs() < 1e-14);
    }

    #[test]
    fn high_precision_cancellation() {
        // (1 + 2^-100) - 1 survives at 192 bits
        let mut ctx = MpCtx::new(192);
        let one = Mpc::one(&mut ctx);
        let tiny_rat = crate::scalar::Rat::new(
            num_bigint::BigInt::from(1),
            num_bigint::BigInt::from(1) << 100,
        );
        let tiny = Mpc::from_rat(&GaussRat::from_rat(tiny_rat), &mut ctx);
        let s = one.add(&tiny, &mut ctx).sub(&one, &mut ctx);
        let expect = 2f64.powi(-100);
        assert!((s.re_f64() - expect).abs() < expect * 1e-10);
    }

    #[test]
    fn bigint_conversion_exact() {
        let mut ctx = MpCtx::new(256);
        let big = num_bigint::BigInt::from(3u64)
            * num_bigint::BigInt::from(u64::MAX)
            * num_bigint::BigInt::from(u64::MAX);
        let bf = bf_from_bigint(&big, &mut ctx);
        let approx = bf_to_f64(&bf);
        let want = 3.0 * (u64::MAX as f64) * (u64::MAX as f64);
        assert!((approx - want).abs() / want < 1e-14);
    }
}
