//! Rational functions with factored denominators.
//!
//! A `RatFun` is `num / prod_i f_i^{e_i}` where each factor is kept in a
//! canonical monic-by-leading-coefficient form. Keeping the denominator
//! factored lets sums share factors syntactically instead of multiplying
//! denominators out, which is what keeps crossed-product composition from
//! blowing up. No polynomial gcd is ever computed; cancellation happens by
//! trial exact division against denominator factors.

use crate::error::CoreError;
use crate::mpoly::MPoly;
use crate::scalar::GaussRat;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct RatFun {
    pub num: MPoly,
    /// canonical factor -> positive power
    pub den: BTreeMap<MPoly, u32>,
}

impl RatFun {
    pub fn zero(nvars: usize) -> Self {
        RatFun {
            num: MPoly::zero(nvars),
            den: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        RatFun {
            num: MPoly::one(nvars),
            den: BTreeMap::new(),
        }
    }

    pub fn from_poly(p: MPoly) -> Self {
        RatFun {
            num: p,
            den: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: GaussRat) -> Self {
        Self::from_poly(MPoly::constant(nvars, c))
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// num / den with den an arbitrary polynomial (one factor).
    pub fn fraction(num: MPoly, den: MPoly) -> Self {
        let mut r = RatFun::from_poly(num);
        r.push_den_factor(den, 1);
        r.normalize();
        r
    }

    /// Multiply denominator by factor^pow, canonicalising the factor: the
    /// leading coefficient is divided out and folded into the numerator.
    pub fn push_den_factor(&mut self, f: MPoly, pow: u32) {
        assert!(!f.is_zero(), "zero denominator factor");
        if pow == 0 {
            return;
        }
        if f.is_constant() {
            let c = f.constant_part().pow(pow as i64).inv();
            self.num = self.num.scale(&c);
            return;
        }
        let lead = f.leading().unwrap().1.clone();
        let fac = f.scale(&lead.inv());
        self.num = self.num.scale(&lead.pow(pow as i64).inv());
        *self.den.entry(fac).or_insert(0) += pow;
    }

    /// Try to cancel denominator factors against the numerator.
    pub fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        let factors: Vec<MPoly> = self.den.keys().cloned().collect();
        for f in factors {
            loop {
                let pow = *self.den.get(&f).unwrap_or(&0);
                if pow == 0 {
                    break;
                }
                match self.num.div_exact(&f) {
                    Some(q) => {
                        self.num = q;
                        if pow == 1 {
                            self.den.remove(&f);
                        } else {
                            self.den.insert(f.clone(), pow - 1);
                        }
                    }
                    None => break,
                }
            }
        }
    }

    pub fn add(&self, o: &RatFun) -> RatFun {
        // common denominator: union of factor powers
        let mut den: BTreeMap<MPoly, u32> = self.den.clone();
        for (f, p) in &o.den {
            let e = den.entry(f.clone()).or_insert(0);
            *e = (*e).max(*p);
        }
        let mut num_a = self.num.clone();
        let mut num_b = o.num.clone();
        for (f, p) in &den {
            let pa = self.den.get(f).copied().unwrap_or(0);
            let pb = o.den.get(f).copied().unwrap_or(0);
            for _ in pa..*p {
                num_a = num_a.mul(f);
            }
            for _ in pb..*p {
                num_b = num_b.mul(f);
            }
        }
        let mut r = RatFun {
            num: num_a.add(&num_b),
            den,
        };
        r.normalize();
        r
    }

    pub fn sub(&self, o: &RatFun) -> RatFun {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFun {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, s: &GaussRat) -> RatFun {
        if s.is_zero() {
            return RatFun::zero(self.nvars());
        }
        RatFun {
            num: self.num.scale(s),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &RatFun) -> RatFun {
        let mut den = self.den.clone();
        for (f, p) in &o.den {
            *den.entry(f.clone()).or_insert(0) += p;
        }
        let mut r = RatFun {
            num: self.num.mul(&o.num),
            den,
        };
        r.normalize();
        r
    }

    pub fn mul_poly(&self, p: &MPoly) -> RatFun {
        let mut r = RatFun {
            num: self.num.mul(p),
            den: self.den.clone(),
        };
        r.normalize();
        r
    }

    pub fn inv(&self) -> RatFun {
        assert!(!self.is_zero(), "inverting zero rational function");
        let mut r = RatFun::one(self.nvars());
        // numerator becomes product of den factors
        for (f, p) in &self.den {
            for _ in 0..*p {
                r.num = r.num.mul(f);
            }
        }
        r.push_den_factor(self.num.clone(), 1);
        r.normalize();
        r
    }

    pub fn div(&self, o: &RatFun) -> RatFun {
        self.mul(&o.inv())
    }

    /// Apply a ring homomorphism given by a monomial remap to numerator and
    /// every denominator factor (Weyl action / lattice shift in X-coordinates).
    pub fn map_monomials(&self, f: impl Fn(&[i64]) -> (Vec<i64>, GaussRat) + Copy) -> RatFun {
        let mut r = RatFun::from_poly(self.num.map_monomials(f));
        for (g, p) in &self.den {
            r.push_den_factor(g.map_monomials(f), *p);
        }
        r.normalize();
        r
    }

    /// Apply a ring homomorphism given by simultaneous substitution.
    pub fn subst_all(&self, subs: &[MPoly]) -> RatFun {
        let mut r = RatFun::from_poly(self.num.subst_all(subs));
        for (g, p) in &self.den {
            r.push_den_factor(g.subst_all(subs), *p);
        }
        r.normalize();
        r
    }

    /// Derivative with the supplied polynomial-level derivation.
    /// d(num/prod f^p) = [d(num) prod f - num sum_i p_i d(f_i) prod_{j!=i} f_j] / prod f^{p+1}
    pub fn derive(&self, d: impl Fn(&MPoly) -> MPoly) -> RatFun {
        if self.den.is_empty() {
            return RatFun::from_poly(d(&self.num));
        }
        let mut num = d(&self.num);
        for (f, _) in &self.den {
            num = num.mul(f);
        }
        for (f, p) in &self.den {
            let mut t = self.num.mul(&d(f)).scale(&GaussRat::from_int(*p as i64));
            for (g, _) in &self.den {
                if g != f {
                    t = t.mul(g);
                }
            }
            num = num.sub(&t);
        }
        let mut den = BTreeMap::new();
        for (f, p) in &self.den {
            den.insert(f.clone(), p + 1);
        }
        let mut r = RatFun { num, den };
        r.normalize();
        r
    }

    pub fn eval(&self, point: &[GaussRat]) -> Result<GaussRat, CoreError> {
        let mut v = self.num.eval(point)?;
        for (f, p) in &self.den {
            let fv = f.eval(point)?;
            if fv.is_zero() {
                return Err(CoreError::SingularPoint);
            }
            v = &v * &fv.pow(-(*p as i64));
        }
        Ok(v)
    }
}

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?})", self.num)?;
        for (g, p) in &self.den {
            write!(f, " / ({:?})^{}", g, p)?;
        }
        Ok(())
    }
}
