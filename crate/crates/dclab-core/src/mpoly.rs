//! Sparse multivariate Laurent polynomials over Q(i).
//!
//! Exponent vectors are `Vec<i64>`; negative exponents are allowed, so the
//! same type backs ordinary polynomial rings (rational Dunkl layer) and the
//! group algebra of a lattice (Hecke/Macdonald layer). Terms live in a
//! `BTreeMap`, which keeps iteration order canonical everywhere results are
//! serialised or compared.

use crate::error::CoreError;
use crate::scalar::{GaussRat, Rat};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;

/// Sparse Laurent polynomial; the zero polynomial has an empty term map.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MPoly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<i64>, GaussRat>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: GaussRat) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, GaussRat::one())
    }

    pub fn monomial(nvars: usize, exp: Vec<i64>, c: GaussRat) -> Self {
        assert_eq!(exp.len(), nvars);
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exp, c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, GaussRat::one())
    }

    /// Linear polynomial sum_i coeffs[i] * x_i + cst.
    pub fn linear(nvars: usize, coeffs: &[Rat], cst: Rat) -> Self {
        let mut p = Self::constant(nvars, GaussRat::from_rat(cst));
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut e = vec![0; nvars];
                e[i] = 1;
                p.add_term(e, GaussRat::from_rat(c.clone()));
            }
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().iter().all(|&e| e == 0))
    }

    pub fn constant_part(&self) -> GaussRat {
        self.terms
            .get(&vec![0; self.nvars])
            .cloned()
            .unwrap_or_else(GaussRat::zero)
    }

    pub fn add_term(&mut self, exp: Vec<i64>, c: GaussRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = &*o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &MPoly) -> MPoly {
        debug_assert_eq!(self.nvars, o.nvars);
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &MPoly) -> MPoly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, s: &GaussRat) -> MPoly {
        if s.is_zero() {
            return MPoly::zero(self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, o: &MPoly) -> MPoly {
        debug_assert_eq!(self.nvars, o.nvars);
        let mut r = MPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<i64> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                r.add_term(e, c1 * c2);
            }
        }
        r
    }

    pub fn mul_monomial(&self, exp: &[i64], c: &GaussRat) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, k)| (e.iter().zip(exp).map(|(a, b)| a + b).collect(), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> MPoly {
        let mut acc = MPoly::one(self.nvars);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Remap each monomial: `f(exp) -> (new_exp, scalar)`, term coefficient
    /// gets multiplied by the scalar. Used for Weyl actions and lattice shifts.
    pub fn map_monomials(&self, f: impl Fn(&[i64]) -> (Vec<i64>, GaussRat)) -> MPoly {
        let mut r = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            let (ne, s) = f(e);
            r.add_term(ne, c * &s);
        }
        r
    }

    /// Substitute variable i by the given polynomial (all other variables kept).
    /// Requires nonnegative exponents in variable i.
    pub fn subst_var(&self, i: usize, val: &MPoly) -> MPoly {
        let mut r = MPoly::zero(self.nvars);
        // group by exponent of variable i
        let mut by_deg: BTreeMap<i64, MPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let d = e[i];
            assert!(d >= 0, "subst_var needs nonnegative exponent in the substituted variable");
            let mut e2 = e.clone();
            e2[i] = 0;
            by_deg
                .entry(d)
                .or_insert_with(|| MPoly::zero(self.nvars))
                .add_term(e2, c.clone());
        }
        for (d, p) in by_deg {
            r = r.add(&p.mul(&val.pow(d as u32)));
        }
        r
    }

    /// Simultaneous affine substitution x_j -> subs[j] for all variables.
    pub fn subst_all(&self, subs: &[MPoly]) -> MPoly {
        assert_eq!(subs.len(), self.nvars);
        let mut r = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut t = MPoly::constant(self.nvars, c.clone());
            for (j, &d) in e.iter().enumerate() {
                assert!(d >= 0, "subst_all needs nonnegative exponents");
                if d > 0 {
                    t = t.mul(&subs[j].pow(d as u32));
                }
            }
            r = r.add(&t);
        }
        r
    }

    /// Partial derivative with respect to variable i (additive coordinates).
    pub fn deriv(&self, i: usize) -> MPoly {
        let mut r = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] != 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                r.add_term(e2, c * &GaussRat::from_int(e[i]));
            }
        }
        r
    }

    /// Euler-type derivative X_i d/dX_i scaled by weights: returns
    /// sum over terms of (sum_i w_i e_i) * coeff * X^e.
    pub fn weighted_euler(&self, w: &[Rat]) -> MPoly {
        let mut r = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut s = Rat::zero();
            for (i, &d) in e.iter().enumerate() {
                if d != 0 {
                    s += &w[i] * Rat::from(num_bigint::BigInt::from(d));
                }
            }
            if !s.is_zero() {
                r.add_term(e.clone(), c * &GaussRat::from_rat(s));
            }
        }
        r
    }

    /// Exact evaluation. Negative exponents require a nonzero coordinate.
    pub fn eval(&self, point: &[GaussRat]) -> Result<GaussRat, CoreError> {
        let mut acc = GaussRat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &d) in e.iter().enumerate() {
                if d != 0 {
                    if point[i].is_zero() && d < 0 {
                        return Err(CoreError::SingularPoint);
                    }
                    t = &t * &point[i].pow(d);
                }
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// Total degree span (min, max) over terms; zero polynomial gives (0,0).
    pub fn degree_span(&self) -> (i64, i64) {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for e in self.terms.keys() {
            let d: i64 = e.iter().sum();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if self.terms.is_empty() {
            (0, 0)
        } else {
            (lo, hi)
        }
    }

    /// Leading term under the BTreeMap (lex) order: largest key.
    pub fn leading(&self) -> Option<(&Vec<i64>, &GaussRat)> {
        self.terms.iter().next_back()
    }

    /// Exact division: returns Some(q) with self = q * d when the division is
    /// exact, None otherwise. Works for Laurent polynomials by clearing the
    /// lowest exponents first.
    pub fn div_exact(&self, d: &MPoly) -> Option<MPoly> {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(MPoly::zero(self.nvars));
        }
        // shift both numerator and divisor to have nonnegative exponents
        let shift_of = |p: &MPoly| -> Vec<i64> {
            let mut s = vec![0i64; p.nvars];
            for e in p.terms.keys() {
                for (i, &x) in e.iter().enumerate() {
                    s[i] = s[i].min(x);
                }
            }
            s
        };
        let sa = shift_of(self);
        let sd = shift_of(d);
        let unshift = |p: &MPoly, s: &[i64]| -> MPoly {
            let negs: Vec<i64> = s.iter().map(|x| -x).collect();
            p.mul_monomial(&negs, &GaussRat::one())
        };
        let a = unshift(self, &sa);
        let b = unshift(d, &sd);
        let (dlead_e, dlead_c) = b.leading().unwrap();
        let dlead_e = dlead_e.clone();
        let dlead_c = dlead_c.clone();
        let mut rem = a;
        let mut q = MPoly::zero(self.nvars);
        while !rem.is_zero() {
            let (rlead_e, rlead_c) = rem.leading().unwrap();
            let qe: Vec<i64> = rlead_e.iter().zip(&dlead_e).map(|(x, y)| x - y).collect();
            if qe.iter().any(|&x| x < 0) {
                return None;
            }
            let qc = rlead_c / &dlead_c;
            q.add_term(qe.clone(), qc.clone());
            rem = rem.sub(&b.mul_monomial(&qe, &qc));
        }
        // net shift: numerator shift minus divisor shift
        let net: Vec<i64> = sa.iter().zip(&sd).map(|(x, y)| x - y).collect();
        Some(q.mul_monomial(&net, &GaussRat::one()))
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            for (i, &d) in e.iter().enumerate() {
                if d != 0 {
                    write!(f, "*v{}^{}", i, d)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    fn p_of(pairs: &[(&[i64], i64)]) -> MPoly {
        let n = pairs[0].0.len();
        let mut p = MPoly::zero(n);
        for (e, c) in pairs {
            p.add_term(e.to_vec(), GaussRat::from_int(*c));
        }
        p
    }

    #[test]
    fn mul_and_divide_back() {
        let a = p_of(&[(&[1, 0], 1), (&[0, 1], -2), (&[0, 0], 3)]);
        let b = p_of(&[(&[2, -1], 5), (&[0, 0], 1)]);
        let prod = a.mul(&b);
        assert_eq!(prod.div_exact(&b).unwrap(), a);
        assert_eq!(prod.div_exact(&a).unwrap(), b);
        // non-exact division
        let c = prod.add(&MPoly::one(2));
        assert!(c.div_exact(&b).is_none());
    }

    #[test]
    fn eval_laurent() {
        let p = p_of(&[(&[-1, 2], 1), (&[0, 0], 7)]);
        let pt = vec![GaussRat::from_frac(1, 2), GaussRat::from_int(3)];
        // (1/2)^-1 * 9 + 7 = 25
        assert_eq!(p.eval(&pt).unwrap(), GaussRat::from_int(25));
        let singular = vec![GaussRat::zero(), GaussRat::from_int(3)];
        assert!(p.eval(&singular).is_err());
    }

    #[test]
    fn subst_affine() {
        // f = x^2, substitute x -> x + 2y: (x+2y)^2 = x^2 + 4xy + 4y^2
        let f = p_of(&[(&[2, 0], 1)]);
        let sub = p_of(&[(&[1, 0], 1), (&[0, 1], 2)]);
        let g = f.subst_var(0, &sub);
        assert_eq!(
            g,
            p_of(&[(&[2, 0], 1), (&[1, 1], 4), (&[0, 2], 4)])
        );
    }

    #[test]
    fn derivative() {
        let f = p_of(&[(&[3, 1], 2), (&[0, 2], 5)]);
        let fx = f.deriv(0);
        assert_eq!(fx, p_of(&[(&[2, 1], 6)]));
        let w = vec![rat_int(1), rat_int(2)];
        let eu = f.weighted_euler(&w);
        // (3*1 + 1*2) * 2 x^3 y + (2*2) * 5 y^2
        assert_eq!(eu, p_of(&[(&[3, 1], 10), (&[0, 2], 20)]));
    }
}
