//! Normal-form arithmetic in the crossed products D(V)*W and D_q(V)*W,
//! their classical degenerations, the Res maps, exact action on (Laurent)
//! polynomials, probabilistic operator equality and Poisson brackets.
//!
//! An operator is a finite sum of terms
//!     coefficient * monomial * w
//! where the monomial is a derivative multi-index (differential flavor) or
//! a lattice translation (difference flavor) and w is a finite Weyl element.
//! Affine group elements are normalised on construction: translations fold
//! into the monomial part. Composition uses
//!     (f (x) w)(f' (x) w') = f (w.f') (x) ww'
//! together with the Leibniz rule (differential) or argument shifts
//! (difference); the classical flavors drop both, keeping only the Weyl
//! action on coefficients.

use crate::error::CoreError;
use crate::expr::Expr;
use crate::mpoly::MPoly;
use crate::ratfun::RatFun;
use crate::roots::RootSystem;
use crate::scalar::{GaussRat, Rat};
use num_traits::Zero;
use rand::Rng;
use std::collections::BTreeMap;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Flavor {
    /// differential operators, quantum
    Diff,
    /// difference operators, quantum
    Shift,
    /// classical phase-space functions, polynomial momenta
    ClDiff,
    /// classical phase-space functions, exponential momenta
    ClShift,
}

impl Flavor {
    pub fn is_classical(&self) -> bool {
        matches!(self, Flavor::ClDiff | Flavor::ClShift)
    }
    pub fn is_difference(&self) -> bool {
        matches!(self, Flavor::Shift | Flavor::ClShift)
    }
    pub fn classical(&self) -> Flavor {
        match self {
            Flavor::Diff | Flavor::ClDiff => Flavor::ClDiff,
            Flavor::Shift | Flavor::ClShift => Flavor::ClShift,
        }
    }
}

/// Shared context for coefficient actions.
pub struct OpCtx<'a> {
    pub rs: &'a RootSystem,
    /// exact value of q^{1/qdenom} (difference flavors with exact coefficients)
    pub qpow_base: Option<GaussRat>,
}

impl<'a> OpCtx<'a> {
    pub fn new(rs: &'a RootSystem) -> Self {
        OpCtx {
            rs,
            qpow_base: None,
        }
    }
    pub fn with_q(rs: &'a RootSystem, qb: GaussRat) -> Self {
        OpCtx {
            rs,
            qpow_base: Some(qb),
        }
    }
}

/// Coefficient ring interface for crossed-product terms.
pub trait Coeff: Clone + std::fmt::Debug {
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, s: &GaussRat) -> Self;
    /// (w.f)(x) = f(w^{-1} x)
    fn act_weyl(&self, ctx: &OpCtx, w: u16) -> Self;
    /// (t(lambda).f)(x) = f(x + c lambda)
    fn act_shift(&self, ctx: &OpCtx, lam: &[i64]) -> Self;
    /// d/dx_j
    fn diff_coord(&self, ctx: &OpCtx, j: usize) -> Self;
}

/// Exactly evaluable coefficients (the Q(i) layers).
pub trait ExactCoeff: Coeff {
    fn nvars(&self) -> usize;
    fn eval(&self, pt: &[GaussRat]) -> Result<GaussRat, CoreError>;
    /// multiply into a polynomial; error when the result is not polynomial
    fn absorb_poly(&self, f: &MPoly) -> Result<MPoly, CoreError>;
    /// action of w on a bare polynomial of the same variable layout
    fn poly_act_weyl(ctx: &OpCtx, w: u16, f: &MPoly) -> MPoly;
    fn poly_act_shift(ctx: &OpCtx, lam: &[i64], f: &MPoly) -> Result<MPoly, CoreError>;
    fn poly_diff(ctx: &OpCtx, j: usize, f: &MPoly) -> MPoly;
}

// ---- additive coefficients: rational functions in x_1..x_dim, c, hbar ----

/// Rational function in ambient coordinates plus the two bookkeeping
/// variables c (index dim) and hbar (index dim+1).
#[derive(Clone, Debug, PartialEq)]
pub struct ACoeff(pub RatFun);

pub fn a_nvars(rs: &RootSystem) -> usize {
    rs.dim + 2
}

pub const C_SLOT_FROM_END: usize = 2;

impl ACoeff {
    pub fn zero(rs: &RootSystem) -> Self {
        ACoeff(RatFun::zero(a_nvars(rs)))
    }
    pub fn one(rs: &RootSystem) -> Self {
        ACoeff(RatFun::one(a_nvars(rs)))
    }
    pub fn constant(rs: &RootSystem, v: GaussRat) -> Self {
        ACoeff(RatFun::constant(a_nvars(rs), v))
    }
    pub fn hbar(rs: &RootSystem) -> Self {
        ACoeff(RatFun::from_poly(MPoly::var(a_nvars(rs), rs.dim + 1)))
    }
    /// linear form <v, x> as a polynomial (v given in ambient coordinates,
    /// paired with the root-system form)
    pub fn linear_form(rs: &RootSystem, v: &[Rat], cterm: Rat) -> Self {
        let n = a_nvars(rs);
        let mut coeffs: Vec<Rat> = v.iter().map(|a| a * &rs.pair_scale).collect();
        coeffs.resize(n, Rat::zero());
        coeffs[rs.dim] = cterm;
        ACoeff(RatFun::from_poly(MPoly::linear(n, &coeffs, Rat::zero())))
    }
    /// <alpha_r, x> for a root index
    pub fn root_form(rs: &RootSystem, r: usize) -> Self {
        Self::linear_form(rs, &rs.roots[r], Rat::zero())
    }
}

fn a_subst_weyl(ctx: &OpCtx, w: u16) -> Vec<MPoly> {
    let rs = ctx.rs;
    let n = a_nvars(rs);
    let wi = rs.w_inv[w as usize];
    let mat = &rs.w_mats[wi as usize];
    let den = crate::scalar::rat_int(rs.mat_den);
    let mut subs = Vec::with_capacity(n);
    for i in 0..rs.dim {
        // x_i -> sum_j (w^{-1})_{ij} x_j
        let mut coeffs = vec![Rat::zero(); n];
        for (j, cj) in coeffs.iter_mut().enumerate().take(rs.dim) {
            let e = mat.entry(i, j);
            if e != 0 {
                *cj = crate::scalar::rat_int(e) / den.clone();
            }
        }
        subs.push(MPoly::linear(n, &coeffs, Rat::zero()));
    }
    subs.push(MPoly::var(n, rs.dim));
    subs.push(MPoly::var(n, rs.dim + 1));
    subs
}

fn a_subst_shift(ctx: &OpCtx, lam: &[i64]) -> Vec<MPoly> {
    let rs = ctx.rs;
    let n = a_nvars(rs);
    let lam_amb = rs.pv_to_ambient(lam);
    let mut subs = Vec::with_capacity(n);
    for i in 0..rs.dim {
        // x_i -> x_i + c * lam_i
        let mut p = MPoly::var(n, i);
        if !lam_amb[i].is_zero() {
            let mut e = vec![0i64; n];
            e[rs.dim] = 1;
            p.add_term(e, GaussRat::from_rat(lam_amb[i].clone()));
        }
        subs.push(p);
    }
    subs.push(MPoly::var(n, rs.dim));
    subs.push(MPoly::var(n, rs.dim + 1));
    subs
}

impl Coeff for ACoeff {
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        ACoeff(self.0.add(&o.0))
    }
    fn mul(&self, o: &Self) -> Self {
        ACoeff(self.0.mul(&o.0))
    }
    fn neg(&self) -> Self {
        ACoeff(self.0.neg())
    }
    fn scale(&self, s: &GaussRat) -> Self {
        ACoeff(self.0.scale(s))
    }
    fn act_weyl(&self, ctx: &OpCtx, w: u16) -> Self {
        if w == 0 {
            return self.clone();
        }
        ACoeff(self.0.subst_all(&a_subst_weyl(ctx, w)))
    }
    fn act_shift(&self, ctx: &OpCtx, lam: &[i64]) -> Self {
        if lam.iter().all(|&x| x == 0) {
            return self.clone();
        }
        ACoeff(self.0.subst_all(&a_subst_shift(ctx, lam)))
    }
    fn diff_coord(&self, _ctx: &OpCtx, j: usize) -> Self {
        ACoeff(self.0.derive(|p| p.deriv(j)))
    }
}

impl ExactCoeff for ACoeff {
    fn nvars(&self) -> usize {
        self.0.nvars()
    }
    fn eval(&self, pt: &[GaussRat]) -> Result<GaussRat, CoreError> {
        self.0.eval(pt)
    }
    fn absorb_poly(&self, f: &MPoly) -> Result<MPoly, CoreError> {
        let mut out = self.0.num.mul(f);
        for (g, p) in &self.0.den {
            for _ in 0..*p {
                out = out.div_exact(g).ok_or(CoreError::NonzeroRemainder)?;
            }
        }
        Ok(out)
    }
    fn poly_act_weyl(ctx: &OpCtx, w: u16, f: &MPoly) -> MPoly {
        if w == 0 {
            return f.clone();
        }
        f.subst_all(&a_subst_weyl(ctx, w))
    }
    fn poly_act_shift(ctx: &OpCtx, lam: &[i64], f: &MPoly) -> Result<MPoly, CoreError> {
        Ok(f.subst_all(&a_subst_shift(ctx, lam)))
    }
    fn poly_diff(_ctx: &OpCtx, j: usize, f: &MPoly) -> MPoly {
        f.deriv(j)
    }
}

// ---- multiplicative coefficients: Laurent-rational in the weight chart ----

/// Rational function in the lattice exponentials X_1..X_m of the weight
/// chart; q-powers are folded into the Q(i) scalars through qpow_base.
#[derive(Clone, Debug, PartialEq)]
pub struct XCoeff(pub RatFun);

impl XCoeff {
    pub fn zero(rs: &RootSystem) -> Self {
        XCoeff(RatFun::zero(rs.p_basis.len()))
    }
    pub fn one(rs: &RootSystem) -> Self {
        XCoeff(RatFun::one(rs.p_basis.len()))
    }
    pub fn constant(rs: &RootSystem, v: GaussRat) -> Self {
        XCoeff(RatFun::constant(rs.p_basis.len(), v))
    }
    /// monomial q^{qunits/qdenom} X^mu
    pub fn monomial(rs: &RootSystem, mu: Vec<i64>, qunits: i64, qb: &GaussRat) -> Self {
        XCoeff(RatFun::from_poly(MPoly::monomial(
            rs.p_basis.len(),
            mu,
            qb.pow(qunits),
        )))
    }
}

impl Coeff for XCoeff {
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        XCoeff(self.0.add(&o.0))
    }
    fn mul(&self, o: &Self) -> Self {
        XCoeff(self.0.mul(&o.0))
    }
    fn neg(&self) -> Self {
        XCoeff(self.0.neg())
    }
    fn scale(&self, s: &GaussRat) -> Self {
        XCoeff(self.0.scale(s))
    }
    fn act_weyl(&self, ctx: &OpCtx, w: u16) -> Self {
        if w == 0 {
            return self.clone();
        }
        let rs = ctx.rs;
        XCoeff(
            self.0
                .map_monomials(|e| (rs.w_on_p_vec(w, e), GaussRat::one())),
        )
    }
    fn act_shift(&self, ctx: &OpCtx, lam: &[i64]) -> Self {
        if lam.iter().all(|&x| x == 0) {
            return self.clone();
        }
        let rs = ctx.rs;
        let qb = ctx
            .qpow_base
            .as_ref()
            .expect("difference shift on exact coefficients needs a q value");
        XCoeff(
            self.0
                .map_monomials(|e| (e.to_vec(), qb.pow(rs.qpow_units(e, lam)))),
        )
    }
    fn diff_coord(&self, ctx: &OpCtx, j: usize) -> Self {
        // d/dx_j X^mu = (ambient mu)_j X^mu
        let rs = ctx.rs;
        let weights: Vec<Rat> = (0..rs.p_basis.len())
            .map(|i| rs.p_basis[i][j].clone())
            .collect();
        XCoeff(self.0.derive(|p| p.weighted_euler(&weights)))
    }
}

impl ExactCoeff for XCoeff {
    fn nvars(&self) -> usize {
        self.0.nvars()
    }
    fn eval(&self, pt: &[GaussRat]) -> Result<GaussRat, CoreError> {
        self.0.eval(pt)
    }
    fn absorb_poly(&self, f: &MPoly) -> Result<MPoly, CoreError> {
        let mut out = self.0.num.mul(f);
        for (g, p) in &self.0.den {
            for _ in 0..*p {
                out = out.div_exact(g).ok_or(CoreError::NonzeroRemainder)?;
            }
        }
        Ok(out)
    }
    fn poly_act_weyl(ctx: &OpCtx, w: u16, f: &MPoly) -> MPoly {
        if w == 0 {
            return f.clone();
        }
        let rs = ctx.rs;
        f.map_monomials(|e| (rs.w_on_p_vec(w, e), GaussRat::one()))
    }
    fn poly_act_shift(ctx: &OpCtx, lam: &[i64], f: &MPoly) -> Result<MPoly, CoreError> {
        let rs = ctx.rs;
        let qb = ctx
            .qpow_base
            .as_ref()
            .ok_or_else(|| CoreError::Invalid("difference shift needs a q value".into()))?;
        Ok(f.map_monomials(|e| (e.to_vec(), qb.pow(rs.qpow_units(e, lam)))))
    }
    fn poly_diff(ctx: &OpCtx, j: usize, f: &MPoly) -> MPoly {
        let rs = ctx.rs;
        let weights: Vec<Rat> = (0..rs.p_basis.len())
            .map(|i| rs.p_basis[i][j].clone())
            .collect();
        f.weighted_euler(&weights)
    }
}

// ---- expression coefficients (float/elliptic layers) ----

impl Coeff for Expr {
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        Expr::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Expr::mul(self, o)
    }
    fn neg(&self) -> Self {
        Expr::neg(self)
    }
    fn scale(&self, s: &GaussRat) -> Self {
        Expr::scale(self, s)
    }
    fn act_weyl(&self, ctx: &OpCtx, w: u16) -> Self {
        if w == 0 {
            return self.clone();
        }
        let g = crate::weyl::AffElem::from_w(ctx.rs, w);
        self.act_affine(ctx.rs, &g)
    }
    fn act_shift(&self, ctx: &OpCtx, lam: &[i64]) -> Self {
        if lam.iter().all(|&x| x == 0) {
            return self.clone();
        }
        let g = crate::weyl::AffElem::translation(lam.to_vec());
        self.act_affine(ctx.rs, &g)
    }
    fn diff_coord(&self, ctx: &OpCtx, j: usize) -> Self {
        let mut dir = vec![Rat::zero(); ctx.rs.dim];
        dir[j] = crate::scalar::rat_int(1);
        self.diff_dir(&dir)
    }
}

// ---- the crossed-product operator ----

pub type TermKey = (Vec<i64>, u16);

#[derive(Clone, Debug)]
pub struct CrossedOp<C: Coeff> {
    pub flavor: Flavor,
    /// length of monomial vectors: ambient dim (Diff) or coweight rank (Shift)
    pub mono_len: usize,
    pub terms: BTreeMap<TermKey, C>,
}

impl<C: Coeff> CrossedOp<C> {
    pub fn zero(flavor: Flavor, mono_len: usize) -> Self {
        CrossedOp {
            flavor,
            mono_len,
            terms: BTreeMap::new(),
        }
    }

    pub fn term(flavor: Flavor, mono_len: usize, mono: Vec<i64>, w: u16, c: C) -> Self {
        let mut op = Self::zero(flavor, mono_len);
        op.add_term(mono, w, c);
        op
    }

    pub fn function(flavor: Flavor, mono_len: usize, c: C) -> Self {
        Self::term(flavor, mono_len, vec![0; mono_len], 0, c)
    }

    pub fn add_term(&mut self, mono: Vec<i64>, w: u16, c: C) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(mono.len(), self.mono_len);
        match self.terms.entry((mono, w)) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.flavor, o.flavor);
        let mut r = self.clone();
        for ((m, w), c) in &o.terms {
            r.add_term(m.clone(), *w, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        CrossedOp {
            flavor: self.flavor,
            mono_len: self.mono_len,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &GaussRat) -> Self {
        if s.is_zero() {
            return Self::zero(self.flavor, self.mono_len);
        }
        CrossedOp {
            flavor: self.flavor,
            mono_len: self.mono_len,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), c.scale(s)))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_trivial_group_part(&self) -> bool {
        self.terms.keys().all(|(_, w)| *w == 0)
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Res (sign = false) and Res^- (sign = true): forget the group part.
    pub fn res(&self, ctx: &OpCtx, det_twist: bool) -> Self {
        let mut r = Self::zero(self.flavor, self.mono_len);
        for ((m, w), c) in &self.terms {
            let cc = if det_twist && ctx.rs.w_det[*w as usize] < 0 {
                c.neg()
            } else {
                c.clone()
            };
            r.add_term(m.clone(), 0, cc);
        }
        r
    }

}

/// Multi-index iteration j <= m with multinomial binomials.
fn leibniz_indices(m: &[i64]) -> Vec<(Vec<i64>, i64)> {
    let mut out: Vec<(Vec<i64>, i64)> = vec![(vec![], 1)];
    for &mi in m {
        let mut next = Vec::new();
        for (prefix, coef) in &out {
            let mut c = 1i64;
            for j in 0..=mi {
                if j > 0 {
                    c = c * (mi - j + 1) / j;
                }
                let mut p2 = prefix.clone();
                p2.push(j);
                next.push((p2, coef * c));
            }
        }
        out = next;
    }
    out
}

/// Expansion of w . d^m (conjugated derivative monomial) as a polynomial in
/// the coordinate derivatives: returns [(multi-index, rational coeff)].
fn conj_deriv_monomial(rs: &RootSystem, w: u16, m: &[i64]) -> Vec<(Vec<i64>, Rat)> {
    if w == 0 || m.iter().all(|&x| x == 0) {
        return vec![(m.to_vec(), crate::scalar::rat_int(1))];
    }
    let dim = rs.dim;
    let mat = &rs.w_mats[w as usize];
    let den = crate::scalar::rat_int(rs.mat_den);
    // poly in "p" variables
    let mut acc = MPoly::one(dim);
    for (i, &mi) in m.iter().enumerate() {
        if mi == 0 {
            continue;
        }
        // (w e_i) as direction: column i of the matrix
        let coeffs: Vec<Rat> = (0..dim)
            .map(|j| crate::scalar::rat_int(mat.entry(j, i)) / den.clone())
            .collect();
        let lin = MPoly::linear(dim, &coeffs, Rat::zero());
        acc = acc.mul(&lin.pow(mi as u32));
    }
    acc.terms
        .iter()
        .map(|(e, c)| {
            debug_assert!(c.is_real());
            (e.clone(), c.re.clone())
        })
        .collect()
}

/// Compose two operators in normal form.
pub fn compose<C: Coeff>(ctx: &OpCtx, a: &CrossedOp<C>, b: &CrossedOp<C>) -> Result<CrossedOp<C>, CoreError> {
    if a.flavor != b.flavor {
        return Err(CoreError::FlavorMismatch);
    }
    let mut out = CrossedOp::zero(a.flavor, a.mono_len);
    match a.flavor {
        Flavor::Shift | Flavor::ClShift => {
            for ((l1, w1), c1) in &a.terms {
                for ((l2, w2), c2) in &b.terms {
                    // c1 t(l1) w1 c2 t(l2) w2
                    //   = c1 (t(l1) w1 . c2) t(l1 + w1 l2) (w1 w2)
                    let mut c2m = c2.act_weyl(ctx, *w1);
                    if a.flavor == Flavor::Shift {
                        c2m = c2m.act_shift(ctx, l1);
                    }
                    let coeff = c1.mul(&c2m);
                    let wl2 = ctx.rs.w_on_pv_vec(*w1, l2);
                    let mono: Vec<i64> = l1.iter().zip(&wl2).map(|(x, y)| x + y).collect();
                    out.add_term(mono, ctx.rs.w_mul(*w1, *w2), coeff);
                }
            }
        }
        Flavor::Diff | Flavor::ClDiff => {
            for ((m1, w1), c1) in &a.terms {
                for ((m2, w2), c2) in &b.terms {
                    let f = c2.act_weyl(ctx, *w1);
                    let wmono = conj_deriv_monomial(ctx.rs, *w1, m2);
                    let w12 = ctx.rs.w_mul(*w1, *w2);
                    if a.flavor == Flavor::ClDiff {
                        let coeff = c1.mul(&f);
                        for (mk, ck) in &wmono {
                            let mono: Vec<i64> =
                                m1.iter().zip(mk).map(|(x, y)| x + y).collect();
                            out.add_term(
                                mono,
                                w12,
                                coeff.scale(&GaussRat::from_rat(ck.clone())),
                            );
                        }
                    } else {
                        // Leibniz: d^{m1} o f = sum_j C(m1,j) (d^j f) d^{m1-j}
                        for (j, cbin) in leibniz_indices(m1) {
                            let mut djf = f.clone();
                            for (coord, &jc) in j.iter().enumerate() {
                                for _ in 0..jc {
                                    djf = djf.diff_coord(ctx, coord);
                                }
                            }
                            if djf.is_zero() {
                                continue;
                            }
                            let coeff = c1.mul(&djf).scale(&GaussRat::from_int(cbin));
                            for (mk, ck) in &wmono {
                                let mono: Vec<i64> = m1
                                    .iter()
                                    .zip(&j)
                                    .zip(mk)
                                    .map(|((x, y), z)| x - y + z)
                                    .collect();
                                out.add_term(
                                    mono,
                                    w12,
                                    coeff.scale(&GaussRat::from_rat(ck.clone())),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// w a w^{-1} for a finite Weyl element.
pub fn conjugate<C: Coeff>(ctx: &OpCtx, w: u16, a: &CrossedOp<C>) -> CrossedOp<C> {
    let rs = ctx.rs;
    let wi = rs.w_inv[w as usize];
    let mut out = CrossedOp::zero(a.flavor, a.mono_len);
    for ((m, v), c) in &a.terms {
        let cc = c.act_weyl(ctx, w);
        let vv = rs.w_mul(rs.w_mul(w, *v), wi);
        match a.flavor {
            Flavor::Shift | Flavor::ClShift => {
                out.add_term(rs.w_on_pv_vec(w, m), vv, cc);
            }
            Flavor::Diff | Flavor::ClDiff => {
                for (mk, ck) in conj_deriv_monomial(rs, w, m) {
                    out.add_term(mk, vv, cc.scale(&GaussRat::from_rat(ck)));
                }
            }
        }
    }
    out
}

/// Commutator a b - b a.
pub fn commutator<C: Coeff>(
    ctx: &OpCtx,
    a: &CrossedOp<C>,
    b: &CrossedOp<C>,
) -> Result<CrossedOp<C>, CoreError> {
    Ok(compose(ctx, a, b)?.sub(&compose(ctx, b, a)?))
}

/// Apply an operator to a polynomial / Laurent polynomial with exact
/// division by the coefficient denominators.
pub fn apply_poly<C: ExactCoeff>(
    ctx: &OpCtx,
    a: &CrossedOp<C>,
    f: &MPoly,
) -> Result<MPoly, CoreError> {
    let mut out = MPoly::zero(f.nvars);
    for ((m, w), c) in &a.terms {
        let mut g = C::poly_act_weyl(ctx, *w, f);
        match a.flavor {
            Flavor::Shift => {
                g = C::poly_act_shift(ctx, m, &g)?;
            }
            Flavor::Diff => {
                for (coord, &mc) in m.iter().enumerate() {
                    for _ in 0..mc {
                        g = C::poly_diff(ctx, coord, &g);
                    }
                }
            }
            _ => {
                return Err(CoreError::Invalid(
                    "polynomial action is for the quantum flavors".into(),
                ))
            }
        }
        out = out.add(&c.absorb_poly(&g)?);
    }
    Ok(out)
}

/// Witness of an operator inequality.
#[derive(Clone, Debug)]
pub struct Witness {
    pub mono: Vec<i64>,
    pub w: u16,
    pub point: Vec<GaussRat>,
    pub lhs: GaussRat,
    pub rhs: GaussRat,
}

/// Probabilistic equality for exactly-evaluable coefficients: normal forms
/// are compared term by term, coefficients by exact evaluation at `trials`
/// random rational points. Singular points are resampled.
pub fn equal_probabilistic<C: ExactCoeff>(
    a: &CrossedOp<C>,
    b: &CrossedOp<C>,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<Option<Witness>, CoreError> {
    if a.flavor != b.flavor {
        return Err(CoreError::FlavorMismatch);
    }
    let mut keys: Vec<TermKey> = a.terms.keys().cloned().collect();
    for k in b.terms.keys() {
        if !a.terms.contains_key(k) {
            keys.push(k.clone());
        }
    }
    let nv = a
        .terms
        .values()
        .chain(b.terms.values())
        .map(|c| c.nvars())
        .next()
        .unwrap_or(0);
    for (m, w) in keys {
        let ca = a.terms.get(&(m.clone(), w));
        let cb = b.terms.get(&(m.clone(), w));
        for _ in 0..trials {
            let mut done = false;
            let mut attempts = 0;
            while !done {
                attempts += 1;
                if attempts > 60 {
                    return Err(CoreError::AllPointsSingular);
                }
                let pt = sample_point(nv, rng);
                let va = match ca.map(|c| c.eval(&pt)) {
                    None => GaussRat::zero(),
                    Some(Ok(v)) => v,
                    Some(Err(CoreError::SingularPoint)) => continue,
                    Some(Err(e)) => return Err(e),
                };
                let vb = match cb.map(|c| c.eval(&pt)) {
                    None => GaussRat::zero(),
                    Some(Ok(v)) => v,
                    Some(Err(CoreError::SingularPoint)) => continue,
                    Some(Err(e)) => return Err(e),
                };
                if va != vb {
                    return Ok(Some(Witness {
                        mono: m.clone(),
                        w,
                        point: pt,
                        lhs: va,
                        rhs: vb,
                    }));
                }
                done = true;
            }
        }
    }
    Ok(None)
}

pub fn sample_point(nv: usize, rng: &mut impl Rng) -> Vec<GaussRat> {
    (0..nv)
        .map(|_| {
            let num = rng.gen_range(-400i64..=400);
            let den = rng.gen_range(1i64..=23);
            let num = if num == 0 { 137 } else { num };
            GaussRat::from_frac(num, den)
        })
        .collect()
}

/// Classical limit: hbar -> 0 with p_hat = hbar d; derivative monomials map
/// to momentum monomials, translations to exponential momenta, group parts
/// are unchanged.
pub fn classical_limit(
    rs: &RootSystem,
    a: &CrossedOp<ACoeff>,
) -> Result<CrossedOp<ACoeff>, CoreError> {
    match a.flavor {
        Flavor::Diff => {
            let n = a_nvars(rs);
            let hbar_idx = rs.dim + 1;
            let mut out = CrossedOp::zero(Flavor::ClDiff, a.mono_len);
            for ((m, w), c) in &a.terms {
                let total: i64 = m.iter().sum();
                // coefficient * hbar^{-|m|} must be regular at hbar = 0
                let mut num = c.0.num.clone();
                if total > 0 {
                    let hb = MPoly::var(n, hbar_idx).pow(total as u32);
                    num = num.div_exact(&hb).ok_or(CoreError::PoleAtHbarZero)?;
                }
                for (g, _) in &c.0.den {
                    let has_hbar = g.terms.keys().any(|e| e[hbar_idx] != 0);
                    if has_hbar {
                        return Err(CoreError::PoleAtHbarZero);
                    }
                }
                // evaluate at hbar = 0: drop monomials with positive hbar degree
                let mut num0 = MPoly::zero(n);
                for (e, v) in &num.terms {
                    if e[hbar_idx] == 0 {
                        num0.add_term(e.clone(), v.clone());
                    }
                }
                let coeff = ACoeff(RatFun {
                    num: num0,
                    den: c.0.den.clone(),
                });
                out.add_term(m.clone(), *w, coeff);
            }
            Ok(out)
        }
        Flavor::Shift => {
            // exact difference coefficients carry no c dependence; keys map
            // t(lambda) -> e^{beta p_lambda} unchanged
            let mut out = CrossedOp::zero(Flavor::ClShift, a.mono_len);
            for ((m, w), c) in &a.terms {
                out.add_term(m.clone(), *w, c.clone());
            }
            Ok(out)
        }
        _ => Err(CoreError::Invalid("operator is already classical".into())),
    }
}

/// Classical limit for expression coefficients (difference flavor): the
/// shift c inside affine arguments goes to zero.
pub fn classical_limit_expr(
    a: &CrossedOp<Expr>,
) -> Result<CrossedOp<Expr>, CoreError> {
    match a.flavor {
        Flavor::Shift => {
            let mut out = CrossedOp::zero(Flavor::ClShift, a.mono_len);
            for ((m, w), c) in &a.terms {
                out.add_term(m.clone(), *w, c.strip_c());
            }
            Ok(out)
        }
        _ => Err(CoreError::Invalid(
            "expression classical limit is implemented for the difference flavor".into(),
        )),
    }
}

/// Canonical Poisson bracket of classical operators with trivial group
/// parts. beta scales the exponential-momentum rule
/// {e^{beta p_lambda}, f} = beta d_lambda(f) e^{beta p_lambda}.
pub fn poisson_bracket<C: Coeff>(
    ctx: &OpCtx,
    f: &CrossedOp<C>,
    g: &CrossedOp<C>,
    beta: &Rat,
) -> Result<CrossedOp<C>, CoreError> {
    if f.flavor != g.flavor || !f.flavor.is_classical() {
        return Err(CoreError::FlavorMismatch);
    }
    if !f.has_trivial_group_part() || !g.has_trivial_group_part() {
        return Err(CoreError::GroupPartPresent);
    }
    let rs = ctx.rs;
    let mut out = CrossedOp::zero(f.flavor, f.mono_len);
    for ((mf, _), cf) in &f.terms {
        for ((mg, _), cg) in &g.terms {
            for i in 0..rs.dim {
                // dF/dp_i dG/dx_i - dF/dx_i dG/dp_i on this pair of terms
                let (fp, fp_mono) = momentum_deriv(rs, f.flavor, mf, cf, i, beta);
                if let Some((cfp, mfp)) = fp.map(|c| (c, fp_mono.clone())) {
                    let dgx = cg.diff_coord(ctx, i);
                    if !dgx.is_zero() && !cfp.is_zero() {
                        let mono: Vec<i64> =
                            mfp.iter().zip(mg).map(|(a, b)| a + b).collect();
                        out.add_term(mono, 0, cfp.mul(&dgx));
                    }
                }
                let (gp, gp_mono) = momentum_deriv(rs, g.flavor, mg, cg, i, beta);
                if let Some((cgp, mgp)) = gp.map(|c| (c, gp_mono.clone())) {
                    let dfx = cf.diff_coord(ctx, i);
                    if !dfx.is_zero() && !cgp.is_zero() {
                        let mono: Vec<i64> =
                            mf.iter().zip(&mgp).map(|(a, b)| a + b).collect();
                        out.add_term(mono, 0, dfx.mul(&cgp).neg());
                    }
                }
            }
        }
    }
    Ok(out)
}

/// d/dp_i of coefficient * momentum-monomial; returns the new coefficient
/// and monomial.
fn momentum_deriv<C: Coeff>(
    rs: &RootSystem,
    flavor: Flavor,
    m: &[i64],
    c: &C,
    i: usize,
    beta: &Rat,
) -> (Option<C>, Vec<i64>) {
    match flavor {
        Flavor::ClDiff => {
            if m[i] == 0 {
                (None, m.to_vec())
            } else {
                let mut m2 = m.to_vec();
                m2[i] -= 1;
                (Some(c.scale(&GaussRat::from_int(m[i]))), m2)
            }
        }
        Flavor::ClShift => {
            // d/dp_i e^{beta p_lambda} = beta lambda_i e^{beta p_lambda}
            let lam_amb = rs.pv_to_ambient(m);
            if lam_amb[i].is_zero() {
                (None, m.to_vec())
            } else {
                let s = GaussRat::from_rat(beta * &lam_amb[i]);
                (Some(c.scale(&s)), m.to_vec())
            }
        }
        _ => (None, m.to_vec()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::{build_root_system, Family};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn rs_a1() -> RootSystem {
        build_root_system(Family::A, 1, &[GaussRat::one()]).unwrap()
    }

    fn x_op(rs: &RootSystem, i: usize) -> CrossedOp<ACoeff> {
        // multiplication by x_i
        let mut v = vec![Rat::zero(); rs.dim];
        v[i] = crate::scalar::rat_int(1) / rs.pair_scale.clone();
        CrossedOp::function(Flavor::Diff, rs.dim, ACoeff::linear_form(rs, &v, Rat::zero()))
    }

    fn d_op(rs: &RootSystem, i: usize) -> CrossedOp<ACoeff> {
        let mut m = vec![0i64; rs.dim];
        m[i] = 1;
        CrossedOp::term(Flavor::Diff, rs.dim, m, 0, ACoeff::one(rs))
    }

    #[test]
    fn heisenberg_relation() {
        let rs = rs_a1();
        let ctx = OpCtx::new(&rs);
        // d_1 x_1 = x_1 d_1 + 1
        let lhs = compose(&ctx, &d_op(&rs, 0), &x_op(&rs, 0)).unwrap();
        let rhs = compose(&ctx, &x_op(&rs, 0), &d_op(&rs, 0))
            .unwrap()
            .add(&CrossedOp::function(Flavor::Diff, rs.dim, ACoeff::one(&rs)));
        let mut rng = StdRng::seed_from_u64(1);
        assert!(equal_probabilistic(&lhs, &rhs, 4, &mut rng)
            .unwrap()
            .is_none());
        // and they are not equal without the +1
        let rhs2 = compose(&ctx, &x_op(&rs, 0), &d_op(&rs, 0)).unwrap();
        assert!(equal_probabilistic(&lhs, &rhs2, 4, &mut rng)
            .unwrap()
            .is_some());
    }

    #[test]
    fn reflection_conjugates_derivative() {
        // s d_xi s = d_{s.xi}
        let rs = rs_a1();
        let ctx = OpCtx::new(&rs);
        let s = rs.simple_refl[0];
        let sop: CrossedOp<ACoeff> =
            CrossedOp::term(Flavor::Diff, rs.dim, vec![0, 0], s, ACoeff::one(&rs));
        let d0 = d_op(&rs, 0);
        let prod = compose(&ctx, &compose(&ctx, &sop, &d0).unwrap(), &sop).unwrap();
        let d1 = d_op(&rs, 1); // s swaps e_1, e_2 in ambient coords of A_1
        let mut rng = StdRng::seed_from_u64(2);
        assert!(equal_probabilistic(&prod, &d1, 4, &mut rng)
            .unwrap()
            .is_none());
    }

    #[test]
    fn difference_shift_moves_argument() {
        // t(e_1) f = (f shifted) t(e_1) in GL_2
        let rs = build_root_system(Family::GLn, 2, &[GaussRat::one()]).unwrap();
        let qb = GaussRat::from_frac(5, 7);
        let ctx = OpCtx::with_q(&rs, qb.clone());
        let f = CrossedOp::function(
            Flavor::Shift,
            2,
            XCoeff(RatFun::from_poly(MPoly::monomial(
                2,
                vec![1, 0],
                GaussRat::one(),
            ))),
        );
        let t = CrossedOp::term(Flavor::Shift, 2, vec![1, 0], 0, XCoeff::one(&rs));
        let lhs = compose(&ctx, &t, &f).unwrap();
        // t(e1) X^{e1} = q X^{e1} t(e1)
        let shifted = CrossedOp::term(
            Flavor::Shift,
            2,
            vec![1, 0],
            0,
            XCoeff(RatFun::from_poly(MPoly::monomial(2, vec![1, 0], qb))),
        );
        let mut rng = StdRng::seed_from_u64(3);
        assert!(equal_probabilistic(&lhs, &shifted, 4, &mut rng)
            .unwrap()
            .is_none());
    }

    #[test]
    fn associativity_random_ops() {
        let rs = build_root_system(Family::A, 2, &[GaussRat::one()]).unwrap();
        let ctx = OpCtx::new(&rs);
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..6 {
            let mk = |rng: &mut StdRng| -> CrossedOp<ACoeff> {
                let mut op = CrossedOp::zero(Flavor::Diff, rs.dim);
                for _ in 0..3 {
                    let mut m = vec![0i64; rs.dim];
                    m[rng.gen_range(0..rs.dim)] = rng.gen_range(0..2);
                    let w = rng.gen_range(0..rs.order() as u16);
                    let den_root = rng.gen_range(0..rs.n_roots());
                    let num = ACoeff::linear_form(
                        &rs,
                        &rs.roots[rng.gen_range(0..rs.n_roots())],
                        Rat::zero(),
                    );
                    let den = ACoeff::root_form(&rs, den_root);
                    let c = ACoeff(RatFun::fraction(num.0.num, den.0.num));
                    op.add_term(m, w, c);
                }
                op
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let c = mk(&mut rng);
            let ab_c = compose(&ctx, &compose(&ctx, &a, &b).unwrap(), &c).unwrap();
            let a_bc = compose(&ctx, &a, &compose(&ctx, &b, &c).unwrap()).unwrap();
            assert!(equal_probabilistic(&ab_c, &a_bc, 2, &mut rng)
                .unwrap()
                .is_none());
        }
    }

    #[test]
    fn res_examples() {
        let rs = rs_a1();
        let ctx = OpCtx::new(&rs);
        // res over the whole group = |W| as multiplication operator
        let mut op: CrossedOp<ACoeff> = CrossedOp::zero(Flavor::Diff, rs.dim);
        for w in 0..rs.order() as u16 {
            op.add_term(vec![0, 0], w, ACoeff::one(&rs));
        }
        let r = op.res(&ctx, false);
        assert_eq!(r.n_terms(), 1);
        let c = r.terms.get(&(vec![0, 0], 0)).unwrap();
        let v = c.eval(&sample_point(4, &mut StdRng::seed_from_u64(5))).unwrap();
        assert_eq!(v, GaussRat::from_int(2));
        // res^- of a reflection = -1
        let s = rs.simple_refl[0];
        let sop: CrossedOp<ACoeff> =
            CrossedOp::term(Flavor::Diff, rs.dim, vec![0, 0], s, ACoeff::one(&rs));
        let rm = sop.res(&ctx, true);
        let c = rm.terms.get(&(vec![0, 0], 0)).unwrap();
        let v = c.eval(&sample_point(4, &mut StdRng::seed_from_u64(6))).unwrap();
        assert_eq!(v, GaussRat::from_int(-1));
    }

    #[test]
    fn poisson_canonical_pairs() {
        let rs = rs_a1();
        let ctx = OpCtx::new(&rs);
        // {p_1, x_1} = 1
        let mut m = vec![0i64; rs.dim];
        m[0] = 1;
        let p1: CrossedOp<ACoeff> = CrossedOp::term(Flavor::ClDiff, rs.dim, m, 0, ACoeff::one(&rs));
        let x1 = {
            let mut v = vec![Rat::zero(); rs.dim];
            v[0] = crate::scalar::rat_int(1) / rs.pair_scale.clone();
            CrossedOp::function(Flavor::ClDiff, rs.dim, ACoeff::linear_form(&rs, &v, Rat::zero()))
        };
        let b = poisson_bracket(&ctx, &p1, &x1, &crate::scalar::rat_int(1)).unwrap();
        let one = CrossedOp::function(Flavor::ClDiff, rs.dim, ACoeff::one(&rs));
        let mut rng = StdRng::seed_from_u64(7);
        assert!(equal_probabilistic(&b, &one, 3, &mut rng).unwrap().is_none());
    }

    #[test]
    fn classical_limit_hbar_d() {
        let rs = rs_a1();
        // hbar d_xi -> p_xi
        let hd = {
            let mut m = vec![0i64; rs.dim];
            m[0] = 1;
            CrossedOp::term(Flavor::Diff, rs.dim, m, 0, ACoeff::hbar(&rs))
        };
        let cl = classical_limit(&rs, &hd).unwrap();
        assert_eq!(cl.flavor, Flavor::ClDiff);
        assert_eq!(cl.n_terms(), 1);
        let c = cl.terms.values().next().unwrap();
        let pt = sample_point(4, &mut StdRng::seed_from_u64(8));
        assert_eq!(c.eval(&pt).unwrap(), GaussRat::one());
        // d_xi alone has a pole at hbar = 0
        let d = d_op(&rs, 0);
        assert!(classical_limit(&rs, &d).is_err());
    }

    #[test]
    fn classical_limit_is_homomorphism() {
        let rs = build_root_system(Family::A, 2, &[GaussRat::one()]).unwrap();
        let ctx = OpCtx::new(&rs);
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..4 {
            let mk = |rng: &mut StdRng| -> CrossedOp<ACoeff> {
                let mut op = CrossedOp::zero(Flavor::Diff, rs.dim);
                for _ in 0..2 {
                    let mut m = vec![0i64; rs.dim];
                    let ord = rng.gen_range(0..2);
                    m[rng.gen_range(0..rs.dim)] = ord;
                    let w = rng.gen_range(0..rs.order() as u16);
                    // coefficient hbar^{|m|} * (linear form) keeps the
                    // classical limit regular
                    let mut c = ACoeff::linear_form(
                        &rs,
                        &rs.roots[rng.gen_range(0..rs.n_roots())],
                        Rat::zero(),
                    );
                    for _ in 0..ord {
                        c = c.mul(&ACoeff::hbar(&rs));
                    }
                    op.add_term(m, w, c);
                }
                op
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            let ab = compose(&ctx, &a, &b).unwrap();
            let lhs = classical_limit(&rs, &ab).unwrap();
            let rhs = compose(
                &ctx,
                &classical_limit(&rs, &a).unwrap(),
                &classical_limit(&rs, &b).unwrap(),
            )
            .unwrap();
            assert!(equal_probabilistic(&lhs, &rhs, 3, &mut rng)
                .unwrap()
                .is_none());
        }
    }
}
