//! Differentiable expression trees for the float layers.
//!
//! Leaves are exact constants, named parameters, and affine-linear forms
//! `<v, x> + t*c`; interior nodes are field operations and the elliptic
//! primitives theta_r, sigma^r_mu, wp and zeta(1/2). Exact evaluation is
//! available when no elliptic primitive appears; float evaluation is generic
//! over the working precision and routes the primitives through a
//! `ThetaEngine`. Differentiation is symbolic: affine forms drop to
//! constants and primitive nodes bump their derivative order.

use crate::error::CoreError;
use crate::numeric::CF;
use crate::scalar::{GaussRat, Rat};
use crate::theta::ThetaEngine;
use num_traits::Zero;
use std::collections::BTreeMap;
use std::sync::Arc;

pub type ExprRef = Arc<Expr>;

#[derive(Clone, Debug, PartialEq)]
pub struct AffForm {
    pub coeffs: Vec<Rat>,
    pub cterm: Rat,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(GaussRat),
    Sym(String),
    Aff(AffForm),
    Add(Vec<ExprRef>),
    Mul(Vec<ExprRef>),
    Div(ExprRef, ExprRef),
    Pow(ExprRef, i64),
    Exp(ExprRef),
    Theta { r: u8, dz: u8, arg: ExprRef },
    Sigma { r: u8, dz: u8, mu: ExprRef, arg: ExprRef },
    Wp { dz: u8, arg: ExprRef },
    ZetaHalf,
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(GaussRat::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(GaussRat::one())
    }

    pub fn constant(c: GaussRat) -> Expr {
        Expr::Const(c)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(name.to_string())
    }

    pub fn aff(coeffs: Vec<Rat>, cterm: Rat) -> Expr {
        Expr::Aff(AffForm { coeffs, cterm })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    pub fn add(a: &Expr, b: &Expr) -> Expr {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        if let (Expr::Const(x), Expr::Const(y)) = (a, b) {
            return Expr::Const(x + y);
        }
        let mut parts: Vec<ExprRef> = Vec::new();
        for e in [a, b] {
            match e {
                Expr::Add(v) => parts.extend(v.iter().cloned()),
                other => parts.push(Arc::new(other.clone())),
            }
        }
        Expr::Add(parts)
    }

    pub fn mul(a: &Expr, b: &Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            return Expr::zero();
        }
        if a.is_one() {
            return b.clone();
        }
        if b.is_one() {
            return a.clone();
        }
        if let (Expr::Const(x), Expr::Const(y)) = (a, b) {
            return Expr::Const(x * y);
        }
        let mut parts: Vec<ExprRef> = Vec::new();
        for e in [a, b] {
            match e {
                Expr::Mul(v) => parts.extend(v.iter().cloned()),
                other => parts.push(Arc::new(other.clone())),
            }
        }
        Expr::Mul(parts)
    }

    pub fn neg(&self) -> Expr {
        Expr::mul(&Expr::Const(GaussRat::from_int(-1)), self)
    }

    pub fn sub(a: &Expr, b: &Expr) -> Expr {
        Expr::add(a, &b.neg())
    }

    pub fn div(a: &Expr, b: &Expr) -> Expr {
        if a.is_zero() {
            return Expr::zero();
        }
        if b.is_one() {
            return a.clone();
        }
        if let (Expr::Const(x), Expr::Const(y)) = (a, b) {
            if !y.is_zero() {
                return Expr::Const(x / y);
            }
        }
        Expr::Div(Arc::new(a.clone()), Arc::new(b.clone()))
    }

    pub fn scale(&self, s: &GaussRat) -> Expr {
        Expr::mul(&Expr::Const(s.clone()), self)
    }

    /// sigma^0 with derivative order 0
    pub fn sigma(mu: Expr, arg: Expr) -> Expr {
        Expr::Sigma {
            r: 0,
            dz: 0,
            mu: Arc::new(mu),
            arg: Arc::new(arg),
        }
    }

    pub fn wp(arg: Expr) -> Expr {
        Expr::Wp {
            dz: 0,
            arg: Arc::new(arg),
        }
    }

    /// Does any elliptic primitive occur?
    pub fn has_elliptic(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Sym(_) | Expr::Aff(_) => false,
            Expr::Add(v) | Expr::Mul(v) => v.iter().any(|e| e.has_elliptic()),
            Expr::Div(a, b) => a.has_elliptic() || b.has_elliptic(),
            Expr::Pow(a, _) | Expr::Exp(a) => a.has_elliptic(),
            Expr::Theta { .. } | Expr::Sigma { .. } | Expr::Wp { .. } | Expr::ZetaHalf => true,
        }
    }

    /// Directional derivative with respect to the x variables.
    pub fn diff_dir(&self, dir: &[Rat]) -> Expr {
        match self {
            Expr::Const(_) | Expr::Sym(_) | Expr::ZetaHalf => Expr::zero(),
            Expr::Aff(f) => {
                let v: Rat = f.coeffs.iter().zip(dir).map(|(a, b)| a * b).sum();
                Expr::Const(GaussRat::from_rat(v))
            }
            Expr::Add(v) => {
                let mut acc = Expr::zero();
                for e in v {
                    acc = Expr::add(&acc, &e.diff_dir(dir));
                }
                acc
            }
            Expr::Mul(v) => {
                let mut acc = Expr::zero();
                for (i, _) in v.iter().enumerate() {
                    let mut prod = Expr::one();
                    for (j, e) in v.iter().enumerate() {
                        if i == j {
                            prod = Expr::mul(&prod, &e.diff_dir(dir));
                        } else {
                            prod = Expr::mul(&prod, e);
                        }
                    }
                    acc = Expr::add(&acc, &prod);
                }
                acc
            }
            Expr::Div(a, b) => {
                let num = Expr::sub(
                    &Expr::mul(&a.diff_dir(dir), b),
                    &Expr::mul(a, &b.diff_dir(dir)),
                );
                Expr::div(&num, &Expr::mul(b, b))
            }
            Expr::Pow(a, n) => {
                if *n == 0 {
                    Expr::zero()
                } else {
                    let coeff = Expr::Const(GaussRat::from_int(*n));
                    let inner = Expr::Pow(a.clone(), n - 1);
                    Expr::mul(&Expr::mul(&coeff, &inner), &a.diff_dir(dir))
                }
            }
            Expr::Exp(a) => Expr::mul(self, &a.diff_dir(dir)),
            Expr::Theta { r, dz, arg } => {
                let bumped = Expr::Theta {
                    r: *r,
                    dz: dz + 1,
                    arg: arg.clone(),
                };
                Expr::mul(&bumped, &arg.diff_dir(dir))
            }
            Expr::Sigma { r, dz, mu, arg } => {
                // mu slots never depend on x by construction
                let bumped = Expr::Sigma {
                    r: *r,
                    dz: dz + 1,
                    mu: mu.clone(),
                    arg: arg.clone(),
                };
                Expr::mul(&bumped, &arg.diff_dir(dir))
            }
            Expr::Wp { dz, arg } => {
                let bumped = Expr::Wp {
                    dz: dz + 1,
                    arg: arg.clone(),
                };
                Expr::mul(&bumped, &arg.diff_dir(dir))
            }
        }
    }

    /// Transform affine leaves by an affine Weyl element (function action).
    pub fn act_affine(&self, rs: &crate::roots::RootSystem, g: &crate::weyl::AffElem) -> Expr {
        let map = |f: &AffForm| -> AffForm {
            // (v, t) -> (w v, t + dot(w v, lambda_amb))
            let wv = rs.w_mats[g.w as usize].apply_rat(&f.coeffs, rs.mat_den);
            let lam = rs.pv_to_ambient(&g.t);
            let bump: Rat = wv.iter().zip(&lam).map(|(a, b)| a * b).sum();
            AffForm {
                coeffs: wv,
                cterm: &f.cterm + &bump,
            }
        };
        self.map_aff(&map)
    }

    /// Set the c-part of every affine leaf to zero (classical limit).
    pub fn strip_c(&self) -> Expr {
        self.map_aff(&|f: &AffForm| AffForm {
            coeffs: f.coeffs.clone(),
            cterm: Rat::zero(),
        })
    }

    fn map_aff(&self, m: &dyn Fn(&AffForm) -> AffForm) -> Expr {
        match self {
            Expr::Const(_) | Expr::Sym(_) | Expr::ZetaHalf => self.clone(),
            Expr::Aff(f) => Expr::Aff(m(f)),
            Expr::Add(v) => Expr::Add(v.iter().map(|e| Arc::new(e.map_aff(m))).collect()),
            Expr::Mul(v) => Expr::Mul(v.iter().map(|e| Arc::new(e.map_aff(m))).collect()),
            Expr::Div(a, b) => Expr::Div(Arc::new(a.map_aff(m)), Arc::new(b.map_aff(m))),
            Expr::Pow(a, n) => Expr::Pow(Arc::new(a.map_aff(m)), *n),
            Expr::Exp(a) => Expr::Exp(Arc::new(a.map_aff(m))),
            Expr::Theta { r, dz, arg } => Expr::Theta {
                r: *r,
                dz: *dz,
                arg: Arc::new(arg.map_aff(m)),
            },
            Expr::Sigma { r, dz, mu, arg } => Expr::Sigma {
                r: *r,
                dz: *dz,
                mu: mu.clone(),
                arg: Arc::new(arg.map_aff(m)),
            },
            Expr::Wp { dz, arg } => Expr::Wp {
                dz: *dz,
                arg: Arc::new(arg.map_aff(m)),
            },
        }
    }

    /// Float evaluation at an ambient point with parameter assignments.
    pub fn eval_num<T: CF>(
        &self,
        env: &NumEnv<T>,
        engine: &mut ThetaEngine<T>,
        ctx: &mut T::Ctx,
    ) -> Result<T, CoreError> {
        match self {
            Expr::Const(c) => Ok(T::from_rat(c, ctx)),
            Expr::Sym(s) => env
                .syms
                .get(s)
                .map(|v| T::from_rat(v, ctx))
                .ok_or_else(|| CoreError::UnassignedSymbol(s.clone())),
            Expr::Aff(f) => {
                let mut acc = T::zero(ctx);
                for (a, x) in f.coeffs.iter().zip(&env.x) {
                    if !a.is_zero() {
                        let av = T::from_rat(&GaussRat::from_rat(a.clone()), ctx);
                        acc = acc.add(&av.mul(x, ctx), ctx);
                    }
                }
                if !f.cterm.is_zero() {
                    let tv = T::from_rat(&GaussRat::from_rat(f.cterm.clone()), ctx);
                    acc = acc.add(&tv.mul(&env.c, ctx), ctx);
                }
                Ok(acc)
            }
            Expr::Add(v) => {
                let mut acc = T::zero(ctx);
                for e in v {
                    let t = e.eval_num(env, engine, ctx)?;
                    acc = acc.add(&t, ctx);
                }
                Ok(acc)
            }
            Expr::Mul(v) => {
                let mut acc = T::one(ctx);
                for e in v {
                    let t = e.eval_num(env, engine, ctx)?;
                    acc = acc.mul(&t, ctx);
                }
                Ok(acc)
            }
            Expr::Div(a, b) => {
                let av = a.eval_num(env, engine, ctx)?;
                let bv = b.eval_num(env, engine, ctx)?;
                if bv.abs() == 0.0 {
                    return Err(CoreError::SingularPoint);
                }
                Ok(av.div(&bv, ctx))
            }
            Expr::Pow(a, n) => {
                let av = a.eval_num(env, engine, ctx)?;
                Ok(av.powi(*n, ctx))
            }
            Expr::Exp(a) => {
                let av = a.eval_num(env, engine, ctx)?;
                Ok(av.exp(ctx))
            }
            Expr::Theta { r, dz, arg } => {
                let z = arg.eval_num(env, engine, ctx)?;
                engine.theta(*r, *dz, &z, ctx)
            }
            Expr::Sigma { r, dz, mu, arg } => {
                let m = mu.eval_num(env, engine, ctx)?;
                let z = arg.eval_num(env, engine, ctx)?;
                engine.sigma_r(*r, *dz, &m, &z, ctx)
            }
            Expr::Wp { dz, arg } => {
                let z = arg.eval_num(env, engine, ctx)?;
                engine.wp(*dz, &z, ctx)
            }
            Expr::ZetaHalf => engine.zeta_half(ctx),
        }
    }

    /// Exact evaluation; defined when no elliptic primitive appears. The
    /// optional exponential assignment evaluates Exp(affine) leaves through
    /// half-unit base values (so half-integer exponents stay exact).
    pub fn eval_exact(&self, env: &ExactEnv) -> Result<GaussRat, CoreError> {
        match self {
            Expr::Const(c) => Ok(c.clone()),
            Expr::Sym(s) => env
                .syms
                .get(s)
                .cloned()
                .ok_or_else(|| CoreError::UnassignedSymbol(s.clone())),
            Expr::Aff(f) => {
                let mut acc = GaussRat::zero();
                for (a, x) in f.coeffs.iter().zip(&env.x) {
                    acc = &acc + &x.scale_rat(a);
                }
                acc = &acc + &env.c.scale_rat(&f.cterm);
                Ok(acc)
            }
            Expr::Add(v) => {
                let mut acc = GaussRat::zero();
                for e in v {
                    acc = &acc + &e.eval_exact(env)?;
                }
                Ok(acc)
            }
            Expr::Mul(v) => {
                let mut acc = GaussRat::one();
                for e in v {
                    acc = &acc * &e.eval_exact(env)?;
                }
                Ok(acc)
            }
            Expr::Div(a, b) => {
                let bv = b.eval_exact(env)?;
                if bv.is_zero() {
                    return Err(CoreError::DivisionByZero);
                }
                Ok(&a.eval_exact(env)? / &bv)
            }
            Expr::Pow(a, n) => Ok(a.eval_exact(env)?.pow(*n)),
            Expr::Exp(a) => match a.as_ref() {
                Expr::Aff(f) => {
                    let bases = env
                        .exp_half_bases
                        .as_ref()
                        .ok_or_else(|| CoreError::UnassignedSymbol("exp basis".into()))?;
                    let mut acc = GaussRat::one();
                    for (v, b) in f.coeffs.iter().zip(&bases.x_half) {
                        let two_v = v * crate::scalar::rat_int(2);
                        if !two_v.is_integer() {
                            return Err(CoreError::Invalid(
                                "exponent denominator beyond 2 in exact evaluation".into(),
                            ));
                        }
                        acc = &acc * &b.pow(rat_to_i64(&two_v));
                    }
                    let two_t = &f.cterm * crate::scalar::rat_int(2);
                    if !two_t.is_integer() {
                        return Err(CoreError::Invalid(
                            "c-exponent denominator beyond 2 in exact evaluation".into(),
                        ));
                    }
                    acc = &acc * &bases.c_half.pow(rat_to_i64(&two_t));
                    Ok(acc)
                }
                _ => Err(CoreError::Invalid(
                    "exact Exp only supported on affine arguments".into(),
                )),
            },
            Expr::Theta { .. } | Expr::Sigma { .. } | Expr::Wp { .. } | Expr::ZetaHalf => {
                Err(CoreError::ExactOnElliptic)
            }
        }
    }
}

fn rat_to_i64(r: &Rat) -> i64 {
    use num_traits::ToPrimitive;
    r.to_integer().to_i64().expect("exponent out of range")
}

trait ScaleRat {
    fn scale_rat(&self, r: &Rat) -> GaussRat;
}

impl ScaleRat for GaussRat {
    fn scale_rat(&self, r: &Rat) -> GaussRat {
        GaussRat::new(&self.re * r, &self.im * r)
    }
}

/// Float evaluation environment: ambient point, shift value and symbols,
/// all exact so the precision of the evaluation is set by `T` alone.
pub struct NumEnv<T: CF> {
    pub x: Vec<T>,
    pub c: T,
    pub syms: BTreeMap<String, GaussRat>,
}

impl<T: CF> NumEnv<T> {
    pub fn from_exact(x: &[GaussRat], c: &GaussRat, ctx: &mut T::Ctx) -> Self {
        NumEnv {
            x: x.iter().map(|v| T::from_rat(v, ctx)).collect(),
            c: T::from_rat(c, ctx),
            syms: BTreeMap::new(),
        }
    }
}

/// Exact evaluation environment.
#[derive(Clone, Default)]
pub struct ExactEnv {
    pub x: Vec<GaussRat>,
    pub c: GaussRat,
    pub syms: BTreeMap<String, GaussRat>,
    pub exp_half_bases: Option<ExpHalfBases>,
}

/// e^{x_i/2} and e^{c/2} values for exact trigonometric evaluation.
#[derive(Clone)]
pub struct ExpHalfBases {
    pub x_half: Vec<GaussRat>,
    pub c_half: GaussRat,
}
