//! Jacobi theta functions, the sigma kernels of the elliptic layer, and the
//! Weierstrass functions derived from them.
//!
//! theta_1 is the odd Jacobi theta of the curve C/(Z + Z tau), computed from
//! the sine q-series with nome exp(i pi tau); the other three thetas use the
//! matching series. Derivatives are term-wise. The sigma kernel is
//!     sigma_mu(z) = theta(z - mu) theta'(0) / (theta(z) theta(-mu)),
//! its z-derivatives come from truncated-Taylor (jet) arithmetic, and
//!     wp(z) = -(log theta_1)''(z) + theta_1'''(0) / (3 theta_1'(0)),
//!     zeta(1/2) = -theta_1'''(0) / (6 theta_1'(0)).

use crate::error::CoreError;
use crate::numeric::{NumKey, CF};
use crate::scalar::GaussRat;
use std::collections::HashMap;

/// Elliptic modulus and evaluation controls.
#[derive(Clone, Debug)]
pub struct EllipticParams {
    /// modulus with Im > 0, kept exact for reproducibility
    pub tau: GaussRat,
    /// working precision in bits for the Mpc path
    pub prec_bits: usize,
    /// absolute truncation tolerance for the q-series (0 = precision-driven)
    pub tol: f64,
    /// hard cap on series terms
    pub term_cap: usize,
}

impl EllipticParams {
    pub fn new(tau: GaussRat, prec_bits: usize) -> Result<Self, CoreError> {
        use num_traits::Signed;
        if !tau.im.is_positive() {
            return Err(CoreError::Invalid("Im(tau) must be positive".into()));
        }
        Ok(EllipticParams {
            tau,
            prec_bits,
            tol: 0.0,
            term_cap: 4000,
        })
    }
}

/// Numeric theta engine for one modulus at one precision, with memoised
/// theta evaluations.
pub struct ThetaEngine<T: CF> {
    pub params: EllipticParams,
    tau: T,
    pi: T,
    /// nome q = exp(i pi tau)
    q: T,
    cache: HashMap<(u8, u8, NumKey), T>,
}

impl<T: CF> ThetaEngine<T> {
    pub fn new(params: EllipticParams, ctx: &mut T::Ctx) -> Self {
        let tau = T::from_rat(&params.tau, ctx);
        let pi = T::pi(ctx);
        let i = T::i(ctx);
        let q = i.mul(&pi, ctx).mul(&tau, ctx).exp(ctx);
        ThetaEngine {
            params,
            tau,
            pi,
            q,
            cache: HashMap::new(),
        }
    }

    pub fn tau(&self) -> &T {
        &self.tau
    }

    /// theta_r^{(dz)}(z | tau), r in 1..=4.
    pub fn theta(&mut self, r: u8, dz: u8, z: &T, ctx: &mut T::Ctx) -> Result<T, CoreError> {
        let key = (r, dz, z.key());
        if let Some(v) = self.cache.get(&key) {
            return Ok(v.clone());
        }
        let v = self.theta_series(r, dz, z, ctx)?;
        self.cache.insert(key, v.clone());
        Ok(v)
    }

    fn theta_series(&self, r: u8, dz: u8, z: &T, ctx: &mut T::Ctx) -> Result<T, CoreError> {
        let prec = T::prec_bits(ctx) as i64;
        let tol_exp = if self.params.tol > 0.0 {
            self.params.tol.log2().floor() as i64
        } else {
            i64::MIN
        };
        let pi = self.pi.clone();
        let i_unit = T::i(ctx);
        let two = T::from_i64(2, ctx);
        // w = exp(i pi z); u_n = w^(2n+1) resp w^(2n); v = 1/u
        let w = i_unit.mul(&pi, ctx).mul(z, ctx).exp(ctx);
        let w2 = w.mul(&w, ctx);
        let one = T::one(ctx);
        let w2i = one.div(&w2, ctx);

        let half_series = matches!(r, 1 | 2); // exponents (n+1/2)^2, odd multiples of pi z
        let mut sum = if half_series || dz > 0 {
            T::zero(ctx)
        } else {
            T::one(ctx)
        };
        let mut max_exp2 = sum.mag_exp2();
        let mut max_term_exp2 = i64::MIN;

        // q powers
        let q = self.q.clone();
        let q2 = q.mul(&q, ctx);
        // half_series: qp = q^{(n+1/2)^2}, starts q^{1/4}; ratio q^{2n+2}
        // integer series: qp = q^{n^2}, starts q (n=1); ratio q^{2n+1}
        let mut qp;
        let mut ratio;
        if half_series {
            // q^{1/4} = exp(i pi tau / 4)
            let quarter = T::from_rat(&GaussRat::from_frac(1, 4), ctx);
            qp = i_unit
                .mul(&pi, ctx)
                .mul(&self.tau, ctx)
                .mul(&quarter, ctx)
                .exp(ctx);
            ratio = q2.clone(); // q^{2n+2} at n=0
        } else {
            qp = q.clone();
            ratio = q2.mul(&q, ctx); // q^{2n+1} at n=1 -> q^3
        }

        let mut un;
        let mut vn;
        if half_series {
            un = w.clone();
            vn = one.div(&w, ctx);
        } else {
            un = w2.clone();
            vn = w2i.clone();
        }

        let mut small_streak = 0;
        let mut n: i64 = if half_series { 0 } else { 1 };
        loop {
            // angular factor with dz-th derivative:
            // theta1: sin((2n+1)piz): d-th deriv cycles sin,cos,-sin,-cos
            // theta2: cos((2n+1)piz): cycles cos,-sin,-cos,sin
            // theta3/4: cos(2n pi z)
            let m = if half_series { 2 * n + 1 } else { 2 * n };
            let mf = T::from_i64(m, ctx);
            let coef = mf.mul(&pi, ctx).powi(dz as i64, ctx);
            // sin = (u - v)/(2i), cos = (u + v)/2
            let sin = un.sub(&vn, ctx).div(&two.mul(&i_unit, ctx), ctx);
            let cos = un.add(&vn, ctx).div(&two, ctx);
            let base_is_sin = r == 1;
            let phase = dz % 4;
            let ang = match (base_is_sin, phase) {
                (true, 0) => sin.clone(),
                (true, 1) => cos.clone(),
                (true, 2) => sin.neg(ctx),
                (true, 3) => cos.neg(ctx),
                (false, 0) => cos.clone(),
                (false, 1) => sin.neg(ctx),
                (false, 2) => cos.neg(ctx),
                (false, 3) => sin.clone(),
                _ => unreachable!(),
            };
            let sign = match r {
                1 | 4 => {
                    if n % 2 == 1 {
                        -1
                    } else {
                        1
                    }
                }
                _ => 1,
            };
            let mut term = two.mul(&qp, ctx).mul(&coef, ctx).mul(&ang, ctx);
            if sign < 0 {
                term = term.neg(ctx);
            }
            sum = sum.add(&term, ctx);
            max_exp2 = max_exp2.max(sum.mag_exp2());

            // truncation: term magnitude below precision-relative threshold
            // (and below the absolute tolerance when one is configured)
            let te = term.mag_exp2();
            max_term_exp2 = max_term_exp2.max(te);
            let rel_thr = max_exp2.max(max_term_exp2).saturating_sub(prec + 8);
            let done_rel = te == i64::MIN || te < rel_thr;
            let done_abs = tol_exp == i64::MIN || te == i64::MIN || te < tol_exp;
            if done_rel && done_abs {
                small_streak += 1;
                if small_streak >= 2 {
                    break;
                }
            } else {
                small_streak = 0;
            }

            n += 1;
            if n as usize > self.params.term_cap {
                return Err(CoreError::ThetaTermCap(self.params.term_cap));
            }
            qp = qp.mul(&ratio, ctx);
            ratio = ratio.mul(&q2, ctx);
            un = un.mul(&w2, ctx);
            vn = vn.mul(&w2i, ctx);
        }
        Ok(sum)
    }

    /// Jet [f(z), f'(z), ..., f^{(ord)}(z)] of theta_r at z.
    pub fn theta_jet(
        &mut self,
        r: u8,
        ord: u8,
        z: &T,
        ctx: &mut T::Ctx,
    ) -> Result<Vec<T>, CoreError> {
        (0..=ord).map(|d| self.theta(r, d, z, ctx)).collect()
    }

    /// theta_1'(0)
    pub fn theta1_prime0(&mut self, ctx: &mut T::Ctx) -> Result<T, CoreError> {
        let z0 = T::zero(ctx);
        self.theta(1, 1, &z0, ctx)
    }

    /// Weierstrass zeta(1/2) = -theta1'''(0) / (6 theta1'(0)).
    pub fn zeta_half(&mut self, ctx: &mut T::Ctx) -> Result<T, CoreError> {
        let z0 = T::zero(ctx);
        let t3 = self.theta(1, 3, &z0, ctx)?;
        let t1 = self.theta(1, 1, &z0, ctx)?;
        let six = T::from_i64(-6, ctx);
        Ok(t3.div(&t1.mul(&six, ctx), ctx))
    }

    /// sigma^{(dz)}_mu(z) for the theta-index r (0..=3 selects theta_{r+1} in
    /// the z slots; r = 0 is the plain sigma of the elliptic Dunkl layer).
    pub fn sigma_r(
        &mut self,
        r: u8,
        dz: u8,
        mu: &T,
        z: &T,
        ctx: &mut T::Ctx,
    ) -> Result<T, CoreError> {
        if dz > 6 {
            return Err(CoreError::DerivOrderUnsupported(dz));
        }
        let tr = r + 1;
        let zmmu = z.sub(mu, ctx);
        let num = self.theta_jet(tr, dz, &zmmu, ctx)?;
        let den = self.theta_jet(tr, dz, z, ctx)?;
        let t10 = self.theta1_prime0(ctx)?;
        let mmu = mu.neg(ctx);
        let z0 = T::zero(ctx);
        let th1_mmu = self.theta(1, 0, &mmu, ctx)?;
        let _ = z0;
        let scalar = t10.div(&th1_mmu, ctx);
        let quot = jet_div(&num, &den, ctx);
        Ok(quot[dz as usize].mul(&scalar, ctx))
    }

    /// Weierstrass wp^{(dz)}(z) with periods 1, tau.
    pub fn wp(&mut self, dz: u8, z: &T, ctx: &mut T::Ctx) -> Result<T, CoreError> {
        if dz > 6 {
            return Err(CoreError::DerivOrderUnsupported(dz));
        }
        let ord = dz + 2;
        let th = self.theta_jet(1, ord, z, ctx)?;
        // log-derivative jet: q = theta'/theta to order ord-1
        let shifted: Vec<T> = th[1..].to_vec();
        let base: Vec<T> = th[..th.len() - 1].to_vec();
        let logd = jet_div(&shifted, &base, ctx);
        // (log theta)'' jet to order ord-2: derivative of logd
        let second: Vec<T> = logd[1..].to_vec();
        let mut v = second[dz as usize].neg(ctx);
        if dz == 0 {
            let z0 = T::zero(ctx);
            let t3 = self.theta(1, 3, &z0, ctx)?;
            let t1 = self.theta(1, 1, &z0, ctx)?;
            let three = T::from_i64(3, ctx);
            let c = t3.div(&t1.mul(&three, ctx), ctx);
            v = v.add(&c, ctx);
        }
        Ok(v)
    }

    /// v_mu(z; g) = sum_r g_r sigma^r_{2 mu}(z) of the Inozemtsev layer.
    pub fn v_mu(
        &mut self,
        dz: u8,
        mu: &T,
        z: &T,
        g: &[T; 4],
        ctx: &mut T::Ctx,
    ) -> Result<T, CoreError> {
        let two = T::from_i64(2, ctx);
        let mu2 = mu.mul(&two, ctx);
        let mut acc = T::zero(ctx);
        for r in 0..4u8 {
            if g[r as usize].mag_exp2() == i64::MIN {
                continue;
            }
            let s = self.sigma_r(r, dz, &mu2, z, ctx)?;
            acc = acc.add(&s.mul(&g[r as usize], ctx), ctx);
        }
        Ok(acc)
    }

    /// Approximate distance of z from the lattice Z + Z tau (f64 estimate).
    pub fn lattice_distance(&self, z: &T) -> f64 {
        let zr = z.re_f64();
        let zi = z.im_f64();
        let tr = self.tau.re_f64();
        let ti = self.tau.im_f64();
        let b = zi / ti;
        let a = zr - b * tr;
        let db = b - b.round();
        let da = a - a.round();
        let dx = da + db * tr;
        let dy = db * ti;
        dx.hypot(dy)
    }

    pub fn check_regular(&self, z: &T) -> Result<(), CoreError> {
        if self.lattice_distance(z) < 1e-8 {
            Err(CoreError::PoleProximity)
        } else {
            Ok(())
        }
    }
}

/// Jet division h = f/g on derivative lists (same length), via
/// h^{(n)} = (f^{(n)} - sum_{k<n} C(n,k) h^{(k)} g^{(n-k)}) / g^{(0)}.
pub fn jet_div<T: CF>(f: &[T], g: &[T], ctx: &mut T::Ctx) -> Vec<T> {
    let n = f.len();
    assert_eq!(g.len(), n);
    let mut h: Vec<T> = Vec::with_capacity(n);
    for d in 0..n {
        let mut acc = f[d].clone();
        for k in 0..d {
            let c = binom(d, k);
            let cf = T::from_i64(c, ctx);
            let t = cf.mul(&h[k], ctx).mul(&g[d - k], ctx);
            acc = acc.sub(&t, ctx);
        }
        h.push(acc.div(&g[0], ctx));
    }
    h
}

/// Jet multiplication on derivative lists.
pub fn jet_mul<T: CF>(f: &[T], g: &[T], ctx: &mut T::Ctx) -> Vec<T> {
    let n = f.len().min(g.len());
    let mut h = Vec::with_capacity(n);
    for d in 0..n {
        let mut acc = T::zero(ctx);
        for k in 0..=d {
            let c = T::from_i64(binom(d, k), ctx);
            let t = c.mul(&f[k], ctx).mul(&g[d - k], ctx);
            acc = acc.add(&t, ctx);
        }
        h.push(acc);
    }
    h
}

fn binom(n: usize, k: usize) -> i64 {
    let mut r = 1i64;
    for j in 0..k {
        r = r * (n - j) as i64 / (j + 1) as i64;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::C64;
    use crate::scalar::{rat, GaussRat};
    use num_complex::Complex64;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn engine() -> ThetaEngine<C64> {
        let tau = GaussRat::new(rat(1, 5), rat(11, 10)); // 0.2 + 1.1 i
        let p = EllipticParams::new(tau, 53).unwrap();
        ThetaEngine::new(p, &mut ())
    }

    fn c(re: f64, im: f64) -> C64 {
        Complex64::new(re, im)
    }

    fn rand_z(rng: &mut StdRng) -> C64 {
        c(rng.gen_range(-0.9..0.9), rng.gen_range(-0.4..0.4))
    }

    #[test]
    fn theta1_is_odd_and_vanishes_at_zero() {
        let mut e = engine();
        let z0 = c(0.0, 0.0);
        let v = e.theta(1, 0, &z0, &mut ()).unwrap();
        assert!(v.abs() < 1e-14);
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..100 {
            let z = rand_z(&mut rng);
            let a = e.theta(1, 0, &z, &mut ()).unwrap();
            let b = e.theta(1, 0, &(-z), &mut ()).unwrap();
            assert!((a + b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn theta1_quasi_periodicity() {
        // theta1(z+1) = -theta1(z); theta1(z+tau) = -q^{-1} e^{-2 i pi z} theta1(z)
        let mut e = engine();
        let tau = c(0.2, 1.1);
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..50 {
            let z = rand_z(&mut rng);
            let a = e.theta(1, 0, &(z + c(1.0, 0.0)), &mut ()).unwrap();
            let b = e.theta(1, 0, &z, &mut ()).unwrap();
            assert!((a + b).abs() < 1e-11 * (1.0 + b.abs()));
            let at = e.theta(1, 0, &(z + tau), &mut ()).unwrap();
            let want = -b * (-Complex64::i() * std::f64::consts::PI * (tau + 2.0 * z)).exp();
            assert!((at - want).abs() < 1e-10 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn theta_derivative_matches_finite_difference() {
        let mut e = engine();
        let mut rng = StdRng::seed_from_u64(5);
        for r in 1..=4u8 {
            for _ in 0..10 {
                let z = rand_z(&mut rng);
                let h = 1e-5;
                let fp = e.theta(r, 0, &(z + c(h, 0.0)), &mut ()).unwrap();
                let fm = e.theta(r, 0, &(z - c(h, 0.0)), &mut ()).unwrap();
                let fd = (fp - fm) / c(2.0 * h, 0.0);
                let d = e.theta(r, 1, &z, &mut ()).unwrap();
                assert!(
                    (fd - d).abs() < 1e-6 * (1.0 + d.abs()),
                    "theta_{} deriv mismatch",
                    r
                );
            }
        }
    }

    #[test]
    fn sigma_product_identity() {
        // sigma_mu(z) sigma_{-mu}(-z) ... equals wp(mu) - wp(z)
        // (identity underlying R-matrix unitarity; verified numerically)
        let mut e = engine();
        let mut rng = StdRng::seed_from_u64(6);
        for _ in 0..40 {
            let z = rand_z(&mut rng);
            let mu = rand_z(&mut rng);
            if e.lattice_distance(&z) < 1e-3
                || e.lattice_distance(&mu) < 1e-3
                || e.lattice_distance(&(z - mu)) < 1e-3
                || e.lattice_distance(&(z + mu)) < 1e-3
            {
                continue;
            }
            let a = e.sigma_r(0, 0, &mu, &z, &mut ()).unwrap();
            let b = e.sigma_r(0, 0, &mu, &(-z), &mut ()).unwrap();
            let lhs = a * b;
            let rhs = e.wp(0, &mu, &mut ()).unwrap() - e.wp(0, &z, &mut ()).unwrap();
            assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn sigma_prime_limit_is_minus_wp_minus_two_zeta_half() {
        let mut e = engine();
        let z = c(0.31, 0.17);
        let zh = e.zeta_half(&mut ()).unwrap();
        let wp = e.wp(0, &z, &mut ()).unwrap();
        let target = -wp - 2.0 * zh;
        // sigma'_mu(z) converges linearly in mu; two-point Richardson
        let v1 = e.sigma_r(0, 1, &c(1e-3, 0.0), &z, &mut ()).unwrap();
        let v2 = e.sigma_r(0, 1, &c(5e-4, 0.0), &z, &mut ()).unwrap();
        let extrap = 2.0 * v2 - v1;
        assert!((extrap - target).abs() < 1e-6 * (1.0 + target.abs()));
    }

    #[test]
    fn wp_is_even_and_matches_lattice_sum_shape() {
        let mut e = engine();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..30 {
            let z = rand_z(&mut rng);
            if e.lattice_distance(&z) < 1e-3 {
                continue;
            }
            let a = e.wp(0, &z, &mut ()).unwrap();
            let b = e.wp(0, &(-z), &mut ()).unwrap();
            assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
        }
        // wp(z) ~ 1/z^2 near 0
        let z = c(1e-3, 0.0);
        let v = e.wp(0, &z, &mut ()).unwrap();
        assert!((v - c(1e6, 0.0)).abs() < 1e2);
    }

    #[test]
    fn v_mu_matches_direct_theta_ratio() {
        let mut e = engine();
        let g = [c(0.3, 0.0), c(-0.7, 0.1), c(0.25, 0.0), c(1.5, -0.2)];
        let mu = c(0.21, 0.05);
        let z = c(0.4, -0.13);
        let v = e.v_mu(0, &mu, &z, &g, &mut ()).unwrap();
        // direct: sum g_r theta_{r+1}(z-2mu) theta1'(0) / (theta_{r+1}(z) theta1(-2mu))
        let t10 = e.theta(1, 1, &c(0.0, 0.0), &mut ()).unwrap();
        let th1m = e.theta(1, 0, &(-2.0 * mu), &mut ()).unwrap();
        let mut want = c(0.0, 0.0);
        for r in 0..4u8 {
            let num = e.theta(r + 1, 0, &(z - 2.0 * mu), &mut ()).unwrap();
            let den = e.theta(r + 1, 0, &z, &mut ()).unwrap();
            want += g[r as usize] * num * t10 / (den * th1m);
        }
        assert!((v - want).abs() < 1e-11 * (1.0 + want.abs()));
    }

    #[test]
    fn high_precision_theta_scales() {
        use crate::numeric::{MpCtx, Mpc};
        let tau = GaussRat::new(rat(0, 1), rat(3, 2));
        for bits in [128usize, 256] {
            let mut ctx = MpCtx::new(bits);
            let p = EllipticParams::new(tau.clone(), bits).unwrap();
            let mut e: ThetaEngine<Mpc> = ThetaEngine::new(p, &mut ctx);
            let z = Mpc::from_rat(&GaussRat::new(rat(1, 4), rat(1, 8)), &mut ctx);
            // oddness residual should sit at the working precision
            let a = e.theta(1, 0, &z, &mut ctx).unwrap();
            let zneg = z.neg(&mut ctx);
            let b = e.theta(1, 0, &zneg, &mut ctx).unwrap();
            let resid = a.add(&b, &mut ctx);
            let scale = a.abs().max(1.0);
            let bound = 2f64.powi(-(bits as i32) + 12);
            assert!(
                resid.abs() <= scale * bound,
                "bits={} resid={:e}",
                bits,
                resid.abs()
            );
        }
    }
}
