//! Quadratic Gauss sums: brute force in F_p and C, closed forms, and the shared summation engine.

pub mod sum;

use crate::arith::{rat, Params, Rational, Tag, FpElem};
use crate::coeffring::{ComplexVal, GaussCoeff};
use crate::error::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Fp,
    Complex,
}

/// What a sum with vanishing quadratic coefficient evaluates to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Mode {
    /// Character orthogonality: M when M | b, else 0.
    #[default]
    Extended,
    /// Always 0.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussSumSpec {
    pub a: i64,
    pub b: i64,
    #[serde(rename = "M")]
    pub m: u64,
    pub domain: Tag,
    pub backend: Backend,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaussValue {
    Fp(FpElem),
    Complex(ComplexVal),
}

impl GaussSumSpec {
    pub fn new(a: i64, b: i64, m: u64) -> Self {
        GaussSumSpec { a, b, m, domain: Tag::V, backend: Backend::Fp }
    }

    pub fn with_backend(self, backend: Backend) -> Self {
        GaussSumSpec { backend, ..self }
    }

    pub fn with_domain(self, domain: Tag) -> Self {
        GaussSumSpec { domain, ..self }
    }

    pub fn validate(&self, params: &Params) -> Result<()> {
        if self.m == 0 {
            return Err(Error::BadModulus(0));
        }
        if self.a != 0 && self.m % (4 * self.a.unsigned_abs()) != 0 {
            return Err(Error::Precondition(format!("4|a| must divide M (a={}, M={})", self.a, self.m)));
        }
        if self.backend == Backend::Fp && (params.p - 1) % (2 * self.m) != 0 {
            return Err(Error::BadModulus(self.m));
        }
        Ok(())
    }

    fn weight(&self) -> u64 {
        self.a.unsigned_abs().max(1)
    }

    fn exponent(&self, n: u64) -> u64 {
        // (a n^2 + 2 b n) mod 2M
        let two_m = 2 * self.m as i128;
        let n = n as i128;
        ((self.a as i128 * n * n + 2 * self.b as i128 * n).rem_euclid(two_m)) as u64
    }
}

const CHUNK: u64 = 1 << 14;

/// (1/|a|) sum_{n mod M} e((a n^2 + 2 b n) / 2M); the plain full sum when a = 0.
/// Equals the one-period sum over 0 < n <= M/|a| whenever a | b.
pub fn gauss_brute(params: &Params, spec: &GaussSumSpec) -> Result<GaussValue> {
    gauss_brute_partitioned(params, spec, CHUNK)
}

/// Same as `gauss_brute`, reducing over index chunks of the given length in parallel.
/// The F_p result is independent of the chunk length; complex chunks are combined in index order.
pub fn gauss_brute_partitioned(params: &Params, spec: &GaussSumSpec, chunk: u64) -> Result<GaussValue> {
    spec.validate(params)?;
    let chunk = chunk.max(1);
    let chunks: Vec<(u64, u64)> = (0..spec.m.div_ceil(chunk))
        .map(|c| (c * chunk, ((c + 1) * chunk).min(spec.m)))
        .collect();
    match spec.backend {
        Backend::Fp => {
            let table = params.char_table(2 * spec.m)?;
            let p = params.p as u128;
            let total = chunks
                .par_iter()
                .map(|&(lo, hi)| {
                    let mut acc = 0u128;
                    for n in lo..hi {
                        acc += table[spec.exponent(n) as usize].0 as u128;
                    }
                    (acc % p) as u64
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold(FpElem(0), |s, x| params.add(s, FpElem(x)));
            let w = params.inv(FpElem(spec.weight()))?;
            Ok(GaussValue::Fp(params.mul(total, w)))
        }
        Backend::Complex => {
            let partial: Vec<(Complex64, Complex64)> = chunks
                .par_iter()
                .map(|&(lo, hi)| {
                    let mut k = Kahan::default();
                    for n in lo..hi {
                        let ang = PI * spec.exponent(n) as f64 / spec.m as f64;
                        k.add(Complex64::from_polar(1.0, ang));
                    }
                    (k.sum, k.comp)
                })
                .collect();
            let mut k = Kahan::default();
            for (s, c) in partial {
                k.add(s);
                k.add(-c);
            }
            Ok(GaussValue::Complex((k.sum / spec.weight() as f64).into()))
        }
    }
}

#[derive(Default)]
struct Kahan {
    sum: Complex64,
    comp: Complex64,
}

impl Kahan {
    fn add(&mut self, x: Complex64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Literal sum over 0 < n <= M/|a| (0 < n <= M when a = 0), in F_p.
pub fn gauss_one_period(params: &Params, spec: &GaussSumSpec) -> Result<FpElem> {
    spec.validate(params)?;
    let table = params.char_table(2 * spec.m)?;
    let top = spec.m / spec.weight();
    Ok((1..=top).fold(FpElem(0), |acc, n| params.add(acc, table[spec.exponent(n) as usize])))
}

/// Closed form of `gauss_brute` as a Gaussian coefficient in the scale of `spec.domain`:
/// a | b gives sqrt(M/|a|) e(sgn(a)/8) e(-b^2/(2aM)), a not dividing b gives 0,
/// and a = 0 gives M [M | b] (extended) or 0 (strict).
pub fn gauss_closed(params: &Params, spec: &GaussSumSpec, mode: Mode) -> Result<GaussCoeff> {
    if spec.m == 0 {
        return Err(Error::BadModulus(0));
    }
    let tag = spec.domain;
    let m = spec.m as i64;
    if spec.a == 0 {
        return Ok(match mode {
            Mode::Extended if spec.b.rem_euclid(m) == 0 => GaussCoeff::count_scale(params, tag, &rat(m, 1)),
            _ => GaussCoeff::zero(),
        });
    }
    let abs_a = spec.a.abs();
    if m % (4 * abs_a) != 0 {
        return Err(Error::Precondition(format!("4|a| must divide M (a={}, M={m})", spec.a)));
    }
    if spec.b % abs_a != 0 {
        return Ok(GaussCoeff::zero());
    }
    let root = GaussCoeff::sqrt_scale(params, tag, &rat(m, abs_a))?;
    let e8 = GaussCoeff::e8_pow(spec.a.signum());
    let b = spec.b as i128;
    let q = Rational::new((-b * b).into(), (2 * spec.a as i128 * m as i128).into());
    root.mul(&e8)?.mul(&GaussCoeff::phase(q, tag))
}

/// Closed form of (1/m) sum_{0<r<=N_u/a} e(-a r^2 / 2N_u) on the U scale: e(-1/8) j / sqrt(a).
pub fn gauss_closed_sm(params: &Params, a: i64) -> Result<GaussCoeff> {
    if a <= 0 || params.n_u % (4 * a as u64) != 0 {
        return Err(Error::Precondition(format!("need a > 0 and 4a | N_u, got a={a}")));
    }
    let spec = GaussSumSpec::new(-a, 0, params.n_u).with_domain(Tag::U);
    let full = gauss_closed(params, &spec, Mode::Extended)?;
    full.mul(&GaussCoeff::rational(rat(1, params.m as i64)))
}

/// Brute-force F_p value of (1/m) sum_{0<r<=N_u/a} e(-a r^2 / 2N_u).
pub fn gauss_brute_sm(params: &Params, a: i64) -> Result<FpElem> {
    let spec = GaussSumSpec::new(-a, 0, params.n_u);
    let s = gauss_one_period(params, &spec)?;
    Ok(params.mul(s, params.inv(FpElem(params.m))?))
}

/// Evaluates a closed-form coefficient in the backend of `spec`.
pub fn eval_coeff(params: &Params, x: &GaussCoeff, backend: Backend) -> Result<GaussValue> {
    Ok(match backend {
        Backend::Fp => GaussValue::Fp(x.to_fp(params)?),
        Backend::Complex => GaussValue::Complex(x.to_complex(params)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{find_params, ParamSpec};
    use std::sync::OnceLock;

    fn params() -> &'static Params {
        static P: OnceLock<Params> = OnceLock::new();
        P.get_or_init(Params::default_tower)
    }

    fn fp(v: GaussValue) -> FpElem {
        match v {
            GaussValue::Fp(x) => x,
            _ => panic!("expected F_p"),
        }
    }

    fn cx(v: GaussValue) -> Complex64 {
        match v {
            GaussValue::Complex(x) => x.to_c64(),
            _ => panic!("expected complex"),
        }
    }

    #[test]
    fn basic_form_complex() {
        let p = params();
        let v = cx(gauss_brute(p, &GaussSumSpec::new(1, 0, 16).with_backend(Backend::Complex)).unwrap());
        assert!((v - Complex64::from_polar(4.0, PI / 4.0)).norm() < 1e-10);
    }

    #[test]
    fn orthogonality() {
        let p = params();
        assert_eq!(fp(gauss_brute(p, &GaussSumSpec::new(0, 1, 16)).unwrap()), FpElem(0));
        assert_eq!(fp(gauss_brute(p, &GaussSumSpec::new(0, 16, 16)).unwrap()), FpElem(16));
    }

    #[test]
    fn closed_matches_brute_small() {
        let p = params();
        for (a, b, m) in [(2, 2, 32), (1, 3, 144), (1, 0, 144), (-3, 6, 144), (2, 1, 32), (-1, 5, 16)] {
            let spec = GaussSumSpec::new(a, b, m);
            let closed = gauss_closed(p, &spec, Mode::Extended).unwrap();
            assert_eq!(closed.to_fp(p).unwrap(), fp(gauss_brute(p, &spec).unwrap()), "a={a} b={b} M={m}");
        }
        let spec = GaussSumSpec::new(2, 1, 32);
        assert!(gauss_closed(p, &spec, Mode::Extended).unwrap().is_zero());
    }

    #[test]
    fn closed_text_examples() {
        let p = params();
        let m = p.n_v;
        let basic = gauss_closed(p, &GaussSumSpec::new(1, 0, m), Mode::Extended).unwrap();
        assert_eq!(basic, GaussCoeff::int(12).mul(&GaussCoeff::e8_pow(1)).unwrap());
        let shifted = gauss_closed(p, &GaussSumSpec::new(1, 3, m), Mode::Extended).unwrap();
        let expect = basic.mul(&GaussCoeff::phase(rat(-9, 2 * m as i64), Tag::V)).unwrap();
        assert_eq!(shifted, expect);
    }

    #[test]
    fn strict_mode_zero() {
        let p = params();
        let spec = GaussSumSpec::new(0, 0, 16);
        assert!(gauss_closed(p, &spec, Mode::Strict).unwrap().is_zero());
        assert_eq!(gauss_closed(p, &spec, Mode::Extended).unwrap(), GaussCoeff::int(16));
    }

    #[test]
    fn precondition() {
        let p = params();
        assert!(matches!(
            gauss_closed(p, &GaussSumSpec::new(3, 0, 16), Mode::Extended),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn one_period_sum_matches_iff_a_divides_b() {
        let p = params();
        for a in [-4i64, -2, -1, 1, 2, 4] {
            for b in -6i64..=6 {
                let spec = GaussSumSpec::new(a, b, 32);
                let full = fp(gauss_brute(p, &spec).unwrap());
                let one = gauss_one_period(p, &spec).unwrap();
                if b % a != 0 {
                    assert_eq!(full, FpElem(0), "a={a} b={b}");
                } else {
                    assert_eq!(full, one, "a={a} b={b}");
                    // two consecutive periods agree
                    let period = 32 / a.unsigned_abs();
                    let t = p.char_table(64).unwrap();
                    for n in 0..period {
                        assert_eq!(t[spec.exponent(n) as usize], t[spec.exponent(n + period) as usize]);
                    }
                }
            }
        }
        // Without a | b one period is not a full period.
        let spec = GaussSumSpec::new(2, 1, 16);
        assert_ne!(gauss_one_period(p, &spec).unwrap(), FpElem(0));
    }

    #[test]
    fn partition_independent() {
        let p = params();
        let spec = GaussSumSpec::new(-3, 6, p.n_v);
        let a = gauss_brute_partitioned(p, &spec, 1).unwrap();
        let b = gauss_brute_partitioned(p, &spec, 7).unwrap();
        let c = gauss_brute_partitioned(p, &spec, 1 << 20).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
        let cs = spec.with_backend(Backend::Complex);
        let x = cx(gauss_brute_partitioned(p, &cs, 5).unwrap());
        let y = cx(gauss_brute_partitioned(p, &cs, 1 << 20).unwrap());
        assert!((x - y).norm() < 1e-12);
    }

    #[test]
    fn complex_consistency() {
        let p = params();
        for (a, b, m) in [(1, 0, 4096), (-2, 4, 1024), (3, 9, 144), (-1, 7, 16)] {
            let spec = GaussSumSpec::new(a, b, m).with_backend(Backend::Complex);
            let closed = gauss_closed(p, &spec, Mode::Extended).unwrap().to_complex(p).unwrap().to_c64();
            let brute = cx(gauss_brute(p, &spec).unwrap());
            assert!((closed - brute).norm() < 1e-8, "a={a} b={b} M={m}: {closed} vs {brute}");
        }
    }

    #[test]
    fn sm_closed_form_matches_brute() {
        let p = params();
        for a in [1, 2, 3, 4, 6] {
            let closed = gauss_closed_sm(p, a).unwrap();
            assert_eq!(closed.to_fp(p).unwrap(), gauss_brute_sm(p, a).unwrap(), "a={a}");
        }
        let one = gauss_closed_sm(p, 1).unwrap();
        assert_eq!(one, GaussCoeff::e8_pow(-1).mul(&GaussCoeff::j_pow(1)).unwrap());
        let four = gauss_closed_sm(p, 4).unwrap();
        assert_eq!(four, one.mul(&GaussCoeff::rational(rat(1, 2))).unwrap());
    }

    #[test]
    fn g2_convention() {
        // The value that is true in F_p specializes to exp(-i pi/2)/sqrt(a); the displayed
        // e(1/8) j / sqrt(a) is the one that specializes to a real number.
        let p = params();
        let v = gauss_closed_sm(p, 1).unwrap().to_complex(p).unwrap().to_c64();
        assert!((v - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        let displayed = GaussCoeff::e8_pow(1).mul(&GaussCoeff::j_pow(1)).unwrap();
        let w = displayed.to_complex(p).unwrap().to_c64();
        assert!((w - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert_ne!(displayed.to_fp(p).unwrap(), gauss_brute_sm(p, 1).unwrap());
    }

    #[test]
    fn small_tower_u_scale() {
        let p = find_params(&ParamSpec::new(4, 2)).unwrap();
        let spec = GaussSumSpec::new(-2, 4, p.n_u).with_domain(Tag::U);
        let c = gauss_closed(&p, &spec, Mode::Extended).unwrap();
        assert_eq!(c.a, 1);
        assert_eq!(c.to_fp(&p).unwrap(), fp(gauss_brute(&p, &spec).unwrap()));
    }
}
