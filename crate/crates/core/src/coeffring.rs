//! Gaussian coefficients c·sqrt(rho)·j^a·e8^b·e(q) in normal form, with evaluation into F_p and C.

use crate::arith::{frac_part, rat, Params, Phase, Rational, Tag, FpElem, split_square};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussCoeff {
    pub zero: bool,
    pub c: Rational,
    /// Square-free positive integer under the root.
    pub rho: BigInt,
    /// Exponent of the scale generator j (j^2 = i); unbounded since the F_p residue j has no fixed order.
    pub a: i64,
    /// Exponent of e(1/8), mod 8.
    pub b: u8,
    pub phase: Option<Phase>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexVal {
    pub re: f64,
    pub im: f64,
}

impl ComplexVal {
    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<Complex64> for ComplexVal {
    fn from(z: Complex64) -> Self {
        ComplexVal { re: z.re, im: z.im }
    }
}

impl GaussCoeff {
    pub fn one() -> Self {
        GaussCoeff { zero: false, c: Rational::one(), rho: BigInt::one(), a: 0, b: 0, phase: None }
    }

    pub fn zero() -> Self {
        GaussCoeff { zero: true, c: Rational::zero(), rho: BigInt::one(), a: 0, b: 0, phase: None }
    }

    pub fn rational(c: Rational) -> Self {
        GaussCoeff { c, ..Self::one() }.normalized()
    }

    pub fn int(n: i64) -> Self {
        Self::rational(rat(n, 1))
    }

    pub fn sqrt(x: &Rational) -> Result<Self> {
        if !x.is_positive() {
            return Err(Error::Precondition(format!("sqrt of non-positive {x}")));
        }
        // sqrt(n/d) = sqrt(n d)/d
        let nd = x.numer() * x.denom();
        let (s, f) = split_square(&nd);
        Ok(GaussCoeff {
            c: Rational::new(s, x.denom().clone()),
            rho: f,
            ..Self::one()
        }
        .normalized())
    }

    pub fn j_pow(a: i64) -> Self {
        GaussCoeff { a, ..Self::one() }
    }

    pub fn e8_pow(b: i64) -> Self {
        GaussCoeff { b: b.rem_euclid(8) as u8, ..Self::one() }
    }

    pub fn phase(q: Rational, tag: Tag) -> Self {
        GaussCoeff { phase: Some(Phase::new(q, tag)), ..Self::one() }.normalized()
    }

    /// sqrt(x) at the scale of the domain: plain on V; sqrt(x/i)·j on U, so that sqrt(N_u) = sqrt(N_v)·j.
    pub fn sqrt_scale(params: &Params, tag: Tag, x: &Rational) -> Result<Self> {
        match tag {
            Tag::V => Self::sqrt(x),
            Tag::U => {
                let s = Self::sqrt(&(x / Rational::from_integer(BigInt::from(params.i))))?;
                s.mul(&Self::j_pow(1))
            }
        }
    }

    /// Counting factor M at the scale of the domain: M on V, (M/i)·j^2 on U.
    pub fn count_scale(params: &Params, tag: Tag, m: &Rational) -> Self {
        match tag {
            Tag::V => Self::rational(m.clone()),
            Tag::U => GaussCoeff {
                c: m / Rational::from_integer(BigInt::from(params.i)),
                a: 2,
                ..Self::one()
            }
            .normalized(),
        }
    }

    /// 1/sqrt(N) of the domain.
    pub fn inv_sqrt_n(params: &Params, tag: Tag) -> Self {
        Self::sqrt_scale(params, tag, &rat(params.n_of(tag) as i64, 1))
            .and_then(|s| s.inv())
            .expect("N is positive")
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    fn normalized(mut self) -> Self {
        if self.zero || self.c.is_zero() {
            return Self::zero();
        }
        if let Some(ph) = &self.phase {
            if ph.q.is_zero() {
                self.phase = None;
            }
        }
        self
    }

    pub fn phase_tag(&self) -> Option<Tag> {
        self.phase.as_ref().map(|p| p.tag)
    }

    pub fn mul(&self, y: &GaussCoeff) -> Result<GaussCoeff> {
        let phase = match (&self.phase, &y.phase) {
            (None, None) => None,
            (Some(p), None) | (None, Some(p)) => Some(p.clone()),
            (Some(p), Some(q)) => {
                if p.tag != q.tag {
                    return Err(Error::DomainMismatch(format!("{} phase times {} phase", p.tag, q.tag)));
                }
                Some(Phase::new(&p.q + &q.q, p.tag))
            }
        };
        if self.zero || y.zero {
            return Ok(Self::zero());
        }
        let (s, f) = split_square(&(&self.rho * &y.rho));
        Ok(GaussCoeff {
            zero: false,
            c: &self.c * &y.c * Rational::from_integer(s),
            rho: f,
            a: self.a + y.a,
            b: (self.b + y.b) % 8,
            phase,
        }
        .normalized())
    }

    pub fn inv(&self) -> Result<GaussCoeff> {
        if self.zero {
            return Err(Error::ZeroElement);
        }
        // 1/(c sqrt(rho)) = sqrt(rho)/(c rho)
        Ok(GaussCoeff {
            zero: false,
            c: Rational::one() / (&self.c * Rational::from_integer(self.rho.clone())),
            rho: self.rho.clone(),
            a: -self.a,
            b: (8 - self.b) % 8,
            phase: self.phase.as_ref().map(|p| Phase::new(-&p.q, p.tag)),
        }
        .normalized())
    }

    pub fn conj(&self) -> GaussCoeff {
        if self.zero {
            return Self::zero();
        }
        GaussCoeff {
            zero: false,
            c: self.c.clone(),
            rho: self.rho.clone(),
            a: -self.a,
            b: (8 - self.b) % 8,
            phase: self.phase.as_ref().map(|p| match p.tag {
                Tag::V => Phase::new(-&p.q, Tag::V),
                Tag::U => p.clone(),
            }),
        }
        .normalized()
    }

    /// Retags the phase (used by the Wick map); phase q on U becomes factor·q on V.
    pub fn map_phase(&self, f: impl Fn(&Phase) -> Phase) -> GaussCoeff {
        GaussCoeff { phase: self.phase.as_ref().map(f), ..self.clone() }.normalized()
    }

    pub fn to_fp(&self, params: &Params) -> Result<FpElem> {
        if self.zero {
            return Ok(FpElem(0));
        }
        let mut acc = params.from_rational(&self.c)?;
        if !self.rho.is_one() {
            acc = params.mul(acc, params.sqrt_rational(&Rational::from_integer(self.rho.clone()))?);
        }
        if self.a != 0 {
            acc = params.mul(acc, params.pow_signed(FpElem(params.j % params.p), self.a)?);
        }
        if self.b != 0 {
            acc = params.mul(acc, params.char_e(&rat(self.b as i64, 8))?);
        }
        if let Some(ph) = &self.phase {
            acc = params.mul(acc, params.char_phase(ph)?);
        }
        Ok(acc)
    }

    /// Limit map: e8 -> e^{iπ/4}, j -> e^{-iπ/4}, V-phase q -> e^{2πiq}, U-phase q -> e^{2π q N_u/N_v}.
    pub fn to_complex(&self, params: &Params) -> Result<ComplexVal> {
        if self.zero {
            return Ok(ComplexVal { re: 0.0, im: 0.0 });
        }
        let c = self.c.to_f64().ok_or(Error::Overflow)?;
        let rho = self.rho.to_f64().ok_or(Error::Overflow)?;
        let mut log_mag = c.abs().ln() + 0.5 * rho.ln();
        let mut angle = if c < 0.0 { PI } else { 0.0 };
        angle += PI / 4.0 * (self.b as f64 - self.a as f64);
        if let Some(ph) = &self.phase {
            let q = ph.symmetric().to_f64().ok_or(Error::Overflow)?;
            match ph.tag {
                Tag::V => angle += 2.0 * PI * q,
                Tag::U => log_mag += 2.0 * PI * q * (params.n_u as f64 / params.n_v as f64),
            }
        }
        if !log_mag.is_finite() || log_mag > 700.0 {
            return Err(Error::Overflow);
        }
        Ok(Complex64::from_polar(log_mag.exp(), angle).into())
    }
}

impl fmt::Display for GaussCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zero {
            return write!(f, "0");
        }
        write!(f, "{} * sqrt({}) * j^{} * e8^{} * ", self.c, self.rho, self.a, self.b)?;
        match &self.phase {
            None => write!(f, "e(0)"),
            Some(ph) => write!(f, "e({}@{})", ph.q, ph.tag),
        }
    }
}

impl std::str::FromStr for GaussCoeff {
    type Err = Error;

    /// Parses a product of factors: rational, sqrt(rational), j^k, e8^k, e(q@U|V), e(0).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" {
            return Ok(Self::zero());
        }
        let bad = || Error::CoeffParse(s.to_string());
        let mut acc = Self::one();
        for factor in s.split('*') {
            let t: String = factor.chars().filter(|c| !c.is_whitespace()).collect();
            let next = if let Some(inner) = t.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
                Self::sqrt(&parse_rational(inner).ok_or_else(bad)?)?
            } else if let Some(k) = t.strip_prefix("j^") {
                Self::j_pow(k.parse().map_err(|_| bad())?)
            } else if let Some(k) = t.strip_prefix("e8^") {
                Self::e8_pow(k.parse().map_err(|_| bad())?)
            } else if let Some(inner) = t.strip_prefix("e(").and_then(|r| r.strip_suffix(')')) {
                match inner.split_once('@') {
                    None => {
                        let q = parse_rational(inner).ok_or_else(bad)?;
                        if !frac_part(&q).is_zero() {
                            return Err(bad());
                        }
                        Self::one()
                    }
                    Some((q, tag)) => {
                        let tag = match tag {
                            "U" => Tag::U,
                            "V" => Tag::V,
                            _ => return Err(bad()),
                        };
                        Self::phase(parse_rational(q).ok_or_else(bad)?, tag)
                    }
                }
            } else if t == "j" {
                Self::j_pow(1)
            } else if t == "e8" {
                Self::e8_pow(1)
            } else {
                Self::rational(parse_rational(&t).ok_or_else(bad)?)
            };
            acc = acc.mul(&next)?;
        }
        Ok(acc)
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().ok()?;
    let d: BigInt = d.trim().parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

impl Serialize for GaussCoeff {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GaussCoeff {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat_int;
    use proptest::prelude::*;

    fn params() -> Params {
        Params::default_tower()
    }

    #[test]
    fn unit_and_square_collapse() {
        let x = GaussCoeff::phase(rat(3, 288), Tag::V).mul(&GaussCoeff::j_pow(2)).unwrap();
        assert_eq!(x.mul(&GaussCoeff::one()).unwrap(), x);
        let s2 = GaussCoeff::sqrt(&rat_int(2)).unwrap();
        let four = s2.mul(&s2).unwrap();
        assert_eq!(four, GaussCoeff::int(2));
        let e84 = GaussCoeff::e8_pow(4);
        assert_eq!(e84.mul(&e84).unwrap(), GaussCoeff::one());
        let p = params();
        assert_eq!(e84.mul(&e84).unwrap().to_fp(&p).unwrap(), p.char_e(&rat_int(1)).unwrap());
    }

    #[test]
    fn domain_mismatch() {
        let u = GaussCoeff::phase(rat(1, 4), Tag::U);
        let v = GaussCoeff::phase(rat(1, 4), Tag::V);
        assert!(matches!(u.mul(&v), Err(Error::DomainMismatch(_))));
        assert!(u.mul(&GaussCoeff::int(3)).is_ok());
    }

    #[test]
    fn conjugation_rules() {
        assert_eq!(GaussCoeff::one().conj(), GaussCoeff::one());
        let v = GaussCoeff::phase(rat(1, 5), Tag::V);
        assert_eq!(v.conj(), GaussCoeff::phase(rat(-1, 5), Tag::V));
        let u = GaussCoeff::phase(rat(1, 5), Tag::U);
        assert_eq!(u.conj(), u);
    }

    #[test]
    fn to_complex_generators() {
        let p = params();
        let one = GaussCoeff::one().to_complex(&p).unwrap();
        assert!((one.re - 1.0).abs() < 1e-15 && one.im.abs() < 1e-15);
        let e8 = GaussCoeff::e8_pow(1).to_complex(&p).unwrap().to_c64();
        assert!((e8 - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        let j = GaussCoeff::j_pow(1).to_complex(&p).unwrap().to_c64();
        assert!((j - Complex64::from_polar(1.0, -PI / 4.0)).norm() < 1e-15);
        let quarter = GaussCoeff::phase(rat(1, 4), Tag::V).to_complex(&p).unwrap().to_c64();
        assert!((quarter - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn text_roundtrip_examples() {
        for s in [
            "0",
            "1 * sqrt(1) * j^0 * e8^0 * e(0)",
            "-3/7 * sqrt(6) * j^-2 * e8^5 * e(11/288@V)",
            "1/12 * sqrt(2) * j^1 * e8^7 * e(5/165888@U)",
        ] {
            let x: GaussCoeff = s.parse().unwrap();
            assert_eq!(x.to_string(), s);
        }
    }

    #[test]
    fn scale_conventions_agree_in_fp() {
        let p = params();
        let u = GaussCoeff::sqrt_scale(&p, Tag::U, &rat_int(p.n_u as i64)).unwrap();
        let plain = GaussCoeff::sqrt(&rat_int(p.n_u as i64)).unwrap();
        assert_ne!(u, plain);
        assert_eq!(u.to_fp(&p).unwrap(), plain.to_fp(&p).unwrap());
        let inv = GaussCoeff::inv_sqrt_n(&p, Tag::U);
        assert_eq!(p.mul(inv.to_fp(&p).unwrap(), FpElem(288)), FpElem(1));
    }

    fn arb_coeff() -> impl Strategy<Value = GaussCoeff> {
        (
            -20i64..20,
            1i64..12,
            prop::sample::select(vec![1i64, 2, 3, 6, 8, 12, 18]),
            -4i64..4,
            0i64..8,
            prop::option::of((0i64..288, any::<bool>())),
        )
            .prop_map(|(n, d, rho, a, b, ph)| {
                let mut x = GaussCoeff::rational(rat(n, d))
                    .mul(&GaussCoeff::sqrt(&rat_int(rho)).unwrap())
                    .unwrap()
                    .mul(&GaussCoeff::j_pow(a))
                    .unwrap()
                    .mul(&GaussCoeff::e8_pow(b))
                    .unwrap();
                if let Some((q, v)) = ph {
                    let tag = if v { Tag::V } else { Tag::U };
                    x = x.mul(&GaussCoeff::phase(rat(q, 288), tag)).unwrap();
                }
                x
            })
    }

    proptest! {
        #[test]
        fn to_fp_is_multiplicative(x in arb_coeff(), y in arb_coeff()) {
            let p = params();
            if let Ok(xy) = x.mul(&y) {
                prop_assert_eq!(xy.to_fp(&p).unwrap(), p.mul(x.to_fp(&p).unwrap(), y.to_fp(&p).unwrap()));
            }
        }

        #[test]
        fn mul_commutes_and_associates(x in arb_coeff(), y in arb_coeff(), z in arb_coeff()) {
            if let (Ok(xy), Ok(yx)) = (x.mul(&y), y.mul(&x)) {
                prop_assert_eq!(&xy, &yx);
                if let (Ok(l), Ok(r)) = (xy.mul(&z), y.mul(&z).and_then(|yz| x.mul(&yz))) {
                    prop_assert_eq!(l, r);
                }
            }
        }

        #[test]
        fn conj_is_involutive_hom(x in arb_coeff(), y in arb_coeff()) {
            prop_assert_eq!(x.conj().conj(), x.clone());
            if let Ok(xy) = x.mul(&y) {
                prop_assert_eq!(xy.conj(), x.conj().mul(&y.conj()).unwrap());
            }
        }

        #[test]
        fn conj_inverts_pure_v_phase_in_fp(n in 1i64..100, q in 0i64..288) {
            let p = params();
            let x = GaussCoeff::int(n).mul(&GaussCoeff::phase(rat(q, 288), Tag::V)).unwrap();
            let ph = p.char_e(&rat(q, 288)).unwrap();
            let expect = p.mul(FpElem(n as u64), p.inv(ph).unwrap());
            prop_assert_eq!(x.conj().to_fp(&p).unwrap(), expect);
        }

        #[test]
        fn to_complex_conj_matches(x in arb_coeff()) {
            let p = params();
            if x.phase_tag() != Some(Tag::U) {
                let z = x.to_complex(&p).unwrap().to_c64();
                let w = x.conj().to_complex(&p).unwrap().to_c64();
                prop_assert!((z.conj() - w).norm() <= 1e-12 * (1.0 + z.norm()));
            }
        }

        #[test]
        fn to_complex_multiplicative(x in arb_coeff(), y in arb_coeff()) {
            // The U-phase rule is only a local (symmetric-lift) map, so it is excluded here.
            let p = params();
            let no_u = x.phase_tag() != Some(Tag::U) && y.phase_tag() != Some(Tag::U);
            if let (true, Ok(xy)) = (no_u, x.mul(&y)) {
                let l = xy.to_complex(&p).unwrap().to_c64();
                let r = x.to_complex(&p).unwrap().to_c64() * y.to_complex(&p).unwrap().to_c64();
                prop_assert!((l - r).norm() <= 1e-12 * (1.0 + r.norm()));
            }
        }

        #[test]
        fn text_roundtrip(x in arb_coeff()) {
            let back: GaussCoeff = x.to_string().parse().unwrap();
            prop_assert_eq!(back, x);
        }

        #[test]
        fn inverse(x in arb_coeff()) {
            if !x.is_zero() {
                prop_assert_eq!(x.mul(&x.inv().unwrap()).unwrap(), GaussCoeff::one());
            }
        }
    }
}
