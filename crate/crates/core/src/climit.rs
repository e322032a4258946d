//! Continuum side: limits of Gaussian kets, closed-form and quadrature pairings,
//! the finite-to-continuum convergence harness and the harmonic-oscillator kernel.

use crate::arith::{find_params, rat, ParamSpec, Params, Tag};
use crate::coeffring::{ComplexVal, GaussCoeff};
use crate::error::{Error, Result};
use crate::gauss::Mode;
use crate::hilbert::{inner, GaussState, Ket, Kind, QuadForm};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// x -> c e^{-pi (A x^2 + 2 B x)} (Euclidean) or c e^{-pi i (A x^2 + 2 B x)} (Hermitian).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumGaussian {
    pub kind: Kind,
    pub c: Complex64,
    pub a: f64,
    pub b: f64,
}

impl ContinuumGaussian {
    pub fn new(kind: Kind, c: Complex64, a: f64, b: f64) -> Self {
        ContinuumGaussian { kind, c, a, b }
    }

    pub fn value(&self, x: f64) -> Complex64 {
        let q = self.a * x * x + 2.0 * self.b * x;
        match self.kind {
            Kind::Euclidean => self.c * (-PI * q).exp(),
            Kind::Hermitian => self.c * Complex64::from_polar(1.0, -PI * q),
        }
    }
}

/// Limit of a finite Gaussian ket under x = r / sqrt(N_v), scaled by sqrt(N).
/// U-domain kets become Euclidean, V-domain kets Hermitian.
pub fn lm_state(params: &Params, s: &GaussState) -> Result<ContinuumGaussian> {
    if !s.form.admissible() {
        return Err(Error::InadmissibleForm(format!("{:?}", s.form)));
    }
    if s.support.0 != 1 {
        return Err(Error::NonNormalizable(format!("support modulus {}", s.support.0)));
    }
    let tag = s.domain.tag;
    let kind = match tag {
        Tag::U => Kind::Euclidean,
        Tag::V => Kind::Hermitian,
    };
    let scaled = s.coeff.mul(&GaussCoeff::sqrt_scale(params, tag, &rat(params.n_of(tag) as i64, 1))?)?;
    let c = scaled
        .to_complex(params)
        .map_err(|e| Error::NonNormalizable(format!("sqrt(N) * coefficient: {e}")))?
        .to_c64();
    let den = s.form.den as f64;
    let nv = params.n_v as f64;
    let p = s.p_param as f64;
    let constant = PI * s.form.c as f64 * p * p / (den * nv);
    let c = match kind {
        Kind::Euclidean => c * constant.exp(),
        Kind::Hermitian => c * Complex64::from_polar(1.0, constant),
    };
    Ok(ContinuumGaussian {
        kind,
        c,
        a: -(s.form.a as f64) / den,
        b: -(s.form.b as f64) * p / (den * nv.sqrt()),
    })
}

/// Integral of e^{-pi i (A x^2 + 2 B x)} over the line, A != 0.
pub fn fresnel_closed(a: f64, b: f64) -> Complex64 {
    Complex64::from_polar(1.0 / a.abs().sqrt(), -a.signum() * PI / 4.0 + PI * b * b / a)
}

fn combined(g1: &ContinuumGaussian, g2: &ContinuumGaussian) -> Result<(Complex64, f64, f64)> {
    if g1.kind != g2.kind {
        return Err(Error::Precondition("pairing needs equal kinds".into()));
    }
    Ok(match g1.kind {
        Kind::Euclidean => (g1.c * g2.c, g1.a + g2.a, g1.b + g2.b),
        Kind::Hermitian => (g1.c * g2.c.conj(), g1.a - g2.a, g1.b - g2.b),
    })
}

/// Closed form of the pairing (product for Euclidean, product with the conjugate for Hermitian).
pub fn continuum_inner_closed(g1: &ContinuumGaussian, g2: &ContinuumGaussian) -> Result<Complex64> {
    let (c, a, b) = combined(g1, g2)?;
    match g1.kind {
        Kind::Euclidean if a > 0.0 => Ok(c * (PI * b * b / a).exp() / a.sqrt()),
        Kind::Hermitian if a != 0.0 => Ok(c * fresnel_closed(a, b)),
        _ => Err(Error::DivergentPairing(format!("combined quadratic coefficient {a}"))),
    }
}

const CHUNK: usize = 1 << 14;

/// Composite Simpson rule over [-window, window]; chunks are reduced in index order.
pub fn simpson<F: Fn(f64) -> Complex64 + Sync>(f: F, window: f64, step: f64) -> Complex64 {
    let mut n = (2.0 * window / step).ceil() as usize;
    n += n % 2;
    let h = 2.0 * window / n as f64;
    let weight = |i: usize| {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let partials: Vec<Complex64> = (0..=n / CHUNK)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(n + 1);
            (lo..hi).map(|i| f(-window + i as f64 * h) * weight(i)).sum()
        })
        .collect();
    partials.into_iter().sum::<Complex64>() * (h / 3.0)
}

/// Mollifier levels for oscillatory pairings.
pub const MOLLIFIERS: [f64; 2] = [1e-2, 1e-3];
/// Largest accepted gap between mollified values before declaring non-convergence.
pub const MOLLIFIER_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Clone, Serialize)]
pub struct QuadratureReport {
    pub value: ComplexVal,
    /// (epsilon, mollified value), Hermitian only.
    pub mollified: Vec<(f64, ComplexVal)>,
}

/// Numerical pairing. Euclidean: plain Simpson. Hermitian: Simpson of the integrand times
/// e^{-eps x^2} at each mollifier level, then linear extrapolation to eps = 0.
pub fn continuum_inner_quadrature(
    g1: &ContinuumGaussian,
    g2: &ContinuumGaussian,
    window: f64,
    step: f64,
) -> Result<QuadratureReport> {
    if !(step > 0.0 && window > 0.0 && step < window / 100.0) {
        return Err(Error::Precondition(format!("step {step} must be below window/100 = {}", window / 100.0)));
    }
    combined(g1, g2)?;
    let pair = |x: f64| match g1.kind {
        Kind::Euclidean => g1.value(x) * g2.value(x),
        Kind::Hermitian => g1.value(x) * g2.value(x).conj(),
    };
    if g1.kind == Kind::Euclidean {
        let v = simpson(pair, window, step);
        return Ok(QuadratureReport { value: v.into(), mollified: Vec::new() });
    }
    let levels: Vec<(f64, Complex64)> = MOLLIFIERS
        .iter()
        .map(|&eps| {
            // e^{-eps w^2} below e^{-25}
            let w = window.max((25.0 / eps).sqrt());
            (eps, simpson(|x| pair(x) * (-eps * x * x).exp(), w, step))
        })
        .collect();
    let (e1, q1) = levels[0];
    let (e2, q2) = levels[1];
    if (q1 - q2).norm() > MOLLIFIER_TOLERANCE {
        return Err(Error::NonConvergent(format!("mollified values differ by {}", (q1 - q2).norm())));
    }
    let extrapolated = q2 + (q2 - q1) * (e2 / (e1 - e2));
    Ok(QuadratureReport {
        value: extrapolated.into(),
        mollified: levels.into_iter().map(|(e, q)| (e, q.into())).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub kind: Kind,
    pub a: i64,
    pub b: f64,
    pub n_sequence: Vec<u64>,
    pub finite_values: Vec<ComplexVal>,
    pub continuum_value: Option<ComplexVal>,
    pub quadrature_value: Option<ComplexVal>,
    pub errors: Vec<f64>,
    /// Errors nonincreasing over the last three entries.
    pub tail_monotone: bool,
    pub strictly_decreasing: bool,
    pub notes: Vec<String>,
}

/// Tower whose V modulus is `n_v` (a perfect square).
pub fn tower_for(n_v: u64) -> Result<Params> {
    let m = (n_v as f64).sqrt().round() as u64;
    if m * m != n_v {
        return Err(Error::InvalidSpec(format!("N_v = {n_v} is not a square")));
    }
    find_params(&ParamSpec::new(m, 2))
}

/// Finite pair for the harness: s1 = (1/sqrt N) e((-A r^2 + 2 B_fin r)/2N), s2 uniform, where
/// B_fin is the nearest multiple of A to -B sqrt(N_v).
pub fn harness_pair(params: &Params, a: i64, b: f64, kind: Kind) -> Result<(GaussState, GaussState)> {
    let tag = match kind {
        Kind::Euclidean => Tag::U,
        Kind::Hermitian => Tag::V,
    };
    let target = -b * (params.n_v as f64).sqrt();
    let b_fin = if a == 0 { target.round() as i64 } else { a * (target / a as f64).round() as i64 };
    Ok((
        GaussState::normalized(params, QuadForm::new(-a, b_fin, 0), 1, tag)?,
        GaussState::normalized(params, QuadForm::zero(), 1, tag)?,
    ))
}

/// Rescaled finite pairings sqrt(N_v) <s1|s2> along `n_sequence`, compared with the continuum value.
pub fn convergence_check(a: i64, b: f64, kind: Kind, n_sequence: &[u64], with_quadrature: bool) -> Result<LimitReport> {
    let target_g = ContinuumGaussian::new(kind, Complex64::new(1.0, 0.0), a as f64, b);
    let uniform = ContinuumGaussian::new(kind, Complex64::new(1.0, 0.0), 0.0, 0.0);
    let mut notes = Vec::new();
    let continuum = match continuum_inner_closed(&target_g, &uniform) {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("continuum pairing undefined ({e}); the finite extended-mode value is a counting delta"));
            None
        }
    };
    let quadrature = if with_quadrature && continuum.is_some() {
        let window = if kind == Kind::Euclidean { 12.0 } else { 40.0 };
        Some(continuum_inner_quadrature(&target_g, &uniform, window, 5e-5)?.value)
    } else {
        None
    };
    let mut finite_values = Vec::new();
    let mut errors = Vec::new();
    for &n_v in n_sequence {
        let params = tower_for(n_v)?;
        let (s1, s2) = harness_pair(&params, a, b, kind)?;
        let x = inner(&params, &Ket::Gauss(s1), &Ket::Gauss(s2), kind, Mode::Extended)?;
        let scaled = x.mul(&GaussCoeff::sqrt(&rat(n_v as i64, 1))?)?;
        let z = scaled.to_complex(&params)?.to_c64();
        finite_values.push(z.into());
        if let Some(c) = continuum {
            errors.push((z - c).norm());
        }
    }
    let tail = &errors[errors.len().saturating_sub(3)..];
    let tail_monotone = tail.windows(2).all(|w| w[1] <= w[0]);
    let strictly_decreasing = !errors.is_empty() && errors.windows(2).all(|w| w[1] < w[0]);
    if !errors.is_empty() && errors.iter().all(|&e| e < 1e-12) {
        notes.push("finite values coincide with the continuum value at every N".into());
    }
    Ok(LimitReport {
        kind,
        a,
        b,
        n_sequence: n_sequence.to_vec(),
        finite_values,
        continuum_value: continuum.map(Into::into),
        quadrature_value: quadrature,
        errors,
        tail_monotone,
        strictly_decreasing,
        notes,
    })
}

/// Harmonic-oscillator propagator at fixed (omega, t, hbar).
#[derive(Debug, Clone, Copy)]
pub struct HoPropagator {
    pub omega: f64,
    pub t: f64,
    pub hbar: f64,
}

pub fn ho_propagator(omega: f64, t: f64, hbar: f64) -> Result<HoPropagator> {
    if (omega * t).sin().abs() < 1e-12 {
        return Err(Error::Caustic);
    }
    Ok(HoPropagator { omega, t, hbar })
}

impl HoPropagator {
    fn sin(&self) -> f64 {
        (self.omega * self.t).sin()
    }

    pub fn kernel(&self, x: f64, x0: f64) -> Complex64 {
        let (s, c) = (self.omega * self.t).sin_cos();
        let mag = (self.omega / (2.0 * PI * self.hbar * s.abs())).sqrt();
        let phase = self.omega * ((x * x + x0 * x0) * c - 2.0 * x * x0) / (2.0 * self.hbar * s);
        Complex64::from_polar(mag, phase - PI / 4.0)
    }

    /// Integral over y of self(x, y) next(y, x0), by completing the square.
    pub fn compose_closed(&self, next: &HoPropagator, x: f64, x0: f64) -> Complex64 {
        let (s1, s2) = (self.sin(), next.sin());
        let (c1, c2) = ((self.omega * self.t).cos(), (next.omega * next.t).cos());
        let w = self.omega / (2.0 * PI * self.hbar);
        let a = -w * (c1 / s1 + c2 / s2);
        let b = w * (x / s1 + x0 / s2);
        let constant = self.omega * (x * x * c1 / s1 + x0 * x0 * c2 / s2) / (2.0 * self.hbar);
        let pre = (w / s1.abs()).sqrt() * (w / s2.abs()).sqrt();
        Complex64::from_polar(pre, constant - PI / 2.0) * fresnel_closed(a, b)
    }
}

/// Free kernel e^{-i pi/4} sqrt(1/(2 pi hbar t)) e^{i (x - x0)^2 / (2 hbar t)}.
pub fn free_kernel(t: f64, hbar: f64, x: f64, x0: f64) -> Complex64 {
    Complex64::from_polar((1.0 / (2.0 * PI * hbar * t)).sqrt(), (x - x0).powi(2) / (2.0 * hbar * t) - PI / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn params() -> &'static Params {
        static P: OnceLock<Params> = OnceLock::new();
        P.get_or_init(Params::default_tower)
    }

    fn c1() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn lm_examples() {
        let p = params();
        for (tag, kind) in [(Tag::V, Kind::Hermitian), (Tag::U, Kind::Euclidean)] {
            let s = GaussState::normalized(p, QuadForm::new(-1, 0, 0), 0, tag).unwrap();
            let g = lm_state(p, &s).unwrap();
            assert_eq!(g.kind, kind);
            assert!((g.c - c1()).norm() < 1e-12 && g.a == 1.0 && g.b == 0.0);
        }
        let bad = GaussState::new_unchecked(GaussCoeff::one(), QuadForm::new(1, 0, 0), 0, crate::hilbert::Domain::of(p, Tag::V));
        assert!(lm_state(p, &bad).is_err());
    }

    #[test]
    fn lm_pointwise_matches_finite() {
        let p = params();
        let s = GaussState::normalized(p, QuadForm::new(-2, 3, -1), 2, Tag::V).unwrap();
        let g = lm_state(p, &s).unwrap();
        let n = p.n_v as f64;
        for r in [0, 5, -30, 71] {
            let finite = s.coord(r).unwrap().to_complex(p).unwrap().to_c64() * n.sqrt();
            assert!((finite - g.value(r as f64 / n.sqrt())).norm() < 1e-9, "r={r}");
        }
    }

    #[test]
    fn closed_examples() {
        let e = |a, b| ContinuumGaussian::new(Kind::Euclidean, c1(), a, b);
        let h = |a, b| ContinuumGaussian::new(Kind::Hermitian, c1(), a, b);
        assert!((continuum_inner_closed(&e(1.0, 0.0), &e(0.0, 0.0)).unwrap() - c1()).norm() < 1e-15);
        let z = continuum_inner_closed(&e(2.0, 1.0), &e(0.0, 0.0)).unwrap();
        assert!((z.re - (PI / 2.0).exp() / 2f64.sqrt()).abs() < 1e-12);
        let z = continuum_inner_closed(&h(1.0, 0.0), &h(0.0, 0.0)).unwrap();
        assert!((z.norm() - 1.0).abs() < 1e-15);
        assert!(matches!(continuum_inner_closed(&h(1.0, 0.0), &h(1.0, 0.0)), Err(Error::DivergentPairing(_))));
        assert!(matches!(continuum_inner_closed(&e(0.0, 0.0), &e(0.0, 0.0)), Err(Error::DivergentPairing(_))));
    }

    #[test]
    fn quadrature_matches_closed() {
        let e = |a, b| ContinuumGaussian::new(Kind::Euclidean, c1(), a, b);
        let q = continuum_inner_quadrature(&e(1.0, 0.0), &e(0.0, 0.0), 10.0, 1e-3).unwrap();
        assert!((q.value.to_c64() - c1()).norm() < 1e-8);
        let q = continuum_inner_quadrature(&e(2.0, 1.0), &e(0.0, 0.0), 12.0, 1e-3).unwrap();
        assert!((q.value.to_c64() - (PI / 2.0).exp() / 2f64.sqrt()).norm() < 1e-6);
        // unit peaks at x = -4 and x = 4
        let peak = |b: f64| ContinuumGaussian::new(Kind::Euclidean, c1() * (-PI * b * b / 2.0).exp(), 2.0, b);
        let far = continuum_inner_quadrature(&peak(8.0), &peak(-8.0), 10.0, 1e-3).unwrap();
        assert!(far.value.to_c64().norm() < 1e-12);
        let h = |a, b| ContinuumGaussian::new(Kind::Hermitian, c1(), a, b);
        for (a, b) in [(1.0, 0.0), (2.0, 0.5), (-3.0, 1.0)] {
            let q = continuum_inner_quadrature(&h(a, b), &h(0.0, 0.0), 40.0, 1e-4).unwrap();
            let z = continuum_inner_closed(&h(a, b), &h(0.0, 0.0)).unwrap();
            assert!((q.value.to_c64() - z).norm() < 1e-3, "{a} {b}: {:?} vs {z}", q.value);
        }
        assert!(continuum_inner_quadrature(&e(1.0, 0.0), &e(0.0, 0.0), 1.0, 0.1).is_err());
    }

    #[test]
    fn harness_values() {
        let r = convergence_check(2, 0.0, Kind::Euclidean, &[144, 576], false).unwrap();
        for z in &r.finite_values {
            assert!((z.to_c64() - Complex64::new(0.5f64.sqrt(), 0.0)).norm() < 1e-12);
        }
        let r = convergence_check(1, 0.0, Kind::Hermitian, &[144, 576], false).unwrap();
        for z in &r.finite_values {
            assert!((z.to_c64().norm() - 1.0).abs() < 1e-12);
        }
        let r = convergence_check(0, 0.0, Kind::Euclidean, &[144], false).unwrap();
        assert!(r.continuum_value.is_none() && !r.notes.is_empty());
        let r = convergence_check(2, 0.3, Kind::Euclidean, &[144, 576, 2304], false).unwrap();
        assert!(r.errors[2] < 1e-2, "{:?}", r.errors);
    }

    #[test]
    fn wick_coherence_at_limit() {
        let p = params();
        let (s1, s2) = harness_pair(p, 2, 0.0, Kind::Euclidean).unwrap();
        let scale = GaussCoeff::sqrt(&rat(p.n_v as i64, 1)).unwrap();
        let eu = inner(p, &Ket::Gauss(s1.clone()), &Ket::Gauss(s2.clone()), Kind::Euclidean, Mode::Extended).unwrap();
        let eu = eu.mul(&scale).unwrap().to_complex(p).unwrap().to_c64();
        assert!(eu.re > 0.0 && eu.im.abs() < 1e-12);
        let w1 = crate::wick::wick_state(p, &s1).unwrap();
        let w2 = crate::wick::wick_state(p, &s2).unwrap();
        let he = inner(p, &Ket::Gauss(w1), &Ket::Gauss(w2), Kind::Hermitian, Mode::Extended).unwrap();
        let he = he.mul(&scale).unwrap().to_complex(p).unwrap().to_c64();
        assert!((he.norm() - eu.norm()).abs() < 1e-3);
    }

    #[test]
    fn ho_kernel() {
        assert!(matches!(ho_propagator(1.0, PI, 1.0), Err(Error::Caustic)));
        let k = ho_propagator(1.0, 1e-3, 1.0).unwrap();
        let z = k.kernel(0.7, 0.7);
        assert!((z.norm() - (1.0 / (2.0 * PI * (1e-3f64).sin())).sqrt()).abs() < 1e-9);
        let k1 = ho_propagator(1.0, 0.4, 1.0).unwrap();
        let k2 = ho_propagator(1.0, 0.9, 1.0).unwrap();
        let k12 = ho_propagator(1.0, 1.3, 1.0).unwrap();
        for (x, x0) in [(0.0, 0.0), (0.5, -1.0), (2.0, 1.5)] {
            assert!((k1.compose_closed(&k2, x, x0) - k12.kernel(x, x0)).norm() < 1e-9);
        }
        let small = ho_propagator(1e-6, 0.8, 1.0).unwrap();
        for (x, x0) in [(0.0, 0.0), (0.5, -1.0), (2.0, 1.5)] {
            assert!((small.kernel(x, x0) - free_kernel(0.8, 1.0, x, x0)).norm() < 1e-9);
        }
    }
}
