//! Finite quantum dynamics: momentum basis, Weyl pair, free propagator and the
//! statistical-mechanics transfer kernel.

use crate::arith::{rat, FpElem, Params, Tag};
use crate::coeffring::GaussCoeff;
use crate::error::{Error, Result};
use crate::gauss::sum::{FpEval, QPoly, Term};
use crate::gauss::Mode;
use crate::hilbert::{apply, compose, Domain, GaussOperator, GaussState, Ket, PositionState, QuadForm};
use serde::Serialize;

/// v[p]: r -> (1/sqrt N) e(-rp/N).
pub fn momentum_state(params: &Params, p: i64, tag: Tag) -> Result<GaussState> {
    let dom = Domain::of(params, tag);
    if !dom.indices().contains(&p) {
        return Err(Error::OutOfRange(format!("momentum {p} outside [-N/2, N/2)")));
    }
    GaussState::normalized(params, QuadForm::new(0, -1, 0), p, tag)
}

#[derive(Debug, Clone)]
pub struct WeylPair {
    /// Diagonal: u[r] -> e(r/N) u[r].
    pub u: GaussOperator,
    /// Shift: u[r] -> u[r+1].
    pub v: GaussOperator,
    /// Commutation phase e(1/N).
    pub q: GaussCoeff,
}

pub fn weyl_pair(params: &Params, tag: Tag) -> WeylPair {
    let dom = Domain::of(params, tag);
    let n = dom.n();
    let diag = |t: Term, shift: i64| {
        t.with_guard(n, &QPoly::var("q").sub(&QPoly::var("r")).sub(&QPoly::int(shift)))
            .expect("linear guard")
            .expect("satisfiable")
    };
    let u = diag(Term::new(GaussCoeff::one(), QPoly::var("q").scale(&rat(2, 1))), 0);
    let v = diag(Term::one(), 1);
    WeylPair {
        u: GaussOperator::new(u, dom.clone()).with_unitary(true),
        v: GaussOperator::new(v, dom).with_unitary(true),
        q: GaussCoeff::phase(rat(1, n), tag),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeylReport {
    pub passed: bool,
    pub positions_checked: usize,
    pub q_order_ok: bool,
    pub failures: Vec<String>,
}

/// Checks (UV - qVU) u[r] = 0 for every r, exactly in F_p, and q^N = 1.
pub fn check_weyl(params: &Params, pair: &WeylPair, mode: Mode) -> Result<WeylReport> {
    let dom = pair.u.domain_in.clone();
    let ev = FpEval::new(params);
    let qf = pair.q.to_fp(params)?;
    let q_order_ok = params.pow(qf, dom.n) == FpElem(1);
    let mut failures = Vec::new();
    for r in dom.indices() {
        let ur = Ket::Position(PositionState::new(r, dom.clone())?);
        let uv = apply(params, &pair.u, &Ket::Gauss(apply(params, &pair.v, &ur, mode)?), mode)?;
        let vu = apply(params, &pair.v, &Ket::Gauss(apply(params, &pair.u, &ur, mode)?), mode)?;
        for x in dom.indices() {
            let lhs = uv.coord_fp(&ev, x)?;
            let rhs = params.mul(qf, vu.coord_fp(&ev, x)?);
            if lhs != rhs {
                failures.push(format!("r={r}, coordinate {x}: {lhs} != {rhs}"));
            }
        }
    }
    Ok(WeylReport { passed: failures.is_empty() && q_order_ok, positions_checked: dom.n as usize, q_order_ok, failures })
}

/// Free evolution for integer time t: sqrt(|t|/N) e8^{sgn t} e(-(q-r)^2/(2tN)) on |t| | (q-r).
pub fn free_propagator(params: &Params, t: i64, tag: Tag) -> Result<GaussOperator> {
    let dom = Domain::of(params, tag);
    let n = dom.n();
    if t == 0 || t.rem_euclid(n) == 0 || n % (4 * t.abs()) != 0 {
        return Err(Error::BadTime(t));
    }
    let s = t.signum();
    let coeff = GaussCoeff::sqrt(&rat(t.abs(), 1))?
        .mul(&GaussCoeff::inv_sqrt_n(params, tag))?
        .mul(&GaussCoeff::e8_pow(s))?;
    let form = QuadForm { a: -s, b: s, c: -s, den: t.abs() };
    let kernel = Term::new(coeff, form.poly(&QPoly::var("q"), &QPoly::var("r")))
        .with_guard(t.abs(), &QPoly::var("q").sub(&QPoly::var("r")))?
        .expect("satisfiable");
    Ok(GaussOperator::new(kernel, dom).with_unitary(true))
}

/// Brute-force kernel of the Fourier-conjugated diagonal e(t p^2 / 2N):
/// (1/N) sum_p e((t p^2 + 2p(q - r)) / 2N).
pub fn free_kernel_brute(ev: &FpEval, t: i64, tag: Tag, q: i64, r: i64) -> Result<FpElem> {
    let n = ev.params().n_of(tag) as i64;
    let phase = QPoly::var("p")
        .mul(&QPoly::var("p"))
        .scale(&rat(t, 1))
        .add(&QPoly::var("p").scale(&rat(2 * (q - r), 1)));
    ev.sum_var(&Term::new(GaussCoeff::rational(rat(1, n)), phase), "p", tag, &Default::default())
}

/// Transfer kernel (1/sqrt N) e(f(q, r)/2N) on the U domain.
pub fn sm_transfer(params: &Params, form: QuadForm) -> Result<GaussOperator> {
    if !form.admissible() {
        return Err(Error::InadmissibleForm(format!("{form:?}")));
    }
    Ok(GaussOperator::from_form(GaussCoeff::inv_sqrt_n(params, Tag::U), form, Domain::of(params, Tag::U)))
}

/// Composes two operators and reports whether their kernels agree with a reference at sample points.
pub fn kernels_agree(ev: &FpEval, a: &GaussOperator, b: &GaussOperator, points: &[(i64, i64)]) -> Result<bool> {
    for &(q, r) in points {
        if a.entry_fp(ev, q, r)? != b.entry_fp(ev, q, r)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// free(t1) after free(t2) against free(t1 + t2).
pub fn check_free_additivity(params: &Params, t1: i64, t2: i64, tag: Tag, mode: Mode) -> Result<bool> {
    let lhs = compose(params, &free_propagator(params, t1, tag)?, &free_propagator(params, t2, tag)?, mode)?;
    let rhs = free_propagator(params, t1 + t2, tag)?;
    let dom = Domain::of(params, tag);
    let pts: Vec<(i64, i64)> = dom.indices().step_by(5).flat_map(|q| dom.indices().step_by(7).map(move |r| (q, r))).collect();
    kernels_agree(&FpEval::new(params), &lhs, &rhs, &pts)
}
