//! Wick rotation from the U domain (statistical, real exponentials) to the V domain
//! (quantum, unit phases), realized as a retagging of exact normal forms.

use crate::arith::{Params, Phase, Rational, Tag};
use crate::coeffring::GaussCoeff;
use crate::error::{Error, Result};
use crate::gauss::sum::{Guard, Term};
use crate::gauss::Mode;
use crate::hilbert::{apply_unchecked, inner, Domain, GaussOperator, GaussState, Ket, Kind, PositionState, QuadForm};
use num_bigint::BigInt;
use rand::Rng;
use serde::Serialize;

fn wrong(what: &str) -> Error {
    Error::WrongDomain(format!("{what} must live on the U domain"))
}

/// j -> 1 and e(q @ U) -> e(i q @ V), so (c/sqrt N_u) e(n/2N_u) maps to (c/sqrt N_v) e(n/2N_v).
pub fn wick_coeff(params: &Params, x: &GaussCoeff) -> Result<GaussCoeff> {
    if x.phase_tag() == Some(Tag::V) {
        return Err(wrong("coefficient"));
    }
    if x.is_zero() {
        return Ok(GaussCoeff::zero());
    }
    let scale = Rational::from_integer(BigInt::from(params.i));
    let out = GaussCoeff { a: 0, ..x.clone() };
    Ok(out.map_phase(|p| Phase::new(&p.q * &scale, Tag::V)))
}

fn wick_modulus(params: &Params, k: i64) -> Result<i64> {
    if k == params.n_u as i64 {
        Ok(params.n_v as i64)
    } else if (params.n_v as i64) % k == 0 {
        Ok(k)
    } else {
        Err(Error::BadCoset(format!("modulus {k} has no image on the V domain")))
    }
}

fn wick_term(params: &Params, t: &Term) -> Result<Term> {
    let guards = t
        .guards
        .iter()
        .map(|g| Ok(Guard { k: wick_modulus(params, g.k)?, lin: g.lin.clone() }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Term { coeff: wick_coeff(params, &t.coeff)?, guards, phase: t.phase.clone() })
}

/// Same form and support, coefficient mapped by `wick_coeff`, domain retagged to V.
pub fn wick_state(params: &Params, s: &GaussState) -> Result<GaussState> {
    if s.domain.tag != Tag::U {
        return Err(wrong("state"));
    }
    let support = (wick_modulus(params, s.support.0)?, s.support.1);
    Ok(GaussState {
        coeff: wick_coeff(params, &s.coeff)?,
        domain: Domain::of(params, Tag::V),
        support: (support.0, support.1.rem_euclid(support.0)),
        ..s.clone()
    })
}

pub fn wick_ket(params: &Params, s: &Ket) -> Result<Ket> {
    match s {
        Ket::Gauss(g) => Ok(Ket::Gauss(wick_state(params, g)?)),
        Ket::Position(p) => {
            if p.domain.tag != Tag::U {
                return Err(wrong("state"));
            }
            let dom = Domain::of(params, Tag::V);
            Ok(Ket::Position(PositionState::new(dom.reduce(p.r), dom)?))
        }
    }
}

/// Kernel form preserved, coefficient and guard moduli retagged.
pub fn wick_operator(params: &Params, op: &GaussOperator) -> Result<GaussOperator> {
    if op.domain_in.tag != Tag::U || op.domain_out.tag != Tag::U {
        return Err(wrong("operator"));
    }
    let dom = Domain::of(params, Tag::V);
    Ok(GaussOperator {
        kernel: wick_term(params, &op.kernel)?,
        domain_in: dom.clone(),
        domain_out: dom,
        unitary: op.unitary,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InnerCorrespondence {
    pub kind: Kind,
    /// Wick image of the U-domain pairing.
    pub lhs: String,
    /// Pairing of the Wick images.
    pub rhs: String,
    pub lhs_fp: u64,
    pub rhs_fp: u64,
    pub passed: bool,
}

/// Compares wick(<s1|s2>) with <wick s1|wick s2> in F_p.
pub fn check_inner_correspondence(
    params: &Params,
    s1: &GaussState,
    s2: &GaussState,
    kind: Kind,
    mode: Mode,
) -> Result<InnerCorrespondence> {
    let lhs = wick_coeff(params, &inner(params, &Ket::Gauss(s1.clone()), &Ket::Gauss(s2.clone()), kind, mode)?)?;
    let rhs = inner(
        params,
        &Ket::Gauss(wick_state(params, s1)?),
        &Ket::Gauss(wick_state(params, s2)?),
        kind,
        mode,
    )?;
    let (lf, rf) = (lhs.to_fp(params)?, rhs.to_fp(params)?);
    Ok(InnerCorrespondence {
        kind,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        lhs_fp: lf.0,
        rhs_fp: rf.0,
        passed: lf == rf,
    })
}

/// Checks wick(A s) = wick(A) wick(s): same form, support and p-parameter, equal coefficients in F_p.
pub fn check_intertwining(params: &Params, op: &GaussOperator, s: &GaussState, mode: Mode) -> Result<bool> {
    let lhs = wick_state(params, &apply_unchecked(params, op, &Ket::Gauss(s.clone()), mode)?)?;
    let rhs = apply_unchecked(params, &wick_operator(params, op)?, &Ket::Gauss(wick_state(params, s)?), mode)?;
    Ok(lhs.form == rhs.form
        && lhs.support == rhs.support
        && lhs.p_param == rhs.p_param
        && lhs.coeff.to_fp(params)? == rhs.coeff.to_fp(params)?)
}

/// Random admissible U-domain ket (1/sqrt N_u) e(f(r, p)/2N_u) with small coefficients.
pub fn random_admissible_state<R: Rng>(rng: &mut R, params: &Params) -> GaussState {
    let form = QuadForm::new(rng.gen_range(-6..=0), rng.gen_range(-3..=3), rng.gen_range(-2..=0));
    GaussState::normalized(params, form, rng.gen_range(-5..=5), Tag::U).expect("admissible by construction")
}

/// Random admissible U-domain transfer kernel; the r^2 coefficient is nonzero so applying it never
/// produces a delta-like support with no V image.
pub fn random_transfer<R: Rng>(rng: &mut R, params: &Params) -> GaussOperator {
    let form = QuadForm::new(rng.gen_range(-4..=0), rng.gen_range(-2..=2), rng.gen_range(-4..=-1));
    GaussOperator::from_form(GaussCoeff::inv_sqrt_n(params, Tag::U), form, Domain::of(params, Tag::U))
}
