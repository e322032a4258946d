//! Gaussian Hilbert space over Z/N: position states, Gaussian kets, formal inner products,
//! kernel operators with support tracking, restriction, permutations and small tensor products.

use crate::arith::{Params, Rational, Tag, FpElem};
use crate::coeffring::GaussCoeff;
use crate::error::{Error, Result};
use crate::gauss::sum::{sum_out, Assignment, FpEval, Norm, QPoly, SumCtx, Term};
use crate::gauss::Mode;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "E")]
    Euclidean,
    #[serde(rename = "H")]
    Hermitian,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub tag: Tag,
    pub n: u64,
    pub unit_label: String,
}

impl Domain {
    pub fn of(params: &Params, tag: Tag) -> Self {
        let unit_label = match tag {
            Tag::U => "u",
            Tag::V => "v",
        };
        Domain { tag, n: params.n_of(tag), unit_label: unit_label.to_string() }
    }

    pub fn n(&self) -> i64 {
        self.n as i64
    }

    /// Index range [-N/2, N/2).
    pub fn indices(&self) -> std::ops::Range<i64> {
        -self.n() / 2..self.n() - self.n() / 2
    }

    pub fn reduce(&self, r: i64) -> i64 {
        let n = self.n();
        (r + n / 2).rem_euclid(n) - n / 2
    }

    fn check_same(&self, other: &Domain) -> Result<()> {
        if self != other {
            return Err(Error::DomainMismatch(format!("{} vs {}", self.tag, other.tag)));
        }
        Ok(())
    }
}

/// f(x, y) = (A x^2 + 2 B x y + C y^2) / den.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub den: i64,
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c, den: 1 }
    }

    pub fn zero() -> Self {
        Self::new(0, 0, 0)
    }

    pub fn admissible(&self) -> bool {
        self.a <= 0 && self.c <= 0
    }

    pub fn poly(&self, x: &QPoly, y: &QPoly) -> QPoly {
        let inv = Rational::new(BigInt::one(), self.den.into());
        let r = |n: i64| Rational::from_integer(n.into()) * &inv;
        x.mul(x)
            .scale(&r(self.a))
            .add(&x.mul(y).scale(&r(2 * self.b)))
            .add(&y.mul(y).scale(&r(self.c)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussState {
    pub coeff: GaussCoeff,
    pub form: QuadForm,
    pub p_param: i64,
    pub domain: Domain,
    /// Coset (k, d): coordinates vanish outside kZ + d.
    pub support: (i64, i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionState {
    pub r: i64,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ket {
    Gauss(GaussState),
    Position(PositionState),
}

impl GaussState {
    pub fn new(coeff: GaussCoeff, form: QuadForm, p_param: i64, domain: Domain) -> Result<Self> {
        if !form.admissible() {
            return Err(Error::InadmissibleForm(format!("{form:?}")));
        }
        Ok(Self::new_unchecked(coeff, form, p_param, domain))
    }

    /// Skips the admissibility check.
    pub fn new_unchecked(coeff: GaussCoeff, form: QuadForm, p_param: i64, domain: Domain) -> Self {
        GaussState { coeff, form, p_param, domain, support: (1, 0) }
    }

    /// (1/sqrt N) e(f(r, p)/2N) on the scale of the domain.
    pub fn normalized(params: &Params, form: QuadForm, p_param: i64, tag: Tag) -> Result<Self> {
        Self::new(GaussCoeff::inv_sqrt_n(params, tag), form, p_param, Domain::of(params, tag))
    }

    pub fn zero(domain: Domain) -> Self {
        Self::new_unchecked(GaussCoeff::zero(), QuadForm::zero(), 0, domain)
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn phase_poly(&self, var: &str) -> QPoly {
        self.form.poly(&QPoly::var(var), &QPoly::int(self.p_param))
    }

    pub fn term(&self, var: &str) -> Result<Option<Term>> {
        if self.is_zero() {
            return Ok(None);
        }
        let (k, d) = self.support;
        Term::new(self.coeff.clone(), self.phase_poly(var)).with_guard(k, &QPoly::var(var).sub(&QPoly::int(d)))
    }

    /// Value at r, as an exact coefficient (zero off the support).
    pub fn coord(&self, r: i64) -> Result<GaussCoeff> {
        let (k, d) = self.support;
        if self.is_zero() || (r - d).rem_euclid(k) != 0 {
            return Ok(GaussCoeff::zero());
        }
        let x = self.phase_poly("x").eval(&[("x".to_string(), r)].into())?;
        let n = BigInt::from(2 * self.domain.n);
        self.coeff.mul(&GaussCoeff::phase(x / Rational::from_integer(n), self.domain.tag))
    }

    /// Coordinate function evaluated in F_p.
    pub fn coord_fp(&self, ev: &FpEval, r: i64) -> Result<FpElem> {
        match self.term("x")? {
            None => Ok(FpElem(0)),
            Some(t) => t.eval_fp(ev, self.domain.tag, &[("x".to_string(), r)].into()),
        }
    }
}

impl PositionState {
    pub fn new(r: i64, domain: Domain) -> Result<Self> {
        if !domain.indices().contains(&r) {
            return Err(Error::OutOfRange(format!("position {r} outside [-N/2, N/2)")));
        }
        Ok(PositionState { r, domain })
    }

    pub fn term(&self, var: &str) -> Result<Option<Term>> {
        Term::one().with_guard(self.domain.n(), &QPoly::var(var).sub(&QPoly::int(self.r)))
    }
}

impl Ket {
    pub fn domain(&self) -> &Domain {
        match self {
            Ket::Gauss(s) => &s.domain,
            Ket::Position(s) => &s.domain,
        }
    }

    pub fn term(&self, var: &str) -> Result<Option<Term>> {
        match self {
            Ket::Gauss(s) => s.term(var),
            Ket::Position(s) => s.term(var),
        }
    }

    pub fn coord_fp(&self, ev: &FpEval, r: i64) -> Result<FpElem> {
        match self.term("x")? {
            None => Ok(FpElem(0)),
            Some(t) => t.eval_fp(ev, self.domain().tag, &[("x".to_string(), r)].into()),
        }
    }

    /// F_p coordinates over [-N/2, N/2).
    pub fn vector_fp(&self, ev: &FpEval) -> Result<Vec<FpElem>> {
        self.domain().indices().map(|r| self.coord_fp(ev, r)).collect()
    }
}

impl From<GaussState> for Ket {
    fn from(s: GaussState) -> Self {
        Ket::Gauss(s)
    }
}

impl From<PositionState> for Ket {
    fn from(s: PositionState) -> Self {
        Ket::Position(s)
    }
}

/// Conjugation used by the formal Hermitian pairing: every phase is inverted, on both domains.
pub fn conj_formal(c: &GaussCoeff) -> GaussCoeff {
    let mut out = c.conj();
    if let Some(ph) = &c.phase {
        if ph.tag == Tag::U {
            out = out.map_phase(|p| crate::arith::Phase::new(-&p.q, p.tag));
        }
    }
    out
}

/// Formal conjugate of a term: coefficient conjugated, phase negated.
pub fn conj_term(t: &Term) -> Term {
    Term { coeff: conj_formal(&t.coeff), guards: t.guards.clone(), phase: t.phase.neg() }
}

fn pair_term(t1: &Term, t2: &Term, kind: Kind) -> Result<Option<Term>> {
    match kind {
        Kind::Euclidean => t1.mul(t2),
        Kind::Hermitian => t1.mul(&conj_term(t2)),
    }
}

/// Formal inner product: the sum over x of s1(x) s2(x) (Euclidean) or s1(x) conj(s2(x))
/// (Hermitian), normalized by the combined quadratic coefficient.
pub fn inner(params: &Params, s1: &Ket, s2: &Ket, kind: Kind, mode: Mode) -> Result<GaussCoeff> {
    inner_with(params, s1, s2, kind, mode, Norm::Formal)
}

/// Literal inner product (plain sum over all N coordinates).
pub fn inner_literal(params: &Params, s1: &Ket, s2: &Ket, kind: Kind, mode: Mode) -> Result<GaussCoeff> {
    inner_with(params, s1, s2, kind, mode, Norm::Literal)
}

fn inner_with(params: &Params, s1: &Ket, s2: &Ket, kind: Kind, mode: Mode, norm: Norm) -> Result<GaussCoeff> {
    s1.domain().check_same(s2.domain())?;
    let tag = s1.domain().tag;
    let (Some(t1), Some(t2)) = (s1.term("x")?, s2.term("x")?) else {
        return Ok(GaussCoeff::zero());
    };
    let Some(prod) = pair_term(&t1, &t2, kind)? else {
        return Ok(GaussCoeff::zero());
    };
    let ctx = SumCtx::new(params, tag, mode, norm);
    match sum_out(&prod, "x", &ctx)? {
        None => Ok(GaussCoeff::zero()),
        Some(t) => t.to_coeff(params, tag),
    }
}

/// Kernel operator: (A s)(q) = sum_r kernel(q, r) s(r). The kernel term uses variables q, r
/// and carries the operator's coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussOperator {
    pub kernel: Term,
    pub domain_in: Domain,
    pub domain_out: Domain,
    pub unitary: bool,
}

impl GaussOperator {
    pub fn new(kernel: Term, domain: Domain) -> Self {
        GaussOperator { kernel, domain_in: domain.clone(), domain_out: domain, unitary: false }
    }

    pub fn coeff(&self) -> &GaussCoeff {
        &self.kernel.coeff
    }

    pub fn with_unitary(mut self, unitary: bool) -> Self {
        self.unitary = unitary;
        self
    }

    /// Gaussian kernel coeff * e(f(q, r)/2N).
    pub fn from_form(coeff: GaussCoeff, form: QuadForm, domain: Domain) -> Self {
        Self::new(Term::new(coeff, form.poly(&QPoly::var("q"), &QPoly::var("r"))), domain)
    }

    pub fn identity(domain: Domain) -> Self {
        let t = Term::one()
            .with_guard(domain.n(), &QPoly::var("q").sub(&QPoly::var("r")))
            .expect("linear guard")
            .expect("satisfiable");
        Self::new(t, domain).with_unitary(true)
    }

    /// (1/sqrt N) e(-qr/N).
    pub fn fourier(params: &Params, tag: Tag) -> Self {
        let form = QuadForm::new(0, -1, 0);
        Self::from_form(GaussCoeff::inv_sqrt_n(params, tag), form, Domain::of(params, tag)).with_unitary(true)
    }

    pub fn entry_fp(&self, ev: &FpEval, q: i64, r: i64) -> Result<FpElem> {
        self.kernel
            .eval_fp(ev, self.domain_out.tag, &[("q".to_string(), q), ("r".to_string(), r)].into())
    }

    /// Column r as a state in q.
    pub fn column(&self, params: &Params, r: i64) -> Result<GaussState> {
        match self.kernel.subst("r", &QPoly::int(r))? {
            None => Ok(GaussState::zero(self.domain_out.clone())),
            Some(t) => term_to_state(params, &t, "q", &self.domain_out, false),
        }
    }
}

/// Solves k | c x + e for x; `None` if there is no solution.
fn solve_congruence(k: i64, c: i64, e: i64) -> Option<(i64, i64)> {
    let g = c.gcd(&k);
    if e.rem_euclid(g) != 0 {
        return None;
    }
    let s = k / g;
    if s == 1 {
        return Some((1, 0));
    }
    let inv = Integer::extended_gcd(&(c / g).rem_euclid(s), &s).x.rem_euclid(s);
    Some((s, ((-e / g) as i128 * inv as i128).rem_euclid(s as i128) as i64))
}

/// Intersection of cosets k1 Z + d1 and k2 Z + d2.
pub fn intersect_cosets((k1, d1): (i64, i64), (k2, d2): (i64, i64)) -> Option<(i64, i64)> {
    // x = d1 + k1 t with k2 | k1 t + d1 - d2
    let (s, t0) = solve_congruence(k2, k1, d1 - d2)?;
    let k = k1 * s;
    Some((k, (d1 + k1 * t0).rem_euclid(k)))
}

/// Reads a term in one variable as a Gaussian state with p_param = 1 and C = 0.
pub fn term_to_state(params: &Params, t: &Term, var: &str, domain: &Domain, check: bool) -> Result<GaussState> {
    let extra: Vec<String> = t.vars().into_iter().filter(|v| v != var).collect();
    if !extra.is_empty() {
        return Err(Error::Precondition(format!("state term has free variables {extra:?}")));
    }
    let mut support = (1i64, 0i64);
    for g in &t.guards {
        let c = g.lin.coeff_of(&[var]).to_integer().to_i64().ok_or(Error::Overflow)?;
        let e = g.lin.constant_term().to_integer().to_i64().ok_or(Error::Overflow)?;
        let Some(coset) = solve_congruence(g.k, c, e).and_then(|cs| intersect_cosets(support, cs)) else {
            return Ok(GaussState::zero(domain.clone()));
        };
        support = coset;
    }
    if domain.n() % support.0 != 0 {
        return Err(Error::BadCoset(format!("support modulus {} does not divide N", support.0)));
    }
    let folded = t.fold_constant(params, domain.tag)?;
    let (alpha, beta, _) = folded.phase.split(var)?;
    let half_beta = beta.constant_term() / Rational::from_integer(2.into());
    let den = alpha.denom().lcm(half_beta.denom());
    let to_i = |q: &Rational| -> Result<i64> {
        (q * Rational::from_integer(den.clone())).to_integer().to_i64().ok_or(Error::Overflow)
    };
    let form = QuadForm { a: to_i(&alpha)?, b: to_i(&half_beta)?, c: 0, den: den.to_i64().ok_or(Error::Overflow)? };
    if check && !form.admissible() {
        return Err(Error::InadmissibleResult(format!("{form:?}")));
    }
    Ok(GaussState { coeff: folded.coeff, form, p_param: 1, domain: domain.clone(), support })
}

/// Applies a kernel operator (literal summation over the input variable).
pub fn apply(params: &Params, op: &GaussOperator, s: &Ket, mode: Mode) -> Result<GaussState> {
    apply_checked(params, op, s, mode, true)
}

/// Applies without rejecting an inadmissible output form.
pub fn apply_unchecked(params: &Params, op: &GaussOperator, s: &Ket, mode: Mode) -> Result<GaussState> {
    apply_checked(params, op, s, mode, false)
}

fn apply_checked(params: &Params, op: &GaussOperator, s: &Ket, mode: Mode, check: bool) -> Result<GaussState> {
    op.domain_in.check_same(s.domain())?;
    let Some(ts) = s.term("r")? else { return Ok(GaussState::zero(op.domain_out.clone())) };
    let Some(prod) = op.kernel.mul(&ts)? else { return Ok(GaussState::zero(op.domain_out.clone())) };
    let ctx = SumCtx::new(params, op.domain_in.tag, mode, Norm::Literal);
    match sum_out(&prod, "r", &ctx)? {
        None => Ok(GaussState::zero(op.domain_out.clone())),
        Some(t) => term_to_state(params, &t, "q", &op.domain_out, check),
    }
}

/// op1 after op2: kernel(q, r) = sum_y op1(q, y) op2(y, r).
pub fn compose(params: &Params, op1: &GaussOperator, op2: &GaussOperator, mode: Mode) -> Result<GaussOperator> {
    op1.domain_in.check_same(&op2.domain_out)?;
    let t1 = op1.kernel.rename("r", "y");
    let t2 = op2.kernel.rename("q", "y");
    let out = |kernel: Term| GaussOperator {
        kernel,
        domain_in: op2.domain_in.clone(),
        domain_out: op1.domain_out.clone(),
        unitary: op1.unitary && op2.unitary,
    };
    let Some(prod) = t1.mul(&t2)? else {
        return Ok(out(Term::new(GaussCoeff::zero(), QPoly::zero())));
    };
    if mode == Mode::Strict && prod.phase.split("y")?.0.is_zero() && !prod.guards.iter().any(|g| g.lin.contains("y")) {
        return Err(Error::DegenerateComposition);
    }
    let ctx = SumCtx::new(params, op1.domain_in.tag, mode, Norm::Literal);
    let kernel = match sum_out(&prod, "y", &ctx)? {
        None => Term::new(GaussCoeff::zero(), QPoly::zero()),
        Some(t) => t.fold_constant(params, op1.domain_out.tag)?,
    };
    Ok(out(kernel))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnitaryReport {
    pub passed: bool,
    pub columns_checked: usize,
    pub pairs_checked: usize,
    pub failures: Vec<String>,
}

/// Checks that the columns of the kernel are orthonormal under the Hermitian pairing, exactly in F_p.
pub fn check_unitary(params: &Params, op: &GaussOperator, mode: Mode) -> Result<UnitaryReport> {
    let ev = FpEval::new(params);
    let dom = &op.domain_in;
    let tag = op.domain_out.tag;
    // Gram kernel G(r1, r2) = sum_q op(q, r1) conj(op(q, r2)).
    let t1 = op.kernel.rename("r", "r1");
    let t2 = conj_term(&op.kernel.rename("r", "r2"));
    let ctx = SumCtx::new(params, tag, mode, Norm::Literal);
    let gram = match t1.mul(&t2)? {
        None => None,
        Some(prod) => sum_out(&prod, "q", &ctx)?,
    };
    let rows: Vec<i64> = dom.indices().collect();
    let cols: Vec<i64> = if dom.n <= 256 {
        rows.clone()
    } else {
        // deterministic sample: a stride through the index set
        rows.iter().step_by((dom.n / 64) as usize).cloned().collect()
    };
    let mut failures = Vec::new();
    let mut pairs = 0;
    for &r1 in &cols {
        for &r2 in &cols {
            pairs += 1;
            let assign: Assignment = [("r1".to_string(), r1), ("r2".to_string(), r2)].into();
            let val = match &gram {
                None => FpElem(0),
                Some(g) => g.eval_fp(&ev, tag, &assign)?,
            };
            let want = FpElem(u64::from(r1 == r2));
            if val != want {
                failures.push(format!("<col {r1} | col {r2}> = {val}, expected {want}"));
            }
        }
    }
    Ok(UnitaryReport { passed: failures.is_empty(), columns_checked: cols.len(), pairs_checked: pairs, failures })
}

/// Zeroes coordinates outside kZ + d and multiplies by sqrt(k).
pub fn restrict(s: &GaussState, k: i64, d: i64) -> Result<GaussState> {
    if k <= 0 || s.domain.n() % k != 0 {
        return Err(Error::BadCoset(format!("k={k} must divide N={}", s.domain.n)));
    }
    let Some(support) = intersect_cosets(s.support, (k, d.rem_euclid(k))) else {
        return Ok(GaussState::zero(s.domain.clone()));
    };
    let coeff = s.coeff.mul(&GaussCoeff::sqrt(&Rational::from_integer(k.into()))?)?;
    Ok(GaussState { coeff, support, ..s.clone() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Permutation {
    /// r -> u r + c mod N.
    Affine { u: i64, c: i64 },
    /// Entry i is the image of index i - N/2.
    Table(Vec<i64>),
}

impl Permutation {
    pub fn validate(&self, domain: &Domain) -> Result<()> {
        match self {
            Permutation::Affine { u, .. } => {
                if u.gcd(&domain.n()) != 1 {
                    return Err(Error::NotABijection(format!("gcd({u}, N) != 1")));
                }
            }
            Permutation::Table(t) => {
                if t.len() != domain.n as usize {
                    return Err(Error::NotABijection(format!("table has {} entries", t.len())));
                }
                let mut seen = vec![false; t.len()];
                for &x in t {
                    let i = domain.reduce(x) + domain.n() / 2;
                    if std::mem::replace(&mut seen[i as usize], true) {
                        return Err(Error::NotABijection(format!("{x} hit twice")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn image(&self, domain: &Domain, r: i64) -> i64 {
        match self {
            Permutation::Affine { u, c } => domain.reduce(u * r + c),
            Permutation::Table(t) => domain.reduce(t[(domain.reduce(r) + domain.n() / 2) as usize]),
        }
    }

    pub fn preimage(&self, domain: &Domain, r: i64) -> i64 {
        match self {
            Permutation::Affine { u, c } => {
                let n = domain.n();
                let inv = Integer::extended_gcd(&u.rem_euclid(n), &n).x.rem_euclid(n);
                domain.reduce(((r - c) as i128 * inv as i128).rem_euclid(n as i128) as i64)
            }
            Permutation::Table(_) => domain
                .indices()
                .find(|&x| self.image(domain, x) == domain.reduce(r))
                .expect("validated bijection"),
        }
    }
}

/// Materialized state: exact coordinates over [-N/2, N/2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseState {
    pub domain: Domain,
    pub values: Vec<GaussCoeff>,
}

impl DenseState {
    pub fn from_ket(s: &Ket) -> Result<Self> {
        let dom = s.domain().clone();
        let values = match s {
            Ket::Gauss(g) => dom.indices().map(|r| g.coord(r)).collect::<Result<_>>()?,
            Ket::Position(p) => dom
                .indices()
                .map(|r| if r == p.r { GaussCoeff::one() } else { GaussCoeff::zero() })
                .collect(),
        };
        Ok(DenseState { domain: dom, values })
    }

    pub fn at(&self, r: i64) -> &GaussCoeff {
        &self.values[(self.domain.reduce(r) + self.domain.n() / 2) as usize]
    }

    pub fn permute(&self, sigma: &Permutation) -> Result<Self> {
        sigma.validate(&self.domain)?;
        let values = self.domain.indices().map(|r| self.at(sigma.image(&self.domain, r)).clone()).collect();
        Ok(DenseState { domain: self.domain.clone(), values })
    }
}

/// Literal inner product of materialized states, in F_p.
pub fn inner_dense(params: &Params, s1: &DenseState, s2: &DenseState, kind: Kind) -> Result<FpElem> {
    s1.domain.check_same(&s2.domain)?;
    let mut acc = FpElem(0);
    for (x, y) in s1.values.iter().zip(&s2.values) {
        if x.is_zero() || y.is_zero() {
            continue;
        }
        let y = match kind {
            Kind::Euclidean => y.clone(),
            Kind::Hermitian => conj_formal(y),
        };
        acc = params.add(acc, params.mul(x.to_fp(params)?, y.to_fp(params)?));
    }
    Ok(acc)
}

/// psi^sigma(r) = psi(sigma(r)). Affine maps act symbolically, tables on materialized states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Permuted {
    Ket(Ket),
    Dense(DenseState),
}

pub fn permutation_unitary(params: &Params, sigma: &Permutation, s: &Ket) -> Result<Permuted> {
    let dom = s.domain().clone();
    sigma.validate(&dom)?;
    match (sigma, s) {
        (_, Ket::Position(p)) => {
            Ok(Permuted::Ket(Ket::Position(PositionState::new(sigma.preimage(&dom, p.r), dom)?)))
        }
        (Permutation::Affine { u, c }, Ket::Gauss(_)) => {
            let Some(t) = s.term("x")? else { return Ok(Permuted::Ket(s.clone())) };
            let image = QPoly::var("x").scale(&Rational::from_integer((*u).into())).add(&QPoly::int(*c));
            match t.subst("x", &image)? {
                None => Ok(Permuted::Ket(Ket::Gauss(GaussState::zero(dom)))),
                Some(t) => Ok(Permuted::Ket(Ket::Gauss(term_to_state(params, &t, "x", &dom, false)?))),
            }
        }
        (Permutation::Table(_), Ket::Gauss(_)) => Ok(Permuted::Dense(DenseState::from_ket(s)?.permute(sigma)?)),
    }
}

/// Separable product of up to four states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductState {
    pub factors: Vec<Ket>,
}

pub fn tensor(states: Vec<Ket>) -> Result<ProductState> {
    if states.is_empty() || states.len() > 4 {
        return Err(Error::Precondition(format!("tensor arity {} not in 1..=4", states.len())));
    }
    for s in &states[1..] {
        states[0].domain().check_same(s.domain())?;
    }
    Ok(ProductState { factors: states })
}

pub fn inner_product_state(
    params: &Params,
    s1: &ProductState,
    s2: &ProductState,
    kind: Kind,
    mode: Mode,
) -> Result<GaussCoeff> {
    if s1.factors.len() != s2.factors.len() {
        return Err(Error::Precondition("tensor arities differ".into()));
    }
    let mut acc = GaussCoeff::one();
    for (a, b) in s1.factors.iter().zip(&s2.factors) {
        acc = acc.mul(&inner(params, a, b, kind, mode)?)?;
    }
    Ok(acc)
}

/// JSON state descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDescriptor {
    pub domain: Tag,
    pub coeff: GaussCoeff,
    pub form: [i64; 3],
    #[serde(default = "one_i64", skip_serializing_if = "is_one")]
    pub den: i64,
    pub p_param: i64,
    #[serde(default = "unit_support")]
    pub support: [i64; 2],
}

fn one_i64() -> i64 {
    1
}

fn is_one(x: &i64) -> bool {
    *x == 1
}

fn unit_support() -> [i64; 2] {
    [1, 0]
}

impl GaussState {
    pub fn descriptor(&self) -> StateDescriptor {
        StateDescriptor {
            domain: self.domain.tag,
            coeff: self.coeff.clone(),
            form: [self.form.a, self.form.b, self.form.c],
            den: self.form.den,
            p_param: self.p_param,
            support: [self.support.0, self.support.1],
        }
    }

    pub fn from_descriptor(params: &Params, d: &StateDescriptor) -> Result<Self> {
        let domain = Domain::of(params, d.domain);
        let [k, off] = d.support;
        if k <= 0 || domain.n() % k != 0 {
            return Err(Error::BadCoset(format!("support ({k}, {off})")));
        }
        if d.den <= 0 {
            return Err(Error::Precondition(format!("den {}", d.den)));
        }
        let form = QuadForm { a: d.form[0], b: d.form[1], c: d.form[2], den: d.den };
        let mut s = GaussState::new(d.coeff.clone(), form, d.p_param, domain)?;
        s.support = (k, off.rem_euclid(k));
        Ok(s)
    }
}

/// Brute-force oracles on materialized vectors and matrices.
pub mod oracle {
    use super::*;
    use rayon::prelude::*;

    pub fn conj_vector(params: &Params, s: &Ket) -> Result<Vec<FpElem>> {
        let dom = s.domain();
        let Some(t) = s.term("x")? else { return Ok(vec![FpElem(0); dom.n as usize]) };
        let ct = conj_term(&t);
        let ev = FpEval::new(params);
        dom.indices().map(|r| ct.eval_fp(&ev, dom.tag, &[("x".to_string(), r)].into())).collect()
    }

    /// Literal sum of s1(x) s2(x) or s1(x) conj(s2(x)) over all x.
    pub fn inner_literal(params: &Params, s1: &Ket, s2: &Ket, kind: Kind) -> Result<FpElem> {
        let ev = FpEval::new(params);
        let v1 = s1.vector_fp(&ev)?;
        let v2 = match kind {
            Kind::Euclidean => s2.vector_fp(&ev)?,
            Kind::Hermitian => conj_vector(params, s2)?,
        };
        Ok(v1.iter().zip(&v2).fold(FpElem(0), |acc, (a, b)| params.add(acc, params.mul(*a, *b))))
    }

    /// Effective quadratic coefficient of a pairing: the combined x^2 coefficient times the
    /// modulus of the common support.
    pub fn effective_a(s1: &GaussState, s2: &GaussState, kind: Kind) -> Option<Rational> {
        let q = |s: &GaussState| Rational::new(s.form.a.into(), s.form.den.into());
        let comb = match kind {
            Kind::Euclidean => q(s1) + q(s2),
            Kind::Hermitian => q(s1) - q(s2),
        };
        let (k, _) = intersect_cosets(s1.support, s2.support)?;
        Some(comb * Rational::from_integer(k.into()))
    }

    /// Formal pairing by brute force: literal sum divided by |a_eff| (undivided when a_eff = 0).
    pub fn inner_formal(params: &Params, s1: &GaussState, s2: &GaussState, kind: Kind) -> Result<FpElem> {
        let lit = inner_literal(params, &Ket::Gauss(s1.clone()), &Ket::Gauss(s2.clone()), kind)?;
        match effective_a(s1, s2, kind) {
            Some(a) if !a.is_zero() => Ok(params.mul(lit, params.from_rational(&(Rational::one() / a.abs()))?)),
            _ => Ok(lit),
        }
    }

    pub fn kernel_matrix(params: &Params, op: &GaussOperator) -> Result<Vec<Vec<FpElem>>> {
        let ev = FpEval::new(params);
        let rows: Vec<i64> = op.domain_out.indices().collect();
        rows.par_iter()
            .map(|&q| op.domain_in.indices().map(|r| op.entry_fp(&ev, q, r)).collect())
            .collect()
    }

    pub fn apply_vector(params: &Params, m: &[Vec<FpElem>], v: &[FpElem]) -> Vec<FpElem> {
        m.iter()
            .map(|row| row.iter().zip(v).fold(FpElem(0), |acc, (a, b)| params.add(acc, params.mul(*a, *b))))
            .collect()
    }

    pub fn mat_mul(params: &Params, a: &[Vec<FpElem>], b: &[Vec<FpElem>]) -> Vec<Vec<FpElem>> {
        let n = b.first().map_or(0, |r| r.len());
        a.par_iter()
            .map(|row| {
                (0..n)
                    .map(|j| {
                        row.iter()
                            .zip(b)
                            .fold(FpElem(0), |acc, (x, brow)| params.add(acc, params.mul(*x, brow[j])))
                    })
                    .collect()
            })
            .collect()
    }

    pub fn state_vector(params: &Params, s: &GaussState) -> Result<Vec<FpElem>> {
        Ket::Gauss(s.clone()).vector_fp(&FpEval::new(params))
    }
}
