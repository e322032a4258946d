//! Symbolic summation of guarded quadratic phases over one variable.
//!
//! A [`Term`] stands for `coeff * [guards] * e(phase / 2N)` where `phase` is a polynomial of
//! degree at most two in named integer variables and each guard is a congruence `k | lin`.
//! [`sum_out`] replaces the sum of a term over one variable ranging over [-N/2, N/2) by a
//! single term free of that variable.

use crate::arith::{Params, Rational, Tag, FpElem};
use crate::coeffring::GaussCoeff;
use crate::error::{Error, Result};
use crate::gauss::Mode;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

pub type Assignment = BTreeMap<String, i64>;

/// Polynomial with rational coefficients; monomials are sorted variable lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct QPoly {
    terms: BTreeMap<Vec<String>, Rational>,
}

impl QPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(q: Rational) -> Self {
        Self::monomial(q, &[])
    }

    pub fn int(n: i64) -> Self {
        Self::constant(Rational::from_integer(n.into()))
    }

    pub fn var(name: &str) -> Self {
        Self::monomial(Rational::one(), &[name])
    }

    pub fn monomial(q: Rational, vars: &[&str]) -> Self {
        let mut key: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        key.sort();
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(key, q);
        }
        QPoly { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<String>, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.terms.keys().flatten().cloned().collect()
    }

    pub fn contains(&self, var: &str) -> bool {
        self.terms.keys().any(|k| k.iter().any(|v| v == var))
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn without_constant(&self) -> QPoly {
        let mut out = self.clone();
        out.terms.remove(&Vec::new());
        out
    }

    pub fn coeff_of(&self, vars: &[&str]) -> Rational {
        let mut key: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        key.sort();
        self.terms.get(&key).cloned().unwrap_or_else(Rational::zero)
    }

    fn insert_add(&mut self, key: Vec<String>, q: Rational) {
        let e = self.terms.entry(key).or_insert_with(Rational::zero);
        *e += q;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.insert_add(k.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> QPoly {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, q: &Rational) -> QPoly {
        if q.is_zero() {
            return QPoly::zero();
        }
        QPoly { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * q)).collect() }
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        let mut out = QPoly::zero();
        for (k1, v1) in &self.terms {
            for (k2, v2) in &other.terms {
                let mut key = k1.clone();
                key.extend(k2.iter().cloned());
                key.sort();
                out.insert_add(key, v1 * v2);
            }
        }
        out
    }

    /// Substitutes `var := value` everywhere.
    pub fn subst(&self, var: &str, value: &QPoly) -> QPoly {
        let mut out = QPoly::zero();
        for (k, v) in &self.terms {
            let mut piece = QPoly::constant(v.clone());
            let mut rest = Vec::new();
            for x in k {
                if x == var {
                    piece = piece.mul(value);
                } else {
                    rest.push(x.clone());
                }
            }
            let rest_refs: Vec<&str> = rest.iter().map(|s| s.as_str()).collect();
            out = out.add(&piece.mul(&QPoly::monomial(Rational::one(), &rest_refs)));
        }
        out
    }

    pub fn rename(&self, from: &str, to: &str) -> QPoly {
        self.subst(from, &QPoly::var(to))
    }

    /// Splits into `alpha * var^2 + beta * var + gamma`; `alpha` must be a constant.
    pub fn split(&self, var: &str) -> Result<(Rational, QPoly, QPoly)> {
        let mut alpha = Rational::zero();
        let mut beta = QPoly::zero();
        let mut gamma = QPoly::zero();
        for (k, v) in &self.terms {
            let n = k.iter().filter(|x| *x == var).count();
            let rest: Vec<String> = k.iter().filter(|x| *x != var).cloned().collect();
            match (n, rest.is_empty()) {
                (0, _) => gamma.insert_add(rest, v.clone()),
                (1, _) => beta.insert_add(rest, v.clone()),
                (2, true) => alpha += v,
                _ => return Err(Error::NonQuadratic(format!("{var} in {self}"))),
            }
        }
        Ok((alpha, beta, gamma))
    }

    pub fn eval(&self, assign: &Assignment) -> Result<Rational> {
        let mut acc = Rational::zero();
        for (k, v) in &self.terms {
            let mut t = v.clone();
            for x in k {
                let val = assign.get(x).ok_or_else(|| Error::UnboundVariable(x.clone()))?;
                t *= Rational::from_integer((*val).into());
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Partially evaluates the variables present in `assign`.
    pub fn partial_eval(&self, assign: &Assignment) -> QPoly {
        let mut out = self.clone();
        for (x, v) in assign {
            if out.contains(x) {
                out = out.subst(x, &QPoly::int(*v));
            }
        }
        out
    }

    pub fn denom_lcm(&self) -> BigInt {
        self.terms.values().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
    }

    pub fn has_integer_coeffs(&self) -> bool {
        self.terms.values().all(|v| v.is_integer())
    }
}

impl fmt::Display for QPoly {
    /// Deterministic rendering: higher degree first, then lexicographic by variables.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&Vec<String>> = self.terms.keys().collect();
        keys.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        for (i, k) in keys.iter().enumerate() {
            let v = &self.terms[*k];
            let neg = v.is_negative();
            let mag = v.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mut factors: Vec<String> = Vec::new();
            if k.is_empty() || !mag.is_one() {
                factors.push(mag.to_string());
            }
            let mut j = 0;
            while j < k.len() {
                if j + 1 < k.len() && k[j] == k[j + 1] {
                    factors.push(format!("{}^2", k[j]));
                    j += 2;
                } else {
                    factors.push(k[j].clone());
                    j += 1;
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Divisibility condition `k | lin` with `lin` linear and integer-coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Guard {
    pub k: i64,
    pub lin: QPoly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuardOutcome {
    Always,
    Never,
    Cond(Guard),
}

impl Guard {
    /// Normal form: integer coefficients reduced mod k, common factors with k removed.
    pub fn make(k: i64, lin: &QPoly) -> Result<GuardOutcome> {
        if k <= 0 {
            return Err(Error::Precondition(format!("guard modulus {k}")));
        }
        if lin.degree() > 1 {
            return Err(Error::NonQuadratic(format!("guard {k} | ({lin}) is not linear")));
        }
        let d = lin.denom_lcm();
        let kk = BigInt::from(k) * &d;
        let mut coeffs: BTreeMap<Vec<String>, BigInt> = BTreeMap::new();
        for (key, v) in lin.terms() {
            let n = sym_mod(&(v * Rational::from_integer(d.clone())).to_integer(), &kk);
            if !n.is_zero() {
                coeffs.insert(key.clone(), n);
            }
        }
        let g = coeffs.values().fold(kk.clone(), |acc, v| acc.gcd(v));
        let k2 = &kk / &g;
        if k2.is_one() {
            return Ok(GuardOutcome::Always);
        }
        if coeffs.keys().all(|key| key.is_empty()) {
            return Ok(GuardOutcome::Never);
        }
        let k2 = k2.to_i64().ok_or(Error::Overflow)?;
        let mut out = QPoly::zero();
        for (key, v) in coeffs {
            out.terms.insert(key, Rational::from_integer(v / &g));
        }
        Ok(GuardOutcome::Cond(Guard { k: k2, lin: out }))
    }

    pub fn holds(&self, assign: &Assignment) -> Result<bool> {
        let v = self.lin.eval(assign)?;
        Ok(v.is_integer() && v.to_integer().mod_floor(&BigInt::from(self.k)).is_zero())
    }

    fn coeff_i64(&self, var: &str) -> i64 {
        self.lin.coeff_of(&[var]).to_integer().to_i64().expect("reduced mod k")
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "if {} | ({})", self.k, self.lin)
    }
}

/// `coeff * prod(guards) * e(phase / 2N)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coeff: GaussCoeff,
    pub guards: Vec<Guard>,
    pub phase: QPoly,
}

impl Term {
    pub fn new(coeff: GaussCoeff, phase: QPoly) -> Self {
        Term { coeff, guards: Vec::new(), phase }
    }

    pub fn one() -> Self {
        Term::new(GaussCoeff::one(), QPoly::zero())
    }

    /// Adds a guard; `None` if the guard can never hold.
    pub fn with_guard(mut self, k: i64, lin: &QPoly) -> Result<Option<Term>> {
        match Guard::make(k, lin)? {
            GuardOutcome::Always => Ok(Some(self)),
            GuardOutcome::Never => Ok(None),
            GuardOutcome::Cond(g) => {
                if !self.guards.contains(&g) {
                    self.guards.push(g);
                }
                Ok(Some(self))
            }
        }
    }

    pub fn mul(&self, other: &Term) -> Result<Option<Term>> {
        let mut t = Term {
            coeff: self.coeff.mul(&other.coeff)?,
            guards: self.guards.clone(),
            phase: self.phase.add(&other.phase),
        };
        if t.coeff.is_zero() {
            return Ok(None);
        }
        for g in &other.guards {
            match t.with_guard(g.k, &g.lin)? {
                Some(next) => t = next,
                None => return Ok(None),
            }
        }
        Ok(Some(t))
    }

    pub fn scale(&self, c: &GaussCoeff) -> Result<Term> {
        Ok(Term { coeff: self.coeff.mul(c)?, ..self.clone() })
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut v = self.phase.vars();
        for g in &self.guards {
            v.extend(g.lin.vars());
        }
        v
    }

    pub fn contains(&self, var: &str) -> bool {
        self.phase.contains(var) || self.guards.iter().any(|g| g.lin.contains(var))
    }

    /// Substitutes `var := value`; `None` if a guard becomes unsatisfiable.
    pub fn subst(&self, var: &str, value: &QPoly) -> Result<Option<Term>> {
        let mut t = Term::new(self.coeff.clone(), self.phase.subst(var, value));
        for g in &self.guards {
            match t.with_guard(g.k, &g.lin.subst(var, value))? {
                Some(next) => t = next,
                None => return Ok(None),
            }
        }
        Ok(Some(t))
    }

    pub fn rename(&self, from: &str, to: &str) -> Term {
        Term {
            coeff: self.coeff.clone(),
            guards: self
                .guards
                .iter()
                .map(|g| Guard { k: g.k, lin: g.lin.rename(from, to) })
                .collect(),
            phase: self.phase.rename(from, to),
        }
    }

    /// Partially evaluates; `None` if a guard fails.
    pub fn partial_eval(&self, assign: &Assignment) -> Result<Option<Term>> {
        let mut t = Some(self.clone());
        for (x, v) in assign {
            t = match t {
                Some(t) if t.contains(x) => t.subst(x, &QPoly::int(*v))?,
                other => other,
            };
        }
        Ok(t)
    }

    /// Moves the constant part of the phase into the coefficient.
    pub fn fold_constant(&self, params: &Params, tag: Tag) -> Result<Term> {
        let c = self.phase.constant_term();
        if c.is_zero() {
            return Ok(self.clone());
        }
        let q = c / Rational::from_integer(BigInt::from(2 * params.n_of(tag)));
        Ok(Term {
            coeff: self.coeff.mul(&GaussCoeff::phase(q, tag))?,
            guards: self.guards.clone(),
            phase: self.phase.without_constant(),
        })
    }

    /// Value of a closed term (no variables, no guards) as a coefficient.
    pub fn to_coeff(&self, params: &Params, tag: Tag) -> Result<GaussCoeff> {
        if !self.vars().is_empty() {
            return Err(Error::Precondition(format!("term still has variables {:?}", self.vars())));
        }
        Ok(self.fold_constant(params, tag)?.coeff)
    }

    pub fn eval_fp(&self, ev: &FpEval, tag: Tag, assign: &Assignment) -> Result<FpElem> {
        for g in &self.guards {
            if !g.holds(assign)? {
                return Ok(FpElem(0));
            }
        }
        let c = self.coeff.to_fp(ev.params())?;
        if c.0 == 0 {
            return Ok(c);
        }
        let ph = ev.phase(&self.phase.eval(assign)?, ev.params().n_of(tag))?;
        Ok(ev.params().mul(c, ph))
    }
}

/// Normalization applied when a quadratic coefficient a is summed out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    /// The plain sum over all N values.
    Literal,
    /// The plain sum divided by |a| (one period of length M/|a| when a | b).
    Formal,
}

#[derive(Debug, Clone, Copy)]
pub struct SumCtx<'a> {
    pub params: &'a Params,
    pub tag: Tag,
    pub mode: Mode,
    pub norm: Norm,
}

impl<'a> SumCtx<'a> {
    pub fn new(params: &'a Params, tag: Tag, mode: Mode, norm: Norm) -> Self {
        SumCtx { params, tag, mode, norm }
    }

    pub fn n(&self) -> i64 {
        self.params.n_of(self.tag) as i64
    }
}

fn rat_i(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Representative of n mod k in (-k/2, k/2].
fn sym_mod(n: &BigInt, k: &BigInt) -> BigInt {
    let r = n.mod_floor(k);
    if BigInt::from(2) * &r > *k {
        r - k
    } else {
        r
    }
}

/// Reduces integer coefficients into (-s/2, s/2]; rational ones are kept.
fn reduce_integer_coeffs(p: &QPoly, s: i64) -> QPoly {
    let s = BigInt::from(s);
    let mut out = QPoly::zero();
    for (k, v) in p.terms() {
        let v = if v.is_integer() { Rational::from_integer(sym_mod(&v.to_integer(), &s)) } else { v.clone() };
        let refs: Vec<&str> = k.iter().map(|x| x.as_str()).collect();
        out = out.add(&QPoly::monomial(v, &refs));
    }
    out
}

fn mod_inverse(a: i64, m: i64) -> i64 {
    let e = Integer::extended_gcd(&a.rem_euclid(m), &m);
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(m)
}

/// Checks that `lin` takes integer values wherever the guards hold, via a single guard multiple.
fn integral_under(lin: &QPoly, guards: &[Guard]) -> bool {
    let d = lin.denom_lcm();
    if d.is_one() {
        return true;
    }
    let Some(d) = d.to_i64() else { return false };
    let scaled = lin.scale(&rat_i(d));
    for g in guards {
        for lam in 1..d {
            if (lam * g.k) % d != 0 {
                continue;
            }
            let rest = scaled.sub(&g.lin.scale(&rat_i(lam)));
            if rest.terms().all(|(_, v)| v.is_integer() && (v.to_integer() % d).is_zero()) {
                return true;
            }
        }
    }
    false
}

/// Sums `term` over `var` in [-N/2, N/2). Returns `None` when the sum vanishes identically.
///
/// Guards mentioning `var` are solved first (each shrinks the effective modulus M), then the
/// remaining sum over var mod M is evaluated in closed form. Fails with `NonPeriodic` if the
/// summand is not periodic (the literal sum would depend on the representative range) and
/// with `Unsupported` if the closed form does not apply (4|a| does not divide M).
pub fn sum_out(term: &Term, var: &str, ctx: &SumCtx) -> Result<Option<Term>> {
    let mut t = term.clone();
    let n = ctx.n();
    let mut m = n;
    while let Some(idx) = t.guards.iter().position(|g| g.lin.contains(var)) {
        let g = t.guards.remove(idx);
        let c = g.coeff_i64(var);
        let d = g.lin.sub(&QPoly::var(var).scale(&rat_i(c)));
        if (c as i128 * m as i128) % g.k as i128 != 0 {
            return Err(Error::NonPeriodic(format!("{var}: guard {g} with modulus {m}")));
        }
        let gg = c.gcd(&g.k);
        let s = g.k / gg;
        t = match t.with_guard(gg, &d)? {
            Some(t) => t,
            None => return Ok(None),
        };
        if s == 1 {
            continue;
        }
        let u = mod_inverse(c / gg, s);
        let y0 = reduce_integer_coeffs(&d.scale(&Rational::new((-u).into(), gg.into())), s);
        let value = y0.add(&QPoly::var(var).scale(&rat_i(s)));
        t = match t.subst(var, &value)? {
            Some(t) => t,
            None => return Ok(None),
        };
        m /= s;
    }
    let sigma = n / m;
    let (alpha, beta, gamma) = t.phase.split(var)?;
    let a = &alpha / rat_i(sigma);
    if !a.is_integer() {
        return Err(Error::NonPeriodic(format!("{var}: quadratic coefficient {alpha} at modulus {m}")));
    }
    let a = a.to_integer().to_i64().ok_or(Error::Overflow)?;
    let b = beta.scale(&Rational::new(1.into(), (2 * sigma).into()));
    // Periodicity of n -> e((a n^2 + 2 b n)/2M) with period M.
    let shift = b.add(&QPoly::constant(Rational::new((a * m).into(), 2.into())));
    if !integral_under(&shift, &t.guards) {
        return Err(Error::NonPeriodic(format!("{var}: linear part {b} at modulus {m}")));
    }
    let rest = Term { coeff: t.coeff.clone(), guards: t.guards.clone(), phase: gamma.clone() };
    if m == 1 {
        return Ok(Some(rest));
    }
    if a == 0 {
        if ctx.mode == Mode::Strict {
            return Ok(None);
        }
        let factor = GaussCoeff::count_scale(ctx.params, ctx.tag, &rat_i(m));
        return rest.scale(&factor)?.with_guard(m, &b);
    }
    let abs_a = a.abs();
    if m % (4 * abs_a) != 0 {
        return Err(Error::Unsupported(format!("{var}: quadratic coefficient {a} at modulus {m}")));
    }
    let root = match ctx.norm {
        Norm::Literal => rat_i(abs_a * m),
        Norm::Formal => Rational::new(m.into(), abs_a.into()),
    };
    let factor = GaussCoeff::sqrt_scale(ctx.params, ctx.tag, &root)?.mul(&GaussCoeff::e8_pow(a.signum()))?;
    let completed = gamma.sub(&beta.mul(&beta).scale(&(Rational::one() / (rat_i(4) * &alpha))));
    let out = Term { coeff: t.coeff.mul(&factor)?, guards: t.guards, phase: completed };
    out.with_guard(abs_a, &b)
}

/// Sums each term of a list over `var`, dropping vanishing results.
pub fn sum_out_all(terms: &[Term], var: &str, ctx: &SumCtx) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    for t in terms {
        if let Some(s) = sum_out(t, var, ctx)? {
            out.push(s);
        }
    }
    Ok(out)
}

/// Characters e(num / (2N den)) with cached tables, for brute-force oracles.
pub struct FpEval {
    params: Params,
    tables: Mutex<HashMap<u64, Arc<Vec<FpElem>>>>,
}

const MAX_TABLE: u64 = 1 << 23;

impl FpEval {
    pub fn new(params: &Params) -> Self {
        FpEval { params: params.clone(), tables: Mutex::new(HashMap::new()) }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn table(&self, modulus: u64) -> Option<Arc<Vec<FpElem>>> {
        if modulus > MAX_TABLE || (self.params.p - 1) % modulus != 0 {
            return None;
        }
        let mut tables = self.tables.lock().expect("table cache");
        if let Some(t) = tables.get(&modulus) {
            return Some(t.clone());
        }
        let t = Arc::new(self.params.char_table(modulus).ok()?);
        tables.insert(modulus, t.clone());
        Some(t)
    }

    /// e(x / 2N) for rational x.
    pub fn phase(&self, x: &Rational, n: u64) -> Result<FpElem> {
        let modulus = BigInt::from(2 * n) * x.denom();
        if let Some(m) = modulus.to_u64() {
            if let Some(t) = self.table(m) {
                let idx = x.numer().mod_floor(&BigInt::from(m)).to_u64().expect("reduced");
                return Ok(t[idx as usize]);
            }
        }
        self.params.char_e(&(x / Rational::from_integer(BigInt::from(2 * n))))
    }

    /// Literal brute-force sum of a term over `var` in [-N/2, N/2), other variables fixed.
    pub fn sum_var(&self, term: &Term, var: &str, tag: Tag, assign: &Assignment) -> Result<FpElem> {
        let n = self.params.n_of(tag) as i64;
        let Some(t) = term.partial_eval(assign)? else { return Ok(FpElem(0)) };
        let (alpha, beta, gamma) = t.phase.split(var)?;
        let beta = beta.eval(assign)?;
        let gamma = gamma.eval(assign)?;
        let c = t.coeff.to_fp(&self.params)?;
        let den = alpha.denom().lcm(beta.denom()).lcm(gamma.denom());
        let modulus = (BigInt::from(2 * n) * &den).to_u64().ok_or(Error::Overflow)?;
        let to_i = |q: &Rational| -> Result<i128> {
            (q * Rational::from_integer(den.clone())).to_integer().to_i128().ok_or(Error::Overflow)
        };
        let (ai, bi, gi) = (to_i(&alpha)?, to_i(&beta)?, to_i(&gamma)?);
        let table = self.table(modulus);
        let p = self.params.p as u128;
        let mut acc = 0u128;
        let mut one = Assignment::new();
        for y in -n / 2..n - n / 2 {
            if !t.guards.is_empty() {
                one.insert(var.to_string(), y);
                let mut ok = true;
                for g in &t.guards {
                    if !g.holds(&one)? {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    continue;
                }
            }
            let y = y as i128;
            let e = (ai * y * y + bi * y + gi).rem_euclid(modulus as i128) as u64;
            let v = match &table {
                Some(tb) => tb[e as usize],
                None => self.params.char_e(&Rational::new(e.into(), modulus.into()))?,
            };
            acc = (acc + v.0 as u128) % p;
        }
        Ok(self.params.mul(c, FpElem(acc as u64)))
    }
}

impl Clone for FpEval {
    fn clone(&self) -> Self {
        FpEval::new(&self.params)
    }
}

/// Coefficient of a constant phase e(x / 2N) in the domain's tag.
pub fn phase_coeff(params: &Params, tag: Tag, x: &Rational) -> GaussCoeff {
    let q = x / Rational::from_integer(BigInt::from(2 * params.n_of(tag)));
    GaussCoeff::phase(q, tag)
}
