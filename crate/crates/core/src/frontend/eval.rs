use super::eliminate::NormalForm;
use super::{Expr, ExprKind, Quant};
use crate::arith::{FpElem, Params, Rational, Tag};
use crate::coeffring::GaussCoeff;
use crate::error::{Error, Result};
use crate::gauss::sum::{Assignment, FpEval};
use crate::gauss::Backend;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Fp(FpElem),
    Complex(Complex64),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Fp(x) => write!(f, "{x}"),
            Value::Complex(z) => write!(f, "{} + {}i", z.re, z.im),
        }
    }
}

fn check_bound(e: &Expr, assign: &Assignment) -> Result<()> {
    match e.free_vars().into_iter().find(|v| !assign.contains_key(v)) {
        Some(v) => Err(Error::UnboundVariable(v)),
        None => Ok(()),
    }
}

/// Literal evaluation; quantifiers are summed over [-N/2, N/2) of the expression's domain.
pub fn eval(e: &Expr, params: &Params, assign: &Assignment, backend: Backend) -> Result<Value> {
    check_bound(e, assign)?;
    match backend {
        Backend::Fp => Ok(Value::Fp(Compiled::new(e, params)?.eval(assign)?)),
        Backend::Complex => {
            let tag = e.tag()?;
            let mut env = assign.clone();
            Ok(Value::Complex(eval_complex(e, params, tag, &mut env)?))
        }
    }
}

fn coeff_complex(params: &Params, c: &GaussCoeff) -> Result<Complex64> {
    Ok(c.to_complex(params)?.to_c64())
}

fn phase_value(params: &Params, tag: Tag, x: Rational) -> GaussCoeff {
    GaussCoeff::phase(x / Rational::from_integer(BigInt::from(2 * params.n_of(tag))), tag)
}

fn eval_complex(e: &Expr, params: &Params, tag: Tag, env: &mut Assignment) -> Result<Complex64> {
    Ok(match &e.kind {
        ExprKind::Num(q) => Complex64::new(q.to_f64().ok_or(Error::Overflow)?, 0.0),
        ExprKind::JPow(k) => coeff_complex(params, &GaussCoeff::j_pow(*k))?,
        ExprKind::E8Pow(k) => coeff_complex(params, &GaussCoeff::e8_pow(*k))?,
        ExprKind::Sqrt(q) => coeff_complex(params, &GaussCoeff::sqrt(q)?)?,
        ExprKind::Phase { poly, .. } => coeff_complex(params, &phase_value(params, tag, poly.eval(env)?))?,
        ExprKind::Mul(a, b) => eval_complex(a, params, tag, env)? * eval_complex(b, params, tag, env)?,
        ExprKind::Add(a, b) => eval_complex(a, params, tag, env)? + eval_complex(b, params, tag, env)?,
        ExprKind::Quant { q, var, body } => {
            let n = params.n_of(tag) as i64;
            let saved = env.get(var).copied();
            let mut acc = Complex64::new(0.0, 0.0);
            for r in -n / 2..n - n / 2 {
                env.insert(var.clone(), r);
                acc += eval_complex(body, params, tag, env)?;
            }
            match saved {
                Some(v) => env.insert(var.clone(), v),
                None => env.remove(var),
            };
            match q {
                Quant::Sum => acc,
                Quant::Int => acc * coeff_complex(params, &GaussCoeff::inv_sqrt_n(params, tag))?,
            }
        }
    })
}

/// Evaluates a normal form at an assignment of its free variables.
pub fn eval_normal_form(nf: &NormalForm, params: &Params, assign: &Assignment, backend: Backend) -> Result<Value> {
    match backend {
        Backend::Fp => eval_normal_form_fp(&FpEval::new(params), nf, assign).map(Value::Fp),
        Backend::Complex => {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in &nf.terms {
                if let Some(v) = t.vars().into_iter().find(|v| !assign.contains_key(v)) {
                    return Err(Error::UnboundVariable(v));
                }
                if t.guards.iter().map(|g| g.holds(assign)).collect::<Result<Vec<_>>>()?.contains(&false) {
                    continue;
                }
                let c = t.coeff.mul(&phase_value(params, nf.tag, t.phase.eval(assign)?))?;
                acc += coeff_complex(params, &c)?;
            }
            Ok(Value::Complex(acc))
        }
    }
}

/// F_p evaluation with a shared character cache.
pub fn eval_normal_form_fp(ev: &FpEval, nf: &NormalForm, assign: &Assignment) -> Result<FpElem> {
    let p = ev.params();
    let mut acc = FpElem(0);
    for t in &nf.terms {
        if let Some(v) = t.vars().into_iter().find(|v| !assign.contains_key(v)) {
            return Err(Error::UnboundVariable(v));
        }
        acc = p.add(acc, t.eval_fp(ev, nf.tag, assign)?);
    }
    Ok(acc)
}

enum Node {
    Const(FpElem),
    /// e(sum c * prod x / 2N), looked up in a table of size 2N.
    Phase(Vec<(i128, Vec<usize>)>),
    Mul(Box<Node>, Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sum { slot: usize, scale: Option<FpElem>, body: Box<Node> },
}

/// An expression compiled for fast F_p evaluation: variables become slots, phases index a
/// character table.
pub struct Compiled {
    root: Node,
    slots: Vec<String>,
    params: Params,
    table: Vec<FpElem>,
    n: i64,
}

impl Compiled {
    pub fn new(e: &Expr, params: &Params) -> Result<Self> {
        let tag = e.tag()?;
        let n = params.n_of(tag) as i64;
        let mut c = Compiled {
            root: Node::Const(FpElem(1)),
            slots: Vec::new(),
            params: params.clone(),
            table: params.char_table(2 * n as u64)?,
            n,
        };
        c.root = c.compile(e, tag)?;
        Ok(c)
    }

    fn slot(&mut self, v: &str) -> usize {
        match self.slots.iter().position(|s| s == v) {
            Some(i) => i,
            None => {
                self.slots.push(v.to_string());
                self.slots.len() - 1
            }
        }
    }

    fn compile(&mut self, e: &Expr, tag: Tag) -> Result<Node> {
        let p = &self.params;
        let coeff = |c: GaussCoeff| -> Result<Node> { Ok(Node::Const(c.to_fp(p)?)) };
        Ok(match &e.kind {
            ExprKind::Num(q) => Node::Const(p.from_rational(q)?),
            ExprKind::JPow(k) => coeff(GaussCoeff::j_pow(*k))?,
            ExprKind::E8Pow(k) => coeff(GaussCoeff::e8_pow(*k))?,
            ExprKind::Sqrt(q) => coeff(GaussCoeff::sqrt(q)?)?,
            ExprKind::Phase { poly, .. } => {
                let mut monos = Vec::new();
                for (vars, c) in poly.terms() {
                    if !c.is_integer() {
                        return Err(Error::Precondition(format!("non-integer phase coefficient {c}")));
                    }
                    let ci = c.to_integer().to_i128().ok_or(Error::Overflow)?;
                    let slots = vars.iter().map(|v| self.slot(v)).collect();
                    monos.push((ci, slots));
                }
                Node::Phase(monos)
            }
            ExprKind::Mul(a, b) => Node::Mul(Box::new(self.compile(a, tag)?), Box::new(self.compile(b, tag)?)),
            ExprKind::Add(a, b) => Node::Add(Box::new(self.compile(a, tag)?), Box::new(self.compile(b, tag)?)),
            ExprKind::Quant { q, var, body } => {
                let slot = self.slot(var);
                let scale = match q {
                    Quant::Sum => None,
                    Quant::Int => Some(GaussCoeff::inv_sqrt_n(&self.params, tag).to_fp(&self.params)?),
                };
                Node::Sum { slot, scale, body: Box::new(self.compile(body, tag)?) }
            }
        })
    }

    pub fn eval(&self, assign: &Assignment) -> Result<FpElem> {
        let mut env = vec![0i64; self.slots.len()];
        for (i, s) in self.slots.iter().enumerate() {
            if let Some(v) = assign.get(s) {
                env[i] = *v;
            }
        }
        Ok(self.run(&self.root, &mut env))
    }

    fn run(&self, node: &Node, env: &mut [i64]) -> FpElem {
        let p = &self.params;
        match node {
            Node::Const(c) => *c,
            Node::Phase(monos) => {
                let m = 2 * self.n as i128;
                let mut x = 0i128;
                for (c, vars) in monos {
                    let mut t = *c;
                    for &s in vars {
                        t = t * env[s] as i128 % m;
                    }
                    x += t;
                }
                self.table[x.rem_euclid(m) as usize]
            }
            Node::Mul(a, b) => {
                let x = self.run(a, env);
                if x.0 == 0 {
                    return x;
                }
                p.mul(x, self.run(b, env))
            }
            Node::Add(a, b) => p.add(self.run(a, env), self.run(b, env)),
            Node::Sum { slot, scale, body } => {
                let saved = env[*slot];
                let mut acc = 0u128;
                for r in -self.n / 2..self.n - self.n / 2 {
                    env[*slot] = r;
                    acc += self.run(body, env).0 as u128;
                }
                env[*slot] = saved;
                let s = FpElem((acc % p.p as u128) as u64);
                match scale {
                    Some(c) => p.mul(s, *c),
                    None => s,
                }
            }
        }
    }
}
