//! Expression language over Gaussian predicates: parsing, canonical printing, quantifier
//! elimination through Gauss summation, and literal evaluation.

mod eliminate;
mod eval;
mod lexer;
mod parser;
pub mod random;

pub use eliminate::{eliminate, NormalForm};
pub use eval::{eval, eval_normal_form, eval_normal_form_fp, Compiled, Value};
pub use lexer::Span;
pub use parser::{parse, parse_normal_form};

use crate::arith::{Rational, Tag};
use crate::error::{Error, Result};
use crate::gauss::sum::QPoly;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quant {
    /// Plain sum over [-N/2, N/2).
    Sum,
    /// (1/sqrt N) times the sum.
    Int,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Num(Rational),
    JPow(i64),
    E8Pow(i64),
    Sqrt(Rational),
    /// e(poly / 2N) on the given domain.
    Phase { poly: QPoly, tag: Tag },
    Mul(Box<Expr>, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Quant { q: Quant, var: String, body: Box<Expr> },
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

/// Structural equality; source positions are ignored.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr { kind, span: Span::default() }
    }

    pub fn num(q: Rational) -> Self {
        Self::new(ExprKind::Num(q))
    }

    pub fn phase(poly: QPoly, tag: Tag) -> Self {
        Self::new(ExprKind::Phase { poly, tag })
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        Self::new(ExprKind::Mul(Box::new(a), Box::new(b)))
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Self::new(ExprKind::Add(Box::new(a), Box::new(b)))
    }

    pub fn quant(q: Quant, var: &str, body: Expr) -> Self {
        Self::new(ExprKind::Quant { q, var: var.to_string(), body: Box::new(body) })
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match &self.kind {
            ExprKind::Phase { poly, .. } => poly.vars(),
            ExprKind::Mul(a, b) | ExprKind::Add(a, b) => {
                let mut v = a.free_vars();
                v.extend(b.free_vars());
                v
            }
            ExprKind::Quant { var, body, .. } => {
                let mut v = body.free_vars();
                v.remove(var);
                v
            }
            _ => BTreeSet::new(),
        }
    }

    pub fn quantifier_count(&self) -> usize {
        match &self.kind {
            ExprKind::Mul(a, b) | ExprKind::Add(a, b) => a.quantifier_count() + b.quantifier_count(),
            ExprKind::Quant { body, .. } => 1 + body.quantifier_count(),
            _ => 0,
        }
    }

    fn collect_tags(&self, out: &mut BTreeSet<Tag>) {
        match &self.kind {
            ExprKind::Phase { tag, .. } => {
                out.insert(*tag);
            }
            ExprKind::Mul(a, b) | ExprKind::Add(a, b) => {
                a.collect_tags(out);
                b.collect_tags(out);
            }
            ExprKind::Quant { body, .. } => body.collect_tags(out),
            _ => {}
        }
    }

    /// The domain of every phase in the expression (V when there are none). Quantifiers range
    /// over this domain.
    pub fn tag(&self) -> Result<Tag> {
        let mut tags = BTreeSet::new();
        self.collect_tags(&mut tags);
        match tags.len() {
            0 => Ok(Tag::V),
            1 => Ok(*tags.iter().next().expect("one tag")),
            _ => Err(Error::DomainMismatch("expression mixes U and V phases".into())),
        }
    }
}

fn fmt_pow(f: &mut fmt::Formatter<'_>, base: &str, k: i64) -> fmt::Result {
    if k == 1 {
        write!(f, "{base}")
    } else {
        write!(f, "{base}^{k}")
    }
}

fn needs_parens_left(parent_mul: bool, e: &Expr) -> bool {
    match e.kind {
        ExprKind::Quant { .. } => true,
        ExprKind::Add(..) => parent_mul,
        _ => false,
    }
}

fn needs_parens_right(parent_mul: bool, e: &Expr) -> bool {
    match e.kind {
        ExprKind::Quant { .. } | ExprKind::Add(..) => true,
        ExprKind::Mul(..) => parent_mul,
        _ => false,
    }
}

fn fmt_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    /// Canonical text: left-associative operators, minimal parentheses.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(q) => write!(f, "{q}"),
            ExprKind::JPow(k) => fmt_pow(f, "j", *k),
            ExprKind::E8Pow(k) => fmt_pow(f, "e8", *k),
            ExprKind::Sqrt(q) => write!(f, "sqrt({q})"),
            ExprKind::Phase { poly, tag } => write!(f, "e(({poly})/2N @{tag})"),
            ExprKind::Mul(a, b) | ExprKind::Add(a, b) => {
                let mul = matches!(self.kind, ExprKind::Mul(..));
                fmt_child(f, a, needs_parens_left(mul, a))?;
                write!(f, " {} ", if mul { "*" } else { "+" })?;
                fmt_child(f, b, needs_parens_right(mul, b))
            }
            ExprKind::Quant { q, var, body } => {
                let kw = match q {
                    Quant::Sum => "sum",
                    Quant::Int => "int",
                };
                write!(f, "{kw} {var} . {body}")
            }
        }
    }
}
