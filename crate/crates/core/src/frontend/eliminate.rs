use super::{Expr, ExprKind, Quant};
use crate::arith::{Params, Tag};
use crate::coeffring::GaussCoeff;
use crate::error::{Error, Result};
use crate::gauss::sum::{sum_out, Norm, QPoly, SumCtx, Term};
use crate::gauss::Mode;
use num_traits::Zero;
use std::fmt;

/// Quantifier-free result: a sum of guarded Gaussian terms on one domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub tag: Tag,
    pub terms: Vec<Term>,
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{}]", t.coeff)?;
            if !t.phase.is_zero() {
                write!(f, " * e(({})/2N @{})", t.phase, self.tag)?;
            }
            for g in &t.guards {
                write!(f, " {g}")?;
            }
        }
        Ok(())
    }
}

struct Ctx<'a> {
    params: &'a Params,
    tag: Tag,
    mode: Mode,
}

fn coeff_term(c: GaussCoeff) -> Vec<Term> {
    if c.is_zero() {
        Vec::new()
    } else {
        vec![Term::new(c, QPoly::zero())]
    }
}

fn normalize(e: &Expr, ctx: &Ctx) -> Result<Vec<Term>> {
    Ok(match &e.kind {
        ExprKind::Num(q) => coeff_term(GaussCoeff::rational(q.clone())),
        ExprKind::JPow(k) => coeff_term(GaussCoeff::j_pow(*k)),
        ExprKind::E8Pow(k) => coeff_term(GaussCoeff::e8_pow(*k)),
        ExprKind::Sqrt(q) => coeff_term(GaussCoeff::sqrt(q)?),
        ExprKind::Phase { poly, .. } => vec![Term::new(GaussCoeff::one(), poly.clone())],
        ExprKind::Add(a, b) => {
            let mut v = normalize(a, ctx)?;
            v.extend(normalize(b, ctx)?);
            v
        }
        ExprKind::Mul(a, b) => {
            let (l, r) = (normalize(a, ctx)?, normalize(b, ctx)?);
            let mut out = Vec::with_capacity(l.len() * r.len());
            for x in &l {
                for y in &r {
                    if let Some(t) = x.mul(y)? {
                        if t.phase.degree() > 2 {
                            return Err(Error::NonQuadratic(t.phase.to_string()));
                        }
                        out.push(t);
                    }
                }
            }
            out
        }
        ExprKind::Quant { q, var, body } => {
            let sctx = SumCtx::new(ctx.params, ctx.tag, ctx.mode, Norm::Literal);
            let scale = match q {
                Quant::Sum => GaussCoeff::one(),
                Quant::Int => GaussCoeff::inv_sqrt_n(ctx.params, ctx.tag),
            };
            let mut out = Vec::new();
            for t in normalize(body, ctx)? {
                if ctx.mode == Mode::Strict && t.phase.split(var)?.0.is_zero() {
                    return Err(Error::ZeroQuadratic(format!("no {var}^2 term in {}", t.phase)));
                }
                if let Some(s) = sum_out(&t, var, &sctx)? {
                    out.push(s.scale(&scale)?.fold_constant(ctx.params, ctx.tag)?);
                }
            }
            out
        }
    })
}

/// Eliminates every quantifier, innermost first, by closed-form Gauss summation.
pub fn eliminate(e: &Expr, params: &Params, mode: Mode) -> Result<NormalForm> {
    let tag = e.tag()?;
    let ctx = Ctx { params, tag, mode };
    let terms = normalize(e, &ctx)?
        .into_iter()
        .map(|t| t.fold_constant(params, tag))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormalForm { tag, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::frontend::{eval, eval_normal_form, parse, Value};
    use crate::gauss::sum::Assignment;
    use crate::gauss::Backend;
    use std::sync::OnceLock;

    fn params() -> &'static Params {
        static P: OnceLock<Params> = OnceLock::new();
        P.get_or_init(Params::default_tower)
    }

    fn check(src: &str, assigns: &[Assignment]) -> NormalForm {
        let p = params();
        let e = parse(src).unwrap();
        let nf = eliminate(&e, p, Mode::Extended).unwrap();
        assert_eq!(nf.to_string().contains("sum"), false);
        for a in assigns {
            assert_eq!(eval(&e, p, a, Backend::Fp).unwrap(), eval_normal_form(&nf, p, a, Backend::Fp).unwrap(), "{src} at {a:?}");
        }
        nf
    }

    #[test]
    fn basic_form() {
        let nf = check("sum x . e((-x^2)/2N @V)", &[Assignment::new()]);
        assert_eq!(nf.terms.len(), 1);
        assert!(nf.terms[0].guards.is_empty());
        // sqrt(N) e(-1/8) = 12 e8^7
        let c = &nf.terms[0].coeff;
        assert_eq!(c.c, rat(12, 1));
        assert_eq!(c.b, 7);
    }

    #[test]
    fn nested_rank_two() {
        let assigns: Vec<Assignment> =
            [(0, 0), (3, -5), (71, -72)].iter().map(|&(x, y)| [("x".into(), x), ("y".into(), y)].into()).collect();
        check("sum a . sum b . e((-a^2 - 2*b^2 + 2*a*b + 2*a*x)/2N @V)", &assigns[..1]);
        check("sum a . sum b . e((-a^2 - 2*b^2 + 2*a*b + 2*a*x + 4*b*y)/2N @V)", &assigns);
        check("int a . e((-4*a^2 + 2*a*x)/2N @V) * (1 + e((2*a*y)/2N @V))", &assigns);
    }

    #[test]
    fn counting_measure() {
        let nf = check("sum z . 3", &[Assignment::new()]);
        assert_eq!(nf.terms[0].coeff, GaussCoeff::int(3 * 144));
        let e = parse("sum z . 3").unwrap();
        assert!(matches!(eliminate(&e, params(), Mode::Strict), Err(Error::ZeroQuadratic(_))));
        let assigns: Vec<Assignment> = (-3..3).map(|x| [("x".into(), x)].into()).collect();
        let nf = check("sum z . e((2*z*x)/2N @V)", &assigns);
        assert_eq!(nf.terms[0].guards[0].to_string(), "if 144 | (x)");
    }

    #[test]
    fn complex_backend_agrees() {
        let p = params();
        let e = parse("int a . e((-a^2)/2N @V)").unwrap();
        let nf = eliminate(&e, p, Mode::Extended).unwrap();
        let a = Assignment::new();
        let (Value::Complex(x), Value::Complex(y)) =
            (eval(&e, p, &a, Backend::Complex).unwrap(), eval_normal_form(&nf, p, &a, Backend::Complex).unwrap())
        else {
            panic!()
        };
        assert!((x - y).norm() < 1e-9, "{x} {y}");
        assert!((y.norm() - 1.0).abs() < 1e-12);
    }
}
