//! Random well-formed expressions for testing the eliminator.

use super::{eliminate, eval_normal_form_fp, Compiled, Expr, ExprKind, Quant};
use crate::arith::{rat, Params, Tag};
use crate::error::{Error, Result};
use crate::gauss::sum::{Assignment, FpEval, QPoly};
use crate::gauss::Mode;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct RandomConfig {
    pub max_quantifiers: usize,
    pub free_vars: Vec<String>,
    pub tag: Tag,
    pub max_depth: usize,
    /// Radicands for sqrt atoms; each must have a square root in F_p.
    pub radicands: Vec<i64>,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig { max_quantifiers: 3, free_vars: vec!["x".into(), "y".into()], tag: Tag::V, max_depth: 5, radicands: vec![2, 3, 6] }
    }
}

struct Gen<'a, R: Rng> {
    rng: &'a mut R,
    cfg: &'a RandomConfig,
    quants_left: usize,
    next_var: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn poly(&mut self, scope: &[String]) -> QPoly {
        let mut p = QPoly::zero();
        for (i, v) in scope.iter().enumerate() {
            let sq: i64 = *[-2, -1, -1, 0, 0, 1, 2].choose(self.rng).expect("nonempty");
            p = p.add(&QPoly::monomial(rat(sq, 1), &[v, v]));
            let lin: i64 = *[-4, -2, 0, 0, 2, 4].choose(self.rng).expect("nonempty");
            p = p.add(&QPoly::monomial(rat(lin, 1), &[v]));
            for w in &scope[i + 1..] {
                let cross: i64 = *[-2, 0, 0, 2].choose(self.rng).expect("nonempty");
                p = p.add(&QPoly::monomial(rat(cross, 1), &[v, w]));
            }
        }
        p.add(&QPoly::int(self.rng.gen_range(-3..=3)))
    }

    fn atom(&mut self, scope: &[String]) -> Expr {
        if self.rng.gen_bool(0.65) {
            return Expr::phase(self.poly(scope), self.cfg.tag);
        }
        Expr::new(match self.rng.gen_range(0..4) {
            0 => ExprKind::Num(rat(self.rng.gen_range(-5..=5), self.rng.gen_range(1..=4))),
            1 => ExprKind::JPow(self.rng.gen_range(-2..=2)),
            2 => ExprKind::E8Pow(self.rng.gen_range(0..8)),
            _ => ExprKind::Sqrt(rat(*self.cfg.radicands.choose(self.rng).expect("nonempty"), *[1, 2].choose(self.rng).expect("nonempty"))),
        })
    }

    fn expr(&mut self, scope: &mut Vec<String>, depth: usize) -> Expr {
        if depth == 0 {
            return self.atom(scope);
        }
        let roll = self.rng.gen_range(0..100);
        if roll < 35 && self.quants_left > 0 {
            self.quants_left -= 1;
            let var = format!("b{}", self.next_var);
            self.next_var += 1;
            let q = if self.rng.gen_bool(0.5) { Quant::Sum } else { Quant::Int };
            scope.push(var.clone());
            // bodies mention the bound variable through a leading phase
            let lead = Expr::phase(self.poly(scope), self.cfg.tag);
            let rest = self.expr(scope, depth - 1);
            scope.pop();
            Expr::quant(q, &var, Expr::mul(lead, rest))
        } else if roll < 65 {
            Expr::mul(self.expr(scope, depth - 1), self.expr(scope, depth - 1))
        } else if roll < 80 {
            Expr::add(self.expr(scope, depth - 1), self.expr(scope, depth - 1))
        } else {
            self.atom(scope)
        }
    }
}

/// A random expression with at most `max_quantifiers` quantifiers; bound variables are b0, b1, ...
pub fn random_expr<R: Rng>(rng: &mut R, cfg: &RandomConfig) -> Expr {
    let mut g = Gen { rng, cfg, quants_left: cfg.max_quantifiers, next_var: 0 };
    let mut scope = cfg.free_vars.clone();
    g.expr(&mut scope, cfg.max_depth)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct QeReport {
    pub accepted: usize,
    /// Expressions whose sums fall outside the closed-form range (Unsupported / NonPeriodic).
    pub rejected: usize,
    pub assignments_checked: usize,
    pub quantifier_free: bool,
    pub mismatches: Vec<String>,
}

impl QeReport {
    pub fn passed(&self) -> bool {
        self.quantifier_free && self.mismatches.is_empty()
    }
}

/// Draws random expressions until `count` are eliminated, then compares literal and
/// normal-form evaluation in F_p under `assignments` random assignments each.
pub fn qe_soundness<R: Rng>(
    rng: &mut R,
    params: &Params,
    cfg: &RandomConfig,
    count: usize,
    assignments: usize,
) -> Result<QeReport> {
    let ev = FpEval::new(params);
    let n = params.n_of(cfg.tag) as i64;
    let mut rep = QeReport { quantifier_free: true, ..QeReport::default() };
    while rep.accepted < count {
        let e = random_expr(rng, cfg);
        let nf = match eliminate(&e, params, Mode::Extended) {
            Ok(nf) => nf,
            Err(Error::Unsupported(_) | Error::NonPeriodic(_)) => {
                rep.rejected += 1;
                continue;
            }
            Err(err) => return Err(err),
        };
        rep.accepted += 1;
        // NormalForm holds no quantifiers by construction; check the printed form as well.
        let text = nf.to_string();
        if text.contains("sum ") || text.contains("int ") {
            rep.quantifier_free = false;
        }
        let compiled = Compiled::new(&e, params)?;
        for _ in 0..assignments {
            let a: Assignment = cfg.free_vars.iter().map(|v| (v.clone(), rng.gen_range(-n / 2..n / 2))).collect();
            rep.assignments_checked += 1;
            let lhs = compiled.eval(&a)?;
            let rhs = eval_normal_form_fp(&ev, &nf, &a)?;
            if lhs != rhs {
                rep.mismatches.push(format!("{e} at {a:?}: {lhs} != {rhs}"));
            }
        }
    }
    Ok(rep)
}
