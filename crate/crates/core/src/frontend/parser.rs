use super::eliminate::NormalForm;
use super::lexer::{lex, Span, Tok, Token};
use super::{Expr, ExprKind, Quant};
use crate::arith::{Rational, Tag};
use crate::coeffring::GaussCoeff;
use crate::error::{Error, Result};
use crate::gauss::sum::{QPoly, Term};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

const RESERVED: [&str; 10] = ["e", "j", "e8", "sqrt", "sum", "int", "if", "N", "U", "V"];
const MAX_DEPTH: usize = 200;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
    bound: Vec<String>,
    /// Normal-form text allows rational polynomial coefficients.
    rational_polys: bool,
}

fn syntax(span: Span, msg: impl Into<String>) -> Error {
    Error::Syntax { line: span.line, col: span.col, msg: msg.into() }
}

impl Parser {
    fn new(src: &str, rational_polys: bool) -> Result<Self> {
        Ok(Parser { toks: lex(src)?, pos: 0, depth: 0, bound: Vec::new(), rational_polys })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.span(), format!("expected {what}, found {:?}", self.peek())))
        }
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == name)
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(syntax(self.span(), "nesting too deep"));
        }
        Ok(())
    }

    fn int(&mut self) -> Result<BigInt> {
        match self.bump() {
            Token { tok: Tok::Int(n), .. } => Ok(n),
            t => Err(syntax(t.span, format!("expected integer, found {:?}", t.tok))),
        }
    }

    fn signed_int(&mut self) -> Result<BigInt> {
        if *self.peek() == Tok::Minus {
            self.bump();
            Ok(-self.int()?)
        } else {
            self.int()
        }
    }

    fn small_int(&mut self) -> Result<i64> {
        let span = self.span();
        self.signed_int()?.to_i64().ok_or_else(|| syntax(span, "exponent out of range"))
    }

    /// Int ('/' Int)?, with an optional leading minus.
    fn rational(&mut self) -> Result<Rational> {
        let num = self.signed_int()?;
        if *self.peek() == Tok::Slash && matches!(self.peek_at(1), Tok::Int(_)) {
            self.bump();
            let span = self.span();
            let den = self.int()?;
            if den.is_zero() {
                return Err(syntax(span, "zero denominator"));
            }
            return Ok(Rational::new(num, den));
        }
        Ok(Rational::from_integer(num))
    }

    fn ident(&mut self) -> Result<(String, Span)> {
        match self.bump() {
            Token { tok: Tok::Ident(s), span } => {
                if RESERVED.contains(&s.as_str()) {
                    return Err(syntax(span, format!("{s} is reserved")));
                }
                Ok((s, span))
            }
            t => Err(syntax(t.span, format!("expected identifier, found {:?}", t.tok))),
        }
    }

    fn tag(&mut self) -> Result<Tag> {
        match self.bump() {
            Token { tok: Tok::Ident(s), .. } if s == "U" => Ok(Tag::U),
            Token { tok: Tok::Ident(s), .. } if s == "V" => Ok(Tag::V),
            t => Err(syntax(t.span, "expected domain U or V")),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        self.enter()?;
        let mut left = self.product()?;
        while *self.peek() == Tok::Plus {
            let span = self.bump().span;
            let right = self.product()?;
            left = Expr { kind: ExprKind::Add(Box::new(left), Box::new(right)), span };
        }
        self.depth -= 1;
        Ok(left)
    }

    fn product(&mut self) -> Result<Expr> {
        let mut left = self.term()?;
        while *self.peek() == Tok::Star {
            let span = self.bump().span;
            let right = self.term()?;
            left = Expr { kind: ExprKind::Mul(Box::new(left), Box::new(right)), span };
        }
        Ok(left)
    }

    fn pow_suffix(&mut self) -> Result<i64> {
        if *self.peek() == Tok::Caret {
            self.bump();
            self.small_int()
        } else {
            Ok(1)
        }
    }

    fn term(&mut self) -> Result<Expr> {
        self.enter()?;
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(_) | Tok::Minus => ExprKind::Num(self.rational()?),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                self.depth -= 1;
                return Ok(e);
            }
            Tok::Ident(name) => match name.as_str() {
                "j" => {
                    self.bump();
                    ExprKind::JPow(self.pow_suffix()?)
                }
                "e8" => {
                    self.bump();
                    ExprKind::E8Pow(self.pow_suffix()?)
                }
                "sqrt" => {
                    self.bump();
                    self.expect(Tok::LParen, "'('")?;
                    let inner = self.span();
                    let q = self.rational()?;
                    if !q.is_positive() {
                        return Err(syntax(inner, "sqrt needs a positive rational"));
                    }
                    self.expect(Tok::RParen, "')'")?;
                    ExprKind::Sqrt(q)
                }
                "e" => {
                    self.bump();
                    self.expect(Tok::LParen, "'('")?;
                    let (poly, tag) = self.phase_body(span)?;
                    ExprKind::Phase { poly, tag }
                }
                "sum" | "int" => {
                    self.bump();
                    let q = if name == "sum" { Quant::Sum } else { Quant::Int };
                    let (var, vspan) = self.ident()?;
                    if self.bound.contains(&var) {
                        return Err(syntax(vspan, format!("{var} is already bound")));
                    }
                    self.expect(Tok::Dot, "'.'")?;
                    self.bound.push(var.clone());
                    let body = self.expr()?;
                    self.bound.pop();
                    ExprKind::Quant { q, var, body: Box::new(body) }
                }
                _ => return Err(syntax(span, format!("variable {name} may only appear inside a phase"))),
            },
            other => return Err(syntax(span, format!("unexpected {other:?}"))),
        };
        self.depth -= 1;
        Ok(Expr { kind, span })
    }

    /// After `e(`: poly '/' '2N' '@' tag ')'.
    fn phase_body(&mut self, start: Span) -> Result<(QPoly, Tag)> {
        let poly = self.poly(start)?;
        self.expect(Tok::Slash, "'/2N'")?;
        self.expect(Tok::TwoN, "'2N'")?;
        self.expect(Tok::At, "'@'")?;
        let tag = self.tag()?;
        self.expect(Tok::RParen, "')'")?;
        if !self.rational_polys && !poly.has_integer_coeffs() {
            return Err(syntax(start, "phase polynomials need integer coefficients"));
        }
        Ok((poly, tag))
    }

    fn check_degree(&self, p: &QPoly, start: Span) -> Result<()> {
        if p.degree() > 2 {
            return Err(Error::Degree { line: start.line, col: start.col, degree: p.degree() });
        }
        Ok(())
    }

    fn poly(&mut self, start: Span) -> Result<QPoly> {
        self.enter()?;
        let mut acc = self.poly_product(start)?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.poly_product(start)?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.poly_product(start)?);
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn poly_product(&mut self, start: Span) -> Result<QPoly> {
        let mut acc = self.poly_unary(start)?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = acc.mul(&self.poly_unary(start)?);
            self.check_degree(&acc, start)?;
        }
        Ok(acc)
    }

    fn poly_unary(&mut self, start: Span) -> Result<QPoly> {
        if *self.peek() == Tok::Minus {
            self.enter()?;
            self.bump();
            let p = self.poly_unary(start)?.neg();
            self.depth -= 1;
            return Ok(p);
        }
        let base = self.poly_atom(start)?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let span = self.span();
        let k = self.int()?.to_u32().ok_or_else(|| syntax(span, "exponent out of range"))?;
        if base.degree() > 0 && base.degree() * k as usize > 2 {
            return Err(Error::Degree { line: start.line, col: start.col, degree: base.degree() * k as usize });
        }
        if k > 64 {
            return Err(syntax(span, "exponent out of range"));
        }
        Ok((0..k).fold(QPoly::int(1), |acc, _| acc.mul(&base)))
    }

    fn poly_atom(&mut self, start: Span) -> Result<QPoly> {
        match self.peek().clone() {
            Tok::Int(_) => {
                if self.rational_polys {
                    Ok(QPoly::constant(self.rational()?))
                } else {
                    Ok(QPoly::constant(Rational::from_integer(self.int()?)))
                }
            }
            Tok::Ident(_) => Ok(QPoly::var(&self.ident()?.0)),
            Tok::LParen => {
                self.bump();
                let p = self.poly(start)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(p)
            }
            other => Err(syntax(self.span(), format!("unexpected {other:?} in polynomial"))),
        }
    }

    // Normal-form text: '0' | nf_term ('+' nf_term)*.
    fn normal_form(&mut self, tag: Tag) -> Result<NormalForm> {
        let mut terms = Vec::new();
        if matches!(self.peek(), Tok::Int(n) if n.is_zero()) && *self.peek_at(1) == Tok::Eof {
            self.bump();
            return Ok(NormalForm { tag, terms });
        }
        loop {
            if let Some(t) = self.nf_term(tag)? {
                terms.push(t);
            }
            if *self.peek() != Tok::Plus {
                break;
            }
            self.bump();
        }
        self.expect(Tok::Eof, "end of input")?;
        Ok(NormalForm { tag, terms })
    }

    fn nf_term(&mut self, tag: Tag) -> Result<Option<Term>> {
        self.expect(Tok::LBracket, "'['")?;
        let coeff = self.coeff(tag)?;
        self.expect(Tok::RBracket, "']'")?;
        let mut term = Term::new(coeff, QPoly::zero());
        if *self.peek() == Tok::Star {
            self.bump();
            let span = self.span();
            if !self.is_ident("e") {
                return Err(syntax(span, "expected a phase e(.../2N @T)"));
            }
            self.bump();
            self.expect(Tok::LParen, "'('")?;
            let (poly, t) = self.phase_body(span)?;
            if t != tag {
                return Err(Error::DomainMismatch(format!("phase on {t} in a {tag} normal form")));
            }
            term.phase = poly;
        }
        let mut out = Some(term);
        while self.is_ident("if") {
            let span = self.bump().span;
            let k = self.int()?.to_i64().filter(|k| *k > 0).ok_or_else(|| syntax(span, "bad guard modulus"))?;
            self.expect(Tok::Pipe, "'|'")?;
            self.expect(Tok::LParen, "'('")?;
            let lin = self.poly(span)?;
            self.expect(Tok::RParen, "')'")?;
            if lin.degree() > 1 {
                return Err(syntax(span, "guards must be linear"));
            }
            out = match out {
                Some(t) => t.with_guard(k, &lin)?,
                None => None,
            };
        }
        Ok(out)
    }

    /// Coefficient factors as printed by `GaussCoeff`'s Display.
    fn coeff(&mut self, tag: Tag) -> Result<GaussCoeff> {
        let mut acc = GaussCoeff::one();
        loop {
            let span = self.span();
            let f = match self.peek().clone() {
                Tok::Int(_) | Tok::Minus => GaussCoeff::rational(self.rational()?),
                Tok::Ident(name) => {
                    self.bump();
                    match name.as_str() {
                        "j" => GaussCoeff::j_pow(self.pow_suffix()?),
                        "e8" => GaussCoeff::e8_pow(self.pow_suffix()?),
                        "sqrt" => {
                            self.expect(Tok::LParen, "'('")?;
                            let q = self.rational()?;
                            self.expect(Tok::RParen, "')'")?;
                            GaussCoeff::sqrt(&q)?
                        }
                        "e" => {
                            self.expect(Tok::LParen, "'('")?;
                            let q = self.rational()?;
                            let c = if *self.peek() == Tok::At {
                                self.bump();
                                let t = self.tag()?;
                                if t != tag {
                                    return Err(Error::DomainMismatch(format!("phase on {t} in a {tag} normal form")));
                                }
                                GaussCoeff::phase(q, t)
                            } else if q.is_zero() {
                                GaussCoeff::one()
                            } else {
                                return Err(syntax(span, "coefficient phase needs a domain"));
                            };
                            self.expect(Tok::RParen, "')'")?;
                            c
                        }
                        _ => return Err(syntax(span, format!("unexpected {name} in coefficient"))),
                    }
                }
                other => return Err(syntax(span, format!("unexpected {other:?} in coefficient"))),
            };
            acc = acc.mul(&f)?;
            if *self.peek() != Tok::Star {
                return Ok(acc);
            }
            self.bump();
        }
    }
}

/// Parses an expression of the language.
pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser::new(text, false)?;
    let e = p.expr()?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(e)
}

/// Parses the printed form of a `NormalForm` on the given domain.
pub fn parse_normal_form(text: &str, tag: Tag) -> Result<NormalForm> {
    Parser::new(text, true)?.normal_form(tag)
}
