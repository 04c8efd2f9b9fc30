//! Expression front-end for series, forms and meromorphic functions.
//!
//! Grammar: integers, decimals, `i`, variables, `+ - * / ^`, parentheses,
//! differentials `dx` for every variable `x`, and `d(...)` for the exterior
//! derivative. `*` between two forms is the wedge product. Division by a
//! monomial times a unit is allowed; everything else stays a fraction and
//! must be requested through [`parse_fraction`].

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::form::{DiffForm, LogForm};
use crate::scalar::Scalar;
use crate::series::{Exps, TruncSeries, EXACT_ORDER};

/// What a piece of text denotes.
#[derive(Clone, Debug, PartialEq)]
pub enum Parsed {
    Series(TruncSeries),
    Form(DiffForm),
    Log(LogForm),
    Fraction(TruncSeries, TruncSeries),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Scalar),
    Ident(String),
    Op(char),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(k + 1).is_some_and(char::is_ascii_digit)) {
            let start = k;
            while k < chars.len() && chars[k].is_ascii_digit() {
                k += 1;
            }
            let mut is_float = false;
            if k < chars.len() && chars[k] == '.' {
                is_float = true;
                k += 1;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
            }
            let s: String = chars[start..k].iter().collect();
            let v = if is_float {
                let f: f64 = s.parse().map_err(|_| Error::Syntax { pos: start, msg: format!("bad number `{s}`") })?;
                Scalar::float(f, 0.0)
            } else {
                let n: BigInt = s.parse().map_err(|_| Error::Syntax { pos: start, msg: format!("bad number `{s}`") })?;
                Scalar::rational(BigRational::from_integer(n))
            };
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            out.push((start, Tok::Ident(chars[start..k].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((k, Tok::Op(c)));
            k += 1;
        } else {
            return Err(Error::Syntax { pos: k, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

/// A quotient `num / den` with `num` a form of any degree.
#[derive(Clone, Debug)]
struct Val {
    num: DiffForm,
    den: TruncSeries,
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    vars: &'a [String],
    len: usize,
}

impl Val {
    fn scalar(vars: &[String], c: Scalar) -> Val {
        Val {
            num: DiffForm::function(TruncSeries::constant(vars, EXACT_ORDER, c)),
            den: TruncSeries::one(vars, EXACT_ORDER),
        }
    }

    fn series(s: TruncSeries) -> Val {
        let vars = s.vars().to_vec();
        Val { num: DiffForm::function(s), den: TruncSeries::one(&vars, EXACT_ORDER) }
    }

    fn degree(&self) -> usize {
        self.num.degree()
    }

    /// Cancels the common monomial factor and a constant denominator.
    fn normalize(mut self) -> Val {
        let dg = self.den.monomial_gcd();
        let ng = self.num.monomial_gcd();
        let g: Exps = dg.iter().zip(&ng).map(|(a, b)| *a.min(b)).collect();
        if !self.num.is_zero() && g.iter().any(|&e| e > 0) {
            self.den = self.den.divide_monomial(&g).expect("gcd divides");
            self.num = self.num.map(|c| c.divide_monomial(&g).expect("gcd divides"));
        }
        if self.num.is_zero() {
            self.den = TruncSeries::one(self.num.vars(), EXACT_ORDER);
        }
        if self.den.len() == 1 && self.den.degree() == Some(0) {
            let c = self.den.constant_term();
            let inv = c.recip().expect("nonzero constant");
            self.num = self.num.scale(&inv);
            self.den = TruncSeries::one(self.num.vars(), EXACT_ORDER);
        }
        self
    }
}

fn mul_form_fn(w: &DiffForm, f: &TruncSeries) -> DiffForm {
    w.mul_fn(f)
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let pos = self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.len);
        Err(Error::Syntax { pos, msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn add(&self, a: Val, b: Val, sub: bool) -> Result<Val> {
        if a.degree() != b.degree() {
            return self.err(format!("cannot add a {}-form and a {}-form", a.degree(), b.degree()));
        }
        let bn = if sub { -&b.num } else { b.num };
        let num = &mul_form_fn(&a.num, &b.den) + &mul_form_fn(&bn, &a.den);
        Ok(Val { num, den: &a.den * &b.den }.normalize())
    }

    fn mul(&self, a: Val, b: Val) -> Result<Val> {
        let num = match (a.degree(), b.degree()) {
            (0, _) => mul_form_fn(&b.num, &a.num.coeffs()[0]),
            (_, 0) => mul_form_fn(&a.num, &b.num.coeffs()[0]),
            _ => a.num.wedge(&b.num).or_else(|e| self.err(e.to_string()))?,
        };
        Ok(Val { num, den: &a.den * &b.den }.normalize())
    }

    fn div(&self, a: Val, b: Val) -> Result<Val> {
        if b.degree() != 0 {
            return self.err("division by a form");
        }
        let bnum = b.num.coeffs()[0].clone();
        if bnum.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Val { num: mul_form_fn(&a.num, &b.den), den: &a.den * &bnum }.normalize())
    }

    fn pow(&self, a: Val, e: i64) -> Result<Val> {
        if a.degree() != 0 {
            return self.err("power of a form");
        }
        let s = a.num.coeffs()[0].clone();
        let k = e.unsigned_abs() as u32;
        let (n, d) = (s.pow(k), a.den.pow(k));
        let v = if e >= 0 {
            Val { num: DiffForm::function(n), den: d }
        } else {
            if n.is_zero() {
                return Err(Error::DivisionByZero);
            }
            Val { num: DiffForm::function(d), den: n }
        };
        Ok(v.normalize())
    }

    fn exterior(&self, a: Val) -> Result<Val> {
        // d(w/g) = (g dw - dg ^ w) / g^2
        let dw = a.num.d().or_else(|e| self.err(e.to_string()))?;
        let dg = DiffForm::function(a.den.clone()).d().or_else(|e| self.err(e.to_string()))?;
        let num = &mul_form_fn(&dw, &a.den) - &dg.wedge(&a.num).or_else(|e| self.err(e.to_string()))?;
        Ok(Val { num, den: &a.den * &a.den }.normalize())
    }

    fn expr(&mut self) -> Result<Val> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                let rhs = self.term()?;
                acc = self.add(acc, rhs, false)?;
            } else if self.eat('-') {
                let rhs = self.term()?;
                acc = self.add(acc, rhs, true)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Val> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                let rhs = self.unary()?;
                acc = self.mul(acc, rhs)?;
            } else if self.eat('/') {
                let rhs = self.unary()?;
                acc = self.div(acc, rhs)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Val> {
        if self.eat('-') {
            let v = self.unary()?;
            return Ok(Val { num: -&v.num, den: v.den });
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Val> {
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.exponent()?;
            return self.pow(base, e);
        }
        Ok(base)
    }

    /// Integer exponent, optionally signed or parenthesized.
    fn exponent(&mut self) -> Result<i64> {
        let paren = self.eat('(');
        let neg = self.eat('-');
        let v = match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                self.pos += 1;
                s
            }
            _ => return self.err("expected an integer exponent"),
        };
        if (paren && self.peek() == Some(&Tok::Op('/'))) || !v.is_exact() {
            return self.err("fractional exponent outside Puiseux context");
        }
        let n = v.as_i64().ok_or_else(|| Error::Syntax { pos: 0, msg: "exponent too large".into() })?;
        if paren {
            self.expect(')')?;
        }
        // right associativity: a^b^c
        let n = if neg { -n } else { n };
        if self.eat('^') {
            let m = self.exponent()?;
            if m < 0 || m > 16 {
                return self.err("exponent too large");
            }
            return Ok(n.pow(m as u32));
        }
        Ok(n)
    }

    fn atom(&mut self) -> Result<Val> {
        let Some((_, tok)) = self.toks.get(self.pos).cloned() else {
            return self.err("unexpected end of input");
        };
        match tok {
            Tok::Num(s) => {
                self.pos += 1;
                Ok(Val::scalar(self.vars, s))
            }
            Tok::Op('(') => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Val::series(TruncSeries::var(self.vars, EXACT_ORDER, i)));
                }
                if name == "i" {
                    return Ok(Val::scalar(self.vars, Scalar::i()));
                }
                if name == "d" && self.peek() == Some(&Tok::Op('(')) {
                    self.pos += 1;
                    let v = self.expr()?;
                    self.expect(')')?;
                    return self.exterior(v);
                }
                if let Some(rest) = name.strip_prefix('d') {
                    if let Some(i) = self.vars.iter().position(|v| v == rest) {
                        return Ok(Val {
                            num: DiffForm::dvar(self.vars, i, EXACT_ORDER),
                            den: TruncSeries::one(self.vars, EXACT_ORDER),
                        });
                    }
                }
                self.pos -= 1;
                Err(Error::UnknownVariable(name))
            }
            Tok::Op(c) => self.err(format!("unexpected `{c}`")),
        }
    }
}

fn finish_series(s: TruncSeries, order: u32) -> TruncSeries {
    if s.degree().unwrap_or(0) > order {
        s.truncate(order)
    } else {
        s
    }
}

/// Splits `den = m * u` into a monomial and a unit, if possible.
fn monomial_unit(den: &TruncSeries) -> Option<(Exps, TruncSeries)> {
    let m = den.monomial_gcd();
    let u = den.divide_monomial(&m)?;
    if u.constant_term().is_zero() {
        None
    } else {
        Some((m, u))
    }
}

fn parse_val(text: &str, vars: &[String]) -> Result<Val> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, vars, len: text.len() };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(v)
}

/// Parses `text` over the ordered variables `vars`, truncating at `order`.
pub fn parse_expression(text: &str, vars: &[String], order: u32) -> Result<Parsed> {
    let v = parse_val(text, vars)?;
    let Some((m, u)) = monomial_unit(&v.den) else {
        if v.degree() == 0 {
            return Ok(Parsed::Fraction(v.num.coeffs()[0].clone(), v.den));
        }
        return Err(Error::Syntax { pos: 0, msg: "form divided by a non-unit".into() });
    };
    let uinv = if u.len() == 1 && u.degree() == Some(0) {
        TruncSeries::constant(vars, EXACT_ORDER, u.constant_term().recip()?)
    } else {
        u.inverse(order)?
    };
    let num = v.num.mul_fn(&uinv).map(|c| finish_series(c.clone(), order));
    if m.iter().all(|&e| e == 0) {
        return Ok(match num.degree() {
            0 => Parsed::Series(num.coeffs()[0].clone()),
            _ => Parsed::Form(num),
        });
    }
    if num.degree() == 0 {
        let den = TruncSeries::monomial(vars, EXACT_ORDER, m, Scalar::one());
        return Ok(Parsed::Fraction(num.coeffs()[0].clone(), den));
    }
    if num.degree() == 1 && m.iter().all(|&e| e <= 1) {
        return Ok(Parsed::Log(LogForm::from_holomorphic(&num, m.iter().map(|&e| e == 1).collect())?));
    }
    Err(Error::Syntax { pos: 0, msg: "form with a non-logarithmic pole".into() })
}

pub fn parse_series(text: &str, vars: &[String], order: u32) -> Result<TruncSeries> {
    match parse_expression(text, vars, order)? {
        Parsed::Series(s) => Ok(s),
        other => Err(Error::Syntax { pos: 0, msg: format!("expected a series, found {}", kind(&other)) }),
    }
}

pub fn parse_form(text: &str, vars: &[String], order: u32) -> Result<DiffForm> {
    match parse_expression(text, vars, order)? {
        Parsed::Form(w) => Ok(w),
        Parsed::Log(l) => Ok(l.to_holomorphic()),
        other => Err(Error::Syntax { pos: 0, msg: format!("expected a form, found {}", kind(&other)) }),
    }
}

pub fn parse_log_form(text: &str, vars: &[String], order: u32) -> Result<LogForm> {
    match parse_expression(text, vars, order)? {
        Parsed::Log(l) => Ok(l),
        Parsed::Form(w) if w.degree() == 1 => LogForm::from_holomorphic(&w, vec![false; vars.len()]),
        other => Err(Error::Syntax { pos: 0, msg: format!("expected a 1-form, found {}", kind(&other)) }),
    }
}

/// Parses a function as numerator and denominator without expanding the quotient.
pub fn parse_fraction(text: &str, vars: &[String]) -> Result<(TruncSeries, TruncSeries)> {
    let v = parse_val(text, vars)?;
    if v.degree() != 0 {
        return Err(Error::Syntax { pos: 0, msg: "expected a function".into() });
    }
    Ok((v.num.coeffs()[0].clone(), v.den))
}

/// Parses a constant.
pub fn parse_scalar(text: &str) -> Result<Scalar> {
    let s = parse_series(text, &[], EXACT_ORDER)?;
    Ok(s.constant_term())
}

fn kind(p: &Parsed) -> &'static str {
    match p {
        Parsed::Series(_) => "a series",
        Parsed::Form(_) => "a form",
        Parsed::Log(_) => "a logarithmic form",
        Parsed::Fraction(..) => "a fraction",
    }
}

/// Float value of a rational literal, used by configuration front-ends.
pub fn scalar_to_f64(s: &Scalar) -> Option<f64> {
    let c = s.to_c64();
    (c.im == 0.0).then_some(c.re)
}
