//! Polynomial vector fields `f: R^n -> R^n`.
//!
//! A [`PolyField`] is built either programmatically from [`Polynomial`]s or
//! by [`parse_system`] from the system-config text format:
//!
//! ```text
//! # comment
//! param a=40
//! dx/dt = a*(y - x)
//! dy/dt = x*(28 - z) - y
//! dz/dt = x*y - 2.6666666666666665*z
//! ```
//!
//! Parameters are substituted while parsing, so a field is immutable and
//! purely numeric afterwards. Polynomials are always kept canonical: terms
//! sorted by exponent tuple, like terms merged and zero terms dropped.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

use crate::math::powu;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("state has length {found}, field dimension is {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state contains a non-finite entry")]
    NonFinite,
}

/// A single term `coefficient * Π x_i^exponents[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(coefficient: f64, exponents: Vec<u32>) -> Self {
        Self { coefficient, exponents }
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.coefficient;
        for (&xi, &e) in x.iter().zip(&self.exponents) {
            if e != 0 {
                v *= powu(xi, e);
            }
        }
        v
    }

    fn is_constant(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }
}

/// A canonical polynomial in a fixed number of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::from_terms(nvars, [Monomial::new(c, vec![0; nvars])])
    }

    /// The polynomial `x_index`.
    pub fn variable(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Self::from_terms(nvars, [Monomial::new(1.0, e)])
    }

    /// Builds a canonical polynomial from arbitrary terms.
    ///
    /// Panics if a term's exponent tuple does not have length `nvars`.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = Monomial>) -> Self {
        let mut terms: Vec<Monomial> =
            terms.into_iter().inspect(|m| assert_eq!(m.exponents.len(), nvars, "exponent tuple length")).collect();
        terms.sort_by(|a, b| a.exponents.cmp(&b.exponents));
        let mut merged: Vec<Monomial> = Vec::with_capacity(terms.len());
        for m in terms {
            match merged.last_mut() {
                Some(last) if last.exponents == m.exponents => last.coefficient += m.coefficient,
                _ => merged.push(m),
            }
        }
        merged.retain(|m| m.coefficient != 0.0);
        Self { nvars, terms: merged }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> f64 {
        self.terms.iter().find(|m| m.is_constant()).map_or(0.0, |m| m.coefficient)
    }

    /// Evaluates at `x`; `x` must have length [`nvars`](Self::nvars).
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nvars);
        self.terms.iter().map(|m| m.eval(x)).sum()
    }

    /// Symbolic partial derivative with respect to variable `index`.
    pub fn partial(&self, index: usize) -> Polynomial {
        let terms = self.terms.iter().filter(|m| m.exponents[index] > 0).map(|m| {
            let mut e = m.exponents.clone();
            let p = e[index];
            e[index] -= 1;
            Monomial::new(m.coefficient * f64::from(p), e)
        });
        Self::from_terms(self.nvars, terms)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        Self::from_terms(self.nvars, self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(-1.0)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        Self::from_terms(self.nvars, self.terms.iter().map(|m| Monomial::new(m.coefficient * c, m.exponents.clone())))
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let e = a.exponents.iter().zip(&b.exponents).map(|(x, y)| x + y).collect();
                out.push(Monomial::new(a.coefficient * b.coefficient, e));
            }
        }
        Self::from_terms(self.nvars, out)
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut acc = Self::constant(self.nvars, 1.0);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Sound but incomplete lower bound.
    ///
    /// Succeeds when every non-constant term has only even exponents and a
    /// positive coefficient; the bound is then the constant term. `None`
    /// means "not certified", not "unbounded below".
    pub fn certify_lower_bound(&self) -> Option<f64> {
        self.terms
            .iter()
            .filter(|m| !m.is_constant())
            .all(|m| m.coefficient > 0.0 && m.exponents.iter().all(|e| e % 2 == 0))
            .then(|| self.constant_term())
    }

    /// Formats the polynomial with the given variable names. The output
    /// re-parses to an identical polynomial.
    pub fn display<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        PolyDisplay { poly: self, names }
    }
}

/// Free-function form of [`Polynomial::certify_lower_bound`].
pub fn certify_lower_bound(poly: &Polynomial) -> Option<f64> {
    poly.certify_lower_bound()
}

struct PolyDisplay<'a> {
    poly: &'a Polynomial,
    names: &'a [String],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, m) in self.poly.terms.iter().enumerate() {
            let c = m.coefficient;
            let mag = if c < 0.0 { -c } else { c };
            match (i, c < 0.0) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut first = true;
            if mag != 1.0 || m.is_constant() {
                write!(f, "{mag:?}")?;
                first = false;
            }
            for (name, &e) in self.names.iter().zip(&m.exponents) {
                if e == 0 {
                    continue;
                }
                if !first {
                    f.write_str("*")?;
                }
                first = false;
                f.write_str(name)?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// An n-dimensional polynomial vector field with cached symbolic partials.
#[derive(Debug, Clone)]
pub struct PolyField {
    components: Vec<Polynomial>,
    variable_names: Vec<String>,
    parameters: Vec<(String, f64)>,
    // partials[i][k] = ∂f_i/∂x_k
    partials: Vec<Vec<Polynomial>>,
}

impl PartialEq for PolyField {
    fn eq(&self, other: &Self) -> bool {
        self.components == other.components && self.variable_names == other.variable_names
    }
}

impl PolyField {
    /// Field with default variable names (`x, y, z` up to three dimensions,
    /// `x1..xn` beyond).
    pub fn new(components: Vec<Polynomial>) -> Self {
        let n = components.len();
        let names = if n <= 3 {
            ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect()
        } else {
            (1..=n).map(|i| format!("x{i}")).collect()
        };
        Self::with_names(components, names, Vec::new())
    }

    /// Panics if the lengths disagree or a component has the wrong number
    /// of variables.
    pub fn with_names(
        components: Vec<Polynomial>,
        variable_names: Vec<String>,
        parameters: Vec<(String, f64)>,
    ) -> Self {
        let n = components.len();
        assert!(n > 0, "a vector field needs at least one component");
        assert_eq!(variable_names.len(), n, "one name per variable");
        assert!(components.iter().all(|p| p.nvars == n), "component arity");
        let partials = components.iter().map(|p| (0..n).map(|k| p.partial(k)).collect()).collect();
        Self { components, variable_names, parameters, partials }
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    /// Parameters as declared in the source text; already substituted.
    pub fn parameters(&self) -> &[(String, f64)] {
        &self.parameters
    }

    fn check_state(&self, state: &[f64]) -> Result<(), FieldError> {
        if state.len() != self.dimension() {
            return Err(FieldError::DimensionMismatch { expected: self.dimension(), found: state.len() });
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite);
        }
        Ok(())
    }

    pub fn evaluate(&self, state: &[f64]) -> Result<Vec<f64>, FieldError> {
        self.check_state(state)?;
        let mut out = vec![0.0; self.dimension()];
        self.eval_into(state, &mut out);
        Ok(out)
    }

    /// Unchecked evaluation into a caller buffer.
    #[inline]
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.components) {
            *o = p.eval(x);
        }
    }

    pub fn jacobian(&self, state: &[f64]) -> Result<DMatrix<f64>, FieldError> {
        self.check_state(state)?;
        let n = self.dimension();
        let mut buf = vec![0.0; n * n];
        self.jacobian_into(state, &mut buf);
        Ok(DMatrix::from_row_slice(n, n, &buf))
    }

    /// Unchecked row-major Jacobian into a caller buffer of length n².
    #[inline]
    pub fn jacobian_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dimension();
        for (i, row) in self.partials.iter().enumerate() {
            for (k, p) in row.iter().enumerate() {
                out[i * n + k] = p.eval(x);
            }
        }
    }

    /// Trace of the Jacobian.
    pub fn divergence(&self, x: &[f64]) -> f64 {
        self.partials.iter().enumerate().map(|(i, row)| row[i].eval(x)).sum()
    }
}

impl fmt::Display for PolyField {
    /// Emits system-config text that parses back to the same field.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, p) in self.variable_names.iter().zip(&self.components) {
            writeln!(f, "d{name}/dt = {}", p.display(&self.variable_names))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("undefined variable or parameter `{0}`")]
    Undefined(String),
    #[error("second equation for variable `{0}`")]
    DuplicateEquation(String),
    #[error("`{0}` is declared both as a parameter and a variable")]
    NameClash(String),
    #[error("no equations found")]
    NoEquations,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64, bool),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    Eq,
    LParen,
    RParen,
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let err = |col: usize, msg: String| ParseError { line: lineno, column: col, kind: ParseErrorKind::Syntax(msg) };
    let bytes = line.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let col = i + 1;
        match c {
            b' ' | b'\t' | b'\r' => i += 1,
            b'#' => break,
            b'+' => (toks.push((Tok::Plus, col)), i += 1).1,
            b'-' => (toks.push((Tok::Minus, col)), i += 1).1,
            b'*' => (toks.push((Tok::Star, col)), i += 1).1,
            b'^' => (toks.push((Tok::Caret, col)), i += 1).1,
            b'/' => (toks.push((Tok::Slash, col)), i += 1).1,
            b'=' => (toks.push((Tok::Eq, col)), i += 1).1,
            b'(' => (toks.push((Tok::LParen, col)), i += 1).1,
            b')' => (toks.push((Tok::RParen, col)), i += 1).1,
            b'0'..=b'9' | b'.' => {
                let start = i;
                let mut integral = true;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    integral &= bytes[i] != b'.';
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        integral = false;
                        i = j;
                    }
                }
                let text = &line[start..i];
                let v: f64 = text.parse().map_err(|_| err(col, format!("malformed number `{text}`")))?;
                if !v.is_finite() {
                    return Err(err(col, format!("number `{text}` is not finite")));
                }
                toks.push((Tok::Num(v, integral), col));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push((Tok::Ident(line[start..i].to_string()), col));
            }
            _ => return Err(err(col, format!("unexpected character `{}`", c as char))),
        }
    }
    Ok(toks)
}

struct ExprParser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    line: usize,
    end_col: usize,
    vars: &'a [String],
    params: &'a [(String, f64)],
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn syntax(&self, msg: &str) -> ParseError {
        ParseError { line: self.line, column: self.col(), kind: ParseErrorKind::Syntax(msg.to_string()) }
    }

    fn n(&self) -> usize {
        self.vars.len()
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.unary()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            acc = acc.mul(&self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            match self.peek() {
                Some(&Tok::Num(v, true)) if v <= f64::from(u16::MAX) => {
                    self.pos += 1;
                    return Ok(base.pow(v as u32));
                }
                _ => return Err(self.syntax("exponent must be a non-negative integer literal")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial, ParseError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Num(v, _)) => {
                self.pos += 1;
                Ok(Polynomial::constant(self.n(), v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    Ok(Polynomial::variable(self.n(), i))
                } else if let Some((_, v)) = self.params.iter().find(|(p, _)| *p == name) {
                    Ok(Polynomial::constant(self.n(), *v))
                } else {
                    Err(ParseError { line: self.line, column: col, kind: ParseErrorKind::Undefined(name) })
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(self.syntax("expected `)`")),
                }
            }
            Some(_) => Err(self.syntax("expected a number, identifier or `(`")),
            None => Err(self.syntax("unexpected end of expression")),
        }
    }
}

struct Equation {
    var: String,
    line: usize,
    rhs: Vec<(Tok, usize)>,
    end_col: usize,
}

/// Parses system-config text into a canonical [`PolyField`].
pub fn parse_system(text: &str) -> Result<PolyField, ParseError> {
    let mut params: Vec<(String, f64)> = Vec::new();
    let mut equations: Vec<Equation> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let toks = tokenize(raw, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let syntax = |col: usize, msg: &str| ParseError {
            line: lineno,
            column: col,
            kind: ParseErrorKind::Syntax(msg.to_string()),
        };
        let end_col = raw.len() + 1;
        match &toks[0].0 {
            Tok::Ident(kw) if kw == "param" => {
                let (name, ncol) = match toks.get(1) {
                    Some((Tok::Ident(n), c)) => (n.clone(), *c),
                    other => return Err(syntax(other.map_or(end_col, |t| t.1), "expected parameter name")),
                };
                if !matches!(toks.get(2), Some((Tok::Eq, _))) {
                    return Err(syntax(toks.get(2).map_or(end_col, |t| t.1), "expected `=`"));
                }
                let (sign, at) = match toks.get(3) {
                    Some((Tok::Minus, _)) => (-1.0, 4),
                    Some((Tok::Plus, _)) => (1.0, 4),
                    _ => (1.0, 3),
                };
                let value = match toks.get(at) {
                    Some((Tok::Num(v, _), _)) => sign * v,
                    other => return Err(syntax(other.map_or(end_col, |t| t.1), "expected a real literal")),
                };
                if let Some((_, c)) = toks.get(at + 1) {
                    return Err(syntax(*c, "trailing input after parameter value"));
                }
                if params.iter().any(|(p, _)| *p == name) {
                    return Err(syntax(ncol, "parameter declared twice"));
                }
                params.push((name, value));
            }
            Tok::Ident(lhs) if lhs.len() > 1 && lhs.starts_with('d') => {
                let var = lhs[1..].to_string();
                match (toks.get(1), toks.get(2), toks.get(3)) {
                    (Some((Tok::Slash, _)), Some((Tok::Ident(dt), _)), Some((Tok::Eq, _))) if dt == "dt" => {}
                    _ => return Err(syntax(toks[0].1, "expected `d<var>/dt =`")),
                }
                if equations.iter().any(|e| e.var == var) {
                    return Err(ParseError {
                        line: lineno,
                        column: toks[0].1,
                        kind: ParseErrorKind::DuplicateEquation(var),
                    });
                }
                equations.push(Equation { var, line: lineno, rhs: toks[4..].to_vec(), end_col });
            }
            _ => return Err(syntax(toks[0].1, "expected `param` or `d<var>/dt`")),
        }
    }

    if equations.is_empty() {
        return Err(ParseError { line: 1, column: 1, kind: ParseErrorKind::NoEquations });
    }
    let vars: Vec<String> = equations.iter().map(|e| e.var.clone()).collect();
    if let Some(e) = equations.iter().find(|e| params.iter().any(|(p, _)| *p == e.var)) {
        return Err(ParseError { line: e.line, column: 1, kind: ParseErrorKind::NameClash(e.var.clone()) });
    }

    let mut components = Vec::with_capacity(vars.len());
    for eq in &equations {
        let mut p =
            ExprParser { toks: &eq.rhs, pos: 0, line: eq.line, end_col: eq.end_col, vars: &vars, params: &params };
        let poly = p.expr()?;
        if p.pos != eq.rhs.len() {
            return Err(p.syntax("unexpected token"));
        }
        components.push(poly);
    }
    Ok(PolyField::with_names(components, vars, params))
}
