use super::poly::{GaussRat, Poly};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Highest derivative order accepted by the parser.
pub const MAX_ORDER: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("parse error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("all terms cancel")]
    EmptyEquation,
}

/// `coeff * f^{t_0} (f')^{t_1} ... (f^{(n)})^{t_n}`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiffMonomial {
    pub t: Vec<u32>,
    pub coeff: Poly,
}

impl DiffMonomial {
    pub fn degree(&self) -> u32 {
        self.t.iter().sum()
    }

    pub fn weight(&self) -> u32 {
        self.t.iter().enumerate().map(|(k, &e)| k as u32 * e).sum()
    }
}

impl Serialize for DiffMonomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("DiffMonomial", 4)?;
        st.serialize_field("t", &self.t)?;
        st.serialize_field("coeff", &self.coeff.to_string())?;
        st.serialize_field("degree", &self.degree())?;
        st.serialize_field("weight", &self.weight())?;
        st.end()
    }
}

/// A differential polynomial: distinct exponent vectors with their
/// coefficients, in order of first appearance.
#[derive(Clone, Debug, Default)]
struct DiffPoly(Vec<([u32; MAX_ORDER + 1], Poly)>);

impl DiffPoly {
    fn scalar(p: Poly) -> Self {
        DiffPoly(vec![([0; MAX_ORDER + 1], p)])
    }

    fn derivative(k: usize) -> Self {
        let mut t = [0; MAX_ORDER + 1];
        t[k] = 1;
        DiffPoly(vec![(t, Poly::constant(GaussRat::one()))])
    }

    fn add_term(&mut self, t: [u32; MAX_ORDER + 1], c: Poly) {
        match self.0.iter_mut().find(|(u, _)| *u == t) {
            Some((_, d)) => *d = &*d + &c,
            None => self.0.push((t, c)),
        }
    }

    fn add(mut self, o: DiffPoly) -> Self {
        for (t, c) in o.0 {
            self.add_term(t, c);
        }
        self
    }

    fn neg(self) -> Self {
        DiffPoly(self.0.into_iter().map(|(t, c)| (t, -&c)).collect())
    }

    fn mul(&self, o: &DiffPoly) -> Self {
        let mut out = DiffPoly::default();
        for (ta, ca) in &self.0 {
            for (tb, cb) in &o.0 {
                let mut t = *ta;
                for (x, y) in t.iter_mut().zip(tb) {
                    *x += y;
                }
                out.add_term(t, ca * cb);
            }
        }
        out
    }

    fn pow(&self, k: u32) -> Self {
        (1..k).fold(self.clone(), |acc, _| acc.mul(self))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn uint(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse"))
    }

    fn small_uint(&mut self) -> Result<u32, ParseError> {
        let at = self.pos;
        let n = self.uint()?;
        u32::try_from(n).or_else(|_| {
            self.pos = at;
            self.err("exponent too large")
        })
    }

    fn sum(&mut self) -> Result<DiffPoly, ParseError> {
        let mut acc = DiffPoly::default();
        let mut first = true;
        loop {
            let negative = self.eat(b'-');
            if !negative && !self.eat(b'+') && !first {
                return Ok(acc);
            }
            first = false;
            let t = self.term()?;
            acc = acc.add(if negative { t.neg() } else { t });
        }
    }

    fn term(&mut self) -> Result<DiffPoly, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.factor()?);
            } else if self.eat(b'/') {
                let at = self.pos;
                let q = self.uint()?;
                if q == BigInt::from(0) {
                    self.pos = at;
                    return self.err("division by zero");
                }
                let inv = GaussRat::real(BigRational::new(BigInt::from(1), q));
                acc = acc.mul(&DiffPoly::scalar(Poly::constant(inv)));
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<DiffPoly, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let at = self.pos;
            let k = self.small_uint()?;
            if k == 0 {
                self.pos = at;
                return self.err("exponent must be positive");
            }
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<DiffPoly, ParseError> {
        match self.peek() {
            Some(b'0'..=b'9') => {
                let n = self.uint()?;
                Ok(DiffPoly::scalar(Poly::constant(GaussRat::real(BigRational::from_integer(n)))))
            }
            Some(b'z') => {
                self.pos += 1;
                Ok(DiffPoly::scalar(Poly::monomial(1)))
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(DiffPoly::scalar(Poly::constant(GaussRat::i())))
            }
            Some(b'f') => {
                self.pos += 1;
                let mut k = 0;
                while self.src.get(self.pos) == Some(&b'\'') {
                    self.pos += 1;
                    k += 1;
                }
                if k > MAX_ORDER {
                    return self.err(format!("derivatives above order {MAX_ORDER} are not supported"));
                }
                Ok(DiffPoly::derivative(k))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                Ok(inner)
            }
            Some(c) => self.err(format!("unexpected '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses `sum_t c_t M_t[f] = 0`, with an optional right-hand side.
///
/// Like terms are merged, cancelled terms dropped, and all exponent vectors
/// padded to the highest derivative order present.
pub fn parse_equation(text: &str) -> Result<Vec<DiffMonomial>, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    if p.peek().is_none() {
        return p.err("empty input");
    }
    let mut lhs = p.sum()?;
    if p.eat(b'=') {
        lhs = lhs.add(p.sum()?.neg());
    }
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    from_terms(lhs.0.into_iter().map(|(t, c)| (t.to_vec(), c)))
}

/// Merges, drops zero coefficients and pads exponent vectors.
pub(crate) fn from_terms(terms: impl IntoIterator<Item = (Vec<u32>, Poly)>) -> Result<Vec<DiffMonomial>, ParseError> {
    let mut merged: Vec<(Vec<u32>, Poly)> = Vec::new();
    for (mut t, c) in terms {
        while t.len() > 1 && t.last() == Some(&0) {
            t.pop();
        }
        match merged.iter_mut().find(|(u, _)| *u == t) {
            Some((_, d)) => *d = &*d + &c,
            None => merged.push((t, c)),
        }
    }
    merged.retain(|(_, c)| !c.is_zero());
    if merged.is_empty() {
        return Err(ParseError::EmptyEquation);
    }
    let len = merged.iter().map(|(t, _)| t.len()).max().unwrap_or(1);
    Ok(merged
        .into_iter()
        .map(|(mut t, coeff)| {
            t.resize(len, 0);
            DiffMonomial { t, coeff }
        })
        .collect())
}
