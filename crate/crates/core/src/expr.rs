//! Word expressions over neighbourhood variables, such as `x[0]*x[1]^-1` or `x[-1]+x[1]`.
//!
//! `*` and `+` both denote the group operation and associate to the left. Atoms are
//! variables `x[i,..]`, parenthesised words, the identity `id`, and element labels (bare, or
//! quoted as `'(1,0)'` when they contain punctuation). `^k` raises an atom to an integer power.

use crate::error::{Error, Result};
use crate::group::{Elem, FiniteGroup};
use crate::shape::{Cell, Shape};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Var(Cell),
    Const(Elem),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    group: &'a FiniteGroup,
}

const PUNCT: &[char] = &['*', '+', '^', '(', ')', '[', ']', '\''];

impl Parser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::Invalid(format!("expression {:?}: {what} at offset {}", self.src, self.pos))
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let t = self.rest().trim_start();
        self.pos = self.src.len() - t.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> Result<Expr> {
        let mut e = self.power()?;
        while self.eat('*') || self.eat('+') {
            e = Expr::Mul(Box::new(e), Box::new(self.power()?));
        }
        Ok(e)
    }

    fn power(&mut self) -> Result<Expr> {
        let a = self.atom()?;
        if self.eat('^') {
            self.skip_ws();
            let len = self.rest().find(|c: char| !(c == '-' || c.is_ascii_digit())).unwrap_or(self.rest().len());
            let k = self.rest()[..len].parse::<i64>().map_err(|_| self.err("expected an integer exponent"))?;
            self.pos += len;
            return Ok(Expr::Pow(Box::new(a), k));
        }
        Ok(a)
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        if self.eat('(') {
            let e = self.word()?;
            if !self.eat(')') {
                return Err(self.err("expected ')'"));
            }
            return Ok(e);
        }
        if self.eat('\'') {
            let end = self.rest().find('\'').ok_or_else(|| self.err("unterminated quote"))?;
            let label = &self.rest()[..end];
            let a = self.group.parse_label(label).ok_or_else(|| self.err(&format!("unknown element {label:?}")))?;
            self.pos += end + 1;
            return Ok(Expr::Const(a));
        }
        let len = self.rest().find(|c: char| c.is_whitespace() || PUNCT.contains(&c)).unwrap_or(self.rest().len());
        let tok = self.rest()[..len].to_string();
        if tok.is_empty() {
            return Err(self.err("expected a variable, element or '('"));
        }
        self.pos += len;
        if tok == "x" && self.eat('[') {
            let end = self.rest().find(']').ok_or_else(|| self.err("expected ']'"))?;
            let cell = self.rest()[..end]
                .split(',')
                .map(|t| t.trim().parse::<i64>())
                .collect::<std::result::Result<Cell, _>>()
                .map_err(|_| self.err("bad variable offset"))?;
            self.pos += end + 1;
            return Ok(Expr::Var(cell));
        }
        if tok == "id" {
            return Ok(Expr::Const(self.group.identity()));
        }
        self.group.parse_label(&tok).map(Expr::Const).ok_or_else(|| self.err(&format!("unknown element {tok:?}")))
    }
}

impl Expr {
    pub fn parse(src: &str, group: &FiniteGroup) -> Result<Expr> {
        let mut p = Parser { src, pos: 0, group };
        let e = p.word()?;
        p.skip_ws();
        if p.pos != src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    /// Variable offsets in order of first appearance.
    pub fn variables(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<Cell>) {
        match self {
            Expr::Var(c) if !out.contains(c) => out.push(c.clone()),
            Expr::Var(_) | Expr::Const(_) => {}
            Expr::Mul(a, b) => {
                a.collect(out);
                b.collect(out);
            }
            Expr::Pow(a, _) => a.collect(out),
        }
    }

    /// The smallest neighbourhood containing every variable (at least the origin when there are none).
    pub fn neighborhood(&self, dim: usize) -> Result<Shape> {
        let mut cells = self.variables();
        if let Some(c) = cells.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: c.len() });
        }
        if cells.is_empty() {
            cells.push(vec![0; dim]);
        }
        Shape::new(dim, cells)
    }

    /// Value with variables read from `vals`, indexed like the cells of `nbhd`.
    pub fn eval(&self, group: &FiniteGroup, nbhd: &Shape, vals: &[Elem]) -> Elem {
        match self {
            Expr::Var(c) => vals[nbhd.index_of(c).expect("variable inside the neighbourhood")],
            Expr::Const(a) => *a,
            Expr::Mul(a, b) => group.mul(a.eval(group, nbhd, vals), b.eval(group, nbhd, vals)),
            Expr::Pow(a, k) => group.pow_elem(a.eval(group, nbhd, vals), *k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        let z4 = FiniteGroup::cyclic(4);
        let e = Expr::parse("x[0] + x[0]", &z4).unwrap();
        let n = e.neighborhood(1).unwrap();
        assert_eq!(n.cells(), &[vec![0]]);
        assert_eq!(e.eval(&z4, &n, &[3]), 2);
        let e = Expr::parse("x[-1]*x[1]^-1 * 1", &z4).unwrap();
        let n = e.neighborhood(1).unwrap();
        assert_eq!(e.eval(&z4, &n, &[2, 1]), 2);
    }

    #[test]
    fn labels_and_errors() {
        let s3 = FiniteGroup::s3();
        let e = Expr::parse("(x[0]*'102')^2", &s3).unwrap();
        assert_eq!(e.variables(), vec![vec![0]]);
        assert!(Expr::parse("x[0]*", &s3).is_err());
        assert!(Expr::parse("x[0] q", &s3).is_err());
        let v4 = FiniteGroup::preset("V4").unwrap();
        assert!(Expr::parse("x[0]*'(1,0)'", &v4).is_ok());
        assert_eq!(Expr::parse("id", &v4).unwrap(), Expr::Const(0));
    }
}
