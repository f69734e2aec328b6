//! Recursive-descent parser for the formula surface syntax.
//!
//! ```text
//! formula := imp ('<->' imp)*
//! imp     := or ('->' imp)?
//! or      := and ('|' and)*
//! and     := unary ('&' unary)*
//! unary   := '!' unary | QUANT ident (',' ident)* '.' formula | primary
//! primary := '(' formula ')' | 'true' | 'false'
//!          | ident 'sub' ident | term ('=' | '<') term | term 'in' ident
//! term    := ident | NUMBER | 'succ' '(' term ')'
//! ```

use super::ast::{Formula, Quantifier, Span, Term};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    Kw(&'static str),
    Sym(&'static str),
    End,
}

const KEYWORDS: [&str; 10] = [
    "ex1", "all1", "ex2", "all2", "exu", "in", "sub", "succ", "true", "false",
];
const SYMBOLS: [&str; 11] = ["<->", "->", "(", ")", ",", ".", "=", "<", "!", "&", "|"];

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, Span)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(Tok, Span)>> {
        let mut lx = Lexer {
            src,
            toks: Vec::new(),
        };
        let bytes = src.as_bytes();
        let mut i = 0;
        'outer: while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == b'_' {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
                {
                    i += 1;
                }
                let word = &src[start..i];
                let tok = match KEYWORDS.iter().find(|k| **k == word) {
                    Some(k) => Tok::Kw(k),
                    None => Tok::Ident(word.to_string()),
                };
                lx.toks.push((tok, Span { start, end: i }));
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = src[start..i]
                    .parse()
                    .map_err(|_| syntax_error(src, start, "numeral too large"))?;
                lx.toks.push((Tok::Num(n), Span { start, end: i }));
                continue;
            }
            for s in SYMBOLS {
                if src[i..].starts_with(s) {
                    lx.toks.push((
                        Tok::Sym(s),
                        Span {
                            start: i,
                            end: i + s.len(),
                        },
                    ));
                    i += s.len();
                    continue 'outer;
                }
            }
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(syntax_error(
                src,
                i,
                &format!("unexpected character `{ch}`"),
            ));
        }
        let end = lx.src.len();
        lx.toks.push((Tok::End, Span { start: end, end }));
        Ok(lx.toks)
    }
}

pub(crate) fn syntax_error(src: &str, offset: usize, message: &str) -> Error {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rfind('\n')
        .map_or(before.chars().count(), |p| before[p + 1..].chars().count())
        + 1;
    Error::Syntax {
        line,
        column,
        offset,
        message: message.to_string(),
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: &str) -> Error {
        syntax_error(self.src, self.span().start, message)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if *self.peek() == Tok::Sym(SYMBOLS.iter().find(|x| **x == s).expect("known symbol")) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{s}`")))
        }
    }

    fn ident(&mut self) -> Result<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let sp = self.span();
                self.bump();
                Ok((name, sp))
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut f = self.implication()?;
        while self.eat_sym("<->") {
            let g = self.implication()?;
            f = Formula::Iff(Box::new(f), Box::new(g));
        }
        Ok(f)
    }

    fn implication(&mut self) -> Result<Formula> {
        let f = self.disjunction()?;
        if self.eat_sym("->") {
            let g = self.implication()?;
            return Ok(Formula::implies(f, g));
        }
        Ok(f)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut f = self.conjunction()?;
        while self.eat_sym("|") {
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.eat_sym("&") {
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat_sym("!") {
            return Ok(Formula::not(self.unary()?));
        }
        let q = match self.peek() {
            Tok::Kw("ex1") => Some(Quantifier::Exists1),
            Tok::Kw("all1") => Some(Quantifier::Forall1),
            Tok::Kw("ex2") => Some(Quantifier::Exists2),
            Tok::Kw("all2") => Some(Quantifier::Forall2),
            Tok::Kw("exu") => Some(Quantifier::ExistsUnique),
            _ => None,
        };
        if let Some(q) = q {
            self.bump();
            let mut vars = vec![self.ident()?];
            while self.eat_sym(",") {
                vars.push(self.ident()?);
            }
            self.expect_sym(".")?;
            let body = self.formula()?;
            return Ok(vars.into_iter().rev().fold(body, |acc, (v, sp)| {
                Formula::Quant(q.clone(), v, sp, Box::new(acc))
            }));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Sym("(") => {
                self.bump();
                let f = self.formula()?;
                self.expect_sym(")")?;
                Ok(f)
            }
            Tok::Kw("true") => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Kw("false") => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(name) if self.toks[self.pos + 1].0 == Tok::Kw("sub") => {
                let sp = self.span();
                self.bump();
                self.bump();
                let (other, sp2) = self.ident()?;
                Ok(Formula::Sub(
                    name,
                    other,
                    Span {
                        start: sp.start,
                        end: sp2.end,
                    },
                ))
            }
            _ => {
                let left = self.term()?;
                match self.peek() {
                    Tok::Sym("=") => {
                        self.bump();
                        Ok(Formula::Eq(left, self.term()?))
                    }
                    Tok::Sym("<") => {
                        self.bump();
                        Ok(Formula::Less(left, self.term()?))
                    }
                    Tok::Kw("in") => {
                        self.bump();
                        let (set, sp) = self.ident()?;
                        Ok(Formula::In(left, set, sp))
                    }
                    _ => Err(self.error("expected `=`, `<` or `in`")),
                }
            }
        }
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let sp = self.span();
                self.bump();
                Ok(Term::Var(name, sp))
            }
            Tok::Num(n) => {
                self.bump();
                Ok((0..n).fold(Term::Zero, |t, _| Term::succ(t)))
            }
            Tok::Kw("succ") => {
                self.bump();
                self.expect_sym("(")?;
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(Term::succ(t))
            }
            Tok::End => Err(self.error("unexpected end of input, expected a term")),
            _ => Err(self.error("expected a term")),
        }
    }
}

/// Parses a formula; free variables are allowed.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let toks = Lexer::run(text)?;
    let mut p = Parser {
        src: text,
        toks,
        pos: 0,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.error("unexpected trailing input"));
    }
    f.free_variables()?;
    Ok(f)
}

/// Parses a formula whose free variables must come from `allowed`.
pub fn parse_formula_in(text: &str, allowed: &[&str]) -> Result<Formula> {
    let f = parse_formula(text)?;
    for (v, _) in f.free_variables()? {
        if !allowed.contains(&v.as_str()) {
            return Err(Error::UnboundVariable(v));
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_paper_transitions() {
        let f = parse_formula("(x = 0) & (y = z)").unwrap();
        assert_eq!(
            f.strip_spans(),
            Formula::and(
                Formula::eq(Term::var("x"), Term::Zero),
                Formula::eq(Term::var("y"), Term::var("z"))
            )
        );
        let g = parse_formula("(z = succ(x)) & (y = z)").unwrap();
        assert_eq!(g.to_string(), "z = succ(x) & y = z");
    }

    #[test]
    fn error_offset() {
        match parse_formula("x = ") {
            Err(Error::Syntax {
                offset,
                line,
                column,
                ..
            }) => {
                assert_eq!((offset, line, column), (4, 1, 5));
            }
            other => panic!("{other:?}"),
        }
        let e = parse_formula("x = 0 &\n  ?").unwrap_err();
        assert!(
            matches!(
                e,
                Error::Syntax {
                    line: 2,
                    column: 3,
                    ..
                }
            ),
            "{e:?}"
        );
    }

    #[test]
    fn round_trip_pretty() {
        for src in [
            "ex1 x. all1 y. x < y -> y = succ(x) | !(x = y)",
            "ex2 X. (0 in X & all1 t. t in X -> succ(t) in X) <-> X sub Y",
            "a = b -> b = c -> c = a",
            "!ex1 t. t < x",
            "exu y, t. y = t",
        ] {
            let f = parse_formula(src).unwrap();
            let printed = f.to_string();
            let g = parse_formula(&printed).unwrap();
            assert_eq!(g.to_string(), printed);
            assert_eq!(f.strip_spans(), g.strip_spans(), "{src}");
        }
    }

    #[test]
    fn unbound_variables() {
        assert_eq!(
            parse_formula_in("x = w", &["x", "y", "z"]).unwrap_err(),
            Error::UnboundVariable("w".into())
        );
        assert!(parse_formula_in("ex1 w. x = w", &["x"]).is_ok());
    }
}
