//! Minimal s-expression reader for program fixtures.

use std::fmt;

use trace_rel_core::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn parse(text: &str) -> Result<Sexp> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let out = read(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Parse(format!("trailing input after s-expression in `{text}`")));
        }
        Ok(out)
    }

    /// Head symbol and arguments of a list form; an atom is a form with no arguments.
    pub fn form(&self) -> Result<(&str, &[Sexp])> {
        match self {
            Sexp::Atom(a) => Ok((a, &[])),
            Sexp::List(items) => match items.split_first() {
                Some((Sexp::Atom(head), args)) => Ok((head, args)),
                _ => Err(Error::Parse(format!("expected a form with a symbol head, found {self}"))),
            },
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(items) => {
                f.write_str("(")?;
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn tokenize(text: &str) -> Vec<String> {
    text.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_string).collect()
}

fn read(tokens: &[String], pos: &mut usize) -> Result<Sexp> {
    let tok = tokens.get(*pos).ok_or_else(|| Error::Parse("unexpected end of s-expression".into()))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(read(tokens, pos)?),
                    None => return Err(Error::Parse("unclosed `(`".into())),
                }
            }
        }
        ")" => Err(Error::Parse("unexpected `)`".into())),
        atom => Ok(Sexp::Atom(atom.to_string())),
    }
}

pub(crate) fn arity(head: &str, args: &[Sexp], n: usize) -> Result<()> {
    if args.len() != n {
        return Err(Error::Parse(format!("`{head}` takes {n} arguments, got {}", args.len())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let s = Sexp::parse("(if (le (in_n) 1) true false)").unwrap();
        assert_eq!(s.to_string(), "(if (le (in_n) 1) true false)");
        assert_eq!(s.form().unwrap().0, "if");
    }

    #[test]
    fn errors() {
        assert!(Sexp::parse("(a b").is_err());
        assert!(Sexp::parse("a)").is_err());
        assert!(Sexp::parse("").is_err());
    }
}
