use crate::error::{Error, Result};

use super::Formula;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Eventually,
    Globally,
    And,
    Not,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => out.push((pos, Tok::LParen)),
            ')' => out.push((pos, Tok::RParen)),
            '&' | '∧' => out.push((pos, Tok::And)),
            '!' | '¬' | '~' => out.push((pos, Tok::Not)),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || matches!(chars[i].1, '_' | '-')) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                // `F` and `G` are operators only when applied.
                let applied = chars[i..].iter().find(|(_, c)| !c.is_whitespace()).map(|&(_, c)| c) == Some('(');
                let tok = match word.as_str() {
                    "F" if applied => Tok::Eventually,
                    "G" if applied => Tok::Globally,
                    _ => Tok::Ident(word),
                };
                out.push((pos, tok));
                continue;
            }
            other => {
                return Err(Error::Syntax {
                    pos,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |&(p, _)| p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut terms = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.at += 1;
            terms.push(self.unary()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Formula::And(terms)
        })
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.at += 1;
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Some(op @ (Tok::Eventually | Tok::Globally)) => {
                self.at += 1;
                self.expect(Tok::LParen, "`(`")?;
                let body = Box::new(self.conjunction()?);
                self.expect(Tok::RParen, "`)`")?;
                Ok(match op {
                    Tok::Eventually => Formula::Eventually(body),
                    _ => Formula::Globally(body),
                })
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let inner = self.conjunction()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                Ok(Formula::Atom(name))
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of formula"),
        }
    }
}

/// Parses concrete syntax such as `F(a) & F(b) & G(!c)` and checks that the
/// result lies in the supported fragment.
pub fn parse(text: &str) -> Result<Formula> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
    };
    let f = p.conjunction()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    let f = flatten(f);
    check_fragment(&f)?;
    Ok(f)
}

fn flatten(f: Formula) -> Formula {
    match f {
        Formula::And(fs) => {
            let mut out = Vec::new();
            for g in fs {
                match flatten(g) {
                    Formula::And(inner) => out.extend(inner),
                    other => out.push(other),
                }
            }
            Formula::And(out)
        }
        Formula::Not(g) => Formula::Not(Box::new(flatten(*g))),
        Formula::Eventually(g) => Formula::Eventually(Box::new(flatten(*g))),
        Formula::Globally(g) => Formula::Globally(Box::new(flatten(*g))),
        atom => atom,
    }
}

fn unsupported<T>(node: &Formula, msg: &str) -> Result<T> {
    Err(Error::Unsupported {
        node: node.to_string(),
        msg: msg.to_owned(),
    })
}

fn check_fragment(f: &Formula) -> Result<()> {
    for term in f.conjuncts() {
        match term {
            Formula::Eventually(body) => {
                visit_chain(body)?;
            }
            Formula::Globally(body) => {
                for lit in body.conjuncts() {
                    match lit {
                        Formula::Not(a) if matches!(**a, Formula::Atom(_)) => {}
                        _ => return unsupported(term, "G bodies must be conjunctions of negated atoms"),
                    }
                }
            }
            other => return unsupported(other, "top-level terms must be F(...) or G(...)"),
        }
    }
    Ok(())
}

/// Flattens the body of an `F` into the ordered list of symbols it requires.
///
/// Accepted shapes: `p`, `F(body)`, and `p & F(body)`.
pub(crate) fn visit_chain(body: &Formula) -> Result<Vec<String>> {
    match body {
        Formula::Atom(s) => Ok(vec![s.clone()]),
        Formula::Eventually(inner) => visit_chain(inner),
        Formula::And(parts) if parts.len() == 2 => {
            let (atom, rest) = match (&parts[0], &parts[1]) {
                (Formula::Atom(a), r @ Formula::Eventually(_)) | (r @ Formula::Eventually(_), Formula::Atom(a)) => (a, r),
                _ => return unsupported(body, "F bodies conjoin one atom with one nested F(...)"),
            };
            let mut chain = vec![atom.clone()];
            chain.extend(visit_chain(rest)?);
            Ok(chain)
        }
        _ => unsupported(body, "F bodies must be an atom, F(...), or atom & F(...)"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Box<Formula> {
        Box::new(Formula::Atom(s.into()))
    }

    #[test]
    fn visit_conjunction() {
        assert_eq!(
            parse("F(a) & F(b)").unwrap(),
            Formula::And(vec![Formula::Eventually(f("a")), Formula::Eventually(f("b"))])
        );
    }

    #[test]
    fn sequenced_visit_nests() {
        let g = parse("F(a & F(b))").unwrap();
        assert_eq!(
            g,
            Formula::Eventually(Box::new(Formula::And(vec![Formula::Atom("a".into()), Formula::Eventually(f("b"))])))
        );
    }

    #[test]
    fn unicode_operators() {
        assert_eq!(parse("F(a) ∧ G(¬c)").unwrap(), parse("F(a) & G(!c)").unwrap());
    }

    #[test]
    fn positive_atom_under_globally_is_unsupported() {
        assert!(matches!(parse("G(a)"), Err(Error::Unsupported { node, .. }) if node == "G(a)"));
    }

    #[test]
    fn outside_fragment() {
        assert!(matches!(parse("a"), Err(Error::Unsupported { .. })));
        assert!(matches!(parse("F(!a)"), Err(Error::Unsupported { .. })));
        assert!(matches!(parse("F(a & b)"), Err(Error::Unsupported { .. })));
    }

    #[test]
    fn syntax_errors_report_position() {
        match parse("F(a) & ") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 7),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("F(a"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("F(a) $"), Err(Error::Syntax { pos: 5, .. })));
    }

    #[test]
    fn chain_flattening() {
        let g = parse("F(a & F(b & F(c)))").unwrap();
        let Formula::Eventually(body) = g else { panic!() };
        assert_eq!(visit_chain(&body).unwrap(), vec!["a", "b", "c"]);
    }
}
