use std::fmt;

/// Formula of the supported LTLf fragment.
///
/// The parser only returns trees inside the fragment: conjunctions of
/// `F(...)` visit/sequenced-visit terms and `G(...)` avoidance terms, with
/// negation directly above atoms inside `G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Eventually(Box<Formula>),
    Globally(Box<Formula>),
}

impl Formula {
    pub fn atoms(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Formula::Atom(s) => {
                if !out.contains(&s.as_str()) {
                    out.push(s);
                }
            }
            Formula::Not(f) | Formula::Eventually(f) | Formula::Globally(f) => f.collect_atoms(out),
            Formula::And(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
        }
    }

    /// Top-level conjuncts, flattening nested conjunctions.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        match self {
            Formula::And(fs) => fs.iter().flat_map(Formula::conjuncts).collect(),
            other => vec![other],
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(s) => f.write_str(s),
            Formula::Not(g) => write!(f, "!{g}"),
            Formula::Eventually(g) => write!(f, "F({g})"),
            Formula::Globally(g) => write!(f, "G({g})"),
            Formula::And(gs) => {
                for (i, g) in gs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    match g {
                        Formula::And(_) => write!(f, "({g})")?,
                        _ => write!(f, "{g}")?,
                    }
                }
                Ok(())
            }
        }
    }
}
