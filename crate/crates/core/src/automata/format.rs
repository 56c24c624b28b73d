//! Line-oriented machine files and Graphviz export.
//!
//! ```text
//! moore-machine 1
//! alphabet a b
//! classes 0 1
//! states 2
//! initial 0
//! state 0 out 0 next 1 0
//! state 1 out 1 next 1 1
//! ```
//!
//! `out` is a class index into `classes`; `next` lists successors in
//! alphabet order. Blank lines and `#` comments are ignored on input.

use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::MooreMachine;

pub const FORMAT_HEADER: &str = "moore-machine 1";

pub fn serialize(m: &MooreMachine) -> String {
    let mut out = String::new();
    let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(" ");
    writeln!(out, "{FORMAT_HEADER}").unwrap();
    writeln!(out, "alphabet {}", m.alphabet().join(" ")).unwrap();
    writeln!(out, "classes {}", join(&mut m.output_classes().iter().map(|c| c.to_string()))).unwrap();
    writeln!(out, "states {}", m.num_states()).unwrap();
    writeln!(out, "initial {}", m.initial()).unwrap();
    for q in 0..m.num_states() {
        let next = join(&mut (0..m.num_symbols()).map(|p| m.next(q, p).to_string()));
        writeln!(out, "state {q} out {} next {next}", m.output(q)).unwrap();
    }
    out
}

pub fn deserialize(text: &str) -> Result<MooreMachine> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "empty machine file"))?;
    if header != FORMAT_HEADER {
        return Err(Error::parse(ln, format!("expected header `{FORMAT_HEADER}`, found `{header}`")));
    }

    let mut field = |key: &str| -> Result<(usize, Vec<String>)> {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| Error::parse(0, format!("missing `{key}` line")))?;
        let mut toks = line.split_whitespace();
        if toks.next() != Some(key) {
            return Err(Error::parse(ln, format!("expected `{key}`")));
        }
        Ok((ln, toks.map(str::to_owned).collect()))
    };

    let (_, alphabet) = field("alphabet")?;
    let (ln, classes) = field("classes")?;
    let classes = classes
        .iter()
        .map(|c| c.parse::<i64>().map_err(|_| Error::parse(ln, format!("bad class label {c:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let (ln, n) = field("states")?;
    let n = single_usize(ln, &n)?;
    let (ln, init) = field("initial")?;
    let initial = single_usize(ln, &init)?;

    let k = alphabet.len();
    let mut rows: Vec<Option<(usize, Vec<usize>)>> = vec![None; n];
    for _ in 0..n {
        let (ln, toks) = field("state")?;
        if toks.len() != 4 + k || toks[1] != "out" || toks[3] != "next" {
            return Err(Error::parse(ln, "expected `state <id> out <class> next <succ>...`"));
        }
        let num = |t: &str| t.parse::<usize>().map_err(|_| Error::parse(ln, format!("bad number {t:?}")));
        let q = num(&toks[0])?;
        if q >= n {
            return Err(Error::parse(ln, format!("state id {q} out of range")));
        }
        if rows[q].is_some() {
            return Err(Error::parse(ln, format!("state {q} defined twice")));
        }
        let out = num(&toks[2])?;
        let next = toks[4..].iter().map(|t| num(t)).collect::<Result<Vec<_>>>()?;
        rows[q] = Some((out, next));
    }
    if let Some((ln, extra)) = lines.next() {
        return Err(Error::parse(ln, format!("unexpected trailing line `{extra}`")));
    }

    let (outputs, transitions): (Vec<_>, Vec<_>) = rows
        .into_iter()
        .map(|r| r.expect("all states defined"))
        .unzip();
    MooreMachine::new(alphabet, classes, initial, transitions, outputs)
        .map_err(|e| Error::parse(0, e.to_string()))
}

fn single_usize(ln: usize, toks: &[String]) -> Result<usize> {
    match toks {
        [t] => t.parse().map_err(|_| Error::parse(ln, format!("bad number {t:?}"))),
        _ => Err(Error::parse(ln, "expected a single number")),
    }
}

/// Graphviz rendering; parallel edges are merged into one labelled edge.
pub fn export_dot(m: &MooreMachine) -> String {
    let mut out = String::from("digraph moore {\n  rankdir=LR;\n");
    for q in 0..m.num_states() {
        let shape = if m.output_label(q) == m.max_level() { "doublecircle" } else { "circle" };
        let start = if q == m.initial() { ", style=bold" } else { "" };
        writeln!(out, "  q{q} [label=\"q{q} / {}\", shape={shape}{start}];", m.output_label(q)).unwrap();
    }
    for q in 0..m.num_states() {
        let mut targets: Vec<(usize, Vec<&str>)> = Vec::new();
        for p in 0..m.num_symbols() {
            let r = m.next(q, p);
            match targets.iter_mut().find(|(t, _)| *t == r) {
                Some((_, labels)) => labels.push(&m.alphabet()[p]),
                None => targets.push((r, vec![&m.alphabet()[p]])),
            }
        }
        for (r, labels) in targets {
            writeln!(out, "  q{q} -> q{r} [label=\"{}\"];", labels.join(",")).unwrap();
        }
    }
    out.push_str("}\n");
    out
}
