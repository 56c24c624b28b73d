//! The eight benchmark tasks over the alphabet `{a, b, c, d, e}`.

use crate::automata::MooreMachine;
use crate::error::{Error, Result};
use crate::ltlf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Task {
    pub id: usize,
    /// 1 = visits and sequenced visits, 2 = adds global avoidance.
    pub class: u8,
    pub formula: &'static str,
    /// Expected number of unremovable reasoning shortcuts, identity included.
    pub urs_count: usize,
}

pub const TASKS: [Task; 8] = [
    Task { id: 1, class: 1, formula: "F(a) & F(b)", urs_count: 54 },
    Task { id: 2, class: 1, formula: "F(a) & F(b) & F(c)", urs_count: 24 },
    Task { id: 3, class: 1, formula: "F(a & F(b))", urs_count: 27 },
    Task { id: 4, class: 1, formula: "F(a & F(b)) & F(c)", urs_count: 4 },
    Task { id: 5, class: 2, formula: "F(a) & F(b) & G(!c)", urs_count: 8 },
    Task { id: 6, class: 2, formula: "F(a) & F(b) & G(!c) & G(!d)", urs_count: 8 },
    Task { id: 7, class: 2, formula: "F(a & F(b)) & G(!c)", urs_count: 4 },
    Task { id: 8, class: 2, formula: "F(a & F(b)) & G(!c) & G(!d)", urs_count: 4 },
];

pub fn task_alphabet() -> Vec<String> {
    ["a", "b", "c", "d", "e"].map(String::from).to_vec()
}

pub fn task(id: usize) -> Result<&'static Task> {
    TASKS
        .iter()
        .find(|t| t.id == id)
        .ok_or_else(|| Error::input(format!("no task {id}; tasks are numbered 1..=8")))
}

impl Task {
    pub fn machine(&self) -> MooreMachine {
        ltlf::compile_str(self.formula, &task_alphabet()).expect("benchmark formulas compile")
    }
}

/// Accepts either a task id (`1`..`8`) or a formula string.
pub fn resolve_formula(spec: &str) -> Result<String> {
    match spec.trim().parse::<usize>() {
        Ok(id) => Ok(task(id)?.formula.to_owned()),
        Err(_) => Ok(spec.to_owned()),
    }
}
