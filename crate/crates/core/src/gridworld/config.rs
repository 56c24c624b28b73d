use std::fmt::Write as _;

use crate::automata::Symbol;
use crate::error::{Error, Result};

pub type Cell = (usize, usize);

/// Grid layout with one optional item per cell. Cells are `(x, y)` with
/// `y = 0` on the top row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    /// Symbol names; items and the empty-cell symbol index into this list.
    pub alphabet: Vec<String>,
    /// Row-major item symbol per cell.
    items: Vec<Option<Symbol>>,
    pub empty: Symbol,
    pub start: Cell,
    pub horizon: usize,
}

pub const MAP_HEADER: &str = "grid-map 1";

impl GridConfig {
    pub fn new(
        width: usize,
        height: usize,
        alphabet: Vec<String>,
        items: &[(Cell, Symbol)],
        empty: Symbol,
        start: Cell,
        horizon: usize,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::input("grid must have at least one cell"));
        }
        if horizon == 0 {
            return Err(Error::input("horizon must be positive"));
        }
        if empty >= alphabet.len() {
            return Err(Error::input("empty-cell symbol is not in the alphabet"));
        }
        if start.0 >= width || start.1 >= height {
            return Err(Error::input(format!("start {start:?} outside the grid")));
        }
        let mut cells = vec![None; width * height];
        for &((x, y), s) in items {
            if x >= width || y >= height {
                return Err(Error::input(format!("item at ({x}, {y}) outside the grid")));
            }
            if s >= alphabet.len() || s == empty {
                return Err(Error::input(format!("item symbol {s} is not an item of the alphabet")));
            }
            let slot = &mut cells[y * width + x];
            if slot.is_some() {
                return Err(Error::input(format!("two items at ({x}, {y})")));
            }
            *slot = Some(s);
        }
        for s in 0..alphabet.len() {
            if s != empty && !cells.contains(&Some(s)) {
                return Err(Error::input(format!("symbol {:?} is never placed", alphabet[s])));
            }
        }
        Ok(Self {
            width,
            height,
            alphabet,
            items: cells,
            empty,
            start,
            horizon,
        })
    }

    /// The 5x5 benchmark map: items `a`..`d`, start in the top-left corner,
    /// horizon 60, and `e` for empty cells.
    pub fn default_map() -> Self {
        let alphabet = crate::tasks::task_alphabet();
        Self::new(
            5,
            5,
            alphabet,
            &[((1, 2), 0), ((2, 4), 1), ((2, 1), 2), ((4, 3), 3)],
            4,
            (0, 0),
            60,
        )
        .expect("default map is valid")
    }

    pub fn num_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| (x, y)))
    }

    pub fn cell_index(&self, (x, y): Cell) -> usize {
        y * self.width + x
    }

    /// Ground-truth symbol observed on a cell.
    pub fn label(&self, (x, y): Cell) -> Result<Symbol> {
        if x >= self.width || y >= self.height {
            return Err(Error::input(format!("cell ({x}, {y}) outside the {}x{} grid", self.width, self.height)));
        }
        Ok(self.items[y * self.width + x].unwrap_or(self.empty))
    }

    /// Coordinates scaled to `[0, 1]`.
    pub fn encode(&self, (x, y): Cell) -> Vec<f64> {
        let sx = (self.width.max(2) - 1) as f64;
        let sy = (self.height.max(2) - 1) as f64;
        vec![x as f64 / sx, y as f64 / sy]
    }

    /// Nearest cell to an encoded position.
    pub fn decode(&self, s: &[f64]) -> Result<Cell> {
        if s.len() != 2 || s.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("state encoding must be two finite coordinates"));
        }
        let sx = (self.width.max(2) - 1) as f64;
        let sy = (self.height.max(2) - 1) as f64;
        let x = (s[0] * sx).round();
        let y = (s[1] * sy).round();
        if x < 0.0 || y < 0.0 || x as usize >= self.width || y as usize >= self.height {
            return Err(Error::input(format!("encoded state {s:?} outside the grid")));
        }
        Ok((x as usize, y as usize))
    }

    pub const STATE_DIM: usize = 2;

    /// Plain-text map: a header, `key value` lines, then one line per row
    /// with `.` for empty cells, `S` for the (empty) start cell and a
    /// single-character symbol name for items.
    pub fn to_map_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{MAP_HEADER}").unwrap();
        writeln!(out, "alphabet {}", self.alphabet.join(" ")).unwrap();
        writeln!(out, "empty {}", self.alphabet[self.empty]).unwrap();
        writeln!(out, "horizon {}", self.horizon).unwrap();
        for y in 0..self.height {
            let row: String = (0..self.width)
                .map(|x| match self.items[y * self.width + x] {
                    Some(s) => self.alphabet[s].chars().next().unwrap(),
                    None if (x, y) == self.start => 'S',
                    None => '.',
                })
                .collect();
            writeln!(out, "{row}").unwrap();
        }
        out
    }

    pub fn from_map_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap().trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, MAP_HEADER)) => {}
            Some((n, other)) => return Err(Error::parse(n, format!("expected `{MAP_HEADER}`, found `{other}`"))),
            None => return Err(Error::parse(1, "empty map file")),
        }
        let mut alphabet: Option<Vec<String>> = None;
        let mut empty_name: Option<String> = None;
        let mut horizon = 60;
        let mut rows: Vec<(usize, &str)> = Vec::new();
        for (n, line) in lines {
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match key {
                "alphabet" if rows.is_empty() => {
                    let names: Vec<String> = rest.split_whitespace().map(String::from).collect();
                    if names.iter().any(|s| s.chars().count() != 1 || s == "." || s == "S") {
                        return Err(Error::parse(n, "map symbols must be single characters other than `.` and `S`"));
                    }
                    alphabet = Some(names);
                }
                "empty" if rows.is_empty() => empty_name = Some(rest.trim().to_string()),
                "horizon" if rows.is_empty() => {
                    horizon = rest.trim().parse().map_err(|_| Error::parse(n, format!("bad horizon `{rest}`")))?;
                }
                _ if rest.is_empty() => rows.push((n, line)),
                _ => return Err(Error::parse(n, format!("unknown key `{key}`"))),
            }
        }
        let alphabet = alphabet.ok_or_else(|| Error::parse(1, "missing `alphabet` line"))?;
        let empty_name = empty_name.ok_or_else(|| Error::parse(1, "missing `empty` line"))?;
        let empty = alphabet
            .iter()
            .position(|s| *s == empty_name)
            .ok_or_else(|| Error::parse(1, format!("empty symbol `{empty_name}` not in alphabet")))?;
        let height = rows.len();
        let width = rows.first().map_or(0, |(_, r)| r.chars().count());
        let mut items = Vec::new();
        let mut start = None;
        for (y, (n, row)) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::parse(*n, "rows have different widths"));
            }
            for (x, ch) in row.chars().enumerate() {
                match ch {
                    '.' => {}
                    'S' => {
                        if start.replace((x, y)).is_some() {
                            return Err(Error::parse(*n, "more than one start cell"));
                        }
                    }
                    c => {
                        let s = alphabet
                            .iter()
                            .position(|a| a.starts_with(c))
                            .ok_or_else(|| Error::parse(*n, format!("unknown cell character `{c}`")))?;
                        items.push(((x, y), s));
                    }
                }
            }
        }
        let start = start.ok_or_else(|| Error::parse(1, "missing start cell `S`"))?;
        Self::new(width, height, alphabet, &items, empty, start, horizon)
    }
}
