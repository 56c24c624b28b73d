use crate::automata::SymbolMap;

/// All `n^n` total maps on `n` symbols: the identity first, then every other
/// map in lexicographic order of its image.
pub fn enumerate_maps(n: usize) -> impl Iterator<Item = SymbolMap> {
    assert!(n >= 1, "alphabet must be non-empty");
    let identity = SymbolMap::identity(n);
    let rest = Odometer {
        digits: vec![0; n],
        done: false,
    }
    .filter(move |img| img.iter().enumerate().any(|(i, &p)| i != p))
    .map(SymbolMap::new);
    std::iter::once(identity).chain(rest)
}

/// Total number of maps, `n^n`.
pub fn map_count(n: usize) -> usize {
    n.pow(n as u32)
}

struct Odometer {
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.digits.clone();
        let n = self.digits.len();
        let mut i = n;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < n {
                break;
            }
            self.digits[i] = 0;
        }
        Some(out)
    }
}
