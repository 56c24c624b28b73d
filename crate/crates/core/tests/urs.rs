use std::collections::BTreeSet;

use nrm_core::automata::{random_machine, MooreMachine, Symbol, SymbolMap};
use nrm_core::tasks::{task_alphabet, TASKS};
use nrm_core::urs::{
    enumerate_maps, find_urs, find_urs_with, is_working, map_count, urs_oracle_bounded, urs_oracle_exact, UrsOptions,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_string(rng: &mut ChaCha8Rng, k: usize, max_len: usize) -> Vec<Symbol> {
    let n = rng.gen_range(0..=max_len);
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

fn random_map(rng: &mut ChaCha8Rng, k: usize) -> SymbolMap {
    SymbolMap::new((0..k).map(|_| rng.gen_range(0..k)).collect())
}

fn table(m: &MooreMachine) -> Vec<Vec<usize>> {
    (0..m.num_states()).map(|q| (0..m.num_symbols()).map(|p| m.next(q, p)).collect()).collect()
}

fn rebuild(m: &MooreMachine, t: Vec<Vec<usize>>) -> MooreMachine {
    MooreMachine::new(m.alphabet().to_vec(), m.output_classes().to_vec(), m.initial(), t, m.outputs().to_vec()).unwrap()
}

fn strings_up_to(k: usize, len: usize) -> Vec<Vec<Symbol>> {
    let mut all = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..len {
        layer = layer
            .iter()
            .flat_map(|x: &Vec<Symbol>| (0..k).map(move |p| [x.as_slice(), &[p]].concat()))
            .collect();
        all.extend(layer.iter().cloned());
    }
    all
}

#[test]
fn map_enumeration_sizes() {
    assert_eq!(enumerate_maps(5).count(), 3125);
    assert_eq!(map_count(5), 3125);
    assert_eq!(enumerate_maps(1).count(), 1);
    assert_eq!(enumerate_maps(2).count(), 4);
    let distinct: BTreeSet<Vec<usize>> = enumerate_maps(3).map(|m| m.image().to_vec()).collect();
    assert_eq!(distinct.len(), 27);
    assert!(enumerate_maps(4).next().unwrap().is_identity());
}

#[test]
fn working_map_examples() {
    let m = TASKS[0].machine();
    let swap = SymbolMap::new(vec![1, 0, 2, 3, 4]);
    assert!(is_working(&m, &swap, &[vec![0, 1], vec![1], vec![4, 4, 0]]).unwrap());
    let a_to_c = SymbolMap::new(vec![2, 1, 2, 3, 4]);
    assert!(!is_working(&m, &a_to_c, &[vec![0]]).unwrap());
    assert!(is_working(&m, &a_to_c, &[vec![3, 4]]).unwrap());
    assert!(is_working(&m, &a_to_c, &[]).unwrap());
    assert!(is_working(&m, &SymbolMap::identity(3), &[vec![0]]).is_err());
}

#[test]
fn search_matches_the_exact_oracle_on_every_task() {
    for t in &TASKS {
        let m = t.machine();
        let report = find_urs(&m).unwrap();
        let oracle = urs_oracle_exact(&m).unwrap();
        assert_eq!(report.shortcuts, oracle, "task {}", t.id);
        assert_eq!(report.count(), t.urs_count, "task {}", t.id);
        assert!(report.shortcuts.iter().any(SymbolMap::is_identity));
    }
}

#[test]
fn counts_by_task() {
    let counts: Vec<usize> = TASKS.iter().map(|t| find_urs(&t.machine()).unwrap().count()).collect();
    assert_eq!(counts, vec![54, 24, 27, 4, 8, 8, 4, 4]);
}

#[test]
fn search_matches_the_exact_oracle_on_random_machines() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..50 {
        let n = rng.gen_range(1..=5);
        let k = rng.gen_range(1..=4);
        let c = rng.gen_range(1..=3);
        let m = random_machine(&mut rng, n, k, c).minimize();
        let found = find_urs(&m).unwrap().shortcuts;
        assert_eq!(found, urs_oracle_exact(&m).unwrap(), "case {case}");
    }
}

#[test]
fn bounded_oracle_matches_string_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let n = rng.gen_range(1..=4);
        let m = random_machine(&mut rng, n, 3, 2);
        let data = strings_up_to(3, 3);
        let mut expected: Vec<SymbolMap> = enumerate_maps(3).filter(|a| is_working(&m, a, &data).unwrap()).collect();
        expected.sort();
        assert_eq!(urs_oracle_bounded(&m, 3).unwrap(), expected);
    }
}

#[test]
fn bounded_oracle_at_squared_size_is_exact_on_task_one() {
    let m = TASKS[0].machine();
    let n = m.num_states();
    assert_eq!(urs_oracle_bounded(&m, n * n).unwrap().len(), 54);
    assert!(urs_oracle_bounded(&m, 1).unwrap().len() > 54);
}

#[test]
fn working_sets_shrink_as_strings_grow() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..60 {
        let (n, k) = (rng.gen_range(1..=5), rng.gen_range(1..=3));
        let m = random_machine(&mut rng, n, k, 2);
        let sets: Vec<BTreeSet<SymbolMap>> =
            (1..=4).map(|l| urs_oracle_bounded(&m, l).unwrap().into_iter().collect()).collect();
        for w in sets.windows(2) {
            assert!(w[1].is_subset(&w[0]));
        }
        let found: BTreeSet<SymbolMap> = find_urs(&m).unwrap().shortcuts.into_iter().collect();
        for s in &sets {
            assert!(found.is_subset(s));
        }
    }
}

#[test]
fn shortcuts_are_closed_under_composition() {
    for t in &TASKS {
        let set: BTreeSet<SymbolMap> = find_urs(&t.machine()).unwrap().shortcuts.into_iter().collect();
        for a in &set {
            for b in &set {
                assert!(set.contains(&a.compose(b)), "task {}", t.id);
            }
        }
    }
}

#[test]
fn pruning_does_not_change_the_result() {
    let off = UrsOptions {
        skip_absorbing: false,
        skip_self_loops: false,
        ..UrsOptions::default()
    };
    for t in &TASKS {
        let m = t.machine();
        assert_eq!(find_urs_with(&m, off).unwrap().shortcuts, find_urs(&m).unwrap().shortcuts, "task {}", t.id);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..30 {
        let (n, k) = (rng.gen_range(1..=5), rng.gen_range(1..=3));
        let m = random_machine(&mut rng, n, k, 2);
        assert_eq!(find_urs_with(&m, off).unwrap().shortcuts, find_urs(&m).unwrap().shortcuts);
    }
}

#[test]
fn parallel_search_matches_serial() {
    let m = TASKS[1].machine();
    let par = UrsOptions { jobs: 3, ..UrsOptions::default() };
    assert_eq!(find_urs_with(&m, par).unwrap().shortcuts, find_urs(&m).unwrap().shortcuts);
}

#[test]
fn suffixes_after_absorption_keep_working() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut cases = 0;
    while cases < 60 {
        let n = rng.gen_range(2..=5);
        let k = rng.gen_range(2..=3);
        let base = random_machine(&mut rng, n, k, 2);
        // Make two states absorbing so that runs actually get stuck.
        let mut t = table(&base);
        for q in [n - 1, n - 2] {
            t[q] = vec![q; k];
        }
        let m = rebuild(&base, t);
        let alpha = random_map(&mut rng, k);
        let x = random_string(&mut rng, k, 6);
        let q = m.delta_star(m.initial(), &x);
        let r = m.delta_star(m.initial(), &alpha.apply_string(&x));
        if !(m.is_absorbing(q) && m.is_absorbing(r)) || !is_working(&m, &alpha, &[x.clone()]).unwrap() {
            continue;
        }
        cases += 1;
        for _ in 0..100 {
            let y = random_string(&mut rng, k, 6);
            assert!(is_working(&m, &alpha, &[[x.as_slice(), &y].concat()]).unwrap());
        }
    }
}

#[test]
fn pumping_self_loops_keeps_working() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut cases = 0;
    while cases < 60 {
        let n = rng.gen_range(1..=5);
        let k = rng.gen_range(2..=3);
        let base = random_machine(&mut rng, n, k, 2);
        let alpha = random_map(&mut rng, k);
        let x = random_string(&mut rng, k, 4);
        let p = rng.gen_range(0..k);
        let q = base.delta_star(base.initial(), &x);
        let r = base.delta_star(base.initial(), &alpha.apply_string(&x));
        // Force the self-loops unless they would conflict on one state.
        let mut t = table(&base);
        if q == r && p != alpha.apply(p) && t[q][p] != q {
            continue;
        }
        t[q][p] = q;
        t[r][alpha.apply(p)] = r;
        let m = rebuild(&base, t);
        if m.delta_star(m.initial(), &x) != q || m.delta_star(m.initial(), &alpha.apply_string(&x)) != r {
            continue;
        }
        let z = random_string(&mut rng, k, 4);
        if !is_working(&m, &alpha, &[[x.as_slice(), &z].concat()]).unwrap() {
            continue;
        }
        cases += 1;
        for reps in 1..=5 {
            let pumped: Vec<Symbol> = x.iter().copied().chain(std::iter::repeat(p).take(reps)).chain(z.iter().copied()).collect();
            assert!(is_working(&m, &alpha, &[pumped]).unwrap());
        }
    }
}

#[test]
fn relabeled_alphabet_permutes_the_shortcuts() {
    // Renaming the symbols of a task conjugates its shortcut set.
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let m = TASKS[2].machine();
    let mut perm: Vec<usize> = (0..5).collect();
    perm.shuffle(&mut rng);
    let sigma = SymbolMap::new(perm.clone());
    let mut inverse = vec![0; 5];
    for (i, &p) in perm.iter().enumerate() {
        inverse[p] = i;
    }
    let sigma_inv = SymbolMap::new(inverse);
    let renamed = m.relabel(&sigma_inv).unwrap();
    let expected: BTreeSet<SymbolMap> =
        find_urs(&m).unwrap().shortcuts.iter().map(|a| sigma.compose(&a.compose(&sigma_inv))).collect();
    let got: BTreeSet<SymbolMap> = find_urs(&renamed).unwrap().shortcuts.into_iter().collect();
    assert_eq!(got, expected);
    assert_eq!(task_alphabet().len(), 5);
}
