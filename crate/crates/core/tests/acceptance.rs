//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use nrm_core::automata::{random_machine, MooreMachine, Symbol, SymbolMap};
use nrm_core::cli::{dispatch, EXIT_OK};
use nrm_core::diff::{max_rel_error, Activation, Bound, Lstm, Mlp, ParamSet, Tape, Tensor, Var};
use nrm_core::gridworld::{optimal_trace, synth_dataset, EpisodeTrace, GridConfig, Policy, DEFAULT_EPS};
use nrm_core::ltlf::compile_str;
use nrm_core::nrm::{
    forward_symbols, ground_offline, pure_learning, urs_corrected_accuracy, Grounder, GroundingConfig, ProbMachine,
    PureLearningConfig, GROUNDER_HIDDEN,
};
use nrm_core::rl::{run_experiment, AgentKind, TrainConfig};
use nrm_core::tasks::TASKS;
use nrm_core::urs::{find_urs, find_urs_with, is_working, urs_oracle_bounded, urs_oracle_exact, UrsOptions};
use nrm_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("shortcut search is exact", urs_exactness),
        ("shortcut search speedup", urs_speedup),
        ("shortcut properties", urs_properties),
        ("forward pass exactness", forward_exactness),
        ("gradient checks", gradient_checks),
        ("offline grounding", offline_grounding),
        ("pure machine learning", pure_machine_learning),
        ("agent ordering", agent_ordering),
        ("reward scaling", reward_scaling),
        ("cli determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} {:>2} {name}: {} [{:.1?}]", i + 1, o.detail, t0.elapsed());
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn urs_exactness() -> Outcome {
    let mut counts = Vec::new();
    let mut slowest = Duration::ZERO;
    let mut exact = true;
    for t in &TASKS {
        let m = t.machine();
        let t0 = Instant::now();
        let found = find_urs(&m).unwrap();
        slowest = slowest.max(t0.elapsed());
        exact &= found.shortcuts == urs_oracle_exact(&m).unwrap();
        counts.push(found.count());
    }
    let expected = vec![54, 24, 27, 4, 8, 8, 4, 4];
    let pass = exact && counts == expected && slowest <= Duration::from_secs(60);
    outcome(pass, format!("counts {counts:?}, oracle agrees {exact}, slowest task {slowest:.2?}"))
}

fn min_time<F: FnMut()>(repeats: usize, mut f: F) -> Duration {
    (0..repeats)
        .map(|_| {
            let t0 = Instant::now();
            f();
            t0.elapsed()
        })
        .min()
        .unwrap()
}

fn urs_speedup() -> Outcome {
    let mut ratios = Vec::new();
    for t in &TASKS {
        let m = t.machine();
        let n = m.num_states();
        let fast = min_time(5, || {
            find_urs(&m).unwrap();
        });
        let slow = min_time(2, || {
            urs_oracle_bounded(&m, n * n).unwrap();
        });
        ratios.push(slow.as_secs_f64() / fast.as_secs_f64().max(1e-9));
    }
    let worst = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.0}x")).collect();
    outcome(worst >= 50.0, format!("ratios {}", shown.join(" ")))
}

fn random_string(rng: &mut ChaCha8Rng, k: usize, max_len: usize) -> Vec<Symbol> {
    let n = rng.gen_range(0..=max_len);
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

fn random_map(rng: &mut ChaCha8Rng, k: usize) -> SymbolMap {
    SymbolMap::new((0..k).map(|_| rng.gen_range(0..k)).collect())
}

fn with_table(m: &MooreMachine, edit: impl FnOnce(&mut Vec<Vec<usize>>)) -> MooreMachine {
    let mut t: Vec<Vec<usize>> =
        (0..m.num_states()).map(|q| (0..m.num_symbols()).map(|p| m.next(q, p)).collect()).collect();
    edit(&mut t);
    MooreMachine::new(m.alphabet().to_vec(), m.output_classes().to_vec(), m.initial(), t, m.outputs().to_vec()).unwrap()
}

fn urs_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cases = 60;
    let mut violations = [0usize; 5];

    // Working sets shrink with L and always contain the search result.
    for _ in 0..cases {
        let (n, k) = (rng.gen_range(1..=5), rng.gen_range(1..=3));
        let m = random_machine(&mut rng, n, k, 2);
        let sets: Vec<BTreeSet<SymbolMap>> =
            (1..=4).map(|l| urs_oracle_bounded(&m, l).unwrap().into_iter().collect()).collect();
        if sets.windows(2).any(|w| !w[1].is_subset(&w[0])) {
            violations[0] += 1;
        }
        let found: BTreeSet<SymbolMap> = find_urs(&m).unwrap().shortcuts.into_iter().collect();
        if sets.iter().any(|s| !found.is_subset(s)) {
            violations[1] += 1;
        }
    }

    // Once both runs are absorbed, any suffix keeps the map working.
    let mut done = 0;
    while done < cases {
        let n = rng.gen_range(2..=5);
        let k = rng.gen_range(2..=3);
        let base = random_machine(&mut rng, n, k, 2);
        let m = with_table(&base, |t| {
            for q in [n - 1, n - 2] {
                t[q] = vec![q; k];
            }
        });
        let alpha = random_map(&mut rng, k);
        let x = random_string(&mut rng, k, 6);
        let q = m.delta_star(m.initial(), &x);
        let r = m.delta_star(m.initial(), &alpha.apply_string(&x));
        if !(m.is_absorbing(q) && m.is_absorbing(r)) || !is_working(&m, &alpha, &[x.clone()]).unwrap() {
            continue;
        }
        done += 1;
        for _ in 0..50 {
            let y = random_string(&mut rng, k, 6);
            if !is_working(&m, &alpha, &[[x.as_slice(), &y].concat()]).unwrap() {
                violations[2] += 1;
            }
        }
    }

    // Repeating a symbol that loops on both runs keeps the map working.
    let mut done = 0;
    while done < cases {
        let n = rng.gen_range(1..=5);
        let k = rng.gen_range(2..=3);
        let base = random_machine(&mut rng, n, k, 2);
        let alpha = random_map(&mut rng, k);
        let x = random_string(&mut rng, k, 4);
        let p = rng.gen_range(0..k);
        let q = base.delta_star(base.initial(), &x);
        let r = base.delta_star(base.initial(), &alpha.apply_string(&x));
        if q == r && p != alpha.apply(p) && base.next(q, p) != q {
            continue;
        }
        let m = with_table(&base, |t| {
            t[q][p] = q;
            t[r][alpha.apply(p)] = r;
        });
        if m.delta_star(m.initial(), &x) != q || m.delta_star(m.initial(), &alpha.apply_string(&x)) != r {
            continue;
        }
        let z = random_string(&mut rng, k, 4);
        if !is_working(&m, &alpha, &[[x.as_slice(), &z].concat()]).unwrap() {
            continue;
        }
        done += 1;
        for reps in 1..=5 {
            let pumped: Vec<Symbol> =
                x.iter().copied().chain(std::iter::repeat(p).take(reps)).chain(z.iter().copied()).collect();
            if !is_working(&m, &alpha, &[pumped]).unwrap() {
                violations[3] += 1;
            }
        }
    }

    let off = UrsOptions {
        skip_absorbing: false,
        skip_self_loops: false,
        ..UrsOptions::default()
    };
    for t in &TASKS {
        let m = t.machine();
        if find_urs_with(&m, off).unwrap().shortcuts != find_urs(&m).unwrap().shortcuts {
            violations[4] += 1;
        }
    }
    let pass = violations.iter().all(|&v| v == 0);
    outcome(
        pass,
        format!(
            "{cases} cases each; violations monotone {} bound {} suffix {} pumping {} pruning {}",
            violations[0], violations[1], violations[2], violations[3], violations[4]
        ),
    )
}

fn one_hot(k: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; k];
    v[i] = 1.0;
    v
}

fn forward_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    let mut worst_row: f64 = 0.0;
    for _ in 0..100 {
        let (n, k) = (rng.gen_range(1..=6), rng.gen_range(1..=5));
        let m = random_machine(&mut rng, n, k, 3);
        let len = rng.gen_range(1..=15);
        let x: Vec<usize> = (0..len).map(|_| rng.gen_range(0..k)).collect();
        let symbols = Tensor::from_rows(&x.iter().map(|&p| one_hot(k, p)).collect::<Vec<_>>()).unwrap();
        let out = forward_symbols(&ProbMachine::from_machine(&m), &symbols).unwrap();
        let run = m.run_string(&x).unwrap();
        let c = m.output_classes().len();
        let exact_states: Vec<f64> = run.states[1..].iter().flat_map(|&q| one_hot(n, q)).collect();
        let exact_rewards: Vec<f64> = run.outputs.iter().flat_map(|&o| one_hot(c, o)).collect();
        if out.states.data() != exact_states.as_slice() || out.rewards.data() != exact_rewards.as_slice() {
            mismatches += 1;
        }
        for t in [&out.states, &out.rewards, &out.symbols] {
            for r in 0..t.rows() {
                worst_row = worst_row.max((t.row(r).iter().sum::<f64>() - 1.0).abs());
            }
        }
    }
    outcome(
        mismatches == 0 && worst_row <= 1e-9,
        format!("100 pairs, {mismatches} mismatches, worst row-sum error {worst_row:.1e}"),
    )
}

fn random(shape: &[usize], seed: u64) -> Tensor {
    Tensor::uniform(shape, 1.0, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn weigh<'t>(v: Var<'t>) -> Result<Var<'t>> {
    let w = random(&v.shape(), 999);
    Ok(v.mul_const(&w)?.sum())
}

/// Central differences over every parameter of several parameter sets.
fn param_rel_error<F>(sets: &mut [ParamSet], f: F) -> f64
where
    F: for<'t> Fn(&'t Tape, &[Bound<'t>]) -> Result<Var<'t>>,
{
    let analytic: Vec<Vec<Tensor>> = {
        let tape = Tape::new();
        let bounds: Vec<Bound> = sets.iter().map(|s| s.bind(&tape)).collect();
        let grads = tape.backward(f(&tape, &bounds).unwrap()).unwrap();
        bounds.iter().map(|b| b.grads(&grads)).collect()
    };
    let eval = |sets: &[ParamSet]| {
        let tape = Tape::new();
        let bounds: Vec<Bound> = sets.iter().map(|s| s.bind_frozen(&tape)).collect();
        let v = f(&tape, &bounds).unwrap().item();
        v
    };
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for s in 0..sets.len() {
        for k in 0..sets[s].len() {
            for i in 0..sets[s].tensors()[k].len() {
                let orig = sets[s].tensors()[k].data()[i];
                sets[s].tensors_mut()[k].data_mut()[i] = orig + h;
                let up = eval(sets);
                sets[s].tensors_mut()[k].data_mut()[i] = orig - h;
                let down = eval(sets);
                sets[s].tensors_mut()[k].data_mut()[i] = orig;
                let numeric = (up - down) / (2.0 * h);
                let a = analytic[s][k].data()[i];
                worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-2));
            }
        }
    }
    worst
}

fn gradient_checks() -> Outcome {
    let x = random(&[3, 4], 1);
    let y = random(&[3, 4], 2);
    let pos = random(&[3, 4], 3).map(|v| v.abs() + 0.2);
    let col = random(&[4, 2], 4);
    let row = random(&[4], 5);
    let wide = random(&[3, 5], 6);
    let mut errors: Vec<(&str, f64)> = vec![
        ("add", max_rel_error(&[x.clone(), y.clone()], |_, v| weigh(v[0].add(v[1])?)).unwrap()),
        ("sub", max_rel_error(&[x.clone(), y.clone()], |_, v| weigh(v[0].sub(v[1])?)).unwrap()),
        ("mul", max_rel_error(&[x.clone(), y.clone()], |_, v| weigh(v[0].mul(v[1])?)).unwrap()),
        ("scale", max_rel_error(&[x.clone()], |_, v| weigh(v[0].scale(-2.5))).unwrap()),
        ("add_scalar", max_rel_error(&[x.clone()], |_, v| weigh(v[0].add_scalar(0.7).square())).unwrap()),
        ("mul_const", max_rel_error(&[x.clone()], |_, v| weigh(v[0].mul_const(&y)?)).unwrap()),
        ("tanh", max_rel_error(&[x.clone()], |_, v| weigh(v[0].tanh())).unwrap()),
        ("relu", max_rel_error(&[x.clone()], |_, v| weigh(v[0].relu())).unwrap()),
        ("sigmoid", max_rel_error(&[x.clone()], |_, v| weigh(v[0].sigmoid())).unwrap()),
        ("exp", max_rel_error(&[x.clone()], |_, v| weigh(v[0].exp())).unwrap()),
        ("ln", max_rel_error(&[pos], |_, v| weigh(v[0].ln())).unwrap()),
        ("square", max_rel_error(&[x.clone()], |_, v| weigh(v[0].square())).unwrap()),
        ("matmul", max_rel_error(&[x.clone(), col.clone()], |_, v| weigh(v[0].matmul(v[1])?)).unwrap()),
        ("add_row", max_rel_error(&[x.clone(), row], |_, v| weigh(v[0].add_row(v[1])?)).unwrap()),
        (
            "concat",
            max_rel_error(&[x.clone(), random(&[3, 2], 7)], |_, v| weigh(Var::concat(&[v[0], v[1]])?)).unwrap(),
        ),
        ("slice_cols", max_rel_error(&[x.clone()], |_, v| weigh(v[0].slice_cols(1, 2)?)).unwrap()),
        ("slice_rows", max_rel_error(&[x.clone()], |_, v| weigh(v[0].slice_rows(1, 2)?)).unwrap()),
        ("reshape", max_rel_error(&[x.clone()], |_, v| weigh(v[0].reshape(&[2, 6])?)).unwrap()),
        ("sum", max_rel_error(&[x.clone()], |_, v| Ok(v[0].square().sum())).unwrap()),
        ("mean", max_rel_error(&[x.clone()], |_, v| Ok(v[0].square().mean())).unwrap()),
        ("sum_cols", max_rel_error(&[x.clone()], |_, v| weigh(v[0].square().sum_cols())).unwrap()),
        ("pick", max_rel_error(&[x.clone()], |_, v| weigh(v[0].pick(&[0, 3, 1])?)).unwrap()),
        ("softmax", max_rel_error(&[wide.clone()], |_, v| weigh(v[0].softmax())).unwrap()),
        ("log_softmax", max_rel_error(&[wide.clone()], |_, v| weigh(v[0].log_softmax())).unwrap()),
        (
            "cross_entropy_logits",
            max_rel_error(&[wide.clone()], |_, v| v[0].cross_entropy_logits(&[4, 0, 2])).unwrap(),
        ),
        (
            "cross_entropy_probs",
            max_rel_error(&[wide.clone()], |_, v| v[0].softmax().cross_entropy_probs(&[1, 1, 3])).unwrap(),
        ),
    ];
    for (name, tau) in [("tau_softmax 1", 1.0), ("tau_softmax 0.5", 0.5), ("tau_softmax 0.1", 0.1)] {
        errors.push((name, max_rel_error(&[wide.clone()], |_, v| weigh(v[0].tau_softmax(tau)?)).unwrap()));
    }
    errors.push((
        "transition",
        max_rel_error(&[random(&[2, 3], 11), random(&[2, 4], 12), random(&[4, 3, 3], 13)], |_, v| {
            let table = v[2].reshape(&[12, 3])?.softmax().reshape(&[4, 3, 3])?;
            weigh(v[0].softmax().transition(v[1].softmax(), table)?)
        })
        .unwrap(),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut mlp_params = ParamSet::new();
    let mlp = Mlp::new(&mut mlp_params, &[3, 5, 2], vec![Activation::Tanh], true, &mut rng).unwrap();
    let xs = random(&[4, 3], 22);
    errors.push((
        "mlp",
        param_rel_error(&mut [mlp_params], |tape, b| {
            mlp.forward(&b[0], tape.constant(xs.clone()))?.cross_entropy_probs(&[0, 1, 1, 0])
        }),
    ));
    let mut lstm_params = ParamSet::new();
    let lstm = Lstm::new(&mut lstm_params, 3, 4, 2, &mut rng);
    let seq: Vec<Tensor> = (0..3).map(|t| random(&[2, 3], 40 + t)).collect();
    errors.push((
        "lstm",
        param_rel_error(&mut [lstm_params], |tape, b| {
            let inputs: Vec<Var> = seq.iter().map(|x| tape.constant(x.clone())).collect();
            let (hs, _) = lstm.forward_seq(&b[0], &inputs, lstm.zero_state(2).bind(tape))?;
            weigh(hs[2])
        }),
    ));

    // Grounder, relaxed machine and reward-class likelihood over five steps.
    let (states, symbols, classes, steps, batch) = (3, 4, 2, 5, 2);
    let g = Grounder::new(2, symbols, 6, 0.0, &mut rng);
    let mut machine = ParamSet::new();
    let table = machine.push(random(&[symbols, states, states], 52));
    let rewards = machine.push(random(&[states, classes], 53));
    let inputs = random(&[steps * batch, 2], 54);
    let targets: Vec<Vec<usize>> = (0..steps).map(|t| vec![t % 2, (t / 2) % 2]).collect();
    let net = g.net.clone();
    errors.push((
        "composite",
        param_rel_error(&mut [g.params.clone(), machine], |tape, b| {
            let probs = net.forward(&b[0], tape.constant(inputs.clone()))?;
            let t = b[1].get(table).tau_softmax(0.5)?;
            let r = b[1].get(rewards).tau_softmax(0.5)?;
            let mut q = tape.constant(Tensor::from_rows(&vec![vec![1.0, 0.0, 0.0]; batch])?);
            let mut total = tape.constant(Tensor::scalar(0.0));
            for (step, target) in targets.iter().enumerate() {
                q = q.transition(probs.slice_rows(step * batch, batch)?, t)?;
                total = total.add(q.matmul(r)?.cross_entropy_probs(target)?)?;
            }
            Ok(total)
        }),
    ));

    let (worst_name, worst) = errors.iter().copied().fold(("", 0.0), |acc, e| if e.1 > acc.1 { e } else { acc });
    outcome(worst <= 1e-4, format!("{} checks, worst {worst:.1e} ({worst_name})", errors.len()))
}

fn offline_grounding() -> Outcome {
    let grid = GridConfig::default_map();
    let m = TASKS[0].machine();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let data = synth_dataset(&grid, &m, Policy::Mixture(DEFAULT_EPS), 500, &mut rng).unwrap();
    let cells: Vec<(usize, usize)> =
        (0..1000).map(|_| (rng.gen_range(0..grid.width), rng.gen_range(0..grid.height))).collect();
    let states: Vec<Vec<f64>> = cells.iter().map(|&c| grid.encode(c)).collect();
    let labels: Vec<usize> = cells.iter().map(|&c| grid.label(c).unwrap()).collect();
    let cfg = GroundingConfig { epochs: 100, ..GroundingConfig::default() };
    let t0 = Instant::now();
    let (g, log) =
        ground_offline(&ProbMachine::from_machine(&m), &data, GROUNDER_HIDDEN, &cfg, 1, &mut rng).unwrap();
    let elapsed = t0.elapsed();
    let shortcuts = find_urs(&m).unwrap().shortcuts;
    let acc = urs_corrected_accuracy(&g, &states, &labels, &shortcuts).unwrap();
    outcome(
        acc >= 0.90 && elapsed <= Duration::from_secs(600),
        format!("accuracy {acc:.3} after {} epochs in {elapsed:.1?}", log.losses.len()),
    )
}

fn pure_machine_learning() -> Outcome {
    let alphabet = vec!["a".to_string(), "b".to_string()];
    let target = compile_str("F(a)", &alphabet).unwrap();
    let trace = |rng: &mut ChaCha8Rng| {
        let n = rng.gen_range(1..=10);
        let x: Vec<usize> = (0..n).map(|_| if rng.gen_bool(0.2) { 0 } else { 1 }).collect();
        let run = target.run_string(&x).unwrap();
        EpisodeTrace {
            states: x.iter().map(|&p| one_hot(2, p)).collect(),
            classes: run.outputs.clone(),
            rewards: vec![0.0; n],
            symbols: x,
        }
    };
    let mut recovered = 0;
    let mut sizes = Vec::new();
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<EpisodeTrace> = (0..1000).map(|_| trace(&mut rng)).collect();
        let cfg = PureLearningConfig { states: 3, ..PureLearningConfig::default() };
        let learned = pure_learning(&data, alphabet.clone(), target.output_classes().to_vec(), &cfg, &mut rng).unwrap();
        let m = learned.machine.extract_machine().unwrap().minimize();
        sizes.push(m.num_states());
        if m.equivalent(&target).unwrap_or(false) {
            recovered += 1;
        }
    }
    outcome(recovered >= 4, format!("{recovered}/5 seeds equivalent, minimized sizes {sizes:?}"))
}

fn agent_ordering() -> Outcome {
    let grid = GridConfig::default_map();
    let m = TASKS[0].machine();
    let cfg = TrainConfig {
        episodes: 3000,
        seeds: vec![0, 1, 2],
        ..TrainConfig::default()
    };
    let mean = |agent| run_experiment(&grid, &m, agent, &cfg, 1).unwrap().final_mean();
    let (rm, nrm, rnn) = (mean(AgentKind::Rm), mean(AgentKind::Nrm), mean(AgentKind::Rnn));
    let pass = rm >= nrm && nrm >= rnn && nrm >= 0.85 * rm;
    outcome(pass, format!("final means rm {rm:.2} nrm {nrm:.2} rnn {rnn:.2}"))
}

fn reward_scaling() -> Outcome {
    let grid = GridConfig::default_map();
    let returns: Vec<f64> = TASKS.iter().map(|t| optimal_trace(&grid, &t.machine()).unwrap().episode_return()).collect();
    let pass = returns.iter().all(|r| (r - 100.0).abs() <= 1e-9);
    let shown: Vec<String> = returns.iter().map(|r| format!("{r}")).collect();
    outcome(pass, format!("optimal returns {}", shown.join(" ")))
}

fn run_cli(args: &[&str]) -> bool {
    let mut sink = Vec::new();
    let mut err = Vec::new();
    dispatch(std::iter::once("nrm").chain(args.iter().copied()), &mut sink, &mut err) == EXIT_OK
}

fn files_equal(a: &Path, b: &Path) -> bool {
    let list = |d: &Path| {
        let mut names: Vec<_> = fs::read_dir(d).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        names
    };
    let names = list(a);
    names == list(b) && names.iter().all(|n| fs::read(a.join(n)).unwrap() == fs::read(b.join(n)).unwrap())
}

fn cli_determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let mut identical = 0;
    let mut total = 0;
    for task in ["1", "3", "5"] {
        let a = root.path().join(format!("urs{task}_a.csv"));
        let b = root.path().join(format!("urs{task}_b.csv"));
        let ok = run_cli(&["urs", "--task", task, "--oracle", "exact", "--out", a.to_str().unwrap()])
            && run_cli(&["urs", "--task", task, "--oracle", "exact", "--out", b.to_str().unwrap()]);
        total += 1;
        if ok && fs::read(&a).unwrap() == fs::read(&b).unwrap() {
            identical += 1;
        }
    }
    let (a, b) = (root.path().join("train_a"), root.path().join("train_b"));
    let train = |d: &Path| {
        run_cli(&["train", "--task", "1", "--agent", "rm,nrm,rnn", "--seeds", "4,5", "--episodes", "60", "--out", d.to_str().unwrap()])
    };
    total += 1;
    if train(&a) && train(&b) && files_equal(&a, &b) {
        identical += 1;
    }
    outcome(identical == total, format!("{identical}/{total} output sets bit-identical"))
}
