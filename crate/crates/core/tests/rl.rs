use nrm_core::diff::{Adam, Tape, Tensor};
use nrm_core::gridworld::{Action, EpisodeTrace, GridConfig, GridWorld};
use nrm_core::nrm::Grounder;
use nrm_core::rl::{
    a2c_update, augment_state, entropy, returns_from_csv, run_seed, smooth, AgentKind, Experiment, GrounderBuffer,
    Networks, SymbolSource, Tracker, TrainConfig, Transition, CURVE_HEADER,
};
use nrm_core::tasks::TASKS;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn oracle_symbols_track_the_exact_state() {
    let grid = GridConfig::default_map();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for t in &TASKS {
        let m = t.machine();
        let mut exact = Tracker::exact(&m);
        let mut soft = Tracker::soft(&m, SymbolSource::Oracle(grid.clone())).unwrap();
        let mut env = GridWorld::new(grid.clone(), m.clone()).unwrap();
        for _ in 0..20 {
            env.reset();
            exact.reset();
            soft.reset();
            assert_eq!(exact.vector(), soft.vector());
            while !env.is_done() {
                let step = env.step(Action::ALL[rng.gen_range(0..4)]).unwrap();
                exact.observe(&step).unwrap();
                soft.observe(&step).unwrap();
                assert_eq!(exact.vector(), soft.vector(), "task {}", t.id);
                let mut one_hot = vec![0.0; m.num_states()];
                one_hot[step.machine_state] = 1.0;
                assert_eq!(exact.vector(), one_hot);
            }
        }
    }
}

#[test]
fn grounder_tracking_keeps_a_distribution() {
    let grid = GridConfig::default_map();
    let m = TASKS[0].machine();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = Grounder::new(2, 5, 8, 0.0, &mut rng);
    let mut soft = Tracker::soft(&m, SymbolSource::Grounder(g)).unwrap();
    let mut env = GridWorld::new(grid, m.clone()).unwrap();
    env.reset();
    while !env.is_done() {
        let step = env.step(Action::ALL[rng.gen_range(0..4)]).unwrap();
        soft.observe(&step).unwrap();
        assert!((soft.vector().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
    assert!(soft.grounder_mut().is_some());
    assert!(Tracker::exact(&m).clone().grounder_mut().is_none());
}

#[test]
fn observation_widths() {
    let m = TASKS[1].machine();
    let grid = GridConfig::default_map();
    assert_eq!(Tracker::exact(&m).width(), m.num_states());
    assert_eq!(Tracker::Blind.width(), 0);
    let v = augment_state(&grid.encode((1, 2)), &Tracker::exact(&m).vector());
    assert_eq!(v.len(), GridConfig::STATE_DIM + m.num_states());
    assert_eq!(&v[..2], &[0.25, 0.5]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    assert_eq!(Networks::feedforward(v.len(), &mut rng).inputs(), v.len());
    assert!(Networks::recurrent(2, &mut rng).initial_state().is_some());
}

fn trace_with_return(r: f64) -> EpisodeTrace {
    EpisodeTrace {
        states: vec![vec![0.0, 0.0]],
        classes: vec![0],
        rewards: vec![r],
        symbols: vec![],
    }
}

#[test]
fn buffer_keeps_recent_and_best_episodes() {
    let mut buf = GrounderBuffer::new(3, 2);
    assert!(buf.is_empty());
    for r in [50.0, 100.0, 0.0, 0.0, 0.0, 10.0] {
        buf.push(trace_with_return(r));
    }
    // Best two (100, 50) plus the three most recent (0, 0, 10).
    assert_eq!(buf.len(), 5);
    assert_eq!(buf.best_return(), Some(100.0));
    let returns: Vec<f64> = buf.episodes().iter().map(|t| t.episode_return()).collect();
    assert_eq!(returns, vec![100.0, 50.0, 0.0, 0.0, 10.0]);
    let mut small = GrounderBuffer::new(2, 2);
    small.push(trace_with_return(5.0));
    small.push(trace_with_return(6.0));
    // Both episodes are recent and among the best; each is stored once.
    assert_eq!(small.len(), 2);
}

#[test]
fn value_loss_falls_on_a_fixed_reward() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut nets = Networks::feedforward(3, &mut rng);
    let cfg = TrainConfig { lr: 1e-3, ..TrainConfig::default() };
    let mut opt = Adam::new(&nets.params, cfg.lr);
    let x = Tensor::from_rows(&[vec![0.2, -0.4, 0.9]]).unwrap();
    let mut losses = Vec::new();
    for _ in 0..50 {
        let params = nets.params.clone();
        let tape = Tape::new();
        let b = params.bind(&tape);
        let out = nets.forward(&b, tape.constant(x.clone()), None).unwrap();
        let seg = [Transition {
            log_prob: out.probs.ln().pick(&[1]).unwrap().sum(),
            value: out.value,
            entropy: entropy(out.probs).unwrap(),
            reward: 1.0,
        }];
        let l = a2c_update(&tape, &b, &mut nets.params, &mut opt, &seg, 0.0, &cfg).unwrap();
        losses.push(l.value);
    }
    assert!(losses[49] < 0.5 * losses[0], "{} -> {}", losses[0], losses[49]);
}

fn short_config() -> TrainConfig {
    TrainConfig {
        episodes: 25,
        grounder_period: 10,
        grounder_epochs: 2,
        ..TrainConfig::default()
    }
}

#[test]
fn short_runs_are_reproducible() {
    let grid = GridConfig::default_map();
    let m = TASKS[0].machine();
    let cfg = short_config();
    for agent in AgentKind::ALL {
        let a = run_seed(&grid, &m, agent, &cfg, 3).unwrap();
        let b = run_seed(&grid, &m, agent, &cfg, 3).unwrap();
        assert_eq!(a.returns, b.returns, "{agent}");
        assert_eq!(a.returns.len(), 25);
        assert!(a.returns.iter().all(|r| (-100.0..=100.0 + 1e-9).contains(r)));
        if agent == AgentKind::Nrm {
            assert_eq!(a.grounder_rounds, 2);
        }
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let grid = GridConfig::default_map();
    let m = TASKS[0].machine();
    let bad = TrainConfig { episodes: 0, ..short_config() };
    assert!(run_seed(&grid, &m, AgentKind::Rm, &bad, 0).is_err());
    let other = nrm_core::ltlf::compile_str("F(a)", &["a".to_string()]).unwrap();
    assert!(run_seed(&grid, &other, AgentKind::Rm, &short_config(), 0).is_err());
}

#[test]
fn curves_and_smoothing() {
    assert_eq!(smooth(&[1.0, 3.0, 5.0, 7.0], 2), vec![1.0, 2.0, 4.0, 6.0]);
    let grid = GridConfig::default_map();
    let m = TASKS[0].machine();
    let run = run_seed(&grid, &m, AgentKind::Rm, &short_config(), 0).unwrap();
    let csv = Experiment::curve_csv(&run, 10);
    assert!(csv.starts_with(CURVE_HEADER));
    assert_eq!(returns_from_csv(&csv).unwrap(), run.returns);
    assert!(returns_from_csv("").is_err());
}
