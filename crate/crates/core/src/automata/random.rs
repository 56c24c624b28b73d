use rand::Rng;

use super::MooreMachine;

/// Uniformly random total machine with symbols named `a`, `b`, ...
///
/// Used by property tests and the shortcut property checks; the result is not
/// minimized.
pub fn random_machine<R: Rng + ?Sized>(
    rng: &mut R,
    states: usize,
    symbols: usize,
    classes: usize,
) -> MooreMachine {
    assert!(states > 0 && symbols > 0 && classes > 0);
    let alphabet = (0..symbols)
        .map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("s{i}")
            }
        })
        .collect();
    let transitions = (0..states)
        .map(|_| (0..symbols).map(|_| rng.gen_range(0..states)).collect())
        .collect();
    let outputs = (0..states).map(|_| rng.gen_range(0..classes)).collect();
    MooreMachine::new(alphabet, (0..classes as i64).collect(), 0, transitions, outputs)
        .expect("generated machine is well formed")
}
