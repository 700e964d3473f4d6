//! Random gates and circuits for verification runs and benchmarks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::types::{Circuit, Gate2x2, GateOp};

/// A random element of U(2):
/// `e^{ia} [[e^{ib} cos t, e^{ic} sin t], [-e^{-ic} sin t, e^{-ib} cos t]]`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R) -> Gate2x2 {
    let t: f64 = rng.gen_range(0.0..PI / 2.0);
    let [a, b, c]: [f64; 3] =
        [rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)];
    let phase = Complex64::from_polar(1.0, a);
    Gate2x2::new(
        phase * Complex64::from_polar(t.cos(), b),
        phase * Complex64::from_polar(t.sin(), c),
        -phase * Complex64::from_polar(t.sin(), -c),
        phase * Complex64::from_polar(t.cos(), -b),
    )
}

/// `gates` random gates on `n` qubits; roughly `controlled_fraction` of them
/// carry a control. Single-qubit circuits never get controls.
pub fn random_circuit<R: Rng + ?Sized>(
    n: usize,
    gates: usize,
    controlled_fraction: f64,
    rng: &mut R,
) -> Circuit {
    let mut circuit = Circuit::new(n).expect("n >= 1");
    for _ in 0..gates {
        let g = random_unitary(rng);
        let target = rng.gen_range(0..n);
        let op = if n > 1 && rng.gen_bool(controlled_fraction) {
            let mut control = rng.gen_range(0..n - 1);
            if control >= target {
                control += 1;
            }
            GateOp::controlled(g, control, target)
        } else {
            GateOp::single(g, target)
        };
        circuit.push(op).expect("generated op is valid");
    }
    circuit
}
