#![allow(dead_code)]

use proptest::prelude::*;
use qdesk_core::circuit::{Circuit, StageOp};
use qdesk_core::mathcore::{Complex, ComplexMatrix};
use qdesk_core::quantumcore::StandardGate;

pub fn complex() -> impl Strategy<Value = Complex> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex::new(re, im))
}

pub fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(complex(), rows * cols)
        .prop_map(move |e| ComplexMatrix::new(rows, cols, e).unwrap())
}

pub fn small_matrix() -> impl Strategy<Value = ComplexMatrix> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(r, c)| matrix(r, c))
}

pub fn unit_state(n: usize) -> impl Strategy<Value = Vec<Complex>> {
    prop::collection::vec(complex(), 1 << n)
        .prop_filter("nonzero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|z| z / norm).collect()
        })
}

/// One standard gate on distinct wires of an `n`-wire register.
pub fn stage(n: usize) -> impl Strategy<Value = StageOp> {
    let gates: Vec<StandardGate> = StandardGate::ALL
        .into_iter()
        .filter(|g| g.arity() <= n)
        .collect();
    (
        prop::sample::select(gates),
        Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
    )
        .prop_map(|(g, wires)| StageOp::gate(g.gate(), wires[..g.arity()].to_vec()))
}

/// Circuits over at most `max_wires` wires with at most `max_stages` stages.
pub fn circuit(max_wires: usize, max_stages: usize) -> impl Strategy<Value = Circuit> {
    (1..=max_wires).prop_flat_map(move |n| {
        prop::collection::vec(stage(n), 0..=max_stages).prop_map(move |stages| {
            let mut c = Circuit::new("q", n).unwrap();
            for s in stages {
                c.push(s).unwrap();
            }
            c
        })
    })
}

/// Full-register matrix of `gate` on `wires`, one entry at a time from the
/// bit pattern of row and column indices. Independent of the library's
/// kron-and-permute expansion.
pub fn dense_by_bits(gate: &ComplexMatrix, wires: &[usize], n: usize) -> ComplexMatrix {
    let dim = 1usize << n;
    let bit = |x: usize, w: usize| (x >> (n - 1 - w)) & 1;
    let sub = |x: usize| wires.iter().fold(0, |acc, &w| (acc << 1) | bit(x, w));
    let rest = |x: usize| {
        (0..n)
            .filter(|w| !wires.contains(w))
            .fold(0, |acc, w| (acc << 1) | bit(x, w))
    };
    let mut m = ComplexMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            if rest(r) == rest(c) {
                m.set(r, c, gate.get(sub(r), sub(c)));
            }
        }
    }
    m
}

pub fn max_diff(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
