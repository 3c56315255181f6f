//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Expected values come from the printed reference output or from
//! oracles computed here, independently of the library code under test.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qdesk_core::circuit::{expand_operator, state_object, Circuit, ExecSession, StageKind, StageOp};
use qdesk_core::grover::{grover_trace, GroverSpec};
use qdesk_core::mathcore::{Complex, ComplexMatrix};
use qdesk_core::qdsl::{parse, serialize};
use qdesk_core::quantumcore::{
    basis, controlled, hadamard_operational, qo, qreg, sample_measurement, tensor_objects, StandardGate,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

fn col(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::col(values)
}

fn max_diff(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// max |(U U^dagger)_ij - delta_ij| by explicit sums.
fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    let n = u.rows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s: Complex = (0..n).map(|k| u.get(i, k) * u.get(j, k).conj()).sum();
            let delta = if i == j { c(1.0) } else { c(0.0) };
            worst = worst.max((s - delta).norm());
        }
    }
    worst
}

fn tensor_reproduction() -> Outcome {
    let a = [0.6, 0.8];
    let b = [0.8, 0.4, 0.2, 0.4];
    let printed = ["0.4800", "0.2400", "0.1200", "0.2400", "0.6400", "0.3200", "0.1600", "0.3200"];
    let psi1 = qo(col(&a), None).map_err(|e| e.to_string())?;
    let psi2 = qo(col(&b), None).map_err(|e| e.to_string())?;

    let start = Instant::now();
    let psi = tensor_objects(&[psi1, psi2]).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    let oracle: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
    for (i, z) in psi.data().entries().iter().enumerate() {
        check!(format!("{:.4}", z.re) == printed[i], "entry {i}: {:.4} vs printed {}", z.re, printed[i]);
        check!(z.im == 0.0 && (z.re - oracle[i]).abs() <= 1e-15, "entry {i} off the product oracle");
    }
    check!(psi.data().entries().len() == 8, "expected 8 entries");
    let header = psi.to_string();
    check!(
        header.starts_with("Quantum object, Hilbert space dimensions [ 2 4 ] by [ 1 1 ]\n"),
        "header {:?}",
        header.lines().next()
    );
    check!(elapsed < Duration::from_millis(1), "took {elapsed:?}, limit 1 ms");
    Ok(format!("8 entries at printed precision, dims [ 2 4 ] by [ 1 1 ], {elapsed:?}"))
}

fn basis_and_register() -> Outcome {
    let b = basis(4, 2).map_err(|e| e.to_string())?;
    check!(b.data() == &col(&[0.0, 1.0, 0.0, 0.0]), "basis(4,2) = {:?}", b.data());
    let r = qreg(&[basis(2, 1).unwrap(), basis(2, 2).unwrap()]).map_err(|e| e.to_string())?;
    check!(r.joint().data() == &col(&[0.0, 1.0, 0.0, 0.0]), "joint = {:?}", r.joint().data());
    let q0 = r.get(0).map_err(|e| e.to_string())?;
    check!(q0.data() == &col(&[1.0, 0.0]), "wire 0 = {:?}", q0.data());
    let dump = r.to_string();
    check!(
        dump == "Register containing 2 qubits, Hilbert space dimensions [ 4 ] by [ 1 ]\n0.0\n1.0\n0.0\n0.0\n",
        "register dump {dump:?}"
    );
    Ok("basis(4,2), joint register and wire 0 exact".into())
}

fn grover_checkpoints() -> Outcome {
    let trace = grover_trace(&GroverSpec::new(2, 2, 2).unwrap()).map_err(|e| e.to_string())?;
    check!(trace.snapshots.len() == 17, "{} snapshots", trace.snapshots.len());
    check!(trace.stage_labels[4] == "oracle", "stage 5 is {:?}", trace.stage_labels[4]);
    let expected: [(usize, &[usize], f64); 2] = [
        (1, &[0b000, 0b100], 0.7071067811865475),
        (2, &[0b000, 0b010, 0b100, 0b110], 0.4999999999999999),
    ];
    for (stage, support, value) in expected {
        let amps = trace.snapshots[stage].amplitudes();
        for (i, z) in amps.iter().enumerate() {
            let want = if support.contains(&i) { c(value) } else { c(0.0) };
            check!((z - want).norm() <= 1e-12, "stage {stage}, index {i}: {z} vs {want}");
        }
    }
    Ok("stage 1 and stage 2 amplitudes within 1e-12 of the printed trace".into())
}

fn grover_success() -> Outcome {
    let theta = (0.5f64).asin();
    let analytic = |j: usize| ((2 * j + 1) as f64 * theta).sin().powi(2);
    check!((analytic(1) - 1.0).abs() < 1e-12 && (analytic(2) - 0.25).abs() < 1e-12, "oracle drift");
    for w in 0..4 {
        let trace = grover_trace(&GroverSpec::new(2, w, 2).unwrap()).map_err(|e| e.to_string())?;
        let p1 = trace.data_probabilities[10][w];
        let p2 = trace.data_probabilities[16][w];
        check!((p1 - analytic(1)).abs() <= 1e-9, "target {w}: iteration 1 gives {p1}");
        check!((p2 - analytic(2)).abs() <= 1e-9, "target {w}: iteration 2 gives {p2}");
        let over = trace.overshoot().ok_or(format!("target {w}: overshoot not reported"))?;
        check!(over.iteration == 1, "target {w}: best iteration {}", over.iteration);
    }
    Ok("all targets: 1.0 after iteration 1, 0.25 after iteration 2, overshoot reported".into())
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let e = (0..rows * cols)
        .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    ComplexMatrix::new(rows, cols, e).unwrap()
}

fn gate_algebra() -> Outcome {
    let start = Instant::now();
    for g in StandardGate::ALL {
        let d = unitarity_defect(&g.matrix());
        check!(d <= 1e-10, "{} unitarity defect {d:e}", g.name());
    }
    let g = |s: StandardGate| s.gate();
    let id = |n| ComplexMatrix::identity(n);
    let h = g(StandardGate::Hadamard);
    let hh = h.matrix().matmul(h.matrix()).unwrap();
    check!(hh.approx_eq(&id(2), 1e-12), "H^2 != I");
    let cnot = g(StandardGate::Cnot);
    check!(cnot.matrix().matmul(cnot.matrix()).unwrap().approx_eq(&id(4), 1e-12), "CNOT^2 != I");
    let c01 = expand_operator(&cnot, &[0, 1], 2).unwrap();
    let c10 = expand_operator(&cnot, &[1, 0], 2).unwrap();
    let swap = c01.matmul(&c10).unwrap().matmul(&c01).unwrap();
    check!(swap.approx_eq(g(StandardGate::Swap).matrix(), 1e-12), "three CNOTs != SWAP");
    let ccnot = controlled(&g(StandardGate::Not), 2).unwrap();
    check!(ccnot.matrix().approx_eq(g(StandardGate::Toffoli).matrix(), 1e-12), "controlled(NOT, 2) != TOFFOLI");
    check!(hadamard_operational().matrix().approx_eq(h.matrix(), 1e-12), "operational H != HADAMARD");

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..200 {
        let dims: Vec<usize> = (0..6).map(|_| rng.random_range(1..=3)).collect();
        let (a, c) = (random_matrix(&mut rng, dims[0], dims[1]), random_matrix(&mut rng, dims[1], dims[2]));
        let (b, d) = (random_matrix(&mut rng, dims[3], dims[4]), random_matrix(&mut rng, dims[4], dims[5]));
        let lhs = a.kron(&b).matmul(&c.kron(&d)).unwrap();
        let rhs = a.matmul(&c).unwrap().kron(&b.matmul(&d).unwrap());
        check!(lhs.approx_eq(&rhs, 1e-12), "mixed-product law fails on case {case}");
    }
    let elapsed = start.elapsed();
    check!(elapsed < Duration::from_secs(5), "took {elapsed:?}, limit 5 s");
    Ok(format!("9 gates unitary, 5 identities, 200 mixed-product cases, {elapsed:?}"))
}

fn random_circuit(rng: &mut ChaCha8Rng) -> Circuit {
    let n = rng.random_range(1..=4);
    let mut circuit = Circuit::new("q", n).unwrap();
    let gates: Vec<StandardGate> = StandardGate::ALL.into_iter().filter(|g| g.arity() <= n).collect();
    for _ in 0..rng.random_range(0..=5) {
        let g = gates[rng.random_range(0..gates.len())];
        let mut wires: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            wires.swap(i, rng.random_range(0..=i));
        }
        wires.truncate(g.arity());
        circuit.push(StageOp::gate(g.gate(), wires)).unwrap();
    }
    circuit
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex> {
    let v: Vec<Complex> = (0..1 << n)
        .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

fn engine_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut stages = 0;
    for case in 0..200 {
        let circuit = random_circuit(&mut rng);
        let n = circuit.qubit_count();
        let initial = random_state(&mut rng, n);
        let mut session = ExecSession::new(circuit.clone(), state_object(initial.clone())).map_err(|e| e.to_string())?;
        let mut dense = ComplexMatrix::column(initial).unwrap();
        let mut forward = vec![session.current().clone()];
        for stage in circuit.stages() {
            let StageKind::Gate(g) = stage.kind() else {
                return Err("unexpected stage kind".into());
            };
            dense = expand_operator(g, stage.wires(), n).unwrap().matmul(&dense).unwrap();
            let snap = session.step_forward().map_err(|e| e.to_string())?.clone();
            let d = max_diff(snap.amplitudes(), dense.entries());
            check!(d <= 1e-12, "case {case}: statevector and dense differ by {d:e}");
            forward.push(snap);
            stages += 1;
        }
        for k in (0..forward.len() - 1).rev() {
            let back = session.step_backward().map_err(|e| e.to_string())?;
            check!(back == &forward[k], "case {case}: backward to {k} is not bit-identical");
        }
    }
    Ok(format!("200 circuits, {stages} stages, all snapshots restored bit-identically"))
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/corpus")
}

fn parser_suite() -> Outcome {
    let start = Instant::now();
    let stages = |text: &str| -> Result<Vec<(String, Vec<usize>, bool)>, String> {
        let c = parse(text).map_err(|e| e.to_string())?;
        Ok(c.stages()
            .iter()
            .map(|s| (s.label().to_string(), s.wires().to_vec(), matches!(s.kind(), StageKind::Broadcast(_))))
            .collect())
    };
    let per_wire = stages("qreg q[2]; H(q[0]); H(q[1]);")?;
    check!(
        per_wire == [("HADAMARD".into(), vec![0], false), ("HADAMARD".into(), vec![1], false)],
        "per-wire program gave {per_wire:?}"
    );
    let broadcast = stages("qreg q[2]; H(q);")?;
    check!(broadcast == [("HADAMARD".into(), vec![0, 1], true)], "broadcast program gave {broadcast:?}");

    let mut files: Vec<_> = fs::read_dir(corpus_dir())
        .map_err(|e| format!("corpus: {e}"))?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "qc"))
        .collect();
    files.sort();
    check!(files.len() == 20, "corpus has {} programs", files.len());
    for f in &files {
        let text = fs::read_to_string(f).unwrap();
        let c = parse(&text).map_err(|e| format!("{}: {e}", f.display()))?;
        let canonical = serialize(&c).map_err(|e| e.to_string())?;
        let again = parse(&canonical).map_err(|e| e.to_string())?;
        check!(again == c, "{}: round trip changed the circuit", f.display());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let alphabet = b"qreg measure H CNOT TOFFOLI x ( ) [ ] ; , 0 1 2 9 // \n\r\t";
    let (mut circuits, mut errors) = (0, 0);
    for case in 0..10_000 {
        let len = rng.random_range(0..120);
        let bytes: Vec<u8> = if case % 2 == 0 {
            (0..len).map(|_| rng.random()).collect()
        } else {
            (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
        };
        let mut text = String::from_utf8_lossy(&bytes).into_owned();
        if case % 4 == 1 {
            text.insert_str(0, "qreg x[3];\n");
        }
        match panic::catch_unwind(|| parse(&text)) {
            Ok(Ok(_)) => circuits += 1,
            Ok(Err(e)) => {
                check!(e.span.line >= 1 && e.span.col >= 1 && !e.message.is_empty(), "case {case}: bad error {e:?}");
                check!(e.span.line <= text.lines().count().max(1), "case {case}: span beyond text: {e}");
                errors += 1;
            }
            Err(_) => return Err(format!("case {case}: parser panicked on {text:?}")),
        }
    }
    let elapsed = start.elapsed();
    check!(elapsed < Duration::from_secs(30), "took {elapsed:?}, limit 30 s");
    Ok(format!(
        "2 example stage lists, 20 round trips, 10000 fuzz cases ({circuits} circuits, {errors} errors), {elapsed:?}"
    ))
}

async fn service_script() -> Outcome {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.map_err(|e| e.to_string())?;
    let base = format!("http://{}", listener.local_addr().unwrap());
    tokio::spawn(async move {
        let _ = qdesk_service::serve_on(listener, &qdesk_service::ServiceConfig::default()).await;
    });
    let http = reqwest::Client::new();
    let err = |e: reqwest::Error| e.to_string();

    let created: serde_json::Value = http
        .post(format!("{base}/sessions"))
        .json(&serde_json::json!({ "grover": { "k": 2, "target": 2 } }))
        .send()
        .await
        .map_err(err)?
        .json()
        .await
        .map_err(err)?;
    let id = created["id"].as_str().ok_or("no session id")?.to_string();
    let state_url = format!("{base}/sessions/{id}/state");
    let step = |direction: &'static str| {
        http.post(format!("{base}/sessions/{id}/step"))
            .json(&serde_json::json!({ "direction": direction }))
            .send()
    };
    let initial = http.get(&state_url).send().await.map_err(err)?.text().await.map_err(err)?;

    for _ in 0..10 {
        let r = step("forward").await.map_err(err)?;
        check!(r.status() == 200, "forward step returned {}", r.status());
    }
    let state: serde_json::Value = http.get(&state_url).send().await.map_err(err)?.json().await.map_err(err)?;
    let p2 = state["data_probabilities"][2].as_f64().ok_or("no data_probabilities")?;
    check!((p2 - 1.0).abs() <= 1e-9, "data_probabilities[2] = {p2}");

    for _ in 0..10 {
        let r = step("backward").await.map_err(err)?;
        check!(r.status() == 200, "backward step returned {}", r.status());
    }
    let restored = http.get(&state_url).send().await.map_err(err)?.text().await.map_err(err)?;
    check!(restored == initial, "state after returning differs from the initial body");
    let boundary = step("backward").await.map_err(err)?.status();
    check!(boundary == 409, "boundary step returned {boundary}");
    Ok(format!("data_probabilities[2] = {p2}, initial state restored byte for byte, boundary 409"))
}

fn service_conformance() -> Outcome {
    tokio::runtime::Runtime::new()
        .map_err(|e| e.to_string())?
        .block_on(service_script())
}

fn measurement_statistics() -> Outcome {
    let h = StandardGate::Hadamard.matrix();
    let plus = qo(h.matmul(&col(&[1.0, 0.0])).unwrap(), None).unwrap();
    let seed = 20_07;
    let first = sample_measurement(&plus, seed, 10_000).map_err(|e| e.to_string())?;
    let second = sample_measurement(&plus, seed, 10_000).map_err(|e| e.to_string())?;
    let sigma = (10_000.0f64 * 0.5 * 0.5).sqrt();
    for outcome in [0, 1] {
        let n = *first.get(&outcome).unwrap_or(&0) as f64;
        check!((n - 5000.0).abs() <= 4.0 * sigma, "outcome {outcome}: {n} counts");
    }
    check!(format!("{first:?}") == format!("{second:?}"), "same seed, different histograms");
    Ok(format!("counts {:?} within 4 sigma, reproducible", first))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("tensor product reproduction", tensor_reproduction),
        ("basis and register reproduction", basis_and_register),
        ("grover stage checkpoints", grover_checkpoints),
        ("grover success probabilities", grover_success),
        ("gate algebra properties", gate_algebra),
        ("engine and dense oracle equivalence", engine_equivalence),
        ("parser suite", parser_suite),
        ("service conformance", service_conformance),
        ("measurement statistics", measurement_statistics),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    let _ = panic::take_hook();
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
