//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line.
//!
//! Run with `cargo test -p fleetcg-core --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use fleetcg::colgen::{compute_metrics, run_column_generation, SolverConfig, SolverMode};
use fleetcg::ga::{run_ga, GaParams};
use fleetcg::instance::{generate_instance, FleetInstance};
use fleetcg::logq::{
    build_state, decode_theta, expectation_sampled, objective_sigma, sampled_standard_error,
    ExpectationMode, SigmaEvaluator, ThetaVector,
};
use fleetcg::mwis::{brute_force_mwis, solve_mwis_exact, WeightedSubgraph};
use fleetcg::pauli::pauli_decompose;
use fleetcg::qubo::{build_qubo, default_penalty, qubit_count, to_squbo};
use minilp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id:>2} [{verdict}] {name}: {detail}");
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, w: (f64, f64)) -> WeightedSubgraph {
    let weights = (0..n).map(|_| rng.random_range(w.0..w.1)).collect();
    let density = rng.random_range(0.1..0.7);
    let edges = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|_| rng.random_bool(density))
        .collect();
    WeightedSubgraph::new(weights, edges)
}

/// Penalized objective straight from its definition.
fn penalized_value(sub: &WeightedSubgraph, penalty: f64, y: &[bool]) -> f64 {
    let mut v = 0.0;
    for (i, &bit) in y.iter().enumerate() {
        if bit {
            v += sub.weights[i];
        }
    }
    for &(a, b) in &sub.edges {
        if y[a] && y[b] {
            v -= penalty;
        }
    }
    v
}

fn bits(mask: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

#[test]
fn c01_spin_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=10);
        let sub = random_graph(&mut rng, n, (-5.0, 5.0));
        let p = default_penalty(&sub.weights);
        let s = to_squbo(&build_qubo::<f64>(&sub, p).unwrap());
        for mask in 0..1usize << n {
            let y = bits(mask, n);
            let mut z = vec![1.0; s.dim];
            for k in 0..n {
                if y[k] {
                    z[k] = -1.0;
                }
            }
            let mut form = s.constant;
            for a in 0..s.dim {
                for b in 0..s.dim {
                    form += z[a] * s.matrix[a * s.dim + b] * z[b];
                }
            }
            worst = worst.max((form - penalized_value(&sub, p, &y)).abs());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-9 && elapsed < Duration::from_secs(10);
    report(1, "spin-QUBO equivalence", pass, format!("max error {worst:.2e}, {elapsed:.2?}"));
    assert!(pass);
}

type C = (f64, f64);

fn cmul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn letter(ch: char) -> [C; 4] {
    let (o, z, i) = ((1.0, 0.0), (0.0, 0.0), (0.0, 1.0));
    match ch {
        'I' => [o, z, z, o],
        'X' => [z, o, o, z],
        'Y' => [z, (0.0, -1.0), i, z],
        'Z' => [o, z, z, (-1.0, 0.0)],
        _ => unreachable!(),
    }
}

fn kron(a: &[C], da: usize, b: &[C; 4]) -> Vec<C> {
    let d = da * 2;
    let mut out = vec![(0.0, 0.0); d * d];
    for r in 0..da {
        for c in 0..da {
            for br in 0..2 {
                for bc in 0..2 {
                    out[(r * 2 + br) * d + c * 2 + bc] = cmul(a[r * da + c], b[br * 2 + bc]);
                }
            }
        }
    }
    out
}

#[test]
fn c02_pauli_reconstruction() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for qubits in 1..=4usize {
        let dim = 1 << qubits;
        for _ in 0..20 {
            let mut m = vec![0.0; dim * dim];
            for r in 0..dim {
                for c in r..dim {
                    let v = rng.random_range(-10.0..10.0);
                    m[r * dim + c] = v;
                    m[c * dim + r] = v;
                }
            }
            let list = pauli_decompose(&m, qubits).unwrap();
            let mut sum = vec![(0.0, 0.0); dim * dim];
            for term in &list.terms {
                let word = term.string.to_string();
                let mut op = vec![(1.0, 0.0)];
                let mut d = 1;
                for ch in word.chars() {
                    op = kron(&op, d, &letter(ch));
                    d *= 2;
                }
                for (acc, e) in sum.iter_mut().zip(&op) {
                    acc.0 += term.coefficient * e.0;
                    acc.1 += term.coefficient * e.1;
                }
            }
            for (acc, &v) in sum.iter().zip(&m) {
                worst = worst.max((acc.0 - v).abs()).max(acc.1.abs());
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-9 && elapsed < Duration::from_secs(30);
    report(2, "Pauli reconstruction", pass, format!("max error {worst:.2e}, {elapsed:.2?}"));
    assert!(pass);
}

#[test]
fn c03_chain_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(1..=8);
        let sub = random_graph(&mut rng, n, (-5.0, 5.0));
        let p = default_penalty(&sub.weights);
        let s = to_squbo(&build_qubo::<f64>(&sub, p).unwrap());
        for _ in 0..100 {
            let angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
            let y: Vec<bool> = angles.iter().map(|&a| a >= std::f64::consts::PI).collect();
            let theta = ThetaVector::new(angles).unwrap();
            assert_eq!(decode_theta(&theta), y);
            let sigma = objective_sigma(&s, &theta, ExpectationMode::Exact, 0).unwrap();
            worst = worst.max((sigma - penalized_value(&sub, p, &y)).abs());
        }
    }
    let pass = worst <= 1e-8;
    report(3, "chain identity", pass, format!("max error {worst:.2e} over 2000 evaluations"));
    assert!(pass);
}

#[test]
fn c04_qubit_count() {
    let (q32, q64) = (qubit_count(32), qubit_count(64));
    let pass = q32 == 6 && q64 == 7;
    report(4, "qubit-count law", pass, format!("n=32 -> {q32}, n=64 -> {q64}"));
    assert!(pass);
}

#[test]
fn c05_mwis_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=16);
        let sub = random_graph(&mut rng, n, (-3.0, 10.0));
        let bb = solve_mwis_exact(&sub).unwrap();
        let bf = brute_force_mwis(&sub).unwrap();
        let mut sel = vec![false; n];
        for &i in &bb.local {
            sel[i] = true;
        }
        if bb.value != bf.value || !sub.is_independent(&sel) {
            mismatches += 1;
        }
    }
    let pass = mismatches == 0;
    report(5, "MWIS oracle equivalence", pass, format!("{mismatches}/200 mismatches"));
    assert!(pass);
}

fn overlaps(inst: &FleetInstance, a: usize, b: usize) -> bool {
    let (x, y) = (&inst.tours[a], &inst.tours[b]);
    !(x.t_a <= y.t_d || y.t_a <= x.t_d)
}

/// Master LP over every independent set and every model allowed by all of
/// its tours, plus rejection at `big_r`.
fn enumerated_lp(inst: &FleetInstance, big_r: f64) -> f64 {
    let n = inst.n_tours();
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let mut cover: Vec<LinearExpr> = (0..n).map(|_| LinearExpr::empty()).collect();
    for mask in 1usize..1 << n {
        let members: Vec<usize> = (0..n).filter(|&k| mask >> k & 1 == 1).collect();
        let independent = members
            .iter()
            .enumerate()
            .all(|(i, &a)| members[i + 1..].iter().all(|&b| !overlaps(inst, a, b)));
        if !independent {
            continue;
        }
        for m in 0..inst.n_models() {
            if !members.iter().all(|&k| inst.tours[k].allowed_models.contains(&m)) {
                continue;
            }
            let cost = inst.models[m].purchase_cost
                + members.iter().map(|&k| inst.models[m].op_cost[&k]).sum::<f64>();
            let var = problem.add_var(cost, (0.0, f64::INFINITY));
            for &k in &members {
                cover[k].add(var, 1.0);
            }
        }
    }
    for mut expr in cover {
        expr.add(problem.add_var(big_r, (0.0, f64::INFINITY)), 1.0);
        problem.add_constraint(expr, ComparisonOp::Ge, 1.0);
    }
    problem.solve().unwrap().objective()
}

#[test]
fn c06_colgen_lp_optimality() {
    let start = Instant::now();
    let mut worst_enum = 0.0f64;
    let mut worst_hybrid = 0.0f64;
    for i in 0..20u64 {
        let n = 4 + (i as usize % 9);
        let allowed = 1 + (i as usize % 3);
        let inst = generate_instance(n, 3, allowed, 6000 + i).unwrap();
        let classical =
            run_column_generation(&inst, &SolverConfig::for_instance(n, SolverMode::Classical, i)).unwrap();
        let hybrid =
            run_column_generation(&inst, &SolverConfig::for_instance(n, SolverMode::Hybrid, i)).unwrap();
        let reference = enumerated_lp(&inst, classical.big_r);
        worst_enum = worst_enum.max((classical.rcp.objective - reference).abs());
        worst_hybrid = worst_hybrid.max((hybrid.rcp.objective - classical.rcp.objective).abs());
    }
    let elapsed = start.elapsed();
    let pass = worst_enum <= 1e-6 && worst_hybrid <= 1e-6 && elapsed < Duration::from_secs(300);
    report(
        6,
        "column-generation LP optimality",
        pass,
        format!("classical vs enumeration {worst_enum:.2e}, hybrid vs classical {worst_hybrid:.2e}, {elapsed:.2?}"),
    );
    assert!(pass);
}

#[test]
fn c07_variational_worker_quality() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let (mut independent, mut optimal) = (0, 0);
    let runs = 20;
    for run in 0..runs {
        let n = rng.random_range(2..=8);
        let sub = random_graph(&mut rng, n, (-1.0, 5.0));
        let s = to_squbo(&build_qubo::<f64>(&sub, default_penalty(&sub.weights)).unwrap());
        let mut eval =
            SigmaEvaluator::new(&s, ExpectationMode::Exact, ChaCha8Rng::seed_from_u64(run)).unwrap();
        let params = GaParams {
            seed: 7000 + run,
            ..GaParams::for_instance_size(32)
        };
        assert_eq!((params.population_size, params.max_iterations), (20, 50));
        let out = run_ga(
            |g: &[f64]| Ok(-eval.sigma(&ThetaVector::new(g.to_vec())?)?),
            n,
            &params,
        )
        .unwrap();
        let y = decode_theta(&ThetaVector::new(out.best_theta).unwrap());
        if sub.is_independent(&y) {
            independent += 1;
            let local: Vec<usize> = (0..n).filter(|&i| y[i]).collect();
            let best = brute_force_mwis(&sub).unwrap().value;
            if (sub.weight_of(&local) - best).abs() <= 1e-9 {
                optimal += 1;
            }
        }
    }
    let pass = independent * 10 >= runs * 9 && optimal * 2 >= runs;
    report(
        7,
        "variational worker quality",
        pass,
        format!("independent {independent}/{runs}, optimal {optimal}/{runs}"),
    );
    assert!(pass);
}

#[test]
fn c08_quantum_share() {
    let start = Instant::now();
    let mut shares = Vec::new();
    for seed in 0..5u64 {
        let inst = generate_instance(32, 5, 3, 800 + seed).unwrap();
        let out =
            run_column_generation(&inst, &SolverConfig::for_instance(32, SolverMode::Hybrid, seed)).unwrap();
        shares.push(compute_metrics(&out.trace).unwrap().quantum_success_pct);
    }
    let mean = shares.iter().sum::<f64>() / shares.len() as f64;
    let elapsed = start.elapsed();
    let pass = mean >= 60.0 && elapsed < Duration::from_secs(1800);
    let per: Vec<String> = shares.iter().map(|s| format!("{s:.1}")).collect();
    report(
        8,
        "quantum-iteration share at 32 tours",
        pass,
        format!("mean {mean:.2}% (runs {}), {elapsed:.2?}", per.join(", ")),
    );
    assert!(pass);
}

#[test]
fn c09_sampled_expectation() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let shots = 10_000;
    let cases = 20;
    let mut within = 0;
    for case in 0..cases {
        let qubits = 2 + case % 2;
        let dim = 1usize << qubits;
        let mut m = vec![0.0; dim * dim];
        for r in 0..dim {
            for c in r..dim {
                let v = rng.random_range(-3.0..3.0);
                m[r * dim + c] = v;
                m[c * dim + r] = v;
            }
        }
        let angles = (0..dim / 2).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let theta = ThetaVector::new(angles).unwrap();
        let state = build_state(&theta, dim).unwrap();
        let mut exact = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                exact += state[r] * m[r * dim + c] * state[c];
            }
        }
        let terms = pauli_decompose(&m, qubits).unwrap();
        let estimate = expectation_sampled(&terms, &theta, shots, &mut rng).unwrap();
        let se = sampled_standard_error(&terms, &theta, shots).unwrap();
        if (estimate - exact).abs() <= 3.0 * se + 1e-12 {
            within += 1;
        }
    }
    let pass = within * 100 >= cases * 95;
    report(9, "sampled-expectation unbiasedness", pass, format!("{within}/{cases} within 3 SE"));
    assert!(pass);
}

#[test]
fn c10_output_feasibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut violations = 0;
    for i in 0..100u64 {
        let n = rng.random_range(1..=32);
        let models = rng.random_range(1..=5);
        let allowed = rng.random_range(1..=models);
        let inst = generate_instance(n, models, allowed, 10_000 + i).unwrap();
        let mode = if n <= 12 && i % 4 == 0 {
            SolverMode::Hybrid
        } else {
            SolverMode::Classical
        };
        let out = run_column_generation(&inst, &SolverConfig::for_instance(n, mode, i)).unwrap();
        let rounded = &out.rounded;
        let mut covered = vec![false; n];
        let mut cost = 0.0;
        for &c in &rounded.chosen {
            let col = &out.columns[c];
            for (a_pos, &a) in col.members.iter().enumerate() {
                covered[a] = true;
                if !inst.tours[a].allowed_models.contains(&col.model) {
                    violations += 1;
                }
                for &b in &col.members[a_pos + 1..] {
                    if overlaps(&inst, a, b) {
                        violations += 1;
                    }
                }
            }
            cost += inst.models[col.model].purchase_cost
                + col.members.iter().map(|k| inst.models[col.model].op_cost[k]).sum::<f64>();
        }
        for &k in &rounded.rejected {
            covered[k] = true;
            cost += out.big_r;
        }
        violations += covered.iter().filter(|&&c| !c).count();
        if (cost - rounded.objective).abs() > 1e-6 * (1.0 + cost.abs()) {
            violations += 1;
        }
    }
    let pass = violations == 0;
    report(10, "feasibility of rounded outputs", pass, format!("{violations} violations over 100 instances"));
    assert!(pass);
}
