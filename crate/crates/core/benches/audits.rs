//! Audit battery timings, parallel workers against the sequential path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use folires::complex::Complex;
use folires::dualgraph::{audit_circular_chains, build_dual_graph, DualGraph};
use folires::index::{
    check_corner_reciprocity, check_dicritical_restriction, check_line_sums,
    check_trace_transition, check_triple_relations,
};
use folires::nodal::audit_nodal_transitions;
use folires::par::init_workers;
use folires::scenarios::{darboux_jouanolou, random_scenario, GeneratorParams, Mode};
use folires::separatrix::audit_completeness;

fn battery(cx: &Complex) -> usize {
    let mut checks = 0;
    for rep in [
        cx.validate_sequence(),
        check_corner_reciprocity(cx),
        check_triple_relations(cx),
        check_line_sums(cx),
        check_dicritical_restriction(cx),
        check_trace_transition(cx),
        audit_completeness(cx),
        audit_nodal_transitions(cx),
    ] {
        assert!(rep.passed());
        checks += rep.checks_run;
    }
    checks
}

fn subjects() -> Vec<(&'static str, Complex)> {
    let free = GeneratorParams {
        seed: 7,
        min_steps: 10,
        max_steps: 12,
        ..GeneratorParams::default()
    };
    let incomplete = GeneratorParams {
        seed: 3,
        min_steps: 10,
        max_steps: 12,
        mode: Mode::AllIncomplete,
        ..GeneratorParams::default()
    };
    vec![
        ("dj3", darboux_jouanolou(3).unwrap()),
        ("free12", random_scenario(free).unwrap()),
        ("incomplete12", random_scenario(incomplete).unwrap()),
    ]
}

fn bench_battery(c: &mut Criterion) {
    let cases = subjects();
    let mut group = c.benchmark_group("audit_battery");
    for (name, cx) in &cases {
        group.bench_with_input(BenchmarkId::new("sequential", name), cx, |b, cx| {
            init_workers(Some(1));
            b.iter(|| battery(cx));
        });
        group.bench_with_input(BenchmarkId::new("parallel", name), cx, |b, cx| {
            init_workers(Some(4));
            b.iter(|| battery(cx));
        });
    }
    group.finish();
    init_workers(Some(4));
}

fn bench_chains(c: &mut Criterion) {
    let cases = subjects();
    let graphs: Vec<(&'static str, DualGraph)> = cases
        .iter()
        .map(|(name, cx)| (*name, build_dual_graph(cx, cx.levels()).unwrap()))
        .collect();
    let mut group = c.benchmark_group("circular_chains");
    for (name, g) in &graphs {
        group.bench_with_input(BenchmarkId::new("sequential", name), g, |b, g| {
            init_workers(Some(1));
            b.iter(|| {
                let rep = audit_circular_chains(g, 50, 0);
                assert!(rep.passed());
                rep.checks_run
            });
        });
        group.bench_with_input(BenchmarkId::new("parallel", name), g, |b, g| {
            init_workers(Some(4));
            b.iter(|| {
                let rep = audit_circular_chains(g, 50, 0);
                assert!(rep.passed());
                rep.checks_run
            });
        });
    }
    group.finish();
    init_workers(Some(4));
}

criterion_group!(benches, bench_battery, bench_chains);
criterion_main!(benches);
