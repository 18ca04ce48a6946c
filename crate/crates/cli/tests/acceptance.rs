//! Release gate: one test per acceptance criterion, each printing a single
//! pass/fail line (visible with `--nocapture`).

use std::collections::BTreeSet;
use std::panic::AssertUnwindSafe;
use std::path::PathBuf;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use folires::complex::{EntityRef, Nature, PSpec, Record};
use folires::dualgraph::{
    audit_circular_chains, build_dual_graph, chain_transform, Chain, DualGraph,
};
use folires::index::{
    check_corner_reciprocity, check_dicritical_restriction, check_line_sums,
    check_trace_transition, check_triple_relations, enumerate_triple_cases,
};
use folires::nodal::{nodal_components, persistency_audit, consistency_verdict, Verdict};
use folires::scenarios::{
    darboux_jouanolou, parse_scenario, random_scenario, render_scenario, GeneratorParams, Mode,
};
use folires::separatrix::{
    audit_completeness, incomplete_points, partial_separatrices, separatrix_index,
};
use folires::{Complex, ComponentId, IndexClass, Report, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS_SEEDS: u64 = 100;

fn criterion<F: FnOnce()>(label: &str, body: F) {
    let outcome = std::panic::catch_unwind(AssertUnwindSafe(body));
    match &outcome {
        Ok(()) => println!("{}: pass", label),
        Err(_) => println!("{}: fail", label),
    }
    if let Err(cause) = outcome {
        std::panic::resume_unwind(cause);
    }
}

fn describe(rep: &Report) -> String {
    match rep.findings.first() {
        Some(f) => format!("{} findings, first: {}", rep.findings.len(), f),
        None => "no findings".to_string(),
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_folires"))
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn free_params(seed: u64) -> GeneratorParams {
    GeneratorParams { seed, max_steps: 12, ..GeneratorParams::default() }
}

fn free_corpus() -> &'static [(u64, Complex)] {
    static CORPUS: OnceLock<Vec<(u64, Complex)>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        (0..CORPUS_SEEDS)
            .map(|seed| {
                let cx = random_scenario(free_params(seed)).expect("free generation succeeds");
                (seed, cx)
            })
            .collect()
    })
}

fn incomplete_params(seed: u64) -> GeneratorParams {
    let mode = if seed % 10 < 3 { Mode::ForceNodalChain } else { Mode::AllIncomplete };
    GeneratorParams { seed, mode, ..GeneratorParams::default() }
}

fn incomplete_corpus() -> &'static [(u64, Complex)] {
    static CORPUS: OnceLock<Vec<(u64, Complex)>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        (0..CORPUS_SEEDS)
            .map(|seed| {
                let cx = random_scenario(incomplete_params(seed))
                    .expect("incomplete generation succeeds");
                (seed, cx)
            })
            .collect()
    })
}

fn family() -> &'static [Complex] {
    static FAMILY: OnceLock<Vec<Complex>> = OnceLock::new();
    FAMILY.get_or_init(|| {
        (1..=3).map(|m| darboux_jouanolou(m).expect("family builds")).collect()
    })
}

fn index_battery(cx: &Complex) -> [Report; 5] {
    [
        check_corner_reciprocity(cx),
        check_triple_relations(cx),
        check_dicritical_restriction(cx),
        check_line_sums(cx),
        check_trace_transition(cx),
    ]
}

fn comp_named(cx: &Complex, name: &str) -> ComponentId {
    cx.comp_ids().find(|&e| cx.comp(e).name == name).expect("component exists")
}

#[test]
fn darboux_jouanolou_counts() {
    criterion("criterion 1, darboux-jouanolou separatrix counts", || {
        for (m, expected) in [(1u32, 6usize), (2, 14), (3, 26)] {
            let started = Instant::now();
            let file = tmp(&format!("dj{}.fol", m));
            let gen = bin()
                .args(["gen", "--dj", &m.to_string(), "-o"])
                .arg(&file)
                .output()
                .expect("gen runs");
            assert!(
                gen.status.success(),
                "gen --dj {} failed: {}",
                m,
                String::from_utf8_lossy(&gen.stderr)
            );
            let report = bin().arg("report").arg(&file).output().expect("report runs");
            assert!(
                report.status.success(),
                "report --dj {} failed: {}",
                m,
                String::from_utf8_lossy(&report.stderr)
            );
            let out = String::from_utf8(report.stdout).expect("report is utf-8");
            let header = format!("separatrices: {} (incomplete: {})", expected, expected);
            assert!(out.contains(&header), "degree-{} report lacks {:?}", m, header);
            let single_point = out.matches(", compact part point ").count();
            assert_eq!(
                single_point, expected,
                "degree-{} separatrices with a single-point compact part",
                m
            );
            let elapsed = started.elapsed();
            assert!(elapsed < Duration::from_secs(1), "degree {} took {:?}", m, elapsed);
        }
    });
}

#[test]
fn index_relation_battery_with_mutations() {
    criterion("criterion 2, index battery and mutation harness", || {
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for seed in 0..CORPUS_SEEDS {
            let cx = random_scenario(free_params(seed)).expect("free generation succeeds");
            for rep in index_battery(&cx) {
                assert!(rep.passed(), "seed {}: {}", seed, describe(&rep));
            }
            let records = cx.records().to_vec();
            let candidates: Vec<usize> = records
                .iter()
                .enumerate()
                .filter(|(_, r)| match r {
                    Record::Index { value, .. } => !(value + &Scalar::one()).is_zero(),
                    _ => false,
                })
                .map(|(i, _)| i)
                .collect();
            assert!(!candidates.is_empty(), "seed {}: no perturbable index record", seed);
            let pick = candidates[rng.gen_range(0..candidates.len())];
            let mut mutated = records;
            if let Record::Index { value, .. } = &mut mutated[pick] {
                *value = &*value + &Scalar::one();
            }
            // The builder derives reciprocal corner sides eagerly, so a
            // rejected replay is itself a caught violation.
            if let Ok(broken) = Complex::replay(&mutated) {
                let caught = index_battery(&broken).iter().any(|rep| !rep.passed());
                assert!(caught, "seed {}: mutated record {} went unnoticed", seed, pick);
            }
        }
        let elapsed = started.elapsed();
        assert!(elapsed < Duration::from_secs(60), "battery took {:?}", elapsed);
    });
}

fn mu_pool() -> Vec<Scalar> {
    vec![
        Scalar::sqrt2(),
        Scalar::i(),
        &Scalar::one() + &Scalar::sqrt2(),
        Scalar::rational(-3, 2),
        &Scalar::sqrt2() * &Scalar::i(),
    ]
}

fn random_open_chain(g: &DualGraph, rng: &mut ChaCha8Rng) -> Option<Chain> {
    for _ in 0..20 {
        let mut vertices = vec![g.vertices[rng.gen_range(0..g.vertices.len())]];
        let mut wedges = Vec::new();
        for _ in 0..rng.gen_range(1..=5) {
            let cur = *vertices.last().unwrap();
            let incident: Vec<(usize, ComponentId)> = g
                .wedges
                .iter()
                .enumerate()
                .filter_map(|(wi, w)| {
                    if w.ends.0 == cur {
                        Some((wi, w.ends.1))
                    } else if w.ends.1 == cur {
                        Some((wi, w.ends.0))
                    } else {
                        None
                    }
                })
                .collect();
            if incident.is_empty() {
                break;
            }
            let (wi, next) = incident[rng.gen_range(0..incident.len())];
            wedges.push(wi);
            vertices.push(next);
        }
        if wedges.is_empty() {
            continue;
        }
        let chain = Chain { vertices, wedges };
        if !chain.is_circular() {
            return Some(chain);
        }
    }
    None
}

#[test]
fn circular_chain_sweep() {
    criterion("criterion 3, chain transforms fix circular chains", || {
        let mut graphs: Vec<DualGraph> = Vec::new();
        for (seed, cx) in free_corpus() {
            let g = build_dual_graph(cx, cx.levels()).expect("dual graph builds");
            let rep = audit_circular_chains(&g, 50, *seed);
            assert!(rep.passed(), "seed {}: {}", seed, describe(&rep));
            if !g.wedges.is_empty() {
                graphs.push(g);
            }
        }
        assert!(!graphs.is_empty(), "the corpus yields graphs with wedges");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mus = mu_pool();
        let mut tested = 0usize;
        let mut cursor = 0usize;
        while tested < 100 {
            let g = &graphs[cursor % graphs.len()];
            cursor += 1;
            let chain = match random_open_chain(g, &mut rng) {
                Some(c) => c,
                None => continue,
            };
            let mu = mus[rng.gen_range(0..mus.len())].clone();
            let forward = chain_transform(g, &chain, &mu).expect("chain transform applies");
            let back =
                chain_transform(g, &chain.inverse(), &forward).expect("inverse chain applies");
            assert_eq!(back, mu, "open chain {} does not invert", tested);
            tested += 1;
        }
    });
}

fn unequal_members_fixture() -> Complex {
    let mut cx = Complex::new_ambient("T");
    cx.mark_singular(EntityRef::Point(cx.origin())).unwrap();
    cx.blow_up_point(cx.origin(), false).unwrap();
    let e1 = comp_named(&cx, "E1");
    let z = cx.declare_point(PSpec::Inside("E1".to_string())).unwrap();
    let zn = cx.point(z).name.clone();
    let t1 = cx.declare_trace("T1", e1, None, vec![PSpec::Named(zn.clone())]).unwrap();
    let t2 = cx.declare_trace("T2", e1, None, vec![PSpec::Named(zn)]).unwrap();
    cx.assign_index(t1, e1, Scalar::sqrt2()).unwrap();
    cx.assign_index(t2, e1, Scalar::i()).unwrap();
    cx
}

#[test]
fn separatrix_index_well_defined() {
    criterion("criterion 4, the separatrix index is well defined", || {
        let corpus = free_corpus()
            .iter()
            .map(|(_, cx)| cx)
            .chain(incomplete_corpus().iter().map(|(_, cx)| cx))
            .chain(family().iter());
        for cx in corpus {
            for sep in partial_separatrices(cx) {
                let comps: BTreeSet<ComponentId> = sep
                    .members
                    .iter()
                    .flat_map(|&m| cx.curve(m).housing.iter().copied())
                    .filter(|&e| cx.comp(e).nature == Nature::Invariant && cx.comp(e).compact)
                    .collect();
                for comp in comps {
                    if let Err(e) = separatrix_index(cx, &sep, comp) {
                        panic!("{} on {}: {}", sep.name, cx.comp(comp).name, e);
                    }
                }
            }
        }
        let cx = unequal_members_fixture();
        let seps = partial_separatrices(&cx);
        assert_eq!(seps.len(), 1, "the fixture carries one separatrix");
        let e1 = comp_named(&cx, "E1");
        assert!(
            separatrix_index(&cx, &seps[0], e1).is_err(),
            "unequal member indices must be rejected"
        );
    });
}

#[test]
fn completeness_battery() {
    criterion("criterion 5, separatrix completeness audits", || {
        let corpus = free_corpus()
            .iter()
            .map(|(_, cx)| cx)
            .chain(incomplete_corpus().iter().map(|(_, cx)| cx))
            .chain(family().iter());
        for cx in corpus {
            let rep = audit_completeness(cx);
            assert!(rep.passed(), "{}: {}", cx.records().len(), describe(&rep));
            assert!(
                incomplete_points(cx, cx.levels()).is_empty(),
                "incomplete point survives at the final level"
            );
        }
    });
}

#[test]
fn five_case_exhaustiveness() {
    criterion("criterion 6, exactly five corner class patterns", || {
        let started = Instant::now();
        let expected: BTreeSet<u8> = (1..=5).collect();
        assert_eq!(enumerate_triple_cases(), expected);
        use IndexClass::*;
        assert_eq!(folires::complex::triple_case(&[Nodal, Nodal, Nodal]), None);
        let elapsed = started.elapsed();
        assert!(elapsed < Duration::from_secs(1), "enumeration took {:?}", elapsed);
    });
}

fn contradictory_fixture() -> Complex {
    let mut cx = Complex::new_ambient("T");
    cx.set_flag(true).unwrap();
    cx.mark_singular(EntityRef::Point(cx.origin())).unwrap();
    cx.blow_up_point(cx.origin(), false).unwrap();
    let e1 = comp_named(&cx, "E1");
    let v = cx.declare_point(PSpec::Inside("E1".to_string())).unwrap();
    let vn = cx.point(v).name.clone();
    let g1 = cx.declare_trace("G1", e1, None, vec![PSpec::Named(vn)]).unwrap();
    cx.assign_index(g1, e1, Scalar::sqrt2()).unwrap();
    cx.mark_singular(EntityRef::Point(v)).unwrap();
    cx.blow_up_point(v, false).unwrap();
    let e2 = comp_named(&cx, "E2");
    let l21 = cx.curve_ids().find(|&c| cx.curve(c).name == "L(2,1)").expect("line exists");
    cx.assign_index(l21, e1, Scalar::sqrt2()).unwrap();
    let q2 = cx
        .point_ids()
        .find(|&p| cx.point_alive_at(p, 2) && cx.point(p).curves.contains(&g1))
        .expect("the trace lands on the new plane");
    let qn = cx.point(q2).name.clone();
    let w = cx.declare_point(PSpec::Inside("E2".to_string())).unwrap();
    let wn = cx.point(w).name.clone();
    let h = cx.declare_trace("H", e2, None, vec![PSpec::Named(qn), PSpec::Named(wn)]).unwrap();
    cx.assign_index(h, e2, Scalar::from_integer(-1)).unwrap();
    cx.mark_singular(EntityRef::Point(w)).unwrap();
    cx.blow_up_point(w, true).unwrap();
    cx
}

#[test]
fn persistency_sweep() {
    criterion("criterion 7, incomplete scenarios stay consistent", || {
        for (seed, cx) in incomplete_corpus() {
            assert!(cx.all_separatrices_incomplete(), "seed {} must carry the flag", seed);
            assert_eq!(consistency_verdict(cx), Verdict::Consistent, "seed {}", seed);
            let rep = persistency_audit(cx);
            assert!(rep.passed(), "seed {}: {}", seed, describe(&rep));
            let designated = nodal_components(cx)
                .into_iter()
                .filter(|n| n.complete() && n.uninterrupted)
                .count();
            assert_eq!(designated, 0, "seed {}: complete uninterrupted nodal component", seed);
        }
        let cx = contradictory_fixture();
        match consistency_verdict(&cx) {
            Verdict::Contradictory { breaking_level, .. } => {
                assert!(breaking_level < cx.levels(), "the chain breaks below the top level");
            }
            Verdict::Consistent => panic!("the adversarial fixture must be contradictory"),
        }
        assert!(!persistency_audit(&cx).passed(), "the audit must flag the fixture");
    });
}

fn assert_round_trip(cx: &Complex, label: &str) -> String {
    let text = render_scenario(cx);
    let parsed = parse_scenario(&text).unwrap_or_else(|e| panic!("{}: {}", label, e));
    assert_eq!(parsed.records(), cx.records(), "{}: parsed records differ", label);
    assert_eq!(render_scenario(&parsed), text, "{}: re-render changes bytes", label);
    text
}

#[test]
fn round_trip_determinism() {
    criterion("criterion 8, round trips and seeded determinism", || {
        for (m, cx) in family().iter().enumerate() {
            let m = m as u32 + 1;
            let text = assert_round_trip(cx, &format!("degree {}", m));
            let again = darboux_jouanolou(m).expect("family builds");
            assert_eq!(render_scenario(&again), text, "degree {} regenerates differently", m);
        }
        for (seed, cx) in free_corpus() {
            let text = assert_round_trip(cx, &format!("free seed {}", seed));
            let again = random_scenario(free_params(*seed)).expect("free generation succeeds");
            assert_eq!(render_scenario(&again), text, "free seed {} regenerates differently", seed);
        }
        for (seed, cx) in incomplete_corpus() {
            let text = assert_round_trip(cx, &format!("incomplete seed {}", seed));
            let again =
                random_scenario(incomplete_params(*seed)).expect("incomplete generation succeeds");
            assert_eq!(
                render_scenario(&again),
                text,
                "incomplete seed {} regenerates differently",
                seed
            );
        }
    });
}
