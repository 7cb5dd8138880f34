use std::io::Write;
use std::time::{Duration, Instant};

use harsanyi::algebra::{
    check_sigma_h_laws, counterexample_algebra, make_powerset_algebra, partition_operator, search_k, search_k_exhaustive,
};
use harsanyi::bisequence::TruncatedBiSeqSpace;
use harsanyi::canon::{canonical_model, cardinality, sat, valid, verify_unique_extension, Logic, SatWitness};
use harsanyi::formula::{grid, parse, Formula, LocalLanguage, ProbIndex};
use harsanyi::gen::{random_depth1, random_harsanyi, random_normal, seeded};
use harsanyi::models::{
    check_operator_laws, extend_to_kb, four_p_counter_model, validate_kb_space, FiniteTypeSpace, Law, Semantics,
};
use harsanyi::rewrite::{denest, normal_form, statement_of};
use rand::Rng;

/// Writes straight to stderr so the verdict shows up even when output is captured.
fn verdict(id: u32, name: &str, failures: &[String], elapsed: Duration, limit: Duration) {
    let within = elapsed <= limit;
    let pass = failures.is_empty() && within;
    let status = if pass { "PASS" } else { "FAIL" };
    let mut line = format!("criterion {id} {name}: {status} ({:.2}s, limit {}s)", elapsed.as_secs_f64(), limit.as_secs());
    if !within {
        line.push_str(" over time limit");
    }
    for f in failures.iter().take(5) {
        line.push_str(&format!("\n    {f}"));
    }
    writeln!(std::io::stderr(), "{line}").unwrap();
    assert!(pass, "criterion {id} failed: {failures:?}");
}

fn f(text: &str) -> Formula {
    parse(text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

#[test]
fn criterion_1_cardinality_table() {
    let mut failures = Vec::new();
    let mut slowest = Duration::ZERO;
    let mut check = |q: u64, d: usize, expected: u64| {
        let t = Instant::now();
        let got = cardinality(q, d, 1).unwrap();
        slowest = slowest.max(t.elapsed());
        if got != expected {
            failures.push(format!("cardinality({q},{d},1) = {got}, expected {expected}"));
        }
    };
    for (q, expected) in (1..=5).zip([6, 10, 14, 18, 22]) {
        check(q, 1, expected);
    }
    check(2, 3, 10);
    verdict(1, "cardinality table", &failures, slowest, Duration::from_secs(1));
}

#[test]
fn criterion_2_truth_lemma() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for q in [1u64, 2] {
        let model = canonical_model(q, &[1]).unwrap();
        let space = model.space();
        let n = space.num_states();
        let statements: Vec<Formula> = (0..n).map(|s| statement_of(&model, s)).collect();
        for (s, st) in statements.iter().enumerate() {
            let ext = space.extension(st).unwrap();
            if ext.ones().collect::<Vec<_>>() != vec![s] {
                failures.push(format!("q={q}: statement of atom {s} holds at {:?}", ext.ones().collect::<Vec<_>>()));
            }
        }
        let lang = LocalLanguage::new(q, 1, [1]);
        for mask in 0u64..1 << n {
            let members: Vec<usize> = (0..n).filter(|s| mask >> s & 1 == 1).collect();
            let class = Formula::disj(members.iter().map(|&s| statements[s].clone()));
            let ext: Vec<usize> = space.extension(&class).unwrap().ones().collect();
            if ext != members {
                failures.push(format!("q={q}: class {members:?} has extension {ext:?}"));
            }
            let nf = normal_form(&class, &lang).unwrap();
            if nf.len() != members.len() {
                failures.push(format!("q={q}: normal form of class {members:?} has {} statements", nf.len()));
            }
        }
        let mut rng = seeded(q);
        for _ in 0..300 {
            let g = random_depth1(&mut rng, q, &[1], 3);
            let ext = space.extension(&g).unwrap();
            for s in 0..n {
                if ext.contains(s) != model.atom_entails(s, &g).unwrap() {
                    failures.push(format!("q={q}: atom {s} disagrees on {g}"));
                }
            }
        }
    }
    verdict(2, "canonical truth lemma", &failures, start.elapsed(), Duration::from_secs(10));
}

#[test]
fn criterion_3_unique_extension() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for q in [1u64, 2] {
        let report = verify_unique_extension(q, 1).unwrap();
        if report.checks == 0 {
            failures.push(format!("q={q}: no checks were run"));
        }
        failures.extend(report.failures.iter().map(|x| format!("q={q}: {x:?}")));
    }
    verdict(3, "unique extension", &failures, start.elapsed(), Duration::from_secs(60));
}

const VALID_SCHEMATA: &[(&str, &str)] = &[
    ("A1", "L[0] p1"),
    ("A1", "L[0](p1 & ~p1)"),
    ("A2", "L[1/2] true"),
    ("A2", "L[1] true"),
    ("A3", "L[1/2](p1 & p2) & L[1/2](p1 & ~p2) -> L[1] p1"),
    ("A3", "L[1/2](p1 & L[1/2] p1) & L[1/4](p1 & ~L[1/2] p1) -> L[3/4] p1"),
    ("A4", "~L[1/2](p1 & p2) & ~L[1/2](p1 & ~p2) -> ~L[1] p1"),
    ("A4", "~L[1/4](p1 & L[1/2] p1) & ~L[1/2](p1 & ~L[1/2] p1) -> ~L[3/4] p1"),
    ("A5", "L[3/4] p1 -> ~L[1/2] ~p1"),
    ("A5", "L[1] (p1 | p2) -> ~L[1/2] (~p1 & ~p2)"),
    ("2.4", "~L[1/2] false"),
    ("2.4", "~M[1/2] true"),
    ("2.5", "L[1/2](p1 & p2) -> L[1/2] p1"),
    ("2.5", "L[3/4] p1 -> L[1/2] p1"),
    ("2.5", "~L[1/2] p1 -> M[1/2] p1"),
    ("2.6", "M[1/2] p1 -> M[1/2](p1 & p2)"),
    ("2.6", "M[1/4] p1 -> M[1/2] p1"),
    ("2.6", "~M[1/2] p1 -> L[1/2] p1"),
    ("2.7.1", "L[1/2](p1 & p2) & L[1/2] ~p1 -> L[1]((p1 & p2) | ~p1)"),
    ("2.7.2", "~L[1/2](p1 & p2) & ~L[1/2] ~p1 -> ~L[1]((p1 & p2) | ~p1)"),
    ("2.7.3", "M[1/2](p1 & p2) & M[1/2] ~p1 -> M[1]((p1 & p2) | ~p1)"),
    ("2.7.4", "~M[1/2](p1 & p2) & ~M[1/2] ~p1 -> ~M[1]((p1 & p2) | ~p1)"),
    ("PlusOne.1", "L[1] p1 & L[1/2] p2 -> L[1/2](p1 & p2)"),
    ("PlusOne.1", "L[1] p1 & ~L[1/2] p2 -> ~L[1/2](p1 & p2)"),
    ("PlusOne.2", "L[1] p1 & M[1/2] p2 -> M[1/2](p1 & p2)"),
    ("PlusOne.2", "L[1] p1 & ~M[1/2] p2 -> ~M[1/2](p1 & p2)"),
    ("PlusOne.3", "M[0] p1 & M[1/2] p2 -> M[1/2](p1 | p2)"),
    ("PlusOne.3", "M[0] p1 & ~M[1/2] p2 -> ~M[1/2](p1 | p2)"),
    ("PlusOne.4", "M[0] p1 & L[1/2] p2 -> L[1/2](p1 | p2)"),
    ("PlusOne.4", "M[0] p1 & ~L[1/2] p2 -> ~L[1/2](p1 | p2)"),
    ("WedgeOne", "L[1/2] p1 & L[1/3] ~p1 -> L[1](L[1/2] p1 & L[1/3] ~p1)"),
    ("WedgeOne", "L[1/2] p1 & ~L[1/3] ~p1 -> L[1](L[1/2] p1 & ~L[1/3] ~p1)"),
    ("VeeOne", "L[1/2] p1 | L[1/4] ~p1 -> L[1](L[1/2] p1 | L[1/4] ~p1)"),
    ("PosIntro", "(L[1/2] p1 -> ~L[1/4](p1 & L[1/2] p1)) -> L[1](L[1/2] p1 -> ~L[1/4](p1 & L[1/2] p1))"),
    ("PosIntro", "~L[1/3] p1 | L[2/3] ~p1 -> L[1](~L[1/3] p1 | L[2/3] ~p1)"),
    ("4p", "L[1/2] p1 -> L[1] L[1/2] p1"),
    ("5p", "~L[1/2] p1 -> L[1] ~L[1/2] p1"),
    ("denesting1", "(L[1/3] p1 | ~L[2/3] p1) <-> L[1/2](L[1/3] p1 | ~L[2/3] p1)"),
    ("denesting2", "(L[1/2] p1 & ~L[1/4] p1) <-> L[1/2](p1 & ~L[1/4] p1)"),
    ("denesting3", "(L[1/2] p1 | L[3/4] ~p1) <-> L[1/2](p1 | L[3/4] ~p1)"),
];

const NON_THEOREMS: &[&str] = &[
    "L[1/2](p1 & p2) <-> (L[1/2] p1 & L[1/2] p2)",
    "L[1/2](p1 | p2) <-> (L[1/2] p1 | L[1/2] p2)",
];

#[test]
fn criterion_4_validity_suite() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (name, text) in VALID_SCHEMATA {
        if !valid(&f(text), Logic::SigmaH).unwrap() {
            failures.push(format!("{name}: {text} declared invalid"));
        }
    }
    for text in NON_THEOREMS {
        let negation = f(text).not();
        match sat(&negation, Logic::SigmaH).unwrap() {
            Some(SatWitness::State { model, state }) => {
                if !model.space().evaluate(state, &negation).unwrap() {
                    failures.push(format!("{text}: witness state {state} does not refute it"));
                }
            }
            Some(other) => failures.push(format!("{text}: unexpected witness {}", other.describe())),
            None => failures.push(format!("{text} declared valid")),
        }
    }
    let m = four_p_counter_model();
    let report = check_operator_laws(&m, 1, 2).unwrap();
    for law in [Law::PositiveIntrospection, Law::NegativeIntrospection] {
        if report.holds(law) {
            failures.push(format!("{law:?} holds on the counter-model"));
        }
    }
    for text in ["L[1/2] p1 -> L[1] L[1/2] p1", "~L[1/2] ~p1 -> L[1] ~L[1/2] ~p1"] {
        if m.holds_everywhere(&f(text)).unwrap() {
            failures.push(format!("{text} holds everywhere on the counter-model"));
        }
    }
    verdict(4, "validity suite", &failures, start.elapsed(), Duration::from_secs(30));
}

fn random_harsanyi_models(seed: u64, count: usize) -> Vec<FiniteTypeSpace> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=5);
            let den = rng.gen_range(1..=4);
            random_harsanyi(&mut rng, n, den, &[1])
        })
        .collect()
}

#[test]
fn criterion_5_denesting() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = seeded(5);
    let canon = canonical_model(2, &[1]).unwrap();
    let models = random_harsanyi_models(55, 50);
    for _ in 0..200 {
        let q = rng.gen_range(1..=2);
        let g = random_normal(&mut rng, q, 1, 3);
        let d = match denest(&g) {
            Ok(d) => d,
            Err(e) => {
                failures.push(format!("{g}: {e}"));
                continue;
            }
        };
        if d.depth() > 1 {
            failures.push(format!("{g} denested to depth {}: {d}", d.depth()));
        }
        if canon.space().extension(&g).unwrap() != canon.space().extension(&d).unwrap() {
            failures.push(format!("{g} and {d} differ on the canonical model"));
        }
        for (i, m) in models.iter().enumerate() {
            if m.extension(&g).unwrap() != m.extension(&d).unwrap() {
                failures.push(format!("{g} and {d} differ on random model {i}"));
            }
        }
    }
    verdict(5, "denesting", &failures, start.elapsed(), Duration::from_secs(120));
}

#[test]
fn criterion_6_bisequence_growth() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let s = TruncatedBiSeqSpace::new(7).unwrap();
    for m in 1..=8usize {
        let count = s.count_consistent_jlists(m, &ProbIndex::one()).unwrap();
        if count != 1 << m {
            failures.push(format!("m={m}: {count} consistent lists at r=1"));
        }
    }
    let half = ProbIndex::of(1, 2);
    for m in 1..=8usize {
        for bits in 0u32..1 << m {
            let signs: Vec<bool> = (0..m).map(|i| bits >> i & 1 == 1).collect();
            let negated_j = signs[1..].iter().any(|&b| !b);
            let empty = s.jlist_event(&signs, &half).unwrap().is_clear();
            if negated_j != empty {
                failures.push(format!("r=1/2 list {signs:?}: empty = {empty}"));
            }
        }
    }
    for r in [ProbIndex::of(3, 4), ProbIndex::one()] {
        let report = s.verify_coordinate_lemma(&r);
        failures.extend(report.broken().map(|c| format!("coordinate lemma r={r}: {:?} k={}", c.seq, c.k)));
    }
    let exported = s.to_type_space().unwrap();
    for agent in [1, 2] {
        if !exported.is_harsanyi(agent).unwrap() {
            failures.push(format!("exported space is not Harsanyi for agent {agent}"));
        }
    }
    verdict(6, "bi-sequence growth", &failures, start.elapsed(), Duration::from_secs(120));
}

#[test]
fn criterion_7_algebra_suite() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let quotient = counterexample_algebra();
    for q in 1..=3 {
        let report = check_sigma_h_laws(&quotient, q).unwrap();
        if !report.passes() {
            failures.push(format!("quotient fails belief laws at q={q}: {:?}", report.samples));
        }
    }
    let mut rng = seeded(7);
    for i in 0..50 {
        let n = rng.gen_range(1..=4);
        let den = rng.gen_range(1..=4);
        let m = random_harsanyi(&mut rng, n, den, &[1]);
        let a = make_powerset_algebra(&m, 1, den).unwrap();
        let cells: Vec<u32> = m
            .type_partition(1)
            .unwrap()
            .cells()
            .iter()
            .map(|c| c.ones().fold(0, |acc, s| acc | 1 << s))
            .collect();
        let expected = vec![partition_operator(n, &cells)];
        let found = search_k(&a).unwrap();
        if found != expected {
            failures.push(format!("space {i} ({n} states): {} knowledge operators", found.len()));
        }
    }
    verdict(7, "algebra suite", &failures, start.elapsed(), Duration::from_secs(120));
}

#[test]
fn criterion_7_quotient_has_no_knowledge_operator() {
    let start = Instant::now();
    let found = search_k_exhaustive(&counterexample_algebra());
    let failures: Vec<String> = found.iter().map(|k| format!("knowledge operator found: {k:?}")).collect();
    verdict(7, "quotient admits no knowledge operator (256-table scan)", &failures, start.elapsed(), Duration::from_secs(120));
}

#[test]
fn criterion_8_depth_one_conservation() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = seeded(8);
    for _ in 0..500 {
        let q = rng.gen_range(1..=2);
        let g = random_depth1(&mut rng, q, &[1], 3);
        let plus = sat(&g, Logic::SigmaPlus).unwrap().is_some();
        let harsanyi = match sat(&g, Logic::SigmaH).unwrap() {
            Some(SatWitness::State { model, state }) => {
                if !model.space().evaluate(state, &g).unwrap() {
                    failures.push(format!("{g}: witness state {state} does not satisfy it"));
                }
                true
            }
            Some(_) => true,
            None => false,
        };
        if plus != harsanyi {
            failures.push(format!("{g}: plus {plus}, harsanyi {harsanyi}"));
        }
    }
    verdict(8, "depth-one conservation", &failures, start.elapsed(), Duration::from_secs(120));
}

fn knowledge_schemata(letters: &[u32]) -> Vec<Formula> {
    let p = Formula::letter(letters[0]);
    let other = letters.get(1).map(|&l| Formula::letter(l)).unwrap_or(Formula::Top);
    let half = ProbIndex::of(1, 2);
    let phis = vec![
        p.clone(),
        p.clone().not(),
        Formula::l(half.clone(), p.clone()),
        p.clone().and(Formula::l(ProbIndex::one(), p.clone())),
        p.clone().or(other.clone()),
        Formula::Top,
    ];
    let mut out = Vec::new();
    for phi in &phis {
        let k = Formula::k(1, phi.clone());
        for r in grid(2) {
            let l = Formula::l(r, phi.clone());
            out.push(l.clone().implies(Formula::k(1, l.clone())));
            out.push(l.clone().not().implies(Formula::k(1, l.not())));
        }
        out.push(k.clone().implies(Formula::l(ProbIndex::one(), phi.clone())));
        out.push(k.clone().implies(phi.clone()));
        out.push(k.clone().implies(Formula::k(1, k.clone())));
        out.push(k.clone().not().implies(Formula::k(1, k.clone().not())));
        for psi in &phis {
            out.push(Formula::k(1, phi.clone().implies(psi.clone())).implies(k.clone().implies(Formula::k(1, psi.clone()))));
        }
    }
    out
}

#[test]
fn criterion_9_knowledge_belief_round_trip() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut spaces: Vec<(String, FiniteTypeSpace, Vec<u32>)> = Vec::new();
    for q in 1..=8u64 {
        spaces.push((format!("canonical q={q} P={{p1}}"), canonical_model(q, &[1]).unwrap().space().clone(), vec![1]));
    }
    for q in 1..=2u64 {
        spaces.push((format!("canonical q={q} P={{p1,p2}}"), canonical_model(q, &[1, 2]).unwrap().space().clone(), vec![1, 2]));
    }
    for (i, m) in random_harsanyi_models(9, 50).into_iter().enumerate() {
        spaces.push((format!("random space {i}"), m, vec![1]));
    }
    for (name, m, letters) in &spaces {
        let kb = match extend_to_kb(m) {
            Ok(kb) => kb,
            Err(e) => {
                failures.push(format!("{name}: {e}"));
                continue;
            }
        };
        let report = validate_kb_space(&kb);
        if !report.passes() {
            failures.push(format!("{name}: {:?}", report.violations.first()));
        }
        for g in knowledge_schemata(letters) {
            if !kb.holds_everywhere(&g).unwrap() {
                failures.push(format!("{name}: {g} fails"));
            }
        }
    }
    verdict(9, "knowledge-belief round trip", &failures, start.elapsed(), Duration::from_secs(120));
}
