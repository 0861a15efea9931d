//! Acceptance suite: one test per criterion, each printing a pass line and
//! holding to its time budget. Run with `cargo test --test acceptance`
//! (add `-- --nocapture` to see the lines).

mod common;

use std::time::Instant;

use common::*;

use covertt::conversion::{conv, normalize};
use covertt::coverage::{
    check_cover, leaves, to_json as cover_to_json, Clause, CoverError, CoverTree,
};
use covertt::frontend::{check_text, collect_matches, elaborate, parse};
use covertt::oracle::{Bound, Oracle};
use covertt::syntax::*;
use covertt::unify::{unify, UnifyOutcome};

fn corpus_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}

fn corpus(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).unwrap()
}

fn cli() -> std::process::Command {
    std::process::Command::new(env!("CARGO_BIN_EXE_covertt"))
}

fn corpus_matches(names: &[&str]) -> Vec<(String, Signature, MatchTerm)> {
    let mut out = Vec::new();
    for name in names {
        let checked = check_text(&corpus(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        for (def_name, d) in &checked.sig.defs {
            let mut ms = Vec::new();
            collect_matches(&d.body, &mut ms);
            for m in ms {
                out.push((format!("{name}:{def_name}"), checked.sig.clone(), m));
            }
        }
    }
    out
}

fn budget(start: Instant, secs: f64, criterion: &str) {
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        elapsed < secs,
        "{criterion} exceeded its {secs}s budget: {elapsed:.2}s"
    );
}

#[test]
fn criterion_1_golden_positive_corpus() {
    let start = Instant::now();
    for file in ["vec.ctt", "foldr1.ctt"] {
        let status = cli().arg("check").arg(corpus_path(file)).status().unwrap();
        assert!(status.success(), "check {file} must exit 0");
    }
    budget(start, 1.0, "criterion 1");
    println!("criterion 1 (golden positive corpus: check exits 0 on vec.ctt and foldr1.ctt): PASS");
}

#[test]
fn criterion_2_golden_derivation() {
    let start = Instant::now();
    let out = cli()
        .args(["cover", "--def", "foldr1", "--explain", "--json"])
        .arg(corpus_path("foldr1.ctt"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let got: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let golden: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/foldr1_cover.json"),
        )
        .unwrap(),
    )
    .unwrap();
    assert_eq!(
        got, golden,
        "derivation differs from the frozen golden tree"
    );

    // The golden tree itself must have the advertised spine: a SplitCon on
    // the vector, an Absurd pruning the nil child via the suc/zero clash, a
    // SplitRefl, a second SplitCon on the tail, two further SplitRefl
    // nodes, and exactly two leaves.
    assert_eq!(got["rule"], "SplitCon");
    assert_eq!(got["var"], "w");
    let children = got["children"].as_array().unwrap();
    assert_eq!(children[0]["con"], "Nil");
    assert_eq!(children[0]["tree"]["rule"], "Absurd");
    assert_eq!(children[0]["tree"]["reason"], "clash: suc vs zero");
    let cons = &children[1]["tree"];
    assert_eq!(cons["rule"], "SplitRefl");
    let tail_split = &cons["child"];
    assert_eq!(tail_split["rule"], "SplitCon");
    assert_eq!(tail_split["var"], "t");
    let tail_children = tail_split["children"].as_array().unwrap();
    for (idx, child) in tail_children.iter().enumerate() {
        assert_eq!(child["tree"]["rule"], "SplitRefl");
        assert_eq!(child["tree"]["child"]["rule"], "Leaf");
        assert_eq!(child["tree"]["child"]["clause"], idx);
    }
    let mut leaf_count = 0;
    count_leaves(&got, &mut leaf_count);
    assert_eq!(leaf_count, 2);
    budget(start, 1.0, "criterion 2");
    println!("criterion 2 (golden foldr1 derivation matches the frozen tree): PASS");
}

fn count_leaves(v: &serde_json::Value, n: &mut usize) {
    if v["rule"] == "Leaf" {
        *n += 1;
    }
    if let Some(cs) = v["children"].as_array() {
        for c in cs {
            count_leaves(&c["tree"], n);
        }
    }
    if v["child"].is_object() {
        count_leaves(&v["child"], n);
    }
}

#[test]
fn criterion_3_rejection_corpus() {
    let start = Instant::now();

    // (a) the inl-only match over Empty + Nat.
    let src = corpus("bad.ctt");
    let sig = elaborate(&parse(&src).unwrap()).unwrap().sig;
    let mut ms = Vec::new();
    collect_matches(&sig.def("bad").unwrap().body, &mut ms);
    let m = &ms[0];
    let clauses: Vec<Clause> = m
        .branches
        .iter()
        .map(|b| Clause {
            tel: b.tel.clone(),
            pattern: b.pattern.clone(),
        })
        .collect();
    match check_cover(&sig, &m.scrutinee_tel, &clauses) {
        Err(CoverError::MissingCase {
            witness_pattern, ..
        }) => {
            assert!(matches!(&witness_pattern.terms[0], Term::DataCon(n, _) if n == "inr"));
        }
        other => panic!("bad.ctt: {other:?}"),
    }
    let status = cli()
        .arg("check")
        .arg(corpus_path("bad.ctt"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    // (b) Bool match missing false.
    let src = corpus("bool_missing.ctt");
    let sig = elaborate(&parse(&src).unwrap()).unwrap().sig;
    let mut ms = Vec::new();
    collect_matches(&sig.def("toggle").unwrap().body, &mut ms);
    let m = &ms[0];
    let clauses: Vec<Clause> = m
        .branches
        .iter()
        .map(|b| Clause {
            tel: b.tel.clone(),
            pattern: b.pattern.clone(),
        })
        .collect();
    match check_cover(&sig, &m.scrutinee_tel, &clauses) {
        Err(CoverError::MissingCase {
            witness_pattern, ..
        }) => {
            assert_eq!(witness_pattern.terms[0], datacon("false", vec![]));
        }
        other => panic!("bool_missing.ctt: {other:?}"),
    }
    assert_eq!(
        cli()
            .arg("check")
            .arg(corpus_path("bool_missing.ctt"))
            .status()
            .unwrap()
            .code(),
        Some(1)
    );

    // (c) duplicated clause.
    let src = corpus("overlap.ctt");
    let sig = elaborate(&parse(&src).unwrap()).unwrap().sig;
    let mut ms = Vec::new();
    collect_matches(&sig.def("twice").unwrap().body, &mut ms);
    let m = &ms[0];
    let clauses: Vec<Clause> = m
        .branches
        .iter()
        .map(|b| Clause {
            tel: b.tel.clone(),
            pattern: b.pattern.clone(),
        })
        .collect();
    assert!(matches!(
        check_cover(&sig, &m.scrutinee_tel, &clauses),
        Err(CoverError::Overlap { .. }) | Err(CoverError::Unreachable { .. })
    ));
    assert_eq!(
        cli()
            .arg("check")
            .arg(corpus_path("overlap.ctt"))
            .status()
            .unwrap()
            .code(),
        Some(1)
    );

    budget(start, 1.0, "criterion 3");
    println!("criterion 3 (rejection corpus: inr witness, false witness, overlap): PASS");
}

#[test]
fn criterion_4_oracle_soundness_sweep() {
    let start = Instant::now();
    let all = corpus_matches(&["vec.ctt", "foldr1.ctt", "basic.ctt"]);
    assert!(
        all.len() >= 7,
        "expected the full corpus match set, got {}",
        all.len()
    );
    let mut covers = 0;
    for (label, sig, m) in &all {
        let clauses: Vec<Clause> = m
            .branches
            .iter()
            .map(|b| Clause {
                tel: b.tel.clone(),
                pattern: b.pattern.clone(),
            })
            .collect();
        let tree = check_cover(sig, &m.scrutinee_tel, &clauses)
            .unwrap_or_else(|e| panic!("{label}: {e:?}"));
        let oracle = Oracle::new(sig, Bound::with_depth(3));
        let report = oracle
            .check_cover_semantic(&m.scrutinee_tel, &leaves(&tree))
            .unwrap();
        assert!(
            report.covering,
            "{label}: not covering: {:?}",
            report.to_json()
        );
        assert!(
            report.disjoint,
            "{label}: not disjoint: {:?}",
            report.to_json()
        );
        assert!(report.uncovered.is_empty() && report.overlapping.is_empty());
        covers += 1;
    }
    budget(start, 5.0, "criterion 4");
    println!(
        "criterion 4 (oracle sweep: {covers} accepted covers covering+disjoint at depth 3): PASS"
    );
}

#[test]
fn criterion_5_soundness_vs_definitional_equality() {
    let start = Instant::now();
    let sig = corpus_sig();
    let oracle = Oracle::new(&sig, Bound::with_depth(3));
    let empty = Telescope::new();
    let mut rng = Rng::new(42);
    let mut checked = 0;
    while checked < 100 {
        let ty = gen_enumerable_type(&mut rng);
        let Some(t) = gen_term(&sig, &mut rng, &empty, &ty, 4) else {
            continue;
        };
        let direct = oracle.eval(&empty, &[], &t).unwrap();
        let normal = normalize(&sig, &t).unwrap();
        let via_normal = oracle.eval(&empty, &[], &normal).unwrap();
        assert_eq!(
            direct, via_normal,
            "denotation changed by normalization of {t:?}"
        );
        checked += 1;
    }
    budget(start, 5.0, "criterion 5");
    println!("criterion 5 (eval agrees with normalization on 100 generated closed terms): PASS");
}

#[test]
fn criterion_6_substitution_lemma_suite() {
    let start = Instant::now();
    let sig = corpus_sig();
    let mut rng = Rng::new(43);
    let mut checked = 0;
    while checked < 200 {
        let delta = gen_telescope(&mut rng, 3);
        let mid = gen_telescope(&mut rng, 3);
        let xi = gen_telescope(&mut rng, 3);
        let (Some(theta), Some(sigma)) = (
            gen_subst(&sig, &mut rng, &mid, &delta, 2),
            gen_subst(&sig, &mut rng, &xi, &mid, 2),
        ) else {
            continue;
        };
        let ty = if rng.chance(50) { bool_ty() } else { nat_ty() };
        let Some(t) = gen_term(&sig, &mut rng, &delta, &ty, 3) else {
            continue;
        };
        // Identity law, for the term and for its type.
        assert_eq!(apply_subst(&t, &Subst::id(delta.len())), t);
        assert_eq!(apply_subst(&ty, &Subst::id(delta.len())), ty);
        // Composition law, syntactically (hence also after normalization).
        let composed = compose_subst(&theta, &sigma);
        assert_eq!(
            apply_subst(&t, &composed),
            apply_subst(&apply_subst(&t, &theta), &sigma)
        );
        assert_eq!(
            apply_subst(&ty, &composed),
            apply_subst(&apply_subst(&ty, &theta), &sigma)
        );
        checked += 1;
    }
    budget(start, 2.0, "criterion 6");
    println!("criterion 6 (substitution lemma on 200 generated triples): PASS");
}

#[test]
fn criterion_7_mgu_suite() {
    let start = Instant::now();
    let sig = corpus_sig();
    let oracle = Oracle::new(&sig, Bound::with_depth(3));

    enum Expect {
        Success,
        Clash,
        Stuck,
    }
    use Expect::*;

    let nat = nat_ty();
    let bool_t = bool_ty();
    let problems: Vec<(Telescope, Term, Term, Term, Expect)> = vec![
        // 1. The pullback from the worked fold derivation.
        (
            Telescope::from_entries(vec![("m'".into(), nat.clone()), ("n".into(), nat.clone())]),
            nat.clone(),
            datacon("suc", vec![var(1)]),
            datacon("suc", vec![var(0)]),
            Success,
        ),
        // 2. suc n = zero is empty.
        (
            Telescope::from_entries(vec![("n".into(), nat.clone())]),
            nat.clone(),
            datacon("suc", vec![var(0)]),
            datacon("zero", vec![]),
            Clash,
        ),
        // 3. Reflexive problem: identity unifier.
        (
            Telescope::from_entries(vec![("n".into(), nat.clone())]),
            nat.clone(),
            var(0),
            var(0),
            Success,
        ),
        // 4. Variable against variable.
        (
            Telescope::from_entries(vec![("x".into(), nat.clone()), ("y".into(), nat.clone())]),
            nat.clone(),
            var(1),
            var(0),
            Success,
        ),
        // 5. Variable against a constructor term.
        (
            Telescope::from_entries(vec![("x".into(), nat.clone()), ("y".into(), nat.clone())]),
            nat.clone(),
            var(1),
            datacon("suc", vec![var(0)]),
            Success,
        ),
        // 6. Occurs cycle.
        (
            Telescope::from_entries(vec![("x".into(), nat.clone())]),
            nat.clone(),
            var(0),
            datacon("suc", vec![var(0)]),
            Clash,
        ),
        // 7. Closed equal constructors.
        (
            Telescope::new(),
            nat.clone(),
            nat_lit(0),
            nat_lit(0),
            Success,
        ),
        // 8. Nested decomposition solving the later variable.
        (
            Telescope::from_entries(vec![("x".into(), nat.clone()), ("y".into(), nat.clone())]),
            nat.clone(),
            datacon("suc", vec![datacon("suc", vec![var(1)])]),
            datacon("suc", vec![var(0)]),
            Success,
        ),
        // 9. Type constructor injectivity.
        (
            Telescope::from_entries(vec![
                ("A".into(), Term::Type),
                ("n".into(), nat.clone()),
                ("B".into(), Term::Type),
                ("m".into(), nat.clone()),
            ]),
            Term::Type,
            tycon("Vec", vec![var(3), var(2)]),
            tycon("Vec", vec![var(1), var(0)]),
            Success,
        ),
        // 10. Distinct type formers.
        (
            Telescope::from_entries(vec![("A".into(), Term::Type), ("n".into(), nat.clone())]),
            Term::Type,
            tycon("Vec", vec![var(1), var(0)]),
            bool_t.clone(),
            Clash,
        ),
        // 11. Distinct type constructors.
        (
            Telescope::new(),
            Term::Type,
            nat.clone(),
            bool_t.clone(),
            Clash,
        ),
        // 12. Refl against refl solves the endpoint.
        (
            Telescope::from_entries(vec![("x".into(), nat.clone())]),
            eq(nat.clone(), var(0), var(0)),
            refl(var(0)),
            refl(datacon("zero", vec![])),
            Success,
        ),
        // 13. Equality types decompose componentwise.
        (
            Telescope::from_entries(vec![
                ("x".into(), nat.clone()),
                ("y".into(), nat.clone()),
                ("z".into(), nat.clone()),
            ]),
            Term::Type,
            eq(nat.clone(), var(2), datacon("zero", vec![])),
            eq(nat.clone(), datacon("suc", vec![var(1)]), var(0)),
            Success,
        ),
        // 14. Blocked on an application head.
        (
            Telescope::from_entries(vec![
                ("f".into(), pi("x", nat.clone(), nat.clone())),
                ("x".into(), nat.clone()),
            ]),
            nat.clone(),
            app(var(1), var(0)),
            datacon("zero", vec![]),
            Stuck,
        ),
        // 15. Deep constructor decomposition through parameters.
        (
            Telescope::from_entries(vec![
                ("x".into(), nat.clone()),
                ("h".into(), bool_t.clone()),
                ("t".into(), tycon("Vec", vec![bool_t.clone(), var(1)])),
                ("y".into(), nat.clone()),
                ("k".into(), bool_t.clone()),
                ("u".into(), tycon("Vec", vec![bool_t.clone(), var(1)])),
            ]),
            tycon("Vec", vec![bool_t.clone(), datacon("suc", vec![var(5)])]),
            datacon(
                "Cons",
                vec![
                    bool_t.clone(),
                    datacon("suc", vec![var(5)]),
                    var(5),
                    var(4),
                    var(3),
                    refl(datacon("suc", vec![var(5)])),
                ],
            ),
            datacon(
                "Cons",
                vec![
                    bool_t.clone(),
                    datacon("suc", vec![var(2)]),
                    var(2),
                    var(1),
                    var(0),
                    refl(datacon("suc", vec![var(2)])),
                ],
            ),
            Success,
        ),
        // 16. Distinct data constructors of the same family.
        (
            Telescope::from_entries(vec![
                ("n".into(), nat.clone()),
                ("e".into(), eq(nat.clone(), var(0), datacon("zero", vec![]))),
                ("m".into(), nat.clone()),
                ("h".into(), bool_t.clone()),
                ("t".into(), tycon("Vec", vec![bool_t.clone(), var(1)])),
                (
                    "e2".into(),
                    eq(nat.clone(), var(4), datacon("suc", vec![var(2)])),
                ),
            ]),
            tycon("Vec", vec![bool_t.clone(), var(5)]),
            datacon("Nil", vec![bool_t.clone(), var(5), var(4)]),
            datacon(
                "Cons",
                vec![bool_t.clone(), var(5), var(3), var(2), var(1), var(0)],
            ),
            Clash,
        ),
        // 17. Bool variables.
        (
            Telescope::from_entries(vec![
                ("a".into(), bool_t.clone()),
                ("b".into(), bool_t.clone()),
            ]),
            bool_t.clone(),
            var(1),
            var(0),
            Success,
        ),
        // 18. Distinct closed constructors.
        (
            Telescope::new(),
            bool_t.clone(),
            datacon("true", vec![]),
            datacon("false", vec![]),
            Clash,
        ),
        // 19. Occurs under a constructor.
        (
            Telescope::from_entries(vec![("x".into(), nat.clone())]),
            nat.clone(),
            datacon("suc", vec![var(0)]),
            datacon("suc", vec![datacon("suc", vec![var(0)])]),
            Clash,
        ),
        // 20. Binders block.
        (
            Telescope::from_entries(vec![("f".into(), pi("x", bool_t.clone(), bool_t.clone()))]),
            pi("x", bool_t.clone(), bool_t.clone()),
            lam("y", var(0)),
            lam("y", datacon("true", vec![])),
            Stuck,
        ),
    ];
    assert_eq!(problems.len(), 20);

    for (i, (tel, ty, t1, t2, expect)) in problems.iter().enumerate() {
        let n = i + 1;
        let outcome = unify(&sig, tel, ty, t1, t2).unwrap();
        match (expect, &outcome) {
            (Success, UnifyOutcome::Success(s)) => {
                // The unifier really unifies.
                let t1s = apply_subst(t1, &s.mgu);
                let t2s = apply_subst(t2, &s.mgu);
                assert!(
                    conv(&sig, &t1s, &t2s).unwrap(),
                    "problem {n}: mgu does not unify"
                );
                // Most-generality against the enumerated model: every
                // unifying environment factors through the mgu.
                let envs = oracle.enum_telescope(tel).unwrap();
                let pruned_envs = oracle.enum_telescope(&s.pruned_tel).unwrap();
                for env in envs {
                    let v1 = oracle.eval(tel, &env, t1).unwrap();
                    let v2 = oracle.eval(tel, &env, t2).unwrap();
                    if v1 != v2 {
                        continue;
                    }
                    let factors = pruned_envs.iter().any(|rho| {
                        s.mgu.terms.iter().zip(env.iter()).all(|(c, want)| {
                            oracle
                                .eval(&s.pruned_tel, rho, c)
                                .map(|got| got == *want)
                                .unwrap_or(false)
                        })
                    });
                    assert!(
                        factors,
                        "problem {n}: a unifier does not factor through the mgu"
                    );
                }
            }
            (Clash, UnifyOutcome::Clash(_)) => {
                // No enumerated environment unifies the two sides.
                for env in oracle.enum_telescope(tel).unwrap() {
                    let v1 = oracle.eval(tel, &env, t1).unwrap();
                    let v2 = oracle.eval(tel, &env, t2).unwrap();
                    assert_ne!(v1, v2, "problem {n}: clash but the model has a unifier");
                }
            }
            (Stuck, UnifyOutcome::Stuck { .. }) => {}
            (_, other) => panic!("problem {n}: unexpected outcome {other:?}"),
        }
    }
    budget(start, 3.0, "criterion 7");
    println!("criterion 7 (MGU suite: 20 problems, unifiers factor, clashes empty): PASS");
}

#[test]
fn criterion_8_match_equations() {
    let start = Instant::now();
    let all = corpus_matches(&["vec.ctt", "foldr1.ctt", "basic.ctt"]);
    let mut theta_samples = 0usize;
    for (label, sig, m) in &all {
        let oracle = Oracle::new(sig, Bound::with_depth(2));
        let xi = &m.scrutinee_tel;
        let m_id = Term::Match(Box::new(MatchTerm {
            scrutinees: Subst::id(xi.len()),
            scrutinee_tel: xi.clone(),
            motive: m.motive.clone(),
            branches: m.branches.clone(),
        }));
        // Branch equation: the match denotes its selected branch under the
        // semantic factorization, on every environment.
        for env in oracle.enum_telescope(xi).unwrap() {
            let direct = oracle.eval(xi, &env, &m_id).unwrap();
            let mut found = None;
            for b in &m.branches {
                let mut gas = 1_000_000u64;
                if let Some(rho) = oracle
                    .match_values(&b.tel, &b.pattern, &env, &mut gas)
                    .unwrap()
                {
                    found = Some(oracle.eval(&b.tel, &rho, &b.body).unwrap());
                    break;
                }
            }
            assert_eq!(Some(direct), found, "{label}: branch equation failed");
        }
        // Substitution equation, with the accepted cover's own leaf
        // patterns as the sampled substitutions into the telescope.
        let clauses: Vec<Clause> = m
            .branches
            .iter()
            .map(|b| Clause {
                tel: b.tel.clone(),
                pattern: b.pattern.clone(),
            })
            .collect();
        let tree = check_cover(sig, xi, &clauses).unwrap();
        for (ltel, lpat) in leaves(&tree) {
            for env in oracle.enum_telescope(&ltel).unwrap() {
                if theta_samples >= 50 {
                    break;
                }
                let substituted = apply_subst(&m_id, &lpat);
                let lhs = oracle.eval(&ltel, &env, &substituted).unwrap();
                let pushed: Vec<_> = lpat
                    .terms
                    .iter()
                    .map(|c| oracle.eval(&ltel, &env, c).unwrap())
                    .collect();
                let rhs = oracle.eval(xi, &pushed, &m_id).unwrap();
                assert_eq!(
                    lhs, rhs,
                    "{label}: match does not commute with substitution"
                );
                theta_samples += 1;
            }
        }
    }
    assert!(
        theta_samples >= 50,
        "only {theta_samples} substitution samples available"
    );
    budget(start, 5.0, "criterion 8");
    println!(
        "criterion 8 (match equations on every depth-2 environment, {theta_samples} substitution samples): PASS"
    );
}

// Keep the golden JSON honest: the library derivation equals the file too,
// independently of the CLI path.
#[test]
fn golden_tree_matches_library_derivation() {
    let src = corpus("foldr1.ctt");
    let sig = elaborate(&parse(&src).unwrap()).unwrap().sig;
    let mut ms = Vec::new();
    collect_matches(&sig.def("foldr1").unwrap().body, &mut ms);
    let m = &ms[0];
    let clauses: Vec<Clause> = m
        .branches
        .iter()
        .map(|b| Clause {
            tel: b.tel.clone(),
            pattern: b.pattern.clone(),
        })
        .collect();
    let tree: CoverTree = check_cover(&sig, &m.scrutinee_tel, &clauses).unwrap();
    let golden: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/foldr1_cover.json"),
        )
        .unwrap(),
    )
    .unwrap();
    assert_eq!(cover_to_json(&tree), golden);
}
