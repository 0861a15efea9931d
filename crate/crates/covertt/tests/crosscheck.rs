//! Randomized cross-validation of the coverage checker against the set
//! model: for generated telescopes and clause sets, every verdict the
//! checker returns is audited semantically. Accepted covers must be
//! covering and disjoint in the model; a missing-case witness must be hit
//! by no clause; an overlap must have a shared environment; an unreachable
//! clause must add nothing to the other clauses.

mod common;

use common::*;

use covertt::coverage::{absurd_leaves, check_cover, leaves, Clause, CoverError};
use covertt::oracle::{Bound, Oracle, Value};
use covertt::syntax::*;

/// A telescope the oracle can enumerate quickly: Bool, shallow Nat, Vec of
/// Bool at a literal or earlier-variable length, and equalities over Nat.
fn gen_xi(rng: &mut Rng) -> Telescope {
    let mut tel = Telescope::new();
    let n = 1 + rng.below(3);
    for i in 0..n {
        let nat_positions: Vec<usize> = (0..tel.len())
            .filter(|p| tel.entries[*p].ty == nat_ty())
            .collect();
        let ty = match rng.below(6) {
            0 | 1 => bool_ty(),
            2 => nat_ty(),
            3 => vec_ty(bool_ty(), nat_lit(rng.below(3))),
            4 if !nat_positions.is_empty() => {
                let p = nat_positions[rng.below(nat_positions.len())];
                vec_ty(bool_ty(), Term::Var(tel.len() - 1 - p))
            }
            5 if !nat_positions.is_empty() => {
                let p = nat_positions[rng.below(nat_positions.len())];
                eq(
                    nat_ty(),
                    Term::Var(tel.len() - 1 - p),
                    nat_lit(rng.below(2)),
                )
            }
            _ => bool_ty(),
        };
        tel.push(format!("x{i}"), ty);
    }
    tel
}

/// Fully concrete clauses sampled from the model, optionally joined by a
/// catch-all of bare variables.
fn gen_clauses(rng: &mut Rng, oracle: &Oracle, xi: &Telescope) -> Option<Vec<Clause>> {
    let envs = oracle.enum_telescope(xi).ok()?;
    let mut clauses = Vec::new();
    let picks = rng.below(3);
    for _ in 0..picks {
        if envs.is_empty() {
            break;
        }
        let env = &envs[rng.below(envs.len())];
        let terms: Result<Vec<Term>, _> = env.iter().map(|v| oracle.read_back(v)).collect();
        let Ok(terms) = terms else { continue };
        clauses.push(Clause {
            tel: Telescope::new(),
            pattern: Subst::new(terms),
        });
    }
    if clauses.is_empty() || rng.chance(40) {
        clauses.push(Clause {
            tel: xi.clone(),
            pattern: Subst::id(xi.len()),
        });
    }
    Some(clauses)
}

fn hits(oracle: &Oracle, clause: &Clause, env: &[Value]) -> bool {
    let mut gas = 1_000_000u64;
    oracle
        .match_values(&clause.tel, &clause.pattern, env, &mut gas)
        .unwrap()
        .is_some()
}

#[test]
fn pipeline_never_panics_on_mutated_corpus_sources() {
    // Deterministic companion to the fuzz targets: truncations, byte
    // substitutions, and splices of the corpus must at worst produce
    // diagnostics.
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut sources = Vec::new();
    for f in ["vec.ctt", "foldr1.ctt", "basic.ctt", "bad.ctt"] {
        sources.push(std::fs::read_to_string(dir.join(f)).unwrap());
    }
    let mut rng = Rng::new(9001);
    let noise = b"(){};:=>.|,\\ xz09";
    for _ in 0..400 {
        let base = &sources[rng.below(sources.len())];
        let mut bytes = base.as_bytes().to_vec();
        match rng.below(4) {
            0 => {
                bytes.truncate(rng.below(bytes.len().max(1)));
            }
            1 => {
                for _ in 0..1 + rng.below(4) {
                    let i = rng.below(bytes.len().max(1));
                    if i < bytes.len() {
                        bytes[i] = noise[rng.below(noise.len())];
                    }
                }
            }
            2 => {
                let i = rng.below(bytes.len().max(1));
                let other = &sources[rng.below(sources.len())];
                let j = rng.below(other.len().max(1));
                let mut spliced = bytes[..i.min(bytes.len())].to_vec();
                spliced.extend_from_slice(&other.as_bytes()[j.min(other.len())..]);
                bytes = spliced;
            }
            _ => {
                bytes.reverse();
            }
        }
        if let Ok(text) = String::from_utf8(bytes) {
            let _ = covertt::frontend::check_text(&text);
            let _ = covertt::frontend::parse_term(&text);
        }
    }
}

#[test]
fn coverage_verdicts_agree_with_the_model() {
    let sig = corpus_sig();
    let oracle = Oracle::new(&sig, Bound::with_depth(3));
    let mut rng = Rng::new(2024);
    let mut accepted = 0usize;
    let mut missing = 0usize;
    let mut overlapping = 0usize;
    let mut unreachable = 0usize;
    for _ in 0..300 {
        let xi = gen_xi(&mut rng);
        let Some(clauses) = gen_clauses(&mut rng, &oracle, &xi) else {
            continue;
        };
        let envs = oracle.enum_telescope(&xi).unwrap();
        match check_cover(&sig, &xi, &clauses) {
            Ok(tree) => {
                accepted += 1;
                let report = oracle.check_cover_semantic(&xi, &leaves(&tree)).unwrap();
                assert!(
                    report.ok(),
                    "accepted cover fails the model: xi={xi:?} clauses={clauses:?} report={:?}",
                    report.to_json()
                );
                for (tel, _) in absurd_leaves(&tree) {
                    assert_eq!(
                        oracle.enum_telescope(&tel).unwrap().len(),
                        0,
                        "pruned context is inhabited: {tel:?}"
                    );
                }
            }
            Err(CoverError::MissingCase {
                witness_tel,
                witness_pattern,
            }) => {
                missing += 1;
                // Every instantiation of the witness is hit by no clause.
                let wenvs = oracle.enum_telescope(&witness_tel).unwrap();
                for wenv in wenvs {
                    let scrut: Vec<Value> = witness_pattern
                        .terms
                        .iter()
                        .map(|t| oracle.eval(&witness_tel, &wenv, t).unwrap())
                        .collect();
                    for (i, c) in clauses.iter().enumerate() {
                        assert!(
                            !hits(&oracle, c, &scrut),
                            "missing-case witness is covered by clause {i}: xi={xi:?}"
                        );
                    }
                }
            }
            Err(CoverError::Overlap {
                clause_a, clause_b, ..
            }) => {
                overlapping += 1;
                if clause_a != clause_b {
                    let shared = envs.iter().any(|e| {
                        hits(&oracle, &clauses[clause_a], e) && hits(&oracle, &clauses[clause_b], e)
                    });
                    assert!(
                        shared || envs.is_empty(),
                        "overlap verdict without a shared environment: xi={xi:?} clauses={clauses:?}"
                    );
                }
            }
            Err(CoverError::Unreachable { clause }) => {
                unreachable += 1;
                for e in &envs {
                    if hits(&oracle, &clauses[clause], e) {
                        let elsewhere = clauses
                            .iter()
                            .enumerate()
                            .any(|(i, c)| i != clause && hits(&oracle, c, e));
                        assert!(
                            elsewhere,
                            "unreachable clause uniquely covers an environment: xi={xi:?}"
                        );
                    }
                }
            }
            Err(CoverError::Undecidable { .. }) => {}
        }
    }
    // The generator must actually exercise all four verdicts.
    assert!(accepted > 0, "no accepted covers generated");
    assert!(missing > 0, "no missing cases generated");
    assert!(overlapping > 0, "no overlaps generated");
    let _ = unreachable;
}
