//! Command-line driver: check `.ctt` files, evaluate definitions, print
//! coverage derivations, and run the set-model oracle over accepted covers.

use std::process::ExitCode;

use serde_json::json;

use covertt::conversion::{normalize, set_default_fuel};
use covertt::coverage::{check_cover, leaves, to_json as cover_to_json, Clause};
use covertt::frontend::{
    check_text, collect_matches, describe_cover_error, elab_closed_term, explain_tree, parse_term,
    term_to_string, Diagnostic, Severity, Span,
};
use covertt::oracle::{Bound, Oracle};
use covertt::syntax::{apps, MatchTerm, Subst, Term};
use covertt::typecheck::Checker;

const USAGE: &str = "usage: covertt <command> [options] FILE
commands:
  check FILE                 parse, elaborate, and check the whole file
  eval FILE --def NAME [--args TERM ...]
                             normalize a definition applied to arguments
  cover FILE --def NAME [--explain] [--json]
                             print the coverage derivation for NAME's match
  oracle FILE [--def NAME] [--depth D] [--max-fun M] [--json]
                             enumerate the model and audit accepted covers
options:
  --fuel N                   reduction step budget (or COVERTT_FUEL)
  --json                     machine-readable output on stdout
";

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(&argv) {
        Ok(code) => code,
        Err(d) => {
            eprintln!("{d}");
            ExitCode::from(1)
        }
    }
}

struct Opts {
    file: Option<String>,
    def: Option<String>,
    json: bool,
    explain: bool,
    depth: usize,
    max_fun: usize,
    args: Vec<String>,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    eprint!("{USAGE}");
    ExitCode::from(2)
}

fn run(argv: &[String]) -> Result<ExitCode, Diagnostic> {
    let Some(cmd) = argv.first() else {
        return Ok(usage_error("missing command"));
    };
    let mut opts = Opts {
        file: None,
        def: None,
        json: false,
        explain: false,
        depth: 3,
        max_fun: 64,
        args: Vec::new(),
    };
    let mut fuel: Option<u64> = std::env::var("COVERTT_FUEL")
        .ok()
        .and_then(|s| s.parse().ok());
    let mut i = 1;
    while i < argv.len() {
        match argv[i].as_str() {
            "--json" => opts.json = true,
            "--explain" => opts.explain = true,
            "--def" => {
                i += 1;
                match argv.get(i) {
                    Some(n) => opts.def = Some(n.clone()),
                    None => return Ok(usage_error("--def needs a name")),
                }
            }
            "--fuel" => {
                i += 1;
                match argv.get(i).and_then(|s| s.parse().ok()) {
                    Some(n) => fuel = Some(n),
                    None => return Ok(usage_error("--fuel needs a number")),
                }
            }
            "--depth" => {
                i += 1;
                match argv.get(i).and_then(|s| s.parse().ok()) {
                    Some(n) => opts.depth = n,
                    None => return Ok(usage_error("--depth needs a number")),
                }
            }
            "--max-fun" => {
                i += 1;
                match argv.get(i).and_then(|s| s.parse().ok()) {
                    Some(n) => opts.max_fun = n,
                    None => return Ok(usage_error("--max-fun needs a number")),
                }
            }
            "--args" => {
                opts.args.extend(argv[i + 1..].iter().cloned());
                i = argv.len();
            }
            flag if flag.starts_with("--") => {
                return Ok(usage_error(&format!("unknown option {flag}")))
            }
            free => {
                if opts.file.is_some() {
                    return Ok(usage_error(&format!("unexpected argument {free}")));
                }
                opts.file = Some(free.to_string());
            }
        }
        i += 1;
    }
    if let Some(f) = fuel {
        set_default_fuel(f);
    }
    let Some(file) = opts.file.clone() else {
        return Ok(usage_error("missing FILE"));
    };
    let text = match std::fs::read_to_string(&file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {file}: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    match cmd.as_str() {
        "check" => cmd_check(&text, &opts),
        "eval" => cmd_eval(&text, &opts),
        "cover" => cmd_cover(&text, &opts),
        "oracle" => cmd_oracle(&text, &opts),
        other => Ok(usage_error(&format!("unknown command {other}"))),
    }
}

fn cmd_check(text: &str, opts: &Opts) -> Result<ExitCode, Diagnostic> {
    let checked = check_text(text)?;
    if opts.json {
        println!(
            "{}",
            json!({
                "ok": true,
                "declarations": checked.sig.tycons.len() + checked.sig.datacons.len() + checked.sig.defs.len(),
                "recursive": checked.report.recursive_defs,
            })
        );
    } else {
        println!(
            "ok: {} datatypes, {} constructors, {} definitions",
            checked.sig.tycons.len(),
            checked.sig.datacons.len(),
            checked.sig.defs.len()
        );
        for r in &checked.report.recursive_defs {
            println!("recursive: {r}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(text: &str, opts: &Opts) -> Result<ExitCode, Diagnostic> {
    let checked = check_text(text)?;
    let Some(name) = opts.def.clone() else {
        return Ok(usage_error("eval needs --def NAME"));
    };
    if checked.sig.def(&name).is_none() {
        return Err(Diagnostic {
            severity: Severity::Error,
            message: format!("no definition named {name}"),
            span: Span::default(),
            rule: None,
        });
    }
    let mut arg_terms = Vec::new();
    for a in &opts.args {
        let se = parse_term(a)?;
        arg_terms.push(elab_closed_term(&checked.sig, &se)?);
    }
    let term = apps(Term::Def(name), arg_terms);
    let checker = Checker::new(&checked.sig);
    if let Err(e) = checker.infer(&covertt::syntax::Telescope::new(), &term) {
        return Err(covertt::frontend::type_error_to_diagnostic(
            "eval argument",
            &e,
            Span::default(),
        ));
    }
    let normal = normalize(&checked.sig, &term).map_err(|e| Diagnostic {
        severity: Severity::Error,
        message: e.to_string(),
        span: Span::default(),
        rule: Some("EqMatch".into()),
    })?;
    println!("{}", term_to_string(&normal, &[]));
    Ok(ExitCode::SUCCESS)
}

fn def_matches(checked: &covertt::frontend::CheckedFile, name: &str) -> Vec<MatchTerm> {
    let mut out = Vec::new();
    if let Some(d) = checked.sig.def(name) {
        collect_matches(&d.body, &mut out);
    }
    out
}

fn cmd_cover(text: &str, opts: &Opts) -> Result<ExitCode, Diagnostic> {
    let checked = check_text(text)?;
    let names: Vec<String> = match &opts.def {
        Some(n) => vec![n.clone()],
        None => checked
            .sig
            .defs
            .keys()
            .filter(|n| !def_matches(&checked, n).is_empty())
            .cloned()
            .collect(),
    };
    let mut matches = Vec::new();
    for name in &names {
        for m in def_matches(&checked, name) {
            matches.push((name.clone(), m));
        }
    }
    if matches.is_empty() {
        let name = opts.def.clone().unwrap_or_default();
        return Err(Diagnostic {
            severity: Severity::Error,
            message: format!("{name} has no match to analyze"),
            span: checked.def_spans.get(&name).copied().unwrap_or_default(),
            rule: None,
        });
    }
    let mut trees = Vec::new();
    for (name, m) in &matches {
        let clauses: Vec<Clause> = m
            .branches
            .iter()
            .map(|b| Clause {
                tel: b.tel.clone(),
                pattern: b.pattern.clone(),
            })
            .collect();
        match check_cover(&checked.sig, &m.scrutinee_tel, &clauses) {
            Ok(t) => trees.push(t),
            Err(e) => {
                return Err(Diagnostic {
                    severity: Severity::Error,
                    message: format!("in {name}: {}", describe_cover_error(&e)),
                    span: checked.def_spans.get(name).copied().unwrap_or_default(),
                    rule: Some("TyCase".into()),
                })
            }
        }
    }
    if opts.json {
        let payload = if trees.len() == 1 {
            cover_to_json(&trees[0])
        } else {
            json!(trees.iter().map(cover_to_json).collect::<Vec<_>>())
        };
        println!("{payload}");
    } else if opts.explain {
        for (i, t) in trees.iter().enumerate() {
            if trees.len() > 1 {
                println!("match {i}:");
            }
            print!("{}", explain_tree(t));
        }
    } else {
        for t in &trees {
            println!("cover ok: {} leaves", leaves(t).len());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(text: &str, opts: &Opts) -> Result<ExitCode, Diagnostic> {
    let checked = check_text(text)?;
    let oracle = Oracle::new(
        &checked.sig,
        Bound {
            max_depth: opts.depth.max(1),
            max_fun: opts.max_fun,
        },
    );
    let names: Vec<String> = match &opts.def {
        Some(n) => vec![n.clone()],
        None => checked.sig.defs.keys().cloned().collect(),
    };
    let mut results = Vec::new();
    let mut all_ok = true;
    for name in names {
        for (mi, m) in def_matches(&checked, &name).iter().enumerate() {
            let clauses: Vec<Clause> = m
                .branches
                .iter()
                .map(|b| Clause {
                    tel: b.tel.clone(),
                    pattern: b.pattern.clone(),
                })
                .collect();
            let tree = match check_cover(&checked.sig, &m.scrutinee_tel, &clauses) {
                Ok(t) => t,
                Err(e) => {
                    all_ok = false;
                    results.push(json!({
                        "def": name, "match": mi,
                        "error": describe_cover_error(&e),
                    }));
                    continue;
                }
            };
            let lv = leaves(&tree);
            let report = oracle
                .check_cover_semantic(&m.scrutinee_tel, &lv)
                .map_err(oracle_diag)?;
            let agreement = eval_agreement(&oracle, m).map_err(oracle_diag)?;
            all_ok &= report.ok() && agreement.1 == 0;
            results.push(json!({
                "def": name,
                "match": mi,
                "cover": report.to_json(),
                "evalAgreement": { "environments": agreement.0, "mismatches": agreement.1 },
            }));
        }
    }
    let payload = json!({ "depth": opts.depth, "results": results });
    if opts.json {
        println!("{payload}");
    } else {
        println!("{}", serde_json::to_string_pretty(&payload).unwrap());
    }
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn oracle_diag(e: covertt::oracle::OracleError) -> Diagnostic {
    Diagnostic {
        severity: Severity::Error,
        message: e.to_string(),
        span: Span::default(),
        rule: Some("Oracle".into()),
    }
}

/// For every enumerated environment: the match evaluates to its selected
/// branch body under the semantic factorization, and, when the environment
/// is expressible as closed terms, evaluation agrees with normalization.
fn eval_agreement(
    oracle: &Oracle,
    m: &MatchTerm,
) -> Result<(usize, usize), covertt::oracle::OracleError> {
    let xi = &m.scrutinee_tel;
    let envs = oracle.enum_telescope(xi)?;
    let m_id = Term::Match(Box::new(MatchTerm {
        scrutinees: Subst::id(xi.len()),
        scrutinee_tel: xi.clone(),
        motive: m.motive.clone(),
        branches: m.branches.clone(),
    }));
    let mut mismatches = 0usize;
    let total = envs.len();
    for env in envs {
        let direct = oracle.eval(xi, &env, &m_id)?;
        let mut via_branch = None;
        for b in &m.branches {
            let mut gas = 1_000_000u64;
            if let Some(rho) = oracle.match_values(&b.tel, &b.pattern, &env, &mut gas)? {
                via_branch = Some(oracle.eval(&b.tel, &rho, &b.body)?);
                break;
            }
        }
        if via_branch.as_ref() != Some(&direct) {
            mismatches += 1;
            continue;
        }
        // Syntactic agreement on first-order environments.
        let readback: Result<Vec<Term>, _> = env.iter().map(|v| oracle.read_back(v)).collect();
        if let Ok(env_terms) = readback {
            let closed = Term::Match(Box::new(MatchTerm {
                scrutinees: Subst::new(env_terms),
                scrutinee_tel: xi.clone(),
                motive: m.motive.clone(),
                branches: m.branches.clone(),
            }));
            let normal = match normalize(&oracle.sig, &closed) {
                Ok(t) => t,
                Err(e) => return Err(covertt::oracle::OracleError::Norm(e)),
            };
            let empty = covertt::syntax::Telescope::new();
            let after = oracle.eval(&empty, &[], &normal)?;
            if after != direct {
                mismatches += 1;
            }
        }
    }
    Ok((total, mismatches))
}
