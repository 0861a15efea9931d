//! Printers: a canonical pretty-printer for the surface tree (its output
//! re-parses to the same tree) and a reader for kernel terms used by
//! diagnostics and `eval` output.

use super::{SBranch, SDecl, SExpr, SKind, SourceFile};
use crate::syntax::{Branch, Subst, Telescope, Term};

pub fn pretty_file(file: &SourceFile) -> String {
    let mut out = String::new();
    for (i, d) in file.decls.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        pretty_decl(d, &mut out);
    }
    out
}

fn pretty_decl(d: &SDecl, out: &mut String) {
    match d {
        SDecl::Data {
            name,
            params,
            ctors,
            ..
        } => {
            out.push_str(&format!("data {name}("));
            push_bindings(params, out);
            out.push_str(") {\n");
            for (i, (cname, fields, _)) in ctors.iter().enumerate() {
                out.push_str(&format!("  {cname}("));
                push_bindings(fields, out);
                out.push(')');
                if i + 1 < ctors.len() {
                    out.push(';');
                }
                out.push('\n');
            }
            out.push_str("}\n");
        }
        SDecl::Def { name, ty, body, .. } => {
            out.push_str(&format!("def {name} : {} :=\n  ", pretty_term(ty)));
            out.push_str(&pretty_at(body, 1));
            out.push('\n');
        }
    }
}

fn push_bindings(bs: &[(String, SExpr)], out: &mut String) {
    for (i, (n, ty)) in bs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&format!("{n} : {}", pretty_term(ty)));
    }
}

pub fn pretty_term(e: &SExpr) -> String {
    pretty_at(e, 0)
}

fn indent(level: usize) -> String {
    "  ".repeat(level)
}

fn pretty_at(e: &SExpr, level: usize) -> String {
    match &e.kind {
        SKind::Var(n) => n.clone(),
        SKind::Type => "Type".into(),
        SKind::Pi(..) => {
            let mut groups = Vec::new();
            let mut cur = e;
            while let SKind::Pi(n, dom, cod) = &cur.kind {
                groups.push(format!("({} : {})", n, pretty_at(dom, level)));
                cur = cod;
            }
            format!("Pi {}. {}", groups.join(" "), pretty_at(cur, level))
        }
        SKind::Lam(..) => {
            let mut names = Vec::new();
            let mut cur = e;
            while let SKind::Lam(n, body) = &cur.kind {
                names.push(n.clone());
                cur = body;
            }
            format!("\\{}. {}", names.join(" "), pretty_at(cur, level))
        }
        SKind::App(f, a) => {
            format!("{} {}", pretty_fun(f, level), pretty_atom(a, level))
        }
        SKind::Eq(ty, l, r) => format!(
            "Eq({}, {}, {})",
            pretty_at(ty, level),
            pretty_at(l, level),
            pretty_at(r, level)
        ),
        SKind::Refl(t) => format!("refl({})", pretty_at(t, level)),
        SKind::Call(n, args) => {
            let parts: Vec<String> = args.iter().map(|a| pretty_at(a, level)).collect();
            format!("{}({})", n, parts.join(", "))
        }
        SKind::Dot(inner) => match &inner.kind {
            SKind::Var(n) => format!(".{n}"),
            _ => format!(".({})", pretty_at(inner, level)),
        },
        SKind::Match(m) => {
            let scruts: Vec<String> = m.scrutinees.iter().map(|s| pretty_at(s, level)).collect();
            let mut tel = String::new();
            push_bindings(&m.tel, &mut tel);
            let mut out = format!(
                "match ({}) : ({}) to {} {{\n",
                scruts.join(", "),
                tel,
                pretty_at(&m.motive, level)
            );
            for SBranch {
                tel: btel,
                pattern,
                body,
            } in &m.branches
            {
                let mut bt = String::new();
                push_bindings(btel, &mut bt);
                let pats: Vec<String> = pattern.iter().map(|p| pretty_at(p, level + 1)).collect();
                out.push_str(&format!(
                    "{}| ({}). ({}) => {}\n",
                    indent(level + 1),
                    bt,
                    pats.join(", "),
                    pretty_at(body, level + 1)
                ));
            }
            out.push_str(&format!("{}}}", indent(level)));
            out
        }
    }
}

/// Function position of an application: applications chain without parens,
/// binders need them.
fn pretty_fun(e: &SExpr, level: usize) -> String {
    match &e.kind {
        SKind::App(..) => pretty_at(e, level),
        _ => pretty_atom(e, level),
    }
}

fn pretty_atom(e: &SExpr, level: usize) -> String {
    match &e.kind {
        SKind::Var(_)
        | SKind::Type
        | SKind::Eq(..)
        | SKind::Refl(_)
        | SKind::Call(..)
        | SKind::Dot(_) => pretty_at(e, level),
        _ => format!("({})", pretty_at(e, level)),
    }
}

/// Kernel terms rendered with their retained name hints; names are
/// disambiguated against the enclosing scope.
pub fn term_to_string(t: &Term, scope: &[String]) -> String {
    let mut names: Vec<String> = scope.to_vec();
    render(t, &mut names)
}

pub fn term_in_telescope(t: &Term, tel: &Telescope) -> String {
    let mut names = tel_names(tel);
    render(t, &mut names)
}

pub fn tel_names(tel: &Telescope) -> Vec<String> {
    let mut names: Vec<String> = Vec::with_capacity(tel.len());
    for e in &tel.entries {
        names.push(fresh_name(&e.name.to_string(), &names));
    }
    names
}

pub fn telescope_to_string(tel: &Telescope) -> String {
    let mut names: Vec<String> = Vec::new();
    let mut parts = Vec::with_capacity(tel.len());
    for e in &tel.entries {
        let ty = render(&e.ty, &mut names.clone());
        let n = fresh_name(&e.name.to_string(), &names);
        parts.push(format!("{n} : {ty}"));
        names.push(n);
    }
    format!("({})", parts.join(", "))
}

pub fn subst_to_string(s: &Subst, scope: &[String]) -> String {
    let parts: Vec<String> = s.terms.iter().map(|t| term_to_string(t, scope)).collect();
    format!("({})", parts.join(", "))
}

fn fresh_name(hint: &str, taken: &[String]) -> String {
    let base = if hint.is_empty() || hint == "_" {
        "x".to_string()
    } else {
        hint.to_string()
    };
    if !taken.contains(&base) {
        return base;
    }
    let mut k = 1usize;
    loop {
        let cand = format!("{base}{k}");
        if !taken.contains(&cand) {
            return cand;
        }
        k += 1;
    }
}

fn render(t: &Term, names: &mut Vec<String>) -> String {
    match t {
        Term::Var(i) => {
            if *i < names.len() {
                names[names.len() - 1 - i].clone()
            } else {
                format!("#{i}")
            }
        }
        Term::Type => "Type".into(),
        Term::Pi(hint, dom, cod) => {
            let d = render(dom, names);
            let n = fresh_name(&hint.to_string(), names);
            names.push(n.clone());
            let c = render(cod, names);
            names.pop();
            format!("Pi ({n} : {d}). {c}")
        }
        Term::Lam(hint, body) => {
            let n = fresh_name(&hint.to_string(), names);
            names.push(n.clone());
            let b = render(body, names);
            names.pop();
            format!("\\{n}. {b}")
        }
        Term::App(f, a) => {
            let fs = match **f {
                Term::App(..) | Term::Var(_) | Term::Def(_) => render(f, names),
                _ => format!("({})", render(f, names)),
            };
            let as_ = match **a {
                Term::Var(_)
                | Term::Type
                | Term::Def(_)
                | Term::TyCon(..)
                | Term::DataCon(..)
                | Term::Refl(_)
                | Term::Eq(..) => render(a, names),
                _ => format!("({})", render(a, names)),
            };
            format!("{fs} {as_}")
        }
        Term::Eq(ty, l, r) => format!(
            "Eq({}, {}, {})",
            render(ty, names),
            render(l, names),
            render(r, names)
        ),
        Term::Refl(a) => format!("refl({})", render(a, names)),
        Term::TyCon(n, args) | Term::DataCon(n, args) => {
            if args.is_empty() {
                n.clone()
            } else {
                let parts: Vec<String> = args.terms.iter().map(|a| render(a, names)).collect();
                format!("{}({})", n, parts.join(", "))
            }
        }
        Term::Def(n) => n.clone(),
        Term::Match(m) => {
            let scruts: Vec<String> = m
                .scrutinees
                .terms
                .iter()
                .map(|s| render(s, names))
                .collect();
            let tel = telescope_to_string(&m.scrutinee_tel);
            let tel_scope = tel_names(&m.scrutinee_tel);
            let motive = term_to_string(&m.motive, &tel_scope);
            let mut out = format!("match ({}) : {} to {} {{ ", scruts.join(", "), tel, motive);
            for (
                i,
                Branch {
                    tel: btel,
                    pattern,
                    body,
                },
            ) in m.branches.iter().enumerate()
            {
                if i > 0 {
                    out.push(' ');
                }
                let bscope = tel_names(btel);
                let pats: Vec<String> = pattern
                    .terms
                    .iter()
                    .map(|p| term_to_string(p, &bscope))
                    .collect();
                out.push_str(&format!(
                    "| {}. ({}) => {}",
                    telescope_to_string(btel),
                    pats.join(", "),
                    term_to_string(body, &bscope)
                ));
            }
            out.push_str(" }");
            out
        }
    }
}
