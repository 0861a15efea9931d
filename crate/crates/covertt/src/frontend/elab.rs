//! Name resolution and elaboration of the surface tree into kernel syntax.
//! Dot patterns mark forced positions for the reader and the printer; the
//! kernel validates forced positions by conversion, so the dots erase here.

use indexmap::IndexMap;

use super::{Diagnostic, SBranch, SDecl, SExpr, SKind, Severity, SourceFile, Span};
use crate::syntax::{Branch, MatchTerm, Name, Signature, Subst, Telescope, Term};

pub struct ElabOut {
    pub sig: Signature,
    pub def_spans: IndexMap<Name, Span>,
}

pub fn elaborate(file: &SourceFile) -> Result<ElabOut, Diagnostic> {
    let mut sig = Signature::new();
    let mut def_spans = IndexMap::new();
    for decl in &file.decls {
        match decl {
            SDecl::Data {
                name,
                params,
                ctors,
                span,
            } => {
                if names_taken(&sig, name) {
                    return Err(dup(name, *span));
                }
                let params_tel = elab_telescope(&sig, None, &[], params, *span)?;
                sig.add_tycon(name.clone(), params_tel.clone());
                let param_names: Vec<String> = params.iter().map(|(n, _)| n.clone()).collect();
                for (cname, fields, cspan) in ctors {
                    if names_taken(&sig, cname) {
                        return Err(dup(cname, *cspan));
                    }
                    let fields_tel = elab_telescope(&sig, None, &param_names, fields, *cspan)?;
                    sig.add_datacon(cname.clone(), name.clone(), fields_tel);
                }
                def_spans.insert(name.clone(), *span);
            }
            SDecl::Def {
                name,
                ty,
                body,
                span,
            } => {
                if names_taken(&sig, name) {
                    return Err(dup(name, *span));
                }
                let ty_t = elab_term(&sig, None, &mut Vec::new(), ty, false)?;
                // The definition's own name is in scope in its body; it is
                // accepted unchecked and flagged recursive.
                let body_t = elab_term(&sig, Some(name), &mut Vec::new(), body, false)?;
                sig.add_def(name.clone(), ty_t, body_t);
                def_spans.insert(name.clone(), *span);
            }
        }
    }
    Ok(ElabOut { sig, def_spans })
}

/// Elaborates one closed term against a finished signature, for CLI
/// arguments.
pub fn elab_closed_term(sig: &Signature, e: &SExpr) -> Result<Term, Diagnostic> {
    elab_term(sig, None, &mut Vec::new(), e, false)
}

fn names_taken(sig: &Signature, n: &str) -> bool {
    sig.tycon(n).is_some() || sig.datacon(n).is_some() || sig.def(n).is_some()
}

fn dup(name: &str, span: Span) -> Diagnostic {
    Diagnostic {
        severity: Severity::Error,
        message: format!("the name {name} is already declared"),
        span,
        rule: None,
    }
}

fn err(message: String, span: Span) -> Diagnostic {
    Diagnostic {
        severity: Severity::Error,
        message,
        span,
        rule: None,
    }
}

/// Binder entries elaborated progressively; earlier names scope over later
/// types. `base` pre-populates the scope (datatype parameters under fields).
fn elab_telescope(
    sig: &Signature,
    current_def: Option<&str>,
    base: &[String],
    entries: &[(String, SExpr)],
    _span: Span,
) -> Result<Telescope, Diagnostic> {
    let mut scope: Vec<String> = base.to_vec();
    let mut tel = Telescope::new();
    for (n, ty) in entries {
        let t = elab_term(sig, current_def, &mut scope, ty, false)?;
        tel.push(n.clone(), t);
        scope.push(n.clone());
    }
    Ok(tel)
}

fn elab_term(
    sig: &Signature,
    current_def: Option<&str>,
    scope: &mut Vec<String>,
    e: &SExpr,
    in_pattern: bool,
) -> Result<Term, Diagnostic> {
    match &e.kind {
        SKind::Type => Ok(Term::Type),
        SKind::Var(n) => {
            if let Some(i) = scope.iter().rev().position(|s| s == n) {
                return Ok(Term::Var(i));
            }
            if Some(n.as_str()) == current_def {
                return Ok(Term::Def(n.clone()));
            }
            if sig.def(n).is_some() {
                return Ok(Term::Def(n.clone()));
            }
            if let Some(full) = sig.datacon_args_tel(n) {
                if full.is_empty() {
                    return Ok(Term::DataCon(n.clone(), Subst::new(vec![])));
                }
                return Err(err(
                    format!("constructor {n} expects {} arguments", full.len()),
                    e.span,
                ));
            }
            if let Some(tc) = sig.tycon(n) {
                if tc.params.is_empty() {
                    return Ok(Term::TyCon(n.clone(), Subst::new(vec![])));
                }
                return Err(err(
                    format!("type constructor {n} expects {} arguments", tc.params.len()),
                    e.span,
                ));
            }
            Err(err(format!("unbound name {n}"), e.span))
        }
        SKind::Call(n, args) => {
            let mut elab_args = Vec::with_capacity(args.len());
            for a in args {
                elab_args.push(elab_term(sig, current_def, scope, a, in_pattern)?);
            }
            if let Some(full) = sig.datacon_args_tel(n) {
                if full.len() != elab_args.len() {
                    return Err(err(
                        format!(
                            "constructor {n} expects {} arguments (parameters then fields), got {}",
                            full.len(),
                            elab_args.len()
                        ),
                        e.span,
                    ));
                }
                return Ok(Term::DataCon(n.clone(), Subst::new(elab_args)));
            }
            if let Some(tc) = sig.tycon(n) {
                if tc.params.len() != elab_args.len() {
                    return Err(err(
                        format!(
                            "type constructor {n} expects {} arguments, got {}",
                            tc.params.len(),
                            elab_args.len()
                        ),
                        e.span,
                    ));
                }
                return Ok(Term::TyCon(n.clone(), Subst::new(elab_args)));
            }
            // Not a constructor: a bound variable or definition applied
            // with call syntax is ordinary application.
            if let Some(i) = scope.iter().rev().position(|s| s == n) {
                return Ok(elab_args.into_iter().fold(Term::Var(i), crate::syntax::app));
            }
            if Some(n.as_str()) == current_def || sig.def(n).is_some() {
                return Ok(elab_args
                    .into_iter()
                    .fold(Term::Def(n.clone()), crate::syntax::app));
            }
            Err(err(format!("unbound name {n}"), e.span))
        }
        SKind::Pi(n, dom, cod) => {
            let d = elab_term(sig, current_def, scope, dom, in_pattern)?;
            scope.push(n.clone());
            let c = elab_term(sig, current_def, scope, cod, in_pattern);
            scope.pop();
            Ok(crate::syntax::pi(n, d, c?))
        }
        SKind::Lam(n, body) => {
            scope.push(n.clone());
            let b = elab_term(sig, current_def, scope, body, in_pattern);
            scope.pop();
            Ok(crate::syntax::lam(n, b?))
        }
        SKind::App(f, a) => {
            let ft = elab_term(sig, current_def, scope, f, in_pattern)?;
            let at = elab_term(sig, current_def, scope, a, in_pattern)?;
            Ok(crate::syntax::app(ft, at))
        }
        SKind::Eq(ty, l, r) => {
            let t = elab_term(sig, current_def, scope, ty, in_pattern)?;
            let lt = elab_term(sig, current_def, scope, l, in_pattern)?;
            let rt = elab_term(sig, current_def, scope, r, in_pattern)?;
            Ok(crate::syntax::eq(t, lt, rt))
        }
        SKind::Refl(a) => {
            let at = elab_term(sig, current_def, scope, a, in_pattern)?;
            Ok(crate::syntax::refl(at))
        }
        SKind::Dot(inner) => {
            if !in_pattern {
                return Err(err(
                    "forced (dot) terms are only meaningful inside patterns".into(),
                    e.span,
                ));
            }
            elab_term(sig, current_def, scope, inner, true)
        }
        SKind::Match(m) => {
            let mut outer = scope.clone();
            let mut scrutinees = Vec::with_capacity(m.scrutinees.len());
            for s in &m.scrutinees {
                scrutinees.push(elab_term(sig, current_def, &mut outer, s, false)?);
            }
            // The scrutinee telescope, motive, and branches are closed:
            // they may not mention enclosing binders.
            let tel = elab_telescope(sig, current_def, &[], &m.tel, e.span)?;
            let tel_names: Vec<String> = m.tel.iter().map(|(n, _)| n.clone()).collect();
            let mut motive_scope = tel_names.clone();
            let motive = elab_term(sig, current_def, &mut motive_scope, &m.motive, false)?;
            let mut branches = Vec::with_capacity(m.branches.len());
            for SBranch {
                tel: btel,
                pattern,
                body,
            } in &m.branches
            {
                let btel_t = elab_telescope(sig, current_def, &[], btel, e.span)?;
                let bnames: Vec<String> = btel.iter().map(|(n, _)| n.clone()).collect();
                let mut bscope = bnames.clone();
                let mut pat_terms = Vec::with_capacity(pattern.len());
                for p in pattern {
                    pat_terms.push(elab_term(sig, current_def, &mut bscope, p, true)?);
                }
                let mut body_scope = bnames;
                let body_t = elab_term(sig, current_def, &mut body_scope, body, false)?;
                branches.push(Branch {
                    tel: btel_t,
                    pattern: Subst::new(pat_terms),
                    body: body_t,
                });
            }
            Ok(Term::Match(Box::new(MatchTerm {
                scrutinees: Subst::new(scrutinees),
                scrutinee_tel: tel,
                motive,
                branches,
            })))
        }
    }
}
