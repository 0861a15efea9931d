//! Surface syntax, elaboration, printing, and diagnostics: the layer that
//! turns `.ctt` text into a checked signature and renders results back.

pub mod elab;
pub mod lex;
pub mod parse;
pub mod print;

use serde_json::{json, Value as Json};

use crate::coverage::{CoverError, CoverTree};
use crate::syntax::{Name, Signature, Term};
use crate::typecheck::{check_signature, SigReport, TypeError, TypeErrorKind};

pub use elab::{elab_closed_term, elaborate, ElabOut};
pub use parse::{parse, parse_term};
pub use print::{
    pretty_file, pretty_term, subst_to_string, tel_names, telescope_to_string, term_in_telescope,
    term_to_string,
};

/// Byte range of a node in its source file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// One reported problem; every checker or coverage error maps to exactly
/// one of these. The rule tag names the typing or coverage rule involved.
#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: Span,
    pub rule: Option<String>,
}

impl Diagnostic {
    pub fn to_json(&self) -> Json {
        json!({
            "severity": match self.severity { Severity::Error => "error", Severity::Warning => "warning" },
            "message": self.message,
            "span": { "start": self.span.start, "end": self.span.end },
            "rule": self.rule,
        })
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match &self.rule {
            Some(r) => write!(
                f,
                "{sev}[{r}]: {} (bytes {}..{})",
                self.message, self.span.start, self.span.end
            ),
            None => {
                write!(
                    f,
                    "{sev}: {} (bytes {}..{})",
                    self.message, self.span.start, self.span.end
                )
            }
        }
    }
}

// Surface tree. Spans are carried on every expression node.

#[derive(Clone, Debug)]
pub struct SourceFile {
    pub decls: Vec<SDecl>,
}

#[derive(Clone, Debug)]
pub enum SDecl {
    Data {
        name: String,
        params: Vec<(String, SExpr)>,
        ctors: Vec<(String, Vec<(String, SExpr)>, Span)>,
        span: Span,
    },
    Def {
        name: String,
        ty: SExpr,
        body: SExpr,
        span: Span,
    },
}

#[derive(Clone, Debug)]
pub struct SExpr {
    pub kind: SKind,
    pub span: Span,
}

#[derive(Clone, Debug)]
pub enum SKind {
    Var(String),
    Type,
    Pi(String, Box<SExpr>, Box<SExpr>),
    Lam(String, Box<SExpr>),
    App(Box<SExpr>, Box<SExpr>),
    Eq(Box<SExpr>, Box<SExpr>, Box<SExpr>),
    Refl(Box<SExpr>),
    /// `NAME(args…)`: a type or data constructor application.
    Call(String, Vec<SExpr>),
    /// `.t`: a forced (inaccessible) pattern position.
    Dot(Box<SExpr>),
    Match(SMatch),
}

#[derive(Clone, Debug)]
pub struct SMatch {
    pub scrutinees: Vec<SExpr>,
    pub tel: Vec<(String, SExpr)>,
    pub motive: Box<SExpr>,
    pub branches: Vec<SBranch>,
}

#[derive(Clone, Debug)]
pub struct SBranch {
    pub tel: Vec<(String, SExpr)>,
    pub pattern: Vec<SExpr>,
    pub body: SExpr,
}

/// A fully processed file: parsed, elaborated, signature-checked.
#[derive(Debug)]
pub struct CheckedFile {
    pub source: SourceFile,
    pub sig: Signature,
    pub report: SigReport,
    pub def_spans: indexmap::IndexMap<Name, Span>,
}

/// Parses, elaborates, and checks a whole file. Definitions are processed
/// in file order; forward references fail during elaboration.
pub fn check_text(text: &str) -> Result<CheckedFile, Diagnostic> {
    let source = parse(text)?;
    let ElabOut { sig, def_spans } = elaborate(&source)?;
    match check_signature(&sig) {
        Ok(report) => Ok(CheckedFile {
            source,
            sig,
            report,
            def_spans,
        }),
        Err(e) => {
            let span = def_spans.get(&e.decl).copied().unwrap_or_default();
            Err(type_error_to_diagnostic(&e.decl, &e.error, span))
        }
    }
}

pub fn type_error_to_diagnostic(decl: &str, e: &TypeError, span: Span) -> Diagnostic {
    let (message, rule) = describe_type_error(e);
    Diagnostic {
        severity: Severity::Error,
        message: format!("in {decl}: {message}"),
        span,
        rule: Some(rule),
    }
}

fn describe_type_error(e: &TypeError) -> (String, String) {
    match &e.kind {
        TypeErrorKind::UnboundVariable(n) => (format!("unbound variable {n}"), "TyVar".into()),
        TypeErrorKind::NotAFunction(t) => (
            format!("expected a function type, found {}", term_to_string(t, &[])),
            "TyApp".into(),
        ),
        TypeErrorKind::TypeMismatch { expected, got } => (
            format!(
                "type mismatch: expected {}, got {}",
                term_to_string(expected, &[]),
                term_to_string(got, &[])
            ),
            "TypeConv".into(),
        ),
        TypeErrorKind::NotAType(t) => (
            format!("{} is not a type", term_to_string(t, &[])),
            "CtxCons".into(),
        ),
        TypeErrorKind::BadConstructorArity {
            name,
            expected,
            got,
        } => (
            format!("constructor {name} expects {expected} arguments, got {got}"),
            "TyCtor".into(),
        ),
        TypeErrorKind::NotCovering(ce) => (describe_cover_error(ce), "TyCase".into()),
        TypeErrorKind::BranchTypeMismatch { index, cause } => {
            let (inner, rule) = describe_type_error(cause);
            (format!("branch {index}: {inner}"), rule)
        }
        TypeErrorKind::IllFormedTelescope => ("ill-formed telescope".into(), "CtxCons".into()),
        TypeErrorKind::UniverseHasNoType => {
            ("the universe Type has no type".into(), "TyVar".into())
        }
        TypeErrorKind::CannotInfer(t) => (
            format!("cannot infer a type for {}", term_to_string(t, &[])),
            "TypeConv".into(),
        ),
        TypeErrorKind::ArityMismatch { expected, got } => (
            format!("substitution has {got} components for a telescope of {expected}"),
            "EnvCons".into(),
        ),
        TypeErrorKind::Normalization(e) => (e.to_string(), "EqMatch".into()),
    }
}

pub fn describe_cover_error(ce: &CoverError) -> String {
    match ce {
        CoverError::MissingCase {
            witness_tel,
            witness_pattern,
        } => {
            let names = tel_names(witness_tel);
            format!(
                "patterns are not covering; missing case {} {}",
                telescope_to_string(witness_tel),
                subst_to_string(witness_pattern, &names)
            )
        }
        CoverError::Unreachable { clause } => {
            format!("clause {clause} is unreachable")
        }
        CoverError::Overlap {
            clause_a, clause_b, ..
        } => {
            format!("clauses {clause_a} and {clause_b} overlap")
        }
        CoverError::Undecidable { reason } => {
            format!("cannot decide coverage: {reason}")
        }
    }
}

/// Human-readable derivation, one rule per line.
pub fn explain_tree(tree: &CoverTree) -> String {
    let mut out = String::new();
    explain_at(tree, 0, &mut out);
    out
}

fn explain_at(tree: &CoverTree, level: usize, out: &mut String) {
    let pad = "  ".repeat(level);
    match tree {
        CoverTree::Leaf { clause, .. } => {
            out.push_str(&format!("{pad}Leaf -> clause {clause}\n"));
        }
        CoverTree::SplitCon {
            var_name, children, ..
        } => {
            out.push_str(&format!("{pad}SplitCon on {var_name}\n"));
            for (con, child) in children {
                out.push_str(&format!("{pad}  case {con}:\n"));
                explain_at(child, level + 2, out);
            }
        }
        CoverTree::SplitRefl {
            var_name,
            tycon_injectivity,
            child,
            ..
        } => {
            if *tycon_injectivity {
                out.push_str(&format!(
                    "{pad}SplitRefl on {var_name} (uses type constructor injectivity)\n"
                ));
            } else {
                out.push_str(&format!("{pad}SplitRefl on {var_name}\n"));
            }
            explain_at(child, level + 1, out);
        }
        CoverTree::Absurd {
            var_name, reason, ..
        } => {
            let why = match reason {
                crate::coverage::AbsurdReason::Clash(c) => format!("clash: {c}"),
                crate::coverage::AbsurdReason::EmptyType(n) => format!("empty type: {n}"),
            };
            out.push_str(&format!("{pad}Absurd at {var_name} ({why})\n"));
        }
    }
}

/// All match terms inside a term, outermost first.
pub fn collect_matches(t: &Term, out: &mut Vec<crate::syntax::MatchTerm>) {
    match t {
        Term::Var(_) | Term::Type | Term::Def(_) => {}
        Term::Pi(_, a, b) | Term::App(a, b) => {
            collect_matches(a, out);
            collect_matches(b, out);
        }
        Term::Lam(_, a) | Term::Refl(a) => collect_matches(a, out),
        Term::Eq(a, b, c) => {
            collect_matches(a, out);
            collect_matches(b, out);
            collect_matches(c, out);
        }
        Term::TyCon(_, args) | Term::DataCon(_, args) => {
            for a in &args.terms {
                collect_matches(a, out);
            }
        }
        Term::Match(m) => {
            out.push((**m).clone());
            for s in &m.scrutinees.terms {
                collect_matches(s, out);
            }
            for b in &m.branches {
                collect_matches(&b.body, out);
            }
        }
    }
}
