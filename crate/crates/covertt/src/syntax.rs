//! Core syntax: terms, telescopes, substitutions, and the top-level signature,
//! together with the simultaneous-substitution calculus.
//!
//! Variables are de Bruijn indices counted from the innermost binder, so
//! alpha-equivalence is plain structural equality. Telescopes are snoc-ordered:
//! the most recently bound entry is last, and when a whole telescope serves as
//! the context, its last entry is `Var(0)`.

use std::fmt;

use indexmap::IndexMap;

pub type Name = String;

/// A binder name kept only for printing. Equality always holds so that
/// renaming a binder never changes term identity.
#[derive(Clone, Debug, Default)]
pub struct NameHint(pub Name);

impl NameHint {
    pub fn new(s: impl Into<Name>) -> Self {
        NameHint(s.into())
    }
}

impl PartialEq for NameHint {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}
impl Eq for NameHint {}

impl fmt::Display for NameHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "_")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Terms and types share one sort.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    /// de Bruijn index, innermost binder = 0.
    Var(usize),
    /// The single universe. It classifies types but has no type itself.
    Type,
    /// Dependent function type; the codomain binds one variable.
    Pi(NameHint, Box<Term>, Box<Term>),
    /// Lambda; unannotated, so it only checks against a known Pi type.
    Lam(NameHint, Box<Term>),
    App(Box<Term>, Box<Term>),
    /// Propositional equality `Eq(ty, lhs, rhs)`.
    Eq(Box<Term>, Box<Term>, Box<Term>),
    Refl(Box<Term>),
    /// Type constructor applied to its parameters.
    TyCon(Name, Subst),
    /// Data constructor applied to parameters ++ fields.
    DataCon(Name, Subst),
    /// Reference to a top-level definition.
    Def(Name),
    Match(Box<MatchTerm>),
}

/// A pattern match. The scrutinee telescope, motive, and branches are all
/// closed: the telescope is well-formed in the empty context, the motive is
/// scoped over the telescope alone, and each branch body over its own pattern
/// telescope alone. Only `scrutinees` lives in the enclosing context, so
/// substitution does not descend into the rest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchTerm {
    pub scrutinees: Subst,
    pub scrutinee_tel: Telescope,
    pub motive: Term,
    pub branches: Vec<Branch>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    /// Pattern variables.
    pub tel: Telescope,
    /// `tel ⊢ pattern ⇒ scrutinee_tel`.
    pub pattern: Subst,
    /// Scoped over `tel` only.
    pub body: Term,
}

/// A dependency-ordered sequence of typed binders. Entry `k`'s type is scoped
/// over entries `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Telescope {
    pub entries: Vec<TelescopeEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TelescopeEntry {
    pub name: NameHint,
    pub ty: Term,
}

/// A dependency-ordered sequence of terms inhabiting a telescope. `terms[k]`
/// inhabits entry `k`'s type instantiated by the earlier terms. Checked
/// substitutions travel with their codomain telescope as an explicit pair.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Subst {
    pub terms: Vec<Term>,
}

impl Telescope {
    pub fn new() -> Self {
        Telescope {
            entries: Vec::new(),
        }
    }

    pub fn from_entries(entries: Vec<(Name, Term)>) -> Self {
        Telescope {
            entries: entries
                .into_iter()
                .map(|(n, ty)| TelescopeEntry {
                    name: NameHint(n),
                    ty,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, name: impl Into<Name>, ty: Term) {
        self.entries.push(TelescopeEntry {
            name: NameHint(name.into()),
            ty,
        });
    }

    /// Entry `pos`'s type, weakened so it is scoped over the whole telescope.
    pub fn type_at(&self, pos: usize) -> Term {
        shift(&self.entries[pos].ty, self.len() - pos)
    }

    /// The variable for entry `pos` when the whole telescope is the context.
    pub fn var_at(&self, pos: usize) -> Term {
        Term::Var(self.len() - 1 - pos)
    }

    /// Position (from the start) for a de Bruijn index in this telescope.
    pub fn pos_of_index(&self, index: usize) -> usize {
        self.len() - 1 - index
    }

    pub fn is_well_scoped(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(k, e)| is_well_scoped(&e.ty, k))
    }

    /// Concatenation; `other`'s entries must already be scoped over `self`.
    pub fn append(&self, other: &Telescope) -> Telescope {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Telescope { entries }
    }
}

impl Subst {
    pub fn new(terms: Vec<Term>) -> Self {
        Subst { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Identity substitution of a context with `n` entries: the first
    /// component (outermost entry) is the highest index.
    pub fn id(n: usize) -> Self {
        Subst {
            terms: (0..n).rev().map(Term::Var).collect(),
        }
    }

    /// Appends a term (the syntactic `⟨θ, t⟩`).
    pub fn extend(&self, t: Term) -> Self {
        let mut terms = self.terms.clone();
        terms.push(t);
        Subst { terms }
    }

    /// Drops the last component (the syntactic weakening projection `p ∘ _`).
    pub fn drop_last(&self) -> Self {
        let mut terms = self.terms.clone();
        terms.pop();
        Subst { terms }
    }

    pub fn last(&self) -> Option<&Term> {
        self.terms.last()
    }

    /// The term substituted for telescope position `pos` (counted from the
    /// start of the codomain telescope).
    pub fn at_pos(&self, pos: usize) -> &Term {
        &self.terms[pos]
    }
}

/// Shifts every free variable of `t` up by `by`.
pub fn shift(t: &Term, by: usize) -> Term {
    shift_from(t, 0, by)
}

/// Shifts free variables with index >= `cutoff` up by `by`.
pub fn shift_from(t: &Term, cutoff: usize, by: usize) -> Term {
    if by == 0 {
        return t.clone();
    }
    match t {
        Term::Var(i) => {
            if *i >= cutoff {
                Term::Var(i + by)
            } else {
                Term::Var(*i)
            }
        }
        Term::Type => Term::Type,
        Term::Pi(n, dom, cod) => Term::Pi(
            n.clone(),
            Box::new(shift_from(dom, cutoff, by)),
            Box::new(shift_from(cod, cutoff + 1, by)),
        ),
        Term::Lam(n, body) => Term::Lam(n.clone(), Box::new(shift_from(body, cutoff + 1, by))),
        Term::App(f, a) => Term::App(
            Box::new(shift_from(f, cutoff, by)),
            Box::new(shift_from(a, cutoff, by)),
        ),
        Term::Eq(ty, l, r) => Term::Eq(
            Box::new(shift_from(ty, cutoff, by)),
            Box::new(shift_from(l, cutoff, by)),
            Box::new(shift_from(r, cutoff, by)),
        ),
        Term::Refl(a) => Term::Refl(Box::new(shift_from(a, cutoff, by))),
        Term::TyCon(n, args) => Term::TyCon(n.clone(), shift_subst(args, cutoff, by)),
        Term::DataCon(n, args) => Term::DataCon(n.clone(), shift_subst(args, cutoff, by)),
        Term::Def(n) => Term::Def(n.clone()),
        Term::Match(m) => Term::Match(Box::new(MatchTerm {
            scrutinees: shift_subst(&m.scrutinees, cutoff, by),
            scrutinee_tel: m.scrutinee_tel.clone(),
            motive: m.motive.clone(),
            branches: m.branches.clone(),
        })),
    }
}

fn shift_subst(s: &Subst, cutoff: usize, by: usize) -> Subst {
    Subst {
        terms: s.terms.iter().map(|t| shift_from(t, cutoff, by)).collect(),
    }
}

/// Simultaneous substitution `[sub/Δ]t`: replaces the entire free context of
/// `t` (which must have exactly `sub.len()` entries, plus any local binders)
/// by `sub`'s terms. Capture-avoiding; local binders are untouched.
///
/// Panics on an arity breach: a free variable pointing past the end of `sub`
/// means a scoping invariant was broken upstream.
pub fn apply_subst(t: &Term, sub: &Subst) -> Term {
    apply_subst_at(t, sub, 0)
}

fn apply_subst_at(t: &Term, sub: &Subst, depth: usize) -> Term {
    match t {
        Term::Var(i) => {
            if *i < depth {
                Term::Var(*i)
            } else {
                let k = *i - depth;
                let n = sub.len();
                assert!(
                    k < n,
                    "apply_subst: variable {} escapes a substitution for {} entries",
                    i,
                    n
                );
                shift(&sub.terms[n - 1 - k], depth)
            }
        }
        Term::Type => Term::Type,
        Term::Pi(n, dom, cod) => Term::Pi(
            n.clone(),
            Box::new(apply_subst_at(dom, sub, depth)),
            Box::new(apply_subst_at(cod, sub, depth + 1)),
        ),
        Term::Lam(n, body) => Term::Lam(n.clone(), Box::new(apply_subst_at(body, sub, depth + 1))),
        Term::App(f, a) => Term::App(
            Box::new(apply_subst_at(f, sub, depth)),
            Box::new(apply_subst_at(a, sub, depth)),
        ),
        Term::Eq(ty, l, r) => Term::Eq(
            Box::new(apply_subst_at(ty, sub, depth)),
            Box::new(apply_subst_at(l, sub, depth)),
            Box::new(apply_subst_at(r, sub, depth)),
        ),
        Term::Refl(a) => Term::Refl(Box::new(apply_subst_at(a, sub, depth))),
        Term::TyCon(n, args) => Term::TyCon(n.clone(), apply_subst_subst_at(args, sub, depth)),
        Term::DataCon(n, args) => Term::DataCon(n.clone(), apply_subst_subst_at(args, sub, depth)),
        Term::Def(n) => Term::Def(n.clone()),
        Term::Match(m) => Term::Match(Box::new(MatchTerm {
            scrutinees: apply_subst_subst_at(&m.scrutinees, sub, depth),
            scrutinee_tel: m.scrutinee_tel.clone(),
            motive: m.motive.clone(),
            branches: m.branches.clone(),
        })),
    }
}

fn apply_subst_subst_at(s: &Subst, sub: &Subst, depth: usize) -> Subst {
    Subst {
        terms: s
            .terms
            .iter()
            .map(|t| apply_subst_at(t, sub, depth))
            .collect(),
    }
}

/// Pointwise composition `θ ∘ σ`: given `θ : Γ → Δ` and `σ : Ξ → Γ`, the
/// result substitutes `Ξ → Δ`.
pub fn compose_subst(theta: &Subst, sigma: &Subst) -> Subst {
    Subst {
        terms: theta.terms.iter().map(|t| apply_subst(t, sigma)).collect(),
    }
}

/// Applies a substitution to every component of another substitution over the
/// same context (both share the domain; `s`'s codomain is unchanged).
pub fn subst_subst(s: &Subst, sub: &Subst) -> Subst {
    compose_subst(s, sub)
}

/// Reindexes `t` from `Γ` to `Γ` extended by `by` entries (the syntactic
/// counterpart of iterated weakening).
pub fn weaken(t: &Term, by: usize) -> Term {
    shift(t, by)
}

/// Substitutes the innermost binder of `t` by `arg` (β and Pi-codomain
/// instantiation), downshifting the remaining free variables.
pub fn subst_top(t: &Term, arg: &Term) -> Term {
    subst_top_at(t, arg, 0)
}

fn subst_top_at(t: &Term, arg: &Term, depth: usize) -> Term {
    match t {
        Term::Var(i) => {
            if *i == depth {
                shift(arg, depth)
            } else if *i > depth {
                Term::Var(i - 1)
            } else {
                Term::Var(*i)
            }
        }
        Term::Type => Term::Type,
        Term::Pi(n, dom, cod) => Term::Pi(
            n.clone(),
            Box::new(subst_top_at(dom, arg, depth)),
            Box::new(subst_top_at(cod, arg, depth + 1)),
        ),
        Term::Lam(n, body) => Term::Lam(n.clone(), Box::new(subst_top_at(body, arg, depth + 1))),
        Term::App(f, a) => Term::App(
            Box::new(subst_top_at(f, arg, depth)),
            Box::new(subst_top_at(a, arg, depth)),
        ),
        Term::Eq(ty, l, r) => Term::Eq(
            Box::new(subst_top_at(ty, arg, depth)),
            Box::new(subst_top_at(l, arg, depth)),
            Box::new(subst_top_at(r, arg, depth)),
        ),
        Term::Refl(a) => Term::Refl(Box::new(subst_top_at(a, arg, depth))),
        Term::TyCon(n, args) => Term::TyCon(
            n.clone(),
            Subst {
                terms: args
                    .terms
                    .iter()
                    .map(|t| subst_top_at(t, arg, depth))
                    .collect(),
            },
        ),
        Term::DataCon(n, args) => Term::DataCon(
            n.clone(),
            Subst {
                terms: args
                    .terms
                    .iter()
                    .map(|t| subst_top_at(t, arg, depth))
                    .collect(),
            },
        ),
        Term::Def(n) => Term::Def(n.clone()),
        Term::Match(m) => Term::Match(Box::new(MatchTerm {
            scrutinees: Subst {
                terms: m
                    .scrutinees
                    .terms
                    .iter()
                    .map(|t| subst_top_at(t, arg, depth))
                    .collect(),
            },
            scrutinee_tel: m.scrutinee_tel.clone(),
            motive: m.motive.clone(),
            branches: m.branches.clone(),
        })),
    }
}

/// True when every free variable of `t` has index < `depth` and all nested
/// match scaffolding obeys the closedness discipline.
pub fn is_well_scoped(t: &Term, depth: usize) -> bool {
    match t {
        Term::Var(i) => *i < depth,
        Term::Type | Term::Def(_) => true,
        Term::Pi(_, dom, cod) => is_well_scoped(dom, depth) && is_well_scoped(cod, depth + 1),
        Term::Lam(_, body) => is_well_scoped(body, depth + 1),
        Term::App(f, a) => is_well_scoped(f, depth) && is_well_scoped(a, depth),
        Term::Eq(ty, l, r) => {
            is_well_scoped(ty, depth) && is_well_scoped(l, depth) && is_well_scoped(r, depth)
        }
        Term::Refl(a) => is_well_scoped(a, depth),
        Term::TyCon(_, args) | Term::DataCon(_, args) => {
            args.terms.iter().all(|t| is_well_scoped(t, depth))
        }
        Term::Match(m) => {
            m.scrutinees.terms.iter().all(|t| is_well_scoped(t, depth))
                && m.scrutinee_tel.is_well_scoped()
                && is_well_scoped(&m.motive, m.scrutinee_tel.len())
                && m.branches.iter().all(|b| {
                    b.tel.is_well_scoped()
                        && b.pattern
                            .terms
                            .iter()
                            .all(|t| is_well_scoped(t, b.tel.len()))
                        && is_well_scoped(&b.body, b.tel.len())
                })
        }
    }
}

/// Collects the free variable indices of `t` (relative to its own context).
pub fn free_vars(t: &Term) -> Vec<usize> {
    let mut out = Vec::new();
    collect_free(t, 0, &mut out);
    out.sort_unstable();
    out.dedup();
    out
}

fn collect_free(t: &Term, depth: usize, out: &mut Vec<usize>) {
    match t {
        Term::Var(i) => {
            if *i >= depth {
                out.push(*i - depth);
            }
        }
        Term::Type | Term::Def(_) => {}
        Term::Pi(_, dom, cod) => {
            collect_free(dom, depth, out);
            collect_free(cod, depth + 1, out);
        }
        Term::Lam(_, body) => collect_free(body, depth + 1, out),
        Term::App(f, a) => {
            collect_free(f, depth, out);
            collect_free(a, depth, out);
        }
        Term::Eq(ty, l, r) => {
            collect_free(ty, depth, out);
            collect_free(l, depth, out);
            collect_free(r, depth, out);
        }
        Term::Refl(a) => collect_free(a, depth, out),
        Term::TyCon(_, args) | Term::DataCon(_, args) => {
            for t in &args.terms {
                collect_free(t, depth, out);
            }
        }
        Term::Match(m) => {
            for t in &m.scrutinees.terms {
                collect_free(t, depth, out);
            }
        }
    }
}

/// Does `Var(index)` occur free in `t`?
pub fn occurs(t: &Term, index: usize) -> bool {
    free_vars(t).contains(&index)
}

/// Top-level datatype table and definitions. Iteration order is declaration
/// order throughout, which keeps coverage trees and oracle reports
/// deterministic.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    pub tycons: IndexMap<Name, TyConInfo>,
    pub datacons: IndexMap<Name, DataConInfo>,
    pub defs: IndexMap<Name, DefInfo>,
}

#[derive(Clone, Debug)]
pub struct TyConInfo {
    /// Closed telescope of parameters.
    pub params: Telescope,
    /// Data constructors in declaration order.
    pub datacons: Vec<Name>,
}

#[derive(Clone, Debug)]
pub struct DataConInfo {
    pub owner: Name,
    /// Fields, scoped over the owner's parameter telescope.
    pub fields: Telescope,
}

#[derive(Clone, Debug)]
pub struct DefInfo {
    pub ty: Term,
    pub body: Term,
    /// The body mentions the definition itself. Accepted unchecked; excluded
    /// from any totality claims.
    pub recursive: bool,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tycon(&self, name: &str) -> Option<&TyConInfo> {
        self.tycons.get(name)
    }

    pub fn datacon(&self, name: &str) -> Option<&DataConInfo> {
        self.datacons.get(name)
    }

    pub fn def(&self, name: &str) -> Option<&DefInfo> {
        self.defs.get(name)
    }

    /// Full argument telescope of a data constructor: owner params ++ fields.
    /// `DataCon` terms instantiate exactly this.
    pub fn datacon_args_tel(&self, name: &str) -> Option<Telescope> {
        let dc = self.datacons.get(name)?;
        let tc = self.tycons.get(&dc.owner)?;
        Some(tc.params.append(&dc.fields))
    }

    pub fn add_tycon(&mut self, name: impl Into<Name>, params: Telescope) {
        self.tycons.insert(
            name.into(),
            TyConInfo {
                params,
                datacons: Vec::new(),
            },
        );
    }

    pub fn add_datacon(
        &mut self,
        name: impl Into<Name>,
        owner: impl Into<Name>,
        fields: Telescope,
    ) {
        let name = name.into();
        let owner = owner.into();
        if let Some(tc) = self.tycons.get_mut(&owner) {
            tc.datacons.push(name.clone());
        }
        self.datacons.insert(name, DataConInfo { owner, fields });
    }

    pub fn add_def(&mut self, name: impl Into<Name>, ty: Term, body: Term) {
        let name = name.into();
        let recursive = mentions_def(&body, &name);
        self.defs.insert(
            name,
            DefInfo {
                ty,
                body,
                recursive,
            },
        );
    }
}

/// Does the term reference the named definition anywhere (including inside
/// match branches)?
pub fn mentions_def(t: &Term, name: &str) -> bool {
    match t {
        Term::Var(_) | Term::Type => false,
        Term::Def(n) => n == name,
        Term::Pi(_, a, b) | Term::App(a, b) => mentions_def(a, name) || mentions_def(b, name),
        Term::Lam(_, a) | Term::Refl(a) => mentions_def(a, name),
        Term::Eq(a, b, c) => {
            mentions_def(a, name) || mentions_def(b, name) || mentions_def(c, name)
        }
        Term::TyCon(_, args) | Term::DataCon(_, args) => {
            args.terms.iter().any(|t| mentions_def(t, name))
        }
        Term::Match(m) => {
            m.scrutinees.terms.iter().any(|t| mentions_def(t, name))
                || m.scrutinee_tel
                    .entries
                    .iter()
                    .any(|e| mentions_def(&e.ty, name))
                || mentions_def(&m.motive, name)
                || m.branches.iter().any(|b| {
                    b.tel.entries.iter().any(|e| mentions_def(&e.ty, name))
                        || b.pattern.terms.iter().any(|t| mentions_def(t, name))
                        || mentions_def(&b.body, name)
                })
        }
    }
}

// Convenience constructors, used pervasively by tests and the elaborator.

pub fn var(i: usize) -> Term {
    Term::Var(i)
}

pub fn pi(name: &str, dom: Term, cod: Term) -> Term {
    Term::Pi(NameHint::new(name), Box::new(dom), Box::new(cod))
}

pub fn lam(name: &str, body: Term) -> Term {
    Term::Lam(NameHint::new(name), Box::new(body))
}

pub fn app(f: Term, a: Term) -> Term {
    Term::App(Box::new(f), Box::new(a))
}

pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
    args.into_iter().fold(f, app)
}

pub fn eq(ty: Term, l: Term, r: Term) -> Term {
    Term::Eq(Box::new(ty), Box::new(l), Box::new(r))
}

pub fn refl(t: Term) -> Term {
    Term::Refl(Box::new(t))
}

pub fn tycon(name: &str, args: Vec<Term>) -> Term {
    Term::TyCon(name.into(), Subst::new(args))
}

pub fn datacon(name: &str, args: Vec<Term>) -> Term {
    Term::DataCon(name.into(), Subst::new(args))
}

pub fn def(name: &str) -> Term {
    Term::Def(name.into())
}
