//! Bidirectional type checking. Lambdas and refl check against annotated
//! types; everything else infers. Match terms discharge their coverage
//! obligation through the coverage module.

use std::fmt;

use crate::conversion::{conv, normalize, whnf, NormError};
use crate::coverage::{check_cover, Clause, CoverError, CoverTree};
use crate::syntax::{
    apply_subst, is_well_scoped, subst_top, Name, Signature, Subst, Telescope, Term,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeError {
    pub kind: TypeErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeErrorKind {
    UnboundVariable(String),
    NotAFunction(Term),
    TypeMismatch {
        expected: Term,
        got: Term,
    },
    NotAType(Term),
    BadConstructorArity {
        name: Name,
        expected: usize,
        got: usize,
    },
    NotCovering(CoverError),
    BranchTypeMismatch {
        index: usize,
        cause: Box<TypeError>,
    },
    IllFormedTelescope,
    UniverseHasNoType,
    /// An unannotated lambda (or other checking-only form) in inference
    /// position.
    CannotInfer(Term),
    ArityMismatch {
        expected: usize,
        got: usize,
    },
    Normalization(NormError),
}

impl TypeError {
    fn new(kind: TypeErrorKind) -> Self {
        TypeError { kind }
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TypeErrorKind::UnboundVariable(n) => write!(f, "unbound variable {n}"),
            TypeErrorKind::NotAFunction(_) => write!(f, "not a function type"),
            TypeErrorKind::TypeMismatch { .. } => write!(f, "type mismatch"),
            TypeErrorKind::NotAType(_) => write!(f, "not a type"),
            TypeErrorKind::BadConstructorArity {
                name,
                expected,
                got,
            } => {
                write!(
                    f,
                    "constructor {name} expects {expected} arguments, got {got}"
                )
            }
            TypeErrorKind::NotCovering(e) => write!(f, "patterns are not covering: {e}"),
            TypeErrorKind::BranchTypeMismatch { index, cause } => {
                write!(f, "branch {index}: {cause}")
            }
            TypeErrorKind::IllFormedTelescope => write!(f, "ill-formed telescope"),
            TypeErrorKind::UniverseHasNoType => write!(f, "the universe has no type"),
            TypeErrorKind::CannotInfer(_) => write!(f, "cannot infer a type; annotate"),
            TypeErrorKind::ArityMismatch { expected, got } => {
                write!(
                    f,
                    "substitution has {got} terms for a telescope of {expected}"
                )
            }
            TypeErrorKind::Normalization(e) => write!(f, "{e}"),
        }
    }
}

impl From<NormError> for TypeError {
    fn from(e: NormError) -> Self {
        TypeError::new(TypeErrorKind::Normalization(e))
    }
}

/// A declaration-level error from signature checking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigError {
    pub decl: Name,
    pub error: TypeError,
}

/// Successful signature check; recursive definitions are listed because the
/// kernel accepts them unchecked.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SigReport {
    pub recursive_defs: Vec<Name>,
    /// Coverage derivations for every match encountered, in checking order,
    /// keyed by the definition that contains them.
    pub covers: Vec<(Name, CoverTree)>,
}

pub struct Checker<'s> {
    pub sig: &'s Signature,
    covers: std::cell::RefCell<Vec<CoverTree>>,
}

impl<'s> Checker<'s> {
    pub fn new(sig: &'s Signature) -> Self {
        Checker {
            sig,
            covers: Default::default(),
        }
    }

    /// Coverage derivations recorded since construction, in checking order.
    pub fn take_covers(&self) -> Vec<CoverTree> {
        std::mem::take(&mut self.covers.borrow_mut())
    }

    fn fail<T>(&self, kind: TypeErrorKind) -> Result<T, TypeError> {
        Err(TypeError::new(kind))
    }

    /// Infers a type for `t` over `gamma`.
    pub fn infer(&self, gamma: &Telescope, t: &Term) -> Result<Term, TypeError> {
        match t {
            Term::Var(i) => {
                if *i < gamma.len() {
                    Ok(gamma.type_at(gamma.pos_of_index(*i)))
                } else {
                    self.fail(TypeErrorKind::UnboundVariable(format!("#{i}")))
                }
            }
            Term::Type => self.fail(TypeErrorKind::UniverseHasNoType),
            Term::Pi(_, dom, cod) => {
                self.check_is_type(gamma, dom)?;
                let mut inner = gamma.clone();
                inner.push("", (**dom).clone());
                self.check_is_type(&inner, cod)?;
                Ok(Term::Type)
            }
            Term::Lam(..) => self.fail(TypeErrorKind::CannotInfer(t.clone())),
            Term::App(f, a) => {
                let f_ty = self.infer(gamma, f)?;
                match whnf(self.sig, &f_ty)? {
                    Term::Pi(_, dom, cod) => {
                        self.check(gamma, a, &dom)?;
                        Ok(subst_top(&cod, a))
                    }
                    other => self.fail(TypeErrorKind::NotAFunction(other)),
                }
            }
            Term::Eq(ty, l, r) => {
                self.check_is_type(gamma, ty)?;
                self.check(gamma, l, ty)?;
                self.check(gamma, r, ty)?;
                Ok(Term::Type)
            }
            Term::Refl(a) => {
                let ty = self.infer(gamma, a)?;
                Ok(Term::Eq(Box::new(ty), a.clone(), a.clone()))
            }
            Term::TyCon(n, args) => {
                let tc = self
                    .sig
                    .tycon(n)
                    .ok_or_else(|| TypeError::new(TypeErrorKind::UnboundVariable(n.clone())))?;
                if args.len() != tc.params.len() {
                    return self.fail(TypeErrorKind::BadConstructorArity {
                        name: n.clone(),
                        expected: tc.params.len(),
                        got: args.len(),
                    });
                }
                self.check_subst(gamma, args, &tc.params)?;
                Ok(Term::Type)
            }
            Term::DataCon(n, args) => {
                let dc = self
                    .sig
                    .datacon(n)
                    .ok_or_else(|| TypeError::new(TypeErrorKind::UnboundVariable(n.clone())))?;
                let n_params = self
                    .sig
                    .tycon(&dc.owner)
                    .map(|tc| tc.params.len())
                    .ok_or_else(|| {
                        TypeError::new(TypeErrorKind::UnboundVariable(dc.owner.clone()))
                    })?;
                let full = self.sig.datacon_args_tel(n).unwrap();
                if args.len() != full.len() {
                    return self.fail(TypeErrorKind::BadConstructorArity {
                        name: n.clone(),
                        expected: full.len(),
                        got: args.len(),
                    });
                }
                self.check_subst(gamma, args, &full)?;
                let params = Subst::new(args.terms[..n_params].to_vec());
                Ok(Term::TyCon(dc.owner.clone(), params))
            }
            Term::Def(n) => match self.sig.def(n) {
                Some(d) => Ok(d.ty.clone()),
                None => self.fail(TypeErrorKind::UnboundVariable(n.clone())),
            },
            Term::Match(m) => {
                self.check_telescope(&m.scrutinee_tel)?;
                self.check_subst(gamma, &m.scrutinees, &m.scrutinee_tel)?;
                self.check_is_type(&m.scrutinee_tel, &m.motive)?;
                for (i, b) in m.branches.iter().enumerate() {
                    let wrap = |e: TypeError| {
                        TypeError::new(TypeErrorKind::BranchTypeMismatch {
                            index: i,
                            cause: Box::new(e),
                        })
                    };
                    self.check_telescope(&b.tel).map_err(wrap)?;
                    self.check_subst(&b.tel, &b.pattern, &m.scrutinee_tel)
                        .map_err(wrap)?;
                    let expected = apply_subst(&m.motive, &b.pattern);
                    self.check(&b.tel, &b.body, &expected).map_err(wrap)?;
                }
                let clauses: Vec<Clause> = m
                    .branches
                    .iter()
                    .map(|b| Clause {
                        tel: b.tel.clone(),
                        pattern: b.pattern.clone(),
                    })
                    .collect();
                match check_cover(self.sig, &m.scrutinee_tel, &clauses) {
                    Ok(tree) => self.covers.borrow_mut().push(tree),
                    Err(e) => return self.fail(TypeErrorKind::NotCovering(e)),
                }
                Ok(apply_subst(&m.motive, &m.scrutinees))
            }
        }
    }

    /// Checks `t` against `expected` over `gamma`.
    pub fn check(&self, gamma: &Telescope, t: &Term, expected: &Term) -> Result<(), TypeError> {
        match t {
            Term::Lam(_, body) => match whnf(self.sig, expected)? {
                Term::Pi(_, dom, cod) => {
                    let mut inner = gamma.clone();
                    inner.push("", (*dom).clone());
                    self.check(&inner, body, &cod)
                }
                other => self.fail(TypeErrorKind::NotAFunction(other)),
            },
            Term::Refl(a) => match whnf(self.sig, expected)? {
                Term::Eq(ty, l, r) => {
                    self.check(gamma, a, &ty)?;
                    if conv(self.sig, a, &l)? && conv(self.sig, a, &r)? {
                        Ok(())
                    } else {
                        self.fail(TypeErrorKind::TypeMismatch {
                            expected: normalize(self.sig, expected)?,
                            got: normalize(self.sig, &Term::Eq(ty.clone(), a.clone(), a.clone()))?,
                        })
                    }
                }
                other => {
                    let got_ty = self.infer(gamma, t)?;
                    self.fail(TypeErrorKind::TypeMismatch {
                        expected: other,
                        got: got_ty,
                    })
                }
            },
            _ => {
                let got = self.infer(gamma, t)?;
                if conv(self.sig, &got, expected)? {
                    Ok(())
                } else {
                    self.fail(TypeErrorKind::TypeMismatch {
                        expected: normalize(self.sig, expected)?,
                        got: normalize(self.sig, &got)?,
                    })
                }
            }
        }
    }

    /// `t` classifies as a type: it is literally the universe, or it infers
    /// to the universe.
    pub fn check_is_type(&self, gamma: &Telescope, t: &Term) -> Result<(), TypeError> {
        if let Term::Type = t {
            return Ok(());
        }
        let ty = self.infer(gamma, t)?;
        match whnf(self.sig, &ty)? {
            Term::Type => Ok(()),
            _ => self.fail(TypeErrorKind::NotAType(t.clone())),
        }
    }

    /// Every entry's type checks as a type over the earlier entries.
    pub fn check_telescope(&self, tel: &Telescope) -> Result<(), TypeError> {
        for k in 0..tel.len() {
            if !is_well_scoped(&tel.entries[k].ty, k) {
                return self.fail(TypeErrorKind::IllFormedTelescope);
            }
            let prefix = Telescope {
                entries: tel.entries[..k].to_vec(),
            };
            self.check_is_type(&prefix, &tel.entries[k].ty)?;
        }
        Ok(())
    }

    /// `gamma ⊢ env ⇒ target`: the k-th term checks against the k-th type
    /// instantiated by the earlier terms.
    pub fn check_subst(
        &self,
        gamma: &Telescope,
        env: &Subst,
        target: &Telescope,
    ) -> Result<(), TypeError> {
        if env.len() != target.len() {
            return self.fail(TypeErrorKind::ArityMismatch {
                expected: target.len(),
                got: env.len(),
            });
        }
        for k in 0..env.len() {
            let prefix = Subst::new(env.terms[..k].to_vec());
            let expected = apply_subst(&target.entries[k].ty, &prefix);
            self.check(gamma, &env.terms[k], &expected)?;
        }
        Ok(())
    }
}

/// Checks the whole signature: parameter and field telescopes are closed and
/// well-formed, and every definition checks against its declared type.
pub fn check_signature(sig: &Signature) -> Result<SigReport, SigError> {
    let checker = Checker::new(sig);
    let empty = Telescope::new();
    let mut report = SigReport::default();
    for (name, tc) in &sig.tycons {
        checker
            .check_telescope(&tc.params)
            .map_err(|error| SigError {
                decl: name.clone(),
                error,
            })?;
    }
    for (name, dc) in &sig.datacons {
        let owner = sig.tycon(&dc.owner).ok_or_else(|| SigError {
            decl: name.clone(),
            error: TypeError::new(TypeErrorKind::UnboundVariable(dc.owner.clone())),
        })?;
        let full = owner.params.append(&dc.fields);
        checker.check_telescope(&full).map_err(|error| SigError {
            decl: name.clone(),
            error,
        })?;
    }
    for (name, d) in &sig.defs {
        checker
            .check_is_type(&empty, &d.ty)
            .and_then(|_| checker.check(&empty, &d.body, &d.ty))
            .map_err(|error| SigError {
                decl: name.clone(),
                error,
            })?;
        if d.recursive {
            report.recursive_defs.push(name.clone());
        }
        for tree in checker.take_covers() {
            report.covers.push((name.clone(), tree));
        }
    }
    Ok(report)
}
