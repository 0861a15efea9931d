//! Reduction and definitional equality: beta steps, match reduction,
//! definition unfolding, and the conversion check used by type conversion.
//!
//! The reduction relation has exactly three step kinds: beta on
//! applications, match reduction when the scrutinee is a pattern instance,
//! and unfolding of top-level definitions. Everything runs against a fuel
//! budget because recursive definitions are accepted unchecked.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::syntax::{apply_subst, subst_top, Branch, MatchTerm, Signature, Subst, Term};

pub const DEFAULT_FUEL: u64 = 100_000;

static FUEL_STEPS: AtomicU64 = AtomicU64::new(DEFAULT_FUEL);

/// Overrides the step budget used by the convenience entry points
/// (CLI `--fuel`). Set once at startup.
pub fn set_default_fuel(steps: u64) {
    FUEL_STEPS.store(steps.max(1), Ordering::Relaxed);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fuel {
    remaining: u64,
}

impl Fuel {
    pub fn new(steps: u64) -> Self {
        Fuel { remaining: steps }
    }

    pub fn default_budget() -> Self {
        Fuel::new(FUEL_STEPS.load(Ordering::Relaxed))
    }

    fn tick(&mut self) -> Result<(), NormError> {
        if self.remaining == 0 {
            return Err(NormError::FuelExhausted);
        }
        self.remaining -= 1;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormError {
    /// The step bound ran out; the term may diverge under unchecked
    /// recursion, or the bound was simply too small.
    FuelExhausted,
}

impl fmt::Display for NormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormError::FuelExhausted => write!(f, "reduction fuel exhausted"),
        }
    }
}

/// Outcome of matching a scrutinee substitution against a branch list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchResult {
    /// Branch `index` matched; `solution` substitutes the branch's pattern
    /// telescope from the enclosing scope, so that pattern[solution] is
    /// convertible to the scrutinee.
    Matched(usize, Subst),
    /// Some inspected position is not constructor-rigid yet.
    Stuck,
    /// Every inspected position is rigid but no pattern matches. Only
    /// reachable when the branches were never coverage-checked.
    NoBranch,
}

/// Weak-head normal form under the default fuel budget.
pub fn whnf(sig: &Signature, t: &Term) -> Result<Term, NormError> {
    whnf_fuel(sig, t, &mut Fuel::default_budget())
}

pub fn whnf_fuel(sig: &Signature, t: &Term, fuel: &mut Fuel) -> Result<Term, NormError> {
    let mut cur = t.clone();
    loop {
        match cur {
            Term::App(f, a) => {
                let f_w = whnf_fuel(sig, &f, fuel)?;
                match f_w {
                    Term::Lam(_, body) => {
                        fuel.tick()?;
                        cur = subst_top(&body, &a);
                    }
                    other => return Ok(Term::App(Box::new(other), a)),
                }
            }
            Term::Def(n) => match sig.def(&n) {
                Some(d) => {
                    fuel.tick()?;
                    cur = d.body.clone();
                }
                None => return Ok(Term::Def(n)),
            },
            Term::Match(m) => match match_branch_fuel(sig, &m.scrutinees, &m.branches, fuel)? {
                MatchResult::Matched(j, sol) => {
                    fuel.tick()?;
                    cur = apply_subst(&m.branches[j].body, &sol);
                }
                MatchResult::Stuck | MatchResult::NoBranch => return Ok(Term::Match(m)),
            },
            other => return Ok(other),
        }
    }
}

/// Finds the branch whose pattern the scrutinee instantiates. Constructor
/// positions bind pattern variables while matching left to right; parameter
/// slots, refl arguments, and other non-constructor pattern positions are
/// forced, checked by conversion once all variables are solved.
pub fn match_branch(
    sig: &Signature,
    scrutinee: &Subst,
    branches: &[Branch],
) -> Result<MatchResult, NormError> {
    match_branch_fuel(sig, scrutinee, branches, &mut Fuel::default_budget())
}

pub fn match_branch_fuel(
    sig: &Signature,
    scrutinee: &Subst,
    branches: &[Branch],
    fuel: &mut Fuel,
) -> Result<MatchResult, NormError> {
    for (j, branch) in branches.iter().enumerate() {
        match try_branch(sig, scrutinee, branch, fuel)? {
            BranchOutcome::Matched(sol) => return Ok(MatchResult::Matched(j, sol)),
            BranchOutcome::Stuck => return Ok(MatchResult::Stuck),
            BranchOutcome::Mismatch => continue,
        }
    }
    Ok(MatchResult::NoBranch)
}

enum BranchOutcome {
    Matched(Subst),
    Stuck,
    Mismatch,
}

fn try_branch(
    sig: &Signature,
    scrutinee: &Subst,
    branch: &Branch,
    fuel: &mut Fuel,
) -> Result<BranchOutcome, NormError> {
    if branch.pattern.len() != scrutinee.len() {
        return Ok(BranchOutcome::Mismatch);
    }
    let n = branch.tel.len();
    let mut bindings: Vec<Option<Term>> = vec![None; n];
    let mut forced: Vec<(Term, Term)> = Vec::new();
    for (pat, scr) in branch.pattern.terms.iter().zip(scrutinee.terms.iter()) {
        match match_term(sig, branch, pat, scr, &mut bindings, &mut forced, fuel)? {
            Progress::Ok => {}
            Progress::Stuck => return Ok(BranchOutcome::Stuck),
            Progress::Mismatch => return Ok(BranchOutcome::Mismatch),
        }
    }
    let mut solved = Vec::with_capacity(n);
    for b in bindings {
        match b {
            Some(t) => solved.push(t),
            // A pattern variable never reached a binding position; the
            // pattern cannot drive reduction.
            None => return Ok(BranchOutcome::Stuck),
        }
    }
    let solution = Subst::new(solved);
    for (pat_side, scr_side) in forced {
        let inst = apply_subst(&pat_side, &solution);
        if !conv_fuel(sig, &inst, scr_side.clone(), fuel)? {
            return Ok(BranchOutcome::Mismatch);
        }
    }
    Ok(BranchOutcome::Matched(solution))
}

enum Progress {
    Ok,
    Stuck,
    Mismatch,
}

fn match_term(
    sig: &Signature,
    branch: &Branch,
    pat: &Term,
    scr: &Term,
    bindings: &mut Vec<Option<Term>>,
    forced: &mut Vec<(Term, Term)>,
    fuel: &mut Fuel,
) -> Result<Progress, NormError> {
    match pat {
        Term::Var(i) => {
            let pos = branch.tel.pos_of_index(*i);
            match &bindings[pos] {
                None => bindings[pos] = Some(scr.clone()),
                Some(_) => forced.push((pat.clone(), scr.clone())),
            }
            Ok(Progress::Ok)
        }
        Term::DataCon(d, pargs) => {
            let scr_w = whnf_fuel(sig, scr, fuel)?;
            match scr_w {
                Term::DataCon(d2, sargs) => {
                    if *d != d2 || pargs.len() != sargs.len() {
                        return Ok(Progress::Mismatch);
                    }
                    let n_params = sig
                        .datacon(d)
                        .and_then(|dc| sig.tycon(&dc.owner))
                        .map(|tc| tc.params.len())
                        .unwrap_or(0);
                    for (k, (p, s)) in pargs.terms.iter().zip(sargs.terms.iter()).enumerate() {
                        if k < n_params {
                            forced.push((p.clone(), s.clone()));
                        } else {
                            match match_term(sig, branch, p, s, bindings, forced, fuel)? {
                                Progress::Ok => {}
                                other => return Ok(other),
                            }
                        }
                    }
                    Ok(Progress::Ok)
                }
                other if is_rigid(&other) => Ok(Progress::Mismatch),
                _ => Ok(Progress::Stuck),
            }
        }
        Term::Refl(parg) => {
            let scr_w = whnf_fuel(sig, scr, fuel)?;
            match scr_w {
                Term::Refl(sarg) => {
                    forced.push(((**parg).clone(), (*sarg).clone()));
                    Ok(Progress::Ok)
                }
                other if is_rigid(&other) => Ok(Progress::Mismatch),
                _ => Ok(Progress::Stuck),
            }
        }
        // Any other pattern shape is a forced position.
        _ => {
            forced.push((pat.clone(), scr.clone()));
            Ok(Progress::Ok)
        }
    }
}

/// Constructor-rigid head: no substitution can change what it is.
pub fn is_rigid(t: &Term) -> bool {
    matches!(
        t,
        Term::DataCon(..)
            | Term::Refl(_)
            | Term::TyCon(..)
            | Term::Type
            | Term::Pi(..)
            | Term::Eq(..)
            | Term::Lam(..)
    )
}

/// Full normal form: no beta or match redex anywhere, definitions unfolded.
pub fn normalize(sig: &Signature, t: &Term) -> Result<Term, NormError> {
    normalize_fuel(sig, t, &mut Fuel::default_budget())
}

pub fn normalize_fuel(sig: &Signature, t: &Term, fuel: &mut Fuel) -> Result<Term, NormError> {
    let head = whnf_fuel(sig, t, fuel)?;
    Ok(match head {
        Term::Var(_) | Term::Type | Term::Def(_) => head,
        Term::Pi(n, dom, cod) => Term::Pi(
            n,
            Box::new(normalize_fuel(sig, &dom, fuel)?),
            Box::new(normalize_fuel(sig, &cod, fuel)?),
        ),
        Term::Lam(n, body) => Term::Lam(n, Box::new(normalize_fuel(sig, &body, fuel)?)),
        Term::App(f, a) => Term::App(
            Box::new(normalize_fuel(sig, &f, fuel)?),
            Box::new(normalize_fuel(sig, &a, fuel)?),
        ),
        Term::Eq(ty, l, r) => Term::Eq(
            Box::new(normalize_fuel(sig, &ty, fuel)?),
            Box::new(normalize_fuel(sig, &l, fuel)?),
            Box::new(normalize_fuel(sig, &r, fuel)?),
        ),
        Term::Refl(a) => Term::Refl(Box::new(normalize_fuel(sig, &a, fuel)?)),
        Term::TyCon(n, args) => Term::TyCon(n, normalize_subst(sig, &args, fuel)?),
        Term::DataCon(n, args) => Term::DataCon(n, normalize_subst(sig, &args, fuel)?),
        Term::Match(m) => {
            let mut branches = Vec::with_capacity(m.branches.len());
            for b in &m.branches {
                branches.push(Branch {
                    tel: normalize_tel(sig, &b.tel, fuel)?,
                    pattern: normalize_subst(sig, &b.pattern, fuel)?,
                    body: normalize_fuel(sig, &b.body, fuel)?,
                });
            }
            Term::Match(Box::new(MatchTerm {
                scrutinees: normalize_subst(sig, &m.scrutinees, fuel)?,
                scrutinee_tel: normalize_tel(sig, &m.scrutinee_tel, fuel)?,
                motive: normalize_fuel(sig, &m.motive, fuel)?,
                branches,
            }))
        }
    })
}

fn normalize_subst(sig: &Signature, s: &Subst, fuel: &mut Fuel) -> Result<Subst, NormError> {
    let mut terms = Vec::with_capacity(s.len());
    for t in &s.terms {
        terms.push(normalize_fuel(sig, t, fuel)?);
    }
    Ok(Subst::new(terms))
}

fn normalize_tel(
    sig: &Signature,
    tel: &crate::syntax::Telescope,
    fuel: &mut Fuel,
) -> Result<crate::syntax::Telescope, NormError> {
    let mut out = crate::syntax::Telescope::new();
    for e in &tel.entries {
        out.entries.push(crate::syntax::TelescopeEntry {
            name: e.name.clone(),
            ty: normalize_fuel(sig, &e.ty, fuel)?,
        });
    }
    Ok(out)
}

/// Definitional equality check: syntactic equality of normal forms (alpha is
/// handled by the index representation). Sound for the equality generated by
/// beta, match reduction, unfolding, and congruence.
pub fn conv(sig: &Signature, t1: &Term, t2: &Term) -> Result<bool, NormError> {
    if t1 == t2 {
        return Ok(true);
    }
    let mut fuel = Fuel::default_budget();
    Ok(normalize_fuel(sig, t1, &mut fuel)? == normalize_fuel(sig, t2, &mut fuel)?)
}

fn conv_fuel(sig: &Signature, t1: &Term, t2: Term, fuel: &mut Fuel) -> Result<bool, NormError> {
    if *t1 == t2 {
        return Ok(true);
    }
    Ok(normalize_fuel(sig, t1, fuel)? == normalize_fuel(sig, &t2, fuel)?)
}
