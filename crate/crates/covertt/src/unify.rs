//! First-order unification over constructor terms, used to match on
//! equality proofs: a successful unification is returned as a pruned
//! telescope together with the most general unifier into the original one.
//! Distinct rigid heads clash (constructors are injective and disjoint);
//! positions blocked on function applications, matches, or binders are
//! reported as stuck rather than guessed.

use std::collections::VecDeque;
use std::fmt;

use crate::conversion::{conv, whnf, NormError};
use crate::syntax::{
    apply_subst, compose_subst, free_vars, occurs, Signature, Subst, Telescope, TelescopeEntry,
    Term,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnifyOutcome {
    Success(UnifySuccess),
    Clash(ClashInfo),
    Stuck { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnifySuccess {
    /// The variables not solved by the unifier, in dependency order.
    pub pruned_tel: Telescope,
    /// `pruned_tel ⊢ mgu ⇒ Γ` for the original telescope Γ.
    pub mgu: Subst,
    /// Injectivity of type constructor heads (or disjointness of type
    /// formers) was used; surfaced in derivation output.
    pub tycon_injectivity: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClashInfo {
    /// Argument indices from the roots of the two unified terms down to the
    /// disagreeing position.
    pub path: Vec<usize>,
    pub lhs_head: String,
    pub rhs_head: String,
}

impl fmt::Display for ClashInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} vs {}", self.lhs_head, self.rhs_head)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqsOutcome {
    Success(UnifySuccess),
    Clash { eq_index: usize, info: ClashInfo },
    Stuck { eq_index: usize, reason: String },
}

/// Unifies `t1` and `t2`, both of type `ty` over `gamma`.
pub fn unify(
    sig: &Signature,
    gamma: &Telescope,
    ty: &Term,
    t1: &Term,
    t2: &Term,
) -> Result<UnifyOutcome, NormError> {
    let mut st = UnifyState {
        sig,
        tel: gamma.clone(),
        mgu: Subst::id(gamma.len()),
        queue: VecDeque::new(),
        tycon_injectivity: false,
    };
    st.queue.push_back(Equation {
        path: Vec::new(),
        ty: ty.clone(),
        lhs: t1.clone(),
        rhs: t2.clone(),
    });
    st.run()
}

/// Solves a list of equations over `gamma` left to right, composing the
/// unifiers; a clash or stuck equation short-circuits with its index.
pub fn solve_telescope_eqs(
    sig: &Signature,
    gamma: &Telescope,
    eqs: &[(Term, Term, Term)],
) -> Result<EqsOutcome, NormError> {
    let mut tel = gamma.clone();
    let mut mgu = Subst::id(gamma.len());
    let mut flag = false;
    for (i, (ty, l, r)) in eqs.iter().enumerate() {
        let ty_i = apply_subst(ty, &mgu);
        let l_i = apply_subst(l, &mgu);
        let r_i = apply_subst(r, &mgu);
        match unify(sig, &tel, &ty_i, &l_i, &r_i)? {
            UnifyOutcome::Success(s) => {
                mgu = compose_subst(&mgu, &s.mgu);
                tel = s.pruned_tel;
                flag |= s.tycon_injectivity;
            }
            UnifyOutcome::Clash(info) => return Ok(EqsOutcome::Clash { eq_index: i, info }),
            UnifyOutcome::Stuck { reason } => {
                return Ok(EqsOutcome::Stuck {
                    eq_index: i,
                    reason,
                })
            }
        }
    }
    Ok(EqsOutcome::Success(UnifySuccess {
        pruned_tel: tel,
        mgu,
        tycon_injectivity: flag,
    }))
}

struct Equation {
    path: Vec<usize>,
    ty: Term,
    lhs: Term,
    rhs: Term,
}

struct UnifyState<'s> {
    sig: &'s Signature,
    tel: Telescope,
    /// tel ⊢ mgu ⇒ Γ (the original telescope).
    mgu: Subst,
    queue: VecDeque<Equation>,
    tycon_injectivity: bool,
}

impl<'s> UnifyState<'s> {
    fn run(mut self) -> Result<UnifyOutcome, NormError> {
        while let Some(eq) = self.queue.pop_front() {
            let lhs = whnf(self.sig, &eq.lhs)?;
            let rhs = whnf(self.sig, &eq.rhs)?;
            if lhs == rhs {
                continue;
            }
            match (&lhs, &rhs) {
                (Term::Var(i), Term::Var(j)) => {
                    let pi = self.tel.pos_of_index(*i);
                    let pj = self.tel.pos_of_index(*j);
                    // Solve the most recently bound so the pruned telescope
                    // stays dependency-ordered.
                    let (solved, kept) = if pi > pj { (pi, *j) } else { (pj, *i) };
                    let kept_term = Term::Var(kept);
                    if let Some(out) = self.solve(&eq.path, solved, &kept_term)? {
                        return Ok(out);
                    }
                }
                (Term::Var(i), other) => {
                    if let Some(out) = self.solve_flex(&eq.path, *i, other, false)? {
                        return Ok(out);
                    }
                }
                (other, Term::Var(j)) => {
                    if let Some(out) = self.solve_flex(&eq.path, *j, other, true)? {
                        return Ok(out);
                    }
                }
                (Term::DataCon(d1, a1), Term::DataCon(d2, a2)) => {
                    if d1 != d2 {
                        return Ok(UnifyOutcome::Clash(ClashInfo {
                            path: eq.path,
                            lhs_head: d1.clone(),
                            rhs_head: d2.clone(),
                        }));
                    }
                    if a1.len() != a2.len() {
                        return Ok(UnifyOutcome::Stuck {
                            reason: format!("arity mismatch on {d1}"),
                        });
                    }
                    let args_tel = match self.sig.datacon_args_tel(d1) {
                        Some(t) => t,
                        None => {
                            return Ok(UnifyOutcome::Stuck {
                                reason: format!("unknown constructor {d1}"),
                            })
                        }
                    };
                    self.decompose(&eq.path, &args_tel, a1, a2);
                }
                (Term::TyCon(c1, a1), Term::TyCon(c2, a2)) => {
                    self.tycon_injectivity = true;
                    if c1 != c2 {
                        return Ok(UnifyOutcome::Clash(ClashInfo {
                            path: eq.path,
                            lhs_head: c1.clone(),
                            rhs_head: c2.clone(),
                        }));
                    }
                    if a1.len() != a2.len() {
                        return Ok(UnifyOutcome::Stuck {
                            reason: format!("arity mismatch on {c1}"),
                        });
                    }
                    let params = match self.sig.tycon(c1) {
                        Some(tc) => tc.params.clone(),
                        None => {
                            return Ok(UnifyOutcome::Stuck {
                                reason: format!("unknown type constructor {c1}"),
                            })
                        }
                    };
                    self.decompose(&eq.path, &params, a1, a2);
                }
                (Term::Refl(a), Term::Refl(b)) => {
                    let ty_w = whnf(self.sig, &eq.ty)?;
                    match ty_w {
                        Term::Eq(t, _, _) => {
                            let mut path = eq.path.clone();
                            path.push(0);
                            self.queue.push_back(Equation {
                                path,
                                ty: (*t).clone(),
                                lhs: (**a).clone(),
                                rhs: (**b).clone(),
                            });
                        }
                        _ => {
                            return Ok(UnifyOutcome::Stuck {
                                reason: "refl at a non-equality type".into(),
                            })
                        }
                    }
                }
                (Term::Eq(ty1, l1, r1), Term::Eq(ty2, l2, r2)) => {
                    self.tycon_injectivity = true;
                    for (k, (a, b)) in [(ty1, ty2), (l1, l2), (r1, r2)].into_iter().enumerate() {
                        let mut path = eq.path.clone();
                        path.push(k);
                        let comp_ty = if k == 0 { Term::Type } else { (**ty1).clone() };
                        self.queue.push_back(Equation {
                            path,
                            ty: comp_ty,
                            lhs: (**a).clone(),
                            rhs: (**b).clone(),
                        });
                    }
                }
                (l, r) if is_type_former(l) && is_type_former(r) => {
                    // Distinct type formers denote distinct codes in the
                    // model, same assumption as type constructor injectivity.
                    self.tycon_injectivity = true;
                    return Ok(UnifyOutcome::Clash(ClashInfo {
                        path: eq.path,
                        lhs_head: head_name(l),
                        rhs_head: head_name(r),
                    }));
                }
                (l, r) => {
                    // One side is blocked (an application spine, a stuck
                    // match, a binder) or the heads are incomparable.
                    if conv(self.sig, l, r)? {
                        continue;
                    }
                    return Ok(UnifyOutcome::Stuck {
                        reason: format!(
                            "blocked on {} vs {} at a disagreement position",
                            head_name(l),
                            head_name(r)
                        ),
                    });
                }
            }
        }
        Ok(UnifyOutcome::Success(UnifySuccess {
            pruned_tel: self.tel,
            mgu: self.mgu,
            tycon_injectivity: self.tycon_injectivity,
        }))
    }

    fn decompose(&mut self, path: &[usize], args_tel: &Telescope, a1: &Subst, a2: &Subst) {
        for k in 0..a1.len().min(a2.len()) {
            let prefix = Subst::new(a1.terms[..k].to_vec());
            let ty_k = apply_subst(&args_tel.entries[k].ty, &prefix);
            let mut p = path.to_vec();
            p.push(k);
            self.queue.push_back(Equation {
                path: p,
                ty: ty_k,
                lhs: a1.terms[k].clone(),
                rhs: a2.terms[k].clone(),
            });
        }
    }

    fn solve_flex(
        &mut self,
        path: &[usize],
        index: usize,
        other: &Term,
        flipped: bool,
    ) -> Result<Option<UnifyOutcome>, NormError> {
        let pos = self.tel.pos_of_index(index);
        let var_name = self.tel.entries[pos].name.to_string();
        if occurs(other, index) {
            let (lhs_head, rhs_head) = if flipped {
                (head_name(other), var_name)
            } else {
                (var_name, head_name(other))
            };
            // Inductive values are finite, so a cyclic equation is empty.
            return Ok(Some(UnifyOutcome::Clash(ClashInfo {
                path: path.to_vec(),
                lhs_head,
                rhs_head,
            })));
        }
        if !canonical_solution(other) {
            return Ok(Some(UnifyOutcome::Stuck {
                reason: format!(
                    "cannot solve {} against a term with a non-constructor head",
                    var_name
                ),
            }));
        }
        self.solve(path, pos, other)
    }

    /// Solves telescope position `pos := term` and rewrites the state.
    /// Returns Some(Stuck) when the telescope cannot be re-scoped.
    fn solve(
        &mut self,
        _path: &[usize],
        pos: usize,
        term: &Term,
    ) -> Result<Option<UnifyOutcome>, NormError> {
        match remove_position(&self.tel, pos, Some(term)) {
            Some((new_tel, step)) => {
                self.mgu = compose_subst(&self.mgu, &step);
                for eq in self.queue.iter_mut() {
                    eq.ty = apply_subst(&eq.ty, &step);
                    eq.lhs = apply_subst(&eq.lhs, &step);
                    eq.rhs = apply_subst(&eq.rhs, &step);
                }
                self.tel = new_tel;
                Ok(None)
            }
            None => Ok(Some(UnifyOutcome::Stuck {
                reason: "dependency reordering required to solve variable".into(),
            })),
        }
    }
}

/// A term a variable may be solved to: constructors, variables, and type
/// formers all the way down. Applications of functions, matches, and
/// definitions stay opaque and block unification instead.
fn canonical_solution(t: &Term) -> bool {
    match t {
        Term::Var(_) | Term::Type => true,
        Term::Refl(a) => canonical_solution(a),
        Term::Pi(_, a, b) => canonical_solution(a) && canonical_solution(b),
        Term::Lam(_, a) => canonical_solution(a),
        Term::Eq(a, b, c) => {
            canonical_solution(a) && canonical_solution(b) && canonical_solution(c)
        }
        Term::TyCon(_, args) | Term::DataCon(_, args) => args.terms.iter().all(canonical_solution),
        Term::App(..) | Term::Match(_) | Term::Def(_) => false,
    }
}

fn is_type_former(t: &Term) -> bool {
    matches!(
        t,
        Term::Type | Term::Pi(..) | Term::Eq(..) | Term::TyCon(..)
    )
}

pub fn head_name(t: &Term) -> String {
    match t {
        Term::Var(i) => format!("var#{i}"),
        Term::Type => "Type".into(),
        Term::Pi(..) => "Pi".into(),
        Term::Lam(..) => "lambda".into(),
        Term::App(..) => "application".into(),
        Term::Eq(..) => "Eq".into(),
        Term::Refl(_) => "refl".into(),
        Term::TyCon(n, _) | Term::DataCon(n, _) => n.clone(),
        Term::Def(n) => n.clone(),
        Term::Match(_) => "match".into(),
    }
}

/// Removes telescope position `pos`, substituting `replacement` (a term over
/// the original telescope, not mentioning `pos`) into every later entry that
/// refers to it. Returns the new telescope and the substitution
/// `new ⊢ step ⇒ old`. Fails (None) when a later entry both precedes a
/// variable the replacement mentions and refers to `pos`, which would need a
/// telescope reordering, or when a later entry mentions `pos` and no
/// replacement is available.
pub(crate) fn remove_position(
    tel: &Telescope,
    pos: usize,
    replacement: Option<&Term>,
) -> Option<(Telescope, Subst)> {
    let n = tel.len();
    let max_fv_pos =
        replacement.and_then(|r| free_vars(r).into_iter().map(|idx| n - 1 - idx).max());
    // Positions the replacement depends on must be bound before any entry
    // that needs the replacement substituted in.
    let first_usable = max_fv_pos.map(|m| m + 1).unwrap_or(pos + 1);
    for q in pos + 1..n {
        let mentions = occurs(&tel.entries[q].ty, q - 1 - pos);
        if mentions && (replacement.is_none() || q < first_usable) {
            return None;
        }
    }

    let reindex_replacement = |target_old_len: usize| -> Option<Term> {
        let r = replacement?;
        reindex(r, n, target_old_len - 1, &|k| {
            if k == pos {
                None
            } else if k < pos {
                Some(k)
            } else {
                Some(k - 1)
            }
        })
    };

    let mut new_entries: Vec<TelescopeEntry> = Vec::with_capacity(n - 1);
    for (q, entry) in tel.entries.iter().enumerate() {
        if q < pos {
            new_entries.push(entry.clone());
        } else if q > pos {
            // Substitution from the new context of length q-1 into the old
            // context of length q.
            let mut comps = Vec::with_capacity(q);
            for k in 0..q {
                if k == pos {
                    let needs = occurs(&entry.ty, q - 1 - pos);
                    if needs {
                        comps.push(reindex_replacement(q)?);
                    } else {
                        comps.push(Term::Type);
                    }
                } else {
                    let k_new = if k < pos { k } else { k - 1 };
                    comps.push(Term::Var((q - 1) - 1 - k_new));
                }
            }
            new_entries.push(TelescopeEntry {
                name: entry.name.clone(),
                ty: apply_subst(&entry.ty, &Subst::new(comps)),
            });
        }
    }
    let new_tel = Telescope {
        entries: new_entries,
    };

    let mut step_terms = Vec::with_capacity(n);
    for k in 0..n {
        if k == pos {
            match replacement {
                Some(_) => step_terms.push(reindex_replacement(n)?),
                // Removal of an entry nothing later mentions: the component
                // only matters to consumers that never project it.
                None => step_terms.push(Term::Type),
            }
        } else {
            let k_new = if k < pos { k } else { k - 1 };
            step_terms.push(Term::Var((n - 1) - 1 - k_new));
        }
    }
    Some((new_tel, Subst::new(step_terms)))
}

/// Remaps the free variables of `t` from a context of `old_len` positions to
/// one of `new_len` positions; `map` sends old positions to new ones.
pub(crate) fn reindex(
    t: &Term,
    old_len: usize,
    new_len: usize,
    map: &dyn Fn(usize) -> Option<usize>,
) -> Option<Term> {
    reindex_at(t, 0, old_len, new_len, map)
}

fn reindex_at(
    t: &Term,
    depth: usize,
    old_len: usize,
    new_len: usize,
    map: &dyn Fn(usize) -> Option<usize>,
) -> Option<Term> {
    Some(match t {
        Term::Var(i) => {
            if *i < depth {
                Term::Var(*i)
            } else {
                let pos_old = old_len.checked_sub(1 + (*i - depth))?;
                let pos_new = map(pos_old)?;
                if pos_new >= new_len {
                    return None;
                }
                Term::Var(depth + (new_len - 1 - pos_new))
            }
        }
        Term::Type => Term::Type,
        Term::Def(n) => Term::Def(n.clone()),
        Term::Pi(n, a, b) => Term::Pi(
            n.clone(),
            Box::new(reindex_at(a, depth, old_len, new_len, map)?),
            Box::new(reindex_at(b, depth + 1, old_len, new_len, map)?),
        ),
        Term::Lam(n, a) => Term::Lam(
            n.clone(),
            Box::new(reindex_at(a, depth + 1, old_len, new_len, map)?),
        ),
        Term::App(f, a) => Term::App(
            Box::new(reindex_at(f, depth, old_len, new_len, map)?),
            Box::new(reindex_at(a, depth, old_len, new_len, map)?),
        ),
        Term::Eq(a, b, c) => Term::Eq(
            Box::new(reindex_at(a, depth, old_len, new_len, map)?),
            Box::new(reindex_at(b, depth, old_len, new_len, map)?),
            Box::new(reindex_at(c, depth, old_len, new_len, map)?),
        ),
        Term::Refl(a) => Term::Refl(Box::new(reindex_at(a, depth, old_len, new_len, map)?)),
        Term::TyCon(n, args) => Term::TyCon(
            n.clone(),
            reindex_subst(args, depth, old_len, new_len, map)?,
        ),
        Term::DataCon(n, args) => Term::DataCon(
            n.clone(),
            reindex_subst(args, depth, old_len, new_len, map)?,
        ),
        Term::Match(m) => Term::Match(Box::new(crate::syntax::MatchTerm {
            scrutinees: reindex_subst(&m.scrutinees, depth, old_len, new_len, map)?,
            scrutinee_tel: m.scrutinee_tel.clone(),
            motive: m.motive.clone(),
            branches: m.branches.clone(),
        })),
    })
}

fn reindex_subst(
    s: &Subst,
    depth: usize,
    old_len: usize,
    new_len: usize,
    map: &dyn Fn(usize) -> Option<usize>,
) -> Option<Subst> {
    let mut terms = Vec::with_capacity(s.len());
    for t in &s.terms {
        terms.push(reindex_at(t, depth, old_len, new_len, map)?);
    }
    Some(Subst::new(terms))
}
