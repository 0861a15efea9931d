//! The coverage relation: decides whether a clause set covers a scrutinee
//! telescope by elaborating a derivation tree, clause-directed in the style
//! of case-tree compilers.
//!
//! Four node kinds build the tree. A variable pattern set is already a
//! cover (Leaf, via a renaming). Splitting a datatype variable into one
//! child per constructor refines a cover (SplitCon), with Fording equality
//! fields refl-split eagerly. Matching an equality variable against refl
//! prunes the telescope through the most general unifier (SplitRefl). A
//! child whose context is visibly empty (an empty datatype, or an equality
//! whose sides clash) is pruned (Absurd).

use serde_json::{json, Value as Json};

use crate::conversion::{conv, whnf, NormError};
use crate::syntax::{
    apply_subst, compose_subst, occurs, shift, Name, Signature, Subst, Telescope, TelescopeEntry,
    Term,
};
use crate::unify::{remove_position, unify, ClashInfo, UnifyOutcome};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub tel: Telescope,
    /// `tel ⊢ pattern ⇒ Ξ`.
    pub pattern: Subst,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverTree {
    Leaf {
        clause: usize,
        /// `tel ⊢ renaming ⇒ clause.tel`; instantiating the clause pattern
        /// with it gives this leaf's pattern up to conversion at forced
        /// positions.
        renaming: Subst,
        tel: Telescope,
        pattern: Subst,
    },
    SplitCon {
        /// Telescope position split on.
        var: usize,
        var_name: Name,
        tel: Telescope,
        pattern: Subst,
        /// One child per data constructor, in declaration order.
        children: Vec<(Name, CoverTree)>,
    },
    SplitRefl {
        var: usize,
        var_name: Name,
        tel: Telescope,
        pattern: Subst,
        /// Type constructor injectivity was used by the unifier.
        tycon_injectivity: bool,
        child: Box<CoverTree>,
    },
    Absurd {
        var: usize,
        var_name: Name,
        tel: Telescope,
        pattern: Subst,
        reason: AbsurdReason,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbsurdReason {
    /// The equality at the split position has clashing sides.
    Clash(ClashInfo),
    /// The position's type is a datatype with no constructors.
    EmptyType(Name),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverError {
    /// A reachable leaf matched by no clause; the witness pattern is a
    /// substitution into the scrutinee telescope no clause matches.
    MissingCase {
        witness_tel: Telescope,
        witness_pattern: Subst,
    },
    /// The clause matches no leaf.
    Unreachable { clause: usize },
    /// Two clauses match the same leaf.
    Overlap {
        clause_a: usize,
        clause_b: usize,
        witness_pattern: Subst,
    },
    /// The engine cannot justify a split or a unification got stuck.
    Undecidable { reason: String },
}

impl std::fmt::Display for CoverError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CoverError::MissingCase { .. } => write!(f, "missing case"),
            CoverError::Unreachable { clause } => write!(f, "clause {clause} is unreachable"),
            CoverError::Overlap {
                clause_a, clause_b, ..
            } => {
                write!(f, "clauses {clause_a} and {clause_b} overlap")
            }
            CoverError::Undecidable { reason } => write!(f, "cannot decide coverage: {reason}"),
        }
    }
}

/// Decides `⊢ {clauses} ⊲ Ξ`, returning the derivation tree or the first
/// failure. Clause patterns must already check as substitutions into `xi`.
pub fn check_cover(
    sig: &Signature,
    xi: &Telescope,
    clauses: &[Clause],
) -> Result<CoverTree, CoverError> {
    for (i, c) in clauses.iter().enumerate() {
        if c.pattern.len() != xi.len() {
            return Err(CoverError::Undecidable {
                reason: format!(
                    "clause {i} has {} pattern components, scrutinee telescope has {}",
                    c.pattern.len(),
                    xi.len()
                ),
            });
        }
        for pos in 0..c.tel.len() {
            let idx = c.tel.len() - 1 - pos;
            if !c.pattern.terms.iter().any(|t| occurs(t, idx)) {
                return Err(CoverError::Undecidable {
                    reason: format!(
                        "clause {i} binds a variable ({}) that its pattern never uses",
                        c.tel.entries[pos].name
                    ),
                });
            }
        }
    }
    let engine = Engine {
        sig,
        clauses,
        budget: split_budget(sig, xi, clauses),
    };
    let root = State {
        tel: xi.clone(),
        pattern: Subst::id(xi.len()),
        pending_eqs: Vec::new(),
        depth: 0,
    };
    let tree = engine.build(root)?;
    let mut claimed = vec![0usize; clauses.len()];
    record_claims(&tree, &mut claimed);
    for (i, n) in claimed.iter().enumerate() {
        if *n == 0 {
            return Err(CoverError::Unreachable { clause: i });
        }
        if *n > 1 {
            return Err(CoverError::Overlap {
                clause_a: i,
                clause_b: i,
                witness_pattern: clauses[i].pattern.clone(),
            });
        }
    }
    Ok(tree)
}

fn record_claims(tree: &CoverTree, claimed: &mut [usize]) {
    match tree {
        CoverTree::Leaf { clause, .. } => claimed[*clause] += 1,
        CoverTree::SplitCon { children, .. } => {
            for (_, c) in children {
                record_claims(c, claimed);
            }
        }
        CoverTree::SplitRefl { child, .. } => record_claims(child, claimed),
        CoverTree::Absurd { .. } => {}
    }
}

/// Depth bound for the split loop: clause pattern depth plus the Fording
/// equality count, per split path. Well-formed finite clauses stay inside.
fn split_budget(sig: &Signature, xi: &Telescope, clauses: &[Clause]) -> usize {
    let pat_depth = clauses
        .iter()
        .flat_map(|c| c.pattern.terms.iter().map(term_depth))
        .max()
        .unwrap_or(1);
    let eq_fields: usize = sig
        .datacons
        .values()
        .map(|dc| {
            dc.fields
                .entries
                .iter()
                .filter(|e| matches!(e.ty, Term::Eq(..)))
                .count()
        })
        .sum();
    2 * (pat_depth + 1) * (eq_fields + 1) + xi.len() + 4
}

fn term_depth(t: &Term) -> usize {
    match t {
        Term::DataCon(_, args) | Term::TyCon(_, args) => {
            1 + args.terms.iter().map(term_depth).max().unwrap_or(0)
        }
        Term::Refl(a) => 1 + term_depth(a),
        _ => 1,
    }
}

/// Live leaf contexts and their composed patterns into the root telescope,
/// left to right.
pub fn leaves(tree: &CoverTree) -> Vec<(Telescope, Subst)> {
    let mut out = Vec::new();
    collect_leaves(tree, &mut out);
    out
}

fn collect_leaves(tree: &CoverTree, out: &mut Vec<(Telescope, Subst)>) {
    match tree {
        CoverTree::Leaf { tel, pattern, .. } => out.push((tel.clone(), pattern.clone())),
        CoverTree::SplitCon { children, .. } => {
            for (_, c) in children {
                collect_leaves(c, out);
            }
        }
        CoverTree::SplitRefl { child, .. } => collect_leaves(child, out),
        CoverTree::Absurd { .. } => {}
    }
}

/// Contexts pruned as absurd, with their patterns, for oracle auditing.
pub fn absurd_leaves(tree: &CoverTree) -> Vec<(Telescope, Subst)> {
    let mut out = Vec::new();
    collect_absurd(tree, &mut out);
    out
}

fn collect_absurd(tree: &CoverTree, out: &mut Vec<(Telescope, Subst)>) {
    match tree {
        CoverTree::Leaf { .. } => {}
        CoverTree::SplitCon { children, .. } => {
            for (_, c) in children {
                collect_absurd(c, out);
            }
        }
        CoverTree::SplitRefl { child, .. } => collect_absurd(child, out),
        CoverTree::Absurd { tel, pattern, .. } => out.push((tel.clone(), pattern.clone())),
    }
}

/// Structured derivation output: one node per rule.
pub fn to_json(tree: &CoverTree) -> Json {
    match tree {
        CoverTree::Leaf { clause, .. } => json!({ "rule": "Leaf", "clause": clause }),
        CoverTree::SplitCon {
            var_name, children, ..
        } => json!({
            "rule": "SplitCon",
            "var": var_name,
            "children": children
                .iter()
                .map(|(con, t)| json!({ "con": con, "tree": to_json(t) }))
                .collect::<Vec<_>>(),
        }),
        CoverTree::SplitRefl {
            var_name,
            tycon_injectivity,
            child,
            ..
        } => {
            let mut node = json!({
                "rule": "SplitRefl",
                "var": var_name,
                "child": to_json(child),
            });
            if *tycon_injectivity {
                node["tyconInjectivity"] = json!(true);
            }
            node
        }
        CoverTree::Absurd {
            var_name, reason, ..
        } => json!({
            "rule": "Absurd",
            "var": var_name,
            "reason": match reason {
                AbsurdReason::Clash(c) => format!("clash: {c}"),
                AbsurdReason::EmptyType(n) => format!("empty type: {n}"),
            },
        }),
    }
}

struct Engine<'s> {
    sig: &'s Signature,
    clauses: &'s [Clause],
    budget: usize,
}

#[derive(Clone, Debug)]
struct State {
    tel: Telescope,
    /// `tel ⊢ pattern ⇒ Ξ` for the root telescope.
    pattern: Subst,
    /// Fording equality fields introduced by the last constructor split,
    /// still to be refl-split before any further constructor split.
    pending_eqs: Vec<usize>,
    depth: usize,
}

/// How one clause relates to the current leaf state.
struct Alignment {
    /// Clause subpatterns constrained to each state position.
    constraints: Vec<Vec<Term>>,
    /// Leaf terms bound to each clause position.
    bindings: Vec<Vec<Term>>,
    /// (leaf side over state tel, clause side over clause tel) pairs left
    /// to conversion once the renaming is known.
    deferred: Vec<(Term, Term)>,
}

impl<'s> Engine<'s> {
    fn build(&self, state: State) -> Result<CoverTree, CoverError> {
        if state.depth > self.budget {
            return Err(CoverError::Undecidable {
                reason: format!("split depth exceeded budget {}", self.budget),
            });
        }
        if let Some((&e, rest)) = state.pending_eqs.split_first() {
            let mut st = state.clone();
            st.pending_eqs = rest.to_vec();
            return self.split_refl(st, e);
        }
        let aligned = self.align_all(&state)?;
        let live: Vec<usize> = (0..self.clauses.len())
            .filter(|i| aligned[*i].is_some())
            .collect();
        if live.is_empty() {
            return self.refute(state);
        }
        match self.select(&state, &aligned, &live)? {
            Some(pos) => {
                let raw_ty = self.whnf(&state.tel.entries[pos].ty)?;
                match raw_ty {
                    Term::TyCon(..) => self.split_con(state, pos),
                    Term::Eq(..) => self.split_refl(state, pos),
                    other => Err(CoverError::Undecidable {
                        reason: format!(
                            "clause forces a split at {} whose type is not a datatype or equality ({})",
                            state.tel.entries[pos].name,
                            crate::unify::head_name(&other)
                        ),
                    }),
                }
            }
            None => self.claim(state, &aligned, &live),
        }
    }

    fn whnf(&self, t: &Term) -> Result<Term, CoverError> {
        whnf(self.sig, t).map_err(norm_undecidable)
    }

    fn align_all(&self, state: &State) -> Result<Vec<Option<Alignment>>, CoverError> {
        let mut out = Vec::with_capacity(self.clauses.len());
        for clause in self.clauses {
            out.push(self.align(state, clause)?);
        }
        Ok(out)
    }

    fn align(&self, state: &State, clause: &Clause) -> Result<Option<Alignment>, CoverError> {
        let mut al = Alignment {
            constraints: vec![Vec::new(); state.tel.len()],
            bindings: vec![Vec::new(); clause.tel.len()],
            deferred: Vec::new(),
        };
        for (leaf_t, clause_t) in state.pattern.terms.iter().zip(clause.pattern.terms.iter()) {
            if !self.align_term(state, clause, leaf_t, clause_t, &mut al)? {
                return Ok(None);
            }
        }
        Ok(Some(al))
    }

    /// Structurally aligns a leaf pattern subterm against a clause pattern
    /// subterm. Returns false on a rigid head mismatch (clause dead here).
    fn align_term(
        &self,
        state: &State,
        clause: &Clause,
        leaf_t: &Term,
        clause_t: &Term,
        al: &mut Alignment,
    ) -> Result<bool, CoverError> {
        if let Term::Var(j) = clause_t {
            al.bindings[clause.tel.pos_of_index(*j)].push(leaf_t.clone());
            return Ok(true);
        }
        match leaf_t {
            Term::Var(i) => {
                al.constraints[state.tel.pos_of_index(*i)].push(clause_t.clone());
                Ok(true)
            }
            Term::DataCon(d, largs) => match clause_t {
                Term::DataCon(d2, cargs) if d == d2 && largs.len() == cargs.len() => {
                    for (l, c) in largs.terms.iter().zip(cargs.terms.iter()) {
                        if !self.align_term(state, clause, l, c, al)? {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
                Term::DataCon(..) => Ok(false),
                _ => {
                    al.deferred.push((leaf_t.clone(), clause_t.clone()));
                    Ok(true)
                }
            },
            Term::Refl(larg) => match clause_t {
                Term::Refl(carg) => self.align_term(state, clause, larg, carg, al),
                _ => {
                    al.deferred.push((leaf_t.clone(), clause_t.clone()));
                    Ok(true)
                }
            },
            Term::TyCon(n, largs) => match clause_t {
                Term::TyCon(n2, cargs) if n == n2 && largs.len() == cargs.len() => {
                    for (l, c) in largs.terms.iter().zip(cargs.terms.iter()) {
                        if !self.align_term(state, clause, l, c, al)? {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
                Term::TyCon(..) => Ok(false),
                _ => {
                    al.deferred.push((leaf_t.clone(), clause_t.clone()));
                    Ok(true)
                }
            },
            _ => {
                al.deferred.push((leaf_t.clone(), clause_t.clone()));
                Ok(true)
            }
        }
    }

    /// Leftmost position where a live clause is rigid, excluding positions
    /// another candidate's type depends on: a datatype index is forced by
    /// splitting its consumer, so the consumer splits first.
    fn select(
        &self,
        state: &State,
        aligned: &[Option<Alignment>],
        live: &[usize],
    ) -> Result<Option<usize>, CoverError> {
        let n = state.tel.len();
        let mut candidate = vec![false; n];
        for &i in live {
            let al = aligned[i].as_ref().unwrap();
            for (pos, cs) in al.constraints.iter().enumerate() {
                if cs
                    .iter()
                    .any(|c| matches!(c, Term::DataCon(..) | Term::Refl(_)))
                {
                    candidate[pos] = true;
                }
            }
        }
        let cands: Vec<usize> = (0..n).filter(|p| candidate[*p]).collect();
        for &p in &cands {
            let mentioned = cands
                .iter()
                .any(|&q| q > p && occurs(&state.tel.entries[q].ty, q - 1 - p));
            if !mentioned {
                return Ok(Some(p));
            }
        }
        Ok(None)
    }

    fn split_con(&self, state: State, pos: usize) -> Result<CoverTree, CoverError> {
        let raw_ty = self.whnf(&state.tel.entries[pos].ty)?;
        let (tycon_name, args) = match raw_ty {
            Term::TyCon(n, args) => (n, args),
            _ => unreachable!("split_con on a non-datatype"),
        };
        let tc = self
            .sig
            .tycon(&tycon_name)
            .ok_or_else(|| CoverError::Undecidable {
                reason: format!("unknown type constructor {tycon_name}"),
            })?;
        if tc.datacons.is_empty() {
            return Ok(CoverTree::Absurd {
                var: pos,
                var_name: state.tel.entries[pos].name.to_string(),
                tel: state.tel,
                pattern: state.pattern,
                reason: AbsurdReason::EmptyType(tycon_name),
            });
        }
        let mut children = Vec::with_capacity(tc.datacons.len());
        for dname in tc.datacons.clone() {
            let child = self.constructor_child(&state, pos, &tycon_name, &dname, &args)?;
            children.push((dname, self.build(child)?));
        }
        Ok(CoverTree::SplitCon {
            var: pos,
            var_name: state.tel.entries[pos].name.to_string(),
            tel: state.tel,
            pattern: state.pattern,
            children,
        })
    }

    /// Child state for one constructor: the split variable is replaced by
    /// fresh field variables at its position, the variable itself becomes
    /// the constructor applied to them, and the remaining telescope is
    /// re-scoped.
    fn constructor_child(
        &self,
        state: &State,
        pos: usize,
        tycon_name: &str,
        datacon_name: &str,
        args: &Subst,
    ) -> Result<State, CoverError> {
        let n = state.tel.len();
        let dc = self.sig.datacon(datacon_name).unwrap();
        let n_params = self.sig.tycon(tycon_name).unwrap().params.len();
        let fields = dc.fields.clone();
        let nf = fields.len();

        // Fresh field entries, instantiated at the actual parameters.
        let mut fresh: Vec<TelescopeEntry> = Vec::with_capacity(nf);
        for (k, fe) in fields.entries.iter().enumerate() {
            let mut comps = Vec::with_capacity(n_params + k);
            for a in &args.terms {
                comps.push(shift(a, k));
            }
            for j in 0..k {
                comps.push(Term::Var(k - 1 - j));
            }
            fresh.push(TelescopeEntry {
                name: fe.name.clone(),
                ty: apply_subst(&fe.ty, &Subst::new(comps)),
            });
        }

        // The constructor term over (prefix ++ fresh fields).
        let mut con_args = Vec::with_capacity(n_params + nf);
        for a in &args.terms {
            con_args.push(shift(a, nf));
        }
        for j in 0..nf {
            con_args.push(Term::Var(nf - 1 - j));
        }
        let con = Term::DataCon(datacon_name.to_string(), Subst::new(con_args));

        // Rebuild the telescope: prefix, fresh fields, re-scoped suffix.
        let mut entries: Vec<TelescopeEntry> = state.tel.entries[..pos].to_vec();
        entries.extend(fresh);
        for q in pos + 1..n {
            let old = &state.tel.entries[q];
            let ctx_len = q + nf - 1;
            let mut comps = Vec::with_capacity(q);
            for k in 0..q {
                if k < pos {
                    comps.push(Term::Var(ctx_len - 1 - k));
                } else if k == pos {
                    comps.push(shift(&con, q - 1 - pos));
                } else {
                    comps.push(Term::Var(q - 1 - k));
                }
            }
            entries.push(TelescopeEntry {
                name: old.name.clone(),
                ty: apply_subst(&old.ty, &Subst::new(comps)),
            });
        }
        let child_tel = Telescope { entries };

        // Substitution child → parent and the composed pattern.
        let child_len = n - 1 + nf;
        let mut tau = Vec::with_capacity(n);
        for k in 0..n {
            if k < pos {
                tau.push(Term::Var(child_len - 1 - k));
            } else if k == pos {
                tau.push(shift(&con, n - 1 - pos));
            } else {
                tau.push(Term::Var(n - 1 - k));
            }
        }
        let tau = Subst::new(tau);
        let pattern = compose_subst(&state.pattern, &tau);

        // Fresh equality fields are refl-split before anything else.
        let mut pending = Vec::new();
        for j in 0..nf {
            let p = pos + j;
            if matches!(self.whnf(&child_tel.entries[p].ty)?, Term::Eq(..)) {
                pending.push(p);
            }
        }

        Ok(State {
            tel: child_tel,
            pattern,
            pending_eqs: pending,
            depth: state.depth + 1,
        })
    }

    fn split_refl(&self, state: State, pos: usize) -> Result<CoverTree, CoverError> {
        let n = state.tel.len();
        let raw_ty = self.whnf(&state.tel.entries[pos].ty)?;
        let (eq_ty, lhs, rhs) = match raw_ty {
            Term::Eq(t, l, r) => (*t, *l, *r),
            other => {
                return Err(CoverError::Undecidable {
                    reason: format!(
                        "refl split at {} whose type is not an equality ({})",
                        state.tel.entries[pos].name,
                        crate::unify::head_name(&other)
                    ),
                })
            }
        };
        let (tel_no_eq, _) = match remove_position(&state.tel, pos, None) {
            Some(x) => x,
            None => {
                return Err(CoverError::Undecidable {
                    reason: format!(
                        "a later telescope entry mentions the equality proof {}",
                        state.tel.entries[pos].name
                    ),
                })
            }
        };
        // The equality's parts live over the prefix; weaken into the
        // pruned telescope.
        let by = tel_no_eq.len() - pos;
        let eq_ty_w = shift(&eq_ty, by);
        let lhs_w = shift(&lhs, by);
        let rhs_w = shift(&rhs, by);
        match unify(self.sig, &tel_no_eq, &eq_ty_w, &lhs_w, &rhs_w).map_err(norm_undecidable)? {
            UnifyOutcome::Success(s) => {
                // Δ' → state.tel: the unifier everywhere else, refl of the
                // unified term at the split position.
                let unified = apply_subst(&lhs_w, &s.mgu);
                let mut fin = Vec::with_capacity(n);
                for k in 0..n {
                    if k < pos {
                        fin.push(s.mgu.terms[k].clone());
                    } else if k == pos {
                        fin.push(Term::Refl(Box::new(unified.clone())));
                    } else {
                        fin.push(s.mgu.terms[k - 1].clone());
                    }
                }
                let fin = Subst::new(fin);
                let pattern = compose_subst(&state.pattern, &fin);
                let pending = remap_positions(&state.pending_eqs, &fin, &s.pruned_tel);
                let child = State {
                    tel: s.pruned_tel,
                    pattern,
                    pending_eqs: pending,
                    depth: state.depth + 1,
                };
                Ok(CoverTree::SplitRefl {
                    var: pos,
                    var_name: state.tel.entries[pos].name.to_string(),
                    tel: state.tel,
                    pattern: state.pattern,
                    tycon_injectivity: s.tycon_injectivity,
                    child: Box::new(self.build(child)?),
                })
            }
            UnifyOutcome::Clash(info) => Ok(CoverTree::Absurd {
                var: pos,
                var_name: state.tel.entries[pos].name.to_string(),
                tel: state.tel,
                pattern: state.pattern,
                reason: AbsurdReason::Clash(info),
            }),
            UnifyOutcome::Stuck { reason } => Err(CoverError::Undecidable { reason }),
        }
    }

    /// No clause is compatible: the state is covered only if it is visibly
    /// empty, otherwise its pattern is a genuine missing case.
    fn refute(&self, state: State) -> Result<CoverTree, CoverError> {
        for pos in 0..state.tel.len() {
            match self.whnf(&state.tel.entries[pos].ty)? {
                Term::TyCon(n, _) => {
                    if let Some(tc) = self.sig.tycon(&n) {
                        if tc.datacons.is_empty() {
                            return Ok(CoverTree::Absurd {
                                var: pos,
                                var_name: state.tel.entries[pos].name.to_string(),
                                tel: state.tel,
                                pattern: state.pattern,
                                reason: AbsurdReason::EmptyType(n),
                            });
                        }
                    }
                }
                Term::Eq(t, l, r) => {
                    if let Some((tel_no_eq, _)) = remove_position(&state.tel, pos, None) {
                        let by = tel_no_eq.len() - pos;
                        if let UnifyOutcome::Clash(info) = unify(
                            self.sig,
                            &tel_no_eq,
                            &shift(&t, by),
                            &shift(&l, by),
                            &shift(&r, by),
                        )
                        .map_err(norm_undecidable)?
                        {
                            return Ok(CoverTree::Absurd {
                                var: pos,
                                var_name: state.tel.entries[pos].name.to_string(),
                                tel: state.tel,
                                pattern: state.pattern,
                                reason: AbsurdReason::Clash(info),
                            });
                        }
                    }
                }
                _ => {}
            }
        }
        Err(CoverError::MissingCase {
            witness_tel: state.tel,
            witness_pattern: state.pattern,
        })
    }

    /// All live clauses agree with the leaf up to variables; exactly one
    /// must claim it.
    fn claim(
        &self,
        state: State,
        aligned: &[Option<Alignment>],
        live: &[usize],
    ) -> Result<CoverTree, CoverError> {
        let mut claimants: Vec<(usize, Subst)> = Vec::new();
        for &i in live {
            let al = aligned[i].as_ref().unwrap();
            if let Some(renaming) = self.try_claim(&state, &self.clauses[i], al)? {
                claimants.push((i, renaming));
            }
        }
        match claimants.len() {
            0 => Err(CoverError::MissingCase {
                witness_tel: state.tel,
                witness_pattern: state.pattern,
            }),
            1 => {
                let (clause, renaming) = claimants.pop().unwrap();
                Ok(CoverTree::Leaf {
                    clause,
                    renaming,
                    tel: state.tel,
                    pattern: state.pattern,
                })
            }
            _ => Err(CoverError::Overlap {
                clause_a: claimants[0].0,
                clause_b: claimants[1].0,
                witness_pattern: state.pattern,
            }),
        }
    }

    fn try_claim(
        &self,
        state: &State,
        clause: &Clause,
        al: &Alignment,
    ) -> Result<Option<Subst>, CoverError> {
        let mut theta = Vec::with_capacity(clause.tel.len());
        for bs in &al.bindings {
            match bs.first() {
                Some(t) => theta.push(t.clone()),
                None => return Ok(None),
            }
        }
        let theta = Subst::new(theta);
        for (pos, bs) in al.bindings.iter().enumerate() {
            for extra in bs.iter().skip(1) {
                if !self.conv(extra, &theta.terms[pos])? {
                    return Ok(None);
                }
            }
        }
        for (pos, cs) in al.constraints.iter().enumerate() {
            let leaf_var = state.tel.var_at(pos);
            for c in cs {
                if !self.conv(&apply_subst(c, &theta), &leaf_var)? {
                    return Ok(None);
                }
            }
        }
        for (leaf_side, clause_side) in &al.deferred {
            if !self.conv(&apply_subst(clause_side, &theta), leaf_side)? {
                return Ok(None);
            }
        }
        Ok(Some(theta))
    }

    fn conv(&self, a: &Term, b: &Term) -> Result<bool, CoverError> {
        conv(self.sig, a, b).map_err(norm_undecidable)
    }
}

fn norm_undecidable(e: NormError) -> CoverError {
    CoverError::Undecidable {
        reason: e.to_string(),
    }
}

/// Carries pending telescope positions across a pruning substitution: a
/// position survives if the substitution still maps it to a variable.
fn remap_positions(pending: &[usize], fin: &Subst, new_tel: &Telescope) -> Vec<usize> {
    pending
        .iter()
        .filter_map(|&p| match &fin.terms[p] {
            Term::Var(idx) => Some(new_tel.pos_of_index(*idx)),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::*;
    use crate::testutil::*;

    fn bool_ty() -> Term {
        tycon("Bool", vec![])
    }

    fn nat_ty() -> Term {
        tycon("Nat", vec![])
    }

    #[test]
    fn identity_clause_is_a_leaf() {
        let sig = base_sig();
        let xi = Telescope::from_entries(vec![("x".into(), bool_ty())]);
        let clauses = vec![Clause {
            tel: Telescope::from_entries(vec![("y".into(), bool_ty())]),
            pattern: Subst::new(vec![var(0)]),
        }];
        match check_cover(&sig, &xi, &clauses).unwrap() {
            CoverTree::Leaf {
                clause: 0,
                renaming,
                ..
            } => {
                assert_eq!(renaming, Subst::new(vec![var(0)]));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bool_constructor_split_covers() {
        let sig = base_sig();
        let xi = Telescope::from_entries(vec![("b".into(), bool_ty())]);
        let clauses = vec![
            Clause {
                tel: Telescope::new(),
                pattern: Subst::new(vec![datacon("true", vec![])]),
            },
            Clause {
                tel: Telescope::new(),
                pattern: Subst::new(vec![datacon("false", vec![])]),
            },
        ];
        let tree = check_cover(&sig, &xi, &clauses).unwrap();
        match &tree {
            CoverTree::SplitCon {
                var: 0, children, ..
            } => {
                assert_eq!(children.len(), 2);
                assert_eq!(children[0].0, "true");
                assert!(matches!(children[0].1, CoverTree::Leaf { clause: 0, .. }));
                assert!(matches!(children[1].1, CoverTree::Leaf { clause: 1, .. }));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(leaves(&tree).len(), 2);
    }

    #[test]
    fn missing_false_clause_reports_witness() {
        let sig = base_sig();
        let xi = Telescope::from_entries(vec![("b".into(), bool_ty())]);
        let clauses = vec![Clause {
            tel: Telescope::new(),
            pattern: Subst::new(vec![datacon("true", vec![])]),
        }];
        match check_cover(&sig, &xi, &clauses) {
            Err(CoverError::MissingCase {
                witness_pattern, ..
            }) => {
                assert_eq!(witness_pattern, Subst::new(vec![datacon("false", vec![])]));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_clause_overlaps() {
        let sig = base_sig();
        let xi = Telescope::from_entries(vec![("b".into(), bool_ty())]);
        let t = Clause {
            tel: Telescope::new(),
            pattern: Subst::new(vec![datacon("true", vec![])]),
        };
        let f = Clause {
            tel: Telescope::new(),
            pattern: Subst::new(vec![datacon("false", vec![])]),
        };
        let clauses = vec![t.clone(), t, f];
        match check_cover(&sig, &xi, &clauses) {
            Err(CoverError::Overlap {
                clause_a: 0,
                clause_b: 1,
                ..
            }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn catch_all_after_constructor_overlaps() {
        let sig = base_sig();
        let xi = Telescope::from_entries(vec![("n".into(), nat_ty())]);
        let clauses = vec![
            Clause {
                tel: Telescope::new(),
                pattern: Subst::new(vec![datacon("zero", vec![])]),
            },
            Clause {
                tel: Telescope::from_entries(vec![("k".into(), nat_ty())]),
                pattern: Subst::new(vec![var(0)]),
            },
        ];
        assert!(matches!(
            check_cover(&sig, &xi, &clauses),
            Err(CoverError::Overlap { .. })
        ));
    }

    #[test]
    fn empty_type_splits_to_absurd() {
        let sig = base_sig();
        let xi = Telescope::from_entries(vec![("e".into(), tycon("Empty", vec![]))]);
        // No clauses at all: refutation finds the empty type.
        let tree = check_cover(&sig, &xi, &[]).unwrap();
        match tree {
            CoverTree::Absurd {
                reason: AbsurdReason::EmptyType(n),
                ..
            } => assert_eq!(n, "Empty"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn head_cover_has_expected_shape() {
        let sig = head_sig();
        let xi = head_scrutinee_tel();
        let branches = head_branches();
        let clauses: Vec<Clause> = branches
            .iter()
            .map(|b| Clause {
                tel: b.tel.clone(),
                pattern: b.pattern.clone(),
            })
            .collect();
        let tree = check_cover(&sig, &xi, &clauses).unwrap();
        match &tree {
            CoverTree::SplitCon {
                var_name, children, ..
            } => {
                assert_eq!(var_name, "x");
                assert_eq!(children.len(), 2);
                assert!(matches!(
                    &children[0].1,
                    CoverTree::Absurd { reason: AbsurdReason::Clash(c), .. }
                        if c.lhs_head == "suc" && c.rhs_head == "zero"
                ));
                match &children[1].1 {
                    CoverTree::SplitRefl { child, .. } => {
                        assert!(matches!(**child, CoverTree::Leaf { clause: 0, .. }));
                    }
                    other => panic!("cons child: {other:?}"),
                }
            }
            other => panic!("{other:?}"),
        }
        let lv = leaves(&tree);
        assert_eq!(lv.len(), 1);
        assert_eq!(lv[0].0.len(), 4);
        assert_eq!(absurd_leaves(&tree).len(), 1);
    }

    #[test]
    fn nat_zero_suc_cover() {
        let sig = base_sig();
        let xi = Telescope::from_entries(vec![("n".into(), nat_ty())]);
        let clauses = vec![
            Clause {
                tel: Telescope::new(),
                pattern: Subst::new(vec![datacon("zero", vec![])]),
            },
            Clause {
                tel: Telescope::from_entries(vec![("m".into(), nat_ty())]),
                pattern: Subst::new(vec![datacon("suc", vec![var(0)])]),
            },
        ];
        let tree = check_cover(&sig, &xi, &clauses).unwrap();
        assert_eq!(leaves(&tree).len(), 2);
    }

    #[test]
    fn refl_cover_on_equality_variable() {
        // sym-style cover: (x : Nat, y : Nat, e : Eq Nat x y) covered by
        // (z : Nat). (z, z, refl z).
        let sig = base_sig();
        let xi = Telescope::from_entries(vec![
            ("x".into(), nat_ty()),
            ("y".into(), nat_ty()),
            ("e".into(), eq(nat_ty(), var(1), var(0))),
        ]);
        let clauses = vec![Clause {
            tel: Telescope::from_entries(vec![("z".into(), nat_ty())]),
            pattern: Subst::new(vec![var(0), var(0), refl(var(0))]),
        }];
        let tree = check_cover(&sig, &xi, &clauses).unwrap();
        match &tree {
            CoverTree::SplitRefl { var: 2, child, .. } => {
                assert!(matches!(**child, CoverTree::Leaf { clause: 0, .. }));
            }
            other => panic!("{other:?}"),
        }
        let lv = leaves(&tree);
        assert_eq!(lv.len(), 1);
        // One surviving variable; both scrutinee slots map to it.
        assert_eq!(lv[0].0.len(), 1);
        assert_eq!(lv[0].1.terms[0], lv[0].1.terms[1]);
    }

    #[test]
    fn independent_rigid_positions_split_leftmost_first() {
        let sig = base_sig();
        let xi = Telescope::from_entries(vec![("a".into(), bool_ty()), ("b".into(), bool_ty())]);
        let clauses = vec![
            Clause {
                tel: Telescope::new(),
                pattern: Subst::new(vec![datacon("true", vec![]), datacon("true", vec![])]),
            },
            Clause {
                tel: Telescope::from_entries(vec![("y".into(), bool_ty())]),
                pattern: Subst::new(vec![datacon("false", vec![]), var(0)]),
            },
            Clause {
                tel: Telescope::new(),
                pattern: Subst::new(vec![datacon("true", vec![]), datacon("false", vec![])]),
            },
        ];
        match check_cover(&sig, &xi, &clauses).unwrap() {
            CoverTree::SplitCon {
                var: 0, var_name, ..
            } => assert_eq!(var_name, "a"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn indexed_position_defers_to_its_consumer() {
        // With both the length and the vector rigid in the clauses, the
        // vector splits first because its type mentions the length.
        let sig = head_sig();
        let xi = Telescope::from_entries(vec![
            ("n".into(), tycon("Nat", vec![])),
            ("v".into(), tycon("Vec", vec![bool_ty(), var(0)])),
        ]);
        let clauses = vec![
            Clause {
                tel: Telescope::new(),
                pattern: Subst::new(vec![
                    datacon("zero", vec![]),
                    datacon(
                        "Nil",
                        vec![
                            bool_ty(),
                            datacon("zero", vec![]),
                            refl(datacon("zero", vec![])),
                        ],
                    ),
                ]),
            },
            Clause {
                tel: Telescope::from_entries(vec![
                    ("m".into(), tycon("Nat", vec![])),
                    ("h".into(), bool_ty()),
                    ("t".into(), tycon("Vec", vec![bool_ty(), var(1)])),
                ]),
                pattern: Subst::new(vec![
                    datacon("suc", vec![var(2)]),
                    datacon(
                        "Cons",
                        vec![
                            bool_ty(),
                            datacon("suc", vec![var(2)]),
                            var(2),
                            var(1),
                            var(0),
                            refl(datacon("suc", vec![var(2)])),
                        ],
                    ),
                ]),
            },
        ];
        match check_cover(&sig, &xi, &clauses).unwrap() {
            CoverTree::SplitCon {
                var: 1, var_name, ..
            } => assert_eq!(var_name, "v"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn refl_clause_overlaps_with_catch_all() {
        // The diagonal clause and a catch-all both claim the refl leaf.
        let sig = base_sig();
        let xi = Telescope::from_entries(vec![
            ("x".into(), nat_ty()),
            ("y".into(), nat_ty()),
            ("e".into(), eq(nat_ty(), var(1), var(0))),
        ]);
        let clauses = vec![
            Clause {
                tel: Telescope::from_entries(vec![("z".into(), nat_ty())]),
                pattern: Subst::new(vec![var(0), var(0), refl(var(0))]),
            },
            Clause {
                tel: xi.clone(),
                pattern: Subst::id(3),
            },
        ];
        assert!(matches!(
            check_cover(&sig, &xi, &clauses),
            Err(CoverError::Overlap {
                clause_a: 0,
                clause_b: 1,
                ..
            })
        ));
    }

    #[test]
    fn nonlinear_diagonal_pattern_is_not_covering() {
        // (x). (x, x) only hits the diagonal of Bool x Bool.
        let sig = base_sig();
        let xi = Telescope::from_entries(vec![("a".into(), bool_ty()), ("b".into(), bool_ty())]);
        let clauses = vec![Clause {
            tel: Telescope::from_entries(vec![("x".into(), bool_ty())]),
            pattern: Subst::new(vec![var(0), var(0)]),
        }];
        assert!(matches!(
            check_cover(&sig, &xi, &clauses),
            Err(CoverError::MissingCase { .. })
        ));
    }

    #[test]
    fn mixed_depth_clauses_cover() {
        let sig = base_sig();
        let xi = Telescope::from_entries(vec![("a".into(), nat_ty()), ("b".into(), nat_ty())]);
        let clauses = vec![
            Clause {
                tel: Telescope::from_entries(vec![("y".into(), nat_ty())]),
                pattern: Subst::new(vec![datacon("zero", vec![]), var(0)]),
            },
            Clause {
                tel: Telescope::from_entries(vec![("x".into(), nat_ty())]),
                pattern: Subst::new(vec![datacon("suc", vec![var(0)]), datacon("zero", vec![])]),
            },
            Clause {
                tel: Telescope::from_entries(vec![("x".into(), nat_ty()), ("y".into(), nat_ty())]),
                pattern: Subst::new(vec![
                    datacon("suc", vec![var(1)]),
                    datacon("suc", vec![var(0)]),
                ]),
            },
        ];
        let tree = check_cover(&sig, &xi, &clauses).unwrap();
        assert_eq!(leaves(&tree).len(), 3);
    }

    #[test]
    fn unused_pattern_variable_is_rejected() {
        let sig = base_sig();
        let xi = Telescope::from_entries(vec![("b".into(), bool_ty())]);
        let clauses = vec![Clause {
            tel: Telescope::from_entries(vec![("ghost".into(), nat_ty())]),
            pattern: Subst::new(vec![datacon("true", vec![])]),
        }];
        assert!(matches!(
            check_cover(&sig, &xi, &clauses),
            Err(CoverError::Undecidable { .. })
        ));
    }
}
