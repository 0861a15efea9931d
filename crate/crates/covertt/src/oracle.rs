//! Finite set-model oracle: interprets types as finite sets by bounded
//! enumeration, terms as elements, and validates accepted covers by
//! brute-force matching-family and amalgamation checks.
//!
//! Contexts are interpreted as dependent tuples of values, functions as
//! finite graphs total on the enumerated domain, and equality types
//! extensionally: refl exists exactly when the two sides evaluate to the
//! same value. Recursive datatypes are truncated at a constructor-nesting
//! depth, so every claim the oracle makes is "within the bound".

use std::fmt;

use serde_json::{json, Value as Json};

use crate::conversion::{whnf, NormError};
use crate::syntax::{apply_subst, free_vars, Name, Signature, Subst, Telescope, Term};
use crate::typecheck::{Checker, TypeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bound {
    /// Constructor-nesting bound for recursive datatypes (at least 1).
    pub max_depth: usize,
    /// Cap on enumerated function spaces: both domain * codomain and the
    /// number of graphs must stay under it.
    pub max_fun: usize,
}

impl Default for Bound {
    fn default() -> Self {
        Bound {
            max_depth: 3,
            max_fun: 64,
        }
    }
}

impl Bound {
    pub fn with_depth(max_depth: usize) -> Self {
        Bound {
            max_depth: max_depth.max(1),
            ..Bound::default()
        }
    }
}

/// An element of the finite interpretation of a type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    /// A type as a value: a closed normal type term acting as a code.
    Type(Term),
    /// A function as its finite graph, in domain enumeration order.
    Fun(Vec<(Value, Value)>),
    /// Constructor applied to parameter and field values.
    Con(Name, Vec<Value>),
    Refl(Box<Value>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_value(self))
    }
}

/// Prints a value as a constructor term.
pub fn print_value(v: &Value) -> String {
    match v {
        Value::Type(t) => print_code(t),
        Value::Fun(graph) => {
            let entries: Vec<String> = graph
                .iter()
                .map(|(a, b)| format!("{} -> {}", print_value(a), print_value(b)))
                .collect();
            format!("{{{}}}", entries.join(", "))
        }
        Value::Con(n, args) => {
            if args.is_empty() {
                n.clone()
            } else {
                let parts: Vec<String> = args.iter().map(print_value).collect();
                format!("{}({})", n, parts.join(", "))
            }
        }
        Value::Refl(v) => format!("refl({})", print_value(v)),
    }
}

fn print_code(t: &Term) -> String {
    match t {
        Term::Type => "Type".into(),
        Term::TyCon(n, args) | Term::DataCon(n, args) => {
            if args.is_empty() {
                n.clone()
            } else {
                let parts: Vec<String> = args.terms.iter().map(print_code).collect();
                format!("{}({})", n, parts.join(", "))
            }
        }
        Term::Refl(a) => format!("refl({})", print_code(a)),
        Term::Eq(ty, l, r) => {
            format!(
                "Eq({}, {}, {})",
                print_code(ty),
                print_code(l),
                print_code(r)
            )
        }
        other => format!("{other:?}"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    FunctionSpaceTooLarge {
        domain: usize,
        codomain: usize,
    },
    BoundExceeded(String),
    /// No branch's semantic image contains the scrutinee tuple; only
    /// reachable when the cover was never verified.
    NoSemanticBranch,
    ConflictingBranches,
    Unrepresentable(String),
    UnsupportedType(String),
    Norm(NormError),
    Type(Box<TypeError>),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::FunctionSpaceTooLarge { domain, codomain } => {
                write!(
                    f,
                    "function space too large: {domain} * {codomain} elements"
                )
            }
            OracleError::BoundExceeded(s) => write!(f, "bound exceeded: {s}"),
            OracleError::NoSemanticBranch => write!(f, "no branch matches semantically"),
            OracleError::ConflictingBranches => write!(f, "conflicting branch tables"),
            OracleError::Unrepresentable(s) => write!(f, "unrepresentable value: {s}"),
            OracleError::UnsupportedType(s) => write!(f, "unsupported type: {s}"),
            OracleError::Norm(e) => write!(f, "{e}"),
            OracleError::Type(e) => write!(f, "{e}"),
        }
    }
}

impl From<NormError> for OracleError {
    fn from(e: NormError) -> Self {
        OracleError::Norm(e)
    }
}

impl From<TypeError> for OracleError {
    fn from(e: TypeError) -> Self {
        OracleError::Type(Box::new(e))
    }
}

/// Result of the semantic cover sweep.
#[derive(Clone, Debug)]
pub struct CoverReport {
    pub environments: usize,
    pub covering: bool,
    pub disjoint: bool,
    pub uncovered: Vec<Vec<Value>>,
    pub overlapping: Vec<Vec<Value>>,
}

impl CoverReport {
    pub fn ok(&self) -> bool {
        self.covering && self.disjoint
    }

    pub fn to_json(&self) -> Json {
        json!({
            "environments": self.environments,
            "covering": self.covering,
            "disjoint": self.disjoint,
            "counterexamples": {
                "uncovered": self.uncovered.iter().map(|e| print_env(e)).collect::<Vec<_>>(),
                "overlapping": self.overlapping.iter().map(|e| print_env(e)).collect::<Vec<_>>(),
            },
        })
    }
}

fn print_env(env: &[Value]) -> Vec<String> {
    env.iter().map(print_value).collect()
}

/// Association table from environments to values (values are not hashable;
/// tables at oracle scale are small).
pub type BranchTable = Vec<(Vec<Value>, Value)>;

pub struct Oracle {
    /// The user signature extended with the closed-type palette used to
    /// instantiate `Type`-valued telescope entries.
    pub sig: Signature,
    pub bound: Bound,
}

const EVAL_GAS: u64 = 1_000_000;

impl Oracle {
    pub fn new(sig: &Signature, bound: Bound) -> Self {
        let mut sig = sig.clone();
        if sig.tycon("Bool").is_none() {
            sig.add_tycon("Bool", Telescope::new());
            sig.add_datacon("true", "Bool", Telescope::new());
            sig.add_datacon("false", "Bool", Telescope::new());
        }
        if sig.tycon("Unit").is_none() {
            sig.add_tycon("Unit", Telescope::new());
            sig.add_datacon("tt", "Unit", Telescope::new());
        }
        if sig.tycon("Empty").is_none() {
            sig.add_tycon("Empty", Telescope::new());
        }
        Oracle { sig, bound }
    }

    fn palette(&self) -> Vec<Value> {
        ["Bool", "Unit", "Empty"]
            .iter()
            .map(|n| Value::Type(Term::TyCon(n.to_string(), Subst::new(vec![]))))
            .collect()
    }

    /// All dependent tuples inhabiting the closed telescope, within the
    /// bound, in deterministic order.
    pub fn enum_telescope(&self, tel: &Telescope) -> Result<Vec<Vec<Value>>, OracleError> {
        let mut envs: Vec<Vec<Value>> = vec![Vec::new()];
        for k in 0..tel.len() {
            let prefix = Telescope {
                entries: tel.entries[..k].to_vec(),
            };
            let mut next = Vec::new();
            for env in &envs {
                for v in
                    self.enumerate_type(&prefix, env, &tel.entries[k].ty, self.bound.max_depth)?
                {
                    let mut e = env.clone();
                    e.push(v);
                    next.push(e);
                }
            }
            envs = next;
        }
        Ok(envs)
    }

    /// Elements of the type denoted by `ty` (a term over `tel`, valued in
    /// `env`), truncated at `depth` constructor nestings.
    pub fn enumerate_type(
        &self,
        tel: &Telescope,
        env: &[Value],
        ty: &Term,
        depth: usize,
    ) -> Result<Vec<Value>, OracleError> {
        let ty_w = whnf(&self.sig, ty)?;
        match ty_w {
            Term::Type => Ok(self.palette()),
            Term::Var(i) => {
                let pos = tel.pos_of_index(i);
                match &env[pos] {
                    Value::Type(code) => {
                        self.enumerate_type(&Telescope::new(), &[], &code.clone(), depth)
                    }
                    other => Err(OracleError::UnsupportedType(format!(
                        "variable valued {} used as a type",
                        print_value(other)
                    ))),
                }
            }
            Term::TyCon(name, args) => {
                if depth == 0 {
                    return Ok(Vec::new());
                }
                let tc = self.sig.tycon(&name).ok_or_else(|| {
                    OracleError::UnsupportedType(format!("unknown type constructor {name}"))
                })?;
                let mut arg_vals = Vec::with_capacity(args.len());
                for a in &args.terms {
                    arg_vals.push(self.eval(tel, env, a)?);
                }
                let params_tel = tc.params.clone();
                let mut out = Vec::new();
                for dname in tc.datacons.clone() {
                    let dc = self.sig.datacon(&dname).unwrap();
                    let fields = dc.fields.clone();
                    let mut field_envs: Vec<Vec<Value>> = vec![arg_vals.clone()];
                    for k in 0..fields.len() {
                        let ctx = params_tel.append(&Telescope {
                            entries: fields.entries[..k].to_vec(),
                        });
                        let fty = &fields.entries[k].ty;
                        let fdepth = if matches!(whnf(&self.sig, fty)?, Term::TyCon(..)) {
                            depth - 1
                        } else {
                            depth
                        };
                        let mut next = Vec::new();
                        for fenv in &field_envs {
                            for v in self.enumerate_type(&ctx, fenv, fty, fdepth)? {
                                let mut e = fenv.clone();
                                e.push(v);
                                next.push(e);
                            }
                        }
                        field_envs = next;
                    }
                    for fe in field_envs {
                        out.push(Value::Con(dname.clone(), fe));
                    }
                }
                Ok(out)
            }
            Term::Eq(t, l, r) => {
                let mut gas = EVAL_GAS;
                let vl = self.eval_expect(tel, env, &l, Some(&t), &mut gas)?;
                let vr = self.eval_expect(tel, env, &r, Some(&t), &mut gas)?;
                if vl == vr {
                    Ok(vec![Value::Refl(Box::new(vl))])
                } else {
                    Ok(Vec::new())
                }
            }
            Term::Pi(_, dom, cod) => {
                let dom_vals = self.enumerate_type(tel, env, &dom, depth)?;
                let mut cod_spaces: Vec<Vec<Value>> = Vec::with_capacity(dom_vals.len());
                let mut inner_tel = tel.clone();
                inner_tel.push("", (*dom).clone());
                let mut max_cod = 0usize;
                for v in &dom_vals {
                    let mut inner_env = env.to_vec();
                    inner_env.push(v.clone());
                    let cods = self.enumerate_type(&inner_tel, &inner_env, &cod, depth)?;
                    max_cod = max_cod.max(cods.len());
                    cod_spaces.push(cods);
                }
                if dom_vals.len() * max_cod > self.bound.max_fun {
                    return Err(OracleError::FunctionSpaceTooLarge {
                        domain: dom_vals.len(),
                        codomain: max_cod,
                    });
                }
                let count = cod_spaces
                    .iter()
                    .map(|c| c.len())
                    .try_fold(1usize, |a, b| a.checked_mul(b))
                    .unwrap_or(usize::MAX);
                if count > self.bound.max_fun.max(1) {
                    return Err(OracleError::FunctionSpaceTooLarge {
                        domain: dom_vals.len(),
                        codomain: max_cod,
                    });
                }
                let mut graphs: Vec<Vec<(Value, Value)>> = vec![Vec::new()];
                for (v, cods) in dom_vals.iter().zip(cod_spaces.iter()) {
                    let mut next = Vec::new();
                    for g in &graphs {
                        for c in cods {
                            let mut g2 = g.clone();
                            g2.push((v.clone(), c.clone()));
                            next.push(g2);
                        }
                    }
                    graphs = next;
                }
                Ok(graphs.into_iter().map(Value::Fun).collect())
            }
            other => Err(OracleError::UnsupportedType(format!(
                "cannot enumerate a type headed by {}",
                crate::unify::head_name(&other)
            ))),
        }
    }

    /// Denotation of a well-typed term in an environment for `tel`.
    pub fn eval(&self, tel: &Telescope, env: &[Value], t: &Term) -> Result<Value, OracleError> {
        let mut gas = EVAL_GAS;
        self.eval_expect(tel, env, t, None, &mut gas)
    }

    /// Type-directed evaluation; `expected` is needed for lambdas, whose
    /// domains come from the annotation.
    pub fn eval_with_type(
        &self,
        tel: &Telescope,
        env: &[Value],
        t: &Term,
        expected: &Term,
    ) -> Result<Value, OracleError> {
        let mut gas = EVAL_GAS;
        self.eval_expect(tel, env, t, Some(expected), &mut gas)
    }

    fn eval_expect(
        &self,
        tel: &Telescope,
        env: &[Value],
        t: &Term,
        expected: Option<&Term>,
        gas: &mut u64,
    ) -> Result<Value, OracleError> {
        if *gas == 0 {
            return Err(OracleError::BoundExceeded("evaluation step budget".into()));
        }
        *gas -= 1;
        match t {
            Term::Var(i) => Ok(env[tel.pos_of_index(*i)].clone()),
            Term::Type | Term::TyCon(..) | Term::Pi(..) | Term::Eq(..) => {
                let sub = self.readback_env_for(t, env)?;
                let closed = apply_subst(t, &sub);
                let code = crate::conversion::normalize(&self.sig, &closed)?;
                Ok(Value::Type(code))
            }
            Term::Lam(_, body) => {
                let exp = expected.ok_or_else(|| {
                    OracleError::Unrepresentable("lambda without an expected type".into())
                })?;
                match whnf(&self.sig, exp)? {
                    Term::Pi(_, dom, cod) => {
                        let dom_vals = self.enumerate_type(tel, env, &dom, self.bound.max_depth)?;
                        let mut inner_tel = tel.clone();
                        inner_tel.push("", (*dom).clone());
                        let mut graph = Vec::with_capacity(dom_vals.len());
                        for v in dom_vals {
                            let mut inner_env = env.to_vec();
                            inner_env.push(v.clone());
                            let out =
                                self.eval_expect(&inner_tel, &inner_env, body, Some(&cod), gas)?;
                            graph.push((v, out));
                        }
                        Ok(Value::Fun(graph))
                    }
                    other => Err(OracleError::UnsupportedType(format!(
                        "lambda checked against non-function {}",
                        crate::unify::head_name(&other)
                    ))),
                }
            }
            Term::App(..) => {
                // Reduce first: a beta redex needs no typing information.
                let w = whnf(&self.sig, t)?;
                if !matches!(w, Term::App(..)) {
                    return self.eval_expect(tel, env, &w, expected, gas);
                }
                let (f, a) = match &w {
                    Term::App(f, a) => (f.clone(), a.clone()),
                    _ => unreachable!(),
                };
                let (f, a) = (&f, &a);
                let checker = Checker::new(&self.sig);
                let f_ty = checker.infer(tel, f)?;
                let f_ty_w = whnf(&self.sig, &f_ty)?;
                let dom = match &f_ty_w {
                    Term::Pi(_, d, _) => (**d).clone(),
                    other => {
                        return Err(OracleError::UnsupportedType(format!(
                            "application head has non-function type {}",
                            crate::unify::head_name(other)
                        )))
                    }
                };
                let vf = self.eval_expect(tel, env, f, Some(&f_ty_w), gas)?;
                let va = self.eval_expect(tel, env, a, Some(&dom), gas)?;
                match vf {
                    Value::Fun(graph) => graph
                        .into_iter()
                        .find(|(k, _)| *k == va)
                        .map(|(_, v)| v)
                        .ok_or_else(|| {
                            OracleError::BoundExceeded(
                                "argument outside the enumerated function domain".into(),
                            )
                        }),
                    other => Err(OracleError::Unrepresentable(format!(
                        "applied a non-function value {}",
                        print_value(&other)
                    ))),
                }
            }
            Term::Refl(a) => {
                let inner_exp = match expected.map(|e| whnf(&self.sig, e)).transpose()? {
                    Some(Term::Eq(ty, _, _)) => Some(*ty),
                    _ => None,
                };
                let v = self.eval_expect(tel, env, a, inner_exp.as_ref(), gas)?;
                Ok(Value::Refl(Box::new(v)))
            }
            Term::DataCon(name, args) => {
                let full = self.sig.datacon_args_tel(name).ok_or_else(|| {
                    OracleError::UnsupportedType(format!("unknown constructor {name}"))
                })?;
                let mut vals = Vec::with_capacity(args.len());
                for (k, a) in args.terms.iter().enumerate() {
                    let prefix = Subst::new(args.terms[..k].to_vec());
                    let ety = apply_subst(&full.entries[k].ty, &prefix);
                    vals.push(self.eval_expect(tel, env, a, Some(&ety), gas)?);
                }
                Ok(Value::Con(name.clone(), vals))
            }
            Term::Def(name) => {
                let d = self.sig.def(name).ok_or_else(|| {
                    OracleError::UnsupportedType(format!("unknown definition {name}"))
                })?;
                let (body, ty) = (d.body.clone(), d.ty.clone());
                self.eval_expect(&Telescope::new(), &[], &body, Some(&ty), gas)
            }
            Term::Match(m) => {
                let mut scrut_vals = Vec::with_capacity(m.scrutinees.len());
                for (k, s) in m.scrutinees.terms.iter().enumerate() {
                    let prefix = Subst::new(m.scrutinees.terms[..k].to_vec());
                    let ety = apply_subst(&m.scrutinee_tel.entries[k].ty, &prefix);
                    scrut_vals.push(self.eval_expect(tel, env, s, Some(&ety), gas)?);
                }
                for branch in &m.branches {
                    if let Some(rho) =
                        self.match_values(&branch.tel, &branch.pattern, &scrut_vals, gas)?
                    {
                        let body_ty = apply_subst(&m.motive, &branch.pattern);
                        return self.eval_expect(
                            &branch.tel,
                            &rho,
                            &branch.body,
                            Some(&body_ty),
                            gas,
                        );
                    }
                }
                Err(OracleError::NoSemanticBranch)
            }
        }
    }

    /// Semantic factorization: values for the pattern telescope making the
    /// pattern's denotation equal the scrutinee tuple, if any. Binding is
    /// greedy and structural, then verified by evaluating the pattern.
    pub fn match_values(
        &self,
        pat_tel: &Telescope,
        pattern: &Subst,
        scrut_vals: &[Value],
        gas: &mut u64,
    ) -> Result<Option<Vec<Value>>, OracleError> {
        let mut bindings: Vec<Option<Value>> = vec![None; pat_tel.len()];
        for (p, v) in pattern.terms.iter().zip(scrut_vals.iter()) {
            if !bind_value(pat_tel, p, v, &mut bindings) {
                return Ok(None);
            }
        }
        let mut rho = Vec::with_capacity(pat_tel.len());
        for b in bindings {
            match b {
                Some(v) => rho.push(v),
                None => return Ok(None),
            }
        }
        // Verify the factorization; forced positions are checked here.
        for (k, p) in pattern.terms.iter().enumerate() {
            match self.eval_expect(pat_tel, &rho, p, None, gas) {
                Ok(pv) => {
                    if pv != scrut_vals[k] {
                        return Ok(None);
                    }
                }
                Err(OracleError::Unrepresentable(_)) => return Ok(None),
                Err(e) => return Err(e),
            }
        }
        Ok(Some(rho))
    }

    /// Semantic cover sweep: counts, for every enumerated environment, the
    /// leaves whose pattern image contains it.
    pub fn check_cover_semantic(
        &self,
        xi: &Telescope,
        leaves: &[(Telescope, Subst)],
    ) -> Result<CoverReport, OracleError> {
        let envs = self.enum_telescope(xi)?;
        let mut report = CoverReport {
            environments: envs.len(),
            covering: true,
            disjoint: true,
            uncovered: Vec::new(),
            overlapping: Vec::new(),
        };
        for env in envs {
            let mut hits = 0usize;
            for (ltel, lpat) in leaves {
                let mut gas = EVAL_GAS;
                if self.match_values(ltel, lpat, &env, &mut gas)?.is_some() {
                    hits += 1;
                }
            }
            if hits == 0 {
                report.covering = false;
                report.uncovered.push(env);
            } else if hits > 1 {
                report.disjoint = false;
                report.overlapping.push(env);
            }
        }
        Ok(report)
    }

    /// The unique function on the enumerated context restricting to each
    /// branch table along its leaf pattern. Requires a verified cover.
    pub fn amalgamate(
        &self,
        xi: &Telescope,
        leaves: &[(Telescope, Subst)],
        tables: &[BranchTable],
    ) -> Result<BranchTable, OracleError> {
        let envs = self.enum_telescope(xi)?;
        let mut out = Vec::with_capacity(envs.len());
        for env in envs {
            let mut found: Option<Value> = None;
            for ((ltel, lpat), table) in leaves.iter().zip(tables.iter()) {
                let mut gas = EVAL_GAS;
                if let Some(rho) = self.match_values(ltel, lpat, &env, &mut gas)? {
                    let v = table
                        .iter()
                        .find(|(k, _)| *k == rho)
                        .map(|(_, v)| v.clone())
                        .ok_or_else(|| {
                            OracleError::BoundExceeded("branch table misses an environment".into())
                        })?;
                    match &found {
                        None => found = Some(v),
                        Some(prev) if *prev == v => {}
                        Some(_) => return Err(OracleError::ConflictingBranches),
                    }
                }
            }
            match found {
                Some(v) => out.push((env, v)),
                None => {
                    return Err(OracleError::BoundExceeded(
                        "environment not covered by any leaf".into(),
                    ))
                }
            }
        }
        Ok(out)
    }

    /// Branch tables obtained by evaluating a leaf's body on every
    /// environment of its telescope.
    pub fn branch_table(
        &self,
        leaf_tel: &Telescope,
        body: &Term,
        body_ty: &Term,
    ) -> Result<BranchTable, OracleError> {
        let envs = self.enum_telescope(leaf_tel)?;
        let mut out = Vec::with_capacity(envs.len());
        for env in envs {
            let mut gas = EVAL_GAS;
            let v = self.eval_expect(leaf_tel, &env, body, Some(body_ty), &mut gas)?;
            out.push((env, v));
        }
        Ok(out)
    }

    /// Reads a first-order value back into a closed term.
    pub fn read_back(&self, v: &Value) -> Result<Term, OracleError> {
        match v {
            Value::Type(t) => Ok(t.clone()),
            Value::Con(n, args) => {
                let mut terms = Vec::with_capacity(args.len());
                for a in args {
                    terms.push(self.read_back(a)?);
                }
                Ok(Term::DataCon(n.clone(), Subst::new(terms)))
            }
            Value::Refl(v) => Ok(Term::Refl(Box::new(self.read_back(v)?))),
            Value::Fun(_) => Err(OracleError::Unrepresentable(
                "function values have no term form".into(),
            )),
        }
    }

    /// A substitution replacing exactly the variables `t` mentions by the
    /// read-back of their environment values.
    fn readback_env_for(&self, t: &Term, env: &[Value]) -> Result<Subst, OracleError> {
        let n = env.len();
        let fv = free_vars(t);
        let mut terms = Vec::with_capacity(n);
        for (pos, value) in env.iter().enumerate() {
            let idx = n - 1 - pos;
            if fv.contains(&idx) {
                terms.push(self.read_back(value)?);
            } else {
                terms.push(Term::Type);
            }
        }
        Ok(Subst::new(terms))
    }
}

/// Greedy structural binding of pattern variables against a value. Forced
/// positions (anything that is not a variable, constructor application, or
/// refl) are skipped here and caught by the verification pass.
fn bind_value(pat_tel: &Telescope, pat: &Term, v: &Value, bindings: &mut [Option<Value>]) -> bool {
    match pat {
        Term::Var(i) => {
            let pos = pat_tel.pos_of_index(*i);
            match &bindings[pos] {
                None => {
                    bindings[pos] = Some(v.clone());
                    true
                }
                Some(prev) => prev == v,
            }
        }
        Term::DataCon(d, pargs) => match v {
            Value::Con(d2, vargs) if d == d2 && pargs.len() == vargs.len() => pargs
                .terms
                .iter()
                .zip(vargs.iter())
                .all(|(p, v)| bind_value(pat_tel, p, v, bindings)),
            _ => false,
        },
        Term::Refl(parg) => match v {
            Value::Refl(varg) => bind_value(pat_tel, parg, varg, bindings),
            _ => false,
        },
        _ => true,
    }
}
