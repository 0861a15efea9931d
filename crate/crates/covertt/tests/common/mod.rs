//! Shared test support: a deterministic PRNG and a type-directed generator
//! of well-typed terms over a small corpus signature. Counts and seeds are
//! pinned so failures reproduce exactly.

#![allow(dead_code)]

use covertt::conversion::conv;
use covertt::frontend::check_text;
use covertt::syntax::{
    app, apps, datacon, eq, lam, pi, refl, tycon, var, weaken, Branch, MatchTerm, Signature, Subst,
    Telescope, Term,
};

/// splitmix64; deterministic across platforms.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n.max(1) as u64) as usize
    }

    pub fn chance(&mut self, percent: usize) -> bool {
        self.below(100) < percent
    }
}

const CORPUS_SRC: &str = r#"
data Bool() { true(); false() }
data Nat() { zero(); suc(p : Nat) }
data Vec(A : Type, n : Nat) {
  Nil(eq : Eq(Nat, n, zero));
  Cons(m : Nat, h : A, t : Vec(A, m), eq : Eq(Nat, n, suc(m)))
}
def not : Pi (b : Bool). Bool :=
  \b. match (b) : (c : Bool) to Bool {
    | (). (true) => false
    | (). (false) => true
  }
def head : Pi (A : Type) (n : Nat) (x : Vec(A, suc(n))). A :=
  \A n x. match (A, n, x) : (B : Type, k : Nat, v : Vec(B, suc(k))) to B {
    | (C : Type, m : Nat, h : C, t : Vec(C, m)).
      (C, .m, Cons(C, .(suc(m)), .m, h, t, .(refl(suc(m))))) => h
  }
"#;

/// Bool, Nat, Forded Vec, `not`, and `head`, elaborated through the real
/// frontend.
pub fn corpus_sig() -> Signature {
    check_text(CORPUS_SRC).expect("test corpus must check").sig
}

pub fn nat_lit(k: usize) -> Term {
    let mut t = datacon("zero", vec![]);
    for _ in 0..k {
        t = datacon("suc", vec![t]);
    }
    t
}

pub fn bool_ty() -> Term {
    tycon("Bool", vec![])
}

pub fn nat_ty() -> Term {
    tycon("Nat", vec![])
}

pub fn vec_ty(elem: Term, len: Term) -> Term {
    tycon("Vec", vec![elem, len])
}

/// A literal vector value of the given length over a closed element type.
pub fn vec_lit(
    sig: &Signature,
    rng: &mut Rng,
    elem_ty: &Term,
    len: usize,
    depth: usize,
    redexes: bool,
) -> Term {
    if len == 0 {
        datacon("Nil", vec![elem_ty.clone(), nat_lit(0), refl(nat_lit(0))])
    } else {
        let head =
            gen_term_with(sig, rng, &Telescope::new(), elem_ty, depth, redexes).expect("element");
        let tail = vec_lit(sig, rng, elem_ty, len - 1, depth, redexes);
        datacon(
            "Cons",
            vec![
                elem_ty.clone(),
                nat_lit(len),
                nat_lit(len - 1),
                head,
                tail,
                refl(nat_lit(len)),
            ],
        )
    }
}

/// A closed first-order type whose interpretation the oracle can enumerate.
pub fn gen_enumerable_type(rng: &mut Rng) -> Term {
    match rng.below(5) {
        0 => bool_ty(),
        1 => nat_ty(),
        2 => vec_ty(bool_ty(), nat_lit(rng.below(3))),
        3 => {
            let k = rng.below(2);
            eq(nat_ty(), nat_lit(k), nat_lit(k))
        }
        _ => vec_ty(nat_ty(), nat_lit(rng.below(2))),
    }
}

/// Type-directed generation of a well-typed term of type `ty` over `gamma`.
/// Redex and match wrappers exercise the computation rules; depth bounds
/// recursion.
pub fn gen_term(
    sig: &Signature,
    rng: &mut Rng,
    gamma: &Telescope,
    ty: &Term,
    depth: usize,
) -> Option<Term> {
    gen_term_with(sig, rng, gamma, ty, depth, true)
}

/// Like [`gen_term`]; `redexes: false` keeps every subterm inferable by the
/// bidirectional checker (no bare-lambda application heads).
pub fn gen_term_with(
    sig: &Signature,
    rng: &mut Rng,
    gamma: &Telescope,
    ty: &Term,
    depth: usize,
    redexes: bool,
) -> Option<Term> {
    // A variable of convertible type is always a candidate.
    let mut var_cands = Vec::new();
    for pos in 0..gamma.len() {
        let vt = gamma.type_at(pos);
        if conv(sig, &vt, ty).unwrap_or(false) {
            var_cands.push(gamma.var_at(pos));
        }
    }
    if depth == 0 {
        if !var_cands.is_empty() {
            return Some(var_cands[rng.below(var_cands.len())].clone());
        }
        return gen_canonical(sig, rng, gamma, ty, 0, redexes);
    }
    if !var_cands.is_empty() && rng.chance(30) {
        return Some(var_cands[rng.below(var_cands.len())].clone());
    }
    // Wrap in a beta redex now and then: (\x. t) s with x possibly unused.
    if redexes && rng.chance(25) {
        let dom = if rng.chance(50) { bool_ty() } else { nat_ty() };
        let arg = gen_term_with(sig, rng, gamma, &dom, depth - 1, redexes)?;
        let mut inner = gamma.clone();
        inner.push("gen", dom);
        let body = gen_term_with(sig, rng, &inner, &weaken(ty, 1), depth - 1, redexes)?;
        return Some(app(lam("gen", body), arg));
    }
    // Route through a definition: not for Bool, head for any closed
    // first-order element type, exercising unfolding and match reduction.
    if rng.chance(10) && *ty == bool_ty() {
        let arg = gen_term_with(sig, rng, gamma, &bool_ty(), depth - 1, redexes)?;
        return Some(app(covertt::syntax::def("not"), arg));
    }
    if rng.chance(10)
        && (*ty == bool_ty() || *ty == nat_ty())
        && covertt::syntax::is_well_scoped(ty, 0)
    {
        let len = rng.below(2);
        let v = vec_lit(sig, rng, ty, len + 1, depth.saturating_sub(1), redexes);
        return Some(apps(
            covertt::syntax::def("head"),
            [ty.clone(), nat_lit(len), v],
        ));
    }
    // Wrap in a Bool match when the goal type is closed (branch bodies live
    // in closed contexts).
    if rng.chance(15) && covertt::syntax::is_well_scoped(ty, 0) {
        let scrut = gen_term_with(sig, rng, gamma, &bool_ty(), depth - 1, redexes)?;
        let then_b = gen_term_with(sig, rng, &Telescope::new(), ty, depth - 1, redexes)?;
        let else_b = gen_term_with(sig, rng, &Telescope::new(), ty, depth - 1, redexes)?;
        return Some(Term::Match(Box::new(MatchTerm {
            scrutinees: Subst::new(vec![scrut]),
            scrutinee_tel: Telescope::from_entries(vec![("b".into(), bool_ty())]),
            motive: weaken(ty, 1),
            branches: vec![
                Branch {
                    tel: Telescope::new(),
                    pattern: Subst::new(vec![datacon("true", vec![])]),
                    body: then_b,
                },
                Branch {
                    tel: Telescope::new(),
                    pattern: Subst::new(vec![datacon("false", vec![])]),
                    body: else_b,
                },
            ],
        })));
    }
    gen_canonical(sig, rng, gamma, ty, depth, redexes)
}

fn gen_canonical(
    sig: &Signature,
    rng: &mut Rng,
    gamma: &Telescope,
    ty: &Term,
    depth: usize,
    redexes: bool,
) -> Option<Term> {
    let ty_w = covertt::conversion::whnf(sig, ty).ok()?;
    match &ty_w {
        Term::TyCon(n, args) if n == "Bool" => {
            let _ = args;
            Some(if rng.chance(50) {
                datacon("true", vec![])
            } else {
                datacon("false", vec![])
            })
        }
        Term::TyCon(n, _) if n == "Nat" => {
            if depth == 0 || rng.chance(40) {
                Some(datacon("zero", vec![]))
            } else {
                let p = gen_term_with(sig, rng, gamma, &nat_ty(), depth - 1, redexes)?;
                Some(datacon("suc", vec![p]))
            }
        }
        Term::TyCon(n, args) if n == "Vec" => {
            let elem = &args.terms[0];
            let len = covertt::conversion::normalize(sig, &args.terms[1]).ok()?;
            // Only literal lengths are constructible here.
            let mut k = 0usize;
            let mut cur = &len;
            loop {
                match cur {
                    Term::DataCon(c, rest) if c == "suc" => {
                        k += 1;
                        cur = &rest.terms[0];
                    }
                    Term::DataCon(c, _) if c == "zero" => break,
                    _ => return None,
                }
            }
            if !covertt::syntax::is_well_scoped(elem, 0) {
                return None;
            }
            Some(vec_lit(sig, rng, elem, k, depth.saturating_sub(1), redexes))
        }
        Term::Eq(t, l, r) => {
            if conv(sig, l, r).ok()? {
                let _ = t;
                Some(refl((**l).clone()))
            } else {
                None
            }
        }
        Term::Type => Some(if rng.chance(50) { bool_ty() } else { nat_ty() }),
        Term::Pi(_, dom, cod) => {
            let mut inner = gamma.clone();
            inner.push("arg", (**dom).clone());
            let body = gen_term_with(sig, rng, &inner, cod, depth.saturating_sub(1), redexes)?;
            Some(lam("arg", body))
        }
        _ => None,
    }
}

/// A telescope of simple closed types with one dependent tail entry, used
/// by the substitution-lemma and stability suites.
pub fn gen_telescope(rng: &mut Rng, max_len: usize) -> Telescope {
    let mut tel = Telescope::new();
    let n = 1 + rng.below(max_len.max(1));
    for i in 0..n {
        let ty = match rng.below(3) {
            0 => bool_ty(),
            1 => nat_ty(),
            _ => nat_ty(),
        };
        tel.push(format!("g{i}"), ty);
    }
    tel
}

/// A substitution `gamma ⊢ _ ⇒ target` built by generating one well-typed
/// term per entry.
pub fn gen_subst(
    sig: &Signature,
    rng: &mut Rng,
    gamma: &Telescope,
    target: &Telescope,
    depth: usize,
) -> Option<Subst> {
    gen_subst_with(sig, rng, gamma, target, depth, true)
}

pub fn gen_subst_with(
    sig: &Signature,
    rng: &mut Rng,
    gamma: &Telescope,
    target: &Telescope,
    depth: usize,
    redexes: bool,
) -> Option<Subst> {
    let mut terms: Vec<Term> = Vec::with_capacity(target.len());
    for k in 0..target.len() {
        let prefix = Subst::new(terms.clone());
        let want = covertt::syntax::apply_subst(&target.entries[k].ty, &prefix);
        terms.push(gen_term_with(sig, rng, gamma, &want, depth, redexes)?);
    }
    Some(Subst::new(terms))
}

/// Convenience: `Pi (x : a). b` with no dependency.
pub fn arrow(a: Term, b: Term) -> Term {
    pi("_", a, weaken(&b, 1))
}

/// Applies `head` to the arguments, left to right.
pub fn call(head: Term, args: Vec<Term>) -> Term {
    apps(head, args)
}

pub fn var_at(tel: &Telescope, pos: usize) -> Term {
    var(tel.len() - 1 - pos)
}
