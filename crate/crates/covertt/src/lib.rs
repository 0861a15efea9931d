//! CoverTT: a small dependent type theory whose pattern matching is
//! parameterized by a coverage relation, together with a coverage checker
//! that elaborates derivation trees, a first-order unifier for matching on
//! equality proofs, and a finite set-model oracle that validates accepted
//! covers by brute-force enumeration.
//!
//! Layout:
//! - [`syntax`]: terms, telescopes, substitutions, signatures.
//! - [`conversion`]: reduction and definitional equality.
//! - [`typecheck`]: bidirectional checker for terms, telescopes, signatures.
//! - [`unify`]: first-order unification with clash and occurs detection.
//! - [`coverage`]: the coverage relation, as derivation trees.
//! - [`oracle`]: finite set-model enumeration, evaluation, amalgamation.
//! - [`frontend`]: concrete syntax, elaboration, printing, diagnostics.

pub mod conversion;
pub mod coverage;
pub mod frontend;
pub mod oracle;
pub mod syntax;
pub mod typecheck;
pub mod unify;
