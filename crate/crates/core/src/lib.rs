//! Runtime verification of LLM outputs against expert-written logic specifications.
//!
//! The pipeline has four stages:
//!
//! 1. **Interpretation** ([`interpret`]): objects and truth values are perceived from the
//!    prompt context and the LLM output, and the rules of an [`esl::EslSpec`] are grounded
//!    by binding their variables to those objects.
//! 2. **Normalization** ([`logic::to_rule_like`]): every ground rule `D1 ∨ … ∨ Dm ⇒ C1 ∧ … ∧ Cn`
//!    is split into implications with a conjunctive body and a single-literal head.
//! 3. **Forward chaining** ([`logic::FcGraph`]): perceived truth values are propagated by
//!    modus ponens over positive and negative literal nodes until a fixpoint or a conflict.
//! 4. **Follow-up queries** ([`verifier`]): newly derived knowledge is put back to the target
//!    model as a yes/no question, and a contradicting answer is reported as an inconsistency.

pub mod agents;
pub mod esl;
pub mod interpret;
pub mod logic;
pub mod verifier;

pub use esl::{parse_spec, EslSpec};

pub use logic::{GroundLiteral, PropositionId, Truth};
pub use verifier::{verify, verify_with, Verdict, VerdictStatus, VerificationCase};
