//! Regulated multiset rewriting: systems, the five regulation classes,
//! bounded run exploration, class translations and a register-machine
//! compiler.

pub mod explorer;
pub mod model;
pub mod multiset;
pub mod omega;
pub mod regulation;
pub mod rewriting;
pub mod rm;
pub mod transforms;
pub use explorer::{
    bounded_equiv, Configuration, EquivResult, ExploreError, Explorer, FailReason, RunVerdict,
    Side, TerminalOutputs, Witness, DEFAULT_MAX_CONFIGS,
};
pub use model::{parse_model, parse_run, serialize_model, ModelDocument, ModelError, RunFile};
pub use multiset::{Element, Multiset, MultisetError};
pub use omega::{parse_omega, BuchiAutomaton, Lasso, OmegaError, OmegaExpr, RegexExpr};
pub use regulation::{
    Diagnostic, PriorityRelation, ProhibitedContexts, RegularLanguage, Regulation, RegulationClass,
    RegulationError, RegulationMemory, RuleOrder, SuccessorMap,
};
pub use rewriting::{RewriteError, Rule, RuleId, RunPrefix, System};

pub use rm::{interpret_rm, parse_rm, Instruction, RegisterProgram, RmError};
pub use transforms::{attach_neutral, cfr_to_cr, or_to_pr, CfrTranslation};
