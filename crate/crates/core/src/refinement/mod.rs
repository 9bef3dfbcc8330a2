//! The refinement loop: failure analysis, candidate types, oracle
//! consultation, review, diff application and reclassification.

mod analysis;
mod candidates;
mod decision;
mod failures;
mod oracle;
mod review;
mod rounds;

pub use analysis::{agreement_audit, category_analysis, AgreementReport, AnalysisReport, CategoryRow, ConfusionCell, NoModuleEntity, TypeCount};
pub use candidates::{candidate_types, CandidateType, MAX_SAMPLES};
pub use decision::{accepted_diff, Evidence, OracleDecision, ReviewState};
pub use failures::{compute_failures, FailureSets};
pub use oracle::{
    open_oracle, parse_response, summarize, CategorySummary, ConsoleOracle, ModuleSummary, Oracle, OracleFailure,
    OracleRequest, OracleResponse, ProcessOracle, PropertyCount, RequestBody, RequestKind, ScriptedOracle, Verdict,
};
pub use review::{ReviewEntry, ReviewJournal};
pub use rounds::{
    apply_reviewed, apply_round, consult_oracles, overlay_reviews, refine, replay, Applied, Corpus, MemoryCorpus,
    RefineConfig, RefineOutcome, RefinementRound, RoundStatus, RunStore, ShardCorpus, StopReason,
};
