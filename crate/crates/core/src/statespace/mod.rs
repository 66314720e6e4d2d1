//! Explicit-state reachability analysis and soundness verdicts.

mod coverability;
mod graph;
mod soundness;

pub use coverability::{coverability, Coverability, OMEGA};
pub use graph::{explore, Edge, ExploreError, ReachabilityGraph, Status, Trace, UnboundedWitness};
pub use soundness::{
    check_k_soundness, check_kr_soundness, check_no_dead, check_proper, check_soundness, check_termination,
    check_workflow, BoundWitness, CheckError, ConditionOutcome, DeadTransitions, SoundnessResult, Stats,
    Verdict, DEFAULT_CAP,
};
