//! Metropolis-Hastings loops: kernels, multiple chains and parallel tempering.

mod kernel;
mod run;
mod step;
mod tempering;

pub use kernel::{
    AdaptInput, AdaptReport, AdsKernel, AsiKernel, EiaKernel, FixedKernel, KernelRegistry,
    KernelSpec, SelectionKernel,
};
pub use run::{run, run_asi, run_eia, ChainState, InitModel, RunConfig};
pub use step::{mh_step, ModelTarget, StepRecord, TargetState};
pub use tempering::{PtConfig, PtLadder};
