//! The layered agent pipeline: scene graph, abstract idea, prompt agent,
//! then direct and cross extraction by the event, temporal and geospatial
//! specialists.

mod pipeline;
mod serialize;
mod templates;

pub use pipeline::{
    default_prompts, run_pipeline, Mode, PipelineConfig, PipelineError, PipelineResult, PipelineRun,
};
pub use serialize::{cross_context, direct_context, PeerOutputs};
pub use templates::Template;
