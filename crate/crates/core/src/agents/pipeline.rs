use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::serialize::{cross_context, direct_context, PeerOutputs};
use super::templates::Template;
use crate::backend::{call_and_parse, BackendRequest, CallContext, Part, Stage, StageOutcome};
use crate::schema::{
    AbstractIdea, AgentPrompt, AugmentedSceneGraph, ImageBytes, ImageRecord, Payload,
    PredictionBundle, SceneGraph, SpecialistPrompts,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Direct,
    PartialCross,
    #[default]
    FullCross,
    /// Single-call step-by-step baseline.
    ZeroshotCot,
    /// Single-call detective baseline.
    Detective,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::Direct,
        Mode::PartialCross,
        Mode::FullCross,
        Mode::ZeroshotCot,
        Mode::Detective,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Direct => "direct",
            Mode::PartialCross => "partial_cross",
            Mode::FullCross => "full_cross",
            Mode::ZeroshotCot => "zeroshot_cot",
            Mode::Detective => "detective",
        }
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, Mode::ZeroshotCot | Mode::Detective)
    }

    /// Backend calls per image when nothing is ablated or retried: one per
    /// stage.
    pub fn expected_calls(self) -> usize {
        match self {
            Mode::Direct => 6,
            Mode::PartialCross => 8,
            Mode::FullCross => 9,
            Mode::ZeroshotCot | Mode::Detective => 1,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mode '{s}' (expected direct, partial_cross, full_cross, zeroshot_cot or detective)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub include_image_in_prompt_layer: bool,
    pub include_image_in_extraction: bool,
    pub enable_scene_graph: bool,
    pub enable_abstract: bool,
    pub enable_prompt_agent: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: Mode::FullCross,
            include_image_in_prompt_layer: true,
            include_image_in_extraction: true,
            enable_scene_graph: true,
            enable_abstract: true,
            enable_prompt_agent: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub image_id: String,
    pub scene_graph: AugmentedSceneGraph,
    pub prompts: SpecialistPrompts,
    pub direct: PredictionBundle,
    #[serde(rename = "final")]
    pub final_: PredictionBundle,
    pub degraded_stages: Vec<Stage>,
    pub warnings: Vec<String>,
    /// Some stage gave up because the transport was exhausted.
    pub backend_exhausted: bool,
    /// `send` calls per stage, retries included.
    pub calls: BTreeMap<Stage, u32>,
}

impl PipelineResult {
    pub fn total_calls(&self) -> u32 {
        self.calls.values().sum()
    }

    /// The abstract stage output as the agent returned it.
    pub fn abstract_idea(&self) -> AbstractIdea {
        AbstractIdea {
            idea: self.scene_graph.abstract_idea.clone(),
            reasoning: self.scene_graph.abstract_reasoning.clone(),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("image for '{id}' is unreadable ({path}): {reason}")]
    ImageUnreadable {
        id: String,
        path: String,
        reason: String,
    },
}

pub fn default_prompts() -> SpecialistPrompts {
    let p = |role: &str| AgentPrompt {
        prompt: format!("Analyze the image for {role} information."),
        reasoning: String::new(),
    };
    SpecialistPrompts {
        event_prompt: p("event"),
        temporal_prompt: p("temporal"),
        geo_prompt: p("geospatial"),
    }
}

/// Per-image pipeline state. Stage functions take `&mut self` so one
/// image's stages run strictly in order.
pub struct PipelineRun<'a> {
    img: &'a ImageRecord,
    image: Arc<ImageBytes>,
    cfg: PipelineConfig,
    ctx: CallContext<'a>,
    degraded: Vec<Stage>,
    warnings: Vec<String>,
    exhausted: bool,
    calls: BTreeMap<Stage, u32>,
}

impl<'a> PipelineRun<'a> {
    pub fn new(
        img: &'a ImageRecord,
        cfg: PipelineConfig,
        ctx: CallContext<'a>,
    ) -> Result<Self, PipelineError> {
        let image = img
            .image
            .load()
            .map_err(|e| PipelineError::ImageUnreadable {
                id: img.id.clone(),
                path: img.image.describe(),
                reason: e.to_string(),
            })?;
        Ok(PipelineRun {
            img,
            image: Arc::new(image),
            cfg,
            ctx,
            degraded: Vec::new(),
            warnings: Vec::new(),
            exhausted: false,
            calls: BTreeMap::new(),
        })
    }

    fn request(
        &self,
        stage: Stage,
        context: &str,
        prompt: Option<&str>,
        with_image: bool,
    ) -> BackendRequest {
        let (system, user_text) = Template::for_stage(stage).render(context, prompt);
        let mut parts = Vec::new();
        if with_image {
            parts.push(Part::Image(self.image.clone()));
        }
        if !user_text.is_empty() {
            parts.push(Part::Text(user_text));
        }
        let mut req = BackendRequest::new(stage, &self.img.id, system, parts);
        if matches!(
            stage,
            Stage::SceneGraph | Stage::ZeroshotCot | Stage::Detective
        ) {
            req.public_figures = self.img.public_figures.clone();
        }
        req
    }

    /// Books the outcome and returns the payload, or `None` when degraded.
    fn absorb(&mut self, stage: Stage, out: StageOutcome) -> Option<Payload> {
        *self.calls.entry(stage).or_insert(0) += out.sends;
        match out.result {
            Ok(v) => {
                self.warnings
                    .extend(v.warnings.into_iter().map(|w| format!("{stage}: {w}")));
                Some(v.record)
            }
            Err(d) => {
                self.exhausted |= d.backend_exhausted;
                self.degraded.push(stage);
                self.warnings
                    .push(format!("degraded: {stage}: {}", d.reason));
                None
            }
        }
    }

    fn call(&mut self, req: BackendRequest) -> Option<Payload> {
        let stage = req.stage;
        let out = call_and_parse(&req, &self.ctx);
        self.absorb(stage, out)
    }

    /// Issues up to three specialist requests concurrently and absorbs the
    /// outcomes in request order.
    fn call_all(&mut self, reqs: Vec<BackendRequest>) -> Vec<(Stage, Option<Payload>)> {
        let ctx = self.ctx;
        let outcomes: Vec<StageOutcome> = std::thread::scope(|s| {
            let handles: Vec<_> = reqs
                .iter()
                .map(|r| s.spawn(move || call_and_parse(r, &ctx)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("stage worker panicked"))
                .collect()
        });
        reqs.iter()
            .zip(outcomes)
            .map(|(r, out)| (r.stage, self.absorb(r.stage, out)))
            .collect()
    }

    pub fn build_scene_graph(&mut self) -> SceneGraph {
        if !self.cfg.enable_scene_graph {
            return SceneGraph::default();
        }
        let req = self.request(Stage::SceneGraph, "", None, true);
        match self.call(req) {
            Some(Payload::SceneGraph(g)) => g,
            _ => SceneGraph::default(),
        }
    }

    pub fn add_abstract(&mut self, graph: SceneGraph) -> AugmentedSceneGraph {
        let mut asg = AugmentedSceneGraph {
            graph,
            ..Default::default()
        };
        if !self.cfg.enable_abstract {
            return asg;
        }
        let context = serde_json::to_string_pretty(&asg.graph.to_wire())
            .expect("JSON values always serialize");
        let req = self.request(Stage::Abstract, &context, None, true);
        if let Some(Payload::Abstract(a)) = self.call(req) {
            asg.abstract_idea = a.idea;
            asg.abstract_reasoning = a.reasoning;
        }
        asg
    }

    pub fn generate_prompts(&mut self, asg: &AugmentedSceneGraph) -> SpecialistPrompts {
        if !self.cfg.enable_prompt_agent {
            return default_prompts();
        }
        let req = self.request(
            Stage::Prompts,
            &direct_context(asg),
            None,
            self.cfg.include_image_in_prompt_layer,
        );
        match self.call(req) {
            Some(Payload::Prompts(p)) => fill_missing_prompts(p),
            _ => default_prompts(),
        }
    }

    pub fn direct_extract(
        &mut self,
        asg: &AugmentedSceneGraph,
        prompts: &SpecialistPrompts,
    ) -> PredictionBundle {
        let context = direct_context(asg);
        let with_image = self.cfg.include_image_in_extraction;
        let reqs = vec![
            self.request(
                Stage::EventDirect,
                &context,
                Some(&prompts.event_prompt.prompt),
                with_image,
            ),
            self.request(
                Stage::TemporalDirect,
                &context,
                Some(&prompts.temporal_prompt.prompt),
                with_image,
            ),
            self.request(
                Stage::GeoDirect,
                &context,
                Some(&prompts.geo_prompt.prompt),
                with_image,
            ),
        ];
        let mut bundle = PredictionBundle::degraded();
        for (_, payload) in self.call_all(reqs) {
            match payload {
                Some(Payload::Event(e)) => bundle.event = e,
                Some(Payload::Temporal(t)) => bundle.temporal = t,
                Some(Payload::Geo(g)) => bundle.geo = g,
                _ => {}
            }
        }
        bundle
    }

    pub fn cross_extract(
        &mut self,
        asg: &AugmentedSceneGraph,
        prompts: &SpecialistPrompts,
        direct: &PredictionBundle,
    ) -> PredictionBundle {
        let with_image = self.cfg.include_image_in_extraction;
        let mut reqs = Vec::new();
        if self.cfg.mode == Mode::FullCross {
            let peers = PeerOutputs {
                temporal: Some(&direct.temporal),
                geo: Some(&direct.geo),
                event: None,
            };
            reqs.push(self.request(
                Stage::EventCross,
                &cross_context(asg, peers),
                Some(&prompts.event_prompt.prompt),
                with_image,
            ));
        }
        let temporal_peers = match self.cfg.mode {
            Mode::FullCross => PeerOutputs {
                event: Some(&direct.event),
                geo: Some(&direct.geo),
                temporal: None,
            },
            _ => PeerOutputs {
                event: Some(&direct.event),
                ..Default::default()
            },
        };
        let geo_peers = match self.cfg.mode {
            Mode::FullCross => PeerOutputs {
                event: Some(&direct.event),
                temporal: Some(&direct.temporal),
                geo: None,
            },
            _ => PeerOutputs {
                event: Some(&direct.event),
                ..Default::default()
            },
        };
        reqs.push(self.request(
            Stage::TemporalCross,
            &cross_context(asg, temporal_peers),
            Some(&prompts.temporal_prompt.prompt),
            with_image,
        ));
        reqs.push(self.request(
            Stage::GeoCross,
            &cross_context(asg, geo_peers),
            Some(&prompts.geo_prompt.prompt),
            with_image,
        ));

        let mut bundle = direct.clone();
        for (stage, payload) in self.call_all(reqs) {
            match payload {
                Some(Payload::Event(e)) => bundle.event = e,
                Some(Payload::Temporal(t)) => bundle.temporal = t,
                Some(Payload::Geo(g)) => bundle.geo = g,
                _ => self
                    .warnings
                    .push(format!("cross-fallback: {stage} kept the direct result")),
            }
        }
        bundle
    }

    fn baseline(&mut self, stage: Stage) -> PredictionBundle {
        let req = self.request(stage, "", None, true);
        match self.call(req) {
            Some(Payload::Combined(b)) => b,
            _ => PredictionBundle::degraded(),
        }
    }

    pub fn run(mut self) -> PipelineResult {
        let (asg, prompts, direct, final_) = match self.cfg.mode {
            Mode::ZeroshotCot | Mode::Detective => {
                let stage = if self.cfg.mode == Mode::ZeroshotCot {
                    Stage::ZeroshotCot
                } else {
                    Stage::Detective
                };
                let b = self.baseline(stage);
                (
                    AugmentedSceneGraph::default(),
                    SpecialistPrompts::default(),
                    b.clone(),
                    b,
                )
            }
            mode => {
                let graph = self.build_scene_graph();
                let asg = self.add_abstract(graph);
                let prompts = self.generate_prompts(&asg);
                let direct = self.direct_extract(&asg, &prompts);
                let final_ = if mode == Mode::Direct {
                    direct.clone()
                } else {
                    self.cross_extract(&asg, &prompts, &direct)
                };
                (asg, prompts, direct, final_)
            }
        };
        self.degraded.sort();
        self.degraded.dedup();
        PipelineResult {
            image_id: self.img.id.clone(),
            scene_graph: asg,
            prompts,
            direct,
            final_,
            degraded_stages: self.degraded,
            warnings: self.warnings,
            backend_exhausted: self.exhausted,
            calls: self.calls,
        }
    }
}

/// A prompt agent reply with an empty slot gets the default for that slot.
fn fill_missing_prompts(mut p: SpecialistPrompts) -> SpecialistPrompts {
    let d = default_prompts();
    for (slot, fallback) in [
        (&mut p.event_prompt, d.event_prompt),
        (&mut p.temporal_prompt, d.temporal_prompt),
        (&mut p.geo_prompt, d.geo_prompt),
    ] {
        if slot.prompt.trim().is_empty() {
            *slot = fallback;
        }
    }
    p
}

/// Runs every stage the config calls for. Only an unreadable image is an
/// error; every other failure degrades the affected stage.
pub fn run_pipeline(
    img: &ImageRecord,
    cfg: &PipelineConfig,
    ctx: &CallContext<'_>,
) -> Result<PipelineResult, PipelineError> {
    Ok(PipelineRun::new(img, *cfg, *ctx)?.run())
}
