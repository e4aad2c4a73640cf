use serde_json::{Map, Value};

use crate::schema::{AugmentedSceneGraph, EventPrediction, GeoPrediction, TemporalPrediction};

/// Peer specialist outputs handed to a cross-stage agent.
#[derive(Debug, Clone, Copy, Default)]
pub struct PeerOutputs<'a> {
    pub event: Option<&'a EventPrediction>,
    pub temporal: Option<&'a TemporalPrediction>,
    pub geo: Option<&'a GeoPrediction>,
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize")
}

/// The graph object with `abstract_idea` appended, as given to the prompt
/// agent and the direct specialists.
pub fn direct_context(asg: &AugmentedSceneGraph) -> String {
    pretty(&asg.to_wire())
}

/// `{scene_graph, abstract_idea, peer_outputs}` for the cross specialists.
/// `abstract_idea` is omitted when the abstract stage was ablated or failed.
pub fn cross_context(asg: &AugmentedSceneGraph, peers: PeerOutputs<'_>) -> String {
    let mut obj = Map::new();
    obj.insert("scene_graph".into(), asg.graph.to_wire());
    if let Some(idea) = &asg.abstract_idea {
        obj.insert("abstract_idea".into(), Value::String(idea.clone()));
    }
    let mut peer = Map::new();
    if let Some(e) = peers.event {
        peer.insert("event".into(), e.to_wire());
    }
    if let Some(t) = peers.temporal {
        peer.insert("temporal".into(), t.to_wire());
    }
    if let Some(g) = peers.geo {
        peer.insert("geospatial".into(), g.to_wire());
    }
    obj.insert("peer_outputs".into(), Value::Object(peer));
    pretty(&Value::Object(obj))
}
