use super::MetricError;
use crate::embedding::{cosine_similarity, EmbeddingProvider};
use crate::schema::EventPrediction;

/// Event and background joined by a single space.
pub fn event_text(event: &str, background: &str) -> String {
    format!("{event} {background}")
}

/// Cosine similarity of the embedded event+background texts, shifted from
/// [-1, 1] to [0, 1].
pub fn event_score(
    pred: &EventPrediction,
    gt_event: &str,
    gt_background: &str,
    provider: &dyn EmbeddingProvider,
) -> Result<f64, MetricError> {
    let pred_text = event_text(&pred.event.value, &pred.background.value);
    let gt_text = event_text(gt_event, gt_background);
    let vectors = provider.embed_batch(&[&pred_text, &gt_text])?;
    let cs = cosine_similarity(&vectors[0], &vectors[1])?;
    Ok((cs + 1.0) / 2.0)
}
