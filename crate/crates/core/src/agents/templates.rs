use crate::backend::Stage;

/// Agent instruction templates, stored verbatim under `prompts/`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Template {
    SceneGraph,
    Abstract,
    PromptAgent,
    GeoDirect,
    TemporalDirect,
    EventDirect,
    GeoCross,
    TemporalCross,
    EventCross,
    ZeroshotCot,
    Detective,
}

impl Template {
    pub const ALL: [Template; 11] = [
        Template::SceneGraph,
        Template::Abstract,
        Template::PromptAgent,
        Template::GeoDirect,
        Template::TemporalDirect,
        Template::EventDirect,
        Template::GeoCross,
        Template::TemporalCross,
        Template::EventCross,
        Template::ZeroshotCot,
        Template::Detective,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            Template::SceneGraph => "scene_graph.txt",
            Template::Abstract => "abstract.txt",
            Template::PromptAgent => "prompt_agent.txt",
            Template::GeoDirect => "geo_direct.txt",
            Template::TemporalDirect => "temporal_direct.txt",
            Template::EventDirect => "event_direct.txt",
            Template::GeoCross => "geo_cross.txt",
            Template::TemporalCross => "temporal_cross.txt",
            Template::EventCross => "event_cross.txt",
            Template::ZeroshotCot => "zeroshot_cot.txt",
            Template::Detective => "detective.txt",
        }
    }

    pub fn text(self) -> &'static str {
        match self {
            Template::SceneGraph => include_str!("../../prompts/scene_graph.txt"),
            Template::Abstract => include_str!("../../prompts/abstract.txt"),
            Template::PromptAgent => include_str!("../../prompts/prompt_agent.txt"),
            Template::GeoDirect => include_str!("../../prompts/geo_direct.txt"),
            Template::TemporalDirect => include_str!("../../prompts/temporal_direct.txt"),
            Template::EventDirect => include_str!("../../prompts/event_direct.txt"),
            Template::GeoCross => include_str!("../../prompts/geo_cross.txt"),
            Template::TemporalCross => include_str!("../../prompts/temporal_cross.txt"),
            Template::EventCross => include_str!("../../prompts/event_cross.txt"),
            Template::ZeroshotCot => include_str!("../../prompts/zeroshot_cot.txt"),
            Template::Detective => include_str!("../../prompts/detective.txt"),
        }
    }

    pub fn for_stage(stage: Stage) -> Template {
        match stage {
            Stage::SceneGraph => Template::SceneGraph,
            Stage::Abstract => Template::Abstract,
            Stage::Prompts => Template::PromptAgent,
            Stage::EventDirect => Template::EventDirect,
            Stage::TemporalDirect => Template::TemporalDirect,
            Stage::GeoDirect => Template::GeoDirect,
            Stage::EventCross => Template::EventCross,
            Stage::TemporalCross => Template::TemporalCross,
            Stage::GeoCross => Template::GeoCross,
            Stage::ZeroshotCot => Template::ZeroshotCot,
            Stage::Detective => Template::Detective,
        }
    }

    /// Splits the template at its input section. The instructions become
    /// the system prompt; the `Scene Graph:` / `Prompt:` lines are filled
    /// in and returned as the user text. Templates without an input section
    /// yield an empty user text.
    pub fn render(self, scene_graph: &str, prompt: Option<&str>) -> (String, String) {
        let text = self.text();
        let Some(start) = input_section_start(text) else {
            return (text.trim_end().to_string(), String::new());
        };
        let system = text[..start].trim_end().to_string();
        let mut user = Vec::new();
        for line in text[start..].lines() {
            if line.trim().is_empty() {
                continue;
            }
            let filled = if line.starts_with("Scene Graph:") {
                fill_placeholder(line, scene_graph)
            } else if line.starts_with("Prompt:") {
                fill_placeholder(line, prompt.unwrap_or(""))
            } else {
                line.to_string()
            };
            user.push(filled);
        }
        (system, user.join("\n"))
    }
}

fn input_section_start(text: &str) -> Option<usize> {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if line.starts_with("Scene Graph:") && line.contains('<') {
            return Some(offset);
        }
        offset += line.len();
    }
    None
}

/// Replaces the `<...>` span of a template line, dropping trailing padding.
fn fill_placeholder(line: &str, value: &str) -> String {
    match (line.find('<'), line.rfind('>')) {
        (Some(a), Some(b)) if a < b => format!("{}{}{}", &line[..a], value, &line[b + 1..])
            .trim_end()
            .to_string(),
        _ => line.to_string(),
    }
}
