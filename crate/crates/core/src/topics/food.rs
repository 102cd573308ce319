use serde::{Deserialize, Serialize};

use crate::content::schema::PaaEntry;
use crate::error::FlowError;
use crate::fsm::{acknowledge_turn, HandlerOutput, HandlerRegistry, StateCtx, Tracker};
use crate::module::ModuleId;
use crate::text::{normalize, stem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoodSubtopic {
    FavoriteDish,
    Cooking,
    Cuisines,
    GrowingAGarden,
    HealthyEating,
}

impl FoodSubtopic {
    pub const ORDER: [Self; 5] =
        [Self::FavoriteDish, Self::Cooking, Self::Cuisines, Self::GrowingAGarden, Self::HealthyEating];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::FavoriteDish => "favorite-dish",
            Self::Cooking => "cooking",
            Self::Cuisines => "cuisines",
            Self::GrowingAGarden => "growing-a-garden",
            Self::HealthyEating => "healthy-eating",
        }
    }

    pub fn template_key(self) -> String {
        format!("food_q_{}", self.as_str().replace('-', "_"))
    }

    fn cues(self) -> &'static [&'static str] {
        match self {
            Self::FavoriteDish => &["dish", "favorite food"],
            Self::Cooking => &["cook", "cooking", "bake", "baking", "recipe"],
            Self::Cuisines => &["cuisine", "italian", "mexican", "chinese", "japanese", "indian", "thai"],
            Self::GrowingAGarden => &["garden", "gardening", "grow", "vegetables"],
            Self::HealthyEating => &["healthy", "diet", "vegetarian", "vegan", "salad"],
        }
    }

    /// Subtopic the user's words point at, if any.
    pub fn requested(utterance: &str) -> Option<Self> {
        let norm = format!(" {} ", normalize(utterance));
        Self::ORDER.into_iter().find(|s| s.cues().iter().any(|c| norm.contains(&format!(" {c} "))))
    }
}

/// User-requested subtopic first, else the fixed order; `None` once all are done.
pub fn next_food_subtopic(discussed: &[FoodSubtopic], requested: Option<FoodSubtopic>) -> Option<FoodSubtopic> {
    requested
        .filter(|r| !discussed.contains(r))
        .or_else(|| FoodSubtopic::ORDER.into_iter().find(|s| !discussed.contains(s)))
}

const DISCUSSED: &str = "food.discussed";

fn discussed(t: &Tracker<'_>) -> Vec<FoodSubtopic> {
    t.conv_list(DISCUSSED)
        .iter()
        .filter_map(|s| FoodSubtopic::ORDER.into_iter().find(|f| f.as_str() == s))
        .collect()
}

fn next(ctx: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let ack = if ctx.arg_bool("ack") { acknowledge_turn(t)? } else { None };
    let lead = ack.map(|a| format!("{a} ")).unwrap_or_default();
    match next_food_subtopic(&discussed(t), FoodSubtopic::requested(t.utterance)) {
        Some(s) => {
            t.push_conv_list(DISCUSSED, s.as_str());
            let q = t.render_plain(&s.template_key())?;
            Ok(HandlerOutput::say(format!("{lead}{q}")).then("asked"))
        }
        None => {
            let close = t.render_plain("food_wrap")?;
            t.stop();
            Ok(HandlerOutput::say(format!("{lead}{close}")))
        }
    }
}

const PAA_PENDING: &str = "paa.pending";
const PAA_OFFERED: &str = "paa.offered";

/// First not-yet-offered PAA entry for `module` whose topic word the user said.
pub fn paa_candidate<'a>(utterance: &str, module: &ModuleId, paa: &'a [PaaEntry], offered: &[String]) -> Option<&'a PaaEntry> {
    let stems: Vec<String> = normalize(utterance).split_whitespace().map(stem).collect();
    paa.iter().find(|p| {
        p.module == *module && !offered.contains(&p.topic) && {
            let topic: Vec<String> = normalize(&p.topic).split_whitespace().map(stem).collect();
            !topic.is_empty() && stems.windows(topic.len()).any(|w| w == topic.as_slice())
        }
    })
}

/// Acknowledges, then offers a PAA question when the user mentioned a PAA topic.
fn react(_: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let ack = acknowledge_turn(t)?;
    let offered = t.conv_list(PAA_OFFERED);
    let module = t.module.clone();
    let candidate = paa_candidate(t.utterance, &module, &t.content.paa, &offered).cloned();
    match candidate {
        Some(p) => {
            t.push_conv_list(PAA_OFFERED, &p.topic);
            t.set_conv(PAA_PENDING, p.topic.clone());
            let offer = t.render_with("paa_offer", &[("question", &p.question)])?;
            let text = match ack {
                Some(a) => format!("{a} {offer}"),
                None => offer,
            };
            Ok(HandlerOutput::say(text).then("paa"))
        }
        None => Ok(HandlerOutput { text: ack, transition: Some("next".into()) }),
    }
}

/// Yes answers the pending PAA question, no skips it, and a missing entry skips silently.
fn paa_answer(_: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let pending = t.remove_conv(PAA_PENDING).and_then(|v| v.as_str().map(String::from));
    let entry = pending.and_then(|topic| t.content.paa.iter().find(|p| p.topic == topic).cloned());
    let Some(p) = entry else {
        return Ok(HandlerOutput::go("next"));
    };
    let text = if t.fine_grain().is_positive() {
        t.render_with("paa_answer", &[("answer", &p.answer)])?
    } else {
        t.render_plain("paa_skip")?
    };
    Ok(HandlerOutput::say(text).then("next"))
}

pub fn register(reg: &mut HandlerRegistry) {
    reg.register("food.next", next);
    reg.register("food.react", react);
    reg.register("paa.answer", paa_answer);
}
