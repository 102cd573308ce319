use crate::content::schema::GameEntry;
use crate::error::FlowError;
use crate::fsm::{acknowledge_turn, HandlerOutput, HandlerRegistry, StateCtx, Tracker};
use crate::nlu::FineGrainIntent;
use crate::text::{contains_phrase, normalize};

const GAME: &str = "game.current";
const SUBTOPIC: &str = "game.subtopic";
const RECOMMENDED: &str = "game.recommended";
const DESCRIBE_TURNS: &str = "game.describe_turns";

const NO_PREFERENCE: &[&str] = &["nothing", "not really", "none", "no games", "i don't play", "not much"];
const GENERIC: &[&str] = &["games", "game", "video games", "video game", "lot", "stuff"];

/// How the game module reacts to the user's answer about what they play.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameReaction<'a> {
    InDepth(&'a GameEntry),
    Brief(&'a GameEntry),
    Elicit(String),
    Recommend,
}

pub fn find_game<'a>(utterance: &str, catalog: &'a [GameEntry]) -> Option<&'a GameEntry> {
    let tokens: Vec<&str> = utterance.split_whitespace().collect();
    catalog
        .iter()
        .filter(|g| {
            std::iter::once(&g.title).chain(&g.aliases).any(|name| {
                let n = normalize(name);
                let t: Vec<&str> = n.split_whitespace().collect();
                contains_phrase(&tokens, &t).is_some()
            })
        })
        .max_by_key(|g| g.title.len())
}

pub fn classify_game_answer<'a>(
    utterance: &str,
    fine_grain: FineGrainIntent,
    key_phrases: &[String],
    catalog: &'a [GameEntry],
) -> GameReaction<'a> {
    if let Some(g) = find_game(utterance, catalog) {
        return if g.subtopics.is_empty() { GameReaction::Brief(g) } else { GameReaction::InDepth(g) };
    }
    let tokens: Vec<&str> = utterance.split_whitespace().collect();
    let no_pref = matches!(fine_grain, FineGrainIntent::AnsNo | FineGrainIntent::AnsUnknown | FineGrainIntent::AnsDislike)
        || NO_PREFERENCE.iter().any(|p| {
            let p: Vec<&str> = p.split_whitespace().collect();
            contains_phrase(&tokens, &p).is_some()
        });
    if no_pref {
        return GameReaction::Recommend;
    }
    match key_phrases.iter().find(|k| !GENERIC.contains(&k.as_str())) {
        Some(k) => GameReaction::Elicit(k.clone()),
        None => GameReaction::Recommend,
    }
}

fn subtopic_text(t: &mut Tracker<'_>, g: &GameEntry, idx: usize) -> Result<Option<String>, FlowError> {
    let Some(s) = g.subtopics.get(idx) else {
        return Ok(None);
    };
    t.set_conv(SUBTOPIC, idx as u64);
    t.template_keys.push(format!("game_subtopic:{}:{}", g.id, s.id));
    Ok(Some(s.text.clone()))
}

fn react(_: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let phrases = t.key_phrases();
    let games = &t.content.games;
    match classify_game_answer(t.utterance, t.fine_grain(), &phrases, games) {
        GameReaction::InDepth(g) => {
            let g = g.clone();
            t.set_conv(GAME, g.id.clone());
            let lead = t.render_with("game_known", &[("title", &g.title)])?;
            let first = subtopic_text(t, &g, 0)?.unwrap_or_default();
            Ok(HandlerOutput::say(format!("{lead} {first}")).then("deep"))
        }
        GameReaction::Brief(g) => {
            let g = g.clone();
            let text = t.render_with("game_known_brief", &[("title", &g.title), ("pitch", &g.pitch)])?;
            t.stop();
            Ok(HandlerOutput::say(text))
        }
        GameReaction::Elicit(title) => {
            t.set_conv(GAME, title.clone());
            let text = t.render_with("game_elicit", &[("title", &title)])?;
            Ok(HandlerOutput::say(text).then("elicited"))
        }
        GameReaction::Recommend => recommend(t),
    }
}

fn recommend(t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let done = t.conv_list(RECOMMENDED);
    let pick = t.content.games.iter().find(|g| g.recommended && !done.contains(&g.id)).cloned();
    match pick {
        Some(g) => {
            t.push_conv_list(RECOMMENDED, &g.id);
            let text = t.render_with("game_recommend", &[("title", &g.title), ("pitch", &g.pitch)])?;
            Ok(HandlerOutput::say(text).then("recommended"))
        }
        None => {
            let text = t.render_plain("game_wrap")?;
            t.stop();
            Ok(HandlerOutput::say(text))
        }
    }
}

fn deep(_: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let ack = acknowledge_turn(t)?;
    let id = t.conv(GAME).as_str().map(String::from);
    let game = id.and_then(|id| t.content.games.iter().find(|g| g.id == id).cloned());
    let idx = t.conv(SUBTOPIC).value().and_then(|v| v.as_u64()).unwrap_or(0) as usize + 1;
    let next = match &game {
        Some(g) => subtopic_text(t, g, idx)?,
        None => None,
    };
    let lead = ack.map(|a| format!("{a} ")).unwrap_or_default();
    match next {
        Some(text) => Ok(HandlerOutput::say(format!("{lead}{text}")).then("deep")),
        None => {
            let close = t.render_plain("game_wrap")?;
            t.stop();
            Ok(HandlerOutput::say(format!("{lead}{close}")))
        }
    }
}

fn describe(_: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let n = t.conv(DESCRIBE_TURNS).value().and_then(|v| v.as_u64()).unwrap_or(0) + 1;
    t.set_conv(DESCRIBE_TURNS, n);
    let ack = t.render_plain("game_description_ack")?;
    if n >= 2 {
        let close = t.render_plain("game_wrap")?;
        t.stop();
        return Ok(HandlerOutput::say(format!("{ack} {close}")));
    }
    let more = t.render_plain("game_describe_more")?;
    Ok(HandlerOutput::say(format!("{ack} {more}")).then("more"))
}

pub fn register(reg: &mut HandlerRegistry) {
    reg.register("game.react", react);
    reg.register("game.deep", deep);
    reg.register("game.describe", describe);
}
