use serde_json::Value;

use super::runtime::{HandlerOutput, HandlerRegistry, StateCtx};
use super::tracker::{Lookup, Tracker};
use crate::ack::templated_ack_key;
use crate::adaptation::next_open_question_category;
use crate::error::FlowError;
use crate::module::{ModuleId, ModuleState};
use crate::nlg::Slots;
use crate::nlu::{DialogAct, FineGrainIntent};
use crate::text::{is_in, FIRST_PERSON};

/// Registers the generic, data-driven handler kinds.
pub fn register_builtins(reg: &mut HandlerRegistry) {
    reg.register("say", say);
    reg.register("ack", ack);
    reg.register("branch_on_fine_grain", branch_on_fine_grain);
    reg.register("branch_on_intent", branch_on_intent);
    reg.register("store_slot", store_slot);
    reg.register("set_slot", set_slot);
    reg.register("propose_topic", propose_topic);
    reg.register("call_question_handler", call_question_handler);
    reg.register("open_question", open_question);
    reg.register("end", end);
}

/// Resolves `$conv.key`, `$turn.key`, `$profile.name` and `$keywords`; other
/// strings are literals.
fn resolve<'t>(tracker: &'t Tracker<'_>, spec: &str) -> Option<String> {
    let lookup_str = |l: Lookup<'t>| match l.value()? {
        Value::String(s) => Some(s.clone()),
        Value::Null => None,
        other => Some(other.to_string()),
    };
    if let Some(k) = spec.strip_prefix("$conv.") {
        lookup_str(tracker.conv(k))
    } else if let Some(k) = spec.strip_prefix("$turn.") {
        lookup_str(tracker.turn(k))
    } else if spec == "$profile.name" {
        tracker.user_name()
    } else if spec == "$keywords" {
        tracker.keywords.clone()
    } else {
        Some(spec.to_string())
    }
}

fn slots_from_args(ctx: &StateCtx<'_>, tracker: &Tracker<'_>) -> Option<Slots> {
    let mut slots = Slots::new();
    if let Some(map) = ctx.args.get("slots").and_then(Value::as_object) {
        for (name, spec) in map {
            let value = resolve(tracker, spec.as_str()?)?;
            slots.insert(name.clone(), value);
        }
    }
    Some(slots)
}

/// Restatement or canned acknowledgment of the user's last answer.
pub fn acknowledge_turn(tracker: &mut Tracker<'_>) -> Result<Option<String>, FlowError> {
    let Some(primary) = tracker.primary() else {
        return Ok(None);
    };
    let tokens = primary.segment.tokens();
    let fg = primary.fine_grain;
    let restate = tokens.len() >= 3
        && is_in(tokens[0], FIRST_PERSON)
        && !matches!(fg, FineGrainIntent::AnsYes | FineGrainIntent::AnsNo | FineGrainIntent::AnsUnknown)
        && matches!(primary.dialog_act, DialogAct::Statement | DialogAct::Opinion | DialogAct::Answer);
    if restate {
        let opener = tracker.render_plain("ack_opener")?;
        let text = tracker
            .content
            .acknowledger
            .acknowledge_statement(&primary.segment, tracker.previous_bot_text, &opener);
        return Ok(Some(text));
    }
    let key = templated_ack_key(fg);
    if tracker.content.templates.contains(&key) {
        return tracker.render_plain(&key).map(Some);
    }
    if tokens.len() >= 3 && !primary.dialog_act.is_question() {
        return tracker.render_plain("ack_generic").map(Some);
    }
    Ok(None)
}

fn join(parts: impl IntoIterator<Item = Option<String>>) -> Option<String> {
    let v: Vec<String> = parts.into_iter().flatten().filter(|s| !s.is_empty()).collect();
    (!v.is_empty()).then(|| v.join(" "))
}

fn say(ctx: &StateCtx<'_>, tracker: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let ack = if ctx.arg_bool("ack") { acknowledge_turn(tracker)? } else { None };
    let mut keys: Vec<String> = Vec::new();
    if let Some(k) = ctx.arg_str("template") {
        keys.push(k.to_string());
    }
    if let Some(list) = ctx.args.get("templates").and_then(Value::as_array) {
        keys.extend(list.iter().filter_map(|v| v.as_str().map(String::from)));
    }
    let slots = match slots_from_args(ctx, tracker) {
        Some(s) => s,
        None => match ctx.arg_str("fallback_template") {
            Some(fb) => {
                keys = vec![fb.to_string()];
                Slots::new()
            }
            None => return Err(ctx.fail("slot source is absent")),
        },
    };
    let mut parts = vec![ack];
    for k in keys {
        parts.push(Some(tracker.render(&k, &slots)?));
    }
    Ok(HandlerOutput { text: join(parts), transition: ctx.pick("next") })
}

fn ack(ctx: &StateCtx<'_>, tracker: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    Ok(HandlerOutput { text: acknowledge_turn(tracker)?, transition: ctx.pick("next") })
}

fn branch_on_fine_grain(ctx: &StateCtx<'_>, tracker: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let fg = tracker.fine_grain();
    let question = tracker.question().is_some();
    let mut names = vec![fg.as_str()];
    if fg.is_positive() {
        names.push("positive");
    }
    if fg.is_negative() {
        names.push("negative");
    }
    if question {
        names.push("question");
    }
    names.push("default");
    let chosen = names.into_iter().find(|n| ctx.has(n)).map(String::from);
    let text = if ctx.arg_bool("ack") { acknowledge_turn(tracker)? } else { None };
    Ok(HandlerOutput { text, transition: chosen })
}

fn condition_holds(cond: &Value, tracker: &Tracker<'_>) -> bool {
    let Some(obj) = cond.as_object() else {
        return false;
    };
    let list = |v: &Value| -> Vec<String> {
        match v {
            Value::String(s) => vec![s.clone()],
            Value::Array(a) => a.iter().filter_map(|x| x.as_str().map(String::from)).collect(),
            _ => Vec::new(),
        }
    };
    obj.iter().all(|(k, v)| match k.as_str() {
        "act" => {
            let wanted = list(v);
            tracker.nlu.iter().any(|a| {
                let name = serde_json::to_value(a.dialog_act).ok();
                wanted.iter().any(|w| name.as_ref().and_then(Value::as_str) == Some(w))
            })
        }
        "fine_grain" => list(v).iter().any(|w| w == tracker.fine_grain().as_str()),
        "phrase" => list(v).iter().any(|p| tracker.mentions(p)),
        "topic" => {
            let wanted = list(v);
            tracker
                .nlu
                .iter()
                .flat_map(|a| &a.topic_candidates)
                .any(|c| wanted.iter().any(|w| ModuleId::new(w.as_str()) == c.topic))
        }
        "polarity" => match v.as_str() {
            Some("positive") => tracker.fine_grain().is_positive(),
            Some("negative") => tracker.fine_grain().is_negative(),
            _ => false,
        },
        "question" => v.as_bool() == Some(tracker.question().is_some()),
        "slot_set" => list(v).iter().all(|k| !tracker.conv(k).is_absent()),
        "slot_absent" => list(v).iter().all(|k| tracker.conv(k).is_absent()),
        "gender" => {
            let g = serde_json::to_value(tracker.gender()).ok();
            g.as_ref().and_then(Value::as_str) == v.as_str()
        }
        _ => false,
    })
}

fn branch_on_intent(ctx: &StateCtx<'_>, tracker: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let branches = ctx.args.get("branches").and_then(Value::as_array).cloned().unwrap_or_default();
    let chosen = branches
        .iter()
        .find(|b| b.get("when").is_some_and(|w| condition_holds(w, tracker)))
        .and_then(|b| b.get("go").and_then(Value::as_str).map(String::from))
        .or_else(|| ctx.arg_str("default").map(String::from));
    let text = if ctx.arg_bool("ack") { acknowledge_turn(tracker)? } else { None };
    Ok(HandlerOutput { text, transition: chosen })
}

fn store_slot(ctx: &StateCtx<'_>, tracker: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let key = ctx.arg_str("key").ok_or_else(|| ctx.fail("store_slot needs `key`"))?.to_string();
    let value = match ctx.arg_str("from").unwrap_or("key_phrase") {
        "key_phrase" => tracker.key_phrases().into_iter().next(),
        "utterance" => Some(tracker.utterance.to_string()).filter(|u| !u.is_empty()),
        "keywords" => tracker.keywords.clone(),
        "topic_trigger" => tracker
            .nlu
            .iter()
            .flat_map(|a| &a.topic_candidates)
            .filter(|c| c.topic == tracker.module)
            .map(|c| c.trigger_phrase.clone())
            .next(),
        other => return Err(ctx.fail(format!("unknown slot source `{other}`"))),
    };
    let text = if ctx.arg_bool("ack") { acknowledge_turn(tracker)? } else { None };
    let Some(value) = value else {
        return Ok(HandlerOutput { text, transition: ctx.pick("missing") });
    };
    if ctx.arg_str("scope") == Some("turn") {
        tracker.set_turn(key, value);
    } else {
        tracker.set_conv(key, value);
    }
    Ok(HandlerOutput { text, transition: ctx.pick("next") })
}

fn set_slot(ctx: &StateCtx<'_>, tracker: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let key = ctx.arg_str("key").ok_or_else(|| ctx.fail("set_slot needs `key`"))?.to_string();
    let value = ctx.args.get("value").cloned().unwrap_or(Value::Null);
    tracker.set_conv(key, value);
    Ok(HandlerOutput { text: None, transition: ctx.pick("next") })
}

fn propose_topic(ctx: &StateCtx<'_>, tracker: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let topic = ModuleId::new(ctx.arg_str("topic").ok_or_else(|| ctx.fail("propose_topic needs `topic`"))?);
    let keywords = ctx.arg_str("keywords").and_then(|k| resolve(tracker, k));
    let ack = if ctx.arg_bool("ack") { acknowledge_turn(tracker)? } else { None };
    let key = ctx.arg_str("template").map(String::from).unwrap_or_else(|| format!("propose_{}", topic.slug()));
    let mut slots = Slots::new();
    if let Some(k) = &keywords {
        slots.insert("keywords".into(), k.clone());
    }
    let text = tracker.render(&key, &slots)?;
    tracker.attrs.propose_topic = Some(topic);
    tracker.attrs.propose_keywords = keywords;
    tracker.stop();
    Ok(HandlerOutput { text: join([ack, Some(text)]), transition: None })
}

fn call_question_handler(ctx: &StateCtx<'_>, tracker: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let Some(q) = tracker.question() else {
        return Ok(HandlerOutput { text: None, transition: ctx.pick("none") });
    };
    let answer = crate::topics::answer_question(q, tracker)?;
    Ok(HandlerOutput { text: Some(answer.text), transition: ctx.pick("answered") })
}

fn open_question(ctx: &StateCtx<'_>, tracker: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let ack = if ctx.arg_bool("ack") { acknowledge_turn(tracker)? } else { None };
    let text = ask_open_question(tracker)?;
    Ok(HandlerOutput { text: join([ack, Some(text)]), transition: ctx.pick("next") })
}

/// Renders the next open question and marks it pending.
pub fn ask_open_question(tracker: &mut Tracker<'_>) -> Result<String, FlowError> {
    let mut view = tracker.profile.clone();
    tracker.updates.apply(&mut view);
    let category = next_open_question_category(&view);
    let text = tracker.render_plain(category.template_key())?;
    tracker.updates.asked_open.push(category);
    tracker.attrs.pending_open_question = true;
    Ok(text)
}

fn end(ctx: &StateCtx<'_>, tracker: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let ack = if ctx.arg_bool("ack") { acknowledge_turn(tracker)? } else { None };
    let text = match ctx.arg_str("template") {
        Some(k) => {
            let slots = slots_from_args(ctx, tracker).ok_or_else(|| ctx.fail("slot source is absent"))?;
            Some(tracker.render(k, &slots)?)
        }
        None => None,
    };
    tracker.module_state = match ctx.arg_str("state") {
        Some("UNCLEAR") => ModuleState::Unclear,
        Some("CONTINUE") => ModuleState::Continue,
        _ => ModuleState::Stop,
    };
    let transition = if tracker.module_state == ModuleState::Stop { None } else { ctx.pick("next") };
    Ok(HandlerOutput { text: join([ack, text]), transition })
}
