use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::FlowError;
use crate::fsm::{acknowledge_turn, HandlerOutput, HandlerRegistry, StateCtx, Tracker};
use crate::nlu::FineGrainIntent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FashionMove {
    Stay,
    SwitchGroup,
}

/// Counts consecutive negative answers within the current subtopic group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FashionGroupTracker {
    pub consecutive_negatives: u32,
    pub threshold: u32,
}

impl Default for FashionGroupTracker {
    fn default() -> Self {
        Self { consecutive_negatives: 0, threshold: 2 }
    }
}

/// A positive answer resets the count; reaching the threshold switches group.
pub fn fashion_group_tracker(tracker: &mut FashionGroupTracker, fine_grain: FineGrainIntent) -> FashionMove {
    if fine_grain.is_negative() {
        tracker.consecutive_negatives += 1;
    } else if fine_grain.is_positive() {
        tracker.consecutive_negatives = 0;
    }
    if tracker.consecutive_negatives >= tracker.threshold {
        tracker.consecutive_negatives = 0;
        FashionMove::SwitchGroup
    } else {
        FashionMove::Stay
    }
}

/// Position inside the gender-specific group list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
struct Cursor {
    group: usize,
    subtopic: usize,
    visited_groups: Vec<usize>,
    tracker: FashionGroupTracker,
}

const CURSOR: &str = "fashion.cursor";

fn groups(ctx: &StateCtx<'_>, t: &Tracker<'_>) -> Result<Vec<Vec<String>>, FlowError> {
    let gender = serde_json::to_value(t.gender()).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let table = ctx.args.get("groups").ok_or_else(|| ctx.fail("fashion needs `groups`"))?;
    let list = table.get(&gender).or_else(|| table.get("UNKNOWN")).ok_or_else(|| ctx.fail("no groups for gender"))?;
    serde_json::from_value::<Vec<Vec<String>>>(list.clone()).map_err(|e| ctx.fail(e.to_string()))
}

fn load(t: &Tracker<'_>) -> Cursor {
    t.conv(CURSOR).value().and_then(|v| serde_json::from_value(v.clone()).ok()).unwrap_or_default()
}

fn save(t: &mut Tracker<'_>, c: &Cursor) {
    t.set_conv(CURSOR, serde_json::to_value(c).unwrap_or(Value::Null));
}

fn question(t: &mut Tracker<'_>, subtopic: &str) -> Result<String, FlowError> {
    t.render_plain(&format!("fashion_q_{subtopic}"))
}

fn start(ctx: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let gs = groups(ctx, t)?;
    let first = gs.first().and_then(|g| g.first()).ok_or_else(|| ctx.fail("empty fashion groups"))?.clone();
    let cursor = Cursor { visited_groups: vec![0], ..Cursor::default() };
    save(t, &cursor);
    let lead = t.render_plain("fashion_intro")?;
    let q = question(t, &first)?;
    Ok(HandlerOutput::say(format!("{lead} {q}")).then("asked"))
}

fn finish(t: &mut Tracker<'_>, lead: Option<String>) -> Result<HandlerOutput, FlowError> {
    let close = t.render_plain("fashion_wrap")?;
    t.stop();
    Ok(HandlerOutput::say(match lead {
        Some(l) => format!("{l} {close}"),
        None => close,
    }))
}

fn react(ctx: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let gs = groups(ctx, t)?;
    let mut c = load(t);
    let fg = t.fine_grain();
    let mv = fashion_group_tracker(&mut c.tracker, fg);
    let ack = if fg.is_positive() { Some(t.render_plain("fashion_yes_ack")?) } else { acknowledge_turn(t)? };
    let in_group_next = gs.get(c.group).and_then(|g| g.get(c.subtopic + 1)).cloned();
    let (switch, next) = match (mv, in_group_next) {
        (FashionMove::Stay, Some(s)) => (false, Some((c.group, c.subtopic + 1, s))),
        _ => {
            let g = (0..gs.len()).find(|g| *g != c.group && !c.visited_groups.contains(g));
            (true, g.and_then(|g| gs[g].first().map(|s| (g, 0, s.clone()))))
        }
    };
    let Some((g, s, subtopic)) = next else {
        save(t, &c);
        return finish(t, ack);
    };
    if switch {
        c.tracker.consecutive_negatives = 0;
        c.visited_groups.push(g);
    }
    c.group = g;
    c.subtopic = s;
    save(t, &c);
    let mut parts: Vec<String> = ack.into_iter().collect();
    if switch {
        parts.push(t.render_plain("fashion_switch")?);
        t.set_turn("fashion.move", "SWITCH_GROUP");
    } else {
        t.set_turn("fashion.move", "STAY");
    }
    parts.push(question(t, &subtopic)?);
    Ok(HandlerOutput::say(parts.join(" ")).then("asked"))
}

pub fn register(reg: &mut HandlerRegistry) {
    reg.register("fashion.start", start);
    reg.register("fashion.react", react);
}
