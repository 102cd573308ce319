use crate::content::schema::{Debate, NewsItem};
use crate::error::FlowError;
use crate::fsm::{acknowledge_turn, HandlerOutput, HandlerRegistry, StateCtx, Tracker};
use crate::nlu::{extract_key_phrases, NluResources, Segment};
use crate::text::{contains_phrase, normalize};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FollowUp {
    /// Offer the next chunk, naming its key phrase.
    AskNext { key_phrase: String },
    /// Last chunk of a story with a linked debate.
    Debate { pro: String, con: String },
    End,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewsStep {
    pub chunk: String,
    pub follow_up: FollowUp,
}

/// Key phrase used to introduce a chunk: the first multiword phrase, else the first phrase.
pub fn chunk_key_phrase(chunk: &str, nlu: &NluResources) -> Option<String> {
    let segment = Segment::new(normalize(chunk), 0);
    let phrases = extract_key_phrases(&segment, nlu);
    phrases.iter().find(|p| p.contains(' ')).or(phrases.first()).cloned()
}

/// Chunk at `position` plus what to ask after it.
pub fn news_next_chunk(item: &NewsItem, position: usize, debates: &[Debate], nlu: &NluResources) -> Option<NewsStep> {
    let chunk = item.chunks.get(position)?.clone();
    let follow_up = match item.chunks.get(position + 1) {
        Some(next) => match chunk_key_phrase(next, nlu) {
            Some(key_phrase) => FollowUp::AskNext { key_phrase },
            None => FollowUp::AskNext { key_phrase: "what happened next".into() },
        },
        None => match item.debate_ref.as_ref().and_then(|d| debates.iter().find(|x| &x.id == d)) {
            Some(d) => FollowUp::Debate { pro: d.pro.clone(), con: d.con.clone() },
            None => FollowUp::End,
        },
    };
    Some(NewsStep { chunk, follow_up })
}

/// Story whose keywords best match `text`.
pub fn find_news<'a>(text: &str, items: &'a [NewsItem]) -> Option<&'a NewsItem> {
    let norm = normalize(text);
    let tokens: Vec<&str> = norm.split_whitespace().collect();
    items
        .iter()
        .map(|i| {
            let hits = i
                .keywords
                .iter()
                .filter(|k| {
                    let k = normalize(k);
                    let kt: Vec<&str> = k.split_whitespace().collect();
                    contains_phrase(&tokens, &kt).is_some()
                })
                .count();
            (i, hits)
        })
        .filter(|(_, h)| *h > 0)
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.id.cmp(&a.0.id)))
        .map(|(i, _)| i)
}

const ITEM: &str = "news.item";
const POSITION: &str = "news.position";
const READ: &str = "news.read";
const AWAITING_DEBATE: &str = "news.awaiting_debate";
const TRENDING_DONE: &str = "news.trending_done";

fn current(t: &Tracker<'_>) -> Option<NewsItem> {
    let id = t.conv(ITEM).as_str()?.to_string();
    t.content.news.iter().find(|n| n.id == id).cloned()
}

fn start(_: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let read = t.conv_list(READ);
    let query = format!("{} {}", t.keywords.clone().unwrap_or_default(), t.utterance);
    let item = find_news(&query, &t.content.news)
        .filter(|i| !read.contains(&i.id))
        .or_else(|| t.content.news.iter().find(|i| !read.contains(&i.id)))
        .cloned();
    let Some(item) = item else {
        let text = t.render_plain("news_none")?;
        t.stop();
        return Ok(HandlerOutput::say(text));
    };
    t.set_conv(ITEM, item.id.clone());
    t.set_conv(POSITION, 0u64);
    t.push_conv_list(READ, &item.id);
    let trending_done = t.conv_list(TRENDING_DONE);
    match &item.trending_flow {
        Some(flow) if !trending_done.contains(flow) => {
            t.push_conv_list(TRENDING_DONE, flow);
            Ok(HandlerOutput::go(flow.clone()))
        }
        _ => Ok(HandlerOutput::go("present")),
    }
}

fn present(ctx: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let ack = if ctx.arg_bool("ack") { acknowledge_turn(t)? } else { None };
    let Some(item) = current(t) else {
        return Err(ctx.fail("no current news item"));
    };
    let pos = t.conv(POSITION).value().and_then(|v| v.as_u64()).unwrap_or(0) as usize;
    let Some(step) = news_next_chunk(&item, pos, &t.content.debates, &t.content.nlu) else {
        let text = t.render_plain("news_done")?;
        t.stop();
        return Ok(HandlerOutput::say(text));
    };
    t.set_conv(POSITION, (pos + 1) as u64);
    let lead = if pos == 0 { Some(t.render_with("news_intro", &[("title", &item.title)])?) } else { None };
    let follow = match &step.follow_up {
        FollowUp::AskNext { key_phrase } => Some(t.render_with("news_continue_question", &[("phrase", key_phrase)])?),
        FollowUp::Debate { pro, con } => {
            t.set_conv(AWAITING_DEBATE, true);
            Some(t.render_with("news_debate_prompt", &[("pro", pro), ("con", con)])?)
        }
        FollowUp::End => None,
    };
    let parts: Vec<String> = [ack, lead, Some(step.chunk.clone()), follow.clone()].into_iter().flatten().collect();
    if follow.is_none() {
        t.stop();
        return Ok(HandlerOutput::say(parts.join(" ")));
    }
    Ok(HandlerOutput::say(parts.join(" ")).then("presented"))
}

fn react(_: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    if t.remove_conv(AWAITING_DEBATE).is_some() {
        let text = t.render_plain("news_debate_ack")?;
        t.stop();
        return Ok(HandlerOutput::say(text));
    }
    if t.fine_grain().is_negative() {
        let text = t.render_plain("news_done")?;
        t.stop();
        return Ok(HandlerOutput::say(text));
    }
    Ok(HandlerOutput::go("more"))
}

pub fn register(reg: &mut HandlerRegistry) {
    reg.register("news.start", start);
    reg.register("news.present", present);
    reg.register("news.react", react);
}
