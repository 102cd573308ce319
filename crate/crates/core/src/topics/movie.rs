use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::content::schema::MovieEntry;
use crate::error::FlowError;
use crate::fsm::{HandlerOutput, HandlerRegistry, StateCtx, Tracker};
use crate::text::contains_phrase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MovieAction {
    AskUser,
    Propose,
}

/// Alternates asking and proposing. The first move asks; when the user has
/// nothing to offer, the system proposes rather than asking again.
pub fn movie_next_action(last: Option<MovieAction>, user_gave_input: bool) -> MovieAction {
    match (last, user_gave_input) {
        (None, _) => MovieAction::AskUser,
        (Some(MovieAction::AskUser), _) => MovieAction::Propose,
        (Some(MovieAction::Propose), true) => MovieAction::AskUser,
        (Some(MovieAction::Propose), false) => MovieAction::Propose,
    }
}

/// Undiscussed movie sharing the most keywords with `current`; ties go to
/// the more popular, then the lower id. With no overlap anywhere, the most
/// popular undiscussed movie.
pub fn similar_movie<'a>(
    current: Option<&MovieEntry>,
    catalog: &'a [MovieEntry],
    discussed: &BTreeSet<u32>,
) -> Option<&'a MovieEntry> {
    let keys: BTreeSet<&str> = current.map(|c| c.keywords.iter().map(String::as_str).collect()).unwrap_or_default();
    catalog
        .iter()
        .filter(|m| !discussed.contains(&m.id) && current.is_none_or(|c| c.id != m.id))
        .map(|m| {
            let overlap = m.keywords.iter().filter(|k| keys.contains(k.as_str())).count();
            (m, overlap)
        })
        .max_by(|(a, oa), (b, ob)| oa.cmp(ob).then(a.popularity.cmp(&b.popularity)).then(b.id.cmp(&a.id)))
        .map(|(m, _)| m)
}

/// Longest catalog title mentioned in the utterance.
pub fn find_movie<'a>(utterance: &str, catalog: &'a [MovieEntry]) -> Option<&'a MovieEntry> {
    let tokens: Vec<&str> = utterance.split_whitespace().collect();
    catalog
        .iter()
        .filter(|m| {
            let title = crate::text::normalize(&m.title);
            let t: Vec<&str> = title.split_whitespace().collect();
            contains_phrase(&tokens, &t).is_some()
        })
        .max_by_key(|m| m.title.len())
}

const LAST: &str = "movie.last_action";
const DISCUSSED: &str = "movie.discussed";
const PROPOSED: &str = "movie.proposed";
const MAX_MOVIES: usize = 4;

fn last_action(t: &Tracker<'_>) -> Option<MovieAction> {
    t.conv(LAST).value().and_then(|v| serde_json::from_value(v.clone()).ok())
}

fn set_last(t: &mut Tracker<'_>, a: MovieAction) {
    t.set_conv(LAST, serde_json::to_value(a).expect("enum serializes"));
}

fn discussed(t: &Tracker<'_>) -> BTreeSet<u32> {
    t.conv_list(DISCUSSED).iter().filter_map(|s| s.parse().ok()).collect()
}

fn mark_discussed(t: &mut Tracker<'_>, id: u32) {
    t.push_conv_list(DISCUSSED, &id.to_string());
}

fn propose<'c>(t: &mut Tracker<'c>, current: Option<&MovieEntry>, key: &str) -> Result<Option<String>, FlowError> {
    let catalog = &t.content.movies;
    let Some(m) = similar_movie(current, catalog, &discussed(t)) else {
        return Ok(None);
    };
    let m = m.clone();
    t.set_conv(PROPOSED, m.id);
    set_last(t, MovieAction::Propose);
    t.render_with(key, &[("title", &m.title), ("about", &m.about)]).map(Some)
}

fn wrap(t: &mut Tracker<'_>, lead: Option<String>) -> Result<HandlerOutput, FlowError> {
    let close = t.render_plain("movie_wrap")?;
    t.stop();
    Ok(HandlerOutput::say(join(lead, close)))
}

fn join(a: Option<String>, b: String) -> String {
    match a {
        Some(a) if !a.is_empty() => format!("{a} {b}"),
        _ => b,
    }
}

fn ask(_: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    if let Some(m) = find_movie(t.utterance, &t.content.movies).cloned() {
        return react_to(t, m);
    }
    let action = movie_next_action(last_action(t), false);
    let text = match action {
        MovieAction::AskUser => {
            set_last(t, MovieAction::AskUser);
            t.render_plain("movie_ask")?
        }
        MovieAction::Propose => match propose(t, None, "movie_propose")? {
            Some(p) => p,
            None => return wrap(t, None),
        },
    };
    let next = if action == MovieAction::AskUser { "asked" } else { "proposed" };
    Ok(HandlerOutput::say(text).then(next))
}

fn react_to(t: &mut Tracker<'_>, m: MovieEntry) -> Result<HandlerOutput, FlowError> {
    mark_discussed(t, m.id);
    let trivia = t.render_with("movie_trivia", &[("title", &m.title), ("trivia", &m.trivia)])?;
    if discussed(t).len() >= MAX_MOVIES {
        return wrap(t, Some(trivia));
    }
    set_last(t, MovieAction::AskUser);
    match movie_next_action(Some(MovieAction::AskUser), true) {
        MovieAction::Propose => match propose(t, Some(&m), "movie_propose")? {
            Some(p) => Ok(HandlerOutput::say(format!("{trivia} {p}")).then("proposed")),
            None => wrap(t, Some(trivia)),
        },
        MovieAction::AskUser => Ok(HandlerOutput::say(trivia).then("asked")),
    }
}

fn react(_: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    match find_movie(t.utterance, &t.content.movies).cloned() {
        Some(m) => react_to(t, m),
        None => {
            set_last(t, MovieAction::AskUser);
            match propose(t, None, "movie_no_input_propose")? {
                Some(p) => Ok(HandlerOutput::say(p).then("proposed")),
                None => wrap(t, None),
            }
        }
    }
}

fn proposal(_: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let proposed_id = t.conv(PROPOSED).value().and_then(|v| v.as_u64()).map(|v| v as u32);
    let proposed = proposed_id.and_then(|id| t.content.movies.iter().find(|m| m.id == id).cloned());
    let fg = t.fine_grain();
    let lead = match &proposed {
        Some(m) => {
            mark_discussed(t, m.id);
            if fg.is_negative() || fg == crate::nlu::FineGrainIntent::AnsUnknown {
                t.render_plain("movie_proposal_no")?
            } else {
                t.render_with("movie_proposal_yes", &[("title", &m.title), ("trivia", &m.trivia)])?
            }
        }
        None => String::new(),
    };
    t.remove_conv(PROPOSED);
    if discussed(t).len() >= MAX_MOVIES {
        return wrap(t, Some(lead));
    }
    let gave_input = !t.utterance.is_empty() && fg != crate::nlu::FineGrainIntent::AnsUnknown;
    match movie_next_action(last_action(t), gave_input) {
        MovieAction::AskUser => {
            set_last(t, MovieAction::AskUser);
            let q = t.render_plain("movie_ask_another")?;
            Ok(HandlerOutput::say(join(Some(lead), q)).then("asked"))
        }
        MovieAction::Propose => match propose(t, proposed.as_ref(), "movie_propose")? {
            Some(p) => Ok(HandlerOutput::say(join(Some(lead), p)).then("proposed")),
            None => wrap(t, Some(lead)),
        },
    }
}

pub fn register(reg: &mut HandlerRegistry) {
    reg.register("movie.ask", ask);
    reg.register("movie.react", react);
    reg.register("movie.proposal", proposal);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(id: u32, pop: u32, kw: &[&str]) -> MovieEntry {
        MovieEntry {
            id,
            title: format!("m{id}"),
            keywords: kw.iter().map(|s| s.to_string()).collect(),
            popularity: pop,
            about: String::new(),
            trivia: String::new(),
        }
    }

    #[test]
    fn alternation() {
        assert_eq!(movie_next_action(None, false), MovieAction::AskUser);
        assert_eq!(movie_next_action(Some(MovieAction::AskUser), true), MovieAction::Propose);
        assert_eq!(movie_next_action(Some(MovieAction::AskUser), false), MovieAction::Propose);
        assert_eq!(movie_next_action(Some(MovieAction::Propose), true), MovieAction::AskUser);
        assert_eq!(movie_next_action(Some(MovieAction::Propose), false), MovieAction::Propose);
    }

    #[test]
    fn similarity_and_ties() {
        let cat = vec![m(1, 5, &["a", "b"]), m(2, 9, &["a"]), m(3, 1, &["a", "b"]), m(4, 50, &["z"]), m(5, 5, &["a", "b"])];
        let cur = m(9, 0, &["a", "b"]);
        let none = BTreeSet::new();
        // 1 and 5 tie on overlap and popularity; lower id wins
        assert_eq!(similar_movie(Some(&cur), &cat, &none).unwrap().id, 1);
        let d: BTreeSet<u32> = [1, 5].into_iter().collect();
        assert_eq!(similar_movie(Some(&cur), &cat, &d).unwrap().id, 3);
        let lonely = m(8, 0, &["q"]);
        assert_eq!(similar_movie(Some(&lonely), &cat, &none).unwrap().id, 4);
        let all: BTreeSet<u32> = [1, 2, 3, 4, 5].into_iter().collect();
        assert!(similar_movie(Some(&cur), &cat, &all).is_none());
    }
}
