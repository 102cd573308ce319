use super::{NluResources, Segment, SourceLevel, TopicCandidate};
use crate::text::stem;

fn find(haystack: &[String], needle: &[String]) -> Option<usize> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return None;
    }
    (0..=haystack.len() - needle.len()).find(|&i| haystack[i..i + needle.len()] == *needle)
}

/// Phrase-table hits first; the gazetteer is consulted only when that level is empty.
pub fn detect_topics(segment: &Segment, res: &NluResources) -> Vec<TopicCandidate> {
    let tokens: Vec<String> = segment.tokens().iter().map(|t| t.to_string()).collect();
    let stems: Vec<String> = tokens.iter().map(|t| stem(t)).collect();
    let mut taken = vec![false; tokens.len()];
    let mut hits: Vec<(usize, TopicCandidate)> = Vec::new();
    for entry in &res.first_level {
        if !res.registered.contains(&entry.topic) {
            continue;
        }
        let Some(pos) = find(&stems, &entry.stems) else {
            continue;
        };
        let span = pos..pos + entry.stems.len();
        if taken[span.clone()].iter().any(|&t| t) {
            continue;
        }
        taken[span.clone()].iter_mut().for_each(|t| *t = true);
        hits.push((
            pos,
            TopicCandidate {
                topic: entry.topic.clone(),
                confidence: 1.0,
                source_level: SourceLevel::FirstLevelDb,
                trigger_phrase: tokens[span].join(" "),
            },
        ));
    }
    if hits.is_empty() {
        for (phrase, entry) in &res.gazetteer {
            let Some(topic) = &entry.topic else { continue };
            if res.suppressed_classes.contains(&entry.class)
                || !res.registered.contains(topic)
                || entry.confidence < res.threshold(&entry.class)
            {
                continue;
            }
            if let Some(pos) = find(&tokens, phrase) {
                hits.push((
                    pos,
                    TopicCandidate {
                        topic: topic.clone(),
                        confidence: entry.confidence.clamp(0.0, 1.0),
                        source_level: SourceLevel::SecondLevelDetector,
                        trigger_phrase: phrase.join(" "),
                    },
                ));
            }
        }
    }
    hits.sort_by_key(|(pos, _)| *pos);
    let mut out: Vec<TopicCandidate> = Vec::new();
    for (_, c) in hits {
        if !out.iter().any(|o| o.topic == c.topic) {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::ModuleId;
    use crate::nlu::{GazetteerEntry, GazetteerFile};

    fn res() -> NluResources {
        let mut r = NluResources::default();
        for t in ["ANIMAL", "NEWS", "MUSIC", "FOOD", "MOVIE"] {
            r.register(ModuleId::new(t));
        }
        r.add_first_level(&ModuleId::ANIMAL(), &["dog", "cat"]);
        r.add_first_level(&ModuleId::NEWS(), &["corona virus", "news"]);
        r.add_first_level(&ModuleId::MUSIC(), &["piano"]);
        r.add_first_level(&ModuleId::FOOD(), &["cooking"]);
        r.add_first_level(&ModuleId::new("UNREGISTERED"), &["rocket"]);
        r.add_gazetteer(GazetteerFile {
            thresholds: Default::default(),
            entries: vec![
                GazetteerEntry {
                    phrase: "frozen".into(),
                    class: "movie_title".into(),
                    topic: Some(ModuleId::MOVIE()),
                    confidence: 0.95,
                },
                GazetteerEntry {
                    phrase: "taylor swift".into(),
                    class: "musician".into(),
                    topic: Some(ModuleId::MUSIC()),
                    confidence: 0.9,
                },
                GazetteerEntry {
                    phrase: "whiskers".into(),
                    class: "pet_name".into(),
                    topic: Some(ModuleId::ANIMAL()),
                    confidence: 0.4,
                },
            ],
        });
        r
    }

    fn topics(s: &str) -> Vec<(String, f64, SourceLevel)> {
        detect_topics(&Segment::new(s, 0), &res())
            .into_iter()
            .map(|c| (c.topic.to_string(), c.confidence, c.source_level))
            .collect()
    }

    #[test]
    fn first_level_hits() {
        assert_eq!(topics("i like playing fetch with my dog"), [("ANIMAL".into(), 1.0, SourceLevel::FirstLevelDb)]);
        assert_eq!(topics("corona virus"), [("NEWS".into(), 1.0, SourceLevel::FirstLevelDb)]);
        let multi: Vec<String> = topics("i like playing piano and cooking").into_iter().map(|t| t.0).collect();
        assert_eq!(multi, ["MUSIC", "FOOD"]);
        assert_eq!(topics("my dogs"), [("ANIMAL".into(), 1.0, SourceLevel::FirstLevelDb)]);
    }

    #[test]
    fn second_level_rules() {
        assert!(topics("i watched frozen").is_empty());
        assert_eq!(topics("i love taylor swift"), [("MUSIC".into(), 0.9, SourceLevel::SecondLevelDetector)]);
        assert!(topics("whiskers is sweet").is_empty());
        // first level preempts the gazetteer
        assert_eq!(topics("taylor swift plays piano").len(), 1);
        assert!(topics("a rocket").is_empty());
    }
}
