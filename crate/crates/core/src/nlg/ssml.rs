use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::text::capitalize_first;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProsodyConfig {
    pub pause_ms_sentence: u32,
    pub filler_probability: f64,
    /// Template-key pattern (exact, or prefix ending in `*`) to SSML rate.
    #[serde(default)]
    pub rate_overrides: Vec<(String, String)>,
    pub fillers: Vec<String>,
}

impl Default for ProsodyConfig {
    fn default() -> Self {
        Self {
            pause_ms_sentence: 300,
            filler_probability: 0.1,
            rate_overrides: Vec::new(),
            fillers: vec!["hmm,".into(), "well,".into(), "so,".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SsmlOutput {
    pub ssml: String,
    /// Exact prefix inserted ahead of the text, if any.
    pub filler: Option<String>,
}

impl SsmlOutput {
    pub fn text(&self) -> String {
        strip_markup(&self.ssml)
    }
}

fn pattern_matches(pattern: &str, key: &str) -> bool {
    match pattern.strip_suffix('*') {
        Some(prefix) => key.starts_with(prefix),
        None => pattern == key,
    }
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Escapes `text` and inserts a break after each sentence-final punctuation
/// run that is followed by whitespace and more text.
fn with_breaks(text: &str, pause_ms: u32) -> String {
    let chars: Vec<char> = text.chars().collect();
    let brk = format!("<break time=\"{pause_ms}ms\"/>");
    let mut out = String::with_capacity(text.len() + 16);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        out.push_str(&escape(c.encode_utf8(&mut [0; 4])));
        let at_run_end = matches!(c, '.' | '!' | '?')
            && chars.get(i + 1).is_some_and(|n| n.is_whitespace());
        if at_run_end && chars[i + 1..].iter().any(|n| !n.is_whitespace()) {
            out.push_str(&brk);
        }
        i += 1;
    }
    out
}

pub fn ssml_postprocess<R: Rng + ?Sized>(
    text: &str,
    config: &ProsodyConfig,
    template_keys: &[String],
    rng: &mut R,
) -> SsmlOutput {
    let roll = rng.random::<f64>();
    let filler = if !text.trim().is_empty()
        && !config.fillers.is_empty()
        && roll < config.filler_probability
    {
        let word = &config.fillers[rng.random_range(0..config.fillers.len())];
        Some(format!("{} ", capitalize_first(word)))
    } else {
        None
    };
    let body = match &filler {
        Some(f) => with_breaks(&format!("{f}{text}"), config.pause_ms_sentence),
        None => with_breaks(text, config.pause_ms_sentence),
    };
    let rate = config.rate_overrides.iter().find_map(|(pattern, rate)| {
        template_keys
            .iter()
            .any(|k| pattern_matches(pattern, k))
            .then_some(rate)
    });
    let ssml = match rate {
        Some(rate) => format!("<speak><prosody rate=\"{}\">{body}</prosody></speak>", escape(rate)),
        None => format!("<speak>{body}</speak>"),
    };
    SsmlOutput { ssml, filler }
}

/// Removes all tags and decodes the five predefined entities.
pub fn strip_markup(ssml: &str) -> String {
    let mut out = String::with_capacity(ssml.len());
    let mut rest = ssml;
    while let Some(pos) = rest.find(['<', '&']) {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        if rest.starts_with('<') {
            match rest.find('>') {
                Some(end) => rest = &rest[end + 1..],
                None => {
                    rest = "";
                }
            }
            continue;
        }
        let entity = [
            ("&amp;", '&'),
            ("&lt;", '<'),
            ("&gt;", '>'),
            ("&quot;", '"'),
            ("&apos;", '\''),
        ]
        .into_iter()
        .find(|(e, _)| rest.starts_with(e));
        match entity {
            Some((e, c)) => {
                out.push(c);
                rest = &rest[e.len()..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quiet() -> ProsodyConfig {
        ProsodyConfig {
            filler_probability: 0.0,
            ..ProsodyConfig::default()
        }
    }

    #[test]
    fn one_break_between_two_sentences() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = ssml_postprocess("Hello. Bye.", &quiet(), &[], &mut rng);
        assert_eq!(out.ssml, "<speak>Hello.<break time=\"300ms\"/> Bye.</speak>");
        assert_eq!(out.text(), "Hello. Bye.");
    }

    #[test]
    fn escapes_reserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = ssml_postprocess("Tom & Jerry <3", &quiet(), &[], &mut rng);
        assert_eq!(out.ssml, "<speak>Tom &amp; Jerry &lt;3</speak>");
        assert_eq!(out.text(), "Tom & Jerry <3");
    }

    #[test]
    fn zero_probability_never_fills() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            assert!(ssml_postprocess("Hi there.", &quiet(), &[], &mut rng).filler.is_none());
        }
    }

    #[test]
    fn certain_filler_is_prefix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = ProsodyConfig {
            filler_probability: 1.0,
            ..ProsodyConfig::default()
        };
        let out = ssml_postprocess("I like cats.", &cfg, &[], &mut rng);
        let filler = out.filler.clone().unwrap();
        assert!(["Hmm, ", "Well, ", "So, "].contains(&filler.as_str()));
        assert_eq!(out.text(), format!("{filler}I like cats."));
    }

    #[test]
    fn rate_override_wraps_body() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cfg = ProsodyConfig {
            rate_overrides: vec![("news_chunk*".into(), "95%".into())],
            ..quiet()
        };
        let out = ssml_postprocess("Breaking.", &cfg, &["news_chunk_intro".into()], &mut rng);
        assert_eq!(out.ssml, "<speak><prosody rate=\"95%\">Breaking.</prosody></speak>");
    }
}
