mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use convokernel::analytics::{
    check_log, entry_distribution, parse_log, rating_per_turn, round_ratio_half_up, LogRecord,
};
use convokernel::dialog::{select_module, GlobalAttributes, Intent, PreviousTurn, SelectionReason, SelectorContext};
use convokernel::engine::{asr_correct, check_asr_gate, AsrGate};
use convokernel::module::{EntryMethod, ModuleId, ModuleState};
use convokernel::nlg::{ProsodyConfig, ShuffleBag};

const VOCAB: &[&str] = &["frozen two", "toy story", "the lion king", "minecraft", "seattle seahawks", "taylor swift"];
const WORDS: &[&str] = &[
    "i", "like", "frozen", "to", "too", "two", "toy", "story", "stories", "lion", "lying", "king", "mine", "craft",
    "minecraft", "seattle", "sea", "hawks", "taylor", "tailor", "swift", "watched", "the", "a", "movie",
];

fn utterance() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 0..10).prop_map(|w| w.join(" "))
}

const TOPICS: &[&str] = &["MOVIE", "MUSIC", "ANIMAL", "FOOD", "GAME", "NEWS"];

fn ids(list: &[&str]) -> Vec<ModuleId> {
    list.iter().map(|s| ModuleId::new(*s)).collect()
}

fn previous() -> impl Strategy<Value = Option<PreviousTurn>> {
    prop::option::of(
        (prop::sample::select(TOPICS), prop::sample::select(vec![ModuleState::Continue, ModuleState::Unclear, ModuleState::Stop]))
            .prop_map(|(m, state)| PreviousTurn { module: ModuleId::new(m), state }),
    )
}

fn moderate() -> impl Strategy<Value = Vec<Intent>> {
    prop::collection::vec(
        prop::collection::vec(prop::sample::select(TOPICS), 1..3).prop_map(|c| Intent::TopicIntent {
            keywords: c.iter().map(|s| s.to_lowercase()).collect(),
            candidates: ids(&c),
        }),
        0..3,
    )
}

/// Entry count by an independent rule: a new span starts whenever the
/// topic differs from the last non-functional module.
fn spans(modules: &[&str]) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    let mut last: Option<&str> = None;
    for m in modules.iter().copied().filter(|m| *m != "FUNCTIONAL") {
        if last != Some(m) && m != "TRANSITION" {
            *out.entry(m.to_string()).or_default() += 1;
        }
        last = Some(m);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn asr_correction_is_idempotent(u in utterance()) {
        let once = asr_correct(&u, VOCAB);
        prop_assert_eq!(asr_correct(&once, VOCAB), once.clone());
    }

    #[test]
    fn asr_gate_threshold(c in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        prop_assert_eq!(check_asr_gate(c, t) == AsrGate::Clarify, c < t);
    }

    #[test]
    fn shuffle_bag_cycles_are_permutations(n in 1usize..12, cycles in 1usize..20, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bag = ShuffleBag::new();
        let mut last = None;
        for _ in 0..cycles {
            let mut seen = BTreeSet::new();
            for _ in 0..n {
                let i = bag.draw(n, &mut rng);
                prop_assert!(i < n);
                prop_assert!(seen.insert(i));
                if n > 1 {
                    prop_assert_ne!(Some(i), last);
                }
                last = Some(i);
            }
        }
    }

    #[test]
    fn topic_rotation_never_repeats_before_exhaustion(seed in any::<u64>()) {
        let content = common::bundled_content();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = common::rotation_episode(&content.topic_order, &mut rng);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn ssml_is_well_formed_and_lossless(s in "\\PC{0,80}", seed in any::<u64>(), p in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let config = ProsodyConfig { filler_probability: p, ..ProsodyConfig::default() };
        let r = common::ssml_roundtrip(&s, &config, &[], &mut rng);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn functional_intents_always_route_functional(prev in previous(), rest in moderate()) {
        let registered: BTreeSet<ModuleId> = ids(TOPICS).into_iter().collect();
        let ranking = ids(TOPICS);
        let ctx = SelectorContext { registered: &registered, ranking: &ranking };
        let mut intents = rest;
        intents.push(Intent::Clarification);
        let d = select_module(&intents, prev.as_ref(), &GlobalAttributes::default(), &ctx);
        prop_assert_eq!(d.reason, SelectionReason::Functional);
    }

    #[test]
    fn strong_requests_dominate(prev in previous(), rest in moderate(), topic in prop::sample::select(TOPICS)) {
        let registered: BTreeSet<ModuleId> = ids(TOPICS).into_iter().collect();
        let ranking = ids(TOPICS);
        let ctx = SelectorContext { registered: &registered, ranking: &ranking };
        let mut intents = rest;
        intents.push(Intent::TopicRequest { topic: ModuleId::new(topic), keywords: topic.to_lowercase() });
        let d = select_module(&intents, prev.as_ref(), &GlobalAttributes::default(), &ctx);
        prop_assert_eq!(d.selected_module.as_str(), topic);
        prop_assert_eq!(d.reason, SelectionReason::StrongIntent);
    }

    #[test]
    fn continue_keeps_the_floor(module in prop::sample::select(TOPICS), rest in moderate()) {
        let registered: BTreeSet<ModuleId> = ids(TOPICS).into_iter().collect();
        let ranking = ids(TOPICS);
        let ctx = SelectorContext { registered: &registered, ranking: &ranking };
        let prev = PreviousTurn { module: ModuleId::new(module), state: ModuleState::Continue };
        let d = select_module(&rest, Some(&prev), &GlobalAttributes::default(), &ctx);
        prop_assert_eq!(d.selected_module.as_str(), module);
        prop_assert_eq!(d.reason, SelectionReason::ContinuePrevious);
    }

    #[test]
    fn ratings_match_brute_force(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus = common::random_corpus(&mut rng, n);
        let fast = rating_per_turn(&corpus);
        let slow = common::brute_force_ratings(&corpus);
        let lines = corpus.iter().filter(|r| matches!(r, LogRecord::Turn(_))).count() as u64;
        prop_assert_eq!(fast.values().map(|s| s.total_turns).sum::<u64>(), lines);
        for (m, (total, avg_turns, avg)) in slow {
            let f = &fast[&ModuleId::new(&m)];
            prop_assert_eq!(f.total_turns, total);
            prop_assert!((f.avg_turns_per_conversation - avg_turns).abs() < 1e-9);
            match (f.avg_rating, avg) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9),
                (a, b) => prop_assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn reentry_counts_as_new_entry(modules in prop::collection::vec(
        prop::sample::select(vec!["MOVIE", "MUSIC", "FOOD", "FUNCTIONAL", "TRANSITION"]), 1..40)) {
        let logs: Vec<LogRecord> = modules
            .iter()
            .enumerate()
            .map(|(i, m)| LogRecord::Turn(common::turn_record("c", i as u64, m)))
            .collect();
        let dist = entry_distribution(&logs);
        let got: BTreeMap<String, u64> = dist
            .iter()
            .map(|(m, counts)| (m.to_string(), counts.get(&EntryMethod::Other).copied().unwrap_or(0)))
            .collect();
        prop_assert_eq!(got, spans(&modules));
    }

    #[test]
    fn log_lines_round_trip(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus = common::random_corpus(&mut rng, n);
        let text: String = corpus.iter().map(|r| r.to_line().unwrap() + "\n").collect();
        let parsed = parse_log(&text).unwrap();
        prop_assert_eq!(&parsed, &corpus);
        prop_assert!(check_log(&parsed).is_ok());
    }

    #[test]
    fn ratio_rounding_matches_decimal(num in 0u64..100_000, den in 1u64..100_000) {
        let got = round_ratio_half_up(num, den, 2).unwrap();
        let scaled = num as u128 * 1000 / den as u128;
        let expect = (scaled / 10 + u128::from(scaled % 10 >= 5)) as f64 / 100.0;
        prop_assert_eq!(format!("{got:.2}"), format!("{expect:.2}"));
    }
}
