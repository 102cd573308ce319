use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;

use super::correction::asr_correct_with;
use super::gates::{check_asr_gate, AsrGate, ProfanityFilter};
use super::session::SessionState;
use super::PipelineConfig;
use crate::adaptation::{
    next_open_question_category, record_open_answer, select_next_topic, transition_strategy, update_dominance,
    TransitionStrategy,
};
use crate::analytics::{Gate, ProposalEvent};
use crate::content::{Content, VocabEntry};
use crate::dialog::{
    classify_intents, error_fallback, select_module, ErrorScope, Intent, IntentClass, IntentContext, PreviousTurn,
    SelectionReason, SelectorContext, SelectorDecision,
};
use crate::error::FlowError;
use crate::fsm::{acknowledge_turn, entry_point_name, run_turn, HandlerRegistry, Tracker, ENTRY_OTHER};
use crate::module::{EntryMethod, ModuleId, ModuleState};
use crate::nlu::{annotate, Annotation, DialogAct, FineGrainIntent, SourceLevel};
use crate::text::normalize;
use crate::topics::answer_question;

pub const SYSTEM_FALLBACK_TEXT: &str =
    "My bad, I lost my train of thought. Do you want to try again, or would you rather talk about something else?";

/// Consecutive clarification repeats before the request is ignored.
pub const MAX_CLARIFY_REPEATS: u32 = 2;

const EXIT_PHRASES: &[&str] = &[
    "stop",
    "bye",
    "goodbye",
    "good bye",
    "bye bye",
    "exit",
    "quit",
    "stop talking",
    "i have to go",
    "i need to go",
    "i want to stop",
    "end the conversation",
];

pub fn is_exit(normalized: &str) -> bool {
    EXIT_PHRASES.contains(&normalized)
}

pub(super) struct Outcome {
    pub text: String,
    pub module: ModuleId,
    pub entry: EntryMethod,
    pub reason: Option<SelectionReason>,
    pub gate: Option<Gate>,
    pub fsm_path: Vec<String>,
    pub end_session: bool,
    /// Whether a clarification request may repeat this response.
    pub substantive: bool,
}

impl Outcome {
    fn new(text: String, module: ModuleId, reason: Option<SelectionReason>) -> Self {
        Self {
            text,
            module,
            entry: EntryMethod::Other,
            reason,
            gate: None,
            fsm_path: Vec::new(),
            end_session: false,
            substantive: true,
        }
    }
}

fn join(parts: impl IntoIterator<Item = Option<String>>) -> String {
    parts
        .into_iter()
        .flatten()
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Mutable view of one turn in progress.
pub(super) struct Work<'a> {
    pub content: &'a Content,
    pub registry: &'a HandlerRegistry,
    pub session: &'a mut SessionState,
    pub rng: &'a mut ChaCha8Rng,
    pub chain_cap: usize,
    pub template_keys: Vec<String>,
    pub intents: Vec<Intent>,
    pub nlu: Vec<Annotation>,
    pub corrected: Option<String>,
    pub proposal_event: Option<ProposalEvent>,
    pub error: Option<String>,
    pub module_state: Option<ModuleState>,
}

impl<'a> Work<'a> {
    pub fn new(
        content: &'a Content,
        registry: &'a HandlerRegistry,
        session: &'a mut SessionState,
        rng: &'a mut ChaCha8Rng,
        chain_cap: usize,
    ) -> Self {
        Self {
            content,
            registry,
            session,
            rng,
            chain_cap,
            template_keys: Vec::new(),
            intents: Vec::new(),
            nlu: Vec::new(),
            corrected: None,
            proposal_event: None,
            error: None,
            module_state: None,
        }
    }

    pub fn run(&mut self, utterance: &str, confidence: f64, pipeline: &PipelineConfig, profanity: &ProfanityFilter) -> Outcome {
        match self.run_inner(utterance, confidence, pipeline, profanity) {
            Ok(o) if !o.text.trim().is_empty() => o,
            Ok(o) => self.system_fallback("empty response".into(), o.fsm_path, Some(o.module)),
            Err(e) => self.system_fallback(e.to_string(), Vec::new(), None),
        }
    }

    fn render(&mut self, key: &str, slots: &[(&str, &str)]) -> Result<String, FlowError> {
        let slots: BTreeMap<String, String> = slots.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let text = self.content.templates.render(key, &slots, &mut self.session.bags, &mut *self.rng)?;
        self.template_keys.push(key.to_string());
        Ok(text)
    }

    fn tracker<'s>(
        &'s mut self,
        module: ModuleId,
        utterance: &'s str,
        entry: Option<EntryMethod>,
        keywords: Option<String>,
    ) -> Tracker<'s> {
        let s = &mut *self.session;
        Tracker {
            module,
            utterance,
            nlu: &self.nlu,
            profile: &s.profile,
            content: self.content,
            previous_bot_text: &s.last_bot_text,
            entry,
            keywords,
            turn_scope: BTreeMap::new(),
            conversation_scope: &mut s.conversation_scope,
            attrs: &mut s.attrs,
            bags: &mut s.bags,
            rng: &mut *self.rng,
            updates: Default::default(),
            module_state: ModuleState::Continue,
            template_keys: Vec::new(),
        }
    }

    fn system_fallback(&mut self, error: String, fsm_path: Vec<String>, module: Option<ModuleId>) -> Outcome {
        tracing::warn!(conversation = %self.session.conversation_id, %error, "turn fell back to system error response");
        self.error = Some(error);
        let fb = error_fallback(FineGrainIntent::None, ErrorScope::System);
        let text = self.render(&fb.template_key, &[]).unwrap_or_else(|_| SYSTEM_FALLBACK_TEXT.to_string());
        if let Some(m) = &module {
            self.session.flow_states.remove(m);
            self.session.previous = Some(PreviousTurn { module: m.clone(), state: ModuleState::Stop });
        }
        let mut o = Outcome::new(text, module.unwrap_or_else(ModuleId::FUNCTIONAL), Some(SelectionReason::ErrorFallback));
        o.fsm_path = fsm_path;
        o
    }

    fn gate(&mut self, gate: Gate, key: &str, slots: &[(&str, &str)]) -> Result<Outcome, FlowError> {
        let text = self.render(key, slots)?;
        let mut o = Outcome::new(text, ModuleId::FUNCTIONAL(), None);
        o.gate = Some(gate);
        o.substantive = false;
        o.end_session = gate == Gate::Exit;
        Ok(o)
    }

    fn run_inner(
        &mut self,
        utterance: &str,
        confidence: f64,
        pipeline: &PipelineConfig,
        profanity: &ProfanityFilter,
    ) -> Result<Outcome, FlowError> {
        let norm = normalize(utterance);
        if check_asr_gate(confidence, pipeline.asr_confidence_threshold) == AsrGate::Clarify {
            return self.gate(Gate::LowAsr, "low_asr_clarify", &[]);
        }
        if self.session.greeted {
            if norm.is_empty() {
                return self.gate(Gate::Silence, "silence_reprompt", &[]);
            }
            if is_exit(&norm) {
                return self.gate(Gate::Exit, "goodbye", &[]);
            }
        }
        if profanity.scan(utterance).is_flagged() {
            return self.profanity_redirect();
        }

        let corrected = if pipeline.correction_enabled { self.correct(&norm) } else { norm.clone() };
        if corrected != norm {
            self.corrected = Some(corrected.clone());
        }
        self.nlu = annotate(&corrected, &self.content.nlu);
        let acts: Vec<DialogAct> = self.nlu.iter().map(|a| a.dialog_act).collect();
        update_dominance(&mut self.session.profile, &acts);

        if !self.session.greeted && self.content.flows.contains_key(&ModuleId::GREETING()) {
            self.session.greeted = true;
            let d = SelectorDecision {
                selected_module: ModuleId::GREETING(),
                reason: SelectionReason::StrongIntent,
                keywords: None,
                rejected: None,
                exclude: None,
            };
            let mut o = self.topic_turn(&d, false, &corrected)?;
            o.reason = None;
            return Ok(o);
        }
        self.session.greeted = true;

        let previous = self.session.previous.clone();
        let ctx = IntentContext {
            proposed: self.session.attrs.propose_topic.clone(),
            current: previous.as_ref().map(|p| p.module.clone()),
        };
        let mut intents = classify_intents(&self.nlu, &ctx);
        if intents.contains(&Intent::Clarification)
            && (self.session.clarify_repeats >= MAX_CLARIFY_REPEATS || self.session.last_substantive.is_none())
        {
            intents.retain(|i| *i != Intent::Clarification);
        }
        self.intents = intents.clone();

        let functional = intents.iter().any(|i| i.class() == IntentClass::Functional);
        let mut open_answer = false;
        if self.session.attrs.pending_open_question && !functional {
            self.session.attrs.pending_open_question = false;
            open_answer = true;
            let candidates = self.mentioned_topics();
            record_open_answer(&candidates, &mut self.session.profile);
        }

        let profile = &self.session.profile;
        let table = &self.content.topic_order;
        let mut ranking = profile.preferred_topics.clone();
        ranking.extend(table.for_gender(profile.predicted_gender).iter().cloned());
        ranking.extend(table.unknown.iter().cloned());
        let decision = select_module(
            &intents,
            previous.as_ref(),
            &self.session.attrs,
            &SelectorContext { registered: &self.content.registered, ranking: &ranking },
        );

        if decision.reason != SelectionReason::Functional {
            if let Some(t) = self.session.attrs.propose_topic.take() {
                let accepted = decision.selected_module == t;
                self.proposal_event = Some(ProposalEvent { topic: t, accepted });
                self.session.attrs.propose_keywords = None;
            }
        }

        let m = decision.selected_module.clone();
        if m == ModuleId::FUNCTIONAL() {
            self.functional()
        } else if m == ModuleId::TRANSITION() {
            self.transition_turn(&decision, open_answer, &corrected)
        } else if self.content.flows.contains_key(&m) {
            self.topic_turn(&decision, open_answer, &corrected)
        } else {
            Err(FlowError::Handler { state: m.to_string(), message: "module has no flow".into() })
        }
    }

    fn correct(&self, norm: &str) -> String {
        let mut modules: Vec<&ModuleId> = Vec::new();
        if let Some(p) = &self.session.previous {
            modules.push(&p.module);
        }
        if let Some(t) = &self.session.attrs.propose_topic {
            modules.push(t);
        }
        let vocab: Vec<&VocabEntry> =
            modules.iter().filter_map(|m| self.content.vocabulary.get(*m)).flatten().collect();
        let nlu = &self.content.nlu;
        asr_correct_with(norm, &self.content.corrections, &vocab, &|t| nlu.is_stopword(t))
    }

    fn proposable(&self, m: &ModuleId) -> bool {
        self.content.flows.contains_key(m)
            && self.content.topic_order.unknown.contains(m)
            && self.content.templates.contains(&format!("propose_{}", m.slug()))
    }

    /// Proposable topics mentioned this turn, in utterance order, with their trigger phrase.
    fn mentioned(&self) -> Vec<(ModuleId, String)> {
        let mut out: Vec<(ModuleId, String)> = Vec::new();
        for a in &self.nlu {
            let mut cands: Vec<_> = a.topic_candidates.iter().collect();
            cands.sort_by_key(|c| a.segment.text.find(&c.trigger_phrase).unwrap_or(usize::MAX));
            for c in cands {
                if self.proposable(&c.topic) && !out.iter().any(|(t, _)| *t == c.topic) {
                    out.push((c.topic.clone(), c.trigger_phrase.clone()));
                }
            }
        }
        out
    }

    fn mentioned_topics(&self) -> Vec<ModuleId> {
        self.mentioned().into_iter().map(|(t, _)| t).collect()
    }

    /// Next topic from the rotation, skipping `exclude` and anything without a flow.
    fn next_topic(&mut self, exclude: Option<&ModuleId>) -> Option<ModuleId> {
        let table = &self.content.topic_order;
        let limit = 2 * table.unknown.len() + 2;
        for _ in 0..limit {
            let next = select_next_topic(&mut self.session.profile, table);
            self.session.profile.mark_used(&next.topic);
            if Some(&next.topic) != exclude && self.proposable(&next.topic) {
                return Some(next.topic);
            }
        }
        None
    }

    fn propose(&mut self, exclude: Option<&ModuleId>) -> Result<String, FlowError> {
        let Some(topic) = self.next_topic(exclude) else {
            return self.render("question_fallback", &[]);
        };
        let text = self.render(&format!("propose_{}", topic.slug()), &[])?;
        self.session.attrs.propose_topic = Some(topic);
        self.session.attrs.propose_keywords = None;
        Ok(text)
    }

    /// Open question or direct proposal, per the user's conversational style.
    fn transition_body(&mut self, exclude: Option<&ModuleId>, force_direct: bool) -> Result<String, FlowError> {
        let strategy = if force_direct {
            TransitionStrategy::DirectProposal
        } else {
            transition_strategy(&self.session.profile, self.content.settings.dominance_threshold)
        };
        match strategy {
            TransitionStrategy::OpenQuestion => {
                let category = next_open_question_category(&self.session.profile);
                let text = self.render(category.template_key(), &[])?;
                self.session.profile.mark_asked(category);
                self.session.attrs.pending_open_question = true;
                Ok(text)
            }
            TransitionStrategy::DirectProposal => self.propose(exclude),
        }
    }

    fn unclear_previous(&mut self) {
        if let Some(p) = self.session.previous.as_mut() {
            if p.state == ModuleState::Continue {
                p.state = ModuleState::Unclear;
            }
        }
    }

    fn profanity_redirect(&mut self) -> Result<Outcome, FlowError> {
        let current = self.session.previous.as_ref().map(|p| p.module.clone());
        let Some(topic) = self.next_topic(current.as_ref()) else {
            return self.gate(Gate::Profanity, "low_asr_clarify", &[]);
        };
        let name = topic.display_name();
        let o = self.gate(Gate::Profanity, "profanity_redirect", &[("topic", &name)])?;
        self.session.attrs.propose_topic = Some(topic);
        self.session.attrs.propose_keywords = None;
        self.unclear_previous();
        Ok(o)
    }

    fn functional(&mut self) -> Result<Outcome, FlowError> {
        let reason = Some(SelectionReason::Functional);
        if self.intents.contains(&Intent::Clarification) {
            self.session.clarify_repeats += 1;
            let prefix = self.render("clarify_prefix", &[])?;
            let last = self.session.last_substantive.clone().unwrap_or_default();
            let mut o = Outcome::new(join([Some(prefix), Some(last)]), ModuleId::FUNCTIONAL(), reason);
            o.substantive = false;
            return Ok(o);
        }
        if self.intents.iter().any(|i| matches!(i, Intent::DeviceRequest { .. })) {
            let exit = self.render("device_exit", &[])?;
            let current = self.session.previous.as_ref().map(|p| p.module.clone());
            let offer = self.mentioned().into_iter().find(|(t, _)| Some(t) != current.as_ref());
            let text = match offer {
                Some((topic, keywords)) => {
                    let offer = self.render("device_topic_offer", &[("keywords", &keywords)])?;
                    self.session.attrs.propose_topic = Some(topic);
                    self.session.attrs.propose_keywords = Some(keywords);
                    self.unclear_previous();
                    join([Some(exit), Some(offer)])
                }
                None => exit,
            };
            return Ok(Outcome::new(text, ModuleId::FUNCTIONAL(), reason));
        }
        let hesitant = self.nlu.iter().any(|a| a.fine_grain == FineGrainIntent::Hesitant);
        let key = if hesitant { "hesitant_reprompt" } else { "incomplete_reprompt" };
        let text = self.render(key, &[])?;
        Ok(Outcome::new(text, ModuleId::FUNCTIONAL(), reason))
    }

    fn ack(&mut self, utterance: &str) -> Result<Option<String>, FlowError> {
        let mut t = self.tracker(ModuleId::TRANSITION(), utterance, None, None);
        let ack = acknowledge_turn(&mut t);
        let keys = std::mem::take(&mut t.template_keys);
        drop(t);
        self.template_keys.extend(keys);
        ack
    }

    /// Answer to a question the user asked outside any topic flow.
    fn answer(&mut self, utterance: &str) -> Result<Option<String>, FlowError> {
        let Some(q) = self.nlu.iter().find(|a| a.dialog_act.is_question()).cloned() else {
            return Ok(None);
        };
        let mut t = self.tracker(ModuleId::TRANSITION(), utterance, None, None);
        let answer = answer_question(&q, &mut t);
        let keys = std::mem::take(&mut t.template_keys);
        drop(t);
        self.template_keys.extend(keys);
        answer.map(|a| Some(a.text))
    }

    fn transition_turn(&mut self, d: &SelectorDecision, open_answer: bool, utterance: &str) -> Result<Outcome, FlowError> {
        let answer = self.answer(utterance)?;
        let lead = if d.rejected.is_some() {
            Some(self.render("ack_rejection", &[])?)
        } else if self.intents.contains(&Intent::TopicSwitch) {
            Some(self.render("ack_topic_switch", &[])?)
        } else if answer.is_some() {
            None
        } else {
            self.ack(utterance)?
        };
        let lead = Some(join([lead, answer])).filter(|l| !l.is_empty());
        let body = self.transition_body(d.exclude.as_ref(), open_answer)?;
        self.session.previous = Some(PreviousTurn { module: ModuleId::TRANSITION(), state: ModuleState::Stop });
        Ok(Outcome::new(join([lead, Some(body)]), ModuleId::TRANSITION(), Some(d.reason)))
    }

    /// A first-level keyword for another topic while the current module has nothing to say about it.
    fn drift_target(&self, current: &ModuleId) -> Option<(ModuleId, String)> {
        let mentions_current = self.nlu.iter().flat_map(|a| &a.topic_candidates).any(|c| c.topic == *current);
        if mentions_current {
            return None;
        }
        self.nlu
            .iter()
            .filter(|a| !a.fine_grain.is_negative())
            .flat_map(|a| &a.topic_candidates)
            .find(|c| c.source_level == SourceLevel::FirstLevelDb && c.topic != *current && self.proposable(&c.topic))
            .map(|c| (c.topic.clone(), c.trigger_phrase.clone()))
    }

    fn topic_turn(&mut self, d: &SelectorDecision, open_answer: bool, utterance: &str) -> Result<Outcome, FlowError> {
        let m = d.selected_module.clone();
        let content = self.content;
        let flow = content.flows.get(&m).ok_or_else(|| FlowError::UnknownState(m.to_string()))?;
        let continuing = d.reason == SelectionReason::ContinuePrevious
            && self.session.previous.as_ref().is_some_and(|p| p.module == m && p.state != ModuleState::Stop)
            && self.session.flow_states.contains_key(&m);

        let (start, entry) = if continuing {
            (self.session.flow_states[&m].clone(), None)
        } else {
            let entry = match d.reason {
                SelectionReason::AcceptProposal => EntryMethod::TopicProposal,
                SelectionReason::TopicIntent | SelectionReason::StrongIntent if open_answer => EntryMethod::OpenQuestion,
                _ => EntryMethod::Other,
            };
            self.session.span_entry = entry;
            self.session.flow_states.remove(&m);
            if content.topic_order.unknown.contains(&m) {
                self.session.profile.mark_used(&m);
            }
            let name = entry_point_name(entry);
            let start = flow
                .entry(name)
                .or_else(|| flow.entry(ENTRY_OTHER))
                .ok_or_else(|| FlowError::UnknownEntry(name.to_string()))?;
            (start.to_string(), Some(entry))
        };

        if continuing && m != ModuleId::GREETING() && m != ModuleId::RETRIEVAL() {
            if let Some((topic, keywords)) = self.drift_target(&m) {
                let text = self.render("drift_confirm", &[("keywords", &keywords)])?;
                self.session.attrs.propose_topic = Some(topic);
                self.session.attrs.propose_keywords = Some(keywords);
                self.session.previous = Some(PreviousTurn { module: m.clone(), state: ModuleState::Unclear });
                self.module_state = Some(ModuleState::Unclear);
                let mut o = Outcome::new(text, m, Some(d.reason));
                o.entry = self.session.span_entry;
                o.fsm_path = vec![start];
                return Ok(o);
            }
        }

        let requested = self.intents.iter().any(|i| matches!(i, Intent::TopicRequest { .. }));
        let handles_questions = flow.states.get(&start).is_some_and(|s| s.handler == "call_question_handler");
        let question = self
            .nlu
            .iter()
            .find(|a| a.dialog_act.is_question())
            .filter(|_| !requested && !handles_questions && m != ModuleId::GREETING())
            .cloned();

        let keywords = if continuing { None } else { d.keywords.clone() };
        let chain_cap = self.chain_cap;
        let registry = self.registry;
        let mut tracker = self.tracker(m.clone(), utterance, entry, keywords);
        let pre = match &question {
            Some(q) => Some(answer_question(q, &mut tracker)?.text),
            None => None,
        };
        let result = run_turn(flow, &start, registry, &mut tracker, chain_cap);
        let fine_grain = tracker.fine_grain();
        let Tracker { updates, module_state, template_keys, .. } = tracker;
        self.template_keys.extend(template_keys);
        updates.apply(&mut self.session.profile);

        let run = match result {
            Ok(run) => run,
            Err(failure) => {
                self.error = Some(failure.error.to_string());
                self.session.flow_states.remove(&m);
                self.session.previous = Some(PreviousTurn { module: m.clone(), state: ModuleState::Stop });
                self.module_state = Some(ModuleState::Stop);
                let fb = error_fallback(fine_grain, ErrorScope::Module);
                let text = self.render(&fb.template_key, &[]).unwrap_or_else(|_| SYSTEM_FALLBACK_TEXT.to_string());
                let mut o = Outcome::new(text, m, Some(SelectionReason::ErrorFallback));
                o.entry = self.session.span_entry;
                o.fsm_path = failure.path;
                return Ok(o);
            }
        };

        let state = if run.next_state.is_none() { ModuleState::Stop } else { module_state };
        match &run.next_state {
            Some(s) => {
                self.session.flow_states.insert(m.clone(), s.clone());
            }
            None => {
                self.session.flow_states.remove(&m);
            }
        }
        self.module_state = Some(state);
        self.session.previous = Some(PreviousTurn { module: m.clone(), state });
        let mut text = join([pre, Some(run.text)]);
        if state == ModuleState::Stop {
            if let Some(t) = self.session.attrs.propose_topic.clone() {
                self.session.profile.mark_used(&t);
            } else if !self.session.attrs.pending_open_question {
                let body = self.transition_body(Some(&m), false)?;
                text = join([Some(text), Some(body)]);
            }
        }
        let mut o = Outcome::new(text, m, Some(d.reason));
        o.entry = self.session.span_entry;
        o.fsm_path = run.path;
        Ok(o)
    }
}
