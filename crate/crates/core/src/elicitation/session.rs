use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use super::{
    Instrument, ParticipantProfile, Phase, Prompt, Response, SessionCondition, SessionError, SessionEvent,
    TranscriptEntry,
};
use crate::domain::{
    chain_gambles, non_adjacent_triples, ordering_violations, Basis, Bound, Context, GambleSpec,
    IndifferenceBracket, LifeState, ProbabilityLadder, VignetteRatings,
};

pub const GAMBLES_PER_BLOCK: usize = 4;
pub const TOTAL_GAMBLES: usize = 3 * GAMBLES_PER_BLOCK;

/// The gamble currently on screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActiveGamble {
    pub gamble: GambleSpec,
    pub ladder_index: usize,
    pub consecutive_cant_choose: u8,
    /// Response given at the previous rung of this same gamble.
    pub previous_response: Option<Response>,
}

impl ActiveGamble {
    fn fresh(gamble: GambleSpec) -> Self {
        Self {
            gamble,
            ladder_index: 0,
            consecutive_cant_choose: 0,
            previous_response: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GambleRecord {
    pub gamble: GambleSpec,
    pub bracket: IndifferenceBracket,
}

/// Position in the survey; always the replay of the applied events.
#[derive(Debug, Clone, PartialEq)]
struct Progress {
    phase: Phase,
    ratings: VignetteRatings,
    own_ls: Option<u8>,
    rating_hold: bool,
    order_violation: bool,
    order_violation_explained: bool,
    cursor: usize,
    active: Option<ActiveGamble>,
    brackets: Vec<Option<IndifferenceBracket>>,
}

impl Progress {
    fn initial() -> Self {
        Self {
            phase: Phase::Profile,
            ratings: VignetteRatings::default(),
            own_ls: None,
            rating_hold: false,
            order_violation: false,
            order_violation_explained: false,
            cursor: 0,
            active: None,
            brackets: vec![None; TOTAL_GAMBLES],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionState {
    id: Uuid,
    seed: u64,
    condition: SessionCondition,
    profile: ParticipantProfile,
    gamble_queue: Vec<GambleSpec>,
    progress: Progress,
    applied: Vec<SessionEvent>,
    transcript: Vec<TranscriptEntry>,
}

/// Starts a session. The identifier, the condition (unless overridden) and
/// the within-block gamble order are all drawn from `seed`.
pub fn create_session(
    profile: ParticipantProfile,
    seed: u64,
    condition_override: Option<SessionCondition>,
) -> Result<SessionState, SessionError> {
    profile.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut id_bytes = [0u8; 16];
    rng.fill_bytes(&mut id_bytes);
    let id = uuid::Builder::from_random_bytes(id_bytes).into_uuid();
    let drawn = if rng.gen_bool(0.5) {
        SessionCondition::GamblesFirst
    } else {
        SessionCondition::LifeSatisfactionFirst
    };
    let condition = condition_override.unwrap_or(drawn);
    let basis = match condition {
        SessionCondition::GamblesFirst => Basis::Letters,
        SessionCondition::LifeSatisfactionFirst => Basis::LifeSatisfactionScores,
    };

    let mut personal = chain_gambles(Context::Personal, basis).to_vec();
    personal.shuffle(&mut rng);
    let mut societal = chain_gambles(Context::Societal, basis).to_vec();
    societal.shuffle(&mut rng);
    // Block 1 holds only adjacent triples, so the non-adjacent pool never
    // repeats one of them.
    let mut extra = non_adjacent_triples(basis);
    extra.shuffle(&mut rng);
    extra.truncate(GAMBLES_PER_BLOCK);

    let gamble_queue = personal.into_iter().chain(societal).chain(extra).collect();
    Ok(SessionState {
        id,
        seed,
        condition,
        profile,
        gamble_queue,
        progress: Progress::initial(),
        applied: Vec::new(),
        transcript: Vec::new(),
    })
}

fn phase_order(condition: SessionCondition) -> [Phase; 4] {
    match condition {
        SessionCondition::GamblesFirst => [Phase::Block1, Phase::Block2, Phase::Block3, Phase::Vignettes],
        SessionCondition::LifeSatisfactionFirst => {
            [Phase::Vignettes, Phase::Block1, Phase::Block2, Phase::Block3]
        }
    }
}

fn block_start(phase: Phase) -> Option<usize> {
    match phase {
        Phase::Block1 => Some(0),
        Phase::Block2 => Some(GAMBLES_PER_BLOCK),
        Phase::Block3 => Some(2 * GAMBLES_PER_BLOCK),
        _ => None,
    }
}

impl SessionState {
    pub fn id(&self) -> Uuid {
        self.id
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn condition(&self) -> SessionCondition {
        self.condition
    }

    pub fn profile(&self) -> &ParticipantProfile {
        &self.profile
    }

    pub fn phase(&self) -> Phase {
        self.progress.phase
    }

    pub fn is_done(&self) -> bool {
        self.progress.phase == Phase::Done
    }

    pub fn ratings(&self) -> &VignetteRatings {
        &self.progress.ratings
    }

    pub fn own_ls(&self) -> Option<u8> {
        self.progress.own_ls
    }

    pub fn gamble_queue(&self) -> &[GambleSpec] {
        &self.gamble_queue
    }

    pub fn active(&self) -> Option<&ActiveGamble> {
        self.progress.active.as_ref()
    }

    pub fn awaiting_explanation(&self) -> bool {
        self.progress.rating_hold
    }

    pub fn order_violation(&self) -> bool {
        self.progress.order_violation
    }

    pub fn order_violation_explained(&self) -> bool {
        self.progress.order_violation_explained
    }

    /// Events currently in effect, after any reverts.
    pub fn applied_events(&self) -> &[SessionEvent] {
        &self.applied
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    /// Number of go-back requests in the transcript.
    pub fn revisions(&self) -> usize {
        self.transcript
            .iter()
            .filter(|e| matches!(e.event, SessionEvent::Back))
            .count()
    }

    /// Completed gambles in queue order.
    pub fn brackets(&self) -> Vec<GambleRecord> {
        self.gamble_queue
            .iter()
            .zip(&self.progress.brackets)
            .filter_map(|(g, b)| b.map(|bracket| GambleRecord { gamble: *g, bracket }))
            .collect()
    }

    pub fn bracket_for(&self, gamble: &GambleSpec) -> Option<IndifferenceBracket> {
        self.gamble_queue
            .iter()
            .position(|g| g == gamble)
            .and_then(|i| self.progress.brackets[i])
    }

    /// True when both states agree on everything except the transcript.
    pub fn same_position(&self, other: &SessionState) -> bool {
        self.id == other.id
            && self.seed == other.seed
            && self.condition == other.condition
            && self.profile == other.profile
            && self.gamble_queue == other.gamble_queue
            && self.progress == other.progress
            && self.applied == other.applied
    }

    /// The prompt the respondent should see now, using the default instrument.
    pub fn next_prompt(&self) -> Result<Prompt, SessionError> {
        self.next_prompt_with(&Instrument::default())
    }

    pub fn next_prompt_with(&self, instrument: &Instrument) -> Result<Prompt, SessionError> {
        let mut view = self.progress.clone();
        if view.phase == Phase::Profile {
            enter_phase(&mut view, &self.gamble_queue, phase_order(self.condition)[0]);
        }
        match view.phase {
            Phase::Done => Err(SessionError::SessionComplete),
            Phase::Vignettes => Ok(super::prompt::vignette_prompt(
                instrument,
                &view.ratings,
                view.own_ls,
                view.rating_hold,
            )),
            _ => {
                let active = view.active.expect("block phases always have an active gamble");
                let previous = view.cursor.checked_sub(1).map(|i| self.gamble_queue[i]);
                Ok(super::prompt::gamble_prompt(
                    instrument,
                    &active,
                    view.cursor,
                    previous.as_ref(),
                    &view.ratings,
                ))
            }
        }
    }

    /// Applies one event in place, stamping the transcript with `at`.
    /// On error the state is unchanged.
    pub fn apply(&mut self, event: SessionEvent, at: DateTime<Utc>) -> Result<(), SessionError> {
        if let SessionEvent::Back = event {
            self.applied.pop().ok_or(SessionError::EmptyHistory)?;
            let mut progress = Progress::initial();
            for e in &self.applied {
                apply_event(&mut progress, &self.gamble_queue, self.condition, e)
                    .expect("previously accepted events replay cleanly");
            }
            self.progress = progress;
        } else {
            let mut progress = self.progress.clone();
            apply_event(&mut progress, &self.gamble_queue, self.condition, &event)?;
            self.progress = progress;
            self.applied.push(event.clone());
        }
        self.transcript.push(TranscriptEntry {
            seq: self.transcript.len() as u64,
            at,
            event,
        });
        Ok(())
    }

    pub fn submit(&self, event: SessionEvent, at: DateTime<Utc>) -> Result<SessionState, SessionError> {
        let mut next = self.clone();
        next.apply(event, at)?;
        Ok(next)
    }

    pub fn submit_choice(&self, event: super::ChoiceEvent) -> Result<SessionState, SessionError> {
        self.submit(
            SessionEvent::Choice {
                gamble: event.gamble,
                ladder_index: event.ladder_index,
                response: event.response,
            },
            event.timestamp,
        )
    }

    pub fn rate_vignette(
        &self,
        state: LifeState,
        value: i64,
        explanation: Option<String>,
    ) -> Result<SessionState, SessionError> {
        self.submit(
            SessionEvent::Rating {
                state,
                value,
                explanation,
            },
            Utc::now(),
        )
    }

    pub fn rate_own_ls(&self, value: i64) -> Result<SessionState, SessionError> {
        self.submit(SessionEvent::OwnLifeSatisfaction { value }, Utc::now())
    }

    pub fn go_back(&self) -> Result<SessionState, SessionError> {
        self.submit(SessionEvent::Back, Utc::now())
    }

    /// Rebuilds a session by replaying a stored transcript.
    pub fn replay(
        profile: ParticipantProfile,
        seed: u64,
        condition: SessionCondition,
        transcript: &[TranscriptEntry],
    ) -> Result<SessionState, SessionError> {
        let mut state = create_session(profile, seed, Some(condition))?;
        for entry in transcript {
            state.apply(entry.event.clone(), entry.at)?;
        }
        Ok(state)
    }
}

fn enter_phase(progress: &mut Progress, queue: &[GambleSpec], phase: Phase) {
    progress.phase = phase;
    progress.active = block_start(phase).map(|start| {
        progress.cursor = start;
        ActiveGamble::fresh(queue[start])
    });
}

fn advance_phase(progress: &mut Progress, queue: &[GambleSpec], condition: SessionCondition) {
    let order = phase_order(condition);
    let next = order
        .iter()
        .position(|p| *p == progress.phase)
        .and_then(|i| order.get(i + 1).copied())
        .unwrap_or(Phase::Done);
    enter_phase(progress, queue, next);
}

fn finish_vignettes_if_ready(progress: &mut Progress, queue: &[GambleSpec], condition: SessionCondition) {
    if progress.own_ls.is_some() && progress.ratings.is_complete() && !progress.rating_hold {
        advance_phase(progress, queue, condition);
    }
}

fn apply_event(
    progress: &mut Progress,
    queue: &[GambleSpec],
    condition: SessionCondition,
    event: &SessionEvent,
) -> Result<(), SessionError> {
    if progress.phase == Phase::Done {
        return Err(SessionError::SessionComplete);
    }
    if progress.phase == Phase::Profile {
        enter_phase(progress, queue, phase_order(condition)[0]);
    }
    let in_vignettes = progress.phase == Phase::Vignettes;
    match event {
        SessionEvent::Back => unreachable!("handled by SessionState::apply"),
        SessionEvent::OwnLifeSatisfaction { value } => {
            if !in_vignettes {
                return Err(SessionError::Sequencing("own rating outside the vignette phase".into()));
            }
            if !(0..=10).contains(value) {
                return Err(crate::domain::DomainError::RatingOutOfRange(*value).into());
            }
            progress.own_ls = Some(*value as u8);
            finish_vignettes_if_ready(progress, queue, condition);
        }
        SessionEvent::Rating {
            state,
            value,
            explanation,
        } => {
            if !in_vignettes {
                return Err(SessionError::Sequencing("rating outside the vignette phase".into()));
            }
            progress.ratings.set(*state, *value)?;
            let text = explanation.as_deref().map(str::trim).unwrap_or("");
            if !text.is_empty() {
                progress.ratings.explanations.insert(*state, text.to_owned());
            }
            if progress.ratings.is_complete() {
                let violations = ordering_violations(&progress.ratings)?;
                if violations.is_empty() {
                    progress.rating_hold = false;
                    progress.order_violation = false;
                    progress.order_violation_explained = false;
                } else if explanation.is_some() {
                    progress.rating_hold = false;
                    progress.order_violation = true;
                    progress.order_violation_explained = !text.is_empty();
                } else {
                    progress.rating_hold = true;
                }
            }
            finish_vignettes_if_ready(progress, queue, condition);
        }
        SessionEvent::Explain { text } => {
            if !(in_vignettes && progress.rating_hold) {
                return Err(SessionError::Sequencing("no ordering explanation is pending".into()));
            }
            let text = text.trim();
            if !text.is_empty() {
                let violations = ordering_violations(&progress.ratings)?;
                if let Some((lower, _)) = violations.first() {
                    progress.ratings.explanations.insert(*lower, text.to_owned());
                }
            }
            progress.rating_hold = false;
            progress.order_violation = true;
            progress.order_violation_explained = !text.is_empty();
            finish_vignettes_if_ready(progress, queue, condition);
        }
        SessionEvent::Choice {
            gamble,
            ladder_index,
            response,
        } => {
            let Some(active) = progress.active.as_mut() else {
                return Err(SessionError::Sequencing("no gamble is active".into()));
            };
            if active.gamble != *gamble || active.ladder_index != *ladder_index {
                return Err(SessionError::Sequencing(format!(
                    "expected rung {} of the active gamble, got rung {}",
                    active.ladder_index, ladder_index
                )));
            }
            let idx = active.ladder_index;
            let last = ProbabilityLadder::LAST;
            let previous_rung = if idx == 0 { Bound::One } else { Bound::Rung(idx - 1) };
            let outcome = match response {
                Response::AcceptGamble => Some(IndifferenceBracket::resolved(Bound::Rung(idx), previous_rung)),
                Response::RefuseGamble if idx == last => {
                    Some(IndifferenceBracket::resolved(Bound::Zero, Bound::Rung(last)))
                }
                Response::RefuseGamble => {
                    active.ladder_index += 1;
                    active.consecutive_cant_choose = 0;
                    None
                }
                Response::CantChoose => {
                    active.consecutive_cant_choose += 1;
                    let streak = active.consecutive_cant_choose as usize;
                    if streak >= 2 || idx == last {
                        Some(IndifferenceBracket::undecidable(Bound::Rung(idx + 1 - streak)))
                    } else {
                        active.ladder_index += 1;
                        None
                    }
                }
            };
            active.previous_response = Some(*response);
            if let Some(bracket) = outcome {
                progress.brackets[progress.cursor] = Some(bracket);
                progress.cursor += 1;
                if progress.cursor.is_multiple_of(GAMBLES_PER_BLOCK) {
                    advance_phase(progress, queue, condition);
                } else {
                    progress.active = Some(ActiveGamble::fresh(queue[progress.cursor]));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Block, BracketStatus};
    use crate::elicitation::ChoiceEvent;

    pub(crate) fn profile() -> ParticipantProfile {
        ParticipantProfile {
            age_band: "35-44".into(),
            sex: "Female".into(),
            party: "Labour".into(),
            bsa_items: vec![4, 4, 3, 5, 4],
            left_right: 4,
            attention_checks_failed: 0,
            completion_seconds: Some(1400.0),
        }
    }

    fn gambles_first(seed: u64) -> SessionState {
        create_session(profile(), seed, Some(SessionCondition::GamblesFirst)).unwrap()
    }

    fn respond(state: &SessionState, response: Response) -> SessionState {
        let Prompt::Gamble(active) = state.next_prompt().unwrap() else {
            panic!("expected a gamble prompt")
        };
        state
            .submit_choice(ChoiceEvent {
                gamble: active.gamble,
                ladder_index: active.ladder_index,
                response,
                timestamp: Utc::now(),
            })
            .unwrap()
    }

    fn first_bracket(state: &SessionState) -> IndifferenceBracket {
        state.brackets()[0].bracket
    }

    #[test]
    fn fixed_seed_gives_identical_queue() {
        let a = create_session(profile(), 7, None).unwrap();
        let b = create_session(profile(), 7, None).unwrap();
        assert_eq!(a.gamble_queue(), b.gamble_queue());
        assert_eq!(a.id(), b.id());
        assert_eq!(a.condition(), b.condition());
    }

    #[test]
    fn condition_split_is_balanced() {
        // Monte Carlo over seeds.
        let n = 10_000;
        let gf = (0..n)
            .filter(|s| create_session(profile(), *s, None).unwrap().condition() == SessionCondition::GamblesFirst)
            .count();
        let share = gf as f64 / n as f64;
        assert!((0.48..=0.52).contains(&share), "share {share}");
    }

    #[test]
    fn queue_has_three_blocks_in_fixed_order() {
        for seed in 0..50 {
            let s = create_session(profile(), seed, None).unwrap();
            let q = s.gamble_queue();
            assert_eq!(q.len(), 12);
            assert!(q[..4].iter().all(|g| g.block == Block::AdjacentPersonal));
            assert!(q[4..8].iter().all(|g| g.block == Block::AdjacentSocietal));
            assert!(q[8..].iter().all(|g| g.block == Block::NonAdjacentPersonal));
            let mut extra: Vec<_> = q[8..].iter().map(|g| g.triple()).collect();
            extra.sort();
            extra.dedup();
            assert_eq!(extra.len(), 4, "sampled without replacement");
            for g in q {
                crate::domain::validate_gamble(g).unwrap();
            }
        }
    }

    #[test]
    fn gambles_first_opens_with_a_gamble() {
        let s = gambles_first(1);
        assert_eq!(s.phase(), Phase::Profile);
        assert!(matches!(s.next_prompt().unwrap(), Prompt::Gamble(_)));
        let ls_first = create_session(profile(), 1, Some(SessionCondition::LifeSatisfactionFirst)).unwrap();
        assert!(matches!(ls_first.next_prompt().unwrap(), Prompt::OwnLifeSatisfaction { .. }));
    }

    #[test]
    fn accept_at_first_rung() {
        let s = respond(&gambles_first(2), Response::AcceptGamble);
        let b = first_bracket(&s);
        assert_eq!(b, IndifferenceBracket::resolved(Bound::Rung(0), Bound::One));
        assert_eq!((b.highest_accepted.probability(), b.lowest_rejected.probability()), (0.5, 1.0));
        assert_eq!(s.active().unwrap().ladder_index, 0);
        assert_eq!(s.active().unwrap().gamble, s.gamble_queue()[1]);
    }

    #[test]
    fn refuse_refuse_accept() {
        let mut s = gambles_first(3);
        s = respond(&s, Response::RefuseGamble);
        assert_eq!(s.active().unwrap().ladder_index, 1);
        s = respond(&s, Response::RefuseGamble);
        s = respond(&s, Response::AcceptGamble);
        let b = first_bracket(&s);
        assert_eq!((b.highest_accepted.probability(), b.lowest_rejected.probability()), (0.1, 0.2));
    }

    #[test]
    fn refusing_every_rung_gives_zero_bracket() {
        let mut s = gambles_first(4);
        for _ in 0..8 {
            s = respond(&s, Response::RefuseGamble);
        }
        let b = first_bracket(&s);
        assert_eq!(b.status, BracketStatus::Resolved);
        assert_eq!((b.highest_accepted.probability(), b.lowest_rejected.probability()), (0.0, 1e-6));
    }

    #[test]
    fn cant_choose_then_accept_uses_cant_choose_rung_as_rejected() {
        let mut s = gambles_first(5);
        s = respond(&s, Response::RefuseGamble);
        s = respond(&s, Response::CantChoose);
        assert_eq!(s.active().unwrap().consecutive_cant_choose, 1);
        s = respond(&s, Response::AcceptGamble);
        assert_eq!(first_bracket(&s), IndifferenceBracket::resolved(Bound::Rung(2), Bound::Rung(1)));
    }

    #[test]
    fn two_cant_choose_marks_undecidable() {
        let mut s = gambles_first(6);
        s = respond(&s, Response::CantChoose);
        s = respond(&s, Response::CantChoose);
        assert_eq!(first_bracket(&s).status, BracketStatus::Undecidable);
        assert_eq!(s.active().unwrap().gamble, s.gamble_queue()[1]);
    }

    #[test]
    fn refuse_resets_cant_choose_streak() {
        let mut s = gambles_first(6);
        s = respond(&s, Response::CantChoose);
        s = respond(&s, Response::RefuseGamble);
        assert_eq!(s.active().unwrap().consecutive_cant_choose, 0);
        s = respond(&s, Response::CantChoose);
        assert!(s.brackets().is_empty());
        assert_eq!(s.active().unwrap().ladder_index, 3);
    }

    #[test]
    fn cant_choose_on_last_rung_is_undecidable() {
        let mut s = gambles_first(8);
        for _ in 0..7 {
            s = respond(&s, Response::RefuseGamble);
        }
        s = respond(&s, Response::CantChoose);
        assert_eq!(first_bracket(&s).status, BracketStatus::Undecidable);
    }

    #[test]
    fn stale_event_is_a_sequencing_error() {
        let s = respond(&gambles_first(9), Response::RefuseGamble);
        let active = *s.active().unwrap();
        let err = s
            .submit_choice(ChoiceEvent {
                gamble: active.gamble,
                ladder_index: 3,
                response: Response::AcceptGamble,
                timestamp: Utc::now(),
            })
            .unwrap_err();
        assert!(matches!(err, SessionError::Sequencing(_)));
    }

    #[test]
    fn go_back_restores_pre_submit_state() {
        let s0 = respond(&gambles_first(10), Response::RefuseGamble);
        let s1 = respond(&s0, Response::AcceptGamble);
        let reverted = s1.go_back().unwrap();
        assert!(reverted.same_position(&s0));
        assert_eq!(reverted.transcript().len(), s1.transcript().len() + 1);
        assert_eq!(reverted.active().unwrap().ladder_index, 1, "completed gamble reopens at its final rung");

        let twice = reverted.go_back().unwrap();
        let s_start = respond(&gambles_first(10), Response::RefuseGamble).go_back().unwrap();
        assert!(twice.same_position(&s_start));
        assert!(matches!(gambles_first(10).go_back(), Err(SessionError::EmptyHistory)));
    }

    #[test]
    fn ratings_hold_and_explanation() {
        let mut s = create_session(profile(), 11, Some(SessionCondition::LifeSatisfactionFirst)).unwrap();
        s = s.rate_own_ls(8).unwrap();
        assert_eq!(s.phase(), Phase::Vignettes);
        for (state, v) in [(LifeState::A, 10), (LifeState::B, 8), (LifeState::C, 9), (LifeState::D, 4)] {
            s = s.rate_vignette(state, v, None).unwrap();
        }
        s = s.rate_vignette(LifeState::E, 2, None).unwrap();
        assert!(s.awaiting_explanation());
        assert!(matches!(s.next_prompt().unwrap(), Prompt::ReviseOrExplain { .. }));

        let explained = s
            .submit(SessionEvent::Explain { text: "C has an easier life".into() }, Utc::now())
            .unwrap();
        assert!(explained.order_violation() && explained.order_violation_explained());
        assert_eq!(explained.phase(), Phase::Block1);

        let revised = s.rate_vignette(LifeState::C, 6, None).unwrap();
        assert!(!revised.order_violation());
        assert_eq!(revised.phase(), Phase::Block1);
    }

    #[test]
    fn rating_with_explanation_proceeds_flagged() {
        let mut s = create_session(profile(), 12, Some(SessionCondition::LifeSatisfactionFirst)).unwrap();
        s = s.rate_own_ls(7).unwrap();
        for (state, v) in [(LifeState::A, 10), (LifeState::B, 8), (LifeState::D, 4), (LifeState::E, 2)] {
            s = s.rate_vignette(state, v, None).unwrap();
        }
        s = s
            .rate_vignette(LifeState::C, 9, Some("I know people like this".into()))
            .unwrap();
        assert!(s.order_violation());
        assert_eq!(s.phase(), Phase::Block1);
        assert_eq!(s.ratings().explanations[&LifeState::C], "I know people like this");
    }

    #[test]
    fn out_of_range_rating_rejected() {
        let s = create_session(profile(), 13, Some(SessionCondition::LifeSatisfactionFirst))
            .unwrap()
            .rate_own_ls(5)
            .unwrap();
        assert!(matches!(
            s.rate_vignette(LifeState::A, 12, None),
            Err(SessionError::Validation(_))
        ));
    }

    #[test]
    fn invalid_profile_rejected() {
        let mut p = profile();
        p.bsa_items = vec![1, 2, 3];
        assert!(matches!(create_session(p, 0, None), Err(SessionError::InvalidProfile(_))));
        let mut p = profile();
        p.bsa_items[2] = 6;
        assert!(create_session(p, 0, None).is_err());
    }
}
