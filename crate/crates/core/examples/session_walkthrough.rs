//! Drives one elicitation session by hand and prints each prompt.
//!
//! The scripted respondent rates the vignettes in order and accepts any
//! gamble whose chance of the worse outcome is 1 in 10 or smaller.

use lifesat::elicitation::{create_session, Prompt, Response, SessionCondition, SessionEvent};
use lifesat::simulator::{synthetic_profile, SyntheticClock};

fn main() -> anyhow::Result<()> {
    let clock = SyntheticClock::default();
    let mut state = create_session(synthetic_profile(1), 1, Some(SessionCondition::LifeSatisfactionFirst))?;
    println!("session {} ({:?})", state.id(), state.condition());

    while !state.is_done() {
        let event = match state.next_prompt()? {
            Prompt::OwnLifeSatisfaction { question } => {
                println!("\n{question}");
                SessionEvent::OwnLifeSatisfaction { value: 7 }
            }
            Prompt::RateVignette { state: s, vignette, .. } => {
                println!("rate {}: {}", s.letter(), vignette.career);
                SessionEvent::Rating { state: s, value: 2 * s.rank() as i64, explanation: None }
            }
            Prompt::ReviseOrExplain { violations, .. } => {
                println!("out of order: {violations:?}");
                SessionEvent::Explain { text: String::new() }
            }
            Prompt::Gamble(g) => {
                let response = if g.probability <= 0.1 { Response::AcceptGamble } else { Response::RefuseGamble };
                if g.ladder_index == 0 {
                    println!("\n[{:?} #{}] sure: {} | gamble: {} or {}", g.block, g.position, g.options.certain, g.options.win, g.options.lose);
                }
                println!("  {:>12}  {:?}", g.odds.text(), response);
                SessionEvent::Choice { gamble: g.gamble, ladder_index: g.ladder_index, response }
            }
        };
        let at = clock.at(state.transcript().len());
        state = state.submit(event, at)?;
    }

    println!("\nbrackets:");
    for r in state.brackets() {
        let g = r.gamble;
        println!(
            "  {:?} {}/{}/{}  {:?} .. {:?}",
            g.context,
            g.win.letter(),
            g.baseline.letter(),
            g.lose.letter(),
            r.bracket.highest_accepted,
            r.bracket.lowest_rejected
        );
    }
    Ok(())
}
