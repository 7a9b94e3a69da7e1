//! Survey content served with prompts: vignette descriptions, scenario
//! framing, comparator sentences and quality thresholds. Everything here is
//! configuration; the defaults reproduce the fielded instrument.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{LifeState, ProbabilityLadder};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vignette {
    pub career: String,
    pub relationships: String,
    pub physical_fitness: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityConfig {
    /// Sessions completed faster than this are flagged.
    pub min_completion_seconds: f64,
    /// Attention-check failures tolerated before flagging.
    pub max_attention_failures: u32,
    /// Accepted wordings of the attention item.
    pub attention_items: Vec<String>,
}

impl Default for QualityConfig {
    fn default() -> Self {
        Self {
            min_completion_seconds: 480.0,
            max_attention_failures: 0,
            attention_items: vec![
                "I am currently completing an online survey".to_owned(),
                "I am currently taking an online survey".to_owned(),
            ],
        }
    }
}

/// Real-world comparator sentence per ladder rung.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparatorTable(pub Vec<Option<String>>);

impl ComparatorTable {
    pub fn get(&self, ladder_index: usize) -> Option<&str> {
        self.0.get(ladder_index).and_then(|c| c.as_deref())
    }
}

impl Default for ComparatorTable {
    fn default() -> Self {
        let texts = [
            "For comparison, a fair coin lands heads 1 in 2 times.",
            "For comparison, drawing the one marked ball from a bag of five happens 1 in 5 times.",
            "For comparison, drawing the one marked ball from a bag of ten happens 1 in 10 times.",
            "For comparison, in everyday life, a UK adult (age 20-49) has a 1 in 100 risk of dying every 10 years.",
            "For comparison, guessing a 3-digit code at the first attempt succeeds 1 in 1,000 times.",
            "For comparison, guessing a 4-digit PIN at the first attempt succeeds 1 in 10,000 times.",
            "For comparison, guessing a 5-digit code at the first attempt succeeds 1 in 100,000 times.",
            "For comparison, guessing a 6-digit code at the first attempt succeeds 1 in 1,000,000 times.",
        ];
        debug_assert_eq!(texts.len(), ProbabilityLadder::LEN);
        Self(texts.iter().map(|t| Some((*t).to_owned())).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instrument {
    pub vignettes: BTreeMap<LifeState, Vignette>,
    pub comparators: ComparatorTable,
    pub own_ls_question: String,
    pub personal_scenario: String,
    pub societal_scenario: String,
    pub societal_reminder: String,
    pub quality: QualityConfig,
}

fn vignette(career: &str, relationships: &str, physical_fitness: &str) -> Vignette {
    Vignette {
        career: career.to_owned(),
        relationships: relationships.to_owned(),
        physical_fitness: physical_fitness.to_owned(),
    }
}

impl Default for Instrument {
    fn default() -> Self {
        let vignettes = BTreeMap::from([
            (
                LifeState::A,
                vignette(
                    "I love my job, it is respected and well paid. I could not imagine having a better job.",
                    "My family and friends bring me a lot of joy, we spend a lot of time together. I am very happy with my relationship status. Life is great.",
                    "I adore sports and physical activities! I practice almost everyday and consider myself fortunate to do so much.",
                ),
            ),
            (
                LifeState::B,
                vignette(
                    "I like my job. It is a good job, and reasonably paid.",
                    "I have a good connection with my family & friends, and I see them fairly often. I am happy with my relationship status.",
                    "I enjoy practicing sport in my spare time.",
                ),
            ),
            (
                LifeState::C,
                vignette(
                    "I find my job a little dull, but it pays enough for essentials.",
                    "I visit my family and friends sometimes, but I wish we would have a strong connection. I am mostly happy with my relationship status.",
                    "I occasionally have the chance to play sports. I would like to do more it more often but I struggle to find the time.",
                ),
            ),
            (
                LifeState::D,
                vignette(
                    "I don't enjoy my job. The pay is low, and sometimes I struggle to pay the bills.",
                    "I only occasionally visit my family and friends, and I often feel lonely. I am unhappy about my relationship status.",
                    "I rarely exercise. I would like to exercise more but I struggle to find time and motivation.",
                ),
            ),
            (
                LifeState::E,
                vignette(
                    "I would like to work, but I am physically unable to. The state provides some benefits to help cover essentials, but I often struggle to pay the bills.",
                    "I am unable to visit family or friends, and I always feel lonely. I am very unhappy about my relationship status.",
                    "I would like to play sports but I am not physically able to do so.",
                ),
            ),
        ]);
        Self {
            vignettes,
            comparators: ComparatorTable::default(),
            own_ls_question: "Overall, how satisfied are you with your life nowadays? Please answer on a scale from 0 to 10, where 0 means \"not at all satisfied\" and 10 means \"totally satisfied\".".to_owned(),
            personal_scenario: "Imagine that all your life, you have had a chronic health condition which you were born with, and which restricts your life somewhat. One day your doctor says you must choose between two treatments for this condition.".to_owned(),
            societal_scenario: "Imagine you are a policymaker who must make a choice affecting a large number of people.".to_owned(),
            societal_reminder: "The policy will affect you as well, though you don't yet know whether you will benefit or be negatively affected.".to_owned(),
            quality: QualityConfig::default(),
        }
    }
}
