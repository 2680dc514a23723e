//! Keyword-lexicon baseline for SDG labelling.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::text::words;
use super::{CatalogError, SdgLabel};

pub const GOAL_COUNT: u8 = 17;

const DEFAULT_LEXICON: &str = include_str!("../../data/sdg_lexicon.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalEntry {
    pub title: String,
    pub phrases: Vec<String>,
}

/// Phrase lists for the 17 goals, keyed by goal number.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    goals: BTreeMap<u8, GoalEntry>,
    /// Phrases as space-padded word sequences, per goal.
    normalized: BTreeMap<u8, Vec<String>>,
}

fn padded(text: &str) -> String {
    let mut s = String::from(" ");
    for w in words(text) {
        s.push_str(&w);
        s.push(' ');
    }
    s
}

impl Lexicon {
    /// Parses a goal-keyed JSON lexicon. Every goal 1..=17 needs a title and
    /// at least one phrase.
    pub fn from_json(json: &str) -> Result<Self, CatalogError> {
        let raw: BTreeMap<String, GoalEntry> =
            serde_json::from_str(json).map_err(|e| CatalogError::InvalidLexicon(e.to_string()))?;
        let mut goals = BTreeMap::new();
        for (key, entry) in raw {
            let goal: u8 = key.parse().map_err(|_| CatalogError::InvalidLexicon(format!("bad goal key {key:?}")))?;
            if !(1..=GOAL_COUNT).contains(&goal) {
                return Err(CatalogError::InvalidLexicon(format!("goal {goal} out of range")));
            }
            if entry.phrases.iter().all(|p| padded(p).trim().is_empty()) {
                return Err(CatalogError::InvalidLexicon(format!("goal {goal} has no phrases")));
            }
            goals.insert(goal, entry);
        }
        if goals.len() != GOAL_COUNT as usize {
            return Err(CatalogError::InvalidLexicon(format!("expected 17 goals, found {}", goals.len())));
        }
        let normalized = goals
            .iter()
            .map(|(g, e)| (*g, e.phrases.iter().map(|p| padded(p)).filter(|p| !p.trim().is_empty()).collect()))
            .collect();
        Ok(Self { goals, normalized })
    }

    pub fn title(&self, goal: u8) -> Option<&str> {
        self.goals.get(&goal).map(|e| e.title.as_str())
    }

    pub fn goals(&self) -> impl Iterator<Item = (u8, &GoalEntry)> {
        self.goals.iter().map(|(g, e)| (*g, e))
    }

    /// Goals with at least one phrase occurring in `text` as a whole-word,
    /// case-insensitive match. Confidence is the fraction of the goal's
    /// phrases found.
    pub fn classify(&self, text: &str) -> Vec<SdgLabel> {
        let haystack = padded(text);
        self.normalized
            .iter()
            .filter_map(|(goal, phrases)| {
                let hits = phrases.iter().filter(|p| haystack.contains(p.as_str())).count();
                (hits > 0).then(|| SdgLabel {
                    goal: *goal,
                    target: None,
                    confidence: hits as f64 / phrases.len() as f64,
                })
            })
            .collect()
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::from_json(DEFAULT_LEXICON).expect("shipped lexicon is valid")
    }
}

/// Labels `text` with the shipped lexicon.
pub fn classify_sdg(text: &str) -> Vec<SdgLabel> {
    Lexicon::default().classify(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_lexicon_shape() {
        let lex = Lexicon::default();
        assert_eq!(lex.goals().count(), 17);
        assert!(lex.goals().all(|(_, e)| e.phrases.len() >= 10));
    }

    #[test]
    fn spec_examples() {
        let goals = |t: &str| classify_sdg(t).iter().map(|l| l.goal).collect::<Vec<_>>();
        assert!(goals("reducing malaria incidence through community health workers").contains(&3));
        assert!(goals("renewable energy transition pathways").contains(&7));
        assert!(goals("abstract algebra lecture notes").is_empty());
    }

    #[test]
    fn whole_words_only() {
        // Phrases match whole words only.
        let lex = Lexicon::default();
        assert!(lex.classify("waterfalls").iter().all(|l| l.goal != 6));
        let l = lex.classify("Malaria and malaria").into_iter().find(|l| l.goal == 3).unwrap();
        assert!((l.confidence - 1.0 / 14.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_incomplete_lexicons() {
        assert!(Lexicon::from_json(r#"{"1":{"title":"x","phrases":["a"]}}"#).is_err());
        assert!(Lexicon::from_json("[]").is_err());
    }
}
