//! Templated natural-language rendering.

use super::run::Explanation;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Emitted when no cause met the acceptance threshold.
pub const FALLBACK_SENTENCE: &str =
    "No cause met the responsibility threshold for the selected action.";

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("phrase map is missing entries for: {0:?}")]
    MissingPhrases(Vec<String>),
    #[error("phrase map has no action phrase for `{0}`")]
    MissingAction(String),
}

/// Per-domain phrase data: an action clause per action name and an explanan
/// phrase per variable (optionally per variable=value pair).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhraseMap {
    pub actions: BTreeMap<String, String>,
    pub explanans: BTreeMap<String, String>,
}

impl PhraseMap {
    fn explanan(&self, var: &str, value: &str) -> Option<&str> {
        self.explanans
            .get(&format!("{var}={value}"))
            .or_else(|| self.explanans.get(var))
            .map(String::as_str)
    }
}

fn join_phrases(phrases: &[&str]) -> String {
    match phrases {
        [] => String::new(),
        [one] => (*one).to_string(),
        [a, b] => format!("{a} and {b}"),
        many => {
            let (last, init) = many.split_last().expect("non-empty");
            format!("{}, and {last}", init.join(", "))
        }
    }
}

/// Renders the top-ranked cause set as
/// `"<action phrase> because <explanan 1>, ..., and <explanan N>."`.
/// With no causes, a fixed fallback sentence is produced. Deterministic.
pub fn render_explanation(
    explanation: &Explanation,
    phrase_map: &PhraseMap,
) -> Result<String, RenderError> {
    let action_phrase = phrase_map
        .actions
        .get(&explanation.action)
        .ok_or_else(|| RenderError::MissingAction(explanation.action.clone()))?;
    let Some(top) = explanation.causes.first() else {
        return Ok(FALLBACK_SENTENCE.to_string());
    };
    let mut missing = Vec::new();
    let mut phrases = Vec::new();
    for (var, value) in top.variables.iter().zip(&top.values) {
        match phrase_map.explanan(var, value) {
            Some(p) => phrases.push(p),
            None => missing.push(format!("{var}={value}")),
        }
    }
    if !missing.is_empty() {
        return Err(RenderError::MissingPhrases(missing));
    }
    Ok(format!("{action_phrase} because {}.", join_phrases(&phrases)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::CauseSet;

    fn lane_change_explanation() -> Explanation {
        Explanation {
            action: "right_lane_change".into(),
            causes: vec![CauseSet {
                variables: vec!["lane".into(), "ttc_left".into(), "right_gap".into()],
                values: vec!["0".into(), "2".into(), "1".into()],
                witness: None,
                responsibility: Some(0.5),
                minimality_relative: false,
            }],
            text: None,
            beam_survivors: None,
        }
    }

    fn lane_phrases() -> PhraseMap {
        let mut actions = BTreeMap::new();
        actions.insert(
            "right_lane_change".into(),
            "The car changed lanes to the right".into(),
        );
        let mut explanans = BTreeMap::new();
        explanans.insert("lane=0".into(), "the car was in the left lane".into());
        explanans.insert(
            "ttc_left=2".into(),
            "the estimated time to collision in the left lane was 2 seconds".into(),
        );
        explanans.insert("right_gap=1".into(), "the right lane was empty".into());
        PhraseMap { actions, explanans }
    }

    #[test]
    fn renders_three_explanans_with_serial_comma() {
        let text = render_explanation(&lane_change_explanation(), &lane_phrases()).unwrap();
        assert_eq!(
            text,
            "The car changed lanes to the right because the car was in the left lane, \
             the estimated time to collision in the left lane was 2 seconds, \
             and the right lane was empty."
        );
    }

    #[test]
    fn single_explanan_has_no_comma() {
        let mut e = lane_change_explanation();
        e.causes[0].variables.truncate(1);
        e.causes[0].values.truncate(1);
        let text = render_explanation(&e, &lane_phrases()).unwrap();
        assert_eq!(
            text,
            "The car changed lanes to the right because the car was in the left lane."
        );
    }

    #[test]
    fn empty_causes_fall_back() {
        let mut e = lane_change_explanation();
        e.causes.clear();
        let text = render_explanation(&e, &lane_phrases()).unwrap();
        assert_eq!(text, FALLBACK_SENTENCE);
    }

    #[test]
    fn missing_phrase_lists_gaps() {
        let mut phrases = lane_phrases();
        phrases.explanans.remove("right_gap=1");
        let err = render_explanation(&lane_change_explanation(), &phrases).unwrap_err();
        match err {
            RenderError::MissingPhrases(gaps) => assert_eq!(gaps, vec!["right_gap=1"]),
            other => panic!("unexpected error {other}"),
        }
    }
}
