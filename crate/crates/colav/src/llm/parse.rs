//! Parsing of the three-field explainable action out of model output.
//!
//! The contract is three labelled fields (SITUATION / ACTION / REASONING),
//! matched case-insensitively and tolerating either newline or "/"
//! separators. Anything missing, unrecognized, or self-contradictory is a
//! parse error carrying the raw text so the decider can fall back and keep
//! the response for audit.

use crate::colregs::{ManeuverAction, Situation, Turn};

use super::{ExplainableAction, LlmError};

/// Byte offset just after `label:` for the first occurrence of the label,
/// plus the offset where the label itself starts.
fn find_label(lower: &str, label: &str) -> Option<(usize, usize)> {
    let mut search_from = 0;
    while let Some(rel) = lower[search_from..].find(label) {
        let at = search_from + rel;
        let preceded_ok = at == 0
            || !lower[..at]
                .chars()
                .next_back()
                .is_some_and(|c| c.is_ascii_alphanumeric());
        let after = at + label.len();
        let rest = &lower[after..];
        let colon = rest
            .char_indices()
            .find(|(_, c)| !c.is_whitespace())
            .filter(|(_, c)| *c == ':');
        if preceded_ok {
            if let Some((idx, _)) = colon {
                return Some((after + idx + 1, at));
            }
        }
        search_from = after;
    }
    None
}

/// Slice out one labelled field: from just after its colon to the start of
/// the nearest following label (any of the three) or the end of the text.
fn field<'t>(text: &'t str, lower: &str, label: &str) -> Option<&'t str> {
    let (value_start, _) = find_label(lower, label)?;
    let mut value_end = text.len();
    for other in ["situation", "action", "reasoning"] {
        if let Some((_, label_start)) = find_label(&lower[value_start..], other) {
            value_end = value_end.min(value_start + label_start);
        }
    }
    Some(text[value_start..value_end].trim_matches(|c: char| c.is_whitespace() || c == '/' || c == '|'))
}

fn parse_situation(segment: &str, raw: &str) -> Result<Situation, LlmError> {
    let s = segment.to_ascii_lowercase();
    let head = s.contains("head-on") || s.contains("head on") || s.contains("headon") || s.contains("head_on");
    let overtaking = s.contains("overtak");
    let crossing = s.contains("cross");
    match (head, overtaking, crossing) {
        (true, false, false) => Ok(Situation::HeadOn),
        (false, true, false) => Ok(Situation::Overtaking),
        (false, false, true) => Ok(Situation::Crossing),
        (false, false, false) => Err(LlmError::Parse {
            reason: format!("unrecognized situation {segment:?}"),
            raw: raw.to_string(),
        }),
        _ => Err(LlmError::Parse {
            reason: format!("ambiguous situation {segment:?}"),
            raw: raw.to_string(),
        }),
    }
}

fn parse_action(segment: &str, raw: &str) -> Result<ManeuverAction, LlmError> {
    let s = segment.to_ascii_lowercase();
    let give = s.contains("give-way") || s.contains("give way") || s.contains("giveway");
    let stand = s.contains("stand-on") || s.contains("stand on") || s.contains("standon");
    let starboard = s.contains("starboard");
    let port = s.contains("port");

    let err = |reason: String| LlmError::Parse {
        reason,
        raw: raw.to_string(),
    };

    if give && stand {
        return Err(err(format!("contradictory action {segment:?}")));
    }
    if starboard && port {
        return Err(err(format!("contradictory turn direction {segment:?}")));
    }
    if stand {
        if starboard || port {
            return Err(err(format!(
                "stand-on with a turn direction {segment:?}"
            )));
        }
        return Ok(ManeuverAction::StandOn);
    }
    if give {
        let turn = if starboard {
            Turn::Starboard
        } else if port {
            Turn::Port
        } else {
            Turn::None
        };
        return Ok(ManeuverAction::GiveWay(turn));
    }
    Err(err(format!("unrecognized action {segment:?}")))
}

/// Extract the explainable action from raw model output.
pub fn parse_response(text: &str) -> Result<ExplainableAction, LlmError> {
    let lower = text.to_ascii_lowercase();
    let missing = |which: &str| LlmError::Parse {
        reason: format!("missing {which} field"),
        raw: text.to_string(),
    };

    let situation_seg = field(text, &lower, "situation").ok_or_else(|| missing("SITUATION"))?;
    let action_seg = field(text, &lower, "action").ok_or_else(|| missing("ACTION"))?;
    let reasoning_seg = field(text, &lower, "reasoning").ok_or_else(|| missing("REASONING"))?;

    let situation = parse_situation(situation_seg, text)?;
    let action = parse_action(action_seg, text)?;
    let reasoning = reasoning_seg.trim().to_string();
    if reasoning.is_empty() {
        return Err(LlmError::Parse {
            reason: "empty reasoning".to_string(),
            raw: text.to_string(),
        });
    }

    Ok(ExplainableAction {
        situation,
        action,
        reasoning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_slash_separated_give_way() {
        let text = "SITUATION: crossing / ACTION: Give-way, turn starboard / \
                    REASONING: Target on the starboard bow; Rule 15 applies.";
        let parsed = parse_response(text).unwrap();
        assert_eq!(parsed.situation, Situation::Crossing);
        assert_eq!(parsed.action, ManeuverAction::GiveWay(Turn::Starboard));
        assert!(parsed.reasoning.contains("Rule 15"));
    }

    #[test]
    fn parses_newline_separated_stand_on() {
        let text = "SITUATION: crossing\nACTION: Stand-on\nREASONING: Target approaching \
                    on the port side; stand-on duty applies under Rule 17.";
        let parsed = parse_response(text).unwrap();
        assert_eq!(parsed.situation, Situation::Crossing);
        assert_eq!(parsed.action, ManeuverAction::StandOn);
        assert!(!parsed.reasoning.is_empty());
    }

    #[test]
    fn case_insensitive_labels_and_tokens() {
        let text = "situation: HEAD-ON\naction: give way, TURN STARBOARD\nreasoning: \
                    reciprocal courses, both alter to starboard.";
        let parsed = parse_response(text).unwrap();
        assert_eq!(parsed.situation, Situation::HeadOn);
        assert_eq!(parsed.action, ManeuverAction::GiveWay(Turn::Starboard));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(parse_response("").is_err());
    }

    #[test]
    fn missing_fields_are_errors() {
        assert!(parse_response("ACTION: Stand-on / REASONING: ok").is_err());
        assert!(parse_response("SITUATION: crossing / REASONING: ok").is_err());
        assert!(parse_response("SITUATION: crossing / ACTION: Stand-on").is_err());
    }

    #[test]
    fn contradictions_are_errors() {
        // Stand-on with a turn direction.
        assert!(parse_response(
            "SITUATION: crossing / ACTION: Stand-on, turn starboard / REASONING: x"
        )
        .is_err());
        // Both actions at once.
        assert!(parse_response(
            "SITUATION: crossing / ACTION: Give-way or stand-on / REASONING: x"
        )
        .is_err());
        // Both turn directions.
        assert!(parse_response(
            "SITUATION: crossing / ACTION: Give-way, turn port then starboard / REASONING: x"
        )
        .is_err());
    }

    #[test]
    fn unknown_tokens_are_errors() {
        assert!(parse_response("SITUATION: mooring / ACTION: Stand-on / REASONING: x").is_err());
        assert!(parse_response("SITUATION: crossing / ACTION: anchor / REASONING: x").is_err());
        assert!(parse_response("SITUATION: crossing / ACTION: Stand-on / REASONING:   ").is_err());
    }

    #[test]
    fn give_way_without_direction_parses_with_no_turn() {
        let parsed =
            parse_response("SITUATION: overtaking / ACTION: Give-way / REASONING: keep clear")
                .unwrap();
        assert_eq!(parsed.action, ManeuverAction::GiveWay(Turn::None));
    }

    #[test]
    fn reasoning_may_mention_turn_words_without_contradiction() {
        // Only the ACTION segment is scanned for action tokens; the word
        // "port" in the reasoning must not trip the contradiction check.
        let text = "SITUATION: crossing\nACTION: Stand-on\nREASONING: The target will \
                    pass well clear on the port side.";
        let parsed = parse_response(text).unwrap();
        assert_eq!(parsed.action, ManeuverAction::StandOn);
    }

    #[test]
    fn parse_never_panics_on_odd_input() {
        for text in [
            "::::",
            "SITUATION:",
            "SITUATION: ACTION: REASONING:",
            "situation:action:reasoning:",
            "\u{0000}\u{FFFD}",
            "SITUATION: crossing ACTION Give-way REASONING none",
        ] {
            let _ = parse_response(text);
        }
    }
}
