//! The 36-verb action vocabulary and its text templates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::state::{AgentId, ObjectId};
use super::WorldError;

macro_rules! verbs {
    ($($verb:ident => $name:literal, $arity:literal;)*) => {
        /// Atomic action verbs, in table order.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum Verb {
            $($verb,)*
        }

        impl Verb {
            pub const ALL: &'static [Verb] = &[$(Verb::$verb,)*];

            /// Bracketed name as used in action scripts, without brackets.
            pub fn name(self) -> &'static str {
                match self {
                    $(Verb::$verb => $name,)*
                }
            }

            pub fn arity(self) -> usize {
                match self {
                    $(Verb::$verb => $arity,)*
                }
            }
        }

        impl FromStr for Verb {
            type Err = WorldError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(Verb::$verb),)*
                    other => Err(WorldError::UnknownVerb(other.to_string())),
                }
            }
        }
    };
}

verbs! {
    Find => "Find", 1;
    Walk => "Walk", 1;
    Run => "Run", 1;
    Sit => "Sit", 1;
    StandUp => "StandUp", 0;
    Grab => "Grab", 1;
    Open => "Open", 1;
    Close => "Close", 1;
    Put => "Put", 2;
    PutIn => "PutIn", 2;
    SwitchOn => "SwitchOn", 1;
    SwitchOff => "SwitchOff", 1;
    Drink => "Drink", 1;
    TurnTo => "TurnTo", 1;
    LookAt => "LookAt", 1;
    Wipe => "Wipe", 1;
    PutOn => "PutOn", 1;
    PutOff => "PutOff", 1;
    Greet => "Greet", 1;
    Drop => "Drop", 1;
    Touch => "Touch", 1;
    Lie => "Lie", 1;
    Pour => "Pour", 2;
    Type => "Type", 1;
    Watch => "Watch", 1;
    Move => "Move", 1;
    Wash => "Wash", 1;
    Rinse => "Rinse", 1;
    Scrub => "Scrub", 1;
    Squeeze => "Squeeze", 1;
    PlugIn => "PlugIn", 1;
    PlugOut => "PlugOut", 1;
    Cut => "Cut", 1;
    Eat => "Eat", 1;
    Sleep => "Sleep", 0;
    WakeUp => "WakeUp", 0;
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Verb {
    /// Text template; `{0}` and `{1}` are the argument slots.
    pub fn template(self) -> &'static str {
        match self {
            Verb::Find => "Find {0}",
            Verb::Walk => "Walk to {0}",
            Verb::Run => "Run to {0}",
            Verb::Sit => "Sit on {0}",
            Verb::StandUp => "Stand up",
            Verb::Grab => "Grab {0}",
            Verb::Open => "Open {0}",
            Verb::Close => "Close {0}",
            Verb::Put => "Put {0} on {1}",
            Verb::PutIn => "Put {0} in {1}",
            Verb::SwitchOn => "Turn on {0}",
            Verb::SwitchOff => "Turn off {0}",
            Verb::Drink => "Drink {0}",
            Verb::TurnTo => "Turn to {0}",
            Verb::LookAt => "Look at {0}",
            Verb::Wipe => "Wipe {0}",
            Verb::PutOn => "Put on {0}",
            Verb::PutOff => "Put off {0}",
            Verb::Greet => "Greet {0}",
            Verb::Drop => "Drop {0}",
            Verb::Touch => "Touch {0}",
            Verb::Lie => "Lie on {0}",
            Verb::Pour => "Pour {0} into {1}",
            Verb::Type => "Type {0}",
            Verb::Watch => "Watch {0}",
            Verb::Move => "Move {0}",
            Verb::Wash => "Wash {0}",
            Verb::Rinse => "Rinse {0}",
            Verb::Scrub => "Scrub {0}",
            Verb::Squeeze => "Squeeze {0}",
            Verb::PlugIn => "Plug in {0}",
            Verb::PlugOut => "Plug out {0}",
            Verb::Cut => "Cut {0}",
            Verb::Eat => "Eat {0}",
            Verb::Sleep => "Sleep",
            Verb::WakeUp => "Wake up",
        }
    }

    /// Fills the template with argument names.
    pub fn render(self, args: &[&str]) -> String {
        let mut out = self.template().to_string();
        for (i, a) in args.iter().enumerate() {
            out = out.replace(&format!("{{{i}}}"), a);
        }
        out
    }

    /// Verbs that move the acting agent between rooms.
    pub fn is_movement(self) -> bool {
        matches!(self, Verb::Walk | Verb::Run | Verb::Find)
    }
}

/// One executable step: `<char{agent}> [Verb] <arg> (id) ...`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionStep {
    pub agent: AgentId,
    pub verb: Verb,
    pub args: Vec<ObjectId>,
}

impl ActionStep {
    pub fn new(agent: AgentId, verb: Verb, args: impl Into<Vec<ObjectId>>) -> Self {
        ActionStep { agent, verb, args: args.into() }
    }

    pub fn nullary(agent: AgentId, verb: Verb) -> Self {
        Self::new(agent, verb, Vec::new())
    }

    pub fn unary(agent: AgentId, verb: Verb, target: ObjectId) -> Self {
        Self::new(agent, verb, vec![target])
    }

    pub fn binary(agent: AgentId, verb: Verb, first: ObjectId, second: ObjectId) -> Self {
        Self::new(agent, verb, vec![first, second])
    }

    pub fn arity_ok(&self) -> bool {
        self.args.len() == self.verb.arity()
    }

    /// Script form, e.g. `<char0> [PutIn] <3> <7>` with raw ids.
    pub fn script(&self) -> String {
        let mut s = format!("<char{}> [{}]", self.agent.0, self.verb);
        for a in &self.args {
            s.push_str(&format!(" ({})", a.0));
        }
        s
    }
}

/// Inverts [`Verb::render`]: recovers the verb and argument class names from
/// one rendered step (without a trailing period).
pub fn parse_action_text(text: &str) -> Option<(Verb, Vec<String>)> {
    let text = text.trim();
    let one = |rest: &str| Some(vec![rest.to_string()]);
    let split2 = |rest: &str, sep: &str| rest.split_once(sep).map(|(a, b)| vec![a.to_string(), b.to_string()]);
    match text {
        "Stand up" => return Some((Verb::StandUp, vec![])),
        "Sleep" => return Some((Verb::Sleep, vec![])),
        "Wake up" => return Some((Verb::WakeUp, vec![])),
        _ => {}
    }
    let prefixed: &[(&str, Verb)] = &[
        ("Walk to ", Verb::Walk),
        ("Run to ", Verb::Run),
        ("Sit on ", Verb::Sit),
        ("Lie on ", Verb::Lie),
        ("Turn on ", Verb::SwitchOn),
        ("Switch on ", Verb::SwitchOn),
        ("Turn off ", Verb::SwitchOff),
        ("Switch off ", Verb::SwitchOff),
        ("Turn to ", Verb::TurnTo),
        ("Look at ", Verb::LookAt),
        ("Put on ", Verb::PutOn),
        ("Put off ", Verb::PutOff),
        ("Plug in ", Verb::PlugIn),
        ("Plug out ", Verb::PlugOut),
    ];
    for (prefix, verb) in prefixed {
        if let Some(rest) = text.strip_prefix(prefix) {
            return Some((*verb, one(rest)?));
        }
    }
    if let Some(rest) = text.strip_prefix("Pour ") {
        return Some((Verb::Pour, split2(rest, " into ")?));
    }
    if let Some(rest) = text.strip_prefix("Put ") {
        // " in " is checked first: no catalog name contains it, while " on "
        // could in principle appear inside a multi-word name.
        if let Some(args) = split2(rest, " in ") {
            return Some((Verb::PutIn, args));
        }
        return Some((Verb::Put, split2(rest, " on ")?));
    }
    let (head, rest) = text.split_once(' ')?;
    let verb = match head {
        "Find" => Verb::Find,
        "Grab" => Verb::Grab,
        "Open" => Verb::Open,
        "Close" => Verb::Close,
        "Drink" => Verb::Drink,
        "Wipe" => Verb::Wipe,
        "Greet" => Verb::Greet,
        "Drop" => Verb::Drop,
        "Touch" => Verb::Touch,
        "Type" => Verb::Type,
        "Watch" => Verb::Watch,
        "Move" => Verb::Move,
        "Wash" => Verb::Wash,
        "Rinse" => Verb::Rinse,
        "Scrub" => Verb::Scrub,
        "Squeeze" => Verb::Squeeze,
        "Cut" => Verb::Cut,
        "Eat" => Verb::Eat,
        _ => return None,
    };
    Some((verb, one(rest)?))
}

/// Splits a rendered plan ("A. B. C.") into step texts.
pub fn split_plan_text(plan: &str) -> Vec<&str> {
    plan.trim().trim_end_matches('.').split(". ").map(str::trim).filter(|s| !s.is_empty()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_six_verbs() {
        assert_eq!(Verb::ALL.len(), 36);
        let zero: Vec<_> = Verb::ALL.iter().filter(|v| v.arity() == 0).collect();
        assert_eq!(zero, [&Verb::StandUp, &Verb::Sleep, &Verb::WakeUp]);
        let two: Vec<_> = Verb::ALL.iter().filter(|v| v.arity() == 2).collect();
        assert_eq!(two, [&Verb::Put, &Verb::PutIn, &Verb::Pour]);
    }

    #[test]
    fn table_templates() {
        assert_eq!(Verb::Sit.render(&["sofa"]), "Sit on sofa");
        assert_eq!(Verb::PutIn.render(&["plate", "dishwasher"]), "Put plate in dishwasher");
        assert_eq!(Verb::Pour.render(&["milk", "cup"]), "Pour milk into cup");
        assert_eq!(Verb::Walk.render(&["living room"]), "Walk to living room");
        assert_eq!(Verb::StandUp.render(&[]), "Stand up");
    }

    #[test]
    fn verb_names_round_trip() {
        for v in Verb::ALL {
            assert_eq!(v.name().parse::<Verb>().unwrap(), *v);
        }
    }

    #[test]
    fn parse_inverts_every_template() {
        for v in Verb::ALL {
            let names: Vec<&str> = ["coffee maker", "kitchen counter"][..v.arity()].to_vec();
            let text = v.render(&names);
            let (verb, args) = parse_action_text(&text).unwrap_or_else(|| panic!("{text}"));
            assert_eq!(verb, *v, "{text}");
            assert_eq!(args, names);
        }
    }

    #[test]
    fn split_plan() {
        assert_eq!(
            split_plan_text("Walk to living room. Sit on sofa. Watch TV."),
            ["Walk to living room", "Sit on sofa", "Watch TV"]
        );
    }
}
