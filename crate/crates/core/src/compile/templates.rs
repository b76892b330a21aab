//! Prompt templates. Each function returns `(prompt, completion)`; their
//! concatenation is one complete exemplar.

/// Instruction line preceding counting exemplars.
pub const COUNTING_INSTRUCTION: &str = "Given a sequence of actions in a house, and a question about what items are located in a specific place. Answer the number of items and list the items.";

pub fn plan_generation(activity: &str, condition: &str, plan: &str) -> (String, String) {
    (format!("Q: How to {activity}? Given items include {condition}\nA: "), plan.to_string())
}

pub fn housework_qa(activity: &str, answer: &str) -> (String, String) {
    (format!("Question: To {activity}, a possibly related item could be\nAnswer: "), answer.to_string())
}

pub fn negation_housework_qa(activity: &str, answer: &str) -> (String, String) {
    (format!("Question: To {activity}, an unrelated item could be\nAnswer: "), answer.to_string())
}

pub fn activity_recognition(plan: &str, answer: &str) -> (String, String) {
    (format!("Given a task plan: {plan}\nQuestion: what is the name of this task?\nAnswer: "), answer.to_string())
}

pub fn activity_inference(state: &str, answer: &str) -> (String, String) {
    (format!("{state}\nQuestion: given the above state, a possible activity could be\nAnswer: "), answer.to_string())
}

/// Training counting exemplar (without the instruction line). `preposition`
/// is `on` or `in`; `verbatim` keeps the original answer spellings.
pub fn counting(
    movement: &str,
    preposition: &str,
    location: &str,
    number: usize,
    items: &str,
    verbatim: bool,
) -> (String, String) {
    let (there, items_word) = if verbatim { ("Ther", "itmes") } else { ("There", "items") };
    (
        format!("Q: {movement} How many items are there {preposition} the {location}?\nA: "),
        format!("{there} are {number} {items_word} {preposition} the {location}. They are {items}"),
    )
}

pub fn counting_qa(movement: &str, preposition: &str, location: &str, number: usize) -> (String, String) {
    (format!("Q: {movement} How many items are there {preposition} the {location}?\nA: "), number.to_string())
}

pub fn object_path_tracking(movement: &str, object: &str, path: &str) -> (String, String) {
    (
        format!("{movement}\nQuestion: What is the order of the rooms where the {object} appeared?\nAnswer: "),
        path.to_string(),
    )
}

pub fn object_location(
    movement: &str,
    object: &str,
    preposition: &str,
    reference_room: &str,
    answer: &str,
) -> (String, String) {
    (
        format!("{movement}\nQuestion: Where is the {object} {preposition} the {reference_room}?\nAnswer: "),
        answer.to_string(),
    )
}

/// Separator between exemplars in a few-shot prompt.
pub const SHOT_SEPARATOR: &str = "\n\n";

/// Assembles a few-shot prompt: optional instruction, complete shots, then
/// the query prompt.
pub fn few_shot(instruction: Option<&str>, shots: &[String], query: &str) -> String {
    let mut parts: Vec<&str> = Vec::new();
    if let Some(i) = instruction {
        parts.push(i);
    }
    parts.extend(shots.iter().map(String::as_str));
    parts.push(query);
    parts.join(SHOT_SEPARATOR)
}
