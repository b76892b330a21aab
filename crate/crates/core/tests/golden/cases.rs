// Rendered exemplars paired with their golden files. Shared by the template
// tests and the acceptance suite through `include!`.

const MOVEMENT_PLATE: &str = "Tom went to the kitchen. Mary walked into the dining room. Tom grabbed a plate. Tom travelled to the living room. Mary moved to the living room. Tom put the plate on the table. Mary grabbed the plate. Mary journeyed to the bedroom.";
const MOVEMENT_SHELF: &str = "Tom was at home. He grabbed an apple and put it on the bookshelf. He then walked to the kitchen and srcub a plate. He went back to bookshelf and put the plate on it.";

fn golden_cases() -> Vec<(&'static str, String, &'static str)> {
    use homeworld::compile::templates as t;
    let join = |(p, c): (String, String)| p + &c;
    let (cp, cc) = t::counting(MOVEMENT_SHELF, "on", "bookshelf", 2, "apple, plate", true);
    vec![
        (
            "plan_generation",
            join(t::plan_generation(
                "watch TV",
                "living room, sofa, TV. The sofa and TV are in the living room.",
                "Walk to living room. Sit on sofa. Watch TV.",
            )),
            include_str!("plan_generation.txt"),
        ),
        ("housework_qa", join(t::housework_qa("watch TV", "TV")), include_str!("housework_qa.txt")),
        (
            "negation_housework_qa",
            join(t::negation_housework_qa("watch TV", "toothbrush")),
            include_str!("negation_housework_qa.txt"),
        ),
        (
            "activity_recognition",
            join(t::activity_recognition("Walk to living room. Sit on sofa. Watch TV.", "watch TV")),
            include_str!("activity_recognition.txt"),
        ),
        (
            "activity_inference",
            join(t::activity_inference("Tom is sitting on the sofa. Tom is facing the TV.", "watch TV")),
            include_str!("activity_inference.txt"),
        ),
        (
            "counting",
            t::few_shot(Some(t::COUNTING_INSTRUCTION), &[], &cp) + &cc,
            include_str!("counting.txt"),
        ),
        (
            "counting_qa",
            join(t::counting_qa(MOVEMENT_SHELF, "on", "bookshelf", 2)),
            include_str!("counting_qa.txt"),
        ),
        (
            "object_path_tracking",
            join(t::object_path_tracking(MOVEMENT_PLATE, "plate", "kitchen, living room, bedroom")),
            include_str!("object_path_tracking.txt"),
        ),
        (
            "object_location",
            join(t::object_location(MOVEMENT_PLATE, "plate", "before", "living room", "kitchen")),
            include_str!("object_location.txt"),
        ),
    ]
}
