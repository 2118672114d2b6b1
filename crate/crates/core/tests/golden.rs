use feudalgain::domain::Domain;
use feudalgain::rng::from_seed;
use feudalgain::usersim::{sample_goal, UserGoal};

const GOLDEN: &str = include_str!("fixtures/goal_seed7.json");

#[test]
fn seed_seven_goal_matches_golden_file() {
    let d = Domain::cambridge_restaurants();
    let goal = sample_goal(&d.ontology, &d.db, &mut from_seed(7));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        let path = concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/tests/fixtures/goal_seed7.json"
        );
        std::fs::write(path, serde_json::to_string_pretty(&goal).unwrap() + "\n").unwrap();
        return;
    }
    let expected: UserGoal = serde_json::from_str(GOLDEN).unwrap();
    assert_eq!(goal, expected);
    assert!(!d
        .db
        .query(&d.ontology, &goal.constraint_pairs())
        .unwrap()
        .is_empty());
}
