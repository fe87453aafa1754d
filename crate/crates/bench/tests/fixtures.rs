use rmrs_bench::{doubling, model, BRANCHING, PRIORITY, REGULAR};
use rmrs_core::interpret_rm;

#[test]
fn fixtures_are_valid() {
    for text in [BRANCHING, PRIORITY, REGULAR] {
        let d = model(text);
        assert!(d.regulation.validate(&d.system).is_empty(), "{text}");
    }
    assert_eq!(interpret_rm(&doubling(), 50, 10_000).unwrap(), 100);
}
