// Kept in its own test binary: it mutates the process environment.
use rissac::config::{resolve_seed, SEED_ENV};

#[test]
fn environment_variable_overrides_seed() {
    std::env::remove_var(SEED_ENV);
    assert_eq!(resolve_seed(5).unwrap(), 5);
    std::env::set_var(SEED_ENV, "42");
    assert_eq!(resolve_seed(5).unwrap(), 42);
    std::env::set_var(SEED_ENV, "forty-two");
    assert!(resolve_seed(5).is_err());
    std::env::remove_var(SEED_ENV);
}
