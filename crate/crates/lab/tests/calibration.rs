//! Recomputes the frozen constants from their documented searches.

use twoweight_lab::calibration::{
    domination_search, freeze, testing_search, C_CAL, C_EMP, C_EMP_WEAK, TESTING_INSTANCES_PER_WINDOW,
};

#[test]
fn domination_constant_is_reproducible() {
    let observed = domination_search(true).unwrap();
    println!("domination: observed {observed}, frozen {C_CAL}");
    assert_eq!(freeze(observed), C_CAL);
}

#[test]
fn testing_constants_are_reproducible() {
    let (strong, weak) = testing_search(true, TESTING_INSTANCES_PER_WINDOW).unwrap();
    println!("testing: observed strong {strong}, weak {weak}; frozen {C_EMP}, {C_EMP_WEAK}");
    assert_eq!(freeze(strong), C_EMP);
    assert_eq!(freeze(weak), C_EMP_WEAK);
}
