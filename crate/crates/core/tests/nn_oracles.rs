mod common;

#[test]
fn backprop_matches_central_differences() {
    let rep = common::gradient_check(50, 1e-5, 2024);
    assert!(rep.plain > 0 && rep.dueling > 0 && rep.normalized > 0 && rep.unnormalized > 0);
    assert!(rep.worst <= 1e-4, "worst relative error {:e}", rep.worst);
}

#[test]
fn dueling_mean_equals_value() {
    let worst = common::dueling_identity(1000, 8);
    assert!(worst <= 1e-9, "{worst:e}");
}
