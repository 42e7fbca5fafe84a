use cyins::io::{load_model, model_to_string, parse_model, save_model};
use cyins::testutil::random_model;
use cyins::{bundled, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn bundled_models_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for (name, model) in [("two", bundled::two_state()), ("four", bundled::four_state())] {
        let path = dir.path().join(format!("{name}.model"));
        save_model(&model, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), model);
    }
}

#[test]
fn random_models_round_trip_bit_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let m = random_model(&mut rng, 5, 4, 0.0, 0.999);
        let text = model_to_string(&m);
        let back = parse_model(&text, "mem").unwrap();
        assert_eq!(back, m);
        assert_eq!(model_to_string(&back), text);
    }
}

#[test]
fn malformed_row_count_names_the_action() {
    let text = bundled::TWO_STATE_SOURCE.replacen("[0.6, 0.4]", "[0.6, 0.4], [1.0, 0.0]", 1);
    assert_ne!(text, bundled::TWO_STATE_SOURCE);
    match parse_model(&text, "bad.model") {
        Err(Error::Validation(v)) => {
            assert!(v.issues.iter().any(|i| i.contains("A_H") && i.contains("rows")), "{v}");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn syntax_errors_carry_location() {
    let err = parse_model("discount = \n", "broken.model").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("broken.model"), "{msg}");
    assert!(msg.contains("line 1"), "{msg}");
}
