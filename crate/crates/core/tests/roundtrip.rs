mod common;

use proptest::prelude::*;
use tsmon::{bundled, parse_protocol, serialize_protocol};

fn round_trip(src: &str) {
    let spec = parse_protocol(src).unwrap();
    let printed = serialize_protocol(&spec);
    let again = parse_protocol(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
    assert_eq!(again, spec, "{printed}");
    assert_eq!(serialize_protocol(&again), printed);
}

#[test]
fn bundled_specs_round_trip() {
    for (_, src) in bundled::ALL {
        round_trip(src);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn generated_specs_round_trip(seed in any::<u64>(), well_formed in any::<bool>()) {
        round_trip(&common::gen_spec(seed, well_formed));
    }
}
