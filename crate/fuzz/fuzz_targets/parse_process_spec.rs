#![no_main]

use indclust::datagen::ProcessSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = ProcessSpec::from_json(text) {
        let again = ProcessSpec::from_json(&spec.to_json()).expect("serialized spec parses");
        assert_eq!(again.to_json(), spec.to_json());
    }
});
