#![no_main]
use ecrnet::model::BilinearSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = BilinearSet::from_json(text) {
        let back = BilinearSet::from_json(&s.to_json()).unwrap();
        assert_eq!(back.net(), s.net());
        assert_eq!(back.triples(), s.triples());
    }
});
