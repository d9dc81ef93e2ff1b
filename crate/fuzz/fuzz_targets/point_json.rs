#![no_main]
use ecrnet::model::Point;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = Point::from_json(text) {
        assert_eq!(Point::from_json(&p.to_json()).unwrap(), p);
    }
});
