#![no_main]
use ecrnet::rational;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(q) = rational::parse(text) {
        assert_eq!(rational::parse(&rational::format(&q)).unwrap(), q);
    }
});
