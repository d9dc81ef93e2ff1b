#![no_main]
use ecrnet::separation::SeparationConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = SeparationConfig::from_kv(text) {
        assert_eq!(SeparationConfig::from_kv(&cfg.to_kv()).unwrap(), cfg);
    }
});
