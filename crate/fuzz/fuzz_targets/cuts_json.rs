#![no_main]
use ecrnet::ecr::CutFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = CutFile::from_json(text) {
        assert_eq!(CutFile::from_json(&f.to_json()).unwrap(), f);
    }
});
