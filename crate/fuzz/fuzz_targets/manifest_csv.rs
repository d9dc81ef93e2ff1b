#![no_main]
use ecrnet::instances::{read_manifest, write_manifest};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = read_manifest(text) {
        assert_eq!(read_manifest(&write_manifest(&rows)).unwrap(), rows);
    }
});
