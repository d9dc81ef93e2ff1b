#![no_main]
use ecrnet::instances::Instance;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(inst) = Instance::from_json(text) {
        assert_eq!(Instance::from_json(&inst.to_json()).unwrap(), inst);
    }
});
