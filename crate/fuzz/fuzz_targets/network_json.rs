#![no_main]
use ecrnet::network::Network;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(net) = Network::from_json(text) {
        assert_eq!(Network::from_json(&net.to_json()).unwrap(), net);
    }
});
