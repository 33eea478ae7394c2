#![no_main]

use areasim::model::NetworkSpec;
use libfuzzer_sys::fuzz_target;

// The network document is the main untrusted input: parsing plus
// validation must never panic, and any document that validates must
// survive a serialize/parse round trip unchanged.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(net) = NetworkSpec::from_json(text) {
        let json = net.to_json().expect("valid network serializes");
        let back = NetworkSpec::from_json(&json).expect("round trip stays valid");
        assert_eq!(net, back);
    }
});
