#![no_main]

use areasim_cli::config::parse_config;
use libfuzzer_sys::fuzz_target;

// Experiment configs are user-written JSON; parsing plus semantic
// validation must reject bad documents with an error, never a panic.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_config(text);
});
