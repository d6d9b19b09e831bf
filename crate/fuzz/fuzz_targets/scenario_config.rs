#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // Parsing plus every config invariant check; never panics.
        let _ = colav::scenario::ScenarioConfig::from_json_str(text);
    }
});
