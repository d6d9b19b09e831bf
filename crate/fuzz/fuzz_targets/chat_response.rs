#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(body) = std::str::from_utf8(data) {
        // Wire-shape extraction of choices[0].message.content.
        let _ = colav::llm::extract_content(body);
    }
});
