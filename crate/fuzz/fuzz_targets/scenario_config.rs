#![no_main]
use libfuzzer_sys::fuzz_target;
use sqg_patch::scenario::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // accepted configs must also pass validation on their own
        if let Ok(cfg) = ScenarioConfig::from_json_str(text) {
            cfg.validate().unwrap();
        }
    }
});
