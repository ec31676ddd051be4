#![no_main]
use libfuzzer_sys::fuzz_target;
use sqg_patch::snapshot::{parse_chain, Snapshot};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((time, chain)) = parse_chain(text) {
        let again = Snapshot::from_chain(time, &chain).to_json_string();
        let (t2, c2) = parse_chain(&again).unwrap();
        assert_eq!(time.to_bits(), t2.to_bits());
        assert_eq!(chain, c2);
    }
});
