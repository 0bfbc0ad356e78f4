#![no_main]

use libfuzzer_sys::fuzz_target;
use pomdp_smpc::io::{parse, parse_unvalidated, serialize};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_unvalidated(text);
    if let Ok(model) = parse(text) {
        // Anything accepted must survive a write and re-read unchanged.
        let again = parse(&serialize(&model)).expect("serialized model parses");
        assert_eq!(again.transition, model.transition);
        assert_eq!(again.observation, model.observation);
        assert_eq!(again.stage_cost, model.stage_cost);
        assert_eq!(again.terminal_cost, model.terminal_cost);
    }
});
