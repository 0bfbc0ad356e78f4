#![no_main]

use libfuzzer_sys::fuzz_target;
use pomdp_smpc::io::{parse_policy, write_policy};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = parse_policy(text) {
        let written = write_policy(&file.stack, &file.action_names);
        let again = parse_policy(&written).expect("written policy parses");
        assert_eq!(again, file);
    }
});
