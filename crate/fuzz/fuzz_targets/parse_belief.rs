#![no_main]

use libfuzzer_sys::fuzz_target;
use pomdp_smpc::io::parse_belief;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(b) = parse_belief(text) {
        let total: f64 = b.as_slice().iter().sum();
        assert!(b.as_slice().iter().all(|p| p.is_finite() && *p >= 0.0));
        assert!((total - 1.0).abs() < 1e-9);
    }
});
