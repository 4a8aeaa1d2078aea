#![no_main]

use indclust::finite_dist::FiniteJoint;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(d) = FiniteJoint::from_text(text) {
        let total: f64 = d.pmf().iter().sum();
        assert!((total - 1.0).abs() < 1e-6);
        assert!(d.pmf().iter().all(|&p| p >= 0.0));
        if d.pmf().len() <= 1 << 12 {
            let back = FiniteJoint::from_text(&d.to_text()).expect("serialized table parses");
            assert_eq!(back.alphabet_sizes(), d.alphabet_sizes());
        }
    }
});
