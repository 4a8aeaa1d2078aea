#![no_main]

use indclust::io::{read_series_csv, write_series_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = read_series_csv(data) {
        // anything accepted must survive a write/read round trip unchanged
        let mut buf = Vec::new();
        write_series_csv(&s, &mut buf).expect("write succeeds");
        let back = read_series_csv(&buf[..]).expect("written CSV parses");
        assert_eq!(back, s);
    }
});
