#![no_main]

use libfuzzer_sys::fuzz_target;
use shearback::harness::RecordRow;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(row) = RecordRow::parse(line) {
        let back = RecordRow::parse(&row.to_line().unwrap()).unwrap();
        assert_eq!(back, row);
    }
});
