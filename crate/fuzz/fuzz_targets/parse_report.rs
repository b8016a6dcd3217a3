#![no_main]

use libfuzzer_sys::fuzz_target;
use meshls_core::report::{parse_report_str, report_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = parse_report_str(text) {
        // Accepted reports re-serialize losslessly.
        let rendered = report_to_json(&report);
        let reparsed = parse_report_str(&rendered).expect("rendered report must parse");
        assert_eq!(reparsed.algorithm, report.algorithm);
        assert_eq!(reparsed.k, report.k);
        assert_eq!(reparsed.residual_history, report.residual_history);
        assert_eq!(reparsed.final_x, report.final_x);
        assert_eq!(reparsed.measured, report.measured);
        assert_eq!(report_to_json(&reparsed), rendered);
    }
});
