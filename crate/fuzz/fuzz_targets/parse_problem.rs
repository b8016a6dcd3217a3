#![no_main]

use libfuzzer_sys::fuzz_target;
use meshls_core::io::{format_problem, parse_problem_str};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(problem) = parse_problem_str(text) {
        // Accepted input must survive a write/read cycle bit-exactly.
        let rendered = format_problem(&problem);
        let reparsed = parse_problem_str(&rendered).expect("rendered problem must parse");
        assert_eq!(reparsed.matrix, problem.matrix);
        assert_eq!(reparsed.rhs, problem.rhs);
        assert_eq!(format_problem(&reparsed), rendered);
    }
});
