#![no_main]

use libfuzzer_sys::fuzz_target;
use meshls_core::io::{format_topology, parse_topology_str};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(net) = parse_topology_str(text) {
        // Accepted graphs are connected with consistent derived data.
        assert!(net.d_max() < net.n_nodes() || net.n_nodes() == 1);
        assert!(net.d_avg() <= net.d_max() as f64 + 1e-12);
        if let Some(path) = net.hamiltonian_path() {
            assert_eq!(path.len(), net.n_nodes());
            for pair in path.windows(2) {
                assert!(net.is_edge(pair[0], pair[1]));
            }
        }
        let rendered = format_topology(&net);
        let reparsed = parse_topology_str(&rendered).expect("rendered topology must parse");
        assert_eq!(reparsed.n_nodes(), net.n_nodes());
        assert_eq!(reparsed.edges(), net.edges());
        assert_eq!(format_topology(&reparsed), rendered);
    }
});
