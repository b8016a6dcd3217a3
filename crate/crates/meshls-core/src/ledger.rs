//! Message-level communication accounting.
//!
//! Cost is counted in scalar-transmissions and time in unit-delays, at round
//! granularity, under the idealized mesh conventions:
//!
//! * a flood costs `payload * N` (every node retransmits once) and a round of
//!   simultaneous floods takes `(N - 1) * max payload` time (single radio per
//!   receiver);
//! * a one-hop broadcast round costs `payload * N` and takes
//!   `payload * d_max` time;
//! * a per-neighbor unicast round costs `payload * sum_deg` and takes
//!   `payload * d_max` time;
//! * a single path hop costs and takes `payload`.
//!
//! One-time setup traffic (the column redistribution) is tracked in a
//! separate counter so the per-algorithm formula checks stay untouched.

use crate::mesh::{MeshError, MeshNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommKind {
    Unicast,
    Broadcast,
    Flood,
}

/// One recorded transmission. `dst` is populated for unicasts only.
#[derive(Debug, Clone, PartialEq)]
pub struct CommEvent {
    pub kind: CommKind,
    pub src: u32,
    pub dst: Option<u32>,
    pub payload_len: u32,
    pub label: LabelId,
    pub iteration: u32,
}

/// Interned round label; resolve through [`CostLedger::label`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelId(u16);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostLedger {
    events: Vec<CommEvent>,
    labels: Vec<String>,
    cost_units: u64,
    time_units: u64,
    setup_cost_units: u64,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cost_units(&self) -> u64 {
        self.cost_units
    }

    pub fn time_units(&self) -> u64 {
        self.time_units
    }

    pub fn setup_cost_units(&self) -> u64 {
        self.setup_cost_units
    }

    pub fn events(&self) -> &[CommEvent] {
        &self.events
    }

    pub fn label(&self, id: LabelId) -> &str {
        &self.labels[id.0 as usize]
    }

    fn intern(&mut self, label: &str) -> LabelId {
        if let Some(pos) = self.labels.iter().position(|l| l == label) {
            return LabelId(pos as u16);
        }
        assert!(self.labels.len() < u16::MAX as usize, "label table overflow");
        self.labels.push(label.to_string());
        LabelId((self.labels.len() - 1) as u16)
    }

    /// Records one synchronized round in which every node floods a message;
    /// `payloads[u]` is the scalar count flooded by node `u`.
    pub fn record_flood_round(
        &mut self,
        net: &MeshNetwork,
        payloads: &[usize],
        label: &str,
        iteration: usize,
    ) -> Result<(), MeshError> {
        let n = net.n_nodes();
        if payloads.len() != n {
            return Err(MeshError::InvalidParameter(format!(
                "flood round needs one payload per node ({} given, {} nodes)",
                payloads.len(),
                n
            )));
        }
        if payloads.contains(&0) {
            return Err(MeshError::InvalidParameter("flood payload must be at least 1".into()));
        }
        let id = self.intern(label);
        let mut max_payload = 0usize;
        for (u, &p) in payloads.iter().enumerate() {
            self.cost_units += (p as u64) * (n as u64);
            max_payload = max_payload.max(p);
            self.events.push(CommEvent {
                kind: CommKind::Flood,
                src: u as u32,
                dst: None,
                payload_len: p as u32,
                label: id,
                iteration: iteration as u32,
            });
        }
        self.time_units += (max_payload as u64) * (n as u64 - 1);
        Ok(())
    }

    /// Records one round in which every node broadcasts `payload_len`
    /// scalars to its one-hop neighbors.
    pub fn record_broadcast_round(
        &mut self,
        net: &MeshNetwork,
        payload_len: usize,
        label: &str,
        iteration: usize,
    ) -> Result<(), MeshError> {
        if payload_len == 0 {
            return Err(MeshError::InvalidParameter("broadcast payload must be at least 1".into()));
        }
        let id = self.intern(label);
        self.cost_units += (payload_len as u64) * (net.n_nodes() as u64);
        self.time_units += (payload_len as u64) * (net.d_max() as u64);
        for u in 0..net.n_nodes() {
            self.events.push(CommEvent {
                kind: CommKind::Broadcast,
                src: u as u32,
                dst: None,
                payload_len: payload_len as u32,
                label: id,
                iteration: iteration as u32,
            });
        }
        Ok(())
    }

    /// Records one round in which every node unicasts a distinct
    /// `payload_len`-scalar message to each of its neighbors.
    pub fn record_neighbor_unicast_round(
        &mut self,
        net: &MeshNetwork,
        payload_len: usize,
        label: &str,
        iteration: usize,
    ) -> Result<(), MeshError> {
        if payload_len == 0 {
            return Err(MeshError::InvalidParameter("unicast payload must be at least 1".into()));
        }
        let id = self.intern(label);
        self.cost_units += (payload_len as u64) * (net.sum_deg() as u64);
        self.time_units += (payload_len as u64) * (net.d_max() as u64);
        for u in 0..net.n_nodes() {
            for &v in net.neighbors(u) {
                self.events.push(CommEvent {
                    kind: CommKind::Unicast,
                    src: u as u32,
                    dst: Some(v as u32),
                    payload_len: payload_len as u32,
                    label: id,
                    iteration: iteration as u32,
                });
            }
        }
        Ok(())
    }

    /// Records a single transfer between adjacent nodes (the incremental
    /// solver's token pass).
    pub fn record_path_hop(
        &mut self,
        net: &MeshNetwork,
        from: usize,
        to: usize,
        payload_len: usize,
        label: &str,
    ) -> Result<(), MeshError> {
        if !net.is_edge(from, to) {
            return Err(MeshError::NotAdjacent { from, to });
        }
        if payload_len == 0 {
            return Err(MeshError::InvalidParameter("hop payload must be at least 1".into()));
        }
        let id = self.intern(label);
        self.cost_units += payload_len as u64;
        self.time_units += payload_len as u64;
        self.events.push(CommEvent {
            kind: CommKind::Unicast,
            src: from as u32,
            dst: Some(to as u32),
            payload_len: payload_len as u32,
            label: id,
            iteration: 0,
        });
        Ok(())
    }

    /// Records a relayed unicast along a shortest path; cost and time scale
    /// with the hop count. Unused by the four solvers, available to setup
    /// phases.
    pub fn record_multihop_unicast(
        &mut self,
        net: &MeshNetwork,
        from: usize,
        to: usize,
        payload_len: usize,
        label: &str,
        iteration: usize,
    ) -> Result<(), MeshError> {
        if payload_len == 0 {
            return Err(MeshError::InvalidParameter("unicast payload must be at least 1".into()));
        }
        let hops = net.hops(from, to) as u64;
        let id = self.intern(label);
        self.cost_units += payload_len as u64 * hops;
        self.time_units += payload_len as u64 * hops;
        self.events.push(CommEvent {
            kind: CommKind::Unicast,
            src: from as u32,
            dst: Some(to as u32),
            payload_len: payload_len as u32,
            label: id,
            iteration: iteration as u32,
        });
        Ok(())
    }

    /// Records a one-time setup flood from `src`. Charged to the setup
    /// counter only; zero payloads are silently skipped (nothing to send).
    pub fn record_setup_flood(&mut self, net: &MeshNetwork, src: usize, payload_len: usize, label: &str) {
        if payload_len == 0 {
            return;
        }
        let id = self.intern(label);
        self.setup_cost_units += (payload_len as u64) * (net.n_nodes() as u64);
        self.events.push(CommEvent {
            kind: CommKind::Flood,
            src: src as u32,
            dst: None,
            payload_len: payload_len as u32,
            label: id,
            iteration: 0,
        });
    }

    /// `(cost, time)` snapshot, handy for per-iteration deltas.
    pub fn totals(&self) -> (u64, u64) {
        (self.cost_units, self.time_units)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_topology, TopologySpec};

    #[test]
    fn flood_round_uniform_payload() {
        let net = build_topology(&TopologySpec::Ring(4)).unwrap();
        let mut ledger = CostLedger::new();
        ledger.record_flood_round(&net, &[16, 16, 16, 16], "t", 1).unwrap();
        assert_eq!(ledger.cost_units(), 256);
        assert_eq!(ledger.time_units(), 48);
    }

    #[test]
    fn flood_round_single_node() {
        let net = build_topology(&TopologySpec::Ring(1)).unwrap();
        let mut ledger = CostLedger::new();
        ledger.record_flood_round(&net, &[9], "t", 1).unwrap();
        assert_eq!(ledger.cost_units(), 9);
        assert_eq!(ledger.time_units(), 0);
    }

    #[test]
    fn flood_round_event_list() {
        let net = build_topology(&TopologySpec::Path(3)).unwrap();
        let mut ledger = CostLedger::new();
        ledger.record_flood_round(&net, &[2, 2, 2], "t", 1).unwrap();
        assert_eq!(ledger.cost_units(), 18);
        assert_eq!(ledger.events().len(), 3);
        assert!(ledger.events().iter().all(|e| e.kind == CommKind::Flood));
    }

    #[test]
    fn flood_round_validates_payloads() {
        let net = build_topology(&TopologySpec::Ring(4)).unwrap();
        let mut ledger = CostLedger::new();
        assert!(ledger.record_flood_round(&net, &[1, 1], "t", 0).is_err());
        assert!(ledger.record_flood_round(&net, &[1, 0, 1, 1], "t", 0).is_err());
    }

    #[test]
    fn broadcast_round_costs() {
        let net = build_topology(&TopologySpec::Ring(4)).unwrap();
        let mut ledger = CostLedger::new();
        ledger.record_broadcast_round(&net, 5, "t", 1).unwrap();
        assert_eq!(ledger.cost_units(), 20);
        assert_eq!(ledger.time_units(), 10);

        let single = build_topology(&TopologySpec::Ring(1)).unwrap();
        let mut ledger = CostLedger::new();
        ledger.record_broadcast_round(&single, 7, "t", 1).unwrap();
        assert_eq!(ledger.cost_units(), 7);
        assert_eq!(ledger.time_units(), 0);
    }

    #[test]
    fn broadcast_round_star_hub_degree() {
        let star = crate::mesh::MeshNetwork::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let mut ledger = CostLedger::new();
        ledger.record_broadcast_round(&star, 3, "t", 1).unwrap();
        assert_eq!(ledger.time_units(), 12);
    }

    #[test]
    fn neighbor_unicast_round_costs() {
        let net = build_topology(&TopologySpec::Ring(4)).unwrap();
        let mut ledger = CostLedger::new();
        ledger.record_neighbor_unicast_round(&net, 5, "t", 1).unwrap();
        assert_eq!(ledger.cost_units(), 40);
        assert_eq!(ledger.time_units(), 10);

        let pair = build_topology(&TopologySpec::Path(2)).unwrap();
        let mut ledger = CostLedger::new();
        ledger.record_neighbor_unicast_round(&pair, 1, "t", 1).unwrap();
        assert_eq!(ledger.cost_units(), 2);
        assert_eq!(ledger.time_units(), 1);
    }

    #[test]
    fn broadcast_plus_unicast_matches_closed_form() {
        // Combined cost of one broadcast and one per-neighbor unicast round
        // with equal payloads is payload * N * (d_avg + 1).
        let net = build_topology(&TopologySpec::Ring(4)).unwrap();
        let n_payload = 6;
        let mut ledger = CostLedger::new();
        ledger.record_broadcast_round(&net, n_payload, "b", 1).unwrap();
        ledger.record_neighbor_unicast_round(&net, n_payload, "u", 1).unwrap();
        let expected = (n_payload * (net.sum_deg() + net.n_nodes())) as u64;
        assert_eq!(ledger.cost_units(), expected);
        assert_eq!(expected, 72); // 6 * 4 * (2 + 1)
    }

    #[test]
    fn path_hop_costs_and_adjacency() {
        let net = build_topology(&TopologySpec::Path(5)).unwrap();
        let mut ledger = CostLedger::new();
        ledger.record_path_hop(&net, 0, 1, 12, "t").unwrap();
        assert_eq!(ledger.cost_units(), 12);
        assert_eq!(ledger.time_units(), 12);
        ledger.record_path_hop(&net, 1, 2, 1, "t").unwrap();
        assert_eq!(ledger.cost_units(), 13);
        assert_eq!(
            ledger.record_path_hop(&net, 0, 4, 1, "t"),
            Err(MeshError::NotAdjacent { from: 0, to: 4 })
        );
    }

    #[test]
    fn full_incremental_pass_cost() {
        // n = 3, so each hop carries n + n^2 = 12 scalars; 4 hops on a
        // 5-node path give 48 cost units in total.
        let net = build_topology(&TopologySpec::Path(5)).unwrap();
        let mut ledger = CostLedger::new();
        for i in 0..4 {
            ledger.record_path_hop(&net, i, i + 1, 12, "t").unwrap();
        }
        assert_eq!(ledger.cost_units(), 48);
        assert_eq!(ledger.time_units(), 48);
    }

    #[test]
    fn multihop_unicast_scales_with_hops() {
        let net = build_topology(&TopologySpec::Path(4)).unwrap();
        let mut ledger = CostLedger::new();
        ledger.record_multihop_unicast(&net, 0, 3, 5, "t", 0).unwrap();
        assert_eq!(ledger.cost_units(), 15);
        assert_eq!(ledger.time_units(), 15);
    }

    #[test]
    fn setup_flood_does_not_touch_main_counters() {
        let net = build_topology(&TopologySpec::Ring(3)).unwrap();
        let mut ledger = CostLedger::new();
        ledger.record_setup_flood(&net, 0, 8, "setup");
        assert_eq!(ledger.setup_cost_units(), 24);
        assert_eq!(ledger.cost_units(), 0);
        assert_eq!(ledger.time_units(), 0);
        ledger.record_setup_flood(&net, 1, 0, "setup");
        assert_eq!(ledger.setup_cost_units(), 24);
        assert_eq!(ledger.events().len(), 1);
    }
}
