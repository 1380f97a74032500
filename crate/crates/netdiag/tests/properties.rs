//! Property tests over generated topologies and random noisy-OR networks.

use proptest::prelude::*;

use netdiag::bayes::{
    attach_parameters, eliminate_variables, enumerate_joint, Evidence, PriorConfig, VertexState,
};
use netdiag::graph::{build_model, export, import_json, DependencyGraph, Edge, EdgeClass, ExportFormat, Vertex};
use netdiag::templates::{expected_vertex_count, LayerTag, TemplateProfile, VertexKind};
use netdiag::topology::{generate_topology, ControlMode, ElementType, TopologyKind};

fn kind_strategy() -> impl Strategy<Value = (TopologyKind, u32)> {
    prop_oneof![
        (1u32..=64).prop_map(|n| (TopologyKind::Linear, n)),
        (1u32..=64).prop_map(|n| (TopologyKind::Ring, n)),
        (1u32..=64).prop_map(|n| (TopologyKind::Star, n)),
        (1u32..=4, 1u32..=4).prop_map(|(depth, per_leaf)| {
            let leaves = 2u32.pow(depth.saturating_sub(1));
            (TopologyKind::Tree { fanout: 2, depth }, leaves * per_leaf)
        }),
    ]
}

fn mode_strategy() -> impl Strategy<Value = ControlMode> {
    prop_oneof![Just(ControlMode::OutOfBand), Just(ControlMode::InBand)]
}

proptest! {
    /// Generated topologies carry exactly the element-type multiset their
    /// shape implies, and generation is deterministic.
    #[test]
    fn generated_type_multiset_matches_shape(
        (kind, n_hosts) in kind_strategy(),
        mode in mode_strategy(),
    ) {
        let (descriptor, links) = generate_topology(kind, n_hosts, mode).unwrap();
        let (again, links_again) = generate_topology(kind, n_hosts, mode).unwrap();
        prop_assert_eq!(&descriptor, &again);
        prop_assert_eq!(&links, &links_again);

        let switches = descriptor.switches().count();
        let expected_switches = match kind {
            TopologyKind::Linear | TopologyKind::Ring => n_hosts as usize,
            TopologyKind::Star => 1,
            TopologyKind::Tree { depth, .. } => (2usize.pow(depth)) - 1,
        };
        prop_assert_eq!(switches, expected_switches);
        prop_assert_eq!(descriptor.count(ElementType::Controller), 1);
        prop_assert_eq!(descriptor.count(ElementType::Host), n_hosts as usize);
        prop_assert_eq!(descriptor.count(ElementType::AccessLink), n_hosts as usize);

        let control_links = descriptor.count(ElementType::ControlLink);
        match mode {
            ControlMode::OutOfBand => prop_assert_eq!(control_links, switches),
            ControlMode::InBand => prop_assert_eq!(control_links, 1),
        }

        // normalized ids are consecutive from 1 within each type
        for t in ElementType::ALL {
            for (k, e) in descriptor.of_type(t).enumerate() {
                prop_assert_eq!(&e.element_id, &format!("{}_{}", t.prefix(), k + 1));
            }
        }
    }

    /// Built models are sorted DAGs with two inter edges per link, and the
    /// table-compat totals match the closed form where it applies.
    #[test]
    fn built_models_satisfy_graph_invariants(
        (kind, n_hosts) in kind_strategy(),
        mode in mode_strategy(),
    ) {
        let (descriptor, links) = generate_topology(kind, n_hosts, mode).unwrap();
        let graph = build_model(&descriptor, &links, TemplateProfile::DegreeAdaptive).unwrap();
        prop_assert!(graph.sorted);
        prop_assert!(graph.edges.iter().all(|e| e.from < e.to));
        prop_assert_eq!(graph.edge_count(EdgeClass::Inter), 2 * links.entries.len());

        // link vertices are roots with exactly two outgoing inter edges
        for (i, v) in graph.vertices.iter().enumerate() {
            if v.kind == VertexKind::LinkState {
                prop_assert!(graph.parents_of(i).is_empty());
                let out = graph
                    .edges
                    .iter()
                    .filter(|e| e.from == i && e.class == EdgeClass::Inter)
                    .count();
                prop_assert_eq!(out, 2);
            }
        }

        if mode == ControlMode::OutOfBand {
            if let Ok(expected) = expected_vertex_count(kind, n_hosts) {
                let is_table_tree = matches!(kind, TopologyKind::Tree { depth, .. }
                    if n_hosts == 2u32.pow(depth));
                if kind == TopologyKind::Linear || is_table_tree {
                    let table = build_model(&descriptor, &links, TemplateProfile::TableCompat)
                        .unwrap();
                    prop_assert_eq!(table.vertex_count() as u64, expected);
                }
            }
        }
    }

    /// JSON export round-trips losslessly and byte-identically.
    #[test]
    fn export_roundtrip_is_lossless(
        (kind, n_hosts) in kind_strategy(),
        mode in mode_strategy(),
    ) {
        let (descriptor, links) = generate_topology(kind, n_hosts, mode).unwrap();
        let graph = build_model(&descriptor, &links, TemplateProfile::DegreeAdaptive).unwrap();
        let bytes = export(&graph, ExportFormat::Json).unwrap();
        let back = import_json(&bytes).unwrap();
        prop_assert_eq!(&graph, &back);
        prop_assert_eq!(export(&back, ExportFormat::Json).unwrap(), bytes);
    }
}

/// Random small DAG expressed as an upper-triangular edge mask.
fn small_network(n: usize, edge_mask: u64, leaks: &[f64]) -> netdiag::bayes::BayesianNetwork {
    let vertices = (0..n)
        .map(|i| Vertex {
            label: format!("V{i}"),
            kind: VertexKind::Cpu,
            layer: LayerTag::Physical,
            owner_element: format!("V{i}"),
        })
        .collect();
    let mut edges = Vec::new();
    let mut bit = 0;
    for from in 0..n {
        for to in (from + 1)..n {
            if (edge_mask >> (bit % 64)) & 1 == 1 {
                edges.push(Edge {
                    from,
                    to,
                    class: EdgeClass::Inside,
                });
            }
            bit += 1;
        }
    }
    let graph = DependencyGraph {
        vertices,
        edges,
        sorted: true,
    };
    let mut priors = PriorConfig::default();
    for (i, leak) in leaks.iter().enumerate().take(n) {
        priors.overrides.insert(format!("V{i}"), *leak);
    }
    attach_parameters(&graph, &priors).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Variable elimination equals the enumeration oracle on random small
    /// noisy-OR networks with mixed hard and soft evidence.
    #[test]
    fn elimination_matches_enumeration(
        n in 3usize..10,
        edge_mask in any::<u64>(),
        leaks in proptest::collection::vec(0.01f64..0.4, 10),
        hard_mask in any::<u16>(),
        soft_pick in 0usize..10,
        lambda in (0.05f64..1.0, 0.05f64..1.0),
    ) {
        let bn = small_network(n, edge_mask, &leaks);
        let mut evidence = Evidence::new();
        let mut hard = Vec::new();
        // hard-up evidence is always consistent under noisy-OR
        for i in 0..n {
            if (hard_mask >> i) & 1 == 1 {
                evidence.set_hard(&format!("V{i}"), VertexState::Up).unwrap();
                hard.push(i);
            }
        }
        let soft_target = soft_pick % n;
        if !hard.contains(&soft_target) {
            evidence.set_soft(&format!("V{soft_target}"), lambda.0, lambda.1).unwrap();
        }
        let queries: Vec<String> = (0..n)
            .filter(|i| !hard.contains(i))
            .map(|i| format!("V{i}"))
            .collect();
        let query_refs: Vec<&str> = queries.iter().map(String::as_str).collect();
        let exact = enumerate_joint(&bn, &evidence, &query_refs).unwrap();
        let fast = eliminate_variables(&bn, &evidence, &query_refs).unwrap();
        for q in query_refs {
            prop_assert!((exact[q] - fast[q]).abs() <= 1e-9, "{}: {} vs {}", q, exact[q], fast[q]);
        }
    }
}
