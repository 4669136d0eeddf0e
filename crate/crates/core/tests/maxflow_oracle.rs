use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use structcodes_core::network::{multicast_maxflow, P2PEdge, P2PNetwork, DEFAULT_QUANTUM};

/// Minimum over all source-side sets `S ∌ sink` of the capacity leaving `S`.
fn min_cut(net: &P2PNetwork, sink: u32) -> f64 {
    let n = net.nodes.len();
    let pos = |id: u32| net.nodes.iter().position(|&x| x == id).unwrap();
    let (s, t) = (pos(net.source), pos(sink));
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        if mask & (1 << s) == 0 || mask & (1 << t) != 0 {
            continue;
        }
        let cut: f64 = net
            .edges
            .iter()
            .filter(|e| mask & (1 << pos(e.from)) != 0 && mask & (1 << pos(e.to)) == 0)
            .map(|e| e.capacity)
            .sum();
        best = best.min(cut);
    }
    best
}

fn random_network(rng: &mut ChaCha8Rng) -> P2PNetwork {
    let n = rng.random_range(2..=8u32);
    let nodes: Vec<u32> = (1..=n).collect();
    let mut edges = Vec::new();
    let mut id = 1;
    for a in 1..=n {
        for b in 1..=n {
            // cycles and antiparallel pairs are allowed
            if a != b && rng.random_bool(0.35) {
                // multiples of 1/8 survive quantization exactly
                let capacity = rng.random_range(0..=24) as f64 / 8.0;
                edges.push(P2PEdge { id, from: a, to: b, capacity });
                id += 1;
            }
        }
    }
    let receivers = (2..=n).filter(|_| rng.random_bool(0.6)).collect::<Vec<_>>();
    P2PNetwork { nodes, source: 1, receivers: if receivers.is_empty() { vec![n] } else { receivers }, edges }
}

#[test]
fn maxflow_equals_exhaustive_min_cut() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf10);
    for _ in 0..50 {
        let net = random_network(&mut rng);
        let flow = multicast_maxflow(&net, DEFAULT_QUANTUM).unwrap();
        assert_eq!(flow.rounding_loss, 0.0);
        for &(r, f) in &flow.per_receiver {
            assert_eq!(f, min_cut(&net, r), "receiver {r} of {net:?}");
        }
        let bound = net.receivers.iter().map(|&r| min_cut(&net, r)).fold(f64::INFINITY, f64::min);
        assert_eq!(flow.bound, bound);
    }
}

#[test]
fn rounding_loss_stays_within_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf11);
    for _ in 0..50 {
        let mut net = random_network(&mut rng);
        for e in &mut net.edges {
            e.capacity += rng.random_range(0.0..0.1);
        }
        let flow = multicast_maxflow(&net, DEFAULT_QUANTUM).unwrap();
        let tol = net.edges.len() as f64 * DEFAULT_QUANTUM;
        assert!(flow.rounding_loss <= tol + 1e-12);
        for &(r, f) in &flow.per_receiver {
            let exact = min_cut(&net, r);
            assert!(f <= exact + 1e-12 && exact - f <= tol + 1e-12, "flow {f} cut {exact}");
        }
    }
}
