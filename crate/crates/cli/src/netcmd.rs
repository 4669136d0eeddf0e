//! `network validate | transform | maxflow | code`.

use rand::Rng;
use serde_json::{json, Value};

use structcodes_core::network::{
    construct_network_code, equivalent_p2p, multicast_maxflow, CoefInput, Equivalent, Strategy, DEFAULT_QUANTUM,
};
use structcodes_core::{trial_rng, PrimeField};

use crate::netfile::{NetworkFile, Relabel};
use crate::table::{fmt_num, ResultTable};
use crate::{CliError, PROVENANCE};

/// Violation list; the table is empty for a valid network.
pub fn cmd_validate(file: &NetworkFile) -> Result<ResultTable, CliError> {
    let net = file.to_network()?;
    let violations = net.validate();
    let mut t = ResultTable::new(&["rule", "location"]);
    t.meta("provenance", PROVENANCE);
    t.meta("valid", violations.is_empty().to_string());
    for v in &violations {
        t.push(vec![v.rule.into(), v.location.as_str().into()]);
    }
    Ok(t)
}

fn equivalent(file: &NetworkFile) -> Result<Equivalent, CliError> {
    let net = file.to_network()?;
    equivalent_p2p(&net).map_err(|e| match e {
        structcodes_core::network::NetworkError::ValidationFailed(v) => {
            CliError::Validation(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("\n"))
        }
        other => CliError::guard(other),
    })
}

/// The equivalent point-to-point network as a network file of bit pipes.
pub fn cmd_transform(file: &NetworkFile) -> Result<NetworkFile, CliError> {
    let eq = equivalent(file)?;
    let mut out = NetworkFile::from_p2p(&eq.network);
    out.mac_relabel = eq.mac_relabel.iter().map(|&(mac, node)| Relabel { mac, node }).collect();
    let mut desc = String::from("equivalent point-to-point network");
    if let Some(d) = &file.description {
        desc.push_str(" of: ");
        desc.push_str(d);
    }
    if !eq.clamped.is_empty() {
        let ids: Vec<String> = eq.clamped.iter().map(u32::to_string).collect();
        desc.push_str(&format!("; linear processing rate clamped to 0 for mac {}", ids.join(", ")));
    }
    out.description = Some(desc);
    Ok(out)
}

/// Per-receiver max-flow of the equivalent network.
pub fn cmd_maxflow(file: &NetworkFile, quantum: Option<f64>) -> Result<ResultTable, CliError> {
    let eq = equivalent(file)?;
    let quantum = quantum.unwrap_or(DEFAULT_QUANTUM);
    let flow = multicast_maxflow(&eq.network, quantum).map_err(CliError::guard)?;
    let mut t = ResultTable::new(&["receiver", "max_flow"]);
    t.meta("provenance", PROVENANCE);
    t.meta("quantum", fmt_num(quantum));
    t.meta("multicast_bound", fmt_num(flow.bound));
    t.meta("rounding_loss", fmt_num(flow.rounding_loss));
    t.meta("tolerance", fmt_num(quantum * eq.network.edges.len() as f64));
    for &(r, f) in &flow.per_receiver {
        t.push(vec![(r as u64).into(), f.into()]);
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeOptions {
    pub q: u32,
    /// Symbols per use; defaults to the largest rate the unit pipes support.
    pub rate: Option<usize>,
    /// Capacity of one pipe.
    pub unit: f64,
    pub strategy: Strategy,
    pub max_attempts: usize,
    pub seed: u64,
}

impl Default for CodeOptions {
    fn default() -> Self {
        Self { q: 3, rate: None, unit: 1.0, strategy: Strategy::FlowGuided, max_attempts: 32, seed: 0 }
    }
}

/// Coefficient assignment, transfer matrices and attempt count.
pub fn cmd_code(file: &NetworkFile, opts: &CodeOptions) -> Result<Value, CliError> {
    let eq = equivalent(file)?;
    let field = PrimeField::new(opts.q).map_err(CliError::guard)?;
    let rate = match opts.rate {
        Some(r) => r,
        None => {
            let flow = multicast_maxflow(&eq.network, opts.unit).map_err(CliError::guard)?;
            (flow.bound / opts.unit).round() as usize
        }
    };
    let mut rng = trial_rng(opts.seed, 0);
    let code = construct_network_code(&eq.network, field, rate, opts.unit, opts.strategy, opts.max_attempts, &mut rng)
        .map_err(CliError::guard)?;

    // every receiver must recover random messages exactly
    let mut check_rng = trial_rng(opts.seed, 1);
    let mut verified = true;
    for _ in 0..64 {
        let msg: Vec<u32> = (0..rate).map(|_| check_rng.random_range(0..opts.q)).collect();
        let values = code.propagate(&msg).map_err(CliError::guard)?;
        for r in 0..code.receivers.len() {
            verified &= code.decode(r, &values).map_err(CliError::guard)? == msg;
        }
    }

    let pipes: Vec<Value> = code
        .pipes
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let coeffs: Vec<Value> = code.coefficients[i]
                .iter()
                .map(|&(input, c)| match input {
                    CoefInput::Symbol(s) => json!({"symbol": s, "coefficient": c}),
                    CoefInput::Pipe(q) => json!({"pipe": q, "coefficient": c}),
                })
                .collect();
            json!({"pipe": i, "edge": p.parent, "from": p.from, "to": p.to, "inputs": coeffs, "global_vector": code.kernels[i]})
        })
        .collect();
    let receivers: Vec<Value> = code
        .receivers
        .iter()
        .map(|r| {
            let rows: Vec<Vec<u32>> = (0..r.transfer.rows()).map(|i| r.transfer.row(i).to_vec()).collect();
            json!({"node": r.node, "pipes": r.pipes, "transfer": rows})
        })
        .collect();
    Ok(json!({
        "provenance": PROVENANCE,
        "field": opts.q,
        "rate": rate,
        "unit": opts.unit,
        "strategy": match opts.strategy { Strategy::FlowGuided => "flow-guided", Strategy::Global => "global" },
        "seed": opts.seed,
        "attempts": code.attempts,
        "local_redraws": code.local_redraws,
        "verified": verified,
        "mac_relabel": eq.mac_relabel.iter().map(|&(m, n)| json!({"mac": m, "node": n})).collect::<Vec<_>>(),
        "pipes": pipes,
        "receivers": receivers,
    }))
}
