//! JSON network description files.
//!
//! ```json
//! {
//!   "description": "optional free text",
//!   "link_convention": "bit_pipe",
//!   "nodes": [1, 2, 3],
//!   "source": 1,
//!   "receivers": [3],
//!   "macs": [
//!     {"id": 1, "kind": "gaussian", "noise": 1.0, "power": 10.0},
//!     {"id": 2, "kind": "finite_field", "q": 2, "noise": [0.89, 0.11], "coefficients": [1, 1]}
//!   ],
//!   "edges_nn": [
//!     {"id": 1, "from": 1, "to": 2, "kind": "bit_pipe", "capacity": 1.0},
//!     {"id": 2, "from": 1, "to": 3, "kind": "gaussian", "noise": 1.0, "power": 10.0},
//!     {"id": 3, "from": 2, "to": 3, "kind": "finite_field", "q": 3, "noise": [0.9, 0.05, 0.05]}
//!   ],
//!   "edges_nm": [{"id": 4, "from": 2, "to": 1}],
//!   "edges_mn": [{"id": 5, "from": 1, "to": 3}]
//! }
//! ```
//!
//! Node and MAC ids are separate namespaces; edge ids are unique over all three
//! edge lists. A MAC's inputs are the `edges_nm` entries pointing at it, taken in
//! increasing edge id (the order of `coefficients`). `link_convention` records
//! whether links are noiseless bit pipes (`bit_pipe`), noisy channels converted
//! to capacity (`noisy`), or a mix. Transformed networks also carry
//! `mac_relabel`, the node id each MAC became.

use serde::{Deserialize, Serialize};

use structcodes_core::network::{Link, MacInput, MacKind, MacNetwork, MacOutput, MacSpec, NodeEdge, P2PNetwork};
use structcodes_core::Pmf;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MacJson {
    Gaussian {
        id: u32,
        noise: f64,
        power: f64,
    },
    FiniteField {
        id: u32,
        q: u32,
        noise: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        coefficients: Vec<u32>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EdgeJson {
    BitPipe { id: u32, from: u32, to: u32, capacity: f64 },
    Gaussian { id: u32, from: u32, to: u32, noise: f64, power: f64 },
    FiniteField { id: u32, from: u32, to: u32, q: u32, noise: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlainEdge {
    pub id: u32,
    pub from: u32,
    pub to: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Relabel {
    pub mac: u32,
    pub node: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_convention: Option<String>,
    pub nodes: Vec<u32>,
    pub source: u32,
    pub receivers: Vec<u32>,
    #[serde(default)]
    pub macs: Vec<MacJson>,
    #[serde(default)]
    pub edges_nn: Vec<EdgeJson>,
    #[serde(default)]
    pub edges_nm: Vec<PlainEdge>,
    #[serde(default)]
    pub edges_mn: Vec<PlainEdge>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mac_relabel: Vec<Relabel>,
}

fn pmf(noise: &[f64], at: String) -> Result<Pmf, CliError> {
    Pmf::new(noise.to_vec()).map_err(|e| CliError::Validation(format!("{at}: noise distribution: {e}")))
}

impl NetworkFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(CliError::from_json)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        Self::parse(&crate::read_file(path)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    /// Build the library model. Malformed noise distributions are reported here;
    /// structural problems are left to [`MacNetwork::validate`].
    pub fn to_network(&self) -> Result<MacNetwork, CliError> {
        let macs = self
            .macs
            .iter()
            .map(|m| {
                Ok(match m {
                    MacJson::Gaussian { id, noise, power } => {
                        MacSpec { id: *id, kind: MacKind::Gaussian { noise: *noise, power: *power } }
                    }
                    MacJson::FiniteField { id, q, noise, coefficients } => MacSpec {
                        id: *id,
                        kind: MacKind::FiniteField {
                            q: *q,
                            coefficients: coefficients.clone(),
                            noise: pmf(noise, format!("mac {id}"))?,
                        },
                    },
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let edges_nn = self
            .edges_nn
            .iter()
            .map(|e| {
                Ok(match e {
                    EdgeJson::BitPipe { id, from, to, capacity } => {
                        NodeEdge { id: *id, from: *from, to: *to, link: Link::BitPipe { capacity: *capacity } }
                    }
                    EdgeJson::Gaussian { id, from, to, noise, power } => {
                        NodeEdge { id: *id, from: *from, to: *to, link: Link::Gaussian { noise: *noise, power: *power } }
                    }
                    EdgeJson::FiniteField { id, from, to, q, noise } => NodeEdge {
                        id: *id,
                        from: *from,
                        to: *to,
                        link: Link::FiniteField { q: *q, noise: pmf(noise, format!("edge {id}"))? },
                    },
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(MacNetwork {
            nodes: self.nodes.clone(),
            source: self.source,
            receivers: self.receivers.clone(),
            macs,
            edges_nn,
            edges_nm: self.edges_nm.iter().map(|e| MacInput { id: e.id, from: e.from, to: e.to }).collect(),
            edges_mn: self.edges_mn.iter().map(|e| MacOutput { id: e.id, from: e.from, to: e.to }).collect(),
        })
    }

    pub fn from_network(net: &MacNetwork) -> Self {
        Self {
            description: None,
            link_convention: None,
            nodes: net.nodes.clone(),
            source: net.source,
            receivers: net.receivers.clone(),
            macs: net
                .macs
                .iter()
                .map(|m| match &m.kind {
                    MacKind::Gaussian { noise, power } => MacJson::Gaussian { id: m.id, noise: *noise, power: *power },
                    MacKind::FiniteField { q, coefficients, noise } => MacJson::FiniteField {
                        id: m.id,
                        q: *q,
                        noise: noise.probs().to_vec(),
                        coefficients: coefficients.clone(),
                    },
                })
                .collect(),
            edges_nn: net
                .edges_nn
                .iter()
                .map(|e| match &e.link {
                    Link::BitPipe { capacity } => EdgeJson::BitPipe { id: e.id, from: e.from, to: e.to, capacity: *capacity },
                    Link::Gaussian { noise, power } => {
                        EdgeJson::Gaussian { id: e.id, from: e.from, to: e.to, noise: *noise, power: *power }
                    }
                    Link::FiniteField { q, noise } => {
                        EdgeJson::FiniteField { id: e.id, from: e.from, to: e.to, q: *q, noise: noise.probs().to_vec() }
                    }
                })
                .collect(),
            edges_nm: net.edges_nm.iter().map(|e| PlainEdge { id: e.id, from: e.from, to: e.to }).collect(),
            edges_mn: net.edges_mn.iter().map(|e| PlainEdge { id: e.id, from: e.from, to: e.to }).collect(),
            mac_relabel: Vec::new(),
        }
    }

    /// A point-to-point network as a file of bit pipes.
    pub fn from_p2p(p2p: &P2PNetwork) -> Self {
        Self {
            description: None,
            link_convention: Some("bit_pipe".into()),
            nodes: p2p.nodes.clone(),
            source: p2p.source,
            receivers: p2p.receivers.clone(),
            macs: Vec::new(),
            edges_nn: p2p
                .edges
                .iter()
                .map(|e| EdgeJson::BitPipe { id: e.id, from: e.from, to: e.to, capacity: e.capacity })
                .collect(),
            edges_nm: Vec::new(),
            edges_mn: Vec::new(),
            mac_relabel: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use structcodes_core::network::{binary_butterfly, gaussian_butterfly};

    #[test]
    fn round_trips() {
        for net in [binary_butterfly(0.5, 0.11).unwrap(), gaussian_butterfly(3.0, 1.0)] {
            let file = NetworkFile::from_network(&net);
            let back = NetworkFile::parse(&file.to_json()).unwrap().to_network().unwrap();
            assert_eq!(back, net);
        }
    }

    #[test]
    fn rejects_unknown_keys_and_bad_pmfs() {
        let e = NetworkFile::parse(r#"{"nodes": [1], "source": 1, "receivers": [], "extra": 1}"#).unwrap_err();
        assert!(matches!(e, CliError::Parse { .. }));
        let f = NetworkFile::parse(
            r#"{"nodes": [1, 2], "source": 1, "receivers": [2],
                "edges_nn": [{"id": 1, "from": 1, "to": 2, "kind": "finite_field", "q": 2, "noise": [0.5, 0.6]}]}"#,
        )
        .unwrap();
        assert!(matches!(f.to_network(), Err(CliError::Validation(_))));
    }
}
