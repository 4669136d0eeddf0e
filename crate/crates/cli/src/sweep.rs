//! Closed-form rate sweeps.
//!
//! ```json
//! {"family": "relay-sum-diff", "variable": "snr", "min": 0.1, "max": 20,
//!  "points": 200, "spacing": "linear", "params": {"noise": 1}}
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use structcodes_core::infotheory::binary_entropy;
use structcodes_core::rates::{
    butterfly_binary_rates, butterfly_gaussian_finite_ell, butterfly_gaussian_rates, gaussian_sum_distortions,
    general_network_bound, linear_processing_rates, linear_processing_threshold, relay_crossover_snr,
    sum_difference_rates, NetworkCounts,
};

use crate::config::{OutputSpec, Params};
use crate::table::{fmt_num, Cell, ResultTable};
use crate::{CliError, PROVENANCE};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variable: Option<String>,
    pub min: f64,
    pub max: f64,
    #[serde(default = "one")]
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

fn one() -> usize {
    1
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(CliError::from_json)
    }
}

pub const FAMILIES: &[&str] = &[
    "relay-sum-diff",
    "butterfly-binary",
    "butterfly-gaussian",
    "linear-processing",
    "gaussian-sum",
    "korner-marton",
    "general-network",
];

pub const PRESETS: &[&str] = &["figure4"];

/// Relay rates against SNR with `R₀ = ½ log(1 + SNR)`.
pub fn preset(name: &str) -> Result<SweepSpec, CliError> {
    match name {
        "figure4" => Ok(SweepSpec {
            family: "relay-sum-diff".into(),
            variable: Some("snr".into()),
            min: 0.1,
            max: 20.0,
            points: 200,
            spacing: Spacing::Linear,
            params: BTreeMap::new(),
            output: None,
        }),
        other => Err(CliError::Config(format!("unknown preset '{other}'; expected one of {}", PRESETS.join(", ")))),
    }
}

/// Variables and parameter defaults of each family. A parameter that is also the
/// sweep variable is overridden point by point.
fn family(name: &str) -> Option<(&'static [&'static str], &'static [(&'static str, f64)])> {
    Some(match name {
        // r0_tied = 1 sets R₀ = ½ log(1 + SNR); ell = 0 omits the finite-ℓ column
        "relay-sum-diff" => (&["snr"], &[("snr", 1.0), ("noise", 1.0), ("r0", 1.0), ("r0_tied", 1.0), ("ell", 0.0)]),
        "butterfly-binary" => (&["p", "c"], &[("p", 0.11), ("c", 1.0)]),
        "butterfly-gaussian" => (&["snr"], &[("snr", 1.0), ("noise", 1.0), ("ell", 0.0)]),
        "linear-processing" => (&["snr"], &[("snr", 1.0), ("noise", 1.0), ("j", 2.0)]),
        "gaussian-sum" => (&["snr"], &[("snr", 1.0), ("noise", 1.0), ("users", 2.0), ("sigma_s2", 1.0), ("ell", 2.0)]),
        "korner-marton" => (&["p"], &[("p", 0.05)]),
        "general-network" => (
            &["ell", "lambda"],
            &[
                ("ell", 10.0),
                ("lambda", 0.5),
                ("nodes", 6.0),
                ("macs", 1.0),
                ("links", 9.0),
                ("max_capacity", 1.0),
                ("q", 2.0),
                ("sources", 1.0),
            ],
        ),
        _ => return None,
    })
}

fn grid(spec: &SweepSpec) -> Result<Vec<f64>, CliError> {
    if !(spec.min.is_finite() && spec.max.is_finite()) {
        return Err(CliError::Config("sweep range must be finite".into()));
    }
    if spec.min > spec.max {
        return Err(CliError::Config(format!("empty sweep range: min {} > max {}", spec.min, spec.max)));
    }
    if spec.points == 0 {
        return Err(CliError::Config("a sweep needs at least one point".into()));
    }
    if spec.points == 1 {
        return Ok(vec![spec.min]);
    }
    let last = (spec.points - 1) as f64;
    match spec.spacing {
        Spacing::Linear => Ok((0..spec.points).map(|i| spec.min + (spec.max - spec.min) * i as f64 / last).collect()),
        Spacing::Log => {
            if spec.min <= 0.0 {
                return Err(CliError::Config("log spacing needs a positive range".into()));
            }
            let (a, b) = (spec.min.ln(), spec.max.ln());
            Ok((0..spec.points).map(|i| (a + (b - a) * i as f64 / last).exp()).collect())
        }
    }
}

fn opt_ell(p: &Params) -> Result<Option<usize>, CliError> {
    let ell = p.count("ell")?;
    Ok((ell > 0).then_some(ell))
}

/// Evaluates one family over the sweep grid.
pub fn cmd_rates(spec: &SweepSpec) -> Result<ResultTable, CliError> {
    let (vars, defaults) = family(&spec.family).ok_or_else(|| {
        CliError::Config(format!("unknown rate family '{}'; expected one of {}", spec.family, FAMILIES.join(", ")))
    })?;
    let var = spec.variable.clone().unwrap_or_else(|| vars[0].to_string());
    if !vars.contains(&var.as_str()) {
        return Err(CliError::Config(format!("'{var}' cannot be swept for {}; expected one of {}", spec.family, vars.join(", "))));
    }
    if spec.params.contains_key(&var) {
        return Err(CliError::Config(format!("'{var}' is the sweep variable and cannot also be a fixed parameter")));
    }
    let base = Params::resolve(&spec.params, defaults, &spec.family)?;
    let xs = grid(spec)?;

    let echo = {
        let mut s = spec.clone();
        s.variable = Some(var.clone());
        s.output = None;
        s.params = base.map().iter().filter(|(k, _)| **k != var).map(|(k, v)| (k.clone(), *v)).collect();
        serde_json::to_string(&s).expect("serializable")
    };
    let at = |x: f64| -> Result<Params, CliError> {
        let mut m = base.map().clone();
        m.insert(var.clone(), x);
        Params::resolve(&m, defaults, &spec.family)
    };
    let g = CliError::guard;

    let mut names: Vec<&str> = vec![var.as_str()];
    let mut rows: Vec<Vec<Cell>> = Vec::new();
    let mut extra_meta: Vec<(&str, String)> = Vec::new();
    match spec.family.as_str() {
        "relay-sum-diff" => {
            let ell = opt_ell(&base)?;
            names.extend(["r_lat", "r_df", "r_cf"]);
            if ell.is_some() {
                names.push("r_lat_finite_ell");
            }
            let tied = base.f("r0_tied") != 0.0;
            for &x in &xs {
                let p = at(x)?;
                let noise = p.f("noise");
                let r0 = if tied { 0.5 * (1.0 + x).log2() } else { p.f("r0") };
                let r = sum_difference_rates(x * noise, noise, r0, ell).map_err(g)?;
                let mut row = vec![x.into(), r.r_lat.into(), r.r_df.into(), r.r_cf.into()];
                if ell.is_some() {
                    row.push(r.r_lat_finite_ell.into());
                }
                rows.push(row);
            }
            if tied {
                match relay_crossover_snr(xs[0], xs[xs.len() - 1]) {
                    Ok(s) => extra_meta.push(("crossover_snr", fmt_num(s))),
                    Err(_) => extra_meta.push(("crossover_snr", "not in range".into())),
                }
            }
        }
        "butterfly-binary" => {
            names.extend(["capacity", "r_df", "r_cf"]);
            for &x in &xs {
                let p = at(x)?;
                let r = butterfly_binary_rates(p.f("c"), p.f("p")).map_err(g)?;
                rows.push(vec![x.into(), r.capacity.into(), r.r_df.into(), r.r_cf.into()]);
            }
        }
        "butterfly-gaussian" => {
            let ell = opt_ell(&base)?;
            names.extend(["r_struct", "r_df", "r_cf", "r3_lp", "r3_df"]);
            if ell.is_some() {
                names.push("r_struct_finite_ell");
            }
            for &x in &xs {
                let noise = at(x)?.f("noise");
                let r = butterfly_gaussian_rates(x * noise, noise).map_err(g)?;
                let mut row = vec![x.into(), r.r_struct.into(), r.r_df.into(), r.r_cf.into(), r.r3_lp.into(), r.r3_df.into()];
                if let Some(l) = ell {
                    row.push(butterfly_gaussian_finite_ell(x * noise, noise, l).map_err(g)?.into());
                }
                rows.push(row);
            }
        }
        "linear-processing" => {
            names.extend(["r_lp", "r_df"]);
            let j = base.count("j")?;
            for &x in &xs {
                let noise = at(x)?.f("noise");
                let r = linear_processing_rates(j, x * noise, noise).map_err(g)?;
                rows.push(vec![x.into(), r.r_lp.into(), r.r_df.into()]);
            }
            if j >= 2 {
                extra_meta.push(("crossover_snr", fmt_num(linear_processing_threshold(j).map_err(g)?)));
            }
        }
        "gaussian-sum" => {
            names.extend(["d_achievable", "d_lower", "d_random"]);
            for &x in &xs {
                let p = at(x)?;
                let noise = p.f("noise");
                let d = gaussian_sum_distortions(p.count("users")?, x * noise, noise, p.f("sigma_s2"), p.count("ell")?)
                    .map_err(g)?;
                rows.push(vec![x.into(), d.d_achievable.into(), d.d_lower.into(), d.d_random.into()]);
            }
        }
        "korner-marton" => {
            names.extend(["entropy", "structured_sum_rate", "binning_sum_rate"]);
            for &x in &xs {
                let h = binary_entropy(x).map_err(CliError::guard)?;
                rows.push(vec![x.into(), h.into(), (2.0 * h).into(), (1.0 + h).into()]);
            }
        }
        "general-network" => {
            names.extend(["d_ell", "rate", "e_upper"]);
            for &x in &xs {
                let p = at(x)?;
                let counts = NetworkCounts {
                    nodes: p.count("nodes")?,
                    macs: p.count("macs")?,
                    links: p.count("links")?,
                    max_capacity: p.f("max_capacity"),
                };
                let q = u32::try_from(p.count("q")?).map_err(|_| CliError::Config("q is too large".into()))?;
                let b = general_network_bound(&counts, q, p.f("lambda"), p.count("sources")?, p.count("ell")?).map_err(g)?;
                rows.push(vec![x.into(), b.d_ell.into(), b.rate.into(), b.e_upper.into()]);
            }
        }
        _ => unreachable!("family looked up above"),
    }

    let mut t = ResultTable::new(&names);
    t.meta("provenance", PROVENANCE);
    t.meta("config", echo);
    for (k, v) in extra_meta {
        t.meta(k, v);
    }
    for r in rows {
        t.push(r);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure4_crossover_near_one_and_a_half() {
        let t = cmd_rates(&preset("figure4").unwrap()).unwrap();
        assert_eq!(t.len(), 200);
        assert_eq!(t.columns(), ["snr", "r_lat", "r_df", "r_cf"]);
        let s: f64 = t.meta_value("crossover_snr").unwrap().parse().unwrap();
        assert!((1.3..=1.7).contains(&s), "{s}");
        // past the crossover the lattice curve is on top
        let snr = t.numbers("snr");
        let (lat, df, cf) = (t.numbers("r_lat"), t.numbers("r_df"), t.numbers("r_cf"));
        for i in 0..snr.len() {
            if snr[i] > s + 1e-9 {
                assert!(lat[i] > df[i].max(cf[i]));
            }
        }
    }

    #[test]
    fn single_point_and_bad_ranges() {
        let mut spec = preset("figure4").unwrap();
        spec.points = 1;
        spec.min = 2.0;
        spec.max = 2.0;
        assert_eq!(cmd_rates(&spec).unwrap().len(), 1);
        spec.min = 3.0;
        assert!(matches!(cmd_rates(&spec), Err(CliError::Config(_))));
        let bad = SweepSpec::from_json(r#"{"family": "relay-sum-diff", "min": 1, "max": 2, "params": {"snr": 3}}"#).unwrap();
        assert!(matches!(cmd_rates(&bad), Err(CliError::Config(_))));
        let unknown = SweepSpec::from_json(r#"{"family": "nope", "min": 1, "max": 2}"#).unwrap();
        assert!(matches!(cmd_rates(&unknown), Err(CliError::Config(_))));
    }

    #[test]
    fn every_family_sweeps() {
        for fam in FAMILIES {
            let (min, max) = if *fam == "korner-marton" || *fam == "butterfly-binary" { (0.01, 0.4) } else { (1.0, 5.0) };
            let spec = SweepSpec {
                family: fam.to_string(),
                variable: None,
                min,
                max,
                points: 5,
                spacing: Spacing::Linear,
                params: BTreeMap::new(),
                output: None,
            };
            let t = cmd_rates(&spec).unwrap();
            assert_eq!(t.len(), 5, "{fam}");
        }
    }
}
