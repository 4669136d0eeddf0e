//! Monte Carlo experiments. Each trial gets its own RNG stream, trials run on a
//! rayon pool, and rows come out in trial order.

use rayon::prelude::*;
use serde_json::json;

use structcodes_core::gaussian_compute::{
    refinement_pipeline, sum_difference_relay_pipeline, GaussianMacParams, Mode, RelayParams, SchemeOptions,
};
use structcodes_core::infotheory::{binary_entropy, xor_source_pmf};
use structcodes_core::lattice::Lattice;
use structcodes_core::linear_coding::{discrete_mac_random_trial, km_trial, DiscreteMacParams};
use structcodes_core::network::{gaussian_butterfly_rate_trace, BinaryButterfly};
use structcodes_core::rates::gaussian_sum_distortions;
use structcodes_core::stats::{gaussian_vec, mean_estimate, ErrorRate};
use structcodes_core::{trial_rng, Pmf, PrimeField, TrialRng};

use crate::config::{ExperimentConfig, ModeArg, Params};
use crate::table::{Cell, ResultTable};
use crate::{CliError, PROVENANCE};

pub const EXPERIMENTS: &[&str] =
    &["korner-marton", "mac-compute", "gaussian-sum", "relay-sum-diff", "butterfly-binary", "butterfly-gaussian"];

pub const DEFAULT_TRIALS: u64 = 100;

/// Parameter names and defaults of each experiment.
pub fn defaults(experiment: &str) -> Option<&'static [(&'static str, f64)]> {
    Some(match experiment {
        "korner-marton" => &[("p", 0.05), ("n", 14.0), ("rate", 0.8)],
        "mac-compute" => &[("q", 2.0), ("users", 2.0), ("noise_p", 0.05), ("n", 14.0), ("rate", 0.5)],
        "gaussian-sum" => &[
            ("users", 2.0),
            ("power", 1.0),
            ("noise", 1.0),
            ("sigma_s2", 1.0),
            ("k", 10_000.0),
            ("ell", 2.0),
            ("lattice_dim", 1.0),
            ("eps_gamma", 1e-6),
        ],
        "relay-sum-diff" => &[
            ("power", 1.0),
            ("noise", 1.0),
            ("r0", 1.0),
            ("sigma_s2", 1.0),
            ("k", 10_000.0),
            ("ell", 2.0),
            ("lattice_dim", 1.0),
        ],
        "butterfly-binary" => &[
            ("c", 1.0),
            ("p", 0.11),
            ("n", 18.0),
            ("rate_fraction", 0.9),
            ("candidates", 32.0),
            ("code_seed", 2026.0),
        ],
        "butterfly-gaussian" => {
            &[("power", 1.0), ("noise", 1.0), ("sigma_s2", 1.0), ("k", 10_000.0), ("ell", 4.0), ("lattice_dim", 1.0)]
        }
        _ => return None,
    })
}

/// Shape used for concrete-mode lattices: 1 → Z, 2 → hexagonal A2, 4 → D4, others cubic.
pub fn lattice_for_dim(dim: usize) -> Result<Lattice, CliError> {
    let l = match dim {
        2 => Lattice::from_rows(&[&[1.0, 0.0], &[0.5, 3f64.sqrt() / 2.0]]),
        4 => Lattice::from_rows(&[
            &[2.0, 0.0, 0.0, 0.0],
            &[1.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 1.0, 0.0],
            &[1.0, 0.0, 0.0, 1.0],
        ]),
        0 => return Err(CliError::Config("lattice_dim must be at least 1".into())),
        d => Lattice::cubic(d, 1.0),
    };
    l.map_err(CliError::guard)
}

fn scheme_options(mode: ModeArg, params: &Params) -> Result<SchemeOptions, CliError> {
    let mut options = match mode {
        ModeArg::Ideal => SchemeOptions::default(),
        ModeArg::Concrete => SchemeOptions::concrete(lattice_for_dim(params.count("lattice_dim")?)?),
    };
    if params.map().contains_key("eps_gamma") {
        options.eps_gamma = params.f("eps_gamma");
    }
    Ok(options)
}

fn mode_of(options: &SchemeOptions) -> &'static str {
    match options.mode {
        Mode::Ideal => "ideal",
        Mode::Concrete => "concrete",
    }
}

/// Run `f` once per trial index on a pool capped by the thread variable.
pub fn run_trials<T, F>(seed: u64, trials: u64, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(u64, &mut TrialRng) -> Result<T, CliError> + Sync,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = crate::thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Io(e.to_string()))?;
    pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = trial_rng(seed, i);
                f(i, &mut rng)
            })
            .collect()
    })
}

/// Resolved settings of a simulation run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub experiment: String,
    pub params: Params,
    pub seed: u64,
    pub trials: u64,
    pub mode: ModeArg,
}

impl Resolved {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self, CliError> {
        let defaults = defaults(&cfg.experiment).ok_or_else(|| {
            CliError::Config(format!("unknown experiment '{}'; expected one of {}", cfg.experiment, EXPERIMENTS.join(", ")))
        })?;
        let params = Params::resolve(&cfg.params, defaults, &cfg.experiment)?;
        let seed = cfg.seed.ok_or_else(|| CliError::Config("a seed is required for simulations".into()))?;
        let trials = cfg.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        Ok(Self { experiment: cfg.experiment.clone(), params, seed, trials, mode: cfg.mode.unwrap_or_default() })
    }

    fn echo(&self) -> String {
        let mode = match self.mode {
            ModeArg::Ideal => "ideal",
            ModeArg::Concrete => "concrete",
        };
        json!({
            "experiment": self.experiment,
            "params": self.params.map(),
            "seed": self.seed,
            "trials": self.trials,
            "mode": mode,
        })
        .to_string()
    }
}

fn header(r: &Resolved, names: &[&str]) -> ResultTable {
    let mut t = ResultTable::new(names);
    t.meta("provenance", PROVENANCE);
    t.meta("config", r.echo());
    t
}

fn blanks(n: usize) -> Vec<Cell> {
    vec![Cell::Empty; n]
}

/// Runs one named experiment.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<ResultTable, CliError> {
    let r = Resolved::from_config(cfg)?;
    match r.experiment.as_str() {
        "korner-marton" => korner_marton(&r),
        "mac-compute" => mac_compute(&r),
        "gaussian-sum" => gaussian_sum(&r),
        "relay-sum-diff" => relay(&r),
        "butterfly-binary" => butterfly_binary(&r),
        "butterfly-gaussian" => butterfly_gaussian(&r),
        _ => unreachable!("checked by Resolved::from_config"),
    }
}

/// Per-trial error indicators followed by one aggregate row with a Wilson interval.
fn error_table(r: &Resolved, errors: &[bool], extra_names: &[&str], extra: &[Vec<Cell>]) -> ResultTable {
    let mut names = vec!["kind", "trial", "error"];
    names.extend_from_slice(extra_names);
    names.extend_from_slice(&["errors", "trials", "error_rate", "ci_lo", "ci_hi"]);
    let mut t = header(r, &names);
    for (i, (&e, x)) in errors.iter().zip(extra).enumerate() {
        let mut row = vec!["trial".into(), Cell::from(i), e.into()];
        row.extend(x.iter().cloned());
        row.extend(blanks(5));
        t.push(row);
    }
    let count = errors.iter().filter(|&&e| e).count() as u64;
    let rate = ErrorRate::new(count, errors.len() as u64);
    let (lo, hi) = rate.wilson_95();
    let mut row = vec!["aggregate".into(), Cell::Empty, Cell::Empty];
    row.extend(blanks(extra_names.len()));
    row.extend([count.into(), (errors.len() as u64).into(), rate.rate().into(), lo.into(), hi.into()]);
    t.push(row);
    t
}

fn korner_marton(r: &Resolved) -> Result<ResultTable, CliError> {
    let (p, n, rate) = (r.params.f("p"), r.params.count("n")?, r.params.f("rate"));
    let source = xor_source_pmf(p).map_err(CliError::guard)?;
    let out = run_trials(r.seed, r.trials, |_, rng| km_trial(n, rate, &source, rng).map_err(CliError::guard))?;
    let errors: Vec<bool> = out.iter().map(|t| t.is_error()).collect();
    let extra: Vec<Vec<Cell>> = out.iter().map(|t| vec![t.syndrome_len.into()]).collect();
    let mut t = error_table(r, &errors, &["syndrome_len"], &extra);
    t.meta("entropy_bits", crate::table::fmt_num(binary_entropy(p).map_err(CliError::guard)?));
    Ok(t)
}

fn mac_compute(r: &Resolved) -> Result<ResultTable, CliError> {
    let q = r.params.count("q")?;
    let field = PrimeField::new(q as u32).map_err(CliError::guard)?;
    let noise = Pmf::symmetric(q, r.params.f("noise_p")).map_err(CliError::guard)?;
    let noise_entropy = noise.entropy();
    let params = DiscreteMacParams::uniform_sum(field, r.params.count("users")?, noise, r.params.count("n")?, r.params.f("rate"))
        .map_err(CliError::guard)?;
    let out = run_trials(r.seed, r.trials, |_, rng| discrete_mac_random_trial(&params, rng).map_err(CliError::guard))?;
    let errors: Vec<bool> = out.iter().map(|t| t.is_error()).collect();
    let extra: Vec<Vec<Cell>> = out.iter().map(|t| vec![t.noiseless_matches.into()]).collect();
    let mut t = error_table(r, &errors, &["noiseless_matches"], &extra);
    t.meta("source_symbols", params.k.to_string());
    t.meta("capacity_bits", crate::table::fmt_num(((q as f64).log2() - noise_entropy).max(0.0)));
    Ok(t)
}

fn gaussian_sum(r: &Resolved) -> Result<ResultTable, CliError> {
    let p = &r.params;
    let mac = GaussianMacParams {
        users: p.count("users")?,
        power: p.f("power"),
        noise: p.f("noise"),
        sigma_s2: p.f("sigma_s2"),
        k: p.count("k")?,
        ell: p.count("ell")?,
    };
    let options = scheme_options(r.mode, p)?;
    let out = run_trials(r.seed, r.trials, |_, rng| refinement_pipeline(&mac, &options, rng).map_err(CliError::guard))?;
    let bounds = gaussian_sum_distortions(mac.users, mac.power, mac.noise, mac.sigma_s2, mac.ell).map_err(CliError::guard)?;
    let names = [
        "kind",
        "trial",
        "empirical_mse",
        "wrap_events",
        "mean_mse",
        "std_err",
        "predicted_mse",
        "d_achievable",
        "d_lower",
        "d_random",
    ];
    let mut t = header(r, &names);
    t.meta("mode", mode_of(&options));
    for (i, o) in out.iter().enumerate() {
        let mut row = vec!["trial".into(), Cell::from(i), o.empirical_mse.into(), o.wrap_events.into()];
        row.extend(blanks(6));
        t.push(row);
    }
    // every trial has the same k, so the mean of per-trial MSEs is the pooled MSE
    let est = mean_estimate(&out.iter().map(|o| o.empirical_mse).collect::<Vec<_>>());
    let mut row = vec!["aggregate".into(), Cell::Empty, Cell::Empty, out.iter().map(|o| o.wrap_events).sum::<usize>().into()];
    row.extend([
        est.mean.into(),
        est.std_err.into(),
        mac.predicted_mse().into(),
        bounds.d_achievable.into(),
        bounds.d_lower.into(),
        bounds.d_random.into(),
    ]);
    t.push(row);
    Ok(t)
}

fn relay(r: &Resolved) -> Result<ResultTable, CliError> {
    let p = &r.params;
    let params = RelayParams {
        power: p.f("power"),
        noise: p.f("noise"),
        r0: p.f("r0"),
        sigma_s2: p.f("sigma_s2"),
        k: p.count("k")?,
        ell: p.count("ell")?,
    };
    let options = scheme_options(r.mode, p)?;
    let out = run_trials(r.seed, r.trials, |_, rng| sum_difference_relay_pipeline(&params, &options, rng).map_err(CliError::guard))?;
    let names = [
        "kind",
        "trial",
        "d_s1",
        "d_s2",
        "empirical_rate",
        "wrap_events",
        "mean_d_s1",
        "mean_d_s2",
        "d_relay",
        "d0",
        "distortion_bound",
        "achievable_rate",
    ];
    let mut t = header(r, &names);
    t.meta("mode", mode_of(&options));
    for (i, o) in out.iter().enumerate() {
        let mut row =
            vec!["trial".into(), Cell::from(i), o.d_s1.into(), o.d_s2.into(), o.empirical_rate.into(), o.wrap_events.into()];
        row.extend(blanks(6));
        t.push(row);
    }
    let first = &out[0];
    let mean = |f: fn(&structcodes_core::gaussian_compute::RelayOutcome) -> f64| out.iter().map(f).sum::<f64>() / out.len() as f64;
    let mut row = vec!["aggregate".into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty];
    row.push(out.iter().map(|o| o.wrap_events).sum::<usize>().into());
    row.extend([
        mean(|o| o.d_s1).into(),
        mean(|o| o.d_s2).into(),
        first.d_relay.into(),
        first.d0.into(),
        first.distortion_bound.into(),
        first.achievable_rate.into(),
    ]);
    t.push(row);
    Ok(t)
}

fn butterfly_binary(r: &Resolved) -> Result<ResultTable, CliError> {
    let p = &r.params;
    // the MAC code is fixed before any trial runs, from its own seed
    let mut code_rng = trial_rng(p.count("code_seed")? as u64, 0);
    let bf = BinaryButterfly::new(
        p.f("c"),
        p.f("p"),
        p.count("n")?,
        p.f("rate_fraction"),
        p.count("candidates")?.max(1),
        &mut code_rng,
    )
    .map_err(CliError::guard)?;
    let out = run_trials(r.seed, r.trials, |_, rng| bf.trial(rng).map_err(CliError::guard))?;
    let errors: Vec<bool> = out.iter().map(|t| t.multicast_error()).collect();
    let extra: Vec<Vec<Cell>> = out.iter().map(|t| vec![t.errors[0].into(), t.errors[1].into()]).collect();
    let mut t = error_table(r, &errors, &["left_error", "right_error"], &extra);
    t.meta("bits_per_block", bf.bits.to_string());
    t.meta("side_bits", bf.side_bits.to_string());
    t.meta("mac_bits", bf.mac_bits.to_string());
    t.meta("code_union_bound", crate::table::fmt_num(bf.code_union_bound));
    Ok(t)
}

/// Runs the two-user scheme across the centre MAC, then adds independent
/// Gaussian requantization errors: the sum estimate is forwarded at extra
/// distortion `D` and each receiver gets its side source at distortion `D/2`.
/// The other source is `ũ − ŝ`, compared with the `9D/2` budget.
fn butterfly_gaussian(r: &Resolved) -> Result<ResultTable, CliError> {
    let p = &r.params;
    let mac = GaussianMacParams {
        users: 2,
        power: p.f("power"),
        noise: p.f("noise"),
        sigma_s2: p.f("sigma_s2"),
        k: p.count("k")?,
        ell: p.count("ell")?,
    };
    let trace = gaussian_butterfly_rate_trace(mac.power, mac.noise, mac.sigma_s2, mac.ell).map_err(CliError::guard)?;
    let options = scheme_options(r.mode, p)?;
    let out = run_trials(r.seed, r.trials, |_, rng| {
        let o = refinement_pipeline(&mac, &options, rng).map_err(CliError::guard)?;
        let k = mac.k;
        let fwd = gaussian_vec(rng, k, trace.d);
        let side_left = gaussian_vec(rng, k, trace.d_direct);
        let side_right = gaussian_vec(rng, k, trace.d_direct);
        // errors of ũ, ŝ₁, ŝ₂: the derived source error is e_u − e_side
        let eu: Vec<f64> = o.u_hat.iter().zip(&o.u).zip(&fwd).map(|((a, b), z)| a - b + z).collect();
        let derived = |side: &[f64]| eu.iter().zip(side).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / k as f64;
        let d_left = derived(&side_left);
        let d_right = derived(&side_right);
        Ok((o.empirical_mse, d_left.max(d_right)))
    })?;
    let names = ["kind", "trial", "d_sum", "d_derived", "d_derived_budget", "source_rate", "common_rate", "final_rate"];
    let mut t = header(r, &names);
    t.meta("mode", mode_of(&options));
    t.meta("d_mac_budget", crate::table::fmt_num(trace.d));
    for (i, &(d_sum, d_derived)) in out.iter().enumerate() {
        let mut row = vec!["trial".into(), Cell::from(i), d_sum.into(), d_derived.into()];
        row.extend(blanks(4));
        t.push(row);
    }
    t.push(vec![
        "aggregate".into(),
        Cell::Empty,
        (out.iter().map(|o| o.0).sum::<f64>() / out.len() as f64).into(),
        (out.iter().map(|o| o.1).sum::<f64>() / out.len() as f64).into(),
        trace.d_derived.into(),
        trace.source_rate.into(),
        trace.common_rate.into(),
        trace.final_rate.into(),
    ]);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(exp: &str, params: &[(&str, f64)], trials: u64) -> ExperimentConfig {
        let mut c = ExperimentConfig::named(exp);
        c.seed = Some(11);
        c.trials = Some(trials);
        c.params = params.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        c
    }

    #[test]
    fn every_experiment_runs_and_is_deterministic() {
        for exp in EXPERIMENTS {
            let c = cfg(exp, &[], 4);
            let c = match *exp {
                "gaussian-sum" | "relay-sum-diff" | "butterfly-gaussian" => {
                    let mut c = c;
                    c.params.insert("k".into(), 500.0);
                    c
                }
                "butterfly-binary" => {
                    let mut c = c;
                    c.params.insert("candidates".into(), 2.0);
                    c
                }
                _ => c,
            };
            let a = cmd_simulate(&c).unwrap().to_csv();
            let b = cmd_simulate(&c).unwrap().to_csv();
            assert_eq!(a, b, "{exp}");
            assert!(a.contains("aggregate"), "{exp}");
        }
    }

    #[test]
    fn config_errors() {
        let mut c = cfg("korner-marton", &[("bogus", 1.0)], 2);
        assert!(matches!(cmd_simulate(&c), Err(CliError::Config(_))));
        c.params.clear();
        c.seed = None;
        assert!(matches!(cmd_simulate(&c), Err(CliError::Config(_))));
        assert!(matches!(cmd_simulate(&cfg("nope", &[], 1)), Err(CliError::Config(_))));
    }

    #[test]
    fn guard_violations_surface() {
        // power below N(M-1)/M
        let c = cfg("gaussian-sum", &[("power", 0.2), ("k", 10.0)], 1);
        let e = cmd_simulate(&c).unwrap_err();
        assert_eq!(e.exit_code(), 3, "{e}");
        // exhaustive decoding space too large
        let c = cfg("korner-marton", &[("n", 60.0)], 1);
        assert_eq!(cmd_simulate(&c).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn concrete_mode_runs() {
        let mut c = cfg("gaussian-sum", &[("k", 400.0), ("lattice_dim", 2.0)], 2);
        c.mode = Some(ModeArg::Concrete);
        let t = cmd_simulate(&c).unwrap();
        assert_eq!(t.meta_value("mode"), Some("concrete"));
    }
}
