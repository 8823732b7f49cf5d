//! Flat `key = value` configuration.
//!
//! Precedence, lowest first: built-in defaults, the config file, environment
//! variables `FRACTRANS_<KEY>` (key upper-cased), `--set key=value`, then the
//! dedicated flags `--seed` and `--out`. Unknown keys are rejected at every
//! level.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::analysis::{CovarianceTolerance, SampleSpec};
use crate::doss_sussmann::{CoefficientRegistry, CoefficientSet, PresetArgs};
use crate::error::{Error, Result};
use crate::fbm::{default_delta, ApproxParams, HistoryCoupling};

/// Environment variable prefix for overrides.
pub const ENV_PREFIX: &str = "FRACTRANS_";

/// `(key, default, description)`. An empty default means "derived".
pub const KEYS: &[(&str, &str, &str)] = &[
    ("hurst", "0.75", "Hurst index H in (0, 1), H != 1/2"),
    ("beta", "0.3", "rate parameter beta in (0, 1/2)"),
    ("delta", "", "delta with beta + delta < 1/2; default min(beta, 1/2 - beta) / 2"),
    ("a", "-1", "left end of the recent-history window, a < 0"),
    ("horizon", "1", "time horizon T"),
    ("n", "16", "transport rate for gen-fbm and solve"),
    ("m", "", "Euler time steps; default n^2"),
    ("n_sweep", "8,16,32,64", "values of n for converge"),
    ("replicas", "20", "replicas per sweep point"),
    ("seed", "1", "master seed"),
    ("grid_points", "256", "grid intervals for gen-fbm"),
    ("driver", "both", "gen-fbm output: transport, exact or both"),
    ("coupling", "endpoint", "history coupling: endpoint or independent"),
    ("preset", "sin-cos", "coefficient preset"),
    ("b0", "1", "drift constant of the linear preset"),
    ("c", "1", "diffusion constant of the linear preset"),
    ("x0", "0.1", "initial value"),
    ("cov_replicas", "400", "replicas of the covariance experiment"),
    ("cov_grid", "0.25,0.5,0.75,1", "times of the covariance experiment"),
    ("cov_n", "50", "transport rate of the covariance experiment"),
    ("cov_se_mult", "3", "standard errors allowed in the covariance check"),
    ("cov_bias", "0.02", "bias allowance in the covariance check"),
    ("max_slope", "-0.5", "largest accepted fitted log-log slope"),
    ("sample_points", "32", "points per axis of the flow sample grid"),
    ("euler_pairs", "1:2,2:4,2:8", "(n:l) pairs for the Euler flow bound"),
    ("euler_order_n", "2", "n of the Euler flow order check"),
    ("euler_order_ls", "4,8,16", "values of l of the Euler flow order check"),
    ("order_floor", "0.9", "smallest accepted empirical order in l"),
    ("validate_ns", "8,16,32", "values of n (m = n^2) for the pathwise Y checks"),
    ("validate_paths", "10", "seeded paths per n for the pathwise Y checks"),
    ("lipschitz_ns", "8,16,32,64", "values of n for the Lipschitz audit"),
    ("lipschitz_max_ratio", "10", "largest accepted spread of audited constants"),
    ("svg", "true", "write the log-log plot"),
    ("out", "out", "output directory"),
];

fn is_known(key: &str) -> bool {
    KEYS.iter().any(|(k, _, _)| *k == key)
}

/// Resolved configuration: every known key maps to its raw text.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    values: BTreeMap<String, String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

fn parse_err(key: &str, raw: &str, what: &str) -> Error {
    Error::Configuration(format!("key `{key}`: cannot parse `{raw}` as {what}"))
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        if !is_known(key) {
            return Err(Error::Configuration(format!("unknown key `{key}`")));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Configuration(format!("{origin}:{}: expected `key = value`, got `{line}`", i + 1))
            })?;
            self.set(k, v)
                .map_err(|e| Error::Configuration(format!("{origin}:{}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Applies `FRACTRANS_*` variables from `vars`.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<()>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (k, v) in vars {
            if let Some(key) = k.as_ref().strip_prefix(ENV_PREFIX) {
                let key = key.to_ascii_lowercase();
                self.set(&key, v.as_ref())
                    .map_err(|e| Error::Configuration(format!("environment {}: {e}", k.as_ref())))?;
            }
        }
        Ok(())
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Configuration(format!("override `{kv}` is not `key=value`")))?;
        self.set(k, v)
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let raw = self.raw(key);
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| parse_err(key, raw, "a finite number"))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        let raw = self.raw(key);
        raw.parse::<u64>().map_err(|_| parse_err(key, raw, "a nonnegative integer"))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let raw = self.raw(key);
        raw.parse::<usize>().map_err(|_| parse_err(key, raw, "a nonnegative integer"))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            raw => Err(parse_err(key, raw, "a boolean")),
        }
    }

    pub fn u64_list(&self, key: &str) -> Result<Vec<u64>> {
        let raw = self.raw(key);
        raw.split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|_| parse_err(key, raw, "a list of integers")))
            .collect()
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.raw(key);
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(key, raw, "a list of numbers"))
            })
            .collect()
    }

    /// `n:l` pairs.
    pub fn pair_list(&self, key: &str) -> Result<Vec<(u64, u64)>> {
        let raw = self.raw(key);
        raw.split(',')
            .map(|s| {
                let (a, b) = s.split_once(':').ok_or_else(|| parse_err(key, raw, "a list of n:l pairs"))?;
                Ok((
                    a.trim().parse().map_err(|_| parse_err(key, raw, "a list of n:l pairs"))?,
                    b.trim().parse().map_err(|_| parse_err(key, raw, "a list of n:l pairs"))?,
                ))
            })
            .collect()
    }

    pub fn seed(&self) -> Result<u64> {
        self.u64("seed")
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.raw("out"))
    }

    fn delta_for(&self, beta: f64) -> Result<f64> {
        if self.raw("delta").is_empty() {
            Ok(default_delta(beta))
        } else {
            self.f64("delta")
        }
    }

    /// Approximation parameters at rate `n`, validated.
    pub fn params(&self, n: u64) -> Result<ApproxParams> {
        let beta = self.f64("beta")?;
        ApproxParams::new(
            self.f64("hurst")?,
            beta,
            self.delta_for(beta)?,
            self.f64("a")?,
            n,
            self.f64("horizon")?,
        )
    }

    /// `m`, defaulting to `n²`.
    pub fn m_for(&self, n: u64) -> Result<u64> {
        if self.raw("m").is_empty() {
            Ok(n * n)
        } else {
            let m = self.u64("m")?;
            if m == 0 {
                return Err(Error::Configuration("key `m`: must be positive".into()));
            }
            Ok(m)
        }
    }

    pub fn coupling(&self) -> Result<HistoryCoupling> {
        match self.raw("coupling") {
            "endpoint" => Ok(HistoryCoupling::Endpoint),
            "independent" => Ok(HistoryCoupling::Independent),
            raw => Err(parse_err("coupling", raw, "`endpoint` or `independent`")),
        }
    }

    pub fn coefficients(&self, registry: &CoefficientRegistry) -> Result<CoefficientSet> {
        let args = PresetArgs {
            b0: self.f64("b0")?,
            c: self.f64("c")?,
            x0: self.f64("x0")?,
        };
        registry
            .build(self.raw("preset"), &args)
            .map_err(|e| Error::Configuration(format!("key `preset`: {e}")))
    }

    pub fn sample_spec(&self) -> Result<SampleSpec> {
        let points = self.usize("sample_points")?;
        if points < 2 {
            return Err(Error::Configuration("key `sample_points`: need at least 2".into()));
        }
        Ok(SampleSpec {
            points,
            ..SampleSpec::default()
        })
    }

    pub fn covariance_tolerance(&self) -> Result<CovarianceTolerance> {
        Ok(CovarianceTolerance {
            se_mult: self.f64("cov_se_mult")?,
            bias: self.f64("cov_bias")?,
        })
    }

    /// Checks every key that parses independently of the command, so that a
    /// bad value is reported before any work starts.
    pub fn validate(&self) -> Result<()> {
        let n = self.u64("n")?;
        self.params(n)?;
        for n in self.u64_list("n_sweep")? {
            self.params(n)?;
        }
        self.m_for(n)?;
        self.usize("replicas")?;
        self.seed()?;
        self.usize("grid_points")?;
        if !matches!(self.raw("driver"), "transport" | "exact" | "both") {
            return Err(parse_err("driver", self.raw("driver"), "`transport`, `exact` or `both`"));
        }
        self.coupling()?;
        self.coefficients(&CoefficientRegistry::default())?;
        self.usize("cov_replicas")?;
        self.f64_list("cov_grid")?;
        self.u64("cov_n")?;
        self.covariance_tolerance()?;
        self.f64("max_slope")?;
        self.sample_spec()?;
        self.pair_list("euler_pairs")?;
        self.u64("euler_order_n")?;
        self.u64_list("euler_order_ls")?;
        self.f64("order_floor")?;
        self.u64_list("validate_ns")?;
        self.usize("validate_paths")?;
        self.u64_list("lipschitz_ns")?;
        self.f64("lipschitz_max_ratio")?;
        self.bool("svg")?;
        if self.raw("out").is_empty() {
            return Err(Error::Configuration("key `out`: must not be empty".into()));
        }
        Ok(())
    }

    /// `key = value` lines for every key, in key order.
    pub fn to_text(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn layering_and_rejection() {
        let mut c = ExperimentConfig::default();
        c.apply_text("# comment\nhurst = 0.3\nn=12 # inline\n", "cfg").unwrap();
        c.apply_env([("FRACTRANS_N", "20"), ("HOME", "/root")]).unwrap();
        c.apply_override("beta=0.25").unwrap();
        assert_eq!(c.f64("hurst").unwrap(), 0.3);
        assert_eq!(c.u64("n").unwrap(), 20);
        assert_eq!(c.params(20).unwrap().delta, default_delta(0.25));
        assert_eq!(c.m_for(20).unwrap(), 400);
        let e = c.apply_text("bogus = 1", "cfg").unwrap_err();
        assert!(e.to_string().contains("unknown key `bogus`"));
        assert!(c.apply_env([("FRACTRANS_NOPE", "1")]).is_err());
        c.set("beta", "0.7").unwrap();
        assert!(c.validate().is_err());
        c.set("beta", "abc").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("`beta`"));
    }
}
