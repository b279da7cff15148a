//! Command-line grammar and JSON formats for exponents and processes.
//!
//! Exponents: `stable:α`, `cpg:λ,α,β`, `cpe:λ,β`, `drift:b`, `identity`,
//! `sum:[a;b;…]` and `@file.json`. Outer laws: `poisson:λ`,
//! `gcp:λ1,λ2,…` and `@file.json`.
//!
//! JSON exponent: `{"family": "...", "params": {...}}` with families
//! `stable {alpha}`, `cpg {rate, shape, beta}`, `cpe {rate, beta}`,
//! `drift {drift}`, `identity {}`, `sum {parts: [...]}` and
//! `custom {killing, drift, tail: {s: [...], nu: [...]}}`.
//!
//! JSON process: `{"outer": {"law": "poisson"|"gcp", "rates": [...]},
//! "inner": <exponent>?, "inverse": <exponent>?}`.

use std::path::Path;
use std::sync::Arc;

use gfc_core::counting::{OuterLaw, ProcessSpec};
use gfc_core::BernsteinSpec;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn numbers(body: &str, count: Option<usize>, what: &str) -> Result<Vec<f64>> {
    let xs = body
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| usage(format!("{what}: cannot parse number '{s}'"))))
        .collect::<Result<Vec<_>>>()?;
    if let Some(n) = count {
        if xs.len() != n {
            return Err(usage(format!("{what} takes {n} parameter(s), got {}", xs.len())));
        }
    }
    Ok(xs)
}

/// Splits `a;b;[c;d]` at top-level semicolons.
fn split_top(body: &str) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in body.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ';' if depth == 0 => {
                parts.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(usage("unbalanced brackets in sum"));
        }
    }
    if depth != 0 {
        return Err(usage("unbalanced brackets in sum"));
    }
    parts.push(&body[start..]);
    Ok(parts)
}

pub fn parse_bernstein(text: &str) -> Result<BernsteinSpec> {
    let text = text.trim();
    if let Some(path) = text.strip_prefix('@') {
        return read_bernstein_file(Path::new(path));
    }
    let (name, body) = text.split_once(':').unwrap_or((text, ""));
    let spec = match name {
        "stable" => BernsteinSpec::stable(numbers(body, Some(1), "stable")?[0])?,
        "cpg" => {
            let p = numbers(body, Some(3), "cpg")?;
            BernsteinSpec::compound_poisson_gamma(p[0], p[1], p[2])?
        }
        "cpe" => {
            let p = numbers(body, Some(2), "cpe")?;
            BernsteinSpec::compound_poisson_exp(p[0], p[1])?
        }
        "drift" => BernsteinSpec::drift(numbers(body, Some(1), "drift")?[0])?,
        "identity" if body.is_empty() => BernsteinSpec::identity(),
        "sum" => {
            let inner = body
                .strip_prefix('[')
                .and_then(|b| b.strip_suffix(']'))
                .ok_or_else(|| usage("sum expects sum:[a;b;...]"))?;
            let parts = split_top(inner)?.into_iter().map(parse_bernstein).collect::<Result<Vec<_>>>()?;
            gfc_core::sum_exponents(&parts)?
        }
        _ => return Err(usage(format!("unknown exponent '{text}'"))),
    };
    Ok(spec)
}

pub fn parse_outer(text: &str) -> Result<OuterLaw> {
    let text = text.trim();
    let (name, body) = text.split_once(':').ok_or_else(|| usage(format!("unknown process '{text}'")))?;
    let law = match name {
        "poisson" => OuterLaw::Poisson {
            rate: numbers(body, Some(1), "poisson")?[0],
        },
        "gcp" => OuterLaw::Gcp {
            rates: numbers(body, None, "gcp")?,
        },
        _ => return Err(usage(format!("unknown process '{text}'"))),
    };
    law.validate()?;
    Ok(law)
}

/// Builds a process from the command-line pieces. A process given as
/// `@file.json` may carry its own inner and inverse exponents; flags given
/// explicitly take precedence.
pub fn parse_process(outer: &str, inner: Option<&str>, inverse: Option<&str>) -> Result<ProcessSpec> {
    let mut process = match outer.trim().strip_prefix('@') {
        Some(path) => read_process_file(Path::new(path))?,
        None => ProcessSpec::new(parse_outer(outer)?)?,
    };
    if let Some(i) = inner {
        process.inner = Some(parse_bernstein(i)?);
    }
    if let Some(f) = inverse {
        process.inverse = Some(parse_bernstein(f)?);
    }
    process.validate()?;
    Ok(process)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BernsteinJson {
    pub family: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TabulatedTail {
    pub s: Vec<f64>,
    pub nu: Vec<f64>,
}

impl TabulatedTail {
    fn validate(&self) -> Result<()> {
        if self.s.len() < 2 || self.s.len() != self.nu.len() {
            return Err(usage("tabulated tail needs matching s and nu arrays with at least 2 points"));
        }
        if self.s.iter().any(|&v| !(v > 0.0 && v.is_finite())) || self.s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(usage("tail abscissae must be positive and increasing"));
        }
        if self.nu.iter().any(|&v| !(v > 0.0 && v.is_finite())) || self.nu.windows(2).any(|w| w[1] > w[0]) {
            return Err(usage("tail values must be positive and nonincreasing"));
        }
        Ok(())
    }

    /// Log-log interpolation inside the table, the first segment's power law
    /// below it, and zero beyond the last point.
    fn into_fn(self) -> gfc_core::bernstein::TailFn {
        let ls: Vec<f64> = self.s.iter().map(|v| v.ln()).collect();
        let ln: Vec<f64> = self.nu.iter().map(|v| v.ln()).collect();
        let last = *self.s.last().unwrap_or(&0.0);
        Arc::new(move |s: f64| {
            if s > last {
                return 0.0;
            }
            let x = s.ln();
            let i = ls.partition_point(|&v| v <= x).clamp(1, ls.len() - 1);
            let slope = (ln[i] - ln[i - 1]) / (ls[i] - ls[i - 1]);
            (ln[i - 1] + slope * (x - ls[i - 1])).exp()
        })
    }
}

fn param(params: &Value, key: &str) -> Result<f64> {
    params
        .get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| usage(format!("missing numeric parameter '{key}'")))
}

impl BernsteinJson {
    pub fn to_spec(&self) -> Result<BernsteinSpec> {
        let p = &self.params;
        Ok(match self.family.as_str() {
            "stable" => BernsteinSpec::stable(param(p, "alpha")?)?,
            "cpg" => BernsteinSpec::compound_poisson_gamma(param(p, "rate")?, param(p, "shape")?, param(p, "beta")?)?,
            "cpe" => BernsteinSpec::compound_poisson_exp(param(p, "rate")?, param(p, "beta")?)?,
            "drift" => BernsteinSpec::drift(param(p, "drift")?)?,
            "identity" => BernsteinSpec::identity(),
            "sum" => {
                let parts: Vec<BernsteinJson> = serde_json::from_value(p.get("parts").cloned().unwrap_or(Value::Null))
                    .map_err(|e| usage(format!("sum parts: {e}")))?;
                let specs = parts.iter().map(BernsteinJson::to_spec).collect::<Result<Vec<_>>>()?;
                gfc_core::sum_exponents(&specs)?
            }
            "custom" => {
                let tail: TabulatedTail = serde_json::from_value(p.get("tail").cloned().unwrap_or(Value::Null))
                    .map_err(|e| usage(format!("custom tail: {e}")))?;
                tail.validate()?;
                let killing = p.get("killing").and_then(Value::as_f64).unwrap_or(0.0);
                let drift = p.get("drift").and_then(Value::as_f64).unwrap_or(0.0);
                let label = p.get("label").and_then(Value::as_str).unwrap_or("tabulated").to_string();
                BernsteinSpec::custom(killing, drift, tail.into_fn(), label)?
            }
            other => return Err(usage(format!("unknown family '{other}'"))),
        })
    }
}

/// JSON description of an exponent. Custom exponents record their label
/// and coefficients; the tail itself is not reproducible from a closure.
pub fn bernstein_to_json(spec: &BernsteinSpec) -> Value {
    match spec {
        BernsteinSpec::Stable { alpha } => json!({"family": "stable", "params": {"alpha": alpha}}),
        BernsteinSpec::CompoundPoissonGamma { rate, shape, beta } => {
            json!({"family": "cpg", "params": {"rate": rate, "shape": shape, "beta": beta}})
        }
        BernsteinSpec::CompoundPoissonExp { rate, beta } => json!({"family": "cpe", "params": {"rate": rate, "beta": beta}}),
        BernsteinSpec::PureDrift { drift } => json!({"family": "drift", "params": {"drift": drift}}),
        BernsteinSpec::Sum(parts) => {
            json!({"family": "sum", "params": {"parts": parts.iter().map(bernstein_to_json).collect::<Vec<_>>()}})
        }
        BernsteinSpec::Custom(c) => {
            json!({"family": "custom", "params": {"killing": c.killing, "drift": c.drift, "label": c.label}})
        }
    }
}

pub fn process_to_json(p: &ProcessSpec) -> Value {
    let outer = match &p.outer {
        OuterLaw::Poisson { rate } => json!({"law": "poisson", "rates": [rate]}),
        OuterLaw::Gcp { rates } => json!({"law": "gcp", "rates": rates}),
    };
    json!({
        "outer": outer,
        "inner": p.inner.as_ref().map(bernstein_to_json),
        "inverse": p.inverse.as_ref().map(bernstein_to_json),
    })
}

#[derive(Debug, Clone, Deserialize)]
struct OuterJson {
    law: String,
    rates: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
struct ProcessJson {
    outer: OuterJson,
    #[serde(default)]
    inner: Option<BernsteinJson>,
    #[serde(default)]
    inverse: Option<BernsteinJson>,
}

pub fn process_from_json(v: Value) -> Result<ProcessSpec> {
    let p: ProcessJson = serde_json::from_value(v).map_err(|e| usage(format!("process JSON: {e}")))?;
    let outer = match p.outer.law.as_str() {
        "poisson" if p.outer.rates.len() == 1 => OuterLaw::Poisson { rate: p.outer.rates[0] },
        "poisson" => return Err(usage("a Poisson law takes exactly one rate")),
        "gcp" => OuterLaw::Gcp { rates: p.outer.rates },
        other => return Err(usage(format!("unknown law '{other}'"))),
    };
    let mut spec = ProcessSpec::new(outer)?;
    spec.inner = p.inner.as_ref().map(BernsteinJson::to_spec).transpose()?;
    spec.inverse = p.inverse.as_ref().map(BernsteinJson::to_spec).transpose()?;
    Ok(spec)
}

pub fn bernstein_from_json(v: Value) -> Result<BernsteinSpec> {
    let b: BernsteinJson = serde_json::from_value(v).map_err(|e| usage(format!("exponent JSON: {e}")))?;
    b.to_spec()
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_bernstein_file(path: &Path) -> Result<BernsteinSpec> {
    bernstein_from_json(read_json(path)?)
}

pub fn read_process_file(path: &Path) -> Result<ProcessSpec> {
    process_from_json(read_json(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_round_trips_through_json() {
        for text in ["stable:0.5", "cpg:1,0.5,2", "cpe:2,1", "drift:1.5", "identity", "sum:[stable:0.3;cpe:1,1]"] {
            let spec = parse_bernstein(text).unwrap();
            let back = bernstein_from_json(bernstein_to_json(&spec)).unwrap();
            assert_eq!(spec, back, "{text}");
        }
    }

    #[test]
    fn nested_sums_and_errors() {
        let s = parse_bernstein("sum:[stable:0.5;sum:[drift:1;cpe:1,2]]").unwrap();
        assert_eq!(s.drift_coefficient(), 1.0);
        for bad in ["stable", "stable:2", "cpe:1", "sum:[stable:0.5", "weird:1", "identity:3"] {
            assert!(parse_bernstein(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn process_parsing() {
        let p = parse_process("gcp:1,0.5", Some("cpe:1,1"), Some("stable:0.6")).unwrap();
        assert_eq!(p.outer.rates(), vec![1.0, 0.5]);
        assert!(p.inner.is_some() && p.inverse.is_some());
        let back = process_from_json(process_to_json(&p)).unwrap();
        assert_eq!(p, back);
        assert!(parse_process("poisson:-1", None, None).is_err());
        assert!(parse_process("binomial:3", None, None).is_err());
    }

    #[test]
    fn tabulated_tail_interpolates_power_laws() {
        // ν(s) = s^{-1/2}/Γ(1/2) tabulated at a few points reproduces the
        // stable exponent f(x) = sqrt(x) up to truncation beyond the table.
        let s: Vec<f64> = (0..=40).map(|i| 10f64.powf(-6.0 + 0.25 * i as f64)).collect();
        let nu: Vec<f64> = s.iter().map(|v| v.powf(-0.5) / std::f64::consts::PI.sqrt()).collect();
        let v = json!({"family": "custom", "params": {"tail": {"s": s, "nu": nu}}});
        let spec = bernstein_from_json(v).unwrap();
        let got = spec.eval(2.0).unwrap();
        assert!((got - 2f64.sqrt()).abs() < 1e-6, "{got}");
        let bad = json!({"family": "custom", "params": {"tail": {"s": [1.0, 0.5], "nu": [1.0, 0.5]}}});
        assert!(bernstein_from_json(bad).is_err());
    }
}
