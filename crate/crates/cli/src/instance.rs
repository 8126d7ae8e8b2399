//! `make-instance`: hard-instance parameters from `key=value` pairs and a
//! JSON description of the resulting node blocks.

use serde_json::json;
use svogs_core::hardinstances::{build_hard_instance, HardInstance, HardKind, HardParams};
use svogs_core::linalg::CsrMatrix;

use crate::config::ConfigError;

/// Keys: `n`, `d`, `delta`, `mu`, `l`, `r` (both radii), `r_x`, `r_y`.
pub fn parse_params(pairs: &[String]) -> Result<HardParams, ConfigError> {
    let mut p = HardParams { n: 0, d: 0, delta: 1.0, mu: 0.0, l: 1.0, r_x: 1.0, r_y: 1.0 };
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| ConfigError::Invalid(format!("expected key=value, got `{pair}`")))?;
        let num = || v.parse::<f64>().map_err(|_| ConfigError::Invalid(format!("`{k}` needs a number, got `{v}`")));
        let int = || v.parse::<usize>().map_err(|_| ConfigError::Invalid(format!("`{k}` needs an integer, got `{v}`")));
        match k {
            "n" => p.n = int()?,
            "d" => p.d = int()?,
            "delta" => p.delta = num()?,
            "mu" => p.mu = num()?,
            "l" | "L" => p.l = num()?,
            "r" => {
                p.r_x = num()?;
                p.r_y = p.r_x;
            }
            "r_x" => p.r_x = num()?,
            "r_y" => p.r_y = num()?,
            _ => return Err(ConfigError::Invalid(format!("unknown instance parameter `{k}`"))),
        }
    }
    Ok(p)
}

pub fn make_instance(kind: &str, pairs: &[String]) -> Result<HardInstance, Box<dyn std::error::Error + Send + Sync>> {
    let kind = HardKind::parse(kind).ok_or_else(|| ConfigError::Invalid(format!("unknown hard instance kind `{kind}`")))?;
    Ok(build_hard_instance(kind, parse_params(pairs)?)?)
}

fn triplets(m: &CsrMatrix) -> serde_json::Value {
    let t: Vec<_> = m.triplets().map(|(r, c, v)| json!([r, c, v])).collect();
    json!({"rows": m.rows(), "cols": m.cols(), "entries": t})
}

/// Parameters, declared constants and every node's quadratic block
/// `f_i = x'Ax/2 + x'By - y'Cy/2 + gx'x + gy'y` as sparse triplets.
pub fn describe(inst: &HardInstance) -> serde_json::Value {
    let p = inst.params;
    let declared = inst.problem.declared();
    let blocks: Vec<_> = inst
        .problem
        .quadratic_blocks()
        .unwrap_or(&[])
        .iter()
        .map(|q| json!({"a": triplets(&q.a), "b": triplets(&q.b), "c": triplets(&q.c), "gx": q.gx, "gy": q.gy}))
        .collect();
    json!({
        "kind": inst.kind.name(),
        "params": {"n": p.n, "d": p.d, "delta": p.delta, "mu": p.mu, "L": p.l, "r_x": p.r_x, "r_y": p.r_y},
        "declared": {"L": declared.l, "delta": declared.delta, "mu": declared.mu},
        "constrained": !inst.problem.constraint().is_unconstrained(),
        "nodes": blocks,
    })
}
