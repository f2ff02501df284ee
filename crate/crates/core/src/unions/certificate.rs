//! Self-contained JSON certificates for weighted unions.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{SolutionKind, UnionSolution};
use crate::designs::{pair_potentials, welch_f64};
use crate::error::{Error, Result};
use crate::groups::Field;
use crate::numerics::{Rational, Tolerance, format_rational};
use crate::orbits::{LineSet, union_lines, union_lines_f64};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: u32,
    pub group: String,
    pub field: String,
    pub dim: usize,
    pub t: u32,
    pub seeds: Vec<String>,
    /// Unit representatives as `[re, im]` pairs.
    pub lines: Vec<Vec<[f64; 2]>>,
    /// Per-line weights, `"p/q"` when exact.
    pub weights: Vec<String>,
    pub beta: [String; 2],
    pub w_hat: [String; 2],
    /// Relative residual `(P_t - c_t) / c_t` keyed by `t`.
    pub residuals: BTreeMap<u32, f64>,
    pub signed: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub potentials: BTreeMap<u32, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_choice: Option<String>,
}

impl Certificate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        let cert: Certificate =
            serde_json::from_str(text).map_err(|e| Error::Schema(format!("certificate: {e}")))?;
        if cert.schema != SCHEMA_VERSION {
            return Err(Error::Schema(format!("unsupported certificate schema {}", cert.schema)));
        }
        Ok(cert)
    }

    /// Rebuilds the weighted line set the certificate describes.
    pub fn line_set(&self) -> Result<LineSet> {
        let field = Field::parse(&self.field).map_err(|e| Error::Schema(e.to_string()))?;
        if self.lines.is_empty() {
            return Err(Error::Schema("certificate has no lines".into()));
        }
        if self.weights.len() != self.lines.len() {
            return Err(Error::DimensionMismatch { expected: self.lines.len(), got: self.weights.len() });
        }
        let vectors: Vec<Vec<Complex64>> = self
            .lines
            .iter()
            .map(|l| l.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
            .collect();
        if let Some(v) = vectors.iter().find(|v| v.len() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        let weights = self.weights.iter().map(|w| parse_weight(w)).collect::<Result<Vec<_>>>()?;
        LineSet::from_vectors(field, &vectors, weights)
    }
}

fn parse_weight(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Schema(format!("bad weight '{s}'"));
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            p / q
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if v.is_finite() { Ok(v) } else { Err(bad()) }
}

fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Builds the certificate for the preferred root (or the equal weighting
/// when every weighting works).
pub fn emit_certificate(
    sol: &UnionSolution,
    x: &LineSet,
    y: &LineSet,
    group: &str,
    seeds: [String; 2],
    tol: &Tolerance,
) -> Result<Certificate> {
    let half = Rational::new(1, 2);
    let (union, beta, w_hat, choice, hi) = match (sol.kind, sol.preferred_root()) {
        (SolutionKind::AnyWeighting, _) => {
            let u = union_lines(x, y, (half, half), tol)?;
            let (nx, ny) = (x.len() as i64, y.len() as i64);
            let n = Rational::from_integer(u.len() as i64);
            let w = [half * n / Rational::from_integer(nx), half * n / Rational::from_integer(ny)];
            let strength = crate::designs::strength(&u, sol.t.max(sol.roots_t_max()), tol).strength;
            (
                u,
                [format_rational(&half), format_rational(&half)],
                [format_rational(&w[0]), format_rational(&w[1])],
                "any".to_string(),
                strength,
            )
        }
        (_, Some(root)) => {
            let hi = root.report.strength.max(sol.t);
            match (root.beta, root.w_hat) {
                (Some(b), Some(w)) => (
                    union_lines(x, y, b, tol)?,
                    [format_rational(&b.0), format_rational(&b.1)],
                    [format_rational(&w.0), format_rational(&w.1)],
                    format!("{:?}", root.class).to_lowercase(),
                    hi,
                ),
                _ => {
                    let u = union_lines_f64(x, y, root.alpha, tol)?;
                    let n = u.len() as f64;
                    let (bx, by) = (root.alpha, 1.0 - root.alpha);
                    (
                        u,
                        [fmt_f64(bx), fmt_f64(by)],
                        [fmt_f64(bx * n / x.len() as f64), fmt_f64(by * n / y.len() as f64)],
                        format!("{:?}", root.class).to_lowercase(),
                        hi,
                    )
                }
            }
        }
        (_, None) => return Err(Error::NoRoots(format!("no real weighting at t = {}", sol.t))),
    };
    let potentials = pair_potentials(&union, &union, hi);
    let mut residuals = BTreeMap::new();
    let mut pots = BTreeMap::new();
    for (k, p) in potentials.iter().enumerate() {
        let t = k as u32 + 1;
        let c = welch_f64(union.field, union.dim, t);
        residuals.insert(t, (p - c) / c);
        pots.insert(t, *p);
    }
    let weights = match &union.exact_weights {
        Some(e) => e.iter().map(format_rational).collect(),
        None => union.weights.iter().map(|w| fmt_f64(*w)).collect(),
    };
    let strength = residuals.values().take_while(|r| r.abs() <= tol.rel_eq).count() as u32;
    Ok(Certificate {
        schema: SCHEMA_VERSION,
        group: group.to_string(),
        field: union.field.tag().to_string(),
        dim: union.dim,
        t: sol.t,
        seeds: seeds.to_vec(),
        lines: union.lines().map(|l| l.iter().map(|z| [z.re, z.im]).collect()).collect(),
        weights,
        beta,
        w_hat,
        residuals,
        signed: union.is_signed(),
        potentials: pots,
        strength: (strength >= sol.t).then_some([sol.t, strength]),
        root_choice: Some(choice),
    })
}

impl UnionSolution {
    fn roots_t_max(&self) -> u32 {
        self.roots.first().map_or(self.t, |r| r.report.t_max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyRow {
    pub t: u32,
    pub potential: f64,
    pub target: f64,
    pub residual: f64,
    pub stored: Option<f64>,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub rows: Vec<VerifyRow>,
}

/// Recomputes every claimed residual from the stored lines and weights.
pub fn verify_certificate(cert: &Certificate, tol: &Tolerance) -> Result<VerifyReport> {
    if cert.schema != SCHEMA_VERSION {
        return Err(Error::Schema(format!("unsupported certificate schema {}", cert.schema)));
    }
    let set = cert.line_set()?;
    let t_hi = cert.residuals.keys().copied().max().unwrap_or(cert.t).max(cert.t);
    if t_hi == 0 {
        return Err(Error::Schema("certificate claims no order".into()));
    }
    let potentials = pair_potentials(&set, &set, t_hi);
    let rows: Vec<VerifyRow> = potentials
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let t = k as u32 + 1;
            let c = welch_f64(set.field, set.dim, t);
            let residual = (p - c) / c;
            VerifyRow {
                t,
                potential: *p,
                target: c,
                residual,
                stored: cert.residuals.get(&t).copied(),
                ok: residual.abs() <= tol.rel_eq,
            }
        })
        .collect();
    Ok(VerifyReport { pass: rows.iter().all(|r| r.ok), rows })
}
