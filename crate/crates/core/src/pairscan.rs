//! Sampling test for the two-orbit identity: generic pairs of orbits
//! `Gx ∪ Gy` admit a weighting that raises the strength by one order.
//!
//! Group sums for the scan are carried in double-double; the identity is a
//! difference of nearly equal products and f64 cannot separate "holds" from
//! "barely fails" at higher `t`.

use num_complex::{Complex, Complex64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use twofloat::TwoFloat;

use crate::designs::welch_constant;
use crate::error::{Error, Result};
use crate::groups::{Field, FiniteMatrixGroup, HighPrecisionGroup};
use crate::numerics::{ComplexDd, Dd, NeumaierSum, dd_div, Real, Tolerance, lift_complex, pow_by_squaring};
use crate::orbits::inner;

pub const DEFAULT_SAMPLES: usize = 20;
const MAX_REDRAWS: usize = 100;

/// Relative thresholds applied to double-double group sums.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanThresholds {
    /// Both orbits count as `t`-designs when `|p_G(x,x,t) - c_t| / c_t` is below this.
    pub degenerate: f64,
    /// The identity holds when its relative residual is below this.
    pub holds: f64,
    /// ... and fails when the residual is above this.
    pub fails: f64,
    /// `f_G` counts as zero below this fraction of `p_G(x,x,t) p_G(y,y,t)`.
    pub vanishing: f64,
}

impl Default for ScanThresholds {
    fn default() -> Self {
        // Holding pairs land near 1e-26; failing ones can sit as low as 1e-8
        // when a sample falls close to a special orbit.
        ScanThresholds { degenerate: 1e-20, holds: 1e-20, fails: 1e-14, vanishing: 1e-12 }
    }
}

/// `(1/|G|) sum_g |<x, g y>|^{2t}` in f64.
pub fn p_g(group: &FiniteMatrixGroup, x: &[Complex64], y: &[Complex64], t: u32) -> Result<f64> {
    if x.len() != group.dim || y.len() != group.dim {
        return Err(Error::DimensionMismatch { expected: group.dim, got: x.len().min(y.len()) });
    }
    let yv = nalgebra::DVector::from_column_slice(y);
    let mut acc = NeumaierSum::new();
    for g in &group.elements {
        let gy = g * &yv;
        acc.add(pow_by_squaring(inner(x, gy.as_slice()).norm_sqr(), t));
    }
    Ok(acc.value() / group.order() as f64)
}

/// `p_G(x,x,t) p_G(y,y,t) - p_G(x,y,t)^2` in f64.
pub fn f_g(group: &FiniteMatrixGroup, x: &[Complex64], y: &[Complex64], t: u32) -> Result<f64> {
    let pxy = p_g(group, x, y, t)?;
    Ok(p_g(group, x, x, t)? * p_g(group, y, y, t)? - pxy * pxy)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    /// Both orbits are `t`-designs, so both sides vanish.
    Degenerate,
    Indeterminate,
    /// Samples disagree.
    Mixed,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PairEval {
    pub t: u32,
    pub p_xx: f64,
    pub p_yy: f64,
    pub p_xy: f64,
    pub f: f64,
    pub rhs: f64,
    /// `|f - rhs| / max(|f|, |rhs|)`.
    pub residual: f64,
    /// `max(|p_xx - c_t|, |p_yy - c_t|) / c_t`.
    pub design_deviation: f64,
    pub verdict: Verdict,
}

struct DdSums {
    xx: Vec<Dd>,
    yy: Vec<Dd>,
    xy: Vec<Dd>,
}

fn dd_zero() -> Dd {
    TwoFloat::from(0.0)
}

fn dd_inner(x: &[ComplexDd], y: &[ComplexDd]) -> ComplexDd {
    x.iter().zip(y).fold(Complex::new(dd_zero(), dd_zero()), |acc, (a, b)| acc + a.conj() * b)
}

fn dd_sums(hp: &HighPrecisionGroup, x: &[ComplexDd], y: &[ComplexDd], t_max: u32) -> DdSums {
    let n = t_max as usize;
    let mut s = DdSums { xx: vec![dd_zero(); n], yy: vec![dd_zero(); n], xy: vec![dd_zero(); n] };
    let mut gx = vec![Complex::new(dd_zero(), dd_zero()); hp.dim];
    let mut gy = gx.clone();
    for g in 0..hp.order() {
        hp.apply(g, x, &mut gx);
        hp.apply(g, y, &mut gy);
        let squares = [dd_inner(x, &gx).norm_sqr(), dd_inner(y, &gy).norm_sqr(), dd_inner(x, &gy).norm_sqr()];
        for (k, acc) in [&mut s.xx, &mut s.yy, &mut s.xy].into_iter().enumerate() {
            let mut p = squares[k];
            for slot in acc.iter_mut() {
                *slot += p;
                p *= squares[k];
            }
        }
    }
    let order = TwoFloat::from(hp.order() as f64);
    for v in [&mut s.xx, &mut s.yy, &mut s.xy] {
        for slot in v.iter_mut() {
            *slot = dd_div(*slot, order);
        }
    }
    s
}

fn dd_welch(field: Field, dim: usize, t: u32) -> Result<Dd> {
    let c = welch_constant(field, dim as u32, t)?;
    Ok(<Dd as Real>::from_ratio(*c.numer(), *c.denom()))
}

fn rel(a: Dd, b: Dd) -> f64 {
    let num = (a - b).abs();
    let den = a.abs().max(b.abs());
    if den == dd_zero() { 0.0 } else { f64::from(num / den) }
}

fn classify_sums(s: &DdSums, targets: &[Dd], th: &ScanThresholds) -> Vec<PairEval> {
    targets
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let (pxx, pyy, pxy) = (s.xx[k], s.yy[k], s.xy[k]);
            let f = pxx * pyy - pxy * pxy;
            let rhs = c * (pxx + pyy - TwoFloat::from(2.0) * pxy);
            let dev = f64::from((pxx - c).abs().max((pyy - c).abs()) / c);
            let residual = rel(f, rhs);
            let verdict = if dev <= th.degenerate {
                Verdict::Degenerate
            } else if residual <= th.holds {
                Verdict::Holds
            } else if residual >= th.fails {
                Verdict::Fails
            } else {
                Verdict::Indeterminate
            };
            PairEval {
                t: k as u32 + 1,
                p_xx: f64::from(pxx),
                p_yy: f64::from(pyy),
                p_xy: f64::from(pxy),
                f: f64::from(f),
                rhs: f64::from(rhs),
                residual,
                design_deviation: dev,
                verdict,
            }
        })
        .collect()
}

/// Non-generic pairs: `f_G` vanishes at every order where the orbits are not designs.
fn is_special(evals: &[PairEval], th: &ScanThresholds) -> bool {
    let active: Vec<_> = evals.iter().filter(|e| e.verdict != Verdict::Degenerate).collect();
    !active.is_empty() && active.iter().all(|e| e.f.abs() <= th.vanishing * (e.p_xx * e.p_yy).abs())
}

fn orbit_strength(evals: &[PairEval], c: &[Dd], pick: impl Fn(&PairEval) -> f64, th: &ScanThresholds) -> u32 {
    evals
        .iter()
        .zip(c)
        .take_while(|(e, c)| ((pick(e) - f64::from(**c)) / f64::from(**c)).abs() <= th.degenerate.max(1e-15))
        .count() as u32
}

/// Evaluates the identity for one pair at every `t` in `1..=t_max`.
pub fn evaluate_pair(
    group: &FiniteMatrixGroup,
    x: &[Complex64],
    y: &[Complex64],
    t_max: u32,
    th: &ScanThresholds,
) -> Result<Vec<PairEval>> {
    let hp = group.high_precision();
    evaluate_pair_hp(&hp, group.field, x, y, t_max, th)
}

fn evaluate_pair_hp(
    hp: &HighPrecisionGroup,
    field: Field,
    x: &[Complex64],
    y: &[Complex64],
    t_max: u32,
    th: &ScanThresholds,
) -> Result<Vec<PairEval>> {
    if x.len() != hp.dim || y.len() != hp.dim {
        return Err(Error::DimensionMismatch { expected: hp.dim, got: x.len().min(y.len()) });
    }
    let targets = (1..=t_max).map(|t| dd_welch(field, hp.dim, t)).collect::<Result<Vec<_>>>()?;
    let xd = unit_dd(x)?;
    let yd = unit_dd(y)?;
    Ok(classify_sums(&dd_sums(hp, &xd, &yd, t_max), &targets, th))
}

fn unit_dd(v: &[Complex64]) -> Result<Vec<ComplexDd>> {
    let lifted: Vec<ComplexDd> = v.iter().map(|z| lift_complex(*z)).collect();
    let n2 = lifted.iter().fold(dd_zero(), |acc, z| acc + z.norm_sqr());
    if n2 == dd_zero() {
        return Err(Error::ZeroVector);
    }
    let n = n2.sqrt();
    Ok(lifted.into_iter().map(|z| Complex::new(dd_div(z.re, n), dd_div(z.im, n))).collect())
}

/// Single-pair identity check at order `t`, with `tol.rel_eq` on the residual.
pub fn pairs_identity_holds(
    group: &FiniteMatrixGroup,
    x: &[Complex64],
    y: &[Complex64],
    t: u32,
    tol: &Tolerance,
) -> Result<bool> {
    let th = ScanThresholds { holds: tol.rel_eq, fails: tol.rel_eq, ..ScanThresholds::default() };
    let evals = evaluate_pair(group, x, y, t, &th)?;
    let e = evals[t as usize - 1];
    Ok(matches!(e.verdict, Verdict::Holds | Verdict::Degenerate))
}

#[derive(Clone, Debug, Serialize)]
pub struct TRow {
    pub t: u32,
    pub verdict: Verdict,
    pub holds: usize,
    pub fails: usize,
    pub degenerate: usize,
    pub indeterminate: usize,
    /// Largest identity residual over non-degenerate samples.
    pub max_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairScanReport {
    pub group: String,
    pub t_max: u32,
    pub samples: usize,
    pub seed: u64,
    pub redraws: usize,
    pub t_generic: u32,
    /// Contiguous range of holding orders directly above `t_generic`, if any.
    pub t_pairs: Option<(u32, u32)>,
    pub rows: Vec<TRow>,
    pub thresholds: ScanThresholds,
}

impl PairScanReport {
    pub fn t_pairs_label(&self) -> String {
        match self.t_pairs {
            None => "{}".into(),
            Some((a, b)) if a == b => a.to_string(),
            Some((a, b)) => format!("{a}-{b}"),
        }
    }

    pub fn verdict(&self, t: u32) -> Option<Verdict> {
        self.rows.get(t as usize - 1).map(|r| r.verdict)
    }
}

fn random_unit(rng: &mut ChaCha8Rng, field: Field, dim: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = if field == Field::Complex { StandardNormal.sample(rng) } else { 0.0 };
            Complex64::new(re, im)
        })
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

struct Sample {
    evals: Vec<PairEval>,
    redraws: usize,
    strengths: [u32; 2],
}

fn draw_sample(
    hp: &HighPrecisionGroup,
    field: Field,
    targets: &[Dd],
    t_max: u32,
    seed: u64,
    index: usize,
    th: &ScanThresholds,
) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut redraws = 0;
    loop {
        let x = random_unit(&mut rng, field, hp.dim);
        let y = random_unit(&mut rng, field, hp.dim);
        let evals = evaluate_pair_hp(hp, field, &x, &y, t_max, th)?;
        if is_special(&evals, th) && redraws < MAX_REDRAWS {
            redraws += 1;
            continue;
        }
        let strengths = [
            orbit_strength(&evals, targets, |e| e.p_xx, th),
            orbit_strength(&evals, targets, |e| e.p_yy, th),
        ];
        return Ok(Sample { evals, redraws, strengths });
    }
}

fn majority(values: impl Iterator<Item = u32>) -> u32 {
    let mut counts = std::collections::BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    // Ties go to the smaller strength.
    counts.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))).map_or(0, |(v, _)| v)
}

/// Samples `samples` random pairs and classifies every order up to `t_max`.
pub fn scan(
    group: &FiniteMatrixGroup,
    t_max: u32,
    samples: usize,
    seed: u64,
    th: &ScanThresholds,
) -> Result<PairScanReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("scan needs at least one sample".into()));
    }
    if t_max == 0 {
        return Err(Error::InvalidInput("scan needs t_max >= 1".into()));
    }
    let hp = group.high_precision();
    let targets = (1..=t_max).map(|t| dd_welch(group.field, group.dim, t)).collect::<Result<Vec<_>>>()?;
    let drawn = (0..samples)
        .into_par_iter()
        .map(|i| draw_sample(&hp, group.field, &targets, t_max, seed, i, th))
        .collect::<Result<Vec<_>>>()?;

    let t_generic = majority(drawn.iter().flat_map(|s| s.strengths));
    let rows: Vec<TRow> = (0..t_max as usize)
        .map(|k| {
            let evals: Vec<&PairEval> = drawn.iter().map(|s| &s.evals[k]).collect();
            let count = |v: Verdict| evals.iter().filter(|e| e.verdict == v).count();
            let (h, f, d, i) =
                (count(Verdict::Holds), count(Verdict::Fails), count(Verdict::Degenerate), count(Verdict::Indeterminate));
            let verdict = if d == samples {
                Verdict::Degenerate
            } else if i > 0 {
                Verdict::Indeterminate
            } else if h + d == samples {
                Verdict::Holds
            } else if f == samples {
                Verdict::Fails
            } else {
                Verdict::Mixed
            };
            let max_residual = evals
                .iter()
                .filter(|e| e.verdict != Verdict::Degenerate)
                .map(|e| e.residual)
                .fold(0.0, f64::max);
            TRow { t: k as u32 + 1, verdict, holds: h, fails: f, degenerate: d, indeterminate: i, max_residual }
        })
        .collect();

    let run = rows
        .iter()
        .skip(t_generic as usize)
        .take_while(|r| r.verdict == Verdict::Holds)
        .count() as u32;
    let t_pairs = (run > 0).then_some((t_generic + 1, t_generic + run));
    Ok(PairScanReport {
        group: group.spec.label.clone(),
        t_max,
        samples,
        seed,
        redraws: drawn.iter().map(|s| s.redraws).sum(),
        t_generic,
        t_pairs,
        rows,
        thresholds: *th,
    })
}
