//! Welch constants, frame potentials and design strength.

use num_rational::Ratio;
use num_traits::CheckedMul;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::Field;
use crate::numerics::{NeumaierSum, Rational, Tolerance, pow_by_squaring, rational_to_f64};
use crate::orbits::{LineSet, inner};

/// Rows of the left operand per work unit. Fixed so sums do not depend on the worker count.
const ROW_CHUNK: usize = 16;

pub const DEFAULT_T_MAX: u32 = 12;

/// Exact Welch constant `c_t` for the unit sphere of `F^d`.
pub fn welch_constant(field: Field, d: u32, t: u32) -> Result<Rational> {
    if d < 1 || t < 1 {
        return Err(Error::InvalidInput(format!("welch constant needs d, t >= 1 (got d={d}, t={t})")));
    }
    let mut c = Ratio::<i128>::from_integer(1);
    for k in 0..t as i128 {
        let step = match field {
            // 1/binom(t+d-1, t) = prod_k (k+1)/(d+k)
            Field::Complex => Ratio::new(k + 1, d as i128 + k),
            // (2t-1)!! / (d (d+2) ... (d+2t-2))
            Field::Real => Ratio::new(2 * k + 1, d as i128 + 2 * k),
        };
        c = c
            .checked_mul(&step)
            .ok_or_else(|| Error::NumericRange("welch constant overflow".into()))?;
    }
    let num = i64::try_from(*c.numer()).map_err(|_| Error::NumericRange("welch constant overflow".into()))?;
    let den = i64::try_from(*c.denom()).map_err(|_| Error::NumericRange("welch constant overflow".into()))?;
    Ok(Rational::new(num, den))
}

pub fn welch_f64(field: Field, d: usize, t: u32) -> f64 {
    welch_constant(field, d as u32, t).map(|c| rational_to_f64(&c)).unwrap_or(f64::NAN)
}

/// `sum_{x in X, y in Y} w_x w_y |<x,y>|^{2t}` for each `t` in `1..=t_max`.
///
/// Streams over pairs; row blocks are reduced in index order.
pub fn pair_potentials(x: &LineSet, y: &LineSet, t_max: u32) -> Vec<f64> {
    let nt = t_max as usize;
    let rows: Vec<usize> = (0..x.len()).collect();
    let partials: Vec<Vec<NeumaierSum>> = rows
        .par_chunks(ROW_CHUNK)
        .map(|block| {
            let mut acc = vec![NeumaierSum::new(); nt];
            for &i in block {
                let xi = x.line(i);
                let wi = x.weights[i];
                for j in 0..y.len() {
                    let s = inner(xi, y.line(j)).norm_sqr();
                    let w = wi * y.weights[j];
                    for (t, a) in acc.iter_mut().enumerate() {
                        a.add(w * pow_by_squaring(s, t as u32 + 1));
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![NeumaierSum::new(); nt];
    for block in &partials {
        for (t, a) in block.iter().enumerate() {
            total[t].merge(a);
        }
    }
    total.iter().map(|s| s.value()).collect()
}

pub fn potential(x: &LineSet, t: u32) -> f64 {
    assert!(t >= 1, "t must be at least 1");
    pair_potentials(x, x, t)[t as usize - 1]
}

pub fn cross_potential(x: &LineSet, y: &LineSet, t: u32) -> Result<f64> {
    check_compatible(x, y)?;
    if t < 1 {
        return Err(Error::InvalidInput("t must be at least 1".into()));
    }
    Ok(pair_potentials(x, y, t)[t as usize - 1])
}

pub(crate) fn check_compatible(x: &LineSet, y: &LineSet) -> Result<()> {
    if x.dim != y.dim {
        return Err(Error::DimensionMismatch { expected: x.dim, got: y.dim });
    }
    if x.field != y.field {
        return Err(Error::FieldMismatch(format!("{} vs {} line sets", x.field, y.field)));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct DesignReport {
    pub t_max: u32,
    /// Indexed by `t - 1`.
    pub potentials: Vec<f64>,
    pub targets: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Largest `t` with every residual up to `t` inside tolerance.
    pub strength: u32,
    pub signed: bool,
}

impl DesignReport {
    pub fn residual(&self, t: u32) -> f64 {
        self.residuals[t as usize - 1]
    }

    /// Welch bound check, only meaningful for positive weights.
    pub fn respects_welch_bound(&self, slack: f64) -> bool {
        self.signed
            || self
                .potentials
                .iter()
                .zip(&self.targets)
                .all(|(p, c)| *p >= c - slack)
    }
}

pub fn strength(x: &LineSet, t_max: u32, tol: &Tolerance) -> DesignReport {
    let potentials = pair_potentials(x, x, t_max);
    report_from_potentials(x.field, x.dim, potentials, x.is_signed(), tol)
}

pub(crate) fn report_from_potentials(
    field: Field,
    dim: usize,
    potentials: Vec<f64>,
    signed: bool,
    tol: &Tolerance,
) -> DesignReport {
    let t_max = potentials.len() as u32;
    let targets: Vec<f64> = (1..=t_max).map(|t| welch_f64(field, dim, t)).collect();
    let residuals: Vec<f64> = potentials.iter().zip(&targets).map(|(p, c)| (p - c) / c).collect();
    let strength = residuals.iter().take_while(|r| r.abs() <= tol.rel_eq).count() as u32;
    DesignReport { t_max, potentials, targets, residuals, strength, signed }
}

/// Antipodal doubling `{x, -x}` of a real line set.
#[derive(Clone, Debug)]
pub struct AntipodalSet {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl AntipodalSet {
    /// Degree guaranteed by a half-design of the given strength.
    pub fn predicted_degree(half_design_strength: u32) -> u32 {
        2 * half_design_strength + 1
    }

    /// Largest `s <= max_degree` such that the weighted points integrate all
    /// polynomials of degree `s` on the real sphere exactly, tested through
    /// Gegenbauer moments.
    pub fn spherical_degree(&self, max_degree: u32, tol: &Tolerance) -> u32 {
        let moments = gegenbauer_moments(self, max_degree);
        moments.iter().take_while(|m| m.abs() <= tol.rel_eq).count() as u32
    }
}

pub fn double_to_antipodal(x: &LineSet) -> Result<AntipodalSet> {
    if x.field != Field::Real {
        return Err(Error::FieldMismatch("antipodal doubling needs a real line set".into()));
    }
    let mut points = Vec::with_capacity(2 * x.len());
    let mut weights = Vec::with_capacity(2 * x.len());
    for (v, w) in x.lines().zip(&x.weights) {
        let p: Vec<f64> = v.iter().map(|z| z.re).collect();
        let minus = p.iter().map(|c| -c).collect();
        points.push(p);
        points.push(minus);
        weights.push(w / 2.0);
        weights.push(w / 2.0);
    }
    Ok(AntipodalSet { dim: x.dim, points, weights })
}

/// Normalized Gegenbauer values `P_k(s) / P_k(1)` for `k = 1..=kmax` on `S^(d-1)`.
fn gegenbauer_row(d: usize, s: f64, kmax: usize, out: &mut [f64], norms: &[f64]) {
    if d == 2 {
        // Chebyshev T_k
        let (mut a, mut b) = (1.0, s);
        for k in 1..=kmax {
            out[k - 1] = b;
            (a, b) = (b, 2.0 * s * b - a);
        }
        return;
    }
    let lam = (d as f64 - 2.0) / 2.0;
    let (mut a, mut b) = (1.0, 2.0 * lam * s);
    for k in 1..=kmax {
        out[k - 1] = b / norms[k - 1];
        let kf = k as f64;
        let next = (2.0 * s * (kf + lam) * b - (kf + 2.0 * lam - 1.0) * a) / (kf + 1.0);
        (a, b) = (b, next);
    }
}

fn gegenbauer_moments(set: &AntipodalSet, kmax: u32) -> Vec<f64> {
    let kmax = kmax as usize;
    let d = set.dim;
    let norms: Vec<f64> = if d == 2 {
        vec![1.0; kmax]
    } else {
        let lam = (d as f64 - 2.0) / 2.0;
        let mut v = vec![0.0; kmax];
        let (mut a, mut b) = (1.0, 2.0 * lam);
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = b;
            let kf = (k + 1) as f64;
            let next = (2.0 * (kf + lam) * b - (kf + 2.0 * lam - 1.0) * a) / (kf + 1.0);
            (a, b) = (b, next);
        }
        v
    };
    let rows: Vec<usize> = (0..set.points.len()).collect();
    let partials: Vec<Vec<NeumaierSum>> = rows
        .par_chunks(ROW_CHUNK)
        .map(|block| {
            let mut acc = vec![NeumaierSum::new(); kmax];
            let mut vals = vec![0.0; kmax];
            for &i in block {
                for j in 0..set.points.len() {
                    let s: f64 = set.points[i].iter().zip(&set.points[j]).map(|(a, b)| a * b).sum();
                    let s = s.clamp(-1.0, 1.0);
                    gegenbauer_row(d, s, kmax, &mut vals, &norms);
                    let w = set.weights[i] * set.weights[j];
                    for (a, v) in acc.iter_mut().zip(&vals) {
                        a.add(w * v);
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![NeumaierSum::new(); kmax];
    for block in &partials {
        for (k, a) in block.iter().enumerate() {
            total[k].merge(a);
        }
    }
    total.iter().map(|s| s.value()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{DEFAULT_MAX_ORDER, GroupSpec, build_group};
    use crate::orbits::{orbit_lines, parse_vector, union_lines};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn orbit(group: &str, seed: &str) -> LineSet {
        let g = build_group(&GroupSpec::parse(group).unwrap(), &Tolerance::default(), DEFAULT_MAX_ORDER)
            .unwrap();
        orbit_lines(&g, &parse_vector(seed).unwrap(), &Tolerance::default()).unwrap()
    }

    #[test]
    fn welch_examples() {
        assert_eq!(welch_constant(Field::Complex, 2, 2).unwrap(), Rational::new(1, 3));
        assert_eq!(welch_constant(Field::Real, 3, 2).unwrap(), Rational::new(1, 5));
        assert_eq!(welch_constant(Field::Real, 2, 3).unwrap(), Rational::new(5, 16));
        for d in 1..=8 {
            assert_eq!(welch_constant(Field::Complex, d, 1).unwrap(), Rational::new(1, d as i64));
            assert_eq!(welch_constant(Field::Real, d, 1).unwrap(), Rational::new(1, d as i64));
        }
        assert!(welch_constant(Field::Real, 0, 1).is_err());
    }

    #[test]
    fn basis_and_single_line() {
        let basis: Vec<Vec<Complex64>> = (0..3)
            .map(|i| (0..3).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
            .collect();
        let x = LineSet::from_vectors(Field::Complex, &basis, vec![1.0 / 3.0; 3]).unwrap();
        assert!((potential(&x, 1) - 1.0 / 3.0).abs() < 1e-15);

        let one = LineSet::from_vectors(Field::Complex, &[vec![Complex64::new(0.6, 0.8)]], vec![1.0]).unwrap();
        for t in 1..=5 {
            assert!((potential(&one, t) - 1.0).abs() < 1e-14);
        }
        assert!((cross_potential(&one, &one, 3).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn b2_cross_potential_and_union() {
        let x = orbit("G(2,1,2)", "1,0");
        let y = orbit("G(2,1,2)", "1,1");
        // four pairs: two with |<x,y>|^2 = 1/2 twice each -> 1/2
        assert!((cross_potential(&x, &y, 1).unwrap() - 0.5).abs() < 1e-15);
        let h = Rational::new(1, 2);
        let u = union_lines(&x, &y, (h, h), &Tolerance::default()).unwrap();
        assert!((potential(&u, 3) - 5.0 / 16.0).abs() < 1e-15);
        let rep = strength(&u, 6, &Tolerance::default());
        assert_eq!(rep.strength, 3);
    }

    #[test]
    fn strength_examples() {
        let tol = Tolerance::default();
        let bini = orbit("binI", "0.8,0.3+0.5i");
        let rep = strength(&bini, 8, &tol);
        assert_eq!(rep.strength, 5);
        assert!(rep.respects_welch_bound(1e-9));
        let d3 = orbit("dihedral(3)", "0.9,0.2");
        assert_eq!(strength(&d3, 6, &tol).strength, 2);
        let heis = orbit("heis(3)", "0.9,0.2+0.4i,-0.3+0.1i");
        assert!(strength(&heis, 4, &tol).strength >= 1);
    }

    #[test]
    fn antipodal_doubling() {
        let tol = Tolerance::default();
        let single = LineSet::from_vectors(Field::Real, &[vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]], vec![1.0]).unwrap();
        let a = double_to_antipodal(&single).unwrap();
        assert_eq!(a.points, vec![vec![1.0, 0.0], vec![-1.0, -0.0]]);
        assert_eq!(a.weights, vec![0.5, 0.5]);

        let x = orbit("G(2,1,2)", "1,0");
        let y = orbit("G(2,1,2)", "1,1");
        let h = Rational::new(1, 2);
        let u = union_lines(&x, &y, (h, h), &tol).unwrap();
        let a = double_to_antipodal(&u).unwrap();
        assert_eq!(a.points.len(), 8);
        assert_eq!(a.spherical_degree(12, &tol), 7);
        assert_eq!(AntipodalSet::predicted_degree(3), 7);

        let c = orbit("binT", "1,0");
        assert!(double_to_antipodal(&c).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn unitary_invariance(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, theta in 0.0f64..std::f64::consts::TAU) {
            // U = exp(i theta) * SU(2) element from a normalized quaternion
            let n = (1.0 + a * a + b * b + c * c).sqrt();
            let (q0, q1, q2, q3) = (1.0 / n, a / n, b / n, c / n);
            let ph = Complex64::from_polar(1.0, theta);
            let u = [Complex64::new(q0, q1) * ph, Complex64::new(q2, q3) * ph,
                     Complex64::new(-q2, q3) * ph, Complex64::new(q0, -q1) * ph];
            let x = orbit("binO", "0.7,0.2-0.4i");
            let moved: Vec<Vec<Complex64>> = x.lines().map(|v| vec![u[0] * v[0] + u[1] * v[1], u[2] * v[0] + u[3] * v[1]]).collect();
            let y = LineSet::from_vectors(Field::Complex, &moved, x.weights.clone()).unwrap();
            let px = pair_potentials(&x, &x, 8);
            let py = pair_potentials(&y, &y, 8);
            for (p, q) in px.iter().zip(&py) {
                prop_assert!((p - q).abs() <= 1e-10);
            }
        }

        #[test]
        fn welch_lower_bound(pts in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 2..20)) {
            let vecs: Vec<Vec<Complex64>> = pts.iter()
                .filter(|(a, b, c)| a * a + b * b + c * c > 1e-4)
                .map(|(a, b, c)| vec![Complex64::new(*a, 0.0), Complex64::new(*b, 0.0), Complex64::new(*c, 0.0)])
                .collect();
            prop_assume!(!vecs.is_empty());
            let n = vecs.len();
            let x = LineSet::from_vectors(Field::Real, &vecs, vec![1.0 / n as f64; n]).unwrap();
            let rep = strength(&x, 12, &Tolerance::default());
            prop_assert!(rep.respects_welch_bound(1e-9));
        }
    }
}
