//! Projective orbits of seed vectors and weighted line sets.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groups::{Field, FiniteMatrixGroup};
use crate::numerics::{Rational, Tolerance, parse_rational, rational_to_f64};

/// Where a line set came from.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Orbit { group: String, seed: String },
    Union(Box<Provenance>, Box<Provenance>),
    Explicit,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Orbit { group, seed } => write!(f, "{group} orbit of ({seed})"),
            Provenance::Union(a, b) => write!(f, "union of [{a}] and [{b}]"),
            Provenance::Explicit => f.write_str("explicit"),
        }
    }
}

/// Weighted set of lines, one unit representative per line.
#[derive(Clone, Debug)]
pub struct LineSet {
    pub dim: usize,
    pub field: Field,
    /// Row-major `len() x dim` coordinates.
    pub data: Vec<Complex64>,
    pub weights: Vec<f64>,
    /// Exact weights when known (orbits and rational unions).
    pub exact_weights: Option<Vec<Rational>>,
    pub provenance: Provenance,
    /// Group elements mapping the seed onto each line, for orbits.
    pub multiplicity: Option<usize>,
}

impl LineSet {
    /// Line set from explicit vectors; vectors are normalized and weights kept as given.
    pub fn from_vectors(field: Field, vectors: &[Vec<Complex64>], weights: Vec<f64>) -> Result<Self> {
        let dim = vectors.first().map_or(0, |v| v.len());
        if weights.len() != vectors.len() {
            return Err(Error::DimensionMismatch { expected: vectors.len(), got: weights.len() });
        }
        let mut data = Vec::with_capacity(dim * vectors.len());
        for v in vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
            }
            let n = norm(v);
            if n == 0.0 {
                return Err(Error::ZeroVector);
            }
            data.extend(v.iter().map(|z| z / n));
        }
        Ok(LineSet {
            dim,
            field,
            data,
            weights,
            exact_weights: None,
            provenance: Provenance::Explicit,
            multiplicity: None,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn line(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn lines(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks(self.dim.max(1))
    }

    pub fn is_signed(&self) -> bool {
        self.weights.iter().any(|w| *w < 0.0)
    }

    /// Checks the unit-norm, distinctness and weight-sum invariants.
    pub fn validate(&self, tol: &Tolerance) -> Result<()> {
        for (i, x) in self.lines().enumerate() {
            if (norm(x) - 1.0).abs() > tol.rel_eq {
                return Err(Error::Inconsistent(format!("line {i} is not a unit vector")));
            }
        }
        for i in 0..self.len() {
            for j in 0..i {
                if 1.0 - inner(self.line(i), self.line(j)).norm() <= tol.rel_eq {
                    return Err(Error::Inconsistent(format!("lines {j} and {i} coincide")));
                }
            }
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > tol.rel_eq {
            return Err(Error::Inconsistent(format!("weights sum to {total}")));
        }
        Ok(())
    }
}

#[inline]
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unit representative whose first coordinate of magnitude above `rel_eq` is real and positive.
pub fn canonical_line(v: &[Complex64], tol: &Tolerance) -> Result<Vec<Complex64>> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    let u: Vec<Complex64> = v.iter().map(|z| z / n).collect();
    let pivot = u
        .iter()
        .find(|z| z.norm() > tol.rel_eq)
        .copied()
        .ok_or(Error::ZeroVector)?;
    let phase = pivot.conj() / pivot.norm();
    let mut out: Vec<Complex64> = u.iter().map(|z| z * phase).collect();
    if let Some(p) = out.iter_mut().find(|z| z.norm() > tol.rel_eq) {
        p.im = 0.0;
    }
    Ok(out)
}

pub(crate) fn line_key(v: &[Complex64], tol: &Tolerance) -> Vec<i64> {
    let scale = tol.key_scale();
    v.iter()
        .flat_map(|z| [z.re, z.im])
        .map(|x| (x * scale).round() as i64)
        .collect()
}

/// Orbit of `seed` (given in the group's seed coordinates) as a uniformly weighted line set.
pub fn orbit_lines(group: &FiniteMatrixGroup, seed: &[Complex64], tol: &Tolerance) -> Result<LineSet> {
    let x = group.seed_to_working(seed)?;
    if norm(&x) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let x = DVector::from_vec(x);
    let images: Vec<Vec<Complex64>> = group
        .elements
        .par_iter()
        .map(|g| {
            let y = g * &x;
            canonical_line(y.as_slice(), tol)
        })
        .collect::<Result<_>>()?;

    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut data = Vec::new();
    for img in &images {
        let key = line_key(img, tol);
        match index.get(&key) {
            Some(&k) => counts[k] += 1,
            None => {
                index.insert(key, counts.len());
                counts.push(1);
                data.extend_from_slice(img);
            }
        }
    }
    let mult = counts[0];
    if counts.iter().any(|c| *c != mult) {
        let lo = counts.iter().min().unwrap();
        let hi = counts.iter().max().unwrap();
        return Err(Error::Inconsistent(format!(
            "line multiplicities range over {lo}..{hi}; the orbit is not line-transitive"
        )));
    }
    let n = counts.len();
    Ok(LineSet {
        dim: group.dim,
        field: group.field,
        data,
        weights: vec![1.0 / n as f64; n],
        exact_weights: Some(vec![Rational::new(1, n as i64); n]),
        provenance: Provenance::Orbit { group: group.spec.label.clone(), seed: format_vector(seed) },
        multiplicity: Some(mult),
    })
}

/// Weighted union with line weights `beta_X * w_x` and `beta_Y * w_y`.
///
/// Lines present in both sets are merged; zero-weight lines are dropped.
pub fn union_lines(x: &LineSet, y: &LineSet, beta: (Rational, Rational), tol: &Tolerance) -> Result<LineSet> {
    if beta.0 + beta.1 != Rational::from_integer(1) {
        return Err(Error::InvalidInput("union weighting must satisfy beta_X + beta_Y = 1".into()));
    }
    let exact = match (&x.exact_weights, &y.exact_weights) {
        (Some(wx), Some(wy)) => Some(
            wx.iter()
                .map(|w| *w * beta.0)
                .chain(wy.iter().map(|w| *w * beta.1))
                .collect::<Vec<_>>(),
        ),
        _ => None,
    };
    let floats: Vec<f64> = match &exact {
        Some(e) => e.iter().map(rational_to_f64).collect(),
        None => {
            let (bx, by) = (rational_to_f64(&beta.0), rational_to_f64(&beta.1));
            x.weights.iter().map(|w| w * bx).chain(y.weights.iter().map(|w| w * by)).collect()
        }
    };
    merge_union(x, y, floats, exact, tol)
}

/// Union with a floating weighting, used when a root did not snap to a rational.
pub fn union_lines_f64(x: &LineSet, y: &LineSet, beta_x: f64, tol: &Tolerance) -> Result<LineSet> {
    let by = 1.0 - beta_x;
    let floats = x.weights.iter().map(|w| w * beta_x).chain(y.weights.iter().map(|w| w * by)).collect();
    merge_union(x, y, floats, None, tol)
}

fn merge_union(
    x: &LineSet,
    y: &LineSet,
    floats: Vec<f64>,
    exact: Option<Vec<Rational>>,
    tol: &Tolerance,
) -> Result<LineSet> {
    if x.dim != y.dim {
        return Err(Error::DimensionMismatch { expected: x.dim, got: y.dim });
    }
    if x.field != y.field {
        return Err(Error::FieldMismatch(format!("cannot unite {} and {} line sets", x.field, y.field)));
    }
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut data = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut exact_out: Vec<Rational> = Vec::new();
    let all_lines = x.lines().chain(y.lines());
    for (k, v) in all_lines.enumerate() {
        let canon = canonical_line(v, tol)?;
        let key = line_key(&canon, tol);
        match index.get(&key) {
            Some(&i) => {
                weights[i] += floats[k];
                if let Some(e) = &exact {
                    exact_out[i] += e[k];
                }
            }
            None => {
                index.insert(key, weights.len());
                data.extend_from_slice(v);
                weights.push(floats[k]);
                if let Some(e) = &exact {
                    exact_out.push(e[k]);
                }
            }
        }
    }
    // Drop lines whose weight vanished.
    let keep: Vec<bool> = match &exact {
        Some(_) => exact_out.iter().map(|w| *w != Rational::from_integer(0)).collect(),
        None => weights.iter().map(|w| *w != 0.0).collect(),
    };
    let dim = x.dim;
    let mut out_data = Vec::new();
    let mut out_w = Vec::new();
    let mut out_e = Vec::new();
    for (i, k) in keep.iter().enumerate() {
        if *k {
            out_data.extend_from_slice(&data[i * dim..(i + 1) * dim]);
            out_w.push(weights[i]);
            if exact.is_some() {
                out_e.push(exact_out[i]);
            }
        }
    }
    Ok(LineSet {
        dim,
        field: x.field,
        data: out_data,
        weights: out_w,
        exact_weights: exact.map(|_| out_e),
        provenance: Provenance::Union(Box::new(x.provenance.clone()), Box::new(y.provenance.clone())),
        multiplicity: None,
    })
}

/// Parses a vector literal: comma-separated `a`, `a+bi`, `a-bi`, `bi`; a `sqrt5:`
/// prefix switches to real entries `p+q*s5`.
pub fn parse_vector(s: &str) -> Result<Vec<Complex64>> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("sqrt5:") {
        return rest.split(',').map(|e| parse_sqrt5(e.trim())).collect();
    }
    if s.is_empty() {
        return Err(Error::Parse("empty vector literal".into()));
    }
    s.split(',').map(|e| parse_complex(e.trim())).collect()
}

fn parse_real(s: &str) -> Result<f64> {
    if s.contains('/') {
        return Ok(rational_to_f64(&parse_rational(s)?));
    }
    let v: f64 = s.parse().map_err(|_| Error::Parse(format!("invalid number `{s}`")))?;
    if v.is_finite() { Ok(v) } else { Err(Error::Parse(format!("non-finite number `{s}`"))) }
}

/// Index of the sign separating real and imaginary parts, skipping exponent signs.
fn split_sign(s: &str) -> Option<usize> {
    let b = s.as_bytes();
    (1..b.len())
        .rev()
        .find(|&i| (b[i] == b'+' || b[i] == b'-') && !matches!(b[i - 1], b'e' | b'E'))
}

fn parse_imag(s: &str) -> Result<f64> {
    let body = s.strip_suffix('i').ok_or_else(|| Error::Parse(format!("invalid imaginary part `{s}`")))?;
    let body = body.strip_suffix('*').unwrap_or(body);
    match body {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        b => parse_real(b),
    }
}

fn parse_complex(s: &str) -> Result<Complex64> {
    if s.is_empty() {
        return Err(Error::Parse("empty vector entry".into()));
    }
    if !s.ends_with('i') {
        return Ok(Complex64::new(parse_real(s)?, 0.0));
    }
    match split_sign(s) {
        Some(k) => Ok(Complex64::new(parse_real(&s[..k])?, parse_imag(&s[k..])?)),
        None => Ok(Complex64::new(0.0, parse_imag(s)?)),
    }
}

fn parse_sqrt5(s: &str) -> Result<Complex64> {
    let root5 = 5f64.sqrt();
    let bad = || Error::Parse(format!("invalid sqrt5 entry `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    let coeff = |t: &str| -> Result<f64> {
        let body = t.strip_suffix("s5").ok_or_else(bad)?;
        let body = body.strip_suffix('*').unwrap_or(body);
        match body {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            b => parse_real(b),
        }
    };
    if !s.ends_with("s5") {
        return Ok(Complex64::new(parse_real(s)?, 0.0));
    }
    let v = match split_sign(s) {
        Some(k) => parse_real(&s[..k])? + coeff(&s[k..])? * root5,
        None => coeff(s)? * root5,
    };
    Ok(Complex64::new(v, 0.0))
}

/// Inverse of [`parse_vector`] for plain complex literals.
pub fn format_vector(v: &[Complex64]) -> String {
    v.iter().map(format_complex).collect::<Vec<_>>().join(",")
}

fn format_complex(z: &Complex64) -> String {
    if z.im == 0.0 {
        format!("{:?}", z.re)
    } else if z.im < 0.0 {
        format!("{:?}-{:?}i", z.re, -z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{DEFAULT_MAX_ORDER, GroupSpec, build_group};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn group(s: &str) -> FiniteMatrixGroup {
        build_group(&GroupSpec::parse(s).unwrap(), &Tolerance::default(), DEFAULT_MAX_ORDER).unwrap()
    }

    #[test]
    fn canonical_examples() {
        let tol = Tolerance::default();
        let v = canonical_line(&[c(0.0, 0.0), c(-2.0, 0.0)], &tol).unwrap();
        assert_eq!(v, vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = canonical_line(&[c(0.0, h), c(h, 0.0)], &tol).unwrap();
        assert!((v[0] - c(h, 0.0)).norm() < 1e-15);
        assert!((v[1] - c(0.0, -h)).norm() < 1e-15);
        assert!(matches!(canonical_line(&[c(0.0, 0.0)], &tol), Err(Error::ZeroVector)));
    }

    #[test]
    fn small_orbits() {
        let tol = Tolerance::default();
        let g = group("G(2,1,2)");
        let x = orbit_lines(&g, &parse_vector("1,0").unwrap(), &tol).unwrap();
        assert_eq!(x.len(), 2);
        assert_eq!(x.multiplicity, Some(4));
        x.validate(&tol).unwrap();

        let g = group("G(2,1,4)");
        let y = orbit_lines(&g, &parse_vector("1,1,1,1").unwrap(), &tol).unwrap();
        assert_eq!(y.len(), 8);
    }

    #[test]
    fn binary_icosahedral_generic_orbit() {
        let tol = Tolerance::default();
        let g = group("binI");
        let x = orbit_lines(&g, &parse_vector("0.8,0.3+0.5i").unwrap(), &tol).unwrap();
        assert_eq!(x.len(), 60);
        x.validate(&tol).unwrap();
    }

    #[test]
    fn union_examples() {
        let tol = Tolerance::default();
        let g = group("G(2,1,2)");
        let x = orbit_lines(&g, &parse_vector("1,0").unwrap(), &tol).unwrap();
        let y = orbit_lines(&g, &parse_vector("1,1").unwrap(), &tol).unwrap();
        let half = Rational::new(1, 2);
        let u = union_lines(&x, &y, (half, half), &tol).unwrap();
        assert_eq!(u.len(), 4);
        assert!(u.exact_weights.as_ref().unwrap().iter().all(|w| *w == Rational::new(1, 4)));
        u.validate(&tol).unwrap();

        let one = Rational::from_integer(1);
        let zero = Rational::from_integer(0);
        let only_x = union_lines(&x, &y, (one, zero), &tol).unwrap();
        assert_eq!(only_x.len(), 2);
        assert_eq!(only_x.weights, x.weights);

        let merged = union_lines(&x, &x, (half, half), &tol).unwrap();
        assert_eq!(merged.len(), 2);
        assert_eq!(merged.exact_weights, x.exact_weights);

        assert!(union_lines(&x, &y, (half, one), &tol).is_err());
        let other = orbit_lines(&group("G(2,1,3)"), &parse_vector("1,0,0").unwrap(), &tol).unwrap();
        assert!(matches!(union_lines(&x, &other, (half, half), &tol), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn vector_literals() {
        assert_eq!(parse_vector("1,0").unwrap(), vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(parse_vector("1+2i, 3-4i").unwrap(), vec![c(1.0, 2.0), c(3.0, -4.0)]);
        assert_eq!(parse_vector("i,-i,2.5i").unwrap(), vec![c(0.0, 1.0), c(0.0, -1.0), c(0.0, 2.5)]);
        assert_eq!(parse_vector("1e-3+2e+1i").unwrap(), vec![c(1e-3, 20.0)]);
        assert_eq!(parse_vector("-1,1/2").unwrap(), vec![c(-1.0, 0.0), c(0.5, 0.0)]);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let v = parse_vector("sqrt5:0,1,1/2+1/2*s5").unwrap();
        assert!((v[2].re - phi).abs() < 1e-15);
        let v = parse_vector("sqrt5:-s5,2*s5,1-s5").unwrap();
        assert!((v[0].re + 5f64.sqrt()).abs() < 1e-15);
        assert!((v[1].re - 2.0 * 5f64.sqrt()).abs() < 1e-15);
        assert!((v[2].re - 1.0 + 5f64.sqrt()).abs() < 1e-15);
        assert!(parse_vector("").is_err());
        assert!(parse_vector("1,,2").is_err());
        assert!(parse_vector("abc").is_err());
        let z = vec![c(0.1, -0.25), c(-3.0, 0.0), c(0.0, 1.0)];
        assert_eq!(parse_vector(&format_vector(&z)).unwrap(), z);
    }

    #[test]
    fn full_orbit_potential_matches_line_potential() {
        let tol = Tolerance::default();
        let g = group("binO");
        let seed = parse_vector("0.7,0.2-0.4i").unwrap();
        let lines = orbit_lines(&g, &seed, &tol).unwrap();
        let x = DVector::from_vec(seed.clone());
        let full: Vec<DVector<Complex64>> = g.elements.iter().map(|m| m * &x).map(|v| v.normalize()).collect();
        for t in 1..=6u32 {
            let mut dense = 0.0;
            for a in &full {
                for b in &full {
                    dense += a.dotc(b).norm_sqr().powi(t as i32);
                }
            }
            dense /= (full.len() * full.len()) as f64;
            let p = crate::designs::potential(&lines, t);
            assert!((p - dense).abs() <= 1e-9 * dense);
        }
    }

    proptest! {
        #[test]
        fn canonical_is_idempotent(v in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6)) {
            let tol = Tolerance::default();
            let v: Vec<Complex64> = v.into_iter().map(|(a, b)| c(a, b)).collect();
            prop_assume!(norm(&v) > 1e-3);
            let once = canonical_line(&v, &tol).unwrap();
            let twice = canonical_line(&once, &tol).unwrap();
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).norm() < 1e-14);
            }
            // same line: |<v/|v|, once>| = 1
            let ip = inner(&v, &once).norm() / norm(&v);
            prop_assert!((ip - 1.0).abs() < 1e-12);
        }

        #[test]
        fn canonical_removes_phase(v in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..5), theta in 0.0f64..std::f64::consts::TAU) {
            let tol = Tolerance::default();
            let v: Vec<Complex64> = v.into_iter().map(|(a, b)| c(a, b)).collect();
            prop_assume!(v[0].norm() > 1e-3);
            let rotated: Vec<Complex64> = v.iter().map(|z| z * Complex64::from_polar(1.0, theta)).collect();
            let a = canonical_line(&v, &tol).unwrap();
            let b = canonical_line(&rotated, &tol).unwrap();
            for (p, q) in a.iter().zip(&b) {
                prop_assert!((p - q).norm() < 1e-12);
            }
        }
    }
}
