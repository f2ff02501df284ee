//! Generator recipes, generic over the scalar so they can be evaluated in f64
//! or in double-double precision.

use num_complex::Complex;

use super::spec::{GroupKind, GroupSpec};
use crate::numerics::Real;

/// Dense row-major complex matrix, used where nalgebra is not needed.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<R> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex<R>>,
}

impl<R: Real> CMat<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![Complex::new(R::zero(), R::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex::new(R::one(), R::zero());
        }
        m
    }

    pub fn diag(entries: &[Complex<R>]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, z) in entries.iter().enumerate() {
            m.data[i * n + i] = *z;
        }
        m
    }

    pub fn real_rows(rows: &[Vec<R>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let data = rows.iter().flatten().map(|x| Complex::new(*x, R::zero())).collect();
        CMat { rows: r, cols: c, data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex<R> {
        self.data[i * self.cols + j]
    }

    pub fn mul(&self, other: &CMat<R>) -> CMat<R> {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = out.data[idx] + a * other.at(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> CMat<R> {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.at(i, j);
            }
        }
        out
    }

    pub fn map<S: Real>(&self, f: impl Fn(Complex<R>) -> Complex<S>) -> CMat<S> {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| f(*z)).collect() }
    }
}

/// Generators and the optional map from user seed coordinates to working coordinates.
pub struct Recipe<R> {
    pub generators: Vec<CMat<R>>,
    pub seed_map: Option<CMat<R>>,
}

fn golden<R: Real>() -> R {
    (R::one() + R::from_ratio(5, 1).sqrt()).quot(R::from_ratio(2, 1))
}

/// SU(2) image of the quaternion a + bi + cj + dk.
fn quaternion<R: Real>(a: R, b: R, c: R, d: R) -> CMat<R> {
    CMat {
        rows: 2,
        cols: 2,
        data: vec![
            Complex::new(a, b),
            Complex::new(c, d),
            Complex::new(-c, d),
            Complex::new(a, -b),
        ],
    }
}

/// Householder reflection in the hyperplane orthogonal to `v`.
fn reflection<R: Real>(v: &[R]) -> CMat<R> {
    let n = v.len();
    let nn = v.iter().fold(R::zero(), |acc, x| acc + *x * *x);
    let two = R::from_ratio(2, 1);
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let delta = if i == j { R::one() } else { R::zero() };
                    delta - (two * v[i] * v[j]).quot(nn)
                })
                .collect()
        })
        .collect::<Vec<Vec<R>>>();
    CMat::real_rows(&rows)
}

fn transposition<R: Real>(n: usize, i: usize) -> CMat<R> {
    let mut m = CMat::<R>::identity(n);
    let zero = Complex::new(R::zero(), R::zero());
    let one = Complex::new(R::one(), R::zero());
    m.data[i * n + i] = zero;
    m.data[(i + 1) * n + i + 1] = zero;
    m.data[i * n + i + 1] = one;
    m.data[(i + 1) * n + i] = one;
    m
}

fn rotation<R: Real>(m: u32) -> CMat<R> {
    let z = R::unit_root(1, m as i64);
    CMat::real_rows(&[vec![z.re, -z.im], vec![z.im, z.re]])
}

/// Orthonormal basis of the sum-zero hyperplane of R^n, as an n x (n-1) matrix.
fn helmert<R: Real>(n: usize) -> CMat<R> {
    let mut rows = vec![vec![R::zero(); n - 1]; n];
    for k in 1..n {
        let kk = k as i64;
        let s = R::from_ratio(kk * (kk + 1), 1).sqrt();
        for row in rows.iter_mut().take(k) {
            row[k - 1] = R::one().quot(s);
        }
        rows[k][k - 1] = -R::from_ratio(kk, 1).quot(s);
    }
    CMat::real_rows(&rows)
}

pub fn recipe<R: Real>(spec: &GroupSpec) -> Recipe<R> {
    let one = Complex::new(R::one(), R::zero());
    let plain = |generators: Vec<CMat<R>>| Recipe { generators, seed_map: None };
    match &spec.kind {
        GroupKind::Imprimitive { m, p, n } => {
            let n = *n as usize;
            let mut gens: Vec<CMat<R>> = (0..n - 1).map(|i| transposition(n, i)).collect();
            if *m >= 2 {
                let z = R::unit_root(1, *m as i64);
                let mut d = vec![one; n];
                d[0] = z;
                d[1] = z.conj();
                gens.push(CMat::diag(&d));
                if p < m {
                    let mut d = vec![one; n];
                    d[0] = R::unit_root(*p as i64, *m as i64);
                    gens.push(CMat::diag(&d));
                }
            }
            plain(gens)
        }
        GroupKind::Symmetric { d } => {
            let n = *d as usize + 1;
            let q = helmert::<R>(n);
            let qt = q.transpose();
            let gens = (0..n - 1).map(|i| qt.mul(&transposition(n, i)).mul(&q)).collect();
            Recipe { generators: gens, seed_map: Some(qt) }
        }
        GroupKind::Dihedral { m } => {
            let flip = CMat::real_rows(&[vec![R::one(), R::zero()], vec![R::zero(), -R::one()]]);
            plain(vec![rotation(*m), flip])
        }
        GroupKind::Rotation { m } => plain(vec![rotation(*m)]),
        GroupKind::BinaryDihedral { n } => {
            let w = R::unit_root(1, *n as i64);
            let b = CMat::real_rows(&[vec![R::zero(), -R::one()], vec![R::one(), R::zero()]]);
            plain(vec![CMat::diag(&[w, w.conj()]), b])
        }
        GroupKind::BinaryTetrahedral | GroupKind::BinaryOctahedral | GroupKind::BinaryIcosahedral => {
            let (z, o, h) = (R::zero(), R::one(), R::from_ratio(1, 2));
            let mut gens = vec![quaternion(z, o, z, z), quaternion(h, h, h, h)];
            match spec.kind {
                GroupKind::BinaryOctahedral => {
                    let s = R::from_ratio(1, 2).sqrt();
                    gens.push(quaternion(s, s, z, z));
                }
                GroupKind::BinaryIcosahedral => {
                    let phi = golden::<R>();
                    gens.push(quaternion(phi * h, (phi - o) * h, h, z));
                }
                _ => {}
            }
            plain(gens)
        }
        GroupKind::H3 | GroupKind::H4 => {
            let (z, o) = (R::zero(), R::one());
            let phi = golden::<R>();
            let mut normals = if spec.kind == GroupKind::H3 {
                vec![vec![o, z, z], vec![z, o, z], vec![phi, o, phi - o]]
            } else {
                vec![vec![o, z, z, z], vec![z, o, z, z], vec![phi, o, phi - o, z]]
            };
            if spec.kind == GroupKind::H4 {
                let h = R::from_ratio(1, 2);
                normals.push(vec![h, h, h, h]);
            }
            plain(normals.iter().map(|v| reflection(v)).collect())
        }
        GroupKind::Heisenberg { d } => {
            let n = *d as usize;
            let mut shift = CMat::<R>::zeros(n, n);
            for j in 0..n {
                shift.data[((j + 1) % n) * n + j] = one;
            }
            let modulation: Vec<_> = (0..n).map(|j| R::unit_root(j as i64, n as i64)).collect();
            plain(vec![shift, CMat::diag(&modulation)])
        }
        GroupKind::Explicit(e) => {
            let gens = e
                .matrices
                .iter()
                .map(|m| CMat {
                    rows: e.dim,
                    cols: e.dim,
                    data: m
                        .iter()
                        .map(|z| Complex::new(R::from_f64_exact(z.re), R::from_f64_exact(z.im)))
                        .collect(),
                })
                .collect();
            plain(gens)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use twofloat::TwoFloat;

    fn max_unitarity_dev<R: Real>(m: &CMat<R>) -> f64 {
        let mut adj = m.transpose();
        for z in adj.data.iter_mut() {
            *z = z.conj();
        }
        let p = adj.mul(m);
        let mut dev = 0.0f64;
        for i in 0..p.rows {
            for j in 0..p.cols {
                let target = if i == j { R::one() } else { R::zero() };
                let z = p.at(i, j);
                dev = dev.max((z.re - target).abs().to_f64_lossy() + z.im.abs().to_f64_lossy());
            }
        }
        dev
    }

    #[test]
    fn catalog_generators_are_unitary() {
        for s in ["G(2,1,3)", "G(3,1,2)", "A(3)", "dihedral(5)", "binD(8)", "binO", "binI", "H3",
                  "H4", "heis(3)"] {
            let spec = GroupSpec::parse(s).unwrap();
            for g in recipe::<f64>(&spec).generators {
                assert!(max_unitarity_dev(&g) < 1e-14, "{s}");
            }
            for g in recipe::<TwoFloat>(&spec).generators {
                let dev = max_unitarity_dev(&g);
                assert!(dev < 1e-28, "{s} (dd): {dev:e}");
            }
        }
    }

    #[test]
    fn dihedral_generators() {
        let spec = GroupSpec::parse("dihedral(3)").unwrap();
        let r = recipe::<f64>(&spec);
        assert_eq!(r.generators.len(), 2);
        let rot = &r.generators[0];
        assert!((rot.at(0, 0).re + 0.5).abs() < 1e-15);
        assert!((rot.at(1, 0).re - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(r.generators[1].at(1, 1).re, -1.0);
    }

    #[test]
    fn heisenberg_generators() {
        let spec = GroupSpec::parse("heis(3)").unwrap();
        let r = recipe::<f64>(&spec);
        let s = &r.generators[0];
        // S e_0 = e_1
        assert_eq!(s.at(1, 0).re, 1.0);
        assert_eq!(s.at(0, 2).re, 1.0);
        let w = &r.generators[1];
        assert!((w.at(1, 1).re + 0.5).abs() < 1e-15);
        assert!((w.at(2, 2).im + 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn helmert_is_orthonormal() {
        let q = helmert::<f64>(5);
        let g = q.transpose().mul(&q);
        for i in 0..4 {
            for j in 0..4 {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((g.at(i, j).re - t).abs() < 1e-15);
            }
        }
        for j in 0..4 {
            let s: f64 = (0..5).map(|i| q.at(i, j).re).sum();
            assert!(s.abs() < 1e-15);
        }
    }
}
