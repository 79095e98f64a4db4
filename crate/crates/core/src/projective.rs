//! Projective points, labeled configurations, monomial bases, evaluation
//! matrices, linear subspaces and generic projections.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, Field, FieldDescriptor};
use crate::linalg::{self, Matrix};

/// A point of `P^N`, stored with its first nonzero coordinate equal to 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint {
    coords: Vec<Elem>,
}

impl ProjPoint {
    pub fn new(field: &Field, mut coords: Vec<Elem>) -> Result<Self> {
        let Some(i) = coords.iter().position(|c| !field.is_zero(c)) else {
            return Err(Error::Degenerate("all homogeneous coordinates are zero".into()));
        };
        if !field.is_one(&coords[i]) {
            let inv = field.inv(&coords[i])?;
            for c in coords[i..].iter_mut() {
                *c = field.mul(c, &inv);
            }
        }
        Ok(ProjPoint { coords })
    }

    pub fn from_i64(field: &Field, coords: &[i64]) -> Result<Self> {
        Self::new(field, coords.iter().map(|&c| field.from_i64(c)).collect())
    }

    pub fn coords(&self) -> &[Elem] {
        &self.coords
    }

    /// Projective dimension of the ambient space.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Coordinatewise Frobenius; normal form is preserved.
    pub fn frobenius(&self, field: &Field) -> Result<Self> {
        Ok(ProjPoint { coords: self.coords.iter().map(|c| field.frobenius(c)).collect::<Result<_>>()? })
    }

    pub fn frobenius_pow(&self, field: &Field, k: usize) -> Result<Self> {
        Ok(ProjPoint { coords: self.coords.iter().map(|c| field.frobenius_pow(c, k)).collect::<Result<_>>()? })
    }

    pub fn to_json(&self, field: &Field) -> serde_json::Value {
        serde_json::Value::Array(self.coords.iter().map(|c| field.elem_to_json(c)).collect())
    }
}

/// A labeled list of distinct points of `P^N`; labels are list positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointConfig {
    field: Field,
    ambient_dim: usize,
    points: Vec<ProjPoint>,
}

#[derive(Serialize, Deserialize)]
struct PointConfigJson {
    ambient_dim: usize,
    field: FieldDescriptor,
    points: Vec<Vec<serde_json::Value>>,
}

impl PointConfig {
    /// Rejects duplicates, naming the label of the first repeated point.
    pub fn new(field: &Field, ambient_dim: usize, points: Vec<ProjPoint>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if p.dim() != ambient_dim {
                return Err(Error::DimensionMismatch(format!(
                    "point {} lives in P^{}, expected P^{}",
                    i,
                    p.dim(),
                    ambient_dim
                )));
            }
            if seen.insert(p, i).is_some() {
                return Err(Error::DuplicatePoint(i));
            }
        }
        Ok(PointConfig { field: field.clone(), ambient_dim, points })
    }

    /// Builds the support of a point list, dropping repeats (first occurrence wins).
    pub fn from_support(field: &Field, ambient_dim: usize, points: Vec<ProjPoint>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let pts: Vec<ProjPoint> = points.into_iter().filter(|p| seen.insert(p.clone())).collect();
        Self::new(field, ambient_dim, pts)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ProjPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &ProjPoint {
        &self.points[i]
    }

    pub fn labels(&self) -> Vec<usize> {
        (0..self.points.len()).collect()
    }

    /// The sub-configuration on the given labels, relabeled `0..`.
    pub fn subset(&self, labels: &[usize]) -> Result<Self> {
        let mut pts = Vec::with_capacity(labels.len());
        for &l in labels {
            let p = self.points.get(l).ok_or_else(|| Error::Precondition(format!("label {} out of range", l)))?;
            pts.push(p.clone());
        }
        Self::new(&self.field, self.ambient_dim, pts)
    }

    pub fn without(&self, label: usize) -> Self {
        let pts = self.points.iter().enumerate().filter(|(i, _)| *i != label).map(|(_, p)| p.clone()).collect();
        PointConfig { field: self.field.clone(), ambient_dim: self.ambient_dim, points: pts }
    }

    pub fn index(&self) -> HashMap<&ProjPoint, usize> {
        self.points.iter().enumerate().map(|(i, p)| (p, i)).collect()
    }

    pub fn position(&self, p: &ProjPoint) -> Option<usize> {
        self.points.iter().position(|q| q == p)
    }

    /// Applies an invertible coordinate change `x -> T x`.
    pub fn transform(&self, t: &[Vec<Elem>]) -> Result<Self> {
        let pts = self
            .points
            .iter()
            .map(|p| {
                apply_matrix(&self.field, t, p)
                    .ok_or_else(|| Error::Degenerate("coordinate change is singular on the configuration".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&self.field, self.ambient_dim, pts)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(PointConfigJson {
            ambient_dim: self.ambient_dim,
            field: self.field.descriptor().clone(),
            points: self.points.iter().map(|p| p.coords.iter().map(|c| self.field.elem_to_json(c)).collect()).collect(),
        })
        .expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let raw: PointConfigJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("point configuration: {}", e)))?;
        let field = Field::from_descriptor(&raw.field)?;
        let pts = raw
            .points
            .iter()
            .map(|p| {
                let coords = p.iter().map(|c| field.elem_from_json(c)).collect::<Result<Vec<_>>>()?;
                ProjPoint::new(&field, coords)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&field, raw.ambient_dim, pts)
    }
}

/// Monomials of degree `r` in `N+1` variables, ordered lexicographically
/// from `x_0^r` down to `x_N^r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialBasis {
    ambient_dim: usize,
    degree: usize,
    monomials: Vec<Vec<u32>>,
}

impl MonomialBasis {
    pub fn new(ambient_dim: usize, degree: usize) -> Self {
        let mut monomials = Vec::with_capacity(binomial(ambient_dim + degree, degree));
        let mut cur = vec![0u32; ambient_dim + 1];
        fill(&mut cur, 0, degree as u32, &mut monomials);
        MonomialBasis { ambient_dim, degree, monomials }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    pub fn index_of(&self, exps: &[u32]) -> Option<usize> {
        self.monomials.binary_search_by(|m| exps.cmp(m)).ok()
    }

    /// Values of all monomials at the given coordinates, in basis order.
    pub fn eval(&self, field: &Field, coords: &[Elem]) -> Vec<Elem> {
        let r = self.degree;
        let pows: Vec<Vec<Elem>> = coords
            .iter()
            .map(|c| {
                let mut v = Vec::with_capacity(r + 1);
                v.push(field.one());
                for i in 1..=r {
                    let next = field.mul(&v[i - 1], c);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Vec::with_capacity(self.monomials.len());
        eval_rec(field, &pows, 0, r, &field.one(), &mut out);
        out
    }
}

fn fill(cur: &mut Vec<u32>, var: usize, rem: u32, out: &mut Vec<Vec<u32>>) {
    if var == cur.len() - 1 {
        cur[var] = rem;
        out.push(cur.clone());
        return;
    }
    for a in (0..=rem).rev() {
        cur[var] = a;
        fill(cur, var + 1, rem - a, out);
    }
    cur[var] = 0;
}

fn eval_rec(field: &Field, pows: &[Vec<Elem>], var: usize, rem: usize, prefix: &Elem, out: &mut Vec<Elem>) {
    if var == pows.len() - 1 {
        out.push(field.mul(prefix, &pows[var][rem]));
        return;
    }
    for a in (0..=rem).rev() {
        if field.is_zero(prefix) {
            // all monomials below this prefix vanish
            let count = binomial(pows.len() - 1 - var - 1 + (rem - a), rem - a);
            out.extend(std::iter::repeat(field.zero()).take(count));
            continue;
        }
        let next = field.mul(prefix, &pows[var][a]);
        eval_rec(field, pows, var + 1, rem - a, &next, out);
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Rows are points, columns are degree-`r` monomials.
pub fn eval_matrix(config: &PointConfig, r: usize) -> Matrix {
    let basis = MonomialBasis::new(config.ambient_dim, r);
    config.points.iter().map(|p| basis.eval(&config.field, p.coords())).collect()
}

/// Projective linear subspace, stored by a reduced echelon basis of its cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSubspace {
    ambient_dim: usize,
    basis: Matrix,
}

impl LinearSubspace {
    /// The span of the given vectors; they must be independent.
    pub fn new(field: &Field, ambient_dim: usize, vectors: Matrix) -> Result<Self> {
        if vectors.iter().any(|v| v.len() != ambient_dim + 1) {
            return Err(Error::DimensionMismatch("spanning vector of the wrong length".into()));
        }
        let r = linalg::rref(field, &vectors, ambient_dim + 1);
        if r.rank() != vectors.len() || vectors.is_empty() {
            return Err(Error::Degenerate("spanning vectors are dependent or empty".into()));
        }
        Ok(LinearSubspace { ambient_dim, basis: r.rows })
    }

    pub fn from_points(field: &Field, ambient_dim: usize, points: &[&ProjPoint]) -> Result<Self> {
        Self::new(field, ambient_dim, points.iter().map(|p| p.coords().to_vec()).collect())
    }

    pub fn ambient(field: &Field, ambient_dim: usize) -> Self {
        LinearSubspace { ambient_dim, basis: linalg::identity(field, ambient_dim + 1) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Projective dimension.
    pub fn dim(&self) -> usize {
        self.basis.len() - 1
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn contains(&self, field: &Field, p: &ProjPoint) -> bool {
        if self.basis.len() == self.ambient_dim + 1 {
            return true;
        }
        let mut m = self.basis.clone();
        m.push(p.coords().to_vec());
        linalg::rank(field, &m, self.ambient_dim + 1) == self.basis.len()
    }

    pub fn frobenius(&self, field: &Field) -> Result<Self> {
        let b: Matrix = self
            .basis
            .iter()
            .map(|v| v.iter().map(|c| field.frobenius(c)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Self::new(field, self.ambient_dim, b)
    }

    pub fn to_json(&self, field: &Field) -> serde_json::Value {
        serde_json::Value::Array(
            self.basis
                .iter()
                .map(|v| serde_json::Value::Array(v.iter().map(|c| field.elem_to_json(c)).collect()))
                .collect(),
        )
    }
}

/// Image of a point under a linear map, or `None` if the point is in the kernel.
pub fn apply_matrix(field: &Field, a: &[Vec<Elem>], p: &ProjPoint) -> Option<ProjPoint> {
    let v = linalg::mat_vec(field, a, p.coords());
    ProjPoint::new(field, v).ok()
}

/// A linear projection with its center and the projected configuration.
#[derive(Clone, Debug)]
pub struct Projection {
    /// `(target+1) x (N+1)` matrix with entries in the prime subfield.
    pub matrix: Matrix,
    /// `None` when no projection takes place.
    pub center: Option<LinearSubspace>,
    pub image: PointConfig,
}

pub const PROJECTION_RETRIES: usize = 64;

/// Projection from a random center avoiding the configuration and all its
/// secant lines. Matrix entries are drawn from the prime subfield, so the
/// projection commutes with Frobenius.
pub fn random_projection<R: Rng + ?Sized>(config: &PointConfig, target_dim: usize, rng: &mut R) -> Result<Projection> {
    let field = config.field();
    let n = config.ambient_dim();
    if target_dim > n {
        return Err(Error::DimensionMismatch(format!("cannot project P^{} to P^{}", n, target_dim)));
    }
    if target_dim == n {
        return Ok(Projection { matrix: linalg::identity(field, n + 1), center: None, image: config.clone() });
    }
    for _ in 0..PROJECTION_RETRIES {
        let a: Matrix = (0..=target_dim).map(|_| (0..=n).map(|_| field.random_prime(rng)).collect()).collect();
        if linalg::rank(field, &a, n + 1) != target_dim + 1 {
            continue;
        }
        if let Some(image) = project_with(config, &a, target_dim) {
            let kernel = linalg::rank_and_kernel(field, &a, n + 1).1;
            let center = LinearSubspace::new(field, n, kernel)?;
            return Ok(Projection { matrix: a, center: Some(center), image });
        }
    }
    Err(Error::GenericityExhausted(PROJECTION_RETRIES))
}

/// Projects with a fixed matrix; `None` if the map is not injective on the
/// configuration or its kernel meets it.
pub fn project_with(config: &PointConfig, a: &[Vec<Elem>], target_dim: usize) -> Option<PointConfig> {
    let field = config.field();
    let mut pts = Vec::with_capacity(config.len());
    for p in config.points() {
        pts.push(apply_matrix(field, a, p)?);
    }
    PointConfig::new(field, target_dim, pts).ok()
}

/// A point-level model of a cycle: a precomputed labeled section whose
/// points carry the index of the component they come from.
#[derive(Clone, Debug)]
pub struct TaggedConfig {
    pub config: PointConfig,
    pub tags: Vec<usize>,
    /// Dimension of the modeled cycle.
    pub cycle_dim: usize,
}

impl TaggedConfig {
    pub fn new(config: PointConfig, tags: Vec<usize>, cycle_dim: usize) -> Result<Self> {
        if tags.len() != config.len() {
            return Err(Error::Precondition(format!(
                "inconsistent tags: {} tags for {} points",
                tags.len(),
                config.len()
            )));
        }
        Ok(TaggedConfig { config, tags, cycle_dim })
    }

    /// Labels grouped by tag, in tag order.
    pub fn groups(&self) -> Vec<(usize, Vec<usize>)> {
        let mut m: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (i, &t) in self.tags.iter().enumerate() {
            m.entry(t).or_default().push(i);
        }
        m.into_iter().collect()
    }
}

#[derive(Clone, Debug)]
pub struct Section {
    pub config: PointConfig,
    pub tags: Vec<usize>,
    /// Label of each section point in the sliced configuration.
    pub source_labels: Vec<usize>,
    pub degenerate: bool,
}

/// The points of `z` lying on `lambda`, with component tags retained.
pub fn slice_section(z: &TaggedConfig, lambda: &LinearSubspace) -> Result<Section> {
    let field = z.config.field();
    let n = z.config.ambient_dim();
    if lambda.ambient_dim() != n {
        return Err(Error::DimensionMismatch(format!("subspace lives in P^{}, cycle in P^{}", lambda.ambient_dim(), n)));
    }
    if lambda.dim() + z.cycle_dim < n {
        return Err(Error::DimensionMismatch(format!(
            "a {}-plane does not meet a {}-dimensional cycle in P^{}",
            lambda.dim(),
            z.cycle_dim,
            n
        )));
    }
    let mut pts = Vec::new();
    let mut tags = Vec::new();
    let mut src = Vec::new();
    for (i, p) in z.config.points().iter().enumerate() {
        if lambda.contains(field, p) {
            pts.push(p.clone());
            tags.push(z.tags[i]);
            src.push(i);
        }
    }
    let degenerate = pts.is_empty();
    Ok(Section { config: PointConfig::new(field, n, pts)?, tags, source_labels: src, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn normalization_and_duplicates() {
        let f = Field::prime(7).unwrap();
        let a = ProjPoint::from_i64(&f, &[0, 3, 6]).unwrap();
        assert_eq!(a, ProjPoint::from_i64(&f, &[0, 1, 2]).unwrap());
        assert!(ProjPoint::from_i64(&f, &[0, 0]).is_err());
        let b = ProjPoint::from_i64(&f, &[0, 2, 4]).unwrap();
        assert_eq!(PointConfig::new(&f, 2, vec![a.clone(), b.clone()]), Err(Error::DuplicatePoint(1)));
        assert_eq!(PointConfig::from_support(&f, 2, vec![a, b]).unwrap().len(), 1);
    }

    #[test]
    fn monomial_order_and_count() {
        let b = MonomialBasis::new(2, 2);
        assert_eq!(b.monomials()[0], vec![2, 0, 0]);
        assert_eq!(b.monomials()[5], vec![0, 0, 2]);
        assert_eq!(b.len(), 6);
        assert_eq!(MonomialBasis::new(3, 31).len(), binomial(34, 3));
        assert_eq!(b.index_of(&[0, 1, 1]), Some(4));
    }

    #[test]
    fn p1_identity_evaluation() {
        let q = Field::rational();
        let pts = vec![ProjPoint::from_i64(&q, &[1, 0]).unwrap(), ProjPoint::from_i64(&q, &[0, 1]).unwrap()];
        let s = PointConfig::new(&q, 1, pts).unwrap();
        let m = eval_matrix(&s, 1);
        assert_eq!(m, linalg::identity(&q, 2));
    }

    #[test]
    fn zero_prefix_shortcut_matches_direct_products() {
        let f = Field::prime(11).unwrap();
        let p = ProjPoint::from_i64(&f, &[0, 1, 0, 3]).unwrap();
        let b = MonomialBasis::new(3, 3);
        let fast = b.eval(&f, p.coords());
        for (m, v) in b.monomials().iter().zip(&fast) {
            let mut acc = f.one();
            for (c, &e) in p.coords().iter().zip(m) {
                acc = f.mul(&acc, &f.pow(c, e as u64));
            }
            assert_eq!(&acc, v);
        }
    }

    #[test]
    fn projection_identity_when_target_equals_source() {
        let f = Field::prime(101).unwrap();
        let s = PointConfig::new(&f, 2, vec![ProjPoint::from_i64(&f, &[1, 2, 3]).unwrap()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pr = random_projection(&s, 2, &mut rng).unwrap();
        assert!(pr.center.is_none());
        assert_eq!(pr.image, s);
    }

    #[test]
    fn slicing_by_hyperplane() {
        let f = Field::prime(101).unwrap();
        let coords: [[i64; 4]; 6] =
            [[1, 0, 0, 5], [0, 1, 0, 7], [1, 1, 0, 2], [1, 2, 3, 4], [0, 0, 1, 1], [1, 5, 9, 2]];
        let pts = coords.iter().map(|c| ProjPoint::from_i64(&f, c).unwrap()).collect();
        let s = PointConfig::new(&f, 3, pts).unwrap();
        let z = TaggedConfig::new(s, vec![0, 0, 1, 1, 2, 2], 1).unwrap();
        // x_2 = 0
        let h = LinearSubspace::new(
            &f,
            3,
            vec![
                vec![f.one(), f.zero(), f.zero(), f.zero()],
                vec![f.zero(), f.one(), f.zero(), f.zero()],
                vec![f.zero(), f.zero(), f.zero(), f.one()],
            ],
        )
        .unwrap();
        let sec = slice_section(&z, &h).unwrap();
        assert_eq!(sec.source_labels, vec![0, 1, 2]);
        assert_eq!(sec.tags, vec![0, 0, 1]);
        let full = slice_section(&z, &LinearSubspace::ambient(&f, 3)).unwrap();
        assert_eq!(full.config.len(), 6);
        let pt = LinearSubspace::from_points(&f, 3, &[&ProjPoint::from_i64(&f, &[1, 1, 1, 1]).unwrap()]).unwrap();
        assert!(slice_section(&z, &pt).is_err());
    }
}
